//! Deterministic numerical building blocks: compensated accumulation,
//! exact-reduction trigonometry in units of π, and adaptive
//! Gauss–Kronrod quadrature.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Neumaier's variant of Kahan summation.
///
/// Adding an exact zero leaves both the running sum and the carried error
/// untouched, so skipping terms that underflow to zero does not change the
/// result bit-for-bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    pub fn sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc.value()
    }
}

/// Component-wise [`NeumaierSum`] for complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: Complex64) {
        self.re.add(value.re);
        self.im.add(value.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `x - 2·round(x/2)`, exact for |x| < 2^52. Result lies in [-1, 1].
#[inline]
fn reduce_mod2(x: f64) -> f64 {
    x - 2.0 * (0.5 * x).round()
}

/// sin(πx) with exact argument reduction; integer `x` gives exactly 0.
pub fn sin_pi(x: f64) -> f64 {
    let mut r = reduce_mod2(x);
    if r > 0.5 {
        r = 1.0 - r;
    } else if r < -0.5 {
        r = -1.0 - r;
    }
    if r == 0.0 {
        return 0.0;
    }
    (std::f64::consts::PI * r).sin()
}

/// cos(πx) with exact argument reduction; half-integer `x` gives exactly 0.
pub fn cos_pi(x: f64) -> f64 {
    let r = reduce_mod2(x).abs();
    if r <= 0.25 {
        (std::f64::consts::PI * r).cos()
    } else if r < 0.75 {
        let s = 0.5 - r;
        if s == 0.0 {
            0.0
        } else {
            (std::f64::consts::PI * s).sin()
        }
    } else {
        -(std::f64::consts::PI * (1.0 - r)).cos()
    }
}

/// e^{iπa}.
#[inline]
pub fn expi_pi(a: f64) -> Complex64 {
    Complex64::new(cos_pi(a), sin_pi(a))
}

/// e^{iπ·k·b} for integer `k`.
///
/// The product `k·b` is split into its rounded value and the exact rounding
/// error (fused multiply-add), the rounded part is reduced modulo 2 exactly,
/// and the error term is added back. Phases with large integer multipliers
/// therefore keep absolute accuracy near one ulp of the reduced angle.
#[inline]
pub fn expi_pi_mul(k: i64, b: f64) -> Complex64 {
    expi_pi(reduced_product(k, b))
}

/// k·b reduced modulo 2, carrying the exact rounding error of the product.
/// Antisymmetric: `reduced_product(-k, b) == -reduced_product(k, b)`.
#[inline]
pub fn reduced_product(k: i64, b: f64) -> f64 {
    let kf = k as f64;
    let p = kf * b;
    let e = kf.mul_add(b, -p);
    reduce_mod2(p) + e
}

/// (-1)^n for any signed integer.
#[inline]
pub fn parity_sign(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss 7-point weights at XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
    }
}

/// Settings for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    /// Target bound on the summed panel error estimates.
    pub abs_tol: f64,
    /// Equal panels the interval is split into before refinement starts.
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            initial_panels: 16,
            max_panels: 4096,
        }
    }
}

impl Quadrature {
    pub fn with_tolerance(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub error_estimate: f64,
    pub panels: usize,
}

/// Globally adaptive 7/15-point Gauss–Kronrod integration of a complex
/// integrand over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate meets `settings.abs_tol`. Panel values are accumulated in
/// left-to-right order, so the result does not depend on refinement order.
pub fn integrate<F>(f: F, a: f64, b: f64, settings: Quadrature) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
{
    let n0 = settings.initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut panels: Vec<Panel> = (0..n0)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == n0 {
                b
            } else {
                a + width * (i + 1) as f64
            };
            gk15(&f, lo, hi)
        })
        .collect();

    loop {
        let total_error: f64 = NeumaierSum::sum_iter(panels.iter().map(|p| p.error));
        if total_error <= settings.abs_tol {
            panels.sort_by(|p, q| p.a.total_cmp(&q.a));
            let mut acc = ComplexSum::new();
            for p in &panels {
                acc.add(p.value);
            }
            return Ok(Integral {
                value: acc.value(),
                error_estimate: total_error,
                panels: panels.len(),
            });
        }
        let (worst_idx, worst) = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .map(|(i, p)| (i, *p))
            .expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if panels.len() >= settings.max_panels || mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature {
                total_error,
                worst_interval: (worst.a, worst.b),
                worst_error: worst.error,
            });
        }
        panels[worst_idx] = gk15(&f, worst.a, mid);
        panels.push(gk15(&f, mid, worst.b));
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(f: F, a: f64, b: f64, settings: Quadrature) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, settings).map(|r| r.value.re)
}
