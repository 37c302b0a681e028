//! Adaptive Gauss–Kronrod integration used as an independent reference for
//! the quadrature engines. Not used on any production path.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae/weights and the embedded 7-point Gauss weights
// (QUADPACK qk15).
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
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 50_000;

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive G7/K15 integration of `f` over `[a, b]`, refined until
/// the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    let n0 = initial_panels.max(1);
    let width = (b - a) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(4 * n0);
    let mut total = 0.0;
    let mut total_err = 0.0;
    for i in 0..n0 {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + width };
        let (value, error) = kronrod(&f, lo, hi);
        total += value;
        total_err += error;
        heap.push(Panel {
            a: lo,
            b: hi,
            value,
            error,
        });
    }
    let mut intervals = n0;
    loop {
        if !total.is_finite() {
            return Err(Error::IntegrationFailure {
                intervals,
                error: f64::INFINITY,
            });
        }
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if intervals >= MAX_INTERVALS {
            return Err(Error::IntegrationFailure {
                intervals,
                error: total_err,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = kronrod(&f, worst.a, mid);
        let (v2, e2) = kronrod(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        intervals += 1;
    }
}

/// `E[f(e^{2X})]` with `X ~ Normal(-σ², σ²)`, so the argument is a
/// unit-mean log-normal intensity.
///
/// Integrates over the standardised variable on `[-40, 40]` (the Gaussian
/// density beyond is below 1e-347) to 1e-12 absolute or 1e-12 relative,
/// whichever is tighter.
pub fn lognormal_expectation_oracle<F: Fn(f64) -> f64>(integrand: F, sigma_sq: f64) -> Result<f64> {
    if !(sigma_sq >= 0.0) || !sigma_sq.is_finite() {
        return Err(Error::invalid(format!(
            "sigma_sq must be >= 0, got {sigma_sq}"
        )));
    }
    if sigma_sq == 0.0 {
        return Ok(integrand(1.0));
    }
    let sigma = sigma_sq.sqrt();
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let g = |z: f64| {
        let intensity = (2.0 * (sigma * z - sigma_sq)).exp();
        integrand(intensity) * norm * (-0.5 * z * z).exp()
    };
    integrate_adaptive(g, -40.0, 40.0, 160, f64::MIN_POSITIVE, 1e-12)
        .or_else(|_| integrate_adaptive(g, -40.0, 40.0, 160, 1e-12, 0.0))
}
