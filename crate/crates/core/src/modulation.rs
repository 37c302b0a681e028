//! Constellations, Gray labels, ML detection and conditional bit-error
//! probabilities for OOK, M-PAM, M-QAM and M²-QAM over IM/DD.
//!
//! Every conditional BEP here has the shape `prefactor · Q(√(κ·γ))`, which is
//! what [`BepForm`] stores. The fading engines only need `(prefactor, κ)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{q_approx_sq, q_exact};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "OOK")]
    Ook,
    #[serde(rename = "M_PAM")]
    MPam,
    #[serde(rename = "M_QAM")]
    MQam,
    #[serde(rename = "M2_QAM")]
    M2Qam,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Ook => "OOK",
            Family::MPam => "M_PAM",
            Family::MQam => "M_QAM",
            Family::M2Qam => "M2_QAM",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "OOK" => Ok(Family::Ook),
            "M_PAM" => Ok(Family::MPam),
            "M_QAM" => Ok(Family::MQam),
            "M2_QAM" => Ok(Family::M2Qam),
            _ => Err(Error::invalid(format!("unknown modulation family `{s}`"))),
        }
    }
}

/// How the Gaussian tail is evaluated inside conditional BEPs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QMode {
    Exact,
    /// Two-exponential approximation, as used by the closed-form averages.
    #[default]
    Approx,
}

/// Modulation family and order. For `M2_QAM` the order is `M` and the
/// constellation has `M²` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationScheme {
    pub family: Family,
    pub order: u32,
}

impl ModulationScheme {
    pub fn new(family: Family, order: u32) -> Result<Self> {
        let s = Self { family, order };
        s.validate()?;
        Ok(s)
    }

    pub fn ook() -> Self {
        Self {
            family: Family::Ook,
            order: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.order;
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::invalid(format!(
                "{} order must be a power of two >= 2, got {m}",
                self.family
            )));
        }
        match self.family {
            Family::Ook if m != 2 => Err(Error::invalid(format!("OOK order must be 2, got {m}"))),
            Family::MQam if m < 4 => {
                Err(Error::invalid(format!("M_QAM order must be >= 4, got {m}")))
            }
            Family::MQam | Family::MPam if m > 1024 => {
                Err(Error::invalid(format!("order {m} exceeds 1024")))
            }
            Family::M2Qam if m > 32 => Err(Error::invalid(format!("M2_QAM order {m} exceeds 32"))),
            _ => Ok(()),
        }
    }

    /// Number of constellation points.
    pub fn points(&self) -> u32 {
        match self.family {
            Family::M2Qam => self.order * self.order,
            _ => self.order,
        }
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.points().trailing_zeros()
    }

    pub fn dimensions(&self) -> usize {
        match self.family {
            Family::Ook | Family::MPam => 1,
            Family::MQam | Family::M2Qam => 2,
        }
    }

    /// `(prefactor, κ)` of the scheme's conditional BEP.
    pub fn bep_form(&self) -> Result<BepForm> {
        self.validate()?;
        let m = self.order as f64;
        let l = m.log2();
        Ok(match self.family {
            Family::Ook => BepForm::new(1.0, 0.5),
            Family::MPam => BepForm::new(2.0 * (m - 1.0) / (m * l), l / (2.0 * (m - 1.0).powi(2))),
            Family::MQam => BepForm::new(
                2.0 * (1.0 - 1.0 / m.sqrt()) / l,
                3.0 * l / (2.0 * (m - 1.0)),
            ),
            Family::M2Qam => BepForm::new(2.0 * (m - 1.0) / (m * l), l / (4.0 * (m - 1.0).powi(2))),
        })
    }

    pub fn label(&self) -> String {
        match self.family {
            Family::Ook => "OOK".into(),
            Family::MPam => format!("{}-PAM", self.order),
            Family::MQam => format!("{}-QAM", self.order),
            Family::M2Qam => format!("{}-QAM", self.points()),
        }
    }
}

/// `prefactor · Q(√(κ·γ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BepForm {
    pub prefactor: f64,
    pub kappa: f64,
}

impl BepForm {
    pub fn new(prefactor: f64, kappa: f64) -> Self {
        Self { prefactor, kappa }
    }

    pub fn eval(&self, gamma: f64, mode: QMode) -> f64 {
        let arg_sq = (self.kappa * gamma).max(0.0);
        match mode {
            QMode::Exact => self.prefactor * q_exact(arg_sq.sqrt()),
            QMode::Approx => self.prefactor * q_approx_sq(arg_sq),
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_nan() {
        return Err(Error::NanInput("gamma"));
    }
    if gamma < 0.0 {
        return Err(Error::invalid(format!("SNR must be >= 0, got {gamma}")));
    }
    Ok(())
}

fn square_qam_order(m: u32) -> Result<()> {
    if m < 4 || !m.is_power_of_two() || m.trailing_zeros() % 2 != 0 {
        return Err(Error::invalid(format!(
            "square QAM needs M = 2^k with even k, got {m}"
        )));
    }
    Ok(())
}

/// Symbol error of the √M-ary PAM component of square M-QAM,
/// `2(1 − 1/√M)·Q(√(3·log₂M·γ/(M−1)))`.
pub fn pam_symbol_error(gamma: f64, m: u32) -> Result<f64> {
    check_gamma(gamma)?;
    square_qam_order(m)?;
    let mf = m as f64;
    let arg = 3.0 * mf.log2() * gamma / (mf - 1.0);
    Ok(2.0 * (1.0 - 1.0 / mf.sqrt()) * q_exact(arg.sqrt()))
}

/// `(exact, bound)` symbol error of square M-QAM: `1 − (1 − P_√M)²` and
/// `4·Q(√(3·log₂M·γ/(M−1)))`.
pub fn qam_symbol_error(gamma: f64, m: u32) -> Result<(f64, f64)> {
    let p = pam_symbol_error(gamma, m)?;
    let mf = m as f64;
    let exact = 1.0 - (1.0 - p) * (1.0 - p);
    let bound = 4.0 * q_exact((3.0 * mf.log2() * gamma / (mf - 1.0)).sqrt());
    Ok((exact, bound))
}

pub fn conditional_bep_mqam(gamma: f64, m: u32, mode: QMode) -> Result<f64> {
    check_gamma(gamma)?;
    let form = ModulationScheme::new(Family::MQam, m)?.bep_form()?;
    Ok(form.eval(gamma, mode))
}

/// `m` is the per-axis order `M` of the `M²`-point constellation.
pub fn conditional_bep_m2qam(gamma: f64, m: u32, mode: QMode) -> Result<f64> {
    check_gamma(gamma)?;
    let form = ModulationScheme::new(Family::M2Qam, m)?.bep_form()?;
    Ok(form.eval(gamma, mode))
}

pub fn conditional_bep_mpam(gamma: f64, m: u32, mode: QMode) -> Result<f64> {
    check_gamma(gamma)?;
    let form = ModulationScheme::new(Family::MPam, m)?.bep_form()?;
    Ok(form.eval(gamma, mode))
}

/// `Q(β·Ī·√(γ̄/2))` for unit-mean OOK; `effective_fade` is `β·Ī`.
pub fn conditional_bep_ook(effective_fade: f64, gamma_bar: f64, mode: QMode) -> Result<f64> {
    if effective_fade.is_nan() {
        return Err(Error::NanInput("effective_fade"));
    }
    if effective_fade <= 0.0 {
        return Err(Error::invalid(format!(
            "effective fade must be > 0, got {effective_fade}"
        )));
    }
    check_gamma(gamma_bar)?;
    let form = ModulationScheme::ook().bep_form()?;
    Ok(form.eval(gamma_bar * effective_fade * effective_fade, mode))
}

/// Union-bound symbol error of `M²`-QAM from physical quantities,
/// `((4M − 1)/M²)·Q((P/(M−1))·√(1/(4·R_s·σ²)))` with `R_s = R/log₂M²`.
pub fn m2qam_symbol_error_union(
    m: u32,
    signal_power: f64,
    bit_rate: f64,
    noise_variance: f64,
) -> Result<f64> {
    ModulationScheme::new(Family::M2Qam, m)?;
    if !(signal_power >= 0.0) || !(bit_rate > 0.0) || !(noise_variance > 0.0) {
        return Err(Error::invalid(
            "signal power must be >= 0, bit rate and noise variance > 0",
        ));
    }
    let mf = m as f64;
    let rs = bit_rate / (mf * mf).log2();
    let arg = signal_power / (mf - 1.0) * (1.0 / (4.0 * rs * noise_variance)).sqrt();
    Ok(((4.0 * mf - 1.0) / (mf * mf)) * q_exact(arg))
}

/// Nonnegative intensity constellation with unit mean optical power.
///
/// 2-D points carry optical power `x + y`; 1-D points carry `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    dims: usize,
    /// `[x, y]`; `y` is zero for 1-D constellations.
    points: Vec<[f64; 2]>,
    labels: Vec<u32>,
    d_min: f64,
}

impl Constellation {
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn point(&self, index: usize) -> [f64; 2] {
        self.points[index]
    }

    /// Gray label of each point, indexed like `points`.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn avg_power(&self) -> f64 {
        self.points.iter().map(|p| p[0] + p[1]).sum::<f64>() / self.points.len() as f64
    }

    /// Index of the point carrying `label`.
    pub fn index_of_label(&self, label: u32) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Point pairs at minimum distance (within 1e-9 relative).
    pub fn nearest_neighbours(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let d = dist(self.points[i], self.points[j]);
                if (d - self.d_min).abs() <= 1e-9 * self.d_min {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

fn grid(nx: u32, ny: u32) -> Constellation {
    // Equal spacing d on both axes, mean of x + y equal to one.
    let d = 2.0 / ((nx - 1) + (ny - 1)) as f64;
    let by = ny.trailing_zeros();
    let mut points = Vec::with_capacity((nx * ny) as usize);
    let mut labels = Vec::with_capacity((nx * ny) as usize);
    for i in 0..nx {
        for j in 0..ny {
            points.push([d * i as f64, d * j as f64]);
            labels.push((gray(i) << by) | gray(j));
        }
    }
    Constellation {
        dims: 2,
        points,
        labels,
        d_min: d,
    }
}

pub fn build_constellation(scheme: &ModulationScheme) -> Result<Constellation> {
    scheme.validate()?;
    let m = scheme.order;
    Ok(match scheme.family {
        Family::Ook | Family::MPam => {
            let d = 2.0 / (m - 1) as f64;
            Constellation {
                dims: 1,
                points: (0..m).map(|i| [d * i as f64, 0.0]).collect(),
                labels: (0..m).map(gray).collect(),
                d_min: d,
            }
        }
        Family::MQam => {
            let k = m.trailing_zeros();
            let nx = 1 << k.div_ceil(2);
            let ny = 1 << (k / 2);
            grid(nx, ny)
        }
        Family::M2Qam => grid(m, m),
    })
}

/// Maximum-likelihood detection with known channel gain: nearest
/// gain-scaled point, lowest index on ties.
pub fn ml_detect(
    received: [f64; 2],
    constellation: &Constellation,
    channel_gain: f64,
) -> Result<usize> {
    if constellation.is_empty() {
        return Err(Error::invalid("empty constellation"));
    }
    Ok(detect(received, constellation, channel_gain))
}

#[inline]
pub(crate) fn detect(received: [f64; 2], constellation: &Constellation, gain: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in constellation.points.iter().enumerate() {
        let dx = received[0] - gain * p[0];
        let dy = received[1] - gain * p[1];
        let d = dx * dx + dy * dy;
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}
