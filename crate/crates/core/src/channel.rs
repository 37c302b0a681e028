//! Physical link parameters to per-hop log-normal channel statistics.
//!
//! Intensity fades follow `I = e^{2X}` with `X ~ Normal(-σ_x², σ_x²)`, so
//! `E[I] = 1` and `E[I²] = e^{4σ_x²}`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sym_matrix_sqrt, CovarianceFactor};

/// Largest log-amplitude standard deviation for which the log-normal model
/// is used (scintillation index 0.75).
pub const SIGMA_X_MAX: f64 = 0.374;

/// Link geometry with equidistant hops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkGeometry {
    /// metres
    pub hop_length: f64,
    /// metres, source to destination
    pub total_length: f64,
    /// metres
    pub tx_aperture_diameter: f64,
    /// metres
    pub rx_aperture_diameter: f64,
    /// radians, full angle
    pub beam_divergence: f64,
    /// metres
    pub wavelength: f64,
}

impl LinkGeometry {
    /// 1200 m link, 20 cm apertures, 2 mrad divergence, 1550 nm, split
    /// into `hops` equal hops (400 m relay spacing at three hops).
    pub fn table1(hops: u32) -> Self {
        let total = 1200.0;
        Self {
            hop_length: total / hops.max(1) as f64,
            total_length: total,
            tx_aperture_diameter: 0.2,
            rx_aperture_diameter: 0.2,
            beam_divergence: 2e-3,
            wavelength: 1550e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("hop_length", self.hop_length),
            ("total_length", self.total_length),
            ("tx_aperture_diameter", self.tx_aperture_diameter),
            ("rx_aperture_diameter", self.rx_aperture_diameter),
            ("beam_divergence", self.beam_divergence),
            ("wavelength", self.wavelength),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::field(
                    format!("geometry.{name}"),
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if self.hop_length > self.total_length * (1.0 + 1e-12) {
            return Err(Error::field(
                "geometry.hop_length",
                "must not exceed total_length",
            ));
        }
        let ratio = self.total_length / self.hop_length;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::field(
                "geometry.hop_length",
                format!("total_length / hop_length = {ratio} is not an integer"),
            ));
        }
        Ok(())
    }

    pub fn hop_count(&self) -> u32 {
        (self.total_length / self.hop_length).round() as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatherProfile {
    pub name: String,
    /// α, dB/km
    pub attenuation_db_per_km: f64,
    /// C_n², m^(-2/3)
    pub cn2: f64,
}

impl WeatherProfile {
    pub fn clear() -> Self {
        Self {
            name: "clear".into(),
            attenuation_db_per_km: 0.43,
            cn2: 5e-14,
        }
    }

    pub fn light_fog() -> Self {
        Self {
            name: "light_fog".into(),
            attenuation_db_per_km: 20.0,
            cn2: 1.7e-14,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "clear" => Some(Self::clear()),
            "light_fog" | "fog" => Some(Self::light_fog()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.attenuation_db_per_km >= 0.0) || !self.attenuation_db_per_km.is_finite() {
            return Err(Error::field(
                "weather.attenuation_db_per_km",
                "must be finite and >= 0",
            ));
        }
        if !(self.cn2 > 0.0) || !self.cn2.is_finite() {
            return Err(Error::field("weather.cn2", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// Far-field spreading loss `(D_R / (D_T + θ_T·d))²`.
pub fn geometric_path_gain(geometry: &LinkGeometry, distance: f64) -> f64 {
    let spot = geometry.tx_aperture_diameter + geometry.beam_divergence * distance;
    (geometry.rx_aperture_diameter / spot).powi(2).min(1.0)
}

/// Weather attenuation `10^(-α·d_km/10)`.
pub fn atmospheric_gain(alpha_db_per_km: f64, distance: f64) -> f64 {
    10f64.powf(-alpha_db_per_km * distance / 1000.0 / 10.0)
}

/// Optical power gain of a path: spreading times attenuation.
pub fn path_gain(geometry: &LinkGeometry, weather: &WeatherProfile, distance: f64) -> f64 {
    geometric_path_gain(geometry, distance)
        * atmospheric_gain(weather.attenuation_db_per_km, distance)
}

/// Path-loss coefficient of one hop normalised to the direct link.
///
/// Returns the ratio of the hop's optical power gain to the direct link's.
/// With intensity modulation and direct detection the photocurrent is
/// proportional to received optical power, so this ratio is the electrical
/// signal-amplitude ratio and enters the SNR squared.
pub fn normalized_beta(
    geometry: &LinkGeometry,
    weather: &WeatherProfile,
    hops: u32,
) -> Result<f64> {
    if hops == 0 {
        return Err(Error::invalid("hop count must be >= 1"));
    }
    geometry.validate()?;
    let hop = geometry.total_length / hops as f64;
    if (hop - geometry.hop_length).abs() > 1e-9 * geometry.hop_length {
        return Err(Error::invalid(format!(
            "geometry hop_length {} inconsistent with {hops} hops over {} m",
            geometry.hop_length, geometry.total_length
        )));
    }
    if hops == 1 {
        return Ok(1.0);
    }
    Ok(path_gain(geometry, weather, hop) / path_gain(geometry, weather, geometry.total_length))
}

/// `σ_x = √(ln(SI + 1)) / 2`.
pub fn sigma_from_si(si: f64) -> Result<f64> {
    if !(si >= 0.0) || !si.is_finite() {
        return Err(Error::invalid(format!(
            "scintillation index must be >= 0, got {si}"
        )));
    }
    Ok((si.ln_1p()).sqrt() / 2.0)
}

/// Inverse of [`sigma_from_si`]: `SI = e^{4σ_x²} − 1`.
pub fn si_from_sigma(sigma_x: f64) -> f64 {
    (4.0 * sigma_x * sigma_x).exp_m1()
}

/// Wave model for the Rytov log-amplitude variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveModel {
    /// `σ_x² = 0.124 k^{7/6} C_n² L^{11/6}`
    #[default]
    Spherical,
    /// `σ_x² = 0.30545 k^{7/6} C_n² L^{11/6}`
    Plane,
}

impl WaveModel {
    pub fn coefficient(self) -> f64 {
        match self {
            WaveModel::Spherical => 0.124,
            WaveModel::Plane => 0.30545,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceEstimate {
    pub sigma_x_sq: f64,
    /// Rytov value before the cap.
    pub uncapped: f64,
    /// True when the value was limited to `SIGMA_X_MAX²`.
    pub capped: bool,
}

/// Rytov log-amplitude variance for a path of length `distance`, capped at
/// the log-normal validity limit.
pub fn sigma_from_cn2(
    weather: &WeatherProfile,
    geometry: &LinkGeometry,
    distance: f64,
    model: WaveModel,
) -> Result<TurbulenceEstimate> {
    if !(distance > 0.0) {
        return Err(Error::invalid(format!(
            "distance must be > 0, got {distance}"
        )));
    }
    let k = 2.0 * PI / geometry.wavelength;
    let uncapped =
        model.coefficient() * k.powf(7.0 / 6.0) * weather.cn2 * distance.powf(11.0 / 6.0);
    let cap = SIGMA_X_MAX * SIGMA_X_MAX;
    Ok(TurbulenceEstimate {
        sigma_x_sq: uncapped.min(cap),
        uncapped,
        capped: uncapped > cap,
    })
}

/// Exchangeable correlation matrix: unit diagonal, `ρ` elsewhere.
pub fn correlation_matrix(n_tx: usize, rho: f64) -> Result<DMatrix<f64>> {
    if n_tx == 0 {
        return Err(Error::invalid("n_tx must be >= 1"));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::invalid(format!("rho must be in [0, 1), got {rho}")));
    }
    let mut m = DMatrix::from_element(n_tx, n_tx, rho);
    m.fill_diagonal(1.0);
    Ok(m)
}

/// Per-hop channel statistics shared by the closed forms and the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    sigma_x_sq: f64,
    beta: f64,
    rho: f64,
    cov_factor: CovarianceFactor,
}

impl ChannelStats {
    pub fn new(sigma_x_sq: f64, beta: f64, n_tx: usize, rho: f64) -> Result<Self> {
        if !(sigma_x_sq >= 0.0) || !sigma_x_sq.is_finite() {
            return Err(Error::invalid(format!(
                "sigma_x_sq must be >= 0, got {sigma_x_sq}"
            )));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
        }
        let gamma = correlation_matrix(n_tx, rho)?;
        let cov_factor = sym_matrix_sqrt(&gamma)?;
        Ok(Self {
            sigma_x_sq,
            beta,
            rho,
            cov_factor,
        })
    }

    /// Single transmitter, unit path loss.
    pub fn siso(sigma_x_sq: f64) -> Result<Self> {
        Self::new(sigma_x_sq, 1.0, 1, 0.0)
    }

    pub fn sigma_x_sq(&self) -> f64 {
        self.sigma_x_sq
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x_sq.sqrt()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_tx(&self) -> usize {
        self.cov_factor.dimension()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn cov_factor(&self) -> &CovarianceFactor {
        &self.cov_factor
    }
}

/// Normalised intensity gains of the `N_t` transmitters of one hop.
#[derive(Debug, Clone, PartialEq)]
pub struct FadeVector(pub Vec<f64>);

impl FadeVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Equal-gain average `(1/N_t)∑ I_i`.
    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

pub fn sample_fades<R: Rng + ?Sized>(stats: &ChannelStats, rng: &mut R) -> FadeVector {
    let mut z = vec![0.0; stats.n_tx()];
    let mut out = vec![0.0; stats.n_tx()];
    sample_fades_into(stats, rng, &mut z, &mut out);
    FadeVector(out)
}

/// Allocation-free variant of [`sample_fades`]; `scratch` and `out` must
/// both have length `N_t`.
pub fn sample_fades_into<R: Rng + ?Sized>(
    stats: &ChannelStats,
    rng: &mut R,
    scratch: &mut [f64],
    out: &mut [f64],
) {
    if stats.sigma_x_sq == 0.0 {
        out.fill(1.0);
        return;
    }
    for z in scratch.iter_mut() {
        *z = rng.sample(StandardNormal);
    }
    stats.cov_factor.apply(scratch, out);
    let sigma = stats.sigma_x();
    for v in out.iter_mut() {
        *v = (2.0 * (sigma * *v - stats.sigma_x_sq)).exp();
    }
}
