//! Experiment descriptions, JSON configs, presets and figure sets.

use serde::{Deserialize, Serialize};

use crate::analysis::{HopBerModel, NodePlacement, MAX_TERMS};
use crate::channel::{
    normalized_beta, sigma_from_cn2, sigma_from_si, ChannelStats, LinkGeometry, WaveModel,
    WeatherProfile,
};
use crate::error::{Error, Result};
use crate::modulation::{Family, ModulationScheme, QMode};
use crate::numerics::MAX_ORDER;
use crate::simulation::SimulationParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeatherSpec {
    Preset(String),
    Custom(WeatherProfile),
}

impl WeatherSpec {
    pub fn resolve(&self) -> Result<WeatherProfile> {
        match self {
            WeatherSpec::Preset(name) => WeatherProfile::preset(name)
                .ok_or_else(|| Error::field("weather", format!("unknown weather preset `{name}`"))),
            WeatherSpec::Custom(w) => {
                w.validate()?;
                Ok(w.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMode {
    /// From the scintillation index.
    FromSi,
    /// Rytov variance over the hop length, capped at the log-normal limit.
    #[default]
    FromCn2,
}

impl std::str::FromStr for SigmaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "from_si" => Ok(SigmaMode::FromSi),
            "from_cn2" => Ok(SigmaMode::FromCn2),
            _ => Err(Error::invalid(format!(
                "sigma mode must be from_si or from_cn2, got `{s}`"
            ))),
        }
    }
}

/// Average electrical SNR sweep in dB, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrSweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for SnrSweep {
    fn default() -> Self {
        Self {
            start: -40.0,
            stop: 80.0,
            step: 1.0,
        }
    }
}

const MAX_GRID: usize = 1_000_000;

impl SnrSweep {
    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::field("snr", "start and stop must be finite"));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::field(
                "snr.step",
                format!("must be finite and > 0, got {}", self.step),
            ));
        }
        if self.stop < self.start {
            return Err(Error::field("snr.stop", "must be >= snr.start"));
        }
        if (self.stop - self.start) / self.step + 1.0 > MAX_GRID as f64 {
            return Err(Error::field(
                "snr.step",
                format!("grid exceeds {MAX_GRID} points"),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Full description of one link experiment. Unset fields take the
/// Table 1 defaults (clear weather, 1200 m, three 400 m hops, 8-QAM).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkScenario {
    pub name: String,
    pub weather: WeatherSpec,
    /// Defaults to Table 1 geometry split into `hops` equal hops.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<LinkGeometry>,
    pub hops: u32,
    pub n_tx: usize,
    pub rho: f64,
    pub scheme: ModulationScheme,
    pub sigma_mode: SigmaMode,
    pub scintillation_index: f64,
    pub wave_model: WaveModel,
    pub quadrature_order: usize,
    pub q_mode: QMode,
    pub node_placement: NodePlacement,
    /// Require `2^hops` constellation points.
    pub spectral_parity: bool,
    pub snr: SnrSweep,
    pub target_ber: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<SimulationParams>,
}

impl Default for LinkScenario {
    fn default() -> Self {
        Self {
            name: String::new(),
            weather: WeatherSpec::Preset("clear".into()),
            geometry: None,
            hops: 3,
            n_tx: 1,
            rho: 0.3,
            scheme: ModulationScheme {
                family: Family::MQam,
                order: 8,
            },
            sigma_mode: SigmaMode::FromCn2,
            scintillation_index: 0.75,
            wave_model: WaveModel::Spherical,
            quadrature_order: 20,
            q_mode: QMode::Approx,
            node_placement: NodePlacement::Recentred,
            spectral_parity: true,
            snr: SnrSweep::default(),
            target_ber: 1e-9,
            mc: None,
        }
    }
}

/// Channel quantities a scenario resolves to.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedChannel {
    pub weather: WeatherProfile,
    pub geometry: LinkGeometry,
    pub beta: f64,
    pub sigma_x_sq: f64,
    /// Set when the Rytov variance hit the log-normal cap.
    pub capped: bool,
}

impl LinkScenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn relays(&self) -> u32 {
        self.hops.saturating_sub(1)
    }

    pub fn geometry(&self) -> LinkGeometry {
        self.geometry
            .unwrap_or_else(|| LinkGeometry::table1(self.hops))
    }

    pub fn validate(&self) -> Result<()> {
        if self.hops == 0 || self.hops > 64 {
            return Err(Error::field(
                "hops",
                format!("must be in 1..=64, got {}", self.hops),
            ));
        }
        if self.n_tx == 0 || self.n_tx > 8 {
            return Err(Error::field(
                "n_tx",
                format!("must be in 1..=8, got {}", self.n_tx),
            ));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::field(
                "rho",
                format!("must lie in [0, 1), got {}", self.rho),
            ));
        }
        self.scheme
            .validate()
            .map_err(|e| Error::field("scheme", e.to_string()))?;
        if self.spectral_parity && self.scheme.points() as u64 != 1u64 << self.hops.min(63) {
            return Err(Error::field(
                "scheme.order",
                format!(
                    "{} has {} points but {} hops need 2^{} (set spectral_parity to false to allow)",
                    self.scheme.label(),
                    self.scheme.points(),
                    self.hops,
                    self.hops
                ),
            ));
        }
        self.weather.resolve()?;
        let g = self.geometry();
        g.validate()?;
        if g.hop_count() != self.hops {
            return Err(Error::field(
                "geometry.hop_length",
                format!("gives {} hops but hops = {}", g.hop_count(), self.hops),
            ));
        }
        if self.quadrature_order < 10 || self.quadrature_order > MAX_ORDER {
            return Err(Error::field(
                "quadrature_order",
                format!("must be in 10..={MAX_ORDER}, got {}", self.quadrature_order),
            ));
        }
        let terms = (self.quadrature_order as f64).powi(self.n_tx as i32);
        if terms > MAX_TERMS {
            return Err(Error::field(
                "quadrature_order",
                format!(
                    "{}^{} nested terms exceed {MAX_TERMS:e}",
                    self.quadrature_order, self.n_tx
                ),
            ));
        }
        if self.sigma_mode == SigmaMode::FromSi && !(self.scintillation_index >= 0.0) {
            return Err(Error::field("scintillation_index", "must be >= 0"));
        }
        self.snr.validate()?;
        if !(self.target_ber > 0.0 && self.target_ber < 0.5) {
            return Err(Error::field(
                "target_ber",
                format!("must lie in (0, 0.5), got {}", self.target_ber),
            ));
        }
        if let Some(mc) = &self.mc {
            mc.validate()?;
        }
        Ok(())
    }

    pub fn resolve_channel(&self) -> Result<ResolvedChannel> {
        let weather = self.weather.resolve()?;
        let geometry = self.geometry();
        let beta = normalized_beta(&geometry, &weather, self.hops)?;
        let (sigma_x_sq, capped) = match self.sigma_mode {
            SigmaMode::FromSi => (sigma_from_si(self.scintillation_index)?.powi(2), false),
            SigmaMode::FromCn2 => {
                let t = sigma_from_cn2(&weather, &geometry, geometry.hop_length, self.wave_model)?;
                (t.sigma_x_sq, t.capped)
            }
        };
        Ok(ResolvedChannel {
            weather,
            geometry,
            beta,
            sigma_x_sq,
            capped,
        })
    }

    pub fn hop_stats(&self) -> Result<ChannelStats> {
        let ch = self.resolve_channel()?;
        ChannelStats::new(ch.sigma_x_sq, ch.beta, self.n_tx, self.rho)
    }

    pub fn hop_model(&self) -> Result<HopBerModel> {
        Ok(
            HopBerModel::new(self.scheme, self.hop_stats()?, self.quadrature_order)?
                .with_q_mode(self.q_mode)
                .with_placement(self.node_placement),
        )
    }

    pub fn label(&self) -> String {
        if !self.name.is_empty() {
            return self.name.clone();
        }
        let weather = match &self.weather {
            WeatherSpec::Preset(n) => n.clone(),
            WeatherSpec::Custom(w) => w.name.clone(),
        };
        format!(
            "{} K={} N_t={} {weather}",
            self.scheme.label(),
            self.hops,
            self.n_tx
        )
    }

    /// FNV-1a over the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("scenario serialises");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in json.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    pub fn metadata(&self) -> Result<Vec<(String, String)>> {
        let ch = self.resolve_channel()?;
        Ok(vec![
            ("scenario".into(), self.label()),
            ("fingerprint".into(), self.fingerprint()),
            (
                "snr_axis".into(),
                "average electrical SNR per bit in dB".into(),
            ),
            ("weather".into(), ch.weather.name.clone()),
            ("hops".into(), self.hops.to_string()),
            ("relays".into(), self.relays().to_string()),
            ("n_tx".into(), self.n_tx.to_string()),
            ("rho".into(), self.rho.to_string()),
            ("scheme".into(), self.scheme.label()),
            ("beta".into(), format!("{:.6}", ch.beta)),
            ("sigma_x_sq".into(), format!("{:.6}", ch.sigma_x_sq)),
            ("sigma_capped".into(), ch.capped.to_string()),
            ("quadrature_order".into(), self.quadrature_order.to_string()),
            ("q_mode".into(), format!("{:?}", self.q_mode).to_lowercase()),
            (
                "node_placement".into(),
                format!("{:?}", self.node_placement).to_lowercase(),
            ),
            ("target_ber".into(), format!("{:e}", self.target_ber)),
        ])
    }
}

/// Curve keys of the two figure sets, in plotting order.
pub const FIGURE_CURVES: [&str; 6] = [
    "8qam_multihop_miso",
    "8qam_multihop_siso",
    "8pam_multihop_miso",
    "8pam_multihop_siso",
    "ook_miso_rc",
    "ook_siso",
];

pub const FIGURES: [&str; 2] = ["fig_clear", "fig_fog"];

fn figure_curve(weather: &str, key: &str) -> Option<LinkScenario> {
    let (family, order, hops, n_tx) = match key {
        "8qam_multihop_miso" => (Family::MQam, 8, 3, 3),
        "8qam_multihop_siso" => (Family::MQam, 8, 3, 1),
        "8pam_multihop_miso" => (Family::MPam, 8, 3, 3),
        "8pam_multihop_siso" => (Family::MPam, 8, 3, 1),
        "ook_miso_rc" => (Family::Ook, 2, 1, 3),
        "ook_siso" => (Family::Ook, 2, 1, 1),
        _ => return None,
    };
    let weather_name = match weather {
        "clear" => "clear",
        "fog" => "light_fog",
        _ => return None,
    };
    Some(LinkScenario {
        name: format!("{weather}_{key}"),
        weather: WeatherSpec::Preset(weather_name.into()),
        hops,
        n_tx,
        scheme: ModulationScheme { family, order },
        ..Default::default()
    })
}

pub fn preset_names() -> Vec<String> {
    ["clear", "fog"]
        .iter()
        .flat_map(|w| FIGURE_CURVES.iter().map(move |k| format!("{w}_{k}")))
        .collect()
}

/// Built-in scenario by name, e.g. `clear_8qam_multihop_miso`.
pub fn preset(name: &str) -> Option<LinkScenario> {
    let (weather, key) = name.split_once('_')?;
    figure_curve(weather, key)
}

/// A gain reported in a figure summary: SNR of `worse` minus SNR of `better`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSpec {
    pub label: &'static str,
    pub better: &'static str,
    pub worse: &'static str,
}

pub const FIGURE_GAINS: [GainSpec; 6] = [
    GainSpec {
        label: "qam_over_pam_multihop_miso",
        better: "8qam_multihop_miso",
        worse: "8pam_multihop_miso",
    },
    GainSpec {
        label: "qam_over_pam_multihop_siso",
        better: "8qam_multihop_siso",
        worse: "8pam_multihop_siso",
    },
    GainSpec {
        label: "miso_over_siso_8qam",
        better: "8qam_multihop_miso",
        worse: "8qam_multihop_siso",
    },
    GainSpec {
        label: "miso_over_siso_8pam",
        better: "8pam_multihop_miso",
        worse: "8pam_multihop_siso",
    },
    GainSpec {
        label: "pam_multihop_miso_over_ook_miso_rc",
        better: "8pam_multihop_miso",
        worse: "ook_miso_rc",
    },
    GainSpec {
        label: "pam_multihop_siso_over_ook_siso",
        better: "8pam_multihop_siso",
        worse: "ook_siso",
    },
];

/// The six scenarios of a figure, keyed as in [`FIGURE_CURVES`].
pub fn figure_scenarios(which: &str) -> Option<Vec<(&'static str, LinkScenario)>> {
    let weather = match which {
        "fig_clear" => "clear",
        "fig_fog" => "fog",
        _ => return None,
    };
    FIGURE_CURVES
        .iter()
        .map(|k| figure_curve(weather, k).map(|s| (*k, s)))
        .collect()
}
