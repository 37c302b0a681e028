//! Average BER per hop, multi-hop combining, BER curves and SNR gains.

mod engine;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use engine::{expectation, Integrand};
pub use engine::{Aggregate, NodePlacement, MAX_TERMS};

use crate::channel::ChannelStats;
use crate::error::{Error, Result};
use crate::modulation::{Family, ModulationScheme, QMode};
use crate::numerics::{gauss_hermite, QuadratureRule};
use crate::scenario::LinkScenario;
use crate::simulation::BerEstimate;

/// Everything needed to average one hop's conditional BEP over fading.
#[derive(Debug, Clone)]
pub struct HopBerModel {
    pub scheme: ModulationScheme,
    pub stats: ChannelStats,
    pub quadrature: Arc<QuadratureRule>,
    pub q_mode: QMode,
    pub placement: NodePlacement,
}

impl HopBerModel {
    pub fn new(scheme: ModulationScheme, stats: ChannelStats, order: usize) -> Result<Self> {
        Self::with_rule(scheme, stats, Arc::new(gauss_hermite(order)?))
    }

    pub fn with_rule(
        scheme: ModulationScheme,
        stats: ChannelStats,
        rule: Arc<QuadratureRule>,
    ) -> Result<Self> {
        scheme.validate()?;
        if stats.sigma_x_sq() > 0.0 && rule.order() < 10 {
            return Err(Error::invalid(format!(
                "quadrature order must be >= 10 with fading, got {}",
                rule.order()
            )));
        }
        Ok(Self {
            scheme,
            stats,
            quadrature: rule,
            q_mode: QMode::Approx,
            placement: NodePlacement::Recentred,
        })
    }

    pub fn with_q_mode(mut self, mode: QMode) -> Self {
        self.q_mode = mode;
        self
    }

    pub fn with_placement(mut self, placement: NodePlacement) -> Self {
        self.placement = placement;
        self
    }

    /// OOK repetition coding combines intensities; the QAM and PAM
    /// expressions average squared intensities.
    pub fn aggregate(&self) -> Aggregate {
        match self.scheme.family {
            Family::Ook => Aggregate::SquaredMean,
            _ => Aggregate::MeanSquare,
        }
    }

    fn expect(&self, integrand: Integrand) -> Result<f64> {
        expectation(
            &self.quadrature,
            &self.stats,
            self.aggregate(),
            self.placement,
            integrand,
        )
    }
}

fn check_gamma_bar(gamma_bar: f64) -> Result<()> {
    if gamma_bar.is_nan() {
        return Err(Error::NanInput("gamma_bar"));
    }
    if !(0.0..f64::INFINITY).contains(&gamma_bar) {
        return Err(Error::invalid(format!(
            "average SNR must be finite and >= 0, got {gamma_bar}"
        )));
    }
    Ok(())
}

/// Average BER of one hop for any family and transmitter count.
pub fn ber_hop(gamma_bar: f64, model: &HopBerModel) -> Result<f64> {
    check_gamma_bar(gamma_bar)?;
    let form = model.scheme.bep_form()?;
    let beta = model.stats.beta();
    let c = form.kappa * gamma_bar * beta * beta;
    let v = match model.q_mode {
        QMode::Approx => {
            let t1 = model.expect(Integrand::Exp(c / 2.0))?;
            let t2 = model.expect(Integrand::Exp(2.0 * c / 3.0))?;
            form.prefactor * (t1 / 12.0 + t2 / 4.0)
        }
        QMode::Exact => form.prefactor * model.expect(Integrand::Q(c / 2.0))?,
    };
    Ok(v)
}

fn require(model: &HopBerModel, family: Family, siso: bool) -> Result<()> {
    if model.scheme.family != family {
        return Err(Error::invalid(format!(
            "expected {family} scheme, got {}",
            model.scheme.family
        )));
    }
    if siso && model.stats.n_tx() != 1 {
        return Err(Error::invalid(format!(
            "single-transmitter formula called with N_t = {}",
            model.stats.n_tx()
        )));
    }
    Ok(())
}

/// Single-transmitter M-QAM hop BER.
pub fn ber_hop_mqam(gamma_bar: f64, model: &HopBerModel) -> Result<f64> {
    require(model, Family::MQam, true)?;
    ber_hop(gamma_bar, model)
}

/// Single-transmitter M²-QAM hop BER.
pub fn ber_hop_m2qam(gamma_bar: f64, model: &HopBerModel) -> Result<f64> {
    require(model, Family::M2Qam, true)?;
    ber_hop(gamma_bar, model)
}

/// Repetition-coded MISO hop BER for M-QAM or M²-QAM.
pub fn ber_hop_miso(gamma_bar: f64, model: &HopBerModel, family: Family) -> Result<f64> {
    if !matches!(family, Family::MQam | Family::M2Qam) {
        return Err(Error::invalid(format!(
            "MISO closed form is for QAM families, got {family}"
        )));
    }
    require(model, family, false)?;
    ber_hop(gamma_bar, model)
}

fn check_probability(b: f64, hi: f64) -> Result<()> {
    if b.is_nan() {
        return Err(Error::NanInput("hop BER"));
    }
    if !(0.0..=hi).contains(&b) {
        return Err(Error::invalid(format!(
            "hop BER must lie in [0, {hi}], got {b}"
        )));
    }
    Ok(())
}

/// `1 − ∏(1 − b_k)`
pub fn multihop_upper_bound(hop_bers: &[f64]) -> Result<f64> {
    let mut keep = 1.0;
    for &b in hop_bers {
        check_probability(b, 1.0)?;
        keep *= 1.0 - b;
    }
    Ok((1.0 - keep).clamp(0.0, 1.0))
}

/// `½(1 − (1 − 2b)^K)` for `K` statistically identical hops.
pub fn multihop_average(hop_ber: f64, k_hops: u32) -> Result<f64> {
    check_probability(hop_ber, 0.5)?;
    if k_hops == 0 {
        return Err(Error::invalid("hop count must be >= 1"));
    }
    if k_hops == 1 {
        return Ok(hop_ber);
    }
    Ok(0.5 * (1.0 - (1.0 - 2.0 * hop_ber).powi(k_hops as i32)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub label: String,
    pub snr_grid_db: Vec<f64>,
    /// Average-combined end-to-end BER.
    pub analytic: Vec<f64>,
    /// Independent-hop upper bound.
    pub upper_bound: Vec<f64>,
    /// Monte-Carlo estimates; `None` entries were not simulated.
    pub mc: Option<Vec<Option<BerEstimate>>>,
    pub metadata: Vec<(String, String)>,
}

impl BerCurve {
    pub fn len(&self) -> usize {
        self.snr_grid_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snr_grid_db.is_empty()
    }

    /// SNR in dB where the analytic curve first falls to `target`.
    pub fn crossing_db(&self, target: f64) -> Result<f64> {
        crossing(&self.label, &self.snr_grid_db, &self.analytic, target)
    }
}

/// Evaluates the scenario's end-to-end BER on `snr_grid_db`, grid points in
/// parallel.
pub fn ber_curve(scenario: &LinkScenario, snr_grid_db: &[f64]) -> Result<BerCurve> {
    scenario.validate()?;
    if snr_grid_db.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("SNR grid contains non-finite values"));
    }
    let model = scenario.hop_model()?;
    let k = scenario.hops;
    let rows: Vec<(f64, f64)> = snr_grid_db
        .par_iter()
        .map(|&db| {
            let hop = ber_hop(10f64.powf(db / 10.0), &model)?;
            if k == 1 {
                return Ok((hop, hop));
            }
            let avg = multihop_average(hop.min(0.5), k)?;
            let ub = multihop_upper_bound(&vec![hop; k as usize])?;
            Ok((avg, ub))
        })
        .collect::<Result<_>>()?;
    let (analytic, upper_bound) = rows.into_iter().unzip();
    Ok(BerCurve {
        label: scenario.label(),
        snr_grid_db: snr_grid_db.to_vec(),
        analytic,
        upper_bound,
        mc: None,
        metadata: scenario.metadata()?,
    })
}

fn crossing(label: &str, grid: &[f64], ber: &[f64], target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid(format!(
            "target BER must lie in (0, 1), got {target}"
        )));
    }
    let unreachable = || Error::TargetUnreachable {
        curve: label.to_string(),
        target,
    };
    let first = ber.first().ok_or_else(unreachable)?;
    if *first == target {
        return Ok(grid[0]);
    }
    if *first < target {
        return Err(unreachable());
    }
    for i in 1..ber.len() {
        if ber[i] <= target {
            let (x0, x1) = (grid[i - 1], grid[i]);
            let (l0, l1, lt) = (ber[i - 1].log10(), ber[i].log10(), target.log10());
            if l0 == l1 {
                return Ok(x0);
            }
            return Ok(x0 + (x1 - x0) * (l0 - lt) / (l0 - l1));
        }
    }
    Err(unreachable())
}

/// `SNR_b(target) − SNR_a(target)` in dB; positive when `curve_a` needs
/// less SNR.
pub fn snr_gain_at_target(curve_a: &BerCurve, curve_b: &BerCurve, target_ber: f64) -> Result<f64> {
    let a = curve_a.crossing_db(target_ber)?;
    let b = curve_b.crossing_db(target_ber)?;
    Ok(b - a)
}
