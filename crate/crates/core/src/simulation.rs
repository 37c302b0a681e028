//! Monte-Carlo link simulation with decode-and-forward relays.
//!
//! Each symbol draws a fresh fade vector per hop. The receiver sees
//! `r = η·β·Ī·x + n` per signal dimension, detects with the known gain and
//! forwards the detected symbol. Bit errors are counted end to end through
//! the Gray labels.
//!
//! Noise calibration: with conditional BEP `c·Q(√(κγ))` and constellation
//! spacing `d`, the per-dimension noise standard deviation is
//! `η·d/(2√(κγ̄))`, so that a neighbour pair at fade `βĪ` is confused with
//! probability `Q(βĪ·√(κγ̄))`. For OOK, M-PAM and M²-QAM this is the same as
//! `σ_n² = 2η²/(γ̄·log₂|X|)` with unit mean optical power.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analysis::BerCurve;
use crate::channel::{sample_fades_into, ChannelStats};
use crate::error::{Error, Result};
use crate::modulation::{build_constellation, Constellation, ModulationScheme};
use crate::scenario::LinkScenario;

pub const MIN_TRIALS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationParams {
    /// η, A/W
    pub responsivity: f64,
    /// Bits per run (or per grid point when a schedule applies).
    pub trials: u64,
    pub seed: u64,
    pub partitions: u32,
    /// Upper limit for scheduled trial counts.
    pub max_trials: u64,
    /// Grid points with analytic BER below this are not simulated.
    pub min_ber: f64,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self {
            responsivity: 1.0,
            trials: MIN_TRIALS,
            seed: 1,
            partitions: 8,
            max_trials: 100_000_000,
            min_ber: 1e-6,
        }
    }
}

impl SimulationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.responsivity > 0.0) || !self.responsivity.is_finite() {
            return Err(Error::field("mc.responsivity", "must be finite and > 0"));
        }
        if self.trials < MIN_TRIALS {
            return Err(Error::field(
                "mc.trials",
                format!("must be >= {MIN_TRIALS}, got {}", self.trials),
            ));
        }
        if self.partitions == 0 {
            return Err(Error::field("mc.partitions", "must be >= 1"));
        }
        if self.max_trials < self.trials {
            return Err(Error::field("mc.max_trials", "must be >= mc.trials"));
        }
        if !(self.min_ber > 0.0 && self.min_ber < 1.0) {
            return Err(Error::field("mc.min_ber", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Per-dimension noise standard deviation for `scheme` at `γ̄`.
    pub fn noise_std(
        &self,
        scheme: &ModulationScheme,
        constellation: &Constellation,
        gamma_bar: f64,
    ) -> Result<f64> {
        let form = scheme.bep_form()?;
        Ok(self.responsivity * constellation.d_min() / (2.0 * (form.kappa * gamma_bar).sqrt()))
    }
}

/// `max(floor, 100/target)` bits, capped at `budget`.
pub fn trials_for_target(target_ber: f64, floor: u64, budget: u64) -> u64 {
    let want = if target_ber > 0.0 {
        (100.0 / target_ber).ceil().min(u64::MAX as f64) as u64
    } else {
        u64::MAX
    };
    want.max(floor).min(budget.max(floor))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerEstimate {
    pub errors: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl BerEstimate {
    /// Estimate with a 95% Wilson interval.
    pub fn from_counts(errors: u64, trials: u64) -> Result<Self> {
        let (ci_low, ci_high) = wilson_ci(errors, trials, 0.95)?;
        Ok(Self {
            errors,
            trials,
            estimate: errors as f64 / trials as f64,
            ci_low,
            ci_high,
        })
    }

    /// Binomial standard deviation of the estimate around probability `p`.
    pub fn binomial_sd(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Wilson score interval at the given two-sided confidence.
pub fn wilson_ci(errors: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::invalid("wilson_ci needs trials > 0"));
    }
    if errors > trials {
        return Err(Error::invalid(format!(
            "errors {errors} exceed trials {trials}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::invalid(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if errors == 0 {
        0.0
    } else {
        (centre - half).clamp(0.0, p)
    };
    let high = if errors == trials {
        1.0
    } else {
        (centre + half).clamp(p, 1.0)
    };
    Ok((low, high))
}

fn stream(seed: u64, partition: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(partition);
    rng
}

struct Cascade<'a> {
    constellation: &'a Constellation,
    stats: &'a ChannelStats,
    hops: u32,
    eta: f64,
    noise_std: f64,
}

impl Cascade<'_> {
    /// Bit errors over `symbols` source symbols.
    fn run<R: Rng + ?Sized>(&self, symbols: u64, rng: &mut R) -> u64 {
        let c = self.constellation;
        let n_tx = self.stats.n_tx();
        let dims = c.dims();
        let labels = c.labels();
        let mut scratch = vec![0.0; n_tx];
        let mut fades = vec![0.0; n_tx];
        let mut errors = 0u64;
        for _ in 0..symbols {
            let src = rng.random_range(0..c.len());
            let mut cur = src;
            for _ in 0..self.hops {
                sample_fades_into(self.stats, rng, &mut scratch, &mut fades);
                let mean = fades.iter().sum::<f64>() / n_tx as f64;
                let gain = self.eta * self.stats.beta() * mean;
                let p = c.point(cur);
                let mut r = [gain * p[0], gain * p[1]];
                for v in r.iter_mut().take(dims) {
                    *v += self.noise_std * rng.sample::<f64, _>(StandardNormal);
                }
                cur = crate::modulation::detect(r, c, gain);
            }
            errors += (labels[src] ^ labels[cur]).count_ones() as u64;
        }
        errors
    }
}

/// Runs one cascade on a caller-supplied stream; returns `(bit errors, bits)`.
pub fn simulate_hops_with_rng<R: Rng + ?Sized>(
    scheme: &ModulationScheme,
    stats: &ChannelStats,
    hops: u32,
    gamma_bar: f64,
    responsivity: f64,
    symbols: u64,
    rng: &mut R,
) -> Result<(u64, u64)> {
    check_gamma_bar(gamma_bar)?;
    let constellation = build_constellation(scheme)?;
    let params = SimulationParams {
        responsivity,
        ..Default::default()
    };
    let cascade = Cascade {
        constellation: &constellation,
        stats,
        hops,
        eta: responsivity,
        noise_std: params.noise_std(scheme, &constellation, gamma_bar)?,
    };
    let errors = cascade.run(symbols, rng);
    Ok((errors, symbols * scheme.bits_per_symbol() as u64))
}

fn check_gamma_bar(gamma_bar: f64) -> Result<()> {
    if !(gamma_bar > 0.0) || !gamma_bar.is_finite() {
        return Err(Error::invalid(format!(
            "average SNR must be finite and > 0, got {gamma_bar}"
        )));
    }
    Ok(())
}

fn simulate_cascade(
    scheme: &ModulationScheme,
    stats: &ChannelStats,
    hops: u32,
    gamma_bar: f64,
    params: &SimulationParams,
    trials: u64,
) -> Result<BerEstimate> {
    params.validate()?;
    check_gamma_bar(gamma_bar)?;
    if hops == 0 {
        return Err(Error::invalid("hop count must be >= 1"));
    }
    let constellation = build_constellation(scheme)?;
    let cascade = Cascade {
        constellation: &constellation,
        stats,
        hops,
        eta: params.responsivity,
        noise_std: params.noise_std(scheme, &constellation, gamma_bar)?,
    };
    let bits = scheme.bits_per_symbol() as u64;
    let symbols = trials.div_ceil(bits);
    let parts = params.partitions as u64;
    let errors: u64 = (0..parts)
        .into_par_iter()
        .map(|p| {
            let n = symbols / parts + u64::from(p < symbols % parts);
            let mut rng = stream(params.seed, p);
            cascade.run(n, &mut rng)
        })
        .sum();
    BerEstimate::from_counts(errors, symbols * bits)
}

/// Single-hop BER estimate with `params.trials` bits.
pub fn simulate_hop(
    scheme: &ModulationScheme,
    stats: &ChannelStats,
    gamma_bar: f64,
    params: &SimulationParams,
) -> Result<BerEstimate> {
    simulate_cascade(scheme, stats, 1, gamma_bar, params, params.trials)
}

/// End-to-end BER of the scenario's DF cascade with `params.trials` bits.
pub fn simulate_multihop(
    scenario: &LinkScenario,
    gamma_bar: f64,
    params: &SimulationParams,
) -> Result<BerEstimate> {
    scenario.validate()?;
    let stats = scenario.hop_stats()?;
    simulate_cascade(
        &scenario.scheme,
        &stats,
        scenario.hops,
        gamma_bar,
        params,
        params.trials,
    )
}

/// Fills the Monte-Carlo column of `curve` at points whose analytic BER is
/// at least `params.min_ber`, with trials scheduled on the analytic value.
pub fn simulate_curve(
    curve: &mut BerCurve,
    scenario: &LinkScenario,
    params: &SimulationParams,
) -> Result<()> {
    params.validate()?;
    let stats = scenario.hop_stats()?;
    let mut out = Vec::with_capacity(curve.len());
    for (i, (&db, &ber)) in curve.snr_grid_db.iter().zip(&curve.analytic).enumerate() {
        if ber < params.min_ber {
            out.push(None);
            continue;
        }
        let point = SimulationParams {
            seed: params
                .seed
                .wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..*params
        };
        let trials = trials_for_target(ber, params.trials, params.max_trials);
        let est = simulate_cascade(
            &scenario.scheme,
            &stats,
            scenario.hops,
            10f64.powf(db / 10.0),
            &point,
            trials,
        )?;
        out.push(Some(est));
    }
    curve.mc = Some(out);
    Ok(())
}
