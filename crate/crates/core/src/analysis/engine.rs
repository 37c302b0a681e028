//! Gauss–Hermite expectations over correlated log-normal fades.
//!
//! The quantity is `E_z[h(agg(z))]` with `z ~ Normal(0, I_{N_t})`, the fades
//! `I_i = exp(2σ(Sz)_i − 2σ²)` and `h` either `exp(−A·agg)` or
//! `Q(√(2A·agg))`. With [`NodePlacement::Fixed`] the nodes sit at `z = √2·x`,
//! which is the literal nested sum. With [`NodePlacement::Recentred`] the
//! same rule is shifted to the mode `z*` of `−|z|²/2 − A·agg(z)` and scaled by
//! the inverse square root of the Hessian there. At high SNR the integrand
//! lives far out in the tail, where the fixed nodes are sparse.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::channel::ChannelStats;
use crate::error::{Error, Result};
use crate::numerics::{q_exact, QuadratureRule};

/// Largest nested-sum size accepted, in terms.
pub const MAX_TERMS: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodePlacement {
    #[default]
    Recentred,
    Fixed,
}

/// How the per-transmitter fades enter the SNR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    /// `(1/N_t)∑ I_i²`
    MeanSquare,
    /// `((1/N_t)∑ I_i)²`
    SquaredMean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Integrand {
    /// `exp(−A·agg)`
    Exp(f64),
    /// `Q(√(2A·agg))`
    Q(f64),
}

impl Integrand {
    fn coefficient(self) -> f64 {
        match self {
            Integrand::Exp(a) | Integrand::Q(a) => a,
        }
    }

    fn ln_value(self, agg: f64) -> f64 {
        match self {
            Integrand::Exp(a) => -a * agg,
            Integrand::Q(a) => ln_q((2.0 * a * agg).sqrt()),
        }
    }

    fn value_at_unit(self) -> f64 {
        self.ln_value(1.0).exp()
    }
}

/// `ln Q(x)` for `x ≥ 0`, accurate where `Q` itself underflows.
fn ln_q(x: f64) -> f64 {
    if x < 30.0 {
        return q_exact(x).ln();
    }
    let r = 1.0 / (x * x);
    let series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - 105.0 * r)));
    -0.5 * x * x - (x * (2.0 * std::f64::consts::PI).sqrt()).ln() + series.ln()
}

struct Fades<'a> {
    s: &'a DMatrix<f64>,
    n: usize,
    p: f64,
    q: f64,
    squared_mean: bool,
}

impl<'a> Fades<'a> {
    fn new(stats: &'a ChannelStats, aggregate: Aggregate) -> Self {
        let sigma = stats.sigma_x();
        let s2 = stats.sigma_x_sq();
        let (p, q, squared_mean) = match aggregate {
            Aggregate::MeanSquare => (4.0 * sigma, -4.0 * s2, false),
            Aggregate::SquaredMean => (2.0 * sigma, -2.0 * s2, true),
        };
        Self {
            s: stats.cov_factor().matrix(),
            n: stats.n_tx(),
            p,
            q,
            squared_mean,
        }
    }

    fn exps(&self, z: &[f64], e: &mut [f64]) {
        for (i, ei) in e.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, zj) in z.iter().enumerate() {
                acc += self.s[(i, j)] * zj;
            }
            *ei = (self.p * acc + self.q).exp();
        }
    }

    fn value(&self, z: &[f64], e: &mut [f64]) -> f64 {
        self.exps(z, e);
        let m = e.iter().sum::<f64>() / self.n as f64;
        if self.squared_mean {
            m * m
        } else {
            m
        }
    }

    /// Value, gradient and Hessian of the aggregate at `z`.
    fn derivatives(&self, z: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let n = self.n;
        let mut e = vec![0.0; n];
        self.exps(z, &mut e);
        let nf = n as f64;
        let m = e.iter().sum::<f64>() / nf;
        let ev = DVector::from_vec(e);
        let grad_m = self.s.transpose() * &ev * (self.p / nf);
        let hess_m =
            self.s.transpose() * DMatrix::from_diagonal(&ev) * self.s * (self.p * self.p / nf);
        if self.squared_mean {
            let hess = &grad_m * grad_m.transpose() * 2.0 + &hess_m * (2.0 * m);
            (m * m, grad_m * (2.0 * m), hess)
        } else {
            (m, grad_m, hess_m)
        }
    }
}

fn objective(fades: &Fades, a: f64, z: &[f64], scratch: &mut [f64]) -> f64 {
    let norm: f64 = z.iter().map(|v| v * v).sum();
    -0.5 * norm - a * fades.value(z, scratch)
}

/// Mode of `−|z|²/2 − A·agg(z)` by damped Newton; the objective is concave.
fn find_mode(fades: &Fades, a: f64) -> Result<DVector<f64>> {
    let n = fades.n;
    let mut z = DVector::zeros(n);
    let mut scratch = vec![0.0; n];
    let mut f = objective(fades, a, z.as_slice(), &mut scratch);
    for _ in 0..500 {
        let (_, g, h) = fades.derivatives(z.as_slice());
        let grad = -&z - g * a;
        let hess = DMatrix::identity(n, n) + h * a;
        let step = hess
            .cholesky()
            .ok_or_else(|| Error::invalid("Hessian lost positive definiteness"))?
            .solve(&grad);
        let slope = grad.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..80 {
            let trial = &z + &step * t;
            let ft = objective(fades, a, trial.as_slice(), &mut scratch);
            if ft.is_finite() && ft >= f + 1e-4 * t * slope {
                z = trial;
                f = ft;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        let size = step.amax() * t;
        if !accepted || size <= 1e-13 * (1.0 + z.amax()) {
            return Ok(z);
        }
    }
    Ok(z)
}

/// `E[h(agg)]` for one integrand.
pub(crate) fn expectation(
    rule: &QuadratureRule,
    stats: &ChannelStats,
    aggregate: Aggregate,
    placement: NodePlacement,
    integrand: Integrand,
) -> Result<f64> {
    let a = integrand.coefficient();
    if stats.sigma_x_sq() == 0.0 || a == 0.0 {
        return Ok(integrand.value_at_unit());
    }
    let n = stats.n_tx();
    let order = rule.order();
    let terms = (order as f64).powi(n as i32);
    if terms > MAX_TERMS {
        return Err(Error::ComplexityLimit {
            terms,
            limit: MAX_TERMS,
        });
    }
    let fades = Fades::new(stats, aggregate);

    let (centre, scale, ln_det) = match placement {
        NodePlacement::Fixed => (DVector::zeros(n), DMatrix::identity(n, n), 0.0),
        NodePlacement::Recentred => {
            // For Q(√(2A·agg)) ≈ exp(−A·agg) the same centring applies.
            let z = find_mode(&fades, a)?;
            let (_, _, h) = fades.derivatives(z.as_slice());
            let hess = DMatrix::identity(n, n) + h * a;
            let eig = SymmetricEigen::new(hess);
            if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
                return Err(Error::invalid("non-positive curvature at the mode"));
            }
            let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
            let ln_det = -0.5 * eig.eigenvalues.iter().map(|l| l.ln()).sum::<f64>();
            let v = &eig.eigenvectors;
            (
                z,
                v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose(),
                ln_det,
            )
        }
    };

    let nodes = rule.nodes();
    let ln_w: Vec<f64> = rule.weights().iter().map(|w| w.ln()).collect();
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut run_max = f64::NEG_INFINITY;
    let mut run_sum = 0.0;
    loop {
        let mut lw = 0.0;
        let mut xx = 0.0;
        for d in 0..n {
            x[d] = nodes[idx[d]];
            lw += ln_w[idx[d]];
            xx += x[d] * x[d];
        }
        let mut zz = 0.0;
        for (i, zi) in z.iter_mut().enumerate() {
            let mut acc = centre[i];
            for (j, xj) in x.iter().enumerate() {
                acc += sqrt2 * scale[(i, j)] * xj;
            }
            *zi = acc;
            zz += acc * acc;
        }
        let agg = fades.value(&z, &mut scratch);
        let t = lw + xx - 0.5 * zz + integrand.ln_value(agg);
        if t > run_max {
            run_sum = run_sum * (run_max - t).exp() + 1.0;
            run_max = t;
        } else if t.is_finite() {
            run_sum += (t - run_max).exp();
        }

        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < order {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == n {
                break;
            }
        }
        if d == n {
            break;
        }
    }
    if run_max == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let ln_pi = std::f64::consts::PI.ln();
    let value = (ln_det - 0.5 * n as f64 * ln_pi + run_max + run_sum.ln()).exp();
    if !value.is_finite() {
        return Err(Error::NanInput("Gauss-Hermite sum"));
    }
    Ok(value)
}
