//! Physicists' Gauss–Hermite rules (weight function `e^{-x²}`).
//!
//! Nodes come from the eigenvalues of the symmetric tridiagonal Jacobi
//! matrix (Golub–Welsch). Each node is then polished with a few Newton steps
//! on the orthonormal Hermite recurrence, and the weight is taken from the
//! derivative at the polished node. The eigenvector route only gives weights
//! to absolute precision, which is useless for the outermost nodes of large
//! rules (their weights are below 1e-100); the recurrence gives them to
//! relative precision.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 128;

/// Gauss–Hermite nodes and weights, nodes sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∑ w_i f(x_i)`, i.e. an approximation of `∫ e^{-x²} f(x) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Expectation of `f(Z)` for a standard normal `Z`.
    pub fn expect_standard_normal<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.integrate(|x| f(std::f64::consts::SQRT_2 * x)) / PI.sqrt()
    }
}

/// Builds the `order`-point rule. Deterministic for a given order.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::invalid(format!(
            "Gauss-Hermite order must be in 1..={MAX_ORDER}, got {order}"
        )));
    }
    if order == 1 {
        return Ok(QuadratureRule {
            nodes: vec![0.0],
            weights: vec![PI.sqrt()],
        });
    }

    let n = order;
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k, k - 1)] = b;
        jacobi[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));

    let mut weights = vec![0.0; n];
    for (x, w) in nodes.iter_mut().zip(weights.iter_mut()) {
        let (root, weight) = polish(*x, n);
        *x = root;
        *w = weight;
    }

    // Enforce exact antisymmetry; the middle node of an odd rule is zero.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    Ok(QuadratureRule { nodes, weights })
}

/// Newton refinement of one root of `H_n`, returning `(root, weight)`.
fn polish(mut x: f64, n: usize) -> (f64, f64) {
    let mut deriv = 0.0;
    for _ in 0..8 {
        let (p, dp) = orthonormal_hermite(x, n);
        deriv = dp;
        let step = p / dp;
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    let (_, dp) = orthonormal_hermite(x, n);
    if dp.is_finite() && dp != 0.0 {
        deriv = dp;
    }
    (x, 2.0 / (deriv * deriv))
}

/// Orthonormal Hermite polynomial `h_n(x)` and its derivative.
fn orthonormal_hermite(x: f64, n: usize) -> (f64, f64) {
    let mut p_prev = 0.0;
    let mut p = PI.powf(-0.25);
    for j in 1..=n {
        let jf = j as f64;
        let next = x * (2.0 / jf).sqrt() * p - ((jf - 1.0) / jf).sqrt() * p_prev;
        p_prev = p;
        p = next;
    }
    (p, (2.0 * n as f64).sqrt() * p_prev)
}
