//! Power-log envelopes `c⁻·k^(-a)·log(k+1)^(-b) ≤ |x_k| ≤ c⁺·k^(-a)·log(k+1)^(-b)`.
//!
//! The exponents are exact; the constants are floats that only ever move
//! outward when transported.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::index::IndexSet;
use crate::scalar::{format_q, q_to_f64, qstr, Q};

const OUTWARD: f64 = 1e-12;

fn down(x: f64) -> f64 {
    x * (1.0 - OUTWARD)
}

fn up(x: f64) -> f64 {
    x * (1.0 + OUTWARD)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowLogEnvelope {
    #[serde(with = "qstr")]
    pub a: Q,
    #[serde(with = "qstr")]
    pub b: Q,
    pub lower: f64,
    pub upper: f64,
}

impl PowLogEnvelope {
    pub fn new(a: Q, b: Q, lower: f64, upper: f64) -> Self {
        assert!(lower > 0.0 && upper >= lower, "envelope constants must satisfy 0 < c⁻ ≤ c⁺");
        PowLogEnvelope { a, b, lower, upper }
    }

    /// `k^(-a)·log(k+1)^(-b)` in floating point.
    pub fn profile(&self, k: u64) -> f64 {
        let k = k as f64;
        (-q_to_f64(&self.a) * k.ln() - q_to_f64(&self.b) * k.ln_1p().ln()).exp()
    }

    pub fn bounds_at(&self, k: u64) -> (f64, f64) {
        let p = self.profile(k);
        (self.lower * p, self.upper * p)
    }

    /// Whether `|x_k| = magnitude` sits inside the envelope, allowing for
    /// the rounding of the profile itself.
    pub fn brackets(&self, k: u64, magnitude: f64) -> bool {
        let (lo, hi) = self.bounds_at(k);
        down(lo) <= magnitude && magnitude <= up(hi)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let f = factor.abs();
        PowLogEnvelope {
            a: self.a.clone(),
            b: self.b.clone(),
            lower: down(self.lower * f),
            upper: up(self.upper * f),
        }
    }

    /// Envelope of `|x_k|^r`.
    pub fn power(&self, r: &Q) -> Self {
        let rf = q_to_f64(r);
        PowLogEnvelope {
            a: &self.a * r,
            b: &self.b * r,
            lower: down(self.lower.powf(rf)),
            upper: up(self.upper.powf(rf)),
        }
    }

    /// Envelope of `m ↦ x_{s_m}` when `ρ_lo·m ≤ s_m ≤ ρ_hi·m`.
    pub fn along(&self, (rho_lo, rho_hi): (f64, f64)) -> Self {
        let a = q_to_f64(&self.a);
        let b = q_to_f64(&self.b);
        // s_m^(-a) = m^(-a) (s_m/m)^(-a)
        let (p1, p2) = (rho_lo.powf(-a), rho_hi.powf(-a));
        // log(s_m+1) / log(m+1) ∈ [1, 1 + ln ρ_hi / ln 2]
        let lmax = 1.0 + rho_hi.ln() / std::f64::consts::LN_2;
        let (l1, l2): (f64, f64) = (1.0, lmax.powf(-b));
        self.rescaled(p1.min(p2) * l1.min(l2), p1.max(p2) * l1.max(l2))
    }

    /// Envelope in `j` of the embedding `x_m` placed at `j = s_m`.
    pub fn onto(&self, (rho_lo, rho_hi): (f64, f64)) -> Self {
        let a = q_to_f64(&self.a);
        let b = q_to_f64(&self.b);
        // m^(-a) = j^(-a) (m/j)^(-a), m/j ∈ [1/ρ_hi, 1/ρ_lo]
        let (p1, p2) = ((1.0 / rho_hi).powf(-a), (1.0 / rho_lo).powf(-a));
        // log(m+1) / log(j+1) ∈ [ln 2 / ln(2 ρ_hi), 1]
        let lmin = std::f64::consts::LN_2 / (2.0 * rho_hi).ln();
        let (l1, l2): (f64, f64) = (lmin.powf(-b), 1.0);
        self.rescaled(p1.min(p2) * l1.min(l2), p1.max(p2) * l1.max(l2))
    }

    fn rescaled(&self, lo: f64, hi: f64) -> Self {
        PowLogEnvelope {
            a: self.a.clone(),
            b: self.b.clone(),
            lower: down(self.lower * lo),
            upper: up(self.upper * hi),
        }
    }

    /// `Σ_k (k^(-a) log(k+1)^(-b))^q < ∞`.
    pub fn summable_power(&self, q: &Q) -> bool {
        let qa = q * &self.a;
        let qb = q * &self.b;
        let one = Q::from_integer(1.into());
        qa > one || (qa == one && qb > one)
    }

    /// The profile tends to zero.
    pub fn vanishes(&self) -> bool {
        self.a.is_positive() || (self.a.is_zero() && self.b.is_positive())
    }

    /// The profile is bounded.
    pub fn bounded(&self) -> bool {
        self.a.is_positive() || (self.a.is_zero() && !self.b.is_negative())
    }
}

impl fmt::Display for PowLogEnvelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:.6e}, {:.6e}]·k^-({})·log(k+1)^-({})",
            self.lower,
            self.upper,
            format_q(&self.a),
            format_q(&self.b)
        )
    }
}

/// A power-log bound, optionally holding only on a support set with the
/// sequence vanishing elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub bound: PowLogEnvelope,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub on: Option<IndexSet>,
}

impl Envelope {
    pub fn full(bound: PowLogEnvelope) -> Self {
        Envelope { bound, on: None }
    }

    pub fn on(bound: PowLogEnvelope, set: IndexSet) -> Self {
        Envelope {
            bound,
            on: Some(set),
        }
    }

    /// Checks the envelope against `|x_j|` for one coordinate.
    pub fn brackets(&self, j: u64, magnitude: f64) -> bool {
        match &self.on {
            Some(s) if !s.contains(j) => magnitude == 0.0,
            _ => self.bound.brackets(j, magnitude),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Envelope {
            bound: self.bound.scale(factor),
            on: self.on.clone(),
        }
    }

    pub fn power(&self, r: &Q) -> Self {
        Envelope {
            bound: self.bound.power(r),
            on: self.on.clone(),
        }
    }
}
