//! Permutivity classification of linear rules, per prime factor of `m`.

use std::f64::consts::FRAC_PI_2;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::laurent::unit_positions;
use crate::rule::LocalRule;

/// Inverse cotangent with range `(0, π)`: `arccot(t) = π/2 − arctan(t)`.
pub fn arccot(t: f64) -> f64 {
    FRAC_PI_2 - t.atan()
}

/// Unit-coefficient positions of a rule with respect to one prime `p_i | m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorPermutivity {
    pub prime: u64,
    pub exponent: u32,
    /// `P_i = {0} ∪ {j : gcd(a_j, p_i) = 1}`, sorted.
    pub positions: Vec<i64>,
    #[serde(rename = "L")]
    pub left: i64,
    #[serde(rename = "R")]
    pub right: i64,
    /// `arccot(−L_i) ∈ (0, π/2]`
    pub theta_left: f64,
    /// `arccot(−R_i) ∈ [π/2, π)`
    pub theta_right: f64,
}

impl FactorPermutivity {
    /// `P_i = {0}`: every coefficient is divisible by `p_i`.
    pub fn is_degenerate(&self) -> bool {
        self.left == 0 && self.right == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutivityReport {
    pub factors: Vec<FactorPermutivity>,
    /// `l < 0` and `gcd(a_l, m) = 1`
    pub leftmost: bool,
    /// `r > 0` and `gcd(a_r, m) = 1`
    pub rightmost: bool,
    pub bipermutative: bool,
}

/// Per-factor unit sets and global permutivity flags of a normalized rule.
pub fn permutivity_report(rule: &LocalRule) -> PermutivityReport {
    let m = rule.m();
    let factors = rule
        .modulus()
        .factors()
        .iter()
        .map(|pp| {
            let mut positions = unit_positions(rule, pp.prime);
            positions.push(0);
            positions.sort_unstable();
            positions.dedup();
            let left = positions[0];
            let right = *positions.last().unwrap();
            FactorPermutivity {
                prime: pp.prime,
                exponent: pp.exponent,
                positions,
                left,
                right,
                theta_left: arccot(-left as f64),
                theta_right: arccot(-right as f64),
            }
        })
        .collect();
    let unit = |a: u64| a.gcd(&m) == 1;
    let leftmost = rule.left() < 0 && unit(rule.coeff(rule.left()));
    let rightmost = rule.right() > 0 && unit(rule.coeff(rule.right()));
    PermutivityReport {
        factors,
        leftmost,
        rightmost,
        bipermutative: leftmost && rightmost,
    }
}
