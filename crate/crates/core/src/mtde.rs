//! Measure-theoretic directional entropy for the uniform measure.
//!
//! For a direction `v = (x, y)` and a rule with minimal span `[l, r]`, put
//! `z_l = x + l·y` and `z_r = x + r·y`. Then
//!
//! ```text
//! h_v = max(|z_l|, |z_r|) ln m    if z_l·z_r ≥ 0
//! h_v = |z_r − z_l| ln m          if z_l·z_r ≤ 0
//! ```

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutivity::{arccot, permutivity_report};
use crate::rule::LocalRule;
use crate::tde::{sample_grid, CurveSample};

/// A direction `(x, y) ≠ (0, 0)` in the space-time plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub x: f64,
    pub y: f64,
}

impl Direction {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x == 0.0 && y == 0.0 {
            return Err(Error::ZeroDirection);
        }
        Ok(Self { x, y })
    }

    /// `(cos θ, sin θ)`
    pub fn unit(theta: f64) -> Self {
        Self {
            x: theta.cos(),
            y: theta.sin(),
        }
    }

    /// `α·v`; `α = 0` would leave the set of directions.
    pub fn scale(&self, alpha: f64) -> Result<Self> {
        if alpha == 0.0 {
            return Err(Error::ZeroScale);
        }
        Ok(Self {
            x: alpha * self.x,
            y: alpha * self.y,
        })
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn z(&self, position: i64) -> f64 {
        self.x + position as f64 * self.y
    }
}

/// The hypothesis of the permutivity theorem that produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MtdeCase {
    /// rightmost permutative, `0 ≤ z_l ≤ z_r` or `z_r ≤ z_l ≤ 0`: `|z_r| ln m`
    RightPermutative = 1,
    /// leftmost permutative, `z_l ≤ z_r ≤ 0` or `0 ≤ z_r ≤ z_l`: `|z_l| ln m`
    LeftPermutative = 2,
    /// bipermutative, `z_l·z_r ≤ 0`: `|z_r − z_l| ln m`
    Bipermutative = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseValue {
    pub value: f64,
    pub case: Option<MtdeCase>,
}

fn closed_form(z_l: f64, z_r: f64, ln_m: f64) -> f64 {
    if z_l * z_r >= 0.0 {
        z_l.abs().max(z_r.abs()) * ln_m
    } else {
        (z_r - z_l).abs() * ln_m
    }
}

/// Uniform-measure closed form, using the minimal-memory span of `rule`.
pub fn mtde_uniform(rule: &LocalRule, v: Direction) -> Result<f64> {
    if v.x == 0.0 && v.y == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let rule = rule.normalize();
    Ok(closed_form(v.z(rule.left()), v.z(rule.right()), rule.modulus().ln()))
}

/// The value at an integer direction `(s, t)`, i.e. the entropy of `σ^s F^t`.
pub fn mtde_integer(rule: &LocalRule, s: i64, t: i64) -> Result<f64> {
    mtde_uniform(rule, Direction::new(s as f64, t as f64)?)
}

/// `h_{αv}`, computed as `|α| h_v`.
pub fn mtde_scaled(rule: &LocalRule, v: Direction, alpha: f64) -> Result<f64> {
    v.scale(alpha)?;
    Ok(alpha.abs() * mtde_uniform(rule, v)?)
}

/// Applies the permutivity theorem; `case` is `None` when no hypothesis holds,
/// in which case `value` is still the uniform-measure closed form.
pub fn mtde_case_theorem(rule: &LocalRule, v: Direction) -> Result<CaseValue> {
    let value = mtde_uniform(rule, v)?;
    let rule = rule.normalize();
    let report = permutivity_report(&rule);
    let ln_m = rule.modulus().ln();
    let (z_l, z_r) = (v.z(rule.left()), v.z(rule.right()));
    let case = if report.bipermutative && z_l * z_r <= 0.0 {
        Some((MtdeCase::Bipermutative, (z_r - z_l).abs() * ln_m))
    } else if report.rightmost && ((0.0 <= z_l && z_l <= z_r) || (z_r <= z_l && z_l <= 0.0)) {
        Some((MtdeCase::RightPermutative, z_r.abs() * ln_m))
    } else if report.leftmost && ((z_l <= z_r && z_r <= 0.0) || (0.0 <= z_r && z_r <= z_l)) {
        Some((MtdeCase::LeftPermutative, z_l.abs() * ln_m))
    } else {
        None
    };
    Ok(match case {
        Some((case, theorem_value)) => {
            debug_assert!((theorem_value - value).abs() <= 1e-9 * (1.0 + value));
            CaseValue {
                value: theorem_value,
                case: Some(case),
            }
        }
        None => CaseValue { value, case: None },
    })
}

/// Angles in `[0, 2π]` where `z_l` or `z_r` of the unit direction vanishes.
pub fn sector_boundaries(rule: &LocalRule) -> Vec<f64> {
    let rule = rule.normalize();
    let mut roots: Vec<f64> = [rule.left(), rule.right()]
        .into_iter()
        .flat_map(|j| {
            let t = arccot(-j as f64);
            [t, t + PI]
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    roots
}

/// `h` at `(cos θ, sin θ)` on a uniform grid over `[0, 2π]` with the sector
/// boundaries inserted.
pub fn mtde_circle_curve(rule: &LocalRule, samples: usize) -> Result<Vec<CurveSample>> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    sample_grid(0.0, TAU, samples, &sector_boundaries(rule))
        .into_iter()
        .map(|theta| {
            Ok(CurveSample {
                theta,
                value: mtde_uniform(rule, Direction::unit(theta))?,
            })
        })
        .collect()
}
