//! Topological directional entropy `h_θ` on `[0, π]`.
//!
//! Over `ℤ_{p^k}` the curve of a linear rule has three pieces, determined by
//! the extreme unit positions `L ≤ 0 ≤ R`:
//!
//! ```text
//! k |cos θ + R sin θ| ln p     θ ∈ [0, θ_L]
//! k (R − L) |sin θ| ln p       θ ∈ [θ_L, θ_R]
//! k |cos θ + L sin θ| ln p     θ ∈ [θ_R, π]
//! ```
//!
//! with `θ_L = arccot(−L)`, `θ_R = arccot(−R)`. For composite `m` the action
//! splits into independent prime-power components and the curve is the sum of
//! one such term per factor.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutivity::{arccot, permutivity_report, PermutivityReport};
use crate::rule::LocalRule;

/// Breakpoints closer than this are merged.
pub const BREAKPOINT_TOLERANCE: f64 = 1e-12;

/// Which of the three closed-form pieces is active for a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Piece {
    /// `|cos θ + R sin θ|`
    Right,
    /// `(R − L) |sin θ|`
    Middle,
    /// `|cos θ + L sin θ|`
    Left,
    /// `|cos θ|` on all of `[0, π]`, for a factor with `L = R = 0`.
    Shift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTerm {
    pub prime: u64,
    pub exponent: u32,
    /// `k ln p`, in nats
    pub weight: f64,
    #[serde(rename = "L")]
    pub left: i64,
    #[serde(rename = "R")]
    pub right: i64,
    pub theta_left: f64,
    pub theta_right: f64,
}

impl CurveTerm {
    pub fn new(prime: u64, exponent: u32, left: i64, right: i64) -> Self {
        Self {
            prime,
            exponent,
            weight: exponent as f64 * (prime as f64).ln(),
            left,
            right,
            theta_left: arccot(-left as f64),
            theta_right: arccot(-right as f64),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.left == 0 && self.right == 0
    }

    pub fn piece_at(&self, theta: f64) -> Piece {
        if self.is_degenerate() {
            Piece::Shift
        } else if theta <= self.theta_left {
            Piece::Right
        } else if theta <= self.theta_right {
            Piece::Middle
        } else {
            Piece::Left
        }
    }

    pub fn piece_value(&self, piece: Piece, theta: f64) -> f64 {
        let (c, s) = (theta.cos(), theta.sin());
        let raw = match piece {
            Piece::Right => c + self.right as f64 * s,
            Piece::Middle => (self.right - self.left) as f64 * s,
            Piece::Left => c + self.left as f64 * s,
            Piece::Shift => c,
        };
        self.weight * raw.abs()
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.piece_value(self.piece_at(theta), theta)
    }

    /// The integer multiplying `sin θ` in the active piece.
    pub fn piece_coefficient(&self, piece: Piece) -> i64 {
        match piece {
            Piece::Right => self.right,
            Piece::Middle => self.right - self.left,
            Piece::Left => self.left,
            Piece::Shift => 0,
        }
    }
}

/// `h_θ` as a sum of one [`CurveTerm`] per prime factor.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve {
    terms: Vec<CurveTerm>,
    breakpoints: Vec<f64>,
}

impl EntropyCurve {
    pub fn from_terms(terms: Vec<CurveTerm>) -> Self {
        let mut breakpoints: Vec<f64> = terms
            .iter()
            .filter(|t| !t.is_degenerate())
            .flat_map(|t| [t.theta_left, t.theta_right])
            .collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup_by(|a, b| (*a - *b).abs() <= BREAKPOINT_TOLERANCE);
        Self { terms, breakpoints }
    }

    pub fn terms(&self) -> &[CurveTerm] {
        &self.terms
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn modulus(&self) -> u64 {
        self.terms.iter().map(|t| t.prime.pow(t.exponent)).product()
    }

    /// `h_θ` in nats.
    pub fn eval(&self, theta: f64) -> Result<f64> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::ThetaOutOfRange(theta));
        }
        Ok(self.terms.iter().map(|t| t.value(theta)).sum())
    }

    /// Left and right limits of the curve at `theta`, each computed from the
    /// closed form of the adjacent sector.
    pub fn one_sided_limits(&self, theta: f64) -> (f64, f64) {
        let mut below = 0.0;
        let mut above = 0.0;
        for t in &self.terms {
            let (lo, hi) = if t.is_degenerate() {
                (Piece::Shift, Piece::Shift)
            } else {
                let after = if theta < t.theta_left {
                    Piece::Right
                } else if theta < t.theta_right {
                    Piece::Middle
                } else {
                    Piece::Left
                };
                (t.piece_at(theta), after)
            };
            below += t.piece_value(lo, theta);
            above += t.piece_value(hi, theta);
        }
        (below, above)
    }

    /// `Σ k_i (R_i − L_i) ln p_i`, the value at `θ = π/2`.
    pub fn topological_entropy(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.weight * (t.right - t.left) as f64)
            .sum()
    }

    /// Ordered sectors between consecutive breakpoints with the active piece
    /// of every term.
    pub fn closed_form_report(&self) -> Vec<Sector> {
        let mut edges = Vec::with_capacity(self.breakpoints.len() + 2);
        edges.push(0.0);
        edges.extend_from_slice(&self.breakpoints);
        edges.push(PI);
        edges
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let terms = self
                    .terms
                    .iter()
                    .map(|t| {
                        let piece = t.piece_at(mid);
                        SectorTerm {
                            prime: t.prime,
                            exponent: t.exponent,
                            weight: t.weight,
                            piece,
                            coefficient: t.piece_coefficient(piece),
                        }
                    })
                    .collect();
                Sector {
                    start: w[0],
                    end: w[1],
                    terms,
                }
            })
            .collect()
    }

    /// `samples` uniform points on `[0, π]` plus every breakpoint, sorted.
    pub fn sample(&self, samples: usize) -> Vec<CurveSample> {
        sample_grid(0.0, PI, samples, &self.breakpoints)
            .into_iter()
            .map(|theta| CurveSample {
                theta,
                value: self.eval(theta).expect("grid lies in [0, π]"),
            })
            .collect()
    }

    pub fn to_json(&self) -> CurveJson {
        CurveJson {
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    p: t.prime,
                    k: t.exponent,
                    left: t.left,
                    right: t.right,
                })
                .collect(),
            breakpoints: self.breakpoints.clone(),
        }
    }

    pub fn from_json(json: &CurveJson) -> Result<Self> {
        let terms = json
            .terms
            .iter()
            .map(|t| {
                if t.left > 0 || t.right < 0 {
                    return Err(Error::InvalidArgument(format!(
                        "curve term needs L <= 0 <= R, got L={} R={}",
                        t.left, t.right
                    )));
                }
                Ok(CurveTerm::new(t.p, t.k, t.left, t.right))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_terms(terms))
    }
}

/// One `(θ, h)` point of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub theta: f64,
    pub value: f64,
}

/// Uniform grid of `samples` points on `[lo, hi]` with `extra` points merged in.
pub fn sample_grid(lo: f64, hi: f64, samples: usize, extra: &[f64]) -> Vec<f64> {
    let mut grid: Vec<f64> = match samples {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n)
            .map(|j| if j == n - 1 { hi } else { lo + (hi - lo) * j as f64 / (n - 1) as f64 })
            .collect(),
    };
    grid.extend(extra.iter().copied().filter(|x| (lo..=hi).contains(x)));
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= BREAKPOINT_TOLERANCE);
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorTerm {
    pub prime: u64,
    pub exponent: u32,
    pub weight: f64,
    pub piece: Piece,
    /// `R`, `R − L`, `L` or `0` depending on the piece
    pub coefficient: i64,
}

impl fmt::Display for SectorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = if self.exponent == 1 {
            String::new()
        } else {
            format!("{}·", self.exponent)
        };
        let c = self.coefficient;
        match self.piece {
            Piece::Middle => write!(f, "{k}{c}|sin θ| ln {}", self.prime),
            Piece::Shift => write!(f, "{k}|cos θ| ln {}", self.prime),
            Piece::Right | Piece::Left => {
                let sign = if c < 0 { '-' } else { '+' };
                let c = match c.abs() {
                    1 => String::new(),
                    a => a.to_string(),
                };
                write!(f, "{k}|cos θ {sign} {c}sin θ| ln {}", self.prime)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub start: f64,
    pub end: f64,
    pub terms: Vec<SectorTerm>,
}

impl Sector {
    /// Human-readable sum of the active pieces.
    pub fn expression(&self) -> String {
        self.terms.iter().map(ToString::to_string).collect::<Vec<_>>().join(" + ")
    }
}

/// Serialized form of an [`EntropyCurve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveJson {
    pub terms: Vec<TermJson>,
    pub breakpoints: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub p: u64,
    pub k: u32,
    #[serde(rename = "L")]
    pub left: i64,
    #[serde(rename = "R")]
    pub right: i64,
}

/// Curve term of a rule over a prime power `p^k`.
pub fn tde_prime_power(rule: &LocalRule, report: &PermutivityReport) -> Result<CurveTerm> {
    let pp = rule
        .modulus()
        .as_prime_power()
        .ok_or(Error::NotPrimePower(rule.m()))?;
    let factor = &report.factors[0];
    Ok(CurveTerm::new(pp.prime, pp.exponent, factor.left, factor.right))
}

/// The full curve: one term per prime-power projection of `rule`.
pub fn tde_curve(rule: &LocalRule) -> EntropyCurve {
    let rule = rule.normalize();
    let terms = (0..rule.modulus().factors().len())
        .map(|i| {
            let component = rule.project(i).expect("factor index in range");
            let report = permutivity_report(&component);
            tde_prime_power(&component, &report).expect("projection is a prime power")
        })
        .collect();
    EntropyCurve::from_terms(terms)
}

/// `h_{π/2}`, the topological entropy of the automaton alone.
pub fn topological_entropy(rule: &LocalRule) -> f64 {
    tde_curve(rule).topological_entropy()
}
