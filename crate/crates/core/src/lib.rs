//! Directional entropy of ℤ×ℤ₊ actions generated by a one-dimensional linear
//! cellular automaton and the shift over ℤ_m.
//!
//! The crate covers:
//!
//! * [`rule`] and [`laurent`]: linear local rules, their Laurent polynomials,
//!   composition, prime-power projection and inversion.
//! * [`permutivity`]: unit-coefficient positions per prime factor.
//! * [`tde`]: closed-form topological directional entropy curves on `[0, π]`.
//! * [`mtde`]: measure-theoretic directional entropy for the uniform measure.
//! * [`measures`]: Bernoulli and Markov measures, entropy rates and the
//!   directional upper bounds they give.
//! * [`estimator`]: brute-force counting of space-time patterns, used as an
//!   independent check of the closed forms.
//!
//! All entropies are in nats.
//!
//! ```
//! use dirent::{invert, parse_rule};
//!
//! let f = parse_rule("2x[-1]+2x[0]+3x[1] % 4").unwrap().normalize();
//! let g = invert(&f).unwrap();
//! assert_eq!(g.to_string(), "2x[-3]+2x[-2]+3x[-1] % 4");
//! ```

pub mod error;
pub mod estimator;
pub mod laurent;
pub mod measures;
pub mod modulus;
pub mod mtde;
pub mod permutivity;
pub mod rule;
pub mod tde;

pub use error::{Error, Result};
pub use laurent::{compose, from_laurent, invert, power, to_laurent, LaurentPoly};
pub use modulus::{factorize, Modulus, PrimePower};
pub use mtde::{mtde_case_theorem, mtde_circle_curve, mtde_uniform, Direction, MtdeCase};
pub use permutivity::{arccot, permutivity_report, PermutivityReport};
pub use rule::{parse_rule, LocalRule, Segment};
pub use tde::{tde_curve, topological_entropy, CurveSample, EntropyCurve};
