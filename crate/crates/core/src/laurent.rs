//! Finite Laurent polynomials over ℤ_m and the rule algebra built on them.
//!
//! A rule `Σ a_i x_i` corresponds to `U(X) = Σ a_i X^{-i}`. Composition of
//! linear automata is multiplication of their polynomials, so inversion of an
//! automaton is inversion of `U(X)` in the ring of Laurent polynomials.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::modulus::{factorize, mod_inverse, Modulus, PrimePower};
use crate::rule::LocalRule;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    modulus: u64,
    /// exponent → nonzero residue
    terms: BTreeMap<i64, u64>,
}

impl LaurentPoly {
    pub fn new(modulus: u64, terms: impl IntoIterator<Item = (i64, u64)>) -> Self {
        let mut poly = Self {
            modulus,
            terms: BTreeMap::new(),
        };
        for (e, c) in terms {
            poly.add_term(e, c);
        }
        poly
    }

    pub fn one(modulus: u64) -> Self {
        Self::new(modulus, [(0, 1)])
    }

    pub fn monomial(modulus: u64, exponent: i64, coeff: u64) -> Self {
        Self::new(modulus, [(exponent, coeff)])
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn coeff(&self, exponent: i64) -> u64 {
        self.terms.get(&exponent).copied().unwrap_or(0)
    }

    /// Nonzero `(exponent, coefficient)` pairs, increasing exponent.
    pub fn terms(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(0) == 1 % self.modulus
    }

    fn add_term(&mut self, exponent: i64, coeff: u64) {
        let m = self.modulus;
        let c = (self.coeff(exponent) + coeff % m) % m;
        if c == 0 {
            self.terms.remove(&exponent);
        } else {
            self.terms.insert(exponent, c);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.modulus, other.modulus);
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e, c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus;
        Self::new(m, self.terms().map(|(e, c)| (e, m - c)))
    }

    pub fn scale(&self, k: u64) -> Self {
        let m = self.modulus;
        Self::new(m, self.terms().map(|(e, c)| (e, c * (k % m) % m)))
    }

    /// Multiplication by `X^shift`.
    pub fn shift(&self, shift: i64) -> Self {
        Self::new(self.modulus, self.terms().map(|(e, c)| (e + shift, c)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.modulus, other.modulus);
        let m = self.modulus;
        let mut out = Self::new(m, []);
        for (e1, c1) in self.terms() {
            for (e2, c2) in other.terms() {
                out.add_term(e1 + e2, c1 * c2 % m);
            }
        }
        out
    }

    pub fn pow(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.modulus);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    /// Coefficients reduced into a smaller modulus `q | m`.
    pub fn reduce(&self, q: u64) -> Self {
        Self::new(q, self.terms())
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        // highest power first, matching the usual written form 2X + 2 + 3X^-1
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}X")?,
                _ => write!(f, "{c}X^{e}")?,
            }
        }
        Ok(())
    }
}

/// `x_i ↦ X^{-i}`.
pub fn to_laurent(rule: &LocalRule) -> LaurentPoly {
    LaurentPoly::new(rule.m(), rule.terms().map(|(i, a)| (-i, a)))
}

/// Inverse of [`to_laurent`]; the result is normalized.
pub fn from_laurent(poly: &LaurentPoly, modulus: &Modulus) -> Result<LocalRule> {
    if poly.modulus() != modulus.value() {
        return Err(Error::ModulusMismatch(poly.modulus(), modulus.value()));
    }
    if poly.is_zero() {
        return Ok(LocalRule::zero(modulus));
    }
    let terms: Vec<_> = poly.terms().map(|(e, c)| (-e, c)).collect();
    LocalRule::from_terms(modulus.value(), &terms).map(|r| r.normalize())
}

/// `f ∘ g`. Linear automata commute, so the order does not matter.
pub fn compose(f: &LocalRule, g: &LocalRule) -> Result<LocalRule> {
    if f.m() != g.m() {
        return Err(Error::ModulusMismatch(f.m(), g.m()));
    }
    from_laurent(&to_laurent(f).mul(&to_laurent(g)), f.modulus())
}

/// `f^n`; `power(f, 0)` is the identity rule.
pub fn power(f: &LocalRule, n: u64) -> LocalRule {
    from_laurent(&to_laurent(f).pow(n), f.modulus()).expect("same modulus")
}

/// Inverse automaton, if `f` is injective.
///
/// `f` is invertible iff for every prime `p | m` exactly one coefficient is a
/// unit mod `p`. For each factor `p^k`, `U(X) = a_j X^{-j} (1 + p·N(X))` and
/// `(1 + pN)^{-1} = Σ_{t<k} (−pN)^t` because `pN` is nilpotent mod `p^k`.
/// The per-factor inverses are glued together with the CRT.
pub fn invert(f: &LocalRule) -> Result<LocalRule> {
    let modulus = f.modulus();
    let failing: Vec<u64> = modulus
        .factors()
        .iter()
        .filter(|pp| unit_positions(f, pp.prime).len() != 1)
        .map(|pp| pp.prime)
        .collect();
    if !failing.is_empty() {
        return Err(Error::NotInvertible { primes: failing });
    }
    let components = modulus
        .factors()
        .iter()
        .map(|&pp| invert_prime_power(f, pp))
        .collect::<Result<Vec<_>>>()?;
    LocalRule::recombine(modulus, &components)
}

/// Indices `j` with `gcd(a_j, p) = 1`.
pub(crate) fn unit_positions(f: &LocalRule, p: u64) -> Vec<i64> {
    f.terms().filter(|&(_, a)| a % p != 0).map(|(i, _)| i).collect()
}

fn invert_prime_power(f: &LocalRule, pp: PrimePower) -> Result<LocalRule> {
    let q = pp.value();
    let u = to_laurent(f).reduce(q);
    let (exp, lead) = u
        .terms()
        .find(|&(_, c)| c % pp.prime != 0)
        .expect("invertibility checked by caller");
    let lead_inv = mod_inverse(lead, q).expect("unit mod p is a unit mod p^k");
    // 1 + pN = a_j^{-1} X^{-exp} U(X)
    let normalized = u.scale(lead_inv).shift(-exp);
    let nilpotent = normalized.add(&LaurentPoly::one(q).neg());
    let step = nilpotent.neg();
    let mut series = LaurentPoly::one(q);
    let mut term = LaurentPoly::one(q);
    for _ in 1..pp.exponent {
        term = term.mul(&step);
        series = series.add(&term);
    }
    let inverse = series.scale(lead_inv).shift(-exp);
    debug_assert!(u.mul(&inverse).is_one());
    from_laurent(&inverse, &factorize(q)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::{parse_rule, Segment};

    fn rule(s: &str) -> LocalRule {
        parse_rule(s).unwrap().normalize()
    }

    #[test]
    fn laurent_of_sample_rules() {
        let u = to_laurent(&rule("2x[-1]+2x[0]+3x[1] % 4"));
        assert_eq!(u, LaurentPoly::new(4, [(1, 2), (0, 2), (-1, 3)]));
        assert_eq!(u.to_string(), "2X + 2 + 3X^-1");
        let u9 = to_laurent(&rule("4x[-1]+3x[0]+3x[1] % 9"));
        assert_eq!(u9, LaurentPoly::new(9, [(1, 4), (0, 3), (-1, 3)]));
        let id = LocalRule::identity(&factorize(7).unwrap());
        assert!(to_laurent(&id).is_one());
    }

    #[test]
    fn laurent_round_trip() {
        let f = rule("2x[-3]+3x[-2]+5x[-1]+3x[1]+2x[2]+5x[3] % 30");
        assert_eq!(from_laurent(&to_laurent(&f), f.modulus()).unwrap(), f);
        let z = LocalRule::zero(f.modulus());
        assert_eq!(from_laurent(&to_laurent(&z), f.modulus()).unwrap(), z);
    }

    #[test]
    fn compose_mod2_square() {
        let f = rule("1x[0]+1x[1] % 2");
        let ff = compose(&f, &f).unwrap();
        assert_eq!(ff, rule("1x[0]+1x[2] % 2"));
        assert_eq!(power(&f, 2), ff);
        assert_eq!(power(&f, 1), f);
        assert!(power(&f, 0).is_identity());
    }

    #[test]
    fn compose_rejects_mixed_moduli() {
        assert_eq!(
            compose(&rule("1x[0] % 2"), &rule("1x[0] % 3")),
            Err(Error::ModulusMismatch(2, 3))
        );
    }

    #[test]
    fn invert_mod4_example() {
        let f = rule("2x[-1]+2x[0]+3x[1] % 4");
        let g = invert(&f).unwrap();
        assert_eq!(g, rule("2x[-3]+2x[-2]+3x[-1] % 4"));
        assert!(compose(&f, &g).unwrap().is_identity());
        // S(X) = 3X + 2X^2 + 2X^3
        assert_eq!(to_laurent(&g), LaurentPoly::new(4, [(1, 3), (2, 2), (3, 2)]));
    }

    #[test]
    fn invert_mod9_example() {
        let f = rule("4x[-1]+3x[0]+3x[1] % 9");
        let g = invert(&f).unwrap();
        assert_eq!(g, rule("7x[1]+6x[2]+6x[3] % 9"));
        assert!(to_laurent(&f).mul(&to_laurent(&g)).is_one());
    }

    #[test]
    fn invert_rejects_bipermutative() {
        assert_eq!(
            invert(&rule("1x[-1]+1x[1] % 2")),
            Err(Error::NotInvertible { primes: vec![2] })
        );
        assert_eq!(
            invert(&rule("2x[0]+2x[1] % 4")),
            Err(Error::NotInvertible { primes: vec![2] })
        );
        let err = invert(&rule("1x[0]+3x[1] % 6")).unwrap_err();
        assert_eq!(err, Error::NotInvertible { primes: vec![2] });
    }

    #[test]
    fn invert_composite_modulus() {
        // one unit coefficient per prime: x_3 mod 2, x_0 mod 3, x_-2 mod 5
        let h = LocalRule::from_terms(30, &[(-2, 6), (0, 10), (3, 15)]).unwrap();
        let hi = invert(&h).unwrap();
        assert!(compose(&h, &hi).unwrap().is_identity());
    }

    #[test]
    fn step_then_inverse_recovers_interior() {
        let f = rule("2x[-1]+2x[0]+3x[1] % 4");
        let g = invert(&f).unwrap();
        let s = Segment::new(0, (0..20).map(|i| (i * 7 + 3) % 4).collect());
        let back = g.step(&f.step(&s).unwrap()).unwrap();
        assert_eq!(back, s.restrict(back.start, back.end()));
        assert_eq!((back.start, back.end()), (4, 19));
    }
}
