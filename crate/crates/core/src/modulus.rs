//! The coefficient ring ℤ_m and its prime-power decomposition.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted anywhere in the crate.
///
/// Residues stay below 2³¹ so a product of two residues fits in a `u64`.
pub const MAX_MODULUS: u64 = (1 << 31) - 1;

/// One factor `p^k` of a modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimePower {
    pub prime: u64,
    pub exponent: u32,
}

impl PrimePower {
    pub fn value(&self) -> u64 {
        self.prime.pow(self.exponent)
    }
}

impl fmt::Display for PrimePower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 1 {
            write!(f, "{}", self.prime)
        } else {
            write!(f, "{}^{}", self.prime, self.exponent)
        }
    }
}

/// A modulus `m ≥ 2` together with its prime factorization.
///
/// Factors are stored with strictly increasing primes and their product is
/// always `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Modulus {
    value: u64,
    factors: Vec<PrimePower>,
}

impl Modulus {
    pub fn new(m: u64) -> Result<Self> {
        factorize(m)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[PrimePower] {
        &self.factors
    }

    /// The single factor when `m = p^k`.
    pub fn as_prime_power(&self) -> Option<PrimePower> {
        match self.factors.as_slice() {
            [pp] => Some(*pp),
            _ => None,
        }
    }

    pub fn is_prime(&self) -> bool {
        matches!(self.as_prime_power(), Some(pp) if pp.exponent == 1)
    }

    pub fn ln(&self) -> f64 {
        (self.value as f64).ln()
    }

    pub fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.value as i64) as u64
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Complete prime factorization of `m` by trial division.
pub fn factorize(m: u64) -> Result<Modulus> {
    if m < 2 {
        return Err(Error::ModulusTooSmall(m));
    }
    if m > MAX_MODULUS {
        return Err(Error::ModulusTooLarge(m));
    }
    let mut factors = Vec::new();
    let mut rest = m;
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            let mut exponent = 0;
            while rest % p == 0 {
                rest /= p;
                exponent += 1;
            }
            factors.push(PrimePower { prime: p, exponent });
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        factors.push(PrimePower {
            prime: rest,
            exponent: 1,
        });
    }
    Ok(Modulus { value: m, factors })
}

/// `a⁻¹ mod m`, if `gcd(a, m) = 1`.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let e = (a as i64).extended_gcd(&(m as i64));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i64) as u64)
}

/// Solves `x ≡ r_i (mod n_i)` for pairwise coprime `n_i`; returns `x mod Π n_i`.
pub fn crt(congruences: &[(u64, u64)]) -> u64 {
    let mut x: u128 = 0;
    let mut n: u128 = 1;
    for &(r, ni) in congruences {
        let ni128 = ni as u128;
        // x + n·t ≡ r (mod ni)  ⇒  t ≡ (r − x)·n⁻¹ (mod ni)
        let inv = mod_inverse((n % ni128) as u64, ni).expect("moduli must be coprime") as u128;
        let diff = (r as u128 + ni128 - x % ni128) % ni128;
        let t = diff * inv % ni128;
        x += n * t;
        n *= ni128;
        x %= n;
    }
    x as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(m: u64) -> Vec<(u64, u32)> {
        factorize(m)
            .unwrap()
            .factors()
            .iter()
            .map(|f| (f.prime, f.exponent))
            .collect()
    }

    #[test]
    fn factorize_examples() {
        assert_eq!(pairs(30), vec![(2, 1), (3, 1), (5, 1)]);
        assert_eq!(pairs(9), vec![(3, 2)]);
        assert_eq!(pairs(113), vec![(113, 1)]);
        assert_eq!(pairs(4), vec![(2, 2)]);
        assert_eq!(pairs(MAX_MODULUS), vec![(MAX_MODULUS, 1)]);
    }

    #[test]
    fn factorize_rejects_small_and_large() {
        assert_eq!(factorize(1), Err(Error::ModulusTooSmall(1)));
        assert_eq!(factorize(0), Err(Error::ModulusTooSmall(0)));
        assert!(matches!(factorize(1 << 31), Err(Error::ModulusTooLarge(_))));
    }

    #[test]
    fn factor_product_is_modulus() {
        for m in 2..2000u64 {
            let md = factorize(m).unwrap();
            let prod: u64 = md.factors().iter().map(PrimePower::value).product();
            assert_eq!(prod, m);
            assert!(md.factors().windows(2).all(|w| w[0].prime < w[1].prime));
        }
    }

    #[test]
    fn inverse_and_crt() {
        assert_eq!(mod_inverse(3, 4), Some(3));
        assert_eq!(mod_inverse(4, 9), Some(7));
        assert_eq!(mod_inverse(2, 4), None);
        assert_eq!(crt(&[(1, 2), (2, 3), (3, 5)]), 23);
        for x in 0..30 {
            assert_eq!(crt(&[(x % 2, 2), (x % 3, 3), (x % 5, 5)]), x);
        }
    }
}
