//! Linear local rules `f(x_l, …, x_r) = Σ a_i x_i (mod m)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::modulus::{crt, factorize, Modulus, PrimePower};

/// Coefficients `a_l..=a_r` of a linear local rule over ℤ_m.
///
/// Construction reduces every residue into `[0, m)` but does not trim the
/// span; call [`LocalRule::normalize`] for the minimal-memory form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalRule {
    modulus: Modulus,
    left: i64,
    coeffs: Vec<u64>,
}

impl LocalRule {
    /// Rule with span `[left, left + coeffs.len() - 1]`.
    pub fn new(modulus: u64, left: i64, coeffs: Vec<u64>) -> Result<Self> {
        let modulus = factorize(modulus)?;
        Self::with_modulus(modulus, left, coeffs)
    }

    pub fn with_modulus(modulus: Modulus, left: i64, mut coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyRule);
        }
        let m = modulus.value();
        coeffs.iter_mut().for_each(|c| *c %= m);
        Ok(Self {
            modulus,
            left,
            coeffs,
        })
    }

    /// Builds a rule from `(index, coefficient)` pairs; gaps are zero.
    pub fn from_terms(modulus: u64, terms: &[(i64, u64)]) -> Result<Self> {
        let modulus = factorize(modulus)?;
        Self::from_term_map(modulus, terms.iter().copied())
    }

    fn from_term_map(modulus: Modulus, terms: impl IntoIterator<Item = (i64, u64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, a) in terms {
            if map.insert(i, a).is_some() {
                return Err(Error::DuplicateIndex(i));
            }
        }
        let (Some((&lo, _)), Some((&hi, _))) = (map.first_key_value(), map.last_key_value()) else {
            return Err(Error::EmptyRule);
        };
        let mut coeffs = vec![0; (hi - lo + 1) as usize];
        for (i, a) in map {
            coeffs[(i - lo) as usize] = a;
        }
        Self::with_modulus(modulus, lo, coeffs)
    }

    /// `x_0`, the rule whose automaton is the identity map.
    pub fn identity(modulus: &Modulus) -> Self {
        Self {
            modulus: modulus.clone(),
            left: 0,
            coeffs: vec![1 % modulus.value()],
        }
    }

    /// Canonical zero rule: span `[0, 0]`, coefficient 0.
    pub fn zero(modulus: &Modulus) -> Self {
        Self {
            modulus: modulus.clone(),
            left: 0,
            coeffs: vec![0],
        }
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn m(&self) -> u64 {
        self.modulus.value()
    }

    pub fn left(&self) -> i64 {
        self.left
    }

    pub fn right(&self) -> i64 {
        self.left + self.coeffs.len() as i64 - 1
    }

    /// `r − l`.
    pub fn width(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// `a_i`, zero outside the stored span.
    pub fn coeff(&self, i: i64) -> u64 {
        if i < self.left || i > self.right() {
            0
        } else {
            self.coeffs[(i - self.left) as usize]
        }
    }

    /// Nonzero `(index, coefficient)` pairs in increasing index order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0)
            .map(move |(k, &a)| (self.left + k as i64, a))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&a| a == 0)
    }

    pub fn is_identity(&self) -> bool {
        let n = self.normalize();
        n.left == 0 && n.coeffs == [1 % self.m()]
    }

    pub fn is_normalized(&self) -> bool {
        if self.is_zero() {
            return self.left == 0 && self.coeffs.len() == 1;
        }
        self.coeffs[0] != 0 && *self.coeffs.last().unwrap() != 0
    }

    /// Minimal-memory form: trims coefficients `≡ 0` from both ends.
    pub fn normalize(&self) -> Self {
        let Some(first) = self.coeffs.iter().position(|&a| a != 0) else {
            return Self::zero(&self.modulus);
        };
        let last = self.coeffs.iter().rposition(|&a| a != 0).unwrap();
        Self {
            modulus: self.modulus.clone(),
            left: self.left + first as i64,
            coeffs: self.coeffs[first..=last].to_vec(),
        }
    }

    /// Reduction of the rule modulo `p_i^{k_i}`, normalized.
    pub fn project(&self, factor: usize) -> Result<Self> {
        let count = self.modulus.factors().len();
        let pp = *self
            .modulus
            .factors()
            .get(factor)
            .ok_or(Error::FactorIndex { index: factor, count })?;
        self.reduce_to(pp)
    }

    /// Reduction modulo a prime power dividing `m`, normalized.
    pub fn reduce_to(&self, pp: PrimePower) -> Result<Self> {
        let q = factorize(pp.value())?;
        Ok(Self::with_modulus(q, self.left, self.coeffs.clone())?.normalize())
    }

    /// Inverse of [`project`](Self::project): glues one rule per prime-power
    /// factor of `modulus` back together coefficient-wise by the CRT.
    pub fn recombine(modulus: &Modulus, components: &[LocalRule]) -> Result<Self> {
        if components.len() != modulus.factors().len() {
            return Err(Error::DimensionMismatch {
                expected: modulus.factors().len(),
                found: components.len(),
            });
        }
        for (c, pp) in components.iter().zip(modulus.factors()) {
            if c.m() != pp.value() {
                return Err(Error::ModulusMismatch(c.m(), pp.value()));
            }
        }
        let lo = components.iter().map(|c| c.left()).min().unwrap_or(0);
        let hi = components.iter().map(|c| c.right()).max().unwrap_or(0);
        let coeffs = (lo..=hi)
            .map(|i| {
                let congruences: Vec<_> = components.iter().map(|c| (c.coeff(i), c.m())).collect();
                crt(&congruences)
            })
            .collect();
        Ok(Self::with_modulus(modulus.clone(), lo, coeffs)?.normalize())
    }

    /// One time step on a finite segment.
    ///
    /// Cell `n` of the output is `Σ a_i · segment[n + i]`; the output window
    /// is `[a − l, b − r]` for an input window `[a, b]`.
    pub fn step(&self, segment: &Segment) -> Result<Segment> {
        let span = self.coeffs.len();
        if segment.symbols.len() < span {
            return Err(Error::SegmentTooShort {
                len: segment.symbols.len(),
                span,
            });
        }
        let m = self.m();
        if let Some(&bad) = segment.symbols.iter().find(|&&s| s >= m) {
            return Err(Error::SymbolOutOfRange { symbol: bad, modulus: m });
        }
        let symbols = segment
            .symbols
            .windows(span)
            .map(|w| {
                w.iter()
                    .zip(&self.coeffs)
                    .fold(0u64, |acc, (&x, &a)| (acc + x * a) % m)
            })
            .collect();
        Ok(Segment {
            start: segment.start - self.left,
            symbols,
        })
    }
}

impl fmt::Display for LocalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.terms() {
            if !first {
                f.write_str("+")?;
            }
            write!(f, "{a}x[{i}]")?;
            first = false;
        }
        if first {
            write!(f, "0x[{}]", self.left)?;
        }
        write!(f, " % {}", self.m())
    }
}

impl FromStr for LocalRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_rule(s)
    }
}

/// A finite run of symbols indexed from `start`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Segment {
    pub start: i64,
    pub symbols: Vec<u64>,
}

impl Segment {
    pub fn new(start: i64, symbols: Vec<u64>) -> Self {
        Self { start, symbols }
    }

    pub fn end(&self) -> i64 {
        self.start + self.symbols.len() as i64 - 1
    }

    /// Restriction to `[lo, hi]`, which must lie inside the segment.
    pub fn restrict(&self, lo: i64, hi: i64) -> Segment {
        let a = (lo - self.start) as usize;
        let b = (hi - self.start) as usize;
        Segment {
            start: lo,
            symbols: self.symbols[a..=b].to_vec(),
        }
    }
}

/// Parses `rule := term ("+" term)* "%" modulus`, `term := coeff "x[" index "]"`.
///
/// Residues are reduced mod `m`; the span is left untrimmed.
pub fn parse_rule(text: &str) -> Result<LocalRule> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let mut terms = Vec::new();
    p.skip_ws();
    if p.peek() == Some(b'%') || p.peek().is_none() {
        return Err(Error::EmptyRule);
    }
    loop {
        let coeff = p.unsigned()?;
        p.expect(b'x')?;
        p.expect(b'[')?;
        let index = p.signed()?;
        p.expect(b']')?;
        terms.push((index, coeff));
        p.skip_ws();
        match p.peek() {
            Some(b'+') => p.pos += 1,
            Some(b'%') => {
                p.pos += 1;
                break;
            }
            Some(c) => return Err(p.error(format!("expected '+' or '%', found {:?}", c as char))),
            None => return Err(p.error("expected '+' or '%', found end of input".into())),
        }
    }
    let m = p.unsigned()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("trailing input after modulus".into()));
    }
    let modulus = factorize(m)?;
    let m = modulus.value();
    let terms: Vec<_> = terms.into_iter().map(|(i, a)| (i, a % m)).collect();
    LocalRule::from_term_map(modulus, terms)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, message: String) -> Error {
        Error::Syntax {
            position: self.pos,
            message,
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {:?}", c as char)))
        }
    }

    fn unsigned(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a nonnegative integer".into()));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        digits.parse().map_err(|_| Error::Syntax {
            position: start,
            message: format!("integer {digits} is too large"),
        })
    }

    fn signed(&mut self) -> Result<i64> {
        self.skip_ws();
        let negative = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let start = self.pos;
        let v = self.unsigned()?;
        let v = i64::try_from(v).map_err(|_| Error::Syntax {
            position: start,
            message: "index out of range".into(),
        })?;
        Ok(if negative { -v } else { v })
    }
}
