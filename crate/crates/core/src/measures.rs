//! Bernoulli and Markov measures on ℤ_m^ℤ and the directional-entropy bounds
//! they give for linear automata over prime powers.
//!
//! Probabilities are carried as `f64` and, when every input entry was given as
//! an exact decimal or fraction, also as exact rationals. Stationary vectors of
//! exact matrices are solved by rational Gaussian elimination.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::LocalRule;

/// Exact mode is used up to this many states.
pub const EXACT_LIMIT: usize = 64;

const FLOAT_SUM_TOLERANCE: f64 = 1e-12;
const RESIDUAL_TOLERANCE: f64 = 1e-12;
const POWER_ITERATIONS: usize = 1_000_000;

/// A probability given either as a string (`"1/8"`, `"0.125"`, `"3"`) or a
/// JSON number. Strings are parsed exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Text(String),
    Number(f64),
}

impl Entry {
    fn exact(&self) -> Result<Option<BigRational>> {
        match self {
            Entry::Text(s) => parse_rational(s).map(Some),
            Entry::Number(_) => Ok(None),
        }
    }

    fn float(&self) -> Result<f64> {
        match self {
            Entry::Text(s) => parse_rational(s).map(|q| to_f64(&q)),
            Entry::Number(x) => Ok(*x),
        }
    }
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"0.1441"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidNumber(s.to_string());
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let q = BigRational::new(num, den);
    Ok(if negative { -q } else { q })
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `"p/q"`, or just `"p"` for integers.
pub fn rational_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `0 · ln 0 = 0`
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    values: Vec<f64>,
    exact: Option<Vec<BigRational>>,
}

impl ProbVector {
    pub fn from_f64(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidProbVector("empty vector".into()));
        }
        if let Some(x) = values.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidProbVector(format!("entry {x} is not a probability")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > FLOAT_SUM_TOLERANCE {
            return Err(Error::InvalidProbVector(format!("entries sum to {sum}")));
        }
        Ok(Self { values, exact: None })
    }

    pub fn from_rationals(exact: Vec<BigRational>) -> Result<Self> {
        if exact.is_empty() {
            return Err(Error::InvalidProbVector("empty vector".into()));
        }
        if let Some(x) = exact.iter().find(|x| x.is_negative()) {
            return Err(Error::InvalidProbVector(format!("entry {x} is negative")));
        }
        let sum: BigRational = exact.iter().sum();
        if !sum.is_one() {
            return Err(Error::InvalidProbVector(format!(
                "entries sum to {}",
                rational_string(&sum)
            )));
        }
        Ok(Self {
            values: exact.iter().map(to_f64).collect(),
            exact: Some(exact),
        })
    }

    /// Exact when every entry is a string, floating otherwise.
    pub fn from_entries(entries: &[Entry]) -> Result<Self> {
        let exact: Option<Vec<BigRational>> =
            entries.iter().map(Entry::exact).collect::<Result<Vec<_>>>()?.into_iter().collect();
        match exact {
            Some(q) => Self::from_rationals(q),
            None => Self::from_f64(entries.iter().map(Entry::float).collect::<Result<_>>()?),
        }
    }

    pub fn uniform(n: usize) -> Self {
        let q = BigRational::new(BigInt::one(), BigInt::from(n));
        Self::from_rationals(vec![q; n]).expect("uniform vector is valid")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exact(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    /// Exact strings when available, shortest round-trip decimals otherwise.
    pub fn to_strings(&self) -> Vec<String> {
        match &self.exact {
            Some(q) => q.iter().map(rational_string).collect(),
            None => self.values.iter().map(|x| x.to_string()).collect(),
        }
    }

    pub fn to_json(&self) -> VectorJson {
        VectorJson {
            n: self.len(),
            entries: match &self.exact {
                Some(q) => q.iter().map(|x| Entry::Text(rational_string(x))).collect(),
                None => self.values.iter().map(|&x| Entry::Number(x)).collect(),
            },
        }
    }

    pub fn from_json(json: &VectorJson) -> Result<Self> {
        if json.entries.len() != json.n {
            return Err(Error::DimensionMismatch {
                expected: json.n,
                found: json.entries.len(),
            });
        }
        Self::from_entries(&json.entries)
    }
}

impl fmt::Display for ProbVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorJson {
    pub n: usize,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub rows: Vec<Vec<Entry>>,
}

/// Row-stochastic `n × n` matrix `T = (t_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    values: Vec<Vec<f64>>,
    exact: Option<Vec<Vec<BigRational>>>,
}

impl StochasticMatrix {
    pub fn from_f64(values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        check_square(n, values.iter().map(Vec::len))?;
        for (i, row) in values.iter().enumerate() {
            if let Some(x) = row.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return Err(Error::NotStochastic(format!("row {i} has entry {x}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > FLOAT_SUM_TOLERANCE {
                return Err(Error::NotStochastic(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { values, exact: None })
    }

    pub fn from_rationals(exact: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = exact.len();
        check_square(n, exact.iter().map(Vec::len))?;
        for (i, row) in exact.iter().enumerate() {
            if let Some(x) = row.iter().find(|x| x.is_negative()) {
                return Err(Error::NotStochastic(format!("row {i} has entry {x}")));
            }
            let sum: BigRational = row.iter().sum();
            if !sum.is_one() {
                return Err(Error::NotStochastic(format!(
                    "row {i} sums to {}",
                    rational_string(&sum)
                )));
            }
        }
        Ok(Self {
            values: exact.iter().map(|r| r.iter().map(to_f64).collect()).collect(),
            exact: Some(exact),
        })
    }

    pub fn from_entries(rows: &[Vec<Entry>]) -> Result<Self> {
        let all_text = rows.iter().flatten().all(|e| matches!(e, Entry::Text(_)));
        if all_text {
            let exact = rows
                .iter()
                .map(|r| r.iter().map(|e| e.exact().map(Option::unwrap)).collect())
                .collect::<Result<Vec<Vec<_>>>>()?;
            Self::from_rationals(exact)
        } else {
            let values = rows
                .iter()
                .map(|r| r.iter().map(Entry::float).collect())
                .collect::<Result<Vec<Vec<_>>>>()?;
            Self::from_f64(values)
        }
    }

    pub fn from_json(json: &MatrixJson) -> Result<Self> {
        if json.rows.len() != json.n {
            return Err(Error::DimensionMismatch {
                expected: json.n,
                found: json.rows.len(),
            });
        }
        Self::from_entries(&json.rows)
    }

    pub fn to_json(&self) -> MatrixJson {
        let rows = match &self.exact {
            Some(q) => q
                .iter()
                .map(|r| r.iter().map(|x| Entry::Text(rational_string(x))).collect())
                .collect(),
            None => self
                .values
                .iter()
                .map(|r| r.iter().map(|&x| Entry::Number(x)).collect())
                .collect(),
        };
        MatrixJson { n: self.n(), rows }
    }

    /// Every row equal to `p`: the Bernoulli measure as a Markov chain.
    pub fn constant_rows(p: &ProbVector) -> Self {
        let n = p.len();
        match p.exact() {
            Some(q) => Self::from_rationals(vec![q.to_vec(); n]).expect("rows are p"),
            None => Self {
                values: vec![p.values().to_vec(); n],
                exact: None,
            },
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn exact(&self) -> Option<&[Vec<BigRational>]> {
        self.exact.as_deref()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Whether every state reaches every other along positive entries.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| self.reachable(i).iter().all(|&r| r))
    }

    fn reachable(&self, from: usize) -> Vec<bool> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(i) = queue.pop_front() {
            for (j, &w) in self.values[i].iter().enumerate() {
                if w > 0.0 && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen
    }

    /// The recurrent class of the lowest-numbered recurrent state.
    fn closed_class(&self) -> Vec<usize> {
        let n = self.n();
        let reach: Vec<Vec<bool>> = (0..n).map(|i| self.reachable(i)).collect();
        let recurrent = (0..n)
            .find(|&i| (0..n).all(|j| !reach[i][j] || reach[j][i]))
            .expect("a finite chain has a recurrent state");
        (0..n).filter(|&j| reach[recurrent][j]).collect()
    }

    /// `max_j |(πT)_j − π_j|`
    pub fn residual(&self, pi: &[f64]) -> f64 {
        let n = self.n();
        (0..n)
            .map(|j| {
                let s: f64 = (0..n).map(|i| pi[i] * self.values[i][j]).sum();
                (s - pi[j]).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn check_square(n: usize, row_lengths: impl Iterator<Item = usize>) -> Result<()> {
    if n == 0 {
        return Err(Error::NotStochastic("empty matrix".into()));
    }
    for len in row_lengths {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stationary {
    pub vector: ProbVector,
    /// `false` means the chain is reducible and `vector` is one of several
    /// stationary vectors.
    pub irreducible: bool,
}

/// Solves `πT = π`, `Σ π_i = 1`.
///
/// Reducible chains get the stationary vector supported on the recurrent
/// class of the lowest-numbered recurrent state.
pub fn stationary(matrix: &StochasticMatrix) -> Result<Stationary> {
    let irreducible = matrix.is_irreducible();
    let class = matrix.closed_class();
    let vector = match matrix.exact() {
        Some(exact) if matrix.n() <= EXACT_LIMIT => stationary_exact(exact, &class)?,
        _ => stationary_float(matrix, &class)?,
    };
    Ok(Stationary { vector, irreducible })
}

fn stationary_exact(t: &[Vec<BigRational>], class: &[usize]) -> Result<ProbVector> {
    let k = class.len();
    // unknowns π_c for c in class; rows: balance equations for all but the
    // last class member, then normalization
    let mut a: Vec<Vec<BigRational>> = Vec::with_capacity(k);
    for &j in &class[..k - 1] {
        let mut row: Vec<BigRational> = class.iter().map(|&i| t[i][j].clone()).collect();
        let pos = class.iter().position(|&c| c == j).unwrap();
        row[pos] -= BigRational::one();
        row.push(BigRational::zero());
        a.push(row);
    }
    let mut norm = vec![BigRational::one(); k];
    norm.push(BigRational::one());
    a.push(norm);

    for col in 0..k {
        let pivot = (col..k)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(Error::NoConvergence(f64::NAN))?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..k {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(pivot_row) {
                    *x -= &factor * p;
                }
            }
        }
    }
    let n = t.len();
    let mut pi = vec![BigRational::zero(); n];
    for (idx, &c) in class.iter().enumerate() {
        pi[c] = a[idx][k].clone();
    }
    ProbVector::from_rationals(pi)
}

fn stationary_float(matrix: &StochasticMatrix, class: &[usize]) -> Result<ProbVector> {
    let k = class.len();
    let t = matrix.values();
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (pos, &j) in class[..k - 1].iter().enumerate() {
        let mut row: Vec<f64> = class.iter().map(|&i| t[i][j]).collect();
        row[pos] -= 1.0;
        row.push(0.0);
        a.push(row);
    }
    a.push(vec![1.0; k + 1]);
    let mut solved = true;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            solved = false;
            break;
        }
        a.swap(col, pivot);
        for r in col + 1..k {
            let factor = a[r][col] / a[col][col];
            if factor != 0.0 {
                let (top, bottom) = a.split_at_mut(r);
                for (x, y) in bottom[0][col..=k].iter_mut().zip(&top[col][col..=k]) {
                    *x -= factor * y;
                }
            }
        }
    }
    let n = matrix.n();
    let mut pi = vec![0.0; n];
    if solved {
        let mut x = vec![0.0; k];
        for r in (0..k).rev() {
            let s: f64 = (r + 1..k).map(|c| a[r][c] * x[c]).sum();
            x[r] = (a[r][k] - s) / a[r][r];
        }
        for (idx, &c) in class.iter().enumerate() {
            pi[c] = x[idx].max(0.0);
        }
        renormalize(&mut pi);
    }
    if !solved || matrix.residual(&pi) > RESIDUAL_TOLERANCE {
        pi = power_iteration(matrix, class)?;
    }
    ProbVector::from_f64(pi)
}

fn renormalize(pi: &mut [f64]) {
    let s: f64 = pi.iter().sum();
    if s > 0.0 {
        pi.iter_mut().for_each(|x| *x /= s);
    }
}

/// Iterates the lazy chain `(I + T)/2`, which has the same stationary vectors
/// and is aperiodic.
fn power_iteration(matrix: &StochasticMatrix, class: &[usize]) -> Result<Vec<f64>> {
    let n = matrix.n();
    let t = matrix.values();
    let mut pi = vec![0.0; n];
    for &c in class {
        pi[c] = 1.0 / class.len() as f64;
    }
    let mut residual = f64::INFINITY;
    for _ in 0..POWER_ITERATIONS {
        let mut next = vec![0.0; n];
        for i in 0..n {
            if pi[i] == 0.0 {
                continue;
            }
            next[i] += 0.5 * pi[i];
            for j in 0..n {
                next[j] += 0.5 * pi[i] * t[i][j];
            }
        }
        renormalize(&mut next);
        pi = next;
        residual = matrix.residual(&pi);
        if residual <= RESIDUAL_TOLERANCE {
            return Ok(pi);
        }
    }
    Err(Error::NoConvergence(residual))
}

/// A shift-invariant Markov measure `μ_{πT}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMeasure {
    matrix: StochasticMatrix,
    stationary: ProbVector,
    irreducible: bool,
}

impl MarkovMeasure {
    /// Computes the stationary vector of `matrix`.
    pub fn new(matrix: StochasticMatrix) -> Result<Self> {
        let Stationary { vector, irreducible } = stationary(&matrix)?;
        Ok(Self {
            matrix,
            stationary: vector,
            irreducible,
        })
    }

    /// Uses a caller-supplied `π`, which must satisfy `πT = π`.
    pub fn with_stationary(matrix: StochasticMatrix, pi: ProbVector) -> Result<Self> {
        if pi.len() != matrix.n() {
            return Err(Error::DimensionMismatch {
                expected: matrix.n(),
                found: pi.len(),
            });
        }
        let residual = matrix.residual(pi.values());
        if residual > 1e-10 {
            return Err(Error::InvalidProbVector(format!(
                "not stationary: residual {residual:e}"
            )));
        }
        let irreducible = matrix.is_irreducible();
        Ok(Self {
            matrix,
            stationary: pi,
            irreducible,
        })
    }

    /// The i.i.d. measure with marginal `p`.
    pub fn bernoulli(p: &ProbVector) -> Self {
        Self {
            matrix: StochasticMatrix::constant_rows(p),
            stationary: p.clone(),
            irreducible: p.values().iter().all(|&x| x > 0.0),
        }
    }

    pub fn matrix(&self) -> &StochasticMatrix {
        &self.matrix
    }

    pub fn stationary(&self) -> &ProbVector {
        &self.stationary
    }

    pub fn is_exact(&self) -> bool {
        self.stationary.exact().is_some()
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }
}

/// `−Σ p_i ln p_i`
pub fn shannon_entropy(p: &ProbVector) -> f64 {
    p.values().iter().fold(0.0, |h, &x| h - plogp(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRate {
    /// `−Σ_i π_i Σ_j t_ij ln t_ij`
    pub rate: f64,
    /// `H_i = −Σ_j t_ij ln t_ij`
    pub row_entropies: Vec<f64>,
}

pub fn entropy_rate(mu: &MarkovMeasure) -> EntropyRate {
    let row_entropies: Vec<f64> = mu
        .matrix
        .values()
        .iter()
        .map(|row| row.iter().fold(0.0, |h, &t| h - plogp(t)))
        .collect();
    let rate = mu
        .stationary
        .values()
        .iter()
        .zip(&row_entropies)
        .map(|(p, h)| p * h)
        .sum();
    EntropyRate { rate, row_entropies }
}

fn directional_bound(rule: &LocalRule, n: usize, q: f64, rate: f64) -> Result<f64> {
    let pp = rule
        .modulus()
        .as_prime_power()
        .ok_or(Error::NotPrimePower(rule.m()))?;
    if n as u64 != rule.m() {
        return Err(Error::DimensionMismatch {
            expected: rule.m() as usize,
            found: n,
        });
    }
    let rule = rule.normalize();
    if rule.terms().all(|(_, a)| a % pp.prime == 0) {
        return Ok(0.0);
    }
    Ok(q.abs() * rule.width() as f64 * rate)
}

/// `|q| (r − l) H(p)` for the Bernoulli measure `μ_p` and direction `(s, q)`.
pub fn bernoulli_bound(rule: &LocalRule, p: &ProbVector, q: f64) -> Result<f64> {
    directional_bound(rule, p.len(), q, shannon_entropy(p))
}

/// `|q| (r − l) h(μ_{πT})` for direction `(s, q)`.
pub fn markov_bound(rule: &LocalRule, mu: &MarkovMeasure, q: f64) -> Result<f64> {
    directional_bound(rule, mu.n(), q, entropy_rate(mu).rate)
}

/// `|b| h(μ_{πT})` along the integer direction `(a, b)`.
pub fn markov_directional(mu: &MarkovMeasure, _a: i64, b: i64) -> f64 {
    b.unsigned_abs() as f64 * entropy_rate(mu).rate
}

/// Either kind of measure, for cylinder probabilities and sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Bernoulli(ProbVector),
    Markov(MarkovMeasure),
}

impl Measure {
    pub fn alphabet_size(&self) -> usize {
        match self {
            Measure::Bernoulli(p) => p.len(),
            Measure::Markov(mu) => mu.n(),
        }
    }

    fn check_word(&self, word: &[usize]) -> Result<()> {
        if word.is_empty() {
            return Err(Error::EmptyWord);
        }
        let n = self.alphabet_size();
        match word.iter().find(|&&j| j >= n) {
            Some(&j) => Err(Error::SymbolOutOfRange {
                symbol: j as u64,
                modulus: n as u64,
            }),
            None => Ok(()),
        }
    }

    /// Measure of the cylinder `{x : x_a = j_0, …, x_{a+s} = j_s}`.
    pub fn cylinder_prob(&self, word: &[usize]) -> Result<f64> {
        self.check_word(word)?;
        Ok(match self {
            Measure::Bernoulli(p) => word.iter().map(|&j| p.values()[j]).product(),
            Measure::Markov(mu) => {
                let t = mu.matrix.values();
                mu.stationary.values()[word[0]]
                    * word.windows(2).map(|w| t[w[0]][w[1]]).product::<f64>()
            }
        })
    }

    /// Exact cylinder measure, when the measure is exact.
    pub fn cylinder_prob_exact(&self, word: &[usize]) -> Result<Option<BigRational>> {
        self.check_word(word)?;
        Ok(match self {
            Measure::Bernoulli(p) => p
                .exact()
                .map(|q| word.iter().map(|&j| q[j].clone()).product()),
            Measure::Markov(mu) => match (mu.stationary.exact(), mu.matrix.exact()) {
                (Some(pi), Some(t)) => Some(
                    word.windows(2)
                        .fold(pi[word[0]].clone(), |acc, w| acc * &t[w[0]][w[1]]),
                ),
                _ => None,
            },
        })
    }
}
