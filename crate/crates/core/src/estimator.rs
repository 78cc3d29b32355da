//! Brute-force pattern counting in space-time windows.
//!
//! A window `W(half_width, rows, θ)` is the set of lattice cells `(n, t)`
//! with `t = 0, …, rows` and `|n − t·cot θ| ≤ half_width`. Two initial
//! configurations are told apart by the window exactly when some cell
//! differs, so the number of distinct window patterns stands in for the
//! maximal size of an `(ε, W)`-separated set with `ε ≤ m^{−half_width}`.
//!
//! Exact mode enumerates every initial segment on the dependence cone.
//! Sampled mode draws segments from ChaCha8 streams keyed by a seed and
//! reports a lower bound.

use std::collections::{HashMap, HashSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::rule::LocalRule;

/// Default cap on enumerated initial segments in exact mode.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

const CELL_TOLERANCE: f64 = 1e-9;
/// Work is split into this many pieces regardless of the thread count, so
/// sampled runs are reproducible on any machine.
const CHUNKS: u64 = 64;

/// A local map `x ↦ f(x_{n+l}, …, x_{n+r})` over `ℤ_m`.
///
/// Linear rules implement this; arbitrary closures can be wrapped in
/// [`FnRule`].
pub trait LocalMap: Sync {
    fn modulus(&self) -> u64;
    /// `(l, r)` with `l ≤ r`.
    fn span(&self) -> (i64, i64);
    /// `window` holds `x_{n+l}, …, x_{n+r}`.
    fn apply(&self, window: &[u64]) -> u64;
}

impl LocalMap for LocalRule {
    fn modulus(&self) -> u64 {
        self.m()
    }

    fn span(&self) -> (i64, i64) {
        (self.left(), self.right())
    }

    fn apply(&self, window: &[u64]) -> u64 {
        let m = self.m();
        window
            .iter()
            .zip(self.coeffs())
            .fold(0, |acc, (&x, &a)| (acc + x * a) % m)
    }
}

/// A nonlinear rule given by a closure.
///
/// ```
/// use dirent::estimator::{count_patterns, CountMode, FnRule, WindowSpec};
///
/// // elementary rule 90 written as a closure
/// let f = FnRule::new(2, -1, 1, |w: &[u64]| w[0] ^ w[2]).unwrap();
/// let w = WindowSpec::new(1, 2, std::f64::consts::FRAC_PI_2).unwrap();
/// let n = count_patterns(&f, &w, CountMode::default()).unwrap();
/// assert_eq!(n.count, 1 << 7);
/// ```
pub struct FnRule<F> {
    modulus: u64,
    left: i64,
    right: i64,
    f: F,
}

impl<F: Fn(&[u64]) -> u64 + Sync> FnRule<F> {
    pub fn new(modulus: u64, left: i64, right: i64, f: F) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::ModulusTooSmall(modulus));
        }
        if left > right {
            return Err(Error::InvalidArgument(format!("empty span [{left}, {right}]")));
        }
        Ok(Self {
            modulus,
            left,
            right,
            f,
        })
    }
}

impl<F: Fn(&[u64]) -> u64 + Sync> LocalMap for FnRule<F> {
    fn modulus(&self) -> u64 {
        self.modulus
    }

    fn span(&self) -> (i64, i64) {
        (self.left, self.right)
    }

    fn apply(&self, window: &[u64]) -> u64 {
        (self.f)(window) % self.modulus
    }
}

fn step<M: LocalMap + ?Sized>(map: &M, row: &[u64]) -> Vec<u64> {
    let (l, r) = map.span();
    row.windows((r - l + 1) as usize).map(|w| map.apply(w)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub half_width: u32,
    pub rows: u32,
    pub theta: f64,
}

impl WindowSpec {
    pub fn new(half_width: u32, rows: u32, theta: f64) -> Result<Self> {
        let w = Self {
            half_width,
            rows,
            theta,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_width < 1 {
            return Err(Error::InvalidWindow("half_width must be at least 1".into()));
        }
        if self.rows < 1 {
            return Err(Error::InvalidWindow("rows must be at least 1".into()));
        }
        if !(self.theta > 0.0 && self.theta < std::f64::consts::PI) {
            return Err(Error::InvalidWindow(format!(
                "theta {} is outside (0, π)",
                self.theta
            )));
        }
        Ok(())
    }

    /// Site range `[lo, hi]` of row `t`.
    pub fn row_range(&self, t: u32) -> (i64, i64) {
        let c = t as f64 * (self.theta.cos() / self.theta.sin());
        let hw = self.half_width as f64;
        let lo = (c - hw - CELL_TOLERANCE).ceil() as i64;
        let hi = (c + hw + CELL_TOLERANCE).floor() as i64;
        (lo, hi)
    }
}

/// Cells `(n, t)` of the window, ordered by `t` then `n`.
pub fn lattice_cells(w: &WindowSpec) -> Result<Vec<(i64, u32)>> {
    w.validate()?;
    Ok((0..=w.rows)
        .flat_map(|t| {
            let (lo, hi) = w.row_range(t);
            (lo..=hi).map(move |n| (n, t))
        })
        .collect())
}

/// Smallest interval of time-0 sites that determines every window cell.
pub fn dependence_cone<M: LocalMap + ?Sized>(map: &M, w: &WindowSpec) -> Result<(i64, i64)> {
    w.validate()?;
    let (l, r) = map.span();
    let mut a = i64::MAX;
    let mut b = i64::MIN;
    for t in 0..=w.rows {
        let (lo, hi) = w.row_range(t);
        a = a.min(lo + t as i64 * l);
        b = b.max(hi + t as i64 * r);
    }
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CountMode {
    Exact { budget: u64 },
    Sampled { seed: u64, budget: u64 },
}

impl Default for CountMode {
    fn default() -> Self {
        CountMode::Exact {
            budget: DEFAULT_BUDGET,
        }
    }
}

impl CountMode {
    pub fn name(&self) -> &'static str {
        match self {
            CountMode::Exact { .. } => "exact",
            CountMode::Sampled { .. } => "sampled",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            CountMode::Exact { .. } => None,
            CountMode::Sampled { seed, .. } => Some(*seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCount {
    pub count: u64,
    pub mode: CountMode,
    pub cone: (i64, i64),
    /// Initial segments evaluated.
    pub evaluated: u64,
    /// `ln(count) / rows`
    pub nats_per_row: f64,
}

/// Packs window patterns into bit strings.
struct Packer {
    bits: u32,
    rows: Vec<(usize, usize)>,
    cells: usize,
}

impl Packer {
    fn new(m: u64, w: &WindowSpec, cone_start: i64, l: i64) -> Self {
        let bits = 64 - (m - 1).leading_zeros();
        // row t of the simulation starts at site cone_start − t·l
        let rows: Vec<(usize, usize)> = (0..=w.rows)
            .map(|t| {
                let (lo, hi) = w.row_range(t);
                let offset = (lo - (cone_start - t as i64 * l)) as usize;
                (offset, (hi - lo + 1) as usize)
            })
            .collect();
        let cells = rows.iter().map(|&(_, len)| len).sum();
        Self { bits, rows, cells }
    }

    fn key<M: LocalMap + ?Sized>(&self, map: &M, segment: Vec<u64>) -> Vec<u64> {
        let mut key = vec![0u64; (self.cells * self.bits as usize).div_ceil(64)];
        let mut bit = 0usize;
        let mut row = segment;
        for (t, &(offset, len)) in self.rows.iter().enumerate() {
            if t > 0 {
                row = step(map, &row);
            }
            for &x in &row[offset..offset + len] {
                let (word, shift) = (bit / 64, bit % 64);
                key[word] |= x << shift;
                if shift + self.bits as usize > 64 {
                    key[word + 1] |= x >> (64 - shift);
                }
                bit += self.bits as usize;
            }
        }
        key
    }
}

fn decode(mut index: u64, m: u64, len: usize) -> Vec<u64> {
    let mut digits = vec![0; len];
    for d in digits.iter_mut() {
        *d = index % m;
        index /= m;
    }
    digits
}

fn chunk_bounds(total: u64, chunk: u64) -> (u64, u64) {
    let per = total / CHUNKS;
    let extra = total % CHUNKS;
    let start = chunk * per + chunk.min(extra);
    let len = per + u64::from(chunk < extra);
    (start, start + len)
}

fn rng_for(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn union(mut a: HashSet<Vec<u64>>, b: HashSet<Vec<u64>>) -> HashSet<Vec<u64>> {
    if a.len() < b.len() {
        return union(b, a);
    }
    a.extend(b);
    a
}

/// Counts distinct window patterns over initial segments on the cone.
pub fn count_patterns<M: LocalMap + ?Sized>(
    map: &M,
    w: &WindowSpec,
    mode: CountMode,
) -> Result<PatternCount> {
    let cone = dependence_cone(map, w)?;
    let m = map.modulus();
    let len = (cone.1 - cone.0 + 1) as usize;
    let packer = Packer::new(m, w, cone.0, map.span().0);

    let (patterns, evaluated) = match mode {
        CountMode::Exact { budget } => {
            let total = u32::try_from(len)
                .ok()
                .and_then(|e| m.checked_pow(e))
                .filter(|&t| t <= budget)
                .ok_or_else(|| Error::BudgetExceeded {
                    required: format!("{m}^{len}"),
                    budget,
                })?;
            let set = (0..CHUNKS)
                .into_par_iter()
                .map(|c| {
                    let (start, end) = chunk_bounds(total, c);
                    (start..end)
                        .map(|i| packer.key(map, decode(i, m, len)))
                        .collect::<HashSet<_>>()
                })
                .reduce(HashSet::new, union);
            (set, total)
        }
        CountMode::Sampled { seed, budget } => {
            if budget == 0 {
                return Err(Error::InvalidArgument("sampling budget must be positive".into()));
            }
            let set = (0..CHUNKS)
                .into_par_iter()
                .map(|c| {
                    let (start, end) = chunk_bounds(budget, c);
                    let mut rng = rng_for(seed, c);
                    (start..end)
                        .map(|_| {
                            let segment = (0..len).map(|_| rng.gen_range(0..m)).collect();
                            packer.key(map, segment)
                        })
                        .collect::<HashSet<_>>()
                })
                .reduce(HashSet::new, union);
            (set, budget)
        }
    };
    let count = patterns.len() as u64;
    Ok(PatternCount {
        count,
        mode,
        cone,
        evaluated,
        nats_per_row: (count as f64).ln() / w.rows as f64,
    })
}

/// One line of estimator output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub rule: String,
    pub theta: f64,
    pub half_width: u32,
    pub rows: u32,
    pub mode: String,
    pub seed: Option<u64>,
    pub count: u64,
    pub nats_per_row: f64,
    /// `ln(count) / ((2·half_width + 1)·rows·sin θ)`
    pub nats_per_site: f64,
}

/// Pattern-count estimate of the topological directional entropy at `θ`.
pub fn estimate_tde(
    rule: &LocalRule,
    theta: f64,
    half_width: u32,
    rows: u32,
    mode: CountMode,
) -> Result<EstimateRecord> {
    let w = WindowSpec::new(half_width, rows, theta)?;
    let rule = rule.normalize();
    let n = count_patterns(&rule, &w, mode)?;
    let ln_n = (n.count as f64).ln();
    Ok(EstimateRecord {
        rule: rule.to_string(),
        theta,
        half_width,
        rows,
        mode: mode.name().to_string(),
        seed: mode.seed(),
        count: n.count,
        nats_per_row: n.nats_per_row,
        nats_per_site: ln_n / ((2 * half_width + 1) as f64 * rows as f64 * theta.sin()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    /// Plug-in joint entropy of the block sequence divided by the depth.
    pub nats: f64,
    pub samples: u64,
    pub distinct: u64,
    /// Set when the sample count is below the size of the block space.
    pub warning: Option<String>,
}

/// Sampling parameters for [`empirical_measure_entropy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampling {
    pub samples: u64,
    pub seed: u64,
}

fn sample_configuration(measure: &Measure, len: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    match measure {
        Measure::Bernoulli(p) => {
            let dist = WeightedIndex::new(p.values()).expect("valid probability vector");
            (0..len).map(|_| dist.sample(rng) as u64).collect()
        }
        Measure::Markov(mu) => {
            let first = WeightedIndex::new(mu.stationary().values()).expect("valid stationary vector");
            let rows: Vec<Option<WeightedIndex<f64>>> = mu
                .matrix()
                .values()
                .iter()
                .map(|r| WeightedIndex::new(r).ok())
                .collect();
            let mut x = Vec::with_capacity(len);
            let mut state = first.sample(rng);
            x.push(state as u64);
            while x.len() < len {
                state = rows[state].as_ref().expect("stochastic row").sample(rng);
                x.push(state as u64);
            }
            x
        }
    }
}

/// Plug-in estimate of the measure entropy of `σ^s F^q`.
///
/// Each sample records the blocks `(σ^{sk} F^{qk} x)|[−i, i]` for
/// `k = 0, …, depth − 1`. The joint entropy of that sequence over `depth`
/// is biased low for finite samples.
pub fn empirical_measure_entropy(
    measure: &Measure,
    rule: &LocalRule,
    s: i64,
    q: i64,
    block_radius: u32,
    depth: u32,
    sampling: Sampling,
) -> Result<MeasureEstimate> {
    if q < 0 {
        return Err(Error::InvalidArgument("q must be non-negative".into()));
    }
    if depth < 1 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    if sampling.samples < 1 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let m = rule.m();
    if measure.alphabet_size() as u64 != m {
        return Err(Error::DimensionMismatch {
            expected: m as usize,
            found: measure.alphabet_size(),
        });
    }
    let rule = rule.normalize();
    let (l, r) = (rule.left(), rule.right());
    let i = block_radius as i64;
    let ks = 0..depth as i64;
    let a = ks.clone().map(|k| -i + s * k + q * k * l).min().unwrap();
    let b = ks.map(|k| i + s * k + q * k * r).max().unwrap();
    let len = (b - a + 1) as usize;

    let record = |x: Vec<u64>| -> Vec<u64> {
        let mut key = Vec::with_capacity((2 * i as usize + 1) * depth as usize);
        let mut row = x;
        let mut time = 0i64;
        for k in 0..depth as i64 {
            while time < q * k {
                row = step(&rule, &row);
                time += 1;
            }
            // row at time `time` starts at site a − time·l
            let start = a - time * l;
            let lo = (-i + s * k - start) as usize;
            key.extend_from_slice(&row[lo..lo + 2 * i as usize + 1]);
        }
        key
    };

    let counts = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let (start, end) = chunk_bounds(sampling.samples, c);
            let mut rng = rng_for(sampling.seed, c);
            let mut counts: HashMap<Vec<u64>, u64> = HashMap::new();
            for _ in start..end {
                *counts.entry(record(sample_configuration(measure, len, &mut rng))).or_default() += 1;
            }
            counts
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });

    let total = sampling.samples as f64;
    let mut probs: Vec<f64> = counts.values().map(|&c| c as f64 / total).collect();
    probs.sort_by(f64::total_cmp);
    let joint: f64 = -probs.iter().map(|p| p * p.ln()).sum::<f64>();

    let block_space = (m as f64).powi((2 * block_radius as i32 + 1) * depth as i32);
    let warning = (total < block_space).then(|| {
        format!(
            "{} samples for a block space of size {block_space:e}; estimate is biased low",
            sampling.samples
        )
    });
    Ok(MeasureEstimate {
        nats: joint / depth as f64,
        samples: sampling.samples,
        distinct: counts.len() as u64,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2};

    use super::*;
    use crate::measures::ProbVector;
    use crate::rule::parse_rule;

    fn rule(s: &str) -> LocalRule {
        parse_rule(s).unwrap()
    }

    fn vertical(hw: u32, rows: u32) -> WindowSpec {
        WindowSpec::new(hw, rows, FRAC_PI_2).unwrap()
    }

    #[test]
    fn window_validation() {
        assert!(WindowSpec::new(0, 1, 1.0).is_err());
        assert!(WindowSpec::new(1, 0, 1.0).is_err());
        assert!(WindowSpec::new(1, 1, 0.0).is_err());
        assert!(WindowSpec::new(1, 1, std::f64::consts::PI).is_err());
    }

    #[test]
    fn vertical_cells() {
        let cells = lattice_cells(&vertical(1, 2)).unwrap();
        assert_eq!(cells.len(), 9);
        assert_eq!(cells[0], (-1, 0));
        assert_eq!(cells[8], (1, 2));
    }

    #[test]
    fn slanted_cells_include_boundary_ties() {
        // cot(π/4) = 1: row t covers [t − 1, t + 1]
        let cells = lattice_cells(&WindowSpec::new(1, 2, FRAC_PI_4).unwrap()).unwrap();
        let row2: Vec<i64> = cells.iter().filter(|c| c.1 == 2).map(|c| c.0).collect();
        assert_eq!(row2, vec![1, 2, 3]);
    }

    #[test]
    fn cones() {
        let f = rule("1x[-1]+1x[1] % 2");
        assert_eq!(dependence_cone(&f, &vertical(2, 3)).unwrap(), (-5, 5));
        assert_eq!(dependence_cone(&LocalRule::identity(f.modulus()), &vertical(2, 3)).unwrap(), (-2, 2));
        assert_eq!(dependence_cone(&rule("1x[1] % 2"), &vertical(1, 2)).unwrap(), (-1, 3));
    }

    #[test]
    fn identity_and_shift_counts() {
        let id = LocalRule::identity(&crate::Modulus::new(2).unwrap());
        assert_eq!(count_patterns(&id, &vertical(1, 2), CountMode::default()).unwrap().count, 8);
        let shift = rule("1x[1] % 2");
        assert_eq!(count_patterns(&shift, &vertical(1, 2), CountMode::default()).unwrap().count, 32);
    }

    #[test]
    fn xor_rule_counts_full_cone() {
        let f = rule("1x[-1]+1x[1] % 2");
        let n = count_patterns(&f, &vertical(2, 4), CountMode::default()).unwrap();
        assert_eq!(n.cone, (-6, 6));
        assert_eq!(n.count, 1 << 13);
    }

    #[test]
    fn budget_is_enforced() {
        let f = rule("1x[-1]+1x[1] % 2");
        let err = count_patterns(&f, &vertical(2, 4), CountMode::Exact { budget: 1000 }).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { budget: 1000, .. }));
    }

    #[test]
    fn sampled_is_lower_bound_and_reproducible() {
        let f = rule("1x[-1]+1x[0]+1x[1] % 3");
        let w = vertical(1, 2);
        let exact = count_patterns(&f, &w, CountMode::default()).unwrap().count;
        let mode = CountMode::Sampled { seed: 7, budget: 500 };
        let a = count_patterns(&f, &w, mode).unwrap();
        let b = count_patterns(&f, &w, mode).unwrap();
        assert_eq!(a, b);
        assert!(a.count <= exact);
    }

    #[test]
    fn key_packing_across_word_boundary() {
        // 3 bits per cell, 45 cells: crosses two word boundaries
        let f = rule("1x[0]+1x[1] % 5");
        let w = WindowSpec::new(2, 8, 2.0).unwrap();
        let a = count_patterns(&f, &w, CountMode::Sampled { seed: 1, budget: 3000 }).unwrap();
        assert!(a.count > 2900);
    }

    #[test]
    fn estimate_record_json() {
        let f = rule("1x[-1]+1x[1] % 2");
        let rec = estimate_tde(&f, FRAC_PI_2, 2, 4, CountMode::default()).unwrap();
        assert!((rec.nats_per_row - (2.0 * LN_2 + 5.0 * LN_2 / 4.0)).abs() < 1e-12);
        assert!((rec.nats_per_site - 13.0 * LN_2 / 20.0).abs() < 1e-12);
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.starts_with("{\"rule\":\"1x[-1]+1x[1] % 2\",\"theta\":"));
        assert!(json.contains("\"mode\":\"exact\",\"seed\":null,\"count\":8192"));
    }

    #[test]
    fn shift_entropy_of_bernoulli() {
        let id = LocalRule::identity(&crate::Modulus::new(2).unwrap());
        let mu = Measure::Bernoulli(ProbVector::uniform(2));
        let est = empirical_measure_entropy(&mu, &id, 1, 0, 0, 4, Sampling { samples: 1 << 16, seed: 3 }).unwrap();
        assert!((est.nats - LN_2).abs() < 0.01, "{}", est.nats);
        assert_eq!(est.distinct, 16);
        assert!(est.warning.is_none());
    }

    #[test]
    fn empirical_rejects_bad_input() {
        let f = rule("1x[0] % 2");
        let mu = Measure::Bernoulli(ProbVector::uniform(3));
        let s = Sampling { samples: 10, seed: 0 };
        assert!(empirical_measure_entropy(&mu, &f, 0, 1, 0, 1, s).is_err());
        let mu = Measure::Bernoulli(ProbVector::uniform(2));
        assert!(empirical_measure_entropy(&mu, &f, 0, -1, 0, 1, s).is_err());
        assert!(empirical_measure_entropy(&mu, &f, 0, 1, 0, 1, Sampling { samples: 0, seed: 0 }).is_err());
    }
}
