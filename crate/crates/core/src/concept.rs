//! Parameterized concept classes, targets, and the one-sided ghost gap.
//!
//! For a hypothesis `h`, target `c` and pair `p = (S, T)` of samples of size
//! `m`, the ghost gap is `Γ = L̂_T(h,c) − L̂_S(h,c)` and the bad event at
//! threshold `ε` is `{p : ∃θ Γ_θ(p) ≥ ε/2}`. The inequality is closed and is
//! always decided in exact integer arithmetic.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::measure::{FiniteDomain, PairSpace, Sample, SamplePair};
use crate::rational::{format_rational, parse_rational, Rational};

pub type Evaluator = Arc<dyn Fn(usize, usize) -> bool + Send + Sync>;
pub type Describer = Arc<dyn Fn(usize) -> String + Send + Sync>;

/// A finite parameter list `Θ` with a total evaluator `e(θ, x)`.
///
/// Parameters are addressed by index `0..len`; points by their index in the
/// domain. Evaluators must be deterministic and re-entrant.
#[derive(Clone)]
pub struct ParamClass {
    name: String,
    domain: Arc<FiniteDomain>,
    len: usize,
    eval: Evaluator,
    describe: Describer,
}

impl fmt::Debug for ParamClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamClass")
            .field("name", &self.name)
            .field("params", &self.len)
            .field("domain", &self.domain.len())
            .finish()
    }
}

impl ParamClass {
    pub fn new(
        name: impl Into<String>,
        domain: Arc<FiniteDomain>,
        len: usize,
        eval: Evaluator,
        describe: Describer,
    ) -> Result<Self> {
        let name = name.into();
        if len == 0 {
            return Err(Error::InvalidArgument(format!("class {name:?} has no parameters")));
        }
        Ok(Self {
            name,
            domain,
            len,
            eval,
            describe,
        })
    }

    /// `e_θ(x) = 1[x ≥ θ]` with `θ` ranging over the ordered domain points
    /// plus one threshold above every point (the all-zero concept).
    pub fn threshold(domain: Arc<FiniteDomain>) -> Self {
        let order = domain.sorted_indices();
        let n = order.len();
        let mut rank = vec![0usize; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let d2 = domain.clone();
        let describe: Describer = Arc::new(move |t| {
            if t < n {
                format!("x>={}", d2.point(order[t]).id)
            } else {
                "x>=inf".to_string()
            }
        });
        let eval: Evaluator = Arc::new(move |t, x| rank[x] >= t);
        Self::new("threshold", domain, n + 1, eval, describe).expect("nonempty")
    }

    /// `e_(lo,hi)(x) = 1[lo ≤ x ≤ hi]` over every ordered pair of domain
    /// points; pairs with `lo > hi` give the empty interval.
    pub fn interval(domain: Arc<FiniteDomain>) -> Self {
        let order = domain.sorted_indices();
        let n = order.len();
        let mut rank = vec![0usize; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let d2 = domain.clone();
        let describe: Describer = Arc::new(move |t| {
            let (lo, hi) = (t / n, t % n);
            format!("[{},{}]", d2.point(order[lo]).id, d2.point(order[hi]).id)
        });
        let eval: Evaluator = Arc::new(move |t, x| {
            let (lo, hi) = (t / n, t % n);
            lo <= rank[x] && rank[x] <= hi
        });
        Self::new("interval", domain, n * n, eval, describe).expect("nonempty")
    }

    /// Explicit `θ × x` label matrix.
    pub fn table(domain: Arc<FiniteDomain>, rows: Vec<Vec<bool>>) -> Result<Self> {
        let n = domain.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "table row {bad} has {} labels for {n} points",
                rows[bad].len()
            )));
        }
        let len = rows.len();
        let rows = Arc::new(rows);
        let eval: Evaluator = Arc::new(move |t, x| rows[t][x]);
        Self::new("table", domain, len, eval, Arc::new(|t| format!("row{t}")))
    }

    pub fn constant(domain: Arc<FiniteDomain>, label: bool) -> Self {
        let eval: Evaluator = Arc::new(move |_, _| label);
        let describe: Describer = Arc::new(move |_| format!("const{}", u8::from(label)));
        Self::new(format!("const{}", u8::from(label)), domain, 1, eval, describe)
            .expect("nonempty")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn domain(&self) -> &Arc<FiniteDomain> {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn eval(&self, theta: usize, x: usize) -> bool {
        debug_assert!(theta < self.len && x < self.domain.len());
        (self.eval)(theta, x)
    }

    pub fn describe(&self, theta: usize) -> String {
        (self.describe)(theta)
    }

    pub fn same_domain(&self, other: &FiniteDomain) -> bool {
        std::ptr::eq(self.domain.as_ref(), other) || *self.domain == *other
    }

    /// Concept `θ` as a label vector over the domain.
    pub fn concept(&self, theta: usize) -> Vec<bool> {
        (0..self.domain.len()).map(|x| self.eval(theta, x)).collect()
    }

    /// Full label table, one row per parameter.
    pub fn materialize(&self) -> Vec<Vec<bool>> {
        (0..self.len).map(|t| self.concept(t)).collect()
    }

    /// The set of distinct concepts (functions), ignoring parameterization.
    pub fn concept_set(&self) -> HashSet<Vec<bool>> {
        (0..self.len).map(|t| self.concept(t)).collect()
    }

    /// Keeps the first parameter of every distinct concept.
    pub fn dedup(&self) -> ParamClass {
        let mut seen = HashSet::new();
        let keep: Vec<usize> = (0..self.len)
            .filter(|&t| seen.insert(self.concept(t)))
            .collect();
        let parent = self.clone();
        let parent_d = self.clone();
        let keep = Arc::new(keep);
        let keep_d = keep.clone();
        let eval: Evaluator = Arc::new(move |t, x| parent.eval(keep[t], x));
        let describe: Describer = Arc::new(move |t| parent_d.describe(keep_d[t]));
        ParamClass::new(
            format!("dedup({})", self.name),
            self.domain.clone(),
            seen.len(),
            eval,
            describe,
        )
        .expect("at least one concept")
    }
}

/// The labeling the learner must match.
#[derive(Clone)]
pub struct Target {
    domain: Arc<FiniteDomain>,
    labeler: Arc<dyn Fn(usize) -> bool + Send + Sync>,
    realizable_ref: Option<usize>,
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Target")
            .field("labels", &self.labels())
            .field("realizable_ref", &self.realizable_ref)
            .finish()
    }
}

impl Target {
    pub fn from_fn(
        domain: Arc<FiniteDomain>,
        labeler: impl Fn(usize) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            domain,
            labeler: Arc::new(labeler),
            realizable_ref: None,
        }
    }

    pub fn constant(domain: Arc<FiniteDomain>, label: bool) -> Self {
        Self::from_fn(domain, move |_| label)
    }

    pub fn table(domain: Arc<FiniteDomain>, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != domain.len() {
            return Err(Error::InvalidArgument(format!(
                "target table has {} labels for {} points",
                labels.len(),
                domain.len()
            )));
        }
        Ok(Self::from_fn(domain, move |x| labels[x]))
    }

    /// The concept `e_θ` itself, recorded as realizable.
    pub fn member(cls: &ParamClass, theta: usize) -> Result<Self> {
        if theta >= cls.len() {
            return Err(Error::InvalidArgument(format!(
                "parameter {theta} out of range for class of size {}",
                cls.len()
            )));
        }
        Ok(Self {
            domain: cls.domain().clone(),
            labeler: {
                let labels = cls.concept(theta);
                Arc::new(move |x| labels[x])
            },
            realizable_ref: Some(theta),
        })
    }

    /// Attaches a realizable reference after checking pointwise agreement.
    pub fn with_realizable_ref(mut self, cls: &ParamClass, theta: usize) -> Result<Self> {
        if theta >= cls.len() || !cls.same_domain(&self.domain) {
            return Err(Error::InvalidArgument("realizable reference out of range".into()));
        }
        if (0..self.domain.len()).any(|x| cls.eval(theta, x) != self.label(x)) {
            return Err(Error::InvalidArgument(format!(
                "target disagrees with parameter {theta}"
            )));
        }
        self.realizable_ref = Some(theta);
        Ok(self)
    }

    #[inline]
    pub fn label(&self, x: usize) -> bool {
        (self.labeler)(x)
    }

    pub fn labels(&self) -> Vec<bool> {
        (0..self.domain.len()).map(|x| self.label(x)).collect()
    }

    pub fn realizable_ref(&self) -> Option<usize> {
        self.realizable_ref
    }

    pub fn domain(&self) -> &Arc<FiniteDomain> {
        &self.domain
    }
}

/// Strictly positive rational threshold `ε`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Epsilon(Rational);

impl Epsilon {
    pub fn new(value: Rational) -> Result<Self> {
        if !value.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "eps must be positive, got {}",
                format_rational(&value)
            )));
        }
        Ok(Self(value))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse_rational(text)?)
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn half(&self) -> Rational {
        &self.0 / Rational::from_integer(BigInt::from(2))
    }
}

impl serde::Serialize for Epsilon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

/// A ghost-gap value `k/m` on the grid `{-m, …, m}/m`; `0` when `m = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GapValue {
    k: i64,
    m: usize,
}

impl GapValue {
    pub fn new(k: i64, m: usize) -> Self {
        assert!(k.unsigned_abs() as usize <= m, "gap numerator {k} outside [-{m}, {m}]");
        Self { k, m }
    }

    pub fn numerator(&self) -> i64 {
        self.k
    }

    pub fn sample_size(&self) -> usize {
        self.m
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.k), BigInt::from(self.m.max(1)))
    }

    /// `self ≥ ε/2`, decided exactly.
    pub fn reaches(&self, eps: &Epsilon) -> bool {
        self.to_rational() >= eps.half()
    }
}

impl Ord for GapValue {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.k as i128 * other.m.max(1) as i128;
        let rhs = other.k as i128 * self.m.max(1) as i128;
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for GapValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GapValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.to_rational()))
    }
}

/// Integer form of `Γ ≥ ε/2` for a fixed sample size: with `Γ = k/m` the
/// test is `k ≥ ⌈ε·m/2⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapThreshold {
    Never,
    AtLeast(i64),
}

impl GapThreshold {
    pub fn new(eps: &Epsilon, m: usize) -> Self {
        if m == 0 {
            // gap is 0 and eps > 0
            return GapThreshold::Never;
        }
        let scaled = eps.half() * Rational::from_integer(BigInt::from(m));
        let k_min = scaled.ceil().to_integer();
        match k_min.to_i64() {
            Some(k) if k <= m as i64 => GapThreshold::AtLeast(k),
            _ => GapThreshold::Never,
        }
    }

    #[inline]
    pub fn admits(&self, k: i64) -> bool {
        match *self {
            GapThreshold::Never => false,
            GapThreshold::AtLeast(min) => k >= min,
        }
    }
}

fn mistakes(cls: &ParamClass, theta: usize, c: &Target, sample: &Sample) -> usize {
    sample
        .points
        .iter()
        .filter(|&&x| cls.eval(theta, x) != c.label(x))
        .count()
}

/// `(1/m)·#{i : e_θ(x_i) ≠ c(x_i)}`, and `0` on the empty sample.
pub fn empirical_error(cls: &ParamClass, theta: usize, c: &Target, sample: &Sample) -> Rational {
    if sample.is_empty() {
        return Rational::zero();
    }
    Rational::new(
        BigInt::from(mistakes(cls, theta, c, sample)),
        BigInt::from(sample.len()),
    )
}

/// `L̂_T(e_θ,c) − L̂_S(e_θ,c)`.
pub fn ghost_gap(cls: &ParamClass, theta: usize, c: &Target, p: &SamplePair) -> GapValue {
    let k = mistakes(cls, theta, c, p.ghost()) as i64 - mistakes(cls, theta, c, p.train()) as i64;
    GapValue::new(k, p.len())
}

/// Membership of `(θ, p)` in the witness set `{Γ_θ(p) ≥ ε/2}`.
pub fn witness_contains(
    cls: &ParamClass,
    theta: usize,
    c: &Target,
    eps: &Epsilon,
    p: &SamplePair,
) -> bool {
    ghost_gap(cls, theta, c, p).reaches(eps)
}

/// Bad-event membership by a short-circuiting scan over the parameters.
pub fn bad_event_contains(cls: &ParamClass, c: &Target, eps: &Epsilon, p: &SamplePair) -> bool {
    let threshold = GapThreshold::new(eps, p.len());
    if threshold == GapThreshold::Never {
        return false;
    }
    (0..cls.len()).any(|t| {
        let k = mistakes(cls, t, c, p.ghost()) as i64 - mistakes(cls, t, c, p.train()) as i64;
        threshold.admits(k)
    })
}

/// Maximum ghost gap over the parameter list (always attained).
pub fn sup_gap(cls: &ParamClass, c: &Target, p: &SamplePair) -> GapValue {
    (0..cls.len())
        .map(|t| ghost_gap(cls, t, c, p))
        .max()
        .expect("classes are nonempty")
}

/// The witness set restricted to an enumerated pair space: every `(θ, p)`
/// with `Γ_θ(p) ≥ ε/2`.
pub fn witness_set(
    cls: &ParamClass,
    c: &Target,
    eps: &Epsilon,
    space: &PairSpace,
) -> Vec<(usize, SamplePair)> {
    let mut out = Vec::new();
    for (p, _) in space.iter() {
        for t in 0..cls.len() {
            if witness_contains(cls, t, c, eps, &p) {
                out.push((t, p.clone()));
            }
        }
    }
    out
}

/// Projection `(θ, p) ↦ p` of a witness set.
pub fn project_witnesses(witnesses: &[(usize, SamplePair)]) -> HashSet<SamplePair> {
    witnesses.iter().map(|(_, p)| p.clone()).collect()
}

/// Precomputed error table for repeated bad-event queries.
///
/// Rows are `1[e_θ(x) ≠ c(x)]` over the domain, deduplicated: distinct
/// parameters with the same error row have identical gaps everywhere.
#[derive(Debug, Clone)]
pub struct GapScanner {
    n: usize,
    rows: Vec<u8>,
    row_count: usize,
}

impl GapScanner {
    pub fn new(cls: &ParamClass, c: &Target) -> Self {
        let n = cls.domain().len();
        let target = c.labels();
        let mut index: HashMap<Vec<u8>, ()> = HashMap::new();
        let mut rows = Vec::new();
        for t in 0..cls.len() {
            let row: Vec<u8> = (0..n).map(|x| u8::from(cls.eval(t, x) != target[x])).collect();
            if index.insert(row.clone(), ()).is_none() {
                rows.extend_from_slice(&row);
            }
        }
        Self {
            n,
            row_count: index.len(),
            rows,
        }
    }

    pub fn distinct_rows(&self) -> usize {
        self.row_count
    }

    #[inline]
    fn gap_numerator(&self, row: &[u8], train: &[usize], ghost: &[usize]) -> i64 {
        let g: i64 = ghost.iter().map(|&x| row[x] as i64).sum();
        let s: i64 = train.iter().map(|&x| row[x] as i64).sum();
        g - s
    }

    #[inline]
    pub fn bad(&self, threshold: GapThreshold, train: &[usize], ghost: &[usize]) -> bool {
        if threshold == GapThreshold::Never {
            return false;
        }
        self.rows
            .chunks_exact(self.n)
            .any(|row| threshold.admits(self.gap_numerator(row, train, ghost)))
    }

    pub fn sup_gap(&self, train: &[usize], ghost: &[usize]) -> GapValue {
        let k = self
            .rows
            .chunks_exact(self.n)
            .map(|row| self.gap_numerator(row, train, ghost))
            .max()
            .expect("classes are nonempty");
        GapValue::new(k, train.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{enumerate_pairs, FiniteMeasure, DEFAULT_ENUMERATION_CAP};
    use crate::rational::ratio;

    fn domain(n: usize) -> Arc<FiniteDomain> {
        Arc::new(FiniteDomain::with_size(n).unwrap())
    }

    fn pair(s: &[usize], t: &[usize]) -> SamplePair {
        SamplePair::from_indices(s, t).unwrap()
    }

    fn eps(s: &str) -> Epsilon {
        Epsilon::parse(s).unwrap()
    }

    fn singleton(d: &Arc<FiniteDomain>, a: usize) -> ParamClass {
        let mut rows = vec![vec![false; d.len()]; 2];
        rows[1][a] = true;
        ParamClass::table(d.clone(), rows).unwrap()
    }

    #[test]
    fn realizable_target_has_zero_error() {
        let d = domain(5);
        let cls = ParamClass::threshold(d.clone());
        let c = Target::member(&cls, 2).unwrap();
        let s = Sample::new(vec![0, 1, 2, 3, 4, 4]);
        assert!(empirical_error(&cls, 2, &c, &s).is_zero());
    }

    #[test]
    fn one_mismatch_in_four() {
        let d = domain(4);
        let cls = singleton(&d, 1);
        let c = Target::constant(d, false);
        let s = Sample::new(vec![0, 1, 2, 3]);
        assert_eq!(empirical_error(&cls, 1, &c, &s), ratio(1, 4));
    }

    #[test]
    fn empty_sample_error_is_zero() {
        let d = domain(2);
        let cls = ParamClass::constant(d.clone(), true);
        let c = Target::constant(d, false);
        assert!(empirical_error(&cls, 0, &c, &Sample::default()).is_zero());
    }

    #[test]
    fn gap_of_identical_samples_is_zero() {
        let d = domain(3);
        let cls = ParamClass::interval(d.clone());
        let c = Target::constant(d, false);
        let p = pair(&[0, 2], &[0, 2]);
        for t in 0..cls.len() {
            assert_eq!(ghost_gap(&cls, t, &c, &p).numerator(), 0);
        }
    }

    #[test]
    fn singleton_gap_is_one_off_the_point() {
        let d = domain(3);
        let cls = singleton(&d, 2);
        let c = Target::constant(d, false);
        assert_eq!(ghost_gap(&cls, 1, &c, &pair(&[0], &[2])).to_rational(), ratio(1, 1));
    }

    #[test]
    fn two_point_gap_half() {
        // ghost errors {1,1}, train errors {1,0}
        let d = domain(3);
        let cls = ParamClass::table(d.clone(), vec![vec![true, false, true]]).unwrap();
        let c = Target::constant(d, false);
        let p = pair(&[0, 1], &[2, 0]);
        let direct = empirical_error(&cls, 0, &c, p.ghost()) - empirical_error(&cls, 0, &c, p.train());
        assert_eq!(direct, ratio(1, 2));
        assert_eq!(ghost_gap(&cls, 0, &c, &p).to_rational(), ratio(1, 2));
    }

    #[test]
    fn witness_threshold_is_closed() {
        let d = domain(4);
        let cls = singleton(&d, 3);
        let c = Target::constant(d, false);
        assert!(witness_contains(&cls, 1, &c, &eps("1"), &pair(&[0], &[3])));
        // gap 1/2 at eps 1: boundary, included
        assert!(witness_contains(&cls, 1, &c, &eps("1"), &pair(&[0, 1], &[3, 1])));
        // gap 1/4 at eps 1: below
        assert!(!witness_contains(&cls, 1, &c, &eps("1"), &pair(&[0, 1, 2, 2], &[3, 1, 2, 2])));
        // gap 1/4 at eps 1/2: boundary
        assert!(witness_contains(&cls, 1, &c, &eps("1/2"), &pair(&[0, 1, 2, 2], &[3, 1, 2, 2])));
    }

    #[test]
    fn target_only_class_has_empty_bad_event() {
        let d = domain(3);
        let c = Target::table(d.clone(), vec![true, false, true]).unwrap();
        let cls = ParamClass::table(d.clone(), vec![c.labels()]).unwrap();
        let mu = FiniteMeasure::uniform(d);
        let space = enumerate_pairs(&mu, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        for (p, _) in space.iter() {
            assert!(!bad_event_contains(&cls, &c, &eps("1/100"), &p));
        }
    }

    #[test]
    fn witness_class_characterization_at_m1() {
        let d = domain(5);
        let support = [1usize, 3];
        let mut rows = vec![vec![false; 5]];
        for &a in &support {
            let mut r = vec![false; 5];
            r[a] = true;
            rows.push(r);
        }
        let cls = ParamClass::table(d.clone(), rows).unwrap();
        let c = Target::constant(d, false);
        for x in 0..5 {
            for y in 0..5 {
                let expected = support.contains(&y) && x != y;
                assert_eq!(bad_event_contains(&cls, &c, &eps("1"), &pair(&[x], &[y])), expected);
            }
        }
    }

    #[test]
    fn eps_above_two_is_never_bad() {
        // brute force: every gap on a 3-point domain lies in [-1, 1]
        let d = domain(3);
        let cls = ParamClass::table(
            d.clone(),
            (0..8u8).map(|b| (0..3).map(|i| b >> i & 1 == 1).collect()).collect(),
        )
        .unwrap();
        let c = Target::table(d.clone(), vec![false, true, false]).unwrap();
        let mu = FiniteMeasure::uniform(d);
        let space = enumerate_pairs(&mu, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        for (p, _) in space.iter() {
            for t in 0..cls.len() {
                let g = ghost_gap(&cls, t, &c, &p).to_rational();
                assert!(g >= ratio(0, 1) - ratio(1, 1) && g <= ratio(1, 1));
            }
            assert!(!bad_event_contains(&cls, &c, &eps("201/100"), &p));
            assert!(!bad_event_contains(&cls, &c, &eps("3"), &p));
        }
    }

    #[test]
    fn sup_gap_examples() {
        let d = domain(3);
        let cls = singleton(&d, 0);
        let c = Target::constant(d.clone(), false);
        assert_eq!(sup_gap(&cls, &c, &pair(&[0], &[0])).numerator(), 0);
        let one = ParamClass::table(d.clone(), vec![vec![true, false, true]]).unwrap();
        let p = pair(&[0, 1], &[2, 2]);
        assert_eq!(sup_gap(&one, &c, &p), ghost_gap(&one, 0, &c, &p));
    }

    #[test]
    fn sup_gap_superlevel_matches_bad_event() {
        let d = domain(3);
        let cls = ParamClass::interval(d.clone());
        let c = Target::table(d.clone(), vec![false, true, false]).unwrap();
        let mu = FiniteMeasure::uniform(d);
        let space = enumerate_pairs(&mu, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        for e in ["1/4", "1/2", "1", "3/2", "2"] {
            let e = eps(e);
            for (p, _) in space.iter() {
                assert_eq!(sup_gap(&cls, &c, &p).reaches(&e), bad_event_contains(&cls, &c, &e, &p));
            }
        }
    }

    #[test]
    fn projection_matches_scan() {
        let d = domain(3);
        let cls = ParamClass::threshold(d.clone());
        let c = Target::table(d.clone(), vec![true, false, true]).unwrap();
        let mu = FiniteMeasure::uniform(d);
        let space = enumerate_pairs(&mu, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        let e = eps("1/2");
        let projected = project_witnesses(&witness_set(&cls, &c, &e, &space));
        for (p, _) in space.iter() {
            assert_eq!(projected.contains(&p), bad_event_contains(&cls, &c, &e, &p));
        }
    }

    #[test]
    fn scanner_agrees_with_direct_scan() {
        let d = domain(4);
        let cls = ParamClass::interval(d.clone());
        let c = Target::table(d.clone(), vec![true, false, false, true]).unwrap();
        let mu = FiniteMeasure::uniform(d);
        let space = enumerate_pairs(&mu, 2, DEFAULT_ENUMERATION_CAP).unwrap();
        let scanner = GapScanner::new(&cls, &c);
        assert!(scanner.distinct_rows() <= 11);
        for e in ["1/3", "1", "2"] {
            let e = eps(e);
            let th = GapThreshold::new(&e, 2);
            for (p, _) in space.iter() {
                let (s, t) = (&p.train().points, &p.ghost().points);
                assert_eq!(scanner.bad(th, s, t), bad_event_contains(&cls, &c, &e, &p));
                assert_eq!(scanner.sup_gap(s, t), sup_gap(&cls, &c, &p));
            }
        }
    }

    #[test]
    fn threshold_integerization() {
        assert_eq!(GapThreshold::new(&eps("1"), 1), GapThreshold::AtLeast(1));
        assert_eq!(GapThreshold::new(&eps("1"), 2), GapThreshold::AtLeast(1));
        assert_eq!(GapThreshold::new(&eps("1/4"), 2), GapThreshold::AtLeast(1));
        assert_eq!(GapThreshold::new(&eps("2"), 2), GapThreshold::AtLeast(2));
        assert_eq!(GapThreshold::new(&eps("3"), 2), GapThreshold::Never);
        assert_eq!(GapThreshold::new(&eps("1"), 0), GapThreshold::Never);
    }

    #[test]
    fn eps_must_be_positive() {
        assert!(Epsilon::parse("0").is_err());
        assert!(Epsilon::parse("-1/2").is_err());
        assert_eq!(eps("2/4").to_string(), "1/2");
    }

    #[test]
    fn realizable_ref_is_checked() {
        let d = domain(3);
        let cls = ParamClass::threshold(d.clone());
        let ok = Target::table(d.clone(), vec![false, true, true]).unwrap();
        assert!(ok.with_realizable_ref(&cls, 1).is_ok());
        let bad = Target::table(d, vec![true, true, false]).unwrap();
        assert!(bad.with_realizable_ref(&cls, 1).is_err());
    }

    #[test]
    fn families_have_expected_sizes() {
        let d = Arc::new(FiniteDomain::grid(&ratio(0, 1), &ratio(1, 1), 4).unwrap());
        let th = ParamClass::threshold(d.clone());
        assert_eq!(th.len(), 5);
        assert_eq!(th.concept(0), vec![true; 4]);
        assert_eq!(th.concept(4), vec![false; 4]);
        assert_eq!(th.concept(2), vec![false, false, true, true]);
        let iv = ParamClass::interval(d);
        assert_eq!(iv.len(), 16);
        // 10 nonempty intervals plus the empty one
        assert_eq!(iv.concept_set().len(), 11);
        assert_eq!(iv.dedup().len(), 11);
    }
}
