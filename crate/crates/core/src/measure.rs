//! Finite domains, exact rational probability measures, seeded IID sampling
//! and exhaustive enumeration of the double-sample space `X^m × X^m`.
//!
//! Samples refer to points by their *index* in the owning [`FiniteDomain`],
//! not by their user-facing id.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Default bound on `|X|^(2m)` for exhaustive pair enumeration.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

const CHUNK: u128 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainPoint {
    pub id: u64,
    pub coord: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDomain {
    points: Vec<DomainPoint>,
}

impl FiniteDomain {
    /// Validates: nonempty, unique ids, and either no coordinates or
    /// coordinates on every point that increase strictly with the id.
    pub fn new(points: Vec<DomainPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidDomain("domain must be nonempty".into()));
        }
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if !seen.insert(p.id) {
                return Err(Error::InvalidDomain(format!("duplicate point id {}", p.id)));
            }
        }
        let with_coord = points.iter().filter(|p| p.coord.is_some()).count();
        if with_coord != 0 && with_coord != points.len() {
            return Err(Error::InvalidDomain(
                "coordinates must be given for all points or for none".into(),
            ));
        }
        if with_coord > 0 {
            let mut by_id: Vec<&DomainPoint> = points.iter().collect();
            by_id.sort_by_key(|p| p.id);
            if by_id.windows(2).any(|w| w[0].coord >= w[1].coord) {
                return Err(Error::InvalidDomain(
                    "coordinates must increase strictly with point id".into(),
                ));
            }
        }
        Ok(Self { points })
    }

    /// `n` points with ids `0..n` and no coordinates.
    pub fn with_size(n: usize) -> Result<Self> {
        Self::new(
            (0..n as u64)
                .map(|id| DomainPoint { id, coord: None })
                .collect(),
        )
    }

    /// `n` evenly spaced rational coordinates from `lo` to `hi` inclusive.
    pub fn grid(lo: &Rational, hi: &Rational, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDomain("grid needs n >= 1".into()));
        }
        if n > 1 && lo >= hi {
            return Err(Error::InvalidDomain("grid needs lo < hi".into()));
        }
        let step = if n > 1 {
            (hi - lo) / Rational::from_integer(BigInt::from(n - 1))
        } else {
            Rational::zero()
        };
        let points = (0..n)
            .map(|i| DomainPoint {
                id: i as u64,
                coord: Some(lo + &step * Rational::from_integer(BigInt::from(i))),
            })
            .collect();
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DomainPoint] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &DomainPoint {
        &self.points[index]
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.points.iter().position(|p| p.id == id)
    }

    /// Ordering key used by threshold and interval families: the coordinate
    /// when present, the id otherwise.
    pub fn order_key(&self, index: usize) -> Rational {
        let p = &self.points[index];
        p.coord
            .clone()
            .unwrap_or_else(|| Rational::from_integer(BigInt::from(p.id)))
    }

    /// Point indices sorted by [`order_key`](Self::order_key).
    pub fn sorted_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by_key(|&i| self.order_key(i));
        idx
    }
}

/// Probability measure on a finite domain with exact rational weights.
///
/// Weights are additionally kept as integer numerators over a common
/// denominator so that sampling and enumeration never touch floats.
#[derive(Debug, Clone)]
pub struct FiniteMeasure {
    domain: Arc<FiniteDomain>,
    weights: Vec<Rational>,
    numerators: Vec<u64>,
    denominator: u64,
    cumulative: Vec<u64>,
}

impl FiniteMeasure {
    pub fn new(domain: Arc<FiniteDomain>, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != domain.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} weights for {} points",
                weights.len(),
                domain.len()
            )));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidMeasure("negative weight".into()));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {}/{}, not 1",
                total.numer(),
                total.denom()
            )));
        }
        let lcm = weights
            .iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let denominator = lcm.to_u64().ok_or_else(|| {
            Error::InvalidMeasure("common denominator does not fit in 64 bits".into())
        })?;
        let numerators: Vec<u64> = weights
            .iter()
            .map(|w| (w.numer() * (&lcm / w.denom())).to_u64().expect("numerator <= denominator"))
            .collect();
        let cumulative = numerators
            .iter()
            .scan(0u64, |acc, &n| {
                *acc += n;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            domain,
            weights,
            numerators,
            denominator,
            cumulative,
        })
    }

    pub fn uniform(domain: Arc<FiniteDomain>) -> Self {
        let n = domain.len() as u64;
        let w = crate::rational::ratio(1, n);
        Self::new(domain, vec![w; n as usize]).expect("uniform weights are valid")
    }

    pub fn point_mass(domain: Arc<FiniteDomain>, index: usize) -> Result<Self> {
        if index >= domain.len() {
            return Err(Error::InvalidArgument(format!("point index {index} out of range")));
        }
        let weights = (0..domain.len())
            .map(|i| if i == index { Rational::one() } else { Rational::zero() })
            .collect();
        Self::new(domain, weights)
    }

    pub fn domain(&self) -> &Arc<FiniteDomain> {
        &self.domain
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> &Rational {
        &self.weights[index]
    }

    pub fn numerators(&self) -> &[u64] {
        &self.numerators
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    /// One draw, exact in the weights: a uniform integer below the common
    /// denominator is located in the cumulative numerator table.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random_range(0..self.denominator);
        self.cumulative.partition_point(|&c| c <= u)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Sample {
    pub points: Vec<usize>,
}

impl Sample {
    pub fn new(points: Vec<usize>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Training sample `S` and ghost sample `T` of equal length.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SamplePair {
    train: Sample,
    ghost: Sample,
}

impl SamplePair {
    pub fn new(train: Sample, ghost: Sample) -> Result<Self> {
        if train.len() != ghost.len() {
            return Err(Error::InvalidArgument(format!(
                "train length {} differs from ghost length {}",
                train.len(),
                ghost.len()
            )));
        }
        Ok(Self { train, ghost })
    }

    pub fn from_indices(train: &[usize], ghost: &[usize]) -> Result<Self> {
        Self::new(Sample::new(train.to_vec()), Sample::new(ghost.to_vec()))
    }

    pub fn train(&self) -> &Sample {
        &self.train
    }

    pub fn ghost(&self) -> &Sample {
        &self.ghost
    }

    /// Sample size `m`.
    pub fn len(&self) -> usize {
        self.train.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train.is_empty()
    }

    /// Exchanges `S_i` and `T_i` at every position where `mask[i]` is set.
    pub fn swapped(&self, mask: &[bool]) -> Self {
        let mut out = self.clone();
        for (i, &flip) in mask.iter().enumerate().take(self.len()) {
            if flip {
                std::mem::swap(&mut out.train.points[i], &mut out.ghost.points[i]);
            }
        }
        out
    }

    /// `(T, S)`.
    pub fn reversed(&self) -> Self {
        Self {
            train: self.ghost.clone(),
            ghost: self.train.clone(),
        }
    }
}

/// Stream for Monte Carlo trial `trial` under master seed `seed`. Streams
/// depend only on `(seed, trial)` so results do not depend on scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws `m` independent points from `mu`.
pub fn sample_iid<R: Rng + ?Sized>(mu: &FiniteMeasure, m: usize, rng: &mut R) -> Sample {
    Sample::new((0..m).map(|_| mu.draw(rng)).collect())
}

/// Draws a training sample followed by a ghost sample, both of size `m`.
pub fn sample_pair_iid<R: Rng + ?Sized>(mu: &FiniteMeasure, m: usize, rng: &mut R) -> SamplePair {
    let train = sample_iid(mu, m, rng);
    let ghost = sample_iid(mu, m, rng);
    SamplePair { train, ghost }
}

/// The full product space `X^m × X^m` under `μ^{2m}`.
#[derive(Debug, Clone)]
pub struct PairSpace {
    mu: FiniteMeasure,
    m: usize,
    total: u128,
}

/// Validates the cap and returns the enumerable product space.
pub fn enumerate_pairs(mu: &FiniteMeasure, m: usize, cap: u128) -> Result<PairSpace> {
    let n = mu.domain().len() as u128;
    let needed = u32::try_from(2 * m)
        .ok()
        .and_then(|e| n.checked_pow(e))
        .unwrap_or(u128::MAX);
    if needed > cap {
        return Err(Error::CapExceeded { needed, cap });
    }
    Ok(PairSpace {
        mu: mu.clone(),
        m,
        total: needed,
    })
}

impl PairSpace {
    pub fn sample_size(&self) -> usize {
        self.m
    }

    /// Number of pairs, `|X|^(2m)`.
    pub fn len(&self) -> u128 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn measure(&self) -> &FiniteMeasure {
        &self.mu
    }

    /// Every pair exactly once, in lexicographic order, with its exact
    /// product weight.
    pub fn iter(&self) -> impl Iterator<Item = (SamplePair, Rational)> + '_ {
        let m = self.m;
        TupleIter::new(self.mu.domain().len(), 2 * m, 0, self.total).map(move |t| {
            let weight = t
                .iter()
                .map(|&i| self.mu.weight(i))
                .fold(Rational::one(), |acc, w| acc * w);
            let pair = SamplePair::from_indices(&t[..m], &t[m..]).expect("equal halves");
            (pair, weight)
        })
    }

    /// Exact `μ^{2m}` mass of the pairs satisfying `pred(train, ghost)`.
    ///
    /// The index range is split into fixed chunks summed in parallel with
    /// integer numerators; integer addition is associative, so the result
    /// does not depend on the thread count.
    pub fn mass_where<F>(&self, pred: F) -> Rational
    where
        F: Fn(&[usize], &[usize]) -> bool + Sync,
    {
        let n = self.mu.domain().len();
        let m = self.m;
        let nums = self.mu.numerators();
        let den = BigUint::from(self.mu.denominator()).pow(2 * m as u32);
        let chunks = self.total.div_ceil(CHUNK);
        let fits = den <= BigUint::from(u128::MAX);

        let numerator: BigUint = if fits {
            let sum: u128 = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let lo = c * CHUNK;
                    let hi = (lo + CHUNK).min(self.total);
                    let mut acc = 0u128;
                    for t in TupleIter::new(n, 2 * m, lo, hi) {
                        if pred(&t[..m], &t[m..]) {
                            acc += t.iter().map(|&i| nums[i] as u128).product::<u128>();
                        }
                    }
                    acc
                })
                .sum();
            BigUint::from(sum)
        } else {
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let lo = c * CHUNK;
                    let hi = (lo + CHUNK).min(self.total);
                    let mut acc = BigUint::zero();
                    for t in TupleIter::new(n, 2 * m, lo, hi) {
                        if pred(&t[..m], &t[m..]) {
                            acc += t
                                .iter()
                                .map(|&i| BigUint::from(nums[i]))
                                .product::<BigUint>();
                        }
                    }
                    acc
                })
                .sum()
        };
        Rational::new(BigInt::from(numerator), BigInt::from(den))
    }
}

/// Odometer over `len`-tuples of `0..base`, restricted to the rank range
/// `[lo, hi)` in lexicographic order.
struct TupleIter {
    base: usize,
    digits: Vec<usize>,
    remaining: u128,
    started: bool,
}

impl TupleIter {
    fn new(base: usize, len: usize, lo: u128, hi: u128) -> Self {
        let mut digits = vec![0; len];
        let mut rank = lo;
        for d in digits.iter_mut().rev() {
            *d = (rank % base as u128) as usize;
            rank /= base as u128;
        }
        Self {
            base,
            digits,
            remaining: hi.saturating_sub(lo),
            started: false,
        }
    }
}

impl Iterator for TupleIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.remaining == 0 {
            return None;
        }
        if self.started {
            for d in self.digits.iter_mut().rev() {
                *d += 1;
                if *d < self.base {
                    break;
                }
                *d = 0;
            }
        }
        self.started = true;
        self.remaining -= 1;
        Some(self.digits.clone())
    }
}
