//! Brute-force oracles and instance generators shared by the integration
//! tests. Oracles work on plain label tables and rationals and never call
//! the library's scanning or enumeration code.

#![allow(dead_code)]

use std::collections::HashSet;
use std::sync::Arc;

use ghostgap::concept::{ParamClass, Target};
use ghostgap::measure::{FiniteDomain, FiniteMeasure};
use ghostgap::Rational;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Table = Vec<Vec<bool>>;

pub fn r(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn domain(n: usize) -> Arc<FiniteDomain> {
    Arc::new(FiniteDomain::with_size(n).unwrap())
}

/// A small random instance: label table, target labels and measure weights.
#[derive(Debug, Clone)]
pub struct Instance {
    pub n: usize,
    pub rows: Table,
    pub target: Vec<bool>,
    pub weights: Vec<Rational>,
}

impl Instance {
    pub fn random(rng: &mut ChaCha8Rng, max_n: usize, max_params: usize) -> Self {
        let n = rng.random_range(1..=max_n);
        let k = rng.random_range(1..=max_params);
        let rows = (0..k)
            .map(|_| (0..n).map(|_| rng.random_bool(0.5)).collect())
            .collect();
        let target = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let raw: Vec<i64> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let total: i64 = raw.iter().sum();
        let weights = if total == 0 {
            vec![r(1, n as i64); n]
        } else {
            raw.iter().map(|&w| r(w, total)).collect()
        };
        Self {
            n,
            rows,
            target,
            weights,
        }
    }

    pub fn seeded(seed: u64, max_n: usize, max_params: usize) -> Self {
        Self::random(&mut ChaCha8Rng::seed_from_u64(seed), max_n, max_params)
    }

    pub fn build(&self) -> (ParamClass, Target, FiniteMeasure) {
        let d = domain(self.n);
        let cls = ParamClass::table(d.clone(), self.rows.clone()).unwrap();
        let c = Target::table(d.clone(), self.target.clone()).unwrap();
        let mu = FiniteMeasure::new(d, self.weights.clone()).unwrap();
        (cls, c, mu)
    }
}

/// `(ghost mistakes − train mistakes) / m ≥ eps / 2` for some row, with
/// the gap taken as 0 on empty samples.
pub fn oracle_bad(rows: &Table, target: &[bool], train: &[usize], ghost: &[usize], eps: &Rational) -> bool {
    let m = train.len();
    rows.iter().any(|row| {
        let err = |s: &[usize]| s.iter().filter(|&&x| row[x] != target[x]).count() as i64;
        let gap = if m == 0 {
            Rational::zero()
        } else {
            r(err(ghost) - err(train), m as i64)
        };
        gap * Rational::from_integer(2.into()) >= *eps
    })
}

/// Every `2m`-tuple over `0..n` in lexicographic order.
pub fn all_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// `Σ_p μ^{2m}(p) · 1[pred(S, T)]` by explicit product weights.
pub fn oracle_mass(weights: &[Rational], m: usize, pred: impl Fn(&[usize], &[usize]) -> bool) -> Rational {
    let mut total = Rational::zero();
    for t in all_tuples(weights.len(), 2 * m) {
        let (s, g) = t.split_at(m);
        if pred(s, g) {
            total += t.iter().fold(Rational::one(), |acc, &x| acc * &weights[x]);
        }
    }
    total
}

pub fn oracle_prob(inst: &Instance, m: usize, eps: &Rational) -> Rational {
    oracle_mass(&inst.weights, m, |s, g| oracle_bad(&inst.rows, &inst.target, s, g, eps))
}

fn restrict(row: &[bool], mask: u32, n: usize) -> Vec<bool> {
    (0..n).filter(|&x| mask >> x & 1 == 1).map(|x| row[x]).collect()
}

/// Largest shattered subset, by checking every subset of the domain.
pub fn oracle_vc(rows: &Table, n: usize) -> usize {
    let mut best = 0;
    for mask in 0u32..1 << n {
        let k = mask.count_ones() as usize;
        if k <= best {
            continue;
        }
        let labels: HashSet<Vec<bool>> = rows.iter().map(|row| restrict(row, mask, n)).collect();
        if labels.len() == 1 << k {
            best = k;
        }
    }
    best
}

/// Maximum number of distinct restrictions to an `m`-subset.
pub fn oracle_growth(rows: &Table, n: usize, m: usize) -> usize {
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == m)
        .map(|mask| {
            rows.iter()
                .map(|row| restrict(row, mask, n))
                .collect::<HashSet<_>>()
                .len()
        })
        .max()
        .unwrap_or(1)
}

/// `Σ_{i ≤ d} C(m, i)` with plain integer arithmetic.
pub fn oracle_sauer(d: usize, m: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for i in 0..=d.min(m) {
        total += binom;
        binom = binom * (m - i) as u128 / (i + 1) as u128;
    }
    total
}

/// `{(i, j) : pi1[i] = pi2[j]}` by a double loop.
pub fn oracle_fiber<T: PartialEq>(pi1: &[T], pi2: &[T]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, a) in pi1.iter().enumerate() {
        for (j, b) in pi2.iter().enumerate() {
            if a == b {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn threshold_rows(n: usize) -> Table {
    (0..=n).map(|t| (0..n).map(|x| x >= t).collect()).collect()
}

pub fn interval_rows(n: usize) -> Table {
    let mut rows = Vec::new();
    for lo in 0..n {
        for hi in 0..n {
            rows.push((0..n).map(|x| lo <= x && x <= hi).collect());
        }
    }
    rows
}

pub fn singleton_rows(n: usize, support: &[usize]) -> Table {
    let mut pts = support.to_vec();
    pts.sort_unstable();
    pts.dedup();
    let mut rows = vec![vec![false; n]];
    rows.extend(pts.iter().map(|&a| (0..n).map(|x| x == a).collect()));
    rows
}

pub fn materialize(cls: &ParamClass) -> Table {
    let n = cls.domain().len();
    (0..cls.len()).map(|t| (0..n).map(|x| cls.eval(t, x)).collect()).collect()
}
