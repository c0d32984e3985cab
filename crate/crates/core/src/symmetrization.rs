//! Bad-event probabilities under `μ^{2m}`, exchangeability under coordinate
//! swaps, the VC symmetrization bound and realizable PAC sample sizes.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::combinatorics::{sample_growth, Budget};
use crate::concept::{bad_event_contains, Epsilon, GapScanner, GapThreshold, ParamClass, Target};
use crate::constructors::singleton_witness_class;
use crate::error::{Error, Result};
use crate::measure::{
    enumerate_pairs, sample_pair_iid, trial_rng, FiniteDomain, FiniteMeasure, SamplePair,
    DEFAULT_ENUMERATION_CAP,
};
use crate::rational::{format_rational, to_f64_down, to_f64_up, Rational};

/// Constants of the bound `factor · Π(2m) · exp(−m·ε²/exponent_divisor)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConvention {
    pub factor: f64,
    pub exponent_divisor: f64,
}

/// `Π(2m)·exp(−m·ε²/8)`: union over the dichotomies of the double sample
/// of a Hoeffding bound for the random-swap gap.
pub const STANDARD_BOUND: BoundConvention = BoundConvention {
    factor: 1.0,
    exponent_divisor: 8.0,
};

/// Caps and constants shared by the probability routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabSettings {
    pub enumeration_cap: u128,
    pub budget: Budget,
    /// Failure probability of the Hoeffding confidence interval.
    pub ci_delta: f64,
    pub bound: BoundConvention,
}

impl Default for LabSettings {
    fn default() -> Self {
        Self {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            budget: Budget::default(),
            ci_delta: 1e-3,
            bound: STANDARD_BOUND,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimateMode {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
}

/// Exact rationals serialize as `"p/q"`, estimates as plain numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum Probability {
    Exact(Rational),
    Estimate(f64),
}

impl Probability {
    pub fn as_f64(&self) -> f64 {
        match self {
            Probability::Exact(r) => crate::rational::to_f64_up(r),
            Probability::Estimate(p) => *p,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Probability::Exact(r) => Some(r),
            Probability::Estimate(_) => None,
        }
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Probability::Exact(r) => s.serialize_str(&format_rational(r)),
            Probability::Estimate(p) => s.serialize_f64(*p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub mode: EstimateMode,
    pub m: usize,
    pub eps: Epsilon,
    pub probability: Probability,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hits: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `Π(2m)` used for the bound; absent when it could not be computed
    /// within budget or when `m = 0`.
    pub growth_2m: Option<u64>,
    pub bound: Option<f64>,
    pub bound_satisfied: Option<bool>,
}

/// `Π(2m) · exp(−m·ε²/8)` under [`STANDARD_BOUND`].
pub fn symmetrization_bound(growth_2m: u64, m: usize, eps: &Epsilon) -> f64 {
    symmetrization_bound_with(&STANDARD_BOUND, growth_2m, m, eps)
}

pub fn symmetrization_bound_with(
    conv: &BoundConvention,
    growth_2m: u64,
    m: usize,
    eps: &Epsilon,
) -> f64 {
    let e = to_f64_down(eps.value());
    conv.factor * growth_2m as f64 * (-(m as f64) * e * e / conv.exponent_divisor).exp()
}

/// `bound ≥ probability` with the probability rounded up and the bound
/// stepped down two ulps, so float error cannot hide a violation.
pub fn bound_dominates(bound: f64, probability: &Rational) -> bool {
    bound.next_down().next_down() >= to_f64_up(probability)
}

/// Hoeffding radius `sqrt(ln(2/δ) / (2·trials))`.
pub fn hoeffding_radius(trials: u64, ci_delta: f64) -> f64 {
    ((2.0 / ci_delta).ln() / (2.0 * trials as f64)).sqrt()
}

/// Exact `μ^{2m}` mass of the bad event, summing `weight(p)·1[p ∈ E]` over
/// the enumerated pair space.
pub fn exact_probability(
    cls: &ParamClass,
    c: &Target,
    mu: &FiniteMeasure,
    m: usize,
    eps: &Epsilon,
    cap: u128,
) -> Result<Rational> {
    check_domains(cls, c, mu)?;
    let space = enumerate_pairs(mu, m, cap)?;
    let scanner = GapScanner::new(cls, c);
    let threshold = GapThreshold::new(eps, m);
    Ok(space.mass_where(|s, t| scanner.bad(threshold, s, t)))
}

fn check_domains(cls: &ParamClass, c: &Target, mu: &FiniteMeasure) -> Result<()> {
    if !cls.same_domain(mu.domain()) || !cls.same_domain(c.domain()) {
        return Err(Error::DomainMismatch);
    }
    Ok(())
}

fn attach_bound(
    report: &mut EstimateReport,
    cls: &ParamClass,
    settings: &LabSettings,
) -> Result<()> {
    if report.m == 0 {
        return Ok(());
    }
    let growth = match sample_growth(cls, 2 * report.m, &settings.budget) {
        Ok(g) => g,
        Err(Error::BudgetExceeded { .. } | Error::CapExceeded { .. }) => return Ok(()),
        Err(e) => return Err(e),
    };
    let bound = symmetrization_bound_with(&settings.bound, growth, report.m, &report.eps);
    let satisfied = match (&report.probability, report.confidence_radius) {
        (Probability::Exact(p), _) => bound_dominates(bound, p),
        (Probability::Estimate(p), r) => *p <= bound + r.unwrap_or(0.0),
    };
    report.growth_2m = Some(growth);
    report.bound = Some(bound);
    report.bound_satisfied = Some(satisfied);
    Ok(())
}

/// Exact bad-event probability together with the symmetrization bound.
pub fn exact_bad_event_prob(
    cls: &ParamClass,
    c: &Target,
    mu: &FiniteMeasure,
    m: usize,
    eps: &Epsilon,
    settings: &LabSettings,
) -> Result<EstimateReport> {
    let p = exact_probability(cls, c, mu, m, eps, settings.enumeration_cap)?;
    let mut report = EstimateReport {
        mode: EstimateMode::Exact,
        m,
        eps: eps.clone(),
        probability: Probability::Exact(p),
        trials: None,
        hits: None,
        confidence_radius: None,
        ci_delta: None,
        seed: None,
        growth_2m: None,
        bound: None,
        bound_satisfied: None,
    };
    attach_bound(&mut report, cls, settings)?;
    Ok(report)
}

/// Number of bad trials among `trials` independent pairs. Trial `i` draws
/// from the stream derived from `(seed, i)`.
pub fn monte_carlo_hits(
    cls: &ParamClass,
    c: &Target,
    mu: &FiniteMeasure,
    m: usize,
    eps: &Epsilon,
    trials: u64,
    seed: u64,
) -> Result<u64> {
    check_domains(cls, c, mu)?;
    let scanner = GapScanner::new(cls, c);
    let threshold = GapThreshold::new(eps, m);
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = trial_rng(seed, i);
            let p = sample_pair_iid(mu, m, &mut rng);
            scanner.bad(threshold, &p.train().points, &p.ghost().points)
        })
        .count();
    Ok(hits as u64)
}

#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_bad_event_prob(
    cls: &ParamClass,
    c: &Target,
    mu: &FiniteMeasure,
    m: usize,
    eps: &Epsilon,
    trials: u64,
    seed: u64,
    settings: &LabSettings,
) -> Result<EstimateReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least one trial".into()));
    }
    if !(settings.ci_delta > 0.0 && settings.ci_delta < 1.0) {
        return Err(Error::InvalidArgument("ci_delta must lie in (0, 1)".into()));
    }
    let hits = monte_carlo_hits(cls, c, mu, m, eps, trials, seed)?;
    let mut report = EstimateReport {
        mode: EstimateMode::MonteCarlo,
        m,
        eps: eps.clone(),
        probability: Probability::Estimate(hits as f64 / trials as f64),
        trials: Some(trials),
        hits: Some(hits),
        confidence_radius: Some(hoeffding_radius(trials, settings.ci_delta)),
        ci_delta: Some(settings.ci_delta),
        seed: Some(seed),
        growth_2m: None,
        bound: None,
        bound_satisfied: None,
    };
    attach_bound(&mut report, cls, settings)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeOutcome {
    pub original: Rational,
    pub swapped: Rational,
}

impl ExchangeOutcome {
    pub fn equal(&self) -> bool {
        self.original == self.swapped
    }
}

/// Exact probabilities of `E` and of `{p : swap(p, mask) ∈ E}`.
pub fn exchangeability_check(
    cls: &ParamClass,
    c: &Target,
    mu: &FiniteMeasure,
    m: usize,
    eps: &Epsilon,
    mask: &[bool],
    cap: u128,
) -> Result<ExchangeOutcome> {
    if mask.len() != m {
        return Err(Error::InvalidArgument(format!(
            "swap mask has {} bits for sample size {m}",
            mask.len()
        )));
    }
    check_domains(cls, c, mu)?;
    let space = enumerate_pairs(mu, m, cap)?;
    let scanner = GapScanner::new(cls, c);
    let threshold = GapThreshold::new(eps, m);
    let original = space.mass_where(|s, t| scanner.bad(threshold, s, t));
    let swapped = space.mass_where(|s, t| {
        let (mut s2, mut t2) = (s.to_vec(), t.to_vec());
        for (i, &flip) in mask.iter().enumerate() {
            if flip {
                std::mem::swap(&mut s2[i], &mut t2[i]);
            }
        }
        scanner.bad(threshold, &s2, &t2)
    });
    Ok(ExchangeOutcome { original, swapped })
}

/// `⌈(8/ε)·(d·log₂(16/ε) + log₂(2/δ))⌉`, a sufficient realizable-case
/// sample size.
pub fn pac_sample_complexity(d: usize, eps: f64, delta: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps and delta must lie in (0, 1), got {eps} and {delta}"
        )));
    }
    let m = (8.0 / eps) * (d as f64 * (16.0 / eps).log2() + (2.0 / delta).log2());
    Ok(m.ceil() as u64)
}

/// Pairs `(x, y)` (training point, ghost point) in the bad event of the
/// singleton witness class over `support` at `m = 1`, `c ≡ 0`, `ε = 1`.
pub fn separation_bad_pairs(domain: &Arc<FiniteDomain>, support: &[usize]) -> Result<Vec<(usize, usize)>> {
    let cls = singleton_witness_class(domain.clone(), support)?;
    let c = Target::constant(domain.clone(), false);
    let eps = Epsilon::new(Rational::from_integer(1.into()))?;
    let mut out = Vec::new();
    for x in 0..domain.len() {
        for y in 0..domain.len() {
            let p = SamplePair::from_indices(&[x], &[y])?;
            if bad_event_contains(&cls, &c, &eps, &p) {
                out.push((x, y));
            }
        }
    }
    Ok(out)
}

/// Checks over the whole enumerated pair space that the bad event of the
/// singleton witness class at `m = 1`, `c ≡ 0`, `ε = 1` is exactly
/// `{((x),(y)) : y ∈ A, x ≠ y}`.
pub fn separation_witness_check(domain: &Arc<FiniteDomain>, support: &[usize]) -> Result<bool> {
    let cls = singleton_witness_class(domain.clone(), support)?;
    let c = Target::constant(domain.clone(), false);
    let eps = Epsilon::new(Rational::from_integer(1.into()))?;
    let mu = FiniteMeasure::uniform(domain.clone());
    let space = enumerate_pairs(&mu, 1, DEFAULT_ENUMERATION_CAP)?;
    let in_support = |y: usize| support.contains(&y);
    let holds = space.iter().all(|(p, _)| {
        let (x, y) = (p.train().points[0], p.ghost().points[0]);
        bad_event_contains(&cls, &c, &eps, &p) == (in_support(y) && x != y)
    });
    Ok(holds)
}
