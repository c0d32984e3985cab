//! Concept-class constructors.
//!
//! Every constructor returns a plain [`ParamClass`] whose parameter list and
//! evaluator are built from the component classes, so constructed classes
//! nest freely. Duplicate concepts (different parameters, same function) are
//! kept; use [`ParamClass::dedup`] where only the function set matters.

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use crate::concept::{Describer, Evaluator, ParamClass};
use crate::error::{Error, Result};
use crate::measure::FiniteDomain;

/// Router `r(ρ, x) ∈ {0,1}` selecting the left component where it is 1.
#[derive(Debug, Clone)]
pub struct RouterClass(ParamClass);

impl RouterClass {
    pub fn new(routes: ParamClass) -> Self {
        Self(routes)
    }

    /// Single router parameter with constant output.
    pub fn constant(domain: Arc<FiniteDomain>, route: bool) -> Self {
        Self(ParamClass::constant(domain, route))
    }

    /// One router parameter per region: `r(n, x) = 1[x ∈ A_n]`.
    pub fn regions(domain: Arc<FiniteDomain>, regions: &[Vec<usize>]) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let n = domain.len();
        let mut rows = Vec::with_capacity(regions.len());
        for region in regions {
            let mut row = vec![false; n];
            for &x in region {
                if x >= n {
                    return Err(Error::InvalidArgument(format!(
                        "region point index {x} outside domain of size {n}"
                    )));
                }
                row[x] = true;
            }
            rows.push(row);
        }
        let cls = ParamClass::table(domain, rows)?;
        let regions: Arc<Vec<Vec<usize>>> = Arc::new(regions.to_vec());
        let eval_cls = cls.clone();
        Ok(Self(ParamClass::new(
            "router",
            cls.domain().clone(),
            cls.len(),
            Arc::new(move |t, x| eval_cls.eval(t, x)),
            Arc::new(move |t| format!("A{t}{:?}", regions[t])),
        )?))
    }

    pub fn class(&self) -> &ParamClass {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn route(&self, rho: usize, x: usize) -> bool {
        self.0.eval(rho, x)
    }
}

/// Decodes a patched parameter index into `(θ₁, θ₂, ρ)`.
pub fn patch_components(index: usize, n2: usize, np: usize) -> (usize, usize, usize) {
    (index / (n2 * np), (index / np) % n2, index % np)
}

/// `x ↦ e₁(θ₁,x)` where `r(ρ,x)=1`, `e₂(θ₂,x)` elsewhere, over
/// `Θ₁ × Θ₂ × P` in lexicographic order.
pub fn patch_class(c1: &ParamClass, c2: &ParamClass, r: &RouterClass) -> Result<ParamClass> {
    if !c1.same_domain(c2.domain()) || !c1.same_domain(r.class().domain()) {
        return Err(Error::DomainMismatch);
    }
    let (n2, np) = (c2.len(), r.len());
    let len = c1
        .len()
        .checked_mul(n2)
        .and_then(|v| v.checked_mul(np))
        .ok_or_else(|| Error::InvalidArgument("patched parameter space overflows".into()))?;
    let (a, b, rr) = (c1.clone(), c2.clone(), r.clone());
    let eval: Evaluator = Arc::new(move |t, x| {
        let (t1, t2, rho) = patch_components(t, n2, np);
        if rr.route(rho, x) {
            a.eval(t1, x)
        } else {
            b.eval(t2, x)
        }
    });
    let (a, b, rr) = (c1.clone(), c2.clone(), r.clone());
    let describe: Describer = Arc::new(move |t| {
        let (t1, t2, rho) = patch_components(t, n2, np);
        format!(
            "patch({}, {}, {})",
            a.describe(t1),
            b.describe(t2),
            rr.class().describe(rho)
        )
    });
    ParamClass::new(
        format!("patch({}, {}, {})", c1.name(), c2.name(), r.class().name()),
        c1.domain().clone(),
        len,
        eval,
        describe,
    )
}

/// Fixed-region interpolation: `c1` on `region`, `c2` off it.
pub fn interp_fixed(c1: &ParamClass, c2: &ParamClass, region: &[usize]) -> Result<ParamClass> {
    if !c1.same_domain(c2.domain()) {
        return Err(Error::DomainMismatch);
    }
    let router = RouterClass::regions(c1.domain().clone(), &[region.to_vec()])?;
    Ok(patch_class(c1, c2, &router)?.with_name(format!("interp({}, {})", c1.name(), c2.name())))
}

/// Interpolation over a finite family of regions; the router parameter
/// picks the region.
pub fn interp_countable(
    c1: &ParamClass,
    c2: &ParamClass,
    regions: &[Vec<usize>],
) -> Result<ParamClass> {
    if !c1.same_domain(c2.domain()) {
        return Err(Error::DomainMismatch);
    }
    let router = RouterClass::regions(c1.domain().clone(), regions)?;
    Ok(patch_class(c1, c2, &router)?
        .with_name(format!("interp_family({}, {})", c1.name(), c2.name())))
}

/// The fiber product `{(θ₁,θ₂) : π₁(θ₁) = π₂(θ₂)}`, materialized in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementRelation {
    pairs: Vec<(usize, usize)>,
}

impl AgreementRelation {
    /// Hash join on the projection values.
    pub fn new<T: Eq + Hash>(pi1: &[T], pi2: &[T]) -> Self {
        let mut fibers: HashMap<&T, Vec<usize>> = HashMap::new();
        for (j, tag) in pi2.iter().enumerate() {
            fibers.entry(tag).or_default().push(j);
        }
        let pairs = pi1
            .iter()
            .enumerate()
            .flat_map(|(i, tag)| {
                fibers
                    .get(tag)
                    .into_iter()
                    .flatten()
                    .map(move |&j| (i, j))
            })
            .collect();
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Merge map `(θ₁, θ₂, x) ↦ {0,1}` for amalgamation.
#[derive(Clone)]
pub enum Merge {
    /// `e₁(θ₁, x)`.
    Left,
    /// `e₂(θ₂, x)`.
    Right,
    /// `e₁(θ₁, x) ⊕ e₂(θ₂, x)`.
    Xor,
    /// Explicit labels indexed `[θ₁][θ₂][x]`.
    Table(Arc<Vec<Vec<Vec<bool>>>>),
    Custom(Arc<dyn Fn(usize, usize, usize) -> bool + Send + Sync>),
}

impl std::fmt::Debug for Merge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Merge {
    pub fn name(&self) -> &'static str {
        match self {
            Merge::Left => "left",
            Merge::Right => "right",
            Merge::Xor => "xor",
            Merge::Table(_) => "table",
            Merge::Custom(_) => "custom",
        }
    }

    pub fn apply(&self, c1: &ParamClass, c2: &ParamClass, t1: usize, t2: usize, x: usize) -> bool {
        match self {
            Merge::Left => c1.eval(t1, x),
            Merge::Right => c2.eval(t2, x),
            Merge::Xor => c1.eval(t1, x) ^ c2.eval(t2, x),
            Merge::Table(t) => t[t1][t2][x],
            Merge::Custom(f) => f(t1, t2, x),
        }
    }
}

/// Fiber-product amalgamation: parameters are the agreeing pairs, labels
/// come from `merge`.
pub fn amalg_class<T: Eq + Hash>(
    c1: &ParamClass,
    c2: &ParamClass,
    pi1: &[T],
    pi2: &[T],
    merge: Merge,
) -> Result<ParamClass> {
    if !c1.same_domain(c2.domain()) {
        return Err(Error::DomainMismatch);
    }
    if pi1.len() != c1.len() || pi2.len() != c2.len() {
        return Err(Error::InvalidArgument(format!(
            "projections cover {} and {} parameters, classes have {} and {}",
            pi1.len(),
            pi2.len(),
            c1.len(),
            c2.len()
        )));
    }
    if let Merge::Table(t) = &merge {
        let n = c1.domain().len();
        let shaped = t.len() == c1.len()
            && t.iter()
                .all(|row| row.len() == c2.len() && row.iter().all(|v| v.len() == n));
        if !shaped {
            return Err(Error::InvalidArgument(format!(
                "merge table must be {} x {} x {n}",
                c1.len(),
                c2.len()
            )));
        }
    }
    let relation = AgreementRelation::new(pi1, pi2);
    if relation.is_empty() {
        return Err(Error::EmptyFiberProduct);
    }
    let pairs = Arc::new(relation.pairs);
    let (a, b, mg, ps) = (c1.clone(), c2.clone(), merge.clone(), pairs.clone());
    let eval: Evaluator = Arc::new(move |t, x| {
        let (t1, t2) = ps[t];
        mg.apply(&a, &b, t1, t2, x)
    });
    let (a, b, ps) = (c1.clone(), c2.clone(), pairs.clone());
    let describe: Describer = Arc::new(move |t| {
        let (t1, t2) = ps[t];
        format!("amalg({}, {})", a.describe(t1), b.describe(t2))
    });
    ParamClass::new(
        format!("amalg({}, {}, {})", c1.name(), c2.name(), merge.name()),
        c1.domain().clone(),
        pairs.len(),
        eval,
        describe,
    )
}

/// `{0} ∪ {1_{a} : a ∈ support}`. Parameter 0 is the zero concept; parameter
/// `i + 1` is the indicator of the `i`-th support point in ascending order.
pub fn singleton_witness_class(domain: Arc<FiniteDomain>, support: &[usize]) -> Result<ParamClass> {
    let n = domain.len();
    let mut points = support.to_vec();
    points.sort_unstable();
    points.dedup();
    if let Some(&bad) = points.iter().find(|&&a| a >= n) {
        return Err(Error::InvalidArgument(format!(
            "support point index {bad} outside domain of size {n}"
        )));
    }
    let points = Arc::new(points);
    let (p_eval, p_desc, d) = (points.clone(), points.clone(), domain.clone());
    let eval: Evaluator = Arc::new(move |t, x| t > 0 && p_eval[t - 1] == x);
    let describe: Describer = Arc::new(move |t| {
        if t == 0 {
            "zero".to_string()
        } else {
            format!("1{{{}}}", d.point(p_desc[t - 1]).id)
        }
    });
    ParamClass::new("singleton_witness", domain, points.len() + 1, eval, describe)
}
