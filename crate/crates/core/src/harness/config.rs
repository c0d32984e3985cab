//! Experiment configuration: JSON schema, validation, canonical form.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::error::HarnessError;
use crate::combinatorics::Budget;
use crate::concept::{Epsilon, ParamClass, Target};
use crate::constructors::{
    amalg_class, interp_countable, interp_fixed, patch_class, singleton_witness_class, Merge,
    RouterClass,
};
use crate::measure::{DomainPoint, FiniteDomain, FiniteMeasure, DEFAULT_ENUMERATION_CAP};
use crate::rational::{self, Rational};

/// Rational serialized as a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fraction(#[serde(with = "rational::serde_str")] pub Rational);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum DomainSpec {
    /// `n` evenly spaced coordinates from `lo` to `hi`, ids `0..n`.
    Grid { lo: Fraction, hi: Fraction, n: usize },
    Points(Vec<PointSpec>),
    /// `n` points with ids `0..n` and no coordinates.
    Size(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coord: Option<Fraction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedMeasure {
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSpec {
    Named(NamedMeasure),
    Weights(Vec<Fraction>),
}

impl Default for MeasureSpec {
    fn default() -> Self {
        MeasureSpec::Named(NamedMeasure::Uniform)
    }
}

/// Projection value for amalgamation; compared by exact equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tag {
    Int(i64),
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeSpec {
    Table,
    Left,
    Right,
    Xor,
}

/// Class expression; constructors nest through `left`, `right`, `router`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ClassExpr {
    Threshold {},
    Interval {},
    Constant {
        label: u8,
    },
    /// The zero concept plus `1_{a}` for each listed id.
    Singleton {
        support: Vec<u64>,
    },
    SingletonWitness {
        support: Vec<u64>,
    },
    /// One row of 0/1 labels per parameter, in domain order.
    Table {
        rows: Vec<Vec<u8>>,
    },
    Patch {
        left: Box<ClassExpr>,
        right: Box<ClassExpr>,
        router: Box<ClassExpr>,
    },
    InterpFixed {
        left: Box<ClassExpr>,
        right: Box<ClassExpr>,
        region: Vec<u64>,
    },
    InterpFamily {
        left: Box<ClassExpr>,
        right: Box<ClassExpr>,
        regions: Vec<Vec<u64>>,
    },
    Amalg {
        left: Box<ClassExpr>,
        right: Box<ClassExpr>,
        pi1: Vec<Tag>,
        pi2: Vec<Tag>,
        merge: MergeSpec,
        /// Labels indexed `[θ₁][θ₂][x]`, required when `merge` is `table`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        merge_table: Option<Vec<Vec<Vec<u8>>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum TargetSpec {
    /// Realizable target: the class member with this parameter index.
    Param(usize),
    Table(Vec<u8>),
    Constant(u8),
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec::Constant(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Exact,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<Fraction>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationSpec {
    pub support: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacSpec {
    /// VC dimension; computed from `class` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    pub eps: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bitvec_cap: Option<usize>,
}

impl BudgetSpec {
    fn is_empty(&self) -> bool {
        *self == BudgetSpec::default()
    }

    /// `self` on top of `base`.
    pub fn over(&self, base: &BudgetSpec) -> BudgetSpec {
        BudgetSpec {
            enumeration_cap: self.enumeration_cap.or(base.enumeration_cap),
            subset_cap: self.subset_cap.or(base.subset_cap),
            eval_cap: self.eval_cap.or(base.eval_cap),
            bitvec_cap: self.bitvec_cap.or(base.bitvec_cap),
        }
    }

    pub fn enumeration_cap(&self) -> u128 {
        self.enumeration_cap
            .map(u128::from)
            .unwrap_or(DEFAULT_ENUMERATION_CAP)
    }

    pub fn budget(&self) -> Budget {
        let d = Budget::default();
        Budget {
            subset_cap: self.subset_cap.map(u128::from).unwrap_or(d.subset_cap),
            eval_cap: self.eval_cap.map(u128::from).unwrap_or(d.eval_cap),
            bitvec_cap: self.bitvec_cap.unwrap_or(d.bitvec_cap),
        }
    }

    /// Parses `key=value` pairs separated by commas, as accepted in the
    /// `GHOSTGAP_BUDGET` environment variable.
    pub fn parse_env(text: &str) -> Result<BudgetSpec, HarnessError> {
        let mut out = BudgetSpec::default();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let invalid = || {
                HarnessError::validation("GHOSTGAP_BUDGET", format!("cannot parse {item:?}"))
            };
            let (key, value) = item.split_once('=').ok_or_else(invalid)?;
            let value: u64 = value.trim().parse().map_err(|_| invalid())?;
            match key.trim() {
                "enumeration_cap" => out.enumeration_cap = Some(value),
                "subset_cap" => out.subset_cap = Some(value),
                "eval_cap" => out.eval_cap = Some(value),
                "bitvec_cap" => out.bitvec_cap = Some(value as usize),
                other => {
                    return Err(HarnessError::validation(
                        "GHOSTGAP_BUDGET",
                        format!("unknown budget key {other:?}"),
                    ))
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

fn default_m() -> usize {
    1
}

fn default_trials() -> u64 {
    10_000
}

fn default_ci_delta() -> f64 {
    1e-3
}

fn default_vc_cap() -> usize {
    8
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// A declarative experiment. Unknown keys are rejected at every level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    #[serde(default)]
    pub measure: MeasureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ClassExpr>,
    #[serde(default)]
    pub target: TargetSpec,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Fraction>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ci_delta")]
    pub ci_delta: f64,
    /// Also compute the exact probability in `prob-mc` runs.
    #[serde(default, skip_serializing_if = "is_false")]
    pub compare_exact: bool,
    #[serde(default = "default_vc_cap")]
    pub vc_cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    /// Bit strings such as `"01"`; bit `i` swaps `S_i` and `T_i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swap_masks: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<SeparationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pac: Option<PacSpec>,
    #[serde(default, skip_serializing_if = "BudgetSpec::is_empty")]
    pub budget: BudgetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

/// Parses and fully validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        HarnessError::Parse {
            line: inner.line(),
            column: inner.column(),
            path,
            message: inner.to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Canonical JSON: fixed field order, defaults filled in, rationals in
    /// lowest terms.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let exp = Experiment::resolve(self)?;
        if let Some(eps) = &self.eps {
            Epsilon::new(eps.0.clone()).map_err(|e| HarnessError::validation("eps", e.to_string()))?;
        }
        if let Some(sweep) = &self.sweep {
            for e in sweep.eps.iter().flatten() {
                Epsilon::new(e.0.clone())
                    .map_err(|err| HarnessError::validation("sweep.eps", err.to_string()))?;
            }
        }
        if !(self.ci_delta > 0.0 && self.ci_delta < 1.0) {
            return Err(HarnessError::validation("ci_delta", "must lie in (0, 1)"));
        }
        if self.trials == 0 {
            return Err(HarnessError::validation("trials", "must be at least 1"));
        }
        for mask in self.swap_masks.iter().flatten() {
            parse_mask(mask)?;
        }
        if let Some(sep) = &self.separation {
            resolve_ids(&exp.domain, &sep.support, "separation.support")?;
        }
        if let Some(pac) = &self.pac {
            if !(pac.eps > 0.0 && pac.eps < 1.0) || !(pac.delta > 0.0 && pac.delta < 1.0) {
                return Err(HarnessError::validation("pac", "eps and delta must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    pub fn eps(&self) -> Result<Epsilon, HarnessError> {
        let eps = self
            .eps
            .as_ref()
            .ok_or_else(|| HarnessError::validation("eps", "required for this command"))?;
        Epsilon::new(eps.0.clone()).map_err(|e| HarnessError::validation("eps", e.to_string()))
    }
}

pub fn parse_mask(text: &str) -> Result<Vec<bool>, HarnessError> {
    text.chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(HarnessError::validation(
                "swap_masks",
                format!("mask {text:?} must contain only 0 and 1"),
            )),
        })
        .collect()
}

/// Domain, measure, class and target built from a config.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub domain: Arc<FiniteDomain>,
    pub measure: FiniteMeasure,
    pub class: Option<ParamClass>,
    pub target: Target,
}

fn resolve_ids(domain: &FiniteDomain, ids: &[u64], field: &str) -> Result<Vec<usize>, HarnessError> {
    let index: HashMap<u64, usize> = domain
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| (p.id, i))
        .collect();
    ids.iter()
        .map(|id| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| HarnessError::validation(field, format!("unknown point id {id}")))
        })
        .collect()
}

fn labels(values: &[u8], field: &str) -> Result<Vec<bool>, HarnessError> {
    values
        .iter()
        .map(|&v| match v {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(HarnessError::validation(field, format!("label {v} is not 0 or 1"))),
        })
        .collect()
}

impl Experiment {
    pub fn resolve(cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        let domain = Arc::new(build_domain(&cfg.domain)?);
        let measure = match &cfg.measure {
            MeasureSpec::Named(NamedMeasure::Uniform) => FiniteMeasure::uniform(domain.clone()),
            MeasureSpec::Weights(w) => FiniteMeasure::new(
                domain.clone(),
                w.iter().map(|f| f.0.clone()).collect(),
            )
            .map_err(|e| HarnessError::validation("measure", e.to_string()))?,
        };
        let class = cfg
            .class
            .as_ref()
            .map(|expr| build_class(expr, &domain, "class"))
            .transpose()?;
        let target = match &cfg.target {
            TargetSpec::Constant(v) => {
                let b = labels(&[*v], "target.constant")?[0];
                Target::constant(domain.clone(), b)
            }
            TargetSpec::Table(values) => {
                Target::table(domain.clone(), labels(values, "target.table")?)
                    .map_err(|e| HarnessError::validation("target.table", e.to_string()))?
            }
            TargetSpec::Param(theta) => {
                let cls = class.as_ref().ok_or_else(|| {
                    HarnessError::validation("target.param", "needs a class")
                })?;
                Target::member(cls, *theta)
                    .map_err(|e| HarnessError::validation("target.param", e.to_string()))?
            }
        };
        Ok(Self {
            domain,
            measure,
            class,
            target,
        })
    }

    pub fn class(&self) -> Result<&ParamClass, HarnessError> {
        self.class
            .as_ref()
            .ok_or_else(|| HarnessError::validation("class", "required for this command"))
    }
}

fn build_domain(spec: &DomainSpec) -> Result<FiniteDomain, HarnessError> {
    let result = match spec {
        DomainSpec::Grid { lo, hi, n } => FiniteDomain::grid(&lo.0, &hi.0, *n),
        DomainSpec::Size(n) => FiniteDomain::with_size(*n),
        DomainSpec::Points(points) => FiniteDomain::new(
            points
                .iter()
                .map(|p| DomainPoint {
                    id: p.id,
                    coord: p.coord.as_ref().map(|c| c.0.clone()),
                })
                .collect(),
        ),
    };
    result.map_err(|e| HarnessError::validation("domain", e.to_string()))
}

/// Resolves a class expression; `path` names the node in error messages.
pub fn build_class(
    expr: &ClassExpr,
    domain: &Arc<FiniteDomain>,
    path: &str,
) -> Result<ParamClass, HarnessError> {
    let wrap = |e: crate::Error| HarnessError::from_core(path, e);
    let child = |e: &ClassExpr, name: &str| build_class(e, domain, &format!("{path}.{name}"));
    match expr {
        ClassExpr::Threshold {} => Ok(ParamClass::threshold(domain.clone())),
        ClassExpr::Interval {} => Ok(ParamClass::interval(domain.clone())),
        ClassExpr::Constant { label } => Ok(ParamClass::constant(
            domain.clone(),
            labels(&[*label], path)?[0],
        )),
        ClassExpr::Singleton { support } | ClassExpr::SingletonWitness { support } => {
            let pts = resolve_ids(domain, support, path)?;
            singleton_witness_class(domain.clone(), &pts).map_err(wrap)
        }
        ClassExpr::Table { rows } => {
            let rows = rows
                .iter()
                .map(|r| labels(r, path))
                .collect::<Result<Vec<_>, _>>()?;
            ParamClass::table(domain.clone(), rows).map_err(wrap)
        }
        ClassExpr::Patch {
            left,
            right,
            router,
        } => {
            let (l, r) = (child(left, "left")?, child(right, "right")?);
            let router = RouterClass::new(child(router, "router")?);
            patch_class(&l, &r, &router).map_err(wrap)
        }
        ClassExpr::InterpFixed {
            left,
            right,
            region,
        } => {
            let (l, r) = (child(left, "left")?, child(right, "right")?);
            let region = resolve_ids(domain, region, path)?;
            interp_fixed(&l, &r, &region).map_err(wrap)
        }
        ClassExpr::InterpFamily {
            left,
            right,
            regions,
        } => {
            let (l, r) = (child(left, "left")?, child(right, "right")?);
            let regions = regions
                .iter()
                .map(|ids| resolve_ids(domain, ids, path))
                .collect::<Result<Vec<_>, _>>()?;
            interp_countable(&l, &r, &regions).map_err(wrap)
        }
        ClassExpr::Amalg {
            left,
            right,
            pi1,
            pi2,
            merge,
            merge_table,
        } => {
            let (l, r) = (child(left, "left")?, child(right, "right")?);
            let merge = match (merge, merge_table) {
                (MergeSpec::Left, None) => Merge::Left,
                (MergeSpec::Right, None) => Merge::Right,
                (MergeSpec::Xor, None) => Merge::Xor,
                (MergeSpec::Table, Some(table)) => {
                    let table = table
                        .iter()
                        .map(|plane| {
                            plane
                                .iter()
                                .map(|row| labels(row, path))
                                .collect::<Result<Vec<_>, _>>()
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Merge::Table(Arc::new(table))
                }
                (MergeSpec::Table, None) => {
                    return Err(HarnessError::validation(path, "merge \"table\" needs merge_table"))
                }
                (_, Some(_)) => {
                    return Err(HarnessError::validation(
                        path,
                        "merge_table is only allowed with merge \"table\"",
                    ))
                }
            };
            amalg_class(&l, &r, pi1, pi2, merge).map_err(wrap)
        }
    }
}
