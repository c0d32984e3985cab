//! Command execution and run manifests.

use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{parse_mask, BudgetSpec, Experiment, ExperimentConfig, Mode};
use super::error::HarnessError;
use crate::combinatorics::{sample_growth, sauer_shelah, vc_dimension, VcDimension};
use crate::concept::{Epsilon, ParamClass};
use crate::constructors::singleton_witness_class;
use crate::rational::{format_rational, to_f64_up, Rational};
use crate::symmetrization::{
    exact_bad_event_prob, exact_probability, exchangeability_check, monte_carlo_bad_event_prob,
    pac_sample_complexity, separation_bad_pairs, separation_witness_check, EstimateReport,
    LabSettings, STANDARD_BOUND,
};

pub const TOOL: &str = "ghostgap";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column order of probability sweep tables.
pub const PROBABILITY_CSV_HEADER: &str =
    "m,eps,probability,probability_f64,growth_2m,bound,bound_satisfied";
/// Column order of growth tables; `bound` is the Sauer–Shelah sum.
pub const GROWTH_CSV_HEADER: &str = "m,growth,bound";

/// Largest `m` for which `exchange-check` enumerates every swap mask.
const MAX_ALL_MASKS_M: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Vcdim,
    Growth,
    SauerCheck,
    ProbExact,
    ProbMc,
    BoundCheck,
    ExchangeCheck,
    SeparationCheck,
    PacM,
    ConstructDump,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Vcdim,
        Command::Growth,
        Command::SauerCheck,
        Command::ProbExact,
        Command::ProbMc,
        Command::BoundCheck,
        Command::ExchangeCheck,
        Command::SeparationCheck,
        Command::PacM,
        Command::ConstructDump,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Vcdim => "vcdim",
            Command::Growth => "growth",
            Command::SauerCheck => "sauer-check",
            Command::ProbExact => "prob-exact",
            Command::ProbMc => "prob-mc",
            Command::BoundCheck => "bound-check",
            Command::ExchangeCheck => "exchange-check",
            Command::SeparationCheck => "separation-check",
            Command::PacM => "pac-m",
            Command::ConstructDump => "construct-dump",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| HarnessError::validation("command", format!("unknown command {s:?}")))
    }
}

/// Command-line overrides applied on top of a parsed config.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    /// Worker threads; 0 or 1 runs single-threaded.
    pub threads: usize,
    /// Contents of `GHOSTGAP_BUDGET`, if set.
    pub env_budget: Option<String>,
}

impl RunOptions {
    /// Options with `env_budget` read from the process environment.
    pub fn from_env() -> Self {
        Self {
            env_budget: std::env::var("GHOSTGAP_BUDGET").ok(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Timestamps {
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
}

/// The JSON report of one run. `timestamps` holds the only fields that
/// differ between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub results: Value,
    /// Set when a checked invariant failed; the CLI exits with code 5.
    pub violation: Option<String>,
    pub timestamps: Timestamps,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    /// The report with `timestamps` removed, for reproducibility checks.
    pub fn without_timestamps(&self) -> Value {
        strip_timestamps(serde_json::to_value(self).expect("manifest serializes"))
    }
}

pub fn strip_timestamps(mut report: Value) -> Value {
    if let Some(obj) = report.as_object_mut() {
        obj.remove("timestamps");
    }
    report
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    /// CSV table including the header line.
    pub csv: Option<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.violation.is_some() {
            5
        } else {
            0
        }
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Applies seed and trial overrides; the result is what gets hashed.
pub fn effective_config(cfg: &ExperimentConfig, opts: &RunOptions) -> ExperimentConfig {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = opts.trials {
        cfg.trials = trials;
    }
    cfg
}

/// Runs `command` on `cfg` inside a pool of `opts.threads` workers.
pub fn run_experiment(
    command: Command,
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<RunOutcome, HarnessError> {
    let started = now_ms();
    let cfg = effective_config(cfg, opts);
    cfg.validate()?;
    let env = match &opts.env_budget {
        Some(text) => BudgetSpec::parse_env(text)?,
        None => BudgetSpec::default(),
    };
    let budget = cfg.budget.over(&env);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.max(1))
        .build()
        .map_err(|e| HarnessError::Invariant(format!("cannot start thread pool: {e}")))?;
    let exp = Experiment::resolve(&cfg)?;
    let ctx = Context {
        cfg: &cfg,
        exp: &exp,
        settings: LabSettings {
            enumeration_cap: budget.enumeration_cap(),
            budget: budget.budget(),
            ci_delta: cfg.ci_delta,
            bound: STANDARD_BOUND,
        },
    };
    let out = pool.install(|| ctx.dispatch(command))?;
    let manifest = RunManifest {
        tool: TOOL,
        version: VERSION,
        command: command.as_str().to_string(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        config: cfg.clone(),
        results: out.results,
        violation: out.violation,
        timestamps: Timestamps {
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
        },
    };
    Ok(RunOutcome {
        manifest,
        csv: out.csv,
    })
}

struct Output {
    results: Value,
    csv: Option<String>,
    violation: Option<String>,
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    exp: &'a Experiment,
    settings: LabSettings,
}

fn core(field: &'static str) -> impl Fn(crate::Error) -> HarnessError {
    move |e| HarnessError::from_core(field, e)
}

fn opt_json<T: Serialize>(v: Option<T>) -> Value {
    v.map(|x| json!(x)).unwrap_or(Value::Null)
}

fn csv_field<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Context<'_> {
    fn dispatch(&self, command: Command) -> Result<Output, HarnessError> {
        match command {
            Command::Vcdim => self.vcdim(),
            Command::Growth => self.growth(false),
            Command::SauerCheck => self.growth(true),
            Command::ProbExact => self.probabilities(Mode::Exact, false),
            Command::ProbMc => self.probabilities(Mode::Mc, false),
            Command::BoundCheck => self.probabilities(self.cfg.mode, true),
            Command::ExchangeCheck => self.exchange(),
            Command::SeparationCheck => self.separation(),
            Command::PacM => self.pac(),
            Command::ConstructDump => self.dump(),
        }
    }

    fn class(&self) -> Result<&ParamClass, HarnessError> {
        self.exp.class()
    }

    fn vc(&self, cls: &ParamClass) -> Result<VcDimension, HarnessError> {
        vc_dimension(cls, self.cfg.vc_cap, &self.settings.budget).map_err(core("class"))
    }

    fn vc_json(d: VcDimension) -> Value {
        match d {
            VcDimension::Exact(d) => json!({"value": d, "exact": true}),
            VcDimension::AtLeast(d) => json!({"value": d, "exact": false}),
        }
    }

    fn vcdim(&self) -> Result<Output, HarnessError> {
        let cls = self.class()?;
        let d = self.vc(cls)?;
        Ok(Output {
            results: json!({
                "class": cls.name(),
                "parameters": cls.len(),
                "distinct_concepts": cls.concept_set().len(),
                "domain_size": self.exp.domain.len(),
                "vc_dimension": Self::vc_json(d),
                "vc_cap": self.cfg.vc_cap,
            }),
            csv: None,
            violation: None,
        })
    }

    fn sample_sizes(&self, default: impl FnOnce() -> Vec<usize>) -> Vec<usize> {
        match self.cfg.sweep.as_ref().and_then(|s| s.m.clone()) {
            Some(ms) => ms,
            None => default(),
        }
    }

    fn growth(&self, check: bool) -> Result<Output, HarnessError> {
        let cls = self.class()?;
        let d = self.vc(cls)?;
        let n = self.exp.domain.len();
        let ms = self.sample_sizes(|| (0..=n).collect());
        let mut rows = Vec::with_capacity(ms.len());
        let mut csv = format!("{GROWTH_CSV_HEADER}\n");
        let mut failures = Vec::new();
        for &m in &ms {
            let g = sample_growth(cls, m, &self.settings.budget).map_err(core("class"))?;
            let bound = match d {
                VcDimension::Exact(d) => Some(sauer_shelah(d, m)),
                VcDimension::AtLeast(_) => None,
            };
            let holds = bound.as_ref().map(|b| num_bigint::BigUint::from(g) <= *b);
            if holds == Some(false) {
                failures.push(m);
            }
            csv.push_str(&format!("{m},{g},{}\n", csv_field(bound.as_ref())));
            let mut row = json!({
                "m": m,
                "growth": g,
                "sauer_bound": opt_json(bound.as_ref().map(|b| b.to_string())),
            });
            if check {
                row["holds"] = opt_json(holds);
            }
            rows.push(row);
        }
        let mut results = json!({
            "class": cls.name(),
            "domain_size": n,
            "vc_dimension": Self::vc_json(d),
            "rows": rows,
        });
        let mut violation = None;
        if check {
            results["all_hold"] = json!(matches!(d, VcDimension::Exact(_)) && failures.is_empty());
            if !failures.is_empty() {
                violation = Some(format!("growth exceeds the Sauer-Shelah sum at m = {failures:?}"));
            }
        }
        Ok(Output {
            results,
            csv: Some(csv),
            violation,
        })
    }

    fn grid(&self) -> Result<Vec<(usize, Epsilon)>, HarnessError> {
        let ms = self.sample_sizes(|| vec![self.cfg.m]);
        let eps: Vec<Epsilon> = match self.cfg.sweep.as_ref().and_then(|s| s.eps.as_ref()) {
            Some(list) => list
                .iter()
                .map(|f| Epsilon::new(f.0.clone()).map_err(core("sweep.eps")))
                .collect::<Result<_, _>>()?,
            None => vec![self.cfg.eps()?],
        };
        Ok(ms
            .iter()
            .flat_map(|&m| eps.iter().map(move |e| (m, e.clone())))
            .collect())
    }

    fn estimate(&self, mode: Mode, m: usize, eps: &Epsilon) -> Result<EstimateReport, HarnessError> {
        let (cls, c, mu) = (self.class()?, &self.exp.target, &self.exp.measure);
        match mode {
            Mode::Exact => {
                exact_bad_event_prob(cls, c, mu, m, eps, &self.settings).map_err(core("class"))
            }
            Mode::Mc => monte_carlo_bad_event_prob(
                cls,
                c,
                mu,
                m,
                eps,
                self.cfg.trials,
                self.cfg.seed,
                &self.settings,
            )
            .map_err(core("class")),
        }
    }

    fn probabilities(&self, mode: Mode, require_bound: bool) -> Result<Output, HarnessError> {
        let grid = self.grid()?;
        let compare = mode == Mode::Mc && self.cfg.compare_exact;
        let mut rows = Vec::with_capacity(grid.len());
        let mut csv = format!("{PROBABILITY_CSV_HEADER}\n");
        let mut failures = Vec::new();
        for (m, eps) in &grid {
            let report = self.estimate(mode, *m, eps)?;
            if require_bound && report.bound.is_none() && *m > 0 {
                return Err(HarnessError::BudgetExceeded(format!(
                    "growth value at 2m = {} is outside the configured budget",
                    2 * m
                )));
            }
            if report.bound_satisfied == Some(false) {
                failures.push(format!("m = {m}, eps = {eps}"));
            }
            let exact_p = report.probability.exact().map(format_rational);
            csv.push_str(&format!(
                "{m},{eps},{},{},{},{},{}\n",
                exact_p.unwrap_or_else(|| report.probability.as_f64().to_string()),
                report.probability.as_f64(),
                csv_field(report.growth_2m),
                csv_field(report.bound),
                csv_field(report.bound_satisfied),
            ));
            let mut row = json!(report);
            if compare {
                let exact = exact_probability(
                    self.class()?,
                    &self.exp.target,
                    &self.exp.measure,
                    *m,
                    eps,
                    self.settings.enumeration_cap,
                )
                .map_err(core("class"))?;
                let diff = (report.probability.as_f64() - to_f64_up(&exact)).abs();
                let radius = report.confidence_radius.unwrap_or(0.0);
                row["exact_probability"] = json!(format_rational(&exact));
                row["exact_probability_f64"] = json!(to_f64_up(&exact));
                row["difference"] = json!(diff);
                row["within_radius"] = json!(diff <= radius);
            }
            rows.push(row);
        }
        let violation = (!failures.is_empty())
            .then(|| format!("bad-event probability exceeds the bound at {}", failures.join("; ")));
        let mut results = json!({
            "class": self.class()?.name(),
            "mode": match mode { Mode::Exact => "exact", Mode::Mc => "mc" },
            "estimates": rows,
        });
        if require_bound {
            results["all_satisfied"] = json!(failures.is_empty());
        }
        Ok(Output {
            results,
            csv: Some(csv),
            violation,
        })
    }

    fn exchange(&self) -> Result<Output, HarnessError> {
        let cls = self.class()?;
        let eps = self.cfg.eps()?;
        let m = self.cfg.m;
        let masks: Vec<Vec<bool>> = match &self.cfg.swap_masks {
            Some(list) => list.iter().map(|s| parse_mask(s)).collect::<Result<_, _>>()?,
            None if m <= MAX_ALL_MASKS_M => (0u32..1 << m)
                .map(|bits| (0..m).map(|i| bits >> i & 1 == 1).collect())
                .collect(),
            None => {
                return Err(HarnessError::validation(
                    "swap_masks",
                    format!("list the masks explicitly when m > {MAX_ALL_MASKS_M}"),
                ))
            }
        };
        let mut rows = Vec::with_capacity(masks.len());
        let mut unequal = Vec::new();
        for mask in &masks {
            let text: String = mask.iter().map(|&b| if b { '1' } else { '0' }).collect();
            let out = exchangeability_check(
                cls,
                &self.exp.target,
                &self.exp.measure,
                m,
                &eps,
                mask,
                self.settings.enumeration_cap,
            )
            .map_err(|e| match e {
                crate::Error::InvalidArgument(msg) => HarnessError::validation("swap_masks", msg),
                other => HarnessError::from_core("class", other),
            })?;
            if !out.equal() {
                unequal.push(text.clone());
            }
            rows.push(json!({
                "mask": text,
                "original": format_rational(&out.original),
                "swapped": format_rational(&out.swapped),
                "equal": out.equal(),
            }));
        }
        let violation = (!unequal.is_empty())
            .then(|| format!("swap changes the bad-event probability for masks {unequal:?}"));
        Ok(Output {
            results: json!({
                "class": cls.name(),
                "m": m,
                "eps": eps,
                "masks": rows,
                "all_equal": unequal.is_empty(),
            }),
            csv: None,
            violation,
        })
    }

    fn separation(&self) -> Result<Output, HarnessError> {
        let spec = self
            .cfg
            .separation
            .as_ref()
            .ok_or_else(|| HarnessError::validation("separation", "required for this command"))?;
        let domain = &self.exp.domain;
        let support: Vec<usize> = spec
            .support
            .iter()
            .map(|id| {
                domain.index_of(*id).ok_or_else(|| {
                    HarnessError::validation("separation.support", format!("unknown point id {id}"))
                })
            })
            .collect::<Result<_, _>>()?;
        let structural = separation_witness_check(domain, &support).map_err(core("separation"))?;
        let bad = separation_bad_pairs(domain, &support).map_err(core("separation"))?;
        let cls = singleton_witness_class(domain.clone(), &support).map_err(core("separation"))?;
        let zero = crate::concept::Target::constant(domain.clone(), false);
        let one = Epsilon::new(Rational::from_integer(1.into())).map_err(core("separation"))?;
        let mu = &self.exp.measure;
        let probability = exact_probability(&cls, &zero, mu, 1, &one, self.settings.enumeration_cap)
            .map_err(core("separation"))?;
        let mut dedup = support.clone();
        dedup.sort_unstable();
        dedup.dedup();
        let closed_form: Rational = dedup
            .iter()
            .map(|&a| mu.weight(a) * (Rational::from_integer(1.into()) - mu.weight(a)))
            .sum();
        let check = structural && probability == closed_form;
        let id = |i: usize| domain.point(i).id;
        Ok(Output {
            results: json!({
                "support": dedup.iter().map(|&a| id(a)).collect::<Vec<_>>(),
                "domain_size": domain.len(),
                "bad_pairs": bad.iter().map(|&(x, y)| [id(x), id(y)]).collect::<Vec<_>>(),
                "structural_match": structural,
                "probability": format_rational(&probability),
                "closed_form": format_rational(&closed_form),
                "check": check,
            }),
            csv: None,
            violation: (!check).then(|| "bad event differs from {(x, y) : y in A, x != y}".into()),
        })
    }

    fn pac(&self) -> Result<Output, HarnessError> {
        let spec = self
            .cfg
            .pac
            .as_ref()
            .ok_or_else(|| HarnessError::validation("pac", "required for this command"))?;
        let (d, source) = match spec.d {
            Some(d) => (d, "config"),
            None => match self.vc(self.class()?)? {
                VcDimension::Exact(d) => (d, "vcdim"),
                VcDimension::AtLeast(d) => {
                    return Err(HarnessError::BudgetExceeded(format!(
                        "VC dimension is at least {d}; raise vc_cap or set pac.d"
                    )))
                }
            },
        };
        let m = pac_sample_complexity(d, spec.eps, spec.delta).map_err(core("pac"))?;
        Ok(Output {
            results: json!({
                "d": d,
                "d_source": source,
                "eps": spec.eps,
                "delta": spec.delta,
                "m": m,
            }),
            csv: None,
            violation: None,
        })
    }

    fn dump(&self) -> Result<Output, HarnessError> {
        let cls = self.class()?;
        let n = self.exp.domain.len();
        let cells = cls.len() as u128 * n as u128;
        if cells > self.settings.budget.eval_cap {
            return Err(HarnessError::BudgetExceeded(format!(
                "class table has {cells} cells, eval budget is {}",
                self.settings.budget.eval_cap
            )));
        }
        let rows: Vec<Value> = (0..cls.len())
            .map(|t| {
                let labels: String = (0..n).map(|x| if cls.eval(t, x) { '1' } else { '0' }).collect();
                json!({"theta": t, "describe": cls.describe(t), "labels": labels})
            })
            .collect();
        Ok(Output {
            results: json!({
                "class": cls.name(),
                "domain": self.exp.domain.points().iter().map(|p| p.id).collect::<Vec<_>>(),
                "parameters": cls.len(),
                "distinct_concepts": cls.concept_set().len(),
                "rows": rows,
            }),
            csv: None,
            violation: None,
        })
    }
}
