//! Campaign runner behind the `plineq` binary.
//!
//! A [`Campaign`] fully determines a run. Trials fan out through
//! [`map_indexed`] and are reduced in trial order, so the [`RunReport`] is
//! byte-identical across runs and execution modes except for `wall_time_ms`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classes::Direction;
use crate::error::PlError;
use crate::exec::{map_indexed, Execution};
use crate::generators::{
    derive_seed, gen_admissible_q, gen_concave, gen_concave_admissible_phi, gen_concave_positive_phi, gen_convex,
    gen_implicit_m_plus, gen_ls_weight, gen_monotone, GenConfig,
};
use crate::inequalities::{CaseInputs, ChebyshevVariant, Checker, Hypothesis, InequalityName, InequalityVerdict};
use crate::pl_function::{PLFunction, PlRecord};
use crate::scalar::{exact_string, parse_exact, Arithmetic, Exact, Scalar};
use crate::search::{
    hypothesis_necessity_suite, minimize_margin_with, suite_key, SearchError, SearchProblem, SearchResult,
};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write report to {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid campaign: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Case { path: PathBuf, source: PlError },
    #[error(transparent)]
    Search(#[from] SearchError),
}

pub type Result<T, E = CampaignError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Verify,
    Falsify,
    Replay,
    Sharpness,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown mode `{s}` (expected verify|falsify|replay|sharpness)"))
    }
}

/// One explicit falsification target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub inequality: InequalityName,
    #[serde(default)]
    pub dropped: Vec<Hypothesis>,
    /// `Some(true)`: a violation must be found; `Some(false)`: none may be.
    #[serde(default)]
    pub expect_violation: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSettings {
    pub budget: usize,
    pub n_breakpoints: usize,
    /// Explicit targets; when empty, falsify runs the necessity suite.
    pub problems: Vec<ProblemSpec>,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            budget: 10_000,
            n_breakpoints: 9,
            problems: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharpnessSettings {
    pub q_count: usize,
    pub p_count: usize,
}

impl Default for SharpnessSettings {
    fn default() -> Self {
        Self { q_count: 200, p_count: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Campaign {
    pub mode: Mode,
    pub inequalities: Vec<InequalityName>,
    pub generator: GenConfig,
    pub trials: usize,
    pub arithmetic: Arithmetic,
    /// Verdict tolerance; the backend default when absent (0 for rationals).
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub case: Option<PathBuf>,
    pub search: SearchSettings,
    pub sharpness: SharpnessSettings,
}

impl Default for Campaign {
    fn default() -> Self {
        Self {
            mode: Mode::Verify,
            inequalities: Vec::new(),
            generator: GenConfig::default(),
            trials: 1000,
            arithmetic: Arithmetic::Rational,
            tolerance: None,
            seed: 0,
            out: None,
            case: None,
            search: SearchSettings::default(),
            sharpness: SharpnessSettings::default(),
        }
    }
}

fn parse_error(path: &Path, line: usize, column: usize, message: impl Into<String>) -> CampaignError {
    CampaignError::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

/// Line and column (1-based) of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

impl Campaign {
    /// Loads a TOML (`.toml`) or JSON campaign file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CampaignError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| {
                let (line, column) = e.span().map_or((0, 0), |s| line_col(&text, s.start));
                parse_error(path, line, column, e.message())
            })
        } else {
            serde_json::from_str(&text).map_err(|e| parse_error(path, e.line(), e.column(), e.to_string()))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(CampaignError::Invalid(m));
        self.generator
            .validate()
            .map_err(|e| CampaignError::Invalid(format!("generator: {e}")))?;
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t >= 0.0) {
                return invalid(format!("tolerance must be finite and >= 0, got {t}"));
            }
        }
        match self.mode {
            Mode::Verify => {
                if self.inequalities.is_empty() {
                    return invalid("verify mode needs at least one inequality".into());
                }
                if self.trials == 0 {
                    return invalid("trials must be positive".into());
                }
                let unit = self.generator.domain == [0.0, 1.0];
                let needs_unit = |i: &InequalityName| {
                    !matches!(
                        i,
                        InequalityName::Chebyshev | InequalityName::ChebyshevM | InequalityName::HermiteHadamard
                    )
                };
                if let Some(i) = self.inequalities.iter().find(|i| needs_unit(i) && !unit) {
                    return invalid(format!("{i} requires generator.domain = [0, 1]"));
                }
            }
            Mode::Sharpness => {
                if self.sharpness.p_count == 0 || self.sharpness.q_count == 0 {
                    return invalid("sharpness.p_count and sharpness.q_count must be positive".into());
                }
                if self.generator.domain != [0.0, 1.0] {
                    return invalid("sharpness requires generator.domain = [0, 1]".into());
                }
            }
            Mode::Falsify => {
                if self.search.budget == 0 {
                    return invalid("search.budget must be positive".into());
                }
                if self.search.problems.is_empty() && self.search.budget < 1000 {
                    return invalid("the necessity suite needs search.budget >= 1000".into());
                }
            }
            Mode::Replay => {
                if self.case.is_none() {
                    return invalid("replay mode needs a case file".into());
                }
            }
        }
        Ok(())
    }
}

/// A self-contained serialized evaluation, replayable on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseRecord {
    pub inequality: InequalityName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<ChebyshevVariant>,
    /// Why the case was stored (`min_margin`, `failure`, `violation`, ...).
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial: Option<usize>,
    /// Margin as recorded by the run, as an exact rational string.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<String>,
    pub functions: BTreeMap<String, PlRecord>,
}

impl CaseRecord {
    pub fn from_inputs<S: Scalar>(case: &CaseInputs<S>, label: &str, trial: Option<usize>, margin: Option<&S>) -> Self {
        Self {
            inequality: case.inequality,
            variant: case.variant,
            label: label.to_string(),
            trial,
            margin: margin.map(exact_string),
            functions: case.functions.iter().map(|(k, f)| (k.clone(), f.to_record())).collect(),
        }
    }

    pub fn to_inputs<S: Scalar>(&self) -> Result<CaseInputs<S>, PlError> {
        let mut functions = BTreeMap::new();
        for role in self.inequality.roles() {
            let rec = self.functions.get(*role).ok_or_else(|| PlError::Record {
                field: format!("functions.{role}"),
                reason: format!("missing input for {}", self.inequality),
            })?;
            functions.insert(role.to_string(), PLFunction::from_record_at(rec, &format!("functions.{role}"))?);
        }
        if let Some(extra) = self.functions.keys().find(|k| !self.inequality.roles().contains(&k.as_str())) {
            return Err(PlError::Record {
                field: format!("functions.{extra}"),
                reason: format!("{} takes no input named `{extra}`", self.inequality),
            });
        }
        Ok(CaseInputs {
            inequality: self.inequality,
            variant: self.variant,
            functions,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CampaignError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| parse_error(path, e.line(), e.column(), e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub inequality: InequalityName,
    pub trials: usize,
    pub passes: usize,
    pub failures: usize,
    /// Trials whose inputs failed a hypothesis check (generator defects).
    pub hypothesis_failures: usize,
    pub min_margin: String,
    pub min_margin_f64: f64,
    pub min_margin_trial: usize,
    /// Index into `cases` of the stored minimum-margin input.
    pub min_margin_case: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum SearchStatus {
    FoundViolation,
    NoViolationFound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchEntry {
    pub key: String,
    pub inequality: InequalityName,
    pub dropped: Vec<Hypothesis>,
    pub status: SearchStatus,
    pub expect_violation: Option<bool>,
    pub best_margin: f64,
    pub exact_margin: Option<String>,
    pub iterations_used: usize,
    pub seed: u64,
    /// Index into `cases` of the best input.
    pub case: Option<usize>,
    pub trace: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessSummary {
    pub p_count: usize,
    pub q_count: usize,
    /// Injected `q = q0` cases and how many of them gave margin zero.
    pub injected: usize,
    pub injected_zero: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisOutcome {
    pub hypothesis: Hypothesis,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayOutcome {
    pub inequality: InequalityName,
    pub lhs: String,
    pub rhs: String,
    pub margin: String,
    pub margin_f64: f64,
    pub holds: bool,
    pub hypotheses: Vec<HypothesisOutcome>,
    pub stored_margin: Option<String>,
    /// Whether the recomputed margin equals the stored one exactly.
    pub reproduced: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub campaign: Campaign,
    pub aggregates: Vec<Aggregate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub searches: Vec<SearchEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sharpness: Option<SharpnessSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replay: Option<ReplayOutcome>,
    pub cases: Vec<CaseRecord>,
    pub expectations_met: bool,
    pub mismatches: Vec<String>,
    pub wall_time_ms: u64,
}

impl RunReport {
    fn new(campaign: &Campaign) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            campaign: campaign.clone(),
            aggregates: Vec::new(),
            searches: Vec::new(),
            sharpness: None,
            replay: None,
            cases: Vec::new(),
            expectations_met: true,
            mismatches: Vec::new(),
            wall_time_ms: 0,
        }
    }

    fn mismatch(&mut self, message: String) {
        self.expectations_met = false;
        self.mismatches.push(message);
    }

    /// 0 when every expectation held, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.expectations_met)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|source| CampaignError::Write {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn checker<S: Scalar>(campaign: &Campaign) -> Checker<S> {
    let verdict_tol = campaign
        .tolerance
        .and_then(S::from_f64)
        .unwrap_or_else(S::verdict_tol);
    Checker::new(S::class_tol(), verdict_tol)
}

/// Role-specific generator config, so roles drawn by the same generator differ.
fn role_cfg(gen: &GenConfig, seed: u64, role: u64) -> GenConfig {
    gen.with_seed(derive_seed(seed, &[role]))
}

/// Hypothesis-satisfying inputs for one verification trial.
pub fn draw_case<S: Scalar>(
    inequality: InequalityName,
    gen: &GenConfig,
    seed: u64,
    trial: usize,
) -> Result<CaseInputs<S>, PlError> {
    let t = seed_for_trial(seed, inequality, trial);
    let (c0, c1, c2) = (role_cfg(gen, t, 0), role_cfg(gen, t, 1), role_cfg(gen, t, 2));
    let case = match inequality {
        InequalityName::Chebyshev => {
            let dir = if trial % 2 == 0 {
                Direction::Nondecreasing
            } else {
                Direction::Nonincreasing
            };
            CaseInputs::new(inequality, [("f", gen_monotone(&c0, dir)?), ("g", gen_monotone(&c1, dir)?)])
        }
        InequalityName::ChebyshevM => {
            let variant = ChebyshevVariant::ALL[trial % 4];
            // Implicit M+ construction or a non-decreasing function (also M+).
            let plus = if (trial / 4) % 2 == 0 {
                gen_implicit_m_plus(&c0)?
            } else {
                gen_monotone(&c0, Direction::Nondecreasing)?
            };
            let f = match variant.m_class() {
                crate::classes::MClass::Plus => plus,
                crate::classes::MClass::Minus => plus.negate(),
            };
            let g = gen_monotone(&c1, variant.g_direction())?;
            CaseInputs::new(inequality, [("f", f), ("g", g)]).with_variant(variant)
        }
        InequalityName::LevinSteckin => {
            CaseInputs::new(inequality, [("p", gen_ls_weight(&c0)?), ("phi", gen_convex(&c1)?)])
        }
        InequalityName::LsSymmetric => CaseInputs::new(
            inequality,
            [("p", gen_ls_weight(&c0)?), ("phi", gen_convex::<S>(&c1)?.symmetrize())],
        ),
        InequalityName::ClausingGeneral => CaseInputs::new(
            inequality,
            [
                ("p", gen_ls_weight(&c0)?),
                ("q", gen_admissible_q(&c1)?),
                ("phi", gen_concave_admissible_phi(&c2)?),
            ],
        ),
        InequalityName::ClausingClassic => CaseInputs::new(
            inequality,
            [("p", gen_ls_weight(&c0)?), ("phi", gen_concave_positive_phi(&c1)?)],
        ),
        InequalityName::HermiteHadamard => CaseInputs::new(inequality, [("f", gen_concave(&c0)?)]),
        InequalityName::Q0Sharpness => {
            CaseInputs::new(inequality, [("p", gen_ls_weight(&c0)?), ("q", gen_admissible_q(&c1)?)])
        }
    };
    Ok(case)
}

fn seed_for_trial(seed: u64, inequality: InequalityName, trial: usize) -> u64 {
    derive_seed(seed, &[inequality as u64, trial as u64])
}

struct Trial<S> {
    case: CaseInputs<S>,
    verdict: InequalityVerdict<S>,
}

/// Ordered reduction of per-trial verdicts into an aggregate plus stored cases.
fn aggregate<S: Scalar>(report: &mut RunReport, inequality: InequalityName, trials: &[Trial<S>], first_trial: usize) {
    let mut passes = 0;
    let mut hypothesis_failures = 0;
    let mut min_idx = 0;
    for (i, t) in trials.iter().enumerate() {
        if t.verdict.holds {
            passes += 1;
        } else {
            report.cases.push(CaseRecord::from_inputs(
                &t.case,
                "failure",
                Some(first_trial + i),
                Some(&t.verdict.margin),
            ));
        }
        if !t.verdict.hypotheses_hold() {
            hypothesis_failures += 1;
        }
        if t.verdict.margin < trials[min_idx].verdict.margin {
            min_idx = i;
        }
    }
    let min = &trials[min_idx];
    report.cases.push(CaseRecord::from_inputs(
        &min.case,
        "min_margin",
        Some(first_trial + min_idx),
        Some(&min.verdict.margin),
    ));
    let failures = trials.len() - passes;
    report.aggregates.push(Aggregate {
        inequality,
        trials: trials.len(),
        passes,
        failures,
        hypothesis_failures,
        min_margin: exact_string(&min.verdict.margin),
        min_margin_f64: min.verdict.margin.as_f64(),
        min_margin_trial: first_trial + min_idx,
        min_margin_case: report.cases.len() - 1,
    });
    if failures > 0 {
        report.mismatch(format!("{inequality}: {failures} of {} trials violated", trials.len()));
    }
    if hypothesis_failures > 0 {
        report.mismatch(format!("{inequality}: {hypothesis_failures} generated inputs failed a hypothesis"));
    }
}

fn evaluate_trial<S: Scalar>(checker: &Checker<S>, case: CaseInputs<S>) -> Result<Trial<S>, PlError> {
    let verdict = checker.evaluate(&case)?;
    Ok(Trial { case, verdict })
}

fn collect<S>(results: Vec<Result<Trial<S>, PlError>>) -> Result<Vec<Trial<S>>> {
    results
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(|e| CampaignError::Invalid(e.to_string()))
}

fn verify_generic<S: Scalar>(campaign: &Campaign, exec: Execution, report: &mut RunReport) -> Result<()> {
    let checker = checker::<S>(campaign);
    for &ineq in &campaign.inequalities {
        let results = map_indexed(exec, campaign.trials, |trial| {
            evaluate_trial(&checker, draw_case::<S>(ineq, &campaign.generator, campaign.seed, trial)?)
        });
        aggregate(report, ineq, &collect(results)?, 0);
    }
    Ok(())
}

fn sharpness_generic<S: Scalar>(campaign: &Campaign, exec: Execution, report: &mut RunReport) -> Result<()> {
    let checker = checker::<S>(campaign);
    let SharpnessSettings { q_count, p_count } = campaign.sharpness;
    let ineq = InequalityName::Q0Sharpness;
    // Trial k pairs weight k / (q_count + 1) with q number k % (q_count + 1);
    // the last q slot of each weight is the injected q0.
    let per_p = q_count + 1;
    let results = map_indexed(exec, p_count * per_p, |k| {
        let (pi, qi) = (k / per_p, k % per_p);
        let p_cfg = role_cfg(&campaign.generator, derive_seed(campaign.seed, &[0, pi as u64]), 0);
        let p = gen_ls_weight::<S>(&p_cfg)?;
        let q = if qi == q_count {
            PLFunction::q0()
        } else {
            gen_admissible_q::<S>(&role_cfg(&campaign.generator, derive_seed(campaign.seed, &[1, qi as u64]), 1))?
        };
        evaluate_trial(&checker, CaseInputs::new(ineq, [("p", p), ("q", q)]))
    });
    let trials = collect(results)?;
    let injected: Vec<&Trial<S>> = trials.iter().skip(q_count).step_by(per_p).collect();
    let injected_zero = injected
        .iter()
        .filter(|t| t.verdict.margin.abs() <= checker.verdict_tol)
        .count();
    aggregate(report, ineq, &trials, 0);
    if let Some(t) = injected.first() {
        report
            .cases
            .push(CaseRecord::from_inputs(&t.case, "injected_q0", Some(q_count), Some(&t.verdict.margin)));
    }
    if injected_zero != injected.len() {
        report.mismatch(format!(
            "q0 injection gave a zero margin in only {injected_zero} of {} weights",
            injected.len()
        ));
    }
    report.sharpness = Some(SharpnessSummary {
        p_count,
        q_count,
        injected: injected.len(),
        injected_zero,
    });
    Ok(())
}

/// Verification campaign over generated admissible inputs.
pub fn run_verify(campaign: &Campaign, exec: Execution) -> Result<RunReport> {
    let mut report = RunReport::new(campaign);
    match campaign.arithmetic {
        Arithmetic::Rational => verify_generic::<Exact>(campaign, exec, &mut report)?,
        Arithmetic::Float => verify_generic::<f64>(campaign, exec, &mut report)?,
    }
    Ok(report)
}

/// Injects `q = q0` next to random admissible `q` for several weights.
pub fn run_sharpness(campaign: &Campaign, exec: Execution) -> Result<RunReport> {
    let mut report = RunReport::new(campaign);
    match campaign.arithmetic {
        Arithmetic::Rational => sharpness_generic::<Exact>(campaign, exec, &mut report)?,
        Arithmetic::Float => sharpness_generic::<f64>(campaign, exec, &mut report)?,
    }
    Ok(report)
}

/// Expected search outcomes for the necessity suite. Entries without an
/// expectation are recorded only.
pub fn suite_expectation(inequality: InequalityName, dropped: Option<Hypothesis>) -> Option<bool> {
    match (inequality, dropped) {
        (_, None) => Some(false),
        (InequalityName::LevinSteckin, Some(Hypothesis::PSymmetric | Hypothesis::PNondecreasingHalf))
        | (InequalityName::ClausingGeneral, Some(Hypothesis::PhiEndpointSum)) => Some(true),
        _ => None,
    }
}

fn push_search(report: &mut RunReport, key: String, result: SearchResult, expect: Option<bool>) {
    let case = result.best_inputs.as_ref().map(|inputs| {
        let label = if result.violated { "violation" } else { "search_best" };
        report
            .cases
            .push(CaseRecord::from_inputs(inputs, label, None, result.exact_margin.as_ref()));
        report.cases.len() - 1
    });
    if let Some(expected) = expect {
        if expected != result.violated {
            let found = if result.violated { "found" } else { "did not find" };
            report.mismatch(format!("{key}: search {found} a violation"));
        }
    }
    report.searches.push(SearchEntry {
        key,
        inequality: result.inequality,
        dropped: result.dropped,
        status: if result.violated {
            SearchStatus::FoundViolation
        } else {
            SearchStatus::NoViolationFound
        },
        expect_violation: expect,
        best_margin: result.best_margin,
        exact_margin: result.exact_margin.as_ref().map(exact_string),
        iterations_used: result.iterations_used,
        seed: result.seed,
        case,
        trace: result.trace,
    });
}

/// Falsification: explicit problems if given, else the necessity suite.
pub fn run_falsify(campaign: &Campaign, exec: Execution) -> Result<RunReport> {
    let mut report = RunReport::new(campaign);
    let settings = &campaign.search;
    let tolerance = campaign.tolerance.unwrap_or(1e-9);
    if settings.problems.is_empty() {
        let suite = hypothesis_necessity_suite(settings.budget, campaign.seed, settings.n_breakpoints, exec)?;
        for (ineq, dropped) in crate::search::necessity_targets() {
            let key = suite_key(ineq, dropped);
            let result = suite[&key].clone();
            push_search(&mut report, key, result, suite_expectation(ineq, dropped));
        }
    } else {
        for (i, spec) in settings.problems.iter().enumerate() {
            let problem = SearchProblem {
                inequality: spec.inequality,
                dropped: spec.dropped.iter().copied().collect(),
                n_breakpoints: settings.n_breakpoints,
                budget: settings.budget,
                seed: derive_seed(campaign.seed, &[i as u64]),
                tolerance,
            };
            let key = format!(
                "{}/{}",
                spec.inequality,
                if spec.dropped.is_empty() {
                    "none".to_string()
                } else {
                    spec.dropped.iter().map(|h| h.as_str()).collect::<Vec<_>>().join("+")
                }
            );
            let result = minimize_margin_with(&problem, exec)?;
            push_search(&mut report, key, result, spec.expect_violation);
        }
    }
    Ok(report)
}

/// Re-evaluates a stored case in rational arithmetic.
pub fn replay_case(record: &CaseRecord) -> Result<(InequalityVerdict<Exact>, ReplayOutcome), PlError> {
    let inputs = record.to_inputs::<Exact>()?;
    let verdict = Checker::<Exact>::default().evaluate(&inputs)?;
    let stored = match &record.margin {
        Some(s) => Some(parse_exact(s).map_err(|reason| PlError::Record {
            field: "margin".into(),
            reason,
        })?),
        None => None,
    };
    let outcome = ReplayOutcome {
        inequality: verdict.name,
        lhs: exact_string(&verdict.lhs),
        rhs: exact_string(&verdict.rhs),
        margin: exact_string(&verdict.margin),
        margin_f64: verdict.margin.as_f64(),
        holds: verdict.holds,
        hypotheses: verdict
            .hypotheses
            .iter()
            .map(|h| HypothesisOutcome {
                hypothesis: h.hypothesis,
                holds: h.holds,
            })
            .collect(),
        stored_margin: record.margin.clone(),
        reproduced: stored.map(|m| m == verdict.margin),
    };
    Ok((verdict, outcome))
}

pub fn run_replay(campaign: &Campaign) -> Result<RunReport> {
    let path = campaign
        .case
        .as_deref()
        .ok_or_else(|| CampaignError::Invalid("replay mode needs a case file".into()))?;
    let record = CaseRecord::load(path)?;
    let (_, outcome) = replay_case(&record).map_err(|source| CampaignError::Case {
        path: path.to_path_buf(),
        source,
    })?;
    let mut report = RunReport::new(campaign);
    if outcome.reproduced == Some(false) {
        report.mismatch(format!(
            "replayed margin {} differs from stored {}",
            outcome.margin,
            record.margin.as_deref().unwrap_or_default()
        ));
    }
    report.replay = Some(outcome);
    report.cases.push(record);
    Ok(report)
}

/// Validates and runs a campaign in its configured mode.
pub fn execute(campaign: &Campaign, exec: Execution) -> Result<RunReport> {
    campaign.validate()?;
    let start = Instant::now();
    let mut report = match campaign.mode {
        Mode::Verify => run_verify(campaign, exec)?,
        Mode::Falsify => run_falsify(campaign, exec)?,
        Mode::Sharpness => run_sharpness(campaign, exec)?,
        Mode::Replay => run_replay(campaign)?,
    };
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}
