//! Adversarial margin minimization.
//!
//! A [`Projection`] maps a free parameter vector to inputs that satisfy every
//! active hypothesis by construction (sorted slopes, absolute-value
//! increments, mirroring, normalization). Dropped hypotheses become identity
//! maps on the corresponding parameters. The search runs random multistart
//! plus coordinate descent in float mode, then re-evaluates the best
//! candidate in exact rational arithmetic; only an exact negative margin
//! counts as a violation.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec::{map_indexed, Execution};
use crate::generators::derive_seed;
use crate::inequalities::{CaseInputs, ChebyshevVariant, Checker, Hypothesis, InequalityName, InequalityVerdict};
use crate::pl_function::{uniform_grid, PLFunction};
use crate::scalar::{Exact, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("search budget must be positive")]
    ZeroBudget,
    #[error("n_breakpoints must be at least 3, got {0}")]
    TooFewBreakpoints(usize),
    #[error("cannot project {inequality} with dropped {{{dropped}}}: {reason}")]
    Infeasible {
        inequality: InequalityName,
        dropped: String,
        reason: String,
    },
    #[error("the necessity suite needs a budget of at least 1000, got {0}")]
    BudgetTooSmall(usize),
}

/// Sup-norm cap applied to every projected input (except unit-integral `q`).
pub const SUP_NORM_CAP: i64 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchProblem {
    pub inequality: InequalityName,
    pub dropped: BTreeSet<Hypothesis>,
    pub n_breakpoints: usize,
    pub budget: usize,
    pub seed: u64,
    /// Float margins below `-tolerance` are re-checked exactly.
    pub tolerance: f64,
}

impl SearchProblem {
    pub fn new(inequality: InequalityName, budget: usize, seed: u64) -> Self {
        Self {
            inequality,
            dropped: BTreeSet::new(),
            n_breakpoints: 9,
            budget,
            seed,
            tolerance: 1e-9,
        }
    }

    pub fn dropping(mut self, h: Hypothesis) -> Self {
        self.dropped.insert(h);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub inequality: InequalityName,
    pub dropped: Vec<Hypothesis>,
    pub seed: u64,
    /// Minimum float margin over every evaluated candidate.
    pub best_margin: f64,
    /// Exact margin of the best candidate rebuilt in rational arithmetic.
    pub exact_margin: Option<Exact>,
    pub best_inputs: Option<CaseInputs<Exact>>,
    pub iterations_used: usize,
    pub violated: bool,
    /// `(iteration, margin)` at every improvement of the running minimum.
    pub trace: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Convex,
    Concave,
    Free,
}

/// Construction map for one input role.
#[derive(Debug, Clone, PartialEq)]
enum Family {
    Weight {
        symmetric: bool,
        nondecreasing: bool,
        nonnegative: bool,
    },
    AdmissibleQ {
        symmetric: bool,
        convex_half: bool,
        zero_at_zero: bool,
        unit_integral: bool,
        nonnegative: bool,
    },
    Phi {
        shape: Shape,
        symmetric: bool,
        endpoint_sum: bool,
        nonnegative: bool,
    },
    Monotone {
        active: bool,
    },
    MPlus {
        active: bool,
    },
}

/// Sequential reader over the parameter vector.
struct Params<'a, S> {
    values: &'a [S],
    pos: usize,
}

impl<S: Scalar> Params<'_, S> {
    fn next(&mut self) -> S {
        self.pos += 1;
        self.values[self.pos - 1].clone()
    }

    fn take(&mut self, n: usize) -> Vec<S> {
        (0..n).map(|_| self.next()).collect()
    }
}

fn sorted<S: Scalar>(mut v: Vec<S>, descending: bool) -> Vec<S> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite parameters"));
    if descending {
        v.reverse();
    }
    v
}

/// `k` points from `lo` to `hi` with gaps `1/4 + |r|`.
fn free_positions<S: Scalar>(params: &mut Params<'_, S>, lo: &S, hi: &S, k: usize) -> Vec<S> {
    let gaps: Vec<S> = params
        .take(k - 1)
        .into_iter()
        .map(|r| S::from_ratio(1, 4) + r.abs())
        .collect();
    let total = gaps.iter().fold(S::zero(), |acc, g| acc + g.clone());
    let width = hi.clone() - lo.clone();
    let mut xs = Vec::with_capacity(k);
    let mut acc = S::zero();
    xs.push(lo.clone());
    for g in &gaps[..k - 2] {
        acc = acc + g.clone();
        xs.push(lo.clone() + width.clone() * acc.clone() / total.clone());
    }
    xs.push(hi.clone());
    xs
}

fn cumulative<S: Scalar>(xs: &[S], start: S, slopes: &[S]) -> Vec<S> {
    let mut out = Vec::with_capacity(xs.len());
    out.push(start);
    for (i, s) in slopes.iter().enumerate() {
        let next = out[i].clone() + s.clone() * (xs[i + 1].clone() - xs[i].clone());
        out.push(next);
    }
    out
}

fn cap_sup_norm<S: Scalar>(f: PLFunction<S>) -> PLFunction<S> {
    let cap = S::from_int(SUP_NORM_CAP);
    let sup = f.sup_norm();
    if sup > cap {
        f.scale(&(cap / sup))
    } else {
        f
    }
}

fn nonneg_if<S: Scalar>(flag: bool, x: S) -> S {
    if flag {
        x.abs()
    } else {
        x
    }
}

impl Family {
    fn param_len(&self, n: usize) -> usize {
        let h = n / 2 + 1;
        match self {
            Self::Weight { symmetric, .. } => {
                if *symmetric {
                    h
                } else {
                    2 * (h - 1) + h + (h - 1)
                }
            }
            Self::AdmissibleQ {
                symmetric,
                unit_integral,
                ..
            } => {
                let base = if *symmetric { h } else { 2 * (h - 1) + h + (h - 1) };
                base + usize::from(!unit_integral)
            }
            Self::Phi { .. } | Self::Monotone { .. } => (n - 1) + n,
            Self::MPlus { .. } => (n - 1) + n + 1,
        }
    }

    /// Half-split grid: uniform and mirrored when symmetric, free otherwise.
    fn half_grids<S: Scalar>(symmetric: bool, params: &mut Params<'_, S>, h: usize) -> (Vec<S>, Vec<S>) {
        let (lo, mid, hi) = (S::zero(), S::half(), S::one());
        if symmetric {
            let left = uniform_grid(&lo, &mid, h).expect("nonempty half");
            let right = left.iter().rev().map(|x| hi.clone() - x.clone()).collect();
            (left, right)
        } else {
            let left = free_positions(params, &lo, &mid, h);
            let right = free_positions(params, &mid, &hi, h);
            (left, right)
        }
    }

    /// Joins the halves; `right_values` excludes the shared midpoint.
    fn join<S: Scalar>(left_x: Vec<S>, right_x: Vec<S>, left_v: Vec<S>, right_v: Vec<S>) -> Option<PLFunction<S>> {
        let mut xs = left_x;
        xs.extend(right_x.into_iter().skip(1));
        let mut vs = left_v;
        vs.extend(right_v);
        PLFunction::new(xs, vs).ok()
    }

    fn build<S: Scalar>(&self, params: &mut Params<'_, S>, n: usize) -> Option<PLFunction<S>> {
        let h = n / 2 + 1;
        match *self {
            Self::Weight {
                symmetric,
                nondecreasing,
                nonnegative,
            } => {
                let (left_x, right_x) = Self::half_grids(symmetric, params, h);
                let raw = params.take(h);
                let left_v = if nondecreasing {
                    let mut v = Vec::with_capacity(h);
                    v.push(nonneg_if(nonnegative, raw[0].clone()));
                    for r in &raw[1..] {
                        let next = v[v.len() - 1].clone() + r.abs();
                        v.push(next);
                    }
                    v
                } else {
                    raw.into_iter().map(|r| nonneg_if(nonnegative, r)).collect()
                };
                let right_v = if symmetric {
                    left_v.iter().rev().skip(1).cloned().collect()
                } else {
                    params.take(h - 1).into_iter().map(|r| nonneg_if(nonnegative, r)).collect()
                };
                Self::join(left_x, right_x, left_v, right_v).map(cap_sup_norm)
            }
            Self::AdmissibleQ {
                symmetric,
                convex_half,
                zero_at_zero,
                unit_integral,
                nonnegative,
            } => {
                let (left_x, right_x) = Self::half_grids(symmetric, params, h);
                let raw = params.take(h);
                let start = if zero_at_zero {
                    S::zero()
                } else {
                    nonneg_if(nonnegative, raw[0].clone())
                };
                let rest: Vec<S> = raw[1..].iter().map(|r| nonneg_if(nonnegative, r.clone())).collect();
                let left_v = if convex_half {
                    cumulative(&left_x, start, &sorted(rest, false))
                } else {
                    std::iter::once(start).chain(rest).collect()
                };
                let right_v = if symmetric {
                    left_v.iter().rev().skip(1).cloned().collect()
                } else {
                    params.take(h - 1).into_iter().map(|r| nonneg_if(nonnegative, r)).collect()
                };
                let q = Self::join(left_x, right_x, left_v, right_v)?;
                if unit_integral {
                    let total = q.integrate();
                    if total < S::from_ratio(1, 1_000_000) {
                        return None;
                    }
                    Some(q.scale(&(S::one() / total)))
                } else {
                    let s = params.next().abs();
                    Some(cap_sup_norm(q.scale(&s)))
                }
            }
            Self::Phi {
                shape,
                symmetric,
                endpoint_sum,
                nonnegative,
            } => {
                let xs = free_positions(params, &S::zero(), &S::one(), n);
                let raw = params.take(n);
                let values = match shape {
                    Shape::Free => raw,
                    Shape::Convex | Shape::Concave => cumulative(
                        &xs,
                        raw[0].clone(),
                        &sorted(raw[1..].to_vec(), shape == Shape::Concave),
                    ),
                };
                let mut f = PLFunction::new(xs, values).ok()?;
                if symmetric {
                    f = f.symmetrize();
                }
                if endpoint_sum {
                    let k = f.len();
                    let sum = f.values()[0].clone() + f.values()[k - 1].clone();
                    if sum.is_negative() {
                        f = f.add_constant(&(-sum * S::half()));
                    }
                }
                if nonnegative {
                    let low = f.values().iter().cloned().fold(S::zero(), S::min_of);
                    f = f.add_constant(&-low);
                }
                Some(cap_sup_norm(f))
            }
            Self::Monotone { active } => {
                let xs = free_positions(params, &S::zero(), &S::one(), n);
                let raw = params.take(n);
                let values = if active {
                    let slopes: Vec<S> = raw[1..].iter().map(|r| r.abs()).collect();
                    let mut v = Vec::with_capacity(n);
                    v.push(raw[0].clone());
                    for s in slopes {
                        let next = v[v.len() - 1].clone() + s;
                        v.push(next);
                    }
                    v
                } else {
                    raw
                };
                PLFunction::new(xs, values).ok().map(cap_sup_norm)
            }
            Self::MPlus { active } => {
                let xs = free_positions(params, &S::zero(), &S::one(), n);
                let raw = params.take(n);
                let extra = params.next().abs();
                if !active {
                    return PLFunction::new(xs, raw).ok().map(cap_sup_norm);
                }
                let f = PLFunction::new(xs.clone(), cumulative(&xs, raw[0].clone(), &sorted(raw[1..].to_vec(), false)))
                    .ok()?;
                let f = f.add_constant(&-f.mean());
                let slope = S::max_of(S::zero(), f.values()[0].clone() / S::half()) + extra;
                Some(cap_sup_norm(f.add_linear(&slope, &S::half())))
            }
        }
    }
}

/// Hypotheses that can be dropped for each inequality.
pub fn droppable(inequality: InequalityName) -> &'static [Hypothesis] {
    use Hypothesis::*;
    match inequality {
        InequalityName::LevinSteckin => &[PSymmetric, PNondecreasingHalf, PhiConvex],
        InequalityName::LsSymmetric => &[PSymmetric, PNondecreasingHalf, PhiConvex, PhiSymmetric],
        InequalityName::ClausingGeneral => &[
            PNonnegative,
            PSymmetric,
            PNondecreasingHalf,
            QNonnegative,
            QSymmetric,
            QConvexHalf,
            QZeroAtZero,
            QUnitIntegral,
            PhiConcave,
            PhiEndpointSum,
        ],
        InequalityName::ClausingClassic => &[
            PNonnegative,
            PSymmetric,
            PNondecreasingHalf,
            PhiConcave,
            PhiEndpointSum,
            PhiNonnegative,
        ],
        InequalityName::Q0Sharpness => &[
            PNonnegative,
            PSymmetric,
            PNondecreasingHalf,
            QNonnegative,
            QSymmetric,
            QConvexHalf,
            QZeroAtZero,
            QUnitIntegral,
        ],
        InequalityName::Chebyshev => &[FMonotone, GMonotone],
        InequalityName::ChebyshevM => &[FMClass, GMonotone],
        InequalityName::HermiteHadamard => &[FConcave],
    }
}

/// Parameter-to-input map for one inequality with some hypotheses dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    inequality: InequalityName,
    n_breakpoints: usize,
    roles: Vec<(&'static str, Family)>,
}

impl Projection {
    pub fn new(
        inequality: InequalityName,
        dropped: &BTreeSet<Hypothesis>,
        n_breakpoints: usize,
    ) -> Result<Self, SearchError> {
        use Hypothesis::*;
        if n_breakpoints < 3 {
            return Err(SearchError::TooFewBreakpoints(n_breakpoints));
        }
        let infeasible = |reason: String| SearchError::Infeasible {
            inequality,
            dropped: dropped.iter().map(|h| h.as_str()).collect::<Vec<_>>().join(", "),
            reason,
        };
        let allowed = droppable(inequality);
        if let Some(h) = dropped.iter().find(|h| !allowed.contains(h)) {
            let names: Vec<_> = allowed.iter().map(|h| h.as_str()).collect();
            return Err(infeasible(format!(
                "{h} is not a hypothesis of {inequality} (droppable: {})",
                names.join(", ")
            )));
        }
        if inequality == InequalityName::ClausingClassic
            && dropped.contains(&PhiEndpointSum)
            && !dropped.contains(&PhiNonnegative)
        {
            return Err(infeasible("phi_endpoint_sum is implied by the active phi_nonnegative".into()));
        }
        let on = |h: Hypothesis| !dropped.contains(&h);
        let weight = |nonnegative: bool| Family::Weight {
            symmetric: on(PSymmetric),
            nondecreasing: on(PNondecreasingHalf),
            nonnegative: nonnegative && on(PNonnegative),
        };
        let q = Family::AdmissibleQ {
            symmetric: on(QSymmetric),
            convex_half: on(QConvexHalf),
            zero_at_zero: on(QZeroAtZero),
            unit_integral: on(QUnitIntegral),
            nonnegative: on(QNonnegative),
        };
        let convex_phi = |symmetric: bool| Family::Phi {
            shape: if on(PhiConvex) { Shape::Convex } else { Shape::Free },
            symmetric,
            endpoint_sum: false,
            nonnegative: false,
        };
        let concave_phi = |nonnegative: bool| Family::Phi {
            shape: if on(PhiConcave) { Shape::Concave } else { Shape::Free },
            symmetric: false,
            endpoint_sum: on(PhiEndpointSum),
            nonnegative,
        };
        let roles = match inequality {
            InequalityName::LevinSteckin => vec![("p", weight(false)), ("phi", convex_phi(false))],
            InequalityName::LsSymmetric => vec![("p", weight(false)), ("phi", convex_phi(on(PhiSymmetric)))],
            InequalityName::ClausingGeneral => vec![("p", weight(true)), ("q", q), ("phi", concave_phi(false))],
            InequalityName::ClausingClassic => vec![("p", weight(true)), ("phi", concave_phi(on(PhiNonnegative)))],
            InequalityName::Q0Sharpness => vec![("p", weight(true)), ("q", q)],
            InequalityName::Chebyshev => vec![
                ("f", Family::Monotone { active: on(FMonotone) }),
                ("g", Family::Monotone { active: on(GMonotone) }),
            ],
            InequalityName::ChebyshevM => vec![
                ("f", Family::MPlus { active: on(FMClass) }),
                ("g", Family::Monotone { active: on(GMonotone) }),
            ],
            InequalityName::HermiteHadamard => vec![(
                "f",
                Family::Phi {
                    shape: if on(FConcave) { Shape::Concave } else { Shape::Free },
                    symmetric: false,
                    endpoint_sum: false,
                    nonnegative: false,
                },
            )],
        };
        // Odd counts keep 1/2 on every half-split grid.
        let n_breakpoints = n_breakpoints | 1;
        Ok(Self {
            inequality,
            n_breakpoints,
            roles,
        })
    }

    pub fn param_len(&self) -> usize {
        self.roles.iter().map(|(_, f)| f.param_len(self.n_breakpoints)).sum()
    }

    /// `None` when the candidate is degenerate (for example a `q` whose
    /// integral is too small to normalize).
    pub fn build<S: Scalar>(&self, params: &[S]) -> Option<CaseInputs<S>> {
        assert_eq!(params.len(), self.param_len(), "parameter vector length");
        let mut reader = Params { values: params, pos: 0 };
        let mut functions = Vec::with_capacity(self.roles.len());
        for (role, family) in &self.roles {
            functions.push((*role, family.build(&mut reader, self.n_breakpoints)?));
        }
        let mut case = CaseInputs::new(self.inequality, functions);
        if self.inequality == InequalityName::ChebyshevM {
            case = case.with_variant(ChebyshevVariant::PlusNondecreasing);
        }
        Some(case)
    }

    pub fn evaluate<S: Scalar>(&self, checker: &Checker<S>, params: &[S]) -> Option<InequalityVerdict<S>> {
        let case = self.build(params)?;
        checker.evaluate(&case).ok()
    }

    /// Float margin, `+inf` for degenerate candidates.
    fn margin_f64(&self, checker: &Checker<f64>, params: &[f64]) -> f64 {
        match self.evaluate(checker, params) {
            Some(v) if v.margin.is_finite() => v.margin,
            _ => f64::INFINITY,
        }
    }
}

struct RestartOutcome {
    best_margin: f64,
    best_params: Vec<f64>,
    evaluations: usize,
    trace: Vec<(usize, f64)>,
}

fn run_restart(proj: &Projection, seed: u64, budget: usize) -> RestartOutcome {
    const INITIAL_STEP: f64 = 1.0;
    const MIN_STEP: f64 = 1e-7;
    let checker = Checker::<f64>::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = proj.param_len();
    let mut out = RestartOutcome {
        best_margin: f64::INFINITY,
        best_params: vec![0.0; dim],
        evaluations: 0,
        trace: Vec::new(),
    };
    let record = |out: &mut RestartOutcome, m: f64, x: &[f64]| {
        out.evaluations += 1;
        if m < out.best_margin {
            out.best_margin = m;
            out.best_params = x.to_vec();
            out.trace.push((out.evaluations, m));
        }
    };
    while out.evaluations < budget {
        let mut x: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut fx = proj.margin_f64(&checker, &x);
        record(&mut out, fx, &x);
        let mut step = INITIAL_STEP;
        while out.evaluations < budget && step > MIN_STEP {
            let mut improved = false;
            'coords: for i in 0..dim {
                for sign in [1.0, -1.0] {
                    if out.evaluations >= budget {
                        break 'coords;
                    }
                    let mut y = x.clone();
                    y[i] += sign * step;
                    let fy = proj.margin_f64(&checker, &y);
                    record(&mut out, fy, &y);
                    if fy < fx {
                        x = y;
                        fx = fy;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
    out
}

/// Number of independent restarts for a budget.
fn restart_count(budget: usize) -> usize {
    (budget / 500).clamp(1, 32)
}

pub fn minimize_margin(problem: &SearchProblem) -> Result<SearchResult, SearchError> {
    minimize_margin_with(problem, Execution::default())
}

pub fn minimize_margin_with(problem: &SearchProblem, exec: Execution) -> Result<SearchResult, SearchError> {
    if problem.budget == 0 {
        return Err(SearchError::ZeroBudget);
    }
    let proj = Projection::new(problem.inequality, &problem.dropped, problem.n_breakpoints)?;
    let restarts = restart_count(problem.budget);
    let share = |r: usize| problem.budget / restarts + usize::from(r < problem.budget % restarts);
    let outcomes = map_indexed(exec, restarts, |r| {
        run_restart(&proj, derive_seed(problem.seed, &[r as u64]), share(r))
    });

    // Ordered merge: the result is independent of completion order.
    let mut best: Option<&RestartOutcome> = None;
    let mut trace = Vec::new();
    let mut offset = 0;
    let mut running = f64::INFINITY;
    for o in &outcomes {
        for &(it, m) in &o.trace {
            if m < running {
                running = m;
                trace.push((offset + it, m));
            }
        }
        offset += o.evaluations;
        if best.is_none_or(|b| o.best_margin < b.best_margin) {
            best = Some(o);
        }
    }
    let best = best.expect("at least one restart");

    let mut exact_margin = None;
    let mut best_inputs = None;
    if best.best_margin.is_finite() {
        let exact_params: Vec<Exact> = best
            .best_params
            .iter()
            .map(|x| Exact::from_f64(*x).expect("finite parameter"))
            .collect();
        if let Some(case) = proj.build::<Exact>(&exact_params) {
            exact_margin = Checker::<Exact>::default().evaluate(&case).ok().map(|v| v.margin);
            best_inputs = Some(case);
        }
    }
    let violated = best.best_margin < -problem.tolerance && exact_margin.as_ref().is_some_and(|m| m.is_negative());
    Ok(SearchResult {
        inequality: problem.inequality,
        dropped: problem.dropped.iter().copied().collect(),
        seed: problem.seed,
        best_margin: best.best_margin,
        exact_margin,
        best_inputs,
        iterations_used: offset,
        violated,
        trace,
    })
}

/// The hypotheses probed by the necessity suite, per inequality.
pub fn necessity_targets() -> Vec<(InequalityName, Option<Hypothesis>)> {
    let mut out = Vec::new();
    for ineq in [InequalityName::LevinSteckin, InequalityName::ClausingGeneral] {
        out.push((ineq, None));
        out.extend(droppable(ineq).iter().map(|h| (ineq, Some(*h))));
    }
    out
}

/// Suite key such as `levin_steckin/p_symmetric` or `clausing_general/none`.
pub fn suite_key(inequality: InequalityName, dropped: Option<Hypothesis>) -> String {
    format!("{}/{}", inequality, dropped.map_or("none", Hypothesis::as_str))
}

/// Runs [`minimize_margin`] once per single dropped hypothesis of the
/// Levin-Stečkin and generalized Clausing inequalities, plus once with
/// nothing dropped for each.
pub fn hypothesis_necessity_suite(
    budget: usize,
    seed: u64,
    n_breakpoints: usize,
    exec: Execution,
) -> Result<BTreeMap<String, SearchResult>, SearchError> {
    if budget < 1000 {
        return Err(SearchError::BudgetTooSmall(budget));
    }
    let mut out = BTreeMap::new();
    for (i, (ineq, dropped)) in necessity_targets().into_iter().enumerate() {
        let mut problem = SearchProblem::new(ineq, budget, derive_seed(seed, &[i as u64]));
        problem.n_breakpoints = n_breakpoints;
        if let Some(h) = dropped {
            problem.dropped.insert(h);
        }
        out.insert(suite_key(ineq, dropped), minimize_margin_with(&problem, exec)?);
    }
    Ok(out)
}
