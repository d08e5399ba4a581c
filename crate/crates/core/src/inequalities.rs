//! One checker per inequality. Each validates its hypotheses through
//! [`crate::classes`], computes both sides with closed-form integrals and
//! returns an [`InequalityVerdict`].
//!
//! Hypothesis failures are recorded but never short-circuit evaluation: the
//! falsification workflow needs margins for inadmissible inputs too.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classes::{
    classify_m, is_concave, is_convex, is_monotone_on, is_nonnegative, is_symmetric, left_half, ClassReport,
    Direction, MClass, MWitness,
};
use crate::error::{PlError, Result};
use crate::pl_function::PLFunction;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityName {
    Chebyshev,
    ChebyshevM,
    LevinSteckin,
    LsSymmetric,
    ClausingGeneral,
    ClausingClassic,
    HermiteHadamard,
    Q0Sharpness,
}

impl InequalityName {
    pub const ALL: [Self; 8] = [
        Self::Chebyshev,
        Self::ChebyshevM,
        Self::LevinSteckin,
        Self::LsSymmetric,
        Self::ClausingGeneral,
        Self::ClausingClassic,
        Self::HermiteHadamard,
        Self::Q0Sharpness,
    ];

    /// The checkers whose margin is nonnegative on admissible inputs.
    pub const NONNEGATIVE: [Self; 6] = [
        Self::LevinSteckin,
        Self::Chebyshev,
        Self::ChebyshevM,
        Self::ClausingGeneral,
        Self::ClausingClassic,
        Self::Q0Sharpness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Chebyshev => "chebyshev",
            Self::ChebyshevM => "chebyshev_m",
            Self::LevinSteckin => "levin_steckin",
            Self::LsSymmetric => "ls_symmetric",
            Self::ClausingGeneral => "clausing_general",
            Self::ClausingClassic => "clausing_classic",
            Self::HermiteHadamard => "hermite_hadamard",
            Self::Q0Sharpness => "q0_sharpness",
        }
    }

    /// Input roles, in argument order.
    pub fn roles(self) -> &'static [&'static str] {
        match self {
            Self::Chebyshev | Self::ChebyshevM => &["f", "g"],
            Self::LevinSteckin | Self::LsSymmetric | Self::ClausingClassic => &["p", "phi"],
            Self::ClausingGeneral => &["p", "q", "phi"],
            Self::HermiteHadamard => &["f"],
            Self::Q0Sharpness => &["p", "q"],
        }
    }
}

impl fmt::Display for InequalityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| format!("unknown inequality `{s}`"))
    }
}

/// Which pairing of M-class and monotonicity the generalized Chebyshev check
/// assumes. The last two are the toggled cases, where the product mean is
/// expected to be at most the product of means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChebyshevVariant {
    #[default]
    PlusNondecreasing,
    MinusNonincreasing,
    PlusNonincreasing,
    MinusNondecreasing,
}

impl ChebyshevVariant {
    pub const ALL: [Self; 4] = [
        Self::PlusNondecreasing,
        Self::MinusNonincreasing,
        Self::PlusNonincreasing,
        Self::MinusNondecreasing,
    ];

    pub fn m_class(self) -> MClass {
        match self {
            Self::PlusNondecreasing | Self::PlusNonincreasing => MClass::Plus,
            Self::MinusNonincreasing | Self::MinusNondecreasing => MClass::Minus,
        }
    }

    pub fn g_direction(self) -> Direction {
        match self {
            Self::PlusNondecreasing | Self::MinusNondecreasing => Direction::Nondecreasing,
            Self::MinusNonincreasing | Self::PlusNonincreasing => Direction::Nonincreasing,
        }
    }

    pub fn is_toggled(self) -> bool {
        matches!(self, Self::PlusNonincreasing | Self::MinusNondecreasing)
    }
}

/// Named hypotheses of the checked inequalities. The same names are used to
/// drop constraints in the falsification search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    PSymmetric,
    PNondecreasingHalf,
    PNonnegative,
    PhiConvex,
    PhiConcave,
    PhiSymmetric,
    PhiEndpointSum,
    PhiNonnegative,
    PhiPositiveIntegral,
    QSymmetric,
    QConvexHalf,
    QZeroAtZero,
    QUnitIntegral,
    QNonnegative,
    FMonotone,
    FMClass,
    FConcave,
    GMonotone,
}

impl Hypothesis {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PSymmetric => "p_symmetric",
            Self::PNondecreasingHalf => "p_nondecreasing_half",
            Self::PNonnegative => "p_nonnegative",
            Self::PhiConvex => "phi_convex",
            Self::PhiConcave => "phi_concave",
            Self::PhiSymmetric => "phi_symmetric",
            Self::PhiEndpointSum => "phi_endpoint_sum",
            Self::PhiNonnegative => "phi_nonnegative",
            Self::PhiPositiveIntegral => "phi_positive_integral",
            Self::QSymmetric => "q_symmetric",
            Self::QConvexHalf => "q_convex_half",
            Self::QZeroAtZero => "q_zero_at_zero",
            Self::QUnitIntegral => "q_unit_integral",
            Self::QNonnegative => "q_nonnegative",
            Self::FMonotone => "f_monotone",
            Self::FMClass => "f_m_class",
            Self::FConcave => "f_concave",
            Self::GMonotone => "g_monotone",
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Hypothesis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown hypothesis `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence<S> {
    Class(ClassReport<S>),
    M(MWitness<S>),
    /// A scalar condition such as `q(0) = 0`; the value is the quantity tested.
    Value(S),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport<S> {
    pub hypothesis: Hypothesis,
    pub holds: bool,
    pub evidence: Evidence<S>,
}

impl<S: Scalar> HypothesisReport<S> {
    fn class(hypothesis: Hypothesis, report: ClassReport<S>) -> Self {
        Self {
            hypothesis,
            holds: report.holds,
            evidence: Evidence::Class(report),
        }
    }

    fn value(hypothesis: Hypothesis, holds: bool, value: S) -> Self {
        Self {
            hypothesis,
            holds,
            evidence: Evidence::Value(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityVerdict<S> {
    pub name: InequalityName,
    pub lhs: S,
    pub rhs: S,
    /// Oriented so admissible inputs give a nonnegative value.
    pub margin: S,
    pub holds: bool,
    pub tolerance: S,
    pub hypotheses: Vec<HypothesisReport<S>>,
    /// Auxiliary quantities (`k`, half-interval integrals, cross-checks).
    pub details: Vec<(&'static str, S)>,
}

impl<S: Scalar> InequalityVerdict<S> {
    pub fn detail(&self, key: &str) -> Option<&S> {
        self.details.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn hypothesis(&self, h: Hypothesis) -> Option<&HypothesisReport<S>> {
        self.hypotheses.iter().find(|r| r.hypothesis == h)
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|r| r.holds)
    }

    pub fn failed_hypotheses(&self) -> Vec<Hypothesis> {
        self.hypotheses.iter().filter(|r| !r.holds).map(|r| r.hypothesis).collect()
    }
}

/// Tolerances for hypothesis predicates and for the verdict itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Checker<S> {
    pub class_tol: S,
    pub verdict_tol: S,
}

impl<S: Scalar> Default for Checker<S> {
    fn default() -> Self {
        Self {
            class_tol: S::class_tol(),
            verdict_tol: S::verdict_tol(),
        }
    }
}

fn require_unit<S: Scalar>(fs: &[&PLFunction<S>]) -> Result<()> {
    for f in fs {
        if !f.is_unit_domain() {
            return Err(PlError::UnitDomainRequired(f.domain_lo().as_f64(), f.domain_hi().as_f64()));
        }
    }
    Ok(())
}

impl<S: Scalar> Checker<S> {
    pub fn new(class_tol: S, verdict_tol: S) -> Self {
        Self { class_tol, verdict_tol }
    }

    fn verdict(
        &self,
        name: InequalityName,
        lhs: S,
        rhs: S,
        margin: S,
        hypotheses: Vec<HypothesisReport<S>>,
        details: Vec<(&'static str, S)>,
    ) -> InequalityVerdict<S> {
        let holds = margin >= -self.verdict_tol.clone();
        InequalityVerdict {
            name,
            lhs,
            rhs,
            margin,
            holds,
            tolerance: self.verdict_tol.clone(),
            hypotheses,
            details,
        }
    }

    fn symmetric(&self, h: Hypothesis, f: &PLFunction<S>) -> HypothesisReport<S> {
        HypothesisReport::class(h, is_symmetric(f, &self.class_tol))
    }

    fn nondecreasing_half(&self, h: Hypothesis, f: &PLFunction<S>) -> Result<HypothesisReport<S>> {
        let rep = is_monotone_on(f, &left_half(f), Direction::Nondecreasing, &self.class_tol)?;
        Ok(HypothesisReport::class(h, rep))
    }

    fn nonnegative(&self, h: Hypothesis, f: &PLFunction<S>) -> HypothesisReport<S> {
        HypothesisReport::class(h, is_nonnegative(f, &self.class_tol))
    }

    fn weight_reports(&self, p: &PLFunction<S>, nonneg: bool) -> Result<Vec<HypothesisReport<S>>> {
        let mut out = Vec::with_capacity(3);
        if nonneg {
            out.push(self.nonnegative(Hypothesis::PNonnegative, p));
        }
        out.push(self.symmetric(Hypothesis::PSymmetric, p));
        out.push(self.nondecreasing_half(Hypothesis::PNondecreasingHalf, p)?);
        Ok(out)
    }

    fn admissible_q_reports(&self, q: &PLFunction<S>) -> Result<Vec<HypothesisReport<S>>> {
        let q_at_lo = q.values()[0].clone();
        let total = q.integrate();
        Ok(vec![
            self.nonnegative(Hypothesis::QNonnegative, q),
            self.symmetric(Hypothesis::QSymmetric, q),
            HypothesisReport::class(Hypothesis::QConvexHalf, is_convex(q, &left_half(q), &self.class_tol)?),
            HypothesisReport::value(Hypothesis::QZeroAtZero, q_at_lo.abs() <= self.class_tol, q_at_lo),
            HypothesisReport::value(
                Hypothesis::QUnitIntegral,
                (total.clone() - S::one()).abs() <= self.class_tol,
                total,
            ),
        ])
    }

    /// Classical Chebyshev: comonotone `f, g` give `mean(fg) >= mean(f) mean(g)`,
    /// anti-monotone pairs reverse it. The orientation is read off the inputs.
    pub fn chebyshev(&self, f: &PLFunction<S>, g: &PLFunction<S>) -> Result<InequalityVerdict<S>> {
        f.same_domain(g)?;
        let dom = f.domain();
        let tol = &self.class_tol;
        let f_up = is_monotone_on(f, &dom, Direction::Nondecreasing, tol)?;
        let f_down = is_monotone_on(f, &dom, Direction::Nonincreasing, tol)?;
        let g_up = is_monotone_on(g, &dom, Direction::Nondecreasing, tol)?;
        let g_down = is_monotone_on(g, &dom, Direction::Nonincreasing, tol)?;
        let opposite = (f_up.holds && !f_down.holds && g_down.holds && !g_up.holds)
            || (f_down.holds && !f_up.holds && g_up.holds && !g_down.holds);
        let (f_rep, g_rep) = match (f_up.holds || !f_down.holds, opposite) {
            (true, false) => (f_up, g_up),
            (true, true) => (f_up, g_down),
            (false, false) => (f_down, g_down),
            (false, true) => (f_down, g_up),
        };
        let width = f.width();
        let lhs = f.integrate_product(g)? / width;
        let rhs = f.mean() * g.mean();
        let margin = if opposite {
            rhs.clone() - lhs.clone()
        } else {
            lhs.clone() - rhs.clone()
        };
        let details = vec![("opposite_orientation", if opposite { S::one() } else { S::zero() })];
        Ok(self.verdict(
            InequalityName::Chebyshev,
            lhs,
            rhs,
            margin,
            vec![
                HypothesisReport::class(Hypothesis::FMonotone, f_rep),
                HypothesisReport::class(Hypothesis::GMonotone, g_rep),
            ],
            details,
        ))
    }

    /// Chebyshev with `f` only required to lie in M⁺ (or M⁻).
    pub fn chebyshev_m(
        &self,
        f: &PLFunction<S>,
        g: &PLFunction<S>,
        variant: ChebyshevVariant,
    ) -> Result<InequalityVerdict<S>> {
        f.same_domain(g)?;
        let witness = classify_m(f, variant.m_class(), &self.class_tol);
        let g_rep = is_monotone_on(g, &g.domain(), variant.g_direction(), &self.class_tol)?;
        let lhs = f.integrate_product(g)? / f.width();
        let rhs = f.mean() * g.mean();
        let margin = if variant.is_toggled() {
            rhs.clone() - lhs.clone()
        } else {
            lhs.clone() - rhs.clone()
        };
        let f_rep = HypothesisReport {
            hypothesis: Hypothesis::FMClass,
            holds: witness.in_class,
            evidence: Evidence::M(witness),
        };
        Ok(self.verdict(
            InequalityName::ChebyshevM,
            lhs,
            rhs,
            margin,
            vec![f_rep, HypothesisReport::class(Hypothesis::GMonotone, g_rep)],
            Vec::new(),
        ))
    }

    /// `∫ p φ <= ∫ p · ∫ φ` for symmetric `p` non-decreasing on `[0, 1/2]`
    /// and convex `φ`.
    pub fn levin_steckin(&self, p: &PLFunction<S>, phi: &PLFunction<S>) -> Result<InequalityVerdict<S>> {
        require_unit(&[p, phi])?;
        let lhs = p.integrate_product(phi)?;
        let rhs = p.integrate() * phi.integrate();
        let margin = rhs.clone() - lhs.clone();
        let mut hyps = self.weight_reports(p, false)?;
        hyps.push(HypothesisReport::class(
            Hypothesis::PhiConvex,
            is_convex(phi, &phi.domain(), &self.class_tol)?,
        ));
        Ok(self.verdict(InequalityName::LevinSteckin, lhs, rhs, margin, hyps, Vec::new()))
    }

    /// Levin-Stečkin restricted to symmetric `φ`, with the half-interval
    /// identities `∫p∫φ = 4 ∫₀^½p ∫₀^½φ` and `∫pφ = 2 ∫₀^½ pφ` recorded as
    /// `chain_rhs` / `chain_lhs`.
    pub fn ls_symmetric_lemma(&self, p: &PLFunction<S>, phi: &PLFunction<S>) -> Result<InequalityVerdict<S>> {
        let mut v = self.levin_steckin(p, phi)?;
        v.name = InequalityName::LsSymmetric;
        v.hypotheses.push(self.symmetric(Hypothesis::PhiSymmetric, phi));
        let (lo, mid) = left_half(p);
        let p_half = p.restrict(&lo, &mid)?;
        let phi_half = phi.restrict(&lo, &mid)?;
        let half_p = p_half.integrate();
        let half_phi = phi_half.integrate();
        let half_product = p_half.integrate_product(&phi_half)?;
        let chain_rhs = S::from_int(4) * half_p.clone() * half_phi.clone();
        let chain_lhs = S::from_int(2) * half_product.clone();
        v.details = vec![
            ("half_p", half_p),
            ("half_phi", half_phi),
            ("half_product", half_product),
            ("chain_rhs_residual", v.rhs.clone() - chain_rhs.clone()),
            ("chain_lhs_residual", v.lhs.clone() - chain_lhs.clone()),
            ("chain_rhs", chain_rhs),
            ("chain_lhs", chain_lhs),
        ];
        Ok(v)
    }

    /// `∫ p φ <= ∫ φ · ∫ p q` for admissible `p`, `q` and concave `φ` with
    /// `φ(0) + φ(1) >= 0`.
    ///
    /// Details: `k = ∫φ`, `pq = ∫pq`, `endpoint_average = (φ(0)+φ(1))/2`
    /// (a lower bound for `k` when `φ` is concave). When `p`, `q` and `φ` are
    /// all symmetric the margin is also computed as `2 ∫₀^½ (kq − φ) p`
    /// (`half_form_doubled`) and the difference stored as
    /// `cross_check_residual`.
    pub fn clausing_general(
        &self,
        p: &PLFunction<S>,
        q: &PLFunction<S>,
        phi: &PLFunction<S>,
    ) -> Result<InequalityVerdict<S>> {
        require_unit(&[p, q, phi])?;
        let lhs = p.integrate_product(phi)?;
        let k = phi.integrate();
        let pq = p.integrate_product(q)?;
        let rhs = k.clone() * pq.clone();
        let margin = rhs.clone() - lhs.clone();

        let mut hyps = self.weight_reports(p, true)?;
        hyps.extend(self.admissible_q_reports(q)?);
        hyps.push(HypothesisReport::class(
            Hypothesis::PhiConcave,
            is_concave(phi, &phi.domain(), &self.class_tol)?,
        ));
        let n = phi.len();
        let end_sum = phi.values()[0].clone() + phi.values()[n - 1].clone();
        hyps.push(HypothesisReport::value(
            Hypothesis::PhiEndpointSum,
            end_sum >= -self.class_tol.clone(),
            end_sum.clone(),
        ));

        let mut details = vec![("k", k.clone()), ("pq", pq), ("endpoint_average", end_sum * S::half())];
        let all_symmetric = [p, q, phi].iter().all(|f| is_symmetric(f, &self.class_tol).holds);
        if all_symmetric {
            let (lo, mid) = left_half(p);
            let integrand = PLFunction::linear_combine(&k, q, &-S::one(), phi)?;
            let half = integrand.restrict(&lo, &mid)?.integrate_product(&p.restrict(&lo, &mid)?)?;
            let doubled = S::from_int(2) * half;
            details.push(("cross_check_residual", margin.clone() - doubled.clone()));
            details.push(("half_form_doubled", doubled));
        }
        Ok(self.verdict(InequalityName::ClausingGeneral, lhs, rhs, margin, hyps, details))
    }

    /// The general check with `q = 4 min(x, 1 − x)`, plus the positivity
    /// hypotheses on `φ` (nonnegative with positive integral) appended after
    /// the general ones.
    pub fn clausing_classic(&self, p: &PLFunction<S>, phi: &PLFunction<S>) -> Result<InequalityVerdict<S>> {
        let mut v = self.clausing_general(p, &PLFunction::q0(), phi)?;
        v.name = InequalityName::ClausingClassic;
        v.hypotheses.push(self.nonnegative(Hypothesis::PhiNonnegative, phi));
        let k = phi.integrate();
        v.hypotheses
            .push(HypothesisReport::value(Hypothesis::PhiPositiveIntegral, k.is_positive(), k));
        Ok(v)
    }

    /// For concave `f`: `f(mid) >= mean(f) >= (f(a) + f(b)) / 2`. The margin
    /// is the smaller of the two gaps.
    pub fn hermite_hadamard(&self, f: &PLFunction<S>) -> Result<InequalityVerdict<S>> {
        let concave = is_concave(f, &f.domain(), &self.class_tol)?;
        let mean = f.mean();
        let at_mid = f.eval(&f.midpoint())?;
        let n = f.len();
        let end_avg = (f.values()[0].clone() + f.values()[n - 1].clone()) * S::half();
        let upper_gap = at_mid.clone() - mean.clone();
        let lower_gap = mean.clone() - end_avg.clone();
        let margin = S::min_of(upper_gap.clone(), lower_gap.clone());
        Ok(self.verdict(
            InequalityName::HermiteHadamard,
            mean,
            at_mid,
            margin,
            vec![HypothesisReport::class(Hypothesis::FConcave, concave)],
            vec![("endpoint_average", end_avg), ("upper_gap", upper_gap), ("lower_gap", lower_gap)],
        ))
    }

    /// `∫ p q₀ <= ∫ p q` for every admissible `q`.
    pub fn q0_sharpness(&self, p: &PLFunction<S>, q: &PLFunction<S>) -> Result<InequalityVerdict<S>> {
        require_unit(&[p, q])?;
        let lhs = p.integrate_product(&PLFunction::q0())?;
        let rhs = p.integrate_product(q)?;
        let margin = rhs.clone() - lhs.clone();
        let mut hyps = self.weight_reports(p, true)?;
        hyps.extend(self.admissible_q_reports(q)?);
        Ok(self.verdict(InequalityName::Q0Sharpness, lhs, rhs, margin, hyps, Vec::new()))
    }

    /// Dispatches on a named case with role-keyed inputs.
    pub fn evaluate(&self, case: &CaseInputs<S>) -> Result<InequalityVerdict<S>> {
        let get = |role: &str| {
            case.functions.get(role).ok_or_else(|| PlError::Record {
                field: format!("functions.{role}"),
                reason: format!("missing input for {}", case.inequality),
            })
        };
        match case.inequality {
            InequalityName::Chebyshev => self.chebyshev(get("f")?, get("g")?),
            InequalityName::ChebyshevM => self.chebyshev_m(get("f")?, get("g")?, case.variant.unwrap_or_default()),
            InequalityName::LevinSteckin => self.levin_steckin(get("p")?, get("phi")?),
            InequalityName::LsSymmetric => self.ls_symmetric_lemma(get("p")?, get("phi")?),
            InequalityName::ClausingGeneral => self.clausing_general(get("p")?, get("q")?, get("phi")?),
            InequalityName::ClausingClassic => self.clausing_classic(get("p")?, get("phi")?),
            InequalityName::HermiteHadamard => self.hermite_hadamard(get("f")?),
            InequalityName::Q0Sharpness => self.q0_sharpness(get("p")?, get("q")?),
        }
    }
}

/// Inputs for one evaluation, keyed by role (`p`, `q`, `phi`, `f`, `g`).
#[derive(Debug, Clone, PartialEq)]
pub struct CaseInputs<S> {
    pub inequality: InequalityName,
    pub variant: Option<ChebyshevVariant>,
    pub functions: BTreeMap<String, PLFunction<S>>,
}

impl<S: Scalar> CaseInputs<S> {
    pub fn new(inequality: InequalityName, functions: impl IntoIterator<Item = (&'static str, PLFunction<S>)>) -> Self {
        Self {
            inequality,
            variant: None,
            functions: functions.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    pub fn with_variant(mut self, variant: ChebyshevVariant) -> Self {
        self.variant = Some(variant);
        self
    }

    pub fn convert<T: Scalar>(&self) -> CaseInputs<T> {
        CaseInputs {
            inequality: self.inequality,
            variant: self.variant,
            functions: self.functions.iter().map(|(k, f)| (k.clone(), f.convert())).collect(),
        }
    }
}
