//! Membership predicates for the function classes appearing in the
//! inequalities: convexity, symmetry, monotonicity, nonnegativity and the
//! M⁺/M⁻ mean-crossing classes.
//!
//! Every predicate reduces to a finite check on breakpoint values or slopes
//! because the inputs are piecewise linear.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pl_function::PLFunction;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassName {
    Convex,
    Concave,
    Symmetric,
    Nonnegative,
    NondecreasingOn,
    NonincreasingOn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Nondecreasing,
    Nonincreasing,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Self::Nondecreasing => Self::Nonincreasing,
            Self::Nonincreasing => Self::Nondecreasing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MClass {
    #[serde(rename = "m_plus")]
    Plus,
    #[serde(rename = "m_minus")]
    Minus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport<S> {
    pub class: ClassName,
    pub holds: bool,
    pub tolerance: S,
    /// First location (in increasing x) where the predicate fails.
    pub violation_at: Option<S>,
    pub violation_magnitude: Option<S>,
}

impl<S: Scalar> ClassReport<S> {
    fn pass(class: ClassName, tolerance: &S) -> Self {
        Self {
            class,
            holds: true,
            tolerance: tolerance.clone(),
            violation_at: None,
            violation_magnitude: None,
        }
    }

    fn fail(class: ClassName, tolerance: &S, at: S, magnitude: S) -> Self {
        Self {
            class,
            holds: false,
            tolerance: tolerance.clone(),
            violation_at: Some(at),
            violation_magnitude: Some(magnitude),
        }
    }
}

/// Two points refuting every candidate threshold `c`: `left < right` and,
/// for M⁺, `f(left)` is above the mean while `f(right)` is below it (M⁻ swaps).
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<S> {
    pub left: S,
    pub right: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MWitness<S> {
    pub in_class: bool,
    pub class: MClass,
    pub mean: S,
    /// Every `c` in `[c_lo, c_hi]` separates the below-mean and above-mean sets.
    pub c_lo: Option<S>,
    pub c_hi: Option<S>,
    pub certificate: Option<Certificate<S>>,
}

fn check_interval<S: Scalar>(f: &PLFunction<S>, on: &(S, S)) -> Result<PLFunction<S>> {
    let (lo, hi) = on;
    if f.domain_lo() == lo && f.domain_hi() == hi {
        return Ok(f.clone());
    }
    f.restrict(lo, hi)
}

pub fn is_convex<S: Scalar>(f: &PLFunction<S>, on: &(S, S), tol: &S) -> Result<ClassReport<S>> {
    let g = check_interval(f, on)?;
    let slopes = g.slopes();
    let max_abs = slopes.iter().fold(S::zero(), |m, s| S::max_of(m, s.abs()));
    let allowance = tol.clone() * (S::one() + max_abs);
    for (i, w) in slopes.windows(2).enumerate() {
        let drop = w[0].clone() - w[1].clone();
        if drop > allowance {
            return Ok(ClassReport::fail(ClassName::Convex, tol, g.breakpoints()[i + 1].clone(), drop));
        }
    }
    Ok(ClassReport::pass(ClassName::Convex, tol))
}

pub fn is_concave<S: Scalar>(f: &PLFunction<S>, on: &(S, S), tol: &S) -> Result<ClassReport<S>> {
    let mut report = is_convex(&f.negate(), on, tol)?;
    report.class = ClassName::Concave;
    Ok(report)
}

pub fn is_symmetric<S: Scalar>(f: &PLFunction<S>, tol: &S) -> ClassReport<S> {
    let mirrored = f.reflect();
    let xs = f.refined_union(&mirrored).expect("reflection keeps the domain");
    for x in xs {
        let gap = (f.eval_unchecked(&x) - mirrored.eval_unchecked(&x)).abs();
        if gap > *tol {
            return ClassReport::fail(ClassName::Symmetric, tol, x, gap);
        }
    }
    ClassReport::pass(ClassName::Symmetric, tol)
}

pub fn is_monotone_on<S: Scalar>(
    f: &PLFunction<S>,
    on: &(S, S),
    direction: Direction,
    tol: &S,
) -> Result<ClassReport<S>> {
    let g = check_interval(f, on)?;
    let class = match direction {
        Direction::Nondecreasing => ClassName::NondecreasingOn,
        Direction::Nonincreasing => ClassName::NonincreasingOn,
    };
    for (i, w) in g.values().windows(2).enumerate() {
        let step = w[1].clone() - w[0].clone();
        let wrong_way = match direction {
            Direction::Nondecreasing => -step,
            Direction::Nonincreasing => step,
        };
        if wrong_way > *tol {
            return Ok(ClassReport::fail(class, tol, g.breakpoints()[i].clone(), wrong_way));
        }
    }
    Ok(ClassReport::pass(class, tol))
}

pub fn is_nonnegative<S: Scalar>(f: &PLFunction<S>, tol: &S) -> ClassReport<S> {
    for (x, v) in f.breakpoints().iter().zip(f.values()) {
        if -v.clone() > *tol {
            return ClassReport::fail(ClassName::Nonnegative, tol, x.clone(), -v.clone());
        }
    }
    ClassReport::pass(ClassName::Nonnegative, tol)
}

/// Points where `f` crosses `level` strictly inside a piece.
fn crossings<S: Scalar>(f: &PLFunction<S>, level: &S) -> Vec<S> {
    let (xs, ys) = (f.breakpoints(), f.values());
    let mut out = Vec::new();
    for i in 0..xs.len() - 1 {
        let (a, b) = (ys[i].clone() - level.clone(), ys[i + 1].clone() - level.clone());
        if (a.is_negative() && b.is_positive()) || (a.is_positive() && b.is_negative()) {
            let t = a.clone() / (a - b);
            out.push(xs[i].clone() + t * (xs[i + 1].clone() - xs[i].clone()));
        }
    }
    out
}

/// Supremum of `{x : f(x) < level}`, or `None` when the set is empty.
fn sup_below<S: Scalar>(f: &PLFunction<S>, level: &S) -> Option<S> {
    let (xs, ys) = (f.breakpoints(), f.values());
    let n = xs.len();
    if ys[n - 1] < *level {
        return Some(xs[n - 1].clone());
    }
    for i in (0..n - 1).rev() {
        if ys[i] < *level {
            // ys[i + 1] >= level, so the set ends where the piece crosses `level`.
            let t = (level.clone() - ys[i].clone()) / (ys[i + 1].clone() - ys[i].clone());
            return Some(xs[i].clone() + t * (xs[i + 1].clone() - xs[i].clone()));
        }
    }
    None
}

/// Infimum of `{x : f(x) > level}`, or `None` when the set is empty.
fn inf_above<S: Scalar>(f: &PLFunction<S>, level: &S) -> Option<S> {
    let (xs, ys) = (f.breakpoints(), f.values());
    if ys[0] > *level {
        return Some(xs[0].clone());
    }
    for i in 1..xs.len() {
        if ys[i] > *level {
            let t = (ys[i - 1].clone() - level.clone()) / (ys[i - 1].clone() - ys[i].clone());
            return Some(xs[i - 1].clone() + t * (xs[i].clone() - xs[i - 1].clone()));
        }
    }
    None
}

fn classify_plus<S: Scalar>(f: &PLFunction<S>, tol: &S) -> MWitness<S> {
    let mean = f.mean();
    let lower = mean.clone() - tol.clone();
    let upper = mean.clone() + tol.clone();
    let below = sup_below(f, &lower);
    let above = inf_above(f, &upper);
    let in_class = match (&below, &above) {
        (Some(b), Some(a)) => b <= a,
        _ => true,
    };
    if in_class {
        return MWitness {
            in_class,
            class: MClass::Plus,
            c_lo: Some(below.unwrap_or_else(|| f.domain_lo().clone())),
            c_hi: Some(above.unwrap_or_else(|| f.domain_hi().clone())),
            mean,
            certificate: None,
        };
    }
    // Within each cell of the partition by breakpoints and level crossings the
    // sign of f - level is constant, so cell midpoints hit every component of
    // both sets.
    let mut points: Vec<S> = f.breakpoints().to_vec();
    points.extend(crossings(f, &lower));
    points.extend(crossings(f, &upper));
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    points.dedup();
    let mut candidates = Vec::with_capacity(2 * points.len());
    for w in points.windows(2) {
        candidates.push(w[0].clone());
        candidates.push((w[0].clone() + w[1].clone()) * S::half());
    }
    candidates.push(points[points.len() - 1].clone());
    let left = candidates
        .iter()
        .find(|x| f.eval_unchecked(x) > upper)
        .cloned()
        .expect("above-mean set is non-empty");
    let right = candidates
        .iter()
        .rev()
        .find(|x| f.eval_unchecked(x) < lower)
        .cloned()
        .expect("below-mean set is non-empty");
    debug_assert!(left < right);
    MWitness {
        in_class,
        class: MClass::Plus,
        mean,
        c_lo: None,
        c_hi: None,
        certificate: Some(Certificate { left, right }),
    }
}

/// Decides M⁺ (below-mean points left of some `c`, above-mean points right of
/// it) or M⁻ (reversed). Values within `tol` of the mean count as equal.
pub fn classify_m<S: Scalar>(f: &PLFunction<S>, class: MClass, tol: &S) -> MWitness<S> {
    match class {
        MClass::Plus => classify_plus(f, tol),
        MClass::Minus => {
            let mut w = classify_plus(&f.negate(), tol);
            w.class = MClass::Minus;
            w.mean = -w.mean;
            w
        }
    }
}

pub fn whole_domain<S: Scalar>(f: &PLFunction<S>) -> (S, S) {
    f.domain()
}

pub fn left_half<S: Scalar>(f: &PLFunction<S>) -> (S, S) {
    (f.domain_lo().clone(), f.midpoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn r(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }

    fn unit() -> (Exact, Exact) {
        (r(0, 1), r(1, 1))
    }

    fn zero() -> Exact {
        r(0, 1)
    }

    #[test]
    fn convexity_examples() {
        let square = PLFunction::from_fn(r(0, 1), r(1, 1), 33, |x| x.clone() * x.clone()).unwrap();
        assert!(is_convex(&square, &unit(), &zero()).unwrap().holds);

        let q0 = PLFunction::<Exact>::q0();
        let rep = is_convex(&q0, &unit(), &zero()).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.violation_at, Some(r(1, 2)));
        assert_eq!(rep.violation_magnitude, Some(r(8, 1)));
        assert!(is_convex(&q0, &(r(0, 1), r(1, 2)), &zero()).unwrap().holds);
        assert!(is_concave(&q0, &unit(), &zero()).unwrap().holds);

        let affine = PLFunction::new(vec![r(0, 1), r(1, 3), r(1, 1)], vec![r(1, 1), r(0, 1), r(-2, 1)]).unwrap();
        assert!(is_convex(&affine, &unit(), &zero()).unwrap().holds);
        assert!(is_concave(&affine, &unit(), &zero()).unwrap().holds);

        assert!(is_convex(&q0, &(r(1, 2), r(1, 2)), &zero()).is_err());
    }

    #[test]
    fn float_convexity_tolerance_is_scale_aware() {
        let f = PLFunction::new(vec![0.0, 0.5, 1.0], vec![0.0, 1e6, 2e6 - 1e-7]).unwrap();
        assert!(is_convex(&f, &(0.0, 1.0), &1e-12).unwrap().holds);
        assert!(!is_convex(&f, &(0.0, 1.0), &0.0).unwrap().holds);
    }

    #[test]
    fn symmetry_examples() {
        assert!(is_symmetric(&PLFunction::<Exact>::q0(), &zero()).holds);
        let id = PLFunction::identity(r(0, 1), r(1, 1)).unwrap();
        let rep = is_symmetric(&id, &zero());
        assert!(!rep.holds);
        assert_eq!(rep.violation_at, Some(r(0, 1)));
        assert_eq!(rep.violation_magnitude, Some(r(1, 1)));
        let f = PLFunction::new(vec![r(0, 1), r(3, 10), r(1, 1)], vec![r(5, 1), r(-1, 1), r(2, 1)]).unwrap();
        assert!(is_symmetric(&f.symmetrize(), &zero()).holds);
    }

    #[test]
    fn monotone_examples() {
        let q0 = PLFunction::<Exact>::q0();
        let half = (r(0, 1), r(1, 2));
        assert!(is_monotone_on(&q0, &half, Direction::Nondecreasing, &zero()).unwrap().holds);
        let rep = is_monotone_on(&q0, &unit(), Direction::Nondecreasing, &zero()).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.violation_at, Some(r(1, 2)));
        let c = PLFunction::constant(r(0, 1), r(1, 1), r(3, 1)).unwrap();
        assert!(is_monotone_on(&c, &unit(), Direction::Nondecreasing, &zero()).unwrap().holds);
        assert!(is_monotone_on(&c, &unit(), Direction::Nonincreasing, &zero()).unwrap().holds);
        assert!(is_monotone_on(&c, &(r(1, 1), r(0, 1)), Direction::Nonincreasing, &zero()).is_err());
    }

    #[test]
    fn nonnegativity_examples() {
        assert!(is_nonnegative(&PLFunction::<Exact>::q0(), &zero()).holds);
        let shifted = PLFunction::identity(r(0, 1), r(1, 1)).unwrap().add_constant(&r(-1, 1));
        let rep = is_nonnegative(&shifted, &zero());
        assert!(!rep.holds);
        assert_eq!(rep.violation_at, Some(r(0, 1)));
        assert!(is_nonnegative(&PLFunction::constant(r(0, 1), r(1, 1), r(0, 1)).unwrap(), &zero()).holds);
    }

    #[test]
    fn m_class_examples() {
        let id = PLFunction::identity(r(0, 1), r(1, 1)).unwrap();
        let w = classify_m(&id, MClass::Plus, &zero());
        assert!(w.in_class);
        assert_eq!(w.mean, r(1, 2));
        assert_eq!((w.c_lo.clone(), w.c_hi.clone()), (Some(r(1, 2)), Some(r(1, 2))));
        assert!(!classify_m(&id, MClass::Minus, &zero()).in_class);

        let c = PLFunction::constant(r(0, 1), r(1, 1), r(7, 3)).unwrap();
        for class in [MClass::Plus, MClass::Minus] {
            let w = classify_m(&c, class, &zero());
            assert!(w.in_class);
            assert_eq!((w.c_lo, w.c_hi), (Some(r(0, 1)), Some(r(1, 1))));
        }

        let vee = PLFunction::new(vec![r(0, 1), r(1, 2), r(1, 1)], vec![r(1, 2), r(0, 1), r(1, 2)]).unwrap();
        let w = classify_m(&vee, MClass::Plus, &zero());
        assert!(!w.in_class);
        assert_eq!(w.mean, r(1, 4));
        let cert = w.certificate.unwrap();
        assert!(cert.left < cert.right);
        assert!(vee.eval(&cert.left).unwrap() > r(1, 4));
        assert!(vee.eval(&cert.right).unwrap() < r(1, 4));
    }

    #[test]
    fn minus_certificate_orientation() {
        let id = PLFunction::identity(r(0, 1), r(1, 1)).unwrap();
        let w = classify_m(&id, MClass::Minus, &zero());
        let cert = w.certificate.unwrap();
        assert!(cert.left < cert.right);
        assert!(id.eval(&cert.left).unwrap() < w.mean);
        assert!(id.eval(&cert.right).unwrap() > w.mean);
    }
}
