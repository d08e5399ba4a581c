//! Continuous piecewise-linear functions on a closed interval.
//!
//! A [`PLFunction`] is the linear interpolant of `(breakpoint, value)` pairs.
//! All integrals here are closed-form: the trapezoid rule is exact for a
//! single linear piece, and the product of two linear pieces is a quadratic
//! integrated exactly by Simpson's weights. In rational mode every result is
//! exact.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{PlError, Result};
use crate::scalar::{exact_string, parse_exact, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct PLFunction<S> {
    breakpoints: Vec<S>,
    values: Vec<S>,
}

impl<S: Scalar> PLFunction<S> {
    pub fn new(breakpoints: Vec<S>, values: Vec<S>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(PlError::Invalid(format!(
                "need at least 2 breakpoints, got {}",
                breakpoints.len()
            )));
        }
        if breakpoints.len() != values.len() {
            return Err(PlError::Invalid(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if let Some(i) = breakpoints.iter().chain(&values).position(|v| !v.is_finite()) {
            return Err(PlError::Invalid(format!("non-finite entry at position {i}")));
        }
        if let Some(i) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
            return Err(PlError::Invalid(format!(
                "breakpoints not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self { breakpoints, values })
    }

    /// Samples `f` at `n` uniformly spaced breakpoints (chord interpolant).
    pub fn from_fn(lo: S, hi: S, n: usize, f: impl Fn(&S) -> S) -> Result<Self> {
        if n < 2 {
            return Err(PlError::Invalid("need at least 2 sample points".into()));
        }
        let xs = uniform_grid(&lo, &hi, n)?;
        let ys = xs.iter().map(f).collect();
        Self::new(xs, ys)
    }

    pub fn constant(lo: S, hi: S, c: S) -> Result<Self> {
        Self::new(vec![lo, hi], vec![c.clone(), c])
    }

    /// `x` on `[lo, hi]`.
    pub fn identity(lo: S, hi: S) -> Result<Self> {
        Self::new(vec![lo.clone(), hi.clone()], vec![lo, hi])
    }

    /// `4 min(x, 1 - x)` on `[0, 1]`, the extremal admissible weight.
    pub fn q0() -> Self {
        Self {
            breakpoints: vec![S::zero(), S::half(), S::one()],
            values: vec![S::zero(), S::from_int(2), S::zero()],
        }
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn domain_lo(&self) -> &S {
        &self.breakpoints[0]
    }

    pub fn domain_hi(&self) -> &S {
        self.breakpoints.last().expect("at least two breakpoints")
    }

    pub fn domain(&self) -> (S, S) {
        (self.domain_lo().clone(), self.domain_hi().clone())
    }

    pub fn width(&self) -> S {
        self.domain_hi().clone() - self.domain_lo().clone()
    }

    pub fn midpoint(&self) -> S {
        (self.domain_lo().clone() + self.domain_hi().clone()) * S::half()
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_unit_domain(&self) -> bool {
        self.domain_lo().is_zero() && self.domain_hi().is_one()
    }

    pub fn eval(&self, x: &S) -> Result<S> {
        if x < self.domain_lo() || x > self.domain_hi() {
            return Err(PlError::OutsideDomain {
                x: x.as_f64(),
                lo: self.domain_lo().as_f64(),
                hi: self.domain_hi().as_f64(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluates without the domain check; points outside extrapolate the end pieces.
    pub(crate) fn eval_unchecked(&self, x: &S) -> S {
        let bp = &self.breakpoints;
        let i = match bp.binary_search_by(|b| b.partial_cmp(x).unwrap_or(Ordering::Less)) {
            Ok(i) => return self.values[i].clone(),
            Err(i) => i.clamp(1, bp.len() - 1),
        };
        lerp(&bp[i - 1], &self.values[i - 1], &bp[i], &self.values[i], x)
    }

    /// Values at an increasing sequence of points inside the domain.
    fn values_at_sorted(&self, xs: &[S]) -> Vec<S> {
        let bp = &self.breakpoints;
        let mut piece = 1;
        xs.iter()
            .map(|x| {
                while piece < bp.len() - 1 && *x > bp[piece] {
                    piece += 1;
                }
                if *x == bp[piece] {
                    self.values[piece].clone()
                } else if *x == bp[piece - 1] {
                    self.values[piece - 1].clone()
                } else {
                    lerp(&bp[piece - 1], &self.values[piece - 1], &bp[piece], &self.values[piece], x)
                }
            })
            .collect()
    }

    pub fn slopes(&self) -> Vec<S> {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, y)| (y[1].clone() - y[0].clone()) / (x[1].clone() - x[0].clone()))
            .collect()
    }

    pub fn integrate(&self) -> S {
        let twice = self
            .breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .fold(S::zero(), |acc, (x, y)| {
                acc + (x[1].clone() - x[0].clone()) * (y[0].clone() + y[1].clone())
            });
        twice * S::half()
    }

    /// Average value over the domain.
    pub fn mean(&self) -> S {
        self.integrate() / self.width()
    }

    pub fn integrate_product(&self, other: &Self) -> Result<S> {
        let xs = self.refined_union(other)?;
        let f = self.values_at_sorted(&xs);
        let g = other.values_at_sorted(&xs);
        let two = S::from_int(2);
        let mut six_times = S::zero();
        for i in 0..xs.len() - 1 {
            let (f1, f2, g1, g2) = (&f[i], &f[i + 1], &g[i], &g[i + 1]);
            let inner = two.clone() * (f1.clone() * g1.clone() + f2.clone() * g2.clone())
                + f1.clone() * g2.clone()
                + f2.clone() * g1.clone();
            six_times = six_times + (xs[i + 1].clone() - xs[i].clone()) * inner;
        }
        Ok(six_times / S::from_int(6))
    }

    /// `x -> lo + hi - x`.
    pub fn reflect(&self) -> Self {
        let (lo, hi) = self.domain();
        let sum = lo.clone() + hi.clone();
        let n = self.len();
        let mut breakpoints: Vec<S> = self.breakpoints.iter().rev().map(|x| sum.clone() - x.clone()).collect();
        // Pin the mirrored endpoints so float round-off cannot move the domain.
        breakpoints[0] = lo;
        breakpoints[n - 1] = hi;
        let values = self.values.iter().rev().cloned().collect();
        Self { breakpoints, values }
    }

    /// `(f(x) + f(lo + hi - x)) / 2`.
    pub fn symmetrize(&self) -> Self {
        Self::linear_combine(&S::half(), self, &S::half(), &self.reflect())
            .expect("a function and its reflection share a domain")
    }

    pub fn linear_combine(a: &S, f: &Self, b: &S, g: &Self) -> Result<Self> {
        let xs = f.refined_union(g)?;
        let fv = f.values_at_sorted(&xs);
        let gv = g.values_at_sorted(&xs);
        let values = fv
            .into_iter()
            .zip(gv)
            .map(|(u, v)| a.clone() * u + b.clone() * v)
            .collect();
        Ok(Self { breakpoints: xs, values })
    }

    pub fn scale(&self, c: &S) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| c.clone() * v.clone()).collect(),
        }
    }

    pub fn negate(&self) -> Self {
        self.scale(&-S::one())
    }

    pub fn add_constant(&self, c: &S) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v.clone() + c.clone()).collect(),
        }
    }

    /// Adds the affine function `slope * (x - anchor)`.
    pub fn add_linear(&self, slope: &S, anchor: &S) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self
                .breakpoints
                .iter()
                .zip(&self.values)
                .map(|(x, v)| v.clone() + slope.clone() * (x.clone() - anchor.clone()))
                .collect(),
        }
    }

    pub fn restrict(&self, lo: &S, hi: &S) -> Result<Self> {
        if lo >= hi {
            return Err(PlError::EmptyInterval(lo.as_f64(), hi.as_f64()));
        }
        if lo < self.domain_lo() || hi > self.domain_hi() {
            return Err(PlError::IntervalOutsideDomain {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
                dom_lo: self.domain_lo().as_f64(),
                dom_hi: self.domain_hi().as_f64(),
            });
        }
        let mut xs = vec![lo.clone()];
        xs.extend(self.breakpoints.iter().filter(|x| *x > lo && *x < hi).cloned());
        xs.push(hi.clone());
        let values = self.values_at_sorted(&xs);
        Ok(Self { breakpoints: xs, values })
    }

    pub fn sup_norm(&self) -> S {
        self.values
            .iter()
            .fold(S::zero(), |m, v| S::max_of(m, v.abs()))
    }

    pub fn same_domain(&self, other: &Self) -> Result<()> {
        let eps = S::dedup_eps();
        let close = |a: &S, b: &S| (a.clone() - b.clone()).abs() <= eps;
        if close(self.domain_lo(), other.domain_lo()) && close(self.domain_hi(), other.domain_hi()) {
            Ok(())
        } else {
            Err(PlError::DomainMismatch(
                self.domain_lo().as_f64(),
                self.domain_hi().as_f64(),
                other.domain_lo().as_f64(),
                other.domain_hi().as_f64(),
            ))
        }
    }

    /// Sorted union of both breakpoint sets, merging points within `dedup_eps`.
    pub fn refined_union(&self, other: &Self) -> Result<Vec<S>> {
        self.same_domain(other)?;
        let eps = S::dedup_eps();
        let (a, b) = (&self.breakpoints, &other.breakpoints);
        let mut out: Vec<S> = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take_a = j >= b.len() || (i < a.len() && a[i] <= b[j]);
            let x = if take_a {
                i += 1;
                &a[i - 1]
            } else {
                j += 1;
                &b[j - 1]
            };
            match out.last() {
                Some(last) if x.clone() - last.clone() <= eps => {}
                _ => out.push(x.clone()),
            }
        }
        // Keep our own endpoints when float domains differ by less than eps.
        let n = out.len();
        out[0] = self.domain_lo().clone();
        out[n - 1] = self.domain_hi().clone();
        if n >= 3 && out[n - 2] >= out[n - 1] {
            out.remove(n - 2);
        }
        Ok(out)
    }

    /// Converts between scalar backends (exact when targeting rationals).
    pub fn convert<T: Scalar>(&self) -> PLFunction<T> {
        PLFunction {
            breakpoints: self.breakpoints.iter().map(|x| T::from_exact(&x.to_exact())).collect(),
            values: self.values.iter().map(|x| T::from_exact(&x.to_exact())).collect(),
        }
    }

    pub fn to_record(&self) -> PlRecord {
        PlRecord {
            domain: [exact_string(self.domain_lo()), exact_string(self.domain_hi())],
            breakpoints: self.breakpoints.iter().map(exact_string).collect(),
            values: self.values.iter().map(exact_string).collect(),
        }
    }

    pub fn from_record(rec: &PlRecord) -> Result<Self> {
        Self::from_record_at(rec, "function")
    }

    /// Like [`PLFunction::from_record`], prefixing diagnostics with `path`.
    pub fn from_record_at(rec: &PlRecord, path: &str) -> Result<Self> {
        let parse_list = |name: &str, items: &[String]| -> Result<Vec<S>> {
            items
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    parse_exact(s).map(|r| S::from_exact(&r)).map_err(|reason| PlError::Record {
                        field: format!("{path}.{name}[{i}]"),
                        reason,
                    })
                })
                .collect()
        };
        let domain = parse_list("domain", &rec.domain)?;
        let f = Self::new(parse_list("breakpoints", &rec.breakpoints)?, parse_list("values", &rec.values)?)
            .map_err(|e| PlError::Record {
                field: path.to_string(),
                reason: e.to_string(),
            })?;
        if f.domain_lo() != &domain[0] || f.domain_hi() != &domain[1] {
            return Err(PlError::Record {
                field: format!("{path}.domain"),
                reason: "domain does not match the first and last breakpoints".into(),
            });
        }
        Ok(f)
    }
}

/// Flat serialized form; every number is an exact rational string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlRecord {
    pub domain: [String; 2],
    pub breakpoints: Vec<String>,
    pub values: Vec<String>,
}

pub fn uniform_grid<S: Scalar>(lo: &S, hi: &S, n: usize) -> Result<Vec<S>> {
    if lo >= hi {
        return Err(PlError::EmptyInterval(lo.as_f64(), hi.as_f64()));
    }
    let steps = S::from_int((n - 1) as i64);
    let width = hi.clone() - lo.clone();
    let mut xs: Vec<S> = (0..n)
        .map(|k| lo.clone() + width.clone() * S::from_int(k as i64) / steps.clone())
        .collect();
    xs[n - 1] = hi.clone();
    Ok(xs)
}

fn lerp<S: Scalar>(x0: &S, y0: &S, x1: &S, y1: &S, x: &S) -> S {
    let t = (x.clone() - x0.clone()) / (x1.clone() - x0.clone());
    y0.clone() + t * (y1.clone() - y0.clone())
}
