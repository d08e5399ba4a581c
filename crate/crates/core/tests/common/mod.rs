//! Independent oracles shared by the integration tests. Nothing here calls
//! the closed-form integrals under test.

#![allow(dead_code)]

use plineq::{Exact, PLFunction, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Linear interpolation evaluated from scratch.
pub fn eval_f64(f: &PLFunction<f64>, x: f64) -> f64 {
    let xs = f.breakpoints();
    let ys = f.values();
    let i = match xs.partition_point(|b| *b <= x) {
        0 => 0,
        k if k >= xs.len() => xs.len() - 2,
        k => k - 1,
    };
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Composite Simpson on a refinement of the merged breakpoints with about
/// `panels` panels in total. Each panel lies inside one piece of both
/// functions, where the product is quadratic.
pub fn simpson_product(f: &PLFunction<f64>, g: &PLFunction<f64>, panels: usize) -> f64 {
    let mut knots: Vec<f64> = f.breakpoints().iter().chain(g.breakpoints()).copied().collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let per_piece = panels.div_ceil(knots.len() - 1).max(1);
    let h = |x: f64| eval_f64(f, x) * eval_f64(g, x);
    // Panel ends are shared between neighbours so rounding cannot open gaps
    // or overlaps; Neumaier summation keeps accumulation error negligible.
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for w in knots.windows(2) {
        let at = |k: usize| if k == per_piece { w[1] } else { w[0] + (w[1] - w[0]) * k as f64 / per_piece as f64 };
        for k in 0..per_piece {
            let (a, b) = (at(k), at(k + 1));
            let term = (b - a) / 6.0 * (h(a) + 4.0 * h(0.5 * (a + b)) + h(b));
            let t = sum + term;
            comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
            sum = t;
        }
    }
    sum + comp
}

/// Random PL function on `[0, 1]` with `n` breakpoints at multiples of 1/4096
/// and values in `[-scale, scale]`.
pub fn random_pl<S: Scalar>(rng: &mut ChaCha8Rng, n: usize, scale: i64) -> PLFunction<S> {
    let mut interior: Vec<i64> = Vec::new();
    while interior.len() < n - 2 {
        let k = rng.random_range(1..4096);
        if !interior.contains(&k) {
            interior.push(k);
        }
    }
    interior.sort_unstable();
    let xs: Vec<S> = std::iter::once(S::zero())
        .chain(interior.iter().map(|k| S::from_ratio(*k, 4096)))
        .chain(std::iter::once(S::one()))
        .collect();
    let ys = (0..n).map(|_| S::from_ratio(rng.random_range(-1024 * scale..=1024 * scale), 1024)).collect();
    PLFunction::new(xs, ys).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Outcome of the grid scan for membership in M⁺.
pub struct GridVerdict {
    pub member: bool,
    /// A separating `c` on the grid, when one exists.
    pub c: Option<f64>,
}

/// Scans `x` and candidate `c` on a grid of the given step: `f` is in M⁺ when
/// some `c` has every below-mean point to its left and every above-mean point
/// to its right.
pub fn m_plus_grid_oracle(f: &PLFunction<Exact>, step: f64) -> GridVerdict {
    let g = f.convert::<f64>();
    let mean = f.mean().as_f64();
    let (lo, hi) = (g.domain_lo().as_f64(), g.domain_hi().as_f64());
    let n = ((hi - lo) / step).round() as usize;
    let eps = 1e-12;
    let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let below: Vec<f64> = xs.iter().copied().filter(|x| eval_f64(&g, *x) < mean - eps).collect();
    let above: Vec<f64> = xs.iter().copied().filter(|x| eval_f64(&g, *x) > mean + eps).collect();
    let c = xs.iter().copied().find(|c| {
        below.iter().all(|x| x <= c) && above.iter().all(|x| x >= c)
    });
    GridVerdict { member: c.is_some(), c }
}
