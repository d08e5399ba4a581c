//! Seeded generators whose outputs satisfy the class hypotheses by
//! construction (sorted slopes for convexity, mirrored halves for symmetry,
//! normalization for unit integral).
//!
//! Every draw is an integer multiple of `1 / RESOLUTION`, so rational mode
//! works with small denominators and float mode sees the same function up to
//! rounding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classes::Direction;
use crate::error::{PlError, Result};
use crate::pl_function::{uniform_grid, PLFunction};
use crate::scalar::Scalar;

/// Value draws are integers in `[-RESOLUTION, RESOLUTION]` divided by `RESOLUTION`.
pub const RESOLUTION: i64 = 1024;
/// Random grid positions are multiples of `1 / GRID_RESOLUTION` of the domain width.
pub const GRID_RESOLUTION: i64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Grid {
    #[default]
    Uniform,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub n_breakpoints: usize,
    pub value_scale: f64,
    pub grid: Grid,
    pub domain: [f64; 2],
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_breakpoints: 17,
            value_scale: 1.0,
            grid: Grid::Uniform,
            domain: [0.0, 1.0],
        }
    }
}

impl GenConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_breakpoints < 3 {
            return Err(PlError::Invalid(format!(
                "n_breakpoints must be at least 3, got {}",
                self.n_breakpoints
            )));
        }
        if !(self.value_scale.is_finite() && self.value_scale >= 0.0) {
            return Err(PlError::Invalid(format!("value_scale must be finite and >= 0, got {}", self.value_scale)));
        }
        let [lo, hi] = self.domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(PlError::EmptyInterval(lo, hi));
        }
        Ok(())
    }

    fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream as u64);
        rng
    }

    fn bounds<S: Scalar>(&self) -> (S, S) {
        let conv = |x: f64| S::from_f64(x).expect("validated finite domain");
        (conv(self.domain[0]), conv(self.domain[1]))
    }

    fn scale<S: Scalar>(&self) -> S {
        S::from_f64(self.value_scale).expect("validated finite scale")
    }

    /// Number of breakpoints on each half of a mirrored grid (midpoint shared).
    fn half_len(&self) -> usize {
        self.n_breakpoints / 2 + 1
    }
}

/// Independent random streams per generator kind, so one seed can feed
/// several roles without correlated draws.
#[derive(Clone, Copy)]
enum Stream {
    Convex = 1,
    Weight = 2,
    AdmissibleQ = 3,
    ConcavePhi = 4,
    Monotone = 5,
    MPlus = 6,
    ConcavePositive = 7,
}

/// SplitMix64 finalizer applied along `path`; used to derive per-trial seeds.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    path.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

fn draw_signed<S: Scalar>(rng: &mut ChaCha8Rng) -> S {
    S::from_ratio(rng.random_range(-RESOLUTION..=RESOLUTION), RESOLUTION)
}

fn draw_unsigned<S: Scalar>(rng: &mut ChaCha8Rng) -> S {
    S::from_ratio(rng.random_range(0..=RESOLUTION), RESOLUTION)
}

fn sort<S: Scalar>(v: &mut [S]) {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
}

/// `n` points from `lo` to `hi`, uniform or with random interior positions.
fn grid<S: Scalar>(cfg: &GenConfig, rng: &mut ChaCha8Rng, lo: &S, hi: &S, n: usize) -> Vec<S> {
    match cfg.grid {
        Grid::Uniform => uniform_grid(lo, hi, n).expect("validated domain"),
        Grid::Random => {
            let slots = GRID_RESOLUTION as usize;
            let mut ticks = rand::seq::index::sample(rng, slots - 1, n - 2).into_vec();
            ticks.sort_unstable();
            let width = hi.clone() - lo.clone();
            let mut xs = Vec::with_capacity(n);
            xs.push(lo.clone());
            xs.extend(
                ticks
                    .into_iter()
                    .map(|t| lo.clone() + width.clone() * S::from_ratio(t as i64 + 1, GRID_RESOLUTION)),
            );
            xs.push(hi.clone());
            xs
        }
    }
}

/// Grid of `2h - 1` points on `[lo, hi]`, mirror-symmetric about the midpoint.
fn mirrored_grid<S: Scalar>(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Vec<S> {
    let (lo, hi) = cfg.bounds::<S>();
    let mid = (lo.clone() + hi.clone()) * S::half();
    let left = grid(cfg, rng, &lo, &mid, cfg.half_len());
    mirror_points(&left, &lo, &hi)
}

fn mirror_points<S: Scalar>(left: &[S], lo: &S, hi: &S) -> Vec<S> {
    let sum = lo.clone() + hi.clone();
    let mut xs = left.to_vec();
    xs.extend(left.iter().rev().skip(1).map(|x| sum.clone() - x.clone()));
    let n = xs.len();
    xs[n - 1] = hi.clone();
    xs
}

fn mirror_values<S: Scalar>(left: &[S]) -> Vec<S> {
    let mut vs = left.to_vec();
    vs.extend(left.iter().rev().skip(1).cloned());
    vs
}

/// Values starting at `start` with the given slope on each gap of `xs`.
fn integrate_slopes<S: Scalar>(xs: &[S], start: S, slopes: &[S]) -> Vec<S> {
    let mut values = Vec::with_capacity(xs.len());
    values.push(start);
    for (i, s) in slopes.iter().enumerate() {
        let next = values[i].clone() + s.clone() * (xs[i + 1].clone() - xs[i].clone());
        values.push(next);
    }
    values
}

pub fn gen_convex<S: Scalar>(cfg: &GenConfig) -> Result<PLFunction<S>> {
    cfg.validate()?;
    let mut rng = cfg.rng(Stream::Convex);
    convex_with(cfg, &mut rng)
}

fn convex_with<S: Scalar>(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Result<PLFunction<S>> {
    let (lo, hi) = cfg.bounds::<S>();
    let xs = grid(cfg, rng, &lo, &hi, cfg.n_breakpoints);
    let scale = cfg.scale::<S>();
    let start = draw_signed::<S>(rng) * scale.clone();
    let mut slopes: Vec<S> = (1..xs.len()).map(|_| draw_signed::<S>(rng) * scale.clone()).collect();
    sort(&mut slopes);
    let values = integrate_slopes(&xs, start, &slopes);
    PLFunction::new(xs, values)
}

pub fn gen_concave<S: Scalar>(cfg: &GenConfig) -> Result<PLFunction<S>> {
    cfg.validate()?;
    let mut rng = cfg.rng(Stream::ConcavePhi);
    Ok(convex_with::<S>(cfg, &mut rng)?.negate())
}

/// Symmetric weight, non-decreasing and nonnegative on the left half.
pub fn gen_ls_weight<S: Scalar>(cfg: &GenConfig) -> Result<PLFunction<S>> {
    cfg.validate()?;
    let mut rng = cfg.rng(Stream::Weight);
    let xs = mirrored_grid::<S>(cfg, &mut rng);
    let scale = cfg.scale::<S>();
    let mut left: Vec<S> = (0..cfg.half_len()).map(|_| draw_unsigned::<S>(&mut rng) * scale.clone()).collect();
    sort(&mut left);
    PLFunction::new(xs, mirror_values(&left))
}

/// `min(x, 1 - x)` on `[0, 1]`.
pub fn min_distance_weight<S: Scalar>() -> PLFunction<S> {
    PLFunction::new(vec![S::zero(), S::half(), S::one()], vec![S::zero(), S::half(), S::zero()])
        .expect("valid fixture")
}

/// Symmetric, convex on the left half, zero at the left end, unit integral.
///
/// `value_scale` is irrelevant after normalization and ignored.
pub fn gen_admissible_q<S: Scalar>(cfg: &GenConfig) -> Result<PLFunction<S>> {
    cfg.validate()?;
    let mut rng = cfg.rng(Stream::AdmissibleQ);
    let (lo, hi) = cfg.bounds::<S>();
    let mid = (lo.clone() + hi.clone()) * S::half();
    let left_xs = grid(cfg, &mut rng, &lo, &mid, cfg.half_len());
    loop {
        let mut slopes: Vec<S> = (1..left_xs.len()).map(|_| draw_unsigned::<S>(&mut rng)).collect();
        if slopes.iter().all(|s| s.is_zero()) {
            continue;
        }
        sort(&mut slopes);
        let left = integrate_slopes(&left_xs, S::zero(), &slopes);
        let q = PLFunction::new(mirror_points(&left_xs, &lo, &hi), mirror_values(&left))?;
        let total = q.integrate();
        return Ok(q.scale(&(S::one() / total)));
    }
}

/// Concave with `phi(lo) + phi(hi) >= 0`, repaired by an upward shift.
pub fn gen_concave_admissible_phi<S: Scalar>(cfg: &GenConfig) -> Result<PLFunction<S>> {
    let phi = gen_concave::<S>(cfg)?;
    let n = phi.len();
    let end_sum = phi.values()[0].clone() + phi.values()[n - 1].clone();
    if end_sum.is_negative() {
        return Ok(phi.add_constant(&(-end_sum * S::half())));
    }
    Ok(phi)
}

/// Concave and nonnegative (both endpoints, hence everything, at least zero).
pub fn gen_concave_positive_phi<S: Scalar>(cfg: &GenConfig) -> Result<PLFunction<S>> {
    cfg.validate()?;
    let mut rng = cfg.rng(Stream::ConcavePositive);
    let phi = convex_with::<S>(cfg, &mut rng)?.negate();
    let n = phi.len();
    let low = S::min_of(phi.values()[0].clone(), phi.values()[n - 1].clone());
    let lift = draw_unsigned::<S>(&mut rng) * cfg.scale::<S>();
    Ok(phi.add_constant(&(lift - low)))
}

pub fn gen_monotone<S: Scalar>(cfg: &GenConfig, direction: Direction) -> Result<PLFunction<S>> {
    cfg.validate()?;
    let mut rng = cfg.rng(Stream::Monotone);
    let (lo, hi) = cfg.bounds::<S>();
    let xs = grid(cfg, &mut rng, &lo, &hi, cfg.n_breakpoints);
    let scale = cfg.scale::<S>();
    let mut values: Vec<S> = xs.iter().map(|_| draw_signed::<S>(&mut rng) * scale.clone()).collect();
    sort(&mut values);
    if direction == Direction::Nonincreasing {
        values.reverse();
    }
    PLFunction::new(xs, values)
}

/// Convex `h` with zero mean and `h(lo) <= 0`.
///
/// Starts from a random convex function, removes its mean, then adds a
/// zero-mean linear tilt large enough to pull the left endpoint to or below
/// zero. Convexity and the mean are unchanged by the tilt.
pub fn gen_implicit_m_plus<S: Scalar>(cfg: &GenConfig) -> Result<PLFunction<S>> {
    cfg.validate()?;
    let mut rng = cfg.rng(Stream::MPlus);
    let h = convex_with::<S>(cfg, &mut rng)?;
    let h = h.add_constant(&-h.mean());
    let half_width = h.width() * S::half();
    let mid = h.midpoint();
    let excess = h.values()[0].clone();
    let extra = draw_unsigned::<S>(&mut rng) * cfg.scale::<S>();
    let slope = S::max_of(S::zero(), excess / half_width) + extra;
    Ok(h.add_linear(&slope, &mid))
}
