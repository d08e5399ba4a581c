//! Acceptance criteria. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use plineq::campaign::{draw_case, execute, Campaign, Mode, SharpnessSettings};
use plineq::classes::{classify_m, is_convex, whole_domain, MClass};
use plineq::exec::{map_indexed, Execution};
use plineq::generators::{
    derive_seed, gen_convex, gen_implicit_m_plus, gen_monotone, min_distance_weight,
};
use plineq::inequalities::{ChebyshevVariant, Hypothesis};
use plineq::search::{minimize_margin, Projection, SearchProblem};
use plineq::{Checker, Direction, Exact, GenConfig, InequalityName, PLFunction, Scalar};
use rand::Rng;

const SEED: u64 = 0x5EED_2026;

/// Collects failed sub-checks for one criterion.
#[derive(Default)]
struct Check {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn ensure(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok && self.failures.len() < 5 {
            self.failures.push(what());
        } else if !ok {
            self.failures.push(String::new());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn cfg(seed: u64) -> GenConfig {
    GenConfig::default().with_seed(seed)
}

fn exact(n: i64, d: i64) -> Exact {
    Exact::from_ratio(n, d)
}

/// 1. Closed-form product integrals against refined Simpson quadrature.
fn exact_integration(c: &mut Check) {
    let start = Instant::now();
    let worst = map_indexed(Execution::default(), 500, |i| {
        let mut rng = common::rng(derive_seed(SEED, &[1, i as u64]));
        let nf = rng.random_range(2..40);
        let ng = rng.random_range(2..40);
        let f: PLFunction<f64> = common::random_pl(&mut rng, nf, 4);
        let g: PLFunction<f64> = common::random_pl(&mut rng, ng, 4);
        let closed = f.integrate_product(&g).unwrap();
        let simpson = common::simpson_product(&f, &g, 10_000);
        (closed - simpson).abs() / closed.abs().max(f64::MIN_POSITIVE)
    })
    .into_iter()
    .fold(0.0_f64, f64::max);
    let elapsed = start.elapsed();
    c.ensure(worst <= 1e-10, || format!("worst relative error {worst:e}"));
    c.ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"));
    c.note(format!("500 pairs, worst rel err {worst:.1e}, {:.2}s", elapsed.as_secs_f64()));
}

/// 2. Levin-Stečkin on admissible pairs, plus both equality cases.
fn levin_steckin(c: &mut Check) {
    let checker = Checker::<Exact>::default();
    let results = map_indexed(Execution::default(), 1000, |t| {
        let case = draw_case::<Exact>(InequalityName::LevinSteckin, &GenConfig::default(), SEED, t).unwrap();
        let v = checker.evaluate(&case).unwrap();
        let p = &case.functions["p"];
        let phi = &case.functions["phi"];
        let constant_phi = PLFunction::constant(Exact::zero(), Exact::from_int(1), phi.values()[3].clone()).unwrap();
        let constant_p = PLFunction::constant(Exact::zero(), Exact::from_int(1), p.values()[2].clone()).unwrap();
        let eq_phi = checker.levin_steckin(p, &constant_phi).unwrap().margin;
        let eq_p = checker.levin_steckin(&constant_p, phi).unwrap().margin;
        (v.margin.clone(), v.hypotheses_hold(), eq_phi, eq_p)
    });
    for (t, (m, hyps, eq_phi, eq_p)) in results.iter().enumerate() {
        c.ensure(*hyps, || format!("trial {t}: generated inputs not admissible"));
        c.ensure(!m.is_negative(), || format!("trial {t}: margin {m}"));
        c.ensure(eq_phi.is_zero(), || format!("trial {t}: constant phi gave {eq_phi}"));
        c.ensure(eq_p.is_zero(), || format!("trial {t}: constant p gave {eq_p}"));
    }
    let min = results.iter().map(|r| r.0.clone()).min().unwrap();
    c.note(format!("1000 pairs, min margin {:.3e}, equality cases exact", min.as_f64()));
}

/// 3. Half-interval identities for symmetric pairs.
fn symmetric_chain(c: &mut Check) {
    let checker = Checker::<Exact>::default();
    let two = Exact::from_int(2);
    let results = map_indexed(Execution::default(), 1000, |t| {
        let case = draw_case::<Exact>(InequalityName::LsSymmetric, &GenConfig::default(), SEED, t).unwrap();
        let (p, phi) = (&case.functions["p"], &case.functions["phi"]);
        let lemma = checker.ls_symmetric_lemma(p, phi).unwrap();
        let ls = checker.levin_steckin(p, phi).unwrap();
        let d = |k: &str| lemma.detail(k).unwrap().clone();
        let ok = [
            p.integrate() == two.clone() * d("half_p"),
            phi.integrate() == two.clone() * d("half_phi"),
            d("chain_rhs_residual").is_zero(),
            d("chain_lhs_residual").is_zero(),
            lemma.margin == ls.margin,
            lemma.hypotheses_hold(),
            !lemma.margin.is_negative(),
        ];
        ok
    });
    for (t, ok) in results.iter().enumerate() {
        c.ensure(ok.iter().all(|b| *b), || format!("trial {t}: identity flags {ok:?}"));
    }
    c.note("1000 symmetric pairs, all identities exact");
}

/// 4. Generalized Chebyshev with M-class `f`; toggled pairings reverse.
fn generalized_chebyshev(c: &mut Check) {
    let checker = Checker::<Exact>::default();
    let results = map_indexed(Execution::default(), 1000, |t| {
        let s = derive_seed(SEED, &[4, t as u64]);
        let f: PLFunction<Exact> = if t % 2 == 0 {
            gen_implicit_m_plus(&cfg(derive_seed(s, &[0]))).unwrap()
        } else {
            gen_monotone(&cfg(derive_seed(s, &[0])), Direction::Nondecreasing).unwrap()
        };
        let g: PLFunction<Exact> = gen_monotone(&cfg(derive_seed(s, &[1])), Direction::Nondecreasing).unwrap();
        let pairs = [
            (ChebyshevVariant::PlusNondecreasing, f.clone(), g.clone()),
            (ChebyshevVariant::MinusNonincreasing, f.negate(), g.negate()),
            (ChebyshevVariant::PlusNonincreasing, f.clone(), g.negate()),
            (ChebyshevVariant::MinusNondecreasing, f.negate(), g.clone()),
        ];
        pairs
            .into_iter()
            .map(|(variant, f, g)| {
                let v = checker.chebyshev_m(&f, &g, variant).unwrap();
                // lhs is the mean of the product, rhs the product of means.
                let raw = v.lhs.clone() - v.rhs.clone();
                let sign_ok = if variant.is_toggled() { !raw.is_positive() } else { !raw.is_negative() };
                sign_ok && v.hypotheses_hold() && v.holds
            })
            .collect::<Vec<_>>()
    });
    for (t, ok) in results.iter().enumerate() {
        c.ensure(ok.iter().all(|b| *b), || format!("trial {t}: variant flags {ok:?}"));
    }
    c.note("1000 pairs x 4 variants");
}

/// 5. M⁺ classifier against a 1e-3 grid scan, plus fixtures.
fn m_plus_oracle(c: &mut Check) {
    let tol = Exact::zero();
    let results = map_indexed(Execution::default(), 500, |i| {
        let s = derive_seed(SEED, &[5, i as u64]);
        let f: PLFunction<Exact> = match i % 4 {
            0 => {
                let mut rng = common::rng(s);
                let n = rng.random_range(3..10);
                common::random_pl(&mut rng, n, 1)
            }
            1 => gen_monotone(&cfg(s), Direction::Nondecreasing).unwrap(),
            2 => gen_implicit_m_plus(&cfg(s)).unwrap(),
            _ => gen_convex(&cfg(s)).unwrap(),
        };
        let w = classify_m(&f, MClass::Plus, &tol);
        let oracle = common::m_plus_grid_oracle(&f, 1e-3);
        let c_ok = match (w.in_class, oracle.c) {
            (true, Some(cg)) => {
                let (lo, hi) = (w.c_lo.clone().unwrap().as_f64(), w.c_hi.clone().unwrap().as_f64());
                lo - 1e-3 <= cg && cg <= hi + 1e-3
            }
            _ => true,
        };
        (w.in_class, oracle.member, c_ok)
    });
    let members = results.iter().filter(|r| r.0).count();
    for (i, (cls, orc, c_ok)) in results.iter().enumerate() {
        c.ensure(cls == orc, || format!("function {i}: classifier {cls}, oracle {orc}"));
        c.ensure(*c_ok, || format!("function {i}: oracle c outside [c_lo, c_hi]"));
    }

    let (zero, one) = (Exact::zero(), Exact::from_int(1));
    let id = classify_m(&PLFunction::identity(zero.clone(), one.clone()).unwrap(), MClass::Plus, &tol);
    c.ensure(id.in_class && id.c_lo == Some(exact(1, 2)) && id.c_hi == Some(exact(1, 2)), || {
        format!("identity: {:?} [{:?}, {:?}]", id.in_class, id.c_lo, id.c_hi)
    });
    let k = classify_m(&PLFunction::constant(zero.clone(), one.clone(), exact(3, 7)).unwrap(), MClass::Plus, &tol);
    c.ensure(k.in_class && k.c_lo == Some(zero.clone()) && k.c_hi == Some(one.clone()), || {
        format!("constant: {:?} [{:?}, {:?}]", k.in_class, k.c_lo, k.c_hi)
    });
    let v = PLFunction::new(vec![zero, exact(1, 2), one], vec![exact(1, 2), Exact::zero(), exact(1, 2)]).unwrap();
    let vw = classify_m(&v, MClass::Plus, &tol);
    c.ensure(!vw.in_class && vw.certificate.is_some(), || "|x - 1/2| classified as M+".into());
    c.note(format!("500 functions ({members} members), fixtures ok"));
}

/// 6. Convex, zero-mean, non-positive at the left end implies M⁺.
fn implicit_m_plus(c: &mut Check) {
    let tol = Exact::zero();
    let results = map_indexed(Execution::default(), 1000, |t| {
        let g = GenConfig {
            domain: [0.0, 0.5],
            ..cfg(derive_seed(SEED, &[6, t as u64]))
        };
        let h: PLFunction<Exact> = gen_implicit_m_plus(&g).unwrap();
        let admissible = is_convex(&h, &whole_domain(&h), &tol).unwrap().holds
            && !h.values()[0].is_positive()
            && h.integrate().is_zero()
            && h.domain_hi() == &exact(1, 2);
        (admissible, classify_m(&h, MClass::Plus, &tol).in_class)
    });
    for (t, (adm, member)) in results.iter().enumerate() {
        c.ensure(*adm, || format!("trial {t}: construction not admissible"));
        c.ensure(*member, || format!("trial {t}: not classified M+"));
    }
    c.note("1000 functions on [0, 1/2]");
}

/// 7. Generalized Clausing, the symmetric cross-check, and `phi = q`.
fn generalized_clausing(c: &mut Check) {
    let checker = Checker::<Exact>::default();
    let results = map_indexed(Execution::default(), 1000, |t| {
        let case = draw_case::<Exact>(InequalityName::ClausingGeneral, &GenConfig::default(), SEED, t).unwrap();
        let (p, q, phi) = (&case.functions["p"], &case.functions["q"], &case.functions["phi"]);
        let v = checker.evaluate(&case).unwrap();
        let sym = checker.clausing_general(p, q, &phi.symmetrize()).unwrap();
        let cross = sym.detail("cross_check_residual").map(|r| r.is_zero());
        let eq = checker.clausing_general(p, q, q).unwrap().margin;
        [
            v.hypotheses_hold(),
            !v.margin.is_negative(),
            sym.hypotheses_hold() && !sym.margin.is_negative(),
            cross == Some(true),
            eq.is_zero(),
        ]
    });
    for (t, ok) in results.iter().enumerate() {
        c.ensure(ok.iter().all(|b| *b), || format!("trial {t}: flags {ok:?}"));
    }
    c.note("1000 triples, cross-check and phi = q exact");
}

/// 8. Chord approximations approach the smooth margins.
fn smooth_anchors(c: &mut Check) {
    let checker = Checker::<Exact>::default();
    let (zero, one) = (Exact::zero(), Exact::from_int(1));
    let square = PLFunction::from_fn(zero.clone(), one.clone(), 65, |x| x.clone() * x.clone()).unwrap();
    let ls = checker.levin_steckin(&min_distance_weight(), &square).unwrap().margin;
    let hump = PLFunction::from_fn(zero, one.clone(), 65, |x| x.clone() * (one.clone() - x.clone())).unwrap();
    let q0 = PLFunction::<Exact>::q0();
    let cl = checker.clausing_general(&q0, &q0, &hump).unwrap().margin;
    let (ls_err, cl_err) = ((ls.as_f64() - 1.0 / 96.0).abs(), (cl.as_f64() - 1.0 / 72.0).abs());
    c.ensure(ls_err <= 1e-3, || format!("LS margin {} vs 1/96", ls.as_f64()));
    c.ensure(cl_err <= 1e-3, || format!("Clausing margin {} vs 1/72", cl.as_f64()));
    c.note(format!(
        "LS {:.6} (1/96 = {:.6}), Clausing {:.6} (1/72 = {:.6})",
        ls.as_f64(),
        1.0 / 96.0,
        cl.as_f64(),
        1.0 / 72.0
    ));
}

/// 9. Sharpness campaign: random admissible q never beat q0, which is exact.
fn q0_sharpness(c: &mut Check) {
    let campaign = Campaign {
        mode: Mode::Sharpness,
        seed: SEED,
        sharpness: SharpnessSettings { q_count: 200, p_count: 5 },
        ..Campaign::default()
    };
    let report = execute(&campaign, Execution::default()).unwrap();
    let agg = &report.aggregates[0];
    let s = report.sharpness.as_ref().unwrap();
    c.ensure(agg.trials == 1005 && agg.failures == 0, || format!("{} failures of {}", agg.failures, agg.trials));
    c.ensure(agg.hypothesis_failures == 0, || "inadmissible q or p".into());
    c.ensure(s.injected == 5 && s.injected_zero == 5, || format!("q0 zero in {} of {}", s.injected_zero, s.injected));
    c.ensure(agg.min_margin == "0", || format!("min margin {}", agg.min_margin));
    c.note(format!("200 q x 5 p, q0 exact zero for all {} weights", s.injected));
}

/// 10. Dropped hypotheses yield verified violations; full hypotheses none.
fn hypothesis_necessity(c: &mut Check) {
    let start = Instant::now();
    let checker = Checker::<Exact>::default();

    // Fixtures from the smooth limit, evaluated on chords.
    let (zero, one) = (Exact::zero(), Exact::from_int(1));
    let square = PLFunction::from_fn(zero.clone(), one.clone(), 65, |x| x.clone() * x.clone()).unwrap();
    let identity = PLFunction::identity(zero.clone(), one.clone()).unwrap();
    let ls_fix = checker.levin_steckin(&identity, &square).unwrap();
    c.ensure(ls_fix.margin.is_negative() && ls_fix.failed_hypotheses() == [Hypothesis::PSymmetric], || {
        format!("p = x fixture margin {}", ls_fix.margin)
    });
    let shifted = PLFunction::identity(zero, one.clone()).unwrap().add_constant(&-one);
    let q0 = PLFunction::<Exact>::q0();
    let cl_fix = checker.clausing_general(&q0, &q0, &shifted).unwrap();
    c.ensure(cl_fix.margin == exact(-1, 6), || format!("phi = x - 1 fixture margin {}", cl_fix.margin));

    for (ineq, h) in [
        (InequalityName::LevinSteckin, Hypothesis::PSymmetric),
        (InequalityName::LevinSteckin, Hypothesis::PNondecreasingHalf),
        (InequalityName::ClausingGeneral, Hypothesis::PhiEndpointSum),
    ] {
        let r = minimize_margin(&SearchProblem::new(ineq, 10_000, SEED).dropping(h)).unwrap();
        let em = r.exact_margin.clone().unwrap_or_else(Exact::zero);
        let replay = checker.evaluate(r.best_inputs.as_ref().unwrap()).unwrap();
        c.ensure(r.violated && em.is_negative(), || format!("{ineq} without {h}: no violation"));
        c.ensure(r.iterations_used <= 10_000, || format!("{ineq}: {} iterations", r.iterations_used));
        c.ensure((em.as_f64() - r.best_margin).abs() <= 1e-12, || {
            format!("{ineq} without {h}: exact {} vs float {}", em.as_f64(), r.best_margin)
        });
        c.ensure(replay.margin == em && replay.failed_hypotheses() == [h], || {
            format!("{ineq} without {h}: replay fails {:?}", replay.failed_hypotheses())
        });
        c.note(format!("{ineq}/{h} exact margin {:.3}", em.as_f64()));
    }

    // Full hypotheses: adversarial float search over every nonnegative
    // checker, then an exact sweep of random projected candidates.
    let per = 100_000_usize.div_ceil(InequalityName::NONNEGATIVE.len());
    let mut searched = 0;
    let mut swept = 0;
    for (k, ineq) in InequalityName::NONNEGATIVE.into_iter().enumerate() {
        let r = minimize_margin(&SearchProblem::new(ineq, per, derive_seed(SEED, &[10, k as u64]))).unwrap();
        searched += r.iterations_used;
        let em = r.exact_margin.clone().unwrap_or_else(Exact::zero);
        c.ensure(!r.violated && r.best_margin >= -1e-9 && !em.is_negative(), || {
            format!("{ineq}: search margin {} (exact {em})", r.best_margin)
        });

        let proj = Projection::new(ineq, &Default::default(), 9).unwrap();
        let negatives = map_indexed(Execution::default(), per, |i| {
            let mut rng = common::rng(derive_seed(SEED, &[11, k as u64, i as u64]));
            let params: Vec<Exact> =
                (0..proj.param_len()).map(|_| exact(rng.random_range(-4096..=4096), 1024)).collect();
            proj.evaluate(&checker, &params).is_some_and(|v| v.margin.is_negative() || !v.hypotheses_hold())
        })
        .into_iter()
        .filter(|b| *b)
        .count();
        swept += per;
        c.ensure(negatives == 0, || format!("{ineq}: {negatives} negative exact margins"));
    }
    let elapsed = start.elapsed();
    c.ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"));
    c.note(format!(
        "no drops: {searched} float search candidates + {swept} exact candidates, 0 violations, {:.1}s",
        elapsed.as_secs_f64()
    ));
}

fn main() -> ExitCode {
    // Numeric arguments select criteria; other libtest flags are ignored.
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(&str, fn(&mut Check)); 10] = [
        ("exact integration vs Simpson", exact_integration),
        ("Levin-Stečkin", levin_steckin),
        ("symmetric chain identities", symmetric_chain),
        ("generalized Chebyshev", generalized_chebyshev),
        ("M+ classifier vs grid oracle", m_plus_oracle),
        ("implicit M+ construction", implicit_m_plus),
        ("generalized Clausing", generalized_clausing),
        ("smooth-case anchors", smooth_anchors),
        ("q0 sharpness", q0_sharpness),
        ("hypothesis necessity", hypothesis_necessity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !selected.is_empty() && !selected.contains(&(i + 1)) {
            continue;
        }
        let start = Instant::now();
        let mut check = Check::default();
        if let Err(panic) = catch_unwind(AssertUnwindSafe(|| run(&mut check))) {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            check.failures.push(format!("panicked: {msg}"));
        }
        let secs = start.elapsed().as_secs_f64();
        if check.failures.is_empty() {
            println!("criterion {:>2} PASS  {name}: {} [{secs:.1}s]", i + 1, check.notes.join("; "));
        } else {
            failed += 1;
            let shown: Vec<_> = check.failures.iter().filter(|f| !f.is_empty()).collect();
            println!(
                "criterion {:>2} FAIL  {name}: {} failure(s), e.g. {shown:?} [{secs:.1}s]",
                i + 1,
                check.failures.len()
            );
        }
    }
    let ran = if selected.is_empty() { criteria.len() } else { selected.len() };
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
