//! Acceptance checks, one line per criterion. Run with `cargo test --test acceptance`.

use std::process::Command;
use std::time::{Duration, Instant};

use airy_graph::catalog::{entries, sqrt2_matrix};
use airy_graph::discretization::{DiscreteSystem, GridSpec};
use airy_graph::evolution::{
    contamination_window, expm_oracle, gaussian, project_initial, realness_check, sample, steps_for, Simulation,
};
use airy_graph::extension_theory::{count_l2_solutions, deficiency_indices, HalfLine};
use airy_graph::graph_model::{Edge, StarGraph};
use airy_graph::krein_bc::{
    classify_general, graph_basis, is_krein_unitary, is_self_orthogonal, krein_congruence, krein_inner, krein_pair,
    sharp_adjoint, GeneralCondition, KreinForm, SeparatedCondition, Verdict, VertexCondition,
};
use airy_graph::linalg::{expm, vec_from};
use airy_graph::{CMat, CVec, C64};
use airy_graph_cli::validate::{check_entries, free_line_study, MAX_FINEST_ERROR, MIN_ORDER};
use airy_graph_cli::DEFAULT_TOL;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn two_lines(bm: f64, bp: f64, u: C64) -> (StarGraph, VertexCondition) {
    let g = StarGraph::new(vec![Edge::incoming("in", 1.0, bm), Edge::outgoing("out", 1.0, bp)]);
    let cond = VertexCondition::Separated(SeparatedCondition {
        y_basis: vec![vec_from(&[1.0, 1.0])],
        u: CMat::from_element(1, 1, u),
    });
    (g, cond)
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, k: usize) -> CMat {
    CMat::from_fn(r, k, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_graph(rng: &mut ChaCha8Rng, nm: usize, np: usize) -> StarGraph {
    let mut edges: Vec<Edge> =
        (0..nm).map(|i| Edge::incoming(format!("m{i}"), rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0))).collect();
    edges.extend((0..np).map(|i| Edge::outgoing(format!("p{i}"), rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0))));
    StarGraph::new(edges)
}

/// Krein identity for the √2 matrix, with `B±` written out for `α = 1`, `β = 0`.
fn criterion_1() -> Outcome {
    const TOL: f64 = 1e-12;
    const BUDGET: Duration = Duration::from_millis(1);
    let b = CMat::from_row_slice(3, 3, &[c(0.0), c(0.0), c(-1.0), c(0.0), c(1.0), c(0.0), c(-1.0), c(0.0), c(0.0)]);
    let l = sqrt2_matrix();
    let residual = (l.adjoint() * &b * &l - &b).norm();
    let g = StarGraph::new(vec![Edge::incoming("in", 1.0, 0.0), Edge::outgoing("out", 1.0, 0.0)]);
    let cond = GeneralCondition { l };
    let mut best = Duration::MAX;
    let mut verdict = None;
    for _ in 0..20 {
        let t = Instant::now();
        let cl = classify_general(&g, &cond, DEFAULT_TOL).unwrap();
        best = best.min(t.elapsed());
        verdict = Some(cl.verdict);
    }
    Outcome {
        pass: residual <= TOL && verdict == Some(Verdict::SkewAdjoint) && best < BUDGET,
        detail: format!(
            "residual {residual:.1e} (≤ {TOL:.0e}), verdict {}, classify {best:?} (< {BUDGET:?})",
            verdict.unwrap()
        ),
    }
}

fn criterion_2() -> Outcome {
    const BUDGET: Duration = Duration::from_secs(1);
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = 0;
    for _ in 0..1000 {
        let alpha = rng.gen_range(1e-2..1e2);
        let beta = rng.gen_range(-1e2..1e2);
        let neg = (
            count_l2_solutions(alpha, beta, 1, HalfLine::NegAxis),
            count_l2_solutions(alpha, beta, -1, HalfLine::NegAxis),
        );
        let pos = (
            count_l2_solutions(alpha, beta, 1, HalfLine::PosAxis),
            count_l2_solutions(alpha, beta, -1, HalfLine::PosAxis),
        );
        bad += usize::from(neg != (2, 1)) + usize::from(pos != (1, 2));
    }
    let mut bad_graphs = 0;
    for nm in 1..=5 {
        for np in 1..=5 {
            let d = deficiency_indices(&random_graph(&mut rng, nm, np));
            bad_graphs += usize::from((d.n_plus, d.n_minus) != (2 * nm + np, nm + 2 * np));
        }
    }
    let elapsed = t.elapsed();
    Outcome {
        pass: bad == 0 && bad_graphs == 0 && elapsed < BUDGET,
        detail: format!(
            "{bad} bad half-line counts of 2000, {bad_graphs} bad graphs of 25, {elapsed:?} (< {BUDGET:?})"
        ),
    }
}

fn random_unitary(rng: &mut ChaCha8Rng, bm: &KreinForm, bp: &KreinForm) -> CMat {
    let l0 = krein_congruence(bm, bp).unwrap();
    let a = random_matrix(rng, bp.dim(), bp.dim());
    let s = (&a - a.adjoint()) * c(0.5);
    expm(&(bp.matrix.clone().lu().solve(&s).unwrap())).unwrap() * l0
}

fn criterion_3() -> Outcome {
    const TOL: f64 = 1e-8;
    const INSTANCES: usize = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut agree, mut unitary) = (0, 0);
    for k in 0..INSTANCES {
        let m = 1 + k % 3;
        let g = random_graph(&mut rng, m, m);
        let (bm, bp) = krein_pair(&g);
        let mut l = random_unitary(&mut rng, &bm, &bp);
        if k % 2 == 1 {
            let eps = rng.gen_range(1e-3..0.3) * l.norm();
            l += random_matrix(&mut rng, l.nrows(), l.ncols()) * c(eps);
        }
        let u = is_krein_unitary(&l, &bm, &bp, TOL).holds;
        let so = is_self_orthogonal(&graph_basis(&l), &bm, &bp, TOL).unwrap();
        agree += usize::from(u == so);
        unitary += usize::from(u);
    }
    Outcome {
        pass: agree == INSTANCES && INSTANCES >= 20,
        detail: format!("{agree}/{INSTANCES} balanced instances agree ({unitary} unitary), tol {TOL:.0e}"),
    }
}

/// Errors are measured relative to `1 + ‖B+‖‖L‖‖x‖‖y‖`.
fn criterion_4() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_dual, mut worst_inv) = (0.0f64, 0.0f64);
    let mut pairs = 0;
    for k in 0..10 {
        let g = random_graph(&mut rng, 1 + k % 3, 1 + (k / 3) % 3);
        let (bm, bp) = krein_pair(&g);
        let l = random_matrix(&mut rng, bp.dim(), bm.dim());
        let ls = sharp_adjoint(&l, &bm, &bp).unwrap();
        for _ in 0..100 {
            let x = random_vector(&mut rng, bm.dim());
            let y = random_vector(&mut rng, bp.dim());
            let lhs = krein_inner(&bp, &(&l * &x), &y).unwrap();
            let rhs = krein_inner(&bm, &x, &(&ls * &y)).unwrap();
            let scale = 1.0 + bp.matrix.norm() * l.norm() * x.norm() * y.norm();
            worst_dual = worst_dual.max((lhs - rhs).norm() / scale);
            pairs += 1;
        }
        let lss = sharp_adjoint(&ls, &bp, &bm).unwrap();
        worst_inv = worst_inv.max((&lss - &l).norm() / (1.0 + l.norm()));
    }
    Outcome {
        pass: worst_dual <= TOL && worst_inv <= TOL,
        detail: format!("{pairs} pairs: duality {worst_dual:.1e}, (L♯)♯ − L {worst_inv:.1e} (≤ {TOL:.0e})"),
    }
}

/// Shared setup of criteria 5 and 6.
fn continuity_family(u: f64) -> (Simulation, Vec<C64>, f64) {
    let (g, cond) = two_lines(0.0, 0.0, c(u));
    let sys = DiscreteSystem::assemble(&g, &cond, GridSpec::new(40.0, 400).unwrap()).unwrap();
    let t_max = contamination_window(&sys, 1.0);
    let u0 = sample(&sys, |e, x| c(if e == 0 { gaussian(x, -10.0, 1.0, 1.0) } else { 0.0 }));
    (Simulation::new(sys, 1e-3).unwrap(), u0, t_max)
}

fn criterion_5() -> Outcome {
    const TOL: f64 = 1e-6;
    const BUDGET: Duration = Duration::from_secs(30);
    let t = Instant::now();
    let (sim, u0, t_max) = continuity_family(1.0);
    let st = sim.run(&u0, steps_for(4.0, 1e-3), 10).unwrap();
    let m0 = st.history[0].momentum;
    let drift = st.history.iter().filter(|r| r.t <= t_max).map(|r| (r.momentum - m0).abs() / m0).fold(0.0, f64::max);
    let budget = st.history.iter().map(|r| (r.momentum + r.farend_loss - m0).abs() / m0).fold(0.0, f64::max);
    let elapsed = t.elapsed();
    Outcome {
        pass: drift <= TOL && elapsed < BUDGET,
        detail: format!(
            "drift {drift:.1e} for t ≤ T_max = {t_max:.3} (≤ {TOL:.0e}); momentum + far-end loss over [0, 4] {budget:.1e}; {elapsed:.2?}"
        ),
    }
}

fn criterion_6() -> Outcome {
    const MIN_DECREASE: f64 = 0.01;
    let (sim, u0, _) = continuity_family(0.5);
    let st = sim.run(&u0, steps_for(4.0, 1e-3), 10).unwrap();
    let m: Vec<f64> = st.history.iter().map(|r| r.momentum).collect();
    let max_increase = m.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let decrease = (m[0] - m[m.len() - 1]) / m[0];
    Outcome {
        pass: max_increase <= 0.0 && decrease >= MIN_DECREASE,
        detail: format!(
            "largest step-to-step change {max_increase:.1e} (≤ 0), total decrease {:.2}% (≥ {:.0}%)",
            100.0 * decrease,
            100.0 * MIN_DECREASE
        ),
    }
}

/// Relative mass drift inside the contamination window, Gaussian of width 2
/// centred on the vertex.
fn mass_drift(bm: f64, bp: f64) -> f64 {
    let (g, cond) = two_lines(bm, bp, c(1.0));
    let sys = DiscreteSystem::assemble(&g, &cond, GridSpec::new(40.0, 400).unwrap()).unwrap();
    let t_max = contamination_window(&sys, 2.0);
    let u0 = sample(&sys, |_, x| c(gaussian(x, 0.0, 2.0, 1.0)));
    let sim = Simulation::new(sys, 1e-3).unwrap();
    let st = sim.run(&u0, steps_for(t_max, 1e-3), 10).unwrap();
    let m0 = st.history[0].mass;
    st.history.iter().map(|r| (r.mass - m0).norm() / m0.norm()).fold(0.0, f64::max)
}

fn criterion_7() -> Outcome {
    const TOL: f64 = 1e-5;
    let equal = mass_drift(0.5, 0.5);
    let unequal = mass_drift(1.0, 0.0);
    Outcome {
        pass: equal <= TOL && unequal >= 10.0 * TOL,
        detail: format!("β− = β+: {equal:.1e} (≤ {TOL:.0e}); β− ≠ β+: {unequal:.1e} (≥ {:.0e})", 10.0 * TOL),
    }
}

fn criterion_8() -> Outcome {
    const BUDGET: Duration = Duration::from_secs(120);
    let t = Instant::now();
    let s = free_line_study().unwrap();
    let elapsed = t.elapsed();
    let errs: Vec<String> = s.levels.iter().map(|l| format!("{:.2e}", l.relative_error)).collect();
    let orders: Vec<String> = s.orders.iter().map(|o| format!("{o:.2}")).collect();
    let finest = s.levels.last().unwrap().relative_error;
    Outcome {
        pass: s.orders.iter().all(|&o| o >= MIN_ORDER) && finest <= MAX_FINEST_ERROR && elapsed < BUDGET,
        detail: format!(
            "errors [{}], orders [{}] (≥ {MIN_ORDER}), finest ≤ {MAX_FINEST_ERROR:.0e}; {elapsed:.2?}",
            errs.join(", "),
            orders.join(", ")
        ),
    }
}

fn criterion_9() -> Outcome {
    const MIN_RATIO: f64 = 3.73; // 2^1.9
    let (g, cond) = two_lines(0.0, 0.0, c(1.0));
    let sys = DiscreteSystem::assemble(&g, &cond, GridSpec::new(15.0, 150).unwrap()).unwrap();
    let n = sys.len();
    let u0 = project_initial(&sys, &sample(&sys, |_, x| c(gaussian(x, -2.0, 1.0, 1.0)))).unwrap();
    let exact = expm_oracle(&sys, &u0, 1.0).unwrap();
    let mut errs = Vec::new();
    for dt in [0.02, 0.01, 0.005] {
        let sim = Simulation::new(sys.clone(), dt).unwrap();
        let st = sim.run(&u0, steps_for(1.0, dt), usize::MAX).unwrap();
        let e: f64 = st.u.iter().zip(&exact).zip(&sys.weights).map(|((a, b), w)| w * (a - b).norm_sqr()).sum();
        errs.push(e.sqrt());
    }
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    Outcome {
        pass: n <= 600 && ratios.iter().all(|&r| r >= MIN_RATIO),
        detail: format!(
            "{n} unknowns, L² errors [{:.2e}, {:.2e}, {:.2e}], ratios [{:.2}, {:.2}] (≥ {MIN_RATIO})",
            errs[0], errs[1], errs[2], ratios[0], ratios[1]
        ),
    }
}

fn criterion_10() -> Outcome {
    const REAL_TOL: f64 = 1e-10;
    const CONTROL_MIN: f64 = 1e-3;
    let run = |u: C64| {
        let (g, cond) = two_lines(0.0, 0.0, u);
        let sys = DiscreteSystem::assemble(&g, &cond, GridSpec::new(20.0, 200).unwrap()).unwrap();
        let u0: Vec<f64> = sample(&sys, |_, x| c(gaussian(x, -2.0, 1.0, 1.0))).iter().map(|z| z.re).collect();
        let sup = u0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sim = Simulation::new(sys, 1e-3).unwrap();
        realness_check(&sim, &u0, 1.0).unwrap() / sup
    };
    let real = run(c(1.0));
    let complex = run(C64::from_polar(1.0, std::f64::consts::FRAC_PI_4));
    Outcome {
        pass: real <= REAL_TOL && complex >= CONTROL_MIN,
        detail: format!("U = 1: {real:.1e} (≤ {REAL_TOL:.0e}); U = e^(iπ/4): {complex:.2e} (≥ {CONTROL_MIN:.0e})"),
    }
}

fn criterion_11() -> Outcome {
    const BUDGET: Duration = Duration::from_secs(300);
    let t = Instant::now();
    let checks = check_entries(&entries(), DEFAULT_TOL).unwrap();
    let matched = checks.iter().filter(|c| c.classification_pass).count();
    let out = Command::new(env!("CARGO_BIN_EXE_airy-graph")).arg("validate").output().unwrap();
    let elapsed = t.elapsed();
    Outcome {
        pass: matched == checks.len() && out.status.code() == Some(0) && elapsed < BUDGET,
        detail: format!(
            "{matched}/{} entries match, `validate` exit {:?}; {elapsed:.2?} (< {BUDGET:?})",
            checks.len(),
            out.status.code()
        ),
    }
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("Krein identity for the sqrt(2) matrix", criterion_1),
        ("deficiency indices", criterion_2),
        ("unitary iff self-orthogonal", criterion_3),
        ("sharp-adjoint duality", criterion_4),
        ("momentum conservation", criterion_5),
        ("momentum contraction", criterion_6),
        ("mass conservation dichotomy", criterion_7),
        ("free-line oracle convergence", criterion_8),
        ("Crank-Nicolson vs matrix exponential", criterion_9),
        ("realness", criterion_10),
        ("catalog conformance", criterion_11),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += usize::from(!o.pass);
        println!("criterion {:>2} {}: {name}: {}", k + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
