use airy_graph::extension_theory::{count_l2_solutions, cubic_roots, deficiency_indices, HalfLine};
use airy_graph::graph_model::{Edge, StarGraph};
use airy_graph::krein_bc::{separated_to_general, SeparatedCondition};
use airy_graph::linalg::vec_from;
use airy_graph::{CMat, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn poly(alpha: f64, beta: f64, s: f64, z: C64) -> C64 {
    z * z * z * alpha + z * beta + s
}

/// Roots are checked against the polynomial and Vieta's relations, so the
/// counts do not rest on the eigenvalue solver alone.
#[test]
fn thousand_samples_have_counts_two_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let alpha = 10f64.powf(rng.gen_range(-2.0..2.0));
        let beta = rng.gen_range(-50.0..50.0);
        for s in [1.0, -1.0] {
            let r = cubic_roots(alpha, beta, s);
            let scale = alpha * r.iter().map(|z| z.norm().powi(3)).fold(1.0, f64::max) + beta.abs() * 10.0;
            for z in r {
                assert!(poly(alpha, beta, s, z).norm() <= 1e-9 * scale, "residual at {z}");
                assert!(z.re.abs() > 1e-12, "root {z} on the imaginary axis");
            }
            let sum: C64 = r.iter().sum();
            assert!(sum.norm() <= 1e-9 * (1.0 + r.iter().map(|z| z.norm()).sum::<f64>()));
            let prod = r[0] * r[1] * r[2];
            assert!((prod + s / alpha).norm() <= 1e-9 * (1.0 / alpha).max(prod.norm()));
        }
        assert_eq!(count_l2_solutions(alpha, beta, 1, HalfLine::NegAxis), 2);
        assert_eq!(count_l2_solutions(alpha, beta, -1, HalfLine::NegAxis), 1);
        assert_eq!(count_l2_solutions(alpha, beta, 1, HalfLine::PosAxis), 1);
        assert_eq!(count_l2_solutions(alpha, beta, -1, HalfLine::PosAxis), 2);
    }
}

fn graph(nm: usize, np: usize, rng: &mut ChaCha8Rng) -> StarGraph {
    let mut edges: Vec<Edge> =
        (0..nm).map(|i| Edge::incoming(format!("m{i}"), rng.gen_range(0.1..5.0), rng.gen_range(-5.0..5.0))).collect();
    edges.extend((0..np).map(|i| Edge::outgoing(format!("p{i}"), rng.gen_range(0.1..5.0), rng.gen_range(-5.0..5.0))));
    StarGraph::new(edges)
}

#[test]
fn graph_indices_on_all_small_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for nm in 1..=5 {
        for np in 1..=5 {
            let d = deficiency_indices(&graph(nm, np, &mut rng));
            assert_eq!((d.n_plus, d.n_minus), (2 * nm + np, nm + 2 * np), "|E-|={nm}, |E+|={np}");
            assert_eq!(d.balanced, nm == np);
            assert_eq!(d.per_edge.len(), nm + np);
        }
    }
}

/// A separated condition imposes as many rows as the deficiency index `n−`.
#[test]
fn separated_row_count_equals_lower_index() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for nm in 1..=3 {
        for np in 1..=3 {
            let g = graph(nm, np, &mut rng);
            for dim_y in 0..=(nm + np).min(2) {
                let y: Vec<_> = (0..dim_y)
                    .map(|k| {
                        vec_from(
                            &(0..nm + np).map(|i| if i == k { 1.0 } else { 0.3 * (i + k) as f64 }).collect::<Vec<_>>(),
                        )
                    })
                    .collect();
                let u = CMat::from_fn(np, nm, |i, j| C64::new(0.1 * (i + j + 1) as f64, 0.0));
                let rows = separated_to_general(&g, &SeparatedCondition { y_basis: y, u }).unwrap();
                assert_eq!(rows.nrows(), deficiency_indices(&g).n_minus);
            }
        }
    }
}

proptest! {
    #[test]
    fn counts_are_stable_in_the_coefficients(alpha in 1e-3f64..1e3, beta in -1e3f64..1e3) {
        prop_assert_eq!(count_l2_solutions(alpha, beta, 1, HalfLine::NegAxis) + count_l2_solutions(alpha, beta, 1, HalfLine::PosAxis), 3);
        prop_assert_eq!(count_l2_solutions(alpha, beta, 1, HalfLine::NegAxis), 2);
        prop_assert_eq!(count_l2_solutions(alpha, beta, -1, HalfLine::PosAxis), 2);
    }
}
