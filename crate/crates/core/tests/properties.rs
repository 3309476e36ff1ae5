//! Cross-module invariants checked on generated fixtures and random values.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use separatrix_core::chains::{transition_allowed, verify_chain, Chain, ChainViolation};
use separatrix_core::cs::{
    cs_formula_residual, is_non_negative_singularity, residual_report, strong_weak_classify,
    SeparatrixStrength, Singularity,
};
use separatrix_core::definiteness::is_negative_definite;
use separatrix_core::fixtures::{random_consistent_decoration, random_tree};
use separatrix_core::flow::{crossing_point, integrate, FlowSpec, StepControl};
use separatrix_core::graph::{DecoratedGraph, IntersectionMatrix, TailSingularity};
use separatrix_core::numeric::Complex64;
use separatrix_core::tree::{compute_h, root_order};
use separatrix_core::DEFAULT_TOLERANCE;

#[test]
fn generated_graphs_round_trip() {
    for seed in 0..60u64 {
        let g = random_consistent_decoration(seed);
        let again = DecoratedGraph::from_json_default(&g.to_json()).unwrap();
        assert_eq!(g, again, "seed {seed}");
        let pretty = DecoratedGraph::from_json_default(&g.to_json_pretty()).unwrap();
        assert_eq!(g, pretty, "seed {seed}");
    }
}

#[test]
fn intersection_matrix_shape_invariants() {
    for seed in 0..60u64 {
        let g = random_consistent_decoration(seed);
        let m = g.intersection_matrix();
        assert!(m.is_symmetric());
        for (i, component) in g.components().iter().enumerate() {
            assert_eq!(m.entries[i][i], component.weight);
            assert_eq!(m.labels[i], component.id);
        }
    }
}

#[test]
fn accepted_corners_satisfy_reciprocity_and_sign_agreement() {
    for seed in 0..60u64 {
        let g = random_consistent_decoration(seed);
        for corner in g.corners() {
            if corner.saddle_node {
                let strong = corner.strong_side.as_deref().unwrap();
                assert_eq!(corner.index_for(strong).unwrap(), Complex64::new(0.0, 0.0));
            } else {
                let deviation = (corner.cs_a * corner.cs_b - Complex64::new(1.0, 0.0)).norm();
                assert!(deviation <= DEFAULT_TOLERANCE);
                // Reciprocals keep the sign of the real part.
                assert!(corner.cs_a.re * corner.cs_b.re >= 0.0);
            }
        }
    }
}

#[test]
fn definiteness_invariant_under_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..100 {
        let tree = random_tree(&mut rng, 8, (-6, 3));
        let m = tree.intersection_matrix();
        let verdict = is_negative_definite(&m);
        let n = tree.len();
        // Random simultaneous row/column permutation.
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let permuted: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| m.entries[perm[i]][perm[j]]).collect())
            .collect();
        assert_eq!(
            is_negative_definite(&IntersectionMatrix::from_entries(permuted)),
            verdict
        );
    }
}

#[test]
fn decreasing_diagonal_preserves_negative_definiteness() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut checked = 0;
    while checked < 60 {
        let tree = random_tree(&mut rng, 8, (-8, -1));
        let m = tree.intersection_matrix();
        if !is_negative_definite(&m) {
            continue;
        }
        checked += 1;
        let i = rng.gen_range(0..tree.len());
        let drop = rng.gen_range(1..=5);
        let mut entries = m.entries.clone();
        entries[i][i] -= drop;
        assert!(is_negative_definite(&IntersectionMatrix::from_entries(
            entries
        )));
    }
}

#[test]
fn h_values_are_stable_under_relabeling() {
    // Renaming vertices permutes every internal ordering; h must follow the
    // renaming exactly.
    for seed in 0..20u64 {
        let g = random_consistent_decoration(seed);
        let renamed_json = g
            .to_json()
            .replace("\"P", "\"X")
            .replace("\"z", "\"y")
            .replace("\"q", "\"w");
        let renamed = DecoratedGraph::from_json_default(&renamed_json).unwrap();
        for component in g.components() {
            let order = root_order(&g, &component.id).unwrap();
            let h = compute_h(&g, &order).unwrap();
            let renamed_root = component.id.replace('P', "X");
            let order2 = root_order(&renamed, &renamed_root).unwrap();
            let h2 = compute_h(&renamed, &order2).unwrap();
            for (v, value) in h.iter() {
                assert_eq!(h2.get(&v.replace('P', "X")).unwrap(), value);
            }
        }
    }
}

#[test]
fn residual_invariant_under_singularity_relabeling() {
    for seed in 0..20u64 {
        let g = random_consistent_decoration(seed);
        let renamed_json = g.to_json().replace("\"z", "\"zz").replace("\"q", "\"qq");
        let renamed = DecoratedGraph::from_json_default(&renamed_json).unwrap();
        for component in g.components() {
            let a = cs_formula_residual(&g, &component.id).unwrap();
            let b = cs_formula_residual(&renamed, &component.id).unwrap();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn transitions_match_chain_clauses_pairwise() {
    // A corner may be crossed from `from` exactly when a two-component chain
    // across it violates neither the node clause (2) nor the orientation
    // clause (3).
    for seed in 0..40u64 {
        let g = random_consistent_decoration(seed);
        for corner in g.corners() {
            for (from, to) in [(&corner.a, &corner.b), (&corner.b, &corner.a)] {
                let allowed = transition_allowed(&g, corner, from);
                let probe = Chain {
                    components: vec![from.clone(), to.clone()],
                    corners: vec![corner.id.clone()],
                    // Any tail id on `to`; clause (4) may fail, clauses
                    // (2)-(3) are checked first.
                    terminal: g
                        .tails_at(to)
                        .next()
                        .map(|t| t.id.clone())
                        .expect("every generated component carries a tail"),
                };
                let check = verify_chain(&g, &probe).unwrap();
                let structurally_allowed = match &check.violation {
                    None => true,
                    Some(ChainViolation::Terminal { .. }) => true,
                    Some(_) => false,
                };
                assert_eq!(
                    allowed, structurally_allowed,
                    "seed {seed} corner {}",
                    corner.id
                );
            }
        }
    }
}

#[test]
fn crossing_has_unique_root() {
    // |x| - level changes sign exactly once along the located trajectory.
    let spec = FlowSpec::saddle(
        Complex64::new(1.0, 0.3),
        Complex64::new(-0.8, 0.5),
        2.0,
        2.0,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let x0 = Complex64::from_polar(
            rng.gen_range(0.05..0.4),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let y0 = Complex64::from_polar(
            rng.gen_range(0.05..0.4),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let crossing = crossing_point(&spec, (x0, y0), 1.0, StepControl::default()).unwrap();
        let values: Vec<f64> = crossing
            .trajectory
            .points
            .iter()
            .map(|(x, _)| x.norm() - 1.0)
            .collect();
        let sign_changes = values
            .windows(2)
            .filter(|w| (w[0] < 0.0) != (w[1] < 0.0))
            .count();
        // Monotone |x|: all interior samples below the level, final at it.
        assert!(sign_changes <= 1);
        assert!(values[..values.len() - 1].iter().all(|&v| v < 0.0));
        assert!(values.last().unwrap().abs() <= 1e-9);
    }
}

#[test]
fn integrator_samples_track_complex_closed_form() {
    // Hyperbolic pair: every accepted sample must sit on the exact orbit
    // x0 exp(l1 t), y0 exp(l2 t).
    let l1 = Complex64::new(0.7, 1.9);
    let l2 = Complex64::new(-0.6, -1.1);
    let spec = FlowSpec::linear(l1, l2, 10.0, 10.0).unwrap();
    let p0 = (Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.4));
    let traj = integrate(&spec, p0, (0.0, 3.0), StepControl::default()).unwrap();
    assert!(traj.points.len() > 10);
    for (&t, &(x, y)) in traj.times.iter().zip(&traj.points) {
        let ex = p0.0 * (l1 * t).exp();
        let ey = p0.1 * (l2 * t).exp();
        assert!((x - ex).norm() <= 1e-7, "t={t}");
        assert!((y - ey).norm() <= 1e-7, "t={t}");
    }
}

#[test]
fn generated_decorations_pass_residuals_for_all_seeds() {
    for seed in 200..260u64 {
        let g = random_consistent_decoration(seed);
        assert!(residual_report(&g, DEFAULT_TOLERANCE, false)
            .iter()
            .all(|r| r.pass));
    }
}

proptest! {
    #[test]
    fn strong_non_saddle_node_tails_are_negative(re in -10.0f64..10.0, im in -10.0f64..10.0) {
        let tail = TailSingularity {
            id: "q".to_string(),
            comp: "P".to_string(),
            cs: Complex64::new(re, im),
            saddle_node: false,
            strong_is_transverse: false,
        };
        let strong = strong_weak_classify(&tail) == SeparatrixStrength::Strong;
        if strong {
            prop_assert!(!is_non_negative_singularity(Singularity::Tail(&tail)));
        } else {
            prop_assert!(is_non_negative_singularity(Singularity::Tail(&tail)));
        }
    }

    #[test]
    fn reciprocal_pairs_agree_in_real_sign(r in 0.2f64..5.0, theta in -3.1f64..3.1) {
        let lambda = Complex64::from_polar(r, theta);
        let inv = 1.0 / lambda;
        prop_assert!(lambda.re * inv.re >= 0.0);
    }

    #[test]
    fn graph_parse_never_panics_on_arbitrary_text(s in ".{0,256}") {
        let _ = DecoratedGraph::from_json_default(&s);
    }
}

#[test]
fn d_star_closures_are_subsets_of_invariant_components() {
    for seed in 0..40u64 {
        let g = random_consistent_decoration(seed);
        let invariant: BTreeSet<String> = g
            .components()
            .iter()
            .filter(|c| c.invariant)
            .map(|c| c.id.clone())
            .collect();
        let mut seen = BTreeSet::new();
        for piece in separatrix_core::cs::d_star_components(&g) {
            for comp in &piece.components {
                assert!(invariant.contains(comp));
                assert!(seen.insert(comp.clone()), "pieces must be disjoint");
            }
        }
        assert_eq!(seen, invariant);
    }
}
