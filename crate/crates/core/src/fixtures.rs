//! Seeded random fixtures: weighted trees, tree intersection matrices and
//! fully consistent decorations.
//!
//! The decoration generator builds a random negative-definite weighted tree,
//! decorates every corner with a reciprocal index pair (or a saddle-node
//! pair), and closes the books by giving each component exactly one tail
//! whose index makes the component's index sum equal its weight. Draws where
//! a tail lands on zero or on a positive rational of small denominator are
//! redrawn, since those would not be reduced singularities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::definiteness::is_negative_definite;
use crate::flow::{FlowSpec, PolyPerturbation};
use crate::graph::{
    Component, CornerSingularity, DecoratedGraph, IntersectionMatrix, TailSingularity,
};
use crate::numeric::{Complex64, DEFAULT_TOLERANCE};

/// A bare weighted tree: weights per vertex and edges as index pairs.
#[derive(Debug, Clone)]
pub struct WeightedTree {
    pub weights: Vec<i64>,
    pub edges: Vec<(usize, usize)>,
}

impl WeightedTree {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn intersection_matrix(&self) -> IntersectionMatrix {
        let n = self.len();
        let mut entries = vec![vec![0i64; n]; n];
        for (i, &w) in self.weights.iter().enumerate() {
            entries[i][i] = w;
        }
        for &(i, j) in &self.edges {
            entries[i][j] += 1;
            entries[j][i] += 1;
        }
        IntersectionMatrix::from_entries(entries)
    }
}

/// Uniform random attachment tree with 1..=max_vertices vertices and
/// integer weights drawn from the inclusive range (zero is skipped).
pub fn random_tree(
    rng: &mut ChaCha8Rng,
    max_vertices: usize,
    weight_range: (i64, i64),
) -> WeightedTree {
    let n = rng.gen_range(1..=max_vertices);
    let weights = (0..n)
        .map(|_| loop {
            let w = rng.gen_range(weight_range.0..=weight_range.1);
            if w != 0 {
                break w;
            }
        })
        .collect();
    let edges = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    WeightedTree { weights, edges }
}

/// Random tree, redrawn until its intersection matrix is negative definite.
pub fn random_negative_definite_tree(
    rng: &mut ChaCha8Rng,
    max_vertices: usize,
    weight_range: (i64, i64),
) -> WeightedTree {
    loop {
        let tree = random_tree(rng, max_vertices, weight_range);
        if is_negative_definite(&tree.intersection_matrix()) {
            return tree;
        }
    }
}

/// Turn a weighted tree into an undecorated graph (saddle corners with
/// index -1 on both sides), useful for order and h tests.
pub fn tree_to_graph(tree: &WeightedTree) -> DecoratedGraph {
    let components = tree
        .weights
        .iter()
        .enumerate()
        .map(|(i, &w)| Component {
            id: vertex_id(i),
            weight: w,
            invariant: true,
            dicritical: false,
        })
        .collect();
    let corners = tree
        .edges
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| CornerSingularity {
            id: corner_id(k),
            a: vertex_id(i),
            b: vertex_id(j),
            cs_a: Complex64::new(-1.0, 0.0),
            cs_b: Complex64::new(-1.0, 0.0),
            saddle_node: false,
            strong_side: None,
        })
        .collect();
    DecoratedGraph::new(components, corners, vec![], DEFAULT_TOLERANCE)
        .expect("tree graph is valid")
}

fn vertex_id(i: usize) -> String {
    format!("P{:02}", i + 1)
}

fn corner_id(k: usize) -> String {
    format!("z{:02}", k + 1)
}

fn tail_id(i: usize) -> String {
    format!("q{:02}", i + 1)
}

/// True when `x` is within `tol` of a fraction p/q with 1 <= q <= max_den.
fn near_small_rational(x: f64, max_den: i64, tol: f64) -> bool {
    (1..=max_den).any(|q| {
        let p = (x * q as f64).round();
        (x - p / q as f64).abs() <= tol
    })
}

fn corner_indices(rng: &mut ChaCha8Rng) -> (Complex64, Complex64, bool, bool) {
    // (cs_a, cs_b, saddle_node, strong_is_a)
    let kind = rng.gen_range(0u8..100);
    if kind < 35 {
        // Saddle: lambda real negative, reciprocal pair.
        let lambda = -rng.gen_range(0.2..5.0);
        (
            Complex64::new(lambda, 0.0),
            Complex64::new(1.0 / lambda, 0.0),
            false,
            false,
        )
    } else if kind < 70 {
        // Hyperbolic: lambda off the real axis.
        let r = rng.gen_range(0.2..5.0);
        let theta = rng.gen_range(0.15..std::f64::consts::PI - 0.15);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let lambda = Complex64::from_polar(r, sign * theta);
        (lambda, 1.0 / lambda, false, false)
    } else if kind < 85 {
        // Node: lambda real positive (floats are treated as irrational).
        let lambda = rng.gen_range(0.2..5.0);
        (
            Complex64::new(lambda, 0.0),
            Complex64::new(1.0 / lambda, 0.0),
            false,
            false,
        )
    } else {
        // Saddle-node: strong side 0, central side mu, random orientation.
        let mu = Complex64::from_polar(
            rng.gen_range(0.2..5.0),
            rng.gen_range(0.0..2.0 * std::f64::consts::PI),
        );
        let strong_is_a = rng.gen_bool(0.5);
        if strong_is_a {
            (Complex64::new(0.0, 0.0), mu, true, true)
        } else {
            (mu, Complex64::new(0.0, 0.0), true, false)
        }
    }
}

/// A consistent decoration over a random negative-definite tree (weights in
/// [-10, -2]): every corner carries a reciprocal or saddle-node pair and
/// every component carries exactly one tail balancing its index sum.
pub fn random_consistent_decoration(seed: u64) -> DecoratedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = random_negative_definite_tree(&mut rng, 12, (-10, -2));
    let n = tree.len();

    'redraw: loop {
        let mut corners = Vec::with_capacity(tree.edges.len());
        let mut sums = vec![Complex64::new(0.0, 0.0); n];
        for (k, &(i, j)) in tree.edges.iter().enumerate() {
            let (cs_a, cs_b, saddle_node, strong_is_a) = corner_indices(&mut rng);
            sums[i] += cs_a;
            sums[j] += cs_b;
            corners.push(CornerSingularity {
                id: corner_id(k),
                a: vertex_id(i),
                b: vertex_id(j),
                cs_a,
                cs_b,
                saddle_node,
                strong_side: saddle_node.then(|| {
                    if strong_is_a {
                        vertex_id(i)
                    } else {
                        vertex_id(j)
                    }
                }),
            });
        }

        let mut tails = Vec::with_capacity(n);
        for (i, &sum) in sums.iter().enumerate() {
            let cs = Complex64::new(tree.weights[i] as f64, 0.0) - sum;
            let zero = cs.norm() <= 1e-12;
            let positive_small_rational =
                cs.im.abs() <= 1e-12 && cs.re > 0.0 && near_small_rational(cs.re, 32, 1e-6);
            if zero || positive_small_rational {
                continue 'redraw;
            }
            tails.push(TailSingularity {
                id: tail_id(i),
                comp: vertex_id(i),
                cs,
                saddle_node: false,
                strong_is_transverse: false,
            });
        }

        let components = tree
            .weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Component {
                id: vertex_id(i),
                weight: w,
                invariant: true,
                dicritical: false,
            })
            .collect();
        return DecoratedGraph::new(components, corners, tails, DEFAULT_TOLERANCE)
            .expect("generated decoration is valid");
    }
}

/// Random perturbed saddle model on the box of radius 0.5: eigenvalue
/// moduli in [0.5, 3] with `Re l1 > 0 > Re l2`, up to two perturbation
/// monomials with coefficient modulus below 0.1. Draws the sup bound cannot
/// certify are redrawn.
pub fn random_saddle_spec(rng: &mut ChaCha8Rng) -> FlowSpec {
    loop {
        let lambda1 = Complex64::from_polar(rng.gen_range(0.5..3.0), rng.gen_range(-1.2..1.2));
        let lambda2 = -Complex64::from_polar(rng.gen_range(0.5..3.0), rng.gen_range(-1.2..1.2));
        let mut poly = || {
            let terms = (0..rng.gen_range(1..=2))
                .map(|_| {
                    let i = rng.gen_range(0..=2u32);
                    let j = rng.gen_range((i == 0) as u32..=2u32);
                    let coeff = Complex64::from_polar(
                        rng.gen_range(0.0..0.1),
                        rng.gen_range(0.0..std::f64::consts::TAU),
                    );
                    (i, j, coeff)
                })
                .collect();
            PolyPerturbation::new(terms).expect("nonconstant finite terms")
        };
        let eps1 = poly();
        let eps2 = poly();
        if let Ok(spec) = FlowSpec::perturbed_saddle(lambda1, lambda2, eps1, eps2, 0.5, 0.5) {
            return spec;
        }
    }
}

/// Random start off both axes with coordinate moduli in [r_min, r_max].
pub fn random_off_axis_start(
    rng: &mut ChaCha8Rng,
    r_min: f64,
    r_max: f64,
) -> (Complex64, Complex64) {
    let x = Complex64::from_polar(
        rng.gen_range(r_min..r_max),
        rng.gen_range(0.0..std::f64::consts::TAU),
    );
    let y = Complex64::from_polar(
        rng.gen_range(r_min..r_max),
        rng.gen_range(0.0..std::f64::consts::TAU),
    );
    (x, y)
}
