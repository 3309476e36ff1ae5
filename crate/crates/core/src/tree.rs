//! Rooted ordering of a weighted tree and the exact rational h-recursion.
//!
//! Fixing any component `m` as root orients every edge toward `m`. Minimal
//! vertices (no predecessors) get `h(v) = w(v)`; every other vertex gets
//! `h(v) = w(v) - Σ 1/h(p)` over its immediate predecessors, evaluated
//! bottom-up in exact rationals. On a negative-definite tree every value is
//! strictly negative, for any root choice.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::Zero;
use thiserror::Error;

use crate::graph::DecoratedGraph;
use crate::numeric::{rational_int, BigRational};

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("graph is not a tree")]
    NotATree,
    #[error("unknown root `{0}`")]
    UnknownRoot(String),
    #[error("h({0}) = 0: the recursion divides by zero, so the intersection matrix is not negative definite")]
    DivisionByZeroH(String),
}

/// Orientation of a tree toward a fixed root, with path lengths and levels.
#[derive(Debug, Clone)]
pub struct RootedOrder {
    root: String,
    /// Successor (toward the root) and the corner crossed to reach it.
    successor: HashMap<String, (String, String)>,
    /// Immediate predecessors (away from the root) with their corners,
    /// sorted by component id.
    predecessors: HashMap<String, Vec<(String, String)>>,
    /// Edge distance to the root.
    depth: HashMap<String, usize>,
    /// Maximum depth over all vertices.
    size: usize,
}

impl RootedOrder {
    pub fn root(&self) -> &str {
        &self.root
    }

    /// Edge count of the unique path from `v` to the root.
    pub fn depth(&self, v: &str) -> Option<usize> {
        self.depth.get(v).copied()
    }

    /// Maximum depth; vertices sit at level `size - depth`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn level(&self, v: &str) -> Option<usize> {
        self.depth(v).map(|n| self.size - n)
    }

    /// Successor of `v` (toward the root) and the corner crossed.
    pub fn successor(&self, v: &str) -> Option<(&str, &str)> {
        self.successor.get(v).map(|(s, z)| (s.as_str(), z.as_str()))
    }

    pub fn predecessors(&self, v: &str) -> &[(String, String)] {
        self.predecessors.get(v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Vertices with no predecessors. This is the set of leaves distinct
    /// from the root, or the root itself on a one-vertex tree.
    pub fn minimal_elements(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .depth
            .keys()
            .filter(|v| self.predecessors(v).is_empty())
            .map(String::as_str)
            .collect();
        out.sort_unstable();
        out
    }

    /// All vertices ordered by decreasing depth (minimal elements first),
    /// ties broken by id. This is the evaluation order of the h-recursion.
    pub fn bottom_up(&self) -> Vec<&str> {
        let mut vs: Vec<&str> = self.depth.keys().map(String::as_str).collect();
        vs.sort_unstable_by_key(|v| (std::cmp::Reverse(self.depth[*v]), *v));
        vs
    }
}

/// Orient the tree toward the root `m`.
pub fn root_order(g: &DecoratedGraph, m: &str) -> Result<RootedOrder, TreeError> {
    if g.component(m).is_none() {
        return Err(TreeError::UnknownRoot(m.to_string()));
    }
    if !g.is_tree() {
        return Err(TreeError::NotATree);
    }
    let mut successor = HashMap::new();
    let mut predecessors: HashMap<String, Vec<(String, String)>> = HashMap::new();
    let mut depth = HashMap::new();
    depth.insert(m.to_string(), 0usize);
    predecessors.entry(m.to_string()).or_default();
    let mut queue = VecDeque::from([m.to_string()]);
    while let Some(v) = queue.pop_front() {
        let d = depth[&v];
        let mut nbrs: Vec<(String, String)> = g
            .corners_at(&v)
            .map(|z| (z.other_side(&v).unwrap().to_string(), z.id.clone()))
            .collect();
        nbrs.sort();
        for (w, z) in nbrs {
            if depth.contains_key(&w) {
                continue;
            }
            depth.insert(w.clone(), d + 1);
            successor.insert(w.clone(), (v.clone(), z.clone()));
            predecessors.entry(w.clone()).or_default();
            predecessors
                .entry(v.clone())
                .or_default()
                .push((w.clone(), z));
            queue.push_back(w);
        }
    }
    let size = depth.values().copied().max().unwrap_or(0);
    Ok(RootedOrder {
        root: m.to_string(),
        successor,
        predecessors,
        depth,
        size,
    })
}

/// Exact rational h-values, one per component.
#[derive(Debug, Clone, PartialEq)]
pub struct HValues {
    values: BTreeMap<String, BigRational>,
}

impl HValues {
    pub fn get(&self, v: &str) -> Option<&BigRational> {
        self.values.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BigRational)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evaluate the h-recursion bottom-up. Fails with `DivisionByZeroH` if some
/// predecessor value hits zero, which certifies that the intersection matrix
/// is not negative definite.
pub fn compute_h(g: &DecoratedGraph, order: &RootedOrder) -> Result<HValues, TreeError> {
    let mut values: BTreeMap<String, BigRational> = BTreeMap::new();
    for v in order.bottom_up() {
        let w = rational_int(g.component(v).expect("ordered vertex exists").weight);
        let mut h = w;
        for (p, _corner) in order.predecessors(v) {
            let hp = &values[p];
            if hp.is_zero() {
                return Err(TreeError::DivisionByZeroH(p.clone()));
            }
            h -= hp.recip();
        }
        values.insert(v.to_string(), h);
    }
    Ok(HValues { values })
}

/// Negativity audit of an h-map: lists every vertex with `h(v) >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HNegativityReport {
    pub all_negative: bool,
    pub violations: Vec<String>,
}

pub fn verify_h_negative(h: &HValues) -> HNegativityReport {
    let zero = BigRational::zero();
    let violations: Vec<String> = h
        .iter()
        .filter(|(_, value)| **value >= zero)
        .map(|(v, _)| v.to_string())
        .collect();
    HNegativityReport {
        all_negative: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Component, CornerSingularity, TailSingularity};
    use crate::numeric::{rational, Complex64, DEFAULT_TOLERANCE};

    fn chain(weights: &[i64]) -> DecoratedGraph {
        let components: Vec<Component> = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Component {
                id: format!("v{}", i + 1),
                weight: w,
                invariant: true,
                dicritical: false,
            })
            .collect();
        let corners: Vec<CornerSingularity> = (1..weights.len())
            .map(|i| CornerSingularity {
                id: format!("z{i}"),
                a: format!("v{i}"),
                b: format!("v{}", i + 1),
                cs_a: Complex64::new(-1.0, 0.0),
                cs_b: Complex64::new(-1.0, 0.0),
                saddle_node: false,
                strong_side: None,
            })
            .collect();
        DecoratedGraph::new(
            components,
            corners,
            Vec::<TailSingularity>::new(),
            DEFAULT_TOLERANCE,
        )
        .unwrap()
    }

    fn star(center_w: i64, leaf_ws: &[i64]) -> DecoratedGraph {
        let mut components = vec![Component {
            id: "c".into(),
            weight: center_w,
            invariant: true,
            dicritical: false,
        }];
        let mut corners = vec![];
        for (i, &w) in leaf_ws.iter().enumerate() {
            components.push(Component {
                id: format!("l{}", i + 1),
                weight: w,
                invariant: true,
                dicritical: false,
            });
            corners.push(CornerSingularity {
                id: format!("z{}", i + 1),
                a: "c".into(),
                b: format!("l{}", i + 1),
                cs_a: Complex64::new(-1.0, 0.0),
                cs_b: Complex64::new(-1.0, 0.0),
                saddle_node: false,
                strong_side: None,
            });
        }
        DecoratedGraph::new(components, corners, vec![], DEFAULT_TOLERANCE).unwrap()
    }

    #[test]
    fn single_vertex_order() {
        let g = chain(&[-3]);
        let order = root_order(&g, "v1").unwrap();
        assert_eq!(order.size(), 0);
        assert_eq!(order.minimal_elements(), vec!["v1"]);
        assert!(order.predecessors("v1").is_empty());
    }

    #[test]
    fn chain_order_depths() {
        let g = chain(&[-2, -2, -2]);
        let order = root_order(&g, "v3").unwrap();
        assert_eq!(order.depth("v1"), Some(2));
        assert_eq!(order.depth("v2"), Some(1));
        assert_eq!(order.depth("v3"), Some(0));
        assert_eq!(order.size(), 2);
        assert_eq!(order.minimal_elements(), vec!["v1"]);
        assert_eq!(order.successor("v1").unwrap().0, "v2");
    }

    #[test]
    fn star_order() {
        let g = star(-2, &[-2, -2]);
        let order = root_order(&g, "c").unwrap();
        let preds: Vec<&str> = order
            .predecessors("c")
            .iter()
            .map(|(p, _)| p.as_str())
            .collect();
        assert_eq!(preds, vec!["l1", "l2"]);
        assert_eq!(order.minimal_elements(), vec!["l1", "l2"]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = chain(&[-2, -2]);
        assert_eq!(
            root_order(&g, "nope").unwrap_err(),
            TreeError::UnknownRoot("nope".into())
        );
    }

    #[test]
    fn h_single_vertex() {
        let g = chain(&[-3]);
        let order = root_order(&g, "v1").unwrap();
        let h = compute_h(&g, &order).unwrap();
        assert_eq!(h.get("v1").unwrap(), &rational_int(-3));
    }

    #[test]
    fn h_two_chain() {
        let g = chain(&[-2, -2]);
        let order = root_order(&g, "v2").unwrap();
        let h = compute_h(&g, &order).unwrap();
        assert_eq!(h.get("v1").unwrap(), &rational_int(-2));
        assert_eq!(h.get("v2").unwrap(), &rational(-3, 2));
        assert!(verify_h_negative(&h).all_negative);
    }

    #[test]
    fn h_chain_closed_form() {
        // (-2)-chain rooted at one end: h(v_k) = -(k+1)/k.
        for n in 1..=10usize {
            let g = chain(&vec![-2i64; n]);
            let order = root_order(&g, &format!("v{n}")).unwrap();
            let h = compute_h(&g, &order).unwrap();
            for k in 1..=n {
                assert_eq!(
                    h.get(&format!("v{k}")).unwrap(),
                    &rational(-(k as i64 + 1), k as i64),
                    "chain length {n}, vertex {k}"
                );
            }
        }
    }

    #[test]
    fn h_star_example() {
        let g = star(-2, &[-2, -2]);
        let order = root_order(&g, "c").unwrap();
        let h = compute_h(&g, &order).unwrap();
        assert_eq!(h.get("c").unwrap(), &rational_int(-1));
        assert!(verify_h_negative(&h).all_negative);
    }

    #[test]
    fn h_zero_is_reported_not_divided() {
        // Weights (-1,-1): h(v2) = -1 + 1 = 0. No division happens, but the
        // negativity audit flags v2.
        let g = chain(&[-1, -1]);
        let order = root_order(&g, "v2").unwrap();
        let h = compute_h(&g, &order).unwrap();
        assert_eq!(h.get("v2").unwrap(), &rational_int(0));
        let report = verify_h_negative(&h);
        assert!(!report.all_negative);
        assert_eq!(report.violations, vec!["v2".to_string()]);
    }

    #[test]
    fn h_division_by_zero_detected() {
        // (-1,-1,-2) rooted at v3: h(v2) = 0 and v3 must divide by it.
        let g = chain(&[-1, -1, -2]);
        let order = root_order(&g, "v3").unwrap();
        assert_eq!(
            compute_h(&g, &order).unwrap_err(),
            TreeError::DivisionByZeroH("v2".into())
        );
    }

    #[test]
    fn h_positive_weight_flagged() {
        let g = chain(&[1]);
        let order = root_order(&g, "v1").unwrap();
        let h = compute_h(&g, &order).unwrap();
        let report = verify_h_negative(&h);
        assert!(!report.all_negative);
        assert_eq!(report.violations, vec!["v1".to_string()]);
    }

    #[test]
    fn telescoping_identity_at_root() {
        // w(m) - h(m) = Σ 1/h(pred) exactly.
        let g = star(-3, &[-2, -4, -2]);
        let order = root_order(&g, "c").unwrap();
        let h = compute_h(&g, &order).unwrap();
        let lhs = rational_int(-3) - h.get("c").unwrap().clone();
        let mut rhs = rational_int(0);
        for (p, _) in order.predecessors("c") {
            rhs += h.get(p).unwrap().recip();
        }
        assert_eq!(lhs, rhs);
    }
}
