//! Camacho-Sad index calculus on a decorated graph: eigenvalue
//! classification, index-sum residuals, negative-index witnesses, the
//! deleted divisor `D_*`, strong/weak separatrix classification and the
//! separatrix-count inequality.

use std::collections::{BTreeSet, VecDeque};

use num_traits::Signed;
use serde::Serialize;
use thiserror::Error;

use crate::definiteness::is_negative_definite;
use crate::graph::{CornerSingularity, DecoratedGraph, TailSingularity};
use crate::numeric::{rational_to_f64, BigRational, Complex64};
use crate::tree::{HValues, RootedOrder};

/// Reduced-singularity classes by eigenvalue ratio, plus the non-reduced
/// marker for exactly-rational positive ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenvalueClass {
    Hyperbolic,
    Saddle,
    Node,
    SaddleNode,
    NonReduced,
}

/// Eigenvalue input: a floating complex value, or an exact rational when the
/// caller knows the ratio exactly. Floats are never declared rational, so
/// only the exact form can be classified non-reduced.
#[derive(Debug, Clone, PartialEq)]
pub enum Eigenvalue {
    Complex(Complex64),
    Rational(BigRational),
}

pub fn classify_eigenvalue(value: &Eigenvalue) -> EigenvalueClass {
    match value {
        Eigenvalue::Complex(z) => {
            if z.im != 0.0 {
                EigenvalueClass::Hyperbolic
            } else if z.re < 0.0 {
                EigenvalueClass::Saddle
            } else if z.re == 0.0 {
                EigenvalueClass::SaddleNode
            } else {
                EigenvalueClass::Node
            }
        }
        Eigenvalue::Rational(r) => {
            if r.is_negative() {
                EigenvalueClass::Saddle
            } else if r.is_positive() {
                EigenvalueClass::NonReduced
            } else {
                EigenvalueClass::SaddleNode
            }
        }
    }
}

/// Class of a singular corner, from its decoration. Both sides agree in
/// class for real indices (reciprocity preserves sign) and in being real or
/// not, so one side decides.
pub fn corner_class(corner: &CornerSingularity) -> EigenvalueClass {
    if corner.saddle_node {
        EigenvalueClass::SaddleNode
    } else {
        classify_eigenvalue(&Eigenvalue::Complex(corner.cs_a))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CsError {
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("component `{0}` is dicritical and carries no indices")]
    DicriticalComponent(String),
    #[error("subgraph is not a connected tree of invariant components")]
    NotATree,
    #[error("subgraph intersection matrix is not negative definite")]
    NotNegativeDefinite,
    #[error("decoration is inconsistent: {0}")]
    InconsistentDecoration(String),
}

/// Index-sum residual of one invariant component: the sum of the indices of
/// the singularities on it minus its self-intersection. A consistent
/// decoration has residual 0 on every invariant component.
pub fn cs_formula_residual(g: &DecoratedGraph, comp: &str) -> Result<Complex64, CsError> {
    let component = g
        .component(comp)
        .ok_or_else(|| CsError::UnknownComponent(comp.to_string()))?;
    if component.dicritical {
        return Err(CsError::DicriticalComponent(comp.to_string()));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for corner in g.corners_at(comp) {
        // Crossings with a dicritical component are regular points.
        if g.is_singular_corner(corner) {
            sum += corner.index_for(comp).unwrap();
        }
    }
    for tail in g.tails_at(comp) {
        sum += tail.cs;
    }
    Ok(sum - Complex64::new(component.weight as f64, 0.0))
}

/// One row of the residual report.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualEntry {
    pub component: String,
    pub residual_re: f64,
    pub residual_im: f64,
    pub pass: bool,
}

/// Residuals for every invariant component. In partial mode a component
/// passes when the real part of its index sum does not exceed its weight
/// (the decoration may omit singularities of nonnegative real part);
/// otherwise the full complex residual must vanish within tolerance.
pub fn residual_report(g: &DecoratedGraph, tolerance: f64, partial: bool) -> Vec<ResidualEntry> {
    g.components()
        .iter()
        .filter(|c| c.invariant)
        .map(|c| {
            let residual = cs_formula_residual(g, &c.id).expect("invariant component");
            let pass = if partial {
                residual.re <= tolerance
            } else {
                residual.norm() <= tolerance
            };
            ResidualEntry {
                component: c.id.clone(),
                residual_re: residual.re,
                residual_im: residual.im,
                pass,
            }
        })
        .collect()
}

/// One row of the reciprocity report.
#[derive(Debug, Clone, Serialize)]
pub struct ReciprocityEntry {
    pub corner: String,
    /// |cs_a * cs_b - 1| for plain corners, |strong-side index| for
    /// saddle-nodes.
    pub deviation: f64,
    pub saddle_node: bool,
    pub pass: bool,
}

/// Reciprocity audit of every singular corner: the two indices of a plain
/// corner must be mutual inverses; the strong side of a saddle-node must be
/// exactly 0. Crossings with dicritical components carry no indices and are
/// skipped.
pub fn reciprocity_report(g: &DecoratedGraph, tolerance: f64) -> Vec<ReciprocityEntry> {
    g.corners()
        .iter()
        .filter(|corner| g.is_singular_corner(corner))
        .map(|corner| {
            if corner.saddle_node {
                let strong = corner
                    .strong_side
                    .as_deref()
                    .expect("validated saddle-node");
                let deviation = corner.index_for(strong).unwrap().norm();
                ReciprocityEntry {
                    corner: corner.id.clone(),
                    deviation,
                    saddle_node: true,
                    pass: deviation == 0.0,
                }
            } else {
                let deviation = (corner.cs_a * corner.cs_b - Complex64::new(1.0, 0.0)).norm();
                ReciprocityEntry {
                    corner: corner.id.clone(),
                    deviation,
                    saddle_node: false,
                    pass: deviation <= tolerance,
                }
            }
        })
        .collect()
}

/// A negative-index witness on a subgraph: a tail singularity (never a
/// corner of the full graph) whose index has negative real part.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub subgraph: BTreeSet<String>,
    pub witness: Option<String>,
    pub re_cs: f64,
}

/// Search the given connected invariant subgraph for a tail with
/// `Re cs < 0`. When no witness exists even though the subgraph matrix is
/// negative definite and every residual passes, the decoration contradicts
/// the guaranteed existence of such a point and the search reports it as
/// inconsistent.
pub fn find_negative_index_tail(
    g: &DecoratedGraph,
    subgraph: &BTreeSet<String>,
    tolerance: f64,
) -> Result<WitnessReport, CsError> {
    for id in subgraph {
        let component = g
            .component(id)
            .ok_or_else(|| CsError::UnknownComponent(id.clone()))?;
        if !component.invariant {
            return Err(CsError::DicriticalComponent(id.clone()));
        }
    }
    if !g.subgraph_is_tree(subgraph.iter().map(String::as_str)) {
        return Err(CsError::NotATree);
    }

    let witness = subgraph
        .iter()
        .flat_map(|comp| g.tails_at(comp))
        .filter(|t| t.cs.re < 0.0)
        .min_by(|a, b| a.id.cmp(&b.id));
    if let Some(tail) = witness {
        return Ok(WitnessReport {
            subgraph: subgraph.clone(),
            witness: Some(tail.id.clone()),
            re_cs: tail.cs.re,
        });
    }

    // No witness: decide whether the hypotheses actually held.
    let matrix = g.submatrix(subgraph.iter().map(String::as_str));
    if !is_negative_definite(&matrix) {
        return Err(CsError::NotNegativeDefinite);
    }
    for comp in subgraph {
        let residual = cs_formula_residual(g, comp)?;
        if residual.norm() > tolerance {
            return Err(CsError::InconsistentDecoration(format!(
                "index sum on `{comp}` misses its weight by {:.3e}",
                residual.norm()
            )));
        }
    }
    Err(CsError::InconsistentDecoration(
        "negative-definite tree with passing residuals has no tail of negative real part, \
         which a consistent decoration cannot avoid"
            .to_string(),
    ))
}

/// One row of the h-bound diagnostic: a non-root vertex, the index of its
/// outgoing corner relative to itself, and the h-value bound it must respect
/// when every non-corner index has nonnegative real part.
#[derive(Debug, Clone, Serialize)]
pub struct HBoundEntry {
    pub component: String,
    pub outgoing_corner: String,
    pub re_cs_out: f64,
    pub h_bound: f64,
    /// True when `Re cs_out > h(v)`: negativity must enter at or below this
    /// vertex.
    pub flagged: bool,
}

/// Root-side summary: sum of incoming corner indices against `w - h`.
#[derive(Debug, Clone, Serialize)]
pub struct HBoundRootSummary {
    pub component: String,
    pub incoming_re_sum: f64,
    pub w_minus_h: f64,
    /// True when the incoming sum reaches `w - h`, the bound that forces the
    /// index sum past the weight.
    pub bound_met: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HBoundReport {
    pub entries: Vec<HBoundEntry>,
    pub root: HBoundRootSummary,
}

/// Per-vertex audit of the telescoped index bound `Re cs(v, out) <= h(v)`
/// along a rooted negative-definite tree. Flagged vertices localize where
/// negative tail indices must sit. Corners touching dicritical components
/// carry no indices and are skipped.
pub fn h_bound_diagnostic(
    g: &DecoratedGraph,
    order: &RootedOrder,
    h: &HValues,
    tolerance: f64,
) -> Result<HBoundReport, CsError> {
    if !g.is_tree() {
        return Err(CsError::NotATree);
    }
    let mut entries = Vec::new();
    for component in g.components() {
        let v = component.id.as_str();
        let Some((_succ, corner_id)) = order.successor(v) else {
            continue;
        };
        let corner = g.corner(corner_id).expect("order references real corner");
        if !g.is_singular_corner(corner) || !component.invariant {
            continue;
        }
        let re_cs_out = corner.index_for(v).unwrap().re;
        let h_bound = rational_to_f64(h.get(v).expect("h defined on every vertex"));
        entries.push(HBoundEntry {
            component: v.to_string(),
            outgoing_corner: corner_id.to_string(),
            re_cs_out,
            h_bound,
            flagged: re_cs_out > h_bound + tolerance,
        });
    }
    entries.sort_by(|a, b| a.component.cmp(&b.component));

    let root = order.root().to_string();
    let mut incoming_re_sum = 0.0;
    for (_pred, corner_id) in order.predecessors(&root) {
        let corner = g.corner(corner_id).expect("order references real corner");
        if g.is_singular_corner(corner) {
            incoming_re_sum += corner.index_for(&root).unwrap().re;
        }
    }
    let w = g.component(&root).unwrap().weight as f64;
    let h_root = rational_to_f64(h.get(&root).expect("h defined at root"));
    let w_minus_h = w - h_root;
    Ok(HBoundReport {
        entries,
        root: HBoundRootSummary {
            component: root,
            incoming_re_sum,
            w_minus_h,
            bound_met: incoming_re_sum >= w_minus_h - tolerance,
        },
    })
}

/// A singularity reference for predicates that apply to corners and tails
/// alike.
#[derive(Debug, Clone, Copy)]
pub enum Singularity<'a> {
    Corner(&'a CornerSingularity),
    Tail(&'a TailSingularity),
}

/// A reduced singularity is non-negative when both of its separatrices carry
/// an index of nonnegative real part; for a saddle-node this is decided by
/// the central-manifold index alone (the strong side is exactly 0). A
/// saddle-node tail whose strong manifold lies in the component does not
/// record its central index, so it cannot be certified non-negative and is
/// kept.
pub fn is_non_negative_singularity(s: Singularity<'_>) -> bool {
    match s {
        Singularity::Corner(corner) => {
            if corner.saddle_node {
                corner
                    .central_index()
                    .is_some_and(|central| central.re >= 0.0)
            } else {
                corner.cs_a.re >= 0.0 && corner.cs_b.re >= 0.0
            }
        }
        Singularity::Tail(tail) => {
            if tail.saddle_node {
                tail.strong_is_transverse && tail.cs.re >= 0.0
            } else {
                tail.cs.re >= 0.0
            }
        }
    }
}

/// One connected piece of the deleted divisor `D_*` (dicritical components
/// removed, punctured at non-negative singularities), recorded at graph
/// granularity: puncturing at a corner deletes its edge, puncturing at a
/// tail point never disconnects a component. The closure subgraph of a piece
/// is the induced subgraph on its component set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DStarPiece {
    pub components: BTreeSet<String>,
}

pub fn d_star_components(g: &DecoratedGraph) -> Vec<DStarPiece> {
    let invariant: BTreeSet<&str> = g
        .components()
        .iter()
        .filter(|c| c.invariant)
        .map(|c| c.id.as_str())
        .collect();
    let mut visited: BTreeSet<&str> = BTreeSet::new();
    let mut pieces = Vec::new();
    for &start in &invariant {
        if visited.contains(start) {
            continue;
        }
        let mut piece = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        visited.insert(start);
        while let Some(v) = queue.pop_front() {
            piece.insert(v.to_string());
            for corner in g.corners_at(v) {
                if !g.is_singular_corner(corner)
                    || is_non_negative_singularity(Singularity::Corner(corner))
                {
                    continue;
                }
                let w = corner.other_side(v).unwrap();
                if let Some(&w) = invariant.get(w) {
                    if visited.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        pieces.push(DStarPiece { components: piece });
    }
    pieces
}

/// One separatrix witness per piece of `D_*`, found on the piece's closure
/// subgraph. The witness index has negative real part, which keeps the point
/// off every other component.
pub fn separatrix_witnesses(
    g: &DecoratedGraph,
    tolerance: f64,
) -> Result<Vec<WitnessReport>, CsError> {
    d_star_components(g)
        .into_iter()
        .map(|piece| find_negative_index_tail(g, &piece.components, tolerance))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparatrixStrength {
    Strong,
    Weak,
}

/// A tail separatrix is strong when it is the strong manifold of a
/// saddle-node or passes through a singularity of negative real part;
/// every other tail is weak.
pub fn strong_weak_classify(tail: &TailSingularity) -> SeparatrixStrength {
    let strong = if tail.saddle_node {
        tail.strong_is_transverse
    } else {
        tail.cs.re < 0.0
    };
    if strong {
        SeparatrixStrength::Strong
    } else {
        SeparatrixStrength::Weak
    }
}

/// Counting census for the separatrix inequality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparatrixCensus {
    pub tails: usize,
    pub nodal_corners: usize,
    pub strong: usize,
    pub weak: usize,
    pub dicritical_components: usize,
    /// A dicritical component carries infinitely many separatrices, so the
    /// inequality holds trivially.
    pub dicritical_trivial: bool,
}

/// Census plus the verdict `tails > nodal corners` (trivially true in the
/// dicritical case).
pub fn strong_separatrix_count_check(g: &DecoratedGraph) -> (SeparatrixCensus, bool) {
    let tails = g.tails().len();
    let nodal_corners = g
        .corners()
        .iter()
        .filter(|z| g.is_singular_corner(z) && corner_class(z) == EigenvalueClass::Node)
        .count();
    let (mut strong, mut weak) = (0usize, 0usize);
    for tail in g.tails() {
        match strong_weak_classify(tail) {
            SeparatrixStrength::Strong => strong += 1,
            SeparatrixStrength::Weak => weak += 1,
        }
    }
    let dicritical_components = g.components().iter().filter(|c| c.dicritical).count();
    let dicritical_trivial = dicritical_components > 0;
    let census = SeparatrixCensus {
        tails,
        nodal_corners,
        strong,
        weak,
        dicritical_components,
        dicritical_trivial,
    };
    let verdict = dicritical_trivial || tails > nodal_corners;
    (census, verdict)
}

/// Component set of the whole graph, for full-graph witness searches.
pub fn full_component_set(g: &DecoratedGraph) -> BTreeSet<String> {
    g.components().iter().map(|c| c.id.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Component;
    use crate::numeric::{rational, DEFAULT_TOLERANCE};
    use crate::tree::{compute_h, root_order};

    fn comp(id: &str, weight: i64) -> Component {
        Component {
            id: id.to_string(),
            weight,
            invariant: true,
            dicritical: false,
        }
    }

    fn dicritical(id: &str, weight: i64) -> Component {
        Component {
            id: id.to_string(),
            weight,
            invariant: false,
            dicritical: true,
        }
    }

    fn corner(id: &str, a: &str, b: &str, cs_a: Complex64, cs_b: Complex64) -> CornerSingularity {
        CornerSingularity {
            id: id.to_string(),
            a: a.to_string(),
            b: b.to_string(),
            cs_a,
            cs_b,
            saddle_node: false,
            strong_side: None,
        }
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn tail(id: &str, comp: &str, cs: Complex64) -> TailSingularity {
        TailSingularity {
            id: id.to_string(),
            comp: comp.to_string(),
            cs,
            saddle_node: false,
            strong_is_transverse: false,
        }
    }

    fn graph(
        components: Vec<Component>,
        corners: Vec<CornerSingularity>,
        tails: Vec<TailSingularity>,
    ) -> DecoratedGraph {
        DecoratedGraph::new(components, corners, tails, DEFAULT_TOLERANCE).unwrap()
    }

    #[test]
    fn classify_examples() {
        use EigenvalueClass::*;
        let c = |z: Complex64| classify_eigenvalue(&Eigenvalue::Complex(z));
        assert_eq!(c(Complex64::new(1.0, 1.0)), Hyperbolic);
        assert_eq!(c(re(-3.0)), Saddle);
        assert_eq!(c(re(0.0)), SaddleNode);
        assert_eq!(c(re(2.0_f64.sqrt())), Node);
        // Floats are never declared rational, even when they look like it.
        assert_eq!(c(re(1.5)), Node);
        assert_eq!(
            classify_eigenvalue(&Eigenvalue::Rational(rational(3, 2))),
            NonReduced
        );
        assert_eq!(
            classify_eigenvalue(&Eigenvalue::Rational(rational(-2, 1))),
            Saddle
        );
        assert_eq!(
            classify_eigenvalue(&Eigenvalue::Rational(rational(0, 1))),
            SaddleNode
        );
    }

    #[test]
    fn residual_examples() {
        let g = graph(vec![comp("P", -1)], vec![], vec![tail("q", "P", re(-1.0))]);
        assert_eq!(cs_formula_residual(&g, "P").unwrap(), re(0.0));

        let g = graph(
            vec![comp("P1", -2), comp("P2", -2)],
            vec![corner("z", "P1", "P2", re(-1.0), re(-1.0))],
            vec![tail("q1", "P1", re(-1.0)), tail("q2", "P2", re(-1.0))],
        );
        assert_eq!(cs_formula_residual(&g, "P1").unwrap(), re(0.0));
        assert_eq!(cs_formula_residual(&g, "P2").unwrap(), re(0.0));

        let g = graph(
            vec![comp("P", -2), comp("Q", -2)],
            vec![corner("z", "P", "Q", re(-1.0), re(-1.0))],
            vec![tail("q", "P", re(-0.5))],
        );
        let r = cs_formula_residual(&g, "P").unwrap();
        assert!((r - re(0.5)).norm() < 1e-12);

        let g = graph(
            vec![comp("P", -1), dicritical("D", -1)],
            vec![corner("z", "P", "D", re(0.0), re(0.0))],
            vec![tail("q", "P", re(-1.0))],
        );
        // Dicritical crossing contributes nothing.
        assert_eq!(cs_formula_residual(&g, "P").unwrap(), re(0.0));
        assert_eq!(
            cs_formula_residual(&g, "D").unwrap_err(),
            CsError::DicriticalComponent("D".into())
        );
    }

    #[test]
    fn witness_examples() {
        let g = graph(vec![comp("P", -1)], vec![], vec![tail("q", "P", re(-1.0))]);
        let w = find_negative_index_tail(&g, &full_component_set(&g), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(w.witness.as_deref(), Some("q"));
        assert_eq!(w.re_cs, -1.0);

        let g = graph(
            vec![comp("P1", -2), comp("P2", -2)],
            vec![corner("z", "P1", "P2", re(-1.0), re(-1.0))],
            vec![tail("q1", "P1", re(-1.0)), tail("q2", "P2", re(-1.0))],
        );
        let w = find_negative_index_tail(&g, &full_component_set(&g), DEFAULT_TOLERANCE).unwrap();
        assert_eq!(w.witness.as_deref(), Some("q1")); // deterministic pick

        let g = graph(vec![comp("P", -1)], vec![], vec![tail("q", "P", re(1.0))]);
        let err =
            find_negative_index_tail(&g, &full_component_set(&g), DEFAULT_TOLERANCE).unwrap_err();
        // Residual 1 - (-1) = 2 fails before the existence contradiction.
        assert!(matches!(err, CsError::InconsistentDecoration(_)));
    }

    #[test]
    fn witness_rejects_non_tree() {
        let g = graph(
            vec![comp("P1", -3), comp("P2", -3)],
            vec![
                corner("z1", "P1", "P2", re(-1.0), re(-1.0)),
                corner("z2", "P1", "P2", re(-2.0), re(-0.5)),
            ],
            vec![],
        );
        assert_eq!(
            find_negative_index_tail(&g, &full_component_set(&g), DEFAULT_TOLERANCE).unwrap_err(),
            CsError::NotATree
        );
    }

    #[test]
    fn h_bound_chain_flags_negativity_source() {
        let g = graph(
            vec![comp("v1", -2), comp("v2", -2)],
            vec![corner("z", "v1", "v2", re(-1.0), re(-1.0))],
            vec![tail("q1", "v1", re(-1.0)), tail("q2", "v2", re(-1.0))],
        );
        let order = root_order(&g, "v2").unwrap();
        let h = compute_h(&g, &order).unwrap();
        let report = h_bound_diagnostic(&g, &order, &h, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(report.entries.len(), 1);
        let entry = &report.entries[0];
        assert_eq!(entry.component, "v1");
        assert_eq!(entry.re_cs_out, -1.0);
        assert_eq!(entry.h_bound, -2.0);
        assert!(entry.flagged); // -1 > -2: the tail on v1 carries the negativity
    }

    #[test]
    fn h_bound_single_vertex_empty() {
        let g = graph(vec![comp("P", -1)], vec![], vec![tail("q", "P", re(-1.0))]);
        let order = root_order(&g, "P").unwrap();
        let h = compute_h(&g, &order).unwrap();
        let report = h_bound_diagnostic(&g, &order, &h, DEFAULT_TOLERANCE).unwrap();
        assert!(report.entries.is_empty());
        assert_eq!(report.root.component, "P");
    }

    #[test]
    fn h_bound_saddle_node_strong_toward_root() {
        // Corner is a saddle-node with strong side at the root: the
        // predecessor's outgoing index is the central index.
        let mut z = corner("z", "v1", "v2", re(-2.0), re(0.0));
        z.saddle_node = true;
        z.strong_side = Some("v2".into());
        let g = graph(
            vec![comp("v1", -1), comp("v2", -2)],
            vec![z],
            vec![tail("q1", "v1", re(1.0)), tail("q2", "v2", re(-2.0))],
        );
        let order = root_order(&g, "v2").unwrap();
        let h = compute_h(&g, &order).unwrap();
        let report = h_bound_diagnostic(&g, &order, &h, DEFAULT_TOLERANCE).unwrap();
        let entry = &report.entries[0];
        assert_eq!(entry.component, "v1");
        assert_eq!(entry.re_cs_out, -2.0);
        assert_eq!(entry.h_bound, -1.0);
        assert!(!entry.flagged); // -2 <= -1 holds
    }

    #[test]
    fn non_negative_examples() {
        let z = corner(
            "z",
            "P1",
            "P2",
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        );
        assert!(is_non_negative_singularity(Singularity::Corner(&z)));

        let t = tail("q", "P", re(-1.0));
        assert!(!is_non_negative_singularity(Singularity::Tail(&t)));

        let mut sn = corner("z", "P1", "P2", re(0.0), Complex64::new(0.5, 2.0));
        sn.saddle_node = true;
        sn.strong_side = Some("P1".into());
        assert!(is_non_negative_singularity(Singularity::Corner(&sn)));

        // Strong manifold inside the component: central index unrecorded,
        // cannot be certified non-negative.
        let mut st = tail("q", "P", re(0.0));
        st.saddle_node = true;
        st.strong_is_transverse = false;
        assert!(!is_non_negative_singularity(Singularity::Tail(&st)));
    }

    #[test]
    fn d_star_examples() {
        // All singularities negative: one piece.
        let g = graph(
            vec![comp("P1", -2), comp("P2", -2)],
            vec![corner("z", "P1", "P2", re(-1.0), re(-1.0))],
            vec![tail("q1", "P1", re(-1.0)), tail("q2", "P2", re(-1.0))],
        );
        let pieces = d_star_components(&g);
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].components.len(), 2);

        // Non-negative corner disconnects.
        let g = graph(
            vec![comp("P1", -2), comp("P2", -2)],
            vec![corner("z", "P1", "P2", re(1.0), re(1.0))],
            vec![tail("q1", "P1", re(-3.0)), tail("q2", "P2", re(-3.0))],
        );
        let pieces = d_star_components(&g);
        assert_eq!(pieces.len(), 2);

        // Dicritical component excluded entirely.
        let g = graph(
            vec![comp("P1", -2), dicritical("D", -1), comp("P3", -2)],
            vec![
                corner("z1", "P1", "D", re(0.0), re(0.0)),
                corner("z2", "D", "P3", re(0.0), re(0.0)),
            ],
            vec![tail("q1", "P1", re(-2.0)), tail("q3", "P3", re(-2.0))],
        );
        let pieces = d_star_components(&g);
        assert_eq!(pieces.len(), 2);
        assert!(pieces.iter().all(|p| !p.components.contains("D")));
    }

    #[test]
    fn witnesses_per_piece() {
        // Two pieces split by a non-negative corner, each with its own tail.
        let g = graph(
            vec![comp("P1", -2), comp("P2", -2)],
            vec![corner("z", "P1", "P2", re(1.0), re(1.0))],
            vec![tail("q1", "P1", re(-3.0)), tail("q2", "P2", re(-3.0))],
        );
        let ws = separatrix_witnesses(&g, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(ws.len(), 2);
        assert!(ws.iter().all(|w| w.re_cs < 0.0));

        // Dicritical component separating two invariant pieces.
        let g = graph(
            vec![comp("P1", -2), dicritical("D", -1), comp("P3", -2)],
            vec![
                corner("z1", "P1", "D", re(0.0), re(0.0)),
                corner("z2", "D", "P3", re(0.0), re(0.0)),
            ],
            vec![tail("q1", "P1", re(-2.0)), tail("q3", "P3", re(-2.0))],
        );
        let ws = separatrix_witnesses(&g, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(ws.len(), 2);
    }

    #[test]
    fn strong_weak_examples() {
        let mut sn = tail("q", "P", re(-0.5));
        sn.saddle_node = true;
        sn.strong_is_transverse = true;
        assert_eq!(strong_weak_classify(&sn), SeparatrixStrength::Strong);

        assert_eq!(
            strong_weak_classify(&tail("q", "P", re(-1.0))),
            SeparatrixStrength::Strong
        );
        assert_eq!(
            strong_weak_classify(&tail("q", "P", Complex64::new(0.0, 1.0))),
            SeparatrixStrength::Weak
        );
    }

    #[test]
    fn census_examples() {
        let g = graph(vec![comp("P", -1)], vec![], vec![tail("q", "P", re(-1.0))]);
        let (census, ok) = strong_separatrix_count_check(&g);
        assert!(ok);
        assert_eq!(census.tails, 1);
        assert_eq!(census.nodal_corners, 0);
        assert_eq!(census.strong + census.weak, census.tails);

        // One node corner, two tails of negative real part.
        let s2 = 2.0_f64.sqrt();
        let g = graph(
            vec![comp("P1", -2), comp("P2", -2)],
            vec![corner("z", "P1", "P2", re(s2), re(1.0 / s2))],
            vec![
                tail("q1", "P1", re(-2.0 - s2)),
                tail("q2", "P2", re(-2.0 - 1.0 / s2)),
            ],
        );
        let (census, ok) = strong_separatrix_count_check(&g);
        assert!(ok);
        assert_eq!(census.tails, 2);
        assert_eq!(census.nodal_corners, 1);

        // Any dicritical component: trivially satisfied.
        let g = graph(
            vec![comp("P1", -2), dicritical("D", -1)],
            vec![corner("z", "P1", "D", re(0.0), re(0.0))],
            vec![],
        );
        let (census, ok) = strong_separatrix_count_check(&g);
        assert!(ok);
        assert!(census.dicritical_trivial);
        assert_eq!(census.tails, 0);
    }

    #[test]
    fn residual_report_partial_mode() {
        // Decoration listing only the corner on P1, whose tail is omitted:
        // equality fails, the one-sided check passes when the omitted index
        // has nonnegative real part.
        let g = graph(
            vec![comp("P1", -2), comp("P2", -2)],
            vec![corner("z", "P1", "P2", re(-3.0), re(-1.0 / 3.0))],
            vec![tail("q2", "P2", re(-2.0 + 1.0 / 3.0))],
        );
        let strict = residual_report(&g, DEFAULT_TOLERANCE, false);
        let p1 = strict.iter().find(|r| r.component == "P1").unwrap();
        assert!(!p1.pass); // -3 != -2
        let partial = residual_report(&g, DEFAULT_TOLERANCE, true);
        let p1 = partial.iter().find(|r| r.component == "P1").unwrap();
        assert!(p1.pass); // -3 <= -2
    }
}
