//! The order relation on invariant components and approximation chains.
//!
//! Components joined by a corner of eigenvalue outside `[0, +inf)` fall in
//! the same class; a saddle-node corner orders its central-side class below
//! its strong-side class; node corners relate nothing. A chain walks
//! invariant components through allowed corners (never a node, saddle-nodes
//! only central to strong) and ends on a component carrying a non-corner
//! singularity of negative real part.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::cs::{corner_class, EigenvalueClass};
use crate::graph::{CornerSingularity, DecoratedGraph};

#[derive(Debug, Error, PartialEq)]
pub enum ChainError {
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("chain has no components")]
    EmptyChain,
    #[error("start component `{0}` is dicritical")]
    DicriticalStart(String),
    #[error("saddle-node orientations form a cycle through class of `{0}`")]
    CycleDetected(String),
    #[error("no chain from `{start}`: {reason}")]
    NoChainFound { start: String, reason: String },
}

/// Equivalence classes of invariant components with the directed saddle-node
/// relation between them.
#[derive(Debug, Clone)]
pub struct ChainOrder {
    /// Each class is a sorted set of component ids; classes are sorted by
    /// their smallest member.
    classes: Vec<BTreeSet<String>>,
    class_of: HashMap<String, usize>,
    /// Directed edges central-class -> strong-class.
    edges: BTreeSet<(usize, usize)>,
}

impl ChainOrder {
    pub fn classes(&self) -> &[BTreeSet<String>] {
        &self.classes
    }

    pub fn class_of(&self, comp: &str) -> Option<usize> {
        self.class_of.get(comp).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }
}

/// Whether a chain may cross this corner from `from` to the other side:
/// both sides invariant, the corner is not a node, and a saddle-node is
/// crossed only out of its central side into its strong side.
pub fn transition_allowed(g: &DecoratedGraph, corner: &CornerSingularity, from: &str) -> bool {
    if !g.is_singular_corner(corner) || !corner.touches(from) {
        return false;
    }
    match corner_class(corner) {
        EigenvalueClass::Node => false,
        EigenvalueClass::SaddleNode => corner
            .strong_side
            .as_deref()
            .is_some_and(|strong| strong != from),
        _ => true,
    }
}

/// Build the class order of the graph.
pub fn chain_order(g: &DecoratedGraph) -> ChainOrder {
    let invariant: Vec<&str> = g
        .components()
        .iter()
        .filter(|c| c.invariant)
        .map(|c| c.id.as_str())
        .collect();

    // Union by repeated relabeling; graphs are desk scale.
    let mut label: BTreeMap<&str, usize> =
        invariant.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    for corner in g.corners() {
        if !g.is_singular_corner(corner) {
            continue;
        }
        let merges = matches!(
            corner_class(corner),
            EigenvalueClass::Saddle | EigenvalueClass::Hyperbolic
        );
        if merges {
            let (la, lb) = (label[corner.a.as_str()], label[corner.b.as_str()]);
            if la != lb {
                let (keep, drop) = (la.min(lb), la.max(lb));
                for l in label.values_mut() {
                    if *l == drop {
                        *l = keep;
                    }
                }
            }
        }
    }

    let mut grouped: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (&v, &l) in &label {
        grouped.entry(l).or_default().insert(v.to_string());
    }
    let classes: Vec<BTreeSet<String>> = grouped.into_values().collect();
    let mut class_of = HashMap::new();
    for (i, class) in classes.iter().enumerate() {
        for v in class {
            class_of.insert(v.clone(), i);
        }
    }

    let mut edges = BTreeSet::new();
    for corner in g.corners() {
        if !g.is_singular_corner(corner) || corner_class(corner) != EigenvalueClass::SaddleNode {
            continue;
        }
        let strong = corner
            .strong_side
            .as_deref()
            .expect("validated saddle-node");
        let central = corner.other_side(strong).expect("strong side on corner");
        edges.insert((class_of[central], class_of[strong]));
    }

    ChainOrder {
        classes,
        class_of,
        edges,
    }
}

/// Classes with no outgoing saddle-node edge. Errors if the directed class
/// relation contains a cycle, which no consistent decoration produces.
pub fn maximal_classes(order: &ChainOrder) -> Result<Vec<&BTreeSet<String>>, ChainError> {
    let n = order.classes.len();
    // Kahn's algorithm on the class digraph detects cycles.
    let mut out_degree = vec![0usize; n];
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (from, to) in order.edges() {
        if from == to {
            let rep = order.classes[from].iter().next().unwrap();
            return Err(ChainError::CycleDetected(rep.clone()));
        }
        out_degree[from] += 1;
        incoming[to].push(from);
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| out_degree[i] == 0).collect();
    let mut seen = 0usize;
    while let Some(c) = queue.pop_front() {
        seen += 1;
        for &p in &incoming[c] {
            out_degree[p] -= 1;
            if out_degree[p] == 0 {
                queue.push_back(p);
            }
        }
    }
    if seen != n {
        let stuck = (0..n).find(|&i| out_degree[i] > 0).unwrap();
        let rep = order.classes[stuck].iter().next().unwrap();
        return Err(ChainError::CycleDetected(rep.clone()));
    }
    Ok(order
        .classes
        .iter()
        .enumerate()
        .filter(|(i, _)| !order.edges.iter().any(|&(from, _)| from == *i))
        .map(|(_, class)| class)
        .collect())
}

/// An approximation chain: consecutive components share the named corners
/// and the terminal component carries the witness tail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Chain {
    pub components: Vec<String>,
    pub corners: Vec<String>,
    pub terminal: String,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Shortest chain from `start` by breadth-first search over allowed
/// transitions, ties broken lexicographically by component id. A component
/// qualifies as terminal when it carries a tail with `Re cs < 0`.
pub fn find_approximation_chain(g: &DecoratedGraph, start: &str) -> Result<Chain, ChainError> {
    let start_comp = g
        .component(start)
        .ok_or_else(|| ChainError::UnknownId(start.to_string()))?;
    if start_comp.dicritical {
        return Err(ChainError::DicriticalStart(start.to_string()));
    }

    let terminal_tail = |comp: &str| -> Option<String> {
        g.tails_at(comp)
            .filter(|t| t.cs.re < 0.0)
            .map(|t| t.id.clone())
            .min()
    };

    // parent[v] = (previous component, corner crossed into v)
    let mut parent: HashMap<String, (String, String)> = HashMap::new();
    let mut visited: BTreeSet<String> = BTreeSet::from([start.to_string()]);
    let mut queue: VecDeque<String> = VecDeque::from([start.to_string()]);
    while let Some(v) = queue.pop_front() {
        if let Some(tail_id) = terminal_tail(&v) {
            let mut components = vec![v.clone()];
            let mut corners = Vec::new();
            let mut cur = v;
            while let Some((prev, corner)) = parent.get(&cur) {
                corners.push(corner.clone());
                components.push(prev.clone());
                cur = prev.clone();
            }
            components.reverse();
            corners.reverse();
            return Ok(Chain {
                components,
                corners,
                terminal: tail_id,
            });
        }
        let mut moves: Vec<(String, String)> = g
            .corners_at(&v)
            .filter(|corner| transition_allowed(g, corner, &v))
            .map(|corner| {
                (
                    corner.other_side(&v).unwrap().to_string(),
                    corner.id.clone(),
                )
            })
            .collect();
        moves.sort();
        for (w, corner) in moves {
            if visited.insert(w.clone()) {
                parent.insert(w.clone(), (v.clone(), corner));
                queue.push_back(w);
            }
        }
    }
    Err(ChainError::NoChainFound {
        start: start.to_string(),
        reason: format!(
            "no component reachable through allowed corners carries a tail of negative real \
             part ({} components searched); the decoration cannot be consistent",
            visited.len()
        ),
    })
}

/// The chain conditions, numbered: (1) consecutive components share the
/// named corner, (2) no corner is a node, (3) saddle-node corners are
/// crossed central to strong, (4) the terminal tail sits on the last
/// component with negative real part. Invariance of every listed component
/// is a precondition of all four.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainViolation {
    NotInvariant { component: String },
    Adjacency { position: usize, corner: String },
    NodeCorner { position: usize, corner: String },
    SaddleNodeOrientation { position: usize, corner: String },
    Terminal { reason: String },
}

impl ChainViolation {
    /// Human label used in reports, e.g. "clause (3)".
    pub fn label(&self) -> String {
        match self {
            ChainViolation::NotInvariant { .. } => "invariance".to_string(),
            ChainViolation::Adjacency { .. } => "clause (1)".to_string(),
            ChainViolation::NodeCorner { .. } => "clause (2)".to_string(),
            ChainViolation::SaddleNodeOrientation { .. } => "clause (3)".to_string(),
            ChainViolation::Terminal { .. } => "clause (4)".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainCheck {
    pub ok: bool,
    pub violation: Option<ChainViolation>,
}

/// Check a chain against the four conditions and report the first failure.
pub fn verify_chain(g: &DecoratedGraph, chain: &Chain) -> Result<ChainCheck, ChainError> {
    if chain.components.is_empty() {
        return Err(ChainError::EmptyChain);
    }
    for comp in &chain.components {
        if g.component(comp).is_none() {
            return Err(ChainError::UnknownId(comp.clone()));
        }
    }
    for corner in &chain.corners {
        if g.corner(corner).is_none() {
            return Err(ChainError::UnknownId(corner.clone()));
        }
    }
    let tail = g
        .tail(&chain.terminal)
        .ok_or_else(|| ChainError::UnknownId(chain.terminal.clone()))?;

    let fail = |violation: ChainViolation| {
        Ok(ChainCheck {
            ok: false,
            violation: Some(violation),
        })
    };

    for comp in &chain.components {
        if !g.component(comp).unwrap().invariant {
            return fail(ChainViolation::NotInvariant {
                component: comp.clone(),
            });
        }
    }
    if chain.corners.len() + 1 != chain.components.len() {
        return fail(ChainViolation::Adjacency {
            position: chain.corners.len().min(chain.components.len()),
            corner: chain.corners.last().cloned().unwrap_or_default(),
        });
    }
    for (k, corner_id) in chain.corners.iter().enumerate() {
        let corner = g.corner(corner_id).unwrap();
        let (cur, nxt) = (&chain.components[k], &chain.components[k + 1]);
        let joins =
            (corner.a == *cur && corner.b == *nxt) || (corner.a == *nxt && corner.b == *cur);
        if !joins || !g.is_singular_corner(corner) {
            return fail(ChainViolation::Adjacency {
                position: k + 1,
                corner: corner_id.clone(),
            });
        }
        match corner_class(corner) {
            EigenvalueClass::Node => {
                return fail(ChainViolation::NodeCorner {
                    position: k + 1,
                    corner: corner_id.clone(),
                });
            }
            EigenvalueClass::SaddleNode => {
                let strong = corner
                    .strong_side
                    .as_deref()
                    .expect("validated saddle-node");
                if strong != nxt {
                    return fail(ChainViolation::SaddleNodeOrientation {
                        position: k + 1,
                        corner: corner_id.clone(),
                    });
                }
            }
            _ => {}
        }
    }
    let last = chain.components.last().unwrap();
    if tail.comp != *last {
        return fail(ChainViolation::Terminal {
            reason: format!("tail `{}` is not on terminal component `{last}`", tail.id),
        });
    }
    if tail.cs.re >= 0.0 {
        return fail(ChainViolation::Terminal {
            reason: format!("tail `{}` has Re cs = {} >= 0", tail.id, tail.cs.re),
        });
    }
    Ok(ChainCheck {
        ok: true,
        violation: None,
    })
}
