//! Decorated resolution graphs: divisor components, corner and tail
//! singularities, and the integer intersection matrix.
//!
//! A graph is ingested from JSON and fully validated on construction; every
//! operation downstream assumes the invariants enforced here (connectivity,
//! reciprocity of corner indices, saddle-node strong sides, dicritical
//! crossings carrying no singular decoration).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{complex_is_finite, complex_pair, Complex64, DEFAULT_TOLERANCE};

/// A compact divisor component (vertex of the dual graph).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub id: String,
    /// Self-intersection number. Nonzero.
    pub weight: i64,
    pub invariant: bool,
    #[serde(default)]
    pub dicritical: bool,
}

/// A crossing point of two components. When both sides are invariant the
/// crossing is a singularity of the foliation and carries one index per side;
/// a crossing with a dicritical side is a regular point and its indices are
/// ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerSingularity {
    pub id: String,
    pub a: String,
    pub b: String,
    #[serde(with = "complex_pair")]
    pub cs_a: Complex64,
    #[serde(with = "complex_pair")]
    pub cs_b: Complex64,
    #[serde(default)]
    pub saddle_node: bool,
    #[serde(default)]
    pub strong_side: Option<String>,
}

impl CornerSingularity {
    /// The index relative to the given side, if that id is one of the two.
    pub fn index_for(&self, comp: &str) -> Option<Complex64> {
        if comp == self.a {
            Some(self.cs_a)
        } else if comp == self.b {
            Some(self.cs_b)
        } else {
            None
        }
    }

    /// The opposite endpoint, if the id is one of the two.
    pub fn other_side(&self, comp: &str) -> Option<&str> {
        if comp == self.a {
            Some(&self.b)
        } else if comp == self.b {
            Some(&self.a)
        } else {
            None
        }
    }

    pub fn touches(&self, comp: &str) -> bool {
        comp == self.a || comp == self.b
    }

    /// For a saddle-node corner, the index relative to the non-strong
    /// (central) side.
    pub fn central_index(&self) -> Option<Complex64> {
        let strong = self.strong_side.as_deref()?;
        if strong == self.a {
            Some(self.cs_b)
        } else {
            Some(self.cs_a)
        }
    }
}

/// A singularity on a single component, away from every corner. Each tail is
/// the trace of one separatrix transverse to the divisor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSingularity {
    pub id: String,
    pub comp: String,
    #[serde(with = "complex_pair")]
    pub cs: Complex64,
    #[serde(default)]
    pub saddle_node: bool,
    /// Saddle-node only: true when the strong manifold is the transverse
    /// separatrix (so `cs` is the central-manifold index); false when the
    /// strong manifold lies in `comp` (so `cs` is exactly 0).
    #[serde(default)]
    pub strong_is_transverse: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("invalid JSON: {0}")]
    InvalidJson(String),
    #[error("graph has no components")]
    EmptyGraph,
    #[error("empty id in `{context}`")]
    EmptyId { context: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("`{referrer}` references unknown component `{target}`")]
    DanglingReference { referrer: String, target: String },
    #[error("corner `{0}` joins a component to itself")]
    SelfLoopCorner(String),
    #[error("component `{0}` has zero weight")]
    ZeroWeight(String),
    #[error("corner `{corner}`: |cs_a*cs_b - 1| = {deviation:e} exceeds tolerance {tolerance:e}")]
    ReciprocityViolation {
        corner: String,
        deviation: f64,
        tolerance: f64,
    },
    #[error("saddle-node corner `{0}` has no strong_side among its two components")]
    SaddleNodeMissingStrongSide(String),
    #[error("`{id}`: strong-side decoration is only valid on a saddle-node")]
    InvalidStrongSide { id: String },
    #[error("saddle-node `{id}`: the index on the strong side must be exactly 0")]
    NonzeroStrongIndex { id: String },
    #[error("underlying graph is disconnected")]
    DisconnectedGraph,
    #[error("component `{0}` is marked both dicritical and invariant")]
    DicriticalMarkedInvariant(String),
    #[error("component `{0}` is neither invariant nor dicritical")]
    NeitherInvariantNorDicritical(String),
    #[error("`{id}`: singular decoration on dicritical component `{component}`")]
    DicriticalSingularDecoration { id: String, component: String },
    #[error("`{id}`: index is not finite")]
    NonFiniteIndex { id: String },
    #[error("tail `{0}` has index 0 but is not marked saddle-node")]
    ZeroIndexNotSaddleNode(String),
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    #[serde(default)]
    components: Vec<Component>,
    #[serde(default)]
    corners: Vec<CornerSingularity>,
    #[serde(default)]
    tails: Vec<TailSingularity>,
}

/// A validated decorated resolution graph. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoratedGraph {
    components: Vec<Component>,
    corners: Vec<CornerSingularity>,
    tails: Vec<TailSingularity>,
    comp_index: HashMap<String, usize>,
    tolerance: f64,
}

impl DecoratedGraph {
    /// Validate and assemble a graph from its parts. Collections are sorted
    /// by id, so equality is representation-independent.
    pub fn new(
        components: Vec<Component>,
        corners: Vec<CornerSingularity>,
        tails: Vec<TailSingularity>,
        tolerance: f64,
    ) -> Result<Self, GraphError> {
        let mut components = components;
        let mut corners = corners;
        let mut tails = tails;
        components.sort_by(|x, y| x.id.cmp(&y.id));
        corners.sort_by(|x, y| x.id.cmp(&y.id));
        tails.sort_by(|x, y| x.id.cmp(&y.id));

        if components.is_empty() {
            return Err(GraphError::EmptyGraph);
        }

        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for (id, context) in components
            .iter()
            .map(|c| (&c.id, "components"))
            .chain(corners.iter().map(|c| (&c.id, "corners")))
            .chain(tails.iter().map(|t| (&t.id, "tails")))
        {
            if id.is_empty() {
                return Err(GraphError::EmptyId {
                    context: context.to_string(),
                });
            }
            if !seen.insert(id) {
                return Err(GraphError::DuplicateId(id.clone()));
            }
        }

        let comp_index: HashMap<String, usize> = components
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.clone(), i))
            .collect();

        let graph = DecoratedGraph {
            components,
            corners,
            tails,
            comp_index,
            tolerance,
        };
        graph.validate()?;
        Ok(graph)
    }

    fn validate(&self) -> Result<(), GraphError> {
        for c in &self.components {
            if c.weight == 0 {
                return Err(GraphError::ZeroWeight(c.id.clone()));
            }
            if c.dicritical && c.invariant {
                return Err(GraphError::DicriticalMarkedInvariant(c.id.clone()));
            }
            if !c.dicritical && !c.invariant {
                return Err(GraphError::NeitherInvariantNorDicritical(c.id.clone()));
            }
        }

        for corner in &self.corners {
            for target in [&corner.a, &corner.b] {
                if !self.comp_index.contains_key(target) {
                    return Err(GraphError::DanglingReference {
                        referrer: corner.id.clone(),
                        target: target.clone(),
                    });
                }
            }
            if corner.a == corner.b {
                return Err(GraphError::SelfLoopCorner(corner.id.clone()));
            }
            if !complex_is_finite(corner.cs_a) || !complex_is_finite(corner.cs_b) {
                return Err(GraphError::NonFiniteIndex {
                    id: corner.id.clone(),
                });
            }
            let dicritical_crossing = self.component(&corner.a).unwrap().dicritical
                || self.component(&corner.b).unwrap().dicritical;
            if dicritical_crossing {
                // Regular point of the foliation: no singular decoration.
                if corner.saddle_node {
                    return Err(GraphError::DicriticalSingularDecoration {
                        id: corner.id.clone(),
                        component: if self.component(&corner.a).unwrap().dicritical {
                            corner.a.clone()
                        } else {
                            corner.b.clone()
                        },
                    });
                }
                continue;
            }
            if corner.saddle_node {
                let strong = corner
                    .strong_side
                    .as_deref()
                    .ok_or_else(|| GraphError::SaddleNodeMissingStrongSide(corner.id.clone()))?;
                if strong != corner.a && strong != corner.b {
                    if !self.comp_index.contains_key(strong) {
                        return Err(GraphError::DanglingReference {
                            referrer: corner.id.clone(),
                            target: strong.to_string(),
                        });
                    }
                    return Err(GraphError::SaddleNodeMissingStrongSide(corner.id.clone()));
                }
                let strong_index = corner.index_for(strong).unwrap();
                if strong_index != Complex64::new(0.0, 0.0) {
                    return Err(GraphError::NonzeroStrongIndex {
                        id: corner.id.clone(),
                    });
                }
            } else {
                if corner.strong_side.is_some() {
                    return Err(GraphError::InvalidStrongSide {
                        id: corner.id.clone(),
                    });
                }
                let deviation = (corner.cs_a * corner.cs_b - Complex64::new(1.0, 0.0)).norm();
                if deviation > self.tolerance {
                    return Err(GraphError::ReciprocityViolation {
                        corner: corner.id.clone(),
                        deviation,
                        tolerance: self.tolerance,
                    });
                }
            }
        }

        for tail in &self.tails {
            let comp = self
                .component(&tail.comp)
                .ok_or_else(|| GraphError::DanglingReference {
                    referrer: tail.id.clone(),
                    target: tail.comp.clone(),
                })?;
            if comp.dicritical {
                return Err(GraphError::DicriticalSingularDecoration {
                    id: tail.id.clone(),
                    component: comp.id.clone(),
                });
            }
            if !complex_is_finite(tail.cs) {
                return Err(GraphError::NonFiniteIndex {
                    id: tail.id.clone(),
                });
            }
            if tail.saddle_node {
                if !tail.strong_is_transverse && tail.cs != Complex64::new(0.0, 0.0) {
                    return Err(GraphError::NonzeroStrongIndex {
                        id: tail.id.clone(),
                    });
                }
            } else {
                if tail.strong_is_transverse {
                    return Err(GraphError::InvalidStrongSide {
                        id: tail.id.clone(),
                    });
                }
                if tail.cs == Complex64::new(0.0, 0.0) {
                    return Err(GraphError::ZeroIndexNotSaddleNode(tail.id.clone()));
                }
            }
        }

        if !self.is_connected(self.components.iter().map(|c| c.id.as_str())) {
            return Err(GraphError::DisconnectedGraph);
        }
        Ok(())
    }

    /// Parse and validate the JSON graph format.
    pub fn from_json(raw: &str, tolerance: f64) -> Result<Self, GraphError> {
        let parsed: RawGraph =
            serde_json::from_str(raw).map_err(|e| GraphError::InvalidJson(e.to_string()))?;
        Self::new(parsed.components, parsed.corners, parsed.tails, tolerance)
    }

    /// Parse with the default index tolerance.
    pub fn from_json_default(raw: &str) -> Result<Self, GraphError> {
        Self::from_json(raw, DEFAULT_TOLERANCE)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RawGraph {
            components: self.components.clone(),
            corners: self.corners.clone(),
            tails: self.tails.clone(),
        })
        .expect("graph serialization cannot fail")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&RawGraph {
            components: self.components.clone(),
            corners: self.corners.clone(),
            tails: self.tails.clone(),
        })
        .expect("graph serialization cannot fail")
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn corners(&self) -> &[CornerSingularity] {
        &self.corners
    }

    pub fn tails(&self) -> &[TailSingularity] {
        &self.tails
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.comp_index.get(id).map(|&i| &self.components[i])
    }

    pub fn corner(&self, id: &str) -> Option<&CornerSingularity> {
        self.corners.iter().find(|c| c.id == id)
    }

    pub fn tail(&self, id: &str) -> Option<&TailSingularity> {
        self.tails.iter().find(|t| t.id == id)
    }

    pub fn corners_at<'a>(&'a self, comp: &'a str) -> impl Iterator<Item = &'a CornerSingularity> {
        self.corners.iter().filter(move |c| c.touches(comp))
    }

    pub fn tails_at<'a>(&'a self, comp: &'a str) -> impl Iterator<Item = &'a TailSingularity> {
        self.tails.iter().filter(move |t| t.comp == comp)
    }

    /// A corner is a singular crossing only when both sides are invariant.
    pub fn is_singular_corner(&self, corner: &CornerSingularity) -> bool {
        self.component(&corner.a).is_some_and(|c| c.invariant)
            && self.component(&corner.b).is_some_and(|c| c.invariant)
    }

    fn is_connected<'a>(&self, members: impl Iterator<Item = &'a str>) -> bool {
        let set: BTreeSet<&str> = members.collect();
        if set.is_empty() {
            return true;
        }
        let start = *set.iter().next().unwrap();
        let mut visited: BTreeSet<&str> = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        visited.insert(start);
        while let Some(v) = queue.pop_front() {
            for corner in self.corners_at(v) {
                let w = corner.other_side(v).unwrap();
                if let Some(w) = set.get(w) {
                    if visited.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        visited.len() == set.len()
    }

    /// True iff the whole graph is a simple tree: connected with exactly
    /// `n - 1` corners and no pair of components joined twice.
    pub fn is_tree(&self) -> bool {
        self.subgraph_is_tree(self.components.iter().map(|c| c.id.as_str()))
    }

    /// Tree test for the induced subgraph on the given components.
    pub fn subgraph_is_tree<'a>(&self, members: impl Iterator<Item = &'a str>) -> bool {
        let set: BTreeSet<&str> = members.collect();
        if set.is_empty() {
            return false;
        }
        let mut edge_count = 0usize;
        let mut pairs: BTreeSet<(&str, &str)> = BTreeSet::new();
        for corner in &self.corners {
            if set.contains(corner.a.as_str()) && set.contains(corner.b.as_str()) {
                edge_count += 1;
                let pair = if corner.a < corner.b {
                    (corner.a.as_str(), corner.b.as_str())
                } else {
                    (corner.b.as_str(), corner.a.as_str())
                };
                if !pairs.insert(pair) {
                    return false; // multi-edge
                }
            }
        }
        edge_count == set.len() - 1 && self.is_connected(set.into_iter())
    }

    /// The symmetric integer intersection matrix: diagonal entries are
    /// component weights, off-diagonal entries count the corners joining the
    /// two components. Rows follow component-id order.
    pub fn intersection_matrix(&self) -> IntersectionMatrix {
        self.submatrix(self.components.iter().map(|c| c.id.as_str()))
    }

    /// Intersection matrix of the induced subgraph on the given components.
    pub fn submatrix<'a>(&self, members: impl Iterator<Item = &'a str>) -> IntersectionMatrix {
        let labels: Vec<String> = {
            let set: BTreeSet<&str> = members.collect();
            set.into_iter().map(|s| s.to_string()).collect()
        };
        let pos: HashMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let n = labels.len();
        let mut entries = vec![vec![0i64; n]; n];
        for (i, label) in labels.iter().enumerate() {
            entries[i][i] = self
                .component(label)
                .expect("submatrix member must exist")
                .weight;
        }
        for corner in &self.corners {
            if let (Some(&i), Some(&j)) = (pos.get(corner.a.as_str()), pos.get(corner.b.as_str())) {
                entries[i][j] += 1;
                entries[j][i] += 1;
            }
        }
        IntersectionMatrix { labels, entries }
    }
}

/// Symmetric integer matrix of a (sub)graph, with row labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntersectionMatrix {
    pub labels: Vec<String>,
    pub entries: Vec<Vec<i64>>,
}

impl IntersectionMatrix {
    pub fn from_entries(entries: Vec<Vec<i64>>) -> Self {
        let labels = (0..entries.len()).map(|i| format!("v{i}")).collect();
        IntersectionMatrix { labels, entries }
    }

    pub fn dimension(&self) -> usize {
        self.entries.len()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dimension();
        (0..n).all(|i| (0..n).all(|j| self.entries[i][j] == self.entries[j][i]))
    }
}

/// Adjacency helper: ids of invariant components reachable from `comp`
/// through singular corners, with the corners used.
pub fn invariant_neighbors<'a>(
    g: &'a DecoratedGraph,
    comp: &'a str,
) -> impl Iterator<Item = (&'a str, &'a CornerSingularity)> {
    g.corners_at(comp).filter_map(move |corner| {
        let other = corner.other_side(comp)?;
        let other_comp = g.component(other)?;
        if other_comp.invariant && g.component(comp).is_some_and(|c| c.invariant) {
            Some((other, corner))
        } else {
            None
        }
    })
}

/// Ordered map from component id to a value, used by reports.
pub type ComponentMap<T> = BTreeMap<String, T>;
