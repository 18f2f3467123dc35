//! Property plug-ins: label alphabets and local rules for 3-colourability,
//! minimum vertex cover, and minimum dominating set.
//!
//! Labels carry exact per-scope facts. For the dominating set the three
//! states of an interface vertex are: in the set; out and dominated by the
//! scope's own witness; out and not dominated within the scope. Domination
//! credit earned in one scope is combined by OR when scopes merge, and each
//! graph edge is processed at exactly one site.

use std::fmt;
use std::str::FromStr;

/// 3-colouring labels: the colour itself.
pub const COL_A: u8 = 0;
pub const COL_B: u8 = 1;
pub const COL_C: u8 = 2;

/// Vertex cover labels.
pub const VC_OUT: u8 = 0;
pub const VC_IN: u8 = 1;

/// Dominating set labels.
pub const DOM_IN: u8 = 0;
pub const DOM_COVERED: u8 = 1;
pub const DOM_UNCOVERED: u8 = 2;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Plugin {
    ThreeCol,
    VertexCover,
    DomSet,
}

impl fmt::Display for Plugin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Plugin {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "threecol" => Ok(Plugin::ThreeCol),
            "vertexcover" => Ok(Plugin::VertexCover),
            "domset" => Ok(Plugin::DomSet),
            other => Err(format!(
                "unknown property '{}' (expected threecol|vertexcover|domset)",
                other
            )),
        }
    }
}

impl Plugin {
    pub const ALL: [Plugin; 3] = [Plugin::ThreeCol, Plugin::VertexCover, Plugin::DomSet];

    pub fn name(self) -> &'static str {
        match self {
            Plugin::ThreeCol => "threecol",
            Plugin::VertexCover => "vertexcover",
            Plugin::DomSet => "domset",
        }
    }

    /// Decision plug-ins report feasibility; the others minimise a vertex set.
    pub fn is_decision(self) -> bool {
        matches!(self, Plugin::ThreeCol)
    }

    pub fn alphabet(self) -> u8 {
        match self {
            Plugin::ThreeCol => 3,
            Plugin::VertexCover => 2,
            Plugin::DomSet => 3,
        }
    }

    pub fn labels(self) -> impl Iterator<Item = u8> {
        0..self.alphabet()
    }

    pub fn vertex_cost(self, label: u8) -> u64 {
        u64::from(self.is_member(label))
    }

    /// Does the label put the vertex into the solution set?
    pub fn is_member(self, label: u8) -> bool {
        match self {
            Plugin::ThreeCol => false,
            Plugin::VertexCover => label == VC_IN,
            Plugin::DomSet => label == DOM_IN,
        }
    }

    /// Merges the labels of one vertex seen in two disjoint scopes.
    pub fn combine(self, a: u8, b: u8) -> Option<u8> {
        match self {
            Plugin::ThreeCol | Plugin::VertexCover => (a == b).then_some(a),
            Plugin::DomSet => match (a, b) {
                (DOM_IN, DOM_IN) => Some(DOM_IN),
                (DOM_IN, _) | (_, DOM_IN) => None, // membership must agree
                (DOM_COVERED, _) | (_, DOM_COVERED) => Some(DOM_COVERED),
                _ => Some(DOM_UNCOVERED),
            },
        }
    }

    /// Processes one graph edge: returns updated endpoint labels, or None if
    /// the edge is violated.
    pub fn apply_edge(self, a: u8, b: u8) -> Option<(u8, u8)> {
        match self {
            Plugin::ThreeCol => (a != b).then_some((a, b)),
            Plugin::VertexCover => (a == VC_IN || b == VC_IN).then_some((a, b)),
            Plugin::DomSet => {
                let a2 = if b == DOM_IN && a == DOM_UNCOVERED {
                    DOM_COVERED
                } else {
                    a
                };
                let b2 = if a == DOM_IN && b == DOM_UNCOVERED {
                    DOM_COVERED
                } else {
                    b
                };
                Some((a2, b2))
            }
        }
    }

    /// Requirement on a vertex once all of its edges have been processed;
    /// applies only to vertices of the active domain.
    pub fn finalize_ok(self, label: u8) -> bool {
        match self {
            Plugin::ThreeCol | Plugin::VertexCover => true,
            Plugin::DomSet => label != DOM_UNCOVERED,
        }
    }

    /// Labels admissible for a vertex with no processed edge in the scope.
    pub fn inactive_allowed(self, label: u8) -> bool {
        match self {
            Plugin::ThreeCol | Plugin::VertexCover => true,
            Plugin::DomSet => label != DOM_COVERED, // no one inside to dominate it
        }
    }

    pub fn free_labels(self) -> Vec<u8> {
        self.labels()
            .filter(|&l| self.inactive_allowed(l))
            .collect()
    }

    /// Equality class used when joining scopes: two labels can merge exactly
    /// when their signatures agree.
    pub fn join_sig(self, label: u8) -> u8 {
        match self {
            Plugin::ThreeCol | Plugin::VertexCover => label,
            Plugin::DomSet => u8::from(label == DOM_IN),
        }
    }
}
