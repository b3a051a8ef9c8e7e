//! Situation hypergraphs: per-frame subgraphs of person and object nodes,
//! joined by action hyperedges that span intervals of frames.
//!
//! Node identity is per situation. A node id is its class (`cup`, or
//! `person` for people), optionally followed by `:n` to tell apart several
//! instances of the same class (`cup:2`). Overlapping actions therefore
//! share node ids by construction.

mod propagate;
mod transform;
mod validate;

pub use propagate::{propagate_relations, PropagationRules};
pub use transform::{mask_for_feasibility, mask_for_prediction, prediction_cutoff, trim, TransformError};
pub use validate::{validate, Violation};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ontology::{Vocabulary, PERSON};

/// Frame index in video-frame units.
pub type Frame = u32;

/// Inclusive frame interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[Frame; 2]", into = "[Frame; 2]")]
pub struct Interval {
    pub start: Frame,
    pub end: Frame,
}

impl Interval {
    pub const fn new(start: Frame, end: Frame) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, frame: Frame) -> bool {
        self.start <= frame && frame <= self.end
    }

    pub fn covers(&self, other: &Interval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start <= end).then_some(Interval { start, end })
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u32 {
        self.end - self.start + 1
    }
}

impl From<[Frame; 2]> for Interval {
    fn from([start, end]: [Frame; 2]) -> Self {
        Self { start, end }
    }
}

impl From<Interval> for [Frame; 2] {
    fn from(i: Interval) -> Self {
        [i.start, i.end]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Person,
    Object,
}

/// Class part of a node id.
pub fn node_class(id: &str) -> &str {
    id.split(':').next().unwrap_or(id)
}

pub fn node_kind(id: &str) -> NodeKind {
    if node_class(id) == PERSON {
        NodeKind::Person
    } else {
        NodeKind::Object
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntityNode {
    pub id: String,
    pub kind: NodeKind,
    pub class: String,
    pub frame_span: BTreeSet<Frame>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationTriplet {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub frame: Frame,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameSubgraph {
    pub frame: Frame,
    pub nodes: BTreeSet<String>,
    pub triplets: BTreeSet<RelationTriplet>,
}

impl FrameSubgraph {
    pub fn new(frame: Frame) -> Self {
        Self {
            frame,
            nodes: BTreeSet::new(),
            triplets: BTreeSet::new(),
        }
    }

    pub fn with_node(mut self, id: &str) -> Self {
        self.nodes.insert(id.into());
        self
    }

    /// Adds the triplet and both of its endpoints.
    pub fn with_triplet(mut self, subject: &str, predicate: &str, object: &str) -> Self {
        self.nodes.insert(subject.into());
        self.nodes.insert(object.into());
        self.triplets.insert(RelationTriplet {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
            frame: self.frame,
        });
        self
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.nodes.iter().any(|n| node_class(n) == class)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionHyperedge {
    pub id: String,
    pub verb: String,
    pub object: String,
    pub interval: Interval,
    pub precondition_frame: Frame,
    pub effect_frames: Vec<Frame>,
}

impl ActionHyperedge {
    /// Precondition frame followed by the effect frames.
    pub fn member_frames(&self) -> impl Iterator<Item = Frame> + '_ {
        core::iter::once(self.precondition_frame).chain(self.effect_frames.iter().copied())
    }

    pub fn predicate(&self) -> (&str, &str) {
        (&self.verb, &self.object)
    }
}

/// An action annotation as it appears in a hypergraph document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAction {
    pub id: String,
    pub verb: String,
    pub object: String,
    pub start: Frame,
    pub end: Frame,
}

impl RawAction {
    pub fn new(id: &str, verb: &str, object: &str, start: Frame, end: Frame) -> Self {
        Self {
            id: id.into(),
            verb: verb.into(),
            object: object.into(),
            start,
            end,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SituationHypergraph {
    pub id: String,
    pub source_interval: Interval,
    /// Strictly increasing by frame index.
    pub frames: Vec<FrameSubgraph>,
    /// Sorted by action id.
    pub actions: Vec<ActionHyperedge>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("frames are not strictly increasing at frame {0}")]
    UnsortedFrames(Frame),
    #[error("action `{0}`: inverted interval")]
    InvertedInterval(String),
    #[error("action `{id}`: interval [{start}, {end}] outside situation range")]
    OutOfRange { id: String, start: Frame, end: Frame },
    #[error("action `{id}`: unknown action predicate ({verb}, {object})")]
    UnknownPredicate {
        id: String,
        verb: String,
        object: String,
    },
    #[error("action `{0}`: no frame at interval start")]
    MissingPreconditionFrame(String),
    #[error("duplicate action id `{0}`")]
    DuplicateAction(String),
    #[error("invalid hypergraph: {} violation(s), first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
}

pub fn build_hypergraph(
    id: &str,
    source_interval: Interval,
    frames: Vec<FrameSubgraph>,
    actions: Vec<RawAction>,
    voc: &Vocabulary,
) -> Result<SituationHypergraph, BuildError> {
    for pair in frames.windows(2) {
        if pair[0].frame >= pair[1].frame {
            return Err(BuildError::UnsortedFrames(pair[1].frame));
        }
    }
    let mut hyperedges: Vec<ActionHyperedge> = Vec::with_capacity(actions.len());
    for raw in actions {
        if raw.start > raw.end {
            return Err(BuildError::InvertedInterval(raw.id));
        }
        let interval = Interval::new(raw.start, raw.end);
        if !source_interval.covers(&interval) {
            return Err(BuildError::OutOfRange {
                id: raw.id,
                start: raw.start,
                end: raw.end,
            });
        }
        if !voc.validate_composition(&raw.verb, &raw.object) {
            return Err(BuildError::UnknownPredicate {
                id: raw.id,
                verb: raw.verb,
                object: raw.object,
            });
        }
        if frames.binary_search_by_key(&raw.start, |f| f.frame).is_err() {
            return Err(BuildError::MissingPreconditionFrame(raw.id));
        }
        hyperedges.push(hyperedge(&frames, raw.id, raw.verb, raw.object, interval));
    }
    hyperedges.sort_by(|a, b| a.id.cmp(&b.id));
    for pair in hyperedges.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(BuildError::DuplicateAction(pair[0].id.clone()));
        }
    }
    let graph = SituationHypergraph {
        id: id.into(),
        source_interval,
        frames,
        actions: hyperedges,
    };
    let violations = validate(&graph, voc);
    if violations.is_empty() {
        Ok(graph)
    } else {
        Err(BuildError::Invalid(violations))
    }
}

/// Hyperedge over the frames of `frames` inside `interval`. The caller
/// guarantees a frame exists at `interval.start`.
pub(crate) fn hyperedge(
    frames: &[FrameSubgraph],
    id: String,
    verb: String,
    object: String,
    interval: Interval,
) -> ActionHyperedge {
    let effect_frames = frames
        .iter()
        .map(|f| f.frame)
        .filter(|&f| f > interval.start && f <= interval.end)
        .collect();
    ActionHyperedge {
        id,
        verb,
        object,
        interval,
        precondition_frame: interval.start,
        effect_frames,
    }
}

impl SituationHypergraph {
    pub fn frame(&self, frame: Frame) -> Option<&FrameSubgraph> {
        self.frames
            .binary_search_by_key(&frame, |f| f.frame)
            .ok()
            .map(|i| &self.frames[i])
    }

    pub fn action(&self, id: &str) -> Option<&ActionHyperedge> {
        self.actions
            .binary_search_by(|a| a.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.actions[i])
    }

    /// Node table X, derived from the frame subgraphs.
    pub fn nodes(&self) -> BTreeMap<String, EntityNode> {
        let mut out: BTreeMap<String, EntityNode> = BTreeMap::new();
        for f in &self.frames {
            for n in &f.nodes {
                out.entry(n.clone())
                    .or_insert_with(|| EntityNode {
                        id: n.clone(),
                        kind: node_kind(n),
                        class: node_class(n).into(),
                        frame_span: BTreeSet::new(),
                    })
                    .frame_span
                    .insert(f.frame);
            }
        }
        out
    }

    /// Object classes present anywhere in the situation.
    pub fn object_classes(&self) -> BTreeSet<String> {
        self.frames
            .iter()
            .flat_map(|f| f.nodes.iter())
            .filter(|n| node_kind(n) == NodeKind::Object)
            .map(|n| node_class(n).into())
            .collect()
    }

    pub fn triplet_count(&self) -> usize {
        self.frames.iter().map(|f| f.triplets.len()).sum()
    }

    pub fn to_doc(&self) -> HypergraphDoc {
        HypergraphDoc {
            id: self.id.clone(),
            source_interval: self.source_interval,
            frames: self
                .frames
                .iter()
                .map(|f| FrameDoc {
                    frame: f.frame,
                    nodes: f.nodes.iter().cloned().collect(),
                    triplets: f
                        .triplets
                        .iter()
                        .map(|t| TripletDoc {
                            subject: t.subject.clone(),
                            predicate: t.predicate.clone(),
                            object: t.object.clone(),
                        })
                        .collect(),
                })
                .collect(),
            actions: self
                .actions
                .iter()
                .map(|a| RawAction {
                    id: a.id.clone(),
                    verb: a.verb.clone(),
                    object: a.object.clone(),
                    start: a.interval.start,
                    end: a.interval.end,
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: HypergraphDoc, voc: &Vocabulary) -> Result<Self, BuildError> {
        let frames = doc
            .frames
            .into_iter()
            .map(|f| {
                let frame = f.frame;
                FrameSubgraph {
                    frame,
                    nodes: f.nodes.into_iter().collect(),
                    triplets: f
                        .triplets
                        .into_iter()
                        .map(|t| RelationTriplet {
                            subject: t.subject,
                            predicate: t.predicate,
                            object: t.object,
                            frame,
                        })
                        .collect(),
                }
            })
            .collect();
        build_hypergraph(&doc.id, doc.source_interval, frames, doc.actions, voc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletDoc {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameDoc {
    pub frame: Frame,
    pub nodes: Vec<String>,
    pub triplets: Vec<TripletDoc>,
}

/// On-disk form of one situation hypergraph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypergraphDoc {
    pub id: String,
    pub source_interval: Interval,
    pub frames: Vec<FrameDoc>,
    pub actions: Vec<RawAction>,
}
