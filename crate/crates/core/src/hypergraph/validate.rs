use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{node_class, node_kind, NodeKind, SituationHypergraph};
use crate::ontology::{RelationKind, Vocabulary};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Every broken structural invariant of `h`, one entry per offending element.
/// Empty iff the graph is well formed.
pub fn validate(h: &SituationHypergraph, voc: &Vocabulary) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |location: String, message: &str| {
        out.push(Violation {
            location,
            message: message.into(),
        })
    };
    let src = h.source_interval;
    if src.start > src.end {
        push(format!("situation {}", h.id), "inverted source interval");
    }

    for pair in h.frames.windows(2) {
        if pair[0].frame >= pair[1].frame {
            push(format!("frame {}", pair[1].frame), "frames not strictly increasing");
        }
    }
    for f in &h.frames {
        let loc = || format!("frame {}", f.frame);
        if !src.contains(f.frame) {
            push(loc(), "frame outside source interval");
        }
        for n in &f.nodes {
            if node_kind(n) == NodeKind::Object && !voc.is_object(node_class(n)) {
                push(format!("frame {} node {n}", f.frame), "unknown object class");
            }
        }
        for t in &f.triplets {
            let tloc = || format!("frame {} triplet <{}, {}, {}>", f.frame, t.subject, t.predicate, t.object);
            if t.frame != f.frame {
                push(tloc(), "triplet frame does not match its subgraph");
            }
            if t.subject == t.object {
                push(tloc(), "self-relation");
            }
            if voc.relation_kind(&t.predicate) != Some(RelationKind::Spatial) {
                push(tloc(), "predicate is not a spatial relationship");
            }
            if !f.nodes.contains(&t.subject) {
                push(tloc(), "subject not in frame");
            }
            if !f.nodes.contains(&t.object) {
                push(tloc(), "object not in frame");
            }
        }
    }

    let mut ids = BTreeSet::new();
    for a in &h.actions {
        let loc = || format!("action {}", a.id);
        if !ids.insert(a.id.as_str()) {
            push(loc(), "duplicate action id");
        }
        if a.interval.start > a.interval.end {
            push(loc(), "inverted interval");
        }
        if !voc.validate_composition(&a.verb, &a.object) {
            push(loc(), "unknown action predicate");
        }
        if !src.covers(&a.interval) {
            push(loc(), "interval outside source interval");
        }
        if a.precondition_frame != a.interval.start {
            push(loc(), "precondition frame is not the interval start");
        }
        if h.frame(a.precondition_frame).is_none() {
            push(loc(), "precondition frame missing");
        }
        for &e in &a.effect_frames {
            if e <= a.interval.start || e > a.interval.end || h.frame(e).is_none() {
                push(format!("action {} effect frame {e}", a.id), "effect frame invalid");
            }
        }
        let connected = a
            .member_frames()
            .filter_map(|fr| h.frame(fr))
            .any(|f| f.has_class(&a.object));
        if !connected {
            push(loc(), "object node absent from all member frames");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::tests::two_frame_graph;
    use crate::hypergraph::RelationTriplet;
    use crate::testutil::vocab;

    #[test]
    fn fresh_graph_is_clean() {
        assert!(validate(&two_frame_graph(), &vocab()).is_empty());
    }

    #[test]
    fn dangling_triplet_endpoint() {
        let mut h = two_frame_graph();
        h.frames[1].triplets.insert(RelationTriplet {
            subject: "person".into(),
            predicate: "touching".into(),
            object: "book".into(),
            frame: 10,
        });
        let v = validate(&h, &vocab());
        assert_eq!(v.len(), 1);
        assert!(v[0].location.contains("frame 10"));
        assert!(v[0].location.contains("book"));
        assert_eq!(v[0].message, "object not in frame");
    }
}
