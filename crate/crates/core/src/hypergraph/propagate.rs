use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{RelationTriplet, SituationHypergraph};
use crate::ontology::{RelationKind, Vocabulary};

/// Within-frame rewrite rules `<A contact B> ∧ <B positional C> ⇒ <A positional C>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagationRules {
    pub contact: BTreeSet<String>,
    pub positional: BTreeSet<String>,
}

impl Default for PropagationRules {
    fn default() -> Self {
        let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        Self {
            contact: set(&["on", "holding", "sitting_on", "lying_on"]),
            positional: set(&[
                "left_of",
                "right_of",
                "in_front_of",
                "behind",
                "on_the_side_of",
                "above",
                "beneath",
            ]),
        }
    }
}

impl PropagationRules {
    /// Rule predicates that are not spatial relationships of `voc`.
    pub fn unknown_predicates(&self, voc: &Vocabulary) -> Vec<String> {
        self.contact
            .iter()
            .chain(self.positional.iter())
            .filter(|p| voc.relation_kind(p) != Some(RelationKind::Spatial))
            .cloned()
            .collect()
    }
}

/// Per-frame fixpoint closure under `rules`. Monotone and idempotent; rules
/// that would relate a node to itself are skipped.
pub fn propagate_relations(h: &SituationHypergraph, rules: &PropagationRules) -> SituationHypergraph {
    let mut out = h.clone();
    for frame in &mut out.frames {
        loop {
            let mut fresh = Vec::new();
            for first in frame.triplets.iter().filter(|t| rules.contact.contains(&t.predicate)) {
                for second in frame
                    .triplets
                    .iter()
                    .filter(|t| t.subject == first.object && rules.positional.contains(&t.predicate))
                {
                    if first.subject == second.object {
                        continue;
                    }
                    let derived = RelationTriplet {
                        subject: first.subject.clone(),
                        predicate: second.predicate.clone(),
                        object: second.object.clone(),
                        frame: frame.frame,
                    };
                    if !frame.triplets.contains(&derived) {
                        fresh.push(derived);
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            frame.triplets.extend(fresh);
        }
    }
    out
}
