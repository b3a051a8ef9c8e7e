use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::language::render_fact;
use super::template::{instantiate, placeholder_kind, Binding, PlaceholderKind, QuestionTemplate};
use super::{Fact, SituationPolicy};
use crate::hypergraph::{
    mask_for_feasibility, mask_for_prediction, node_class, node_kind, NodeKind, SituationHypergraph,
};
use crate::ontology::{RelationKind, Vocabulary};
use crate::program::{execute, ExecValue, Execution, FunctionalProgram, Op, ProgramNode, ValueType};

/// A binding that survived every answerability check, with everything pass
/// one needs to build a question from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolved {
    pub binding: Binding,
    /// Instantiated text before language expansion.
    pub raw_text: String,
    pub program: FunctionalProgram,
    pub answer: Fact,
    pub answer_text: String,
    /// The action a masking policy is keyed on.
    pub query_action: Option<String>,
    /// Situation shown with the question when it differs from the ground truth.
    pub shipped: Option<SituationHypergraph>,
}

fn is_anchor(n: &ProgramNode) -> bool {
    n.op == Op::FilterActionsByObject
        && n.children[0].op == Op::FilterActionsByVerb
        && n.children[0].children[0].op == Op::AllActions
}

/// Paths of `Filter_Actions_by_Object(Filter_Actions_by_Verb(AllActions, _), _)`
/// subtrees: the action a temporal question is anchored on.
pub(crate) fn anchor_paths(p: &FunctionalProgram) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(root) = &p.root {
        root.walk_paths("root", &mut |path, n| {
            if is_anchor(n) {
                out.push(path.to_string());
            }
        });
    }
    out
}

fn singleton(v: Option<&ExecValue>) -> Option<&String> {
    let set = v?.as_actions()?;
    (set.len() == 1).then(|| set.iter().next().expect("len 1"))
}

fn answer_facts(exec: &Execution, h: &SituationHypergraph) -> BTreeSet<Fact> {
    match &exec.value {
        ExecValue::Actions(ids) => ids
            .iter()
            .filter_map(|id| h.action(id))
            .map(|a| Fact::action(&a.verb, &a.object))
            .collect(),
        ExecValue::Objects(os) => os.iter().map(|o| Fact::Object(o.clone())).collect(),
        _ => BTreeSet::new(),
    }
}

/// Check one binding against `h`. `None` when the instantiated program is
/// unanswerable, its answer is not a single fact, its anchor is not a single
/// action instance, or the situation policy cannot be applied.
pub fn resolve_binding(
    h: &SituationHypergraph,
    t: &QuestionTemplate,
    voc: &Vocabulary,
    binding: &Binding,
) -> Option<Resolved> {
    let (raw_text, program) = instantiate(t, binding, voc).ok()?;
    let exec = execute(&program, h).ok()?;
    if exec.value.is_empty() || exec.value.value_type() != t.answer_type {
        return None;
    }
    let facts = answer_facts(&exec, h);
    if facts.len() != 1 {
        return None;
    }
    let answer = facts.into_iter().next().expect("len 1");
    let anchors = anchor_paths(&program);
    for path in &anchors {
        singleton(exec.at(path))?;
    }

    let (query_action, shipped) = match t.situation_policy {
        SituationPolicy::Full => (None, None),
        SituationPolicy::MaskPrediction => {
            let [path] = anchors.as_slice() else { return None };
            let q = singleton(exec.at(path))?.clone();
            let mut masked = mask_for_prediction(h, &q).ok()?;
            masked.action(&q)?;
            masked.id = alloc::format!("{}@pred:{}", h.id, q);
            (Some(q), Some(masked))
        }
        SituationPolicy::MaskFeasibility => {
            let nearest = exec
                .trace
                .iter()
                .filter(|e| e.value.value_type() == ValueType::ActionSet)
                .min_by_key(|e| (e.path.matches('.').count(), e.path.clone()))?;
            let a = singleton(Some(&nearest.value))?.clone();
            let mut masked = mask_for_feasibility(h, &a).ok()?;
            masked.id = alloc::format!("{}@feas:{}", h.id, a);
            (Some(a), Some(masked))
        }
    };

    let answer_text = render_fact(voc, &answer, t.qtype.tense());
    debug_assert_eq!(answer.kind(), t.answer_kind());
    Some(Resolved {
        binding: binding.clone(),
        raw_text,
        program,
        answer,
        answer_text,
        query_action,
        shipped,
    })
}

/// Candidate values for each placeholder, drawn from the graph. Anchored
/// verb-object pairs and relation prompts are enumerated jointly so only
/// pairs that occur are tried.
fn candidate_bindings(h: &SituationHypergraph, t: &QuestionTemplate, voc: &Vocabulary) -> Vec<Binding> {
    let names = t.placeholders();
    let action_pairs: BTreeSet<(String, String)> =
        h.actions.iter().map(|a| (a.verb.clone(), a.object.clone())).collect();
    let verbs: BTreeSet<String> = h.actions.iter().map(|a| a.verb.clone()).collect();
    let objects: BTreeSet<String> = h.actions.iter().map(|a| a.object.clone()).collect();
    let member_frames: BTreeSet<u32> = h.actions.iter().flat_map(|a| a.member_frames()).collect();
    let prompts: BTreeSet<(String, String)> = member_frames
        .iter()
        .filter_map(|&f| h.frame(f))
        .flat_map(|f| f.triplets.iter())
        .filter(|t| node_kind(&t.subject) == NodeKind::Person && node_kind(&t.object) == NodeKind::Object)
        .filter(|t| voc.relation_kind(&t.predicate) == Some(RelationKind::Spatial))
        .map(|t| (t.predicate.clone(), node_class(&t.object).to_string()))
        .collect();

    let mut partial: Vec<Binding> = alloc::vec![Binding::new()];
    let mut done: BTreeSet<&str> = BTreeSet::new();
    let pair = |a: &str, b: &str, values: &BTreeSet<(String, String)>| -> Vec<Binding> {
        values
            .iter()
            .map(|(x, y)| [(a.to_string(), x.clone()), (b.to_string(), y.clone())].into_iter().collect())
            .collect()
    };
    if names.contains("R") && names.contains("O") {
        partial = pair("R", "O", &prompts);
        done.extend(["R", "O"]);
    } else if names.contains("V") && names.contains("O") {
        partial = pair("V", "O", &action_pairs);
        done.extend(["V", "O"]);
    }
    for name in &names {
        if done.contains(name.as_str()) {
            continue;
        }
        let domain: BTreeSet<String> = match placeholder_kind(name) {
            Some(PlaceholderKind::Verb) => verbs.clone(),
            Some(PlaceholderKind::Object) => objects.clone(),
            Some(PlaceholderKind::Relationship) => prompts.iter().map(|(r, _)| r.clone()).collect(),
            _ => BTreeSet::new(),
        };
        let mut next = Vec::with_capacity(partial.len() * domain.len());
        for b in &partial {
            for value in &domain {
                let mut b = b.clone();
                b.insert(name.clone(), value.clone());
                next.push(b);
            }
        }
        partial = next;
    }
    partial
}

pub(crate) fn resolve_all(h: &SituationHypergraph, t: &QuestionTemplate, voc: &Vocabulary) -> Vec<Resolved> {
    candidate_bindings(h, t, voc)
        .iter()
        .filter_map(|b| resolve_binding(h, t, voc, b))
        .collect()
}

/// Every binding of `t` that yields an answerable question on `h`, in a
/// deterministic order.
pub fn extract_bindings(h: &SituationHypergraph, t: &QuestionTemplate, voc: &Vocabulary) -> Vec<Binding> {
    resolve_all(h, t, voc).into_iter().map(|r| r.binding).collect()
}
