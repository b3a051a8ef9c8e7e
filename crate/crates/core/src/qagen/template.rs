use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{AnswerKind, QuestionType, SituationPolicy};
use crate::ontology::Vocabulary;
use crate::program::{parse_program, print_program, typecheck, FunctionalProgram, Literal, ParseError, TypeError, ValueType};

/// Placeholder name to vocabulary id.
pub type Binding = BTreeMap<String, String>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlaceholderKind {
    Person,
    Object,
    Verb,
    Relationship,
}

/// `V`, `O2`, `R` and friends: an uppercase letter optionally followed by
/// digits.
pub fn placeholder_kind(name: &str) -> Option<PlaceholderKind> {
    let mut chars = name.chars();
    let kind = match chars.next()? {
        'P' => PlaceholderKind::Person,
        'O' => PlaceholderKind::Object,
        'V' => PlaceholderKind::Verb,
        'R' => PlaceholderKind::Relationship,
        _ => return None,
    };
    chars.all(|c| c.is_ascii_digit()).then_some(kind)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template `{id}`: {source}")]
    Parse { id: String, source: ParseError },
    #[error("template `{id}`: {source}")]
    Type { id: String, source: TypeError },
    #[error("template `{id}`: answer type {found:?} does not match program output {program:?}")]
    AnswerType {
        id: String,
        found: ValueType,
        program: ValueType,
    },
    #[error("template `{id}`: {qtype} questions need situation policy {expected}")]
    Policy {
        id: String,
        qtype: QuestionType,
        expected: &'static str,
    },
    #[error("template `{id}`: placeholder [{name}] is not used by the program")]
    UnboundPlaceholder { id: String, name: String },
    #[error("missing placeholder [{0}]")]
    MissingPlaceholder(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct TemplateDoc {
    id: String,
    qtype: QuestionType,
    text_pattern: String,
    program_skeleton: String,
    answer_type: ValueType,
    situation_policy: SituationPolicy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TemplateDoc", into = "TemplateDoc")]
pub struct QuestionTemplate {
    pub id: String,
    pub qtype: QuestionType,
    pub text_pattern: String,
    pub program_skeleton: FunctionalProgram,
    pub answer_type: ValueType,
    pub situation_policy: SituationPolicy,
}

impl TryFrom<TemplateDoc> for QuestionTemplate {
    type Error = TemplateError;

    fn try_from(doc: TemplateDoc) -> Result<Self, TemplateError> {
        let program_skeleton = parse_program(&doc.program_skeleton).map_err(|source| TemplateError::Parse {
            id: doc.id.clone(),
            source,
        })?;
        QuestionTemplate::new(
            &doc.id,
            doc.qtype,
            &doc.text_pattern,
            program_skeleton,
            doc.answer_type,
            doc.situation_policy,
        )
    }
}

impl From<QuestionTemplate> for TemplateDoc {
    fn from(t: QuestionTemplate) -> Self {
        TemplateDoc {
            program_skeleton: print_program(&t.program_skeleton),
            id: t.id,
            qtype: t.qtype,
            text_pattern: t.text_pattern,
            answer_type: t.answer_type,
            situation_policy: t.situation_policy,
        }
    }
}

/// Names inside `[...]` in `text`.
fn text_placeholders(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('[') {
        let after = &rest[open + 1..];
        let Some(close) = after.find(']') else { break };
        out.push(&after[..close]);
        rest = &after[close + 1..];
    }
    out
}

impl QuestionTemplate {
    pub fn new(
        id: &str,
        qtype: QuestionType,
        text_pattern: &str,
        program_skeleton: FunctionalProgram,
        answer_type: ValueType,
        situation_policy: SituationPolicy,
    ) -> Result<Self, TemplateError> {
        let id_owned = || id.to_string();
        let out = typecheck(&program_skeleton).map_err(|source| TemplateError::Type { id: id_owned(), source })?;
        if out != answer_type || AnswerKind::of(answer_type).is_none() {
            return Err(TemplateError::AnswerType {
                id: id_owned(),
                found: answer_type,
                program: out,
            });
        }
        let expected = match qtype {
            QuestionType::Prediction => Some((SituationPolicy::MaskPrediction, "mask_prediction")),
            QuestionType::Feasibility => Some((SituationPolicy::MaskFeasibility, "mask_feasibility")),
            _ => None,
        };
        let policy_ok = match expected {
            Some((p, _)) => situation_policy == p,
            None => situation_policy == SituationPolicy::Full,
        };
        if !policy_ok {
            return Err(TemplateError::Policy {
                id: id_owned(),
                qtype,
                expected: expected.map_or("full", |(_, name)| name),
            });
        }
        let t = Self {
            id: id_owned(),
            qtype,
            text_pattern: text_pattern.to_string(),
            program_skeleton,
            answer_type,
            situation_policy,
        };
        let used = t.placeholders();
        for name in text_placeholders(text_pattern) {
            if !used.contains(name) {
                return Err(TemplateError::UnboundPlaceholder {
                    id: id_owned(),
                    name: name.to_string(),
                });
            }
        }
        Ok(t)
    }

    pub fn answer_kind(&self) -> AnswerKind {
        AnswerKind::of(self.answer_type).expect("checked at construction")
    }

    /// Placeholder literals of the program skeleton.
    pub fn placeholders(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if let Some(root) = &self.program_skeleton.root {
            root.walk(&mut |n| {
                for a in &n.args {
                    if let Some(s) = a.as_ident().filter(|s| placeholder_kind(s).is_some()) {
                        out.insert(s.to_string());
                    }
                }
            });
        }
        out
    }
}

/// Fill a template. The text receives vocabulary lemmas, the program receives
/// identifiers.
pub fn instantiate(t: &QuestionTemplate, b: &Binding, voc: &Vocabulary) -> Result<(String, FunctionalProgram), TemplateError> {
    for name in t.placeholders() {
        if !b.contains_key(&name) {
            return Err(TemplateError::MissingPlaceholder(name));
        }
    }
    let mut text = String::with_capacity(t.text_pattern.len() + 16);
    let mut rest = t.text_pattern.as_str();
    while let Some(open) = rest.find('[') {
        text.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let Some(close) = after.find(']') else {
            rest = &rest[open..];
            break;
        };
        let name = &after[..close];
        let value = b
            .get(name)
            .ok_or_else(|| TemplateError::MissingPlaceholder(name.to_string()))?;
        text.push_str(&voc.lemma(value));
        rest = &after[close + 1..];
    }
    text.push_str(rest);

    let root = t.program_skeleton.root.as_ref().map(|r| {
        r.map_literals(&mut |lit| match lit {
            Literal::Ident(s) if placeholder_kind(s).is_some() => Literal::Ident(b[s].clone()),
            other => other.clone(),
        })
    });
    let program = FunctionalProgram {
        root,
        declared_output_type: t.program_skeleton.declared_output_type,
    };
    Ok((text, program))
}

const ANCHOR: &str = "Filter_Actions_by_Object(Filter_Actions_by_Verb(AllActions, V), O)";
const SPATIAL: &str =
    "Relate_Actions(Filter_Relations_by_Object(Filter_Relations_by_Predicate(Relate_Triplets(AllActions), R), O))";

/// The shipped template library: four question types, three or four
/// templates each.
pub fn default_templates() -> Vec<QuestionTemplate> {
    use QuestionType::*;
    use SituationPolicy::*;
    let after = alloc::format!("Temporal_After(AllActions, {ANCHOR})");
    let before = alloc::format!("Temporal_Before(AllActions, {ANCHOR})");
    let table: Vec<(&str, QuestionType, &str, String, SituationPolicy)> = alloc::vec![
        ("int_obj_action", Interaction, "What did the person do with [O]?", "Filter_Actions_by_Object(AllActions, O)".into(), Full),
        ("int_verb_object", Interaction, "Which object did the person [V]?", "Query_Objects(Filter_Actions_by_Verb(AllActions, V))".into(), Full),
        ("int_relation_action", Interaction, "What did the person do while they were [R] [O]?", SPATIAL.into(), Full),
        ("seq_after_action", Sequence, "What did the person do after they [V] [O]?", alloc::format!("Query_Earliest({after})"), Full),
        ("seq_before_action", Sequence, "What did the person do before they [V] [O]?", alloc::format!("Query_Latest({before})"), Full),
        ("seq_after_object", Sequence, "Which object did the person [V2] after they [V] [O]?", alloc::format!("Query_Objects(Query_Earliest(Filter_Actions_by_Verb({after}, V2)))"), Full),
        ("seq_before_object", Sequence, "Which object did the person [V2] before they [V] [O]?", alloc::format!("Query_Objects(Query_Latest(Filter_Actions_by_Verb({before}, V2)))"), Full),
        ("pre_next_action", Prediction, "What will the person do next after they [V] [O]?", alloc::format!("Query_Earliest({after})"), MaskPrediction),
        ("pre_next_with_object", Prediction, "What will the person do next with [O2]?", alloc::format!("Query_Earliest(Filter_Actions_by_Object({after}, O2))"), MaskPrediction),
        ("pre_next_object", Prediction, "Which object would the person [V2] next?", alloc::format!("Query_Objects(Query_Earliest(Filter_Actions_by_Verb({after}, V2)))"), MaskPrediction),
        ("pre_object_after", Prediction, "Which object will the person [V2] after they [V] [O]?", alloc::format!("Query_Objects(Filter_Actions_by_Verb({after}, V2))"), MaskPrediction),
        ("fea_after_action", Feasibility, "What is the person able to do after they [V] [O]?", alloc::format!("Query_Earliest({after})"), MaskFeasibility),
        ("fea_object_after", Feasibility, "Which object is the person able to [V2] after they [V] [O]?", alloc::format!("Query_Objects(Query_Earliest(Filter_Actions_by_Verb({after}, V2)))"), MaskFeasibility),
        ("fea_spatial_object", Feasibility, "Which object is the person able to [V] when they are [R] [O]?", alloc::format!("Query_Objects(Filter_Actions_by_Verb({SPATIAL}, V))"), MaskFeasibility),
        ("fea_spatial_action", Feasibility, "What is the person able to do when they are [R] [O]?", SPATIAL.into(), MaskFeasibility),
    ];
    table
        .into_iter()
        .map(|(id, qtype, text, skeleton, policy)| {
            let program = parse_program(&skeleton).expect("built-in skeleton parses");
            let out = program.declared_output_type;
            QuestionTemplate::new(id, qtype, text, program, out, policy).expect("built-in template is valid")
        })
        .collect()
}
