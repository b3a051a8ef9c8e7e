//! Question, answer and distractor generation.
//!
//! Generation runs in two passes. Pass one works on one situation at a time:
//! it extracts template bindings, executes the instantiated programs on the
//! ground-truth graph and collects compositional distractor candidates
//! ([`generate_situation`]). Pass two is an ordered reduce over every pass-one
//! draft: it tallies answer frequencies, attaches frequent and random
//! distractors and shuffles the options ([`finalize`]).

mod bindings;
mod distract;
mod generate;
mod language;
mod template;

pub use bindings::{extract_bindings, resolve_binding, Resolved};
pub use distract::{
    assemble_qa, compositional_candidates, gen_compositional_distractor, gen_frequent_distractor,
    gen_random_distractor, FactIndex, QuestionParts,
};
pub use generate::{answer_stats, finalize, generate_corpus, generate_situation, AnswerStats, Corpus, Draft, GenOptions, SituationOutput};
pub use language::{expand_language, noun_phrase, render_action, render_fact, Phrasebook};
pub use template::{default_templates, instantiate, placeholder_kind, Binding, PlaceholderKind, QuestionTemplate, TemplateError};

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::program::{as_text, FunctionalProgram, ValueType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    Interaction,
    Sequence,
    Prediction,
    Feasibility,
}

impl QuestionType {
    pub const ALL: [QuestionType; 4] = [
        QuestionType::Interaction,
        QuestionType::Sequence,
        QuestionType::Prediction,
        QuestionType::Feasibility,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QuestionType::Interaction => "interaction",
            QuestionType::Sequence => "sequence",
            QuestionType::Prediction => "prediction",
            QuestionType::Feasibility => "feasibility",
        }
    }

    /// Happened facts are told in the past, hypothetical ones in the base form.
    pub fn tense(self) -> Tense {
        match self {
            QuestionType::Interaction | QuestionType::Sequence => Tense::Past,
            QuestionType::Prediction | QuestionType::Feasibility => Tense::Base,
        }
    }
}

impl core::fmt::Display for QuestionType {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tense {
    Past,
    Base,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SituationPolicy {
    Full,
    MaskPrediction,
    MaskFeasibility,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    Action,
    Object,
}

impl AnswerKind {
    pub fn of(t: ValueType) -> Option<AnswerKind> {
        match t {
            ValueType::ActionSet => Some(AnswerKind::Action),
            ValueType::ObjectSet => Some(AnswerKind::Object),
            _ => None,
        }
    }
}

/// A verb-object action or a bare object, the two things an option can say.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fact {
    Action { verb: String, object: String },
    Object(String),
}

impl Fact {
    pub fn action(verb: &str, object: &str) -> Self {
        Fact::Action {
            verb: verb.into(),
            object: object.into(),
        }
    }

    pub fn kind(&self) -> AnswerKind {
        match self {
            Fact::Action { .. } => AnswerKind::Action,
            Fact::Object(_) => AnswerKind::Object,
        }
    }

    pub fn object(&self) -> &str {
        match self {
            Fact::Action { object, .. } | Fact::Object(object) => object,
        }
    }

    pub fn verb(&self) -> Option<&str> {
        match self {
            Fact::Action { verb, .. } => Some(verb),
            Fact::Object(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Answer,
    Compositional,
    Random,
    Frequent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

/// One multiple-choice question.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAItem {
    pub id: String,
    /// Id of the situation shown with the question. Masked situations carry
    /// a derived id `{base}@pred:{action}` or `{base}@feas:{action}`.
    pub situation_id: String,
    pub qtype: QuestionType,
    pub question_text: String,
    pub options: [String; 4],
    pub correct_index: usize,
    #[serde(with = "as_text")]
    pub program: FunctionalProgram,
    pub provenance: [Provenance; 4],
    pub template_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl QAItem {
    pub fn answer(&self) -> &str {
        &self.options[self.correct_index]
    }

    /// Id of the unmasked ground-truth situation.
    pub fn base_situation_id(&self) -> &str {
        base_id(&self.situation_id)
    }
}

pub fn base_id(situation_id: &str) -> &str {
    situation_id.split('@').next().unwrap_or(situation_id)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum QAError {
    #[error("duplicate option `{0}`")]
    DuplicateOption(String),
    #[error("no distractor candidate")]
    NoCandidate,
    #[error("corpus cannot supply a distinct random option")]
    Exhausted,
    #[error("no answer statistics for this question group")]
    EmptyStats,
    #[error(transparent)]
    Template(#[from] TemplateError),
}
