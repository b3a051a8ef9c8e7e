use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::bindings::resolve_all;
use super::distract::{
    assemble_qa, compositional_candidates, gen_frequent_distractor, gen_random_distractor, FactIndex, QuestionParts,
};
use super::language::expand_language;
use super::template::QuestionTemplate;
use super::{AnswerKind, Provenance, QAError, QAItem, QuestionType};
use crate::hypergraph::SituationHypergraph;
use crate::ontology::Vocabulary;
use crate::program::FunctionalProgram;
use crate::rng::derive;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenOptions {
    pub seed: u64,
    /// Attach a frequent distractor to every item. When off, a random one
    /// takes its slot.
    pub frequent: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self { seed: 0, frequent: true }
    }
}

/// A question after pass one: answer known, distractors still open.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Draft {
    pub id: String,
    pub situation_id: String,
    pub base_id: String,
    pub template_id: String,
    pub qtype: QuestionType,
    pub kind: AnswerKind,
    pub question_text: String,
    pub program: FunctionalProgram,
    pub answer: String,
    /// Compositional candidates, best first.
    pub compositional: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SituationOutput {
    pub base_id: String,
    pub drafts: Vec<Draft>,
    /// Situations shown with the drafts, keyed by their ids.
    pub shipped: BTreeMap<String, SituationHypergraph>,
}

fn item_seed(seed: u64, id: &str) -> u64 {
    derive(seed, &alloc::format!("item/{id}"))
}

/// Pass one for one ground-truth (already propagated) situation.
pub fn generate_situation(
    h: &SituationHypergraph,
    templates: &[QuestionTemplate],
    voc: &Vocabulary,
    seed: u64,
) -> SituationOutput {
    let mut drafts = Vec::new();
    let mut shipped = BTreeMap::new();
    for t in templates {
        for (n, r) in resolve_all(h, t, voc).into_iter().enumerate() {
            let id = alloc::format!("{}/{}/{}", h.id, t.id, n);
            let tense = t.qtype.tense();
            let compositional = compositional_candidates(
                h,
                &r.program,
                &r.answer,
                tense,
                voc,
                derive(item_seed(seed, &id), "compositional"),
            );
            let situation_id = match r.shipped {
                Some(g) => {
                    let sid = g.id.clone();
                    shipped.entry(sid.clone()).or_insert(g);
                    sid
                }
                None => {
                    shipped.entry(h.id.clone()).or_insert_with(|| h.clone());
                    h.id.clone()
                }
            };
            drafts.push(Draft {
                id,
                situation_id,
                base_id: h.id.clone(),
                template_id: t.id.clone(),
                qtype: t.qtype,
                kind: t.answer_kind(),
                question_text: expand_language(&r.raw_text, voc, t.qtype),
                program: r.program,
                answer: r.answer_text,
                compositional,
            });
        }
    }
    SituationOutput {
        base_id: h.id.clone(),
        drafts,
        shipped,
    }
}

/// Answer counts per question type and answer kind.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnswerStats {
    pub counts: BTreeMap<(QuestionType, AnswerKind), BTreeMap<String, usize>>,
}

impl AnswerStats {
    pub fn group(&self, qtype: QuestionType, kind: AnswerKind) -> Option<&BTreeMap<String, usize>> {
        self.counts.get(&(qtype, kind))
    }
}

pub fn answer_stats<'a>(drafts: impl IntoIterator<Item = &'a Draft>) -> AnswerStats {
    let mut stats = AnswerStats::default();
    for d in drafts {
        *stats
            .counts
            .entry((d.qtype, d.kind))
            .or_default()
            .entry(d.answer.clone())
            .or_default() += 1;
    }
    stats
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub items: Vec<QAItem>,
    pub shipped: BTreeMap<String, SituationHypergraph>,
    /// Drafts discarded because no distinct random option existed.
    pub dropped: usize,
}

/// Pass two: ordered reduce over pass-one output. The result does not
/// depend on the order of `outputs`.
pub fn finalize(mut outputs: Vec<SituationOutput>, index: &FactIndex, voc: &Vocabulary, opts: GenOptions) -> Corpus {
    outputs.sort_by(|a, b| a.base_id.cmp(&b.base_id));
    let stats = answer_stats(outputs.iter().flat_map(|o| o.drafts.iter()));
    let mut corpus = Corpus::default();
    for out in outputs {
        corpus.shipped.extend(out.shipped);
        for d in out.drafts {
            match attach(d, &stats, index, voc, opts) {
                Ok(item) => corpus.items.push(item),
                Err(_) => corpus.dropped += 1,
            }
        }
    }
    corpus
}

fn attach(d: Draft, stats: &AnswerStats, index: &FactIndex, voc: &Vocabulary, opts: GenOptions) -> Result<QAItem, QAError> {
    let seed = item_seed(opts.seed, &d.id);
    let frequent = if opts.frequent {
        stats
            .group(d.qtype, d.kind)
            .and_then(|g| gen_frequent_distractor(g, &[d.answer.as_str()]).ok())
    } else {
        None
    };
    let compositional = d
        .compositional
        .iter()
        .find(|c| **c != d.answer && Some(*c) != frequent.as_ref())
        .cloned();
    let mut chosen: Vec<(String, Provenance)> = Vec::with_capacity(3);
    if let Some(c) = compositional {
        chosen.push((c, Provenance::Compositional));
    }
    if let Some(f) = frequent {
        chosen.push((f, Provenance::Frequent));
    }
    let mut k = 0;
    while chosen.len() < 3 {
        let mut exclude: Vec<&str> = chosen.iter().map(|(s, _)| s.as_str()).collect();
        exclude.push(&d.answer);
        let r = gen_random_distractor(
            index,
            &d.base_id,
            d.kind,
            d.qtype.tense(),
            &exclude,
            voc,
            derive(seed, &alloc::format!("random/{k}")),
        )?;
        chosen.push((r, Provenance::Random));
        k += 1;
    }
    let mut it = chosen.into_iter();
    let mut next = || it.next().expect("three distractors");
    let distractors = [next(), next(), next()];
    let parts = QuestionParts {
        id: d.id,
        situation_id: d.situation_id,
        qtype: d.qtype,
        question_text: d.question_text,
        program: d.program,
        template_id: d.template_id,
    };
    assemble_qa(parts, d.answer, distractors, seed)
}

/// Both passes, sequentially, over ground-truth (already propagated) graphs.
pub fn generate_corpus(
    graphs: &[SituationHypergraph],
    templates: &[QuestionTemplate],
    voc: &Vocabulary,
    opts: GenOptions,
) -> Corpus {
    let outputs = graphs
        .iter()
        .map(|h| generate_situation(h, templates, voc, opts.seed))
        .collect();
    finalize(outputs, &FactIndex::new(graphs), voc, opts)
}
