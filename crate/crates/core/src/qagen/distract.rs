use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};

use super::language::{noun_phrase, render_action};
use super::{AnswerKind, Fact, Provenance, QAError, QAItem, QuestionType, Split, Tense};
use crate::hypergraph::{node_kind, NodeKind, SituationHypergraph};
use crate::ontology::Vocabulary;
use crate::program::{FunctionalProgram, Op};
use crate::rng::{derive, Rng};

/// Action predicates that occur in each situation of a corpus, keyed by
/// situation id.
#[derive(Clone, Debug, Default)]
pub struct FactIndex {
    situations: Vec<(String, Vec<(String, String)>)>,
}

impl FactIndex {
    pub fn new<'a>(graphs: impl IntoIterator<Item = &'a SituationHypergraph>) -> Self {
        let mut situations: Vec<(String, Vec<(String, String)>)> = graphs
            .into_iter()
            .map(|h| {
                let facts: BTreeSet<(String, String)> =
                    h.actions.iter().map(|a| (a.verb.clone(), a.object.clone())).collect();
                (h.id.clone(), facts.into_iter().collect())
            })
            .collect();
        situations.sort_by(|a, b| a.0.cmp(&b.0));
        situations.dedup_by(|a, b| a.0 == b.0);
        Self { situations }
    }

    pub fn len(&self) -> usize {
        self.situations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.situations.is_empty()
    }

    pub fn facts_of(&self, situation_id: &str) -> Option<&[(String, String)]> {
        self.situations
            .binary_search_by(|s| s.0.as_str().cmp(situation_id))
            .ok()
            .map(|i| self.situations[i].1.as_slice())
    }
}

fn render(voc: &Vocabulary, kind: AnswerKind, fact: &(String, String), tense: Tense) -> String {
    match kind {
        AnswerKind::Action => render_action(voc, &fact.0, &fact.1, tense),
        AnswerKind::Object => noun_phrase(voc, &fact.1),
    }
}

/// A fact from a situation other than `situation_id`, rendered like the
/// answer and different from everything in `exclude`.
pub fn gen_random_distractor(
    index: &FactIndex,
    situation_id: &str,
    kind: AnswerKind,
    tense: Tense,
    exclude: &[&str],
    voc: &Vocabulary,
    seed: u64,
) -> Result<String, QAError> {
    let others: Vec<&(String, Vec<(String, String)>)> = index
        .situations
        .iter()
        .filter(|(id, facts)| id != situation_id && !facts.is_empty())
        .collect();
    if others.is_empty() {
        return Err(QAError::Exhausted);
    }
    let mut rng = Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let (_, facts) = others[rng.gen_range(0..others.len())];
        let option = render(voc, kind, &facts[rng.gen_range(0..facts.len())], tense);
        if !exclude.contains(&option.as_str()) {
            return Ok(option);
        }
    }
    let offset = rng.gen_range(0..others.len());
    for k in 0..others.len() {
        for fact in &others[(offset + k) % others.len()].1 {
            let option = render(voc, kind, fact, tense);
            if !exclude.contains(&option.as_str()) {
                return Ok(option);
            }
        }
    }
    Err(QAError::Exhausted)
}

/// Verb of the first `Filter_Actions_by_Verb` met breadth-first from the root.
fn focus_verb(p: &FunctionalProgram) -> Option<&str> {
    let mut queue: VecDeque<_> = p.root.iter().collect();
    while let Some(n) = queue.pop_front() {
        if n.op == Op::FilterActionsByVerb {
            return n.args[0].as_ident();
        }
        queue.extend(n.children.iter());
    }
    None
}

/// Wrong options recombined from verbs and objects of `h`, best first.
///
/// Action answers `(v, o)`: unseen `(v, o')`, then unseen `(v', o)`, then
/// other unseen recombinations, then actions that happened but are not the
/// answer. Object answers: objects legal with the question's verb that it
/// was not applied to, then ones it was applied to, then any other acted-on
/// object. Every candidate is a legal composition built from a verb and an
/// object that occur in `h`. Order within a tier comes from `seed`.
pub fn compositional_candidates(
    h: &SituationHypergraph,
    p: &FunctionalProgram,
    answer: &Fact,
    tense: Tense,
    voc: &Vocabulary,
    seed: u64,
) -> Vec<String> {
    let happened: BTreeSet<(&str, &str)> = h.actions.iter().map(|a| (a.verb.as_str(), a.object.as_str())).collect();
    let verbs: BTreeSet<&str> = h.actions.iter().map(|a| a.verb.as_str()).collect();
    let objects: BTreeSet<&str> = h
        .frames
        .iter()
        .flat_map(|f| f.nodes.iter())
        .filter(|n| node_kind(n) == NodeKind::Object)
        .map(|n| crate::hypergraph::node_class(n))
        .filter(|c| voc.is_object(c))
        .collect();
    let mut tiers: Vec<Vec<String>> = alloc::vec![Vec::new(); 4];
    match answer {
        Fact::Action { verb, object } => {
            let (v, o) = (verb.as_str(), object.as_str());
            for &v2 in &verbs {
                for &o2 in &objects {
                    if (v2, o2) == (v, o) || !voc.validate_composition(v2, o2) {
                        continue;
                    }
                    let tier = if happened.contains(&(v2, o2)) {
                        3
                    } else if v2 == v {
                        0
                    } else if o2 == o {
                        1
                    } else {
                        2
                    };
                    tiers[tier].push(render_action(voc, v2, o2, tense));
                }
            }
        }
        Fact::Object(o) => {
            let verb = focus_verb(p);
            let acted: BTreeSet<&str> = h.actions.iter().map(|a| a.object.as_str()).collect();
            for &o2 in &objects {
                if o2 == o {
                    continue;
                }
                let tier = match verb {
                    Some(v) if voc.validate_composition(v, o2) => {
                        if happened.contains(&(v, o2)) {
                            1
                        } else {
                            0
                        }
                    }
                    _ if acted.contains(o2) => 2,
                    _ => continue,
                };
                tiers[tier].push(noun_phrase(voc, o2));
            }
        }
    }
    let mut rng = Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for mut tier in tiers {
        tier.sort();
        tier.dedup();
        tier.shuffle(&mut rng);
        for s in tier {
            if seen.insert(s.clone()) {
                out.push(s);
            }
        }
    }
    out
}

pub fn gen_compositional_distractor(
    h: &SituationHypergraph,
    p: &FunctionalProgram,
    answer: &Fact,
    tense: Tense,
    voc: &Vocabulary,
    seed: u64,
) -> Result<String, QAError> {
    compositional_candidates(h, p, answer, tense, voc, seed)
        .into_iter()
        .next()
        .ok_or(QAError::NoCandidate)
}

/// Most frequent answer of a question group outside `exclude`; ties go to the
/// lexicographically smallest option.
pub fn gen_frequent_distractor(stats: &BTreeMap<String, usize>, exclude: &[&str]) -> Result<String, QAError> {
    if stats.is_empty() {
        return Err(QAError::EmptyStats);
    }
    stats
        .iter()
        .filter(|(s, _)| !exclude.contains(&s.as_str()))
        .min_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)))
        .map(|(s, _)| s.clone())
        .ok_or(QAError::NoCandidate)
}

/// Everything of a [`QAItem`] except its options.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuestionParts {
    pub id: String,
    pub situation_id: String,
    pub qtype: QuestionType,
    pub question_text: String,
    pub program: FunctionalProgram,
    pub template_id: String,
}

/// Shuffle the answer and three distractors into a question.
pub fn assemble_qa(
    parts: QuestionParts,
    answer: String,
    distractors: [(String, Provenance); 3],
    seed: u64,
) -> Result<QAItem, QAError> {
    let mut options: Vec<(String, Provenance)> = Vec::with_capacity(4);
    options.push((answer, Provenance::Answer));
    options.extend(distractors);
    for i in 0..options.len() {
        for j in i + 1..options.len() {
            if options[i].0 == options[j].0 {
                return Err(QAError::DuplicateOption(options[i].0.clone()));
            }
        }
    }
    let mut rng = Rng::seed_from_u64(derive(seed, "order"));
    options.shuffle(&mut rng);
    let correct_index = options
        .iter()
        .position(|(_, p)| *p == Provenance::Answer)
        .expect("answer present");
    let mut it = options.into_iter();
    let mut next = || it.next().expect("four options");
    let [a, b, c, d] = [next(), next(), next(), next()];
    Ok(QAItem {
        id: parts.id,
        situation_id: parts.situation_id,
        qtype: parts.qtype,
        question_text: parts.question_text,
        options: [a.0, b.0, c.0, d.0],
        correct_index,
        program: parts.program,
        provenance: [a.1, b.1, c.1, d.1],
        template_id: parts.template_id,
        split: None::<Split>,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{build_hypergraph, FrameSubgraph, Interval, RawAction};
    use crate::program::parse_program;
    use crate::testutil::vocab;
    use alloc::string::ToString;
    use alloc::vec;

    fn two_facts() -> SituationHypergraph {
        build_hypergraph(
            "s1",
            Interval::new(0, 20),
            vec![
                FrameSubgraph::new(0).with_triplet("person", "holding", "cup"),
                FrameSubgraph::new(10).with_triplet("person", "holding", "book"),
                FrameSubgraph::new(20).with_node("book"),
            ],
            vec![
                RawAction::new("a0", "take", "cup", 0, 5),
                RawAction::new("a1", "put_down", "book", 10, 20),
            ],
            &vocab(),
        )
        .unwrap()
    }

    fn parts() -> QuestionParts {
        QuestionParts {
            id: "q".into(),
            situation_id: "s".into(),
            qtype: QuestionType::Interaction,
            question_text: "What did the person do with the cup?".into(),
            program: parse_program("Filter_Actions_by_Object(AllActions, cup)").unwrap(),
            template_id: "int_obj_action".into(),
        }
    }

    #[test]
    fn compositional_same_verb_first() {
        let h = two_facts();
        let p = parse_program("Filter_Actions_by_Object(AllActions, cup)").unwrap();
        let voc = vocab();
        let answer = Fact::action("take", "cup");
        let d = gen_compositional_distractor(&h, &p, &answer, Tense::Past, &voc, 1).unwrap();
        assert_eq!(d, "took the book");
        // Brute force: every candidate is legal, built from situation parts,
        // and never the answer.
        for c in compositional_candidates(&h, &p, &answer, Tense::Past, &voc, 9) {
            assert_ne!(c, "took the cup");
            let ok = voc.action_predicates().iter().any(|(v, o)| {
                render_action(&voc, v, o, Tense::Past) == c
                    && h.actions.iter().any(|a| &a.verb == v)
                    && h.frames.iter().any(|f| f.has_class(o))
            });
            assert!(ok, "{c}");
        }
    }

    #[test]
    fn single_fact_has_no_candidate() {
        let h = build_hypergraph(
            "s",
            Interval::new(0, 0),
            vec![FrameSubgraph::new(0).with_triplet("person", "holding", "cup")],
            vec![RawAction::new("a0", "take", "cup", 0, 0)],
            &vocab(),
        )
        .unwrap();
        let p = parse_program("Filter_Actions_by_Object(AllActions, cup)").unwrap();
        assert_eq!(
            gen_compositional_distractor(&h, &p, &Fact::action("take", "cup"), Tense::Past, &vocab(), 0),
            Err(QAError::NoCandidate)
        );
    }

    #[test]
    fn random_comes_from_another_situation() {
        let voc = vocab();
        let other = build_hypergraph(
            "s2",
            Interval::new(0, 0),
            vec![FrameSubgraph::new(0).with_triplet("person", "touching", "door")],
            vec![RawAction::new("b0", "open", "door", 0, 0)],
            &voc,
        )
        .unwrap();
        let index = FactIndex::new([&two_facts(), &other]);
        for seed in 0..20 {
            let d = gen_random_distractor(&index, "s1", AnswerKind::Action, Tense::Past, &["took the cup"], &voc, seed).unwrap();
            assert_eq!(d, "opened the door");
        }
        let a = gen_random_distractor(&index, "s2", AnswerKind::Action, Tense::Base, &[], &voc, 5).unwrap();
        let b = gen_random_distractor(&index, "s2", AnswerKind::Action, Tense::Base, &[], &voc, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            gen_random_distractor(&index, "s2", AnswerKind::Action, Tense::Base, &["take the cup", "put down the book"], &voc, 5),
            Err(QAError::Exhausted)
        );
    }

    #[test]
    fn frequent_argmax_with_exclusion() {
        let stats: BTreeMap<String, usize> = [("A", 10), ("B", 7)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        assert_eq!(gen_frequent_distractor(&stats, &["C"]).unwrap(), "A");
        assert_eq!(gen_frequent_distractor(&stats, &["A"]).unwrap(), "B");
        let tie: BTreeMap<String, usize> = [("B", 3), ("A", 3)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        assert_eq!(gen_frequent_distractor(&tie, &[]).unwrap(), "A");
        assert_eq!(gen_frequent_distractor(&BTreeMap::new(), &[]), Err(QAError::EmptyStats));
    }

    #[test]
    fn assembly_is_seeded_and_checked() {
        let d = || {
            [
                ("b".to_string(), Provenance::Compositional),
                ("c".to_string(), Provenance::Random),
                ("d".to_string(), Provenance::Frequent),
            ]
        };
        let x = assemble_qa(parts(), "a".into(), d(), 3).unwrap();
        assert_eq!(x, assemble_qa(parts(), "a".into(), d(), 3).unwrap());
        assert_eq!(x.answer(), "a");
        assert_eq!(x.provenance[x.correct_index], Provenance::Answer);
        let dup = [
            ("b".to_string(), Provenance::Compositional),
            ("b".to_string(), Provenance::Random),
            ("d".to_string(), Provenance::Frequent),
        ];
        assert_eq!(assemble_qa(parts(), "a".into(), dup, 3), Err(QAError::DuplicateOption("b".into())));
    }

    #[test]
    fn correct_index_is_uniform() {
        let mut counts = [0usize; 4];
        for seed in 0..10_000u64 {
            let item = assemble_qa(
                parts(),
                "a".into(),
                [
                    ("b".to_string(), Provenance::Compositional),
                    ("c".to_string(), Provenance::Random),
                    ("d".to_string(), Provenance::Frequent),
                ],
                seed,
            )
            .unwrap();
            counts[item.correct_index] += 1;
        }
        for c in counts {
            let share = c as f64 / 10_000.0;
            assert!((share - 0.25).abs() <= 0.02, "{counts:?}");
        }
    }
}
