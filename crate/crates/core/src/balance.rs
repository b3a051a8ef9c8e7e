//! Answer-distribution measurement, compositionality filtering,
//! down-sampling and option-frequency control.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::ontology::Vocabulary;
use crate::program::typecheck;
use crate::qagen::{AnswerKind, Fact, Phrasebook, Provenance, QAItem, QuestionType};
use crate::rng::{derive, Rng};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    #[default]
    QuestionType,
    Template,
}

impl GroupBy {
    pub fn key(self, item: &QAItem) -> String {
        match self {
            GroupBy::QuestionType => item.qtype.name().to_string(),
            GroupBy::Template => item.template_id.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Flow {
    pub source: String,
    pub target: String,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub group: String,
    pub size: usize,
    /// Answer count for every option content seen in the group, zero for
    /// contents that only ever appear as distractors.
    pub histogram: BTreeMap<String, usize>,
    /// Chi-square against uniform over the histogram, divided by its
    /// maximum `N (k - 1)`: 0 is uniform, 1 is a single answer.
    pub uniformity: f64,
    /// Largest `|share - 1/k| / (1/k)` over the `k` answers that occur.
    pub max_deviation: f64,
    pub flows: Vec<Flow>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BalanceError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("tolerance {0} outside (0, 1]")]
    InvalidTolerance(f64),
}

fn groups(corpus: &[QAItem], by: GroupBy) -> BTreeMap<String, Vec<usize>> {
    let mut out: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, item) in corpus.iter().enumerate() {
        out.entry(by.key(item)).or_default().push(i);
    }
    out
}

/// Relative deviation of `count` from the mean share of `k` classes in a
/// group of `total` items.
fn deviation(count: usize, k: usize, total: usize) -> f64 {
    (count as f64 * k as f64 / total as f64 - 1.0).abs()
}

pub fn max_deviation(histogram: &BTreeMap<String, usize>) -> f64 {
    let present: Vec<usize> = histogram.values().copied().filter(|&c| c > 0).collect();
    let total: usize = present.iter().sum();
    present
        .iter()
        .map(|&c| deviation(c, present.len(), total))
        .fold(0.0, f64::max)
}

fn uniformity(histogram: &BTreeMap<String, usize>) -> f64 {
    let k = histogram.len();
    let n: usize = histogram.values().sum();
    if k < 2 || n == 0 {
        return 0.0;
    }
    let expected = n as f64 / k as f64;
    let chi2: f64 = histogram
        .values()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    chi2 / (n as f64 * (k as f64 - 1.0))
}

/// Verb and object ids a question mentions, and those of its answer.
fn components(item: &QAItem, voc: &Vocabulary, book: &Phrasebook) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut question = BTreeSet::new();
    if let Some(root) = &item.program.root {
        root.walk(&mut |n| {
            for a in &n.args {
                if let Some(id) = a.as_ident().filter(|id| voc.is_verb(id) || voc.is_object(id)) {
                    question.insert(id.to_string());
                }
            }
        });
    }
    let mut answer = BTreeSet::new();
    match book.parse(item.answer(), item.qtype.tense()) {
        Some(Fact::Action { verb, object }) => {
            answer.insert(verb.clone());
            answer.insert(object.clone());
        }
        Some(Fact::Object(o)) => {
            answer.insert(o.clone());
        }
        None => {}
    }
    (question, answer)
}

/// Question-component to answer-component co-occurrence counts.
pub fn cooccurrence_flows(corpus: &[QAItem], voc: &Vocabulary) -> Vec<Flow> {
    let book = Phrasebook::new(voc);
    let mut table: BTreeMap<(String, String), usize> = BTreeMap::new();
    for item in corpus {
        let (q, a) = components(item, voc, &book);
        for s in &q {
            for t in &a {
                *table.entry((s.clone(), t.clone())).or_default() += 1;
            }
        }
    }
    table
        .into_iter()
        .map(|((source, target), count)| Flow { source, target, count })
        .collect()
}

/// Share of the single largest flow in the table.
pub fn max_flow_share(flows: &[Flow]) -> f64 {
    let total: usize = flows.iter().map(|f| f.count).sum();
    if total == 0 {
        return 0.0;
    }
    flows.iter().map(|f| f.count).max().unwrap_or(0) as f64 / total as f64
}

pub fn compute_distribution(corpus: &[QAItem], by: GroupBy, voc: &Vocabulary) -> Result<Vec<DistributionReport>, BalanceError> {
    if corpus.is_empty() {
        return Err(BalanceError::EmptyCorpus);
    }
    let mut out = Vec::new();
    for (group, idx) in groups(corpus, by) {
        let mut histogram: BTreeMap<String, usize> = BTreeMap::new();
        for &i in &idx {
            for o in &corpus[i].options {
                histogram.entry(o.clone()).or_default();
            }
            *histogram.entry(corpus[i].answer().to_string()).or_default() += 1;
        }
        let members: Vec<QAItem> = idx.iter().map(|&i| corpus[i].clone()).collect();
        out.push(DistributionReport {
            group,
            size: idx.len(),
            uniformity: uniformity(&histogram),
            max_deviation: max_deviation(&histogram),
            flows: cooccurrence_flows(&members, voc),
            histogram,
        });
    }
    Ok(out)
}

/// Keep items whose verbs each compose with at least `min_compositions`
/// objects and whose objects each compose with at least that many verbs.
pub fn filter_compositionality(corpus: &[QAItem], voc: &Vocabulary, min_compositions: usize) -> Vec<QAItem> {
    let book = Phrasebook::new(voc);
    corpus
        .iter()
        .filter(|item| {
            let (q, a) = components(item, voc, &book);
            q.iter().chain(a.iter()).all(|id| {
                let n = if voc.is_verb(id) {
                    voc.compositions_of(id).map_or(0, |s| s.len())
                } else {
                    voc.verbs_of(id).len()
                };
                n >= min_compositions
            })
        })
        .cloned()
        .collect()
}

/// Per-class target counts for one group. Classes are kept from the most
/// frequent down and every kept class is capped at some `m`. The plan
/// maximizes `total * (1 - 1/j)` over `j` kept classes: the number of
/// retained items a guesser that always names one answer gets wrong.
fn plan_counts(counts: &[(String, usize)], tolerance: f64) -> BTreeMap<String, usize> {
    let mut sorted: Vec<&(String, usize)> = counts.iter().collect();
    sorted.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if sorted.len() < 2 {
        return sorted.iter().map(|(s, c)| (s.clone(), *c)).collect();
    }
    // (total, classes, cap)
    let mut best: (usize, usize, usize) = (0, 0, 0);
    let score = |(total, j, _): (usize, usize, usize)| (total as u128) * (j.saturating_sub(1) as u128);
    let better = |a: (usize, usize, usize), b: (usize, usize, usize)| {
        // a.total (a.j - 1) / a.j  >  b.total (b.j - 1) / b.j
        let (l, r) = (score(a) * b.1.max(1) as u128, score(b) * a.1.max(1) as u128);
        l > r || (l == r && a.0 > b.0)
    };
    for j in 2..=sorted.len() {
        let floor = sorted[j - 1].1;
        let top = sorted[0].1;
        for m in floor..=top {
            let kept: Vec<usize> = sorted[..j].iter().map(|(_, c)| (*c).min(m)).collect();
            let total: usize = kept.iter().sum();
            if kept.iter().all(|&n| deviation(n, j, total) <= tolerance) && better((total, j, m), best) {
                best = (total, j, m);
            }
        }
    }
    let (_, j, m) = best;
    sorted[..j].iter().map(|(s, c)| (s.clone(), (*c).min(m))).collect()
}

/// Interned question-to-answer component pairs of every item.
fn flow_keys(corpus: &[QAItem], voc: &Vocabulary) -> (Vec<Vec<usize>>, usize) {
    let book = Phrasebook::new(voc);
    let mut ids: BTreeMap<(String, String), usize> = BTreeMap::new();
    let keys = corpus
        .iter()
        .map(|item| {
            let (q, a) = components(item, voc, &book);
            let mut out = Vec::with_capacity(q.len() * a.len());
            for s in &q {
                for t in &a {
                    let next = ids.len();
                    out.push(*ids.entry((s.clone(), t.clone())).or_insert(next));
                }
            }
            out
        })
        .collect();
    (keys, ids.len())
}

/// Pick `n` of `members`, each time the one whose busiest flow is least
/// loaded so far, earlier members (in the seeded order) winning ties.
fn pick_spread(members: &[usize], n: usize, keys: &[Vec<usize>], load: &mut [usize]) -> Vec<usize> {
    let mut left: Vec<usize> = members.to_vec();
    let mut chosen = Vec::with_capacity(n);
    let cost = |i: usize, load: &[usize]| {
        let ks = &keys[i];
        (ks.iter().map(|k| load[*k]).max().unwrap_or(0), ks.iter().map(|k| load[*k]).sum::<usize>())
    };
    while chosen.len() < n && !left.is_empty() {
        let (pos, _) = left
            .iter()
            .enumerate()
            .min_by_key(|(pos, i)| (cost(**i, load), *pos))
            .expect("non-empty");
        let i = left.remove(pos);
        for k in &keys[i] {
            load[*k] += 1;
        }
        chosen.push(i);
    }
    chosen
}

/// Down-sample so that, within each group, every answer's share is within
/// `tolerance` (relative) of the mean share. Answers are kept from the most
/// frequent down, as many as maximize the retained items a constant guess
/// would get wrong. Within an answer, items are chosen so that
/// question-to-answer co-occurrences spread out. Retained items keep their
/// order and content.
pub fn resample_balance(
    corpus: &[QAItem],
    tolerance: f64,
    seed: u64,
    by: GroupBy,
    voc: &Vocabulary,
) -> Result<Vec<QAItem>, BalanceError> {
    if !(tolerance > 0.0 && tolerance <= 1.0) {
        return Err(BalanceError::InvalidTolerance(tolerance));
    }
    let (keys, n_keys) = flow_keys(corpus, voc);
    let mut load = alloc::vec![0usize; n_keys];
    let mut keep = alloc::vec![false; corpus.len()];
    let mut partial: Vec<(String, Vec<usize>, usize)> = Vec::new();
    for (group, idx) in groups(corpus, by) {
        let mut by_answer: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for &i in &idx {
            by_answer.entry(corpus[i].answer()).or_default().push(i);
        }
        let counts: Vec<(String, usize)> = by_answer.iter().map(|(a, v)| (a.to_string(), v.len())).collect();
        let targets = plan_counts(&counts, tolerance);
        for (answer, members) in by_answer {
            let Some(&n) = targets.get(answer) else { continue };
            if n < members.len() {
                partial.push((alloc::format!("balance/{group}/{answer}"), members, n));
                continue;
            }
            for i in members {
                keep[i] = true;
                for k in &keys[i] {
                    load[*k] += 1;
                }
            }
        }
    }
    for (label, mut members, n) in partial {
        members.shuffle(&mut Rng::seed_from_u64(derive(seed, &label)));
        for i in pick_spread(&members, n, &keys, &mut load) {
            keep[i] = true;
        }
    }
    Ok(corpus
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(item, _)| item.clone())
        .collect())
}

type OptionGroup = (QuestionType, Option<AnswerKind>);

fn option_group(item: &QAItem) -> OptionGroup {
    (item.qtype, typecheck(&item.program).ok().and_then(AnswerKind::of))
}

/// Redraw the frequent and random options of `corpus` from its own answers,
/// so that every option string is one that is sometimes correct. The
/// frequent option becomes the most common answer of the item's group
/// (question type and answer kind) that is not already an option; random
/// options are answers of items from other situations in the same group.
/// Answers, compositional options, option positions and provenance are kept;
/// an option is left as is when no replacement exists.
pub fn redraw_options(corpus: &[QAItem], seed: u64) -> Vec<QAItem> {
    let mut members: BTreeMap<OptionGroup, Vec<usize>> = BTreeMap::new();
    for (i, item) in corpus.iter().enumerate() {
        members.entry(option_group(item)).or_default().push(i);
    }
    let mut ranked: BTreeMap<OptionGroup, Vec<(&str, usize)>> = BTreeMap::new();
    for (g, idx) in &members {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for &i in idx {
            *counts.entry(corpus[i].answer()).or_default() += 1;
        }
        let mut r: Vec<(&str, usize)> = counts.into_iter().collect();
        r.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.insert(*g, r);
    }

    let mut out = corpus.to_vec();
    for (g, idx) in &members {
        for &i in idx {
            let item = &corpus[i];
            let mut rng = Rng::seed_from_u64(derive(seed, &alloc::format!("options/{}", item.id)));
            let mut options = item.options.clone();
            let mut taken: Vec<&str> = item
                .options
                .iter()
                .zip(item.provenance)
                .filter(|(_, p)| matches!(p, Provenance::Answer | Provenance::Compositional))
                .map(|(o, _)| o.as_str())
                .collect();
            let frequent_first = (0..4)
                .filter(|k| item.provenance[*k] == Provenance::Frequent)
                .chain((0..4).filter(|k| item.provenance[*k] != Provenance::Frequent));
            for k in frequent_first {
                let fresh = match item.provenance[k] {
                    Provenance::Frequent => ranked[g].iter().map(|(a, _)| *a).find(|a| !taken.contains(a)),
                    Provenance::Random => {
                        let base = item.base_situation_id();
                        let usable =
                            |j: &usize| corpus[*j].base_situation_id() != base && !taken.contains(&corpus[*j].answer());
                        (0..64)
                            .map(|_| idx[rng.gen_range(0..idx.len())])
                            .find(|j| usable(j))
                            .or_else(|| idx.iter().copied().find(|j| usable(j)))
                            .map(|j| corpus[j].answer())
                    }
                    Provenance::Answer | Provenance::Compositional => continue,
                };
                let chosen = fresh.unwrap_or(item.options[k].as_str());
                options[k] = chosen.to_string();
                taken.push(chosen);
            }
            let distinct: BTreeSet<&String> = options.iter().collect();
            if distinct.len() == 4 {
                out[i].options = options;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;
    use crate::qagen::{Provenance, QuestionType};
    use crate::testutil::vocab;
    use alloc::vec;

    fn item(id: usize, qtype: QuestionType, answer: &str, others: [&str; 3]) -> QAItem {
        QAItem {
            id: alloc::format!("q{id}"),
            situation_id: "s".into(),
            qtype,
            question_text: "What did the person do with the cup?".into(),
            options: [answer.into(), others[0].into(), others[1].into(), others[2].into()],
            correct_index: 0,
            program: parse_program("Filter_Actions_by_Object(AllActions, cup)").unwrap(),
            provenance: [Provenance::Answer, Provenance::Compositional, Provenance::Random, Provenance::Frequent],
            template_id: "int_obj_action".into(),
            split: None,
        }
    }

    const POOL: [&str; 4] = ["took the cup", "took the book", "washed the cup", "held the cup"];

    fn with_answer(id: usize, qtype: QuestionType, k: usize) -> QAItem {
        let mut others = POOL.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, s)| *s);
        item(id, qtype, POOL[k], [others.next().unwrap(), others.next().unwrap(), others.next().unwrap()])
    }

    #[test]
    fn uniform_group() {
        let corpus: Vec<QAItem> = (0..4).map(|k| with_answer(k, QuestionType::Interaction, k)).collect();
        let r = compute_distribution(&corpus, GroupBy::Template, &vocab()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].uniformity, 0.0);
        assert!(r[0].histogram.values().all(|&c| c == 1));
        assert_eq!(r[0].histogram.values().sum::<usize>(), r[0].size);
    }

    #[test]
    fn single_answer_is_maximal() {
        let corpus: Vec<QAItem> = (0..50).map(|i| with_answer(i, QuestionType::Interaction, 0)).collect();
        let r = compute_distribution(&corpus, GroupBy::QuestionType, &vocab()).unwrap();
        assert!((r[0].uniformity - 1.0).abs() < 1e-12);
        assert_eq!(compute_distribution(&[], GroupBy::QuestionType, &vocab()), Err(BalanceError::EmptyCorpus));
    }

    #[test]
    fn recount_matches() {
        let corpus: Vec<QAItem> = (0..40).map(|i| with_answer(i, QuestionType::Sequence, (i * 7 + i / 3) % 4)).collect();
        let r = compute_distribution(&corpus, GroupBy::QuestionType, &vocab()).unwrap();
        let mut tally: BTreeMap<String, usize> = POOL.iter().map(|s| (s.to_string(), 0)).collect();
        for it in &corpus {
            *tally.get_mut(it.answer()).unwrap() += 1;
        }
        assert_eq!(r[0].histogram, tally);
    }

    #[test]
    fn ninety_ten_is_rebalanced() {
        let corpus: Vec<QAItem> = (0..100)
            .map(|i| with_answer(i, QuestionType::Interaction, usize::from(i >= 90)))
            .collect();
        let out = resample_balance(&corpus, 0.1, 7, GroupBy::QuestionType, &vocab()).unwrap();
        let majority = out.iter().filter(|i| i.answer() == POOL[0]).count();
        let minority = out.iter().filter(|i| i.answer() == POOL[1]).count();
        assert_eq!(minority, 10);
        // Relative bound with k = 2: |2 n / N - 1| <= 0.1.
        let total = (majority + minority) as f64;
        assert!((2.0 * majority as f64 / total - 1.0).abs() <= 0.1);
        assert!(majority > 10);
        let r = compute_distribution(&out, GroupBy::QuestionType, &vocab()).unwrap();
        assert!(r[0].max_deviation <= 0.1);
        // Subset, order kept, byte-identical.
        let mut it = corpus.iter();
        for kept in &out {
            assert!(it.any(|c| c == kept));
        }
        assert_eq!(out, resample_balance(&corpus, 0.1, 7, GroupBy::QuestionType, &vocab()).unwrap());
    }

    #[test]
    fn uniform_corpus_unchanged() {
        let corpus: Vec<QAItem> = (0..40).map(|i| with_answer(i, QuestionType::Interaction, i % 4)).collect();
        assert_eq!(resample_balance(&corpus, 0.05, 1, GroupBy::QuestionType, &vocab()).unwrap(), corpus);
        assert!(matches!(
            resample_balance(&corpus, 0.0, 1, GroupBy::QuestionType, &vocab()),
            Err(BalanceError::InvalidTolerance(_))
        ));
    }

    #[test]
    fn compositionality_threshold() {
        let voc = vocab();
        // `grasp` composes only with `doorknob`.
        let mut grasp = with_answer(0, QuestionType::Interaction, 0);
        grasp.options[0] = "grasped the doorknob".into();
        let keep = with_answer(1, QuestionType::Interaction, 0);
        let corpus = vec![grasp, keep.clone()];
        assert_eq!(filter_compositionality(&corpus, &voc, 1), corpus);
        let once = filter_compositionality(&corpus, &voc, 2);
        assert_eq!(once, vec![keep]);
        assert_eq!(filter_compositionality(&once, &voc, 2), once);
    }

    #[test]
    fn redrawn_options_are_answers() {
        let mut corpus: Vec<QAItem> = (0..40).map(|i| with_answer(i, QuestionType::Interaction, i % 3)).collect();
        for (i, it) in corpus.iter_mut().enumerate() {
            it.situation_id = alloc::format!("s{}", i % 10);
            it.options[2] = alloc::format!("never answered {i}");
        }
        let out = redraw_options(&corpus, 4);
        let answers: BTreeSet<&str> = corpus.iter().map(QAItem::answer).collect();
        for (before, after) in corpus.iter().zip(&out) {
            assert_eq!(after.answer(), before.answer());
            assert_eq!(after.options[1], before.options[1]);
            assert_eq!(after.provenance, before.provenance);
            assert_eq!(after.options.iter().collect::<BTreeSet<_>>().len(), 4);
            // Slot 2 is random, slot 3 frequent.
            assert!(answers.contains(after.options[3].as_str()));
            if answers.contains(after.options[2].as_str()) {
                assert!(corpus
                    .iter()
                    .any(|o| o.answer() == after.options[2] && o.situation_id != before.situation_id));
            }
        }
        assert_eq!(out, redraw_options(&corpus, 4));
    }

    #[test]
    fn flows() {
        let voc = vocab();
        assert!(cooccurrence_flows(&[], &voc).is_empty());
        let corpus: Vec<QAItem> = (0..5).map(|i| with_answer(i, QuestionType::Interaction, 1)).collect();
        let flows = cooccurrence_flows(&corpus, &voc);
        // Question mentions `cup`; answer is (take, book).
        assert_eq!(flows.len(), 2);
        assert!(flows.iter().all(|f| f.source == "cup" && f.count == 5));
        assert_eq!(max_flow_share(&flows), 0.5);
    }
}
