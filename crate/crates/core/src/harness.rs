//! Splits, baselines, a brute-force reference answerer, graph degradation
//! and scoring.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::hypergraph::{node_class, node_kind, Frame, NodeKind, SituationHypergraph};
use crate::ontology::Vocabulary;
use crate::program::{execute, parse_program, typecheck, ExecValue, FunctionalProgram, Literal, ProgramNode};
use crate::qagen::{noun_phrase, render_action, AnswerKind, QAItem, QuestionType, Split, Tense};
use crate::rng::{derive, Rng};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("{situations} situation(s) cannot fill three non-empty splits")]
    TooFewSituations { situations: usize },
    #[error("split ratios must be non-negative with a positive sum")]
    BadRatios,
    #[error("no prediction for item `{0}`")]
    MissingPrediction(String),
    #[error("prediction {index} for item `{id}` is not an option index")]
    BadPrediction { id: String, index: usize },
    #[error("noise probability {0} outside [0, 1]")]
    BadNoise(f64),
}

/// Assign every item to train, val or test by its base situation, so no
/// situation contributes to two splits.
pub fn split_dataset(corpus: &[QAItem], ratios: [f64; 3], seed: u64) -> Result<Vec<QAItem>, HarnessError> {
    let sum: f64 = ratios.iter().sum();
    if ratios.iter().any(|r| r.is_nan() || *r < 0.0) || sum.is_nan() || sum <= 0.0 {
        return Err(HarnessError::BadRatios);
    }
    let mut situations: Vec<&str> = corpus
        .iter()
        .map(QAItem::base_situation_id)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n = situations.len();
    let train = round_half_up(n as f64 * ratios[0] / sum).min(n);
    let val = round_half_up(n as f64 * ratios[1] / sum).min(n - train);
    let test = n - train - val;
    let wanted = ratios.iter().filter(|r| **r > 0.0).count();
    let filled = [train, val, test].iter().filter(|c| **c > 0).count();
    if filled < wanted {
        return Err(HarnessError::TooFewSituations { situations: n });
    }
    situations.shuffle(&mut Rng::seed_from_u64(derive(seed, "split")));
    let assign: BTreeMap<&str, Split> = situations
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let split = if i < train {
                Split::Train
            } else if i < train + val {
                Split::Val
            } else {
                Split::Test
            };
            (*s, split)
        })
        .collect();
    Ok(corpus
        .iter()
        .map(|item| {
            let mut item = item.clone();
            item.split = Some(assign[item.base_situation_id()]);
            item
        })
        .collect())
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5) as usize
}

/// Uniform guess, reproducible per item.
pub fn baseline_random(item: &QAItem, seed: u64) -> usize {
    Rng::seed_from_u64(derive(seed, &item.id)).gen_range(0..4)
}

fn answer_kind(item: &QAItem) -> Option<AnswerKind> {
    typecheck(&item.program).ok().and_then(AnswerKind::of)
}

/// Answer frequencies per question type and answer kind.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyStats {
    pub groups: BTreeMap<String, BTreeMap<String, usize>>,
}

impl FrequencyStats {
    fn key(qtype: QuestionType, kind: Option<AnswerKind>) -> String {
        match kind {
            Some(AnswerKind::Action) => alloc::format!("{qtype}/action"),
            Some(AnswerKind::Object) => alloc::format!("{qtype}/object"),
            None => qtype.to_string(),
        }
    }

    pub fn from_items<'a>(items: impl IntoIterator<Item = &'a QAItem>) -> Self {
        let mut groups: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        for item in items {
            *groups
                .entry(Self::key(item.qtype, answer_kind(item)))
                .or_default()
                .entry(item.answer().to_string())
                .or_default() += 1;
        }
        Self { groups }
    }

    pub fn count(&self, item: &QAItem, option: &str) -> usize {
        self.groups
            .get(&Self::key(item.qtype, answer_kind(item)))
            .and_then(|g| g.get(option))
            .copied()
            .unwrap_or(0)
    }
}

/// Option seen most often as an answer in training. Ties go to the
/// lexicographically smallest option; index 0 when no option was ever seen.
pub fn baseline_frequent(item: &QAItem, stats: &FrequencyStats) -> usize {
    let mut best: Option<(usize, &str, usize)> = None;
    for (i, o) in item.options.iter().enumerate() {
        let c = stats.count(item, o);
        if c == 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((bc, bo, _)) => c > bc || (c == bc && o.as_str() < bo),
        };
        if better {
            best = Some((c, o, i));
        }
    }
    best.map_or(0, |(_, _, i)| i)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("question is unanswerable on this situation")]
    Unanswerable,
    #[error("program shape has no reference answerer")]
    UnsupportedProgram,
    #[error("{0} options are consistent with the situation")]
    Ambiguous(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    ObjectActions,
    VerbObjects,
    RelationActions,
    EarliestAfter,
    LatestBefore,
    EarliestAfterVerbObject,
    LatestBeforeVerbObject,
    EarliestAfterWithObject,
    AfterVerbObjects,
    RelationVerbObjects,
}

const ANCHOR: &str = "Filter_Actions_by_Object(Filter_Actions_by_Verb(AllActions, V), O)";
const SPATIAL: &str =
    "Relate_Actions(Filter_Relations_by_Object(Filter_Relations_by_Predicate(Relate_Triplets(AllActions), R), O))";

fn shapes() -> Vec<(Shape, FunctionalProgram)> {
    let after = alloc::format!("Temporal_After(AllActions, {ANCHOR})");
    let before = alloc::format!("Temporal_Before(AllActions, {ANCHOR})");
    let table = [
        (Shape::ObjectActions, "Filter_Actions_by_Object(AllActions, O)".to_string()),
        (Shape::VerbObjects, "Query_Objects(Filter_Actions_by_Verb(AllActions, V))".to_string()),
        (Shape::RelationActions, SPATIAL.to_string()),
        (Shape::EarliestAfter, alloc::format!("Query_Earliest({after})")),
        (Shape::LatestBefore, alloc::format!("Query_Latest({before})")),
        (
            Shape::EarliestAfterVerbObject,
            alloc::format!("Query_Objects(Query_Earliest(Filter_Actions_by_Verb({after}, V2)))"),
        ),
        (
            Shape::LatestBeforeVerbObject,
            alloc::format!("Query_Objects(Query_Latest(Filter_Actions_by_Verb({before}, V2)))"),
        ),
        (
            Shape::EarliestAfterWithObject,
            alloc::format!("Query_Earliest(Filter_Actions_by_Object({after}, O2))"),
        ),
        (Shape::AfterVerbObjects, alloc::format!("Query_Objects(Filter_Actions_by_Verb({after}, V2))")),
        (Shape::RelationVerbObjects, alloc::format!("Query_Objects(Filter_Actions_by_Verb({SPATIAL}, V))")),
    ];
    table
        .into_iter()
        .map(|(s, src)| (s, parse_program(&src).expect("shape pattern parses")))
        .collect()
}

fn is_placeholder(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

fn unify(pattern: &ProgramNode, node: &ProgramNode, bound: &mut BTreeMap<String, String>) -> bool {
    if pattern.op != node.op || pattern.children.len() != node.children.len() || pattern.args.len() != node.args.len() {
        return false;
    }
    for (p, a) in pattern.args.iter().zip(&node.args) {
        match (p, a) {
            (Literal::Ident(name), Literal::Ident(value)) if is_placeholder(name) => {
                if bound.entry(name.clone()).or_insert_with(|| value.clone()) != value {
                    return false;
                }
            }
            _ if p == a => {}
            _ => return false,
        }
    }
    pattern.children.iter().zip(&node.children).all(|(p, c)| unify(p, c, bound))
}

fn match_shape(p: &FunctionalProgram) -> Option<(Shape, BTreeMap<String, String>)> {
    let root = p.root.as_ref()?;
    shapes().into_iter().find_map(|(shape, pattern)| {
        let mut bound = BTreeMap::new();
        unify(pattern.root.as_ref()?, root, &mut bound).then_some((shape, bound))
    })
}

struct Act<'g> {
    id: &'g str,
    verb: &'g str,
    object: &'g str,
    start: Frame,
    end: Frame,
    frames: BTreeSet<Frame>,
}

/// Flat view of a situation: actions with the annotated frames inside their
/// intervals, and person-subject relations per frame.
struct World<'g> {
    acts: Vec<Act<'g>>,
    person_rels: Vec<(Frame, &'g str, &'g str)>,
}

impl<'g> World<'g> {
    fn new(h: &'g SituationHypergraph) -> Self {
        let acts = h
            .actions
            .iter()
            .map(|a| Act {
                id: &a.id,
                verb: &a.verb,
                object: &a.object,
                start: a.interval.start,
                end: a.interval.end,
                frames: h
                    .frames
                    .iter()
                    .map(|f| f.frame)
                    .filter(|f| a.interval.start <= *f && *f <= a.interval.end)
                    .collect(),
            })
            .collect();
        let person_rels = h
            .frames
            .iter()
            .flat_map(|f| f.triplets.iter())
            .filter(|t| node_kind(&t.subject) == NodeKind::Person)
            .map(|t| (t.frame, t.predicate.as_str(), t.object.as_str()))
            .collect();
        Self { acts, person_rels }
    }
}

type Picked<'w, 'g> = Vec<&'w Act<'g>>;

fn earliest<'g>(s: &[&Act<'g>]) -> Option<&'g str> {
    s.iter().min_by_key(|a| (a.start, a.end, a.id)).map(|a| a.id)
}

/// Latest start, then latest end, then smallest id.
fn latest<'g>(s: &[&Act<'g>]) -> Option<&'g str> {
    let top = s.iter().map(|a| (a.start, a.end)).max()?;
    s.iter().filter(|a| (a.start, a.end) == top).map(|a| a.id).min()
}

fn by_verb<'w, 'g>(s: Picked<'w, 'g>, v: &str) -> Result<Picked<'w, 'g>, OracleError> {
    nonempty(s.into_iter().filter(|a| a.verb == v).collect())
}

fn nonempty<T>(v: Vec<T>) -> Result<Vec<T>, OracleError> {
    if v.is_empty() {
        Err(OracleError::Unanswerable)
    } else {
        Ok(v)
    }
}

/// Brute-force answers for the program's shape, rendered as option strings.
/// Every intermediate set has to be non-empty, as in the executor.
pub fn oracle_answers(
    program: &FunctionalProgram,
    qtype: QuestionType,
    h: &SituationHypergraph,
    voc: &Vocabulary,
) -> Result<BTreeSet<String>, OracleError> {
    let (shape, b) = match_shape(program).ok_or(OracleError::UnsupportedProgram)?;
    let w = World::new(h);
    let arg = |k: &str| b.get(k).map(String::as_str).unwrap_or_default();
    let all: Picked = nonempty(w.acts.iter().collect())?;
    let tense = qtype.tense();

    let anchor = || -> Result<Picked, OracleError> {
        let by_verb = nonempty(all.iter().copied().filter(|a| a.verb == arg("V")).collect())?;
        nonempty(by_verb.into_iter().filter(|a| a.object == arg("O")).collect())
    };
    let after = |anchors: &Picked| -> Picked {
        all.iter()
            .copied()
            .filter(|c| !anchors.iter().any(|a| a.id == c.id) && anchors.iter().any(|a| c.start > a.end))
            .collect()
    };
    let before = |anchors: &Picked| -> Picked {
        all.iter()
            .copied()
            .filter(|c| !anchors.iter().any(|a| a.id == c.id) && anchors.iter().any(|a| c.end < a.start))
            .collect()
    };
    let spatial = || -> Result<Picked, OracleError> {
        let member: BTreeSet<Frame> = all.iter().flat_map(|a| a.frames.iter().copied()).collect();
        let rels: Vec<_> = nonempty(w.person_rels.iter().filter(|(f, _, _)| member.contains(f)).collect())?;
        let rels = nonempty(rels.into_iter().filter(|(_, p, _)| *p == arg("R")).collect())?;
        let rels = nonempty(rels.into_iter().filter(|(_, _, o)| node_class(o) == arg("O")).collect())?;
        let frames: BTreeSet<Frame> = rels.iter().map(|(f, _, _)| *f).collect();
        Ok(all.iter().copied().filter(|a| a.frames.iter().any(|f| frames.contains(f))).collect())
    };
    let with_id = |id: &str| all.iter().copied().filter(|a| a.id == id).collect::<Picked>();

    let actions = |s: Picked| -> BTreeSet<String> { s.iter().map(|a| render_action(voc, a.verb, a.object, tense)).collect() };
    let objects = |s: Picked| -> BTreeSet<String> { s.iter().map(|a| noun_phrase(voc, a.object)).collect() };

    Ok(match shape {
        Shape::ObjectActions => actions(all.iter().copied().filter(|a| a.object == arg("O")).collect()),
        Shape::VerbObjects => objects(by_verb(all.clone(), arg("V"))?),
        Shape::RelationActions => actions(spatial()?),
        Shape::RelationVerbObjects => objects(by_verb(nonempty(spatial()?)?, arg("V"))?),
        Shape::EarliestAfter => {
            let s = nonempty(after(&anchor()?))?;
            actions(with_id(earliest(&s).expect("non-empty")))
        }
        Shape::LatestBefore => {
            let s = nonempty(before(&anchor()?))?;
            actions(with_id(latest(&s).expect("non-empty")))
        }
        Shape::EarliestAfterVerbObject => {
            let s = by_verb(nonempty(after(&anchor()?))?, arg("V2"))?;
            objects(with_id(earliest(&s).expect("non-empty")))
        }
        Shape::LatestBeforeVerbObject => {
            let s = by_verb(nonempty(before(&anchor()?))?, arg("V2"))?;
            objects(with_id(latest(&s).expect("non-empty")))
        }
        Shape::EarliestAfterWithObject => {
            let s = nonempty(after(&anchor()?))?;
            let s = nonempty(s.into_iter().filter(|a| a.object == arg("O2")).collect())?;
            actions(with_id(earliest(&s).expect("non-empty")))
        }
        Shape::AfterVerbObjects => objects(by_verb(nonempty(after(&anchor()?))?, arg("V2"))?),
    })
}

/// Index of the single option consistent with `h`, found without the
/// executor.
pub fn brute_force_oracle(item: &QAItem, h: &SituationHypergraph, voc: &Vocabulary) -> Result<usize, OracleError> {
    let answers = oracle_answers(&item.program, item.qtype, h, voc)?;
    let hits: Vec<usize> = (0..4).filter(|&i| answers.contains(&item.options[i])).collect();
    match hits.as_slice() {
        [i] => Ok(*i),
        _ => Err(OracleError::Ambiguous(hits.len())),
    }
}

/// Executor result rendered the way options are.
pub fn render_value(value: &ExecValue, h: &SituationHypergraph, tense: Tense, voc: &Vocabulary) -> BTreeSet<String> {
    match value {
        ExecValue::Actions(ids) => ids
            .iter()
            .filter_map(|id| h.action(id))
            .map(|a| render_action(voc, &a.verb, &a.object, tense))
            .collect(),
        ExecValue::Objects(os) => os.iter().map(|o| noun_phrase(voc, o)).collect(),
        _ => BTreeSet::new(),
    }
}

/// Execute the question's program on `h` and pick the option its result
/// names. Falls back to the random baseline when the result is empty,
/// unanswerable or names several options.
pub fn executor_predict(item: &QAItem, h: &SituationHypergraph, voc: &Vocabulary, seed: u64) -> usize {
    if let Ok(exec) = execute(&item.program, h) {
        let rendered = render_value(&exec.value, h, item.qtype.tense(), voc);
        let hits: Vec<usize> = (0..4).filter(|&i| rendered.contains(&item.options[i])).collect();
        if let [i] = hits.as_slice() {
            return *i;
        }
    }
    baseline_random(item, seed)
}

/// Independent drop probabilities for object nodes, relation triplets and
/// action hyperedges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub p_drop_object: f64,
    pub p_drop_relation: f64,
    pub p_drop_action: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn uniform(p: f64, seed: u64) -> Self {
        Self {
            p_drop_object: p,
            p_drop_relation: p,
            p_drop_action: p,
            seed,
        }
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        for p in [self.p_drop_object, self.p_drop_relation, self.p_drop_action] {
            if !(0.0..=1.0).contains(&p) {
                return Err(HarnessError::BadNoise(p));
            }
        }
        Ok(())
    }
}

/// Simulated perception errors. Dropped object nodes take their triplets with
/// them; actions whose object no longer shows in any member frame are
/// removed as well, so the result stays well formed.
pub fn degrade(h: &SituationHypergraph, spec: &NoiseSpec) -> Result<SituationHypergraph, HarnessError> {
    spec.check()?;
    let mut rng = Rng::seed_from_u64(derive(spec.seed, &h.id));
    let object_nodes: BTreeSet<&String> = h
        .frames
        .iter()
        .flat_map(|f| f.nodes.iter())
        .filter(|n| node_kind(n) == NodeKind::Object)
        .collect();
    let dropped: BTreeSet<&String> = object_nodes
        .into_iter()
        .filter(|_| rng.gen_bool(spec.p_drop_object))
        .collect();
    let mut out = h.clone();
    for f in &mut out.frames {
        f.nodes.retain(|n| !dropped.contains(n));
        f.triplets
            .retain(|t| !dropped.contains(&t.subject) && !dropped.contains(&t.object));
    }
    for f in &mut out.frames {
        f.triplets.retain(|_| !rng.gen_bool(spec.p_drop_relation));
    }
    out.actions.retain(|_| !rng.gen_bool(spec.p_drop_action));
    let frames = &out.frames;
    out.actions.retain(|a| {
        a.member_frames().any(|fr| {
            frames
                .binary_search_by_key(&fr, |f| f.frame)
                .is_ok_and(|i| frames[i].has_class(&a.object))
        })
    });
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl Score {
    fn add(&mut self, hit: bool) {
        self.total += 1;
        self.correct += usize::from(hit);
        self.accuracy = self.correct as f64 / self.total as f64;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_qtype: BTreeMap<QuestionType, Score>,
    pub overall: Score,
    /// Settings the predictions were made under, echoed for the record.
    pub config: BTreeMap<String, String>,
}

impl EvalReport {
    /// Accuracy table: one column per question type plus the mean.
    pub fn table(&self) -> String {
        let mut head = String::new();
        let mut row = String::new();
        for q in QuestionType::ALL {
            head.push_str(&alloc::format!("{:>12}", q.name()));
            match self.per_qtype.get(&q) {
                Some(s) => row.push_str(&alloc::format!("{:>11.2}%", 100.0 * s.accuracy)),
                None => row.push_str(&alloc::format!("{:>12}", "-")),
            }
        }
        head.push_str(&alloc::format!("{:>12}", "overall"));
        row.push_str(&alloc::format!("{:>11.2}%", 100.0 * self.overall.accuracy));
        alloc::format!("{head}\n{row}\n")
    }
}

/// Score predictions (item id to option index) against `items`.
pub fn evaluate(predictions: &BTreeMap<String, usize>, items: &[QAItem]) -> Result<EvalReport, HarnessError> {
    let mut report = EvalReport::default();
    for item in items {
        let &p = predictions
            .get(&item.id)
            .ok_or_else(|| HarnessError::MissingPrediction(item.id.clone()))?;
        if p >= 4 {
            return Err(HarnessError::BadPrediction {
                id: item.id.clone(),
                index: p,
            });
        }
        let hit = p == item.correct_index;
        report.per_qtype.entry(item.qtype).or_default().add(hit);
        report.overall.add(hit);
    }
    Ok(report)
}
