//! One function per subcommand. Each returns the text printed on stdout.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use situ_core::balance::{
    compute_distribution, cooccurrence_flows, filter_compositionality, max_flow_share, redraw_options, resample_balance,
    DistributionReport, GroupBy,
};
use situ_core::harness::{
    baseline_frequent, baseline_random, brute_force_oracle, evaluate, executor_predict, EvalReport, FrequencyStats,
};
use situ_core::hypergraph::{prediction_cutoff, HypergraphDoc, PropagationRules};
use situ_core::program::{execute, typecheck, ExecError};
use situ_core::qagen::{default_templates, GenOptions, QuestionType, Split};
use situ_core::rng::derive;
use situ_core::synth::{synth_corpus, SynthConfig};
use situ_core::{QAItem, SituationHypergraph, Vocabulary};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::io::{layout, load_items, load_predictions, load_situations, load_templates, load_vocabulary, read_json, save_situations, write_json};
use crate::pipeline::{degraded_accuracy, generate};

fn vocabulary(cfg: &PipelineConfig) -> Result<Vocabulary> {
    load_vocabulary(cfg.vocab.as_deref())
}

fn rules(cfg: &PipelineConfig, voc: &Vocabulary) -> Result<PropagationRules> {
    let Some(path) = &cfg.rules else {
        return Ok(PropagationRules::default());
    };
    let rules: PropagationRules = read_json(path)?;
    let unknown = rules.unknown_predicates(voc);
    if !unknown.is_empty() {
        return Err(Error::data(path, format!("not spatial relationships: {}", unknown.join(", "))));
    }
    Ok(rules)
}

fn count_by_qtype(items: &[QAItem]) -> BTreeMap<QuestionType, usize> {
    let mut out: BTreeMap<QuestionType, usize> = QuestionType::ALL.iter().map(|q| (*q, 0)).collect();
    for item in items {
        *out.entry(item.qtype).or_default() += 1;
    }
    out
}

fn qtype_summary(items: &[QAItem]) -> String {
    let mut s = String::new();
    for (q, n) in count_by_qtype(items) {
        let _ = writeln!(s, "{:<12} {n:>7}", q.name());
    }
    let _ = writeln!(s, "{:<12} {:>7}", "total", items.len());
    s
}

pub fn cmd_synth(cfg: &PipelineConfig, count: usize) -> Result<String> {
    let voc = vocabulary(cfg)?;
    let synth = SynthConfig {
        situations: count,
        seed: cfg.seed,
        ..SynthConfig::default()
    };
    let graphs = synth_corpus(&voc, &synth);
    save_situations(cfg.out()?, &graphs)?;
    Ok(format!("{} situations written to {}\n", graphs.len(), cfg.out()?.display()))
}

pub fn cmd_templates(cfg: &PipelineConfig) -> Result<String> {
    let templates = default_templates();
    write_json(cfg.out()?, &templates)?;
    Ok(format!("{} templates written to {}\n", templates.len(), cfg.out()?.display()))
}

/// Two-pass generation. Writes `qa.json`, `ground_truth.json` and
/// `shipped.json` into the output directory.
pub fn cmd_generate(cfg: &PipelineConfig) -> Result<String> {
    let voc = vocabulary(cfg)?;
    let templates = load_templates(cfg.templates.as_deref())?;
    let rules = rules(cfg, &voc)?;
    let input = cfg.input()?;
    let out = cfg.out()?;
    let situations = load_situations(input, &voc)?;
    let opts = GenOptions {
        seed: cfg.seed,
        frequent: cfg.frequent,
    };
    let g = generate(&situations, &templates, &voc, &rules, opts, cfg.workers);
    write_json(&out.join(layout::ITEMS), &g.corpus.items)?;
    save_situations(&out.join(layout::GROUND_TRUTH), &g.ground_truth)?;
    save_situations(&out.join(layout::SHIPPED), g.corpus.shipped.values())?;
    let mut s = qtype_summary(&g.corpus.items);
    let _ = writeln!(s, "{:<12} {:>7}", "dropped", g.corpus.dropped);
    Ok(s)
}

fn load_graph_docs(path: &Path, voc: &Vocabulary, problems: &mut Vec<String>) -> Result<BTreeMap<String, SituationHypergraph>> {
    let docs: Vec<HypergraphDoc> = read_json(path)?;
    let mut out = BTreeMap::new();
    for doc in docs {
        let id = doc.id.clone();
        match SituationHypergraph::from_doc(doc, voc) {
            Ok(h) => {
                if out.insert(id.clone(), h).is_some() {
                    problems.push(format!("situation {id}: duplicate id in {}", path.display()));
                }
            }
            Err(e) => problems.push(format!("situation {id}: {e}")),
        }
    }
    Ok(out)
}

fn check_item(
    item: &QAItem,
    gt: &BTreeMap<String, SituationHypergraph>,
    shipped: &BTreeMap<String, SituationHypergraph>,
    voc: &Vocabulary,
) -> Vec<String> {
    let mut out = Vec::new();
    let mut problem = |m: String| out.push(format!("item {}: {m}", item.id));
    if item.correct_index >= 4 {
        problem(format!("correct_index {} out of range", item.correct_index));
        return out;
    }
    let distinct: BTreeSet<&String> = item.options.iter().collect();
    if distinct.len() != 4 {
        problem("duplicate options".into());
    }
    if let Err(e) = typecheck(&item.program) {
        problem(format!("program does not typecheck: {e}"));
        return out;
    }
    let Some(h) = gt.get(item.base_situation_id()) else {
        problem(format!("unknown situation {}", item.base_situation_id()));
        return out;
    };
    match brute_force_oracle(item, h, voc) {
        Ok(i) if i == item.correct_index => {}
        Ok(i) => problem(format!("correct_index is {} but the situation supports option {i}", item.correct_index)),
        Err(e) => problem(format!("reference answerer: {e}")),
    }
    if item.situation_id != item.base_situation_id() {
        match shipped.get(&item.situation_id) {
            None => problem(format!("shipped situation {} missing", item.situation_id)),
            Some(masked) if item.qtype == QuestionType::Prediction => {
                let query = item.situation_id.rsplit_once("@pred:").map(|(_, a)| a);
                match query.and_then(|q| h.action(q)) {
                    None => problem("query action unknown".into()),
                    Some(q) => {
                        let cutoff = prediction_cutoff(q.interval);
                        if let Some(f) = masked.frames.iter().find(|f| f.frame > cutoff) {
                            problem(format!("shipped frame {} beyond cutoff {cutoff}", f.frame));
                        }
                    }
                }
                if !matches!(execute(&item.program, masked), Err(ExecError::Unanswerable { .. })) {
                    problem("answerable from the masked situation".into());
                }
            }
            Some(_) => {}
        }
    }
    out
}

/// Every problem found in a generation output directory. Empty when clean.
pub fn cmd_validate(cfg: &PipelineConfig) -> Result<Vec<String>> {
    let voc = vocabulary(cfg)?;
    let dir = cfg.input()?;
    if !dir.is_dir() {
        return Err(Error::Usage(format!("{}: not a generation output directory", dir.display())));
    }
    let mut problems = Vec::new();
    let gt = load_graph_docs(&dir.join(layout::GROUND_TRUTH), &voc, &mut problems)?;
    let shipped = load_graph_docs(&dir.join(layout::SHIPPED), &voc, &mut problems)?;
    let items = load_items(&dir.join(layout::ITEMS))?;
    let mut ids = BTreeSet::new();
    for item in &items {
        if !ids.insert(item.id.as_str()) {
            problems.push(format!("item {}: duplicate id", item.id));
        }
    }
    let found: Vec<Vec<String>> =
        crate::pipeline::par_map(&items, cfg.workers, |item| check_item(item, &gt, &shipped, &voc));
    problems.extend(found.into_iter().flatten());
    Ok(problems)
}

#[derive(Serialize)]
struct StatsDoc<'a> {
    items: usize,
    max_flow_share: f64,
    groups: &'a [DistributionReport],
}

pub fn cmd_stats(cfg: &PipelineConfig) -> Result<String> {
    let voc = vocabulary(cfg)?;
    let items = load_items(cfg.input()?)?;
    let reports = compute_distribution(&items, GroupBy::QuestionType, &voc)?;
    let overall = max_flow_share(&cooccurrence_flows(&items, &voc));
    if let Some(out) = &cfg.out {
        write_json(
            out,
            &StatsDoc {
                items: items.len(),
                max_flow_share: overall,
                groups: &reports,
            },
        )?;
    }
    let mut s = format!(
        "{:<12} {:>7} {:>8} {:>11} {:>9} {:>10}\n",
        "group", "items", "answers", "uniformity", "max dev", "max flow"
    );
    for r in &reports {
        let answers = r.histogram.values().filter(|c| **c > 0).count();
        let _ = writeln!(
            s,
            "{:<12} {:>7} {:>8} {:>11.4} {:>9.4} {:>10.4}",
            r.group,
            r.size,
            answers,
            r.uniformity,
            r.max_deviation,
            max_flow_share(&r.flows)
        );
    }
    let _ = writeln!(s, "{:<12} {:>7} {:>41.4}", "all", items.len(), overall);
    Ok(s)
}

pub fn cmd_debias(cfg: &PipelineConfig) -> Result<String> {
    let voc = vocabulary(cfg)?;
    let items = load_items(cfg.input()?)?;
    let filtered = filter_compositionality(&items, &voc, cfg.min_compositions);
    let balanced = resample_balance(&filtered, cfg.tolerance, derive(cfg.seed, "balance"), GroupBy::QuestionType, &voc)?;
    let balanced = redraw_options(&balanced, derive(cfg.seed, "options"));
    write_json(cfg.out()?, &balanced)?;
    Ok(format!(
        "{} items in, {} after compositionality filter, {} after balancing\n",
        items.len(),
        filtered.len(),
        balanced.len()
    ))
}

pub fn cmd_split(cfg: &PipelineConfig) -> Result<String> {
    let items = load_items(cfg.input()?)?;
    let out = situ_core::harness::split_dataset(&items, cfg.ratios, cfg.seed)?;
    write_json(cfg.out()?, &out)?;
    let mut situations: BTreeMap<Split, BTreeSet<&str>> = BTreeMap::new();
    let mut counts: BTreeMap<Split, usize> = BTreeMap::new();
    for item in &out {
        let split = item.split.expect("assigned");
        situations.entry(split).or_default().insert(item.base_situation_id());
        *counts.entry(split).or_default() += 1;
    }
    let mut s = String::new();
    for split in [Split::Train, Split::Val, Split::Test] {
        let _ = writeln!(
            s,
            "{:<6} {:>6} situations {:>7} items",
            format!("{split:?}").to_lowercase(),
            situations.get(&split).map_or(0, BTreeSet::len),
            counts.get(&split).copied().unwrap_or(0)
        );
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Predictor {
    Random,
    Frequent,
    Executor,
    File(PathBuf),
}

impl Predictor {
    fn name(&self) -> String {
        match self {
            Predictor::Random => "random".into(),
            Predictor::Frequent => "frequent".into(),
            Predictor::Executor => "executor".into(),
            Predictor::File(p) => p.display().to_string(),
        }
    }
}

/// Items scored and items whose answers the frequency baseline may learn
/// from: the test and train splits when the corpus is split, otherwise the
/// whole corpus for both.
fn eval_sets(items: &[QAItem]) -> (Vec<QAItem>, Vec<&QAItem>) {
    if items.iter().any(|i| i.split.is_some()) {
        let test = items.iter().filter(|i| i.split == Some(Split::Test)).cloned().collect();
        let train = items.iter().filter(|i| i.split == Some(Split::Train)).collect();
        (test, train)
    } else {
        (items.to_vec(), items.iter().collect())
    }
}

fn ground_truth_for(cfg: &PipelineConfig, explicit: Option<&Path>, voc: &Vocabulary) -> Result<BTreeMap<String, SituationHypergraph>> {
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => cfg
            .input()?
            .parent()
            .unwrap_or(Path::new("."))
            .join(layout::GROUND_TRUTH),
    };
    Ok(load_situations(&path, voc)?
        .into_iter()
        .map(|h| (h.id.clone(), h))
        .collect())
}

fn report_text(report: &EvalReport, out: Option<&Path>) -> Result<String> {
    if let Some(out) = out {
        write_json(out, report)?;
    }
    Ok(report.table())
}

pub fn cmd_eval(cfg: &PipelineConfig, predictor: &Predictor, ground_truth: Option<&Path>) -> Result<String> {
    let items = load_items(cfg.input()?)?;
    let (scored, train) = eval_sets(&items);
    let seed = derive(cfg.seed, "baseline");
    let predictions: BTreeMap<String, usize> = match predictor {
        Predictor::Random => scored.iter().map(|i| (i.id.clone(), baseline_random(i, seed))).collect(),
        Predictor::Frequent => {
            let stats = FrequencyStats::from_items(train);
            scored.iter().map(|i| (i.id.clone(), baseline_frequent(i, &stats))).collect()
        }
        Predictor::Executor => {
            let voc = vocabulary(cfg)?;
            let gt = ground_truth_for(cfg, ground_truth, &voc)?;
            scored
                .iter()
                .map(|i| {
                    let choice = gt
                        .get(i.base_situation_id())
                        .map_or_else(|| baseline_random(i, seed), |h| executor_predict(i, h, &voc, seed));
                    (i.id.clone(), choice)
                })
                .collect()
        }
        Predictor::File(path) => load_predictions(path)?,
    };
    let mut report = evaluate(&predictions, &scored)?;
    report.config.insert("predictor".into(), predictor.name());
    report.config.insert("seed".into(), cfg.seed.to_string());
    report_text(&report, cfg.out.as_deref())
}

#[derive(Serialize)]
struct DegradeDoc {
    runs: Vec<EvalReport>,
    mean_accuracy: BTreeMap<String, f64>,
}

pub fn cmd_degrade_eval(cfg: &PipelineConfig, seeds: usize, ground_truth: Option<&Path>) -> Result<String> {
    let voc = vocabulary(cfg)?;
    let items = load_items(cfg.input()?)?;
    let gt = ground_truth_for(cfg, ground_truth, &voc)?;
    let mut runs = Vec::with_capacity(seeds);
    for k in 0..seeds.max(1) {
        let mut noise = cfg.noise;
        noise.seed = derive(cfg.seed, &format!("degrade/{k}"));
        runs.push(degraded_accuracy(&items, &gt, &voc, &noise, cfg.workers)?);
    }
    let n = runs.len() as f64;
    let mut mean: BTreeMap<String, f64> = BTreeMap::new();
    for r in &runs {
        for (q, s) in &r.per_qtype {
            *mean.entry(q.name().to_string()).or_default() += s.accuracy / n;
        }
        *mean.entry("overall".into()).or_default() += r.overall.accuracy / n;
    }
    if let Some(out) = &cfg.out {
        write_json(
            out,
            &DegradeDoc {
                runs,
                mean_accuracy: mean.clone(),
            },
        )?;
    }
    let mut s = format!(
        "noise object={} relation={} action={} over {} seed(s)\n",
        cfg.noise.p_drop_object,
        cfg.noise.p_drop_relation,
        cfg.noise.p_drop_action,
        n
    );
    for q in QuestionType::ALL.iter().map(|q| q.name()).chain(["overall"]) {
        if let Some(a) = mean.get(q) {
            let _ = writeln!(s, "{q:<12} {:>7.2}%", 100.0 * a);
        }
    }
    Ok(s)
}
