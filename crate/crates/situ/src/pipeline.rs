//! Parallel stages. Work is spread over a fixed number of scoped threads and
//! merged back in input order, so results never depend on the worker count.

use std::collections::BTreeMap;

use situ_core::harness::{degrade, evaluate, executor_predict, EvalReport, NoiseSpec};
use situ_core::hypergraph::{propagate_relations, PropagationRules};
use situ_core::qagen::{finalize, generate_situation, Corpus, FactIndex, GenOptions, QuestionTemplate};
use situ_core::rng::derive;
use situ_core::{QAItem, SituationHypergraph, Vocabulary};

use crate::error::Result;

/// `f` over `items` on `workers` threads, results in input order.
pub fn par_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = workers.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(|| part.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

pub struct Generated {
    pub corpus: Corpus,
    /// Inputs after relation propagation, in input order.
    pub ground_truth: Vec<SituationHypergraph>,
}

/// Propagate relations, run pass one per situation in parallel, then the
/// ordered pass two.
pub fn generate(
    situations: &[SituationHypergraph],
    templates: &[QuestionTemplate],
    voc: &Vocabulary,
    rules: &PropagationRules,
    opts: GenOptions,
    workers: usize,
) -> Generated {
    let ground_truth = par_map(situations, workers, |h| propagate_relations(h, rules));
    let outputs = par_map(&ground_truth, workers, |h| generate_situation(h, templates, voc, opts.seed));
    let corpus = finalize(outputs, &FactIndex::new(&ground_truth), voc, opts);
    Generated { corpus, ground_truth }
}

/// Executor accuracy on degraded ground truth, one noise draw per situation.
pub fn degraded_accuracy(
    items: &[QAItem],
    ground_truth: &BTreeMap<String, SituationHypergraph>,
    voc: &Vocabulary,
    noise: &NoiseSpec,
    workers: usize,
) -> Result<EvalReport> {
    let graphs: Vec<&SituationHypergraph> = ground_truth.values().collect();
    let degraded: Vec<Result<SituationHypergraph>> =
        par_map(&graphs, workers, |h| degrade(h, noise).map_err(Into::into));
    let degraded: BTreeMap<&str, SituationHypergraph> = graphs
        .iter()
        .map(|h| h.id.as_str())
        .zip(degraded)
        .map(|(id, g)| g.map(|g| (id, g)))
        .collect::<Result<_>>()?;
    let seed = derive(noise.seed, "executor");
    let choices = par_map(items, workers, |item| {
        let choice = match degraded.get(item.base_situation_id()) {
            Some(h) => executor_predict(item, h, voc, seed),
            None => situ_core::harness::baseline_random(item, seed),
        };
        (item.id.clone(), choice)
    });
    let predictions: BTreeMap<String, usize> = choices.into_iter().collect();
    let mut report = evaluate(&predictions, items)?;
    report.config = [
        ("predictor".to_string(), "executor".to_string()),
        ("p_drop_object".to_string(), noise.p_drop_object.to_string()),
        ("p_drop_relation".to_string(), noise.p_drop_relation.to_string()),
        ("p_drop_action".to_string(), noise.p_drop_action.to_string()),
        ("seed".to_string(), noise.seed.to_string()),
    ]
    .into_iter()
    .collect();
    Ok(report)
}
