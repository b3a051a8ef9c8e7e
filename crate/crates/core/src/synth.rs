//! Synthetic situations for the sample corpus and for randomized tests.
//!
//! Action predicates are drawn from a Zipf-like distribution over a seeded
//! ranking, so raw answer distributions are skewed the way real activity
//! annotations are.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};

use crate::hypergraph::{build_hypergraph, Frame, FrameSubgraph, Interval, RawAction, SituationHypergraph};
use crate::ontology::{RelationKind, Vocabulary, PERSON};
use crate::rng::{derive, derive_indexed, Rng};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthConfig {
    pub situations: usize,
    pub min_actions: usize,
    pub max_actions: usize,
    /// Spacing of annotated frames.
    pub frame_step: Frame,
    /// Chance that an action starts before the previous one ends.
    pub overlap: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            situations: 400,
            min_actions: 3,
            max_actions: 6,
            frame_step: 4,
            overlap: 0.25,
            seed: 2022,
        }
    }
}

/// Person-object relation shown while a verb is performed.
fn contact_for(verb: &str) -> &'static str {
    match verb {
        "sit_on" => "sitting_on",
        "lie_on" => "lying_on",
        "wear" | "put_on" => "wearing",
        "watch" | "look_at" => "looking_at",
        "open" | "close" | "grasp" | "tidy" | "snuggle_with" => "touching",
        _ => "holding",
    }
}

const POSITIONAL: [&str; 4] = ["left_of", "right_of", "in_front_of", "behind"];

fn spatial(voc: &Vocabulary, r: &str) -> bool {
    voc.relation_kind(r) == Some(RelationKind::Spatial)
}

fn weighted<'a, T>(rng: &mut Rng, items: &'a [(T, f64)]) -> &'a T {
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    let mut x = rng.gen::<f64>() * total;
    for (item, w) in items {
        if x < *w {
            return item;
        }
        x -= w;
    }
    &items[items.len() - 1].0
}

/// Predicates ranked by a seeded shuffle, weighted `1 / (rank + 1)`.
fn skewed_predicates(voc: &Vocabulary, seed: u64) -> Vec<((String, String), f64)> {
    let mut preds: Vec<(String, String)> = voc.action_predicates().iter().cloned().collect();
    preds.shuffle(&mut Rng::seed_from_u64(derive(seed, "skew")));
    preds
        .into_iter()
        .enumerate()
        .map(|(rank, p)| (p, 1.0 / (rank as f64 + 1.0)))
        .collect()
}

struct Plan {
    id: String,
    actions: Vec<RawAction>,
    background: Vec<String>,
}

fn plan(voc: &Vocabulary, cfg: &SynthConfig, preds: &[((String, String), f64)], rng: &mut Rng, index: usize) -> Plan {
    let n = rng.gen_range(cfg.min_actions..=cfg.max_actions.max(cfg.min_actions));
    let step = cfg.frame_step.max(1);
    let mut chosen: Vec<(String, String)> = Vec::with_capacity(n);
    for _ in 0..n {
        for _ in 0..16 {
            let p = weighted(rng, preds);
            if !chosen.contains(p) {
                chosen.push(p.clone());
                break;
            }
        }
    }
    let mut actions = Vec::with_capacity(chosen.len());
    let mut cursor: Frame = step * rng.gen_range(0..10);
    let mut prev: Option<Interval> = None;
    for (k, (verb, object)) in chosen.into_iter().enumerate() {
        let start = match prev {
            Some(p) if rng.gen_bool(cfg.overlap) && p.end > p.start => {
                p.start + step * rng.gen_range(1..=((p.end - p.start) / step).max(1))
            }
            Some(p) => p.end + step * rng.gen_range(1..=3),
            None => cursor,
        };
        let end = start + step * rng.gen_range(3..=8);
        actions.push(RawAction {
            id: alloc::format!("a{k}"),
            verb,
            object,
            start,
            end,
        });
        prev = Some(Interval::new(start, end));
        cursor = end;
    }
    let used: BTreeSet<&str> = actions.iter().map(|a| a.object.as_str()).collect();
    let pool: Vec<&String> = voc.objects().iter().filter(|o| !used.contains(o.as_str())).collect();
    let k = rng.gen_range(1..=3).min(pool.len());
    let background = pool.choose_multiple(rng, k).map(|s| s.to_string()).collect();
    Plan {
        id: alloc::format!("s{index:05}"),
        actions,
        background,
    }
}

fn realize(voc: &Vocabulary, p: Plan, step: Frame, rng: &mut Rng) -> SituationHypergraph {
    let start = p.actions.iter().map(|a| a.start).min().unwrap_or(0);
    let end = p.actions.iter().map(|a| a.end).max().unwrap_or(start);
    // Where each acted-on object rests when nobody handles it.
    let rest: BTreeMap<&str, &str> = p
        .actions
        .iter()
        .filter_map(|a| p.background.choose(rng).map(|b| (a.object.as_str(), b.as_str())))
        .collect();
    let layout: Vec<(&str, &str, &str)> = p
        .background
        .windows(2)
        .map(|w| (w[0].as_str(), *POSITIONAL.choose(rng).expect("non-empty"), w[1].as_str()))
        .collect();
    let mut frames = Vec::new();
    let mut f = start;
    while f <= end {
        let mut fr = FrameSubgraph::new(f).with_node(PERSON);
        for b in &p.background {
            fr = fr.with_node(b);
        }
        for &(a, r, b) in &layout {
            if spatial(voc, r) {
                fr = fr.with_triplet(a, r, b);
            }
        }
        for a in &p.actions {
            let near = a.start.saturating_sub(2 * step) <= f && f <= a.end + 2 * step;
            if !near {
                continue;
            }
            fr = fr.with_node(&a.object);
            if a.start <= f && f <= a.end {
                let r = contact_for(&a.verb);
                if spatial(voc, r) {
                    fr = fr.with_triplet(PERSON, r, &a.object);
                }
            } else if let Some(b) = rest.get(a.object.as_str()) {
                if spatial(voc, "on") {
                    fr = fr.with_triplet(&a.object, "on", b);
                }
            }
        }
        frames.push(fr);
        f += step;
    }
    build_hypergraph(&p.id, Interval::new(start, end), frames, p.actions, voc).expect("synthetic situation is valid")
}

/// Situation number `index` of the corpus described by `cfg`.
pub fn synth_situation(voc: &Vocabulary, cfg: &SynthConfig, index: usize) -> SituationHypergraph {
    let preds = skewed_predicates(voc, cfg.seed);
    synth_with(voc, cfg, &preds, index)
}

fn synth_with(voc: &Vocabulary, cfg: &SynthConfig, preds: &[((String, String), f64)], index: usize) -> SituationHypergraph {
    let mut rng = Rng::seed_from_u64(derive_indexed(cfg.seed, "situation", index as u64));
    let p = plan(voc, cfg, preds, &mut rng, index);
    realize(voc, p, cfg.frame_step.max(1), &mut rng)
}

pub fn synth_corpus(voc: &Vocabulary, cfg: &SynthConfig) -> Vec<SituationHypergraph> {
    let preds = skewed_predicates(voc, cfg.seed);
    (0..cfg.situations).map(|i| synth_with(voc, cfg, &preds, i)).collect()
}

/// Small unstructured graph: up to `max_frames` consecutive frames, up to
/// `max_actions` uniformly drawn actions with arbitrary overlap, and random
/// person-object and object-object relations.
pub fn small_situation(voc: &Vocabulary, seed: u64, max_frames: u32, max_actions: usize) -> SituationHypergraph {
    let mut rng = Rng::seed_from_u64(seed);
    let n_frames = rng.gen_range(1..=max_frames.max(1));
    let preds: Vec<&(String, String)> = voc.action_predicates().iter().collect();
    let n_actions = rng.gen_range(1..=max_actions.max(1));
    let mut actions = Vec::with_capacity(n_actions);
    for k in 0..n_actions {
        let (verb, object) = preds[rng.gen_range(0..preds.len())].clone();
        let start = rng.gen_range(0..n_frames);
        let end = rng.gen_range(start..n_frames.min(start + 4));
        actions.push(RawAction {
            id: alloc::format!("a{k}"),
            verb,
            object,
            start,
            end,
        });
    }
    let spatial_rels: Vec<&String> = voc
        .relationships()
        .iter()
        .filter(|(_, k)| **k == RelationKind::Spatial)
        .map(|(r, _)| r)
        .collect();
    let extras: Vec<&String> = voc.objects().iter().collect();
    let mut frames = Vec::with_capacity(n_frames as usize);
    for f in 0..n_frames {
        let mut fr = FrameSubgraph::new(f).with_node(PERSON);
        let mut present: Vec<String> = actions
            .iter()
            .filter(|a| a.start <= f && f <= a.end)
            .map(|a| a.object.clone())
            .collect();
        if rng.gen_bool(0.5) {
            present.push(extras[rng.gen_range(0..extras.len())].clone());
        }
        for o in &present {
            fr = fr.with_node(o);
        }
        for _ in 0..rng.gen_range(0..4) {
            let Some(o) = present.choose(&mut rng) else { break };
            let r = spatial_rels[rng.gen_range(0..spatial_rels.len())];
            if rng.gen_bool(0.7) {
                fr = fr.with_triplet(PERSON, r, o);
            } else if let Some(o2) = present.choose(&mut rng).filter(|o2| *o2 != o) {
                fr = fr.with_triplet(o, r, o2);
            }
        }
        frames.push(fr);
    }
    let id = alloc::format!("r{seed}");
    build_hypergraph(&id, Interval::new(0, n_frames - 1), frames, actions, voc).expect("random situation is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::validate;
    use crate::testutil::vocab;

    #[test]
    fn corpus_is_valid_and_deterministic() {
        let voc = vocab();
        let cfg = SynthConfig {
            situations: 30,
            ..SynthConfig::default()
        };
        let a = synth_corpus(&voc, &cfg);
        assert_eq!(a, synth_corpus(&voc, &cfg));
        assert_eq!(a[7], synth_situation(&voc, &cfg, 7));
        for h in &a {
            assert!(validate(h, &voc).is_empty(), "{}", h.id);
            assert!(h.actions.len() >= cfg.min_actions);
        }
    }

    #[test]
    fn small_graphs_respect_bounds() {
        let voc = vocab();
        for seed in 0..200 {
            let h = small_situation(&voc, seed, 10, 6);
            assert!(h.frames.len() <= 10);
            assert!(h.actions.len() <= 6);
            assert!(validate(&h, &voc).is_empty());
        }
    }
}
