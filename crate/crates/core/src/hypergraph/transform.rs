use alloc::string::String;
use alloc::vec::Vec;

use super::{hyperedge, Frame, Interval, SituationHypergraph};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("empty situation")]
    EmptySituation,
    #[error("unknown action `{0}`")]
    UnknownAction(String),
}

/// Restrict `h` to `window`. Frames outside are dropped, hyperedges are
/// clipped (their precondition moves to the first surviving frame) and removed
/// when nothing of them survives. The new source interval is the overlap of
/// the old one with `window`.
pub fn trim(h: &SituationHypergraph, window: Interval) -> Result<SituationHypergraph, TransformError> {
    let range = h
        .source_interval
        .intersect(&window)
        .ok_or(TransformError::EmptySituation)?;
    let frames: Vec<_> = h
        .frames
        .iter()
        .filter(|f| range.contains(f.frame))
        .cloned()
        .collect();
    if frames.is_empty() {
        return Err(TransformError::EmptySituation);
    }
    let mut actions = Vec::with_capacity(h.actions.len());
    for a in &h.actions {
        let Some(clipped) = a.interval.intersect(&range) else {
            continue;
        };
        let Some(first) = frames.iter().map(|f| f.frame).find(|&f| clipped.contains(f)) else {
            continue;
        };
        let edge = hyperedge(
            &frames,
            a.id.clone(),
            a.verb.clone(),
            a.object.clone(),
            Interval::new(first, clipped.end),
        );
        let connected = edge.member_frames().any(|fr| {
            frames
                .binary_search_by_key(&fr, |f| f.frame)
                .is_ok_and(|i| frames[i].has_class(&a.object))
        });
        if connected {
            actions.push(edge);
        }
    }
    Ok(SituationHypergraph {
        id: h.id.clone(),
        source_interval: range,
        frames,
        actions,
    })
}

/// Last visible frame when only the beginning quarter of `interval` is shown.
/// At least one frame always stays visible.
pub fn prediction_cutoff(interval: Interval) -> Frame {
    interval.start + (interval.len() / 4).max(1) - 1
}

/// Hide everything after the first quarter of `query_action`.
pub fn mask_for_prediction(h: &SituationHypergraph, query_action: &str) -> Result<SituationHypergraph, TransformError> {
    let q = h
        .action(query_action)
        .ok_or_else(|| TransformError::UnknownAction(query_action.into()))?;
    let cutoff = prediction_cutoff(q.interval);
    trim(h, Interval::new(h.source_interval.start, cutoff))
}

/// Remove the effect segment of `answer_action`: its hyperedge goes away, and
/// so do its effect frames unless another action still covers them. Its
/// precondition frame stays.
pub fn mask_for_feasibility(h: &SituationHypergraph, answer_action: &str) -> Result<SituationHypergraph, TransformError> {
    let answer = h
        .action(answer_action)
        .ok_or_else(|| TransformError::UnknownAction(answer_action.into()))?;
    let actions: Vec<_> = h
        .actions
        .iter()
        .filter(|a| a.id != answer.id)
        .cloned()
        .collect();
    let frames = h
        .frames
        .iter()
        .filter(|f| {
            let in_effect = answer.effect_frames.binary_search(&f.frame).is_ok();
            !in_effect || actions.iter().any(|a| a.interval.contains(f.frame))
        })
        .cloned()
        .collect();
    Ok(SituationHypergraph {
        id: h.id.clone(),
        source_interval: h.source_interval,
        frames,
        actions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{build_hypergraph, validate, FrameSubgraph, RawAction};
    use crate::testutil::vocab;
    use alloc::string::ToString;
    use alloc::vec;

    fn chain(frames: &[Frame], actions: &[(&str, &str, &str, Frame, Frame)]) -> SituationHypergraph {
        let fs = frames
            .iter()
            .map(|&f| {
                FrameSubgraph::new(f)
                    .with_node("person")
                    .with_node("cup")
                    .with_node("book")
                    .with_node("table")
            })
            .collect();
        let acts = actions
            .iter()
            .map(|&(id, v, o, s, e)| RawAction::new(id, v, o, s, e))
            .collect();
        let end = *frames.last().unwrap();
        build_hypergraph("s", Interval::new(frames[0], end), fs, acts, &vocab()).unwrap()
    }

    #[test]
    fn trim_identity_window() {
        let h = chain(&[0, 10, 20], &[("a0", "take", "cup", 0, 20)]);
        assert_eq!(trim(&h, h.source_interval).unwrap(), h);
    }

    #[test]
    fn trim_keeps_only_covered_action() {
        let h = chain(
            &[0, 10, 20, 30],
            &[("a0", "take", "cup", 0, 10), ("a1", "take", "book", 20, 30)],
        );
        // Brute-force membership: an action survives iff its interval meets the window.
        let window = Interval::new(0, 15);
        let expected: Vec<_> = h
            .actions
            .iter()
            .filter(|a| a.interval.overlaps(&window))
            .map(|a| a.id.clone())
            .collect();
        let t = trim(&h, window).unwrap();
        assert_eq!(t.actions.len(), 1);
        assert_eq!(t.actions.iter().map(|a| a.id.clone()).collect::<Vec<_>>(), expected);
        assert!(validate(&t, &vocab()).is_empty());
        assert_eq!(trim(&t, window).unwrap(), t);
    }

    #[test]
    fn trim_disjoint_window() {
        let h = chain(&[0, 10], &[("a0", "take", "cup", 0, 10)]);
        assert_eq!(trim(&h, Interval::new(50, 60)), Err(TransformError::EmptySituation));
        assert_eq!(TransformError::EmptySituation.to_string(), "empty situation");
    }

    #[test]
    fn prediction_quarter() {
        let frames: Vec<Frame> = (0..100).collect();
        let h = chain(&frames, &[("a0", "take", "cup", 0, 99)]);
        let m = mask_for_prediction(&h, "a0").unwrap();
        assert_eq!(m.frames.first().unwrap().frame, 0);
        assert_eq!(m.frames.last().unwrap().frame, 24);
        assert_eq!(m.actions[0].interval, Interval::new(0, 24));
        assert!(validate(&m, &vocab()).is_empty());
    }

    #[test]
    fn prediction_single_frame_action() {
        let h = chain(&[0, 5, 9], &[("a0", "take", "cup", 5, 5)]);
        assert_eq!(prediction_cutoff(Interval::new(5, 5)), 5);
        let m = mask_for_prediction(&h, "a0").unwrap();
        assert_eq!(m.frames.iter().map(|f| f.frame).collect::<Vec<_>>(), vec![0, 5]);
        assert!(matches!(mask_for_prediction(&h, "zz"), Err(TransformError::UnknownAction(_))));
    }

    #[test]
    fn prediction_keeps_earlier_action() {
        let frames: Vec<Frame> = (0..=40).step_by(4).collect();
        let h = chain(
            &frames,
            &[("a0", "take", "cup", 0, 12), ("a1", "take", "book", 20, 40)],
        );
        let m = mask_for_prediction(&h, "a1").unwrap();
        let cutoff = prediction_cutoff(Interval::new(20, 40));
        let expected: Vec<Frame> = frames.iter().copied().filter(|&f| f <= cutoff).collect();
        assert_eq!(m.frames.iter().map(|f| f.frame).collect::<Vec<_>>(), expected);
        assert_eq!(m.action("a0"), h.action("a0"));
    }

    #[test]
    fn feasibility_single_action() {
        let h = chain(&[0, 10, 20], &[("a0", "take", "cup", 0, 20)]);
        let m = mask_for_feasibility(&h, "a0").unwrap();
        assert!(m.actions.is_empty());
        assert_eq!(m.frames.iter().map(|f| f.frame).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn feasibility_overlap_retained() {
        let h = chain(
            &[0, 10, 20, 30],
            &[("a0", "take", "book", 0, 20), ("a1", "take", "cup", 10, 30)],
        );
        let m = mask_for_feasibility(&h, "a1").unwrap();
        // Brute force: frame kept iff not in the answer's effect segment or
        // still covered by a remaining action.
        let answer = h.action("a1").unwrap();
        let expected: Vec<Frame> = h
            .frames
            .iter()
            .map(|f| f.frame)
            .filter(|&f| !answer.effect_frames.contains(&f) || Interval::new(0, 20).contains(f))
            .collect();
        assert_eq!(m.frames.iter().map(|f| f.frame).collect::<Vec<_>>(), expected);
        assert_eq!(m.action("a0"), h.action("a0"));
        assert!(m.action("a1").is_none());
        assert!(validate(&m, &vocab()).is_empty());
    }
}
