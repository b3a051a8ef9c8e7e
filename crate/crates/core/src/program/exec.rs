//! Symbolic executor over situation hypergraphs.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::{child_path, typecheck, FunctionalProgram, Literal, Op, OpFamily, ProgramNode, TypeError, ValueType};
use crate::hypergraph::{node_class, node_kind, ActionHyperedge, NodeKind, RelationTriplet, SituationHypergraph};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExecValue {
    Actions(BTreeSet<String>),
    Objects(BTreeSet<String>),
    Verbs(BTreeSet<String>),
    Relations(BTreeSet<RelationTriplet>),
    Boolean(bool),
}

impl ExecValue {
    pub fn value_type(&self) -> ValueType {
        match self {
            ExecValue::Actions(_) => ValueType::ActionSet,
            ExecValue::Objects(_) => ValueType::ObjectSet,
            ExecValue::Verbs(_) => ValueType::VerbSet,
            ExecValue::Relations(_) => ValueType::RelationSet,
            ExecValue::Boolean(_) => ValueType::Boolean,
        }
    }

    /// Sets only; a boolean is never empty.
    pub fn is_empty(&self) -> bool {
        match self {
            ExecValue::Actions(s) | ExecValue::Objects(s) | ExecValue::Verbs(s) => s.is_empty(),
            ExecValue::Relations(s) => s.is_empty(),
            ExecValue::Boolean(_) => false,
        }
    }

    pub fn as_actions(&self) -> Option<&BTreeSet<String>> {
        match self {
            ExecValue::Actions(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_objects(&self) -> Option<&BTreeSet<String>> {
        match self {
            ExecValue::Objects(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub path: String,
    pub op: Op,
    pub value: ExecValue,
}

/// Final value plus the value of every node, innermost first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub value: ExecValue,
    pub trace: Vec<TraceEntry>,
}

impl Execution {
    pub fn at(&self, path: &str) -> Option<&ExecValue> {
        self.trace.iter().find(|t| t.path == path).map(|t| &t.value)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    /// An intermediate step came back empty: the question cannot be answered
    /// on this graph.
    #[error("unanswerable: {op} at {path} produced an empty set")]
    Unanswerable { path: String, op: Op },
    #[error("dangling id `{0}`")]
    DanglingId(String),
    #[error(transparent)]
    Type(#[from] TypeError),
}

struct Ctx<'g> {
    graph: &'g SituationHypergraph,
    trace: Vec<TraceEntry>,
}

impl<'g> Ctx<'g> {
    fn action(&self, id: &str) -> Result<&'g ActionHyperedge, ExecError> {
        self.graph
            .action(id)
            .ok_or_else(|| ExecError::DanglingId(id.into()))
    }

    fn actions<'s>(&self, ids: &'s BTreeSet<String>) -> Result<Vec<&'g ActionHyperedge>, ExecError> {
        ids.iter().map(|id| self.action(id)).collect()
    }

    fn eval(&mut self, node: &ProgramNode, path: &str, parent: Option<Op>) -> Result<ExecValue, ExecError> {
        let mut inputs = Vec::with_capacity(node.children.len());
        for (i, c) in node.children.iter().enumerate() {
            inputs.push(self.eval(c, &child_path(path, i), Some(node.op))?);
        }
        let value = self.apply(node, inputs)?;
        let consumed_by_verify = parent.is_some_and(|p| p.family() == OpFamily::Verify);
        if parent.is_some() && !consumed_by_verify && value.is_empty() {
            return Err(ExecError::Unanswerable {
                path: path.into(),
                op: node.op,
            });
        }
        self.trace.push(TraceEntry {
            path: path.into(),
            op: node.op,
            value: value.clone(),
        });
        Ok(value)
    }

    fn apply(&self, node: &ProgramNode, inputs: Vec<ExecValue>) -> Result<ExecValue, ExecError> {
        let ident = |i: usize| node.args[i].as_ident().unwrap_or_default();
        let mut inputs = inputs.into_iter();
        let mut take = || inputs.next().expect("typechecked arity");
        let actions_of = |v: ExecValue| match v {
            ExecValue::Actions(s) => s,
            _ => unreachable!("typechecked"),
        };
        let relations_of = |v: ExecValue| match v {
            ExecValue::Relations(s) => s,
            _ => unreachable!("typechecked"),
        };
        let g = self.graph;
        Ok(match node.op {
            Op::AllActions => ExecValue::Actions(g.actions.iter().map(|a| a.id.clone()).collect()),
            Op::QueryObjects => {
                let set = actions_of(take());
                ExecValue::Objects(self.actions(&set)?.into_iter().map(|a| a.object.clone()).collect())
            }
            Op::QueryVerbs => {
                let set = actions_of(take());
                ExecValue::Verbs(self.actions(&set)?.into_iter().map(|a| a.verb.clone()).collect())
            }
            Op::QueryEarliest => {
                let set = actions_of(take());
                let pick = self
                    .actions(&set)?
                    .into_iter()
                    .min_by(|a, b| {
                        (a.interval.start, a.interval.end, &a.id).cmp(&(b.interval.start, b.interval.end, &b.id))
                    });
                ExecValue::Actions(pick.into_iter().map(|a| a.id.clone()).collect())
            }
            Op::QueryLatest => {
                let set = actions_of(take());
                // Latest start, then latest end, then smallest id.
                let pick = self.actions(&set)?.into_iter().min_by(|a, b| {
                    (b.interval.start, b.interval.end)
                        .cmp(&(a.interval.start, a.interval.end))
                        .then_with(|| a.id.cmp(&b.id))
                });
                ExecValue::Actions(pick.into_iter().map(|a| a.id.clone()).collect())
            }
            Op::QueryRelationObjects => {
                let rels = relations_of(take());
                ExecValue::Objects(
                    rels.iter()
                        .filter(|t| node_kind(&t.object) == NodeKind::Object)
                        .map(|t| node_class(&t.object).into())
                        .collect(),
                )
            }
            Op::FilterActionsByVerb | Op::FilterActionsByObject | Op::FilterActionsByFrame => {
                let set = actions_of(take());
                let mut keep = BTreeSet::new();
                for a in self.actions(&set)? {
                    let hit = match (node.op, &node.args[0]) {
                        (Op::FilterActionsByVerb, _) => a.verb == ident(0),
                        (Op::FilterActionsByObject, _) => a.object == ident(0),
                        (_, Literal::Int(f)) => u32::try_from(*f).is_ok_and(|f| a.interval.contains(f)),
                        _ => false,
                    };
                    if hit {
                        keep.insert(a.id.clone());
                    }
                }
                ExecValue::Actions(keep)
            }
            Op::FilterRelationsByPredicate => {
                let rels = relations_of(take());
                let p = ident(0);
                ExecValue::Relations(rels.into_iter().filter(|t| t.predicate == p).collect())
            }
            Op::FilterRelationsByObject => {
                let rels = relations_of(take());
                let o = ident(0);
                ExecValue::Relations(rels.into_iter().filter(|t| node_class(&t.object) == o).collect())
            }
            Op::RelateTriplets => {
                let set = actions_of(take());
                let mut out = BTreeSet::new();
                for a in self.actions(&set)? {
                    for fr in a.member_frames() {
                        let frame = g
                            .frame(fr)
                            .ok_or_else(|| ExecError::DanglingId(alloc::format!("frame {fr}")))?;
                        out.extend(
                            frame
                                .triplets
                                .iter()
                                .filter(|t| node_kind(&t.subject) == NodeKind::Person)
                                .cloned(),
                        );
                    }
                }
                ExecValue::Relations(out)
            }
            Op::RelateActions => {
                let rels = relations_of(take());
                let frames: BTreeSet<u32> = rels.iter().map(|t| t.frame).collect();
                ExecValue::Actions(
                    g.actions
                        .iter()
                        .filter(|a| a.member_frames().any(|f| frames.contains(&f)))
                        .map(|a| a.id.clone())
                        .collect(),
                )
            }
            Op::TemporalBefore | Op::TemporalAfter | Op::TemporalWhile => {
                let candidates = actions_of(take());
                let anchors = actions_of(take());
                let anchor_edges = self.actions(&anchors)?;
                let mut keep = BTreeSet::new();
                for c in self.actions(&candidates)? {
                    if anchors.contains(&c.id) {
                        continue;
                    }
                    let hit = anchor_edges.iter().any(|a| match node.op {
                        Op::TemporalBefore => c.interval.end < a.interval.start,
                        Op::TemporalAfter => c.interval.start > a.interval.end,
                        _ => c.interval.overlaps(&a.interval),
                    });
                    if hit {
                        keep.insert(c.id.clone());
                    }
                }
                ExecValue::Actions(keep)
            }
            Op::VerifyExists => ExecValue::Boolean(!actions_of(take()).is_empty()),
            Op::VerifyAction => {
                let set = actions_of(take());
                let (v, o) = (ident(0), ident(1));
                ExecValue::Boolean(self.actions(&set)?.iter().any(|a| a.verb == v && a.object == o))
            }
            Op::VerifyObject => match take() {
                ExecValue::Objects(s) => ExecValue::Boolean(s.contains(ident(0))),
                _ => unreachable!("typechecked"),
            },
        })
    }
}

/// Run `p` on `h`, innermost operations first. Empty sets at intermediate
/// nodes raise [`ExecError::Unanswerable`], except directly under a verify
/// operation; an empty set at the root is a legal answer.
pub fn execute(p: &FunctionalProgram, h: &SituationHypergraph) -> Result<Execution, ExecError> {
    typecheck(p)?;
    let root = p.root.as_ref().expect("typechecked");
    let mut ctx = Ctx {
        graph: h,
        trace: Vec::with_capacity(p.node_count()),
    };
    let value = ctx.eval(root, "root", None)?;
    Ok(Execution { value, trace: ctx.trace })
}
