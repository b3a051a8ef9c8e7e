//! The functional-program DSL.
//!
//! A program is a tree of atomic operations from five families (query,
//! filter, relate, temporal, verify). Leaves are the `AllActions` source;
//! every other node consumes the values of its children plus a few literal
//! arguments (vocabulary ids or frame numbers). The textual form is
//!
//! ```text
//! program := call
//! call    := NAME '(' arglist ')'
//! arglist := (call | LITERAL) (',' (call | LITERAL))*
//! ```
//!
//! where `AllActions` appears as a bare literal. Canonical printing puts a
//! single space after each comma and no other whitespace.

mod exec;
mod parse;

pub use exec::{execute, ExecError, ExecValue, Execution, TraceEntry};
pub use parse::{parse_program, ParseError, ParseErrorKind};

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ValueType {
    ActionSet,
    ObjectSet,
    VerbSet,
    RelationSet,
    Boolean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiteralKind {
    Verb,
    Object,
    Relationship,
    Frame,
}

impl LiteralKind {
    fn accepts(self, lit: &Literal) -> bool {
        matches!(
            (self, lit),
            (LiteralKind::Frame, Literal::Int(_)) | (LiteralKind::Verb | LiteralKind::Object | LiteralKind::Relationship, Literal::Ident(_))
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpFamily {
    Query,
    Filter,
    Relate,
    Temporal,
    Verify,
}

pub struct Signature {
    pub inputs: &'static [ValueType],
    pub literals: &'static [LiteralKind],
    pub output: ValueType,
}

macro_rules! ops {
    ($($variant:ident => $name:literal, $family:ident, [$($input:ident),*], [$($lit:ident),*], $out:ident;)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Op {
            $($variant,)*
        }

        impl Op {
            pub const ALL: &'static [Op] = &[$(Op::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Op::$variant => $name,)*
                }
            }

            pub fn from_name(name: &str) -> Option<Op> {
                match name {
                    $($name => Some(Op::$variant),)*
                    _ => None,
                }
            }

            pub fn family(self) -> OpFamily {
                match self {
                    $(Op::$variant => OpFamily::$family,)*
                }
            }

            pub fn signature(self) -> Signature {
                match self {
                    $(Op::$variant => Signature {
                        inputs: &[$(ValueType::$input),*],
                        literals: &[$(LiteralKind::$lit),*],
                        output: ValueType::$out,
                    },)*
                }
            }
        }
    };
}

ops! {
    AllActions => "AllActions", Query, [], [], ActionSet;
    QueryObjects => "Query_Objects", Query, [ActionSet], [], ObjectSet;
    QueryVerbs => "Query_Verbs", Query, [ActionSet], [], VerbSet;
    QueryEarliest => "Query_Earliest", Query, [ActionSet], [], ActionSet;
    QueryLatest => "Query_Latest", Query, [ActionSet], [], ActionSet;
    QueryRelationObjects => "Query_Relation_Objects", Query, [RelationSet], [], ObjectSet;
    FilterActionsByVerb => "Filter_Actions_by_Verb", Filter, [ActionSet], [Verb], ActionSet;
    FilterActionsByObject => "Filter_Actions_by_Object", Filter, [ActionSet], [Object], ActionSet;
    FilterActionsByFrame => "Filter_Actions_by_Frame", Filter, [ActionSet], [Frame], ActionSet;
    FilterRelationsByPredicate => "Filter_Relations_by_Predicate", Filter, [RelationSet], [Relationship], RelationSet;
    FilterRelationsByObject => "Filter_Relations_by_Object", Filter, [RelationSet], [Object], RelationSet;
    RelateTriplets => "Relate_Triplets", Relate, [ActionSet], [], RelationSet;
    RelateActions => "Relate_Actions", Relate, [RelationSet], [], ActionSet;
    TemporalBefore => "Temporal_Before", Temporal, [ActionSet, ActionSet], [], ActionSet;
    TemporalAfter => "Temporal_After", Temporal, [ActionSet, ActionSet], [], ActionSet;
    TemporalWhile => "Temporal_While", Temporal, [ActionSet, ActionSet], [], ActionSet;
    VerifyExists => "Verify_Exists", Verify, [ActionSet], [], Boolean;
    VerifyAction => "Verify_Action", Verify, [ActionSet], [Verb, Object], Boolean;
    VerifyObject => "Verify_Object", Verify, [ObjectSet], [Object], Boolean;
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Ident(String),
    Int(i64),
}

impl Literal {
    pub fn ident(s: &str) -> Self {
        Literal::Ident(s.into())
    }

    pub fn as_ident(&self) -> Option<&str> {
        match self {
            Literal::Ident(s) => Some(s),
            Literal::Int(_) => None,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Ident(s) => f.write_str(s),
            Literal::Int(i) => write!(f, "{i}"),
        }
    }
}

/// One operation application. Value-producing children always precede the
/// literal arguments, in signature order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProgramNode {
    pub op: Op,
    pub children: Vec<ProgramNode>,
    pub args: Vec<Literal>,
}

impl ProgramNode {
    pub fn new(op: Op, children: Vec<ProgramNode>, args: Vec<Literal>) -> Self {
        Self { op, children, args }
    }

    pub fn all_actions() -> Self {
        Self::new(Op::AllActions, Vec::new(), Vec::new())
    }

    pub fn op_kind(&self) -> OpFamily {
        self.op.family()
    }

    pub fn op_name(&self) -> &'static str {
        self.op.name()
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(ProgramNode::node_count).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(ProgramNode::depth).max().unwrap_or(0)
    }

    /// Pre-order walk.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a ProgramNode)) {
        visit(self);
        for c in &self.children {
            c.walk(visit);
        }
    }

    /// Pre-order walk that also passes each node's path (`root`, `root.0`, ...).
    pub fn walk_paths<'a>(&'a self, path: &str, visit: &mut impl FnMut(&str, &'a ProgramNode)) {
        visit(path, self);
        for (i, c) in self.children.iter().enumerate() {
            c.walk_paths(&child_path(path, i), visit);
        }
    }

    /// Copy with every identifier literal passed through `f`.
    pub fn map_literals(&self, f: &mut impl FnMut(&Literal) -> Literal) -> ProgramNode {
        ProgramNode {
            op: self.op,
            children: self.children.iter().map(|c| c.map_literals(f)).collect(),
            args: self.args.iter().map(f).collect(),
        }
    }

    fn print_into(&self, out: &mut String) {
        out.push_str(self.op.name());
        if self.op == Op::AllActions {
            return;
        }
        out.push('(');
        let mut first = true;
        for c in &self.children {
            if !first {
                out.push_str(", ");
            }
            first = false;
            c.print_into(out);
        }
        for a in &self.args {
            if !first {
                out.push_str(", ");
            }
            first = false;
            let _ = write!(out, "{a}");
        }
        out.push(')');
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunctionalProgram {
    pub root: Option<ProgramNode>,
    pub declared_output_type: ValueType,
}

impl FunctionalProgram {
    /// Program whose declared output is the root operation's output type.
    pub fn new(root: ProgramNode) -> Self {
        let declared_output_type = root.op.signature().output;
        Self {
            root: Some(root),
            declared_output_type,
        }
    }

    pub fn node_count(&self) -> usize {
        self.root.as_ref().map_or(0, ProgramNode::node_count)
    }
}

impl fmt::Display for FunctionalProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_program(self))
    }
}

/// Serde adapter storing a program as its canonical text.
pub mod as_text {
    use super::{parse_program, print_program, FunctionalProgram};
    use alloc::string::String;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &FunctionalProgram, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&print_program(p))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FunctionalProgram, D::Error> {
        let text = String::deserialize(d)?;
        parse_program(&text).map_err(D::Error::custom)
    }
}

/// Canonical textual form.
pub fn print_program(p: &FunctionalProgram) -> String {
    let mut out = String::new();
    if let Some(root) = &p.root {
        root.print_into(&mut out);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("type error at {path}: {message}")]
pub struct TypeError {
    pub path: String,
    pub message: String,
}

pub(crate) fn child_path(parent: &str, i: usize) -> String {
    let mut p = String::with_capacity(parent.len() + 3);
    p.push_str(parent);
    p.push('.');
    let _ = write!(p, "{i}");
    p
}

fn check_node(node: &ProgramNode, path: &str) -> Result<ValueType, TypeError> {
    let sig = node.op.signature();
    let err = |message: String| TypeError {
        path: path.to_string(),
        message,
    };
    if node.children.len() != sig.inputs.len() || node.args.len() != sig.literals.len() {
        return Err(err(alloc::format!(
            "{} expects {} input(s) and {} literal(s), got {} and {}",
            node.op,
            sig.inputs.len(),
            sig.literals.len(),
            node.children.len(),
            node.args.len()
        )));
    }
    for (i, (child, expected)) in node.children.iter().zip(sig.inputs).enumerate() {
        let cpath = child_path(path, i);
        let got = check_node(child, &cpath)?;
        if got != *expected {
            return Err(TypeError {
                path: cpath,
                message: alloc::format!("{} expects {:?} but {} yields {:?}", node.op, expected, child.op, got),
            });
        }
    }
    for (lit, kind) in node.args.iter().zip(sig.literals) {
        if !kind.accepts(lit) {
            return Err(err(alloc::format!("literal `{lit}` is not a {kind:?}")));
        }
    }
    Ok(sig.output)
}

/// Check every node against the signature table.
pub fn typecheck(p: &FunctionalProgram) -> Result<ValueType, TypeError> {
    let root = p.root.as_ref().ok_or_else(|| TypeError {
        path: "root".into(),
        message: "empty program".into(),
    })?;
    let t = check_node(root, "root")?;
    if t != p.declared_output_type {
        return Err(TypeError {
            path: "root".into(),
            message: alloc::format!("declared {:?} but program yields {:?}", p.declared_output_type, t),
        });
    }
    Ok(t)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn op_names_round_trip() {
        for &op in Op::ALL {
            assert_eq!(Op::from_name(op.name()), Some(op));
            assert!(op.name().chars().all(|c| c.is_ascii_alphabetic() || c == '_'));
        }
    }

    #[test]
    fn query_verbs_on_objects_is_type_error() {
        let p = FunctionalProgram::new(ProgramNode::new(
            Op::QueryVerbs,
            vec![ProgramNode::new(Op::QueryObjects, vec![ProgramNode::all_actions()], vec![])],
            vec![],
        ));
        let err = typecheck(&p).unwrap_err();
        assert_eq!(err.path, "root.0");
    }

    #[test]
    fn empty_program() {
        let p = FunctionalProgram {
            root: None,
            declared_output_type: ValueType::Boolean,
        };
        assert_eq!(typecheck(&p).unwrap_err().message, "empty program");
    }

    #[test]
    fn deep_nesting_prints_balanced() {
        let mut node = ProgramNode::all_actions();
        for _ in 0..11 {
            node = ProgramNode::new(Op::FilterActionsByVerb, vec![node], vec![Literal::ident("take")]);
        }
        let p = FunctionalProgram::new(node);
        assert_eq!(p.root.as_ref().unwrap().depth(), 12);
        let text = print_program(&p);
        let mut depth: i64 = 0;
        for c in text.chars() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
            assert!(depth >= 0);
        }
        assert_eq!(depth, 0);
        assert_eq!(text.matches('(').count(), 11);
    }

    const IDENTS: &[&str] = &["take", "cup", "put_down", "on", "V", "O2"];

    fn min_depth(t: ValueType) -> u32 {
        if t == ValueType::ActionSet {
            1
        } else {
            2
        }
    }

    /// Random well-typed tree producing `want`, depth at most `depth`
    /// (`depth >= min_depth(want)`).
    pub(crate) fn arb_node(want: ValueType, depth: u32) -> BoxedStrategy<ProgramNode> {
        let producers: Vec<Op> = Op::ALL
            .iter()
            .copied()
            .filter(|op| op.signature().output == want)
            .filter(|op| op.signature().inputs.iter().all(|&t| min_depth(t) < depth))
            .collect();
        proptest::sample::select(producers)
            .prop_flat_map(move |op| {
                let sig = op.signature();
                let children: Vec<_> = sig.inputs.iter().map(|&t| arb_node(t, depth - 1)).collect();
                let lits: Vec<_> = sig
                    .literals
                    .iter()
                    .map(|k| match k {
                        LiteralKind::Frame => (0i64..500).prop_map(Literal::Int).boxed(),
                        _ => proptest::sample::select(IDENTS).prop_map(Literal::ident).boxed(),
                    })
                    .collect();
                (children, lits).prop_map(move |(children, args)| ProgramNode::new(op, children, args))
            })
            .boxed()
    }

    /// Random printable program (the root is always a call).
    pub(crate) fn arb_program(depth: u32) -> impl Strategy<Value = FunctionalProgram> {
        proptest::sample::select(vec![
            ValueType::ActionSet,
            ValueType::ObjectSet,
            ValueType::VerbSet,
            ValueType::RelationSet,
            ValueType::Boolean,
        ])
        .prop_flat_map(move |t| arb_node(t, depth))
        .prop_filter("root must be a call", |n| n.op != Op::AllActions)
        .prop_map(FunctionalProgram::new)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn print_parse_round_trip(p in arb_program(6)) {
            prop_assert!(p.root.as_ref().unwrap().depth() <= 6);
            prop_assert!(typecheck(&p).is_ok());
            let text = print_program(&p);
            let back = parse_program(&text).unwrap();
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(print_program(&back), text);
        }
    }
}
