use alloc::string::String;
use alloc::vec::Vec;

use super::{FunctionalProgram, Literal, Op, ProgramNode};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: &'static str, found: String },
    #[error("unknown operation `{0}`")]
    UnknownOperation(String),
    #[error("{op} takes {expected} argument(s), found {found}")]
    ArityMismatch { op: &'static str, expected: usize, found: usize },
    #[error("argument {index} of {op} must be {expected}")]
    ArgumentKind {
        op: &'static str,
        index: usize,
        expected: &'static str,
    },
    #[error("integer literal out of range")]
    IntOverflow,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {pos}: {kind}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Int(i64),
    Open,
    Close,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => alloc::format!("`{w}`"),
            Tok::Int(i) => alloc::format!("`{i}`"),
            Tok::Open => "`(`".into(),
            Tok::Close => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'(' => {
                out.push((i, Tok::Open));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::Close));
                i += 1;
            }
            b',' => {
                out.push((i, Tok::Comma));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let value = text[start..i].parse().map_err(|_| ParseError {
                    pos: start,
                    kind: ParseErrorKind::IntOverflow,
                })?;
                out.push((start, Tok::Int(value)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Word(text[start..i].into())));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    pos: i,
                    kind: ParseErrorKind::UnexpectedChar(ch),
                });
            }
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

enum Arg {
    Node(ProgramNode),
    Lit(Literal),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn next(&mut self) -> (usize, Tok) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, expected: &'static str) -> Result<(), ParseError> {
        let (pos, t) = self.next();
        if t == want {
            Ok(())
        } else {
            Err(ParseError {
                pos,
                kind: ParseErrorKind::Unexpected {
                    expected,
                    found: t.describe(),
                },
            })
        }
    }

    fn call(&mut self) -> Result<ProgramNode, ParseError> {
        let (pos, t) = self.next();
        let Tok::Word(name) = t else {
            return Err(ParseError {
                pos,
                kind: ParseErrorKind::Unexpected {
                    expected: "operation name",
                    found: t.describe(),
                },
            });
        };
        if name.bytes().any(|b| b.is_ascii_digit()) {
            return Err(ParseError {
                pos,
                kind: ParseErrorKind::UnknownOperation(name),
            });
        }
        self.expect(Tok::Open, "`(`")?;
        let mut args = Vec::new();
        loop {
            args.push(self.arg()?);
            match self.peek() {
                Tok::Comma => {
                    self.next();
                }
                _ => break,
            }
        }
        self.expect(Tok::Close, "`,` or `)`")?;
        let op = Op::from_name(&name).ok_or(ParseError {
            pos,
            kind: ParseErrorKind::UnknownOperation(name),
        })?;
        resolve(op, args, pos)
    }

    fn arg(&mut self) -> Result<Arg, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Word(w) => {
                if self.toks[self.at + 1].1 == Tok::Open {
                    return self.call().map(Arg::Node);
                }
                self.next();
                if w == Op::AllActions.name() {
                    Ok(Arg::Node(ProgramNode::all_actions()))
                } else {
                    Ok(Arg::Lit(Literal::Ident(w)))
                }
            }
            Tok::Int(i) => {
                self.next();
                Ok(Arg::Lit(Literal::Int(i)))
            }
            other => Err(ParseError {
                pos,
                kind: ParseErrorKind::Unexpected {
                    expected: "argument",
                    found: other.describe(),
                },
            }),
        }
    }
}

fn resolve(op: Op, args: Vec<Arg>, pos: usize) -> Result<ProgramNode, ParseError> {
    let sig = op.signature();
    let expected = sig.inputs.len() + sig.literals.len();
    if op == Op::AllActions || args.len() != expected {
        return Err(ParseError {
            pos,
            kind: ParseErrorKind::ArityMismatch {
                op: op.name(),
                expected,
                found: args.len(),
            },
        });
    }
    let mut children = Vec::with_capacity(sig.inputs.len());
    let mut lits = Vec::with_capacity(sig.literals.len());
    for (index, arg) in args.into_iter().enumerate() {
        let want_node = index < sig.inputs.len();
        match (arg, want_node) {
            (Arg::Node(n), true) => children.push(n),
            (Arg::Lit(l), false) => lits.push(l),
            (_, want_node) => {
                return Err(ParseError {
                    pos,
                    kind: ParseErrorKind::ArgumentKind {
                        op: op.name(),
                        index,
                        expected: if want_node { "a program input" } else { "a literal" },
                    },
                })
            }
        }
    }
    Ok(ProgramNode::new(op, children, lits))
}

/// Parse a program sentence. Literal kinds and input types are checked later
/// by [`super::typecheck`]; arity and input/literal placement are checked here.
pub fn parse_program(text: &str) -> Result<FunctionalProgram, ParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let root = p.call()?;
    let (pos, t) = p.next();
    if t != Tok::End {
        return Err(ParseError {
            pos,
            kind: ParseErrorKind::Unexpected {
                expected: "end of input",
                found: t.describe(),
            },
        });
    }
    Ok(FunctionalProgram::new(root))
}
