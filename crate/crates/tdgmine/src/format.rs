//! The `.trace` text format for proof corpora.
//!
//! ```text
//! # comment
//! tactic newTac [h:h, g:g, h:hp] -> [h:h2] {
//!   apply [h:h, h:hp] -> [h:h2]
//!   exact [h:h2, g:g] -> []
//! }
//! proof example {
//!   init [g:g0]
//!   intro [g:g0] -> [h:H, g:g1]
//!   "rewrite <-" [h:H, g:g1] -> [g:g2]
//!   ...
//! }
//! ```
//!
//! Names are runs of letters, digits and underscores, or double-quoted
//! strings with `\"` and `\\` escapes.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use tdgmine_core::{Corpus, ElementId, Invocation, Kind, ProofScript, TacticDef};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: expected {expected}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("{line}:{col}: identifier {id} is introduced twice in {owner}")]
    DuplicateId {
        line: usize,
        col: usize,
        owner: String,
        id: String,
    },
    #[error("{line}:{col}: proof {name} is defined twice")]
    DuplicateProofName {
        line: usize,
        col: usize,
        name: String,
    },
    #[error("{line}:{col}: tactic {name} is defined twice")]
    DuplicateTacticName {
        line: usize,
        col: usize,
        name: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Str(String),
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Arrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Str(s) => format!("{s:?}"),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    col: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next();
        if c == Some('\n') {
            self.line += 1;
            self.col = 1;
        } else if c.is_some() {
            self.col += 1;
        }
        c
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }
}

fn syntax(pos: Pos, expected: &str) -> ParseError {
    ParseError::Syntax {
        line: pos.line,
        col: pos.col,
        expected: expected.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    while let Some(c) = cur.peek() {
        let pos = cur.pos();
        match c {
            c if c.is_whitespace() => {
                cur.bump();
            }
            '#' => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            }
            '[' | ']' | '{' | '}' | ',' | ':' => {
                cur.bump();
                let t = match c {
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    _ => Tok::Colon,
                };
                out.push((t, pos));
            }
            '-' => {
                cur.bump();
                if cur.peek() != Some('>') {
                    return Err(syntax(cur.pos(), "`>` after `-`"));
                }
                cur.bump();
                out.push((Tok::Arrow, pos));
            }
            '"' => {
                cur.bump();
                let mut s = String::new();
                loop {
                    let at = cur.pos();
                    match cur.bump() {
                        None => return Err(syntax(at, "closing `\"`")),
                        Some('"') => break,
                        Some('\\') => match cur.bump() {
                            Some(e @ ('"' | '\\')) => s.push(e),
                            _ => return Err(syntax(at, "`\\\"` or `\\\\` escape")),
                        },
                        Some('\n') => return Err(syntax(at, "closing `\"` before end of line")),
                        Some(ch) => s.push(ch),
                    }
                }
                if s.is_empty() {
                    return Err(syntax(pos, "a nonempty name"));
                }
                out.push((Tok::Str(s), pos));
            }
            c if is_name_char(c) => {
                let mut w = String::new();
                while let Some(c) = cur.peek().filter(|&c| is_name_char(c)) {
                    w.push(c);
                    cur.bump();
                }
                out.push((Tok::Word(w), pos));
            }
            _ => return Err(syntax(pos, "a name, bracket, brace, comma, `->` or `#`")),
        }
    }
    out.push((Tok::Eof, cur.pos()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

/// Tracks introduced names inside one proof or tactic.
struct Fresh<'a> {
    owner: &'a str,
    seen: BTreeSet<String>,
}

impl Fresh<'_> {
    fn introduce(&mut self, id: &ElementId, pos: Pos) -> Result<(), ParseError> {
        if self.seen.insert(id.name.clone()) {
            Ok(())
        } else {
            Err(ParseError::DuplicateId {
                line: pos.line,
                col: pos.col,
                owner: self.owner.to_string(),
                id: id.to_string(),
            })
        }
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        let pos = self.pos();
        Err(ParseError::Syntax {
            line: pos.line,
            col: pos.col,
            expected: format!("{expected}, found {}", self.peek().describe()),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<Pos, ParseError> {
        if *self.peek() == t {
            Ok(self.next().1)
        } else {
            self.fail(&t.describe())
        }
    }

    fn keyword(&mut self, k: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Word(w) if w == k => {
                self.next();
                Ok(())
            }
            _ => self.fail(&format!("`{k}`")),
        }
    }

    fn name(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Word(w) | Tok::Str(w) => {
                let pos = self.next().1;
                Ok((w, pos))
            }
            _ => self.fail(what),
        }
    }

    fn id(&mut self) -> Result<(ElementId, Pos), ParseError> {
        let pos = self.pos();
        let kind = match self.peek() {
            Tok::Word(w) if w == "g" => Kind::Goal,
            Tok::Word(w) if w == "h" => Kind::Hypothesis,
            _ => return self.fail("an identifier starting with `g:` or `h:`"),
        };
        self.next();
        self.expect(Tok::Colon)?;
        let (name, _) = self.name("an identifier name")?;
        Ok((ElementId { kind, name }, pos))
    }

    fn idlist(&mut self) -> Result<Vec<(ElementId, Pos)>, ParseError> {
        self.expect(Tok::LBracket)?;
        let mut ids = Vec::new();
        if *self.peek() == Tok::RBracket {
            self.next();
            return Ok(ids);
        }
        loop {
            ids.push(self.id()?);
            match self.peek() {
                Tok::Comma => {
                    self.next();
                }
                Tok::RBracket => {
                    self.next();
                    return Ok(ids);
                }
                _ => return self.fail("`,` or `]`"),
            }
        }
    }

    fn invocation(&mut self, fresh: &mut Fresh<'_>) -> Result<Invocation, ParseError> {
        let (tactic, _) = self.name("a tactic name or `}`")?;
        let inputs = self.idlist()?.into_iter().map(|(id, _)| id).collect();
        self.expect(Tok::Arrow)?;
        let mut outputs = Vec::new();
        for (id, pos) in self.idlist()? {
            fresh.introduce(&id, pos)?;
            outputs.push(id);
        }
        Ok(Invocation {
            tactic,
            inputs,
            outputs,
        })
    }

    fn body(&mut self, fresh: &mut Fresh<'_>) -> Result<Vec<Invocation>, ParseError> {
        let mut body = Vec::new();
        while *self.peek() != Tok::RBrace {
            body.push(self.invocation(fresh)?);
        }
        self.next();
        Ok(body)
    }

    fn proof(&mut self) -> Result<(ProofScript, Pos), ParseError> {
        let (name, pos) = self.name("a proof name")?;
        self.expect(Tok::LBrace)?;
        self.keyword("init")?;
        let mut fresh = Fresh {
            owner: &name,
            seen: BTreeSet::new(),
        };
        let mut init = Vec::new();
        for (id, pos) in self.idlist()? {
            fresh.introduce(&id, pos)?;
            init.push(id);
        }
        let body = self.body(&mut fresh)?;
        Ok((ProofScript { name, init, body }, pos))
    }

    fn tactic(&mut self) -> Result<(TacticDef, Pos), ParseError> {
        let (name, pos) = self.name("a tactic name")?;
        let mut fresh = Fresh {
            owner: &name,
            seen: BTreeSet::new(),
        };
        let mut inputs = Vec::new();
        for (id, pos) in self.idlist()? {
            fresh.introduce(&id, pos)?;
            inputs.push(id);
        }
        self.expect(Tok::Arrow)?;
        let outputs = self.idlist()?.into_iter().map(|(id, _)| id).collect();
        self.expect(Tok::LBrace)?;
        let body = self.body(&mut fresh)?;
        Ok((
            TacticDef {
                name,
                inputs,
                outputs,
                body,
            },
            pos,
        ))
    }
}

/// Parses a whole corpus, checking identifier freshness and name uniqueness.
/// Abstract validity of the proofs is left to [`tdgmine_core::check_script`].
pub fn parse_corpus(text: &str) -> Result<Corpus, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let mut corpus = Corpus::default();
    let mut proof_names = BTreeSet::new();
    let mut tactic_names = BTreeSet::new();
    loop {
        match p.peek() {
            Tok::Eof => return Ok(corpus),
            Tok::Word(w) if w == "proof" => {
                p.next();
                let (proof, pos) = p.proof()?;
                if !proof_names.insert(proof.name.clone()) {
                    return Err(ParseError::DuplicateProofName {
                        line: pos.line,
                        col: pos.col,
                        name: proof.name,
                    });
                }
                corpus.proofs.push(proof);
            }
            Tok::Word(w) if w == "tactic" => {
                p.next();
                let (tactic, pos) = p.tactic()?;
                if !tactic_names.insert(tactic.name.clone()) {
                    return Err(ParseError::DuplicateTacticName {
                        line: pos.line,
                        col: pos.col,
                        name: tactic.name,
                    });
                }
                corpus.tactics.push(tactic);
            }
            _ => return p.fail("`proof`, `tactic` or end of input"),
        }
    }
}

fn push_name(out: &mut String, name: &str) {
    if !name.is_empty() && name.chars().all(is_name_char) {
        out.push_str(name);
    } else {
        out.push('"');
        for c in name.chars() {
            if c == '"' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('"');
    }
}

fn push_ids(out: &mut String, ids: &[ElementId]) {
    out.push('[');
    for (i, id) in ids.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(id.kind.prefix());
        out.push(':');
        push_name(out, &id.name);
    }
    out.push(']');
}

fn push_invocation(out: &mut String, inv: &Invocation) {
    out.push_str("  ");
    push_name(out, &inv.tactic);
    out.push(' ');
    push_ids(out, &inv.inputs);
    out.push_str(" -> ");
    push_ids(out, &inv.outputs);
    out.push('\n');
}

pub fn emit_tactic(out: &mut String, t: &TacticDef) {
    out.push_str("tactic ");
    push_name(out, &t.name);
    out.push(' ');
    push_ids(out, &t.inputs);
    out.push_str(" -> ");
    push_ids(out, &t.outputs);
    out.push_str(" {\n");
    t.body.iter().for_each(|i| push_invocation(out, i));
    out.push_str("}\n");
}

pub fn emit_proof(out: &mut String, p: &ProofScript) {
    out.push_str("proof ");
    push_name(out, &p.name);
    out.push_str(" {\n  init ");
    push_ids(out, &p.init);
    out.push('\n');
    p.body.iter().for_each(|i| push_invocation(out, i));
    out.push_str("}\n");
}

/// Canonical text: tactic definitions first, then proofs, each block
/// separated by a blank line. The empty corpus emits the empty string.
pub fn emit_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for t in &corpus.tactics {
        if !out.is_empty() {
            out.push('\n');
        }
        emit_tactic(&mut out, t);
    }
    for p in &corpus.proofs {
        if !out.is_empty() {
            out.push('\n');
        }
        emit_proof(&mut out, p);
    }
    out
}

/// Renders one identifier the way the format writes it.
pub fn format_id(id: &ElementId) -> String {
    let mut s = String::new();
    let _ = write!(s, "{}:", id.kind.prefix());
    push_name(&mut s, &id.name);
    s
}
