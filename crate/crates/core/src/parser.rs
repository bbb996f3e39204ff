//! The line-oriented `.imc` model format.
//!
//! ```text
//! # Example
//! states: s0 s1
//! set target: s1
//! s0 -> s0 (0,1)
//! s0 -> s1 (0,1)
//! s1 -> s1 [1,1]
//! ```
//!
//! Endpoints are finite decimals or fractions `p/q`. Pairs without a
//! transition line carry `[0,0]`. `#` starts a comment.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write};

use crate::error::Error;
use crate::interval::Interval;
use crate::model::Imc;
use crate::rational::{parse_literal, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical(String),
    UndeclaredState(String),
    DuplicateState(String),
    DuplicateTransition(String, String),
    DuplicateSet(String),
    DuplicateStatesLine,
    MissingStates,
    EmptyInterval(String),
    EndpointOutOfRange(String),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Lexical(msg) => write!(f, "{msg}"),
            ParseErrorKind::UndeclaredState(s) => write!(f, "undeclared state `{s}`"),
            ParseErrorKind::DuplicateState(s) => write!(f, "state `{s}` declared twice"),
            ParseErrorKind::DuplicateTransition(s, t) => {
                write!(f, "duplicate transition `{s} -> {t}`")
            }
            ParseErrorKind::DuplicateSet(s) => write!(f, "set `{s}` defined twice"),
            ParseErrorKind::DuplicateStatesLine => write!(f, "second `states:` line"),
            ParseErrorKind::MissingStates => write!(f, "missing `states:` line"),
            ParseErrorKind::EmptyInterval(iv) => write!(f, "empty interval {iv}"),
            ParseErrorKind::EndpointOutOfRange(x) => write!(f, "endpoint {x} outside [0,1]"),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub source: String,
    pub target: String,
    pub interval: Interval,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModelDocument {
    pub states: Vec<String>,
    /// Named state sets, in file order.
    pub sets: Vec<(String, Vec<String>)>,
    pub transitions: Vec<Transition>,
}

impl ModelDocument {
    pub fn set(&self, name: &str) -> Option<&[String]> {
        self.sets
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, members)| members.as_slice())
    }

    pub fn to_imc(&self) -> Result<Imc, Error> {
        let mut m = Imc::new(self.states.iter().cloned())?;
        for tr in &self.transitions {
            m.set_named(&tr.source, &tr.target, tr.interval.clone())?;
        }
        Ok(m)
    }

    pub fn from_imc(m: &Imc) -> Self {
        let mut transitions = Vec::with_capacity(m.edge_count());
        for s in 0..m.len() {
            for (t, iv) in m.row(s) {
                transitions.push(Transition {
                    source: m.name(s).to_string(),
                    target: m.name(*t).to_string(),
                    interval: iv.clone(),
                });
            }
        }
        ModelDocument {
            states: m.states().to_vec(),
            sets: Vec::new(),
            transitions,
        }
    }
}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    line: usize,
    text: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Cursor {
            chars: text.char_indices().collect(),
            pos: 0,
            line,
            text,
        }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column(),
            kind,
        }
    }

    fn lexical(&self, msg: impl Into<String>) -> ParseError {
        self.error(ParseErrorKind::Lexical(msg.into()))
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn slice(&self, from: usize, to: usize) -> &'a str {
        let start = self.chars.get(from).map_or(self.text.len(), |&(i, _)| i);
        let end = self.chars.get(to).map_or(self.text.len(), |&(i, _)| i);
        &self.text[start..end]
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(&pred) {
            self.pos += 1;
        }
        self.slice(start, self.pos)
    }

    /// Identifier with its column.
    fn ident(&mut self) -> Result<(String, usize), ParseError> {
        self.skip_ws();
        let column = self.column();
        let id = self.take_while(|c| c.is_alphanumeric() || c == '_');
        if id.is_empty() {
            return Err(self.lexical("expected a state identifier"));
        }
        Ok((id.to_string(), column))
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        self.skip_ws();
        if self.slice(self.pos, self.pos + token.chars().count()) == token {
            self.pos += token.chars().count();
            Ok(())
        } else {
            Err(self.lexical(format!("expected `{token}`")))
        }
    }

    fn peek_is(&mut self, token: &str) -> bool {
        self.skip_ws();
        self.slice(self.pos, self.pos + token.chars().count()) == token
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let text = self.take_while(|c| c.is_ascii_digit() || c == '.' || c == '/');
        parse_literal(text).map_err(|msg| {
            let mut err = self.lexical(format!("bad number `{text}`: {msg}"));
            err.column = start + 1;
            err
        })
    }

    fn interval(&mut self) -> Result<Interval, ParseError> {
        self.skip_ws();
        let column = self.column();
        let lo_open = match self.peek() {
            Some('[') => false,
            Some('(') => true,
            _ => return Err(self.lexical("expected `[` or `(`")),
        };
        self.pos += 1;
        let lo = self.rational()?;
        self.expect(",")?;
        let hi = self.rational()?;
        self.skip_ws();
        let hi_open = match self.peek() {
            Some(']') => false,
            Some(')') => true,
            _ => return Err(self.lexical("expected `]` or `)`")),
        };
        self.pos += 1;
        let at = |kind| ParseError {
            line: self.line,
            column,
            kind,
        };
        Interval::new(lo.clone(), hi.clone(), lo_open, hi_open).map_err(|e| match e {
            Error::EndpointOutOfRange(x) => at(ParseErrorKind::EndpointOutOfRange(x)),
            _ => at(ParseErrorKind::EmptyInterval(format!(
                "{}{},{}{}",
                if lo_open { '(' } else { '[' },
                lo,
                hi,
                if hi_open { ')' } else { ']' }
            ))),
        })
    }
}

struct Located {
    name: String,
    line: usize,
    column: usize,
}

pub fn parse_model(text: &str) -> Result<ModelDocument, ParseError> {
    let mut doc = ModelDocument::default();
    let mut states_line: Option<usize> = None;
    let mut references: Vec<Located> = Vec::new();
    let mut seen_pairs: HashSet<(String, String)> = HashSet::new();
    let mut set_names: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let content = raw.split('#').next().unwrap_or("");
        let mut cur = Cursor::new(content, line_no);
        if cur.at_end() {
            continue;
        }
        let (head, head_col) = cur.ident()?;

        if head == "states" && cur.peek_is(":") {
            cur.expect(":")?;
            if states_line.is_some() {
                return Err(ParseError {
                    line: line_no,
                    column: head_col,
                    kind: ParseErrorKind::DuplicateStatesLine,
                });
            }
            states_line = Some(line_no);
            let mut declared = HashSet::new();
            while !cur.at_end() {
                let (name, col) = cur.ident()?;
                if !declared.insert(name.clone()) {
                    return Err(ParseError {
                        line: line_no,
                        column: col,
                        kind: ParseErrorKind::DuplicateState(name),
                    });
                }
                doc.states.push(name);
            }
            continue;
        }

        if head == "set" && !cur.peek_is("->") {
            let (name, name_col) = cur.ident()?;
            cur.expect(":")?;
            if !set_names.insert(name.clone()) {
                return Err(ParseError {
                    line: line_no,
                    column: name_col,
                    kind: ParseErrorKind::DuplicateSet(name),
                });
            }
            let mut members = Vec::new();
            while !cur.at_end() {
                let (member, col) = cur.ident()?;
                references.push(Located {
                    name: member.clone(),
                    line: line_no,
                    column: col,
                });
                members.push(member);
            }
            doc.sets.push((name, members));
            continue;
        }

        cur.expect("->")?;
        let (target, target_col) = cur.ident()?;
        let interval = cur.interval()?;
        if !cur.at_end() {
            return Err(cur.lexical("unexpected text after interval"));
        }
        references.push(Located {
            name: head.clone(),
            line: line_no,
            column: head_col,
        });
        references.push(Located {
            name: target.clone(),
            line: line_no,
            column: target_col,
        });
        if !seen_pairs.insert((head.clone(), target.clone())) {
            return Err(ParseError {
                line: line_no,
                column: head_col,
                kind: ParseErrorKind::DuplicateTransition(head, target),
            });
        }
        doc.transitions.push(Transition {
            source: head,
            target,
            interval,
        });
    }

    if states_line.is_none() {
        return Err(ParseError {
            line: 1,
            column: 1,
            kind: ParseErrorKind::MissingStates,
        });
    }
    let declared: HashMap<&str, ()> = doc.states.iter().map(|s| (s.as_str(), ())).collect();
    if let Some(bad) = references
        .iter()
        .find(|r| !declared.contains_key(r.name.as_str()))
    {
        return Err(ParseError {
            line: bad.line,
            column: bad.column,
            kind: ParseErrorKind::UndeclaredState(bad.name.clone()),
        });
    }
    Ok(doc)
}

/// Canonical text: states, sets, then transitions; rationals as `p/q`.
pub fn emit_model(doc: &ModelDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "states: {}", doc.states.join(" "));
    for (name, members) in &doc.sets {
        if members.is_empty() {
            let _ = writeln!(out, "set {name}:");
        } else {
            let _ = writeln!(out, "set {name}: {}", members.join(" "));
        }
    }
    for tr in &doc.transitions {
        let _ = writeln!(out, "{} -> {} {}", tr.source, tr.target, tr.interval);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    const FIG1: &str = "states: s0 s1\ns0 -> s0 (0,1)\ns0 -> s1 (0,1)\ns1 -> s1 [1,1]\n";
    const FIG2: &str = "# three states\r\nstates: s0 s1 s2\r\nset goal: s2\r\n\
        s0 -> s0 (0,0.6)\r\ns0 -> s1 (0.5,1)\r\ns1 -> s0 [0.6,0.8]\r\n\
        s1 -> s1 [0,0.5]\r\ns1 -> s2 (0,0.2]   # exit\r\ns2 -> s2 [1,1]\r\n";

    fn only(text: &str) -> Transition {
        let doc = parse_model(&format!("states: s0 s1 s2\n{text}\n")).unwrap();
        doc.transitions.into_iter().next().unwrap()
    }

    fn err(text: &str) -> ParseError {
        parse_model(text).unwrap_err()
    }

    #[test]
    fn parses_interval_labels() {
        let tr = only("s0 -> s1 (0,1)");
        assert_eq!(
            tr.interval,
            Interval::new(int(0), int(1), true, true).unwrap()
        );
        let tr = only("s1 -> s2 (0,0.2]");
        assert_eq!(
            tr.interval,
            Interval::new(int(0), ratio(1, 5), true, false).unwrap()
        );
        let tr = only("s1 -> s2 [ 3/5 , 4/5 ]");
        assert_eq!(
            tr.interval,
            Interval::closed(ratio(3, 5), ratio(4, 5)).unwrap()
        );
    }

    #[test]
    fn parses_fixtures() {
        let d1 = parse_model(FIG1).unwrap();
        assert_eq!(d1.states, vec!["s0", "s1"]);
        assert_eq!(d1.transitions.len(), 3);
        let d2 = parse_model(FIG2).unwrap();
        assert_eq!(d2.transitions.len(), 6);
        assert_eq!(d2.set("goal"), Some(&["s2".to_string()][..]));
        assert!(d2.to_imc().unwrap().well_formed().is_well_formed());
    }

    #[test]
    fn rejects_bad_input() {
        let e = err("states: s0 s1\ns0 -> s1 (0.5,0.2]\n");
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, ParseErrorKind::EmptyInterval(_)));
        let e = err("states: s0 s1\n\ns0 -> s9 [0,1]\n");
        assert_eq!((e.line, e.column), (3, 7));
        assert_eq!(e.kind, ParseErrorKind::UndeclaredState("s9".into()));
        let e = err("states: s0\ns0 -> s0 [1,1]\ns0 -> s0 [1,1]\n");
        assert_eq!(e.line, 3);
        assert!(matches!(e.kind, ParseErrorKind::DuplicateTransition(..)));
        let e = err("states: s0\ns0 -> s0 [0,1.5]\n");
        assert!(matches!(e.kind, ParseErrorKind::EndpointOutOfRange(_)));
        let e = err("states: s0\ns0 => s0 [1,1]\n");
        assert_eq!((e.line, e.column), (2, 4));
        assert!(matches!(e.kind, ParseErrorKind::Lexical(_)));
        let e = err("states: s0\ns0 -> s0 [1,1] extra\n");
        assert!(matches!(e.kind, ParseErrorKind::Lexical(_)));
        let e = err("states: s0\ns0 -> s0 [1e0,1]\n");
        assert_eq!((e.line, e.column), (2, 12));
        assert!(matches!(
            err("s0 -> s0 [1,1]\n").kind,
            ParseErrorKind::UndeclaredState(_) | ParseErrorKind::MissingStates
        ));
        assert_eq!(
            err("states: a a\n").kind,
            ParseErrorKind::DuplicateState("a".into())
        );
        assert_eq!(
            err("states: a\nstates: b\n").kind,
            ParseErrorKind::DuplicateStatesLine
        );
    }

    #[test]
    fn emits_canonical_fractions() {
        let d = parse_model("states: a b\na -> b [0.6,1]\na -> a [0,0.4]\nb -> b [1,1]\n").unwrap();
        let text = emit_model(&d);
        assert!(text.contains("a -> b [3/5,1]"), "{text}");
        assert!(!text.contains("0.6"));
        assert_eq!(parse_model(&text).unwrap(), d);
        assert_eq!(
            parse_model(&emit_model(&parse_model(FIG1).unwrap())).unwrap(),
            parse_model(FIG1).unwrap()
        );
        assert_eq!(
            parse_model(&emit_model(&parse_model(FIG2).unwrap())).unwrap(),
            parse_model(FIG2).unwrap()
        );
    }

    proptest! {
        #[test]
        fn emit_then_parse_is_identity(seed in any::<u64>(), states in 1usize..=6, denominator in 1i64..=12) {
            let m = crate::oracle::random_model(&crate::oracle::RandomModelSpec {
                states, seed, denominator, ..Default::default()
            });
            let mut doc = ModelDocument::from_imc(&m);
            doc.sets.push(("target".into(), vec![m.name(0).to_string()]));
            let back = parse_model(&emit_model(&doc)).unwrap();
            prop_assert_eq!(&back, &doc);
            prop_assert_eq!(back.to_imc().unwrap(), m);
        }
    }
}
