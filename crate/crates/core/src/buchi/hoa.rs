//! HOA v1 reading and writing for state-based Büchi automata.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{BoolExpr, BuchiAutomaton, BuchiError, Literal, Prop};
use crate::constraint::FlowConstraint;
use crate::syntax::Cursor;

fn ap_name(p: &Prop) -> String {
    match p {
        Prop::Bit(j) => format!("b{j}"),
        Prop::Flow(c) => c.as_str().to_string(),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Writes `aut` with state-based `Inf(0)` acceptance. Atomic propositions
/// are the bit letters `b<j>` and the canonical text of flow atoms.
pub fn export_hoa(aut: &BuchiAutomaton, name: Option<&str>) -> String {
    let props: Vec<Prop> = aut.props().into_iter().collect();
    let index: BTreeMap<&Prop, usize> = props.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut s = String::new();
    s.push_str("HOA: v1\n");
    if let Some(name) = name {
        let _ = writeln!(s, "name: {}", quote(name));
    }
    let _ = writeln!(s, "States: {}", aut.num_states());
    let _ = writeln!(s, "Start: {}", aut.initial());
    let _ = write!(s, "AP: {}", props.len());
    for p in &props {
        let _ = write!(s, " {}", quote(&ap_name(p)));
    }
    s.push('\n');
    s.push_str("acc-name: Buchi\nAcceptance: 1 Inf(0)\n");
    s.push_str("properties: trans-labels explicit-labels state-acc\n");
    s.push_str("--BODY--\n");
    let succ = aut.successors();
    for q in 0..aut.num_states() {
        let _ = write!(s, "State: {} {}", q, quote(aut.name(q)));
        if aut.is_final(q) {
            s.push_str(" {0}");
        }
        s.push('\n');
        for t in &succ[q] {
            let label = t.label.render(&|p| index[p].to_string());
            let _ = writeln!(s, "[{}] {}", label.replace(' ', ""), t.dst);
        }
    }
    s.push_str("--END--\n");
    s
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Header(String),
    Str(String),
    Int(usize),
    Ident(String),
    Punct(char),
    Body,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, BuchiError> {
    let mut cur = Cursor::new(text);
    let mut out = Vec::new();
    loop {
        skip_ws_and_comments(&mut cur)?;
        if cur.rest().is_empty() {
            break;
        }
        let pos = cur.pos();
        let rest = cur.rest();
        if rest.starts_with("--BODY--") {
            cur.set_pos(pos + 8);
            out.push((pos, Tok::Body));
        } else if rest.starts_with("--END--") {
            cur.set_pos(pos + 7);
            out.push((pos, Tok::End));
        } else if rest.starts_with('"') {
            let mut value = String::new();
            let mut chars = rest.char_indices().skip(1);
            let mut end = None;
            while let Some((i, c)) = chars.next() {
                match c {
                    '"' => {
                        end = Some(i + 1);
                        break;
                    }
                    '\\' => {
                        if let Some((_, e)) = chars.next() {
                            value.push(e);
                        }
                    }
                    c => value.push(c),
                }
            }
            let Some(end) = end else {
                return Err(cur.error("unterminated string").into());
            };
            cur.set_pos(pos + end);
            out.push((pos, Tok::Str(value)));
        } else if rest.starts_with(|c: char| c.is_ascii_digit()) {
            let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            let v = rest[..len]
                .parse()
                .map_err(|_| cur.error("integer out of range"))?;
            cur.set_pos(pos + len);
            out.push((pos, Tok::Int(v)));
        } else if let Some(id) = ident_like(rest) {
            cur.set_pos(pos + id.len());
            if cur.rest().starts_with(':') {
                cur.set_pos(pos + id.len() + 1);
                out.push((pos, Tok::Header(id.to_string())));
            } else {
                out.push((pos, Tok::Ident(id.to_string())));
            }
        } else {
            let c = cur.bump().expect("nonempty");
            out.push((pos, Tok::Punct(c)));
        }
    }
    Ok(out)
}

fn ident_like(s: &str) -> Option<&str> {
    let mut end = 0;
    for (i, c) in s.char_indices() {
        let ok = if i == 0 {
            c.is_ascii_alphabetic() || c == '_' || c == '@'
        } else {
            c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.'
        };
        if !ok {
            break;
        }
        end = i + c.len_utf8();
    }
    (end > 0).then(|| &s[..end])
}

fn skip_ws_and_comments(cur: &mut Cursor<'_>) -> Result<(), BuchiError> {
    loop {
        let rest = cur.rest();
        let trimmed = rest.trim_start();
        cur.set_pos(cur.pos() + rest.len() - trimmed.len());
        if trimmed.starts_with("/*") {
            match trimmed.find("*/") {
                Some(end) => cur.set_pos(cur.pos() + end + 2),
                None => return Err(cur.error("unterminated comment").into()),
            }
        } else {
            return Ok(());
        }
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    i: usize,
    cur: Cursor<'a>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.cur.rest().len(), |t| t.0)
    }

    fn err(&self, msg: impl Into<String>) -> BuchiError {
        BuchiError::Syntax(self.cur.error_at(self.pos(), msg))
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|t| t.1.clone());
        self.i += 1;
        t
    }

    fn int(&mut self) -> Result<usize, BuchiError> {
        match self.next() {
            Some(Tok::Int(v)) => Ok(v),
            _ => {
                self.i -= 1;
                Err(self.err("expected an integer"))
            }
        }
    }

    fn punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn label_or(&mut self, aps: &[Prop]) -> Result<BoolExpr, BuchiError> {
        let mut lhs = self.label_and(aps)?;
        while self.punct('|') {
            lhs = lhs.or_expr(self.label_and(aps)?);
        }
        Ok(lhs)
    }

    fn label_and(&mut self, aps: &[Prop]) -> Result<BoolExpr, BuchiError> {
        let mut lhs = self.label_not(aps)?;
        while self.punct('&') {
            lhs = lhs.and_expr(self.label_not(aps)?);
        }
        Ok(lhs)
    }

    fn label_not(&mut self, aps: &[Prop]) -> Result<BoolExpr, BuchiError> {
        if self.punct('!') {
            return Ok(match self.label_not(aps)? {
                BoolExpr::Lit(l) => BoolExpr::Lit(l.complement()),
                e => BoolExpr::Not(Box::new(e)),
            });
        }
        if self.punct('(') {
            let e = self.label_or(aps)?;
            if !self.punct(')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(e);
        }
        match self.next() {
            Some(Tok::Ident(t)) if t == "t" => Ok(BoolExpr::True),
            Some(Tok::Ident(f)) if f == "f" => Ok(BoolExpr::False),
            Some(Tok::Ident(a)) if a.starts_with('@') => {
                Err(BuchiError::Unsupported(format!("alias `{a}`")))
            }
            Some(Tok::Int(k)) => match aps.get(k) {
                Some(p) => Ok(BoolExpr::Lit(Literal::pos(p.clone()))),
                None => {
                    self.i -= 1;
                    Err(self.err(format!("atomic proposition {k} is not declared")))
                }
            },
            _ => {
                self.i -= 1;
                Err(self.err("expected a label expression"))
            }
        }
    }
}

fn parse_ap(name: &str) -> Result<Prop, String> {
    if let Some(j) = name.strip_prefix('b').and_then(|d| d.parse::<u32>().ok()) {
        return Ok(Prop::Bit(j));
    }
    FlowConstraint::parse(name, None)
        .map(Prop::Flow)
        .map_err(|e| format!("atomic proposition `{name}` is neither a bit letter nor a flow constraint: {e}"))
}

/// Reads a HOA v1 automaton with state-based Büchi acceptance (or the
/// trivially true condition `0 t`) and a single initial state.
pub fn import_hoa(text: &str) -> Result<BuchiAutomaton, BuchiError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        i: 0,
        cur: Cursor::new(text),
    };
    match (p.next(), p.next()) {
        (Some(Tok::Header(h)), Some(Tok::Ident(v))) if h == "HOA" && v == "v1" => {}
        _ => {
            p.i = 0;
            return Err(p.err("expected `HOA: v1`"));
        }
    }
    let mut states: Option<usize> = None;
    let mut starts: Vec<usize> = Vec::new();
    let mut aps: Vec<Prop> = Vec::new();
    let mut all_final = false;
    loop {
        match p.next() {
            Some(Tok::Body) => break,
            Some(Tok::Header(h)) => match h.as_str() {
                "States" => states = Some(p.int()?),
                "Start" => {
                    starts.push(p.int()?);
                    if p.punct('&') {
                        return Err(BuchiError::Unsupported("conjunctive initial states".into()));
                    }
                }
                "AP" => {
                    let k = p.int()?;
                    for _ in 0..k {
                        match p.next() {
                            Some(Tok::Str(s)) => {
                                let prop = parse_ap(&s).map_err(|m| {
                                    p.i -= 1;
                                    p.err(m)
                                })?;
                                aps.push(prop);
                            }
                            _ => {
                                p.i -= 1;
                                return Err(p.err("expected a quoted proposition name"));
                            }
                        }
                    }
                }
                "Acceptance" => {
                    let k = p.int()?;
                    let mut cond = String::new();
                    while let Some(t) = p.peek() {
                        match t {
                            Tok::Header(_) | Tok::Body => break,
                            Tok::Ident(s) => cond.push_str(s),
                            Tok::Int(v) => cond.push_str(&v.to_string()),
                            Tok::Punct(c) => cond.push(*c),
                            _ => {}
                        }
                        p.i += 1;
                    }
                    match (k, cond.as_str()) {
                        (1, "Inf(0)") => {}
                        (0, "t") => all_final = true,
                        _ => return Err(BuchiError::UnsupportedAcceptance(format!("{k} {cond}"))),
                    }
                }
                "Alias" => return Err(BuchiError::Unsupported("aliases".into())),
                _ => {
                    while !matches!(p.peek(), Some(Tok::Header(_)) | Some(Tok::Body) | None) {
                        p.i += 1;
                    }
                }
            },
            _ => {
                p.i -= 1;
                return Err(p.err("expected a header item or `--BODY--`"));
            }
        }
    }
    let Some(n) = states else {
        return Err(p.err("missing `States:` header"));
    };
    if starts.len() != 1 {
        return Err(BuchiError::InitialStates(starts.len()));
    }
    if n == 0 || starts[0] >= n {
        return Err(BuchiError::StateOutOfRange(starts[0]));
    }
    let mut aut = BuchiAutomaton::new(n, starts[0])?;
    let mut named = BTreeSet::new();
    loop {
        match p.next() {
            Some(Tok::End) => break,
            Some(Tok::Header(h)) if h == "State" => {
                if p.peek() == Some(&Tok::Punct('[')) {
                    return Err(BuchiError::Unsupported("state labels".into()));
                }
                let q = p.int()?;
                if q >= n {
                    return Err(BuchiError::StateOutOfRange(q));
                }
                if let Some(Tok::Str(name)) = p.peek().cloned() {
                    p.i += 1;
                    if named.insert(name.clone()) {
                        aut.set_name(q, name)?;
                    }
                }
                if p.punct('{') {
                    let mut sets = Vec::new();
                    while !p.punct('}') {
                        sets.push(p.int()?);
                    }
                    aut.set_final(q, all_final || sets.contains(&0))?;
                } else {
                    aut.set_final(q, all_final)?;
                }
                while p.punct('[') {
                    let label = p.label_or(&aps)?;
                    if !p.punct(']') {
                        return Err(p.err("expected `]`"));
                    }
                    let d = p.int()?;
                    if p.punct('&') {
                        return Err(BuchiError::Unsupported("universal branching".into()));
                    }
                    if d >= n {
                        return Err(BuchiError::StateOutOfRange(d));
                    }
                    if p.peek() == Some(&Tok::Punct('{')) {
                        return Err(BuchiError::UnsupportedAcceptance("transition-based marks".into()));
                    }
                    aut.add_transition(q, label, d)?;
                }
                if let Some(Tok::Int(_)) = p.peek() {
                    return Err(BuchiError::Unsupported("implicit labels".into()));
                }
            }
            _ => {
                p.i -= 1;
                return Err(p.err("expected `State:` or `--END--`"));
            }
        }
    }
    Ok(aut)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universal_roundtrip() {
        let text = "HOA: v1\nStates: 1\nStart: 0\nAP: 0\nacc-name: Buchi\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0 {0}\n[t] 0\n--END--\n";
        let a = import_hoa(text).unwrap();
        assert_eq!(a, BuchiAutomaton::universal());
        assert_eq!(import_hoa(&export_hoa(&a, None)).unwrap(), a);
    }

    #[test]
    fn rejects_generalized_acceptance() {
        let text = "HOA: v1\nStates: 1\nStart: 0\nAP: 0\nAcceptance: 2 Inf(0)&Inf(1)\n--BODY--\nState: 0 {0 1}\n[t] 0\n--END--\n";
        assert!(matches!(import_hoa(text), Err(BuchiError::UnsupportedAcceptance(_))));
    }

    #[test]
    fn rejects_several_initial_states() {
        let text = "HOA: v1\nStates: 2\nStart: 0\nStart: 1\nAP: 0\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0\nState: 1\n--END--\n";
        assert_eq!(import_hoa(text), Err(BuchiError::InitialStates(2)));
    }

    #[test]
    fn rejects_transition_marks_and_implicit_labels() {
        let text = "HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"b0\"\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0\n[0] 0 {0}\n--END--\n";
        assert!(matches!(import_hoa(text), Err(BuchiError::UnsupportedAcceptance(_))));
        let text = "HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"b0\"\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0 {0}\n0\n--END--\n";
        assert!(matches!(import_hoa(text), Err(BuchiError::Unsupported(_))));
    }

    #[test]
    fn flow_atoms_and_syntax_errors() {
        let text = "HOA: v1\nStates: 1\nStart: 0\nAP: 2 \"b0\" \"x >= 21\"\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0 {0}\n[!0 & 1] 0\n--END--\n";
        let a = import_hoa(text).unwrap();
        assert_eq!(a.transitions()[0].label.to_string(), "!b0 & \"x >= 21\"");
        let bad = text.replace("[!0 & 1]", "[!0 & 7]");
        match import_hoa(&bad) {
            Err(BuchiError::Syntax(e)) => assert_eq!(e.line, 8),
            other => panic!("unexpected {other:?}"),
        }
    }
}
