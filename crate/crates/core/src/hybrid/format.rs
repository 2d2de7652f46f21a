//! Native text format.
//!
//! ```text
//! vars: x;
//! actions: off, on;
//! location heat_on { flow: x' = 5 - 0.1 * x; x <= 22; }
//! location heat_off { flow: x' = -0.1 * x; x >= 18; }
//! edge heat_on -off-> heat_off { reset: x = ~x; ~x >= 21; }
//! edge heat_off -on-> heat_on { reset: ~x <= 19; x = ~x; }
//! init: heat_off;
//! final: heat_on;
//! ```
//!
//! `vars:` and `actions:` come first; locations must be declared before
//! they are referenced. `#` starts a line comment. The split action is
//! written `__T`. Inputs are assumed free of Zeno behaviour; nothing here
//! checks it.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::{BuchiHybridAutomaton, HybridAutomaton, HybridError};
use crate::constraint::{parse_flow, parse_jump};
use crate::formula::Action;
use crate::syntax::Cursor;

fn write_list<T: ToString>(out: &mut String, items: impl IntoIterator<Item = T>) {
    let items: Vec<String> = items.into_iter().map(|t| t.to_string()).collect();
    out.push_str(&items.join(", "));
}

fn write_body<T: std::fmt::Display>(out: &mut String, key: &str, items: &BTreeSet<T>) {
    if items.is_empty() {
        out.push_str(" { }\n");
        return;
    }
    let _ = write!(out, " {{\n  {key}:");
    for c in items {
        let _ = write!(out, " {c};");
    }
    out.push_str("\n}\n");
}

fn write_ha(h: &HybridAutomaton, finals: Option<&BTreeSet<usize>>) -> String {
    let mut out = String::from("vars: ");
    write_list(&mut out, h.vars());
    out.push_str(";\nactions: ");
    write_list(&mut out, h.actions().iter().map(Action::name));
    out.push_str(";\n\n");
    for l in 0..h.num_locations() {
        let _ = write!(out, "location {}", h.name(l));
        write_body(&mut out, "flow", h.dynamics(l));
    }
    if !h.edges().is_empty() {
        out.push('\n');
    }
    for e in h.edges() {
        let _ = write!(out, "edge {} -{}-> {}", h.name(e.src), e.action.name(), h.name(e.dst));
        write_body(&mut out, "reset", &e.reset);
    }
    out.push_str("\ninit: ");
    write_list(&mut out, h.init().iter().map(|&l| h.name(l)));
    out.push_str(";\n");
    if let Some(finals) = finals {
        out.push_str("final: ");
        write_list(&mut out, finals.iter().map(|&l| h.name(l)));
        out.push_str(";\n");
    }
    out
}

pub fn export_ha(h: &HybridAutomaton) -> String {
    write_ha(h, None)
}

/// Same as [`export_ha`] plus the `final:` section.
pub fn export_bha(h: &BuchiHybridAutomaton) -> String {
    write_ha(h.ha(), Some(h.finals()))
}

/// Reads an automaton without a `final:` section.
pub fn parse_ha(text: &str) -> Result<HybridAutomaton, HybridError> {
    let (h, finals) = parse(text)?;
    if let Some(pos) = finals {
        return Err(Cursor::new(text)
            .error_at(pos, "`final:` is only allowed in Büchi hybrid automata")
            .into());
    }
    Ok(h.into_ha())
}

/// Reads an automaton; without `final:` no location is final.
pub fn parse_bha(text: &str) -> Result<BuchiHybridAutomaton, HybridError> {
    parse(text).map(|(h, _)| h)
}

fn name_list<'a>(cur: &mut Cursor<'a>, what: &str) -> Result<Vec<(&'a str, usize)>, HybridError> {
    let mut out = Vec::new();
    if cur.eat(";") {
        return Ok(out);
    }
    loop {
        cur.skip_ws();
        let pos = cur.pos();
        out.push((cur.expect_ident(what)?, pos));
        if cur.eat(";") {
            return Ok(out);
        }
        cur.expect(",")?;
    }
}

fn lookup(cur: &Cursor<'_>, h: &HybridAutomaton, name: &str, pos: usize) -> Result<usize, HybridError> {
    h.location(name)
        .ok_or_else(|| cur.error_at(pos, format!("unknown location `{name}`")).into())
}

/// Parses `{ }` or `{ key: c; c; }` with `item` reading one constraint.
fn body<T>(
    cur: &mut Cursor<'_>,
    key: &str,
    mut item: impl FnMut(&mut Cursor<'_>) -> Result<T, HybridError>,
) -> Result<Vec<T>, HybridError> {
    cur.expect("{")?;
    let mut out = Vec::new();
    if cur.eat("}") {
        return Ok(out);
    }
    cur.expect(key)?;
    cur.expect(":")?;
    while !cur.eat("}") {
        out.push(item(cur)?);
        cur.expect(";")?;
    }
    Ok(out)
}

/// Returns the automaton and the offset of the `final:` keyword, if any.
fn parse(text: &str) -> Result<(BuchiHybridAutomaton, Option<usize>), HybridError> {
    let mut cur = Cursor::new(text);
    cur.expect("vars")?;
    cur.expect(":")?;
    let vars: BTreeSet<String> = name_list(&mut cur, "variable name")?
        .into_iter()
        .map(|(v, _)| v.to_string())
        .collect();
    cur.expect("actions")?;
    cur.expect(":")?;
    let actions = name_list(&mut cur, "action name")?;
    let mut h = HybridAutomaton::new(vars.iter().cloned(), actions.iter().map(|(a, _)| Action::new(a)));
    let mut finals = Vec::new();
    let mut final_pos = None;
    while !cur.at_end() {
        let start = cur.pos();
        let kw = cur.expect_ident("`location`, `edge`, `init` or `final`")?;
        match kw {
            "location" => {
                cur.skip_ws();
                let pos = cur.pos();
                let name = cur.expect_ident("location name")?;
                if h.location(name).is_some() {
                    return Err(cur.error_at(pos, format!("location `{name}` is declared twice")).into());
                }
                let dynamics = body(&mut cur, "flow", |c| Ok(parse_flow(c, Some(&vars))?))?;
                h.add_location(name, dynamics)?;
            }
            "edge" => {
                cur.skip_ws();
                let spos = cur.pos();
                let src = cur.expect_ident("location name")?;
                let src = lookup(&cur, &h, src, spos)?;
                cur.expect("-")?;
                cur.skip_ws();
                let apos = cur.pos();
                let action = Action::new(cur.expect_ident("action name")?);
                cur.expect("->")?;
                cur.skip_ws();
                let dpos = cur.pos();
                let dst = cur.expect_ident("location name")?;
                let dst = lookup(&cur, &h, dst, dpos)?;
                let reset = body(&mut cur, "reset", |c| Ok(parse_jump(c, Some(&vars))?))?;
                match h.add_edge(src, action, dst, reset) {
                    Err(HybridError::UndeclaredAction(a)) => {
                        return Err(cur.error_at(apos, format!("action `{a}` is not declared")).into())
                    }
                    Err(HybridError::DuplicateEdge(..)) => {
                        return Err(cur.error_at(start, "edge is declared twice").into())
                    }
                    other => other?,
                }
            }
            "init" | "final" => {
                cur.expect(":")?;
                if kw == "final" {
                    final_pos.get_or_insert(start);
                }
                for (name, pos) in name_list(&mut cur, "location name")? {
                    let l = lookup(&cur, &h, name, pos)?;
                    if kw == "init" {
                        h.add_init(l)?;
                    } else {
                        finals.push(l);
                    }
                }
            }
            other => {
                return Err(cur
                    .error_at(start, format!("expected `location`, `edge`, `init` or `final`, found `{other}`"))
                    .into())
            }
        }
    }
    let mut bha = BuchiHybridAutomaton::new(h);
    for l in finals {
        bha.add_final(l)?;
    }
    Ok((bha, final_pos))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn thermostat_round_trip() {
        let h = thermostat();
        let text = export_ha(&h);
        assert_eq!(parse_ha(&text).unwrap(), h);
        assert!(text.contains("edge heat_on -off-> heat_off {\n  reset: x = ~x; ~x >= 21;\n}"));
    }

    #[test]
    fn bha_round_trip_with_split() {
        let mut h = HybridAutomaton::new(["x"], [Action::new("a"), Action::split()]);
        let l = h.add_location("l", []).unwrap();
        let m = h.add_location("m", [flow("x >= 1")]).unwrap();
        h.add_edge(l, Action::split(), m, []).unwrap();
        h.add_edge(m, Action::new("a"), l, []).unwrap();
        h.add_init(l).unwrap();
        let mut b = BuchiHybridAutomaton::new(h);
        b.add_final(m).unwrap();
        let text = export_bha(&b);
        assert!(text.contains("-__T->"));
        assert_eq!(parse_bha(&text).unwrap(), b);
        assert!(matches!(parse_ha(&text), Err(HybridError::Syntax(_))));
    }

    #[test]
    fn errors_carry_positions() {
        let bad = "vars: x;\nactions: a;\nlocation l { }\nedge l -a-> k { }\n";
        match parse_ha(bad) {
            Err(HybridError::Syntax(e)) => {
                assert_eq!((e.line, e.column), (4, 13));
                assert!(e.message.contains("`k`"));
            }
            other => panic!("{other:?}"),
        }
        let undeclared = "vars: x;\nactions: a;\nlocation l { flow: y >= 1; }\n";
        assert!(parse_ha(undeclared).is_err());
        let tilde = "vars: x;\nactions: a;\nlocation l { flow: ~x >= 1; }\n";
        assert!(parse_ha(tilde).is_err());
        let dup = "vars: x;\nactions: a;\nlocation l { }\nedge l -a-> l { }\nedge l -a-> l { }\n";
        assert!(matches!(parse_ha(dup), Err(HybridError::Syntax(e)) if e.line == 5));
    }
}
