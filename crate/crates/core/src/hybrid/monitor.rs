//! PhaVer-style automaton blocks for external reachability tools.
//!
//! ```text
//! automaton product
//! contr_var: x;
//! synclabs: off, on;
//! loc heat_on: while x <= 22 wait {x' == 5 - 0.1 * x};
//!   when x >= 21 sync off do {x' == x} goto heat_off;
//! initially: heat_on & true;
//! end
//! // final: heat_on;
//! ```
//!
//! In `when` guards and `do` blocks a plain variable is the value before the
//! jump and a primed one the value after it. Edges are listed under their
//! source location, so reading a block back reorders edges by source.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::{BuchiHybridAutomaton, HybridAutomaton, HybridError};
use crate::constraint::{parse_flow, ArithExpr, FlowConstraint, JumpConstraint, Relation, VarKind};
use crate::formula::Action;
use crate::syntax::Cursor;

fn rel(r: Relation) -> &'static str {
    match r {
        Relation::Eq => "==",
        other => other.symbol(),
    }
}

fn conj(items: Vec<String>) -> String {
    if items.is_empty() {
        "true".to_string()
    } else {
        items.join(" & ")
    }
}

fn jump_text(c: &JumpConstraint) -> String {
    let f = |k: VarKind| match k {
        VarKind::Tilde => VarKind::Plain,
        _ => VarKind::Dotted,
    };
    format!("{} {} {}", c.lhs().map_kinds(&f), rel(c.rel()), c.rhs().map_kinds(&f))
}

fn flow_text(c: &FlowConstraint) -> String {
    format!("{} {} {}", c.lhs(), rel(c.rel()), c.rhs())
}

fn has_kind(vars: BTreeSet<crate::constraint::VarRef>, kind: VarKind) -> bool {
    vars.iter().any(|v| v.kind == kind)
}

pub fn export_monitor(h: &BuchiHybridAutomaton, name: &str) -> Result<String, HybridError> {
    if h.num_locations() == 0 {
        return Err(HybridError::NoLocations);
    }
    if h.init().is_empty() {
        return Err(HybridError::NoInitial);
    }
    let mut s = format!("automaton {name}\ncontr_var: ");
    s.push_str(&h.vars().iter().cloned().collect::<Vec<_>>().join(", "));
    s.push_str(";\nsynclabs: ");
    s.push_str(&h.actions().iter().map(Action::name).collect::<Vec<_>>().join(", "));
    s.push_str(";\n");
    let succ = h.successors();
    for l in 0..h.num_locations() {
        let (wait, inv): (Vec<_>, Vec<_>) = h
            .dynamics(l)
            .iter()
            .partition(|c| has_kind(c.variables(), VarKind::Dotted));
        let _ = writeln!(
            s,
            "loc {}: while {} wait {{{}}};",
            h.name(l),
            conj(inv.into_iter().map(flow_text).collect()),
            conj(wait.into_iter().map(flow_text).collect())
        );
        for e in &succ[l] {
            let (guard, reset): (Vec<_>, Vec<_>) =
                e.reset.iter().partition(|c| !has_kind(c.variables(), VarKind::Plain));
            let _ = writeln!(
                s,
                "  when {} sync {} do {{{}}} goto {};",
                conj(guard.into_iter().map(jump_text).collect()),
                e.action.name(),
                conj(reset.into_iter().map(jump_text).collect()),
                h.name(e.dst)
            );
        }
    }
    let inits: Vec<String> = h.init().iter().map(|&l| format!("{} & true", h.name(l))).collect();
    let _ = writeln!(s, "initially: {};", inits.join(", "));
    s.push_str("end\n");
    let finals: Vec<&str> = h.finals().iter().map(|&l| h.name(l)).collect();
    let _ = writeln!(s, "// final: {};", finals.join(", "));
    Ok(s)
}

struct RawEdge {
    src: usize,
    action: String,
    dst: (String, usize),
    reset: Vec<JumpConstraint>,
}

/// `true` or constraints joined by `&`, each rewritten through `map`.
fn conjunction(
    cur: &mut Cursor<'_>,
    vars: &BTreeSet<String>,
    map: Option<&dyn Fn(VarKind) -> VarKind>,
) -> Result<Vec<(ArithExpr, Relation, ArithExpr)>, HybridError> {
    let mut out = Vec::new();
    if cur.peek_ident() == Some("true") {
        cur.ident();
        return Ok(out);
    }
    loop {
        let c = parse_flow(cur, Some(vars))?;
        let (l, r) = match map {
            Some(f) => (c.lhs().map_kinds(&f), c.rhs().map_kinds(&f)),
            None => (c.lhs().clone(), c.rhs().clone()),
        };
        out.push((l, c.rel(), r));
        if !cur.eat("&") {
            return Ok(out);
        }
    }
}

fn names<'a>(cur: &mut Cursor<'a>, what: &str) -> Result<Vec<&'a str>, HybridError> {
    let mut out = Vec::new();
    if cur.eat(";") {
        return Ok(out);
    }
    loop {
        out.push(cur.expect_ident(what)?);
        if cur.eat(";") {
            return Ok(out);
        }
        cur.expect(",")?;
    }
}

/// Reads a block written by [`export_monitor`].
pub fn parse_monitor(text: &str) -> Result<BuchiHybridAutomaton, HybridError> {
    let mut cur = Cursor::new(text);
    cur.expect("automaton")?;
    cur.expect_ident("automaton name")?;
    cur.expect("contr_var")?;
    cur.expect(":")?;
    let vars: BTreeSet<String> = names(&mut cur, "variable name")?.into_iter().map(String::from).collect();
    cur.expect("synclabs")?;
    cur.expect(":")?;
    let actions: Vec<Action> = names(&mut cur, "action name")?.into_iter().map(Action::new).collect();
    let mut h = HybridAutomaton::new(vars.iter().cloned(), actions);

    let pre_post = |k: VarKind| match k {
        VarKind::Plain => VarKind::Tilde,
        _ => VarKind::Plain,
    };
    let mut edges = Vec::new();
    let mut index = BTreeMap::new();
    while cur.peek_ident() == Some("loc") {
        cur.ident();
        cur.skip_ws();
        let pos = cur.pos();
        let name = cur.expect_ident("location name")?;
        if index.contains_key(name) {
            return Err(cur.error_at(pos, format!("location `{name}` is declared twice")).into());
        }
        cur.expect(":")?;
        cur.expect("while")?;
        let mut dynamics = conjunction(&mut cur, &vars, None)?;
        cur.expect("wait")?;
        cur.expect("{")?;
        dynamics.extend(conjunction(&mut cur, &vars, None)?);
        cur.expect("}")?;
        cur.expect(";")?;
        let dynamics = dynamics
            .into_iter()
            .map(|(l, r, rhs)| FlowConstraint::new(l, r, rhs))
            .collect::<Result<Vec<_>, _>>()?;
        let src = h.add_location(name, dynamics)?;
        index.insert(name.to_string(), src);
        while cur.peek_ident() == Some("when") {
            cur.ident();
            let mut reset = conjunction(&mut cur, &vars, Some(&|k| match k {
                VarKind::Plain => VarKind::Tilde,
                k => k,
            }))?;
            cur.expect("sync")?;
            let action = cur.expect_ident("action name")?.to_string();
            cur.expect("do")?;
            cur.expect("{")?;
            reset.extend(conjunction(&mut cur, &vars, Some(&pre_post))?);
            cur.expect("}")?;
            cur.expect("goto")?;
            cur.skip_ws();
            let dpos = cur.pos();
            let dst = cur.expect_ident("location name")?.to_string();
            cur.expect(";")?;
            let reset = reset
                .into_iter()
                .map(|(l, r, rhs)| JumpConstraint::new(l, r, rhs))
                .collect::<Result<Vec<_>, _>>()?;
            edges.push(RawEdge {
                src,
                action,
                dst: (dst, dpos),
                reset,
            });
        }
    }
    let lookup = |cur: &Cursor<'_>, name: &str, pos: usize| -> Result<usize, HybridError> {
        index
            .get(name)
            .copied()
            .ok_or_else(|| cur.error_at(pos, format!("unknown location `{name}`")).into())
    };
    for e in edges {
        let dst = lookup(&cur, &e.dst.0, e.dst.1)?;
        h.add_edge(e.src, Action::new(&e.action), dst, e.reset)?;
    }
    cur.expect("initially")?;
    cur.expect(":")?;
    loop {
        cur.skip_ws();
        let pos = cur.pos();
        let name = cur.expect_ident("location name")?;
        let l = lookup(&cur, name, pos)?;
        h.add_init(l)?;
        cur.expect("&")?;
        conjunction(&mut cur, &vars, None)?;
        if cur.eat(";") {
            break;
        }
        cur.expect(",")?;
    }
    cur.expect("end")?;
    let mut bha = BuchiHybridAutomaton::new(h);
    cur.expect("//")?;
    cur.expect("final")?;
    cur.expect(":")?;
    cur.skip_ws();
    for name in names(&mut cur, "location name")? {
        let l = lookup(&cur, name, cur.pos())?;
        bha.add_final(l)?;
    }
    if !cur.at_end() {
        return Err(cur.error(format!("unexpected {} after `end`", cur.describe_next())).into());
    }
    Ok(bha)
}
