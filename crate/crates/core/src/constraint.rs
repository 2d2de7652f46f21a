//! Arithmetic expressions and the relational constraints built from them.
//!
//! A constraint is an atom for every later stage of the pipeline, so its
//! identity is its canonical text: two constraints are the same atom iff
//! their printed forms are byte-equal. No arithmetic simplification happens.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{Cursor, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    /// `x`
    Plain,
    /// `x'`, the first derivative of `x` along a trajectory.
    Dotted,
    /// `~x`, the value of `x` before a discrete jump.
    Tilde,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarRef {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        match s {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }
}

/// Expression tree over real constants and variable references.
///
/// Constants produced by the parser are always non-negative; a leading minus
/// is kept as an explicit [`ArithExpr::Neg`] node.
#[derive(Debug, Clone, PartialEq)]
pub enum ArithExpr {
    Const(f64),
    Var(VarRef),
    Neg(Box<ArithExpr>),
    Bin(BinOp, Box<ArithExpr>, Box<ArithExpr>),
    Call(Func, Box<ArithExpr>),
}

impl ArithExpr {
    pub fn num(v: f64) -> Self {
        if v < 0.0 {
            ArithExpr::Neg(Box::new(ArithExpr::Const(-v)))
        } else {
            ArithExpr::Const(v)
        }
    }

    pub fn var(name: &str) -> Self {
        ArithExpr::Var(VarRef {
            name: name.to_string(),
            kind: VarKind::Plain,
        })
    }

    pub fn dotted(name: &str) -> Self {
        ArithExpr::Var(VarRef {
            name: name.to_string(),
            kind: VarKind::Dotted,
        })
    }

    pub fn tilde(name: &str) -> Self {
        ArithExpr::Var(VarRef {
            name: name.to_string(),
            kind: VarKind::Tilde,
        })
    }

    pub fn bin(op: BinOp, l: ArithExpr, r: ArithExpr) -> Self {
        ArithExpr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn vars(&self, out: &mut BTreeSet<VarRef>) {
        match self {
            ArithExpr::Const(_) => {}
            ArithExpr::Var(v) => {
                out.insert(v.clone());
            }
            ArithExpr::Neg(e) | ArithExpr::Call(_, e) => e.vars(out),
            ArithExpr::Bin(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
        }
    }

    /// Rewrites every variable reference kind through `f`.
    pub fn map_kinds(&self, f: &impl Fn(VarKind) -> VarKind) -> ArithExpr {
        match self {
            ArithExpr::Const(v) => ArithExpr::Const(*v),
            ArithExpr::Var(v) => ArithExpr::Var(VarRef {
                name: v.name.clone(),
                kind: f(v.kind),
            }),
            ArithExpr::Neg(e) => ArithExpr::Neg(Box::new(e.map_kinds(f))),
            ArithExpr::Call(g, e) => ArithExpr::Call(*g, Box::new(e.map_kinds(f))),
            ArithExpr::Bin(op, l, r) => ArithExpr::Bin(*op, Box::new(l.map_kinds(f)), Box::new(r.map_kinds(f))),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            ArithExpr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            ArithExpr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            ArithExpr::Neg(_) => 3,
            ArithExpr::Const(v) if v.is_sign_negative() => 3,
            ArithExpr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn write(&self, out: &mut String, min: u8) {
        let paren = self.prec() < min;
        if paren {
            out.push('(');
        }
        match self {
            ArithExpr::Const(v) => out.push_str(&format!("{v}")),
            ArithExpr::Var(v) => match v.kind {
                VarKind::Plain => out.push_str(&v.name),
                VarKind::Dotted => {
                    out.push_str(&v.name);
                    out.push('\'');
                }
                VarKind::Tilde => {
                    out.push('~');
                    out.push_str(&v.name);
                }
            },
            ArithExpr::Neg(e) => {
                out.push('-');
                e.write(out, 4);
            }
            ArithExpr::Call(f, e) => {
                out.push_str(f.name());
                out.push('(');
                e.write(out, 0);
                out.push(')');
            }
            ArithExpr::Bin(op, l, r) => {
                let (sym, lmin, rmin) = match op {
                    BinOp::Add => ("+", 1, 2),
                    BinOp::Sub => ("-", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                l.write(out, lmin);
                out.push(' ');
                out.push_str(sym);
                out.push(' ');
                r.write(out, rmin);
            }
        }
        if paren {
            out.push(')');
        }
    }
}

impl fmt::Display for ArithExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s, 0);
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl Relation {
    pub const ALL: [Relation; 6] = [
        Relation::Lt,
        Relation::Le,
        Relation::Eq,
        Relation::Ne,
        Relation::Ge,
        Relation::Gt,
    ];

    /// The relation holding exactly where `self` fails.
    pub fn complement(self) -> Relation {
        match self {
            Relation::Lt => Relation::Ge,
            Relation::Le => Relation::Gt,
            Relation::Eq => Relation::Ne,
            Relation::Ne => Relation::Eq,
            Relation::Ge => Relation::Lt,
            Relation::Gt => Relation::Le,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ne => "!=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("flow constraint `{0}` mentions tilde variable `~{1}`")]
    TildeInFlow(String, String),
    #[error("jump constraint `{0}` mentions dotted variable `{1}'`")]
    DottedInJump(String, String),
}

#[derive(Debug)]
struct Relational {
    lhs: ArithExpr,
    rel: Relation,
    rhs: ArithExpr,
    text: String,
}

impl Relational {
    fn new(lhs: ArithExpr, rel: Relation, rhs: ArithExpr) -> Self {
        let mut text = String::new();
        lhs.write(&mut text, 0);
        text.push(' ');
        text.push_str(rel.symbol());
        text.push(' ');
        rhs.write(&mut text, 0);
        Relational {
            lhs,
            rel,
            rhs,
            text,
        }
    }

    fn vars(&self) -> BTreeSet<VarRef> {
        let mut out = BTreeSet::new();
        self.lhs.vars(&mut out);
        self.rhs.vars(&mut out);
        out
    }
}

macro_rules! constraint_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone)]
        pub struct $name(Arc<Relational>);

        impl $name {
            pub fn lhs(&self) -> &ArithExpr {
                &self.0.lhs
            }

            pub fn rel(&self) -> Relation {
                self.0.rel
            }

            pub fn rhs(&self) -> &ArithExpr {
                &self.0.rhs
            }

            /// Canonical text; equal constraints have byte-equal text.
            pub fn as_str(&self) -> &str {
                &self.0.text
            }

            pub fn variables(&self) -> BTreeSet<VarRef> {
                self.0.vars()
            }
        }

        impl PartialEq for $name {
            fn eq(&self, other: &Self) -> bool {
                self.0.text == other.0.text
            }
        }

        impl Eq for $name {}

        impl PartialOrd for $name {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        impl Ord for $name {
            fn cmp(&self, other: &Self) -> Ordering {
                self.0.text.cmp(&other.0.text)
            }
        }

        impl Hash for $name {
            fn hash<H: Hasher>(&self, state: &mut H) {
                self.0.text.hash(state)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0.text)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({:?})", stringify!($name), self.0.text)
            }
        }
    };
}

constraint_type!(
    /// A relation over plain and dotted variables, required to hold at every
    /// instant of a trajectory.
    FlowConstraint
);

constraint_type!(
    /// A relation over plain (post-jump) and tilde (pre-jump) variables.
    JumpConstraint
);

impl FlowConstraint {
    pub fn new(lhs: ArithExpr, rel: Relation, rhs: ArithExpr) -> Result<Self, ConstraintError> {
        let r = Relational::new(lhs, rel, rhs);
        if let Some(v) = r.vars().into_iter().find(|v| v.kind == VarKind::Tilde) {
            return Err(ConstraintError::TildeInFlow(r.text, v.name));
        }
        Ok(FlowConstraint(Arc::new(r)))
    }

    /// Parses a flow constraint. With `vars == None` any variable name is accepted.
    pub fn parse(text: &str, vars: Option<&BTreeSet<String>>) -> Result<Self, ConstraintError> {
        let mut cur = Cursor::new(text);
        let c = parse_flow(&mut cur, vars)?;
        if !cur.at_end() {
            return Err(cur
                .error(format!("unexpected {} after constraint", cur.describe_next()))
                .into());
        }
        Ok(c)
    }

    /// The dual constraint: same operands, complemented relation.
    pub fn dual(&self) -> FlowConstraint {
        FlowConstraint(Arc::new(Relational::new(
            self.0.lhs.clone(),
            self.0.rel.complement(),
            self.0.rhs.clone(),
        )))
    }
}

impl JumpConstraint {
    pub fn new(lhs: ArithExpr, rel: Relation, rhs: ArithExpr) -> Result<Self, ConstraintError> {
        let r = Relational::new(lhs, rel, rhs);
        if let Some(v) = r.vars().into_iter().find(|v| v.kind == VarKind::Dotted) {
            return Err(ConstraintError::DottedInJump(r.text, v.name));
        }
        Ok(JumpConstraint(Arc::new(r)))
    }

    pub fn parse(text: &str, vars: Option<&BTreeSet<String>>) -> Result<Self, ConstraintError> {
        let mut cur = Cursor::new(text);
        let c = parse_jump(&mut cur, vars)?;
        if !cur.at_end() {
            return Err(cur
                .error(format!("unexpected {} after constraint", cur.describe_next()))
                .into());
        }
        Ok(c)
    }

    /// `x = ~x`: the identity reset on one variable.
    pub fn keep(var: &str) -> JumpConstraint {
        JumpConstraint::new(ArithExpr::var(var), Relation::Eq, ArithExpr::tilde(var))
            .expect("identity reset has no dotted variables")
    }
}

/// Free function form of [`FlowConstraint::dual`].
pub fn dual(f: &FlowConstraint) -> FlowConstraint {
    f.dual()
}

pub(crate) fn parse_flow(
    cur: &mut Cursor<'_>,
    vars: Option<&BTreeSet<String>>,
) -> Result<FlowConstraint, ConstraintError> {
    let (lhs, rel, rhs) = parse_relational(cur, vars)?;
    FlowConstraint::new(lhs, rel, rhs)
}

pub(crate) fn parse_jump(
    cur: &mut Cursor<'_>,
    vars: Option<&BTreeSet<String>>,
) -> Result<JumpConstraint, ConstraintError> {
    let (lhs, rel, rhs) = parse_relational(cur, vars)?;
    JumpConstraint::new(lhs, rel, rhs)
}

fn parse_relational(
    cur: &mut Cursor<'_>,
    vars: Option<&BTreeSet<String>>,
) -> Result<(ArithExpr, Relation, ArithExpr), ConstraintError> {
    let lhs = parse_sum(cur, vars)?;
    cur.skip_ws();
    let rel = if cur.eat("<=") {
        Relation::Le
    } else if cur.eat(">=") {
        Relation::Ge
    } else if cur.eat("==") || cur.eat("=") {
        Relation::Eq
    } else if cur.eat("!=") {
        Relation::Ne
    } else if cur.eat("<") {
        Relation::Lt
    } else if cur.eat(">") {
        Relation::Gt
    } else {
        return Err(cur
            .error(format!("expected a relation, found {}", cur.describe_next()))
            .into());
    };
    let rhs = parse_sum(cur, vars)?;
    Ok((lhs, rel, rhs))
}

fn parse_sum(
    cur: &mut Cursor<'_>,
    vars: Option<&BTreeSet<String>>,
) -> Result<ArithExpr, ConstraintError> {
    let mut lhs = parse_product(cur, vars)?;
    loop {
        let op = if cur.eat("+") {
            BinOp::Add
        } else if cur.peek_str("-") && !cur.rest().starts_with("->") {
            cur.eat("-");
            BinOp::Sub
        } else {
            return Ok(lhs);
        };
        let rhs = parse_product(cur, vars)?;
        lhs = ArithExpr::bin(op, lhs, rhs);
    }
}

fn parse_product(
    cur: &mut Cursor<'_>,
    vars: Option<&BTreeSet<String>>,
) -> Result<ArithExpr, ConstraintError> {
    let mut lhs = parse_unary(cur, vars)?;
    loop {
        let op = if cur.eat("*") {
            BinOp::Mul
        } else if cur.eat("/") {
            BinOp::Div
        } else {
            return Ok(lhs);
        };
        let rhs = parse_unary(cur, vars)?;
        lhs = ArithExpr::bin(op, lhs, rhs);
    }
}

fn parse_unary(
    cur: &mut Cursor<'_>,
    vars: Option<&BTreeSet<String>>,
) -> Result<ArithExpr, ConstraintError> {
    if cur.eat("-") {
        let inner = parse_unary(cur, vars)?;
        return Ok(ArithExpr::Neg(Box::new(inner)));
    }
    let base = parse_atom(cur, vars)?;
    if cur.eat("^") {
        let exp = parse_unary(cur, vars)?;
        return Ok(ArithExpr::bin(BinOp::Pow, base, exp));
    }
    Ok(base)
}

fn parse_atom(
    cur: &mut Cursor<'_>,
    vars: Option<&BTreeSet<String>>,
) -> Result<ArithExpr, ConstraintError> {
    cur.skip_ws();
    if cur.eat("(") {
        let e = parse_sum(cur, vars)?;
        cur.expect(")")?;
        return Ok(e);
    }
    if let Some((v, _)) = cur.number() {
        return Ok(ArithExpr::Const(v));
    }
    let tilde = cur.eat("~");
    let Some(name) = cur.ident() else {
        return Err(cur
            .error(format!("expected an expression, found {}", cur.describe_next()))
            .into());
    };
    if !tilde {
        if let Some(func) = Func::from_name(name) {
            cur.expect("(")?;
            let arg = parse_sum(cur, vars)?;
            cur.expect(")")?;
            return Ok(ArithExpr::Call(func, Box::new(arg)));
        }
    }
    if let Some(declared) = vars {
        if !declared.contains(name) {
            return Err(ConstraintError::UndeclaredVariable(name.to_string()));
        }
    }
    let kind = if tilde {
        VarKind::Tilde
    } else if cur.rest().starts_with('\'') {
        cur.bump();
        VarKind::Dotted
    } else {
        VarKind::Plain
    };
    Ok(ArithExpr::Var(VarRef {
        name: name.to_string(),
        kind,
    }))
}
