//! HyLTL formulas: AST, concrete syntax, negation normal form.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::constraint::{parse_flow, ConstraintError, FlowConstraint};
use crate::syntax::{Cursor, ParseError};

/// Concrete-syntax name of the auxiliary splitting action.
pub const SPLIT_ACTION: &str = "__T";
/// Prefix of the fresh actions added by the action encoding.
pub const PADDING_PREFIX: &str = "__pad_";

const KEYWORDS: [&str; 7] = ["X", "U", "R", "F", "G", "true", "false"];

/// A discrete action name. The splitting action `T` is spelled `__T`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action(Arc<str>);

impl Action {
    pub fn new(name: &str) -> Self {
        Action(Arc::from(name))
    }

    /// The reserved action marking trajectory split points.
    pub fn split() -> Self {
        Action::new(SPLIT_ACTION)
    }

    pub fn is_split(&self) -> bool {
        &*self.0 == SPLIT_ACTION
    }

    pub fn is_padding(&self) -> bool {
        self.0.starts_with(PADDING_PREFIX)
    }

    pub fn is_reserved(&self) -> bool {
        self.is_split() || self.is_padding()
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Pretty name: `T` for the split action, the plain name otherwise.
    pub fn display_name(&self) -> &str {
        if self.is_split() {
            "T"
        } else {
            &self.0
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Action({})", self.0)
    }
}

/// `F` and `G` are sugar and never appear as nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HyLtlFormula {
    True,
    False,
    Flow(FlowConstraint),
    Action(Action),
    Not(Box<HyLtlFormula>),
    And(Box<HyLtlFormula>, Box<HyLtlFormula>),
    Or(Box<HyLtlFormula>, Box<HyLtlFormula>),
    Next(Box<HyLtlFormula>),
    Until(Box<HyLtlFormula>, Box<HyLtlFormula>),
    Release(Box<HyLtlFormula>, Box<HyLtlFormula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at {0}")]
    Syntax(ParseError),
    #[error("in flow constraint: {0}")]
    Constraint(ConstraintError),
    #[error("undeclared action `{0}`")]
    UndeclaredAction(String),
    #[error("action name `{0}` is reserved")]
    ReservedAction(String),
    #[error("formula is not in negation normal form")]
    NotNnf,
}

impl From<ParseError> for FormulaError {
    fn from(e: ParseError) -> Self {
        FormulaError::Syntax(e)
    }
}

impl From<ConstraintError> for FormulaError {
    fn from(e: ConstraintError) -> Self {
        match e {
            ConstraintError::Parse(p) => FormulaError::Syntax(p),
            other => FormulaError::Constraint(other),
        }
    }
}

use HyLtlFormula as H;

impl HyLtlFormula {
    pub fn flow(f: FlowConstraint) -> Self {
        H::Flow(f)
    }

    pub fn action(name: &str) -> Self {
        H::Action(Action::new(name))
    }

    pub fn split() -> Self {
        H::Action(Action::split())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        H::Not(Box::new(self))
    }

    pub fn and(self, rhs: Self) -> Self {
        H::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Self) -> Self {
        H::Or(Box::new(self), Box::new(rhs))
    }

    pub fn next(self) -> Self {
        H::Next(Box::new(self))
    }

    pub fn until(self, rhs: Self) -> Self {
        H::Until(Box::new(self), Box::new(rhs))
    }

    pub fn release(self, rhs: Self) -> Self {
        H::Release(Box::new(self), Box::new(rhs))
    }

    /// `F φ = ⊤ U φ`
    pub fn eventually(self) -> Self {
        H::True.until(self)
    }

    /// `G φ = ¬F¬φ`
    pub fn always(self) -> Self {
        self.not().eventually().not()
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            H::True | H::False | H::Flow(_) | H::Action(_) => 1,
            H::Not(a) | H::Next(a) => 1 + a.size(),
            H::And(a, b) | H::Or(a, b) | H::Until(a, b) | H::Release(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            H::True | H::False | H::Flow(_) | H::Action(_) => 0,
            H::Not(a) | H::Next(a) => 1 + a.depth(),
            H::And(a, b) | H::Or(a, b) | H::Until(a, b) | H::Release(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn flow_atoms(&self) -> BTreeSet<FlowConstraint> {
        let mut out = BTreeSet::new();
        self.visit(&mut |n| {
            if let H::Flow(f) = n {
                out.insert(f.clone());
            }
        });
        out
    }

    /// Flow atoms occurring directly under a negation.
    pub fn negated_flow_atoms(&self) -> BTreeSet<FlowConstraint> {
        let mut out = BTreeSet::new();
        self.visit(&mut |n| {
            if let H::Not(inner) = n {
                if let H::Flow(f) = &**inner {
                    out.insert(f.clone());
                }
            }
        });
        out
    }

    pub fn actions(&self) -> BTreeSet<Action> {
        let mut out = BTreeSet::new();
        self.visit(&mut |n| {
            if let H::Action(a) = n {
                out.insert(a.clone());
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&HyLtlFormula)) {
        f(self);
        match self {
            H::True | H::False | H::Flow(_) | H::Action(_) => {}
            H::Not(a) | H::Next(a) => a.visit(f),
            H::And(a, b) | H::Or(a, b) | H::Until(a, b) | H::Release(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// True iff negations occur only directly above flow or action atoms.
    pub fn is_nnf(&self) -> bool {
        match self {
            H::True | H::False | H::Flow(_) | H::Action(_) => true,
            H::Not(a) => matches!(**a, H::Flow(_) | H::Action(_)),
            H::Next(a) => a.is_nnf(),
            H::And(a, b) | H::Or(a, b) | H::Until(a, b) | H::Release(a, b) => {
                a.is_nnf() && b.is_nnf()
            }
        }
    }

    /// Pushes negations down to the atoms using the standard dualities.
    pub fn to_nnf(&self) -> HyLtlFormula {
        nnf(self, false)
    }

    /// Membership in the positive-flow fragment: an NNF formula with no
    /// negated flow atom. Negated actions are allowed.
    pub fn is_positive(&self) -> Result<bool, FormulaError> {
        if !self.is_nnf() {
            return Err(FormulaError::NotNnf);
        }
        Ok(self.negated_flow_atoms().is_empty())
    }

    /// Folds boolean constants (`⊤ ∨ φ = ⊤`, `⊥ ∧ φ = ⊥`, ...). Temporal
    /// operators are left alone except for `X ⊤` and `X ⊥`.
    pub fn fold_constants(&self) -> HyLtlFormula {
        match self {
            H::True | H::False | H::Flow(_) | H::Action(_) => self.clone(),
            H::Not(a) => match a.fold_constants() {
                H::True => H::False,
                H::False => H::True,
                other => other.not(),
            },
            H::And(a, b) => match (a.fold_constants(), b.fold_constants()) {
                (H::False, _) | (_, H::False) => H::False,
                (H::True, x) | (x, H::True) => x,
                (x, y) => x.and(y),
            },
            H::Or(a, b) => match (a.fold_constants(), b.fold_constants()) {
                (H::True, _) | (_, H::True) => H::True,
                (H::False, x) | (x, H::False) => x,
                (x, y) => x.or(y),
            },
            H::Next(a) => match a.fold_constants() {
                c @ (H::True | H::False) => c,
                x => x.next(),
            },
            H::Until(a, b) => a.fold_constants().until(b.fold_constants()),
            H::Release(a, b) => a.fold_constants().release(b.fold_constants()),
        }
    }

    /// Concrete syntax accepted by [`parse_hyltl`]; the split action is `__T`.
    pub fn to_concrete(&self) -> String {
        let mut s = String::new();
        self.write(&mut s, 0, false);
        s
    }

    fn prec(&self) -> u8 {
        match self {
            H::Or(..) => 1,
            H::And(..) => 2,
            H::Until(..) | H::Release(..) => 3,
            _ => 4,
        }
    }

    fn write(&self, out: &mut String, min: u8, pretty: bool) {
        let paren = self.prec() < min;
        if paren {
            out.push('(');
        }
        match self {
            H::True => out.push_str("true"),
            H::False => out.push_str("false"),
            H::Flow(f) => {
                out.push('{');
                out.push_str(f.as_str());
                out.push('}');
            }
            H::Action(a) => out.push_str(if pretty { a.display_name() } else { a.name() }),
            H::Not(a) => {
                out.push('!');
                a.write(out, 4, pretty);
            }
            H::Next(a) => {
                out.push('X');
                if a.prec() >= 4 && !matches!(**a, H::Flow(_)) {
                    out.push(' ');
                }
                a.write(out, 4, pretty);
            }
            H::And(a, b) => {
                a.write(out, 2, pretty);
                out.push_str(" & ");
                b.write(out, 3, pretty);
            }
            H::Or(a, b) => {
                a.write(out, 1, pretty);
                out.push_str(" | ");
                b.write(out, 2, pretty);
            }
            H::Until(a, b) | H::Release(a, b) => {
                a.write(out, 4, pretty);
                out.push_str(if matches!(self, H::Until(..)) { " U " } else { " R " });
                b.write(out, 3, pretty);
            }
        }
        if paren {
            out.push(')');
        }
    }
}

/// Pretty form: identical to the concrete syntax except that the split
/// action prints as `T`.
impl fmt::Display for HyLtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s, 0, true);
        f.write_str(&s)
    }
}

fn nnf(f: &HyLtlFormula, neg: bool) -> HyLtlFormula {
    match (f, neg) {
        (H::True, false) | (H::False, true) => H::True,
        (H::True, true) | (H::False, false) => H::False,
        (H::Flow(_) | H::Action(_), false) => f.clone(),
        (H::Flow(_) | H::Action(_), true) => f.clone().not(),
        (H::Not(a), _) => nnf(a, !neg),
        (H::Next(a), _) => nnf(a, neg).next(),
        (H::And(a, b), false) => nnf(a, false).and(nnf(b, false)),
        (H::And(a, b), true) => nnf(a, true).or(nnf(b, true)),
        (H::Or(a, b), false) => nnf(a, false).or(nnf(b, false)),
        (H::Or(a, b), true) => nnf(a, true).and(nnf(b, true)),
        (H::Until(a, b), false) => nnf(a, false).until(nnf(b, false)),
        (H::Until(a, b), true) => nnf(a, true).release(nnf(b, true)),
        (H::Release(a, b), false) => nnf(a, false).release(nnf(b, false)),
        (H::Release(a, b), true) => nnf(a, true).until(nnf(b, true)),
    }
}

/// Free function form of [`HyLtlFormula::to_nnf`].
pub fn to_nnf(f: &HyLtlFormula) -> HyLtlFormula {
    f.to_nnf()
}

/// Free function form of [`HyLtlFormula::is_positive`].
pub fn is_positive(f: &HyLtlFormula) -> Result<bool, FormulaError> {
    f.is_positive()
}

/// Declared variables and actions a formula may mention.
///
/// `None` means "anything goes"; the CLI uses that to infer declarations.
#[derive(Debug, Clone, Default)]
pub struct Declarations {
    pub vars: Option<BTreeSet<String>>,
    pub actions: Option<BTreeSet<String>>,
    /// Accept `__T` in the input (used when reading back translated formulas).
    pub allow_split: bool,
}

impl Declarations {
    pub fn new<V, A>(vars: V, actions: A) -> Self
    where
        V: IntoIterator,
        V::Item: Into<String>,
        A: IntoIterator,
        A::Item: Into<String>,
    {
        Declarations {
            vars: Some(vars.into_iter().map(Into::into).collect()),
            actions: Some(actions.into_iter().map(Into::into).collect()),
            allow_split: false,
        }
    }

    pub fn permissive() -> Self {
        Declarations::default()
    }

    pub fn with_split(mut self) -> Self {
        self.allow_split = true;
        self
    }
}

/// Parses HyLTL concrete syntax.
///
/// Precedence from loosest to tightest: `|`, `&`, `U`/`R` (right
/// associative), then the prefix operators `! X F G`.
pub fn parse_hyltl(text: &str, decls: &Declarations) -> Result<HyLtlFormula, FormulaError> {
    let mut p = FormulaParser {
        cur: Cursor::new(text),
        decls,
    };
    let f = p.or()?;
    if !p.cur.at_end() {
        let msg = format!("unexpected {}", p.cur.describe_next());
        return Err(p.cur.error(msg).into());
    }
    Ok(f)
}

struct FormulaParser<'a, 'd> {
    cur: Cursor<'a>,
    decls: &'d Declarations,
}

impl FormulaParser<'_, '_> {
    fn or(&mut self) -> Result<HyLtlFormula, FormulaError> {
        let mut lhs = self.and()?;
        while self.cur.eat("||") || self.cur.eat("|") {
            lhs = lhs.or(self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<HyLtlFormula, FormulaError> {
        let mut lhs = self.temporal()?;
        while self.cur.eat("&&") || self.cur.eat("&") {
            lhs = lhs.and(self.temporal()?);
        }
        Ok(lhs)
    }

    fn temporal(&mut self) -> Result<HyLtlFormula, FormulaError> {
        let lhs = self.unary()?;
        match self.cur.peek_ident() {
            Some("U") => {
                self.cur.ident();
                Ok(lhs.until(self.temporal()?))
            }
            Some("R") => {
                self.cur.ident();
                Ok(lhs.release(self.temporal()?))
            }
            _ => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<HyLtlFormula, FormulaError> {
        if self.cur.eat("!") {
            return Ok(self.unary()?.not());
        }
        match self.cur.peek_ident() {
            Some("X") => {
                self.cur.ident();
                Ok(self.unary()?.next())
            }
            Some("F") => {
                self.cur.ident();
                Ok(self.unary()?.eventually())
            }
            Some("G") => {
                self.cur.ident();
                Ok(self.unary()?.always())
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<HyLtlFormula, FormulaError> {
        self.cur.skip_ws();
        if self.cur.eat("(") {
            let f = self.or()?;
            self.cur.expect(")")?;
            return Ok(f);
        }
        if self.cur.eat("{") {
            let start = self.cur.pos();
            let Some(end) = self.cur.find_matching('{', '}') else {
                return Err(self.cur.error("unterminated `{`").into());
            };
            let mut inner = self.cur.slice(start, end);
            let c = parse_flow(&mut inner, self.decls.vars.as_ref())?;
            if !inner.at_end() {
                let msg = format!("unexpected {} in flow constraint", inner.describe_next());
                return Err(inner.error(msg).into());
            }
            self.cur.set_pos(end + 1);
            return Ok(H::Flow(c));
        }
        let pos = self.cur.pos();
        match self.cur.peek_ident() {
            Some("true") => {
                self.cur.ident();
                Ok(H::True)
            }
            Some("false") => {
                self.cur.ident();
                Ok(H::False)
            }
            Some(kw) if KEYWORDS.contains(&kw) => Err(self
                .cur
                .error_at(pos, format!("operator `{kw}` is missing its left operand"))
                .into()),
            Some(name) => {
                self.cur.ident();
                let action = Action::new(name);
                if action.is_split() {
                    if !self.decls.allow_split {
                        return Err(FormulaError::ReservedAction(name.to_string()));
                    }
                } else if action.is_padding() {
                    return Err(FormulaError::ReservedAction(name.to_string()));
                } else if let Some(declared) = &self.decls.actions {
                    if !declared.contains(name) {
                        return Err(FormulaError::UndeclaredAction(name.to_string()));
                    }
                }
                Ok(H::Action(action))
            }
            None => {
                let msg = format!("expected a formula, found {}", self.cur.describe_next());
                Err(self.cur.error(msg).into())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn decls() -> Declarations {
        Declarations::new(["x", "y"], ["on", "off"])
    }

    fn flow(s: &str) -> HyLtlFormula {
        H::Flow(FlowConstraint::parse(s, None).unwrap())
    }

    fn parse(s: &str) -> HyLtlFormula {
        parse_hyltl(s, &decls()).unwrap()
    }

    #[test]
    fn eventually_is_desugared() {
        assert_eq!(parse("F {x >= 21}"), H::True.until(flow("x >= 21")));
        assert_eq!(
            parse("G on"),
            H::True.until(H::action("on").not()).not()
        );
    }

    #[test]
    fn action_atoms() {
        assert_eq!(parse("on"), H::action("on"));
        assert_eq!(
            parse_hyltl("dim", &decls()),
            Err(FormulaError::UndeclaredAction("dim".into()))
        );
        assert!(matches!(
            parse_hyltl("__T", &decls()),
            Err(FormulaError::ReservedAction(_))
        ));
        assert_eq!(
            parse_hyltl("__T", &decls().with_split()).unwrap(),
            H::split()
        );
    }

    #[test]
    fn missing_left_operand_is_a_syntax_error() {
        match parse_hyltl("U {x>0}", &decls()) {
            Err(FormulaError::Syntax(e)) => assert_eq!(e.offset, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_report_position() {
        match parse_hyltl("on & (off", &decls()) {
            Err(FormulaError::Syntax(e)) => assert_eq!(e.offset, 9),
            other => panic!("unexpected {other:?}"),
        }
        match parse_hyltl("on & {z >= 1}", &decls()) {
            Err(FormulaError::Constraint(ConstraintError::UndeclaredVariable(v))) => {
                assert_eq!(v, "z")
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_hyltl("on off", &decls()).is_err());
    }

    #[test]
    fn precedence() {
        assert_eq!(
            parse("!on & X off U on | off"),
            H::action("on")
                .not()
                .and(H::action("off").next().until(H::action("on")))
                .or(H::action("off"))
        );
        assert_eq!(
            parse("on U off R on"),
            H::action("on").until(H::action("off").release(H::action("on")))
        );
    }

    #[test]
    fn nnf_dualities() {
        let a = H::action("on");
        let b = H::action("off");
        assert_eq!(
            a.clone().until(b.clone()).not().to_nnf(),
            a.clone().not().release(b.clone().not())
        );
        let f = flow("x >= 1");
        assert_eq!(f.clone().not().not().to_nnf(), f);
        assert_eq!(a.clone().next().not().to_nnf(), a.not().next());
    }

    #[test]
    fn nnf_of_thermostat_safety() {
        let phi = parse("!F({x >= 21} & X on)");
        let expected = H::False.release(flow("x >= 21").not().or(H::action("on").not().next()));
        assert_eq!(phi.to_nnf(), expected);
    }

    #[test]
    fn positivity() {
        let neg_hyb = parse("F({x >= 21} & X on)");
        assert_eq!(neg_hyb.is_positive(), Ok(true));
        // ¬φ_liv = F(¬(x≥18) ∧ X G ¬on)
        let neg_liv = parse("F(!{x >= 18} & X G !on)").to_nnf();
        assert_eq!(neg_liv.is_positive(), Ok(false));
        assert_eq!(parse("!on").is_positive(), Ok(true));
        assert_eq!(parse("!(on & off)").is_positive(), Err(FormulaError::NotNnf));
    }

    #[test]
    fn negated_liveness_matches_displayed_form() {
        let neg_liv = parse("F(!{x >= 18} & X G !on)").to_nnf();
        let expected = H::True.until(
            flow("x >= 18")
                .not()
                .and(H::False.release(H::action("on").not()).next()),
        );
        assert_eq!(neg_liv, expected);
    }

    #[test]
    fn printing() {
        let f = parse("F({x>=21} & X on)");
        assert_eq!(f.to_string(), "true U ({x >= 21} & X on)");
        let g = H::split().until(H::split().not().and(H::action("on")));
        assert_eq!(g.to_string(), "T U (!T & on)");
        assert_eq!(g.to_concrete(), "__T U (!__T & on)");
        assert_eq!(parse("X{x >= 1}").to_string(), "X{x >= 1}");
        assert_eq!(parse("X(on | off)").to_string(), "X(on | off)");
    }

    #[test]
    fn fold_constants() {
        let f = H::split().or(H::True).until(H::split().not().and(H::False));
        assert_eq!(f.fold_constants(), H::True.until(H::False));
    }

    pub(crate) fn arb_formula() -> impl Strategy<Value = HyLtlFormula> {
        let leaf = prop_oneof![
            Just(H::True),
            Just(H::False),
            prop::sample::select(vec!["x >= 21", "x' = 2 * x", "y < -1"]).prop_map(flow),
            prop::sample::select(vec!["on", "off"]).prop_map(H::action),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(HyLtlFormula::not),
                inner.clone().prop_map(HyLtlFormula::next),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.until(b)),
                (inner.clone(), inner).prop_map(|(a, b)| a.release(b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn parse_print_roundtrip(f in arb_formula()) {
            let text = f.to_concrete();
            prop_assert_eq!(parse_hyltl(&text, &decls()).unwrap(), f);
        }

        #[test]
        fn nnf_is_idempotent_and_nnf(f in arb_formula()) {
            let n = f.to_nnf();
            prop_assert!(n.is_nnf());
            prop_assert_eq!(n.to_nnf(), n);
        }
    }
}
