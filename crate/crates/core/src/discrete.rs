//! Discretization: action bit encoding, the γ translation to LTL over
//! `AP = FC ∪ {b0, …, b(n-1)}` and the Σ-abstraction of traces to words.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::constraint::FlowConstraint;
use crate::formula::{Action, HyLtlFormula, PADDING_PREFIX};
use crate::oracle::trace::{AbstractLassoTrace, Universe};
use crate::syntax::{Cursor, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiscreteError {
    #[error("action `{0}` is reserved and cannot be encoded")]
    ReservedAction(String),
    #[error("action `{0}` is not covered by the encoding")]
    UnknownAction(String),
    #[error("at least one action is required")]
    NoActions,
    #[error("LTL syntax error at {0}")]
    Syntax(ParseError),
    #[error("the loop of a lasso word must be nonempty")]
    EmptyLoop,
}

impl From<ParseError> for DiscreteError {
    fn from(e: ParseError) -> Self {
        DiscreteError::Syntax(e)
    }
}

/// Injective map from `A ∪ {T}` (padded to `2ⁿ − 1` actions) to nonzero
/// `n`-bit patterns.
///
/// Patterns are integers; bit letter `b_j` is the `j`-th binary digit
/// counted from the most significant end. Internally a letter's bits are
/// stored as a mask where bit `j` of the mask is `b_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionEncoding {
    n: u32,
    by_action: BTreeMap<Action, u32>,
    /// Index `p - 1` holds the action with pattern `p`.
    by_pattern: Vec<Action>,
}

/// Builds the deterministic encoding for the action set `actions`.
pub fn make_encoding<I>(actions: I) -> Result<ActionEncoding, DiscreteError>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    let mut sorted = BTreeSet::new();
    for a in actions {
        let a = Action::new(a.as_ref());
        if a.is_reserved() {
            return Err(DiscreteError::ReservedAction(a.name().to_string()));
        }
        sorted.insert(a);
    }
    if sorted.is_empty() {
        return Err(DiscreteError::NoActions);
    }
    let needed = sorted.len() as u64 + 1;
    let mut n = 1u32;
    while (1u64 << n) - 1 < needed {
        n += 1;
    }
    let total = (1usize << n) - 1;
    let mut by_pattern: Vec<Action> = sorted.into_iter().collect();
    let mut k = 0;
    while by_pattern.len() < total - 1 {
        by_pattern.push(Action::new(&format!("{PADDING_PREFIX}{k}")));
        k += 1;
    }
    by_pattern.push(Action::split());
    let by_action = by_pattern
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), i as u32 + 1))
        .collect();
    Ok(ActionEncoding {
        n,
        by_action,
        by_pattern,
    })
}

impl ActionEncoding {
    /// Number of bit letters.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Mask with every bit letter set; the pattern of `T`.
    pub fn all_ones(&self) -> u32 {
        (1u32 << self.n) - 1
    }

    /// Integer pattern of `a`.
    pub fn pattern(&self, a: &Action) -> Option<u32> {
        self.by_action.get(a).copied()
    }

    /// Letter mask of `a`: bit `j` set iff `b_j` is true in `b(a)`.
    pub fn bits(&self, a: &Action) -> Option<u32> {
        self.pattern(a).map(|p| self.pattern_to_mask(p))
    }

    /// Action whose letter mask is `mask`, if any.
    pub fn action_of(&self, mask: u32) -> Option<&Action> {
        let p = self.pattern_to_mask(mask);
        if p == 0 {
            None
        } else {
            self.by_pattern.get(p as usize - 1)
        }
    }

    fn pattern_to_mask(&self, p: u32) -> u32 {
        // Reversing the low `n` bits maps between the two orders; it is an involution.
        (0..self.n).fold(0, |m, j| m | ((p >> (self.n - 1 - j)) & 1) << j)
    }

    /// Every encoded action including `T` and padding, by increasing pattern.
    pub fn actions(&self) -> &[Action] {
        &self.by_pattern
    }

    /// `A ∪ {T}` without padding.
    pub fn alphabet(&self) -> Vec<Action> {
        self.by_pattern.iter().filter(|a| !a.is_padding()).cloned().collect()
    }

    /// The user actions `A`.
    pub fn user_actions(&self) -> Vec<Action> {
        self.by_pattern.iter().filter(|a| !a.is_reserved()).cloned().collect()
    }

    pub fn padding(&self) -> Vec<Action> {
        self.by_pattern.iter().filter(|a| a.is_padding()).cloned().collect()
    }

    /// `b(a)` as a left-nested conjunction of bit literals `b0 … b(n-1)`.
    pub fn bit_formula(&self, a: &Action) -> Option<LtlFormula> {
        self.bits(a).map(|m| self.mask_formula(m))
    }

    fn mask_formula(&self, mask: u32) -> LtlFormula {
        let lit = |j: u32| {
            if mask >> j & 1 == 1 {
                LtlFormula::Bit(j)
            } else {
                LtlFormula::Bit(j).not()
            }
        };
        (1..self.n).fold(lit(0), |acc, j| acc.and(lit(j)))
    }
}

impl fmt::Display for ActionEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.by_pattern {
            writeln!(f, "{} = {}", a, self.bit_formula(a).expect("encoded"))?;
        }
        Ok(())
    }
}

/// Discrete LTL over flow atoms and bit letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LtlFormula {
    True,
    False,
    Bit(u32),
    Flow(FlowConstraint),
    Not(Box<LtlFormula>),
    And(Box<LtlFormula>, Box<LtlFormula>),
    Or(Box<LtlFormula>, Box<LtlFormula>),
    Next(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
    Release(Box<LtlFormula>, Box<LtlFormula>),
}

use LtlFormula as L;

impl LtlFormula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        L::Not(Box::new(self))
    }

    pub fn and(self, rhs: Self) -> Self {
        L::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Self) -> Self {
        L::Or(Box::new(self), Box::new(rhs))
    }

    pub fn next(self) -> Self {
        L::Next(Box::new(self))
    }

    pub fn until(self, rhs: Self) -> Self {
        L::Until(Box::new(self), Box::new(rhs))
    }

    pub fn release(self, rhs: Self) -> Self {
        L::Release(Box::new(self), Box::new(rhs))
    }

    pub fn size(&self) -> usize {
        match self {
            L::True | L::False | L::Bit(_) | L::Flow(_) => 1,
            L::Not(a) | L::Next(a) => 1 + a.size(),
            L::And(a, b) | L::Or(a, b) | L::Until(a, b) | L::Release(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn flow_atoms(&self) -> BTreeSet<FlowConstraint> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let L::Flow(c) = f {
                out.insert(c.clone());
            }
        });
        out
    }

    /// Largest bit index mentioned plus one.
    pub fn bit_count(&self) -> u32 {
        let mut n = 0;
        self.visit(&mut |f| {
            if let L::Bit(j) = f {
                n = n.max(j + 1);
            }
        });
        n
    }

    fn visit(&self, f: &mut impl FnMut(&LtlFormula)) {
        f(self);
        match self {
            L::True | L::False | L::Bit(_) | L::Flow(_) => {}
            L::Not(a) | L::Next(a) => a.visit(f),
            L::And(a, b) | L::Or(a, b) | L::Until(a, b) | L::Release(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            L::True | L::False | L::Bit(_) | L::Flow(_) => true,
            L::Not(a) => matches!(**a, L::Bit(_) | L::Flow(_)),
            L::Next(a) => a.is_nnf(),
            L::And(a, b) | L::Or(a, b) | L::Until(a, b) | L::Release(a, b) => a.is_nnf() && b.is_nnf(),
        }
    }

    pub fn to_nnf(&self) -> LtlFormula {
        nnf(self, false)
    }

    /// NNF with no negated flow atom.
    pub fn is_positive(&self) -> bool {
        let mut ok = self.is_nnf();
        self.visit(&mut |f| {
            if let L::Not(a) = f {
                if matches!(**a, L::Flow(_)) {
                    ok = false;
                }
            }
        });
        ok
    }

    fn prec(&self) -> u8 {
        match self {
            L::Or(..) => 1,
            L::And(..) => 2,
            L::Until(..) | L::Release(..) => 3,
            _ => 4,
        }
    }

    fn write(&self, out: &mut String) {
        match self {
            L::True => out.push_str("true"),
            L::False => out.push_str("false"),
            L::Bit(j) => {
                out.push('b');
                out.push_str(&j.to_string());
            }
            L::Flow(c) => {
                out.push('"');
                out.push_str(c.as_str());
                out.push('"');
            }
            L::Not(a) => {
                out.push('!');
                a.write_operand(out, a.prec() < 4);
            }
            L::Next(a) => {
                let paren = a.prec() < 4;
                out.push_str(if paren { "X" } else { "X " });
                a.write_operand(out, paren);
            }
            L::And(a, b) | L::Or(a, b) => {
                let same = |c: &LtlFormula| std::mem::discriminant(c) == std::mem::discriminant(self);
                a.write_operand(out, a.prec() < 4 && !same(a));
                out.push_str(if matches!(self, L::And(..)) { " & " } else { " | " });
                b.write_operand(out, b.prec() < 4);
            }
            L::Until(a, b) | L::Release(a, b) => {
                a.write_operand(out, a.prec() < 4);
                out.push_str(if matches!(self, L::Until(..)) { " U " } else { " R " });
                b.write_operand(out, b.prec() < 4);
            }
        }
    }

    fn write_operand(&self, out: &mut String, paren: bool) {
        if paren {
            out.push('(');
        }
        self.write(out);
        if paren {
            out.push(')');
        }
    }
}

/// Syntax understood by common LTL translators: `!`, `&`, `|`, `X`, `U`, `R`,
/// `true`, `false`, bit letters `b0`, quoted flow atoms.
impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s);
        f.write_str(&s)
    }
}

fn nnf(f: &LtlFormula, neg: bool) -> LtlFormula {
    match (f, neg) {
        (L::True, false) | (L::False, true) => L::True,
        (L::True, true) | (L::False, false) => L::False,
        (L::Bit(_) | L::Flow(_), false) => f.clone(),
        (L::Bit(_) | L::Flow(_), true) => f.clone().not(),
        (L::Not(a), _) => nnf(a, !neg),
        (L::Next(a), _) => nnf(a, neg).next(),
        (L::And(a, b), false) => nnf(a, false).and(nnf(b, false)),
        (L::And(a, b), true) => nnf(a, true).or(nnf(b, true)),
        (L::Or(a, b), false) => nnf(a, false).or(nnf(b, false)),
        (L::Or(a, b), true) => nnf(a, true).and(nnf(b, true)),
        (L::Until(a, b), false) => nnf(a, false).until(nnf(b, false)),
        (L::Until(a, b), true) => nnf(a, true).release(nnf(b, true)),
        (L::Release(a, b), false) => nnf(a, false).release(nnf(b, false)),
        (L::Release(a, b), true) => nnf(a, true).until(nnf(b, true)),
    }
}

/// Parses the printed LTL syntax. `F`/`G` are accepted as sugar.
pub fn parse_ltl(text: &str) -> Result<LtlFormula, DiscreteError> {
    let mut cur = Cursor::new(text);
    let f = ltl_or(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.error(format!("unexpected {}", cur.describe_next())).into());
    }
    Ok(f)
}

fn ltl_or(cur: &mut Cursor<'_>) -> Result<LtlFormula, DiscreteError> {
    let mut lhs = ltl_and(cur)?;
    while cur.eat("||") || cur.eat("|") {
        lhs = lhs.or(ltl_and(cur)?);
    }
    Ok(lhs)
}

fn ltl_and(cur: &mut Cursor<'_>) -> Result<LtlFormula, DiscreteError> {
    let mut lhs = ltl_temporal(cur)?;
    while cur.eat("&&") || cur.eat("&") {
        lhs = lhs.and(ltl_temporal(cur)?);
    }
    Ok(lhs)
}

fn ltl_temporal(cur: &mut Cursor<'_>) -> Result<LtlFormula, DiscreteError> {
    let lhs = ltl_unary(cur)?;
    match cur.peek_ident() {
        Some("U") => {
            cur.ident();
            Ok(lhs.until(ltl_temporal(cur)?))
        }
        Some("R") => {
            cur.ident();
            Ok(lhs.release(ltl_temporal(cur)?))
        }
        _ => Ok(lhs),
    }
}

fn ltl_unary(cur: &mut Cursor<'_>) -> Result<LtlFormula, DiscreteError> {
    if cur.eat("!") {
        return Ok(ltl_unary(cur)?.not());
    }
    match cur.peek_ident() {
        Some("X") => {
            cur.ident();
            Ok(ltl_unary(cur)?.next())
        }
        Some("F") => {
            cur.ident();
            Ok(L::True.until(ltl_unary(cur)?))
        }
        Some("G") => {
            cur.ident();
            Ok(L::False.release(ltl_unary(cur)?))
        }
        _ => ltl_primary(cur),
    }
}

fn ltl_primary(cur: &mut Cursor<'_>) -> Result<LtlFormula, DiscreteError> {
    if cur.eat("(") {
        let f = ltl_or(cur)?;
        cur.expect(")")?;
        return Ok(f);
    }
    if cur.eat("\"") {
        let start = cur.pos();
        let Some(len) = cur.rest().find('"') else {
            return Err(cur.error("unterminated string").into());
        };
        let mut inner = cur.slice(start, start + len);
        let c = crate::constraint::parse_flow(&mut inner, None).map_err(|e| match e {
            crate::constraint::ConstraintError::Parse(p) => DiscreteError::Syntax(p),
            other => DiscreteError::Syntax(cur.error_at(start, other.to_string())),
        })?;
        if !inner.at_end() {
            return Err(inner.error("unexpected text in flow atom").into());
        }
        cur.set_pos(start + len + 1);
        return Ok(L::Flow(c));
    }
    let pos = cur.pos();
    match cur.ident() {
        Some("true") => Ok(L::True),
        Some("false") => Ok(L::False),
        Some(id) => match id.strip_prefix('b').and_then(|d| d.parse::<u32>().ok()) {
            Some(j) => Ok(L::Bit(j)),
            None => Err(cur.error_at(pos, format!("unknown proposition `{id}`")).into()),
        },
        None => Err(cur
            .error(format!("expected a formula, found {}", cur.describe_next()))
            .into()),
    }
}

/// `γ(φ) = ⋀ᵢ ¬bᵢ ∧ γ₀(φ)`.
pub fn gamma(phi: &HyLtlFormula, enc: &ActionEncoding) -> Result<LtlFormula, DiscreteError> {
    let no_bits = (1..enc.n()).fold(L::Bit(0).not(), |acc, j| acc.and(L::Bit(j).not()));
    Ok(no_bits.and(gamma0(phi, enc)?))
}

/// Homomorphic part of γ: actions become their bit patterns, flow atoms stay.
pub fn gamma0(phi: &HyLtlFormula, enc: &ActionEncoding) -> Result<LtlFormula, DiscreteError> {
    use HyLtlFormula as H;
    Ok(match phi {
        H::True => L::True,
        H::False => L::False,
        H::Flow(f) => L::Flow(f.clone()),
        H::Action(a) => enc
            .bit_formula(a)
            .ok_or_else(|| DiscreteError::UnknownAction(a.name().to_string()))?,
        H::Not(a) => gamma0(a, enc)?.not(),
        H::And(a, b) => gamma0(a, enc)?.and(gamma0(b, enc)?),
        H::Or(a, b) => gamma0(a, enc)?.or(gamma0(b, enc)?),
        H::Next(a) => gamma0(a, enc)?.next(),
        H::Until(a, b) => gamma0(a, enc)?.until(gamma0(b, enc)?),
        H::Release(a, b) => gamma0(a, enc)?.release(gamma0(b, enc)?),
    })
}

/// A subset of `AP`: flow atoms as a mask over the word's universe, bits as a
/// mask with bit `j` for `b_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Letter {
    pub flows: u64,
    pub bits: u32,
}

/// Lasso word `stem · loop^ω` over letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiscreteWord {
    universe: Arc<Universe>,
    stem: Vec<Letter>,
    cycle: Vec<Letter>,
}

impl DiscreteWord {
    pub fn new(universe: Arc<Universe>, stem: Vec<Letter>, cycle: Vec<Letter>) -> Result<Self, DiscreteError> {
        if cycle.is_empty() {
            return Err(DiscreteError::EmptyLoop);
        }
        Ok(DiscreteWord { universe, stem, cycle })
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn stem(&self) -> &[Letter] {
        &self.stem
    }

    pub fn cycle(&self) -> &[Letter] {
        &self.cycle
    }

    pub fn len(&self) -> usize {
        self.stem.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letter(&self, i: usize) -> Letter {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.cycle[i - self.stem.len()]
        }
    }

    pub fn succ(&self, i: usize) -> usize {
        if i + 1 < self.len() {
            i + 1
        } else {
            self.stem.len()
        }
    }

    /// Letter at position `i` of the infinite word (0-based).
    pub fn letter_at(&self, i: usize) -> Letter {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    fn write_letter(&self, f: &mut fmt::Formatter<'_>, l: Letter) -> fmt::Result {
        let mut parts: Vec<String> = (0..32).filter(|j| l.bits >> j & 1 == 1).map(|j| format!("b{j}")).collect();
        parts.extend(
            (0..self.universe.len())
                .filter(|&k| l.flows >> k & 1 == 1)
                .map(|k| format!("\"{}\"", self.universe.constraints()[k])),
        );
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl fmt::Display for DiscreteWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.stem {
            self.write_letter(f, *l)?;
            f.write_str(" ")?;
        }
        f.write_str("(")?;
        for (i, l) in self.cycle.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            self.write_letter(f, *l)?;
        }
        f.write_str(")")
    }
}

/// Σ-abstraction: letter `i` holds the flow atoms satisfied throughout
/// trajectory `i` and, for `i > 1`, the bits of the preceding action.
pub fn sigma(alpha: &AbstractLassoTrace, enc: &ActionEncoding) -> Result<DiscreteWord, DiscreteError> {
    let bits = |a: &Action| enc.bits(a).ok_or_else(|| DiscreteError::UnknownAction(a.name().to_string()));
    let s = alpha.stem().len();
    let m = alpha.cycle().len();
    let letter = |k: usize| -> Result<Letter, DiscreteError> {
        let flows = alpha.step_at(k).trajectory.invariant_mask() & alpha.universe().full_mask();
        let bits = if k == 0 { 0 } else { bits(&alpha.step_at(k - 1).action)? };
        Ok(Letter { flows, bits })
    };
    // Positions after the first loop letter repeat with period `m`.
    let stem = (0..=s).map(letter).collect::<Result<Vec<_>, _>>()?;
    let cycle = (s + 1..=s + m).map(letter).collect::<Result<Vec<_>, _>>()?;
    DiscreteWord::new(alpha.universe().clone(), stem, cycle)
}
