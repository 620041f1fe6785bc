//! KLTL⁺ syntax: parsing, printing, positivity checking and the
//! knowledge-rewriting chain.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// A KLTL formula. Implication is desugared at parse time.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String),
    /// Fresh knowledge atom `k#<index>`; its body lives in [`RewriteChain::atoms`].
    KAtom(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Always(Box<Formula>),
    Eventually(Box<Formula>),
    Know(Box<Formula>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("K occurs under an odd number of negations in `{subformula}` (path {path:?})")]
    PositivityViolation {
        path: Vec<usize>,
        subformula: String,
    },
}

pub fn atom(name: &str) -> Formula {
    Formula::Atom(name.to_string())
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }
    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }
    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }
    pub fn always(f: Formula) -> Formula {
        Formula::Always(Box::new(f))
    }
    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Box::new(f))
    }
    pub fn know(f: Formula) -> Formula {
        Formula::Know(Box::new(f))
    }

    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            True | False | Atom(_) | KAtom(_) => vec![],
            Not(a) | Next(a) | Always(a) | Eventually(a) | Know(a) => vec![a],
            And(a, b) | Or(a, b) | Until(a, b) => vec![a, b],
        }
    }

    /// Node count.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Maximum number of `Know` nodes on a root-to-leaf path.
    pub fn k_depth(&self) -> usize {
        let below = self
            .children()
            .iter()
            .map(|c| c.k_depth())
            .max()
            .unwrap_or(0);
        if matches!(self, Formula::Know(_)) {
            below + 1
        } else {
            below
        }
    }

    pub fn is_ltl(&self) -> bool {
        self.k_depth() == 0
    }

    /// Proposition names, sorted.
    pub fn propositions(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<String>) {
        if let Formula::Atom(p) = self {
            out.insert(p.clone());
        }
        for c in self.children() {
            c.collect_props(out);
        }
    }

    /// Indices of the knowledge atoms occurring in the formula.
    pub fn katoms(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_katoms(&mut out);
        out
    }

    fn collect_katoms(&self, out: &mut BTreeSet<usize>) {
        if let Formula::KAtom(i) = self {
            out.insert(*i);
        }
        for c in self.children() {
            c.collect_katoms(out);
        }
    }

    fn map_children(&self, f: &mut impl FnMut(&Formula) -> Formula) -> Formula {
        use Formula::*;
        match self {
            True | False | Atom(_) | KAtom(_) => self.clone(),
            Not(a) => Not(Box::new(f(a))),
            Next(a) => Next(Box::new(f(a))),
            Always(a) => Always(Box::new(f(a))),
            Eventually(a) => Eventually(Box::new(f(a))),
            Know(a) => Know(Box::new(f(a))),
            And(a, b) => And(Box::new(f(a)), Box::new(f(b))),
            Or(a, b) => Or(Box::new(f(a)), Box::new(f(b))),
            Until(a, b) => Until(Box::new(f(a)), Box::new(f(b))),
        }
    }
}

// ---------------------------------------------------------------------------
// Printing

fn precedence(f: &Formula) -> u8 {
    use Formula::*;
    match f {
        Or(..) => 1,
        And(..) => 2,
        Until(..) => 3,
        Not(_) | Next(_) | Always(_) | Eventually(_) | Know(_) => 4,
        True | False | Atom(_) | KAtom(_) => 5,
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Formula::*;
        let wrap = |f: &mut fmt::Formatter<'_>, child: &Formula, min: u8| -> fmt::Result {
            if precedence(child) < min {
                write!(f, "({child})")
            } else {
                write!(f, "{child}")
            }
        };
        match self {
            True => write!(f, "true"),
            False => write!(f, "false"),
            Atom(p) => write!(f, "{p}"),
            KAtom(i) => write!(f, "k#{i}"),
            Not(a) | Next(a) | Always(a) | Eventually(a) | Know(a) => {
                let op = match self {
                    Not(_) => "!",
                    Next(_) => "X ",
                    Always(_) => "G ",
                    Eventually(_) => "F ",
                    _ => "K ",
                };
                write!(f, "{op}")?;
                wrap(f, a, 4)
            }
            // left-associative: right operand needs strictly higher precedence
            And(a, b) => {
                wrap(f, a, 2)?;
                write!(f, " & ")?;
                wrap(f, b, 3)
            }
            Or(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " | ")?;
                wrap(f, b, 2)
            }
            // right-associative
            Until(a, b) => {
                wrap(f, a, 4)?;
                write!(f, " U ")?;
                wrap(f, b, 3)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    Next,
    Always,
    Eventually,
    Know,
    Until,
    And,
    Or,
    Implies,
    LParen,
    RParen,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>, FormulaError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, message: String| FormulaError::Syntax {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "true" => Tok::True,
                "false" => Tok::False,
                "X" => Tok::Next,
                "G" => Tok::Always,
                "F" => Tok::Eventually,
                "K" => Tok::Know,
                "U" => Tok::Until,
                _ => Tok::Ident(word),
            };
            out.push((tok, l0, c0));
            continue;
        }
        let tok = match c {
            '!' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                col += 1;
                Tok::Implies
            }
            other => return Err(err(l0, c0, format!("unexpected character `{other}`"))),
        };
        i += 1;
        col += 1;
        out.push((tok, l0, c0));
    }
    out.push((Tok::End, line, col));
    Ok(out)
}

impl Lexer {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> FormulaError {
        let (_, line, column) = self.toks[self.pos];
        FormulaError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn implication(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.until()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = Formula::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::Until {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        let ctor: fn(Formula) -> Formula = match self.peek() {
            Tok::Not => Formula::not,
            Tok::Next => Formula::next,
            Tok::Always => Formula::always,
            Tok::Eventually => Formula::eventually,
            Tok::Know => Formula::know,
            _ => return self.primary(),
        };
        self.bump();
        Ok(ctor(self.unary()?))
    }

    fn primary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.implication()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error("expected `)`"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::End => Err(self.error("unexpected end of input")),
            other => Err(self.error(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses a formula. Precedence, tightest first: `! X G F K`, `U`, `&`, `|`, `->`.
/// `U` and `->` associate to the right.
pub fn parse(text: &str) -> Result<Formula, FormulaError> {
    let mut lexer = Lexer {
        toks: lex(text)?,
        pos: 0,
    };
    let f = lexer.implication()?;
    if *lexer.peek() != Tok::End {
        return Err(lexer.error("trailing input"));
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Positivity

/// Succeeds iff every `Know` node sits under an even number of negations.
pub fn check_positive(f: &Formula) -> Result<(), FormulaError> {
    fn walk(f: &Formula, negated: bool, path: &mut Vec<usize>) -> Result<(), FormulaError> {
        if negated && matches!(f, Formula::Know(_)) {
            return Err(FormulaError::PositivityViolation {
                path: path.clone(),
                subformula: f.to_string(),
            });
        }
        let flip = matches!(f, Formula::Not(_));
        for (i, c) in f.children().into_iter().enumerate() {
            path.push(i);
            walk(c, negated ^ flip, path)?;
            path.pop();
        }
        Ok(())
    }
    walk(f, false, &mut Vec::new())
}

// ---------------------------------------------------------------------------
// Rewriting chain

/// A fresh atom `k#index` standing for `K body`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeAtom {
    pub index: usize,
    /// The chain level `i ≥ 1` at which the atom first appears.
    pub level: usize,
    /// Know-free formula over the model propositions and lower-level atoms.
    pub body: Formula,
}

impl KnowledgeAtom {
    pub fn name(&self) -> String {
        katom_name(self.index)
    }
}

pub fn katom_name(index: usize) -> String {
    format!("k#{index}")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteChain {
    /// `levels[0]` is the input formula, the last level is Know-free.
    pub levels: Vec<Formula>,
    pub atoms: Vec<KnowledgeAtom>,
}

impl RewriteChain {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn top(&self) -> &Formula {
        self.levels.last().expect("chain has at least one level")
    }

    /// Atoms occurring in `levels[level]`.
    pub fn atoms_at(&self, level: usize) -> BTreeSet<usize> {
        self.levels[level].katoms()
    }

    /// Replaces atoms of level `level` in `f` by `K body`.
    pub fn unfold_level(&self, f: &Formula, level: usize) -> Formula {
        match f {
            Formula::KAtom(i) if self.atoms[*i].level == level => {
                Formula::know(self.atoms[*i].body.clone())
            }
            _ => f.map_children(&mut |c| self.unfold_level(c, level)),
        }
    }

    /// Replaces every atom by its knowledge formula, recursively.
    pub fn unfold_all(&self, f: &Formula) -> Formula {
        match f {
            Formula::KAtom(i) => Formula::know(self.unfold_all(&self.atoms[*i].body)),
            _ => f.map_children(&mut |c| self.unfold_all(c)),
        }
    }
}

/// Builds `φ⁰ … φᵈ` by repeatedly replacing innermost `K γ` with fresh atoms.
/// Identical bodies on one level share an atom; indices follow post-order.
pub fn rewrite_chain(f: &Formula) -> RewriteChain {
    let mut levels = vec![f.clone()];
    let mut atoms: Vec<KnowledgeAtom> = Vec::new();
    while !levels.last().unwrap().is_ltl() {
        let level = levels.len();
        let mut shared: HashMap<Formula, usize> = HashMap::new();
        let next = replace_innermost(levels.last().unwrap(), level, &mut shared, &mut atoms);
        levels.push(next);
    }
    RewriteChain { levels, atoms }
}

fn replace_innermost(
    f: &Formula,
    level: usize,
    shared: &mut HashMap<Formula, usize>,
    atoms: &mut Vec<KnowledgeAtom>,
) -> Formula {
    if let Formula::Know(body) = f {
        if body.is_ltl() {
            let index = *shared.entry((**body).clone()).or_insert_with(|| {
                atoms.push(KnowledgeAtom {
                    index: atoms.len(),
                    level,
                    body: (**body).clone(),
                });
                atoms.len() - 1
            });
            return Formula::KAtom(index);
        }
    }
    f.map_children(&mut |c| replace_innermost(c, level, shared, atoms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn parses_light_switch_formula() {
        assert_eq!(
            p("G (K t | K !t)"),
            Formula::always(Formula::or(
                Formula::know(atom("t")),
                Formula::know(Formula::not(atom("t")))
            ))
        );
    }

    #[test]
    fn parses_single_atom() {
        assert_eq!(p("p"), atom("p"));
    }

    #[test]
    fn implication_desugars() {
        let expected = Formula::or(
            Formula::not(atom("p")),
            Formula::know(Formula::or(
                Formula::not(atom("q")),
                Formula::or(Formula::know(atom("r")), Formula::know(atom("z"))),
            )),
        );
        assert_eq!(p("p -> K(q -> K r | K z)"), expected);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            p("a | b & c"),
            Formula::or(atom("a"), Formula::and(atom("b"), atom("c")))
        );
        assert_eq!(
            p("a U b U c"),
            Formula::until(atom("a"), Formula::until(atom("b"), atom("c")))
        );
        assert_eq!(
            p("!a U b"),
            Formula::until(Formula::not(atom("a")), atom("b"))
        );
        assert_eq!(
            p("a & b U c"),
            Formula::and(atom("a"), Formula::until(atom("b"), atom("c")))
        );
        assert_eq!(
            p("a -> b -> c"),
            Formula::implies(atom("a"), Formula::implies(atom("b"), atom("c")))
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse("p &\n  (q | )") {
            Err(FormulaError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 8)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("k#1"), Err(FormulaError::Syntax { .. })));
        assert!(matches!(parse("p q"), Err(FormulaError::Syntax { .. })));
    }

    #[test]
    fn positivity() {
        assert!(check_positive(&p("G (K t | K !t)")).is_ok());
        assert!(matches!(
            check_positive(&p("!K p")),
            Err(FormulaError::PositivityViolation { .. })
        ));
        assert!(check_positive(&p("!!K p")).is_ok());
        assert!(matches!(
            check_positive(&p("K p -> q")),
            Err(FormulaError::PositivityViolation { .. })
        ));
        match check_positive(&p("a & !(b | K c)")) {
            Err(FormulaError::PositivityViolation { path, .. }) => assert_eq!(path, vec![1, 0, 1]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nested_chain() {
        let chain = rewrite_chain(&p("p -> K(q -> K r | K z)"));
        assert_eq!(chain.depth(), 2);
        assert_eq!(chain.atoms.len(), 3);
        // post-order: r, z, then gamma
        assert_eq!(chain.atoms[0].body, atom("r"));
        assert_eq!(chain.atoms[1].body, atom("z"));
        assert_eq!(
            chain.levels[1],
            Formula::implies(
                atom("p"),
                Formula::know(Formula::implies(
                    atom("q"),
                    Formula::or(Formula::KAtom(0), Formula::KAtom(1))
                ))
            )
        );
        assert_eq!(
            chain.levels[2],
            Formula::implies(atom("p"), Formula::KAtom(2))
        );
        assert_eq!(
            chain.atoms[2].body,
            Formula::implies(atom("q"), Formula::or(Formula::KAtom(0), Formula::KAtom(1)))
        );
        assert_eq!(chain.atoms[2].level, 2);
        assert_eq!(chain.unfold_all(chain.top()), chain.levels[0]);
    }

    #[test]
    fn pure_ltl_chain() {
        let chain = rewrite_chain(&p("F p"));
        assert_eq!(chain.depth(), 0);
        assert!(chain.atoms.is_empty());
    }

    #[test]
    fn light_switch_chain() {
        let chain = rewrite_chain(&p("G (K t | K !t)"));
        assert_eq!(chain.depth(), 1);
        assert_eq!(chain.atoms[0].body, atom("t"));
        assert_eq!(chain.atoms[1].body, Formula::not(atom("t")));
        assert_eq!(
            chain.levels[1],
            Formula::always(Formula::or(Formula::KAtom(0), Formula::KAtom(1)))
        );
        assert_eq!(chain.top().to_string(), "G (k#0 | k#1)");
    }

    #[test]
    fn identical_bodies_share_an_atom() {
        let chain = rewrite_chain(&p("K p & G K p"));
        assert_eq!(chain.atoms.len(), 1);
        assert_eq!(
            chain.top(),
            &Formula::and(Formula::KAtom(0), Formula::always(Formula::KAtom(0)))
        );
    }

    #[test]
    fn atoms_can_survive_several_levels() {
        let chain = rewrite_chain(&p("K r & K K z"));
        assert_eq!(chain.depth(), 2);
        assert_eq!(chain.atoms_at(1), [0, 1].into_iter().collect());
        assert_eq!(chain.atoms_at(2), [0, 2].into_iter().collect());
    }
}
