//! Recursive descent parser for the concrete formula syntax.
//!
//! Precedence, tightest first: `~`, `&`, `|`, `->` (right associative).
//! Quantifiers `exists v.` and `forall v.` extend as far right as possible.
//! Declared binary relations and symbolic binary functions may be written
//! infix; `*` and `/` bind tighter than other symbolic functions.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{Formula, Term};
use crate::structure::{ExpandedStructure, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` expects {expected} argument(s), found {found}")]
    Arity { symbol: String, expected: usize, found: usize },
}

/// The symbols a formula may mention: the signature plus the subset
/// predicates and named parameter constants declared for a query.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    relations: HashMap<String, usize>,
    functions: HashMap<String, usize>,
    predicates: BTreeSet<String>,
    named_params: BTreeSet<String>,
}

impl Vocabulary {
    pub fn new(sig: &Signature) -> Vocabulary {
        Vocabulary {
            relations: sig.relations().iter().cloned().collect(),
            functions: sig.functions().iter().cloned().collect(),
            ..Vocabulary::default()
        }
    }

    /// The signature of the base plus every predicate and parameter name of
    /// the expansion.
    pub fn of(e: &ExpandedStructure) -> Vocabulary {
        let mut v = Vocabulary::new(e.base().signature());
        v.predicates.extend(e.predicates().iter().map(|(n, _)| n.clone()));
        v.named_params.extend(e.params().iter().map(|(n, _)| n.clone()));
        v
    }

    pub fn with_predicate(mut self, name: &str) -> Vocabulary {
        self.predicates.insert(name.to_string());
        self
    }

    pub fn with_param(mut self, name: &str) -> Vocabulary {
        self.named_params.insert(name.to_string());
        self
    }

    fn binary_relation(&self, name: &str) -> bool {
        self.relations.get(name) == Some(&2)
    }

    fn binary_function(&self, name: &str) -> bool {
        is_symbolic(name) && self.functions.get(name) == Some(&2)
    }
}

const SYMBOL_CHARS: &str = "<>=+*/^%!$?-:";

pub(crate) fn is_symbolic(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| SYMBOL_CHARS.contains(c))
}

/// Binding level of an infix function symbol: 2 for `*` and `/`, 1 for
/// other symbolic names.
pub(crate) fn infix_level(name: &str) -> u8 {
    if name == "*" || name == "/" {
        2
    } else {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(String),
    Param(usize),
    Sym(String),
    Not,
    And,
    Or,
    Arrow,
    LParen,
    RParen,
    Comma,
    Dot,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, msg: String| ParseError { line, column, kind: ParseErrorKind::Syntax(msg) };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let start = i;
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Num(chars[start..i].iter().collect())
        } else if c == '@' {
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start + 1..i].iter().collect();
            let index = digits.parse().map_err(|_| err(tl, tc, "expected an element index after `@`".into()))?;
            Tok::Param(index)
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            i += 2;
            Tok::Arrow
        } else if SYMBOL_CHARS.contains(c) {
            while i < chars.len()
                && SYMBOL_CHARS.contains(chars[i])
                && !(chars[i] == '-' && chars.get(i + 1) == Some(&'>'))
            {
                i += 1;
            }
            Tok::Sym(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '~' => Tok::Not,
                '&' => Tok::And,
                '|' => Tok::Or,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                _ => return Err(err(tl, tc, format!("unexpected character `{c}`"))),
            }
        };
        col += i - start;
        out.push(Token { tok, line: tl, column: tc });
    }
    out.push(Token { tok: Tok::End, line, column: col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    voc: &'a Vocabulary,
}

type PResult<T> = Result<T, ParseError>;

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        let t = &self.toks[pos];
        ParseError { line: t.line, column: t.column, kind }
    }

    fn syntax(&self, msg: &str) -> ParseError {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            t => format!("`{}`", show(t)),
        };
        self.error_at(self.pos, ParseErrorKind::Syntax(format!("{msg}, found {found}")))
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(&format!("expected {what}")))
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.conjunction()?];
        while *self.peek() == Tok::Or {
            self.bump();
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts.into()) })
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.unary()?];
        while *self.peek() == Tok::And {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts.into()) })
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(kw) if kw == "exists" || kw == "forall" => {
                self.bump();
                let var = match self.bump() {
                    Tok::Ident(v) if !is_keyword(&v) => v,
                    _ => {
                        self.pos -= 1;
                        return Err(self.syntax("expected a variable after the quantifier"));
                    }
                };
                self.expect(Tok::Dot, "`.` after the quantified variable")?;
                let body = self.formula()?;
                Ok(if kw == "exists" { Formula::exists(&var, body) } else { Formula::forall(&var, body) })
            }
            Tok::Ident(kw) if kw == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(kw) if kw == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::LParen => {
                // Either a parenthesized formula or a term such as `(x + y) = z`.
                let save = self.pos;
                self.bump();
                let as_formula = self.formula().and_then(|f| {
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(f)
                });
                match as_formula {
                    Ok(f) if !self.infix_follows() => Ok(f),
                    Ok(_) => {
                        self.pos = save;
                        self.atom()
                    }
                    Err(e) => {
                        let formula_reach = self.pos;
                        self.pos = save;
                        match self.atom() {
                            Ok(f) => Ok(f),
                            Err(e2) => {
                                if self.pos > formula_reach {
                                    Err(e2)
                                } else {
                                    Err(e)
                                }
                            }
                        }
                    }
                }
            }
            _ => self.atom(),
        }
    }

    /// True when the next token continues a term or an infix atom.
    fn infix_follows(&self) -> bool {
        match self.peek() {
            Tok::Sym(s) => s == "=" || self.voc.binary_relation(s) || self.voc.binary_function(s),
            Tok::Ident(s) => self.voc.binary_relation(s),
            _ => false,
        }
    }

    fn atom(&mut self) -> PResult<Formula> {
        let start = self.pos;
        if let Tok::Ident(name) = self.peek().clone() {
            if *self.peek_at(1) == Tok::LParen {
                if let Some(&arity) = self.voc.relations.get(&name) {
                    self.bump();
                    let args = self.arguments()?;
                    self.check_arity(start, &name, arity, args.len())?;
                    return Ok(Formula::Rel(name, args));
                }
                if self.voc.predicates.contains(&name) {
                    self.bump();
                    let args = self.arguments()?;
                    self.check_arity(start, &name, 1, args.len())?;
                    return Ok(Formula::Pred(name, args.into_iter().next().unwrap()));
                }
                if !self.voc.functions.contains_key(&name) {
                    return Err(self.error_at(start, ParseErrorKind::UnknownSymbol(name)));
                }
            }
        }
        let lhs = self.term()?;
        match self.peek().clone() {
            Tok::Sym(s) if s == "=" => {
                self.bump();
                Ok(Formula::Eq(lhs, self.term()?))
            }
            Tok::Sym(s) | Tok::Ident(s) if self.voc.binary_relation(&s) => {
                self.bump();
                Ok(Formula::Rel(s, vec![lhs, self.term()?]))
            }
            Tok::Sym(s) if !s.is_empty() => Err(self.error_at(self.pos, ParseErrorKind::UnknownSymbol(s))),
            _ => Err(self.syntax("expected `=` or a binary relation")),
        }
    }

    fn check_arity(&self, pos: usize, name: &str, expected: usize, found: usize) -> PResult<()> {
        if expected == found {
            Ok(())
        } else {
            Err(self.error_at(pos, ParseErrorKind::Arity { symbol: name.to_string(), expected, found }))
        }
    }

    fn arguments(&mut self) -> PResult<Vec<Term>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            match self.bump() {
                Tok::Comma => continue,
                Tok::RParen => return Ok(args),
                _ => {
                    self.pos -= 1;
                    return Err(self.syntax("expected `,` or `)`"));
                }
            }
        }
    }

    fn term(&mut self) -> PResult<Term> {
        self.infix_term(1)
    }

    fn infix_term(&mut self, level: u8) -> PResult<Term> {
        let mut lhs = if level == 2 { self.primary_term()? } else { self.infix_term(level + 1)? };
        loop {
            let op = match self.peek() {
                Tok::Sym(s) if self.voc.binary_function(s) && infix_level(s) == level => s.clone(),
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = if level == 2 { self.primary_term()? } else { self.infix_term(level + 1)? };
            lhs = Term::App(op, vec![lhs, rhs]);
        }
    }

    fn primary_term(&mut self) -> PResult<Term> {
        let start = self.pos;
        match self.bump() {
            Tok::Param(i) => Ok(Term::Param(i)),
            Tok::Num(n) => {
                if self.voc.functions.get(&n) == Some(&0) || self.voc.named_params.contains(&n) {
                    Ok(Term::Const(n))
                } else {
                    Err(self.error_at(start, ParseErrorKind::UnknownSymbol(n)))
                }
            }
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Sym(f) if *self.peek() == Tok::LParen && self.voc.functions.contains_key(&f) => self.application(start, f),
            Tok::Ident(name) if !is_keyword(&name) => {
                if *self.peek() == Tok::LParen {
                    if self.voc.functions.contains_key(&name) {
                        return self.application(start, name);
                    }
                    return Err(self.error_at(start, ParseErrorKind::UnknownSymbol(name)));
                }
                if let Some(&arity) = self.voc.functions.get(&name) {
                    self.check_arity(start, &name, arity, 0)?;
                    return Ok(Term::Const(name));
                }
                if self.voc.named_params.contains(&name) {
                    return Ok(Term::Const(name));
                }
                let declared = self.voc.relations.contains_key(&name) || self.voc.predicates.contains(&name);
                if declared || name.starts_with(|c: char| c.is_ascii_uppercase()) {
                    return Err(self.error_at(start, ParseErrorKind::UnknownSymbol(name)));
                }
                Ok(Term::Var(name))
            }
            _ => {
                self.pos = start;
                Err(self.syntax("expected a term"))
            }
        }
    }

    fn application(&mut self, start: usize, name: String) -> PResult<Term> {
        let args = self.arguments()?;
        self.check_arity(start, &name, self.voc.functions[&name], args.len())?;
        Ok(Term::App(name, args))
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "exists" | "forall" | "true" | "false")
}

fn show(t: &Tok) -> String {
    match t {
        Tok::Ident(s) | Tok::Num(s) | Tok::Sym(s) => s.clone(),
        Tok::Param(i) => format!("@{i}"),
        Tok::Not => "~".into(),
        Tok::And => "&".into(),
        Tok::Or => "|".into(),
        Tok::Arrow => "->".into(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
        Tok::Comma => ",".into(),
        Tok::Dot => ".".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parse a formula over the given vocabulary.
pub fn parse(text: &str, voc: &Vocabulary) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, voc };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.syntax("expected end of input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{gen_finite_field, gen_linear_order};

    fn order_voc() -> Vocabulary {
        Vocabulary::new(gen_linear_order(2).unwrap().signature())
    }

    #[test]
    fn quantifiers_and_free_variables() {
        let f = parse("exists y. x < y", &order_voc()).unwrap();
        assert!(matches!(f, Formula::Exists(ref v, _) if v == "y"));
        assert_eq!(f.quantifier_rank(), 1);
        assert_eq!(f.free_variables().into_iter().collect::<Vec<_>>(), ["x"]);
        let g = parse("forall x. exists y. x < y", &order_voc()).unwrap();
        assert_eq!(g.quantifier_rank(), 2);
        assert!(g.is_sentence());
    }

    #[test]
    fn predicates_need_declaration() {
        let voc = order_voc();
        let err = parse("A(x) & ~A(y)", &voc).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownSymbol("A".into()));
        assert_eq!((err.line, err.column), (1, 1));
        let f = parse("A(x) & ~A(y)", &voc.with_predicate("A")).unwrap();
        assert_eq!(f.predicates().into_iter().collect::<Vec<_>>(), ["A"]);
    }

    #[test]
    fn precedence() {
        let voc = order_voc();
        let f = parse("~x < y & y < z | z = x -> x = x", &voc).unwrap();
        let expect = Formula::implies(
            Formula::or(vec![
                Formula::and(vec![
                    Formula::not(Formula::rel("<", vec![Term::var("x"), Term::var("y")])),
                    Formula::rel("<", vec![Term::var("y"), Term::var("z")]),
                ]),
                Formula::eq(Term::var("z"), Term::var("x")),
            ]),
            Formula::eq(Term::var("x"), Term::var("x")),
        );
        assert_eq!(f, expect);
        // Quantifiers extend to the right.
        let g = parse("exists y. x < y & y < x", &voc).unwrap();
        assert!(matches!(g, Formula::Exists(_, ref body) if matches!(**body, Formula::And(_))));
        // Implication associates to the right.
        let h = parse("x = x -> y = y -> z = z", &voc).unwrap();
        assert!(matches!(h, Formula::Implies(_, ref r) if matches!(**r, Formula::Implies(..))));
    }

    #[test]
    fn field_terms() {
        let voc = Vocabulary::new(gen_finite_field(2, 2).unwrap().signature());
        let f = parse("x*x + x + 1 = 0", &voc).unwrap();
        let x = Term::var("x");
        let sq = Term::App("*".into(), vec![x.clone(), x.clone()]);
        let lhs = Term::App("+".into(), vec![Term::App("+".into(), vec![sq, x]), Term::Const("1".into())]);
        assert_eq!(f, Formula::eq(lhs, Term::Const("0".into())));
        assert!(parse("(x + 1) * x = 0", &voc).is_ok());
        assert!(parse("+(x, 1) = x", &voc).is_ok());
        assert!(parse("(x = x) & (x + 1 = 0)", &voc).is_ok());
    }

    #[test]
    fn params_and_errors() {
        let voc = order_voc();
        assert_eq!(parse("x = @3", &voc).unwrap(), Formula::eq(Term::var("x"), Term::Param(3)));
        let named = voc.clone().with_param("c");
        assert_eq!(parse("x = c", &named).unwrap(), Formula::eq(Term::var("x"), Term::Const("c".into())));
        let err = parse("<(x)", &voc);
        assert!(err.is_err());
        let err = parse("exists y x < y", &voc).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(err.column, 10);
        let err = parse("R(x, y)", &voc).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownSymbol("R".into()));
        let sig = crate::structure::StructureBuilder::new("t", 2)
            .relation("R", 2, Vec::<Vec<usize>>::new())
            .build()
            .unwrap();
        let err = parse("R(x)", &Vocabulary::new(sig.signature())).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Arity { symbol: "R".into(), expected: 2, found: 1 });
        assert!(parse("x = x x", &voc).is_err());
        assert!(parse("true & ~false", &voc).is_ok());
    }

    #[test]
    fn multiline_positions() {
        let err = parse("x = x &\n  y ? y", &order_voc()).unwrap_err();
        assert_eq!((err.line, err.column), (2, 5));
    }
}
