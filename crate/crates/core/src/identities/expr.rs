//! Relation expressions, their text grammar and printer.
//!
//! Grammar (loosest first):
//!
//! ```text
//! spec    := expr ("<=" | "==") expr
//! expr    := compose ("|" compose)*
//! compose := meet ((";" | ";^" INT | ";_" INT) meet)*
//! meet    := postfix ("&" postfix)*
//! postfix := atom ("^~" | "^*")*
//! atom    := "(" expr ")" | "id" | "all" | "bar(" expr ")" | "pow(" expr "," INT ")"
//!          | [class ":"] ident
//! ```
//!
//! `;` is composition, `;^m` is `S∘T∘S…` with `m` factors and `;_m` is
//! `…T∘S∘T` with `m` factors. Classes: `cong`, `tol`, `adm`, `uadm`, `u2`, `ucong2`.

use super::{IdentitySpec, Mode, RelClass, VarDecl};
use crate::error::{Error, Result};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(usize),
    /// Δ
    Id,
    /// 1
    All,
    Meet(Box<Expr>, Box<Expr>),
    Join(Box<Expr>, Box<Expr>),
    Compose(Box<Expr>, Box<Expr>),
    /// `S ∘_m T`
    Alt(Box<Expr>, Box<Expr>, usize),
    /// `S _m∘ T`
    AltLeft(Box<Expr>, Box<Expr>, usize),
    Converse(Box<Expr>),
    Star(Box<Expr>),
    Bar(Box<Expr>),
    Pow(Box<Expr>, usize),
}

impl Expr {
    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn meet(self, other: Expr) -> Expr {
        Expr::Meet(Box::new(self), Box::new(other))
    }

    pub fn join(self, other: Expr) -> Expr {
        Expr::Join(Box::new(self), Box::new(other))
    }

    pub fn then(self, other: Expr) -> Expr {
        Expr::Compose(Box::new(self), Box::new(other))
    }

    pub fn alt(self, other: Expr, m: usize) -> Expr {
        Expr::Alt(Box::new(self), Box::new(other), m)
    }

    pub fn alt_left(self, other: Expr, m: usize) -> Expr {
        Expr::AltLeft(Box::new(self), Box::new(other), m)
    }

    pub fn conv(self) -> Expr {
        Expr::Converse(Box::new(self))
    }

    pub fn star(self) -> Expr {
        Expr::Star(Box::new(self))
    }

    pub fn bar(self) -> Expr {
        Expr::Bar(Box::new(self))
    }

    pub fn pow(self, h: usize) -> Expr {
        Expr::Pow(Box::new(self), h)
    }

    /// Left-nested composition of a nonempty list.
    pub fn chain(factors: Vec<Expr>) -> Expr {
        let mut it = factors.into_iter();
        let first = it.next().expect("nonempty chain");
        it.fold(first, Expr::then)
    }

    /// Variable occurrences, left to right.
    pub fn occurrences(&self, out: &mut Vec<usize>) {
        match self {
            Expr::Var(v) => out.push(*v),
            Expr::Id | Expr::All => {}
            Expr::Meet(a, b)
            | Expr::Join(a, b)
            | Expr::Compose(a, b)
            | Expr::Alt(a, b, _)
            | Expr::AltLeft(a, b, _) => {
                a.occurrences(out);
                b.occurrences(out);
            }
            Expr::Converse(a) | Expr::Star(a) | Expr::Bar(a) | Expr::Pow(a, _) => a.occurrences(out),
        }
    }

    /// Rewrite `∘_m`, `_m∘` and powers as explicit compositions.
    pub fn unfold(&self) -> Expr {
        match self {
            Expr::Var(_) | Expr::Id | Expr::All => self.clone(),
            Expr::Meet(a, b) => a.unfold().meet(b.unfold()),
            Expr::Join(a, b) => a.unfold().join(b.unfold()),
            Expr::Compose(a, b) => a.unfold().then(b.unfold()),
            Expr::Alt(s, t, m) => Expr::chain(alt_factors(&s.unfold(), &t.unfold(), *m, false)),
            Expr::AltLeft(s, t, m) => Expr::chain(alt_factors(&s.unfold(), &t.unfold(), *m, true)),
            Expr::Converse(a) => a.unfold().conv(),
            Expr::Star(a) => a.unfold().star(),
            Expr::Bar(a) => a.unfold().bar(),
            Expr::Pow(a, h) => {
                let a = a.unfold();
                Expr::chain(vec![a; *h])
            }
        }
    }

    /// Rename variables.
    pub fn map_vars(&self, f: &mut impl FnMut(usize) -> usize) -> Expr {
        match self {
            Expr::Var(v) => Expr::Var(f(*v)),
            Expr::Id | Expr::All => self.clone(),
            Expr::Meet(a, b) => a.map_vars(f).meet(b.map_vars(f)),
            Expr::Join(a, b) => a.map_vars(f).join(b.map_vars(f)),
            Expr::Compose(a, b) => a.map_vars(f).then(b.map_vars(f)),
            Expr::Alt(a, b, m) => a.map_vars(f).alt(b.map_vars(f), *m),
            Expr::AltLeft(a, b, m) => a.map_vars(f).alt_left(b.map_vars(f), *m),
            Expr::Converse(a) => a.map_vars(f).conv(),
            Expr::Star(a) => a.map_vars(f).star(),
            Expr::Bar(a) => a.map_vars(f).bar(),
            Expr::Pow(a, h) => a.map_vars(f).pow(*h),
        }
    }

    fn validate(&self, vars: usize) -> Result<()> {
        match self {
            Expr::Var(v) if *v >= vars => Err(Error::UnboundVariable(format!("#{v}"))),
            Expr::Var(_) | Expr::Id | Expr::All => Ok(()),
            Expr::Meet(a, b) | Expr::Join(a, b) | Expr::Compose(a, b) => {
                a.validate(vars)?;
                b.validate(vars)
            }
            Expr::Alt(a, b, m) | Expr::AltLeft(a, b, m) => {
                if *m == 0 {
                    return Err(Error::BadParams("alternating composition needs m ≥ 1".into()));
                }
                a.validate(vars)?;
                b.validate(vars)
            }
            Expr::Pow(a, h) => {
                if *h == 0 {
                    return Err(Error::BadParams("relational power needs h ≥ 1".into()));
                }
                a.validate(vars)
            }
            Expr::Converse(a) | Expr::Star(a) | Expr::Bar(a) => a.validate(vars),
        }
    }
}

/// Factors of `S ∘_m T` (or `S _m∘ T` when `left`).
pub(crate) fn alt_factors<T: Clone>(s: &T, t: &T, m: usize, left: bool) -> Vec<T> {
    // S _m∘ T ends with T: it is S ∘_m T for even m and T ∘_m S for odd m
    let (first, second) = if left && m % 2 == 1 { (t, s) } else { (s, t) };
    (0..m)
        .map(|i| if i % 2 == 0 { first.clone() } else { second.clone() })
        .collect()
}

pub(crate) fn validate_spec(spec: &IdentitySpec) -> Result<()> {
    spec.lhs.validate(spec.vars.len())?;
    spec.rhs.validate(spec.vars.len())
}

// ---------------------------------------------------------------- printing

const P_JOIN: u8 = 0;
const P_COMPOSE: u8 = 1;
const P_MEET: u8 = 2;
const P_POSTFIX: u8 = 3;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Join(..) => P_JOIN,
        Expr::Compose(..) | Expr::Alt(..) | Expr::AltLeft(..) => P_COMPOSE,
        Expr::Meet(..) => P_MEET,
        _ => P_POSTFIX,
    }
}

pub(crate) struct ExprDisplay<'a> {
    pub expr: &'a Expr,
    pub vars: &'a [VarDecl],
}

impl ExprDisplay<'_> {
    fn sub(&self, e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = ExprDisplay { expr: e, vars: self.vars };
        if prec(e) < min {
            write!(f, "({inner})")
        } else {
            write!(f, "{inner}")
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Var(v) => match self.vars.get(*v) {
                Some(d) => write!(f, "{}:{}", d.class.prefix(), d.name),
                None => write!(f, "?{v}"),
            },
            Expr::Id => f.write_str("id"),
            Expr::All => f.write_str("all"),
            Expr::Join(a, b) => {
                self.sub(a, P_JOIN, f)?;
                f.write_str(" | ")?;
                self.sub(b, P_JOIN + 1, f)
            }
            Expr::Compose(a, b) => {
                self.sub(a, P_COMPOSE, f)?;
                f.write_str(" ; ")?;
                self.sub(b, P_COMPOSE + 1, f)
            }
            Expr::Alt(a, b, m) => {
                self.sub(a, P_COMPOSE, f)?;
                write!(f, " ;^{m} ")?;
                self.sub(b, P_COMPOSE + 1, f)
            }
            Expr::AltLeft(a, b, m) => {
                self.sub(a, P_COMPOSE, f)?;
                write!(f, " ;_{m} ")?;
                self.sub(b, P_COMPOSE + 1, f)
            }
            Expr::Meet(a, b) => {
                self.sub(a, P_MEET, f)?;
                f.write_str(" & ")?;
                self.sub(b, P_MEET + 1, f)
            }
            Expr::Converse(a) => {
                self.sub(a, P_POSTFIX, f)?;
                f.write_str("^~")
            }
            Expr::Star(a) => {
                self.sub(a, P_POSTFIX, f)?;
                f.write_str("^*")
            }
            Expr::Bar(a) => write!(f, "bar({})", ExprDisplay { expr: a, vars: self.vars }),
            Expr::Pow(a, h) => write!(f, "pow({}, {h})", ExprDisplay { expr: a, vars: self.vars }),
        }
    }
}

// ----------------------------------------------------------------- parsing

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    LParen,
    RParen,
    Comma,
    Colon,
    Amp,
    Bar,
    Semi,
    Caret,
    Underscore,
    Tilde,
    Star,
    Le,
    EqEq,
    End,
}

struct Lexed {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let err = |message: String| Error::Parse {
            line: l0,
            column: c0,
            message,
        };
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
        let start = i;
        let tok = if c.is_ascii_alphabetic() {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            Tok::Int(s.parse().map_err(|_| err(format!("integer `{s}` out of range")))?)
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '&' => Tok::Amp,
                '|' => Tok::Bar,
                ';' => Tok::Semi,
                '^' => Tok::Caret,
                '_' => Tok::Underscore,
                '~' => Tok::Tilde,
                '*' => Tok::Star,
                '<' if chars.get(i) == Some(&'=') => {
                    i += 1;
                    Tok::Le
                }
                '=' if chars.get(i) == Some(&'=') => {
                    i += 1;
                    Tok::EqEq
                }
                _ => return Err(err(format!("unexpected character `{c}`"))),
            }
        };
        col += i - start;
        out.push(Lexed {
            tok,
            line: l0,
            column: c0,
        });
    }
    out.push(Lexed {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    vars: Vec<VarDecl>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let t = &self.toks[self.pos];
        Error::Parse {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn int(&mut self) -> Result<usize> {
        match self.peek().clone() {
            Tok::Int(n) if n >= 1 => {
                self.bump();
                Ok(n)
            }
            Tok::Int(_) => Err(self.error("expected a positive integer")),
            _ => Err(self.error("expected an integer")),
        }
    }

    fn spec(&mut self) -> Result<IdentitySpec> {
        let lhs = self.expr()?;
        let mode = match self.peek() {
            Tok::Le => Mode::Inclusion,
            Tok::EqEq => Mode::Equality,
            _ => return Err(self.error("expected `<=` or `==`")),
        };
        self.bump();
        let rhs = self.expr()?;
        if *self.peek() != Tok::End {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(IdentitySpec {
            name: None,
            vars: std::mem::take(&mut self.vars),
            lhs,
            rhs,
            mode,
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.compose()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            e = e.join(self.compose()?);
        }
        Ok(e)
    }

    fn compose(&mut self) -> Result<Expr> {
        let mut e = self.meet()?;
        while *self.peek() == Tok::Semi {
            self.bump();
            match self.peek() {
                Tok::Caret => {
                    self.bump();
                    let m = self.int()?;
                    e = e.alt(self.meet()?, m);
                }
                Tok::Underscore => {
                    self.bump();
                    let m = self.int()?;
                    e = e.alt_left(self.meet()?, m);
                }
                _ => e = e.then(self.meet()?),
            }
        }
        Ok(e)
    }

    fn meet(&mut self) -> Result<Expr> {
        let mut e = self.postfix()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            e = e.meet(self.postfix()?);
        }
        Ok(e)
    }

    fn postfix(&mut self) -> Result<Expr> {
        let mut e = self.atom()?;
        while *self.peek() == Tok::Caret {
            match self.peek2() {
                Tok::Tilde => e = e.conv(),
                Tok::Star => e = e.star(),
                _ => {
                    self.bump();
                    return Err(self.error("expected `~` or `*` after `^`"));
                }
            }
            self.bump();
            self.bump();
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek2() == Tok::Colon {
                    let class = RelClass::from_prefix(&name)
                        .ok_or_else(|| self.error(format!("unknown relation class `{name}`")))?;
                    self.bump();
                    self.bump();
                    match self.peek().clone() {
                        Tok::Ident(v) => {
                            self.bump();
                            self.var(v, Some(class))
                        }
                        _ => Err(self.error("expected a variable name")),
                    }
                } else {
                    match name.as_str() {
                        "id" => {
                            self.bump();
                            Ok(Expr::Id)
                        }
                        "all" => {
                            self.bump();
                            Ok(Expr::All)
                        }
                        "bar" => {
                            self.bump();
                            self.expect(Tok::LParen, "`(` after bar")?;
                            let e = self.expr()?;
                            self.expect(Tok::RParen, "`)`")?;
                            Ok(e.bar())
                        }
                        "pow" => {
                            self.bump();
                            self.expect(Tok::LParen, "`(` after pow")?;
                            let e = self.expr()?;
                            self.expect(Tok::Comma, "`,`")?;
                            let h = self.int()?;
                            self.expect(Tok::RParen, "`)`")?;
                            Ok(e.pow(h))
                        }
                        _ => {
                            self.bump();
                            self.var(name, None)
                        }
                    }
                }
            }
            Tok::End => Err(self.error("unexpected end of input")),
            t => Err(self.error(format!("unexpected token {t:?}"))),
        }
    }

    fn var(&mut self, name: String, class: Option<RelClass>) -> Result<Expr> {
        // report errors at the variable name itself
        self.pos -= 1;
        let result = match self.vars.iter().position(|d| d.name == name) {
            Some(i) => match class {
                Some(c) if c != self.vars[i].class => Err(self.error(format!(
                    "variable `{name}` declared as {} but used as {}",
                    self.vars[i].class.prefix(),
                    c.prefix()
                ))),
                _ => Ok(Expr::Var(i)),
            },
            None => match class {
                Some(class) => {
                    self.vars.push(VarDecl::new(&name, class));
                    Ok(Expr::Var(self.vars.len() - 1))
                }
                None => Err(self.error(format!("variable `{name}` needs a class prefix on first use"))),
            },
        };
        self.pos += 1;
        result
    }
}

pub(crate) fn parse_spec(text: &str) -> Result<IdentitySpec> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars: Vec::new(),
    };
    let spec = p.spec()?;
    validate_spec(&spec)?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_precedence() {
        let s = parse_spec("tol:T & (uadm:s ; s) <= pow(T & s, 2)").unwrap();
        assert_eq!(s.vars.len(), 2);
        assert_eq!(s.vars[0].class, RelClass::Tolerance);
        assert_eq!(s.vars[1].class, RelClass::UAdmissible);
        assert_eq!(s.lhs, Expr::var(0).meet(Expr::var(1).then(Expr::var(1))));
        assert_eq!(s.rhs, Expr::var(0).meet(Expr::var(1)).pow(2));
        assert_eq!(s.mode, Mode::Inclusion);
        // & binds tighter than ;, which binds tighter than |
        let t = parse_spec("adm:a ; adm:b & adm:c | a == a").unwrap();
        assert_eq!(
            t.lhs,
            Expr::var(0).then(Expr::var(1).meet(Expr::var(2))).join(Expr::var(0))
        );
    }

    #[test]
    fn postfix_and_alternation() {
        let s = parse_spec("adm:R^~^* ;^3 adm:S <= R ;_2 S").unwrap();
        assert_eq!(s.lhs, Expr::var(0).conv().star().alt(Expr::var(1), 3));
        assert_eq!(s.rhs, Expr::var(0).alt_left(Expr::var(1), 2));
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "tol:T & (uadm:s ; uadm:s) <= pow(tol:T & uadm:s, 2)",
            "adm:R ; (adm:S ; adm:T) == adm:R ; adm:S ; adm:T",
            "cong:a & (cong:b | cong:c) <= bar(cong:b ;^3 cong:c)^*",
            "(u2:s & id | all)^~ <= u2:s ;_4 (u2:s ; id)",
            "ucong2:s & ucong2:s & ucong2:s <= ucong2:s & (ucong2:s & ucong2:s)",
        ] {
            let s = parse_spec(text).unwrap();
            assert_eq!(s.to_string(), text);
            assert_eq!(parse_spec(&s.to_string()).unwrap(), s);
        }
    }

    #[test]
    fn errors_carry_positions() {
        match parse_spec("adm:R <= S") {
            Err(Error::Parse { line: 1, column: 10, message }) => assert!(message.contains("class prefix")),
            other => panic!("{other:?}"),
        }
        match parse_spec("adm:R ;\n  foo:S <= R") {
            Err(Error::Parse { line: 2, column: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_spec("adm:R <= cong:R"), Err(Error::Parse { column: 15, .. })));
        assert!(matches!(parse_spec("adm:R <= R ;^0 R"), Err(Error::Parse { .. })));
        assert!(matches!(parse_spec("adm:R R"), Err(Error::Parse { .. })));
        assert!(matches!(parse_spec("adm:R <= R $"), Err(Error::Parse { column: 12, .. })));
        assert!(matches!(parse_spec("adm:R <= (R"), Err(Error::Parse { .. })));
    }

    #[test]
    fn unfold_expands_alternation() {
        let s = Expr::var(0);
        let t = Expr::var(1);
        assert_eq!(s.clone().alt(t.clone(), 3).unfold(), Expr::chain(vec![s.clone(), t.clone(), s.clone()]));
        assert_eq!(s.clone().alt_left(t.clone(), 3).unfold(), Expr::chain(vec![t.clone(), s.clone(), t.clone()]));
        assert_eq!(s.clone().alt_left(t.clone(), 2).unfold(), Expr::chain(vec![s.clone(), t.clone()]));
        assert_eq!(s.clone().pow(3).unfold(), Expr::chain(vec![s.clone(), s.clone(), s]));
    }
}
