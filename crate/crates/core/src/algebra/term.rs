use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// A term over the signature of an algebra. Variables are indices; in prefix
/// notation the first four are written `x`, `y`, `z`, `w`, later ones `x4`, `x5`, ...
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    App { op: String, args: Vec<Term> },
}

impl Term {
    pub fn app(op: &str, args: Vec<Term>) -> Term {
        Term::App {
            op: op.to_string(),
            args,
        }
    }

    /// One more than the largest variable index (0 for ground terms).
    pub fn min_arity(&self) -> usize {
        match self {
            Term::Var(v) => v + 1,
            Term::App { args, .. } => args.iter().map(Term::min_arity).max().unwrap_or(0),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Replace variable `i` by `subst[i]`.
    pub fn substitute(&self, subst: &[Term]) -> Term {
        match self {
            Term::Var(v) => subst[*v].clone(),
            Term::App { op, args } => Term::App {
                op: op.clone(),
                args: args.iter().map(|a| a.substitute(subst)).collect(),
            },
        }
    }
}

pub(crate) fn var_name(v: usize) -> String {
    match v {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        3 => "w".into(),
        _ => format!("x{v}"),
    }
}

fn parse_var(name: &str) -> Option<usize> {
    match name {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        "w" => Some(3),
        _ => name.strip_prefix('x')?.parse().ok(),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(&var_name(*v)),
            Term::App { op, args } => {
                write!(f, "{op}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for Term {
    type Err = Error;

    fn from_str(s: &str) -> Result<Term> {
        let mut p = TermParser {
            src: s.as_bytes(),
            pos: 0,
        };
        let t = p.term()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(t)
    }
}

struct TermParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl TermParser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            line: 1,
            column: self.pos + 1,
            message: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c == b'(' || c == b')' || c == b',' || c.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected identifier"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn term(&mut self) -> Result<Term> {
        let name = self.ident()?;
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b'(') {
            self.pos += 1;
            let mut args = Vec::new();
            self.skip_ws();
            if self.src.get(self.pos) == Some(&b')') {
                self.pos += 1;
                return Ok(Term::App { op: name, args });
            }
            loop {
                args.push(self.term()?);
                self.skip_ws();
                match self.src.get(self.pos) {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        return Ok(Term::App { op: name, args });
                    }
                    _ => return Err(self.error("expected `,` or `)`")),
                }
            }
        }
        parse_var(&name)
            .map(Term::Var)
            .ok_or_else(|| self.error(&format!("`{name}` is not a variable")))
    }
}
