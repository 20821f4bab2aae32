//! Line-oriented text formats for knowledge bases and requirement lists.
//!
//! ```text
//! kb car
//! var type { city limo combi xdrive }
//! constraint c1: 4wheel = yes -> type = xdrive
//! ```
//!
//! Requirement files hold `require <id>: <expr>` lines, least important
//! first. `#` starts a comment. Operator precedence is `!` > `&` > `|` > `->`,
//! and `->` associates to the right.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::ModelError;
use crate::model::{Constraint, Expr, KnowledgeBase, Origin, PreferenceOrder, Variable};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Eq,
    Ne,
    Not,
    And,
    Or,
    Arrow,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Colon,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Colon => "`:`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    column: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.'
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Spanned>, ModelError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let (tok, len) = match c {
            '=' => (Tok::Eq, 1),
            '!' if chars.get(i + 1) == Some(&'=') => (Tok::Ne, 2),
            '!' => (Tok::Not, 1),
            '&' => (Tok::And, 1),
            '|' => (Tok::Or, 1),
            '-' if chars.get(i + 1) == Some(&'>') => (Tok::Arrow, 2),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            ':' => (Tok::Colon, 1),
            c if is_ident_char(c) || c == '-' => {
                // `-` may appear inside identifiers (`4-wheel`) unless it
                // starts an arrow.
                let start = i;
                let mut j = i;
                while j < chars.len() {
                    let d = chars[j];
                    if is_ident_char(d) || (d == '-' && chars.get(j + 1) != Some(&'>')) {
                        j += 1;
                    } else {
                        break;
                    }
                }
                let s: String = chars[start..j].iter().collect();
                (Tok::Ident(s), j - start)
            }
            other => {
                return Err(syntax(
                    line,
                    column,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        out.push(Spanned { tok, column });
        i += len;
    }
    Ok(out)
}

struct ExprParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_column: usize,
    variables: &'a [Variable],
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn column(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.column)
            .unwrap_or(self.end_column)
    }

    fn implication(&mut self) -> Result<Expr, ModelError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.implication()?;
            return Ok(Expr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Expr, ModelError> {
        let mut e = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            e = Expr::or(e, self.conjunction()?);
        }
        Ok(e)
    }

    fn conjunction(&mut self) -> Result<Expr, ModelError> {
        let mut e = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            e = Expr::and(e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, ModelError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Expr::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.implication()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(syntax(self.line, self.column(), "expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            _ => self.atom(),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ModelError> {
        let column = self.column();
        match self.toks.get(self.pos) {
            Some(Spanned {
                tok: Tok::Ident(s), ..
            }) => {
                self.pos += 1;
                Ok((s.clone(), column))
            }
            Some(other) => Err(syntax(
                self.line,
                column,
                format!("expected {what}, found {}", other.tok.describe()),
            )),
            None => Err(syntax(self.line, column, format!("expected {what}"))),
        }
    }

    fn atom(&mut self) -> Result<Expr, ModelError> {
        let (name, var_col) = self.ident("variable")?;
        let cmp_col = self.column();
        let is_eq = match self.peek() {
            Some(Tok::Eq) => true,
            Some(Tok::Ne) => false,
            _ => return Err(syntax(self.line, cmp_col, "expected `=` or `!=`")),
        };
        self.pos += 1;
        let (value, val_col) = self.ident("value")?;
        let var = self.variables.iter().position(|v| v.name == name).ok_or(
            ModelError::UndeclaredVariable {
                line: self.line,
                column: var_col,
                name: name.clone(),
            },
        )?;
        let val =
            self.variables[var]
                .value_index(&value)
                .ok_or(ModelError::ValueOutsideDomain {
                    line: self.line,
                    column: val_col,
                    variable: name,
                    value,
                })?;
        Ok(if is_eq {
            Expr::eq(var, val)
        } else {
            Expr::ne(var, val)
        })
    }
}

fn parse_expr_tokens(
    toks: &[Spanned],
    line: usize,
    end_column: usize,
    variables: &[Variable],
) -> Result<Expr, ModelError> {
    let mut p = ExprParser {
        toks,
        pos: 0,
        line,
        end_column,
        variables,
    };
    let e = p.implication()?;
    if let Some(t) = p.toks.get(p.pos) {
        return Err(syntax(
            line,
            t.column,
            format!("unexpected {}", t.tok.describe()),
        ));
    }
    Ok(e)
}

/// Parses a standalone expression against the variables of `kb`.
pub fn parse_expr(text: &str, kb: &KnowledgeBase) -> Result<Expr, ModelError> {
    let toks = tokenize(text, 1)?;
    parse_expr_tokens(&toks, 1, text.chars().count() + 1, &kb.variables)
}

/// `<keyword> <id> : <expr...>`; returns the id and the expression tokens.
fn split_labelled<'t>(
    toks: &'t [Spanned],
    line: usize,
    keyword: &str,
) -> Result<(String, &'t [Spanned]), ModelError> {
    let id = match toks.get(1) {
        Some(Spanned {
            tok: Tok::Ident(s), ..
        }) => s.clone(),
        Some(t) => return Err(syntax(line, t.column, format!("expected {keyword} id"))),
        None => {
            return Err(syntax(
                line,
                toks[0].column,
                format!("expected {keyword} id"),
            ))
        }
    };
    match toks.get(2) {
        Some(Spanned {
            tok: Tok::Colon, ..
        }) => {}
        Some(t) => return Err(syntax(line, t.column, "expected `:`")),
        None => return Err(syntax(line, toks[1].column, "expected `:`")),
    }
    Ok((id, &toks[3..]))
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l))
}

/// Parses a knowledge-base file.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase, ModelError> {
    let mut name: Option<String> = None;
    let mut variables = Vec::new();
    let mut pending = Vec::new();

    // Variables first, so constraints may precede the declarations they use.
    for (line, raw) in lines(text) {
        let toks = tokenize(raw, line)?;
        let Some(first) = toks.first() else { continue };
        let end_column = raw.chars().count() + 1;
        match &first.tok {
            Tok::Ident(k) if k == "kb" => {
                if name.is_some() {
                    return Err(syntax(line, first.column, "duplicate `kb` line"));
                }
                match toks.get(1).map(|t| &t.tok) {
                    Some(Tok::Ident(n)) if toks.len() == 2 => name = Some(n.clone()),
                    _ => return Err(syntax(line, first.column, "expected `kb <name>`")),
                }
            }
            Tok::Ident(k) if k == "var" => {
                let vname = match toks.get(1).map(|t| &t.tok) {
                    Some(Tok::Ident(n)) => n.clone(),
                    _ => return Err(syntax(line, first.column, "expected variable name")),
                };
                if toks.get(2).map(|t| &t.tok) != Some(&Tok::LBrace) {
                    let col = toks.get(2).map(|t| t.column).unwrap_or(end_column);
                    return Err(syntax(line, col, "expected `{`"));
                }
                let mut domain = Vec::new();
                let mut closed = false;
                for t in &toks[3..] {
                    if closed {
                        return Err(syntax(line, t.column, "trailing input after `}`"));
                    }
                    match &t.tok {
                        Tok::Ident(v) => domain.push(v.clone()),
                        Tok::RBrace => closed = true,
                        other => {
                            return Err(syntax(
                                line,
                                t.column,
                                format!("unexpected {} in domain", other.describe()),
                            ))
                        }
                    }
                }
                if !closed {
                    return Err(syntax(line, end_column, "expected `}`"));
                }
                variables.push(Variable {
                    name: vname,
                    domain,
                });
            }
            Tok::Ident(k) if k == "constraint" => {
                let (id, _) = split_labelled(&toks, line, "constraint")?;
                pending.push((line, id, toks, end_column));
            }
            _ => {
                return Err(syntax(
                    line,
                    first.column,
                    "expected `kb`, `var` or `constraint`",
                ))
            }
        }
    }

    let Some(name) = name else {
        return Err(syntax(1, 1, "missing `kb <name>` line"));
    };
    let mut constraints = Vec::new();
    for (line, id, toks, end_column) in pending {
        let expr = parse_expr_tokens(&toks[3..], line, end_column, &variables)?;
        constraints.push(Constraint::new(id, expr, Origin::KnowledgeBase));
    }
    KnowledgeBase::new(name, variables, constraints)
}

/// Parses a requirements file against `kb`. File order is preference order.
pub fn parse_requirements(
    text: &str,
    kb: &KnowledgeBase,
) -> Result<(Vec<Constraint>, PreferenceOrder), ModelError> {
    let mut reqs: Vec<Constraint> = Vec::new();
    let mut ids = HashSet::new();
    for (line, raw) in lines(text) {
        let toks = tokenize(raw, line)?;
        let Some(first) = toks.first() else { continue };
        match &first.tok {
            Tok::Ident(k) if k == "require" => {}
            _ => return Err(syntax(line, first.column, "expected `require`")),
        }
        let (id, rest) = split_labelled(&toks, line, "requirement")?;
        if kb.constraint(&id).is_some() {
            return Err(ModelError::IdClash(id));
        }
        if !ids.insert(id.clone()) {
            return Err(ModelError::DuplicateId(id));
        }
        let expr = parse_expr_tokens(rest, line, raw.chars().count() + 1, &kb.variables)?;
        reqs.push(Constraint::new(id, expr, Origin::Requirement));
    }
    if reqs.is_empty() {
        return Err(ModelError::EmptyRequirements);
    }
    let order = PreferenceOrder::new(reqs.iter().map(|r| r.id.clone()).collect())?;
    Ok((reqs, order))
}

pub fn serialize_kb(kb: &KnowledgeBase) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "kb {}", kb.name);
    for v in &kb.variables {
        let _ = writeln!(s, "var {} {{ {} }}", v.name, v.domain.join(" "));
    }
    for c in &kb.constraints {
        let _ = writeln!(s, "constraint {}: {}", c.id, c.expr.render(&kb.variables));
    }
    s
}

pub fn serialize_requirements(reqs: &[Constraint], kb: &KnowledgeBase) -> String {
    let mut s = String::new();
    for r in reqs {
        let _ = writeln!(s, "require {}: {}", r.id, r.expr.render(&kb.variables));
    }
    s
}
