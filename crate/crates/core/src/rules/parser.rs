//! Tokenizer and recursive-descent parser for `.rules` files.
//!
//! ```text
//! ruleset := rule*
//! rule    := "rule" IDENT "->" STRING ("priority" INT)? "{" expr "}"
//! expr    := expr "or" term | term
//! term    := term "and" factor | factor
//! factor  := "not" factor | "(" expr ")" | IDENT CMP NUMBER
//! CMP     := "<" | "<=" | ">" | ">=" | "==" | "!="
//! ```
//!
//! `#` starts a comment running to the end of the line.

use std::collections::HashSet;

use super::ast::{Attribute, CmpOp, Comparison, Expr, Rule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Rule,
    Priority,
    And,
    Or,
    Not,
    Ident(String),
    Str(String),
    Num(String),
    Arrow,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Cmp(CmpOp),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Rule => "`rule`".into(),
            Tok::Priority => "`priority`".into(),
            Tok::And => "`and`".into(),
            Tok::Or => "`or`".into(),
            Tok::Not => "`not`".into(),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Arrow => "`->`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Cmp(op) => format!("`{}`", op.symbol()),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::RuleSyntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let peek = chars.get(i + 1).copied();
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            match s.as_str() {
                "rule" => Tok::Rule,
                "priority" => Tok::Priority,
                "and" => Tok::And,
                "or" => Tok::Or,
                "not" => Tok::Not,
                _ => Tok::Ident(s),
            }
        } else if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i).copied() {
                    None => return Err(syntax(start_line, start_col, "unterminated string")),
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        let esc = match chars.get(i).copied() {
                            Some('"') => '"',
                            Some('\\') => '\\',
                            Some('n') => '\n',
                            _ => return Err(syntax(line, col, "invalid escape in string")),
                        };
                        s.push(esc);
                        bump!();
                    }
                    Some('\n') => {
                        return Err(syntax(start_line, start_col, "unterminated string"))
                    }
                    Some(ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            Tok::Str(s)
        } else if c.is_ascii_digit()
            || ((c == '-' || c == '+') && peek.is_some_and(|p| p.is_ascii_digit() || p == '.'))
            || (c == '.' && peek.is_some_and(|p| p.is_ascii_digit()))
        {
            let mut s = String::new();
            if c == '-' || c == '+' {
                s.push(c);
                bump!();
            }
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                s.push(chars[i]);
                bump!();
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = (i, line, col, s.len());
                s.push(chars[i]);
                bump!();
                if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                    s.push(chars[i]);
                    bump!();
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        s.push(chars[i]);
                        bump!();
                    }
                } else {
                    // not an exponent after all
                    (i, line, col) = (save.0, save.1, save.2);
                    s.truncate(save.3);
                }
            }
            Tok::Num(s)
        } else {
            let two = peek.map(|p| (c, p));
            let (tok, len) = match two {
                Some(('-', '>')) => (Tok::Arrow, 2),
                Some(('<', '=')) => (Tok::Cmp(CmpOp::Le), 2),
                Some(('>', '=')) => (Tok::Cmp(CmpOp::Ge), 2),
                Some(('=', '=')) => (Tok::Cmp(CmpOp::Eq), 2),
                Some(('!', '=')) => (Tok::Cmp(CmpOp::Ne), 2),
                _ => match c {
                    '<' => (Tok::Cmp(CmpOp::Lt), 1),
                    '>' => (Tok::Cmp(CmpOp::Gt), 1),
                    '{' => (Tok::LBrace, 1),
                    '}' => (Tok::RBrace, 1),
                    '(' => (Tok::LParen, 1),
                    ')' => (Tok::RParen, 1),
                    other => {
                        return Err(syntax(line, col, format!("unexpected character `{other}`")))
                    }
                },
            };
            for _ in 0..len {
                bump!();
            }
            tok
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Spanned> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(syntax(
                t.line,
                t.column,
                format!("expected {what}, found {}", t.tok.describe()),
            ))
        }
    }

    fn rule(&mut self) -> Result<Rule> {
        self.expect(Tok::Rule, "`rule`")?;
        let t = self.next();
        let name = match t.tok {
            Tok::Ident(s) => s,
            other => {
                return Err(syntax(
                    t.line,
                    t.column,
                    format!("expected rule name, found {}", other.describe()),
                ))
            }
        };
        self.expect(Tok::Arrow, "`->`")?;
        let t = self.next();
        let label = match t.tok {
            Tok::Str(s) => s,
            other => {
                return Err(syntax(
                    t.line,
                    t.column,
                    format!("expected label string, found {}", other.describe()),
                ))
            }
        };
        let mut priority = 0;
        if self.peek().tok == Tok::Priority {
            self.next();
            let t = self.next();
            priority = match &t.tok {
                Tok::Num(s) => s.parse::<i64>().map_err(|_| {
                    syntax(t.line, t.column, format!("priority must be an integer, found `{s}`"))
                })?,
                other => {
                    return Err(syntax(
                        t.line,
                        t.column,
                        format!("expected priority integer, found {}", other.describe()),
                    ))
                }
            };
        }
        self.expect(Tok::LBrace, "`{`")?;
        let condition = self.expr()?;
        self.expect(Tok::RBrace, "`}`")?;
        Ok(Rule {
            name,
            label,
            priority,
            condition,
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while self.peek().tok == Tok::Or {
            self.next();
            lhs = Expr::or(lhs, self.term()?);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while self.peek().tok == Tok::And {
            self.next();
            lhs = Expr::and(lhs, self.factor()?);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        let t = self.next();
        match t.tok {
            Tok::Not => Ok(Expr::not(self.factor()?)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let attr = Attribute::from_name(&name).ok_or(Error::UnknownAttribute {
                    name,
                    line: t.line,
                    column: t.column,
                })?;
                let c = self.next();
                let op = match c.tok {
                    Tok::Cmp(op) => op,
                    other => {
                        return Err(syntax(
                            c.line,
                            c.column,
                            format!("expected comparison operator, found {}", other.describe()),
                        ))
                    }
                };
                let n = self.next();
                let value = match &n.tok {
                    Tok::Num(s) => s
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| syntax(n.line, n.column, format!("invalid number `{s}`")))?,
                    other => {
                        return Err(syntax(
                            n.line,
                            n.column,
                            format!("expected number, found {}", other.describe()),
                        ))
                    }
                };
                Ok(Expr::Cmp(Comparison { attr, op, value }))
            }
            other => Err(syntax(
                t.line,
                t.column,
                format!("expected condition, found {}", other.describe()),
            )),
        }
    }
}

pub(super) fn parse(text: &str) -> Result<Vec<Rule>> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let mut rules = Vec::new();
    let mut names = HashSet::new();
    while p.peek().tok != Tok::Eof {
        let rule = p.rule()?;
        if !names.insert(rule.name.clone()) {
            return Err(Error::DuplicateRule(rule.name));
        }
        rules.push(rule);
    }
    Ok(rules)
}
