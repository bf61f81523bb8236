//! Lexer and recursive-descent parser for types, expressions and `.lim`
//! program files.
//!
//! ```text
//! type   ::= atype | atype "->" type
//! atype  ::= btype | atype "&" btype
//! btype  ::= "Int" | "Bool" | "Top" | "(" type ")"
//! expr   ::= mexpr | mexpr ":" type
//! mexpr  ::= aexpr | mexpr ",," aexpr
//! aexpr  ::= pexpr | aexpr pexpr
//! pexpr  ::= INT | "true" | "false" | "top" | IDENT | "\" IDENT "." expr | "(" expr ")"
//! ```
//!
//! `λ`, `→` and `⊤` are accepted as synonyms for `\`, `->` and `Top`/`top`.

use thiserror::Error;

use crate::syntax::{Expr, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        message: String,
        line: usize,
        column: usize,
        expected: Vec<String>,
    },
    #[error("program contains no expression")]
    MissingExpression,
}

impl ParseError {
    fn at(pos: Pos, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError::Syntax {
            message: message.into(),
            line: pos.line,
            column: pos.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// `(line, column)` of a syntax error, 1-based.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            ParseError::Syntax { line, column, .. } => Some((*line, *column)),
            ParseError::MissingExpression => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

/// Source region covered by an expression node, end exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

/// Spans of an expression tree, shaped like the tree itself. Children are in
/// the same order as the sub-expressions of the corresponding node.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpanTree {
    pub span: Span,
    pub children: Vec<SpanTree>,
}

impl SpanTree {
    /// Follows a child-index path; stops at the deepest node that exists.
    pub fn locate(&self, path: &[usize]) -> Span {
        let mut node = self;
        for &i in path {
            match node.children.get(i) {
                Some(child) => node = child,
                None => break,
            }
        }
        node.span
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Ident(String),
    True,
    False,
    TopVal,
    TopTy,
    TopSym,
    IntTy,
    BoolTy,
    Arrow,
    Amp,
    Merge,
    Colon,
    Lambda,
    Dot,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer {n}"),
            Tok::Ident(x) => format!("identifier `{x}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::TopVal => "`top`".into(),
            Tok::TopTy => "`Top`".into(),
            Tok::TopSym => "`⊤`".into(),
            Tok::IntTy => "`Int`".into(),
            Tok::BoolTy => "`Bool`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Merge => "`,,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Lambda => "`\\`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    start: Pos,
    end: Pos,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() && c != 'λ' || c == '_'
}

fn is_ident_char(c: char) -> bool {
    (c.is_alphanumeric() && c != 'λ') || c == '_' || c == '\''
}

fn lex(input: &str, origin: Pos) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = input.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut pos = origin;
    let advance = |pos: &mut Pos, c: char| {
        if c == '\n' {
            pos.line += 1;
            pos.column = 1;
        } else {
            pos.column += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let start = pos;
        if c.is_whitespace() {
            advance(&mut pos, c);
            i += 1;
            continue;
        }
        let next = chars.get(i + 1).copied();
        // comments run to end of line
        if c == '-' && next == Some('-') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut pos, chars[i]);
                i += 1;
            }
            continue;
        }
        let (tok, len) = match c {
            '-' if next == Some('>') => (Tok::Arrow, 2),
            '-' if next.is_some_and(|d| d.is_ascii_digit()) => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let n = text
                    .parse::<i64>()
                    .map_err(|_| ParseError::at(start, "integer literal out of range", &[]))?;
                (Tok::Int(n), j - i)
            }
            ',' if next == Some(',') => (Tok::Merge, 2),
            '→' => (Tok::Arrow, 1),
            '&' => (Tok::Amp, 1),
            ':' => (Tok::Colon, 1),
            '\\' | 'λ' => (Tok::Lambda, 1),
            '.' => (Tok::Dot, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '⊤' => (Tok::TopSym, 1),
            d if d.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let n = text
                    .parse::<i64>()
                    .map_err(|_| ParseError::at(start, "integer literal out of range", &[]))?;
                (Tok::Int(n), j - i)
            }
            a if is_ident_start(a) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let tok = match text.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "top" => Tok::TopVal,
                    "Top" => Tok::TopTy,
                    "Int" => Tok::IntTy,
                    "Bool" => Tok::BoolTy,
                    _ => Tok::Ident(text),
                };
                (tok, j - i)
            }
            other => {
                return Err(ParseError::at(
                    start,
                    format!("unexpected character `{other}`"),
                    &[],
                ))
            }
        };
        for &ch in &chars[i..i + len] {
            advance(&mut pos, ch);
        }
        i += len;
        tokens.push(Token {
            tok,
            start,
            end: pos,
        });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        start: pos,
        end: pos,
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn new(input: &str, origin: Pos) -> Result<Parser, ParseError> {
        Ok(Parser {
            tokens: lex(input, origin)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn last_end(&self) -> Pos {
        if self.at == 0 {
            self.tokens[0].start
        } else {
            self.tokens[self.at - 1].end
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError::at(
            t.start,
            format!("unexpected {}", t.tok.describe()),
            expected,
        )
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[what]))
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected(&["end of input"]))
        }
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        let dom = self.atype()?;
        if self.peek().tok == Tok::Arrow {
            self.bump();
            let cod = self.ty()?;
            Ok(Type::arrow(dom, cod))
        } else {
            Ok(dom)
        }
    }

    fn atype(&mut self) -> Result<Type, ParseError> {
        let mut t = self.btype()?;
        while self.peek().tok == Tok::Amp {
            self.bump();
            let r = self.btype()?;
            t = Type::and(t, r);
        }
        Ok(t)
    }

    fn btype(&mut self) -> Result<Type, ParseError> {
        match self.peek().tok {
            Tok::IntTy => {
                self.bump();
                Ok(Type::Int)
            }
            Tok::BoolTy => {
                self.bump();
                Ok(Type::Bool)
            }
            Tok::TopTy | Tok::TopSym => {
                self.bump();
                Ok(Type::Top)
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.unexpected(&["`Int`", "`Bool`", "`Top`", "`(`"])),
        }
    }

    fn expr(&mut self) -> Result<(Expr, SpanTree), ParseError> {
        let start = self.peek().start;
        let (e, spans) = self.mexpr()?;
        if self.peek().tok == Tok::Colon {
            self.bump();
            let ty = self.ty()?;
            let span = Span {
                start,
                end: self.last_end(),
            };
            Ok((
                Expr::anno(e, ty),
                SpanTree {
                    span,
                    children: vec![spans],
                },
            ))
        } else {
            Ok((e, spans))
        }
    }

    fn mexpr(&mut self) -> Result<(Expr, SpanTree), ParseError> {
        let start = self.peek().start;
        let (mut e, mut spans) = self.aexpr()?;
        while self.peek().tok == Tok::Merge {
            self.bump();
            let (r, rspans) = self.aexpr()?;
            e = Expr::merge(e, r);
            spans = SpanTree {
                span: Span {
                    start,
                    end: self.last_end(),
                },
                children: vec![spans, rspans],
            };
        }
        Ok((e, spans))
    }

    fn starts_pexpr(&self) -> bool {
        matches!(
            self.peek().tok,
            Tok::Int(_)
                | Tok::True
                | Tok::False
                | Tok::TopVal
                | Tok::TopSym
                | Tok::Ident(_)
                | Tok::Lambda
                | Tok::LParen
        )
    }

    fn aexpr(&mut self) -> Result<(Expr, SpanTree), ParseError> {
        let start = self.peek().start;
        let (mut e, mut spans) = self.pexpr()?;
        while self.starts_pexpr() {
            let (arg, aspans) = self.pexpr()?;
            e = Expr::app(e, arg);
            spans = SpanTree {
                span: Span {
                    start,
                    end: self.last_end(),
                },
                children: vec![spans, aspans],
            };
        }
        Ok((e, spans))
    }

    fn pexpr(&mut self) -> Result<(Expr, SpanTree), ParseError> {
        let tok = self.peek().clone();
        let leaf = |e: Expr, t: &Token| {
            (
                e,
                SpanTree {
                    span: Span {
                        start: t.start,
                        end: t.end,
                    },
                    children: vec![],
                },
            )
        };
        match &tok.tok {
            Tok::Int(n) => {
                self.bump();
                Ok(leaf(Expr::Int(*n), &tok))
            }
            Tok::True => {
                self.bump();
                Ok(leaf(Expr::Bool(true), &tok))
            }
            Tok::False => {
                self.bump();
                Ok(leaf(Expr::Bool(false), &tok))
            }
            Tok::TopVal | Tok::TopSym => {
                self.bump();
                Ok(leaf(Expr::Top, &tok))
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(leaf(Expr::Var(x.clone()), &tok))
            }
            Tok::Lambda => {
                self.bump();
                let param = match self.peek().tok.clone() {
                    Tok::Ident(x) => {
                        self.bump();
                        x
                    }
                    _ => return Err(self.unexpected(&["identifier"])),
                };
                self.expect(Tok::Dot, "`.`")?;
                let (body, bspans) = self.expr()?;
                Ok((
                    Expr::Lam(param, Box::new(body)),
                    SpanTree {
                        span: Span {
                            start: tok.start,
                            end: self.last_end(),
                        },
                        children: vec![bspans],
                    },
                ))
            }
            Tok::LParen => {
                self.bump();
                let (e, mut spans) = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                spans.span = Span {
                    start: tok.start,
                    end: self.last_end(),
                };
                Ok((e, spans))
            }
            _ => Err(self.unexpected(&[
                "integer",
                "`true`",
                "`false`",
                "`top`",
                "identifier",
                "`\\`",
                "`(`",
            ])),
        }
    }
}

const ORIGIN: Pos = Pos { line: 1, column: 1 };

pub fn parse_type(input: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(input, ORIGIN)?;
    let t = p.ty()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_expr(input: &str) -> Result<Expr, ParseError> {
    parse_expr_spanned(input).map(|(e, _)| e)
}

/// Like [`parse_expr`], also returning the span of every node.
pub fn parse_expr_spanned(input: &str) -> Result<(Expr, SpanTree), ParseError> {
    let mut p = Parser::new(input, ORIGIN)?;
    let r = p.expr()?;
    p.finish()?;
    Ok(r)
}

/// A parsed `.lim` file.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub main: Expr,
    /// From `-- expect: <type>`.
    pub expected_type: Option<Type>,
    /// From `-- result: <literal>`, kept as written.
    pub expected_value: Option<String>,
    /// From `-- expect-error: <ErrorKind>`.
    pub expected_error: Option<String>,
    pub spans: SpanTree,
}

fn pragma<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.trim_start().strip_prefix("--")?.trim_start();
    let rest = rest.strip_prefix(key)?.strip_prefix(':')?;
    Some(rest.trim())
}

/// Parses a program: pragmas, comments and a single expression.
pub fn parse_program(input: &str) -> Result<Program, ParseError> {
    let mut expected_type = None;
    let mut expected_value = None;
    let mut expected_error = None;
    for (idx, line) in input.lines().enumerate() {
        if let Some(text) = pragma(line, "expect") {
            let col = line.find(text).unwrap_or(0);
            let origin = Pos {
                line: idx + 1,
                column: line[..col].chars().count() + 1,
            };
            let mut p = Parser::new(text, origin)?;
            let t = p.ty()?;
            p.finish()?;
            expected_type = Some(t);
        } else if let Some(text) = pragma(line, "result") {
            expected_value = Some(text.to_string());
        } else if let Some(text) = pragma(line, "expect-error") {
            expected_error = Some(text.to_string());
        }
    }
    let mut p = Parser::new(input, ORIGIN)?;
    if p.peek().tok == Tok::Eof {
        return Err(ParseError::MissingExpression);
    }
    let (main, spans) = p.expr()?;
    p.finish()?;
    Ok(Program {
        main,
        expected_type,
        expected_value,
        expected_error,
        spans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Type::*;

    #[test]
    fn type_precedence_and_associativity() {
        assert_eq!(
            parse_type("Int & Int -> Bool").unwrap(),
            Type::arrow(Type::and(Int, Int), Bool)
        );
        assert_eq!(
            parse_type("Int -> Int -> Int").unwrap(),
            Type::arrow(Int, Type::arrow(Int, Int))
        );
        assert_eq!(
            parse_type("Int & Bool & Top").unwrap(),
            Type::and(Type::and(Int, Bool), Top)
        );
        assert_eq!(parse_type("⊤ → Int").unwrap(), Type::arrow(Top, Int));
    }

    #[test]
    fn type_errors_report_position() {
        let err = parse_type("Int &").unwrap_err();
        assert_eq!(err.position(), Some((1, 6)));
        let err = parse_type("(Int -> Bool").unwrap_err();
        assert_eq!(err.position(), Some((1, 13)));
        match parse_type("Int Bool").unwrap_err() {
            ParseError::Syntax {
                column, expected, ..
            } => {
                assert_eq!(column, 5);
                assert_eq!(expected, vec!["end of input".to_string()]);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn expressions() {
        assert_eq!(
            parse_expr("1 ,, true").unwrap(),
            Expr::merge(Expr::Int(1), Expr::Bool(true))
        );
        assert_eq!(
            parse_expr("(\\x . x) : Int -> Int").unwrap(),
            Expr::anno(Expr::lam("x", Expr::var("x")), Type::arrow(Int, Int))
        );
        assert_eq!(
            parse_expr("f x y").unwrap(),
            Expr::app(Expr::app(Expr::var("f"), Expr::var("x")), Expr::var("y"))
        );
        assert_eq!(
            parse_expr("λx. x ,, 1").unwrap(),
            Expr::lam("x", Expr::merge(Expr::var("x"), Expr::Int(1)))
        );
        assert_eq!(
            parse_expr("1 ,, 2 ,, 3").unwrap(),
            Expr::merge(Expr::merge(Expr::Int(1), Expr::Int(2)), Expr::Int(3))
        );
        assert_eq!(parse_expr("-3").unwrap(), Expr::Int(-3));
        assert_eq!(parse_expr("⊤").unwrap(), Expr::Top);
    }

    #[test]
    fn expression_errors() {
        assert!(parse_expr("1 ,,").is_err());
        assert!(parse_expr("\\ . x").is_err());
        assert!(parse_expr("(1").is_err());
        assert!(parse_expr("1 : ").is_err());
        assert_eq!(parse_expr("1 $").unwrap_err().position(), Some((1, 3)));
    }

    #[test]
    fn programs() {
        let p =
            parse_program("-- expect: Bool\n(1 ,, ((\\x . true) : Int -> Bool)) : Bool").unwrap();
        assert_eq!(p.expected_type, Some(Bool));
        assert!(matches!(p.main, Expr::Anno(_, Bool)));

        assert_eq!(parse_program(""), Err(ParseError::MissingExpression));
        assert_eq!(
            parse_program("-- expect: Int\n-- just a comment\n"),
            Err(ParseError::MissingExpression)
        );

        let p = parse_program("1 -- trailing comment").unwrap();
        assert_eq!(p.main, Expr::Int(1));
        assert_eq!(p.expected_type, None);

        let p = parse_program("-- result: 2\n-- expect-error: MergeNotDisjoint\n1 ,, 2").unwrap();
        assert_eq!(p.expected_value.as_deref(), Some("2"));
        assert_eq!(p.expected_error.as_deref(), Some("MergeNotDisjoint"));
    }

    #[test]
    fn bad_pragma_type_points_into_the_pragma() {
        let err = parse_program("-- expect: Int &\n1").unwrap_err();
        assert_eq!(err.position(), Some((1, 17)));
    }

    #[test]
    fn spans_cover_nodes() {
        let (_, spans) = parse_expr_spanned("f (1 ,, true)").unwrap();
        let arg = spans.locate(&[1]);
        assert_eq!(arg.start, Pos { line: 1, column: 3 });
        assert_eq!(
            arg.end,
            Pos {
                line: 1,
                column: 14
            }
        );
        let right = spans.locate(&[1, 1]);
        assert_eq!(right.start, Pos { line: 1, column: 9 });
    }
}
