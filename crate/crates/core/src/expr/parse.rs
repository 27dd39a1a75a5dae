//! Recursive-descent parser for the expression grammar.

use super::{builtin_arity, BinaryOp, Expr, UnaryOp};

/// Syntax error with the byte offset where it was detected and a hint at
/// what the parser expected there.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at byte {offset}: {expected}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
}

impl ParseError {
    fn new(offset: usize, expected: impl Into<String>) -> ParseError {
        ParseError {
            offset,
            expected: expected.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(f64),
    Ident(String),
    Question,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Question => "'?'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next_token(&mut self) -> Result<(usize, Tok), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        let simple = match c {
            b'?' => Some(Tok::Question),
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            self.pos += 1;
            return Ok((start, tok));
        }
        if c.is_ascii_digit() {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self
                .src
                .get(self.pos)
                .is_some_and(|&c| c.is_ascii_alphanumeric() || c == b'_')
            {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            return Ok((start, Tok::Ident(text.to_string())));
        }
        Err(ParseError::new(
            start,
            format!("unexpected character '{}'", char::from(c)),
        ))
    }

    fn number(&mut self, start: usize) -> Result<(usize, Tok), ParseError> {
        let digits = |lex: &mut Self| {
            while lex.src.get(lex.pos).is_some_and(u8::is_ascii_digit) {
                lex.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            if !self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                return Err(ParseError::new(self.pos, "digit after decimal point"));
            }
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                digits(self);
            } else {
                // Not an exponent part after all (e.g. "2e" in "2exp..."):
                // leave it for the identifier lexer.
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 = text
            .parse()
            .map_err(|_| ParseError::new(start, "a valid number literal"))?;
        Ok((start, Tok::Number(value)))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn offset(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    fn expect(&mut self, want: &Tok, hint: &str) -> Result<(), ParseError> {
        if self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::new(
                self.offset(),
                format!("expected {hint}, found {}", self.peek().describe()),
            ))
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.term()?);
        }
    }

    // term := factor (('*'|'/') factor)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.factor()?);
        }
    }

    // factor := '-' factor | atom ('^' factor)?
    //
    // '^' binds tighter than unary minus, so "-a^b" is -(a^b) while the
    // left operand of '^' must be a bare atom ("(-a)^b" needs parentheses).
    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == &Tok::Minus {
            self.bump();
            return Ok(Expr::unary(UnaryOp::Neg, self.factor()?));
        }
        let base = self.atom()?;
        if self.peek() == &Tok::Caret {
            self.bump();
            return Ok(Expr::binary(BinaryOp::Pow, base, self.factor()?));
        }
        Ok(base)
    }

    // atom := NUMBER | IDENT | '?' IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'
    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Tok::Number(v) => Ok(Expr::Number(v)),
            Tok::Question => match self.bump() {
                Tok::Ident(name) => Ok(Expr::Pattern(name)),
                other => Err(ParseError::new(
                    offset + 1,
                    format!("expected identifier after '?', found {}", other.describe()),
                )),
            },
            Tok::Ident(name) => {
                if self.peek() != &Tok::LParen {
                    return Ok(Expr::Var(name));
                }
                self.bump();
                let mut args = vec![self.expr()?];
                while self.peek() == &Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(&Tok::RParen, "')'")?;
                if let Some(arity) = builtin_arity(&name) {
                    if args.len() != arity {
                        return Err(ParseError::new(
                            offset,
                            format!(
                                "{name} expects {arity} argument{}, found {}",
                                if arity == 1 { "" } else { "s" },
                                args.len()
                            ),
                        ));
                    }
                }
                Ok(Expr::Call(name, args))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(inner)
            }
            other => Err(ParseError::new(
                offset,
                format!(
                    "expected a number, identifier, or '(', found {}",
                    other.describe()
                ),
            )),
        }
    }
}

/// Parse the concrete syntax into an [`Expr`].
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut lexer = Lexer {
        src: text.as_bytes(),
        pos: 0,
    };
    let mut toks = Vec::new();
    loop {
        let (offset, tok) = lexer.next_token()?;
        let end = tok == Tok::End;
        toks.push((offset, tok));
        if end {
            break;
        }
    }
    let mut parser = Parser { toks, at: 0 };
    let e = parser.expr()?;
    if parser.peek() != &Tok::End {
        return Err(ParseError::new(
            parser.offset(),
            format!("expected end of input, found {}", parser.peek().describe()),
        ));
    }
    Ok(e)
}
