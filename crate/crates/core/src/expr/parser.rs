use super::{Ast, BinOp, Constant, Func, Node};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
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
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| Error::Parse {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push(Token {
                    tok: Tok::Num(v),
                    start,
                    end: i,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(src[start..i].to_string()),
                    start,
                    end: i,
                });
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        i += 1;
        out.push(Token { tok, start, end: i });
    }
    out.push(Token {
        tok: Tok::End,
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    variables: &'a [String],
}

pub(super) fn parse(src: &str, variables: &[String]) -> Result<Ast> {
    let mut p = Parser {
        tokens: lex(src)?,
        pos: 0,
        variables,
    };
    let ast = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::End {
        return Err(Error::Parse {
            offset: t.start,
            message: format!(
                "expected operator or end of input, found {}",
                t.tok.describe()
            ),
        });
    }
    Ok(ast)
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<usize> {
        let t = self.peek();
        if t.tok == want {
            let end = t.end;
            self.bump();
            Ok(end)
        } else {
            Err(Error::Parse {
                offset: t.start,
                message: format!("expected {}, found {}", want.describe(), t.tok.describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Ast> {
        match self.peek().tok {
            Tok::Minus => {
                let start = self.bump().start;
                let inner = self.unary()?;
                let end = inner.span.end;
                Ok(Ast {
                    node: Node::Neg(Box::new(inner)),
                    span: start..end,
                })
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Ast> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Ast> {
        let t = self.peek();
        let (start, end) = (t.start, t.end);
        match t.tok.clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Ast {
                    node: Node::Num(v),
                    span: start..end,
                })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                let close = self.expect(Tok::RParen)?;
                Ok(Ast {
                    node: inner.node,
                    span: start..close,
                })
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(i) = self.variables.iter().position(|v| *v == name) {
                    return Ok(Ast {
                        node: Node::Var(i),
                        span: start..end,
                    });
                }
                if let Some(func) = Func::lookup(&name) {
                    return self.call(func, start);
                }
                let node = match name.as_str() {
                    "pi" => Node::Const(Constant::Pi),
                    "e" => Node::Const(Constant::E),
                    _ => {
                        return Err(Error::UnknownIdentifier {
                            name,
                            offset: start,
                        })
                    }
                };
                Ok(Ast {
                    node,
                    span: start..end,
                })
            }
            other => Err(Error::Parse {
                offset: start,
                message: format!("expected expression, found {}", other.describe()),
            }),
        }
    }

    fn call(&mut self, func: Func, start: usize) -> Result<Ast> {
        self.expect(Tok::LParen)?;
        let mut args = vec![self.expr()?];
        while self.peek().tok == Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        let close_at = self.peek().start;
        let end = self.expect(Tok::RParen)?;
        if args.len() != func.arity() {
            return Err(Error::Parse {
                offset: close_at,
                message: format!(
                    "`{}` takes {} argument(s), found {}",
                    func.name(),
                    func.arity(),
                    args.len()
                ),
            });
        }
        Ok(Ast {
            node: Node::Call(func, args),
            span: start..end,
        })
    }
}

fn binary(op: BinOp, lhs: Ast, rhs: Ast) -> Ast {
    let span = lhs.span.start..rhs.span.end;
    Ast {
        node: Node::Binary(op, Box::new(lhs), Box::new(rhs)),
        span,
    }
}
