use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use super::{BinOp, Decimal, Expr, Func, FunctionSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier {name:?} at position {position}")]
    UnknownIdentifier { position: usize, name: String },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::UnknownIdentifier { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(Decimal),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(d) => format!("number {d}"),
            Token::Ident(s) => format!("identifier {s:?}"),
            Token::Plus => "'+'".into(),
            Token::Minus => "'-'".into(),
            Token::Star => "'*'".into(),
            Token::Slash => "'/'".into(),
            Token::Caret => "'^'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn syntax(position: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        position,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let single = match c {
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '/' => Some(Token::Slash),
            '^' => Some(Token::Caret),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((start, tok));
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let (lit, next) = lex_number(&chars, i)?;
            out.push((start, Token::Num(lit)));
            i = next;
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Token::Ident(chars[start..i].iter().collect())));
        } else {
            return Err(syntax(start, format!("unexpected character {c:?}")));
        }
    }
    out.push((chars.len(), Token::End));
    Ok(out)
}

fn lex_number(chars: &[char], start: usize) -> Result<(Decimal, usize), ParseError> {
    let mut i = start;
    let mut digits = String::new();
    let mut frac_len: i64 = 0;
    while i < chars.len() && chars[i].is_ascii_digit() {
        digits.push(chars[i]);
        i += 1;
    }
    if i < chars.len() && chars[i] == '.' {
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            digits.push(chars[i]);
            frac_len += 1;
            i += 1;
        }
    }
    if digits.is_empty() {
        return Err(syntax(start, "malformed number"));
    }
    let mut exponent: i64 = 0;
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        let negative = match chars.get(j) {
            Some('-') => {
                j += 1;
                true
            }
            Some('+') => {
                j += 1;
                false
            }
            _ => false,
        };
        let exp_start = j;
        while j < chars.len() && chars[j].is_ascii_digit() {
            j += 1;
        }
        if j == exp_start {
            return Err(syntax(j, "exponent needs digits"));
        }
        let text: String = chars[exp_start..j].iter().collect();
        exponent = text
            .parse::<i64>()
            .ok()
            .filter(|e| *e <= 10_000)
            .ok_or_else(|| syntax(exp_start, "exponent too large"))?;
        if negative {
            exponent = -exponent;
        }
        i = j;
    }
    let mut mantissa: BigInt = digits.parse().expect("ascii digits");
    let scale = frac_len - exponent;
    let lit = if scale >= 0 {
        Decimal::new(mantissa, scale as u32)
    } else {
        mantissa *= num_traits::pow(BigInt::from(10), (-scale) as usize);
        Decimal::new(mantissa, 0)
    };
    Ok((lit, i))
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].1.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.offset(),
                format!(
                    "expected {}, found {}",
                    want.describe(),
                    self.peek().describe()
                ),
            ))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Token::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while *self.peek() == Token::Caret {
            self.bump();
            let negative = if *self.peek() == Token::Minus {
                self.bump();
                true
            } else {
                false
            };
            let at = self.offset();
            let k = match self.bump() {
                Token::Num(d) => d
                    .value()
                    .is_integer()
                    .then(|| d.value().to_integer().to_i32())
                    .flatten()
                    .ok_or_else(|| syntax(at, "exponent must be an integer"))?,
                other => {
                    return Err(syntax(
                        at,
                        format!("expected integer exponent, found {}", other.describe()),
                    ))
                }
            };
            base = Expr::Pow(Box::new(base), if negative { -k } else { k });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Token::Num(d) => Ok(Expr::Num(d)),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Token::Ident(name) if name == "x" => Ok(Expr::Var),
            Token::Ident(name) => {
                let func = Func::from_name(&name)
                    .ok_or(ParseError::UnknownIdentifier { position: at, name })?;
                self.expect(Token::LParen)?;
                let arg = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            other => Err(syntax(at, format!("unexpected {}", other.describe()))),
        }
    }
}

/// Parses a one-variable expression; positions in errors are character
/// offsets.
pub fn parse_function(text: &str) -> Result<FunctionSpec, ParseError> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let ast = parser.expr()?;
    if *parser.peek() != Token::End {
        return Err(syntax(
            parser.offset(),
            format!("unexpected {}", parser.peek().describe()),
        ));
    }
    Ok(FunctionSpec::new(ast))
}
