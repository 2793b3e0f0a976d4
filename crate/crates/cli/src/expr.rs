//! Expression mini-language for algebra elements.
//!
//! Grammar:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary ('*' unary)*
//! unary := '-'? atom
//! atom  := number | 'i' | GEN ('^' INT)? | '(' expr ')'
//! ```
//!
//! Generator symbols are single uppercase letters drawn from the active
//! space: the first generator is `U`, the second `V`, and so on through `Z`.
//! Numbers are plain decimals with an optional fraction part (no exponent
//! notation). Exponents are nonzero integers. Products associate left and
//! are evaluated with the twisted product of the active space, so the
//! evaluation is homomorphic in `+` and `×_θ`.

use ncg_core::algebra::{AlgebraElement, LatticePoint, C64};
use ncg_core::forms::GeometrySpace;

/// Names offered for the module generators, in axis order.
const GENERATOR_NAMES: [char; 6] = ['U', 'V', 'W', 'X', 'Y', 'Z'];

/// A parse failure, carrying a 0-based byte offset into the source string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub pos: usize,
    pub message: String,
}

impl std::fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "parse error at byte {}: {}", self.pos, self.message)
    }
}

impl std::error::Error for SyntaxError {}

/// Abstract syntax for the mini-language.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    /// A real decimal literal.
    Literal(f64),
    /// The imaginary unit `i`.
    Imaginary,
    /// A generator power `GEN^exp` (`exp = 1` when no exponent is written).
    Generator { axis: usize, exponent: i64 },
    Sum(Box<ExprAst>, Box<ExprAst>),
    Difference(Box<ExprAst>, Box<ExprAst>),
    Product(Box<ExprAst>, Box<ExprAst>),
    Negation(Box<ExprAst>),
    Group(Box<ExprAst>),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number { value: f64, had_dot: bool, text: String },
    Imaginary,
    Generator { axis: usize },
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    pos: usize,
}

fn err(pos: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError {
        pos,
        message: message.into(),
    }
}

fn tokenize(src: &str, dim: usize) -> Result<Vec<Spanned>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0usize;
    while pos < bytes.len() {
        let b = bytes[pos];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                pos += 1;
            }
            b'+' => {
                out.push(Spanned { token: Token::Plus, pos });
                pos += 1;
            }
            b'-' => {
                out.push(Spanned { token: Token::Minus, pos });
                pos += 1;
            }
            b'*' => {
                out.push(Spanned { token: Token::Star, pos });
                pos += 1;
            }
            b'^' => {
                out.push(Spanned { token: Token::Caret, pos });
                pos += 1;
            }
            b'(' => {
                out.push(Spanned { token: Token::LParen, pos });
                pos += 1;
            }
            b')' => {
                out.push(Spanned { token: Token::RParen, pos });
                pos += 1;
            }
            b'0'..=b'9' => {
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                let mut had_dot = false;
                if pos < bytes.len() && bytes[pos] == b'.' {
                    had_dot = true;
                    pos += 1;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
                let text = &src[start..pos];
                let value: f64 = text
                    .parse()
                    .map_err(|_| err(start, format!("invalid number '{text}'")))?;
                out.push(Spanned {
                    token: Token::Number {
                        value,
                        had_dot,
                        text: text.to_string(),
                    },
                    pos: start,
                });
            }
            b'i' => {
                out.push(Spanned { token: Token::Imaginary, pos });
                pos += 1;
            }
            b'A'..=b'Z' => {
                let name = b as char;
                let axis = GENERATOR_NAMES[..dim.min(GENERATOR_NAMES.len())]
                    .iter()
                    .position(|&g| g == name);
                match axis {
                    Some(axis) => {
                        out.push(Spanned { token: Token::Generator { axis }, pos });
                        pos += 1;
                    }
                    None => {
                        return Err(err(pos, format!("unknown generator '{name}'")));
                    }
                }
            }
            _ => {
                let ch = src[pos..].chars().next().unwrap_or('?');
                return Err(err(pos, format!("unexpected character '{ch}'")));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Spanned],
    cursor: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Spanned> {
        self.tokens.get(self.cursor)
    }

    fn bump(&mut self) -> Option<&'a Spanned> {
        let t = self.tokens.get(self.cursor);
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map(|t| t.pos).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<ExprAst, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().map(|t| &t.token) {
                Some(Token::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = ExprAst::Sum(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = ExprAst::Difference(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst, SyntaxError> {
        let mut lhs = self.unary()?;
        while matches!(self.peek().map(|t| &t.token), Some(Token::Star)) {
            self.bump();
            let rhs = self.unary()?;
            lhs = ExprAst::Product(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ExprAst, SyntaxError> {
        if matches!(self.peek().map(|t| &t.token), Some(Token::Minus)) {
            self.bump();
            let inner = self.atom()?;
            return Ok(ExprAst::Negation(Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<ExprAst, SyntaxError> {
        let at = self.here();
        let Some(t) = self.bump() else {
            return Err(err(at, "expected a number, 'i', a generator, or '('"));
        };
        match &t.token {
            Token::Number { value, .. } => Ok(ExprAst::Literal(*value)),
            Token::Imaginary => Ok(ExprAst::Imaginary),
            Token::Generator { axis } => {
                if matches!(self.peek().map(|t| &t.token), Some(Token::Caret)) {
                    self.bump();
                    let exponent = self.exponent()?;
                    Ok(ExprAst::Generator { axis: *axis, exponent })
                } else {
                    Ok(ExprAst::Generator { axis: *axis, exponent: 1 })
                }
            }
            Token::LParen => {
                let inner = self.expr()?;
                let close = self.here();
                match self.bump().map(|t| &t.token) {
                    Some(Token::RParen) => Ok(ExprAst::Group(Box::new(inner))),
                    _ => Err(err(close, "expected ')'")),
                }
            }
            _ => Err(err(t.pos, "expected a number, 'i', a generator, or '('")),
        }
    }

    fn exponent(&mut self) -> Result<i64, SyntaxError> {
        let at = self.here();
        let negative = if matches!(self.peek().map(|t| &t.token), Some(Token::Minus)) {
            self.bump();
            true
        } else {
            false
        };
        let digits_at = self.here();
        match self.bump().map(|t| (&t.token, t.pos)) {
            Some((Token::Number { had_dot, text, .. }, pos)) => {
                if *had_dot {
                    return Err(err(pos, "exponent must be an integer"));
                }
                let magnitude: i64 = text
                    .parse()
                    .map_err(|_| err(pos, format!("exponent '{text}' out of range")))?;
                if magnitude == 0 {
                    return Err(err(at, "zero exponent is not allowed"));
                }
                Ok(if negative { -magnitude } else { magnitude })
            }
            _ => Err(err(digits_at, "expected an integer exponent after '^'")),
        }
    }
}

/// Parses `src` against the generator vocabulary of `space`.
///
/// Errors carry the byte offset of the offending token: malformed syntax,
/// an unknown generator letter, or a zero exponent.
pub fn parse_expr(src: &str, space: &GeometrySpace) -> Result<ExprAst, SyntaxError> {
    let tokens = tokenize(src, space.algebra_dim())?;
    let mut parser = Parser {
        tokens: &tokens,
        cursor: 0,
        end: src.len(),
    };
    let ast = parser.expr()?;
    if let Some(extra) = parser.peek() {
        return Err(err(extra.pos, "unexpected trailing input"));
    }
    Ok(ast)
}

/// Evaluates a parsed expression in the coordinate algebra of `space`,
/// folding products left-to-right through the twisted product.
pub fn eval_expr(ast: &ExprAst, space: &GeometrySpace) -> AlgebraElement {
    let dim = space.algebra_dim();
    match ast {
        ExprAst::Literal(v) => AlgebraElement::scalar(dim, C64::new(*v, 0.0)),
        ExprAst::Imaginary => AlgebraElement::scalar(dim, C64::new(0.0, 1.0)),
        ExprAst::Generator { axis, exponent } => {
            let mut mode = vec![0i64; dim];
            mode[*axis] = *exponent;
            AlgebraElement::monomial(LatticePoint(mode), C64::new(1.0, 0.0))
        }
        ExprAst::Sum(a, b) => eval_expr(a, space).add(&eval_expr(b, space)),
        ExprAst::Difference(a, b) => eval_expr(a, space).sub(&eval_expr(b, space)),
        ExprAst::Product(a, b) => space
            .theta()
            .mul(&eval_expr(a, space), &eval_expr(b, space))
            .expect("operands share the space's lattice dimension"),
        ExprAst::Negation(a) => eval_expr(a, space).scale(C64::new(-1.0, 0.0)),
        ExprAst::Group(a) => eval_expr(a, space),
    }
}

/// Convenience: parse then evaluate.
pub fn parse_and_eval(src: &str, space: &GeometrySpace) -> Result<AlgebraElement, SyntaxError> {
    let ast = parse_expr(src, space)?;
    Ok(eval_expr(&ast, space))
}
