//! Canonical token format.
//!
//! ```text
//! SOL                      start of a loop
//! L <ex> <ey>              line to endpoint
//! A <ex> <ey> <sweep> <ccw> arc to endpoint
//! C <cx> <cy> <r>          circle
//! E <θ> <φ> <γ> <ox> <oy> <oz> <scale> <d+> <d-> <op> <ext>
//! SEP                      end of a sketch/extrusion pair
//! EOS                      end of sequence
//! MASK                     mask placeholder (masked streams only)
//! ```
//!
//! Numeric fields are decimal bins in `0..=255`. Serialization joins tokens
//! with single spaces; parsing accepts any whitespace.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use thiserror::Error;

use crate::quant::QuantizedParam as Q;
use crate::seq::{BoolOp, ConstructionSequence, ExtentType, Extrusion, Loop, Pair, Primitive, Sketch};
use crate::validate::{validate, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    Sol,
    Line,
    Arc,
    Circle,
    Extrude,
    Sep,
    Eos,
    Mask,
    Num(u8),
}

impl Token {
    /// Structural markers carry no geometry and never belong to a
    /// primitive, loop or extrusion segment.
    pub fn is_structural(self) -> bool {
        matches!(self, Token::Sol | Token::Sep | Token::Eos)
    }

    fn keyword(word: &str) -> Option<Token> {
        Some(match word {
            "SOL" => Token::Sol,
            "L" => Token::Line,
            "A" => Token::Arc,
            "C" => Token::Circle,
            "E" => Token::Extrude,
            "SEP" => Token::Sep,
            "EOS" => Token::Eos,
            "MASK" => Token::Mask,
            _ => return None,
        })
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Sol => f.write_str("SOL"),
            Token::Line => f.write_str("L"),
            Token::Arc => f.write_str("A"),
            Token::Circle => f.write_str("C"),
            Token::Extrude => f.write_str("E"),
            Token::Sep => f.write_str("SEP"),
            Token::Eos => f.write_str("EOS"),
            Token::Mask => f.write_str("MASK"),
            Token::Num(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at token {pos}: {msg}")]
    Syntax { pos: usize, msg: &'static str },
    #[error("value {value} at token {pos} is out of range")]
    Range { pos: usize, value: i64 },
    #[error("structure error at token {pos}: {msg}")]
    Structure { pos: usize, msg: &'static str },
    #[error("sequence violates {} invariant(s): {:?}", .0.len(), .0)]
    Invalid(Vec<Violation>),
}

/// Splits text into tokens. Numbers above 255 are rejected here.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    text.split_whitespace()
        .enumerate()
        .map(|(pos, word)| {
            if let Some(t) = Token::keyword(word) {
                return Ok(t);
            }
            let digits = word.strip_prefix('-').unwrap_or(word);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ParseError::Syntax { pos, msg: "unknown token" });
            }
            let value = word.parse::<i64>().unwrap_or(i64::MAX);
            u8::try_from(value)
                .map(Token::Num)
                .map_err(|_| ParseError::Range { pos, value })
        })
        .collect()
}

pub fn tokens_to_string(tokens: &[Token]) -> String {
    let mut out = String::with_capacity(tokens.len() * 4);
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{t}");
    }
    out
}

/// Parses and validates a token stream.
pub fn parse_sequence(text: &str) -> Result<ConstructionSequence, ParseError> {
    parse_tokens(&tokenize(text)?)
}

pub fn parse_tokens(tokens: &[Token]) -> Result<ConstructionSequence, ParseError> {
    let seq = Parser::new(tokens).sequence()?;
    let violations = validate(&seq);
    if violations.is_empty() {
        Ok(seq)
    } else {
        Err(ParseError::Invalid(violations))
    }
}

pub fn serialize_sequence(seq: &ConstructionSequence) -> String {
    tokens_to_string(&to_tokens(seq))
}

pub fn to_tokens(seq: &ConstructionSequence) -> Vec<Token> {
    let mut out = Vec::new();
    for pair in &seq.pairs {
        emit_pair(pair, &mut out);
    }
    out.push(Token::Eos);
    out
}

pub(crate) fn emit_primitive(p: &Primitive, out: &mut Vec<Token>) {
    match p {
        Primitive::Line { end } => {
            out.extend([Token::Line, num(end[0]), num(end[1])]);
        }
        Primitive::Arc { end, sweep, ccw } => {
            out.extend([Token::Arc, num(end[0]), num(end[1]), num(*sweep), Token::Num(u8::from(*ccw))]);
        }
        Primitive::Circle { center, radius } => {
            out.extend([Token::Circle, num(center[0]), num(center[1]), num(*radius)]);
        }
    }
}

pub(crate) fn emit_loop_body(lp: &Loop, out: &mut Vec<Token>) {
    for p in &lp.primitives {
        emit_primitive(p, out);
    }
}

pub(crate) fn emit_extrusion(e: &Extrusion, out: &mut Vec<Token>) {
    out.push(Token::Extrude);
    out.extend(e.numeric().into_iter().map(num));
    out.push(Token::Num(e.bool_op.code()));
    out.push(Token::Num(e.extent.code()));
}

/// Pair body without the trailing `SEP`.
pub(crate) fn emit_pair_body(pair: &Pair, out: &mut Vec<Token>) {
    for lp in &pair.sketch.loops {
        out.push(Token::Sol);
        emit_loop_body(lp, out);
    }
    emit_extrusion(&pair.extrusion, out);
}

fn emit_pair(pair: &Pair, out: &mut Vec<Token>) {
    emit_pair_body(pair, out);
    out.push(Token::Sep);
}

fn num(q: Q) -> Token {
    Token::Num(q.bin())
}

/// Recursive-descent parser over a token slice. Also used to check
/// individual fragments of masked streams.
pub(crate) struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(tokens: &'a [Token]) -> Self {
        Parser { tokens, pos: 0 }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<u8, ParseError> {
        match self.peek() {
            Some(Token::Num(n)) => {
                self.pos += 1;
                Ok(n)
            }
            Some(_) => Err(ParseError::Syntax { pos: self.pos, msg: "expected a number" }),
            None => Err(ParseError::Structure { pos: self.pos, msg: "stream ends inside a command" }),
        }
    }

    fn flag(&mut self, max: u8) -> Result<u8, ParseError> {
        let pos = self.pos;
        let v = self.number()?;
        if v > max {
            return Err(ParseError::Range { pos, value: i64::from(v) });
        }
        Ok(v)
    }

    fn bins<const N: usize>(&mut self) -> Result<[Q; N], ParseError> {
        let mut out = [Q::MIN; N];
        for slot in &mut out {
            *slot = Q::new(self.number()?);
        }
        Ok(out)
    }

    pub(crate) fn primitive(&mut self) -> Result<Primitive, ParseError> {
        let pos = self.pos;
        match self.peek() {
            Some(Token::Line) => {
                self.pos += 1;
                Ok(Primitive::Line { end: self.bins()? })
            }
            Some(Token::Arc) => {
                self.pos += 1;
                let end = self.bins()?;
                let [sweep] = self.bins()?;
                let ccw = self.flag(1)? == 1;
                Ok(Primitive::Arc { end, sweep, ccw })
            }
            Some(Token::Circle) => {
                self.pos += 1;
                let [cx, cy, radius] = self.bins()?;
                Ok(Primitive::Circle { center: [cx, cy], radius })
            }
            _ => Err(ParseError::Syntax { pos, msg: "expected a primitive" }),
        }
    }

    fn at_primitive(&self) -> bool {
        matches!(self.peek(), Some(Token::Line | Token::Arc | Token::Circle))
    }

    /// One or more primitives (a loop without its `SOL`).
    pub(crate) fn loop_body(&mut self) -> Result<Loop, ParseError> {
        if !self.at_primitive() {
            return Err(ParseError::Structure { pos: self.pos, msg: "empty loop" });
        }
        let mut prims = Vec::new();
        while self.at_primitive() {
            prims.push(self.primitive()?);
        }
        Ok(Loop::new(prims))
    }

    pub(crate) fn extrusion(&mut self) -> Result<Extrusion, ParseError> {
        if self.peek() != Some(Token::Extrude) {
            return Err(ParseError::Syntax { pos: self.pos, msg: "expected an extrusion" });
        }
        self.pos += 1;
        let [t, p, g, ox, oy, oz, scale, dist_pos, dist_neg] = self.bins()?;
        let op_pos = self.pos;
        let op = self.flag(3)?;
        let ext = self.flag(2)?;
        let bool_op = BoolOp::from_code(op).ok_or(ParseError::Range { pos: op_pos, value: i64::from(op) })?;
        let extent = ExtentType::from_code(ext).ok_or(ParseError::Range { pos: op_pos + 1, value: i64::from(ext) })?;
        Ok(Extrusion {
            orientation: [t, p, g],
            origin: [ox, oy, oz],
            scale,
            dist_pos,
            dist_neg,
            bool_op,
            extent,
        })
    }

    /// `(SOL loop)+ E ...` without the trailing `SEP`.
    pub(crate) fn pair_body(&mut self) -> Result<Pair, ParseError> {
        let mut loops = Vec::new();
        while self.peek() == Some(Token::Sol) {
            self.pos += 1;
            loops.push(self.loop_body()?);
        }
        if loops.is_empty() {
            return match self.peek() {
                Some(Token::Extrude) => Err(ParseError::Structure { pos: self.pos, msg: "empty sketch" }),
                _ => Err(ParseError::Syntax { pos: self.pos, msg: "expected SOL" }),
            };
        }
        let extrusion = self.extrusion()?;
        Ok(Pair::new(Sketch::new(loops), extrusion))
    }

    pub(crate) fn sequence(&mut self) -> Result<ConstructionSequence, ParseError> {
        let mut pairs = Vec::new();
        loop {
            match self.peek() {
                Some(Token::Eos) => {
                    if pairs.is_empty() {
                        return Err(ParseError::Structure { pos: self.pos, msg: "sequence has no pairs" });
                    }
                    self.pos += 1;
                    if !self.at_end() {
                        return Err(ParseError::Syntax { pos: self.pos, msg: "tokens after EOS" });
                    }
                    break;
                }
                None => {
                    return Err(ParseError::Structure { pos: self.pos, msg: "missing EOS" });
                }
                Some(Token::Mask) => {
                    return Err(ParseError::Syntax { pos: self.pos, msg: "MASK in an unmasked stream" });
                }
                Some(_) => {
                    let pair = self.pair_body()?;
                    match self.peek() {
                        Some(Token::Sep) => self.pos += 1,
                        None => return Err(ParseError::Structure { pos: self.pos, msg: "missing SEP" }),
                        Some(_) => return Err(ParseError::Syntax { pos: self.pos, msg: "expected SEP" }),
                    }
                    pairs.push(pair);
                }
            }
        }
        if pairs[0].extrusion.bool_op != BoolOp::New {
            return Err(ParseError::Structure { pos: 0, msg: "first operation is not New" });
        }
        Ok(ConstructionSequence::new(pairs))
    }
}
