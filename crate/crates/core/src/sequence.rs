//! Text format for pulse sequences.
//!
//! ```text
//! seq   := "init" ";" (step ";")* "read" level [";"]
//! step  := "pulse" pol angle | "free" ("tau" | NUMBER unit)
//! pol   := "plus" | "minus" | "linear"
//! angle := "pi" | "pi/2" | NUMBER "rad"
//! level := "p0" | "p+1" | "p-1"
//! unit  := "s" | "ms" | "us" | "ns" | "ps"
//! ```
//!
//! Whitespace is insignificant and `#` starts a comment running to the end
//! of the line. A number and its unit may be written with or without a space
//! between them (`40ns`, `40 ns`).

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;

use crate::spin::{Polarization, MINUS, PLUS, ZERO};

/// Population read out at the end of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    P0,
    PlusOne,
    MinusOne,
}

impl Level {
    /// Basis index in the `(|+1>, |0>, |-1>)` ordering.
    pub fn index(self) -> usize {
        match self {
            Level::P0 => ZERO,
            Level::PlusOne => PLUS,
            Level::MinusOne => MINUS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FreeDuration {
    /// The swept delay.
    Tau,
    /// Fixed delay in seconds.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Init,
    /// Rotation by `angle` on the transition(s) selected by `polarization`.
    /// An angle of `pi` is a full transfer.
    Pulse {
        polarization: Polarization,
        angle: f64,
    },
    Free(FreeDuration),
    Read(Level),
}

/// A validated sequence: `Init`, any pulses and free evolutions, `Read`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    steps: Vec<Step>,
}

impl PulseSequence {
    /// Checks the structural invariants and wraps `steps`.
    pub fn from_steps(steps: Vec<Step>) -> Result<Self, ParseError> {
        let at = |kind| ParseError { line: 0, column: 0, kind };
        match steps.first() {
            Some(Step::Init) => {}
            _ => return Err(at(ParseErrorKind::MissingInit)),
        }
        match steps.last() {
            Some(Step::Read(_)) if steps.len() >= 2 => {}
            _ => return Err(at(ParseErrorKind::MissingRead)),
        }
        for s in &steps[1..steps.len() - 1] {
            match s {
                Step::Init => return Err(at(ParseErrorKind::DuplicateInit)),
                Step::Read(_) => return Err(at(ParseErrorKind::TrailingInput("read".into()))),
                Step::Pulse { angle, .. } if !angle.is_finite() => {
                    return Err(at(ParseErrorKind::InvalidNumber(angle.to_string())))
                }
                Step::Free(FreeDuration::Fixed(t)) if !(t.is_finite() && *t >= 0.0) => {
                    return Err(at(ParseErrorKind::InvalidNumber(t.to_string())))
                }
                _ => {}
            }
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Steps between `Init` and `Read`.
    pub fn body(&self) -> &[Step] {
        &self.steps[1..self.steps.len() - 1]
    }

    pub fn readout(&self) -> Level {
        match self.steps.last() {
            Some(Step::Read(l)) => *l,
            _ => unreachable!("validated on construction"),
        }
    }

    pub fn symbolic_free_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Free(FreeDuration::Tau))).count()
    }

    /// Total free-evolution time for a given `tau`.
    pub fn free_time(&self, tau: f64) -> f64 {
        self.steps
            .iter()
            .map(|s| match s {
                Step::Free(FreeDuration::Tau) => tau,
                Step::Free(FreeDuration::Fixed(t)) => *t,
                _ => 0.0,
            })
            .sum()
    }
}

impl fmt::Display for PulseSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            match s {
                Step::Init => f.write_str("init")?,
                Step::Pulse { polarization, angle } => {
                    let pol = match polarization {
                        Polarization::Plus => "plus",
                        Polarization::Minus => "minus",
                        Polarization::Linear => "linear",
                    };
                    if *angle == PI {
                        write!(f, "pulse {pol} pi")?
                    } else if *angle == FRAC_PI_2 {
                        write!(f, "pulse {pol} pi/2")?
                    } else {
                        write!(f, "pulse {pol} {angle:e} rad")?
                    }
                }
                Step::Free(FreeDuration::Tau) => f.write_str("free tau")?,
                Step::Free(FreeDuration::Fixed(t)) => write!(f, "free {t:e} s")?,
                Step::Read(level) => f.write_str(match level {
                    Level::P0 => "read p0",
                    Level::PlusOne => "read p+1",
                    Level::MinusOne => "read p-1",
                })?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownPolarization(String),
    UnknownLevel(String),
    UnknownUnit(String),
    InvalidNumber(String),
    InvalidAngle(String),
    UnknownStep(String),
    MissingInit,
    DuplicateInit,
    MissingRead,
    ExpectedSemicolon(String),
    UnexpectedEnd,
    TrailingInput(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnknownPolarization(t) => {
                write!(f, "unknown polarization `{t}` (expected plus, minus or linear)")
            }
            ParseErrorKind::UnknownLevel(t) => write!(f, "unknown readout level `{t}` (expected p0, p+1 or p-1)"),
            ParseErrorKind::UnknownUnit(t) => write!(f, "unknown time unit `{t}`"),
            ParseErrorKind::InvalidNumber(t) => write!(f, "invalid number `{t}`"),
            ParseErrorKind::InvalidAngle(t) => write!(f, "invalid pulse angle `{t}`"),
            ParseErrorKind::UnknownStep(t) => write!(f, "unknown step `{t}`"),
            ParseErrorKind::MissingInit => f.write_str("sequence must start with `init`"),
            ParseErrorKind::DuplicateInit => f.write_str("duplicate `init`"),
            ParseErrorKind::MissingRead => f.write_str("sequence must end with `read`"),
            ParseErrorKind::ExpectedSemicolon(t) => write!(f, "expected `;`, found `{t}`"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::TrailingInput(t) => write!(f, "unexpected `{t}` after readout"),
        }
    }
}

/// Syntax error with a 1-based line and column. Errors raised by
/// [`PulseSequence::from_steps`] carry line 0.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn tokenize(src: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let mut start: Option<usize> = None;
        for (i, ch) in line.char_indices() {
            if ch.is_whitespace() || ch == ';' {
                if let Some(s) = start.take() {
                    tokens.push(make_token(line, s, i, ln));
                }
                if ch == ';' {
                    tokens.push(make_token(line, i, i + 1, ln));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            tokens.push(make_token(line, s, line.len(), ln));
        }
    }
    tokens
}

fn make_token(line: &str, a: usize, b: usize, ln: usize) -> Token<'_> {
    Token { text: &line[a..b], line: ln + 1, column: line[..a].chars().count() + 1 }
}

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token<'a>, ParseError> {
        let t = self.tokens.get(self.pos).cloned().ok_or_else(|| self.err_end(ParseErrorKind::UnexpectedEnd))?;
        self.pos += 1;
        Ok(t)
    }

    fn err_end(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.end.0, column: self.end.1, kind }
    }

    fn semicolon(&mut self) -> Result<(), ParseError> {
        let t = self.next()?;
        if t.text == ";" {
            Ok(())
        } else {
            Err(err(&t, ParseErrorKind::ExpectedSemicolon(t.text.into())))
        }
    }

    fn polarization(&mut self) -> Result<Polarization, ParseError> {
        let t = self.next()?;
        match t.text {
            "plus" => Ok(Polarization::Plus),
            "minus" => Ok(Polarization::Minus),
            "linear" => Ok(Polarization::Linear),
            other => Err(err(&t, ParseErrorKind::UnknownPolarization(other.into()))),
        }
    }

    fn angle(&mut self) -> Result<f64, ParseError> {
        let t = self.next()?;
        match t.text {
            "pi" => return Ok(PI),
            "pi/2" => return Ok(FRAC_PI_2),
            _ => {}
        }
        let (value, unit) = self.number_with_suffix(&t)?;
        if unit == "rad" {
            Ok(value)
        } else {
            Err(err(&t, ParseErrorKind::InvalidAngle(t.text.into())))
        }
    }

    fn free(&mut self) -> Result<FreeDuration, ParseError> {
        let t = self.next()?;
        if t.text == "tau" {
            return Ok(FreeDuration::Tau);
        }
        let (value, unit) = self.number_with_suffix(&t)?;
        let scale = match unit {
            "s" => 1.0,
            "ms" => 1e-3,
            "us" | "\u{b5}s" | "\u{3bc}s" => 1e-6,
            "ns" => 1e-9,
            "ps" => 1e-12,
            other => return Err(err(&t, ParseErrorKind::UnknownUnit(other.into()))),
        };
        if value < 0.0 {
            return Err(err(&t, ParseErrorKind::InvalidNumber(t.text.into())));
        }
        Ok(FreeDuration::Fixed(value * scale))
    }

    /// Reads `NUMBER unit` either as one token (`40ns`) or as two.
    fn number_with_suffix(&mut self, t: &Token<'a>) -> Result<(f64, &'a str), ParseError> {
        let split = numeric_prefix_len(t.text);
        if split == 0 {
            return Err(err(t, ParseErrorKind::InvalidNumber(t.text.into())));
        }
        let value: f64 = t.text[..split].parse().map_err(|_| err(t, ParseErrorKind::InvalidNumber(t.text.into())))?;
        if !value.is_finite() {
            return Err(err(t, ParseErrorKind::InvalidNumber(t.text.into())));
        }
        if split < t.text.len() {
            return Ok((value, &t.text[split..]));
        }
        match self.peek() {
            Some(u) if u.text != ";" => {
                let u = self.next()?;
                Ok((value, u.text))
            }
            _ => Err(err(t, ParseErrorKind::UnknownUnit(String::new()))),
        }
    }
}

fn numeric_prefix_len(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let digits_start = i;
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
        i += 1;
    }
    if i == digits_start {
        return 0;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        let exp_start = j;
        while j < b.len() && b[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_start {
            i = j;
        }
    }
    i
}

fn err(t: &Token<'_>, kind: ParseErrorKind) -> ParseError {
    ParseError { line: t.line, column: t.column, kind }
}

fn end_position(src: &str) -> (usize, usize) {
    let lines: Vec<&str> = src.lines().collect();
    match lines.last() {
        Some(l) => (lines.len(), l.chars().count() + 1),
        None => (1, 1),
    }
}

/// Parses the sequence language described in the module documentation.
pub fn parse_sequence(src: &str) -> Result<PulseSequence, ParseError> {
    let mut p = Parser { tokens: tokenize(src), pos: 0, end: end_position(src) };
    let first = p.next().map_err(|_| p.err_end(ParseErrorKind::MissingInit))?;
    if first.text != "init" {
        return Err(err(&first, ParseErrorKind::MissingInit));
    }
    p.semicolon()?;
    let mut steps = alloc::vec![Step::Init];
    loop {
        let t = p.next().map_err(|_| p.err_end(ParseErrorKind::MissingRead))?;
        match t.text {
            "pulse" => {
                let polarization = p.polarization()?;
                let angle = p.angle()?;
                steps.push(Step::Pulse { polarization, angle });
            }
            "free" => steps.push(Step::Free(p.free()?)),
            "read" => {
                let l = p.next()?;
                let level = match l.text {
                    "p0" => Level::P0,
                    "p+1" => Level::PlusOne,
                    "p-1" => Level::MinusOne,
                    other => return Err(err(&l, ParseErrorKind::UnknownLevel(other.into()))),
                };
                steps.push(Step::Read(level));
                if p.peek().is_some_and(|t| t.text == ";") {
                    p.pos += 1;
                }
                if let Some(extra) = p.peek() {
                    return Err(err(extra, ParseErrorKind::TrailingInput(extra.text.into())));
                }
                return PulseSequence::from_steps(steps);
            }
            "init" => return Err(err(&t, ParseErrorKind::DuplicateInit)),
            ";" => continue,
            other => return Err(err(&t, ParseErrorKind::UnknownStep(other.into()))),
        }
        if p.peek().is_none() {
            return Err(p.err_end(ParseErrorKind::MissingRead));
        }
        p.semicolon()?;
    }
}

/// The four sequences of the field-reconstruction protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// Right-polarized Ramsey: oscillates at `sqrt(beta_z^2 + xi_perp^2)`.
    FidXiPerp,
    /// Prepares `(|0> + |+1>)/sqrt 2`-type coherence sensitive to `sin phi_E`.
    FidPhiE,
    /// Left-polarized half-pulse Ramsey: beats at `xi_perp +- xi_z`.
    FidXiZ,
    /// Spin echo with right-polarized pulses.
    Hahn,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::FidXiPerp, Builtin::FidPhiE, Builtin::FidXiZ, Builtin::Hahn];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::FidXiPerp => "fid-xi-perp",
            Builtin::FidPhiE => "fid-phi-e",
            Builtin::FidXiZ => "fid-xi-z",
            Builtin::Hahn => "hahn",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn source(self) -> &'static str {
        match self {
            Builtin::FidXiPerp => "init; pulse plus pi; free tau; pulse plus pi; read p0",
            Builtin::FidPhiE => "init; pulse plus pi/2; pulse minus pi; free tau; pulse plus pi; read p0",
            Builtin::FidXiZ => "init; pulse minus pi/2; free tau; pulse minus pi/2; read p0",
            Builtin::Hahn => "init; pulse plus pi; free tau; pulse plus pi; free tau; pulse plus pi; read p0",
        }
    }

    pub fn sequence(self) -> PulseSequence {
        parse_sequence(self.source()).expect("builtin sequences parse")
    }
}
