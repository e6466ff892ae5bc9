//! Reader and writer for a small OpenQASM 2.0 subset.
//!
//! Accepted: an optional `OPENQASM 2.0;` header, `include "qelib1.inc";`
//! (ignored), exactly one `qreg`, at most one `creg`, gate statements from
//! [`GateKind`], `barrier` (ignored) and a trailing measurement of every
//! qubit. Gate angles may be arithmetic over numbers and `pi`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use super::{schedule_asap, Circuit, CircuitError, Gate, GateKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QasmError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unsupported gate `{name}`")]
    UnsupportedGate { line: usize, col: usize, name: String },
    #[error("{line}:{col}: qubit index {index} out of range for qreg of size {size}")]
    QubitOutOfRange { line: usize, col: usize, index: usize, size: usize },
    #[error("{line}:{col}: only one qreg is supported")]
    MultipleQregs { line: usize, col: usize },
    #[error("{line}:{col}: {source}")]
    InvalidGate {
        line: usize,
        col: usize,
        #[source]
        source: CircuitError,
    },
    #[error("{line}:{col}: gate after measurement; only a trailing full-register measurement is supported")]
    GateAfterMeasure { line: usize, col: usize },
    #[error("measurement does not cover every qubit (missing qubit {missing})")]
    PartialMeasurement { missing: usize },
    #[error("no qreg declared")]
    MissingQreg,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Real(f64),
    Str(String),
    Sym(char),
    Arrow,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, QasmError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let syntax = |line, col, msg: String| QasmError::Syntax { line, col, msg };

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(word), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut real = false;
            while i < chars.len() {
                let d = chars[i];
                if d.is_ascii_digit() {
                    i += 1;
                } else if d == '.' {
                    real = true;
                    i += 1;
                } else if (d == 'e' || d == 'E')
                    && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit() || *n == '+' || *n == '-')
                {
                    real = true;
                    i += 2;
                } else {
                    break;
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if real {
                Tok::Real(text.parse().map_err(|_| syntax(tl, tc, format!("bad number `{text}`")))?)
            } else {
                Tok::Int(text.parse().map_err(|_| syntax(tl, tc, format!("bad integer `{text}`")))?)
            };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        if c == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if chars.get(i) != Some(&'"') {
                return Err(syntax(tl, tc, "unterminated string".into()));
            }
            let s: String = chars[start..i].iter().collect();
            i += 1;
            col += i - (start - 1);
            out.push(Token { tok: Tok::Str(s), line: tl, col: tc });
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            i += 2;
            col += 2;
            out.push(Token { tok: Tok::Arrow, line: tl, col: tc });
            continue;
        }
        if ";,[]()+-*/".contains(c) {
            i += 1;
            col += 1;
            out.push(Token { tok: Tok::Sym(c), line: tl, col: tc });
            continue;
        }
        return Err(syntax(tl, tc, format!("unexpected character `{c}`")));
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err_at(t: &Token, msg: impl Into<String>) -> QasmError {
        QasmError::Syntax { line: t.line, col: t.col, msg: msg.into() }
    }

    fn expect_sym(&mut self, c: char) -> Result<Token, QasmError> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(t)
        } else {
            Err(Self::err_at(&t, format!("expected `{c}`, found {}", describe(&t.tok))))
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token), QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            other => Err(Self::err_at(&t, format!("expected identifier, found {}", describe(other)))),
        }
    }

    fn expect_int(&mut self) -> Result<(usize, Token), QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Int(v) => Ok((v, t)),
            ref other => Err(Self::err_at(&t, format!("expected integer, found {}", describe(other)))),
        }
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym('+') {
                v += self.term()?;
            } else if self.eat_sym('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut v = self.factor()?;
        loop {
            if self.eat_sym('*') {
                v *= self.factor()?;
            } else if self.eat_sym('/') {
                v /= self.factor()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn factor(&mut self) -> Result<f64, QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Sym('-') => Ok(-self.factor()?),
            Tok::Sym('+') => self.factor(),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Tok::Int(v) => Ok(*v as f64),
            Tok::Real(v) => Ok(*v),
            Tok::Ident(s) if s == "pi" => Ok(PI),
            other => Err(Self::err_at(&t, format!("expected expression, found {}", describe(other)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Real(v) => format!("`{v}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Arrow => "`->`".into(),
        Tok::Eof => "end of input".into(),
    }
}

enum Arg {
    Register(String, Token),
    Indexed(String, usize, Token),
}

/// Parses QASM-subset text into a scheduled [`Circuit`].
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0 };
    let mut qreg: Option<(String, usize)> = None;
    let mut creg: Option<(String, usize)> = None;
    let mut circuit: Option<Circuit> = None;
    let mut measured: Option<Vec<bool>> = None;

    if matches!(&p.peek().tok, Tok::Ident(s) if s == "OPENQASM") {
        p.next();
        let t = p.next();
        match t.tok {
            Tok::Real(2.0) => {}
            _ => return Err(Parser::err_at(&t, "only OPENQASM 2.0 is supported")),
        }
        p.expect_sym(';')?;
    }

    loop {
        let head = p.peek().clone();
        let word = match &head.tok {
            Tok::Eof => break,
            Tok::Ident(w) => w.clone(),
            other => return Err(Parser::err_at(&head, format!("expected statement, found {}", describe(other)))),
        };
        p.next();
        match word.as_str() {
            "include" => {
                let t = p.next();
                match &t.tok {
                    Tok::Str(s) if s == "qelib1.inc" => {}
                    Tok::Str(s) => return Err(Parser::err_at(&t, format!("unsupported include \"{s}\""))),
                    other => return Err(Parser::err_at(&t, format!("expected string, found {}", describe(other)))),
                }
                p.expect_sym(';')?;
            }
            "qreg" => {
                let (name, _) = p.expect_ident()?;
                p.expect_sym('[')?;
                let (size, _) = p.expect_int()?;
                p.expect_sym(']')?;
                p.expect_sym(';')?;
                if qreg.is_some() {
                    return Err(QasmError::MultipleQregs { line: head.line, col: head.col });
                }
                qreg = Some((name, size));
                circuit = Some(Circuit::new("", size));
            }
            "creg" => {
                let (name, _) = p.expect_ident()?;
                p.expect_sym('[')?;
                let (size, _) = p.expect_int()?;
                p.expect_sym(']')?;
                p.expect_sym(';')?;
                if creg.is_some() {
                    return Err(Parser::err_at(&head, "only one creg is supported"));
                }
                creg = Some((name, size));
            }
            "barrier" => {
                let (qname, qsize) = qreg.clone().ok_or(QasmError::MissingQreg)?;
                loop {
                    let arg = parse_arg(&mut p)?;
                    resolve_qubits(&arg, &qname, qsize)?;
                    if !p.eat_sym(',') {
                        break;
                    }
                }
                p.expect_sym(';')?;
            }
            "measure" => {
                let (qname, qsize) = qreg.clone().ok_or(QasmError::MissingQreg)?;
                let src = parse_arg(&mut p)?;
                let arrow = p.next();
                if arrow.tok != Tok::Arrow {
                    return Err(Parser::err_at(&arrow, format!("expected `->`, found {}", describe(&arrow.tok))));
                }
                let dst = parse_arg(&mut p)?;
                p.expect_sym(';')?;
                let (cname, csize) = creg.clone().ok_or_else(|| Parser::err_at(&head, "measure without a creg"))?;
                let qubits = resolve_qubits(&src, &qname, qsize)?;
                let bits = resolve_bits(&dst, &cname, csize)?;
                if qubits.len() != bits.len() {
                    return Err(Parser::err_at(&head, "measure source and target sizes differ"));
                }
                let m = measured.get_or_insert_with(|| vec![false; qsize]);
                for q in qubits {
                    m[q] = true;
                }
            }
            _ => {
                let Some(kind) = GateKind::from_name(&word) else {
                    return Err(QasmError::UnsupportedGate { line: head.line, col: head.col, name: word });
                };
                let (qname, qsize) = qreg.clone().ok_or(QasmError::MissingQreg)?;
                if measured.is_some() {
                    return Err(QasmError::GateAfterMeasure { line: head.line, col: head.col });
                }
                let mut params = Vec::new();
                if p.eat_sym('(') && !p.eat_sym(')') {
                    loop {
                        params.push(p.expr()?);
                        if !p.eat_sym(',') {
                            break;
                        }
                    }
                    p.expect_sym(')')?;
                }
                let mut operands = Vec::new();
                loop {
                    let arg = parse_arg(&mut p)?;
                    match &arg {
                        Arg::Indexed(..) => operands.extend(resolve_qubits(&arg, &qname, qsize)?),
                        Arg::Register(_, t) => {
                            return Err(Parser::err_at(t, "register broadcast is not supported; index each qubit"))
                        }
                    }
                    if !p.eat_sym(',') {
                        break;
                    }
                }
                p.expect_sym(';')?;
                let invalid = |source| QasmError::InvalidGate { line: head.line, col: head.col, source };
                let gate = Gate::new(kind, &operands, &params).map_err(invalid)?;
                circuit.as_mut().expect("qreg checked above").push(gate).map_err(invalid)?;
            }
        }
    }

    let mut circuit = circuit.ok_or(QasmError::MissingQreg)?;
    if let Some(m) = measured {
        if let Some(missing) = m.iter().position(|&b| !b) {
            return Err(QasmError::PartialMeasurement { missing });
        }
        circuit.set_measure_all(true);
    }
    Ok(schedule_asap(&circuit))
}

fn parse_arg(p: &mut Parser) -> Result<Arg, QasmError> {
    let (name, t) = p.expect_ident()?;
    if p.eat_sym('[') {
        let (idx, _) = p.expect_int()?;
        p.expect_sym(']')?;
        Ok(Arg::Indexed(name, idx, t))
    } else {
        Ok(Arg::Register(name, t))
    }
}

fn resolve_qubits(arg: &Arg, qname: &str, qsize: usize) -> Result<Vec<usize>, QasmError> {
    match arg {
        Arg::Register(name, t) if name == qname => Ok((0..qsize).collect()),
        Arg::Indexed(name, idx, t) if name == qname => {
            if *idx >= qsize {
                Err(QasmError::QubitOutOfRange { line: t.line, col: t.col, index: *idx, size: qsize })
            } else {
                Ok(vec![*idx])
            }
        }
        Arg::Register(name, t) | Arg::Indexed(name, _, t) => {
            Err(Parser::err_at(t, format!("unknown quantum register `{name}`")))
        }
    }
}

fn resolve_bits(arg: &Arg, cname: &str, csize: usize) -> Result<Vec<usize>, QasmError> {
    match arg {
        Arg::Register(name, _) if name == cname => Ok((0..csize).collect()),
        Arg::Indexed(name, idx, t) if name == cname => {
            if *idx >= csize {
                Err(Parser::err_at(t, format!("bit index {idx} out of range for creg of size {csize}")))
            } else {
                Ok(vec![*idx])
            }
        }
        Arg::Register(name, t) | Arg::Indexed(name, _, t) => {
            Err(Parser::err_at(t, format!("unknown classical register `{name}`")))
        }
    }
}

/// Writes a circuit in the accepted subset. Angles use Rust's shortest
/// round-trip float formatting, so [`parse_qasm`] recovers them exactly.
pub fn emit_qasm(c: &Circuit) -> String {
    let n = c.num_qubits();
    let mut s = String::from("OPENQASM 2.0;\n");
    let _ = writeln!(s, "qreg q[{n}];");
    if c.measure_all() {
        let _ = writeln!(s, "creg c[{n}];");
    }
    for g in c.gates() {
        s.push_str(g.kind.name());
        if !g.params.is_empty() {
            let ps: Vec<String> = g.params.iter().map(|p| format!("{p:?}")).collect();
            let _ = write!(s, "({})", ps.join(","));
        }
        let qs: Vec<String> = g.operands.iter().map(|q| format!("q[{q}]")).collect();
        let _ = writeln!(s, " {};", qs.join(","));
    }
    if c.measure_all() {
        s.push_str("measure q -> c;\n");
    }
    s
}
