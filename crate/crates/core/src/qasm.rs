//! OpenQASM 2.0 subset reader and writer.
//!
//! Accepted statements: the `OPENQASM 2.0;` header, `include` (ignored),
//! `qreg`, `creg`, `barrier` (ignored), `measure a -> b;` and applications of
//! `id x y z h s t rx ry rz u3 cx cz swap cu1 cp`. Registers are flattened in
//! declaration order. Angle arguments are decimal literals, `pi`, and
//! products/quotients of those with an optional sign.

use std::collections::HashMap;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn err(span: SourceSpan, message: impl Into<String>) -> Error {
    Error::Parse { span, message: message.into() }
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1usize, 0usize);
    let span_at = |start: usize, end: usize, line: usize, line_start: usize| SourceSpan {
        line,
        column: start - line_start + 1,
        start,
        end,
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), span: span_at(start, i, line, line_start) });
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let span = span_at(start, i, line, line_start);
            let v: f64 = src[start..i].parse().map_err(|_| err(span, format!("malformed number '{}'", &src[start..i])))?;
            out.push(Token { tok: Tok::Number(v), span });
            continue;
        }
        if c == b'"' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' && bytes[i] != b'\n' {
                i += 1;
            }
            if i >= bytes.len() || bytes[i] != b'"' {
                return Err(err(span_at(start, i, line, line_start), "unterminated string"));
            }
            i += 1;
            out.push(Token { tok: Tok::Str(src[start + 1..i - 1].to_string()), span: span_at(start, i, line, line_start) });
            continue;
        }
        let sym = match c {
            b'-' if bytes.get(i + 1) == Some(&b'>') => "->",
            b';' => ";",
            b',' => ",",
            b'[' => "[",
            b']' => "]",
            b'(' => "(",
            b')' => ")",
            b'{' => "{",
            b'}' => "}",
            b'+' => "+",
            b'-' => "-",
            b'*' => "*",
            b'/' => "/",
            b'=' if bytes.get(i + 1) == Some(&b'=') => "==",
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(err(span_at(start, start + ch.len_utf8(), line, line_start), format!("unexpected character '{ch}'")));
            }
        };
        i += sym.len();
        out.push(Token { tok: Tok::Sym(sym), span: span_at(start, i, line, line_start) });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct Register {
    offset: usize,
    size: usize,
}

/// A gate operand: a single indexed bit or a whole register.
#[derive(Debug, Clone)]
enum Operand {
    Bit(usize),
    Whole(Register),
}

impl Operand {
    fn width(&self) -> Option<usize> {
        match self {
            Operand::Bit(_) => None,
            Operand::Whole(r) => Some(r.size),
        }
    }

    fn at(&self, k: usize) -> usize {
        match self {
            Operand::Bit(b) => *b,
            Operand::Whole(r) => r.offset + k,
        }
    }
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    eof: SourceSpan,
    qregs: HashMap<String, Register>,
    cregs: HashMap<String, Register>,
    n_qubits: usize,
    n_clbits: usize,
    gates: Vec<(Gate, SourceSpan)>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn span(&self) -> SourceSpan {
        self.peek().map_or(self.eof, |t| t.span)
    }

    fn next(&mut self) -> Result<&'a Token> {
        let t = self.toks.get(self.pos).ok_or_else(|| err(self.eof, "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn eat_sym(&mut self, s: &'static str) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Sym(x), .. }) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &'static str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(err(self.span(), format!("expected '{s}'")))
        }
    }

    fn ident(&mut self) -> Result<(String, SourceSpan)> {
        let span = self.span();
        match &self.next()?.tok {
            Tok::Ident(s) => Ok((s.clone(), span)),
            _ => Err(err(span, "expected identifier")),
        }
    }

    fn integer(&mut self) -> Result<usize> {
        let span = self.span();
        match self.next()?.tok {
            Tok::Number(v) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            _ => Err(err(span, "expected non-negative integer")),
        }
    }

    fn statement(&mut self) -> Result<()> {
        let (word, span) = self.ident()?;
        match word.as_str() {
            "OPENQASM" => {
                let vspan = self.span();
                match self.next()?.tok {
                    Tok::Number(v) if v == 2.0 => {}
                    _ => return Err(err(vspan, "only OPENQASM 2.0 is supported")),
                }
                self.expect_sym(";")
            }
            "include" => {
                let sspan = self.span();
                if !matches!(self.next()?.tok, Tok::Str(_)) {
                    return Err(err(sspan, "expected file name string"));
                }
                self.expect_sym(";")
            }
            "qreg" | "creg" => {
                let (name, nspan) = self.ident()?;
                self.expect_sym("[")?;
                let size = self.integer()?;
                self.expect_sym("]")?;
                self.expect_sym(";")?;
                let quantum = word == "qreg";
                if self.qregs.contains_key(&name) || self.cregs.contains_key(&name) {
                    return Err(err(nspan, format!("register '{name}' already declared")));
                }
                if quantum {
                    self.qregs.insert(name, Register { offset: self.n_qubits, size });
                    self.n_qubits += size;
                } else {
                    self.cregs.insert(name, Register { offset: self.n_clbits, size });
                    self.n_clbits += size;
                }
                Ok(())
            }
            "barrier" => {
                loop {
                    self.operand(true)?;
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")
            }
            "measure" => {
                let q = self.operand(true)?;
                self.expect_sym("->")?;
                let c = self.operand(false)?;
                self.expect_sym(";")?;
                let width = match (q.width(), c.width()) {
                    (None, None) => 1,
                    (Some(a), Some(b)) if a == b => a,
                    _ => return Err(err(span, "measure operands must both be bits or equal-size registers")),
                };
                for k in 0..width {
                    self.gates.push((Gate::measure(q.at(k), c.at(k)), span));
                }
                Ok(())
            }
            "gate" | "opaque" | "if" | "reset" | "U" | "CX" => Err(err(span, format!("unsupported statement '{word}'"))),
            name => self.application(name, span),
        }
    }

    fn application(&mut self, name: &str, span: SourceSpan) -> Result<()> {
        let kind = match name {
            "id" => GateKind::I,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "h" => GateKind::H,
            "s" => GateKind::S,
            "t" => GateKind::T,
            "rx" => GateKind::RX,
            "ry" => GateKind::RY,
            "rz" => GateKind::RZ,
            "u3" => GateKind::U3,
            "cx" => GateKind::CNOT,
            "cz" => GateKind::CZ,
            "swap" => GateKind::SWAP,
            "cu1" | "cp" => GateKind::CP,
            other => return Err(err(span, format!("unsupported gate '{other}'"))),
        };
        let mut params = Vec::new();
        if self.eat_sym("(") && !self.eat_sym(")") {
            loop {
                params.push(self.angle()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(")")?;
        }
        if params.len() != kind.param_count() {
            return Err(err(span, format!("'{name}' takes {} parameter(s), got {}", kind.param_count(), params.len())));
        }
        let mut args = Vec::new();
        loop {
            args.push(self.operand(true)?);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(";")?;
        if args.len() != kind.arity() {
            return Err(err(span, format!("'{name}' takes {} qubit argument(s), got {}", kind.arity(), args.len())));
        }
        let widths: Vec<usize> = args.iter().filter_map(Operand::width).collect();
        let width = match widths.first() {
            None => 1,
            Some(&w) if widths.iter().all(|&x| x == w) => w,
            Some(_) => return Err(err(span, "register arguments must have equal size")),
        };
        for k in 0..width {
            let qubits: Vec<usize> = args.iter().map(|a| a.at(k)).collect();
            if qubits.len() == 2 && qubits[0] == qubits[1] {
                return Err(err(span, format!("'{name}' operands must be distinct")));
            }
            self.gates.push((Gate::new(kind, &qubits, &params), span));
        }
        Ok(())
    }

    fn operand(&mut self, quantum: bool) -> Result<Operand> {
        let (name, span) = self.ident()?;
        let regs = if quantum { &self.qregs } else { &self.cregs };
        let reg = *regs
            .get(&name)
            .ok_or_else(|| err(span, format!("unknown {} register '{name}'", if quantum { "quantum" } else { "classical" })))?;
        if self.eat_sym("[") {
            let ispan = self.span();
            let idx = self.integer()?;
            self.expect_sym("]")?;
            if idx >= reg.size {
                return Err(err(ispan, format!("index {idx} out of range for register '{name}' of size {}", reg.size)));
            }
            Ok(Operand::Bit(reg.offset + idx))
        } else {
            Ok(Operand::Whole(reg))
        }
    }

    fn angle(&mut self) -> Result<f64> {
        let mut sign = 1.0;
        while let Some(Token { tok: Tok::Sym(s @ ("-" | "+")), .. }) = self.peek() {
            if *s == "-" {
                sign = -sign;
            }
            self.pos += 1;
        }
        let mut value = self.angle_atom()?;
        loop {
            if self.eat_sym("*") {
                value *= self.angle_atom()?;
            } else if self.eat_sym("/") {
                let span = self.span();
                let d = self.angle_atom()?;
                if d == 0.0 {
                    return Err(err(span, "division by zero"));
                }
                value /= d;
            } else {
                break;
            }
        }
        Ok(sign * value)
    }

    fn angle_atom(&mut self) -> Result<f64> {
        let span = self.span();
        match &self.next()?.tok {
            Tok::Number(v) => Ok(*v),
            Tok::Ident(s) if s == "pi" => Ok(std::f64::consts::PI),
            _ => Err(err(span, "expected a number or 'pi'")),
        }
    }
}

/// Parses OpenQASM 2.0 source into a [`Circuit`].
pub fn parse_qasm(source: &str) -> Result<Circuit> {
    let toks = lex(source)?;
    let eof = {
        let line = source.lines().count().max(1);
        let last = source.rsplit('\n').next().unwrap_or("");
        SourceSpan { line, column: last.len() + 1, start: source.len(), end: source.len() }
    };
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        eof,
        qregs: HashMap::new(),
        cregs: HashMap::new(),
        n_qubits: 0,
        n_clbits: 0,
        gates: Vec::new(),
    };
    while p.peek().is_some() {
        p.statement()?;
    }
    let mut circuit = Circuit { n_qubits: p.n_qubits, n_clbits: p.n_clbits, gates: Vec::new() };
    let mut measured = vec![false; p.n_qubits];
    for (g, span) in p.gates {
        if let Some(&q) = g.qubits.iter().find(|&&q| measured[q]) {
            return Err(err(span, format!("gate after measurement on qubit {q} (mid-circuit measurement is unsupported)")));
        }
        if g.kind == GateKind::M {
            measured[g.qubits[0]] = true;
        }
        circuit.gates.push(g);
    }
    Ok(circuit)
}

fn qasm_name(kind: GateKind) -> Option<&'static str> {
    Some(match kind {
        GateKind::I => "id",
        GateKind::X => "x",
        GateKind::Y => "y",
        GateKind::Z => "z",
        GateKind::H => "h",
        GateKind::S => "s",
        GateKind::T => "t",
        GateKind::RX => "rx",
        GateKind::RY => "ry",
        GateKind::RZ => "rz",
        GateKind::U3 => "u3",
        GateKind::CNOT => "cx",
        GateKind::CZ => "cz",
        GateKind::SWAP => "swap",
        GateKind::CP => "cp",
        GateKind::GPI2 | GateKind::M => return None,
    })
}

/// Writes a circuit as OpenQASM 2.0 with a single `q`/`c` register pair.
/// Angles are printed with 17 significant digits so re-parsing is exact.
pub fn emit_qasm(c: &Circuit) -> Result<String> {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    out.push_str(&format!("qreg q[{}];\n", c.n_qubits));
    if c.n_clbits > 0 {
        out.push_str(&format!("creg c[{}];\n", c.n_clbits));
    }
    for g in &c.gates {
        if g.kind == GateKind::M {
            let cb = g.clbit.ok_or_else(|| Error::invariant("M gate", "missing classical target"))?;
            out.push_str(&format!("measure q[{}] -> c[{cb}];\n", g.qubits[0]));
            continue;
        }
        let name = qasm_name(g.kind).ok_or_else(|| Error::Unexportable { kind: g.kind.to_string() })?;
        out.push_str(name);
        if !g.params.is_empty() {
            let ps: Vec<String> = g.params.iter().map(|p| format!("{p:.16e}")).collect();
            out.push_str(&format!("({})", ps.join(",")));
        }
        let qs: Vec<String> = g.qubits.iter().map(|q| format!("q[{q}]")).collect();
        out.push_str(&format!(" {};\n", qs.join(",")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::bell_circuit;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn bell_program() {
        let src = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\nh q[0];\ncx q[0],q[1];\nmeasure q -> c;\n";
        assert_eq!(parse_qasm(src).unwrap(), bell_circuit());
    }

    #[test]
    fn empty_program() {
        let c = parse_qasm("qreg q[1];").unwrap();
        assert_eq!(c.n_qubits, 1);
        assert!(c.gates.is_empty());
    }

    #[test]
    fn unsupported_gate_is_named() {
        let e = parse_qasm("qreg q[3];\nccx q[0],q[1],q[2];").unwrap_err();
        match e {
            Error::Parse { span, message } => {
                assert!(message.contains("ccx"), "{message}");
                assert_eq!((span.line, span.column), (2, 1));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn index_out_of_range() {
        let e = parse_qasm("qreg q[2];\nx q[2];").unwrap_err().to_string();
        assert!(e.starts_with("2:5:"), "{e}");
        assert!(e.contains("out of range"));
    }

    #[test]
    fn syntax_error_has_span() {
        let e = parse_qasm("qreg q[2]\nh q[0];").unwrap_err().to_string();
        assert!(e.starts_with("2:1:"), "{e}");
    }

    #[test]
    fn angles_and_registers() {
        let src = "qreg a[1]; qreg b[2]; rz(-pi/4) b[1]; cu1(3*pi/8) a[0],b[0]; rx(0.5) a; u3(pi,1.5e-1,-2) b[0]; barrier a,b;";
        let c = parse_qasm(src).unwrap();
        assert_eq!(c.n_qubits, 3);
        assert_eq!(c.gates[0], Gate::rz(2, -PI / 4.0));
        assert_eq!(c.gates[1], Gate::cp(3.0 * PI / 8.0, 0, 1));
        assert_eq!(c.gates[2], Gate::rotation(GateKind::RX, 0, 0.5));
        assert_eq!(c.gates[3].params, vec![PI, 0.15, -2.0]);
        assert_eq!(c.gates.len(), 4);
    }

    #[test]
    fn rejects_mid_circuit_measurement() {
        assert!(parse_qasm("qreg q[1]; creg c[1]; measure q[0] -> c[0]; x q[0];").is_err());
    }

    #[test]
    fn emit_bell_and_empty() {
        let text = emit_qasm(&bell_circuit()).unwrap();
        let body: Vec<&str> = text.lines().skip(4).collect();
        assert_eq!(body, ["h q[0];", "cx q[0],q[1];", "measure q[0] -> c[0];", "measure q[1] -> c[1];"]);
        assert_eq!(emit_qasm(&Circuit::new(2)).unwrap(), "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\n");
    }

    #[test]
    fn gpi2_cannot_be_emitted() {
        let c = Circuit::with_gates(1, vec![Gate::gpi2(0, 0.1)]);
        assert!(matches!(emit_qasm(&c), Err(Error::Unexportable { .. })));
    }

    fn arb_circuit() -> impl Strategy<Value = Circuit> {
        let kinds: Vec<GateKind> = GateKind::ALL.iter().copied().filter(|k| !matches!(k, GateKind::M | GateKind::GPI2)).collect();
        let gate = (proptest::sample::select(kinds), proptest::collection::vec(-10.0..10.0f64, 3), 0..3usize, 1..3usize)
            .prop_map(|(k, a, q, off)| {
                let qs = if k.arity() == 2 { vec![q, (q + off) % 3] } else { vec![q] };
                Gate::new(k, &qs, &a[..k.param_count()])
            });
        (proptest::collection::vec(gate, 0..12), any::<bool>()).prop_map(|(gates, measure)| {
            let mut c = Circuit::with_gates(3, gates);
            if measure {
                c.measure_all();
            }
            c
        })
    }

    proptest! {
        #[test]
        fn emit_parse_round_trip(c in arb_circuit()) {
            let text = emit_qasm(&c).unwrap();
            prop_assert_eq!(parse_qasm(&text).unwrap(), c);
        }

        #[test]
        fn parser_never_panics(s in "[ -~\n]{0,80}") {
            let _ = parse_qasm(&s);
        }
    }
}
