//! Boolean circuits over the sample bits.
//!
//! Text format:
//!
//! ```text
//! inputs 2 outputs 1
//! g0 = XOR x0 x1
//! out = g0
//! ```
//!
//! Input `x{i}` is bit `i` (least significant first) of the sample read as a
//! natural number. Operands of `g{i}` must be inputs or gates `g{j}` with
//! `j < i`. The first operand of `out` is the least significant output bit.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::logic::Natural;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateOp {
    And,
    Or,
    Xor,
    Not,
    Const0,
    Const1,
}

impl GateOp {
    fn arity(self) -> usize {
        match self {
            GateOp::And | GateOp::Or | GateOp::Xor => 2,
            GateOp::Not => 1,
            GateOp::Const0 | GateOp::Const1 => 0,
        }
    }

    fn parse(s: &str) -> Option<GateOp> {
        Some(match s {
            "AND" => GateOp::And,
            "OR" => GateOp::Or,
            "XOR" => GateOp::Xor,
            "NOT" => GateOp::Not,
            "CONST0" => GateOp::Const0,
            "CONST1" => GateOp::Const1,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            GateOp::And => "AND",
            GateOp::Or => "OR",
            GateOp::Xor => "XOR",
            GateOp::Not => "NOT",
            GateOp::Const0 => "CONST0",
            GateOp::Const1 => "CONST1",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Wire {
    Input(usize),
    Gate(usize),
}

impl fmt::Display for Wire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Wire::Input(i) => write!(f, "x{i}"),
            Wire::Gate(i) => write!(f, "g{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub op: GateOp,
    pub operands: Vec<Wire>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    inputs: usize,
    gates: Vec<Gate>,
    outputs: Vec<Wire>,
}

impl Circuit {
    pub fn new(inputs: usize, gates: Vec<Gate>, outputs: Vec<Wire>) -> Result<Circuit> {
        let check = |w: &Wire, limit: usize, ctx: &str| -> Result<()> {
            match *w {
                Wire::Input(i) if i >= inputs => Err(Error::MalformedCircuit(format!(
                    "{ctx}: input x{i} out of range (circuit has {inputs} inputs)"
                ))),
                Wire::Gate(j) if j >= limit => Err(Error::MalformedCircuit(format!(
                    "{ctx}: operand g{j} does not precede its use"
                ))),
                _ => Ok(()),
            }
        };
        for (i, g) in gates.iter().enumerate() {
            if g.operands.len() != g.op.arity() {
                return Err(Error::MalformedCircuit(format!(
                    "g{i}: {} takes {} operand(s), found {}",
                    g.op.name(),
                    g.op.arity(),
                    g.operands.len()
                )));
            }
            for w in &g.operands {
                check(w, i, &format!("g{i}"))?;
            }
        }
        for w in &outputs {
            check(w, gates.len(), "out")?;
        }
        Ok(Circuit {
            inputs,
            gates,
            outputs,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[Wire] {
        &self.outputs
    }

    /// Gate count.
    pub fn size(&self) -> usize {
        self.gates.len()
    }

    /// Upper bound on the bit-length of any output value.
    pub fn output_width(&self) -> usize {
        self.outputs.len()
    }

    pub fn eval_bits(&self, input: &[bool]) -> Vec<bool> {
        debug_assert_eq!(input.len(), self.inputs);
        let mut vals = Vec::with_capacity(self.gates.len());
        let get = |w: &Wire, vals: &Vec<bool>| match *w {
            Wire::Input(i) => input[i],
            Wire::Gate(j) => vals[j],
        };
        for g in &self.gates {
            let v = match g.op {
                GateOp::And => get(&g.operands[0], &vals) && get(&g.operands[1], &vals),
                GateOp::Or => get(&g.operands[0], &vals) || get(&g.operands[1], &vals),
                GateOp::Xor => get(&g.operands[0], &vals) ^ get(&g.operands[1], &vals),
                GateOp::Not => !get(&g.operands[0], &vals),
                GateOp::Const0 => false,
                GateOp::Const1 => true,
            };
            vals.push(v);
        }
        self.outputs.iter().map(|w| get(w, &vals)).collect()
    }

    /// Runs the circuit on the bits of `sample` and reads the outputs as a
    /// little-endian natural number.
    pub fn eval_natural(&self, sample: &Natural) -> Natural {
        let input: Vec<bool> = (0..self.inputs).map(|i| sample.bit(i as u64)).collect();
        let mut out = Natural::zero();
        for (i, b) in self.eval_bits(&input).into_iter().enumerate() {
            if b {
                out.set_bit(i as u64, true);
            }
        }
        out
    }

    /// The circuit with output `index` removed.
    pub fn without_output(&self, index: usize) -> Option<Circuit> {
        if index >= self.outputs.len() {
            return None;
        }
        let mut outputs = self.outputs.clone();
        outputs.remove(index);
        Some(Circuit {
            outputs,
            ..self.clone()
        })
    }

    /// The circuit with its last gate removed, if nothing refers to it.
    pub fn without_last_gate(&self) -> Option<Circuit> {
        let last = self.gates.len().checked_sub(1)?;
        if self.outputs.contains(&Wire::Gate(last)) {
            return None;
        }
        let mut gates = self.gates.clone();
        gates.pop();
        Some(Circuit {
            gates,
            ..self.clone()
        })
    }

    /// Circuit that outputs input bits `0..width` unchanged.
    pub fn low_bits(inputs: usize, width: usize) -> Result<Circuit> {
        Circuit::new(inputs, Vec::new(), (0..width).map(Wire::Input).collect())
    }

    /// Circuit computing the XOR of all inputs, as a one-bit output.
    pub fn parity(inputs: usize) -> Result<Circuit> {
        if inputs == 0 {
            return Circuit::new(
                0,
                vec![Gate {
                    op: GateOp::Const0,
                    operands: vec![],
                }],
                vec![Wire::Gate(0)],
            );
        }
        let mut gates = Vec::new();
        let mut acc = Wire::Input(0);
        for i in 1..inputs {
            gates.push(Gate {
                op: GateOp::Xor,
                operands: vec![acc, Wire::Input(i)],
            });
            acc = Wire::Gate(gates.len() - 1);
        }
        Circuit::new(inputs, gates, vec![acc])
    }

    pub fn parse(text: &str) -> Result<Circuit> {
        let mut header: Option<(usize, usize)> = None;
        let mut gates = Vec::new();
        let mut outputs: Option<Vec<Wire>> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::MalformedCircuit(format!("line {}: {msg}", lineno + 1));
            let words: Vec<&str> = line.split_whitespace().collect();
            if header.is_none() {
                match words.as_slice() {
                    ["inputs", n, "outputs", m] => {
                        let n = n.parse().map_err(|_| err(format!("bad input count `{n}`")))?;
                        let m = m.parse().map_err(|_| err(format!("bad output count `{m}`")))?;
                        header = Some((n, m));
                        continue;
                    }
                    _ => return Err(err("expected header `inputs <n> outputs <m>`".into())),
                }
            }
            if outputs.is_some() {
                return Err(err("nothing may follow the `out` line".into()));
            }
            let parse_wire = |s: &str| -> Result<Wire> {
                let s = s.trim_end_matches(',');
                let idx = |t: &str| t.parse::<usize>().ok();
                if let Some(i) = s.strip_prefix('x').and_then(idx) {
                    Ok(Wire::Input(i))
                } else if let Some(j) = s.strip_prefix('g').and_then(idx) {
                    Ok(Wire::Gate(j))
                } else {
                    Err(err(format!("bad operand `{s}`")))
                }
            };
            match words.as_slice() {
                ["out", "=", rest @ ..] => {
                    outputs = Some(rest.iter().map(|w| parse_wire(w)).collect::<Result<_>>()?);
                }
                [name, "=", op, rest @ ..] => {
                    let expected = format!("g{}", gates.len());
                    if *name != expected {
                        return Err(err(format!("expected gate `{expected}`, found `{name}`")));
                    }
                    let op = GateOp::parse(op).ok_or_else(|| err(format!("unknown gate `{op}`")))?;
                    let operands = rest.iter().map(|w| parse_wire(w)).collect::<Result<_>>()?;
                    gates.push(Gate { op, operands });
                }
                _ => return Err(err(format!("cannot parse `{line}`"))),
            }
        }
        let (n, m) = header.ok_or_else(|| Error::MalformedCircuit("empty circuit file".into()))?;
        let outputs = outputs.ok_or_else(|| Error::MalformedCircuit("missing `out` line".into()))?;
        if outputs.len() != m {
            return Err(Error::MalformedCircuit(format!(
                "header declares {m} outputs, `out` lists {}",
                outputs.len()
            )));
        }
        Circuit::new(n, gates, outputs)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("inputs {} outputs {}\n", self.inputs, self.outputs.len());
        for (i, g) in self.gates.iter().enumerate() {
            s.push_str(&format!("g{i} = {}", g.op.name()));
            for w in &g.operands {
                s.push_str(&format!(" {w}"));
            }
            s.push('\n');
        }
        s.push_str("out =");
        for w in &self.outputs {
            s.push_str(&format!(" {w}"));
        }
        s.push('\n');
        s
    }
}
