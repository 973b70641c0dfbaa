//! Line-based circuit text format.
//!
//! ```text
//! # comment
//! CODE iceberg 2
//! QUBIT q0 data q_b
//! QUBIT q4 flag a_0
//! PrepX q4
//! CRZZ 1/2^2 q4 q1 q0
//! MeasX q4
//! DETECTOR r0
//! OBSERVABLE A0 r0
//! ```
//!
//! `CODE` and the label after a qubit's role are optional. Qubits must be declared in order
//! before use. Instruction targets list controls first.

use std::fmt::Write;

use flagforge_core::codes::{iceberg_code, steane_code, CodeFamily};
use flagforge_core::ir::{Circuit, Kind, QubitId, RecordId, RoleKind};
use flagforge_core::{DyadicAngle, ParseError};

/// Renders `c` in the text format.
pub fn print_circuit(c: &Circuit) -> String {
    let mut out = String::new();
    if let Some(code) = c.code() {
        match code.family() {
            CodeFamily::Iceberg => writeln!(out, "CODE iceberg {}", code.k).unwrap(),
            CodeFamily::Steane => out.push_str("CODE steane\n"),
            CodeFamily::Other => writeln!(out, "# code {} has no text form", code.name).unwrap(),
        }
    }
    for (q, role) in c.qubits().iter().enumerate() {
        if role.label.is_empty() {
            writeln!(out, "QUBIT q{q} {}", role.kind).unwrap();
        } else {
            writeln!(out, "QUBIT q{q} {} {}", role.kind, role.label).unwrap();
        }
    }
    for ins in c.instructions() {
        out.push_str(ins.kind.name());
        if let Some(a) = ins.kind.angle() {
            write!(out, " {a}").unwrap();
        }
        for q in &ins.targets {
            write!(out, " q{q}").unwrap();
        }
        out.push('\n');
    }
    for d in c.detectors() {
        out.push_str("DETECTOR");
        for r in &d.records {
            write!(out, " r{r}").unwrap();
        }
        out.push('\n');
    }
    for o in c.observables() {
        write!(out, "OBSERVABLE {}", o.name).unwrap();
        for r in &o.records {
            write!(out, " r{r}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn index(tok: &str, prefix: char, line: usize) -> Result<usize, ParseError> {
    tok.strip_prefix(prefix)
        .and_then(|s| if s.starts_with('+') { None } else { s.parse().ok() })
        .ok_or_else(|| ParseError::new(line, format!("expected {prefix}<index>, found `{tok}`")))
}

/// Parses the text format.
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut c = Circuit::new();
    let mut seen_instruction = false;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let err = |m: String| ParseError::new(line, m);
        match toks[0] {
            "CODE" => {
                if c.code().is_some() || c.num_qubits() > 0 {
                    return Err(err("CODE must come first and only once".into()));
                }
                let code = match toks[1..] {
                    ["steane"] => steane_code(),
                    ["iceberg", k] => {
                        let k = k.parse().map_err(|_| err(format!("bad iceberg size `{k}`")))?;
                        iceberg_code(k).map_err(|e| err(e.to_string()))?
                    }
                    _ => return Err(err(format!("unknown code `{}`", toks[1..].join(" ")))),
                };
                c.set_code(Some(code));
            }
            "QUBIT" => {
                if seen_instruction {
                    return Err(err("QUBIT after the first instruction".into()));
                }
                if !(3..=4).contains(&toks.len()) {
                    return Err(err("expected QUBIT q<i> <role> [label]".into()));
                }
                let q = index(toks[1], 'q', line)?;
                if q != c.num_qubits() {
                    return Err(err(format!("expected q{} next, found q{q}", c.num_qubits())));
                }
                let kind: RoleKind = toks[2].parse().map_err(|_| err(format!("unknown role `{}`", toks[2])))?;
                c.add_qubit(kind, toks.get(3).copied().unwrap_or(""));
            }
            "DETECTOR" => {
                let rs = records(&toks[1..], line)?;
                c.try_add_detector(&rs).map_err(|e| err(e.to_string()))?;
            }
            "OBSERVABLE" => {
                let name = toks.get(1).ok_or_else(|| err("OBSERVABLE needs a name".into()))?;
                if name.starts_with('r') && name[1..].parse::<usize>().is_ok() {
                    return Err(err(format!("observable name `{name}` looks like a record")));
                }
                let rs = records(&toks[2..], line)?;
                c.try_add_observable(*name, &rs).map_err(|e| err(e.to_string()))?;
            }
            name => {
                let (angle, rest) = if Kind::is_rotation_name(name) {
                    let a = toks.get(1).ok_or_else(|| err(format!("{name} needs an angle n/2^l")))?;
                    let a: DyadicAngle = a.parse().map_err(|e: ParseError| ParseError::new(line, e.message))?;
                    (Some(a), &toks[2..])
                } else {
                    (None, &toks[1..])
                };
                let kind = Kind::from_name(name, angle).ok_or_else(|| err(format!("unknown instruction `{name}`")))?;
                let targets: Vec<QubitId> = rest.iter().map(|t| index(t, 'q', line)).collect::<Result<_, _>>()?;
                c.try_push(kind, &targets).map_err(|e| err(e.to_string()))?;
                seen_instruction = true;
            }
        }
    }
    if let Some(code) = c.code() {
        if c.num_qubits() < code.n || (0..code.n).any(|q| c.role(q).kind != RoleKind::Data) {
            return Err(ParseError::new(0, format!("the first {} qubits must be data qubits of the code", code.n)));
        }
    }
    Ok(c)
}

fn records(toks: &[&str], line: usize) -> Result<Vec<RecordId>, ParseError> {
    toks.iter().map(|t| index(t, 'r', line)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use flagforge_core::codes::iceberg_code;
    use flagforge_core::constructors::{iceberg_logical_rz, steane_state_prep};
    use proptest::prelude::*;

    #[test]
    fn gadgets_round_trip() {
        let code = iceberg_code(2).unwrap();
        for l in 1..=3 {
            let c = iceberg_logical_rz(1, l, false, &code).unwrap().circuit;
            let text = print_circuit(&c);
            assert_eq!(parse_circuit(&text).unwrap(), c);
        }
        let c = steane_state_prep(2).unwrap();
        assert_eq!(parse_circuit(&print_circuit(&c)).unwrap(), c);
    }

    #[test]
    fn rotation_syntax() {
        let c = parse_circuit("QUBIT q0 data\nQUBIT q1 data\nRZZ 1/2^2 q0 q1 # T-like\nRZ -3/2^3 q1\n").unwrap();
        assert_eq!(c.instructions()[0].kind, Kind::RZZ(DyadicAngle::new(1, 2)));
        assert_eq!(c.instructions()[1].kind, Kind::RZ(DyadicAngle::new(-3, 3)));
        assert!(print_circuit(&c).contains("RZZ 1/2^2 q0 q1\n"));
    }

    #[test]
    fn errors_carry_lines() {
        let cases = [
            ("QUBIT q0 data\nCX q0 q1\n", 2),
            ("QUBIT q1 data\n", 1),
            ("QUBIT q0 wizard\n", 1),
            ("QUBIT q0 data\nFOO q0\n", 2),
            ("QUBIT q0 data\nRZ q0\n", 2),
            ("QUBIT q0 data\nRZ 1/3 q0\n", 2),
            ("QUBIT q0 data\nMeasZ q0\nDETECTOR r1\n", 3),
            ("QUBIT q0 data\nH q0\nQUBIT q1 data\n", 3),
            ("QUBIT q0 data\nCODE steane\n", 2),
        ];
        for (text, line) in cases {
            let e = parse_circuit(text).unwrap_err();
            assert_eq!(e.line, line, "{text}: {e}");
        }
        assert!(parse_circuit("CODE steane\nQUBIT q0 data\n").is_err());
    }

    fn kind_strategy() -> impl Strategy<Value = Kind> {
        let angle = (-40i64..40, 0u32..6).prop_map(|(n, l)| DyadicAngle::new(n, l));
        prop_oneof![
            Just(Kind::PrepZ),
            Just(Kind::PrepX),
            Just(Kind::MeasZ),
            Just(Kind::MeasX),
            Just(Kind::H),
            Just(Kind::Sdg),
            Just(Kind::CX),
            Just(Kind::CCZ),
            angle.clone().prop_map(Kind::RZ),
            angle.clone().prop_map(Kind::RZZ),
            angle.clone().prop_map(Kind::CRZ),
            angle.prop_map(Kind::CRZZ),
        ]
    }

    proptest! {
        #[test]
        fn parse_inverts_print(
            roles in prop::collection::vec(0usize..5, 3..6),
            ops in prop::collection::vec((kind_strategy(), prop::sample::subsequence((0..3usize).collect::<Vec<_>>(), 3)), 0..30),
            det in prop::collection::vec(any::<prop::sample::Index>(), 0..4),
        ) {
            let mut c = Circuit::new();
            for (j, r) in roles.iter().enumerate() {
                c.add_qubit(RoleKind::ALL[*r], if j % 2 == 0 { format!("x_{j}") } else { String::new() });
            }
            for (k, perm) in ops {
                let mut t = perm.clone();
                t.rotate_left(k.arity() % 3);
                t.truncate(k.arity());
                c.push(k, &t);
            }
            if c.num_records() > 0 {
                let rs: Vec<usize> = det.iter().map(|i| i.index(c.num_records())).collect();
                c.add_detector(&rs);
                c.add_observable("L0", &rs);
            }
            let text = print_circuit(&c);
            let back = parse_circuit(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(print_circuit(&back), text);
        }
    }
}
