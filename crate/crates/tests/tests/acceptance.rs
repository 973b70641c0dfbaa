//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so every line is printed even when an earlier criterion
//! fails. Exits nonzero if any criterion fails. Pass criterion numbers to run a subset.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use flagforge::run_sweep;
use flagforge_core::codes::{
    flagged_z_syndrome_extraction, ft_plus_prep, iceberg_code, qed_round, steane_code, CodeSpec,
};
use flagforge_core::constructors::{
    apply_toffoli_ladder, iceberg_binary_rotation, iceberg_logical_rz, iceberg_pair_rotation, nonft_logical_rz_ladder,
    nonft_rzz, steane_pi2_d3, steane_pi2_d3_ablated, steane_state_prep, GadgetReport,
};
use flagforge_core::faults::{
    fault_distance, single_fault_effects, CheckMode, Classification, DenseChecker, DenseThresholds, Engine,
};
use flagforge_core::harness::{build_iceberg_benchmark, least_squares, shot_seed, BenchmarkSpec, CurvePoint, Protocol};
use flagforge_core::ir::{compose_reusing, unitary_of, Circuit, DenseMatrix, Kind};
use flagforge_core::noise::{FaultError, NoiseModel};
use flagforge_core::stab::tableau_simulate_shot;
use flagforge_core::sv::{run_noisy_shot, C64, MAX_QUBITS};
use flagforge_core::{DyadicAngle, Pauli};
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn ice() -> CodeSpec {
    iceberg_code(2).unwrap()
}

fn bits(s: &str) -> Vec<bool> {
    s.chars().filter(|&c| c != '.').map(|c| c == '1').collect()
}

fn semantic_equivalence() -> Outcome {
    let code = ice();
    let mut gadgets: Vec<(String, GadgetReport)> = Vec::new();
    for l in 1..=3 {
        for negative in [false, true] {
            let g = e(iceberg_logical_rz(1, l, negative, &code))?;
            gadgets.push((format!("rz l={l} neg={negative} ladder"), e(apply_toffoli_ladder(&g))?));
            gadgets.push((format!("rz l={l} neg={negative}"), g));
        }
    }
    for l in 1..=2 {
        let g = e(iceberg_pair_rotation(1, 2, l, false, &code))?;
        gadgets.push((format!("pair l={l} ladder"), e(apply_toffoli_ladder(&g))?));
        gadgets.push((format!("pair l={l}"), g));
    }
    for f in ["0.1", "0.11", "1.01"] {
        gadgets.push((format!("binary {f}"), e(iceberg_binary_rotation(&bits(f), 1, &code))?));
    }
    let mut worst = (1.0f64, String::new());
    for (name, g) in &gadgets {
        let m = e(g.verify())?;
        if m.fidelity < worst.0 {
            worst = (m.fidelity, name.clone());
        }
    }
    check(
        worst.0 >= 1.0 - 1e-9,
        format!("{} gadgets, minimum fidelity 1 - {:.1e} ({})", gadgets.len(), 1.0 - worst.0, worst.1),
    )
}

fn iceberg_distance_two() -> Outcome {
    let code = ice();
    let mut circuits = Vec::new();
    for l in 1..=3 {
        circuits.push((format!("rz l={l}"), e(iceberg_logical_rz(1, l, false, &code))?.circuit));
    }
    for l in 1..=2 {
        circuits.push((format!("pair l={l}"), e(iceberg_pair_rotation(1, 2, l, false, &code))?.circuit));
    }
    let mut sites = 0;
    let mut bad = Vec::new();
    for (name, c) in &circuits {
        let r = e(fault_distance(c, 1, Engine::Dense, CheckMode::Full))?;
        sites += r.fault_sites;
        if r.distance.is_some() {
            bad.push(format!("{name}: {}", r.witness().unwrap().faults[0].describe(c)));
        }
    }
    check(bad.is_empty(), format!("{sites} single faults over {} gadgets, undetected logical: {bad:?}", circuits.len()))
}

fn is_zz(e: &FaultError) -> bool {
    matches!(e, FaultError::Pauli(p) if p.letters() == [Pauli::Z, Pauli::Z])
}

fn negative_control() -> Outcome {
    let code = ice();
    let mut lines = Vec::new();
    let mut ok = true;
    for l in 1..=2 {
        let c = e(nonft_rzz(&code, 1, DyadicAngle::pi_over_pow2(l)))?.circuit;
        let engine = if c.is_clifford() { Engine::Clifford } else { Engine::Dense };
        let r = e(fault_distance(&c, 1, engine, CheckMode::Full))?;
        let zz = r.witnesses.iter().any(|w| w.faults.len() == 1 && is_zz(&w.faults[0].error));
        ok &= r.distance == Some(1) && zz;
        lines.push(format!("l={l}: {}, ZZ witness {zz}", r.claim()));
    }
    check(ok, lines.join("; "))
}

fn sweep(
    protocol: Protocol,
    ps: &[f64],
    shots: &[u64],
    seed: u64,
) -> Result<(Vec<CurvePoint>, Option<(f64, f64)>), String> {
    let mut spec = BenchmarkSpec::new(protocol, ps.to_vec(), 1, seed);
    spec.shots = shots.to_vec();
    let r = e(run_sweep(&spec, None))?;
    let fit = r.fit.ok().map(|f| (f.slope, f.prefactor()));
    Ok((r.points, fit))
}

fn describe(points: &[CurvePoint]) -> String {
    points
        .iter()
        .map(|p| format!("p={:.0e}: {}/{} -> {:.2e}", p.p, p.errors, p.accepted, p.rate))
        .collect::<Vec<_>>()
        .join(", ")
}

const ICEBERG_PS: [f64; 3] = [1e-3, 3e-3, 1e-2];

fn iceberg_t_scaling() -> Outcome {
    let (points, fit) = sweep(Protocol::iceberg(1, 2, 2), &ICEBERG_PS, &[120_000_000, 30_000_000, 9_000_000], 11)?;
    let Some((slope, a)) = fit else { return Err(format!("no fit: {}", describe(&points))) };
    check(
        (slope - 2.0).abs() <= 0.3 && (3.0..=30.0).contains(&a),
        format!("slope {slope:.2}, prefactor {a:.1} ({})", describe(&points)),
    )
}

fn iceberg_sqrt_t_scaling() -> Outcome {
    let (points, fit) = sweep(Protocol::iceberg(1, 3, 2), &ICEBERG_PS, &[4_000_000, 1_000_000, 200_000], 12)?;
    let Some((slope, a)) = fit else { return Err(format!("no fit: {}", describe(&points))) };
    check((slope - 2.0).abs() <= 0.3, format!("slope {slope:.2}, prefactor {a:.1} ({})", describe(&points)))
}

fn steane_prep_scaling() -> Outcome {
    let protocol = Protocol::SteaneStatePrep { l: 3 };
    let (points, fit) = sweep(protocol, &[3e-4, 1e-3, 3e-3], &[30_000_000, 5_000_000, 800_000], 13)?;
    let Some((slope, a)) = fit else { return Err(format!("no fit: {}", describe(&points))) };
    let acc = points[1].acceptance();
    check(
        (slope - 2.0).abs() <= 0.3 && (0.80..=0.92).contains(&acc),
        format!(
            "infidelity slope {slope:.2}, prefactor {a:.1}, acceptance at 1e-3 {acc:.3} (bracket [0.80, 0.92] assumes that p) ({})",
            describe(&points)
        ),
    )
}

fn steane_distance_three() -> Outcome {
    let c = e(steane_pi2_d3())?;
    let full = e(fault_distance(&c, 2, Engine::Clifford, CheckMode::Full))?;
    let a = e(steane_pi2_d3_ablated())?;
    let ablated = e(fault_distance(&a, 2, Engine::Clifford, CheckMode::Full))?;
    let w2 = ablated.witnesses.iter().any(|w| w.faults.len() == 2);
    check(
        full.distance.is_none() && ablated.distance == Some(2) && w2,
        format!(
            "full: {} over {} sites; ablated: {} over {} sites",
            full.claim(),
            full.fault_sites,
            ablated.claim(),
            ablated.fault_sites
        ),
    )
}

fn exponent(ys: &[f64]) -> f64 {
    let xy: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (((i + 1) as f64).ln(), y.ln())).collect();
    least_squares(&xy).0
}

fn overhead_linearity() -> Outcome {
    let code = ice();
    let (mut gates, mut depth, mut anc) = (Vec::new(), Vec::new(), Vec::new());
    for l in 1..=8 {
        let g = e(apply_toffoli_ladder(&e(iceberg_logical_rz(1, l, false, &code))?))?;
        let s = g.circuit.stats();
        gates.push(s.gate_count as f64);
        depth.push(s.depth as f64);
        anc.push(g.ancilla_count() as f64);
    }
    let (eg, ed) = (exponent(&gates), exponent(&depth));
    let step = anc[1] - anc[0];
    let anc_linear = step > 0.0 && anc.windows(2).all(|w| w[1] - w[0] == step);
    let ok = (0.8..=1.2).contains(&eg) && (0.8..=1.2).contains(&ed) && anc_linear;
    check(
        ok,
        format!(
            "gate exponent {eg:.2} {gates:?}; depth exponent {ed:.2} {depth:?}; ancillas {anc:?} linear {anc_linear}; l=8/l=4 gate ratio {:.2}",
            gates[7] / gates[3]
        ),
    )
}

fn single(kind: Kind, targets: &[usize], n: usize) -> Result<DenseMatrix, String> {
    let mut c = Circuit::new();
    for _ in 0..n {
        c.add_qubit(flagforge_core::ir::RoleKind::Data, "");
    }
    c.push(kind, targets);
    e(unitary_of(&c))
}

fn gauge_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    for t in 0..20u64 {
        let r = shot_seed(9, 0, t);
        let l = (r % 8) as u32;
        let n = ((r >> 8) % (1 << (l + 2))) as i64 - (1 << (l + 1));
        let a = DyadicAngle::new(n, l);
        let mut c = Circuit::new();
        c.add_qubit(flagforge_core::ir::RoleKind::Data, "");
        c.add_qubit(flagforge_core::ir::RoleKind::Data, "");
        c.push(Kind::X, &[0]);
        c.rzz(a, 0, 1);
        c.push(Kind::X, &[0]);
        let lhs = e(unitary_of(&c))?;
        let rhs = single(Kind::RZZ(DyadicAngle::new(-n, l)), &[0, 1], 2)?;
        worst = worst.max(lhs.max_abs_diff(&rhs));
        let id = single(Kind::RZZ(a), &[0, 1], 2)?.mul(&rhs);
        worst = worst.max(id.max_abs_diff(&DenseMatrix::identity(4)));
    }
    let i = C64::new(0.0, 1.0);
    let zz = DenseMatrix::from_diagonal(&[-i, i, i, -i]);
    let pi = single(Kind::RZZ(DyadicAngle::PI), &[0, 1], 2)?.max_abs_diff(&zz);
    check(worst <= 1e-12 && pi <= 1e-12, format!("20 angles, max deviation {worst:.1e}; R_ZZ(pi) vs -iZZ {pi:.1e}"))
}

fn clifford_suite() -> Result<Vec<(String, Circuit)>, String> {
    let (ice, st) = (ice(), steane_code());
    let mut v = vec![
        ("iceberg rz l=1".into(), e(iceberg_logical_rz(1, 1, false, &ice))?.circuit),
        ("iceberg pair l=1".into(), e(iceberg_pair_rotation(1, 2, 1, false, &ice))?.circuit),
        ("nonft rzz l=1".into(), e(nonft_rzz(&ice, 1, DyadicAngle::PI_2))?.circuit),
        ("iceberg benchmark l=1".into(), e(build_iceberg_benchmark(1, 1, 2))?),
        ("steane nonft ladder".into(), e(nonft_logical_rz_ladder(&st, DyadicAngle::PI_2, 0))?),
        ("steane prep l=1".into(), e(steane_state_prep(1))?),
        ("steane qed round".into(), e(qed_round(&st))?),
        ("steane pi/2 d3".into(), e(steane_pi2_d3())?),
        ("steane pi/2 d3 ablated".into(), e(steane_pi2_d3_ablated())?),
    ];
    for code in [&ice, &st] {
        let prep = e(ft_plus_prep(code))?;
        let se = flagged_z_syndrome_extraction(code);
        v.push((format!("{} prep", code.name), prep.clone()));
        v.push((format!("{} prep+SE", code.name), e(compose_reusing(&[&prep, &se]))?));
    }
    Ok(v)
}

fn key(detectors: &[bool], observables: &[bool]) -> Vec<bool> {
    detectors.iter().chain(observables).copied().collect()
}

/// Chi-squared homogeneity test of two histograms, pooling sparse bins.
fn two_sample_p(a: &HashMap<Vec<bool>, u64>, b: &HashMap<Vec<bool>, u64>) -> f64 {
    let (na, nb) = (a.values().sum::<u64>() as f64, b.values().sum::<u64>() as f64);
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    let keys: std::collections::BTreeSet<&Vec<bool>> = a.keys().chain(b.keys()).collect();
    for k in keys {
        let (x, y) = (*a.get(k).unwrap_or(&0) as f64, *b.get(k).unwrap_or(&0) as f64);
        if (x + y) * na.min(nb) / (na + nb) < 5.0 {
            pooled.0 += x;
            pooled.1 += y;
        } else {
            bins.push((x, y));
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        bins.push(pooled);
    }
    if bins.len() < 2 {
        return 1.0;
    }
    let mut stat = 0.0;
    for (x, y) in &bins {
        let t = x + y;
        for (obs, n) in [(x, na), (y, nb)] {
            let exp = t * n / (na + nb);
            stat += (obs - exp).powi(2) / exp;
        }
    }
    ChiSquared::new((bins.len() - 1) as f64).unwrap().sf(stat)
}

const CROSS_SHOTS: u64 = 10_000;

fn cross_engine() -> Outcome {
    let noise = e(NoiseModel::new(0.01))?;
    let mut checked = Vec::new();
    let mut skipped = Vec::new();
    let mut failures = Vec::new();
    let mut min_p: f64 = 1.0;
    let mut sites = 0;
    for (name, c) in clifford_suite()? {
        if !c.is_clifford() {
            failures.push(format!("{name} is not Clifford"));
            continue;
        }
        if c.num_qubits() > MAX_QUBITS {
            skipped.push(format!("{name} ({} qubits)", c.num_qubits()));
            continue;
        }
        let dense = e(DenseChecker::new(&c, CheckMode::Full, DenseThresholds::default()))?;
        let (fs, effects, _) = e(single_fault_effects(&c, CheckMode::Full))?;
        for (s, eff) in fs.iter().zip(&effects) {
            let d = e(dense.classify(s))?.classification;
            let f = if !eff.detectors.is_zero() {
                Classification::Detected
            } else if !eff.observables.is_zero() {
                Classification::UndetectedLogical
            } else {
                Classification::Benign
            };
            if d != f {
                failures.push(format!("{name}: {} dense {d} frame {f}", s.describe(&c)));
            }
        }
        sites += fs.len();
        let (mut hd, mut ht) = (HashMap::new(), HashMap::new());
        for s in 0..CROSS_SHOTS {
            let seed = shot_seed(10, checked.len() as u64, s);
            let d = e(run_noisy_shot(&c, &noise, seed))?;
            let t = e(tableau_simulate_shot(&c, &noise, seed))?;
            *hd.entry(key(&d.detectors, &d.observables)).or_insert(0u64) += 1;
            *ht.entry(key(&t.detectors, &t.observables)).or_insert(0u64) += 1;
        }
        let p = two_sample_p(&hd, &ht);
        min_p = min_p.min(p);
        if p <= 0.001 {
            failures.push(format!("{name}: chi-squared p = {p:.2e}"));
        }
        checked.push(name);
    }
    let detail = format!(
        "{} circuits, {sites} single faults, min chi-squared p {min_p:.3} over {CROSS_SHOTS} shots each; beyond the dense limit: {skipped:?}; mismatches: {failures:?}",
        checked.len()
    );
    check(failures.is_empty() && !checked.is_empty(), detail)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("semantic equivalence", semantic_equivalence),
        ("iceberg fault distance 2", iceberg_distance_two),
        ("unflagged negative control", negative_control),
        ("iceberg l=2 scaling", iceberg_t_scaling),
        ("iceberg l=3 scaling", iceberg_sqrt_t_scaling),
        ("steane |pi/8> prep", steane_prep_scaling),
        ("steane pi/2 distance 3", steane_distance_three),
        ("overhead linearity", overhead_linearity),
        ("gauge identities", gauge_identities),
        ("cross-engine consistency", cross_engine),
    ];
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let only: Vec<usize> = args.iter().filter_map(|a| a.parse().ok()).collect();
    // A name filter that matches nothing here is meant for another test binary.
    if only.is_empty() && !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return ExitCode::SUCCESS;
    }
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let n = n + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("criterion {n:2} PASS  {name} [{secs:.1}s]: {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n:2} FAIL  {name} [{secs:.1}s]: {d}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
