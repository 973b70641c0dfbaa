//! Fault classification and minimum fault-distance search.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::codes::CodeSpec;
use crate::error::{Error, Result};
use crate::ir::{Circuit, QubitId};
use crate::noise::{enumerate_fault_sites, FaultSite};
use crate::pauli::{Pauli, PauliString};
use crate::stab::{noiseless_tableau, Bits, Effect, EndChecks, FrameProgram};
use crate::sv::{
    basis_inputs, embed, encode, evaluate, extract, injections_for, input_qubits, output_qubits, project_code, Branch,
    Program, StateVector, BRANCH_CAP, C64,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Detected,
    Benign,
    UndetectedLogical,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Detected => "detected",
            Classification::Benign => "benign",
            Classification::UndetectedLogical => "undetected_logical",
        })
    }
}

/// Which logical errors count at the end of a gadget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckMode {
    /// Any logical Pauli error.
    Full,
    /// Only errors that anticommute with a logical `X`: phase (`Z`-type) logical errors.
    PhaseOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Engine {
    Clifford,
    Dense,
}

/// Decision thresholds of the dense engine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenseThresholds {
    /// Below this acceptance probability a fault counts as detected.
    pub acceptance: f64,
    /// Above this accepted-state infidelity a fault counts as logical.
    pub infidelity: f64,
}

impl Default for DenseThresholds {
    fn default() -> Self {
        DenseThresholds { acceptance: 1e-12, infidelity: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultReport {
    pub faults: Vec<FaultSite>,
    /// Indices into the circuit's detectors, then end-check detectors.
    pub detectors_flipped: Vec<usize>,
    /// Indices into the circuit's observables, then end-check observables.
    pub observables_flipped: Vec<usize>,
    pub classification: Classification,
}

impl FaultReport {
    fn from_effect(faults: Vec<FaultSite>, e: &Effect) -> Self {
        let detectors_flipped = e.detectors.ones();
        let observables_flipped = e.observables.ones();
        let classification = if !detectors_flipped.is_empty() {
            Classification::Detected
        } else if !observables_flipped.is_empty() {
            Classification::UndetectedLogical
        } else {
            Classification::Benign
        };
        FaultReport { faults, detectors_flipped, observables_flipped, classification }
    }
}

/// Detectors and observables added at the end of a circuit whose code block stays alive.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VirtualChecks {
    pub detectors: Vec<(String, PauliString)>,
    pub observables: Vec<(String, PauliString)>,
}

impl VirtualChecks {
    fn masks(&self) -> EndChecks {
        let m = |p: &PauliString| {
            p.letters()
                .iter()
                .enumerate()
                .fold((0u64, 0u64), |(x, z), (q, l)| (x | ((l.x_bit() as u64) << q), z | ((l.z_bit() as u64) << q)))
        };
        EndChecks {
            detectors: self.detectors.iter().map(|(_, p)| m(p)).collect(),
            observables: self.observables.iter().map(|(_, p)| m(p)).collect(),
        }
    }
}

fn live_code(c: &Circuit) -> Option<&CodeSpec> {
    let code = c.code()?;
    let measured = c.measured_at_end();
    (code.n <= c.num_qubits() && (0..code.n).all(|q| !measured[q])).then_some(code)
}

fn widen(p: &PauliString, n: usize) -> PauliString {
    let mut out = PauliString::identity(n);
    for (q, &l) in p.letters().iter().enumerate() {
        out.set(q, l);
    }
    out
}

/// Logical Paulis `prod_i X_i^a_i Z_i^b_i` for all non-zero exponent vectors.
fn logical_products(code: &CodeSpec, n: usize) -> Vec<(String, PauliString)> {
    let mut out = Vec::new();
    for m in 1..(1usize << (2 * code.k)) {
        let mut p = PauliString::identity(code.n);
        let mut name = String::new();
        for i in 0..code.k {
            let (a, b) = ((m >> (2 * i)) & 1, (m >> (2 * i + 1)) & 1);
            if a == 1 {
                p = &p * &code.logical_x[i];
            }
            if b == 1 {
                p = &p * &code.logical_z[i];
            }
            match (a, b) {
                (1, 0) => name.push_str(&format!("X{}", i + 1)),
                (0, 1) => name.push_str(&format!("Z{}", i + 1)),
                (1, 1) => name.push_str(&format!("Y{}", i + 1)),
                _ => {}
            }
        }
        out.push((name, widen(&p, n)));
    }
    out
}

/// End checks for `c` in `mode`: code stabilizers as detectors; as observables the logical
/// operators (gadgets with live inputs) or the logical operators fixed by the noiseless output
/// (state preparations). Unmeasured qubits outside the code get `X` and `Z` observables.
pub fn virtual_checks(c: &Circuit, mode: CheckMode) -> Result<VirtualChecks> {
    let mut v = VirtualChecks::default();
    let n = c.num_qubits();
    let Some(code) = live_code(c) else {
        return Ok(v);
    };
    for (j, s) in code.x_stabilizers.iter().chain(&code.z_stabilizers).enumerate() {
        v.detectors.push((format!("S{j}"), widen(s, n)));
    }
    let ins = input_qubits(c);
    let has_inputs = (0..code.n).any(|q| ins.contains(&q));
    if has_inputs {
        for i in 0..code.k {
            v.observables.push((format!("X{}", i + 1), widen(&code.logical_x[i], n)));
            if mode == CheckMode::Full {
                v.observables.push((format!("Z{}", i + 1), widen(&code.logical_z[i], n)));
            }
        }
    } else if c.is_clifford() {
        let (t, _) = noiseless_tableau(c, 0)?;
        for (name, p) in logical_products(code, n) {
            let (x, z) = masks(&p);
            if t.stabilizes(x, z) && (mode == CheckMode::Full || name.contains('X') || name.contains('Y')) {
                v.observables.push((name, p));
            }
        }
    } else {
        v.observables.push(("logical".into(), PauliString::identity(n)));
    }
    let outs = output_qubits(c);
    for &q in outs.iter().filter(|&&q| q >= code.n) {
        let label = &c.role(q).label;
        v.observables.push((format!("X({label})"), PauliString::from_support(n, &[q], Pauli::X)));
        v.observables.push((format!("Z({label})"), PauliString::from_support(n, &[q], Pauli::Z)));
    }
    Ok(v)
}

fn masks(p: &PauliString) -> (u64, u64) {
    p.letters()
        .iter()
        .enumerate()
        .fold((0, 0), |(x, z), (q, l)| (x | ((l.x_bit() as u64) << q), z | ((l.z_bit() as u64) << q)))
}

/// Names of all detectors and observables a report can index: circuit ones first.
pub fn check_names(c: &Circuit, v: &VirtualChecks) -> (Vec<String>, Vec<String>) {
    let mut d: Vec<String> = (0..c.detectors().len()).map(|i| format!("D{i}")).collect();
    d.extend(v.detectors.iter().map(|(n, _)| format!("end:{n}")));
    let mut o: Vec<String> = c.observables().iter().map(|o| o.name.clone()).collect();
    o.extend(v.observables.iter().map(|(n, _)| format!("end:{n}")));
    (d, o)
}

/// Propagates a fault set through a Clifford circuit and classifies the result.
pub fn clifford_frame_propagate(c: &Circuit, faults: &[FaultSite], mode: CheckMode) -> Result<FaultReport> {
    let v = virtual_checks(c, mode)?;
    let prog = FrameProgram::new(c, v.masks())?;
    let mut e = prog.zero_effect();
    for f in faults {
        e = e.xor(&prog.effect_of(f));
    }
    Ok(FaultReport::from_effect(faults.to_vec(), &e))
}

/// Result of a minimum-weight search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceReport {
    pub max_weight: usize,
    /// Smallest weight with an undetected logical fault set, if any up to `max_weight`.
    pub distance: Option<usize>,
    /// Witnesses at the minimum weight, capped.
    pub witnesses: Vec<FaultReport>,
    pub fault_sites: usize,
    pub detector_names: Vec<String>,
    pub observable_names: Vec<String>,
}

impl DistanceReport {
    pub fn witness(&self) -> Option<&FaultReport> {
        self.witnesses.first()
    }

    /// `distance d` or `>= w+1`.
    pub fn claim(&self) -> String {
        match self.distance {
            Some(d) => format!("distance {d}"),
            None => format!(">= {}", self.max_weight + 1),
        }
    }
}

/// Cap on witnesses collected at the minimum weight.
pub const MAX_WITNESSES: usize = 256;

/// Exhaustive search over all fault sets of weight `1..=max_weight`.
pub fn fault_distance(c: &Circuit, max_weight: usize, engine: Engine, mode: CheckMode) -> Result<DistanceReport> {
    match engine {
        Engine::Clifford => clifford_distance(c, max_weight, mode),
        Engine::Dense => {
            if max_weight != 1 {
                return Err(Error::InvalidArgument("the dense engine checks single faults only (max weight 1)".into()));
            }
            let checker = DenseChecker::new(c, mode, DenseThresholds::default())?;
            let sites = enumerate_fault_sites(c);
            let mut reports = Vec::with_capacity(sites.len());
            for s in &sites {
                reports.push(checker.classify(s)?);
            }
            Ok(checker.distance_from(reports))
        }
    }
}

/// Frame effects of every single fault site.
pub fn single_fault_effects(c: &Circuit, mode: CheckMode) -> Result<(Vec<FaultSite>, Vec<Effect>, VirtualChecks)> {
    let v = virtual_checks(c, mode)?;
    let prog = FrameProgram::new(c, v.masks())?;
    let sites = enumerate_fault_sites(c);
    let effects = sites.iter().map(|s| prog.effect_of(s)).collect();
    Ok((sites, effects, v))
}

fn clifford_distance(c: &Circuit, max_weight: usize, mode: CheckMode) -> Result<DistanceReport> {
    if !(1..=3).contains(&max_weight) {
        return Err(Error::InvalidArgument(format!("max weight must be 1, 2 or 3, got {max_weight}")));
    }
    let (sites, effects, v) = single_fault_effects(c, mode)?;
    let (detector_names, observable_names) = check_names(c, &v);
    let mut report = DistanceReport {
        max_weight,
        distance: None,
        witnesses: Vec::new(),
        fault_sites: sites.len(),
        detector_names,
        observable_names,
    };
    let logical = |e: &Effect| e.detectors.is_zero() && !e.observables.is_zero();
    let witness = |idx: &[usize]| {
        let mut e = effects[idx[0]].clone();
        for &i in &idx[1..] {
            e = e.xor(&effects[i]);
        }
        FaultReport::from_effect(idx.iter().map(|&i| sites[i].clone()).collect(), &e)
    };

    for (i, e) in effects.iter().enumerate() {
        if logical(e) && report.witnesses.len() < MAX_WITNESSES {
            report.witnesses.push(witness(&[i]));
        }
    }
    if !report.witnesses.is_empty() {
        report.distance = Some(1);
        return Ok(report);
    }
    if max_weight == 1 {
        return Ok(report);
    }

    // group by detector pattern, then by observable pattern
    let mut groups: BTreeMap<&Bits, BTreeMap<&Bits, Vec<usize>>> = BTreeMap::new();
    for (i, e) in effects.iter().enumerate() {
        groups.entry(&e.detectors).or_default().entry(&e.observables).or_default().push(i);
    }
    for by_obs in groups.values() {
        let buckets: Vec<&Vec<usize>> = by_obs.values().collect();
        for a in 0..buckets.len() {
            for b in a + 1..buckets.len() {
                for &i in buckets[a] {
                    for &j in buckets[b] {
                        if report.witnesses.len() >= MAX_WITNESSES {
                            break;
                        }
                        if sites[i].instruction != sites[j].instruction {
                            report.witnesses.push(witness(&[i.min(j), i.max(j)]));
                        }
                    }
                }
            }
        }
    }
    if !report.witnesses.is_empty() {
        report.distance = Some(2);
        return Ok(report);
    }
    if max_weight == 2 {
        return Ok(report);
    }

    for i in 0..effects.len() {
        for j in i + 1..effects.len() {
            if sites[i].instruction == sites[j].instruction {
                continue;
            }
            let d = effects[i].detectors.xor(&effects[j].detectors);
            let Some(by_obs) = groups.get(&d) else { continue };
            let o = effects[i].observables.xor(&effects[j].observables);
            for (obs, ks) in by_obs {
                if **obs == o {
                    continue;
                }
                for &k in ks {
                    let distinct =
                        sites[k].instruction != sites[i].instruction && sites[k].instruction != sites[j].instruction;
                    if distinct && report.witnesses.len() < MAX_WITNESSES {
                        let mut idx = [i, j, k];
                        idx.sort_unstable();
                        report.witnesses.push(witness(&idx));
                    }
                }
            }
        }
    }
    if !report.witnesses.is_empty() {
        report.distance = Some(3);
    }
    Ok(report)
}

/// Memory budget for cached noiseless branch states, in amplitudes.
const CHECKPOINT_BUDGET: usize = 1 << 23;

/// Single-fault classifier on the dense engine.
///
/// Inputs are the logical basis (full mode) or the logical `X` basis (phase mode, each input judged
/// on its own), tensored with basis states of any other input qubits. A fault is detected when the
/// acceptance probability, after projecting a live code block onto the code space, is below
/// threshold. Otherwise it is logical when an observable changes or the accepted output differs
/// from the noiseless one.
#[derive(Debug)]
pub struct DenseChecker<'c> {
    circuit: &'c Circuit,
    program: Program<'c>,
    thresholds: DenseThresholds,
    code: Option<&'c CodeSpec>,
    inputs: Vec<StateVector>,
    groups: Vec<Vec<usize>>,
    outputs: Vec<QubitId>,
    /// Per input: `(records, projected output)` of the noiseless accepted branches.
    reference: Vec<Vec<(Vec<bool>, StateVector)>>,
    /// Per input: observable values of the noiseless run, when deterministic.
    reference_observables: Vec<Option<Vec<bool>>>,
    /// `checkpoints[k]` holds per-input branches before instruction `k * stride`.
    checkpoints: Vec<Vec<Vec<Branch>>>,
    stride: usize,
    virtual_detector: usize,
    virtual_observable: usize,
}

impl<'c> DenseChecker<'c> {
    pub fn new(c: &'c Circuit, mode: CheckMode, thresholds: DenseThresholds) -> Result<Self> {
        let program = Program::new(c)?;
        let ins = input_qubits(c);
        let outputs = output_qubits(c);
        let code = live_code(c);
        let inputs: Vec<StateVector> = match (c.code(), mode) {
            (Some(code), CheckMode::PhaseOnly) if (0..code.n).all(|q| ins.contains(&q)) => {
                let others: Vec<QubitId> = ins.iter().copied().filter(|&q| q >= code.n).collect();
                let mut v = Vec::new();
                for signs in 0..1usize << code.k {
                    let amps: Vec<C64> = (0..1usize << code.k)
                        .map(|j| {
                            let s = (j & signs).count_ones() % 2 == 1;
                            C64::new(if s { -1.0 } else { 1.0 } / libm::sqrt((1usize << code.k) as f64), 0.0)
                        })
                        .collect();
                    let enc = encode(code, &StateVector::from_amplitudes(code.k, amps))?;
                    for o in 0..1usize << others.len() {
                        let ctl = StateVector::basis(others.len(), o)?;
                        v.push(enc.tensor(&ctl)?);
                    }
                }
                v
            }
            (Some(code), _) if !(0..code.n).all(|q| ins.contains(&q)) => {
                (0..1usize << ins.len()).map(|j| StateVector::basis(ins.len(), j)).collect::<Result<_>>()?
            }
            _ => basis_inputs(c, &ins)?,
        };
        let groups = match mode {
            CheckMode::Full => vec![(0..inputs.len()).collect()],
            CheckMode::PhaseOnly => (0..inputs.len()).map(|i| vec![i]).collect(),
        };
        let n = c.num_qubits();
        let ni = program.num_instructions();
        let total_amps = inputs.len() * (1usize << n);
        let stride = (total_amps * (ni + 1)).div_ceil(CHECKPOINT_BUDGET).max(1);
        let mut checkpoints = Vec::new();
        let mut current: Vec<Vec<Branch>> = inputs
            .iter()
            .map(|s| Ok(vec![Branch { state: embed(n, &ins, s)?, records: Vec::new() }]))
            .collect::<Result<_>>()?;
        let none = crate::sv::Injections::none();
        let mut k = 0;
        loop {
            checkpoints.push(current.clone());
            if k >= ni {
                break;
            }
            let end = (k + stride).min(ni);
            current = current
                .into_iter()
                .map(|b| program.run_branches_until(b, k, end, &none, true, BRANCH_CAP, &mut Vec::new()))
                .collect::<Result<_>>()?;
            k = end;
        }
        let mut checker = DenseChecker {
            circuit: c,
            program,
            thresholds,
            code,
            inputs,
            groups,
            outputs,
            reference: Vec::new(),
            reference_observables: Vec::new(),
            checkpoints,
            stride,
            virtual_detector: c.detectors().len(),
            virtual_observable: c.observables().len(),
        };
        let finals = checker.checkpoints.last().unwrap().clone();
        for branches in finals {
            let outs = checker.finish(branches)?;
            let mut obs: Option<Vec<bool>> = None;
            let mut deterministic = true;
            for (rec, _) in &outs {
                let o = evaluate(c, rec).1;
                match &obs {
                    None => obs = Some(o),
                    Some(p) if *p != o => deterministic = false,
                    _ => {}
                }
            }
            checker.reference_observables.push(if deterministic { obs } else { None });
            checker.reference.push(outs);
        }
        Ok(checker)
    }

    pub fn circuit(&self) -> &Circuit {
        self.circuit
    }

    fn finish(&self, branches: Vec<Branch>) -> Result<Vec<(Vec<bool>, StateVector)>> {
        branches
            .into_iter()
            .map(|b| {
                let mut out = extract(&b.state, &self.outputs)?;
                if let Some(code) = self.code {
                    let pos: Vec<usize> =
                        (0..code.n).map(|q| self.outputs.iter().position(|&o| o == q).unwrap()).collect();
                    project_code(&mut out, code, &pos);
                }
                Ok((b.records, out))
            })
            .collect()
    }

    /// Classifies one fault set (normally a single site).
    pub fn classify_set(&self, faults: &[FaultSite]) -> Result<FaultReport> {
        let refs: Vec<&FaultSite> = faults.iter().collect();
        let inj = injections_for(self.circuit, &refs);
        let first = inj
            .paulis
            .first()
            .map(|p| p.0)
            .into_iter()
            .chain(inj.flips.first().map(|&r| self.circuit.record_instructions()[r]))
            .min()
            .unwrap_or(0);
        let cp = (first / self.stride).min(self.checkpoints.len() - 1);
        let start = cp * self.stride;
        let mut fired = Vec::new();
        let mut outs = Vec::with_capacity(self.inputs.len());
        for branches in &self.checkpoints[cp] {
            let b = self.program.run_branches_until(
                branches.clone(),
                start,
                self.program.num_instructions(),
                &inj,
                true,
                BRANCH_CAP,
                &mut fired,
            )?;
            outs.push(self.finish(b)?);
        }
        let mut detected = true;
        let mut logical = false;
        let mut obs_flipped: Vec<usize> = Vec::new();
        for g in &self.groups {
            let in_norm: f64 = g.iter().map(|&i| self.inputs[i].norm_sqr()).sum();
            let acc: f64 = g.iter().flat_map(|&i| outs[i].iter()).map(|(_, s)| s.norm_sqr()).sum::<f64>() / in_norm;
            if acc < self.thresholds.acceptance {
                continue;
            }
            detected = false;
            for &i in g {
                if let Some(ref_obs) = &self.reference_observables[i] {
                    for (rec, s) in &outs[i] {
                        let o = evaluate(self.circuit, rec).1;
                        if o != *ref_obs && s.norm_sqr() / in_norm > self.thresholds.infidelity {
                            logical = true;
                            for (k, (a, b)) in o.iter().zip(ref_obs).enumerate() {
                                if a != b && !obs_flipped.contains(&k) {
                                    obs_flipped.push(k);
                                }
                            }
                        }
                    }
                }
            }
            if 1.0 - self.group_fidelity(g, &outs) > self.thresholds.infidelity {
                logical = true;
            }
        }
        let classification = if detected {
            Classification::Detected
        } else if logical {
            Classification::UndetectedLogical
        } else {
            Classification::Benign
        };
        let mut detectors_flipped = Vec::new();
        if detected {
            fired.sort_unstable();
            detectors_flipped = if fired.is_empty() { vec![self.virtual_detector] } else { fired };
        }
        if logical && obs_flipped.is_empty() {
            obs_flipped.push(self.virtual_observable);
        }
        if !logical {
            obs_flipped.clear();
        }
        obs_flipped.sort_unstable();
        Ok(FaultReport { faults: faults.to_vec(), detectors_flipped, observables_flipped: obs_flipped, classification })
    }

    pub fn classify(&self, site: &FaultSite) -> Result<FaultReport> {
        self.classify_set(core::slice::from_ref(site))
    }

    /// `sum_s ||V_s||^2 max_r F(V0_r, V_s) / sum_s ||V_s||^2`, stacking outputs over the group's inputs.
    fn group_fidelity(&self, g: &[usize], outs: &[Vec<(Vec<bool>, StateVector)>]) -> f64 {
        let stack = |sets: Vec<(usize, &[(Vec<bool>, StateVector)])>| {
            let mut m: BTreeMap<Vec<bool>, Vec<(usize, StateVector)>> = BTreeMap::new();
            for (i, set) in sets {
                for (rec, s) in set {
                    m.entry(rec.clone()).or_default().push((i, s.clone()));
                }
            }
            m
        };
        let fault = stack(g.iter().map(|&i| (i, outs[i].as_slice())).collect());
        let reference = stack(g.iter().map(|&i| (i, self.reference[i].as_slice())).collect());
        let norm = |v: &Vec<(usize, StateVector)>| v.iter().map(|(_, s)| s.norm_sqr()).sum::<f64>();
        let inner = |a: &Vec<(usize, StateVector)>, b: &Vec<(usize, StateVector)>| {
            let mut acc = C64::new(0.0, 0.0);
            for (i, sa) in a {
                if let Some((_, sb)) = b.iter().find(|(j, _)| j == i) {
                    acc += sa.inner(sb);
                }
            }
            acc
        };
        let mut total = 0.0;
        let mut weighted = 0.0;
        for v in fault.values() {
            let nv = norm(v);
            if nv <= 0.0 {
                continue;
            }
            let best = reference
                .values()
                .map(|r| {
                    let nr = norm(r);
                    if nr <= 0.0 {
                        0.0
                    } else {
                        inner(r, v).norm_sqr() / (nr * nv)
                    }
                })
                .fold(0.0, f64::max);
            total += nv;
            weighted += nv * best;
        }
        if total <= 0.0 {
            1.0
        } else {
            weighted / total
        }
    }

    /// Collects undetected logical reports into a distance claim.
    pub fn distance_from(&self, reports: Vec<FaultReport>) -> DistanceReport {
        let fault_sites = reports.len();
        let witnesses: Vec<FaultReport> = reports
            .into_iter()
            .filter(|r| r.classification == Classification::UndetectedLogical)
            .take(MAX_WITNESSES)
            .collect();
        let mut detector_names: Vec<String> = (0..self.circuit.detectors().len()).map(|i| format!("D{i}")).collect();
        detector_names.push("end:code".into());
        let mut observable_names: Vec<String> = self.circuit.observables().iter().map(|o| o.name.clone()).collect();
        observable_names.push("end:logical".into());
        DistanceReport {
            max_weight: 1,
            distance: (!witnesses.is_empty()).then_some(1),
            witnesses,
            fault_sites,
            detector_names,
            observable_names,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{flagged_syndrome_extraction, ft_plus_prep, iceberg_code, steane_code, Basis};
    use crate::ir::compose_reusing;
    use crate::noise::{expected_fault_site_count, FaultError, Position};

    #[test]
    fn empty_fault_set_is_benign() {
        let code = iceberg_code(2).unwrap();
        let c = ft_plus_prep(&code).unwrap();
        let r = clifford_frame_propagate(&c, &[], CheckMode::Full).unwrap();
        assert_eq!(r.classification, Classification::Benign);
        assert!(r.detectors_flipped.is_empty() && r.observables_flipped.is_empty());
    }

    #[test]
    fn preparations_and_extraction_have_distance_two() {
        for code in [iceberg_code(2).unwrap(), iceberg_code(4).unwrap(), steane_code()] {
            let prep = ft_plus_prep(&code).unwrap();
            assert_eq!(enumerate_fault_sites(&prep).len(), expected_fault_site_count(&prep));
            let r = fault_distance(&prep, 1, Engine::Clifford, CheckMode::Full).unwrap();
            assert_eq!(r.distance, None, "{} prep: {:?}", code.name, r.witness());
            for basis in [Basis::Z, Basis::X] {
                let se = flagged_syndrome_extraction(&code, basis);
                let c = compose_reusing(&[&prep, &se]).unwrap();
                let r = fault_distance(&c, 1, Engine::Clifford, CheckMode::Full).unwrap();
                assert_eq!(r.distance, None, "{} {basis:?}: {:?}", code.name, r.witness());
            }
        }
    }

    #[test]
    fn unprotected_logical_is_distance_one() {
        let code = iceberg_code(2).unwrap();
        let mut c = Circuit::for_code(&code);
        c.cz(1, 0);
        let r = fault_distance(&c, 2, Engine::Clifford, CheckMode::Full).unwrap();
        assert_eq!(r.distance, Some(1));
        assert!(r.witnesses.iter().any(|w| w.faults[0].error == FaultError::Pauli("+ZZ".parse().unwrap())));
    }

    #[test]
    fn dense_and_frame_agree_on_single_faults() {
        let code = steane_code();
        let prep = ft_plus_prep(&code).unwrap();
        let se = flagged_syndrome_extraction(&code, Basis::Z);
        let c = compose_reusing(&[&prep, &se]).unwrap();
        let dense = DenseChecker::new(&c, CheckMode::Full, DenseThresholds::default()).unwrap();
        let (sites, effects, _) = single_fault_effects(&c, CheckMode::Full).unwrap();
        for (s, e) in sites.iter().zip(&effects) {
            let f = FaultReport::from_effect(vec![s.clone()], e);
            let d = dense.classify(s).unwrap();
            assert_eq!(f.classification, d.classification, "{}", s.describe(&c));
        }
    }

    #[test]
    fn frame_effects_are_linear() {
        let code = iceberg_code(2).unwrap();
        let c =
            compose_reusing(&[&ft_plus_prep(&code).unwrap(), &flagged_syndrome_extraction(&code, Basis::Z)]).unwrap();
        let (sites, effects, _) = single_fault_effects(&c, CheckMode::Full).unwrap();
        let mut rng = 12345u64;
        for _ in 0..200 {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let i = (rng >> 33) as usize % sites.len();
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (rng >> 33) as usize % sites.len();
            let pair = clifford_frame_propagate(&c, &[sites[i].clone(), sites[j].clone()], CheckMode::Full).unwrap();
            let e = effects[i].xor(&effects[j]);
            assert_eq!(pair.detectors_flipped, e.detectors.ones());
            assert_eq!(pair.observables_flipped, e.observables.ones());
        }
    }

    #[test]
    fn flag_catches_hook_on_syndrome_ancilla() {
        let code = steane_code();
        let c = flagged_syndrome_extraction(&code, Basis::Z);
        let s = c.find_label("s_z").unwrap();
        let f = c.find_label("sf_z").unwrap();
        // X on the syndrome ancilla right after the first flag coupling spreads to the flag
        let idx = c.instructions().iter().position(|i| i.targets == [f, s]).unwrap();
        let site = FaultSite {
            instruction: idx,
            position: Position::After,
            error: FaultError::Pauli(PauliString::from_letters(vec![Pauli::Z, Pauli::I])),
        };
        let r = clifford_frame_propagate(&c, &[site], CheckMode::Full).unwrap();
        assert_eq!(r.classification, Classification::Detected);
    }
}
