use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::engine::{evaluate, uniform, Branch, Injections, Program};
use super::state::{StateVector, C64};
use crate::angle::DyadicAngle;
use crate::codes::CodeSpec;
use crate::error::{Error, Result};
use crate::ir::{Circuit, QubitId, RoleKind};
use crate::noise::{nontrivial_paulis, FaultSite, NoiseModel};
use crate::pauli::PauliString;

/// Live-branch cap for exact expansions.
pub const BRANCH_CAP: usize = 1 << 12;

/// Outcome of one shot.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShotResult {
    pub records: Vec<bool>,
    pub detectors: Vec<bool>,
    pub observables: Vec<bool>,
    pub accepted: bool,
}

impl ShotResult {
    pub fn from_records(c: &Circuit, records: Vec<bool>) -> Self {
        let (detectors, observables) = evaluate(c, &records);
        let accepted = !detectors.iter().any(|&d| d);
        ShotResult { records, detectors, observables, accepted }
    }

    pub fn logical_error(&self) -> bool {
        self.accepted && self.observables.iter().any(|&o| o)
    }
}

/// Qubits whose first use is not a preparation: they carry the circuit's input.
pub fn input_qubits(c: &Circuit) -> Vec<QubitId> {
    let mut first: Vec<Option<bool>> = vec![None; c.num_qubits()];
    for ins in c.instructions() {
        for &q in &ins.targets {
            if first[q].is_none() {
                first[q] = Some(ins.kind.is_prep());
            }
        }
    }
    (0..c.num_qubits()).filter(|&q| first[q] != Some(true)).collect()
}

/// Qubits not measured at the end: they carry the circuit's output.
pub fn output_qubits(c: &Circuit) -> Vec<QubitId> {
    let m = c.measured_at_end();
    (0..c.num_qubits()).filter(|&q| !m[q]).collect()
}

/// Places `input` (ordered like `qubits`) into an all-zero register of `n` qubits.
pub fn embed(n: usize, qubits: &[QubitId], input: &StateVector) -> Result<StateVector> {
    if input.num_qubits() != qubits.len() {
        return Err(Error::InvalidArgument(format!(
            "input has {} qubits, expected {}",
            input.num_qubits(),
            qubits.len()
        )));
    }
    let mut out = StateVector::zero(n)?;
    let amps = out.amplitudes_mut();
    amps[0] = C64::new(0.0, 0.0);
    for (j, &a) in input.amplitudes().iter().enumerate() {
        amps[scatter(j, qubits)] = a;
    }
    Ok(out)
}

fn scatter(j: usize, qubits: &[QubitId]) -> usize {
    qubits.iter().enumerate().fold(0, |acc, (b, &q)| acc | (((j >> b) & 1) << q))
}

/// The factor on `keep` of a register whose other qubits are in computational basis states.
pub fn extract(state: &StateVector, keep: &[QubitId]) -> Result<StateVector> {
    let amps = state.amplitudes();
    let keep_mask = keep.iter().fold(0usize, |m, &q| m | (1 << q));
    let (argmax, _) =
        amps.iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, a)| if a.norm_sqr() > best.1 { (i, a.norm_sqr()) } else { best });
    let rest = argmax & !keep_mask;
    let out: Vec<C64> = (0..1usize << keep.len()).map(|j| amps[rest | scatter(j, keep)]).collect();
    let total = state.norm_sqr();
    let kept: f64 = out.iter().map(|a| a.norm_sqr()).sum();
    if total > 0.0 && (total - kept) > 1e-10 * total {
        return Err(Error::InvalidCircuit("output qubits entangled with measured qubits".into()));
    }
    Ok(StateVector::from_amplitudes(keep.len(), out))
}

/// `prod_s (1 + S)/2` over the code's stabilizers, acting on `qubits[j]` for code qubit `j`.
pub fn project_code(state: &mut StateVector, code: &CodeSpec, qubits: &[QubitId]) {
    for s in code.stabilizers() {
        let mut t = state.clone();
        t.apply_pauli_on(qubits, s);
        for (a, b) in state.amplitudes_mut().iter_mut().zip(t.amplitudes()) {
            *a = (*a + b) * 0.5;
        }
    }
}

/// `exp(-i theta/2 P)` applied to `state`, for Hermitian `P` on `qubits`.
pub fn apply_pauli_rotation(state: &mut StateVector, qubits: &[QubitId], p: &PauliString, theta: DyadicAngle) {
    let h = theta.radians() / 2.0;
    let mut t = state.clone();
    t.apply_pauli_on(qubits, p);
    let (c, s) = (C64::new(libm::cos(h), 0.0), C64::new(0.0, -libm::sin(h)));
    for (a, b) in state.amplitudes_mut().iter_mut().zip(t.amplitudes()) {
        *a = *a * c + b * s;
    }
}

/// Encoded computational basis state `|j>` (bit `i` of `j` is logical qubit `i+1`) on the code's `n` qubits.
pub fn encoded_basis_state(code: &CodeSpec, j: usize) -> Result<StateVector> {
    let qubits: Vec<QubitId> = (0..code.n).collect();
    let mut s = StateVector::zero(code.n)?;
    project_code(&mut s, code, &qubits);
    for z in &code.logical_z {
        let mut t = s.clone();
        t.apply_pauli_on(&qubits, z);
        for (a, b) in s.amplitudes_mut().iter_mut().zip(t.amplitudes()) {
            *a = (*a + b) * 0.5;
        }
    }
    s.normalize()?;
    for (i, x) in code.logical_x.iter().enumerate() {
        if (j >> i) & 1 == 1 {
            s.apply_pauli_on(&qubits, x);
        }
    }
    Ok(s)
}

/// Encodes a `k`-qubit logical state.
pub fn encode(code: &CodeSpec, logical: &StateVector) -> Result<StateVector> {
    if logical.num_qubits() != code.k {
        return Err(Error::InvalidArgument(format!("logical state needs {} qubits", code.k)));
    }
    let mut out = StateVector::from_amplitudes(code.n, vec![C64::new(0.0, 0.0); 1 << code.n]);
    for (j, &a) in logical.amplitudes().iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let b = encoded_basis_state(code, j)?;
        for (o, v) in out.amplitudes_mut().iter_mut().zip(b.amplitudes()) {
            *o += a * v;
        }
    }
    Ok(out)
}

/// `|+>^k` encoded.
pub fn encoded_plus(code: &CodeSpec) -> Result<StateVector> {
    let d = 1usize << code.k;
    let a = C64::new(1.0 / libm::sqrt(d as f64), 0.0);
    encode(code, &StateVector::from_amplitudes(code.k, vec![a; d]))
}

/// `1 - |<ideal|state>|^2` after projecting both onto the code space and renormalizing.
pub fn logical_infidelity(state: &StateVector, code: &CodeSpec, ideal: &StateVector) -> Result<f64> {
    let qubits: Vec<QubitId> = (0..code.n).collect();
    let (c, f) = projected_overlap(state, code, &qubits, ideal)?;
    if c <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((1.0 - f / c).clamp(0.0, 1.0))
}

/// `(|| Pi s ||^2, |<Pi ideal | s>|^2 / ||Pi ideal||^2)` for a normalized `s`.
pub fn projected_overlap(
    s: &StateVector,
    code: &CodeSpec,
    qubits: &[QubitId],
    ideal: &StateVector,
) -> Result<(f64, f64)> {
    let n = s.norm_sqr();
    if n <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let mut a = s.clone();
    a.scale(C64::new(1.0 / libm::sqrt(n), 0.0));
    project_code(&mut a, code, qubits);
    let mut b = ideal.clone();
    project_code(&mut b, code, qubits);
    let nb = b.norm_sqr();
    if nb <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((a.norm_sqr(), b.inner(&a).norm_sqr() / nb))
}

fn initial(c: &Circuit, input: Option<&StateVector>) -> Result<StateVector> {
    match input {
        Some(s) if s.num_qubits() == c.num_qubits() => Ok(s.clone()),
        Some(s) => Err(Error::InvalidArgument(format!(
            "input state has {} qubits, circuit has {}",
            s.num_qubits(),
            c.num_qubits()
        ))),
        None => StateVector::zero(c.num_qubits()),
    }
}

/// Noiseless trajectory with Born-rule sampling from `seed`.
pub fn run_noiseless(c: &Circuit, input: Option<&StateVector>, seed: u64) -> Result<(StateVector, ShotResult)> {
    let prog = Program::new(c)?;
    let mut state = initial(c, input)?;
    let mut records = Vec::with_capacity(c.num_records());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    prog.run_sampled(&mut state, &mut records, 0, &Injections::none(), &mut rng);
    Ok((state, ShotResult::from_records(c, records)))
}

/// Draws the faults of one shot: a uniform non-identity Pauli after each gate of arity >= 2
/// with probability `p`, and record flips with probability `p`.
pub fn sample_injections<R: RngCore + ?Sized>(c: &Circuit, noise: &NoiseModel, rng: &mut R) -> Injections {
    let mut inj = Injections::none();
    if noise.p == 0.0 {
        return inj;
    }
    let mut r = 0;
    for (i, ins) in c.instructions().iter().enumerate() {
        let w = ins.targets.len();
        if ins.kind.is_measurement() {
            let skip = !noise.flip_data_measurements && c.role(ins.targets[0]).kind == RoleKind::Data;
            if !skip && uniform(rng) < noise.p {
                inj.flips.push(r);
            }
            r += 1;
        } else if ins.kind.is_unitary() && w >= 2 && uniform(rng) < noise.p {
            let code = 1 + (rng.next_u64() % ((1u64 << (2 * w)) - 1)) as usize;
            for (j, &q) in ins.targets.iter().enumerate() {
                let l = crate::pauli::Pauli::from_index(code >> (2 * j));
                if l != crate::pauli::Pauli::I {
                    inj.paulis.push((i, q, l));
                }
            }
        }
    }
    inj
}

/// One noisy trajectory, fully determined by `seed`. The final state is returned as well.
pub fn run_noisy_shot_with_state(
    c: &Circuit,
    noise: &NoiseModel,
    input: Option<&StateVector>,
    seed: u64,
) -> Result<(StateVector, ShotResult)> {
    let owned;
    let c = if noise.arity3 == crate::noise::Arity3Policy::Decompose {
        owned = noise.prepare(c);
        &owned
    } else {
        c
    };
    let prog = Program::new(c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inj = sample_injections(c, noise, &mut rng);
    let mut state = initial(c, input)?;
    let mut records = Vec::with_capacity(c.num_records());
    prog.run_sampled(&mut state, &mut records, 0, &inj, &mut rng);
    Ok((state, ShotResult::from_records(c, records)))
}

pub fn run_noisy_shot(c: &Circuit, noise: &NoiseModel, seed: u64) -> Result<ShotResult> {
    Ok(run_noisy_shot_with_state(c, noise, None, seed)?.1)
}

/// Injections realizing a single fault site.
pub fn injections_for(c: &Circuit, faults: &[&FaultSite]) -> Injections {
    let mut inj = Injections::none();
    for f in faults {
        if let Some(r) = f.flipped_record(c) {
            inj.add_flip(r);
        }
        if let Some(ps) = f.physical(c) {
            for (q, l) in ps {
                inj.add_pauli(f.instruction, q, l);
            }
        }
    }
    inj
}

/// Accepted Kraus branches of a circuit for one input.
#[derive(Clone, Debug)]
pub struct AcceptedBranches {
    /// Record and unnormalized output state (over [`output_qubits`]) per branch.
    pub branches: Vec<(Vec<bool>, StateVector)>,
    pub acceptance: f64,
}

impl AcceptedBranches {
    /// Coherent sum of the branch outputs.
    pub fn summed(&self, n_out: usize) -> StateVector {
        let mut out = StateVector::from_amplitudes(n_out, vec![C64::new(0.0, 0.0); 1 << n_out]);
        for (_, s) in &self.branches {
            for (o, a) in out.amplitudes_mut().iter_mut().zip(s.amplitudes()) {
                *o += a;
            }
        }
        out
    }
}

/// Runs `c` as a linear map on `input` (ordered like [`input_qubits`]), keeping only branches
/// where every detector is 0. Faults are inserted as given.
pub fn accepted_branches(c: &Circuit, input: &StateVector, inj: &Injections) -> Result<AcceptedBranches> {
    check_data_coverage(c)?;
    let prog = Program::new(c)?;
    let ins = input_qubits(c);
    let outs = output_qubits(c);
    let start = embed(c.num_qubits(), &ins, input)?;
    let norm = start.norm_sqr();
    let raw = prog.run_branches(vec![Branch { state: start, records: Vec::new() }], 0, inj, true, BRANCH_CAP)?;
    let mut acceptance = 0.0;
    let mut branches = Vec::with_capacity(raw.len());
    for b in raw {
        acceptance += b.weight();
        branches.push((b.records, extract(&b.state, &outs)?));
    }
    Ok(AcceptedBranches { branches, acceptance: if norm > 0.0 { acceptance / norm } else { 0.0 } })
}

/// Subnormalized accepted output over the output qubits and the acceptance probability.
pub fn accepted_branch_state(
    c: &Circuit,
    input: &StateVector,
    fault: Option<&FaultSite>,
) -> Result<(StateVector, f64)> {
    let inj = match fault {
        Some(f) => injections_for(c, &[f]),
        None => Injections::none(),
    };
    let a = accepted_branches(c, input, &inj)?;
    Ok((a.summed(output_qubits(c).len()), a.acceptance))
}

fn check_data_coverage(c: &Circuit) -> Result<()> {
    let mut covered = vec![false; c.num_records()];
    for r in c.detectors().iter().flat_map(|d| &d.records).chain(c.observables().iter().flat_map(|o| &o.records)) {
        covered[*r] = true;
    }
    let mut r = 0;
    for ins in c.instructions() {
        if ins.kind.is_measurement() {
            if c.role(ins.targets[0]).kind == RoleKind::Data && !covered[r] {
                return Err(Error::InvalidCircuit(format!("data measurement record r{r} is not covered")));
            }
            r += 1;
        }
    }
    Ok(())
}

/// Kraus-level agreement of the accepted map with an ideal map, given as output states for a list
/// of inputs: `sum_r |<<U, V_r>>|^2 / (<<U, U>> sum_r <<V_r, V_r>>)`, where `V_r` stacks the
/// branch-`r` outputs over inputs. Inputs are ordered like [`input_qubits`], outputs like [`output_qubits`].
pub fn accepted_map_fidelity(
    c: &Circuit,
    inputs: impl IntoIterator<Item = (StateVector, StateVector)>,
    inj: &Injections,
) -> Result<MapFidelity> {
    let mut per_key: BTreeMap<Vec<bool>, (C64, f64)> = BTreeMap::new();
    let (mut uu, mut vv_in) = (0.0, 0.0);
    for (input, ideal) in inputs {
        vv_in += input.norm_sqr();
        uu += ideal.norm_sqr();
        let a = accepted_branches(c, &input, inj)?;
        for (key, v) in a.branches {
            let e = per_key.entry(key).or_insert((C64::new(0.0, 0.0), 0.0));
            e.0 += ideal.inner(&v);
            e.1 += v.norm_sqr();
        }
    }
    let vv: f64 = per_key.values().map(|e| e.1).sum();
    let num: f64 = per_key.values().map(|e| e.0.norm_sqr()).sum();
    let fidelity = if uu > 0.0 && vv > 0.0 { num / (uu * vv) } else { 0.0 };
    Ok(MapFidelity { fidelity, acceptance: if vv_in > 0.0 { vv / vv_in } else { 0.0 } })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapFidelity {
    pub fidelity: f64,
    pub acceptance: f64,
}

/// Ideal operator for [`rotation_fidelity`]: `exp(-i theta/2 P)` on data qubits, optionally
/// controlled on every listed control qubit being 1.
#[derive(Clone, Debug)]
pub struct IdealRotation {
    pub pauli: PauliString,
    pub pauli_qubits: Vec<QubitId>,
    pub angle: DyadicAngle,
    pub controls: Vec<QubitId>,
}

impl IdealRotation {
    /// Applies the operator to a state over the listed register qubits.
    pub fn apply(&self, state: &mut StateVector) {
        if self.controls.is_empty() {
            apply_pauli_rotation(state, &self.pauli_qubits, &self.pauli, self.angle);
            return;
        }
        let mut rotated = state.clone();
        apply_pauli_rotation(&mut rotated, &self.pauli_qubits, &self.pauli, self.angle);
        let mask = self.controls.iter().fold(0usize, |m, &q| m | (1 << q));
        for (i, (a, r)) in state.amplitudes_mut().iter_mut().zip(rotated.amplitudes()).enumerate() {
            if i & mask == mask {
                *a = *r;
            }
        }
    }
}

/// Accepted-map fidelity against an ideal rotation. With a code on the circuit, inputs are the
/// encoded logical basis states tensored with basis states of any other input qubits; without
/// one, all computational basis states of the input qubits.
pub fn rotation_fidelity(c: &Circuit, ideal: &IdealRotation, inj: &Injections) -> Result<MapFidelity> {
    let ins = input_qubits(c);
    let outs = output_qubits(c);
    if ins != outs {
        return Err(Error::InvalidCircuit("input and output qubits differ".into()));
    }
    let inputs = basis_inputs(c, &ins)?;
    let n_all = c.num_qubits();
    let pairs = inputs.into_iter().map(move |s| {
        let mut full = embed(n_all, &ins, &s).expect("sized input");
        ideal.apply(&mut full);
        let out = extract(&full, &outs).expect("product input");
        (s, out)
    });
    accepted_map_fidelity(c, pairs, inj)
}

/// Basis of the (logical) input space, as states over `ins`.
pub fn basis_inputs(c: &Circuit, ins: &[QubitId]) -> Result<Vec<StateVector>> {
    match c.code() {
        None => (0..1usize << ins.len()).map(|j| StateVector::basis(ins.len(), j)).collect(),
        Some(code) => {
            let pos: Vec<usize> = (0..code.n)
                .map(|q| {
                    ins.iter()
                        .position(|&x| x == q)
                        .ok_or_else(|| Error::InvalidCircuit(format!("code qubit {q} is not an input")))
                })
                .collect::<Result<_>>()?;
            let others: Vec<usize> = (0..ins.len()).filter(|j| !pos.contains(j)).collect();
            let mut out = Vec::new();
            for j in 0..1usize << code.k {
                let enc = encoded_basis_state(code, j)?;
                for o in 0..1usize << others.len() {
                    let mut amps = vec![C64::new(0.0, 0.0); 1 << ins.len()];
                    let base = others.iter().enumerate().fold(0, |m, (b, &p)| m | (((o >> b) & 1) << p));
                    for (e, &a) in enc.amplitudes().iter().enumerate() {
                        amps[base | scatter(e, &pos)] = a;
                    }
                    out.push(StateVector::from_amplitudes(ins.len(), amps));
                }
            }
            Ok(out)
        }
    }
}

/// Acceptance probability under `noise` to first order in the number of faults: the no-fault
/// term plus every single fault (each Pauli of each gate location, each record flip) weighted by its
/// probability. The neglected mass is at most the probability of two or more faults.
pub fn first_order_acceptance(c: &Circuit, noise: &NoiseModel) -> Result<f64> {
    let start = StateVector::zero(input_qubits(c).len())?;
    let p = noise.p;
    let mut singles: Vec<(f64, Injections)> = Vec::new();
    let mut n_loc = 0.0;
    let mut r = 0;
    for (j, ins) in c.instructions().iter().enumerate() {
        if ins.kind.is_measurement() {
            if noise.flip_data_measurements || c.role(ins.targets[0]).kind != RoleKind::Data {
                let mut inj = Injections::none();
                inj.add_flip(r);
                singles.push((1.0, inj));
                n_loc += 1.0;
            }
            r += 1;
        } else if ins.kind.is_unitary() && ins.targets.len() >= 2 {
            let paulis = nontrivial_paulis(ins.targets.len());
            let w = 1.0 / paulis.len() as f64;
            n_loc += 1.0;
            for ps in paulis {
                let mut inj = Injections::none();
                for (&q, &l) in ins.targets.iter().zip(ps.letters()) {
                    if l != crate::pauli::Pauli::I {
                        inj.add_pauli(j, q, l);
                    }
                }
                singles.push((w, inj));
            }
        }
    }
    let none = libm::pow(1.0 - p, n_loc);
    let one = p * libm::pow(1.0 - p, n_loc - 1.0);
    let mut total = none * accepted_branches(c, &start, &Injections::none())?.acceptance;
    for (w, inj) in &singles {
        total += one * w * accepted_branches(c, &start, inj)?.acceptance;
    }
    Ok(total)
}
