use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{decoded_infidelity, Benchmark, Evaluation, INFIDELITY_EVENT};
use crate::error::{Error, Result};
use crate::ir::RoleKind;
use crate::pauli::Pauli;
use crate::sv::{evaluate, extract, uniform, Branch, Injections, Program, StateVector, BRANCH_CAP, C64};

const CHECKPOINT_BUDGET: usize = 1 << 22;
/// Fixed-point scale of the infidelity sums.
const FIXED: f64 = 18_446_744_073_709_551_616.0;

/// A place where the noise model can put a fault.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    /// A Pauli on the targets right after a unitary of this arity.
    Gate { instruction: usize, arity: usize },
    /// A flipped classical record.
    Flip { instruction: usize, record: usize },
}

impl Location {
    fn instruction(self) -> usize {
        match self {
            Location::Gate { instruction, .. } | Location::Flip { instruction, .. } => instruction,
        }
    }

    fn num_errors(self) -> usize {
        match self {
            Location::Gate { arity, .. } => (1 << (2 * arity)) - 1,
            Location::Flip { .. } => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotOutcome {
    pub accepted: bool,
    pub error: bool,
    pub infidelity: f64,
}

impl ShotOutcome {
    const REJECTED: ShotOutcome = ShotOutcome { accepted: false, error: false, infidelity: 0.0 };
}

/// Integer counters, so merging is independent of order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub shots: u64,
    pub accepted: u64,
    pub errors: u64,
    /// Sum of accepted-shot infidelities, scaled by `2^64`.
    pub infidelity_fixed: u128,
    pub infidelity_sq_fixed: u128,
}

impl Tally {
    pub fn add(&mut self, o: &ShotOutcome) {
        self.shots += 1;
        if o.accepted {
            self.accepted += 1;
            self.errors += o.error as u64;
            self.infidelity_fixed += (o.infidelity * FIXED) as u128;
            self.infidelity_sq_fixed += (o.infidelity * o.infidelity * FIXED) as u128;
        }
    }

    pub fn merge(&mut self, other: &Tally) {
        self.shots += other.shots;
        self.accepted += other.accepted;
        self.errors += other.errors;
        self.infidelity_fixed += other.infidelity_fixed;
        self.infidelity_sq_fixed += other.infidelity_sq_fixed;
    }

    /// Mean and standard deviation of the accepted-shot infidelity.
    pub fn infidelity_moments(&self) -> (f64, f64) {
        if self.accepted == 0 {
            return (0.0, 0.0);
        }
        let n = self.accepted as f64;
        let mean = self.infidelity_fixed as f64 / FIXED / n;
        let sq = self.infidelity_sq_fixed as f64 / FIXED / n;
        (mean, libm::sqrt((sq - mean * mean).max(0.0)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Weighted {
    weight: f64,
    error: bool,
    infidelity: f64,
}

/// Shot sampler for one benchmark.
///
/// Fault locations are drawn by geometric skipping. Shots without faults and shots with one
/// fault are drawn from exact branch expansions computed up front; shots with more faults run
/// a dense trajectory from the last noiseless checkpoint before the first fault.
#[derive(Debug)]
pub struct Sampler<'b> {
    bench: &'b Benchmark,
    program: Program<'b>,
    locations: Vec<Location>,
    /// `single[offsets[j] + e - 1]` holds the accepted branches of error `e` at location `j`.
    offsets: Vec<usize>,
    single: Vec<Vec<Weighted>>,
    reference: Vec<Weighted>,
    checkpoints: Vec<Vec<Branch>>,
    stride: usize,
}

impl<'b> Sampler<'b> {
    pub fn new(bench: &'b Benchmark, flip_data_measurements: bool) -> Result<Self> {
        let c = &bench.circuit;
        let program = Program::new(c)?;
        let mut locations = Vec::new();
        let mut r = 0;
        for (i, ins) in c.instructions().iter().enumerate() {
            if ins.kind.is_measurement() {
                if flip_data_measurements || c.role(ins.targets[0]).kind != RoleKind::Data {
                    locations.push(Location::Flip { instruction: i, record: r });
                }
                r += 1;
            } else if ins.kind.is_unitary() && ins.targets.len() >= 2 {
                locations.push(Location::Gate { instruction: i, arity: ins.targets.len() });
            }
        }
        let ni = program.num_instructions();
        let stride = ((1usize << c.num_qubits()) * (ni + 1)).div_ceil(CHECKPOINT_BUDGET).max(1);
        let mut checkpoints = Vec::new();
        let mut current = alloc::vec![Branch { state: StateVector::zero(c.num_qubits())?, records: Vec::new() }];
        let none = Injections::none();
        let mut k = 0;
        loop {
            checkpoints.push(current.clone());
            if k >= ni {
                break;
            }
            let end = (k + stride).min(ni);
            current = program.run_branches_until(current, k, end, &none, true, BRANCH_CAP, &mut Vec::new())?;
            k = end;
        }
        let mut s = Sampler {
            bench,
            program,
            locations,
            offsets: Vec::new(),
            single: Vec::new(),
            reference: Vec::new(),
            checkpoints,
            stride,
        };
        s.reference = s.score(current)?;
        let acceptance: f64 = s.reference.iter().map(|w| w.weight).sum();
        if (acceptance - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCircuit(format!("noiseless acceptance is {acceptance}, not 1")));
        }
        let mut offset = 0;
        for j in 0..s.locations.len() {
            s.offsets.push(offset);
            let loc = s.locations[j];
            for e in 1..=loc.num_errors() {
                let inj = s.injections(&[(j, e)]);
                let (cp, start) = s.checkpoint_for(loc.instruction());
                let end = s.program.run_branches(s.checkpoints[cp].clone(), start, &inj, true, BRANCH_CAP)?;
                let scored = s.score(end)?;
                s.single.push(scored);
            }
            offset += loc.num_errors();
        }
        Ok(s)
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    /// Acceptance to first order: `1 - p * sum over locations of the mean rejected weight`.
    pub fn first_order_rejection(&self) -> f64 {
        self.locations
            .iter()
            .enumerate()
            .map(|(j, loc)| {
                let n = loc.num_errors();
                let kept: f64 =
                    (1..=n).map(|e| self.single[self.offsets[j] + e - 1].iter().map(|w| w.weight).sum::<f64>()).sum();
                1.0 - kept / n as f64
            })
            .sum()
    }

    fn checkpoint_for(&self, instruction: usize) -> (usize, usize) {
        let cp = (instruction / self.stride).min(self.checkpoints.len() - 1);
        (cp, cp * self.stride)
    }

    fn injections(&self, faults: &[(usize, usize)]) -> Injections {
        let mut inj = Injections::none();
        for &(j, e) in faults {
            match self.locations[j] {
                Location::Gate { instruction, .. } => {
                    let targets = &self.bench.circuit.instructions()[instruction].targets;
                    for (t, &q) in targets.iter().enumerate() {
                        let p = Pauli::from_index(e >> (2 * t));
                        if p != Pauli::I {
                            inj.paulis.push((instruction, q, p));
                        }
                    }
                }
                Location::Flip { record, .. } => inj.flips.push(record),
            }
        }
        inj.paulis.sort_by_key(|e| e.0);
        inj.flips.sort_unstable();
        inj
    }

    fn outcome(&self, records: &[bool], state: &StateVector) -> Result<(bool, f64)> {
        match &self.bench.evaluation {
            Evaluation::Observables => Ok((evaluate(&self.bench.circuit, records).1.iter().any(|&o| o), 0.0)),
            Evaluation::Infidelity { code, ideal, data } => {
                let mut out = extract(state, data)?;
                out.normalize()?;
                let f = decoded_infidelity(&out, code, ideal)?;
                Ok((f > INFIDELITY_EVENT, f))
            }
        }
    }

    fn score(&self, branches: Vec<Branch>) -> Result<Vec<Weighted>> {
        branches
            .into_iter()
            .map(|b| {
                let weight = b.weight();
                let (error, infidelity) = self.outcome(&b.records, &b.state)?;
                Ok(Weighted { weight, error, infidelity })
            })
            .collect()
    }

    fn pick(list: &[Weighted], u: f64) -> ShotOutcome {
        let mut acc = 0.0;
        for w in list {
            acc += w.weight;
            if u < acc {
                return ShotOutcome { accepted: true, error: w.error, infidelity: w.infidelity };
            }
        }
        ShotOutcome::REJECTED
    }

    /// Faults of one shot as `(location, error index)`.
    fn draw_faults(&self, p: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
        let mut faults = Vec::new();
        if p <= 0.0 {
            return faults;
        }
        let n = self.locations.len();
        let log_q = libm::log1p(-p.min(1.0 - 1e-16));
        let mut j = 0usize;
        loop {
            let u = uniform(rng);
            let skip = libm::floor(libm::log1p(-u) / log_q);
            if !(skip < (n - j) as f64) {
                break;
            }
            j += skip as usize;
            let m = self.locations[j].num_errors() as u64;
            faults.push((j, 1 + (rng.next_u64() % m) as usize));
            j += 1;
            if j >= n {
                break;
            }
        }
        faults
    }

    /// One shot at noise strength `p`, fully determined by `seed`.
    pub fn shot(&self, p: f64, seed: u64) -> Result<ShotOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let faults = self.draw_faults(p, &mut rng);
        match faults.as_slice() {
            [] => Ok(Self::pick(&self.reference, uniform(&mut rng))),
            [(j, e)] => Ok(Self::pick(&self.single[self.offsets[*j] + e - 1], uniform(&mut rng))),
            _ => {
                let inj = self.injections(&faults);
                let first = self.locations[faults[0].0].instruction();
                let (cp, start) = self.checkpoint_for(first);
                let branches = &self.checkpoints[cp];
                let total: f64 = branches.iter().map(|b| b.weight()).sum();
                let u = uniform(&mut rng) * total;
                let mut acc = 0.0;
                let b = branches
                    .iter()
                    .find(|b| {
                        acc += b.weight();
                        u < acc
                    })
                    .unwrap_or(&branches[branches.len() - 1]);
                let mut state = b.state.clone();
                state.scale(C64::new(1.0 / libm::sqrt(b.weight()), 0.0));
                let mut records = b.records.clone();
                self.program.run_sampled(&mut state, &mut records, start, &inj, &mut rng);
                if evaluate(&self.bench.circuit, &records).0.iter().any(|&d| d) {
                    return Ok(ShotOutcome::REJECTED);
                }
                let (error, infidelity) = self.outcome(&records, &state)?;
                Ok(ShotOutcome { accepted: true, error, infidelity })
            }
        }
    }

    /// Tally of shots `range` at sweep point `point`, seeded with [`super::shot_seed`].
    pub fn run(&self, p: f64, seed: u64, point: u64, range: Range<u64>) -> Result<Tally> {
        let mut t = Tally::default();
        for shot in range {
            t.add(&self.shot(p, super::shot_seed(seed, point, shot))?);
        }
        Ok(t)
    }
}
