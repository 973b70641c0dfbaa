//! Noisy benchmarks: protocols, shot sampling, curve points and scaling fits.

mod sampler;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::angle::DyadicAngle;
use crate::codes::{
    destructive_measure, flagged_z_syndrome_extraction, ft_plus_prep, iceberg_code, steane_code, Basis, CodeSpec,
};
use crate::constructors::{iceberg_rotation, steane_state_prep, RotationSpec, RotationTarget};
use crate::error::{Error, Result};
use crate::ir::{compose_reusing, Circuit, QubitId};
use crate::noise::{Arity3Policy, NoiseModel};
use crate::sv::{apply_pauli_rotation, encoded_plus, output_qubits, StateVector};

pub use sampler::{Location, Sampler, ShotOutcome, Tally};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Accepted shots whose decoded infidelity exceeds this count as errors.
pub const INFIDELITY_EVENT: f64 = 1e-9;
/// Fits only use points with at least this many error events.
pub const MIN_FIT_EVENTS: u64 = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Protocol {
    /// `|+...+>`, the rotation, its inverse, flagged Z syndrome extraction, then X readout.
    IcebergRotationInverse { k: usize, l: u32, target: RotationTarget },
    /// Verified `R_Z(pi/2^l)|+>` on the Steane code, scored by decoded infidelity.
    SteaneStatePrep { l: u32 },
}

impl Protocol {
    pub fn iceberg(i: usize, l: u32, k: usize) -> Self {
        Protocol::IcebergRotationInverse { k, l, target: RotationTarget::Single(i) }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Protocol::IcebergRotationInverse { .. } => "iceberg",
            Protocol::SteaneStatePrep { .. } => "steane-prep",
        }
    }

    pub fn l(&self) -> u32 {
        match self {
            Protocol::IcebergRotationInverse { l, .. } | Protocol::SteaneStatePrep { l } => *l,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkSpec {
    pub protocol: Protocol,
    pub ps: Vec<f64>,
    /// One count for every `p`, or one per `p`.
    pub shots: Vec<u64>,
    pub seed: u64,
    pub arity3: Arity3Policy,
    pub flip_data_measurements: bool,
}

impl BenchmarkSpec {
    pub fn new(protocol: Protocol, ps: Vec<f64>, shots: u64, seed: u64) -> Self {
        BenchmarkSpec {
            protocol,
            ps,
            shots: vec![shots],
            seed,
            arity3: Arity3Policy::Depolarize,
            flip_data_measurements: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ps.is_empty() {
            return Err(Error::InvalidArgument("no noise strengths given".into()));
        }
        if let Some(p) = self.ps.iter().find(|p| !(**p > 0.0 && **p <= 0.25)) {
            return Err(Error::InvalidArgument(format!("noise strength {p} outside (0, 0.25]")));
        }
        if self.shots.len() != 1 && self.shots.len() != self.ps.len() {
            return Err(Error::InvalidArgument(format!(
                "{} shot counts for {} noise strengths",
                self.shots.len(),
                self.ps.len()
            )));
        }
        if self.shots.contains(&0) {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        Ok(())
    }

    pub fn shots_at(&self, index: usize) -> u64 {
        if self.shots.len() == 1 {
            self.shots[0]
        } else {
            self.shots[index]
        }
    }

    pub fn noise(&self, p: f64) -> Result<NoiseModel> {
        let mut n = NoiseModel::new(p)?;
        n.arity3 = self.arity3;
        n.flip_data_measurements = self.flip_data_measurements;
        Ok(n)
    }
}

/// How an accepted shot is scored.
#[derive(Clone, Debug, PartialEq)]
pub enum Evaluation {
    /// Error iff any observable is 1.
    Observables,
    /// Infidelity of the data qubits after ideal decoding against `ideal`.
    Infidelity { code: CodeSpec, ideal: StateVector, data: Vec<QubitId> },
}

/// A protocol instance ready for sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct Benchmark {
    pub protocol: String,
    pub l: u32,
    pub circuit: Circuit,
    pub evaluation: Evaluation,
}

impl Benchmark {
    pub fn from_protocol(protocol: &Protocol) -> Result<Self> {
        match protocol {
            Protocol::IcebergRotationInverse { k, l, target } => Ok(Benchmark {
                protocol: protocol.name().to_string(),
                l: *l,
                circuit: iceberg_rotation_inverse(*k, *l, target.clone())?,
                evaluation: Evaluation::Observables,
            }),
            Protocol::SteaneStatePrep { l } => build_steane_prep_benchmark(*l),
        }
    }

    /// The same benchmark with 3-qubit gates rewritten when the policy asks for it.
    pub fn for_noise(&self, arity3: Arity3Policy) -> Self {
        let mut b = self.clone();
        let mut n = NoiseModel::noiseless();
        n.arity3 = arity3;
        b.circuit = n.prepare(&self.circuit);
        b
    }
}

fn iceberg_rotation_inverse(k: usize, l: u32, target: RotationTarget) -> Result<Circuit> {
    if l == 0 {
        return Err(Error::InvalidArgument("benchmark rotation needs l >= 1".into()));
    }
    let code = iceberg_code(k)?;
    let angle = DyadicAngle::pi_over_pow2(l);
    let fwd = iceberg_rotation(&RotationSpec::new(code.clone(), target.clone(), angle))?;
    let inv = iceberg_rotation(&RotationSpec::new(code.clone(), target, -angle))?;
    let prep = ft_plus_prep(&code)?;
    let se = flagged_z_syndrome_extraction(&code);
    let readout = destructive_measure(&code, Basis::X);
    compose_reusing(&[&prep, &fwd.circuit, &inv.circuit, &se, &readout])
}

/// Rotation-and-inverse benchmark on logical qubit `i` of the `[[k+2, k, 2]]` iceberg code.
pub fn build_iceberg_benchmark(i: usize, l: u32, k: usize) -> Result<Circuit> {
    iceberg_rotation_inverse(k, l, RotationTarget::Single(i))
}

/// Steane `|pi/2^l>` preparation scored against the ideal encoded state.
pub fn build_steane_prep_benchmark(l: u32) -> Result<Benchmark> {
    let circuit = steane_state_prep(l)?;
    let code = steane_code();
    let data: Vec<QubitId> = (0..code.n).collect();
    let mut ideal = encoded_plus(&code)?;
    apply_pauli_rotation(&mut ideal, &data, &code.logical_z[0], DyadicAngle::pi_over_pow2(l));
    let outs = output_qubits(&circuit);
    if outs != data {
        return Err(Error::InvalidCircuit("state preparation must leave exactly the data qubits".into()));
    }
    Ok(Benchmark {
        protocol: "steane-prep".into(),
        l,
        circuit,
        evaluation: Evaluation::Infidelity { code, ideal, data },
    })
}

fn css_corrections(n: usize, checks: &[Vec<usize>]) -> Vec<usize> {
    let syndrome = |e: usize| {
        checks
            .iter()
            .enumerate()
            .fold(0usize, |s, (j, c)| s | ((c.iter().filter(|&&q| e >> q & 1 == 1).count() & 1) << j))
    };
    let mut table = vec![usize::MAX; 1 << checks.len()];
    let mut errors: Vec<usize> = (0..1usize << n).collect();
    errors.sort_by_key(|e| e.count_ones());
    for e in errors {
        let s = syndrome(e);
        if table[s] == usize::MAX {
            table[s] = e;
        }
    }
    table
}

/// `1 - F` between `ideal` and a normalized data state after ideal minimum-weight correction,
/// decoding X and Z errors separately.
pub fn decoded_infidelity(state: &StateVector, code: &CodeSpec, ideal: &StateVector) -> Result<f64> {
    let n = code.n;
    if state.num_qubits() != n || ideal.num_qubits() != n {
        return Err(Error::InvalidArgument("state and ideal must live on the code qubits".into()));
    }
    let qubits: Vec<QubitId> = (0..n).collect();
    let z_checks: Vec<Vec<usize>> = code.z_stabilizers.iter().map(|s| s.support()).collect();
    let x_checks: Vec<Vec<usize>> = code.x_stabilizers.iter().map(|s| s.support()).collect();
    let x_fix = css_corrections(n, &z_checks);
    let z_fix = css_corrections(n, &x_checks);
    let stabs: Vec<_> = code.z_stabilizers.iter().chain(&code.x_stabilizers).collect();
    let nz = z_checks.len();
    let mut fidelity = 0.0;
    for s in 0..1usize << stabs.len() {
        let mut v = state.clone();
        for (j, st) in stabs.iter().enumerate() {
            let mut t = v.clone();
            t.apply_pauli_on(&qubits, st);
            let sign = if s >> j & 1 == 1 { -0.5 } else { 0.5 };
            for (a, b) in v.amplitudes_mut().iter_mut().zip(t.amplitudes()) {
                *a = *a * 0.5 + b * sign;
            }
        }
        if v.norm_sqr() < 1e-300 {
            continue;
        }
        let (sz, sx) = (s & ((1 << nz) - 1), s >> nz);
        for q in 0..n {
            if x_fix[sz] >> q & 1 == 1 {
                v.apply_x(q);
            }
            if z_fix[sx] >> q & 1 == 1 {
                v.apply_pauli(q, crate::pauli::Pauli::Z);
            }
        }
        fidelity += ideal.inner(&v).norm_sqr();
    }
    Ok((1.0 - fidelity / ideal.norm_sqr()).clamp(0.0, 1.0))
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let ph = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (ph + z2 / (2.0 * nf)) / denom;
    let half = z * libm::sqrt(ph * (1.0 - ph) / nf + z2 / (4.0 * nf * nf)) / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// One row of a benchmark curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub protocol: String,
    pub l: u32,
    pub p: f64,
    pub shots: u64,
    pub accepted: u64,
    pub errors: u64,
    /// Post-selected logical error rate, or mean infidelity of accepted shots.
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl CurvePoint {
    pub fn from_tally(b: &Benchmark, p: f64, t: &Tally) -> Self {
        let (rate, (ci_lo, ci_hi)) = match b.evaluation {
            Evaluation::Observables => {
                let rate = if t.accepted == 0 { 0.0 } else { t.errors as f64 / t.accepted as f64 };
                (rate, wilson_interval(t.errors, t.accepted, Z95))
            }
            Evaluation::Infidelity { .. } => {
                let (mean, sd) = t.infidelity_moments();
                let half = if t.accepted == 0 { 1.0 } else { Z95 * sd / libm::sqrt(t.accepted as f64) };
                (mean, ((mean - half).max(0.0), (mean + half).min(1.0)))
            }
        };
        CurvePoint {
            protocol: b.protocol.clone(),
            l: b.l,
            p,
            shots: t.shots,
            accepted: t.accepted,
            errors: t.errors,
            rate,
            ci_lo,
            ci_hi,
        }
    }

    pub fn acceptance(&self) -> f64 {
        self.accepted as f64 / self.shots as f64
    }

    pub fn acceptance_interval(&self) -> (f64, f64) {
        wilson_interval(self.accepted, self.shots, Z95)
    }
}

/// Least-squares line through `(log10 p, log10 rate)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    /// `log10` of the prefactor.
    pub intercept: f64,
    /// Root-mean-square residual in decades.
    pub residual: f64,
    pub points_used: usize,
}

impl ScalingFit {
    pub fn prefactor(&self) -> f64 {
        libm::pow(10.0, self.intercept)
    }
}

/// Fits `rate = A p^s` over points with at least [`MIN_FIT_EVENTS`] errors.
pub fn fit_scaling(points: &[CurvePoint]) -> Result<ScalingFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|pt| pt.errors >= MIN_FIT_EVENTS && pt.rate > 0.0 && pt.p > 0.0)
        .map(|pt| (libm::log10(pt.p), libm::log10(pt.rate)))
        .collect();
    if usable.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "insufficient error events: {} of {} points have at least {MIN_FIT_EVENTS}",
            usable.len(),
            points.len()
        )));
    }
    let (slope, intercept, residual) = least_squares(&usable);
    Ok(ScalingFit { slope, intercept, residual, points_used: usable.len() })
}

/// `(slope, intercept, rms residual)` of an ordinary least-squares line.
pub fn least_squares(xy: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    (slope, intercept, libm::sqrt(rss / n))
}

/// Seed of shot `shot` at sweep point `point`.
pub fn shot_seed(seed: u64, point: u64, shot: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ point) ^ shot)
}
