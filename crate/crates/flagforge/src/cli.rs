//! The `flagforge` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use flagforge_core::codes::{iceberg_code, steane_code, LogicalWord};
use flagforge_core::constructors::{
    apply_toffoli_ladder, iceberg_binary_rotation, iceberg_logical_rz, iceberg_pair_rotation, nonft_logical_rz_ladder,
    nonft_rzz, steane_ft_rz, steane_pi2_d3, steane_pi2_d3_ablated, steane_state_prep,
};
use flagforge_core::faults::{fault_distance, CheckMode, Engine};
use flagforge_core::harness::{build_iceberg_benchmark, BenchmarkSpec, Protocol};
use flagforge_core::ir::{Circuit, MAX_UNITARY_QUBITS};
use flagforge_core::noise::Arity3Policy;
use flagforge_core::sv::{input_qubits, rotation_fidelity, IdealRotation, Injections};
use flagforge_core::{DyadicAngle, Error, Pauli, PauliString};

use crate::config::{layered, Config, ConfigError};
use crate::curve::write_csv;
use crate::sweep::run_sweep;
use crate::text::{parse_circuit, print_circuit};

/// Fidelity needed for `verify-unitary` to pass.
pub const VERIFY_TOLERANCE: f64 = 1e-9;
pub const SEED_ENV: &str = "FLAGFORGE_SEED";
const MAX_SHOWN_WITNESSES: usize = 8;

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    VerificationFailed = 1,
    Argument = 2,
    Resource = 3,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    fn argument(m: impl Into<String>) -> Self {
        Failure { exit: Exit::Argument, message: m.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::ResourceLimit(_) => Exit::Resource,
            _ => Exit::Argument,
        };
        Failure { exit, message: e.to_string() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::argument(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "flagforge",
    version,
    about = "Build, verify and benchmark flag gadgets for small-angle logical rotations"
)]
pub struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a gadget or benchmark circuit in the text format.
    Build(BuildArgs),
    /// Check a circuit's accepted map against exp(-i theta/2 P).
    VerifyUnitary(VerifyArgs),
    /// Exhaustive minimum-weight fault search.
    FaultDistance(DistanceArgs),
    /// Monte Carlo sweep of a benchmark over p, written as CSV.
    Sweep(SweepArgs),
    /// Parse a circuit file and print a summary.
    ParseCheck(ParseCheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Gadget {
    /// FT logical R_Z(pi/2^l) on iceberg logical qubit i.
    IcebergRz,
    /// FT R_ZZ(pi/2^l) on iceberg logical qubits i and j.
    IcebergPair,
    /// FT rotation by pi times the binary fraction --bits on logical qubit i.
    IcebergBinary,
    /// Unflagged physical R_ZZ(pi/2^l) between q_i and q_b.
    NonftRzz,
    /// Unflagged CNOT-ladder R_Z(pi/2^l) on the Steane code.
    NonftLadder,
    /// FT R_Z(pi/2^l) on the Steane code.
    SteaneRz,
    /// Verified Steane |pi/2^l> preparation.
    SteanePrep,
    /// Fault-distance-3 Steane R_Z(pi/2).
    SteanePi2D3,
    /// The same with one syndrome round removed.
    SteanePi2D3Ablated,
    /// Iceberg rotation-and-inverse benchmark.
    IcebergBenchmark,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    pub gadget: Gadget,
    #[arg(long, default_value_t = 1)]
    pub i: usize,
    #[arg(long, default_value_t = 2)]
    pub j: usize,
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Binary fraction such as 0.11 or 1.01 for iceberg-binary.
    #[arg(long)]
    pub bits: Option<String>,
    /// Rotate by the negative angle.
    #[arg(long)]
    pub negative: bool,
    /// Lower the recursion with the Toffoli ladder.
    #[arg(long)]
    pub ladder: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub file: PathBuf,
    /// Logical word (Z1, Z1Z2, X1, or I) and angle in units of pi (1/4, 1/2^2, 0).
    #[arg(long, num_args = 2, value_names = ["WORD", "ANGLE"], allow_hyphen_values = true, required = true)]
    pub against: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineChoice {
    /// Clifford frames when the circuit is Clifford, dense otherwise.
    Auto,
    Clifford,
    Dense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    Full,
    Phase,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub max_weight: usize,
    #[arg(long, value_enum, default_value_t = EngineChoice::Auto)]
    pub engine: EngineChoice,
    #[arg(long, value_enum, default_value_t = ModeChoice::Full)]
    pub mode: ModeChoice,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Flat key = value file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// iceberg or steane-prep.
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub i: Option<usize>,
    /// Logical word for the iceberg rotation instead of Z_i.
    #[arg(long)]
    pub word: Option<String>,
    /// Comma-separated noise strengths.
    #[arg(long)]
    pub p: Option<String>,
    /// Shots per point, or a comma-separated list with one count per p.
    #[arg(long)]
    pub shots: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// depolarize or decompose.
    #[arg(long)]
    pub arity3: Option<String>,
    /// Whether data-qubit readout records can flip.
    #[arg(long)]
    pub data_flips: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParseCheckArgs {
    pub file: PathBuf,
}

pub const SWEEP_KEYS: [&str; 12] =
    ["protocol", "l", "k", "i", "word", "p", "shots", "seed", "arity3", "data_flips", "out", "threads"];

/// Parses a count such as `1000`, `1e6` or `2.5e5`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let f: f64 = s.parse().map_err(|_| format!("bad count `{s}`"))?;
    if !(0.0..=1e15).contains(&f) || f.fract() != 0.0 {
        return Err(format!("bad count `{s}`"));
    }
    Ok(f as u64)
}

/// Angle in units of pi: `n/2^l`, `n/d` with `d` a power of two, or an integer.
pub fn parse_pi_fraction(s: &str) -> Result<DyadicAngle, String> {
    let bad = || format!("bad angle `{s}`, expected n/2^l in units of pi");
    if let Ok(a) = s.parse::<DyadicAngle>() {
        return Ok(a);
    }
    let (n, d) = s.split_once('/').ok_or_else(bad)?;
    let n: i64 = n.trim().parse().map_err(|_| bad())?;
    let d: u64 = d.trim().parse().map_err(|_| bad())?;
    if !d.is_power_of_two() || d.trailing_zeros() > flagforge_core::angle::MAX_LOG2_DENOM {
        return Err(bad());
    }
    Ok(DyadicAngle::new(n, d.trailing_zeros()))
}

fn parse_bits(s: &str) -> Result<Vec<bool>, String> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits: String = format!("{int}{frac}");
    if int.len() != 1 || digits.chars().any(|c| c != '0' && c != '1') {
        return Err(format!("bad binary fraction `{s}`, expected x0.x1x2..."));
    }
    Ok(digits.chars().map(|c| c == '1').collect())
}

fn read_circuit(path: &Path) -> Result<Circuit, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::argument(format!("{}: {e}", path.display())))?;
    parse_circuit(&text).map_err(|e| Failure::argument(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::argument(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::argument(e.to_string())),
    }
}

fn need_l(a: &BuildArgs) -> Result<u32, Failure> {
    a.l.ok_or_else(|| Failure::argument(format!("{:?} needs --l", a.gadget)))
}

pub fn build_circuit(a: &BuildArgs) -> Result<Circuit, Failure> {
    let ladder = |g: flagforge_core::constructors::GadgetReport| -> Result<Circuit, Failure> {
        Ok(if a.ladder { apply_toffoli_ladder(&g)?.circuit } else { g.circuit })
    };
    Ok(match a.gadget {
        Gadget::IcebergRz => ladder(iceberg_logical_rz(a.i, need_l(a)?, a.negative, &iceberg_code(a.k)?)?)?,
        Gadget::IcebergPair => ladder(iceberg_pair_rotation(a.i, a.j, need_l(a)?, a.negative, &iceberg_code(a.k)?)?)?,
        Gadget::IcebergBinary => {
            let bits = a.bits.as_deref().ok_or_else(|| Failure::argument("iceberg-binary needs --bits"))?;
            let bits = parse_bits(bits).map_err(Failure::argument)?;
            ladder(iceberg_binary_rotation(&bits, a.i, &iceberg_code(a.k)?)?)?
        }
        Gadget::NonftRzz => {
            let mut angle = DyadicAngle::pi_over_pow2(need_l(a)?);
            if a.negative {
                angle = -angle;
            }
            nonft_rzz(&iceberg_code(a.k)?, a.i, angle)?.circuit
        }
        Gadget::NonftLadder => nonft_logical_rz_ladder(&steane_code(), DyadicAngle::pi_over_pow2(need_l(a)?), 0)?,
        Gadget::SteaneRz => steane_ft_rz(need_l(a)?)?.circuit,
        Gadget::SteanePrep => steane_state_prep(need_l(a)?)?,
        Gadget::SteanePi2D3 => steane_pi2_d3()?,
        Gadget::SteanePi2D3Ablated => steane_pi2_d3_ablated()?,
        Gadget::IcebergBenchmark => build_iceberg_benchmark(a.i, need_l(a)?, a.k)?,
    })
}

/// Accepted-map fidelity of `c` against `exp(-i theta/2 P)`.
pub fn verify_against(c: &Circuit, word: &LogicalWord, angle: DyadicAngle) -> Result<f64, Failure> {
    if c.num_qubits() > MAX_UNITARY_QUBITS {
        return Err(Failure {
            exit: Exit::Resource,
            message: format!("{} qubits exceeds the verification limit of {MAX_UNITARY_QUBITS}", c.num_qubits()),
        });
    }
    let ideal = match c.code() {
        Some(code) => IdealRotation {
            pauli: word.to_physical(code)?,
            pauli_qubits: (0..code.n).collect(),
            angle,
            controls: vec![],
        },
        None => {
            let ins = input_qubits(c);
            let mut letters = vec![Pauli::I; ins.len()];
            for &(i, p) in word.factors() {
                *letters.get_mut(i - 1).ok_or_else(|| {
                    Failure::argument(format!("word index {i} exceeds the {} input qubits", ins.len()))
                })? = p;
            }
            IdealRotation { pauli: PauliString::from_letters(letters), pauli_qubits: ins, angle, controls: vec![] }
        }
    };
    Ok(rotation_fidelity(c, &ideal, &Injections::none())?.fidelity)
}

fn spec_from(a: &SweepArgs, config: &Config) -> Result<(BenchmarkSpec, Option<PathBuf>, Option<usize>), Failure> {
    config.check_keys(&SWEEP_KEYS)?;
    let protocol_name = layered(a.protocol.clone(), config, "protocol", "iceberg".to_string())?;
    let l: u32 = layered(a.l, config, "l", 2)?;
    let protocol = match protocol_name.as_str() {
        "iceberg" => {
            let k = layered(a.k, config, "k", 2)?;
            let i = layered(a.i, config, "i", 1)?;
            let mut p = Protocol::iceberg(i, l, k);
            if let Some(w) = a.word.clone().or_else(|| config.get_str("word").map(String::from)) {
                let w: LogicalWord = w.parse().map_err(|e: flagforge_core::ParseError| Failure::argument(e.message))?;
                p = Protocol::IcebergRotationInverse {
                    k,
                    l,
                    target: flagforge_core::constructors::RotationTarget::Word(w),
                };
            }
            p
        }
        "steane-prep" | "steane" => Protocol::SteaneStatePrep { l },
        other => return Err(Failure::argument(format!("unknown protocol `{other}` (iceberg, steane-prep)"))),
    };
    let ps_text =
        a.p.clone()
            .or_else(|| config.get_str("p").map(String::from))
            .ok_or_else(|| Failure::argument("sweep needs --p"))?;
    let ps: Vec<f64> = ps_text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Failure::argument(format!("bad noise strength `{s}`"))))
        .collect::<Result<_, _>>()?;
    let shots_text = a.shots.clone().or_else(|| config.get_str("shots").map(String::from)).unwrap_or("10000".into());
    let shots: Vec<u64> =
        shots_text.split(',').map(parse_count).collect::<Result<_, _>>().map_err(Failure::argument)?;
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(s) => {
            Some(s.trim().parse::<u64>().map_err(|_| Failure::argument(format!("{SEED_ENV}=`{s}` is not a seed")))?)
        }
        Err(_) => None,
    };
    let seed = match a.seed {
        Some(s) => s,
        None => config.get("seed")?.or(env_seed).unwrap_or(0),
    };
    let arity3 = match layered(a.arity3.clone(), config, "arity3", "depolarize".to_string())?.as_str() {
        "depolarize" => Arity3Policy::Depolarize,
        "decompose" => Arity3Policy::Decompose,
        other => return Err(Failure::argument(format!("unknown arity3 policy `{other}`"))),
    };
    let spec = BenchmarkSpec {
        protocol,
        ps,
        shots,
        seed,
        arity3,
        flip_data_measurements: layered(a.data_flips, config, "data_flips", true)?,
    };
    spec.validate()?;
    let out = a.out.clone().or_else(|| config.get_str("out").map(PathBuf::from));
    Ok((spec, out, config.get("threads")?))
}

/// Runs one parsed command, writing results to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<Exit, Failure> {
    let threads = cli.threads;
    if threads == Some(0) {
        return Err(Failure::argument("--threads must be at least 1"));
    }
    match cli.command {
        Command::Build(a) => {
            let c = build_circuit(&a)?;
            emit(out, a.out.as_deref(), &print_circuit(&c))?;
            Ok(Exit::Ok)
        }
        Command::VerifyUnitary(a) => {
            let word: LogicalWord =
                a.against[0].parse().map_err(|e: flagforge_core::ParseError| Failure::argument(e.message))?;
            let angle = parse_pi_fraction(&a.against[1]).map_err(Failure::argument)?;
            let c = read_circuit(&a.file)?;
            let f = verify_against(&c, &word, angle)?;
            let pass = f >= 1.0 - VERIFY_TOLERANCE;
            writeln!(
                out,
                "{} fidelity {f:.12} against exp(-i pi*{angle}/2 {word})",
                if pass { "pass" } else { "fail" }
            )
            .map_err(|e| Failure::argument(e.to_string()))?;
            Ok(if pass { Exit::Ok } else { Exit::VerificationFailed })
        }
        Command::FaultDistance(a) => {
            let c = read_circuit(&a.file)?;
            let engine = match a.engine {
                EngineChoice::Clifford => Engine::Clifford,
                EngineChoice::Dense => Engine::Dense,
                EngineChoice::Auto if c.is_clifford() => Engine::Clifford,
                EngineChoice::Auto => Engine::Dense,
            };
            let mode = match a.mode {
                ModeChoice::Full => CheckMode::Full,
                ModeChoice::Phase => CheckMode::PhaseOnly,
            };
            let r = fault_distance(&c, a.max_weight, engine, mode)?;
            let mut text = format!("{} ({} fault sites, engine {engine:?})\n", r.claim(), r.fault_sites);
            for (n, w) in r.witnesses.iter().take(MAX_SHOWN_WITNESSES).enumerate() {
                let faults: Vec<String> = w.faults.iter().map(|f| f.describe(&c)).collect();
                let names: Vec<&str> = w.observables_flipped.iter().map(|&o| r.observable_names[o].as_str()).collect();
                text.push_str(&format!("witness {n}: {} -> flips {}\n", faults.join(" + "), names.join(" ")));
            }
            if r.witnesses.len() > MAX_SHOWN_WITNESSES {
                text.push_str(&format!("... {} witnesses in total\n", r.witnesses.len()));
            }
            emit(out, None, &text)?;
            Ok(Exit::Ok)
        }
        Command::Sweep(a) => {
            let config = match &a.config {
                Some(p) => Config::parse(
                    &fs::read_to_string(p).map_err(|e| Failure::argument(format!("{}: {e}", p.display())))?,
                )?,
                None => Config::default(),
            };
            let (spec, path, config_threads) = spec_from(&a, &config)?;
            let result = run_sweep(&spec, threads.or(config_threads))?;
            let csv = write_csv(&result.points);
            emit(out, path.as_deref(), &csv)?;
            let summary = match &result.fit {
                Ok(f) => format!(
                    "slope {:.3} prefactor {:.3} residual {:.3} over {} points",
                    f.slope,
                    f.prefactor(),
                    f.residual,
                    f.points_used
                ),
                Err(e) => format!("no fit: {e}"),
            };
            if let Some(p) = &path {
                emit(out, None, &format!("wrote {} points to {}\n{summary}\n", result.points.len(), p.display()))?;
            } else {
                eprintln!("{summary}");
            }
            Ok(Exit::Ok)
        }
        Command::ParseCheck(a) => {
            let c = read_circuit(&a.file)?;
            let s = c.stats();
            let roles: Vec<String> = s.num_qubits_by_role.iter().map(|(r, n)| format!("{r}={n}")).collect();
            let text = format!(
                "ok: {} qubits ({}), {} instructions, {} gates ({} multi-qubit), depth {}, {} records, {} detectors, {} observables{}\n",
                c.num_qubits(),
                roles.join(" "),
                c.instructions().len(),
                s.gate_count,
                s.two_plus_qubit_gate_count,
                s.depth,
                c.num_records(),
                c.detectors().len(),
                c.observables().len(),
                if c.is_clifford() { ", Clifford" } else { "" }
            );
            emit(out, None, &text)?;
            Ok(Exit::Ok)
        }
    }
}

/// Entry point shared by the binary and tests: parses `args` and returns the exit status.
pub fn main_with(args: impl IntoIterator<Item = String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Argument as i32 } else { Exit::Ok as i32 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match run(cli, out) {
        Ok(code) => code as i32,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.exit as i32
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with(
            std::iter::once("flagforge".to_string()).chain(args.iter().map(|s| s.to_string())),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn counts_and_angles() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("250"), Ok(250));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert_eq!(parse_pi_fraction("1/4"), Ok(DyadicAngle::new(1, 2)));
        assert_eq!(parse_pi_fraction("1/2^3"), Ok(DyadicAngle::new(1, 3)));
        assert_eq!(parse_pi_fraction("0"), Ok(DyadicAngle::ZERO));
        assert_eq!(parse_pi_fraction("-3/8"), Ok(DyadicAngle::new(-3, 3)));
        assert!(parse_pi_fraction("1/3").is_err());
        assert_eq!(parse_bits("1.01"), Ok(vec![true, false, true]));
        assert!(parse_bits("10.1").is_err());
    }

    #[test]
    fn argument_errors_exit_two() {
        assert_eq!(run_args(&["build", "iceberg-rz", "--l", "0"]).0, 2);
        assert_eq!(run_args(&["build", "iceberg-rz"]).0, 2);
        assert_eq!(run_args(&["build", "iceberg-rz", "--l", "1", "--bogus"]).0, 2);
        assert_eq!(run_args(&["frobnicate"]).0, 2);
        assert_eq!(run_args(&["parse-check", "/nonexistent/file.circ"]).0, 2);
        assert_eq!(run_args(&["sweep", "--p", "0.5"]).0, 2);
        assert_eq!(run_args(&["sweep", "--p", "0.01", "--shots", "0"]).0, 2);
        assert_eq!(run_args(&["--help"]).0, 0);
    }

    #[test]
    fn build_prints_text() {
        let (code, out, _) = run_args(&["build", "iceberg-rz", "--i", "1", "--l", "2", "--k", "2"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("CODE iceberg 2\n"));
        assert!(parse_circuit(&out).is_ok());
    }
}
