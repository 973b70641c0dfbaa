//! Parallel Monte Carlo sweeps over the noise strength.

use flagforge_core::harness::{fit_scaling, Benchmark, BenchmarkSpec, CurvePoint, Sampler, ScalingFit, Tally};
use flagforge_core::Error;
use rayon::prelude::*;

/// Shots per work item. Fixed so the split does not depend on the thread count.
pub const CHUNK: u64 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub points: Vec<CurvePoint>,
    /// The fit, or why there is none.
    pub fit: Result<ScalingFit, String>,
}

/// Runs every point of `spec`. Shot `s` at point `i` uses seed `shot_seed(spec.seed, i, s)`, so
/// the result depends only on the spec.
pub fn run_sweep(spec: &BenchmarkSpec, threads: Option<usize>) -> Result<SweepResult, Error> {
    spec.validate()?;
    let bench = Benchmark::from_protocol(&spec.protocol)?.for_noise(spec.arity3);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::ResourceLimit(e.to_string()))?;
    pool.install(|| {
        let sampler = Sampler::new(&bench, spec.flip_data_measurements)?;
        let mut points = Vec::with_capacity(spec.ps.len());
        for (i, &p) in spec.ps.iter().enumerate() {
            let shots = spec.shots_at(i);
            let tally = (0..shots.div_ceil(CHUNK))
                .into_par_iter()
                .map(|c| sampler.run(p, spec.seed, i as u64, c * CHUNK..((c + 1) * CHUNK).min(shots)))
                .try_reduce(Tally::default, |mut a, b| {
                    a.merge(&b);
                    Ok(a)
                })?;
            points.push(CurvePoint::from_tally(&bench, p, &tally));
        }
        let fit = fit_scaling(&points).map_err(|e| e.to_string());
        Ok(SweepResult { points, fit })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use flagforge_core::harness::Protocol;

    #[test]
    fn thread_count_does_not_matter() {
        let spec = BenchmarkSpec::new(Protocol::iceberg(1, 1, 2), vec![0.01, 0.05], 9000, 3);
        let a = run_sweep(&spec, Some(1)).unwrap();
        let b = run_sweep(&spec, Some(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.points[0].shots, 9000);
        assert!(a.points[1].accepted < a.points[0].accepted);
    }

    #[test]
    fn rejects_empty_shots() {
        let spec = BenchmarkSpec::new(Protocol::iceberg(1, 1, 2), vec![0.01], 0, 3);
        assert!(run_sweep(&spec, Some(1)).is_err());
    }

    #[test]
    fn acceptance_falls_with_p() {
        for protocol in [Protocol::iceberg(1, 2, 2), Protocol::SteaneStatePrep { l: 1 }] {
            let spec = BenchmarkSpec::new(protocol, vec![0.002, 0.005, 0.01, 0.02, 0.05], 20_000, 8);
            let r = run_sweep(&spec, None).unwrap();
            for w in r.points.windows(2) {
                let (a, b) = (w[0].acceptance(), w[1].acceptance());
                let sd = (a * (1.0 - a) / w[0].shots as f64 + b * (1.0 - b) / w[1].shots as f64).sqrt();
                assert!(b <= a + 3.0 * sd, "{} at p={}: {a} then {b}", w[0].protocol, w[1].p);
            }
        }
    }

    #[test]
    fn noiseless_points_are_exact() {
        for protocol in [Protocol::iceberg(1, 3, 2), Protocol::SteaneStatePrep { l: 3 }] {
            let bench = Benchmark::from_protocol(&protocol).unwrap();
            let t = Sampler::new(&bench, true).unwrap().run(0.0, 1, 0, 0..500).unwrap();
            assert_eq!((t.accepted, t.errors), (500, 0));
            assert!(t.infidelity_moments().0 < 1e-10);
        }
    }
}
