//! Monte Carlo over the torus `T^{MN}`: `∫χ^p = (1/N) E[tr(A(q)^p)]` with
//! `A(q) = q q*` the Gram matrix of the rows of a uniform phase matrix `q`.
//!
//! Sample `s` of a run with seed `σ` uses ChaCha8 keyed by `σ` on stream `s`,
//! so results do not depend on how samples are scheduled across threads.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, pairwise_sum, trace, unit_from_turns, CMat};
use crate::moments::MomentReport;

/// One Gram matrix and the RNG coordinates that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct GramSample {
    pub a: CMat,
    pub seed: u64,
    pub counter: u64,
}

fn sample_rng(seed: u64, counter: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(counter);
    rng
}

/// Draws `q ∈ T^{M×N}` with independent uniform phases and returns `A = q q*`.
pub fn sample_gram(m: usize, n: usize, seed: u64, counter: u64) -> Result<GramSample> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("M and N must be at least 1".into()));
    }
    let mut rng = sample_rng(seed, counter);
    let q = CMat::from_fn(m, n, |_, _| unit_from_turns(rng.random::<f64>()));
    Ok(GramSample {
        a: &q * q.adjoint(),
        seed,
        counter,
    })
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let count = values.len() as f64;
    let mean = pairwise_sum(values) / count;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (count - 1.0);
    (mean, (var / count).sqrt())
}

/// Estimates `∫χ^p` as `(1/N)·mean(Tr(A^p)/M)` with its standard error.
pub fn mc_moment(m: usize, n: usize, p: usize, samples: usize, seed: u64) -> Result<MomentReport> {
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    let started = Instant::now();
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let a = sample_gram(m, n, seed, s)?.a;
            let mut power = a.clone();
            for _ in 1..p {
                power = &power * &a;
            }
            Ok(trace(&power).re / (m * n) as f64)
        })
        .collect::<Result<_>>()?;
    let (value, stderr) = mean_and_stderr(&values);
    let mut report = MomentReport::new("montecarlo", p, value, stderr, started);
    report.model = Some(format!("torus(M={m}, N={n})"));
    report.samples = Some(samples);
    report.seed = Some(seed);
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub density: f64,
}

/// Pooled eigenvalues of `A/N` over all samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub m: usize,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub bins: Vec<HistogramBin>,
    pub mean_eigenvalue: f64,
    /// Sorted pooled eigenvalues.
    #[serde(skip)]
    pub eigenvalues: Vec<f64>,
    pub wall_time_ms: f64,
}

impl Spectrum {
    pub fn histogram_mass(&self) -> f64 {
        self.bins.iter().map(|b| b.density * (b.right - b.left)).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,density\n");
        for b in &self.bins {
            out.push_str(&format!("{},{},{}\n", b.left, b.right, b.density));
        }
        out
    }
}

pub fn mc_spectrum(m: usize, n: usize, samples: usize, seed: u64, bins: usize) -> Result<Spectrum> {
    if m < 2 {
        return Err(Error::InvalidArgument("spectra need M ≥ 2".into()));
    }
    if samples == 0 || bins == 0 {
        return Err(Error::InvalidArgument("samples and bins must be positive".into()));
    }
    let started = Instant::now();
    let per_sample: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let a = sample_gram(m, n, seed, s)?.a / Complex64::new(n as f64, 0.0);
            hermitian_eigenvalues(&a)
        })
        .collect::<Result<_>>()?;
    let mut eigenvalues: Vec<f64> = per_sample.into_iter().flatten().collect();
    let mean_eigenvalue = pairwise_sum(&eigenvalues) / eigenvalues.len() as f64;
    eigenvalues.sort_by(f64::total_cmp);

    let hi = eigenvalues.last().copied().unwrap_or(1.0).max(0.0) * (1.0 + 1e-12) + 1e-12;
    let lo = eigenvalues.first().copied().unwrap_or(0.0).min(0.0);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &eigenvalues {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = eigenvalues.len() as f64;
    let bins = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| HistogramBin {
            left: lo + k as f64 * width,
            right: lo + (k + 1) as f64 * width,
            density: c as f64 / (total * width),
        })
        .collect();
    Ok(Spectrum {
        m,
        n,
        samples,
        seed,
        bins,
        mean_eigenvalue,
        eigenvalues,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Kolmogorov–Smirnov distance between sorted samples and a CDF.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let n = sorted.len() as f64;
    let mut worst = 0.0f64;
    for (k, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        worst = worst.max((f - k as f64 / n).abs()).max(((k + 1) as f64 / n - f).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_defect;

    #[test]
    fn gram_diagonal_and_hermitian() {
        for counter in 0..5 {
            let s = sample_gram(4, 7, 11, counter).unwrap();
            assert!(hermitian_defect(&s.a) < 1e-12);
            for i in 0..4 {
                assert!((s.a[(i, i)] - Complex64::new(7.0, 0.0)).norm() < 1e-12);
            }
        }
        let one = sample_gram(1, 5, 0, 0).unwrap();
        assert_eq!(one.a.shape(), (1, 1));
        assert!((one.a[(0, 0)] - Complex64::new(5.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn off_diagonal_second_moment() {
        let n = 6;
        let vals: Vec<f64> = (0..10_000)
            .map(|s| sample_gram(2, n, 5, s).unwrap().a[(0, 1)].norm_sqr())
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!((mean / n as f64 - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn first_moment_is_exact() {
        let rep = mc_moment(3, 4, 1, 50, 1).unwrap();
        assert!((rep.value - 1.0).abs() < 1e-12);
        assert!(rep.uncertainty < 1e-12);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_moment(2, 2, 3, 4000, 9).unwrap().value)
        };
        assert_eq!(run(1).to_bits(), run(4).to_bits());
    }

    #[test]
    fn second_moment_z2_z2() {
        let rep = mc_moment(2, 2, 2, 20_000, 3).unwrap();
        assert!((rep.value - 3.0).abs() < 4.0 * rep.uncertainty, "{rep:?}");
        let other = mc_moment(2, 2, 2, 20_000, 4).unwrap();
        assert_ne!(rep.value, other.value);
        let joint = (rep.uncertainty.powi(2) + other.uncertainty.powi(2)).sqrt();
        assert!((rep.value - other.value).abs() < 4.0 * joint);
    }

    #[test]
    fn spectrum_is_normalized() {
        let s = mc_spectrum(8, 16, 40, 2, 30).unwrap();
        assert!((s.histogram_mass() - 1.0).abs() < 1e-12);
        assert!((s.mean_eigenvalue - 1.0).abs() < 1e-12);
        assert_eq!(s.eigenvalues.len(), 8 * 40);
        assert!(s.to_csv().starts_with("bin_left,bin_right,density\n"));
    }

    #[test]
    fn ks_against_uniform() {
        let xs: Vec<f64> = (0..100).map(|k| (k as f64 + 0.5) / 100.0).collect();
        let d = ks_distance(&xs, |x| Ok(x.clamp(0.0, 1.0))).unwrap();
        assert!((d - 0.005).abs() < 1e-12);
    }
}
