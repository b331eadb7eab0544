//! Monte Carlo reference: Gaussian batches, truncated path synthesis,
//! left-point and midpoint Riemann–Stieltjes sums, and statistical comparison
//! with chaos-space results.
//!
//! Sample `i` of seed `s` is drawn from ChaCha8 stream `i` keyed by `s`, so a
//! batch does not depend on thread count or scheduling.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::ChaosExpansion;
use crate::error::{ChaosError, Result};
use crate::function_space::{Basis, QuadratureRule};
use crate::kernel::{m_tilde_all, white_noise_factor, KernelSpec};

/// Key mixed into the seed of the auxiliary streams used by [`BrownianCompletion`].
const COMPLEMENT_KEY: u64 = 0x9e37_79b9_7f4a_7c15;

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `count` standard normals from stream `index` of `seed`.
pub fn standard_normals(seed: u64, index: u64, count: usize) -> Vec<f64> {
    let mut rng = stream(seed, index);
    (0..count).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Sample mean and the standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `n × K` iid standard normals; row `i` realizes `(ξ_1, …, ξ_K)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    seed: u64,
    n_samples: usize,
    modes: usize,
    z: Vec<f64>,
}

pub fn sample_batch(seed: u64, n: usize, modes: usize) -> Result<SampleBatch> {
    if n == 0 || modes == 0 {
        return Err(ChaosError::Config(format!("a batch needs n ≥ 1 and K ≥ 1, got n = {n}, K = {modes}")));
    }
    let mut z = vec![0.0; n * modes];
    z.par_chunks_mut(modes).enumerate().for_each(|(i, row)| {
        let mut rng = stream(seed, i as u64);
        for v in row.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
    });
    Ok(SampleBatch {
        seed,
        n_samples: n,
        modes,
        z,
    })
}

impl SampleBatch {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.z[i * self.modes..(i + 1) * self.modes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.z.chunks(self.modes)
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows().map(|r| r[k]).collect()
    }

    /// Applies `f` to every row in parallel, keeping row order.
    pub fn map_rows<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(usize, &[f64]) -> f64 + Sync,
    {
        self.z
            .par_chunks(self.modes)
            .enumerate()
            .map(|(i, r)| f(i, r))
            .collect()
    }

    /// Column means within `4/√n` of 0 and variances within `4√(2/n)` of 1.
    pub fn sanity_check(&self) -> Result<()> {
        let n = self.n_samples as f64;
        for k in 0..self.modes {
            let col = self.column(k);
            let (mean, se) = mean_and_stderr(&col);
            let var = se * se * n;
            if mean.abs() > 4.0 / n.sqrt() || (var - 1.0).abs() > 4.0 * (2.0 / n).sqrt() {
                return Err(ChaosError::Config(format!(
                    "column {} fails the sanity gate: mean {mean}, variance {var}",
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

/// A real path sampled on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

fn check_grids(x: &Path, y: &Path) -> Result<()> {
    if x.times != y.times || x.values.len() != x.times.len() || y.values.len() != y.times.len() {
        return Err(ChaosError::Dimension("paths are not sampled on the same grid".into()));
    }
    Ok(())
}

/// `Σ X(t_i)(Y(t_{i+1}) − Y(t_i))`.
pub fn discrete_ito(x: &Path, y: &Path) -> Result<f64> {
    check_grids(x, y)?;
    let terms: Vec<f64> = x
        .values
        .iter()
        .zip(y.values.windows(2))
        .map(|(xv, w)| xv * (w[1] - w[0]))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `Σ ½(X(t_i) + X(t_{i+1}))(Y(t_{i+1}) − Y(t_i))`.
pub fn discrete_strat(x: &Path, y: &Path) -> Result<f64> {
    check_grids(x, y)?;
    let terms: Vec<f64> = x
        .values
        .windows(2)
        .zip(y.values.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[0] + xw[1]) * (yw[1] - yw[0]))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Precomputed `M̃_k(t_i)` on a uniform grid; paths are `X(t_i) = Σ_k M̃_k(t_i) z_k`.
#[derive(Clone, Debug)]
pub struct PathSynthesizer {
    times: Vec<f64>,
    m_tilde: Vec<Vec<f64>>,
}

impl PathSynthesizer {
    pub fn new(kernel: &KernelSpec, basis: &Basis, modes: usize, grid: usize, rule: &QuadratureRule) -> Result<Self> {
        if grid == 0 {
            return Err(ChaosError::Config("time grid needs at least one step".into()));
        }
        let times: Vec<f64> = (0..=grid).map(|i| basis.horizon * i as f64 / grid as f64).collect();
        let m_tilde = times
            .par_iter()
            .map(|&t| m_tilde_all(kernel, basis, modes, t, rule))
            .collect();
        Ok(Self { times, m_tilde })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `M̃(t_i)` for every grid point.
    pub fn m_tilde(&self) -> &[Vec<f64>] {
        &self.m_tilde
    }

    pub fn path(&self, z: &[f64]) -> Path {
        let values = self
            .m_tilde
            .iter()
            .map(|m| m.iter().zip(z).map(|(a, b)| a * b).sum())
            .collect();
        Path {
            times: self.times.clone(),
            values,
        }
    }
}

/// `X(t_i) = Σ_{k≤K} M̃_k(t_i) z_k` on `grid + 1` uniform points of `[0, T]`.
pub fn synthesize_path(
    kernel: &KernelSpec,
    basis: &Basis,
    modes: usize,
    z: &[f64],
    grid: usize,
    rule: &QuadratureRule,
) -> Result<Path> {
    if z.len() < modes {
        return Err(ChaosError::Dimension(format!("sample has {} coordinates, need {modes}", z.len())));
    }
    Ok(PathSynthesizer::new(kernel, basis, modes, grid, rule)?.path(&z[..modes]))
}

/// Brownian grid paths whose projection on `m_1, …, m_K` is driven by the
/// batch row and whose orthogonal remainder is sampled independently.
///
/// With increments `φ_ik = M_k(t_{i+1}) − M_k(t_i)` the remainder has
/// covariance `h I − Φ Φᵀ`, so the full increments are iid `N(0, h)` while
/// `X(T)` stays a function of `z` whenever `s_K = T`.
#[derive(Clone, Debug)]
pub struct BrownianCompletion {
    seed: u64,
    times: Vec<f64>,
    phi: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl BrownianCompletion {
    pub fn new(basis: &Basis, modes: usize, grid: usize, seed: u64) -> Result<Self> {
        if grid == 0 {
            return Err(ChaosError::Config("time grid needs at least one step".into()));
        }
        let times: Vec<f64> = (0..=grid).map(|i| basis.horizon * i as f64 / grid as f64).collect();
        let anti: Vec<Vec<f64>> = times.iter().map(|&t| basis.antiderivs(modes, t)).collect();
        let phi = DMatrix::from_fn(grid, modes, |i, k| anti[i + 1][k] - anti[i][k]);
        let h = basis.horizon / grid as f64;
        let cov = DMatrix::identity(grid, grid) * h - &phi * phi.transpose();
        let factor = white_noise_factor(&cov);
        Ok(Self {
            seed: seed ^ COMPLEMENT_KEY,
            times,
            phi,
            factor,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// The path for batch row `index` with mode coordinates `z`.
    pub fn path(&self, index: usize, z: &[f64]) -> Path {
        let extra = DVector::from_vec(standard_normals(self.seed, index as u64, self.factor.ncols()));
        let zv = DVector::from_column_slice(&z[..self.phi.ncols()]);
        let inc = &self.phi * zv + &self.factor * extra;
        let mut values = Vec::with_capacity(self.times.len());
        let mut acc = 0.0;
        values.push(acc);
        for d in inc.iter() {
            acc += d;
            values.push(acc);
        }
        Path {
            times: self.times.clone(),
            values,
        }
    }
}

/// Outcome of a chaos-versus-sampling comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    /// Mean of `F(z_i) − oracle_i`.
    pub statistic: f64,
    pub stderr: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
    pub n: usize,
}

/// Agreement below this multiple of the oracle scale counts as exact.
const ROUNDING_FLOOR: f64 = 1e-12;

/// Compares `F` evaluated on each batch row against per-sample oracle values;
/// passes when the mean difference is within three standard errors.
pub fn mc_compare(f: &ChaosExpansion, oracle: &[f64], batch: &SampleBatch) -> Result<McReport> {
    if oracle.len() != batch.n_samples() {
        return Err(ChaosError::Dimension(format!(
            "{} oracle values for {} samples",
            oracle.len(),
            batch.n_samples()
        )));
    }
    if batch.modes() < f.truncation().modes {
        return Err(ChaosError::Dimension(format!(
            "batch has {} modes, expansion uses {}",
            batch.modes(),
            f.truncation().modes
        )));
    }
    let values = batch.map_rows(|_, z| f.eval(z).expect("row length checked"));
    let diffs: Vec<f64> = values.iter().zip(oracle).map(|(a, b)| a - b).collect();
    let (statistic, stderr) = mean_and_stderr(&diffs);
    let scale: Vec<f64> = oracle.iter().map(|v| v.abs()).collect();
    let floor = ROUNDING_FLOOR * (pairwise_sum(&scale) / oracle.len() as f64).max(1.0);
    let tolerance = (3.0 * stderr).max(floor);
    Ok(McReport {
        statistic,
        stderr,
        tolerance,
        pass: statistic.abs() <= tolerance,
        seed: batch.seed(),
        n: batch.n_samples(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::Truncation;

    #[test]
    fn batches_are_reproducible() {
        let a = sample_batch(7, 100, 3).unwrap();
        let b = sample_batch(7, 100, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_batch(8, 100, 3).unwrap());
        assert!(sample_batch(7, 0, 3).is_err());
        assert!(sample_batch(7, 1, 0).is_err());
        // Rows do not depend on the batch size.
        let c = sample_batch(7, 10, 3).unwrap();
        assert_eq!(c.row(9), a.row(9));
    }

    #[test]
    fn pairwise_sum_is_accurate() {
        let xs = vec![0.1; 1000];
        assert!((pairwise_sum(&xs) - 100.0).abs() < 1e-12);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn discrete_sums() {
        let times = vec![0.0, 0.5, 1.0];
        let y = Path {
            times: times.clone(),
            values: vec![0.0, 1.0, 3.0],
        };
        let c = Path {
            times: times.clone(),
            values: vec![2.0; 3],
        };
        assert_eq!(discrete_ito(&c, &y).unwrap(), 6.0);
        assert_eq!(discrete_strat(&c, &y).unwrap(), 6.0);
        assert_eq!(discrete_ito(&y, &y).unwrap(), 2.0);
        assert_eq!(discrete_strat(&y, &y).unwrap(), 4.5);
        let other = Path {
            times: vec![0.0, 1.0],
            values: vec![0.0, 1.0],
        };
        assert!(discrete_ito(&y, &other).is_err());
    }

    #[test]
    fn zero_sample_gives_zero_path() {
        let basis = Basis::cosine(1.0).unwrap();
        let rule = QuadratureRule::default();
        let p = synthesize_path(&KernelSpec::Brownian, &basis, 4, &[0.0; 4], 8, &rule).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
        assert_eq!(p.times.len(), 9);
    }

    #[test]
    fn completion_has_brownian_increments() {
        let basis = Basis::cosine(1.0).unwrap();
        let bc = BrownianCompletion::new(&basis, 4, 16, 3).unwrap();
        let h = 1.0 / 16.0;
        let cov = &bc.phi * bc.phi.transpose() + &bc.factor * bc.factor.transpose();
        assert!((cov - DMatrix::identity(16, 16) * h).abs().max() < 1e-12);
        // s_K = T, so the endpoint is carried by z alone.
        let z = [0.3, -1.2, 0.5, 2.0];
        let p = bc.path(0, &z);
        assert!((p.values[16] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn constant_comparison_is_exact() {
        let batch = sample_batch(1, 50, 2).unwrap();
        let f = ChaosExpansion::constant(Truncation::new(2, 2), 1.5);
        let r = mc_compare(&f, &[1.5; 50], &batch).unwrap();
        assert!(r.pass);
        assert_eq!(r.statistic, 0.0);
        assert!(mc_compare(&f, &[1.5; 49], &batch).is_err());
    }
}
