//! Robust statistics, weighted moments and multivariate normal utilities.

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::rng::RngStream;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn total_cmp(a: &f64, b: &f64) -> core::cmp::Ordering {
    a.total_cmp(b)
}

fn ensure_finite(values: &[f64], context: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context))
    }
}

/// Median of `values`, reordering them in place. Even lengths average the two
/// central order statistics.
pub fn median_in_place(values: &mut [f64]) -> Result<f64> {
    let n = values.len();
    if n == 0 {
        return Err(Error::Empty("median"));
    }
    let (lower, upper_mid, _) = values.select_nth_unstable_by(n / 2, total_cmp);
    let upper_mid = *upper_mid;
    if n % 2 == 1 {
        Ok(upper_mid)
    } else {
        let lower_mid = lower.iter().copied().max_by(total_cmp).unwrap_or(upper_mid);
        Ok(0.5 * (lower_mid + upper_mid))
    }
}

/// Raw median absolute deviation, `median(|x - median(x)|)`.
pub fn mad(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("mad"));
    }
    ensure_finite(samples, "mad")?;
    let mut buf = samples.to_vec();
    let centre = median_in_place(&mut buf)?;
    for v in buf.iter_mut() {
        *v = libm::fabs(*v - centre);
    }
    median_in_place(&mut buf)
}

/// Per-column MAD of a set of equal-length vectors.
pub fn column_mads(rows: &[Vec<f64>], dim: usize) -> Result<Vec<f64>> {
    if rows.is_empty() {
        return Err(Error::Empty("column_mads"));
    }
    let mut column = Vec::with_capacity(rows.len());
    (0..dim)
        .map(|j| {
            column.clear();
            for row in rows {
                check_dim("summary vector", dim, row.len())?;
                column.push(row[j]);
            }
            mad(&column)
        })
        .collect()
}

/// `ceil(x)` that absorbs floating-point noise when `x` is within a few ulps
/// of an integer, so that e.g. `3 / 0.1` rounds to 30 rather than 31.
pub fn robust_ceil(x: f64) -> f64 {
    let r = libm::round(x);
    if libm::fabs(x - r) <= 1e-9 * libm::fabs(r).max(1.0) {
        r
    } else {
        libm::ceil(x)
    }
}

/// Lower empirical quantile: the `ceil(alpha * n)`-th smallest value.
pub fn empirical_quantile(values: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "quantile level must lie in (0, 1], got {alpha}"
        )));
    }
    let n = values.len();
    if n == 0 {
        return Err(Error::Empty("empirical_quantile"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("empirical_quantile"));
    }
    let rank = (robust_ceil(alpha * n as f64) as usize).clamp(1, n);
    let mut buf = values.to_vec();
    let (_, kth, _) = buf.select_nth_unstable_by(rank - 1, total_cmp);
    Ok(*kth)
}

/// Vectors with non-negative weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSample {
    values: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl WeightedSample {
    pub fn new(values: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        check_dim("weights", values.len(), weights.len())?;
        let first = values.first().ok_or(Error::Empty("weighted sample"))?;
        let dim = first.len();
        for v in &values {
            check_dim("weighted sample", dim, v.len())?;
            ensure_finite(v, "weighted sample")?;
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and non-negative".into()));
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(Error::ZeroWeights);
        }
        Ok(Self { values, weights })
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Weighted mean and normalized (biased) weighted covariance.
pub fn weighted_mean_cov(sample: &WeightedSample) -> (Vec<f64>, Matrix) {
    let n = sample.dim();
    let total: f64 = sample.weights.iter().sum();
    let mut mean = alloc::vec![0.0; n];
    for (v, w) in sample.values.iter().zip(&sample.weights) {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += w * x;
        }
    }
    for m in mean.iter_mut() {
        *m /= total;
    }
    let mut cov = Matrix::zeros(n);
    for (v, w) in sample.values.iter().zip(&sample.weights) {
        if *w == 0.0 {
            continue;
        }
        for i in 0..n {
            let di = v[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += w * di * (v[j] - mean[j]);
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let c = cov[(i, j)] / total;
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }
    (mean, cov)
}

fn standard_normals(dim: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// One draw from `N(mean, cov)`. Semi-definite covariances are sampled along
/// their range; a zero covariance returns `mean` exactly.
pub fn mvn_sample(mean: &[f64], cov: &Matrix, rng: &mut RngStream) -> Result<Vec<f64>> {
    check_dim("mvn covariance", mean.len(), cov.dim())?;
    let factor = match Cholesky::semidefinite(cov) {
        Some(f) => f,
        None => Cholesky::regularized(cov)?,
    };
    let z = standard_normals(mean.len(), rng);
    Ok(mean.iter().zip(factor.mul_vec(&z)).map(|(m, x)| m + x).collect())
}

/// Density of `N(mean, cov)` at `x`.
pub fn mvn_density(x: &[f64], mean: &[f64], cov: &Matrix) -> Result<f64> {
    check_dim("mvn point", mean.len(), x.len())?;
    let gaussian = Gaussian::new(cov)?;
    check_dim("mvn covariance", mean.len(), gaussian.dim())?;
    let diff: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    Ok(libm::exp(gaussian.log_density_offset(&diff)))
}

/// A centred Gaussian with a fixed (regularized) covariance factor, reused for
/// many draws and density evaluations.
#[derive(Clone, Debug)]
pub struct Gaussian {
    factor: Cholesky,
    log_norm: f64,
}

impl Gaussian {
    pub fn new(cov: &Matrix) -> Result<Self> {
        let factor = Cholesky::regularized(cov)?;
        let log_norm = -0.5 * (cov.dim() as f64 * LN_2PI + factor.log_det());
        Ok(Self { factor, log_norm })
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// `L^{-1} x` for the covariance factor `L`.
    pub fn whiten(&self, x: &[f64]) -> Vec<f64> {
        self.factor.solve_lower(x)
    }

    pub fn sample_offset(&self, rng: &mut RngStream) -> Vec<f64> {
        let z = standard_normals(self.dim(), rng);
        self.factor.mul_vec(&z)
    }

    pub fn log_density_offset(&self, diff: &[f64]) -> f64 {
        let y = self.whiten(diff);
        let q: f64 = y.iter().map(|v| v * v).sum();
        self.log_norm - 0.5 * q
    }
}

/// Standard normal quantile function.
///
/// Acklam's rational approximation followed by one Halley step against
/// `erfc`, which brings the absolute error well below 1e-9.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "normal quantile needs p in (0, 1), got {p}"
        )));
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail(libm::sqrt(-2.0 * libm::log(p)))
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail(libm::sqrt(-2.0 * libm::log1p(-p)))
    };

    // Halley refinement
    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(0.5 * x * x);
    Ok(x - u / (1.0 + 0.5 * x * u))
}
