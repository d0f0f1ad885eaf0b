use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Tail mass above which a truncated distribution is flagged.
pub const TAIL_TOLERANCE: f64 = 1e-9;

/// Default photon-number truncation.
pub const DEFAULT_NMAX: usize = 32;

/// Probabilities p_0 … p_nmax for one detection mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhotonNumberDistribution {
    probs: Vec<f64>,
    truncated: bool,
}

impl PhotonNumberDistribution {
    /// Wraps raw probabilities; the truncation flag is set when the missing
    /// mass exceeds [`TAIL_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty photon-number distribution".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Numeric("probabilities must be finite and non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::Numeric(format!("total probability {total} exceeds 1")));
        }
        Ok(Self {
            truncated: 1.0 - total > TAIL_TOLERANCE,
            probs,
        })
    }

    /// Builds a distribution while forcing the truncation flag.
    pub(crate) fn with_flag(probs: Vec<f64>, truncated: bool) -> Self {
        Self { probs, truncated }
    }

    /// Geometric distribution with mean `mean`.
    pub fn thermal(mean: f64, nmax: usize) -> Result<Self> {
        check_mean(mean)?;
        let q = mean / (1.0 + mean);
        let mut probs = Vec::with_capacity(nmax + 1);
        let mut p = 1.0 / (1.0 + mean);
        for _ in 0..=nmax {
            probs.push(p);
            p *= q;
        }
        let tail = q.powi(nmax as i32 + 1);
        Ok(Self::with_flag(probs, tail > TAIL_TOLERANCE))
    }

    pub fn poisson(mean: f64, nmax: usize) -> Result<Self> {
        check_mean(mean)?;
        let mut probs = Vec::with_capacity(nmax + 1);
        let mut p = (-mean).exp();
        for n in 0..=nmax {
            probs.push(p);
            p *= mean / (n + 1) as f64;
        }
        Self::new(probs)
    }

    /// p_n = 1 for a single n.
    pub fn fock(n: usize) -> Self {
        let mut probs = vec![0.0; n + 1];
        probs[n] = 1.0;
        Self::with_flag(probs, false)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn nmax(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probability mass missing beyond nmax.
    pub fn tail(&self) -> f64 {
        (1.0 - self.total()).max(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// Σ n(n−1) p_n.
    pub fn second_factorial_moment(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| (n * n.saturating_sub(1)) as f64 * p)
            .sum()
    }
}

fn check_mean(mean: f64) -> Result<()> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mean photon number must be ≥ 0, got {mean}"
        )));
    }
    Ok(())
}

/// g² = Σ n(n−1)p_n / (Σ n p_n)² evaluated on the stored probabilities.
pub fn g2_from_pn(pn: &PhotonNumberDistribution) -> Result<f64> {
    let mean = pn.mean();
    if !(mean > 0.0) {
        return Err(Error::Numeric("zero mean photon number".into()));
    }
    Ok(pn.second_factorial_moment() / (mean * mean))
}

/// Binomial thinning p'_m = Σ_{n≥m} p_n C(n,m) η^m (1−η)^{n−m}.
pub fn apply_binomial_loss(pn: &PhotonNumberDistribution, efficiency: f64) -> Result<PhotonNumberDistribution> {
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(Error::InvalidArgument(format!(
            "efficiency {efficiency} outside [0, 1]"
        )));
    }
    let nmax = pn.nmax();
    let mut out = vec![0.0; nmax + 1];
    let kernel = binomial_kernel(nmax, efficiency);
    for (n, p) in pn.probs.iter().enumerate() {
        if *p == 0.0 {
            continue;
        }
        for m in 0..=n {
            out[m] += p * kernel[n][m];
        }
    }
    Ok(PhotonNumberDistribution::with_flag(out, pn.truncated))
}

/// Rows n of P(m | n) = C(n,m) η^m (1−η)^{n−m}, built by the recurrence
/// P(·|n+1) = (1−η)P(·|n) + η P(·−1|n), which stays exact at η ∈ {0, 1}.
pub(crate) fn binomial_kernel(nmax: usize, eta: f64) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(nmax + 1);
    let mut row = vec![1.0];
    for _ in 0..=nmax {
        rows.push(row.clone());
        let mut next = vec![0.0; row.len() + 1];
        for (m, v) in row.iter().enumerate() {
            next[m] += (1.0 - eta) * v;
            next[m + 1] += eta * v;
        }
        row = next;
    }
    rows
}

/// Joint probabilities p_{n,m} over signal count n and idler count m.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPhotonNumberDistribution {
    probs: DMatrix<f64>,
    truncated: bool,
}

impl JointPhotonNumberDistribution {
    pub fn new(probs: DMatrix<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty joint distribution".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Numeric("probabilities must be finite and non-negative".into()));
        }
        let total = probs.sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::Numeric(format!("total probability {total} exceeds 1")));
        }
        Ok(Self {
            truncated: 1.0 - total > TAIL_TOLERANCE,
            probs,
        })
    }

    /// Diagonal distribution p_{n,n} = diag[n].
    pub(crate) fn diagonal(diag: &[f64], truncated: bool) -> Self {
        let n = diag.len();
        let probs = DMatrix::from_fn(n, n, |a, b| if a == b { diag[a] } else { 0.0 });
        Self { probs, truncated }
    }

    pub fn probs(&self) -> &DMatrix<f64> {
        &self.probs
    }

    pub fn get(&self, n: usize, m: usize) -> f64 {
        if n < self.probs.nrows() && m < self.probs.ncols() {
            self.probs[(n, m)]
        } else {
            0.0
        }
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn total(&self) -> f64 {
        self.probs.sum()
    }

    pub fn signal_marginal(&self) -> PhotonNumberDistribution {
        let p = self.probs.row_iter().map(|r| r.sum()).collect();
        PhotonNumberDistribution::with_flag(p, self.truncated)
    }

    pub fn idler_marginal(&self) -> PhotonNumberDistribution {
        let p = self.probs.column_iter().map(|c| c.sum()).collect();
        PhotonNumberDistribution::with_flag(p, self.truncated)
    }

    /// True when all mass sits on n = m.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        let off: f64 = self
            .probs
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx % self.probs.nrows() != idx / self.probs.nrows())
            .map(|(_, p)| *p)
            .sum();
        off <= tol
    }
}

/// ⟨n m⟩ / (⟨n⟩⟨m⟩) for two distinct modes.
pub fn g2_cross(joint: &JointPhotonNumberDistribution) -> Result<f64> {
    let p = &joint.probs;
    let mut cross = 0.0;
    let mut ns = 0.0;
    let mut ni = 0.0;
    for n in 0..p.nrows() {
        for m in 0..p.ncols() {
            let v = p[(n, m)];
            cross += (n * m) as f64 * v;
            ns += n as f64 * v;
            ni += m as f64 * v;
        }
    }
    if !(ns > 0.0 && ni > 0.0) {
        return Err(Error::Numeric("zero marginal mean".into()));
    }
    Ok(cross / (ns * ni))
}

/// Detected-count distribution of the signal port when a fraction `epsilon`
/// of the idler photons leaks into it (binomially, photon by photon).
pub fn signal_with_leakage(joint: &JointPhotonNumberDistribution, epsilon: f64) -> Result<PhotonNumberDistribution> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!("leakage {epsilon} outside [0, 1]")));
    }
    let p = &joint.probs;
    let kernel = binomial_kernel(p.ncols(), epsilon);
    let mut out = vec![0.0; p.nrows() + p.ncols()];
    for n in 0..p.nrows() {
        for m in 0..p.ncols() {
            let v = p[(n, m)];
            if v == 0.0 {
                continue;
            }
            for k in 0..=m {
                out[n + k] += v * kernel[m][k];
            }
        }
    }
    Ok(PhotonNumberDistribution::with_flag(out, joint.truncated))
}
