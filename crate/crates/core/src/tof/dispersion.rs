use nalgebra::{DMatrix, DVector, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Expansion point of the group-delay polynomial (nm).
pub const REFERENCE_WAVELENGTH_NM: f64 = 1319.0;

/// Design-matrix scaling; keeps the normal equations well conditioned.
const X_SCALE_NM: f64 = 100.0;

/// Two-sided 95 % normal quantile used for confidence intervals.
const Z95: f64 = 1.959_963_984_540_054;

/// Monotone half of the folded delay curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    AboveFold,
    BelowFold,
}

/// Cubic group delay τ(λ) = Σ c_k (λ − λ_ref)^k in ps with λ in nm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionModel {
    pub reference_nm: f64,
    pub coeffs: [f64; 4],
    pub zero_dispersion_nm: f64,
    /// 1σ uncertainty of the zero-dispersion wavelength from the fit.
    pub zero_dispersion_sigma_nm: f64,
    pub range_nm: (f64, f64),
    pub residual_rms_ps: f64,
    pub n_points: usize,
}

impl DispersionModel {
    /// Builds a model from coefficients and locates its fold point.
    pub fn from_coeffs(reference_nm: f64, coeffs: [f64; 4], range_nm: (f64, f64)) -> Result<Self> {
        if !(range_nm.0 < range_nm.1) || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Fit("invalid coefficients or range".into()));
        }
        let lambda0 = fold_point(reference_nm, &coeffs, range_nm)?;
        let m = Self {
            reference_nm,
            coeffs,
            zero_dispersion_nm: lambda0,
            zero_dispersion_sigma_nm: 0.0,
            range_nm,
            residual_rms_ps: 0.0,
            n_points: 0,
        };
        m.check_convex()?;
        Ok(m)
    }

    /// Signal-path model: fold at 1319 nm and 24.4 ps/nm at 1570 nm.
    pub fn signal_path() -> Self {
        Self::preset(24.4)
    }

    /// Idler-path model: fold at 1319 nm and 23.6 ps/nm at 1570 nm.
    pub fn idler_path() -> Self {
        Self::preset(23.6)
    }

    fn preset(dispersion_at_1570: f64) -> Self {
        // τ = c0 + c2 x² + c3 x³ has its fold at the reference; c3 sets D(1570).
        let c0 = 6.35e6;
        let c2 = 0.0598;
        let x = 1570.0 - REFERENCE_WAVELENGTH_NM;
        let c3 = (dispersion_at_1570 - 2.0 * c2 * x) / (3.0 * x * x);
        Self::from_coeffs(REFERENCE_WAVELENGTH_NM, [c0, 0.0, c2, c3], (1100.0, 1800.0))
            .expect("preset dispersion model is valid")
    }

    fn x(&self, lambda_nm: f64) -> f64 {
        lambda_nm - self.reference_nm
    }

    fn eval(&self, lambda_nm: f64) -> f64 {
        let x = self.x(lambda_nm);
        let c = &self.coeffs;
        c[0] + x * (c[1] + x * (c[2] + x * c[3]))
    }

    /// Local dispersion dτ/dλ in ps/nm.
    pub fn local_dispersion(&self, lambda_nm: f64) -> f64 {
        let x = self.x(lambda_nm);
        let c = &self.coeffs;
        c[1] + x * (2.0 * c[2] + 3.0 * x * c[3])
    }

    fn curvature(&self, lambda_nm: f64) -> f64 {
        2.0 * self.coeffs[2] + 6.0 * self.coeffs[3] * self.x(lambda_nm)
    }

    fn check_convex(&self) -> Result<()> {
        let (a, b) = self.range_nm;
        if self.curvature(a) <= 0.0 || self.curvature(b) <= 0.0 {
            return Err(Error::Fit("group delay is not convex on the valid range".into()));
        }
        Ok(())
    }

    pub fn contains(&self, lambda_nm: f64) -> bool {
        lambda_nm >= self.range_nm.0 && lambda_nm <= self.range_nm.1
    }

    /// Group delay (ps) of light at `lambda_nm`.
    pub fn wavelength_to_delay(&self, lambda_nm: f64) -> Result<f64> {
        if !self.contains(lambda_nm) {
            return Err(Error::Range {
                value: lambda_nm,
                min: self.range_nm.0,
                max: self.range_nm.1,
            });
        }
        Ok(self.eval(lambda_nm))
    }

    pub fn min_delay(&self) -> f64 {
        self.eval(self.zero_dispersion_nm)
    }

    /// τ(λ) − τ(λ0) in factored form, free of cancellation against c0.
    pub fn delay_above_minimum(&self, lambda_nm: f64) -> f64 {
        let (x, x0) = (self.x(lambda_nm), self.x(self.zero_dispersion_nm));
        let c = &self.coeffs;
        (x - x0) * (c[1] + c[2] * (x + x0) + c[3] * (x * x + x * x0 + x0 * x0))
    }

    /// Inverts the delay on one branch by bisection.
    pub fn delay_to_wavelength(&self, delay_ps: f64, branch: Branch) -> Result<f64> {
        let floor = self.min_delay();
        if delay_ps < floor - 1e-9 {
            return Err(Error::UnphysicalDelay {
                delay_ps,
                min_ps: floor,
            });
        }
        let (mut lo, mut hi) = match branch {
            Branch::AboveFold => (self.zero_dispersion_nm, self.range_nm.1),
            Branch::BelowFold => (self.range_nm.0, self.zero_dispersion_nm),
        };
        let end = match branch {
            Branch::AboveFold => hi,
            Branch::BelowFold => lo,
        };
        if delay_ps > self.eval(end) {
            return Err(Error::Range {
                value: delay_ps,
                min: floor,
                max: self.eval(end),
            });
        }
        let target = delay_ps - floor;
        if target <= 0.0 {
            return Ok(self.zero_dispersion_nm);
        }
        // f is increasing in λ on the upper branch and decreasing below.
        let rising = branch == Branch::AboveFold;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let above = self.delay_above_minimum(mid) > target;
            if above == rising {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-10 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// 95 % confidence half-width of the zero-dispersion wavelength.
    pub fn zero_dispersion_ci95_nm(&self) -> f64 {
        Z95 * self.zero_dispersion_sigma_nm
    }

    pub fn to_key_value(&self) -> String {
        let c = &self.coeffs;
        format!(
            "reference_nm = {}\nc0_ps = {:e}\nc1_ps_per_nm = {:e}\nc2_ps_per_nm2 = {:e}\nc3_ps_per_nm3 = {:e}\n\
             zero_dispersion_nm = {}\nzero_dispersion_sigma_nm = {:e}\nrange_min_nm = {}\nrange_max_nm = {}\n\
             residual_rms_ps = {:e}\nn_points = {}\n",
            self.reference_nm,
            c[0],
            c[1],
            c[2],
            c[3],
            self.zero_dispersion_nm,
            self.zero_dispersion_sigma_nm,
            self.range_nm.0,
            self.range_nm.1,
            self.residual_rms_ps,
            self.n_points
        )
    }

    pub fn from_key_value(text: &str) -> Result<Self> {
        let mut map = std::collections::HashMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::config(line, "expected `key = value`"))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |key: &str| -> Result<f64> {
            map.get(key)
                .ok_or_else(|| Error::config(key, "missing"))?
                .parse::<f64>()
                .map_err(|e| Error::config(key, e.to_string()))
        };
        let mut m = Self::from_coeffs(
            get("reference_nm")?,
            [
                get("c0_ps")?,
                get("c1_ps_per_nm")?,
                get("c2_ps_per_nm2")?,
                get("c3_ps_per_nm3")?,
            ],
            (get("range_min_nm")?, get("range_max_nm")?),
        )?;
        m.zero_dispersion_sigma_nm = get("zero_dispersion_sigma_nm").unwrap_or(0.0);
        m.residual_rms_ps = get("residual_rms_ps").unwrap_or(0.0);
        m.n_points = get("n_points").map(|v| v as usize).unwrap_or(0);
        Ok(m)
    }
}

/// Root of the derivative inside `range` where the curve has a minimum.
fn fold_point(reference: f64, c: &[f64; 4], range: (f64, f64)) -> Result<f64> {
    // D(x) = c1 + 2c2 x + 3c3 x².
    let (a, b, cc) = (3.0 * c[3], 2.0 * c[2], c[1]);
    let mut roots = Vec::new();
    if a.abs() < 1e-300 {
        if b.abs() > 0.0 {
            roots.push(-cc / b);
        }
    } else {
        let disc = b * b - 4.0 * a * cc;
        if disc >= 0.0 {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            if q != 0.0 {
                roots.push(q / a);
                roots.push(cc / q);
            } else {
                roots.push(0.0);
            }
        }
    }
    roots
        .into_iter()
        .map(|x| x + reference)
        .filter(|l| *l >= range.0 && *l <= range.1)
        .find(|l| 2.0 * c[2] + 6.0 * c[3] * (l - reference) > 0.0)
        .ok_or(Error::NoFold)
}

/// Unweighted least-squares cubic fit of (wavelength nm, delay ps) points,
/// expanded about 1319 nm.
pub fn fit_dispersion(points: &[(f64, f64)]) -> Result<DispersionModel> {
    if points.len() < 5 {
        return Err(Error::Fit(format!("need at least 5 points, got {}", points.len())));
    }
    if points.iter().any(|(l, t)| !l.is_finite() || !t.is_finite()) {
        return Err(Error::Fit("non-finite calibration point".into()));
    }
    let n = points.len();
    let reference = REFERENCE_WAVELENGTH_NM;
    let design = DMatrix::from_fn(n, 4, |r, k| ((points[r].0 - reference) / X_SCALE_NM).powi(k as i32));
    let y = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    if sv.min() <= 1e-12 * smax {
        return Err(Error::Fit("rank-deficient design matrix".into()));
    }
    let beta = svd.solve(&y, 1e-14 * smax).map_err(|e| Error::Fit(e.to_string()))?;
    let resid = &y - &design * &beta;
    let rss = resid.norm_squared();
    let scale = [1.0, X_SCALE_NM, X_SCALE_NM.powi(2), X_SCALE_NM.powi(3)];
    let coeffs = [
        beta[0] / scale[0],
        beta[1] / scale[1],
        beta[2] / scale[2],
        beta[3] / scale[3],
    ];
    let span = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let lambda0 = fold_point(reference, &coeffs, span)?;

    // Delta-method uncertainty of λ0 from the coefficient covariance.
    let dof = n.saturating_sub(4).max(1) as f64;
    let s2 = rss / dof;
    let xtx: Matrix4<f64> = (design.transpose() * &design).fixed_view::<4, 4>(0, 0).into();
    let cov_beta = xtx
        .try_inverse()
        .ok_or_else(|| Error::Fit("singular normal matrix".into()))?
        * s2;
    let u = (lambda0 - reference) / X_SCALE_NM;
    // D in scaled units: β1 + 2β2 u + 3β3 u²; ∂λ0/∂β = −(∂D/∂β)/(∂D/∂u)·scale.
    let dd_du = 2.0 * beta[2] + 6.0 * beta[3] * u;
    let grad = nalgebra::Vector4::new(0.0, 1.0, 2.0 * u, 3.0 * u * u) * (-X_SCALE_NM / dd_du);
    let var = (grad.transpose() * cov_beta * grad)[(0, 0)].max(0.0);

    let mut model = DispersionModel::from_coeffs(reference, coeffs, span)?;
    model.zero_dispersion_nm = lambda0;
    model.zero_dispersion_sigma_nm = var.sqrt();
    model.residual_rms_ps = (rss / n as f64).sqrt();
    model.n_points = n;
    Ok(model)
}

/// Group delay of a standard single-mode fiber, τ = S0·L/8·(λ² + λ0⁴/λ²),
/// in ps for λ in nm, slope S0 in ps/(nm²·km) and length in km.
pub fn fiber_group_delay(lambda_nm: f64, lambda0_nm: f64, slope: f64, length_km: f64) -> f64 {
    slope * length_km / 8.0 * (lambda_nm * lambda_nm + lambda0_nm.powi(4) / (lambda_nm * lambda_nm))
}

/// Zero-dispersion slope that gives `dispersion` ps/nm at `lambda_nm`.
pub fn fiber_slope_for(dispersion: f64, lambda_nm: f64, lambda0_nm: f64, length_km: f64) -> f64 {
    4.0 * dispersion / (length_km * (lambda_nm - lambda0_nm.powi(4) / lambda_nm.powi(3)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_hit_their_dispersion() {
        let s = DispersionModel::signal_path();
        let i = DispersionModel::idler_path();
        assert!((s.local_dispersion(1570.0) - 24.4).abs() < 1e-9);
        assert!((i.local_dispersion(1570.0) - 23.6).abs() < 1e-9);
        assert!((s.zero_dispersion_nm - 1319.0).abs() < 1e-9);
    }

    #[test]
    fn fold_and_branches() {
        let m = DispersionModel::signal_path();
        let t0 = m.wavelength_to_delay(1319.0).unwrap();
        assert_eq!(t0, m.min_delay());
        for l in [1200.0, 1400.0, 1570.0, 1700.0] {
            assert!(m.wavelength_to_delay(l).unwrap() > t0);
        }
        let l = m.delay_to_wavelength(t0, Branch::AboveFold).unwrap();
        assert!((l - 1319.0).abs() < 1e-6);
        assert!(matches!(
            m.delay_to_wavelength(t0 - 10.0, Branch::AboveFold),
            Err(Error::UnphysicalDelay { .. })
        ));
        assert!(matches!(m.wavelength_to_delay(2000.0), Err(Error::Range { .. })));
    }

    #[test]
    fn fit_rejects_bad_input() {
        let pts: Vec<(f64, f64)> = (0..4).map(|k| (1300.0 + k as f64, 1.0)).collect();
        assert!(matches!(fit_dispersion(&pts), Err(Error::Fit(_))));
        let same: Vec<(f64, f64)> = (0..8).map(|_| (1500.0, 1.0)).collect();
        assert!(matches!(fit_dispersion(&same), Err(Error::Fit(_))));
        // Monotone data: no fold inside the span.
        let mono: Vec<(f64, f64)> = (0..8).map(|k| (1500.0 + 10.0 * k as f64, 5.0 * k as f64)).collect();
        assert!(matches!(fit_dispersion(&mono), Err(Error::NoFold)));
    }

    #[test]
    fn key_value_round_trip() {
        let m = DispersionModel::idler_path();
        let back = DispersionModel::from_key_value(&m.to_key_value()).unwrap();
        assert_eq!(m, back);
    }
}
