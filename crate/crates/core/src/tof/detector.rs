use serde::{Deserialize, Serialize};

use super::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::units::FWHM_PER_SIGMA;

/// Click detector described by timing jitter, dark counts, efficiency and
/// deadtime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub jitter_fwhm_ps: f64,
    pub dark_rate_hz: f64,
    pub efficiency: f64,
    pub deadtime_ns: f64,
}

impl DetectorModel {
    /// Nanowire detector behind the fiber spectrometer: 65 ps FWHM jitter,
    /// 1 kHz dark counts, 4 % system efficiency, 70 ns electronics deadtime.
    pub fn snspd() -> Self {
        Self {
            jitter_fwhm_ps: 65.0,
            dark_rate_hz: 1000.0,
            efficiency: 0.04,
            deadtime_ns: 70.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("jitter_fwhm", self.jitter_fwhm_ps),
            ("dark_rate", self.dark_rate_hz),
            ("efficiency", self.efficiency),
            ("deadtime", self.deadtime_ns),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(key, format!("must be non-negative, got {v}")));
            }
        }
        if self.efficiency > 1.0 {
            return Err(Error::config("efficiency", "must not exceed 1"));
        }
        Ok(())
    }

    pub fn jitter_sigma_ps(&self) -> f64 {
        self.jitter_fwhm_ps / FWHM_PER_SIGMA
    }
}

/// 1σ wavelength uncertainty (nm) from detector jitter and local dispersion.
pub fn resolution(model: &DispersionModel, detector: &DetectorModel, lambda_nm: f64) -> Result<f64> {
    detector.validate()?;
    model.wavelength_to_delay(lambda_nm)?;
    let sigma = detector.jitter_sigma_ps();
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let d = model.local_dispersion(lambda_nm).abs();
    if d < 1e-9 {
        return Err(Error::DivergentResolution {
            wavelength_nm: lambda_nm,
        });
    }
    Ok(sigma / d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snspd_resolution_at_1570() {
        let r = resolution(&DispersionModel::signal_path(), &DetectorModel::snspd(), 1570.0).unwrap();
        assert!((r - 65.0 / FWHM_PER_SIGMA / 24.4).abs() < 1e-12);
        assert!((r - 1.13).abs() < 0.01);
    }

    #[test]
    fn zero_jitter_and_fold() {
        let m = DispersionModel::signal_path();
        let mut d = DetectorModel::snspd();
        assert!(matches!(
            resolution(&m, &d, m.zero_dispersion_nm),
            Err(Error::DivergentResolution { .. })
        ));
        d.jitter_fwhm_ps = 0.0;
        assert_eq!(resolution(&m, &d, 1570.0).unwrap(), 0.0);
    }

    #[test]
    fn validation_names_key() {
        let d = DetectorModel {
            efficiency: 1.5,
            ..DetectorModel::snspd()
        };
        match d.validate() {
            Err(Error::Config { key, .. }) => assert_eq!(key, "efficiency"),
            other => panic!("{other:?}"),
        }
    }
}
