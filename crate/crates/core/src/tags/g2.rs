use serde::Serialize;

use crate::error::{Error, Result};

/// Peak-area estimate of g² from a start-stop histogram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct G2Estimate {
    pub g2: f64,
    pub sigma: f64,
    pub central_area: u64,
    /// Areas of peaks −n…−1, 1…n in order.
    pub side_areas: Vec<u64>,
}

impl G2Estimate {
    pub fn side_mean(&self) -> f64 {
        self.side_areas.iter().sum::<u64>() as f64 / self.side_areas.len() as f64
    }
}

/// Multi-stop correlation of two sorted absolute-time lists (ps).
///
/// Each start-stop difference Δ is assigned to the peak k = round((Δ − zero_delay)/T)
/// for |k| ≤ n_side, i.e. every peak integrates one full clock period.
/// g² = A₀ / mean(A_side) with σ² = g²(1/A₀ + 1/ΣA_side).
pub fn g2_peak_ratio(
    start: &[u64],
    stop: &[u64],
    clock_period_ps: f64,
    n_side: usize,
    zero_delay_ps: f64,
) -> Result<G2Estimate> {
    if n_side == 0 {
        return Err(Error::InvalidArgument("need at least one side peak".into()));
    }
    if !(clock_period_ps > 0.0) {
        return Err(Error::InvalidArgument("clock period must be positive".into()));
    }
    let areas = peak_areas(start, stop, clock_period_ps, n_side, zero_delay_ps);
    let central = areas[n_side];
    let side: Vec<u64> = areas[..n_side].iter().chain(&areas[n_side + 1..]).copied().collect();
    let side_total: u64 = side.iter().sum();
    if side_total == 0 {
        return Err(Error::InsufficientStatistics("side peaks are empty".into()));
    }
    let mean = side_total as f64 / side.len() as f64;
    let g2 = central as f64 / mean;
    let rel = 1.0 / (central.max(1) as f64) + 1.0 / side_total as f64;
    Ok(G2Estimate {
        g2,
        sigma: g2.max(1.0 / mean) * rel.sqrt(),
        central_area: central,
        side_areas: side,
    })
}

/// Counts per peak k = −n…n.
pub fn peak_areas(start: &[u64], stop: &[u64], period: f64, n_side: usize, zero_delay: f64) -> Vec<u64> {
    let mut areas = vec![0u64; 2 * n_side + 1];
    let reach = (n_side as f64 + 0.5) * period;
    let mut lo = 0usize;
    for &t in start {
        let window_lo = t as f64 + zero_delay - reach;
        while lo < stop.len() && (stop[lo] as f64) < window_lo {
            lo += 1;
        }
        for &s in &stop[lo..] {
            let d = s as f64 - t as f64 - zero_delay;
            if d >= reach {
                break;
            }
            let k = (d / period).round() as i64;
            if k.unsigned_abs() as usize <= n_side {
                areas[(k + n_side as i64) as usize] += 1;
            }
        }
    }
    areas
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_by_peak() {
        let start = [1000u64, 2000, 3000];
        let stop = [1010u64, 2990, 4000];
        let a = peak_areas(&start, &stop, 1000.0, 1, 0.0);
        // 1000→1010 (k=0), 1000→2990 (k=2, out), 2000→1010 (k=-1),
        // 2000→2990 (k=1), 3000→2990 (k=0), 3000→4000 (k=1), 2000→4000 (k=2, out).
        assert_eq!(a, vec![1, 2, 2]);
        let g = g2_peak_ratio(&start, &stop, 1000.0, 1, 0.0).unwrap();
        assert!((g.g2 - 2.0 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn empty_sides_are_an_error() {
        assert!(matches!(
            g2_peak_ratio(&[0], &[5], 1000.0, 2, 0.0),
            Err(Error::InsufficientStatistics(_))
        ));
    }
}
