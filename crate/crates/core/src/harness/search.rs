use super::sweep::{point_index, run_point, PointStats};
use super::{OperatingPoint, ResultRecord, Simulator};
use crate::error::{Error, Result};

/// Outcome of a required-SNR search for one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RequiredSnr {
    /// Interpolated crossing of the target.
    Achieved(f64),
    /// Already at or below target at the lowest grid SNR.
    AtOrBelow(f64),
    /// Never reaches the target on the grid.
    NotAchieved,
}

impl RequiredSnr {
    pub fn value(self) -> Option<f64> {
        match self {
            RequiredSnr::Achieved(x) | RequiredSnr::AtOrBelow(x) => Some(x),
            RequiredSnr::NotAchieved => None,
        }
    }

    pub fn qualifier(self) -> &'static str {
        match self {
            RequiredSnr::Achieved(_) => "=",
            RequiredSnr::AtOrBelow(_) => "<=",
            RequiredSnr::NotAchieved => "NA",
        }
    }
}

/// First crossing of `target` along a curve of `(snr_db, bler, trials)` points
/// sorted by SNR, interpolating `log10(BLER)` linearly in dB. A zero-error
/// point counts as half an error.
pub fn interpolate_required_snr(curve: &[(f64, f64, u64)], target: f64) -> RequiredSnr {
    let Some(i) = curve.iter().position(|&(_, b, _)| b <= target) else {
        return RequiredSnr::NotAchieved;
    };
    if i == 0 {
        return RequiredSnr::AtOrBelow(curve[0].0);
    }
    let (s0, b0, _) = curve[i - 1];
    let (s1, b1, t1) = curve[i];
    let b1 = if b1 > 0.0 { b1 } else { 0.5 / t1.max(1) as f64 };
    let (l0, l1, lt) = (b0.log10(), b1.log10(), target.log10());
    if l0 == l1 {
        return RequiredSnr::Achieved(s1);
    }
    RequiredSnr::Achieved(s0 + (lt - l0) / (l1 - l0) * (s1 - s0))
}

/// Scans the configured SNR grid upward at power imbalance `delta_p_db`,
/// stopping once every present user is at or below `target`. Returns the
/// per-user required SNR (`None` for an absent user) and the points visited.
pub fn required_snr_search(
    sim: &Simulator,
    target: f64,
    delta_p_db: f64,
) -> Result<([Option<RequiredSnr>; 2], Vec<ResultRecord>)> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Config(format!("target BLER {target} outside (0, 1)")));
    }
    let mut grid = sim.config().snr_db.clone();
    grid.sort_by(f64::total_cmp);
    let mut visited: Vec<PointStats> = Vec::new();
    for &snr in &grid {
        let index = point_index(delta_p_db, snr);
        let order = sim.resolve_order(index, delta_p_db, snr)?;
        let stats = run_point(
            sim,
            OperatingPoint {
                index,
                delta_p_db,
                snr_db: snr,
                order,
            },
        )?;
        let all_below = (0..2).all(|u| stats.bler(u).is_none_or(|b| b <= target));
        visited.push(stats);
        if all_below {
            break;
        }
    }
    let result = [0, 1].map(|u| {
        visited[0].present[u].then(|| {
            let curve: Vec<(f64, f64, u64)> = visited
                .iter()
                .map(|s| (s.point.snr_db, s.bler(u).unwrap_or(1.0), s.trials))
                .collect();
            interpolate_required_snr(&curve, target)
        })
    });
    Ok((result, visited.iter().map(|s| s.to_record(sim)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(snrs: &[f64]) -> Vec<(f64, f64, u64)> {
        snrs.iter().map(|&s| (s, 10f64.powf(-s / 10.0), 1000)).collect()
    }

    #[test]
    fn closed_form_crossing() {
        let curve = synthetic(&[0.0, 5.0, 10.0, 15.0, 25.0, 30.0]);
        match interpolate_required_snr(&curve, 1e-2) {
            RequiredSnr::Achieved(x) => assert!((x - 20.0).abs() < 1e-9, "{x}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn boundaries() {
        let below = vec![(3.0, 1e-4, 100), (6.0, 0.0, 100)];
        assert_eq!(interpolate_required_snr(&below, 1e-2), RequiredSnr::AtOrBelow(3.0));
        let above = vec![(3.0, 0.9, 100), (6.0, 0.5, 100)];
        assert_eq!(interpolate_required_snr(&above, 1e-2), RequiredSnr::NotAchieved);
        assert_eq!(RequiredSnr::NotAchieved.qualifier(), "NA");
    }

    #[test]
    fn zero_error_point_uses_half_count() {
        let curve = vec![(0.0, 0.1, 100), (10.0, 0.0, 1000)];
        // log-linear between 1e-1 and 5e-4
        let x = interpolate_required_snr(&curve, 1e-2).value().unwrap();
        let expected = 10.0 / (-1.0 - (5e-4f64).log10());
        assert!((x - expected).abs() < 1e-9);
    }
}
