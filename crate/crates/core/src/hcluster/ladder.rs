use crate::{Error, Result};

/// `levels` thresholds from `d_coarse` (level 1) down to `d_fine` (level H),
/// evenly spaced.
pub fn threshold_ladder(levels: usize, d_coarse: f64, d_fine: f64) -> Result<Vec<f64>> {
    if levels < 2 {
        return Err(Error::param(format!("need at least 2 tree levels, got {levels}")));
    }
    if !(d_fine > 0.0 && d_coarse > d_fine && d_coarse.is_finite()) {
        return Err(Error::param(format!(
            "thresholds must satisfy d_coarse > d_fine > 0, got {d_coarse} and {d_fine}"
        )));
    }
    let step = (d_coarse - d_fine) / (levels - 1) as f64;
    let mut ladder: Vec<f64> = (0..levels).map(|k| d_coarse - k as f64 * step).collect();
    ladder[levels - 1] = d_fine;
    Ok(ladder)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dihedral_ladder() {
        let t = threshold_ladder(8, 100.0, 2.5).unwrap();
        assert_eq!(t.len(), 8);
        assert!((t[3] - 58.21).abs() < 0.01);
        assert!((t[6] - 16.43).abs() < 0.01);
        assert!((t[0] - t[1] - 13.9286).abs() < 1e-4);
    }

    #[test]
    fn endpoints_only() {
        assert_eq!(threshold_ladder(2, 10.0, 1.0).unwrap(), vec![10.0, 1.0]);
    }

    #[test]
    fn twelve_levels() {
        let t = threshold_ladder(12, 3.5, 0.75).unwrap();
        assert_eq!(t.len(), 12);
        assert_eq!(t[0], 3.5);
        assert_eq!(t[11], 0.75);
        for w in t.windows(2) {
            assert!((w[0] - w[1] - 2.75 / 11.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(threshold_ladder(1, 10.0, 1.0).is_err());
        assert!(threshold_ladder(4, 1.0, 10.0).is_err());
        assert!(threshold_ladder(4, 1.0, 1.0).is_err());
        assert!(threshold_ladder(4, 1.0, 0.0).is_err());
    }
}
