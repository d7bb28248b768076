use std::fmt;
use std::str::FromStr;

use super::superpose::aligned_rmsd;
use super::{FeatureKind, SnapshotStore};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Euclidean,
    /// L2 norm after per-component minimal-image wrapping.
    PeriodicEuclidean,
    /// RMSD after optimal superposition of the `(x, y, z)` triplets.
    AlignedRmsd,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::PeriodicEuclidean => "periodic",
            MetricKind::AlignedRmsd => "aligned_rmsd",
        }
    }

    /// The only feature kind this metric accepts.
    pub fn feature_kind(self) -> FeatureKind {
        match self {
            MetricKind::Euclidean => FeatureKind::Linear,
            MetricKind::PeriodicEuclidean => FeatureKind::CircularDegrees,
            MetricKind::AlignedRmsd => FeatureKind::Coord3d,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(MetricKind::Euclidean),
            "periodic" | "periodic_euclidean" => Ok(MetricKind::PeriodicEuclidean),
            "aligned_rmsd" | "rmsd" => Ok(MetricKind::AlignedRmsd),
            other => Err(Error::param(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    pub kind: MetricKind,
    /// Period in degrees for [`MetricKind::PeriodicEuclidean`].
    pub period: f64,
}

impl Metric {
    pub const DEFAULT_PERIOD: f64 = 360.0;

    pub fn new(kind: MetricKind) -> Self {
        Self {
            kind,
            period: Self::DEFAULT_PERIOD,
        }
    }

    pub fn euclidean() -> Self {
        Self::new(MetricKind::Euclidean)
    }

    pub fn periodic(period: f64) -> Self {
        Self {
            kind: MetricKind::PeriodicEuclidean,
            period,
        }
    }

    pub fn aligned_rmsd() -> Self {
        Self::new(MetricKind::AlignedRmsd)
    }

    /// Rejects stores whose feature kinds this metric cannot handle.
    pub fn check(&self, store: &SnapshotStore) -> Result<()> {
        let want = self.kind.feature_kind();
        if let Some((i, k)) = store.kinds().iter().enumerate().find(|(_, k)| **k != want) {
            return Err(Error::MetricMismatch {
                metric: self.kind.as_str(),
                reason: format!("feature {i} is {k}, expected {want}"),
            });
        }
        if self.kind == MetricKind::PeriodicEuclidean && !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::param(format!("period must be positive, got {}", self.period)));
        }
        Ok(())
    }

    /// Distance between two raw feature vectors. No compatibility checks;
    /// call [`Metric::check`] once per store.
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            MetricKind::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            MetricKind::PeriodicEuclidean => {
                let p = self.period;
                a.iter()
                    .zip(b)
                    .map(|(x, y)| {
                        let d = (x - y).abs() % p;
                        let d = d.min(p - d);
                        d * d
                    })
                    .sum::<f64>()
                    .sqrt()
            }
            MetricKind::AlignedRmsd => aligned_rmsd(a, b),
        }
    }
}

/// Checked distance between snapshots `i` and `j`.
pub fn distance(store: &SnapshotStore, metric: &Metric, i: usize, j: usize) -> Result<f64> {
    metric.check(store)?;
    for idx in [i, j] {
        if idx >= store.len() {
            return Err(Error::IndexOutOfRange {
                index: idx,
                n: store.len(),
            });
        }
    }
    Ok(metric.eval(store.row(i), store.row(j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn store(rows: &[Vec<f64>], kind: FeatureKind) -> SnapshotStore {
        SnapshotStore::from_rows(rows, vec![kind; rows[0].len()]).unwrap()
    }

    #[test]
    fn three_four_five() {
        let s = store(&[vec![0.0, 0.0], vec![3.0, 4.0]], FeatureKind::Linear);
        assert_eq!(distance(&s, &Metric::euclidean(), 0, 1).unwrap(), 5.0);
        assert_eq!(distance(&s, &Metric::euclidean(), 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn periodic_wraps_around() {
        let s = store(&[vec![350.0], vec![10.0]], FeatureKind::CircularDegrees);
        let d = distance(&s, &Metric::periodic(360.0), 0, 1).unwrap();
        assert!((d - 20.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_kinds_rejected() {
        let s = store(&[vec![1.0, 2.0, 3.0]], FeatureKind::Linear);
        assert!(matches!(
            distance(&s, &Metric::aligned_rmsd(), 0, 0),
            Err(Error::MetricMismatch { .. })
        ));
        assert!(matches!(
            distance(&s, &Metric::periodic(360.0), 0, 0),
            Err(Error::MetricMismatch { .. })
        ));
        let mixed = SnapshotStore::new(
            vec![1.0, 2.0],
            vec![FeatureKind::Linear, FeatureKind::CircularDegrees],
        )
        .unwrap();
        assert!(distance(&mixed, &Metric::euclidean(), 0, 0).is_err());
    }

    #[test]
    fn out_of_range_index() {
        let s = store(&[vec![1.0]], FeatureKind::Linear);
        assert!(matches!(
            distance(&s, &Metric::euclidean(), 0, 1),
            Err(Error::IndexOutOfRange { index: 1, n: 1 })
        ));
    }

    fn vecs(d: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(lo..hi, d)
    }

    proptest! {
        #[test]
        fn euclidean_axioms(a in vecs(4, -50.0, 50.0), b in vecs(4, -50.0, 50.0), c in vecs(4, -50.0, 50.0)) {
            let m = Metric::euclidean();
            let (ab, ba, bc, ac) = (m.eval(&a, &b), m.eval(&b, &a), m.eval(&b, &c), m.eval(&a, &c));
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(m.eval(&a, &a), 0.0);
            prop_assert!(ab > 0.0 || a == b);
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn periodic_axioms(a in vecs(3, 0.0, 360.0), b in vecs(3, 0.0, 360.0), c in vecs(3, 0.0, 360.0)) {
            let m = Metric::periodic(360.0);
            let (ab, ba, bc, ac) = (m.eval(&a, &b), m.eval(&b, &a), m.eval(&b, &c), m.eval(&a, &c));
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert_eq!(m.eval(&a, &a), 0.0);
            prop_assert!(ab > 0.0 || a == b);
            prop_assert!(ac <= ab + bc + 1e-9);
            // no component can contribute more than half a period
            prop_assert!(ab <= 180.0 * 3f64.sqrt() + 1e-9);
        }

        #[test]
        fn aligned_rmsd_axioms(a in vecs(12, -5.0, 5.0), b in vecs(12, -5.0, 5.0)) {
            let m = Metric::aligned_rmsd();
            let ab = m.eval(&a, &b);
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - m.eval(&b, &a)).abs() < 1e-9);
            prop_assert!(m.eval(&a, &a) < 1e-9);
        }
    }
}
