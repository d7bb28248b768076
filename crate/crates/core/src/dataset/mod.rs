//! Snapshot storage, feature semantics and pairwise distances.

mod io;
mod metric;
pub(crate) mod superpose;

use std::fmt;
use std::str::FromStr;

pub use io::{load_dataset, write_csv, write_raw, DataFormat};
pub use metric::{distance, Metric, MetricKind};
pub use superpose::{optimal_superposition, Superposition};

use crate::{Error, Result};

/// How a single feature column is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Linear,
    /// Angle in degrees, stored in `[0, 360)`.
    CircularDegrees,
    /// One Cartesian component of a 3D point; these come in `(x, y, z)` runs.
    Coord3d,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Linear => "linear",
            FeatureKind::CircularDegrees => "circular",
            FeatureKind::Coord3d => "coord3d",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(FeatureKind::Linear),
            "circular" | "circular_degrees" | "angle" => Ok(FeatureKind::CircularDegrees),
            "coord3d" | "xyz" => Ok(FeatureKind::Coord3d),
            other => Err(Error::FeatureSpec(format!("unknown feature kind {other:?}"))),
        }
    }
}

/// Parses a feature spec such as `linear:15`, `circular:2` or
/// `linear,linear,circular`. A `kind:count` item expands to `count` copies.
pub fn parse_feature_spec(spec: &str) -> Result<Vec<FeatureKind>> {
    let mut kinds = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (kind, count) = match item.split_once(':') {
            Some((k, c)) => {
                let count: usize = c
                    .trim()
                    .parse()
                    .map_err(|_| Error::FeatureSpec(format!("bad count in {item:?}")))?;
                (k.parse::<FeatureKind>()?, count)
            }
            None => (item.parse::<FeatureKind>()?, 1),
        };
        kinds.extend(std::iter::repeat_n(kind, count));
    }
    if kinds.is_empty() {
        return Err(Error::FeatureSpec("no features listed".into()));
    }
    Ok(kinds)
}

/// Normalizes an angle in degrees into `[0, 360)`.
pub fn wrap_degrees(value: f64) -> f64 {
    let r = value.rem_euclid(360.0);
    // rem_euclid rounds tiny negatives up to exactly 360
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// `N` snapshots of `D` features, row-major and immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotStore {
    n: usize,
    d: usize,
    data: Vec<f64>,
    kinds: Vec<FeatureKind>,
}

impl SnapshotStore {
    /// Builds a store from row-major data, normalizing circular features.
    pub fn new(data: Vec<f64>, kinds: Vec<FeatureKind>) -> Result<Self> {
        let d = kinds.len();
        if d == 0 {
            return Err(Error::FeatureSpec("no features listed".into()));
        }
        if data.is_empty() {
            return Err(Error::Empty);
        }
        if !data.len().is_multiple_of(d) {
            return Err(Error::SpecWidthMismatch {
                spec: d,
                data: data.len() % d,
            });
        }
        let coords = kinds.iter().filter(|k| **k == FeatureKind::Coord3d).count();
        if coords % 3 != 0 {
            return Err(Error::FeatureSpec(format!(
                "{coords} coord3d features is not a multiple of 3"
            )));
        }
        let mut data = data;
        let circular: Vec<usize> = kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == FeatureKind::CircularDegrees)
            .map(|(i, _)| i)
            .collect();
        if !circular.is_empty() {
            for row in data.chunks_exact_mut(d) {
                for &c in &circular {
                    row[c] = wrap_degrees(row[c]);
                }
            }
        }
        Ok(Self {
            n: data.len() / d,
            d,
            data,
            kinds,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], kinds: Vec<FeatureKind>) -> Result<Self> {
        let d = kinds.len();
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::RaggedRow {
                    row: i,
                    found: row.len(),
                    expected: d,
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, kinds)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, feature: usize) -> Result<f64> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n,
            });
        }
        if feature >= self.d {
            return Err(Error::FeatureOutOfRange {
                index: feature,
                d: self.d,
            });
        }
        Ok(self.data[i * self.d + feature])
    }

    pub fn column(&self, feature: usize) -> Result<Vec<f64>> {
        if feature >= self.d {
            return Err(Error::FeatureOutOfRange {
                index: feature,
                d: self.d,
            });
        }
        Ok(self.data.iter().skip(feature).step_by(self.d).copied().collect())
    }
}
