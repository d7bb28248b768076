//! Running centroids for the three metric families.

use std::f64::consts::TAU;

use crate::dataset::superpose::superpose_flat;
use crate::dataset::{wrap_degrees, Metric, MetricKind};

/// Accumulated state behind a centroid. Circular features keep summed sines
/// and cosines; coordinate sets keep the sum of members superimposed onto
/// the running centroid.
#[derive(Debug, Clone, Default)]
pub(crate) struct Accumulator {
    sums: Vec<f64>,
    count: usize,
}

impl Accumulator {
    #[cfg(test)]
    pub(crate) fn count(&self) -> usize {
        self.count
    }

    pub(crate) fn add(&mut self, metric: &Metric, x: &[f64], centroid: &mut Vec<f64>) {
        let d = x.len();
        match metric.kind {
            MetricKind::Euclidean => {
                if self.sums.is_empty() {
                    self.sums = vec![0.0; d];
                }
                for (s, v) in self.sums.iter_mut().zip(x) {
                    *s += v;
                }
                self.count += 1;
                let n = self.count as f64;
                centroid.clear();
                centroid.extend(self.sums.iter().map(|s| s / n));
            }
            MetricKind::PeriodicEuclidean => {
                if self.sums.is_empty() {
                    self.sums = vec![0.0; 2 * d];
                }
                let scale = TAU / metric.period;
                for (k, v) in x.iter().enumerate() {
                    let (s, c) = (v * scale).sin_cos();
                    self.sums[2 * k] += s;
                    self.sums[2 * k + 1] += c;
                }
                self.count += 1;
                centroid.clear();
                centroid.extend(self.sums.chunks_exact(2).map(|sc| {
                    let angle = sc[0].atan2(sc[1]) / scale;
                    if metric.period == 360.0 {
                        wrap_degrees(angle)
                    } else {
                        let r = angle.rem_euclid(metric.period);
                        if r >= metric.period {
                            0.0
                        } else {
                            r
                        }
                    }
                }));
            }
            MetricKind::AlignedRmsd => {
                let n_pts = d / 3;
                let mut cx = [0.0; 3];
                for k in 0..n_pts {
                    for a in 0..3 {
                        cx[a] += x[3 * k + a];
                    }
                }
                for v in cx.iter_mut() {
                    *v /= n_pts as f64;
                }
                if self.sums.is_empty() {
                    self.sums = vec![0.0; d];
                }
                if self.count == 0 {
                    for k in 0..n_pts {
                        for a in 0..3 {
                            self.sums[3 * k + a] += x[3 * k + a] - cx[a];
                        }
                    }
                } else {
                    // the running centroid is already centered at the origin
                    let (rot, _) = superpose_flat(x, centroid);
                    for k in 0..n_pts {
                        let p = nalgebra::Vector3::new(
                            x[3 * k] - cx[0],
                            x[3 * k + 1] - cx[1],
                            x[3 * k + 2] - cx[2],
                        );
                        let r = rot * p;
                        self.sums[3 * k] += r.x;
                        self.sums[3 * k + 1] += r.y;
                        self.sums[3 * k + 2] += r.z;
                    }
                }
                self.count += 1;
                let n = self.count as f64;
                centroid.clear();
                centroid.extend(self.sums.iter().map(|s| s / n));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_mean_straddles_zero() {
        let metric = Metric::periodic(360.0);
        let mut acc = Accumulator::default();
        let mut c = Vec::new();
        acc.add(&metric, &[350.0], &mut c);
        acc.add(&metric, &[10.0], &mut c);
        assert!(c[0] < 1e-9 || (360.0 - c[0]) < 1e-9, "{c:?}");
    }

    #[test]
    fn linear_mean() {
        let metric = Metric::euclidean();
        let mut acc = Accumulator::default();
        let mut c = Vec::new();
        for x in [[0.0, 2.0], [2.0, 4.0], [4.0, 0.0]] {
            acc.add(&metric, &x, &mut c);
        }
        assert_eq!(c, vec![2.0, 2.0]);
        assert_eq!(acc.count(), 3);
    }

    #[test]
    fn coordinate_centroid_of_rotated_copies_is_the_shape() {
        let metric = Metric::aligned_rmsd();
        let shape = [1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0, -1.0, -2.0, -3.0];
        // 90 degrees about z, then shifted
        let rotated: Vec<f64> = shape
            .chunks(3)
            .flat_map(|p| [-p[1] + 5.0, p[0] - 1.0, p[2] + 2.0])
            .collect();
        let mut acc = Accumulator::default();
        let mut c = Vec::new();
        acc.add(&metric, &shape, &mut c);
        acc.add(&metric, &rotated, &mut c);
        assert!(metric.eval(&c, &shape) < 1e-9);
    }
}
