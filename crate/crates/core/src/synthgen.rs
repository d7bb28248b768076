//! Labeled synthetic time series: a Markov chain hopping between isotropic
//! Gaussian wells, with optional planted outliers.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::{FeatureKind, SnapshotStore};
use crate::progindex::{mfpt_sum, MfptSum};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WellSpec {
    /// One mean vector per state; all of the same length.
    pub means: Vec<Vec<f64>>,
    /// Standard deviation of every coordinate.
    pub width: f64,
    /// Row-stochastic `m x m` transition matrix.
    pub transition: Vec<Vec<f64>>,
    /// Probability that a draw is turned into an outlier.
    pub outlier_rate: f64,
    /// Factor applied to an outlier's deviation from its mean.
    pub outlier_scale: f64,
    pub feature_kind: FeatureKind,
    pub initial_state: usize,
}

impl WellSpec {
    /// Two wells `separation` apart along the first axis of `dim` dimensions,
    /// hopping with probability `hop` per step.
    pub fn two_well(dim: usize, separation: f64, width: f64, hop: f64) -> Self {
        let mut right = vec![0.0; dim];
        right[0] = separation;
        Self {
            means: vec![vec![0.0; dim], right],
            width,
            transition: vec![vec![1.0 - hop, hop], vec![hop, 1.0 - hop]],
            outlier_rate: 0.0,
            outlier_scale: 4.0,
            feature_kind: FeatureKind::Linear,
            initial_state: 0,
        }
    }

    pub fn states(&self) -> usize {
        self.means.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.means.len();
        if m == 0 {
            return Err(Error::param("at least one state is required"));
        }
        let d = self.dim();
        if d == 0 || self.means.iter().any(|mu| mu.len() != d) {
            return Err(Error::param("state means must share one nonzero dimension"));
        }
        if self.feature_kind == FeatureKind::Coord3d && !d.is_multiple_of(3) {
            return Err(Error::param("coordinate wells need a multiple of 3 features"));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::param("well width must be positive"));
        }
        if self.transition.len() != m || self.transition.iter().any(|r| r.len() != m) {
            return Err(Error::param(format!("transition matrix must be {m}x{m}")));
        }
        for (i, row) in self.transition.iter().enumerate() {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::param(format!("transition row {i} has an entry outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::param(format!("transition row {i} sums to {sum}")));
            }
        }
        if !(0.0..=1.0).contains(&self.outlier_rate) {
            return Err(Error::param("outlier rate must lie in [0, 1]"));
        }
        if !(self.outlier_scale >= 1.0 && self.outlier_scale.is_finite()) {
            return Err(Error::param("outlier scale must be at least 1"));
        }
        if self.initial_state >= m {
            return Err(Error::param("initial state out of range"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthRun {
    pub store: SnapshotStore,
    /// True state of each snapshot.
    pub labels: Vec<u32>,
    /// `transitions[a][b]` counts steps from state `a` to state `b`.
    pub transitions: Vec<Vec<u64>>,
    /// Indices of planted outliers, ascending.
    pub outliers: Vec<usize>,
}

pub fn generate(spec: &WellSpec, n: usize, seed: u64) -> Result<SynthRun> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Empty);
    }
    let m = spec.states();
    let d = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    let mut transitions = vec![vec![0u64; m]; m];
    let mut outliers = Vec::new();
    let mut state = spec.initial_state;
    let mut dev = vec![0.0; d];
    for t in 0..n {
        if t > 0 {
            let u: f64 = rng.random();
            let row = &spec.transition[state];
            let mut acc = 0.0;
            // falls back to the last state with positive mass on rounding
            let mut next = row.iter().rposition(|&p| p > 0.0).unwrap_or(state);
            for (j, &p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    next = j;
                    break;
                }
            }
            transitions[state][next] += 1;
            state = next;
        }
        let outlier = spec.outlier_rate > 0.0 && rng.random::<f64>() < spec.outlier_rate;
        let scale = if outlier { spec.outlier_scale } else { 1.0 } * spec.width;
        for x in dev.iter_mut() {
            *x = rng.sample::<f64, _>(StandardNormal) * scale;
        }
        data.extend(spec.means[state].iter().zip(&dev).map(|(mu, x)| mu + x));
        labels.push(state as u32);
        if outlier {
            outliers.push(t);
        }
    }
    let store = SnapshotStore::new(data, vec![spec.feature_kind; d])?;
    Ok(SynthRun {
        store,
        labels,
        transitions,
        outliers,
    })
}

/// Transitions between the states listed in `first_group` and all others,
/// with the matching `2N / count`.
pub fn markov_oracle(labels: &[u32], first_group: &[u32]) -> (u64, MfptSum) {
    let side = |s: u32| first_group.contains(&s);
    let count = labels.windows(2).filter(|w| side(w[0]) != side(w[1])).count() as u64;
    (count, mfpt_sum(count, labels.len() as u64))
}

/// Labels sidecar: `snapshot_id,state,outlier`.
pub fn write_labels_csv(path: impl AsRef<Path>, run: &SynthRun) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["snapshot_id", "state", "outlier"])?;
    let mut planted = run.outliers.iter().peekable();
    for (i, s) in run.labels.iter().enumerate() {
        let is_outlier = planted.next_if_eq(&&i).is_some();
        w.write_record([i.to_string(), s.to_string(), u8::from(is_outlier).to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a labels sidecar back as `(labels, outlier indices)`.
pub fn read_labels_csv(path: impl AsRef<Path>) -> Result<(Vec<u32>, Vec<usize>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rd = csv::Reader::from_reader(file);
    let mut labels = Vec::new();
    let mut outliers = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let field = |c: usize| -> Result<u32> {
            let v = rec.get(c).unwrap_or("");
            v.parse().map_err(|_| Error::NonNumeric {
                row: i + 1,
                column: c,
                value: v.to_owned(),
            })
        };
        labels.push(field(1)?);
        if field(2)? != 0 {
            outliers.push(i);
        }
    }
    Ok((labels, outliers))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_state() {
        let spec = WellSpec {
            means: vec![vec![1.0, 2.0]],
            width: 0.5,
            transition: vec![vec![1.0]],
            outlier_rate: 0.0,
            outlier_scale: 4.0,
            feature_kind: FeatureKind::Linear,
            initial_state: 0,
        };
        let run = generate(&spec, 100, 1).unwrap();
        assert!(run.labels.iter().all(|&l| l == 0));
        assert_eq!(run.transitions, vec![vec![99]]);
        assert_eq!(run.store.len(), 100);
    }

    #[test]
    fn absorbing_start() {
        let mut spec = WellSpec::two_well(3, 10.0, 1.0, 0.0);
        spec.initial_state = 1;
        let run = generate(&spec, 500, 2).unwrap();
        assert!(run.labels.iter().all(|&l| l == 1));
        assert_eq!(run.transitions[0][1] + run.transitions[1][0], 0);
    }

    #[test]
    fn hop_count_is_binomial() {
        let spec = WellSpec::two_well(2, 10.0, 1.0, 0.01);
        let trials = 9_999.0;
        let mean = trials * 0.01;
        let sd = (trials * 0.01 * 0.99f64).sqrt();
        for seed in 0..5 {
            let run = generate(&spec, 10_000, seed).unwrap();
            let hops = (run.transitions[0][1] + run.transitions[1][0]) as f64;
            assert!((hops - mean).abs() <= 4.0 * sd, "seed {seed}: {hops}");
        }
    }

    #[test]
    fn reproducible() {
        let mut spec = WellSpec::two_well(4, 6.0, 1.0, 0.05);
        spec.outlier_rate = 0.02;
        let a = generate(&spec, 1000, 9).unwrap();
        let b = generate(&spec, 1000, 9).unwrap();
        assert_eq!(a.store, b.store);
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.outliers, b.outliers);
        let c = generate(&spec, 1000, 10).unwrap();
        assert_ne!(a.labels, c.labels);
    }

    #[test]
    fn outliers_sit_far_out() {
        let mut spec = WellSpec::two_well(5, 50.0, 1.0, 0.01);
        spec.outlier_rate = 0.05;
        let run = generate(&spec, 4000, 4).unwrap();
        let radius = |i: usize| {
            let mu = &spec.means[run.labels[i] as usize];
            run.store.row(i).iter().zip(mu).map(|(x, m)| (x - m).powi(2)).sum::<f64>().sqrt()
        };
        let mean_of = |idx: &mut dyn Iterator<Item = usize>| {
            let v: Vec<f64> = idx.map(radius).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let outer = mean_of(&mut run.outliers.iter().copied());
        let inner = mean_of(&mut (0..4000).filter(|i| run.outliers.binary_search(i).is_err()));
        assert!(!run.outliers.is_empty());
        assert!((outer / inner - 4.0).abs() < 0.5, "{outer} vs {inner}");
    }

    #[test]
    fn invalid_specs() {
        let good = WellSpec::two_well(2, 1.0, 1.0, 0.1);
        let mut s = good.clone();
        s.width = 0.0;
        assert!(s.validate().is_err());
        let mut s = good.clone();
        s.transition[0][1] += 1e-9;
        assert!(s.validate().is_err());
        let mut s = good.clone();
        s.transition[0][1] += 1e-13;
        assert!(s.validate().is_ok());
        let mut s = good.clone();
        s.means[1].push(0.0);
        assert!(s.validate().is_err());
        let mut s = good;
        s.initial_state = 2;
        assert!(s.validate().is_err());
    }

    #[test]
    fn oracle_counts() {
        let alternating: Vec<u32> = (0..11).map(|i| i % 2).collect();
        assert_eq!(markov_oracle(&alternating, &[0]).0, 10);
        assert!(markov_oracle(&[1; 8], &[0]).1.is_infinite());

        let run = generate(&WellSpec::two_well(2, 5.0, 1.0, 0.02), 3000, 5).unwrap();
        let mut brute = 0u64;
        for t in 0..run.labels.len() - 1 {
            if run.labels[t] != run.labels[t + 1] {
                brute += 1;
            }
        }
        let (count, mfpt) = markov_oracle(&run.labels, &[0]);
        assert_eq!(count, brute);
        assert_eq!(count, run.transitions[0][1] + run.transitions[1][0]);
        assert_eq!(mfpt.to_f64(), 6000.0 / brute as f64);
    }

    #[test]
    fn labels_round_trip() {
        let mut spec = WellSpec::two_well(2, 5.0, 1.0, 0.02);
        spec.outlier_rate = 0.1;
        let run = generate(&spec, 200, 6).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.csv");
        write_labels_csv(&path, &run).unwrap();
        let (labels, outliers) = read_labels_csv(&path).unwrap();
        assert_eq!(labels, run.labels);
        assert_eq!(outliers, run.outliers);
    }
}
