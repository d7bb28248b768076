use std::fmt;

use num_rational::Ratio;

use super::ProgressIndex;

/// Transition counts across every split of a progress index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutAnnotation {
    /// `c[i - 1]` is the count for the split after the first `i` positions,
    /// `i` in `1..n`.
    pub c: Vec<u64>,
    pub n: usize,
}

impl CutAnnotation {
    /// Count for split `i` (`1 <= i < n`).
    pub fn at(&self, i: usize) -> u64 {
        self.c[i - 1]
    }
}

/// Counts, for every split, the time-consecutive pairs `(t, t + 1)` that
/// land on opposite sides. Snapshot indices are taken as time order.
pub fn cut_annotation(pi: &ProgressIndex) -> CutAnnotation {
    let n = pi.len();
    if n < 2 {
        return CutAnnotation { c: Vec::new(), n };
    }
    let pos = pi.positions();
    // pair with positions a < b crosses splits a + 1 ..= b
    let mut diff = vec![0i64; n + 1];
    for t in 0..n - 1 {
        let (x, y) = (pos[t] as usize, pos[t + 1] as usize);
        let (a, b) = (x.min(y), x.max(y));
        diff[a + 1] += 1;
        diff[b + 1] -= 1;
    }
    let mut c = Vec::with_capacity(n - 1);
    let mut run = 0i64;
    for d in &diff[1..n] {
        run += d;
        c.push(run as u64);
    }
    CutAnnotation { c, n }
}

/// Sum of the two mean first passage times across a split, `2N / c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfptSum {
    Finite(Ratio<u64>),
    /// No transitions observed.
    Infinite,
}

impl MfptSum {
    pub fn to_f64(self) -> f64 {
        match self {
            MfptSum::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            MfptSum::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, MfptSum::Infinite)
    }

    /// The exact value, if finite.
    pub fn ratio(self) -> Option<Ratio<u64>> {
        match self {
            MfptSum::Finite(r) => Some(r),
            MfptSum::Infinite => None,
        }
    }
}

impl fmt::Display for MfptSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MfptSum::Finite(_) => write!(f, "{}", self.to_f64()),
            MfptSum::Infinite => f.write_str("inf"),
        }
    }
}

pub fn mfpt_sum(c: u64, n: u64) -> MfptSum {
    if c == 0 {
        MfptSum::Infinite
    } else {
        MfptSum::Finite(Ratio::new(2 * n, c))
    }
}
