use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use super::{mfpt_sum, CutAnnotation, ProgressIndex};
use crate::{Error, Result};

const FIXED: [&str; 5] = ["position", "snapshot_id", "added_edge_weight", "cut_count", "mfpt_sum"];

/// One row of the progress-index table. The cut columns describe the split
/// directly after this position and are empty on the last row.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgressRow {
    pub position: usize,
    pub snapshot: u32,
    pub added_weight: Option<f64>,
    pub cut: Option<u64>,
    pub mfpt: Option<f64>,
    pub annotations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgressTable {
    pub annotation_names: Vec<String>,
    pub rows: Vec<ProgressRow>,
}

impl ProgressTable {
    /// `annotations` holds per-position tracks, e.g. from `structural_track`.
    pub fn new(pi: &ProgressIndex, cut: &CutAnnotation, annotations: &[(String, Vec<f64>)]) -> Result<Self> {
        let n = pi.len();
        if cut.n != n {
            return Err(Error::TreeSizeMismatch(cut.n, n));
        }
        for (name, track) in annotations {
            if track.len() != n {
                return Err(Error::param(format!(
                    "annotation {name} has {} values for {n} positions",
                    track.len()
                )));
            }
        }
        let rows = (0..n)
            .map(|p| {
                let cut_here = (p + 1 < n).then(|| cut.at(p + 1));
                ProgressRow {
                    position: p,
                    snapshot: pi.order[p],
                    added_weight: pi.added_weight[p],
                    cut: cut_here,
                    mfpt: cut_here.map(|c| mfpt_sum(c, n as u64).to_f64()),
                    annotations: annotations.iter().map(|(_, t)| t[p]).collect(),
                }
            })
            .collect();
        Ok(Self {
            annotation_names: annotations.iter().map(|(name, _)| name.clone()).collect(),
            rows,
        })
    }

    pub fn cut_values(&self) -> Vec<u64> {
        self.rows.iter().filter_map(|r| r.cut).collect()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        let mut header: Vec<&str> = FIXED.to_vec();
        header.extend(self.annotation_names.iter().map(String::as_str));
        w.write_record(&header)?;
        let opt = |x: Option<String>| x.unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![
                r.position.to_string(),
                r.snapshot.to_string(),
                opt(r.added_weight.map(|x| x.to_string())),
                opt(r.cut.map(|x| x.to_string())),
                opt(r.mfpt.map(|x| x.to_string())),
            ];
            rec.extend(r.annotations.iter().map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

pub fn write_progress_csv(
    path: impl AsRef<Path>,
    pi: &ProgressIndex,
    cut: &CutAnnotation,
    annotations: &[(String, Vec<f64>)],
) -> Result<()> {
    ProgressTable::new(pi, cut, annotations)?.write_csv(path)
}

pub fn read_progress_csv(path: impl AsRef<Path>) -> Result<ProgressTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rd = csv::Reader::from_reader(file);
    let header = rd.headers()?.clone();
    if header.len() < FIXED.len() || header.iter().zip(FIXED).any(|(a, b)| a != b) {
        return Err(Error::param(format!(
            "{}: expected columns {}",
            path.display(),
            FIXED.join(",")
        )));
    }
    let annotation_names: Vec<String> = header.iter().skip(FIXED.len()).map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let bad = |col: usize| Error::NonNumeric {
            row: i + 1,
            column: col,
            value: rec.get(col).unwrap_or("").to_owned(),
        };
        fn opt<T: std::str::FromStr>(s: &str) -> std::result::Result<Option<T>, ()> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| ())
            }
        }
        let position = rec[0].parse().map_err(|_| bad(0))?;
        let snapshot = rec[1].parse().map_err(|_| bad(1))?;
        let added_weight = opt(&rec[2]).map_err(|_| bad(2))?;
        let cut = opt(&rec[3]).map_err(|_| bad(3))?;
        let mfpt = opt(&rec[4]).map_err(|_| bad(4))?;
        let annotations = (FIXED.len()..rec.len())
            .map(|c| rec[c].parse().map_err(|_| bad(c)))
            .collect::<Result<Vec<f64>>>()?;
        if annotations.len() != annotation_names.len() {
            return Err(Error::RaggedRow {
                row: i + 1,
                found: rec.len(),
                expected: header.len(),
            });
        }
        rows.push(ProgressRow {
            position,
            snapshot,
            added_weight,
            cut,
            mfpt,
            annotations,
        });
    }
    Ok(ProgressTable {
        annotation_names,
        rows,
    })
}
