/// Eligible candidates of one cluster for one vertex.
///
/// The cluster's member list is sorted by subtree label, so the members
/// sharing the vertex's subtree form one contiguous run. The pool is the
/// complement of that run, found with two binary searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidatePool {
    len: usize,
    run_start: usize,
    run_end: usize,
}

impl CandidatePool {
    /// `labels` are the subtree labels of the cluster members in sorted order.
    #[inline]
    pub fn locate(labels: &[u32], label: u32) -> Self {
        let run_start = labels.partition_point(|&l| l < label);
        let run_end = run_start + labels[run_start..].partition_point(|&l| l == label);
        Self {
            len: labels.len(),
            run_start,
            run_end,
        }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.len - (self.run_end - self.run_start)
    }

    /// Position in the cluster's member list of the `k`-th eligible member.
    #[inline]
    pub fn position(&self, k: usize) -> usize {
        debug_assert!(k < self.size());
        if k < self.run_start {
            k
        } else {
            k + (self.run_end - self.run_start)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn all_in_own_subtree() {
        assert_eq!(CandidatePool::locate(&[3, 3, 3], 3).size(), 0);
    }

    #[test]
    fn complement_of_one_run() {
        let labels = [0, 1, 1, 2, 5, 5, 5, 5, 7, 9];
        let pool = CandidatePool::locate(&labels, 5);
        assert_eq!(pool.size(), 6);
        let picked: Vec<u32> = (0..6).map(|k| labels[pool.position(k)]).collect();
        assert_eq!(picked, vec![0, 1, 1, 2, 7, 9]);
    }

    #[test]
    fn label_absent() {
        let pool = CandidatePool::locate(&[1, 4, 8], 5);
        assert_eq!(pool.size(), 3);
        assert_eq!(pool.position(2), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn matches_linear_scan(mut labels in proptest::collection::vec(0u32..12, 1..60), probe in 0u32..12) {
            labels.sort_unstable();
            let pool = CandidatePool::locate(&labels, probe);
            let scan: Vec<u32> = labels.iter().copied().filter(|&l| l != probe).collect();
            prop_assert_eq!(pool.size(), scan.len());
            let via_pool: Vec<u32> = (0..pool.size()).map(|k| labels[pool.position(k)]).collect();
            prop_assert_eq!(via_pool, scan);
        }
    }
}
