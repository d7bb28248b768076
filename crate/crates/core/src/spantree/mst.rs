use super::{Edge, SpanningTree};
use crate::dataset::{Metric, SnapshotStore};
use crate::{Error, Result};

/// Exact minimum spanning tree of the complete graph (dense Prim, O(N^2)
/// distance evaluations). Ties follow the `(weight, u, v)` order, so the
/// result is unique even with repeated weights.
pub fn exact_mst(store: &SnapshotStore, metric: &Metric) -> Result<SpanningTree> {
    metric.check(store)?;
    let n = store.len();
    if n < 2 {
        return Err(Error::param("exact MST needs at least 2 snapshots"));
    }
    let mut in_tree = vec![false; n];
    // best known edge from each outside vertex into the tree
    let mut best: Vec<Edge> = (0..n as u32)
        .map(|k| Edge {
            u: k,
            v: k,
            weight: f64::INFINITY,
        })
        .collect();
    let mut edges = Vec::with_capacity(n - 1);

    let mut current = 0usize;
    in_tree[0] = true;
    for _ in 1..n {
        let row = store.row(current);
        let mut pick: Option<usize> = None;
        for k in 0..n {
            if in_tree[k] {
                continue;
            }
            let cand = Edge::new(current as u32, k as u32, metric.eval(row, store.row(k)));
            if best[k].weight.is_infinite() || cand.order(&best[k]).is_lt() {
                best[k] = cand;
            }
            if pick.is_none_or(|p| best[k].order(&best[p]).is_lt()) {
                pick = Some(k);
            }
        }
        let next = pick.expect("an outside vertex remains");
        in_tree[next] = true;
        edges.push(best[next]);
        current = next;
    }
    SpanningTree::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureKind;
    use crate::spantree::DisjointSet;

    fn line(xs: &[f64]) -> SnapshotStore {
        SnapshotStore::new(xs.to_vec(), vec![FeatureKind::Linear]).unwrap()
    }

    #[test]
    fn chain_on_a_line() {
        let t = exact_mst(&line(&[0.0, 1.0, 3.0]), &Metric::euclidean()).unwrap();
        let mut e = t.sorted_edges();
        e.sort_by_key(|e| (e.u, e.v));
        assert_eq!(e, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 2.0)]);
        assert_eq!(t.total_length(), 3.0);
    }

    #[test]
    fn two_points_one_edge() {
        let t = exact_mst(&line(&[5.0, 2.0]), &Metric::euclidean()).unwrap();
        assert_eq!(t.edges(), &[Edge::new(0, 1, 3.0)]);
    }

    #[test]
    fn single_point_is_an_error() {
        assert!(exact_mst(&line(&[1.0]), &Metric::euclidean()).is_err());
    }

    /// Kruskal over every pair, independent of the Prim code above.
    fn kruskal(store: &SnapshotStore, metric: &Metric) -> Vec<(u32, u32)> {
        let n = store.len();
        let mut all = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                all.push(Edge::new(i as u32, j as u32, metric.eval(store.row(i), store.row(j))));
            }
        }
        all.sort_by(Edge::order);
        let mut dsu = DisjointSet::new(n);
        let mut out: Vec<(u32, u32)> = all
            .into_iter()
            .filter(|e| dsu.union(e.u as usize, e.v as usize))
            .map(|e| (e.u, e.v))
            .collect();
        out.sort();
        out
    }

    #[test]
    fn matches_kruskal_on_random_points() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..50 {
            let data: Vec<f64> = (0..16).map(|_| next() * 10.0).collect();
            let s = SnapshotStore::new(data, vec![FeatureKind::Linear; 2]).unwrap();
            let t = exact_mst(&s, &Metric::euclidean()).unwrap();
            let mut got: Vec<(u32, u32)> = t.edges().iter().map(|e| (e.u, e.v)).collect();
            got.sort();
            assert_eq!(got, kruskal(&s, &Metric::euclidean()));
        }
    }

    #[test]
    fn duplicate_snapshots_are_fine() {
        let t = exact_mst(&line(&[1.0, 1.0, 1.0, 4.0]), &Metric::euclidean()).unwrap();
        assert_eq!(t.total_length(), 3.0);
        assert_eq!(
            t.sorted_edges()[..2],
            [Edge::new(0, 1, 0.0), Edge::new(0, 2, 0.0)]
        );
    }
}
