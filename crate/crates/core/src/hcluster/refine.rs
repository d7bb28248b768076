use super::ClusterTree;
use crate::dataset::SnapshotStore;
use crate::{Error, Result};

/// Rebuilds levels `H-1, H-2, ..., H-eta_max` (in that order). Each rebuilt
/// level is deleted and refilled by one pass over all snapshots in time
/// order, routed down the coarser levels exactly like the leaf pass. The
/// finer levels are then re-derived under the new clusters by the same
/// routed pass, top down, so every level stays nested in the one above.
pub fn refine_multipass(tree: &mut ClusterTree, store: &SnapshotStore, eta_max: usize) -> Result<()> {
    let height = tree.height();
    if eta_max > height.saturating_sub(2) {
        return Err(Error::param(format!(
            "eta_max must be at most H - 2 = {}, got {eta_max}",
            height.saturating_sub(2)
        )));
    }
    if store.len() != tree.n_snapshots() {
        return Err(Error::param("store and cluster tree differ in snapshot count"));
    }
    for h in ((height - eta_max)..height).rev() {
        for level in h..=height {
            tree.rebuild_level(store, level);
        }
    }
    Ok(())
}
