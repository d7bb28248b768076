use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent random stream for one vertex in one Borůvka stage. Streams
/// depend only on `(seed, stage, vertex)`, never on which thread asks.
pub fn vertex_stream(seed: u64, stage: usize, vertex: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stage as u64) << 32) | vertex as u64);
    rng
}

/// Picks up to `k` pool indices (`0..pool_size`) on a rigid schedule around
/// uniformly random anchors, appending them to `out`.
///
/// In stage 1 each anchor starts `span` evenly spaced picks (integer stride
/// `pool_size / span`) covering the whole pool; later stages take `span`
/// consecutive entries. Indices wrap at the pool end. When more than `span`
/// picks are needed a fresh anchor starts the next run. If the pool is no
/// larger than `k`, every index is returned instead.
pub fn scheduled_pick<R: Rng + ?Sized>(
    pool_size: usize,
    k: usize,
    stage: usize,
    span: usize,
    rng: &mut R,
    out: &mut Vec<usize>,
) {
    if pool_size == 0 || k == 0 {
        return;
    }
    if pool_size <= k {
        out.extend(0..pool_size);
        return;
    }
    let span = span.max(1);
    let stride = if stage <= 1 { (pool_size / span).max(1) } else { 1 };
    let mut remaining = k;
    while remaining > 0 {
        let anchor = rng.random_range(0..pool_size);
        let run = remaining.min(span);
        out.extend((0..run).map(|j| (anchor + j * stride) % pool_size));
        remaining -= run;
    }
}
