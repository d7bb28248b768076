/// Prior guesses kept per vertex across Borůvka stages.
pub const CACHE_CAPACITY: usize = 5;

/// FIFO list of up to [`CACHE_CAPACITY`] `(neighbor, distance)` guesses,
/// oldest first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborRing {
    entries: [(u32, f64); CACHE_CAPACITY],
    len: u8,
}

impl Default for NeighborRing {
    fn default() -> Self {
        Self {
            entries: [(0, 0.0); CACHE_CAPACITY],
            len: 0,
        }
    }
}

impl NeighborRing {
    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries[..self.len as usize]
    }

    /// Appends a guess, evicting the oldest one when full. Neighbors already
    /// present are not duplicated.
    pub fn push(&mut self, neighbor: u32, weight: f64) {
        if self.entries().iter().any(|(n, _)| *n == neighbor) {
            return;
        }
        let len = self.len as usize;
        if len == CACHE_CAPACITY {
            self.entries.copy_within(1.., 0);
            self.entries[CACHE_CAPACITY - 1] = (neighbor, weight);
        } else {
            self.entries[len] = (neighbor, weight);
            self.len += 1;
        }
    }

    /// Keeps only entries for which `keep(neighbor)` holds, preserving order.
    pub fn retain(&mut self, mut keep: impl FnMut(u32) -> bool) {
        let mut w = 0;
        for r in 0..self.len as usize {
            if keep(self.entries[r].0) {
                self.entries[w] = self.entries[r];
                w += 1;
            }
        }
        self.len = w as u8;
    }
}

/// One [`NeighborRing`] per vertex.
#[derive(Debug, Clone)]
pub struct GuessCache {
    rings: Vec<NeighborRing>,
}

impl GuessCache {
    pub fn new(n: usize) -> Self {
        Self {
            rings: vec![NeighborRing::default(); n],
        }
    }

    pub fn ring(&self, v: usize) -> &NeighborRing {
        &self.rings[v]
    }

    pub fn rings_mut(&mut self) -> &mut [NeighborRing] {
        &mut self.rings
    }

    pub fn rings(&self) -> &[NeighborRing] {
        &self.rings
    }
}
