use rand::seq::SliceRandom;
use rand::Rng;

/// Draws mini-batches of indices into a pool.
///
/// When the pool holds at least one batch, indices are drawn without
/// replacement from a shuffled order that is reshuffled once too few remain
/// for a full batch. Smaller pools are sampled with replacement.
#[derive(Debug, Clone)]
pub struct BatchSampler {
    pool: usize,
    batch: usize,
    order: Vec<usize>,
    cursor: usize,
}

impl BatchSampler {
    pub fn new(pool: usize, batch: usize) -> Self {
        assert!(pool > 0 && batch > 0, "empty pool or batch");
        BatchSampler {
            pool,
            batch,
            order: (0..pool).collect(),
            cursor: pool,
        }
    }

    pub fn batch_size(&self) -> usize {
        self.batch
    }

    pub fn next_batch<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        if self.pool < self.batch {
            out.extend((0..self.batch).map(|_| rng.random_range(0..self.pool)));
            return;
        }
        if self.cursor + self.batch > self.pool {
            self.order.shuffle(rng);
            self.cursor = 0;
        }
        out.extend_from_slice(&self.order[self.cursor..self.cursor + self.batch]);
        self.cursor += self.batch;
    }
}
