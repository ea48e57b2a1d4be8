//! Dyadic index trees over `{0, …, N-1}` and the names of the blocks
//! `K^ℓ_{i,j}` they induce.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complete binary trees of even depth `L` over rows and columns.
///
/// Node `(ℓ, i)` covers `[i·N/2^ℓ, (i+1)·N/2^ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicPartition {
    n: usize,
    levels: usize,
}

/// Block `K^ℓ_{i,j}`: rows of node `i` at level `ℓ` of the row tree, columns
/// of node `j` at level `L-ℓ` of the column tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockId {
    pub level: usize,
    pub row_node: usize,
    pub col_node: usize,
}

impl DyadicPartition {
    /// Partition with exactly `levels` levels; `levels` must be even and
    /// `2^levels` must divide `n`.
    pub fn with_levels(n: usize, levels: usize) -> Result<Self> {
        if levels < 2 || !levels.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "tree depth must be even and >= 2, got {levels}"
            )));
        }
        if levels >= usize::BITS as usize || n == 0 || !n.is_multiple_of(1usize << levels) {
            return Err(Error::invalid(format!(
                "n = {n} is not a multiple of 2^{levels}"
            )));
        }
        Ok(DyadicPartition { n, levels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Tree depth `L`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Middle level `h = L/2`.
    pub fn half(&self) -> usize {
        self.levels / 2
    }

    /// Number of middle-level nodes `m = 2^h`.
    pub fn middle_nodes(&self) -> usize {
        1 << self.half()
    }

    /// Leaf size `n₀ = N / 2^L`.
    pub fn leaf_size(&self) -> usize {
        self.n >> self.levels
    }

    pub fn node_count(&self, level: usize) -> usize {
        1 << level
    }

    /// Index range of node `i` at `level`.
    pub fn node_range(&self, level: usize, i: usize) -> Range<usize> {
        let size = self.n >> level;
        i * size..(i + 1) * size
    }

    pub fn block(&self, level: usize, row_node: usize, col_node: usize) -> Result<BlockId> {
        let id = BlockId {
            level,
            row_node,
            col_node,
        };
        self.check(&id)?;
        Ok(id)
    }

    fn check(&self, id: &BlockId) -> Result<()> {
        if id.level > self.levels
            || id.row_node >= 1 << id.level
            || id.col_node >= 1 << (self.levels - id.level)
        {
            return Err(Error::invalid(format!(
                "block {id:?} is outside a depth-{} partition",
                self.levels
            )));
        }
        Ok(())
    }

    /// Blocks at one level, row-major in `(i, j)`.
    pub fn blocks_at(&self, level: usize) -> impl Iterator<Item = BlockId> + '_ {
        let cols = 1usize << (self.levels - level);
        (0..1usize << level).flat_map(move |i| {
            (0..cols).map(move |j| BlockId {
                level,
                row_node: i,
                col_node: j,
            })
        })
    }
}

/// Chooses the largest even `L` with `n / 2^L >= target_leaf`.
///
/// `n` must be a power of two so that every leaf size is one as well.
pub fn make_partition(n: usize, target_leaf: usize) -> Result<DyadicPartition> {
    let target = target_leaf.max(1);
    let mut best = None;
    let mut levels = 2;
    while n.is_power_of_two() && levels < usize::BITS as usize && (n >> levels) >= target {
        best = Some(levels);
        levels += 2;
    }
    match best {
        Some(levels) => DyadicPartition::with_levels(n, levels),
        None => Err(Error::invalid(format!(
            "n = {n} admits no even-depth dyadic partition with leaves of at least {target}; \
             nearby admissible sizes: {}",
            admissible_near(n, target)
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

/// Nearest admissible sizes below and above `n`.
fn admissible_near(n: usize, target: usize) -> Vec<usize> {
    let smallest = 4 * target.next_power_of_two();
    let above = n.max(smallest).next_power_of_two();
    let mut out = Vec::new();
    if above / 2 >= smallest && above / 2 != n {
        out.push(above / 2);
    }
    if above != n {
        out.push(above);
    } else {
        out.push(above * 2);
    }
    out
}

pub fn block_rows(p: &DyadicPartition, id: &BlockId) -> Result<Range<usize>> {
    p.check(id)?;
    Ok(p.node_range(id.level, id.row_node))
}

pub fn block_cols(p: &DyadicPartition, id: &BlockId) -> Result<Range<usize>> {
    p.check(id)?;
    Ok(p.node_range(p.levels - id.level, id.col_node))
}
