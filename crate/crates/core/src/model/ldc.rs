//! Three-block load-duration approximation.

use serde::Serialize;

use super::keys::Block;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LdcBlock {
    pub block: Block,
    /// Mean demand of the block, MW.
    pub level: f64,
    /// Samples (hours) in the block.
    pub duration: usize,
    /// Positions of the first and one-past-last sample in the sorted curve.
    pub start: usize,
    pub end: usize,
}

/// Segment lengths of `n` sorted samples, peak first. The remainder goes to
/// the base block first, then the medium block.
pub fn block_lengths(n: usize) -> [usize; 3] {
    let q = n / 3;
    let r = n % 3;
    [q, q + usize::from(r >= 2), q + usize::from(r >= 1)]
}

/// Positions of `demand` sorted descending, ties kept in input order.
pub fn descending_order(demand: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..demand.len()).collect();
    order.sort_by(|&a, &b| demand[b].total_cmp(&demand[a]).then(a.cmp(&b)));
    order
}

/// Sorts `demand` descending and cuts it into peak, medium and base blocks of
/// near-equal length; each block's level is its mean. Levels are
/// nonincreasing and `sum(level * duration)` equals the sample total up to
/// floating-point rounding. An empty block takes the level of the block
/// above it (the maximum sample for an empty peak).
pub fn load_duration_blocks(demand: &[f64]) -> Vec<LdcBlock> {
    let order = descending_order(demand);
    let sorted: Vec<f64> = order.iter().map(|&j| demand[j]).collect();
    let lengths = block_lengths(sorted.len());
    let mut out = Vec::with_capacity(3);
    let mut start = 0;
    let mut above = sorted.first().copied().unwrap_or(0.0);
    for (block, len) in [Block::Peak, Block::Medium, Block::Base].into_iter().zip(lengths) {
        let seg = &sorted[start..start + len];
        let level = if seg.is_empty() {
            above
        } else {
            // Mean anchored on the first value: exact for a flat segment,
            // then clamped into the segment's range.
            let first = seg[0];
            let mean = first + seg.iter().map(|x| x - first).sum::<f64>() / len as f64;
            mean.clamp(seg[len - 1], seg[0])
        };
        out.push(LdcBlock {
            block,
            level,
            duration: len,
            start,
            end: start + len,
        });
        above = level;
        start += len;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn six_samples_split_evenly() {
        let b = load_duration_blocks(&[9.0, 1.0, 8.0, 2.0, 7.0, 3.0]);
        let got: Vec<(f64, usize)> = b.iter().map(|x| (x.level, x.duration)).collect();
        assert_eq!(got, vec![(8.5, 2), (5.0, 2), (1.5, 2)]);
        assert_eq!(b[0].block, Block::Peak);
    }

    #[test]
    fn flat_curve_has_equal_levels() {
        let b = load_duration_blocks(&[0.1; 7]);
        assert!(b.iter().all(|x| x.level == 0.1));
        assert_eq!(b.iter().map(|x| x.duration).collect::<Vec<_>>(), vec![2, 2, 3]);
    }

    #[test]
    fn short_curves() {
        let b = load_duration_blocks(&[4.0]);
        assert_eq!(b.iter().map(|x| x.duration).collect::<Vec<_>>(), vec![0, 0, 1]);
        assert!(b.iter().all(|x| x.level == 4.0));
        let b = load_duration_blocks(&[4.0, 2.0]);
        assert_eq!(b.iter().map(|x| x.level).collect::<Vec<_>>(), vec![4.0, 4.0, 2.0]);
    }

    proptest! {
        #[test]
        fn energy_and_order(demand in proptest::collection::vec(0.0f64..30_000.0, 1..500)) {
            let b = load_duration_blocks(&demand);
            let total: f64 = demand.iter().sum();
            let blocks: f64 = b.iter().map(|x| x.level * x.duration as f64).sum();
            prop_assert!((total - blocks).abs() <= 1e-12 * total.max(1.0));
            prop_assert!(b[0].level >= b[1].level && b[1].level >= b[2].level);
            prop_assert_eq!(b.iter().map(|x| x.duration).sum::<usize>(), demand.len());
        }
    }
}
