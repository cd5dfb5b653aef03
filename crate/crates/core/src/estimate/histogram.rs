//! Equal-width histograms with per-bin medians.

use serde::Serialize;

use super::EstimateError;

/// Bins are half-open `[e_j, e_{j+1})` except the last, which is closed, the
/// same convention as numpy's `histogram`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Median of the members of each bin; `None` for an empty bin.
    pub medians: Vec<Option<f64>>,
}

impl Histogram {
    /// Builds `bins` equal-width bins over `[min, max]` of `samples`.
    /// A zero-width range is reported as [`EstimateError::Degenerate`].
    pub fn equal_width(samples: &[f64], bins: usize, cell: &str) -> Result<Self, EstimateError> {
        assert!(bins > 0, "histogram needs at least one bin");
        if samples.is_empty() {
            return Err(EstimateError::NoSamples { cell: cell.to_string() });
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(EstimateError::NotFinite {
                cell: cell.to_string(),
                value: *bad,
            });
        }
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            return Err(EstimateError::Degenerate {
                cell: cell.to_string(),
                value: lo,
            });
        }
        let width = (hi - lo) / bins as f64;
        let mut bin_edges: Vec<f64> = (0..=bins).map(|j| lo + width * j as f64).collect();
        bin_edges[bins] = hi;

        let mut members: Vec<Vec<f64>> = vec![Vec::new(); bins];
        for &x in samples {
            members[bin_of(&bin_edges, x)].push(x);
        }
        let counts = members.iter().map(Vec::len).collect();
        let medians = members.into_iter().map(median).collect();
        Ok(Histogram {
            bin_edges,
            counts,
            medians,
        })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    pub fn center(&self, bin: usize) -> f64 {
        0.5 * (self.bin_edges[bin] + self.bin_edges[bin + 1])
    }

    /// Member median, or the bin center when the bin is empty.
    pub fn representative(&self, bin: usize) -> f64 {
        self.medians[bin].unwrap_or_else(|| self.center(bin))
    }
}

fn bin_of(edges: &[f64], x: f64) -> usize {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let mut j = (((x - lo) / (hi - lo)) * bins as f64).floor().max(0.0) as usize;
    j = j.min(bins - 1);
    // The scaled index can be off by one right at an edge; settle it
    // against the stored edges.
    if j > 0 && x < edges[j] {
        j -= 1;
    }
    if j + 1 < bins && x >= edges[j + 1] {
        j += 1;
    }
    j
}

/// Median of a sample (mean of the two middle values for even sizes).
pub fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}
