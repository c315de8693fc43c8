//! Time partitions: uniform, geometrically graded, and per-element local
//! sub-steps inside a slab.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSlab {
    pub index: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Element id -> breakpoints `t_start = s_0 < s_1 < ... < s_k = t_end`.
    /// Elements without an entry use the whole slab.
    pub local_partitions: BTreeMap<usize, Vec<f64>>,
}

impl TimeSlab {
    pub fn tau(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Breakpoints of `element` inside this slab.
    pub fn breakpoints(&self, element: usize) -> Vec<f64> {
        self.local_partitions
            .get(&element)
            .cloned()
            .unwrap_or_else(|| vec![self.t_start, self.t_end])
    }

    pub fn num_sub_steps(&self, element: usize) -> usize {
        self.local_partitions.get(&element).map_or(1, |b| b.len() - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub final_time: f64,
    pub slabs: Vec<TimeSlab>,
}

impl TimeGrid {
    fn from_nodes(nodes: &[f64]) -> Self {
        let slabs = nodes
            .windows(2)
            .enumerate()
            .map(|(index, w)| TimeSlab {
                index,
                t_start: w[0],
                t_end: w[1],
                local_partitions: BTreeMap::new(),
            })
            .collect();
        TimeGrid {
            final_time: *nodes.last().unwrap(),
            slabs,
        }
    }

    pub fn num_slabs(&self) -> usize {
        self.slabs.len()
    }

    /// Nodes `t_0 = 0 < t_1 < ... < t_N = T`.
    pub fn nodes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.slabs.len() + 1);
        out.push(self.slabs[0].t_start);
        out.extend(self.slabs.iter().map(|s| s.t_end));
        out
    }

    pub fn tau_max(&self) -> f64 {
        self.slabs.iter().map(|s| s.tau()).fold(0.0, f64::max)
    }

    /// Slab containing `t`. At a node, `minus` selects the slab ending there.
    pub fn slab_at(&self, t: f64, minus: bool) -> Option<usize> {
        let last = self.slabs.len() - 1;
        if t < self.slabs[0].t_start || t > self.slabs[last].t_end {
            return None;
        }
        let idx = self
            .slabs
            .partition_point(|s| if minus { s.t_end < t } else { s.t_end <= t });
        Some(idx.min(last))
    }

    /// Replaces the local partition of `element` in `slab` by `k` equal
    /// sub-intervals.
    pub fn refine_locally(&self, slab: usize, element: usize, k: usize, num_elements: usize) -> Result<TimeGrid> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!(
                "local refinement needs k >= 2, got {k}"
            )));
        }
        if slab >= self.slabs.len() {
            return Err(Error::InvalidArgument(format!("unknown slab {slab}")));
        }
        if element >= num_elements {
            return Err(Error::InvalidArgument(format!("unknown element {element}")));
        }
        let mut out = self.clone();
        let s = &mut out.slabs[slab];
        let pts = (0..=k)
            .map(|i| {
                if i == k {
                    s.t_end
                } else {
                    s.t_start + s.tau() * i as f64 / k as f64
                }
            })
            .collect();
        s.local_partitions.insert(element, pts);
        Ok(out)
    }
}

/// `n` slabs of length `final_time / n`.
pub fn uniform_partition(final_time: f64, n: usize) -> Result<TimeGrid> {
    if !(final_time > 0.0) || !final_time.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "final time must be positive, got {final_time}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("number of slabs must be >= 1".into()));
    }
    let nodes: Vec<f64> = (0..=n)
        .map(|i| {
            if i == n {
                final_time
            } else {
                final_time * i as f64 / n as f64
            }
        })
        .collect();
    Ok(TimeGrid::from_nodes(&nodes))
}

/// Nodes `t_0 = 0` and `t_n = sigma^(n_slabs - n) * final_time`, graded towards
/// `t = 0`.
pub fn geometric_partition(final_time: f64, n: usize, sigma: f64) -> Result<TimeGrid> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "grading factor must lie in (0, 1), got {sigma}"
        )));
    }
    if !(final_time > 0.0) || !final_time.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "final time must be positive, got {final_time}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("number of slabs must be >= 1".into()));
    }
    let mut nodes = vec![0.0];
    nodes.extend((1..=n).map(|i| sigma.powi((n - i) as i32) * final_time));
    Ok(TimeGrid::from_nodes(&nodes))
}
