//! Discrete d-hops placement on an unweighted `N x M` torus.
//!
//! The perfect construction is the Lee-sphere code `{(i, 2d^2 i mod k)}` on
//! the `k x k` torus with `k = 2d^2 + 2d + 1`; it tiles any torus whose sides
//! are multiples of `k`. Other sizes get the block-and-trim construction
//! followed by greedy augmentation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::HopWeights;

/// Largest torus accepted by the exhaustive oracle.
pub const BRUTE_FORCE_NODE_LIMIT: usize = 36;

/// A node of the torus; ordered lexicographically by `(plane, slot)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TorusCoord {
    pub plane: usize,
    pub slot: usize,
}

impl TorusCoord {
    pub const fn new(plane: usize, slot: usize) -> Self {
        Self { plane, slot }
    }

    pub fn transposed(self) -> Self {
        Self::new(self.slot, self.plane)
    }
}

impl fmt::Display for TorusCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.plane, self.slot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub planes: usize,
    pub slots: usize,
}

impl Dims {
    pub fn new(planes: usize, slots: usize) -> Result<Self> {
        if planes == 0 || slots == 0 {
            return Err(Error::InvalidParameter(format!(
                "torus dimensions must be positive, got {planes}x{slots}"
            )));
        }
        Ok(Self { planes, slots })
    }

    pub fn node_count(&self) -> usize {
        self.planes * self.slots
    }

    pub fn contains(&self, c: TorusCoord) -> bool {
        c.plane < self.planes && c.slot < self.slots
    }

    pub fn check(&self, c: TorusCoord) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "coordinate {c} outside {}x{} torus",
                self.planes, self.slots
            )))
        }
    }

    /// Row-major node index.
    pub fn index(&self, c: TorusCoord) -> usize {
        c.plane * self.slots + c.slot
    }

    pub fn coord(&self, index: usize) -> TorusCoord {
        TorusCoord::new(index / self.slots, index % self.slots)
    }

    /// All nodes in row-major order.
    pub fn coords(&self) -> impl Iterator<Item = TorusCoord> + '_ {
        (0..self.node_count()).map(|i| self.coord(i))
    }

    pub fn transposed(self) -> Self {
        Self {
            planes: self.slots,
            slots: self.planes,
        }
    }
}

fn ring_distance(a: usize, b: usize, len: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(len - d)
}

pub(crate) fn hops_unchecked(a: TorusCoord, b: TorusCoord, dims: Dims) -> usize {
    ring_distance(a.plane, b.plane, dims.planes) + ring_distance(a.slot, b.slot, dims.slots)
}

/// Hop count between two nodes with wraparound on both axes.
pub fn lee_distance(a: TorusCoord, b: TorusCoord, dims: Dims) -> Result<usize> {
    dims.check(a)?;
    dims.check(b)?;
    Ok(hops_unchecked(a, b, dims))
}

/// Number of nodes within `d` hops of a node on a large enough torus.
pub fn sphere_size(d: u32) -> usize {
    let d = d as usize;
    2 * d * d + 2 * d + 1
}

/// Distance used to pick the nearest resource.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Hops,
    Weighted(HopWeights),
}

impl Metric {
    /// Distance without bounds checks; callers guarantee `a, b` lie in `dims`.
    pub(crate) fn distance(&self, a: TorusCoord, b: TorusCoord, dims: Dims) -> f64 {
        match self {
            Metric::Hops => hops_unchecked(a, b, dims) as f64,
            Metric::Weighted(w) => {
                w.inter_plane_km * ring_distance(a.plane, b.plane, dims.planes) as f64
                    + w.intra_plane_km * ring_distance(a.slot, b.slot, dims.slots) as f64
            }
        }
    }
}

/// Total map from every node to one resource node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    dims: Dims,
    targets: Vec<TorusCoord>,
}

impl Assignment {
    /// Builds an assignment from row-major targets, checking that it is total
    /// and that every target is one of `resources`.
    pub fn from_targets(
        dims: Dims,
        targets: Vec<TorusCoord>,
        resources: &[TorusCoord],
    ) -> Result<Self> {
        if targets.len() != dims.node_count() {
            return Err(Error::InvalidParameter(format!(
                "assignment covers {} nodes, torus has {}",
                targets.len(),
                dims.node_count()
            )));
        }
        let mut is_resource = vec![false; dims.node_count()];
        for &r in resources {
            dims.check(r)?;
            is_resource[dims.index(r)] = true;
        }
        for (i, &t) in targets.iter().enumerate() {
            dims.check(t)?;
            if !is_resource[dims.index(t)] {
                return Err(Error::InvalidParameter(format!(
                    "node {} is assigned to {t}, which is not a resource",
                    dims.coord(i)
                )));
            }
        }
        Ok(Self { dims, targets })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn target(&self, node: TorusCoord) -> TorusCoord {
        self.targets[self.dims.index(node)]
    }

    /// Targets in row-major node order.
    pub fn targets(&self) -> &[TorusCoord] {
        &self.targets
    }

    /// `(node, resource)` pairs in row-major node order.
    pub fn iter(&self) -> impl Iterator<Item = (TorusCoord, TorusCoord)> + '_ {
        self.targets
            .iter()
            .enumerate()
            .map(|(i, &t)| (self.dims.coord(i), t))
    }
}

/// Maps every node to its nearest resource under `metric`. Ties go to the
/// lexicographically smallest resource.
pub fn assign_resources(
    dims: Dims,
    resources: &[TorusCoord],
    metric: &Metric,
) -> Result<Assignment> {
    if resources.is_empty() {
        return Err(Error::InvalidParameter("resource set is empty".into()));
    }
    for &r in resources {
        dims.check(r)?;
    }
    let mut sorted = resources.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let targets = dims
        .coords()
        .map(|node| {
            let mut best = sorted[0];
            let mut best_d = metric.distance(node, best, dims);
            for &r in &sorted[1..] {
                let d = metric.distance(node, r, dims);
                if d < best_d {
                    best = r;
                    best_d = d;
                }
            }
            best
        })
        .collect();
    Ok(Assignment { dims, targets })
}

/// A hop-bounded placement: resources sorted row-major and a hop-nearest
/// assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretePlacement {
    dims: Dims,
    d: u32,
    resources: Vec<TorusCoord>,
    assignment: Assignment,
}

impl DiscretePlacement {
    pub fn new(dims: Dims, d: u32, mut resources: Vec<TorusCoord>) -> Result<Self> {
        resources.sort_unstable();
        resources.dedup();
        let assignment = assign_resources(dims, &resources, &Metric::Hops)?;
        Ok(Self {
            dims,
            d,
            resources,
            assignment,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn hop_bound(&self) -> u32 {
        self.d
    }

    pub fn resources(&self) -> &[TorusCoord] {
        &self.resources
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub covered: bool,
    /// Largest hop count from a node to its nearest resource.
    pub max_hops: usize,
    /// Nodes within the bound of more than one resource.
    pub multiply_covered: usize,
    pub uncovered: Vec<TorusCoord>,
}

/// Exhaustive coverage check of a placement against its own hop bound.
pub fn verify_coverage(p: &DiscretePlacement) -> CoverageReport {
    let dims = p.dims;
    let d = p.d as usize;
    let mut max_hops = 0;
    let mut multiply_covered = 0;
    let mut uncovered = Vec::new();
    for node in dims.coords() {
        let mut nearest = usize::MAX;
        let mut within = 0;
        for &r in &p.resources {
            let h = hops_unchecked(node, r, dims);
            nearest = nearest.min(h);
            if h <= d {
                within += 1;
            }
        }
        max_hops = max_hops.max(nearest);
        match within {
            0 => uncovered.push(node),
            1 => {}
            _ => multiply_covered += 1,
        }
    }
    CoverageReport {
        covered: uncovered.is_empty(),
        max_hops,
        multiply_covered,
        uncovered,
    }
}

/// Resources of the periodic Lee-sphere code restricted to `dims`: node
/// `(x, y)` is a resource iff `y = 2d^2 x (mod k)`.
fn lee_code(dims: Dims, d: u32) -> Vec<TorusCoord> {
    let k = sphere_size(d);
    let stride = (2 * (d as usize).pow(2)) % k;
    let mut out = Vec::new();
    for x in 0..dims.planes {
        let mut y = (stride * (x % k)) % k;
        while y < dims.slots {
            out.push(TorusCoord::new(x, y));
            y += k;
        }
    }
    out
}

/// The perfect `d`-hops placement on the `k x k` torus.
pub fn perfect_placement(d: u32) -> DiscretePlacement {
    let k = sphere_size(d);
    let dims = Dims {
        planes: k,
        slots: k,
    };
    DiscretePlacement::new(dims, d, lee_code(dims, d)).expect("code is non-empty and in range")
}

/// Adds resources until every node is within `d` hops of one. Each round
/// picks the node that covers the most uncovered nodes, smallest coordinate
/// first on ties.
fn greedy_augment(dims: Dims, d: usize, resources: &mut Vec<TorusCoord>) {
    let mut uncovered: Vec<TorusCoord> = dims
        .coords()
        .filter(|&n| resources.iter().all(|&r| hops_unchecked(n, r, dims) > d))
        .collect();

    while !uncovered.is_empty() {
        let mut best = uncovered[0];
        let mut best_gain = 0;
        for cand in dims.coords() {
            let gain = uncovered
                .iter()
                .filter(|&&u| hops_unchecked(cand, u, dims) <= d)
                .count();
            if gain > best_gain {
                best = cand;
                best_gain = gain;
            }
        }
        resources.push(best);
        uncovered.retain(|&u| hops_unchecked(best, u, dims) > d);
    }
}

/// Covering `d`-hops placement for arbitrary dimensions.
///
/// When `k` divides both sides this is the perfect tiling. Otherwise the
/// torus is covered by `ceil(N/k) x ceil(M/k)` blocks of the perfect code,
/// the last `k - r` rows and `k - s` columns are dropped and uncovered nodes
/// are fixed greedily. Tori smaller than `k` on both sides go straight to the
/// greedy cover.
pub fn quasi_perfect_placement(dims: Dims, d: u32) -> DiscretePlacement {
    if d == 0 {
        return DiscretePlacement::new(dims, 0, dims.coords().collect())
            .expect("torus is non-empty");
    }
    let k = sphere_size(d);
    let mut resources = if dims.planes < k && dims.slots < k {
        Vec::new()
    } else {
        lee_code(dims, d)
    };
    greedy_augment(dims, d as usize, &mut resources);
    DiscretePlacement::new(dims, d, resources).expect("greedy cover is non-empty")
}

/// Smallest set of nodes such that every node lies within `radius` of one
/// under `metric`. Exhaustive; limited to [`BRUTE_FORCE_NODE_LIMIT`] nodes.
pub fn brute_force_min_cover(dims: Dims, metric: &Metric, radius: f64) -> Result<Vec<TorusCoord>> {
    let n = dims.node_count();
    if n > BRUTE_FORCE_NODE_LIMIT {
        return Err(Error::Capacity {
            nodes: n,
            limit: BRUTE_FORCE_NODE_LIMIT,
        });
    }
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let balls: Vec<u64> = (0..n)
        .map(|c| {
            (0..n)
                .filter(|&u| metric.distance(dims.coord(c), dims.coord(u), dims) <= radius)
                .fold(0u64, |mask, u| mask | (1 << u))
        })
        .collect();
    let largest = balls
        .iter()
        .map(|b| b.count_ones())
        .max()
        .unwrap_or(1)
        .max(1) as usize;

    fn search(
        balls: &[u64],
        full: u64,
        largest: usize,
        covered: u64,
        picks_left: usize,
        chosen: &mut Vec<usize>,
    ) -> bool {
        if covered == full {
            return true;
        }
        let missing = (full & !covered).count_ones() as usize;
        if picks_left == 0 || missing > picks_left * largest {
            return false;
        }
        // Some resource must cover the lowest uncovered node.
        let target = (full & !covered).trailing_zeros() as usize;
        for (c, &ball) in balls.iter().enumerate() {
            if ball & (1 << target) == 0 {
                continue;
            }
            chosen.push(c);
            if search(balls, full, largest, covered | ball, picks_left - 1, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    let lower = n.div_ceil(largest);
    for size in lower..=n {
        let mut chosen = Vec::with_capacity(size);
        if search(&balls, full, largest, 0, size, &mut chosen) {
            let mut out: Vec<TorusCoord> = chosen.into_iter().map(|i| dims.coord(i)).collect();
            out.sort_unstable();
            return Ok(out);
        }
    }
    unreachable!("every node as a resource is always a cover")
}

/// Minimum-cardinality `d`-hops placement found by exhaustive search.
pub fn brute_force_min_placement(dims: Dims, d: u32) -> Result<DiscretePlacement> {
    let resources = brute_force_min_cover(dims, &Metric::Hops, d as f64)?;
    DiscretePlacement::new(dims, d, resources)
}
