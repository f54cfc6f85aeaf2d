//! Time-stepped simulation of one shell.
//!
//! Satellites move on circular orbits around a spherical Earth in an
//! inertial frame. Plane `p` has its ascending node at longitude `2*pi*p/N`;
//! slot `m` starts at argument of latitude `2*pi*m/M` (plus an optional
//! per-plane phase offset). The +GRID links never change, only their lengths
//! do, so each step rebuilds the edge weights and reruns shortest paths from
//! every resource to the nodes assigned to it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{orbital_period, PhysicalConstants, ShellParams};
use crate::torus::{Assignment, Dims, TorusCoord};

/// Default sampling step for desk-scale runs.
pub const DEFAULT_STEP_S: f64 = 10.0;
/// Length of the full-scale run: one day.
pub const FULL_DAY_DURATION_S: f64 = 86_400.0;
pub const FULL_DAY_STEP_S: f64 = 1.0;

/// Steps evaluated in parallel before results are handed out in order.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub duration_s: f64,
    pub step_s: f64,
    /// Extra argument of latitude added per plane index, radians.
    pub phase_offset_rad: f64,
}

impl SimConfig {
    pub fn new(duration_s: f64, step_s: f64) -> Result<Self> {
        let cfg = Self {
            duration_s,
            step_s,
            phase_offset_rad: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// One orbital period at [`DEFAULT_STEP_S`].
    pub fn one_period(shell: &ShellParams, consts: &PhysicalConstants) -> Self {
        Self {
            duration_s: orbital_period(shell, consts),
            step_s: DEFAULT_STEP_S,
            phase_offset_rad: 0.0,
        }
    }

    pub fn full_day() -> Self {
        Self {
            duration_s: FULL_DAY_DURATION_S,
            step_s: FULL_DAY_STEP_S,
            phase_offset_rad: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_s.is_finite() && self.step_s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step must be positive, got {} s",
                self.step_s
            )));
        }
        if !(self.duration_s.is_finite() && self.duration_s >= self.step_s) {
            return Err(Error::InvalidParameter(format!(
                "duration must be at least one step, got {} s for a {} s step",
                self.duration_s, self.step_s
            )));
        }
        Ok(())
    }

    /// Number of samples at `t = 0, step, ..., <= duration`.
    pub fn sample_count(&self) -> usize {
        // Tolerate durations that are a whole number of steps up to rounding.
        (self.duration_s / self.step_s + 1e-9).floor() as usize + 1
    }

    pub fn time_at(&self, k: usize) -> f64 {
        k as f64 * self.step_s
    }
}

/// Precomputed orbit state for a shell.
#[derive(Debug, Clone, Copy)]
struct Orbit {
    dims: Dims,
    radius: f64,
    period: f64,
    cos_i: f64,
    sin_i: f64,
    phase_offset: f64,
}

impl Orbit {
    fn new(shell: &ShellParams, consts: &PhysicalConstants, phase_offset: f64) -> Result<Self> {
        shell.validate()?;
        consts.validate()?;
        let i = shell.inclination_rad();
        Ok(Self {
            dims: Dims::new(shell.planes, shell.sats_per_plane)?,
            radius: shell.orbit_radius_km(consts),
            period: orbital_period(shell, consts),
            cos_i: i.cos(),
            sin_i: i.sin(),
            phase_offset,
        })
    }

    fn position(&self, c: TorusCoord, t: f64) -> [f64; 3] {
        let raan = 2.0 * PI * c.plane as f64 / self.dims.planes as f64;
        let u = 2.0 * PI * c.slot as f64 / self.dims.slots as f64
            + 2.0 * PI * (t / self.period).rem_euclid(1.0)
            + self.phase_offset * c.plane as f64;
        let (sin_o, cos_o) = raan.sin_cos();
        let (sin_u, cos_u) = u.sin_cos();
        [
            self.radius * (cos_o * cos_u - sin_o * sin_u * self.cos_i),
            self.radius * (sin_o * cos_u + cos_o * sin_u * self.cos_i),
            self.radius * sin_u * self.sin_i,
        ]
    }

    fn graph_at(&self, t: f64) -> IslGraph {
        let dims = self.dims;
        let positions: Vec<[f64; 3]> = dims.coords().map(|c| self.position(c, t)).collect();
        let mut intra = Vec::with_capacity(dims.node_count());
        let mut inter = Vec::with_capacity(dims.node_count());
        for c in dims.coords() {
            let here = positions[dims.index(c)];
            let next_slot = TorusCoord::new(c.plane, (c.slot + 1) % dims.slots);
            let next_plane = TorusCoord::new((c.plane + 1) % dims.planes, c.slot);
            intra.push(euclid(here, positions[dims.index(next_slot)]));
            inter.push(euclid(here, positions[dims.index(next_plane)]));
        }
        IslGraph { dims, intra, inter }
    }
}

fn euclid(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Inertial position in km of satellite `coord` at time `t`.
pub fn satellite_position(
    shell: &ShellParams,
    consts: &PhysicalConstants,
    coord: TorusCoord,
    t: f64,
) -> Result<[f64; 3]> {
    let orbit = Orbit::new(shell, consts, 0.0)?;
    orbit.dims.check(coord)?;
    Ok(orbit.position(coord, t))
}

/// +GRID links of a shell with their lengths at one instant. Every node owns
/// the link to its slot successor and the link to the same slot in the next
/// plane, giving `2 N M` links with wraparound.
#[derive(Debug, Clone, PartialEq)]
pub struct IslGraph {
    dims: Dims,
    intra: Vec<f64>,
    inter: Vec<f64>,
}

impl IslGraph {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn edge_count(&self) -> usize {
        self.intra.len() + self.inter.len()
    }

    /// Length of the link `(p, m) - (p, m + 1)`.
    pub fn intra_length(&self, c: TorusCoord) -> f64 {
        self.intra[self.dims.index(c)]
    }

    /// Length of the link `(p, m) - (p + 1, m)`.
    pub fn inter_length(&self, c: TorusCoord) -> f64 {
        self.inter[self.dims.index(c)]
    }

    fn neighbors(&self, node: usize) -> [(usize, f64); 4] {
        let dims = self.dims;
        let c = dims.coord(node);
        let prev_slot = TorusCoord::new(c.plane, (c.slot + dims.slots - 1) % dims.slots);
        let next_slot = TorusCoord::new(c.plane, (c.slot + 1) % dims.slots);
        let prev_plane = TorusCoord::new((c.plane + dims.planes - 1) % dims.planes, c.slot);
        let next_plane = TorusCoord::new((c.plane + 1) % dims.planes, c.slot);
        [
            (dims.index(next_slot), self.intra[node]),
            (dims.index(prev_slot), self.intra[dims.index(prev_slot)]),
            (dims.index(next_plane), self.inter[node]),
            (dims.index(prev_plane), self.inter[dims.index(prev_plane)]),
        ]
    }
}

/// Link lengths of the shell at time `t`.
pub fn isl_lengths(shell: &ShellParams, consts: &PhysicalConstants, t: f64) -> Result<IslGraph> {
    if shell.planes < 2 && shell.sats_per_plane < 2 {
        return Err(Error::NoSuchLink {
            axis: "inter-satellite",
            count: 1,
        });
    }
    Ok(Orbit::new(shell, consts, 0.0)?.graph_at(t))
}

#[derive(Debug, Clone, Copy)]
struct Queued {
    dist: f64,
    node: usize,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // Reversed for a min-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Nodes grouped by the resource they are assigned to.
struct Partition {
    resources: Vec<usize>,
    sizes: Vec<usize>,
    /// Group index of every node.
    owner: Vec<usize>,
}

impl Partition {
    fn new(assignment: &Assignment) -> Self {
        let dims = assignment.dims();
        let mut group_of = vec![usize::MAX; dims.node_count()];
        let mut resources = Vec::new();
        let mut sizes = Vec::new();
        let mut owner = Vec::with_capacity(dims.node_count());
        for target in assignment.targets() {
            let r = dims.index(*target);
            if group_of[r] == usize::MAX {
                group_of[r] = resources.len();
                resources.push(r);
                sizes.push(0);
            }
            sizes[group_of[r]] += 1;
            owner.push(group_of[r]);
        }
        Self {
            resources,
            sizes,
            owner,
        }
    }
}

/// Buffers reused across Dijkstra runs. A node is settled in the current run
/// iff its stamp equals the run counter.
struct Scratch {
    dist: Vec<f64>,
    settled: Vec<u32>,
    run: u32,
    touched: Vec<usize>,
    heap: BinaryHeap<Queued>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            dist: vec![f64::INFINITY; n],
            settled: vec![0; n],
            run: 0,
            touched: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }
}

/// One Dijkstra per resource, stopped once all of its nodes are settled.
fn distances_with(graph: &IslGraph, partition: &Partition, scratch: &mut Scratch) -> Vec<f64> {
    let mut out = vec![f64::INFINITY; graph.dims.node_count()];
    for (group, (&source, &size)) in partition.resources.iter().zip(&partition.sizes).enumerate() {
        scratch.run += 1;
        let run = scratch.run;
        scratch.heap.clear();
        scratch.dist[source] = 0.0;
        scratch.touched.push(source);
        scratch.heap.push(Queued {
            dist: 0.0,
            node: source,
        });

        let mut remaining = size;
        while let Some(Queued { dist, node }) = scratch.heap.pop() {
            if scratch.settled[node] == run {
                continue;
            }
            scratch.settled[node] = run;
            if partition.owner[node] == group {
                out[node] = dist;
                remaining -= 1;
                if remaining == 0 {
                    break;
                }
            }
            for (next, w) in graph.neighbors(node) {
                if scratch.settled[next] == run {
                    continue;
                }
                let cand = dist + w;
                if cand < scratch.dist[next] {
                    if scratch.dist[next].is_infinite() {
                        scratch.touched.push(next);
                    }
                    scratch.dist[next] = cand;
                    scratch.heap.push(Queued {
                        dist: cand,
                        node: next,
                    });
                }
            }
        }
        for v in scratch.touched.drain(..) {
            scratch.dist[v] = f64::INFINITY;
        }
    }
    out
}

/// Shortest-path length through the link graph from every node to its
/// assigned resource, in row-major node order.
pub fn resource_distances(graph: &IslGraph, assignment: &Assignment) -> Result<Vec<f64>> {
    if graph.dims != assignment.dims() {
        return Err(Error::InvalidParameter(format!(
            "assignment is for a {}x{} torus, graph is {}x{}",
            assignment.dims().planes,
            assignment.dims().slots,
            graph.dims.planes,
            graph.dims.slots
        )));
    }
    let partition = Partition::new(assignment);
    let mut scratch = Scratch::new(graph.dims.node_count());
    Ok(distances_with(graph, &partition, &mut scratch))
}

/// Distances of all nodes at one sampled instant.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSample {
    pub t: f64,
    pub distances: Vec<f64>,
}

impl StepSample {
    pub fn mean(&self) -> f64 {
        self.distances.iter().sum::<f64>() / self.distances.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs the simulation and hands every sample to `sink` in ascending time
/// order. Samples are computed in parallel; the output does not depend on
/// the thread count.
pub fn simulate<F>(
    shell: &ShellParams,
    consts: &PhysicalConstants,
    assignment: &Assignment,
    config: &SimConfig,
    mut sink: F,
) -> Result<()>
where
    F: FnMut(StepSample),
{
    config.validate()?;
    let orbit = Orbit::new(shell, consts, config.phase_offset_rad)?;
    if orbit.dims != assignment.dims() {
        return Err(Error::InvalidParameter(format!(
            "placement is for a {}x{} torus, shell is {}x{}",
            assignment.dims().planes,
            assignment.dims().slots,
            orbit.dims.planes,
            orbit.dims.slots
        )));
    }
    let partition = Partition::new(assignment);
    let n = orbit.dims.node_count();
    let total = config.sample_count();

    let mut start = 0;
    while start < total {
        let end = (start + CHUNK).min(total);
        let chunk: Vec<StepSample> = (start..end)
            .into_par_iter()
            .map_init(
                || Scratch::new(n),
                |scratch, k| {
                    let t = config.time_at(k);
                    let graph = orbit.graph_at(t);
                    StepSample {
                        t,
                        distances: distances_with(&graph, &partition, scratch),
                    }
                },
            )
            .collect();
        chunk.into_iter().for_each(&mut sink);
        start = end;
    }
    Ok(())
}

/// Per-step distances and their aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub dims: Dims,
    pub times: Vec<f64>,
    pub mean_km: Vec<f64>,
    pub max_km: Vec<f64>,
    /// `per_node[k][i]`: distance of node `i` (row-major) at `times[k]`.
    pub per_node: Vec<Vec<f64>>,
}

impl TimeSeries {
    /// Mean over all samples of each node's distance, row-major.
    pub fn node_time_mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.dims.node_count()];
        for row in &self.per_node {
            for (a, d) in acc.iter_mut().zip(row) {
                *a += d;
            }
        }
        let k = self.per_node.len().max(1) as f64;
        acc.iter_mut().for_each(|a| *a /= k);
        acc
    }

    pub fn overall_max(&self) -> f64 {
        self.max_km.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs the whole simulation in memory.
pub fn run_simulation(
    shell: &ShellParams,
    consts: &PhysicalConstants,
    assignment: &Assignment,
    config: &SimConfig,
) -> Result<TimeSeries> {
    let mut ts = TimeSeries {
        dims: assignment.dims(),
        times: Vec::new(),
        mean_km: Vec::new(),
        max_km: Vec::new(),
        per_node: Vec::new(),
    };
    simulate(shell, consts, assignment, config, |s| {
        ts.times.push(s.t);
        ts.mean_km.push(s.mean());
        ts.max_km.push(s.max());
        ts.per_node.push(s.distances);
    })?;
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{
        inter_plane_hop_at, inter_plane_hop_max, intra_plane_hop, HopWeights, MetricKind,
    };
    use crate::torus::{quasi_perfect_placement, DiscretePlacement};
    use crate::wplace::weighted_torus_distance;

    fn shell() -> ShellParams {
        ShellParams::new(6, 8, 700.0, 60.0).unwrap()
    }

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn norm(p: [f64; 3]) -> f64 {
        (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
    }

    #[test]
    fn positions() {
        let (s, c) = (shell(), consts());
        let r = s.orbit_radius_km(&c);
        let p0 = satellite_position(&s, &c, TorusCoord::new(0, 0), 0.0).unwrap();
        assert!((p0[0] - r).abs() < 1e-9 && p0[1].abs() < 1e-9 && p0[2].abs() < 1e-9);

        let period = orbital_period(&s, &c);
        let p1 = satellite_position(&s, &c, TorusCoord::new(0, 0), period).unwrap();
        assert!(euclid(p0, p1) < 1e-6);

        for node in Dims::new(6, 8).unwrap().coords() {
            for t in [0.0, 123.4, 2000.0, 1e5] {
                let p = satellite_position(&s, &c, node, t).unwrap();
                assert!((norm(p) - r).abs() < 1e-9 * r);
            }
        }
        assert!(satellite_position(&s, &c, TorusCoord::new(6, 0), 0.0).is_err());
    }

    #[test]
    fn link_lengths_follow_closed_forms() {
        let (s, c) = (shell(), consts());
        let period = orbital_period(&s, &c);
        let intra = intra_plane_hop(&s, &c).unwrap();
        let dims = Dims::new(6, 8).unwrap();
        for t in [0.0, 17.0, period / 3.0, 4321.0] {
            let g = isl_lengths(&s, &c, t).unwrap();
            assert_eq!(g.edge_count(), 2 * 6 * 8);
            for node in dims.coords() {
                assert!(((g.intra_length(node) - intra) / intra).abs() < 1e-9);
                let phase_t = t + node.slot as f64 * period / 8.0;
                let expected = inter_plane_hop_at(&s, &c, phase_t).unwrap();
                assert!(((g.inter_length(node) - expected) / expected).abs() < 1e-6);
            }
        }
        let g = isl_lengths(&s, &c, 0.0).unwrap();
        let max = inter_plane_hop_max(&s, &c).unwrap();
        assert!((g.inter_length(TorusCoord::new(0, 0)) - max).abs() < 1e-9 * max);
    }

    #[test]
    fn lengths_repeat_every_period() {
        let (s, c) = (shell(), consts());
        let period = orbital_period(&s, &c);
        let a = isl_lengths(&s, &c, 1000.0).unwrap();
        let b = isl_lengths(&s, &c, 1000.0 + 3.0 * period).unwrap();
        for node in Dims::new(6, 8).unwrap().coords() {
            assert!((a.inter_length(node) - b.inter_length(node)).abs() < 1e-6);
            assert!((a.intra_length(node) - b.intra_length(node)).abs() < 1e-6);
        }
    }

    #[test]
    fn distances_to_resources() {
        let (s, c) = (shell(), consts());
        let dims = Dims::new(6, 8).unwrap();
        let p = quasi_perfect_placement(dims, 1);
        let weights = HopWeights::for_shell(&s, &c, MetricKind::Max).unwrap();
        for t in [0.0, 500.0, 2500.0] {
            let g = isl_lengths(&s, &c, t).unwrap();
            let d = resource_distances(&g, p.assignment()).unwrap();
            for (node, r) in p.assignment().iter() {
                let got = d[dims.index(node)];
                if node == r {
                    assert_eq!(got, 0.0);
                }
                let bound = weighted_torus_distance(node, r, dims, &weights).unwrap();
                assert!(got <= bound * (1.0 + 1e-12), "{node}: {got} > {bound}");
            }
        }

        // A neighbour in the same plane is exactly one link away.
        let single = DiscretePlacement::new(dims, 1, vec![TorusCoord::new(0, 0)]).unwrap();
        let g = isl_lengths(&s, &c, 0.0).unwrap();
        let d = resource_distances(&g, single.assignment()).unwrap();
        assert_eq!(
            d[dims.index(TorusCoord::new(0, 1))],
            g.intra_length(TorusCoord::new(0, 0))
        );

        let wrong = quasi_perfect_placement(Dims::new(5, 5).unwrap(), 1);
        assert!(resource_distances(&g, wrong.assignment()).is_err());
    }

    #[test]
    fn simulation_rows_and_aggregates() {
        let (s, c) = (shell(), consts());
        let dims = Dims::new(6, 8).unwrap();
        let cfg = SimConfig::one_period(&s, &c);
        let p = quasi_perfect_placement(dims, 1);
        let ts = run_simulation(&s, &c, p.assignment(), &cfg).unwrap();
        let period = orbital_period(&s, &c);
        assert_eq!(ts.times.len(), (period / 10.0).floor() as usize + 1);
        for k in 0..ts.times.len() {
            assert!(ts.max_km[k] >= ts.mean_km[k]);
            assert!(ts.per_node[k].iter().all(|&d| d >= 0.0 && d.is_finite()));
        }
        assert_eq!(ts, run_simulation(&s, &c, p.assignment(), &cfg).unwrap());

        let all = quasi_perfect_placement(dims, 0);
        let ts = run_simulation(&s, &c, all.assignment(), &cfg).unwrap();
        assert!(ts.per_node.iter().flatten().all(|&d| d == 0.0));
        assert_eq!(ts.overall_max(), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(10.0, 0.0).is_err());
        assert!(SimConfig::new(5.0, 10.0).is_err());
        assert_eq!(SimConfig::new(100.0, 10.0).unwrap().sample_count(), 11);
        assert_eq!(SimConfig::full_day().sample_count(), 86_401);
    }
}
