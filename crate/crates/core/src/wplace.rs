//! Real d-distance placement on a torus with unequal hop lengths.
//!
//! The shorter hop length `D_A` and the longer `D_B` decide the branch:
//!
//! * `d >= D_B`: stretch the long axis into a virtual torus of
//!   `ceil(len_B * D_B / D_A)` nodes so both axes have hop length `D_A`, place
//!   `floor(d / D_A)` hops there, and map the stretched coordinates back with
//!   `floor(y * len_B / len_B')`. Rounding costs at most one long hop.
//! * `D_A <= d < D_B`: only short hops are affordable, so every line along the
//!   short axis is covered on its own with stride `2 floor(d / D_A) + 1`.
//! * `d < D_A`: every node is a resource.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::{self, HopWeights, MetricKind, PhysicalConstants, ShellParams};
use crate::torus::{
    self, assign_resources, quasi_perfect_placement, Assignment, Dims, DiscretePlacement, Metric,
    TorusCoord,
};

/// Weighted torus distance: inter-plane weight times plane hops plus
/// intra-plane weight times slot hops, wraparound on both axes.
pub fn weighted_torus_distance(
    a: TorusCoord,
    b: TorusCoord,
    dims: Dims,
    weights: &HopWeights,
) -> Result<f64> {
    dims.check(a)?;
    dims.check(b)?;
    Ok(Metric::Weighted(*weights).distance(a, b, dims))
}

/// A distance bound as written by the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceBound {
    Km(f64),
    Ms(f64),
}

impl DistanceBound {
    pub fn value(&self) -> f64 {
        match *self {
            DistanceBound::Km(v) | DistanceBound::Ms(v) => v,
        }
    }

    pub fn to_km(&self, consts: &PhysicalConstants) -> Result<f64> {
        match *self {
            DistanceBound::Km(v) => Ok(v),
            DistanceBound::Ms(v) => geom::ms_to_km(v, consts),
        }
    }
}

impl fmt::Display for DistanceBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceBound::Km(v) => write!(f, "{v}km"),
            DistanceBound::Ms(v) => write!(f, "{v}ms"),
        }
    }
}

/// Quality target. Parses from `hops:<int>`, `max:<value><unit>` or
/// `mean:<value><unit>` with unit `ms` or `km`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SloSpec {
    Hops(u32),
    MaxDistance(DistanceBound),
    MeanDistance(DistanceBound),
}

impl SloSpec {
    /// The distance bound in km, `None` for hop targets.
    pub fn bound_km(&self, consts: &PhysicalConstants) -> Result<Option<f64>> {
        match self {
            SloSpec::Hops(_) => Ok(None),
            SloSpec::MaxDistance(b) | SloSpec::MeanDistance(b) => b.to_km(consts).map(Some),
        }
    }

    pub fn metric(&self) -> Option<MetricKind> {
        match self {
            SloSpec::Hops(_) => None,
            SloSpec::MaxDistance(_) => Some(MetricKind::Max),
            SloSpec::MeanDistance(_) => Some(MetricKind::Mean),
        }
    }
}

impl fmt::Display for SloSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SloSpec::Hops(d) => write!(f, "hops:{d}"),
            SloSpec::MaxDistance(b) => write!(f, "max:{b}"),
            SloSpec::MeanDistance(b) => write!(f, "mean:{b}"),
        }
    }
}

impl FromStr for SloSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidParameter(format!("malformed SLO '{s}': {why}"));
        let (kind, value) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| bad("expected <kind>:<value>"))?;
        let kind = kind.trim().to_ascii_lowercase();
        let value = value.trim();
        if kind == "hops" {
            let d = value
                .parse::<u32>()
                .map_err(|_| bad("hop count must be a non-negative integer"))?;
            return Ok(SloSpec::Hops(d));
        }
        let (number, unit) = if let Some(n) = value.strip_suffix("ms") {
            (n, "ms")
        } else if let Some(n) = value.strip_suffix("km") {
            (n, "km")
        } else {
            return Err(bad("distance needs a unit, ms or km"));
        };
        let v: f64 = number
            .trim()
            .parse()
            .map_err(|_| bad("distance value is not a number"))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(bad("distance must be positive"));
        }
        let bound = if unit == "ms" {
            DistanceBound::Ms(v)
        } else {
            DistanceBound::Km(v)
        };
        match kind.as_str() {
            "max" => Ok(SloSpec::MaxDistance(bound)),
            "mean" => Ok(SloSpec::MeanDistance(bound)),
            _ => Err(bad("kind must be hops, max or mean")),
        }
    }
}

/// Which construction produced a weighted placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Hop placement of `hop_radius` on a virtual torus. `transposed` is set
    /// when the plane axis was the one stretched.
    Stretched {
        virtual_dims: Dims,
        hop_radius: u32,
        transposed: bool,
    },
    /// Independent cover of each line along the short axis.
    Lines {
        stride: usize,
        along_planes: bool,
    },
    AllNodes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPlacement {
    dims: Dims,
    weights: HopWeights,
    d_km: f64,
    resources: Vec<TorusCoord>,
    assignment: Assignment,
    epsilon_bound_km: f64,
    max_distance_km: f64,
    branch: Branch,
}

impl WeightedPlacement {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn weights(&self) -> &HopWeights {
        &self.weights
    }

    pub fn d_km(&self) -> f64 {
        self.d_km
    }

    pub fn resources(&self) -> &[TorusCoord] {
        &self.resources
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    /// Slack over `d` that the construction may need.
    pub fn epsilon_bound_km(&self) -> f64 {
        self.epsilon_bound_km
    }

    /// Largest weighted distance from a node to its assigned resource.
    pub fn max_distance_km(&self) -> f64 {
        self.max_distance_km
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }
}

/// Places resources so that every node has one within `d_km + epsilon` under
/// the weighted torus metric.
pub fn real_d_placement(dims: Dims, weights: HopWeights, d_km: f64) -> Result<WeightedPlacement> {
    weights.validate()?;
    if !(d_km.is_finite() && d_km > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "distance bound must be positive, got {d_km} km"
        )));
    }
    let (inter, intra) = (weights.inter_plane_km, weights.intra_plane_km);
    let short = inter.min(intra);
    let long = inter.max(intra);

    let (resources, epsilon, branch) = if d_km < short {
        (dims.coords().collect(), 0.0, Branch::AllNodes)
    } else if d_km < long {
        let radius = (d_km / short).floor() as usize;
        let stride = 2 * radius + 1;
        let along_planes = inter <= intra;
        (
            line_cover(dims, stride, along_planes),
            0.0,
            Branch::Lines {
                stride,
                along_planes,
            },
        )
    } else {
        let transposed = intra < inter;
        let frame = if transposed { dims.transposed() } else { dims };
        let stretched = ((frame.slots as f64) * (long / short)).ceil() as usize;
        let virtual_dims = Dims::new(frame.planes, stretched)?;
        let hop_radius = (d_km / short).floor() as u32;
        let virtual_placement = quasi_perfect_placement(virtual_dims, hop_radius);
        let resources = virtual_placement
            .resources()
            .iter()
            .map(|r| {
                let back = TorusCoord::new(r.plane, r.slot * frame.slots / stretched);
                if transposed {
                    back.transposed()
                } else {
                    back
                }
            })
            .collect();
        (
            resources,
            long,
            Branch::Stretched {
                virtual_dims,
                hop_radius,
                transposed,
            },
        )
    };

    let mut resources: Vec<TorusCoord> = resources;
    resources.sort_unstable();
    resources.dedup();
    let metric = Metric::Weighted(weights);
    let assignment = assign_resources(dims, &resources, &metric)?;

    let bound = d_km + epsilon;
    let mut max_distance_km = 0.0_f64;
    for (node, r) in assignment.iter() {
        let dist = metric.distance(node, r, dims);
        if dist > bound * (1.0 + 1e-12) {
            return Err(Error::CoverageViolation {
                plane: node.plane,
                slot: node.slot,
                distance: dist,
                bound,
            });
        }
        max_distance_km = max_distance_km.max(dist);
    }

    Ok(WeightedPlacement {
        dims,
        weights,
        d_km,
        resources,
        assignment,
        epsilon_bound_km: epsilon,
        max_distance_km,
        branch,
    })
}

/// Resources every `stride` positions, starting at 0, on each line along the
/// plane axis (`along_planes`) or the slot axis.
fn line_cover(dims: Dims, stride: usize, along_planes: bool) -> Vec<TorusCoord> {
    let (line_len, lines) = if along_planes {
        (dims.planes, dims.slots)
    } else {
        (dims.slots, dims.planes)
    };
    let mut out = Vec::with_capacity(lines * line_len.div_ceil(stride));
    for line in 0..lines {
        for pos in (0..line_len).step_by(stride) {
            out.push(if along_planes {
                TorusCoord::new(pos, line)
            } else {
                TorusCoord::new(line, pos)
            });
        }
    }
    out
}

/// A placement of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Placement {
    Discrete(DiscretePlacement),
    Weighted(WeightedPlacement),
}

impl Placement {
    pub fn dims(&self) -> Dims {
        match self {
            Placement::Discrete(p) => p.dims(),
            Placement::Weighted(p) => p.dims(),
        }
    }

    pub fn resources(&self) -> &[TorusCoord] {
        match self {
            Placement::Discrete(p) => p.resources(),
            Placement::Weighted(p) => p.resources(),
        }
    }

    pub fn assignment(&self) -> &Assignment {
        match self {
            Placement::Discrete(p) => p.assignment(),
            Placement::Weighted(p) => p.assignment(),
        }
    }

    pub fn len(&self) -> usize {
        self.resources().len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources().is_empty()
    }

    pub fn epsilon_bound_km(&self) -> f64 {
        match self {
            Placement::Discrete(_) => 0.0,
            Placement::Weighted(p) => p.epsilon_bound_km(),
        }
    }
}

/// Builds the placement a shell needs for `slo`: hop targets use the
/// discrete construction on `N x M`; distance targets use the weighted one
/// with the maximum or mean inter-plane hop length.
pub fn placement_for_slo(
    shell: &ShellParams,
    slo: &SloSpec,
    consts: &PhysicalConstants,
) -> Result<Placement> {
    shell.validate()?;
    consts.validate()?;
    let dims = Dims::new(shell.planes, shell.sats_per_plane)?;
    match slo {
        SloSpec::Hops(d) => Ok(Placement::Discrete(torus::quasi_perfect_placement(
            dims, *d,
        ))),
        SloSpec::MaxDistance(bound) | SloSpec::MeanDistance(bound) => {
            let metric = slo.metric().expect("distance SLO has a metric");
            let weights = HopWeights::for_shell(shell, consts, metric)?;
            let d_km = bound.to_km(consts)?;
            real_d_placement(dims, weights, d_km).map(Placement::Weighted)
        }
    }
}
