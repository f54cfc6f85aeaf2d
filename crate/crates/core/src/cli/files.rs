//! Placement files and time-series CSVs.
//!
//! Aggregate CSV: `t_s,mean_km,max_km`. Per-node CSV:
//! `t_s,plane,slot,distance_km`. Numbers carry six significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geom::{HopWeights, PhysicalConstants, ShellParams};
use crate::orbitsim::StepSample;
use crate::torus::{Assignment, Dims, TorusCoord};
use crate::wplace::{Placement, SloSpec};

pub const AGGREGATE_HEADER: [&str; 3] = ["t_s", "mean_km", "max_km"];
pub const PER_NODE_HEADER: [&str; 4] = ["t_s", "plane", "slot", "distance_km"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentEntry {
    pub node: [usize; 2],
    pub resource: [usize; 2],
}

/// On-disk form of a placement and everything needed to simulate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementFile {
    pub tool_version: String,
    pub shell: ShellParams,
    pub constants: PhysicalConstants,
    pub slo: String,
    /// Hop weights for distance SLOs, absent for hop SLOs.
    pub weights: Option<HopWeights>,
    pub d_km: Option<f64>,
    pub d_hops: Option<u32>,
    pub epsilon_bound_km: f64,
    pub resources: Vec<[usize; 2]>,
    pub assignment: Vec<AssignmentEntry>,
}

fn pair(c: TorusCoord) -> [usize; 2] {
    [c.plane, c.slot]
}

fn coord(p: [usize; 2]) -> TorusCoord {
    TorusCoord::new(p[0], p[1])
}

impl PlacementFile {
    pub fn new(
        shell: &ShellParams,
        consts: &PhysicalConstants,
        slo: &SloSpec,
        placement: &Placement,
    ) -> Self {
        let (weights, d_km, d_hops) = match placement {
            Placement::Discrete(p) => (None, None, Some(p.hop_bound())),
            Placement::Weighted(p) => (Some(*p.weights()), Some(p.d_km()), None),
        };
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            shell: *shell,
            constants: *consts,
            slo: slo.to_string(),
            weights,
            d_km,
            d_hops,
            epsilon_bound_km: placement.epsilon_bound_km(),
            resources: placement.resources().iter().copied().map(pair).collect(),
            assignment: placement
                .assignment()
                .iter()
                .map(|(n, r)| AssignmentEntry {
                    node: pair(n),
                    resource: pair(r),
                })
                .collect(),
        }
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let file = File::open(path).map_err(|e| format!("cannot open {}: {e}", path.display()))?;
        let parsed: Self = serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|e| format!("{} is not a placement file: {e}", path.display()))?;
        parsed
            .validate()
            .map_err(|e| format!("{}: {e}", path.display()))?;
        Ok(parsed)
    }

    pub fn write(&self, path: &Path) -> Result<(), String> {
        let fail = |e: &dyn std::fmt::Display| format!("cannot write {}: {e}", path.display());
        let file = File::create(path).map_err(|e| fail(&e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self).map_err(|e| fail(&e))?;
        w.write_all(b"\n").map_err(|e| fail(&e))?;
        w.flush().map_err(|e| fail(&e))
    }

    pub fn validate(&self) -> Result<(), String> {
        self.shell.validate().map_err(|e| e.to_string())?;
        self.constants.validate().map_err(|e| e.to_string())?;
        self.slo.parse::<SloSpec>().map_err(|e| e.to_string())?;
        if let Some(w) = &self.weights {
            w.validate().map_err(|e| e.to_string())?;
        }
        if self.resources.is_empty() {
            return Err("placement has no resources".into());
        }
        self.assignment().map(|_| ())
    }

    pub fn dims(&self) -> Dims {
        Dims {
            planes: self.shell.planes,
            slots: self.shell.sats_per_plane,
        }
    }

    /// The assignment as a total map; entries may appear in any order.
    pub fn assignment(&self) -> Result<Assignment, String> {
        let dims = self.dims();
        let mut targets: Vec<Option<TorusCoord>> = vec![None; dims.node_count()];
        for e in &self.assignment {
            let node = coord(e.node);
            dims.check(node).map_err(|e| e.to_string())?;
            let slot = &mut targets[dims.index(node)];
            if slot.is_some() {
                return Err(format!("node {node} is assigned twice"));
            }
            *slot = Some(coord(e.resource));
        }
        let targets = targets
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                t.ok_or_else(|| format!("node {} has no assigned resource", dims.coord(i)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let resources: Vec<TorusCoord> = self.resources.iter().copied().map(coord).collect();
        Assignment::from_targets(dims, targets, &resources).map_err(|e| e.to_string())
    }
}

/// Formats `x` with `digits` significant digits, `%g` style.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_fraction(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

const SIG_DIGITS: usize = 6;

/// Streams samples into the aggregate CSV and optionally the per-node CSV.
pub struct SeriesWriter<W: Write> {
    aggregate: csv::Writer<W>,
    per_node: Option<(csv::Writer<W>, Dims)>,
    rows: usize,
}

impl SeriesWriter<BufWriter<File>> {
    pub fn create(aggregate: &Path, per_node: Option<(&Path, Dims)>) -> Result<Self, String> {
        let open = |p: &Path| {
            File::create(p)
                .map(BufWriter::new)
                .map_err(|e| format!("cannot write {}: {e}", p.display()))
        };
        let agg = open(aggregate)?;
        let nodes = match per_node {
            Some((p, dims)) => Some((open(p)?, dims)),
            None => None,
        };
        Self::new(agg, nodes)
    }
}

impl<W: Write> SeriesWriter<W> {
    pub fn new(aggregate: W, per_node: Option<(W, Dims)>) -> Result<Self, String> {
        let mut agg = csv::Writer::from_writer(aggregate);
        agg.write_record(AGGREGATE_HEADER)
            .map_err(|e| e.to_string())?;
        let per_node = match per_node {
            Some((w, dims)) => {
                let mut w = csv::Writer::from_writer(w);
                w.write_record(PER_NODE_HEADER).map_err(|e| e.to_string())?;
                Some((w, dims))
            }
            None => None,
        };
        Ok(Self {
            aggregate: agg,
            per_node,
            rows: 0,
        })
    }

    pub fn push(&mut self, sample: &StepSample) -> Result<(), String> {
        let t = format_sig(sample.t, SIG_DIGITS);
        self.aggregate
            .write_record([
                t.as_str(),
                &format_sig(sample.mean(), SIG_DIGITS),
                &format_sig(sample.max(), SIG_DIGITS),
            ])
            .map_err(|e| e.to_string())?;
        if let Some((w, dims)) = &mut self.per_node {
            for (i, d) in sample.distances.iter().enumerate() {
                let c = dims.coord(i);
                w.write_record([
                    t.as_str(),
                    &c.plane.to_string(),
                    &c.slot.to_string(),
                    &format_sig(*d, SIG_DIGITS),
                ])
                .map_err(|e| e.to_string())?;
            }
        }
        self.rows += 1;
        Ok(())
    }

    /// Flushes both files and returns the number of rows in the aggregate one.
    pub fn finish(mut self) -> Result<usize, String> {
        self.aggregate.flush().map_err(|e| e.to_string())?;
        if let Some((w, _)) = &mut self.per_node {
            w.flush().map_err(|e| e.to_string())?;
        }
        Ok(self.rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct AggregateRow {
    pub t_s: f64,
    pub mean_km: f64,
    pub max_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct NodeRow {
    pub t_s: f64,
    pub plane: usize,
    pub slot: usize,
    pub distance_km: f64,
}

fn read_rows<T: serde::de::DeserializeOwned>(
    path: &Path,
    header: &[&str],
) -> Result<Vec<T>, String> {
    let mut rdr =
        csv::Reader::from_path(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let found = rdr
        .headers()
        .map_err(|e| format!("{}: {e}", path.display()))?
        .clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(format!(
            "{}: expected header '{}', found '{}'",
            path.display(),
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        ));
    }
    let rows = rdr
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| format!("{}: {e}", path.display()))?;
    if rows.is_empty() {
        return Err(format!("{}: no data rows", path.display()));
    }
    Ok(rows)
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateRow>, String> {
    let rows: Vec<AggregateRow> = read_rows(path, &AGGREGATE_HEADER)?;
    if rows.iter().any(|r| !(r.mean_km >= 0.0 && r.max_km >= 0.0)) {
        return Err(format!("{}: negative or missing distance", path.display()));
    }
    Ok(rows)
}

pub fn read_per_node(path: &Path) -> Result<Vec<NodeRow>, String> {
    let rows: Vec<NodeRow> = read_rows(path, &PER_NODE_HEADER)?;
    if rows
        .iter()
        .any(|r| r.distance_km.is_nan() || r.distance_km < 0.0)
    {
        return Err(format!("{}: negative or missing distance", path.display()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wplace::placement_for_slo;
    use proptest::prelude::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(2997.92458, 6), "2997.92");
        assert_eq!(format_sig(86400.0, 6), "86400");
        assert_eq!(format_sig(123456.7, 6), "123457");
        assert_eq!(format_sig(999999.7, 6), "1e6");
        assert_eq!(format_sig(1234567.0, 6), "1.23457e6");
        assert_eq!(format_sig(0.000123456789, 6), "0.000123457");
        assert_eq!(format_sig(1.5e-7, 6), "1.5e-7");
        assert_eq!(format_sig(10.0, 6), "10");
        assert_eq!("1.23457e6".parse::<f64>().unwrap(), 1234570.0);
    }

    #[test]
    fn placement_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        let shell = ShellParams::new(5, 75, 1275.0, 81.0).unwrap();
        let consts = PhysicalConstants::default();
        for slo in ["hops:1", "max:10ms", "mean:2997.92km"] {
            let slo: SloSpec = slo.parse().unwrap();
            let p = placement_for_slo(&shell, &slo, &consts).unwrap();
            let file = PlacementFile::new(&shell, &consts, &slo, &p);
            file.write(&path).unwrap();
            let back = PlacementFile::read(&path).unwrap();
            assert_eq!(back, file);
            assert_eq!(&back.assignment().unwrap(), p.assignment());
        }
    }

    #[test]
    fn placement_file_rejects_inconsistent_assignment() {
        let shell = ShellParams::new(3, 3, 500.0, 50.0).unwrap();
        let consts = PhysicalConstants::default();
        let slo = SloSpec::Hops(1);
        let p = placement_for_slo(&shell, &slo, &consts).unwrap();
        let good = PlacementFile::new(&shell, &consts, &slo, &p);
        good.validate().unwrap();

        let mut missing = good.clone();
        missing.assignment.pop();
        assert!(missing.validate().is_err());

        let mut foreign = good.clone();
        let not_resource = (0..3)
            .flat_map(|p| (0..3).map(move |s| [p, s]))
            .find(|c| !good.resources.contains(c))
            .unwrap();
        foreign.assignment[0].resource = not_resource;
        assert!(foreign.validate().is_err());

        let mut empty = good.clone();
        empty.resources.clear();
        assert!(empty.validate().is_err());

        let mut bad_slo = good;
        bad_slo.slo = "fast".into();
        assert!(bad_slo.validate().is_err());
    }

    #[test]
    fn csv_schema() {
        let dir = tempfile::tempdir().unwrap();
        let agg = dir.path().join("a.csv");
        let nodes = dir.path().join("n.csv");
        let dims = Dims::new(1, 2).unwrap();
        let mut w = SeriesWriter::create(&agg, Some((&nodes, dims))).unwrap();
        for t in [0.0, 10.0] {
            w.push(&StepSample {
                t,
                distances: vec![0.0, 1234.56789],
            })
            .unwrap();
        }
        assert_eq!(w.finish().unwrap(), 2);

        let text = std::fs::read_to_string(&agg).unwrap();
        assert_eq!(
            text,
            "t_s,mean_km,max_km\n0,617.284,1234.57\n10,617.284,1234.57\n"
        );
        let rows = read_aggregate(&agg).unwrap();
        assert_eq!(rows.len(), 2);
        let nrows = read_per_node(&nodes).unwrap();
        assert_eq!(nrows.len(), 4);
        assert_eq!(
            nrows[1],
            NodeRow {
                t_s: 0.0,
                plane: 0,
                slot: 1,
                distance_km: 1234.57
            }
        );

        std::fs::write(&agg, "").unwrap();
        assert!(read_aggregate(&agg).is_err());
        std::fs::write(&agg, "t_s,mean_km,max_km\n").unwrap();
        assert!(read_aggregate(&agg).is_err());
        std::fs::write(&agg, "t,mean,max\n0,1,2\n").unwrap();
        assert!(read_aggregate(&agg).is_err());
        assert!(read_per_node(&dir.path().join("absent.csv")).is_err());
    }

    proptest! {
        #[test]
        fn format_sig_keeps_six_digits(x in 1e-4f64..1e9) {
            let back: f64 = format_sig(x, 6).parse().unwrap();
            prop_assert!(((back - x) / x).abs() <= 5e-6);
        }
    }
}
