use std::path::Path;
use std::process::{Command, Output};

use leoplace::cli::files::{read_aggregate, read_per_node, PlacementFile};
use leoplace::geom::{orbital_period, PhysicalConstants};

fn leoplace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leoplace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(o: &Output, key: &str) -> String {
    let text = stdout(o);
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no '{key}' in output:\n{text}"))
        .to_string()
}

fn place(shell: &str, slo: &str, out: &Path) -> Output {
    leoplace(&[
        "place",
        "--shell",
        shell,
        "--slo",
        slo,
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn place_reports_resource_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    for (shell, slo, count) in [
        ("starlink-b", "hops:1", 75),
        ("starlink-b", "max:10ms", 45),
        ("kuiper-a", "hops:0", 1156),
    ] {
        let o = place(shell, slo, &out);
        assert!(o.status.success(), "{shell} {slo}: {o:?}");
        assert_eq!(field(&o, "resources"), count.to_string(), "{shell} {slo}");
        field(&o, "epsilon_bound_km").parse::<f64>().unwrap();
        let file = PlacementFile::read(&out).unwrap();
        assert_eq!(file.resources.len(), count);
    }
}

#[test]
fn place_accepts_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("shell.conf");
    std::fs::write(
        &cfg,
        "shell.planes = 4\nshell.sats_per_plane = 6\nshell.altitude_km = 700\nshell.inclination_deg = 60\n",
    )
    .unwrap();
    let out = dir.path().join("p.json");
    let o = leoplace(&[
        "place",
        "--config",
        cfg.to_str().unwrap(),
        "--slo",
        "hops:0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(field(&o, "resources"), "24");

    // Keys in the file win over the preset.
    std::fs::write(&cfg, "shell.planes = 6\n").unwrap();
    let o = leoplace(&[
        "place",
        "--shell",
        "starlink-b",
        "--config",
        cfg.to_str().unwrap(),
        "--slo",
        "hops:0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(field(&o, "resources"), "450");
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    assert_eq!(place("iridium", "hops:1", &out).status.code(), Some(1));
    assert_eq!(place("kuiper-b", "max:10", &out).status.code(), Some(1));
    assert_eq!(place("kuiper-b", "hops:-1", &out).status.code(), Some(1));
    let unwritable = dir.path().join("no/such/dir/p.json");
    assert_eq!(
        place("kuiper-b", "hops:1", &unwritable).status.code(),
        Some(2)
    );
    assert_eq!(leoplace(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(leoplace(&["--help"]).status.code(), Some(0));

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{\"resources\": []}").unwrap();
    let csv = dir.path().join("a.csv");
    let o = leoplace(&[
        "simulate",
        "--placement",
        garbage.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(&csv, "").unwrap();
    let o = leoplace(&[
        "verify",
        "--csv",
        csv.to_str().unwrap(),
        "--slo",
        "max:10ms",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_defaults_to_one_period_at_ten_seconds() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    let csv = dir.path().join("a.csv");
    assert!(place("starlink-b", "max:10ms", &p).status.success());
    let o = leoplace(&[
        "simulate",
        "--placement",
        p.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    let file = PlacementFile::read(&p).unwrap();
    let period = orbital_period(&file.shell, &PhysicalConstants::default());
    let rows = read_aggregate(&csv).unwrap();
    assert_eq!(rows.len(), (period / 10.0).floor() as usize + 1);
    assert_eq!(field(&o, "rows"), rows.len().to_string());
    assert!(rows.iter().all(|r| r.max_km <= 2997.92));

    let o = leoplace(&[
        "simulate",
        "--placement",
        p.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--duration",
        "100",
        "--step",
        "25",
    ]);
    assert!(o.status.success());
    let times: Vec<f64> = read_aggregate(&csv)
        .unwrap()
        .iter()
        .map(|r| r.t_s)
        .collect();
    assert_eq!(times, vec![0.0, 25.0, 50.0, 75.0, 100.0]);

    let o = leoplace(&[
        "simulate",
        "--placement",
        p.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--step",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_is_deterministic_and_all_nodes_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    let (a, b, nodes) = (
        dir.path().join("a.csv"),
        dir.path().join("b.csv"),
        dir.path().join("n.csv"),
    );
    assert!(place("kuiper-b", "hops:0", &p).status.success());
    for (out, per_node) in [(&a, Some(&nodes)), (&b, None)] {
        let mut args = vec![
            "simulate",
            "--placement",
            p.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--duration",
            "600",
        ];
        if let Some(n) = per_node {
            args.extend(["--per-node", n.to_str().unwrap()]);
        }
        assert!(leoplace(&args).status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let rows = read_aggregate(&a).unwrap();
    assert!(rows.iter().all(|r| r.mean_km == 0.0 && r.max_km == 0.0));
    let per_node = read_per_node(&nodes).unwrap();
    assert_eq!(per_node.len(), rows.len() * 784);
    assert!(per_node.iter().all(|r| r.distance_km == 0.0));
}

#[test]
fn verify_reports_margin_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    let (agg, nodes) = (dir.path().join("a.csv"), dir.path().join("n.csv"));
    assert!(place("starlink-b", "mean:10ms", &p).status.success());
    let o = leoplace(&[
        "simulate",
        "--placement",
        p.to_str().unwrap(),
        "--out",
        agg.to_str().unwrap(),
        "--per-node",
        nodes.to_str().unwrap(),
    ]);
    assert!(o.status.success());

    let (agg_s, nodes_s) = (agg.to_str().unwrap(), nodes.to_str().unwrap());
    let o = leoplace(&[
        "verify",
        "--csv",
        agg_s,
        "--per-node",
        nodes_s,
        "--slo",
        "mean:10ms",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(field(&o, "verdict"), "adherent");
    assert!(field(&o, "margin_km").parse::<f64>().unwrap() >= 0.0);

    let o = leoplace(&["verify", "--csv", agg_s, "--slo", "mean:10ms"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--per-node"));

    let o = leoplace(&["verify", "--csv", agg_s, "--slo", "hops:1"]);
    assert_eq!(o.status.code(), Some(1));

    let o = leoplace(&["verify", "--csv", agg_s, "--slo", "max:10km"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(field(&o, "verdict"), "violated");
    assert!(field(&o, "margin_km").parse::<f64>().unwrap() < 0.0);
}
