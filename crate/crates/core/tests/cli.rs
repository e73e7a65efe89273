use std::path::Path;
use std::process::Command;

use monopole_atlas::berry::FieldModel;
use monopole_atlas::charges::state_band;
use monopole_atlas::cli::{
    cmd_census, cmd_field_grid, cmd_sweep, output, CensusReport, RunConfig, SpectrumTable,
    SweepReport, SCHEMA,
};
use monopole_atlas::linalg::vec3;
use monopole_atlas::spinops::{Coupling, FieldPoint};

fn config(preset: Option<&str>, sets: &[&str]) -> RunConfig {
    let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    RunConfig::load(preset, None, &sets).unwrap()
}

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["monopole-atlas"];
    full.extend_from_slice(args);
    monopole_atlas::cli::run(full)
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

/// Sample coordinates along the line where the gap closes.
fn gap_zeros(csv: &str, axis: usize) -> Vec<f64> {
    output::read_spectrum_csv(csv)
        .unwrap()
        .iter()
        .filter(|r| r.min_gap < 1e-9)
        .map(|r| r.b[axis])
        .collect()
}

fn assert_close_set(found: &[f64], expected: &[f64], tol: f64) {
    assert_eq!(found.len(), expected.len(), "{found:?} vs {expected:?}");
    for (f, e) in found.iter().zip(expected) {
        assert!((f - e).abs() < tol, "{found:?} vs {expected:?}");
    }
}

#[test]
fn spectrum_gap_closes_at_the_axis_crossings() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spectrum.csv");
    assert_eq!(
        run(&[
            "spectrum",
            "--preset",
            "fig1-theta0",
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    assert_close_set(
        &gap_zeros(&read(&out), 2),
        &[-2.6, -1.4, 0.0, 1.4, 2.6],
        1e-12,
    );
}

#[test]
fn zeeman_gap_closes_only_at_the_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let code = run(&[
        "spectrum",
        "--set",
        "coupling.j=0",
        "--set",
        "coupling.d=0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_close_set(&gap_zeros(&read(&out), 2), &[0.0], 1e-12);
}

#[test]
fn spectrum_along_bx_at_ninety_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let code = run(&[
        "spectrum",
        "--preset",
        "fig1-theta90",
        "--set",
        "spectrum.from=[-1.0, 0.0, 0.0]",
        "--set",
        "spectrum.to=[1.0, 0.0, 0.0]",
        "--set",
        "spectrum.points=201",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = read(&out);
    let table: SpectrumTable = output::from_json(&text).unwrap();
    assert_eq!(table.schema, SCHEMA);
    let zeros: Vec<f64> = table
        .rows
        .iter()
        .filter(|r| r.min_gap < 1e-9)
        .map(|r| r.b[0])
        .collect();
    assert_close_set(&zeros, &[-0.6, 0.6], 1e-12);
    assert_eq!(output::to_json(&table).unwrap(), text);
}

#[test]
fn grid_masks_degenerate_points_and_round_trips() {
    let c = config(Some("fig1-theta0"), &[]);
    let grid = cmd_field_grid(&c).unwrap();
    assert_eq!(grid.points.len(), 41 * 41);
    let mut masked = 0;
    for p in &grid.points {
        assert_eq!(p.b[1], 0.0, "sample off the plane");
        assert_eq!((p.b[0], p.b[2]), (p.u, p.v));
        if p.min_gap < c.numerics.gap_tolerance {
            assert!(p.masked);
        }
        if p.masked {
            masked += 1;
            assert!(p.fields.iter().all(Option::is_none));
        } else {
            assert!(p.fields.iter().all(Option::is_some));
        }
    }
    // only the origin is a sample point among the crossings
    assert_eq!(masked, 1);

    let csv = output::grid_csv(&grid).unwrap();
    assert!(csv.starts_with("u,v,b_x,b_y,b_z,min_gap,masked,B1_x,"));
    let (states, current, points) = output::read_grid_csv(&csv).unwrap();
    assert_eq!(states, vec![1, 2, 3]);
    assert!(!current);
    assert_eq!(points, grid.points);
    let json = output::to_json(&grid).unwrap();
    assert_eq!(
        output::from_json::<monopole_atlas::cli::FieldGrid>(&json).unwrap(),
        grid
    );
}

/// Bilinear interpolation of the first exported field on a grid over
/// `[-3, 3]²` with `n` samples per axis.
fn interpolate(grid: &monopole_atlas::cli::FieldGrid, n: usize, u: f64, v: f64) -> [f64; 3] {
    let h = 6.0 / (n - 1) as f64;
    let (fu, fv) = ((u + 3.0) / h, (v + 3.0) / h);
    let (i, j) = (
        (fu.floor() as usize).min(n - 2),
        (fv.floor() as usize).min(n - 2),
    );
    let (tu, tv) = (fu - i as f64, fv - j as f64);
    let at = |i: usize, j: usize| grid.points[j * n + i].fields[0].as_ref().unwrap().field;
    std::array::from_fn(|a| {
        (1.0 - tu) * (1.0 - tv) * at(i, j)[a]
            + tu * (1.0 - tv) * at(i + 1, j)[a]
            + (1.0 - tu) * tv * at(i, j + 1)[a]
            + tu * tv * at(i + 1, j + 1)[a]
    })
}

#[test]
fn lowest_state_flux_through_enclosing_circle() {
    // with the DMI vector along z the texture is axially symmetric, so the
    // half circle x ≥ 0 in the exported plane fixes the flux through the
    // sphere of the same radius
    let n = 121;
    let c = config(
        Some("fig1-theta0"),
        &["grid.states=[1]", "grid.resolution=[121, 121]"],
    );
    let grid = cmd_field_grid(&c).unwrap();
    let charge = |radius: f64| {
        let m = 400;
        (0..m)
            .map(|i| {
                let theta = std::f64::consts::PI * (i as f64 + 0.5) / m as f64;
                let (x, z) = (theta.sin(), theta.cos());
                let f = interpolate(&grid, n, radius * x, radius * z);
                (f[0] * x + f[2] * z) * theta.sin()
            })
            .sum::<f64>()
            * std::f64::consts::PI
            / m as f64
            * radius
            * radius
            / 2.0
    };
    // ψ₁ has +½ at each of (0, 0, ±2.6) and nothing closer to the origin
    assert!((charge(2.9) - 1.0).abs() < 0.05, "{}", charge(2.9));
    assert!(charge(2.0).abs() < 0.05, "{}", charge(2.0));
}

#[test]
fn singlet_field_vanishes_without_couplings() {
    let c = config(None, &["coupling.j=0", "coupling.d=0", "grid.states=[4]"]);
    let grid = cmd_field_grid(&c).unwrap();
    for p in &grid.points {
        if let Some(f) = &p.fields[0] {
            assert_eq!(f.norm, 0.0);
        }
    }
}

#[test]
fn fourth_state_sources_match_the_locator() {
    let c = config(Some("fig1-theta60"), &["grid.states=[4]"]);
    let grid = cmd_field_grid(&c).unwrap();
    let census = cmd_census(&c).unwrap().census;
    let band = state_band(4, &Coupling::with_degrees(1.0, 0.3, 60.0));
    let sources: Vec<FieldPoint> = census
        .records
        .iter()
        .filter(|r| r.band == band && r.location.0[2].abs() <= 3.0 && r.location.0[0].abs() <= 3.0)
        .map(|r| r.location)
        .collect();
    // the pair next to the origin plus the pair shared with ψ₂ near |b_z| = 2.3
    assert_eq!(sources.len(), 4, "{:?}", census.records);
    for s in &sources {
        assert!(s.0[0].abs() > 0.1, "source on the axis: {s:?}");
        let peak = grid
            .points
            .iter()
            .filter(|p| !p.masked && FieldPoint(p.b).distance(s) < 0.45)
            .max_by(|a, b| {
                a.fields[0]
                    .as_ref()
                    .unwrap()
                    .norm
                    .total_cmp(&b.fields[0].as_ref().unwrap().norm)
            })
            .unwrap();
        assert!(
            FieldPoint(peak.b).distance(s) < 0.15 * 1.5,
            "peak {:?} vs source {s:?}",
            peak.b
        );
    }
}

#[test]
fn clipping_and_current_columns() {
    let c = config(
        Some("fig1-theta90"),
        &[
            "grid.clip=0.5",
            "grid.current=true",
            "grid.resolution=[9, 9]",
        ],
    );
    let grid = cmd_field_grid(&c).unwrap();
    let g = Coupling::with_degrees(1.0, 0.3, 90.0);
    let model = FieldModel::new(g);
    let mut clipped = 0;
    for p in grid.points.iter().filter(|p| !p.masked) {
        for (s, f) in grid.states.iter().zip(&p.fields) {
            let f = f.as_ref().unwrap();
            assert!(vec3::norm(f.field) <= 0.5 * (1.0 + 1e-12));
            let raw = model.field(&FieldPoint(p.b), state_band(*s, &g)).unwrap();
            assert!((vec3::norm(raw) - f.norm).abs() < 1e-12);
            clipped += f.clipped as usize;
            assert!(f.current.is_some());
        }
    }
    assert!(clipped > 0);
    let (_, current, points) = output::read_grid_csv(&output::grid_csv(&grid).unwrap()).unwrap();
    assert!(current);
    assert_eq!(points, grid.points);
}

#[test]
fn zeeman_census_has_charge_minus_m_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let code = run(&[
        "census",
        "--set",
        "coupling.j=0",
        "--set",
        "coupling.d=0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = read(&out);
    let report: CensusReport = output::from_json(&text).unwrap();
    assert_eq!(report.schema, SCHEMA);
    assert_eq!(output::to_json(&report).unwrap(), text);
    let recs = &report.census.records;
    assert_eq!(recs.len(), 2, "{recs:?}");
    for r in recs {
        assert!(r.location.norm() < 1e-6);
    }
    // band 0 is M = −1, band 2 is M = +1
    assert_eq!((recs[0].band, recs[0].quantized), (0, 1.0));
    assert_eq!((recs[1].band, recs[1].quantized), (2, -1.0));
}

#[test]
fn census_of_an_empty_region() {
    let c = config(
        Some("fig1-theta60"),
        &[
            "census.region_min=[10.0, 10.0, 10.0]",
            "census.region_max=[11.0, 11.0, 11.0]",
        ],
    );
    let census = cmd_census(&c).unwrap().census;
    assert!(census.records.is_empty());
    assert_eq!(census.per_band_total, [0.0; 4]);
    assert_eq!(census.grand_total, 0.0);
    let csv = output::records_csv(&census.records, &census.coupling).unwrap();
    assert_eq!(csv.trim(), "band,state,partner_band,b_x,b_y,b_z,charge,lattice_charge,quantized,residual,sphere_radius");
}

#[test]
fn sweep_totals_per_state() {
    let c = config(Some("fig1-theta0"), &["sweep.angles_deg=[0.0, 30.0, 60.0]"]);
    let report = cmd_sweep(&c);
    assert!(report.failures().is_empty());
    for row in &report.summary {
        let t = row.state_totals.unwrap();
        assert_eq!(
            [t[0], t[1], t[2]],
            [1.0, 0.0, -1.0],
            "ϑ = {}",
            row.theta_deg
        );
        assert_eq!(row.sum_rule_ok, Some(true));
    }
    let csv = output::sweep_csv(&report.summary).unwrap();
    assert_eq!(output::read_sweep_csv(&csv).unwrap(), report.summary);
}

#[test]
fn sweep_of_one_angle_is_a_census() {
    let c = config(Some("fig1-theta0"), &["sweep.angles_deg=[0.0]"]);
    let sweep = cmd_sweep(&c);
    let census = cmd_census(&c).unwrap().census;
    assert_eq!(sweep.entries[0].census.as_ref(), Some(&census));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, ext) in [
        ("census", "json"),
        ("field-grid", "csv"),
        ("spectrum", "json"),
    ] {
        let a = dir.path().join(format!("{cmd}-a.{ext}"));
        let b = dir.path().join(format!("{cmd}-b.{ext}"));
        for p in [&a, &b] {
            let code = run(&[
                cmd,
                "--preset",
                "fig1-theta60",
                "--seed",
                "7",
                "--format",
                ext,
                "--out",
                p.to_str().unwrap(),
            ]);
            assert_eq!(code, 0);
        }
        assert_eq!(read(&a), read(&b), "{cmd}");
    }
    let census: CensusReport = output::from_json(&read(&dir.path().join("census-a.json"))).unwrap();
    assert_eq!(census.seed, 7);
}

#[test]
fn census_csv_round_trips() {
    let c = config(Some("fig1-theta90"), &[]);
    let report = cmd_census(&c).unwrap();
    let csv = output::Report::Census(report.clone())
        .render(monopole_atlas::cli::OutputFormat::Csv)
        .unwrap();
    assert_eq!(
        output::read_records_csv(&csv).unwrap(),
        report.census.records
    );
}

fn binary(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_monopole-atlas"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        "[coupling]\nj = 1.0\n\n[grid]\nresolution = [41 41]\n",
    )
    .unwrap();
    let (code, err) = binary(&["field-grid", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 5"), "{err}");

    let (code, err) = binary(&["census", "--set", "grid.resolution=[1, 4]"]);
    assert_eq!(code, 2, "{err}");
    assert_eq!(binary(&["census", "--format", "xml"]).0, 2);
    assert_eq!(binary(&["histogram"]).0, 2);
    assert_eq!(binary(&["--help"]).0, 0);

    let missing = dir.path().join("missing.toml");
    assert_eq!(
        binary(&["census", "--config", missing.to_str().unwrap()]).0,
        4
    );
    let unwritable = dir.path().join("no/such/dir/out.csv");
    let (code, _) = binary(&[
        "spectrum",
        "--set",
        "spectrum.points=3",
        "--out",
        unwritable.to_str().unwrap(),
    ]);
    assert_eq!(code, 4);

    // the two charge methods always differ by rounding, so this tolerance
    // forces a disagreement
    let (code, err) = binary(&[
        "census",
        "--preset",
        "fig1-theta0",
        "--set",
        "numerics.agreement_tolerance=1e-300",
    ]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("disagree"), "{err}");
}

#[test]
fn failed_sweep_angles_are_reported_and_the_sweep_continues() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.json");
    let code = run(&[
        "sweep",
        "--preset",
        "fig1-theta0",
        "--set",
        "sweep.angles_deg=[0.0, 90.0]",
        "--set",
        "numerics.agreement_tolerance=1e-300",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
    let report: SweepReport = output::from_json(&read(&out)).unwrap();
    assert_eq!(report.entries.len(), 2);
    assert!(report
        .entries
        .iter()
        .all(|e| e.error.is_some() && e.census.is_none()));
}
