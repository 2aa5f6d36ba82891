use junction_core::study::config::{Format, RegimeKind, DEFAULT_CONFIG};
use junction_core::study::report::from_json;
use junction_core::study::{emit, emit_profiles, run_study, to_csv, ConvergenceReport, StudyConfig, CSV_HEADER};
use junction_core::Error;

const SMALL: &str = r#"
[geometry]
omega_a = [0.5, 0.5]
omega_b = [1.0, 1.0]
beam_mesh = [2, 2, 12]
plate_grading = { kind = "geometric", n = 20, ratio = 1.2 }
plate_nz = 2

[materials]
beam = { kind = "isotropic", lambda = 1.0, mu = 1.0 }
plate = { kind = "isotropic", lambda = 0.5, mu = 1.5 }

[schedule]
regime = "finite"
eps_list = [0.3, 0.25, 0.2]

[sources]
f_plate = ["0", "0", "1"]
h_lateral = ["0", "0", "x3"]
"#;

fn small() -> StudyConfig {
    StudyConfig::from_toml(SMALL).unwrap()
}

#[test]
fn default_config_parses_and_round_trips() {
    let cfg = StudyConfig::default_study();
    assert_eq!(cfg.schedule.eps_list, vec![0.3, 0.2, 0.13]);
    assert_eq!(cfg.geometry.beam_mesh, [6, 6, 24]);
    assert_eq!(StudyConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    assert!(DEFAULT_CONFIG.contains("[schedule]"));
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        SMALL.replace("[0.3, 0.25, 0.2]", "[0.2, 0.3]"),
        SMALL.replace("[0.3, 0.25, 0.2]", "[]"),
        SMALL.replace("[0.3, 0.25, 0.2]", "[1.5, 0.2]"),
        SMALL.replace("mu = 1.5", "mu = -1.0"),
        SMALL.replace("plate_nz = 2", "plate_nz = 2\nunknown = 1"),
        SMALL.replace("regime = \"finite\"", "regime = \"finite\"\nq_target = 0.0"),
        SMALL.replace("\"x3\"", "\"x4\""),
        // the graded plate must resolve the smallest junction patch
        SMALL.replace("ratio = 1.2", "ratio = 1.0").replace("n = 20", "n = 4"),
    ];
    for text in &bad {
        assert!(StudyConfig::from_toml(text).is_err(), "accepted:\n{text}");
    }
}

#[test]
fn zero_sources_are_rejected_at_lambda() {
    let mut cfg = small();
    cfg.sources = Default::default();
    match run_study(&cfg) {
        Err(Error::Stage { stage, eps, source }) => {
            assert_eq!(stage, "compute_lambda");
            assert_eq!(eps, 0.3);
            assert!(matches!(*source, Error::ZeroSources));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn small_study_reports_every_eps() {
    let cfg = small();
    let out = run_study(&cfg).unwrap();
    let rows = &out.report.rows;
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[1].eps < w[0].eps));
    for r in rows {
        assert!((r.q_eps - 1.0).abs() < 1e-12);
        assert!((r.r - r.eps.powf(1.5)).abs() < 1e-15);
        assert!(r.gap >= 0.0 && r.junction.iter().all(|&j| j >= 0.0) && r.corrector_errors.iter().all(|&e| e >= 0.0));
        assert!((r.gap - (r.e_eps - r.e_limit).abs()).abs() < 1e-15);
        assert!(r.solve.residual <= cfg.tolerances.solve);
    }

    let csv = to_csv(&out.report);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[0].starts_with("eps,r,k,q_eps,lambda,E_eps,E_limit,gap,J1,J2,J3,J4,J5,J6,"));
    let ncol = lines[0].split(',').count();
    assert!(lines[1..].iter().all(|l| l.split(',').count() == ncol));

    let dir = tempfile::tempdir().unwrap();
    let written = emit(&out.report, &cfg, Format::Both, dir.path()).unwrap();
    assert_eq!(written.len(), 2);
    assert_eq!(std::fs::read_to_string(dir.path().join("report.csv")).unwrap(), csv);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(from_json(&json).unwrap(), out.report);
    assert_eq!(serde_json::from_value::<StudyConfig>(json["config"].clone()).unwrap(), cfg);
    assert!(json["versions"]["junction-core"].is_string());

    let profiles = emit_profiles(&out, dir.path()).unwrap();
    assert_eq!(profiles.len(), 3 * 3 + 1);
    let beam = std::fs::read_to_string(dir.path().join("profiles/beam_0.csv")).unwrap();
    assert_eq!(beam.lines().count(), 1 + cfg.geometry.beam_mesh[2] + 1);
}

#[test]
fn empty_report_is_header_only() {
    let out = run_study(&small()).unwrap();
    let empty = ConvergenceReport { rows: Vec::new(), ..out.report };
    assert_eq!(to_csv(&empty), format!("{CSV_HEADER}\n"));
}

#[test]
fn zero_regime_compares_weighted_energy() {
    let mut cfg = small();
    cfg.schedule.regime = RegimeKind::Zero;
    let out = run_study(&cfg).unwrap();
    for r in &out.report.rows {
        assert!((r.q_eps - r.eps).abs() < 1e-14);
        assert!((r.gap - (r.q_eps * r.e_eps - r.e_limit).abs()).abs() < 1e-15);
        assert!((r.gap - (r.e_eps - r.e_limit).abs()).abs() > 1e-6);
    }
}

#[test]
fn infinite_regime_compares_plain_energy() {
    let mut cfg = small();
    cfg.schedule.regime = RegimeKind::Infinite;
    let out = run_study(&cfg).unwrap();
    assert!(out.report.limit.energy > 0.0);
    for r in &out.report.rows {
        assert!((r.q_eps - 1.0 / r.eps).abs() < 1e-9);
        assert!((r.gap - (r.e_eps - r.e_limit).abs()).abs() < 1e-15);
    }
}
