use super::config::{Format, StudyConfig};
use super::run::{ConvergenceReport, ReportRow, StudyOutcome};
use crate::correctors::{beam_profiles_csv, extract_plate, plate_profiles_csv};
use crate::error::Result;
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: &str = "eps,r,k,q_eps,lambda,E_eps,E_limit,gap,J1,J2,J3,J4,J5,J6,\
strain_beam,strain_plate,strain_plate_weighted,h1_beam,h1_plate,\
err_c,err_v_a_3,err_w_a_1,err_w_a_2,err_v_b_1,err_v_b_2,err_w_b_3,\
layer_strain,solve_method,solve_n,solve_nnz,solve_residual";

fn row_csv(r: &ReportRow) -> String {
    let mut v: Vec<f64> = vec![r.eps, r.r, r.k, r.q_eps, r.lambda, r.e_eps, r.e_limit, r.gap];
    v.extend(r.junction);
    v.extend([r.korn.strain_beam, r.korn.strain_plate, r.korn.strain_plate_weighted, r.korn.h1_beam, r.korn.h1_plate]);
    v.extend(r.corrector_errors);
    v.push(r.layer_strain);
    let mut s = v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
    let _ = write!(s, ",{},{},{},{:e}", r.solve.method, r.solve.n, r.solve.nnz, r.solve.residual);
    s
}

pub fn to_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in &report.rows {
        s.push_str(&row_csv(r));
        s.push('\n');
    }
    s
}

pub fn to_json(report: &ConvergenceReport, cfg: &StudyConfig) -> serde_json::Value {
    json!({
        "config": cfg,
        "versions": {
            "junction-core": env!("CARGO_PKG_VERSION"),
            "report_format": 1,
        },
        "report": report,
    })
}

/// Parses the `report` member of [`to_json`] output.
pub fn from_json(v: &serde_json::Value) -> Result<ConvergenceReport> {
    Ok(serde_json::from_value(v["report"].clone())?)
}

/// Writes `report.csv` and/or `report.json` into `dir`.
pub fn emit(report: &ConvergenceReport, cfg: &StudyConfig, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    if matches!(format, Format::Csv | Format::Both) {
        let p = dir.join("report.csv");
        std::fs::write(&p, to_csv(report))?;
        out.push(p);
    }
    if matches!(format, Format::Json | Format::Both) {
        let p = dir.join("report.json");
        std::fs::write(&p, serde_json::to_string_pretty(&to_json(report, cfg))?)?;
        out.push(p);
    }
    Ok(out)
}

/// Corrector profiles per `eps`, nodal fields and the limit state under
/// `dir/profiles`.
pub fn emit_profiles(outcome: &StudyOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    let pdir = dir.join("profiles");
    std::fs::create_dir_all(&pdir)?;
    let mut out = Vec::new();
    for (i, c) in outcome.cases.iter().enumerate() {
        let p = pdir.join(format!("beam_{i}.csv"));
        std::fs::write(&p, beam_profiles_csv(&c.beam_correctors))?;
        out.push(p);
        let pc = extract_plate(&c.displacement.plate, &outcome.mesh.plate, c.row.eps);
        let p = pdir.join(format!("plate_{i}.csv"));
        std::fs::write(&p, plate_profiles_csv(&pc, &outcome.mesh.plate))?;
        out.push(p);
        let p = pdir.join(format!("field_{i}.json"));
        std::fs::write(&p, serde_json::to_string(&c.displacement.to_json(&outcome.mesh))?)?;
        out.push(p);
    }
    let p = pdir.join("limit.json");
    std::fs::write(&p, serde_json::to_string(&outcome.limit_state.to_json())?)?;
    out.push(p);
    Ok(out)
}
