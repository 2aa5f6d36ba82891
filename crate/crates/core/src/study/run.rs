use super::config::StudyConfig;
use crate::correctors::{corrector_distances, extract_beam, extract_plate, layer_strain_norm, sample_correctors, BeamCorrectors};
use crate::error::{Error, Result};
use crate::limit::{assemble_limit_load, limit_energy, solve_limit, LimitDiscretization, LimitForms, LimitSolveStats, LimitState};
use crate::mesh::{build_junction_map, hat_moments, JunctionMap, MultidomainMesh};
use crate::scaling::{compute_lambda, sample_sources, schedule, Regime, RescaledSourceFns, ScalingParams};
use crate::solver3d::{apply_constraints, assemble, assemble_load, diagnostics, rescaled_energy, solve_with_tol, KornReport, RescaledDisplacement};
use crate::sparse::SolveStats;
use crate::tensor::Tensor4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One schedule entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub eps: f64,
    pub r: f64,
    pub k: f64,
    pub q_eps: f64,
    pub lambda: f64,
    /// Rescaled energy `a(u, u)`.
    pub e_eps: f64,
    pub e_limit: f64,
    /// `|E_eps - E|`, `|E_eps - E_inf|` or `|q_eps E_eps - E_0|`.
    pub gap: f64,
    pub junction: [f64; 6],
    /// Norms of `u`, or of `q_eps u` in the zero regime.
    pub korn: KornReport,
    /// Absolute L2 distances of the extracted correctors from the limit
    /// ones: `c, v_a_3, w_a_1, w_a_2, v_b_1, v_b_2, w_b_3`.
    pub corrector_errors: [f64; 7],
    /// Strain norm below the interpolation layer.
    pub layer_strain: f64,
    pub solve: SolveStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSummary {
    pub regime: Regime,
    pub energy: f64,
    pub stats: LimitSolveStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub regime: Regime,
    pub limit: LimitSummary,
    pub rows: Vec<ReportRow>,
}

/// Everything computed for one `eps`, kept for export.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub row: ReportRow,
    pub displacement: RescaledDisplacement,
    pub beam_correctors: BeamCorrectors,
}

#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub report: ConvergenceReport,
    pub cases: Vec<CaseResult>,
    pub limit_state: LimitState,
    pub mesh: MultidomainMesh,
}

/// L2 norm over `omega_a` of bilinear nodal data on the beam section grid.
fn section_l2(mesh: &MultidomainMesh, vals: &[f64]) -> f64 {
    use crate::quadrature::gauss;
    let (xs, ys) = (&mesh.beam.xs, &mesh.beam.ys);
    let nx = xs.len();
    let (p, w) = gauss(2);
    let mut acc = 0.0;
    for j in 0..ys.len() - 1 {
        for i in 0..nx - 1 {
            let (hx, hy) = (xs[i + 1] - xs[i], ys[j + 1] - ys[j]);
            for b in 0..2 {
                for a in 0..2 {
                    let (s, t) = (0.5 * (1.0 + p[a]), 0.5 * (1.0 + p[b]));
                    let v = (1.0 - s) * (1.0 - t) * vals[j * nx + i]
                        + s * (1.0 - t) * vals[j * nx + i + 1]
                        + (1.0 - s) * t * vals[(j + 1) * nx + i]
                        + s * t * vals[(j + 1) * nx + i + 1];
                    acc += 0.25 * w[a] * w[b] * hx * hy * v * v;
                }
            }
        }
    }
    acc.sqrt()
}

/// The six junction residuals `J1..J6` of a rescaled displacement.
pub fn junction_residuals(u: &RescaledDisplacement, mesh: &MultidomainMesh, junction: &JunctionMap) -> [f64; 6] {
    let beam = &mesh.beam;
    let ls = beam.layer_size();
    let bottom = |c: usize| -> Vec<f64> { (0..ls).map(|s| u.beam[s][c]).collect() };
    let mom = hat_moments(&beam.xs, &beam.ys);
    let area = mesh.omega_a.area();
    let mean = |c: usize, k: usize| -> f64 { (0..ls).map(|s| mom[s][0] * u.beam[k * ls + s][c]).sum::<f64>() / area };
    let h1 = beam.zs[1] - beam.zs[0];
    let polar = mesh.omega_a.polar_moment();
    let twist1: f64 = (0..ls).map(|s| mom[s][1] * u.beam[ls + s][1] - mom[s][2] * u.beam[ls + s][0]).sum::<f64>() / (junction.r * polar);
    let p = &mesh.plate;
    let i0 = p.xs.iter().position(|&x| x == 0.0).expect("origin on plate grid");
    let j0 = p.ys.iter().position(|&x| x == 0.0).expect("origin on plate grid");
    let u0 = u.plate[p.node(i0, j0, p.nz())][2];
    let patch: Vec<f64> = junction.interpolate(|n| u.plate[n][2]).into_iter().map(|v| v - u0).collect();
    [
        section_l2(mesh, &bottom(0)),
        section_l2(mesh, &bottom(1)),
        (mean(0, 1) - mean(0, 0)).abs() / h1,
        (mean(1, 1) - mean(1, 0)).abs() / h1,
        twist1.abs(),
        section_l2(mesh, &patch),
    ]
}

fn stage<T>(r: Result<T>, name: &str, eps: f64) -> Result<T> {
    r.map_err(|e| e.at_stage(name, eps))
}

fn run_case(
    cfg: &StudyConfig,
    mesh: &MultidomainMesh,
    tensors: (&Tensor4, &Tensor4),
    p: ScalingParams,
    regime: Regime,
    limit: &LimitState,
    e_limit: f64,
) -> Result<CaseResult> {
    let eps = p.eps;
    let src = stage(cfg.sources.physical(), "sources", eps)?;
    let lambda = stage(compute_lambda(&src, &p, mesh), "compute_lambda", eps)?;
    let p = p.with_lambda(lambda);
    let fns = stage(RescaledSourceFns::new(src, p, mesh.omega_a), "rescale_sources", eps)?;
    let rs = sample_sources(&fns, mesh);
    let rule = cfg.materials.rule;
    let k = assemble(mesh, tensors.0, tensors.1, &p, rule);
    let f = assemble_load(mesh, &rs, rule);
    let junction = stage(build_junction_map(mesh, p.r), "junction_map", eps)?;
    let sys = stage(apply_constraints(&k, &f, mesh, &junction, &p), "apply_constraints", eps)?;
    let (u, st) = stage(solve_with_tol(&sys, mesh, cfg.tolerances.solve), "solve3d", eps)?;

    let e_eps = rescaled_energy(&u, &k);
    let q = p.q();
    let (scale, compared) = match regime {
        Regime::Zero => (q, q * e_eps),
        _ => (1.0, e_eps),
    };
    let scaled = u.scaled(scale);
    let korn = diagnostics(&scaled, mesh, &p, rule);
    let junction_res = junction_residuals(&scaled, mesh, &junction);
    let bc = extract_beam(&scaled.beam, &mesh.beam, p.r);
    let pc = extract_plate(&scaled.plate, &mesh.plate, eps);
    let want = sample_correctors(limit, mesh);
    let corrector_errors = corrector_distances(&(bc.clone(), pc), &want, mesh);
    let layer_strain = stage(layer_strain_norm(&scaled, mesh, &p, rule), "layer_strain", eps)?;
    let row = ReportRow {
        eps,
        r: p.r,
        k: p.k,
        q_eps: q,
        lambda,
        e_eps,
        e_limit,
        gap: (compared - e_limit).abs(),
        junction: junction_res,
        korn,
        corrector_errors,
        layer_strain,
        solve: st,
    };
    Ok(CaseResult { row, displacement: u, beam_correctors: bc })
}

/// Solves the limit problem of the configured regime, with the sources
/// rescaled at the smallest `eps`.
pub fn solve_limit_problem(cfg: &StudyConfig, mesh: &MultidomainMesh) -> Result<(LimitState, LimitSummary)> {
    let regime = cfg.schedule.regime();
    let params = schedule(&cfg.schedule.eps_list, regime)?;
    let p = *params.last().expect("non-empty schedule");
    let src = cfg.sources.physical()?;
    let p = p.with_lambda(compute_lambda(&src, &p, mesh)?);
    let fns = RescaledSourceFns::new(src, p, mesh.omega_a)?;
    let disc = LimitDiscretization::from_mesh(mesh)?;
    let forms = LimitForms::new(&disc, &cfg.materials.beam.tensor()?, &cfg.materials.plate.tensor()?);
    let load = assemble_limit_load(&disc, &fns);
    let (z, stats) = solve_limit(&forms, regime, &load)?;
    let energy = limit_energy(&z, &forms);
    Ok((z, LimitSummary { regime, energy, stats }))
}

/// Full study: limit solve, then every `eps` case in parallel, aggregated
/// in schedule order.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutcome> {
    cfg.validate()?;
    let mesh = cfg.mesh()?;
    let regime = cfg.schedule.regime();
    let params = schedule(&cfg.schedule.eps_list, regime)?;
    let a_a = cfg.materials.beam.tensor()?;
    let a_b = cfg.materials.plate.tensor()?;
    let src = cfg.sources.physical()?;
    if src.is_zero() {
        return Err(Error::ZeroSources.at_stage("compute_lambda", params[0].eps));
    }
    let (limit_state, summary) = solve_limit_problem(cfg, &mesh).map_err(|e| e.at_stage("solve_limit", params.last().unwrap().eps))?;
    let cases: Vec<CaseResult> = params
        .par_iter()
        .map(|p| run_case(cfg, &mesh, (&a_a, &a_b), *p, regime, &limit_state, summary.energy))
        .collect::<Result<Vec<_>>>()?;
    let report = ConvergenceReport { regime, limit: summary, rows: cases.iter().map(|c| c.row.clone()).collect() };
    Ok(StudyOutcome { report, cases, limit_state, mesh })
}
