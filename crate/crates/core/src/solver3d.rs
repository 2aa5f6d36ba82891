//! Assembly and solution of the rescaled two-domain problem with clamped
//! ends and the beam-plate transmission ties (master-slave elimination).

use crate::element::{element_stiffness, gradients, strain_matrix, StrainRule};
use crate::error::{Error, Result};
use crate::mesh::{shape, Block, JunctionMap, MultidomainMesh};
use crate::quadrature::gauss;
use crate::scaling::{RescaledSources, ScalingParams, SourceQuadrature};
use crate::sparse::{dot, solve_spd, CsrMatrix, SolveStats};
use crate::tensor::{beam_factors, plate_factors, Tensor4, MULT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Required relative residual of the reduced solve.
pub const SOLVE_TOL: f64 = 1e-10;

/// Nodal displacements on the reference beam and plate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledDisplacement {
    pub beam: Vec<[f64; 3]>,
    pub plate: Vec<[f64; 3]>,
}

impl RescaledDisplacement {
    pub fn zeros(mesh: &MultidomainMesh) -> Self {
        RescaledDisplacement { beam: vec![[0.0; 3]; mesh.beam.n_nodes()], plate: vec![[0.0; 3]; mesh.plate.n_nodes()] }
    }

    pub fn from_full(mesh: &MultidomainMesh, u: &[f64]) -> Self {
        let nb = mesh.beam.n_nodes();
        let node = |n: usize| [u[3 * n], u[3 * n + 1], u[3 * n + 2]];
        RescaledDisplacement {
            beam: (0..nb).map(node).collect(),
            plate: (nb..nb + mesh.plate.n_nodes()).map(node).collect(),
        }
    }

    pub fn to_full(&self) -> Vec<f64> {
        self.beam.iter().chain(&self.plate).flat_map(|v| v.iter().copied()).collect()
    }

    pub fn scaled(&self, t: f64) -> Self {
        RescaledDisplacement {
            beam: self.beam.iter().map(|v| v.map(|c| t * c)).collect(),
            plate: self.plate.iter().map(|v| v.map(|c| t * c)).collect(),
        }
    }

    pub fn block(&self, b: Block) -> &[[f64; 3]] {
        match b {
            Block::Beam => &self.beam,
            Block::Plate => &self.plate,
        }
    }

    /// JSON export keyed by global node id.
    pub fn to_json(&self, mesh: &MultidomainMesh) -> serde_json::Value {
        let mut nodes = Vec::with_capacity(mesh.n_nodes());
        for b in [Block::Beam, Block::Plate] {
            let blk = mesh.block(b);
            let off = mesh.offset(b);
            for (n, u) in self.block(b).iter().enumerate() {
                nodes.push(serde_json::json!({ "id": off + n, "x": blk.coord(n), "u": u }));
            }
        }
        serde_json::json!({ "nodes": nodes })
    }
}

pub fn block_factors(b: Block, p: &ScalingParams) -> [f64; 6] {
    match b {
        Block::Beam => beam_factors(p.r),
        Block::Plate => plate_factors(p.eps),
    }
}

fn elem_dofs(mesh: &MultidomainMesh, b: Block, e: usize) -> [usize; 24] {
    let off = mesh.offset(b);
    let nodes = mesh.block(b).elem_nodes(e);
    let mut d = [0; 24];
    for (l, &n) in nodes.iter().enumerate() {
        for c in 0..3 {
            d[3 * l + c] = 3 * (off + n) + c;
        }
    }
    d
}

/// Full (unconstrained) stiffness: beam block with `A_a` and the beam strain
/// scaling, plate block with `q A_b` and the plate strain scaling.
pub fn assemble(mesh: &MultidomainMesh, a_a: &Tensor4, a_b: &Tensor4, p: &ScalingParams, rule: StrainRule) -> CsrMatrix {
    let mut triplets = Vec::new();
    for (b, tensor, weight) in [(Block::Beam, a_a, 1.0), (Block::Plate, a_b, p.q())] {
        let blk = mesh.block(b);
        let d = tensor.energy_matrix();
        let f = block_factors(b, p);
        let per_elem: Vec<Vec<(usize, usize, f64)>> = (0..blk.n_elems())
            .into_par_iter()
            .map(|e| {
                let (_, h) = blk.elem_box(e);
                let ke = element_stiffness(h, &d, &f, rule, 2);
                let dofs = elem_dofs(mesh, b, e);
                let mut t = Vec::with_capacity(576);
                for i in 0..24 {
                    for j in 0..24 {
                        t.push((dofs[i], dofs[j], weight * ke[i * 24 + j]));
                    }
                }
                t
            })
            .collect();
        for t in per_elem {
            triplets.extend(t);
        }
    }
    let n = mesh.n_dofs();
    CsrMatrix::from_triplets(n, n, &triplets)
}

/// Consistent load of the sampled rescaled sources; `g` is paired through
/// the same scaled strain operator as the stiffness.
pub fn assemble_load(mesh: &MultidomainMesh, rs: &RescaledSources, rule: StrainRule) -> Vec<f64> {
    let q = SourceQuadrature::new(mesh);
    let mut load = vec![0.0; mesh.n_dofs()];
    for (b, pts, fs, gs) in [
        (Block::Beam, &q.beam, &rs.beam_f, &rs.beam_g),
        (Block::Plate, &q.plate, &rs.plate_f, &rs.plate_g),
    ] {
        let blk = mesh.block(b);
        let fac = block_factors(b, &rs.params);
        for ((qp, f), g) in pts.iter().zip(fs).zip(gs) {
            let dofs = elem_dofs(mesh, b, qp.elem);
            let n = shape(qp.xi);
            for l in 0..8 {
                for c in 0..3 {
                    load[dofs[3 * l + c]] += qp.w * f[c] * n[l];
                }
            }
            if g.0.iter().any(|&v| v != 0.0) {
                let (_, h) = blk.elem_box(qp.elem);
                let bm = strain_matrix(h, qp.xi, rule);
                for a in 0..6 {
                    let ga = MULT[a] * fac[a] * g.0[a] * qp.w;
                    if ga == 0.0 {
                        continue;
                    }
                    for col in 0..24 {
                        load[dofs[col]] += ga * bm[a][col];
                    }
                }
            }
        }
    }
    for (b, pts, hs) in [
        (Block::Beam, &q.lateral, &rs.lateral_h),
        (Block::Plate, &q.top, &rs.top_h),
        (Block::Plate, &q.bottom, &rs.bottom_h),
    ] {
        for (qp, h) in pts.iter().zip(hs) {
            let dofs = elem_dofs(mesh, b, qp.elem);
            let n = shape(qp.xi);
            for l in 0..8 {
                for c in 0..3 {
                    load[dofs[3 * l + c]] += qp.w * h[c] * n[l];
                }
            }
        }
    }
    load
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    Free(usize),
    Fixed,
    Tied,
}

/// Affine map from free dofs to full dofs (all constraints homogeneous).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMap {
    pub n_beam_nodes: usize,
    pub n_free: usize,
    pub kind: Vec<DofKind>,
    /// Rows of tied dofs in free numbering, indexed like `kind`.
    pub ties: Vec<Vec<(usize, f64)>>,
}

impl ConstraintMap {
    /// Beam top and plate lateral dofs clamped; beam bottom dofs slaved to
    /// the plate top through `junction`, horizontal components scaled by
    /// `horizontal`.
    pub fn build(mesh: &MultidomainMesh, junction: &JunctionMap, horizontal: f64) -> Self {
        let n = mesh.n_dofs();
        let mut kind = vec![DofKind::Free(0); n];
        let poff = mesh.offset(Block::Plate);
        for bn in mesh.beam_top_nodes() {
            for c in 0..3 {
                kind[3 * bn + c] = DofKind::Fixed;
            }
        }
        for pn in mesh.plate_lateral_nodes() {
            for c in 0..3 {
                kind[3 * (poff + pn) + c] = DofKind::Fixed;
            }
        }
        for e in &junction.entries {
            for c in 0..3 {
                kind[3 * e.beam_node + c] = DofKind::Tied;
            }
        }
        let mut n_free = 0;
        for k in kind.iter_mut() {
            if let DofKind::Free(_) = k {
                *k = DofKind::Free(n_free);
                n_free += 1;
            }
        }
        let mut ties = vec![Vec::new(); n];
        for e in &junction.entries {
            for c in 0..3 {
                let coeff = if c < 2 { horizontal } else { 1.0 };
                let mut row = Vec::new();
                if coeff != 0.0 {
                    for (&pn, &w) in e.plate_nodes.iter().zip(&e.weights) {
                        if w == 0.0 {
                            continue;
                        }
                        if let DofKind::Free(j) = kind[3 * (poff + pn) + c] {
                            row.push((j, coeff * w));
                        }
                    }
                }
                ties[3 * e.beam_node + c] = row;
            }
        }
        ConstraintMap { n_beam_nodes: mesh.beam.n_nodes(), n_free, kind, ties }
    }

    pub fn n_full(&self) -> usize {
        self.kind.len()
    }

    /// Row `i` of the map `T` (full = T free).
    pub fn row(&self, i: usize) -> Vec<(usize, f64)> {
        match self.kind[i] {
            DofKind::Free(j) => vec![(j, 1.0)],
            DofKind::Fixed => vec![],
            DofKind::Tied => self.ties[i].clone(),
        }
    }

    pub fn expand(&self, free: &[f64]) -> Vec<f64> {
        (0..self.n_full())
            .map(|i| match self.kind[i] {
                DofKind::Free(j) => free[j],
                DofKind::Fixed => 0.0,
                DofKind::Tied => self.ties[i].iter().map(|&(j, w)| w * free[j]).sum(),
            })
            .collect()
    }

    /// `T^T K T`.
    pub fn reduce_matrix(&self, k: &CsrMatrix) -> CsrMatrix {
        let rows: Vec<Vec<(usize, f64)>> = (0..self.n_full()).map(|i| self.row(i)).collect();
        let mut t = Vec::with_capacity(k.nnz());
        for i in 0..k.nrows {
            if rows[i].is_empty() {
                continue;
            }
            for (j, v) in k.row(i) {
                for &(a, ta) in &rows[i] {
                    for &(b, tb) in &rows[j] {
                        t.push((a, b, ta * tb * v));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.n_free, self.n_free, &t)
    }

    /// `T^T f`.
    pub fn reduce_vector(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_free];
        for (i, &v) in f.iter().enumerate() {
            for (a, ta) in self.row(i) {
                out[a] += ta * v;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedSystem {
    pub k: CsrMatrix,
    pub f: Vec<f64>,
    pub map: ConstraintMap,
}

pub fn apply_constraints_with(
    k: &CsrMatrix,
    f: &[f64],
    mesh: &MultidomainMesh,
    junction: &JunctionMap,
    horizontal: f64,
) -> ConstrainedSystem {
    let map = ConstraintMap::build(mesh, junction, horizontal);
    ConstrainedSystem { k: map.reduce_matrix(k), f: map.reduce_vector(f), map }
}

/// Clamps and ties with the coefficients `eps r` (horizontal) and `1`.
pub fn apply_constraints(
    k: &CsrMatrix,
    f: &[f64],
    mesh: &MultidomainMesh,
    junction: &JunctionMap,
    p: &ScalingParams,
) -> Result<ConstrainedSystem> {
    if (junction.r - p.r).abs() > 1e-14 * p.r {
        return Err(Error::Junction(format!("junction map built for r = {} but parameters have r = {}", junction.r, p.r)));
    }
    Ok(apply_constraints_with(k, f, mesh, junction, p.eps * p.r))
}

pub fn solve(sys: &ConstrainedSystem, mesh: &MultidomainMesh) -> Result<(RescaledDisplacement, SolveStats)> {
    solve_with_tol(sys, mesh, SOLVE_TOL)
}

pub fn solve_with_tol(sys: &ConstrainedSystem, mesh: &MultidomainMesh, tol: f64) -> Result<(RescaledDisplacement, SolveStats)> {
    let (x, st) = solve_spd(&sys.k, &sys.f, tol)?;
    Ok((RescaledDisplacement::from_full(mesh, &sys.map.expand(&x)), st))
}

/// `a(u, u)` with the full stiffness.
pub fn rescaled_energy(u: &RescaledDisplacement, k: &CsrMatrix) -> f64 {
    k.quad(&u.to_full())
}

/// Beam part and (q-weighted) plate part of the energy.
pub fn energy_parts(u: &RescaledDisplacement, k: &CsrMatrix, mesh: &MultidomainMesh) -> (f64, f64) {
    let full = u.to_full();
    let ku = k.matvec(&full);
    let nb = 3 * mesh.beam.n_nodes();
    (dot(&full[..nb], &ku[..nb]), dot(&full[nb..], &ku[nb..]))
}

/// `L(u)`.
pub fn load_functional(u: &RescaledDisplacement, f: &[f64]) -> f64 {
    dot(&u.to_full(), f)
}

/// Relative mismatch `|a(u,u) - L(u)| / |L(u)|`.
pub fn galerkin_mismatch(u: &RescaledDisplacement, k: &CsrMatrix, f: &[f64]) -> f64 {
    let a = rescaled_energy(u, k);
    let l = load_functional(u, f);
    if a == 0.0 && l == 0.0 {
        0.0
    } else {
        (a - l).abs() / l.abs().max(a.abs())
    }
}

/// Norms of the a-priori bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct KornReport {
    /// `||e^a(u)||` with the beam scaling.
    pub strain_beam: f64,
    /// `||e^b(u)||` with the plate scaling.
    pub strain_plate: f64,
    /// `sqrt(q) ||e^b(u)||`.
    pub strain_plate_weighted: f64,
    pub h1_beam: f64,
    pub h1_plate: f64,
}

impl KornReport {
    pub fn scaled(&self, t: f64) -> Self {
        let t = t.abs();
        KornReport {
            strain_beam: t * self.strain_beam,
            strain_plate: t * self.strain_plate,
            strain_plate_weighted: t * self.strain_plate_weighted,
            h1_beam: t * self.h1_beam,
            h1_plate: t * self.h1_plate,
        }
    }
}

fn elem_values(blk_vals: &[[f64; 3]], nodes: &[usize; 8]) -> [f64; 24] {
    let mut ue = [0.0; 24];
    for (l, &n) in nodes.iter().enumerate() {
        ue[3 * l..3 * l + 3].copy_from_slice(&blk_vals[n]);
    }
    ue
}

/// `(int |e|^2, int |u|^2 + |grad u|^2)` over the elements of `b` selected
/// by `keep`, 2x2x2 Gauss.
pub fn block_norms_sq(
    u: &RescaledDisplacement,
    mesh: &MultidomainMesh,
    b: Block,
    factors: &[f64; 6],
    rule: StrainRule,
    keep: impl Fn(usize) -> bool + Sync,
) -> (f64, f64) {
    let blk = mesh.block(b);
    let vals = u.block(b);
    let (p, w) = gauss(2);
    let parts: Vec<(f64, f64)> = (0..blk.n_elems())
        .into_par_iter()
        .filter(|&e| keep(e))
        .map(|e| {
            let (_, h) = blk.elem_box(e);
            let jac = h[0] * h[1] * h[2] / 8.0;
            let ue = elem_values(vals, &blk.elem_nodes(e));
            let (mut se, mut sh) = (0.0, 0.0);
            for c in 0..2 {
                for bb in 0..2 {
                    for a in 0..2 {
                        let xi = [p[a], p[bb], p[c]];
                        let wt = w[a] * w[bb] * w[c] * jac;
                        let bm = strain_matrix(h, xi, rule);
                        for k in 0..6 {
                            let ek = factors[k] * bm[k].iter().zip(&ue).map(|(x, y)| x * y).sum::<f64>();
                            se += wt * MULT[k] * ek * ek;
                        }
                        let n = shape(xi);
                        let g = gradients(h, xi);
                        for comp in 0..3 {
                            let val: f64 = (0..8).map(|l| n[l] * ue[3 * l + comp]).sum();
                            sh += wt * val * val;
                            for d in 0..3 {
                                let gv: f64 = (0..8).map(|l| g[d][l] * ue[3 * l + comp]).sum();
                                sh += wt * gv * gv;
                            }
                        }
                    }
                }
            }
            (se, sh)
        })
        .collect();
    parts.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1))
}

pub fn diagnostics(u: &RescaledDisplacement, mesh: &MultidomainMesh, p: &ScalingParams, rule: StrainRule) -> KornReport {
    let (ea, ha) = block_norms_sq(u, mesh, Block::Beam, &beam_factors(p.r), rule, |_| true);
    let (eb, hb) = block_norms_sq(u, mesh, Block::Plate, &plate_factors(p.eps), rule, |_| true);
    KornReport {
        strain_beam: ea.sqrt(),
        strain_plate: eb.sqrt(),
        strain_plate_weighted: (p.q() * eb).sqrt(),
        h1_beam: ha.sqrt(),
        h1_plate: hb.sqrt(),
    }
}

/// Physical (unscaled) strains at the 2x2x2 Gauss points of every element.
pub fn gauss_strains(u: &RescaledDisplacement, mesh: &MultidomainMesh, b: Block, rule: StrainRule) -> Vec<[f64; 6]> {
    let blk = mesh.block(b);
    let vals = u.block(b);
    let (p, _) = gauss(2);
    let mut out = Vec::with_capacity(8 * blk.n_elems());
    for e in 0..blk.n_elems() {
        let (_, h) = blk.elem_box(e);
        let ue = elem_values(vals, &blk.elem_nodes(e));
        for c in 0..2 {
            for bb in 0..2 {
                for a in 0..2 {
                    out.push(crate::element::strain_at(h, [p[a], p[bb], p[c]], rule, &[1.0; 6], &ue));
                }
            }
        }
    }
    out
}

/// Largest tie violation over all beam bottom nodes.
pub fn tie_violation(u: &RescaledDisplacement, junction: &JunctionMap, horizontal: f64) -> f64 {
    let mut m = 0.0f64;
    for (c, coeff) in [(0, horizontal), (1, horizontal), (2, 1.0)] {
        let vals = junction.interpolate(|n| u.plate[n][c]);
        for (e, v) in junction.entries.iter().zip(vals) {
            m = m.max((u.beam[e.beam_node][c] - coeff * v).abs());
        }
    }
    m
}

/// Largest displacement on clamped nodes.
pub fn dirichlet_violation(u: &RescaledDisplacement, mesh: &MultidomainMesh) -> f64 {
    let mut m = 0.0f64;
    for n in mesh.beam_top_nodes() {
        m = m.max(u.beam[n].iter().fold(0.0f64, |a, v| a.max(v.abs())));
    }
    for n in mesh.plate_lateral_nodes() {
        m = m.max(u.plate[n].iter().fold(0.0f64, |a, v| a.max(v.abs())));
    }
    m
}
