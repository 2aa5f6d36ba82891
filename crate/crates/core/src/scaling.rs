//! Scaling engine: `q`, `lambda`, physical/rescaled maps for sources and
//! displacements, the normalization sum, the parameter schedule and the
//! renormalized energy.

use crate::element::StrainRule;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::mesh::{Block, CrossSection, MultidomainMesh, QPoint, Tag};
use crate::solver3d::RescaledDisplacement;
use crate::tensor::{SymMatrix3, Tensor4};
use serde::{Deserialize, Serialize};

/// Gauss points per direction used for all source integrals.
pub const SOURCE_GAUSS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub eps: f64,
    pub r: f64,
    pub k: f64,
    pub lambda: Option<f64>,
}

impl ScalingParams {
    pub fn new(eps: f64, r: f64, k: f64) -> Result<Self> {
        if !(eps > 0.0 && r > 0.0 && k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps, r, k must be positive (got {eps}, {r}, {k})"
            )));
        }
        Ok(ScalingParams { eps, r, k, lambda: None })
    }

    pub fn q(&self) -> f64 {
        compute_q(self)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn lambda(&self) -> Result<f64> {
        self.lambda
            .ok_or_else(|| Error::InvalidParameter("lambda has not been computed".into()))
    }
}

pub fn compute_q(p: &ScalingParams) -> f64 {
    p.k * p.eps.powi(3) / (p.r * p.r)
}

/// Limit regime selected by the behaviour of `q` along the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Regime {
    Finite { q: f64 },
    Infinite,
    Zero,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Finite { .. } => "finite",
            Regime::Infinite => "infinite",
            Regime::Zero => "zero",
        }
    }
}

/// `r = eps^(3/2)` with `k` chosen by the regime.
pub fn schedule(eps_list: &[f64], regime: Regime) -> Result<Vec<ScalingParams>> {
    for w in eps_list.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidParameter("eps_list must be strictly decreasing".into()));
        }
    }
    if let Regime::Finite { q } = regime {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("finite regime needs q > 0, got {q}")));
        }
    }
    eps_list
        .iter()
        .map(|&eps| {
            if !(eps > 0.0) {
                return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
            }
            let r = eps.powf(1.5);
            let k = match regime {
                Regime::Finite { q } => q * r * r / eps.powi(3),
                Regime::Infinite => r * r / eps.powi(4),
                Regime::Zero => r * r / (eps * eps),
            };
            ScalingParams::new(eps, r, k)
        })
        .collect()
}

pub type VecExpr = [Expr; 3];
/// Symmetric field components `(11, 22, 33, 12, 13, 23)`.
pub type SymExpr = [Expr; 6];

/// Closed-form physical data in physical coordinates.
#[derive(Debug, Clone, Default)]
pub struct PhysicalSources {
    pub f_beam: Option<VecExpr>,
    pub f_plate: Option<VecExpr>,
    pub g_beam: Option<SymExpr>,
    pub g_plate: Option<SymExpr>,
    /// Beam lateral surface.
    pub h_lateral: Option<VecExpr>,
    /// Plate top face outside the junction patch.
    pub h_top: Option<VecExpr>,
    /// Plate bottom face.
    pub h_bottom: Option<VecExpr>,
}

fn all_zero<const N: usize>(e: &Option<[Expr; N]>) -> bool {
    e.as_ref().map_or(true, |v| v.iter().all(Expr::is_zero))
}

pub fn eval_vec(e: &Option<VecExpr>, x: [f64; 3]) -> [f64; 3] {
    match e {
        Some(v) => [v[0].eval(x), v[1].eval(x), v[2].eval(x)],
        None => [0.0; 3],
    }
}

pub fn eval_sym(e: &Option<SymExpr>, x: [f64; 3]) -> SymMatrix3 {
    match e {
        Some(v) => SymMatrix3(std::array::from_fn(|a| v[a].eval(x))),
        None => SymMatrix3::ZERO,
    }
}

pub fn parse_vec(s: &[&str; 3]) -> Result<VecExpr> {
    Ok([Expr::parse(s[0])?, Expr::parse(s[1])?, Expr::parse(s[2])?])
}

pub fn parse_sym(s: &[&str; 6]) -> Result<SymExpr> {
    let mut out: Vec<Expr> = Vec::with_capacity(6);
    for t in s {
        out.push(Expr::parse(t)?);
    }
    Ok(out.try_into().expect("six entries"))
}

impl PhysicalSources {
    pub fn is_zero(&self) -> bool {
        all_zero(&self.f_beam)
            && all_zero(&self.f_plate)
            && all_zero(&self.g_beam)
            && all_zero(&self.g_plate)
            && all_zero(&self.h_lateral)
            && all_zero(&self.h_top)
            && all_zero(&self.h_bottom)
    }

    /// Every expression multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        fn sv<const N: usize>(e: &Option<[Expr; N]>, t: f64) -> Result<Option<[Expr; N]>> {
            match e {
                None => Ok(None),
                Some(v) => {
                    let mut out = Vec::with_capacity(N);
                    for x in v {
                        out.push(x.scaled(t)?);
                    }
                    Ok(Some(out.try_into().map_err(|_| Error::Expression("arity".into()))?))
                }
            }
        }
        Ok(PhysicalSources {
            f_beam: sv(&self.f_beam, t)?,
            f_plate: sv(&self.f_plate, t)?,
            g_beam: sv(&self.g_beam, t)?,
            g_plate: sv(&self.g_plate, t)?,
            h_lateral: sv(&self.h_lateral, t)?,
            h_top: sv(&self.h_top, t)?,
            h_bottom: sv(&self.h_bottom, t)?,
        })
    }
}

fn in_patch(x: [f64; 3], r: f64, omega_a: &CrossSection) -> bool {
    x[0].abs() < r * omega_a.half[0] && x[1].abs() < r * omega_a.half[1]
}

fn sq2(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

/// Quadrature rules shared by every source integral, in a fixed order.
pub struct SourceQuadrature {
    pub beam: Vec<QPoint>,
    pub plate: Vec<QPoint>,
    pub lateral: Vec<QPoint>,
    pub top: Vec<QPoint>,
    pub bottom: Vec<QPoint>,
}

impl SourceQuadrature {
    pub fn new(mesh: &MultidomainMesh) -> Self {
        SourceQuadrature {
            beam: mesh.volume_quadrature(Block::Beam, SOURCE_GAUSS),
            plate: mesh.volume_quadrature(Block::Plate, SOURCE_GAUSS),
            lateral: mesh.surface_quadrature(Tag::BeamLateral, SOURCE_GAUSS),
            top: mesh.surface_quadrature(Tag::PlateTop, SOURCE_GAUSS),
            bottom: mesh.surface_quadrature(Tag::PlateBottom, SOURCE_GAUSS),
        }
    }
}

/// Weighted sum of physical squared norms; equals `(r / lambda)^2`.
pub fn weighted_norm_sum(src: &PhysicalSources, p: &ScalingParams, mesh: &MultidomainMesh) -> f64 {
    let q = SourceQuadrature::new(mesh);
    let (eps, r) = (p.eps, p.r);
    let r2 = r * r;
    let mut s = 0.0;
    for qp in &q.beam {
        let x = [r * qp.x[0], r * qp.x[1], qp.x[2]];
        let w = r2 * qp.w;
        let f = eval_vec(&src.f_beam, x);
        let g = eval_sym(&src.g_beam, x);
        s += w * (sq2(f) / r2 + f[2] * f[2] + g.norm_sq());
    }
    for qp in &q.plate {
        let x = [qp.x[0], qp.x[1], eps * qp.x[2]];
        let w = eps * qp.w;
        let f = eval_vec(&src.f_plate, x);
        let g = eval_sym(&src.g_plate, x);
        s += w * (eps.powi(3) / r2 * sq2(f) + eps / r2 * f[2] * f[2] + eps.powi(3) / r2 * g.norm_sq());
    }
    for qp in &q.lateral {
        let x = [r * qp.x[0], r * qp.x[1], qp.x[2]];
        let w = r * qp.w;
        let h = eval_vec(&src.h_lateral, x);
        s += w * (sq2(h) / (r2 * r) + h[2] * h[2] / r);
    }
    for qp in &q.top {
        if in_patch(qp.x, r, &mesh.omega_a) {
            continue;
        }
        let h = eval_vec(&src.h_top, [qp.x[0], qp.x[1], 0.0]);
        s += qp.w * (eps * eps / r2 * sq2(h) + h[2] * h[2] / r2);
    }
    for qp in &q.bottom {
        let h = eval_vec(&src.h_bottom, [qp.x[0], qp.x[1], -eps]);
        s += qp.w * (eps * eps / r2 * sq2(h) + h[2] * h[2] / r2);
    }
    s
}

pub fn compute_lambda(src: &PhysicalSources, p: &ScalingParams, mesh: &MultidomainMesh) -> Result<f64> {
    if src.is_zero() {
        return Err(Error::ZeroSources);
    }
    let s = weighted_norm_sum(src, p, mesh);
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::ZeroSources);
    }
    Ok(p.r / s.sqrt())
}

/// Rescaled source functions on the reference domains.
#[derive(Debug, Clone)]
pub struct RescaledSourceFns {
    pub src: PhysicalSources,
    pub params: ScalingParams,
    pub lambda: f64,
    pub omega_a: CrossSection,
}

impl RescaledSourceFns {
    pub fn new(src: PhysicalSources, params: ScalingParams, omega_a: CrossSection) -> Result<Self> {
        let lambda = params.lambda()?;
        Ok(RescaledSourceFns { src, params, lambda, omega_a })
    }

    pub fn f_beam(&self, x: [f64; 3]) -> [f64; 3] {
        let (l, r) = (self.lambda, self.params.r);
        let f = eval_vec(&self.src.f_beam, [r * x[0], r * x[1], x[2]]);
        [l / r * f[0], l / r * f[1], l * f[2]]
    }

    pub fn f_plate(&self, x: [f64; 3]) -> [f64; 3] {
        let (l, r, e) = (self.lambda, self.params.r, self.params.eps);
        let f = eval_vec(&self.src.f_plate, [x[0], x[1], e * x[2]]);
        let a = l * e * e / (r * r);
        [a * f[0], a * f[1], l * e / (r * r) * f[2]]
    }

    pub fn g_beam(&self, x: [f64; 3]) -> SymMatrix3 {
        let r = self.params.r;
        self.lambda * eval_sym(&self.src.g_beam, [r * x[0], r * x[1], x[2]])
    }

    pub fn g_plate(&self, x: [f64; 3]) -> SymMatrix3 {
        let (r, e) = (self.params.r, self.params.eps);
        (self.lambda * e * e / (r * r)) * eval_sym(&self.src.g_plate, [x[0], x[1], e * x[2]])
    }

    pub fn h_lateral(&self, x: [f64; 3]) -> [f64; 3] {
        let (l, r) = (self.lambda, self.params.r);
        let h = eval_vec(&self.src.h_lateral, [r * x[0], r * x[1], x[2]]);
        [l / (r * r) * h[0], l / (r * r) * h[1], l / r * h[2]]
    }

    fn h_face(&self, e: &Option<VecExpr>, x: [f64; 3]) -> [f64; 3] {
        let (l, r, eps) = (self.lambda, self.params.r, self.params.eps);
        let h = eval_vec(e, x);
        let a = l * eps / (r * r);
        [a * h[0], a * h[1], l / (r * r) * h[2]]
    }

    /// Zero on the junction patch `r omega_a`.
    pub fn h_top(&self, xp: [f64; 2]) -> [f64; 3] {
        let x = [xp[0], xp[1], 0.0];
        if in_patch(x, self.params.r, &self.omega_a) {
            return [0.0; 3];
        }
        self.h_face(&self.src.h_top, x)
    }

    pub fn h_bottom(&self, xp: [f64; 2]) -> [f64; 3] {
        self.h_face(&self.src.h_bottom, [xp[0], xp[1], -self.params.eps])
    }
}

/// Rescaled sources sampled on the [`SourceQuadrature`] points.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledSources {
    pub params: ScalingParams,
    pub beam_f: Vec<[f64; 3]>,
    pub plate_f: Vec<[f64; 3]>,
    pub beam_g: Vec<SymMatrix3>,
    pub plate_g: Vec<SymMatrix3>,
    pub lateral_h: Vec<[f64; 3]>,
    pub top_h: Vec<[f64; 3]>,
    pub bottom_h: Vec<[f64; 3]>,
}

impl RescaledSources {
    pub fn zeros(mesh: &MultidomainMesh, params: ScalingParams) -> Self {
        let q = SourceQuadrature::new(mesh);
        RescaledSources {
            params,
            beam_f: vec![[0.0; 3]; q.beam.len()],
            plate_f: vec![[0.0; 3]; q.plate.len()],
            beam_g: vec![SymMatrix3::ZERO; q.beam.len()],
            plate_g: vec![SymMatrix3::ZERO; q.plate.len()],
            lateral_h: vec![[0.0; 3]; q.lateral.len()],
            top_h: vec![[0.0; 3]; q.top.len()],
            bottom_h: vec![[0.0; 3]; q.bottom.len()],
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        let v = |x: &Vec<[f64; 3]>| x.iter().map(|a| a.map(|c| t * c)).collect();
        let s = |x: &Vec<SymMatrix3>| x.iter().map(|a| t * *a).collect();
        RescaledSources {
            params: self.params,
            beam_f: v(&self.beam_f),
            plate_f: v(&self.plate_f),
            beam_g: s(&self.beam_g),
            plate_g: s(&self.plate_g),
            lateral_h: v(&self.lateral_h),
            top_h: v(&self.top_h),
            bottom_h: v(&self.bottom_h),
        }
    }
}

/// Samples the rescaled sources; `p.lambda` must be set.
pub fn rescale_sources(src: &PhysicalSources, p: &ScalingParams, mesh: &MultidomainMesh) -> Result<RescaledSources> {
    let fns = RescaledSourceFns::new(src.clone(), *p, mesh.omega_a)?;
    Ok(sample_sources(&fns, mesh))
}

pub fn sample_sources(fns: &RescaledSourceFns, mesh: &MultidomainMesh) -> RescaledSources {
    let q = SourceQuadrature::new(mesh);
    RescaledSources {
        params: fns.params,
        beam_f: q.beam.iter().map(|p| fns.f_beam(p.x)).collect(),
        plate_f: q.plate.iter().map(|p| fns.f_plate(p.x)).collect(),
        beam_g: q.beam.iter().map(|p| fns.g_beam(p.x)).collect(),
        plate_g: q.plate.iter().map(|p| fns.g_plate(p.x)).collect(),
        lateral_h: q.lateral.iter().map(|p| fns.h_lateral(p.x)).collect(),
        top_h: q.top.iter().map(|p| fns.h_top([p.x[0], p.x[1]])).collect(),
        bottom_h: q.bottom.iter().map(|p| fns.h_bottom([p.x[0], p.x[1]])).collect(),
    }
}

/// Sum of the seven rescaled squared norms.
pub fn normalization_check(rs: &RescaledSources, mesh: &MultidomainMesh) -> f64 {
    let q = SourceQuadrature::new(mesh);
    let v = |pts: &[QPoint], vals: &[[f64; 3]]| -> f64 {
        pts.iter().zip(vals).map(|(p, f)| p.w * (f[0] * f[0] + f[1] * f[1] + f[2] * f[2])).sum()
    };
    let s = |pts: &[QPoint], vals: &[SymMatrix3]| -> f64 { pts.iter().zip(vals).map(|(p, g)| p.w * g.norm_sq()).sum() };
    v(&q.beam, &rs.beam_f)
        + v(&q.plate, &rs.plate_f)
        + s(&q.beam, &rs.beam_g)
        + s(&q.plate, &rs.plate_g)
        + v(&q.lateral, &rs.lateral_h)
        + v(&q.top, &rs.top_h)
        + v(&q.bottom, &rs.bottom_h)
}

/// Nodal field on the physical beam `r omega_a x (0,1)` and plate
/// `omega_b x (-eps, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub beam_points: Vec<[f64; 3]>,
    pub beam: Vec<[f64; 3]>,
    pub plate_points: Vec<[f64; 3]>,
    pub plate: Vec<[f64; 3]>,
}

fn beam_phys(x: [f64; 3], r: f64) -> [f64; 3] {
    [r * x[0], r * x[1], x[2]]
}

fn plate_phys(x: [f64; 3], eps: f64) -> [f64; 3] {
    [x[0], x[1], eps * x[2]]
}

pub fn rescale_displacement(
    u_phys: impl Fn([f64; 3]) -> [f64; 3],
    p: &ScalingParams,
    mesh: &MultidomainMesh,
) -> Result<RescaledDisplacement> {
    let l = p.lambda()?;
    let (r, e) = (p.r, p.eps);
    let beam = (0..mesh.beam.n_nodes())
        .map(|n| {
            let u = u_phys(beam_phys(mesh.beam.coord(n), r));
            [l * r * u[0], l * r * u[1], l * u[2]]
        })
        .collect();
    let plate = (0..mesh.plate.n_nodes())
        .map(|n| {
            let u = u_phys(plate_phys(mesh.plate.coord(n), e));
            [l / e * u[0], l / e * u[1], l * u[2]]
        })
        .collect();
    Ok(RescaledDisplacement { beam, plate })
}

pub fn unrescale_displacement(u: &RescaledDisplacement, p: &ScalingParams, mesh: &MultidomainMesh) -> Result<PhysicalField> {
    let l = p.lambda()?;
    let (r, e) = (p.r, p.eps);
    Ok(PhysicalField {
        beam_points: (0..mesh.beam.n_nodes()).map(|n| beam_phys(mesh.beam.coord(n), r)).collect(),
        beam: u.beam.iter().map(|v| [v[0] / (l * r), v[1] / (l * r), v[2] / l]).collect(),
        plate_points: (0..mesh.plate.n_nodes()).map(|n| plate_phys(mesh.plate.coord(n), e)).collect(),
        plate: u.plate.iter().map(|v| [e * v[0] / l, e * v[1] / l, v[2] / l]).collect(),
    })
}

/// `(lambda / r)^2 * E_phys`.
pub fn renormalized_energy(e_phys: f64, p: &ScalingParams) -> Result<f64> {
    let l = p.lambda()?;
    Ok((l / p.r).powi(2) * e_phys)
}

/// Inverse of [`renormalized_energy`].
pub fn physical_energy_from_rescaled(e_rescaled: f64, p: &ScalingParams) -> Result<f64> {
    let l = p.lambda()?;
    Ok((p.r / l).powi(2) * e_rescaled)
}

/// Elastic energy `int [A e(U), e(U)]` of a physical nodal field, evaluated
/// element by element on the physical boxes; the plate tensor is `k A_b`.
pub fn physical_energy(
    field: &PhysicalField,
    mesh: &MultidomainMesh,
    a_a: &Tensor4,
    a_b: &Tensor4,
    p: &ScalingParams,
    rule: StrainRule,
) -> f64 {
    use crate::element::element_stiffness;
    let mut total = 0.0;
    let da = a_a.energy_matrix();
    let db = a_b.scaled(p.k).energy_matrix();
    for (blk, vals, pts, d) in [
        (&mesh.beam, &field.beam, &field.beam_points, da),
        (&mesh.plate, &field.plate, &field.plate_points, db),
    ] {
        for e in 0..blk.n_elems() {
            let nodes = blk.elem_nodes(e);
            let lo = pts[nodes[0]];
            let hi = pts[nodes[7]];
            let h = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
            let ke = element_stiffness(h, &d, &[1.0; 6], rule, 2);
            let mut ue = [0.0; 24];
            for (l, &n) in nodes.iter().enumerate() {
                ue[3 * l..3 * l + 3].copy_from_slice(&vals[n]);
            }
            for i in 0..24 {
                for j in 0..24 {
                    total += ue[i] * ke[i * 24 + j] * ue[j];
                }
            }
        }
    }
    total
}
