//! Conforming discretization of the limit spaces and the three limit
//! problems (coupled, beam only, plate only).

pub mod assemble;
pub mod hermite;
mod solve;

pub use assemble::{
    assemble_beam_form, assemble_limit_load, assemble_plate_form, beam_cell_rows, plate_cell_rows, LimitForms, LimitLoads,
    ZeroLoads,
};
pub use solve::{kkt_system, limit_energy, limit_energy_parts, load_functional, solve_limit, KktSystem, LimitSolveStats, LIMIT_SOLVE_TOL};

use crate::error::{Error, Result};
use crate::mesh::{hat_moments, locate, CrossSection, MultidomainMesh};
use crate::scaling::Regime;
use hermite::{cubic, linear};
use serde_json::json;

/// Coefficient blocks of a limit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    UA1,
    UA2,
    ZetaA,
    C,
    VA3,
    WA1,
    WA2,
    ZetaB1,
    ZetaB2,
    UB3,
    VB1,
    VB2,
    WB3,
}

pub const FIELDS: [Field; 13] = [
    Field::UA1,
    Field::UA2,
    Field::ZetaA,
    Field::C,
    Field::VA3,
    Field::WA1,
    Field::WA2,
    Field::ZetaB1,
    Field::ZetaB2,
    Field::UB3,
    Field::VB1,
    Field::VB2,
    Field::WB3,
];

impl Field {
    pub fn name(&self) -> &'static str {
        match self {
            Field::UA1 => "u_a_1",
            Field::UA2 => "u_a_2",
            Field::ZetaA => "zeta_a",
            Field::C => "c",
            Field::VA3 => "v_a_3",
            Field::WA1 => "w_a_1",
            Field::WA2 => "w_a_2",
            Field::ZetaB1 => "zeta_b_1",
            Field::ZetaB2 => "zeta_b_2",
            Field::UB3 => "u_b_3",
            Field::VB1 => "v_b_1",
            Field::VB2 => "v_b_2",
            Field::WB3 => "w_b_3",
        }
    }

    pub fn is_beam(&self) -> bool {
        matches!(self, Field::UA1 | Field::UA2 | Field::ZetaA | Field::C | Field::VA3 | Field::WA1 | Field::WA2)
    }
}

/// Grid lines of the limit discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitDiscretization {
    pub beam_z: Vec<f64>,
    pub section_x: Vec<f64>,
    pub section_y: Vec<f64>,
    pub plate_x: Vec<f64>,
    pub plate_y: Vec<f64>,
    pub plate_z: Vec<f64>,
    offsets: [usize; 14],
}

fn check_lines(name: &str, l: &[f64], lo: Option<f64>, hi: Option<f64>) -> Result<()> {
    if l.len() < 2 || l.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Mesh(format!("{name} lines must be strictly increasing with at least two entries")));
    }
    if lo.is_some_and(|v| l[0] != v) || hi.is_some_and(|v| l[l.len() - 1] != v) {
        return Err(Error::Mesh(format!("{name} lines do not span the expected interval")));
    }
    Ok(())
}

impl LimitDiscretization {
    pub fn new(
        beam_z: Vec<f64>,
        section_x: Vec<f64>,
        section_y: Vec<f64>,
        plate_x: Vec<f64>,
        plate_y: Vec<f64>,
        plate_z: Vec<f64>,
    ) -> Result<Self> {
        check_lines("beam x3", &beam_z, Some(0.0), Some(1.0))?;
        check_lines("section x1", &section_x, None, None)?;
        check_lines("section x2", &section_y, None, None)?;
        check_lines("plate x1", &plate_x, None, None)?;
        check_lines("plate x2", &plate_y, None, None)?;
        check_lines("plate x3", &plate_z, Some(-1.0), Some(0.0))?;
        if !plate_x.contains(&0.0) || !plate_y.contains(&0.0) {
            return Err(Error::Mesh("the origin must be a node of the limit plate grid".into()));
        }
        let mut d = LimitDiscretization { beam_z, section_x, section_y, plate_x, plate_y, plate_z, offsets: [0; 14] };
        let mut acc = 0;
        for (i, f) in FIELDS.iter().enumerate() {
            d.offsets[i] = acc;
            acc += d.len(*f);
        }
        d.offsets[13] = acc;
        Ok(d)
    }

    /// Lines taken from the 3D mesh.
    pub fn from_mesh(mesh: &MultidomainMesh) -> Result<Self> {
        LimitDiscretization::new(
            mesh.beam.zs.clone(),
            mesh.beam.xs.clone(),
            mesh.beam.ys.clone(),
            mesh.plate.xs.clone(),
            mesh.plate.ys.clone(),
            mesh.plate.zs.clone(),
        )
    }

    /// Uniform grids; `np` must be even.
    pub fn uniform(nz: usize, ns: usize, np: usize, nt: usize, omega_a: CrossSection, omega_b: CrossSection) -> Result<Self> {
        use crate::mesh::Grading;
        LimitDiscretization::new(
            (0..=nz).map(|k| k as f64 / nz as f64).collect(),
            Grading::Uniform { n: ns }.lines(omega_a.half[0])?,
            Grading::Uniform { n: ns }.lines(omega_a.half[1])?,
            Grading::Uniform { n: np }.lines(omega_b.half[0])?,
            Grading::Uniform { n: np }.lines(omega_b.half[1])?,
            (0..=nt).map(|k| -1.0 + k as f64 / nt as f64).collect(),
        )
    }

    pub fn nbz(&self) -> usize {
        self.beam_z.len()
    }
    pub fn n_section_nodes(&self) -> usize {
        self.section_x.len() * self.section_y.len()
    }
    pub fn n_plate_nodes(&self) -> usize {
        self.plate_x.len() * self.plate_y.len()
    }
    pub fn npz(&self) -> usize {
        self.plate_z.len()
    }

    pub fn len(&self, f: Field) -> usize {
        match f {
            Field::UA1 | Field::UA2 => 2 * self.nbz(),
            Field::ZetaA | Field::C => self.nbz(),
            Field::VA3 | Field::WA1 | Field::WA2 => self.nbz() * self.n_section_nodes(),
            Field::ZetaB1 | Field::ZetaB2 => self.n_plate_nodes(),
            Field::UB3 => 4 * self.n_plate_nodes(),
            Field::VB1 | Field::VB2 | Field::WB3 => self.n_plate_nodes() * self.npz(),
        }
    }

    pub fn offset(&self, f: Field) -> usize {
        self.offsets[FIELDS.iter().position(|g| *g == f).unwrap()]
    }

    pub fn n_coeffs(&self) -> usize {
        self.offsets[13]
    }

    /// Section node id.
    pub fn snode(&self, i: usize, j: usize) -> usize {
        j * self.section_x.len() + i
    }

    /// Plate node id.
    pub fn pnode(&self, i: usize, j: usize) -> usize {
        j * self.plate_x.len() + i
    }

    /// Coefficient of a section field at level `k`, section node `s`.
    pub fn sec(&self, f: Field, k: usize, s: usize) -> usize {
        self.offset(f) + k * self.n_section_nodes() + s
    }

    /// Coefficient of a column field at plate node `n`, level `k`.
    pub fn col(&self, f: Field, n: usize, k: usize) -> usize {
        self.offset(f) + n * self.npz() + k
    }

    pub fn origin_node(&self) -> usize {
        let i = self.plate_x.iter().position(|&x| x == 0.0).unwrap();
        let j = self.plate_y.iter().position(|&x| x == 0.0).unwrap();
        self.pnode(i, j)
    }

    fn plate_boundary(&self, n: usize) -> bool {
        let nx = self.plate_x.len();
        let (i, j) = (n % nx, n / nx);
        i == 0 || j == 0 || i + 1 == nx || j + 1 == self.plate_y.len()
    }

    /// Section coordinates of section node `s`.
    pub fn scoord(&self, s: usize) -> [f64; 2] {
        let nx = self.section_x.len();
        [self.section_x[s % nx], self.section_y[s / nx]]
    }

    pub fn pcoord(&self, n: usize) -> [f64; 2] {
        let nx = self.plate_x.len();
        [self.plate_x[n % nx], self.plate_y[n / nx]]
    }

    /// `int phi_s`, `int x1 phi_s`, `int x2 phi_s` over the section for
    /// every section node (exact for bilinear hats).
    pub fn section_moments(&self) -> Vec<[f64; 3]> {
        hat_moments(&self.section_x, &self.section_y)
    }

    /// `int psi_k` over `(-1, 0)` for the plate thickness hats.
    pub fn column_weights(&self) -> Vec<f64> {
        let z = &self.plate_z;
        let mut w = vec![0.0; z.len()];
        for k in 0..z.len() - 1 {
            let h = z[k + 1] - z[k];
            w[k] += 0.5 * h;
            w[k + 1] += 0.5 * h;
        }
        w
    }

    /// Coefficients fixed to zero by clamping (and by the regime).
    pub fn fixed_coeffs(&self, regime: Regime) -> Vec<usize> {
        let mut out = Vec::new();
        let last = self.nbz() - 1;
        let beam_on = !matches!(regime, Regime::Zero);
        let plate_on = !matches!(regime, Regime::Infinite);
        if beam_on {
            for f in [Field::UA1, Field::UA2] {
                let o = self.offset(f);
                out.extend([o, o + 1, o + 2 * last, o + 2 * last + 1]);
            }
            out.push(self.offset(Field::ZetaA) + last);
            out.push(self.offset(Field::C));
            out.push(self.offset(Field::C) + last);
            if matches!(regime, Regime::Infinite) {
                out.push(self.offset(Field::ZetaA));
            }
        } else {
            for f in FIELDS.iter().filter(|f| f.is_beam()) {
                out.extend(self.offset(*f)..self.offset(*f) + self.len(*f));
            }
        }
        if plate_on {
            for n in 0..self.n_plate_nodes() {
                if self.plate_boundary(n) {
                    out.push(self.offset(Field::ZetaB1) + n);
                    out.push(self.offset(Field::ZetaB2) + n);
                    for d in 0..4 {
                        out.push(self.offset(Field::UB3) + 4 * n + d);
                    }
                }
            }
            if matches!(regime, Regime::Zero) {
                out.push(self.offset(Field::UB3) + 4 * self.origin_node());
            }
        } else {
            for f in FIELDS.iter().filter(|f| !f.is_beam()) {
                out.extend(self.offset(*f)..self.offset(*f) + self.len(*f));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `(slave, master)` identification: `zeta_a(0) = u_b_3(0)` in the
    /// coupled regime.
    pub fn tie(&self, regime: Regime) -> Option<(usize, usize)> {
        match regime {
            Regime::Finite { .. } => Some((self.offset(Field::ZetaA), self.offset(Field::UB3) + 4 * self.origin_node())),
            _ => None,
        }
    }

    /// Mean and moment constraints as sparse rows over the coefficients.
    pub fn constraint_rows(&self, regime: Regime) -> Vec<Vec<(usize, f64)>> {
        let mut rows = Vec::new();
        if !matches!(regime, Regime::Zero) {
            let mom = self.section_moments();
            for k in 0..self.nbz() {
                let mut v = Vec::new();
                let mut w1 = Vec::new();
                let mut w2 = Vec::new();
                let mut rot = Vec::new();
                for (s, m) in mom.iter().enumerate() {
                    v.push((self.sec(Field::VA3, k, s), m[0]));
                    w1.push((self.sec(Field::WA1, k, s), m[0]));
                    w2.push((self.sec(Field::WA2, k, s), m[0]));
                    rot.push((self.sec(Field::WA2, k, s), m[1]));
                    rot.push((self.sec(Field::WA1, k, s), -m[2]));
                }
                rows.extend([v, w1, w2, rot]);
            }
        }
        if !matches!(regime, Regime::Infinite) {
            let cw = self.column_weights();
            for n in 0..self.n_plate_nodes() {
                for f in [Field::VB1, Field::VB2, Field::WB3] {
                    rows.push((0..self.npz()).map(|k| (self.col(f, n, k), cw[k])).collect());
                }
            }
        }
        rows
    }
}

/// Closed-form limit fields used to build a [`LimitState`] by nodal
/// interpolation. Every method defaults to zero.
pub trait LimitFields {
    /// `(u_a_alpha, d/dx3 u_a_alpha)`.
    fn u_a(&self, _alpha: usize, _z: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
    fn zeta_a(&self, _z: f64) -> f64 {
        0.0
    }
    fn c(&self, _z: f64) -> f64 {
        0.0
    }
    fn v_a3(&self, _x: [f64; 3]) -> f64 {
        0.0
    }
    fn w_a(&self, _alpha: usize, _x: [f64; 3]) -> f64 {
        0.0
    }
    fn zeta_b(&self, _alpha: usize, _x: [f64; 2]) -> f64 {
        0.0
    }
    /// `(u, d1 u, d2 u, d12 u)`.
    fn u_b3(&self, _x: [f64; 2]) -> [f64; 4] {
        [0.0; 4]
    }
    fn v_b(&self, _alpha: usize, _x: [f64; 3]) -> f64 {
        0.0
    }
    fn w_b3(&self, _x: [f64; 3]) -> f64 {
        0.0
    }
}

/// Beam limit fields at a point: `u^a`, `v^a = (-c x2, c x1, v3)`,
/// `w^a = (w1, w2, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamEval {
    pub u: [f64; 3],
    pub v: [f64; 3],
    pub w: [f64; 3],
}

/// Plate limit fields at a point: `u^b = (zeta - x3 grad u3, u3)`,
/// `v^b = (v1, v2, 0)`, `w^b = (0, 0, w3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateEval {
    pub u: [f64; 3],
    pub v: [f64; 3],
    pub w: [f64; 3],
    /// `u3` and its gradient.
    pub u3: [f64; 3],
    pub zeta: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitState {
    pub disc: LimitDiscretization,
    pub regime: Regime,
    pub coeffs: Vec<f64>,
    pub multipliers: Vec<f64>,
}

fn cell(lines: &[f64], x: f64) -> (usize, f64, f64) {
    let i = locate(lines, x);
    let h = lines[i + 1] - lines[i];
    (i, (x - lines[i]) / h, h)
}

impl LimitState {
    pub fn zeros(disc: LimitDiscretization, regime: Regime) -> Self {
        let n = disc.n_coeffs();
        let m = disc.constraint_rows(regime).len();
        LimitState { disc, regime, coeffs: vec![0.0; n], multipliers: vec![0.0; m] }
    }

    pub fn block(&self, f: Field) -> &[f64] {
        let o = self.disc.offset(f);
        &self.coeffs[o..o + self.disc.len(f)]
    }

    /// `(u, u')` of a bending profile.
    pub fn u_a(&self, alpha: usize, z: f64) -> (f64, f64, f64) {
        let f = if alpha == 0 { Field::UA1 } else { Field::UA2 };
        let (k, s, h) = cell(&self.disc.beam_z, z);
        let (v, d, dd) = cubic(s, h);
        let c = &self.block(f)[2 * k..2 * k + 4];
        let dot = |b: [f64; 4]| b.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
        (dot(v), dot(d), dot(dd))
    }

    fn lin_field(&self, f: Field, z: f64) -> (f64, f64) {
        let (k, s, h) = cell(&self.disc.beam_z, z);
        let (v, d) = linear(s, h);
        let c = self.block(f);
        (v[0] * c[k] + v[1] * c[k + 1], d[0] * c[k] + d[1] * c[k + 1])
    }

    pub fn zeta_a(&self, z: f64) -> f64 {
        self.lin_field(Field::ZetaA, z).0
    }

    pub fn c(&self, z: f64) -> f64 {
        self.lin_field(Field::C, z).0
    }

    /// Section field value at `x`.
    pub fn section_field(&self, f: Field, x: [f64; 3]) -> f64 {
        let d = &self.disc;
        let (i, sx, _) = cell(&d.section_x, x[0]);
        let (j, sy, _) = cell(&d.section_y, x[1]);
        let (k, sz, _) = cell(&d.beam_z, x[2]);
        let mut acc = 0.0;
        for lev in 0..2 {
            let lz = if lev == 0 { 1.0 - sz } else { sz };
            for a in 0..4 {
                let (ai, aj) = (a & 1, a >> 1);
                let px = if ai == 0 { 1.0 - sx } else { sx };
                let py = if aj == 0 { 1.0 - sy } else { sy };
                acc += lz * px * py * self.coeffs[d.sec(f, k + lev, d.snode(i + ai, j + aj))];
            }
        }
        acc
    }

    pub fn eval_beam(&self, x: [f64; 3]) -> BeamEval {
        let (u1, d1, _) = self.u_a(0, x[2]);
        let (u2, d2, _) = self.u_a(1, x[2]);
        let c = self.c(x[2]);
        BeamEval {
            u: [u1, u2, self.zeta_a(x[2]) - x[0] * d1 - x[1] * d2],
            v: [-c * x[1], c * x[0], self.section_field(Field::VA3, x)],
            w: [self.section_field(Field::WA1, x), self.section_field(Field::WA2, x), 0.0],
        }
    }

    /// Bilinear plate field value at `x'`.
    pub fn membrane(&self, f: Field, xp: [f64; 2]) -> f64 {
        let d = &self.disc;
        let (i, sx, _) = cell(&d.plate_x, xp[0]);
        let (j, sy, _) = cell(&d.plate_y, xp[1]);
        let mut acc = 0.0;
        for a in 0..4 {
            let (ai, aj) = (a & 1, a >> 1);
            let px = if ai == 0 { 1.0 - sx } else { sx };
            let py = if aj == 0 { 1.0 - sy } else { sy };
            acc += px * py * self.coeffs[d.offset(f) + d.pnode(i + ai, j + aj)];
        }
        acc
    }

    /// `(u3, d1 u3, d2 u3)` of the deflection.
    pub fn deflection(&self, xp: [f64; 2]) -> [f64; 3] {
        let d = &self.disc;
        let (i, sx, hx) = cell(&d.plate_x, xp[0]);
        let (j, sy, hy) = cell(&d.plate_y, xp[1]);
        let (vx, dx, _) = cubic(sx, hx);
        let (vy, dy, _) = cubic(sy, hy);
        let mut out = [0.0; 3];
        for a in 0..4 {
            let (ai, aj) = (a & 1, a >> 1);
            let n = d.pnode(i + ai, j + aj);
            let base = d.offset(Field::UB3) + 4 * n;
            for dof in 0..4 {
                let (ix, iy) = (2 * ai + (dof & 1), 2 * aj + (dof >> 1));
                let c = self.coeffs[base + dof];
                out[0] += c * vx[ix] * vy[iy];
                out[1] += c * dx[ix] * vy[iy];
                out[2] += c * vx[ix] * dy[iy];
            }
        }
        out
    }

    pub fn column_field(&self, f: Field, x: [f64; 3]) -> f64 {
        let d = &self.disc;
        let (i, sx, _) = cell(&d.plate_x, x[0]);
        let (j, sy, _) = cell(&d.plate_y, x[1]);
        let (k, sz, _) = cell(&d.plate_z, x[2]);
        let mut acc = 0.0;
        for a in 0..4 {
            let (ai, aj) = (a & 1, a >> 1);
            let px = if ai == 0 { 1.0 - sx } else { sx };
            let py = if aj == 0 { 1.0 - sy } else { sy };
            let n = d.pnode(i + ai, j + aj);
            acc += px * py * ((1.0 - sz) * self.coeffs[d.col(f, n, k)] + sz * self.coeffs[d.col(f, n, k + 1)]);
        }
        acc
    }

    pub fn eval_plate(&self, x: [f64; 3]) -> PlateEval {
        let xp = [x[0], x[1]];
        let z = [self.membrane(Field::ZetaB1, xp), self.membrane(Field::ZetaB2, xp)];
        let u3 = self.deflection(xp);
        PlateEval {
            u: [z[0] - x[2] * u3[1], z[1] - x[2] * u3[2], u3[0]],
            v: [self.column_field(Field::VB1, x), self.column_field(Field::VB2, x), 0.0],
            w: [0.0, 0.0, self.column_field(Field::WB3, x)],
            u3,
            zeta: z,
        }
    }

    /// Nodal interpolation of closed-form fields, followed by exact
    /// enforcement of the clamping, tie and mean conditions.
    pub fn interpolate(disc: LimitDiscretization, regime: Regime, f: &impl LimitFields) -> Self {
        let mut st = LimitState::from_fields(disc, regime, f);
        st.impose_conditions();
        st
    }

    /// Plain nodal interpolation; no condition is imposed.
    pub fn from_fields(disc: LimitDiscretization, regime: Regime, f: &impl LimitFields) -> Self {
        let mut st = LimitState::zeros(disc, regime);
        let d = st.disc.clone();
        for (k, &z) in d.beam_z.iter().enumerate() {
            for (alpha, fld) in [(0, Field::UA1), (1, Field::UA2)] {
                let (v, s) = f.u_a(alpha, z);
                st.coeffs[d.offset(fld) + 2 * k] = v;
                st.coeffs[d.offset(fld) + 2 * k + 1] = s;
            }
            st.coeffs[d.offset(Field::ZetaA) + k] = f.zeta_a(z);
            st.coeffs[d.offset(Field::C) + k] = f.c(z);
            for s in 0..d.n_section_nodes() {
                let xy = d.scoord(s);
                let x = [xy[0], xy[1], z];
                st.coeffs[d.sec(Field::VA3, k, s)] = f.v_a3(x);
                st.coeffs[d.sec(Field::WA1, k, s)] = f.w_a(0, x);
                st.coeffs[d.sec(Field::WA2, k, s)] = f.w_a(1, x);
            }
        }
        for n in 0..d.n_plate_nodes() {
            let xp = d.pcoord(n);
            st.coeffs[d.offset(Field::ZetaB1) + n] = f.zeta_b(0, xp);
            st.coeffs[d.offset(Field::ZetaB2) + n] = f.zeta_b(1, xp);
            let u = f.u_b3(xp);
            st.coeffs[d.offset(Field::UB3) + 4 * n..d.offset(Field::UB3) + 4 * n + 4].copy_from_slice(&u);
            for (k, &z) in d.plate_z.iter().enumerate() {
                let x = [xp[0], xp[1], z];
                st.coeffs[d.col(Field::VB1, n, k)] = f.v_b(0, x);
                st.coeffs[d.col(Field::VB2, n, k)] = f.v_b(1, x);
                st.coeffs[d.col(Field::WB3, n, k)] = f.w_b3(x);
            }
        }
        st
    }

    /// Zeroes clamped coefficients, applies the regime tie and removes
    /// section means, rotation moments and column means.
    pub fn impose_conditions(&mut self) {
        let d = self.disc.clone();
        for i in d.fixed_coeffs(self.regime) {
            self.coeffs[i] = 0.0;
        }
        if let Some((s, m)) = d.tie(self.regime) {
            self.coeffs[s] = self.coeffs[m];
        }
        if !matches!(self.regime, Regime::Zero) {
            let mom = d.section_moments();
            let area: f64 = mom.iter().map(|m| m[0]).sum();
            let polar: f64 = (0..d.n_section_nodes())
                .map(|s| {
                    let x = d.scoord(s);
                    mom[s][1] * x[0] + mom[s][2] * x[1]
                })
                .sum();
            for k in 0..d.nbz() {
                for f in [Field::VA3, Field::WA1, Field::WA2] {
                    let mean: f64 = (0..d.n_section_nodes()).map(|s| mom[s][0] * self.coeffs[d.sec(f, k, s)]).sum::<f64>() / area;
                    for s in 0..d.n_section_nodes() {
                        self.coeffs[d.sec(f, k, s)] -= mean;
                    }
                }
                let m: f64 = (0..d.n_section_nodes())
                    .map(|s| mom[s][1] * self.coeffs[d.sec(Field::WA2, k, s)] - mom[s][2] * self.coeffs[d.sec(Field::WA1, k, s)])
                    .sum();
                let theta = m / polar;
                for s in 0..d.n_section_nodes() {
                    let x = d.scoord(s);
                    self.coeffs[d.sec(Field::WA1, k, s)] += theta * x[1];
                    self.coeffs[d.sec(Field::WA2, k, s)] -= theta * x[0];
                }
            }
        }
        if !matches!(self.regime, Regime::Infinite) {
            let cw = d.column_weights();
            let len: f64 = cw.iter().sum();
            for n in 0..d.n_plate_nodes() {
                for f in [Field::VB1, Field::VB2, Field::WB3] {
                    let mean: f64 = (0..d.npz()).map(|k| cw[k] * self.coeffs[d.col(f, n, k)]).sum::<f64>() / len;
                    for k in 0..d.npz() {
                        self.coeffs[d.col(f, n, k)] -= mean;
                    }
                }
            }
        }
    }

    /// Largest violation of the multiplier constraints.
    pub fn constraint_violation(&self) -> f64 {
        self.disc
            .constraint_rows(self.regime)
            .iter()
            .map(|row| row.iter().map(|&(i, w)| w * self.coeffs[i]).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// The junction conditions in the coupled space:
    /// `[u1(0), u2(0), u1'(0), u2'(0), c(0), zeta_a(0) - u_b_3(0)]`.
    pub fn six_conditions(&self) -> [f64; 6] {
        let d = &self.disc;
        let ub0 = self.coeffs[d.offset(Field::UB3) + 4 * d.origin_node()];
        [
            self.coeffs[d.offset(Field::UA1)],
            self.coeffs[d.offset(Field::UA2)],
            self.coeffs[d.offset(Field::UA1) + 1],
            self.coeffs[d.offset(Field::UA2) + 1],
            self.coeffs[d.offset(Field::C)],
            self.coeffs[d.offset(Field::ZetaA)] - ub0,
        ]
    }

    pub fn u_b3_origin(&self) -> f64 {
        self.coeffs[self.disc.offset(Field::UB3) + 4 * self.disc.origin_node()]
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d = &self.disc;
        let mut blocks = serde_json::Map::new();
        for f in FIELDS {
            blocks.insert(f.name().to_string(), json!(self.block(f)));
        }
        json!({
            "regime": self.regime,
            "discretization": {
                "beam_x3": d.beam_z,
                "section_x1": d.section_x,
                "section_x2": d.section_y,
                "plate_x1": d.plate_x,
                "plate_x2": d.plate_y,
                "plate_x3": d.plate_z,
                "u_a_layout": "per x3 node: value, derivative",
                "u_b_3_layout": "per plate node: value, d1, d2, d12",
                "section_layout": "level-major, then section node (x1 fastest)",
                "column_layout": "plate node (x1 fastest), then x3 level",
            },
            "blocks": blocks,
            "multipliers": self.multipliers,
        })
    }
}
