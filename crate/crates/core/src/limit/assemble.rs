use super::hermite::{cubic, linear};
use super::{Field, LimitDiscretization};
use crate::quadrature::gauss_on;
use crate::scaling::RescaledSourceFns;
use crate::sparse::CsrMatrix;
use crate::tensor::{SymMatrix3, Tensor4, MULT};
use rayon::prelude::*;

/// Loads entering the limit functional, on the reference domains.
pub trait LimitLoads: Sync {
    fn f_beam(&self, x: [f64; 3]) -> [f64; 3];
    fn f_plate(&self, x: [f64; 3]) -> [f64; 3];
    fn g_beam(&self, x: [f64; 3]) -> SymMatrix3;
    fn g_plate(&self, x: [f64; 3]) -> SymMatrix3;
    /// On the lateral surface of the beam.
    fn h_lateral(&self, x: [f64; 3]) -> [f64; 3];
    /// On `x3 = 0` of the plate.
    fn h_top(&self, xp: [f64; 2]) -> [f64; 3];
    /// On `x3 = -1` of the plate.
    fn h_bottom(&self, xp: [f64; 2]) -> [f64; 3];
}

impl LimitLoads for RescaledSourceFns {
    fn f_beam(&self, x: [f64; 3]) -> [f64; 3] {
        RescaledSourceFns::f_beam(self, x)
    }
    fn f_plate(&self, x: [f64; 3]) -> [f64; 3] {
        RescaledSourceFns::f_plate(self, x)
    }
    fn g_beam(&self, x: [f64; 3]) -> SymMatrix3 {
        RescaledSourceFns::g_beam(self, x)
    }
    fn g_plate(&self, x: [f64; 3]) -> SymMatrix3 {
        RescaledSourceFns::g_plate(self, x)
    }
    fn h_lateral(&self, x: [f64; 3]) -> [f64; 3] {
        RescaledSourceFns::h_lateral(self, x)
    }
    fn h_top(&self, xp: [f64; 2]) -> [f64; 3] {
        RescaledSourceFns::h_top(self, xp)
    }
    fn h_bottom(&self, xp: [f64; 2]) -> [f64; 3] {
        RescaledSourceFns::h_bottom(self, xp)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroLoads;

impl LimitLoads for ZeroLoads {
    fn f_beam(&self, _: [f64; 3]) -> [f64; 3] {
        [0.0; 3]
    }
    fn f_plate(&self, _: [f64; 3]) -> [f64; 3] {
        [0.0; 3]
    }
    fn g_beam(&self, _: [f64; 3]) -> SymMatrix3 {
        SymMatrix3::ZERO
    }
    fn g_plate(&self, _: [f64; 3]) -> SymMatrix3 {
        SymMatrix3::ZERO
    }
    fn h_lateral(&self, _: [f64; 3]) -> [f64; 3] {
        [0.0; 3]
    }
    fn h_top(&self, _: [f64; 2]) -> [f64; 3] {
        [0.0; 3]
    }
    fn h_bottom(&self, _: [f64; 2]) -> [f64; 3] {
        [0.0; 3]
    }
}

/// Local operators of one cell at one point: global coefficient ids, limit
/// strain rows (11, 22, 33, 12, 13, 23) and displacement rows.
#[derive(Debug, Clone)]
pub struct CellRows<const N: usize> {
    pub dofs: [usize; N],
    pub strain: [[f64; N]; 6],
    pub disp: [[f64; N]; 3],
}

fn bilinear(sx: f64, sy: f64, hx: f64, hy: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let mut v = [0.0; 4];
    let mut dx = [0.0; 4];
    let mut dy = [0.0; 4];
    for a in 0..4 {
        let (ai, aj) = (a & 1, a >> 1);
        let (px, qx) = if ai == 0 { (1.0 - sx, -1.0 / hx) } else { (sx, 1.0 / hx) };
        let (py, qy) = if aj == 0 { (1.0 - sy, -1.0 / hy) } else { (sy, 1.0 / hy) };
        v[a] = px * py;
        dx[a] = qx * py;
        dy[a] = px * qy;
    }
    (v, dx, dy)
}

/// Beam cell `(iz, i, j)` at `x`. Local order: u1 (4), u2 (4), zeta (2),
/// c (2), v3 (8), w1 (8), w2 (8); section hats are level-major.
pub fn beam_cell_rows(d: &LimitDiscretization, iz: usize, i: usize, j: usize, x: [f64; 3]) -> CellRows<36> {
    let (xs, ys, zs) = (&d.section_x, &d.section_y, &d.beam_z);
    let (hx, hy, hz) = (xs[i + 1] - xs[i], ys[j + 1] - ys[j], zs[iz + 1] - zs[iz]);
    let (sx, sy, sz) = ((x[0] - xs[i]) / hx, (x[1] - ys[j]) / hy, (x[2] - zs[iz]) / hz);
    let (hv, hd, hdd) = cubic(sz, hz);
    let (lv, ld) = linear(sz, hz);
    let (_, px, py) = bilinear(sx, sy, hx, hy);

    let mut dofs = [0usize; 36];
    for m in 0..4 {
        dofs[m] = d.offset(Field::UA1) + 2 * iz + m;
        dofs[4 + m] = d.offset(Field::UA2) + 2 * iz + m;
    }
    for l in 0..2 {
        dofs[8 + l] = d.offset(Field::ZetaA) + iz + l;
        dofs[10 + l] = d.offset(Field::C) + iz + l;
        for a in 0..4 {
            let s = d.snode(i + (a & 1), j + (a >> 1));
            dofs[12 + 4 * l + a] = d.sec(Field::VA3, iz + l, s);
            dofs[20 + 4 * l + a] = d.sec(Field::WA1, iz + l, s);
            dofs[28 + 4 * l + a] = d.sec(Field::WA2, iz + l, s);
        }
    }

    let mut e = [[0.0; 36]; 6];
    let mut u = [[0.0; 36]; 3];
    for m in 0..4 {
        e[2][m] = -x[0] * hdd[m];
        e[2][4 + m] = -x[1] * hdd[m];
        u[0][m] = hv[m];
        u[1][4 + m] = hv[m];
        u[2][m] = -x[0] * hd[m];
        u[2][4 + m] = -x[1] * hd[m];
    }
    for l in 0..2 {
        e[2][8 + l] = ld[l];
        u[2][8 + l] = lv[l];
        e[4][10 + l] = -0.5 * x[1] * ld[l];
        e[5][10 + l] = 0.5 * x[0] * ld[l];
        for a in 0..4 {
            let c = 4 * l + a;
            e[4][12 + c] = 0.5 * px[a] * lv[l];
            e[5][12 + c] = 0.5 * py[a] * lv[l];
            e[0][20 + c] = px[a] * lv[l];
            e[3][20 + c] = 0.5 * py[a] * lv[l];
            e[1][28 + c] = py[a] * lv[l];
            e[3][28 + c] = 0.5 * px[a] * lv[l];
        }
    }
    CellRows { dofs, strain: e, disp: u }
}

/// Plate cell `(i, j, kz)` at `x`. Local order: zeta1 (4), zeta2 (4),
/// u3 (16, node-major with value, d1, d2, d12), v1 (8), v2 (8), w3 (8).
pub fn plate_cell_rows(d: &LimitDiscretization, i: usize, j: usize, kz: usize, x: [f64; 3]) -> CellRows<48> {
    let (xs, ys, zs) = (&d.plate_x, &d.plate_y, &d.plate_z);
    let (hx, hy, hz) = (xs[i + 1] - xs[i], ys[j + 1] - ys[j], zs[kz + 1] - zs[kz]);
    let (sx, sy, sz) = ((x[0] - xs[i]) / hx, (x[1] - ys[j]) / hy, (x[2] - zs[kz]) / hz);
    let (vx, dx, ddx) = cubic(sx, hx);
    let (vy, dy, ddy) = cubic(sy, hy);
    let (_, ld) = linear(sz, hz);
    let (pv, px, py) = bilinear(sx, sy, hx, hy);
    let x3 = x[2];

    let mut dofs = [0usize; 48];
    let mut e = [[0.0; 48]; 6];
    let mut u = [[0.0; 48]; 3];
    for a in 0..4 {
        let (ai, aj) = (a & 1, a >> 1);
        let n = d.pnode(i + ai, j + aj);
        dofs[a] = d.offset(Field::ZetaB1) + n;
        dofs[4 + a] = d.offset(Field::ZetaB2) + n;
        e[0][a] = px[a];
        e[3][a] = 0.5 * py[a];
        u[0][a] = pv[a];
        e[1][4 + a] = py[a];
        e[3][4 + a] = 0.5 * px[a];
        u[1][4 + a] = pv[a];
        for dof in 0..4 {
            let c = 8 + 4 * a + dof;
            dofs[c] = d.offset(Field::UB3) + 4 * n + dof;
            let (ix, iy) = (2 * ai + (dof & 1), 2 * aj + (dof >> 1));
            let n0 = vx[ix] * vy[iy];
            let n1 = dx[ix] * vy[iy];
            let n2 = vx[ix] * dy[iy];
            e[0][c] = -x3 * ddx[ix] * vy[iy];
            e[1][c] = -x3 * vx[ix] * ddy[iy];
            e[3][c] = -x3 * dx[ix] * dy[iy];
            u[0][c] = -x3 * n1;
            u[1][c] = -x3 * n2;
            u[2][c] = n0;
        }
        for l in 0..2 {
            let c = 4 * l + a;
            dofs[24 + c] = d.col(Field::VB1, n, kz + l);
            dofs[32 + c] = d.col(Field::VB2, n, kz + l);
            dofs[40 + c] = d.col(Field::WB3, n, kz + l);
            e[4][24 + c] = 0.5 * pv[a] * ld[l];
            e[5][32 + c] = 0.5 * pv[a] * ld[l];
            e[2][40 + c] = pv[a] * ld[l];
        }
    }
    CellRows { dofs, strain: e, disp: u }
}

/// Tensor-product Gauss points `(x, w)` on a box.
fn box_points(lo: [f64; 3], hi: [f64; 3], n: [usize; 3]) -> Vec<([f64; 3], f64)> {
    let gx = gauss_on(n[0], lo[0], hi[0]);
    let gy = gauss_on(n[1], lo[1], hi[1]);
    let gz = gauss_on(n[2], lo[2], hi[2]);
    let mut out = Vec::with_capacity(gx.len() * gy.len() * gz.len());
    for &(z, wz) in &gz {
        for &(y, wy) in &gy {
            for &(x, wx) in &gx {
                out.push(([x, y, z], wx * wy * wz));
            }
        }
    }
    out
}

/// 4x4 Gauss points on the face `x[axis] = v` of a box.
fn face_points(axis: usize, v: f64, lo: [f64; 2], hi: [f64; 2]) -> Vec<([f64; 3], f64)> {
    let mut out = Vec::with_capacity(16);
    for &(b, wb) in &gauss_on(4, lo[1], hi[1]) {
        for &(a, wa) in &gauss_on(4, lo[0], hi[0]) {
            let mut x = [0.0; 3];
            let mut k = 0;
            for (ax, xv) in x.iter_mut().enumerate() {
                if ax == axis {
                    *xv = v;
                } else {
                    *xv = if k == 0 { a } else { b };
                    k += 1;
                }
            }
            out.push((x, wa * wb));
        }
    }
    out
}

fn add_cell_stiffness<const N: usize>(
    rows: impl Fn([f64; 3]) -> CellRows<N>,
    pts: &[([f64; 3], f64)],
    dmat: &[[f64; 6]; 6],
    out: &mut Vec<(usize, usize, f64)>,
) {
    let mut k = vec![0.0; N * N];
    let mut dofs = [0usize; N];
    for &(x, w) in pts {
        let c = rows(x);
        dofs = c.dofs;
        let mut de = [[0.0; N]; 6];
        for a in 0..6 {
            for b in 0..6 {
                let f = w * dmat[a][b];
                if f != 0.0 {
                    for m in 0..N {
                        de[a][m] += f * c.strain[b][m];
                    }
                }
            }
        }
        for a in 0..6 {
            for m in 0..N {
                let em = c.strain[a][m];
                if em == 0.0 {
                    continue;
                }
                for n in 0..N {
                    k[m * N + n] += em * de[a][n];
                }
            }
        }
    }
    for m in 0..N {
        for n in 0..N {
            let v = 0.5 * (k[m * N + n] + k[n * N + m]);
            if v != 0.0 {
                out.push((dofs[m], dofs[n], v));
            }
        }
    }
}

/// Beam and plate limit bilinear forms over the full coefficient vector.
#[derive(Debug, Clone)]
pub struct LimitForms {
    pub disc: LimitDiscretization,
    pub beam: CsrMatrix,
    pub plate: CsrMatrix,
}

impl LimitForms {
    pub fn new(disc: &LimitDiscretization, a_a: &Tensor4, a_b: &Tensor4) -> Self {
        LimitForms { disc: disc.clone(), beam: assemble_beam_form(disc, a_a), plate: assemble_plate_form(disc, a_b) }
    }
}

/// `int_{Omega_a} [A e(z), e(z)]` with the limit beam strain.
pub fn assemble_beam_form(d: &LimitDiscretization, a: &Tensor4) -> CsrMatrix {
    let dm = a.energy_matrix();
    let (nx, ny, nz) = (d.section_x.len() - 1, d.section_y.len() - 1, d.beam_z.len() - 1);
    let cells: Vec<Vec<(usize, usize, f64)>> = (0..nx * ny * nz)
        .into_par_iter()
        .map(|c| {
            let (i, j, iz) = (c % nx, (c / nx) % ny, c / (nx * ny));
            let pts = box_points(
                [d.section_x[i], d.section_y[j], d.beam_z[iz]],
                [d.section_x[i + 1], d.section_y[j + 1], d.beam_z[iz + 1]],
                [2, 2, 2],
            );
            let mut t = Vec::new();
            add_cell_stiffness(|x| beam_cell_rows(d, iz, i, j, x), &pts, &dm, &mut t);
            t
        })
        .collect();
    let n = d.n_coeffs();
    CsrMatrix::from_triplets(n, n, &cells.concat())
}

/// `int_{Omega_b} [A e(z), e(z)]` with the limit plate strain.
pub fn assemble_plate_form(d: &LimitDiscretization, a: &Tensor4) -> CsrMatrix {
    let dm = a.energy_matrix();
    let (nx, ny, nz) = (d.plate_x.len() - 1, d.plate_y.len() - 1, d.plate_z.len() - 1);
    let cells: Vec<Vec<(usize, usize, f64)>> = (0..nx * ny * nz)
        .into_par_iter()
        .map(|c| {
            let (i, j, kz) = (c % nx, (c / nx) % ny, c / (nx * ny));
            let pts = box_points(
                [d.plate_x[i], d.plate_y[j], d.plate_z[kz]],
                [d.plate_x[i + 1], d.plate_y[j + 1], d.plate_z[kz + 1]],
                [4, 4, 2],
            );
            let mut t = Vec::new();
            add_cell_stiffness(|x| plate_cell_rows(d, i, j, kz, x), &pts, &dm, &mut t);
            t
        })
        .collect();
    let n = d.n_coeffs();
    CsrMatrix::from_triplets(n, n, &cells.concat())
}

fn add_load<const N: usize>(c: &CellRows<N>, w: f64, f: [f64; 3], g: &SymMatrix3, out: &mut [f64]) {
    for m in 0..N {
        let mut v = 0.0;
        for a in 0..3 {
            v += f[a] * c.disp[a][m];
        }
        for a in 0..6 {
            v += MULT[a] * g.0[a] * c.strain[a][m];
        }
        if v != 0.0 {
            out[c.dofs[m]] += w * v;
        }
    }
}

/// Limit load functional `L(z)` as a vector over the coefficients.
pub fn assemble_limit_load(d: &LimitDiscretization, loads: &dyn LimitLoads) -> Vec<f64> {
    let mut out = vec![0.0; d.n_coeffs()];
    let zero = SymMatrix3::ZERO;
    let (xs, ys, zs) = (&d.section_x, &d.section_y, &d.beam_z);
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    for iz in 0..zs.len() - 1 {
        for j in 0..ny {
            for i in 0..nx {
                for (x, w) in box_points([xs[i], ys[j], zs[iz]], [xs[i + 1], ys[j + 1], zs[iz + 1]], [3, 3, 3]) {
                    let c = beam_cell_rows(d, iz, i, j, x);
                    add_load(&c, w, loads.f_beam(x), &loads.g_beam(x), &mut out);
                }
            }
        }
        // lateral faces x1 = const and x2 = const
        for j in 0..ny {
            for (i, xv) in [(0, xs[0]), (nx - 1, xs[nx])] {
                for (x, w) in face_points(0, xv, [ys[j], zs[iz]], [ys[j + 1], zs[iz + 1]]) {
                    let c = beam_cell_rows(d, iz, i, j, x);
                    add_load(&c, w, loads.h_lateral(x), &zero, &mut out);
                }
            }
        }
        for i in 0..nx {
            for (j, yv) in [(0, ys[0]), (ny - 1, ys[ny])] {
                for (x, w) in face_points(1, yv, [xs[i], zs[iz]], [xs[i + 1], zs[iz + 1]]) {
                    let c = beam_cell_rows(d, iz, i, j, x);
                    add_load(&c, w, loads.h_lateral(x), &zero, &mut out);
                }
            }
        }
    }
    let (xs, ys, zs) = (&d.plate_x, &d.plate_y, &d.plate_z);
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    for j in 0..ny {
        for i in 0..nx {
            for kz in 0..zs.len() - 1 {
                for (x, w) in box_points([xs[i], ys[j], zs[kz]], [xs[i + 1], ys[j + 1], zs[kz + 1]], [4, 4, 3]) {
                    let c = plate_cell_rows(d, i, j, kz, x);
                    add_load(&c, w, loads.f_plate(x), &loads.g_plate(x), &mut out);
                }
            }
            let top = zs.len() - 2;
            for (p, w) in face_points(2, 0.0, [xs[i], ys[j]], [xs[i + 1], ys[j + 1]]) {
                let xp = [p[0], p[1]];
                let c = plate_cell_rows(d, i, j, top, [p[0], p[1], 0.0]);
                add_load(&c, w, loads.h_top(xp), &zero, &mut out);
                let c = plate_cell_rows(d, i, j, 0, [p[0], p[1], -1.0]);
                add_load(&c, w, loads.h_bottom(xp), &zero, &mut out);
            }
        }
    }
    out
}
