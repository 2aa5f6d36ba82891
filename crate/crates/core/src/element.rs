//! Trilinear hexahedron on an axis-aligned box: strain operators and
//! element matrices.
//!
//! Element dofs are ordered `3 * l + i` with local node `l = a + 2b + 4c`.

use serde::{Deserialize, Serialize};

/// How the transverse shear components `e13`, `e23` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StrainRule {
    /// Plain trilinear gradients.
    #[default]
    Standard,
    /// `e13` tied at `(0, +-1, 0)` and interpolated in `eta`; `e23` tied at
    /// `(+-1, 0, 0)` and interpolated in `xi`.
    Assumed,
}

pub type StrainMatrix = [[f64; 24]; 6];

/// Shape-function gradients `dN_l/dx_d` at natural point `xi` of a box with
/// edge lengths `h`.
#[inline]
pub fn gradients(h: [f64; 3], xi: [f64; 3]) -> [[f64; 8]; 3] {
    let mut g = [[0.0; 8]; 3];
    for l in 0..8 {
        let s = [
            if l & 1 == 0 { -1.0 } else { 1.0 },
            if (l >> 1) & 1 == 0 { -1.0 } else { 1.0 },
            if (l >> 2) & 1 == 0 { -1.0 } else { 1.0 },
        ];
        let f = [0.5 * (1.0 + s[0] * xi[0]), 0.5 * (1.0 + s[1] * xi[1]), 0.5 * (1.0 + s[2] * xi[2])];
        g[0][l] = 0.5 * s[0] * f[1] * f[2] * 2.0 / h[0];
        g[1][l] = 0.5 * s[1] * f[0] * f[2] * 2.0 / h[1];
        g[2][l] = 0.5 * s[2] * f[0] * f[1] * 2.0 / h[2];
    }
    g
}

/// Tensor-component strain rows `(11, 22, 33, 12, 13, 23)` from plain
/// trilinear gradients.
pub fn standard_strain(h: [f64; 3], xi: [f64; 3]) -> StrainMatrix {
    let g = gradients(h, xi);
    let mut b = [[0.0; 24]; 6];
    for l in 0..8 {
        let (c0, c1, c2) = (3 * l, 3 * l + 1, 3 * l + 2);
        b[0][c0] = g[0][l];
        b[1][c1] = g[1][l];
        b[2][c2] = g[2][l];
        b[3][c0] = 0.5 * g[1][l];
        b[3][c1] = 0.5 * g[0][l];
        b[4][c0] = 0.5 * g[2][l];
        b[4][c2] = 0.5 * g[0][l];
        b[5][c1] = 0.5 * g[2][l];
        b[5][c2] = 0.5 * g[1][l];
    }
    b
}

pub fn strain_matrix(h: [f64; 3], xi: [f64; 3], rule: StrainRule) -> StrainMatrix {
    let mut b = standard_strain(h, xi);
    if rule == StrainRule::Assumed {
        let lo = standard_strain(h, [0.0, -1.0, 0.0]);
        let hi = standard_strain(h, [0.0, 1.0, 0.0]);
        let (wl, wh) = (0.5 * (1.0 - xi[1]), 0.5 * (1.0 + xi[1]));
        for c in 0..24 {
            b[4][c] = wl * lo[4][c] + wh * hi[4][c];
        }
        let lo = standard_strain(h, [-1.0, 0.0, 0.0]);
        let hi = standard_strain(h, [1.0, 0.0, 0.0]);
        let (wl, wh) = (0.5 * (1.0 - xi[0]), 0.5 * (1.0 + xi[0]));
        for c in 0..24 {
            b[5][c] = wl * lo[5][c] + wh * hi[5][c];
        }
    }
    b
}

/// Strain at `xi` for element nodal values `u` (24 entries), with block
/// factors applied.
pub fn strain_at(h: [f64; 3], xi: [f64; 3], rule: StrainRule, factors: &[f64; 6], u: &[f64; 24]) -> [f64; 6] {
    let b = strain_matrix(h, xi, rule);
    let mut e = [0.0; 6];
    for a in 0..6 {
        e[a] = factors[a] * b[a].iter().zip(u).map(|(x, y)| x * y).sum::<f64>();
    }
    e
}

/// `sum_gp w |J| (F B)^T D (F B)` with `n`-point Gauss per direction.
pub fn element_stiffness(h: [f64; 3], d: &[[f64; 6]; 6], factors: &[f64; 6], rule: StrainRule, n: usize) -> [f64; 576] {
    let (p, w) = crate::quadrature::gauss(n);
    let jac = h[0] * h[1] * h[2] / 8.0;
    let mut k = [0.0; 576];
    for c in 0..n {
        for bb in 0..n {
            for a in 0..n {
                let wt = w[a] * w[bb] * w[c] * jac;
                let mut fb = strain_matrix(h, [p[a], p[bb], p[c]], rule);
                for (row, f) in fb.iter_mut().zip(factors) {
                    for v in row.iter_mut() {
                        *v *= f;
                    }
                }
                let mut db = [[0.0; 24]; 6];
                for i in 0..6 {
                    for j in 0..6 {
                        let dij = d[i][j];
                        if dij == 0.0 {
                            continue;
                        }
                        for col in 0..24 {
                            db[i][col] += dij * fb[j][col];
                        }
                    }
                }
                for i in 0..24 {
                    for j in 0..24 {
                        let mut s = 0.0;
                        for r in 0..6 {
                            s += fb[r][i] * db[r][j];
                        }
                        k[i * 24 + j] += wt * s;
                    }
                }
            }
        }
    }
    // exact symmetry
    for i in 0..24 {
        for j in 0..i {
            let m = 0.5 * (k[i * 24 + j] + k[j * 24 + i]);
            k[i * 24 + j] = m;
            k[j * 24 + i] = m;
        }
    }
    k
}
