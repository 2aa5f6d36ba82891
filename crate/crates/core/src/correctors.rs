//! Extraction of corrector fields from rescaled 3D displacements, and the
//! lifting of a limit state to an admissible 3D displacement.

use crate::element::StrainRule;
use crate::error::{Error, Result};
use crate::limit::LimitState;
use crate::mesh::{hat_moments, Block, HexBlock, JunctionMap, MultidomainMesh};
use crate::quadrature::gauss;
use crate::scaling::ScalingParams;
use crate::solver3d::{block_norms_sq, RescaledDisplacement};
use crate::tensor::beam_factors;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Beam correctors, profiles per node level and fields per beam node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamCorrectors {
    pub levels: Vec<f64>,
    pub c_eps: Vec<f64>,
    pub d_eps: [Vec<f64>; 2],
    pub v3_eps: Vec<f64>,
    pub w_eps: [Vec<f64>; 2],
}

/// Plate correctors per plate node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateCorrectors {
    pub u_tilde: [Vec<f64>; 2],
    pub v_eps: [Vec<f64>; 2],
    pub w3_eps: Vec<f64>,
}

/// Derivative of nodal data on a nonuniform grid: three-point centered
/// inside, one-sided at the ends.
pub fn nodal_derivative(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (f[1] - f[0]) / (x[1] - x[0])
            } else if i + 1 == n {
                (f[n - 1] - f[n - 2]) / (x[n - 1] - x[n - 2])
            } else {
                let (hm, hp) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                (hm * hm * (f[i + 1] - f[i]) + hp * hp * (f[i] - f[i - 1])) / (hm * hp * (hm + hp))
            }
        })
        .collect()
}

/// Per-level section integrals `sum_s m_s f(s)` of a nodal beam quantity.
fn slice_sums(beam: &HexBlock, weight: impl Fn(&[f64; 3], usize) -> f64) -> Vec<f64> {
    let mom = hat_moments(&beam.xs, &beam.ys);
    let ls = beam.layer_size();
    (0..beam.zs.len()).map(|k| (0..ls).map(|s| weight(&mom[s], k * ls + s)).sum()).collect()
}

/// `c^eps(x3) = int x^R . u / (r int |x'|^2)` per level.
pub fn extract_twist(u: &[[f64; 3]], beam: &HexBlock, r: f64) -> Vec<f64> {
    let polar = hat_moments(&beam.xs, &beam.ys)
        .iter()
        .enumerate()
        .map(|(s, m)| m[1] * beam.xs[s % beam.xs.len()] + m[2] * beam.ys[s / beam.xs.len()])
        .sum::<f64>();
    slice_sums(beam, |m, n| m[1] * u[n][1] - m[2] * u[n][0]).into_iter().map(|v| v / (r * polar)).collect()
}

/// `d^eps_alpha(x3) = mean(u_alpha) / r` per level.
pub fn extract_mean(u: &[[f64; 3]], beam: &HexBlock, r: f64) -> [Vec<f64>; 2] {
    let area = (beam.xs[beam.xs.len() - 1] - beam.xs[0]) * (beam.ys[beam.ys.len() - 1] - beam.ys[0]);
    [0, 1].map(|a| slice_sums(beam, |m, n| m[0] * u[n][a]).into_iter().map(|v| v / (area * r)).collect())
}

/// `v^eps_3 = u3/r - mean(u3/r) + x_alpha d/dx3 d^eps_alpha`, per node.
pub fn extract_v3(u: &[[f64; 3]], beam: &HexBlock, r: f64) -> Vec<f64> {
    let area = (beam.xs[beam.xs.len() - 1] - beam.xs[0]) * (beam.ys[beam.ys.len() - 1] - beam.ys[0]);
    let mean3: Vec<f64> = slice_sums(beam, |m, n| m[0] * u[n][2]).into_iter().map(|v| v / area).collect();
    let d = extract_mean(u, beam, r);
    let dd = [nodal_derivative(&beam.zs, &d[0]), nodal_derivative(&beam.zs, &d[1])];
    (0..beam.n_nodes())
        .map(|n| {
            let [_, _, k] = beam.node_ijk(n);
            let x = beam.coord(n);
            (u[n][2] - mean3[k]) / r + x[0] * dd[0][k] + x[1] * dd[1][k]
        })
        .collect()
}

/// `w^eps_alpha = u_alpha / r^2 - (c^eps x^R_alpha + d^eps_alpha) / r`.
pub fn extract_w_beam(u: &[[f64; 3]], beam: &HexBlock, c: &[f64], d: &[Vec<f64>; 2], r: f64) -> [Vec<f64>; 2] {
    [0, 1].map(|a| {
        (0..beam.n_nodes())
            .map(|n| {
                let k = beam.node_ijk(n)[2];
                let x = beam.coord(n);
                let xr = if a == 0 { -x[1] } else { x[0] };
                u[n][a] / (r * r) - (c[k] * xr + d[a][k]) / r
            })
            .collect()
    })
}

pub fn extract_beam(u: &[[f64; 3]], beam: &HexBlock, r: f64) -> BeamCorrectors {
    let c = extract_twist(u, beam, r);
    let d = extract_mean(u, beam, r);
    let v3 = extract_v3(u, beam, r);
    let w = extract_w_beam(u, beam, &c, &d, r);
    BeamCorrectors { levels: beam.zs.clone(), c_eps: c, d_eps: d, v3_eps: v3, w_eps: w }
}

/// Trapezoid weights of the node levels (exact for piecewise linears).
fn level_weights(z: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; z.len()];
    for k in 0..z.len() - 1 {
        let h = z[k + 1] - z[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    w
}

/// Plate correctors: `u~_alpha = -int_0^x3 (1/eps) d_alpha u3`, the
/// centered `u_alpha/eps - u~_alpha` and the centered `u3/eps^2`.
pub fn extract_plate(u: &[[f64; 3]], plate: &HexBlock, eps: f64) -> PlateCorrectors {
    let (nx, ny, nz) = (plate.xs.len(), plate.ys.len(), plate.zs.len());
    let n = plate.n_nodes();
    // in-plane nodal gradients of u3, level by level
    let mut grad = [vec![0.0; n], vec![0.0; n]];
    for k in 0..nz {
        for j in 0..ny {
            let row: Vec<f64> = (0..nx).map(|i| u[plate.node(i, j, k)][2]).collect();
            for (i, g) in nodal_derivative(&plate.xs, &row).into_iter().enumerate() {
                grad[0][plate.node(i, j, k)] = g;
            }
        }
        for i in 0..nx {
            let col: Vec<f64> = (0..ny).map(|j| u[plate.node(i, j, k)][2]).collect();
            for (j, g) in nodal_derivative(&plate.ys, &col).into_iter().enumerate() {
                grad[1][plate.node(i, j, k)] = g;
            }
        }
    }
    let lw = level_weights(&plate.zs);
    let len: f64 = lw.iter().sum();
    let mut ut = [vec![0.0; n], vec![0.0; n]];
    let mut v = [vec![0.0; n], vec![0.0; n]];
    let mut w3 = vec![0.0; n];
    for j in 0..ny {
        for i in 0..nx {
            let col: Vec<usize> = (0..nz).map(|k| plate.node(i, j, k)).collect();
            for a in 0..2 {
                for k in (0..nz - 1).rev() {
                    let h = plate.zs[k + 1] - plate.zs[k];
                    ut[a][col[k]] = ut[a][col[k + 1]] + h * (grad[a][col[k]] + grad[a][col[k + 1]]) / (2.0 * eps);
                }
                let raw: Vec<f64> = col.iter().map(|&m| u[m][a] / eps - ut[a][m]).collect();
                let mean = raw.iter().zip(&lw).map(|(x, w)| x * w).sum::<f64>() / len;
                for (k, &m) in col.iter().enumerate() {
                    v[a][m] = raw[k] - mean;
                }
            }
            let raw: Vec<f64> = col.iter().map(|&m| u[m][2] / (eps * eps)).collect();
            let mean = raw.iter().zip(&lw).map(|(x, w)| x * w).sum::<f64>() / len;
            for (k, &m) in col.iter().enumerate() {
                w3[m] = raw[k] - mean;
            }
        }
    }
    PlateCorrectors { u_tilde: ut, v_eps: v, w3_eps: w3 }
}

/// Index of the largest positive beam node level not above `r`.
pub fn interpolation_layer(beam: &HexBlock, r: f64) -> Result<usize> {
    beam.zs
        .iter()
        .rposition(|&z| z > 0.0 && z <= r)
        .ok_or_else(|| Error::Mesh(format!("no beam node level in (0, {r}]")))
}

/// Admissible rescaled displacement built from a limit state: plate
/// `u + eps v + eps^2 w`, beam `u + r v + r^2 w` above the interpolation
/// layer, linear in `x3` inside it, with bottom values taken from the plate
/// through the junction map.
pub fn lift(z: &LimitState, p: &ScalingParams, mesh: &MultidomainMesh, junction: &JunctionMap) -> Result<RescaledDisplacement> {
    if (junction.r - p.r).abs() > 1e-14 * p.r {
        return Err(Error::Junction(format!("junction map built for r = {}, lifting with r = {}", junction.r, p.r)));
    }
    let (eps, r) = (p.eps, p.r);
    let kl = interpolation_layer(&mesh.beam, r)?;
    let xl = mesh.beam.zs[kl];

    let mut plate: Vec<[f64; 3]> = (0..mesh.plate.n_nodes())
        .map(|n| {
            let e = z.eval_plate(mesh.plate.coord(n));
            [0, 1, 2].map(|c| e.u[c] + eps * e.v[c] + eps * eps * e.w[c])
        })
        .collect();
    for n in mesh.plate_lateral_nodes() {
        plate[n] = [0.0; 3];
    }

    let bottom: Vec<[f64; 3]> = {
        let cols = [0, 1, 2].map(|c| junction.interpolate(|n| plate[n][c]));
        (0..junction.entries.len()).map(|e| [eps * r * cols[0][e], eps * r * cols[1][e], cols[2][e]]).collect()
    };
    let upper = |x: [f64; 3]| {
        let e = z.eval_beam(x);
        [0, 1, 2].map(|c| e.u[c] + r * e.v[c] + r * r * e.w[c])
    };
    let top_level = mesh.beam.zs.len() - 1;
    let beam = (0..mesh.beam.n_nodes())
        .map(|n| {
            let [_, _, k] = mesh.beam.node_ijk(n);
            let x = mesh.beam.coord(n);
            if k == top_level {
                [0.0; 3]
            } else if k >= kl {
                upper(x)
            } else {
                let s = n % mesh.beam.layer_size();
                let t = x[2] / xl;
                let hi = upper([x[0], x[1], xl]);
                [0, 1, 2].map(|c| (1.0 - t) * bottom[s][c] + t * hi[c])
            }
        })
        .collect();
    Ok(RescaledDisplacement { beam, plate })
}

/// `||e^a(u)||_{L2}` over the beam elements below the interpolation layer.
pub fn layer_strain_norm(u: &RescaledDisplacement, mesh: &MultidomainMesh, p: &ScalingParams, rule: StrainRule) -> Result<f64> {
    let kl = interpolation_layer(&mesh.beam, p.r)?;
    let beam = &mesh.beam;
    let (es, _) = block_norms_sq(u, mesh, Block::Beam, &beam_factors(p.r), rule, |e| beam.elem_ijk(e)[2] < kl);
    Ok(es.sqrt())
}

/// L2 norm over a block of a nodal scalar (trilinear interpolation).
pub fn nodal_l2(blk: &HexBlock, vals: &[f64]) -> f64 {
    let (p, w) = gauss(2);
    let mut acc = 0.0;
    for e in 0..blk.n_elems() {
        let (_, h) = blk.elem_box(e);
        let jac = h[0] * h[1] * h[2] / 8.0;
        let nodes = blk.elem_nodes(e);
        for c in 0..2 {
            for b in 0..2 {
                for a in 0..2 {
                    let n = crate::mesh::shape([p[a], p[b], p[c]]);
                    let v: f64 = (0..8).map(|l| n[l] * vals[nodes[l]]).sum();
                    acc += w[a] * w[b] * w[c] * jac * v * v;
                }
            }
        }
    }
    acc.sqrt()
}

/// L2 norm of a piecewise linear profile.
pub fn profile_l2(z: &[f64], vals: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..z.len() - 1 {
        let (a, b) = (vals[k], vals[k + 1]);
        acc += (z[k + 1] - z[k]) / 3.0 * (a * a + a * b + b * b);
    }
    acc.sqrt()
}

pub fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Limit correctors sampled on the 3D nodes, in the layout of the
/// extracted ones.
pub fn sample_correctors(z: &LimitState, mesh: &MultidomainMesh) -> (BeamCorrectors, PlateCorrectors) {
    let beam = &mesh.beam;
    let plate = &mesh.plate;
    let be: Vec<_> = (0..beam.n_nodes()).map(|n| z.eval_beam(beam.coord(n))).collect();
    let pe: Vec<_> = (0..plate.n_nodes()).map(|n| z.eval_plate(plate.coord(n))).collect();
    let bc = BeamCorrectors {
        levels: beam.zs.clone(),
        c_eps: beam.zs.iter().map(|&x3| z.c(x3)).collect(),
        d_eps: [Vec::new(), Vec::new()],
        v3_eps: be.iter().map(|e| e.v[2]).collect(),
        w_eps: [be.iter().map(|e| e.w[0]).collect(), be.iter().map(|e| e.w[1]).collect()],
    };
    let pc = PlateCorrectors {
        u_tilde: [Vec::new(), Vec::new()],
        v_eps: [pe.iter().map(|e| e.v[0]).collect(), pe.iter().map(|e| e.v[1]).collect()],
        w3_eps: pe.iter().map(|e| e.w[2]).collect(),
    };
    (bc, pc)
}

/// Absolute L2 distances `[c, v3, w1, w2, v1_b, v2_b, w3_b]`.
pub fn corrector_distances(
    got: &(BeamCorrectors, PlateCorrectors),
    want: &(BeamCorrectors, PlateCorrectors),
    mesh: &MultidomainMesh,
) -> [f64; 7] {
    let (gb, gp) = got;
    let (wb, wp) = want;
    [
        profile_l2(&mesh.beam.zs, &diff(&gb.c_eps, &wb.c_eps)),
        nodal_l2(&mesh.beam, &diff(&gb.v3_eps, &wb.v3_eps)),
        nodal_l2(&mesh.beam, &diff(&gb.w_eps[0], &wb.w_eps[0])),
        nodal_l2(&mesh.beam, &diff(&gb.w_eps[1], &wb.w_eps[1])),
        nodal_l2(&mesh.plate, &diff(&gp.v_eps[0], &wp.v_eps[0])),
        nodal_l2(&mesh.plate, &diff(&gp.v_eps[1], &wp.v_eps[1])),
        nodal_l2(&mesh.plate, &diff(&gp.w3_eps, &wp.w3_eps)),
    ]
}

/// L2 norms of the same seven fields.
pub fn corrector_norms(c: &(BeamCorrectors, PlateCorrectors), mesh: &MultidomainMesh) -> [f64; 7] {
    let (b, p) = c;
    [
        profile_l2(&mesh.beam.zs, &b.c_eps),
        nodal_l2(&mesh.beam, &b.v3_eps),
        nodal_l2(&mesh.beam, &b.w_eps[0]),
        nodal_l2(&mesh.beam, &b.w_eps[1]),
        nodal_l2(&mesh.plate, &p.v_eps[0]),
        nodal_l2(&mesh.plate, &p.v_eps[1]),
        nodal_l2(&mesh.plate, &p.w3_eps),
    ]
}

/// CSV of the beam profiles: `x3,c_eps,d_eps_1,d_eps_2`.
pub fn beam_profiles_csv(b: &BeamCorrectors) -> String {
    let mut s = String::from("x3,c_eps,d_eps_1,d_eps_2\n");
    for (k, z) in b.levels.iter().enumerate() {
        let _ = writeln!(s, "{z},{},{},{}", b.c_eps[k], b.d_eps[0][k], b.d_eps[1][k]);
    }
    s
}

/// CSV of the plate correctors on the top face: `x1,x2,v_eps_1,v_eps_2,w3_eps`.
pub fn plate_profiles_csv(p: &PlateCorrectors, plate: &HexBlock) -> String {
    let mut s = String::from("x1,x2,v_eps_1,v_eps_2,w3_eps\n");
    let top = plate.nz();
    for j in 0..plate.ys.len() {
        for i in 0..plate.xs.len() {
            let n = plate.node(i, j, top);
            let _ = writeln!(s, "{},{},{},{},{}", plate.xs[i], plate.ys[j], p.v_eps[0][n], p.v_eps[1][n], p.w3_eps[n]);
        }
    }
    s
}
