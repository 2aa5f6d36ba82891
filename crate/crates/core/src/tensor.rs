//! Constant elasticity tensors and pointwise strain operators.
//!
//! Symmetric matrices are stored by their six independent entries in the
//! order `(11, 22, 33, 12, 13, 23)`. The same order is used for the 6x6
//! matrix views of a [`Tensor4`].

use crate::error::{Error, Result};
use nalgebra::{Matrix6, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// Index pairs of the six stored components.
pub const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Multiplicity of each stored component in a full double contraction.
pub const MULT: [f64; 6] = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0];

#[inline]
pub fn pair_index(i: usize, j: usize) -> usize {
    match (i.min(j), i.max(j)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) => 3,
        (0, 2) => 4,
        (1, 2) => 5,
        _ => panic!("index out of range"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymMatrix3(pub [f64; 6]);

impl SymMatrix3 {
    pub const ZERO: SymMatrix3 = SymMatrix3([0.0; 6]);

    pub fn identity() -> Self {
        SymMatrix3([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    }

    pub fn new(e11: f64, e22: f64, e33: f64, e12: f64, e13: f64, e23: f64) -> Self {
        SymMatrix3([e11, e22, e33, e12, e13, e23])
    }

    pub fn filled(v: f64) -> Self {
        SymMatrix3([v; 6])
    }

    /// Symmetric part of a full 3x3 matrix.
    pub fn sym_part(m: &[[f64; 3]; 3]) -> Self {
        let mut s = [0.0; 6];
        for (a, &(i, j)) in PAIRS.iter().enumerate() {
            s[a] = 0.5 * (m[i][j] + m[j][i]);
        }
        SymMatrix3(s)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[pair_index(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn norm_sq(&self) -> f64 {
        inner(self, self)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl Add for SymMatrix3 {
    type Output = SymMatrix3;
    fn add(self, o: SymMatrix3) -> SymMatrix3 {
        let mut s = self.0;
        for (a, b) in s.iter_mut().zip(o.0) {
            *a += b;
        }
        SymMatrix3(s)
    }
}

impl Sub for SymMatrix3 {
    type Output = SymMatrix3;
    fn sub(self, o: SymMatrix3) -> SymMatrix3 {
        let mut s = self.0;
        for (a, b) in s.iter_mut().zip(o.0) {
            *a -= b;
        }
        SymMatrix3(s)
    }
}

impl Mul<SymMatrix3> for f64 {
    type Output = SymMatrix3;
    fn mul(self, o: SymMatrix3) -> SymMatrix3 {
        SymMatrix3(o.0.map(|v| self * v))
    }
}

/// `[eta, xi] = sum_ij eta_ij xi_ij`.
pub fn inner(eta: &SymMatrix3, xi: &SymMatrix3) -> f64 {
    (0..6).map(|a| MULT[a] * eta.0[a] * xi.0[a]).sum()
}

/// Fourth-order tensor with minor symmetries, stored in full.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    coeffs: [f64; 81],
}

#[inline]
fn idx4(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 3 + j) * 3 + k) * 3 + l
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

impl Tensor4 {
    /// Validates minor symmetries and coercivity.
    pub fn new(coeffs: [f64; 81]) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let a = coeffs[idx4(i, j, k, l)];
                        if a != coeffs[idx4(j, i, k, l)] || a != coeffs[idx4(i, j, l, k)] {
                            return Err(Error::InvalidParameter(
                                "tensor lacks minor symmetries".into(),
                            ));
                        }
                    }
                }
            }
        }
        let t = Tensor4 { coeffs };
        let c = t.coercivity_constant();
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tensor is not coercive (smallest eigenvalue {c:e})"
            )));
        }
        Ok(t)
    }

    pub fn isotropic(lame_lambda: f64, lame_mu: f64) -> Result<Self> {
        if !(lame_mu > 0.0) || !(3.0 * lame_lambda + 2.0 * lame_mu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "isotropic tensor needs mu > 0 and 3 lambda + 2 mu > 0 (got lambda = {lame_lambda}, mu = {lame_mu})"
            )));
        }
        Tensor4::new(isotropic_coeffs(lame_lambda, lame_mu))
    }

    /// Builds a tensor from the upper triangle (row major, 21 entries) of the
    /// engineering Voigt stiffness in the conventional order
    /// `(11, 22, 33, 23, 13, 12)`.
    pub fn from_voigt21(upper: &[f64]) -> Result<Self> {
        if upper.len() != 21 {
            return Err(Error::InvalidParameter(format!(
                "expected 21 Voigt coefficients, got {}",
                upper.len()
            )));
        }
        const VOIGT: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
        let mut c = [[0.0; 6]; 6];
        let mut n = 0;
        for a in 0..6 {
            for b in a..6 {
                c[a][b] = upper[n];
                c[b][a] = upper[n];
                n += 1;
            }
        }
        let mut coeffs = [0.0; 81];
        for a in 0..6 {
            for b in 0..6 {
                let (i, j) = VOIGT[a];
                let (k, l) = VOIGT[b];
                for &(p, q) in &[(i, j), (j, i)] {
                    for &(s, t) in &[(k, l), (l, k)] {
                        coeffs[idx4(p, q, s, t)] = c[a][b];
                    }
                }
            }
        }
        Tensor4::new(coeffs)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.coeffs[idx4(i, j, k, l)]
    }

    pub fn coeffs(&self) -> &[f64; 81] {
        &self.coeffs
    }

    /// `A` restricted to stored components: `A_ab = A_{ij kl}` with
    /// `a = (i,j)`, `b = (k,l)`.
    pub fn component_matrix(&self) -> [[f64; 6]; 6] {
        let mut m = [[0.0; 6]; 6];
        for (a, &(i, j)) in PAIRS.iter().enumerate() {
            for (b, &(k, l)) in PAIRS.iter().enumerate() {
                m[a][b] = self.get(i, j, k, l);
            }
        }
        m
    }

    /// Matrix `D` with `[A eta, xi] = eta_s^T D xi_s` on stored components.
    pub fn energy_matrix(&self) -> [[f64; 6]; 6] {
        let a = self.component_matrix();
        let mut d = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                d[i][j] = MULT[i] * MULT[j] * a[i][j];
            }
        }
        d
    }

    /// Orthonormal (Mandel) 6x6 representation of the quadratic form.
    pub fn mandel(&self) -> Matrix6<f64> {
        let a = self.component_matrix();
        let w = [1.0, 1.0, 1.0, 2f64.sqrt(), 2f64.sqrt(), 2f64.sqrt()];
        Matrix6::from_fn(|i, j| w[i] * w[j] * a[i][j])
    }

    /// Smallest eigenvalue of the symmetric part of the Mandel matrix.
    pub fn coercivity_constant(&self) -> f64 {
        let m = self.mandel();
        let s = (m + m.transpose()) * 0.5;
        SymmetricEigen::new(s).eigenvalues.min()
    }

    pub fn scaled(&self, k: f64) -> Tensor4 {
        Tensor4 {
            coeffs: self.coeffs.map(|c| k * c),
        }
    }
}

fn isotropic_coeffs(lame_lambda: f64, lame_mu: f64) -> [f64; 81] {
    let mut coeffs = [0.0; 81];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    coeffs[idx4(i, j, k, l)] = lame_lambda * delta(i, j) * delta(k, l)
                        + lame_mu * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k));
                }
            }
        }
    }
    coeffs
}

/// `(A xi)_ij = sum_kl A_ijkl xi_kl`.
pub fn apply(a: &Tensor4, xi: &SymMatrix3) -> SymMatrix3 {
    let mut s = [0.0; 6];
    for (p, &(i, j)) in PAIRS.iter().enumerate() {
        let mut acc = 0.0;
        for k in 0..3 {
            for l in 0..3 {
                acc += a.get(i, j, k, l) * xi.get(k, l);
            }
        }
        s[p] = acc;
    }
    SymMatrix3(s)
}

/// Beam block scaling: `ab / r^2`, `a3 / r`, `33` unchanged.
pub fn rescale_strain_beam(e: &SymMatrix3, r: f64) -> Result<SymMatrix3> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
    }
    let f = beam_factors(r);
    Ok(SymMatrix3(std::array::from_fn(|a| f[a] * e.0[a])))
}

/// Plate block scaling: `ab` unchanged, `a3 / eps`, `33 / eps^2`.
pub fn rescale_strain_plate(e: &SymMatrix3, eps: f64) -> Result<SymMatrix3> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let f = plate_factors(eps);
    Ok(SymMatrix3(std::array::from_fn(|a| f[a] * e.0[a])))
}

pub fn beam_factors(r: f64) -> [f64; 6] {
    let r2 = 1.0 / (r * r);
    [r2, r2, 1.0, r2, 1.0 / r, 1.0 / r]
}

pub fn plate_factors(eps: f64) -> [f64; 6] {
    [1.0, 1.0, 1.0 / (eps * eps), 1.0, 1.0 / eps, 1.0 / eps]
}

/// Beam limit strain from `e_ab(w) = [11, 22, 12]`, `e_a3(v) = [13, 23]`
/// and `e_33(u)`.
pub fn limit_strain_beam(ew: [f64; 3], ev: [f64; 2], eu33: f64) -> SymMatrix3 {
    SymMatrix3([ew[0], ew[1], eu33, ew[2], ev[0], ev[1]])
}

/// Plate limit strain from `e_ab(u) = [11, 22, 12]`, `e_a3(v) = [13, 23]`
/// and `e_33(w)`.
pub fn limit_strain_plate(eu: [f64; 3], ev: [f64; 2], ew33: f64) -> SymMatrix3 {
    SymMatrix3([eu[0], eu[1], ew33, eu[2], ev[0], ev[1]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn isotropic_shear_only_doubles() {
        let a = Tensor4::isotropic(0.0, 1.0).unwrap();
        let xi = SymMatrix3::new(0.3, -1.0, 2.0, 0.5, -0.25, 0.75);
        let r = apply(&a, &xi);
        for k in 0..6 {
            assert_relative_eq!(r.0[k], 2.0 * xi.0[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn isotropic_unit_energy_of_identity() {
        let a = Tensor4::isotropic(1.0, 1.0).unwrap();
        let i = SymMatrix3::identity();
        assert_relative_eq!(inner(&apply(&a, &i), &i), 15.0, epsilon = 1e-14);
    }

    #[test]
    fn isotropic_rejects_negative_mu() {
        assert!(Tensor4::isotropic(1.0, -1.0).is_err());
        assert!(Tensor4::isotropic(-1.0, 1.0).is_err());
    }

    #[test]
    fn apply_examples() {
        let a = Tensor4::isotropic(0.0, 1.0).unwrap();
        assert_eq!(apply(&a, &SymMatrix3::identity()), 2.0 * SymMatrix3::identity());
        // mu = 0 is not coercive, so bypass the validating constructor
        let b = Tensor4 { coeffs: isotropic_coeffs(1.0, 0.0) };
        assert_eq!(apply(&b, &SymMatrix3::identity()), 3.0 * SymMatrix3::identity());
        assert!(Tensor4::isotropic(1.0, 0.0).is_err());
        assert_eq!(apply(&a, &SymMatrix3::ZERO), SymMatrix3::ZERO);
    }

    #[test]
    fn inner_examples() {
        let i = SymMatrix3::identity();
        assert_eq!(inner(&i, &i), 3.0);
        let ones = SymMatrix3::filled(1.0);
        assert_eq!(inner(&ones, &ones), 9.0);
        assert_eq!(inner(&ones, &SymMatrix3::ZERO), 0.0);
    }

    #[test]
    fn block_scalings() {
        let ones = SymMatrix3::filled(1.0);
        let b = rescale_strain_beam(&ones, 0.5).unwrap();
        assert_eq!(b, SymMatrix3::new(4.0, 4.0, 1.0, 4.0, 2.0, 2.0));
        let p = rescale_strain_plate(&ones, 0.5).unwrap();
        assert_eq!(p, SymMatrix3::new(1.0, 1.0, 4.0, 1.0, 2.0, 2.0));
        assert_eq!(rescale_strain_beam(&ones, 1.0).unwrap(), ones);
        assert_eq!(rescale_strain_plate(&SymMatrix3::ZERO, 0.3).unwrap(), SymMatrix3::ZERO);
        assert!(rescale_strain_beam(&ones, 0.0).is_err());
        assert!(rescale_strain_plate(&ones, -1.0).is_err());
    }

    #[test]
    fn limit_strain_examples() {
        assert_eq!(limit_strain_beam([0.0; 3], [0.0; 2], 0.0), SymMatrix3::ZERO);
        assert_eq!(
            limit_strain_beam([0.0; 3], [0.0; 2], 1.0),
            SymMatrix3::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(
            limit_strain_plate([1.0, 0.0, 0.0], [0.0; 2], 0.0),
            SymMatrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn voigt_input_matches_isotropic() {
        let (l, m) = (1.3, 0.7);
        let d = l + 2.0 * m;
        let upper = [
            d, l, l, 0.0, 0.0, 0.0, d, l, 0.0, 0.0, 0.0, d, 0.0, 0.0, 0.0, m, 0.0, 0.0, m, 0.0, m,
        ];
        let a = Tensor4::from_voigt21(&upper).unwrap();
        let b = Tensor4::isotropic(l, m).unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert_relative_eq!(x, y, epsilon = 1e-15);
        }
        assert!(Tensor4::from_voigt21(&upper[..20]).is_err());
    }

    #[test]
    fn rejects_broken_minor_symmetry() {
        let mut c = *Tensor4::isotropic(1.0, 1.0).unwrap().coeffs();
        c[idx4(0, 1, 0, 1)] += 0.1;
        assert!(Tensor4::new(c).is_err());
    }

    fn sym() -> impl Strategy<Value = SymMatrix3> {
        prop::array::uniform6(-10.0f64..10.0).prop_map(SymMatrix3)
    }

    proptest! {
        #[test]
        fn coercive_with_isotropic_constant(l in -0.6f64..5.0, m in 0.05f64..5.0, xi in sym()) {
            prop_assume!(3.0 * l + 2.0 * m > 1e-3);
            let a = Tensor4::isotropic(l, m).unwrap();
            let c = (2.0 * m).min(3.0 * l + 2.0 * m);
            let lhs = inner(&apply(&a, &xi), &xi);
            prop_assert!(lhs >= c * inner(&xi, &xi) * (1.0 - 1e-12) - 1e-12);
            prop_assert!((a.coercivity_constant() - c).abs() <= 1e-10 * (1.0 + c.abs()));
        }

        #[test]
        fn apply_is_self_adjoint(l in -0.6f64..5.0, m in 0.05f64..5.0, xi in sym(), eta in sym()) {
            prop_assume!(3.0 * l + 2.0 * m > 1e-3);
            let a = Tensor4::isotropic(l, m).unwrap();
            let x = inner(&apply(&a, &xi), &eta);
            let y = inner(&xi, &apply(&a, &eta));
            // round-off scales with the operands, not the (possibly cancelled) result
            let scale = (3.0 * l.abs() + 2.0 * m) * inner(&xi, &xi).sqrt() * inner(&eta, &eta).sqrt();
            prop_assert!((x - y).abs() <= 1e-14 * (1.0 + scale));
        }

        #[test]
        fn beam_scaling_inverts(e in sym(), r in 0.01f64..10.0) {
            let back = rescale_strain_beam(&rescale_strain_beam(&e, r).unwrap(), 1.0 / r).unwrap();
            for k in 0..6 {
                prop_assert!((back.0[k] - e.0[k]).abs() <= 1e-12 * (1.0 + e.0[k].abs()));
            }
        }
    }
}
