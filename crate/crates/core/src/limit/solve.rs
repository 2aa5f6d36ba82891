use super::{LimitForms, LimitState};
use crate::error::Result;
use crate::scaling::Regime;
use crate::sparse::{dot, solve_general, CsrMatrix, SolveStats};
use serde::{Deserialize, Serialize};

/// Relative residual accepted for the saddle system. Iterative refinement of
/// the LU solve stalls near 1e-10 on graded plate grids.
pub const LIMIT_SOLVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSolveStats {
    pub solve: SolveStats,
    pub n_coeffs: usize,
    pub n_free: usize,
    pub n_multipliers: usize,
}

/// Weights of the beam and plate forms in the regime energy.
fn weights(regime: Regime) -> (f64, f64) {
    match regime {
        Regime::Finite { q } => (1.0, q),
        Regime::Infinite => (1.0, 0.0),
        Regime::Zero => (0.0, 1.0),
    }
}

/// Saddle system over the free coefficients and the multipliers.
#[derive(Debug, Clone)]
pub struct KktSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Unknown of every coefficient; `None` when fixed to zero. The tied
    /// coefficient shares its master's unknown.
    pub map: Vec<Option<usize>>,
    pub n_free: usize,
    pub n_multipliers: usize,
}

pub fn kkt_system(forms: &LimitForms, regime: Regime, load: &[f64]) -> KktSystem {
    let d = &forms.disc;
    let n = d.n_coeffs();
    let mut map: Vec<Option<usize>> = vec![Some(0); n];
    for i in d.fixed_coeffs(regime) {
        map[i] = None;
    }
    let tie = d.tie(regime);
    if let Some((s, _)) = tie {
        map[s] = None;
    }
    let mut n_free = 0;
    for m in map.iter_mut().flatten() {
        *m = n_free;
        n_free += 1;
    }
    if let Some((s, m)) = tie {
        map[s] = map[m];
    }

    let (wa, wb) = weights(regime);
    let rows = d.constraint_rows(regime);
    let mut t = Vec::new();
    for (mat, w) in [(&forms.beam, wa), (&forms.plate, wb)] {
        if w == 0.0 {
            continue;
        }
        for (i, j, v) in mat.triplets() {
            if let (Some(a), Some(b)) = (map[i], map[j]) {
                t.push((a, b, w * v));
            }
        }
    }
    for (r, row) in rows.iter().enumerate() {
        for &(i, w) in row {
            let a = map[i].expect("constrained coefficient is free");
            t.push((n_free + r, a, w));
            t.push((a, n_free + r, w));
        }
    }
    let size = n_free + rows.len();
    let mut rhs = vec![0.0; size];
    for (i, &f) in load.iter().enumerate() {
        if let Some(a) = map[i] {
            rhs[a] += f;
        }
    }
    KktSystem { matrix: CsrMatrix::from_triplets(size, size, &t), rhs, map, n_free, n_multipliers: rows.len() }
}

/// Minimizes the regime energy minus `L` over the limit space. The mean and
/// moment conditions are imposed with Lagrange multipliers.
pub fn solve_limit(forms: &LimitForms, regime: Regime, load: &[f64]) -> Result<(LimitState, LimitSolveStats)> {
    let sys = kkt_system(forms, regime, load);
    let (x, solve) = solve_general(&sys.matrix, &sys.rhs, LIMIT_SOLVE_TOL)?;
    let mut st = LimitState::zeros(forms.disc.clone(), regime);
    for (i, m) in sys.map.iter().enumerate() {
        if let Some(a) = m {
            st.coeffs[i] = x[*a];
        }
    }
    st.multipliers = x[sys.n_free..].to_vec();
    let stats = LimitSolveStats { solve, n_coeffs: st.coeffs.len(), n_free: sys.n_free, n_multipliers: sys.n_multipliers };
    Ok((st, stats))
}

/// `(a_a(z, z), a_b(z, z))` without the regime weight.
pub fn limit_energy_parts(st: &LimitState, forms: &LimitForms) -> (f64, f64) {
    (forms.beam.quad(&st.coeffs), forms.plate.quad(&st.coeffs))
}

/// Regime energy: `E_a + q E_b`, `E_a` or `E_b`.
pub fn limit_energy(st: &LimitState, forms: &LimitForms) -> f64 {
    let (wa, wb) = weights(st.regime);
    let (ea, eb) = limit_energy_parts(st, forms);
    wa * ea + wb * eb
}

pub fn load_functional(st: &LimitState, load: &[f64]) -> f64 {
    dot(&st.coeffs, load)
}
