mod common;

use common::{omega_a, omega_b, PolyLoads};
use junction_core::limit::{
    assemble_limit_load, kkt_system, limit_energy, limit_energy_parts, load_functional, solve_limit, Field, LimitDiscretization,
    LimitFields, LimitForms, LimitState, ZeroLoads, FIELDS,
};
use junction_core::quadrature::gauss;
use junction_core::{Regime, Tensor4};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

fn disc(nz: usize, ns: usize, np: usize, nt: usize) -> LimitDiscretization {
    LimitDiscretization::uniform(nz, ns, np, nt, omega_a(), omega_b()).unwrap()
}

fn shear_only() -> Tensor4 {
    Tensor4::isotropic(0.0, 1.0).unwrap()
}

fn forms(d: &LimitDiscretization) -> LimitForms {
    let a = Tensor4::isotropic(0.7, 1.3).unwrap();
    LimitForms::new(d, &a, &a)
}

fn finite() -> Regime {
    Regime::Finite { q: 1.0 }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

struct Stretch;
impl LimitFields for Stretch {
    fn zeta_a(&self, z: f64) -> f64 {
        1.0 - z
    }
}

struct Twist;
impl LimitFields for Twist {
    fn c(&self, z: f64) -> f64 {
        z
    }
}

struct Bend;
impl LimitFields for Bend {
    fn u_b3(&self, x: [f64; 2]) -> [f64; 4] {
        [x[0] * x[0], 2.0 * x[0], 0.0, 0.0]
    }
}

struct Membrane;
impl LimitFields for Membrane {
    fn zeta_b(&self, alpha: usize, x: [f64; 2]) -> f64 {
        if alpha == 0 {
            x[0]
        } else {
            0.0
        }
    }
}

#[test]
fn zero_state_has_zero_energy() {
    let d = disc(3, 2, 4, 2);
    let f = forms(&d);
    let z = LimitState::zeros(d, finite());
    assert_eq!(limit_energy(&z, &f), 0.0);
}

#[test]
fn pure_stretch_energy() {
    let d = disc(4, 2, 2, 1);
    let a = shear_only();
    let f = LimitForms::new(&d, &a, &a);
    let z = LimitState::from_fields(d, finite(), &Stretch);
    let (ea, eb) = limit_energy_parts(&z, &f);
    assert!(rel(ea, 2.0 * omega_a().area()) < 1e-12, "{ea}");
    assert_eq!(eb, 0.0);
}

#[test]
fn pure_twist_energy_is_polar_moment() {
    let d = disc(4, 4, 2, 1);
    let a = shear_only();
    let f = LimitForms::new(&d, &a, &a);
    let z = LimitState::from_fields(d, finite(), &Twist);
    let (ea, _) = limit_energy_parts(&z, &f);
    assert!(rel(ea, omega_a().polar_moment()) < 1e-12, "{ea} vs {}", omega_a().polar_moment());
}

#[test]
fn pure_bending_energy_has_thickness_moment() {
    // u3 = x1^2: e11 = -2 x3, energy = int 2 * 4 x3^2 = 8 * |omega_b| / 3.
    let d = disc(2, 2, 4, 2);
    let a = shear_only();
    let f = LimitForms::new(&d, &a, &a);
    let z = LimitState::from_fields(d, finite(), &Bend);
    let (_, eb) = limit_energy_parts(&z, &f);
    assert!(rel(eb, 8.0 * omega_b().area() / 3.0) < 1e-12, "{eb}");
}

#[test]
fn pure_membrane_energy() {
    let d = disc(2, 2, 4, 2);
    let a = shear_only();
    let f = LimitForms::new(&d, &a, &a);
    let z = LimitState::from_fields(d, finite(), &Membrane);
    let (_, eb) = limit_energy_parts(&z, &f);
    assert!(rel(eb, 2.0 * omega_b().area()) < 1e-12, "{eb}");
}

#[test]
fn membrane_form_matches_numerical_differentiation_oracle() {
    // Random bilinear membrane fields; the oracle differentiates the
    // evaluated field numerically and integrates with its own Gauss rule.
    let d = disc(2, 2, 6, 1);
    let (lam, mu) = (0.7, 1.3);
    let a = Tensor4::isotropic(lam, mu).unwrap();
    let f = LimitForms::new(&d, &a, &a);
    let mut z = LimitState::zeros(d.clone(), finite());
    let mut rng = StdRng::seed_from_u64(12345);
    for fld in [Field::ZetaB1, Field::ZetaB2] {
        for i in 0..d.len(fld) {
            z.coeffs[d.offset(fld) + i] = rng.random_range(-0.5..0.5);
        }
    }
    let (_, eb) = limit_energy_parts(&z, &f);
    let (p, w) = gauss(2);
    let h = 1e-6;
    let mut oracle = 0.0;
    for j in 0..d.plate_y.len() - 1 {
        for i in 0..d.plate_x.len() - 1 {
            let (x0, x1) = (d.plate_x[i], d.plate_x[i + 1]);
            let (y0, y1) = (d.plate_y[j], d.plate_y[j + 1]);
            for b in 0..2 {
                for aa in 0..2 {
                    let x = [0.5 * (x0 + x1) + 0.5 * (x1 - x0) * p[aa], 0.5 * (y0 + y1) + 0.5 * (y1 - y0) * p[b]];
                    let g = |fld: Field, dir: usize| {
                        let mut xp = x;
                        let mut xm = x;
                        xp[dir] += h;
                        xm[dir] -= h;
                        (z.membrane(fld, xp) - z.membrane(fld, xm)) / (2.0 * h)
                    };
                    let (e11, e22) = (g(Field::ZetaB1, 0), g(Field::ZetaB2, 1));
                    let e12 = 0.5 * (g(Field::ZetaB1, 1) + g(Field::ZetaB2, 0));
                    let dens = lam * (e11 + e22).powi(2) + 2.0 * mu * (e11 * e11 + e22 * e22 + 2.0 * e12 * e12);
                    oracle += 0.25 * w[aa] * w[b] * (x1 - x0) * (y1 - y0) * dens;
                }
            }
        }
    }
    assert!(rel(eb, oracle) < 1e-8, "{eb} vs {oracle}");
}

#[test]
fn axial_beam_force_loads_only_zeta() {
    let d = disc(4, 4, 4, 2);
    let l = PolyLoads { f_beam: [0.0, 0.0, 1.0], ..Default::default() };
    let load = assemble_limit_load(&d, &l);
    let o = d.offset(Field::ZetaA);
    let total: f64 = load[o..o + d.len(Field::ZetaA)].iter().sum();
    assert!(rel(total, omega_a().area()) < 1e-13, "{total}");
    for f in FIELDS.iter().filter(|f| **f != Field::ZetaA) {
        let m = load[d.offset(*f)..d.offset(*f) + d.len(*f)].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(m < 1e-14, "{} loaded: {m}", f.name());
    }
}

#[test]
fn shear_stress_13_loads_only_the_v_block() {
    let d = disc(4, 4, 4, 2);
    let l = PolyLoads { g_beam: [0.0, 0.0, 0.0, 0.0, 1.0, 0.0], ..Default::default() };
    let load = assemble_limit_load(&d, &l);
    for f in FIELDS.iter().filter(|f| !matches!(f, Field::VA3 | Field::C)) {
        let m = load[d.offset(*f)..d.offset(*f) + d.len(*f)].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(m < 1e-14, "{} loaded: {m}", f.name());
    }
    let o = d.offset(Field::VA3);
    assert!(load[o..o + d.len(Field::VA3)].iter().any(|v| v.abs() > 1e-3));
}

#[test]
fn zero_loads_give_zero_state() {
    let d = disc(4, 2, 4, 2);
    let f = forms(&d);
    let load = assemble_limit_load(&d, &ZeroLoads);
    assert!(load.iter().all(|&v| v == 0.0));
    for regime in [finite(), Regime::Infinite, Regime::Zero] {
        let (z, _) = solve_limit(&f, regime, &load).unwrap();
        assert!(z.coeffs.iter().all(|&v| v == 0.0));
        assert_eq!(limit_energy(&z, &f), 0.0);
    }
}

#[test]
fn superposition_homogeneity_and_galerkin_identity() {
    let d = disc(6, 4, 6, 2);
    let f = forms(&d);
    let (l1, l2) = (PolyLoads::beam_only(), PolyLoads::plate_only());
    let v1 = assemble_limit_load(&d, &l1);
    let v2 = assemble_limit_load(&d, &l2);
    let v12 = assemble_limit_load(&d, &l1.plus(&l2));
    for regime in [Regime::Finite { q: 2.5 }, Regime::Infinite, Regime::Zero] {
        let (z1, _) = solve_limit(&f, regime, &v1).unwrap();
        let (z2, _) = solve_limit(&f, regime, &v2).unwrap();
        let (z12, _) = solve_limit(&f, regime, &v12).unwrap();
        let scale = z12.coeffs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let err = z12.coeffs.iter().zip(z1.coeffs.iter().zip(&z2.coeffs)).map(|(a, (b, c))| (a - b - c).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-10 * scale.max(1.0), "{}: {err}", regime.name());

        let e = limit_energy(&z12, &f);
        let l = load_functional(&z12, &v12);
        assert!(e > 0.0);
        assert!(rel(e, l) < 1e-9, "{}: E = {e}, L = {l}", regime.name());

        let doubled: Vec<f64> = v12.iter().map(|v| 2.0 * v).collect();
        let (zd, _) = solve_limit(&f, regime, &doubled).unwrap();
        assert!(rel(limit_energy(&zd, &f), 4.0 * e) < 1e-9);
    }
}

#[test]
fn solved_states_satisfy_space_conditions() {
    let d = disc(8, 4, 8, 2);
    let f = forms(&d);
    let load = assemble_limit_load(&d, &PolyLoads::both());
    for regime in [finite(), Regime::Infinite, Regime::Zero] {
        let (z, stats) = solve_limit(&f, regime, &load).unwrap();
        assert!(z.constraint_violation() <= 1e-10, "{}: {}", regime.name(), z.constraint_violation());
        for i in d.fixed_coeffs(regime) {
            assert_eq!(z.coeffs[i], 0.0);
        }
        assert_eq!(stats.n_multipliers, d.constraint_rows(regime).len());
        assert_eq!(z.multipliers.len(), stats.n_multipliers);
        match regime {
            Regime::Finite { .. } => {
                let six = z.six_conditions();
                assert!(six.iter().all(|v| v.abs() <= 1e-10), "{six:?}");
                assert!(z.u_b3_origin().abs() > 1e-6, "coupling should be active");
            }
            Regime::Infinite => assert_eq!(z.zeta_a(0.0), 0.0),
            Regime::Zero => assert_eq!(z.u_b3_origin(), 0.0),
        }
    }
}

#[test]
fn decoupled_regimes_ignore_the_other_subdomain() {
    let d = disc(4, 2, 4, 2);
    let f = forms(&d);
    let (z, _) = solve_limit(&f, Regime::Infinite, &assemble_limit_load(&d, &PolyLoads::plate_only())).unwrap();
    assert!(z.coeffs.iter().all(|&v| v == 0.0));
    let (z, _) = solve_limit(&f, Regime::Zero, &assemble_limit_load(&d, &PolyLoads::beam_only())).unwrap();
    assert!(z.coeffs.iter().all(|&v| v == 0.0));
}

#[test]
fn stiff_plate_approaches_beam_only_limit() {
    let d = disc(8, 4, 8, 2);
    let f = forms(&d);
    let load = assemble_limit_load(&d, &PolyLoads::both());
    let (zq, _) = solve_limit(&f, Regime::Finite { q: 1e6 }, &load).unwrap();
    let (zi, _) = solve_limit(&f, Regime::Infinite, &load).unwrap();
    let mut diff = LimitState::zeros(d.clone(), Regime::Infinite);
    for fld in FIELDS.iter().filter(|f| f.is_beam()) {
        for i in d.offset(*fld)..d.offset(*fld) + d.len(*fld) {
            diff.coeffs[i] = zq.coeffs[i] - zi.coeffs[i];
        }
    }
    let (num, _) = limit_energy_parts(&diff, &f);
    let (den, _) = limit_energy_parts(&zi, &f);
    assert!(den > 0.0);
    assert!((num / den).sqrt() <= 0.01, "relative energy-norm gap {}", (num / den).sqrt());
}

#[test]
fn saddle_system_inertia_matches_multiplier_count() {
    let d = disc(2, 2, 2, 1);
    let f = forms(&d);
    let load = assemble_limit_load(&d, &PolyLoads::both());
    for regime in [finite(), Regime::Infinite, Regime::Zero] {
        let sys = kkt_system(&f, regime, &load);
        assert!(sys.matrix.max_asymmetry() <= 1e-14 * sys.matrix.max_abs());
        let m = sys.matrix.to_dense();
        assert!(m.nrows() <= 400);
        let eig = m.symmetric_eigen().eigenvalues;
        let scale = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let neg = eig.iter().filter(|&&v| v < 0.0).count();
        let tiny = eig.iter().filter(|&&v| v.abs() <= 1e-10 * scale).count();
        assert_eq!(tiny, 0, "{}: singular saddle system", regime.name());
        assert_eq!(neg, sys.n_multipliers, "{}", regime.name());
    }
}

#[test]
fn limit_energy_self_converges() {
    let energy = |n: usize| {
        let d = disc(2 * n, n, 2 * n, 2);
        let f = forms(&d);
        let load = assemble_limit_load(&d, &PolyLoads::both());
        let (z, _) = solve_limit(&f, finite(), &load).unwrap();
        limit_energy(&z, &f)
    };
    let e: Vec<f64> = [2, 4, 8].iter().map(|&n| energy(n)).collect();
    let ratio = (e[1] - e[0]).abs() / (e[2] - e[1]).abs();
    assert!(ratio >= 2.0, "energies {e:?}, ratio {ratio}");
}

#[test]
fn json_export_names_every_block() {
    let d = disc(2, 2, 2, 1);
    let z = LimitState::zeros(d.clone(), finite());
    let v = z.to_json();
    let names = [
        "u_a_1", "u_a_2", "zeta_a", "c", "v_a_3", "w_a_1", "w_a_2", "zeta_b_1", "zeta_b_2", "u_b_3", "v_b_1", "v_b_2", "w_b_3",
    ];
    let blocks = v["blocks"].as_object().unwrap();
    assert_eq!(blocks.len(), names.len());
    for (n, f) in names.iter().zip(FIELDS) {
        assert_eq!(blocks[*n].as_array().unwrap().len(), d.len(f));
    }
    assert_eq!(v["discretization"]["beam_x3"].as_array().unwrap().len(), 3);
}

#[test]
fn interpolated_states_satisfy_conditions_exactly() {
    let d = disc(6, 4, 6, 2);
    let z = LimitState::interpolate(d, finite(), &common::PolyState::default());
    assert!(z.constraint_violation() <= 1e-13);
    assert!(z.six_conditions().iter().all(|v| v.abs() <= 1e-15));
}
