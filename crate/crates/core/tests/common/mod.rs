#![allow(dead_code)]

use junction_core::limit::{LimitFields, LimitLoads};
use junction_core::mesh::{build_beam_mesh, build_plate_mesh};
use junction_core::{CrossSection, Grading, MultidomainMesh, SymMatrix3};

pub fn omega_a() -> CrossSection {
    CrossSection::new(0.5, 0.5).unwrap()
}

pub fn omega_b() -> CrossSection {
    CrossSection::new(1.0, 1.0).unwrap()
}

pub fn mesh(beam: [usize; 3], plate: Grading, plate_nz: usize) -> MultidomainMesh {
    let (a, b) = (omega_a(), omega_b());
    MultidomainMesh::new(
        a,
        b,
        build_beam_mesh(beam[0], beam[1], beam[2], a).unwrap(),
        build_plate_mesh(plate, plate, plate_nz, b, None).unwrap(),
    )
}

pub fn default_mesh() -> MultidomainMesh {
    mesh([6, 6, 24], Grading::Geometric { n: 40, ratio: 1.085 }, 4)
}

/// Polynomial loads with independent switches per term.
#[derive(Debug, Clone, Copy, Default)]
pub struct PolyLoads {
    pub f_beam: [f64; 3],
    pub f_plate: [f64; 3],
    pub g_beam: [f64; 6],
    pub g_plate: [f64; 6],
    pub h_lateral: [f64; 3],
    pub h_top: [f64; 3],
    pub h_bottom: [f64; 3],
    /// Constant data when false, otherwise multiplied by a smooth profile.
    pub varying: bool,
}

impl PolyLoads {
    fn prof(&self, x: [f64; 3]) -> f64 {
        if self.varying {
            1.0 + 0.5 * x[0] - 0.3 * x[1] + 0.7 * x[2] + x[0] * x[1]
        } else {
            1.0
        }
    }
    fn v(&self, a: [f64; 3], x: [f64; 3]) -> [f64; 3] {
        let p = self.prof(x);
        a.map(|c| c * p)
    }
    pub fn beam_only() -> Self {
        PolyLoads { f_beam: [0.3, -0.2, 1.0], h_lateral: [0.1, 0.2, 0.0], varying: true, ..Default::default() }
    }
    pub fn plate_only() -> Self {
        PolyLoads { f_plate: [0.2, 0.1, 1.0], h_bottom: [-0.3, 0.2, 0.5], varying: true, ..Default::default() }
    }
    pub fn both() -> Self {
        let b = PolyLoads::beam_only();
        PolyLoads { f_beam: b.f_beam, h_lateral: b.h_lateral, g_beam: [0.0, 0.0, 0.2, 0.0, 0.1, 0.0], ..PolyLoads::plate_only() }
    }
    pub fn plus(&self, o: &PolyLoads) -> PolyLoads {
        let add3 = |a: [f64; 3], b: [f64; 3]| [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
        let add6 = |a: [f64; 6], b: [f64; 6]| {
            let mut c = a;
            for i in 0..6 {
                c[i] += b[i];
            }
            c
        };
        assert_eq!(self.varying, o.varying);
        PolyLoads {
            f_beam: add3(self.f_beam, o.f_beam),
            f_plate: add3(self.f_plate, o.f_plate),
            g_beam: add6(self.g_beam, o.g_beam),
            g_plate: add6(self.g_plate, o.g_plate),
            h_lateral: add3(self.h_lateral, o.h_lateral),
            h_top: add3(self.h_top, o.h_top),
            h_bottom: add3(self.h_bottom, o.h_bottom),
            varying: self.varying,
        }
    }
}

impl LimitLoads for PolyLoads {
    fn f_beam(&self, x: [f64; 3]) -> [f64; 3] {
        self.v(self.f_beam, x)
    }
    fn f_plate(&self, x: [f64; 3]) -> [f64; 3] {
        self.v(self.f_plate, x)
    }
    fn g_beam(&self, x: [f64; 3]) -> SymMatrix3 {
        self.prof(x) * SymMatrix3(self.g_beam)
    }
    fn g_plate(&self, x: [f64; 3]) -> SymMatrix3 {
        self.prof(x) * SymMatrix3(self.g_plate)
    }
    fn h_lateral(&self, x: [f64; 3]) -> [f64; 3] {
        self.v(self.h_lateral, x)
    }
    fn h_top(&self, xp: [f64; 2]) -> [f64; 3] {
        self.v(self.h_top, [xp[0], xp[1], 0.0])
    }
    fn h_bottom(&self, xp: [f64; 2]) -> [f64; 3] {
        self.v(self.h_bottom, [xp[0], xp[1], -1.0])
    }
}

/// Bubble vanishing with its normal derivative on the boundary of
/// `(-1, 1)^2`: returns `(B, d1 B, d2 B, d12 B)` for `B = (1-x^2)^2 (1-y^2)^2`.
pub fn clamped_bubble(x: [f64; 2]) -> [f64; 4] {
    let (p, q) = (1.0 - x[0] * x[0], 1.0 - x[1] * x[1]);
    let (dp, dq) = (-4.0 * x[0] * p, -4.0 * x[1] * q);
    [p * p * q * q, dp * q * q, p * p * dq, dp * dq]
}

/// `(1 - x^2)(1 - y^2)`.
pub fn simple_bubble(x: [f64; 2]) -> f64 {
    (1.0 - x[0] * x[0]) * (1.0 - x[1] * x[1])
}

/// Smooth polynomial state in the coupled space. Fields vanish where the
/// lifted 3D displacement is clamped and are flat at the junction, so the
/// round trip through lift and extraction is limited by discretization.
#[derive(Debug, Clone, Copy)]
pub struct PolyState {
    pub bend: f64,
    pub deflection: f64,
}

impl Default for PolyState {
    fn default() -> Self {
        PolyState { bend: 0.02, deflection: 0.02 }
    }
}

impl LimitFields for PolyState {
    fn u_a(&self, alpha: usize, z: f64) -> (f64, f64) {
        let a = self.bend * if alpha == 0 { 1.0 } else { -0.6 };
        let s = z * z * (1.0 - z) * (1.0 - z);
        let ds = 2.0 * z * (1.0 - z) * (1.0 - 2.0 * z);
        (a * s, a * ds)
    }
    fn zeta_a(&self, z: f64) -> f64 {
        self.deflection * (1.0 - z)
    }
    fn c(&self, z: f64) -> f64 {
        z * (1.0 - z)
    }
    fn v_a3(&self, x: [f64; 3]) -> f64 {
        4.0 * x[0] * x[1] * x[2] * (1.0 - x[2])
    }
    fn w_a(&self, alpha: usize, x: [f64; 3]) -> f64 {
        let t = x[2] * (1.0 - x[2]);
        if alpha == 0 {
            4.0 * (x[0] * x[0] - 1.0 / 12.0) * t
        } else {
            4.0 * x[0] * x[1] * t
        }
    }
    fn zeta_b(&self, alpha: usize, x: [f64; 2]) -> f64 {
        let b = simple_bubble(x);
        if alpha == 0 {
            0.3 * x[0] * x[0] * b
        } else {
            0.2 * x[1] * x[1] * b
        }
    }
    fn u_b3(&self, x: [f64; 2]) -> [f64; 4] {
        clamped_bubble(x).map(|v| self.deflection * v)
    }
    fn v_b(&self, alpha: usize, x: [f64; 3]) -> f64 {
        // zero column mean and zero on the top face
        x[2] * (3.0 * x[2] + 2.0) * x[alpha] * simple_bubble([x[0], x[1]])
    }
    fn w_b3(&self, x: [f64; 3]) -> f64 {
        0.1 * (x[2] * x[2] - 1.0 / 3.0) * x[0] * x[1] * simple_bubble([x[0], x[1]])
    }
}

pub fn finite_params(eps: f64) -> junction_core::ScalingParams {
    let r = eps.powf(1.5);
    junction_core::ScalingParams::new(eps, r, r * r / eps.powi(3)).unwrap()
}

/// Round-trip errors of extraction after lifting.
#[derive(Debug, Clone, Copy)]
pub struct RoundTrip {
    /// Relative L2 errors `[c, v3, w1, w2, vb1, vb2, wb3]` over the whole
    /// beam and plate.
    pub full: [f64; 7],
    /// Same, with the beam fields measured above the interpolation layer,
    /// where the lift is the plain expansion.
    pub outer: [f64; 7],
}

fn rel_errors(
    got: &(junction_core::correctors::BeamCorrectors, junction_core::correctors::PlateCorrectors),
    want: &(junction_core::correctors::BeamCorrectors, junction_core::correctors::PlateCorrectors),
    m: &MultidomainMesh,
) -> [f64; 7] {
    use junction_core::correctors::{corrector_distances, corrector_norms};
    let d = corrector_distances(got, want, m);
    let n = corrector_norms(want, m);
    [0, 1, 2, 3, 4, 5, 6].map(|i| d[i] / n[i])
}

/// Beam correctors restricted to levels `kl..`.
fn above(c: &junction_core::correctors::BeamCorrectors, ls: usize, kl: usize) -> junction_core::correctors::BeamCorrectors {
    let cut = |v: &Vec<f64>| v[kl * ls..].to_vec();
    junction_core::correctors::BeamCorrectors {
        levels: c.levels[kl..].to_vec(),
        c_eps: c.c_eps[kl..].to_vec(),
        d_eps: [Vec::new(), Vec::new()],
        v3_eps: cut(&c.v3_eps),
        w_eps: [cut(&c.w_eps[0]), cut(&c.w_eps[1])],
    }
}

pub fn round_trip(m: &MultidomainMesh, eps: f64) -> RoundTrip {
    use junction_core::correctors::{extract_beam, extract_plate, interpolation_layer, lift, sample_correctors};
    use junction_core::limit::{LimitDiscretization, LimitState};
    use junction_core::mesh::build_junction_map;
    let p = finite_params(eps);
    let z = LimitState::interpolate(
        LimitDiscretization::from_mesh(m).unwrap(),
        junction_core::Regime::Finite { q: 1.0 },
        &PolyState::default(),
    );
    let j = build_junction_map(m, p.r).unwrap();
    let u = lift(&z, &p, m, &j).unwrap();
    let got = (extract_beam(&u.beam, &m.beam, p.r), extract_plate(&u.plate, &m.plate, eps));
    let want = sample_correctors(&z, m);
    let full = rel_errors(&got, &want, m);

    let kl = interpolation_layer(&m.beam, p.r).unwrap();
    let ls = m.beam.layer_size();
    let mut upper = m.clone();
    upper.beam.zs = m.beam.zs[kl..].to_vec();
    let outer = rel_errors(&(above(&got.0, ls, kl), got.1), &(above(&want.0, ls, kl), want.1), &upper);
    RoundTrip { full, outer }
}
