use crate::element::StrainRule;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::mesh::{build_beam_mesh, build_plate_mesh, CrossSection, Grading, MultidomainMesh};
use crate::scaling::{PhysicalSources, Regime, SymExpr, VecExpr};
use crate::tensor::Tensor4;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    /// Half-widths of `omega_a`.
    pub omega_a: [f64; 2],
    /// Half-widths of `omega_b`.
    pub omega_b: [f64; 2],
    /// Beam elements along `x1, x2, x3`.
    pub beam_mesh: [usize; 3],
    pub plate_grading: Grading,
    pub plate_nz: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Material {
    Isotropic { lambda: f64, mu: f64 },
    /// Upper triangle of the 6x6 Voigt matrix, order (11, 22, 33, 23, 13, 12).
    Voigt { c: Vec<f64> },
}

impl Material {
    pub fn tensor(&self) -> Result<Tensor4> {
        match self {
            Material::Isotropic { lambda, mu } => Tensor4::isotropic(*lambda, *mu),
            Material::Voigt { c } => Tensor4::from_voigt21(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Materials {
    pub beam: Material,
    pub plate: Material,
    #[serde(default)]
    pub rule: StrainRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeKind {
    Finite,
    Infinite,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub regime: RegimeKind,
    /// Limit of `q_eps` in the finite regime.
    #[serde(default = "one")]
    pub q_target: f64,
    pub eps_list: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

impl Schedule {
    pub fn regime(&self) -> Regime {
        match self.regime {
            RegimeKind::Finite => Regime::Finite { q: self.q_target },
            RegimeKind::Infinite => Regime::Infinite,
            RegimeKind::Zero => Regime::Zero,
        }
    }
}

/// Source expressions in physical coordinates; missing entries are zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sources {
    pub f_beam: Option<[String; 3]>,
    pub f_plate: Option<[String; 3]>,
    pub g_beam: Option<[String; 6]>,
    pub g_plate: Option<[String; 6]>,
    pub h_lateral: Option<[String; 3]>,
    pub h_top: Option<[String; 3]>,
    pub h_bottom: Option<[String; 3]>,
}

fn vec_expr(s: &Option<[String; 3]>) -> Result<Option<VecExpr>> {
    s.as_ref()
        .map(|v| Ok([Expr::parse(&v[0])?, Expr::parse(&v[1])?, Expr::parse(&v[2])?]))
        .transpose()
}

fn sym_expr(s: &Option<[String; 6]>) -> Result<Option<SymExpr>> {
    s.as_ref()
        .map(|v| {
            Ok([
                Expr::parse(&v[0])?,
                Expr::parse(&v[1])?,
                Expr::parse(&v[2])?,
                Expr::parse(&v[3])?,
                Expr::parse(&v[4])?,
                Expr::parse(&v[5])?,
            ])
        })
        .transpose()
}

impl Sources {
    pub fn physical(&self) -> Result<PhysicalSources> {
        Ok(PhysicalSources {
            f_beam: vec_expr(&self.f_beam)?,
            f_plate: vec_expr(&self.f_plate)?,
            g_beam: sym_expr(&self.g_beam)?,
            g_plate: sym_expr(&self.g_plate)?,
            h_lateral: vec_expr(&self.h_lateral)?,
            h_top: vec_expr(&self.h_top)?,
            h_bottom: vec_expr(&self.h_bottom)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual accepted from the linear solvers.
    pub solve: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { solve: crate::solver3d::SOLVE_TOL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: String,
    #[serde(default)]
    pub format: Format,
    /// Write corrector profiles and the limit state.
    #[serde(default)]
    pub profiles: bool,
}

impl Default for Output {
    fn default() -> Self {
        Output { dir: "out".into(), format: Format::Csv, profiles: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub geometry: Geometry,
    pub materials: Materials,
    pub schedule: Schedule,
    #[serde(default)]
    pub sources: Sources,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Output,
}

pub const DEFAULT_CONFIG: &str = include_str!("default.toml");

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: StudyConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        StudyConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn default_study() -> Self {
        StudyConfig::from_toml(DEFAULT_CONFIG).expect("built-in config is valid")
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn omega_a(&self) -> Result<CrossSection> {
        CrossSection::new(self.geometry.omega_a[0], self.geometry.omega_a[1])
    }

    pub fn omega_b(&self) -> Result<CrossSection> {
        CrossSection::new(self.geometry.omega_b[0], self.geometry.omega_b[1])
    }

    pub fn r_min(&self) -> f64 {
        self.schedule.eps_list.iter().fold(f64::INFINITY, |a, &e| a.min(e.powf(1.5)))
    }

    /// Builds the mesh shared by every case. The elements at the origin
    /// must resolve the smallest junction patch.
    pub fn mesh(&self) -> Result<MultidomainMesh> {
        let g = &self.geometry;
        let (a, b) = (self.omega_a()?, self.omega_b()?);
        let beam = build_beam_mesh(g.beam_mesh[0], g.beam_mesh[1], g.beam_mesh[2], a)?;
        let plate = build_plate_mesh(g.plate_grading, g.plate_grading, g.plate_nz, b, Some(self.r_min() * a.min_half()))?;
        Ok(MultidomainMesh::new(a, b, beam, plate))
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.schedule;
        if s.eps_list.is_empty() {
            return Err(Error::Config("eps_list is empty".into()));
        }
        if s.eps_list.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::Config("every eps must lie in (0, 1)".into()));
        }
        if s.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("eps_list must be strictly decreasing".into()));
        }
        if matches!(s.regime, RegimeKind::Finite) && !(s.q_target > 0.0) {
            return Err(Error::Config("q_target must be positive".into()));
        }
        if !(self.tolerances.solve > 0.0) {
            return Err(Error::Config("solve tolerance must be positive".into()));
        }
        let (a, b) = (self.omega_a()?, self.omega_b()?);
        let r_max = s.eps_list[0].powf(1.5);
        if !a.scaled_inside(r_max, &b) {
            return Err(Error::Config(format!("junction patch r omega_a escapes omega_b at r = {r_max}")));
        }
        self.materials.beam.tensor()?;
        self.materials.plate.tensor()?;
        self.sources.physical()?;
        self.mesh()?;
        Ok(())
    }
}
