//! Structured hexahedral meshes of the reference beam `omega_a x (0,1)` and
//! plate `omega_b x (-1,0)`, boundary tags, quadrature and the junction map.

use crate::error::{Error, Result};
use crate::quadrature::gauss;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Axis-aligned rectangle centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub half: [f64; 2],
}

impl CrossSection {
    pub fn new(h1: f64, h2: f64) -> Result<Self> {
        if !(h1 > 0.0 && h2 > 0.0) {
            return Err(Error::Mesh(format!("half-widths must be positive, got ({h1}, {h2})")));
        }
        Ok(CrossSection { half: [h1, h2] })
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half[0] * self.half[1]
    }

    /// `int (x1^2 + x2^2) dx'`.
    pub fn polar_moment(&self) -> f64 {
        self.area() * (self.half[0].powi(2) + self.half[1].powi(2)) / 3.0
    }

    pub fn min_half(&self) -> f64 {
        self.half[0].min(self.half[1])
    }

    /// Whether `scale * self` lies strictly inside `other`.
    pub fn scaled_inside(&self, scale: f64, other: &CrossSection) -> bool {
        scale * self.half[0] < other.half[0] && scale * self.half[1] < other.half[1]
    }
}

/// Line distribution across a centered interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Grading {
    Uniform { n: usize },
    /// Widths grow by `ratio` away from the origin; `n` must be even.
    Geometric { n: usize, ratio: f64 },
}

impl Grading {
    pub fn n(&self) -> usize {
        match *self {
            Grading::Uniform { n } | Grading::Geometric { n, .. } => n,
        }
    }

    /// Lines on `[-half, half]`, exactly mirror-symmetric.
    pub fn lines(&self, half: f64) -> Result<Vec<f64>> {
        match *self {
            Grading::Uniform { n } => {
                if n == 0 {
                    return Err(Error::Mesh("need at least one element".into()));
                }
                Ok((0..=n)
                    .map(|i| half * ((2 * i) as f64 - n as f64) / n as f64)
                    .collect())
            }
            Grading::Geometric { n, ratio } => {
                if n == 0 || n % 2 == 1 {
                    return Err(Error::Mesh(format!(
                        "geometric grading needs an even element count, got {n}"
                    )));
                }
                if !(ratio > 0.0) {
                    return Err(Error::Mesh(format!("grading ratio must be positive, got {ratio}")));
                }
                if ratio == 1.0 {
                    return Grading::Uniform { n }.lines(half);
                }
                let m = n / 2;
                let denom = ratio.powi(m as i32) - 1.0;
                let pos: Vec<f64> = (0..=m)
                    .map(|j| {
                        if j == m {
                            half
                        } else {
                            half * (ratio.powi(j as i32) - 1.0) / denom
                        }
                    })
                    .collect();
                let mut lines: Vec<f64> = pos.iter().rev().map(|p| -p).collect();
                lines.pop();
                lines.extend(pos);
                lines[m] = 0.0;
                Ok(lines)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    Beam,
    Plate,
}

/// Boundary face tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    /// Beam top `x3 = 1`, clamped.
    BeamTop,
    /// Beam lateral surface.
    BeamLateral,
    /// Beam bottom `x3 = 0`, tied to the plate.
    Junction,
    /// Plate lateral surface, clamped.
    PlateLateral,
    /// Plate top `x3 = 0`.
    PlateTop,
    /// Plate bottom `x3 = -1`.
    PlateBottom,
}

impl Tag {
    pub fn block(&self) -> Block {
        match self {
            Tag::BeamTop | Tag::BeamLateral | Tag::Junction => Block::Beam,
            _ => Block::Plate,
        }
    }
}

/// Tensor-product block of trilinear hexahedra.
///
/// Local node `l = a + 2b + 4c` sits at offsets `(a, b, c)` in `{0,1}^3`.
#[derive(Debug, Clone, PartialEq)]
pub struct HexBlock {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub zs: Vec<f64>,
}

impl HexBlock {
    pub fn nx(&self) -> usize {
        self.xs.len() - 1
    }
    pub fn ny(&self) -> usize {
        self.ys.len() - 1
    }
    pub fn nz(&self) -> usize {
        self.zs.len() - 1
    }
    pub fn n_nodes(&self) -> usize {
        self.xs.len() * self.ys.len() * self.zs.len()
    }
    pub fn n_elems(&self) -> usize {
        self.nx() * self.ny() * self.nz()
    }
    /// Nodes per x3-level.
    pub fn layer_size(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ys.len() + j) * self.xs.len() + i
    }

    #[inline]
    pub fn node_ijk(&self, n: usize) -> [usize; 3] {
        let nx = self.xs.len();
        let ny = self.ys.len();
        [n % nx, (n / nx) % ny, n / (nx * ny)]
    }

    #[inline]
    pub fn coord(&self, n: usize) -> [f64; 3] {
        let [i, j, k] = self.node_ijk(n);
        [self.xs[i], self.ys[j], self.zs[k]]
    }

    #[inline]
    pub fn elem(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny() + j) * self.nx() + i
    }

    #[inline]
    pub fn elem_ijk(&self, e: usize) -> [usize; 3] {
        [e % self.nx(), (e / self.nx()) % self.ny(), e / (self.nx() * self.ny())]
    }

    pub fn elem_nodes(&self, e: usize) -> [usize; 8] {
        let [i, j, k] = self.elem_ijk(e);
        let mut out = [0; 8];
        for (l, o) in out.iter_mut().enumerate() {
            *o = self.node(i + (l & 1), j + ((l >> 1) & 1), k + ((l >> 2) & 1));
        }
        out
    }

    /// Lower corner and edge lengths of element `e`.
    pub fn elem_box(&self, e: usize) -> ([f64; 3], [f64; 3]) {
        let [i, j, k] = self.elem_ijk(e);
        (
            [self.xs[i], self.ys[j], self.zs[k]],
            [self.xs[i + 1] - self.xs[i], self.ys[j + 1] - self.ys[j], self.zs[k + 1] - self.zs[k]],
        )
    }

    pub fn map_point(&self, e: usize, xi: [f64; 3]) -> [f64; 3] {
        let (x0, h) = self.elem_box(e);
        [
            x0[0] + 0.5 * h[0] * (xi[0] + 1.0),
            x0[1] + 0.5 * h[1] * (xi[1] + 1.0),
            x0[2] + 0.5 * h[2] * (xi[2] + 1.0),
        ]
    }

    pub fn volume(&self) -> f64 {
        (self.xs[self.nx()] - self.xs[0]) * (self.ys[self.ny()] - self.ys[0]) * (self.zs[self.nz()] - self.zs[0])
    }
}

/// Trilinear shape function values at `xi`, local order `a + 2b + 4c`.
#[inline]
pub fn shape(xi: [f64; 3]) -> [f64; 8] {
    let mut n = [0.0; 8];
    for (l, v) in n.iter_mut().enumerate() {
        let s = |bit: usize, x: f64| if bit == 0 { 0.5 * (1.0 - x) } else { 0.5 * (1.0 + x) };
        *v = s(l & 1, xi[0]) * s((l >> 1) & 1, xi[1]) * s((l >> 2) & 1, xi[2]);
    }
    n
}

/// Quadrature point inside one element of a block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPoint {
    pub elem: usize,
    pub xi: [f64; 3],
    pub x: [f64; 3],
    pub w: f64,
}

/// One boundary face: element, local face id (`2*axis + side`) and tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    pub block: Block,
    pub elem: usize,
    pub face: usize,
    pub tag: Tag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultidomainMesh {
    pub omega_a: CrossSection,
    pub omega_b: CrossSection,
    pub beam: HexBlock,
    pub plate: HexBlock,
}

pub fn build_beam_mesh(nx: usize, ny: usize, nz: usize, omega_a: CrossSection) -> Result<HexBlock> {
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::Mesh("beam mesh needs at least one element per direction".into()));
    }
    Ok(HexBlock {
        xs: Grading::Uniform { n: nx }.lines(omega_a.half[0])?,
        ys: Grading::Uniform { n: ny }.lines(omega_a.half[1])?,
        zs: (0..=nz).map(|k| k as f64 / nz as f64).collect(),
    })
}

/// Plate block on `omega_b x (-1, 0)`. When `max_center_width` is given, the
/// elements touching the origin must not be wider than it in either
/// direction.
pub fn build_plate_mesh(
    gx: Grading,
    gy: Grading,
    nz: usize,
    omega_b: CrossSection,
    max_center_width: Option<f64>,
) -> Result<HexBlock> {
    if nz == 0 {
        return Err(Error::Mesh("plate mesh needs at least one element across the thickness".into()));
    }
    let xs = gx.lines(omega_b.half[0])?;
    let ys = gy.lines(omega_b.half[1])?;
    for (name, lines) in [("x1", &xs), ("x2", &ys)] {
        if !lines.contains(&0.0) {
            return Err(Error::Mesh(format!("plate {name}-lines must contain the origin")));
        }
        if let Some(wmax) = max_center_width {
            let m = lines.iter().position(|&x| x == 0.0).unwrap();
            let w = (lines[m] - lines[m - 1]).max(lines[m + 1] - lines[m]);
            if w > wmax {
                return Err(Error::Mesh(format!(
                    "plate grading too coarse near the origin along {name}: width {w:.4e} exceeds {wmax:.4e}"
                )));
            }
        }
    }
    Ok(HexBlock {
        xs,
        ys,
        zs: (0..=nz).map(|k| -1.0 + k as f64 / nz as f64).collect(),
    })
}

impl MultidomainMesh {
    pub fn new(omega_a: CrossSection, omega_b: CrossSection, beam: HexBlock, plate: HexBlock) -> Self {
        MultidomainMesh { omega_a, omega_b, beam, plate }
    }

    pub fn block(&self, b: Block) -> &HexBlock {
        match b {
            Block::Beam => &self.beam,
            Block::Plate => &self.plate,
        }
    }

    /// Global index of the first node of a block.
    pub fn offset(&self, b: Block) -> usize {
        match b {
            Block::Beam => 0,
            Block::Plate => self.beam.n_nodes(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.beam.n_nodes() + self.plate.n_nodes()
    }

    pub fn n_dofs(&self) -> usize {
        3 * self.n_nodes()
    }

    /// Tensor Gauss rule with `n` points per direction over every element.
    pub fn volume_quadrature(&self, b: Block, n: usize) -> Vec<QPoint> {
        let blk = self.block(b);
        let (p, w) = gauss(n);
        let mut out = Vec::with_capacity(blk.n_elems() * n * n * n);
        for e in 0..blk.n_elems() {
            let (_, h) = blk.elem_box(e);
            let jac = h[0] * h[1] * h[2] / 8.0;
            for c in 0..n {
                for bb in 0..n {
                    for a in 0..n {
                        let xi = [p[a], p[bb], p[c]];
                        out.push(QPoint { elem: e, xi, x: blk.map_point(e, xi), w: w[a] * w[bb] * w[c] * jac });
                    }
                }
            }
        }
        out
    }

    /// Every boundary face of both blocks with its tag.
    pub fn boundary_faces(&self) -> Vec<BoundaryFace> {
        let mut out = Vec::new();
        for b in [Block::Beam, Block::Plate] {
            let blk = self.block(b);
            let dims = [blk.nx(), blk.ny(), blk.nz()];
            for e in 0..blk.n_elems() {
                let ijk = blk.elem_ijk(e);
                for axis in 0..3 {
                    for side in 0..2 {
                        let on = if side == 0 { ijk[axis] == 0 } else { ijk[axis] + 1 == dims[axis] };
                        if !on {
                            continue;
                        }
                        let tag = match (b, axis, side) {
                            (Block::Beam, 2, 1) => Tag::BeamTop,
                            (Block::Beam, 2, 0) => Tag::Junction,
                            (Block::Beam, _, _) => Tag::BeamLateral,
                            (Block::Plate, 2, 1) => Tag::PlateTop,
                            (Block::Plate, 2, 0) => Tag::PlateBottom,
                            (Block::Plate, _, _) => Tag::PlateLateral,
                        };
                        out.push(BoundaryFace { block: b, elem: e, face: 2 * axis + side, tag });
                    }
                }
            }
        }
        out
    }

    /// Gauss rule (`n` points per face direction) on all faces with `tag`.
    pub fn surface_quadrature(&self, tag: Tag, n: usize) -> Vec<QPoint> {
        let (p, w) = gauss(n);
        let mut out = Vec::new();
        for f in self.boundary_faces().into_iter().filter(|f| f.tag == tag) {
            let blk = self.block(f.block);
            let (_, h) = blk.elem_box(f.elem);
            let axis = f.face / 2;
            let fixed = if f.face % 2 == 0 { -1.0 } else { 1.0 };
            let (t0, t1) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let jac = h[t0] * h[t1] / 4.0;
            for b in 0..n {
                for a in 0..n {
                    let mut xi = [0.0; 3];
                    xi[axis] = fixed;
                    xi[t0] = p[a];
                    xi[t1] = p[b];
                    out.push(QPoint { elem: f.elem, xi, x: blk.map_point(f.elem, xi), w: w[a] * w[b] * jac });
                }
            }
        }
        out
    }

    /// Beam nodes on `x3 = 1` (block-local ids).
    pub fn beam_top_nodes(&self) -> Vec<usize> {
        let b = &self.beam;
        let k = b.nz();
        (0..b.layer_size()).map(|n| n + k * b.layer_size()).collect()
    }

    /// Beam nodes on `x3 = 0` (block-local ids).
    pub fn beam_bottom_nodes(&self) -> Vec<usize> {
        (0..self.beam.layer_size()).collect()
    }

    /// Plate nodes on the lateral boundary (block-local ids).
    pub fn plate_lateral_nodes(&self) -> Vec<usize> {
        let p = &self.plate;
        (0..p.n_nodes())
            .filter(|&n| {
                let [i, j, _] = p.node_ijk(n);
                i == 0 || j == 0 || i == p.nx() || j == p.ny()
            })
            .collect()
    }

    /// Plain-text listing: node lines `id x1 x2 x3`, then element lines with
    /// eight global node ids.
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# nodes {}", self.n_nodes())?;
        for b in [Block::Beam, Block::Plate] {
            let blk = self.block(b);
            let off = self.offset(b);
            for n in 0..blk.n_nodes() {
                let x = blk.coord(n);
                writeln!(w, "{} {:.17e} {:.17e} {:.17e}", off + n, x[0], x[1], x[2])?;
            }
        }
        writeln!(w, "# elements {}", self.beam.n_elems() + self.plate.n_elems())?;
        for b in [Block::Beam, Block::Plate] {
            let blk = self.block(b);
            let off = self.offset(b);
            for e in 0..blk.n_elems() {
                let ids: Vec<String> = blk.elem_nodes(e).iter().map(|n| (off + n).to_string()).collect();
                writeln!(w, "{}", ids.join(" "))?;
            }
        }
        Ok(())
    }
}

/// Interpolation stencil of one beam bottom node on the plate top face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionEntry {
    /// Beam-local node id.
    pub beam_node: usize,
    /// `r x'` on the plate top face.
    pub point: [f64; 2],
    /// Plate-local node ids on `x3 = 0`.
    pub plate_nodes: [usize; 4],
    pub weights: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct JunctionMap {
    pub r: f64,
    pub entries: Vec<JunctionEntry>,
}

/// `int phi_s`, `int x1 phi_s` and `int x2 phi_s` for the bilinear hats on
/// the grid `xs x ys`; node `s = j * xs.len() + i`.
pub fn hat_moments(xs: &[f64], ys: &[f64]) -> Vec<[f64; 3]> {
    let nx = xs.len();
    let mut m = vec![[0.0; 3]; nx * ys.len()];
    for j in 0..ys.len() - 1 {
        for i in 0..nx - 1 {
            let (hx, hy) = (xs[i + 1] - xs[i], ys[j + 1] - ys[j]);
            for a in 0..4 {
                let (ai, aj) = (a & 1, a >> 1);
                let s = (j + aj) * nx + i + ai;
                let fx = hx * (xs[i] / 2.0 + if ai == 0 { hx / 6.0 } else { hx / 3.0 });
                let fy = hy * (ys[j] / 2.0 + if aj == 0 { hy / 6.0 } else { hy / 3.0 });
                m[s][0] += 0.25 * hx * hy;
                m[s][1] += 0.5 * fx * hy;
                m[s][2] += 0.5 * hx * fy;
            }
        }
    }
    m
}

/// Index `i` with `lines[i] <= x <= lines[i + 1]`.
pub fn locate(lines: &[f64], x: f64) -> usize {
    let n = lines.len() - 1;
    let i = lines.partition_point(|&l| l <= x);
    i.saturating_sub(1).min(n - 1)
}

pub fn build_junction_map(mesh: &MultidomainMesh, r: f64) -> Result<JunctionMap> {
    if !(r > 0.0) {
        return Err(Error::Junction(format!("r must be positive, got {r}")));
    }
    if !mesh.omega_a.scaled_inside(r, &mesh.omega_b) {
        return Err(Error::Junction(format!("patch r*omega_a with r = {r} escapes omega_b")));
    }
    let p = &mesh.plate;
    let top = p.nz();
    let entries = mesh
        .beam_bottom_nodes()
        .into_iter()
        .map(|bn| {
            let x = mesh.beam.coord(bn);
            let pt = [r * x[0], r * x[1]];
            let i = locate(&p.xs, pt[0]);
            let j = locate(&p.ys, pt[1]);
            let s = (pt[0] - p.xs[i]) / (p.xs[i + 1] - p.xs[i]);
            let t = (pt[1] - p.ys[j]) / (p.ys[j + 1] - p.ys[j]);
            JunctionEntry {
                beam_node: bn,
                point: pt,
                plate_nodes: [p.node(i, j, top), p.node(i + 1, j, top), p.node(i, j + 1, top), p.node(i + 1, j + 1, top)],
                weights: [(1.0 - s) * (1.0 - t), s * (1.0 - t), (1.0 - s) * t, s * t],
            }
        })
        .collect();
    Ok(JunctionMap { r, entries })
}

impl JunctionMap {
    /// Interpolates a plate nodal scalar (plate-local ids) at each entry.
    pub fn interpolate(&self, plate_values: impl Fn(usize) -> f64) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| e.plate_nodes.iter().zip(e.weights).map(|(&n, w)| w * plate_values(n)).sum())
            .collect()
    }
}
