//! Stereographic projection to Euclidean 3-space and OBJ / CSV export of
//! torus meshes and integrated asymptotic lines.

use crate::error::{Error, Result};
use crate::flow::{integrate_line, Branch, IntegratorOptions};
use crate::surface::{perturbed_position, ChartPoint, Perturbation};
use crate::util::fmt_g17;
use crate::vec4::Vec4;
use std::f64::consts::TAU;
use std::io::Write;
use std::path::Path;

/// Rejection margin around the projection pole `(0, 0, 0, 1)`.
pub const POLE_MARGIN: f64 = 1e-9;

/// Stereographic projection from the pole `(0, 0, 0, 1)`:
/// `x -> (x1, x2, x3) / (1 - x4)`.
///
/// The Clifford chart and its deformations keep `|x4| <= sqrt(2)/2 < 1`
/// for every in-scope profile, so the pole is never approached there.
pub fn stereographic(p: Vec4) -> Result<[f64; 3]> {
    let margin = 1.0 - p.x4;
    if margin.abs() < POLE_MARGIN {
        return Err(Error::PoleSingularity { margin });
    }
    Ok([p.x1 / margin, p.x2 / margin, p.x3 / margin])
}

/// Projected geometry: a quad mesh and/or a set of polylines in image
/// coordinates.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct ProjectedMesh {
    pub vertices: Vec<[f64; 3]>,
    pub quads: Vec<[usize; 4]>,
    pub polylines: Vec<Vec<usize>>,
}

impl ProjectedMesh {
    /// All vertex coordinates finite and all indices in range.
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            if !v.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidInput(format!("vertex {i} is not finite")));
            }
        }
        let n = self.vertices.len();
        let in_range = |i: &usize| *i < n;
        if !self.quads.iter().all(|q| q.iter().all(in_range))
            || !self.polylines.iter().all(|p| p.iter().all(in_range))
        {
            return Err(Error::InvalidInput(
                "face or polyline index out of range".into(),
            ));
        }
        Ok(())
    }

    /// Plain-text OBJ: `v x y z` lines, then `f i j k l` quads and
    /// `l i1 i2 ...` polylines, all 1-based.
    pub fn write_obj<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(
                out,
                "v {} {} {}",
                fmt_g17(v[0]),
                fmt_g17(v[1]),
                fmt_g17(v[2])
            )?;
        }
        for q in &self.quads {
            writeln!(out, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1)?;
        }
        for line in &self.polylines {
            write!(out, "l")?;
            for i in line {
                write!(out, " {}", i + 1)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Projected `n x n` quad mesh of the deformed torus, with wraparound
/// quads closing both periods. Positions only; no immersion check is
/// needed, so arbitrary display deformations are fine.
pub fn torus_mesh(eps: f64, h: &dyn Perturbation, n: usize) -> Result<ProjectedMesh> {
    if n < 8 {
        return Err(Error::InvalidInput(format!(
            "mesh grid {n} below the minimum of 8"
        )));
    }
    let step = TAU / n as f64;
    let mut vertices = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let q = ChartPoint::new(i as f64 * step, j as f64 * step);
            vertices.push(stereographic(perturbed_position(q, eps, h))?);
        }
    }
    let mut quads = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (i1, j1) = ((i + 1) % n, (j + 1) % n);
            quads.push([i * n + j, i1 * n + j, i1 * n + j1, i * n + j1]);
        }
    }
    Ok(ProjectedMesh {
        vertices,
        quads,
        polylines: Vec::new(),
    })
}

/// Write the projected torus mesh as an OBJ file.
pub fn export_mesh(eps: f64, h: &dyn Perturbation, n: usize, path: &Path) -> Result<()> {
    let mesh = torus_mesh(eps, h, n)?;
    mesh.validate()?;
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    mesh.write_obj(&mut file)?;
    Ok(())
}

/// Integrate one asymptotic line per start point and project every sample
/// to image space.
pub fn asymptotic_polylines(
    eps: f64,
    h: &dyn Perturbation,
    branch: Branch,
    starts: &[ChartPoint],
    span: f64,
    opts: &IntegratorOptions,
) -> Result<Vec<Vec<[f64; 3]>>> {
    let mut out = Vec::with_capacity(starts.len());
    for &start in starts {
        let curve = integrate_line(start, branch, eps, h, span, opts)?;
        let mut line = Vec::with_capacity(curve.samples().len());
        for s in curve.samples() {
            let q = match branch {
                Branch::First => ChartPoint::new(s.t, s.w),
                Branch::Second => ChartPoint::new(s.w, s.t),
            };
            line.push(stereographic(perturbed_position(q, eps, h))?);
        }
        out.push(line);
    }
    Ok(out)
}

/// Export integrated asymptotic lines next to `base`: a CSV of
/// `x,y,z` rows with blank-line separators between polylines at
/// `base.csv`, and an OBJ polyline variant at `base.obj`.
pub fn export_lines(
    eps: f64,
    h: &dyn Perturbation,
    branch: Branch,
    starts: &[ChartPoint],
    span: f64,
    opts: &IntegratorOptions,
    base: &Path,
) -> Result<()> {
    let lines = asymptotic_polylines(eps, h, branch, starts, span, opts)?;

    let csv_path = base.with_extension("csv");
    let mut csv = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
    writeln!(csv, "x,y,z")?;
    for (k, line) in lines.iter().enumerate() {
        if k > 0 {
            writeln!(csv)?;
        }
        for p in line {
            writeln!(csv, "{},{},{}", fmt_g17(p[0]), fmt_g17(p[1]), fmt_g17(p[2]))?;
        }
    }

    let mut mesh = ProjectedMesh::default();
    for line in &lines {
        let start = mesh.vertices.len();
        mesh.vertices.extend_from_slice(line);
        mesh.polylines.push((start..start + line.len()).collect());
    }
    mesh.validate()?;
    let obj_path = base.with_extension("obj");
    let mut obj = std::io::BufWriter::new(std::fs::File::create(obj_path)?);
    mesh.write_obj(&mut obj)?;
    Ok(())
}
