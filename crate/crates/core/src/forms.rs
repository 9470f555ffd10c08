//! First and second fundamental forms, extrinsic curvature and
//! hyperbolicity of a chart point, from a 2-jet or in closed form.

use crate::error::{Error, Result};
use crate::surface::{ChartPoint, Perturbation, SurfaceJet2};
use crate::vec4::det4;

/// Coefficients of both fundamental forms at a chart point:
/// `I = E du^2 + 2F du dv + G dv^2`, `II = e du^2 + 2f du dv + g dv^2`.
#[allow(non_snake_case)]
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct FormPair {
    pub E: f64,
    pub F: f64,
    pub G: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

/// First-form coefficients `(E, F, G)` of a 2-jet.
pub fn first_form(j: &SurfaceJet2) -> (f64, f64, f64) {
    (j.p_u.dot(j.p_u), j.p_u.dot(j.p_v), j.p_v.dot(j.p_v))
}

/// Second-form coefficients `(e, f, g)` of a 2-jet, as determinant
/// quotients with the probed second partial in the leading slot:
/// `e = det[p_uu, p, p_u, p_v] / sqrt(EG - F^2)` and analogues.
///
/// Equivalently `<p_xx, n>` with `n` the unit normal completing the frame,
/// since `|p ^ p_u ^ p_v| = sqrt(EG - F^2)` for a chart on the unit sphere.
pub fn second_form(j: &SurfaceJet2) -> Result<(f64, f64, f64)> {
    #[allow(non_snake_case)]
    let (E, F, G) = first_form(j);
    let gram = E * G - F * F;
    if gram <= 0.0 {
        return Err(Error::DegenerateJet {
            u: f64::NAN,
            v: f64::NAN,
            gram,
        });
    }
    let s = gram.sqrt();
    Ok((
        det4(j.p_uu, j.p, j.p_u, j.p_v) / s,
        det4(j.p_uv, j.p, j.p_u, j.p_v) / s,
        det4(j.p_vv, j.p, j.p_u, j.p_v) / s,
    ))
}

/// Both forms of a 2-jet, validating the metric is positive definite.
pub fn form_pair(j: &SurfaceJet2) -> Result<FormPair> {
    #[allow(non_snake_case)]
    let (E, F, G) = first_form(j);
    if E <= 0.0 || G <= 0.0 || E * G - F * F <= 0.0 {
        return Err(Error::DegenerateJet {
            u: f64::NAN,
            v: f64::NAN,
            gram: E * G - F * F,
        });
    }
    let (e, f, g) = second_form(j)?;
    Ok(FormPair { E, F, G, e, f, g })
}

/// Closed-form second-form coefficients of the deformed chart, exact in
/// `eps` for any profile `h`.
///
/// These are the frame-determinant representatives
/// `det[w_xx, w, w_u, w_v]` of the unnormalized graph `w = C + eps*h*N`,
/// expanded in the orthonormal moving frame `(C, N, C_u, C_v)`. They equal
/// the jet-based coefficients times the positive scalar
/// `|w| * |w ^ w_u ^ w_v|`, so the two routes agree as points of the
/// projective plane `[e : f : g]` and define the same direction field.
pub fn second_form_closed(q: ChartPoint, eps: f64, h: &dyn Perturbation) -> (f64, f64, f64) {
    let (u, v) = (q.u, q.v);
    let (h0, hu, hv) = (h.h(u, v), h.h_u(u, v), h.h_v(u, v));
    let (huu, huv, hvv) = (h.h_uu(u, v), h.h_uv(u, v), h.h_vv(u, v));
    let h2 = h0 * h0;
    let e2 = eps * eps;
    let e3 = e2 * eps;
    let e4 = e2 * e2;
    let e = eps * huu + 2.0 * e2 * hu * hv + e3 * (2.0 * h0 * hu * hu - h2 * huu);
    let f = 1.0
        + eps * huv
        + e2 * (hu * hu + hv * hv - 2.0 * h2)
        + e3 * (2.0 * h0 * hu * hv - h2 * huv)
        + e4 * h2 * h2;
    let g = eps * hvv + 2.0 * e2 * hu * hv + e3 * (2.0 * h0 * hv * hv - h2 * hvv);
    (e, f, g)
}

/// Root discriminant `f^2 - eg` of the direction equation; positive
/// exactly on the hyperbolic region.
pub fn discriminant(e: f64, f: f64, g: f64) -> f64 {
    f * f - e * g
}

/// Extrinsic Gaussian curvature `(eg - f^2) / (EG - F^2)`.
pub fn k_ext(fp: &FormPair) -> f64 {
    (fp.e * fp.g - fp.f * fp.f) / (fp.E * fp.G - fp.F * fp.F)
}

/// Gap between two second-form triples as points of the projective plane:
/// normalize each by its largest-magnitude entry, then take the max
/// componentwise difference. The direction field only sees `[e : f : g]`.
pub fn projective_gap(a: (f64, f64, f64), b: (f64, f64, f64)) -> f64 {
    fn normalize(t: (f64, f64, f64)) -> [f64; 3] {
        let arr = [t.0, t.1, t.2];
        let mut pivot = arr[0];
        for x in arr {
            if x.abs() > pivot.abs() {
                pivot = x;
            }
        }
        [arr[0] / pivot, arr[1] / pivot, arr[2] / pivot]
    }
    let (x, y) = (normalize(a), normalize(b));
    (0..3).map(|i| (x[i] - y[i]).abs()).fold(0.0, f64::max)
}

/// Result of sampling the hyperbolicity discriminant on a uniform grid.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct ScanReport {
    pub eps: f64,
    pub grid: usize,
    pub min: f64,
    pub argmin_u: f64,
    pub argmin_v: f64,
    pub hyperbolic: bool,
}

impl std::fmt::Display for ScanReport {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            out,
            "eps={} grid={} min={:.6e} argmin_u={:.6} argmin_v={:.6} hyperbolic={}",
            self.eps, self.grid, self.min, self.argmin_u, self.argmin_v, self.hyperbolic
        )
    }
}

/// Evaluate `f^2 - eg` at the corners of an `n x n` uniform grid over the
/// chart square and report the minimum. Corner sampling only, no
/// interpolation; the minimum is reduced deterministically with ties
/// broken by the lexicographically smallest `(u, v)`.
pub fn hyperbolicity_scan(eps: f64, h: &dyn Perturbation, n: usize) -> ScanReport {
    assert!(n >= 2, "grid must have at least 2 points per side");
    let step = std::f64::consts::TAU / n as f64;
    let mut min = f64::INFINITY;
    let mut arg = (0.0, 0.0);
    for i in 0..n {
        let u = i as f64 * step;
        for j in 0..n {
            let v = j as f64 * step;
            let (e, f, g) = second_form_closed(ChartPoint::new(u, v), eps, h);
            let d = discriminant(e, f, g);
            if d < min {
                min = d;
                arg = (u, v);
            }
        }
    }
    ScanReport {
        eps,
        grid: n,
        min,
        argmin_u: arg.0,
        argmin_v: arg.1,
        hyperbolic: min > 0.0,
    }
}
