//! 2-jets of the Clifford torus and of its normal-graph deformations
//! `(C + eps*h*N) / |C + eps*h*N|`, with all chart partials in closed form.

use crate::error::{Error, Result};
use crate::vec4::Vec4;

const FRAC_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A chart point of the square `[0, 2pi) x [0, 2pi)`.
///
/// Values may be arbitrary finite radians; every evaluator is 2pi-periodic
/// in each variable, so reduction happens implicitly. Lifted (unwrapped)
/// coordinates are tracked by the flow module, not here.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ChartPoint {
    pub u: f64,
    pub v: f64,
}

impl ChartPoint {
    pub const fn new(u: f64, v: f64) -> Self {
        ChartPoint { u, v }
    }
}

/// Position and all first and second chart partials of an immersion point.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceJet2 {
    pub p: Vec4,
    pub p_u: Vec4,
    pub p_v: Vec4,
    pub p_uu: Vec4,
    pub p_uv: Vec4,
    pub p_vv: Vec4,
}

impl SurfaceJet2 {
    /// Gram determinant `EG - F^2` of the first fundamental form.
    pub fn gram(&self) -> f64 {
        let e = self.p_u.dot(self.p_u);
        let f = self.p_u.dot(self.p_v);
        let g = self.p_v.dot(self.p_v);
        e * g - f * f
    }
}

/// A smooth 2pi-biperiodic scalar field with caller-supplied derivative
/// evaluators through second order. Third-order mixed partials are only
/// needed by the second variational equation and default to an error.
///
/// Evaluators must be pure functions; the whole crate assumes they can be
/// called concurrently.
pub trait Perturbation: Sync {
    fn h(&self, u: f64, v: f64) -> f64;
    fn h_u(&self, u: f64, v: f64) -> f64;
    fn h_v(&self, u: f64, v: f64) -> f64;
    fn h_uu(&self, u: f64, v: f64) -> f64;
    fn h_uv(&self, u: f64, v: f64) -> f64;
    fn h_vv(&self, u: f64, v: f64) -> f64;

    fn h_uuv(&self, _u: f64, _v: f64) -> Result<f64> {
        Err(Error::MissingThirdDerivative)
    }

    fn h_uvv(&self, _u: f64, _v: f64) -> Result<f64> {
        Err(Error::MissingThirdDerivative)
    }
}

/// The bundled deformation profile `h(u, v) = sin^2(2v - 2u)`.
///
/// Constant along the diagonal direction, period pi/2 across it, and
/// symmetric under swapping `u` and `v`. All derivatives through third
/// order are supplied in closed form.
#[derive(Clone, Copy, Debug, Default)]
pub struct SinSqDiagonal;

impl Perturbation for SinSqDiagonal {
    fn h(&self, u: f64, v: f64) -> f64 {
        let s = (2.0 * v - 2.0 * u).sin();
        s * s
    }

    fn h_u(&self, u: f64, v: f64) -> f64 {
        -2.0 * (4.0 * v - 4.0 * u).sin()
    }

    fn h_v(&self, u: f64, v: f64) -> f64 {
        2.0 * (4.0 * v - 4.0 * u).sin()
    }

    fn h_uu(&self, u: f64, v: f64) -> f64 {
        8.0 * (4.0 * v - 4.0 * u).cos()
    }

    fn h_uv(&self, u: f64, v: f64) -> f64 {
        -8.0 * (4.0 * v - 4.0 * u).cos()
    }

    fn h_vv(&self, u: f64, v: f64) -> f64 {
        8.0 * (4.0 * v - 4.0 * u).cos()
    }

    fn h_uuv(&self, u: f64, v: f64) -> Result<f64> {
        Ok(-32.0 * (4.0 * v - 4.0 * u).sin())
    }

    fn h_uvv(&self, u: f64, v: f64) -> Result<f64> {
        Ok(32.0 * (4.0 * v - 4.0 * u).sin())
    }
}

/// Closed-form 2-jet of the Clifford chart
/// `C(u, v) = (sqrt(2)/2) (cos(v - u), sin(v - u), cos(u + v), sin(u + v))`.
pub fn clifford_jet(q: ChartPoint) -> SurfaceJet2 {
    let (s, t) = (q.v - q.u, q.u + q.v);
    let (ss, cs) = s.sin_cos();
    let (st, ct) = t.sin_cos();
    let k = FRAC_SQRT_2;
    let p = Vec4::new(k * cs, k * ss, k * ct, k * st);
    SurfaceJet2 {
        p,
        p_u: Vec4::new(k * ss, -k * cs, -k * st, k * ct),
        p_v: Vec4::new(-k * ss, k * cs, -k * st, k * ct),
        p_uu: -p,
        // the mixed partial is exactly the unit normal
        p_uv: Vec4::new(k * cs, k * ss, -k * ct, -k * st),
        p_vv: -p,
    }
}

/// Unit normal of the Clifford chart,
/// `N(u, v) = (sqrt(2)/2) (cos(v - u), sin(v - u), -cos(u + v), -sin(u + v))`.
///
/// Equals `wedge3(C, C_u, C_v).normalized()` with the crate's wedge
/// orientation; a unit test pins this identity.
pub fn clifford_normal(q: ChartPoint) -> Vec4 {
    let (s, t) = (q.v - q.u, q.u + q.v);
    let (ss, cs) = s.sin_cos();
    let (st, ct) = t.sin_cos();
    let k = FRAC_SQRT_2;
    Vec4::new(k * cs, k * ss, -k * ct, -k * st)
}

/// Closed-form 2-jet of the Clifford normal field. The frame relations
/// `N_u = -C_v`, `N_v = -C_u`, `N_uv = C`, `N_uu = N_vv = -N` make the
/// perturbed jets below purely algebraic.
pub fn normal_jet(q: ChartPoint) -> SurfaceJet2 {
    let (s, t) = (q.v - q.u, q.u + q.v);
    let (ss, cs) = s.sin_cos();
    let (st, ct) = t.sin_cos();
    let k = FRAC_SQRT_2;
    let n = Vec4::new(k * cs, k * ss, -k * ct, -k * st);
    SurfaceJet2 {
        p: n,
        p_u: Vec4::new(k * ss, -k * cs, k * st, -k * ct),
        p_v: Vec4::new(-k * ss, k * cs, k * st, -k * ct),
        p_uu: -n,
        p_uv: Vec4::new(k * cs, k * ss, k * ct, k * st),
        p_vv: -n,
    }
}

/// Bound on `|eps|` under which `|C + eps*h*N| >= 1 - |eps| max|h|` stays
/// away from zero and the perturbed chart remains an immersion for any
/// profile with `0 <= h <= 1`. Larger deformations are for visualization
/// only; use [`perturbed_jet_unguarded`].
pub const EPS_GUARD: f64 = 0.25;

/// 2-jet of the unnormalized map `w = C + eps*h*N`.
fn graph_jet(q: ChartPoint, eps: f64, h: &dyn Perturbation) -> SurfaceJet2 {
    let c = clifford_jet(q);
    let n = normal_jet(q);
    let (u, v) = (q.u, q.v);
    let (h0, hu, hv) = (h.h(u, v), h.h_u(u, v), h.h_v(u, v));
    let (huu, huv, hvv) = (h.h_uu(u, v), h.h_uv(u, v), h.h_vv(u, v));
    SurfaceJet2 {
        p: c.p + n.p * (eps * h0),
        p_u: c.p_u + (n.p * hu + n.p_u * h0) * eps,
        p_v: c.p_v + (n.p * hv + n.p_v * h0) * eps,
        p_uu: c.p_uu + (n.p * huu + n.p_u * (2.0 * hu) + n.p_uu * h0) * eps,
        p_uv: c.p_uv + (n.p * huv + n.p_v * hu + n.p_u * hv + n.p_uv * h0) * eps,
        p_vv: c.p_vv + (n.p * hvv + n.p_v * (2.0 * hv) + n.p_vv * h0) * eps,
    }
}

/// Push a 2-jet through the radial normalization `w -> w / |w|`.
///
/// Quotient rule throughout; no differencing anywhere. The second-form
/// coefficients downstream are O(eps) differences of O(1) quantities, so
/// differencing noise here would swamp the quadratic drift extraction.
fn normalize_jet(w: SurfaceJet2) -> SurfaceJet2 {
    let r = w.p.norm();
    let ru = w.p.dot(w.p_u) / r;
    let rv = w.p.dot(w.p_v) / r;
    let ruu = (w.p_uu.dot(w.p) + w.p_u.dot(w.p_u) - ru * ru) / r;
    let ruv = (w.p_uv.dot(w.p) + w.p_u.dot(w.p_v) - ru * rv) / r;
    let rvv = (w.p_vv.dot(w.p) + w.p_v.dot(w.p_v) - rv * rv) / r;

    let inv = 1.0 / r;
    let inv2 = inv * inv;
    let inv3 = inv2 * inv;
    SurfaceJet2 {
        p: w.p * inv,
        p_u: w.p_u * inv - w.p * (ru * inv2),
        p_v: w.p_v * inv - w.p * (rv * inv2),
        p_uu: w.p_uu * inv - w.p_u * (2.0 * ru * inv2) - w.p * (ruu * inv2)
            + w.p * (2.0 * ru * ru * inv3),
        p_uv: w.p_uv * inv - w.p_u * (rv * inv2) - w.p_v * (ru * inv2) - w.p * (ruv * inv2)
            + w.p * (2.0 * ru * rv * inv3),
        p_vv: w.p_vv * inv - w.p_v * (2.0 * rv * inv2) - w.p * (rvv * inv2)
            + w.p * (2.0 * rv * rv * inv3),
    }
}

/// 2-jet of the deformed chart `(C + eps*h*N) / |C + eps*h*N|`.
///
/// Fails with [`Error::EpsGuard`] outside `|eps| <= EPS_GUARD` and with
/// [`Error::DegenerateJet`] if the Gram determinant is not positive.
pub fn perturbed_jet(q: ChartPoint, eps: f64, h: &dyn Perturbation) -> Result<SurfaceJet2> {
    if eps.abs() > EPS_GUARD {
        return Err(Error::EpsGuard {
            eps,
            guard: EPS_GUARD,
        });
    }
    perturbed_jet_unguarded(q, eps, h)
}

/// Same as [`perturbed_jet`] without the `EPS_GUARD` bound. Still checks
/// that the chart is an immersion at the requested point.
pub fn perturbed_jet_unguarded(
    q: ChartPoint,
    eps: f64,
    h: &dyn Perturbation,
) -> Result<SurfaceJet2> {
    let jet = normalize_jet(graph_jet(q, eps, h));
    let gram = jet.gram();
    if gram <= 0.0 {
        return Err(Error::DegenerateJet {
            u: q.u,
            v: q.v,
            gram,
        });
    }
    Ok(jet)
}

/// Position of the deformed chart only. Well defined whenever
/// `|eps| max|h| < 1`, in particular for every mesh-export deformation.
pub fn perturbed_position(q: ChartPoint, eps: f64, h: &dyn Perturbation) -> Vec4 {
    let c = clifford_jet(q).p;
    let n = clifford_normal(q);
    let w = c + n * (eps * h.h(q.u, q.v));
    w.normalized()
}
