//! First- and second-order variational equations of a one-parameter
//! family of implicit quadratic direction equations
//! `a(u,v,eps) dv^2 + 2 b(u,v,eps) du dv + c(u,v,eps) du^2 = 0`
//! with `a = c = 0`, `b = 1` at `eps = 0`.
//!
//! Along the unperturbed solution `v = v0` the variations satisfy
//! `c_eps + 2 v_{eps,u} = 0` and
//! `c_{eps,eps} + 2 c_{v,eps} v_eps - 2 b_eps c_eps + 2 v_{u,eps,eps} = 0`,
//! so both are explicit integrals and are evaluated by adaptive quadrature
//! instead of ODE stepping. This path is independent of the direction-field
//! integrator in `flow` and serves as its oracle.

use crate::error::{Error, Result};
use crate::flow::{poincare1, IntegratorOptions};
use crate::forms::second_form_closed;
use crate::quadrature::{adaptive_simpson, cumulative};
use crate::surface::{ChartPoint, Perturbation};
use std::f64::consts::TAU;

/// Coefficient family of a quadratic direction equation together with the
/// partial derivatives needed by the variational equations, all evaluated
/// at `eps = 0`. Implementations must be pure functions.
pub trait QuadraticFamily: Sync {
    /// Coefficient of `dv^2`.
    fn a(&self, u: f64, v: f64, eps: f64) -> f64;
    /// Coefficient of `du dv` (half the cross term).
    fn b(&self, u: f64, v: f64, eps: f64) -> f64;
    /// Coefficient of `du^2`.
    fn c(&self, u: f64, v: f64, eps: f64) -> f64;

    fn a_eps(&self, u: f64, v: f64) -> f64;
    fn b_eps(&self, u: f64, v: f64) -> f64;
    fn c_eps(&self, u: f64, v: f64) -> f64;
    fn a_eps_eps(&self, u: f64, v: f64) -> f64;
    fn c_eps_eps(&self, u: f64, v: f64) -> f64;

    /// Mixed partial d^2 c / dv deps. May require third-order data of an
    /// underlying perturbation profile.
    fn c_v_eps(&self, u: f64, v: f64) -> Result<f64>;
    /// Mixed partial d^2 a / du deps, the twin of `c_v_eps`.
    fn a_u_eps(&self, u: f64, v: f64) -> Result<f64>;

    fn label(&self) -> String {
        "family".to_owned()
    }
}

/// The same family with the two chart variables exchanged and the roles of
/// `a` and `c` swapped. Variations of the swapped family are exactly the
/// `u_eps`, `u_{eps,eps}` variations of the original one, so one code path
/// serves both sets of equations.
pub struct Swapped<F>(pub F);

impl<F: QuadraticFamily> QuadraticFamily for Swapped<F> {
    fn a(&self, u: f64, v: f64, eps: f64) -> f64 {
        self.0.c(v, u, eps)
    }
    fn b(&self, u: f64, v: f64, eps: f64) -> f64 {
        self.0.b(v, u, eps)
    }
    fn c(&self, u: f64, v: f64, eps: f64) -> f64 {
        self.0.a(v, u, eps)
    }
    fn a_eps(&self, u: f64, v: f64) -> f64 {
        self.0.c_eps(v, u)
    }
    fn b_eps(&self, u: f64, v: f64) -> f64 {
        self.0.b_eps(v, u)
    }
    fn c_eps(&self, u: f64, v: f64) -> f64 {
        self.0.a_eps(v, u)
    }
    fn a_eps_eps(&self, u: f64, v: f64) -> f64 {
        self.0.c_eps_eps(v, u)
    }
    fn c_eps_eps(&self, u: f64, v: f64) -> f64 {
        self.0.a_eps_eps(v, u)
    }
    fn c_v_eps(&self, u: f64, v: f64) -> Result<f64> {
        self.0.a_u_eps(v, u)
    }
    fn a_u_eps(&self, u: f64, v: f64) -> Result<f64> {
        self.0.c_v_eps(v, u)
    }
    fn label(&self) -> String {
        format!("{} (swapped)", self.0.label())
    }
}

/// The asymptotic-direction family of the deformed torus: the closed-form
/// second-form coefficients in the roles `a = g`, `b = f`, `c = e`.
pub struct SecondFormFamily<'a> {
    field: &'a dyn Perturbation,
}

/// Build the quadratic family whose solutions are the first-foliation
/// asymptotic lines of the deformation profile `field`.
pub fn asymptotic_family(field: &dyn Perturbation) -> SecondFormFamily<'_> {
    SecondFormFamily { field }
}

impl QuadraticFamily for SecondFormFamily<'_> {
    fn a(&self, u: f64, v: f64, eps: f64) -> f64 {
        second_form_closed(ChartPoint::new(u, v), eps, self.field).2
    }
    fn b(&self, u: f64, v: f64, eps: f64) -> f64 {
        second_form_closed(ChartPoint::new(u, v), eps, self.field).1
    }
    fn c(&self, u: f64, v: f64, eps: f64) -> f64 {
        second_form_closed(ChartPoint::new(u, v), eps, self.field).0
    }
    fn a_eps(&self, u: f64, v: f64) -> f64 {
        self.field.h_vv(u, v)
    }
    fn b_eps(&self, u: f64, v: f64) -> f64 {
        self.field.h_uv(u, v)
    }
    fn c_eps(&self, u: f64, v: f64) -> f64 {
        self.field.h_uu(u, v)
    }
    fn a_eps_eps(&self, u: f64, v: f64) -> f64 {
        4.0 * self.field.h_u(u, v) * self.field.h_v(u, v)
    }
    fn c_eps_eps(&self, u: f64, v: f64) -> f64 {
        4.0 * self.field.h_u(u, v) * self.field.h_v(u, v)
    }
    fn c_v_eps(&self, u: f64, v: f64) -> Result<f64> {
        self.field.h_uuv(u, v)
    }
    fn a_u_eps(&self, u: f64, v: f64) -> Result<f64> {
        self.field.h_uvv(u, v)
    }
    fn label(&self) -> String {
        "asymptotic-direction family".to_owned()
    }
}

/// Quadrature controls for the variational integrals.
#[derive(Clone, Copy, Debug)]
pub struct VariationSettings {
    /// Output grid cells over `[0, u_end]`.
    pub cells: usize,
    /// Absolute quadrature tolerance per cell.
    pub tol: f64,
}

impl Default for VariationSettings {
    fn default() -> Self {
        VariationSettings {
            cells: 256,
            tol: 1e-12,
        }
    }
}

/// Sampled first (and optionally second) variation along the unperturbed
/// solution through `v0`. Both variations vanish at the grid start.
#[derive(Clone, Debug, serde::Serialize)]
pub struct VariationTrace {
    pub family: String,
    pub v0: f64,
    pub u: Vec<f64>,
    pub v_eps: Vec<f64>,
    pub v_eps_eps: Option<Vec<f64>>,
}

impl VariationTrace {
    /// `v_eps(u_end) - v_eps(0)`.
    pub fn first_defect(&self) -> f64 {
        self.v_eps.last().unwrap() - self.v_eps.first().unwrap()
    }

    /// `v_eps_eps(u_end) - v_eps_eps(0)`, when the second variation ran.
    pub fn second_defect(&self) -> Option<f64> {
        let grid = self.v_eps_eps.as_ref()?;
        Some(grid.last().unwrap() - grid.first().unwrap())
    }

    /// Two- or three-column CSV (`u, v_eps[, v_eps_eps]`) at full float
    /// precision.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        use crate::util::fmt_g17;
        match &self.v_eps_eps {
            Some(second) => {
                writeln!(out, "u,v_eps,v_eps_eps")?;
                for ((u, ve), vee) in self.u.iter().zip(&self.v_eps).zip(second) {
                    writeln!(out, "{},{},{}", fmt_g17(*u), fmt_g17(*ve), fmt_g17(*vee))?;
                }
            }
            None => {
                writeln!(out, "u,v_eps")?;
                for (u, ve) in self.u.iter().zip(&self.v_eps) {
                    writeln!(out, "{},{}", fmt_g17(*u), fmt_g17(*ve))?;
                }
            }
        }
        Ok(())
    }
}

fn check_side_conditions(fam: &dyn QuadraticFamily) -> Result<()> {
    // spot-check the eps = 0 side conditions at fixed sample points
    for (u, v) in [(0.0, 0.0), (1.1, 2.9), (4.0, 0.7), (5.9, 5.2)] {
        let (a, b, c) = (fam.a(u, v, 0.0), fam.b(u, v, 0.0), fam.c(u, v, 0.0));
        if a.abs() > 1e-9 || c.abs() > 1e-9 || (b - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "family violates the eps = 0 side conditions at ({u}, {v}): a = {a:.3e}, b = {b}, c = {c:.3e}"
            )));
        }
    }
    Ok(())
}

/// First variation `v_eps(u) = -1/2 int_0^u c_eps(s, v0) ds` on a uniform
/// grid over `[0, u_end]`.
pub fn first_variation(
    fam: &dyn QuadraticFamily,
    v0: f64,
    u_end: f64,
    settings: &VariationSettings,
) -> Result<VariationTrace> {
    check_side_conditions(fam)?;
    let grid = cumulative(
        &mut |s: f64| Ok(-0.5 * fam.c_eps(s, v0)),
        0.0,
        u_end,
        settings.cells,
        settings.tol,
    )?;
    let u = (0..=settings.cells)
        .map(|k| u_end * k as f64 / settings.cells as f64)
        .collect();
    Ok(VariationTrace {
        family: fam.label(),
        v0,
        u,
        v_eps: grid,
        v_eps_eps: None,
    })
}

/// Second variation
/// `v_eps_eps(u) = -1/2 int_0^u [c_ee + 2 c_ve v_eps - 2 b_e c_e](s, v0) ds`,
/// with `v_eps` evaluated exactly (cell value plus local quadrature) at
/// every node the outer integral requests.
pub fn second_variation(
    fam: &dyn QuadraticFamily,
    v0: f64,
    u_end: f64,
    settings: &VariationSettings,
) -> Result<VariationTrace> {
    let first = first_variation(fam, v0, u_end, settings)?;
    let step = u_end / settings.cells as f64;
    let v_eps_grid = &first.v_eps;

    let v_eps_at = |s: f64| -> Result<f64> {
        let k = ((s / step).floor() as usize).min(settings.cells.saturating_sub(1));
        let base = k as f64 * step;
        let tail = adaptive_simpson(
            &mut |r: f64| Ok(-0.5 * fam.c_eps(r, v0)),
            base,
            s,
            settings.tol,
        )?;
        Ok(v_eps_grid[k] + tail)
    };

    let second = cumulative(
        &mut |s: f64| {
            let source = fam.c_eps_eps(s, v0) + 2.0 * fam.c_v_eps(s, v0)? * v_eps_at(s)?
                - 2.0 * fam.b_eps(s, v0) * fam.c_eps(s, v0);
            Ok(-0.5 * source)
        },
        0.0,
        u_end,
        settings.cells,
        settings.tol,
    )?;

    Ok(VariationTrace {
        v_eps_eps: Some(second),
        ..first
    })
}

/// One rung of a flow-versus-variation comparison.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct CrossValidationRung {
    pub eps: f64,
    /// Return-map displacement of the integrated direction field.
    pub flow: f64,
    /// `eps * defect1 + eps^2/2 * defect2`.
    pub predicted: f64,
    pub residual: f64,
}

/// Report of [`cross_validate`].
#[derive(Clone, Debug, serde::Serialize)]
pub struct CrossValidation {
    pub v0: f64,
    pub defect1: f64,
    pub defect2: f64,
    pub rungs: Vec<CrossValidationRung>,
    /// Least-squares log-log slope of `|residual|` against `eps`; a cubic
    /// Taylor remainder shows up as a slope near 3.
    pub slope: Option<f64>,
}

/// Compare the integrated return-map displacement against the first- and
/// second-order variational prediction on a ladder of deformation sizes.
pub fn cross_validate(
    eps_ladder: &[f64],
    v0: f64,
    field: &dyn Perturbation,
    flow_opts: &IntegratorOptions,
    settings: &VariationSettings,
) -> Result<CrossValidation> {
    if eps_ladder.is_empty() {
        return Err(Error::InvalidInput("empty eps ladder".into()));
    }
    let fam = asymptotic_family(field);
    let trace = second_variation(&fam, v0, TAU, settings)?;
    let defect1 = trace.first_defect();
    let defect2 = trace.second_defect().expect("second variation present");

    let mut rungs = Vec::with_capacity(eps_ladder.len());
    for &eps in eps_ladder {
        let flow = poincare1(v0, eps, field, flow_opts)? - v0;
        let predicted = eps * defect1 + 0.5 * eps * eps * defect2;
        rungs.push(CrossValidationRung {
            eps,
            flow,
            predicted,
            residual: flow - predicted,
        });
    }

    let pts: Vec<(f64, f64)> = rungs
        .iter()
        .filter(|r| r.residual != 0.0 && r.eps > 0.0)
        .map(|r| (r.eps.ln(), r.residual.abs().ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (sxx, sxy): (f64, f64) = pts
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + p.0 * p.0, a.1 + p.0 * p.1));
        Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
    } else {
        None
    };

    Ok(CrossValidation {
        v0,
        defect1,
        defect2,
        rungs,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SinSqDiagonal;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    /// a = c = 0, b = 1 for every eps: nothing varies.
    struct Trivial;
    impl QuadraticFamily for Trivial {
        fn a(&self, _: f64, _: f64, _: f64) -> f64 {
            0.0
        }
        fn b(&self, _: f64, _: f64, _: f64) -> f64 {
            1.0
        }
        fn c(&self, _: f64, _: f64, _: f64) -> f64 {
            0.0
        }
        fn a_eps(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn b_eps(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn c_eps(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn a_eps_eps(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn c_eps_eps(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn c_v_eps(&self, _: f64, _: f64) -> Result<f64> {
            Ok(0.0)
        }
        fn a_u_eps(&self, _: f64, _: f64) -> Result<f64> {
            Ok(0.0)
        }
    }

    /// c = eps (1 + cos u): v_eps(u) = -(u + sin u)/2, second variation 0.
    struct FirstOrderOnly;
    impl QuadraticFamily for FirstOrderOnly {
        fn a(&self, _: f64, _: f64, _: f64) -> f64 {
            0.0
        }
        fn b(&self, _: f64, _: f64, _: f64) -> f64 {
            1.0
        }
        fn c(&self, u: f64, _: f64, eps: f64) -> f64 {
            eps * (1.0 + u.cos())
        }
        fn a_eps(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn b_eps(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn c_eps(&self, u: f64, _: f64) -> f64 {
            1.0 + u.cos()
        }
        fn a_eps_eps(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn c_eps_eps(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn c_v_eps(&self, _: f64, _: f64) -> Result<f64> {
            Ok(0.0)
        }
        fn a_u_eps(&self, _: f64, _: f64) -> Result<f64> {
            Ok(0.0)
        }
    }

    /// Exercises every source term of the second variation:
    /// c = eps cos(u)(1 + sin v), b = 1 + eps sin u, giving
    /// v_eps_eps(u) = (1 + sin v0)(cos v0 + 2) sin^2(u) / 4.
    struct FullSource;
    impl QuadraticFamily for FullSource {
        fn a(&self, _: f64, _: f64, _: f64) -> f64 {
            0.0
        }
        fn b(&self, u: f64, _: f64, eps: f64) -> f64 {
            1.0 + eps * u.sin()
        }
        fn c(&self, u: f64, v: f64, eps: f64) -> f64 {
            eps * u.cos() * (1.0 + v.sin())
        }
        fn a_eps(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn b_eps(&self, u: f64, _: f64) -> f64 {
            u.sin()
        }
        fn c_eps(&self, u: f64, v: f64) -> f64 {
            u.cos() * (1.0 + v.sin())
        }
        fn a_eps_eps(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn c_eps_eps(&self, _: f64, _: f64) -> f64 {
            0.0
        }
        fn c_v_eps(&self, u: f64, v: f64) -> Result<f64> {
            Ok(u.cos() * v.cos())
        }
        fn a_u_eps(&self, _: f64, _: f64) -> Result<f64> {
            Ok(0.0)
        }
    }

    #[test]
    fn trivial_family_has_zero_variations() {
        let s = VariationSettings::default();
        let t = second_variation(&Trivial, 0.7, TAU, &s).unwrap();
        assert!(t.v_eps.iter().all(|&x| x.abs() < 1e-14));
        assert!(t.v_eps_eps.unwrap().iter().all(|&x| x.abs() < 1e-14));
    }

    #[test]
    fn first_order_synthetic_matches_antiderivative() {
        let s = VariationSettings::default();
        let t = first_variation(&FirstOrderOnly, 0.0, TAU, &s).unwrap();
        for (k, &u) in t.u.iter().enumerate() {
            assert_abs_diff_eq!(t.v_eps[k], -0.5 * (u + u.sin()), epsilon = 1e-10);
        }
        assert_abs_diff_eq!(t.first_defect(), -PI, epsilon = 1e-10);
    }

    #[test]
    fn second_order_synthetic_matches_closed_form() {
        let s = VariationSettings::default();
        let v0 = 0.4;
        let t = second_variation(&FullSource, v0, TAU, &s).unwrap();
        let second = t.v_eps_eps.as_ref().unwrap();
        let amp = 0.25 * (1.0 + v0.sin()) * (v0.cos() + 2.0);
        for (k, &u) in t.u.iter().enumerate() {
            assert_abs_diff_eq!(second[k], amp * u.sin() * u.sin(), epsilon = 1e-9);
        }
    }

    #[test]
    fn side_condition_violation_detected() {
        struct Bad;
        impl QuadraticFamily for Bad {
            fn a(&self, _: f64, _: f64, _: f64) -> f64 {
                0.3
            }
            fn b(&self, _: f64, _: f64, _: f64) -> f64 {
                1.0
            }
            fn c(&self, _: f64, _: f64, _: f64) -> f64 {
                0.0
            }
            fn a_eps(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn b_eps(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn c_eps(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn a_eps_eps(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn c_eps_eps(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn c_v_eps(&self, _: f64, _: f64) -> Result<f64> {
                Ok(0.0)
            }
            fn a_u_eps(&self, _: f64, _: f64) -> Result<f64> {
                Ok(0.0)
            }
        }
        assert!(matches!(
            first_variation(&Bad, 0.0, TAU, &VariationSettings::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn deformation_family_partials_on_diagonal() {
        let field = SinSqDiagonal;
        let fam = asymptotic_family(&field);
        for u in [0.0, 0.9, 2.7] {
            assert_abs_diff_eq!(fam.c_eps(u, u), 8.0, epsilon = 1e-13);
            assert_abs_diff_eq!(fam.b_eps(u, u), -8.0, epsilon = 1e-13);
            let (a, b, c) = (fam.a(u, u, 0.0), fam.b(u, u, 0.0), fam.c(u, u, 0.0));
            assert_eq!((a, b, c), (0.0, 1.0, 0.0));
        }
    }

    #[test]
    fn deformation_first_variation_closed_form() {
        let field = SinSqDiagonal;
        let fam = asymptotic_family(&field);
        let v0 = 0.3;
        let t = first_variation(&fam, v0, TAU, &VariationSettings::default()).unwrap();
        for (k, &u) in t.u.iter().enumerate() {
            let expect = (4.0 * v0 - 4.0 * u).sin() - (4.0 * v0).sin();
            assert_abs_diff_eq!(t.v_eps[k], expect, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(t.first_defect(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn deformation_period_defects() {
        let field = SinSqDiagonal;
        let fam = asymptotic_family(&field);
        let s = VariationSettings::default();
        for v0 in [0.0, 0.3, 1.1, 2.9, 4.5] {
            let t = second_variation(&fam, v0, TAU, &s).unwrap();
            assert_abs_diff_eq!(t.first_defect(), 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(t.second_defect().unwrap(), -24.0 * PI, epsilon = 1e-9);
        }
    }

    #[test]
    fn swapped_family_gives_same_defects() {
        let field = SinSqDiagonal;
        let fam = Swapped(asymptotic_family(&field));
        let t = second_variation(&fam, 1.7, TAU, &VariationSettings::default()).unwrap();
        assert_abs_diff_eq!(t.first_defect(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(t.second_defect().unwrap(), -24.0 * PI, epsilon = 1e-9);
    }

    #[test]
    fn node_doubling_is_converged() {
        let field = SinSqDiagonal;
        let fam = asymptotic_family(&field);
        let coarse = VariationSettings {
            cells: 128,
            tol: 1e-12,
        };
        let fine = VariationSettings {
            cells: 256,
            tol: 1e-12,
        };
        let a = second_variation(&fam, 0.8, TAU, &coarse).unwrap();
        let b = second_variation(&fam, 0.8, TAU, &fine).unwrap();
        assert_abs_diff_eq!(a.first_defect(), b.first_defect(), epsilon = 1e-10);
        assert_abs_diff_eq!(
            a.second_defect().unwrap(),
            b.second_defect().unwrap(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn missing_third_derivatives_surface_as_error() {
        struct NoThird;
        impl Perturbation for NoThird {
            fn h(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn h_u(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn h_v(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn h_uu(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn h_uv(&self, _: f64, _: f64) -> f64 {
                0.0
            }
            fn h_vv(&self, _: f64, _: f64) -> f64 {
                0.0
            }
        }
        let field = NoThird;
        let fam = asymptotic_family(&field);
        // first variation never needs third-order data
        assert!(first_variation(&fam, 0.0, TAU, &VariationSettings::default()).is_ok());
        let err = second_variation(&fam, 0.0, TAU, &VariationSettings::default()).unwrap_err();
        assert!(matches!(err, Error::MissingThirdDerivative));
    }

    #[test]
    fn csv_shape() {
        let field = SinSqDiagonal;
        let fam = asymptotic_family(&field);
        let t = second_variation(
            &fam,
            0.0,
            TAU,
            &VariationSettings {
                cells: 8,
                tol: 1e-12,
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("u,v_eps,v_eps_eps"));
        assert_eq!(lines.count(), 9);
    }
}
