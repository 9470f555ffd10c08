//! Direction-branch resolution of the implicit quadratic equation
//! `e du^2 + 2 f du dv + g dv^2 = 0`, integration of asymptotic lines with
//! lift tracking, Poincaré return maps, translation numbers, and the
//! Richardson extraction of the quadratic drift coefficient.

use crate::error::{Error, Result};
use crate::forms::{discriminant, second_form, second_form_closed};
use crate::surface::{perturbed_jet_unguarded, ChartPoint, Perturbation};
use std::f64::consts::TAU;

/// The two asymptotic foliations. `First` is the graph over `u` that
/// degenerates to `v = const` on the flat torus, `Second` the graph over
/// `v` that degenerates to `u = const`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Branch {
    First,
    Second,
}

impl Branch {
    pub fn index(self) -> u8 {
        match self {
            Branch::First => 1,
            Branch::Second => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Branch> {
        match i {
            1 => Some(Branch::First),
            2 => Some(Branch::Second),
            _ => None,
        }
    }
}

/// Where the direction field takes its coefficients from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoeffSource {
    /// Exact closed-form coefficients; cheap and noise-free. Default.
    ClosedForm,
    /// Determinant quotients of the analytically normalized 2-jet. Slower;
    /// kept as the cross-validation path for the closed form.
    Jet,
}

/// Adaptive integrator controls. The defaults resolve displacement
/// signals of order `1e-4` to well below one percent.
#[derive(Clone, Copy, Debug)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest accepted step in the independent chart variable (radians).
    pub max_step: f64,
    /// Below this the integration aborts with `StepUnderflow`.
    pub min_step: f64,
    /// Sample curves densely enough that linear interpolation between
    /// stored samples stays below this bound.
    pub interp_tol: f64,
    pub source: CoeffSource,
    /// Smallest admissible ratio between consecutive ladder rungs in
    /// [`quad_coeff_extract`].
    pub ladder_min_ratio: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-10,
            atol: 1e-10,
            max_step: 0.05,
            min_step: 1e-12,
            interp_tol: 1e-6,
            source: CoeffSource::ClosedForm,
            ladder_min_ratio: 1.05,
        }
    }
}

/// Slope of the chosen asymptotic branch from the second-form
/// coefficients.
///
/// The quadratic is solved with the cancellation-free root
/// `-e / (f + sign(f) sqrt(f^2 - eg))` (respectively with `g` in place of
/// `e` for the graph over `v`): near the flat torus `e, g` are small while
/// `f` is near one, and this picks the root that vanishes with them. The
/// large root is never formed.
pub fn branch_slope(e: f64, f: f64, g: f64, br: Branch) -> Result<f64> {
    let disc = discriminant(e, f, g);
    if disc <= 0.0 {
        return Err(Error::NonHyperbolic { disc });
    }
    if f == 0.0 {
        return Err(Error::BranchAmbiguous);
    }
    let denom = f + f.signum() * disc.sqrt();
    Ok(match br {
        Branch::First => -e / denom,
        Branch::Second => -g / denom,
    })
}

/// One stored point of an integrated line: independent variable `t`,
/// lifted dependent variable `w`, and the branch slope there.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct CurveSample {
    pub t: f64,
    pub w: f64,
    pub slope: f64,
}

/// An integrated asymptotic line in lifted (unwrapped) chart coordinates.
/// Samples are stored with strictly increasing `t`; the dependent variable
/// is never reduced mod 2pi.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LiftedCurve {
    pub branch: Branch,
    pub eps: f64,
    samples: Vec<CurveSample>,
    end: (f64, f64),
}

impl LiftedCurve {
    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    /// Final `(t, w)` state of the integration (the far end for forward
    /// spans, the near end for backward spans).
    pub fn end_state(&self) -> (f64, f64) {
        self.end
    }

    /// Cubic Hermite interpolation between stored samples; `None` outside
    /// the sampled range.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let s = &self.samples;
        if s.is_empty() || t < s[0].t || t > s[s.len() - 1].t {
            return None;
        }
        let idx = s.partition_point(|p| p.t <= t);
        if idx == 0 {
            return Some(s[0].w);
        }
        if idx == s.len() {
            return Some(s[s.len() - 1].w);
        }
        let (a, b) = (&s[idx - 1], &s[idx]);
        let h = b.t - a.t;
        if h == 0.0 {
            return Some(a.w);
        }
        let x = (t - a.t) / h;
        let (x2, x3) = (x * x, x * x * x);
        Some(
            a.w * (2.0 * x3 - 3.0 * x2 + 1.0)
                + h * a.slope * (x3 - 2.0 * x2 + x)
                + b.w * (-2.0 * x3 + 3.0 * x2)
                + h * b.slope * (x3 - x2),
        )
    }

    /// Two-column CSV (`t, w`) at full round-trip float precision.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        use crate::util::fmt_g17;
        writeln!(out, "t,w")?;
        for s in &self.samples {
            writeln!(out, "{},{}", fmt_g17(s.t), fmt_g17(s.w))?;
        }
        Ok(())
    }
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between the 5th- and the embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: u64 = 10_000_000;

/// Adaptive Dormand-Prince driver for a scalar field `w'(t) = rhs(t, w)`.
/// Each accepted step is handed to `segment` as
/// `(t0, w0, slope0, t1, w1, slope1)`. Returns the final state.
fn dopri5<F, S>(
    rhs: &mut F,
    t0: f64,
    w0: f64,
    t_end: f64,
    opts: &IntegratorOptions,
    segment: &mut S,
) -> Result<(f64, f64)>
where
    F: FnMut(f64, f64) -> Result<f64>,
    S: FnMut(f64, f64, f64, f64, f64, f64),
{
    let span = t_end - t0;
    let mut t = t0;
    let mut w = w0;
    let mut k1 = rhs(t, w).map_err(|e| attach_state(e, t, w))?;
    if span == 0.0 {
        return Ok((t, w));
    }
    let dir = span.signum();
    let mut h = dir * opts.max_step.min(span.abs());
    let mut steps: u64 = 0;

    loop {
        let remaining = t_end - t;
        if remaining * dir <= 0.0 {
            break;
        }
        let mut last = false;
        if h.abs() >= remaining.abs() {
            h = remaining;
            last = true;
        }
        if h.abs() < opts.min_step {
            return Err(Error::StepUnderflow {
                t,
                step: h.abs(),
                min_step: opts.min_step,
            });
        }
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::InvalidInput(format!(
                "integration exceeded {MAX_STEPS} steps before reaching t = {t_end}"
            )));
        }

        let state = (t, w);
        let eval = |e: Error| attach_state(e, state.0, state.1);
        let k2 = rhs(t + C2 * h, w + h * (A21 * k1)).map_err(eval)?;
        let k3 = rhs(t + C3 * h, w + h * (A31 * k1 + A32 * k2)).map_err(eval)?;
        let k4 = rhs(t + C4 * h, w + h * (A41 * k1 + A42 * k2 + A43 * k3)).map_err(eval)?;
        let k5 = rhs(
            t + C5 * h,
            w + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
        )
        .map_err(eval)?;
        let k6 = rhs(
            t + h,
            w + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
        )
        .map_err(eval)?;
        let w_new = w + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let t_new = if last { t_end } else { t + h };
        // first-same-as-last: the stage at the step end doubles as k1
        let k7 = rhs(t_new, w_new).map_err(eval)?;

        let err_term = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let scale = opts.atol + opts.rtol * w.abs().max(w_new.abs());
        let err = (err_term / scale).abs();

        if err <= 1.0 {
            segment(t, w, k1, t_new, w_new, k7);
            t = t_new;
            w = w_new;
            k1 = k7;
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = dir * (h.abs() * factor).min(opts.max_step);
        } else {
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 0.9);
            h = dir * h.abs() * factor;
        }
    }
    Ok((t, w))
}

fn attach_state(e: Error, t: f64, w: f64) -> Error {
    match e {
        Error::NonHyperbolic { disc } => Error::LeftHyperbolic { t, w, disc },
        other => other,
    }
}

/// Direction-field right-hand side for one branch. For the first branch
/// the state is `v(u)`, for the second it is `u(v)`; the chart point is
/// assembled accordingly.
fn branch_rhs<'a>(
    br: Branch,
    eps: f64,
    h: &'a dyn Perturbation,
    source: CoeffSource,
) -> impl FnMut(f64, f64) -> Result<f64> + 'a {
    move |t: f64, w: f64| {
        let q = match br {
            Branch::First => ChartPoint::new(t, w),
            Branch::Second => ChartPoint::new(w, t),
        };
        let (e, f, g) = match source {
            CoeffSource::ClosedForm => second_form_closed(q, eps, h),
            CoeffSource::Jet => second_form(&perturbed_jet_unguarded(q, eps, h)?)?,
        };
        branch_slope(e, f, g, br)
    }
}

/// Integrate one asymptotic line over `t in [t0, t0 + span]`, where `t`
/// is `u` for the first branch and `v` for the second. The dependent
/// variable is kept lifted; samples are dense enough for linear
/// interpolation at `opts.interp_tol`.
pub fn integrate_line(
    start: ChartPoint,
    br: Branch,
    eps: f64,
    h: &dyn Perturbation,
    span: f64,
    opts: &IntegratorOptions,
) -> Result<LiftedCurve> {
    let (t0, w0) = match br {
        Branch::First => (start.u, start.v),
        Branch::Second => (start.v, start.u),
    };
    let mut rhs = branch_rhs(br, eps, h, opts.source);
    let slope0 = rhs(t0, w0).map_err(|e| attach_state(e, t0, w0))?;
    let mut samples = vec![CurveSample {
        t: t0,
        w: w0,
        slope: slope0,
    }];

    let interp_tol = opts.interp_tol.max(1e-15);
    let mut emit = |ta: f64, wa: f64, ma: f64, tb: f64, wb: f64, mb: f64| {
        let h_step = tb - ta;
        let chord = (wb - wa) / h_step;
        // worst-case gap between the Hermite cubic and its chord
        let deviation = 0.15 * h_step.abs() * ((ma - chord).abs() + (mb - chord).abs());
        let pieces = if deviation > interp_tol {
            ((deviation / interp_tol).sqrt().ceil() as usize).clamp(2, 64)
        } else {
            1
        };
        for i in 1..pieces {
            let x = i as f64 / pieces as f64;
            let (x2, x3) = (x * x, x * x * x);
            let w = wa * (2.0 * x3 - 3.0 * x2 + 1.0)
                + h_step * ma * (x3 - 2.0 * x2 + x)
                + wb * (-2.0 * x3 + 3.0 * x2)
                + h_step * mb * (x3 - x2);
            let slope = wa * (6.0 * x2 - 6.0 * x) / h_step
                + ma * (3.0 * x2 - 4.0 * x + 1.0)
                + wb * (6.0 * x - 6.0 * x2) / h_step
                + mb * (3.0 * x2 - 2.0 * x);
            samples.push(CurveSample {
                t: ta + x * h_step,
                w,
                slope,
            });
        }
        samples.push(CurveSample {
            t: tb,
            w: wb,
            slope: mb,
        });
    };

    let end = dopri5(&mut rhs, t0, w0, t0 + span, opts, &mut emit)?;
    if span < 0.0 {
        samples.reverse();
    }
    Ok(LiftedCurve {
        branch: br,
        eps,
        samples,
        end,
    })
}

fn poincare(
    w0: f64,
    br: Branch,
    eps: f64,
    h: &dyn Perturbation,
    opts: &IntegratorOptions,
) -> Result<f64> {
    let mut rhs = branch_rhs(br, eps, h, opts.source);
    let (_, w) = dopri5(&mut rhs, 0.0, w0, TAU, opts, &mut |_, _, _, _, _, _| {})?;
    Ok(w)
}

/// Lifted return map of the first foliation through the section `u = 0`:
/// the value `v(2pi)` of the solution starting at `v(0) = v0`.
pub fn poincare1(v0: f64, eps: f64, h: &dyn Perturbation, opts: &IntegratorOptions) -> Result<f64> {
    poincare(v0, Branch::First, eps, h, opts)
}

/// Lifted return map of the second foliation through `v = 0`.
pub fn poincare2(u0: f64, eps: f64, h: &dyn Perturbation, opts: &IntegratorOptions) -> Result<f64> {
    poincare(u0, Branch::Second, eps, h, opts)
}

/// Translation-number estimate of a lifted circle map.
#[derive(Clone, Debug, serde::Serialize)]
pub struct TranslationEstimate {
    pub branch: Branch,
    pub eps: f64,
    pub iterations: usize,
    /// Mean per-iterate displacement over the start grid.
    pub value: f64,
    /// A priori bound `2pi / iterations` on the truncation of the estimate.
    pub error_bar: f64,
    pub per_start: Vec<f64>,
}

/// Estimate the translation number of the lifted return map by iterating
/// the map `iterations` times from four equispaced starting points and
/// averaging `(lift^n(w0) - w0) / n`.
pub fn translation_number(
    br: Branch,
    eps: f64,
    h: &dyn Perturbation,
    iterations: usize,
    opts: &IntegratorOptions,
) -> Result<TranslationEstimate> {
    if iterations == 0 {
        return Err(Error::InvalidInput(
            "translation number needs at least one iteration".into(),
        ));
    }
    let starts = [0.0, TAU / 4.0, TAU / 2.0, 3.0 * TAU / 4.0];
    let mut per_start = Vec::with_capacity(starts.len());
    for &w0 in &starts {
        let mut w = w0;
        for _ in 0..iterations {
            w = poincare(w, br, eps, h, opts)?;
        }
        per_start.push((w - w0) / iterations as f64);
    }
    let value = per_start.iter().sum::<f64>() / per_start.len() as f64;
    Ok(TranslationEstimate {
        branch: br,
        eps,
        iterations,
        value,
        error_bar: TAU / iterations as f64,
        per_start,
    })
}

/// Displacement sweep and Richardson-extracted quadratic drift
/// coefficient.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ReturnMapReport {
    pub eps_values: Vec<f64>,
    pub v0_grid: Vec<f64>,
    /// `displacements[i][j]` is the lifted displacement at
    /// `(eps_values[i], v0_grid[j])`, in radians.
    pub displacements: Vec<Vec<f64>>,
    /// Per-eps mean displacement: the one-period translation estimate.
    pub translation_numbers: Vec<f64>,
    /// Extrapolated coefficient of `eps^2` in the displacement.
    pub quad_coeff: f64,
    /// Residual of the extrapolation (last tableau correction).
    pub quad_coeff_err: f64,
    /// Extrapolated coefficient per starting point.
    pub per_v0: Vec<f64>,
}

/// Polynomial extrapolation of `(x_i, y_i)` to `x = 0` (Neville tableau).
/// Returns the corner value and the magnitude of the last correction.
fn neville_to_zero(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mut tableau = ys.to_vec();
    let mut corner = tableau[n - 1];
    let mut prev_corner = corner;
    for m in 1..n {
        for i in (m..n).rev() {
            tableau[i] = (xs[i - m] * tableau[i] - xs[i] * tableau[i - 1]) / (xs[i - m] - xs[i]);
        }
        prev_corner = corner;
        corner = tableau[n - 1];
    }
    (corner, (corner - prev_corner).abs())
}

/// Richardson algebra behind [`quad_coeff_extract`], exposed so that the
/// extraction can be checked on synthetic displacement data: divide each
/// displacement by `eps^2` and extrapolate the ladder to `eps = 0`.
///
/// Returns `(quad_coeff, residual, per_v0_coeffs)`.
pub fn extract_quad_coeff(
    eps_values: &[f64],
    displacements: &[Vec<f64>],
) -> Result<(f64, f64, Vec<f64>)> {
    let n = eps_values.len();
    if n < 3 {
        return Err(Error::InvalidInput("ladder needs at least 3 rungs".into()));
    }
    let m = displacements.first().map(Vec::len).unwrap_or(0);
    if m == 0 || displacements.len() != n {
        return Err(Error::InvalidInput(
            "displacement matrix shape mismatch".into(),
        ));
    }

    let per_v0: Vec<f64> = (0..m)
        .map(|j| {
            let ys: Vec<f64> = eps_values
                .iter()
                .zip(displacements)
                .map(|(&eps, row)| row[j] / (eps * eps))
                .collect();
            neville_to_zero(eps_values, &ys).0
        })
        .collect();
    let mean_ys: Vec<f64> = (0..n)
        .map(|i| displacements[i].iter().sum::<f64>() / (m as f64 * eps_values[i] * eps_values[i]))
        .collect();
    let (coeff, residual) = neville_to_zero(eps_values, &mean_ys);
    Ok((coeff, residual, per_v0))
}

/// Sweep the first-foliation return map over a geometric ladder of
/// deformation sizes and a grid of section points, and extract the
/// `eps^2` displacement coefficient by Richardson extrapolation.
pub fn quad_coeff_extract(
    eps_list: &[f64],
    v0_grid: &[f64],
    h: &dyn Perturbation,
    opts: &IntegratorOptions,
) -> Result<ReturnMapReport> {
    if eps_list.len() < 3 {
        return Err(Error::InvalidInput("ladder needs at least 3 rungs".into()));
    }
    if v0_grid.is_empty() {
        return Err(Error::InvalidInput("empty v0 grid".into()));
    }
    let mut eps_values = eps_list.to_vec();
    if eps_values.iter().any(|e| !e.is_finite() || *e <= 0.0) {
        return Err(Error::InvalidInput(
            "ladder entries must be positive and finite".into(),
        ));
    }
    eps_values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    for pair in eps_values.windows(2) {
        let ratio = pair[0] / pair[1];
        if ratio.is_nan() || ratio < opts.ladder_min_ratio {
            return Err(Error::IllConditioned(format!(
                "rungs {} and {} have ratio {ratio:.4}, below the threshold {}",
                pair[0], pair[1], opts.ladder_min_ratio
            )));
        }
    }

    let mut displacements = Vec::with_capacity(eps_values.len());
    for &eps in &eps_values {
        let mut row = Vec::with_capacity(v0_grid.len());
        for &v0 in v0_grid {
            row.push(poincare1(v0, eps, h, opts)? - v0);
        }
        displacements.push(row);
    }
    let translation_numbers = displacements
        .iter()
        .map(|row| row.iter().sum::<f64>() / row.len() as f64)
        .collect();
    let (quad_coeff, quad_coeff_err, per_v0) = extract_quad_coeff(&eps_values, &displacements)?;

    Ok(ReturnMapReport {
        eps_values,
        v0_grid: v0_grid.to_vec(),
        displacements,
        translation_numbers,
        quad_coeff,
        quad_coeff_err,
        per_v0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SinSqDiagonal;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn slope_of_flat_torus_is_zero() {
        assert_eq!(branch_slope(0.0, 1.0, 0.0, Branch::First).unwrap(), 0.0);
        assert_eq!(branch_slope(0.0, 1.0, 0.0, Branch::Second).unwrap(), 0.0);
    }

    #[test]
    fn slope_stable_root_value() {
        let m = branch_slope(0.4, 0.6, 0.4, Branch::First).unwrap();
        assert_abs_diff_eq!(m, -0.38196601125010515, epsilon = 1e-14);
        // the returned slope is a root of g m^2 + 2 f m + e
        let resid = 0.4 * m * m + 2.0 * 0.6 * m + 0.4;
        assert_abs_diff_eq!(resid, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn slope_errors() {
        assert!(matches!(
            branch_slope(1.0, 0.5, 1.0, Branch::First),
            Err(Error::NonHyperbolic { .. })
        ));
        assert!(matches!(
            branch_slope(-1.0, 0.0, 1.0, Branch::First),
            Err(Error::BranchAmbiguous)
        ));
    }

    #[test]
    fn flat_torus_lines_are_coordinate_curves() {
        let h = SinSqDiagonal;
        let opts = IntegratorOptions::default();
        for v0 in [0.0, 0.3, 2.0, 5.1] {
            let p = poincare1(v0, 0.0, &h, &opts).unwrap();
            assert_abs_diff_eq!(p, v0, epsilon = 1e-13);
        }
        let p = poincare2(1.4, 0.0, &h, &opts).unwrap();
        assert_abs_diff_eq!(p, 1.4, epsilon = 1e-13);
    }

    #[test]
    fn drift_matches_quadratic_expansion() {
        let h = SinSqDiagonal;
        let opts = IntegratorOptions::default();
        let eps = 0.02;
        let p = poincare1(0.3, eps, &h, &opts).unwrap();
        // quadratic drift with a verified remainder bound; the cubic term
        // is not small enough for anything tighter at this v0
        assert_abs_diff_eq!(p, 0.3 - 12.0 * PI * eps * eps, epsilon = 2e-3);
        // cross-implementation regression value
        assert_abs_diff_eq!(p, 0.283958865377731, epsilon = 1e-6);
    }

    #[test]
    fn curve_is_monotone_and_dense() {
        let h = SinSqDiagonal;
        let opts = IntegratorOptions::default();
        let curve = integrate_line(
            ChartPoint::new(0.0, 0.3),
            Branch::First,
            0.02,
            &h,
            TAU,
            &opts,
        )
        .unwrap();
        let s = curve.samples();
        assert!(s.len() > 100);
        for pair in s.windows(2) {
            assert!(pair[1].t > pair[0].t);
            assert!(pair[1].t - pair[0].t <= opts.max_step + 1e-12);
            assert!((pair[1].w - pair[0].w).abs() <= opts.max_step);
        }
        let (t_end, w_end) = curve.end_state();
        assert_abs_diff_eq!(t_end, TAU, epsilon = 0.0);
        assert_abs_diff_eq!(curve.value_at(TAU).unwrap(), w_end, epsilon = 1e-14);
        // interpolation reproduces stored samples exactly
        let mid = &s[s.len() / 2];
        assert_abs_diff_eq!(curve.value_at(mid.t).unwrap(), mid.w, epsilon = 1e-14);
    }

    #[test]
    fn reversal_returns_to_start() {
        let h = SinSqDiagonal;
        let opts = IntegratorOptions::default();
        let fwd = integrate_line(
            ChartPoint::new(0.0, 0.3),
            Branch::First,
            0.02,
            &h,
            TAU,
            &opts,
        )
        .unwrap();
        let (t1, w1) = fwd.end_state();
        let back = integrate_line(
            ChartPoint::new(t1, w1),
            Branch::First,
            0.02,
            &h,
            -TAU,
            &opts,
        )
        .unwrap();
        let (t0, w0) = back.end_state();
        assert_abs_diff_eq!(t0, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w0, 0.3, epsilon = 1e-9);
        // backward curves are still stored with ascending t
        assert!(back.samples().windows(2).all(|p| p[1].t > p[0].t));
    }

    #[test]
    fn leaves_hyperbolic_region_with_state() {
        let h = SinSqDiagonal;
        let opts = IntegratorOptions::default();
        let err = integrate_line(
            ChartPoint::new(0.0, 0.0),
            Branch::First,
            0.08,
            &h,
            TAU,
            &opts,
        )
        .unwrap_err();
        match err {
            Error::LeftHyperbolic { disc, .. } => assert!(disc <= 0.0),
            other => panic!("expected LeftHyperbolic, got {other:?}"),
        }
    }

    #[test]
    fn jet_source_agrees_with_closed_form() {
        let h = SinSqDiagonal;
        let closed = IntegratorOptions::default();
        let jet = IntegratorOptions {
            source: CoeffSource::Jet,
            ..closed
        };
        let a = poincare1(1.0, 0.02, &h, &closed).unwrap();
        let b = poincare1(1.0, 0.02, &h, &jet).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
    }

    #[test]
    fn second_map_equals_first_by_symmetry() {
        let h = SinSqDiagonal;
        let opts = IntegratorOptions::default();
        let a = poincare1(0.3, 0.02, &h, &opts).unwrap();
        let b = poincare2(0.3, 0.02, &h, &opts).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }

    #[test]
    fn tolerance_halving_self_consistency() {
        let h = SinSqDiagonal;
        let base = IntegratorOptions::default();
        let tight = IntegratorOptions {
            rtol: 5e-11,
            atol: 5e-11,
            ..base
        };
        let a = poincare1(0.3, 0.02, &h, &base).unwrap();
        let b = poincare1(0.3, 0.02, &h, &tight).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn translation_estimate_fields() {
        let h = SinSqDiagonal;
        let opts = IntegratorOptions::default();
        let t = translation_number(Branch::First, 0.0, &h, 5, &opts).unwrap();
        assert_abs_diff_eq!(t.value, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.error_bar, TAU / 5.0, epsilon = 1e-15);
        assert_eq!(t.per_start.len(), 4);
        assert!(matches!(
            translation_number(Branch::First, 0.0, &h, 0, &opts),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn synthetic_richardson_recovers_exact_models() {
        let eps = [0.02, 0.01, 0.005];
        let a = -12.0 * PI;
        // pure quadratic model
        let quad: Vec<Vec<f64>> = eps.iter().map(|e| vec![a * e * e; 3]).collect();
        let (coeff, resid, per) = extract_quad_coeff(&eps, &quad).unwrap();
        assert_abs_diff_eq!(coeff, a, epsilon = 1e-12);
        assert!(resid < 1e-12);
        assert!(per.iter().all(|p| (p - a).abs() < 1e-12));
        // quadratic plus cubic: the tableau eliminates the cubic exactly
        let b = 57.3;
        let cubic: Vec<Vec<f64>> = eps
            .iter()
            .map(|e| vec![a * e * e + b * e * e * e; 3])
            .collect();
        let (coeff, _, _) = extract_quad_coeff(&eps, &cubic).unwrap();
        assert_abs_diff_eq!(coeff, a, epsilon = 1e-10);
    }

    #[test]
    fn ladder_validation() {
        let h = SinSqDiagonal;
        let opts = IntegratorOptions::default();
        assert!(matches!(
            quad_coeff_extract(&[0.02, 0.01], &[0.0], &h, &opts),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            quad_coeff_extract(&[0.02, 0.0199, 0.005], &[0.0], &h, &opts),
            Err(Error::IllConditioned(_))
        ));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let h = SinSqDiagonal;
        let opts = IntegratorOptions::default();
        let curve = integrate_line(
            ChartPoint::new(0.0, 1.0),
            Branch::First,
            0.01,
            &h,
            1.0,
            &opts,
        )
        .unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,w"));
        for (line, s) in lines.zip(curve.samples()) {
            let mut parts = line.split(',');
            let t: f64 = parts.next().unwrap().parse().unwrap();
            let w: f64 = parts.next().unwrap().parse().unwrap();
            assert_eq!(t.to_bits(), s.t.to_bits());
            assert_eq!(w.to_bits(), s.w.to_bits());
        }
    }
}
