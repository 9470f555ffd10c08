//! Adaptive Simpson quadrature over fallible integrands.
//!
//! The variational equations reduce to explicit integrals of smooth
//! trigonometric data, so composite adaptive Simpson at tight absolute
//! tolerance beats ODE stepping here in both cost and accuracy.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Integral of `f` over `[a, b]` (signed for `b < a`) to absolute
/// tolerance `tol`.
pub(crate) fn adaptive_simpson<F>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let mut eval = |x: f64| -> Result<f64> {
        let y = f(x)?;
        if !y.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite integrand value at x = {x}"
            )));
        }
        Ok(y)
    };
    let m = 0.5 * (a + b);
    let fa = eval(a)?;
    let fm = eval(m)?;
    let fb = eval(b)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&mut eval, a, fa, m, fm, b, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &mut F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let half = 0.5 * tol;
    Ok(
        simpson_step(f, a, fa, lm, flm, m, fm, left, half, depth - 1)?
            + simpson_step(f, m, fm, rm, frm, b, fb, right, half, depth - 1)?,
    )
}

/// Cumulative integral of `f` from `a` on a uniform grid of `cells`
/// intervals up to `b`. Returns `cells + 1` values starting at zero; each
/// cell is integrated adaptively so interior values carry no interpolation
/// error.
pub(crate) fn cumulative<F>(f: &mut F, a: f64, b: f64, cells: usize, tol: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    assert!(cells >= 1);
    let step = (b - a) / cells as f64;
    let mut out = Vec::with_capacity(cells + 1);
    let mut acc = 0.0;
    out.push(acc);
    for k in 0..cells {
        let lo = a + k as f64 * step;
        let hi = if k + 1 == cells {
            b
        } else {
            a + (k + 1) as f64 * step
        };
        acc += adaptive_simpson(f, lo, hi, tol)?;
        out.push(acc);
    }
    Ok(out)
}
