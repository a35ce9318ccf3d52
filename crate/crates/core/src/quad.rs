//! Adaptive Gauss–Kronrod quadrature (G7/K15) with interval bisection,
//! plus a block-doubling scheme for integrals over semi-infinite tails.

use crate::{Error, Result};

/// Kronrod abscissae on [0, 1] side of the symmetric 15-point rule.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Gauss weights paired with XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let (fl, fr) = if x == 0.0 {
            let v = f(c);
            (v, 0.0)
        } else {
            (f(c - h * x), f(c + h * x))
        };
        let sum = fl + fr;
        kronrod += wk * sum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * sum;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

/// Integrates f over [a, b] to absolute tolerance `tol` by recursive
/// bisection of the 15-point Kronrod rule.
pub fn adaptive(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("non-finite quadrature bounds".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    adaptive_inner(&mut f, a, b, tol, 0)
}

fn adaptive_inner(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let (value, err) = gk15(f, a, b);
    if err <= tol || (b - a).abs() < 1e-14 * (a.abs() + b.abs() + 1.0) {
        return Ok(value);
    }
    if depth >= 48 {
        return Err(Error::NonConvergent(format!(
            "quadrature stalled on [{a}, {b}], error {err:.3e}"
        )));
    }
    let c = 0.5 * (a + b);
    let left = adaptive_inner(f, a, c, 0.5 * tol, depth + 1)?;
    let right = adaptive_inner(f, c, b, 0.5 * tol, depth + 1)?;
    Ok(left + right)
}

/// Integrates f over sub-intervals split at the given interior breakpoints.
pub fn adaptive_split(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<f64> {
    let mut pts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let per = tol / (pts.len() - 1) as f64;
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += adaptive(&mut f, w[0], w[1], per)?;
    }
    Ok(total)
}

/// Integrates f over [a, ∞) by doubling blocks [m, 2m].  `tail_bound(m)`
/// must majorize |∫_m^∞ f|; the sum stops once the bound drops below tol.
pub fn adaptive_to_infinity(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    tol: f64,
    tail_bound: impl Fn(f64) -> f64,
) -> Result<f64> {
    let mut lo = a.max(1e-300);
    let mut total = 0.0;
    let first_hi = if a <= 0.0 { 1.0 } else { 2.0 * lo };
    total += adaptive(&mut f, a, first_hi, 0.25 * tol)?;
    lo = first_hi;
    for _ in 0..200 {
        if tail_bound(lo) <= 0.5 * tol {
            return Ok(total);
        }
        let hi = 2.0 * lo;
        total += adaptive(&mut f, lo, hi, 0.25 * tol / 8.0)?;
        lo = hi;
    }
    Err(Error::NonConvergent(
        "tail bound never dropped below tolerance".into(),
    ))
}
