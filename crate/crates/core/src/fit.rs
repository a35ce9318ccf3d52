//! Least-squares fits used for decay-rate measurements and
//! convergence-sweep extrapolation.

use crate::{Error, Result};

/// Ordinary least squares y = intercept + slope·x.
/// Returns (slope, intercept, r_squared).
pub fn linear(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Invalid("need at least two points to fit".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Invalid("degenerate abscissae in fit".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((slope, my - slope * mx, r2))
}

/// Fits y ≈ C·x^{-zeta} on positive data via log-log least squares.
/// Returns (zeta, log_c, r_squared).
pub fn power_decay(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        if x > 0.0 && y > 0.0 {
            lx.push(x.ln());
            ly.push(y.ln());
        }
    }
    let (slope, intercept, r2) = linear(&lx, &ly)?;
    Ok((-slope, intercept, r2))
}

/// ∫_{t_end}^∞ C·t^{-zeta} dt for a fitted power law, evaluated in log
/// space so that steep fits (huge log_c, tiny t_end^{1-zeta}) do not
/// overflow to inf·0 = NaN.  Requires zeta > 1.
pub fn power_tail(zeta: f64, log_c: f64, t_end: f64) -> f64 {
    (log_c + (1.0 - zeta) * t_end.ln() - (zeta - 1.0).ln()).exp()
}

/// Fits y ≈ C·e^{-rate·x} on positive data via semi-log least squares.
/// Returns (rate, log_c, r_squared).
pub fn exponential_decay(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let ly: Vec<f64> = ys.iter().map(|&y| y.max(1e-300).ln()).collect();
    let (slope, intercept, r2) = linear(xs, &ly)?;
    Ok((-slope, intercept, r2))
}

/// Result of extrapolating a convergence sequence y(r) ≈ limit + c·r^{-q}.
#[derive(Debug, Clone, Copy)]
pub struct PowerFit {
    pub limit: f64,
    pub coefficient: f64,
    pub exponent: f64,
    pub residual: f64,
}

/// Fits y(r) = limit + c·r^{-q} with q > 0 over the supplied points
/// (intended for the last few entries of an increasing r-schedule).
/// The exponent is located by golden-section search on the residual.
pub fn power_extrapolate(rs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    if rs.len() != ys.len() || rs.len() < 3 {
        return Err(Error::Invalid(
            "power-law extrapolation needs at least three points".into(),
        ));
    }
    let solve = |q: f64| -> (f64, f64, f64) {
        // linear least squares in (limit, c) for fixed q
        let n = rs.len() as f64;
        let bs: Vec<f64> = rs.iter().map(|&r| r.powf(-q)).collect();
        let sb = bs.iter().sum::<f64>();
        let sbb = bs.iter().map(|b| b * b).sum::<f64>();
        let sy = ys.iter().sum::<f64>();
        let sby = bs.iter().zip(ys).map(|(b, y)| b * y).sum::<f64>();
        let det = n * sbb - sb * sb;
        if det.abs() < 1e-300 {
            return (f64::NAN, f64::NAN, f64::INFINITY);
        }
        let c = (n * sby - sb * sy) / det;
        let limit = (sy - c * sb) / n;
        let res = bs
            .iter()
            .zip(ys)
            .map(|(b, y)| (limit + c * b - y).powi(2))
            .sum::<f64>();
        (limit, c, res)
    };
    let (mut lo, mut hi) = (0.05_f64, 6.0_f64);
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = solve(x1).2;
    let mut f2 = solve(x2).2;
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = solve(x1).2;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = solve(x2).2;
        }
    }
    let q = 0.5 * (lo + hi);
    let (limit, c, res) = solve(q);
    if !limit.is_finite() || q <= 0.0 {
        return Err(Error::NonConvergent("power-law extrapolation failed".into()));
    }
    Ok(PowerFit {
        limit,
        coefficient: c,
        exponent: q,
        residual: res.sqrt(),
    })
}

/// Richardson-style extrapolation assuming y(r) = limit + c/r on the last
/// two points of the schedule.
pub fn richardson(rs: &[f64], ys: &[f64]) -> Result<f64> {
    if rs.len() != ys.len() || rs.len() < 2 {
        return Err(Error::Invalid("richardson needs two points".into()));
    }
    let (r1, r2) = (rs[rs.len() - 2], rs[rs.len() - 1]);
    let (y1, y2) = (ys[ys.len() - 2], ys[ys.len() - 1]);
    Ok((y2 * r2 - y1 * r1) / (r2 - r1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (slope, intercept, r2) = linear(&xs, &ys).unwrap();
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_decay_recovers_exponent() {
        let xs: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-2.5)).collect();
        let (zeta, _, r2) = power_decay(&xs, &ys).unwrap();
        assert!((zeta - 2.5).abs() < 1e-10);
        assert!(r2 > 0.999999);
    }

    #[test]
    fn extrapolation_recovers_limit() {
        let rs = [4.0, 8.0, 16.0, 32.0];
        let ys: Vec<f64> = rs.iter().map(|r: &f64| 1.5 + 2.0 * r.powf(-1.3)).collect();
        let fit = power_extrapolate(&rs, &ys).unwrap();
        assert!((fit.limit - 1.5).abs() < 1e-6, "limit {}", fit.limit);
        assert!((fit.exponent - 1.3).abs() < 1e-3);
    }

    #[test]
    fn richardson_first_order() {
        let rs = [10.0, 20.0];
        let ys: Vec<f64> = rs.iter().map(|r| 2.0 + 5.0 / r).collect();
        let lim = richardson(&rs, &ys).unwrap();
        assert!((lim - 2.0).abs() < 1e-12);
    }
}
