//! Localization functions f (plateau cutoffs) and their averaged
//! companions, evaluated by adaptive quadrature:
//!
//!   R_f(x)  = ∫₀^∞ dμ/μ [f(μx) − χ_{[0,1]}(μ)]
//!   R_f′(x) = ∫₀^∞ dμ f′(μx)   (componentwise)
//!   F_f(x)  = ∫_ℝ dμ f(μx)
//!
//! valid for f = 1 near 0 with |f(x)| ≤ C⟨x⟩^{−ρ}.

use std::sync::Arc;

use crate::quad;
use crate::{Error, Result};

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// radial C^∞ bump: 1 on [0, a], 0 beyond a + w, mollified in between
    PlateauBump { a: f64, w: f64 },
    /// indicator of a symmetric union of intervals (d = 1 only); stored as
    /// positive half-axis segments, the first starting at 0
    Characteristic { segments: Vec<(f64, f64)> },
    /// radial profile supplied directly (test/diagnostic use)
    RadialProfile { f0: RadialFn, f0_prime: Option<RadialFn> },
}

#[derive(Clone)]
pub struct LocalizationFunction {
    pub dim: usize,
    pub rho: f64,
    pub plateau_radius: f64,
    /// radius beyond which f vanishes identically, when compactly supported
    pub support_radius: Option<f64>,
    pub is_even: bool,
    pub is_radial: bool,
    pub is_smooth: bool,
    /// fitted constants in |f(x)| ≤ C⟨x⟩^{−ρ} and |f′| ≤ C′⟨x⟩^{−ρ−1}
    decay_c: f64,
    decay_c_prime: f64,
    kind: Kind,
}

/// C^∞ step: 0 for u ≤ 0, 1 for u ≥ 1.
fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let s = (-1.0 / u).exp();
        let t = (-1.0 / (1.0 - u)).exp();
        s / (s + t)
    }
}

fn smoothstep_deriv(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        let s = (-1.0 / u).exp();
        let t = (-1.0 / (1.0 - u)).exp();
        let sp = s / (u * u);
        let tp = -t / ((1.0 - u) * (1.0 - u));
        (sp * (s + t) - s * (sp + tp)) / ((s + t) * (s + t))
    }
}

impl LocalizationFunction {
    /// Smooth even radial plateau bump: f = 1 on |x| ≤ plateau_radius and
    /// f = 0 beyond plateau_radius + decay_scale.
    pub fn make_plateau_bump(dim: usize, plateau_radius: f64, decay_scale: f64) -> Result<Self> {
        if !(plateau_radius > 0.0) || !(decay_scale > 0.0) {
            return Err(Error::Invalid(
                "plateau bump needs positive radii".into(),
            ));
        }
        if dim == 0 {
            return Err(Error::Invalid("dimension must be positive".into()));
        }
        let rho = 6.0; // any ρ works: the support is compact
        let mut lf = LocalizationFunction {
            dim,
            rho,
            plateau_radius,
            support_radius: Some(plateau_radius + decay_scale),
            is_even: true,
            is_radial: true,
            is_smooth: true,
            decay_c: 0.0,
            decay_c_prime: 0.0,
            kind: Kind::PlateauBump {
                a: plateau_radius,
                w: decay_scale,
            },
        };
        lf.fit_decay_constants();
        Ok(lf)
    }

    /// Indicator of a bounded symmetric union of intervals containing a
    /// neighbourhood of 0 (d = 1).
    pub fn make_characteristic(intervals: &[(f64, f64)]) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Invalid("empty interval union".into()));
        }
        let mut ivs: Vec<(f64, f64)> = intervals.to_vec();
        ivs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for iv in &ivs {
            if !(iv.0 < iv.1) {
                return Err(Error::Invalid(format!("degenerate interval {iv:?}")));
            }
        }
        // symmetry: the union must equal its reflection
        let mut reflected: Vec<(f64, f64)> = ivs.iter().map(|&(a, b)| (-b, -a)).collect();
        reflected.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let symmetric = ivs
            .iter()
            .zip(&reflected)
            .all(|(a, b)| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        if !symmetric {
            return Err(Error::Invalid("interval union is not symmetric".into()));
        }
        // positive half-axis segments; the first must start at 0
        let mut segments: Vec<(f64, f64)> = Vec::new();
        for &(a, b) in &ivs {
            if b <= 0.0 {
                continue;
            }
            segments.push((a.max(0.0), b));
        }
        if segments.is_empty() || segments[0].0 != 0.0 {
            return Err(Error::Invalid(
                "interval union must contain a neighbourhood of 0".into(),
            ));
        }
        let support = segments.last().unwrap().1;
        let plateau = segments[0].1;
        let mut lf = LocalizationFunction {
            dim: 1,
            rho: 6.0,
            plateau_radius: plateau,
            support_radius: Some(support),
            is_even: true,
            is_radial: true,
            is_smooth: false,
            decay_c: 0.0,
            decay_c_prime: 0.0,
            kind: Kind::Characteristic { segments },
        };
        lf.fit_decay_constants();
        Ok(lf)
    }

    /// Radial profile supplied as a closure (diagnostic use; the profile
    /// need not have a plateau, in which case only F_f is meaningful).
    pub fn from_radial_profile(
        dim: usize,
        rho: f64,
        plateau_radius: f64,
        f0: RadialFn,
        f0_prime: Option<RadialFn>,
    ) -> Result<Self> {
        if dim == 0 || rho <= 0.0 {
            return Err(Error::Invalid("need dim ≥ 1 and ρ > 0".into()));
        }
        let mut lf = LocalizationFunction {
            dim,
            rho,
            plateau_radius,
            support_radius: None,
            is_even: true,
            is_radial: true,
            is_smooth: true,
            decay_c: 0.0,
            decay_c_prime: 0.0,
            kind: Kind::RadialProfile { f0, f0_prime },
        };
        lf.fit_decay_constants();
        Ok(lf)
    }

    fn fit_decay_constants(&mut self) {
        let hi = self.support_radius.unwrap_or(64.0);
        let mut c: f64 = 0.0;
        let mut cp: f64 = 0.0;
        for i in 1..=4096 {
            let r = hi * i as f64 / 4096.0;
            let w = (1.0 + r * r).powf(self.rho / 2.0);
            c = c.max(self.eval_radial(r).abs() * w);
            if let Some(d) = self.eval_radial_deriv(r) {
                cp = cp.max(d.abs() * w * (1.0 + r * r).sqrt());
            }
        }
        self.decay_c = c.max(1.0);
        self.decay_c_prime = cp.max(1.0);
    }

    /// f at radius r ≥ 0 (all shipped localization functions are radial).
    pub fn eval_radial(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::PlateauBump { a, w } => {
                if r <= *a {
                    1.0
                } else {
                    1.0 - smoothstep((r - a) / w)
                }
            }
            Kind::Characteristic { segments } => {
                if segments.iter().any(|&(s, e)| r >= s && r <= e) {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::RadialProfile { f0, .. } => f0(r),
        }
    }

    /// d f/d r at radius r, when available.
    pub fn eval_radial_deriv(&self, r: f64) -> Option<f64> {
        match &self.kind {
            Kind::PlateauBump { a, w } => {
                if r <= *a || r >= a + w {
                    Some(0.0)
                } else {
                    Some(-smoothstep_deriv((r - a) / w) / w)
                }
            }
            Kind::Characteristic { .. } => None,
            Kind::RadialProfile { f0_prime, .. } => f0_prime.as_ref().map(|g| g(r)),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        self.eval_radial(r)
    }

    /// ∇f(x) = f₀′(|x|)·x/|x| for radial f.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let r = norm(x);
        if r == 0.0 {
            return Some(vec![0.0; x.len()]);
        }
        let d = self.eval_radial_deriv(r)?;
        Some(x.iter().map(|&xi| d * xi / r).collect())
    }

    fn check_point(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Invalid(format!(
                "point dimension {} != {}",
                x.len(),
                self.dim
            )));
        }
        let u = norm(x);
        if u == 0.0 {
            return Err(Error::Domain("R_f/F_f undefined at x = 0".into()));
        }
        Ok(u)
    }

    /// R_f(x) by adaptive quadrature, absolute error ≤ quad_tol.
    pub fn r_f(&self, x: &[f64], quad_tol: f64) -> Result<f64> {
        let u = self.check_point(x)?;
        if let Kind::Characteristic { segments } = &self.kind {
            // piecewise-constant integrand: logarithms are exact
            let mut total = (segments[0].1 / u).ln();
            for &(s, e) in &segments[1..] {
                total += (e / s).ln();
            }
            return Ok(total);
        }
        if self.rho <= 0.0 {
            return Err(Error::NonConvergent("R_f tail needs ρ > 0".into()));
        }
        let integrand = |mu: f64| {
            let f = self.eval_radial(mu * u);
            let step = if mu <= 1.0 { 1.0 } else { 0.0 };
            (f - step) / mu
        };
        // the integrand vanishes identically below min(a/u, 1)
        let lo = (self.plateau_radius / u).min(1.0);
        let mut breaks = vec![1.0, self.plateau_radius / u];
        match self.support_radius {
            Some(b) => {
                let hi = (b / u).max(1.0);
                breaks.push(b / u);
                quad::adaptive_split(integrand, lo, hi, &breaks, quad_tol)
            }
            None => {
                let mid = (1.0_f64).max(self.plateau_radius / u) * 2.0;
                breaks.push(mid);
                let head = quad::adaptive_split(integrand, lo, mid, &breaks, 0.5 * quad_tol)?;
                let c = self.decay_c;
                let rho = self.rho;
                let tail = quad::adaptive_to_infinity(
                    integrand,
                    mid,
                    0.5 * quad_tol,
                    |m| c * (u * m).powf(-rho) / rho,
                )?;
                Ok(head + tail)
            }
        }
    }

    /// Componentwise ∫₀^∞ dμ f′(μx); errors when f has no gradient
    /// (use the radial closed form −x/|x|² instead for such f).
    pub fn r_f_grad(&self, x: &[f64], quad_tol: f64) -> Result<Vec<f64>> {
        let u = self.check_point(x)?;
        if self.eval_radial_deriv(0.5 * u).is_none() {
            return Err(Error::Invalid(
                "f has no gradient; for radial f use the closed form R_f'(x) = -x/|x|²".into(),
            ));
        }
        // radial: f′(μx)_i = f₀′(μ|x|)·x_i/|x|, one scalar quadrature
        let integrand = |mu: f64| self.eval_radial_deriv(mu * u).unwrap();
        let scalar = match self.support_radius {
            Some(b) => quad::adaptive_split(
                &integrand,
                0.0,
                b / u,
                &[self.plateau_radius / u],
                quad_tol,
            )?,
            None => {
                let mid = (1.0_f64).max(2.0 * self.plateau_radius / u);
                let head = quad::adaptive_split(
                    &integrand,
                    0.0,
                    mid,
                    &[self.plateau_radius / u],
                    0.5 * quad_tol,
                )?;
                let c = self.decay_c_prime;
                let rho = self.rho;
                let tail = quad::adaptive_to_infinity(&integrand, mid, 0.5 * quad_tol, |m| {
                    c * (u * m).powf(-rho - 1.0) / (rho + 1.0) / u
                })?;
                head + tail
            }
        };
        Ok(x.iter().map(|&xi| scalar * xi / u).collect())
    }

    /// F_f(x) = ∫_ℝ dμ f(μx); needs ρ > 1.
    pub fn f_f(&self, x: &[f64], quad_tol: f64) -> Result<f64> {
        let u = self.check_point(x)?;
        if self.rho <= 1.0 {
            return Err(Error::NonConvergent(
                "F_f needs ρ > 1 for an integrable tail".into(),
            ));
        }
        if let Kind::Characteristic { segments } = &self.kind {
            let len: f64 = segments.iter().map(|&(s, e)| e - s).sum();
            return Ok(2.0 * len / u);
        }
        // f even: F_f = 2∫₀^∞ f(μx) dμ
        let integrand = |mu: f64| self.eval_radial(mu * u);
        let value = match self.support_radius {
            Some(b) => quad::adaptive_split(
                integrand,
                0.0,
                b / u,
                &[self.plateau_radius / u],
                0.5 * quad_tol,
            )?,
            None => {
                let mid = (1.0_f64).max(2.0 * self.plateau_radius / u);
                let head = quad::adaptive_split(
                    integrand,
                    0.0,
                    mid,
                    &[self.plateau_radius / u],
                    0.25 * quad_tol,
                )?;
                let c = self.decay_c;
                let rho = self.rho;
                let tail = quad::adaptive_to_infinity(integrand, mid, 0.25 * quad_tol, |m| {
                    c * u.powf(-rho) * m.powf(1.0 - rho) / (rho - 1.0)
                })?;
                head + tail
            }
        };
        Ok(2.0 * value)
    }

    /// Radial cumulative G(x) = ∫₀ˣ f₀(u) du for x ≥ 0; exact interval
    /// arithmetic for characteristic f, adaptive quadrature otherwise.
    /// x = ∞ is accepted when f is compactly supported or ρ > 1.
    pub fn radial_cumulative(&self, x: f64, quad_tol: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::Domain(format!("cumulative needs x ≥ 0, got {x}")));
        }
        if let Kind::Characteristic { segments } = &self.kind {
            return Ok(segments
                .iter()
                .map(|&(s, e)| (x.min(e) - s).max(0.0))
                .sum());
        }
        let hi = match self.support_radius {
            Some(b) => x.min(b),
            None => x,
        };
        if hi == 0.0 {
            return Ok(0.0);
        }
        let integrand = |u: f64| self.eval_radial(u);
        if hi.is_finite() {
            return quad::adaptive_split(integrand, 0.0, hi, &[self.plateau_radius], quad_tol);
        }
        if self.rho <= 1.0 {
            return Err(Error::NonConvergent(
                "G(∞) needs compact support or ρ > 1".into(),
            ));
        }
        let mid = 2.0 * self.plateau_radius.max(1.0);
        let head =
            quad::adaptive_split(integrand, 0.0, mid, &[self.plateau_radius], 0.5 * quad_tol)?;
        let c = self.decay_c;
        let rho = self.rho;
        let tail = quad::adaptive_to_infinity(integrand, mid, 0.5 * quad_tol, |m| {
            c * m.powf(1.0 - rho) / (rho - 1.0)
        })?;
        Ok(head + tail)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-9;

    fn random_point(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
        loop {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let r = norm(&x);
            if (0.1..=10.0).contains(&r) {
                return x;
            }
        }
    }

    #[test]
    fn plateau_values() {
        let f = LocalizationFunction::make_plateau_bump(3, 1.0, 0.5).unwrap();
        let x = [0.5, 0.0, 0.0];
        assert_eq!(f.eval(&x), 1.0);
        assert_eq!(f.eval(&[0.0, 0.0, 0.0]), 1.0);
        assert_eq!(f.eval(&[2.0, 0.0, 0.0]), 0.0);
        let mid = f.eval(&[1.25, 0.0, 0.0]);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn bump_is_even() {
        let f = LocalizationFunction::make_plateau_bump(2, 1.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = random_point(&mut rng, 2);
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            assert_eq!(f.eval(&x), f.eval(&neg));
        }
    }

    #[test]
    fn characteristic_basics() {
        let f = LocalizationFunction::make_characteristic(&[(-1.0, 1.0)]).unwrap();
        assert_eq!(f.eval(&[0.5]), 1.0);
        assert_eq!(f.eval(&[2.0]), 0.0);
        assert!((f.f_f(&[1.0], TOL).unwrap() - 2.0).abs() < 1e-12);
        assert!(LocalizationFunction::make_characteristic(&[(0.0, 1.0)]).is_err());
        assert!(
            LocalizationFunction::make_characteristic(&[(-2.0, -1.0), (1.0, 2.0)]).is_err(),
            "union without a neighbourhood of 0 must be rejected"
        );
    }

    #[test]
    fn characteristic_r_f_is_minus_log() {
        let f = LocalizationFunction::make_characteristic(&[(-1.0, 1.0)]).unwrap();
        let v = f.r_f(&[2.0], TOL).unwrap();
        assert!((v + 2.0_f64.ln()).abs() < 1e-12, "R_f(2) = {v}");
        let v = f.r_f(&[0.3], TOL).unwrap();
        assert!((v + 0.3_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn log_shift_property() {
        // R_f(t·x) = R_f(x) − ln t
        let f = LocalizationFunction::make_plateau_bump(1, 1.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x = random_point(&mut rng, 1);
            let t: f64 = rng.gen_range(0.5..4.0);
            let tx = [t * x[0]];
            let lhs = f.r_f(&tx, TOL).unwrap();
            let rhs = f.r_f(&x, TOL).unwrap() - t.ln();
            assert!((lhs - rhs).abs() < 1e-7, "log shift failed: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn radial_r_f_is_log_plus_constant() {
        let f = LocalizationFunction::make_plateau_bump(2, 1.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let reference = f.r_f(&[1.0, 0.0], TOL).unwrap();
        for _ in 0..30 {
            let x = random_point(&mut rng, 2);
            let v = f.r_f(&x, TOL).unwrap() + norm(&x).ln();
            assert!((v - reference).abs() < 1e-7);
        }
    }

    #[test]
    fn gradient_identity_minus_one() {
        // x · R_f′(x) = −1 in every dimension
        for dim in 1..=3 {
            let f = LocalizationFunction::make_plateau_bump(dim, 1.0, 0.5).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(13 + dim as u64);
            for _ in 0..30 {
                let x = random_point(&mut rng, dim);
                let grad = f.r_f_grad(&x, TOL).unwrap();
                let dot: f64 = x.iter().zip(&grad).map(|(a, b)| a * b).sum();
                assert!((dot + 1.0).abs() < 1e-7, "x·R_f' = {dot} in d={dim}");
            }
        }
    }

    #[test]
    fn radial_gradient_closed_form() {
        // R_f′(x) = −x/|x|² for radial f
        let f = LocalizationFunction::make_plateau_bump(3, 1.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let x = random_point(&mut rng, 3);
            let r2 = norm(&x).powi(2);
            let grad = f.r_f_grad(&x, TOL).unwrap();
            for (g, xi) in grad.iter().zip(&x) {
                assert!((g + xi / r2).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn one_dim_radial_derivative_value() {
        let f = LocalizationFunction::make_plateau_bump(1, 1.0, 0.5).unwrap();
        let grad = f.r_f_grad(&[2.0], TOL).unwrap();
        assert!((grad[0] + 0.5).abs() < 1e-8, "R_f'(2) = {}", grad[0]);
    }

    #[test]
    fn gradient_homogeneity() {
        // t·R_f′(tx) = R_f′(x)
        let f = LocalizationFunction::make_plateau_bump(2, 1.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let x = random_point(&mut rng, 2);
            let t: f64 = rng.gen_range(0.5..3.0);
            let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
            let g1 = f.r_f_grad(&x, TOL).unwrap();
            let g2 = f.r_f_grad(&tx, TOL).unwrap();
            for (a, b) in g1.iter().zip(&g2) {
                assert!((a - t * b).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn f_f_homogeneity() {
        // t·F_f(tx) = F_f(x)
        let f = LocalizationFunction::make_plateau_bump(3, 1.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let x = random_point(&mut rng, 3);
            let t: f64 = rng.gen_range(0.5..3.0);
            let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
            let lhs = t * f.f_f(&tx, TOL).unwrap();
            let rhs = f.f_f(&x, TOL).unwrap();
            assert!((lhs - rhs).abs() < 1e-7);
        }
    }

    #[test]
    fn characteristic_f_f_scaling() {
        let f = LocalizationFunction::make_characteristic(&[(-1.0, 1.0)]).unwrap();
        assert!((f.f_f(&[4.0], TOL).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gaussian_profile_f_f() {
        // no plateau: decay check only; F_f(x) = √π/|x|
        let f = LocalizationFunction::from_radial_profile(
            1,
            4.0,
            0.0,
            Arc::new(|r| (-r * r).exp()),
            Some(Arc::new(|r| -2.0 * r * (-r * r).exp())),
        )
        .unwrap();
        let v = f.f_f(&[2.0], TOL).unwrap();
        let expected = std::f64::consts::PI.sqrt() / 2.0;
        assert!((v - expected).abs() < 1e-8, "F_f = {v}, want {expected}");
    }

    #[test]
    fn zero_point_rejected() {
        let f = LocalizationFunction::make_plateau_bump(1, 1.0, 0.5).unwrap();
        assert!(f.r_f(&[0.0], TOL).is_err());
        assert!(f.f_f(&[0.0], TOL).is_err());
    }

    #[test]
    fn characteristic_gradient_unavailable() {
        let f = LocalizationFunction::make_characteristic(&[(-1.0, 1.0)]).unwrap();
        assert!(f.r_f_grad(&[2.0], TOL).is_err());
    }

    #[test]
    fn non_integrable_tail_rejected() {
        let f = LocalizationFunction::from_radial_profile(
            1,
            0.5,
            0.0,
            Arc::new(|r| (1.0 + r).powf(-0.5)),
            None,
        )
        .unwrap();
        assert!(f.f_f(&[1.0], TOL).is_err());
    }

    #[test]
    fn adaptive_matches_trapezoid_oracle() {
        // brute-force oracle: trapezoid refinement of the defining integral
        let f = LocalizationFunction::make_plateau_bump(1, 1.0, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let x = random_point(&mut rng, 1);
            let u = x[0].abs();
            let adaptive = f.r_f(&x, TOL).unwrap();
            let integrand = |mu: f64| {
                let fv = f.eval_radial(mu * u);
                let step = if mu <= 1.0 { 1.0 } else { 0.0 };
                if mu == 0.0 { 0.0 } else { (fv - step) / mu }
            };
            let lo = 1e-12;
            let hi = (1.5 / u).max(1.0) + 1.0;
            let mut n = 1 << 10;
            let mut prev;
            let mut val = f64::NAN;
            for _ in 0..12 {
                let hstep = (hi - lo) / n as f64;
                let mut s = 0.5 * (integrand(lo) + integrand(hi));
                for i in 1..n {
                    s += integrand(lo + i as f64 * hstep);
                }
                prev = val;
                val = s * hstep;
                if (val - prev).abs() < 1e-9 {
                    break;
                }
                n *= 2;
            }
            assert!(
                (adaptive - val).abs() < 1e-6,
                "adaptive {adaptive} vs oracle {val} at x = {}",
                x[0]
            );
        }
    }
}
