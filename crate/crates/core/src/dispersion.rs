//! Dispersion relations h(P): symbol evaluators h, h′, h″, the critical
//! set (energies where the group velocity vanishes), and the
//! energy-window admissibility predicate for states.

use crate::grid::{Representation, WaveFunction};
use crate::{Error, Result};

/// Natural cubic spline through strictly increasing abscissae.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::Invalid("spline needs at least 4 points".into()));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("spline abscissae must increase".into()));
        }
        let n = xs.len();
        // tridiagonal solve for natural boundary conditions
        let mut a = vec![0.0; n];
        let mut b = vec![2.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            a[i] = h0 / (h0 + h1);
            c[i] = h1 / (h0 + h1);
            d[i] = 6.0 / (h0 + h1) * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        // forward elimination
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = d[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
        }
        Ok(CubicSpline { xs, ys, m })
    }

    fn segment(&self, x: f64) -> usize {
        match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.clamp(1, self.xs.len() - 1) - 1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t0 = (self.xs[i + 1] - x) / h;
        let t1 = (x - self.xs[i]) / h;
        self.m[i] * h * h / 6.0 * (t0.powi(3) - t0)
            + self.m[i + 1] * h * h / 6.0 * (t1.powi(3) - t1)
            + self.ys[i] * t0
            + self.ys[i + 1] * t1
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t0 = (self.xs[i + 1] - x) / h;
        let t1 = (x - self.xs[i]) / h;
        self.m[i] * h / 6.0 * (1.0 - 3.0 * t0 * t0)
            + self.m[i + 1] * h / 6.0 * (3.0 * t1 * t1 - 1.0)
            + (self.ys[i + 1] - self.ys[i]) / h
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t0 = (self.xs[i + 1] - x) / h;
        let t1 = (x - self.xs[i]) / h;
        self.m[i] * t0 + self.m[i + 1] * t1
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }
}

#[derive(Debug, Clone)]
enum Symbol {
    /// h(p) = v0 + v·p
    Linear { v0: f64, v: f64 },
    /// h(p) = p²
    Schroedinger,
    /// h(p) = √(1 + p²)
    SqrtKleinGordon,
    /// sampled table with spline-derived derivatives
    Sampled(CubicSpline),
}

#[derive(Debug, Clone)]
pub struct DispersionRelation {
    pub name: String,
    symbol: Symbol,
    critical_values: Vec<f64>,
}

impl DispersionRelation {
    pub fn linear(v0: f64, v: f64) -> Result<Self> {
        if v == 0.0 {
            return Err(Error::Invalid("linear dispersion needs v != 0".into()));
        }
        Ok(DispersionRelation {
            name: format!("linear({v0},{v})"),
            symbol: Symbol::Linear { v0, v },
            critical_values: vec![],
        })
    }

    pub fn schroedinger() -> Self {
        DispersionRelation {
            name: "schroedinger".into(),
            symbol: Symbol::Schroedinger,
            critical_values: vec![0.0],
        }
    }

    pub fn sqrt_klein_gordon() -> Self {
        DispersionRelation {
            name: "sqrt_klein_gordon".into(),
            symbol: Symbol::SqrtKleinGordon,
            critical_values: vec![1.0],
        }
    }

    /// Parses builtin names: "schroedinger", "sqrt_klein_gordon", or
    /// "linear(v0,v)".
    pub fn builtin(name: &str) -> Result<Self> {
        let trimmed = name.trim();
        match trimmed {
            "schroedinger" => Ok(Self::schroedinger()),
            "sqrt_klein_gordon" => Ok(Self::sqrt_klein_gordon()),
            _ => {
                if let Some(rest) = trimmed
                    .strip_prefix("linear(")
                    .and_then(|s| s.strip_suffix(')'))
                {
                    let parts: Vec<&str> = rest.split(',').collect();
                    if parts.len() == 2 {
                        let v0 = parts[0]
                            .trim()
                            .parse::<f64>()
                            .map_err(|_| Error::UnknownDispersion(name.into()))?;
                        let v = parts[1]
                            .trim()
                            .parse::<f64>()
                            .map_err(|_| Error::UnknownDispersion(name.into()))?;
                        return Self::linear(v0, v);
                    }
                }
                Err(Error::UnknownDispersion(name.into()))
            }
        }
    }

    /// Custom dispersion from a sampled (p, h(p)) table.  Critical values
    /// are root-found on the spline derivative; admissibility margins for
    /// sampled relations are widened by `margin_factor` (10).
    pub fn from_samples(points: &[(f64, f64)]) -> Result<Self> {
        let spline = CubicSpline::new(points)?;
        let (lo, hi) = spline.range();
        let mut critical = Vec::new();
        let n_scan = 2048;
        let step = (hi - lo) / n_scan as f64;
        let mut prev = spline.deriv(lo);
        for i in 1..=n_scan {
            let p = lo + i as f64 * step;
            let cur = spline.deriv(p);
            if prev == 0.0 || prev * cur < 0.0 {
                let (mut a, mut b) = (p - step, p);
                for _ in 0..80 {
                    let mid = 0.5 * (a + b);
                    if spline.deriv(a) * spline.deriv(mid) <= 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                critical.push(spline.eval(0.5 * (a + b)));
            }
            prev = cur;
        }
        critical.sort_by(|a, b| a.partial_cmp(b).unwrap());
        critical.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        Ok(DispersionRelation {
            name: "sampled".into(),
            symbol: Symbol::Sampled(spline),
            critical_values: critical,
        })
    }

    /// Some(v) when h(p) = v0 + v·p; exact-translation fast paths key on it.
    pub fn linear_velocity(&self) -> Option<f64> {
        match self.symbol {
            Symbol::Linear { v, .. } => Some(v),
            _ => None,
        }
    }

    pub fn h(&self, p: f64) -> f64 {
        match &self.symbol {
            Symbol::Linear { v0, v } => v0 + v * p,
            Symbol::Schroedinger => p * p,
            Symbol::SqrtKleinGordon => (1.0 + p * p).sqrt(),
            Symbol::Sampled(s) => s.eval(p),
        }
    }

    pub fn h_prime(&self, p: f64) -> f64 {
        match &self.symbol {
            Symbol::Linear { v, .. } => *v,
            Symbol::Schroedinger => 2.0 * p,
            Symbol::SqrtKleinGordon => p / (1.0 + p * p).sqrt(),
            Symbol::Sampled(s) => s.deriv(p),
        }
    }

    pub fn h_second(&self, p: f64) -> f64 {
        match &self.symbol {
            Symbol::Linear { .. } => 0.0,
            Symbol::Schroedinger => 2.0,
            Symbol::SqrtKleinGordon => (1.0 + p * p).powf(-1.5),
            Symbol::Sampled(s) => s.second_deriv(p),
        }
    }

    pub fn critical_values(&self) -> &[f64] {
        &self.critical_values
    }

    /// Admissibility margins are widened for sampled relations because
    /// their derivatives are only spline-accurate.
    pub fn margin_factor(&self) -> f64 {
        match self.symbol {
            Symbol::Sampled(_) => 10.0,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
    pub margin: f64,
}

impl EnergyWindow {
    pub fn new(lo: f64, hi: f64, margin: f64) -> Result<Self> {
        if !(lo < hi) || !(margin > 0.0) {
            return Err(Error::Invalid(format!(
                "invalid energy window [{lo}, {hi}] with margin {margin}"
            )));
        }
        Ok(EnergyWindow { lo, hi, margin })
    }

    /// Checks that the window keeps the required distance from every
    /// critical value of h.
    pub fn validate(&self, h: &DispersionRelation) -> Result<()> {
        let required = self.margin * h.margin_factor();
        for &kappa in h.critical_values() {
            let dist = if kappa < self.lo {
                self.lo - kappa
            } else if kappa > self.hi {
                kappa - self.hi
            } else {
                0.0
            };
            if dist < required {
                return Err(Error::Invalid(format!(
                    "energy window [{}, {}] is within {dist:.3e} of critical value {kappa} \
                     (required margin {required:.3e})",
                    self.lo, self.hi
                )));
            }
        }
        Ok(())
    }
}

/// True iff the momentum-space mass of φ outside the energy window is
/// below mass_tol·‖φ‖².
pub fn admissible(
    phi: &WaveFunction,
    h: &DispersionRelation,
    window: &EnergyWindow,
    mass_tol: f64,
) -> Result<bool> {
    let mom = phi.into_representation(Representation::Momentum)?;
    let total = mom.norm_sq();
    if total == 0.0 {
        return Ok(true);
    }
    let outside: f64 = mom
        .samples
        .iter()
        .enumerate()
        .filter(|(m, _)| {
            let e = h.h(mom.grid.momentum(*m));
            e < window.lo || e > window.hi
        })
        .map(|(_, c)| c.norm_sqr())
        .sum::<f64>()
        * mom.grid.dk;
    Ok(outside < mass_tol * total)
}

/// Max deviation of centered finite differences of h from the declared
/// h′ and h″ over the momentum interval (self-test, δ = 1e-4).
pub fn check_derivatives(h: &DispersionRelation, p_lo: f64, p_hi: f64) -> f64 {
    let delta = 1e-4;
    let n = 201;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let p = p_lo + (p_hi - p_lo) * i as f64 / (n - 1) as f64;
        let fd1 = (h.h(p + delta) - h.h(p - delta)) / (2.0 * delta);
        let fd2 = (h.h(p + delta) - 2.0 * h.h(p) + h.h(p - delta)) / (delta * delta);
        worst = worst.max((fd1 - h.h_prime(p)).abs());
        worst = worst.max((fd2 - h.h_second(p)).abs());
    }
    worst
}
