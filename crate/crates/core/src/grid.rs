//! Uniform periodic 1-D spectral grid: wavefunction storage, FFT-based
//! position↔momentum transforms, inner products, and mixed Q/g(P)
//! expectation values.
//!
//! Conventions: position samples x_j = x_min + j·dx; momentum samples in
//! FFT order k_m = m·dk for m < n/2 and (m−n)·dk otherwise, spanning
//! [−π/dx, π/dx).  The transform approximates the unitary continuum
//! Fourier transform φ̂(k) = (2π)^{-1/2} ∫ φ(x) e^{-ikx} dx.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::{Error, Result};

/// Fraction of the box (on each side) treated as the edge region for
/// aliasing-mass checks.
pub const EDGE_FRACTION: f64 = 0.1;
/// Maximum relative mass allowed in the edge region.
pub const EDGE_MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub dk: f64,
}

impl Grid {
    pub fn new(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if !n_points.is_power_of_two() || n_points < 2 {
            return Err(Error::NotPowerOfTwo(n_points));
        }
        if !(x_max > x_min) {
            return Err(Error::InvalidBounds(x_min, x_max));
        }
        let dx = (x_max - x_min) / n_points as f64;
        let dk = 2.0 * PI / (n_points as f64 * dx);
        Ok(Grid {
            n_points,
            x_min,
            x_max,
            dx,
            dk,
        })
    }

    pub fn position(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    /// Momentum of FFT bin m (FFT ordering, negative frequencies in the
    /// upper half).
    pub fn momentum(&self, m: usize) -> f64 {
        let n = self.n_points;
        if m < n / 2 {
            m as f64 * self.dk
        } else {
            (m as f64 - n as f64) * self.dk
        }
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.position(j)).collect()
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n_points).map(|m| self.momentum(m)).collect()
    }

    pub fn momentum_max(&self) -> f64 {
        PI / self.dx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Position,
    Momentum,
}

#[derive(Debug, Clone)]
pub struct WaveFunction {
    pub grid: Grid,
    pub samples: Vec<Complex64>,
    pub representation: Representation,
}

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn fft_in_place(buf: &mut [Complex64], forward: bool) {
    let n = buf.len();
    let plan = PLANS.with(|cell| {
        cell.borrow_mut()
            .entry((n, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                let dir = if forward {
                    FftDirection::Forward
                } else {
                    FftDirection::Inverse
                };
                planner.plan_fft(n, dir)
            })
            .clone()
    });
    plan.process(buf);
}

impl WaveFunction {
    pub fn new(grid: Grid, samples: Vec<Complex64>, representation: Representation) -> Result<Self> {
        if samples.len() != grid.n_points {
            return Err(Error::Invalid(format!(
                "sample count {} does not match grid size {}",
                samples.len(),
                grid.n_points
            )));
        }
        Ok(WaveFunction {
            grid,
            samples,
            representation,
        })
    }

    /// Unit-normalized Gaussian wavepacket centered at x0 with momentum k0
    /// and position width sigma, in position representation.
    pub fn gaussian(grid: Grid, x0: f64, k0: f64, sigma: f64) -> Self {
        let norm = (PI * sigma * sigma).powf(-0.25);
        let samples = (0..grid.n_points)
            .map(|j| {
                let x = grid.position(j);
                let envelope = (-(x - x0) * (x - x0) / (2.0 * sigma * sigma)).exp();
                Complex64::from_polar(norm * envelope, k0 * (x - x0))
            })
            .collect();
        WaveFunction {
            grid,
            samples,
            representation: Representation::Position,
        }
        .normalized()
    }

    fn measure(&self) -> f64 {
        match self.representation {
            Representation::Position => self.grid.dx,
            Representation::Momentum => self.grid.dk,
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.measure()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            let s = 1.0 / n;
            for c in &mut self.samples {
                *c *= s;
            }
        }
        self
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        for s in &mut self.samples {
            *s *= c;
        }
        self
    }

    pub fn to_momentum(&self) -> Result<WaveFunction> {
        if self.representation != Representation::Position {
            return Err(Error::RepresentationMismatch {
                expected: Representation::Position,
                got: self.representation,
            });
        }
        let g = &self.grid;
        let mut buf = self.samples.clone();
        fft_in_place(&mut buf, true);
        let scale = g.dx / (2.0 * PI).sqrt();
        for (m, c) in buf.iter_mut().enumerate() {
            let k = g.momentum(m);
            *c *= Complex64::from_polar(scale, -k * g.x_min);
        }
        WaveFunction::new(*g, buf, Representation::Momentum)
    }

    pub fn to_position(&self) -> Result<WaveFunction> {
        if self.representation != Representation::Momentum {
            return Err(Error::RepresentationMismatch {
                expected: Representation::Momentum,
                got: self.representation,
            });
        }
        let g = &self.grid;
        let mut buf = self.samples.clone();
        for (m, c) in buf.iter_mut().enumerate() {
            let k = g.momentum(m);
            *c *= Complex64::from_polar(1.0, k * g.x_min);
        }
        fft_in_place(&mut buf, false);
        let scale = g.dk / (2.0 * PI).sqrt();
        for c in &mut buf {
            *c *= scale;
        }
        WaveFunction::new(*g, buf, Representation::Position)
    }

    /// Converts to the requested representation (no-op if already there).
    pub fn into_representation(&self, rep: Representation) -> Result<WaveFunction> {
        if self.representation == rep {
            Ok(self.clone())
        } else {
            match rep {
                Representation::Momentum => self.to_momentum(),
                Representation::Position => self.to_position(),
            }
        }
    }

    /// Pointwise multiplication by g(x) in position representation.
    pub fn apply_position_fn(&self, g: impl Fn(f64) -> Complex64) -> Result<WaveFunction> {
        let pos = self.into_representation(Representation::Position)?;
        let samples = pos
            .samples
            .iter()
            .enumerate()
            .map(|(j, c)| c * g(pos.grid.position(j)))
            .collect();
        WaveFunction::new(pos.grid, samples, Representation::Position)
    }

    /// Pointwise multiplication by g(k) in momentum representation; the
    /// result is returned in the caller's representation.
    pub fn apply_momentum_fn(&self, g: impl Fn(f64) -> Complex64) -> Result<WaveFunction> {
        let mom = self.into_representation(Representation::Momentum)?;
        let samples: Vec<Complex64> = mom
            .samples
            .iter()
            .enumerate()
            .map(|(m, c)| c * g(mom.grid.momentum(m)))
            .collect();
        let out = WaveFunction::new(mom.grid, samples, Representation::Momentum)?;
        out.into_representation(self.representation)
    }

    /// Relative mass in the outer EDGE_FRACTION of the box.
    pub fn edge_mass(&self) -> f64 {
        let pos = match self.into_representation(Representation::Position) {
            Ok(p) => p,
            Err(_) => return f64::NAN,
        };
        let g = &pos.grid;
        let width = EDGE_FRACTION * (g.x_max - g.x_min);
        let total = pos.norm_sq();
        if total == 0.0 {
            return 0.0;
        }
        let edge: f64 = pos
            .samples
            .iter()
            .enumerate()
            .filter(|(j, _)| {
                let x = g.position(*j);
                x < g.x_min + width || x > g.x_max - width
            })
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            * g.dx;
        edge / total
    }

    /// Errors if wavepacket mass near the box edges exceeds tolerance.
    pub fn check_edges(&self) -> Result<()> {
        let mass = self.edge_mass();
        if mass > EDGE_MASS_TOL {
            Err(Error::BoxOverflow { mass })
        } else {
            Ok(())
        }
    }
}

/// Conjugate-linear-in-first-slot inner product ⟨φ, ψ⟩.
pub fn inner(phi: &WaveFunction, psi: &WaveFunction) -> Result<Complex64> {
    if phi.grid != psi.grid {
        return Err(Error::GridMismatch);
    }
    if phi.representation != psi.representation {
        return Err(Error::RepresentationMismatch {
            expected: phi.representation,
            got: psi.representation,
        });
    }
    let sum: Complex64 = phi
        .samples
        .iter()
        .zip(&psi.samples)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(sum * phi.measure())
}

/// ⟨φ, Q g(P) φ⟩ when `apply_q_after` is true, ⟨φ, g(P) Q φ⟩ otherwise.
/// g is applied in momentum representation, Q by pointwise multiplication
/// in position representation.
pub fn mixed_expectation(
    phi: &WaveFunction,
    g: impl Fn(f64) -> f64,
    apply_q_after: bool,
) -> Result<Complex64> {
    let pos = phi.into_representation(Representation::Position)?;
    let result = if apply_q_after {
        let gp = apply_symbol_masked(&pos, &g)?;
        let qgp = gp.apply_position_fn(|x| Complex64::new(x, 0.0))?;
        inner(&pos, &qgp)?
    } else {
        let qp = pos.apply_position_fn(|x| Complex64::new(x, 0.0))?;
        let gqp = apply_symbol_masked(&qp, &g)?;
        inner(&pos, &gqp)?
    };
    Ok(result)
}

/// Applies a real momentum symbol, erroring if it is singular where the
/// state carries mass and zeroing bins whose mass is negligible (so that
/// symbols with isolated singularities off the support stay usable).
fn apply_symbol_masked(w: &WaveFunction, g: &impl Fn(f64) -> f64) -> Result<WaveFunction> {
    let mom = w.into_representation(Representation::Momentum)?;
    let norm_sq = mom.norm_sq().max(1e-300);
    let mut samples = Vec::with_capacity(mom.samples.len());
    for (m, c) in mom.samples.iter().enumerate() {
        let k = mom.grid.momentum(m);
        let v = g(k);
        let weight = c.norm_sqr() * mom.grid.dk;
        if v.is_finite() {
            samples.push(c * v);
        } else if weight <= 1e-13 * norm_sq {
            samples.push(Complex64::new(0.0, 0.0));
        } else {
            return Err(Error::SingularSymbol(format!(
                "g({k}) is not finite on the momentum support"
            )));
        }
    }
    let out = WaveFunction::new(mom.grid, samples, Representation::Momentum)?;
    out.into_representation(w.representation)
}
