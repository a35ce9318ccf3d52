//! Sojourn times T⁰_r / T_r, time delays τ_r / τ_r^in / τ_r^free, the
//! integral-formula evaluator and A_f expectation values, plus the r-sweep
//! harness with extrapolation.
//!
//! Free sojourns of the finite-rank model (and of any linear symbol) are
//! computed exactly: the dynamics translates the spectral density at
//! constant speed, so the time integral factorizes per grid bin into the
//! radial cumulative G(x) = ∫₀ˣ f₀.  Interacting sojourns march the split
//! step propagator and integrate by composite Simpson with a fitted
//! power-law tail.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::grid::{mixed_expectation, Representation, WaveFunction};
use crate::propagation::{free_evolve, friedrichs_evolve, wave_operator, Direction, FriedrichsModel};
use crate::stationary;
use crate::{fit, quad, DispersionRelation, Error, LocalizationFunction, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolation {
    None,
    Richardson,
    PowerFit,
}

/// Discretization policy for the r → ∞ limits: cutoff T_max = factor·r,
/// split-step dt, quadrature tolerance, and the extrapolation mode.
#[derive(Debug, Clone)]
pub struct SojournConfig {
    pub r_schedule: Vec<f64>,
    pub t_cutoff_factor: f64,
    pub dt: f64,
    pub quad_tol: f64,
    pub extrapolation: Extrapolation,
}

impl SojournConfig {
    pub fn new(r_schedule: Vec<f64>) -> Result<Self> {
        let cfg = SojournConfig {
            r_schedule,
            t_cutoff_factor: 8.0,
            dt: 0.01,
            quad_tol: 1e-8,
            extrapolation: Extrapolation::PowerFit,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.r_schedule.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Invalid("r_schedule must be strictly increasing".into()));
        }
        if self.r_schedule.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Invalid("r_schedule entries must be positive".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Invalid("dt must be positive".into()));
        }
        if !(self.t_cutoff_factor > 0.0) {
            return Err(Error::Invalid("t_cutoff_factor must be positive".into()));
        }
        if !(self.quad_tol > 0.0) {
            return Err(Error::Invalid("quad_tol must be positive".into()));
        }
        Ok(())
    }

    fn t_max(&self, r: f64) -> f64 {
        self.t_cutoff_factor * r
    }

    /// Horizon for the wave-operator limit: Cook decay is a property of
    /// the model (profile smoothness), not of the localization radius.
    fn w_op_horizon(&self) -> f64 {
        4.0 * self.t_cutoff_factor
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TimeDelays {
    pub tau_r: f64,
    pub tau_in_r: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub r: f64,
    pub t0_r: f64,
    pub t0_r_s: f64,
    pub t_r: f64,
    pub tau_r: f64,
    pub tau_in_r: f64,
    pub tail_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub extrapolated_limit: f64,
    pub extrapolation_failed: bool,
    pub ew_reference: f64,
    pub relative_gap: f64,
}

fn check_f(f: &LocalizationFunction) -> Result<()> {
    if f.dim != 1 || !f.is_radial {
        return Err(Error::Invalid(
            "sojourn functionals need a radial localization function in d = 1".into(),
        ));
    }
    Ok(())
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0) {
        return Err(Error::Invalid(format!("localization radius must be positive, got {r}")));
    }
    Ok(())
}

/// (center, mass) pairs of the spectral density in the given representation;
/// negligible bins are dropped (they cannot move the sojourn integrals).
fn density_weights(phi: &WaveFunction, rep: Representation) -> Result<Vec<(f64, f64)>> {
    let w = phi.into_representation(rep)?;
    let measure = match rep {
        Representation::Position => w.grid.dx,
        Representation::Momentum => w.grid.dk,
    };
    let norm_sq = w.norm_sq();
    let mut out = Vec::new();
    for (m, c) in w.samples.iter().enumerate() {
        let mass = c.norm_sqr() * measure;
        if mass > 1e-20 * norm_sq {
            let center = match rep {
                Representation::Position => w.grid.position(m),
                Representation::Momentum => w.grid.momentum(m),
            };
            out.push((center, mass));
        }
    }
    Ok(out)
}

/// ∫_{-T}^{T} Σ_bins mass·f((c + s·t)/r) dt for a density translating at
/// constant speed s, evaluated exactly through the radial cumulative, plus
/// the (equally exact) remainder beyond the window.  Returns the corrected
/// full-line value together with the remainder.
fn translated_sojourn(
    weights: &[(f64, f64)],
    f: &LocalizationFunction,
    r: f64,
    speed: f64,
    t_max: f64,
    quad_tol: f64,
) -> Result<(f64, f64)> {
    let g_tol = (0.01 * quad_tol).min(1e-9);
    let g_inf = f.radial_cumulative(f64::INFINITY, g_tol)?;
    let g = |x: f64| -> Result<f64> {
        if x.is_infinite() {
            return Ok(x.signum() * g_inf);
        }
        Ok(x.signum() * f.radial_cumulative(x.abs(), g_tol)?)
    };
    let mut windowed = 0.0;
    let mut full = 0.0;
    for &(c, mass) in weights {
        let lo = (c - speed * t_max) / r;
        let hi = (c + speed * t_max) / r;
        windowed += mass * (g(hi)? - g(lo)?);
        full += mass * 2.0 * g_inf;
    }
    let scale = r / speed;
    let (windowed, full) = (windowed * scale, full * scale);
    let tail = full - windowed;
    if tail.abs() > 0.1 * full.abs().max(1e-12) {
        return Err(Error::NonConvergent(format!(
            "sojourn window [-{t_max}, {t_max}] misses {:.1}% of the integral; \
             increase t_cutoff_factor",
            100.0 * tail / full
        )));
    }
    Ok((full, tail))
}

fn friedrichs_free_sojourn_with_tail(
    phi: &WaveFunction,
    f: &LocalizationFunction,
    r: f64,
    cfg: &SojournConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    check_f(f)?;
    check_r(r)?;
    let weights = density_weights(phi, Representation::Momentum)?;
    translated_sojourn(&weights, f, r, 1.0, cfg.t_max(r), cfg.quad_tol)
}

/// T⁰_r of the finite-rank model: H₀ = Q translates the momentum density
/// at unit speed through the localization operator f(P/r).
pub fn friedrichs_free_sojourn(
    phi: &WaveFunction,
    f: &LocalizationFunction,
    r: f64,
    cfg: &SojournConfig,
) -> Result<f64> {
    friedrichs_free_sojourn_with_tail(phi, f, r, cfg).map(|(v, _)| v)
}

/// Fits a power tail to the last octave of sampled integrand values and
/// returns the neglected remainder.  Vanished samples give a zero tail;
/// a fitted decay exponent ≤ 1 is a hard error.
fn tail_from_samples(ts: &[f64], ys: &[f64], norm_sq: f64) -> Result<f64> {
    let floor = 1e-15 * norm_sq.max(1e-300);
    if ys.iter().all(|&y| y.abs() < floor) {
        return Ok(0.0);
    }
    let (mut xs, mut fs) = (Vec::new(), Vec::new());
    for (&t, &y) in ts.iter().zip(ys) {
        if y > floor {
            xs.push(t);
            fs.push(y);
        }
    }
    if xs.len() < 4 {
        return Ok(0.0);
    }
    let (zeta, log_c, _r2) = fit::power_decay(&xs, &fs)?;
    if zeta <= 1.0 {
        return Err(Error::NonConvergent(format!(
            "sojourn integrand tail decays like t^-{zeta:.2}; not integrable \
             on this window, increase t_cutoff_factor"
        )));
    }
    Ok(fit::power_tail(zeta, log_c, *ts.last().unwrap()))
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// T⁰_r for a dispersive symbol: exact translation arithmetic when h is
/// linear, time quadrature of ⟨φ_t, f(Q/r) φ_t⟩ otherwise (smooth f only).
pub fn free_sojourn(
    phi: &WaveFunction,
    h: &DispersionRelation,
    f: &LocalizationFunction,
    r: f64,
    cfg: &SojournConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_f(f)?;
    check_r(r)?;
    let t_max = cfg.t_max(r);
    if let Some(v) = h.linear_velocity() {
        let weights = density_weights(phi, Representation::Position)?;
        return translated_sojourn(&weights, f, r, v.abs(), t_max, cfg.quad_tol).map(|x| x.0);
    }
    if !f.is_smooth {
        return Err(Error::Invalid(
            "dispersive sojourn quadrature needs a smooth localization function".into(),
        ));
    }
    let j = |t: f64| -> Result<f64> {
        let evolved = free_evolve(phi, h, t)?.into_representation(Representation::Position)?;
        Ok(evolved
            .samples
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm_sqr() * f.eval_radial(evolved.grid.position(k).abs() / r))
            .sum::<f64>()
            * evolved.grid.dx)
    };
    let mut captured: Option<Error> = None;
    let body = quad::adaptive_split(
        |t| match j(t) {
            Ok(v) => v,
            Err(e) => {
                captured.get_or_insert(e);
                0.0
            }
        },
        -t_max,
        t_max,
        &[0.0],
        cfg.quad_tol,
    )?;
    if let Some(e) = captured {
        return Err(e);
    }
    let norm_sq = phi.norm_sq();
    let mut tails = 0.0;
    for sign in [1.0, -1.0] {
        let ts = log_spaced(0.5 * t_max, t_max, 10);
        let ys: Vec<f64> = ts.iter().map(|&t| j(sign * t)).collect::<Result<_>>()?;
        tails += tail_from_samples(&ts, &ys, norm_sq)?;
    }
    Ok(body + tails)
}

/// ⟨ψ, f(P/r) ψ⟩ — the interacting sojourn integrand.
fn f_momentum_expectation(state: &WaveFunction, f: &LocalizationFunction, r: f64) -> Result<f64> {
    let mom = state.into_representation(Representation::Momentum)?;
    Ok(mom
        .samples
        .iter()
        .enumerate()
        .map(|(m, c)| c.norm_sqr() * f.eval_radial(mom.grid.momentum(m).abs() / r))
        .sum::<f64>()
        * mom.grid.dk)
}

fn simpson(ys: &[f64], h: f64) -> f64 {
    let n = ys.len() - 1;
    debug_assert!(n >= 2 && n % 2 == 0);
    let mut s = ys[0] + ys[n];
    for (i, y) in ys.iter().enumerate().take(n).skip(1) {
        s += y * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn full_sojourn_with_tail(
    phi: &WaveFunction,
    model: &FriedrichsModel,
    f: &LocalizationFunction,
    r: f64,
    cfg: &SojournConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    check_f(f)?;
    check_r(r)?;
    if model.is_free() {
        return friedrichs_free_sojourn_with_tail(phi, f, r, cfg);
    }
    let (psi, _) = wave_operator(phi, model, Direction::Minus, cfg.w_op_horizon(), cfg.dt)?;
    march_sojourn(&psi, model, f, r, cfg)
}

/// Simpson integration of ⟨ψ_t, f(P/r) ψ_t⟩ along the split-step
/// trajectory, both time directions, with fitted power tails.
fn march_sojourn(
    psi: &WaveFunction,
    model: &FriedrichsModel,
    f: &LocalizationFunction,
    r: f64,
    cfg: &SojournConfig,
) -> Result<(f64, f64)> {
    let t_target = cfg.t_max(r);
    // integrand samples every ≈0.05 are ample for the Simpson error; the
    // trajectory itself still advances in steps of cfg.dt
    let m = (0.05 / cfg.dt).round().max(1.0);
    let dts = m * cfg.dt;
    let mut n_samp = (t_target / dts).ceil() as usize;
    if n_samp % 2 == 1 {
        n_samp += 1;
    }
    let norm_sq = psi.norm_sq();
    let mut total = 0.0;
    let mut tails = 0.0;
    for sign in [1.0, -1.0] {
        let mut state = psi.clone();
        let mut ys = Vec::with_capacity(n_samp + 1);
        ys.push(f_momentum_expectation(&state, f, r)?);
        for _ in 0..n_samp {
            state = friedrichs_evolve(&state, model, sign * dts, cfg.dt)?;
            ys.push(f_momentum_expectation(&state, f, r)?);
        }
        total += simpson(&ys, dts);
        let lo = n_samp / 2;
        let ts: Vec<f64> = (lo..=n_samp).map(|i| i as f64 * dts).collect();
        tails += tail_from_samples(&ts, &ys[lo..], norm_sq)?;
    }
    Ok((total + tails, tails))
}

/// T_r of the finite-rank model along the interacting trajectory
/// e^{−itH} W₋ φ.
pub fn full_sojourn(
    phi: &WaveFunction,
    model: &FriedrichsModel,
    f: &LocalizationFunction,
    r: f64,
    cfg: &SojournConfig,
) -> Result<f64> {
    full_sojourn_with_tail(phi, model, f, r, cfg).map(|(v, _)| v)
}

/// Sφ by stationary multiplication: S(x)·φ(x) pointwise, in parallel.
/// Bins carrying negligible amplitude are passed through unchanged.
pub fn scattered_state(phi: &WaveFunction, model: &FriedrichsModel) -> Result<WaveFunction> {
    let pos = phi.into_representation(Representation::Position)?;
    if model.is_free() {
        return Ok(pos);
    }
    let peak = pos.samples.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let grid = pos.grid;
    let samples: Vec<Complex64> = (0..grid.n_points)
        .into_par_iter()
        .map(|j| {
            let c = pos.samples[j];
            if c.norm() <= 1e-9 * peak {
                return Ok(c);
            }
            Ok(stationary::s_matrix(model, grid.position(j))? * c)
        })
        .collect::<Result<_>>()?;
    WaveFunction::new(grid, samples, Representation::Position)
}

fn assemble_delays(t_r: f64, t0: f64, t0_s: f64) -> TimeDelays {
    TimeDelays {
        tau_r: t_r - 0.5 * (t0 + t0_s),
        tau_in_r: t_r - t0,
    }
}

/// τ_r and τ_r^in at a single radius; Sφ comes from the stationary
/// multiplication.
pub fn time_delays(
    phi: &WaveFunction,
    model: &FriedrichsModel,
    f: &LocalizationFunction,
    r: f64,
    cfg: &SojournConfig,
) -> Result<TimeDelays> {
    let s_phi = scattered_state(phi, model)?;
    let t0 = friedrichs_free_sojourn(phi, f, r, cfg)?;
    let t0_s = friedrichs_free_sojourn(&s_phi, f, r, cfg)?;
    let (t_r, _) = full_sojourn_with_tail(phi, model, f, r, cfg)?;
    Ok(assemble_delays(t_r, t0, t0_s))
}

/// ∫₀^∞ Σ mass·[f((c − s·t)/r) − f((c + s·t)/r)] dt, exact per bin;
/// shared by the integral-formula evaluators (the finite window and its
/// remainder are both closed-form, the window only gates convergence).
fn translated_commutator_integral(
    weights: &[(f64, f64)],
    f: &LocalizationFunction,
    r: f64,
    speed: f64,
    t_max: f64,
    quad_tol: f64,
) -> Result<f64> {
    let g_tol = (0.01 * quad_tol).min(1e-9);
    let g = |x: f64| -> Result<f64> { Ok(x.signum() * f.radial_cumulative(x.abs(), g_tol)?) };
    let mut windowed = 0.0;
    let mut limit = 0.0;
    for &(c, mass) in weights {
        let gc = g(c / r)?;
        windowed += mass * (2.0 * gc - g((c - speed * t_max) / r)? - g((c + speed * t_max) / r)?);
        limit += mass * 2.0 * gc;
    }
    let scale = r / speed;
    let (windowed, limit) = (windowed * scale, limit * scale);
    if (limit - windowed).abs() > 0.1 * limit.abs().max(1e-12) {
        return Err(Error::NonConvergent(format!(
            "commutator integral window [0, {t_max}] too short; increase t_cutoff_factor"
        )));
    }
    Ok(limit)
}

/// LHS of the integral formula in the finite-rank picture (H₀ = Q,
/// localization f(P/r)); converges to 2⟨φ, Pφ⟩ as r → ∞.
pub fn friedrichs_integral_formula_lhs(
    phi: &WaveFunction,
    f: &LocalizationFunction,
    r: f64,
    cfg: &SojournConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_f(f)?;
    check_r(r)?;
    let weights = density_weights(phi, Representation::Momentum)?;
    translated_commutator_integral(&weights, f, r, 1.0, cfg.t_max(r), cfg.quad_tol)
}

/// ∫₀^T_max dt ⟨φ, [e^{ith(P)} f(Q/r) e^{−ith(P)} − e^{−ith(P)} f(Q/r)
/// e^{ith(P)}] φ⟩ with tail control; converges to ⟨φ, A_f φ⟩ as r → ∞.
pub fn integral_formula_lhs(
    phi: &WaveFunction,
    h: &DispersionRelation,
    f: &LocalizationFunction,
    r: f64,
    cfg: &SojournConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_f(f)?;
    check_r(r)?;
    let t_max = cfg.t_max(r);
    if let Some(v) = h.linear_velocity() {
        // the density translates at speed v: the commutator integral has
        // the same closed form as the Friedrichs picture up to the sign
        // and scale carried by v
        let weights = density_weights(phi, Representation::Position)?;
        let value =
            translated_commutator_integral(&weights, f, r, v.abs(), t_max, cfg.quad_tol)?;
        return Ok(-v.signum() * value);
    }
    if !f.is_smooth {
        return Err(Error::Invalid(
            "integral-formula quadrature needs a smooth localization function".into(),
        ));
    }
    let j = |t: f64| -> Result<f64> {
        let evolved = free_evolve(phi, h, t)?.into_representation(Representation::Position)?;
        Ok(evolved
            .samples
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm_sqr() * f.eval_radial(evolved.grid.position(k).abs() / r))
            .sum::<f64>()
            * evolved.grid.dx)
    };
    let d = |t: f64| -> Result<f64> { Ok(j(t)? - j(-t)?) };
    let mut captured: Option<Error> = None;
    let body = quad::adaptive_split(
        |t| match d(t) {
            Ok(v) => v,
            Err(e) => {
                captured.get_or_insert(e);
                0.0
            }
        },
        0.0,
        t_max,
        &[0.25 * t_max, 0.5 * t_max],
        cfg.quad_tol,
    )?;
    if let Some(e) = captured {
        return Err(e);
    }
    // the difference integrand has no sign, so the fitted tail only gates
    // convergence; it is never added
    let ts = log_spaced(0.5 * t_max, t_max, 10);
    let ys: Vec<f64> = ts.iter().map(|&t| Ok(d(t)?.abs())).collect::<Result<_>>()?;
    let bound = tail_from_samples(&ts, &ys, phi.norm_sq())?;
    if bound > (10.0 * cfg.quad_tol).max(1e-3 * body.abs()) {
        return Err(Error::NonConvergent(format!(
            "integral-formula tail bound {bound:.3e} too large; increase t_cutoff_factor"
        )));
    }
    Ok(body)
}

/// ⟨φ, A_f φ⟩ = 2·Re⟨φ, Q·R_f′(h′(P)) φ⟩; radial f gives the closed form
/// R_f′(x) = −1/x, so the symbol is −1/h′(p).
pub fn a_f_expectation(
    phi: &WaveFunction,
    h: &DispersionRelation,
    f: &LocalizationFunction,
) -> Result<f64> {
    check_f(f)?;
    let val = mixed_expectation(phi, |p| -1.0 / h.h_prime(p), true)?;
    Ok(2.0 * val.re)
}

/// τ_r^free: the half commutator integral ½∫₀^∞⟨φ, S*[K_f(t), S]φ⟩ dt,
/// evaluated exactly through the translated densities of φ and Sφ.
pub fn tau_free(
    phi: &WaveFunction,
    model: &FriedrichsModel,
    f: &LocalizationFunction,
    r: f64,
    cfg: &SojournConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_f(f)?;
    check_r(r)?;
    if model.is_free() {
        return Ok(0.0);
    }
    let s_phi = scattered_state(phi, model)?;
    let w = density_weights(phi, Representation::Momentum)?;
    let w_s = density_weights(&s_phi, Representation::Momentum)?;
    let t_max = cfg.t_max(r);
    // ∫₀^∞ [I_ψ(t) − I_ψ(−t)] dt = 2r Σ mass·G(k/r) per state
    let half = |weights: &[(f64, f64)]| -> Result<f64> {
        translated_commutator_integral(weights, f, r, 1.0, t_max, cfg.quad_tol)
    };
    Ok(0.5 * (half(&w_s)? - half(&w)?))
}

fn sweep_row(
    phi: &WaveFunction,
    s_phi: &WaveFunction,
    psi_minus: &WaveFunction,
    model: &FriedrichsModel,
    f: &LocalizationFunction,
    r: f64,
    cfg: &SojournConfig,
) -> Result<SweepRow> {
    let t0 = friedrichs_free_sojourn(phi, f, r, cfg)?;
    let t0_s = friedrichs_free_sojourn(s_phi, f, r, cfg)?;
    let (t_r, tail) = if model.is_free() {
        friedrichs_free_sojourn_with_tail(phi, f, r, cfg)?
    } else {
        march_sojourn(psi_minus, model, f, r, cfg)?
    };
    let delays = assemble_delays(t_r, t0, t0_s);
    Ok(SweepRow {
        r,
        t0_r: t0,
        t0_r_s: t0_s,
        t_r,
        tau_r: delays.tau_r,
        tau_in_r: delays.tau_in_r,
        tail_estimate: tail,
    })
}

/// Runs the r-schedule (rows in parallel), extrapolates τ_r, and attaches
/// the stationary Eisenbud–Wigner reference.
pub fn sweep(
    phi: &WaveFunction,
    model: &FriedrichsModel,
    f: &LocalizationFunction,
    cfg: &SojournConfig,
) -> Result<SweepReport> {
    cfg.validate()?;
    check_f(f)?;
    if cfg.r_schedule.is_empty() {
        return Err(Error::Invalid("sweep needs a non-empty r_schedule".into()));
    }
    let s_phi = scattered_state(phi, model)?;
    let psi_minus = if model.is_free() {
        phi.into_representation(Representation::Position)?
    } else {
        wave_operator(phi, model, Direction::Minus, cfg.w_op_horizon(), cfg.dt)?.0
    };
    let rows: Vec<SweepRow> = cfg
        .r_schedule
        .par_iter()
        .map(|&r| sweep_row(phi, &s_phi, &psi_minus, model, f, r, cfg))
        .collect::<Result<_>>()?;

    let taus: Vec<f64> = rows.iter().map(|row| row.tau_r).collect();
    let rs: Vec<f64> = rows.iter().map(|row| row.r).collect();
    let last = *taus.last().unwrap();
    let spread = taus.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - taus.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let scale = taus.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    // schedules that have already converged to well below any modelable
    // decay leave nothing for the extrapolator to fit
    let (extrapolated_limit, extrapolation_failed) = if spread <= 1e-5 * scale.max(1e-9) {
        (last, false)
    } else {
        match cfg.extrapolation {
            Extrapolation::None => (last, false),
            Extrapolation::Richardson => {
                let n = rs.len();
                if n < 3 {
                    (last, true)
                } else {
                    match fit::richardson(&rs[n - 3..], &taus[n - 3..]) {
                        Ok(v) => (v, false),
                        Err(_) => (last, true),
                    }
                }
            }
            Extrapolation::PowerFit => {
                let n = rs.len();
                if n < 3 {
                    (last, true)
                } else {
                    let k = n - n.min(4);
                    match fit::power_extrapolate(&rs[k..], &taus[k..]) {
                        Ok(p) if p.exponent > 0.0 => (p.limit, false),
                        _ => (last, true),
                    }
                }
            }
        }
    };
    let ew_reference = if model.is_free() {
        0.0
    } else {
        stationary::ew_time_delay(model, phi)?
    };
    let relative_gap = (extrapolated_limit - ew_reference).abs() / ew_reference.abs().max(1e-12);
    Ok(SweepReport {
        rows,
        extrapolated_limit,
        extrapolation_failed,
        ew_reference,
        relative_gap,
    })
}
