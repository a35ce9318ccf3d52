//! The five experiments: each consumes a validated config and produces a
//! CSV table, pass/fail checks with measured values, free-form details for
//! the JSON summary, and a convergence plot.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sojourn_core::grid::Representation;
use sojourn_core::{fit, propagation, sojourn, stationary};
use sojourn_core::{Error, WaveFunction};

use crate::config::{Experiment, ExperimentConfig, SchemaError};
use crate::plot::{PlotSpec, Series};
use crate::report::{num, Check, Table};

/// A failed run, tagged with the exit-code class it belongs to.
#[derive(Debug)]
pub enum RunError {
    Schema(SchemaError),
    /// quadrature, extrapolation, or propagation did not converge
    Numerical { stage: &'static str, message: String },
    Internal(String),
}

impl From<SchemaError> for RunError {
    fn from(e: SchemaError) -> Self {
        RunError::Schema(e)
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Schema(e) => write!(f, "config error at {e}"),
            RunError::Numerical { stage, message } => {
                write!(f, "did not converge during {stage}: {message}")
            }
            RunError::Internal(m) => write!(f, "{m}"),
        }
    }
}

/// Maps a core error to the exit-code class: non-convergence and box
/// overflow are numerical (exit 3), the rest indicate a bad setup.
fn stage<T>(name: &'static str, result: sojourn_core::Result<T>) -> Result<T, RunError> {
    result.map_err(|e| match e {
        Error::NonConvergent(_) | Error::BoxOverflow { .. } => RunError::Numerical {
            stage: name,
            message: e.to_string(),
        },
        other => RunError::Internal(format!("{name}: {other}")),
    })
}

pub struct ExperimentOutput {
    pub table: Table,
    pub checks: Vec<Check>,
    pub details: serde_json::Map<String, serde_json::Value>,
    pub plot: PlotSpec,
}

pub fn run(config: &ExperimentConfig, seed: u64) -> Result<ExperimentOutput, RunError> {
    config.validate()?;
    match config.experiment {
        Experiment::LocalizationProperties => localization_properties(config, seed),
        Experiment::IntegralFormula => integral_formula(config),
        Experiment::FriedrichsTimeDelay => friedrichs_time_delay(config),
        Experiment::StationaryTrace => stationary_trace(config),
        Experiment::WaveOperatorDecay => wave_operator_decay(config),
    }
}

/// ⟨φ, Pφ⟩ from the momentum density.
fn momentum_expectation(phi: &WaveFunction) -> Result<f64, RunError> {
    let mom = stage("momentum transform", phi.into_representation(Representation::Momentum))?;
    Ok(mom
        .samples
        .iter()
        .enumerate()
        .map(|(m, c)| mom.grid.momentum(m) * c.norm_sqr())
        .sum::<f64>()
        * mom.grid.dk)
}

/// Scaling identities of the localization kernels at seeded random points:
/// x·∇R_f(x) = −1, R_f(tx) = R_f(x) − ln t, and t·F_f(tx) = F_f(x).
fn localization_properties(config: &ExperimentConfig, seed: u64) -> Result<ExperimentOutput, RunError> {
    let props = &config.properties;
    let tol = props.quad_tol;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut rows = Vec::new();
    let mut worst_euler = 0.0_f64;
    let mut worst_log_shift = 0.0_f64;
    let mut worst_homogeneity = 0.0_f64;
    let mut err_series = Vec::new();

    for dim in 1..=props.max_dim {
        let f = config.localization(dim)?;
        for sample in 0..props.samples {
            // stay away from the origin, where R_f diverges logarithmically
            let x: Vec<f64> = loop {
                let candidate: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
                if candidate.iter().map(|c| c * c).sum::<f64>().sqrt() > 0.3 {
                    break candidate;
                }
            };
            let t: f64 = rng.gen_range(0.5..2.0);
            let tx: Vec<f64> = x.iter().map(|c| t * c).collect();

            let r_f = stage("R_f quadrature", f.r_f(&x, tol))?;
            let r_f_t = stage("R_f quadrature", f.r_f(&tx, tol))?;
            let grad = stage("R_f gradient quadrature", f.r_f_grad(&x, tol))?;
            let f_f = stage("F_f quadrature", f.f_f(&x, tol))?;
            let f_f_t = stage("F_f quadrature", f.f_f(&tx, tol))?;

            let euler = x.iter().zip(&grad).map(|(c, g)| c * g).sum::<f64>() + 1.0;
            let log_shift = r_f_t - (r_f - t.ln());
            let homogeneity = t * f_f_t - f_f;

            worst_euler = worst_euler.max(euler.abs());
            worst_log_shift = worst_log_shift.max(log_shift.abs());
            worst_homogeneity = worst_homogeneity.max(homogeneity.abs());
            let row_index = rows.len();
            err_series.push((
                (row_index + 1) as f64,
                euler.abs().max(log_shift.abs()).max(homogeneity.abs()),
            ));
            rows.push(vec![
                dim.to_string(),
                sample.to_string(),
                num(x.iter().map(|c| c * c).sum::<f64>().sqrt()),
                num(t),
                num(euler.abs()),
                num(log_shift.abs()),
                num(homogeneity.abs()),
            ]);
        }
    }

    let tolerance = 1e-6;
    let checks = vec![
        Check::residual("euler_identity_worst", worst_euler, tolerance),
        Check::residual("log_shift_worst", worst_log_shift, tolerance),
        Check::residual("homogeneity_worst", worst_homogeneity, tolerance),
    ];
    let mut details = serde_json::Map::new();
    details.insert("samples_checked".into(), json!(rows.len()));

    Ok(ExperimentOutput {
        table: Table {
            schema: "sojourn-cli/localization_properties v1",
            columns: vec![
                "dim",
                "sample",
                "x_norm",
                "scale_t",
                "err_euler",
                "err_log_shift",
                "err_homogeneity",
            ],
            rows,
        },
        checks,
        details,
        plot: PlotSpec {
            title: "Localization identity residuals".into(),
            x_label: "sample".into(),
            y_label: "worst residual".into(),
            log_x: false,
            log_y: true,
            series: vec![Series {
                label: "max of the three residuals".into(),
                points: err_series,
            }],
            reference: Some((1e-6, "tolerance".into())),
        },
    })
}

/// ∫₀^∞⟨φ, [e^{itH₀}f(Q/r)e^{−itH₀} − e^{−itH₀}f(Q/r)e^{itH₀}]φ⟩dt against
/// its r → ∞ limit ⟨φ, A_f φ⟩ (or 2⟨φ, Pφ⟩ in the finite-rank picture).
fn integral_formula(config: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let grid = config.grid()?;
    let phi = config.state(grid)?;
    let f = config.localization(1)?;
    let cfg = config.sojourn()?;
    let dispersion = config.dispersion()?;

    let (limit, limit_name) = match &dispersion {
        Some(h) => (
            stage("A_f expectation", sojourn::a_f_expectation(&phi, h, &f))?,
            "a_f_expectation",
        ),
        None => (2.0 * momentum_expectation(&phi)?, "two_momentum_expectation"),
    };

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for &r in &cfg.r_schedule {
        let lhs = match &dispersion {
            Some(h) => stage(
                "integral-formula quadrature",
                sojourn::integral_formula_lhs(&phi, h, &f, r, &cfg),
            )?,
            None => stage(
                "integral-formula quadrature",
                sojourn::friedrichs_integral_formula_lhs(&phi, &f, r, &cfg),
            )?,
        };
        let abs_error = (lhs - limit).abs();
        let rel_error = abs_error / limit.abs().max(1e-12);
        errors.push((r, rel_error));
        rows.push(vec![num(r), num(lhs), num(limit), num(abs_error), num(rel_error)]);
    }

    let first = errors.first().map(|e| e.1).unwrap_or(0.0);
    let last = errors.last().map(|e| e.1).unwrap_or(0.0);
    let checks = vec![
        Check::residual("final_relative_error", last, 0.05),
        Check {
            name: "error_decreases_along_schedule".into(),
            measured: last - first,
            tolerance: 0.0,
            pass: errors.len() < 2 || last <= first,
        },
    ];
    let mut details = serde_json::Map::new();
    details.insert("limit".into(), json!(limit));
    details.insert("limit_kind".into(), json!(limit_name));

    Ok(ExperimentOutput {
        table: Table {
            schema: "sojourn-cli/integral_formula v1",
            columns: vec!["r", "lhs", "limit", "abs_error", "rel_error"],
            rows,
        },
        checks,
        details,
        plot: PlotSpec {
            title: "Integral formula convergence".into(),
            x_label: "r".into(),
            y_label: "relative error".into(),
            log_x: true,
            log_y: true,
            series: vec![Series {
                label: "|LHS(r) - limit| / |limit|".into(),
                points: errors,
            }],
            reference: Some((0.05, "tolerance".into())),
        },
    })
}

/// The r-sweep of sojourn times and time delays, extrapolated and compared
/// against the stationary Eisenbud–Wigner value.
fn friedrichs_time_delay(config: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let grid = config.grid()?;
    let phi = config.state(grid)?;
    let f = config.localization(1)?;
    let cfg = config.sojourn()?;
    let model = config.model(&grid)?;

    let report = stage("sojourn sweep", sojourn::sweep(&phi, &model, &f, &cfg))?;
    if report.extrapolation_failed {
        return Err(RunError::Numerical {
            stage: "extrapolation",
            message: format!(
                "tau_r extrapolation failed on schedule {:?}; extend r_schedule or \
                 relax the extrapolation mode",
                cfg.r_schedule
            ),
        });
    }

    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|row| {
            vec![
                num(row.r),
                num(row.t0_r),
                num(row.t0_r_s),
                num(row.t_r),
                num(row.tau_r),
                num(row.tau_in_r),
                num(row.tail_estimate),
            ]
        })
        .collect();

    let checks = vec![Check::residual(
        "relative_gap_to_eisenbud_wigner",
        report.relative_gap,
        0.05,
    )];
    let mut details = serde_json::Map::new();
    details.insert("extrapolated_limit".into(), json!(report.extrapolated_limit));
    details.insert("ew_reference".into(), json!(report.ew_reference));
    details.insert("relative_gap".into(), json!(report.relative_gap));

    let tau_points: Vec<(f64, f64)> = report.rows.iter().map(|row| (1.0 / row.r, row.tau_r)).collect();
    let tau_in_points: Vec<(f64, f64)> =
        report.rows.iter().map(|row| (1.0 / row.r, row.tau_in_r)).collect();

    Ok(ExperimentOutput {
        table: Table {
            schema: "sojourn-cli/friedrichs_time_delay v1",
            columns: vec!["r", "t0_r", "t0_r_s", "t_r", "tau_r", "tau_in_r", "tail_estimate"],
            rows,
        },
        checks,
        details,
        plot: PlotSpec {
            title: "Time delay vs localization radius".into(),
            x_label: "1 / r".into(),
            y_label: "delay".into(),
            log_x: false,
            log_y: false,
            series: vec![
                Series {
                    label: "tau_r (symmetrized)".into(),
                    points: tau_points,
                },
                Series {
                    label: "tau_r^in".into(),
                    points: tau_in_points,
                },
            ],
            reference: Some((report.ew_reference, "Eisenbud-Wigner".into())),
        },
    })
}

/// S(x) and the Eisenbud–Wigner kernel −i S̄S′ along an energy grid.
fn stationary_trace(config: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let grid = config.grid()?;
    let model = config.model(&grid)?;
    let spec = &config.trace;

    let xs: Vec<f64> = (0..spec.n_points)
        .map(|i| spec.x_min + (spec.x_max - spec.x_min) * i as f64 / (spec.n_points - 1) as f64)
        .collect();
    let trace = stage(
        "scattering trace",
        stationary::ew_kernel(&model, &xs, spec.derivative_step),
    )?;

    let mut rows = Vec::new();
    let mut kernel_points = Vec::new();
    let mut worst_unitarity = 0.0_f64;
    for ((&x, s), &kernel) in trace.x_grid.iter().zip(&trace.s_values).zip(&trace.ew_kernel) {
        worst_unitarity = worst_unitarity.max((s.norm() - 1.0).abs());
        kernel_points.push((x, kernel));
        rows.push(vec![num(x), num(s.re), num(s.im), num(s.norm()), num(kernel)]);
    }

    let mut checks = vec![Check::residual("unitarity_defect_worst", worst_unitarity, 1e-8)];
    let mut details = serde_json::Map::new();
    details.insert("excluded_points".into(), json!(trace.excluded_points));
    if config.state.is_some() {
        let phi = config.state(grid)?;
        let delay = stage("Eisenbud-Wigner quadrature", stationary::ew_time_delay(&model, &phi))?;
        details.insert("ew_time_delay".into(), json!(delay));
    }
    if model.is_free() {
        let worst_kernel = kernel_points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        checks.push(Check::residual("free_kernel_vanishes", worst_kernel, 1e-10));
    }

    Ok(ExperimentOutput {
        table: Table {
            schema: "sojourn-cli/stationary_trace v1",
            columns: vec!["x", "re_s", "im_s", "abs_s", "ew_kernel"],
            rows,
        },
        checks,
        details,
        plot: PlotSpec {
            title: "Eisenbud-Wigner kernel".into(),
            x_label: "energy x".into(),
            y_label: "-i conj(S) S'".into(),
            log_x: false,
            log_y: false,
            series: vec![Series {
                label: "ew_kernel".into(),
                points: kernel_points,
            }],
            reference: None,
        },
    })
}

/// Cook-method integrand ‖V e^{−iτH₀}φ‖ on a log-spaced τ grid, with the
/// fitted decay exponent that certifies wave-operator convergence.
fn wave_operator_decay(config: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let grid = config.grid()?;
    let phi = config.state(grid)?;
    let model = config.model(&grid)?;
    let spec = &config.decay;

    let taus: Vec<f64> = (0..spec.n_samples)
        .map(|i| {
            spec.tau_min
                * (spec.tau_max / spec.tau_min).powf(i as f64 / (spec.n_samples - 1) as f64)
        })
        .collect();
    let norms = stage(
        "Cook decay sampling",
        propagation::cook_decay_samples(&phi, &model, &taus),
    )?;

    let (zeta, log_c, r2_power) =
        stage("power-law fit", fit::power_decay(&taus, &norms))?;
    let r2_exponential = fit::exponential_decay(&taus, &norms)
        .map(|(_, _, r2)| r2)
        .unwrap_or(0.0);

    let rows: Vec<Vec<String>> = taus
        .iter()
        .zip(&norms)
        .map(|(&tau, &n)| vec![num(tau), num(n)])
        .collect();

    let checks = vec![
        Check::at_least("decay_exponent_zeta", zeta, 1.0 + 1e-9),
        Check::at_least("fit_r_squared", r2_power.max(r2_exponential), 0.99),
    ];
    let mut details = serde_json::Map::new();
    details.insert("zeta".into(), json!(zeta));
    details.insert("r2_power".into(), json!(r2_power));
    details.insert("r2_exponential".into(), json!(r2_exponential));

    let data_points: Vec<(f64, f64)> = taus.iter().cloned().zip(norms.iter().cloned()).collect();
    let fit_points: Vec<(f64, f64)> = taus
        .iter()
        .map(|&tau| (tau, (log_c - zeta * tau.ln()).exp()))
        .collect();

    Ok(ExperimentOutput {
        table: Table {
            schema: "sojourn-cli/wave_operator_decay v1",
            columns: vec!["tau", "cook_norm"],
            rows,
        },
        checks,
        details,
        plot: PlotSpec {
            title: "Cook integrand decay".into(),
            x_label: "tau".into(),
            y_label: "||V exp(-i tau H0) phi||".into(),
            log_x: true,
            log_y: true,
            series: vec![
                Series {
                    label: "measured".into(),
                    points: data_points,
                },
                Series {
                    label: format!("power fit, zeta = {zeta:.2}"),
                    points: fit_points,
                },
            ],
            reference: None,
        },
    })
}
