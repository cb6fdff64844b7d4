//! Damped Newton solution of the discrete Dirichlet problems, with
//! continuation in `s` toward 1 for the Gauss case and in the ball radius `r`
//! toward 1 for the quotient case, plus Richardson extrapolation of the
//! continuation families to the degenerate limit.
//!
//! Each Newton step solves the sparse linearized system for the interior
//! unknowns (boundary nodes carry frozen Dirichlet data) and applies the
//! largest damping factor in `{1, 1/2, 1/4, ...}` that both decreases the
//! scaled residual norm and keeps `u* < 0` at every node; in the quotient
//! case a trial step that loses ellipticity is rejected the same way.

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::barrier;
use crate::error::{Error, Result};
use crate::geometry::DualField;
use crate::grid::{BallGrid, GridSpec};
use crate::linsolve::solve_sparse;
use crate::operator::{
    assemble_jacobian_rows, assemble_residual, OperatorContext, ResidualVector,
};
use crate::problem::{BoundaryData, CaseTag, ContinuationSchedule, ProblemSpec};

/// Newton iteration controls (a view into the schedule).
#[derive(Debug, Clone, Copy)]
pub struct NewtonControls {
    pub tol: f64,
    pub max_iters: usize,
    pub damping_floor: f64,
}

impl From<&ContinuationSchedule> for NewtonControls {
    fn from(s: &ContinuationSchedule) -> Self {
        NewtonControls {
            tol: s.newton_tol,
            max_iters: s.max_newton_iters,
            damping_floor: s.damping_floor,
        }
    }
}

/// Record of one continuation step.
#[derive(Debug, Clone)]
pub struct SolveStep {
    /// Parameter value (`s` or `r`).
    pub param: f64,
    pub newton_iters: usize,
    /// Scaled max-norm of the accepted residual.
    pub final_max_residual: f64,
    pub final_l2_residual: f64,
    /// Damping factor taken at each Newton iteration.
    pub damping_history: Vec<f64>,
    /// Wall time of this step; diagnostic only, never exported to artifacts.
    pub wall_time: Duration,
}

/// Full continuation record.
#[derive(Debug, Clone, Default)]
pub struct SolveTrace {
    pub steps: Vec<SolveStep>,
}

/// Extrapolated dual field at the degenerate limit.
#[derive(Debug, Clone)]
pub struct LimitField {
    pub grid: Arc<BallGrid>,
    pub values: Vec<f64>,
    /// Difference of the two most recent extrapolants, per node.
    pub error_estimate: Vec<f64>,
    /// Nodes whose parameter dependence was not monotone across the tail.
    pub nonmonotone: Vec<bool>,
    /// Parameters that entered the extrapolation.
    pub params: Vec<f64>,
}

impl LimitField {
    pub fn as_field(&self) -> DualField {
        DualField::new(self.grid.clone(), self.values.clone(), 1.0)
    }

    pub fn max_error_estimate(&self) -> f64 {
        self.error_estimate.iter().cloned().filter(|e| e.is_finite()).fold(0.0, f64::max)
    }
}

/// Dirichlet trace `phi*(theta_m)` on the boundary ring.
pub fn boundary_trace_from_phi(grid: &BallGrid, phi: &BoundaryData) -> Vec<f64> {
    grid.thetas.iter().map(|&t| phi.eval_dual(t)).collect()
}

/// Strictly convex, strictly negative initial iterate with exact boundary
/// trace: a hyperboloid-like radial core plus the harmonic extension of the
/// dual boundary data.
pub fn initial_iterate(grid: &Arc<BallGrid>, phi: &BoundaryData, s: f64) -> DualField {
    let a = (1.0 + 2.0 * phi.hessian_bound()) / s.sqrt();
    initial_iterate_scaled(grid, phi, s, a)
}

/// Initial iterate with an explicit core amplitude (the fixed-weight barrier
/// solves seed with the closed-form radial amplitude of their equation).
pub fn initial_iterate_scaled(
    grid: &Arc<BallGrid>,
    phi: &BoundaryData,
    s: f64,
    amplitude: f64,
) -> DualField {
    let a = amplitude.max(2.0 * phi.hessian_bound() / s.sqrt() + 0.1);
    let edge = ((1.0 - s * grid.radius * grid.radius) / s).sqrt();
    DualField::from_fn(grid.clone(), s, |r, th| {
        let core = -a * (((1.0 - s * r * r) / s).sqrt() - edge);
        core + phi.harmonic_extension_dual(r / grid.radius, th)
    })
}

/// One damped Newton step: solves the linearized system and returns the new
/// iterate together with the damping factor used.
pub fn newton_step(
    ctx: &OperatorContext,
    iterate: &DualField,
    residual: &ResidualVector,
    controls: &NewtonControls,
) -> Result<(DualField, f64)> {
    let grid = &ctx.grid;
    let n_int = grid.n_interior();
    let rows = assemble_jacobian_rows(ctx, iterate)?;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(n_int * 10);
    for (node, row) in rows.iter().enumerate() {
        for &(col, w) in row {
            if col < n_int {
                triplets.push((node, col, w));
            }
        }
    }
    let rhs: Vec<f64> = residual.values.iter().map(|v| -v).collect();
    let delta = solve_sparse(n_int, &triplets, &rhs)?;

    let current = residual.max_scaled();
    let mut damping = 1.0;
    while damping >= controls.damping_floor {
        let mut values = iterate.values.clone();
        for node in 0..n_int {
            values[node] += damping * delta[node];
        }
        if values[..n_int].iter().all(|&v| v < 0.0) {
            let trial = DualField::new(grid.clone(), values, iterate.param);
            if let Ok(res) = assemble_residual(ctx, &trial) {
                let norm = res.max_scaled();
                if norm < current || norm <= controls.tol {
                    return Ok((trial, damping));
                }
            }
        }
        damping *= 0.5;
    }
    Err(Error::DampingExhausted { param: ctx.param, floor: controls.damping_floor })
}

/// Newton iteration at a fixed continuation parameter. The initial iterate
/// must carry the problem's Dirichlet data on the boundary ring.
pub fn solve_fixed(
    ctx: &OperatorContext,
    init: DualField,
    controls: &NewtonControls,
) -> Result<(DualField, SolveStep)> {
    let started = Instant::now();
    let mut field = init;
    let mut history = Vec::new();
    let mut res = assemble_residual(ctx, &field)?;
    let mut iters = 0;
    while res.max_scaled() > controls.tol {
        if iters >= controls.max_iters {
            return Err(Error::NewtonDiverged {
                param: ctx.param,
                detail: format!("residual {:.3e} after {} iterations", res.max_scaled(), iters),
            });
        }
        let (next, damping) = newton_step(ctx, &field, &res, controls)?;
        field = next;
        history.push(damping);
        res = assemble_residual(ctx, &field)?;
        iters += 1;
    }
    let scale = field.max_abs().max(1.0);
    field.check_convexity(1e-7 * scale).map_err(|e| match e {
        Error::NonConvexInput { node, worst } => Error::ConvexityLost { node, value: worst },
        other => other,
    })?;
    let step = SolveStep {
        param: ctx.param,
        newton_iters: iters,
        final_max_residual: res.max_scaled(),
        final_l2_residual: res.l2(),
        damping_history: history,
        wall_time: started.elapsed(),
    };
    Ok((field, step))
}

/// Constant right-hand-side Monge-Ampere solve `sigma_n(D^2u*) = value` with
/// Dirichlet data `phi*`; used for the flat upper barrier and as the Newton
/// seed of the continuation.
pub fn solve_constant_rhs(
    grid: &Arc<BallGrid>,
    phi: &BoundaryData,
    value: f64,
    controls: &NewtonControls,
) -> Result<(DualField, SolveStep)> {
    let ctx = OperatorContext::constant_rhs(grid.clone(), value);
    let a_q = value.powf(0.5).max(2.0 * phi.hessian_bound() + 0.1);
    let init = DualField::from_fn(grid.clone(), 1.0, |r, th| {
        0.5 * a_q * (r * r - grid.radius * grid.radius)
            + phi.harmonic_extension_dual(r / grid.radius, th)
    });
    solve_fixed(&ctx, init, controls)
}

/// Solves the regularized Gauss-case family along the schedule, warm-starting
/// across `s`, and extrapolates to `s -> 1`.
///
/// The first iterate is the constant right-hand-side solution (the flat upper
/// barrier); each accepted field is strictly negative and discretely convex.
pub fn solve_gauss_dual(
    spec: &ProblemSpec,
    grid: &Arc<BallGrid>,
    schedule: &ContinuationSchedule,
) -> Result<(Vec<DualField>, LimitField, SolveTrace)> {
    solve_gauss_dual_with_init(spec, grid, schedule, None)
}

/// Gauss-case continuation with an explicit first iterate (used by the
/// uniqueness probe; `None` seeds from the constant right-hand-side solve).
pub fn solve_gauss_dual_with_init(
    spec: &ProblemSpec,
    grid: &Arc<BallGrid>,
    schedule: &ContinuationSchedule,
    init: Option<DualField>,
) -> Result<(Vec<DualField>, LimitField, SolveTrace)> {
    crate::problem::validate_spec(spec).into_result()?;
    if spec.case_tag() != CaseTag::Gauss {
        return Err(Error::ValidationError("gauss solver requires k = n".into()));
    }
    solve_gauss_family(grid, &spec.phi, spec.alpha, 1.0, schedule, init)
}

/// Continuation in `s` for the Monge-Ampere family
/// `sigma_n(D^2u*) = multiplier * h^{(alpha_eff - n - 2)/2} (-u*)^{-alpha_eff}`
/// with Dirichlet data `phi*`. This also drives the scaled problems behind the
/// quotient-case subsolutions (`alpha_eff = alpha n / k` with a folded-in
/// constant).
pub fn solve_gauss_family(
    grid: &Arc<BallGrid>,
    phi: &BoundaryData,
    alpha_eff: f64,
    multiplier: f64,
    schedule: &ContinuationSchedule,
    init: Option<DualField>,
) -> Result<(Vec<DualField>, LimitField, SolveTrace)> {
    schedule.validate()?;
    if alpha_eff > 2.0 + 1e-12 {
        return Err(Error::AlphaOutOfRange { alpha: alpha_eff, k: 2 });
    }
    let controls = NewtonControls::from(schedule);
    let mut trace = SolveTrace::default();
    let mut fields: Vec<DualField> = Vec::with_capacity(schedule.s_values.len());

    let mut warm = match init {
        Some(f) => f,
        None => {
            // seed from a flat constant-determinant solve lying above the
            // family (half the right-hand side at the center scale)
            let c0 = phi.min_on_circle();
            let seed_rhs = 0.5 * multiplier * c0.powf(-alpha_eff);
            let (u0, step) = solve_constant_rhs(grid, phi, seed_rhs, &controls)?;
            trace.steps.push(step);
            u0
        }
    };
    for &s in &schedule.s_values {
        let ctx = OperatorContext::gauss_scaled(
            grid.clone(),
            alpha_eff,
            multiplier,
            crate::operator::HWeight::Regularized { s },
        );
        let init_s = DualField::new(grid.clone(), warm.values.clone(), s);
        let (field, step) = solve_fixed(&ctx, init_s, &controls)?;
        trace.steps.push(step);
        warm = field.clone();
        fields.push(field);
    }
    let limit = extrapolate_to_limit(&fields, &schedule.s_values)?;
    Ok((fields, limit, trace))
}

/// Radial cubic interpolation of a field value at radius `r` along the ray of
/// angular slot `m` (4-point Lagrange on the ray's radial levels).
pub fn sample_along_ray(field: &DualField, r: f64, m: usize) -> f64 {
    let grid = &field.grid;
    let radii = &grid.radii;
    let n_r = grid.n_r();
    let value_at = |j: usize| -> f64 {
        if j == 0 {
            field.values[0]
        } else {
            field.values[grid.idx(j, m)]
        }
    };
    let j1 = match radii.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
        Ok(i) => i,
        Err(i) => i.saturating_sub(1),
    }
    .min(n_r - 1);
    let hi = (j1.saturating_sub(1) + 3).min(n_r);
    let lo = hi - 3;
    let mut out = 0.0;
    for j in lo..=hi {
        let mut lag = 1.0;
        for l in lo..=hi {
            if l != j {
                lag *= (r - radii[l]) / (radii[j] - radii[l]);
            }
        }
        out += lag * value_at(j);
    }
    out
}

/// Solves the quotient-case family on balls `B_r` along the schedule with
/// boundary data sampled from the Maclaurin subsolution, warm-starting across
/// `r`, and extrapolates to `r -> 1` on the final grid.
pub fn solve_quotient_dual(
    spec: &ProblemSpec,
    grid: &Arc<BallGrid>,
    schedule: &ContinuationSchedule,
) -> Result<(Vec<DualField>, LimitField, SolveTrace)> {
    crate::problem::validate_spec(spec).into_result()?;
    schedule.validate()?;
    if spec.case_tag() != CaseTag::Quotient {
        return Err(Error::ValidationError("quotient solver requires k < n".into()));
    }
    if spec.n != 2 {
        return Err(Error::ValidationError(
            "grid solves are two-dimensional; use the radial oracle for general n".into(),
        ));
    }
    let controls = NewtonControls::from(schedule);
    let mut trace = SolveTrace::default();

    // subsolution on the unit ball supplies boundary data and the first seed
    let maclaurin = barrier::maclaurin_subsolution(spec, grid, schedule)?;

    let mut fields: Vec<DualField> = Vec::new();
    let mut prev: Option<DualField> = None;
    for &r in &schedule.r_values {
        let grid_r = Arc::new(BallGrid::build(grid.spec.clone(), r)?);
        let values: Vec<f64> = (0..grid_r.n_nodes())
            .map(|node| {
                let rad = grid_r.r_of(node);
                let m = grid_r.ring_of(node).map(|(_, m)| m).unwrap_or(0);
                if grid_r.kind(node) == crate::grid::NodeKind::Boundary {
                    sample_along_ray(&maclaurin, r, m)
                } else {
                    match &prev {
                        Some(p) if rad <= p.grid.radius => sample_along_ray(p, rad, m),
                        _ => sample_along_ray(&maclaurin, rad, m),
                    }
                }
            })
            .collect();
        let init = DualField::new(grid_r.clone(), values, r);
        let ctx = OperatorContext::quotient(grid_r.clone(), spec.k, spec.alpha, 1.0);
        let (field, step) = solve_fixed(&ctx, init, &controls)?;
        trace.steps.push(step);
        prev = Some(field.clone());
        fields.push(field);
    }

    // resample every field onto the final (largest) grid before extrapolating
    let last_grid = fields.last().unwrap().grid.clone();
    let resampled: Vec<DualField> = fields
        .iter()
        .map(|f| {
            let vals: Vec<f64> = (0..last_grid.n_nodes())
                .map(|node| {
                    let rad = last_grid.r_of(node);
                    let m = last_grid.ring_of(node).map(|(_, m)| m).unwrap_or(0);
                    if rad <= f.grid.radius {
                        sample_along_ray(f, rad, m)
                    } else {
                        f64::NAN
                    }
                })
                .collect();
            DualField {
                grid: last_grid.clone(),
                values: vals,
                param: f.param,
                boundary_trace: f.boundary_trace.clone(),
            }
        })
        .collect();
    let limit = extrapolate_to_limit(&resampled, &schedule.r_values)?;
    Ok((fields, limit, trace))
}

/// Nodewise Richardson extrapolation to parameter 1, assuming first order
/// dependence on `1 - param`.
///
/// The value is the extrapolant of the last parameter pair; the error
/// estimate is its distance to the previous pair's extrapolant. Nodes with
/// non-monotone dependence across the last three fields are flagged. Nodes
/// where an earlier field is unavailable (NaN, from smaller quotient domains)
/// fall back to the last field's value with an infinite error estimate.
pub fn extrapolate_to_limit(fields: &[DualField], params: &[f64]) -> Result<LimitField> {
    if fields.len() < 3 {
        return Err(Error::InsufficientData(fields.len()));
    }
    assert_eq!(fields.len(), params.len());
    let grid = fields.last().unwrap().grid.clone();
    let n = grid.n_nodes();
    let m = fields.len();
    let (e2, e1, e0) = (1.0 - params[m - 3], 1.0 - params[m - 2], 1.0 - params[m - 1]);
    let mut values = Vec::with_capacity(n);
    let mut err = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for node in 0..n {
        let (u2, u1, u0) = (
            fields[m - 3].values[node],
            fields[m - 2].values[node],
            fields[m - 1].values[node],
        );
        if !(u2.is_finite() && u1.is_finite() && u0.is_finite()) {
            values.push(u0);
            err.push(f64::INFINITY);
            flags.push(true);
            continue;
        }
        let last = u0 + (u0 - u1) * e0 / (e1 - e0);
        let prevx = u1 + (u1 - u2) * e1 / (e2 - e1);
        values.push(last);
        err.push((last - prevx).abs());
        flags.push((u1 - u2) * (u0 - u1) < 0.0);
    }
    Ok(LimitField { grid, values, error_estimate: err, nonmonotone: flags, params: params.to_vec() })
}

/// Builds the default unit-ball grid for a spec.
pub fn default_grid(gs: &GridSpec) -> Result<Arc<BallGrid>> {
    Ok(Arc::new(BallGrid::build(gs.clone(), 1.0)?))
}
