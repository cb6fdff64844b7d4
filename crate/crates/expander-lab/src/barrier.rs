//! The named comparison barriers: the fixed-weight subsolution, the flat
//! constant-determinant upper barrier, the log-log supersolution with its
//! smoothing blend and scaling, the boundary gradient barrier, the affine
//! touching barriers, and the quotient-case Maclaurin subsolution and
//! constant-curvature supersolution.
//!
//! Sign conventions on the dual side: a larger right-hand side pushes a
//! convex solution down, so "subsolution" means `operator >= rhs` (lies
//! below) and "supersolution" means `operator <= rhs` (lies above).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::DualField;
use crate::grid::BallGrid;
use crate::operator::{assemble_residual, HWeight, OperatorContext};
use crate::problem::{ContinuationSchedule, ProblemSpec};
use crate::radial::binomial;
use crate::solver::{
    boundary_trace_from_phi, initial_iterate_scaled, solve_constant_rhs, solve_fixed,
    solve_gauss_family, NewtonControls, SolveStep,
};

/// Gauss-case barrier pair with the constants that produced it.
#[derive(Debug, Clone)]
pub struct GaussBarrierSet {
    /// Steep lower barrier, solved with the exact `(1 - |xi|^2)` weight.
    pub ubar: DualField,
    /// Flat constant-determinant upper barrier.
    pub u0: DualField,
    /// `K` in the fixed-weight equation (default `C0^alpha`).
    pub k_const: f64,
    /// `C1` in the constant equation (default `2 (-min ubar)^alpha`).
    pub c1: f64,
    /// `C0 = min phi > 0`.
    pub c0: f64,
}

/// Quotient-case barrier pair.
#[derive(Debug, Clone)]
pub struct QuotientBarrierSet {
    /// Maclaurin subsolution (above the solutions on the dual side's flip:
    /// `const_super < u^{r*} < maclaurin`).
    pub maclaurin: DualField,
    /// Constant-curvature supersolution (below on the dual side).
    pub const_super: DualField,
    pub c0: f64,
}

/// Solves the fixed-weight problem
/// `sigma_n(D^2u*) = (1/K) h^{-(n+2)/2}` with boundary `phi*`: first along the
/// regularized schedule, then polished with the exact weight so the returned
/// field is a genuine discrete solution of the target problem (which makes the
/// nodewise comparison against the continuation fields exact).
pub fn solve_ubar_star(
    spec: &ProblemSpec,
    grid: &Arc<BallGrid>,
    k_const: f64,
    schedule: &ContinuationSchedule,
) -> Result<DualField> {
    let c0 = spec.c0();
    if k_const > c0.powf(spec.alpha) + 1e-12 {
        return Err(Error::BadConstant(format!(
            "K = {k_const} exceeds C0^alpha = {}",
            c0.powf(spec.alpha)
        )));
    }
    let controls = NewtonControls::from(schedule);
    let k_inv = 1.0 / k_const;
    // warm start with the closed-form radial core of the regularized problem
    let mut warm = {
        let s0 = schedule.s_values.first().copied().unwrap_or(0.5);
        let amp = (k_inv / s0).sqrt();
        initial_iterate_scaled(grid, &spec.phi, s0, amp)
    };
    for &s in &schedule.s_values {
        let ctx = OperatorContext::fixed_weight(grid.clone(), k_inv, HWeight::Regularized { s });
        let init = DualField::new(grid.clone(), warm.values.clone(), s);
        let (field, _) = solve_fixed(&ctx, init, &controls)?;
        warm = field;
    }
    let ctx = OperatorContext::fixed_weight(grid.clone(), k_inv, HWeight::Exact);
    let init = DualField::new(grid.clone(), warm.values.clone(), 1.0);
    let (field, _) = solve_fixed(&ctx, init, &controls)?;
    Ok(field)
}

/// Solves the constant-determinant problem `sigma_n(D^2u*) = 1/C1` with
/// boundary `phi*`.
pub fn solve_u0_star(
    spec: &ProblemSpec,
    grid: &Arc<BallGrid>,
    c1: f64,
    schedule: &ContinuationSchedule,
) -> Result<DualField> {
    if c1 <= 0.0 {
        return Err(Error::BadConstant(format!("C1 = {c1} must be positive")));
    }
    let controls = NewtonControls::from(schedule);
    let (field, _): (DualField, SolveStep) =
        solve_constant_rhs(grid, &spec.phi, 1.0 / c1, &controls)?;
    Ok(field)
}

/// Builds the Gauss-case barrier pair with the default constants
/// `K = C0^alpha` and `C1 = 2 (-min ubar)^alpha`, checking the admissibility
/// condition `1/C1 < 1/(-min ubar)^alpha`.
pub fn gauss_barrier_set(
    spec: &ProblemSpec,
    grid: &Arc<BallGrid>,
    schedule: &ContinuationSchedule,
) -> Result<GaussBarrierSet> {
    let c0 = spec.c0();
    let k_const = c0.powf(spec.alpha);
    let ubar = solve_ubar_star(spec, grid, k_const, schedule)?;
    let min_ubar = ubar.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let c1 = 2.0 * (-min_ubar).powf(spec.alpha);
    if 1.0 / c1 >= (-min_ubar).powf(-spec.alpha) {
        return Err(Error::BadConstant(format!(
            "1/C1 = {} not below (-min ubar)^-alpha = {}",
            1.0 / c1,
            (-min_ubar).powf(-spec.alpha)
        )));
    }
    let u0 = solve_u0_star(spec, grid, c1, schedule)?;
    Ok(GaussBarrierSet { ubar, u0, k_const, c1, c0 })
}

/// The log-log supersolution `rho * Phi(h)` of the regularized problem, with
/// its blend parameters.
#[derive(Debug, Clone)]
pub struct SuperSolution {
    pub grid: Arc<BallGrid>,
    /// Scaling returned by the admissibility search.
    pub rho: f64,
    /// Largest scaling that remains a discrete supersolution.
    pub rho_max: f64,
    pub delta0: f64,
    pub s: f64,
    /// `rho * Phi` sampled on the grid.
    pub field: DualField,
}

/// `g1(h) = -h log|log h|`, the boundary-layer core (valid for `h < 1/e`).
pub fn g1(h: f64) -> f64 {
    -h * h.ln().abs().ln()
}

/// `g1'(h) = -log|log h| + 1/|log h|`.
pub fn g1_deriv(h: f64) -> f64 {
    let l = h.ln().abs();
    -l.ln() + 1.0 / l
}

/// `g1''(h) = (1 + 1/|log h|) / (h |log h|)`.
pub fn g1_second(h: f64) -> f64 {
    let l = h.ln().abs();
    (1.0 + 1.0 / l) / (h * l)
}

/// Closed-form determinant of `D^2 g1(h(xi))` at radius `r` (n = 2):
/// `s^n (2 log|log h| - 2/|log h|)^{n-1} [(same) + 4 s r^2 (1 + 1/|log h|)/(h |log h|)]`.
pub fn g1_hessian_det(s: f64, r: f64) -> f64 {
    let h = 1.0 - s * r * r;
    let l = h.ln().abs();
    let base = 2.0 * l.ln() - 2.0 / l;
    s * s * base * (base + 4.0 * s * r * r * (1.0 + 1.0 / l) / (h * l))
}

/// Normalized C^2 bump `(35/32w) (1 - (t/w)^2)^3` on `[-w, w]`.
fn bump(t: f64, w: f64) -> f64 {
    let x = t / w;
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - x * x;
    35.0 / (32.0 * w) * q * q * q
}

/// Composite Simpson quadrature of `f` on `[a, b]` with `2m` panels.
fn simpson(a: f64, b: f64, m: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = 2 * m;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

impl SuperSolution {
    /// `Phi(h)`: `g1` in the boundary layer, the flat quadratic `g2` inside,
    /// and the mollification of the glued function over a C^2 bump of width
    /// `delta0/2` in between. Averaging the shifted glue keeps the blend both
    /// C^2 and convex as a function of `xi` (each shift is convex), which a
    /// two-point Hermite blend does not.
    pub fn phi_of_h(&self, h: f64) -> f64 {
        self.phi_and_deriv(h).0
    }

    pub fn phi_deriv(&self, h: f64) -> f64 {
        self.phi_and_deriv(h).1
    }

    fn g2_value(&self, h: f64) -> f64 {
        (self.delta0 - h) / (2.0 * self.s) - self.delta0 * self.delta0.ln().abs().ln()
    }

    /// The continuous glue `g` and its derivative.
    fn glue(&self, y: f64) -> (f64, f64) {
        if y < self.delta0 {
            (g1(y), g1_deriv(y))
        } else {
            (self.g2_value(y), -1.0 / (2.0 * self.s))
        }
    }

    fn phi_and_deriv(&self, h: f64) -> (f64, f64) {
        let d0 = self.delta0;
        let w = 0.5 * d0;
        if h <= d0 - w {
            (g1(h), g1_deriv(h))
        } else if h >= d0 + w {
            (self.g2_value(h), -1.0 / (2.0 * self.s))
        } else {
            // split the average at the glue point y = delta0, i.e. tau = h - delta0
            let split = h - d0;
            let val = |lo: f64, hi: f64| {
                simpson(lo, hi, 24, |t| self.glue(h - t).0 * bump(t, w))
            };
            let der = |lo: f64, hi: f64| {
                simpson(lo, hi, 24, |t| self.glue(h - t).1 * bump(t, w))
            };
            (val(-w, split) + val(split, w), der(-w, split) + der(split, w))
        }
    }

    /// `|D(rho Phi)|` at radius `r`: `rho |Phi'(h)| * 2 s r`.
    pub fn grad_norm_at_radius(&self, r: f64) -> f64 {
        let h = 1.0 - self.s * r * r;
        self.rho * self.phi_and_deriv(h).1.abs() * 2.0 * self.s * r
    }
}

/// Builds the supersolution `rho * Phi` for the regularized problem at `s`.
///
/// `rho` is found by bisection in `[1, 2^16]` as the smallest scaling that
/// makes the field a discrete supersolution (`operator <= rhs` at every
/// interior node, with the right-hand side evaluated at the barrier's own
/// values); since the defect grows monotonically with `rho`, this is 1
/// whenever 1 is admissible. The largest admissible scaling is also reported.
pub fn build_supersolution(
    spec: &ProblemSpec,
    grid: &Arc<BallGrid>,
    s: f64,
    delta0: f64,
) -> Result<SuperSolution> {
    if !(0.0 < delta0 && delta0 <= 0.2) {
        return Err(Error::BadConstant(format!("delta0 = {delta0} outside (0, 0.2]")));
    }
    if !(0.5..1.0).contains(&s) {
        return Err(Error::BadConstant(format!("s = {s} outside [1/2, 1)")));
    }
    let proto = SuperSolution {
        grid: grid.clone(),
        rho: 1.0,
        rho_max: 1.0,
        delta0,
        s,
        field: DualField::from_fn(grid.clone(), s, |_, _| -1.0),
    };
    let ctx = OperatorContext::gauss(grid.clone(), spec.alpha, s);
    let admissible = |rho: f64| -> (bool, usize, f64) {
        let field = DualField::from_fn(grid.clone(), s, |r, _| {
            rho * proto.phi_and_deriv(1.0 - s * r * r).0
        });
        match assemble_residual(&ctx, &field) {
            Ok(res) => {
                let mut worst = (0usize, f64::NEG_INFINITY);
                for node in 0..grid.n_interior() {
                    if res.values[node] > worst.1 {
                        worst = (node, res.values[node]);
                    }
                }
                (worst.1 <= 0.0, worst.0, worst.1)
            }
            Err(_) => (false, 0, f64::INFINITY),
        }
    };
    let base = admissible(1.0);
    if !base.0 {
        return Err(Error::NoAdmissibleRho { node: base.1, margin: base.2 });
    }
    // the defect is monotone in rho; bisect for the admissibility edge
    let mut lo = 1.0f64;
    let mut hi = 65536.0f64;
    if admissible(hi).0 {
        lo = hi;
    } else {
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if admissible(mid).0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let rho = 1.0;
    let field =
        DualField::from_fn(grid.clone(), s, |r, _| rho * proto.phi_and_deriv(1.0 - s * r * r).0);
    Ok(SuperSolution { grid: grid.clone(), rho, rho_max: lo, delta0, s, field })
}

/// The boundary gradient barrier `psi = -kcoef h^{1/2} + kcoef (1-s)^{1/2} + u0*`,
/// a subsolution that pins `|Du*| <= C / sqrt(1-s)` on the boundary ring.
/// Returns the field, the coefficient, and the implied gradient bound.
pub fn boundary_barrier_psi(
    spec: &ProblemSpec,
    grid: &Arc<BallGrid>,
    s: f64,
    u0_star: &DualField,
) -> (DualField, f64, f64) {
    let min_neg_phi = spec.c0();
    let n = spec.n as f64;
    let kcoef = 3.0 / min_neg_phi.powf(spec.alpha / n);
    let values: Vec<f64> = (0..grid.n_nodes())
        .map(|node| {
            let r = grid.r_of(node);
            let h = 1.0 - s * r * r;
            -kcoef * h.sqrt() + kcoef * (1.0 - s).sqrt() + u0_star.values[node]
        })
        .collect();
    let field = DualField::new(grid.clone(), values, s);
    // |Dpsi| at the boundary: kcoef s / sqrt(1-s) plus the flat barrier slope
    let u0_slope = crate::geometry::grad_norm_at(u0_star, grid.idx(grid.n_r(), 0));
    let bound = kcoef * s / (1.0 - s).sqrt() + u0_slope;
    (field, kcoef, bound)
}

/// Affine-shifted supersolution touching the solution from above at a
/// near-boundary node: `rho Phi + b . xi + d`, with the tangential slope of
/// the solution matched and the radial coefficient fixed by the touching
/// condition. Dominance over the solution is verified on the node's whole
/// ring.
pub fn touching_barrier(
    sup: &SuperSolution,
    solution: &DualField,
    node: usize,
    d: f64,
) -> Result<DualField> {
    let grid = &sup.grid;
    let (j, m) = grid
        .ring_of(node)
        .ok_or_else(|| Error::ValidationError("touching point must lie on a ring".into()))?;
    let r_hat = grid.radii[j];
    let lo = ((2.0 - sup.delta0) / (2.0 * sup.s)).sqrt();
    if !(r_hat > lo && r_hat < 1.0) {
        return Err(Error::ValidationError(format!(
            "touching radius {r_hat} outside ({lo}, 1): the barrier core is not pure g1 there"
        )));
    }
    let theta_hat = grid.thetas[m];
    // local frame at the touching point
    let er = [theta_hat.cos(), theta_hat.sin()];
    let et = [-theta_hat.sin(), theta_hat.cos()];
    let (_, sol_t) = crate::geometry::grad_at(solution, node);
    // value matching fixes the radial slope coefficient
    let b_r = (solution.values[node] - sup.field.values[node] - d) / r_hat;
    let b = [b_r * er[0] + sol_t * et[0], b_r * er[1] + sol_t * et[1]];
    let values: Vec<f64> = (0..grid.n_nodes())
        .map(|i| {
            let xi = grid.xi(i);
            sup.field.values[i] + b[0] * xi[0] + b[1] * xi[1] + d
        })
        .collect();
    let barrier = DualField::new(grid.clone(), values, sup.s);
    // touching by construction
    debug_assert!((barrier.values[node] - solution.values[node]).abs() < 1e-10);
    // dominance on the sphere through the touching point
    for mm in 0..grid.n_theta() {
        let i = grid.idx(j, mm);
        if i == node {
            continue;
        }
        let gap = barrier.values[i] - solution.values[i];
        if gap <= 0.0 {
            return Err(Error::DominanceFailed { node: i, deficit: gap });
        }
    }
    Ok(barrier)
}

/// Dual subsolution of the quotient problem obtained from the Gauss family
/// with exponent `alpha n / k` and the Maclaurin constant `C(n,k)^{n/k}`
/// folded into the right-hand side; the returned field is the extrapolated
/// `s -> 1` limit.
pub fn maclaurin_subsolution(
    spec: &ProblemSpec,
    grid: &Arc<BallGrid>,
    schedule: &ContinuationSchedule,
) -> Result<DualField> {
    if spec.k >= spec.n {
        return Err(Error::BadOrder { k: spec.k, n: spec.n });
    }
    let n = spec.n as f64;
    let k = spec.k as f64;
    let alpha_eff = spec.alpha * n / k;
    let multiplier = binomial(spec.n, spec.k).powf(n / k);
    let (_, limit, _) = solve_gauss_family(grid, &spec.phi, alpha_eff, multiplier, schedule, None)?;
    Ok(limit.as_field())
}

/// The steeper companion subsolution with the constant 100 in place of the
/// Maclaurin constant (its dual lies above the Maclaurin dual); used by the
/// primal gradient-estimate audit.
pub fn u1_subsolution(
    spec: &ProblemSpec,
    grid: &Arc<BallGrid>,
    schedule: &ContinuationSchedule,
) -> Result<DualField> {
    if spec.k >= spec.n {
        return Err(Error::BadOrder { k: spec.k, n: spec.n });
    }
    let n = spec.n as f64;
    let k = spec.k as f64;
    let alpha_eff = spec.alpha * n / k;
    let (_, limit, _) = solve_gauss_family(grid, &spec.phi, alpha_eff, 0.01, schedule, None)?;
    Ok(limit.as_field())
}

/// Constant-curvature supersolution of the quotient problem:
/// `sigma_n/sigma_{n-k} = 1/C0^alpha` on the unit ball with boundary `phi*`.
/// Lies below every solution of the approximate problems.
pub fn constant_sigma_k_supersolution(
    spec: &ProblemSpec,
    grid: &Arc<BallGrid>,
    c0: f64,
    schedule: &ContinuationSchedule,
) -> Result<DualField> {
    if c0 <= 0.0 {
        return Err(Error::BadConstant(format!("C0 = {c0} must be positive")));
    }
    let controls = NewtonControls::from(schedule);
    let rhs_const = c0.powf(-spec.alpha);
    let ctx = OperatorContext::quotient(grid.clone(), spec.k, 0.0, rhs_const);
    // exact radial solution for constant data: -c w* + const
    let c = (binomial(spec.n, spec.k) * rhs_const).powf(1.0 / spec.k as f64);
    let bt = boundary_trace_from_phi(grid, &spec.phi);
    let init = DualField::from_fn(grid.clone(), 1.0, |r, th| {
        -c * ((1.0 - r * r).max(0.0)).sqrt() + spec.phi.harmonic_extension_dual(r, th)
    });
    let mut init = init;
    for (slot, b) in grid.boundary_nodes().zip(&bt) {
        init.values[slot] = *b;
    }
    let (field, _) = solve_fixed(&ctx, init, &controls)?;
    Ok(field)
}

/// Builds the quotient-case barrier pair.
pub fn quotient_barrier_set(
    spec: &ProblemSpec,
    grid: &Arc<BallGrid>,
    schedule: &ContinuationSchedule,
) -> Result<QuotientBarrierSet> {
    let c0 = spec.c0();
    let maclaurin = maclaurin_subsolution(spec, grid, schedule)?;
    let const_super = constant_sigma_k_supersolution(spec, grid, c0, schedule)?;
    Ok(QuotientBarrierSet { maclaurin, const_super, c0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::problem::BoundaryData;

    fn grid(n_r: usize, n_theta: usize) -> Arc<BallGrid> {
        Arc::new(
            BallGrid::build(
                GridSpec { n_r, n_theta, grading_exponent: 2.0, stencil_width: 8 },
                1.0,
            )
            .unwrap(),
        )
    }

    fn spec_gauss(alpha: f64) -> ProblemSpec {
        ProblemSpec::new(2, 2, alpha, BoundaryData::constant(1.0))
    }

    fn short_schedule() -> ContinuationSchedule {
        ContinuationSchedule {
            s_values: vec![0.5, 0.75, 0.9, 0.96],
            ..ContinuationSchedule::default()
        }
    }

    #[test]
    fn ubar_matches_closed_form_for_unit_data() {
        // phi* = -1, K = 1: the exact-weight problem has the exact solution
        // -w* - 1 (det = w*^{-4})
        let spec = ProblemSpec::new(2, 2, 1.0, BoundaryData::constant(1.0));
        let g = grid(32, 32);
        let ubar = solve_ubar_star(&spec, &g, 1.0, &short_schedule()).unwrap();
        let mut worst: f64 = 0.0;
        for node in 0..g.n_nodes() {
            let r = g.r_of(node);
            let exact = -(1.0 - r * r).sqrt() - 1.0;
            worst = worst.max((ubar.values[node] - exact).abs() / 2.0);
        }
        assert!(worst < 1e-2, "relative deviation {worst}");
        // boundary values equal phi* exactly
        for b in g.boundary_nodes() {
            assert_eq!(ubar.values[b], -1.0);
        }
        // never above -C0
        let max = ubar.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max <= -1.0 + 1e-12);
    }

    #[test]
    fn ubar_matches_radial_oracle_regularized() {
        // cross-check the s = 0.96 stage against the radial oracle
        let spec = spec_gauss(1.0);
        let g = grid(32, 32);
        let controls = NewtonControls { tol: 1e-9, max_iters: 40, damping_floor: 1e-3 };
        let s = 0.96;
        let ctx = OperatorContext::fixed_weight(g.clone(), 1.0, HWeight::Regularized { s });
        let init = initial_iterate_scaled(&g, &spec.phi, s, (1.0f64 / s).sqrt());
        let (field, _) = solve_fixed(&ctx, init, &controls).unwrap();
        let oracle = crate::radial::solve_radial_gauss_scaled(2, 0.0, 1.0, s, -1.0).unwrap();
        let cmp = crate::radial::compare_with_grid(&oracle, &field);
        assert!(cmp.max_rel < 1e-2, "max_rel {}", cmp.max_rel);
    }

    #[test]
    fn ubar_rejects_large_k() {
        let spec = spec_gauss(1.0);
        let g = grid(16, 16);
        assert!(matches!(
            solve_ubar_star(&spec, &g, 1.5, &short_schedule()),
            Err(Error::BadConstant(_))
        ));
    }

    #[test]
    fn u0_is_exact_paraboloid_for_constant_data() {
        let spec = spec_gauss(1.0);
        let g = grid(24, 24);
        let c1 = 8.0;
        let u0 = solve_u0_star(&spec, &g, c1, &short_schedule()).unwrap();
        let a = (1.0f64 / c1).sqrt();
        let mut worst: f64 = 0.0;
        for node in 0..g.n_nodes() {
            let r = g.r_of(node);
            let exact = 0.5 * a * (r * r - 1.0) - 1.0;
            worst = worst.max((u0.values[node] - exact).abs());
        }
        // the scheme is exact on quadratics, so Newton converges to it
        assert!(worst < 1e-7, "deviation {worst}");
    }

    #[test]
    fn gauss_barrier_ordering() {
        let spec = spec_gauss(1.0);
        let g = grid(24, 24);
        let set = gauss_barrier_set(&spec, &g, &short_schedule()).unwrap();
        for node in 0..g.n_interior() {
            assert!(
                set.u0.values[node] > set.ubar.values[node],
                "ordering fails at {node}"
            );
        }
        // oracle comparison for u0 with the barrier-default constant
        let a = (1.0f64 / set.c1).sqrt();
        for node in (0..g.n_interior()).step_by(7) {
            let r = g.r_of(node);
            let exact = 0.5 * a * (r * r - 1.0) - 1.0;
            assert!((set.u0.values[node] - exact).abs() < 1e-2);
        }
    }

    #[test]
    fn g1_arithmetic() {
        // g1(0.01) = -0.01 log(log 100)
        let v = g1(0.01);
        assert!((v + 0.015271796).abs() < 1e-8, "g1(0.01) = {v}");
    }

    #[test]
    fn g1_determinant_closed_form() {
        // independent eigenvalue route: det = (-2 s g1') ((-2 s g1') + 4 s^2 r^2 g1'')
        for &(s, r2) in &[(1.0, 0.98), (0.9, 0.97), (0.96, 0.99)] {
            let r = (r2 as f64).sqrt();
            let h = 1.0 - s * r * r;
            if h >= 0.2 {
                continue;
            }
            let tang = -2.0 * s * g1_deriv(h);
            let rad = tang + 4.0 * s * s * r * r * g1_second(h);
            let via_eigen = tang * rad;
            let closed = g1_hessian_det(s, r);
            assert!(
                (via_eigen - closed).abs() <= 1e-10 * closed.abs(),
                "s={s} r2={r2}: {via_eigen} vs {closed}"
            );
        }
    }

    #[test]
    fn g1_determinant_matches_wide_stencil() {
        // the clamped wide-stencil determinant of the g1 field approaches the
        // closed form where the field is smooth
        let s = 0.9;
        let g = grid(96, 64);
        let ctx = OperatorContext::gauss(g.clone(), 1.0, s);
        let f = DualField::from_fn(g.clone(), s, |r, _| g1(1.0 - s * r * r));
        // pick a node with h well inside the g1 branch
        let j = (1..g.n_r())
            .min_by_key(|&j| {
                let h = 1.0 - s * g.radii[j] * g.radii[j];
                ((h - 0.04).abs() * 1e9) as u64
            })
            .unwrap();
        let node = g.idx(j, 3);
        let det = crate::operator::det_hessian_ws(&ctx, &f, node).unwrap();
        let closed = g1_hessian_det(s, g.radii[j]);
        assert!(
            (det - closed).abs() < 5e-2 * closed,
            "det {det} vs closed form {closed}"
        );
    }

    #[test]
    fn supersolution_blend_is_convex_and_admissible() {
        let spec = spec_gauss(1.0);
        let g = grid(48, 32);
        let s = 0.9;
        let sup = build_supersolution(&spec, &g, s, 0.1).unwrap();
        assert_eq!(sup.rho, 1.0);
        assert!(sup.rho_max >= 1.0);
        // g2 branch has unit determinant once scaled by rho^2
        let ctx = OperatorContext::gauss(g.clone(), spec.alpha, s);
        let center_det = crate::operator::det_hessian_ws(&ctx, &sup.field, 0).unwrap();
        assert!((center_det - sup.rho * sup.rho).abs() < 1e-9);
        // second radial differences of the field are nonnegative across the
        // blend zone, and the tangential eigenvalue -2 s Phi' stays positive
        let d0 = sup.delta0;
        for node in g.interior_nodes() {
            let h = 1.0 - s * g.r_of(node) * g.r_of(node);
            if h < 0.5 * d0 || h > 2.0 * d0 {
                continue;
            }
            let hess = crate::geometry::hessian_at(&sup.field, node);
            assert!(hess.a >= -1e-8, "radial second difference {} at node {node}", hess.a);
            assert!(sup.phi_deriv(h) <= 0.0, "Phi' positive at h = {h}");
        }
        // supersolution defect nonpositive at every interior node
        let res = assemble_residual(&ctx, &sup.field).unwrap();
        let worst = res.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(worst <= 0.0, "supersolution defect {worst}");
    }

    #[test]
    fn supersolution_gradient_blows_up() {
        let spec = spec_gauss(1.0);
        let g = grid(48, 32);
        let sup = build_supersolution(&spec, &g, 0.99, 0.1).unwrap();
        // increasing along the radius once inside the boundary layer
        let mut prev = 0.0;
        for i in 0..40 {
            let r = 0.9 + 0.0025 * i as f64;
            let gn = sup.grad_norm_at_radius(r);
            assert!(gn >= prev - 1e-12, "gradient not increasing at r = {r}");
            prev = gn;
        }
        // exceeds a preset bound as h -> 0 with s -> 1
        let sup2 = build_supersolution(&spec, &g, 0.999, 0.1).unwrap();
        assert!(sup2.grad_norm_at_radius(0.9995) > 3.0);
    }

    #[test]
    fn psi_matches_u0_on_boundary_and_is_subsolution() {
        let spec = spec_gauss(2.0);
        let g = grid(32, 32);
        let schedule = short_schedule();
        let set = gauss_barrier_set(&spec, &g, &schedule).unwrap();
        let s = 0.9;
        let (psi, kcoef, bound) = boundary_barrier_psi(&spec, &g, s, &set.u0);
        // min(-phi*) = 1, alpha = n gives kcoef = 3
        assert_eq!(kcoef, 3.0);
        assert!(bound > 0.0);
        for b in g.boundary_nodes() {
            assert!(
                (psi.values[b] - set.u0.values[b]).abs() < 1e-12,
                "psi and u0 differ on the boundary ring"
            );
        }
        // det D^2 psi > (k s)^n h^{-(n+2)/2} at interior sample nodes
        let ctx = OperatorContext::gauss(g.clone(), spec.alpha, s);
        for &jfrac in &[0.3, 0.5, 0.7] {
            let j = ((g.n_r() as f64) * jfrac) as usize;
            let node = g.idx(j.max(2), 5);
            let r = g.r_of(node);
            let h = 1.0 - s * r * r;
            let det = crate::operator::det_hessian_ws(&ctx, &psi, node).unwrap();
            let lower = (kcoef * s).powi(2) * h.powf(-2.0);
            assert!(det > lower, "node {node}: det {det} <= bound {lower}");
        }
    }

    #[test]
    fn touching_barrier_dominance() {
        let spec = spec_gauss(1.0);
        let g = grid(48, 64);
        let s = 0.99;
        let schedule = ContinuationSchedule {
            s_values: vec![0.5, 0.75, 0.9, 0.96, 0.99],
            ..ContinuationSchedule::default()
        };
        let (fields, _, _) = crate::solver::solve_gauss_dual(&spec, &g, &schedule).unwrap();
        let solution = fields.last().unwrap();
        let sup = build_supersolution(&spec, &g, s, 0.1).unwrap();
        // touching radius must satisfy h < delta0/2
        let j = (1..g.n_r())
            .find(|&j| {
                let r = g.radii[j];
                r > ((2.0 - 0.1) / (2.0 * s)).sqrt() && r < 1.0
            })
            .expect("no admissible touching ring");
        let node = g.idx(j, 7);
        // the proof's F(t) >= d (1 - sqrt(2)/2) - C4 structure: small d fails,
        // large d dominates
        let small = touching_barrier(&sup, solution, node, 1e-6);
        let big = touching_barrier(&sup, solution, node, 50.0).unwrap();
        assert!((big.values[node] - solution.values[node]).abs() < 1e-9);
        for mm in (0..g.n_theta()).step_by(5) {
            let i = g.idx(j, mm);
            if i != node {
                assert!(big.values[i] > solution.values[i]);
            }
        }
        if let Err(Error::DominanceFailed { deficit, .. }) = small {
            assert!(deficit <= 0.0);
        }
    }

    #[test]
    fn maclaurin_quotient_defect_has_subsolution_sign() {
        // sigma_n/sigma_{n-k}(lambda[maclaurin]) <= (w*/(-maclaurin))^alpha
        let spec = ProblemSpec::new(2, 1, 1.0, BoundaryData::constant(1.0));
        let g = grid(32, 32);
        let schedule = ContinuationSchedule {
            s_values: vec![0.75, 0.9, 0.96, 0.99],
            ..ContinuationSchedule::default()
        };
        let mac = maclaurin_subsolution(&spec, &g, &schedule).unwrap();
        let ctx = OperatorContext::quotient(g.clone(), 1, spec.alpha, 1.0);
        let res = assemble_residual(&ctx, &mac).unwrap();
        for node in 0..g.n_interior() {
            let r = g.r_of(node);
            if r > 0.95 {
                continue; // extrapolated tail is noisy next to the boundary
            }
            assert!(
                res.values[node] <= 5e-3,
                "node {node} (r = {r}): defect {}",
                res.values[node]
            );
        }
    }

    #[test]
    fn maclaurin_satisfies_maclaurin_inequality_on_samples() {
        let spec = ProblemSpec::new(2, 1, 1.0, BoundaryData::constant(1.0));
        let g = grid(32, 32);
        let schedule = ContinuationSchedule {
            s_values: vec![0.75, 0.9, 0.96, 0.99],
            ..ContinuationSchedule::default()
        };
        let mac = maclaurin_subsolution(&spec, &g, &schedule).unwrap();
        for node in (1..g.n_interior()).step_by(17) {
            if g.r_of(node) > 0.9 {
                continue;
            }
            let lam = crate::geometry::curvature_radii(&mac, node).unwrap();
            let kappa = [1.0 / lam[1], 1.0 / lam[0]];
            let s1 = (kappa[0] + kappa[1]) / 2.0;
            let s2 = kappa[0] * kappa[1];
            assert!(
                s1 >= s2.sqrt() - 1e-12,
                "Maclaurin inequality fails at {node}: {s1} vs sqrt {}",
                s2.sqrt()
            );
        }
    }

    #[test]
    fn constant_sigma_k_supersolution_is_exact_for_unit_data() {
        // phi = 1: solution -c w* - 1 with c = (C(2,1)/1)^{1/1} = 2
        let spec = ProblemSpec::new(2, 1, 1.0, BoundaryData::constant(1.0));
        let g = grid(32, 32);
        let field = constant_sigma_k_supersolution(&spec, &g, 1.0, &short_schedule()).unwrap();
        let mut worst: f64 = 0.0;
        for node in 0..g.n_nodes() {
            let r = g.r_of(node);
            if r > 0.95 {
                continue;
            }
            let exact = -2.0 * (1.0 - r * r).sqrt() - 1.0;
            worst = worst.max((field.values[node] - exact).abs() / 3.0);
        }
        assert!(worst < 1e-2, "relative deviation {worst}");
    }

    #[test]
    fn quotient_barrier_ordering() {
        let spec = ProblemSpec::new(2, 1, 1.0, BoundaryData::constant(1.0));
        let g = grid(32, 32);
        let schedule = ContinuationSchedule {
            s_values: vec![0.75, 0.9, 0.96, 0.99],
            ..ContinuationSchedule::default()
        };
        let set = quotient_barrier_set(&spec, &g, &schedule).unwrap();
        for node in 0..g.n_interior() {
            assert!(
                set.const_super.values[node] < set.maclaurin.values[node] + 1e-10,
                "ordering fails at node {node}: {} vs {}",
                set.const_super.values[node],
                set.maclaurin.values[node]
            );
        }
    }
}
