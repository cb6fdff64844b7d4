//! Discrete fully nonlinear operators on ball grids: the wide-stencil
//! Monge-Ampere determinant, the sigma_n/sigma_{n-k} eigenvalue quotient, and
//! the right-hand sides of both regularized dual problems.
//!
//! The determinant at an interior node is the minimum over stencil direction
//! pairs `(e, e_perp)` of the product of clamped second directional
//! differences. Directions are taken relative to each node's radial frame, so
//! the scheme is exactly rotation equivariant on the polar grid; the aligned
//! pair (pure radial / tangential) uses only positive-weight differences and
//! carries the comparison structure, while rotated pairs are evaluated through
//! the same second order polar Hessian components. Negative second differences
//! clamp to zero, which keeps Newton iterates inside the scheme's domain;
//! solutions are checked a posteriori for strict discrete convexity.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{elementary_symmetric, hess_stencil, DualField, HessStencil};
use crate::grid::BallGrid;

/// Which discrete operator acts on the left-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpKind {
    /// `sigma_n(D^2 u*)` via the clamped wide-stencil determinant.
    MongeAmpere,
    /// `sigma_n/sigma_{n-k}(w* gamma* D^2u* gamma*)`, smooth discretization.
    HessianQuotient { k: u32 },
}

/// Right-hand side family `F(xi, u*)`, increasing in `u*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhsKind {
    /// `multiplier * h^h_exponent * (-u*)^(-alpha)` with `h` the (possibly
    /// regularized) boundary weight.
    GaussPower { alpha: f64, h_exponent: f64, multiplier: f64 },
    /// `multiplier * (w* / (-u*))^alpha`.
    QuotientPower { alpha: f64, multiplier: f64 },
}

/// Boundary weight entering the Gauss-case right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HWeight {
    /// `h = 1 - s |xi|^2`, positive on the closed ball for `s < 1`.
    Regularized { s: f64 },
    /// `h = 1 - |xi|^2`, evaluated at interior nodes only.
    Exact,
}

/// One direction pair at angle `psi` from the radial axis: cached
/// `(cos^2, sin^2, 2 sin cos)`.
#[derive(Debug, Clone, Copy)]
struct DirPair {
    c2: f64,
    s2: f64,
    sc2: f64,
}

/// Everything needed to evaluate the discrete residual of one problem at one
/// continuation parameter.
#[derive(Debug, Clone)]
pub struct OperatorContext {
    pub grid: Arc<BallGrid>,
    pub op: OpKind,
    pub rhs: RhsKind,
    pub weight: HWeight,
    /// Continuation parameter this context represents (`s` or `r`), for traces.
    pub param: f64,
    /// `h` per node.
    pub h_field: Vec<f64>,
    /// `w* = sqrt(1 - |xi|^2)` per node.
    pub w_field: Vec<f64>,
    stencils: Vec<HessStencil>,
    dirs: Vec<DirPair>,
}

impl OperatorContext {
    fn build(
        grid: Arc<BallGrid>,
        op: OpKind,
        rhs: RhsKind,
        weight: HWeight,
        param: f64,
    ) -> Self {
        let n_nodes = grid.n_nodes();
        let mut h_field = Vec::with_capacity(n_nodes);
        let mut w_field = Vec::with_capacity(n_nodes);
        for i in 0..n_nodes {
            let r = grid.r_of(i);
            let h = match weight {
                HWeight::Regularized { s } => 1.0 - s * r * r,
                HWeight::Exact => 1.0 - r * r,
            };
            h_field.push(h);
            w_field.push((1.0 - r * r).max(0.0).sqrt());
        }
        let stencils: Vec<HessStencil> =
            (0..grid.n_interior()).map(|node| hess_stencil(&grid, node)).collect();
        let w_pairs = grid.spec.stencil_width;
        let dirs = (0..w_pairs)
            .map(|w| {
                let psi = w as f64 * std::f64::consts::FRAC_PI_2 / w_pairs as f64;
                let (sn, cs) = psi.sin_cos();
                DirPair { c2: cs * cs, s2: sn * sn, sc2: 2.0 * sn * cs }
            })
            .collect();
        OperatorContext { grid, op, rhs, weight, param, h_field, w_field, stencils, dirs }
    }

    /// Regularized Gauss problem `sigma_n(D^2u*) = h^{(alpha-n-2)/2} (-u*)^{-alpha}`.
    pub fn gauss(grid: Arc<BallGrid>, alpha: f64, s: f64) -> Self {
        Self::gauss_scaled(grid, alpha, 1.0, HWeight::Regularized { s })
    }

    /// Gauss problem with a folded-in constant multiplier and arbitrary weight
    /// (used by the barrier family and the quotient subsolutions).
    pub fn gauss_scaled(grid: Arc<BallGrid>, alpha: f64, multiplier: f64, weight: HWeight) -> Self {
        let n = 2.0;
        let rhs = RhsKind::GaussPower {
            alpha,
            h_exponent: (alpha - n - 2.0) / 2.0,
            multiplier,
        };
        let param = match weight {
            HWeight::Regularized { s } => s,
            HWeight::Exact => 1.0,
        };
        Self::build(grid, OpKind::MongeAmpere, rhs, weight, param)
    }

    /// Fixed-weight problem `sigma_n(D^2u*) = k_inv * h^{-(n+2)/2}` (no
    /// dependence on `u*`).
    pub fn fixed_weight(grid: Arc<BallGrid>, k_inv: f64, weight: HWeight) -> Self {
        let n = 2.0;
        let rhs = RhsKind::GaussPower { alpha: 0.0, h_exponent: -(n + 2.0) / 2.0, multiplier: k_inv };
        let param = match weight {
            HWeight::Regularized { s } => s,
            HWeight::Exact => 1.0,
        };
        Self::build(grid, OpKind::MongeAmpere, rhs, weight, param)
    }

    /// Constant right-hand side `sigma_n(D^2u*) = value`.
    pub fn constant_rhs(grid: Arc<BallGrid>, value: f64) -> Self {
        let rhs = RhsKind::GaussPower { alpha: 0.0, h_exponent: 0.0, multiplier: value };
        Self::build(grid, OpKind::MongeAmpere, rhs, HWeight::Exact, 1.0)
    }

    /// Quotient problem `sigma_n/sigma_{n-k} (w* gamma* D^2u* gamma*) =
    /// multiplier * (w*/(-u*))^alpha` on the ball of radius `r` (the grid's
    /// radius).
    pub fn quotient(grid: Arc<BallGrid>, k: u32, alpha: f64, multiplier: f64) -> Self {
        let param = grid.radius;
        Self::build(
            grid,
            OpKind::HessianQuotient { k },
            RhsKind::QuotientPower { alpha, multiplier },
            HWeight::Exact,
            param,
        )
    }

    pub fn stencil(&self, node: usize) -> &HessStencil {
        &self.stencils[node]
    }
}

/// `h^{(alpha-n-2)/2} * (-u*)^{-alpha}` style right-hand side value at a node.
pub fn dual_rhs_gauss(ctx: &OperatorContext, u_star: f64, node: usize) -> Result<f64> {
    if u_star >= 0.0 {
        return Err(Error::NonnegativePotential(u_star));
    }
    match ctx.rhs {
        RhsKind::GaussPower { alpha, h_exponent, multiplier } => {
            Ok(multiplier * ctx.h_field[node].powf(h_exponent) * (-u_star).powf(-alpha))
        }
        RhsKind::QuotientPower { .. } => unreachable!("gauss rhs requested on quotient context"),
    }
}

/// `(w*/(-u*))^alpha` style right-hand side value at a node.
pub fn dual_rhs_quotient(ctx: &OperatorContext, u_star: f64, node: usize) -> Result<f64> {
    if u_star >= 0.0 {
        return Err(Error::NonnegativePotential(u_star));
    }
    match ctx.rhs {
        RhsKind::QuotientPower { alpha, multiplier } => {
            Ok(multiplier * (ctx.w_field[node] / -u_star).powf(alpha))
        }
        RhsKind::GaussPower { .. } => unreachable!("quotient rhs requested on gauss context"),
    }
}

fn rhs_value(ctx: &OperatorContext, node: usize, u: f64) -> f64 {
    match ctx.rhs {
        RhsKind::GaussPower { alpha, h_exponent, multiplier } => {
            multiplier * ctx.h_field[node].powf(h_exponent) * (-u).powf(-alpha)
        }
        RhsKind::QuotientPower { alpha, multiplier } => {
            multiplier * (ctx.w_field[node] / -u).powf(alpha)
        }
    }
}

/// `d(rhs)/du*`, strictly positive for `alpha > 0`; this monotonicity is what
/// makes the discrete maximum principle work.
pub fn rhs_derivative(ctx: &OperatorContext, node: usize, u: f64) -> f64 {
    match ctx.rhs {
        RhsKind::GaussPower { alpha, h_exponent, multiplier } => {
            multiplier * ctx.h_field[node].powf(h_exponent) * alpha * (-u).powf(-alpha - 1.0)
        }
        RhsKind::QuotientPower { alpha, multiplier } => {
            multiplier * ctx.w_field[node].powf(alpha) * alpha * (-u).powf(-alpha - 1.0)
        }
    }
}

/// `sigma_n(lambda) / sigma_{n-k}(lambda)` with `sigma_0 = 1`.
pub fn sigma_quotient(lambda: &[f64], k: u32) -> Result<f64> {
    let n = lambda.len();
    for (i, &l) in lambda.iter().enumerate() {
        if l <= 0.0 {
            return Err(Error::NonEllipticPoint {
                node: i,
                l1: lambda[0],
                l2: *lambda.last().unwrap(),
            });
        }
    }
    let num = elementary_symmetric(lambda, n);
    let den = elementary_symmetric(lambda, n - k as usize);
    Ok(num / den)
}

/// Sparse row of a scalar quantity with respect to field values.
pub type Row = Vec<(usize, f64)>;

/// Value and (optionally) gradient row of the clamped wide-stencil
/// determinant at an interior node.
fn det_ws_impl(ctx: &OperatorContext, field: &DualField, node: usize, want_row: bool) -> (f64, Option<Row>) {
    let grid = &ctx.grid;
    if node == 0 {
        // center: diametral second differences, min over orthogonal pairs
        let t = grid.n_theta();
        let r1 = grid.radii[1];
        let q = 1.0 / (r1 * r1);
        let uc = field.values[0];
        let half = t / 2;
        let quarter = t / 4;
        let dm: Vec<f64> = (0..half)
            .map(|m| (field.values[grid.idx(1, m)] + field.values[grid.idx(1, m + half)] - 2.0 * uc) * q)
            .collect();
        let mut best = f64::INFINITY;
        let mut best_m = 0;
        for m in 0..quarter {
            let p = dm[m].max(0.0) * dm[m + quarter].max(0.0);
            if p < best {
                best = p;
                best_m = m;
            }
        }
        let row = want_row.then(|| {
            let mut row: Row = Vec::with_capacity(5);
            let (da, db) = (dm[best_m], dm[best_m + quarter]);
            let (fa, fb) = (da.max(0.0), db.max(0.0));
            // d(fa*fb) with clamp derivative zero on inactive side
            let ga = if da >= 0.0 { fb } else { 0.0 };
            let gb = if db >= 0.0 { fa } else { 0.0 };
            row.push((grid.idx(1, best_m), ga * q));
            row.push((grid.idx(1, best_m + half), ga * q));
            row.push((grid.idx(1, best_m + quarter), gb * q));
            row.push((grid.idx(1, best_m + quarter + half), gb * q));
            row.push((0, -2.0 * q * (ga + gb)));
            row
        });
        return (best, row);
    }

    let st = ctx.stencil(node);
    let mut a = 0.0;
    let mut b = 0.0;
    let mut x = 0.0;
    for i in 0..9 {
        let v = field.values[st.nodes[i]];
        a += st.wa[i] * v;
        b += st.wb[i] * v;
        x += st.wx[i] * v;
    }
    let mut best = f64::INFINITY;
    let mut best_dir = 0;
    for (widx, d) in ctx.dirs.iter().enumerate() {
        let de = a * d.c2 + b * d.s2 + x * d.sc2;
        let dp = a * d.s2 + b * d.c2 - x * d.sc2;
        let p = de.max(0.0) * dp.max(0.0);
        if p < best {
            best = p;
            best_dir = widx;
        }
    }
    let row = want_row.then(|| {
        let d = ctx.dirs[best_dir];
        let de = a * d.c2 + b * d.s2 + x * d.sc2;
        let dp = a * d.s2 + b * d.c2 - x * d.sc2;
        let (fe, fp) = (de.max(0.0), dp.max(0.0));
        let ge = if de >= 0.0 { fp } else { 0.0 };
        let gp = if dp >= 0.0 { fe } else { 0.0 };
        // d(det)/d(a, b, x), then chain through the stencil weights
        let da = ge * d.c2 + gp * d.s2;
        let db = ge * d.s2 + gp * d.c2;
        let dx = (ge - gp) * d.sc2;
        let mut row: Row = Vec::with_capacity(9);
        for i in 0..9 {
            let w = da * st.wa[i] + db * st.wb[i] + dx * st.wx[i];
            if w != 0.0 {
                row.push((st.nodes[i], w));
            }
        }
        row
    });
    (best, row)
}

/// Monotone wide-stencil Monge-Ampere value at an interior node: minimum over
/// direction pairs of the product of clamped second directional differences.
pub fn det_hessian_ws(ctx: &OperatorContext, field: &DualField, node: usize) -> Result<f64> {
    if !ctx.grid.is_interior(node) {
        return Err(Error::IncompleteStencil(node));
    }
    Ok(det_ws_impl(ctx, field, node, false).0)
}

/// Transformed-Hessian quotient value and optional gradient row at an
/// interior node (n = 2, k = 1: `det M / tr M`).
fn quotient_impl(
    ctx: &OperatorContext,
    field: &DualField,
    node: usize,
    want_row: bool,
) -> Result<(f64, Option<Row>)> {
    let st = ctx.stencil(node);
    let mut a = 0.0;
    let mut b = 0.0;
    let mut x = 0.0;
    for i in 0..9 {
        let v = field.values[st.nodes[i]];
        a += st.wa[i] * v;
        b += st.wb[i] * v;
        x += st.wx[i] * v;
    }
    let w = ctx.w_field[node];
    // m = [[w^3 a, w^2 x], [w^2 x, w b]] in the local frame
    let m11 = w * w * w * a;
    let m12 = w * w * x;
    let m22 = w * b;
    let tr = m11 + m22;
    let det = m11 * m22 - m12 * m12;
    if tr <= 0.0 || det <= 0.0 {
        let disc = ((m11 - m22) * 0.5).hypot(m12);
        return Err(Error::NonEllipticPoint {
            node,
            l1: 0.5 * tr - disc,
            l2: 0.5 * tr + disc,
        });
    }
    let q = det / tr;
    let row = want_row.then(|| {
        // dq = (d(det) tr - det d(tr)) / tr^2, with
        // d(det) = m22 dm11 + m11 dm22 - 2 m12 dm12
        let c11 = (m22 * tr - det) / (tr * tr);
        let c22 = (m11 * tr - det) / (tr * tr);
        let c12 = -2.0 * m12 / tr;
        let da = c11 * w * w * w;
        let db = c22 * w;
        let dx = c12 * w * w;
        let mut row: Row = Vec::with_capacity(9);
        for i in 0..9 {
            let wgt = da * st.wa[i] + db * st.wb[i] + dx * st.wx[i];
            if wgt != 0.0 {
                row.push((st.nodes[i], wgt));
            }
        }
        row
    });
    Ok((q, row))
}

/// Per-interior-node residual of the discrete problem, `operator - rhs`.
#[derive(Debug, Clone)]
pub struct ResidualVector {
    /// One entry per interior node, indexed by node id.
    pub values: Vec<f64>,
    /// `max(1, |rhs|)` per interior node; the scale used for convergence tests.
    pub scales: Vec<f64>,
}

impl ResidualVector {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    pub fn l2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Max of `|residual| / max(1, |rhs|)`.
    pub fn max_scaled(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.scales)
            .fold(0.0, |acc: f64, (v, s)| acc.max(v.abs() / s))
    }
}

/// Assembles the residual `operator(u*) - rhs(u*)` at every interior node.
pub fn assemble_residual(ctx: &OperatorContext, field: &DualField) -> Result<ResidualVector> {
    let n_int = ctx.grid.n_interior();
    let mut values = Vec::with_capacity(n_int);
    let mut scales = Vec::with_capacity(n_int);
    for node in 0..n_int {
        let u = field.values[node];
        if u >= 0.0 {
            return Err(Error::NonnegativePotential(u));
        }
        let op = match ctx.op {
            OpKind::MongeAmpere => det_ws_impl(ctx, field, node, false).0,
            OpKind::HessianQuotient { .. } => quotient_impl(ctx, field, node, false)?.0,
        };
        let rhs = rhs_value(ctx, node, u);
        values.push(op - rhs);
        scales.push(rhs.abs().max(1.0));
    }
    Ok(ResidualVector { values, scales })
}

/// Sparse Jacobian rows of the residual with respect to all node values
/// (columns at boundary nodes correspond to frozen Dirichlet data).
pub fn assemble_jacobian_rows(ctx: &OperatorContext, field: &DualField) -> Result<Vec<Row>> {
    let n_int = ctx.grid.n_interior();
    let mut rows = Vec::with_capacity(n_int);
    for node in 0..n_int {
        let u = field.values[node];
        let mut row = match ctx.op {
            OpKind::MongeAmpere => det_ws_impl(ctx, field, node, true).1.unwrap(),
            OpKind::HessianQuotient { .. } => quotient_impl(ctx, field, node, true)?.1.unwrap(),
        };
        // rhs depends on the node's own value only
        let d = rhs_derivative(ctx, node, u);
        if let Some(e) = row.iter_mut().find(|(c, _)| *c == node) {
            e.1 -= d;
        } else {
            row.push((node, -d));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Gateaux derivative of the residual in a given perturbation direction,
/// assembled analytically from the Jacobian rows; matches central finite
/// differences of [`assemble_residual`] on smooth fields.
pub fn assemble_jacobian_action(
    ctx: &OperatorContext,
    field: &DualField,
    perturbation: &[f64],
) -> Result<ResidualVector> {
    assert_eq!(perturbation.len(), ctx.grid.n_nodes());
    let rows = assemble_jacobian_rows(ctx, field)?;
    let base = assemble_residual(ctx, field)?;
    let values = rows
        .iter()
        .map(|row| row.iter().map(|&(c, w)| w * perturbation[c]).sum())
        .collect();
    Ok(ResidualVector { values, scales: base.scales })
}

/// Worst relative deviation between the analytic Jacobian action and central
/// finite differences of the residual, over `trials` smooth perturbation
/// directions.
///
/// The residual is piecewise quadratic in the field, so central differences
/// on a fixed branch are exact up to rounding and the step mainly controls
/// the rounding amplification `machine_eps * sum|w u| / step`; choose it
/// large enough to sit above that floor for the grid's stencil weights.
///
/// Deviations are measured against the larger of the two derivative values,
/// the per-node right-hand-side scale, and the absolute-sum scale
/// `sum_i |row_i p_i|` of the directional derivative; the last is the
/// conditioning floor below which a finite difference of f64 residuals
/// carries no information (stencil weights near the center reach 1e4 and the
/// difference quotient amplifies their rounding by 1/step). Nodes where step
/// halving shows the probe straddling a clamp or active-pair switch are
/// excluded: the operator is only piecewise differentiable there and the
/// central-difference oracle does not apply.
pub fn jacobian_fd_mismatch(
    ctx: &OperatorContext,
    field: &DualField,
    trials: usize,
    step: f64,
) -> f64 {
    let g = &ctx.grid;
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let (k1, k2, p1, p2) = (
            1.0 + (trial % 5) as f64,
            1.0 + (trial % 3) as f64,
            0.13 * trial as f64,
            0.29 * trial as f64,
        );
        // smooth directions vanishing at the boundary ring (Dirichlet data is
        // frozen during Newton); the r^k factors make each angular mode a
        // harmonic polynomial, smooth on the whole disk rather than per chart
        let pert: Vec<f64> = (0..g.n_nodes())
            .map(|i| {
                let rel = g.r_of(i) / g.radius;
                let th = g.theta_of(i);
                (1.0 - rel * rel)
                    * (0.3 * rel.powf(k1) * (k1 * th + p1).cos()
                        + 0.2 * rel.powf(k2 + 1.0) * (k2 * th + p2).sin())
            })
            .collect();
        let rows = assemble_jacobian_rows(ctx, field).expect("rows");
        let act = assemble_jacobian_action(ctx, field, &pert).expect("action");
        let eps = step;
        let shift = |t: f64| {
            DualField::new(
                g.clone(),
                field.values.iter().zip(&pert).map(|(v, p)| v + t * p).collect(),
                field.param,
            )
        };
        let rp = assemble_residual(ctx, &shift(eps)).expect("residual+");
        let rm = assemble_residual(ctx, &shift(-eps)).expect("residual-");
        let rp2 = assemble_residual(ctx, &shift(0.5 * eps)).expect("residual+/2");
        let rm2 = assemble_residual(ctx, &shift(-0.5 * eps)).expect("residual-/2");
        for node in 0..g.n_interior() {
            let fd = (rp.values[node] - rm.values[node]) / (2.0 * eps);
            let fd_half = (rp2.values[node] - rm2.values[node]) / eps;
            let an = act.values[node];
            let sum_abs: f64 = rows[node].iter().map(|&(c, w)| (w * pert[c]).abs()).sum();
            let denom = fd.abs().max(an.abs()).max(act.scales[node]).max(sum_abs);
            if (fd - fd_half).abs() > 1e-6 * denom {
                continue;
            }
            worst = worst.max((fd - an).abs() / denom);
        }
    }
    worst
}
