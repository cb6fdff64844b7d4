//! Legendre duality between entire spacelike graphs on R^n and convex
//! potentials on the unit ball, plus the pointwise geometric quantities that
//! appear on both sides: `w* = sqrt(1 - |xi|^2)`, the gamma matrix, curvature
//! radii, and the support function `v = <X, nu>`.
//!
//! The transformed Hessian `w* gamma* D^2u* gamma*` has the curvature radii of
//! the primal hypersurface as eigenvalues; principal curvatures are their
//! reciprocals. All discrete Hessians here are second order central
//! differences in polar components, assembled in each node's local
//! radial/tangential frame.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::BallGrid;
use crate::problem::ProblemSpec;

/// `w*(xi) = sqrt(1 - |xi|^2)`.
pub fn w_star(xi: [f64; 2]) -> f64 {
    (1.0 - xi[0] * xi[0] - xi[1] * xi[1]).max(0.0).sqrt()
}

/// Sampled dual potential on a ball grid.
#[derive(Debug, Clone)]
pub struct DualField {
    pub grid: Arc<BallGrid>,
    /// `u*` per node, in grid node order.
    pub values: Vec<f64>,
    /// Active continuation parameter: `s` (Gauss) or ball radius `r` (quotient).
    pub param: f64,
    /// Dirichlet data per boundary slot.
    pub boundary_trace: Vec<f64>,
}

impl DualField {
    pub fn new(grid: Arc<BallGrid>, values: Vec<f64>, param: f64) -> Self {
        assert_eq!(values.len(), grid.n_nodes());
        let boundary_trace = grid.boundary_nodes().map(|b| values[b]).collect();
        DualField { grid, values, param, boundary_trace }
    }

    /// Samples a closed-form `f(r, theta)` onto the grid.
    pub fn from_fn(grid: Arc<BallGrid>, param: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.n_nodes()).map(|i| f(grid.r_of(i), grid.theta_of(i))).collect();
        DualField::new(grid, values, param)
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    /// Worst (most negative) aligned pure second difference over the grid,
    /// measured relative to the roundoff floor of each stencil.
    pub fn worst_second_difference(&self) -> (usize, f64) {
        let mut worst = (0, f64::INFINITY);
        for node in self.grid.interior_nodes() {
            let st = hess_stencil(&self.grid, node);
            let mut a = 0.0;
            let mut b = 0.0;
            let mut fuzz: f64 = 0.0;
            for i in 0..9 {
                let v = self.values[st.nodes[i]];
                a += st.wa[i] * v;
                b += st.wb[i] * v;
                fuzz = fuzz.max((st.wa[i] * v).abs()).max((st.wb[i] * v).abs());
            }
            // absorb catastrophic-cancellation noise of the fine stencils
            let local = a.min(b) + 64.0 * f64::EPSILON * fuzz;
            if local < worst.1 {
                worst = (node, local);
            }
        }
        worst
    }

    /// Discrete convexity check: every aligned pure second difference must be
    /// `>= -tol` up to the stencil roundoff floor.
    pub fn check_convexity(&self, tol: f64) -> Result<()> {
        let (node, value) = self.worst_second_difference();
        if value < -tol {
            return Err(Error::NonConvexInput { node, worst: value });
        }
        Ok(())
    }

    /// Max over nodes of `|u*|`.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Gradient magnitude `|Du*|` at any node (one-sided at the boundary).
    pub fn grad_norm(&self, node: usize) -> f64 {
        grad_norm_at(self, node)
    }
}

/// Polar-frame Hessian components at a node: `a` along the radial direction,
/// `b` tangential, `x` mixed. At the center the frame is the lab frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarHessian {
    pub a: f64,
    pub b: f64,
    pub x: f64,
}

impl PolarHessian {
    /// Second derivative along the direction at angle `psi` from the frame's
    /// first axis.
    pub fn along(&self, psi: f64) -> f64 {
        let (sn, cs) = psi.sin_cos();
        self.a * cs * cs + 2.0 * self.x * sn * cs + self.b * sn * sn
    }

    pub fn det(&self) -> f64 {
        self.a * self.b - self.x * self.x
    }

    pub fn trace(&self) -> f64 {
        self.a + self.b
    }
}

/// Linearization of the polar Hessian: stencil node indices and the weight of
/// each node in `a`, `b`, `x`.
#[derive(Debug, Clone)]
pub struct HessStencil {
    pub nodes: [usize; 9],
    pub wa: [f64; 9],
    pub wb: [f64; 9],
    pub wx: [f64; 9],
}

/// Stencil slots for a ring node, in the order used by [`hess_stencil`]:
/// inward, self, outward, left, right, inward-left, inward-right,
/// outward-left, outward-right.
fn ring_stencil_nodes(grid: &BallGrid, j: usize, m: usize) -> [usize; 9] {
    let t = grid.n_theta();
    let ml = (m + t - 1) % t;
    let mr = (m + 1) % t;
    let inw = |mm: usize| if j == 1 { 0 } else { grid.idx(j - 1, mm) };
    [
        inw(m),
        grid.idx(j, m),
        grid.idx(j + 1, m),
        grid.idx(j, ml),
        grid.idx(j, mr),
        inw(ml),
        inw(mr),
        grid.idx(j + 1, ml),
        grid.idx(j + 1, mr),
    ]
}

/// Builds the Hessian stencil (values and derivative weights) at an interior
/// node.
pub fn hess_stencil(grid: &BallGrid, node: usize) -> HessStencil {
    match grid.ring_of(node) {
        None => center_stencil(grid),
        Some((j, m)) => {
            let nodes = ring_stencil_nodes(grid, j, m);
            let r = grid.radii[j];
            let dth = grid.d_theta;
            let w2 = grid.rr_w(j);
            let w1 = grid.r1_w(j);
            let mut wa = [0.0; 9];
            wa[0] = w2[0];
            wa[1] = w2[1];
            wa[2] = w2[2];

            // b = (u_l + u_r - 2 u_0) / (2 r^2 (1 - cos dth)) + u_r / r
            let arc = 1.0 / (2.0 * r * r * (1.0 - dth.cos()));
            let mut wb = [0.0; 9];
            wb[3] = arc;
            wb[4] = arc;
            wb[1] = -2.0 * arc + w1[1] / r;
            wb[0] = w1[0] / r;
            wb[2] = w1[2] / r;

            // x = u_{r theta} / r - u_theta / r^2, with u_{r theta} taken as
            // the quadratic-exact radial derivative of angular central
            // differences
            let ct = 1.0 / (2.0 * dth);
            let mut wx = [0.0; 9];
            wx[6] += w1[0] * ct / r;
            wx[5] -= w1[0] * ct / r;
            wx[4] += w1[1] * ct / r;
            wx[3] -= w1[1] * ct / r;
            wx[8] += w1[2] * ct / r;
            wx[7] -= w1[2] * ct / r;
            wx[4] -= ct / (r * r);
            wx[3] += ct / (r * r);

            HessStencil { nodes, wa, wb, wx }
        }
    }
}

fn center_stencil(grid: &BallGrid) -> HessStencil {
    let t = grid.n_theta();
    let r1 = grid.radii[1];
    let q = 1.0 / (r1 * r1);
    let nodes = [
        0,
        grid.idx(1, 0),
        grid.idx(1, t / 2),
        grid.idx(1, t / 4),
        grid.idx(1, 3 * t / 4),
        grid.idx(1, t / 8),
        grid.idx(1, 5 * t / 8),
        grid.idx(1, 3 * t / 8),
        grid.idx(1, 7 * t / 8),
    ];
    let mut wa = [0.0; 9];
    wa[0] = -2.0 * q;
    wa[1] = q;
    wa[2] = q;
    let mut wb = [0.0; 9];
    wb[0] = -2.0 * q;
    wb[3] = q;
    wb[4] = q;
    // x = (D_{t/8} - D_{3t/8}) / 2; the center weights cancel
    let mut wx = [0.0; 9];
    wx[5] = 0.5 * q;
    wx[6] = 0.5 * q;
    wx[7] = -0.5 * q;
    wx[8] = -0.5 * q;
    HessStencil { nodes, wa, wb, wx }
}

/// Evaluates the polar-frame Hessian at an interior node.
pub fn hessian_at(field: &DualField, node: usize) -> PolarHessian {
    let st = hess_stencil(&field.grid, node);
    let mut a = 0.0;
    let mut b = 0.0;
    let mut x = 0.0;
    for i in 0..9 {
        let v = field.values[st.nodes[i]];
        a += st.wa[i] * v;
        b += st.wb[i] * v;
        x += st.wx[i] * v;
    }
    PolarHessian { a, b, x }
}

/// Local-frame gradient `(u_r, u_t)` at an interior ring node; at the center,
/// lab-frame `(u_x, u_y)`.
pub fn grad_at(field: &DualField, node: usize) -> (f64, f64) {
    let grid = &field.grid;
    match grid.ring_of(node) {
        None => {
            let t = grid.n_theta();
            let r1 = grid.radii[1];
            let gx = (field.values[grid.idx(1, 0)] - field.values[grid.idx(1, t / 2)])
                / (2.0 * r1);
            let gy = (field.values[grid.idx(1, t / 4)] - field.values[grid.idx(1, 3 * t / 4)])
                / (2.0 * r1);
            (gx, gy)
        }
        Some((j, m)) if j < grid.n_r() => {
            let t = grid.n_theta();
            let w1 = grid.r1_w(j);
            let um = if j == 1 { field.values[0] } else { field.values[grid.idx(j - 1, m)] };
            let u0 = field.values[grid.idx(j, m)];
            let up = field.values[grid.idx(j + 1, m)];
            let ur = w1[0] * um + w1[1] * u0 + w1[2] * up;
            let ut = (field.values[grid.idx(j, (m + 1) % t)]
                - field.values[grid.idx(j, (m + t - 1) % t)])
                / (2.0 * grid.d_theta * grid.radii[j]);
            (ur, ut)
        }
        Some((j, m)) => {
            // boundary ring: one-sided second order radial derivative
            let t = grid.n_theta();
            let (r0, r1, r2) = (grid.radii[j - 2], grid.radii[j - 1], grid.radii[j]);
            let (u0, u1, u2) = (
                field.values[grid.idx(j - 2, m)],
                field.values[grid.idx(j - 1, m)],
                field.values[grid.idx(j, m)],
            );
            let ur = u0 * (r2 - r1) / ((r0 - r1) * (r0 - r2))
                + u1 * (r2 - r0) / ((r1 - r0) * (r1 - r2))
                + u2 * (2.0 * r2 - r0 - r1) / ((r2 - r0) * (r2 - r1));
            let ut = (field.values[grid.idx(j, (m + 1) % t)]
                - field.values[grid.idx(j, (m + t - 1) % t)])
                / (2.0 * grid.d_theta * grid.radii[j]);
            (ur, ut)
        }
    }
}

/// `|Du*|` at a node.
pub fn grad_norm_at(field: &DualField, node: usize) -> f64 {
    let (gr, gt) = grad_at(field, node);
    gr.hypot(gt)
}

/// The gamma matrix `gamma*_{ij} = delta_{ij} - xi_i xi_j / (1 + w*)`.
///
/// Symmetric positive definite on the open ball, identity at the origin, with
/// `det gamma* = w*`; that determinant identity is what makes the quotient
/// equation reduce to the Monge-Ampere form at `k = n`.
#[derive(Debug, Clone, Copy)]
pub struct GammaMatrix {
    pub entries: [[f64; 2]; 2],
}

impl GammaMatrix {
    pub fn det(&self) -> f64 {
        self.entries[0][0] * self.entries[1][1] - self.entries[0][1] * self.entries[1][0]
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        sym_eigenvalues(self.entries[0][0], self.entries[0][1], self.entries[1][1])
    }
}

/// Eigenvalues of a symmetric 2x2 `[[a, x], [x, b]]`, ascending.
pub fn sym_eigenvalues(a: f64, x: f64, b: f64) -> [f64; 2] {
    let tr = a + b;
    let disc = ((a - b) * 0.5).hypot(x);
    [0.5 * tr - disc, 0.5 * tr + disc]
}

/// Evaluates `gamma*` at a dual point strictly inside the ball.
pub fn eval_gamma_star(xi: [f64; 2]) -> Result<GammaMatrix> {
    let r2 = xi[0] * xi[0] + xi[1] * xi[1];
    if r2 >= 1.0 {
        return Err(Error::OutsideBall(r2.sqrt()));
    }
    let w = (1.0 - r2).sqrt();
    let c = 1.0 / (1.0 + w);
    Ok(GammaMatrix {
        entries: [
            [1.0 - xi[0] * xi[0] * c, -xi[0] * xi[1] * c],
            [-xi[0] * xi[1] * c, 1.0 - xi[1] * xi[1] * c],
        ],
    })
}

/// Transformed Hessian `w* gamma* D^2u* gamma*` at an interior node, in the
/// node's local frame where `gamma* = diag(w*, 1)`.
pub fn transformed_hessian(field: &DualField, node: usize) -> PolarHessian {
    let h = hessian_at(field, node);
    let r = field.grid.r_of(node);
    let w = (1.0 - r * r).max(0.0).sqrt();
    PolarHessian { a: w * w * w * h.a, b: w * h.b, x: w * w * h.x }
}

/// Curvature radii at an interior node: eigenvalues of the transformed
/// Hessian, ascending. Principal curvatures are `1 / lambda_i`.
pub fn curvature_radii(field: &DualField, node: usize) -> Result<[f64; 2]> {
    let m = transformed_hessian(field, node);
    let ev = sym_eigenvalues(m.a, m.x, m.b);
    if ev[0] <= 0.0 {
        return Err(Error::SingularHessian { node, lambda: ev[0] });
    }
    Ok(ev)
}

/// Support function `v = <X, nu> = u* / w*` at a node strictly inside the
/// ball.
pub fn support_v(field: &DualField, node: usize) -> Result<f64> {
    let r = field.grid.r_of(node);
    if r >= field.grid.radius && field.grid.radius >= 1.0 {
        return Err(Error::OutsideBall(r));
    }
    let w = (1.0 - r * r).sqrt();
    Ok(field.values[node] / w)
}

/// One reconstructed point of the primal graph.
#[derive(Debug, Clone)]
pub struct PrimalSample {
    pub x: [f64; 2],
    pub u: f64,
    /// Subgradient `Du(x)`, the maximizing dual node position.
    pub grad: [f64; 2],
    /// Index of the maximizing dual node.
    pub dual_node: usize,
    /// `sqrt(1 - |Du|^2)` at the dual point.
    pub w: f64,
    /// Support `v = <X, nu> < 0`.
    pub v: f64,
    /// Curvature radii (ascending).
    pub lambda: [f64; 2],
    /// Principal curvatures (ascending).
    pub kappa: [f64; 2],
    /// Timelike unit normal `(Du, 1) / w`.
    pub normal: [f64; 3],
}

/// Legendre-reconstructed entire graph samples with geometry.
#[derive(Debug, Clone)]
pub struct PrimalSurface {
    pub samples: Vec<PrimalSample>,
}

impl PrimalSurface {
    pub fn max_grad_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |acc: f64, s| acc.max(s.grad[0].hypot(s.grad[1])))
    }
}

/// Default primal sample set: polar tensor grid on `|x| <= r_max`.
pub fn default_primal_samples(r_max: f64, n_r: usize, n_theta: usize) -> Vec<[f64; 2]> {
    let mut pts = Vec::with_capacity(n_r * n_theta + 1);
    pts.push([0.0, 0.0]);
    for i in 1..=n_r {
        let rad = r_max * i as f64 / n_r as f64;
        for m in 0..n_theta {
            let th = 2.0 * std::f64::consts::PI * m as f64 / n_theta as f64;
            pts.push([rad * th.cos(), rad * th.sin()]);
        }
    }
    pts
}

/// Legendre transform of a discretely convex dual field, evaluated on the
/// given primal sample points:
/// `u(x) = sup over interior nodes xi of (x . xi - u*(xi))`.
///
/// The supremum ranges over the open ball (boundary nodes carry Dirichlet data
/// and are excluded), so `|Du| < 1` holds automatically. Ties within 1e-12 are
/// broken toward the smallest `|xi|`, then the smallest node index.
pub fn legendre_transform(field: &DualField, samples: &[[f64; 2]]) -> Result<PrimalSurface> {
    let scale = field.max_abs().max(1.0);
    field.check_convexity(1e-7 * scale)?;
    let grid = &field.grid;

    // interior nodes with precomputed coordinates
    let mut nodes: Vec<(usize, [f64; 2], f64)> = Vec::with_capacity(grid.n_interior());
    for node in grid.interior_nodes() {
        nodes.push((node, grid.xi(node), field.values[node]));
    }

    let mut out = Vec::with_capacity(samples.len());
    for &x in samples {
        let mut best_val = f64::NEG_INFINITY;
        let mut best: (usize, [f64; 2]) = (0, [0.0, 0.0]);
        let mut best_r2 = f64::INFINITY;
        for &(node, xi, ustar) in &nodes {
            let val = x[0] * xi[0] + x[1] * xi[1] - ustar;
            let r2 = xi[0] * xi[0] + xi[1] * xi[1];
            if val > best_val + 1e-12 {
                best_val = val;
                best = (node, xi);
                best_r2 = r2;
            } else if val > best_val - 1e-12 && r2 < best_r2 - 1e-15 {
                // tie: prefer the smaller |xi|
                best_val = best_val.max(val);
                best = (node, xi);
                best_r2 = r2;
            }
        }
        let (node, xi) = best;
        let w = w_star(xi);
        let v = field.values[node] / w;
        // raw eigenvalues; degenerate (flat) duals give lambda -> 0 and
        // kappa -> infinity, which the surface certificates then flag
        let m = transformed_hessian(field, node);
        let lambda = sym_eigenvalues(m.a, m.x, m.b);
        let kappa = [1.0 / lambda[1], 1.0 / lambda[0]];
        out.push(PrimalSample {
            x,
            u: best_val,
            grad: xi,
            dual_node: node,
            w,
            v,
            lambda,
            kappa: [kappa[0].min(kappa[1]), kappa[0].max(kappa[1])],
            normal: [xi[0] / w, xi[1] / w, 1.0 / w],
        });
    }
    Ok(PrimalSurface { samples: out })
}

/// Elementary symmetric polynomial `sigma_j` of a list of values.
pub fn elementary_symmetric(vals: &[f64], j: usize) -> f64 {
    if j == 0 {
        return 1.0;
    }
    if j > vals.len() {
        return 0.0;
    }
    // expand prod (1 + t v_i) incrementally
    let mut coef = vec![0.0; j + 1];
    coef[0] = 1.0;
    for &v in vals {
        for p in (1..=j).rev() {
            coef[p] += coef[p - 1] * v;
        }
    }
    coef[j]
}

/// Per-sample defect `sigma_k(kappa) - (-v)^alpha` of the prescribed-curvature
/// equation; zero on exact solutions.
pub fn primal_residual(surface: &PrimalSurface, spec: &ProblemSpec) -> Vec<f64> {
    surface
        .samples
        .iter()
        .map(|s| {
            let sk = elementary_symmetric(&s.kappa, spec.k as usize);
            sk - (-s.v).powf(spec.alpha)
        })
        .collect()
}

/// Discrete conjugate of a primal surface back onto dual points:
/// `u**(xi) = sup over samples (xi . x - u(x))`. Used to probe the Legendre
/// round trip.
pub fn discrete_conjugate(surface: &PrimalSurface, xi: [f64; 2]) -> f64 {
    surface
        .samples
        .iter()
        .map(|s| xi[0] * s.x[0] + xi[1] * s.x[1] - s.u)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn grid(n_r: usize, n_theta: usize) -> Arc<BallGrid> {
        Arc::new(
            BallGrid::build(
                GridSpec { n_r, n_theta, grading_exponent: 2.0, stencil_width: 8 },
                1.0,
            )
            .unwrap(),
        )
    }

    fn uniform_grid(n_r: usize, n_theta: usize) -> Arc<BallGrid> {
        Arc::new(
            BallGrid::build(
                GridSpec { n_r, n_theta, grading_exponent: 1.0, stencil_width: 8 },
                1.0,
            )
            .unwrap(),
        )
    }

    #[test]
    fn gamma_identity_at_origin() {
        let g = eval_gamma_star([0.0, 0.0]).unwrap();
        assert_eq!(g.entries, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn gamma_eigen_and_det() {
        let g = eval_gamma_star([0.6, 0.0]).unwrap();
        let ev = g.eigenvalues();
        assert!((ev[0] - 0.8).abs() < 1e-14);
        assert!((ev[1] - 1.0).abs() < 1e-14);
        assert!((g.det() - 0.8).abs() < 1e-14);
    }

    #[test]
    fn gamma_outside_ball_rejected() {
        assert!(matches!(eval_gamma_star([1.0, 0.0]), Err(Error::OutsideBall(_))));
    }

    #[test]
    fn gamma_det_equals_w_star_randomized() {
        // deterministic low-discrepancy sweep standing in for 1000 random points
        let mut bad = 0;
        for i in 0..1000 {
            let a = (i as f64 * 0.754_877_666_2) % 1.0;
            let b = (i as f64 * 0.569_840_290_998) % 1.0;
            let r = 0.999 * a.sqrt();
            let th = 2.0 * std::f64::consts::PI * b;
            let xi = [r * th.cos(), r * th.sin()];
            let g = eval_gamma_star(xi).unwrap();
            if (g.det() - w_star(xi)).abs() > 1e-12 {
                bad += 1;
            }
        }
        assert_eq!(bad, 0);
    }

    #[test]
    fn gamma_transform_reduces_to_determinant_weight() {
        // det(gamma)^2 w*^2 det(H) = det(w* gamma H gamma) for random SPD H, n = 2
        let seeds = [(1.3, 0.2, 0.9), (2.0, -0.4, 1.1), (0.7, 0.05, 0.8), (3.0, 1.0, 2.5)];
        for (i, &(a, x, b)) in seeds.iter().enumerate() {
            let r = 0.15 + 0.2 * i as f64;
            let xi = [r * 0.8, -r * 0.6];
            let g = eval_gamma_star(xi).unwrap();
            let w = w_star(xi);
            let e = g.entries;
            // m = w * g h g
            let h = [[a, x], [x, b]];
            let gh = [
                [e[0][0] * h[0][0] + e[0][1] * h[1][0], e[0][0] * h[0][1] + e[0][1] * h[1][1]],
                [e[1][0] * h[0][0] + e[1][1] * h[1][0], e[1][0] * h[0][1] + e[1][1] * h[1][1]],
            ];
            let m = [
                [
                    w * (gh[0][0] * e[0][0] + gh[0][1] * e[1][0]),
                    w * (gh[0][0] * e[0][1] + gh[0][1] * e[1][1]),
                ],
                [
                    w * (gh[1][0] * e[0][0] + gh[1][1] * e[1][0]),
                    w * (gh[1][0] * e[0][1] + gh[1][1] * e[1][1]),
                ],
            ];
            let det_m = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let lhs = g.det() * g.det() * w * w * (a * b - x * x);
            assert!((det_m - lhs).abs() < 1e-12, "case {i}: {det_m} vs {lhs}");
        }
    }

    #[test]
    fn hessian_exact_on_radial_quadratic() {
        let g = grid(24, 48);
        let f = DualField::from_fn(g.clone(), 0.9, |r, _| 0.5 * r * r);
        for node in g.interior_nodes() {
            let h = hessian_at(&f, node);
            assert!((h.a - 1.0).abs() < 1e-10, "a at {node}: {}", h.a);
            assert!((h.b - 1.0).abs() < 1e-10, "b at {node}: {}", h.b);
            assert!(h.x.abs() < 1e-10, "x at {node}: {}", h.x);
        }
    }

    #[test]
    fn curvature_radii_of_unit_hyperboloid_dual() {
        // u* = -w* has both curvature radii equal to 1
        let g = grid(96, 96);
        let f = DualField::from_fn(g.clone(), 0.9, |r, _| -(1.0 - r * r).sqrt());
        // pick a node near |xi| = 0.6
        let j = (1..g.n_r()).min_by_key(|&j| ((g.radii[j] - 0.6).abs() * 1e9) as u64).unwrap();
        let node = g.idx(j, 5);
        let lam = curvature_radii(&f, node).unwrap();
        assert!((lam[0] - 1.0).abs() < 2e-3, "{lam:?}");
        assert!((lam[1] - 1.0).abs() < 2e-3, "{lam:?}");
    }

    #[test]
    fn curvature_radii_scale_linearly() {
        let g = grid(96, 96);
        let c = 1.7;
        let f = DualField::from_fn(g.clone(), 0.9, |r, _| -c * (1.0 - r * r).sqrt());
        let j = g.n_r() / 2;
        let node = g.idx(j, 0);
        let lam = curvature_radii(&f, node).unwrap();
        assert!((lam[0] - c).abs() < 5e-3, "{lam:?}");
        assert!((lam[1] - c).abs() < 5e-3, "{lam:?}");
    }

    #[test]
    fn curvature_radii_identity_case() {
        let g = grid(24, 48);
        let f = DualField::from_fn(g.clone(), 0.9, |r, _| 0.5 * r * r);
        let lam = curvature_radii(&f, 0).unwrap();
        assert!((lam[0] - 1.0).abs() < 1e-10 && (lam[1] - 1.0).abs() < 1e-10, "{lam:?}");
    }

    #[test]
    fn support_examples() {
        let g = grid(64, 64);
        let hyp = DualField::from_fn(g.clone(), 0.9, |r, _| -(1.0 - r * r).sqrt());
        for node in [0, g.idx(10, 3), g.idx(40, 50)] {
            let v = support_v(&hyp, node).unwrap();
            assert!((v + 1.0).abs() < 1e-12, "v = {v}");
        }
        let c2 = DualField::from_fn(g.clone(), 0.9, |_, _| -2.0);
        assert!((support_v(&c2, 0).unwrap() + 2.0).abs() < 1e-14);
        // u* = -1.3 at |xi| = 0.6 gives v = -1.625
        let w = (1.0f64 - 0.36).sqrt();
        assert!((-1.3 / w + 1.625).abs() < 1e-12);
    }

    #[test]
    fn legendre_quadratic_self_dual() {
        // u*(xi) = |xi|^2/2 restricted to the ball; at x = (0.5, 0) the
        // maximizer xi = x is a grid node of the uniform 8-level grid.
        let g = uniform_grid(8, 16);
        let f = DualField::from_fn(g.clone(), 0.9, |r, _| 0.5 * r * r);
        let s = legendre_transform(&f, &[[0.5, 0.0]]).unwrap();
        assert!((s.samples[0].u - 0.125).abs() < 1e-14);
        assert_eq!(s.samples[0].grad, [0.5, 0.0]);
    }

    #[test]
    fn legendre_hyperboloid_center_value() {
        let g = grid(64, 64);
        let f = DualField::from_fn(g.clone(), 0.9, |r, _| -(1.0 - r * r).sqrt());
        let s = legendre_transform(&f, &[[0.0, 0.0]]).unwrap();
        // sup of w* over the grid is at the center node: u(0) = 1 exactly
        assert!((s.samples[0].u - 1.0).abs() < 1e-14);
        assert_eq!(s.samples[0].grad, [0.0, 0.0]);
    }

    #[test]
    fn legendre_hyperboloid_matches_dense_1d_oracle() {
        // independent oracle: maximize x . xi + sqrt(1 - |xi|^2) on a dense
        // 1-d radial sweep (the maximizer lies on the ray through x)
        let g = grid(256, 64);
        let f = DualField::from_fn(g.clone(), 0.9, |r, _| -(1.0 - r * r).sqrt());
        for &xv in &[0.4, 1.0, 2.3] {
            let mut oracle = f64::NEG_INFINITY;
            for i in 0..200_000 {
                let t = i as f64 / 200_000.0;
                oracle = oracle.max(xv * t + (1.0 - t * t).sqrt());
            }
            let s = legendre_transform(&f, &[[xv, 0.0]]).unwrap();
            assert!(
                (s.samples[0].u - oracle).abs() < 2e-4,
                "x = {xv}: {} vs oracle {oracle}",
                s.samples[0].u
            );
            // closed form sqrt(1 + x^2)
            assert!((oracle - (1.0 + xv * xv).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn legendre_affine_dual() {
        // u* = a . xi + b: u(x) = |x - a| - b, approached from inside the ball
        let g = grid(512, 128);
        let a = [0.3, 0.0];
        let b = -1.0;
        let f = DualField::from_fn(g.clone(), 0.9, |r, th| {
            a[0] * r * th.cos() + a[1] * r * th.sin() + b
        });
        let s = legendre_transform(&f, &[[2.0, 0.0]]).unwrap();
        // sup over the closed ball would be 2.7; the open-ball grid gets there
        // up to the outermost ring resolution
        assert!((s.samples[0].u - 2.7).abs() < 2e-3, "u = {}", s.samples[0].u);
        assert!(s.samples[0].grad[0].hypot(s.samples[0].grad[1]) < 1.0);
    }

    #[test]
    fn legendre_rejects_concave_input() {
        let g = grid(16, 16);
        let f = DualField::from_fn(g.clone(), 0.9, |r, _| -r * r);
        assert!(matches!(
            legendre_transform(&f, &[[0.0, 0.0]]),
            Err(Error::NonConvexInput { .. })
        ));
    }

    #[test]
    fn legendre_round_trip_on_hyperboloid() {
        let g = grid(64, 64);
        let f = DualField::from_fn(g.clone(), 0.9, |r, _| -(1.0 - r * r).sqrt());
        // the conjugate error scales with the primal sampling resolution, so
        // sample densely enough that (spacing)^2 * kappa / 8 < tol
        let samples = default_primal_samples(50.0, 400, 128);
        let surf = legendre_transform(&f, &samples).unwrap();
        for node in g.interior_nodes() {
            let r = g.r_of(node);
            if r > 0.9 {
                continue;
            }
            let back = discrete_conjugate(&surf, g.xi(node));
            let d = (back - f.values[node]).abs();
            assert!(d < 5e-3, "round trip defect {d} at r = {r}");
        }
    }

    #[test]
    fn sigma_k_reciprocal_identity() {
        // sigma_k(1/lambda) = sigma_{n-k}(lambda) / sigma_n(lambda)
        let cases = [
            (vec![1.7, 0.3, 2.2], 1usize),
            (vec![1.7, 0.3, 2.2], 2),
            (vec![0.5, 4.0], 1),
            (vec![1.0, 2.0, 3.0, 4.0], 3),
        ];
        for (lam, k) in cases {
            let n = lam.len();
            let recip: Vec<f64> = lam.iter().map(|v| 1.0 / v).collect();
            let lhs = elementary_symmetric(&recip, k);
            let rhs = elementary_symmetric(&lam, n - k) / elementary_symmetric(&lam, n);
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0), "{lam:?} k={k}");
        }
    }

    #[test]
    fn primal_residual_on_hyperboloids() {
        use crate::problem::BoundaryData;
        // unit hyperboloid solves the Gauss case for every alpha
        let g = grid(128, 64);
        let f = DualField::from_fn(g.clone(), 0.9, |r, _| -(1.0 - r * r).sqrt());
        let pts = default_primal_samples(3.0, 12, 16);
        let surf = legendre_transform(&f, &pts).unwrap();
        let spec2 = ProblemSpec::new(2, 2, 2.0, BoundaryData::constant(1.0));
        for res in primal_residual(&surf, &spec2) {
            assert!(res.abs() < 5e-3, "gauss residual {res}");
        }
        // radius-c hyperboloid with c^(k+alpha) = C(n, k): n=2, k=1, alpha=1
        // gives c = sqrt(2); sigma_1 = 2/c = sqrt(2) and (-v)^1 = c = sqrt(2)
        let c = 2.0f64.sqrt();
        let fc = DualField::from_fn(g.clone(), 0.9, |r, _| -c * (1.0 - r * r).sqrt());
        let surfc = legendre_transform(&fc, &pts).unwrap();
        let spec1 = ProblemSpec::new(2, 1, 1.0, BoundaryData::constant(1.0));
        for res in primal_residual(&surfc, &spec1) {
            assert!(res.abs() < 5e-3, "quotient residual {res}");
        }
    }

    #[test]
    fn degenerate_curvature_gives_negative_residual() {
        use crate::problem::BoundaryData;
        let spec = ProblemSpec::new(2, 2, 1.0, BoundaryData::constant(1.0));
        let sample = PrimalSample {
            x: [0.0, 0.0],
            u: 1.0,
            grad: [0.0, 0.0],
            dual_node: 0,
            w: 1.0,
            v: -1.5,
            lambda: [1.0, f64::INFINITY],
            kappa: [0.0, 1.0],
            normal: [0.0, 0.0, 1.0],
        };
        let surf = PrimalSurface { samples: vec![sample] };
        let res = primal_residual(&surf, &spec);
        assert!(res[0] < 0.0);
        assert!((res[0] + 1.5).abs() < 1e-12);
    }
}
