//! Problem instances: dimension, curvature order, exponent, boundary data and
//! continuation schedules.
//!
//! A [`ProblemSpec`] describes one prescribed-curvature problem
//! `sigma_k(kappa) = (-<X, nu>)^alpha` for an entire spacelike convex graph with
//! asymptotic boundary data `u(x) - |x| -> phi(x/|x|)`. On the dual side the
//! instance becomes a Dirichlet problem on the unit ball with boundary value
//! `phi* = -phi`.

use crate::error::{Error, Result};

/// Which dual equation governs the instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// `k = n`: Monge-Ampere (determinant) case.
    Gauss,
    /// `k < n`: Hessian-quotient case.
    Quotient,
}

/// Boundary data `phi` on the circle, as a finite cosine series
/// `phi(theta) = c0 + sum_m a_m cos(m theta + psi_m)`.
///
/// Finite series keep `phi` analytic, so the `C^2` hypothesis holds by
/// construction and the dual data `phi* = -phi` is exactly evaluable together
/// with its derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub c0: f64,
    /// `(frequency m, amplitude a_m, phase psi_m)` terms with `m >= 1`.
    pub terms: Vec<(u32, f64, f64)>,
}

impl BoundaryData {
    pub fn constant(c0: f64) -> Self {
        BoundaryData { c0, terms: Vec::new() }
    }

    pub fn cosine(c0: f64, terms: Vec<(u32, f64, f64)>) -> Self {
        BoundaryData { c0, terms }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    /// `phi(theta)`.
    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = self.c0;
        for &(m, a, psi) in &self.terms {
            v += a * (m as f64 * theta + psi).cos();
        }
        v
    }

    /// Dual boundary value `phi*(theta) = -phi(theta)`.
    pub fn eval_dual(&self, theta: f64) -> f64 {
        -self.eval(theta)
    }

    /// `phi'(theta)`.
    pub fn eval_deriv(&self, theta: f64) -> f64 {
        let mut v = 0.0;
        for &(m, a, psi) in &self.terms {
            v -= a * m as f64 * (m as f64 * theta + psi).sin();
        }
        v
    }

    /// Minimum of `phi` over a dense angular sample.
    pub fn min_on_circle(&self) -> f64 {
        let samples = 4096;
        let mut min = f64::INFINITY;
        for i in 0..samples {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
            min = min.min(self.eval(theta));
        }
        min
    }

    /// Maximum of `phi` over a dense angular sample.
    pub fn max_on_circle(&self) -> f64 {
        let samples = 4096;
        let mut max = f64::NEG_INFINITY;
        for i in 0..samples {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
            max = max.max(self.eval(theta));
        }
        max
    }

    /// Harmonic extension of `phi*` to the unit disk,
    /// `-c0 - sum_m a_m r^m cos(m theta + psi_m)`.
    ///
    /// Exact for finite cosine series; used to seed Newton iterates with the
    /// correct boundary trace.
    pub fn harmonic_extension_dual(&self, r: f64, theta: f64) -> f64 {
        let mut v = -self.c0;
        for &(m, a, psi) in &self.terms {
            v -= a * r.powi(m as i32) * (m as f64 * theta + psi).cos();
        }
        v
    }

    /// `sum_m m^2 |a_m|`, a bound on the Hessian of the harmonic extension.
    pub fn hessian_bound(&self) -> f64 {
        self.terms.iter().map(|&(m, a, _)| (m as f64) * (m as f64) * a.abs()).sum()
    }
}

/// A full mathematical instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    /// Ambient graph dimension `n >= 2`.
    pub n: u32,
    /// Curvature order `1 <= k <= n`.
    pub k: u32,
    /// Exponent `0 < alpha <= k`.
    pub alpha: f64,
    /// Asymptotic boundary data.
    pub phi: BoundaryData,
}

impl ProblemSpec {
    pub fn new(n: u32, k: u32, alpha: f64, phi: BoundaryData) -> Self {
        ProblemSpec { n, k, alpha, phi }
    }

    pub fn case_tag(&self) -> CaseTag {
        if self.k == self.n {
            CaseTag::Gauss
        } else {
            CaseTag::Quotient
        }
    }

    /// `-C0 = max phi* < 0`, the upper barrier constant.
    pub fn c0(&self) -> f64 {
        self.phi.min_on_circle()
    }
}

/// One violated constraint found by [`validate_spec`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    AlphaOutOfRange { alpha: f64, k: u32 },
    NonpositivePhi { min_phi: f64 },
    BadOrder { k: u32, n: u32 },
    BadDimension { n: u32 },
}

/// Outcome of validating a [`ProblemSpec`]: either accepted, or the exhaustive
/// list of violated constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_accepted(&self) -> bool {
        self.violations.is_empty()
    }

    /// Converts the first violation into an [`Error`], or `Ok(())`.
    pub fn into_result(self) -> Result<()> {
        match self.violations.into_iter().next() {
            None => Ok(()),
            Some(Violation::AlphaOutOfRange { alpha, k }) => {
                Err(Error::AlphaOutOfRange { alpha, k })
            }
            Some(Violation::NonpositivePhi { min_phi }) => Err(Error::NonpositivePhi { min_phi }),
            Some(Violation::BadOrder { k, n }) => Err(Error::BadOrder { k, n }),
            Some(Violation::BadDimension { n }) => {
                Err(Error::ValidationError(format!("dimension n = {n} must be >= 2")))
            }
        }
    }
}

/// Checks every constraint predicate of a [`ProblemSpec`] and reports the
/// exhaustive list of violations.
///
/// Accepts iff `n >= 2`, `1 <= k <= n`, `0 < alpha <= k`, and `phi > 0` on a
/// dense angular sample.
pub fn validate_spec(spec: &ProblemSpec) -> ValidationResult {
    let mut violations = Vec::new();
    if spec.n < 2 {
        violations.push(Violation::BadDimension { n: spec.n });
    }
    if spec.k < 1 || spec.k > spec.n {
        violations.push(Violation::BadOrder { k: spec.k, n: spec.n });
    }
    if !(spec.alpha > 0.0 && spec.alpha <= spec.k as f64) {
        violations.push(Violation::AlphaOutOfRange { alpha: spec.alpha, k: spec.k });
    }
    let min_phi = spec.phi.min_on_circle();
    if min_phi <= 0.0 {
        violations.push(Violation::NonpositivePhi { min_phi });
    }
    ValidationResult { violations }
}

/// Evaluates `phi(theta)`.
pub fn eval_phi(phi: &BoundaryData, theta: f64) -> f64 {
    phi.eval(theta)
}

/// Continuation schedule toward the degenerate limit, plus Newton controls.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationSchedule {
    /// Gauss case: regularization parameters, strictly increasing in `[1/2, 1)`.
    pub s_values: Vec<f64>,
    /// Quotient case: ball radii, strictly increasing in `(0, 1)`.
    pub r_values: Vec<f64>,
    /// Newton acceptance tolerance on the scaled max residual.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Smallest damping factor tried before giving up.
    pub damping_floor: f64,
}

impl Default for ContinuationSchedule {
    fn default() -> Self {
        ContinuationSchedule {
            s_values: vec![0.5, 0.75, 0.9, 0.96, 0.99, 0.997, 0.999],
            r_values: vec![0.5, 0.75, 0.9, 0.96, 0.99],
            newton_tol: 1e-9,
            max_newton_iters: 40,
            damping_floor: 1e-3,
        }
    }
}

impl ContinuationSchedule {
    pub fn validate(&self) -> Result<()> {
        let incr = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !self.s_values.iter().all(|&s| (0.5..1.0).contains(&s)) || !incr(&self.s_values) {
            return Err(Error::ValidationError(
                "schedule.s_values must be strictly increasing in [1/2, 1)".into(),
            ));
        }
        if !self.r_values.iter().all(|&r| (0.0..1.0).contains(&r) && r > 0.0)
            || !incr(&self.r_values)
        {
            return Err(Error::ValidationError(
                "schedule.r_values must be strictly increasing in (0, 1)".into(),
            ));
        }
        if self.newton_tol <= 0.0 || self.damping_floor <= 0.0 || self.damping_floor > 1.0 {
            return Err(Error::ValidationError("bad Newton controls".into()));
        }
        Ok(())
    }
}
