//! Discrete gradient flows on quadratic objectives: ordinary vs
//! metric-preconditioned (natural) descent, iteration counting against
//! closed-form contraction rates, coordinate-change invariance checks, and
//! empirically measured regime curves over a grid of shift parameters.

use serde::Serialize;

use crate::expfam::FisherMatrix;
use crate::regime::{beta_of_alpha, ALPHA_MAX};
use crate::spectral::{eig_sym, LuFactor, Matrix, Spectrum, COND_FLOOR};
use crate::{Error, Result};

/// Relative convergence tolerance used by the empirical regime curves.
pub const FLOW_TOL: f64 = 1e-6;
/// Iteration cap used by the empirical regime curves.
pub const FLOW_MAX_ITER: usize = 1_000_000;

/// Quadratic objective L(θ) = ½(θ−θ*)ᵀH(θ−θ*) with a designated start.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    hessian: Matrix,
    target: Vec<f64>,
    start: Vec<f64>,
}

impl QuadraticProblem {
    /// Validates a symmetric positive-definite Hessian and matching vector
    /// dimensions. A start equal to the target is allowed and converges in
    /// zero iterations.
    pub fn new(hessian: Matrix, target: Vec<f64>, start: Vec<f64>) -> Result<Self> {
        let d = hessian.dim();
        if target.len() != d || start.len() != d {
            return Err(Error::Dimension(format!(
                "vectors of length {}/{} for a {d}-dimensional Hessian",
                target.len(),
                start.len()
            )));
        }
        if !hessian.is_symmetric(1e-10) {
            return Err(Error::Domain("Hessian must be symmetric".into()));
        }
        let spectrum = eig_sym(&hessian)?;
        if spectrum.lambda_min() <= COND_FLOOR * spectrum.lambda_max().abs() {
            return Err(Error::Degenerate(format!(
                "Hessian is not positive definite: lambda_min = {:.3e}",
                spectrum.lambda_min()
            )));
        }
        Ok(Self { hessian, target, start })
    }

    pub fn dim(&self) -> usize {
        self.hessian.dim()
    }

    pub fn hessian(&self) -> &Matrix {
        &self.hessian
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }
}

/// Preconditioning metric of the flow.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowMetric {
    /// Ordinary gradient descent.
    Identity,
    /// Natural-gradient descent under a dense symmetric PD metric.
    Dense(Matrix),
}

/// Step-size policy for empirical regime curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EtaPolicy {
    /// One η for the whole grid, stability-limited by the worst point.
    Fixed,
    /// η = 1/ρ(g⁻¹H) recomputed at every grid point.
    Normalized,
}

/// Recorded trajectory of one flow run. `iterates[0]` is the start vector;
/// when the run converged, `iterations_to_tol` steps were taken.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub iterates: Vec<Vec<f64>>,
    pub step_size: f64,
    pub iterations_to_tol: usize,
    pub converged: bool,
}

/// One grid point of an empirical regime curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Iteration counts over the α grid and the measured minimizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCurve {
    /// α of the (first) grid point with the fewest iterations.
    pub argmin: f64,
    pub points: Vec<CurvePoint>,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// L(θ) = ½(θ−θ*)ᵀH(θ−θ*).
pub fn quadratic_loss(problem: &QuadraticProblem, theta: &[f64]) -> Result<f64> {
    let e = sub(theta, &problem.target);
    let he = problem.hessian.matvec(&e)?;
    Ok(0.5 * e.iter().zip(&he).map(|(a, b)| a * b).sum::<f64>())
}

enum SolvedMetric {
    Identity,
    Factored(LuFactor),
}

impl SolvedMetric {
    fn prepare(metric: &FlowMetric) -> Result<Self> {
        match metric {
            FlowMetric::Identity => Ok(SolvedMetric::Identity),
            FlowMetric::Dense(m) => Ok(SolvedMetric::Factored(LuFactor::new(m)?)),
        }
    }

    fn apply_inverse(&self, v: Vec<f64>) -> Result<Vec<f64>> {
        match self {
            SolvedMetric::Identity => Ok(v),
            SolvedMetric::Factored(lu) => lu.solve(&v),
        }
    }
}

fn step_with(
    theta: &[f64],
    hessian: &Matrix,
    target: &[f64],
    metric: &SolvedMetric,
    eta: f64,
) -> Result<Vec<f64>> {
    let grad = hessian.matvec(&sub(theta, target))?;
    let dir = metric.apply_inverse(grad)?;
    Ok(theta.iter().zip(&dir).map(|(t, d)| t - eta * d).collect())
}

/// One explicit-Euler step θ − η·metric⁻¹·H·(θ−θ*); the metric inverse is
/// applied by a linear solve.
pub fn gradient_step(
    theta: &[f64],
    problem: &QuadraticProblem,
    metric: &FlowMetric,
    eta: f64,
) -> Result<Vec<f64>> {
    if theta.len() != problem.dim() {
        return Err(Error::Dimension(format!(
            "theta length {} for a {}-dimensional problem",
            theta.len(),
            problem.dim()
        )));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("step size eta = {eta} must be positive")));
    }
    let solved = SolvedMetric::prepare(metric)?;
    step_with(theta, &problem.hessian, &problem.target, &solved, eta)
}

/// Largest stable step size 1/ρ(metric⁻¹H); with this η the fastest mode is
/// annihilated in one step and the slowest contracts by the spectral ratio.
pub fn normalized_eta(metric: &FlowMetric, hessian: &Matrix) -> Result<f64> {
    let rho = match metric {
        FlowMetric::Identity => eig_sym(hessian)?.lambda_max(),
        FlowMetric::Dense(m) => {
            let ms = eig_sym(m)?;
            if ms.lambda_min() <= COND_FLOOR * ms.lambda_max().abs() {
                return Err(Error::Degenerate(
                    "metric is not positive definite".into(),
                ));
            }
            // Similarity transform B = M^{-1/2} H M^{-1/2} shares the
            // spectrum of M⁻¹H and stays symmetric.
            let d = m.dim();
            let mut inv_sqrt = Matrix::zeros(d);
            for i in 0..d {
                for j in 0..d {
                    let mut sum = 0.0;
                    for k in 0..d {
                        let v = ms.eigenvector(k);
                        sum += v[i] * v[j] / ms.eigenvalues()[k].sqrt();
                    }
                    inv_sqrt.set(i, j, sum);
                }
            }
            let b = inv_sqrt.matmul(hessian)?.matmul(&inv_sqrt)?;
            eig_sym(&b)?.lambda_max()
        }
    };
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Degenerate(format!(
            "preconditioned spectral radius {rho} is not positive"
        )));
    }
    Ok(1.0 / rho)
}

fn flow_loop(
    problem: &QuadraticProblem,
    metric: &FlowMetric,
    eta: f64,
    tol: f64,
    max_iter: usize,
    keep_iterates: bool,
) -> Result<FlowTrace> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("tolerance {tol} outside (0, 1)")));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("step size eta = {eta} must be positive")));
    }
    let solved = SolvedMetric::prepare(metric)?;
    let mut theta = problem.start.clone();
    let mut dist = norm(&sub(&theta, &problem.target));
    let threshold = tol * dist;
    let mut iterates = vec![theta.clone()];
    let mut iterations = 0usize;
    let mut growth_streak = 0usize;
    while dist > threshold && iterations < max_iter {
        theta = step_with(&theta, &problem.hessian, &problem.target, &solved, eta)?;
        iterations += 1;
        let next = norm(&sub(&theta, &problem.target));
        if !next.is_finite() {
            return Err(Error::Instability(format!(
                "flow diverged to a non-finite state after {iterations} steps"
            )));
        }
        if next > dist {
            growth_streak += 1;
            if growth_streak >= 10 {
                return Err(Error::Instability(format!(
                    "distance grew for 10 consecutive steps (eta = {eta})"
                )));
            }
        } else {
            growth_streak = 0;
        }
        dist = next;
        if keep_iterates {
            iterates.push(theta.clone());
        }
    }
    if !keep_iterates {
        iterates.push(theta);
    }
    Ok(FlowTrace {
        iterates,
        step_size: eta,
        iterations_to_tol: iterations,
        converged: dist <= threshold,
    })
}

/// Runs the flow until ‖θ_t − θ*‖ ≤ tol·‖θ₀ − θ*‖ or `max_iter` steps.
/// Ten consecutive distance increases abort with an instability error;
/// hitting `max_iter` returns an unconverged trace.
pub fn run_flow(
    problem: &QuadraticProblem,
    metric: &FlowMetric,
    eta: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FlowTrace> {
    flow_loop(problem, metric, eta, tol, max_iter, true)
}

fn transformed_loss(
    problem: &QuadraticProblem,
    a: &Matrix,
) -> Result<(Matrix, Vec<f64>, Vec<f64>, Matrix)> {
    if a.dim() != problem.dim() {
        return Err(Error::Dimension(format!(
            "reparameterization is {}-dimensional, problem is {}-dimensional",
            a.dim(),
            problem.dim()
        )));
    }
    let ainv = LuFactor::new(a)?.inverse()?;
    let ht = ainv.transpose().matmul(&problem.hessian)?.matmul(&ainv)?;
    let phi_target = a.matvec(&problem.target)?;
    let phi_start = a.matvec(&problem.start)?;
    Ok((ht, phi_target, phi_start, ainv))
}

/// Runs the natural-gradient flow in the original coordinates (metric F)
/// and in φ = Aθ coordinates (metric A⁻ᵀFA⁻¹, loss pushed forward), and
/// returns max_t ‖φ_t − Aθ_t‖. For the natural gradient this deviation is a
/// roundoff-level quantity; A must be invertible with 2-norm condition
/// number at most 1e3.
pub fn reparam_invariance_check(
    problem: &QuadraticProblem,
    fisher: &FisherMatrix,
    a: &Matrix,
    steps: usize,
) -> Result<f64> {
    let ata = a.transpose().matmul(a)?;
    let s = eig_sym(&ata)?;
    if s.lambda_min() <= COND_FLOOR * s.lambda_max().abs() {
        return Err(Error::Degenerate("reparameterization matrix is singular".into()));
    }
    let cond2 = (s.lambda_max() / s.lambda_min()).sqrt();
    if cond2 > 1e3 {
        return Err(Error::Domain(format!(
            "condition number {cond2:.3e} exceeds the well-posedness bound 1e3"
        )));
    }
    let (ht, phi_target, phi_start, ainv) = transformed_loss(problem, a)?;
    let gt = ainv.transpose().matmul(fisher.matrix())?.matmul(&ainv)?;
    let eta = normalized_eta(&FlowMetric::Dense(fisher.matrix().clone()), &problem.hessian)?;

    let lu_theta = SolvedMetric::Factored(LuFactor::new(fisher.matrix())?);
    let lu_phi = SolvedMetric::Factored(LuFactor::new(&gt)?);
    let mut theta = problem.start.clone();
    let mut phi = phi_start;
    let mut max_dev = 0.0f64;
    for _ in 0..steps {
        theta = step_with(&theta, &problem.hessian, &problem.target, &lu_theta, eta)?;
        phi = step_with(&phi, &ht, &phi_target, &lu_phi, eta)?;
        let pushed = a.matvec(&theta)?;
        max_dev = max_dev.max(norm(&sub(&phi, &pushed)));
    }
    Ok(max_dev)
}

/// Negative control: the same two-chart experiment with the identity metric
/// (ordinary gradient descent) and an explicit step size. Plain gradients
/// are not equivariant, so the deviation is generically large; runs that
/// blow past 1e6 (or leave the finite range) return early.
pub fn ordinary_reparam_deviation(
    problem: &QuadraticProblem,
    a: &Matrix,
    eta: f64,
    steps: usize,
) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("step size eta = {eta} must be positive")));
    }
    let (ht, phi_target, phi_start, _) = transformed_loss(problem, a)?;
    let identity = SolvedMetric::Identity;
    let mut theta = problem.start.clone();
    let mut phi = phi_start;
    let mut max_dev = 0.0f64;
    for _ in 0..steps {
        theta = step_with(&theta, &problem.hessian, &problem.target, &identity, eta)?;
        phi = step_with(&phi, &ht, &phi_target, &identity, eta)?;
        let pushed = a.matvec(&theta)?;
        let dev = norm(&sub(&phi, &pushed));
        if !dev.is_finite() {
            return Ok(f64::INFINITY);
        }
        max_dev = max_dev.max(dev);
        if max_dev > 1e6 {
            return Ok(max_dev);
        }
    }
    Ok(max_dev)
}

/// Measures iterations-to-tolerance of the natural-gradient flow under
/// g(β(α)) = F² + β(α)F for each α in the grid, with H = I, target 0, and
/// the normalized all-ones start. Returns the full curve and the first grid
/// argmin. `Fixed` uses one η sized for the most demanding grid point;
/// `Normalized` re-sizes η at every point.
pub fn empirical_alpha(
    spectrum: &Spectrum,
    policy: EtaPolicy,
    alpha_grid: &[f64],
) -> Result<EmpiricalCurve> {
    if alpha_grid.is_empty() {
        return Err(Error::Domain("alpha grid is empty".into()));
    }
    for &alpha in alpha_grid {
        if !(0.0..=ALPHA_MAX).contains(&alpha) {
            return Err(Error::Domain(format!(
                "grid value {alpha} outside [0, {ALPHA_MAX}]"
            )));
        }
    }
    let (lo, hi) = (spectrum.lambda_min(), spectrum.lambda_max());
    if lo <= COND_FLOOR * hi.abs() || hi <= 0.0 {
        return Err(Error::Degenerate("spectrum is not positive definite".into()));
    }
    let d = spectrum.dim();
    let start = vec![1.0 / (d as f64).sqrt(); d];
    let target = vec![0.0; d];
    let hessian = Matrix::identity(d);

    // mu_min(g) = lambda_min(lambda_min + beta) is the stability budget.
    let beta_floor = alpha_grid
        .iter()
        .map(|&a| beta_of_alpha(a).expect("grid validated"))
        .fold(f64::INFINITY, f64::min);
    let eta_fixed = lo * (lo + beta_floor);

    let mut points = Vec::with_capacity(alpha_grid.len());
    let mut best: Option<CurvePoint> = None;
    for &alpha in alpha_grid {
        let beta = beta_of_alpha(alpha)?;
        let mut metric = Matrix::zeros(d);
        for k in 0..d {
            let lambda = spectrum.eigenvalues()[k];
            let mu = lambda * (lambda + beta);
            let v = spectrum.eigenvector(k);
            for i in 0..d {
                for j in 0..d {
                    metric.set(i, j, metric.get(i, j) + mu * v[i] * v[j]);
                }
            }
        }
        let eta = match policy {
            EtaPolicy::Fixed => eta_fixed,
            EtaPolicy::Normalized => lo * (lo + beta),
        };
        let problem = QuadraticProblem::new(hessian.clone(), target.clone(), start.clone())?;
        let trace = flow_loop(
            &problem,
            &FlowMetric::Dense(metric),
            eta,
            FLOW_TOL,
            FLOW_MAX_ITER,
            false,
        )?;
        let point = CurvePoint {
            alpha,
            iterations: trace.iterations_to_tol,
            converged: trace.converged,
        };
        points.push(point);
        if best.is_none_or(|b| point.iterations < b.iterations) {
            best = Some(point);
        }
    }
    Ok(EmpiricalCurve {
        argmin: best.expect("non-empty grid").alpha,
        points,
    })
}
