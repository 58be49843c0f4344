//! Regime-parameter analysis for the combined metric g(c) = F² + cF.
//!
//! The shift c and the regime parameter α ∈ [0,1) are linked by
//! c = β(α) = α²/(1−α). Convergence-time functionals T(c) built from the
//! eigenvalues μ_k = λ_k(λ_k + c) of g(c) are minimized either in closed
//! form (c* = max(0, w·λ_max − (w+1)·λ_min)) or numerically over α.

use serde::Serialize;

use crate::spectral::{Spectrum, COND_FLOOR};
use crate::{Error, Result};

/// Upper cutoff of the numeric α search; β(α) diverges at α = 1.
pub const ALPHA_MAX: f64 = 0.999;
/// Coarse-grid resolution of the numeric α search.
pub const GRID_POINTS: usize = 1000;
/// Golden-section refinement stops when the bracket is narrower than this.
pub const ALPHA_TOL: f64 = 1e-6;

/// Scalar convergence-time functional, evaluated from the extreme per-mode
/// time scales of the preconditioned flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ModelKind {
    /// Condition number times largest scale: (μ_max/μ_min)·μ_max.
    A,
    /// Condition number only: μ_max/μ_min.
    B,
    /// Largest scale only: μ_max.
    C,
    /// Mixed scaling: μ_max/√μ_min.
    D,
    /// Generalized family (μ_max/μ_min)^w·μ_max; W(1) coincides with A.
    W(f64),
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::A => write!(f, "A"),
            ModelKind::B => write!(f, "B"),
            ModelKind::C => write!(f, "C"),
            ModelKind::D => write!(f, "D"),
            ModelKind::W(w) => write!(f, "W({w})"),
        }
    }
}

/// Which loss Hessian the flow is preconditioning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HessianMode {
    /// H = I: per-mode time scales are μ_k = λ_k(λ_k + c).
    Isotropic,
    /// H = F: the per-mode rates of g⁻¹F are 1/(λ_k + c), so the
    /// functionals consume those rates in place of μ_k and every model
    /// improves monotonically as c grows.
    Fisher,
}

impl std::fmt::Display for HessianMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HessianMode::Isotropic => write!(f, "isotropic"),
            HessianMode::Fisher => write!(f, "fisher"),
        }
    }
}

/// A convergence-time functional T(c) over a Fisher spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceModel {
    kind: ModelKind,
    hessian_mode: HessianMode,
}

impl ConvergenceModel {
    pub fn new(kind: ModelKind, hessian_mode: HessianMode) -> Result<Self> {
        if let ModelKind::W(w) = kind {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Domain(format!("exponent w = {w} must be positive")));
            }
        }
        Ok(Self { kind, hessian_mode })
    }

    /// Default functional: Model A with an isotropic Hessian.
    pub fn model_a() -> Self {
        Self { kind: ModelKind::A, hessian_mode: HessianMode::Isotropic }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn hessian_mode(&self) -> HessianMode {
        self.hessian_mode
    }
}

impl Default for ConvergenceModel {
    fn default() -> Self {
        Self::model_a()
    }
}

/// Result of the numeric α minimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaOptimum {
    /// Minimizing α; boundary minima are reported exactly at 0 or ALPHA_MAX.
    pub alpha: f64,
    /// T(β(α)) at the minimizer.
    pub value: f64,
    /// True when the coarse grid placed the minimum on an endpoint.
    pub boundary: bool,
}

/// Per-observer regime summary: spectrum extremes, gap, closed-form and
/// numeric regime parameters, and the convergence-time speedup.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeAnalysis {
    pub topology: String,
    #[serde(rename = "J")]
    pub j: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    #[serde(rename = "cond_F")]
    pub cond_f: f64,
    /// Signed gap Δ = λ_max − 2λ_min; positive exactly when cond_f > 2.
    pub gap: f64,
    pub alpha_pred: f64,
    pub alpha_num: f64,
    pub abs_err: f64,
    pub c_star: f64,
    /// T(0)/T(c*); equals 1 whenever c* = 0.
    pub speedup: f64,
}

/// β(α) = α²/(1−α): the metric shift realized by regime parameter α.
pub fn beta_of_alpha(alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} outside [0, 1)")));
    }
    Ok(alpha * alpha / (1.0 - alpha))
}

/// Inverse of `beta_of_alpha`: α(c) = (−c + √(c(c+4)))/2 for c ≥ 0.
pub fn alpha_of_c(c: f64) -> f64 {
    (-c + (c * (c + 4.0)).sqrt()) / 2.0
}

fn extremes(spectrum: &Spectrum) -> Result<(f64, f64)> {
    let (lo, hi) = (spectrum.lambda_min(), spectrum.lambda_max());
    if !(lo > COND_FLOOR * hi && hi > 0.0) {
        return Err(Error::Degenerate(format!(
            "spectrum [{lo:.3e}, {hi:.3e}] is not positive definite"
        )));
    }
    Ok((lo, hi))
}

/// Closed-form optimal shift c* = max(0, w·λ_max − (w+1)·λ_min) for the
/// generalized functional (μ_max/μ_min)^w·μ_max; zero (classical regime)
/// whenever λ_max/λ_min ≤ (w+1)/w.
pub fn c_star(spectrum: &Spectrum, w: f64) -> Result<f64> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::Domain(format!("exponent w = {w} must be positive")));
    }
    let (lo, hi) = extremes(spectrum)?;
    Ok((w * hi - (w + 1.0) * lo).max(0.0))
}

fn time_from_scales(slowest: f64, fastest: f64, kind: ModelKind) -> f64 {
    let ratio = slowest / fastest;
    match kind {
        ModelKind::A => ratio * slowest,
        ModelKind::B => ratio,
        ModelKind::C => slowest,
        ModelKind::D => slowest / fastest.sqrt(),
        ModelKind::W(w) => ratio.powf(w) * slowest,
    }
}

/// Evaluates T(c) for the given model on a positive-definite spectrum.
pub fn convergence_time(spectrum: &Spectrum, c: f64, model: &ConvergenceModel) -> Result<f64> {
    if c.is_nan() || c < 0.0 {
        return Err(Error::Domain(format!("shift c = {c} must be nonnegative")));
    }
    let (lo, hi) = extremes(spectrum)?;
    let (slowest, fastest) = match model.hessian_mode {
        HessianMode::Isotropic => (hi * (hi + c), lo * (lo + c)),
        // Rates of g⁻¹F are 1/(λ+c); slowest mode has the largest 1/rate.
        HessianMode::Fisher => (1.0 / (lo + c), 1.0 / (hi + c)),
    };
    Ok(time_from_scales(slowest, fastest, model.kind))
}

/// Minimizes T(β(α)) over α ∈ [0, ALPHA_MAX]: 1000-point coarse grid, then
/// golden-section refinement to |Δα| ≤ 1e-6. Deterministic; minima on a
/// grid endpoint are reported exactly at the boundary value.
pub fn minimize_alpha_numeric(
    spectrum: &Spectrum,
    model: &ConvergenceModel,
) -> Result<AlphaOptimum> {
    extremes(spectrum)?;
    let eval = |alpha: f64| -> f64 {
        // alpha stays inside [0, ALPHA_MAX] by construction.
        let beta = alpha * alpha / (1.0 - alpha);
        convergence_time(spectrum, beta, model).expect("validated spectrum and shift")
    };

    let step = ALPHA_MAX / (GRID_POINTS - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..GRID_POINTS {
        let value = eval(i as f64 * step);
        if value < best.1 {
            best = (i, value);
        }
    }

    if best.0 == 0 || best.0 == GRID_POINTS - 1 {
        let alpha = if best.0 == 0 { 0.0 } else { ALPHA_MAX };
        return Ok(AlphaOptimum { alpha, value: best.1, boundary: true });
    }

    let mut a = (best.0 - 1) as f64 * step;
    let mut b = (best.0 + 1) as f64 * step;
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    while b - a > ALPHA_TOL {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2);
        }
    }
    let alpha = 0.5 * (a + b);
    Ok(AlphaOptimum { alpha, value: eval(alpha), boundary: false })
}

/// Closed-form Model A speedup T(0)/T(c*) = κ²/(4(κ−1)), cross-checked
/// against two direct evaluations of `convergence_time`. Requires an
/// interior optimum, i.e. κ > 2.
pub fn speedup_at_optimum(spectrum: &Spectrum) -> Result<f64> {
    let (lo, hi) = extremes(spectrum)?;
    let kappa = hi / lo;
    if kappa <= 2.0 {
        return Err(Error::Domain(format!(
            "condition number {kappa:.6} has no interior optimum (threshold 2)"
        )));
    }
    let closed = kappa * kappa / (4.0 * (kappa - 1.0));
    let model = ConvergenceModel::model_a();
    let cs = c_star(spectrum, 1.0)?;
    let direct = convergence_time(spectrum, 0.0, &model)? / convergence_time(spectrum, cs, &model)?;
    if (closed - direct).abs() > 1e-9 * closed.max(1.0) {
        return Err(Error::Numeric(format!(
            "speedup cross-check failed: closed form {closed} vs direct ratio {direct}"
        )));
    }
    Ok(closed)
}

/// Full regime summary for one observer: closed-form α_pred from c*, the
/// numeric minimizer α_num, and the speedup ratio T(0)/T(c*).
pub fn analyze(
    topology: &str,
    j: f64,
    spectrum: &Spectrum,
    model: &ConvergenceModel,
    w: f64,
) -> Result<RegimeAnalysis> {
    let (lo, hi) = extremes(spectrum)?;
    let cond_f = hi / lo;
    let cs = c_star(spectrum, w)?;
    let alpha_pred = alpha_of_c(cs);
    let optimum = minimize_alpha_numeric(spectrum, model)?;
    let speedup =
        convergence_time(spectrum, 0.0, model)? / convergence_time(spectrum, cs, model)?;
    Ok(RegimeAnalysis {
        topology: topology.to_string(),
        j,
        lambda_min: lo,
        lambda_max: hi,
        cond_f,
        gap: hi - 2.0 * lo,
        alpha_pred,
        alpha_num: optimum.alpha,
        abs_err: (alpha_pred - optimum.alpha).abs(),
        c_star: cs,
        speedup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn spec2(lo: f64, hi: f64) -> Spectrum {
        Spectrum::diagonal(&[lo, hi]).unwrap()
    }

    fn k3_spectrum() -> Spectrum {
        Spectrum::diagonal(&[
            0.3850205410298747,
            0.385020541029875,
            1.0953597130746866,
        ])
        .unwrap()
    }

    #[test]
    fn beta_alpha_mapping() {
        close(beta_of_alpha(0.0).unwrap(), 0.0, 0.0);
        close(beta_of_alpha(0.5).unwrap(), 0.5, 1e-15);
        let golden = (5.0f64.sqrt() - 1.0) / 2.0;
        close(beta_of_alpha(golden).unwrap(), 1.0, 1e-15);
        assert!(beta_of_alpha(1.0).is_err());
        assert!(beta_of_alpha(-0.1).is_err());
        assert!(beta_of_alpha(f64::NAN).is_err());

        close(alpha_of_c(0.0), 0.0, 0.0);
        close(alpha_of_c(0.5), 0.5, 1e-15);
        close(alpha_of_c(1.0), 0.6180339887498949, 1e-15);
        for i in 0..=99 {
            let alpha = 0.01 * i as f64;
            close(alpha_of_c(beta_of_alpha(alpha).unwrap()), alpha, 1e-12);
        }
    }

    #[test]
    fn optimal_shift_closed_form() {
        close(c_star(&spec2(1.0, 2.0), 1.0).unwrap(), 0.0, 0.0);
        close(c_star(&spec2(1.0, 3.0), 1.0).unwrap(), 1.0, 0.0);
        let cs = c_star(&k3_spectrum(), 1.0).unwrap();
        close(cs, 0.3253186310149372, 1e-12);
        close(alpha_of_c(cs), 0.4304483340269945, 1e-12);
        // Generalized exponent shifts the threshold to (w+1)/w.
        close(c_star(&spec2(1.0, 3.0), 2.0).unwrap(), 3.0, 0.0);
        close(c_star(&spec2(1.0, 1.4), 2.0).unwrap(), 0.0, 0.0);
        assert!(c_star(&spec2(1.0, 3.0), 0.0).is_err());
        assert!(c_star(&Spectrum::diagonal(&[0.0, 1.0]).unwrap(), 1.0).is_err());
    }

    #[test]
    fn shift_scale_covariance() {
        let s = 2.5;
        let base = c_star(&spec2(1.0, 3.0), 1.0).unwrap();
        let scaled = c_star(&spec2(s, 3.0 * s), 1.0).unwrap();
        close(scaled, s * base, 1e-12);
        // Threshold condition is scale-free: either side of it stays put.
        assert_eq!(c_star(&spec2(s, 2.0 * s), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn convergence_time_examples() {
        let m = ConvergenceModel::model_a();
        close(convergence_time(&spec2(1.0, 3.0), 0.0, &m).unwrap(), 81.0, 1e-12);
        close(convergence_time(&spec2(1.0, 3.0), 1.0, &m).unwrap(), 72.0, 1e-12);

        let b = ConvergenceModel::new(ModelKind::B, HessianMode::Isotropic).unwrap();
        for c in [0.0, 0.7, 5.0] {
            close(convergence_time(&spec2(1.0, 1.0), c, &b).unwrap(), 1.0, 1e-15);
        }
        let c_model = ConvergenceModel::new(ModelKind::C, HessianMode::Isotropic).unwrap();
        close(convergence_time(&spec2(1.0, 3.0), 2.0, &c_model).unwrap(), 15.0, 1e-12);
        let d = ConvergenceModel::new(ModelKind::D, HessianMode::Isotropic).unwrap();
        close(convergence_time(&spec2(1.0, 3.0), 0.0, &d).unwrap(), 9.0, 1e-12);
        let w2 = ConvergenceModel::new(ModelKind::W(2.0), HessianMode::Isotropic).unwrap();
        close(convergence_time(&spec2(1.0, 3.0), 0.0, &w2).unwrap(), 729.0, 1e-9);

        assert!(convergence_time(&spec2(1.0, 3.0), -0.1, &m).is_err());
        assert!(convergence_time(&spec2(1.0, 3.0), f64::NAN, &m).is_err());
        assert!(ConvergenceModel::new(ModelKind::W(0.0), HessianMode::Isotropic).is_err());
    }

    #[test]
    fn fisher_hessian_uses_rates() {
        let m = ConvergenceModel::new(ModelKind::A, HessianMode::Fisher).unwrap();
        close(convergence_time(&spec2(1.0, 3.0), 0.0, &m).unwrap(), 3.0, 1e-12);
        close(convergence_time(&spec2(1.0, 3.0), 1.0, &m).unwrap(), 1.0, 1e-12);
    }

    #[test]
    fn generalized_family_reduces_to_model_a() {
        let a = ConvergenceModel::model_a();
        let w1 = ConvergenceModel::new(ModelKind::W(1.0), HessianMode::Isotropic).unwrap();
        for i in 0..50 {
            let c = 0.2 * i as f64;
            let s = spec2(0.7, 2.9);
            assert_eq!(
                convergence_time(&s, c, &a).unwrap(),
                convergence_time(&s, c, &w1).unwrap()
            );
        }
    }

    #[test]
    fn numeric_minimizer_finds_interior_optimum() {
        let opt = minimize_alpha_numeric(&spec2(1.0, 3.0), &ConvergenceModel::model_a()).unwrap();
        assert!(!opt.boundary);
        close(opt.alpha, 0.6180339887498949, 2e-6);
        close(opt.value, 72.0, 1e-4);

        let k3 = minimize_alpha_numeric(&k3_spectrum(), &ConvergenceModel::model_a()).unwrap();
        close(k3.alpha, 0.4304483340269945, 2e-6);
    }

    #[test]
    fn numeric_minimizer_reports_boundaries() {
        // Scale-only model: T grows with c, so the minimum sits at alpha 0.
        let c_model = ConvergenceModel::new(ModelKind::C, HessianMode::Isotropic).unwrap();
        let opt = minimize_alpha_numeric(&spec2(1.0, 3.0), &c_model).unwrap();
        assert!(opt.boundary);
        assert_eq!(opt.alpha, 0.0);
        close(opt.value, 9.0, 1e-12);

        // Perfectly conditioned spectrum: every shift slows the flow.
        let flat = minimize_alpha_numeric(&spec2(0.7, 0.7), &ConvergenceModel::model_a()).unwrap();
        assert!(flat.boundary);
        assert_eq!(flat.alpha, 0.0);
    }

    #[test]
    fn fisher_hessian_drives_all_models_to_the_upper_boundary() {
        for kind in [
            ModelKind::A,
            ModelKind::B,
            ModelKind::C,
            ModelKind::D,
            ModelKind::W(2.0),
        ] {
            let m = ConvergenceModel::new(kind, HessianMode::Fisher).unwrap();
            let opt = minimize_alpha_numeric(&spec2(1.0, 3.0), &m).unwrap();
            assert!(opt.boundary, "{kind}");
            assert_eq!(opt.alpha, ALPHA_MAX, "{kind}");
        }
    }

    #[test]
    fn mixed_scaling_model_has_an_interior_minimizer() {
        // Stationarity of mu_max/sqrt(mu_min) lands on the same shift as
        // Model A; recorded as observed behavior.
        let d = ConvergenceModel::new(ModelKind::D, HessianMode::Isotropic).unwrap();
        let opt = minimize_alpha_numeric(&spec2(1.0, 3.0), &d).unwrap();
        assert!(!opt.boundary);
        close(opt.alpha, 0.6180339887498949, 2e-6);
    }

    #[test]
    fn grid_monotonicity_of_ratio_and_scale_models() {
        let s = spec2(1.0, 3.0);
        let b = ConvergenceModel::new(ModelKind::B, HessianMode::Isotropic).unwrap();
        let c_model = ConvergenceModel::new(ModelKind::C, HessianMode::Isotropic).unwrap();
        let mut prev_b = f64::INFINITY;
        let mut prev_c = f64::NEG_INFINITY;
        for i in 0..1000 {
            let c = 30.0 * i as f64 / 999.0;
            let tb = convergence_time(&s, c, &b).unwrap();
            let tc = convergence_time(&s, c, &c_model).unwrap();
            assert!(tb < prev_b || i == 0);
            assert!(tc > prev_c || i == 0);
            prev_b = tb;
            prev_c = tc;
        }
    }

    #[test]
    fn speedup_closed_form() {
        close(speedup_at_optimum(&spec2(1.0, 3.0)).unwrap(), 1.125, 1e-12);
        close(speedup_at_optimum(&spec2(1.0, 100.0)).unwrap(), 25.252525252525253, 1e-12);
        let near = speedup_at_optimum(&spec2(1.0, 2.0 + 1e-9)).unwrap();
        close(near, 1.0, 1e-9);
        assert!(speedup_at_optimum(&spec2(1.0, 2.0)).is_err());
        assert!(speedup_at_optimum(&spec2(1.0, 1.5)).is_err());
    }

    #[test]
    fn shifted_ratio_is_two_at_the_optimum() {
        for s in [spec2(1.0, 3.0), spec2(0.2, 1.7), k3_spectrum()] {
            let cs = c_star(&s, 1.0).unwrap();
            let ratio = (s.lambda_max() + cs) / (s.lambda_min() + cs);
            close(ratio, 2.0, 1e-12);
        }
    }

    #[test]
    fn analyze_summarizes_triangle_observer() {
        let r = analyze("K3", 0.5, &k3_spectrum(), &ConvergenceModel::model_a(), 1.0).unwrap();
        assert_eq!(r.topology, "K3");
        close(r.cond_f, 2.844938376910376, 1e-10);
        close(r.gap, 0.3253186310149372, 1e-12);
        close(r.c_star, r.gap, 1e-15);
        close(r.alpha_pred, 0.4304483340269945, 1e-12);
        assert!(r.abs_err <= 1e-5);
        close(r.speedup, 1.0967404751441492, 1e-10);
    }

    #[test]
    fn analyze_flags_classical_observers() {
        let r = analyze("P6", 0.5, &spec2(0.78, 0.78), &ConvergenceModel::model_a(), 1.0).unwrap();
        assert_eq!(r.alpha_pred, 0.0);
        assert_eq!(r.alpha_num, 0.0);
        assert_eq!(r.c_star, 0.0);
        close(r.speedup, 1.0, 1e-15);
        close(r.cond_f, 1.0, 1e-12);
    }
}
