//! Band/coupling models: the coupling density Δ(E) on a finite band
//! [E_b, E_t], its real level-shift function Σ′(E) on the real axis, the
//! standard-sheet self-energy Σ(ω) off the axis, and the analytic
//! continuation of Σ through the band onto the adjacent sheet, whose branch
//! cuts run vertically downward from the two band edges.
//!
//! All closed forms are written in the band-centered coordinate
//! `x = (E - c)/h` (center c, half-width h), so user-specified edges are an
//! affine relabeling: Δ and Σ transform as values, only d/dE picks up 1/h.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::numerics::{self, QuadratureSpec};

/// Which coupling-density profile the band carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandKind {
    /// Δ(E) = Δ₀ across the whole band.
    ConstantDelta,
    /// Semicircular density Δ(E) = (Δ₀/π)·sqrt(1 - x²): the first site of a
    /// uniform semi-infinite tight-binding chain, Δ₀ = 2V².
    SemiInfiniteChain,
    /// Δ(E) = C·(E - E_b)^{β_b}·(E_t - E)^{β_t}, normalized so the peak
    /// value equals Δ₀.
    PowerLawEdge,
}

/// One of the two band edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandEdge {
    Bottom,
    Top,
}

/// A coupling band: edges, strength, and (for [`BandKind::PowerLawEdge`])
/// edge exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandModel {
    pub kind: BandKind,
    pub e_bottom: f64,
    pub e_top: f64,
    /// Overall coupling strength Δ₀ ≥ 0 (peak of Δ for the constant and
    /// power-law profiles; Δ₀ = 2V² for the chain).
    pub delta0: f64,
    /// Lower-edge exponent (used by PowerLawEdge only; 0 elsewhere).
    pub beta_bottom: f64,
    /// Upper-edge exponent (used by PowerLawEdge only; 0 elsewhere).
    pub beta_top: f64,
}

/// Discrete-level energy plus the numerical tolerances every operation
/// shares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Energy of the discrete level, same units as the band.
    pub epsilon: f64,
    /// Absolute quadrature tolerance.
    pub quad_tol: f64,
    /// Root-finding tolerance on energies.
    pub root_tol: f64,
}

impl SystemParams {
    /// Default tolerances: quadrature 1e-9, roots 1e-12.
    pub fn new(epsilon: f64) -> Self {
        SystemParams { epsilon, quad_tol: 1e-9, root_tol: 1e-12 }
    }

    pub fn with_tolerances(epsilon: f64, quad_tol: f64, root_tol: f64) -> Result<Self> {
        if !(quad_tol > 0.0) || !quad_tol.is_finite() {
            return Err(Error::degenerate(format!(
                "quadrature tolerance must be positive and finite, got {quad_tol}"
            )));
        }
        if !(root_tol > 0.0) || !root_tol.is_finite() {
            return Err(Error::degenerate(format!(
                "root tolerance must be positive and finite, got {root_tol}"
            )));
        }
        Ok(SystemParams { epsilon, quad_tol, root_tol })
    }
}

/// Downward-continued argument: the phase of z measured in (-π/2, 3π/2],
/// i.e. with the branch ray pointing straight down the negative imaginary
/// axis instead of along the negative real axis. Exactly on the ray the
/// right-hand limit (-π/2) is returned.
fn arg_down(z: Complex64) -> f64 {
    let theta = z.arg();
    if theta < -FRAC_PI_2 {
        theta + TAU
    } else {
        theta
    }
}

/// Logarithm with its branch cut along the negative imaginary axis.
fn log_down(z: Complex64) -> Complex64 {
    Complex64::new(z.norm().ln(), arg_down(z))
}

/// Square root with its branch cut along the negative imaginary axis.
fn sqrt_down(z: Complex64) -> Complex64 {
    Complex64::from_polar(z.norm().sqrt(), 0.5 * arg_down(z))
}

impl BandModel {
    pub fn try_new(
        kind: BandKind,
        e_bottom: f64,
        e_top: f64,
        delta0: f64,
        beta_bottom: f64,
        beta_top: f64,
    ) -> Result<Self> {
        if !(e_bottom.is_finite() && e_top.is_finite() && e_bottom < e_top) {
            return Err(Error::degenerate(format!(
                "band edges must be finite with e_bottom < e_top, got [{e_bottom}, {e_top}]"
            )));
        }
        if !(delta0 >= 0.0) || !delta0.is_finite() {
            return Err(Error::degenerate(format!(
                "coupling strength must be finite and nonnegative, got {delta0}"
            )));
        }
        let (bb, bt) = match kind {
            BandKind::PowerLawEdge => {
                if !(beta_bottom >= 0.0 && beta_top >= 0.0)
                    || !beta_bottom.is_finite()
                    || !beta_top.is_finite()
                {
                    return Err(Error::degenerate(format!(
                        "edge exponents must be finite and nonnegative, got ({beta_bottom}, {beta_top})"
                    )));
                }
                (beta_bottom, beta_top)
            }
            _ => (0.0, 0.0),
        };
        Ok(BandModel { kind, e_bottom, e_top, delta0, beta_bottom: bb, beta_top: bt })
    }

    /// Constant coupling density Δ₀ on the canonical band [-1, 1].
    pub fn constant(delta0: f64) -> Result<Self> {
        Self::try_new(BandKind::ConstantDelta, -1.0, 1.0, delta0, 0.0, 0.0)
    }

    /// Semicircular coupling density on the canonical band [-1, 1].
    pub fn chain(delta0: f64) -> Result<Self> {
        Self::try_new(BandKind::SemiInfiniteChain, -1.0, 1.0, delta0, 0.0, 0.0)
    }

    /// Power-law-edge coupling density on the canonical band [-1, 1].
    pub fn power_law(delta0: f64, beta_bottom: f64, beta_top: f64) -> Result<Self> {
        Self::try_new(BandKind::PowerLawEdge, -1.0, 1.0, delta0, beta_bottom, beta_top)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.e_bottom + self.e_top)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.e_top - self.e_bottom)
    }

    pub fn width(&self) -> f64 {
        self.e_top - self.e_bottom
    }

    fn scaled(&self, e: f64) -> f64 {
        (e - self.center()) / self.half_width()
    }

    fn scaled_c(&self, omega: Complex64) -> Complex64 {
        (omega - self.center()) / self.half_width()
    }

    /// Peak-normalization constant of the power-law profile in scaled
    /// coordinates: C such that max over the band of
    /// C·(1+x)^{β_b}(1-x)^{β_t} equals Δ₀. (0^0 counts as 1, so zero
    /// exponents degrade gracefully to the constant profile.)
    fn power_law_scale(&self) -> f64 {
        let s = self.beta_bottom + self.beta_top;
        if s == 0.0 {
            return self.delta0;
        }
        let peak = (2.0 * self.beta_bottom / s).powf(self.beta_bottom)
            * (2.0 * self.beta_top / s).powf(self.beta_top);
        self.delta0 / peak
    }

    /// Power-law exponents of Δ at the two band edges.
    pub fn edge_exponents(&self) -> (f64, f64) {
        match self.kind {
            BandKind::ConstantDelta => (0.0, 0.0),
            BandKind::SemiInfiniteChain => (0.5, 0.5),
            BandKind::PowerLawEdge => (self.beta_bottom, self.beta_top),
        }
    }

    /// Largest value Δ attains on the band.
    pub fn delta_max(&self) -> f64 {
        match self.kind {
            BandKind::ConstantDelta | BandKind::PowerLawEdge => self.delta0,
            BandKind::SemiInfiniteChain => self.delta0 / PI,
        }
    }

    /// Whether the analytically continued self-energy is available.
    pub fn supports_second_sheet(&self) -> bool {
        matches!(self.kind, BandKind::ConstantDelta | BandKind::SemiInfiniteChain)
    }

    /// Which ends of the band carry a power-law singularity that the
    /// `E = edge ± s²` substitution removes exactly (half-integer-like
    /// exponents). Constant edges need no substitution.
    pub(crate) fn edge_transform_flags(&self) -> (bool, bool) {
        let half_integer_like =
            |beta: f64| beta > 0.0 && (2.0 * beta - (2.0 * beta).round()).abs() < 1e-9;
        let (bb, bt) = self.edge_exponents();
        (half_integer_like(bb), half_integer_like(bt))
    }

    /// Coupling density Δ(E): nonnegative on [e_bottom, e_top] (values at
    /// the exact edges are the one-sided limits), zero outside. Total
    /// function.
    pub fn delta(&self, e: f64) -> f64 {
        let x = self.scaled(e);
        if !((-1.0..=1.0).contains(&x)) {
            return 0.0;
        }
        match self.kind {
            BandKind::ConstantDelta => self.delta0,
            BandKind::SemiInfiniteChain => {
                self.delta0 / PI * (1.0 - x * x).max(0.0).sqrt()
            }
            BandKind::PowerLawEdge => {
                self.power_law_scale()
                    * (1.0 + x).max(0.0).powf(self.beta_bottom)
                    * (1.0 - x).max(0.0).powf(self.beta_top)
            }
        }
    }

    /// Exponential decay rate of the perturbative (golden-rule) regime,
    /// 1/τ = 2π·Δ(ε).
    pub fn fgr_rate(&self, epsilon: f64) -> f64 {
        2.0 * PI * self.delta(epsilon)
    }

    /// Real part of the self-energy on the real axis,
    /// Σ′(E) = PV ∫ Δ(E′)/(E - E′) dE′, valid inside and outside the band.
    ///
    /// Closed forms for the constant and chain profiles; principal-value
    /// quadrature for power-law edges. The constant profile diverges
    /// logarithmically at the exact edges (reported as NonFinite).
    pub fn sigma_prime(&self, e: f64, params: &SystemParams) -> Result<f64> {
        let x = self.scaled(e);
        match self.kind {
            BandKind::ConstantDelta => {
                if x == 1.0 || x == -1.0 {
                    return Err(Error::non_finite(format!(
                        "level-shift function at the band edge {e}"
                    )));
                }
                Ok(self.delta0 * ((x + 1.0) / (x - 1.0)).abs().ln())
            }
            BandKind::SemiInfiniteChain => {
                if x.abs() <= 1.0 {
                    Ok(self.delta0 * x)
                } else {
                    // x - sign(x)·sqrt(x²-1) written cancellation-free.
                    Ok(self.delta0 * x.signum() / (x.abs() + (x * x - 1.0).sqrt()))
                }
            }
            BandKind::PowerLawEdge => {
                let spec = QuadratureSpec::new(params.quad_tol);
                if x > -1.0 && x < 1.0 {
                    numerics::principal_value(
                        |ep| Ok(self.delta(ep)),
                        e,
                        self.e_bottom,
                        self.e_top,
                        &spec,
                    )
                } else {
                    // Outside (or exactly at) the band the kernel is not of
                    // principal-value type; integrate directly, softening
                    // removable edge singularities where possible.
                    let (ta, tb) = self.edge_transform_flags();
                    let v = numerics::integrate_edge_transformed(
                        |ep| Ok(Complex64::new(self.delta(ep) / (e - ep), 0.0)),
                        self.e_bottom,
                        self.e_top,
                        ta,
                        tb,
                        &spec,
                    )?;
                    Ok(v.re)
                }
            }
        }
    }

    /// Derivative dΣ′/dE on the real axis, away from the exact band edges.
    /// Closed forms where available, written against edge distances so no
    /// cancellation occurs near the edges; central finite difference for
    /// power-law edges.
    pub fn d_sigma_prime(&self, e: f64, params: &SystemParams) -> Result<f64> {
        match self.kind {
            BandKind::ConstantDelta => {
                let db = e - self.e_bottom;
                let dt = e - self.e_top;
                if db == 0.0 || dt == 0.0 {
                    return Err(Error::non_finite(format!(
                        "level-shift slope at the band edge {e}"
                    )));
                }
                Ok(self.delta0 * (1.0 / db - 1.0 / dt))
            }
            BandKind::SemiInfiniteChain => {
                let x = self.scaled(e);
                let h = self.half_width();
                if x.abs() < 1.0 {
                    Ok(self.delta0 / h)
                } else if x.abs() == 1.0 {
                    Err(Error::non_finite(format!("level-shift slope at the band edge {e}")))
                } else {
                    Ok(self.delta0 * (1.0 - x.abs() / (x * x - 1.0).sqrt()) / h)
                }
            }
            BandKind::PowerLawEdge => {
                let mut h_fd = 1e-4 * self.half_width();
                // Keep both probes on the same side of each band edge.
                for edge in [self.e_bottom, self.e_top] {
                    let d = (e - edge).abs();
                    if d > 0.0 && d < h_fd {
                        h_fd = 0.5 * d;
                    }
                }
                let fp = self.sigma_prime(e + h_fd, params)?;
                let fm = self.sigma_prime(e - h_fd, params)?;
                Ok((fp - fm) / (2.0 * h_fd))
            }
        }
    }

    /// Self-energy on the standard sheet: analytic off the real band
    /// segment, decaying at infinity, with boundary values
    /// Σ(E ± i0) = Σ′(E) ∓ iπΔ(E) across the band.
    pub fn sigma_standard(&self, omega: Complex64, params: &SystemParams) -> Result<Complex64> {
        if omega.im == 0.0 && omega.re > self.e_bottom && omega.re < self.e_top {
            return Err(Error::OnCut { omega });
        }
        let value = match self.kind {
            BandKind::ConstantDelta => {
                let xi = self.scaled_c(omega);
                // The difference of principal logarithms is analytic off
                // the band: both cuts coincide on (-inf, -1] and cancel.
                self.delta0 * ((xi + Complex64::new(1.0, 0.0)).ln()
                    - (xi - Complex64::new(1.0, 0.0)).ln())
            }
            BandKind::SemiInfiniteChain => {
                let xi = self.scaled_c(omega);
                // Principal-branch factors place the only cut on [-1, 1]
                // and select the root that decays at infinity.
                let root = (xi - Complex64::new(1.0, 0.0)).sqrt()
                    * (xi + Complex64::new(1.0, 0.0)).sqrt();
                self.delta0 * (xi - root)
            }
            BandKind::PowerLawEdge => {
                let spec = QuadratureSpec::new(params.quad_tol);
                let (ta, tb) = self.edge_transform_flags();
                numerics::integrate_edge_transformed(
                    |ep| Ok(self.delta(ep) / (omega - ep)),
                    self.e_bottom,
                    self.e_top,
                    ta,
                    tb,
                    &spec,
                )?
            }
        };
        if !value.is_finite() {
            return Err(Error::non_finite(format!("self-energy at {omega}")));
        }
        Ok(value)
    }

    fn check_off_cut_rays(&self, omega: Complex64, root_tol: f64) -> Result<()> {
        for edge in [self.e_bottom, self.e_top] {
            if (omega.re - edge).abs() <= root_tol && omega.im <= root_tol {
                return Err(Error::OnCut { omega });
            }
        }
        Ok(())
    }

    /// Self-energy continued from the upper half-plane straight down
    /// through the band interval. Its branch cuts run vertically downward
    /// from the two band edges; in the upper half-plane it coincides with
    /// the standard sheet, and on the real band segment it equals
    /// Σ′(E) - iπΔ(E).
    pub fn second_sheet_sigma(
        &self,
        omega: Complex64,
        params: &SystemParams,
    ) -> Result<Complex64> {
        self.require_second_sheet("analytically continued self-energy")?;
        self.check_off_cut_rays(omega, params.root_tol)?;
        let xi = self.scaled_c(omega);
        let value = match self.kind {
            BandKind::ConstantDelta => {
                self.delta0
                    * (log_down(xi + Complex64::new(1.0, 0.0))
                        - log_down(xi - Complex64::new(1.0, 0.0)))
            }
            BandKind::SemiInfiniteChain => {
                let root = sqrt_down(xi - Complex64::new(1.0, 0.0))
                    * sqrt_down(xi + Complex64::new(1.0, 0.0));
                self.delta0 * (xi - root)
            }
            BandKind::PowerLawEdge => unreachable!("guarded by require_second_sheet"),
        };
        if !value.is_finite() {
            return Err(Error::non_finite(format!("continued self-energy at {omega}")));
        }
        Ok(value)
    }

    /// Derivative dΣ/dω on the continued sheet (same domain as
    /// [`Self::second_sheet_sigma`]).
    pub fn second_sheet_sigma_deriv(
        &self,
        omega: Complex64,
        params: &SystemParams,
    ) -> Result<Complex64> {
        self.require_second_sheet("continued self-energy derivative")?;
        self.check_off_cut_rays(omega, params.root_tol)?;
        let xi = self.scaled_c(omega);
        let h = self.half_width();
        let value = match self.kind {
            BandKind::ConstantDelta => {
                let one = Complex64::new(1.0, 0.0);
                self.delta0 / h * (one / (xi + one) - one / (xi - one))
            }
            BandKind::SemiInfiniteChain => {
                let one = Complex64::new(1.0, 0.0);
                let root = sqrt_down(xi - one) * sqrt_down(xi + one);
                self.delta0 / h * (Complex64::new(1.0, 0.0) - xi / root)
            }
            BandKind::PowerLawEdge => unreachable!("guarded by require_second_sheet"),
        };
        if !value.is_finite() {
            return Err(Error::non_finite(format!(
                "continued self-energy derivative at {omega}"
            )));
        }
        Ok(value)
    }

    /// One-sided value of the continued self-energy exactly on a vertical
    /// cut ray, approached from inside the strip between the edges: the
    /// bottom ray from the right, the top ray from the left. `y > 0` is the
    /// depth below the edge.
    ///
    /// These are the integrand values the vertical-cut representation of
    /// the survival amplitude needs; the two-sided ambiguity is resolved
    /// here by explicit phase assignments for the factor that vanishes at
    /// the edge (the top ray's inside limit carries phase 3π/2, which no
    /// plain argument computation can produce).
    pub fn second_sheet_sigma_cut_inside(&self, edge: BandEdge, y: f64) -> Result<Complex64> {
        self.require_second_sheet("continued self-energy on a cut ray")?;
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::degenerate(format!(
                "cut-ray depth must be positive and finite, got {y}"
            )));
        }
        let yp = y / self.half_width();
        let value = match (self.kind, edge) {
            (BandKind::ConstantDelta, BandEdge::Bottom) => {
                // ξ = -1 - iy′: the vanishing factor ξ+1 = -iy′ carries the
                // inside (right-hand) phase -π/2.
                let near = Complex64::new(yp.ln(), -FRAC_PI_2);
                let far = log_down(Complex64::new(-2.0, -yp));
                self.delta0 * (near - far)
            }
            (BandKind::ConstantDelta, BandEdge::Top) => {
                // ξ = 1 - iy′: the vanishing factor ξ-1 = -iy′ carries the
                // inside (left-hand) phase 3π/2.
                let near = Complex64::new(yp.ln(), 3.0 * FRAC_PI_2);
                let far = log_down(Complex64::new(2.0, -yp));
                self.delta0 * (far - near)
            }
            (BandKind::SemiInfiniteChain, BandEdge::Bottom) => {
                let xi = Complex64::new(-1.0, -yp);
                let near = Complex64::from_polar(yp.sqrt(), -0.25 * PI);
                let far = sqrt_down(Complex64::new(-2.0, -yp));
                self.delta0 * (xi - far * near)
            }
            (BandKind::SemiInfiniteChain, BandEdge::Top) => {
                let xi = Complex64::new(1.0, -yp);
                let near = Complex64::from_polar(yp.sqrt(), 0.75 * PI);
                let far = sqrt_down(Complex64::new(2.0, -yp));
                self.delta0 * (xi - near * far)
            }
            (BandKind::PowerLawEdge, _) => unreachable!("guarded by require_second_sheet"),
        };
        if !value.is_finite() {
            return Err(Error::non_finite(format!(
                "continued self-energy on the {edge:?} cut ray at depth {y}"
            )));
        }
        Ok(value)
    }

    fn require_second_sheet(&self, what: &str) -> Result<()> {
        if self.supports_second_sheet() {
            Ok(())
        } else {
            Err(Error::unsupported(format!(
                "{what} is only defined for the constant and chain profiles"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
        SystemParams::new(-0.4)
    }

    #[test]
    fn arg_down_covers_the_lower_strip_continuously() {
        // Just below the positive real axis the phase stays near 0...
        assert!(arg_down(Complex64::new(1.0, -1e-12)).abs() < 1e-11);
        // ...just below the negative real axis it continues past π instead
        // of jumping to -π...
        let th = arg_down(Complex64::new(-1.0, -1e-12));
        assert!((th - PI).abs() < 1e-11);
        // On the negative imaginary axis the right-hand limit -π/2 is used.
        assert!((arg_down(Complex64::new(0.0, -2.0)) + FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn cut_inside_matches_the_limit_from_inside_the_strip() {
        let models = [BandModel::constant(0.17).unwrap(), BandModel::chain(0.45).unwrap()];
        let p = params();
        for model in models {
            for y in [0.03, 0.7, 4.0] {
                let delta = 1e-8;
                let from_inside_bottom = model
                    .second_sheet_sigma(Complex64::new(model.e_bottom + delta, -y), &p)
                    .unwrap();
                let on_ray_bottom =
                    model.second_sheet_sigma_cut_inside(BandEdge::Bottom, y).unwrap();
                assert!(
                    (from_inside_bottom - on_ray_bottom).norm() < 1e-4,
                    "bottom ray mismatch for {:?} at y={y}: {from_inside_bottom} vs {on_ray_bottom}",
                    model.kind
                );

                let from_inside_top = model
                    .second_sheet_sigma(Complex64::new(model.e_top - delta, -y), &p)
                    .unwrap();
                let on_ray_top = model.second_sheet_sigma_cut_inside(BandEdge::Top, y).unwrap();
                assert!(
                    (from_inside_top - on_ray_top).norm() < 1e-4,
                    "top ray mismatch for {:?} at y={y}: {from_inside_top} vs {on_ray_top}",
                    model.kind
                );
            }
        }
    }

    #[test]
    fn constant_profile_ray_discontinuity_is_exactly_one_winding() {
        let model = BandModel::constant(0.11).unwrap();
        let p = params();
        for (edge, re) in [(BandEdge::Bottom, model.e_bottom), (BandEdge::Top, model.e_top)] {
            for y in [0.2, 1.5] {
                let std_side =
                    model.sigma_standard(Complex64::new(re, -y), &p).unwrap();
                let inside = model.second_sheet_sigma_cut_inside(edge, y).unwrap();
                let disc = std_side - inside;
                let expected = Complex64::new(0.0, TAU * model.delta0);
                assert!(
                    (disc - expected).norm() < 1e-12,
                    "{edge:?} ray discontinuity {disc} != {expected}"
                );
            }
        }
    }

    #[test]
    fn edge_values_follow_the_one_sided_conventions() {
        let chain = BandModel::chain(0.5).unwrap();
        assert_eq!(chain.delta(1.0), 0.0);
        assert_eq!(chain.delta(-1.0), 0.0);
        let constant = BandModel::constant(0.2).unwrap();
        assert_eq!(constant.delta(1.0), 0.2);
        assert_eq!(constant.delta(1.0 + 1e-14), 0.0);
        assert!(matches!(
            constant.sigma_prime(1.0, &params()),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn power_law_peak_is_normalized_to_delta0() {
        let model = BandModel::power_law(0.3, 0.5, 1.5).unwrap();
        let s = model.beta_bottom + model.beta_top;
        let x_peak = (model.beta_bottom - model.beta_top) / s;
        let peak = model.delta(x_peak);
        assert!((peak - 0.3).abs() < 1e-14, "peak {peak}");
        // And nowhere does Δ exceed the peak.
        for k in 0..200 {
            let e = -1.0 + 2.0 * (k as f64 + 0.5) / 200.0;
            assert!(model.delta(e) <= 0.3 + 1e-14);
        }
    }
}
