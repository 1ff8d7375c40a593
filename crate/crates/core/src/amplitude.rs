//! Survival amplitude of the discrete level and everything assembled from
//! it: the spectral decomposition (bound poles plus a continuum density),
//! time series with their golden-rule reference, the contour route through
//! the continued sheet, short-time and long-time diagnostics, and the
//! closed form available for the semicircular profile.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

use crate::band_models::{BandEdge, BandModel, SystemParams};
use crate::error::{Error, Result};
use crate::numerics::{self, FitResult, QuadratureSpec};
use crate::poles::{self, BoundPole};

/// Survival amplitude and probability sampled on a time grid, together
/// with the golden-rule reference e^{-t/τ}, 1/τ = 2πΔ(ε).
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalSeries {
    pub times: Vec<f64>,
    pub g: Vec<Complex64>,
    pub p: Vec<f64>,
    /// Golden-rule reference; the constant 1 when the level is decoupled
    /// (Δ(ε) = 0), where no exponential reference exists.
    pub p_fgr: Vec<f64>,
}

/// Spectral decomposition of the discrete level: a list of bound-state
/// poles with their weights plus the continuum density across the band.
#[derive(Debug, Clone)]
pub struct SpectralDensity {
    model: BandModel,
    params: SystemParams,
    /// Bound poles as (energy, weight) pairs, at most one per side.
    pub discrete: Vec<(f64, f64)>,
}

impl SpectralDensity {
    /// Continuum density A(ω) = Δ(ω) / [(ω - ε - Σ′(ω))² + π²Δ(ω)²],
    /// supported strictly inside the band: zero outside and at the edges
    /// themselves (the closure of its interior support).
    pub fn continuum(&self, omega: f64) -> Result<f64> {
        continuum_density(&self.model, &self.params, omega)
    }

    /// ∫ A(ω) dω across the band.
    pub fn continuum_weight(&self) -> Result<f64> {
        let spec = QuadratureSpec::new(self.params.quad_tol);
        let (ta, tb) = self.model.edge_transform_flags();
        let model = self.model;
        let params = self.params;
        let v = numerics::integrate_edge_transformed(
            |e| continuum_density(&model, &params, e).map(|a| Complex64::new(a, 0.0)),
            self.model.e_bottom,
            self.model.e_top,
            ta,
            tb,
            &spec,
        )?;
        Ok(v.re)
    }

    /// Continuum weight plus the bound-state weights; completeness of the
    /// eigenbasis makes this exactly 1.
    pub fn total_weight(&self) -> Result<f64> {
        let discrete: f64 = self.discrete.iter().map(|d| d.1).sum();
        Ok(self.continuum_weight()? + discrete)
    }
}

/// Builds the spectral decomposition, locating the bound poles once.
pub fn spectral_density(model: &BandModel, params: &SystemParams) -> Result<SpectralDensity> {
    let discrete = poles::find_real_poles(model, params)?
        .iter()
        .map(|p| (p.energy, p.weight))
        .collect();
    Ok(SpectralDensity { model: *model, params: *params, discrete })
}

fn continuum_density(model: &BandModel, params: &SystemParams, e: f64) -> Result<f64> {
    if e <= model.e_bottom || e >= model.e_top {
        return Ok(0.0);
    }
    let d = model.delta(e);
    if d == 0.0 {
        return Ok(0.0);
    }
    let l = e - params.epsilon - model.sigma_prime(e, params)?;
    Ok(d / (l * l + PI * PI * d * d))
}

/// Fourier transform of the continuum density over the band,
/// ∫ A(E) e^{-iEt} dE: the branch-cut part of the survival amplitude.
pub fn cut_integral(model: &BandModel, params: &SystemParams, t: f64) -> Result<Complex64> {
    if t < 0.0 {
        return Err(Error::degenerate(format!("cut integral needs t >= 0, got {t}")));
    }
    if model.delta0 == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let spec = QuadratureSpec::new(params.quad_tol).with_oscillation(t);
    let (ta, tb) = model.edge_transform_flags();
    numerics::integrate_edge_transformed(
        |e| {
            let a = continuum_density(model, params, e)?;
            Ok(a * Complex64::from_polar(1.0, -e * t))
        },
        model.e_bottom,
        model.e_top,
        ta,
        tb,
        &spec,
    )
}

fn pole_sum(discrete: &[BoundPole], t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for p in discrete {
        acc += Complex64::from_polar(p.weight, -p.energy * t);
    }
    acc
}

/// Survival amplitude g(t) = ⟨d|e^{-iHt}|d⟩ by the spectral route: the cut
/// integral plus the bound-pole sum. Exact up to quadrature error; g(0)
/// recovers the completeness sum.
pub fn survival_amplitude(model: &BandModel, params: &SystemParams, t: f64) -> Result<Complex64> {
    if t < 0.0 {
        return Err(Error::degenerate(format!("survival amplitude needs t >= 0, got {t}")));
    }
    if model.delta0 == 0.0 {
        return Ok(Complex64::from_polar(1.0, -params.epsilon * t));
    }
    let discrete = poles::find_real_poles(model, params)?;
    Ok(cut_integral(model, params, t)? + pole_sum(&discrete, t))
}

/// Golden-rule reference probability e^{-2πΔ(ε)t}. The decoupled case has
/// no decay channel at all, so no reference exists.
pub fn fgr_probability(model: &BandModel, params: &SystemParams, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::degenerate(format!("reference probability needs t >= 0, got {t}")));
    }
    let rate = model.fgr_rate(params.epsilon);
    if rate == 0.0 {
        return Err(Error::DecoupledLevel);
    }
    Ok((-rate * t).exp())
}

/// Survival series over a non-decreasing grid of times t ≥ 0, evaluated in
/// parallel by the spectral route (poles located once, cut integral per
/// time).
pub fn survival_series(
    model: &BandModel,
    params: &SystemParams,
    times: &[f64],
) -> Result<SurvivalSeries> {
    if times.is_empty() {
        return Err(Error::degenerate("survival series needs at least one time"));
    }
    if times[0] < 0.0 || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::degenerate(
            "survival series needs a non-decreasing grid of non-negative times",
        ));
    }
    let rate = model.fgr_rate(params.epsilon);
    let p_fgr: Vec<f64> = times.iter().map(|&t| (-rate * t).exp()).collect();
    if model.delta0 == 0.0 {
        let g: Vec<Complex64> =
            times.iter().map(|&t| Complex64::from_polar(1.0, -params.epsilon * t)).collect();
        let p = vec![1.0; times.len()];
        return Ok(SurvivalSeries { times: times.to_vec(), g, p, p_fgr });
    }
    let discrete = poles::find_real_poles(model, params)?;
    let g: Vec<Complex64> = times
        .par_iter()
        .map(|&t| Ok(cut_integral(model, params, t)? + pole_sum(&discrete, t)))
        .collect::<Result<Vec<_>>>()?;
    let p: Vec<f64> = g.iter().map(|z| z.norm_sqr()).collect();
    Ok(SurvivalSeries { times: times.to_vec(), g, p, p_fgr })
}

/// Survival amplitude for the semicircular profile at band center, in the
/// closed single-integral form
///
///   g(t) = (1/2π) ∫_{-π}^{π} e^{i t cos q} (1 - e^{-2iq}) / (1 + α² e^{-2iq}) dq,
///
/// with α² = 1 - 2Δ₀. Valid for 0 < Δ₀ < 1 (α² ∈ (-1, 1), so the
/// denominator never vanishes); at Δ₀ = 1/2 the integral collapses to
/// 2 J₁(t)/t.
pub fn chain_closed_form(delta0: f64, t: f64, quad_tol: f64) -> Result<Complex64> {
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(Error::degenerate(format!(
            "closed form needs 0 < Δ₀ < 1, got {delta0}"
        )));
    }
    if t < 0.0 {
        return Err(Error::degenerate(format!("closed form needs t >= 0, got {t}")));
    }
    let alpha2 = 1.0 - 2.0 * delta0;
    // Local wavenumber is at most max(t, 2): t from the cos factor, 2 from
    // the rational factor's own winding.
    let spec = QuadratureSpec::new(quad_tol).with_oscillation(t.max(2.0));
    let v = numerics::integrate(
        |q: f64| {
            let e2 = Complex64::from_polar(1.0, -2.0 * q);
            let phase = Complex64::from_polar(1.0, t * q.cos());
            Ok(phase * (Complex64::new(1.0, 0.0) - e2)
                / (Complex64::new(1.0, 0.0) + alpha2 * e2))
        },
        -PI,
        PI,
        &spec,
    )?;
    Ok(v / TAU)
}

/// The survival amplitude reorganized through the analytically continued
/// propagator: bound-pole sum + resonance residue + two vertical cut
/// integrals hanging from the band edges. Built once, evaluated at many
/// times.
struct SheetRepr<'a> {
    model: &'a BandModel,
    params: &'a SystemParams,
    discrete: Vec<BoundPole>,
    /// Resonance location and residue weight, when a pole exists on the
    /// continued sheet with real part strictly inside the band.
    resonance: Option<(Complex64, Complex64)>,
}

impl<'a> SheetRepr<'a> {
    fn new(model: &'a BandModel, params: &'a SystemParams) -> Result<Self> {
        if !model.supports_second_sheet() {
            return Err(Error::unsupported(
                "the contour route needs the analytically continued self-energy",
            ));
        }
        let discrete = poles::find_real_poles(model, params)?;
        let resonance = match poles::find_resonance_pole(model, params) {
            Ok(rp) => {
                let rt = params.root_tol;
                let inside_strip = rp.omega.re > model.e_bottom + rt
                    && rp.omega.re < model.e_top - rt
                    && rp.omega.im < -rt;
                if inside_strip {
                    let d = model.second_sheet_sigma_deriv(rp.omega, params)?;
                    let w = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - d);
                    Some((rp.omega, w))
                } else {
                    // A pole outside the strip between the edge verticals is
                    // not enclosed by the deformed contour.
                    None
                }
            }
            // No resonance to pick up: either the level is decoupled from
            // the band, or the search ran away (it does when the pole has
            // escaped to depths where its contribution is nil).
            Err(Error::DecoupledLevel) | Err(Error::NoConvergence { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(SheetRepr { model, params, discrete, resonance })
    }

    /// One vertical integral: the propagator's jump across the ray
    /// descending from a band edge, damped by e^{-yt}. The bottom edge
    /// enters with a minus sign, the top with a plus, from the orientation
    /// the contour acquires when it is pushed off the real axis.
    fn vertical(&self, edge: BandEdge, t: f64) -> Result<Complex64> {
        let (e_edge, sign, transform) = match edge {
            BandEdge::Bottom => {
                (self.model.e_bottom, -1.0, self.model.edge_transform_flags().0)
            }
            BandEdge::Top => (self.model.e_top, 1.0, self.model.edge_transform_flags().1),
        };
        let eps = self.params.epsilon;
        let model = self.model;
        let params = self.params;
        let integrand = |y: f64| -> Result<Complex64> {
            let omega = Complex64::new(e_edge, -y);
            let s_std = model.sigma_standard(omega, params)?;
            let s_in = model.second_sheet_sigma_cut_inside(edge, y)?;
            let g_std = Complex64::new(1.0, 0.0) / (omega - eps - s_std);
            let g_in = Complex64::new(1.0, 0.0) / (omega - eps - s_in);
            Ok((g_std - g_in) * (-y * t).exp())
        };
        let y_max = (30.0 / t).max(30.0);
        let y_split = (10.0 / t).min(0.5 * y_max);
        let spec = QuadratureSpec::new(0.25 * self.params.quad_tol);
        let near = numerics::integrate_edge_transformed(
            integrand,
            0.0,
            y_split,
            transform,
            false,
            &spec,
        )?;
        let far = numerics::integrate(integrand, y_split, y_max, &spec)?;
        let phase = Complex64::from_polar(1.0 / TAU, -e_edge * t);
        Ok(sign * phase * (near + far))
    }

    fn resonance_term(&self, t: f64) -> Complex64 {
        match self.resonance {
            Some((omega, w)) => w * (Complex64::new(0.0, -t) * omega).exp(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    fn amplitude(&self, t: f64) -> Result<Complex64> {
        Ok(pole_sum(&self.discrete, t)
            + self.resonance_term(t)
            + self.vertical(BandEdge::Bottom, t)?
            + self.vertical(BandEdge::Top, t)?)
    }

    /// The amplitude with the non-decaying bound-pole oscillation removed:
    /// resonance plus verticals. This is the part that actually decays, and
    /// whose envelope the long-time fit measures.
    fn decaying_part(&self, t: f64) -> Result<Complex64> {
        Ok(self.resonance_term(t)
            + self.vertical(BandEdge::Bottom, t)?
            + self.vertical(BandEdge::Top, t)?)
    }
}

/// Survival amplitude at t > 0 computed through the analytically continued
/// propagator: bound poles + resonance residue + vertical edge cuts. Agrees
/// with `survival_amplitude` to quadrature accuracy; the two routes share
/// no contour, so their agreement is a stringent cross-check.
pub fn second_sheet_amplitude(
    model: &BandModel,
    params: &SystemParams,
    t: f64,
) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(Error::degenerate(format!(
            "the contour route needs strictly positive time, got {t}"
        )));
    }
    SheetRepr::new(model, params)?.amplitude(t)
}

/// Fitted quadratic onset of decay: 1 - p(t) ≈ c t² at early times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticOnset {
    /// Least-squares coefficient c; analytically c = ∫ Δ(E) dE.
    pub coefficient: f64,
    /// Largest relative deviation |1 - p - c t²| / (c t²) over the fit grid.
    pub max_rel_deviation: f64,
}

/// Measures the quadratic onset on 16 points over t ∈ (0, 0.1], with the
/// quadrature tightened so the tiny depletions survive the subtraction
/// from 1.
pub fn short_time_check(model: &BandModel, params: &SystemParams) -> Result<QuadraticOnset> {
    let tight = SystemParams {
        quad_tol: params.quad_tol.min(1e-11),
        ..*params
    };
    let times: Vec<f64> = (1..=16).map(|k| 0.1 * k as f64 / 16.0).collect();
    let series = survival_series(model, &tight, &times)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&t, &p) in times.iter().zip(&series.p) {
        let x = t * t;
        num += x * (1.0 - p);
        den += x * x;
    }
    let c = num / den;
    if !c.is_finite() {
        return Err(Error::non_finite("quadratic onset coefficient"));
    }
    let mut max_rel = 0.0_f64;
    if c > 0.0 {
        for (&t, &p) in times.iter().zip(&series.p) {
            let predicted = c * t * t;
            max_rel = max_rel.max(((1.0 - p) - predicted).abs() / predicted);
        }
    }
    Ok(QuadraticOnset { coefficient: c, max_rel_deviation: max_rel })
}

/// Fits |g(t)| ~ t^slope over a time window, using the decaying part of the
/// contour representation (bound-pole oscillations removed — they would
/// otherwise mask any power law).
///
/// The modulus beats at the band width W as the two edge cuts interfere, so
/// raw samples do not lie on a power law. Samples are pre-aggregated into
/// an RMS envelope over segments one beat period 2π/W long (16 samples per
/// segment), and the fit runs on the segment envelope.
pub fn tail_exponent(
    model: &BandModel,
    params: &SystemParams,
    window: (f64, f64),
) -> Result<FitResult> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::degenerate(format!(
            "tail fit needs a window 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let repr = SheetRepr::new(model, params)?;
    let beat = TAU / model.width();
    let n_seg = (((hi - lo) / beat).floor() as usize).max(4);
    let seg_len = (hi - lo) / n_seg as f64;
    const SAMPLES_PER_SEG: usize = 16;

    let mags: Vec<f64> = (0..n_seg * SAMPLES_PER_SEG)
        .into_par_iter()
        .map(|idx| {
            let i = idx / SAMPLES_PER_SEG;
            let j = idx % SAMPLES_PER_SEG;
            let t = lo + seg_len * (i as f64 + (j as f64 + 0.5) / SAMPLES_PER_SEG as f64);
            repr.decaying_part(t).map(|g| g.norm_sqr())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut t_mids = Vec::with_capacity(n_seg);
    let mut envelope = Vec::with_capacity(n_seg);
    for i in 0..n_seg {
        let chunk = &mags[i * SAMPLES_PER_SEG..(i + 1) * SAMPLES_PER_SEG];
        let mean: f64 = chunk.iter().sum::<f64>() / SAMPLES_PER_SEG as f64;
        t_mids.push(lo + seg_len * (i as f64 + 0.5));
        envelope.push(mean.sqrt());
    }
    numerics::fit_power_law(&t_mids, &envelope)
}
