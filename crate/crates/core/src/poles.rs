//! Real bound-state poles of the level propagator outside the band, their
//! residue weights, and the complex resonance pole on the analytically
//! continued sheet.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::band_models::{BandKind, BandModel, SystemParams};
use crate::error::{Error, Result};
use crate::numerics::{self, QuadratureSpec};

/// Which side of the band a bound pole sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    BelowBand,
    AboveBand,
}

/// Which sheet of the propagator a complex pole was found on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    /// The sheet reached by continuing through the band interval.
    Second,
}

/// A real pole of the propagator outside the band: a bound state of the
/// coupled system, with its residue weight (the squared overlap of the
/// bound eigenstate with the discrete level).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPole {
    pub energy: f64,
    /// Residue weight w = 1/(1 - dΣ′/dE) at the pole, in (0, 1].
    pub weight: f64,
    pub side: Side,
    /// Set when the pole hugs its band edge more closely than the root
    /// tolerance resolves. Such poles are located in the edge-offset
    /// coordinate instead of by bracketing, and `energy` may round onto the
    /// edge itself in floating point.
    pub near_edge: bool,
    /// Exact distance from the nearer band edge (always positive); reliable
    /// even when `energy` has rounded onto the edge.
    pub edge_offset: f64,
}

/// The complex pole of the propagator on the continued sheet, responsible
/// for the exponential stage of the decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonancePole {
    /// Pole location; its imaginary part is strictly negative.
    pub omega: Complex64,
    pub sheet: Sheet,
}

fn locator(model: &BandModel, params: &SystemParams, e: f64) -> Result<f64> {
    Ok(e - params.epsilon - model.sigma_prime(e, params)?)
}

/// Finds the real poles E = ε + Σ′(E) outside the band, at most one per
/// side (the locator is strictly monotone there). The empty list is a valid
/// result.
pub fn find_real_poles(model: &BandModel, params: &SystemParams) -> Result<Vec<BoundPole>> {
    if model.delta0 == 0.0 {
        // Decoupled level: the propagator is 1/(E - ε) and the level itself
        // is the only state. It counts as a pole only when it sits outside
        // the band.
        let eps = params.epsilon;
        if eps < model.e_bottom - params.root_tol {
            return Ok(vec![BoundPole {
                energy: eps,
                weight: 1.0,
                side: Side::BelowBand,
                near_edge: false,
                edge_offset: model.e_bottom - eps,
            }]);
        }
        if eps > model.e_top + params.root_tol {
            return Ok(vec![BoundPole {
                energy: eps,
                weight: 1.0,
                side: Side::AboveBand,
                near_edge: false,
                edge_offset: eps - model.e_top,
            }]);
        }
        return Ok(vec![]);
    }

    let mut poles = Vec::new();
    if let Some(p) = find_pole_on_side(model, params, Side::BelowBand)? {
        poles.push(p);
    }
    if let Some(p) = find_pole_on_side(model, params, Side::AboveBand)? {
        poles.push(p);
    }
    Ok(poles)
}

fn find_pole_on_side(
    model: &BandModel,
    params: &SystemParams,
    side: Side,
) -> Result<Option<BoundPole>> {
    let rt = params.root_tol;
    let (edge, dir) = match side {
        Side::BelowBand => (model.e_bottom, -1.0),
        Side::AboveBand => (model.e_top, 1.0),
    };
    // u(d) = dir * L(edge + dir*d) is strictly increasing in the offset d on
    // either side; a root exists iff u is still negative at the smallest
    // resolvable offset.
    let u = |d: f64| -> Result<f64> { Ok(dir * locator(model, params, edge + dir * d)?) };

    let u_near = u(rt)?;
    if u_near >= 0.0 {
        // No root at offsets the bracketing scan can resolve. Only the
        // constant profile, whose level shift diverges logarithmically at
        // the edges, still guarantees a pole inside the blind zone.
        if model.kind == BandKind::ConstantDelta {
            return near_edge_pole(model, params, side).map(Some);
        }
        return Ok(None);
    }

    let cap = params.epsilon.abs() + 10.0 + 100.0 * model.delta0;
    let mut d_lo = rt;
    let mut d_hi = 2.0 * rt;
    loop {
        if d_hi > cap {
            return Ok(None);
        }
        if u(d_hi)? >= 0.0 {
            break;
        }
        d_lo = d_hi;
        d_hi *= 2.0;
    }
    let d_root = numerics::find_root_bracketed(u, d_lo, d_hi, rt)?;
    let energy = edge + dir * d_root;
    let weight = residue_weight(model, params, energy, d_root)?;
    Ok(Some(BoundPole { energy, weight, side, near_edge: false, edge_offset: d_root }))
}

/// Pole of the constant profile trapped between a band edge and the closest
/// offset the bracketing scan can see. The defining equation, written in
/// the edge-offset coordinate d (distance from the edge, positive outward),
/// is the rapidly contracting fixed point
///
///   d = (W + d) * exp(-(a + d)/Δ₀),
///
/// where W is the band width and a > 0 the distance from the level energy
/// to this edge. The weight uses the same offset, so nothing is lost to the
/// energy's rounding onto the edge.
fn near_edge_pole(model: &BandModel, params: &SystemParams, side: Side) -> Result<BoundPole> {
    let w_band = model.width();
    let d0 = model.delta0;
    let (edge, dir) = match side {
        Side::BelowBand => (model.e_bottom, -1.0),
        Side::AboveBand => (model.e_top, 1.0),
    };
    let a = dir * (edge - params.epsilon);
    if !(a > 0.0) || d0 == 0.0 {
        return Err(Error::non_finite(format!(
            "near-edge pole iteration on the {side:?} side has no contracting fixed point"
        )));
    }
    let mut d = w_band * (-a / d0).exp();
    for _ in 0..200 {
        let next = (w_band + d) * (-(a + d) / d0).exp();
        if !next.is_finite() {
            return Err(Error::non_finite(format!(
                "near-edge pole iteration on the {side:?} side"
            )));
        }
        if (next - d).abs() <= 1e-15 * next.abs() {
            d = next;
            break;
        }
        d = next;
    }
    // An offset below the smallest positive float means the pole is closer
    // to the edge than f64 can express at all; clamp so the weight stays a
    // positive (if absurdly small) number.
    let d = d.max(f64::MIN_POSITIVE);
    let weight = constant_profile_weight(d0, w_band, d);
    Ok(BoundPole {
        energy: edge + dir * d,
        weight,
        side,
        near_edge: d < params.root_tol,
        edge_offset: d,
    })
}

/// 1/(1 - dΣ′/dE) for the constant profile, written against the edge offset
/// so it stays exact arbitrarily close to the edge.
fn constant_profile_weight(delta0: f64, band_width: f64, edge_offset: f64) -> f64 {
    1.0 / (1.0 + delta0 * (1.0 / edge_offset - 1.0 / (band_width + edge_offset)))
}

fn residue_weight(
    model: &BandModel,
    params: &SystemParams,
    energy: f64,
    edge_offset: f64,
) -> Result<f64> {
    match model.kind {
        BandKind::ConstantDelta => {
            Ok(constant_profile_weight(model.delta0, model.width(), edge_offset))
        }
        _ => Ok(1.0 / (1.0 - model.d_sigma_prime(energy, params)?)),
    }
}

/// Squared amplitude of the discrete level in the bound eigenstate at the
/// pole: 1/[1 + ∫ Δ(E)/(E_j - E)² dE]. Evaluated by direct quadrature of
/// the normalization integral, an independent route to the residue weight.
///
/// For near-edge poles of the constant profile the integrand's mass sits
/// within `edge_offset` of the edge — far beneath quadrature resolution —
/// so the elementary antiderivative of 1/(E_j - E)² is used instead.
pub fn bound_state_overlap(
    model: &BandModel,
    params: &SystemParams,
    pole: &BoundPole,
) -> Result<f64> {
    if !(pole.edge_offset > 0.0) {
        return Err(Error::degenerate(format!(
            "bound-state overlap needs a pole strictly outside the band, got edge offset {}",
            pole.edge_offset
        )));
    }
    if model.delta0 == 0.0 {
        return Ok(1.0);
    }
    if model.kind == BandKind::ConstantDelta && pole.edge_offset < 1e-8 {
        let s = model.delta0 * (1.0 / pole.edge_offset - 1.0 / (model.width() + pole.edge_offset));
        return Ok(1.0 / (1.0 + s));
    }

    // Reconstruct the pole position from the exact edge offset: this keeps
    // (E_j - E) accurate near the edge even where `energy` lost digits.
    let energy = match pole.side {
        Side::BelowBand => model.e_bottom - pole.edge_offset,
        Side::AboveBand => model.e_top + pole.edge_offset,
    };
    let d_near = pole.edge_offset;
    // A-priori bound on the normalization integral fixes a scale-aware
    // absolute tolerance: the requested quad_tol is treated as relative to
    // the integral's possible size.
    let bound = model.delta_max() * (1.0 / d_near);
    let spec = QuadratureSpec::new(params.quad_tol * bound.max(1.0));
    let (ta, tb) = model.edge_transform_flags();
    let s = numerics::integrate_edge_transformed(
        |e| {
            let d = energy - e;
            Ok(Complex64::new(model.delta(e) / (d * d), 0.0))
        },
        model.e_bottom,
        model.e_top,
        ta,
        tb,
        &spec,
    )?
    .re;
    Ok(1.0 / (1.0 + s))
}

/// Newton search for the complex pole ω = ε + Σ(ω) on the continued sheet,
/// seeded at the perturbative estimate ε + Σ′(ε) - iπΔ(ε). Roots must land
/// in the lower half-plane within a few bandwidths of the band; a search
/// that runs away (it does when no such pole exists) is reported as
/// NoConvergence rather than returned.
pub fn find_resonance_pole(model: &BandModel, params: &SystemParams) -> Result<ResonancePole> {
    if !model.supports_second_sheet() {
        return Err(Error::unsupported(
            "resonance pole search needs the analytically continued self-energy",
        ));
    }
    let d_eps = model.delta(params.epsilon);
    if d_eps <= 0.0 {
        return Err(Error::DecoupledLevel);
    }
    let sp = model.sigma_prime(params.epsilon, params)?;
    let seed = Complex64::new(params.epsilon + sp, -PI * d_eps);
    let w_band = model.width();
    let eps = params.epsilon;
    let f = |omega: Complex64| -> Result<Complex64> {
        Ok(omega - eps - model.second_sheet_sigma(omega, params)?)
    };

    // Fallback seeds cover searches whose first Newton path strays onto a
    // cut ray; the accepted root does not depend on which seed found it.
    let seeds = [
        seed,
        seed - Complex64::new(0.0, 0.25 * w_band),
        Complex64::new(model.center(), -0.5 * w_band),
    ];
    let mut last_err: Option<Error> = None;
    for s in seeds {
        match numerics::find_root_complex(f, s, params.root_tol) {
            Ok(root) => {
                let in_box = root.im < 0.0
                    && root.im >= -3.0 * w_band
                    && root.re >= model.e_bottom - w_band
                    && root.re <= model.e_top + w_band;
                if in_box {
                    return Ok(ResonancePole { omega: root, sheet: Sheet::Second });
                }
                let residual = f(root).map(|v| v.norm()).unwrap_or(f64::INFINITY);
                last_err = Some(Error::NoConvergence {
                    context: format!(
                        "resonance search from seed {s} ran away to {root}, outside the physical region"
                    ),
                    residual,
                    tolerance: params.root_tol,
                });
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one seed was tried"))
}
