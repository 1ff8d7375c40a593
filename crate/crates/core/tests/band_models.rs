//! Coupling profiles and their self-energies: closed forms, cross-model
//! identities, boundary values, and symmetry properties.

mod common;

use banddecay::{BandEdge, BandKind, BandModel, Error, SystemParams};
use common::assert_close;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

fn params() -> SystemParams {
    SystemParams::new(-0.4)
}

#[test]
fn construction_validates_parameters() {
    assert!(BandModel::constant(0.1).is_ok());
    assert!(BandModel::constant(-0.1).is_err());
    assert!(BandModel::power_law(0.1, -0.5, 1.0).is_err());
    // Reversed and zero-width bands are rejected.
    assert!(BandModel::try_new(BandKind::ConstantDelta, 1.0, -1.0, 0.1, 0.0, 0.0).is_err());
    assert!(BandModel::try_new(BandKind::ConstantDelta, 0.0, 0.0, 0.1, 0.0, 0.0).is_err());
}

#[test]
fn coupling_density_values() {
    let c = BandModel::constant(0.2).unwrap();
    assert_eq!(c.delta(0.3), 0.2);
    assert_eq!(c.delta(-0.999), 0.2);
    assert_eq!(c.delta(1.5), 0.0);
    assert_eq!(c.delta(-1.0001), 0.0);

    let ch = BandModel::chain(0.5).unwrap();
    assert_close(ch.delta(0.0), 0.5 / PI, 1e-16, "chain peak");
    assert_close(ch.delta(0.0), 1.59154943091895336e-1, 1e-15, "chain peak anchor");
    assert_eq!(ch.delta(1.0), 0.0);
    assert_close(
        ch.delta(0.6),
        0.5 / PI * (1.0_f64 - 0.36).sqrt(),
        1e-16,
        "chain semicircle",
    );

    // Power-law profile peaks at delta0 regardless of exponents.
    for (bb, bt) in [(0.5, 0.5), (2.0, 0.5), (1.0, 3.0), (0.0, 0.0)] {
        let p = BandModel::power_law(0.37, bb, bt).unwrap();
        let peak = (0..=2000)
            .map(|k| p.delta(-1.0 + 2.0 * k as f64 / 2000.0))
            .fold(0.0_f64, f64::max);
        assert!(
            (peak - 0.37).abs() < 2e-3,
            "peak {peak} for exponents ({bb}, {bt})"
        );
    }
}

#[test]
fn flat_profile_level_shift_closed_form() {
    let m = BandModel::constant(0.02).unwrap();
    let s = m.sigma_prime(-0.4, &params()).unwrap();
    assert_close(s, 0.02 * (0.6_f64 / 1.4).ln(), 1e-15, "flat level shift");
    assert_close(s, -1.69459572077440652e-2, 1e-16, "flat level shift anchor");
    // Edges diverge logarithmically.
    assert!(matches!(
        m.sigma_prime(1.0, &params()),
        Err(Error::NonFinite { .. })
    ));
}

#[test]
fn chain_level_shift_is_linear_inside_and_decays_outside() {
    let m = BandModel::chain(0.3).unwrap();
    let p = params();
    assert_close(m.sigma_prime(0.5, &p).unwrap(), 0.15, 1e-15, "inside");
    // Outside: delta0 * (x - sqrt(x^2 - 1)) for x > 1.
    let x = 2.5_f64;
    assert_close(
        m.sigma_prime(x, &p).unwrap(),
        0.3 * (x - (x * x - 1.0).sqrt()),
        1e-13,
        "outside",
    );
    // Large |x|: the stable form must not cancel catastrophically:
    // x - sqrt(x^2-1) = 1/(x + sqrt(x^2-1)) ~ 1/(2x).
    let far = m.sigma_prime(1e8, &p).unwrap();
    assert!((far * 2.0 * 1e8 / 0.3 - 1.0).abs() < 1e-10, "far value {far}");
}

#[test]
fn power_law_with_zero_exponents_reproduces_the_flat_profile() {
    let flat = BandModel::constant(0.13).unwrap();
    let ple = BandModel::power_law(0.13, 0.0, 0.0).unwrap();
    let p = params();
    for k in 0..50 {
        let e = -1.35 + 2.7 * k as f64 / 49.0;
        if (e - 1.0).abs() < 0.02 || (e + 1.0).abs() < 0.02 {
            continue; // the flat profile's log divergence needs distance
        }
        assert_eq!(ple.delta(e), flat.delta(e));
        let a = ple.sigma_prime(e, &p).unwrap();
        let b = flat.sigma_prime(e, &p).unwrap();
        assert!(
            (a - b).abs() < 1e-8,
            "level shift at {e}: quadrature {a} vs closed form {b}"
        );
    }
}

#[test]
fn half_exponent_power_law_matches_the_chain_profile() {
    // delta0 (1-x)^(1/2) (1+x)^(1/2) = (pi*delta0/pi) sqrt(1-x^2): the chain
    // profile with coupling pi*delta0. Cross-validates the principal-value
    // quadrature against the chain's algebraic level shift.
    let d0 = 0.1;
    let ple = BandModel::power_law(d0, 0.5, 0.5).unwrap();
    let chain = BandModel::chain(PI * d0).unwrap();
    let p = params();
    for k in 0..40 {
        let e = -1.2 + 2.4 * k as f64 / 39.0;
        assert!(
            (ple.delta(e) - chain.delta(e)).abs() < 1e-15,
            "density mismatch at {e}"
        );
        let a = ple.sigma_prime(e, &p).unwrap();
        let b = chain.sigma_prime(e, &p).unwrap();
        assert!(
            (a - b).abs() < 1e-8,
            "level shift at {e}: quadrature {a} vs closed form {b}"
        );
    }
}

#[test]
fn affine_band_mapping_shifts_and_scales_consistently() {
    // A band [1, 5] with the chain profile: results must be the canonical
    // ones mapped through E = c + h x (level shift values transport as-is).
    let canon = BandModel::chain(0.3).unwrap();
    let wide = BandModel::try_new(BandKind::SemiInfiniteChain, 1.0, 5.0, 0.3, 0.0, 0.0).unwrap();
    let p = params();
    assert_eq!(wide.center(), 3.0);
    assert_eq!(wide.half_width(), 2.0);
    for x in [-0.7, -0.2, 0.4, 0.9, 1.3, 2.0] {
        let e_wide = 3.0 + 2.0 * x;
        assert_close(
            wide.delta(e_wide),
            canon.delta(x),
            1e-15,
            "density transports unchanged",
        );
        assert_close(
            wide.sigma_prime(e_wide, &p).unwrap(),
            canon.sigma_prime(x, &p).unwrap(),
            1e-13,
            "level shift transports unchanged",
        );
        // Slopes pick up the 1/h factor.
        assert_close(
            wide.d_sigma_prime(e_wide, &p).unwrap(),
            canon.d_sigma_prime(x, &p).unwrap() / 2.0,
            1e-12,
            "slope rescales by the half-width",
        );
    }
}

#[test]
fn standard_sheet_boundary_values_give_minus_pi_delta() {
    // Im Σ(E + is) → -πΔ(E) as s → 0⁺, checked with Richardson
    // extrapolation in s at seeded random interior points.
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let p = params();
    let models = [
        BandModel::constant(0.15).unwrap(),
        BandModel::chain(0.4).unwrap(),
        BandModel::power_law(0.2, 1.0, 0.5).unwrap(),
    ];
    for model in &models {
        for _ in 0..20 {
            let e: f64 = rng.gen_range(-0.9..0.9);
            let s = 1e-5;
            let v1 = model
                .sigma_standard(Complex64::new(e, s), &p)
                .unwrap()
                .im;
            let v2 = model
                .sigma_standard(Complex64::new(e, 0.5 * s), &p)
                .unwrap()
                .im;
            let extrapolated = 2.0 * v2 - v1;
            let expected = -PI * model.delta(e);
            assert!(
                (extrapolated - expected).abs() < 1e-6,
                "{:?} at E={e}: {extrapolated} vs {expected}",
                model.kind
            );
        }
    }
}

#[test]
fn standard_sheet_rejects_points_on_the_band() {
    let m = BandModel::constant(0.1).unwrap();
    let err = m
        .sigma_standard(Complex64::new(0.3, 0.0), &params())
        .unwrap_err();
    assert!(matches!(err, Error::OnCut { .. }));
}

#[test]
fn continued_sheet_agrees_with_the_standard_sheet_above_the_axis() {
    let p = params();
    for model in [BandModel::constant(0.12).unwrap(), BandModel::chain(0.6).unwrap()] {
        for omega in [
            Complex64::new(0.3, 0.4),
            Complex64::new(-1.6, 0.01),
            Complex64::new(2.0, 2.0),
            Complex64::new(0.0, 1e-5),
        ] {
            let std = model.sigma_standard(omega, &p).unwrap();
            let cont = model.second_sheet_sigma(omega, &p).unwrap();
            assert!(
                (std - cont).norm() < 1e-13,
                "{:?} at {omega}: {std} vs {cont}",
                model.kind
            );
        }
    }
}

#[test]
fn continued_sheet_on_the_band_is_the_retarded_boundary_value() {
    let p = params();
    // Σ_II on the real band segment equals Σ′(E) - iπΔ(E).
    let m = BandModel::constant(0.12).unwrap();
    let e = -0.35;
    let v = m.second_sheet_sigma(Complex64::new(e, 0.0), &p).unwrap();
    assert_close(v.re, m.sigma_prime(e, &p).unwrap(), 1e-13, "real part");
    assert_close(v.im, -PI * 0.12, 1e-13, "imaginary part");

    let ch = BandModel::chain(0.5).unwrap();
    let v = ch.second_sheet_sigma(Complex64::new(0.0, 0.0), &p).unwrap();
    assert!((v - Complex64::new(0.0, -0.5)).norm() < 1e-14, "chain center: {v}");
}

#[test]
fn continued_sheet_sits_one_winding_below_the_standard_asymptote() {
    // Far below the band the standard function approaches ∫Δ/ω, while the
    // continued branch differs from it by the full winding term −2πiΔ(ω),
    // which for the flat profile is the constant −2πiΔ₀ everywhere.
    let p = params();
    let m = BandModel::constant(0.2).unwrap();
    let omega = Complex64::new(0.4, -60.0);
    let std = m.sigma_standard(omega, &p).unwrap();
    let asymptote = Complex64::new(2.0 * 0.2, 0.0) / omega;
    assert!(
        (std - asymptote).norm() < 1e-3 * asymptote.norm(),
        "standard sheet: {std} vs {asymptote}"
    );
    let continued = m.second_sheet_sigma(omega, &p).unwrap();
    let winding = Complex64::new(0.0, -2.0 * PI * 0.2);
    assert!(
        (continued - std - winding).norm() < 1e-12,
        "winding mismatch: {continued} vs {std} + {winding}"
    );
}

#[test]
fn continued_sheet_is_refused_for_power_law_edges() {
    let m = BandModel::power_law(0.1, 0.5, 0.5).unwrap();
    let err = m
        .second_sheet_sigma(Complex64::new(0.0, -0.5), &params())
        .unwrap_err();
    assert!(matches!(err, Error::UnsupportedModel { .. }));
}

#[test]
fn continued_sheet_rejects_points_on_the_vertical_rays() {
    let m = BandModel::constant(0.1).unwrap();
    let err = m
        .second_sheet_sigma(Complex64::new(1.0, -0.3), &params())
        .unwrap_err();
    assert!(matches!(err, Error::OnCut { .. }));
    // The explicit one-sided evaluation exists for exactly that ray.
    assert!(m.second_sheet_sigma_cut_inside(BandEdge::Top, 0.3).is_ok());
}

#[test]
fn cut_ray_jump_of_the_flat_profile_is_one_winding() {
    // Σ_std - Σ_II(inside) on either vertical ray equals 2πiΔ₀ exactly: the
    // continued sheet differs by one winding of the vanishing log factor.
    let m = BandModel::constant(0.17).unwrap();
    let p = params();
    for (edge, e_edge) in [(BandEdge::Bottom, -1.0), (BandEdge::Top, 1.0)] {
        for y in [1e-6, 0.03, 0.8, 12.0] {
            let std = m.sigma_standard(Complex64::new(e_edge, -y), &p).unwrap();
            let inside = m.second_sheet_sigma_cut_inside(edge, y).unwrap();
            let jump = std - inside;
            assert!(
                (jump - Complex64::new(0.0, 2.0 * PI * 0.17)).norm() < 1e-12,
                "{edge:?} y={y}: jump {jump}"
            );
        }
    }
}

#[test]
fn chain_cut_ray_jump_vanishes_at_the_edge() {
    // For the semicircular profile the density vanishes at the edge, so the
    // jump across the ray shrinks like sqrt(y) as the edge is approached.
    let m = BandModel::chain(0.5).unwrap();
    let p = params();
    let jump_at = |y: f64| {
        let std = m.sigma_standard(Complex64::new(1.0, -y), &p).unwrap();
        let inside = m.second_sheet_sigma_cut_inside(BandEdge::Top, y).unwrap();
        (std - inside).norm()
    };
    let j1 = jump_at(1e-2);
    let j2 = jump_at(1e-4);
    let j3 = jump_at(1e-6);
    assert!(
        (j1 / j2 - 10.0).abs() < 0.5 && (j2 / j3 - 10.0).abs() < 0.1,
        "sqrt scaling violated: {j1:.3e} {j2:.3e} {j3:.3e}"
    );
}

#[test]
fn second_moment_of_the_density_matches_closed_forms() {
    // ∫Δ dE anchors the quadratic onset of decay downstream.
    let spec = banddecay::QuadratureSpec::new(1e-11);
    for (model, expected) in [
        (BandModel::constant(0.02).unwrap(), 0.04),
        (BandModel::chain(0.5).unwrap(), 0.25),
        (BandModel::power_law(0.1, 0.5, 0.5).unwrap(), 0.1 * PI / 2.0),
    ] {
        let v = banddecay::numerics::integrate_real(
            |e| Ok(model.delta(e)),
            model.e_bottom,
            model.e_top,
            &spec,
        )
        .unwrap();
        assert!(
            (v - expected).abs() < 1e-9,
            "{:?}: weight {v} vs {expected}",
            model.kind
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn level_shift_is_odd_for_symmetric_profiles(
        e in 0.0_f64..2.5,
        d0 in 0.01_f64..0.5,
        chain in proptest::bool::ANY,
    ) {
        let model = if chain {
            BandModel::chain(d0).unwrap()
        } else {
            BandModel::constant(d0).unwrap()
        };
        let p = params();
        prop_assume!((e - 1.0).abs() > 1e-3);
        let plus = model.sigma_prime(e, &p).unwrap();
        let minus = model.sigma_prime(-e, &p).unwrap();
        prop_assert!((plus + minus).abs() < 1e-12, "Σ′({e})={plus}, Σ′(−{e})={minus}");
    }

    #[test]
    fn density_is_nonnegative_and_supported_on_the_band(
        e in -3.0_f64..3.0,
        d0 in 0.01_f64..1.0,
        bb in 0.0_f64..2.5,
        bt in 0.0_f64..2.5,
    ) {
        let m = BandModel::power_law(d0, bb, bt).unwrap();
        let v = m.delta(e);
        prop_assert!(v >= 0.0);
        prop_assert!(v <= d0 + 1e-12);
        if !(-1.0..=1.0).contains(&e) {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn slope_of_the_level_shift_is_negative_outside_the_band(
        off in 1e-4_f64..3.0,
        d0 in 0.01_f64..0.8,
        kind in 0_u8..3,
        above in proptest::bool::ANY,
    ) {
        let model = match kind {
            0 => BandModel::constant(d0).unwrap(),
            1 => BandModel::chain(d0).unwrap(),
            _ => BandModel::power_law(d0, 1.0, 0.5).unwrap(),
        };
        let e = if above { 1.0 + off } else { -1.0 - off };
        let s = model.d_sigma_prime(e, &params()).unwrap();
        prop_assert!(s < 0.0, "dΣ′/dE({e}) = {s} for {kind}");
    }
}
