//! Closed-form fidelity-amplitude predictions.
//!
//! Linear response (LR) and its exponentiation (ELR) work in any units: pass the
//! Heisenberg time of the spectrum. The exact GUE/GOE expressions are written for
//! `τ_H = 1`; use [`map_epsilon_units`] to compare them against Monte Carlo runs on
//! unit-spacing spectra.

use std::f64::consts::FRAC_PI_2;

use crate::ensembles::EnsembleKind;
use crate::error::{invalid, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::spectral_stats::{correlation_integral, IntegrationDomain};

/// Relative tolerance of the exact GUE quadrature.
pub const SUSY_GUE_TOLERANCE: f64 = 1e-8;
/// Relative tolerance of the exact GOE double quadrature.
pub const SUSY_GOE_TOLERANCE: f64 = 1e-6;

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return invalid(format!("time must be finite and nonnegative, got {t}"));
    }
    Ok(())
}

fn check_beta(beta_v: u8) -> Result<f64> {
    match beta_v {
        1 | 2 => Ok(beta_v as f64),
        _ => invalid(format!("perturbation beta must be 1 or 2, got {beta_v}")),
    }
}

/// The `ε²` coefficient of linear response: `t·τ_H/2 + t²/β_V − C(t)`.
pub fn lr_bracket(t: f64, tau_h: f64, beta_v: u8, h0_kind: EnsembleKind, domain: IntegrationDomain) -> Result<f64> {
    check_time(t)?;
    let beta = check_beta(beta_v)?;
    let c = correlation_integral(t, tau_h, h0_kind, domain)?;
    Ok(t * tau_h / 2.0 + t * t / beta - c)
}

/// `⟨f(t)⟩ ≈ 1 − ε²[t·τ_H/2 + t²/β_V − C(t)]`.
pub fn lr_fidelity_amplitude(
    epsilon: f64,
    t: f64,
    tau_h: f64,
    beta_v: u8,
    h0_kind: EnsembleKind,
    domain: IntegrationDomain,
) -> Result<f64> {
    Ok(1.0 - epsilon * epsilon * lr_bracket(t, tau_h, beta_v, h0_kind, domain)?)
}

/// `⟨f(t)⟩ ≈ exp{−ε²[t·τ_H/2 + t²/β_V − C(t)]}`.
pub fn elr_fidelity_amplitude(
    epsilon: f64,
    t: f64,
    tau_h: f64,
    beta_v: u8,
    h0_kind: EnsembleKind,
    domain: IntegrationDomain,
) -> Result<f64> {
    Ok((-epsilon * epsilon * lr_bracket(t, tau_h, beta_v, h0_kind, domain)?).exp())
}

/// Exact fidelity amplitude for `H₀` and `V` from the GUE (`τ_H = 1`):
/// `(1/t) ∫₀^{min(t,1)} (1 + t − 2u) exp[−ε²(1 + t − 2u)t/2] du`.
pub fn susy_fidelity_gue(epsilon: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let e2 = epsilon * epsilon;
    let integrand = |u: f64| {
        let w = 1.0 + t - 2.0 * u;
        w * (-e2 * w * t / 2.0).exp()
    };
    let r = integrate(integrand, 0.0, t.min(1.0), Tolerance::relative(SUSY_GUE_TOLERANCE))?;
    Ok(r.value / t)
}

/// Exact fidelity amplitude for `H₀` and `V` from the GOE (`τ_H = 1`).
///
/// The double integral over `u ∈ [max(0, t−1), t]`, `v ∈ [0, u]` is evaluated after
/// `v = u·sin φ`, which removes the `1/√(u² − v²)` edge, and `u = t − w²`, which
/// removes the `(t − u)^{-1/2}` behaviour of the inner integral at the corner `v = u = t`.
pub fn susy_fidelity_goe(epsilon: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let e2 = epsilon * epsilon;
    let u_lo = (t - 1.0).max(0.0);
    let w_max = (t - u_lo).sqrt();
    let inner_tol = Tolerance::relative(SUSY_GOE_TOLERANCE * 1e-2).with_absolute(1e-300);
    let mut failure = None;
    let outer = |w: f64| -> f64 {
        let u = t - w * w;
        let t_minus_u = w * w;
        let front = t_minus_u * (1.0 - t + u);
        if front <= 0.0 {
            return 0.0;
        }
        let inner = |phi: f64| -> f64 {
            let v = u * phi.sin();
            let x = (2.0 * u + 1.0) * t - t * t + v * v;
            let d = t_minus_u * (t + u) + (u * phi.cos()).powi(2);
            let root = ((u + 1.0) * (u + 1.0) - v * v).sqrt();
            v * x / (d * d * root) * (-e2 * x / 2.0).exp()
        };
        match integrate(inner, 0.0, FRAC_PI_2, inner_tol) {
            Ok(r) => 2.0 * front * r.value * 2.0 * w,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let r = integrate(outer, 0.0, w_max, Tolerance::relative(SUSY_GOE_TOLERANCE));
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r?.value)
}

/// Linear response with a zero-diagonal perturbation on a GUE spectrum:
/// `1 − ε²[t·τ_H/2 − C(t)]`, constant `1 − ε²τ_H²/6` after the Heisenberg time.
pub fn freeze_lr_fidelity(epsilon: f64, t: f64, tau_h: f64) -> Result<f64> {
    check_time(t)?;
    let c = correlation_integral(t, tau_h, EnsembleKind::Gue, IntegrationDomain::Triangle)?;
    Ok(1.0 - epsilon * epsilon * (t * tau_h / 2.0 - c))
}

/// Plateau value of [`freeze_lr_fidelity`].
pub fn freeze_plateau(epsilon: f64, tau_h: f64) -> f64 {
    1.0 - epsilon * epsilon * tau_h * tau_h / 6.0
}

/// Perturbation strength for `τ_H = 1` given the strength on a spectrum with Heisenberg
/// time `tau_h_native`. `ε²·t·τ_H` and `ε²t²` are invariant under `t → t/τ_H`, `ε → ε·τ_H`.
pub fn map_epsilon_units(epsilon_native: f64, tau_h_native: f64) -> Result<f64> {
    if !(tau_h_native > 0.0) {
        return invalid(format!("Heisenberg time must be positive, got {tau_h_native}"));
    }
    Ok(epsilon_native * tau_h_native)
}

/// Inverse of [`map_epsilon_units`].
pub fn unmap_epsilon_units(epsilon_theory: f64, tau_h_native: f64) -> Result<f64> {
    if !(tau_h_native > 0.0) {
        return invalid(format!("Heisenberg time must be positive, got {tau_h_native}"));
    }
    Ok(epsilon_theory / tau_h_native)
}

/// Which closed form a [`TheoryCurve`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoryKind {
    Lr,
    Elr,
    SusyGue,
    SusyGoe,
    FreezeLr,
}

impl std::str::FromStr for TheoryKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" => Ok(TheoryKind::Lr),
            "elr" => Ok(TheoryKind::Elr),
            "susy-gue" => Ok(TheoryKind::SusyGue),
            "susy-goe" => Ok(TheoryKind::SusyGoe),
            "freeze" | "freeze-lr" => Ok(TheoryKind::FreezeLr),
            _ => invalid(format!("unknown theory kind '{s}'")),
        }
    }
}

/// A closed-form prediction tabulated on a time grid, with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct TheoryCurve {
    pub kind: TheoryKind,
    pub epsilon: f64,
    pub tau_h: f64,
    pub beta_v: u8,
    pub h0_kind: EnsembleKind,
    pub domain: IntegrationDomain,
    pub points: Vec<(f64, f64)>,
}

impl TheoryCurve {
    /// Evaluates `kind` on `grid`. The exact kinds ignore `tau_h`, `beta_v`, `h0_kind`
    /// and `domain` (they are fixed to `τ_H = 1` and the matching ensembles).
    pub fn evaluate(
        kind: TheoryKind,
        epsilon: f64,
        tau_h: f64,
        beta_v: u8,
        h0_kind: EnsembleKind,
        domain: IntegrationDomain,
        grid: &[f64],
    ) -> Result<Self> {
        let points = grid
            .iter()
            .map(|&t| {
                let v = match kind {
                    TheoryKind::Lr => lr_fidelity_amplitude(epsilon, t, tau_h, beta_v, h0_kind, domain)?,
                    TheoryKind::Elr => elr_fidelity_amplitude(epsilon, t, tau_h, beta_v, h0_kind, domain)?,
                    TheoryKind::SusyGue => susy_fidelity_gue(epsilon, t)?,
                    TheoryKind::SusyGoe => susy_fidelity_goe(epsilon, t)?,
                    TheoryKind::FreezeLr => freeze_lr_fidelity(epsilon, t, tau_h)?,
                };
                Ok((t, v))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kind, epsilon, tau_h, beta_v, h0_kind, domain, points })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const GUE: EnsembleKind = EnsembleKind::Gue;
    const TRI: IntegrationDomain = IntegrationDomain::Triangle;

    /// Closed-form antiderivative of the exact GUE integrand, independent of the quadrature.
    fn gue_closed_form(epsilon: f64, t: f64) -> f64 {
        let a = epsilon * epsilon * t / 2.0;
        let prim = |w: f64| {
            if a == 0.0 {
                w * w / 2.0
            } else {
                -(w / a + 1.0 / (a * a)) * (-a * w).exp()
            }
        };
        (prim(1.0 + t) - prim((1.0 - t).abs())) / (2.0 * t)
    }

    /// GOE two-level form factor, used only to build the series oracle.
    fn b2_goe(tau: f64) -> f64 {
        let a = tau.abs();
        if a <= 1.0 {
            1.0 - 2.0 * a + a * (1.0 + 2.0 * a).ln()
        } else {
            a * ((2.0 * a + 1.0) / (2.0 * a - 1.0)).ln() - 1.0
        }
    }

    #[test]
    fn lr_examples() {
        assert_eq!(lr_fidelity_amplitude(0.0, 3.0, 1.0, 2, GUE, TRI).unwrap(), 1.0);
        let f = lr_fidelity_amplitude(0.1, 0.5, 1.0, 2, GUE, TRI).unwrap();
        assert_relative_eq!(f, 1.0 - 0.01 * (0.25 + 0.125 / 6.0), epsilon = 1e-12);
        let poisson = lr_fidelity_amplitude(0.1, 0.5, 1.0, 2, EnsembleKind::Poisson, TRI).unwrap();
        assert!(poisson < f);
        assert!(lr_fidelity_amplitude(0.1, 0.5, 1.0, 3, GUE, TRI).is_err());
        assert!(lr_fidelity_amplitude(0.1, -0.5, 1.0, 2, GUE, TRI).is_err());
    }

    #[test]
    fn elr_close_to_lr_for_small_bracket() {
        assert_eq!(elr_fidelity_amplitude(0.0, 2.0, 1.0, 2, GUE, TRI).unwrap(), 1.0);
        for &t in &[0.1, 0.5, 1.0, 2.0] {
            let eps = 0.05;
            let x = eps * eps * lr_bracket(t, 1.0, 2, GUE, TRI).unwrap();
            let lr = lr_fidelity_amplitude(eps, t, 1.0, 2, GUE, TRI).unwrap();
            let elr = elr_fidelity_amplitude(eps, t, 1.0, 2, GUE, TRI).unwrap();
            assert!((elr - lr).abs() <= x * x / 2.0 + 1e-16);
            assert!(elr >= lr);
        }
    }

    #[test]
    fn susy_gue_against_closed_form() {
        for &e2 in &[0.0, 0.2, 1.0, 10.0, 100.0] {
            for &t in &[0.01, 0.3, 0.999, 1.0, 1.001, 1.7, 3.0] {
                let q = susy_fidelity_gue(f64::sqrt(e2), t).unwrap();
                let c = gue_closed_form(f64::sqrt(e2), t);
                assert_relative_eq!(q, c, max_relative = 1e-8, epsilon = 1e-300);
            }
        }
        assert_eq!(susy_fidelity_gue(3.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn susy_gue_unperturbed_is_one() {
        for &t in &[0.2, 1.0, 2.5] {
            assert_relative_eq!(susy_fidelity_gue(0.0, t).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn susy_gue_second_order() {
        let eps = 1e-3;
        for i in 1..=10 {
            let t = i as f64 / 10.0;
            let f = susy_fidelity_gue(eps, t).unwrap();
            let series = t / 2.0 + t.powi(3) / 6.0;
            assert_relative_eq!((1.0 - f) / (eps * eps), series, max_relative = 1e-3);
        }
    }

    #[test]
    fn susy_goe_unperturbed_is_one() {
        for &t in &[0.05, 0.5, 0.99, 1.0, 1.01, 2.0, 3.5] {
            let f = susy_fidelity_goe(0.0, t).unwrap();
            assert_relative_eq!(f, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn susy_goe_second_order_matches_goe_linear_response() {
        // 1 − f ≈ ε²[t/2 + t² − ∫₀ᵗ(t − s) b₂(s) ds] with the GOE form factor.
        let eps = 1e-2;
        for &t in &[0.2, 0.6, 1.0, 1.5] {
            let c = integrate(|s| (t - s) * b2_goe(s), 0.0, t, Tolerance::relative(1e-12)).unwrap().value;
            let bracket = t / 2.0 + t * t - c;
            let f = susy_fidelity_goe(eps, t).unwrap();
            assert_relative_eq!((1.0 - f) / (eps * eps), bracket, max_relative = 2e-2);
        }
    }

    #[test]
    fn susy_continuous_across_heisenberg_time() {
        for &e2 in &[1.0, 4.0] {
            let e = f64::sqrt(e2);
            let gue = (susy_fidelity_gue(e, 1.0 - 1e-9).unwrap() - susy_fidelity_gue(e, 1.0 + 1e-9).unwrap()).abs();
            let goe = (susy_fidelity_goe(e, 1.0 - 1e-9).unwrap() - susy_fidelity_goe(e, 1.0 + 1e-9).unwrap()).abs();
            assert!(gue < 1e-6, "gue jump {gue}");
            assert!(goe < 1e-6, "goe jump {goe}");
        }
    }

    #[test]
    fn susy_small_epsilon_uniformly_near_one() {
        for i in 1..=30 {
            let t = i as f64 * 0.1;
            assert!((susy_fidelity_gue(1e-4, t).unwrap() - 1.0).abs() < 1e-7);
            assert!((susy_fidelity_goe(1e-4, t).unwrap() - 1.0).abs() < 1e-6 + 1e-7);
        }
    }

    #[test]
    fn goe_monotone_and_faster_than_gue_early() {
        let e = f64::sqrt(0.2);
        let mut prev = 1.0;
        for i in 1..=12 {
            let t = i as f64 * 0.25;
            let goe = susy_fidelity_goe(e, t).unwrap();
            let gue = susy_fidelity_gue(e, t).unwrap();
            assert!(goe < prev);
            if t <= 1.0 {
                // The larger t²/β_V term of a GOE perturbation dominates before τ_H.
                assert!(goe < gue, "t = {t}: goe {goe} gue {gue}");
            }
            prev = goe;
        }
    }

    #[test]
    fn goe_revival_smaller_than_gue() {
        let e = 10.0;
        let gue = susy_fidelity_gue(e, 1.0).unwrap();
        let goe = susy_fidelity_goe(e, 1.0).unwrap();
        assert!(goe < gue);
        assert!(goe > 1e-8 && goe < 1e-5, "goe revival {goe}");
    }

    #[test]
    fn freeze_examples() {
        assert_eq!(freeze_lr_fidelity(0.5, 0.0, 1.0).unwrap(), 1.0);
        let e = f64::sqrt(0.1);
        let plateau = 1.0 - 0.1 / 6.0;
        for &t in &[1.0, 1.5, 2.0, 3.3, 4.0] {
            assert_relative_eq!(freeze_lr_fidelity(e, t, 1.0).unwrap(), plateau, epsilon = 1e-14);
        }
        assert_relative_eq!(freeze_plateau(e, 1.0), plateau, epsilon = 1e-15);
    }

    #[test]
    fn epsilon_map_round_trip() {
        assert_eq!(map_epsilon_units(1.0, 1.0).unwrap(), 1.0);
        let tau = 2.0 * std::f64::consts::PI;
        assert_relative_eq!(map_epsilon_units(0.3, tau).unwrap(), 0.3 * tau, epsilon = 1e-15);
        let back = unmap_epsilon_units(map_epsilon_units(0.37, tau).unwrap(), tau).unwrap();
        assert_relative_eq!(back, 0.37, epsilon = 1e-15);
        assert!(map_epsilon_units(1.0, 0.0).is_err());
    }

    #[test]
    fn mapped_linear_response_is_unit_invariant() {
        let tau = 2.0 * std::f64::consts::PI;
        let eps_native = 0.13;
        let eps_theory = map_epsilon_units(eps_native, tau).unwrap();
        for &s in &[0.2, 0.8, 1.4] {
            let native = lr_fidelity_amplitude(eps_native, s * tau, tau, 2, GUE, TRI).unwrap();
            let theory = lr_fidelity_amplitude(eps_theory, s, 1.0, 2, GUE, TRI).unwrap();
            assert_relative_eq!(native, theory, epsilon = 1e-12);
        }
    }

    #[test]
    fn theory_curve_starts_at_one() {
        let grid = [0.0, 0.5, 1.0];
        for kind in [TheoryKind::Lr, TheoryKind::Elr, TheoryKind::SusyGue, TheoryKind::SusyGoe, TheoryKind::FreezeLr] {
            let c = TheoryCurve::evaluate(kind, 1.0, 1.0, 2, GUE, TRI, &grid).unwrap();
            assert_eq!(c.points[0], (0.0, 1.0));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn elr_dominates_lr(eps in 0.0f64..3.0, t in 0.0f64..4.0, beta in 1u8..=2) {
                let lr = lr_fidelity_amplitude(eps, t, 1.0, beta, GUE, TRI).unwrap();
                let elr = elr_fidelity_amplitude(eps, t, 1.0, beta, GUE, TRI).unwrap();
                prop_assert!(elr >= lr);
                prop_assert!(elr > 0.0 && elr <= 1.0);
            }

            #[test]
            fn freeze_flat_after_heisenberg(eps in 0.0f64..1.0, t in 1.0f64..10.0) {
                let v = freeze_lr_fidelity(eps, t, 1.0).unwrap();
                prop_assert!((v - freeze_plateau(eps, 1.0)).abs() < 1e-12);
            }
        }
    }
}
