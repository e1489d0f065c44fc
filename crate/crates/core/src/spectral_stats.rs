//! Spacing distributions, form factors and the two-point correlation integrals.

use statrs::function::gamma::{gamma, gamma_lr};

use crate::ensembles::{EnsembleKind, UnfoldedSpectrum};
use crate::error::{invalid, Result};
use crate::stats::Accumulator;
use crate::C64;

/// Parameters of the Wigner surmise `P_β(s) = a_β s^β exp(−γ_β s²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurmiseParams {
    pub beta: u8,
    pub gamma: f64,
    pub norm: f64,
}

impl SurmiseParams {
    /// `γ_β = Γ²((β+2)/2) / Γ²((β+1)/2)`, which makes the mean spacing one;
    /// `a_β` normalizes the density.
    pub fn new(beta: u8) -> Result<Self> {
        if !matches!(beta, 1 | 2 | 4) {
            return invalid(format!("surmise defined for beta in {{1, 2, 4}}, got {beta}"));
        }
        let b = beta as f64;
        let g = gamma((b + 2.0) / 2.0) / gamma((b + 1.0) / 2.0);
        let gamma_beta = g * g;
        let norm = 2.0 * gamma_beta.powf((b + 1.0) / 2.0) / gamma((b + 1.0) / 2.0);
        Ok(Self { beta, gamma: gamma_beta, norm })
    }

    pub fn pdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.norm * s.powi(self.beta as i32) * (-self.gamma * s * s).exp()
    }

    /// `∫₀ˢ P_β`, a regularized lower incomplete gamma function of `γ_β s²`.
    pub fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        gamma_lr((self.beta as f64 + 1.0) / 2.0, self.gamma * s * s)
    }
}

pub fn wigner_surmise_pdf(s: f64, beta: u8) -> Result<f64> {
    if s < 0.0 {
        return invalid(format!("spacing must be nonnegative, got {s}"));
    }
    Ok(SurmiseParams::new(beta)?.pdf(s))
}

/// Nearest-neighbour spacings of the central band of an unfolded spectrum.
#[derive(Debug, Clone)]
pub struct Spacings {
    pub values: Vec<f64>,
    pub mean: f64,
}

pub fn nn_spacings(spectrum: &UnfoldedSpectrum, band: f64) -> Result<Spacings> {
    let levels = spectrum.central_band(band);
    if levels.len() < 3 {
        return invalid(format!("band keeps {} levels; need at least 3", levels.len()));
    }
    let values: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(Spacings { values, mean })
}

/// `K₂(τ) = |Σ_i exp(2πiτ e_i)|² / N` for unfolded levels `e_i`; `τ` in units of `τ_H = 2π`.
pub fn form_factor(levels: &[f64], tau: f64) -> f64 {
    if levels.is_empty() {
        return 0.0;
    }
    let w = 2.0 * std::f64::consts::PI * tau;
    let sum: C64 = levels.iter().map(|&e| C64::from_polar(1.0, w * e)).sum();
    sum.norm_sqr() / levels.len() as f64
}

/// Ensemble average of `K₂` at one dimensionless time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormFactorEstimate {
    pub tau: f64,
    pub value: f64,
    pub n_spectra: usize,
    pub stderr: f64,
}

/// Averages `K₂(τ)` over spectra; `band` selects the central fraction of each spectrum.
pub fn average_form_factor(spectra: &[UnfoldedSpectrum], taus: &[f64], band: f64) -> Vec<FormFactorEstimate> {
    taus.iter()
        .map(|&tau| {
            let mut acc = Accumulator::default();
            for s in spectra {
                acc.push(form_factor(s.central_band(band), tau));
            }
            FormFactorEstimate { tau, value: acc.mean(), n_spectra: spectra.len(), stderr: acc.stderr() }
        })
        .collect()
}

/// Like [`average_form_factor`], but each spectrum contributes the mean of `K₂` over
/// `points` equally spaced times spanning `[τ − width/2, τ + width/2]`. A single spectrum
/// decorrelates in `τ` over about `1/N`, so the window trades a smoothing bias of order
/// `width` near kinks for a much smaller variance.
pub fn smoothed_form_factor(
    spectra: &[UnfoldedSpectrum],
    taus: &[f64],
    band: f64,
    width: f64,
    points: usize,
) -> Result<Vec<FormFactorEstimate>> {
    if !(width >= 0.0) || !width.is_finite() || points == 0 {
        return invalid(format!("smoothing window needs a finite width >= 0 and at least one point, got {width}, {points}"));
    }
    let offsets: Vec<f64> =
        if points == 1 { vec![0.0] } else { (0..points).map(|k| width * (k as f64 / (points - 1) as f64 - 0.5)).collect() };
    Ok(taus
        .iter()
        .map(|&tau| {
            let mut acc = Accumulator::default();
            for s in spectra {
                let levels = s.central_band(band);
                acc.push(offsets.iter().map(|d| form_factor(levels, tau + d)).sum::<f64>() / points as f64);
            }
            FormFactorEstimate { tau, value: acc.mean(), n_spectra: spectra.len(), stderr: acc.stderr() }
        })
        .collect())
}

/// Empirical `b₂(τ) = 1 − ⟨K₂(τ)⟩` away from `τ = 0`, for ensembles without a closed form.
pub fn empirical_b2(spectra: &[UnfoldedSpectrum], taus: &[f64], band: f64) -> Vec<(f64, f64)> {
    average_form_factor(spectra, taus, band).into_iter().map(|e| (e.tau, 1.0 - e.value)).collect()
}

/// Two-level form factor of the GUE: `1 − |τ|` inside the Heisenberg time, zero beyond.
pub fn b2_gue(tau: f64) -> f64 {
    let a = tau.abs();
    if a <= 1.0 {
        1.0 - a
    } else {
        0.0
    }
}

/// Integration domain of `∫∫ b₂((τ−τ′)/τ_H)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegrationDomain {
    /// `∫₀ᵗ dτ ∫₀^τ dτ′`, the ordered Born-series domain.
    #[default]
    Triangle,
    /// `∫₀ᵗ dτ ∫₀ᵗ dτ′`, exactly twice the triangle for an even `b₂`.
    Square,
}

impl IntegrationDomain {
    pub fn factor(self) -> f64 {
        match self {
            IntegrationDomain::Triangle => 1.0,
            IntegrationDomain::Square => 2.0,
        }
    }
}

/// Triangle-domain correlation integral of the GUE, `∫₀ᵗ (t − s) b₂(s/τ_H) ds`.
fn gue_triangle(t: f64, tau_h: f64) -> f64 {
    if t <= tau_h {
        t * t / 2.0 - t.powi(3) / (6.0 * tau_h)
    } else {
        t * tau_h / 2.0 - tau_h * tau_h / 6.0
    }
}

/// Ideal equidistant spectrum: `b₂(τ) = 1 − Σ_{k≠0} δ(τ − k)`.
fn picket_fence_triangle(t: f64, tau_h: f64) -> f64 {
    let mut c = t * t / 2.0;
    let mut k = 1.0;
    while k * tau_h < t {
        c -= tau_h * (t - k * tau_h);
        k += 1.0;
    }
    c
}

/// Correlation integral `∫∫ b₂((τ−τ′)/τ_H)` entering the linear-response fidelity.
pub fn correlation_integral(t: f64, tau_h: f64, h0_kind: EnsembleKind, domain: IntegrationDomain) -> Result<f64> {
    if !(t >= 0.0) {
        return invalid(format!("time must be nonnegative, got {t}"));
    }
    if !(tau_h > 0.0) {
        return invalid(format!("Heisenberg time must be positive, got {tau_h}"));
    }
    let triangle = match h0_kind {
        EnsembleKind::Gue => gue_triangle(t, tau_h),
        EnsembleKind::Poisson => 0.0,
        EnsembleKind::PicketFence => picket_fence_triangle(t, tau_h),
        EnsembleKind::Goe => {
            return invalid("no closed-form b2 for the GOE; use correlation_integral_tabulated");
        }
    };
    Ok(domain.factor() * triangle)
}

/// Correlation integral from a tabulated `b₂` (pairs `(τ/τ_H, b₂)`, ascending,
/// starting at or near zero), by trapezoidal integration of `(t − s) b₂(s/τ_H)`.
/// `b₂` is taken as zero beyond the table.
pub fn correlation_integral_tabulated(t: f64, tau_h: f64, table: &[(f64, f64)], domain: IntegrationDomain) -> Result<f64> {
    if !(t >= 0.0) {
        return invalid(format!("time must be nonnegative, got {t}"));
    }
    if table.len() < 2 {
        return invalid("b2 table needs at least two points");
    }
    let x_end = t / tau_h;
    let mut acc = 0.0;
    for w in table.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if x0 >= x_end {
            break;
        }
        let x1c = x1.min(x_end);
        let y1c = if x1c < x1 { y0 + (y1 - y0) * (x1c - x0) / (x1 - x0) } else { y1 };
        let g0 = (t - x0 * tau_h) * y0;
        let g1 = (t - x1c * tau_h) * y1c;
        acc += 0.5 * (g0 + g1) * (x1c - x0) * tau_h;
    }
    Ok(domain.factor() * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn surmise_constants() {
        assert_relative_eq!(SurmiseParams::new(1).unwrap().gamma, PI / 4.0, epsilon = 1e-12);
        assert_relative_eq!(SurmiseParams::new(2).unwrap().gamma, 4.0 / PI, epsilon = 1e-12);
        assert_eq!(wigner_surmise_pdf(0.0, 1).unwrap(), 0.0);
        assert!(wigner_surmise_pdf(1.0, 3).is_err());
        assert!(wigner_surmise_pdf(-1.0, 2).is_err());
    }

    #[test]
    fn surmise_normalized_with_unit_mean() {
        for beta in [1u8, 2, 4] {
            let p = SurmiseParams::new(beta).unwrap();
            let tol = Tolerance::relative(1e-12);
            let mass = integrate(|s| p.pdf(s), 0.0, 12.0, tol).unwrap().value;
            let mean = integrate(|s| s * p.pdf(s), 0.0, 12.0, tol).unwrap().value;
            assert_relative_eq!(mass, 1.0, epsilon = 1e-10);
            assert_relative_eq!(mean, 1.0, epsilon = 1e-10);
            let cdf_q = integrate(|s| p.pdf(s), 0.0, 0.8, tol).unwrap().value;
            assert_relative_eq!(p.cdf(0.8), cdf_q, epsilon = 1e-10);
        }
    }

    #[test]
    fn spacings_by_definition() {
        let s = UnfoldedSpectrum::new(vec![0.0, 1.0, 3.0]);
        assert_eq!(nn_spacings(&s, 1.0).unwrap().values, vec![1.0, 2.0]);
        let fence = UnfoldedSpectrum::new((0..10).map(|i| i as f64 + 0.5).collect());
        let sp = nn_spacings(&fence, 1.0).unwrap();
        assert!(sp.values.iter().all(|&x| x == 1.0));
        assert!(nn_spacings(&fence, 0.1).is_err());
    }

    #[test]
    fn form_factor_limits() {
        let levels = [0.3, 1.7, 2.2, 5.0];
        assert_relative_eq!(form_factor(&levels, 0.0), 4.0, epsilon = 1e-12);
        assert_relative_eq!(form_factor(&[2.5], 0.37), 1.0, epsilon = 1e-12);
        let shifted: Vec<f64> = levels.iter().map(|e| e + 13.1).collect();
        assert_relative_eq!(form_factor(&levels, 0.41), form_factor(&shifted, 0.41), epsilon = 1e-9);
    }

    #[test]
    fn smoothing_reduces_to_plain_average() {
        let spectra = vec![UnfoldedSpectrum::new(vec![0.1, 1.3, 2.0, 3.4]), UnfoldedSpectrum::new(vec![0.0, 0.9, 2.2, 2.9])];
        let taus = [0.3, 0.7];
        let plain = average_form_factor(&spectra, &taus, 1.0);
        let single = smoothed_form_factor(&spectra, &taus, 1.0, 0.2, 1).unwrap();
        for (a, b) in plain.iter().zip(&single) {
            assert_relative_eq!(a.value, b.value, epsilon = 1e-14);
        }
        // Two points at τ ± w/2 average the two plain values.
        let pair = smoothed_form_factor(&spectra, &[0.5], 1.0, 0.4, 2).unwrap();
        let both = average_form_factor(&spectra, &taus, 1.0);
        assert_relative_eq!(pair[0].value, (both[0].value + both[1].value) / 2.0, epsilon = 1e-12);
        assert!(smoothed_form_factor(&spectra, &taus, 1.0, -0.1, 3).is_err());
    }

    #[test]
    fn b2_values() {
        assert_eq!(b2_gue(0.5), 0.5);
        assert_eq!(b2_gue(2.0), 0.0);
        assert_eq!(b2_gue(-0.25), 0.75);
    }

    #[test]
    fn correlation_integral_values() {
        let sq = correlation_integral(0.5, 1.0, EnsembleKind::Gue, IntegrationDomain::Square).unwrap();
        assert_relative_eq!(sq, 0.25 - 0.125 / 3.0, epsilon = 1e-15);
        let tri = correlation_integral(0.5, 1.0, EnsembleKind::Gue, IntegrationDomain::Triangle).unwrap();
        assert_relative_eq!(tri, 0.125 - 0.125 / 6.0, epsilon = 1e-15);
        assert_eq!(correlation_integral(3.0, 1.0, EnsembleKind::Poisson, IntegrationDomain::Square).unwrap(), 0.0);
        assert!(correlation_integral(-1.0, 1.0, EnsembleKind::Gue, IntegrationDomain::Square).is_err());
        assert!(correlation_integral(1.0, 1.0, EnsembleKind::Goe, IntegrationDomain::Square).is_err());
    }

    #[test]
    fn gue_integral_matches_quadrature() {
        // direct double integral over the triangle as an independent route
        for &t in &[0.3, 1.0, 1.7, 4.0] {
            let tol = Tolerance::relative(1e-12);
            let outer = integrate(
                |tau| {
                    // split at the kink of b₂ so no segment straddles it unseen
                    let kink = (tau - 1.0).max(0.0);
                    integrate(|tp| b2_gue(tau - tp), 0.0, kink, tol).unwrap().value
                        + integrate(|tp| b2_gue(tau - tp), kink, tau, tol).unwrap().value
                },
                0.0,
                t,
                tol,
            )
            .unwrap()
            .value;
            let c = correlation_integral(t, 1.0, EnsembleKind::Gue, IntegrationDomain::Triangle).unwrap();
            assert_relative_eq!(c, outer, epsilon = 1e-9);
        }
    }

    #[test]
    fn square_printed_form() {
        for &t in &[0.2f64, 0.9, 1.0, 2.5] {
            let tau_h = 1.3;
            let m = t.min(tau_h);
            let printed = t * m - m.powi(3) / (3.0 * tau_h);
            let sq = correlation_integral(t, tau_h, EnsembleKind::Gue, IntegrationDomain::Square).unwrap();
            assert_relative_eq!(sq, printed, epsilon = 1e-12);
        }
    }

    #[test]
    fn tabulated_matches_analytic() {
        let table: Vec<(f64, f64)> = (0..=400)
            .map(|i| {
                let x = i as f64 * 0.005;
                (x, b2_gue(x))
            })
            .collect();
        for &t in &[0.4, 1.0, 1.6] {
            let a = correlation_integral(t, 2.0, EnsembleKind::Gue, IntegrationDomain::Triangle).unwrap();
            let b = correlation_integral_tabulated(t, 2.0, &table, IntegrationDomain::Triangle).unwrap();
            assert_relative_eq!(a, b, epsilon = 1e-4);
        }
    }

    #[test]
    fn picket_fence_before_first_revival() {
        let c = correlation_integral(0.5, 1.0, EnsembleKind::PicketFence, IntegrationDomain::Triangle).unwrap();
        assert_relative_eq!(c, 0.125, epsilon = 1e-15);
        let c = correlation_integral(1.5, 1.0, EnsembleKind::PicketFence, IntegrationDomain::Triangle).unwrap();
        assert_relative_eq!(c, 1.125 - 0.5, epsilon = 1e-15);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn square_is_twice_triangle(t in 0.0f64..5.0, tau_h in 0.1f64..3.0) {
                for kind in [EnsembleKind::Gue, EnsembleKind::Poisson, EnsembleKind::PicketFence] {
                    let tri = correlation_integral(t, tau_h, kind, IntegrationDomain::Triangle).unwrap();
                    let sq = correlation_integral(t, tau_h, kind, IntegrationDomain::Square).unwrap();
                    prop_assert_eq!(sq, 2.0 * tri);
                }
            }

            #[test]
            fn gue_integral_nondecreasing(t in 0.0f64..5.0, dt in 0.0f64..1.0) {
                let a = correlation_integral(t, 1.0, EnsembleKind::Gue, IntegrationDomain::Triangle).unwrap();
                let b = correlation_integral(t + dt, 1.0, EnsembleKind::Gue, IntegrationDomain::Triangle).unwrap();
                prop_assert!(b >= a - 1e-15);
            }

            #[test]
            fn form_factor_shift_invariant(shift in -50.0f64..50.0, tau in -2.0f64..2.0) {
                let levels = [0.1, 1.3, 2.0, 3.9, 4.4];
                let shifted: Vec<f64> = levels.iter().map(|e| e + shift).collect();
                prop_assert!((form_factor(&levels, tau) - form_factor(&shifted, tau)).abs() < 1e-8);
            }
        }
    }
}
