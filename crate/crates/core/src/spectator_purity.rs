//! Two qubits, one of them coupled to a random environment.
//!
//! `H = H_e ⊗ 1 + 1 ⊗ H_q + λV` acts on environment ⊗ coupled qubit; the second qubit
//! (the spectator) has no dynamics and only carries the initial entanglement. The joint
//! variant couples both qubits to the same environment through independent perturbations.
//!
//! Monte Carlo times are in units of `τ_H = 2π` of the unfolded environment spectrum;
//! `λ` and `Δ` are in the same unit-spacing units.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::Rng;

use crate::ensembles::{sample_perturbation, sample_random_state, sample_unfolded, EnsembleKind, PerturbationKind};
use crate::error::{invalid, Error, Result};
use crate::fidelity_mc::validate_time_grid;
use crate::linalg::{propagate, HermitianMatrix, MatrixClass};
use crate::parallel::map_indexed;
use crate::quadrature::{integrate, Tolerance};
use crate::rng;
use crate::stats::SeriesAccumulator;
use crate::{C64, TAU_H_UNFOLDED};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// What the second qubit does.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Partner {
    /// No Hamiltonian and no coupling.
    Spectator,
    /// Coupled to the same environment through an independent perturbation.
    Coupled { lambda: f64, delta: f64 },
}

/// A purity Monte Carlo campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectatorConfig {
    pub n_env: usize,
    /// Level splitting of the coupled qubit, `H_q = diag(Δ/2, −Δ/2)`.
    pub delta: f64,
    pub lambda: f64,
    pub env_kind: EnsembleKind,
    pub coupling_kind: PerturbationKind,
    /// Entanglement angle in `[0, π/4]`.
    pub theta1: f64,
    /// Local angle in `[0, π/2]`.
    pub theta2: f64,
    /// Times `t/τ_H`.
    pub time_grid: Vec<f64>,
    pub n_realizations: usize,
    pub n_states: usize,
    pub master_seed: u64,
    pub partner: Partner,
    /// Keep every two-qubit density matrix (needed for concurrence).
    pub store_states: bool,
}

impl SpectatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_env < 2 {
            return invalid(format!("environment dimension must be at least 2, got {}", self.n_env));
        }
        check_angles(self.theta1, self.theta2)?;
        let (l2, d2) = match self.partner {
            Partner::Spectator => (0.0, 0.0),
            Partner::Coupled { lambda, delta } => (lambda, delta),
        };
        for l in [self.lambda, l2] {
            if !(l >= 0.0) || !l.is_finite() {
                return invalid(format!("coupling must be finite and nonnegative, got {l}"));
            }
        }
        if !self.delta.is_finite() || !d2.is_finite() {
            return invalid("level splitting must be finite");
        }
        validate_time_grid(&self.time_grid)?;
        if self.n_realizations == 0 || self.n_states == 0 {
            return invalid("need at least one realization and one state per realization");
        }
        Ok(())
    }
}

fn check_angles(theta1: f64, theta2: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_4 + 1e-15).contains(&theta1) {
        return invalid(format!("theta1 must lie in [0, π/4], got {theta1}"));
    }
    if !(0.0..=FRAC_PI_2 + 1e-15).contains(&theta2) {
        return invalid(format!("theta2 must lie in [0, π/2], got {theta2}"));
    }
    Ok(())
}

/// Two-qubit density matrix in the basis `|00⟩, |01⟩, |10⟩, |11⟩` (coupled qubit first).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix4 {
    entries: [[C64; 4]; 4],
}

impl DensityMatrix4 {
    /// Validates Hermiticity and unit trace to `1e-12` and positivity to `−1e-10`.
    pub fn new(entries: [[C64; 4]; 4]) -> Result<Self> {
        let rho = Self { entries };
        for i in 0..4 {
            for j in 0..4 {
                if (entries[i][j] - entries[j][i].conj()).norm() > 1e-12 {
                    return Err(Error::InvalidState(format!("not Hermitian at ({i}, {j})")));
                }
            }
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let smallest = rho.eigenvalues()[0];
        if smallest < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {smallest}")));
        }
        Ok(rho)
    }

    #[cfg(test)]
    pub(crate) fn new_unchecked(entries: [[C64; 4]; 4]) -> Self {
        Self { entries }
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn pure(psi: &[C64; 4]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return invalid(format!("state is not normalized (norm² {norm})"));
        }
        let mut entries = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                entries[i][j] = psi[i] * psi[j].conj();
            }
        }
        Ok(Self { entries })
    }

    pub fn maximally_mixed() -> Self {
        let mut entries = [[ZERO; 4]; 4];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = C64::new(0.25, 0.0);
        }
        Self { entries }
    }

    /// Werner state `α·1/4 + (1 − α)|Φ⟩⟨Φ|` with `|Φ⟩ = (|00⟩ − |11⟩)/√2`.
    pub fn werner(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return invalid(format!("Werner parameter must lie in [0, 1], got {alpha}"));
        }
        let bell = initial_central_state(FRAC_PI_4, 0.0)?;
        let p = Self::pure(&bell)?;
        let mut entries = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mixed = if i == j { 0.25 * alpha } else { 0.0 };
                entries[i][j] = p.entries[i][j] * (1.0 - alpha) + mixed;
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[[C64; 4]; 4] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.entries[i][i].re).sum()
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let h = HermitianMatrix::from_lower(4, MatrixClass::Custom, |i, j| self.entries[i][j]);
        let e = h.eigenvalues().expect("4x4 Hermitian eigensolver");
        [e[0], e[1], e[2], e[3]]
    }

    /// Reduced state of the coupled qubit (spectator traced out).
    pub fn reduce_to_first(&self) -> [[C64; 2]; 2] {
        let mut r = [[ZERO; 2]; 2];
        for (a, row) in r.iter_mut().enumerate() {
            for (b, x) in row.iter_mut().enumerate() {
                *x = self.entries[2 * a][2 * b] + self.entries[2 * a + 1][2 * b + 1];
            }
        }
        r
    }
}

/// `tr ρ²`.
pub fn purity(rho: &DensityMatrix4) -> f64 {
    rho.entries.iter().flatten().map(|z| z.norm_sqr()).sum()
}

/// `cos θ₁ (cos θ₂|0⟩ + sin θ₂|1⟩)|0⟩ + sin θ₁ (sin θ₂|0⟩ − cos θ₂|1⟩)|1⟩`.
pub fn initial_central_state(theta1: f64, theta2: f64) -> Result<[C64; 4]> {
    check_angles(theta1, theta2)?;
    let (c1, s1) = (theta1.cos(), theta1.sin());
    let (c2, s2) = (theta2.cos(), theta2.sin());
    Ok([c1 * c2, s1 * s2, c1 * s2, -s1 * c2].map(|x| C64::new(x, 0.0)))
}

/// Hamiltonian of one realization on environment ⊗ coupled qubit(s).
#[derive(Debug, Clone)]
pub struct SpectatorModel {
    pub n_env: usize,
    /// 1 for the spectator configuration, 2 when both qubits are coupled.
    pub coupled_qubits: usize,
    /// Diagonal of `H₀` in the product basis, index `e·2^q + qubits`.
    pub h0_diagonal: Vec<f64>,
    /// One perturbation per coupled qubit, each on environment ⊗ that qubit.
    pub couplings: Vec<HermitianMatrix>,
    pub lambdas: Vec<f64>,
}

impl SpectatorModel {
    pub fn dim(&self) -> usize {
        self.h0_diagonal.len()
    }

    /// `H₀ + Σ_i λ_i V_i`.
    pub fn hamiltonian(&self) -> HermitianMatrix {
        let stride = 1 << self.coupled_qubits;
        HermitianMatrix::from_lower(self.dim(), MatrixClass::Custom, |a, b| {
            let (ea, qa) = (a / stride, a % stride);
            let (eb, qb) = (b / stride, b % stride);
            let mut h = if a == b { C64::new(self.h0_diagonal[a], 0.0) } else { ZERO };
            if self.coupled_qubits == 1 {
                h += self.couplings[0].get(a, b) * self.lambdas[0];
            } else {
                let (a1, a2, b1, b2) = (qa >> 1, qa & 1, qb >> 1, qb & 1);
                if a2 == b2 {
                    h += self.couplings[0].get(2 * ea + a1, 2 * eb + b1) * self.lambdas[0];
                }
                if a1 == b1 {
                    h += self.couplings[1].get(2 * ea + a2, 2 * eb + b2) * self.lambdas[1];
                }
            }
            h
        })
    }
}

/// Samples the environment spectrum and couplings of one realization.
pub fn build_spectator<R: Rng + ?Sized>(config: &SpectatorConfig, rng: &mut R) -> Result<SpectatorModel> {
    config.validate()?;
    let env = sample_unfolded(config.env_kind, config.n_env, rng)?;
    let split = |d: f64, q: usize| if q == 0 { d / 2.0 } else { -d / 2.0 };
    let v1 = sample_perturbation(config.coupling_kind, 2 * config.n_env, rng)?;
    Ok(match config.partner {
        Partner::Spectator => SpectatorModel {
            n_env: config.n_env,
            coupled_qubits: 1,
            h0_diagonal: env.levels.iter().flat_map(|&e| (0..2).map(move |q| e + split(config.delta, q))).collect(),
            couplings: vec![v1],
            lambdas: vec![config.lambda],
        },
        Partner::Coupled { lambda, delta } => {
            let v2 = sample_perturbation(config.coupling_kind, 2 * config.n_env, rng)?;
            SpectatorModel {
                n_env: config.n_env,
                coupled_qubits: 2,
                h0_diagonal: env
                    .levels
                    .iter()
                    .flat_map(|&e| (0..4).map(move |q| e + split(config.delta, q >> 1) + split(delta, q & 1)))
                    .collect(),
                couplings: vec![v1, v2],
                lambdas: vec![config.lambda, lambda],
            }
        }
    })
}

/// `ρ_qs = tr_e |Ψ⟩⟨Ψ|` for a pure state indexed `e·4 + (q·2 + s)`.
pub fn reduce_environment(full: &[C64]) -> Result<DensityMatrix4> {
    if !full.len().is_multiple_of(4) || full.is_empty() {
        return invalid(format!("state length {} is not a multiple of 4", full.len()));
    }
    let mut entries = [[ZERO; 4]; 4];
    for chunk in full.chunks_exact(4) {
        for i in 0..4 {
            for j in 0..4 {
                entries[i][j] += chunk[i] * chunk[j].conj();
            }
        }
    }
    Ok(DensityMatrix4 { entries })
}

/// Averaged purity with standard errors; optionally every sampled `ρ_qs`.
#[derive(Debug, Clone, PartialEq)]
pub struct PuritySeries {
    pub t_over_tau_h: Vec<f64>,
    pub mean_purity: Vec<f64>,
    pub stderr_purity: Vec<f64>,
    pub n_samples: usize,
    /// `snapshots[time][sample]`, present when states were stored.
    pub snapshots: Option<Vec<Vec<DensityMatrix4>>>,
}

/// `ρ_qs(t)` for every time of one realization and one environment state.
fn evolve_sample(
    model: &SpectatorModel,
    decomp: &crate::linalg::SpectralDecomposition,
    central: &[C64; 4],
    psi_env: &[C64],
    times: &[f64],
) -> Result<Vec<DensityMatrix4>> {
    let n_env = model.n_env;
    let mut out = vec![DensityMatrix4::pure(central)?; times.len()];
    // Times equal to zero keep the exact initial state.
    let moving: Vec<usize> = (0..times.len()).filter(|&j| times[j] != 0.0).collect();
    let moving_times: Vec<f64> = moving.iter().map(|&j| times[j]).collect();
    if moving.is_empty() {
        return Ok(out);
    }
    let mut full = vec![vec![ZERO; 4 * n_env]; moving.len()];
    if model.coupled_qubits == 1 {
        for s in 0..2 {
            let start: Vec<C64> = (0..2 * n_env).map(|a| psi_env[a / 2] * central[(a % 2) * 2 + s]).collect();
            let cols = propagate(decomp, &start, &moving_times)?;
            for (k, state) in full.iter_mut().enumerate() {
                for e in 0..n_env {
                    for q in 0..2 {
                        state[4 * e + 2 * q + s] = cols[(2 * e + q, k)];
                    }
                }
            }
        }
    } else {
        let start: Vec<C64> = (0..4 * n_env).map(|a| psi_env[a / 4] * central[a % 4]).collect();
        let cols = propagate(decomp, &start, &moving_times)?;
        for (k, state) in full.iter_mut().enumerate() {
            for (a, x) in state.iter_mut().enumerate() {
                *x = cols[(a, k)];
            }
        }
    }
    for (k, &j) in moving.iter().enumerate() {
        out[j] = reduce_environment(&full[k])?;
    }
    Ok(out)
}

/// Runs the campaign on the global thread pool.
pub fn run_purity_mc(config: &SpectatorConfig) -> Result<PuritySeries> {
    run_purity_mc_with_workers(config, None)
}

/// Runs the campaign on `workers` threads; the result does not depend on the worker count.
pub fn run_purity_mc_with_workers(config: &SpectatorConfig, workers: Option<usize>) -> Result<PuritySeries> {
    config.validate()?;
    let central = initial_central_state(config.theta1, config.theta2)?;
    let times: Vec<f64> = config.time_grid.iter().map(|s| s * TAU_H_UNFOLDED).collect();
    let per_realization = map_indexed(config.n_realizations, workers, |k| {
        let mut rng = rng::stream(config.master_seed, k as u64);
        let model = build_spectator(config, &mut rng)?;
        let decomp = model.hamiltonian().eigen().map_err(|_| Error::Eigensolver { realization: k })?;
        (0..config.n_states)
            .map(|_| {
                let psi_env = sample_random_state(config.n_env, &mut rng)?;
                evolve_sample(&model, &decomp, &central, &psi_env, &times)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let samples: Vec<Vec<DensityMatrix4>> = per_realization.into_iter().flatten().collect();

    let mut acc = SeriesAccumulator::new(times.len());
    for s in &samples {
        let p: Vec<f64> = s.iter().enumerate().map(|(j, rho)| if times[j] == 0.0 { 1.0 } else { purity(rho) }).collect();
        acc.push(&p);
    }
    let snapshots = config.store_states.then(|| (0..times.len()).map(|j| samples.iter().map(|s| s[j]).collect()).collect());
    Ok(PuritySeries {
        t_over_tau_h: config.time_grid.clone(),
        mean_purity: acc.means(),
        stderr_purity: acc.stderrs(),
        n_samples: samples.len(),
        snapshots,
    })
}

/// `g(θ) = cos⁴θ + sin⁴θ`.
pub fn g_theta(theta: f64) -> f64 {
    theta.cos().powi(4) + theta.sin().powi(4)
}

/// `g₁ = g(θ₁)[1 − g(θ₂)] + g(θ₂)[1 − g(θ₁)]`.
pub fn g1(theta1: f64, theta2: f64) -> f64 {
    let (a, b) = (g_theta(theta1), g_theta(theta2));
    a * (1.0 - b) + b * (1.0 - a)
}

/// `g₂ = 2[1 − g(θ₁)] − g(θ₂)[1 − 2g(θ₁)]`.
pub fn g2(theta1: f64, theta2: f64) -> f64 {
    let (a, b) = (g_theta(theta1), g_theta(theta2));
    2.0 * (1.0 - a) - b * (1.0 - 2.0 * a)
}

/// `r(t) = t·max{t, τ_H} + (2/(3τ_H))·min{t, τ_H}³`, as printed.
pub fn r_function(t: f64, tau_h: f64) -> f64 {
    t * t.max(tau_h) + 2.0 / (3.0 * tau_h) * t.min(tau_h).powi(3)
}

/// The time function that matches Monte Carlo: `2t·max{t, τ_H} + (2/(3τ_H))·min{t, τ_H}³`,
/// i.e. the correlation double integral taken over the full square.
pub fn r_function_square(t: f64, tau_h: f64) -> f64 {
    2.0 * t * t.max(tau_h) + 2.0 / (3.0 * tau_h) * t.min(tau_h).powi(3)
}

/// Which normalization of the purity double integral to use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PurityConvention {
    /// Double integral over the square `[0, t]²`; agrees with Monte Carlo.
    #[default]
    Square,
    /// The printed formulas verbatim: `r_function`, and the triangle integral in `General`.
    Printed,
}

impl PurityConvention {
    pub fn r(self, t: f64, tau_h: f64) -> f64 {
        match self {
            PurityConvention::Square => r_function_square(t, tau_h),
            PurityConvention::Printed => r_function(t, tau_h),
        }
    }

    fn general_factor(self) -> f64 {
        match self {
            PurityConvention::Square => 2.0,
            PurityConvention::Printed => 1.0,
        }
    }
}

/// Linear-response regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PurityRegime {
    /// Numerical integral valid for any `Δ`.
    General,
    /// `Δ·τ_H ≪ 1`.
    Degenerate,
    /// `Δ·τ_H ≫ 1`.
    Fast,
}

impl std::str::FromStr for PurityRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "general" => Ok(PurityRegime::General),
            "degenerate" => Ok(PurityRegime::Degenerate),
            "fast" => Ok(PurityRegime::Fast),
            _ => invalid(format!("unknown purity regime '{s}'")),
        }
    }
}

/// Linear-response purity of the spectator configuration with a GUE environment.
///
/// `General` evaluates `1 − 2κλ²∫₀ᵗdτ∫₀^τdτ′ [1 + τ_H δ(τ′) − b₂(τ′/τ_H)][g₁ + g₂ cos Δτ′]`
/// with half the delta weight at the `τ′ = 0` boundary, and `κ = 2` for
/// [`PurityConvention::Square`], `κ = 1` for [`PurityConvention::Printed`].
#[allow(clippy::too_many_arguments)]
pub fn lr_purity(
    theta1: f64,
    theta2: f64,
    lambda: f64,
    delta: f64,
    t: f64,
    tau_h: f64,
    regime: PurityRegime,
    convention: PurityConvention,
) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return invalid(format!("time must be finite and nonnegative, got {t}"));
    }
    if !(tau_h > 0.0) {
        return invalid(format!("Heisenberg time must be positive, got {tau_h}"));
    }
    let (a, b) = (g1(theta1, theta2), g2(theta1, theta2));
    let l2 = lambda * lambda;
    Ok(match regime {
        PurityRegime::Degenerate => 1.0 - l2 * (2.0 - g_theta(theta1)) * convention.r(t, tau_h),
        PurityRegime::Fast => 1.0 - l2 * (a * convention.r(t, tau_h) + 2.0 * tau_h * b * t),
        PurityRegime::General => {
            let kernel = |s: f64| (t - s) * (s / tau_h).min(1.0) * (a + b * (delta * s).cos());
            let tol = Tolerance::relative(1e-10).with_absolute(1e-14 * (1.0 + t * t));
            let knee = t.min(tau_h);
            let mut body = integrate(kernel, 0.0, knee, tol)?.value;
            if t > tau_h {
                body += integrate(kernel, tau_h, t, tol)?.value;
            }
            let boundary = tau_h / 2.0 * (a + b) * t;
            1.0 - 2.0 * convention.general_factor() * l2 * (boundary + body)
        }
    })
}

/// `P_∞ = g(θ₁)/2`, the purity after total depolarization of the coupled qubit.
pub fn p_infinity(theta1: f64) -> f64 {
    g_theta(theta1) / 2.0
}

/// `P_∞ + (1 − P_∞)·exp[−(1 − P_LR)/(1 − P_∞)]`.
pub fn elr_purity(p_lr_value: f64, p_inf: f64) -> Result<f64> {
    if !(p_lr_value <= 1.0) {
        return invalid(format!("linear-response purity must not exceed 1, got {p_lr_value}"));
    }
    if !(p_inf > 0.0 && p_inf < 1.0) {
        return invalid(format!("asymptotic purity must lie in (0, 1), got {p_inf}"));
    }
    Ok(p_inf + (1.0 - p_inf) * (-(1.0 - p_lr_value) / (1.0 - p_inf)).exp())
}

/// `P(t) = 1 − Σ_i (1 − P_i(t))`; errors add in quadrature. Snapshots are dropped.
pub fn sum_rule_combine(curves: &[PuritySeries]) -> Result<PuritySeries> {
    let Some(first) = curves.first() else {
        return invalid("no purity curves to combine");
    };
    if curves.iter().any(|c| c.t_over_tau_h != first.t_over_tau_h) {
        return invalid("purity curves have different time grids");
    }
    let len = first.t_over_tau_h.len();
    let mean_purity = (0..len).map(|j| 1.0 - curves.iter().map(|c| 1.0 - c.mean_purity[j]).sum::<f64>()).collect();
    let stderr_purity = (0..len).map(|j| curves.iter().map(|c| c.stderr_purity[j].powi(2)).sum::<f64>().sqrt()).collect();
    Ok(PuritySeries {
        t_over_tau_h: first.t_over_tau_h.clone(),
        mean_purity,
        stderr_purity,
        n_samples: curves.iter().map(|c| c.n_samples).min().unwrap_or(0),
        snapshots: None,
    })
}
