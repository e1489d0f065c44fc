//! Monte Carlo of the echo operator `M_ε(t) = e^{iH₀t} e^{−i(H₀+εV)t}`.
//!
//! `H₀` enters only through its unfolded levels: `V` is drawn directly in the `H₀`
//! eigenbasis, which the invariance of the perturbation ensembles allows. Times are
//! given in units of `τ_H = 2π`.

use faer::Mat;

use crate::ensembles::{band_range, sample_perturbation, sample_random_state, sample_unfolded, EnsembleKind, PerturbationKind};
use crate::error::{invalid, Error, Result};
use crate::linalg::{eigenbasis_coefficients, norm, SpectralDecomposition};
use crate::parallel::map_indexed;
use crate::rng;
use crate::stats::SeriesAccumulator;
use crate::{C64, TAU_H_UNFOLDED};

const UNIT_NORM_TOLERANCE: f64 = 1e-12;

/// Default central fraction of the `H₀` levels kept.
pub const DEFAULT_BAND: f64 = 0.5;
/// Default central fraction of the band carrying the initial states. Keeping the states
/// away from the band edges avoids the level shifts the truncated `V` induces there.
pub const DEFAULT_STATE_FRACTION: f64 = 0.25;

/// A fidelity Monte Carlo campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoRunConfig {
    /// Dimension of `H₀` before the band is cut out.
    pub n: usize,
    pub h0_kind: EnsembleKind,
    pub v_kind: PerturbationKind,
    /// Perturbation strength in unit-spacing units.
    pub epsilon: f64,
    /// Times `t/τ_H`, nonnegative and strictly increasing.
    pub time_grid: Vec<f64>,
    pub n_realizations: usize,
    pub n_states_per_realization: usize,
    /// Central fraction of the `H₀` levels kept; the dynamics lives there.
    pub band: f64,
    /// Central fraction of the band on which initial states are supported.
    pub state_fraction: f64,
    pub master_seed: u64,
}

impl EchoRunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return invalid(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return invalid(format!("epsilon must be finite and nonnegative, got {}", self.epsilon));
        }
        validate_time_grid(&self.time_grid)?;
        if self.n_realizations == 0 || self.n_states_per_realization == 0 {
            return invalid("need at least one realization and one state per realization");
        }
        if !(self.band > 0.0 && self.band <= 1.0) {
            return invalid(format!("band must lie in (0, 1], got {}", self.band));
        }
        if !(self.state_fraction > 0.0 && self.state_fraction <= 1.0) {
            return invalid(format!("state fraction must lie in (0, 1], got {}", self.state_fraction));
        }
        if self.band_dim() < 2 {
            return invalid(format!("band {} of n = {} keeps fewer than 2 levels", self.band, self.n));
        }
        Ok(())
    }

    /// Number of levels in the central band.
    pub fn band_dim(&self) -> usize {
        let (lo, hi) = band_range(self.n, self.band);
        hi - lo
    }

    /// Index range, within the band, of the initial-state support.
    pub fn state_range(&self) -> (usize, usize) {
        let (lo, hi) = band_range(self.band_dim(), self.state_fraction);
        if hi > lo {
            (lo, hi)
        } else {
            (lo, lo + 1)
        }
    }
}

/// Checks that a grid is nonempty, finite, nonnegative and strictly increasing.
pub fn validate_time_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return invalid("time grid is empty");
    }
    if grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return invalid("time grid must be finite and nonnegative");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("time grid must be strictly increasing");
    }
    Ok(())
}

/// Averaged fidelity amplitude and fidelity with standard errors over all samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelitySeries {
    pub t_over_tau_h: Vec<f64>,
    pub mean_re_f: Vec<f64>,
    pub mean_im_f: Vec<f64>,
    pub stderr_re_f: Vec<f64>,
    pub stderr_im_f: Vec<f64>,
    pub mean_fidelity: Vec<f64>,
    pub stderr_fidelity: Vec<f64>,
    /// Realizations × states.
    pub n_samples: usize,
}

/// `⟨ψ| e^{i·diag(h0_levels)·t} e^{−iH_ε t} |ψ⟩`, with `H_ε` written in the `H₀` eigenbasis.
pub fn echo_amplitude(h0_levels: &[f64], h_eps: &SpectralDecomposition, psi: &[C64], t: f64) -> Result<C64> {
    check_state(h0_levels.len(), h_eps, psi)?;
    Ok(echo_series(h0_levels, h_eps, psi, &[t])[0])
}

fn check_state(n0: usize, h_eps: &SpectralDecomposition, psi: &[C64]) -> Result<()> {
    let n = h_eps.dim();
    if n0 != n {
        return Err(Error::DimensionMismatch { expected: n, got: n0 });
    }
    if psi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: psi.len() });
    }
    let norm = norm(psi);
    if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
        return invalid(format!("initial state is not normalized (norm {norm})"));
    }
    Ok(())
}

/// Echo amplitude on a whole time grid (native units), one GEMM for all times.
fn echo_series(h0_levels: &[f64], h_eps: &SpectralDecomposition, psi: &[C64], times: &[f64]) -> Vec<C64> {
    let n = psi.len();
    let u = h_eps.eigenvectors.as_ref();
    let c = eigenbasis_coefficients(h_eps, psi);
    // f(t) = (e^{−iH₀t}ψ)† U e^{−iEt} U†ψ = Σ_k conj(W_kt) e^{−iE_k t} c_k with W = U† e^{−iH₀t}ψ.
    let free = Mat::<C64>::from_fn(n, times.len(), |a, j| psi[a] * C64::cis(-h0_levels[a] * times[j]));
    let w = u.adjoint() * free;
    times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            if t == 0.0 {
                return C64::new(1.0, 0.0);
            }
            (0..n).fold(C64::new(0.0, 0.0), |acc, k| acc + w[(k, j)].conj() * C64::cis(-h_eps.eigenvalues[k] * t) * c[k])
        })
        .collect()
}

/// Every single-state amplitude `f(t)`, indexed `[realization·states + state][time]`.
pub fn run_fidelity_samples(config: &EchoRunConfig, workers: Option<usize>) -> Result<Vec<Vec<C64>>> {
    config.validate()?;
    let times: Vec<f64> = config.time_grid.iter().map(|s| s * TAU_H_UNFOLDED).collect();
    let nb = config.band_dim();
    let (s_lo, s_hi) = config.state_range();
    let per_realization = map_indexed(config.n_realizations, workers, |k| {
        let mut rng = rng::stream(config.master_seed, k as u64);
        let spectrum = sample_unfolded(config.h0_kind, config.n, &mut rng).map_err(|e| at_realization(e, k))?;
        let levels = spectrum.central_band(config.band);
        let v = sample_perturbation(config.v_kind, nb, &mut rng)?;
        let h = v.add_to_diagonal(levels, config.epsilon)?;
        let decomp = h.eigen().map_err(|e| at_realization(e, k))?;
        (0..config.n_states_per_realization)
            .map(|_| {
                let mut psi = vec![C64::new(0.0, 0.0); nb];
                psi[s_lo..s_hi].copy_from_slice(&sample_random_state(s_hi - s_lo, &mut rng)?);
                Ok(echo_series(levels, &decomp, &psi, &times))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(per_realization.into_iter().flatten().collect())
}

fn at_realization(e: Error, k: usize) -> Error {
    match e {
        Error::Eigensolver { .. } => Error::Eigensolver { realization: k },
        other => other,
    }
}

/// Runs the campaign on the global thread pool.
pub fn run_fidelity_mc(config: &EchoRunConfig) -> Result<FidelitySeries> {
    run_fidelity_mc_with_workers(config, None)
}

/// Runs the campaign on `workers` threads (`None`: global pool). The result does not
/// depend on the number of workers.
pub fn run_fidelity_mc_with_workers(config: &EchoRunConfig, workers: Option<usize>) -> Result<FidelitySeries> {
    let samples = run_fidelity_samples(config, workers)?;
    Ok(reduce(&config.time_grid, &samples))
}

fn reduce(grid: &[f64], samples: &[Vec<C64>]) -> FidelitySeries {
    let len = grid.len();
    let mut re = SeriesAccumulator::new(len);
    let mut im = SeriesAccumulator::new(len);
    let mut fid = SeriesAccumulator::new(len);
    for f in samples {
        re.push(&f.iter().map(|z| z.re).collect::<Vec<_>>());
        im.push(&f.iter().map(|z| z.im).collect::<Vec<_>>());
        fid.push(&f.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
    }
    FidelitySeries {
        t_over_tau_h: grid.to_vec(),
        mean_re_f: re.means(),
        mean_im_f: im.means(),
        stderr_re_f: re.stderrs(),
        stderr_im_f: im.stderrs(),
        mean_fidelity: fid.means(),
        stderr_fidelity: fid.stderrs(),
        n_samples: samples.len(),
    }
}

/// Inverse participation ratio `Σ|ψ_ν|⁴` of a state given in the `H₀` eigenbasis.
pub fn ipr(psi: &[C64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr().powi(2)).sum()
}

/// Linear-response fidelity `|⟨f⟩|² + ε²(2/β_V)·ipr·t²`.
pub fn predict_fidelity(mean_f: C64, epsilon: f64, beta_v: u8, ipr_value: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return invalid(format!("time must be nonnegative, got {t}"));
    }
    let beta = match beta_v {
        1 | 2 => beta_v as f64,
        _ => return invalid(format!("perturbation beta must be 1 or 2, got {beta_v}")),
    };
    Ok(mean_f.norm_sqr() + epsilon * epsilon * (2.0 / beta) * ipr_value * t * t)
}
