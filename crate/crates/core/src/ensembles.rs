//! Random Hamiltonians, perturbations and unfolded spectra.
//!
//! Normalization: off-diagonal elements of every sampled matrix have unit second
//! moment, `⟨V_ij V_ji⟩ = 1`. GUE diagonals are `N(0, 1)`, GOE diagonals `N(0, 2)`.
//! With this convention the semicircle has radius `2√n` for both ensembles.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::linalg::{HermitianMatrix, MatrixClass};
use crate::C64;

/// Spectral ensemble for the unperturbed Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    Goe,
    Gue,
    /// Uncorrelated levels (uniform on `[0, n]`).
    Poisson,
    /// Equidistant levels `i + 1/2`.
    PicketFence,
}

impl EnsembleKind {
    /// True for the kinds that are sampled as full matrices.
    pub fn is_gaussian(self) -> bool {
        matches!(self, EnsembleKind::Goe | EnsembleKind::Gue)
    }

    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Goe => "goe",
            EnsembleKind::Gue => "gue",
            EnsembleKind::Poisson => "poisson",
            EnsembleKind::PicketFence => "picket-fence",
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "goe" => Ok(EnsembleKind::Goe),
            "gue" => Ok(EnsembleKind::Gue),
            "poisson" | "pue" => Ok(EnsembleKind::Poisson),
            "picket-fence" | "picket" => Ok(EnsembleKind::PicketFence),
            _ => invalid(format!("unknown ensemble '{s}'")),
        }
    }
}

/// Ensemble of the perturbation `V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PerturbationKind {
    FullGoe,
    FullGue,
    /// GUE sample with the diagonal overwritten by zeros (residual interaction).
    ZeroDiagonalGue,
    /// `i(A − Aᵀ)/√2` with `A` real Gaussian.
    ImaginaryAntisymmetric,
}

impl PerturbationKind {
    /// Symmetry index entering the `t²/β_V` term; `None` when the diagonal vanishes.
    pub fn beta(self) -> Option<u8> {
        match self {
            PerturbationKind::FullGoe => Some(1),
            PerturbationKind::FullGue => Some(2),
            PerturbationKind::ZeroDiagonalGue | PerturbationKind::ImaginaryAntisymmetric => None,
        }
    }

    pub fn has_zero_diagonal(self) -> bool {
        self.beta().is_none()
    }

    pub fn name(self) -> &'static str {
        match self {
            PerturbationKind::FullGoe => "goe",
            PerturbationKind::FullGue => "gue",
            PerturbationKind::ZeroDiagonalGue => "gue-zero-diagonal",
            PerturbationKind::ImaginaryAntisymmetric => "imaginary-antisymmetric",
        }
    }
}

impl std::str::FromStr for PerturbationKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "goe" => Ok(PerturbationKind::FullGoe),
            "gue" => Ok(PerturbationKind::FullGue),
            "gue-zero-diagonal" | "zero-diagonal" => Ok(PerturbationKind::ZeroDiagonalGue),
            "imaginary-antisymmetric" | "antisymmetric" => Ok(PerturbationKind::ImaginaryAntisymmetric),
            _ => invalid(format!("unknown perturbation '{s}'")),
        }
    }
}

/// Spectrum rescaled to unit mean level spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedSpectrum {
    /// Sorted levels.
    pub levels: Vec<f64>,
    /// Heisenberg time in the units of `levels` (2π for unit spacing, ħ = 1).
    pub tau_h: f64,
    /// Number of input eigenvalues that fell outside the semicircle support.
    pub clamped: usize,
}

impl UnfoldedSpectrum {
    pub fn new(mut levels: Vec<f64>) -> Self {
        levels.sort_by(f64::total_cmp);
        Self { levels, tau_h: 2.0 * PI, clamped: 0 }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// The central `fraction` of the levels.
    pub fn central_band(&self, fraction: f64) -> &[f64] {
        let (lo, hi) = band_range(self.levels.len(), fraction);
        &self.levels[lo..hi]
    }
}

/// Index range `[lo, hi)` of the central `fraction` of `n` items.
pub fn band_range(n: usize, fraction: f64) -> (usize, usize) {
    let m = ((fraction.clamp(0.0, 1.0) * n as f64).round() as usize).min(n);
    let lo = (n - m) / 2;
    (lo, lo + m)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return invalid(format!("matrix dimension must be at least 2, got {n}"));
    }
    Ok(())
}

fn gue<R: Rng + ?Sized>(n: usize, class: MatrixClass, rng: &mut R) -> HermitianMatrix {
    HermitianMatrix::from_lower(n, class, |i, j| {
        if i == j {
            C64::new(normal(rng), 0.0)
        } else {
            let re = normal(rng);
            let im = normal(rng);
            C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        }
    })
}

fn goe<R: Rng + ?Sized>(n: usize, class: MatrixClass, rng: &mut R) -> HermitianMatrix {
    HermitianMatrix::from_lower(n, class, |i, j| {
        let x = normal(rng);
        C64::new(if i == j { SQRT_2 * x } else { x }, 0.0)
    })
}

/// Draws `H₀` from the GOE or GUE.
pub fn sample_hamiltonian<R: Rng + ?Sized>(kind: EnsembleKind, n: usize, rng: &mut R) -> Result<HermitianMatrix> {
    check_dim(n)?;
    let class = MatrixClass::Ensemble(kind);
    match kind {
        EnsembleKind::Gue => Ok(gue(n, class, rng)),
        EnsembleKind::Goe => Ok(goe(n, class, rng)),
        EnsembleKind::Poisson | EnsembleKind::PicketFence => {
            invalid(format!("{} defines a spectrum only; use sample_spectrum", kind.name()))
        }
    }
}

/// Draws a perturbation `V`.
pub fn sample_perturbation<R: Rng + ?Sized>(kind: PerturbationKind, n: usize, rng: &mut R) -> Result<HermitianMatrix> {
    check_dim(n)?;
    let class = MatrixClass::Perturbation(kind);
    Ok(match kind {
        PerturbationKind::FullGue => gue(n, class, rng),
        PerturbationKind::FullGoe => goe(n, class, rng),
        PerturbationKind::ZeroDiagonalGue => {
            let full = gue(n, class, rng);
            HermitianMatrix::from_lower(n, class, |i, j| if i == j { C64::new(0.0, 0.0) } else { full.get(i, j) })
        }
        PerturbationKind::ImaginaryAntisymmetric => {
            let a: Vec<f64> = (0..n * n).map(|_| normal(rng)).collect();
            // V_ij = i(A_ij − A_ji)/√2 is Hermitian: conj(V_ij) = −i(A_ij − A_ji)/√2 = V_ji.
            HermitianMatrix::from_lower(n, class, |i, j| {
                if i == j {
                    C64::new(0.0, 0.0)
                } else {
                    C64::new(0.0, (a[i * n + j] - a[j * n + i]) * FRAC_1_SQRT_2)
                }
            })
        }
    })
}

/// Draws a spectrum-only ensemble, already at unit mean spacing.
pub fn sample_spectrum<R: Rng + ?Sized>(kind: EnsembleKind, n: usize, rng: &mut R) -> Result<UnfoldedSpectrum> {
    check_dim(n)?;
    match kind {
        EnsembleKind::Poisson => {
            let levels = (0..n).map(|_| rng.random::<f64>() * n as f64).collect();
            Ok(UnfoldedSpectrum::new(levels))
        }
        EnsembleKind::PicketFence => Ok(UnfoldedSpectrum::new((0..n).map(|i| i as f64 + 0.5).collect())),
        EnsembleKind::Goe | EnsembleKind::Gue => invalid(format!("{} is a matrix ensemble; use sample_hamiltonian", kind.name())),
    }
}

/// Cumulative semicircle distribution for radius `2√n`, in `[0, 1]`.
pub fn semicircle_cdf(e: f64, n: usize) -> f64 {
    let x = (e / (2.0 * (n as f64).sqrt())).clamp(-1.0, 1.0);
    0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / PI
}

/// Maps eigenvalues of an `n×n` Gaussian sample to `n·G(E)`, unit mean spacing.
/// Eigenvalues beyond the semicircle edge are clamped and counted.
pub fn semicircle_unfold(eigs: &[f64], n: usize) -> UnfoldedSpectrum {
    let edge = 2.0 * (n as f64).sqrt();
    let clamped = eigs.iter().filter(|e| e.abs() > edge).count();
    let levels = eigs.iter().map(|&e| n as f64 * semicircle_cdf(e, n)).collect();
    UnfoldedSpectrum { clamped, ..UnfoldedSpectrum::new(levels) }
}

/// Unfolded spectrum for any kind: Gaussian kinds are sampled, diagonalized and unfolded.
pub fn sample_unfolded<R: Rng + ?Sized>(kind: EnsembleKind, n: usize, rng: &mut R) -> Result<UnfoldedSpectrum> {
    if kind.is_gaussian() {
        let eigs = sample_hamiltonian(kind, n, rng)?.eigenvalues()?;
        Ok(semicircle_unfold(&eigs, n))
    } else {
        sample_spectrum(kind, n, rng)
    }
}

/// Normalized complex-Gaussian vector: uniformly (Haar) distributed on the unit sphere of `C^n`.
pub fn sample_random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<C64>> {
    if n == 0 {
        return invalid("state dimension must be positive");
    }
    let mut psi: Vec<C64> = (0..n).map(|_| C64::new(normal(rng), normal(rng))).collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);
    Ok(psi)
}
