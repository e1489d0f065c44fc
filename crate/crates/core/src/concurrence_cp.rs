//! Two-qubit entanglement on the concurrence–purity (CP) plane.

use crate::error::{invalid, Error, Result};
use crate::linalg::{HermitianMatrix, MatrixClass};
use crate::spectator_purity::{purity, DensityMatrix4};
use crate::stats::Accumulator;
use crate::C64;

/// Negative eigenvalues down to this size are treated as round-off.
pub const EIGENVALUE_CLAMP: f64 = 1e-10;
/// Default number of equal-width purity bins for CP curves.
pub const DEFAULT_BINS: usize = 40;
/// Default lower purity limit of the distance integral (root of the Werner curve).
pub const DEFAULT_P_MIN: f64 = 1.0 / 3.0;
/// Minimum number of curve points inside `[p_min, 1]` for the distance integral.
pub const MIN_CURVE_POINTS: usize = 20;

type M4 = [[C64; 4]; 4];

fn mul(a: &M4, b: &M4) -> M4 {
    let mut c = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            for j in 0..4 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// Eigen-decomposition of a 4×4 Hermitian matrix: eigenvalues ascending, eigenvectors as columns.
fn eigh(m: &M4) -> Result<(Vec<f64>, M4)> {
    let h = HermitianMatrix::from_lower(4, MatrixClass::Custom, |i, j| m[i][j]);
    let d = h.eigen()?;
    let mut u = [[C64::new(0.0, 0.0); 4]; 4];
    for (i, row) in u.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = d.eigenvectors[(i, j)];
        }
    }
    Ok((d.eigenvalues, u))
}

fn clamp_nonnegative(x: f64, what: &str) -> Result<f64> {
    if x < -EIGENVALUE_CLAMP {
        return Err(Error::InvalidState(format!("{what} has eigenvalue {x} below -{EIGENVALUE_CLAMP:e}")));
    }
    Ok(x.max(0.0))
}

/// Wootters concurrence `max{0, Λ₁ − Λ₂ − Λ₃ − Λ₄}`.
///
/// `Λ_i²` are the eigenvalues of `ρρ̃` with `ρ̃ = (σ_y⊗σ_y)ρ*(σ_y⊗σ_y)`; they are computed
/// from the Hermitian matrix `√ρ ρ̃ √ρ`, which has the same spectrum.
pub fn concurrence(rho: &DensityMatrix4) -> Result<f64> {
    let r = rho.entries();
    let (p, w) = eigh(r)?;
    let mut sqrt_rho = [[C64::new(0.0, 0.0); 4]; 4];
    for (k, &pk) in p.iter().enumerate() {
        let s = clamp_nonnegative(pk, "density matrix")?.sqrt();
        for i in 0..4 {
            for j in 0..4 {
                sqrt_rho[i][j] += w[i][k] * w[j][k].conj() * s;
            }
        }
    }
    // σ_y⊗σ_y is anti-diagonal with entries (−1, 1, 1, −1).
    let y = [-1.0, 1.0, 1.0, -1.0];
    let mut flipped = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            flipped[i][j] = r[3 - i][3 - j].conj() * (y[i] * y[j]);
        }
    }
    let m = mul(&mul(&sqrt_rho, &flipped), &sqrt_rho);
    let (mu, _) = eigh(&m)?;
    let mut lambdas = mu.iter().map(|&x| clamp_nonnegative(x, "ρρ̃").map(f64::sqrt)).collect::<Result<Vec<_>>>()?;
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Concurrence of Werner states as a function of their purity:
/// `max{0, (√(12p − 3) − 1)/2}`.
pub fn werner_curve(p: f64) -> Result<f64> {
    if !(p >= 0.25 - 1e-12) || p > 1.0 + 1e-12 {
        return invalid(format!("purity of a two-qubit state lies in [1/4, 1], got {p}"));
    }
    let x = (12.0 * p - 3.0).max(0.0);
    Ok(((x.sqrt() - 1.0) / 2.0).max(0.0))
}

/// Largest concurrence compatible with purity `p` (maximally entangled mixed states).
/// Used as a sanity envelope for sampled states.
pub fn mems_concurrence_bound(p: f64) -> f64 {
    if p <= 1.0 / 3.0 {
        0.0
    } else if p <= 5.0 / 9.0 {
        (2.0 * (p - 1.0 / 3.0)).sqrt()
    } else {
        (1.0 + (2.0 * p - 1.0).max(0.0).sqrt()) / 2.0
    }
}

/// One point of a CP curve: the average concurrence of the states in a purity bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CPPoint {
    pub purity: f64,
    pub concurrence: f64,
    pub stderr_concurrence: f64,
    pub n_samples: usize,
}

/// Concurrence against purity, ordered by decreasing purity.
#[derive(Debug, Clone, PartialEq)]
pub struct CPCurve {
    pub points: Vec<CPPoint>,
    pub p_min: f64,
}

impl CPCurve {
    /// Curve through the given `(P, C)` pairs.
    pub fn from_points(points: &[(f64, f64)], p_min: f64) -> Self {
        let mut points: Vec<CPPoint> =
            points.iter().map(|&(purity, concurrence)| CPPoint { purity, concurrence, stderr_concurrence: 0.0, n_samples: 1 }).collect();
        points.sort_by(|a, b| b.purity.total_cmp(&a.purity));
        Self { points, p_min }
    }

    /// Averages `(P, C)` samples over `n_bins` equal-width purity bins spanning `[1/4, 1]`.
    /// Empty bins are skipped; each point sits at the mean purity of its bin.
    pub fn from_samples(samples: &[(f64, f64)], n_bins: usize, p_min: f64) -> Result<Self> {
        if n_bins == 0 {
            return invalid("need at least one purity bin");
        }
        let width = 0.75 / n_bins as f64;
        let mut bins = vec![(Accumulator::default(), Accumulator::default()); n_bins];
        for &(p, c) in samples {
            if !(0.25 - 1e-9..=1.0 + 1e-9).contains(&p) {
                return invalid(format!("purity {p} outside [1/4, 1]"));
            }
            let k = (((p - 0.25) / width).floor().max(0.0) as usize).min(n_bins - 1);
            bins[k].0.push(p);
            bins[k].1.push(c);
        }
        let mut points: Vec<CPPoint> = bins
            .iter()
            .filter(|(p, _)| p.count() > 0)
            .map(|(p, c)| CPPoint {
                purity: p.mean(),
                concurrence: c.mean(),
                stderr_concurrence: c.stderr(),
                n_samples: c.count() as usize,
            })
            .collect();
        points.reverse();
        Ok(Self { points, p_min })
    }

    /// Raises `p_min` to the lowest purity the curve reaches, for curves that saturate
    /// above the requested cutoff.
    pub fn clamp_p_min_to_coverage(mut self) -> Self {
        if let Some(low) = self.points.iter().map(|q| q.purity).min_by(f64::total_cmp) {
            self.p_min = self.p_min.max(low);
        }
        self
    }

    /// Bins every sampled density matrix by its purity.
    pub fn from_states<'a>(states: impl IntoIterator<Item = &'a DensityMatrix4>, n_bins: usize, p_min: f64) -> Result<Self> {
        let samples = states.into_iter().map(|rho| Ok((purity(rho), concurrence(rho)?))).collect::<Result<Vec<_>>>()?;
        Self::from_samples(&samples, n_bins, p_min)
    }
}

/// `D = ∫_{p_min}^1 |C(P) − C_W(P)| dP` against the Werner curve.
pub fn cp_distance(curve: &CPCurve) -> Result<f64> {
    cp_distance_to(curve, |p| werner_curve(p).unwrap_or(0.0))
}

/// Trapezoidal `∫ |C(P) − reference(P)| dP` over the part of `[p_min, 1]` the curve covers,
/// with linear interpolation at `p_min`.
///
/// The curve must reach down to `p_min`, reach up to within 5% of the interval below 1,
/// and have at least [`MIN_CURVE_POINTS`] points inside the interval.
pub fn cp_distance_to(curve: &CPCurve, reference: impl Fn(f64) -> f64) -> Result<f64> {
    let p_min = curve.p_min;
    if !(0.25..1.0).contains(&p_min) {
        return invalid(format!("p_min must lie in [1/4, 1), got {p_min}"));
    }
    let mut pts: Vec<(f64, f64)> = curve.points.iter().map(|q| (q.purity, q.concurrence)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let inside = pts.iter().filter(|q| q.0 >= p_min).count();
    if inside < MIN_CURVE_POINTS {
        return invalid(format!("CP curve has {inside} points in [p_min, 1], need {MIN_CURVE_POINTS}"));
    }
    let first = pts.iter().position(|q| q.0 >= p_min).expect("points inside");
    let mut grid = Vec::with_capacity(inside + 1);
    if pts[first].0 > p_min {
        if first == 0 {
            return invalid(format!("CP curve does not reach down to p_min = {p_min}"));
        }
        let (a, b) = (pts[first - 1], pts[first]);
        let c = a.1 + (b.1 - a.1) * (p_min - a.0) / (b.0 - a.0);
        grid.push((p_min, c));
    }
    grid.extend_from_slice(&pts[first..]);
    let top = grid.last().expect("nonempty").0;
    if top < 1.0 - 0.05 * (1.0 - p_min) {
        return invalid(format!("CP curve stops at purity {top}, short of 1"));
    }
    let gap: Vec<f64> = grid.iter().map(|&(p, c)| (c - reference(p)).abs()).collect();
    Ok(grid.windows(2).zip(gap.windows(2)).map(|(g, d)| (g[1].0 - g[0].0) * (d[0] + d[1]) / 2.0).sum())
}

/// Empirical size of `D` for `Δ = 1`: `1/(2^{3.5} N_e) + 2^{−(5 + 50λ)}`.
pub fn ansatz_distance(lambda: f64, n_env: usize) -> f64 {
    1.0 / (2f64.powf(3.5) * n_env as f64) + 2f64.powf(-(5.0 + 50.0 * lambda))
}

/// Concurrence predicted from an exponentiated linear-response purity: `C_W(P_ELR)`.
pub fn elr_concurrence(p_elr: f64) -> Result<f64> {
    werner_curve(p_elr)
}

/// Short-time prediction `C ≈ P_LR`.
pub fn lr_concurrence(p_lr: f64) -> f64 {
    p_lr
}
