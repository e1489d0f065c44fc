// `!(x >= 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

use echo_rmt::concurrence_cp::{ansatz_distance, concurrence, cp_distance, elr_concurrence, CPCurve};
use echo_rmt::ensembles::{sample_unfolded, EnsembleKind, PerturbationKind};
use echo_rmt::fidelity_mc::{run_fidelity_mc_with_workers, EchoRunConfig};
use echo_rmt::fidelity_theory::{freeze_lr_fidelity, freeze_plateau, map_epsilon_units, unmap_epsilon_units, TheoryCurve};
use echo_rmt::parallel::map_indexed;
use echo_rmt::spectator_purity::{
    elr_purity, lr_purity, p_infinity, run_purity_mc_with_workers, Partner, PurityConvention, PurityRegime, SpectatorConfig,
};
use echo_rmt::spectral_stats::{nn_spacings, smoothed_form_factor, SurmiseParams};
use echo_rmt::stats::{ks_distance, Accumulator};
use echo_rmt::{rng, TAU_H_UNFOLDED};

use crate::args::*;
use crate::output::{self, companion_path, Cell, Table};
use crate::CliError;

/// What a finished subcommand reports back for the sidecar.
pub struct Report {
    pub primary: PathBuf,
    pub metadata: Vec<(String, String)>,
}

fn meta(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn time_grid(tmax: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points < 2 {
        return Err(CliError::Config(format!("--points must be at least 2, got {points}")));
    }
    if !(tmax > 0.0) || !tmax.is_finite() {
        return Err(CliError::Config(format!("--tmax must be positive, got {tmax}")));
    }
    Ok((0..points).map(|i| tmax * i as f64 / (points - 1) as f64).collect())
}

pub fn execute(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::EnsembleValidate(a) => ensemble_validate(a),
        Command::FidelityMc(a) => fidelity_mc(a),
        Command::FidelityTheory(a) => fidelity_theory(a),
        Command::Freeze(a) => freeze(a),
        Command::PurityMc(a) => purity_mc(a),
        Command::PurityTheory(a) => purity_theory(a),
        Command::CpPlane(a) => cp_plane(a),
        Command::ConcurrenceDecay(a) => concurrence_decay(a),
    }
}

fn ensemble_validate(a: &EnsembleArgs) -> Result<Report, CliError> {
    if a.bins == 0 {
        return Err(CliError::Config("--bins must be positive".into()));
    }
    let cdf: Box<dyn Fn(f64) -> f64> = match a.kind {
        EnsembleKind::Goe | EnsembleKind::Gue => {
            let surmise = SurmiseParams::new(if a.kind == EnsembleKind::Goe { 1 } else { 2 })?;
            Box::new(move |s| surmise.cdf(s))
        }
        EnsembleKind::Poisson => Box::new(|s: f64| 1.0 - (-s.max(0.0)).exp()),
        EnsembleKind::PicketFence => return Err(CliError::Config("the picket fence has no spacing distribution to validate".into())),
    };
    if a.realizations == 0 {
        return Err(CliError::Config("--realizations must be positive".into()));
    }
    let spectra = map_indexed(a.realizations, a.common.workers, |k| sample_unfolded(a.kind, a.n, &mut rng::stream(a.seed, k as u64)))?;
    let mut spacings = Vec::new();
    for s in &spectra {
        spacings.extend(nn_spacings(s, a.band)?.values);
    }
    let ks = ks_distance(&spacings, &cdf);

    let width = 4.0 / a.bins as f64;
    let mut counts = vec![0usize; a.bins];
    for &s in &spacings {
        if (0.0..4.0).contains(&s) {
            counts[(s / width) as usize] += 1;
        }
    }
    let total = spacings.len() as f64;
    let rows = (0..a.bins)
        .map(|k| {
            let (lo, hi) = (k as f64 * width, (k + 1) as f64 * width);
            vec![Cell::Float((lo + hi) / 2.0), Cell::Float(counts[k] as f64 / (total * width)), Cell::Float((cdf(hi) - cdf(lo)) / width)]
        })
        .collect();
    output::write_table(&Table { header: vec!["s", "density", "reference"], rows }, &a.common.out)?;

    let taus: Vec<f64> = (1..=100).map(|k| 0.02 * k as f64).collect();
    let estimates = smoothed_form_factor(&spectra, &taus, a.band, a.smoothing, 25)?;
    let rows = estimates.iter().map(|e| [e.tau, e.value, e.stderr].map(Cell::Float).to_vec()).collect();
    let ff_path = companion_path(&a.common.out, "formfactor");
    output::write_table(&Table { header: vec!["tau", "K2", "stderr_K2"], rows }, &ff_path)?;

    Ok(Report {
        primary: a.common.out.clone(),
        metadata: vec![meta("ks_distance", ks), meta("n_spacings", spacings.len()), meta("form_factor_csv", ff_path.display())],
    })
}

fn fidelity_mc(a: &FidelityMcArgs) -> Result<Report, CliError> {
    if a.eps.is_none() && !(a.eps2_heis >= 0.0) {
        return Err(CliError::Config(format!("--eps2-heis must be nonnegative, got {}", a.eps2_heis)));
    }
    let epsilon = match a.eps {
        Some(e) => e,
        None => unmap_epsilon_units(a.eps2_heis.sqrt(), TAU_H_UNFOLDED)?,
    };
    let config = EchoRunConfig {
        n: a.n,
        h0_kind: a.h0,
        v_kind: a.v,
        epsilon,
        time_grid: time_grid(a.grid.tmax, a.grid.points)?,
        n_realizations: a.sampling.realizations,
        n_states_per_realization: a.sampling.states,
        band: a.band,
        state_fraction: a.state_fraction,
        master_seed: a.sampling.seed,
    };
    let series = run_fidelity_mc_with_workers(&config, a.common.workers)?;
    output::write_table(&output::fidelity_table(&series), &a.common.out)?;
    Ok(Report {
        primary: a.common.out.clone(),
        metadata: vec![
            meta("seed", a.sampling.seed),
            meta("epsilon_native", epsilon),
            meta("epsilon_heisenberg", map_epsilon_units(epsilon, TAU_H_UNFOLDED)?),
            meta("n_samples", series.n_samples),
        ],
    })
}

fn fidelity_theory(a: &FidelityTheoryArgs) -> Result<Report, CliError> {
    if !(a.eps2 >= 0.0) {
        return Err(CliError::Config(format!("--eps2 must be nonnegative, got {}", a.eps2)));
    }
    let grid = time_grid(a.grid.tmax, a.grid.points)?;
    let curve = TheoryCurve::evaluate(a.kind, a.eps2.sqrt(), 1.0, a.beta_v, a.h0, a.domain.into(), &grid)?;
    output::write_table(&output::theory_table(&curve.points), &a.common.out)?;
    Ok(Report { primary: a.common.out.clone(), metadata: vec![meta("tau_h", 1.0)] })
}

fn freeze(a: &FreezeArgs) -> Result<Report, CliError> {
    if !(a.eps2_heis >= 0.0) {
        return Err(CliError::Config(format!("--eps2-heis must be nonnegative, got {}", a.eps2_heis)));
    }
    let eps = a.eps2_heis.sqrt();
    let grid = time_grid(a.tmax, a.points)?;
    let config = EchoRunConfig {
        n: a.n,
        h0_kind: EnsembleKind::Gue,
        v_kind: PerturbationKind::ZeroDiagonalGue,
        epsilon: unmap_epsilon_units(eps, TAU_H_UNFOLDED)?,
        time_grid: grid.clone(),
        n_realizations: a.sampling.realizations,
        n_states_per_realization: a.sampling.states,
        band: a.band,
        state_fraction: a.state_fraction,
        master_seed: a.sampling.seed,
    };
    let series = run_fidelity_mc_with_workers(&config, a.common.workers)?;
    output::write_table(&output::fidelity_table(&series), &a.common.out)?;
    let theory = grid.iter().map(|&t| Ok((t, freeze_lr_fidelity(eps, t, 1.0)?))).collect::<Result<Vec<_>, CliError>>()?;
    let theory_path = companion_path(&a.common.out, "theory");
    output::write_table(&output::theory_table(&theory), &theory_path)?;
    Ok(Report {
        primary: a.common.out.clone(),
        metadata: vec![meta("seed", a.sampling.seed), meta("plateau", freeze_plateau(eps, 1.0)), meta("theory_csv", theory_path.display())],
    })
}

fn spectator_config(q: &Qubits, grid: Vec<f64>, s: &Sampling, partner: Partner, store: bool) -> SpectatorConfig {
    SpectatorConfig {
        n_env: q.ne,
        delta: q.delta,
        lambda: q.lambda,
        env_kind: q.env,
        coupling_kind: q.coupling,
        theta1: q.theta1,
        theta2: q.theta2,
        time_grid: grid,
        n_realizations: s.realizations,
        n_states: s.states,
        master_seed: s.seed,
        partner,
        store_states: store,
    }
}

fn purity_mc(a: &PurityMcArgs) -> Result<Report, CliError> {
    let partner = match a.partner_lambda {
        Some(lambda) => Partner::Coupled { lambda, delta: a.partner_delta },
        None => Partner::Spectator,
    };
    let config = spectator_config(&a.qubits, time_grid(a.grid.tmax, a.grid.points)?, &a.sampling, partner, false);
    let series = run_purity_mc_with_workers(&config, a.common.workers)?;
    output::write_table(&output::purity_table(&series), &a.common.out)?;
    Ok(Report { primary: a.common.out.clone(), metadata: vec![meta("seed", a.sampling.seed), meta("n_samples", series.n_samples)] })
}

fn purity_theory(a: &PurityTheoryArgs) -> Result<Report, CliError> {
    let grid = time_grid(a.grid.tmax, a.grid.points)?;
    let convention: PurityConvention = a.convention.into();
    let p_inf = p_infinity(a.theta1);
    let points = grid
        .iter()
        .map(|&s| {
            let lr = lr_purity(a.theta1, a.theta2, a.lambda, a.delta, s * TAU_H_UNFOLDED, TAU_H_UNFOLDED, a.regime, convention)?;
            let value = match a.kind {
                PurityKindArg::Lr => lr,
                PurityKindArg::Elr => elr_purity(lr, p_inf)?,
            };
            Ok((s, value))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    output::write_table(&output::theory_table(&points), &a.common.out)?;
    Ok(Report { primary: a.common.out.clone(), metadata: vec![meta("time_unit", "heisenberg"), meta("p_infinity", p_inf)] })
}

fn cp_plane(a: &CpPlaneArgs) -> Result<Report, CliError> {
    let config = spectator_config(&a.qubits, time_grid(a.grid.tmax, a.grid.points)?, &a.sampling, Partner::Spectator, true);
    let series = run_purity_mc_with_workers(&config, a.common.workers)?;
    let snapshots = series.snapshots.unwrap_or_default();
    let curve = CPCurve::from_states(snapshots.iter().flatten(), a.bins, a.p_min)?;
    output::write_table(&output::cp_table(&curve), &a.common.out)?;
    let covered = curve.clone().clamp_p_min_to_coverage();
    let distance = cp_distance(&covered).map_or_else(|e| format!("unavailable ({e})"), |d| d.to_string());
    Ok(Report {
        primary: a.common.out.clone(),
        metadata: vec![
            meta("seed", a.sampling.seed),
            meta("p_min", a.p_min),
            meta("p_min_used", covered.p_min),
            meta("distance", distance),
            meta("ansatz_distance", ansatz_distance(a.qubits.lambda, a.qubits.ne)),
        ],
    })
}

fn concurrence_decay(a: &ConcurrenceDecayArgs) -> Result<Report, CliError> {
    let q = &a.qubits;
    let grid = time_grid(a.grid.tmax, a.grid.points)?;
    let partner = Partner::Coupled { lambda: q.lambda, delta: q.delta };
    let series = run_purity_mc_with_workers(&spectator_config(q, grid.clone(), &a.sampling, partner, true), a.common.workers)?;
    let snapshots = series.snapshots.as_deref().unwrap_or_default();
    let mut rows = Vec::with_capacity(grid.len());
    for (j, &s) in grid.iter().enumerate() {
        let mut acc = Accumulator::default();
        for rho in &snapshots[j] {
            acc.push(concurrence(rho)?);
        }
        // Sum rule over the two identically coupled qubits; both depolarized gives P = 1/4.
        let single = lr_purity(
            q.theta1,
            q.theta2,
            q.lambda,
            q.delta,
            s * TAU_H_UNFOLDED,
            TAU_H_UNFOLDED,
            PurityRegime::General,
            PurityConvention::Square,
        )?;
        let predicted = elr_concurrence(elr_purity(1.0 - 2.0 * (1.0 - single), 0.25)?)?;
        rows.push([s, acc.mean(), acc.stderr(), series.mean_purity[j], series.stderr_purity[j], predicted].map(Cell::Float).to_vec());
    }
    let header = vec!["t_over_tauh", "C", "stderr_C", "P", "stderr_P", "C_elr"];
    output::write_table(&Table { header, rows }, &a.common.out)?;
    Ok(Report { primary: a.common.out.clone(), metadata: vec![meta("seed", a.sampling.seed)] })
}
