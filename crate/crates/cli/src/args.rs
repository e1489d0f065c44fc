//! Command-line definitions. Times are in units of the Heisenberg time; couplings and
//! splittings are in units of the mean level spacing of the unperturbed spectrum.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use echo_rmt::ensembles::{EnsembleKind, PerturbationKind};
use echo_rmt::fidelity_theory::TheoryKind;
use echo_rmt::spectator_purity::{PurityConvention, PurityRegime};
use echo_rmt::spectral_stats::IntegrationDomain;

fn parse_core<T: FromStr<Err = echo_rmt::Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: echo_rmt::Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "echo-rmt", version, about = "Random-matrix fidelity, purity and concurrence experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spacing histogram and form factor of sampled spectra.
    EnsembleValidate(EnsembleArgs),
    /// Monte Carlo fidelity amplitude.
    FidelityMc(FidelityMcArgs),
    /// Closed-form fidelity curves.
    FidelityTheory(FidelityTheoryArgs),
    /// Fidelity under a perturbation with zero diagonal, plus the linear-response plateau.
    Freeze(FreezeArgs),
    /// Monte Carlo purity of the qubit pair with one qubit coupled.
    PurityMc(PurityMcArgs),
    /// Linear-response purity curves.
    PurityTheory(PurityTheoryArgs),
    /// Concurrence against purity, binned in purity.
    CpPlane(CpPlaneArgs),
    /// Concurrence in time with both qubits coupled, against the Werner prediction.
    ConcurrenceDecay(ConcurrenceDecayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Primary CSV output; the sidecar goes next to it with extension `.meta`.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "ECHO_RMT_WORKERS")]
    pub workers: Option<usize>,
    /// Plain `key = value` file of flags; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TimeGrid {
    /// Last time, in units of the Heisenberg time.
    #[arg(long, default_value_t = 2.0)]
    pub tmax: f64,
    /// Number of equally spaced times starting at zero.
    #[arg(long, default_value_t = 41)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct Sampling {
    #[arg(long, default_value_t = 20)]
    pub realizations: usize,
    /// Random initial states per realization.
    #[arg(long, default_value_t = 10)]
    pub states: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "gue", value_parser = parse_core::<EnsembleKind>)]
    pub kind: EnsembleKind,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub realizations: usize,
    /// Central fraction of each spectrum used for the statistics.
    #[arg(long, default_value_t = 0.5)]
    pub band: f64,
    /// Histogram bins on spacings in [0, 4].
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    /// Width of the time window the form factor is averaged over.
    #[arg(long, default_value_t = 0.05)]
    pub smoothing: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct FidelityMcArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: TimeGrid,
    #[command(flatten)]
    pub sampling: Sampling,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value = "gue", value_parser = parse_core::<EnsembleKind>)]
    pub h0: EnsembleKind,
    #[arg(long, default_value = "gue", value_parser = parse_core::<PerturbationKind>)]
    pub v: PerturbationKind,
    /// Squared perturbation strength in Heisenberg-time units.
    #[arg(long, default_value_t = 1.0, conflicts_with = "eps")]
    pub eps2_heis: f64,
    /// Perturbation strength in mean-spacing units; overrides `--eps2-heis`.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = echo_rmt::fidelity_mc::DEFAULT_BAND)]
    pub band: f64,
    #[arg(long, default_value_t = echo_rmt::fidelity_mc::DEFAULT_STATE_FRACTION)]
    pub state_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Triangle,
    Square,
}

impl From<DomainArg> for IntegrationDomain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Triangle => IntegrationDomain::Triangle,
            DomainArg::Square => IntegrationDomain::Square,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FidelityTheoryArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: TimeGrid,
    #[arg(long, default_value = "susy-gue", value_parser = parse_core::<TheoryKind>)]
    pub kind: TheoryKind,
    /// Squared perturbation strength with the Heisenberg time set to one.
    #[arg(long, default_value_t = 1.0)]
    pub eps2: f64,
    /// Symmetry class of the perturbation for the linear-response kinds.
    #[arg(long, default_value_t = 2)]
    pub beta_v: u8,
    #[arg(long, default_value = "gue", value_parser = parse_core::<EnsembleKind>)]
    pub h0: EnsembleKind,
    #[arg(long, value_enum, default_value_t = DomainArg::Triangle)]
    pub domain: DomainArg,
}

#[derive(Debug, Clone, Args)]
pub struct FreezeArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub sampling: Sampling,
    #[arg(long, default_value_t = 4.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 33)]
    pub points: usize,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps2_heis: f64,
    #[arg(long, default_value_t = echo_rmt::fidelity_mc::DEFAULT_BAND)]
    pub band: f64,
    #[arg(long, default_value_t = echo_rmt::fidelity_mc::DEFAULT_STATE_FRACTION)]
    pub state_fraction: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Qubits {
    /// Environment dimension.
    #[arg(long, default_value_t = 256)]
    pub ne: usize,
    /// Level splitting of the coupled qubit.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.03)]
    pub lambda: f64,
    /// Entanglement angle in [0, π/4]; π/4 is a Bell state.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub theta1: f64,
    /// Local angle in [0, π/2].
    #[arg(long, default_value_t = 0.0)]
    pub theta2: f64,
    #[arg(long, default_value = "gue", value_parser = parse_core::<EnsembleKind>)]
    pub env: EnsembleKind,
    #[arg(long, default_value = "gue", value_parser = parse_core::<PerturbationKind>)]
    pub coupling: PerturbationKind,
}

#[derive(Debug, Clone, Args)]
pub struct PurityMcArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: TimeGrid,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub qubits: Qubits,
    /// Couple the second qubit too, with this strength.
    #[arg(long)]
    pub partner_lambda: Option<f64>,
    /// Level splitting of the second qubit when it is coupled.
    #[arg(long, default_value_t = 0.0)]
    pub partner_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PurityKindArg {
    Lr,
    Elr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Square,
    Printed,
}

impl From<ConventionArg> for PurityConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Square => PurityConvention::Square,
            ConventionArg::Printed => PurityConvention::Printed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PurityTheoryArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: TimeGrid,
    #[arg(long, value_enum, default_value_t = PurityKindArg::Lr)]
    pub kind: PurityKindArg,
    #[arg(long, default_value = "general", value_parser = parse_core::<PurityRegime>)]
    pub regime: PurityRegime,
    #[arg(long, value_enum, default_value_t = ConventionArg::Square)]
    pub convention: ConventionArg,
    #[arg(long, default_value_t = 0.03)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub theta1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub theta2: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CpPlaneArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: TimeGrid,
    #[command(flatten)]
    pub sampling: Sampling,
    #[command(flatten)]
    pub qubits: Qubits,
    #[arg(long, default_value_t = echo_rmt::concurrence_cp::DEFAULT_BINS)]
    pub bins: usize,
    /// Lower purity cutoff of the distance to the Werner curve.
    #[arg(long, default_value_t = echo_rmt::concurrence_cp::DEFAULT_P_MIN)]
    pub p_min: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ConcurrenceDecayArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: TimeGrid,
    #[command(flatten)]
    pub sampling: Sampling,
    /// Both qubits couple with this strength and splitting.
    #[command(flatten)]
    pub qubits: Qubits,
}
