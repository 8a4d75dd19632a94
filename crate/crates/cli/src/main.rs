//! Command-line front end: potential curves, spectrum tables, the C₃/Γ
//! fit, and reduction of photoassociation measurements.
//!
//! Exit codes: 0 on success, 2 on usage/input errors, 3 on numerical
//! failures. All errors go to standard error with the machine-parsable
//! prefix `hedimer: error[<kind>]:`.

mod commands;
mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "hedimer",
    version,
    about = "Long-range He(2^3S)+He(2^3P) potentials, purely long-range bound spectra, \
             and photoassociation line reduction",
    after_help = "Units: energies MHz (4 significant digits), lengths bohr (one decimal), \
                  fields Gauss, temperatures microkelvin. Binding energies are negative and \
                  relative to each well's own separated-atom asymptote."
)]
pub struct Cli {
    /// JSON file overriding built-in constants. Keys: c3_au, gamma_mhz
    /// (Gamma/2pi in MHz), lambda_nm, delta21_ghz, delta10_ghz, mass_u.
    /// Unknown keys are rejected; c3_au and gamma_mhz are mutually
    /// exclusive.
    #[arg(long, global = true, value_name = "FILE")]
    pub constants: Option<PathBuf>,

    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Adiabatic potential curves of one ungerade block: R_a0 (bohr),
    /// V_MHz (MHz, relative to each curve's asymptote), g_per_a0sq
    /// (bohr^-2) and the Hund's case (a) weights per grid point.
    Curves(CurvesArgs),
    /// Bound-level table of a purely long-range well: v, E_MHz,
    /// eps_ret_MHz, eps_rad_MHz (MHz), R_min/R_max/mean_R (bohr).
    Spectrum(SpectrumArgs),
    /// Theory/experiment comparison table with the retardation and
    /// adiabatic-correction columns (all energies MHz).
    Table1(Table1Args),
    /// Weighted least-squares fit of C3 (a.u.) to measured binding
    /// energies; reports Gamma/2pi in MHz with its uncertainty.
    FitGamma(FitGammaArgs),
    /// Reduce measurements or a raw scan to binding energies (MHz) with
    /// the full shift budget.
    Reduce(ReduceArgs),
    /// Shift/broadening budget for given temperature (µK), field (Gauss)
    /// and optional density (cm^-3); all entries in MHz.
    Budget(BudgetArgs),
    /// Dump symmetry-block dimensions and Hund's case (a) labels as JSON.
    Basis(BasisArgs),
}

#[derive(Args)]
pub struct CurvesArgs {
    /// Ungerade block: 0u+, 0u-, 1u, 2u or 3u.
    #[arg(long)]
    pub block: String,
    /// Total angular momentum J (>= Omega); ignored with --fixed-nuclei.
    #[arg(long)]
    pub j: Option<u32>,
    /// Drop the kR-dependent retardation factors (kR -> 0 limit).
    #[arg(long)]
    pub no_retardation: bool,
    /// Drop the nuclear-rotation term (fixed-nuclei curves).
    #[arg(long)]
    pub fixed_nuclei: bool,
    /// Override the default grid (uniform 0.5 bohr below 3000 bohr,
    /// geometric beyond) with a uniform grid from r-min to r-max.
    #[arg(long, value_name = "BOHR")]
    pub r_min: Option<f64>,
    #[arg(long, value_name = "BOHR")]
    pub r_max: Option<f64>,
    /// Uniform grid step in bohr (only with --r-min/--r-max).
    #[arg(long, value_name = "BOHR")]
    pub step: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Args)]
pub struct SpectrumArgs {
    /// Well: 0u+, 0u- or 2u.
    #[arg(long)]
    pub well: String,
    /// Total angular momentum J; defaults to the experimentally coupled
    /// value (1 for 0u+, 2 otherwise). Bose statistics restricts J to
    /// odd for 0u+, even for 0u-, and J >= 2 for 2u.
    #[arg(long)]
    pub j: Option<u32>,
    /// kR -> 0 limit instead of the retarded interaction.
    #[arg(long)]
    pub no_retardation: bool,
    /// Drop the adiabatic diagonal correction from the effective
    /// potential.
    #[arg(long)]
    pub no_radial_correction: bool,
    /// Also write one CSV per level (columns R_a0, u) into this
    /// directory.
    #[arg(long, value_name = "DIR")]
    pub dump_wavefunctions: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Args)]
pub struct Table1Args {
    /// Well: 0u+, 0u- or 2u.
    #[arg(long, default_value = "0u+")]
    pub well: String,
    /// Total angular momentum J (defaults as for `spectrum`).
    #[arg(long)]
    pub j: Option<u32>,
    /// Experimental levels CSV with header `v, energy_mhz, sigma_mhz`.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Args)]
pub struct FitGammaArgs {
    /// Experimental levels CSV with header `v, energy_mhz, sigma_mhz`.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Well the levels belong to.
    #[arg(long, default_value = "0u+")]
    pub well: String,
    #[arg(long)]
    pub j: Option<u32>,
}

#[derive(Args)]
pub struct ReduceArgs {
    /// Measurements CSV (`v, delta_mhz, b0_gauss, t_uk[, n_cm3]`) or a
    /// scan CSV (`detuning_mhz, temperature_uk[, atoms, od]`); detected
    /// from the header.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Trap-bottom field in Gauss (required for scan inputs).
    #[arg(long, value_name = "GAUSS")]
    pub b0_gauss: Option<f64>,
    /// Vibrational assignment for scan inputs.
    #[arg(long)]
    pub v_label: Option<usize>,
    /// Atomic density in cm^-3 for scan inputs.
    #[arg(long, value_name = "CM-3")]
    pub n_cm3: Option<f64>,
    /// s-wave scattering length in nm; enables the mean-field bound.
    #[arg(long, value_name = "NM")]
    pub scattering_length_nm: Option<f64>,
    /// Attach the Condon-radius estimate (outer turning point of the
    /// assigned level, bohr) from this well's computed spectrum.
    #[arg(long)]
    pub well: Option<String>,
    #[arg(long)]
    pub j: Option<u32>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Args)]
pub struct BudgetArgs {
    /// Cloud temperature in µK.
    #[arg(long, value_name = "UK")]
    pub t_uk: f64,
    /// Trap-bottom field in Gauss.
    #[arg(long, value_name = "GAUSS", default_value_t = 0.0)]
    pub b0_gauss: f64,
    /// Atomic density in cm^-3 (enables the mean-field bound together
    /// with --scattering-length-nm).
    #[arg(long, value_name = "CM-3")]
    pub n_cm3: Option<f64>,
    /// s-wave scattering length in nm.
    #[arg(long, value_name = "NM")]
    pub scattering_length_nm: Option<f64>,
    /// Cross-check the two (3/2)k_BT thermal terms by Monte Carlo.
    #[arg(long)]
    pub verify_mc: bool,
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    /// Monte-Carlo seed (fixed seed -> byte-identical output).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct BasisArgs {
    /// Restrict the dump to one block (0u+, 0u-, 1u, 2u, 3u).
    #[arg(long)]
    pub block: Option<String>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = commands::run(cli) {
        eprintln!("hedimer: error[{}]: {}", e.kind(), e);
        std::process::exit(e.exit_code());
    }
}
