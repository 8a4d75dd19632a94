//! End-to-end spectrum computation for the three purely long-range
//! ungerade wells: binding energies, retardation and adiabatic-correction
//! decompositions, the C₃/Γ least-squares fit against measured energies,
//! and the C₆-neglect bound.

use serde::Serialize;

use crate::basis::{block, Parity, Reflection, SymmetryBlock};
use crate::constants::{au_to_mhz, PhysicalConstants};
use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::potentials::{adiabatic_curves, uniform_r_grid, BlockHamiltonian, HamiltonianFlags, PotentialCurve};
use crate::radial::{effective_potential, solve_bound_states, BoundLevel};

/// The three single-photon-accessible purely long-range wells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Well {
    ZeroUPlus,
    ZeroUMinus,
    TwoU,
}

impl Well {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "0u+" => Ok(Well::ZeroUPlus),
            "0u-" => Ok(Well::ZeroUMinus),
            "2u" => Ok(Well::TwoU),
            other => Err(Error::Usage(format!(
                "unknown well '{other}'; expected one of 0u+, 0u-, 2u"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Well::ZeroUPlus => "0u+",
            Well::ZeroUMinus => "0u-",
            Well::TwoU => "2u",
        }
    }

    pub fn symmetry_block(self) -> SymmetryBlock {
        match self {
            Well::ZeroUPlus => block(Parity::Ungerade, 0, Some(Reflection::Plus)).unwrap(),
            Well::ZeroUMinus => block(Parity::Ungerade, 0, Some(Reflection::Minus)).unwrap(),
            Well::TwoU => block(Parity::Ungerade, 2, None).unwrap(),
        }
    }

    /// Separated-atom limit the well hangs below: P₀ for 0u⁺, P₁ for the
    /// other two.
    pub fn asymptote_j(self) -> u32 {
        match self {
            Well::ZeroUPlus => 0,
            Well::ZeroUMinus | Well::TwoU => 1,
        }
    }

    /// Bose-Einstein statistics of the identical spin-0 nuclei restricts
    /// the total angular momentum: odd J for 0u⁺, even J for 0u⁻, and any
    /// J ≥ 2 for the doubly degenerate 2u.
    pub fn check_j(self, j: u32) -> Result<()> {
        match self {
            Well::ZeroUPlus if j.is_multiple_of(2) => Err(Error::Statistics(format!(
                "J = {j} is forbidden for 0u+: Bose statistics of the spin-0 nuclei \
                 requires odd J"
            ))),
            Well::ZeroUMinus if j % 2 == 1 => Err(Error::Statistics(format!(
                "J = {j} is forbidden for 0u-: Bose statistics of the spin-0 nuclei \
                 requires even J"
            ))),
            Well::TwoU if j < 2 => Err(Error::Statistics(format!(
                "J = {j} is below Omega = 2 for the 2u well; J must be at least 2"
            ))),
            _ => Ok(()),
        }
    }

    /// The J value the experiment couples to (Table layout default).
    pub fn default_j(self) -> u32 {
        match self {
            Well::ZeroUPlus => 1,
            Well::ZeroUMinus | Well::TwoU => 2,
        }
    }
}

/// Model configuration for a spectrum run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectrumFlags {
    pub retarded: bool,
    pub radial_correction: bool,
}

impl Default for SpectrumFlags {
    fn default() -> Self {
        SpectrumFlags {
            retarded: true,
            radial_correction: true,
        }
    }
}

/// Levels shallower than this are excluded from spectrum tables; they sit
/// within the near-threshold band the solver flags as grid-sensitive.
const WINDOW_TOP_MHZ: f64 = -0.2;

/// One row of the spectrum tables.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub well: String,
    pub j: u32,
    pub v: usize,
    /// Binding energy relative to the well's asymptote, MHz.
    pub energy_mhz: f64,
    /// Retardation contribution: full solve minus the kR → 0 solve.
    /// None when the toggled run does not bind this level.
    pub eps_ret_mhz: Option<f64>,
    /// Adiabatic-correction contribution: full solve minus the solve
    /// without the ⟨φ|∂²φ/∂R²⟩ term. None when unpaired.
    pub eps_rad_mhz: Option<f64>,
    pub r_min_a0: f64,
    pub r_max_a0: f64,
    pub mean_r_a0: f64,
    pub near_threshold: bool,
}

/// Bound levels of one well for one model configuration.
pub fn compute_levels(
    well: Well,
    j: u32,
    flags: SpectrumFlags,
    constants: &PhysicalConstants,
    mode: ExecMode,
) -> Result<Vec<BoundLevel>> {
    well.check_j(j)?;
    let bh = BlockHamiltonian::new(well.symmetry_block(), constants);
    let h_flags = HamiltonianFlags {
        retarded: flags.retarded,
        rotation: true,
    };

    let mut r_out = 20_000.0f64;
    for _attempt in 0..4 {
        let n = ((r_out - 100.0) / 0.5).round() as usize + 1;
        let grid = uniform_r_grid(100.0, r_out, n);
        let curves = adiabatic_curves(&bh, j, &grid, h_flags, mode)?;
        let curve = select_well_curve(&curves, well)?;
        let pot = effective_potential(&curve, flags.radial_correction, constants.reduced_mass_au);
        let v_min_mhz = au_to_mhz(pot.v.iter().cloned().fold(f64::INFINITY, f64::min));
        match solve_bound_states(&pot, constants.reduced_mass_au, (v_min_mhz, WINDOW_TOP_MHZ)) {
            Ok(levels) => return Ok(levels),
            Err(Error::GridExtension(_)) => {
                r_out *= 1.6;
                continue;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::GridExtension(format!(
        "outer grid grew past {r_out} bohr without reaching wavefunction decay for {} J = {j}",
        well.name()
    )))
}

fn select_well_curve(curves: &[PotentialCurve], well: Well) -> Result<PotentialCurve> {
    curves
        .iter()
        .filter(|c| c.asymptote_j == well.asymptote_j())
        .max_by(|a, b| a.well_depth_au().partial_cmp(&b.well_depth_au()).unwrap())
        .cloned()
        .ok_or_else(|| {
            Error::Convergence(format!(
                "no curve with the P{} asymptote found for {}",
                well.asymptote_j(),
                well.name()
            ))
        })
}

/// The purely long-range adiabatic curve of a well (full grid resolution,
/// default flags unless given).
pub fn well_curve(
    well: Well,
    j: u32,
    flags: HamiltonianFlags,
    constants: &PhysicalConstants,
    r_grid: &[f64],
    mode: ExecMode,
) -> Result<PotentialCurve> {
    if flags.rotation {
        well.check_j(j)?;
    }
    let bh = BlockHamiltonian::new(well.symmetry_block(), constants);
    let curves = adiabatic_curves(&bh, j, r_grid, flags, mode)?;
    select_well_curve(&curves, well)
}

fn pair_by_v<'a>(
    base: &'a [BoundLevel],
    other: &'a [BoundLevel],
    what: &str,
) -> Result<Vec<(&'a BoundLevel, &'a BoundLevel)>> {
    if base.len() != other.len() {
        return Err(Error::Pairing(format!(
            "{what}: level counts differ ({} vs {})",
            base.len(),
            other.len()
        )));
    }
    base.iter()
        .zip(other.iter())
        .map(|(a, b)| {
            if a.v != b.v {
                Err(Error::Pairing(format!(
                    "{what}: vibrational indices differ (v = {} vs {})",
                    a.v, b.v
                )))
            } else {
                Ok((a, b))
            }
        })
        .collect()
}

/// Retardation contribution per level: E(flags) − E(flags with the
/// retardation turned off), everything else held fixed. Zero when the
/// base configuration is already non-retarded.
pub fn epsilon_ret(
    well: Well,
    j: u32,
    flags: SpectrumFlags,
    constants: &PhysicalConstants,
    mode: ExecMode,
) -> Result<Vec<(usize, f64)>> {
    if !flags.retarded {
        let base = compute_levels(well, j, flags, constants, mode)?;
        return Ok(base.iter().map(|l| (l.v, 0.0)).collect());
    }
    let base = compute_levels(well, j, flags, constants, mode)?;
    let off = compute_levels(well, j, SpectrumFlags { retarded: false, ..flags }, constants, mode)?;
    Ok(pair_by_v(&base, &off, "retardation decomposition")?
        .into_iter()
        .map(|(a, b)| (a.v, a.energy_mhz - b.energy_mhz))
        .collect())
}

/// Adiabatic-correction contribution per level, mirroring [`epsilon_ret`]
/// with the radial-correction flag toggled.
pub fn epsilon_rad(
    well: Well,
    j: u32,
    flags: SpectrumFlags,
    constants: &PhysicalConstants,
    mode: ExecMode,
) -> Result<Vec<(usize, f64)>> {
    if !flags.radial_correction {
        let base = compute_levels(well, j, flags, constants, mode)?;
        return Ok(base.iter().map(|l| (l.v, 0.0)).collect());
    }
    let base = compute_levels(well, j, flags, constants, mode)?;
    let off = compute_levels(
        well,
        j,
        SpectrumFlags { radial_correction: false, ..flags },
        constants,
        mode,
    )?;
    Ok(pair_by_v(&base, &off, "adiabatic-correction decomposition")?
        .into_iter()
        .map(|(a, b)| (a.v, a.energy_mhz - b.energy_mhz))
        .collect())
}

/// Full spectrum table for one well: binding energies, both decomposition
/// columns, turning points and mean radii, ordered by v. The decomposition
/// entries pair the toggled runs by vibrational index; a level that only
/// exists in the full model (a toggled well can be slightly shallower and
/// lose its topmost state) keeps a None in that column.
pub fn compute_spectrum(
    well: Well,
    j: u32,
    flags: SpectrumFlags,
    constants: &PhysicalConstants,
    mode: ExecMode,
) -> Result<Vec<SpectrumRow>> {
    let base = compute_levels(well, j, flags, constants, mode)?;
    let eps_of = |toggled: Result<Vec<BoundLevel>>| -> Result<Vec<Option<f64>>> {
        let toggled = toggled?;
        Ok(base
            .iter()
            .map(|l| {
                toggled
                    .iter()
                    .find(|t| t.v == l.v)
                    .map(|t| l.energy_mhz - t.energy_mhz)
            })
            .collect())
    };
    let ret = if flags.retarded {
        eps_of(compute_levels(
            well,
            j,
            SpectrumFlags { retarded: false, ..flags },
            constants,
            mode,
        ))?
    } else {
        vec![Some(0.0); base.len()]
    };
    let rad = if flags.radial_correction {
        eps_of(compute_levels(
            well,
            j,
            SpectrumFlags { radial_correction: false, ..flags },
            constants,
            mode,
        ))?
    } else {
        vec![Some(0.0); base.len()]
    };
    Ok(base
        .iter()
        .zip(ret.iter())
        .zip(rad.iter())
        .map(|((l, er), ea)| SpectrumRow {
            well: well.name().to_string(),
            j,
            v: l.v,
            energy_mhz: l.energy_mhz,
            eps_ret_mhz: *er,
            eps_rad_mhz: *ea,
            r_min_a0: l.r_min,
            r_max_a0: l.r_max,
            mean_r_a0: l.mean_r,
            near_threshold: l.near_threshold,
        })
        .collect())
}

// ---------------------------------------------------------------------------
// C₃ / Γ fit.
// ---------------------------------------------------------------------------

/// One experimental level: vibrational index, binding energy and its
/// one-sigma error, both in MHz.
#[derive(Debug, Clone, Copy, serde::Deserialize)]
pub struct ExperimentalLevel {
    pub v: usize,
    pub energy_mhz: f64,
    pub sigma_mhz: f64,
}

/// Weighted least-squares result for the single free parameter C₃.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub c3_au: f64,
    pub c3_sigma_au: f64,
    /// Γ/2π in MHz, via the C₃ ↔ Γ relation.
    pub gamma_mhz: f64,
    pub gamma_sigma_mhz: f64,
    /// Per-level residual (measured − model) at the fitted C₃, MHz.
    pub residuals_mhz: Vec<(usize, f64)>,
    /// max over levels of |∂E/∂C₃| × 0.1% C₃ — the energy response to a
    /// 0.1% change of C₃, MHz.
    pub sensitivity_mhz_per_0p1pct: f64,
}

fn model_energies(
    well: Well,
    j: u32,
    flags: SpectrumFlags,
    constants: &PhysicalConstants,
    c3: f64,
    vs: &[usize],
    mode: ExecMode,
) -> Result<Vec<f64>> {
    let mut local = constants.clone();
    local.c3_au = c3;
    let levels = compute_levels(well, j, flags, &local, mode)?;
    vs.iter()
        .map(|v| {
            levels
                .iter()
                .find(|l| l.v == *v)
                .map(|l| l.energy_mhz)
                .ok_or_else(|| {
                    Error::Pairing(format!("model has no level with v = {v} for {}", well.name()))
                })
        })
        .collect()
}

/// Weighted least-squares fit of the scalar C₃ (α, β, λ and the mass stay
/// frozen) to measured binding energies, with the decay rate Γ derived
/// from the fitted C₃. Derivatives are central differences in C₃;
/// weights are 1/σ².
pub fn fit_c3(
    well: Well,
    j: u32,
    experimental: &[ExperimentalLevel],
    constants: &PhysicalConstants,
    mode: ExecMode,
) -> Result<FitResult> {
    if experimental.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least 2 experimental levels, got {}",
            experimental.len()
        )));
    }
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if experimental.iter().any(|e| !(e.sigma_mhz > 0.0)) {
        return Err(Error::Fit("every experimental level needs a finite positive error".into()));
    }
    let flags = SpectrumFlags::default();
    let vs: Vec<usize> = experimental.iter().map(|e| e.v).collect();
    let y: Vec<f64> = experimental.iter().map(|e| e.energy_mhz).collect();
    let w: Vec<f64> = experimental.iter().map(|e| 1.0 / (e.sigma_mhz * e.sigma_mhz)).collect();

    let mut c3 = constants.c3_au;
    let mut slopes = vec![0.0; vs.len()];
    for _iter in 0..4 {
        let e0 = model_energies(well, j, flags, constants, c3, &vs, mode)?;
        let ep = model_energies(well, j, flags, constants, c3 * 1.001, &vs, mode)?;
        let em = model_energies(well, j, flags, constants, c3 * 0.999, &vs, mode)?;
        slopes = ep
            .iter()
            .zip(em.iter())
            .map(|(p, m)| (p - m) / (0.002 * c3))
            .collect();
        let response_01pct = slopes
            .iter()
            .map(|s| (s * 0.001 * c3).abs())
            .fold(0.0f64, f64::max);
        if response_01pct < 1e-3 {
            return Err(Error::Fit(
                "ill-conditioned: binding energies respond by less than 1 kHz to a \
                 0.1% change of C3"
                    .into(),
            ));
        }
        let num: f64 = (0..vs.len()).map(|i| w[i] * slopes[i] * (y[i] - e0[i])).sum();
        let den: f64 = (0..vs.len()).map(|i| w[i] * slopes[i] * slopes[i]).sum();
        let step = num / den;
        c3 += step;
        if step.abs() < 1e-9 * c3 {
            break;
        }
    }

    let e_fit = model_energies(well, j, flags, constants, c3, &vs, mode)?;
    let residuals: Vec<(usize, f64)> = vs
        .iter()
        .zip(y.iter().zip(e_fit.iter()))
        .map(|(v, (yy, ee))| (*v, yy - ee))
        .collect();
    let den: f64 = (0..vs.len()).map(|i| w[i] * slopes[i] * slopes[i]).sum();
    let c3_sigma = (1.0 / den).sqrt();
    let gamma_rad = crate::constants::gamma_from_c3(c3, constants.lambda_nm)?;
    let gamma_mhz = gamma_rad / (2.0 * std::f64::consts::PI) / 1e6;
    let sensitivity = slopes
        .iter()
        .map(|s| (s * 0.001 * c3).abs())
        .fold(0.0f64, f64::max);

    Ok(FitResult {
        c3_au: c3,
        c3_sigma_au: c3_sigma,
        gamma_mhz,
        gamma_sigma_mhz: gamma_mhz * c3_sigma / c3,
        residuals_mhz: residuals,
        sensitivity_mhz_per_0p1pct: sensitivity,
    })
}

// ---------------------------------------------------------------------------
// C₆-neglect bound.
// ---------------------------------------------------------------------------

/// Ratio of the neglected C₆/R⁶ term to the retained C₃/R³ term at one
/// radius.
#[derive(Debug, Clone, Serialize)]
pub struct C6BoundEntry {
    pub r_a0: f64,
    pub ratio: f64,
    /// True when the radius is in the purely long-range domain (≥ 150
    /// bohr) yet the ratio exceeds 1.5 × 10⁻⁴.
    pub violates: bool,
}

/// The C₆/R⁶ ÷ C₃/R³ ratio report for a list of radii.
pub fn c6_bound(constants: &PhysicalConstants, radii: &[f64]) -> Result<Vec<C6BoundEntry>> {
    if radii.iter().any(|&r| r < 1.0) {
        return Err(Error::Domain("radii below 1 bohr are outside the model".into()));
    }
    Ok(radii
        .iter()
        .map(|&r| {
            let ratio = constants.c6_au / (constants.c3_au * r * r * r);
            C6BoundEntry {
                r_a0: r,
                ratio,
                violates: r >= 150.0 && ratio > 1.5e-4,
            }
        })
        .collect())
}
