//! Physical constants, the C₃↔Γ relation, fine-structure couplings, and
//! unit conversions between atomic units and laboratory units.
//!
//! All internal computation in this crate is done in Hartree atomic units
//! (energy in Hartree, length in bohr, ħ = 1); anything crossing the API
//! boundary is MHz / GHz / nm / µK / Gauss. The conversion factors below
//! are frozen CODATA-style values so that results are reproducible
//! bit-for-bit.

use serde::Deserialize;

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Frozen conversion table (single source of truth).
// ---------------------------------------------------------------------------

/// Hartree expressed in Hz (CODATA 2018 hartree-hertz relationship).
pub const HARTREE_HZ: f64 = 6.579_683_920_502e15;
/// Hartree expressed in MHz.
pub const HARTREE_MHZ: f64 = HARTREE_HZ / 1e6;
/// Bohr radius in nm.
pub const BOHR_NM: f64 = 0.052_917_721_090_3;
/// Hartree in joule.
pub const HARTREE_J: f64 = 4.359_744_722_207_1e-18;
/// Atomic unit of time in seconds (ħ / E_h).
pub const TIME_AU_S: f64 = 2.418_884_326_585_7e-17;
/// Unified atomic mass unit in kg.
pub const AMU_KG: f64 = 1.660_539_066_60e-27;
/// Unified atomic mass unit in electron masses.
pub const AMU_ME: f64 = 1_822.888_486_209;
/// Boltzmann constant in J/K (exact SI).
pub const KB_J_PER_K: f64 = 1.380_649e-23;
/// Planck constant in J·s (exact SI).
pub const H_J_S: f64 = 6.626_070_15e-34;
/// Reduced Planck constant in J·s.
pub const HBAR_J_S: f64 = H_J_S / (2.0 * std::f64::consts::PI);
/// Bohr magneton magnitude in J/T.
pub const MU_B_J_PER_T: f64 = 9.274_010_078_3e-24;
/// Bohr magneton magnitude over h, in MHz per Gauss.
pub const MU_B_MHZ_PER_GAUSS: f64 = MU_B_J_PER_T / H_J_S / 1e10;
/// Boltzmann constant over h, in MHz per µK.
pub const KB_MHZ_PER_UK: f64 = KB_J_PER_K / H_J_S / 1e12;

// ---------------------------------------------------------------------------
// Unit conversions.
// ---------------------------------------------------------------------------

pub fn au_to_mhz(e: f64) -> f64 {
    e * HARTREE_MHZ
}

pub fn mhz_to_au(e: f64) -> f64 {
    e / HARTREE_MHZ
}

pub fn au_to_ghz(e: f64) -> f64 {
    e * HARTREE_MHZ / 1e3
}

pub fn ghz_to_au(e: f64) -> f64 {
    e * 1e3 / HARTREE_MHZ
}

pub fn nm_to_bohr(l: f64) -> f64 {
    l / BOHR_NM
}

pub fn bohr_to_nm(l: f64) -> f64 {
    l * BOHR_NM
}

/// k_B·T for a temperature in µK, expressed in Hartree.
pub fn uk_to_au(t: f64) -> f64 {
    t * 1e-6 * KB_J_PER_K / HARTREE_J
}

/// Photon wavevector k = 2π/λ in bohr⁻¹.
pub fn photon_wavevector_au(lambda_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI / nm_to_bohr(lambda_nm)
}

// ---------------------------------------------------------------------------
// C₃ ↔ Γ and the fine-structure couplings.
// ---------------------------------------------------------------------------

/// C₃ = (3/4) ħΓ (λ/2π)³, returned in atomic units (Hartree·bohr³).
///
/// `gamma` is the radiative decay rate in rad/s, `lambda_nm` the transition
/// wavelength.
pub fn c3_from_gamma(gamma: f64, lambda_nm: f64) -> Result<f64> {
    if lambda_nm <= 0.0 {
        return Err(Error::Domain(format!(
            "wavelength must be positive, got {lambda_nm} nm"
        )));
    }
    if gamma < 0.0 {
        return Err(Error::Domain(format!(
            "decay rate must be non-negative, got {gamma} rad/s"
        )));
    }
    let gamma_au = gamma * TIME_AU_S;
    let reduced_lambda = nm_to_bohr(lambda_nm) / (2.0 * std::f64::consts::PI);
    Ok(0.75 * gamma_au * reduced_lambda.powi(3))
}

/// Exact algebraic inverse of [`c3_from_gamma`]; returns Γ in rad/s.
pub fn gamma_from_c3(c3_au: f64, lambda_nm: f64) -> Result<f64> {
    if c3_au <= 0.0 {
        return Err(Error::Domain(format!(
            "C3 must be positive, got {c3_au} a.u."
        )));
    }
    if lambda_nm <= 0.0 {
        return Err(Error::Domain(format!(
            "wavelength must be positive, got {lambda_nm} nm"
        )));
    }
    let reduced_lambda = nm_to_bohr(lambda_nm) / (2.0 * std::f64::consts::PI);
    Ok(c3_au / (0.75 * reduced_lambda.powi(3)) / TIME_AU_S)
}

/// Couplings (α, β) of the single-atom operator αL·S + β(L·S)², in atomic
/// units with ħ = 1, chosen so that the operator's eigenvalues on an
/// L = 1, S = 1 atom reproduce the two measured splittings exactly.
///
/// With L·S eigenvalues {+1, −1, −2}ħ² for J = {2, 1, 0}:
///   E(J=2) = α + β,  E(J=1) = −α + β,  E(J=0) = −2α + 4β,
/// so α = −Δ₂₁/2 and β = (2Δ₁₀ − Δ₂₁)/6.
pub fn fine_structure_constants(delta21_ghz: f64, delta10_ghz: f64) -> Result<(f64, f64)> {
    if delta21_ghz <= 0.0 || delta10_ghz <= 0.0 {
        return Err(Error::Domain(format!(
            "fine-structure splittings must be positive, got ({delta21_ghz}, {delta10_ghz}) GHz"
        )));
    }
    let d21 = ghz_to_au(delta21_ghz);
    let d10 = ghz_to_au(delta10_ghz);
    Ok((-d21 / 2.0, (2.0 * d10 - d21) / 6.0))
}

// ---------------------------------------------------------------------------
// The constants bundle.
// ---------------------------------------------------------------------------

/// Optional JSON override for the built-in defaults. Unknown keys are
/// rejected. `gamma_mhz` is Γ/2π in MHz; specifying both `c3_au` and
/// `gamma_mhz` is an error since one determines the other.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsOverride {
    pub c3_au: Option<f64>,
    pub gamma_mhz: Option<f64>,
    pub lambda_nm: Option<f64>,
    pub delta21_ghz: Option<f64>,
    pub delta10_ghz: Option<f64>,
    pub mass_u: Option<f64>,
}

/// Every fixed symbol of the model, immutable after construction.
#[derive(Debug, Clone)]
pub struct PhysicalConstants {
    /// Dipole-dipole coefficient in Hartree·bohr³.
    pub c3_au: f64,
    /// Atomic radiative decay rate in rad/s.
    pub gamma_rad_per_s: f64,
    /// Transition wavelength in nm (one value for all three lines).
    pub lambda_nm: f64,
    /// 2³P₂ ↔ 2³P₁ splitting in GHz.
    pub delta21_ghz: f64,
    /// 2³P₁ ↔ 2³P₀ splitting in GHz.
    pub delta10_ghz: f64,
    /// Atom mass in unified atomic mass units.
    pub mass_u: f64,
    /// Spin-orbit coupling α in a.u. (ħ = 1).
    pub alpha_au: f64,
    /// (L·S)² coupling β in a.u. (ħ = 1).
    pub beta_au: f64,
    /// Atom mass in electron masses.
    pub atom_mass_au: f64,
    /// Reduced mass of the pair, m/2, in electron masses.
    pub reduced_mass_au: f64,
    /// Atom mass in kg.
    pub atom_mass_kg: f64,
    /// Magnetic moment of a 2³S₁ atom over h, in MHz per Gauss.
    /// Stored as the positive magnitude |µ| = 2|µ_B|; the Zeeman
    /// correction of the trapped pair enters as +2µB₀.
    pub mu_per_h_mhz_per_gauss: f64,
    /// Upper estimate for the C₆ coefficient, in Hartree·bohr⁶.
    pub c6_au: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::with_overrides(&ConstantsOverride::default())
            .expect("built-in defaults are valid")
    }
}

impl PhysicalConstants {
    /// Built-in defaults: C₃ = 6.405 a.u., λ = 1083.3 nm,
    /// Δ₂₁ = 2.291175 GHz, Δ₁₀ = 29.616950 GHz, m = 4.002602 u.
    pub fn with_overrides(o: &ConstantsOverride) -> Result<Self> {
        let lambda_nm = o.lambda_nm.unwrap_or(1083.3);
        let delta21_ghz = o.delta21_ghz.unwrap_or(2.291_175);
        let delta10_ghz = o.delta10_ghz.unwrap_or(29.616_950);
        let mass_u = o.mass_u.unwrap_or(4.002_602);

        let (c3_au, gamma_rad_per_s) = match (o.c3_au, o.gamma_mhz) {
            (Some(_), Some(_)) => {
                return Err(Error::Usage(
                    "c3_au and gamma_mhz are redundant; specify at most one".into(),
                ))
            }
            (Some(c3), None) => (c3, gamma_from_c3(c3, lambda_nm)?),
            (None, Some(g)) => {
                let gamma = 2.0 * std::f64::consts::PI * g * 1e6;
                (c3_from_gamma(gamma, lambda_nm)?, gamma)
            }
            (None, None) => {
                let c3 = 6.405;
                (c3, gamma_from_c3(c3, lambda_nm)?)
            }
        };

        // Negated comparison also rejects NaN.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(c3_au > 0.0) {
            return Err(Error::Domain(format!("C3 must be positive, got {c3_au}")));
        }
        if !(delta10_ghz > delta21_ghz && delta21_ghz > 0.0) {
            return Err(Error::Domain(format!(
                "splittings must satisfy delta10 > delta21 > 0, got ({delta21_ghz}, {delta10_ghz})"
            )));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(mass_u > 0.0) {
            return Err(Error::Domain(format!("mass must be positive, got {mass_u} u")));
        }

        let (alpha_au, beta_au) = fine_structure_constants(delta21_ghz, delta10_ghz)?;
        let atom_mass_au = mass_u * AMU_ME;

        Ok(PhysicalConstants {
            c3_au,
            gamma_rad_per_s,
            lambda_nm,
            delta21_ghz,
            delta10_ghz,
            mass_u,
            alpha_au,
            beta_au,
            atom_mass_au,
            reduced_mass_au: atom_mass_au / 2.0,
            atom_mass_kg: mass_u * AMU_KG,
            mu_per_h_mhz_per_gauss: 2.0 * MU_B_MHZ_PER_GAUSS,
            c6_au: 3265.0,
        })
    }

    /// Parse a JSON override file and construct the bundle.
    pub fn from_json(json: &str) -> Result<Self> {
        let o: ConstantsOverride =
            serde_json::from_str(json).map_err(|e| Error::Parse(format!("constants file: {e}")))?;
        Self::with_overrides(&o)
    }

    /// Γ/2π in MHz.
    pub fn gamma_over_2pi_mhz(&self) -> f64 {
        self.gamma_rad_per_s / (2.0 * std::f64::consts::PI) / 1e6
    }

    /// Photon wavevector k = 2π/λ in bohr⁻¹.
    pub fn photon_wavevector_au(&self) -> f64 {
        photon_wavevector_au(self.lambda_nm)
    }

    /// Separated-atom fine-structure level of the 2³S₁ + 2³P_J pair,
    /// in Hartree, relative to the splitting-free asymptote.
    ///
    /// j must be 0, 1 or 2. The structure is inverted: E(0) > E(1) > E(2).
    pub fn fs_asymptote_au(&self, j: u32) -> f64 {
        let (a, b) = (self.alpha_au, self.beta_au);
        match j {
            2 => a + b,
            1 => -a + b,
            0 => -2.0 * a + 4.0 * b,
            _ => panic!("fine-structure J must be 0, 1 or 2, got {j}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    #[test]
    fn c3_matches_quoted_value() {
        // Γ = 2π × 1.6248 MHz, λ = 1083.3 nm → C₃ = 6.405 a.u. within 5e-4.
        let c3 = c3_from_gamma(2.0 * PI * 1.6248e6, 1083.3).unwrap();
        assert_relative_eq!(c3, 6.405, max_relative = 5e-4);
    }

    #[test]
    fn zero_decay_rate_gives_zero_c3() {
        assert_eq!(c3_from_gamma(0.0, 1083.3).unwrap(), 0.0);
    }

    #[test]
    fn c3_gamma_round_trip() {
        let g = 2.0 * PI * 1.6248e6;
        let c3 = c3_from_gamma(g, 1083.3).unwrap();
        assert_relative_eq!(gamma_from_c3(c3, 1083.3).unwrap(), g, max_relative = 1e-12);
    }

    #[test]
    fn gamma_matches_quoted_value() {
        let g = gamma_from_c3(6.405, 1083.3).unwrap();
        assert_relative_eq!(g / (2.0 * PI) / 1e6, 1.6248, max_relative = 5e-4);
    }

    #[test]
    fn gamma_is_linear_in_c3() {
        let g1 = gamma_from_c3(6.405, 1083.3).unwrap();
        let g2 = gamma_from_c3(2.0 * 6.405, 1083.3).unwrap();
        assert_relative_eq!(g2, 2.0 * g1, max_relative = 1e-12);
        // +0.1% on C₃ → Γ/2π = 1.6264 MHz at the quoted-value anchor.
        let g3 = gamma_from_c3(6.405 * 1.001, 1083.3).unwrap();
        assert_relative_eq!(g3, 1.001 * g1, max_relative = 1e-12);
        assert_relative_eq!(g3 / (2.0 * PI) / 1e6, 1.6264, max_relative = 5e-4);
    }

    #[test]
    fn c3_is_cubic_in_lambda() {
        let g = 1.0e7;
        let c1 = c3_from_gamma(g, 1000.0).unwrap();
        let c2 = c3_from_gamma(g, 2000.0).unwrap();
        assert_relative_eq!(c2, 8.0 * c1, max_relative = 1e-12);
    }

    #[test]
    fn invalid_inputs_are_domain_errors() {
        assert!(c3_from_gamma(1.0, 0.0).is_err());
        assert!(c3_from_gamma(-1.0, 1083.3).is_err());
        assert!(gamma_from_c3(0.0, 1083.3).is_err());
        assert!(gamma_from_c3(-6.405, 1083.3).is_err());
    }

    #[test]
    fn unit_round_trips_are_identity() {
        let e = 1.0; // one Hartree
        assert_relative_eq!(mhz_to_au(au_to_mhz(e)), e, max_relative = 1e-12);
        assert_relative_eq!(ghz_to_au(au_to_ghz(e)), e, max_relative = 1e-12);
        assert_relative_eq!(nm_to_bohr(bohr_to_nm(3.7)), 3.7, max_relative = 1e-12);
    }

    #[test]
    fn fine_structure_splittings_reproduced_exactly() {
        let c = PhysicalConstants::default();
        let e2 = c.fs_asymptote_au(2);
        let e1 = c.fs_asymptote_au(1);
        let e0 = c.fs_asymptote_au(0);
        assert!(e0 > e1 && e1 > e2, "helium 2³P structure is inverted");
        assert_relative_eq!(au_to_ghz(e1 - e2), 2.291_175, max_relative = 1e-14);
        assert_relative_eq!(au_to_ghz(e0 - e1), 29.616_950, max_relative = 1e-14);
    }

    #[test]
    fn pure_spin_orbit_limit_has_zero_beta() {
        // 2Δ₁₀ = Δ₂₁ → β = 0.
        let (_, b) = fine_structure_constants(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(b, 0.0, epsilon = 1e-30);
    }

    /// Dense 9×9 diagonalization oracle: build αL·S + β(L·S)² from explicit
    /// spin-1 matrices on the uncoupled (m_L, m_S) product space and check
    /// eigenvalue degeneracies 5/3/1 and the splittings.
    #[test]
    fn nine_by_nine_oracle_reproduces_levels() {
        let c = PhysicalConstants::default();
        let (alpha, beta) = (c.alpha_au, c.beta_au);

        // Spin-1 matrices in the |m=+1,0,-1> ordering.
        let s = 2.0_f64.sqrt() / 2.0;
        let jz = DMatrix::from_row_slice(3, 3, &[1.0, 0., 0., 0., 0., 0., 0., 0., -1.0]);
        let jp = DMatrix::from_row_slice(3, 3, &[0., 2.0 * s, 0., 0., 0., 2.0 * s, 0., 0., 0.]);
        let jm = jp.transpose();

        let kron = |a: &DMatrix<f64>, b: &DMatrix<f64>| a.kronecker(b);
        let ls = kron(&jz, &jz) + 0.5 * (kron(&jp, &jm) + kron(&jm, &jp));
        let h = alpha * &ls + beta * (&ls * &ls);

        let mut eig: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().cloned().collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());

        // Degeneracies 5 (J=2), 3 (J=1), 1 (J=0), lowest first.
        for w in eig[0..5].windows(2) {
            assert_abs_diff_eq!(w[0], w[1], epsilon = 1e-18);
        }
        for w in eig[5..8].windows(2) {
            assert_abs_diff_eq!(w[0], w[1], epsilon = 1e-18);
        }
        assert_relative_eq!(au_to_ghz(eig[5] - eig[0]), 2.291_175, max_relative = 1e-10);
        assert_relative_eq!(au_to_ghz(eig[8] - eig[5]), 29.616_950, max_relative = 1e-10);

        // And the closed-form expectation values match the dense oracle.
        assert_relative_eq!(c.fs_asymptote_au(2), eig[0], max_relative = 1e-12);
        assert_relative_eq!(c.fs_asymptote_au(1), eig[5], max_relative = 1e-12);
        assert_relative_eq!(c.fs_asymptote_au(0), eig[8], max_relative = 1e-12);
    }

    #[test]
    fn override_gamma_derives_c3() {
        let o = ConstantsOverride {
            gamma_mhz: Some(1.6248),
            ..Default::default()
        };
        let c = PhysicalConstants::with_overrides(&o).unwrap();
        assert_relative_eq!(c.c3_au, 6.405, max_relative = 5e-4);
    }

    #[test]
    fn override_rejects_redundant_pair_and_unknown_keys() {
        let o = ConstantsOverride {
            c3_au: Some(6.405),
            gamma_mhz: Some(1.6248),
            ..Default::default()
        };
        assert!(PhysicalConstants::with_overrides(&o).is_err());
        assert!(PhysicalConstants::from_json(r#"{"c3": 6.4}"#).is_err());
        assert!(PhysicalConstants::from_json(r#"{"c3_au": 6.4}"#).is_ok());
    }

    #[test]
    fn helium_mass_in_si() {
        let c = PhysicalConstants::default();
        // m ≈ 6.65e-27 kg; reduced mass is half the atom mass.
        assert_relative_eq!(c.atom_mass_kg, 6.6465e-27, max_relative = 1e-3);
        assert_relative_eq!(c.reduced_mass_au, c.atom_mass_au / 2.0, max_relative = 1e-15);
    }
}
