//! Reduction of raw photoassociation measurements into binding energies,
//! the full line-shift and broadening budget, Lorentzian resonance fits,
//! the Zeeman-slope fit, and a Monte-Carlo oracle for the thermal
//! averages.
//!
//! The free-bound transition picks up corrections a bound-bound line
//! would not have: the trapped pair's Zeeman energy 2µB₀ and two thermal
//! terms of (3/2)k_BT each (harmonic trap average and the q²-weighted
//! relative kinetic energy), giving
//!     h·b_v ≃ h·δ_v + 2µB₀ + 3k_BT.
//! Recoil and Doppler terms are reported in the budget but never applied:
//! the recoil shift (≈21 kHz) is below experimental accuracy and the
//! Doppler term averages to zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{PhysicalConstants, H_J_S, HBAR_J_S, KB_J_PER_K, KB_MHZ_PER_UK};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};

/// One reduced PA observation.
#[derive(Debug, Clone, Serialize)]
pub struct Measurement {
    /// Vibrational assignment, when known.
    pub v_label: Option<usize>,
    /// PA detuning ν_L − ν₀ in MHz (negative, red of the atomic line).
    pub delta_mhz: f64,
    /// Magnetic field at the trap bottom, Gauss.
    pub b0_gauss: f64,
    /// Cloud temperature, µK.
    pub temperature_uk: f64,
    /// Atomic density in cm⁻³, when measured.
    pub density_cm3: Option<f64>,
}

impl Measurement {
    // Negated comparisons also reject NaN inputs.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_mhz < 0.0) {
            return Err(Error::Domain(format!(
                "PA detuning must be negative (red detuned), got {} MHz",
                self.delta_mhz
            )));
        }
        if !(self.temperature_uk > 0.0) {
            return Err(Error::Domain(format!(
                "temperature must be positive, got {} µK",
                self.temperature_uk
            )));
        }
        if self.b0_gauss < 0.0 {
            return Err(Error::Domain(format!(
                "trap-bottom field must be non-negative, got {} G",
                self.b0_gauss
            )));
        }
        Ok(())
    }
}

/// Molecular binding energy b_v = δ_v + (2µB₀ + 3k_BT)/h in MHz, affine
/// in B₀ and T with coefficients 2µ/h and 3k_B/h exactly.
pub fn binding_energy(m: &Measurement, constants: &PhysicalConstants) -> Result<f64> {
    m.validate()?;
    Ok(m.delta_mhz
        + 2.0 * constants.mu_per_h_mhz_per_gauss * m.b0_gauss
        + 3.0 * KB_MHZ_PER_UK * m.temperature_uk)
}

/// Every shift or broadening mechanism of the free-bound line, in MHz.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftBudget {
    /// 2µB₀/h — twice the single-atom Zeeman shift at the trap bottom.
    pub zeeman_mhz: f64,
    /// (3/2)k_BT/h — harmonic-trap potential energy of the pair.
    pub thermal_trap_mhz: f64,
    /// (3/2)k_BT/h — q²-weighted relative kinetic energy.
    pub thermal_kinetic_mhz: f64,
    /// ħ²k²/4m /h — photon recoil of the molecule (reported, not applied).
    pub recoil_mhz: f64,
    /// rms of ħk·P/2m /h — Doppler broadening, zero mean, ∝ √T.
    pub doppler_width_mhz: f64,
    /// 4πħ²na/m /h — upper bound on the initial-pair mean-field shift;
    /// absent when the density was not measured.
    pub mean_field_bound_mhz: Option<f64>,
}

impl ShiftBudget {
    /// The total correction actually applied in the binding-energy
    /// reduction: Zeeman plus both thermal terms.
    pub fn applied_correction_mhz(&self) -> f64 {
        self.zeeman_mhz + self.thermal_trap_mhz + self.thermal_kinetic_mhz
    }
}

/// Compute the budget from frozen constants. The mean-field entry needs
/// both a density (on the measurement) and a scattering length; with the
/// density missing it is omitted, not zeroed.
pub fn shift_budget(
    m: &Measurement,
    scattering_length_nm: Option<f64>,
    constants: &PhysicalConstants,
) -> Result<ShiftBudget> {
    m.validate()?;
    let thermal = 1.5 * KB_MHZ_PER_UK * m.temperature_uk;
    let lambda_m = constants.lambda_nm * 1e-9;
    let mass = constants.atom_mass_kg;
    // ħ²k²/(4m) with ħk = h/λ.
    let recoil_mhz = H_J_S / (4.0 * mass * lambda_m * lambda_m) / 1e6;
    // One Cartesian component of the pair momentum has variance 2m·k_BT.
    let kb_t = KB_J_PER_K * m.temperature_uk * 1e-6;
    let k_photon = 2.0 * std::f64::consts::PI / lambda_m;
    let doppler_width_mhz =
        HBAR_J_S * k_photon * (2.0 * mass * kb_t).sqrt() / (2.0 * mass) / H_J_S / 1e6;
    let mean_field_bound_mhz = match (m.density_cm3, scattering_length_nm) {
        (Some(n), Some(a)) => {
            if !(n > 0.0 && a > 0.0) {
                return Err(Error::Domain(format!(
                    "density and scattering length must be positive, got n = {n} cm^-3, a = {a} nm"
                )));
            }
            let n_m3 = n * 1e6;
            let a_m = a * 1e-9;
            Some(
                4.0 * std::f64::consts::PI * HBAR_J_S * HBAR_J_S * n_m3 * a_m / mass / H_J_S / 1e6,
            )
        }
        _ => None,
    };
    Ok(ShiftBudget {
        zeeman_mhz: 2.0 * constants.mu_per_h_mhz_per_gauss * m.b0_gauss,
        thermal_trap_mhz: thermal,
        thermal_kinetic_mhz: thermal,
        recoil_mhz,
        doppler_width_mhz,
        mean_field_bound_mhz,
    })
}

// ---------------------------------------------------------------------------
// Lorentzian resonance fit.
// ---------------------------------------------------------------------------

/// Result of the four-parameter Lorentzian fit
/// y = offset + amplitude·(w/2)² / ((x − center)² + (w/2)²).
#[derive(Debug, Clone, Serialize)]
pub struct LorentzianFit {
    pub center_mhz: f64,
    /// Full width at half maximum, MHz.
    pub width_mhz: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// Parameter covariance in the order (center, width, amplitude,
    /// offset), scaled by the residual variance.
    pub covariance: Vec<Vec<f64>>,
    pub iterations: usize,
}

fn lorentzian(x: f64, p: &[f64; 4]) -> f64 {
    let (c, w, a, o) = (p[0], p[1], p[2], p[3]);
    let hw2 = 0.25 * w * w;
    o + a * hw2 / ((x - c) * (x - c) + hw2)
}

fn lorentzian_jacobian(x: f64, p: &[f64; 4]) -> [f64; 4] {
    let (c, w, a, _) = (p[0], p[1], p[2], p[3]);
    let hw = 0.5 * w;
    let d = (x - c) * (x - c) + hw * hw;
    let u = hw * hw / d;
    [
        a * hw * hw * 2.0 * (x - c) / (d * d),
        a * hw * (x - c) * (x - c) / (d * d),
        u,
        1.0,
    ]
}

/// Nonlinear least squares (Levenberg-Marquardt with analytic Jacobian)
/// on a resonance scan of (detuning MHz, signal) points. Input order is
/// irrelevant; points are sorted before fitting.
pub fn lorentzian_fit(scan: &[(f64, f64)]) -> Result<LorentzianFit> {
    if scan.len() < 5 {
        return Err(Error::Fit(format!(
            "a Lorentzian fit needs at least 5 points spanning the resonance, got {}",
            scan.len()
        )));
    }
    let mut data = scan.to_vec();
    data.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Initial guess from the data shape.
    let (mut y_min, mut y_max, mut x_peak) = (f64::INFINITY, f64::NEG_INFINITY, data[0].0);
    for &(x, y) in &data {
        if y < y_min {
            y_min = y;
        }
        if y > y_max {
            y_max = y;
            x_peak = x;
        }
    }
    let half = 0.5 * (y_min + y_max);
    let above: Vec<f64> = data.iter().filter(|p| p.1 > half).map(|p| p.0).collect();
    let w0 = if above.len() >= 2 {
        (above.last().unwrap() - above.first().unwrap()).max(1e-3)
    } else {
        (data.last().unwrap().0 - data[0].0) / 4.0
    };
    let mut p = [x_peak, w0, (y_max - y_min).max(1e-12), y_min];

    let chi2 = |p: &[f64; 4]| -> f64 {
        data.iter()
            .map(|&(x, y)| {
                let r = y - lorentzian(x, p);
                r * r
            })
            .sum()
    };

    let mut lambda = 1e-3;
    let mut cost = chi2(&p);
    let mut iterations = 0;
    for iter in 0..200 {
        iterations = iter + 1;
        let mut jtj = nalgebra::Matrix4::<f64>::zeros();
        let mut jtr = nalgebra::Vector4::<f64>::zeros();
        for &(x, y) in &data {
            let jac = lorentzian_jacobian(x, &p);
            let r = y - lorentzian(x, &p);
            for i in 0..4 {
                jtr[i] += jac[i] * r;
                for j in 0..4 {
                    jtj[(i, j)] += jac[i] * jac[j];
                }
            }
        }
        let mut damped = jtj;
        for i in 0..4 {
            damped[(i, i)] *= 1.0 + lambda;
        }
        let step = match damped.lu().solve(&jtr) {
            Some(s) => s,
            None => {
                return Err(Error::Fit(format!(
                    "singular normal equations at iterate (c={}, w={}, A={}, o={})",
                    p[0], p[1], p[2], p[3]
                )))
            }
        };
        let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
        let trial_cost = chi2(&trial);
        if trial_cost <= cost {
            let improvement = cost - trial_cost;
            p = trial;
            p[1] = p[1].abs(); // width sign is a gauge freedom
            cost = trial_cost;
            lambda = (lambda * 0.3).max(1e-12);
            if improvement < 1e-14 * (1.0 + cost) {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                return Err(Error::Fit(format!(
                    "no convergence after {iterations} iterations; last iterate \
                     (c={:.6}, w={:.6}, A={:.4}, o={:.4}), chi2 = {cost:.3e}",
                    p[0], p[1], p[2], p[3]
                )));
            }
        }
    }

    // Covariance = s² (JᵀJ)⁻¹ at the optimum.
    let mut jtj = nalgebra::Matrix4::<f64>::zeros();
    for &(x, _) in &data {
        let jac = lorentzian_jacobian(x, &p);
        for i in 0..4 {
            for j in 0..4 {
                jtj[(i, j)] += jac[i] * jac[j];
            }
        }
    }
    let dof = (data.len() as f64 - 4.0).max(1.0);
    let s2 = cost / dof;
    let cov = jtj
        .try_inverse()
        .map(|inv| {
            (0..4)
                .map(|i| (0..4).map(|j| s2 * inv[(i, j)]).collect())
                .collect::<Vec<Vec<f64>>>()
        })
        .unwrap_or_else(|| vec![vec![f64::NAN; 4]; 4]);

    Ok(LorentzianFit {
        center_mhz: p[0],
        width_mhz: p[1],
        amplitude: p[2],
        offset: p[3],
        covariance: cov,
        iterations,
    })
}

// ---------------------------------------------------------------------------
// Zeeman slope.
// ---------------------------------------------------------------------------

/// Linear fit of temperature-corrected detunings against µB₀/h.
#[derive(Debug, Clone, Serialize)]
pub struct ZeemanSlopeFit {
    /// Slope in units of µB₀ (−2 for a pure initial-pair Zeeman shift).
    pub slope: f64,
    pub slope_sigma: f64,
    pub intercept_mhz: f64,
    /// |slope + 2|: upper bound on the molecular magnetic moment in
    /// units of µ.
    pub moment_bound_mu: f64,
}

/// Fit detuning(B₀) = intercept + slope·(µB₀/h). Points are (B₀ in Gauss,
/// temperature-corrected detuning in MHz).
pub fn zeeman_slope_fit(
    points: &[(f64, f64)],
    constants: &PhysicalConstants,
) -> Result<ZeemanSlopeFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!(
            "the Zeeman slope fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let x: Vec<f64> = points
        .iter()
        .map(|p| constants.mu_per_h_mhz_per_gauss * p.0)
        .collect();
    let spread = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - x.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread <= 0.0 {
        return Err(Error::Fit(
            "all field values coincide; the slope is undetermined".into(),
        ));
    }
    let n = points.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(points.iter()).map(|(v, p)| v * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let ss_res: f64 = x
        .iter()
        .zip(points.iter())
        .map(|(v, p)| {
            let r = p.1 - intercept - slope * v;
            r * r
        })
        .sum();
    let s2 = ss_res / (n - 2.0).max(1.0);
    let slope_sigma = (s2 * n / denom).sqrt();
    Ok(ZeemanSlopeFit {
        slope,
        slope_sigma,
        intercept_mhz: intercept,
        moment_bound_mu: (slope + 2.0).abs(),
    })
}

// ---------------------------------------------------------------------------
// Monte-Carlo thermal averages.
// ---------------------------------------------------------------------------

/// Monte-Carlo estimates of the two thermal shift terms, with statistical
/// errors of the means.
#[derive(Debug, Clone, Serialize)]
pub struct ThermalAverages {
    pub trap_mhz: f64,
    pub trap_sigma_mhz: f64,
    pub kinetic_mhz: f64,
    pub kinetic_sigma_mhz: f64,
    pub samples: usize,
}

const MC_STREAMS: usize = 16;

fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // Box-Muller on open-interval uniforms.
    let u1: f64 = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    (r * phi.cos(), r * phi.sin())
}

fn three_normals(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let (a, b) = normal_pair(rng);
    let (c, _) = normal_pair(rng);
    [a, b, c]
}

/// Sample the harmonic-trap potential energy (three quadratic degrees of
/// freedom) and the relative kinetic energy ħ²q²/m under the q²-weighted
/// one-dimensional Boltzmann measure; both averages converge to
/// (3/2)k_BT/h. Streams are seeded independently so the merged result is
/// identical for any thread count.
pub fn thermal_average_mc(
    temperature_uk: f64,
    samples: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<ThermalAverages> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(temperature_uk >= 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be non-negative, got {temperature_uk} µK"
        )));
    }
    if samples < 10_000 {
        return Err(Error::Usage(format!(
            "at least 10^4 samples are needed for a meaningful average, got {samples}"
        )));
    }
    let kbt_mhz = KB_MHZ_PER_UK * temperature_uk;
    let per_stream = samples.div_ceil(MC_STREAMS);
    let partials: Vec<(f64, f64, f64, f64, usize)> = map_indexed(mode, MC_STREAMS, |s| {
        let stream_salt = (s as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream_salt);
        let mut sum_t = 0.0;
        let mut sq_t = 0.0;
        let mut sum_k = 0.0;
        let mut sq_k = 0.0;
        for _ in 0..per_stream {
            // Trap: U = (k_BT/2)·Σ w_i² over the three Cartesian normals.
            let w = three_normals(&mut rng);
            let trap = 0.5 * kbt_mhz * (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
            sum_t += trap;
            sq_t += trap * trap;
            // Kinetic: the q²-weighted 1-D measure equals the modulus
            // distribution of a 3-D Gaussian, so ħ²q²/m = (k_BT/2)·|z|².
            let z = three_normals(&mut rng);
            let kin = 0.5 * kbt_mhz * (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
            sum_k += kin;
            sq_k += kin * kin;
        }
        (sum_t, sq_t, sum_k, sq_k, per_stream)
    });

    let n_total: usize = partials.iter().map(|p| p.4).sum();
    let nf = n_total as f64;
    let sum_t: f64 = partials.iter().map(|p| p.0).sum();
    let sq_t: f64 = partials.iter().map(|p| p.1).sum();
    let sum_k: f64 = partials.iter().map(|p| p.2).sum();
    let sq_k: f64 = partials.iter().map(|p| p.3).sum();
    let mean_t = sum_t / nf;
    let mean_k = sum_k / nf;
    let var_t = (sq_t / nf - mean_t * mean_t).max(0.0);
    let var_k = (sq_k / nf - mean_k * mean_k).max(0.0);
    Ok(ThermalAverages {
        trap_mhz: mean_t,
        trap_sigma_mhz: (var_t / nf).sqrt(),
        kinetic_mhz: mean_k,
        kinetic_sigma_mhz: (var_k / nf).sqrt(),
        samples: n_total,
    })
}
