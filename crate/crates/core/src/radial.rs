//! Single-channel radial equation on an effective potential: Numerov
//! shooting with inward/outward integration matched at the outermost
//! classical turning point, plus an independent dense finite-difference
//! diagonalization route (Sturm-sequence bisection on the tridiagonal
//! matrix) used as an oracle.

use crate::constants::{au_to_mhz, mhz_to_au};
use crate::error::{Error, Result};
use crate::potentials::PotentialCurve;

/// Effective potential samples for one (block, J) curve, in Hartree
/// relative to the curve's asymptote.
#[derive(Debug, Clone)]
pub struct EffectivePotential {
    pub block_name: String,
    pub j: u32,
    pub include_radial_correction: bool,
    /// Strictly increasing radii in bohr.
    pub r: Vec<f64>,
    pub v: Vec<f64>,
}

/// V_eff = V + (flag ? −(ħ²/2µ)·g(R) : 0). The correction −g = ‖∂φ/∂R‖²
/// is non-negative, so the corrected potential lies above the bare one.
pub fn effective_potential(
    curve: &PotentialCurve,
    include_radial_correction: bool,
    mu: f64,
) -> EffectivePotential {
    let v = if include_radial_correction {
        curve
            .values
            .iter()
            .zip(curve.radial_correction.iter())
            .map(|(v, g)| v - g / (2.0 * mu))
            .collect()
    } else {
        curve.values.clone()
    };
    EffectivePotential {
        block_name: curve.block_name.clone(),
        j: curve.j,
        include_radial_correction,
        r: curve.r_grid.clone(),
        v,
    }
}

/// One bound ro-vibrational level.
#[derive(Debug, Clone)]
pub struct BoundLevel {
    pub block_name: String,
    pub j: u32,
    /// Vibrational index = number of interior nodes.
    pub v: usize,
    /// Binding energy relative to the curve asymptote, MHz (negative).
    pub energy_mhz: f64,
    pub energy_au: f64,
    /// Solver grid in bohr.
    pub r: Vec<f64>,
    /// Radial wavefunction, normalized to ∫u² dR = 1.
    pub u: Vec<f64>,
    /// Classical turning points in bohr.
    pub r_min: f64,
    pub r_max: f64,
    /// ⟨R⟩ = ∫u²R dR in bohr.
    pub mean_r: f64,
    /// |E| < 0.5 MHz: grid-sensitive, reported but flagged.
    pub near_threshold: bool,
    /// Converged onto an edge of the requested search window.
    pub at_window_edge: bool,
}

fn check_uniform(r: &[f64]) -> Result<f64> {
    if r.len() < 8 {
        return Err(Error::Usage("radial solve needs at least 8 grid points".into()));
    }
    let h = r[1] - r[0];
    for w in r.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
            return Err(Error::Usage(
                "radial solve requires a uniform grid; resample the curve".into(),
            ));
        }
    }
    Ok(h)
}

/// Numerov sweep for u'' = q(r)·u with q_i = 2µ(V_i − E). Integrates
/// u[start..=stop] in the direction implied by the index order, seeding
/// the first two points, renormalizing to avoid overflow in classically
/// forbidden regions. Returns the node count of the swept segment.
fn numerov_sweep(
    q: &[f64],
    h: f64,
    u: &mut [f64],
    indices: impl Iterator<Item = usize> + Clone,
) -> usize {
    let idx: Vec<usize> = indices.collect();
    let h2 = h * h;
    let f = |i: usize| 1.0 - h2 * q[i] / 12.0;
    let mut nodes = 0;
    for w in 2..idx.len() {
        let (i2, i1, i0) = (idx[w], idx[w - 1], idx[w - 2]);
        u[i2] = (u[i1] * (2.0 + 10.0 * h2 * q[i1] / 12.0) - u[i0] * f(i0)) / f(i2);
        if u[i2] * u[i1] < 0.0 {
            nodes += 1;
        }
        if u[i2].abs() > 1e200 {
            let scale = 1.0 / u[i2].abs();
            for &k in idx.iter().take(w + 1) {
                u[k] *= scale;
            }
        }
    }
    nodes
}

/// Index range over which the outward solution is integrated: start deep
/// enough inside the inner forbidden region that the seed value is
/// negligible (accumulated WKB phase ≳ 34), clamped to the grid start.
fn inner_start(q: &[f64], h: f64, e_idx_inner_turning: usize) -> usize {
    let mut accum = 0.0;
    let mut i = e_idx_inner_turning;
    while i > 0 {
        if q[i] > 0.0 {
            accum += q[i].sqrt() * h;
        }
        if accum > 34.0 {
            break;
        }
        i -= 1;
    }
    i
}

/// One shooting evaluation at energy `e` (a.u.): outward and inward
/// Numerov integrations matched at `m` (outermost turning point index).
/// Returns the Wronskian-type matching defect; common factors cancel, so
/// only its sign and zero matter.
fn shoot(v: &[f64], h: f64, mu: f64, e: f64, m: usize) -> f64 {
    let n = v.len();
    let q: Vec<f64> = v.iter().map(|&vi| 2.0 * mu * (vi - e)).collect();

    let t_in = (0..n).find(|&i| q[i] <= 0.0).unwrap_or(0);
    let start = inner_start(&q, h, t_in);

    let mut u_out = vec![0.0; n];
    u_out[start] = 0.0;
    u_out[start + 1] = 1e-12;
    numerov_sweep(&q, h, &mut u_out, start..=(m + 1).min(n - 1));

    let mut u_in = vec![0.0; n];
    let kappa = q[n - 1].max(0.0).sqrt();
    u_in[n - 1] = 1e-12;
    u_in[n - 2] = 1e-12 * (kappa * h).exp();
    numerov_sweep(&q, h, &mut u_in, ((m - 1)..=(n - 1)).rev());

    let d_out = (u_out[m + 1] - u_out[m - 1]) / u_out[m];
    let d_in = (u_in[m + 1] - u_in[m - 1]) / u_in[m];
    d_out - d_in
}

fn count_nodes_full(v: &[f64], h: f64, mu: f64, e: f64) -> usize {
    let n = v.len();
    let q: Vec<f64> = v.iter().map(|&vi| 2.0 * mu * (vi - e)).collect();
    let t_in = (0..n).find(|&i| q[i] <= 0.0).unwrap_or(0);
    let start = inner_start(&q, h, t_in);
    let mut u = vec![0.0; n];
    u[start] = 0.0;
    u[start + 1] = 1e-12;
    numerov_sweep(&q, h, &mut u, start..n)
}

/// Outermost classical turning point index for energy `e`.
fn match_index(v: &[f64], e: f64) -> Option<usize> {
    let n = v.len();
    let m = (0..n).rev().find(|&i| v[i] <= e)?;
    if m < 2 || m > n - 3 {
        None
    } else {
        Some(m)
    }
}

/// Find every bound level in the energy window (MHz, relative to the
/// curve asymptote). Levels are converged by bisection on the matching
/// defect inside node-count brackets; the vibrational index is the
/// interior node count of the assembled wavefunction.
pub fn solve_bound_states(
    pot: &EffectivePotential,
    mu: f64,
    window_mhz: (f64, f64),
) -> Result<Vec<BoundLevel>> {
    let h = check_uniform(&pot.r)?;
    let v = &pot.v;
    let v_min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let (w_lo_mhz, w_hi_mhz) = window_mhz;
    if w_lo_mhz >= w_hi_mhz {
        return Err(Error::Usage(format!(
            "energy window must be ordered, got ({w_lo_mhz}, {w_hi_mhz}) MHz"
        )));
    }
    let mut e_lo = mhz_to_au(w_lo_mhz).max(v_min * (1.0 - 1e-12));
    let e_hi = mhz_to_au(w_hi_mhz).min(-1e-18);
    if e_lo >= e_hi {
        return Ok(Vec::new());
    }
    // Nudge off the exact well bottom where no turning points exist.
    e_lo += (e_hi - e_lo) * 1e-12;

    let n_lo = count_nodes_full(v, h, mu, e_lo);
    let n_hi = count_nodes_full(v, h, mu, e_hi);
    if n_hi <= n_lo {
        return Ok(Vec::new());
    }

    let mut levels = Vec::new();
    for k in n_lo..n_hi {
        // Bracket the energy where the node count steps from k to k+1.
        let (mut a, mut b) = (e_lo, e_hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if count_nodes_full(v, h, mu, mid) <= k {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-14 * b.abs().max(1e-18) {
                break;
            }
        }
        // Refine on the matching defect with the match point frozen at the
        // bracket midpoint.
        let m = match_index(v, 0.5 * (a + b)).ok_or_else(|| {
            Error::Convergence(format!(
                "no classical turning point for level {k} near E = {} MHz",
                au_to_mhz(0.5 * (a + b))
            ))
        })?;
        let (mut a2, mut b2) = (a, b);
        let fa = shoot(v, h, mu, a2, m);
        let fb = shoot(v, h, mu, b2, m);
        if fa.signum() == fb.signum() {
            // The node-count bracket is already tight enough that the
            // defect no longer changes sign in floating point; keep it.
        } else {
            for _ in 0..200 {
                let mid = 0.5 * (a2 + b2);
                let fm = shoot(v, h, mu, mid, m);
                if fm.signum() == fa.signum() {
                    a2 = mid;
                } else {
                    b2 = mid;
                }
                if b2 - a2 < 1e-15 * b2.abs().max(1e-20) {
                    break;
                }
            }
        }
        let e = 0.5 * (a2 + b2);
        levels.push(assemble_level(pot, mu, e, m, (e_lo, e_hi))?);
    }

    // Mutual orthogonality is a contract: defend against double finds.
    levels.sort_by(|x, y| x.energy_au.partial_cmp(&y.energy_au).unwrap());
    levels.dedup_by(|x, y| (x.energy_au - y.energy_au).abs() < mhz_to_au(1e-6));
    Ok(levels)
}

fn assemble_level(
    pot: &EffectivePotential,
    mu: f64,
    e: f64,
    m: usize,
    window: (f64, f64),
) -> Result<BoundLevel> {
    let h = pot.r[1] - pot.r[0];
    let v = &pot.v;
    let n = v.len();
    let q: Vec<f64> = v.iter().map(|&vi| 2.0 * mu * (vi - e)).collect();

    let t_in = (0..n).find(|&i| q[i] <= 0.0).unwrap_or(0);
    let start = inner_start(&q, h, t_in);
    let mut u_out = vec![0.0; n];
    u_out[start + 1] = 1e-12;
    numerov_sweep(&q, h, &mut u_out, start..=m);
    let mut u_in = vec![0.0; n];
    let kappa = q[n - 1].max(0.0).sqrt();
    u_in[n - 1] = 1e-12;
    u_in[n - 2] = 1e-12 * (kappa * h).exp();
    numerov_sweep(&q, h, &mut u_in, (m..=(n - 1)).rev());

    let scale = u_out[m] / u_in[m];
    let mut u: Vec<f64> = (0..n)
        .map(|i| if i <= m { u_out[i] } else { u_in[i] * scale })
        .collect();

    // Trapezoidal normalization ∫u² dR = 1.
    let norm2: f64 = trapezoid(&pot.r, &u.iter().map(|x| x * x).collect::<Vec<_>>());
    let inv = 1.0 / norm2.sqrt();
    for x in u.iter_mut() {
        *x *= inv;
    }
    let umax = u.iter().cloned().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if u[n - 1].abs() > 1e-8 * umax {
        return Err(Error::GridExtension(format!(
            "wavefunction at E = {:.4} MHz has not decayed at the outer grid end \
             ({:.2e} of max); extend the grid",
            au_to_mhz(e),
            u[n - 1].abs() / umax
        )));
    }

    // Count sign changes between significant samples; a node landing
    // exactly on a grid point contributes one change, not two.
    let mut nodes = 0;
    let mut last_sign = 0i8;
    for &x in &u {
        if x.abs() <= 1e-9 * umax {
            continue;
        }
        let s = if x > 0.0 { 1 } else { -1 };
        if last_sign != 0 && s != last_sign {
            nodes += 1;
        }
        last_sign = s;
    }

    let (r_min, r_max) = turning_points(pot, au_to_mhz(e))?;
    let mean_r = trapezoid(
        &pot.r,
        &pot.r
            .iter()
            .zip(u.iter())
            .map(|(r, x)| x * x * r)
            .collect::<Vec<_>>(),
    );

    let e_mhz = au_to_mhz(e);
    let edge_tol = (window.1 - window.0) * 1e-9;
    Ok(BoundLevel {
        block_name: pot.block_name.clone(),
        j: pot.j,
        v: nodes,
        energy_mhz: e_mhz,
        energy_au: e,
        r: pot.r.clone(),
        u,
        r_min,
        r_max,
        mean_r,
        near_threshold: e_mhz.abs() < 0.5,
        at_window_edge: (e - window.0).abs() < edge_tol || (e - window.1).abs() < edge_tol,
    })
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// Innermost and outermost classical turning points V_eff(R) = E by
/// bracketed root finding with linear interpolation between samples.
/// `energy_mhz` is relative to the curve asymptote.
pub fn turning_points(pot: &EffectivePotential, energy_mhz: f64) -> Result<(f64, f64)> {
    let e = mhz_to_au(energy_mhz);
    let v = &pot.v;
    let r = &pot.r;
    let v_min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    if (e - v_min).abs() <= 1e-18 + 1e-12 * v_min.abs() {
        let i = v
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        return Ok((r[i], r[i]));
    }
    let crossings: Vec<f64> = v
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[0] - e) * (w[1] - e) <= 0.0 && w[0] != w[1])
        .map(|(i, w)| {
            let t = (e - w[0]) / (w[1] - w[0]);
            r[i] + t * (r[i + 1] - r[i])
        })
        .collect();
    if crossings.len() < 2 {
        return Err(Error::Domain(format!(
            "energy {energy_mhz} MHz lies outside the well of {}",
            pot.block_name
        )));
    }
    Ok((crossings[0], *crossings.last().unwrap()))
}

/// ⟨R⟩ = ∫ u² R dR by trapezoidal quadrature (u assumed normalized).
pub fn mean_radius(r: &[f64], u: &[f64]) -> f64 {
    trapezoid(
        r,
        &r.iter().zip(u.iter()).map(|(ri, x)| x * x * ri).collect::<Vec<_>>(),
    )
}

// ---------------------------------------------------------------------------
// Independent finite-difference diagonalization route.
// ---------------------------------------------------------------------------

/// Count eigenvalues of the symmetric tridiagonal matrix (diag d, off e)
/// strictly below x, by the Sturm sequence.
fn sturm_count(d: &[f64], e: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    let e2 = e * e;
    for &di in d {
        q = di - x - if q != 0.0 { e2 / q } else { e2 / 1e-300 };
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues below zero of the dense finite-difference Hamiltonian
/// −(1/2µ)d²/dR² + V on the sample grid (Dirichlet ends), in MHz.
/// This is the independent oracle for the shooting solver: an O(h²)
/// discretization diagonalized by Sturm bisection, optionally Richardson
/// extrapolated against the doubled step to O(h⁴).
pub fn fd_bound_energies(
    pot: &EffectivePotential,
    mu: f64,
    window_mhz: (f64, f64),
    richardson: bool,
) -> Result<Vec<f64>> {
    let h = check_uniform(&pot.r)?;
    let fine = fd_eigenvalues(&pot.v, h, mu, window_mhz);
    if !richardson {
        return Ok(fine);
    }
    let coarse_v: Vec<f64> = pot.v.iter().step_by(2).cloned().collect();
    let coarse = fd_eigenvalues(&coarse_v, 2.0 * h, mu, window_mhz);
    Ok(fine
        .iter()
        .zip(coarse.iter())
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect())
}

fn fd_eigenvalues(v: &[f64], h: f64, mu: f64, window_mhz: (f64, f64)) -> Vec<f64> {
    let kin = 1.0 / (mu * h * h);
    let d: Vec<f64> = v[1..v.len() - 1].iter().map(|&vi| vi + kin).collect();
    let off = -0.5 * kin;
    let lo = mhz_to_au(window_mhz.0);
    let hi = mhz_to_au(window_mhz.1).min(0.0);
    let k_lo = sturm_count(&d, off, lo);
    let k_hi = sturm_count(&d, off, hi);
    let mut out = Vec::with_capacity(k_hi.saturating_sub(k_lo));
    for k in k_lo..k_hi {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if sturm_count(&d, off, mid) <= k {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-15 * b.abs().max(1e-20) {
                break;
            }
        }
        out.push(au_to_mhz(0.5 * (a + b)));
    }
    out
}
