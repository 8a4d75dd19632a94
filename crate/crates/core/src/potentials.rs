//! Fixed-nuclei electronic Hamiltonian (retarded dipole-dipole interaction
//! plus atomic fine structure), the within-block rotational term, adiabatic
//! potential curves with eigenvector continuity through avoided crossings,
//! and the diagonal radial correction ⟨φ|∂²φ/∂R²⟩.

use nalgebra::{DMatrix, DVector};

use crate::basis::{self, Parity, SymmetryBlock};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, ExecMode};

/// Which pieces of the model enter the electronic matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HamiltonianFlags {
    /// Keep the finite-kR retardation factors (false = kR → 0 limit).
    pub retarded: bool,
    /// Include the within-block nuclear-rotation term ℓ²/2µR².
    pub rotation: bool,
}

impl Default for HamiltonianFlags {
    fn default() -> Self {
        HamiltonianFlags {
            retarded: true,
            rotation: true,
        }
    }
}

/// Retardation factor for Σ couplings: cos x + x·sin x  (≈ 1 + x²/2 at
/// small x).
fn retard_sigma(x: f64) -> f64 {
    x.cos() + x * x.sin()
}

/// Retardation factor for Π couplings: cos x + x·sin x − x²·cos x
/// (≈ 1 − x²/2 at small x).
fn retard_pi(x: f64) -> f64 {
    x.cos() + x * x.sin() - x * x * x.cos()
}

/// Diagonal value of the resonant dipole-dipole interaction on a Hund's
/// case (a) state |²ˢ⁺¹Λ⟩ of inversion parity ω, in Hartree.
///
/// The excitation-transfer amplitudes are −2C₃/R³ for Σ and +C₃/R³ for Π
/// (head-to-tail dipoles attract in the symmetric combination); combined
/// with the arrangement-exchange eigenvalue −ω(−1)^S of the state this
/// gives
///     Σ:  +2ω(−1)^S · C₃/R³ · (cos kR + kR sin kR)
///     Π:  −ω(−1)^S · C₃/R³ · (cos kR + kR sin kR − (kR)² cos kR)
/// with ω = −1 for ungerade. The overall orientation is fixed by the
/// physical structure of the 0u⁺ subspace: one repulsive curve (the
/// quintet Π, which forms the inner wall of the purely long-range well)
/// and three attractive ones, two of them identical.
pub fn dipole_dipole_element(
    constants: &PhysicalConstants,
    r: f64,
    s: u32,
    lambda_abs: u32,
    parity: Parity,
    retarded: bool,
) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::Domain(format!(
            "internuclear distance must be positive, got {r} bohr"
        )));
    }
    if s > 2 {
        return Err(Error::Usage(format!("molecular spin must be 0, 1 or 2, got {s}")));
    }
    if lambda_abs > 1 {
        return Err(Error::Usage(format!("|Lambda| must be 0 or 1, got {lambda_abs}")));
    }
    let omega = parity.omega_sign();
    let spin_sign = if s.is_multiple_of(2) { 1.0 } else { -1.0 };
    let x = constants.photon_wavevector_au() * r;
    let c3_over_r3 = constants.c3_au / (r * r * r);
    let value = if lambda_abs == 0 {
        let f = if retarded { retard_sigma(x) } else { 1.0 };
        2.0 * omega * spin_sign * c3_over_r3 * f
    } else {
        let f = if retarded { retard_pi(x) } else { 1.0 };
        -omega * spin_sign * c3_over_r3 * f
    };
    Ok(value)
}

/// Per-block Hamiltonian with all R-independent pieces projected once.
#[derive(Debug, Clone)]
pub struct BlockHamiltonian {
    pub block: SymmetryBlock,
    pub constants: PhysicalConstants,
    hfs: DMatrix<f64>,
    /// Projection of L² + S² + 2L_zS_z + L₊S₋ + L₋S₊ (the J- and
    /// Ω-independent part of the retained rotational operator).
    rot_fixed: DMatrix<f64>,
}

impl BlockHamiltonian {
    pub fn new(block: SymmetryBlock, constants: &PhysicalConstants) -> Self {
        let hfs54 = basis::fs_operator(constants.alpha_au, constants.beta_au);
        let lz = basis::l_z_matrix();
        let sz = basis::s_z_matrix();
        let lp = basis::l_ladder_matrix(true);
        let lm = basis::l_ladder_matrix(false);
        let sp = basis::s_ladder_matrix(true);
        let sm = basis::s_ladder_matrix(false);
        let rot54 = basis::l_squared_matrix()
            + basis::s_squared_matrix()
            + 2.0 * (&lz * &sz)
            + (&lp * &sm + &lm * &sp);
        BlockHamiltonian {
            hfs: block.project(&hfs54),
            rot_fixed: block.project(&rot54),
            block,
            constants: constants.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.block.dim()
    }

    /// Assemble the Hermitian block matrix at internuclear distance `r`
    /// (bohr) for total angular momentum `j`, in Hartree.
    pub fn matrix(&self, r: f64, j: u32, flags: HamiltonianFlags) -> Result<DMatrix<f64>> {
        if r <= 0.0 {
            return Err(Error::Domain(format!(
                "internuclear distance must be positive, got {r} bohr"
            )));
        }
        if flags.rotation && j < self.block.omega {
            return Err(Error::Usage(format!(
                "J must be at least Omega, got J = {j} for Omega = {}",
                self.block.omega
            )));
        }
        let d = self.dim();
        let mut h = self.hfs.clone();
        for (i, label) in self.block.labels.iter().enumerate() {
            h[(i, i)] += dipole_dipole_element(
                &self.constants,
                r,
                label.s,
                label.lambda_abs,
                self.block.parity,
                flags.retarded,
            )?;
        }
        if flags.rotation {
            let jj = (j * (j + 1)) as f64;
            let omega2 = (self.block.omega * self.block.omega) as f64;
            let pref = 1.0 / (2.0 * self.constants.reduced_mass_au * r * r);
            let centrifugal = &self.rot_fixed + DMatrix::identity(d, d) * (jj - 2.0 * omega2);
            h += pref * centrifugal;
        }
        Ok(h)
    }

    /// Separated-atom limits of the block (eigenvalues of the projected
    /// fine-structure operator, ascending), each tagged with the atomic
    /// level J it belongs to.
    pub fn asymptotic_levels(&self) -> Vec<(u32, f64)> {
        let mut vals: Vec<f64> = self.hfs.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.iter()
            .map(|&e| {
                let j = (0..=2)
                    .min_by(|&a, &b| {
                        let da = (self.constants.fs_asymptote_au(a) - e).abs();
                        let db = (self.constants.fs_asymptote_au(b) - e).abs();
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                (j, self.constants.fs_asymptote_au(j))
            })
            .collect()
    }
}

/// Full 54-dimensional electronic (+ optional rotational) matrix, used for
/// dense cross checks against the block-projected route.
pub fn hamiltonian_full(
    constants: &PhysicalConstants,
    r: f64,
    j: u32,
    flags: HamiltonianFlags,
) -> Result<DMatrix<f64>> {
    if r <= 0.0 {
        return Err(Error::Domain(format!(
            "internuclear distance must be positive, got {r} bohr"
        )));
    }
    let x = constants.photon_wavevector_au() * r;
    let c3_over_r3 = constants.c3_au / (r * r * r);
    let (f_sigma, f_pi) = if flags.retarded {
        (retard_sigma(x), retard_pi(x))
    } else {
        (1.0, 1.0)
    };
    // Excitation transfer: −2C₃/R³ for m_l = 0, +C₃/R³ for |m_l| = 1.
    let mut u = DMatrix::zeros(basis::DIM, basis::DIM);
    for v in basis::product_basis() {
        let image = basis::BasisVector {
            arrangement: v.arrangement.flipped(),
            ..v
        };
        let amp = if v.m_l == 0 {
            -2.0 * c3_over_r3 * f_sigma
        } else {
            c3_over_r3 * f_pi
        };
        u[(basis::basis_index(&image), basis::basis_index(&v))] = amp;
    }

    let mut h = basis::fs_operator(constants.alpha_au, constants.beta_au) + u;
    if flags.rotation {
        let lz = basis::l_z_matrix();
        let sz = basis::s_z_matrix();
        let jz = &lz + &sz;
        let lp = basis::l_ladder_matrix(true);
        let lm = basis::l_ladder_matrix(false);
        let sp = basis::s_ladder_matrix(true);
        let sm = basis::s_ladder_matrix(false);
        let jj = (j * (j + 1)) as f64;
        let rot = basis::l_squared_matrix()
            + basis::s_squared_matrix()
            + DMatrix::identity(basis::DIM, basis::DIM) * jj
            - 2.0 * (&jz * &jz)
            + 2.0 * (&lz * &sz)
            + (&lp * &sm + &lm * &sp);
        h += rot / (2.0 * constants.reduced_mass_au * r * r);
    }
    Ok(h)
}

// ---------------------------------------------------------------------------
// Grids.
// ---------------------------------------------------------------------------

/// Default export grid: uniform 0.5 bohr steps up to 3000 bohr, geometric
/// beyond (outer turning points reach ≈2200 bohr).
pub fn default_r_grid() -> Vec<f64> {
    piecewise_r_grid(100.0, 3000.0, 0.5, 20_000.0, 1.002)
}

/// Uniform grid below `r_mid`, geometric (ratio `q`) beyond, ending at or
/// just above `r_max`.
pub fn piecewise_r_grid(r_min: f64, r_mid: f64, step: f64, r_max: f64, q: f64) -> Vec<f64> {
    assert!(r_min > 0.0 && r_mid > r_min && r_max > r_mid && step > 0.0 && q > 1.0);
    let n = ((r_mid - r_min) / step).round() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| r_min + i as f64 * step).collect();
    let mut r = r_mid;
    while r < r_max {
        r *= q;
        grid.push(r);
    }
    grid
}

/// Uniform grid from `r_min` to `r_max` with exactly `n` points.
pub fn uniform_r_grid(r_min: f64, r_max: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && r_max > r_min);
    let h = (r_max - r_min) / (n - 1) as f64;
    (0..n).map(|i| r_min + i as f64 * h).collect()
}

// ---------------------------------------------------------------------------
// Adiabatic curves.
// ---------------------------------------------------------------------------

/// One adiabatic eigenvalue V_{J,Ω}(R) with continuity-fixed eigenvectors
/// and the diagonal radial correction, referenced to its own
/// separated-atom asymptote.
#[derive(Debug, Clone)]
pub struct PotentialCurve {
    /// Block name (`0u+`, `2u`, ...).
    pub block_name: String,
    pub j: u32,
    /// Index of the adiabatic eigenvalue, ascending at large R.
    pub curve_index: usize,
    pub flags: HamiltonianFlags,
    /// Strictly increasing radii in bohr.
    pub r_grid: Vec<f64>,
    /// V(R) in Hartree relative to this curve's asymptote.
    pub values: Vec<f64>,
    /// Continuity-fixed block coordinates of the adiabatic state.
    pub eigenvectors: Vec<DVector<f64>>,
    /// g(R) = ⟨φ|∂²φ/∂R²⟩ in bohr⁻²; −g(R) = ‖∂φ/∂R‖² ≥ 0.
    pub radial_correction: Vec<f64>,
    /// Which 2³S₁+2³P_J limit the curve approaches.
    pub asymptote_j: u32,
    /// Absolute energy of that limit in Hartree.
    pub asymptote_au: f64,
}

impl PotentialCurve {
    /// Well depth in Hartree (0 if the curve has no well below its
    /// asymptote).
    pub fn well_depth_au(&self) -> f64 {
        -self.values.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0)
    }
}

/// Eigenvalues (ascending) and matching eigenvectors at one grid point.
type EigenPoint = (Vec<f64>, Vec<DVector<f64>>);

fn sorted_eigen(m: DMatrix<f64>) -> EigenPoint {
    let se = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vecs = order
        .iter()
        .map(|&i| se.eigenvectors.column(i).into_owned())
        .collect();
    (vals, vecs)
}

/// Match each reference vector to the unused new eigenvector of largest
/// overlap, fixing signs. Returns per-branch (value, vector, |overlap|).
fn match_branches(
    reference: &[DVector<f64>],
    vals: &[f64],
    vecs: &[DVector<f64>],
) -> Vec<(f64, DVector<f64>, f64)> {
    let d = reference.len();
    let mut used = vec![false; d];
    let mut out = Vec::with_capacity(d);
    for prev in reference {
        let mut best = (0usize, 0.0f64);
        for (j, v) in vecs.iter().enumerate() {
            if used[j] {
                continue;
            }
            let ov = prev.dot(v).abs();
            if ov > best.1 {
                best = (j, ov);
            }
        }
        used[best.0] = true;
        let sign = if prev.dot(&vecs[best.0]) < 0.0 { -1.0 } else { 1.0 };
        out.push((vals[best.0], sign * vecs[best.0].clone(), best.1));
    }
    out
}

/// Walk the branch set from `r_from` (matched vectors given) to `r_to`,
/// recursively sub-stepping where the eigenvectors rotate too fast.
#[allow(clippy::too_many_arguments)]
fn track_interval(
    bh: &BlockHamiltonian,
    j: u32,
    flags: HamiltonianFlags,
    reference: &[DVector<f64>],
    r_from: f64,
    r_to: f64,
    target: (&[f64], &[DVector<f64>]),
    depth: u32,
) -> Result<Vec<(f64, DVector<f64>)>> {
    let matched = match_branches(reference, target.0, target.1);
    let worst = matched.iter().map(|m| m.2).fold(1.0f64, f64::min);
    if worst >= 0.9 {
        return Ok(matched.into_iter().map(|(v, e, _)| (v, e)).collect());
    }
    if depth == 0 {
        return Err(Error::Refinement(format!(
            "eigenvector overlap {worst:.3} < 0.9 between R = {r_from} and R = {r_to} bohr"
        )));
    }
    let r_mid = 0.5 * (r_from + r_to);
    let (vals_mid, vecs_mid) = sorted_eigen(bh.matrix(r_mid, j, flags)?);
    let mid = track_interval(
        bh,
        j,
        flags,
        reference,
        r_from,
        r_mid,
        (&vals_mid, &vecs_mid),
        depth - 1,
    )?;
    let mid_vecs: Vec<DVector<f64>> = mid.into_iter().map(|(_, v)| v).collect();
    track_interval(bh, j, flags, &mid_vecs, r_mid, r_to, target, depth - 1)
}

/// Diagonalize the block over `r_grid` and assemble smooth adiabatic
/// curves. Eigenvalues are ordered by eigenvector continuity (anchored
/// ascending at the outermost grid point), not by magnitude, and each
/// eigenvector's sign is fixed by maximal overlap with its outer
/// neighbour. Grid points diagonalize independently (in parallel when
/// enabled); the continuity sweep is sequential.
pub fn adiabatic_curves(
    bh: &BlockHamiltonian,
    j: u32,
    r_grid: &[f64],
    flags: HamiltonianFlags,
    mode: ExecMode,
) -> Result<Vec<PotentialCurve>> {
    if r_grid.len() < 5 {
        return Err(Error::Usage("radial grid needs at least 5 points".into()));
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Usage("radial grid must be strictly increasing".into()));
    }
    if flags.rotation && j < bh.block.omega {
        return Err(Error::Usage(format!(
            "J must be at least Omega, got J = {j} for Omega = {}",
            bh.block.omega
        )));
    }

    let n = r_grid.len();
    let d = bh.dim();
    let raw: Vec<Result<EigenPoint>> = map_indexed(mode, n, |i| {
        Ok(sorted_eigen(bh.matrix(r_grid[i], j, flags)?))
    });
    let mut points = Vec::with_capacity(n);
    for p in raw {
        points.push(p?);
    }

    // Continuity sweep from the outermost point inward.
    let mut values = vec![vec![0.0f64; n]; d];
    let mut vectors: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(n); d];
    let last = n - 1;
    for (b, (val, vec)) in points[last].0.iter().zip(points[last].1.iter()).enumerate() {
        values[b][last] = *val;
        vectors[b].push(vec.clone());
    }
    for i in (0..last).rev() {
        let reference: Vec<DVector<f64>> = (0..d).map(|b| vectors[b].last().unwrap().clone()).collect();
        let matched = track_interval(
            bh,
            j,
            flags,
            &reference,
            r_grid[i + 1],
            r_grid[i],
            (&points[i].0, &points[i].1),
            10,
        )?;
        for (b, (val, vec)) in matched.into_iter().enumerate() {
            values[b][i] = val;
            vectors[b].push(vec);
        }
    }
    for v in vectors.iter_mut() {
        v.reverse();
    }

    // Asymptote assignment from the analytic R → ∞ limit: the continuity
    // ordering at the outermost point maps branches onto the ascending
    // fine-structure levels of the block.
    let asymptotes = bh.asymptotic_levels();

    let mut curves = Vec::with_capacity(d);
    for b in 0..d {
        let (aj, ae) = asymptotes[b];
        let rel: Vec<f64> = values[b].iter().map(|v| v - ae).collect();
        let g = radial_correction_samples(r_grid, &vectors[b]);
        curves.push(PotentialCurve {
            block_name: bh.block.name(),
            j,
            curve_index: b,
            flags,
            r_grid: r_grid.to_vec(),
            values: rel,
            eigenvectors: std::mem::take(&mut vectors[b]),
            radial_correction: g,
            asymptote_j: aj,
            asymptote_au: ae,
        });
    }
    Ok(curves)
}

/// g(R) = ⟨φ(R)|∂²φ/∂R²⟩ by a three-point stencil that handles
/// non-uniform spacing; endpoints copy their interior neighbour.
pub fn radial_correction_samples(r_grid: &[f64], vectors: &[DVector<f64>]) -> Vec<f64> {
    let n = r_grid.len();
    let mut g = vec![0.0; n];
    for i in 1..n - 1 {
        let h1 = r_grid[i] - r_grid[i - 1];
        let h2 = r_grid[i + 1] - r_grid[i];
        let c_m = 2.0 / (h1 * (h1 + h2));
        let c_0 = -2.0 / (h1 * h2);
        let c_p = 2.0 / (h2 * (h1 + h2));
        let second = c_m * &vectors[i - 1] + c_0 * &vectors[i] + c_p * &vectors[i + 1];
        g[i] = vectors[i].dot(&second);
    }
    if n >= 3 {
        g[0] = g[1];
        g[n - 1] = g[n - 2];
    }
    g
}

/// ‖∂φ/∂R‖² by the matching first-derivative stencil; used to check the
/// identity −⟨φ|∂²φ⟩ = ‖∂φ‖² to discretization order.
pub fn derivative_norm_squared(r_grid: &[f64], vectors: &[DVector<f64>]) -> Vec<f64> {
    let n = r_grid.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let h1 = r_grid[i] - r_grid[i - 1];
        let h2 = r_grid[i + 1] - r_grid[i];
        let c_m = -h2 / (h1 * (h1 + h2));
        let c_0 = (h2 - h1) / (h1 * h2);
        let c_p = h1 / (h2 * (h1 + h2));
        let first = c_m * &vectors[i - 1] + c_0 * &vectors[i] + c_p * &vectors[i + 1];
        out[i] = first.norm_squared();
    }
    if n >= 3 {
        out[0] = out[1];
        out[n - 1] = out[n - 2];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{block, HundALabel, Reflection};
    use crate::constants::{au_to_ghz, au_to_mhz, ghz_to_au};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn constants() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn zero_u_plus(c: &PhysicalConstants) -> BlockHamiltonian {
        BlockHamiltonian::new(
            block(Parity::Ungerade, 0, Some(Reflection::Plus)).unwrap(),
            c,
        )
    }

    #[test]
    fn dipole_signs_in_the_ungerade_manifold() {
        let c = constants();
        let r = 200.0;
        let c3r3 = c.c3_au / (r * r * r);
        // Quintet Sigma_u: attractive, −2C₃/R³ in the kR → 0 limit.
        let v = dipole_dipole_element(&c, r, 2, 0, Parity::Ungerade, false).unwrap();
        assert_relative_eq!(v, -2.0 * c3r3, max_relative = 1e-12);
        // Quintet Pi_u: repulsive, +C₃/R³ (the inner wall of the 0u⁺ well).
        let v = dipole_dipole_element(&c, r, 2, 1, Parity::Ungerade, false).unwrap();
        assert_relative_eq!(v, c3r3, max_relative = 1e-12);
        // Triplet Sigma_u: repulsive, +2C₃/R³.
        let v = dipole_dipole_element(&c, r, 1, 0, Parity::Ungerade, false).unwrap();
        assert_relative_eq!(v, 2.0 * c3r3, max_relative = 1e-12);
        // Gerade flips every sign.
        let v = dipole_dipole_element(&c, r, 2, 0, Parity::Gerade, false).unwrap();
        assert_relative_eq!(v, 2.0 * c3r3, max_relative = 1e-12);
        assert!(dipole_dipole_element(&c, -1.0, 2, 0, Parity::Ungerade, false).is_err());
    }

    #[test]
    fn retardation_factor_leading_order() {
        // Independent evaluation of the closed form at R = 150 bohr and the
        // leading-order expansion 1 + (kR)²/2 of the Sigma factor.
        let c = constants();
        let r = 150.0;
        let x = c.photon_wavevector_au() * r;
        let plain = dipole_dipole_element(&c, r, 2, 0, Parity::Ungerade, false).unwrap();
        let retarded = dipole_dipole_element(&c, r, 2, 0, Parity::Ungerade, true).unwrap();
        let expected = plain * (x.cos() + x * x.sin());
        assert_relative_eq!(retarded, expected, max_relative = 1e-14);
        assert_relative_eq!(retarded / plain, 1.0 + x * x / 2.0, max_relative = 2e-5);
    }

    #[test]
    fn zero_u_plus_dipole_spectrum_without_fine_structure() {
        // One repulsive eigenvalue, three attractive, two of them identical.
        let mut c = constants();
        c.alpha_au = 0.0;
        c.beta_au = 0.0;
        let bh = zero_u_plus(&c);
        let r = 500.0;
        let c3r3 = c.c3_au / (r * r * r);
        let (vals, vecs) = sorted_eigen(
            bh.matrix(r, 1, HamiltonianFlags { retarded: false, rotation: false }).unwrap(),
        );
        assert_relative_eq!(vals[0], -2.0 * c3r3, max_relative = 1e-10);
        assert_relative_eq!(vals[1], -2.0 * c3r3, max_relative = 1e-10);
        assert_relative_eq!(vals[2], -c3r3, max_relative = 1e-10);
        assert_relative_eq!(vals[3], c3r3, max_relative = 1e-10);

        // Without the fine structure the eigenstates are exact Hund's (a)
        // states: the two non-degenerate Pi eigenvectors carry weight one
        // on their label, and the degenerate pair spans the Sigma
        // subspace.
        let w2 = basis::hund_a_decomposition(&bh.block, &vecs[2]);
        let w3 = basis::hund_a_decomposition(&bh.block, &vecs[3]);
        let weight_of = |w: &[(HundALabel, f64)], s: u32, lam: u32| {
            w.iter()
                .filter(|(l, _)| *l == HundALabel { s, lambda_abs: lam })
                .map(|(_, x)| x)
                .sum::<f64>()
        };
        assert_relative_eq!(weight_of(&w2, 1, 1), 1.0, max_relative = 1e-10);
        assert_relative_eq!(weight_of(&w3, 2, 1), 1.0, max_relative = 1e-10);
        for v in [&vecs[0], &vecs[1]] {
            let w = basis::hund_a_decomposition(&bh.block, v);
            let sigma = weight_of(&w, 0, 0) + weight_of(&w, 2, 0);
            assert_relative_eq!(sigma, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn hermiticity_and_block_diagonality() {
        let c = constants();
        let flags = HamiltonianFlags::default();
        for r in [120.0, 300.0, 1500.0] {
            let full = hamiltonian_full(&c, r, 1, flags).unwrap();
            assert!((&full - full.transpose()).norm() < 1e-12, "Hermitian");

            let inv = basis::inversion_matrix();
            assert!((&full * &inv - &inv * &full).norm() < 1e-10, "commutes with inversion");

            // Cross terms between every pair of distinct ungerade blocks and
            // between the u and g halves vanish.
            let blocks = basis::ungerade_blocks();
            for (i, a) in blocks.iter().enumerate() {
                for b in blocks.iter().skip(i + 1) {
                    let cross = a.vectors.transpose() * &full * &b.vectors;
                    assert!(cross.norm() < 1e-12, "{} x {}", a.name(), b.name());
                }
            }
            let (u, g) = basis::symmetrize();
            let cross = u.transpose() * &full * &g;
            assert!(cross.norm() < 1e-12, "u/g decoupling");
        }
    }

    #[test]
    fn block_projection_matches_full_matrix() {
        let c = constants();
        let bh = zero_u_plus(&c);
        let flags = HamiltonianFlags::default();
        for r in [150.0, 800.0] {
            let from_block = bh.matrix(r, 1, flags).unwrap();
            let full = hamiltonian_full(&c, r, 1, flags).unwrap();
            let projected = bh.block.project(&full);
            assert!((from_block - projected).norm() < 1e-12);
        }
    }

    #[test]
    fn asymptotes_partition_into_fine_structure_levels() {
        let c = constants();
        let bh = zero_u_plus(&c);
        // Multiplicities frozen from the large-R oracle run: two P₂ limits,
        // one P₁, one P₀.
        let asym = bh.asymptotic_levels();
        let js: Vec<u32> = asym.iter().map(|(j, _)| *j).collect();
        assert_eq!(js, vec![2, 2, 1, 0]);

        // Dense check at R = 10⁴ bohr: eigenvalues sit on the asymptotes.
        let (vals, _) = sorted_eigen(
            bh.matrix(1e4, 1, HamiltonianFlags { retarded: true, rotation: false }).unwrap(),
        );
        for (v, (_, e)) in vals.iter().zip(asym.iter()) {
            assert!(au_to_mhz((v - e).abs()) < 15.0, "within the residual 1/R³ tail");
        }
    }

    #[test]
    fn large_r_limits_reproduce_fine_structure_splittings() {
        let c = constants();
        let bh = zero_u_plus(&c);
        let asym = bh.asymptotic_levels();
        let p2 = asym[0].1;
        let p1 = asym[2].1;
        let p0 = asym[3].1;
        assert_relative_eq!(au_to_ghz(p1 - p2), 2.291_175, max_relative = 1e-12);
        assert_relative_eq!(au_to_ghz(p0 - p1), 29.616_950, max_relative = 1e-12);
    }

    #[test]
    fn purely_long_range_well_depths_fixed_nuclei() {
        // 0u⁺: 2.130 GHz, 2u: 0.321 GHz, 0u⁻: 0.054 GHz within 1%.
        let c = constants();
        let flags = HamiltonianFlags { retarded: true, rotation: false };
        let grid = default_r_grid();

        let bh = zero_u_plus(&c);
        let curves = adiabatic_curves(&bh, 0, &grid, flags, ExecMode::auto()).unwrap();
        let well = curves.iter().find(|cc| cc.asymptote_j == 0).unwrap();
        assert_relative_eq!(au_to_ghz(well.well_depth_au()), 2.130, max_relative = 0.01);

        let bh2 = BlockHamiltonian::new(block(Parity::Ungerade, 2, None).unwrap(), &c);
        let curves2 = adiabatic_curves(&bh2, 2, &grid, flags, ExecMode::auto()).unwrap();
        let well2 = curves2
            .iter()
            .filter(|cc| cc.asymptote_j == 1)
            .max_by(|a, b| a.well_depth_au().partial_cmp(&b.well_depth_au()).unwrap())
            .unwrap();
        assert_relative_eq!(au_to_ghz(well2.well_depth_au()), 0.321, max_relative = 0.01);

        let bhm = BlockHamiltonian::new(
            block(Parity::Ungerade, 0, Some(Reflection::Minus)).unwrap(),
            &c,
        );
        let curvesm = adiabatic_curves(&bhm, 0, &grid, flags, ExecMode::auto()).unwrap();
        let wellm = curvesm
            .iter()
            .filter(|cc| cc.asymptote_j == 1)
            .max_by(|a, b| a.well_depth_au().partial_cmp(&b.well_depth_au()).unwrap())
            .unwrap();
        assert_relative_eq!(au_to_ghz(wellm.well_depth_au()), 0.054, max_relative = 0.01);
    }

    #[test]
    fn retarded_well_is_deeper_everywhere_in_the_well_region() {
        let c = constants();
        let grid = default_r_grid();
        let bh = zero_u_plus(&c);
        let on = adiabatic_curves(
            &bh,
            0,
            &grid,
            HamiltonianFlags { retarded: true, rotation: false },
            ExecMode::auto(),
        )
        .unwrap();
        let off = adiabatic_curves(
            &bh,
            0,
            &grid,
            HamiltonianFlags { retarded: false, rotation: false },
            ExecMode::auto(),
        )
        .unwrap();
        let won = on.iter().find(|cc| cc.asymptote_j == 0).unwrap();
        let woff = off.iter().find(|cc| cc.asymptote_j == 0).unwrap();
        for (i, r) in won.r_grid.iter().enumerate() {
            if won.values[i] < 0.0 && *r < 5000.0 {
                assert!(
                    won.values[i] <= woff.values[i] + 1e-15,
                    "retarded curve lies below at R = {r}"
                );
            }
        }
    }

    #[test]
    fn quintet_pi_dominates_the_well_state_at_short_range() {
        let c = constants();
        let grid = default_r_grid();
        let bh = zero_u_plus(&c);
        let flags = HamiltonianFlags { retarded: true, rotation: false };
        let curves = adiabatic_curves(&bh, 0, &grid, flags, ExecMode::auto()).unwrap();
        let wellc = curves.iter().find(|cc| cc.asymptote_j == 0).unwrap();
        let quintet_pi_at = |r_target: f64| {
            let i = wellc.r_grid.iter().position(|&r| (r - r_target).abs() < 0.26).unwrap();
            let w = basis::hund_a_decomposition(&bh.block, &wellc.eigenvectors[i]);
            w.iter()
                .filter(|(l, _)| *l == HundALabel { s: 2, lambda_abs: 1 })
                .map(|(_, x)| x)
                .sum::<f64>()
        };
        // Short-range limit is the pure quintet-Pi state; the weight decays
        // monotonically toward the asymptotic fine-structure mixture and is
        // still the dominant label around the inner turning point.
        assert!(quintet_pi_at(100.0) > 0.95);
        assert!(quintet_pi_at(110.0) > 0.9);
        assert!(quintet_pi_at(150.0) > 0.5);
        assert!(quintet_pi_at(110.0) > quintet_pi_at(150.0));
        assert!(quintet_pi_at(150.0) > quintet_pi_at(300.0));
        assert!(quintet_pi_at(300.0) > quintet_pi_at(1000.0));

        // Far out the state must be a fine-structure (Hund case c) mixture:
        // weights match a dense full-matrix diagonalization.
        let i_far = wellc.r_grid.len() - 1;
        let r_far = wellc.r_grid[i_far];
        let full = hamiltonian_full(&c, r_far, 0, flags).unwrap();
        let (fvals, fvecs) = sorted_eigen(full);
        let target = wellc.values[i_far] + wellc.asymptote_au;
        let k = fvals
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a - target).abs().partial_cmp(&(*b - target).abs()).unwrap())
            .map(|(k, _)| k)
            .unwrap();
        let in_block = bh.block.vectors.transpose() * &fvecs[k];
        assert_relative_eq!(in_block.norm(), 1.0, max_relative = 1e-8);
        let w_dense = basis::hund_a_decomposition(&bh.block, &in_block.normalize());
        let w_curve = basis::hund_a_decomposition(&bh.block, &wellc.eigenvectors[i_far]);
        for ((la, wa), (lb, wb)) in w_dense.iter().zip(w_curve.iter()) {
            assert_eq!(la, lb);
            assert_abs_diff_eq!(wa, wb, epsilon = 1e-8);
        }
    }

    #[test]
    fn eigenvector_continuity_and_correction_sign() {
        let c = constants();
        let grid = default_r_grid();
        let bh = zero_u_plus(&c);
        let curves =
            adiabatic_curves(&bh, 1, &grid, HamiltonianFlags::default(), ExecMode::auto()).unwrap();
        for curve in &curves {
            for i in 1..curve.r_grid.len() {
                let ov = curve.eigenvectors[i - 1].dot(&curve.eigenvectors[i]);
                assert!(ov > 0.99, "overlap {ov} at R = {}", curve.r_grid[i]);
            }
            for (i, g) in curve.radial_correction.iter().enumerate() {
                assert!(
                    -*g >= -1e-12,
                    "positive-definite correction violated at R = {}",
                    curve.r_grid[i]
                );
            }
        }
    }

    #[test]
    fn correction_identity_and_asymptotic_vanishing() {
        let c = constants();
        let grid = uniform_r_grid(100.0, 2000.0, 3801);
        let bh = zero_u_plus(&c);
        let flags = HamiltonianFlags { retarded: true, rotation: false };
        let curves = adiabatic_curves(&bh, 0, &grid, flags, ExecMode::auto()).unwrap();
        let well = curves.iter().find(|cc| cc.asymptote_j == 0).unwrap();
        let dn = derivative_norm_squared(&well.r_grid, &well.eigenvectors);
        // −⟨φ|φ''⟩ = ‖φ'‖² to discretization order.
        let interior = 5..well.r_grid.len() - 5;
        for (g, d2) in well.radial_correction[interior.clone()]
            .iter()
            .zip(dn[interior].iter())
        {
            assert_abs_diff_eq!(-g, *d2, epsilon = 1e-9);
        }
        // g → 0 where the state is pure Hund case (c).
        let gg = *well.radial_correction.last().unwrap();
        assert!(gg.abs() < 1e-10, "asymptotic g = {gg}");

        // The correction peaks where the electronic state changes its
        // character, near the well bottom and the anti-crossing — so it is
        // strongest for the deepest vibrational states.
        let i_peak = well
            .radial_correction
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let i_bottom = well
            .values
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (r_peak, r_bottom) = (well.r_grid[i_peak], well.r_grid[i_bottom]);
        assert!(
            (r_peak - r_bottom).abs() < 120.0,
            "peak of -g at R = {r_peak}, well bottom at R = {r_bottom}"
        );
    }

    #[test]
    fn rotation_shifts_scale_as_the_centrifugal_term() {
        // 0u⁻: J = 2 well vs J = 0 well differ by (ħ²/2µR²)·ΔJ(J+1) at the
        // minimum.
        let c = constants();
        let grid = default_r_grid();
        let bh = BlockHamiltonian::new(
            block(Parity::Ungerade, 0, Some(Reflection::Minus)).unwrap(),
            &c,
        );
        let flags = HamiltonianFlags { retarded: true, rotation: true };
        let j0 = adiabatic_curves(&bh, 0, &grid, flags, ExecMode::auto()).unwrap();
        let j2 = adiabatic_curves(&bh, 2, &grid, flags, ExecMode::auto()).unwrap();
        let w0 = j0
            .iter()
            .filter(|cc| cc.asymptote_j == 1)
            .max_by(|a, b| a.well_depth_au().partial_cmp(&b.well_depth_au()).unwrap())
            .unwrap();
        let w2 = j2[w0.curve_index].clone();
        let i_min = w0
            .values
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let r_min = w0.r_grid[i_min];
        let centrifugal = 6.0 / (2.0 * c.reduced_mass_au * r_min * r_min);
        let diff = w2.values[i_min] - w0.values[i_min];
        assert_relative_eq!(diff, centrifugal, max_relative = 1e-3);
        assert!(w2.well_depth_au() < w0.well_depth_au());
    }

    #[test]
    fn grid_validation() {
        let c = constants();
        let bh = zero_u_plus(&c);
        let flags = HamiltonianFlags::default();
        assert!(adiabatic_curves(&bh, 1, &[100.0, 90.0, 120.0, 130.0, 140.0], flags, ExecMode::Sequential).is_err());
        // J = Omega = 0 is the minimum allowed value.
        assert!(bh.matrix(100.0, 0, HamiltonianFlags { retarded: true, rotation: true }).is_ok());
        // J < Omega rejected when rotation is requested.
        let bh2 = BlockHamiltonian::new(block(Parity::Ungerade, 2, None).unwrap(), &c);
        assert!(bh2.matrix(100.0, 1, HamiltonianFlags { retarded: true, rotation: true }).is_err());
    }

    #[test]
    fn default_grid_is_strictly_increasing_and_spans_the_wells() {
        let g = default_r_grid();
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(g[0] <= 100.0 && *g.last().unwrap() >= 2.0e4);
        let ghz = ghz_to_au(1.0);
        assert!(ghz > 0.0);
    }
}
