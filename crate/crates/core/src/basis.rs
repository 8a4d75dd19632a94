//! Two-atom electronic basis for one 2³S (L=0, S=1) and one 2³P (L=1, S=1)
//! atom, its symmetry operators, and the decomposition into (Ω, u/g, ±)
//! blocks spanned by Hund's case (a) adapted vectors.
//!
//! Phase conventions (frozen; only block dimensions, eigenvalues and
//! weights are contract-bearing):
//! * electronic inversion moves each atom's electron cloud to the other
//!   site, so site spins travel with it; the orbital parities of the two
//!   atomic terms contribute an overall −1:
//!   I|arr, m_l, σ_a, σ_b⟩ = −|arr̄, m_l, σ_b, σ_a⟩.
//! * reflection in a plane containing the molecular axis flips every
//!   projection; for integer spins the accumulated phase is (−1)^Ω:
//!   σ_v|arr, m_l, σ_a, σ_b⟩ = (−1)^{m_l+σ_a+σ_b}|arr, −m_l, −σ_a, −σ_b⟩.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Dimension of the full product space: 2 arrangements × 3 × 3 × 3.
pub const DIM: usize = 54;

/// Which site carries the P excitation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Arrangement {
    POnA,
    POnB,
}

impl Arrangement {
    pub fn flipped(self) -> Self {
        match self {
            Arrangement::POnA => Arrangement::POnB,
            Arrangement::POnB => Arrangement::POnA,
        }
    }
}

/// One product-basis vector. `m_l` is the orbital projection of the P
/// atom; `m_s_a` and `m_s_b` are the spin projections of the atoms at
/// sites A and B (each S = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisVector {
    pub arrangement: Arrangement,
    pub m_l: i32,
    pub m_s_a: i32,
    pub m_s_b: i32,
}

impl BasisVector {
    /// Projection of the total electronic angular momentum on the axis.
    pub fn omega(&self) -> i32 {
        self.m_l + self.m_s_a + self.m_s_b
    }
}

/// The 54 product vectors in canonical (arrangement, m_l, m_s_a, m_s_b)
/// lexicographic order, projections running −1, 0, +1.
pub fn product_basis() -> Vec<BasisVector> {
    let mut out = Vec::with_capacity(DIM);
    for arrangement in [Arrangement::POnA, Arrangement::POnB] {
        for m_l in -1..=1 {
            for m_s_a in -1..=1 {
                for m_s_b in -1..=1 {
                    out.push(BasisVector {
                        arrangement,
                        m_l,
                        m_s_a,
                        m_s_b,
                    });
                }
            }
        }
    }
    out
}

/// Index of a vector in the canonical ordering.
pub fn basis_index(v: &BasisVector) -> usize {
    let arr = match v.arrangement {
        Arrangement::POnA => 0,
        Arrangement::POnB => 1,
    };
    (arr * 27 + (v.m_l + 1) * 9 + (v.m_s_a + 1) * 3 + (v.m_s_b + 1)) as usize
}

// ---------------------------------------------------------------------------
// Angular momentum coupling.
// ---------------------------------------------------------------------------

fn factorial(n: i64) -> f64 {
    debug_assert!((0..=20).contains(&n));
    (1..=n).map(|k| k as f64).product()
}

/// Clebsch-Gordan coefficient ⟨j1 m1 j2 m2 | j m⟩ for integer angular
/// momenta (Racah's closed form; exact to rounding for the small j used
/// here, so no table lookup is needed).
pub fn clebsch_gordan(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    if m1 + m2 != m || j > j1 + j2 || j < (j1 - j2).abs() || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j
    {
        return 0.0;
    }
    let delta = factorial(j1 + j2 - j) * factorial(j1 - j2 + j) * factorial(-j1 + j2 + j)
        / factorial(j1 + j2 + j + 1);
    let pref = ((2 * j + 1) as f64
        * delta
        * factorial(j + m)
        * factorial(j - m)
        * factorial(j1 - m1)
        * factorial(j1 + m1)
        * factorial(j2 - m2)
        * factorial(j2 + m2))
    .sqrt();

    let k_min = 0.max(j2 - j - m1).max(j1 + m2 - j);
    let k_max = (j1 + j2 - j).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(j1 + j2 - j - k)
            * factorial(j1 - m1 - k)
            * factorial(j2 + m2 - k)
            * factorial(j - j2 + m1 + k)
            * factorial(j - j1 - m2 + k);
        sum += if k % 2 == 0 { 1.0 } else { -1.0 } / denom;
    }
    pref * sum
}

/// ⟨m±1|J±|m⟩ = √(j(j+1) − m(m±1)) with ħ = 1.
fn ladder(j: i32, m: i32, up: bool) -> f64 {
    let jm = (j * (j + 1)) as f64;
    let shift = if up { m * (m + 1) } else { m * (m - 1) };
    let under = jm - shift as f64;
    if under <= 0.0 {
        0.0
    } else {
        under.sqrt()
    }
}

// ---------------------------------------------------------------------------
// Operators on the 54-dimensional product space.
// ---------------------------------------------------------------------------

/// Electronic inversion through the molecular midpoint.
pub fn inversion_matrix() -> DMatrix<f64> {
    let mut m = DMatrix::zeros(DIM, DIM);
    for v in product_basis() {
        let image = BasisVector {
            arrangement: v.arrangement.flipped(),
            m_l: v.m_l,
            m_s_a: v.m_s_b,
            m_s_b: v.m_s_a,
        };
        m[(basis_index(&image), basis_index(&v))] = -1.0;
    }
    m
}

/// Reflection in a plane containing the molecular axis.
pub fn reflection_matrix() -> DMatrix<f64> {
    let mut m = DMatrix::zeros(DIM, DIM);
    for v in product_basis() {
        let image = BasisVector {
            arrangement: v.arrangement,
            m_l: -v.m_l,
            m_s_a: -v.m_s_a,
            m_s_b: -v.m_s_b,
        };
        let phase = if v.omega() % 2 == 0 { 1.0 } else { -1.0 };
        m[(basis_index(&image), basis_index(&v))] = phase;
    }
    m
}

/// Resonant transfer of the P excitation between the sites (spins stay
/// attached to their sites).
pub fn excitation_exchange_matrix() -> DMatrix<f64> {
    let mut m = DMatrix::zeros(DIM, DIM);
    for v in product_basis() {
        let image = BasisVector {
            arrangement: v.arrangement.flipped(),
            ..v
        };
        m[(basis_index(&image), basis_index(&v))] = 1.0;
    }
    m
}

/// Sum of the single-atom fine-structure operators αL·S + β(L·S)².
/// Only the P atom contributes (the S atom has L = 0).
pub fn fs_operator(alpha: f64, beta: f64) -> DMatrix<f64> {
    // 9×9 L·S on the P atom's (m_l, σ_p) pair, index = (m_l+1)*3 + (σ_p+1).
    let mut ls = DMatrix::zeros(9, 9);
    for m_l in -1..=1i32 {
        for s in -1..=1i32 {
            let col = ((m_l + 1) * 3 + (s + 1)) as usize;
            ls[(col, col)] += (m_l * s) as f64;
            if m_l < 1 && s > -1 {
                let row = ((m_l + 2) * 3 + s) as usize;
                ls[(row, col)] += 0.5 * ladder(1, m_l, true) * ladder(1, s, false);
            }
            if m_l > -1 && s < 1 {
                let row = ((m_l) * 3 + (s + 2)) as usize;
                ls[(row, col)] += 0.5 * ladder(1, m_l, false) * ladder(1, s, true);
            }
        }
    }
    let h1 = alpha * &ls + beta * (&ls * &ls);

    let mut m = DMatrix::zeros(DIM, DIM);
    for v in product_basis() {
        let (sigma_p, spectator) = match v.arrangement {
            Arrangement::POnA => (v.m_s_a, v.m_s_b),
            Arrangement::POnB => (v.m_s_b, v.m_s_a),
        };
        let col9 = ((v.m_l + 1) * 3 + (sigma_p + 1)) as usize;
        for m_l2 in -1..=1i32 {
            for sigma2 in -1..=1i32 {
                let row9 = ((m_l2 + 1) * 3 + (sigma2 + 1)) as usize;
                let val = h1[(row9, col9)];
                if val == 0.0 {
                    continue;
                }
                let image = match v.arrangement {
                    Arrangement::POnA => BasisVector {
                        arrangement: v.arrangement,
                        m_l: m_l2,
                        m_s_a: sigma2,
                        m_s_b: spectator,
                    },
                    Arrangement::POnB => BasisVector {
                        arrangement: v.arrangement,
                        m_l: m_l2,
                        m_s_a: spectator,
                        m_s_b: sigma2,
                    },
                };
                m[(basis_index(&image), basis_index(&v))] += val;
            }
        }
    }
    m
}

/// Molecular L_z (only the P atom's orbital projection contributes).
pub fn l_z_matrix() -> DMatrix<f64> {
    DMatrix::from_fn(DIM, DIM, |r, c| {
        if r == c {
            product_basis()[r].m_l as f64
        } else {
            0.0
        }
    })
}

/// Molecular S_z = S_zA + S_zB.
pub fn s_z_matrix() -> DMatrix<f64> {
    DMatrix::from_fn(DIM, DIM, |r, c| {
        if r == c {
            let v = product_basis()[r];
            (v.m_s_a + v.m_s_b) as f64
        } else {
            0.0
        }
    })
}

/// Molecular L± (acts on the P atom's m_l).
pub fn l_ladder_matrix(up: bool) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(DIM, DIM);
    for v in product_basis() {
        let target = v.m_l + if up { 1 } else { -1 };
        if target.abs() > 1 {
            continue;
        }
        let image = BasisVector { m_l: target, ..v };
        m[(basis_index(&image), basis_index(&v))] = ladder(1, v.m_l, up);
    }
    m
}

/// Molecular S± = S_A± + S_B±.
pub fn s_ladder_matrix(up: bool) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(DIM, DIM);
    let step = if up { 1 } else { -1 };
    for v in product_basis() {
        if (v.m_s_a + step).abs() <= 1 {
            let image = BasisVector {
                m_s_a: v.m_s_a + step,
                ..v
            };
            m[(basis_index(&image), basis_index(&v))] += ladder(1, v.m_s_a, up);
        }
        if (v.m_s_b + step).abs() <= 1 {
            let image = BasisVector {
                m_s_b: v.m_s_b + step,
                ..v
            };
            m[(basis_index(&image), basis_index(&v))] += ladder(1, v.m_s_b, up);
        }
    }
    m
}

/// Total molecular spin squared S² = S_z² + (S₊S₋ + S₋S₊)/2.
pub fn s_squared_matrix() -> DMatrix<f64> {
    let sz = s_z_matrix();
    let sp = s_ladder_matrix(true);
    let sm = s_ladder_matrix(false);
    &sz * &sz + 0.5 * (&sp * &sm + &sm * &sp)
}

/// Total molecular L² — constant 2ħ²·identity since one atom is always
/// in L = 0 and every L_A·L_B term annihilates the state.
pub fn l_squared_matrix() -> DMatrix<f64> {
    DMatrix::identity(DIM, DIM) * 2.0
}

/// Ω operator L_z + S_z.
pub fn omega_matrix() -> DMatrix<f64> {
    l_z_matrix() + s_z_matrix()
}

// ---------------------------------------------------------------------------
// Hund's case (a) vectors and the symmetry blocks.
// ---------------------------------------------------------------------------

/// Electronic inversion eigenvalue label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Parity {
    Ungerade,
    Gerade,
}

impl Parity {
    /// Inversion eigenvalue ω: −1 for ungerade, +1 for gerade.
    pub fn omega_sign(self) -> f64 {
        match self {
            Parity::Ungerade => -1.0,
            Parity::Gerade => 1.0,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Parity::Ungerade => "u",
            Parity::Gerade => "g",
        }
    }
}

/// Reflection eigenvalue label, defined only for Ω = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Reflection {
    Plus,
    Minus,
}

impl Reflection {
    pub fn sign(self) -> f64 {
        match self {
            Reflection::Plus => 1.0,
            Reflection::Minus => -1.0,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Reflection::Plus => "+",
            Reflection::Minus => "-",
        }
    }
}

/// Hund's case (a) term label |²ˢ⁺¹Λ⟩ (parity carried by the block).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct HundALabel {
    /// Total molecular spin S ∈ {0, 1, 2}.
    pub s: u32,
    /// |Λ| ∈ {0, 1}.
    pub lambda_abs: u32,
}

impl std::fmt::Display for HundALabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let term = if self.lambda_abs == 0 { "Sigma" } else { "Pi" };
        write!(f, "{}{}", 2 * self.s + 1, term)
    }
}

/// The normalized Hund's case (a) vector with molecular spin (S, M_S),
/// orbital projection Λ and inversion parity ω, expanded over the
/// product basis:
///   (1/√2) (|P on B: Λ⟩ − ω(−1)^S |P on A: Λ⟩) ⊗ |S, M_S⟩.
pub fn hund_a_vector(parity: Parity, lambda: i32, s: u32, m_s: i32) -> DVector<f64> {
    assert!(lambda.abs() <= 1 && (s as i32) <= 2 && m_s.abs() <= s as i32);
    let omega_sign = parity.omega_sign();
    let exchange_sign = -omega_sign * if s.is_multiple_of(2) { 1.0 } else { -1.0 };
    let norm = 1.0 / 2.0_f64.sqrt();
    let mut out = DVector::zeros(DIM);
    for sigma_a in -1..=1 {
        for sigma_b in -1..=1 {
            let c = clebsch_gordan(1, sigma_a as i64, 1, sigma_b as i64, s as i64, m_s as i64);
            if c == 0.0 {
                continue;
            }
            let on_b = BasisVector {
                arrangement: Arrangement::POnB,
                m_l: lambda,
                m_s_a: sigma_a,
                m_s_b: sigma_b,
            };
            let on_a = BasisVector {
                arrangement: Arrangement::POnA,
                m_l: lambda,
                m_s_a: sigma_a,
                m_s_b: sigma_b,
            };
            out[basis_index(&on_b)] += norm * c;
            out[basis_index(&on_a)] += norm * exchange_sign * c;
        }
    }
    out
}

/// All 27 Hund's case (a) states of one parity in canonical order
/// (S ascending, then Λ ∈ {0, +1, −1}, then M_S ascending).
fn hund_a_states(parity: Parity) -> Vec<(i32, u32, i32, DVector<f64>)> {
    let mut out = Vec::with_capacity(27);
    for s in 0..=2u32 {
        for lambda in [0, 1, -1] {
            for m_s in -(s as i32)..=(s as i32) {
                out.push((lambda, s, m_s, hund_a_vector(parity, lambda, s, m_s)));
            }
        }
    }
    out
}

/// Split the product space into its ungerade and gerade halves; columns
/// are Hund's case (a) vectors in canonical order.
pub fn symmetrize() -> (DMatrix<f64>, DMatrix<f64>) {
    let build = |parity| {
        let states = hund_a_states(parity);
        let mut m = DMatrix::zeros(DIM, states.len());
        for (k, (_, _, _, v)) in states.iter().enumerate() {
            m.set_column(k, v);
        }
        m
    };
    (build(Parity::Ungerade), build(Parity::Gerade))
}

/// One (Ω, u/g, ±) symmetry block: an orthonormal basis over the product
/// space together with the Hund's case (a) label of each basis vector.
#[derive(Debug, Clone)]
pub struct SymmetryBlock {
    pub parity: Parity,
    pub omega: u32,
    pub reflection: Option<Reflection>,
    /// 54 × dim matrix; columns are the block basis vectors.
    pub vectors: DMatrix<f64>,
    /// Hund's case (a) label of each column.
    pub labels: Vec<HundALabel>,
}

impl SymmetryBlock {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    /// Block name like `0u+`, `1u`, `2u`.
    pub fn name(&self) -> String {
        let refl = self.reflection.map(|r| r.suffix()).unwrap_or("");
        format!("{}{}{}", self.omega, self.parity.suffix(), refl)
    }

    /// Project a 54×54 operator onto the block basis.
    pub fn project(&self, op: &DMatrix<f64>) -> DMatrix<f64> {
        self.vectors.transpose() * op * &self.vectors
    }
}

/// Build the symmetry block for (parity, Ω, reflection). The reflection
/// label must be given exactly when Ω = 0. For Ω ≠ 0 the +Ω representative
/// of the degenerate ±Ω pair is returned.
pub fn block(parity: Parity, omega: u32, reflection: Option<Reflection>) -> Result<SymmetryBlock> {
    match (omega, reflection) {
        (0, None) => {
            return Err(Error::Usage(
                "a reflection label (+/-) is required for omega = 0".into(),
            ))
        }
        (o, Some(_)) if o != 0 => {
            return Err(Error::Usage(format!(
                "reflection symmetry labels a block only for omega = 0, got omega = {o}"
            )))
        }
        _ => {}
    }
    if omega > 3 {
        return Err(Error::Usage(format!("omega must be at most 3, got {omega}")));
    }

    let states = hund_a_states(parity);
    let mut vectors: Vec<DVector<f64>> = Vec::new();
    let mut labels = Vec::new();

    if omega > 0 {
        for (lambda, s, m_s, v) in &states {
            if lambda + m_s == omega as i32 {
                vectors.push(v.clone());
                labels.push(HundALabel {
                    s: *s,
                    lambda_abs: lambda.unsigned_abs(),
                });
            }
        }
    } else {
        // Ω = 0: reflection-adapt the candidates and keep one orthonormal
        // representative per independent direction.
        let refl = reflection.unwrap();
        let sigma_v = reflection_matrix();
        for (lambda, s, m_s, v) in &states {
            if lambda + m_s != 0 {
                continue;
            }
            let mut w = v + refl.sign() * (&sigma_v * v);
            for prev in &vectors {
                let overlap = prev.dot(&w);
                w -= overlap * prev;
            }
            let norm = w.norm();
            if norm > 1e-9 {
                vectors.push(w / norm);
                labels.push(HundALabel {
                    s: *s,
                    lambda_abs: lambda.unsigned_abs(),
                });
            }
        }
    }

    let mut m = DMatrix::zeros(DIM, vectors.len());
    for (k, v) in vectors.iter().enumerate() {
        m.set_column(k, v);
    }
    Ok(SymmetryBlock {
        parity,
        omega,
        reflection,
        vectors: m,
        labels,
    })
}

/// The five distinct ungerade blocks: 0u⁺, 0u⁻, 1u, 2u, 3u.
pub fn ungerade_blocks() -> Vec<SymmetryBlock> {
    vec![
        block(Parity::Ungerade, 0, Some(Reflection::Plus)).unwrap(),
        block(Parity::Ungerade, 0, Some(Reflection::Minus)).unwrap(),
        block(Parity::Ungerade, 1, None).unwrap(),
        block(Parity::Ungerade, 2, None).unwrap(),
        block(Parity::Ungerade, 3, None).unwrap(),
    ]
}

/// Squared projections of a normalized block-coordinate eigenvector onto
/// the Hund's case (a) labels present in the block. Weights are
/// non-negative and sum to one.
pub fn hund_a_decomposition(
    block: &SymmetryBlock,
    eigenvector: &DVector<f64>,
) -> Vec<(HundALabel, f64)> {
    assert_eq!(eigenvector.len(), block.dim());
    let mut seen: Vec<(HundALabel, f64)> = Vec::new();
    for (i, label) in block.labels.iter().enumerate() {
        let w = eigenvector[i] * eigenvector[i];
        if let Some(entry) = seen.iter_mut().find(|(l, _)| l == label) {
            entry.1 += w;
        } else {
            seen.push((*label, w));
        }
    }
    seen
}
