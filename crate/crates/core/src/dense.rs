//! Brute-force density matrices for the `L = 2` code.
//!
//! Basis index bit `q` is the `Z` eigenvalue of code qubit (edge) `q`; the two
//! reference qubits, when present, sit at bits `N` and `N + 1`. Every state
//! reachable here is real in this basis, so matrices are stored as `f64`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::code::{Cycle, LoopKind, ToricCode};
use crate::error::{invalid, Error, Result};
use crate::model::ErrorModel;
use crate::pauli::{EdgeSet, PauliString};

/// Largest code the dense engine accepts (qubits, excluding references).
pub const MAX_DENSE_QUBITS: usize = 8;

/// Initial code state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialState {
    /// Uniform mixture over the four-dimensional code space.
    MaxMixedLogical,
    /// Code space maximally entangled with two reference qubits.
    BellWithReference,
    /// The code state with `ḡ_{z,l₁} = ḡ_{z,l₂} = +1`.
    GroundState,
}

/// A real density matrix on the code qubits and optional references.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    code_qubits: usize,
    reference_qubits: usize,
    matrix: DMatrix<f64>,
}

/// `(x, z)` masks of a Pauli on up to 64 qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Masks {
    x: usize,
    z: usize,
}

impl Masks {
    fn of(p: &PauliString) -> Masks {
        Masks {
            x: p.x_words()[0] as usize,
            z: p.z_words()[0] as usize,
        }
    }

    fn with_reference(self, bit: usize, x: bool, z: bool) -> Masks {
        Masks {
            x: self.x | (usize::from(x) << bit),
            z: self.z | (usize::from(z) << bit),
        }
    }
}

fn parity(v: usize) -> bool {
    v.count_ones() & 1 == 1
}

/// `P M` for `P = X^x Z^z` (no phase).
fn left_mul(m: &DMatrix<f64>, p: Masks) -> DMatrix<f64> {
    let dim = m.nrows();
    DMatrix::from_fn(dim, dim, |i, j| {
        let k = i ^ p.x;
        let v = m[(k, j)];
        if parity(k & p.z) {
            -v
        } else {
            v
        }
    })
}

/// `P M P†`.
fn conjugate(m: &DMatrix<f64>, p: Masks) -> DMatrix<f64> {
    let dim = m.nrows();
    DMatrix::from_fn(dim, dim, |i, j| {
        let (a, b) = (i ^ p.x, j ^ p.x);
        let v = m[(a, b)];
        if parity(a & p.z) ^ parity(b & p.z) {
            -v
        } else {
            v
        }
    })
}

impl DenseState {
    pub fn new(code: &ToricCode, variant: InitialState) -> Result<Self> {
        let n = code.num_qubits();
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Capacity {
                what: "dense code qubits",
                needed: n as u64,
                limit: MAX_DENSE_QUBITS as u64,
            });
        }
        let refs = if variant == InitialState::BellWithReference {
            2
        } else {
            0
        };
        let dim = 1usize << (n + refs);
        let mut stabilizers: Vec<Masks> = code
            .vertex_stabilizers()
            .iter()
            .chain(code.plaquette_stabilizers())
            .map(Masks::of)
            .collect();
        match variant {
            InitialState::MaxMixedLogical => {}
            InitialState::GroundState => {
                for cycle in [Cycle::L1, Cycle::L2] {
                    stabilizers.push(Masks::of(&code.logical(LoopKind::Z, cycle)));
                }
            }
            InitialState::BellWithReference => {
                for (k, cycle) in [Cycle::L1, Cycle::L2].into_iter().enumerate() {
                    let z = Masks::of(&code.logical(LoopKind::Z, cycle));
                    let x = Masks::of(&code.logical(LoopKind::X, cycle));
                    stabilizers.push(z.with_reference(n + k, false, true));
                    stabilizers.push(x.with_reference(n + k, true, false));
                }
            }
        }
        let mut matrix = DMatrix::<f64>::identity(dim, dim);
        for s in stabilizers {
            let sm = left_mul(&matrix, s);
            matrix = (matrix + sm) * 0.5;
        }
        let trace = matrix.trace();
        matrix /= trace;
        Ok(DenseState {
            code_qubits: n,
            reference_qubits: refs,
            matrix,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn code_qubits(&self) -> usize {
        self.code_qubits
    }

    pub fn reference_qubits(&self) -> usize {
        self.reference_qubits
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Largest `|ρ - ρᵀ|` entry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..i {
                worst = worst.max(libm::fabs(self.matrix[(i, j)] - self.matrix[(j, i)]));
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        symmetric_spectrum(&self.matrix)
    }

    /// Checks Hermiticity, unit trace and positivity at the stated tolerances.
    pub fn validate(&self) -> Result<()> {
        if self.asymmetry() > 1e-12 {
            return Err(invalid("density matrix is not symmetric"));
        }
        if libm::fabs(self.trace() - 1.0) > 1e-12 {
            return Err(invalid("density matrix trace differs from 1"));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(invalid("density matrix has a negative eigenvalue"));
        }
        Ok(())
    }

    /// `P ρ P†` for a Pauli on the code qubits.
    pub fn conjugated(&self, p: &PauliString) -> Result<DenseState> {
        if p.num_qubits() != self.code_qubits {
            return Err(Error::LengthMismatch {
                left: p.num_qubits(),
                right: self.code_qubits,
            });
        }
        Ok(DenseState {
            matrix: conjugate(&self.matrix, Masks::of(p)),
            ..self.clone()
        })
    }

    /// Applies the bit-flip then the phase channel to every code qubit.
    pub fn apply_channel(&self, model: &ErrorModel) -> DenseState {
        let mut m = self.matrix.clone();
        let (px, pz) = (model.p_x(), model.p_z());
        for q in 0..self.code_qubits {
            if px > 0.0 {
                let flipped = conjugate(&m, Masks { x: 1 << q, z: 0 });
                m = m * (1.0 - px) + flipped * px;
            }
        }
        for q in 0..self.code_qubits {
            if pz > 0.0 {
                let bit = 1usize << q;
                let dim = m.nrows();
                for i in 0..dim {
                    for j in 0..dim {
                        if (i ^ j) & bit != 0 {
                            m[(i, j)] *= 1.0 - 2.0 * pz;
                        }
                    }
                }
            }
        }
        DenseState {
            matrix: m,
            ..self.clone()
        }
    }

    /// Applies the channel to a reference qubit; always rejected.
    pub fn apply_channel_to_reference(&self, _model: &ErrorModel) -> Result<DenseState> {
        Err(invalid(
            "error channels act on code qubits only, not on references",
        ))
    }

    /// Traces out the reference qubits.
    pub fn code_marginal(&self) -> DenseState {
        let d = 1usize << self.code_qubits;
        let copies = 1usize << self.reference_qubits;
        let matrix = DMatrix::from_fn(d, d, |i, j| {
            (0..copies)
                .map(|r| self.matrix[(i + r * d, j + r * d)])
                .sum::<f64>()
        });
        DenseState {
            code_qubits: self.code_qubits,
            reference_qubits: 0,
            matrix,
        }
    }

    /// Partial transpose on the code qubits in `region`.
    pub fn partial_transpose(&self, region: &EdgeSet) -> Result<DenseState> {
        if region.len_qubits() != self.code_qubits {
            return Err(Error::LengthMismatch {
                left: region.len_qubits(),
                right: self.code_qubits,
            });
        }
        let a = region.as_mask() as usize;
        let keep = !a;
        let dim = self.dim();
        let matrix = DMatrix::from_fn(dim, dim, |i, j| {
            self.matrix[((i & keep) | (j & a), (j & keep) | (i & a))]
        });
        Ok(DenseState {
            matrix,
            ..self.clone()
        })
    }
}

/// Eigenvalues of a real symmetric matrix.
///
/// The implicit QR iteration occasionally fails to converge on the highly
/// degenerate, block-sparse projectors built here and reports a non-finite
/// eigenvalue; in that case the decomposition is redone on a shifted matrix.
pub fn symmetric_spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    let trace = m.trace();
    let direct: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    let sum: f64 = direct.iter().sum();
    if direct.iter().all(|l| l.is_finite()) && libm::fabs(sum - trace) < 1e-9 {
        return direct;
    }
    let dim = m.nrows();
    let shift = 1.0 + m.abs().max();
    let shifted = m + DMatrix::<f64>::identity(dim, dim) * shift;
    SymmetricEigen::new(shifted)
        .eigenvalues
        .iter()
        .map(|l| l - shift)
        .collect()
}

fn power_trace(eigenvalues: &[f64], n: u32) -> f64 {
    eigenvalues
        .iter()
        .map(|&l| libm::pow(l, f64::from(n)))
        .sum()
}

fn check_index(n: u32) -> Result<()> {
    if !(2..=6).contains(&n) {
        return Err(invalid("Rényi index must be in 2..=6"));
    }
    Ok(())
}

/// `tr ρⁿ` from the spectrum.
pub fn renyi_moment(state: &DenseState, n: u32) -> Result<f64> {
    check_index(n)?;
    Ok(power_trace(&state.eigenvalues(), n))
}

/// Rényi negativity of even order `k = 2n`,
/// `E^{(k)} = ln[tr (ρ^{T_A})^k / tr ρ^k] / (2 - k)`.
pub fn renyi_negativity(state: &DenseState, region: &EdgeSet, order: u32) -> Result<f64> {
    if order % 2 == 1 || order < 4 {
        return Err(invalid("negativity order must be even and at least 4"));
    }
    check_region(region)?;
    let pt = state.partial_transpose(region)?;
    let num = power_trace(&pt.eigenvalues(), order);
    let den = power_trace(&state.eigenvalues(), order);
    Ok(libm::log(num / den) / (2.0 - f64::from(order)))
}

/// `ln ‖ρ^{T_A}‖₁`.
pub fn log_negativity(state: &DenseState, region: &EdgeSet) -> Result<f64> {
    check_region(region)?;
    let pt = state.partial_transpose(region)?;
    Ok(libm::log(
        pt.eigenvalues().iter().map(|l| libm::fabs(*l)).sum::<f64>(),
    ))
}

/// Rényi entropy `S_α(A) = ln tr ρ_A^α / (1 - α)` of the code qubits in
/// `region` (any real `α > 0`, `α ≠ 1`).
pub fn renyi_entropy(state: &DenseState, region: &EdgeSet, alpha: f64) -> Result<f64> {
    check_region(region)?;
    let a = region.as_mask() as usize;
    let qubits: Vec<usize> = (0..state.code_qubits).filter(|q| a >> q & 1 == 1).collect();
    let rest: Vec<usize> = (0..state.code_qubits + state.reference_qubits)
        .filter(|q| a >> q & 1 == 0)
        .collect();
    let da = 1usize << qubits.len();
    let spread = |bits: usize, positions: &[usize]| -> usize {
        positions
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &q)| acc | ((bits >> k & 1) << q))
    };
    let reduced = DMatrix::<f64>::from_fn(da, da, |i, j| {
        let (ii, jj) = (spread(i, &qubits), spread(j, &qubits));
        (0..1usize << rest.len())
            .map(|r| {
                let rr = spread(r, &rest);
                state.matrix[(ii | rr, jj | rr)]
            })
            .sum::<f64>()
    });
    let eig = symmetric_spectrum(&reduced);
    let s: f64 = eig
        .iter()
        .filter(|&&l| l > 1e-14)
        .map(|&l| libm::pow(l, alpha))
        .sum();
    Ok(libm::log(s) / (1.0 - alpha))
}

fn check_region(region: &EdgeSet) -> Result<()> {
    if region.is_empty() || region.count() == region.len_qubits() {
        return Err(invalid("region must be a proper non-empty subset"));
    }
    Ok(())
}

/// `D^{(n)} = ln[tr ρ ρ_mⁿ⁻¹ / tr ρⁿ] / (1 - n)`; `+∞` when the overlap vanishes.
pub fn renyi_relative_entropy(state: &DenseState, excited: &DenseState, n: u32) -> Result<f64> {
    check_index(n)?;
    if state.dim() != excited.dim() {
        return Err(Error::LengthMismatch {
            left: state.dim(),
            right: excited.dim(),
        });
    }
    let mut power = excited.matrix.clone();
    for _ in 2..n {
        power = &power * &excited.matrix;
    }
    let overlap = (&state.matrix * &power).trace();
    let moment = renyi_moment(state, n)?;
    if overlap <= 1e-13 * moment {
        return Ok(f64::INFINITY);
    }
    Ok(libm::log(overlap / moment) / (1.0 - f64::from(n)))
}

/// `I_c^{(n)} = ln[tr ρ_RQⁿ / tr ρ_Qⁿ] / (n - 1)`.
pub fn renyi_coherent_info(state_rq: &DenseState, n: u32) -> Result<f64> {
    check_index(n)?;
    if state_rq.reference_qubits == 0 {
        return Err(invalid("coherent information needs the reference qubits"));
    }
    let joint = renyi_moment(state_rq, n)?;
    let marginal = renyi_moment(&state_rq.code_marginal(), n)?;
    Ok(libm::log(joint / marginal) / (f64::from(n) - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::plaquette_block;

    fn code() -> ToricCode {
        ToricCode::new(2).unwrap()
    }

    #[test]
    fn rejects_larger_codes() {
        let big = ToricCode::new(3).unwrap();
        assert!(matches!(
            DenseState::new(&big, InitialState::MaxMixedLogical),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn initial_purities() {
        let c = code();
        let mixed = DenseState::new(&c, InitialState::MaxMixedLogical).unwrap();
        mixed.validate().unwrap();
        assert!((renyi_moment(&mixed, 2).unwrap() - 0.25).abs() < 1e-12);
        let rank = mixed.eigenvalues().iter().filter(|&&l| l > 1e-9).count();
        assert_eq!(rank, 4);
        for n in 2..=5 {
            let expect = libm::pow(4.0, 1.0 - f64::from(n));
            assert!((renyi_moment(&mixed, n).unwrap() - expect).abs() < 1e-12);
        }
        let bell = DenseState::new(&c, InitialState::BellWithReference).unwrap();
        assert_eq!(bell.dim(), 1024);
        assert!((renyi_moment(&bell, 2).unwrap() - 1.0).abs() < 1e-12);
        let ground = DenseState::new(&c, InitialState::GroundState).unwrap();
        assert!((renyi_moment(&ground, 3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn initial_state_commutes_with_stabilizers() {
        let c = code();
        let rho = DenseState::new(&c, InitialState::MaxMixedLogical).unwrap();
        for s in c
            .vertex_stabilizers()
            .iter()
            .chain(c.plaquette_stabilizers())
        {
            // S ρ = ρ S  <=>  S ρ S = ρ
            let diff = (conjugate(rho.matrix(), Masks::of(s)) - rho.matrix())
                .abs()
                .max();
            assert!(diff < 1e-15);
            // ρ lies in the +1 eigenspace
            let sr = left_mul(rho.matrix(), Masks::of(s));
            assert!((sr - rho.matrix()).abs().max() < 1e-15);
        }
    }

    #[test]
    fn channel_limits() {
        let c = code();
        let rho = DenseState::new(&c, InitialState::MaxMixedLogical).unwrap();
        let same = rho.apply_channel(&ErrorModel::symmetric(0.0).unwrap());
        assert_eq!(same, rho);
        let dead = rho.apply_channel(&ErrorModel::symmetric(0.5).unwrap());
        let uniform = DMatrix::<f64>::identity(256, 256) / 256.0;
        assert!((dead.matrix() - uniform).abs().max() < 1e-15);
        assert!((renyi_moment(&dead, 2).unwrap() - 0.00390625).abs() < 1e-14);
        assert!(rho
            .apply_channel_to_reference(&ErrorModel::symmetric(0.1).unwrap())
            .is_err());
    }

    #[test]
    fn partial_transpose_involution() {
        let c = code();
        let rho = DenseState::new(&c, InitialState::GroundState)
            .unwrap()
            .apply_channel(&ErrorModel::new(0.1, 0.2).unwrap());
        let a = EdgeSet::from_edges(8, [0, 4, 5]).unwrap();
        let pt = rho.partial_transpose(&a).unwrap();
        assert!((pt.trace() - 1.0).abs() < 1e-12);
        let back = pt.partial_transpose(&a).unwrap();
        assert!((back.matrix() - rho.matrix()).abs().max() < 1e-15);
    }

    #[test]
    fn pure_state_log_negativity_is_half_entropy() {
        let c = code();
        let rho = DenseState::new(&c, InitialState::GroundState).unwrap();
        let a = EdgeSet::from_edges(8, c.plaquette_boundary(0)).unwrap();
        let ln = log_negativity(&rho, &a).unwrap();
        let s_half = renyi_entropy(&rho, &a, 0.5).unwrap();
        assert!((ln - s_half).abs() < 1e-10, "{ln} vs {s_half}");
        assert!(ln > 0.1);
    }

    #[test]
    fn negativity_rejects_odd_order() {
        let c = code();
        let rho = DenseState::new(&c, InitialState::MaxMixedLogical).unwrap();
        let a = plaquette_block(&c, 0, 0, 1, 1).unwrap();
        assert!(renyi_negativity(&rho, &a, 3).is_err());
        assert!(renyi_negativity(&rho, &EdgeSet::empty(8), 4).is_err());
    }

    #[test]
    fn relative_entropy_limits() {
        let c = code();
        let rho0 = DenseState::new(&c, InitialState::MaxMixedLogical).unwrap();
        let w = c.string_operator(LoopKind::Z, 0, 3).unwrap();
        let excited0 = rho0.conjugated(&w).unwrap();
        let clean = ErrorModel::bit_flip(0.0).unwrap();
        let d = renyi_relative_entropy(
            &rho0.apply_channel(&clean),
            &excited0.apply_channel(&clean),
            2,
        )
        .unwrap();
        assert!(d.is_infinite());
        let dead = ErrorModel::bit_flip(0.5).unwrap();
        let d = renyi_relative_entropy(
            &rho0.apply_channel(&dead),
            &excited0.apply_channel(&dead),
            2,
        )
        .unwrap();
        assert!(d.abs() < 1e-12);
        assert!(renyi_relative_entropy(&rho0, &excited0, 1).is_err());
    }

    #[test]
    fn coherent_info_plateaus() {
        let c = code();
        let bell = DenseState::new(&c, InitialState::BellWithReference).unwrap();
        let ln2 = core::f64::consts::LN_2;
        let ic = |px: f64, pz: f64| {
            let rho = bell.apply_channel(&ErrorModel::new(px, pz).unwrap());
            renyi_coherent_info(&rho, 2).unwrap()
        };
        assert!((ic(0.0, 0.0) - 2.0 * ln2).abs() < 1e-10);
        assert!((ic(0.5, 0.5) + 2.0 * ln2).abs() < 1e-10);
        assert!(ic(0.5, 0.0).abs() < 1e-10);
    }
}
