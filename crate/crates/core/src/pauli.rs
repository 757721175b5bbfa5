//! Symplectic Pauli strings without phases.
//!
//! A string is a pair of bit vectors `(x, z)`; composition is XOR. Phase
//! information only ever surfaces through the sign-valued functions
//! [`commutation_sign`], [`region_sign`] and [`y_phase`].

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// `±1` valued result of a commutation or phase computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(odd: bool) -> Sign {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.to_i8())
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_parity(self.is_minus() ^ rhs.is_minus())
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        Sign::from_parity(!self.is_minus())
    }
}

/// A subset of the qubits (edges) of a code, used as a subsystem `A`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeSet {
    n: usize,
    words: Vec<u64>,
}

impl EdgeSet {
    pub fn empty(n: usize) -> Self {
        EdgeSet {
            n,
            words: vec![0; words_for(n)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for e in 0..n {
            s.insert(e);
        }
        s
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut s = Self::empty(n);
        for e in edges {
            if e >= n {
                return Err(invalid("edge index out of range"));
            }
            s.insert(e);
        }
        Ok(s)
    }

    pub fn len_qubits(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, e: usize) {
        self.words[e / WORD] |= 1 << (e % WORD);
    }

    pub fn contains(&self, e: usize) -> bool {
        e < self.n && self.words[e / WORD] >> (e % WORD) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&e| self.contains(e))
    }

    pub fn complement(&self) -> Self {
        let mut out = Self::empty(self.n);
        for e in 0..self.n {
            if !self.contains(e) {
                out.insert(e);
            }
        }
        out
    }

    pub fn union(&self, other: &EdgeSet) -> Self {
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        EdgeSet { n: self.n, words }
    }

    pub fn intersects(&self, other: &EdgeSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// The set as a single word; only valid for codes with at most 64 qubits.
    pub fn as_mask(&self) -> u64 {
        debug_assert!(self.n <= WORD);
        self.words.first().copied().unwrap_or(0)
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

/// A Pauli operator on `n` qubits, up to phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString {
            n,
            x: vec![0; words_for(n)],
            z: vec![0; words_for(n)],
        }
    }

    /// Product of `X` on the given qubits.
    pub fn x_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(n);
        for q in qubits {
            p.x[q / WORD] ^= 1 << (q % WORD);
        }
        p
    }

    /// Product of `Z` on the given qubits.
    pub fn z_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(n);
        for q in qubits {
            p.z[q / WORD] ^= 1 << (q % WORD);
        }
        p
    }

    /// Builds a string from single-word masks (codes with at most 64 qubits).
    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        let mut p = Self::identity(n);
        if n > 0 {
            p.x[0] = x;
            p.z[0] = z;
        }
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bit(&self, q: usize) -> bool {
        self.x[q / WORD] >> (q % WORD) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        self.z[q / WORD] >> (q % WORD) & 1 == 1
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Weight restricted to the subsystem `region`.
    pub fn weight_in(&self, region: &EdgeSet) -> Result<usize> {
        check_len(self.n, region.n)?;
        Ok(self
            .x
            .iter()
            .zip(&self.z)
            .zip(region.words())
            .map(|((a, b), r)| ((a | b) & r).count_ones() as usize)
            .sum())
    }

    /// Operator product, ignoring the phase.
    pub fn compose(&self, other: &PauliString) -> Result<PauliString> {
        check_len(self.n, other.n)?;
        Ok(PauliString {
            n: self.n,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// Restriction to a subsystem (identity outside it).
    pub fn restrict(&self, region: &EdgeSet) -> Result<PauliString> {
        check_len(self.n, region.n)?;
        Ok(PauliString {
            n: self.n,
            x: self
                .x
                .iter()
                .zip(region.words())
                .map(|(a, r)| a & r)
                .collect(),
            z: self
                .z
                .iter()
                .zip(region.words())
                .map(|(a, r)| a & r)
                .collect(),
        })
    }
}

fn check_len(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left, right })
    }
}

fn symplectic_parity(g: &PauliString, h: &PauliString, region: Option<&EdgeSet>) -> bool {
    let mut parity = 0u32;
    for w in 0..g.x.len() {
        let mut overlap = (g.x[w] & h.z[w]) ^ (g.z[w] & h.x[w]);
        if let Some(r) = region {
            overlap &= r.words[w];
        }
        parity ^= overlap.count_ones() & 1;
    }
    parity == 1
}

/// `+1` if `g` and `h` commute, `-1` if they anticommute.
pub fn commutation_sign(g: &PauliString, h: &PauliString) -> Result<Sign> {
    check_len(g.n, h.n)?;
    Ok(Sign::from_parity(symplectic_parity(g, h, None)))
}

/// Commutation sign of the restrictions `g|_A` and `h|_A`.
pub fn region_sign(g: &PauliString, h: &PauliString, region: &EdgeSet) -> Result<Sign> {
    check_len(g.n, h.n)?;
    check_len(g.n, region.n)?;
    Ok(Sign::from_parity(symplectic_parity(g, h, Some(region))))
}

/// `(-1)^{N_Y}` with `N_Y` the number of `Y` factors of `g` inside `region`.
///
/// This is the sign a Pauli string picks up under partial transposition of
/// `region`.
pub fn y_phase(g: &PauliString, region: &EdgeSet) -> Result<Sign> {
    check_len(g.n, region.n)?;
    let mut parity = 0u32;
    for w in 0..g.x.len() {
        parity ^= (g.x[w] & g.z[w] & region.words[w]).count_ones() & 1;
    }
    Ok(Sign::from_parity(parity == 1))
}
