//! Edge regions, their boundary constraints and Kitaev–Preskill tripartitions.
//!
//! When only loops of one kind carry a tension, the Rényi negativity of an
//! edge region `A` reduces to a set of parity constraints on the spins of
//! that kind: for every generator `f` of the *other* (free) loop group, the
//! product of `σ_iσ_j` over the bonds dual to the edges of `f ∩ A` must be
//! `+1`. Each constraint is a product of the spins at the odd-degree sites of
//! that bond set.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::code::{LoopKind, ToricCode};
use crate::error::{invalid, Result};
use crate::pauli::EdgeSet;

/// All edges of the plaquettes in the `rows × cols` block whose top-left
/// plaquette is `(r0, c0)` (wrapping).
pub fn plaquette_block(
    code: &ToricCode,
    r0: usize,
    c0: usize,
    rows: usize,
    cols: usize,
) -> Result<EdgeSet> {
    let l = code.size();
    if rows == 0 || cols == 0 || rows > l || cols > l {
        return Err(invalid(
            "plaquette block must be non-empty and fit the torus",
        ));
    }
    let mut set = EdgeSet::empty(code.num_qubits());
    for dr in 0..rows {
        for dc in 0..cols {
            let p = code.site((r0 + dr) as isize, (c0 + dc) as isize);
            for e in code.plaquette_boundary(p) {
                set.insert(e);
            }
        }
    }
    Ok(set)
}

/// All edges incident to the vertices of the `rows × cols` vertex block with
/// top-left vertex `(r0, c0)`.
pub fn star_block(
    code: &ToricCode,
    r0: usize,
    c0: usize,
    rows: usize,
    cols: usize,
) -> Result<EdgeSet> {
    let l = code.size();
    if rows == 0 || cols == 0 || rows > l || cols > l {
        return Err(invalid("vertex block must be non-empty and fit the torus"));
    }
    let mut set = EdgeSet::empty(code.num_qubits());
    for dr in 0..rows {
        for dc in 0..cols {
            let v = code.site((r0 + dr) as isize, (c0 + dc) as isize);
            for e in code.star(v) {
                set.insert(e);
            }
        }
    }
    Ok(set)
}

/// Edges of `outer` not in `inner`.
pub fn difference(outer: &EdgeSet, inner: &EdgeSet) -> EdgeSet {
    let mut out = EdgeSet::empty(outer.len_qubits());
    for e in outer.iter() {
        if !inner.contains(e) {
            out.insert(e);
        }
    }
    out
}

/// A product of spins that a pinned ensemble requires to equal `+1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParityCheck {
    pub sites: Vec<usize>,
}

/// Parity constraints on the spins of the `weighted` kind induced by region `A`.
///
/// Empty and duplicate constraints are dropped; the result is sorted.
pub fn parity_checks(
    code: &ToricCode,
    weighted: LoopKind,
    region: &EdgeSet,
) -> Result<Vec<ParityCheck>> {
    if region.len_qubits() != code.num_qubits() {
        return Err(invalid("region does not belong to this code"));
    }
    let free = code.stabilizers(weighted.other());
    let mut checks = Vec::new();
    let mut degree = vec![0u8; code.num_sites()];
    for f in free {
        let support = match weighted.other() {
            LoopKind::X => f.x_words(),
            LoopKind::Z => f.z_words(),
        };
        degree.iter_mut().for_each(|d| *d = 0);
        for e in region.iter() {
            if support[e / 64] >> (e % 64) & 1 == 1 {
                let (a, b) = code.edge_sites(weighted, e);
                degree[a] ^= 1;
                degree[b] ^= 1;
            }
        }
        let sites: Vec<usize> = (0..degree.len()).filter(|&s| degree[s] == 1).collect();
        if !sites.is_empty() {
            checks.push(ParityCheck { sites });
        }
    }
    checks.sort();
    checks.dedup();
    Ok(checks)
}

/// Sites touched by at least one constraint.
pub fn boundary_sites(checks: &[ParityCheck]) -> Vec<usize> {
    let mut sites: Vec<usize> = checks
        .iter()
        .flat_map(|c| c.sites.iter().copied())
        .collect();
    sites.sort_unstable();
    sites.dedup();
    sites
}

/// Rank over GF(2) of a set of bit rows, each `words` long.
pub fn gf2_rank(mut rows: Vec<Vec<u64>>) -> usize {
    let words = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..words * 64 {
        let (w, b) = (col / 64, col % 64);
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i][w] >> b & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && row[w] >> b & 1 == 1 {
                row.iter_mut().zip(&pivot_row).for_each(|(x, y)| *x ^= y);
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Number of independent constraints among `checks` on `num_sites` spins.
pub fn check_rank(checks: &[ParityCheck], num_sites: usize) -> usize {
    let words = num_sites.div_ceil(64);
    let rows = checks
        .iter()
        .map(|c| {
            let mut row = vec![0u64; words];
            for &s in &c.sites {
                row[s / 64] ^= 1 << (s % 64);
            }
            row
        })
        .collect();
    gf2_rank(rows)
}

/// The three regions of a Kitaev–Preskill tripartition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tripartition {
    pub a: EdgeSet,
    pub b: EdgeSet,
    pub c: EdgeSet,
}

/// Region labels used by [`Tripartition::regions`].
pub const KP_LABELS: [&str; 7] = ["A", "B", "C", "AB", "BC", "AC", "ABC"];

impl Tripartition {
    /// Split the edges of an `ell × ell` plaquette block at `(r0, c0)` by the
    /// position of each edge midpoint: the upper half (midpoint row at most
    /// `ell/2`) is `A`; the lower half is `B` left of the centre column
    /// (inclusive) and `C` right of it.
    pub fn square_block(code: &ToricCode, r0: usize, c0: usize, ell: usize) -> Result<Self> {
        if ell < 2 || ell > code.size() {
            return Err(invalid("tripartition block side must be in 2..=L"));
        }
        let block = plaquette_block(code, r0, c0, ell, ell)?;
        let n = code.num_qubits();
        let l = code.size();
        let (mut a, mut b, mut c) = (EdgeSet::empty(n), EdgeSet::empty(n), EdgeSet::empty(n));
        for e in block.iter() {
            let (dir, r, col) = code.edge_coords(e);
            // doubled midpoint coordinates relative to the block corner
            let dr = (r + l - r0) % l;
            let dc = (col + l - c0) % l;
            let (y2, x2) = match dir {
                crate::code::EdgeDir::Horizontal => (2 * dr, 2 * dc + 1),
                crate::code::EdgeDir::Vertical => (2 * dr + 1, 2 * dc),
            };
            if y2 <= ell {
                a.insert(e);
            } else if x2 <= ell {
                b.insert(e);
            } else {
                c.insert(e);
            }
        }
        Ok(Tripartition { a, b, c })
    }

    /// The 3 × 3 plaquette block at `(r0, c0)` split into a top strip `A`
    /// with a notch below its middle, its transpose `B` down the left side,
    /// and the remaining twelve edges `C`, which are `A ∪ B` rotated by a
    /// half turn. Needs `L ≥ 4`.
    ///
    /// The symmetries give `E_A = E_B`, `E_AC = E_BC` and `E_C = E_AB` for
    /// any isotropic ensemble.
    pub fn pinwheel(code: &ToricCode, r0: usize, c0: usize) -> Result<Self> {
        if code.size() < 4 {
            return Err(invalid("the pinwheel tripartition needs L >= 4"));
        }
        let n = code.num_qubits();
        let (r0, c0) = (r0 as isize, c0 as isize);
        let h = |r: isize, c: isize| code.h_edge(r0 + r, c0 + c);
        let v = |r: isize, c: isize| code.v_edge(r0 + r, c0 + c);
        let mut a = EdgeSet::empty(n);
        for e in [h(0, 0), h(0, 1), h(0, 2), h(1, 1), v(0, 1), v(0, 2)] {
            a.insert(e);
        }
        let mut b = EdgeSet::empty(n);
        for e in [h(1, 0), h(2, 0), v(0, 0), v(1, 0), v(2, 0), v(1, 1)] {
            b.insert(e);
        }
        let block = plaquette_block(code, r0 as usize, c0 as usize, 3, 3)?;
        let c = difference(&block, &a.union(&b));
        Ok(Tripartition { a, b, c })
    }

    /// The seven unions in the order of [`KP_LABELS`].
    pub fn regions(&self) -> [EdgeSet; 7] {
        let ab = self.a.union(&self.b);
        let bc = self.b.union(&self.c);
        let ac = self.a.union(&self.c);
        let abc = ab.union(&self.c);
        [
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            ab,
            bc,
            ac,
            abc,
        ]
    }

    pub fn describe(&self) -> String {
        alloc::format!(
            "A:{} B:{} C:{} edges",
            self.a.count(),
            self.b.count(),
            self.c.count()
        )
    }
}
