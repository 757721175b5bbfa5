//! Periodic square lattice of spins.
//!
//! Site `(r, c)` has index `r * L + c`; bond `i` joins site `i` to its right
//! neighbour and bond `L² + i` joins it to the neighbour below. This matches
//! [`ToricCode::edge_to_bond`](crate::code::ToricCode::edge_to_bond).

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinLattice {
    l: usize,
    /// Right, down, left, up neighbours of each site.
    neighbors: Vec<[u32; 4]>,
    /// Bonds to the right, down, left, up neighbours.
    bonds: Vec<[u32; 4]>,
}

impl SpinLattice {
    pub fn new(l: usize) -> Self {
        let n = l * l;
        let idx = |r: usize, c: usize| ((r % l) * l + (c % l)) as u32;
        let mut neighbors = Vec::with_capacity(n);
        let mut bonds = Vec::with_capacity(n);
        for r in 0..l {
            for c in 0..l {
                let right = idx(r, c + 1);
                let down = idx(r + 1, c);
                let left = idx(r, c + l - 1);
                let up = idx(r + l - 1, c);
                neighbors.push([right, down, left, up]);
                bonds.push([idx(r, c), (n as u32) + idx(r, c), left, (n as u32) + up]);
            }
        }
        SpinLattice {
            l,
            neighbors,
            bonds,
        }
    }

    pub fn size(&self) -> usize {
        self.l
    }

    pub fn num_sites(&self) -> usize {
        self.l * self.l
    }

    pub fn num_bonds(&self) -> usize {
        2 * self.l * self.l
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32; 4] {
        &self.neighbors[i]
    }

    #[inline]
    pub fn bonds(&self, i: usize) -> &[u32; 4] {
        &self.bonds[i]
    }

    /// Endpoints of bond `b`.
    pub fn bond_sites(&self, b: usize) -> (usize, usize) {
        let n = self.num_sites();
        let i = b % n;
        let j = self.neighbors[i][if b < n { 0 } else { 1 }] as usize;
        (i, j)
    }

    /// Site displaced from `i` by `(dr, dc)`.
    pub fn shift(&self, i: usize, dr: usize, dc: usize) -> usize {
        let (r, c) = (i / self.l, i % self.l);
        ((r + dr) % self.l) * self.l + (c + dc) % self.l
    }
}
