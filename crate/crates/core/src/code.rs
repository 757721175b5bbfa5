//! The `L × L` periodic toric code and its loop groups.
//!
//! Indexing is fixed: vertices and plaquettes are row-major (`r * L + c`),
//! horizontal edges `h(r, c)` occupy `0..L²` and vertical edges `v(r, c)`
//! occupy `L²..2L²`. The edge `h(r, c)` joins vertices `(r, c)` and
//! `(r, c+1)`; `v(r, c)` joins `(r, c)` and `(r+1, c)`. Plaquette `(r, c)`
//! has corners `(r, c)` and `(r+1, c+1)`.
//!
//! Non-contractible cycles: `l₁` is the horizontal primal cycle through row 0,
//! `l₂` the vertical one through column 0. The dual cycles are chosen so that
//! `ḡ_{x,l}` anticommutes with `ḡ_{z,l}` and commutes with the other `Z`
//! logical.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::pauli::PauliString;

/// Type of closed loop: `Z` loops live on the primal lattice (products of
/// plaquette stabilizers), `X` loops on the dual lattice (products of stars).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LoopKind {
    X,
    Z,
}

impl LoopKind {
    pub fn other(self) -> LoopKind {
        match self {
            LoopKind::X => LoopKind::Z,
            LoopKind::Z => LoopKind::X,
        }
    }
}

/// One of the two non-contractible cycles of the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cycle {
    L1,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeDir {
    Horizontal,
    Vertical,
}

/// Geometry, stabilizers and logical operators of the periodic toric code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToricCode {
    l: usize,
    vertex_ops: Vec<PauliString>,
    plaquette_ops: Vec<PauliString>,
}

impl ToricCode {
    pub fn new(l: usize) -> Result<Self> {
        if l < 2 {
            return Err(invalid(format!(
                "toric code needs L >= 2 (got {l}); the L = 1 torus is degenerate"
            )));
        }
        let mut code = ToricCode {
            l,
            vertex_ops: Vec::new(),
            plaquette_ops: Vec::new(),
        };
        let n = code.num_qubits();
        code.vertex_ops = (0..l * l)
            .map(|v| PauliString::x_on(n, code.star(v)))
            .collect();
        code.plaquette_ops = (0..l * l)
            .map(|p| PauliString::z_on(n, code.plaquette_boundary(p)))
            .collect();
        Ok(code)
    }

    pub fn size(&self) -> usize {
        self.l
    }

    pub fn num_qubits(&self) -> usize {
        2 * self.l * self.l
    }

    pub fn num_sites(&self) -> usize {
        self.l * self.l
    }

    fn wrap(&self, x: isize) -> usize {
        x.rem_euclid(self.l as isize) as usize
    }

    /// Row-major index of the vertex (or plaquette) at `(r, c)`, wrapped.
    pub fn site(&self, r: isize, c: isize) -> usize {
        self.wrap(r) * self.l + self.wrap(c)
    }

    pub fn site_coords(&self, s: usize) -> (usize, usize) {
        (s / self.l, s % self.l)
    }

    pub fn h_edge(&self, r: isize, c: isize) -> usize {
        self.site(r, c)
    }

    pub fn v_edge(&self, r: isize, c: isize) -> usize {
        self.l * self.l + self.site(r, c)
    }

    /// Direction and anchor `(r, c)` of an edge.
    pub fn edge_coords(&self, e: usize) -> (EdgeDir, usize, usize) {
        let ll = self.l * self.l;
        if e < ll {
            (EdgeDir::Horizontal, e / self.l, e % self.l)
        } else {
            (EdgeDir::Vertical, (e - ll) / self.l, (e - ll) % self.l)
        }
    }

    /// The two vertices joined by an edge.
    pub fn edge_vertices(&self, e: usize) -> (usize, usize) {
        let (dir, r, c) = self.edge_coords(e);
        let (r, c) = (r as isize, c as isize);
        match dir {
            EdgeDir::Horizontal => (self.site(r, c), self.site(r, c + 1)),
            EdgeDir::Vertical => (self.site(r, c), self.site(r + 1, c)),
        }
    }

    /// The two plaquettes sharing an edge.
    pub fn edge_plaquettes(&self, e: usize) -> (usize, usize) {
        let (dir, r, c) = self.edge_coords(e);
        let (r, c) = (r as isize, c as isize);
        match dir {
            EdgeDir::Horizontal => (self.site(r - 1, c), self.site(r, c)),
            EdgeDir::Vertical => (self.site(r, c - 1), self.site(r, c)),
        }
    }

    /// Edges incident to vertex `v`.
    pub fn star(&self, v: usize) -> [usize; 4] {
        let (r, c) = self.site_coords(v);
        let (r, c) = (r as isize, c as isize);
        [
            self.h_edge(r, c),
            self.h_edge(r, c - 1),
            self.v_edge(r, c),
            self.v_edge(r - 1, c),
        ]
    }

    /// Edges bounding plaquette `p`.
    pub fn plaquette_boundary(&self, p: usize) -> [usize; 4] {
        let (r, c) = self.site_coords(p);
        let (r, c) = (r as isize, c as isize);
        [
            self.h_edge(r, c),
            self.h_edge(r + 1, c),
            self.v_edge(r, c),
            self.v_edge(r, c + 1),
        ]
    }

    /// Vertex stabilizer `A_s` (X type).
    pub fn vertex_stabilizer(&self, v: usize) -> &PauliString {
        &self.vertex_ops[v]
    }

    /// Plaquette stabilizer `B_p` (Z type).
    pub fn plaquette_stabilizer(&self, p: usize) -> &PauliString {
        &self.plaquette_ops[p]
    }

    pub fn vertex_stabilizers(&self) -> &[PauliString] {
        &self.vertex_ops
    }

    pub fn plaquette_stabilizers(&self) -> &[PauliString] {
        &self.plaquette_ops
    }

    /// Stabilizers generating loops of `kind`.
    pub fn stabilizers(&self, kind: LoopKind) -> &[PauliString] {
        match kind {
            LoopKind::X => &self.vertex_ops,
            LoopKind::Z => &self.plaquette_ops,
        }
    }

    /// Support of the logical loop of `kind` along `cycle`.
    pub fn logical_support(&self, kind: LoopKind, cycle: Cycle) -> Vec<usize> {
        let l = self.l as isize;
        match (kind, cycle) {
            (LoopKind::Z, Cycle::L1) => (0..l).map(|c| self.h_edge(0, c)).collect(),
            (LoopKind::Z, Cycle::L2) => (0..l).map(|r| self.v_edge(r, 0)).collect(),
            // dual cycle crossing l1 once (at h(0,0))
            (LoopKind::X, Cycle::L1) => (0..l).map(|r| self.h_edge(r, 0)).collect(),
            // dual cycle crossing l2 once (at v(0,0))
            (LoopKind::X, Cycle::L2) => (0..l).map(|c| self.v_edge(0, c)).collect(),
        }
    }

    /// Logical operator `ḡ_{kind, cycle}`.
    pub fn logical(&self, kind: LoopKind, cycle: Cycle) -> PauliString {
        let n = self.num_qubits();
        let support = self.logical_support(kind, cycle);
        match kind {
            LoopKind::X => PauliString::x_on(n, support),
            LoopKind::Z => PauliString::z_on(n, support),
        }
    }

    /// Spin-model bond index of edge `e` for loops of `kind`.
    ///
    /// Spins of `Z` loops sit on plaquettes, spins of `X` loops on vertices.
    /// Bond `i` is the rightward bond of site `i`, bond `L² + i` its downward
    /// bond.
    pub fn edge_to_bond(&self, kind: LoopKind, e: usize) -> usize {
        let ll = self.l * self.l;
        match kind {
            LoopKind::X => e,
            LoopKind::Z => {
                let (dir, r, c) = self.edge_coords(e);
                let (r, c) = (r as isize, c as isize);
                match dir {
                    EdgeDir::Vertical => self.site(r, c - 1),
                    EdgeDir::Horizontal => ll + self.site(r - 1, c),
                }
            }
        }
    }

    /// Inverse of [`ToricCode::edge_to_bond`].
    pub fn bond_to_edge(&self, kind: LoopKind, b: usize) -> usize {
        let ll = self.l * self.l;
        match kind {
            LoopKind::X => b,
            LoopKind::Z => {
                let (r, c) = self.site_coords(b % ll);
                let (r, c) = (r as isize, c as isize);
                if b < ll {
                    self.v_edge(r, c + 1)
                } else {
                    self.h_edge(r + 1, c)
                }
            }
        }
    }

    /// The two spin sites joined by the bond dual to edge `e`.
    pub fn edge_sites(&self, kind: LoopKind, e: usize) -> (usize, usize) {
        match kind {
            LoopKind::X => self.edge_vertices(e),
            LoopKind::Z => self.edge_plaquettes(e),
        }
    }

    /// Edges crossed by a straight path of the spin lattice of `kind` from
    /// site `from` to site `to`: first along the row, then along the column,
    /// each leg taking the shorter way around.
    ///
    /// For `Z` loops this is the support of the `X` string creating `m`
    /// anyons at the two plaquettes; for `X` loops the `Z` string creating
    /// `e` anyons at the two vertices.
    pub fn string_path(&self, kind: LoopKind, from: usize, to: usize) -> Result<Vec<usize>> {
        let ll = self.num_sites();
        if from >= ll || to >= ll {
            return Err(invalid("path endpoint outside the lattice"));
        }
        let l = self.l as isize;
        let (r0, c0) = self.site_coords(from);
        let (r1, c1) = self.site_coords(to);
        let step = |a: usize, b: usize| -> (isize, isize) {
            let fwd = (b as isize - a as isize).rem_euclid(l);
            if fwd <= l - fwd {
                (1, fwd)
            } else {
                (-1, l - fwd)
            }
        };
        let mut edges = Vec::new();
        let (dc, nc) = step(c0, c1);
        let (mut r, mut c) = (r0 as isize, c0 as isize);
        for _ in 0..nc {
            let site = if dc > 0 {
                self.site(r, c)
            } else {
                self.site(r, c - 1)
            };
            edges.push(self.bond_to_edge(kind, site));
            c += dc;
        }
        let (dr, nr) = step(r0, r1);
        for _ in 0..nr {
            let site = if dr > 0 {
                self.site(r, c)
            } else {
                self.site(r - 1, c)
            };
            edges.push(self.bond_to_edge(kind, ll + site));
            r += dr;
        }
        Ok(edges)
    }

    /// Operator creating a pair of anyons at the ends of [`ToricCode::string_path`].
    pub fn string_operator(&self, kind: LoopKind, from: usize, to: usize) -> Result<PauliString> {
        let path = self.string_path(kind, from, to)?;
        let n = self.num_qubits();
        Ok(match kind {
            LoopKind::Z => PauliString::x_on(n, path),
            LoopKind::X => PauliString::z_on(n, path),
        })
    }

    /// Plain-text adjacency listing, stable across runs.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "toric-code L={} qubits={}", self.l, self.num_qubits());
        for e in 0..self.num_qubits() {
            let (dir, r, c) = self.edge_coords(e);
            let (a, b) = self.edge_vertices(e);
            let (p, q) = self.edge_plaquettes(e);
            let tag = match dir {
                EdgeDir::Horizontal => 'h',
                EdgeDir::Vertical => 'v',
            };
            let _ = writeln!(
                out,
                "edge {e} {tag}({r},{c}) vertices {a} {b} plaquettes {p} {q}"
            );
        }
        for v in 0..self.num_sites() {
            let s = self.star(v);
            let _ = writeln!(out, "star {v} edges {} {} {} {}", s[0], s[1], s[2], s[3]);
        }
        for p in 0..self.num_sites() {
            let s = self.plaquette_boundary(p);
            let _ = writeln!(
                out,
                "plaquette {p} edges {} {} {} {}",
                s[0], s[1], s[2], s[3]
            );
        }
        for kind in [LoopKind::Z, LoopKind::X] {
            for cycle in [Cycle::L1, Cycle::L2] {
                let _ = write!(out, "logical {kind:?} {cycle:?} edges");
                for e in self.logical_support(kind, cycle) {
                    let _ = write!(out, " {e}");
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Largest loop-group rank [`LoopGroup`] will enumerate.
pub const MAX_LOOP_RANK: u32 = 34;

/// One element of a loop group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LoopElement {
    /// Support as a qubit bitmask.
    pub mask: u64,
    /// Number of edges in the support, `|g|`.
    pub length: u32,
    /// Homology class: bit 0 set iff the loop winds along `l₁`, bit 1 for `l₂`.
    pub sector: u8,
}

/// The abelian group of closed loops of one kind, as bitmasks.
///
/// Generators are all but one of the stabilizers of `kind` followed, when the
/// group includes the non-contractible sector, by the two logical loops.
#[derive(Debug, Clone)]
pub struct LoopGroup {
    kind: LoopKind,
    n_qubits: usize,
    generators: Vec<u64>,
    logical_bits: Option<(usize, usize)>,
}

impl LoopGroup {
    /// Full loop group including non-contractible loops, rank `L² + 1`.
    pub fn new(code: &ToricCode, kind: LoopKind) -> Result<Self> {
        Self::build(code, kind, true)
    }

    /// Homologically trivial loops only (the stabilizer group), rank `L² - 1`.
    pub fn contractible(code: &ToricCode, kind: LoopKind) -> Result<Self> {
        Self::build(code, kind, false)
    }

    fn build(code: &ToricCode, kind: LoopKind, with_logicals: bool) -> Result<Self> {
        let rank = code.num_sites() as u64 - 1 + if with_logicals { 2 } else { 0 };
        if rank > MAX_LOOP_RANK as u64 || code.num_qubits() > 64 {
            return Err(Error::Capacity {
                what: "loop group rank",
                needed: rank,
                limit: MAX_LOOP_RANK as u64,
            });
        }
        let mut generators: Vec<u64> = code
            .stabilizers(kind)
            .iter()
            .take(code.num_sites() - 1)
            .map(|s| match kind {
                LoopKind::X => s.x_words()[0],
                LoopKind::Z => s.z_words()[0],
            })
            .collect();
        let mut logical_bits = None;
        if with_logicals {
            let base = generators.len();
            for cycle in [Cycle::L1, Cycle::L2] {
                generators.push(
                    code.logical_support(kind, cycle)
                        .into_iter()
                        .fold(0u64, |m, e| m | 1 << e),
                );
            }
            logical_bits = Some((base, base + 1));
        }
        Ok(LoopGroup {
            kind,
            n_qubits: code.num_qubits(),
            generators,
            logical_bits,
        })
    }

    pub fn kind(&self) -> LoopKind {
        self.kind
    }

    pub fn rank(&self) -> u32 {
        self.generators.len() as u32
    }

    pub fn order(&self) -> u64 {
        1u64 << self.rank()
    }

    pub fn includes_logicals(&self) -> bool {
        self.logical_bits.is_some()
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    /// Element selected by the generator bit pattern `bits`.
    pub fn element(&self, bits: u64) -> LoopElement {
        let mut mask = 0u64;
        for (i, g) in self.generators.iter().enumerate() {
            if bits >> i & 1 == 1 {
                mask ^= g;
            }
        }
        LoopElement {
            mask,
            length: mask.count_ones(),
            sector: self.sector_of_bits(bits),
        }
    }

    fn sector_of_bits(&self, bits: u64) -> u8 {
        match self.logical_bits {
            Some((a, b)) => ((bits >> a & 1) | (bits >> b & 1) << 1) as u8,
            None => 0,
        }
    }

    /// Gray-code ordered walk over all elements.
    pub fn elements(&self) -> LoopElements<'_> {
        self.elements_range(0, self.order())
    }

    /// Gray-code walk over positions `start..end` of the full walk.
    pub fn elements_range(&self, start: u64, end: u64) -> LoopElements<'_> {
        let end = end.min(self.order());
        let gray = start ^ (start >> 1);
        LoopElements {
            group: self,
            next: start,
            end,
            current: self.element(gray),
            gray,
        }
    }

    /// The element as a Pauli string.
    pub fn to_pauli(&self, e: &LoopElement) -> PauliString {
        match self.kind {
            LoopKind::X => PauliString::from_masks(self.n_qubits, e.mask, 0),
            LoopKind::Z => PauliString::from_masks(self.n_qubits, 0, e.mask),
        }
    }
}

/// Iterator over a [`LoopGroup`]; consecutive elements differ by one generator.
pub struct LoopElements<'a> {
    group: &'a LoopGroup,
    next: u64,
    end: u64,
    current: LoopElement,
    gray: u64,
}

impl Iterator for LoopElements<'_> {
    type Item = LoopElement;

    fn next(&mut self) -> Option<LoopElement> {
        if self.next >= self.end {
            return None;
        }
        let out = self.current;
        self.next += 1;
        if self.next < self.end {
            let bit = self.next.trailing_zeros() as usize;
            self.gray ^= 1 << bit;
            let mask = self.current.mask ^ self.group.generators[bit];
            self.current = LoopElement {
                mask,
                length: mask.count_ones(),
                sector: self.group.sector_of_bits(self.gray),
            };
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

/// Streams every element of the full loop group of `kind` with its length.
pub fn enumerate_loops(
    code: &ToricCode,
    kind: LoopKind,
) -> Result<impl Iterator<Item = (PauliString, usize)>> {
    let group = LoopGroup::new(code, kind)?;
    let order = group.order();
    let mut walk_pos = 0u64;
    let mut current = group.element(0);
    let mut gray = 0u64;
    Ok(core::iter::from_fn(move || {
        if walk_pos >= order {
            return None;
        }
        let out = (group.to_pauli(&current), current.length as usize);
        walk_pos += 1;
        if walk_pos < order {
            let bit = walk_pos.trailing_zeros() as usize;
            gray ^= 1 << bit;
            current = group.element(gray);
        }
        Some(out)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{commutation_sign, Sign};

    #[test]
    fn rejects_degenerate_torus() {
        assert!(ToricCode::new(1).is_err());
        assert!(ToricCode::new(0).is_err());
    }

    #[test]
    fn small_code_counts() {
        let code = ToricCode::new(2).unwrap();
        assert_eq!(code.num_qubits(), 8);
        assert_eq!(code.vertex_stabilizers().len(), 4);
        assert_eq!(code.plaquette_stabilizers().len(), 4);
    }

    #[test]
    fn stabilizer_products_are_identity() {
        for l in 2..6 {
            let code = ToricCode::new(l).unwrap();
            for kind in [LoopKind::X, LoopKind::Z] {
                let prod = code
                    .stabilizers(kind)
                    .iter()
                    .fold(PauliString::identity(code.num_qubits()), |acc, s| {
                        acc.compose(s).unwrap()
                    });
                assert!(prod.is_identity());
            }
        }
    }

    #[test]
    fn stabilizers_and_logicals_commute() {
        for l in 2..5 {
            let code = ToricCode::new(l).unwrap();
            let mut all: Vec<PauliString> = code.vertex_stabilizers().to_vec();
            all.extend_from_slice(code.plaquette_stabilizers());
            let logicals: Vec<PauliString> = [LoopKind::X, LoopKind::Z]
                .iter()
                .flat_map(|&k| [code.logical(k, Cycle::L1), code.logical(k, Cycle::L2)])
                .collect();
            for s in &all {
                for t in all.iter().chain(&logicals) {
                    assert_eq!(commutation_sign(s, t).unwrap(), Sign::Plus);
                }
            }
        }
    }

    #[test]
    fn logical_pairing() {
        let code = ToricCode::new(4).unwrap();
        let z1 = code.logical(LoopKind::Z, Cycle::L1);
        let z2 = code.logical(LoopKind::Z, Cycle::L2);
        let x1 = code.logical(LoopKind::X, Cycle::L1);
        let x2 = code.logical(LoopKind::X, Cycle::L2);
        assert_eq!(commutation_sign(&z1, &x1).unwrap(), Sign::Minus);
        assert_eq!(commutation_sign(&z2, &x2).unwrap(), Sign::Minus);
        assert_eq!(commutation_sign(&z1, &x2).unwrap(), Sign::Plus);
        assert_eq!(commutation_sign(&z2, &x1).unwrap(), Sign::Plus);
        assert_eq!(commutation_sign(&z1, &z2).unwrap(), Sign::Plus);
        assert_eq!(commutation_sign(&x1, &x2).unwrap(), Sign::Plus);
    }

    #[test]
    fn single_x_vs_plaquette() {
        let code = ToricCode::new(3).unwrap();
        let p = 4;
        let e = code.plaquette_boundary(p)[2];
        let x = PauliString::x_on(code.num_qubits(), [e]);
        assert_eq!(
            commutation_sign(&x, code.plaquette_stabilizer(p)).unwrap(),
            Sign::Minus
        );
    }

    #[test]
    fn bond_maps_are_inverse_and_consistent() {
        let code = ToricCode::new(4).unwrap();
        let ll = code.num_sites();
        for kind in [LoopKind::X, LoopKind::Z] {
            for e in 0..code.num_qubits() {
                let b = code.edge_to_bond(kind, e);
                assert_eq!(code.bond_to_edge(kind, b), e);
                // bond b joins site (b mod L²) to its right / down neighbour
                let s = b % ll;
                let (r, c) = code.site_coords(s);
                let other = if b < ll {
                    code.site(r as isize, c as isize + 1)
                } else {
                    code.site(r as isize + 1, c as isize)
                };
                let (a, bb) = code.edge_sites(kind, e);
                assert_eq!((a, bb), (s, other));
            }
        }
    }

    #[test]
    fn loop_group_orders() {
        let code = ToricCode::new(3).unwrap();
        let g = LoopGroup::new(&code, LoopKind::Z).unwrap();
        assert_eq!(g.order(), 1024);
        let h = LoopGroup::contractible(&code, LoopKind::X).unwrap();
        assert_eq!(h.order(), 256);
    }

    #[test]
    fn enumeration_visits_each_element_once() {
        let code = ToricCode::new(2).unwrap();
        for kind in [LoopKind::X, LoopKind::Z] {
            let mut seen: Vec<u64> = LoopGroup::new(&code, kind)
                .unwrap()
                .elements()
                .map(|e| e.mask)
                .collect();
            assert_eq!(seen.len(), 32);
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), 32);
        }
        let items: Vec<_> = enumerate_loops(&code, LoopKind::Z).unwrap().collect();
        assert_eq!(items.len(), 32);
        assert!(items.iter().any(|(p, len)| p.is_identity() && *len == 0));
    }

    #[test]
    fn minimal_loops() {
        let code = ToricCode::new(4).unwrap();
        let g = LoopGroup::new(&code, LoopKind::Z).unwrap();
        let mut shortest_contractible = u32::MAX;
        let mut shortest_winding = u32::MAX;
        for e in g.elements() {
            if e.length == 0 {
                continue;
            }
            if e.sector == 0 {
                shortest_contractible = shortest_contractible.min(e.length);
            } else {
                shortest_winding = shortest_winding.min(e.length);
            }
        }
        assert_eq!(shortest_contractible, 4);
        assert_eq!(shortest_winding, 4);
    }

    #[test]
    fn capacity_guard() {
        let code = ToricCode::new(6).unwrap();
        assert!(matches!(
            LoopGroup::new(&code, LoopKind::Z),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn string_path_creates_anyons_at_ends() {
        let code = ToricCode::new(5).unwrap();
        let (a, b) = (code.site(0, 0), code.site(3, 4));
        let s = code.string_operator(LoopKind::Z, a, b).unwrap();
        for p in 0..code.num_sites() {
            let sign = commutation_sign(&s, code.plaquette_stabilizer(p)).unwrap();
            assert_eq!(sign == Sign::Minus, p == a || p == b, "plaquette {p}");
        }
        let t = code.string_operator(LoopKind::X, a, b).unwrap();
        for v in 0..code.num_sites() {
            let sign = commutation_sign(&t, code.vertex_stabilizer(v)).unwrap();
            assert_eq!(sign == Sign::Minus, v == a || v == b, "vertex {v}");
        }
    }

    #[test]
    fn dump_is_stable() {
        let code = ToricCode::new(2).unwrap();
        assert_eq!(code.dump(), ToricCode::new(2).unwrap().dump());
        assert!(code.dump().starts_with("toric-code L=2 qubits=8\n"));
    }
}
