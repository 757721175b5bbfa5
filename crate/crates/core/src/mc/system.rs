//! The `(n-1)`-flavor Ising model and its Metropolis update.
//!
//! Per bond `⟨ij⟩` the energy is
//!
//! ```text
//! -J [ Σ_s b⁽ˢ⁾_ij σ⁽ˢ⁾_i σ⁽ˢ⁾_j + B_ij π_i π_j ],   π_i = Π_s σ⁽ˢ⁾_i,  B_ij = Π_s b⁽ˢ⁾_ij
//! ```
//!
//! where `b⁽ˢ⁾` are per-flavor bond signs (defect lines or quenched disorder).
//! With one flavor and both terms present the model is an Ising model at
//! coupling `2J`.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use super::lattice::SpinLattice;
use crate::error::{invalid, Result};
use crate::seed::{chain_rng, ChainRng};

/// Which terms of the bond energy are present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interaction {
    /// Pairwise terms plus the all-flavor product term.
    Replica,
    /// Pairwise terms only: decoupled Ising layers.
    PairOnly,
}

impl Interaction {
    fn weights(self) -> (i32, i32) {
        match self {
            Interaction::Replica => (1, 1),
            Interaction::PairOnly => (1, 0),
        }
    }
}

/// Acceptance thresholds indexed by the pair and product local fields.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Thresholds([u64; 25]);

impl Thresholds {
    fn new(j: f64, interaction: Interaction) -> Self {
        let (wp, wq) = interaction.weights();
        let mut t = [0u64; 25];
        for a in 0..5 {
            for b in 0..5 {
                let u = 2 * a as i32 - 4;
                let v = 2 * b as i32 - 4;
                let x = wp * u + wq * v;
                t[a * 5 + b] = if x <= 0 || j == 0.0 {
                    u64::MAX
                } else {
                    let q = libm::exp(-2.0 * j * x as f64);
                    // q < 1 here, so the product stays below 2^64
                    (q * 18446744073709551616.0) as u64
                };
            }
        }
        Thresholds(t)
    }
}

#[derive(Debug, Clone)]
pub struct SpinSystem {
    lattice: SpinLattice,
    flavors: usize,
    interaction: Interaction,
    coupling: f64,
    /// `σ⁽ˢ⁾_i` at `i * flavors + s`.
    spins: Vec<i8>,
    product: Vec<i8>,
    /// `b⁽ˢ⁾` at `bond * flavors + s`.
    signs: Vec<i8>,
    bond_product: Vec<i8>,
    magnetization: Vec<i64>,
    phi_pair: i64,
    phi_product: i64,
    thresholds: Thresholds,
    rng: ChainRng,
    sweeps: u64,
}

impl SpinSystem {
    /// All spins up, all bond signs `+1`.
    pub fn new(
        l: usize,
        flavors: usize,
        interaction: Interaction,
        coupling: f64,
        seed: u64,
    ) -> Result<Self> {
        if l < 2 {
            return Err(invalid("lattice size must be at least 2"));
        }
        if flavors == 0 {
            return Err(invalid("need at least one flavor"));
        }
        if coupling.is_nan() || coupling < 0.0 {
            return Err(invalid("coupling must be non-negative"));
        }
        let lattice = SpinLattice::new(l);
        let n = lattice.num_sites();
        let nb = lattice.num_bonds();
        let mut sys = SpinSystem {
            lattice,
            flavors,
            interaction,
            coupling,
            spins: vec![1; n * flavors],
            product: vec![1; n],
            signs: vec![1; nb * flavors],
            bond_product: vec![1; nb],
            magnetization: vec![n as i64; flavors],
            phi_pair: 0,
            phi_product: 0,
            thresholds: Thresholds::new(coupling, interaction),
            rng: chain_rng(seed),
            sweeps: 0,
        };
        sys.recompute();
        Ok(sys)
    }

    pub fn lattice(&self) -> &SpinLattice {
        &self.lattice
    }

    pub fn size(&self) -> usize {
        self.lattice.size()
    }

    pub fn flavors(&self) -> usize {
        self.flavors
    }

    pub fn interaction(&self) -> Interaction {
        self.interaction
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn set_coupling(&mut self, coupling: f64) {
        self.coupling = coupling;
        self.thresholds = Thresholds::new(coupling, self.interaction);
    }

    #[inline]
    pub fn spin(&self, site: usize, flavor: usize) -> i8 {
        self.spins[site * self.flavors + flavor]
    }

    #[inline]
    pub fn product_spin(&self, site: usize) -> i8 {
        self.product[site]
    }

    #[inline]
    pub fn sign(&self, bond: usize, flavor: usize) -> i8 {
        self.signs[bond * self.flavors + flavor]
    }

    #[inline]
    pub fn bond_product(&self, bond: usize) -> i8 {
        self.bond_product[bond]
    }

    /// `Σ_i σ⁽ˢ⁾_i` per flavor.
    pub fn magnetization(&self) -> &[i64] {
        &self.magnetization
    }

    /// `(Σ b σσ, Σ B ππ)` summed over bonds and (for the first) flavors.
    pub fn bond_sums(&self) -> (i64, i64) {
        (self.phi_pair, self.phi_product)
    }

    /// The combination whose Boltzmann weight is `e^{J·Ψ}`.
    pub fn psi(&self) -> i64 {
        let (wp, wq) = self.interaction.weights();
        wp as i64 * self.phi_pair + wq as i64 * self.phi_product
    }

    /// Tracked energy `-J Ψ`.
    pub fn energy(&self) -> f64 {
        let psi = self.psi();
        if psi == 0 {
            0.0
        } else {
            -self.coupling * psi as f64
        }
    }

    /// Bond sums recomputed from the spins.
    pub fn bond_sums_from_scratch(&self) -> (i64, i64) {
        let f = self.flavors;
        let mut pair = 0i64;
        let mut prod = 0i64;
        for b in 0..self.lattice.num_bonds() {
            let (i, j) = self.lattice.bond_sites(b);
            for s in 0..f {
                pair +=
                    (self.signs[b * f + s] * self.spins[i * f + s] * self.spins[j * f + s]) as i64;
            }
            prod += (self.bond_product[b] * self.product[i] * self.product[j]) as i64;
        }
        (pair, prod)
    }

    /// Energy recomputed from the spins.
    pub fn energy_from_scratch(&self) -> f64 {
        let (wp, wq) = self.interaction.weights();
        let (a, b) = self.bond_sums_from_scratch();
        let psi = wp as i64 * a + wq as i64 * b;
        if psi == 0 {
            0.0
        } else {
            -self.coupling * psi as f64
        }
    }

    fn recompute(&mut self) {
        let n = self.lattice.num_sites();
        let f = self.flavors;
        for i in 0..n {
            self.product[i] = self.spins[i * f..(i + 1) * f].iter().product();
        }
        for b in 0..self.lattice.num_bonds() {
            self.bond_product[b] = self.signs[b * f..(b + 1) * f].iter().product();
        }
        for s in 0..f {
            self.magnetization[s] = (0..n).map(|i| self.spins[i * f + s] as i64).sum();
        }
        let (a, b) = self.bond_sums_from_scratch();
        self.phi_pair = a;
        self.phi_product = b;
    }

    /// Sets every spin to `+1`.
    pub fn cold_start(&mut self) {
        self.spins.iter_mut().for_each(|s| *s = 1);
        self.recompute();
    }

    /// Draws every spin uniformly from the chain's generator.
    pub fn hot_start(&mut self) {
        for s in self.spins.iter_mut() {
            *s = if self.rng.next_u64() >> 63 == 0 {
                1
            } else {
                -1
            };
        }
        self.recompute();
    }

    /// Replaces all spins; `spins` is laid out site-major, flavor-minor.
    pub fn set_spins(&mut self, spins: &[i8]) -> Result<()> {
        if spins.len() != self.spins.len() || spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(invalid(
                "spin configuration must hold ±1 for every site and flavor",
            ));
        }
        self.spins.copy_from_slice(spins);
        self.recompute();
        Ok(())
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Replaces all bond signs; layout bond-major, flavor-minor.
    pub fn set_signs(&mut self, signs: &[i8]) -> Result<()> {
        if signs.len() != self.signs.len() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(invalid("bond signs must hold ±1 for every bond and flavor"));
        }
        self.signs.copy_from_slice(signs);
        self.recompute();
        Ok(())
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Negates `b⁽ˢ⁾` on `bonds` for every flavor with `flip[s]` set.
    pub fn flip_bonds(&mut self, bonds: &[usize], flip: &[bool]) -> Result<()> {
        if flip.len() != self.flavors {
            return Err(invalid(
                "flavor mask length must equal the number of flavors",
            ));
        }
        let f = self.flavors;
        for &b in bonds {
            if b >= self.lattice.num_bonds() {
                return Err(invalid("bond index outside the lattice"));
            }
            for s in 0..f {
                if flip[s] {
                    self.signs[b * f + s] = -self.signs[b * f + s];
                }
            }
        }
        self.recompute();
        Ok(())
    }

    /// Change of `(Σ bσσ, Σ Bππ)` if the signs on `bonds` were negated for
    /// the flavors in `flip`, without modifying the system.
    pub fn bond_flip_delta(&self, bonds: &[usize], flip: &[bool]) -> (i64, i64) {
        let f = self.flavors;
        let odd = flip.iter().filter(|&&x| x).count() % 2 == 1;
        let mut pair = 0i64;
        let mut prod = 0i64;
        for &b in bonds {
            let (i, j) = self.lattice.bond_sites(b);
            for s in 0..f {
                if flip[s] {
                    pair -= 2
                        * (self.signs[b * f + s] * self.spins[i * f + s] * self.spins[j * f + s])
                            as i64;
                }
            }
            if odd {
                prod -= 2 * (self.bond_product[b] * self.product[i] * self.product[j]) as i64;
            }
        }
        (pair, prod)
    }

    /// `ΔΨ` for the bond flip described by [`Self::bond_flip_delta`].
    pub fn bond_flip_psi(&self, bonds: &[usize], flip: &[bool]) -> i64 {
        let (wp, wq) = self.interaction.weights();
        let (a, b) = self.bond_flip_delta(bonds, flip);
        wp as i64 * a + wq as i64 * b
    }

    /// Exchanges configurations (spins and bookkeeping, not couplings or
    /// generators) with `other`.
    pub fn swap_configuration(&mut self, other: &mut SpinSystem) {
        core::mem::swap(&mut self.spins, &mut other.spins);
        core::mem::swap(&mut self.product, &mut other.product);
        core::mem::swap(&mut self.magnetization, &mut other.magnetization);
        core::mem::swap(&mut self.phi_pair, &mut other.phi_pair);
        core::mem::swap(&mut self.phi_product, &mut other.phi_product);
    }

    /// Uniform draw from the chain's generator.
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// One proposal per (site, flavor) in site-major order. Returns the number
    /// of accepted flips.
    pub fn sweep(&mut self) -> u64 {
        let f = self.flavors;
        let SpinSystem {
            lattice,
            spins,
            product,
            signs,
            bond_product,
            magnetization,
            phi_pair,
            phi_product,
            thresholds,
            rng,
            ..
        } = self;
        let table = &thresholds.0;
        let n = lattice.num_sites();
        assert!(spins.len() == n * f && product.len() == n);
        assert!(
            signs.len() == 2 * n * f && bond_product.len() == 2 * n && magnetization.len() == f
        );
        let mut accepted = 0u64;
        let (mut dpair, mut dprod) = (0i64, 0i64);
        for i in 0..n {
            let nb = lattice.neighbors(i).map(|x| x as usize);
            let bd = lattice.bonds(i).map(|x| x as usize);
            // SAFETY: lattice tables hold sites < n and bonds < 2n, and the
            // lengths were checked above.
            unsafe {
                let mut vf = 0i32;
                for k in 0..4 {
                    vf +=
                        (*bond_product.get_unchecked(bd[k]) * *product.get_unchecked(nb[k])) as i32;
                }
                let mut pi = *product.get_unchecked(i) as i32;
                for s in 0..f {
                    let si = *spins.get_unchecked(i * f + s) as i32;
                    let mut uf = 0i32;
                    for k in 0..4 {
                        uf += (*signs.get_unchecked(bd[k] * f + s)
                            * *spins.get_unchecked(nb[k] * f + s))
                            as i32;
                    }
                    let u = si * uf;
                    let v = pi * vf;
                    let t = *table.get_unchecked(((u + 4) / 2 * 5 + (v + 4) / 2) as usize);
                    let r = rng.next_u64();
                    // branch-free update: flip ∈ {0, 1}
                    let flip = i32::from(t == u64::MAX || r < t);
                    let m = 1 - 2 * flip;
                    *spins.get_unchecked_mut(i * f + s) = (si * m) as i8;
                    pi *= m;
                    *magnetization.get_unchecked_mut(s) -= i64::from(2 * si * flip);
                    dpair -= i64::from(2 * u * flip);
                    dprod -= i64::from(2 * v * flip);
                    accepted += flip as u64;
                }
                *product.get_unchecked_mut(i) = pi as i8;
            }
        }
        *phi_pair += dpair;
        *phi_product += dprod;
        self.sweeps += 1;
        accepted
    }

    /// Local field on `σ⁽ˢ⁾_i` from its neighbours, in units of `J`.
    pub fn local_field(&self, i: usize, s: usize) -> i32 {
        let f = self.flavors;
        let (_, wq) = self.interaction.weights();
        let nb = self.lattice.neighbors(i);
        let bd = self.lattice.bonds(i);
        let mut h = 0i32;
        for k in 0..4 {
            h += (self.signs[bd[k] as usize * f + s] * self.spins[nb[k] as usize * f + s]) as i32;
        }
        if wq != 0 {
            // π_i σ⁽ˢ⁾_i is the product of the other flavors at i
            let rest = (self.product[i] * self.spins[i * f + s]) as i32;
            let mut v = 0i32;
            for k in 0..4 {
                v += (self.bond_product[bd[k] as usize] * self.product[nb[k] as usize]) as i32;
            }
            h += rest * v;
        }
        h
    }
}
