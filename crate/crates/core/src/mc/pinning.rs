//! Conditional pinning probabilities.
//!
//! The pinning indicator depends only on the spins at the sites of its
//! parity checks. Given all other spins, those sites form a small system
//! whose constrained and unconstrained partition functions are summed exactly
//! by a frontier sweep over the sites. Averaging the ratio over the chain
//! estimates the same probability as the bare indicator with far smaller
//! variance.

use alloc::vec;
use alloc::vec::Vec;

use super::lattice::SpinLattice;
use super::system::{Interaction, SpinSystem};
use crate::region::ParityCheck;

/// Largest number of frontier states a plan may need.
pub const MAX_FRONTIER_STATES: usize = 1 << 15;

#[derive(Debug, Clone)]
struct Step {
    /// Frontier slot of each processed neighbour and the connecting bond.
    inner: Vec<(usize, usize)>,
    /// Bonds (and far endpoints) to sites outside the constrained set.
    outer: Vec<(usize, usize)>,
    /// Checks completed by this site, as frontier slots of the other sites.
    checks: Vec<Vec<usize>>,
    /// Slots of the frontier (old frontier plus this site) that are kept.
    keep: Vec<usize>,
    width_before: usize,
}

/// A precomputed summation order for one region.
#[derive(Debug, Clone)]
pub struct ConditionalPinning {
    flavors: usize,
    steps: Vec<Step>,
}

impl ConditionalPinning {
    /// `None` if the region's frontier would exceed [`MAX_FRONTIER_STATES`].
    pub fn new(lattice: &SpinLattice, checks: &[ParityCheck], flavors: usize) -> Option<Self> {
        let mut sites: Vec<usize> = checks.iter().flat_map(|c| c.sites.iter().copied()).collect();
        sites.sort_unstable();
        sites.dedup();
        let index = |s: usize| sites.binary_search(&s).ok();
        let m = sites.len();
        // partners: bond neighbours in the set or co-members of a check
        let mut partners: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (a, &s) in sites.iter().enumerate() {
            for &j in lattice.neighbors(s) {
                if let Some(b) = index(j as usize) {
                    if b != a {
                        partners[a].push(b);
                    }
                }
            }
        }
        for c in checks {
            for &x in &c.sites {
                for &y in &c.sites {
                    let (a, b) = (index(x).unwrap_or(0), index(y).unwrap_or(0));
                    if a != b {
                        partners[a].push(b);
                    }
                }
            }
        }
        for p in partners.iter_mut() {
            p.sort_unstable();
            p.dedup();
        }
        // greedy order: most links to already placed sites first
        let mut placed = vec![false; m];
        let mut order = Vec::with_capacity(m);
        for _ in 0..m {
            let next = (0..m)
                .filter(|&a| !placed[a])
                .max_by_key(|&a| {
                    let links = partners[a].iter().filter(|&&b| placed[b]).count();
                    (links, usize::MAX - partners[a].len(), usize::MAX - a)
                })
                .unwrap_or(0);
            placed[next] = true;
            order.push(next);
        }
        let pos: Vec<usize> = {
            let mut p = vec![0; m];
            for (k, &a) in order.iter().enumerate() {
                p[a] = k;
            }
            p
        };
        let radix = 1usize << flavors;
        let mut frontier: Vec<usize> = Vec::new();
        let mut steps = Vec::with_capacity(m);
        for (k, &a) in order.iter().enumerate() {
            let s = sites[a];
            let mut inner = Vec::new();
            let mut outer = Vec::new();
            let nb = lattice.neighbors(s);
            let bd = lattice.bonds(s);
            for q in 0..4 {
                let j = nb[q] as usize;
                match index(j) {
                    Some(b) if pos[b] < k => {
                        let slot = frontier.iter().position(|&f| f == b)?;
                        inner.push((slot, bd[q] as usize));
                    }
                    Some(_) => {}
                    None => outer.push((bd[q] as usize, j)),
                }
            }
            let mut done = Vec::new();
            for c in checks {
                let members: Vec<usize> = c.sites.iter().filter_map(|&x| index(x)).collect();
                let last = members.iter().map(|&b| pos[b]).max();
                if last == Some(k) {
                    let mut slots = Vec::new();
                    for &b in &members {
                        if b != a {
                            slots.push(frontier.iter().position(|&f| f == b)?);
                        }
                    }
                    done.push(slots);
                }
            }
            let width_before = frontier.len();
            frontier.push(a);
            let keep: Vec<usize> = (0..frontier.len())
                .filter(|&slot| partners[frontier[slot]].iter().any(|&b| pos[b] > k))
                .collect();
            let states = radix.checked_pow((width_before + 1) as u32)?;
            if states > MAX_FRONTIER_STATES {
                return None;
            }
            steps.push(Step {
                inner,
                outer,
                checks: done,
                keep: keep.clone(),
                width_before,
            });
            frontier = keep.iter().map(|&slot| frontier[slot]).collect();
        }
        Some(ConditionalPinning { flavors, steps })
    }

    /// Probability that every check holds for every combination `πσ⁽ʳ⁾`,
    /// conditioned on the spins outside the constrained sites.
    pub fn probability(&self, sys: &SpinSystem) -> f64 {
        let f = self.flavors;
        let radix = 1usize << f;
        let j = sys.coupling();
        let product_on = sys.interaction() == Interaction::Replica;
        // local state x: bit s set means σ⁽ˢ⁾ = -1
        let spin = |x: usize, s: usize| if x >> s & 1 == 1 { -1i32 } else { 1 };
        let pi = |x: usize| if x.count_ones() % 2 == 1 { -1i32 } else { 1 };
        // bit r set means πσ⁽ʳ⁾ = -1
        let tau = |x: usize| if x.count_ones() % 2 == 1 { !x & (radix - 1) } else { x };
        let bond_term = |bond: usize, x: usize, y: usize| -> i32 {
            let mut e = 0;
            for s in 0..f {
                e += sys.sign(bond, s) as i32 * spin(x, s) * spin(y, s);
            }
            if product_on {
                e += sys.bond_product(bond) as i32 * pi(x) * pi(y);
            }
            e
        };
        let mut free = vec![1.0f64];
        let mut pinned = vec![1.0f64];
        let mut digits = vec![0usize; 32];
        for step in &self.steps {
            // field from fixed outside spins, per local state
            let mut local = vec![0i32; radix];
            for (x, l) in local.iter_mut().enumerate() {
                for &(bond, site) in &step.outer {
                    let y = (0..f).fold(0usize, |acc, s| acc | usize::from(sys.spin(site, s) < 0) << s);
                    *l += bond_term(bond, x, y);
                }
            }
            let width = step.width_before + 1;
            let kept = step.keep.len();
            let mut next_free = vec![0.0f64; radix.pow(kept as u32)];
            let mut next_pinned = vec![0.0f64; radix.pow(kept as u32)];
            for (idx, (&wf, &wp)) in free.iter().zip(&pinned).enumerate() {
                if wf == 0.0 && wp == 0.0 {
                    continue;
                }
                let mut rest = idx;
                for d in digits.iter_mut().take(step.width_before) {
                    *d = rest % radix;
                    rest /= radix;
                }
                for x in 0..radix {
                    digits[width - 1] = x;
                    let mut e = local[x];
                    for &(slot, bond) in &step.inner {
                        e += bond_term(bond, digits[slot], x);
                    }
                    let w = if e == 0 { 1.0 } else { libm::exp(j * f64::from(e)) };
                    let ok = step.checks.iter().all(|slots| {
                        slots.iter().fold(tau(x), |acc, &slot| acc ^ tau(digits[slot])) == 0
                    });
                    let mut out = 0usize;
                    for &slot in step.keep.iter().rev() {
                        out = out * radix + digits[slot];
                    }
                    next_free[out] += wf * w;
                    if ok {
                        next_pinned[out] += wp * w;
                    }
                }
            }
            let scale = next_free.iter().cloned().fold(0.0f64, f64::max);
            if scale > 0.0 && scale.is_finite() {
                next_free.iter_mut().for_each(|v| *v /= scale);
                next_pinned.iter_mut().for_each(|v| *v /= scale);
            }
            free = next_free;
            pinned = next_pinned;
        }
        let zf: f64 = free.iter().sum();
        let zp: f64 = pinned.iter().sum();
        if zf > 0.0 {
            zp / zf
        } else {
            0.0
        }
    }

    pub fn sites(&self) -> usize {
        self.steps.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{LoopKind, ToricCode};
    use crate::region::{parity_checks, plaquette_block};

    // brute-force conditional probability over the constrained spins
    fn brute(sys: &SpinSystem, checks: &[ParityCheck]) -> f64 {
        let mut sites: Vec<usize> = checks.iter().flat_map(|c| c.sites.iter().copied()).collect();
        sites.sort_unstable();
        sites.dedup();
        let f = sys.flavors();
        let bits = sites.len() * f;
        let mut work = sys.clone();
        let base = sys.spins().to_vec();
        let mut zf = 0.0;
        let mut zp = 0.0;
        for c in 0..1usize << bits {
            let mut spins = base.clone();
            for (k, &s) in sites.iter().enumerate() {
                for r in 0..f {
                    spins[s * f + r] = if c >> (k * f + r) & 1 == 1 { -1 } else { 1 };
                }
            }
            work.set_spins(&spins).unwrap();
            let w = libm::exp(-work.energy());
            zf += w;
            let ok = (0..f).all(|r| {
                checks.iter().all(|ch| {
                    ch.sites.iter().fold(1i8, |a, &i| a * work.product_spin(i) * work.spin(i, r)) == 1
                })
            });
            if ok {
                zp += w;
            }
        }
        zp / zf
    }

    #[test]
    fn matches_brute_force() {
        let code = ToricCode::new(4).unwrap();
        for (region, flavors) in [
            (plaquette_block(&code, 1, 1, 1, 1).unwrap(), 3),
            (plaquette_block(&code, 0, 0, 1, 2).unwrap(), 2),
            (plaquette_block(&code, 1, 1, 2, 1).unwrap(), 1),
        ] {
            let checks = parity_checks(&code, LoopKind::X, &region).unwrap();
            let mut sys = SpinSystem::new(4, flavors, Interaction::Replica, 0.37, 11).unwrap();
            sys.hot_start();
            for _ in 0..5 {
                sys.sweep();
            }
            let plan = ConditionalPinning::new(sys.lattice(), &checks, flavors).unwrap();
            let a = plan.probability(&sys);
            let b = brute(&sys, &checks);
            assert!((a - b).abs() < 1e-12 * b.max(1e-300), "{a} vs {b}");
        }
    }

    #[test]
    fn free_spins_give_counting_probability() {
        let code = ToricCode::new(6).unwrap();
        let region = plaquette_block(&code, 1, 1, 2, 2).unwrap();
        let checks = parity_checks(&code, LoopKind::X, &region).unwrap();
        let rank = crate::region::check_rank(&checks, code.num_sites()) as i32;
        let sys = SpinSystem::new(6, 3, Interaction::Replica, 0.0, 1).unwrap();
        let plan = ConditionalPinning::new(sys.lattice(), &checks, 3).unwrap();
        let p = plan.probability(&sys);
        // three combinations, two independent
        assert!((p - libm::pow(2.0, -2.0 * rank as f64)).abs() < 1e-15);
    }
}
