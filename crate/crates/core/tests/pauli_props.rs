//! Algebraic identities of Pauli strings, region signs and the toric code.

use proptest::prelude::*;
use toricdiag_core::code::{Cycle, EdgeDir, LoopKind, ToricCode};
use toricdiag_core::pauli::{commutation_sign, region_sign, y_phase, EdgeSet, PauliString, Sign};

const N: usize = 18;

fn pauli() -> impl Strategy<Value = PauliString> {
    (0u64..1 << N, 0u64..1 << N).prop_map(|(x, z)| PauliString::from_masks(N, x, z))
}

fn region() -> impl Strategy<Value = EdgeSet> {
    (0u64..1 << N).prop_map(|m| EdgeSet::from_edges(N, (0..N).filter(|&e| m >> e & 1 == 1)).unwrap())
}

fn translate(code: &ToricCode, e: usize, dr: isize, dc: isize) -> usize {
    let (dir, r, c) = code.edge_coords(e);
    let (r, c) = (r as isize + dr, c as isize + dc);
    match dir {
        EdgeDir::Horizontal => code.h_edge(r, c),
        EdgeDir::Vertical => code.v_edge(r, c),
    }
}

fn translate_pauli(code: &ToricCode, g: &PauliString, dr: isize, dc: isize) -> PauliString {
    let n = code.num_qubits();
    let x = PauliString::x_on(n, (0..n).filter(|&q| g.x_bit(q)).map(|q| translate(code, q, dr, dc)));
    let z = PauliString::z_on(n, (0..n).filter(|&q| g.z_bit(q)).map(|q| translate(code, q, dr, dc)));
    x.compose(&z).unwrap()
}

proptest! {
    #[test]
    fn commutation_is_bilinear(g1 in pauli(), g2 in pauli(), h in pauli()) {
        let g = g1.compose(&g2).unwrap();
        prop_assert_eq!(
            commutation_sign(&g, &h).unwrap(),
            commutation_sign(&g1, &h).unwrap() * commutation_sign(&g2, &h).unwrap()
        );
        prop_assert_eq!(commutation_sign(&g, &h).unwrap(), commutation_sign(&h, &g).unwrap());
    }

    #[test]
    fn region_sign_splits_over_complement(g in pauli(), h in pauli(), a in region()) {
        let inside = region_sign(&g, &h, &a).unwrap();
        let outside = region_sign(&g, &h, &a.complement()).unwrap();
        prop_assert_eq!(inside * outside, commutation_sign(&g, &h).unwrap());
        if commutation_sign(&g, &h).unwrap() == Sign::Plus {
            prop_assert_eq!(inside, outside);
        }
    }

    #[test]
    fn region_sign_is_bilinear(g1 in pauli(), g2 in pauli(), h in pauli(), a in region()) {
        let g = g1.compose(&g2).unwrap();
        prop_assert_eq!(
            region_sign(&g, &h, &a).unwrap(),
            region_sign(&g1, &h, &a).unwrap() * region_sign(&g2, &h, &a).unwrap()
        );
    }

    #[test]
    fn y_phase_composes_with_region_sign(g in pauli(), h in pauli(), a in region()) {
        let gh = g.compose(&h).unwrap();
        prop_assert_eq!(
            y_phase(&gh, &a).unwrap(),
            y_phase(&g, &a).unwrap() * y_phase(&h, &a).unwrap() * region_sign(&g, &h, &a).unwrap()
        );
    }

    #[test]
    fn restriction_agrees_with_region_sign(g in pauli(), h in pauli(), a in region()) {
        let (ga, ha) = (g.restrict(&a).unwrap(), h.restrict(&a).unwrap());
        prop_assert_eq!(commutation_sign(&ga, &ha).unwrap(), region_sign(&g, &h, &a).unwrap());
        prop_assert_eq!(y_phase(&g, &a).unwrap(), y_phase(&ga, &EdgeSet::full(N)).unwrap());
    }

    #[test]
    fn stabilizers_commute_with_everything_in_the_code(
        l in 2usize..6,
        picks in proptest::collection::vec(any::<u16>(), 4),
    ) {
        let code = ToricCode::new(l).unwrap();
        let sites = code.num_sites();
        let ops = [
            code.vertex_stabilizer(picks[0] as usize % sites).clone(),
            code.plaquette_stabilizer(picks[1] as usize % sites).clone(),
            code.vertex_stabilizer(picks[2] as usize % sites).clone(),
            code.plaquette_stabilizer(picks[3] as usize % sites).clone(),
        ];
        for a in &ops {
            for b in &ops {
                prop_assert_eq!(commutation_sign(a, b).unwrap(), Sign::Plus);
            }
            for kind in [LoopKind::X, LoopKind::Z] {
                for cycle in [Cycle::L1, Cycle::L2] {
                    prop_assert_eq!(commutation_sign(a, &code.logical(kind, cycle)).unwrap(), Sign::Plus);
                }
            }
        }
    }

    #[test]
    fn region_sign_is_translation_invariant(
        l in 3usize..6,
        xs in any::<u64>(),
        zs in any::<u64>(),
        hx in any::<u64>(),
        hz in any::<u64>(),
        mask in any::<u64>(),
        dr in 0isize..6,
        dc in 0isize..6,
    ) {
        let code = ToricCode::new(l).unwrap();
        let n = code.num_qubits();
        let keep = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let g = PauliString::from_masks(n, xs & keep, zs & keep);
        let h = PauliString::from_masks(n, hx & keep, hz & keep);
        let a = EdgeSet::from_edges(n, (0..n).filter(|&e| mask >> e & 1 == 1)).unwrap();
        let ta = EdgeSet::from_edges(n, a.iter().map(|e| translate(&code, e, dr, dc))).unwrap();
        let (tg, th) = (translate_pauli(&code, &g, dr, dc), translate_pauli(&code, &h, dr, dc));
        prop_assert_eq!(region_sign(&g, &h, &a).unwrap(), region_sign(&tg, &th, &ta).unwrap());
        prop_assert_eq!(y_phase(&g, &a).unwrap(), y_phase(&tg, &ta).unwrap());
        prop_assert_eq!(g.weight_in(&a).unwrap(), tg.weight_in(&ta).unwrap());
    }
}

#[test]
fn logical_pairs_anticommute_by_label() {
    for l in 2..7 {
        let code = ToricCode::new(l).unwrap();
        for c1 in [Cycle::L1, Cycle::L2] {
            for c2 in [Cycle::L1, Cycle::L2] {
                let s = commutation_sign(&code.logical(LoopKind::Z, c1), &code.logical(LoopKind::X, c2)).unwrap();
                assert_eq!(s == Sign::Minus, c1 == c2, "L={l} {c1:?} {c2:?}");
            }
        }
    }
}
