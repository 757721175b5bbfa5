//! Kitaev–Preskill combination of region negativities.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mc::estimators::negativity;
use crate::mc::MomentAccumulator;
use crate::region::KP_LABELS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KpFormula {
    /// `γ = -(E_A + E_B + E_C + E_ABC - E_AB - E_BC - E_AC)`.
    Full,
    /// `γ = -(2E_A - 2E_AC + E_ABC)`, exact for regions with `E_A = E_B`,
    /// `E_AC = E_BC` and `E_C = E_AB`.
    Symmetric,
}

impl KpFormula {
    /// Coefficients of `γ` over regions in the order of [`KP_LABELS`].
    pub fn coefficients(self) -> [f64; 7] {
        match self {
            KpFormula::Full => [-1.0, -1.0, -1.0, 1.0, 1.0, 1.0, -1.0],
            KpFormula::Symmetric => [-2.0, 0.0, 0.0, 0.0, 0.0, 2.0, -1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionValue {
    pub label: String,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativityResult {
    pub regions: Vec<RegionValue>,
    pub formula: KpFormula,
    pub gamma: f64,
    pub gamma_error: f64,
    pub geometry: String,
}

/// `γ_N` from the seven region negativities labelled as in [`KP_LABELS`].
///
/// Errors add in quadrature; with `covariance` (7 × 7, same order) the full
/// quadratic form is used instead.
pub fn kitaev_preskill(
    regions: &[RegionValue],
    formula: KpFormula,
    covariance: Option<&[[f64; 7]; 7]>,
    geometry: &str,
) -> Result<NegativityResult> {
    if regions.len() != 7 || regions.iter().zip(KP_LABELS).any(|(r, l)| r.label != l) {
        return Err(invalid("Kitaev–Preskill needs the regions A, B, C, AB, BC, AC, ABC in order"));
    }
    if regions.iter().any(|r| !r.value.is_finite() || !(r.error >= 0.0)) {
        return Err(invalid("region negativities must be finite with non-negative errors"));
    }
    let c = formula.coefficients();
    let gamma: f64 = c.iter().zip(regions).map(|(k, r)| k * r.value).sum();
    let var: f64 = match covariance {
        Some(cov) => (0..7).map(|i| (0..7).map(|j| c[i] * c[j] * cov[i][j]).sum::<f64>()).sum(),
        None => c.iter().zip(regions).map(|(k, r)| k * k * r.error * r.error).sum(),
    };
    Ok(NegativityResult {
        regions: regions.to_vec(),
        formula,
        gamma,
        gamma_error: libm::sqrt(var.max(0.0)),
        geometry: geometry.into(),
    })
}

/// Region values and their jackknife covariance from one accumulator whose
/// indicators are the seven regions in order.
pub fn regions_from_accumulator(
    acc: &MomentAccumulator,
    order: u32,
) -> Result<(Vec<RegionValue>, [[f64; 7]; 7])> {
    if acc.layout.regions != 7 {
        return Err(invalid("the accumulator must hold exactly seven regions"));
    }
    let regions: Vec<RegionValue> = (0..7)
        .map(|k| {
            let e = negativity(acc, k, order);
            RegionValue {
                label: KP_LABELS[k].into(),
                value: e.value,
                error: e.error,
            }
        })
        .collect();
    let scale = 1.0 / f64::from(order - 2);
    let e = |k: usize| {
        let idx = acc.layout.indicator(k);
        move |m: &[f64]| -scale * libm::log(m[idx])
    };
    let mut cov = [[0.0; 7]; 7];
    for i in 0..7 {
        for j in i..7 {
            let v = acc.jackknife_covariance(e(i), e(j));
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }
    Ok((regions, cov))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn values(v: [f64; 7], err: f64) -> Vec<RegionValue> {
        v.iter()
            .zip(KP_LABELS)
            .map(|(&value, l)| RegionValue { label: l.into(), value, error: err })
            .collect()
    }

    #[test]
    fn zero_regions_give_zero() {
        for f in [KpFormula::Full, KpFormula::Symmetric] {
            let r = kitaev_preskill(&values([0.0; 7], 0.0), f, None, "").unwrap();
            assert_eq!(r.gamma, 0.0);
        }
    }

    #[test]
    fn area_law_cancels_and_constant_survives() {
        // E_R = c |∂R| - γ with boundary lengths of a symmetric tripartition
        let boundary = [6.0, 6.0, 9.0, 9.0, 12.0, 12.0, 12.0];
        let mut v = [0.0; 7];
        for k in 0..7 {
            v[k] = 0.3 * boundary[k] - core::f64::consts::LN_2;
        }
        let r = kitaev_preskill(&values(v, 0.0), KpFormula::Full, None, "").unwrap();
        assert!((r.gamma - core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn quadrature_and_covariance_errors() {
        let r = kitaev_preskill(&values([1.0; 7], 0.1), KpFormula::Symmetric, None, "").unwrap();
        assert!((r.gamma_error - 0.3).abs() < 1e-12);
        let mut cov = [[0.0; 7]; 7];
        for i in 0..7 {
            cov[i][i] = 0.01;
        }
        let s = kitaev_preskill(&values([1.0; 7], 0.1), KpFormula::Symmetric, Some(&cov), "").unwrap();
        assert!((s.gamma_error - 0.3).abs() < 1e-12);
        // fully correlated A and AC cancel
        cov[0][5] = 0.01;
        cov[5][0] = 0.01;
        let t = kitaev_preskill(&values([1.0; 7], 0.1), KpFormula::Symmetric, Some(&cov), "").unwrap();
        assert!((t.gamma_error - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rejects_inconsistent_regions() {
        let mut v = values([0.0; 7], 0.0);
        v.swap(0, 1);
        assert!(kitaev_preskill(&v, KpFormula::Full, None, "").is_err());
        assert!(kitaev_preskill(&v[..6], KpFormula::Full, None, "").is_err());
        let mut w = values([0.0; 7], 0.0);
        w[2].value = f64::INFINITY;
        assert!(kitaev_preskill(&w, KpFormula::Full, None, "").is_err());
    }

    proptest! {
        #[test]
        fn formulas_agree_under_region_symmetry(a in -5.0f64..5.0, c in -5.0f64..5.0, ac in -5.0f64..5.0, abc in -5.0f64..5.0) {
            // E_B = E_A, E_AB = E_C, E_BC = E_AC
            let v = values([a, a, c, c, ac, ac, abc], 0.0);
            let full = kitaev_preskill(&v, KpFormula::Full, None, "").unwrap().gamma;
            let sym = kitaev_preskill(&v, KpFormula::Symmetric, None, "").unwrap().gamma;
            prop_assert!((full - sym).abs() < 1e-12);
        }
    }
}
