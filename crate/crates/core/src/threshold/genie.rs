//! Genie-aided single-vertex estimators.

use crate::error::Result;
use crate::graph::{DegreeProfile, ModelParams};
use crate::sdp::MleWeights;

/// `sign(d1 − d2)`, ties to `+1`.
pub fn genie_sym(d: &DegreeProfile) -> i8 {
    if d.d1 - d.d2 >= 0.0 {
        1
    } else {
        -1
    }
}

/// `d1 ψ1 − d2 ψ2 + (n/2) log((1 − p1)/(1 − p2))` on raw degrees.
pub fn genie_asym_statistic(raw_d1: u64, raw_d2: u64, p: &ModelParams) -> Result<f64> {
    let w = MleWeights::from_params(p)?;
    let half = p.n as f64 / 2.0;
    Ok(raw_d1 as f64 * w.psi1 - raw_d2 as f64 * w.psi2
        + half * ((1.0 - p.p1) / (1.0 - p.p2)).ln())
}

/// Sign of [`genie_asym_statistic`], ties to `+1`.
pub fn genie_asym(raw_d1: u64, raw_d2: u64, p: &ModelParams) -> Result<i8> {
    Ok(if genie_asym_statistic(raw_d1, raw_d2, p)? >= 0.0 {
        1
    } else {
        -1
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_signs() {
        let d = |d1, d2| DegreeProfile { d1, d2 };
        assert_eq!(genie_sym(&d(2.0, 1.0)), 1);
        assert_eq!(genie_sym(&d(1.0, 2.0)), -1);
        assert_eq!(genie_sym(&d(1.0, 1.0)), 1);
    }

    #[test]
    fn equal_rates_reduce_to_symmetric() {
        let p = ModelParams::new(200, 9.0, 9.0, 2.0).unwrap();
        let w = MleWeights::from_params(&p).unwrap();
        for (a, b) in [(10u64, 3u64), (3, 10), (7, 7), (0, 1)] {
            let s = genie_asym_statistic(a, b, &p).unwrap();
            assert!((s - w.psi1 * (a as f64 - b as f64)).abs() < 1e-12);
            let d = DegreeProfile {
                d1: a as f64,
                d2: b as f64,
            };
            assert_eq!(genie_asym(a, b, &p).unwrap(), genie_sym(&d));
        }
    }

    #[test]
    fn positive_at_expected_community_one_degrees() {
        for (a1, a2, b) in [(26.3, 12.5, 10.0), (12.0, 30.0, 5.0), (9.0, 9.0, 1.0)] {
            let p = ModelParams::new(1000, a1, a2, b).unwrap();
            let half = p.n as f64 / 2.0;
            let w = MleWeights::from_params(&p).unwrap();
            let s = half * p.p1 * w.psi1 - half * p.q * w.psi2 + half * ((1.0 - p.p1) / (1.0 - p.p2)).ln();
            assert!(s > 0.0);
            // Community two's expected degrees land on the other side.
            let t = half * p.q * w.psi1 - half * p.p2 * w.psi2 + half * ((1.0 - p.p1) / (1.0 - p.p2)).ln();
            assert!(t < 0.0);
        }
    }
}
