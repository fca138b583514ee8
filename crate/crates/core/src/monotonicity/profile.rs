//! Cubic smoothstep test profiles φ_a.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// φ_a(t) = 1 on [0, a], 1 − 3u² + 2u³ with u = (t − a)/(1 − a) on [a, 1],
/// 0 for t ≥ 1. C¹, nonincreasing, constant near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestProfile {
    plateau: f64,
}

impl TestProfile {
    pub fn new(plateau: f64) -> Result<Self> {
        if !(plateau > 0.0 && plateau < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "profile plateau must lie in (0, 1), got {plateau}"
            )));
        }
        Ok(Self { plateau })
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn value(&self, t: f64) -> f64 {
        let a = self.plateau;
        if t <= a {
            1.0
        } else if t >= 1.0 {
            0.0
        } else {
            let u = (t - a) / (1.0 - a);
            1.0 - u * u * (3.0 - 2.0 * u)
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let a = self.plateau;
        if t <= a || t >= 1.0 {
            0.0
        } else {
            let u = (t - a) / (1.0 - a);
            -6.0 * u * (1.0 - u) / (1.0 - a)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_sided_derivatives_match() {
        let p = TestProfile::new(0.4).unwrap();
        let h = 1e-7;
        for knot in [0.4, 1.0] {
            let left = (p.value(knot) - p.value(knot - h)) / h;
            let right = (p.value(knot + h) - p.value(knot)) / h;
            assert!((left - right).abs() < 1e-6);
            assert!(p.derivative(knot - 1e-12).abs() < 1e-10);
            assert!(p.derivative(knot + 1e-12).abs() < 1e-10);
        }
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(0.4), 1.0);
        assert_eq!(p.value(1.0), 0.0);
    }

    #[test]
    fn bad_plateau() {
        assert!(TestProfile::new(0.0).is_err());
        assert!(TestProfile::new(1.0).is_err());
        assert!(TestProfile::new(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn nonincreasing_with_matching_derivative(a in 0.05f64..0.95, t in 0.0f64..1.2, dt in 0.0f64..0.3) {
            let p = TestProfile::new(a).unwrap();
            prop_assert!(p.value(t + dt) <= p.value(t));
            prop_assert!(p.derivative(t) <= 0.0);
            let h = 1e-6;
            if t > h && (t - a).abs() > 2.0 * h && (t - 1.0).abs() > 2.0 * h {
                let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
                prop_assert!((fd - p.derivative(t)).abs() < 1e-5);
            }
        }

        #[test]
        fn larger_plateau_dominates(a1 in 0.05f64..0.9, gap in 0.0f64..0.09, t in 0.0f64..1.1) {
            let p1 = TestProfile::new(a1).unwrap();
            let p2 = TestProfile::new(a1 + gap).unwrap();
            prop_assert!(p1.value(t) <= p2.value(t));
            let indicator = if t < 1.0 { 1.0 } else { 0.0 };
            prop_assert!(p2.value(t) <= indicator);
        }
    }
}
