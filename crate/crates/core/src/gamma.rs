//! Gamma function by Lanczos approximation (g = 7, 9 coefficients).
//!
//! The coefficient set is the widely circulated one derived from the GNU
//! Scientific Library. Relative accuracy on the positive axis is a few ulp,
//! comfortably below the 1e-10 target on [0.1, 10] where every constant in
//! this crate lives.

use crate::error::DomainError;
use crate::num;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

const PI: f64 = core::f64::consts::PI;

/// Gamma function for `x > 0`. Non-positive arguments are rejected.
pub fn gamma(x: f64) -> Result<f64, DomainError> {
    if !(x > 0.0) {
        return Err(DomainError { op: "gamma", arg: x });
    }
    Ok(gamma_pos(x))
}

/// Gamma for arguments the caller already knows to be positive.
pub(crate) fn gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // reflection keeps the series argument away from the pole side
        PI / (num::sin(PI * x) * gamma_pos(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let w = z + LANCZOS_G + 0.5;
        num::sqrt(2.0 * PI) * num::pow(w, z + 0.5) * num::exp(-w) * acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // 50-digit reference values computed with an arbitrary-precision
    // implementation before this module was written.
    const ORACLE: [(f64, f64); 19] = [
        (0.1, 9.513507698668731836292),
        (0.17, 5.451174180104210506471),
        (0.25, 3.625609908221908311931),
        (0.5, 1.772453850905516027298),
        (0.75, 1.225416702465177645129),
        (1.0, 1.0),
        (1.2, 0.918168742399760610641),
        (1.5, 0.8862269254527580136491),
        (2.0, 1.0),
        (2.7, 1.544685845850593764961),
        (3.3, 2.683437381955768793596),
        (3.6, 3.717023853036791487576),
        (4.1, 6.812622863016678867969),
        (5.0, 24.0),
        (6.4, 240.8337799834459387932),
        (7.5, 1871.254305797788346476),
        (8.9, 32569.40492585498952629),
        (9.6, 148696.1371826170175946),
        (10.0, 362880.0),
    ];

    #[test]
    fn matches_high_precision_oracle_on_0p1_to_10() {
        for &(x, want) in &ORACLE {
            let got = gamma(x).unwrap();
            let rel = ((got - want) / want).abs();
            assert!(rel <= 1e-10, "gamma({x}) = {got}, want {want}, rel {rel:e}");
        }
    }

    #[test]
    fn gamma_of_one_is_one() {
        assert!((gamma(1.0).unwrap() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn gamma_half_is_sqrt_pi() {
        let rel = (gamma(0.5).unwrap() - PI.sqrt()).abs() / PI.sqrt();
        assert!(rel <= 1e-12);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.3).is_err());
        assert!(gamma(f64::NAN).is_err());
    }
}
