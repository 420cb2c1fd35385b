//! Modified Bessel functions of the second kind, orders 0 and 1.
//!
//! For `x <= 2` the ascending series (Abramowitz & Stegun 9.6.11, 9.6.13) are
//! summed as polynomials in `y = x^2/4`. For `x > 2` the scaled functions
//! `sqrt(x) e^x K_n(x)` are smooth in `1/x` and are evaluated from Chebyshev
//! expansions in `t = 4/x - 1`. Both branches hold relative error near 1e-15.
#![allow(clippy::excessive_precision)]

use crate::constants::EULER_GAMMA;
use crate::{Error, Result};

/// Above this argument both functions are reported as exactly zero.
pub const UNDERFLOW_ARGUMENT: f64 = 700.0;

const SERIES_LIMIT: f64 = 2.0;

// y^k / (k!)^2
const I0_SERIES: [f64; 14] = [
    1.0,
    1.0,
    0.25,
    0.027777777777777777778,
    0.0017361111111111111111,
    0.000069444444444444444444,
    1.9290123456790123457e-6,
    3.9367598891408415218e-8,
    6.1511873267825648778e-10,
    7.5940584281266233059e-12,
    7.5940584281266233059e-14,
    6.2760813455591928148e-16,
    4.3583898233049950103e-18,
    2.5789288895295828463e-20,
];

// H_k y^k / (k!)^2 with H_k the harmonic numbers
const K0_SERIES: [f64; 14] = [
    0.0,
    1.0,
    0.375,
    0.050925925925925925926,
    0.0036168981481481481481,
    0.00015856481481481481481,
    4.7260802469135802469e-6,
    1.0207455998272324803e-7,
    1.6718048413148328114e-9,
    2.1483350211950276805e-11,
    2.2242756054762939135e-13,
    1.8952995870061529211e-15,
    1.3525001839484811536e-17,
    8.2013388136826374592e-20,
];

// y^k / (k! (k+1)!)
const I1_SERIES: [f64; 14] = [
    1.0,
    0.5,
    0.083333333333333333333,
    0.0069444444444444444444,
    0.00034722222222222222222,
    0.000011574074074074074074,
    2.7557319223985890653e-7,
    4.9209498614260519022e-9,
    6.8346525853139609753e-11,
    7.5940584281266233059e-13,
    6.9036894801151120963e-15,
    5.2300677879659940123e-17,
    3.3526075563884577002e-19,
    1.8420920639497020331e-21,
];

// (psi(k+1) + psi(k+2)) y^k / (k! (k+1)!)
const K1_SERIES: [f64; 14] = [
    -0.15443132980306572121,
    0.67278433509846713939,
    0.18157516696085563434,
    0.019182189839330562121,
    0.0011153594919665281061,
    0.000041422476892711430696,
    1.0715459140911808686e-6,
    2.0452860035938779413e-8,
    3.0020487465891878859e-10,
    3.4959287296928819208e-12,
    3.309914735250272068e-14,
    2.5986411321011287351e-16,
    1.7195232826992565241e-18,
    9.7212075188236180165e-21,
];

// Chebyshev coefficients of sqrt(x) e^x K0(x) in t = 4/x - 1, x in [2, inf).
const K0_CHEB: [f64; 26] = [
    1.2201515410329777273,
    -3.1448101311964500543e-2,
    1.5698838857300533749e-3,
    -1.2849549581627802638e-4,
    1.3949813718876499364e-5,
    -1.8317555227191194848e-6,
    2.7668136394450150761e-7,
    -4.6604898976879476656e-8,
    8.5740340174142260858e-9,
    -1.6975345093890615156e-9,
    3.5773972814003284472e-10,
    -7.9574892444773970377e-11,
    1.855949114954926555e-11,
    -4.5145978833745191751e-12,
    1.1403405882073442347e-12,
    -2.9800969231481783548e-13,
    8.0328907750683743694e-14,
    -2.2275133267462963604e-14,
    6.3400764762766459661e-15,
    -1.8485933779209071694e-15,
    5.5120559994043333649e-16,
    -1.6782311257549006383e-16,
    5.2103917776435541125e-17,
    -1.6475805939842632815e-17,
    5.300433771177335771e-18,
    -1.7331712005821000278e-18,
];

// Chebyshev coefficients of sqrt(x) e^x K1(x) in t = 4/x - 1, x in [2, inf).
const K1_CHEB: [f64; 26] = [
    1.3603130952422213347,
    1.0392373657681723844e-1,
    -2.8578168596227793868e-3,
    1.9521551847135163111e-4,
    -1.93619797416608296e-5,
    2.4064849478372171171e-6,
    -3.5019606030878125421e-7,
    5.7410841254500492923e-8,
    -1.0345762465678097027e-8,
    2.0150497551970346161e-9,
    -4.1903547593419255842e-10,
    9.2183151876053141258e-11,
    -2.1299678384277910216e-11,
    5.1396396734823435404e-12,
    -1.2891739609498229352e-12,
    3.3484196660522431201e-13,
    -8.9767051820101460692e-14,
    2.4771544242195986813e-14,
    -7.0198370892147688513e-15,
    2.0387031662398608799e-15,
    -6.0570472706430178228e-16,
    1.8380935752430454256e-16,
    -5.6894628491936483743e-17,
    1.7940510478863572914e-17,
    -5.7567444820733024503e-18,
    1.8778651901623267401e-18,
];

#[inline]
fn horner(y: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * y + c)
}

#[inline]
fn clenshaw(t: f64, coeffs: &[f64]) -> f64 {
    let two_t = 2.0 * t;
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs[1..].iter().rev() {
        let b0 = c + two_t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + t * b1 - b2
}

/// `K0(x)` without argument checking. Returns `inf` at zero and `NaN` for
/// negative input.
#[inline]
pub(crate) fn k0_unchecked(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        let y = 0.25 * x * x;
        let log_half = (0.5 * x).ln();
        -(log_half + EULER_GAMMA) * horner(y, &I0_SERIES) + horner(y, &K0_SERIES)
    } else if x <= UNDERFLOW_ARGUMENT {
        (-x).exp() / x.sqrt() * clenshaw(4.0 / x - 1.0, &K0_CHEB)
    } else {
        0.0
    }
}

/// `K1(x)` without argument checking.
#[inline]
pub(crate) fn k1_unchecked(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        let y = 0.25 * x * x;
        let log_half = (0.5 * x).ln();
        1.0 / x + log_half * 0.5 * x * horner(y, &I1_SERIES) - 0.25 * x * horner(y, &K1_SERIES)
    } else if x <= UNDERFLOW_ARGUMENT {
        (-x).exp() / x.sqrt() * clenshaw(4.0 / x - 1.0, &K1_CHEB)
    } else {
        0.0
    }
}

/// `(K0(x), K1(x))` sharing the logarithm or exponential between orders.
#[inline]
pub(crate) fn k0_k1_unchecked(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        let y = 0.25 * x * x;
        let log_half = (0.5 * x).ln();
        let k0 = -(log_half + EULER_GAMMA) * horner(y, &I0_SERIES) + horner(y, &K0_SERIES);
        let k1 = 1.0 / x + log_half * 0.5 * x * horner(y, &I1_SERIES)
            - 0.25 * x * horner(y, &K1_SERIES);
        (k0, k1)
    } else if x <= UNDERFLOW_ARGUMENT {
        let scale = (-x).exp() / x.sqrt();
        let t = 4.0 / x - 1.0;
        (scale * clenshaw(t, &K0_CHEB), scale * clenshaw(t, &K1_CHEB))
    } else {
        (0.0, 0.0)
    }
}

fn check_argument(op: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain { op, name: "x", value: x })
    }
}

/// Modified Bessel function of the second kind of order zero.
pub fn bessel_k0(x: f64) -> Result<f64> {
    check_argument("bessel_k0", x)?;
    Ok(k0_unchecked(x))
}

/// Modified Bessel function of the second kind of order one.
pub fn bessel_k1(x: f64) -> Result<f64> {
    check_argument("bessel_k1", x)?;
    Ok(k1_unchecked(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    // 40-digit reference values
    const REFERENCE: [(f64, f64, f64); 6] = [
        (1e-4, 9.326271913450274872963, 9999.999508686404478036),
        (0.5, 0.9244190712276658617819, 1.656441120003300893696),
        (1.0, 0.4210244382407083333356, 0.6019072301972345747375),
        (2.0, 0.1138938727495334356527, 0.1398658818165224272846),
        (6.0, 0.001243994328013123085232, 0.001343919717735509005652),
        (30.0, 2.132477496463056371167e-14, 2.167732001891549424867e-14),
    ];

    #[test]
    fn matches_reference_values() {
        for (x, k0, k1) in REFERENCE {
            let got0 = bessel_k0(x).unwrap();
            let got1 = bessel_k1(x).unwrap();
            assert!(((got0 - k0) / k0).abs() < 1e-14, "K0({x}) = {got0}");
            assert!(((got1 - k1) / k1).abs() < 1e-14, "K1({x}) = {got1}");
        }
    }

    #[test]
    fn branches_agree_at_switch_point() {
        let below = 2.0 - 1e-12;
        let above = 2.0 + 1e-12;
        // the gap is the slope times 2e-12: K0' = -K1, K1' = -K0 - K1/x
        let k0_gap = k0_unchecked(below) - k0_unchecked(above);
        let k1_gap = k1_unchecked(below) - k1_unchecked(above);
        assert!((k0_gap - 0.139_865_881_816_522_4 * 2e-12).abs() < 1e-15);
        assert!((k1_gap - (0.113_893_872_749_533_4 + 0.069_932_940_908_261_2) * 2e-12).abs() < 1e-15);
    }

    #[test]
    fn paired_evaluation_matches_single() {
        for &x in &[1e-3, 0.7, 1.99, 2.01, 15.0, 650.0] {
            let (k0, k1) = k0_k1_unchecked(x);
            assert_eq!(k0, k0_unchecked(x));
            assert_eq!(k1, k1_unchecked(x));
        }
    }

    #[test]
    fn small_argument_asymptote_of_k1() {
        for &x in &[1e-6, 1e-8, 1e-10] {
            assert!((bessel_k1(x).unwrap() * x - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn underflow_region_is_zero() {
        assert_eq!(bessel_k0(701.0).unwrap(), 0.0);
        assert_eq!(bessel_k1(1e6).unwrap(), 0.0);
        assert!(bessel_k0(699.0).unwrap() > 0.0);
    }

    #[test]
    fn rejects_non_positive_arguments() {
        assert!(bessel_k0(0.0).is_err());
        assert!(bessel_k1(-1.0).is_err());
        assert!(bessel_k0(f64::NAN).is_err());
    }
}
