//! Bessel functions needed by the pair-coherent-state rows: I₀ and I₁ for
//! complex argument and J₀ for real argument.
//!
//! The defining power series is used whenever it is well conditioned, i.e.
//! when the sum of term magnitudes is within a factor of 1e3 of the result.
//! Near the imaginary axis the series cancels catastrophically (I₀(iy) = J₀(y)
//! is O(1) while its terms grow like e^y), so those arguments are evaluated
//! with Miller's backward recurrence normalised by the generating-function
//! identities instead.

use num_complex::Complex64;

use crate::compensated::{ComplexSum, NeumaierSum};
use crate::error::{Error, Result};

pub type ComplexValue = Complex64;

/// Largest accepted argument magnitude; I₀ overflows shortly beyond it.
pub const ARGUMENT_GUARD: f64 = 700.0;

const TERM_CUTOFF: f64 = 1e-18;
const MAX_SERIES_TERMS: usize = 4000;
const MAX_CONDITION: f64 = 1e3;
const RESCALE_ABOVE: f64 = 1e200;

fn check_guard(magnitude: f64, what: &str) -> Result<()> {
    if !magnitude.is_finite() {
        return Err(Error::Domain(format!("{what}: non-finite argument")));
    }
    if magnitude > ARGUMENT_GUARD {
        return Err(Error::Domain(format!(
            "{what}: |argument| = {magnitude} exceeds {ARGUMENT_GUARD}"
        )));
    }
    Ok(())
}

/// Sums `first · Σ_k Π_{j<k} q/((j+1)(j+1+order))` and returns the value
/// together with the sum of term magnitudes.
fn modified_series(z: Complex64, order: u32) -> (Complex64, f64) {
    let q = z * z * 0.25;
    let mut term = if order == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        z * 0.5
    };
    let mut acc = ComplexSum::new();
    let mut magnitude = NeumaierSum::new();
    for k in 0..MAX_SERIES_TERMS {
        acc.add(term);
        magnitude.add(term.norm());
        let s = acc.value();
        if term.norm() < TERM_CUTOFF * s.norm() {
            break;
        }
        let kf = k as f64;
        term = term * q / ((kf + 1.0) * (kf + 1.0 + order as f64));
    }
    (acc.value(), magnitude.value())
}

/// Backward recurrence for (I₀(z), I₁(z)) with Re z ≥ 0, normalised through
/// e^z = I₀(z) + 2 Σ_{k≥1} I_k(z).
fn modified_miller(z: Complex64) -> (Complex64, Complex64) {
    debug_assert!(z.re >= 0.0 && z.norm() > 0.0);
    let start = 2 * (z.norm().ceil() as usize) + 60;
    let two_over_z = 2.0 / z;
    let mut upper = Complex64::new(0.0, 0.0);
    let mut current = Complex64::new(1e-30, 0.0);
    let mut norm = ComplexSum::new();
    let mut i1 = Complex64::new(0.0, 0.0);
    // current holds f_k, upper holds f_{k+1}
    for k in (1..=start).rev() {
        norm.add(current * 2.0);
        let lower = upper + two_over_z * (k as f64) * current;
        upper = current;
        current = lower;
        if k == 1 {
            i1 = upper;
        }
        if current.norm() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            current *= s;
            upper *= s;
            i1 *= s;
            let v = norm.value() * s;
            norm = ComplexSum::new();
            norm.add(v);
        }
    }
    norm.add(current);
    let scale = z.exp() / norm.value();
    (current * scale, i1 * scale)
}

fn modified_pair(z: Complex64) -> (Complex64, Complex64) {
    // I₀ is even and I₁ odd, so reflect into the right half plane.
    let (w, sign) = if z.re < 0.0 { (-z, -1.0) } else { (z, 1.0) };
    let (i0, i1) = modified_miller(w);
    (i0, i1 * sign)
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(z: ComplexValue) -> Result<ComplexValue> {
    check_guard(z.norm(), "bessel_i0")?;
    let (value, magnitude) = modified_series(z, 0);
    if magnitude <= MAX_CONDITION * value.norm() {
        return Ok(value);
    }
    Ok(modified_pair(z).0)
}

/// Modified Bessel function of the first kind, order one.
pub fn bessel_i1(z: ComplexValue) -> Result<ComplexValue> {
    check_guard(z.norm(), "bessel_i1")?;
    if z.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (value, magnitude) = modified_series(z, 1);
    if magnitude <= MAX_CONDITION * value.norm() {
        return Ok(value);
    }
    Ok(modified_pair(z).1)
}

/// Bessel function of the first kind, order zero, real argument.
pub fn bessel_j0(x: f64) -> Result<f64> {
    check_guard(x.abs(), "bessel_j0")?;
    let x = x.abs();
    let q = x * x * 0.25;
    let mut term = 1.0;
    let mut acc = NeumaierSum::new();
    let mut magnitude = NeumaierSum::new();
    for k in 0..MAX_SERIES_TERMS {
        acc.add(term);
        magnitude.add(term.abs());
        if term.abs() < TERM_CUTOFF * acc.value().abs() {
            break;
        }
        let kf = (k + 1) as f64;
        term *= -q / (kf * kf);
    }
    let value = acc.value();
    if magnitude.value() <= MAX_CONDITION * value.abs() {
        return Ok(value);
    }
    Ok(j0_miller(x))
}

/// Backward recurrence for J₀ normalised by 1 = J₀ + 2 Σ_{k≥1} J_{2k}.
fn j0_miller(x: f64) -> f64 {
    let mut start = 2 * (x.ceil() as usize) + 60;
    if start % 2 == 1 {
        start += 1;
    }
    let mut upper = 0.0;
    let mut current = 1e-30;
    let mut norm = NeumaierSum::new();
    for k in (1..=start).rev() {
        if k % 2 == 0 {
            norm.add(2.0 * current);
        }
        let lower = 2.0 * k as f64 / x * current - upper;
        upper = current;
        current = lower;
        if current.abs() > RESCALE_ABOVE {
            current /= RESCALE_ABOVE;
            upper /= RESCALE_ABOVE;
            let v = norm.value() / RESCALE_ABOVE;
            norm = NeumaierSum::new();
            norm.add(v);
        }
    }
    norm.add(current);
    current / norm.value()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn constant_and_odd_terms_at_origin() {
        assert_eq!(bessel_i0(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(bessel_i1(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn values_at_two() {
        assert!(rel(bessel_i0(c(2.0, 0.0)).unwrap(), c(2.2795853023360673, 0.0)) < 1e-14);
        assert!(rel(bessel_i1(c(2.0, 0.0)).unwrap(), c(1.5906368546373291, 0.0)) < 1e-14);
        assert!((bessel_j0(2.0).unwrap() - 0.2238907791412357).abs() < 1e-15);
        let i0i = bessel_i0(c(0.0, 2.0)).unwrap();
        assert!((i0i.re - 0.2238907791412357).abs() < 1e-15);
        assert_eq!(i0i.im, 0.0);
    }

    #[test]
    fn small_argument_ratio() {
        let x = 1e-6;
        let r = bessel_i1(c(x, 0.0)).unwrap().re / x;
        assert!((r - 0.5).abs() < 1e-9);
    }

    // Reference values from 40-digit mpmath evaluation.
    #[test]
    fn large_and_complex_arguments() {
        let cases = [
            (
                c(0.0, 50.0),
                c(0.05581232766925181, 0.0),
                c(0.0, -0.09751182812517514),
            ),
            (
                c(0.0, 30.0),
                c(-0.08636798358104021, 0.0),
                c(0.0, -0.11875106261662294),
            ),
            (
                c(15.0, 25.980762113533159),
                c(226423.04553754078, 75223.628212223638),
                c(223458.19320872302, 77897.664180855885),
            ),
            (
                c(50.0, 0.0),
                c(2.9325537838493363e20, 0.0),
                c(2.9030785901035568e20, 0.0),
            ),
            (
                c(-20.0, 5.0),
                c(6983902.3652421655, 42313571.090645329),
                c(-7072892.1448812609, -41264379.356774878),
            ),
            (
                c(3.0, -4.0),
                c(-3.3924877882755196, 1.3239458916287265),
                c(-3.0683095812730114, 1.5310157285037969),
            ),
        ];
        for (z, i0, i1) in cases {
            let got0 = bessel_i0(z).unwrap();
            let got1 = bessel_i1(z).unwrap();
            // the (15, 25.98) argument is given to 17 digits only
            let tol = if z.re == 15.0 { 1e-11 } else { 1e-12 };
            assert!(rel(got0, i0) < tol, "I0({z}) = {got0}, want {i0}");
            assert!(rel(got1, i1) < tol, "I1({z}) = {got1}, want {i1}");
        }
    }

    #[test]
    fn j0_reference_values() {
        let cases = [
            (50.0, 0.05581232766925181),
            (30.0, -0.08636798358104021),
            (10.5, -0.23664819446234713),
            (0.5, 0.9384698072408129),
            (1.0, 0.7651976865579666),
            (3.0, -0.26005195490193344),
        ];
        for (x, want) in cases {
            let got = bessel_j0(x).unwrap();
            assert!(((got - want) / want).abs() < 1e-12, "J0({x}) = {got}");
            assert_eq!(bessel_j0(-x).unwrap(), got);
        }
    }

    #[test]
    fn imaginary_axis_matches_j0() {
        for x in [0.5, 1.0, 3.0, 7.0, 12.0, 40.0] {
            let a = bessel_i0(c(0.0, x)).unwrap().re;
            let b = bessel_j0(x).unwrap();
            assert!((a - b).abs() < 1e-12, "x = {x}: {a} vs {b}");
        }
    }

    #[test]
    fn guard_rejects_large_arguments() {
        assert!(matches!(bessel_i0(c(700.5, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(bessel_i1(c(0.0, -701.0)), Err(Error::Domain(_))));
        assert!(matches!(bessel_j0(1e4), Err(Error::Domain(_))));
        assert!(matches!(bessel_j0(f64::NAN), Err(Error::Domain(_))));
        assert!(bessel_i0(c(700.0, 0.0)).unwrap().re.is_finite());
    }

    #[test]
    fn derivative_of_i0_is_i1() {
        let h = 1e-5;
        for x in [0.5, 2.0, 5.0] {
            let fd = (bessel_i0(c(x + h, 0.0)).unwrap().re - bessel_i0(c(x - h, 0.0)).unwrap().re)
                / (2.0 * h);
            assert!((fd - bessel_i1(c(x, 0.0)).unwrap().re).abs() < 1e-6);
        }
    }
}
