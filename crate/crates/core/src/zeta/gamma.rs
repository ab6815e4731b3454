//! Complex log-gamma on the right half-plane.

use num_complex::Complex64;

use crate::error::{Error, Result};

const LN_2PI_HALF: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k-1)) for k = 1..=10
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

/// `log Gamma(z)` for `Re z > 0`, on the branch that is continuous in the
/// right half-plane and real on the positive axis.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re > 0.0) {
        return Err(Error::Domain(format!("ln_gamma needs Re z > 0, got {z}")));
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    let w2 = w * w;
    let mut series = Complex64::new(0.0, 0.0);
    let mut wp = w;
    for c in STIRLING {
        series += c / wp;
        wp *= w2;
    }
    Ok((w - 0.5) * w.ln() - w + LN_2PI_HALF + series - shift)
}

/// `Gamma(z)` for `Re z > 0`.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(ln_gamma(z)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_values() {
        let c = |x: f64| Complex64::new(x, 0.0);
        assert!((gamma(c(5.0)).unwrap().re - 24.0).abs() < 1e-12);
        assert!((gamma(c(0.5)).unwrap().re - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((ln_gamma(c(100.0)).unwrap().re - 359.134_205_369_575_4).abs() < 1e-10);
        assert!(ln_gamma(c(-1.0)).is_err());
    }

    #[test]
    fn recurrence_and_reflection_on_the_imaginary_direction() {
        // Gamma(z+1) = z Gamma(z)
        for z in [Complex64::new(0.3, 4.0), Complex64::new(2.5, -17.0), Complex64::new(0.25, 300.0)] {
            let lhs = ln_gamma(z + 1.0).unwrap();
            let rhs = ln_gamma(z).unwrap() + z.ln();
            assert!((lhs - rhs).norm() < 1e-11, "{z}");
        }
        // |Gamma(1/2 + i t)|^2 = pi / cosh(pi t)
        let t = 3.0;
        let g = gamma(Complex64::new(0.5, t)).unwrap();
        let expected = std::f64::consts::PI / (std::f64::consts::PI * t).cosh();
        assert!((g.norm_sqr() / expected - 1.0).abs() < 1e-12);
    }
}
