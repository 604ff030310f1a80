//! Weyl quantization through Weyl–Heisenberg translations.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bargmann::{bargmann_constants, conjugate_to_e_basis};
use crate::error::Result;
use crate::hilbert::FloquetTorus;
use crate::operator::{Basis, MatrixFrame, OperatorMatrix};
use crate::symbol::{pushforward_kappa, FourierSymbol, Frame};

/// Target row and phase of column `l` under `T̂(2πm/k, n/k)`.
fn translation_entry(torus: &FloquetTorus, m: i64, n: i64, l: i64) -> (usize, Complex64) {
    let k = torus.k() as i64;
    let lp = (l + n).rem_euclid(k);
    let r = (l + n - lp) / k;
    // e^{-iπ(mn + 2lm)/k}, with the integer reduced mod 2k first.
    let rational = (m * n + 2 * l * m).rem_euclid(2 * k) as f64;
    let angle = -PI * rational / k as f64 - torus.c() * m as f64 + torus.d() * (k * r) as f64;
    (lp as usize, Complex64::cis(angle))
}

/// Matrix of `T̂(2πm/k, n/k)` on `L_k`: column `l` goes to
/// `e^{-iπmn/k} u^{-m} e^{-2πilm/k} v^{kr} ε_{l'}`, `l' = (l + n) mod k`,
/// `r = (l + n - l')/k`.
pub fn translation_matrix(torus: &FloquetTorus, m: i32, n: i32) -> OperatorMatrix {
    let k = torus.k() as usize;
    let mut entries = DMatrix::<Complex64>::zeros(k, k);
    for l in 0..k {
        let (row, phase) = translation_entry(torus, m as i64, n as i64, l as i64);
        entries[(row, l)] = phase;
    }
    OperatorMatrix::new(Basis::Epsilon, MatrixFrame::Orthonormal, entries).expect("unit-modulus entries")
}

/// `Op^w_k(a) = Σ a_{m,n} T̂(2πm/k, n/k)`, summed in lexicographic `(m, n)` order.
pub fn quantize_weyl(torus: &FloquetTorus, sym: &FourierSymbol) -> Result<OperatorMatrix> {
    if sym.frame() != Frame::RealPlane {
        return Err(crate::Error::Frame {
            expected: Frame::RealPlane,
            found: sym.frame(),
        });
    }
    let k = torus.k() as usize;
    let mut entries = DMatrix::<Complex64>::zeros(k, k);
    for (m, n, a) in sym.iter() {
        for l in 0..k {
            let (row, phase) = translation_entry(torus, m as i64, n as i64, l as i64);
            entries[(row, l)] += a * phase;
        }
    }
    OperatorMatrix::new(Basis::Epsilon, MatrixFrame::Orthonormal, entries)
}

/// `Op^w_{Φ1,k}(b)` in the raw `e` basis, as `C Op^w_k(b ∘ κ) C^{-1}`.
pub fn quantize_weyl_complex(torus: &FloquetTorus, sym: &FourierSymbol) -> Result<OperatorMatrix> {
    let real = pushforward_kappa(sym)?;
    let eps = quantize_weyl(torus, &real)?;
    conjugate_to_e_basis(&eps, &bargmann_constants(torus))
}

/// `Σ b_{m,n} e^{-iπmn/k} e^{-n²/(2k)} e^{inz} f(z - 2πm/k + in/k)`.
pub fn apply_complex_weyl_pointwise<F>(torus: &FloquetTorus, sym: &FourierSymbol, f: F, z: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if sym.frame() != Frame::LambdaPhi1 {
        return Err(crate::Error::Frame {
            expected: Frame::LambdaPhi1,
            found: sym.frame(),
        });
    }
    let k = torus.k() as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, n, b) in sym.iter() {
        let (mf, nf) = (m as f64, n as f64);
        let shifted = z + Complex64::new(-2.0 * PI * mf / k, nf / k);
        let phase = (Complex64::new(-nf * nf / (2.0 * k), -PI * mf * nf / k) + Complex64::i() * nf * z).exp();
        acc += b * phase * f(shifted)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::eval_e;
    use crate::symbol::pullback_kappa;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_translation_is_identity() {
        let torus = FloquetTorus::new(5, 1.0, 2.0).unwrap();
        let t = translation_matrix(&torus, 0, 0);
        assert_eq!(t, OperatorMatrix::identity(Basis::Epsilon, MatrixFrame::Orthonormal, 5));
    }

    #[test]
    fn momentum_translation_is_diagonal() {
        let torus = FloquetTorus::new(6, 0.0, 0.0).unwrap();
        let t = translation_matrix(&torus, 1, 0);
        for l in 0..6 {
            for lp in 0..6 {
                let expected = if l == lp { Complex64::cis(-TAU * l as f64 / 6.0) } else { c(0.0, 0.0) };
                assert!((t.get(lp, l) - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn position_translation_is_cyclic_shift() {
        let torus = FloquetTorus::new(4, 0.0, 0.0).unwrap();
        let t = translation_matrix(&torus, 0, 1);
        for l in 0..4 {
            assert!((t.get((l + 1) % 4, l) - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn cos_2pi_q_is_diagonal_cosine() {
        let torus = FloquetTorus::new(7, 0.0, 0.0).unwrap();
        let half = c(0.5, 0.0);
        let sym = FourierSymbol::from_coefficients(Frame::RealPlane, [(1, 0, half), (-1, 0, half)]).unwrap();
        let m = quantize_weyl(&torus, &sym).unwrap();
        for l in 0..7 {
            for lp in 0..7 {
                let expected = if l == lp { (TAU * l as f64 / 7.0).cos() } else { 0.0 };
                assert!((m.get(lp, l) - c(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cos_p_is_hermitian_shift_sum() {
        // cos p carries n = ±1, so it quantizes to (S + S*)/2 with S the cyclic shift.
        let torus = FloquetTorus::new(7, 0.0, 0.0).unwrap();
        let m = quantize_weyl(&torus, &FourierSymbol::builtin("cos_p").unwrap()).unwrap();
        assert!(m.hermitian_defect() < 1e-15);
        let eigs = crate::linalg::hermitian_eigenvalues(m.entries());
        let mut expected: Vec<f64> = (0..7).map(|l| (TAU * l as f64 / 7.0).cos()).collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in eigs.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14 && a.abs() <= 1.0 + 1e-14);
        }
    }

    #[test]
    fn constant_symbol_scales_identity() {
        let torus = FloquetTorus::new(3, 0.5, 0.5).unwrap();
        let gamma = c(2.5, -1.0);
        let s = FourierSymbol::constant(gamma, Frame::RealPlane);
        let m = quantize_weyl(&torus, &s).unwrap();
        assert!(m.max_abs_diff(&OperatorMatrix::identity(Basis::Epsilon, MatrixFrame::Orthonormal, 3)).is_ok());
        for i in 0..3 {
            assert_eq!(m.get(i, i), gamma);
        }
        let w = quantize_weyl_complex(&torus, &pullback_kappa(&s).unwrap()).unwrap();
        for i in 0..3 {
            assert!((w.get(i, i) - gamma).norm() < 1e-15);
        }
    }

    #[test]
    fn frame_checks() {
        let torus = FloquetTorus::new(3, 0.0, 0.0).unwrap();
        let real = FourierSymbol::builtin("harper").unwrap();
        assert!(quantize_weyl_complex(&torus, &real).is_err());
        assert!(quantize_weyl(&torus, &pullback_kappa(&real).unwrap()).is_err());
    }

    #[test]
    fn position_mode_matches_pointwise_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let torus = FloquetTorus::new(5, 0.6, 1.7).unwrap();
        let sym = FourierSymbol::mode(0, 1, c(1.0, 0.0), Frame::LambdaPhi1);
        let w = quantize_weyl_complex(&torus, &sym).unwrap();
        for l in 0..5 {
            for _ in 0..50 {
                let z = Complex64::new(rng.gen_range(0.0..TAU), rng.gen_range(0.0..1.0));
                let direct = (-1.0 / 10.0f64).exp() * Complex64::cis(z.re) * (-z.im)
                    .exp()
                    * eval_e(&torus, l, z + c(0.0, 0.2)).unwrap();
                let via: Complex64 = (0..5).map(|lp| w.get(lp, l) * eval_e(&torus, lp, z).unwrap()).sum();
                let pointwise = apply_complex_weyl_pointwise(&torus, &sym, |x| eval_e(&torus, l, x), z).unwrap();
                assert!((via - direct).norm() / direct.norm() < 1e-9);
                assert!((pointwise - direct).norm() / direct.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pointwise_trivial_cases() {
        let torus = FloquetTorus::new(2, 0.0, 0.0).unwrap();
        let f = |z: Complex64| Ok(z * z + 1.0);
        let z = c(0.3, 0.4);
        let g = FourierSymbol::constant(c(3.0, 0.0), Frame::LambdaPhi1);
        assert_eq!(apply_complex_weyl_pointwise(&torus, &g, f, z).unwrap(), f(z).unwrap() * 3.0);
        let zero = FourierSymbol::constant(c(0.0, 0.0), Frame::LambdaPhi1);
        assert_eq!(apply_complex_weyl_pointwise(&torus, &zero, f, z).unwrap(), c(0.0, 0.0));
    }
}
