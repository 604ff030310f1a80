//! Berezin–Toeplitz matrices `T_k = Π_k M_f Π_k` in the `e` basis.

use std::f64::consts::{PI, TAU};

use errorfunctions::ComplexErrorFunctions;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{inner_product, log_basis_norm_sq, scaled_pairing, FloquetTorus, Quadrature, ThetaCoefficients};
use crate::linalg::spectral_norm;
use crate::operator::{max_abs, Basis, MatrixFrame, OperatorMatrix};
use crate::symbol::{FourierSymbol, Frame};

/// Entries may move at most this much (orthonormal frame) when the
/// quadrature is doubled.
pub const REFINEMENT_TOLERANCE: f64 = 1e-8;

/// A Toeplitz matrix with its quadrature diagnostics.
#[derive(Clone, Debug)]
pub struct ToeplitzMatrix {
    /// `⟨e_{l'}, f e_l⟩ / ‖e_{l'}‖²`.
    pub raw: OperatorMatrix,
    /// `⟨ê_{l'}, f ê_l⟩` with `ê_l = e_l / ‖e_l‖`.
    pub orthonormal: OperatorMatrix,
    /// Resolution of the returned (refined) assembly.
    pub quadrature: Quadrature,
    /// Largest entry change between the two resolutions.
    pub max_change: f64,
    /// Spectral-norm noise floor of the orthonormal matrix.
    pub floor: f64,
}

fn log_norms(torus: &FloquetTorus) -> Result<Vec<f64>> {
    (0..torus.k() as usize).map(|l| log_basis_norm_sq(torus, l)).collect()
}

/// One assembly at a fixed resolution; returns `(raw, orthonormal)` entries.
pub fn assemble_toeplitz(
    torus: &FloquetTorus,
    sym: &FourierSymbol,
    quad: Quadrature,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    if sym.frame() != Frame::RealPlane {
        return Err(Error::Frame {
            expected: Frame::RealPlane,
            found: sym.frame(),
        });
    }
    let k = torus.k() as usize;
    let kf = torus.k() as f64;
    let scaled = scaled_pairing(torus, quad, |p, q| sym.evaluate(p, q))?;
    let ln = log_norms(torus)?;
    let g: Vec<f64> = (0..k).map(|l| torus.mu0(l).powi(2) / (2.0 * kf)).collect();
    let raw = DMatrix::from_fn(k, k, |r, c| scaled[(r, c)] * (g[r] + g[c] - ln[r]).exp());
    let ortho = DMatrix::from_fn(k, k, |r, c| scaled[(r, c)] * (g[r] + g[c] - 0.5 * (ln[r] + ln[c])).exp());
    Ok((raw, ortho))
}

/// Assembles at the torus resolution and at double resolution, and
/// returns the refined matrix if no entry moved more than
/// [`REFINEMENT_TOLERANCE`].
pub fn toeplitz_matrix(torus: &FloquetTorus, sym: &FourierSymbol) -> Result<ToeplitzMatrix> {
    let quad = torus.quadrature(sym.max_abs_n());
    let (_, coarse) = assemble_toeplitz(torus, sym, quad)?;
    let fine_quad = quad.refined();
    let (raw, fine) = assemble_toeplitz(torus, sym, fine_quad)?;
    let delta = &fine - &coarse;
    let max_change = max_abs(&delta);
    if !(max_change <= REFINEMENT_TOLERANCE) {
        return Err(Error::Accuracy {
            max_change,
            tolerance: REFINEMENT_TOLERANCE,
            n_p: quad.n_p,
            n_q: quad.n_q,
        });
    }
    let floor = spectral_norm(&delta) + rounding_floor(torus, sym, fine_quad);
    Ok(ToeplitzMatrix {
        raw: OperatorMatrix::new(Basis::E, MatrixFrame::Orthogonal, raw)?,
        orthonormal: OperatorMatrix::new(Basis::E, MatrixFrame::Orthonormal, fine)?,
        quadrature: fine_quad,
        max_change,
        floor,
    })
}

/// Rounding estimate `u (√nodes + 2J + 1) sup|f| √k` for the assembled matrix.
fn rounding_floor(torus: &FloquetTorus, sym: &FourierSymbol, quad: Quadrature) -> f64 {
    let terms = (quad.nodes() as f64).sqrt() + 2.0 * torus.truncation() as f64 + 1.0;
    f64::EPSILON * terms * sym.sup_bound().max(1.0) * (torus.k() as f64).sqrt()
}

/// Pieces `(log_factor, value)` with `Σ value · e^{log_factor} = ∫_0^1 e^{-kq² - βq} dq / (√π / 2√k)`.
fn q_integral_parts(k: f64, beta: Complex64) -> [(Complex64, Complex64); 2] {
    let sk = k.sqrt();
    let a = beta / (2.0 * sk);
    let b = a + sk;
    let zero = Complex64::new(0.0, 0.0);
    let shift = -beta - k; // a² - b²
    if a.re >= 0.0 {
        [(zero, a.erfcx()), (shift, -b.erfcx())]
    } else if b.re <= 0.0 {
        [(shift, (-b).erfcx()), (zero, -(-a).erfcx())]
    } else {
        [(a * a, b.erf() - a.erf()), (zero, zero)]
    }
}

/// Orthonormal-frame Toeplitz matrix of the mode `e^{inp} e^{-2πimq}`,
/// computed from the p-frequency selection rule `l' + j'k = l + jk + n`
/// and closed-form q-integrals.
pub fn mode_matrix_oracle(torus: &FloquetTorus, m: i32, n: i32) -> Result<OperatorMatrix> {
    let k = torus.k() as usize;
    let kf = torus.k() as f64;
    let ki = torus.k() as i64;
    let ln = log_norms(torus)?;
    let thetas: Vec<ThetaCoefficients> = (0..k).map(|l| ThetaCoefficients::new(torus, l)).collect::<Result<_>>()?;
    let jm = torus.truncation() as i64;
    let pref = (TAU * PI.sqrt() / (2.0 * kf.sqrt())).ln();
    let mut entries = DMatrix::<Complex64>::zeros(k, k);
    for l in 0..k {
        let lp = (l as i64 + n as i64).rem_euclid(ki);
        let r = (l as i64 + n as i64 - lp) / ki;
        let (src, dst) = (&thetas[l], &thetas[lp as usize]);
        let norm = -0.5 * (ln[l] + ln[lp as usize]);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in -jm..=jm {
            let jp = j + r;
            if jp.abs() > jm {
                continue;
            }
            let (i, ip) = ((j + jm) as usize, (jp + jm) as usize);
            let beta = Complex64::new(src.frequencies[i] + dst.frequencies[ip], TAU * m as f64);
            // conj(A'_{j'}) A_j in log form.
            let coeff = Complex64::new(
                src.log_modulus[i] + dst.log_modulus[ip] + norm + pref,
                src.phase[i] - dst.phase[ip],
            );
            for (lf, value) in q_integral_parts(kf, beta) {
                if value != Complex64::new(0.0, 0.0) {
                    acc += value * (coeff + lf).exp();
                }
            }
        }
        entries[(lp as usize, l)] = acc;
    }
    OperatorMatrix::new(Basis::E, MatrixFrame::Orthonormal, entries)
}

/// Coefficients `γ_l = ⟨e_l, g⟩ / ‖e_l‖²` of `Π_k g`.
///
/// `g` must obey the laws `g(z + 2π) = u^k g(z)` and
/// `g(z + i) = v^k e^{-ikz + k/2} g(z)`; both are spot-checked first.
pub fn project<G>(torus: &FloquetTorus, g: G) -> Result<Vec<Complex64>>
where
    G: Fn(Complex64) -> Complex64,
{
    check_quasi_periodic(torus, &g)?;
    let k = torus.k() as usize;
    let thetas: Vec<ThetaCoefficients> = (0..k).map(|l| ThetaCoefficients::new(torus, l)).collect::<Result<_>>()?;
    thetas
        .iter()
        .enumerate()
        .map(|(l, theta)| {
            let ip = inner_product(torus, |z| theta.eval(z), &g)?;
            Ok(ip * (-log_basis_norm_sq(torus, l)?).exp())
        })
        .collect()
}

const QP_TOLERANCE: f64 = 1e-6;

fn check_quasi_periodic<G>(torus: &FloquetTorus, g: &G) -> Result<()>
where
    G: Fn(Complex64) -> Complex64,
{
    let k = torus.k();
    let kf = k as f64;
    let uk = torus.u().powu(k);
    let vk = torus.v().powu(k);
    for s in 0..16 {
        // Fixed low-discrepancy points in [0, 2π) × [0, 1).
        let z = Complex64::new(TAU * ((s as f64 * 0.618_033_988_75) % 1.0), (s as f64 * 0.414_213_562_37) % 1.0);
        let base = g(z);
        let scale = base.norm().max(f64::MIN_POSITIVE);
        let p_err = (g(z + TAU) - uk * base).norm() / scale;
        let factor = vk * (-Complex64::i() * kf * z + kf / 2.0).exp();
        let q_err = (g(z + Complex64::i()) - factor * base).norm() / (factor.norm() * scale);
        if !(p_err <= QP_TOLERANCE && q_err <= QP_TOLERANCE) {
            return Err(Error::Domain(format!(
                "quasi-periodicity defect {:.3e} (p), {:.3e} (q) at z = {z}",
                p_err, q_err
            )));
        }
    }
    Ok(())
}
