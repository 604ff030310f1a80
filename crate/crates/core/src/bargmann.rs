//! The Bargmann transform `T_φ1` through its diagonal action
//! `ε_l ↦ c_l e_l` on the bases.

use std::f64::consts::{PI, SQRT_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::hilbert::FloquetTorus;
use crate::operator::{Basis, MatrixFrame, OperatorMatrix};

/// `2^{-1/2} π^{-3/4}`.
pub fn c_phi1() -> f64 {
    1.0 / (SQRT_2 * PI.powf(0.75))
}

/// Diagonal constants of `T_φ1` (`c`) and `T_φ1^*` (`c_tilde`).
#[derive(Clone, Debug, PartialEq)]
pub struct BargmannDiagonal {
    pub c_phi1: f64,
    pub log_c: Vec<f64>,
    pub log_c_tilde: Vec<f64>,
    pub c: Vec<f64>,
    pub c_tilde: Vec<f64>,
}

impl BargmannDiagonal {
    pub fn k(&self) -> usize {
        self.c.len()
    }

    /// `max_l |c_l c̃_l - 1|`.
    pub fn inversion_defect(&self) -> f64 {
        self.c
            .iter()
            .zip(&self.c_tilde)
            .map(|(a, b)| (a * b - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `c_l = c_φ1 √(2π) k^{1/4} e^{-μ_0²/(2k)}` and
/// `c̃_l = c_φ1 k^{-1/4} √2 π e^{μ_0²/(2k)}`, both formed from logarithms.
pub fn bargmann_constants(torus: &FloquetTorus) -> BargmannDiagonal {
    let k = torus.k() as f64;
    let ln_cp = c_phi1().ln();
    let mut diag = BargmannDiagonal {
        c_phi1: c_phi1(),
        log_c: Vec::new(),
        log_c_tilde: Vec::new(),
        c: Vec::new(),
        c_tilde: Vec::new(),
    };
    for l in 0..torus.k() as usize {
        let mu0 = torus.mu0(l);
        let g = mu0 * mu0 / (2.0 * k);
        let lc = ln_cp + 0.5 * TAU.ln() + 0.25 * k.ln() - g;
        let lct = ln_cp - 0.25 * k.ln() + 0.5 * 2f64.ln() + PI.ln() + g;
        diag.log_c.push(lc);
        diag.log_c_tilde.push(lct);
        diag.c.push(lc.exp());
        diag.c_tilde.push(lct.exp());
    }
    diag
}

fn conjugate_diag(m: &DMatrix<Complex64>, left: &[f64], right: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * (left[r] + right[c]).exp())
}

/// `C M C^{-1}` (with `C^{-1}` taken as exactly reciprocal to `C`): an ε-basis matrix rewritten in the raw `e` basis.
pub fn conjugate_to_e_basis(m: &OperatorMatrix, diag: &BargmannDiagonal) -> Result<OperatorMatrix> {
    m.expect_basis(Basis::Epsilon)?;
    check_dim(m, diag)?;
    let inv: Vec<f64> = diag.log_c.iter().map(|v| -v).collect();
    let entries = conjugate_diag(m.entries(), &diag.log_c, &inv);
    OperatorMatrix::new(Basis::E, MatrixFrame::Orthogonal, entries)
}

/// `C^{-1} M C`: a raw `e`-basis matrix pulled back to the ε basis.
pub fn conjugate_to_epsilon_basis(m: &OperatorMatrix, diag: &BargmannDiagonal) -> Result<OperatorMatrix> {
    m.expect_basis(Basis::E)?;
    check_dim(m, diag)?;
    if m.frame() != MatrixFrame::Orthogonal {
        return Err(crate::Error::Input(
            "Bargmann conjugation acts on the raw (orthogonal) e frame".into(),
        ));
    }
    let inv: Vec<f64> = diag.log_c.iter().map(|v| -v).collect();
    let entries = conjugate_diag(m.entries(), &inv, &diag.log_c);
    OperatorMatrix::new(Basis::Epsilon, MatrixFrame::Orthonormal, entries)
}

fn check_dim(m: &OperatorMatrix, diag: &BargmannDiagonal) -> Result<()> {
    if m.k() == diag.k() {
        Ok(())
    } else {
        Err(crate::Error::Input(format!(
            "matrix dimension {} does not match Bargmann level {}",
            m.k(),
            diag.k()
        )))
    }
}

/// Closed-form transform of `x ↦ e^{iνx}`:
/// `c_φ1 k^{3/4} √(2π/k) e^{iνz} e^{-ν²/(2k)}`.
pub fn transform_exponential(torus: &FloquetTorus, nu: f64, z: Complex64) -> Complex64 {
    let k = torus.k() as f64;
    let ln_pref = c_phi1().ln() + 0.75 * k.ln() + 0.5 * (TAU / k).ln();
    (Complex64::new(ln_pref - nu * nu / (2.0 * k), 0.0) + Complex64::i() * nu * z).exp()
}
