//! The quantum spaces: theta-series basis `e_l` of `H_k`, the weighted
//! pairing of `G_k`, and closed-form basis norms.
//!
//! `ε_l` has no pointwise values; `L_k` is modelled as `C^k` with `(ε_l)`
//! orthonormal and never evaluated.

use std::f64::consts::{PI, TAU};
use std::num::NonZeroUsize;

use errorfunctions::RealErrorFunctions;
use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Basis, MatrixFrame, OperatorMatrix};

/// Node counts for the `G_k` pairing: trapezoid in `p`, Gauss–Legendre in `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadrature {
    pub n_p: usize,
    pub n_q: usize,
}

impl Quadrature {
    /// Default resolution at level `k` for integrands carrying p-frequencies
    /// up to `n_sym` on top of the basis products.
    pub fn default_for(k: u32, n_sym: u32) -> Self {
        let k = k as usize;
        let n_sym = n_sym as usize;
        Self {
            n_p: (4 * k).max(4 * k + 4 * n_sym + 64),
            n_q: 4 * k + 32,
        }
    }

    pub fn refined(self) -> Self {
        Self {
            n_p: 2 * self.n_p,
            n_q: 2 * self.n_q,
        }
    }

    pub fn nodes(self) -> usize {
        self.n_p * self.n_q
    }
}

/// Quantization context: level `k`, Floquet angles `c`, `d` with
/// `u = e^{ic}`, `v = e^{id}`, theta truncation `J` and quadrature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloquetTorus {
    k: u32,
    c: f64,
    d: f64,
    j: u32,
    quad: Option<Quadrature>,
}

impl FloquetTorus {
    pub fn new(k: u32, c: f64, d: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("level k must be >= 1".into()));
        }
        if !(c.is_finite() && d.is_finite()) {
            return Err(Error::Input("Floquet angles must be finite".into()));
        }
        Ok(Self {
            k,
            c: reduce_angle(c),
            d: reduce_angle(d),
            j: default_truncation(k),
            quad: None,
        })
    }

    /// Keeps `c` and `d` exactly as given, without reducing mod 2π. The
    /// complex powers of `u`, `v` depend on the branch, so this selects a
    /// different (but equivalent up to scalars) basis.
    pub fn with_branch_angles(k: u32, c: f64, d: f64) -> Result<Self> {
        let mut torus = Self::new(k, c, d)?;
        torus.c = c;
        torus.d = d;
        Ok(torus)
    }

    pub fn with_truncation(mut self, j: u32) -> Result<Self> {
        if j == 0 {
            return Err(Error::Precondition("theta truncation J must be >= 1".into()));
        }
        self.j = j;
        Ok(self)
    }

    pub fn with_quadrature(mut self, n_p: usize, n_q: usize) -> Result<Self> {
        let min = 4 * self.k as usize;
        if n_p < min || n_q < min {
            return Err(Error::Precondition(format!(
                "quadrature ({n_p}, {n_q}) below the minimum 4k = {min}"
            )));
        }
        self.quad = Some(Quadrature { n_p, n_q });
        Ok(self)
    }

    /// Same angles and truncation at a different level; a quadrature
    /// override is dropped since its minimum scales with `k`.
    pub fn at_level(&self, k: u32) -> Result<Self> {
        let mut torus = Self::with_branch_angles(k, self.c, self.d)?;
        if self.j != default_truncation(self.k) {
            torus.j = self.j;
        }
        Ok(torus)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn u(&self) -> Complex64 {
        Complex64::cis(self.c)
    }

    pub fn v(&self) -> Complex64 {
        Complex64::cis(self.d)
    }

    pub fn truncation(&self) -> u32 {
        self.j
    }

    pub fn quadrature_override(&self) -> Option<Quadrature> {
        self.quad
    }

    /// The user override if set, else [`Quadrature::default_for`].
    pub fn quadrature(&self, n_sym: u32) -> Quadrature {
        self.quad.unwrap_or_else(|| Quadrature::default_for(self.k, n_sym))
    }

    /// `μ_{l,0} = l + ck/(2π)`.
    pub fn mu0(&self, l: usize) -> f64 {
        l as f64 + self.c * self.k as f64 / TAU
    }

    pub(crate) fn check_index(&self, l: usize) -> Result<()> {
        if l < self.k as usize {
            Ok(())
        } else {
            Err(Error::Index {
                index: l as i64,
                bound: self.k as usize,
            })
        }
    }
}

fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `max(6, ceil(5 + sqrt(90/k)))`.
pub fn default_truncation(k: u32) -> u32 {
    let j = (5.0 + (90.0 / k as f64).sqrt()).ceil() as u32;
    j.max(6)
}

/// Series data of `e_l(z) = Σ_{|j|<=J} A_j e^{iμ_j z}` with
/// `μ_j = l + jk + ck/(2π)` and
/// `A_j = v^{-kj} e^{-j(l + ck/(2π)) - kj²/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaCoefficients {
    pub l: usize,
    pub k: u32,
    pub j_max: u32,
    /// `μ_j` for `j = -J..=J`.
    pub frequencies: Vec<f64>,
    /// `ln |A_j| = (μ_0² - μ_j²)/(2k)`.
    pub log_modulus: Vec<f64>,
    /// `arg A_j = -kdj`.
    pub phase: Vec<f64>,
}

impl ThetaCoefficients {
    pub fn new(torus: &FloquetTorus, l: usize) -> Result<Self> {
        torus.check_index(l)?;
        let k = torus.k as f64;
        let mu0 = torus.mu0(l);
        let jm = torus.j as i64;
        let mut frequencies = Vec::with_capacity(2 * torus.j as usize + 1);
        let mut log_modulus = Vec::with_capacity(frequencies.capacity());
        let mut phase = Vec::with_capacity(frequencies.capacity());
        for j in -jm..=jm {
            let mu = mu0 + j as f64 * k;
            frequencies.push(mu);
            log_modulus.push((mu0 * mu0 - mu * mu) / (2.0 * k));
            phase.push(-k * torus.d * j as f64);
        }
        Ok(Self {
            l,
            k: torus.k,
            j_max: torus.j,
            frequencies,
            log_modulus,
            phase,
        })
    }

    pub fn amplitude(&self, j: i32) -> Complex64 {
        let idx = (j + self.j_max as i32) as usize;
        Complex64::from_polar(self.log_modulus[idx].exp(), self.phase[idx])
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.log_modulus
            .iter()
            .zip(&self.phase)
            .map(|(&lm, &ph)| Complex64::from_polar(lm.exp(), ph))
            .collect()
    }

    /// Evaluates the truncated series at `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((&mu, &lm), &ph) in self.frequencies.iter().zip(&self.log_modulus).zip(&self.phase) {
            acc += (Complex64::new(lm, ph) + Complex64::i() * mu * z).exp();
        }
        acc
    }
}

/// `e_l(z)`; accurate for `|Im z| <= 2`.
pub fn eval_e(torus: &FloquetTorus, l: usize, z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Input(format!("non-finite evaluation point {z}")));
    }
    if z.im.abs() > 2.0 {
        return Err(Error::Precondition(format!("|Im z| = {} exceeds 2", z.im.abs())));
    }
    Ok(ThetaCoefficients::new(torus, l)?.eval(z))
}

/// `erf(b) - erf(a)` for `a <= b`, free of cancellation in the tails.
/// Returned as `(scale, log_factor)` with value `scale · e^{log_factor}`.
fn erf_diff(a: f64, b: f64) -> (f64, f64) {
    if a >= 0.0 {
        let s = a.erfcx() - (a * a - b * b).exp() * b.erfcx();
        (s, -a * a)
    } else if b <= 0.0 {
        let s = (-b).erfcx() - (b * b - a * a).exp() * (-a).erfcx();
        (s, -b * b)
    } else {
        (RealErrorFunctions::erf(b) - RealErrorFunctions::erf(a), 0.0)
    }
}

/// `ln ‖e_l‖²` from the truncated series: `2π Σ_j |A_j|² I(μ_j)` with
/// `I(μ) = ∫_0^1 e^{-2μq - kq²} dq` in closed form.
pub fn log_basis_norm_sq(torus: &FloquetTorus, l: usize) -> Result<f64> {
    let theta = ThetaCoefficients::new(torus, l)?;
    let k = torus.k as f64;
    let sk = k.sqrt();
    let mu0 = torus.mu0(l);
    // |A_j|² I(μ_j) = e^{μ0²/k} (√π / 2√k) (erf(b_j) - erf(a_j)), a_j = μ_j/√k, b_j = a_j + √k.
    let mut sum = 0.0;
    for &mu in &theta.frequencies {
        let a = mu / sk;
        let (s, lf) = erf_diff(a, a + sk);
        sum += s * lf.exp();
    }
    if !(sum > 0.0) {
        return Err(Error::Numeric(format!("norm sum {sum} for l = {l}")));
    }
    Ok(TAU.ln() + mu0 * mu0 / k + (PI.sqrt() / (2.0 * sk)).ln() + sum.ln())
}

pub fn basis_norm_sq(torus: &FloquetTorus, l: usize) -> Result<f64> {
    let v = log_basis_norm_sq(torus, l)?.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("‖e_{l}‖² overflows; use log_basis_norm_sq")))
    }
}

/// Gauss–Legendre nodes and weights mapped to `[0, 1]`.
pub(crate) fn q_nodes(n_q: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n_q).expect("n_q >= 1"));
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// Quadrature of `∫_0^{2π} ∫_0^1 conj(g1(p+iq)) g2(p+iq) e^{-kq²} dq dp`.
pub fn inner_product<F, G>(torus: &FloquetTorus, g1: F, g2: G) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
    G: Fn(Complex64) -> Complex64,
{
    let quad = torus.quadrature(0);
    let k = torus.k as f64;
    let wp = TAU / quad.n_p as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for (q, wq) in q_nodes(quad.n_q) {
        let mut row = Complex64::new(0.0, 0.0);
        for ip in 0..quad.n_p {
            let z = Complex64::new(TAU * ip as f64 / quad.n_p as f64, q);
            let (a, b) = (g1(z), g2(z));
            if !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()) {
                return Err(Error::Numeric(format!("integrand not finite at z = {z}")));
            }
            row += a.conj() * b;
        }
        total += row * (wq * (-k * q * q).exp());
    }
    Ok(total * wp)
}

const Q_BLOCK: usize = 8;

/// `P[l', l] = Σ_nodes w · conj(ẽ_{l'}) f ẽ_l` with `ẽ_l = e^{-μ_{l,0}²/(2k)} e_l`,
/// the weight `e^{-kq²}` split evenly into both factors so every term stays
/// bounded.
///
/// Blocks of q-nodes run in parallel and are summed in node order, so the
/// result does not depend on the thread count.
pub(crate) fn scaled_pairing<F>(torus: &FloquetTorus, quad: Quadrature, f: F) -> Result<DMatrix<Complex64>>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let k = torus.k as usize;
    let kf = torus.k as f64;
    let n_p = quad.n_p;
    let jm = torus.j as i64;
    let n_j = 2 * torus.j as usize + 1;
    let ps: Vec<f64> = (0..n_p).map(|ip| TAU * ip as f64 / n_p as f64).collect();

    // e^{iμ_j p} = e^{iμ_0 p} e^{ijkp}
    let base: Vec<Complex64> = (0..k)
        .flat_map(|l| {
            let mu0 = torus.mu0(l);
            ps.iter().map(move |&p| Complex64::cis(mu0 * p))
        })
        .collect();
    let lattice: Vec<Complex64> = (-jm..=jm)
        .flat_map(|j| (0..n_p).map(move |ip| Complex64::cis(TAU * ((j * k as i64 * ip as i64) % n_p as i64) as f64 / n_p as f64)))
        .collect();
    let theta_phase: Vec<Complex64> = (-jm..=jm).map(|j| Complex64::cis(-kf * torus.d * j as f64)).collect();

    let nodes = q_nodes(quad.n_q);
    let wp = TAU / n_p as f64;

    let partials: Vec<Result<DMatrix<Complex64>>> = nodes
        .par_chunks(Q_BLOCK)
        .map(|block| {
            let mut acc = DMatrix::<Complex64>::zeros(k, k);
            let mut e = vec![Complex64::new(0.0, 0.0); k * n_p];
            let mut fe = vec![Complex64::new(0.0, 0.0); k * n_p];
            let mut amp = vec![Complex64::new(0.0, 0.0); n_j];
            let mut fvals = vec![Complex64::new(0.0, 0.0); n_p];
            for &(q, wq) in block {
                for (ip, &p) in ps.iter().enumerate() {
                    let v = f(p, q);
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(Error::Numeric(format!("symbol not finite at (p, q) = ({p}, {q})")));
                    }
                    fvals[ip] = v * (wq * wp);
                }
                for l in 0..k {
                    let mu0 = torus.mu0(l);
                    for (ij, a) in amp.iter_mut().enumerate() {
                        let mu = mu0 + (ij as i64 - jm) as f64 * kf;
                        let s = mu + kf * q;
                        *a = theta_phase[ij] * (-s * s / (2.0 * kf)).exp();
                    }
                    let row = &mut e[l * n_p..(l + 1) * n_p];
                    for (ip, out) in row.iter_mut().enumerate() {
                        let mut s = Complex64::new(0.0, 0.0);
                        for (ij, a) in amp.iter().enumerate() {
                            s += a * lattice[ij * n_p + ip];
                        }
                        *out = s * base[l * n_p + ip];
                    }
                    let frow = &mut fe[l * n_p..(l + 1) * n_p];
                    for ip in 0..n_p {
                        frow[ip] = fvals[ip] * row[ip];
                    }
                }
                for lp in 0..k {
                    let left = &e[lp * n_p..(lp + 1) * n_p];
                    for l in 0..k {
                        let right = &fe[l * n_p..(l + 1) * n_p];
                        let mut s = Complex64::new(0.0, 0.0);
                        for (a, b) in left.iter().zip(right) {
                            s += a.conj() * b;
                        }
                        acc[(lp, l)] += s;
                    }
                }
            }
            Ok(acc)
        })
        .collect();

    let mut total = DMatrix::<Complex64>::zeros(k, k);
    for part in partials {
        total += part?;
    }
    Ok(total)
}

/// Gram matrix `⟨e_{l'}, e_l⟩` of the raw basis under the `G_k` pairing.
pub fn gram_matrix(torus: &FloquetTorus) -> Result<DMatrix<Complex64>> {
    let k = torus.k as usize;
    let kf = torus.k as f64;
    let scaled = scaled_pairing(torus, torus.quadrature(0), |_, _| Complex64::new(1.0, 0.0))?;
    Ok(DMatrix::from_fn(k, k, |lp, l| {
        let (a, b) = (torus.mu0(lp), torus.mu0(l));
        scaled[(lp, l)] * ((a * a + b * b) / (2.0 * kf)).exp()
    }))
}

fn rescale_e_frame(
    torus: &FloquetTorus,
    m: &OperatorMatrix,
    from: MatrixFrame,
    to: MatrixFrame,
    sign: f64,
) -> Result<OperatorMatrix> {
    m.expect_basis(Basis::E)?;
    if m.frame() != from {
        return Err(Error::Input(format!("expected a matrix in the {from} frame, found {}", m.frame())));
    }
    let k = torus.k as usize;
    if m.k() != k {
        return Err(Error::Input(format!("matrix dimension {} does not match level {k}", m.k())));
    }
    let half_log: Vec<f64> = (0..k)
        .map(|l| log_basis_norm_sq(torus, l).map(|v| 0.5 * v))
        .collect::<Result<_>>()?;
    let entries = DMatrix::from_fn(k, k, |r, c| m.get(r, c) * (sign * (half_log[r] - half_log[c])).exp());
    OperatorMatrix::new(Basis::E, to, entries)
}

/// Rewrites a raw `e`-basis matrix in the normalized frame `e_l / ‖e_l‖`.
pub fn to_orthonormal(torus: &FloquetTorus, m: &OperatorMatrix) -> Result<OperatorMatrix> {
    rescale_e_frame(torus, m, MatrixFrame::Orthogonal, MatrixFrame::Orthonormal, 1.0)
}

/// Inverse of [`to_orthonormal`].
pub fn to_orthogonal(torus: &FloquetTorus, m: &OperatorMatrix) -> Result<OperatorMatrix> {
    rescale_e_frame(torus, m, MatrixFrame::Orthonormal, MatrixFrame::Orthogonal, -1.0)
}
