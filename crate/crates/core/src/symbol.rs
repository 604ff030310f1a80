//! Periodic symbols on the torus as truncated double Fourier tables.
//!
//! A symbol in the [`Frame::RealPlane`] frame is
//! `a(x, y) = Σ a_{m,n} e^{inx} e^{-2πimy}` on `(R/2πZ) × (R/Z)`.
//! In the [`Frame::LambdaPhi1`] frame the same storage holds the
//! coefficients of `b(z) = Σ b_{m,n} e^{in Re z} e^{2πim Im z}` on the
//! IR-manifold `Λ_Φ1 ≅ C`. The two are related by `κ(x, y) = x - iy`,
//! under which the tables coincide (see [`pullback_kappa`]).

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_M_MAX: u32 = 16;
pub const DEFAULT_N_MAX: u32 = 16;

const REAL_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Variables `(x, y) ∈ R²`, modes `e^{inx} e^{-2πimy}`.
    RealPlane,
    /// Variable `z ∈ Λ_Φ1 ≅ C`, modes `e^{in Re z} e^{2πim Im z}`.
    LambdaPhi1,
}

impl Frame {
    pub fn as_str(self) -> &'static str {
        match self {
            Frame::RealPlane => "real_plane",
            Frame::LambdaPhi1 => "lambda_phi1",
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Frame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "real_plane" => Ok(Frame::RealPlane),
            "lambda_phi1" => Ok(Frame::LambdaPhi1),
            other => Err(Error::Input(format!("unknown frame `{other}`"))),
        }
    }
}

/// Truncated Fourier table of a `(2π, 1)`-periodic symbol.
///
/// Coefficients are kept in a `BTreeMap` keyed by `(m, n)` so every sum
/// over the table runs in lexicographic order and is bit-reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSymbol {
    coeffs: BTreeMap<(i32, i32), Complex64>,
    m_max: u32,
    n_max: u32,
    frame: Frame,
    real: bool,
}

impl FourierSymbol {
    /// Empty table with the given truncation bounds.
    pub fn zero(frame: Frame, m_max: u32, n_max: u32) -> Self {
        Self {
            coeffs: BTreeMap::new(),
            m_max,
            n_max,
            frame,
            real: true,
        }
    }

    /// Builds a table from `(m, n, amplitude)` triples; the bounds are the
    /// largest indices present. Repeated indices accumulate.
    pub fn from_coefficients<I>(frame: Frame, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i32, i32, Complex64)>,
    {
        let mut coeffs = BTreeMap::new();
        let (mut m_max, mut n_max) = (0u32, 0u32);
        for (m, n, a) in terms {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::Input(format!("non-finite coefficient at ({m}, {n})")));
            }
            m_max = m_max.max(m.unsigned_abs());
            n_max = n_max.max(n.unsigned_abs());
            *coeffs.entry((m, n)).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        let mut sym = Self {
            coeffs,
            m_max,
            n_max,
            frame,
            real: false,
        };
        sym.real = sym.satisfies_reality(REAL_TOL);
        Ok(sym)
    }

    pub fn constant(value: Complex64, frame: Frame) -> Self {
        let mut sym = Self::zero(frame, 0, 0);
        sym.coeffs.insert((0, 0), value);
        sym.real = value.im == 0.0;
        sym
    }

    /// A single Fourier mode `amp · e^{inx} e^{-2πimy}` (or its Λ_Φ1 analogue).
    pub fn mode(m: i32, n: i32, amp: Complex64, frame: Frame) -> Self {
        Self::from_coefficients(frame, [(m, n, amp)]).expect("finite amplitude")
    }

    /// Built-in named symbols, all in the real-plane frame.
    ///
    /// `one`, `cos_p` (cos p), `harper` (cos p + cos 2πq),
    /// `two_plus_cos_p` (2 + cos p) and `skew` (sin(p + 2πq), which is not
    /// even in `m`).
    pub fn builtin(name: &str) -> Result<Self> {
        let half = Complex64::new(0.5, 0.0);
        let terms: Vec<(i32, i32, Complex64)> = match name {
            "one" => vec![(0, 0, Complex64::new(1.0, 0.0))],
            "cos_p" => vec![(0, 1, half), (0, -1, half)],
            "harper" => vec![(0, 1, half), (0, -1, half), (1, 0, half), (-1, 0, half)],
            "two_plus_cos_p" => vec![(0, 0, Complex64::new(2.0, 0.0)), (0, 1, half), (0, -1, half)],
            // sin(p + 2πq) = (e^{i(p+2πq)} - e^{-i(p+2πq)}) / 2i, and e^{2πiq} is m = -1.
            "skew" => vec![(-1, 1, Complex64::new(0.0, -0.5)), (1, -1, Complex64::new(0.0, 0.5))],
            other => return Err(Error::Input(format!("unknown built-in symbol `{other}`"))),
        };
        Self::from_coefficients(Frame::RealPlane, terms)
    }

    pub const BUILTIN_NAMES: [&'static str; 5] = ["one", "cos_p", "harper", "two_plus_cos_p", "skew"];

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// True when the symbol is flagged real-valued.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeff(&self, m: i32, n: i32) -> Complex64 {
        self.coeffs.get(&(m, n)).copied().unwrap_or_default()
    }

    /// Stored `(m, n, amplitude)` triples in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, i32, Complex64)> + '_ {
        self.coeffs.iter().map(|(&(m, n), &a)| (m, n, a))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sets a coefficient, widening nothing: indices must respect the bounds.
    pub fn set(&mut self, m: i32, n: i32, amp: Complex64) -> Result<()> {
        if m.unsigned_abs() > self.m_max || n.unsigned_abs() > self.n_max {
            return Err(Error::Precondition(format!(
                "mode ({m}, {n}) exceeds bounds (m_max, n_max) = ({}, {})",
                self.m_max, self.n_max
            )));
        }
        self.coeffs.insert((m, n), amp);
        self.real = self.satisfies_reality(REAL_TOL);
        Ok(())
    }

    /// Drops every mode outside `|m| <= m_max`, `|n| <= n_max`.
    pub fn truncate(&self, m_max: u32, n_max: u32) -> Self {
        let coeffs: BTreeMap<_, _> = self
            .coeffs
            .iter()
            .filter(|(&(m, n), _)| m.unsigned_abs() <= m_max && n.unsigned_abs() <= n_max)
            .map(|(&k, &v)| (k, v))
            .collect();
        let mut sym = Self {
            coeffs,
            m_max,
            n_max,
            frame: self.frame,
            real: false,
        };
        sym.real = sym.satisfies_reality(REAL_TOL);
        sym
    }

    /// `a_{-m,-n} = conj(a_{m,n})` for every stored mode, to `tol` relative
    /// to the largest amplitude.
    pub fn satisfies_reality(&self, tol: f64) -> bool {
        let scale = self.coeffs.values().map(|a| a.norm()).fold(1.0, f64::max);
        self.coeffs
            .iter()
            .all(|(&(m, n), &a)| (self.coeff(-m, -n) - a.conj()).norm() <= tol * scale)
    }

    /// Upper bound `Σ |a_{m,n}|` on the sup norm of the symbol.
    pub fn sup_bound(&self) -> f64 {
        self.coeffs.values().map(|a| a.norm()).sum()
    }

    /// Largest `|n|` actually present (the p-frequency reach of the symbol).
    pub fn max_abs_n(&self) -> u32 {
        self.coeffs.keys().map(|&(_, n)| n.unsigned_abs()).max().unwrap_or(0)
    }

    /// Evaluates the symbol at `(x, y)`.
    ///
    /// In the real-plane frame this is `Σ a_{m,n} e^{inx} e^{-2πimy}`; in the
    /// Λ_Φ1 frame `(x, y)` are read as `z = x + iy` and the modes
    /// `e^{inx} e^{2πimy}` are used.
    pub fn evaluate(&self, x: f64, y: f64) -> Complex64 {
        let sign = match self.frame {
            Frame::RealPlane => -1.0,
            Frame::LambdaPhi1 => 1.0,
        };
        self.coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, (&(m, n), &a)| {
            acc + a * Complex64::cis(n as f64 * x + sign * TAU * m as f64 * y)
        })
    }

    /// Evaluates a Λ_Φ1-frame symbol at `z ∈ C`.
    pub fn evaluate_on_lambda(&self, z: Complex64) -> Result<Complex64> {
        self.expect_frame(Frame::LambdaPhi1)?;
        Ok(self.evaluate(z.re, z.im))
    }

    fn expect_frame(&self, expected: Frame) -> Result<()> {
        if self.frame == expected {
            Ok(())
        } else {
            Err(Error::Frame {
                expected,
                found: self.frame,
            })
        }
    }

    fn map_coefficients(&self, frame: Frame, f: impl Fn(i32, i32, Complex64) -> (i32, i32, Complex64)) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&(m, n), &a)| {
                let (m2, n2, b) = f(m, n, a);
                ((m2, n2), b)
            })
            .collect();
        Self {
            coeffs,
            m_max: self.m_max,
            n_max: self.n_max,
            frame,
            real: self.real,
        }
    }

    /// Parses the plain-text coefficient format: a `frame=...` header and
    /// lines `m n re im`. Blank lines and `#` comments are ignored.
    pub fn from_table_str(text: &str) -> Result<Self> {
        let mut frame = None;
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(value) = line.strip_prefix("frame=") {
                if frame.is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "duplicate frame header".into(),
                    });
                }
                frame = Some(value.parse::<Frame>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?);
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `m n re im`, found {} fields", fields.len()),
                });
            }
            let parse_err = |what: &str| Error::Parse {
                line: line_no,
                message: format!("cannot parse {what}"),
            };
            let m: i32 = fields[0].parse().map_err(|_| parse_err("m"))?;
            let n: i32 = fields[1].parse().map_err(|_| parse_err("n"))?;
            let re: f64 = fields[2].parse().map_err(|_| parse_err("re"))?;
            let im: f64 = fields[3].parse().map_err(|_| parse_err("im"))?;
            terms.push((m, n, Complex64::new(re, im)));
        }
        let frame = frame.ok_or(Error::Parse {
            line: 0,
            message: "missing `frame=` header".into(),
        })?;
        Self::from_coefficients(frame, terms)
    }

    pub fn to_table_string(&self) -> String {
        let mut out = format!("frame={}\n", self.frame);
        for (m, n, a) in self.iter() {
            out.push_str(&format!("{m} {n} {:.17e} {:.17e}\n", a.re, a.im));
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_table_str(&std::fs::read_to_string(path)?)
    }
}

/// Samples of a function on the uniform grid `x_i = 2πi/n_x`, `y_j = j/n_y`,
/// stored row-major with `x` as the slow index.
#[derive(Clone, Debug)]
pub struct SampleGrid {
    pub n_x: usize,
    pub n_y: usize,
    pub values: Vec<Complex64>,
}

impl SampleGrid {
    pub fn from_fn(n_x: usize, n_y: usize, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(n_x * n_y);
        for i in 0..n_x {
            let x = TAU * i as f64 / n_x as f64;
            for j in 0..n_y {
                values.push(f(x, j as f64 / n_y as f64));
            }
        }
        Self { n_x, n_y, values }
    }
}

/// Discrete Fourier coefficients `a_{m,n} = (N_x N_y)^{-1} Σ s(x_i, y_j)
/// e^{-inx_i} e^{2πimy_j}` of real-plane samples, for `|m| <= m_max`,
/// `|n| <= n_max`.
pub fn sample_to_fourier(grid: &SampleGrid, m_max: u32, n_max: u32) -> Result<FourierSymbol> {
    let (n_x, n_y) = (grid.n_x, grid.n_y);
    if grid.values.len() != n_x * n_y {
        return Err(Error::Input(format!(
            "grid holds {} samples, expected {n_x} x {n_y}",
            grid.values.len()
        )));
    }
    if n_x <= 2 * n_max as usize || n_y <= 2 * m_max as usize {
        return Err(Error::Precondition(format!(
            "grid {n_x} x {n_y} too small for (m_max, n_max) = ({m_max}, {n_max}); \
             need N_x > 2 n_max and N_y > 2 m_max"
        )));
    }
    if let Some(pos) = grid.values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Input(format!("non-finite sample at flat index {pos}")));
    }

    let (m_max_i, n_max_i) = (m_max as i32, n_max as i32);
    // Stage 1: transform along x for every retained n.
    let mut partial = vec![Complex64::new(0.0, 0.0); (2 * n_max as usize + 1) * n_y];
    for (ni, n) in (-n_max_i..=n_max_i).enumerate() {
        for i in 0..n_x {
            let phase = Complex64::cis(-(n as f64) * TAU * i as f64 / n_x as f64);
            let row = &grid.values[i * n_y..(i + 1) * n_y];
            for (j, v) in row.iter().enumerate() {
                partial[ni * n_y + j] += phase * v;
            }
        }
    }
    // Stage 2: along y.
    let norm = 1.0 / (n_x * n_y) as f64;
    let mut sym = FourierSymbol::zero(Frame::RealPlane, m_max, n_max);
    for (ni, n) in (-n_max_i..=n_max_i).enumerate() {
        for m in -m_max_i..=m_max_i {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n_y {
                acc += partial[ni * n_y + j] * Complex64::cis(TAU * m as f64 * j as f64 / n_y as f64);
            }
            sym.coeffs.insert((m, n), acc * norm);
        }
    }

    if grid.values.iter().all(|v| v.im == 0.0) {
        // Real samples: enforce the conjugate pairing exactly.
        let keys: Vec<_> = sym.coeffs.keys().copied().collect();
        for (m, n) in keys {
            if (m, n) < (-m, -n) {
                continue;
            }
            let a = sym.coeff(m, n);
            let b = sym.coeff(-m, -n);
            let avg = (a + b.conj()) * 0.5;
            sym.coeffs.insert((m, n), avg);
            sym.coeffs.insert((-m, -n), avg.conj());
        }
        sym.real = true;
    } else {
        sym.real = sym.satisfies_reality(REAL_TOL);
    }
    Ok(sym)
}

/// Fourier multiplier of the time-1 heat flow `∂_t b = (1/k) ∂_z ∂_z̄ b` on
/// the mode `(m, n)`: `exp(-(n² + 4π²m²) / (4k))`.
pub fn heat_multiplier(m: i32, n: i32, k: u32) -> f64 {
    (-heat_exponent(m, n, k)).exp()
}

fn heat_exponent(m: i32, n: i32, k: u32) -> f64 {
    let (m, n) = (m as f64, n as f64);
    (n * n + 4.0 * PI * PI * m * m) / (4.0 * k as f64)
}

fn check_level(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::Precondition("level k must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// `exp((1/k) ∂_z ∂_z̄)` applied to the symbol. The frame is preserved: the
/// multiplier is real and even in `(m, n)`.
pub fn heat_flow(sym: &FourierSymbol, k: u32) -> Result<FourierSymbol> {
    check_level(k)?;
    Ok(sym.map_coefficients(sym.frame, |m, n, a| (m, n, a * heat_multiplier(m, n, k))))
}

/// Degree-`order` truncation `Σ_{j<=order} (1/j!) x^j` of the inverse heat
/// multiplier, with `x = (n² + 4π²m²)/(4k)`.
pub fn inverse_heat_truncated(sym: &FourierSymbol, k: u32, order: u32) -> Result<FourierSymbol> {
    check_level(k)?;
    Ok(sym.map_coefficients(sym.frame, |m, n, a| {
        let x = heat_exponent(m, n, k);
        let mut term = 1.0;
        let mut total = 1.0;
        for j in 1..=order {
            term *= x / j as f64;
            total += term;
        }
        (m, n, a * total)
    }))
}

/// Symbol of the adjoint: `b̄(z) = Σ conj(b_{m,n}) e^{-in Re z} e^{-2πim Im z}`,
/// stored as `b̄_{-m,-n} = conj(b_{m,n})`.
pub fn conjugate_symbol(sym: &FourierSymbol) -> Result<FourierSymbol> {
    sym.expect_frame(Frame::LambdaPhi1)?;
    Ok(sym.map_coefficients(Frame::LambdaPhi1, |m, n, a| (-m, -n, a.conj())))
}

/// `b = a ∘ κ^{-1}`: the Λ_Φ1 table of `b` is the real-plane table of `a`.
pub fn pullback_kappa(sym: &FourierSymbol) -> Result<FourierSymbol> {
    sym.expect_frame(Frame::RealPlane)?;
    Ok(sym.map_coefficients(Frame::LambdaPhi1, |m, n, a| (m, n, a)))
}

/// Inverse of [`pullback_kappa`]: `a = b ∘ κ`.
pub fn pushforward_kappa(sym: &FourierSymbol) -> Result<FourierSymbol> {
    sym.expect_frame(Frame::LambdaPhi1)?;
    Ok(sym.map_coefficients(Frame::RealPlane, |m, n, a| (m, n, a)))
}

/// Reads a real-plane function `f(p, q)` as the function `z ↦ f(Re z, Im z)`
/// on `Λ_Φ1 ≅ C`.
///
/// Since `e^{-2πimq}` with `q = Im z` is the Λ_Φ1 mode `-m`, this reflects
/// the `m` index. This is the identification under which the Toeplitz symbol
/// and the heat-flowed complex Weyl symbol live on the same space.
pub fn plane_to_lambda(sym: &FourierSymbol) -> Result<FourierSymbol> {
    sym.expect_frame(Frame::RealPlane)?;
    Ok(sym.map_coefficients(Frame::LambdaPhi1, |m, n, a| (-m, n, a)))
}
