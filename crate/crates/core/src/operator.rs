use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which basis a matrix is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// The orthonormal distributional basis `(ε_l)` of `L_k`.
    Epsilon,
    /// The theta-function basis `(e_l)` of `H_k`.
    E,
}

impl Basis {
    pub fn as_str(self) -> &'static str {
        match self {
            Basis::Epsilon => "epsilon",
            Basis::E => "e",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "epsilon" => Ok(Basis::Epsilon),
            "e" => Ok(Basis::E),
            other => Err(Error::Input(format!("unknown basis `{other}`"))),
        }
    }
}

/// Normalization of the basis vectors behind a matrix.
///
/// `Orthogonal` is the raw `e_l` frame (orthogonal, not normalized);
/// `Orthonormal` is either `ε_l` or `e_l / ‖e_l‖`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixFrame {
    Orthogonal,
    Orthonormal,
}

impl MatrixFrame {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixFrame::Orthogonal => "orthogonal",
            MatrixFrame::Orthonormal => "orthonormal",
        }
    }
}

impl fmt::Display for MatrixFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MatrixFrame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "orthogonal" => Ok(MatrixFrame::Orthogonal),
            "orthonormal" => Ok(MatrixFrame::Orthonormal),
            other => Err(Error::Input(format!("unknown matrix frame `{other}`"))),
        }
    }
}

/// A `k × k` operator matrix. Column `l` holds the image of basis vector `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    basis: Basis,
    frame: MatrixFrame,
    entries: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn new(basis: Basis, frame: MatrixFrame, entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Input(format!(
                "operator matrix must be square and non-empty, got {} x {}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if basis == Basis::Epsilon && frame != MatrixFrame::Orthonormal {
            return Err(Error::Input("the epsilon basis is orthonormal".into()));
        }
        if let Some(pos) = entries.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            let k = entries.nrows();
            return Err(Error::Numeric(format!(
                "matrix entry ({}, {}) is not finite",
                pos % k,
                pos / k
            )));
        }
        Ok(Self { basis, frame, entries })
    }

    pub fn identity(basis: Basis, frame: MatrixFrame, k: usize) -> Self {
        Self::new(basis, frame, DMatrix::identity(k, k)).expect("identity is well formed")
    }

    pub fn k(&self) -> usize {
        self.entries.nrows()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn frame(&self) -> MatrixFrame {
        self.frame
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn expect_basis(&self, expected: Basis) -> Result<()> {
        if self.basis == expected {
            Ok(())
        } else {
            Err(Error::Basis {
                expected,
                found: self.basis,
            })
        }
    }

    /// Largest entry modulus of `self - other`. Both must share basis and frame.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(max_abs(&(&self.entries - &other.entries)))
    }

    /// Spectral norm of `self - other`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(crate::linalg::spectral_norm(&(&self.entries - &other.entries)))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        other.expect_basis(self.basis)?;
        if self.frame != other.frame {
            return Err(Error::Input(format!(
                "matrix frames differ: {} vs {}",
                self.frame, other.frame
            )));
        }
        if self.k() != other.k() {
            return Err(Error::Input(format!("dimensions differ: {} vs {}", self.k(), other.k())));
        }
        Ok(())
    }

    /// Largest entry of `M - M*`.
    pub fn hermitian_defect(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.adjoint()))
    }

    /// Largest entry of `M* M - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let k = self.k();
        max_abs(&(self.entries.adjoint() * &self.entries - DMatrix::<Complex64>::identity(k, k)))
    }

    /// Writes the plain-text matrix format: `k=`, `basis=`, `frame=` header
    /// lines followed by `row col re im` in row-major order.
    pub fn to_text(&self) -> String {
        let k = self.k();
        let mut out = String::with_capacity(64 + k * k * 56);
        out.push_str(&format!("k={k}\nbasis={}\nframe={}\n", self.basis, self.frame));
        for row in 0..k {
            for col in 0..k {
                let z = self.entries[(row, col)];
                out.push_str(&format!("{row} {col} {:.16e} {:.16e}\n", z.re, z.im));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut header = |key: &str| -> Result<String> {
            let (idx, line) = lines.next().ok_or(Error::Parse {
                line: 0,
                message: format!("missing `{key}=` header"),
            })?;
            line.trim()
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .map(str::to_owned)
                .ok_or(Error::Parse {
                    line: idx + 1,
                    message: format!("expected `{key}=` header"),
                })
        };
        let k_text = header("k")?;
        let basis_text = header("basis")?;
        let frame_text = header("frame")?;
        let k: usize = k_text.parse().map_err(|_| Error::Parse {
            line: 1,
            message: format!("invalid level `{k_text}`"),
        })?;
        if k == 0 {
            return Err(Error::Parse {
                line: 1,
                message: "level must be positive".into(),
            });
        }
        let basis: Basis = basis_text.parse()?;
        let frame: MatrixFrame = frame_text.parse()?;

        let mut entries = DMatrix::<Complex64>::zeros(k, k);
        let mut count = 0usize;
        for (idx, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            if fields.len() != 4 {
                return Err(bad(format!("expected `row col re im`, found {} fields", fields.len())));
            }
            let row: usize = fields[0].parse().map_err(|_| bad("bad row".into()))?;
            let col: usize = fields[1].parse().map_err(|_| bad("bad column".into()))?;
            let re: f64 = fields[2].parse().map_err(|_| bad("bad real part".into()))?;
            let im: f64 = fields[3].parse().map_err(|_| bad("bad imaginary part".into()))?;
            if row * k + col != count {
                return Err(bad(format!("entry ({row}, {col}) out of row-major order")));
            }
            entries[(row, col)] = Complex64::new(re, im);
            count += 1;
        }
        if count != k * k {
            return Err(Error::Parse {
                line: 0,
                message: format!("expected {} entries, found {count}", k * k),
            });
        }
        Self::new(basis, frame, entries)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
