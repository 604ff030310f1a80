//! Comparison of the Toeplitz and complex Weyl quantizations of one symbol.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bargmann::{bargmann_constants, conjugate_to_epsilon_basis};
use crate::error::{Error, Result};
use crate::hilbert::{to_orthonormal, FloquetTorus};
use crate::linalg::{hausdorff, hermitian_eigenvalues};
use crate::operator::OperatorMatrix;
use crate::symbol::{heat_flow, plane_to_lambda, pushforward_kappa, FourierSymbol, Frame};
use crate::toeplitz::{toeplitz_matrix, ToeplitzMatrix};
use crate::weyl::{quantize_weyl, quantize_weyl_complex};

fn expect_real_plane(sym: &FourierSymbol) -> Result<()> {
    if sym.frame() == Frame::RealPlane {
        Ok(())
    } else {
        Err(Error::Frame {
            expected: Frame::RealPlane,
            found: sym.frame(),
        })
    }
}

/// The complex Weyl symbol `b = exp((1/k) ∂_z ∂_z̄) f` attached to a
/// Toeplitz symbol `f`, in the Λ_Φ1 frame.
pub fn weyl_symbol(torus: &FloquetTorus, sym: &FourierSymbol) -> Result<FourierSymbol> {
    heat_flow(&plane_to_lambda(sym)?, torus.k())
}

/// Both sides of the correspondence at one level, in the orthonormal frame.
#[derive(Clone, Debug)]
pub struct CorrespondenceCheck {
    pub toeplitz: ToeplitzMatrix,
    /// `Op^w_{Φ1,k}(b)` in the raw `e` frame.
    pub weyl_raw: OperatorMatrix,
    pub weyl: OperatorMatrix,
    /// `‖T - W‖₂`.
    pub residual: f64,
}

impl CorrespondenceCheck {
    pub fn floor(&self) -> f64 {
        self.toeplitz.floor
    }
}

pub fn correspondence_check(torus: &FloquetTorus, sym: &FourierSymbol) -> Result<CorrespondenceCheck> {
    expect_real_plane(sym)?;
    let toeplitz = toeplitz_matrix(torus, sym)?;
    let weyl_raw = quantize_weyl_complex(torus, &weyl_symbol(torus, sym)?)?;
    let weyl = to_orthonormal(torus, &weyl_raw)?;
    let residual = toeplitz.orthonormal.distance(&weyl)?;
    Ok(CorrespondenceCheck {
        toeplitz,
        weyl_raw,
        weyl,
        residual,
    })
}

/// `‖T_k(f) - Op^w_{Φ1,k}(b)‖₂` in the orthonormal `e` frame.
pub fn theorem_a_residual(torus: &FloquetTorus, sym: &FourierSymbol) -> Result<f64> {
    Ok(correspondence_check(torus, sym)?.residual)
}

/// The same comparison on the real side: `‖C^{-1} T_k C - Op^w_k(b ∘ κ)‖₂`
/// in the ε basis.
pub fn corollary_residual(torus: &FloquetTorus, sym: &FourierSymbol) -> Result<f64> {
    expect_real_plane(sym)?;
    let toeplitz = toeplitz_matrix(torus, sym)?;
    corollary_from_toeplitz(torus, sym, &toeplitz)
}

/// The corollary residual reusing the Toeplitz matrix of a finished check.
pub fn corollary_from_check(torus: &FloquetTorus, sym: &FourierSymbol, check: &CorrespondenceCheck) -> Result<f64> {
    corollary_from_toeplitz(torus, sym, &check.toeplitz)
}

fn corollary_from_toeplitz(torus: &FloquetTorus, sym: &FourierSymbol, toeplitz: &ToeplitzMatrix) -> Result<f64> {
    let diag = bargmann_constants(torus);
    let pulled = conjugate_to_epsilon_basis(&toeplitz.raw, &diag)?;
    let real_symbol = pushforward_kappa(&weyl_symbol(torus, sym)?)?;
    pulled.distance(&quantize_weyl(torus, &real_symbol)?)
}

/// Sorted spectra of both orthonormal matrices and their Hausdorff distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumComparison {
    pub eigs_toeplitz: Vec<f64>,
    pub eigs_weyl: Vec<f64>,
    pub hausdorff: f64,
}

fn compare_spectra(check: &CorrespondenceCheck) -> SpectrumComparison {
    let eigs_toeplitz = hermitian_eigenvalues(check.toeplitz.orthonormal.entries());
    let eigs_weyl = hermitian_eigenvalues(check.weyl.entries());
    let hausdorff = hausdorff(&eigs_toeplitz, &eigs_weyl);
    SpectrumComparison {
        eigs_toeplitz,
        eigs_weyl,
        hausdorff,
    }
}

pub fn spectrum_compare(torus: &FloquetTorus, sym: &FourierSymbol) -> Result<SpectrumComparison> {
    if !sym.is_real() {
        return Err(Error::Domain("spectrum comparison needs a real-valued symbol".into()));
    }
    Ok(compare_spectra(&correspondence_check(torus, sym)?))
}

/// One level of a [`CorrespondenceReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub k: u32,
    /// `None` when quadrature refinement failed at this level.
    pub residual: Option<f64>,
    pub corollary_residual: Option<f64>,
    pub floor: Option<f64>,
    pub spectra: Option<SpectrumComparison>,
    pub error: Option<String>,
}

impl LevelResult {
    pub fn trusted(&self) -> bool {
        self.residual.is_some()
    }

    /// True when the residual is not at least ten times its noise floor.
    pub fn floor_limited(&self) -> bool {
        match (self.residual, self.floor) {
            (Some(r), Some(f)) => r < 10.0 * f,
            _ => false,
        }
    }
}

/// Per-level residuals over a sweep of `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceReport {
    pub symbol: String,
    pub k_values: Vec<u32>,
    pub residuals: Vec<Option<f64>>,
    pub corollary_residuals: Vec<Option<f64>>,
    pub floor: Vec<Option<f64>>,
    pub floor_limited: Vec<bool>,
    /// Least-squares `d ln(residual) / dk` over levels above 10× their floor;
    /// `None` when fewer than three such levels exist.
    pub slope: Option<f64>,
    /// The same fit over every trusted level with a positive residual.
    pub raw_slope: Option<f64>,
    pub spectra: Vec<Option<SpectrumComparison>>,
    pub hausdorff: Vec<Option<f64>>,
    pub errors: Vec<Option<String>>,
}

fn run_level(torus: &FloquetTorus, sym: &FourierSymbol) -> LevelResult {
    let k = torus.k();
    let outcome = correspondence_check(torus, sym).and_then(|check| {
        let corollary = corollary_from_toeplitz(torus, sym, &check.toeplitz)?;
        let spectra = sym.is_real().then(|| compare_spectra(&check));
        Ok((check.residual, corollary, check.floor(), spectra))
    });
    match outcome {
        Ok((residual, corollary, floor, spectra)) => LevelResult {
            k,
            residual: Some(residual),
            corollary_residual: Some(corollary),
            floor: Some(floor),
            spectra,
            error: None,
        },
        Err(err) => LevelResult {
            k,
            residual: None,
            corollary_residual: None,
            floor: None,
            spectra: None,
            error: Some(err.to_string()),
        },
    }
}

/// Least-squares slope of `ln y` against `x`; needs at least three points.
pub fn fit_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(_, y)| *y > 0.0).map(|&(x, y)| (x, y.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs the correspondence check at every level in `k_list` (in parallel)
/// using the angles and truncation of `template`. Quadrature is re-derived
/// per level. A level whose refinement fails is recorded, not fatal.
pub fn decay_scan(name: &str, sym: &FourierSymbol, k_list: &[u32], template: &FloquetTorus) -> Result<CorrespondenceReport> {
    expect_real_plane(sym)?;
    if k_list.len() < 3 {
        return Err(Error::Precondition(format!("need at least 3 levels, got {}", k_list.len())));
    }
    if k_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("levels must be strictly increasing".into()));
    }
    let tori: Vec<FloquetTorus> = k_list.iter().map(|&k| template.at_level(k)).collect::<Result<_>>()?;
    let levels: Vec<LevelResult> = tori.par_iter().map(|t| run_level(t, sym)).collect();
    Ok(assemble_report(name, levels))
}

pub fn assemble_report(name: &str, levels: Vec<LevelResult>) -> CorrespondenceReport {
    let above: Vec<(f64, f64)> = levels
        .iter()
        .filter(|l| l.trusted() && !l.floor_limited())
        .map(|l| (l.k as f64, l.residual.unwrap()))
        .collect();
    let all: Vec<(f64, f64)> = levels
        .iter()
        .filter_map(|l| l.residual.map(|r| (l.k as f64, r)))
        .collect();
    CorrespondenceReport {
        symbol: name.to_owned(),
        k_values: levels.iter().map(|l| l.k).collect(),
        residuals: levels.iter().map(|l| l.residual).collect(),
        corollary_residuals: levels.iter().map(|l| l.corollary_residual).collect(),
        floor: levels.iter().map(|l| l.floor).collect(),
        floor_limited: levels.iter().map(LevelResult::floor_limited).collect(),
        slope: fit_log_slope(&above),
        raw_slope: fit_log_slope(&all),
        hausdorff: levels.iter().map(|l| l.spectra.as_ref().map(|s| s.hausdorff)).collect(),
        spectra: levels.iter().map(|l| l.spectra.clone()).collect(),
        errors: levels.into_iter().map(|l| l.error).collect(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.17e}")).unwrap_or_else(|| "nan".into())
}

impl CorrespondenceReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// `k,residual,floor,hausdorff` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,residual,floor,hausdorff\n");
        for i in 0..self.k_values.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.k_values[i],
                fmt_opt(self.residuals[i]),
                fmt_opt(self.floor[i]),
                fmt_opt(self.hausdorff[i])
            );
        }
        out
    }
}
