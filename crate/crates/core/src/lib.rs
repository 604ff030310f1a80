//! Berezin–Toeplitz and complex Weyl quantization of the torus `T²` as
//! explicit `k × k` matrices.
//!
//! The Toeplitz side lives on the theta-function space `H_k` with basis
//! `e_l`; the Weyl side on `L_k` with the abstract basis `ε_l`. The
//! Bargmann transform is diagonal in these bases, and the heat flow
//! `exp((1/k) ∂_z ∂_z̄)` maps a Toeplitz symbol to the complex Weyl symbol
//! of the same operator.
//!
//! ```
//! use torus_quant::{theorem_a_residual, FloquetTorus, FourierSymbol};
//!
//! let torus = FloquetTorus::new(6, 0.0, 0.0).unwrap();
//! let harper = FourierSymbol::builtin("harper").unwrap();
//! assert!(theorem_a_residual(&torus, &harper).unwrap() < 1e-10);
//! ```

pub mod bargmann;
pub mod correspondence;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod operator;
pub mod symbol;
pub mod toeplitz;
pub mod weyl;

pub use bargmann::{bargmann_constants, c_phi1, conjugate_to_e_basis, conjugate_to_epsilon_basis, transform_exponential, BargmannDiagonal};
pub use correspondence::{
    corollary_from_check, corollary_residual, decay_scan, spectrum_compare, correspondence_check, theorem_a_residual, weyl_symbol,
    CorrespondenceReport, SpectrumComparison, CorrespondenceCheck,
};
pub use error::{Error, Result};
pub use hilbert::{
    basis_norm_sq, eval_e, gram_matrix, inner_product, log_basis_norm_sq, to_orthogonal, to_orthonormal, FloquetTorus,
    Quadrature, ThetaCoefficients,
};
pub use operator::{Basis, MatrixFrame, OperatorMatrix};
pub use symbol::{
    conjugate_symbol, heat_flow, heat_multiplier, inverse_heat_truncated, plane_to_lambda, pullback_kappa,
    pushforward_kappa, sample_to_fourier, FourierSymbol, Frame, SampleGrid,
};
pub use toeplitz::{mode_matrix_oracle, project, toeplitz_matrix, ToeplitzMatrix};
pub use weyl::{apply_complex_weyl_pointwise, quantize_weyl, quantize_weyl_complex, translation_matrix};
