//! Dense quaternion linear algebra: vectors, matrices, the Hermitian form,
//! the complex adjoint representation and Hermitian spectra.

mod io;
mod matrix;
mod spectral;
mod vector;

pub use io::{matrix_from_csv, matrix_to_csv, read_json, vector_to_csv, write_json, SCHEMA_VERSION};
pub use matrix::{complex_adjoint, complex_block, complex_column, from_complex_column, QMatrix};
pub use spectral::{hermitian_eigen, hermitian_eigenvalues, hermitian_opnorm, HermitianEigen, HERMITIAN_TOL};
pub use vector::{hermitian_inner, LpNorm, QVector, SupportSet};
