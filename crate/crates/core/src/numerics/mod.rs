//! Linear algebra and quadrature.

mod dense;
mod eig;
mod quadrature;
mod sparse;

pub use dense::{axpy, dot, norm2, DenseLu, DenseMatrix};
pub use eig::{jacobi_svd, sign_rule, sym_eig, Svd, SymEig};
pub use quadrature::{edge_gauss3, seven_point, triangle_quadrature, QuadratureRule};
pub use sparse::{solve_sparse, SparseLu, SparseLuSymbolic, SparseMatrix, TripletBuilder};
