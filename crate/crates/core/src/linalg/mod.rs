//! Quaternion arithmetic, the flat hyper-Kähler structure of `H^{n+1}` and the small dense
//! linear algebra used by the classifier.

mod affine;
mod eigen;
mod pfaffian;
mod qmatrix;
mod quaternion;
mod qvector;

pub use affine::AffineMap;
pub use eigen::{asymmetry, sym_eigen, SymEigen};
pub use pfaffian::{pfaffian, CMatrix};
pub use qmatrix::{
    congruence_diagonalize, j_commutator_residual, to_quat_hermitian, Congruence, Inertia, QHermitian, QMatrix,
};
pub use quaternion::{qmul, Quaternion};
pub use qvector::{apply_j, apply_j_real, flat_inner, j_matrix, QVector};
