//! Numerical workbench for boundary measurements of triangulated surfaces.
//!
//! The crate is organized around one pipeline: build a surface as a
//! [`mesh::TriangleMesh`] carrying only edge lengths, assemble cotangent
//! Laplacians over it ([`harmonic`]), condense them to the boundary as a
//! Dirichlet-to-Neumann matrix ([`dn`]), and study what that boundary data
//! does and does not determine: genus through the defect operator, conformal
//! structure through gauge transforms, and short geodesics through annulus
//! moduli ([`moduli`]). A spectral Beltrami-equation solver ([`beltrami`])
//! covers the quasiconformal side.
//!
//! Everything is generic over the scalar type through [`scalar::Scalar`];
//! the aliases at the crate root fix `f64`, which all quoted tolerances
//! assume.

pub mod beltrami;
pub mod boundary;
pub mod dn;
pub mod error;
pub mod fft;
pub mod harmonic;
pub mod mesh;
pub mod moduli;
pub mod scalar;
pub mod solve;
pub mod sparse;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete `f64` aliases for the main working types.
pub type BoundaryFunction = boundary::BoundaryFunction<f64>;
pub type BoundaryOperator = boundary::BoundaryOperator<f64>;
pub type TriangleMesh = mesh::TriangleMesh<f64>;
pub type Involution = mesh::Involution;
pub type SparseSymmetricOperator = sparse::SparseSymmetricOperator<f64>;
pub type VertexFunction = harmonic::VertexFunction<f64>;
pub type EdgeDifferential = harmonic::EdgeDifferential<f64>;

/// Double-precision DN operator.
pub type DnMatrix = dn::DnMatrix<f64>;
pub type ComplexGrid = beltrami::ComplexGrid<f64>;
pub type BeltramiGrid = beltrami::BeltramiGrid<f64>;
