//! Curved A-infinity algebras and simplicial gauge theory, exactly.
//!
//! This crate builds curved dg structures from connection one-forms on a
//! simplicial complex, transfers them to matrix-valued simplicial cochains
//! through Dupont's special chain contraction via the homological
//! perturbation lemma, and verifies gauge invariance of the resulting
//! discrete action functional. The default scalar backend is exact big
//! rationals, so the identity suites assert literal zeros; an `f64` backend
//! covers the non-terminating perturbation series with reported tail bounds.

pub mod coalgebra;
pub mod cochain;
pub mod complex;
pub mod error;
pub mod exact_mat;
pub mod forms;
pub mod graded;
pub mod scalar;
pub mod tamper;
pub mod vect;
pub mod whitney;

pub use cochain::{CochKey, Cochain, CochainIndex};
pub use complex::{standard_simplex, triangulated_circle, SimplicialComplex};
pub use error::{Error, Result};
pub use forms::{FormKey, PolyForm};
pub use coalgebra::{CoalgMorphism, Coderivation, MultiOp};
pub use tamper::Tamper;
pub use whitney::{certificate_test_family, ContractionCertificate, FormContraction};
pub use graded::{koszul_tensor, GradedBasis, GradedMap};
pub use scalar::{Coeff, Rat};
pub use vect::{BKey, Vect, Word};
