//! Nielsen-Borsuk-Ulam numbers of torus self-maps under free involutions.
//!
//! The crate has two independent routes to the same invariant:
//!
//! * [`closed_form`] evaluates the published case trees directly on the
//!   induced integer matrix;
//! * [`engine`] rebuilds the number from first principles: it constructs an
//!   explicitly perturbed representative of the homotopy class, finds its
//!   coincidences with the involution-composed map numerically, classifies
//!   them exactly through the cokernel of `A(I - S)`, and counts essential
//!   Borsuk-Ulam classes via local indices.
//!
//! [`exact_lattice`] supplies the exact integer/rational linear algebra and
//! [`torus_geometry`] the affine maps and the involution catalog.

pub mod closed_form;
pub mod exact_lattice;
pub mod engine;
pub mod torus_geometry;
