//! Complex volume of hyperbolic links from planar diagrams.
//!
//! Given a PD-coded link diagram, this crate solves for parabolic
//! quandle colorings (equivalently, boundary-parabolic PSL(2,C)
//! representations of the link group), builds the fundamental 2-cycle of
//! the induced shadow coloring, pushes it into the simplicial quandle
//! complex, flattens each ideal tetrahedron through sign-fixed
//! log-determinants, and evaluates the Rogers dilogarithm. For the
//! discrete faithful coloring the result is i(Vol + i CS) mod π².
//!
//! The pipeline, end to end:
//!
//! ```text
//! PD code -> LinkDiagram -> ArcColoring (Gauss-Newton solve)
//!         -> ShadowColoring -> C(S) (2-cycle) -> ideal tetrahedra
//!         -> flattenings (z; p, q) -> Σ ±R(z;p,q) in C mod π²
//! ```
//!
//! See the `pipeline` module for the orchestration and the `cvol` binary
//! for the command-line interface.

pub mod bloch;
pub mod chain;
pub mod coloring;
pub mod diagram;
pub mod pipeline;
pub mod quandle;
pub mod simplicial;

pub use bloch::{BlochElement, Flattening};
pub use coloring::{ArcColoring, RegionColoring, ShadowColoring};
pub use diagram::{LinkDiagram, PdCode, RegionStructure};
pub use pipeline::{ComplexVolumeResult, Tolerances};
pub use quandle::ProjVector;

use num_complex::Complex64;

/// Complex numbers are serialized as `[re, im]` pairs in all JSON files.
pub(crate) fn c64_to_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub(crate) fn pair_to_c64(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}
