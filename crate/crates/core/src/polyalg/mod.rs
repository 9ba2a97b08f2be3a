//! Exact polynomial arithmetic, resultant elimination and real-root isolation.

mod multipoly;
mod resultant;
mod roots;
mod unipoly;

pub use multipoly::{MultiPoly, COUPLING_NAMES};
pub use resultant::resultant;
pub use roots::{
    isolate_real_roots, real_roots, refine_root, relative_residual, root_bound, tighten, RootInterval,
    SturmSequence,
};
pub use unipoly::UniPoly;

/// Squarefree part of `p`, content removed, positive leading coefficient.
pub fn squarefree(p: &UniPoly) -> crate::Result<UniPoly> {
    p.squarefree()
}
