//! Exact geometry over rationals: H-polytopes, vertex enumeration, volume.

mod polytope;
mod vertices;
mod volume;

pub use polytope::{Constraint, HPolytope};
pub use vertices::enumerate_vertices;
pub use volume::{
    integrate, integrate_polynomials, integrate_polynomials_with_cap, integrate_with_cap, volume,
    volume_with_cap, AffineForm, DEFAULT_DIMENSION_CAP,
};
