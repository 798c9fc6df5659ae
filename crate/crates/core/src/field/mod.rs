//! Grids, fields, quadrature and the static functionals.

pub mod axis;
pub mod box3d;
pub mod domain;
pub mod functionals;
pub mod ground;
pub mod io;
pub mod radial;
pub mod state;
pub mod symmetry;

pub use axis::Spacing;
pub use box3d::{Box3DGrid, BoxGridSpec, Field3D};
pub use domain::{grad_inner, grad_sq, inner, power_integral, Domain, Field};
pub use functionals::{
    center_of_energy, energy, energy_density, functional_j, functional_k, momentum,
    symplectic_omega, Cutoff,
};
pub use ground::{
    crit_exponent, eval_w, exponent_p, sample_w_family, w_prime, w_value, BoostParams,
};
pub use radial::{RadialField, RadialGrid, RadialGridSpec};
pub use state::{BoxState, Pair, RadialState, State};
pub use symmetry::{apply_scaling, apply_translation, Symmetries};
