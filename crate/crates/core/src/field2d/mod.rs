//! Disk-masked Cartesian fields, finite-difference Hessians, rotation
//! pullbacks and angular averages.

mod field;
mod grid;
mod io;
mod ops;

pub use field::{
    cof_2d, det_2d, integral_2d, l2_norm_2d, lift_radial, norm_sq_2d, pairing_2d, radial_hessian,
    Integral2D, RotationAngle, ScalarField2D, Sym2, SymMatrixField2D,
};
pub use grid::{Band, Grid2D, Rect, MIN_NODES_ACROSS};
pub use io::{read_field_binary, write_field_binary, write_field_csv};
pub use ops::{
    angular_average_many, angular_average_matrix, angular_average_scalar, hessian_fd,
    rotate_pullback_matrix, rotate_pullback_scalar, FD_REACH, INTERP_REACH,
};

/// Default lattice: `h = 2/512`.
pub const DEFAULT_PER_UNIT: usize = 256;
/// Default mask margin.
pub const DEFAULT_MARGIN: f64 = 0.05;
/// Default number of averaging angles.
pub const DEFAULT_ANGLES: usize = 256;
