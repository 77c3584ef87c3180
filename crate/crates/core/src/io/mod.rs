//! Binary archives, CSV tables and VTK fields.

pub mod archive;
pub mod table;
pub mod vtk;

pub use archive::{
    read_basis, read_operators, read_snapshots, write_basis, write_operators, write_snapshots, BasisArchive,
};
pub use table::{read_scalars, read_trajectory, write_numeric, write_scalars, write_trajectory};
pub use vtk::write_vtk;
