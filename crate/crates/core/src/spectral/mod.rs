//! Grid, transforms, dealiasing and radial Fourier multipliers.

pub mod field;
pub mod grid;
pub mod symbol;

pub use field::SpectralScalar;
pub use grid::{make_grid, Grid};
pub use symbol::{
    apply_multiplier, dealias, dealias_in_place, eval_symbol, frac_power, invert_filter,
    GrowthForm, LogSymbol, MonotoneTable, MultiplierTable, SymbolSpec,
};
