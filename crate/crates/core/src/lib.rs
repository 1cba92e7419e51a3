pub mod cli;
pub mod diversity;
pub mod illustration;
pub mod io;
pub mod lattice;
pub mod sampler;
pub mod scalespace;
pub mod simulate;
pub mod sparse;
pub mod stats;
pub mod variogram;
