//! Noncrossing partitions, free Poisson laws and the limiting law of the
//! main character when `|X| = αK`, `|Y| = βK`, `K → ∞`.

mod law;
mod partitions;
pub mod quad;

pub use law::{asymptotic_law, free_poisson, law_moment, predicted_moment, DensityPiece, SpectralLaw};
pub use partitions::{
    catalan, delta_pair, enumerate_nc, enumerate_set_partitions, free_poisson_moment, kreweras, narayana_count,
    SetPartition, MAX_NC_SIZE,
};
