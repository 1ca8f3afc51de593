pub mod cli;
pub mod critical_families;
pub mod error;
pub mod hessian_exact;
pub mod isotypic_reduction;
pub mod loss_geometry;
pub mod spectrum_oracle;
