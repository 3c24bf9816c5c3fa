pub mod geometry;
pub mod evotree;
pub mod robot;
pub mod trainers;
pub mod transfer;
pub mod cli;
