pub mod engine;
pub mod harness;
pub mod library;
pub mod linalg;
pub mod problem;
pub mod rng;
