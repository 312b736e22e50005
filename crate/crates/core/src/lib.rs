pub mod bounds;
pub mod engine;
pub mod instance;
pub mod lp;
pub mod oracle;
pub mod policies;
pub mod rng;
pub mod stats;
