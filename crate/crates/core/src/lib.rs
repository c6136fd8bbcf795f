pub mod cli;
pub mod group;
pub mod hall_littlewood;
pub mod linalg;
pub mod oracle;
pub mod partition;
pub mod sampler;
pub mod stats;
pub mod theory;
