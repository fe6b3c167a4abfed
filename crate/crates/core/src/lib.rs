pub mod config;
pub mod cs_recovery;
pub mod error;
pub mod network_sim;
pub mod scenario_io;
pub mod seed;
pub mod slot_allocation;
pub mod sparsity_design;
pub mod time_allocation;
