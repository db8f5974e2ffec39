pub mod axioms;
pub mod baselines;
pub mod equal_shares;
pub mod error;
pub mod flow;
pub mod gcr;
pub mod model;
pub mod rational;
pub mod ordinal;
pub mod io;
pub mod runner;
pub mod fixtures;
pub mod generate;
pub mod cli;
