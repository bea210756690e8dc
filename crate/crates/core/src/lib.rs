pub mod automata;
pub mod corpus;
pub mod formula_gen;
pub mod frontend;
pub mod gr1;
pub mod ir;
pub mod ltl;
pub mod metrics;
pub mod miner;
pub mod model;
pub mod pipeline;
pub mod session;
pub mod types;
pub mod workbench;
