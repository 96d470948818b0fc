pub mod cli;
pub mod document;
pub mod fta;
pub mod quant;
pub mod report;
pub mod riskmx;
pub mod scenario;
pub mod simkit;
pub mod sizing;
