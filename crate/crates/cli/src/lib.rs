//! Configuration, artifact output and reproduction reports for the `conley`
//! command-line tool.

pub mod config;
pub mod output;
pub mod report;
pub mod suite;
