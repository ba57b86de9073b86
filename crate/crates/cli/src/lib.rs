//! Command-line front end for the fractional Hamilton-Jacobi laboratory:
//! strict scenario configuration, the scenario runner with checksummed
//! manifests, and the named experiment suites.

pub mod config;
pub mod runner;
pub mod suite;
