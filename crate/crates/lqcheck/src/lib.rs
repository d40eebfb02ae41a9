//! A verification toolkit for lqCCS, a linear quantum process calculus:
//! parsing and linear type checking of tagged processes, scheduled semantics
//! over both probability distributions of configurations and density-operator
//! weighted distributions of processes, and a decision procedure for labelled
//! ground scheduled bisimilarity.

pub mod qmath;
