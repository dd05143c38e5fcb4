pub mod bifurcation;
pub mod ghm;
pub mod spectrum;
pub mod renorm;
pub mod ergodic;
pub mod cli;
