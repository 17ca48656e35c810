//! Generalized Bogoliubov transformations and the D-pseudo-boson structure of
//! their eigenfamilies.

pub mod cli;
pub mod eigensystem;
pub mod gausspoly;
pub mod gbt;
pub mod norms;
pub mod oracle;
pub mod quasibasis;
pub mod specialfns;
