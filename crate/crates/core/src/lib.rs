//! Twist deformations of the Poincaré Hopf algebra, the noncommutative phase
//! spaces they induce, operator realizations and numeric uncertainty checks.

pub mod algebra;
pub mod cli;
pub mod duality;
pub mod expr;
pub mod momentum;
pub mod report;
pub mod scalar;
pub mod twist;
pub mod uncertainty;
pub mod weyl;
