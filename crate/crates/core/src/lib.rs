//! Numerical laboratory for the aggregation equation `∂t u − div(u^m ∇g∗u) = 0`
//! on the unit torus in one and two dimensions.

pub mod barrier_ode;
pub mod torus_field;
pub mod pde_solver;
pub mod rearrangement;
pub mod hj_fronts;
pub mod initial;
pub mod verify;
