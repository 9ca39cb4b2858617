pub mod flow;
pub mod involutivity;
pub mod paper;
pub mod pde;
pub mod quasirep;
