//! Numerical cross-checks of the closed forms.

pub mod coprime;
pub mod quadrature;
pub mod youla;

pub use coprime::{doubly_coprime, CoprimeFactors};
pub use quadrature::{Integral, QuadratureGrid};
pub use youla::{optimize_youla, youla_objective, YoulaBasis, YoulaObjective, YoulaOptimum};
