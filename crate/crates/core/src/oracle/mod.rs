//! Independent reference computations for cross-checking: re-integration of
//! the Euler–Lagrange equation as an initial value problem, direct
//! minimization of a differently discretized energy, and the integral `J`
//! by quadrature against its hypergeometric closed form.

pub mod descent;
pub mod ivp;
pub mod series;

pub use descent::{direct_minimize, direct_minimize_from, DescentConfig, DescentResult, Start};
pub use ivp::{continuation, ivp_integrate, turning_point, Continuation, IvpConfig, Trajectory};
pub use series::{series_vs_quadrature, SeriesComparison};
