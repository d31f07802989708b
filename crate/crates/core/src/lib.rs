//! Near-optimal advertising controls for goodwill dynamics driven by a
//! controlled Volterra Ornstein-Uhlenbeck process
//!
//! ```text
//! X(t) = X0 + ∫_0^t K(t-s) (α u(s) - β X(s)) ds + σ ∫_0^t K(t-s) dW(s)
//! J(u) = E[ -a1 ∫_0^T u(s)^2 ds + a2 X(T) ]  ->  max
//! ```
//!
//! A Hölder kernel `K` is replaced by its Bernstein polynomial `K_n`, which
//! admits a Markovian lift onto the shift semigroup in `L^2(R)`. In the
//! indicator basis `1_[-i,-i+1]` the lifted generator acts on finite
//! coordinate vectors, so the optimal control reduces to an explicit
//! polynomial in `T - t`.
//!
//! Modules, bottom-up:
//! - [`kernel`]: kernel families and Hölder metadata.
//! - [`bernstein`]: the degree-`n` approximation and its uniform error.
//! - [`mittag_leffler`]: `E_{a,b}` for the monomial closed form.
//! - [`lift`]: lift coordinates, the `γ(i,k)` recursion, truncated exponentials.
//! - [`control`]: the truncated control polynomial, error bounds, value function.
//! - [`volterra_sim`]: Monte-Carlo paths and the deterministic mean solver.
//! - [`objective`]: performance functional estimates and a discretized LQ oracle.

pub mod bernstein;
pub mod control;
pub mod error;
pub mod kernel;
pub mod lift;
pub mod mittag_leffler;
pub mod objective;
pub mod volterra_sim;

mod numeric;

pub use bernstein::{BernsteinKernel, ErrorReport};
pub use control::{ControlPolynomial, ControlProblem, ValueFunctionReport};
pub use error::{Error, Result};
pub use kernel::{KernelFamily, KernelSpec};
pub use lift::{GammaTable, LiftedKernel};
pub use mittag_leffler::MLParams;
pub use objective::{Method, ObjectiveReport, OracleSolution};
pub use volterra_sim::{PathBatch, TimeGrid};
