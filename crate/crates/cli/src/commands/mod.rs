mod compare;
mod cost;
mod parareal;
mod simulate;

pub use compare::compare;
pub use cost::{cost, schedule};
pub use parareal::parareal;
pub use simulate::{gen, simulate};
