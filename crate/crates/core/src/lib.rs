//! Metric projections in Minkowski (Finsler) spaces and on constant-curvature
//! model surfaces, with checkers for double-projection and
//! non-expansiveness properties.

pub mod cli;
pub mod convex_sets;
pub mod curvature_probe;
pub mod double_projection;
pub mod error;
pub mod model_spaces;
pub mod norms;
pub mod projection;
mod search;

pub use convex_sets::{ConvexSet, HalfSpace, ParamPoint};
pub use error::{GeomError, Result};
pub use norms::{MetricTensor, NormSpec, Vector};
pub use projection::{Direction, ProjectionResult};

pub(crate) mod ser {
    use serde::Serializer;

    use crate::norms::Vector;

    pub fn vector<S: Serializer>(v: &Vector, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn vectors<S: Serializer>(vs: &[Vector], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(vs.iter().map(|v| v.iter().copied().collect::<Vec<f64>>()))
    }
}
