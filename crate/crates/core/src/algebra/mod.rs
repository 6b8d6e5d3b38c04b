pub mod expr;
pub mod recognize;
pub mod surd;

pub use expr::{rhs_eval, Expr, RhsExpr};
pub use recognize::{recognize_complex, recognize_complex_surd, recognize_in_field, recognize_surd, DEFAULT_DENOM_BOUND};
pub use surd::{ComplexSurd, QuadSurd, RealSurd};
