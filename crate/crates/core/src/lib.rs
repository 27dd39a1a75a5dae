pub mod classifier;
pub mod comparator;
pub mod composer;
pub mod expr;
pub mod registry;
pub use classifier::{ClassifiedLibrary, ThetaClass};
pub use comparator::{comp, CompOutcome, CompResult, ComparatorConfig, ComplexityFn};
pub use composer::{compose, execute_plan, Plan};
pub use expr::Expr;
pub use registry::Registry;
