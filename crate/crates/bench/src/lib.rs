//! Shared inputs for the criterion benchmarks.

use qrenyi_core::harness::{build_objective, instance_for, Quantity, Sizes};
use qrenyi_core::{Objective, Seed};

/// Desk-scale objective for `(quantity, alpha)`, or a smaller one when
/// `d` is given.
pub fn objective(quantity: Quantity, alpha: f64, d: usize) -> Box<dyn Objective> {
    let sizes = Sizes {
        nx: 16,
        d,
        dim_a: d,
        dim_b: d,
    };
    build_objective(
        quantity,
        alpha,
        instance_for(quantity, sizes, Seed(1)).expect("sizes are valid"),
    )
    .expect("order is in range")
}
