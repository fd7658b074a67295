//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use mstruct_core::group::GroupContext;
use mstruct_core::metrics::{letter_weight_provider, Provider};

pub fn f2() -> GroupContext {
    GroupContext::new(2).expect("rank 2 is valid")
}

/// The `{a:2, b:1}` and `{a:1, b:2}` letter-weight pair.
pub fn reference_pair(ctx: &GroupContext) -> (Provider, Provider) {
    let d: Provider = Arc::new(letter_weight_provider(ctx, &[2.0, 1.0]).unwrap());
    let d_star: Provider = Arc::new(letter_weight_provider(ctx, &[1.0, 2.0]).unwrap());
    (d, d_star)
}
