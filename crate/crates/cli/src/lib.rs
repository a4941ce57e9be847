// NaN must fail every `!(x > 0.0)` style guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod syntax;

/// Exit status: 2 when the input fails a mathematical hypothesis, 1 otherwise.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<commands::Rejected>().is_some() {
        return 2;
    }
    match e.downcast_ref::<wco_core::Error>() {
        Some(inner) if inner.is_hypothesis_failure() => 2,
        _ => 1,
    }
}
