//! Exact binary fixed-point arithmetic with explicit error bounds.

mod fixed;
mod stream;

pub use fixed::{
    carry_add, carry_add_strict, mul, mul_rational, neg, shifted_sum, FixedPointNumber,
    DEFAULT_GUARD,
};
pub use stream::{stream_carry_add, StreamSum};
