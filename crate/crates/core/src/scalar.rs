use std::fmt;

/// Floating-point scalar the numerics are generic over.
///
/// This is `num_traits::Float` plus the constants, conversions, and auxiliary
/// bounds the solvers need. Implemented for `f32` and `f64`; the crate-root
/// aliases fix `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for pulling an `f64` literal into the working scalar type.
///
/// Panics only if the value does not fit, which cannot happen for the finite
/// literals this is used with.
pub(crate) fn rf<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 literal representable in scalar type")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rf_round_trips_f64() {
        let x: f64 = rf(1.25);
        assert_eq!(x, 1.25);
        let y: f32 = rf(0.5);
        assert_eq!(y, 0.5f32);
    }

    #[test]
    fn real_is_object_safe_enough_for_generics() {
        fn mid<R: Real>(a: R, b: R) -> R {
            (a + b) / rf(2.0)
        }
        assert_eq!(mid(1.0f64, 3.0f64), 2.0);
        assert_eq!(mid(1.0f32, 3.0f32), 2.0);
    }
}
