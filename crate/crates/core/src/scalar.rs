use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the estimators run on: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant. Never fails for finite input.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 literal")
    }

    /// A tolerance of `v` in `f64` terms, floored at a small multiple of the
    /// type's epsilon so that `f32` does not chase unreachable accuracy.
    #[inline]
    fn tol(v: f64) -> Self {
        Self::lit(v).max(Self::epsilon() * Self::lit(64.0))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tol_is_floored_for_f32() {
        assert_eq!(<f64 as Real>::tol(1e-10), 1e-10);
        assert!(<f32 as Real>::tol(1e-10) > 1e-6);
    }
}
