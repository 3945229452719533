use num_traits::{Float, FromPrimitive, NumAssign};
use serde::{de::DeserializeOwned, Serialize};
use std::fmt::{Debug, Display};

/// Floating-point scalar the numeric core is generic over.
///
/// `f32` satisfies the bound and is exercised in tests, but the shipped
/// pipeline, the file formats and the CLI all run on `f64`; the tolerances
/// quoted in the operation contracts assume `f64` precision.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssign
    + Serialize
    + DeserializeOwned
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lift an `f64` constant into the scalar type.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Total order for finite scalars, used wherever floats act as sort keys.
/// Panics on NaN, which validated inputs never contain.
pub fn cmp_finite<F: Scalar>(a: &F, b: &F) -> std::cmp::Ordering {
    a.partial_cmp(b).expect("NaN in ordered comparison")
}

/// `BinaryHeap` key that pops the smallest cost first, ties on the index.
/// Keeps Dijkstra loops deterministic without an external ordered-float
/// wrapper.
pub(crate) struct MinKey<F>(pub F, pub usize);

impl<F: Scalar> PartialEq for MinKey<F> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl<F: Scalar> Eq for MinKey<F> {}
impl<F: Scalar> PartialOrd for MinKey<F> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<F: Scalar> Ord for MinKey<F> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Reversed so the max-heap surfaces the minimum.
        cmp_finite(&other.0, &self.0).then(other.1.cmp(&self.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifts_constants() {
        assert_eq!(f64::of(2.5), 2.5);
        assert_eq!(f32::of(2.5), 2.5f32);
    }

    #[test]
    fn orders_finite_values() {
        let mut v = vec![3.0f64, 1.0, 2.0];
        v.sort_by(cmp_finite);
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
    }
}
