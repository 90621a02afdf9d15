//! Scalar types used for similarity scores and evaluation ratios.
//!
//! Every ratio in this crate is a quotient of two counts (shared bits over
//! union bits, solved molecules over all molecules, ...), so a scalar only
//! needs to be built from a pair of counts and compared. Floating point and
//! exact rational types both qualify.

use num_rational::Ratio;
use num_traits::{One, Zero};
use std::fmt::Debug;

/// Numeric type that ratios of counts are expressed in.
pub trait Scalar: Clone + Debug + PartialOrd + Zero + One + Send + Sync {
    /// `num / den`. `den` must be nonzero.
    fn ratio(num: u64, den: u64) -> Self;

    /// Lossy conversion used for reporting.
    fn to_f64(&self) -> f64;

    /// `self * 100`, for percentage reporting.
    fn percent(&self) -> f64 {
        self.to_f64() * 100.0
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn ratio(num: u64, den: u64) -> Self {
                debug_assert!(den != 0);
                (num as f64 / den as f64) as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for Ratio<i64> {
    fn ratio(num: u64, den: u64) -> Self {
        debug_assert!(den != 0);
        Ratio::new(num as i64, den as i64)
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl Scalar for Ratio<i128> {
    fn ratio(num: u64, den: u64) -> Self {
        debug_assert!(den != 0);
        Ratio::new(num as i128, den as i128)
    }

    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// `true` when `x` equals one exactly.
pub fn is_one<S: Scalar>(x: &S) -> bool {
    *x == S::one()
}
