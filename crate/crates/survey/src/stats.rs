//! Descriptive statistics, generic over the float type.

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

use crate::SurveyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdKind {
    /// Divide by n - 1.
    #[default]
    Sample,
    /// Divide by n.
    Population,
}

fn count<T: FromPrimitive>(n: usize) -> T {
    T::from_usize(n).expect("length fits the float type")
}

pub fn mean<T: Float + FromPrimitive>(xs: &[T]) -> Result<T, SurveyError> {
    if xs.is_empty() {
        return Err(SurveyError::Empty);
    }
    let sum = xs.iter().fold(T::zero(), |a, x| a + *x);
    Ok(sum / count(xs.len()))
}

pub fn sd<T: Float + FromPrimitive>(xs: &[T], kind: SdKind) -> Result<T, SurveyError> {
    let m = mean(xs)?;
    let denom = match kind {
        SdKind::Sample if xs.len() < 2 => return Err(SurveyError::TooShort(xs.len())),
        SdKind::Sample => xs.len() - 1,
        SdKind::Population => xs.len(),
    };
    let ss = xs.iter().fold(T::zero(), |a, x| a + (*x - m) * (*x - m));
    Ok((ss / count(denom)).sqrt())
}

/// Pearson correlation coefficient, clamped to [-1, 1] against rounding.
pub fn pearson<T: Float + FromPrimitive>(xs: &[T], ys: &[T]) -> Result<T, SurveyError> {
    if xs.len() != ys.len() {
        return Err(SurveyError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(SurveyError::TooShort(xs.len()));
    }
    let (mx, my) = (mean(xs)?, mean(ys)?);
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (*x - mx, *y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(SurveyError::ConstantVector);
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

/// Round half away from zero to `places` decimals.
pub fn round_to(x: f64, places: i32) -> f64 {
    let f = 10f64.powi(places);
    (x * f).round() / f
}
