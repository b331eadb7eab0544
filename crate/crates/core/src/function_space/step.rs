use crate::error::{ChaosError, Result};

/// Step function `Σ_i a_i (χ_{s_{i+1}} − χ_{s_i})`: value `a_i` on `(s_i, s_{i+1}]`,
/// zero outside `(s_0, s_N]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || values.len() + 1 != breaks.len() {
            return Err(ChaosError::Dimension(format!(
                "{} breakpoints need {} values, got {}",
                breaks.len(),
                breaks.len().saturating_sub(1),
                values.len()
            )));
        }
        if !breaks.windows(2).all(|w| w[0] < w[1]) {
            return Err(ChaosError::Config(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self { breaks, values })
    }

    /// The indicator `χ_t` of `[0, t]` (as a step on `(0, t]`).
    pub fn indicator(t: f64) -> Result<Self> {
        Self::new(vec![0.0, t], vec![1.0])
    }

    /// Piecewise-constant sampling of `f` at cell right endpoints.
    pub fn sample<F: Fn(f64) -> f64>(f: F, breaks: Vec<f64>) -> Result<Self> {
        let values = breaks.windows(2).map(|w| f(w[1])).collect();
        Self::new(breaks, values)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index `i` with `s ∈ (s_i, s_{i+1}]`.
    pub fn cell(&self, s: f64) -> Option<usize> {
        if s <= self.breaks[0] || s > *self.breaks.last().expect("non-empty") {
            return None;
        }
        let i = self.breaks.partition_point(|&b| b < s);
        Some(i - 1)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.cell(s).map_or(0.0, |i| self.values[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_are_left_open() {
        let f = StepFunction::new(vec![0.0, 0.5, 1.0], vec![2.0, -1.0]).unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(0.25), 2.0);
        assert_eq!(f.eval(0.5), 2.0);
        assert_eq!(f.eval(0.75), -1.0);
        assert_eq!(f.eval(1.0), -1.0);
        assert_eq!(f.eval(1.1), 0.0);
    }

    #[test]
    fn validation() {
        assert!(StepFunction::new(vec![0.0, 1.0], vec![]).is_err());
        assert!(StepFunction::new(vec![0.0, 0.0], vec![1.0]).is_err());
    }
}
