use crate::error::{GamaError, Result};

/// A `channels × steps` real matrix stored channel-major.
///
/// Each row is one embedding channel, each column one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMatrix {
    channels: usize,
    steps: usize,
    values: Vec<f64>,
}

impl SignalMatrix {
    pub fn new(channels: usize, steps: usize, values: Vec<f64>) -> Result<Self> {
        if channels == 0 || steps == 0 {
            return Err(GamaError::Shape(format!(
                "signal must be non-empty, got {channels}x{steps}"
            )));
        }
        if values.len() != channels * steps {
            return Err(GamaError::Shape(format!(
                "{} values cannot fill a {channels}x{steps} signal",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GamaError::NonFinite("signal"));
        }
        Ok(Self {
            channels,
            steps,
            values,
        })
    }

    pub fn zeros(channels: usize, steps: usize) -> Self {
        assert!(channels > 0 && steps > 0, "signal must be non-empty");
        Self {
            channels,
            steps,
            values: vec![0.0; channels * steps],
        }
    }

    /// Builds a matrix from per-channel rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let channels = rows.len();
        let steps = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != steps) {
            return Err(GamaError::Shape("rows have different lengths".into()));
        }
        Self::new(channels, steps, rows.concat())
    }

    /// Builds a matrix whose columns are the given `channels`-long vectors.
    pub fn from_columns(channels: usize, columns: &[&[f64]]) -> Result<Self> {
        let steps = columns.len();
        let mut values = vec![0.0; channels * steps];
        for (t, col) in columns.iter().enumerate() {
            if col.len() != channels {
                return Err(GamaError::Shape(format!(
                    "column {t} has length {}, expected {channels}",
                    col.len()
                )));
            }
            for (c, &v) in col.iter().enumerate() {
                values[c * steps + t] = v;
            }
        }
        Self::new(channels, steps, values)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, channel: usize) -> &[f64] {
        &self.values[channel * self.steps..(channel + 1) * self.steps]
    }

    pub fn row_mut(&mut self, channel: usize) -> &mut [f64] {
        &mut self.values[channel * self.steps..(channel + 1) * self.steps]
    }

    pub fn get(&self, channel: usize, step: usize) -> f64 {
        self.values[channel * self.steps + step]
    }

    pub fn set(&mut self, channel: usize, step: usize, v: f64) {
        self.values[channel * self.steps + step] = v;
    }

    /// Copies out column `step` (the `channels`-vector at one time step).
    pub fn column(&self, step: usize) -> Vec<f64> {
        (0..self.channels).map(|c| self.get(c, step)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.steps)
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// `self * alpha + other * beta`, same shape required.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.channels != other.channels || self.steps != other.steps {
            return Err(GamaError::Shape(format!(
                "{}x{} vs {}x{}",
                self.channels, self.steps, other.channels, other.steps
            )));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(Self {
            channels: self.channels,
            steps: self.steps,
            values,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.channels, self.steps),
            (other.channels, other.steps),
            "shape mismatch"
        );
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(SignalMatrix::new(0, 3, vec![]).is_err());
        assert!(SignalMatrix::new(2, 2, vec![0.0; 3]).is_err());
        assert!(SignalMatrix::new(1, 1, vec![f64::NAN]).is_err());
        assert!(SignalMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn columns_and_rows_agree() {
        let m = SignalMatrix::from_columns(2, &[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]).unwrap();
        assert_eq!(m.row(0), &[1.0, 3.0, 5.0]);
        assert_eq!(m.row(1), &[2.0, 4.0, 6.0]);
        assert_eq!(m.column(1), vec![3.0, 4.0]);
    }
}
