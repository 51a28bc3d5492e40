use crate::error::{Error, Result};

/// Paired observations `(x_i, y_i)` with every `x_i` in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl DataSet {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidData(format!(
                "{} design points but {} responses",
                xs.len(),
                ys.len()
            )));
        }
        if xs.is_empty() {
            return Err(Error::InvalidData("no observations".into()));
        }
        if let Some(x) = xs.iter().find(|x| !(**x >= 0.0 && **x < 1.0)) {
            return Err(Error::InvalidData(format!("design point {x} outside [0, 1)")));
        }
        if let Some(y) = ys.iter().find(|y| !y.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite response {y}")));
        }
        Ok(DataSet { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Same design, responses shifted by `c`.
    pub fn shifted(&self, c: f64) -> DataSet {
        DataSet { xs: self.xs.clone(), ys: self.ys.iter().map(|y| y + c).collect() }
    }
}
