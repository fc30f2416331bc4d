//! Channel-impulse-response matrices and the static/time-varying split.
//!
//! A received frame is an `N x M` complex matrix: `N` fast-time samples per
//! pulse repetition, `M` repetitions in slow time. Storage is column-major so
//! each repetition is a contiguous slice.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix, column-major (row index varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_column_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a list of columns of equal length.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * cols);
        for c in columns {
            if c.len() != rows {
                return Err(Error::ShapeMismatch("ragged columns".into()));
            }
            data.extend_from_slice(c);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[col * self.rows + row]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[col * self.rows + row] = value;
    }

    pub fn column(&self, col: usize) -> &[Complex64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn column_mut(&mut self, col: usize) -> &mut [Complex64] {
        let rows = self.rows;
        &mut self.data[col * rows..(col + 1) * rows]
    }

    pub fn row(&self, row: usize) -> Vec<Complex64> {
        (0..self.cols).map(|c| self.get(row, c)).collect()
    }

    /// Columns `start..end` as a new matrix.
    pub fn column_range(&self, start: usize, end: usize) -> Self {
        Self {
            rows: self.rows,
            cols: end - start,
            data: self.data[start * self.rows..end * self.rows].to_vec(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for z in &mut self.data {
            *z *= factor;
        }
    }

    pub fn energy(&self) -> f64 {
        frobenius_energy(self)
    }
}

/// Received CIR frame `R` with its sampling intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct CirMatrix {
    matrix: ComplexMatrix,
    t_ft: f64,
    t_st: f64,
}

impl CirMatrix {
    pub fn new(matrix: ComplexMatrix, t_ft: f64, t_st: f64) -> Result<Self> {
        if matrix.rows() < 1 {
            return Err(Error::ShapeTooSmall("need at least one fast-time sample".into()));
        }
        if matrix.cols() < 2 {
            return Err(Error::ShapeTooSmall(format!(
                "need at least two slow-time repetitions, got {}",
                matrix.cols()
            )));
        }
        if !(t_ft > 0.0 && t_st > 0.0) {
            return Err(Error::Config(format!(
                "sampling intervals must be positive (t_ft={t_ft}, t_st={t_st})"
            )));
        }
        Ok(Self { matrix, t_ft, t_st })
    }

    pub fn n_fast(&self) -> usize {
        self.matrix.rows()
    }

    pub fn m_slow(&self) -> usize {
        self.matrix.cols()
    }

    pub fn t_ft(&self) -> f64 {
        self.t_ft
    }

    pub fn t_st(&self) -> f64 {
        self.t_st
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// Slow-time residual `R - r̄ 1ᵀ`. Rows have zero mean when produced by
/// [`mean_remove`]; augmentation adds noise on top and keeps the type.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanRemovedMatrix(ComplexMatrix);

impl MeanRemovedMatrix {
    /// Wraps a matrix already known to be a residual (or a noisy one).
    pub fn from_matrix(matrix: ComplexMatrix) -> Self {
        Self(matrix)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn matrix_mut(&mut self) -> &mut ComplexMatrix {
        &mut self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn n_fast(&self) -> usize {
        self.0.rows()
    }

    pub fn m_slow(&self) -> usize {
        self.0.cols()
    }

    pub fn energy(&self) -> f64 {
        frobenius_energy(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityLabel {
    Breathing,
    Talking,
    Moving,
    Empty,
}

impl ActivityLabel {
    pub const ALL: [ActivityLabel; 4] = [
        ActivityLabel::Breathing,
        ActivityLabel::Talking,
        ActivityLabel::Moving,
        ActivityLabel::Empty,
    ];
    pub const OCCUPIED: [ActivityLabel; 3] = [
        ActivityLabel::Breathing,
        ActivityLabel::Talking,
        ActivityLabel::Moving,
    ];

    pub fn is_occupied(self) -> bool {
        self != ActivityLabel::Empty
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActivityLabel::Breathing => "breathing",
            ActivityLabel::Talking => "talking",
            ActivityLabel::Moving => "moving",
            ActivityLabel::Empty => "empty",
        }
    }
}

impl fmt::Display for ActivityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActivityLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "breathing" => Ok(ActivityLabel::Breathing),
            "talking" => Ok(ActivityLabel::Talking),
            "moving" => Ok(ActivityLabel::Moving),
            "empty" => Ok(ActivityLabel::Empty),
            other => Err(Error::Parse(format!("unknown activity label {other:?}"))),
        }
    }
}

/// Where a sample came from. Participant biometrics are not modelled.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub car: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seat: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant: Option<String>,
    /// Identifier of the source recording the sample was cut from.
    #[serde(default)]
    pub recording: String,
    pub segment_index: usize,
}

/// One labelled 10 s observation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub cir: CirMatrix,
    pub label: ActivityLabel,
    pub provenance: Provenance,
}

impl SampleRecord {
    pub fn new(cir: CirMatrix, label: ActivityLabel, mut provenance: Provenance) -> Self {
        if label == ActivityLabel::Empty {
            provenance.seat = None;
            provenance.participant = None;
        }
        Self {
            cir,
            label,
            provenance,
        }
    }
}

/// Splits `R` into the slow-time mean `r̄` and the residual `R̃`.
pub fn mean_remove(r: &CirMatrix) -> Result<(Vec<Complex64>, MeanRemovedMatrix)> {
    mean_remove_matrix(r.matrix())
}

/// [`mean_remove`] on a bare matrix.
pub fn mean_remove_matrix(r: &ComplexMatrix) -> Result<(Vec<Complex64>, MeanRemovedMatrix)> {
    let (n, m) = (r.rows(), r.cols());
    if m < 2 {
        return Err(Error::ShapeTooSmall(format!(
            "mean removal needs at least two columns, got {m}"
        )));
    }
    // mean of the deviations from the first column, so that identical
    // columns give an exactly zero residual
    let first = r.column(0);
    let mut shift = vec![Complex64::new(0.0, 0.0); n];
    for c in 1..m {
        for ((acc, z), z0) in shift.iter_mut().zip(r.column(c)).zip(first) {
            *acc += z - z0;
        }
    }
    let inv = 1.0 / m as f64;
    let mean: Vec<Complex64> = first.iter().zip(&shift).map(|(z0, d)| z0 + d * inv).collect();
    let mut residual = r.clone();
    for c in 0..m {
        for (z, mu) in residual.column_mut(c).iter_mut().zip(&mean) {
            *z -= mu;
        }
    }
    Ok((mean, MeanRemovedMatrix(residual)))
}

/// Squared Frobenius norm `Σ |entry|²`.
pub fn frobenius_energy(r: &ComplexMatrix) -> f64 {
    r.as_slice().iter().map(Complex64::norm_sqr).sum()
}
