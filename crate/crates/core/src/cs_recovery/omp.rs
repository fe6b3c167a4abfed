use super::{dot, BufferStateVector, MeasurementModel, MeasurementVector};
use crate::error::{Error, Result};

/// Ridge added to the Gram diagonal of the least-squares substep.
const LS_RIDGE: f64 = 1e-12;
/// Relative residual at which the fit is treated as exact.
const EXACT_FIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stopping {
    /// Stop after this many selected columns.
    MaxSupport(usize),
    /// Stop once the squared residual norm is at most this bound.
    ResidualBound(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryConfig {
    pub stopping: Stopping,
    /// Round coefficients to the nearest constellation point and drop zeros.
    pub quantize: bool,
}

impl RecoveryConfig {
    pub fn max_support(sparsity: usize) -> Self {
        Self { stopping: Stopping::MaxSupport(sparsity), quantize: true }
    }

    pub fn validate(&self) -> Result<()> {
        match self.stopping {
            Stopping::MaxSupport(0) => Err(Error::Domain("max_support must be >= 1".into())),
            Stopping::ResidualBound(d) if !(d >= 0.0) => {
                Err(Error::Domain(format!("residual bound must be >= 0, got {d}")))
            }
            _ => Ok(()),
        }
    }
}

/// Output of sparse recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// Dense coefficient vector of length `N`.
    pub values: Vec<f64>,
    /// Nonzero indices, in selection order.
    pub support: Vec<usize>,
    /// `||y - A values||_2`.
    pub residual_norm: f64,
}

impl Estimate {
    /// Rounds to the constellation `{0, .., max}`.
    pub fn to_buffer_state(&self, constellation_max: u32) -> BufferStateVector {
        let entries = self.values.iter().map(|&v| quantize(v, constellation_max)).collect();
        BufferStateVector::new(entries, constellation_max).expect("quantized entries are in range")
    }
}

fn quantize(v: f64, max: u32) -> u32 {
    v.round().clamp(0.0, max as f64) as u32
}

/// Orthogonal matching pursuit.
///
/// Each round picks the column with the largest absolute correlation to the
/// residual (lowest index on ties), refits all selected coefficients by least
/// squares and updates the residual.
pub fn omp_recover(model: &MeasurementModel, y: &MeasurementVector, cfg: &RecoveryConfig) -> Result<Estimate> {
    cfg.validate()?;
    let m = model.n_measurements();
    let n = model.n_users();
    if y.len() != m {
        return Err(Error::Dimension(format!("measurement vector has length {}, model has {m} rows", y.len())));
    }
    let y = y.values();
    let y_norm = dot(y, y).sqrt();
    let max_iters = match cfg.stopping {
        Stopping::MaxSupport(s) => s.min(m).min(n),
        Stopping::ResidualBound(_) => m.min(n),
    };

    let mut residual = y.to_vec();
    let mut selected = vec![false; n];
    let mut support: Vec<usize> = Vec::with_capacity(max_iters);
    let mut chol = IncrementalCholesky::with_capacity(max_iters);
    // A_S^T y, grown alongside the support
    let mut rhs: Vec<f64> = Vec::with_capacity(max_iters);
    let mut coef: Vec<f64> = Vec::new();
    let mut corr = vec![0.0; n];

    loop {
        let r2 = dot(&residual, &residual);
        let done = match cfg.stopping {
            Stopping::MaxSupport(_) => false,
            Stopping::ResidualBound(delta) => r2 <= delta,
        };
        if done || support.len() >= max_iters || r2.sqrt() <= EXACT_FIT * y_norm || y_norm == 0.0 {
            break;
        }
        model.correlate(&residual, &mut corr);
        let mut best = None;
        let mut best_abs = -1.0;
        for (k, &c) in corr.iter().enumerate() {
            if !selected[k] && c.abs() > best_abs {
                best_abs = c.abs();
                best = Some(k);
            }
        }
        let Some(k) = best else { break };
        selected[k] = true;
        let col = model.column(k);
        let cross: Vec<f64> = support.iter().map(|&j| dot(model.column(j), col)).collect();
        chol.push(&cross, dot(col, col) + LS_RIDGE);
        support.push(k);
        rhs.push(dot(col, y));
        coef = chol.solve(&rhs);

        residual.copy_from_slice(y);
        for (&j, &c) in support.iter().zip(&coef) {
            for (r, a) in residual.iter_mut().zip(model.column(j)) {
                *r -= c * a;
            }
        }
    }

    let mut values = vec![0.0; n];
    for (&j, &c) in support.iter().zip(&coef) {
        values[j] = c;
    }
    if cfg.quantize {
        let max = model.constellation_max();
        for v in values.iter_mut() {
            *v = quantize(*v, max) as f64;
        }
        support.retain(|&j| values[j] != 0.0);
    }
    let fitted = model.apply(&values)?;
    let residual_norm = y.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(Estimate { values, support, residual_norm })
}

/// Lower-triangular factor of a Gram matrix that grows one row at a time.
struct IncrementalCholesky {
    rows: Vec<Vec<f64>>,
}

impl IncrementalCholesky {
    fn with_capacity(n: usize) -> Self {
        Self { rows: Vec::with_capacity(n) }
    }

    /// Appends a row/column with off-diagonal `cross` and diagonal `diag`.
    fn push(&mut self, cross: &[f64], diag: f64) {
        let w = self.forward(cross);
        let d2 = diag - dot(&w, &w);
        let mut row = w;
        row.push(d2.max(LS_RIDGE).sqrt());
        self.rows.push(row);
    }

    fn forward(&self, b: &[f64]) -> Vec<f64> {
        let mut z = Vec::with_capacity(b.len() + 1);
        for (i, row) in self.rows.iter().enumerate() {
            let s = b[i] - dot(&row[..i], &z);
            z.push(s / row[i]);
        }
        z
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let z = self.forward(b);
        let n = z.len();
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= self.rows[j][i] * x[j];
            }
            x[i] = s / self.rows[i][i];
        }
        x
    }
}
