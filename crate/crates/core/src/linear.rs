//! Normal linear model with known error variance and a flat initial prior
//! on the coefficients.
//!
//! Dense linear algebra lives here too; designs are expected to have at most
//! a couple of dozen columns.

use crate::error::{Error, Result};
use crate::normal::RelativeVariance;
use crate::quadrature::{AlphaPosteriorGrid, GridMeta, GridSpec, ModelKind};
use crate::specfun::{beta_log_pdf_split, BetaParams, LogValue};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k, k);
        for i in 0..k {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(l, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect())
    }

    /// `XᵀX`.
    pub fn gram(&self) -> Matrix {
        let mut g = Matrix::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let s: f64 = (0..self.rows).map(|r| self[(r, i)] * self[(r, j)]).sum();
                g[(i, j)] = s;
                g[(j, i)] = s;
            }
        }
        g
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, scale: f64, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.data.len(),
                found: other.data.len(),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + scale * b).collect();
        Ok(Matrix { data, ..*self })
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            data: self.data.iter().map(|v| v * s).collect(),
            ..*self
        }
    }

    fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= 1e-12 * scale.max(1.0)))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn new(a: &Matrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::DimensionMismatch {
                expected: a.rows,
                found: a.cols,
            });
        }
        let k = a.rows;
        let mut l = Matrix::zeros(k, k);
        for j in 0..k {
            let mut d = a[(j, j)];
            for m in 0..j {
                d -= l[(j, m)] * l[(j, m)];
            }
            // Pivots that vanish relative to the original diagonal mean rank loss.
            if !(d > 1e-13 * a[(j, j)].abs()) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..k {
                let mut s = a[(i, j)];
                for m in 0..j {
                    s -= l[(i, m)] * l[(j, m)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    /// `ln det A`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.l[(i, i)].ln()).sum::<f64>()
    }

    /// Solves `L z = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let k = self.dim();
        let mut z = b.to_vec();
        for i in 0..k {
            let mut s = z[i];
            for m in 0..i {
                s -= self.l[(i, m)] * z[m];
            }
            z[i] = s / self.l[(i, i)];
        }
        z
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let k = self.dim();
        if b.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: b.len(),
            });
        }
        let mut x = self.solve_lower(b);
        for i in (0..k).rev() {
            let mut s = x[i];
            for m in i + 1..k {
                s -= self.l[(m, i)] * x[m];
            }
            x[i] = s / self.l[(i, i)];
        }
        Ok(x)
    }

    /// `bᵀ A⁻¹ b`.
    pub fn quad_form(&self, b: &[f64]) -> f64 {
        self.solve_lower(b).iter().map(|z| z * z).sum()
    }

    pub fn inverse(&self) -> Matrix {
        let k = self.dim();
        let mut inv = Matrix::zeros(k, k);
        let mut e = vec![0.0; k];
        for j in 0..k {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e).expect("dimension checked");
            for i in 0..k {
                inv[(i, j)] = col[i];
            }
        }
        // Symmetrize rounding noise.
        for i in 0..k {
            for j in 0..i {
                let m = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = m;
                inv[(j, i)] = m;
            }
        }
        inv
    }
}

/// Raw data of one study: design, responses and the known error sd.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearData {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub sigma: f64,
}

impl LinearData {
    pub fn new(x: Matrix, y: Vec<f64>, sigma: f64) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch {
                expected: x.rows(),
                found: y.len(),
            });
        }
        if x.cols() == 0 || x.rows() < x.cols() {
            return Err(Error::SingularDesign(format!(
                "need n >= k >= 1, got n = {}, k = {}",
                x.rows(),
                x.cols()
            )));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::domain("sigma must be positive"));
        }
        Ok(LinearData { x, y, sigma })
    }
}

/// Least-squares estimate together with the Gram matrix `XᵀX`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSummary {
    pub theta_hat: Vec<f64>,
    pub xtx: Matrix,
}

impl LinearSummary {
    pub fn new(theta_hat: Vec<f64>, xtx: Matrix) -> Result<Self> {
        if xtx.rows() != theta_hat.len() {
            return Err(Error::DimensionMismatch {
                expected: xtx.rows(),
                found: theta_hat.len(),
            });
        }
        if !xtx.is_symmetric() {
            return Err(Error::NotPositiveDefinite);
        }
        Cholesky::new(&xtx)?;
        Ok(LinearSummary { theta_hat, xtx })
    }

    pub fn dim(&self) -> usize {
        self.theta_hat.len()
    }
}

/// Solves the normal equations by Cholesky.
pub fn ols_estimate(data: &LinearData) -> Result<LinearSummary> {
    let xtx = data.x.gram();
    let chol = Cholesky::new(&xtx)
        .map_err(|_| Error::SingularDesign("design matrix does not have full column rank".to_string()))?;
    let xty = data.x.transpose().mul_vec(&data.y)?;
    let theta_hat = chol.solve(&xty)?;
    Ok(LinearSummary { theta_hat, xtx })
}

/// Log density of `N_k(mean, cov)` at `x`.
pub fn mvn_log_density(x: &[f64], mean: &[f64], cov: &Matrix) -> Result<LogValue> {
    if x.len() != mean.len() {
        return Err(Error::DimensionMismatch {
            expected: mean.len(),
            found: x.len(),
        });
    }
    let chol = Cholesky::new(cov)?;
    if chol.dim() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: chol.dim(),
            found: x.len(),
        });
    }
    let d: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    let k = x.len() as f64;
    Ok(-0.5 * (k * LN_2PI + chol.log_det() + chol.quad_form(&d)))
}

/// `|XᵀX| / |X₀ᵀX₀|`.
pub fn relative_precision_c(cur: &LinearSummary, hist: &LinearSummary) -> Result<RelativeVariance> {
    if cur.dim() != hist.dim() {
        return Err(Error::DimensionMismatch {
            expected: hist.dim(),
            found: cur.dim(),
        });
    }
    let ld = Cholesky::new(&cur.xtx)?.log_det() - Cholesky::new(&hist.xtx)?.log_det();
    RelativeVariance::new(ld.exp())
}

/// Marginal posterior of α in the linear model with known error sd `sigma`.
///
/// The marginal covariance `σ²((XᵀX)⁻¹ + α⁻¹(X₀ᵀX₀)⁻¹)` is evaluated as
/// `σ²α⁻¹(α(XᵀX)⁻¹ + (X₀ᵀX₀)⁻¹)`, which stays bounded as α → 0.
pub fn alpha_posterior_linear(
    cur: &LinearSummary,
    hist: &LinearSummary,
    sigma: f64,
    prior: BetaParams,
    spec: &GridSpec,
    tol: f64,
) -> Result<AlphaPosteriorGrid> {
    if cur.dim() != hist.dim() {
        return Err(Error::DimensionMismatch {
            expected: hist.dim(),
            found: cur.dim(),
        });
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain("sigma must be positive"));
    }
    let k = cur.dim();
    let cur_inv = Cholesky::new(&cur.xtx)?.inverse();
    let hist_inv = Cholesky::new(&hist.xtx)?.inverse();
    let delta: Vec<f64> = cur.theta_hat.iter().zip(&hist.theta_hat).map(|(a, b)| a - b).collect();
    let (kf, s2) = (k as f64, sigma * sigma);

    let kernel = |a: f64, one_minus: f64| -> LogValue {
        let m = hist_inv.add_scaled(a, &cur_inv).expect("same dimension");
        let Ok(chol) = Cholesky::new(&m) else {
            return f64::NAN;
        };
        let log_det_cov = kf * s2.ln() - kf * a.ln() + chol.log_det();
        let quad = a / s2 * chol.quad_form(&delta);
        -0.5 * (kf * LN_2PI + log_det_cov + quad) + beta_log_pdf_split(a, one_minus, prior)
    };
    let meta = GridMeta {
        model: ModelKind::Linear,
        prior,
        inputs: format!("k={k} sigma={sigma}"),
    };
    AlphaPosteriorGrid::from_kernel(kernel, spec, tol, meta)
}
