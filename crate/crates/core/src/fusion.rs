//! Regularized canonical correlation analysis between two views of the
//! same items, and the concatenated-projection fusion rule.
//!
//! The solver works on thin SVDs of the centered data, so it stays cheap
//! when there are far fewer items than feature dimensions.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::features::{ByteReader, FeatureKind, FeatureVector};

const MAGIC: &[u8; 8] = b"VRCCA001";

#[derive(Debug, Clone, PartialEq)]
pub struct CcaModel {
    pub wx: DMatrix<f64>,
    pub wy: DMatrix<f64>,
    /// Descending.
    pub correlations: Vec<f64>,
    pub mean_x: DVector<f64>,
    pub mean_y: DVector<f64>,
    pub ridge_x: f64,
    pub ridge_y: f64,
}

impl CcaModel {
    pub fn k(&self) -> usize {
        self.correlations.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.wx.nrows(), self.wy.nrows())
    }

    /// Projects rows of `x` (items x d1) onto the X canonical directions.
    pub fn project_x(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        project(x, &self.mean_x, &self.wx)
    }

    pub fn project_y(&self, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        project(y, &self.mean_y, &self.wy)
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let (d1, d2) = self.dims();
        out.write_all(MAGIC)?;
        for v in [d1, d2, self.k()] {
            out.write_all(&(v as u64).to_le_bytes())?;
        }
        let floats = [self.ridge_x, self.ridge_y]
            .into_iter()
            .chain(self.mean_x.iter().copied())
            .chain(self.mean_y.iter().copied())
            .chain(self.correlations.iter().copied())
            .chain(self.wx.iter().copied())
            .chain(self.wy.iter().copied());
        for f in floats {
            out.write_all(&f.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        r.expect_magic(MAGIC)?;
        let d1 = r.u64()? as usize;
        let d2 = r.u64()? as usize;
        let k = r.u64()? as usize;
        let ridge_x = r.f64()?;
        let ridge_y = r.f64()?;
        let mean_x = DVector::from_vec(r.f64s(d1)?);
        let mean_y = DVector::from_vec(r.f64s(d2)?);
        let correlations = r.f64s(k)?;
        let wx = DMatrix::from_vec(d1, k, r.f64s(d1 * k)?);
        let wy = DMatrix::from_vec(d2, k, r.f64s(d2 * k)?);
        if r.pos != bytes.len() {
            return Err(Error::format(r.pos, "trailing bytes in CCA model"));
        }
        Ok(Self {
            wx,
            wy,
            correlations,
            mean_x,
            mean_y,
            ridge_x,
            ridge_y,
        })
    }
}

fn project(data: &DMatrix<f64>, mean: &DVector<f64>, w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if data.ncols() != mean.len() {
        return Err(Error::Dimension(format!(
            "model expects {} columns, got {}",
            mean.len(),
            data.ncols()
        )));
    }
    let mut centered = data.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    Ok(centered * w)
}

fn column_means(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.mean()))
}

fn centered(m: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut c = m.clone();
    for mut row in c.row_iter_mut() {
        row -= mean.transpose();
    }
    c
}

/// `1e-4 * trace(C) / d` for the sample covariance `C` of the rows of `m`.
pub fn default_ridge(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n < 2 || m.ncols() == 0 {
        return 0.0;
    }
    let c = centered(m, &column_means(m));
    let trace = c.iter().map(|v| v * v).sum::<f64>() / (n - 1) as f64;
    1e-4 * trace / m.ncols() as f64
}

/// Per-view whitening of centered data through its thin SVD.
struct Whitened {
    /// Left singular vectors (n x m).
    u: DMatrix<f64>,
    /// Right singular vectors (d x m).
    v: DMatrix<f64>,
    singular: Vec<f64>,
    /// `1 / sqrt(s^2 / (n-1) + ridge)` per retained component.
    scale: Vec<f64>,
}

fn whiten(c: &DMatrix<f64>, ridge: f64, view: &str) -> Result<Whitened> {
    let (n, d) = c.shape();
    let svd = c.clone().svd(true, true);
    let u_all = svd.u.expect("requested U");
    let vt_all = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max();
    let tol = (n.max(d) as f64) * f64::EPSILON * smax.max(f64::MIN_POSITIVE);
    let mut order: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > tol)
        .collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    if ridge == 0.0 && order.len() < d {
        return Err(Error::Singular(format!(
            "{view} covariance has rank {} < {d}",
            order.len()
        )));
    }
    let m = order.len();
    let mut u = DMatrix::zeros(n, m);
    let mut v = DMatrix::zeros(d, m);
    let mut singular = Vec::with_capacity(m);
    let mut scale = Vec::with_capacity(m);
    for (j, &i) in order.iter().enumerate() {
        let s = svd.singular_values[i];
        u.set_column(j, &u_all.column(i));
        v.set_column(j, &vt_all.row(i).transpose());
        singular.push(s);
        scale.push(1.0 / (s * s / (n - 1) as f64 + ridge).sqrt());
    }
    Ok(Whitened {
        u,
        v,
        singular,
        scale,
    })
}

/// CCA with the same ridge added to both within-view covariances.
pub fn fit_cca(x: &DMatrix<f64>, y: &DMatrix<f64>, k: usize, ridge: f64) -> Result<CcaModel> {
    fit_cca_with_ridges(x, y, k, ridge, ridge)
}

/// CCA with per-view ridges: the directions solve the generalized
/// eigenproblem with `Cxx + ridge_x I` and `Cyy + ridge_y I`.
pub fn fit_cca_with_ridges(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    k: usize,
    ridge_x: f64,
    ridge_y: f64,
) -> Result<CcaModel> {
    let n = x.nrows();
    if y.nrows() != n {
        return Err(Error::Alignment(format!(
            "X has {n} rows, Y has {}",
            y.nrows()
        )));
    }
    if n < 2 {
        return Err(Error::EmptyInput("CCA needs at least two items"));
    }
    let (d1, d2) = (x.ncols(), y.ncols());
    if k == 0 || k > d1.min(d2).min(n - 1) {
        return Err(Error::Parameter(format!(
            "k = {k} must lie in 1..={}",
            d1.min(d2).min(n - 1)
        )));
    }
    if !(ridge_x >= 0.0 && ridge_y >= 0.0) {
        return Err(Error::Parameter("ridge must be nonnegative".into()));
    }

    let mean_x = column_means(x);
    let mean_y = column_means(y);
    let wx_side = whiten(&centered(x, &mean_x), ridge_x, "X")?;
    let wy_side = whiten(&centered(y, &mean_y), ridge_y, "Y")?;

    // T = diag(s_x c_x) Ux' Uy diag(s_y c_y) / (n-1)
    let mut t = wx_side.u.transpose() * &wy_side.u;
    for (i, mut row) in t.row_iter_mut().enumerate() {
        row *= wx_side.singular[i] * wx_side.scale[i];
    }
    for (j, mut col) in t.column_iter_mut().enumerate() {
        col *= wy_side.singular[j] * wy_side.scale[j] / (n - 1) as f64;
    }
    if k > t.nrows().min(t.ncols()) {
        return Err(Error::Parameter(format!(
            "k = {k} exceeds the joint rank {}",
            t.nrows().min(t.ncols())
        )));
    }
    let svd = t.svd(true, true);
    let p = svd.u.expect("requested U");
    let qt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut wx = DMatrix::zeros(d1, k);
    let mut wy = DMatrix::zeros(d2, k);
    let mut correlations = Vec::with_capacity(k);
    for (j, &i) in order.iter().take(k).enumerate() {
        let mut px = p.column(i).clone_owned();
        for (r, v) in px.iter_mut().enumerate() {
            *v *= wx_side.scale[r];
        }
        let mut qy = qt.row(i).transpose();
        for (r, v) in qy.iter_mut().enumerate() {
            *v *= wy_side.scale[r];
        }
        let mut a = &wx_side.v * px;
        let mut b = &wy_side.v * qy;
        let pivot = a.iter().copied().max_by(|p, q| p.abs().total_cmp(&q.abs())).unwrap_or(0.0);
        if pivot < 0.0 {
            a.neg_mut();
            b.neg_mut();
        }
        wx.set_column(j, &a);
        wy.set_column(j, &b);
        correlations.push(svd.singular_values[i].clamp(0.0, 1.0));
    }
    Ok(CcaModel {
        wx,
        wy,
        correlations,
        mean_x,
        mean_y,
        ridge_x,
        ridge_y,
    })
}

/// `[wx'(x - mean_x) ‖ wy'(y - mean_y)]`, length `2k`.
pub fn fuse(model: &CcaModel, x: &[f64], y: &[f64]) -> Result<FeatureVector> {
    let (d1, d2) = model.dims();
    if x.len() != d1 || y.len() != d2 {
        return Err(Error::Dimension(format!(
            "model is {d1}/{d2}, inputs are {}/{}",
            x.len(),
            y.len()
        )));
    }
    let xc = DVector::from_column_slice(x) - &model.mean_x;
    let yc = DVector::from_column_slice(y) - &model.mean_y;
    let px = model.wx.tr_mul(&xc);
    let py = model.wy.tr_mul(&yc);
    FeatureVector::new(FeatureKind::Fused, px.iter().chain(py.iter()).copied().collect())
}
