use crate::error::{Error, Result};

/// Symmetric matrix of a quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadraticForm {
    /// Row-major `n x n`.
    Dense { n: usize, a: Vec<f64> },
    /// Band matrix of half-width `bw` plus at most one dense row and column.
    ///
    /// `band[i * (bw + 1) + d]` holds `A[i][i - d]`. Every entry in the row
    /// or column of `border` lives in `border_col` instead.
    BorderedBand {
        n: usize,
        bw: usize,
        band: Vec<f64>,
        border: Option<usize>,
        border_col: Vec<f64>,
    },
}

impl QuadraticForm {
    pub fn dim(&self) -> usize {
        match self {
            QuadraticForm::Dense { n, .. } | QuadraticForm::BorderedBand { n, .. } => *n,
        }
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            QuadraticForm::Dense { n, a } => (0..*n)
                .map(|i| a[i * n..(i + 1) * n].iter().zip(x).map(|(p, q)| p * q).sum())
                .collect(),
            QuadraticForm::BorderedBand {
                n,
                bw,
                band,
                border,
                border_col,
            } => {
                let w = bw + 1;
                let mut y = vec![0.0; *n];
                for i in 0..*n {
                    y[i] += band[i * w] * x[i];
                    for d in 1..=(*bw).min(i) {
                        let v = band[i * w + d];
                        y[i] += v * x[i - d];
                        y[i - d] += v * x[i];
                    }
                }
                if let Some(b) = *border {
                    for j in 0..*n {
                        if j == b {
                            y[b] += border_col[b] * x[b];
                        } else {
                            y[j] += border_col[j] * x[b];
                            y[b] += border_col[j] * x[j];
                        }
                    }
                }
                y
            }
        }
    }

    /// Entry `A[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            QuadraticForm::Dense { n, a } => a[i * n + j],
            QuadraticForm::BorderedBand {
                bw,
                band,
                border,
                border_col,
                ..
            } => {
                if Some(i) == *border {
                    return border_col[j];
                }
                if Some(j) == *border {
                    return border_col[i];
                }
                let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
                if hi - lo > *bw {
                    0.0
                } else {
                    band[hi * (bw + 1) + hi - lo]
                }
            }
        }
    }
}

/// Quadratic `q(x) = 1/2 x^T A x + b^T x + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunctional {
    pub quad: QuadraticForm,
    pub linear: Vec<f64>,
    pub constant: f64,
    pub meta: Option<super::mesh::Mesh>,
}

impl DiscreteFunctional {
    pub fn dense(n: usize, a: Vec<f64>, linear: Vec<f64>, constant: f64) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: a.len(),
            });
        }
        if linear.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: linear.len(),
            });
        }
        Ok(Self {
            quad: QuadraticForm::Dense { n, a },
            linear,
            constant,
            meta: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.quad.apply(x)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let ax = self.apply(x);
        0.5 * dot(x, &ax) + dot(&self.linear, x) + self.constant
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Builds a bordered band functional from weighted squares of sparse
/// affine forms.
#[derive(Debug, Clone)]
pub(crate) struct Assembler {
    n: usize,
    bw: usize,
    band: Vec<f64>,
    border: Option<usize>,
    border_col: Vec<f64>,
    linear: Vec<f64>,
    constant: f64,
}

impl Assembler {
    pub fn new(n: usize, bw: usize, border: Option<usize>) -> Self {
        Self {
            n,
            bw,
            band: vec![0.0; n * (bw + 1)],
            border,
            border_col: vec![0.0; n],
            linear: vec![0.0; n],
            constant: 0.0,
        }
    }

    fn add_entry(&mut self, i: usize, j: usize, v: f64) {
        if Some(i) == self.border {
            self.border_col[j] += v;
        } else if Some(j) == self.border {
            self.border_col[i] += v;
        } else {
            let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
            assert!(hi - lo <= self.bw, "entry ({i}, {j}) outside the band");
            self.band[hi * (self.bw + 1) + hi - lo] += v;
        }
    }

    /// Adds `weight * (sum_k coef_k x_k + c)^2`; terms with index `None`
    /// are fixed at zero.
    pub fn add_square(&mut self, weight: f64, terms: &[(Option<usize>, f64)], c: f64) {
        let mut terms = terms.to_vec();
        merge_terms(&mut terms);
        for (a, &(ia, ca)) in terms.iter().enumerate() {
            let Some(ia) = ia else { continue };
            self.linear[ia] += 2.0 * weight * c * ca;
            for &(ib, cb) in &terms[..a] {
                if let Some(ib) = ib {
                    // counted once for (a, b) and once for (b, a)
                    self.add_entry(ia, ib, 2.0 * weight * ca * cb);
                }
            }
            self.add_entry_diag(ia, 2.0 * weight * ca * ca);
        }
        self.constant += weight * c * c;
    }

    fn add_entry_diag(&mut self, i: usize, v: f64) {
        self.add_entry(i, i, v);
    }

    /// Adds `weight * int f^2` over an element of length `h` on which `f` is
    /// linear with end values `left` and `right`, each an affine form.
    pub fn add_linear_square(
        &mut self,
        weight: f64,
        h: f64,
        left: (&[(Option<usize>, f64)], f64),
        right: (&[(Option<usize>, f64)], f64),
    ) {
        // h/3 (L^2 + L R + R^2) = h/3 (L + R/2)^2 + h/4 R^2
        let mut mixed: Vec<(Option<usize>, f64)> = left.0.to_vec();
        mixed.extend(right.0.iter().map(|&(i, c)| (i, 0.5 * c)));
        self.add_square(weight * h / 3.0, &mixed, left.1 + 0.5 * right.1);
        self.add_square(weight * h / 4.0, right.0, right.1);
    }

    pub fn add_linear(&mut self, i: Option<usize>, v: f64) {
        if let Some(i) = i {
            self.linear[i] += v;
        }
    }

    pub fn add_constant(&mut self, v: f64) {
        self.constant += v;
    }

    pub fn finish(self, meta: Option<super::mesh::Mesh>) -> DiscreteFunctional {
        DiscreteFunctional {
            quad: QuadraticForm::BorderedBand {
                n: self.n,
                bw: self.bw,
                band: self.band,
                border: self.border,
                border_col: self.border_col,
            },
            linear: self.linear,
            constant: self.constant,
            meta,
        }
    }
}

/// Combines repeated indices so that squares expand correctly.
fn merge_terms(terms: &mut Vec<(Option<usize>, f64)>) {
    let mut out: Vec<(Option<usize>, f64)> = Vec::with_capacity(terms.len());
    for &(i, c) in terms.iter() {
        if i.is_none() {
            continue;
        }
        match out.iter_mut().find(|(j, _)| *j == i) {
            Some(slot) => slot.1 += c,
            None => out.push((i, c)),
        }
    }
    *terms = out;
}

/// Minimizer of a functional and its value.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalResult {
    pub minimizer: Vec<f64>,
    pub min_value: f64,
    /// Named scalars that parametrize the minimizer, where the problem has
    /// a reduced form.
    pub reduced_params: Vec<(&'static str, f64)>,
    /// `||A x + b||`, relative to `||b||` when `b != 0`.
    pub residual: f64,
    /// Mesh of the functional the minimizer belongs to, if any.
    pub mesh: Option<super::mesh::Mesh>,
}

enum Factor {
    Dense { n: usize, l: Vec<f64> },
    Band { n: usize, bw: usize, l: Vec<f64> },
}

impl Factor {
    fn dense(n: usize, a: &[f64]) -> Result<Self> {
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i * n + j];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(sum > 0.0) {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: sum });
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(Factor::Dense { n, l })
    }

    fn band(n: usize, bw: usize, band: &[f64]) -> Result<Self> {
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            for d in (0..=bw.min(i)).rev() {
                let j = i - d;
                let mut sum = band[i * w + d];
                let k0 = i.saturating_sub(bw).max(j.saturating_sub(bw));
                for k in k0..j {
                    sum -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if d == 0 {
                    if !(sum > 0.0) {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: sum });
                    }
                    l[i * w] = sum.sqrt();
                } else {
                    l[i * w + d] = sum / l[j * w];
                }
            }
        }
        Ok(Factor::Band { n, bw, l })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        match self {
            Factor::Dense { n, l } => {
                let n = *n;
                for i in 0..n {
                    let s: f64 = (0..i).map(|k| l[i * n + k] * x[k]).sum();
                    x[i] = (x[i] - s) / l[i * n + i];
                }
                for i in (0..n).rev() {
                    let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
                    x[i] = (x[i] - s) / l[i * n + i];
                }
            }
            Factor::Band { n, bw, l } => {
                let (n, bw, w) = (*n, *bw, bw + 1);
                for i in 0..n {
                    let mut s = x[i];
                    for d in 1..=bw.min(i) {
                        s -= l[i * w + d] * x[i - d];
                    }
                    x[i] = s / l[i * w];
                }
                for i in (0..n).rev() {
                    let mut s = x[i];
                    for d in 1..=bw.min(n - 1 - i) {
                        s -= l[(i + d) * w + d] * x[i + d];
                    }
                    x[i] = s / l[i * w];
                }
            }
        }
        x
    }
}

/// Direct solver for `A x = r`: Cholesky for dense forms, band Cholesky with
/// one bordering step otherwise.
struct Solver<'a> {
    factor: Factor,
    border: Option<(usize, &'a [f64], f64, Vec<f64>)>,
}

impl<'a> Solver<'a> {
    fn new(q: &'a QuadraticForm) -> Result<Self> {
        match q {
            QuadraticForm::Dense { n, a } => Ok(Self {
                factor: Factor::dense(*n, a)?,
                border: None,
            }),
            QuadraticForm::BorderedBand {
                n,
                bw,
                band,
                border,
                border_col,
            } => {
                let mut band = band.clone();
                if let Some(b) = *border {
                    band[b * (bw + 1)] = 1.0;
                }
                let factor = Factor::band(*n, *bw, &band)?;
                let border = match *border {
                    Some(b) => {
                        let mut c = border_col.clone();
                        let d = c[b];
                        c[b] = 0.0;
                        let y = factor.solve(&c);
                        let schur = d - dot(&c, &y);
                        if !(schur > 0.0) {
                            return Err(Error::NotPositiveDefinite { pivot: b, value: schur });
                        }
                        Some((b, &border_col[..], schur, y))
                    }
                    None => None,
                };
                Ok(Self { factor, border })
            }
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.border {
            None => self.factor.solve(rhs),
            Some((b, col, schur, y2)) => {
                let b = *b;
                let mut r = rhs.to_vec();
                let rb = r[b];
                r[b] = 0.0;
                let y1 = self.factor.solve(&r);
                let cy1: f64 = col
                    .iter()
                    .zip(&y1)
                    .enumerate()
                    .filter(|(j, _)| *j != b)
                    .map(|(_, (c, y))| c * y)
                    .sum();
                let xb = (rb - cy1) / schur;
                let mut x: Vec<f64> = y1.iter().zip(y2).map(|(p, q)| p - xb * q).collect();
                x[b] = xb;
                x
            }
        }
    }
}

/// Maximum number of refinement sweeps after the direct solve.
const MAX_REFINEMENTS: usize = 5;

/// Minimizes `q` by solving `A x = -b`, with iterative refinement until
/// `||A x + b|| <= tol ||b||` (absolute `tol` when `b = 0`).
pub fn minimize(df: &DiscreteFunctional, tol: f64) -> Result<VariationalResult> {
    let n = df.dim();
    if df.quad.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: df.quad.dim(),
            got: n,
        });
    }
    let b_norm = norm(&df.linear);
    let scale = if b_norm > 0.0 { b_norm } else { 1.0 };
    if n == 0 {
        return Ok(VariationalResult {
            minimizer: Vec::new(),
            min_value: df.constant,
            reduced_params: Vec::new(),
            residual: 0.0,
            mesh: df.meta.clone(),
        });
    }
    let solver = Solver::new(&df.quad)?;
    let neg_b: Vec<f64> = df.linear.iter().map(|v| -v).collect();
    let mut x = solver.solve(&neg_b);
    let mut residual = f64::INFINITY;
    for sweep in 0..=MAX_REFINEMENTS {
        let ax = df.apply(&x);
        let r: Vec<f64> = neg_b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        residual = norm(&r) / scale;
        if residual <= tol {
            return Ok(VariationalResult {
                min_value: df.value(&x),
                minimizer: x,
                reduced_params: Vec::new(),
                residual,
                mesh: df.meta.clone(),
            });
        }
        if sweep < MAX_REFINEMENTS {
            let dx = solver.solve(&r);
            x.iter_mut().zip(&dx).for_each(|(p, q)| *p += q);
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_REFINEMENTS,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| m[i * n + k] * m[j * n + k]).sum::<f64>();
            }
            a[i * n + i] += 0.5;
        }
        a
    }

    /// Plain Gaussian elimination with partial pivoting.
    fn gauss_solve(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut row = a[i * n..(i + 1) * n].to_vec();
                row.push(b[i]);
                row
            })
            .collect();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
            m.swap(c, p);
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
            x[i] = (m[i][n] - s) / m[i][i];
        }
        x
    }

    #[test]
    fn zero_linear_term_gives_zero_minimizer() {
        let df = DiscreteFunctional::dense(3, random_spd(3, 1), vec![0.0; 3], 2.5).unwrap();
        let r = minimize(&df, 1e-12).unwrap();
        assert!(r.minimizer.iter().all(|&x| x == 0.0));
        assert_eq!(r.min_value, 2.5);
    }

    #[test]
    fn one_dimensional() {
        let df = DiscreteFunctional::dense(1, vec![4.0], vec![-2.0], 0.0).unwrap();
        let r = minimize(&df, 1e-14).unwrap();
        assert_eq!(r.minimizer, vec![0.5]);
        assert_eq!(r.min_value, -0.5);
    }

    #[test]
    fn dense_matches_gaussian_elimination() {
        let n = 50;
        let a = random_spd(n, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let df = DiscreteFunctional::dense(n, a.clone(), b.clone(), 0.0).unwrap();
        let r = minimize(&df, 1e-12).unwrap();
        let neg_b: Vec<f64> = b.iter().map(|v| -v).collect();
        let oracle = gauss_solve(n, &a, &neg_b);
        for (x, y) in r.minimizer.iter().zip(&oracle) {
            assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn bordered_band_matches_dense() {
        let n = 40;
        let bw = 3;
        let border = 17;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut asm = Assembler::new(n, bw, Some(border));
        for i in 0..n {
            let terms: Vec<(Option<usize>, f64)> = (i..(i + bw + 1).min(n))
                .map(|j| (Some(j), rng.random_range(-1.0..1.0)))
                .collect();
            asm.add_square(1.0, &terms, rng.random_range(-1.0..1.0));
            asm.add_square(0.3, &[(Some(i), 1.0), (Some(border), 0.7)], 0.1);
        }
        let df = asm.finish(None);
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dense[i * n + j] = df.quad.entry(i, j);
            }
        }
        for i in 0..n {
            for j in 0..n {
                assert_eq!(dense[i * n + j], dense[j * n + i]);
            }
        }
        let dd = DiscreteFunctional::dense(n, dense, df.linear.clone(), df.constant).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let (p, q) = (df.apply(&x), dd.apply(&x));
        for (u, v) in p.iter().zip(&q) {
            assert_relative_eq!(u, v, epsilon = 1e-12);
        }
        let r1 = minimize(&df, 1e-12).unwrap();
        let r2 = minimize(&dd, 1e-12).unwrap();
        assert_relative_eq!(r1.min_value, r2.min_value, max_relative = 1e-12);
        for (u, v) in r1.minimizer.iter().zip(&r2.minimizer) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn indefinite_form_is_reported() {
        let df = DiscreteFunctional::dense(2, vec![1.0, 2.0, 2.0, 1.0], vec![1.0, 0.0], 0.0).unwrap();
        let err = minimize(&df, 1e-12).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn linear_square_integrates_exactly() {
        // int_0^h (a + (b - a) x / h)^2 dx for fixed values
        let (a, b, h) = (0.3, -1.2, 0.7);
        let mut asm = Assembler::new(0, 1, None);
        asm.add_linear_square(1.0, h, (&[], a), (&[], b));
        let df = asm.finish(None);
        let exact = h * (a * a + a * b + b * b) / 3.0;
        assert_relative_eq!(df.constant, exact, epsilon = 1e-15);
    }
}
