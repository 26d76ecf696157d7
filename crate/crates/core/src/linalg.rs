use crate::error::{Error, Result};
use crate::scalar::{Scalar, ScalarMode};

/// Dense matrix over [`Scalar`].  Sized for the small systems this crate
/// meets (flow matrices, parameter read-offs, quadrature weights); the
/// brute-force kernel searches keep their own sparse representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    mode: ScalarMode,
    data: Vec<Scalar>,
}

impl Mat {
    pub fn zero(rows: usize, cols: usize, mode: ScalarMode) -> Mat {
        Mat {
            rows,
            cols,
            mode,
            data: vec![Scalar::zero(mode); rows * cols],
        }
    }

    pub fn identity(n: usize, mode: ScalarMode) -> Mat {
        let mut m = Mat::zero(n, n, mode);
        for i in 0..n {
            m.set(i, i, Scalar::one(mode));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>, mode: ScalarMode) -> Mat {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            for v in row {
                assert_eq!(v.mode(), mode, "scalar mode mixed in matrix");
                data.push(v);
            }
        }
        Mat {
            rows: r,
            cols: c,
            mode,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mode(&self) -> ScalarMode {
        self.mode
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert_eq!(v.mode(), self.mode, "scalar mode mixed in matrix");
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zero(self.cols, self.rows, self.mode);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a = a.add(b);
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a = a.sub(b);
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Mat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = a.mul(c);
        }
        out
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Mat::zero(self.rows, other.cols, self.mode);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j).add(&a.mul(other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Scalar::zero(self.mode);
                for j in 0..self.cols {
                    acc = acc.add(&self.get(i, j).mul(&v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    /// Nilpotency test by repeated squaring-free powering: Aᵏ = 0 for some
    /// k ≤ n (then necessarily for k = n).
    pub fn is_nilpotent(&self) -> bool {
        assert_eq!(self.rows, self.cols);
        let mut p = self.clone();
        for _ in 1..self.rows {
            if p.is_zero() {
                return true;
            }
            p = p.mul(self);
        }
        p.is_zero()
    }

    /// Reduced row echelon form, in place on a copy; returns the reduced
    /// matrix and the pivot column of each pivot row.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            // Exact mode: any nonzero pivot works.  Approximate mode:
            // partial pivoting for stability.
            let mut pivot = None;
            let mut best = 0.0_f64;
            for r in row..m.rows {
                let v = m.get(r, col);
                if !v.is_zero() {
                    match m.mode {
                        ScalarMode::Exact => {
                            pivot = Some(r);
                            break;
                        }
                        ScalarMode::Approx => {
                            let mag = v.abs_f64();
                            if mag > best {
                                best = mag;
                                pivot = Some(r);
                            }
                        }
                    }
                }
            }
            let Some(p) = pivot else { continue };
            for j in 0..m.cols {
                let tmp = m.get(row, j).clone();
                let v = m.get(p, j).clone();
                m.set(row, j, v);
                m.set(p, j, tmp);
            }
            let inv = Scalar::one(m.mode).div(&m.get(row, col).clone());
            for j in 0..m.cols {
                let v = m.get(row, j).mul(&inv);
                m.set(row, j, v);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    let v = m.get(r, j).sub(&factor.mul(m.get(row, j)));
                    m.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![Scalar::zero(self.mode); self.cols];
            v[free] = Scalar::one(self.mode);
            for (prow, &pcol) in pivots.iter().enumerate() {
                v[pcol] = r.get(prow, free).neg();
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `A x = b` for square invertible `A`.
    pub fn solve(&self, b: &[Scalar]) -> Result<Vec<Scalar>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(b.len(), self.rows);
        let mut aug = Mat::zero(self.rows, self.cols + 1, self.mode);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.len() != self.rows || pivots.iter().any(|&c| c >= self.cols) {
            return Err(Error::SingularMatrix);
        }
        Ok((0..self.rows).map(|i| r.get(i, self.cols).clone()).collect())
    }

    pub fn inverse(&self) -> Result<Mat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Mat::zero(n, 2 * n, self.mode);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Scalar::one(self.mode));
        }
        let (r, pivots) = aug.rref();
        if pivots.len() != n || pivots.iter().any(|&c| c >= n) {
            return Err(Error::SingularMatrix);
        }
        let mut out = Mat::zero(n, n, self.mode);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, r.get(i, n + j).clone());
            }
        }
        Ok(out)
    }

    pub fn det(&self) -> Scalar {
        assert_eq!(self.rows, self.cols);
        // Gaussian elimination tracking row swaps and pivot products.
        let mut m = self.clone();
        let n = self.rows;
        let mut det = Scalar::one(self.mode);
        for col in 0..n {
            let mut pivot = None;
            for r in col..n {
                if !m.get(r, col).is_zero() {
                    pivot = Some(r);
                    break;
                }
            }
            let Some(p) = pivot else {
                return Scalar::zero(self.mode);
            };
            if p != col {
                for j in 0..n {
                    let tmp = m.get(col, j).clone();
                    let v = m.get(p, j).clone();
                    m.set(col, j, v);
                    m.set(p, j, tmp);
                }
                det = det.neg();
            }
            let pv = m.get(col, col).clone();
            det = det.mul(&pv);
            let inv = Scalar::one(self.mode).div(&pv);
            for r in (col + 1)..n {
                let factor = m.get(r, col).mul(&inv);
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = m.get(r, j).sub(&factor.mul(m.get(col, j)));
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    pub fn trace(&self) -> Scalar {
        assert_eq!(self.rows, self.cols);
        let mut acc = Scalar::zero(self.mode);
        for i in 0..self.rows {
            acc = acc.add(self.get(i, i));
        }
        acc
    }

    /// `exp(tA)` for nilpotent `A`: the finite sum `Σ_{k≤n} (tA)^k / k!`.
    pub fn exp_nilpotent(&self, t: &Scalar) -> Result<Mat> {
        assert_eq!(self.rows, self.cols);
        if !self.is_nilpotent() {
            return Err(Error::ExactnessUnavailable {
                reason: "matrix exponential of a non-nilpotent matrix is transcendental"
                    .to_string(),
            });
        }
        let n = self.rows;
        let ta = self.scale(t);
        let mut acc = Mat::identity(n, self.mode);
        let mut power = Mat::identity(n, self.mode);
        let mut kfact = Scalar::one(self.mode);
        for k in 1..=n {
            power = power.mul(&ta);
            if power.is_zero() {
                break;
            }
            kfact = kfact.scale_int(k as i64);
            acc = acc.add(&power.scale(&Scalar::one(self.mode).div(&kfact)));
        }
        Ok(acc)
    }

    /// `exp(tA)` in floating point via scaling-and-squaring on the Taylor
    /// series.
    pub fn exp_approx(&self, t: f64) -> Mat {
        assert_eq!(self.rows, self.cols);
        assert_eq!(self.mode, ScalarMode::Approx);
        let n = self.rows;
        let norm: f64 = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.get(i, j).abs_f64())
                    .sum::<f64>()
            })
            .fold(0.0_f64, f64::max);
        let scaled_norm = norm * t.abs();
        let mut squarings = 0u32;
        let mut scale = 1.0_f64;
        while scaled_norm * scale > 0.5 {
            scale *= 0.5;
            squarings += 1;
        }
        let ta = self.scale(&Scalar::Approx(t * scale));
        let mut acc = Mat::identity(n, ScalarMode::Approx);
        let mut term = Mat::identity(n, ScalarMode::Approx);
        for k in 1..64 {
            term = term.mul(&ta).scale(&Scalar::Approx(1.0 / k as f64));
            acc = acc.add(&term);
            let tnorm: f64 = term.data.iter().map(|v| v.abs_f64()).sum();
            if tnorm < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            acc = acc.mul(&acc);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: i64) -> Scalar {
        Scalar::from_integer(n, ScalarMode::Exact)
    }

    fn mat(rows: &[&[i64]]) -> Mat {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| int(v)).collect())
                .collect(),
            ScalarMode::Exact,
        )
    }

    #[test]
    fn det_inverse_solve() {
        let a = mat(&[&[2, 1], &[5, 3]]);
        assert_eq!(a.det(), int(1));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul(&inv), Mat::identity(2, ScalarMode::Exact));
        let x = a.solve(&[int(3), int(8)]).unwrap();
        assert_eq!(x, vec![int(1), int(1)]);
        let singular = mat(&[&[1, 2], &[2, 4]]);
        assert_eq!(singular.det(), int(0));
        assert_eq!(singular.inverse(), Err(Error::SingularMatrix));
    }

    #[test]
    fn nullspace_of_rank_one() {
        let a = mat(&[&[1, 2, 3], &[2, 4, 6]]);
        assert_eq!(a.rank(), 1);
        let basis = a.nullspace();
        assert_eq!(basis.len(), 2);
        for v in &basis {
            let img = a.mul_vec(v);
            assert!(img.iter().all(|s| s.is_zero()));
        }
    }

    #[test]
    fn nilpotent_exponential() {
        // A = [[0,1],[0,0]] ⇒ exp(tA) = [[1,t],[0,1]].
        let a = mat(&[&[0, 1], &[0, 0]]);
        assert!(a.is_nilpotent());
        let t = Scalar::from_ratio(3, 2, ScalarMode::Exact);
        let e = a.exp_nilpotent(&t).unwrap();
        assert_eq!(e.get(0, 0), &int(1));
        assert_eq!(e.get(0, 1), &t);
        assert_eq!(e.get(1, 0), &int(0));
        assert_eq!(e.get(1, 1), &int(1));
        // Non-nilpotent input is refused.
        let b = mat(&[&[1, 0], &[0, 1]]);
        assert!(!b.is_nilpotent());
        assert!(matches!(
            b.exp_nilpotent(&t),
            Err(Error::ExactnessUnavailable { .. })
        ));
    }

    #[test]
    fn approx_exponential_matches_closed_forms() {
        // Rotation generator: exp(tJ) = [[cos t, −sin t],[sin t, cos t]].
        let j = Mat::from_rows(
            vec![
                vec![Scalar::Approx(0.0), Scalar::Approx(-1.0)],
                vec![Scalar::Approx(1.0), Scalar::Approx(0.0)],
            ],
            ScalarMode::Approx,
        );
        let t = 0.7_f64;
        let e = j.exp_approx(t);
        assert!((e.get(0, 0).to_f64() - t.cos()).abs() < 1e-12);
        assert!((e.get(0, 1).to_f64() + t.sin()).abs() < 1e-12);
        assert!((e.get(1, 0).to_f64() - t.sin()).abs() < 1e-12);
        // Nilpotent case agrees with the exact path.
        let a = mat(&[&[0, 2], &[0, 0]]);
        let exact = a.exp_nilpotent(&Scalar::from_ratio(1, 4, ScalarMode::Exact)).unwrap();
        let approx = Mat::from_rows(
            vec![
                vec![Scalar::Approx(0.0), Scalar::Approx(2.0)],
                vec![Scalar::Approx(0.0), Scalar::Approx(0.0)],
            ],
            ScalarMode::Approx,
        )
        .exp_approx(0.25);
        for i in 0..2 {
            for k in 0..2 {
                assert!((exact.get(i, k).to_f64() - approx.get(i, k).to_f64()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn trace_and_rank() {
        let a = mat(&[&[3, 1], &[0, 4]]);
        assert_eq!(a.trace(), int(7));
        assert_eq!(a.rank(), 2);
    }
}
