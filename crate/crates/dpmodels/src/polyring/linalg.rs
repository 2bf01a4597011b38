//! Small dense exact linear algebra over a kernel field: row reduction,
//! solving, nullspaces. Sizes here are tiny (Gram matrices, lifting systems).

use super::field::{Field, Scalar};

#[derive(Clone, Debug)]
pub struct Mat {
    pub rows: Vec<Vec<Scalar>>,
}

impl Mat {
    pub fn new(rows: Vec<Vec<Scalar>>) -> Mat {
        Mat { rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map(|r| r.len()).unwrap_or(0)
    }

    /// Reduced row echelon form; returns pivot column indices.
    pub fn rref(&mut self, k: &Field) -> Vec<usize> {
        let (m, n) = (self.nrows(), self.ncols());
        let mut pivots = vec![];
        let mut row = 0;
        for col in 0..n {
            if row >= m {
                break;
            }
            let Some(p) = (row..m).find(|&r| !k.is_zero(&self.rows[r][col])) else {
                continue;
            };
            self.rows.swap(row, p);
            let inv = k.inv(&self.rows[row][col]).expect("pivot invertible");
            for c in col..n {
                self.rows[row][c] = k.mul(&self.rows[row][c], &inv);
            }
            for r in 0..m {
                if r != row && !k.is_zero(&self.rows[r][col]) {
                    let f = self.rows[r][col].clone();
                    for c in col..n {
                        let t = k.mul(&f, &self.rows[row][c]);
                        self.rows[r][c] = k.sub(&self.rows[r][c], &t);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self, k: &Field) -> usize {
        let mut m = self.clone();
        m.rref(k).len()
    }

    /// Basis of the right nullspace.
    pub fn nullspace(&self, k: &Field) -> Vec<Vec<Scalar>> {
        let n = self.ncols();
        let mut m = self.clone();
        let pivots = m.rref(k);
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let mut basis = vec![];
        for &f in &free {
            let mut v = vec![k.zero(); n];
            v[f] = k.one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = k.neg(&m.rows[r][f]);
            }
            basis.push(v);
        }
        basis
    }

    /// Solve A x = b; None when inconsistent. Free variables are set to 0.
    pub fn solve(&self, k: &Field, b: &[Scalar]) -> Option<Vec<Scalar>> {
        let n = self.ncols();
        let mut aug = self.clone();
        for (r, row) in aug.rows.iter_mut().enumerate() {
            row.push(b[r].clone());
        }
        let pivots = aug.rref(k);
        if pivots.contains(&n) {
            return None; // pivot in the constant column
        }
        let mut x = vec![k.zero(); n];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = aug.rows[r][n].clone();
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_nullspace() {
        let k = Field::rationals();
        let a = Mat::new(vec![
            vec![k.from_i64(1), k.from_i64(2)],
            vec![k.from_i64(3), k.from_i64(4)],
        ]);
        let x = a.solve(&k, &[k.from_i64(5), k.from_i64(11)]).unwrap();
        assert!(k.eq_scalar(&x[0], &k.from_i64(1)));
        assert!(k.eq_scalar(&x[1], &k.from_i64(2)));
        let b = Mat::new(vec![vec![k.from_i64(1), k.from_i64(2)]]);
        let ns = b.nullspace(&k);
        assert_eq!(ns.len(), 1);
        assert_eq!(b.rank(&k), 1);
    }
}
