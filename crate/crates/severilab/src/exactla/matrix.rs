use super::{FieldSpec, LinAlgError, Scalar};

/// Dense row-major matrix over one field. Row/column counts may be zero;
/// a system with no conditions is legitimately an empty matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

impl Matrix {
    pub fn new(
        field: FieldSpec,
        rows: usize,
        cols: usize,
        entries: Vec<Scalar>,
    ) -> Result<Matrix, LinAlgError> {
        if entries.len() != rows * cols {
            return Err(LinAlgError::ShapeMismatch { rows, cols, got: entries.len() });
        }
        for e in &entries {
            if e.field() != field {
                return Err(LinAlgError::FieldMismatch(field, e.field()));
            }
        }
        Ok(Matrix { field, rows, cols, entries })
    }

    pub fn from_rows(field: FieldSpec, rows: Vec<Vec<Scalar>>) -> Result<Matrix, LinAlgError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(nrows * ncols);
        for r in rows {
            if r.len() != ncols {
                return Err(LinAlgError::ShapeMismatch { rows: nrows, cols: ncols, got: r.len() });
            }
            entries.extend(r);
        }
        Matrix::new(field, nrows, ncols, entries)
    }

    pub fn zero(field: FieldSpec, rows: usize, cols: usize) -> Matrix {
        Matrix { field, rows, cols, entries: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Matrix {
        let mut m = Matrix::zero(field, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = field.one();
        }
        m
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        &self.entries[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Scalar {
        &mut self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zero(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *out.at_mut(c, r) = self.at(r, c).clone();
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = self.field.zero();
                for c in 0..self.cols {
                    acc = acc.add(&self.at(r, c).mul(&v[c]));
                }
                acc
            })
            .collect()
    }

    /// Reduced row echelon form plus the pivot column indices, in order.
    /// Pivot choice is deterministic: scan columns left to right and take the
    /// first row with a nonzero entry.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut next_row = 0usize;
        for col in 0..m.cols {
            let Some(pivot_row) = (next_row..m.rows).find(|&r| !m.at(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(next_row, pivot_row);
            let inv = m.at(next_row, col).inverse().expect("nonzero pivot");
            for c in col..m.cols {
                *m.at_mut(next_row, c) = m.at(next_row, c).mul(&inv);
            }
            for r in 0..m.rows {
                if r != next_row && !m.at(r, col).is_zero() {
                    let factor = m.at(r, col).clone();
                    for c in col..m.cols {
                        let delta = factor.mul(m.at(next_row, c));
                        *m.at_mut(r, c) = m.at(r, c).sub(&delta);
                    }
                }
            }
            pivots.push(col);
            next_row += 1;
            if next_row == m.rows {
                break;
            }
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel in reduced form: one vector per free column,
    /// ordered by free column index, normalized to 1 at that column and 0 at
    /// every other free column.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::with_capacity(self.cols - pivots.len());
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![self.field.zero(); self.cols];
            v[free] = self.field.one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = r.at(row, free).neg();
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `self * x = rhs`. `Ok(None)` means the system is inconsistent;
    /// otherwise the particular solution with all free variables set to zero.
    pub fn solve(&self, rhs: &[Scalar]) -> Result<Option<Vec<Scalar>>, LinAlgError> {
        if rhs.len() != self.rows {
            return Err(LinAlgError::RhsLength { expected: self.rows, got: rhs.len() });
        }
        let mut aug = Matrix::zero(self.field, self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *aug.at_mut(r, c) = self.at(r, c).clone();
            }
            if rhs[r].field() != self.field {
                return Err(LinAlgError::FieldMismatch(self.field, rhs[r].field()));
            }
            *aug.at_mut(r, self.cols) = rhs[r].clone();
        }
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None); // a pivot in the augmented column: inconsistent
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = red.at(row, self.cols).clone();
        }
        Ok(Some(x))
    }
}

/// Convenience constructor from signed integers.
pub fn int_matrix(field: FieldSpec, rows: usize, cols: usize, entries: &[i64]) -> Matrix {
    let entries = entries.iter().map(|&v| field.from_i64(v)).collect();
    Matrix::new(field, rows, cols, entries).expect("consistent shape")
}

/// Rank of an integer matrix computed modulo two distinct primes. A modular
/// rank can only under-report the rational rank, and never at two unrelated
/// primes at once for matrices of this size in practice; a disagreement is
/// surfaced as `BadPrime` instead of silently trusting either value.
pub fn guarded_int_rank(
    rows: usize,
    cols: usize,
    entries: &[i64],
    p1: u64,
    p2: u64,
) -> Result<usize, LinAlgError> {
    assert_ne!(p1, p2, "guard primes must differ");
    let r1 = int_matrix(FieldSpec::prime(p1), rows, cols, entries).rank();
    let r2 = int_matrix(FieldSpec::prime(p2), rows, cols, entries).rank();
    if r1 != r2 {
        return Err(LinAlgError::BadPrime { p1, p2, r1, r2 });
    }
    Ok(r1)
}
