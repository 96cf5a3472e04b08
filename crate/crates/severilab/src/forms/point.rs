use super::FormError;
use crate::exactla::{FieldSpec, Matrix, Scalar};

/// A projective point with canonical coordinates: the first nonzero
/// coordinate is scaled to 1, so equality is plain coordinate equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjPoint {
    coords: Vec<Scalar>,
}

impl ProjPoint {
    pub fn new(coords: Vec<Scalar>) -> Result<ProjPoint, FormError> {
        if coords.is_empty() || coords.len() > 4 {
            return Err(FormError::BadNvars(coords.len()));
        }
        let field = coords[0].field();
        if coords.iter().any(|c| c.field() != field) {
            return Err(FormError::ShapeMismatch("mixed fields in one point".into()));
        }
        let Some(lead) = coords.iter().find(|c| !c.is_zero()) else {
            return Err(FormError::NotAPoint);
        };
        let inv = lead.inverse().expect("nonzero leading coordinate");
        Ok(ProjPoint { coords: coords.iter().map(|c| c.mul(&inv)).collect() })
    }

    pub fn from_i64(field: FieldSpec, coords: &[i64]) -> ProjPoint {
        ProjPoint::new(coords.iter().map(|&v| field.from_i64(v)).collect()).expect("valid point")
    }

    pub fn dim_ambient(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn nvars(&self) -> usize {
        self.coords.len()
    }

    pub fn field(&self) -> FieldSpec {
        self.coords[0].field()
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }
}

impl std::fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ":")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Rank of the span of a set of points (all in the same ambient space).
pub fn points_span_rank(points: &[&ProjPoint]) -> usize {
    let Some(first) = points.first() else { return 0 };
    let rows: Vec<Vec<Scalar>> = points.iter().map(|p| p.coords().to_vec()).collect();
    Matrix::from_rows(first.field(), rows).expect("uniform points").rank()
}

/// A line in P^3, stored by two distinct spanning points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjLine {
    a: ProjPoint,
    b: ProjPoint,
}

impl ProjLine {
    pub fn new(a: ProjPoint, b: ProjPoint) -> Result<ProjLine, FormError> {
        if a.nvars() != 4 || b.nvars() != 4 {
            return Err(FormError::BadNvars(a.nvars().max(b.nvars())));
        }
        if a == b {
            return Err(FormError::CoincidentPoints);
        }
        Ok(ProjLine { a, b })
    }

    pub fn a(&self) -> &ProjPoint {
        &self.a
    }

    pub fn b(&self) -> &ProjPoint {
        &self.b
    }

    pub fn field(&self) -> FieldSpec {
        self.a.field()
    }

    pub fn contains(&self, p: &ProjPoint) -> bool {
        points_span_rank(&[&self.a, &self.b, p]) <= 2
    }

    /// Intersection point with another line, if the two lines meet.
    /// Distinct lines in P^3 meet exactly when their four spanning points
    /// are linearly dependent.
    pub fn meet(&self, other: &ProjLine) -> Option<ProjPoint> {
        let field = self.field();
        // Solve alpha*a1 + beta*b1 - gamma*a2 - delta*b2 = 0.
        let cols = [&self.a, &self.b, &other.a, &other.b];
        let mut entries = Vec::with_capacity(16);
        for r in 0..4 {
            for (i, p) in cols.iter().enumerate() {
                let c = p.coords()[r].clone();
                entries.push(if i < 2 { c } else { c.neg() });
            }
        }
        let m = Matrix::new(field, 4, 4, entries).expect("shape");
        let kernel = m.kernel_basis();
        let combo = kernel.first()?;
        let coords: Vec<Scalar> = (0..4)
            .map(|r| {
                self.a.coords()[r]
                    .mul(&combo[0])
                    .add(&self.b.coords()[r].mul(&combo[1]))
            })
            .collect();
        match ProjPoint::new(coords) {
            Ok(p) => Some(p),
            // A zero combination of a,b with the same span means the lines
            // coincide; report the first spanning point.
            Err(_) => Some(self.a.clone()),
        }
    }

    /// Coordinate columns [a, b, c1, c2] completing the line's span to a
    /// basis, so the line becomes {y2 = y3 = 0} in the new coordinates.
    pub fn adapted_basis(&self) -> Vec<Vec<Scalar>> {
        complete_basis(self.field(), 4, &[self.a.coords().to_vec(), self.b.coords().to_vec()])
    }
}

/// A line in P^2, stored by its dual coefficient vector, normalized like a
/// projective point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualLine {
    dual: ProjPoint,
}

impl DualLine {
    pub fn new(dual: ProjPoint) -> Result<DualLine, FormError> {
        if dual.nvars() != 3 {
            return Err(FormError::BadNvars(dual.nvars()));
        }
        Ok(DualLine { dual })
    }

    pub fn from_i64(field: FieldSpec, dual: &[i64]) -> DualLine {
        DualLine::new(ProjPoint::from_i64(field, dual)).expect("3 coordinates")
    }

    /// The line through two distinct points, via the cross product of their
    /// coordinate vectors.
    pub fn through(p: &ProjPoint, q: &ProjPoint) -> Result<DualLine, FormError> {
        if p == q {
            return Err(FormError::CoincidentPoints);
        }
        DualLine::new(ProjPoint::new(cross3(p.coords(), q.coords()))?)
    }

    pub fn dual(&self) -> &ProjPoint {
        &self.dual
    }

    pub fn contains(&self, p: &ProjPoint) -> bool {
        dot3(self.dual.coords(), p.coords()).is_zero()
    }

    /// The intersection point of two distinct lines.
    pub fn meet(&self, other: &DualLine) -> Result<ProjPoint, FormError> {
        ProjPoint::new(cross3(self.dual.coords(), other.dual.coords()))
    }
}

fn cross3(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let term = |i: usize, j: usize| a[i].mul(&b[j]).sub(&a[j].mul(&b[i]));
    vec![term(1, 2), term(2, 0), term(0, 1)]
}

fn dot3(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).fold(a[0].field().zero(), |acc, (x, y)| acc.add(&x.mul(y)))
}

/// Extend a list of independent vectors to a full basis of F^nvars by
/// appending standard basis vectors, tried in index order. The completion is
/// deterministic, which downstream coordinate changes rely on.
pub fn complete_basis(field: FieldSpec, nvars: usize, partial: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let mut rows: Vec<Vec<Scalar>> = partial.to_vec();
    let mut rank = Matrix::from_rows(field, rows.clone()).expect("uniform vectors").rank();
    assert_eq!(rank, partial.len(), "complete_basis needs independent input vectors");
    for i in 0..nvars {
        if rows.len() == nvars {
            break;
        }
        let mut e = vec![field.zero(); nvars];
        e[i] = field.one();
        rows.push(e);
        let new_rank = Matrix::from_rows(field, rows.clone()).expect("uniform vectors").rank();
        if new_rank > rank {
            rank = new_rank;
        } else {
            rows.pop();
        }
    }
    assert_eq!(rows.len(), nvars, "completion reached a full basis");
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp() -> FieldSpec {
        FieldSpec::prime(10007)
    }

    #[test]
    fn normalization_is_canonical() {
        let p = ProjPoint::from_i64(fp(), &[0, 3, 6]);
        assert_eq!(p.coords()[1], fp().one());
        assert_eq!(p, ProjPoint::from_i64(fp(), &[0, 5, 10]));
        assert!(ProjPoint::new(vec![fp().zero(), fp().zero()]).is_err());
    }

    #[test]
    fn lines_in_p2_meet_where_expected() {
        let a = DualLine::from_i64(fp(), &[1, 0, 0]); // x = 0
        let b = DualLine::from_i64(fp(), &[0, 1, 0]); // y = 0
        assert_eq!(a.meet(&b).unwrap(), ProjPoint::from_i64(fp(), &[0, 0, 1]));
        let p = ProjPoint::from_i64(fp(), &[0, 4, 9]);
        assert!(a.contains(&p));
        let through = DualLine::through(&p, &ProjPoint::from_i64(fp(), &[0, 0, 1])).unwrap();
        assert_eq!(through, a);
    }

    #[test]
    fn skew_and_meeting_lines_in_p3() {
        let f = fp();
        let l1 = ProjLine::new(ProjPoint::from_i64(f, &[1, 0, 0, 0]), ProjPoint::from_i64(f, &[0, 1, 0, 0])).unwrap();
        let l2 = ProjLine::new(ProjPoint::from_i64(f, &[0, 0, 1, 0]), ProjPoint::from_i64(f, &[0, 0, 0, 1])).unwrap();
        assert!(l1.meet(&l2).is_none());
        let l3 = ProjLine::new(ProjPoint::from_i64(f, &[1, 0, 0, 0]), ProjPoint::from_i64(f, &[0, 0, 1, 0])).unwrap();
        let p = l1.meet(&l3).expect("coplanar lines meet");
        assert_eq!(p, ProjPoint::from_i64(f, &[1, 0, 0, 0]));
        assert!(l1.contains(&p) && l3.contains(&p));
    }

    #[test]
    fn completion_is_deterministic() {
        let f = fp();
        let q = vec![f.zero(), f.zero(), f.one()];
        let basis = complete_basis(f, 3, &[q]);
        assert_eq!(basis[1], vec![f.one(), f.zero(), f.zero()]);
        assert_eq!(basis[2], vec![f.zero(), f.one(), f.zero()]);
    }
}
