use super::rows::{build_matrix, row_count, rows_for, validate_scheme, BaseCondition};
use super::SchemeError;
use crate::exactla::{FieldSpec, Matrix, Scalar};
use crate::forms::Form;

/// The linear system of degree-`degree` forms satisfying a base scheme:
/// the condition matrix, its rank, and a kernel basis stored as forms.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    field: FieldSpec,
    nvars: usize,
    degree: usize,
    scheme: Vec<BaseCondition>,
    matrix: Matrix,
    rank: usize,
    basis: Vec<Form>,
}

impl LinearSystem {
    pub fn new(
        field: FieldSpec,
        nvars: usize,
        degree: usize,
        scheme: Vec<BaseCondition>,
    ) -> Result<LinearSystem, SchemeError> {
        let matrix = build_matrix(field, nvars, degree, &scheme, cfg!(feature = "parallel"))?;
        let rank = matrix.rank();
        let basis = matrix
            .kernel_basis()
            .into_iter()
            .map(|v| Form::from_coeffs(field, nvars, degree, &v).expect("kernel vector length"))
            .collect();
        Ok(LinearSystem { field, nvars, degree, scheme, matrix, rank, basis })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn scheme(&self) -> &[BaseCondition] {
        &self.scheme
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn affine_dim(&self) -> usize {
        self.basis.len()
    }

    /// Projective dimension: affine dimension minus one; -1 for the empty
    /// system.
    pub fn proj_dim(&self) -> isize {
        self.basis.len() as isize - 1
    }

    pub fn basis(&self) -> &[Form] {
        &self.basis
    }

    /// The member with the given basis coefficients.
    pub fn member(&self, coeffs: &[Scalar]) -> Result<Form, SchemeError> {
        if coeffs.len() != self.basis.len() {
            return Err(SchemeError::Json(format!(
                "{} coefficients for a basis of {}",
                coeffs.len(),
                self.basis.len()
            )));
        }
        if self.basis.is_empty() {
            return Ok(Form::zero(self.field, self.nvars, self.degree));
        }
        let parts: Vec<(Scalar, &Form)> =
            coeffs.iter().cloned().zip(self.basis.iter()).collect();
        Ok(Form::linear_combination(&parts)?)
    }

    /// Whether a form lies in the span of the system.
    pub fn contains(&self, f: &Form) -> bool {
        if f.nvars() != self.nvars || f.degree() != self.degree || f.field() != self.field {
            return false;
        }
        if f.is_zero() {
            return true;
        }
        let mut rows: Vec<Vec<Scalar>> = self.basis.iter().map(Form::coeff_vector).collect();
        rows.push(f.coeff_vector());
        Matrix::from_rows(self.field, rows).expect("uniform rows").rank() == self.basis.len()
    }

    /// Re-check every kernel basis member against the scheme through the
    /// geometric predicates (multiplicities, restrictions, charts) rather
    /// than the rows that produced it.
    pub fn verify_basis(&self) -> Result<(), SchemeError> {
        for (index, f) in self.basis.iter().enumerate() {
            for cond in &self.scheme {
                check_member(f, cond).map_err(|detail| SchemeError::BasisCheck { index, detail })?;
            }
        }
        Ok(())
    }
}

fn check_member(f: &Form, cond: &BaseCondition) -> Result<(), String> {
    match cond {
        BaseCondition::SimplePoint { p } => {
            if !f.evaluate_point(p).is_zero() {
                return Err(format!("does not vanish at {p}"));
            }
        }
        BaseCondition::FatPoint { p, mult } => {
            let got = f.multiplicity_at(p).map_err(|e| e.to_string())?;
            if got < *mult {
                return Err(format!("multiplicity {got} < {mult} at {p}"));
            }
        }
        BaseCondition::TangencyAtPoint { p, v } => {
            let coeffs = f.restrict_to_line(p, v).map_err(|e| e.to_string())?;
            if !coeffs[0].is_zero() || !coeffs[1].is_zero() {
                return Err(format!("restriction to the contact line at {p} lacks a double root"));
            }
        }
        BaseCondition::InfNearDouble { p, v } => {
            let chart = f.blowup_chart(p, v, 2).map_err(|e| e.to_string())?;
            let bad = [!chart.g.coeff(0, 0).is_zero(), !chart.g.coeff(1, 0).is_zero(), !chart.g.coeff(0, 1).is_zero()];
            if bad.iter().any(|&b| b) {
                return Err(format!("chart at {p} keeps a nonzero jet {bad:?}"));
            }
        }
        BaseCondition::FatLine { line, mult } => {
            let got = f.multiplicity_along_line(line).map_err(|e| e.to_string())?;
            if got < *mult {
                return Err(format!("multiplicity {got} < {mult} along the line"));
            }
        }
    }
    Ok(())
}

/// How far the extra conditions fall short of being independent on the
/// system: the number of extra rows minus the rank they actually add.
/// Zero means the extra conditions are independent.
pub fn independence_defect(
    sys: &LinearSystem,
    extra: &[BaseCondition],
) -> Result<usize, SchemeError> {
    let (field, nvars, degree) = (sys.field(), sys.nvars(), sys.degree());
    // Validate jointly so supports in the base scheme count for the extras.
    let combined: Vec<BaseCondition> =
        sys.scheme().iter().chain(extra.iter()).cloned().collect();
    validate_scheme(field, nvars, degree, &combined)?;
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for r in 0..sys.matrix().rows() {
        rows.push((0..sys.matrix().cols()).map(|c| sys.matrix().at(r, c).clone()).collect());
    }
    let mut extra_rows = 0usize;
    for cond in extra {
        let block = rows_for(cond, field, nvars, degree, cfg!(feature = "parallel"));
        debug_assert_eq!(block.len(), row_count(cond, nvars, degree));
        extra_rows += block.len();
        rows.extend(block);
    }
    let full_rank = if rows.is_empty() {
        0
    } else {
        Matrix::from_rows(field, rows)?.rank()
    };
    Ok(extra_rows - (full_rank - sys.rank()))
}

#[cfg(test)]
mod tests {
    use super::super::rows::{condition_matrix, condition_matrix_seq, scheme_from_json, scheme_to_json};
    use super::*;
    use crate::forms::{monomial_basis, ProjLine, ProjPoint};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fp() -> FieldSpec {
        FieldSpec::prime(10007)
    }

    fn pt(coords: &[i64]) -> ProjPoint {
        ProjPoint::from_i64(fp(), coords)
    }

    #[test]
    fn fat_point_row_counts_match_the_closed_forms() {
        let q3 = pt(&[0, 0, 1]);
        let q4 = ProjPoint::from_i64(fp(), &[0, 0, 0, 1]);
        for m in 1..=6usize {
            let c = BaseCondition::FatPoint { p: q3.clone(), mult: m };
            assert_eq!(row_count(&c, 3, 8), m * (m + 1) / 2);
            let c = BaseCondition::FatPoint { p: q4.clone(), mult: m };
            assert_eq!(row_count(&c, 4, 8), m * (m + 1) * (m + 2) / 6);
        }
        let line = ProjLine::new(
            ProjPoint::from_i64(fp(), &[1, 0, 0, 0]),
            ProjPoint::from_i64(fp(), &[0, 1, 0, 0]),
        )
        .unwrap();
        for n in 3..=8usize {
            let m = n - 2;
            let c = BaseCondition::FatLine { line: line.clone(), mult: m };
            let expect: usize = (0..m).map(|j| (j + 1) * (n - j + 1)).sum();
            assert_eq!(row_count(&c, 4, n), expect);
        }
    }

    #[test]
    fn conics_singular_at_a_point() {
        let q = pt(&[0, 0, 1]);
        let sys = LinearSystem::new(
            fp(),
            3,
            2,
            vec![BaseCondition::FatPoint { p: q.clone(), mult: 2 }],
        )
        .unwrap();
        // The conics singular at q are spanned by x^2, xy, y^2.
        assert_eq!(sys.rank(), 3);
        assert_eq!(sys.proj_dim(), 2);
        sys.verify_basis().unwrap();
        let x2 = Form::from_int_coeffs(fp(), 3, 2, &[1, 0, 0, 0, 0, 0]);
        let yz = Form::from_int_coeffs(fp(), 3, 2, &[0, 0, 0, 0, 1, 0]);
        assert!(sys.contains(&x2));
        assert!(!sys.contains(&yz));
    }

    #[test]
    fn tangency_pins_down_the_contact_line() {
        let q = pt(&[0, 0, 1]);
        let v = vec![fp().one(), fp().zero(), fp().zero()];
        let sys = LinearSystem::new(
            fp(),
            3,
            2,
            vec![BaseCondition::TangencyAtPoint { p: q.clone(), v: v.clone() }],
        )
        .unwrap();
        // Conics tangent at q to the line {y = 0}: kills z^2 and xz.
        assert_eq!(sys.rank(), 2);
        assert_eq!(sys.affine_dim(), 4);
        sys.verify_basis().unwrap();
        for f in sys.basis() {
            let r = f.restrict_to_line(&q, &v).unwrap();
            assert!(r[0].is_zero() && r[1].is_zero());
        }
    }

    #[test]
    fn plane_fat_point_systems_have_the_expected_dimension() {
        // Degree n-1 curves with a point of multiplicity n-3 at q form a
        // system of projective dimension 3n-4.
        let q = pt(&[0, 0, 1]);
        for n in 5..=8usize {
            let sys = LinearSystem::new(
                fp(),
                3,
                n - 1,
                vec![BaseCondition::FatPoint { p: q.clone(), mult: n - 3 }],
            )
            .unwrap();
            assert_eq!(sys.proj_dim(), 3 * n as isize - 4, "n = {n}");
        }
    }

    #[test]
    fn infinitely_near_double_needs_support_and_cuts_three_rows() {
        let q = pt(&[0, 0, 1]);
        let v = vec![fp().one(), fp().zero(), fp().zero()];
        let orphan = LinearSystem::new(
            fp(),
            3,
            3,
            vec![BaseCondition::InfNearDouble { p: q.clone(), v: v.clone() }],
        );
        assert!(matches!(orphan, Err(SchemeError::MissingSupport { .. })));
        let degenerate = LinearSystem::new(
            fp(),
            3,
            3,
            vec![
                BaseCondition::FatPoint { p: q.clone(), mult: 2 },
                BaseCondition::InfNearDouble { p: q.clone(), v: q.coords().to_vec() },
            ],
        );
        assert!(matches!(degenerate, Err(SchemeError::DegenerateDirection { .. })));

        let sys = LinearSystem::new(
            fp(),
            3,
            3,
            vec![
                BaseCondition::FatPoint { p: q.clone(), mult: 2 },
                BaseCondition::InfNearDouble { p: q.clone(), v },
            ],
        )
        .unwrap();
        // 10 cubic coefficients, 3 + 3 independent rows.
        assert_eq!(sys.rank(), 6);
        assert_eq!(sys.affine_dim(), 4);
        sys.verify_basis().unwrap();
        // y^2 z has its double point at q with tangent cone y^2, which keeps
        // the strict transform through the infinitely-near point along x.
        let y2z = Form::from_int_coeffs(fp(), 3, 3, &[0, 0, 0, 0, 0, 0, 0, 1, 0, 0]);
        assert!(sys.contains(&y2z));
        // x^3 has tangent cone missing that direction.
        let x3 = Form::from_int_coeffs(fp(), 3, 3, &[1, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert!(!sys.contains(&x3));
    }

    #[test]
    fn fat_line_rows_for_a_coordinate_line() {
        let line = ProjLine::new(
            ProjPoint::from_i64(fp(), &[1, 0, 0, 0]),
            ProjPoint::from_i64(fp(), &[0, 1, 0, 0]),
        )
        .unwrap();
        let n = 4;
        let sys = LinearSystem::new(
            fp(),
            4,
            n,
            vec![BaseCondition::FatLine { line: line.clone(), mult: n - 2 }],
        )
        .unwrap();
        assert_eq!(sys.rank(), 13);
        assert_eq!(sys.affine_dim(), 35 - 13);
        sys.verify_basis().unwrap();
        for f in sys.basis() {
            assert!(f.multiplicity_along_line(&line).unwrap() >= n - 2);
        }
    }

    #[test]
    fn defect_counts_dependent_rows() {
        let a = pt(&[1, 0, 1]);
        let b = pt(&[0, 1, 1]);
        let sys = LinearSystem::new(
            fp(),
            3,
            2,
            vec![
                BaseCondition::SimplePoint { p: a.clone() },
                BaseCondition::SimplePoint { p: b },
            ],
        )
        .unwrap();
        // A repeated point adds nothing; a fresh one is independent.
        let repeat = vec![BaseCondition::SimplePoint { p: a }];
        assert_eq!(independence_defect(&sys, &repeat).unwrap(), 1);
        let fresh = vec![BaseCondition::SimplePoint { p: pt(&[1, 2, 3]) }];
        assert_eq!(independence_defect(&sys, &fresh).unwrap(), 0);
        assert_eq!(independence_defect(&sys, &[]).unwrap(), 0);
    }

    #[test]
    fn parallel_and_sequential_row_builders_agree() {
        let q = pt(&[0, 0, 1]);
        let v = vec![fp().one(), fp().from_i64(3), fp().zero()];
        let scheme = vec![
            BaseCondition::FatPoint { p: q.clone(), mult: 4 },
            BaseCondition::InfNearDouble { p: q.clone(), v },
            BaseCondition::TangencyAtPoint {
                p: pt(&[1, 2, 1]),
                v: vec![fp().from_i64(1), fp().from_i64(7), fp().zero()],
            },
            BaseCondition::SimplePoint { p: pt(&[1, 1, 1]) },
        ];
        let a = condition_matrix(fp(), 3, 7, &scheme).unwrap();
        let b = condition_matrix_seq(fp(), 3, 7, &scheme).unwrap();
        assert_eq!(a.rows(), b.rows());
        for r in 0..a.rows() {
            for c in 0..a.cols() {
                assert_eq!(a.at(r, c), b.at(r, c));
            }
        }
    }

    #[test]
    fn scheme_json_round_trip() {
        let q = pt(&[0, 0, 1]);
        let line = ProjLine::new(
            ProjPoint::from_i64(fp(), &[1, 0, 0, 0]),
            ProjPoint::from_i64(fp(), &[0, 1, 0, 0]),
        )
        .unwrap();
        let scheme = vec![
            BaseCondition::FatPoint { p: q.clone(), mult: 3 },
            BaseCondition::InfNearDouble {
                p: q.clone(),
                v: vec![fp().one(), fp().from_i64(5), fp().zero()],
            },
            BaseCondition::TangencyAtPoint {
                p: pt(&[1, 4, 1]),
                v: vec![fp().zero(), fp().one(), fp().zero()],
            },
            BaseCondition::SimplePoint { p: pt(&[2, 3, 1]) },
        ];
        let v = scheme_to_json(&scheme);
        assert_eq!(scheme_from_json(fp(), &v).unwrap(), scheme);
        let space = vec![BaseCondition::FatLine { line, mult: 2 }];
        let v = scheme_to_json(&space);
        assert_eq!(scheme_from_json(fp(), &v).unwrap(), space);
        assert!(scheme_from_json(fp(), &serde_json::json!([{ "kind": "mystery" }])).is_err());
    }

    #[test]
    fn random_point_conditions_are_independent_when_few() {
        // Up to deg+1 random simple points in the plane stay independent
        // with overwhelming probability over a large prime field.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let deg = rng.gen_range(2..=5usize);
            let count = rng.gen_range(1..=deg);
            let scheme: Vec<BaseCondition> = (0..count)
                .map(|_| BaseCondition::SimplePoint {
                    p: pt(&[rng.gen_range(1..10007), rng.gen_range(1..10007), 1]),
                })
                .collect();
            let sys = LinearSystem::new(fp(), 3, deg, scheme).unwrap();
            assert_eq!(sys.rank(), count);
            sys.verify_basis().unwrap();
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn fat_point_systems_verify_and_count_rows(mult in 1usize..5, extra in 0usize..3) {
            let degree = mult + extra;
            let q = pt(&[0, 0, 1]);
            let scheme = vec![BaseCondition::FatPoint { p: q, mult }];
            let rows = row_count(&scheme[0], 3, degree);
            prop_assert_eq!(rows, mult * (mult + 1) / 2);
            let sys = LinearSystem::new(fp(), 3, degree, scheme).unwrap();
            prop_assert_eq!(sys.rank(), rows);
            prop_assert!(sys.verify_basis().is_ok());
            // Affine dimension drops by exactly the rank.
            let full = monomial_basis(3, degree).len();
            prop_assert_eq!(sys.affine_dim(), full - rows);
        }
    }
}
