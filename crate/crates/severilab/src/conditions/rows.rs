use serde_json::{json, Value};

use super::SchemeError;
use crate::exactla::{FieldSpec, Matrix, Scalar};
use crate::forms::{
    monomial_basis, point_from_json, point_to_json, scalar_powers, Exp, Form, ProjLine, ProjPoint,
};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// One base condition imposed on the forms of a linear system.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseCondition {
    /// Pass through a point.
    SimplePoint { p: ProjPoint },
    /// Vanish to order `mult` at a point.
    FatPoint { p: ProjPoint, mult: usize },
    /// Pass through a point and be tangent there to the line in the
    /// direction `v` (plane systems only).
    TangencyAtPoint { p: ProjPoint, v: Vec<Scalar> },
    /// After a double point at `p`, have a further double point at the
    /// infinitely-near point in the direction `v` (plane systems only);
    /// must accompany a `FatPoint` of multiplicity >= 2 at the same `p`.
    InfNearDouble { p: ProjPoint, v: Vec<Scalar> },
    /// Vanish to order `mult` along a line (space systems only).
    FatLine { line: ProjLine, mult: usize },
}

impl BaseCondition {
    fn kind(&self) -> &'static str {
        match self {
            BaseCondition::SimplePoint { .. } => "simple_point",
            BaseCondition::FatPoint { .. } => "fat_point",
            BaseCondition::TangencyAtPoint { .. } => "tangency_at_point",
            BaseCondition::InfNearDouble { .. } => "inf_near_double",
            BaseCondition::FatLine { .. } => "fat_line",
        }
    }

    fn field(&self) -> FieldSpec {
        match self {
            BaseCondition::SimplePoint { p }
            | BaseCondition::FatPoint { p, .. }
            | BaseCondition::TangencyAtPoint { p, .. }
            | BaseCondition::InfNearDouble { p, .. } => p.field(),
            BaseCondition::FatLine { line, .. } => line.field(),
        }
    }
}

/// Number of rows the condition contributes to a degree-`degree` system.
pub fn row_count(cond: &BaseCondition, nvars: usize, degree: usize) -> usize {
    match cond {
        BaseCondition::SimplePoint { .. } => 1,
        BaseCondition::FatPoint { mult, .. } => monomial_basis(nvars, mult - 1).len(),
        BaseCondition::TangencyAtPoint { .. } => 2,
        BaseCondition::InfNearDouble { .. } => 3,
        BaseCondition::FatLine { mult, .. } => monomial_basis(4, degree)
            .iter()
            .filter(|e| ((e.0[2] + e.0[3]) as usize) < *mult)
            .count(),
    }
}

pub(crate) fn validate_scheme(
    field: FieldSpec,
    nvars: usize,
    degree: usize,
    scheme: &[BaseCondition],
) -> Result<(), SchemeError> {
    for cond in scheme {
        if cond.field() != field {
            return Err(SchemeError::FieldMismatch {
                want: field.to_string(),
                got: cond.field().to_string(),
            });
        }
        let ambient_ok = |p: &ProjPoint, want: Option<usize>| -> Result<(), SchemeError> {
            let want = want.unwrap_or(nvars);
            if p.nvars() != want || want != nvars {
                return Err(SchemeError::AmbientMismatch {
                    kind: cond.kind(),
                    want,
                    got: if p.nvars() != want { p.nvars() } else { nvars },
                });
            }
            Ok(())
        };
        match cond {
            BaseCondition::SimplePoint { p } => ambient_ok(p, None)?,
            BaseCondition::FatPoint { p, mult } => {
                ambient_ok(p, None)?;
                if *mult < 1 || *mult > degree + 1 {
                    return Err(SchemeError::BadMultiplicity { got: *mult });
                }
            }
            BaseCondition::TangencyAtPoint { p, v } => {
                ambient_ok(p, Some(3))?;
                if !direction_ok(field, p, v) {
                    return Err(SchemeError::DegenerateDirection { at: format!("{p}") });
                }
            }
            BaseCondition::InfNearDouble { p, v } => {
                ambient_ok(p, Some(3))?;
                if !direction_ok(field, p, v) {
                    return Err(SchemeError::DegenerateDirection { at: format!("{p}") });
                }
                let supported = scheme.iter().any(|c| {
                    matches!(c, BaseCondition::FatPoint { p: fp, mult } if fp == p && *mult >= 2)
                });
                if !supported {
                    return Err(SchemeError::MissingSupport { at: format!("{p}") });
                }
            }
            BaseCondition::FatLine { mult, .. } => {
                if nvars != 4 {
                    return Err(SchemeError::AmbientMismatch {
                        kind: cond.kind(),
                        want: 4,
                        got: nvars,
                    });
                }
                if *mult < 1 || *mult > degree + 1 {
                    return Err(SchemeError::BadMultiplicity { got: *mult });
                }
            }
        }
    }
    Ok(())
}

fn direction_ok(field: FieldSpec, p: &ProjPoint, v: &[Scalar]) -> bool {
    v.len() == 3
        && Matrix::from_rows(field, vec![p.coords().to_vec(), v.to_vec()])
            .map(|m| m.rank() == 2)
            .unwrap_or(false)
}

/// The images of the basis monomials under the linear change with the given
/// columns, with power tables shared across the whole basis.
fn transformed_monomials(
    field: FieldSpec,
    nvars: usize,
    degree: usize,
    cols: &[Vec<Scalar>],
    parallel: bool,
) -> Vec<Form> {
    let new_nvars = cols.len();
    let images: Vec<Form> = (0..nvars)
        .map(|i| {
            let terms = (0..new_nvars).map(|j| {
                let mut e = [0u16; 4];
                e[j] = 1;
                (e, cols[j][i].clone())
            });
            Form::from_terms(field, new_nvars, 1, terms).expect("linear image")
        })
        .collect();
    let mut pows: Vec<Vec<Form>> = Vec::with_capacity(nvars);
    for im in &images {
        let mut table = vec![Form::constant(field, new_nvars, field.one())];
        for k in 1..=degree {
            let next = table[k - 1].mul(im).expect("same shape");
            table.push(next);
        }
        pows.push(table);
    }
    let basis = monomial_basis(nvars, degree);
    let product = |e: &Exp| -> Form {
        let mut acc = pows[0][e.0[0] as usize].clone();
        for i in 1..nvars {
            if e.0[i] > 0 {
                acc = acc.mul(&pows[i][e.0[i] as usize]).expect("same shape");
            }
        }
        acc
    };
    run_map(&basis, product, parallel)
}

fn run_map<T: Sync, U: Send>(
    items: &[T],
    f: impl Fn(&T) -> U + Sync + Send,
    parallel: bool,
) -> Vec<U> {
    #[cfg(feature = "parallel")]
    if parallel {
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// Rows of one condition against the degree-`degree` monomial basis,
/// in the documented block order.
pub(crate) fn rows_for(
    cond: &BaseCondition,
    field: FieldSpec,
    nvars: usize,
    degree: usize,
    parallel: bool,
) -> Vec<Vec<Scalar>> {
    let basis = monomial_basis(nvars, degree);
    match cond {
        BaseCondition::SimplePoint { p } => {
            vec![value_row(&basis, p, degree)]
        }
        BaseCondition::FatPoint { p, mult } => {
            // One row per partial of order mult-1; homogeneity makes the
            // lower orders redundant.
            let pw = coord_powers(p, degree);
            let alphas = monomial_basis(nvars, mult - 1);
            run_map(
                &alphas,
                |alpha| {
                    basis
                        .iter()
                        .map(|beta| partial_of_monomial(field, beta, alpha, &pw))
                        .collect::<Vec<_>>()
                },
                parallel,
            )
        }
        BaseCondition::TangencyAtPoint { p, v } => {
            let dir = v;
            let pw = coord_powers(p, degree);
            let deriv = basis
                .iter()
                .map(|beta| {
                    let mut acc = field.zero();
                    for i in 0..nvars {
                        if beta.0[i] == 0 || dir[i].is_zero() {
                            continue;
                        }
                        let mut shifted = *beta;
                        shifted.0[i] -= 1;
                        let mono = monomial_value(&shifted, &pw);
                        acc = acc.add(
                            &field.from_i64(beta.0[i] as i64).mul(&dir[i]).mul(&mono),
                        );
                    }
                    acc
                })
                .collect();
            vec![value_row(&basis, p, degree), deriv]
        }
        BaseCondition::InfNearDouble { p, v } => {
            let frame = crate::forms::complete_basis(field, 3, &[p.coords().to_vec(), v.clone()]);
            let local = transformed_monomials(field, nvars, degree, &frame, parallel);
            // Local coefficients c_20, c_30, c_11 in the frame (p, v, w):
            // the chart value, its x-derivative and its t-derivative at the
            // infinitely-near point.
            let d = degree as u16;
            [(2u16, 0u16), (3, 0), (1, 1)]
                .iter()
                .map(|&(a, b)| {
                    local
                        .iter()
                        .map(|g| {
                            if a + b > d {
                                field.zero()
                            } else {
                                g.coeff([d - a - b, a, b, 0])
                            }
                        })
                        .collect()
                })
                .collect()
        }
        BaseCondition::FatLine { line, mult } => {
            let cols = line.adapted_basis();
            let local = transformed_monomials(field, nvars, degree, &cols, parallel);
            monomial_basis(4, degree)
                .iter()
                .filter(|e| ((e.0[2] + e.0[3]) as usize) < *mult)
                .map(|e| local.iter().map(|g| g.coeff(e.0)).collect())
                .collect()
        }
    }
}

fn coord_powers(p: &ProjPoint, degree: usize) -> Vec<Vec<Scalar>> {
    p.coords().iter().map(|c| scalar_powers(c, degree)).collect()
}

fn monomial_value(e: &Exp, pw: &[Vec<Scalar>]) -> Scalar {
    let field = pw[0][0].field();
    let mut acc = field.one();
    for (i, table) in pw.iter().enumerate() {
        if e.0[i] > 0 {
            acc = acc.mul(&table[e.0[i] as usize]);
        }
    }
    acc
}

fn value_row(basis: &[Exp], p: &ProjPoint, degree: usize) -> Vec<Scalar> {
    let pw = coord_powers(p, degree);
    basis.iter().map(|e| monomial_value(e, &pw)).collect()
}

/// d^alpha (x^beta) evaluated at the point with power tables `pw`:
/// the falling-factorial product times the shifted monomial, or zero.
fn partial_of_monomial(field: FieldSpec, beta: &Exp, alpha: &Exp, pw: &[Vec<Scalar>]) -> Scalar {
    let mut coeff = field.one();
    let mut shifted = *beta;
    for i in 0..4 {
        let (b, a) = (beta.0[i], alpha.0[i]);
        if a > b {
            return field.zero();
        }
        for k in 0..a {
            coeff = coeff.mul(&field.from_i64((b - k) as i64));
        }
        shifted.0[i] = b - a;
    }
    coeff.mul(&monomial_value(&shifted, pw))
}

/// Stack the rows of every condition, in scheme order, into one matrix over
/// the coefficient basis of degree-`degree` forms.
pub fn condition_matrix(
    field: FieldSpec,
    nvars: usize,
    degree: usize,
    scheme: &[BaseCondition],
) -> Result<Matrix, SchemeError> {
    build_matrix(field, nvars, degree, scheme, cfg!(feature = "parallel"))
}

/// Sequential sibling of `condition_matrix`; always available.
pub fn condition_matrix_seq(
    field: FieldSpec,
    nvars: usize,
    degree: usize,
    scheme: &[BaseCondition],
) -> Result<Matrix, SchemeError> {
    build_matrix(field, nvars, degree, scheme, false)
}

pub(crate) fn build_matrix(
    field: FieldSpec,
    nvars: usize,
    degree: usize,
    scheme: &[BaseCondition],
    parallel: bool,
) -> Result<Matrix, SchemeError> {
    validate_scheme(field, nvars, degree, scheme)?;
    let ncols = monomial_basis(nvars, degree).len();
    let mut rows = Vec::new();
    for cond in scheme {
        rows.extend(rows_for(cond, field, nvars, degree, parallel));
    }
    if rows.is_empty() {
        return Ok(Matrix::zero(field, 0, ncols));
    }
    Ok(Matrix::from_rows(field, rows)?)
}

pub fn scheme_to_json(scheme: &[BaseCondition]) -> Value {
    let items: Vec<Value> = scheme
        .iter()
        .map(|cond| match cond {
            BaseCondition::SimplePoint { p } => json!({
                "kind": "simple_point",
                "point": point_to_json(p),
            }),
            BaseCondition::FatPoint { p, mult } => json!({
                "kind": "fat_point",
                "mult": mult,
                "point": point_to_json(p),
            }),
            BaseCondition::TangencyAtPoint { p, v } => json!({
                "dir": v.iter().map(Scalar::to_coeff_string).collect::<Vec<_>>(),
                "kind": "tangency_at_point",
                "point": point_to_json(p),
            }),
            BaseCondition::InfNearDouble { p, v } => json!({
                "kind": "inf_near_double",
                "dir": v.iter().map(Scalar::to_coeff_string).collect::<Vec<_>>(),
                "point": point_to_json(p),
            }),
            BaseCondition::FatLine { line, mult } => json!({
                "kind": "fat_line",
                "a": point_to_json(line.a()),
                "b": point_to_json(line.b()),
                "mult": mult,
            }),
        })
        .collect();
    Value::Array(items)
}

pub fn scheme_from_json(field: FieldSpec, v: &Value) -> Result<Vec<BaseCondition>, SchemeError> {
    let arr = v
        .as_array()
        .ok_or_else(|| SchemeError::Json("scheme is not an array".into()))?;
    let mut out = Vec::with_capacity(arr.len());
    for item in arr {
        let obj = item
            .as_object()
            .ok_or_else(|| SchemeError::Json(format!("condition {item} not an object")))?;
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| SchemeError::Json(format!("condition {item} missing kind")))?;
        let point = |key: &str| -> Result<ProjPoint, SchemeError> {
            let raw = obj
                .get(key)
                .ok_or_else(|| SchemeError::Json(format!("{kind} missing {key}")))?;
            point_from_json(field, raw).map_err(SchemeError::Form)
        };
        let mult = || -> Result<usize, SchemeError> {
            obj.get("mult")
                .and_then(Value::as_u64)
                .map(|m| m as usize)
                .ok_or_else(|| SchemeError::Json(format!("{kind} missing mult")))
        };
        let dir = || -> Result<Vec<Scalar>, SchemeError> {
            let raw = obj
                .get("dir")
                .and_then(Value::as_array)
                .ok_or_else(|| SchemeError::Json(format!("{kind} missing dir")))?;
            raw.iter()
                .map(|x| {
                    x.as_str()
                        .ok_or_else(|| SchemeError::Json(format!("bad dir entry {x}")))
                        .and_then(|s| field.parse(s).map_err(SchemeError::Json))
                })
                .collect()
        };
        out.push(match kind {
            "simple_point" => BaseCondition::SimplePoint { p: point("point")? },
            "fat_point" => BaseCondition::FatPoint { p: point("point")?, mult: mult()? },
            "tangency_at_point" => {
                BaseCondition::TangencyAtPoint { p: point("point")?, v: dir()? }
            }
            "inf_near_double" => BaseCondition::InfNearDouble { p: point("point")?, v: dir()? },
            "fat_line" => {
                let line = ProjLine::new(point("a")?, point("b")?).map_err(SchemeError::Form)?;
                BaseCondition::FatLine { line, mult: mult()? }
            }
            other => return Err(SchemeError::Json(format!("unknown condition kind {other}"))),
        });
    }
    Ok(out)
}
