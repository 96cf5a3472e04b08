//! JSON codecs for forms and points. Forms are self-contained (they carry
//! their field); points serialize as bare coordinate-string arrays and need
//! a field supplied by the surrounding document.

use serde_json::{json, Value};

use super::form::Form;
use super::point::ProjPoint;
use super::FormError;
use crate::exactla::{FieldSpec, Scalar};

pub fn field_to_json(field: FieldSpec) -> Value {
    match field {
        FieldSpec::Rational => Value::String("rational".into()),
        FieldSpec::Prime(p) => json!({ "prime": p }),
    }
}

pub fn field_from_json(v: &Value) -> Result<FieldSpec, FormError> {
    match v {
        Value::String(s) if s == "rational" => Ok(FieldSpec::Rational),
        Value::Object(map) => match map.get("prime").and_then(Value::as_u64) {
            Some(p) if map.len() == 1 => FieldSpec::try_prime(p).map_err(FormError::Json),
            _ => Err(FormError::Json(format!("bad field tag {v}"))),
        },
        _ => Err(FormError::Json(format!("bad field tag {v}"))),
    }
}

fn scalar_from_json(field: FieldSpec, v: &Value) -> Result<Scalar, FormError> {
    let s = v.as_str().ok_or_else(|| FormError::Json(format!("coefficient {v} not a string")))?;
    field.parse(s).map_err(FormError::Json)
}

pub fn point_to_json(p: &ProjPoint) -> Value {
    Value::Array(p.coords().iter().map(|c| Value::String(c.to_coeff_string())).collect())
}

pub fn point_from_json(field: FieldSpec, v: &Value) -> Result<ProjPoint, FormError> {
    let arr = v.as_array().ok_or_else(|| FormError::Json(format!("point {v} not an array")))?;
    let coords = arr
        .iter()
        .map(|c| scalar_from_json(field, c))
        .collect::<Result<Vec<_>, _>>()?;
    ProjPoint::new(coords)
}

impl Form {
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .iter_terms()
            .map(|(e, c)| {
                json!({
                    "exp": e.0[..self.nvars()].to_vec(),
                    "coeff": c.to_coeff_string(),
                })
            })
            .collect();
        json!({
            "nvars": self.nvars(),
            "degree": self.degree(),
            "field": field_to_json(self.field()),
            "terms": terms,
        })
    }

    pub fn from_json(v: &Value) -> Result<Form, FormError> {
        let obj = v.as_object().ok_or_else(|| FormError::Json("form not an object".into()))?;
        let get = |k: &str| obj.get(k).ok_or_else(|| FormError::Json(format!("missing {k}")));
        let nvars = get("nvars")?
            .as_u64()
            .ok_or_else(|| FormError::Json("nvars not an integer".into()))? as usize;
        if !(1..=4).contains(&nvars) {
            return Err(FormError::BadNvars(nvars));
        }
        let degree = get("degree")?
            .as_u64()
            .ok_or_else(|| FormError::Json("degree not an integer".into()))?
            as usize;
        let field = field_from_json(get("field")?)?;
        let terms = get("terms")?
            .as_array()
            .ok_or_else(|| FormError::Json("terms not an array".into()))?;
        let mut parsed = Vec::with_capacity(terms.len());
        for t in terms {
            let tobj =
                t.as_object().ok_or_else(|| FormError::Json(format!("term {t} not an object")))?;
            let exp = tobj
                .get("exp")
                .and_then(Value::as_array)
                .ok_or_else(|| FormError::Json(format!("term {t} missing exp")))?;
            if exp.len() != nvars {
                return Err(FormError::Json(format!("exp length {} != nvars {nvars}", exp.len())));
            }
            let mut e = [0u16; 4];
            for (i, x) in exp.iter().enumerate() {
                let n = x
                    .as_u64()
                    .filter(|&n| n <= u16::MAX as u64)
                    .ok_or_else(|| FormError::Json(format!("bad exponent {x}")))?;
                e[i] = n as u16;
            }
            let coeff = scalar_from_json(
                field,
                tobj.get("coeff").ok_or_else(|| FormError::Json(format!("term {t} missing coeff")))?,
            )?;
            parsed.push((e, coeff));
        }
        Form::from_terms(field, nvars, degree, parsed)
    }
}
