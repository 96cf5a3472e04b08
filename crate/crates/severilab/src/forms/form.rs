use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use super::point::{complete_basis, ProjLine, ProjPoint};
use super::FormError;
use crate::exactla::{FieldSpec, Matrix, Scalar};

/// Exponent vector, padded with zeros beyond the form's variable count.
/// Ordered by total degree, then descending lexicographic order, so that
/// within one degree the basis runs x0^d, x0^(d-1) x1, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exp(pub [u16; 4]);

impl Exp {
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }
}

impl Ord for Exp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponent vectors of the given total degree, in the canonical order.
pub fn monomial_basis(nvars: usize, degree: usize) -> Vec<Exp> {
    assert!((1..=4).contains(&nvars), "nvars {nvars} out of range");
    fn rec(nvars: usize, pos: usize, rem: u16, cur: &mut [u16; 4], out: &mut Vec<Exp>) {
        if pos == nvars - 1 {
            cur[pos] = rem;
            out.push(Exp(*cur));
            cur[pos] = 0;
            return;
        }
        for e in (0..=rem).rev() {
            cur[pos] = e;
            rec(nvars, pos + 1, rem - e, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    rec(nvars, 0, degree as u16, &mut [0u16; 4], &mut out);
    out
}

/// Powers 1, x, x^2, ..., x^max of one scalar.
pub fn scalar_powers(x: &Scalar, max: usize) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(x.field().one());
    for k in 1..=max {
        out.push(out[k - 1].mul(x));
    }
    out
}

/// A homogeneous form in `nvars` variables of a fixed degree, over one
/// field. Zero coefficients are never stored, so structural equality is
/// mathematical equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Form {
    nvars: usize,
    degree: usize,
    field: FieldSpec,
    terms: BTreeMap<Exp, Scalar>,
}

impl Form {
    pub fn zero(field: FieldSpec, nvars: usize, degree: usize) -> Form {
        assert!((1..=4).contains(&nvars), "nvars {nvars} out of range");
        Form { nvars, degree, field, terms: BTreeMap::new() }
    }

    pub fn constant(field: FieldSpec, nvars: usize, value: Scalar) -> Form {
        let mut f = Form::zero(field, nvars, 0);
        if !value.is_zero() {
            f.terms.insert(Exp([0; 4]), value);
        }
        f
    }

    pub fn from_terms(
        field: FieldSpec,
        nvars: usize,
        degree: usize,
        terms: impl IntoIterator<Item = ([u16; 4], Scalar)>,
    ) -> Result<Form, FormError> {
        if !(1..=4).contains(&nvars) {
            return Err(FormError::BadNvars(nvars));
        }
        let mut f = Form::zero(field, nvars, degree);
        for (raw, coeff) in terms {
            let exp = Exp(raw);
            if exp.degree() != degree || raw[nvars..].iter().any(|&e| e != 0) {
                return Err(FormError::BadTermDegree {
                    got: raw.to_vec(),
                    got_deg: exp.degree(),
                    want: degree,
                });
            }
            if coeff.field() != field {
                return Err(FormError::ShapeMismatch(format!(
                    "coefficient field {} in a {} form",
                    coeff.field(),
                    field
                )));
            }
            f.accumulate(exp, coeff);
        }
        Ok(f)
    }

    /// Build from integer coefficients listed against `monomial_basis`.
    pub fn from_int_coeffs(
        field: FieldSpec,
        nvars: usize,
        degree: usize,
        coeffs: &[i64],
    ) -> Form {
        let basis = monomial_basis(nvars, degree);
        assert_eq!(coeffs.len(), basis.len(), "coefficient count");
        Form::from_terms(
            field,
            nvars,
            degree,
            basis.iter().zip(coeffs).map(|(e, &c)| (e.0, field.from_i64(c))),
        )
        .expect("basis-aligned terms")
    }

    /// Build from a dense coefficient vector in `monomial_basis` order.
    pub fn from_coeffs(
        field: FieldSpec,
        nvars: usize,
        degree: usize,
        coeffs: &[Scalar],
    ) -> Result<Form, FormError> {
        let basis = monomial_basis(nvars, degree);
        if coeffs.len() != basis.len() {
            return Err(FormError::ShapeMismatch(format!(
                "{} coefficients for a basis of {}",
                coeffs.len(),
                basis.len()
            )));
        }
        Form::from_terms(field, nvars, degree, basis.iter().zip(coeffs).map(|(e, c)| (e.0, c.clone())))
    }

    /// Dense coefficient vector in `monomial_basis` order.
    pub fn coeff_vector(&self) -> Vec<Scalar> {
        monomial_basis(self.nvars, self.degree).iter().map(|e| self.coeff(e.0)).collect()
    }

    pub fn coeff(&self, exp: [u16; 4]) -> Scalar {
        self.terms.get(&Exp(exp)).cloned().unwrap_or_else(|| self.field.zero())
    }

    fn accumulate(&mut self, exp: Exp, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(slot) => {
                let sum = slot.add(&coeff);
                if sum.is_zero() {
                    self.terms.remove(&exp);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.terms.insert(exp, coeff);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn iter_terms(&self) -> impl Iterator<Item = (&Exp, &Scalar)> {
        self.terms.iter()
    }

    fn same_shape(&self, rhs: &Form) -> Result<(), FormError> {
        if self.nvars != rhs.nvars || self.degree != rhs.degree || self.field != rhs.field {
            return Err(FormError::ShapeMismatch(format!(
                "({} vars, deg {}, {}) vs ({} vars, deg {}, {})",
                self.nvars, self.degree, self.field, rhs.nvars, rhs.degree, rhs.field
            )));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Form) -> Result<Form, FormError> {
        self.same_shape(rhs)?;
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.accumulate(*e, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Form) -> Result<Form, FormError> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Form {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Form {
        let mut out = Form::zero(self.field, self.nvars, self.degree);
        for (e, c) in &self.terms {
            out.accumulate(*e, c.mul(s));
        }
        out
    }

    pub fn mul(&self, rhs: &Form) -> Result<Form, FormError> {
        if self.nvars != rhs.nvars || self.field != rhs.field {
            return Err(FormError::ShapeMismatch(format!(
                "({} vars, {}) vs ({} vars, {})",
                self.nvars, self.field, rhs.nvars, rhs.field
            )));
        }
        let mut out = Form::zero(self.field, self.nvars, self.degree + rhs.degree);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let mut e = [0u16; 4];
                for i in 0..4 {
                    e[i] = ea.0[i] + eb.0[i];
                }
                out.accumulate(Exp(e), ca.mul(cb));
            }
        }
        Ok(out)
    }

    /// Sum of scaled forms, all of one shape.
    pub fn linear_combination(parts: &[(Scalar, &Form)]) -> Result<Form, FormError> {
        let (_, first) = parts.first().expect("nonempty combination");
        let mut out = Form::zero(first.field, first.nvars, first.degree);
        for (s, f) in parts {
            out = out.add(&f.scale(s))?;
        }
        Ok(out)
    }

    pub fn derivative(&self, var: usize) -> Form {
        assert!(var < self.nvars, "variable index {var} out of range");
        let mut out = Form::zero(self.field, self.nvars, self.degree.saturating_sub(1));
        for (e, c) in &self.terms {
            if e.0[var] == 0 {
                continue;
            }
            let mut d = e.0;
            d[var] -= 1;
            out.accumulate(Exp(d), c.mul(&self.field.from_i64(e.0[var] as i64)));
        }
        out
    }

    pub fn evaluate(&self, coords: &[Scalar]) -> Scalar {
        assert_eq!(coords.len(), self.nvars, "coordinate count");
        let max_exp: Vec<usize> = (0..self.nvars)
            .map(|i| self.terms.keys().map(|e| e.0[i] as usize).max().unwrap_or(0))
            .collect();
        let pows: Vec<Vec<Scalar>> =
            coords.iter().zip(&max_exp).map(|(c, &m)| scalar_powers(c, m)).collect();
        let mut acc = self.field.zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..self.nvars {
                if e.0[i] > 0 {
                    t = t.mul(&pows[i][e.0[i] as usize]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn evaluate_point(&self, p: &ProjPoint) -> Scalar {
        self.evaluate(p.coords())
    }

    /// Derivative of F along the constant vector field v, evaluated at p.
    pub fn directional_derivative(&self, p: &ProjPoint, v: &[Scalar]) -> Scalar {
        assert_eq!(v.len(), self.nvars, "direction length");
        let mut acc = self.field.zero();
        for i in 0..self.nvars {
            if v[i].is_zero() {
                continue;
            }
            acc = acc.add(&self.derivative(i).evaluate(p.coords()).mul(&v[i]));
        }
        acc
    }

    pub fn gradient_at(&self, p: &ProjPoint) -> Vec<Scalar> {
        (0..self.nvars).map(|i| self.derivative(i).evaluate(p.coords())).collect()
    }

    /// Substitute `images[i]` for variable i. All images share a variable
    /// count, field and degree, so the result is again homogeneous.
    pub fn substitute(&self, images: &[Form]) -> Result<Form, FormError> {
        if images.len() != self.nvars {
            return Err(FormError::ShapeMismatch(format!(
                "{} images for {} variables",
                images.len(),
                self.nvars
            )));
        }
        let first = &images[0];
        for im in images {
            first.same_shape(im)?;
        }
        let out_deg = self.degree * first.degree;
        let mut out = Form::zero(first.field, first.nvars, out_deg);
        if self.is_zero() {
            return Ok(out);
        }
        // Cached powers of each image, extended on demand.
        let mut pows: Vec<Vec<Form>> = images
            .iter()
            .map(|_| vec![Form::constant(first.field, first.nvars, first.field.one())])
            .collect();
        for (e, c) in &self.terms {
            let mut prod = Form::constant(first.field, first.nvars, c.clone());
            for i in 0..self.nvars {
                let k = e.0[i] as usize;
                while pows[i].len() <= k {
                    let next = pows[i].last().unwrap().mul(&images[i])?;
                    pows[i].push(next);
                }
                if k > 0 {
                    prod = prod.mul(&pows[i][k])?;
                }
            }
            out = out.add(&prod.pad_degree(out_deg))?;
        }
        Ok(out)
    }

    /// Reinterpret a form as one of the stated degree; only meaningful when
    /// the actual degree already matches or the form is zero. Products of
    /// degree-0 constants with forms keep degrees straight via this shim.
    fn pad_degree(mut self, degree: usize) -> Form {
        if self.is_zero() {
            self.degree = degree;
            return self;
        }
        assert_eq!(self.degree, degree, "degree bookkeeping");
        self
    }

    /// Linear coordinate change: x = sum_j y_j * cols[j]. The result lives
    /// in `cols.len()` variables of the same degree.
    pub fn change_coordinates(&self, cols: &[Vec<Scalar>]) -> Form {
        let new_nvars = cols.len();
        assert!((1..=4).contains(&new_nvars), "new variable count");
        let images: Vec<Form> = (0..self.nvars)
            .map(|i| {
                let terms = (0..new_nvars).map(|j| {
                    let mut e = [0u16; 4];
                    e[j] = 1;
                    (e, cols[j][i].clone())
                });
                Form::from_terms(self.field, new_nvars, 1, terms).expect("linear image")
            })
            .collect();
        self.substitute(&images).expect("shapes validated")
    }

    /// Least k such that some order-k partial derivative is nonzero at p;
    /// equivalently the vanishing order of F at p.
    pub fn multiplicity_at(&self, p: &ProjPoint) -> Result<usize, FormError> {
        if self.is_zero() {
            return Err(FormError::ZeroForm);
        }
        if p.nvars() != self.nvars {
            return Err(FormError::ShapeMismatch(format!(
                "point in {} variables, form in {}",
                p.nvars(),
                self.nvars
            )));
        }
        // Each multi-index is reached once by deriving in non-increasing
        // variable order.
        let mut layer: Vec<(usize, Form)> = vec![(self.nvars - 1, self.clone())];
        for k in 0..=self.degree {
            if layer.iter().any(|(_, g)| !g.evaluate(p.coords()).is_zero()) {
                return Ok(k);
            }
            let mut next = Vec::new();
            for (j, g) in &layer {
                if g.is_zero() {
                    continue;
                }
                for i in 0..=*j {
                    next.push((i, g.derivative(i)));
                }
            }
            layer = next;
        }
        unreachable!("a nonzero form has a nonzero top-order partial");
    }

    /// Vanishing order of F in 4 variables along a line: the minimal total
    /// degree in the two transversal coordinates after moving the line to
    /// {y2 = y3 = 0}.
    pub fn multiplicity_along_line(&self, line: &ProjLine) -> Result<usize, FormError> {
        if self.nvars != 4 {
            return Err(FormError::BadNvars(self.nvars));
        }
        if self.is_zero() {
            return Err(FormError::ZeroForm);
        }
        let g = self.change_coordinates(&line.adapted_basis());
        Ok(g.terms.keys().map(|e| (e.0[2] + e.0[3]) as usize).min().expect("nonzero form"))
    }

    /// Coefficients of F restricted to the line through p in the direction v,
    /// as a univariate polynomial in the line parameter: index k holds the
    /// coefficient of tau^k, and tau = 0 is the point p itself.
    pub fn restrict_to_line(&self, p: &ProjPoint, v: &[Scalar]) -> Result<Vec<Scalar>, FormError> {
        if p.nvars() != self.nvars || v.len() != self.nvars {
            return Err(FormError::ShapeMismatch(format!(
                "point/direction in {}/{} variables, form in {}",
                p.nvars(),
                v.len(),
                self.nvars
            )));
        }
        let span = Matrix::from_rows(self.field, vec![p.coords().to_vec(), v.to_vec()])
            .map_err(|_| FormError::DegenerateDirection)?;
        if span.rank() != 2 {
            return Err(FormError::DegenerateDirection);
        }
        let g = self.change_coordinates(&[p.coords().to_vec(), v.to_vec()]);
        Ok((0..=self.degree)
            .map(|k| g.coeff([(self.degree - k) as u16, k as u16, 0, 0]))
            .collect())
    }

    /// Coefficients of F restricted to the line of the given slope through q;
    /// the direction is resolved by `pencil_direction`.
    pub fn restrict_to_pencil_line(
        &self,
        q: &ProjPoint,
        slope: &Slope,
    ) -> Result<Vec<Scalar>, FormError> {
        if self.nvars != 3 {
            return Err(FormError::BadNvars(self.nvars));
        }
        self.restrict_to_line(q, &pencil_direction(q, slope))
    }

    /// One blow-up chart at p. Local coordinates put p at the origin with v
    /// as the first axis; substituting the chart relation and dividing by
    /// the `clear`-th power of the first coordinate yields g with the point
    /// (0,0) the infinitely-near point in the direction v.
    pub fn blowup_chart(
        &self,
        p: &ProjPoint,
        v: &[Scalar],
        clear: usize,
    ) -> Result<Chart, FormError> {
        if self.nvars != 3 {
            return Err(FormError::BadNvars(self.nvars));
        }
        if self.is_zero() {
            return Err(FormError::ZeroForm);
        }
        let field = self.field;
        if v.len() != 3 || v.iter().all(Scalar::is_zero) {
            return Err(FormError::DegenerateDirection);
        }
        let span = Matrix::from_rows(field, vec![p.coords().to_vec(), v.to_vec()])
            .map_err(|_| FormError::DegenerateDirection)?;
        if span.rank() != 2 {
            return Err(FormError::DegenerateDirection);
        }
        let basis = complete_basis(field, 3, &[p.coords().to_vec(), v.to_vec()]);
        let local = self.change_coordinates(&basis); // variables (s, x, y)
        let min_order = local
            .terms
            .keys()
            .map(|e| (e.0[1] + e.0[2]) as usize)
            .min()
            .expect("nonzero form");
        if min_order < clear {
            return Err(FormError::ChartDivision { found: min_order, clear });
        }
        let mut g = BiPoly { field, terms: BTreeMap::new() };
        for (e, c) in &local.terms {
            let (a, b) = (e.0[1], e.0[2]);
            g.terms.insert((a + b - clear as u16, b), c.clone());
        }
        Ok(Chart { g, v: v.to_vec(), w: basis[2].clone(), clear })
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        const NAMES: [&str; 4] = ["x", "y", "z", "w"];
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for i in 0..self.nvars {
                match e.0[i] {
                    0 => {}
                    1 => write!(f, "*{}", NAMES[i])?,
                    k => write!(f, "*{}^{}", NAMES[i], k)?,
                }
            }
        }
        Ok(())
    }
}

/// Direction of a member of the pencil of lines through q, indexed by slope.
/// The two completion vectors c1, c2 of q are fixed deterministically; the
/// slope-t line runs along c1 + t*c2 and the infinite slope along c2.
pub fn pencil_direction(q: &ProjPoint, slope: &Slope) -> Vec<Scalar> {
    let basis = complete_basis(q.field(), q.nvars(), &[q.coords().to_vec()]);
    match slope {
        Slope::Finite(t) => {
            basis[1].iter().zip(&basis[2]).map(|(a, b)| a.add(&b.mul(t))).collect()
        }
        Slope::Infinite => basis[2].clone(),
    }
}

/// Slope parameter for the pencil of lines through a fixed point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slope {
    Finite(Scalar),
    Infinite,
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Finite(t) => write!(f, "{t}"),
            Slope::Infinite => write!(f, "inf"),
        }
    }
}

/// A polynomial in the two chart variables (x, t).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiPoly {
    field: FieldSpec,
    terms: BTreeMap<(u16, u16), Scalar>,
}

impl BiPoly {
    pub fn coeff(&self, x_deg: u16, t_deg: u16) -> Scalar {
        self.terms.get(&(x_deg, t_deg)).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Coefficients along x = 0: the restriction of g to the exceptional
    /// curve of the chart, as (t-degree, coefficient) pairs.
    pub fn exceptional_slice(&self) -> Vec<(u16, Scalar)> {
        self.terms
            .iter()
            .filter(|((x, _), _)| *x == 0)
            .map(|((_, t), c)| (*t, c.clone()))
            .collect()
    }
}

/// Result of `blowup_chart`: the chart polynomial plus the recorded local
/// frame (v is the blown-up direction, w the deterministic transversal).
#[derive(Debug, Clone)]
pub struct Chart {
    pub g: BiPoly,
    pub v: Vec<Scalar>,
    pub w: Vec<Scalar>,
    pub clear: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fp() -> FieldSpec {
        FieldSpec::prime(10007)
    }

    fn pt(coords: &[i64]) -> ProjPoint {
        ProjPoint::from_i64(fp(), coords)
    }

    #[test]
    fn basis_sizes_and_order() {
        assert_eq!(monomial_basis(3, 2).len(), 6);
        assert_eq!(monomial_basis(3, 10).len(), 66);
        assert_eq!(monomial_basis(4, 3).len(), 20);
        assert_eq!(monomial_basis(4, 8).len(), 165);
        let quad = monomial_basis(3, 2);
        let expect: Vec<[u16; 4]> = vec![
            [2, 0, 0, 0],
            [1, 1, 0, 0],
            [1, 0, 1, 0],
            [0, 2, 0, 0],
            [0, 1, 1, 0],
            [0, 0, 2, 0],
        ];
        assert_eq!(quad.iter().map(|e| e.0).collect::<Vec<_>>(), expect);
        // The map iteration order agrees with the basis order.
        let mut sorted = quad.clone();
        sorted.sort();
        assert_eq!(sorted, quad);
    }

    fn form(nvars: usize, degree: usize, coeffs: &[i64]) -> Form {
        Form::from_int_coeffs(fp(), nvars, degree, coeffs)
    }

    #[test]
    fn arithmetic_round_trip() {
        // (x + y)(x - y) = x^2 - y^2 in 3 variables.
        let a = form(3, 1, &[1, 1, 0]);
        let b = form(3, 1, &[1, -1, 0]);
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod, form(3, 2, &[1, 0, 0, -1, 0, 0]));
        assert!(prod.sub(&prod).unwrap().is_zero());
        let v = prod.coeff_vector();
        assert_eq!(Form::from_coeffs(fp(), 3, 2, &v).unwrap(), prod);
    }

    #[test]
    fn euler_relation_on_random_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let nvars = rng.gen_range(2..=4usize);
            let degree = rng.gen_range(1..=6usize);
            let len = monomial_basis(nvars, degree).len();
            let coeffs: Vec<i64> = (0..len).map(|_| rng.gen_range(-20..=20)).collect();
            let f = form(nvars, degree, &coeffs);
            if f.is_zero() {
                continue;
            }
            // sum_i x_i * dF/dx_i = deg * F
            let mut acc = Form::zero(fp(), nvars, degree);
            for i in 0..nvars {
                let mut e = [0u16; 4];
                e[i] = 1;
                let xi = Form::from_terms(fp(), nvars, 1, [(e, fp().one())]).unwrap();
                acc = acc.add(&xi.mul(&f.derivative(i)).unwrap()).unwrap();
            }
            assert_eq!(acc, f.scale(&fp().from_i64(degree as i64)));
        }
    }

    #[test]
    fn directional_derivative_matches_gradient() {
        // F = x^2 + yz at [0:0:1]: gradient (0, 1, 0).
        let f = form(3, 2, &[1, 0, 0, 0, 1, 0]);
        let p = pt(&[0, 0, 1]);
        assert!(f.evaluate_point(&p).is_zero());
        let along_x = f.directional_derivative(&p, &[fp().one(), fp().zero(), fp().zero()]);
        assert!(along_x.is_zero());
        let along_y = f.directional_derivative(&p, &[fp().zero(), fp().one(), fp().zero()]);
        assert_eq!(along_y, fp().one());
    }

    #[test]
    fn multiplicity_at_points_of_a_cuspidal_cubic() {
        // x^2 z - y^3: cusp at [0:0:1], smooth at [1:1:1].
        let f = form(3, 3, &[0, 0, 1, 0, 0, 0, -1, 0, 0, 0]);
        assert_eq!(f.multiplicity_at(&pt(&[0, 0, 1])).unwrap(), 2);
        assert_eq!(f.multiplicity_at(&pt(&[1, 1, 1])).unwrap(), 1);
        assert_eq!(f.multiplicity_at(&pt(&[1, 2, 3])).unwrap(), 0);
        let zero = Form::zero(fp(), 3, 3);
        assert!(matches!(zero.multiplicity_at(&pt(&[1, 0, 0])), Err(FormError::ZeroForm)));
    }

    #[test]
    fn multiplicity_respects_coordinate_changes_fixing_the_point() {
        let f = form(3, 3, &[0, 0, 1, 0, 0, 0, -1, 0, 0, 0]);
        let p = pt(&[0, 0, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = complete_basis(fp(), 3, &[p.coords().to_vec()]);
        let b_mat = Matrix::from_rows(fp(), b.clone()).unwrap().transpose();
        let b_inv = invert(&b_mat);
        for _ in 0..50 {
            // Conjugate a random invertible 2x2 block into the frame of p,
            // producing a change fixing p.
            let u = loop {
                let entries: Vec<Scalar> =
                    (0..4).map(|_| fp().from_i64(rng.gen_range(0..10007))).collect();
                let m = Matrix::new(fp(), 2, 2, entries).unwrap();
                if m.rank() == 2 {
                    break m;
                }
            };
            let mut big = Matrix::identity(fp(), 3);
            for r in 0..2 {
                for c in 0..2 {
                    *big.at_mut(r + 1, c + 1) = u.at(r, c).clone();
                }
            }
            let m = mat_mul(&mat_mul(&b_mat, &big), &b_inv);
            let cols: Vec<Vec<Scalar>> =
                (0..3).map(|j| (0..3).map(|i| m.at(i, j).clone()).collect()).collect();
            let g = f.change_coordinates(&cols);
            assert_eq!(g.multiplicity_at(&p).unwrap(), 2);
        }
    }

    fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
        let mut out = Matrix::zero(a.field(), a.rows(), b.cols());
        for r in 0..a.rows() {
            for c in 0..b.cols() {
                let mut acc = a.field().zero();
                for k in 0..a.cols() {
                    acc = acc.add(&a.at(r, k).mul(b.at(k, c)));
                }
                *out.at_mut(r, c) = acc;
            }
        }
        out
    }

    fn invert(m: &Matrix) -> Matrix {
        let n = m.rows();
        let mut out = Matrix::zero(m.field(), n, n);
        for j in 0..n {
            let mut e = vec![m.field().zero(); n];
            e[j] = m.field().one();
            let col = m.solve(&e).unwrap().expect("invertible");
            for i in 0..n {
                *out.at_mut(i, j) = col[i].clone();
            }
        }
        out
    }

    #[test]
    fn multiplicity_along_coordinate_line() {
        // x2^2 - x3^2 vanishes to order 2 along {x2 = x3 = 0}.
        let f = Form::from_terms(
            fp(),
            4,
            2,
            [([0, 0, 2, 0], fp().one()), ([0, 0, 0, 2], fp().from_i64(-1))],
        )
        .unwrap();
        let line = ProjLine::new(
            ProjPoint::from_i64(fp(), &[1, 0, 0, 0]),
            ProjPoint::from_i64(fp(), &[0, 1, 0, 0]),
        )
        .unwrap();
        assert_eq!(f.multiplicity_along_line(&line).unwrap(), 2);
        // x0^2 does not vanish along it at all.
        let g = Form::from_terms(fp(), 4, 2, [([2, 0, 0, 0], fp().one())]).unwrap();
        assert_eq!(g.multiplicity_along_line(&line).unwrap(), 0);
    }

    #[test]
    fn pencil_restriction_of_a_conic() {
        // F = x^2 + y^2 through q = [0:0:1] at slope t gives (1 + t^2) tau^2.
        let f = form(3, 2, &[1, 0, 0, 1, 0, 0]);
        let q = pt(&[0, 0, 1]);
        for t in [0i64, 1, 5, 9999] {
            let coeffs =
                f.restrict_to_pencil_line(&q, &Slope::Finite(fp().from_i64(t))).unwrap();
            let expect = fp().from_i64(1 + t * t);
            assert!(coeffs[0].is_zero() && coeffs[1].is_zero());
            assert_eq!(coeffs[2], expect);
        }
        let inf = f.restrict_to_pencil_line(&q, &Slope::Infinite).unwrap();
        assert_eq!(inf[2], fp().one());
        // The order of the root at tau = 0 is the multiplicity at q.
        let g = form(3, 2, &[0, 1, 0, 0, 0, 0]); // xy: double point at q... rank-2 cone
        let r = g.restrict_to_pencil_line(&q, &Slope::Finite(fp().from_i64(3))).unwrap();
        assert!(r[0].is_zero() && r[1].is_zero());
        assert_eq!(g.multiplicity_at(&q).unwrap(), 2);
    }

    #[test]
    fn blowup_chart_conventions() {
        let q = pt(&[0, 0, 1]);
        let v = vec![fp().one(), fp().zero(), fp().zero()];

        // Simple point tangent to the v-line: g vanishes at the chart origin.
        let line_y = form(3, 1, &[0, 1, 0]);
        let chart = line_y.blowup_chart(&q, &v, 1).unwrap();
        assert!(chart.g.coeff(0, 0).is_zero());

        // Ordinary double point: the exceptional slice is the tangent cone.
        let xy = form(3, 2, &[0, 1, 0, 0, 0, 0]);
        let chart = xy.blowup_chart(&q, &v, 2).unwrap();
        assert_eq!(chart.g.exceptional_slice(), vec![(1u16, fp().one())]);

        // Double line y^2: the strict transform has a double point at (0,0).
        let y2z = form(3, 3, &[0, 0, 0, 0, 0, 0, 0, 1, 0, 0]);
        assert_eq!(y2z.coeff([0, 2, 1, 0]), fp().one());
        let chart = y2z.blowup_chart(&q, &v, 2).unwrap();
        assert!(chart.g.coeff(0, 0).is_zero());
        assert!(chart.g.coeff(1, 0).is_zero());
        assert!(chart.g.coeff(0, 1).is_zero());

        // Clearing more than the multiplicity is refused.
        let err = line_y.blowup_chart(&q, &v, 2).unwrap_err();
        assert!(matches!(err, FormError::ChartDivision { found: 1, clear: 2 }));

        // A direction inside the span of q is degenerate.
        let bad = q.coords().to_vec();
        assert!(matches!(line_y.blowup_chart(&q, &bad, 1), Err(FormError::DegenerateDirection)));
    }

    #[test]
    fn substitution_composes_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        // F(b0, b1, b2) evaluated at a point equals F at the image point.
        let f = form(3, 2, &[3, -1, 2, 0, 5, 7]);
        let images: Vec<Form> = (0..3)
            .map(|_| {
                let coeffs: Vec<i64> = (0..6).map(|_| rng.gen_range(-9..=9)).collect();
                form(3, 2, &coeffs)
            })
            .collect();
        let composed = f.substitute(&images).unwrap();
        assert_eq!(composed.degree(), 4);
        for _ in 0..20 {
            let coords: Vec<Scalar> =
                (0..3).map(|_| fp().from_i64(rng.gen_range(0..10007))).collect();
            let image_coords: Vec<Scalar> = images.iter().map(|b| b.evaluate(&coords)).collect();
            assert_eq!(composed.evaluate(&coords), f.evaluate(&image_coords));
        }
    }
}
