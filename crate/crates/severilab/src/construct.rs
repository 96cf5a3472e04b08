//! The seeded pipeline from a plane curve with prescribed contact data to a
//! nodal surface in space: draw the curve, scan the pencil of lines through
//! the distinguished point for tangents, span the four-dimensional system
//! they determine, implicitize its image, predict the node set, and
//! re-verify every step on the finished instance.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::conditions::{independence_defect, BaseCondition, LinearSystem, SchemeError};
use crate::exactla::{FieldSpec, Matrix, Scalar};
use crate::forms::{
    complete_basis, monomial_basis, point_from_json, point_to_json, scalar_powers, Form,
    FormError, ProjLine, ProjPoint, Slope,
};
use crate::rng::{stream, Purpose};
use crate::verify::{classify_double_point, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum ConstructError {
    #[error("input out of range: {0}")]
    Input(String),
    #[error("retries exhausted after {attempts} attempts at {stage}: {census}")]
    RetriesExhausted { stage: &'static str, attempts: u64, census: String },
    #[error("sampling produced no relation at degree {degree}; add samples or retry the seed")]
    Sampling { degree: usize },
    #[error("image satisfies {found} independent relations at degree {degree}, expected exactly one")]
    Degree { degree: usize, found: usize },
    #[error("genericity failure: {0}")]
    Genericity(String),
    #[error("malformed bundle: {0}")]
    Json(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    LinAlg(#[from] crate::exactla::LinAlgError),
}

/// Dense univariate polynomials over a field, as ascending coefficient
/// vectors; the little arithmetic the sweeps and scans need.
pub(crate) mod univar {
    use crate::exactla::{FieldSpec, Scalar};

    pub fn trim(mut v: Vec<Scalar>) -> Vec<Scalar> {
        while v.last().map_or(false, Scalar::is_zero) {
            v.pop();
        }
        v
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(v: &[Scalar]) -> Option<usize> {
        v.iter().rposition(|c| !c.is_zero())
    }

    pub fn eval(v: &[Scalar], x: &Scalar) -> Scalar {
        let mut acc = x.field().zero();
        for c in v.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(field: FieldSpec, v: &[Scalar]) -> Vec<Scalar> {
        (1..v.len()).map(|k| v[k].mul(&field.from_i64(k as i64))).collect()
    }

    pub fn mul(field: FieldSpec, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![field.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] = out[i + j].add(&x.mul(y));
            }
        }
        out
    }

    pub fn sub(field: FieldSpec, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![field.zero(); a.len().max(b.len())];
        for (i, x) in a.iter().enumerate() {
            out[i] = out[i].add(x);
        }
        for (i, y) in b.iter().enumerate() {
            out[i] = out[i].sub(y);
        }
        out
    }

    pub fn scale(a: &[Scalar], c: &Scalar) -> Vec<Scalar> {
        a.iter().map(|x| x.mul(c)).collect()
    }

    /// Remainder of `a` modulo a nonzero `b`.
    pub fn rem(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        let b = trim(b.to_vec());
        assert!(!b.is_empty(), "division by the zero polynomial");
        let lead_inv = b.last().expect("nonzero").inverse().expect("unit lead");
        let mut r = trim(a.to_vec());
        while r.len() >= b.len() {
            let k = r.len() - b.len();
            let c = r.last().expect("nonzero").mul(&lead_inv);
            for (i, bi) in b.iter().enumerate() {
                r[k + i] = r[k + i].sub(&c.mul(bi));
            }
            r = trim(r);
        }
        r
    }

    /// Monic greatest common divisor.
    pub fn gcd(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b);
            a = b;
            b = r;
        }
        if let Some(lead) = a.last() {
            let inv = lead.inverse().expect("unit lead");
            a = a.iter().map(|c| c.mul(&inv)).collect();
        }
        a
    }

    /// All roots in a prime field, by exhausting the residues in order.
    pub fn roots_by_scan(v: &[Scalar], field: FieldSpec) -> Vec<Scalar> {
        let p = match field {
            FieldSpec::Prime(p) => p,
            FieldSpec::Rational => panic!("root scan needs a finite field"),
        };
        (0..p)
            .map(|t| field.from_i64(t as i64))
            .filter(|t| eval(v, t).is_zero())
            .collect()
    }
}

fn prime_of(field: FieldSpec) -> Result<u64, ConstructError> {
    match field {
        FieldSpec::Prime(p) => Ok(p),
        FieldSpec::Rational => {
            Err(ConstructError::Input("the pipeline needs a prime coefficient field".into()))
        }
    }
}

/// The distinguished base point [0 : 0 : 1].
pub fn base_point(field: FieldSpec) -> ProjPoint {
    ProjPoint::from_i64(field, &[0, 0, 1])
}

fn uniform_scalar(rng: &mut ChaCha8Rng, field: FieldSpec, p: u64) -> Scalar {
    field.from_i64(rng.gen_range(0..p) as i64)
}

fn point_on_ray(q: &ProjPoint, dir: &[Scalar], tau: &Scalar) -> Result<ProjPoint, FormError> {
    let coords: Vec<Scalar> =
        q.coords().iter().zip(dir).map(|(a, b)| a.add(&tau.mul(b))).collect();
    ProjPoint::new(coords)
}

/// All rational singular points of a plane curve over a prime field: a sweep
/// of the lines x = const through the affine chart z = 1, taking the gcd of
/// the three partials on each line, then the line at infinity. Exhaustive
/// for rational points at any odd prime beyond the degree.
pub fn plane_singular_points(f: &Form) -> Result<Vec<ProjPoint>, ConstructError> {
    let field = f.field();
    let p = prime_of(field)?;
    if f.nvars() != 3 {
        return Err(ConstructError::Input(format!(
            "plane sweep needs 3 variables, got {}",
            f.nvars()
        )));
    }
    if f.is_zero() {
        return Err(ConstructError::Input("the zero curve is singular everywhere".into()));
    }
    let d = f.degree();
    if d as u64 >= p {
        return Err(ConstructError::Input(format!(
            "degree {d} is not below the field order {p}; the partial-only sweep would be unsound"
        )));
    }
    let partials: Vec<Form> = (0..3).map(|i| f.derivative(i)).collect();
    // Coefficient grids over the chart z = 1: entry [y_deg][x_deg].
    let grids: Vec<Vec<Vec<Scalar>>> = partials
        .iter()
        .map(|g| {
            let mut grid = vec![vec![field.zero(); d]; d];
            for (e, c) in g.iter_terms() {
                grid[e.0[1] as usize][e.0[0] as usize] =
                    grid[e.0[1] as usize][e.0[0] as usize].add(c);
            }
            grid
        })
        .collect();
    let mut out = Vec::new();
    for x0 in 0..p {
        let xs = field.from_i64(x0 as i64);
        let xpow = scalar_powers(&xs, d.saturating_sub(1));
        let polys: Vec<Vec<Scalar>> = grids
            .iter()
            .map(|grid| {
                grid.iter()
                    .map(|row| {
                        let mut acc = field.zero();
                        for (j, c) in row.iter().enumerate() {
                            if !c.is_zero() {
                                acc = acc.add(&c.mul(&xpow[j]));
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let g = univar::gcd(&univar::gcd(&polys[0], &polys[1]), &polys[2]);
        if g.is_empty() {
            // All three partials vanish on the whole line: every point of it
            // is singular (a repeated component).
            for y in 0..p {
                out.push(ProjPoint::from_i64(field, &[x0 as i64, y as i64, 1]));
            }
        } else if univar::degree(&g).unwrap_or(0) >= 1 {
            for root in univar::roots_by_scan(&g, field) {
                out.push(ProjPoint::new(vec![xs.clone(), root, field.one()])?);
            }
        }
    }
    // The line at infinity: points [1 : t : 0], then [0 : 1 : 0].
    let inf_polys: Vec<Vec<Scalar>> = partials
        .iter()
        .map(|g| {
            let mut u = vec![field.zero(); d];
            for (e, c) in g.iter_terms() {
                if e.0[2] == 0 {
                    u[e.0[1] as usize] = u[e.0[1] as usize].add(c);
                }
            }
            u
        })
        .collect();
    let g = univar::gcd(&univar::gcd(&inf_polys[0], &inf_polys[1]), &inf_polys[2]);
    if g.is_empty() {
        for t in 0..p {
            out.push(ProjPoint::from_i64(field, &[1, t as i64, 0]));
        }
    } else if univar::degree(&g).unwrap_or(0) >= 1 {
        for root in univar::roots_by_scan(&g, field) {
            out.push(ProjPoint::new(vec![field.one(), root, field.zero()])?);
        }
    }
    let far = ProjPoint::from_i64(field, &[0, 1, 0]);
    if partials.iter().all(|g| g.evaluate_point(&far).is_zero()) {
        out.push(far);
    }
    Ok(out)
}

/// The restriction data of a plane curve to the pencil of lines through q:
/// the coefficient of tau^k on the slope-t line is a polynomial in t, and
/// beyond the multiplicity of q only three of them survive, forming the
/// residual quadratic whose discriminant drives the tangent scan.
struct PencilData {
    q: ProjPoint,
    c1: Vec<Scalar>,
    c2: Vec<Scalar>,
    /// residual[j] = coefficient polynomial of tau^(mult + j), j = 0, 1, 2.
    residual: [Vec<Scalar>; 3],
    /// the three tau-coefficients of the restriction to the slope-infinity
    /// line, lowest first.
    residual_inf: [Scalar; 3],
    disc: Vec<Scalar>,
}

fn pencil_residual(gamma: &Form, q: &ProjPoint) -> Result<PencilData, ConstructError> {
    let field = gamma.field();
    if gamma.nvars() != 3 || q.nvars() != 3 {
        return Err(ConstructError::Input("the pencil scan lives in the plane".into()));
    }
    let d = gamma.degree();
    let mult = gamma.multiplicity_at(q)?;
    if d != mult + 2 {
        return Err(ConstructError::Genericity(format!(
            "residual intersection degree {} along the pencil, need 2",
            d - mult.min(d)
        )));
    }
    let cols = complete_basis(field, 3, &[q.coords().to_vec()]);
    let g = gamma.change_coordinates(&cols);
    // coefficient of tau^k at slope t: sum over b+c = k of
    // g[d-k, b, c] t^c; below the multiplicity these vanish identically.
    let coeff_poly = |k: usize| -> Vec<Scalar> {
        (0..=k).map(|c| g.coeff([(d - k) as u16, (k - c) as u16, c as u16, 0])).collect()
    };
    for k in 0..mult {
        debug_assert!(
            univar::degree(&coeff_poly(k)).is_none(),
            "restriction order disagrees with the multiplicity"
        );
    }
    let residual = [coeff_poly(mult), coeff_poly(mult + 1), coeff_poly(mult + 2)];
    let residual_inf = [
        g.coeff([2, 0, mult as u16, 0]),
        g.coeff([1, 0, (mult + 1) as u16, 0]),
        g.coeff([0, 0, (mult + 2) as u16, 0]),
    ];
    let disc = univar::trim(univar::sub(
        field,
        &univar::mul(field, &residual[1], &residual[1]),
        &univar::scale(&univar::mul(field, &residual[0], &residual[2]), &field.from_i64(4)),
    ));
    Ok(PencilData { q: q.clone(), c1: cols[1].clone(), c2: cols[2].clone(), residual, residual_inf, disc })
}

impl PencilData {
    fn direction(&self, slope: &Slope) -> Vec<Scalar> {
        match slope {
            Slope::Finite(t) => {
                self.c1.iter().zip(&self.c2).map(|(a, b)| a.add(&b.mul(t))).collect()
            }
            Slope::Infinite => self.c2.clone(),
        }
    }

    /// The residual quadratic (constant, linear, quadratic tau-coefficients)
    /// on the line of the given slope.
    fn quadratic_at(&self, slope: &Slope) -> [Scalar; 3] {
        match slope {
            Slope::Finite(t) => [
                univar::eval(&self.residual[0], t),
                univar::eval(&self.residual[1], t),
                univar::eval(&self.residual[2], t),
            ],
            Slope::Infinite => self.residual_inf.clone(),
        }
    }
}

/// One tangent line through the distinguished point: its pencil slope, the
/// point of tangency, and a direction of the line at that point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentLine {
    pub slope: Slope,
    pub point: ProjPoint,
    pub direction: Vec<Scalar>,
}

/// The outcome of the pencil scan: the discriminant of the residual
/// quadratic as a polynomial in the slope, the rational tangent lines in
/// slope order (finite slopes ascending, then infinity), and the slopes
/// excluded because the contact degenerates onto the base point itself.
#[derive(Debug, Clone)]
pub struct TangentScan {
    pub discriminant: Vec<Scalar>,
    pub disc_degree: Option<usize>,
    pub tangents: Vec<TangentLine>,
    pub excluded_slopes: Vec<Slope>,
}

/// Scan the pencil of lines through q for lines tangent to the curve away
/// from q. Requires the residual intersection degree to be 2, i.e. the
/// curve degree to exceed the multiplicity at q by exactly two.
pub fn tangent_lines(gamma: &Form, q: &ProjPoint) -> Result<TangentScan, ConstructError> {
    let field = gamma.field();
    prime_of(field)?;
    let pd = pencil_residual(gamma, q)?;
    let mut tangents = Vec::new();
    let mut excluded = Vec::new();
    if univar::degree(&pd.disc).is_none() {
        // Identically zero discriminant: every line is "tangent", which
        // means the curve degenerates (e.g. contains a pencil line).
        return Ok(TangentScan {
            discriminant: pd.disc,
            disc_degree: None,
            tangents,
            excluded_slopes: excluded,
        });
    }
    let mut slopes: Vec<Slope> =
        univar::roots_by_scan(&pd.disc, field).into_iter().map(Slope::Finite).collect();
    let [c_inf, b_inf, a_inf] = pd.quadratic_at(&Slope::Infinite);
    if b_inf.mul(&b_inf).sub(&a_inf.mul(&c_inf).mul(&field.from_i64(4))).is_zero() {
        slopes.push(Slope::Infinite);
    }
    for slope in slopes {
        let [c, b, a] = pd.quadratic_at(&slope);
        if c.is_zero() {
            // The double contact sits at q itself: the line belongs to the
            // tangent cone and is not a tangent line away from q.
            excluded.push(slope);
            continue;
        }
        let dir = pd.direction(&slope);
        let (point, direction) = if !a.is_zero() {
            let tau = b.neg().div(&a.mul(&field.from_i64(2)));
            (point_on_ray(q, &dir, &tau)?, dir)
        } else {
            // Degree drop by two: the contact sits at the far point of the
            // pencil parameterization, the direction point of the line.
            (ProjPoint::new(dir)?, q.coords().to_vec())
        };
        tangents.push(TangentLine { slope, point, direction });
    }
    Ok(TangentScan {
        disc_degree: univar::degree(&pd.disc),
        discriminant: pd.disc,
        tangents,
        excluded_slopes: excluded,
    })
}

/// Acceptance test for a candidate curve: multiplicity exactly n-3 at the
/// base point, squarefree tangent cone there, and no rational singular
/// point anywhere else.
fn gamma_acceptable(gamma: &Form, q: &ProjPoint, n: usize) -> Result<(), String> {
    let m = n - 3;
    let got = gamma.multiplicity_at(q).map_err(|e| e.to_string())?;
    if got != m {
        return Err(format!("multiplicity {got} at the base point, want exactly {m}"));
    }
    if m >= 2 && !cone_squarefree(gamma, q, m).map_err(|e| e.to_string())? {
        return Err("tangent cone at the base point has a repeated factor".into());
    }
    let sing = plane_singular_points(gamma).map_err(|e| e.to_string())?;
    let expected: Vec<ProjPoint> = if m >= 2 { vec![q.clone()] } else { Vec::new() };
    if sing != expected {
        return Err(format!(
            "{} rational singular point(s), expected {}",
            sing.len(),
            expected.len()
        ));
    }
    Ok(())
}

/// Whether the degree-m tangent cone at q is squarefree as a binary form:
/// no repeated finite root and at most a simple root at infinity.
fn cone_squarefree(gamma: &Form, q: &ProjPoint, m: usize) -> Result<bool, ConstructError> {
    let field = gamma.field();
    let cols = complete_basis(field, 3, &[q.coords().to_vec()]);
    let g = gamma.change_coordinates(&cols);
    let d = gamma.degree();
    let u: Vec<Scalar> = (0..=m)
        .map(|c| g.coeff([(d - m) as u16, (m - c) as u16, c as u16, 0]))
        .collect();
    let k = match univar::degree(&u) {
        None => return Ok(false),
        Some(k) => k,
    };
    if m - k >= 2 {
        return Ok(false);
    }
    if k == 0 {
        return Ok(true);
    }
    let der = univar::derivative(field, &u);
    Ok(univar::degree(&univar::gcd(&u, &der)) == Some(0))
}

/// Draw a curve of degree n-1 with an (n-3)-fold point at the base point,
/// uniformly from the fat-point system, until it passes acceptance; returns
/// the curve and the attempt index that produced it.
pub fn random_gamma(
    field: FieldSpec,
    n: usize,
    seed: u64,
    retries: u64,
) -> Result<(Form, u64), ConstructError> {
    if n < 3 {
        return Err(ConstructError::Input(format!("need n >= 3, got {n}")));
    }
    let p = prime_of(field)?;
    let q = base_point(field);
    let scheme = if n >= 4 {
        vec![BaseCondition::FatPoint { p: q.clone(), mult: n - 3 }]
    } else {
        Vec::new()
    };
    let sys = LinearSystem::new(field, 3, n - 1, scheme)?;
    let mut census: BTreeMap<String, usize> = BTreeMap::new();
    for attempt in 0..retries {
        let mut rng = stream(seed, Purpose::UniformCurve, attempt);
        let coeffs: Vec<Scalar> =
            (0..sys.basis().len()).map(|_| uniform_scalar(&mut rng, field, p)).collect();
        if coeffs.iter().all(Scalar::is_zero) {
            *census.entry("zero draw".into()).or_insert(0) += 1;
            continue;
        }
        let parts: Vec<(Scalar, &Form)> =
            coeffs.into_iter().zip(sys.basis()).map(|(c, f)| (c, f)).collect();
        let gamma = Form::linear_combination(&parts)?;
        match gamma_acceptable(&gamma, &q, n) {
            Ok(()) => return Ok((gamma, attempt)),
            Err(why) => *census.entry(why).or_insert(0) += 1,
        }
    }
    Err(ConstructError::RetriesExhausted {
        stage: "uniform curve draw",
        attempts: retries,
        census: census_string(&census),
    })
}

fn census_string(census: &BTreeMap<String, usize>) -> String {
    if census.is_empty() {
        return "no attempts recorded".into();
    }
    census.iter().map(|(k, v)| format!("{k} x{v}")).collect::<Vec<_>>().join("; ")
}

/// The finished plane half of an instance: the curve, its chosen tangent
/// lines through the base point, the extra simple base points demanded by
/// the parameter count, and the four-dimensional system they span.
#[derive(Debug, Clone)]
pub struct PlaneModel {
    pub n: usize,
    pub ell: usize,
    /// number of extra simple base points: 3n - 4 - 2*ell.
    pub eps: usize,
    pub seed: u64,
    pub attempt: u64,
    pub q: ProjPoint,
    pub gamma: Form,
    pub chosen: Vec<TangentLine>,
    pub extra: Vec<ProjPoint>,
    pub system: LinearSystem,
}

impl PlaneModel {
    /// The base scheme of the four-dimensional system.
    pub fn scheme(&self) -> Vec<BaseCondition> {
        lsys_scheme(self.n, &self.q, &self.chosen, &self.extra)
    }
}

fn lsys_scheme(
    n: usize,
    q: &ProjPoint,
    chosen: &[TangentLine],
    extra: &[ProjPoint],
) -> Vec<BaseCondition> {
    let mut scheme = Vec::with_capacity(1 + chosen.len() + extra.len());
    if n >= 3 {
        scheme.push(BaseCondition::FatPoint { p: q.clone(), mult: n - 2 });
    }
    for t in chosen {
        scheme.push(BaseCondition::TangencyAtPoint { p: t.point.clone(), v: t.direction.clone() });
    }
    for e in extra {
        scheme.push(BaseCondition::SimplePoint { p: e.clone() });
    }
    scheme
}

/// Resolve the tangent-count override: the default is the maximal value
/// (3n-4)/2 rounded down, and any smaller positive count is allowed, with
/// the parity gap filled by extra simple base points.
fn resolve_ell(n: usize, ell: Option<usize>) -> Result<(usize, usize), ConstructError> {
    let (max_ell, _) = crate::picard::split_parameters(n);
    let ell = ell.unwrap_or(max_ell);
    if ell < 1 || ell > max_ell {
        return Err(ConstructError::Input(format!(
            "tangent count {ell} out of range 1..={max_ell} for n = {n}"
        )));
    }
    Ok((ell, 3 * n - 4 - 2 * ell))
}

/// Build the plane half of an instance: prescribe rational contact data
/// (random distinct slopes and contact parameters), interpolate the curve
/// through it, then verify every acceptance property on the result and
/// retry with the next attempt index on any failure.
pub fn build_plane_model(
    field: FieldSpec,
    n: usize,
    ell: Option<usize>,
    seed: u64,
    retries: u64,
) -> Result<PlaneModel, ConstructError> {
    build_plane_model_from(field, n, ell, seed, 0, retries)
}

fn build_plane_model_from(
    field: FieldSpec,
    n: usize,
    ell: Option<usize>,
    seed: u64,
    start: u64,
    retries: u64,
) -> Result<PlaneModel, ConstructError> {
    if n < 3 {
        return Err(ConstructError::Input(format!("need n >= 3, got {n}")));
    }
    let p = prime_of(field)?;
    if (3 * n - 2) as u64 >= p {
        return Err(ConstructError::Input(format!(
            "field order {p} is too small for degree-{} auxiliary systems",
            3 * n - 2
        )));
    }
    let (ell, eps) = resolve_ell(n, ell)?;
    let q = base_point(field);
    let cols = complete_basis(field, 3, &[q.coords().to_vec()]);
    let mut census: BTreeMap<String, usize> = BTreeMap::new();
    for attempt in start..retries {
        let mut rng = stream(seed, Purpose::Gamma, attempt);
        // Prescribed contact data: distinct slopes, nonzero contact
        // parameters along each line.
        let mut slope_reps: Vec<u64> = Vec::with_capacity(ell);
        let mut guard = 0;
        while slope_reps.len() < ell && guard < 40 * ell {
            guard += 1;
            let t = rng.gen_range(0..p);
            if !slope_reps.contains(&t) {
                slope_reps.push(t);
            }
        }
        if slope_reps.len() < ell {
            *census.entry("slope draw stalled".into()).or_insert(0) += 1;
            continue;
        }
        slope_reps.sort_unstable();
        let contacts: Vec<TangentLine> = slope_reps
            .iter()
            .map(|&t| {
                let slope = Slope::Finite(field.from_i64(t as i64));
                let dir: Vec<Scalar> = cols[1]
                    .iter()
                    .zip(&cols[2])
                    .map(|(a, b)| a.add(&b.mul(&field.from_i64(t as i64))))
                    .collect();
                let tau = field.from_i64(rng.gen_range(1..p) as i64);
                let point = point_on_ray(&q, &dir, &tau).expect("affine pencil point");
                TangentLine { slope, point, direction: dir }
            })
            .collect();
        // Interpolate the curve through the contact data.
        let mut curve_scheme = if n >= 4 {
            vec![BaseCondition::FatPoint { p: q.clone(), mult: n - 3 }]
        } else {
            Vec::new()
        };
        curve_scheme.extend(contacts.iter().map(|t| BaseCondition::TangencyAtPoint {
            p: t.point.clone(),
            v: t.direction.clone(),
        }));
        let csys = LinearSystem::new(field, 3, n - 1, curve_scheme)?;
        if csys.affine_dim() != 1 + eps {
            *census.entry("contact conditions dependent".into()).or_insert(0) += 1;
            continue;
        }
        let gamma = if eps == 0 {
            csys.basis()[0].clone()
        } else {
            let mut coeffs: Vec<Scalar>;
            loop {
                coeffs =
                    (0..csys.basis().len()).map(|_| uniform_scalar(&mut rng, field, p)).collect();
                if !coeffs.iter().all(Scalar::is_zero) {
                    break;
                }
            }
            let parts: Vec<(Scalar, &Form)> =
                coeffs.into_iter().zip(csys.basis()).map(|(c, f)| (c, f)).collect();
            Form::linear_combination(&parts)?
        };
        if let Err(why) = gamma_acceptable(&gamma, &q, n) {
            *census.entry(why).or_insert(0) += 1;
            continue;
        }
        let scan = match tangent_lines(&gamma, &q) {
            Ok(scan) => scan,
            Err(e) => {
                *census.entry(e.to_string()).or_insert(0) += 1;
                continue;
            }
        };
        if scan.disc_degree != Some(2 * n - 4) {
            *census.entry("discriminant degenerates".into()).or_insert(0) += 1;
            continue;
        }
        if scan.tangents.len() < ell {
            *census.entry("too few rational tangents".into()).or_insert(0) += 1;
            continue;
        }
        let chosen: Vec<TangentLine> = scan.tangents[..ell].to_vec();
        // Extra simple base points on the curve, away from all chosen data.
        let pd = match pencil_residual(&gamma, &q) {
            Ok(pd) => pd,
            Err(e) => {
                *census.entry(e.to_string()).or_insert(0) += 1;
                continue;
            }
        };
        let mut point_rng = stream(seed, Purpose::ExtraPoint, attempt);
        let avoid: Vec<ProjPoint> = chosen.iter().map(|t| t.point.clone()).collect();
        let extra = match curve_points(&pd, &mut point_rng, p, eps, &avoid) {
            Some(pts) => pts,
            None => {
                *census.entry("no extra rational point".into()).or_insert(0) += 1;
                continue;
            }
        };
        let system = LinearSystem::new(field, 3, n, lsys_scheme(n, &q, &chosen, &extra))?;
        if system.proj_dim() != 3 {
            *census
                .entry(format!("system dimension {} instead of 3", system.proj_dim()))
                .or_insert(0) += 1;
            continue;
        }
        if let Err(e) = system.verify_basis() {
            *census.entry(format!("basis re-check: {e}")).or_insert(0) += 1;
            continue;
        }
        return Ok(PlaneModel {
            n,
            ell,
            eps,
            seed,
            attempt,
            q,
            gamma,
            chosen,
            extra,
            system,
        });
    }
    Err(ConstructError::RetriesExhausted {
        stage: "plane model",
        attempts: retries.saturating_sub(start),
        census: census_string(&census),
    })
}

/// Seeded rational points of the curve, found by drawing pencil slopes with
/// transversal residual intersection and scanning the residual quadratic
/// for roots; distinct and away from the listed points.
fn curve_points(
    pd: &PencilData,
    rng: &mut ChaCha8Rng,
    p: u64,
    want: usize,
    avoid: &[ProjPoint],
) -> Option<Vec<ProjPoint>> {
    let field = pd.q.field();
    let mut found: Vec<ProjPoint> = Vec::new();
    let mut guard = 0;
    while found.len() < want {
        guard += 1;
        if guard > 200 + 40 * want {
            return None;
        }
        let slope = Slope::Finite(uniform_scalar(rng, field, p));
        let [c, b, a] = pd.quadratic_at(&slope);
        if c.is_zero() {
            continue;
        }
        let disc = match &slope {
            Slope::Finite(t) => univar::eval(&pd.disc, t),
            Slope::Infinite => unreachable!(),
        };
        if disc.is_zero() {
            continue;
        }
        let quad = univar::trim(vec![c, b, a]);
        let dir = pd.direction(&slope);
        for tau in univar::roots_by_scan(&quad, field) {
            if found.len() == want {
                break;
            }
            let pt = point_on_ray(&pd.q, &dir, &tau).ok()?;
            if pt != pd.q && !avoid.contains(&pt) && !found.contains(&pt) {
                found.push(pt);
            }
        }
    }
    Some(found)
}

/// Implicitize the image of the plane under a four-form system: sample
/// parameter points, push them through the map, and intersect the
/// evaluation kernel at the target degree, which must be one-dimensional.
pub fn implicitize(
    basis: &[Form],
    degree: usize,
    seed: u64,
    attempt: u64,
) -> Result<Form, ConstructError> {
    if basis.len() != 4 {
        return Err(ConstructError::Input(format!(
            "implicitization needs a four-form system, got {}",
            basis.len()
        )));
    }
    let field = basis[0].field();
    let p = prime_of(field)?;
    let target = monomial_basis(4, degree);
    let needed = target.len() + 32;
    let mut rng = stream(seed, Purpose::Sampling, attempt);
    let mut rows = Vec::with_capacity(needed);
    let mut guard = 0;
    while rows.len() < needed {
        guard += 1;
        if guard > 40 * needed {
            return Err(ConstructError::Sampling { degree });
        }
        let coords: Vec<Scalar> = (0..3).map(|_| uniform_scalar(&mut rng, field, p)).collect();
        let pt = match ProjPoint::new(coords) {
            Ok(pt) => pt,
            Err(_) => continue,
        };
        let img: Vec<Scalar> = basis.iter().map(|f| f.evaluate_point(&pt)).collect();
        if img.iter().all(Scalar::is_zero) {
            continue;
        }
        let pw: Vec<Vec<Scalar>> = img.iter().map(|c| scalar_powers(c, degree)).collect();
        rows.push(
            target
                .iter()
                .map(|e| {
                    let mut acc = field.one();
                    for (i, table) in pw.iter().enumerate() {
                        if e.0[i] > 0 {
                            acc = acc.mul(&table[e.0[i] as usize]);
                        }
                    }
                    acc
                })
                .collect::<Vec<_>>(),
        );
    }
    let kernel = Matrix::from_rows(field, rows)?.kernel_basis();
    match kernel.len() {
        0 => Err(ConstructError::Sampling { degree }),
        1 => Ok(Form::from_coeffs(field, 4, degree, &kernel[0])?),
        found => Err(ConstructError::Degree { degree, found }),
    }
}

/// The predicted node set: for each chosen tangent line, the image of its
/// infinitely-near direction at the contact point (a gradient vector of the
/// system) and the image of the contracted line itself; the pair spans a
/// line in space.
#[derive(Debug, Clone)]
pub struct NodeSet {
    /// contact-direction images first, then contracted-line images; the
    /// pair (i, ell + i) belongs to tangent line i.
    pub nodes: Vec<ProjPoint>,
    pub lines: Vec<ProjLine>,
}

/// Sampling lanes inside one attempt: disjoint deterministic streams for
/// the independent sampling tasks of a single instance.
fn lane(attempt: u64, k: u64) -> u64 {
    debug_assert!(attempt < (1 << 20), "attempt index overflows the lane");
    attempt + (k << 20)
}

/// Compute the image line of the curve and the predicted nodes of the image
/// surface, with seeded generic witnesses.
pub fn predicted_nodes(model: &PlaneModel) -> Result<(ProjLine, NodeSet), ConstructError> {
    let field = model.q.field();
    let p = prime_of(field)?;
    let basis = model.system.basis();
    let pd = pencil_residual(&model.gamma, &model.q)?;
    let mut rng = stream(model.seed, Purpose::Witness, lane(model.attempt, 0));
    // The image line: two generic curve points pushed through the map.
    let mut avoid: Vec<ProjPoint> = model.chosen.iter().map(|t| t.point.clone()).collect();
    avoid.extend(model.extra.iter().cloned());
    let carriers = curve_points(&pd, &mut rng, p, 2, &avoid)
        .ok_or_else(|| ConstructError::Genericity("no generic curve points".into()))?;
    let images: Vec<ProjPoint> = carriers
        .iter()
        .map(|pt| image_point(basis, pt))
        .collect::<Result<_, _>>()?;
    if images[0] == images[1] {
        return Err(ConstructError::Genericity("curve image degenerates to a point".into()));
    }
    let r = ProjLine::new(images[0].clone(), images[1].clone())?;

    let mut nodes = Vec::with_capacity(2 * model.ell);
    for t in &model.chosen {
        nodes.push(gradient_node(basis, t, &mut rng, p)?);
    }
    for t in &model.chosen {
        let (first, second) = (
            contracted_node(basis, t, &mut rng, p)?,
            contracted_node(basis, t, &mut rng, p)?,
        );
        if first != second {
            return Err(ConstructError::Genericity(format!(
                "tangent line at {} fails to contract",
                t.point
            )));
        }
        nodes.push(first);
    }
    let mut lines = Vec::with_capacity(model.ell);
    for i in 0..model.ell {
        if nodes[i] == nodes[model.ell + i] {
            return Err(ConstructError::Genericity("node pair collapses".into()));
        }
        lines.push(ProjLine::new(nodes[i].clone(), nodes[model.ell + i].clone())?);
    }
    Ok((r, NodeSet { nodes, lines }))
}

fn image_point(basis: &[Form], pt: &ProjPoint) -> Result<ProjPoint, ConstructError> {
    let img: Vec<Scalar> = basis.iter().map(|f| f.evaluate_point(pt)).collect();
    if img.iter().all(Scalar::is_zero) {
        return Err(ConstructError::Genericity(format!("{pt} is a base point")));
    }
    Ok(ProjPoint::new(img)?)
}

/// Image of the infinitely-near direction at a contact point: the vector of
/// directional derivatives of the system along any transversal, which is
/// projectively independent of the transversal chosen.
fn gradient_node(
    basis: &[Form],
    t: &TangentLine,
    rng: &mut ChaCha8Rng,
    p: u64,
) -> Result<ProjPoint, ConstructError> {
    let field = basis[0].field();
    let mut guard = 0;
    loop {
        guard += 1;
        if guard > 80 {
            return Err(ConstructError::Genericity(format!(
                "no transversal witness at {}",
                t.point
            )));
        }
        let w: Vec<Scalar> = (0..3).map(|_| uniform_scalar(rng, field, p)).collect();
        let rows =
            vec![t.point.coords().to_vec(), t.direction.clone(), w.clone()];
        if Matrix::from_rows(field, rows)?.rank() != 3 {
            continue;
        }
        let grad: Vec<Scalar> =
            basis.iter().map(|f| f.directional_derivative(&t.point, &w)).collect();
        if grad.iter().all(Scalar::is_zero) {
            return Err(ConstructError::Genericity(format!(
                "vanishing system gradient at {}",
                t.point
            )));
        }
        return Ok(ProjPoint::new(grad)?);
    }
}

/// Image of a generic point of a chosen tangent line.
fn contracted_node(
    basis: &[Form],
    t: &TangentLine,
    rng: &mut ChaCha8Rng,
    p: u64,
) -> Result<ProjPoint, ConstructError> {
    let field = basis[0].field();
    let mut guard = 0;
    loop {
        guard += 1;
        if guard > 200 {
            return Err(ConstructError::Genericity(format!(
                "no usable witness on the tangent line at {}",
                t.point
            )));
        }
        let tau = uniform_scalar(rng, field, p);
        let pt = match point_on_ray(&t.point, &t.direction, &tau) {
            Ok(pt) => pt,
            Err(_) => continue,
        };
        let img: Vec<Scalar> = basis.iter().map(|f| f.evaluate_point(&pt)).collect();
        if img.iter().all(Scalar::is_zero) {
            continue;
        }
        return Ok(ProjPoint::new(img)?);
    }
}

/// One verification outcome recorded with an instance.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckOutcome {
    pub id: String,
    pub pass: bool,
    pub detail: String,
}

/// A finished instance: the plane data, the surface, the image line of the
/// curve, the node set with its pair lines, and the recorded checks.
#[derive(Debug, Clone)]
pub struct SurfaceModel {
    pub plane: PlaneModel,
    pub basis: Vec<Form>,
    pub surface: Form,
    pub r: ProjLine,
    pub nodes: Vec<ProjPoint>,
    pub node_lines: Vec<ProjLine>,
    pub checks: Vec<CheckOutcome>,
}

/// Build a full instance: plane model, implicitization, node prediction,
/// then the whole check battery; genericity failures move to the next
/// attempt index, so a fixed seed still reproduces the outcome.
pub fn build_sigma(
    field: FieldSpec,
    n: usize,
    ell: Option<usize>,
    seed: u64,
    retries: u64,
) -> Result<SurfaceModel, ConstructError> {
    let mut start = 0;
    let mut census: BTreeMap<String, usize> = BTreeMap::new();
    loop {
        let model = build_plane_model_from(field, n, ell, seed, start, retries)?;
        let attempt = model.attempt;
        match finish_instance(model) {
            Ok(sm) => return Ok(sm),
            Err(
                e @ (ConstructError::Genericity(_)
                | ConstructError::Sampling { .. }
                | ConstructError::Degree { .. }),
            ) => {
                *census.entry(e.to_string()).or_insert(0) += 1;
            }
            Err(hard) => return Err(hard),
        }
        start = attempt + 1;
        if start >= retries {
            return Err(ConstructError::RetriesExhausted {
                stage: "surface instance",
                attempts: retries,
                census: census_string(&census),
            });
        }
    }
}

fn finish_instance(model: PlaneModel) -> Result<SurfaceModel, ConstructError> {
    let surface =
        implicitize(model.system.basis(), model.n, model.seed, lane(model.attempt, 0))?;
    let (r, nodeset) = predicted_nodes(&model)?;
    let sm = SurfaceModel {
        basis: model.system.basis().to_vec(),
        plane: model,
        surface,
        r,
        nodes: nodeset.nodes,
        node_lines: nodeset.lines,
        checks: Vec::new(),
    };
    let checks = instance_checks(&sm);
    if let Some(fail) = checks.iter().find(|c| !c.pass) {
        return Err(ConstructError::Genericity(format!("check {}: {}", fail.id, fail.detail)));
    }
    Ok(SurfaceModel { checks, ..sm })
}

/// Re-run every per-instance invariant from the data alone. Never errors:
/// anything broken turns into a failing check with a diagnostic detail, so
/// tampered bundles report the first failing check instead of aborting.
pub fn instance_checks(sm: &SurfaceModel) -> Vec<CheckOutcome> {
    let mut checks: Vec<CheckOutcome> = Vec::new();
    let model = &sm.plane;
    let field = model.q.field();
    let n = model.n;
    let ell = model.ell;
    let mut push = |id: &str, pass: bool, detail: String| {
        checks.push(CheckOutcome { id: id.into(), pass, detail });
    };

    // The curve: multiplicity, tangent cone, global smoothness.
    match model.gamma.multiplicity_at(&model.q) {
        Ok(m) => push("gamma-mult", m == n - 3, format!("multiplicity {m}, want {}", n - 3)),
        Err(e) => push("gamma-mult", false, e.to_string()),
    }
    if n - 3 >= 2 {
        match cone_squarefree(&model.gamma, &model.q, n - 3) {
            Ok(sf) => push("gamma-cone", sf, "tangent cone squarefree".into()),
            Err(e) => push("gamma-cone", false, e.to_string()),
        }
    } else {
        push("gamma-cone", true, "vacuous below multiplicity 2".into());
    }
    match plane_singular_points(&model.gamma) {
        Ok(sing) => {
            let expected: Vec<ProjPoint> =
                if n - 3 >= 2 { vec![model.q.clone()] } else { Vec::new() };
            push(
                "gamma-smooth",
                sing == expected,
                format!("{} rational singular point(s), expected {}", sing.len(), expected.len()),
            );
        }
        Err(e) => push("gamma-smooth", false, e.to_string()),
    }

    // The tangent scan: discriminant degree and the chosen contacts.
    let scan = tangent_lines(&model.gamma, &model.q);
    match &scan {
        Ok(scan) => {
            push(
                "tangent-degree",
                scan.disc_degree == Some(2 * n - 4),
                format!("discriminant degree {:?}, want {}", scan.disc_degree, 2 * n - 4),
            );
            let fresh_ok = scan.tangents.len() >= ell && scan.tangents[..ell] == model.chosen[..];
            let contact_ok = model.chosen.iter().all(|t| {
                model.gamma.evaluate_point(&t.point).is_zero()
                    && model.gamma.directional_derivative(&t.point, &t.direction).is_zero()
            });
            push(
                "tangent-contact",
                model.chosen.len() == ell && fresh_ok && contact_ok,
                format!(
                    "{} chosen of {} rational tangents, contact orders verified",
                    model.chosen.len(),
                    scan.tangents.len()
                ),
            );
        }
        Err(e) => {
            push("tangent-degree", false, e.to_string());
            push("tangent-contact", false, "scan unavailable".into());
        }
    }

    // The four-dimensional system and the stored basis.
    {
        let sys = &model.system;
        let member_ok = sm.basis.len() == 4 && sm.basis.iter().all(|b| sys.contains(b));
        let extra_on_curve =
            model.extra.iter().all(|e| model.gamma.evaluate_point(e).is_zero());
        let pass = sys.proj_dim() == 3
            && member_ok
            && extra_on_curve
            && sys.verify_basis().is_ok();
        push(
            "system-dim",
            pass,
            format!("projective dimension {}, basis of {}", sys.proj_dim(), sm.basis.len()),
        );
    }

    // The surface: degree, re-implicitization, no linear factor along
    // random lines.
    {
        let redo = implicitize(model.system.basis(), n, model.seed, lane(model.attempt, 0));
        let same = matches!(&redo, Ok(f) if *f == sm.surface);
        let mut line_rng = stream(model.seed, Purpose::Sampling, lane(model.attempt, 2));
        let p = prime_of(field).unwrap_or(3);
        let mut lines_ok = true;
        let mut made = 0;
        let mut guard = 0;
        while made < 5 && guard < 200 {
            guard += 1;
            let a: Vec<Scalar> = (0..4).map(|_| uniform_scalar(&mut line_rng, field, p)).collect();
            let b: Vec<Scalar> = (0..4).map(|_| uniform_scalar(&mut line_rng, field, p)).collect();
            let line = match (ProjPoint::new(a), ProjPoint::new(b)) {
                (Ok(a), Ok(b)) if a != b => match ProjLine::new(a, b) {
                    Ok(l) => l,
                    Err(_) => continue,
                },
                _ => continue,
            };
            made += 1;
            if sm.surface.multiplicity_along_line(&line) != Ok(0) {
                lines_ok = false;
            }
        }
        push(
            "image-degree",
            sm.surface.degree() == n && sm.surface.nvars() == 4 && same && lines_ok && made == 5,
            format!(
                "degree {}, deterministic re-implicitization {}",
                sm.surface.degree(),
                if same { "matches" } else { "differs" }
            ),
        );
    }

    // The substitution identity: the surface vanishes on the whole image.
    {
        let images: Vec<Form> = sm.basis.clone();
        let pass = if images.len() != 4 {
            false
        } else if n <= 5 {
            sm.surface.substitute(&images).map(|g| g.is_zero()).unwrap_or(false)
        } else {
            let p = prime_of(field).unwrap_or(3);
            let mut rng = stream(model.seed, Purpose::Sampling, lane(model.attempt, 1));
            let mut done = 0;
            let mut guard = 0;
            let mut all_zero = true;
            while done < 500 && guard < 5000 {
                guard += 1;
                let coords: Vec<Scalar> =
                    (0..3).map(|_| uniform_scalar(&mut rng, field, p)).collect();
                if coords.iter().all(Scalar::is_zero) {
                    continue;
                }
                let img: Vec<Scalar> = images.iter().map(|f| f.evaluate(&coords)).collect();
                if img.iter().all(Scalar::is_zero) {
                    continue;
                }
                done += 1;
                if !sm.surface.evaluate(&img).is_zero() {
                    all_zero = false;
                    break;
                }
            }
            all_zero && done == 500
        };
        push(
            "substitution",
            pass,
            if n <= 5 { "exact composite expansion".into() } else { "500 sampled parameter points".into() },
        );
    }

    // The image line of the curve.
    match sm.surface.multiplicity_along_line(&sm.r) {
        Ok(m) => push("line-mult", m == n - 2, format!("multiplicity {m} along r, want {}", n - 2)),
        Err(e) => push("line-mult", false, e.to_string()),
    }

    // The node set.
    {
        let distinct = sm
            .nodes
            .iter()
            .enumerate()
            .all(|(i, a)| sm.nodes[i + 1..].iter().all(|b| a != b));
        push(
            "node-count",
            sm.nodes.len() == 2 * ell && distinct,
            format!("{} nodes, want {}", sm.nodes.len(), 2 * ell),
        );
    }
    {
        let mut worst = String::from("value and all four partials vanish at every node");
        let grads: Vec<Form> = (0..4).map(|i| sm.surface.derivative(i)).collect();
        let pass = sm.nodes.iter().enumerate().all(|(i, node)| {
            let ok = sm.surface.evaluate_point(node).is_zero()
                && grads.iter().all(|g| g.evaluate_point(node).is_zero());
            if !ok {
                worst = format!("node {i} at {node} is not a critical point of the surface");
            }
            ok
        });
        push("node-gradient", pass, worst);
    }
    {
        let mut detail = String::from("every node is an ordinary double point");
        let pass = sm.nodes.iter().enumerate().all(|(i, node)| {
            match classify_double_point(&sm.surface, node) {
                Ok(rep) if rep.verdict == Verdict::A1Node => true,
                Ok(rep) => {
                    detail = format!(
                        "node {i} at {node}: {} (Hessian rank {})",
                        rep.verdict, rep.hessian_rank
                    );
                    false
                }
                Err(e) => {
                    detail = e.to_string();
                    false
                }
            }
        });
        push("node-hessian", pass, detail);
    }
    push(
        "node-off-line",
        sm.nodes.iter().all(|node| !sm.r.contains(node)),
        "no node lies on the image line of the curve".into(),
    );

    // The pair lines.
    {
        let pairing_ok = sm.node_lines.len() == ell
            && sm.nodes.len() == 2 * ell
            && sm.node_lines.iter().enumerate().all(|(i, l)| {
                let (a, b) = (l.a(), l.b());
                (a == &sm.nodes[i] && b == &sm.nodes[ell + i])
                    || (b == &sm.nodes[i] && a == &sm.nodes[ell + i])
            });
        push("pair-lines", pairing_ok, format!("{} pair lines", sm.node_lines.len()));
    }
    {
        let mut disjoint = true;
        'outer: for i in 0..sm.node_lines.len() {
            for j in (i + 1)..sm.node_lines.len() {
                let rows = vec![
                    sm.node_lines[i].a().coords().to_vec(),
                    sm.node_lines[i].b().coords().to_vec(),
                    sm.node_lines[j].a().coords().to_vec(),
                    sm.node_lines[j].b().coords().to_vec(),
                ];
                let rank = Matrix::from_rows(field, rows).map(|m| m.rank()).unwrap_or(0);
                if rank != 4 {
                    disjoint = false;
                    break 'outer;
                }
            }
        }
        push("lines-disjoint", disjoint, "the pair lines are pairwise disjoint".into());
    }
    {
        let meets = sm.node_lines.iter().all(|l| {
            let rows = vec![
                l.a().coords().to_vec(),
                l.b().coords().to_vec(),
                sm.r.a().coords().to_vec(),
                sm.r.b().coords().to_vec(),
            ];
            Matrix::from_rows(field, rows).map(|m| m.rank()).unwrap_or(0) == 3
        });
        push("lines-meet-r", meets, "every pair line meets the image line of the curve".into());
    }

    // Fresh-witness re-checks of the two node families.
    {
        let p = prime_of(field).unwrap_or(3);
        let mut rng = stream(model.seed, Purpose::Witness, lane(model.attempt, 1));
        let mut contraction_ok = sm.basis.len() == 4 && sm.nodes.len() == 2 * ell;
        let mut gradient_ok = contraction_ok;
        if contraction_ok {
            for (i, t) in model.chosen.iter().enumerate() {
                match gradient_node(&sm.basis, t, &mut rng, p) {
                    Ok(gn) => {
                        if gn != sm.nodes[i] {
                            gradient_ok = false;
                        }
                    }
                    Err(_) => gradient_ok = false,
                }
                match contracted_node(&sm.basis, t, &mut rng, p) {
                    Ok(cn) => {
                        if cn != sm.nodes[ell + i] {
                            contraction_ok = false;
                        }
                    }
                    Err(_) => contraction_ok = false,
                }
            }
        }
        push(
            "contraction",
            contraction_ok,
            "fresh witnesses on each tangent line map to the recorded node".into(),
        );
        push(
            "gradient-direction",
            gradient_ok,
            "a fresh transversal reproduces each contact-direction node".into(),
        );
    }

    checks
}

/// Dimensions of the auxiliary linear systems attached to an instance, with
/// their expected values, and the independence defect of the node
/// conditions against the space system of the surface's class.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ClaimReport {
    pub n: usize,
    pub ell: usize,
    pub eps: usize,
    pub prime: u64,
    pub m_dim: isize,
    pub m_expected: isize,
    pub n_dim: isize,
    pub n_expected: isize,
    pub p_dim: isize,
    pub p_expected: isize,
    pub s_dim: isize,
    pub defect: usize,
    pub pass: bool,
}

/// Build the three plane systems of the dimension claims (the full contact
/// scheme, the tangency residual, the plain double-point residual) and the
/// space system through the image line, then measure everything.
pub fn claim_systems(sm: &SurfaceModel) -> Result<ClaimReport, ConstructError> {
    let model = &sm.plane;
    let field = model.q.field();
    let p = prime_of(field)?;
    let (n, ell, eps) = (model.n, model.ell, model.eps);
    let big = 3 * n - 2;

    let mut m_scheme = vec![BaseCondition::FatPoint { p: model.q.clone(), mult: big - 4 }];
    for t in &model.chosen {
        m_scheme.push(BaseCondition::FatPoint { p: t.point.clone(), mult: 2 });
        m_scheme.push(BaseCondition::InfNearDouble {
            p: t.point.clone(),
            v: t.direction.clone(),
        });
    }
    for e in &model.extra {
        m_scheme.push(BaseCondition::FatPoint { p: e.clone(), mult: 2 });
    }
    let m_sys = LinearSystem::new(field, 3, big, m_scheme)?;

    let mut n_scheme = vec![BaseCondition::FatPoint { p: model.q.clone(), mult: big - 4 - ell }];
    for t in &model.chosen {
        n_scheme.push(BaseCondition::TangencyAtPoint {
            p: t.point.clone(),
            v: t.direction.clone(),
        });
    }
    for e in &model.extra {
        n_scheme.push(BaseCondition::FatPoint { p: e.clone(), mult: 2 });
    }
    let n_sys = LinearSystem::new(field, 3, big - ell, n_scheme)?;

    let mut p_scheme = vec![BaseCondition::FatPoint { p: model.q.clone(), mult: big - 4 - ell }];
    for t in &model.chosen {
        p_scheme.push(BaseCondition::FatPoint { p: t.point.clone(), mult: 2 });
    }
    for e in &model.extra {
        p_scheme.push(BaseCondition::FatPoint { p: e.clone(), mult: 2 });
    }
    let p_sys = LinearSystem::new(field, 3, big - ell, p_scheme)?;

    let s_sys = LinearSystem::new(
        field,
        4,
        n,
        vec![BaseCondition::FatLine { line: sm.r.clone(), mult: n - 2 }],
    )?;
    let node_conditions: Vec<BaseCondition> =
        sm.nodes.iter().map(|nd| BaseCondition::SimplePoint { p: nd.clone() }).collect();
    let defect = independence_defect(&s_sys, &node_conditions)?;

    let (m_dim, n_dim, p_dim) = (m_sys.proj_dim(), n_sys.proj_dim(), p_sys.proj_dim());
    let m_expected = (6 * n - 4) as isize;
    let n_expected = (6 * n - 4 - ell) as isize;
    let p_expected = (6 * n - 4 - 2 * ell) as isize;
    let pass = m_dim == m_expected
        && n_dim == n_expected
        && p_dim == p_expected
        && n_dim >= m_dim - ell as isize
        && m_dim - 2 * (ell as isize) == p_dim
        && defect == 0;
    Ok(ClaimReport {
        n,
        ell,
        eps,
        prime: p,
        m_dim,
        m_expected,
        n_dim,
        n_expected,
        p_dim,
        p_expected,
        s_dim: s_sys.proj_dim(),
        defect,
        pass,
    })
}

fn slope_to_json(slope: &Slope) -> Value {
    match slope {
        Slope::Finite(t) => Value::String(t.to_coeff_string()),
        Slope::Infinite => Value::String("inf".into()),
    }
}

fn slope_from_json(field: FieldSpec, v: &Value) -> Result<Slope, ConstructError> {
    let s = v.as_str().ok_or_else(|| ConstructError::Json(format!("bad slope {v}")))?;
    if s == "inf" {
        return Ok(Slope::Infinite);
    }
    Ok(Slope::Finite(field.parse(s).map_err(ConstructError::Json)?))
}

fn scalars_to_json(v: &[Scalar]) -> Value {
    Value::Array(v.iter().map(|c| Value::String(c.to_coeff_string())).collect())
}

fn scalars_from_json(field: FieldSpec, v: &Value) -> Result<Vec<Scalar>, ConstructError> {
    v.as_array()
        .ok_or_else(|| ConstructError::Json(format!("expected an array, got {v}")))?
        .iter()
        .map(|x| {
            x.as_str()
                .ok_or_else(|| ConstructError::Json(format!("bad coefficient {x}")))
                .and_then(|s| field.parse(s).map_err(ConstructError::Json))
        })
        .collect()
}

fn line_to_json(l: &ProjLine) -> Value {
    json!({ "a": point_to_json(l.a()), "b": point_to_json(l.b()) })
}

fn line_from_json(field: FieldSpec, v: &Value) -> Result<ProjLine, ConstructError> {
    let a = v.get("a").ok_or_else(|| ConstructError::Json("line missing a".into()))?;
    let b = v.get("b").ok_or_else(|| ConstructError::Json("line missing b".into()))?;
    Ok(ProjLine::new(point_from_json(field, a)?, point_from_json(field, b)?)?)
}

/// Serialize an instance; the encoding is canonical (sorted keys, exact
/// coefficient strings), so equal instances produce identical bytes.
pub fn model_to_json(sm: &SurfaceModel) -> Value {
    let model = &sm.plane;
    let prime = match model.q.field() {
        FieldSpec::Prime(p) => p,
        FieldSpec::Rational => unreachable!("instances live over prime fields"),
    };
    json!({
        "schema": "severilab/surface-model/1",
        "n": model.n,
        "prime": prime,
        "seed": model.seed,
        "attempt": model.attempt,
        "ell": model.ell,
        "eps": model.eps,
        "q": point_to_json(&model.q),
        "gamma": model.gamma.to_json(),
        "tangents": model.chosen.iter().map(|t| json!({
            "slope": slope_to_json(&t.slope),
            "point": point_to_json(&t.point),
            "direction": scalars_to_json(&t.direction),
        })).collect::<Vec<_>>(),
        "extra_points": model.extra.iter().map(point_to_json).collect::<Vec<_>>(),
        "basis": sm.basis.iter().map(Form::to_json).collect::<Vec<_>>(),
        "surface": sm.surface.to_json(),
        "r": line_to_json(&sm.r),
        "nodes": sm.nodes.iter().map(point_to_json).collect::<Vec<_>>(),
        "node_lines": sm.node_lines.iter().map(line_to_json).collect::<Vec<_>>(),
        "checks": sm.checks.iter().map(|c| json!({
            "id": c.id,
            "pass": c.pass,
            "detail": c.detail,
        })).collect::<Vec<_>>(),
    })
}

/// Load an instance from its serialized form, rebuilding the linear system
/// from the stored base scheme. Structural problems (missing fields, bad
/// numbers) error here; mathematical problems surface later as failing
/// checks, never as parse errors.
pub fn model_from_json(v: &Value) -> Result<SurfaceModel, ConstructError> {
    let obj = v.as_object().ok_or_else(|| ConstructError::Json("bundle is not an object".into()))?;
    if obj.get("schema").and_then(Value::as_str) != Some("severilab/surface-model/1") {
        return Err(ConstructError::Json("unknown bundle schema".into()));
    }
    let num = |key: &str| -> Result<u64, ConstructError> {
        obj.get(key)
            .and_then(Value::as_u64)
            .ok_or_else(|| ConstructError::Json(format!("missing numeric field {key}")))
    };
    let prime = num("prime")?;
    let field = FieldSpec::try_prime(prime).map_err(ConstructError::Json)?;
    let n = num("n")? as usize;
    if n < 3 {
        return Err(ConstructError::Json(format!("bundle n = {n} out of range")));
    }
    let get = |key: &str| -> Result<&Value, ConstructError> {
        obj.get(key).ok_or_else(|| ConstructError::Json(format!("missing field {key}")))
    };
    let q = point_from_json(field, get("q")?)?;
    let gamma = Form::from_json(get("gamma")?)?;
    if gamma.field() != field {
        return Err(ConstructError::Json("curve field disagrees with the bundle prime".into()));
    }
    let tangents_raw = get("tangents")?
        .as_array()
        .ok_or_else(|| ConstructError::Json("tangents is not an array".into()))?;
    let mut chosen = Vec::with_capacity(tangents_raw.len());
    for t in tangents_raw {
        chosen.push(TangentLine {
            slope: slope_from_json(field, t.get("slope").unwrap_or(&Value::Null))?,
            point: point_from_json(
                field,
                t.get("point").ok_or_else(|| ConstructError::Json("tangent missing point".into()))?,
            )?,
            direction: scalars_from_json(
                field,
                t.get("direction")
                    .ok_or_else(|| ConstructError::Json("tangent missing direction".into()))?,
            )?,
        });
    }
    let extra = get("extra_points")?
        .as_array()
        .ok_or_else(|| ConstructError::Json("extra_points is not an array".into()))?
        .iter()
        .map(|e| point_from_json(field, e).map_err(ConstructError::Form))
        .collect::<Result<Vec<_>, _>>()?;
    let ell = num("ell")? as usize;
    if ell != chosen.len() {
        return Err(ConstructError::Json(format!(
            "bundle lists {} tangents but ell = {ell}",
            chosen.len()
        )));
    }
    let system = LinearSystem::new(field, 3, n, lsys_scheme(n, &q, &chosen, &extra))?;
    let basis = get("basis")?
        .as_array()
        .ok_or_else(|| ConstructError::Json("basis is not an array".into()))?
        .iter()
        .map(|f| Form::from_json(f).map_err(ConstructError::Form))
        .collect::<Result<Vec<_>, _>>()?;
    let surface = Form::from_json(get("surface")?)?;
    if surface.field() != field || basis.iter().any(|b| b.field() != field) {
        return Err(ConstructError::Json("form fields disagree with the bundle prime".into()));
    }
    let r = line_from_json(field, get("r")?)?;
    let nodes = get("nodes")?
        .as_array()
        .ok_or_else(|| ConstructError::Json("nodes is not an array".into()))?
        .iter()
        .map(|e| point_from_json(field, e).map_err(ConstructError::Form))
        .collect::<Result<Vec<_>, _>>()?;
    let node_lines = get("node_lines")?
        .as_array()
        .ok_or_else(|| ConstructError::Json("node_lines is not an array".into()))?
        .iter()
        .map(|l| line_from_json(field, l))
        .collect::<Result<Vec<_>, _>>()?;
    let checks = get("checks")?
        .as_array()
        .ok_or_else(|| ConstructError::Json("checks is not an array".into()))?
        .iter()
        .map(|c| -> Result<CheckOutcome, ConstructError> {
            Ok(CheckOutcome {
                id: c
                    .get("id")
                    .and_then(Value::as_str)
                    .ok_or_else(|| ConstructError::Json("check missing id".into()))?
                    .to_string(),
                pass: c
                    .get("pass")
                    .and_then(Value::as_bool)
                    .ok_or_else(|| ConstructError::Json("check missing pass".into()))?,
                detail: c.get("detail").and_then(Value::as_str).unwrap_or("").to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SurfaceModel {
        plane: PlaneModel {
            n,
            ell,
            eps: num("eps")? as usize,
            seed: num("seed")?,
            attempt: num("attempt")?,
            q,
            gamma,
            chosen,
            extra,
            system,
        },
        basis,
        surface,
        r,
        nodes,
        node_lines,
        checks,
    })
}
