use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// The coefficient field of a scalar, matrix or form: the rationals, or a
/// prime field F_p with p an odd prime below 2^62 (so products fit in u128
/// and 2 is invertible, which the double-point classifier needs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldSpec {
    Rational,
    Prime(u64),
}

impl FieldSpec {
    pub fn prime(p: u64) -> FieldSpec {
        assert!(p >= 3 && p % 2 == 1 && p < (1 << 62), "need an odd prime below 2^62, got {p}");
        debug_assert!(is_prime_u64(p), "{p} is not prime");
        FieldSpec::Prime(p)
    }

    /// Checked variant of `prime` for untrusted input (JSON, CLI flags).
    pub fn try_prime(p: u64) -> Result<FieldSpec, String> {
        if p < 3 || p % 2 == 0 || p >= (1 << 62) {
            return Err(format!("need an odd prime below 2^62, got {p}"));
        }
        if !is_prime_u64(p) {
            return Err(format!("{p} is not prime"));
        }
        Ok(FieldSpec::Prime(p))
    }

    pub fn zero(&self) -> Scalar {
        match *self {
            FieldSpec::Rational => Scalar::Rational(Box::new(BigRational::zero())),
            FieldSpec::Prime(p) => Scalar::Prime { p, value: 0 },
        }
    }

    pub fn one(&self) -> Scalar {
        match *self {
            FieldSpec::Rational => Scalar::Rational(Box::new(BigRational::one())),
            FieldSpec::Prime(p) => Scalar::Prime { p, value: 1 },
        }
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match *self {
            FieldSpec::Rational => Scalar::Rational(Box::new(BigRational::from_integer(v.into()))),
            FieldSpec::Prime(p) => {
                // p < 2^62 fits in i64, so rem_euclid stays in range.
                Scalar::Prime { p, value: v.rem_euclid(p as i64) as u64 }
            }
        }
    }

    /// Parse a coefficient string: an optional sign and digits, or `a/b`
    /// for rationals. Prime-field values reduce to the canonical
    /// representative in [0, p).
    pub fn parse(&self, s: &str) -> Result<Scalar, String> {
        match *self {
            FieldSpec::Rational => {
                let (num, den) = match s.split_once('/') {
                    Some((a, b)) => (a, b),
                    None => (s, "1"),
                };
                let num = BigInt::from_str(num.trim()).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
                let den = BigInt::from_str(den.trim()).map_err(|e| format!("bad denominator {den:?}: {e}"))?;
                if den.is_zero() {
                    return Err("zero denominator".into());
                }
                Ok(Scalar::Rational(Box::new(BigRational::new(num, den))))
            }
            FieldSpec::Prime(p) => {
                let v = BigInt::from_str(s.trim()).map_err(|e| format!("bad integer {s:?}: {e}"))?;
                Ok(Scalar::Prime { p, value: mod_floor_bigint(&v, p) })
            }
        }
    }
}

fn mod_floor_bigint(v: &BigInt, p: u64) -> u64 {
    use num_traits::ToPrimitive;
    let mut m = v % BigInt::from(p);
    if m.is_negative() {
        m += BigInt::from(p);
    }
    m.to_u64().expect("residue fits u64")
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rational => write!(f, "Q"),
            FieldSpec::Prime(p) => write!(f, "F_{p}"),
        }
    }
}

/// One exact field element, tagged with its field. Arithmetic between
/// scalars of different fields is a programming error and panics; the public
/// constructors of matrices and forms reject mixed fields up front.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(Box<BigRational>),
    Prime { p: u64, value: u64 },
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Rational(_) => FieldSpec::Rational,
            Scalar::Prime { p, .. } => FieldSpec::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Prime { value, .. } => *value == 0,
        }
    }

    pub fn add(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(Box::new(&**a + &**b)),
            (Scalar::Prime { p, value: a }, Scalar::Prime { p: q, value: b }) => {
                assert_eq!(p, q, "field mismatch");
                Scalar::Prime { p: *p, value: addmod(*a, *b, *p) }
            }
            _ => panic!("field mismatch: {} vs {}", self.field(), rhs.field()),
        }
    }

    pub fn sub(&self, rhs: &Scalar) -> Scalar {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(Box::new(-&**a)),
            Scalar::Prime { p, value } => {
                Scalar::Prime { p: *p, value: if *value == 0 { 0 } else { p - value } }
            }
        }
    }

    pub fn mul(&self, rhs: &Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(Box::new(&**a * &**b)),
            (Scalar::Prime { p, value: a }, Scalar::Prime { p: q, value: b }) => {
                assert_eq!(p, q, "field mismatch");
                Scalar::Prime { p: *p, value: mulmod(*a, *b, *p) }
            }
            _ => panic!("field mismatch: {} vs {}", self.field(), rhs.field()),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Scalar> {
        match self {
            Scalar::Rational(a) => {
                if a.is_zero() {
                    None
                } else {
                    Some(Scalar::Rational(Box::new(a.recip())))
                }
            }
            Scalar::Prime { p, value } => {
                if *value == 0 {
                    None
                } else {
                    Some(Scalar::Prime { p: *p, value: invmod(*value, *p) })
                }
            }
        }
    }

    pub fn div(&self, rhs: &Scalar) -> Scalar {
        self.mul(&rhs.inverse().expect("division by zero"))
    }

    pub fn pow(&self, mut e: u64) -> Scalar {
        let mut base = self.clone();
        let mut acc = self.field().one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Canonical string form: decimal representative for prime fields,
    /// `a` or `a/b` in lowest terms with positive denominator for rationals.
    pub fn to_coeff_string(&self) -> String {
        match self {
            Scalar::Rational(r) => {
                if r.denom().is_one() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Prime { value, .. } => value.to_string(),
        }
    }

    /// The canonical u64 representative, for prime-field scalars only.
    pub fn residue(&self) -> u64 {
        match self {
            Scalar::Prime { value, .. } => *value,
            Scalar::Rational(_) => panic!("residue() on a rational scalar"),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_coeff_string())
    }
}

#[inline]
pub(crate) fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

#[inline]
pub(crate) fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

pub(crate) fn invmod(a: u64, p: u64) -> u64 {
    // Extended Euclid on (a, p); p is prime and a != 0 mod p.
    let (mut r0, mut r1) = (a as i128, p as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "invmod of non-unit {a} mod {p}");
    s0.rem_euclid(p as i128) as u64
}

/// Deterministic Miller-Rabin, exact for all u64 inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn rat(n: i64, d: i64) -> Scalar {
        Scalar::Rational(Box::new(BigRational::new(n.into(), d.into())))
    }

    #[test]
    fn canonical_representatives() {
        let f = FieldSpec::prime(10007);
        assert_eq!(f.from_i64(-1).residue(), 10006);
        assert_eq!(f.from_i64(10007).residue(), 0);
        assert_eq!(f.parse("-1").unwrap().residue(), 10006);
        assert_eq!(f.parse("20015").unwrap().residue(), 1);
        assert_eq!(f.parse("20019").unwrap().residue(), 5);
    }

    #[test]
    fn rational_strings_round_trip() {
        let f = FieldSpec::Rational;
        for s in ["0", "7", "-3", "22/7", "-9/4"] {
            let v = f.parse(s).unwrap();
            assert_eq!(v.to_coeff_string(), s);
            assert_eq!(f.parse(&v.to_coeff_string()).unwrap(), v);
        }
        // Non-canonical inputs normalize on parse.
        assert_eq!(f.parse("4/6").unwrap(), rat(2, 3));
        assert_eq!(f.parse("3/-9").unwrap(), rat(-1, 3));
    }

    #[test]
    fn inverses_and_pow() {
        let f = FieldSpec::prime(31013);
        for v in [1i64, 2, 17, 31012, 999] {
            let x = f.from_i64(v);
            let inv = x.inverse().unwrap();
            assert_eq!(x.mul(&inv), f.one());
        }
        assert!(f.zero().inverse().is_none());
        assert_eq!(f.from_i64(3).pow(5).residue(), 243);
        let q = FieldSpec::Rational;
        assert_eq!(rat(2, 3).pow(3), rat(8, 27));
        assert!(q.zero().inverse().is_none());
    }

    #[test]
    fn field_axioms_on_random_triples() {
        // Associativity, commutativity, distributivity, inverse laws on 100
        // seeded triples per field.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for field in [FieldSpec::prime(10007), FieldSpec::Rational] {
            for _ in 0..100 {
                let draw = |rng: &mut rand_chacha::ChaCha8Rng| match field {
                    FieldSpec::Prime(p) => field.from_i64(rng.gen_range(0..p as i64)),
                    FieldSpec::Rational => {
                        let n = rng.gen_range(-50i64..=50);
                        let d = rng.gen_range(1i64..=20);
                        rat(n, d)
                    }
                };
                let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
                assert_eq!(a.add(&b), b.add(&a));
                assert_eq!(a.mul(&b), b.mul(&a));
                assert_eq!(a.add(&b.add(&c)), a.add(&b).add(&c));
                assert_eq!(a.mul(&b.mul(&c)), a.mul(&b).mul(&c));
                assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
                assert_eq!(a.sub(&a), field.zero());
                if !a.is_zero() {
                    assert_eq!(a.mul(&a.inverse().unwrap()), field.one());
                }
            }
        }
    }

    #[test]
    fn primality_oracle() {
        assert!(is_prime_u64(10007));
        assert!(is_prime_u64(31013));
        assert!(is_prime_u64(101));
        assert!(is_prime_u64(211));
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(10005));
        assert!(!is_prime_u64((1 << 61) + 1));
        assert!(is_prime_u64(2305843009213693951)); // 2^61 - 1
    }
}
