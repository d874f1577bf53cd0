//! Sparse multivariate polynomials with complex coefficients.
//!
//! A polynomial over n canonical pairs lives in 2n commuting coordinates
//! ordered (q^1..q^n, p_1..p_n). Terms are kept in a sorted map from
//! exponent vectors to coefficients; terms with an exactly zero coefficient
//! are pruned so the representation is canonical.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u16>, C64>,
}

fn coeff_key(c: C64) -> (u64, u64) {
    (c.re.to_bits(), c.im.to_bits())
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, z: C64) -> Self {
        let mut p = Polynomial::zero(nvars);
        if z != C64::new(0.0, 0.0) {
            p.terms.insert(vec![0; nvars], z);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Polynomial::constant(nvars, C64::new(1.0, 0.0))
    }

    /// The coordinate ξ^a as a polynomial, `a` zero-based.
    pub fn coordinate(nvars: usize, a: usize) -> Self {
        assert!(a < nvars, "coordinate index out of range");
        let mut e = vec![0u16; nvars];
        e[a] = 1;
        let mut p = Polynomial::zero(nvars);
        p.terms.insert(e, C64::new(1.0, 0.0));
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, String>
    where
        I: IntoIterator<Item = (Vec<u16>, C64)>,
    {
        let mut map: BTreeMap<Vec<u16>, C64> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(format!(
                    "exponent vector has length {} but the algebra has {} coordinates",
                    e.len(),
                    nvars
                ));
            }
            *map.entry(e).or_insert(C64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| *c != C64::new(0.0, 0.0));
        Ok(Polynomial { nvars, terms: map })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, &C64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u16]) -> C64 {
        self.terms.get(e).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Largest coefficient modulus; the polynomial norm used for equality.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            *terms.entry(e.clone()).or_insert(C64::new(0.0, 0.0)) += *c;
        }
        terms.retain(|_, c| *c != C64::new(0.0, 0.0));
        Polynomial { nvars: self.nvars, terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, z: C64) -> Self {
        if z == C64::new(0.0, 0.0) {
            return Polynomial::zero(self.nvars);
        }
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c * z)).collect();
        Polynomial { nvars: self.nvars, terms }
    }

    /// Product with order-independent accumulation: contributions to each
    /// result exponent are sorted by bit pattern before summing, so
    /// `a.mul(b)` and `b.mul(a)` are bit-identical.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut contribs: Vec<(Vec<u16>, C64)> =
            Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u16> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                contribs.push((e, ca * cb));
            }
        }
        contribs.sort_by(|l, r| l.0.cmp(&r.0).then_with(|| coeff_key(l.1).cmp(&coeff_key(r.1))));
        let mut terms: BTreeMap<Vec<u16>, C64> = BTreeMap::new();
        for (e, c) in contribs {
            *terms.entry(e).or_insert(C64::new(0.0, 0.0)) += c;
        }
        terms.retain(|_, c| *c != C64::new(0.0, 0.0));
        Polynomial { nvars: self.nvars, terms }
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Polynomial::one(self.nvars);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Coefficient-wise complex conjugate (the polynomial involution).
    pub fn conjugate(&self) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c.conj())).collect();
        Polynomial { nvars: self.nvars, terms }
    }

    /// Partial derivative with respect to coordinate `a`.
    pub fn partial(&self, a: usize) -> Self {
        assert!(a < self.nvars);
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[a] == 0 {
                continue;
            }
            let mut en = e.clone();
            en[a] -= 1;
            let cn = c * C64::new(e[a] as f64, 0.0);
            terms.insert(en, cn);
        }
        Polynomial { nvars: self.nvars, terms }
    }

    pub fn eval(&self, point: &[f64]) -> C64 {
        assert_eq!(point.len(), self.nvars);
        let mut acc = C64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut m = 1.0;
            for (x, &k) in point.iter().zip(e.iter()) {
                m *= x.powi(k as i32);
            }
            acc += c * m;
        }
        acc
    }

    /// Substitute coordinate `a` by `images[a]` for every coordinate.
    pub fn substitute(&self, images: &[Polynomial]) -> Self {
        assert_eq!(images.len(), self.nvars);
        let mut acc = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut m = Polynomial::constant(self.nvars, *c);
            for (a, &k) in e.iter().enumerate() {
                if k > 0 {
                    m = m.mul(&images[a].pow(k as usize));
                }
            }
            acc = acc.add(&m);
        }
        acc
    }

    /// True when every coefficient is real to within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.nvars / 2;
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)", c.re, c.im)?;
            for (a, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if a < n {
                    write!(f, "*q{}", a + 1)?;
                } else {
                    write!(f, "*p{}", a - n + 1)?;
                }
                if k > 1 {
                    write!(f, "^{}", k)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn product_of_coordinates_is_monomial() {
        // q^1 * p_1 in one canonical pair -> the monomial q^1 p_1
        let q = Polynomial::coordinate(2, 0);
        let p = Polynomial::coordinate(2, 1);
        let qp = q.mul(&p);
        assert_eq!(qp.coeff(&[1, 1]), c(1.0, 0.0));
        assert_eq!(qp.num_terms(), 1);
    }

    #[test]
    fn multiplication_is_exactly_commutative() {
        let mut a = Polynomial::zero(2);
        let mut b = Polynomial::zero(2);
        for (k, (e, v)) in [
            (vec![1u16, 0], c(0.3, -1.2)),
            (vec![0, 2], c(-0.7, 0.11)),
            (vec![2, 1], c(1.4142, 2.5)),
        ]
        .into_iter()
        .enumerate()
        {
            if k % 2 == 0 {
                a = a.add(&Polynomial::from_terms(2, [(e, v)]).unwrap());
            } else {
                b = b.add(&Polynomial::from_terms(2, [(e, v)]).unwrap());
            }
        }
        b = b.add(&Polynomial::from_terms(2, [(vec![1, 1], c(-0.25, 0.5))]).unwrap());
        let ab = a.mul(&b);
        let ba = b.mul(&a);
        assert_eq!(ab, ba);
        assert_eq!(ab.sub(&ba).max_coeff(), 0.0);
    }

    #[test]
    fn partial_derivative() {
        // d/dq ( q^2 p ) = 2 q p
        let q = Polynomial::coordinate(2, 0);
        let p = Polynomial::coordinate(2, 1);
        let f = q.mul(&q).mul(&p);
        let df = f.partial(0);
        assert_eq!(df.coeff(&[1, 1]), c(2.0, 0.0));
        assert_eq!(df.num_terms(), 1);
    }

    #[test]
    fn conjugation_conjugates_coefficients() {
        let f = Polynomial::from_terms(2, [(vec![1, 0], c(1.0, 2.0))]).unwrap();
        let g = f.conjugate();
        assert_eq!(g.coeff(&[1, 0]), c(1.0, -2.0));
    }

    #[test]
    fn substitution_rotates_coordinates() {
        // (q,p) -> (p,-q) maps q*p to -q*p
        let q = Polynomial::coordinate(2, 0);
        let p = Polynomial::coordinate(2, 1);
        let f = q.mul(&p);
        let images = vec![p.clone(), q.scale(c(-1.0, 0.0))];
        let g = f.substitute(&images);
        assert_eq!(g.coeff(&[1, 1]), c(-1.0, 0.0));
    }
}
