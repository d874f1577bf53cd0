//! The system algebras: complex matrix algebras, commutative polynomial
//! algebras, and binary tensor products of the two, together with their
//! elements, products, involution, and centers.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub mod matrices;
pub mod poly;
pub mod tensor;

pub use poly::Polynomial;

/// Default norm threshold for element equality.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraKind {
    /// Full algebra of complex n x n matrices.
    Matrix { dim: usize },
    /// Commutative polynomials in 2n coordinates (q^1..q^n, p_1..p_n).
    Polynomial { pairs: usize },
    /// Binary tensor product; factors must be matrix or polynomial algebras.
    Tensor { left: Box<AlgebraKind>, right: Box<AlgebraKind> },
}

impl AlgebraKind {
    pub fn is_commutative(&self) -> bool {
        match self {
            AlgebraKind::Matrix { dim } => *dim == 1,
            AlgebraKind::Polynomial { .. } => true,
            AlgebraKind::Tensor { left, right } => left.is_commutative() && right.is_commutative(),
        }
    }
}

/// What the center of an algebra looks like.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterDescription {
    ScalarsOnly,
    WholeAlgebra,
    LeftFactorCentral,
    RightFactorCentral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraDescriptor {
    kind: AlgebraKind,
    tolerance: f64,
}

impl AlgebraDescriptor {
    pub fn matrix(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::Unsupported("matrix dimension must be >= 1".into()));
        }
        Ok(AlgebraDescriptor { kind: AlgebraKind::Matrix { dim }, tolerance: DEFAULT_TOLERANCE })
    }

    pub fn polynomial(pairs: usize) -> Result<Self> {
        if pairs < 1 {
            return Err(Error::Unsupported("polynomial algebra needs >= 1 canonical pair".into()));
        }
        Ok(AlgebraDescriptor {
            kind: AlgebraKind::Polynomial { pairs },
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    pub fn tensor(left: AlgebraDescriptor, right: AlgebraDescriptor) -> Result<Self> {
        if matches!(left.kind, AlgebraKind::Tensor { .. })
            || matches!(right.kind, AlgebraKind::Tensor { .. })
        {
            return Err(Error::Unsupported(
                "nested tensor algebras are not supported; factors must be matrix or polynomial"
                    .into(),
            ));
        }
        let tolerance = left.tolerance.max(right.tolerance);
        Ok(AlgebraDescriptor {
            kind: AlgebraKind::Tensor { left: Box::new(left.kind), right: Box::new(right.kind) },
            tolerance,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::Unsupported("tolerance must be positive".into()));
        }
        self.tolerance = tolerance;
        Ok(self)
    }

    pub fn kind(&self) -> &AlgebraKind {
        &self.kind
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Structural equality ignoring the tolerance knob.
    pub fn same_algebra(&self, other: &AlgebraDescriptor) -> bool {
        self.kind == other.kind
    }

    pub fn is_commutative(&self) -> bool {
        self.kind.is_commutative()
    }

    pub fn matrix_dim(&self) -> Option<usize> {
        match self.kind {
            AlgebraKind::Matrix { dim } => Some(dim),
            _ => None,
        }
    }

    pub fn polynomial_pairs(&self) -> Option<usize> {
        match self.kind {
            AlgebraKind::Polynomial { pairs } => Some(pairs),
            _ => None,
        }
    }

    /// Factor descriptors of a tensor algebra, inheriting its tolerance.
    pub fn tensor_factors(&self) -> Option<(AlgebraDescriptor, AlgebraDescriptor)> {
        match &self.kind {
            AlgebraKind::Tensor { left, right } => {
                let l = AlgebraDescriptor { kind: (**left).clone(), tolerance: self.tolerance };
                let r = AlgebraDescriptor { kind: (**right).clone(), tolerance: self.tolerance };
                Some((l, r))
            }
            _ => None,
        }
    }

    pub fn center_description(&self) -> CenterDescription {
        match &self.kind {
            AlgebraKind::Matrix { .. } => CenterDescription::ScalarsOnly,
            AlgebraKind::Polynomial { .. } => CenterDescription::WholeAlgebra,
            AlgebraKind::Tensor { left, right } => {
                match (left.is_commutative(), right.is_commutative()) {
                    (true, true) => CenterDescription::WholeAlgebra,
                    (false, false) => CenterDescription::ScalarsOnly,
                    (true, false) => CenterDescription::LeftFactorCentral,
                    (false, true) => CenterDescription::RightFactorCentral,
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum Payload {
    Matrix(DMatrix<C64>),
    Poly(Polynomial),
    /// Canonical finite sum of (left, right) pairs. Left factors are basis
    /// units of the left algebra (matrix units, or unit-coefficient
    /// monomials), kept sorted and merged so the representation is unique.
    Tensor(Vec<(AlgebraElement, AlgebraElement)>),
}

#[derive(Debug, Clone)]
pub struct AlgebraElement {
    algebra: AlgebraDescriptor,
    payload: Payload,
}

impl AlgebraElement {
    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn from_matrix(algebra: &AlgebraDescriptor, m: DMatrix<C64>) -> Result<Self> {
        match algebra.kind {
            AlgebraKind::Matrix { dim } if m.nrows() == dim && m.ncols() == dim => {
                Ok(AlgebraElement { algebra: algebra.clone(), payload: Payload::Matrix(m) })
            }
            AlgebraKind::Matrix { dim } => Err(Error::AlgebraMismatch(format!(
                "matrix payload is {}x{} but the algebra is {dim}x{dim}",
                m.nrows(),
                m.ncols()
            ))),
            _ => Err(Error::AlgebraMismatch("matrix payload in a non-matrix algebra".into())),
        }
    }

    pub fn from_poly(algebra: &AlgebraDescriptor, p: Polynomial) -> Result<Self> {
        match algebra.kind {
            AlgebraKind::Polynomial { pairs } if p.nvars() == 2 * pairs => {
                Ok(AlgebraElement { algebra: algebra.clone(), payload: Payload::Poly(p) })
            }
            AlgebraKind::Polynomial { pairs } => Err(Error::AlgebraMismatch(format!(
                "polynomial has {} coordinates but the algebra has {}",
                p.nvars(),
                2 * pairs
            ))),
            _ => Err(Error::AlgebraMismatch("polynomial payload in a non-polynomial algebra".into())),
        }
    }

    pub fn zero(algebra: &AlgebraDescriptor) -> Self {
        let payload = match &algebra.kind {
            AlgebraKind::Matrix { dim } => {
                Payload::Matrix(DMatrix::from_element(*dim, *dim, C64::new(0.0, 0.0)))
            }
            AlgebraKind::Polynomial { pairs } => Payload::Poly(Polynomial::zero(2 * pairs)),
            AlgebraKind::Tensor { .. } => Payload::Tensor(Vec::new()),
        };
        AlgebraElement { algebra: algebra.clone(), payload }
    }

    pub fn unit(algebra: &AlgebraDescriptor) -> Self {
        match &algebra.kind {
            AlgebraKind::Matrix { dim } => AlgebraElement {
                algebra: algebra.clone(),
                payload: Payload::Matrix(DMatrix::identity(*dim, *dim)),
            },
            AlgebraKind::Polynomial { pairs } => AlgebraElement {
                algebra: algebra.clone(),
                payload: Payload::Poly(Polynomial::one(2 * pairs)),
            },
            AlgebraKind::Tensor { .. } => {
                let (l, r) = algebra.tensor_factors().expect("tensor kind");
                AlgebraElement::tensor(&AlgebraElement::unit(&l), &AlgebraElement::unit(&r))
                    .expect("unit factors always match")
            }
        }
    }

    /// z times the unit element.
    pub fn scalar(algebra: &AlgebraDescriptor, z: C64) -> Self {
        AlgebraElement::unit(algebra).scale(z)
    }

    /// The q^j coordinate function (zero-based j) of a polynomial algebra.
    pub fn coordinate_q(algebra: &AlgebraDescriptor, j: usize) -> Result<Self> {
        let pairs = algebra
            .polynomial_pairs()
            .ok_or_else(|| Error::AlgebraMismatch("coordinates need a polynomial algebra".into()))?;
        if j >= pairs {
            return Err(Error::Unsupported(format!("q index {j} out of range")));
        }
        Self::from_poly(algebra, Polynomial::coordinate(2 * pairs, j))
    }

    /// The p_j coordinate function (zero-based j) of a polynomial algebra.
    pub fn coordinate_p(algebra: &AlgebraDescriptor, j: usize) -> Result<Self> {
        let pairs = algebra
            .polynomial_pairs()
            .ok_or_else(|| Error::AlgebraMismatch("coordinates need a polynomial algebra".into()))?;
        if j >= pairs {
            return Err(Error::Unsupported(format!("p index {j} out of range")));
        }
        Self::from_poly(algebra, Polynomial::coordinate(2 * pairs, pairs + j))
    }

    pub fn as_matrix(&self) -> Option<&DMatrix<C64>> {
        match &self.payload {
            Payload::Matrix(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_poly(&self) -> Option<&Polynomial> {
        match &self.payload {
            Payload::Poly(p) => Some(p),
            _ => None,
        }
    }

    pub fn tensor_pairs(&self) -> Option<&[(AlgebraElement, AlgebraElement)]> {
        match &self.payload {
            Payload::Tensor(pairs) => Some(pairs),
            _ => None,
        }
    }

    fn require_same(&self, other: &AlgebraElement, op: &str) -> Result<()> {
        if self.algebra.same_algebra(&other.algebra) {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch(format!("{op} on elements of different algebras")))
        }
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.require_same(other, "add")?;
        let payload = match (&self.payload, &other.payload) {
            (Payload::Matrix(a), Payload::Matrix(b)) => Payload::Matrix(a + b),
            (Payload::Poly(a), Payload::Poly(b)) => Payload::Poly(a.add(b)),
            (Payload::Tensor(a), Payload::Tensor(b)) => {
                let mut pairs = a.clone();
                pairs.extend(b.iter().cloned());
                Payload::Tensor(tensor::canonicalize(&self.algebra, pairs)?)
            }
            _ => unreachable!("payload kind always matches the descriptor"),
        };
        Ok(AlgebraElement { algebra: self.algebra.clone(), payload })
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, z: C64) -> AlgebraElement {
        let payload = match &self.payload {
            Payload::Matrix(m) => Payload::Matrix(m * z),
            Payload::Poly(p) => Payload::Poly(p.scale(z)),
            Payload::Tensor(pairs) => {
                if z == C64::new(0.0, 0.0) {
                    Payload::Tensor(Vec::new())
                } else {
                    Payload::Tensor(
                        pairs.iter().map(|(l, r)| (l.clone(), r.scale(z))).collect(),
                    )
                }
            }
        };
        AlgebraElement { algebra: self.algebra.clone(), payload }
    }

    pub fn mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.require_same(other, "mul")?;
        let payload = match (&self.payload, &other.payload) {
            (Payload::Matrix(a), Payload::Matrix(b)) => Payload::Matrix(a * b),
            (Payload::Poly(a), Payload::Poly(b)) => Payload::Poly(a.mul(b)),
            (Payload::Tensor(a), Payload::Tensor(b)) => {
                let mut pairs = Vec::with_capacity(a.len() * b.len());
                for (l1, r1) in a {
                    for (l2, r2) in b {
                        pairs.push((l1.mul(l2)?, r1.mul(r2)?));
                    }
                }
                Payload::Tensor(tensor::canonicalize(&self.algebra, pairs)?)
            }
            _ => unreachable!("payload kind always matches the descriptor"),
        };
        Ok(AlgebraElement { algebra: self.algebra.clone(), payload })
    }

    /// The involution: conjugate transpose, coefficient conjugation, or the
    /// factor-wise star on tensors.
    pub fn star(&self) -> AlgebraElement {
        let payload = match &self.payload {
            Payload::Matrix(m) => Payload::Matrix(m.adjoint()),
            Payload::Poly(p) => Payload::Poly(p.conjugate()),
            Payload::Tensor(pairs) => {
                let starred: Vec<_> =
                    pairs.iter().map(|(l, r)| (l.star(), r.star())).collect();
                Payload::Tensor(
                    tensor::canonicalize(&self.algebra, starred)
                        .expect("starred pairs stay in the same algebra"),
                )
            }
        };
        AlgebraElement { algebra: self.algebra.clone(), payload }
    }

    pub fn commutator(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn anticommutator(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    /// Element norm: Frobenius for matrices, max coefficient modulus for
    /// polynomials, flattened norm for tensors.
    pub fn norm(&self) -> f64 {
        match &self.payload {
            Payload::Matrix(m) => m.norm(),
            Payload::Poly(p) => p.max_coeff(),
            Payload::Tensor(_) => tensor::flattened_norm(self),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.norm() <= self.algebra.tolerance
    }

    pub fn approx_eq(&self, other: &AlgebraElement) -> bool {
        self.algebra.same_algebra(&other.algebra)
            && match self.sub(other) {
                Ok(d) => d.norm() <= self.algebra.tolerance,
                Err(_) => false,
            }
    }

    /// True when the element commutes with a spanning set of generators.
    pub fn is_central(&self) -> bool {
        let tol = self.algebra.tolerance;
        spanning_generators(&self.algebra)
            .iter()
            .all(|g| self.commutator(g).map(|c| c.norm() <= tol).unwrap_or(false))
    }

    /// True when the element is Hermitian to within the algebra tolerance.
    pub fn is_hermitian(&self) -> bool {
        self.sub(&self.star()).map(|d| d.norm() <= self.algebra.tolerance).unwrap_or(false)
    }

    /// Subtract the central part; for matrix backends this removes the
    /// trace component, making inner-derivation generators canonical.
    pub fn center_reduce(&self) -> AlgebraElement {
        match (&self.algebra.kind, &self.payload) {
            (AlgebraKind::Matrix { dim }, Payload::Matrix(m)) => {
                let shift = m.trace() / C64::new(*dim as f64, 0.0);
                let reduced = m - DMatrix::identity(*dim, *dim) * shift;
                AlgebraElement { algebra: self.algebra.clone(), payload: Payload::Matrix(reduced) }
            }
            (AlgebraKind::Polynomial { .. }, _) => AlgebraElement::zero(&self.algebra),
            (AlgebraKind::Tensor { .. }, Payload::Tensor(pairs)) => {
                let reduced: Vec<_> = pairs
                    .iter()
                    .map(|(l, r)| (l.center_reduce_factor(), r.center_reduce_factor(), l, r))
                    .map(|(lc, rc, l, r)| {
                        // subtract l_central ⊗ r_central: keep l⊗r - lc⊗rc
                        // expressed as (l-lc)⊗r + lc⊗(r-rc)
                        vec![(l.sub(&lc).unwrap(), r.clone()), (lc, r.sub(&rc).unwrap())]
                    })
                    .flatten()
                    .collect();
                let payload = Payload::Tensor(
                    tensor::canonicalize(&self.algebra, reduced).expect("same algebra"),
                );
                AlgebraElement { algebra: self.algebra.clone(), payload }
            }
            _ => unreachable!(),
        }
    }

    /// The central part of a factor element (trace component for matrices,
    /// the element itself for polynomials).
    fn center_reduce_factor(&self) -> AlgebraElement {
        match (&self.algebra.kind, &self.payload) {
            (AlgebraKind::Matrix { dim }, Payload::Matrix(m)) => {
                let shift = m.trace() / C64::new(*dim as f64, 0.0);
                AlgebraElement::scalar(&self.algebra, shift)
            }
            (AlgebraKind::Polynomial { .. }, _) => self.clone(),
            _ => unreachable!("tensor factors are leaf algebras"),
        }
    }

    /// Canonical tensor product element a ⊗ b.
    pub fn tensor(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        let algebra = AlgebraDescriptor::tensor(a.algebra.clone(), b.algebra.clone())?;
        let pairs = tensor::canonicalize(&algebra, vec![(a.clone(), b.clone())])?;
        Ok(AlgebraElement { algebra, payload: Payload::Tensor(pairs) })
    }

    /// Tensor element with an explicit target descriptor (for tolerance
    /// propagation); factors must match the descriptor.
    pub fn tensor_into(
        algebra: &AlgebraDescriptor,
        a: &AlgebraElement,
        b: &AlgebraElement,
    ) -> Result<AlgebraElement> {
        let (l, r) = algebra
            .tensor_factors()
            .ok_or_else(|| Error::AlgebraMismatch("tensor_into needs a tensor algebra".into()))?;
        if !l.same_algebra(&a.algebra) || !r.same_algebra(&b.algebra) {
            return Err(Error::AlgebraMismatch("tensor factors do not match the descriptor".into()));
        }
        let pairs = tensor::canonicalize(algebra, vec![(a.clone(), b.clone())])?;
        Ok(AlgebraElement { algebra: algebra.clone(), payload: Payload::Tensor(pairs) })
    }

    pub(crate) fn from_tensor_pairs(
        algebra: &AlgebraDescriptor,
        pairs: Vec<(AlgebraElement, AlgebraElement)>,
    ) -> Result<AlgebraElement> {
        let pairs = tensor::canonicalize(algebra, pairs)?;
        Ok(AlgebraElement { algebra: algebra.clone(), payload: Payload::Tensor(pairs) })
    }

    /// A ⊗ I embedding into a tensor algebra.
    pub fn embed_left(algebra: &AlgebraDescriptor, a: &AlgebraElement) -> Result<AlgebraElement> {
        let (_, r) = algebra
            .tensor_factors()
            .ok_or_else(|| Error::AlgebraMismatch("embed_left needs a tensor algebra".into()))?;
        AlgebraElement::tensor_into(algebra, a, &AlgebraElement::unit(&r))
    }

    /// I ⊗ B embedding into a tensor algebra.
    pub fn embed_right(algebra: &AlgebraDescriptor, b: &AlgebraElement) -> Result<AlgebraElement> {
        let (l, _) = algebra
            .tensor_factors()
            .ok_or_else(|| Error::AlgebraMismatch("embed_right needs a tensor algebra".into()))?;
        AlgebraElement::tensor_into(algebra, &AlgebraElement::unit(&l), b)
    }

    /// Hermitian inner product of the flattened representations; used for
    /// scalar least-squares fits.
    pub fn inner(&self, other: &AlgebraElement) -> Result<C64> {
        self.require_same(other, "inner")?;
        match (&self.payload, &other.payload) {
            (Payload::Matrix(a), Payload::Matrix(b)) => {
                Ok((a.adjoint() * b).trace())
            }
            (Payload::Poly(a), Payload::Poly(b)) => {
                let mut acc = C64::new(0.0, 0.0);
                for (e, c) in a.terms() {
                    acc += c.conj() * b.coeff(e);
                }
                Ok(acc)
            }
            (Payload::Tensor(a), Payload::Tensor(b)) => {
                let mut acc = C64::new(0.0, 0.0);
                let mut j = 0usize;
                for (la, ra) in a {
                    while j < b.len() && tensor::left_key(&b[j].0) < tensor::left_key(la) {
                        j += 1;
                    }
                    if j < b.len() && tensor::left_key(&b[j].0) == tensor::left_key(la) {
                        acc += ra.inner(&b[j].1)?;
                    }
                }
                Ok(acc)
            }
            _ => unreachable!(),
        }
    }
}

/// A finite spanning set of generators, used for centrality checks and
/// Leibniz sampling.
pub fn spanning_generators(algebra: &AlgebraDescriptor) -> Vec<AlgebraElement> {
    match &algebra.kind {
        AlgebraKind::Matrix { dim } => {
            let mut out = Vec::with_capacity(dim * dim);
            for i in 0..*dim {
                for j in 0..*dim {
                    let m = matrices::matrix_unit(*dim, i, j);
                    out.push(AlgebraElement::from_matrix(algebra, m).expect("unit fits"));
                }
            }
            out
        }
        AlgebraKind::Polynomial { pairs } => {
            let mut out = vec![AlgebraElement::unit(algebra)];
            for a in 0..2 * pairs {
                let p = Polynomial::coordinate(2 * pairs, a);
                out.push(AlgebraElement::from_poly(algebra, p).expect("coordinate fits"));
            }
            out
        }
        AlgebraKind::Tensor { .. } => {
            let (l, r) = algebra.tensor_factors().expect("tensor kind");
            let mut out = Vec::new();
            for g in spanning_generators(&l) {
                out.push(AlgebraElement::embed_left(algebra, &g).expect("embed"));
            }
            for g in spanning_generators(&r) {
                out.push(AlgebraElement::embed_right(algebra, &g).expect("embed"));
            }
            out
        }
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            Payload::Matrix(m) => write!(f, "{:.6}", m),
            Payload::Poly(p) => write!(f, "{}", p),
            Payload::Tensor(pairs) => {
                if pairs.is_empty() {
                    return write!(f, "0");
                }
                for (k, (l, r)) in pairs.iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "[{l}] ⊗ [{r}]")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use matrices::{ci, cone, pauli};

    fn mat2() -> AlgebraDescriptor {
        AlgebraDescriptor::matrix(2).unwrap()
    }

    fn poly1() -> AlgebraDescriptor {
        AlgebraDescriptor::polynomial(1).unwrap()
    }

    fn elem(m: &DMatrix<C64>) -> AlgebraElement {
        AlgebraElement::from_matrix(&mat2(), m.clone()).unwrap()
    }

    // Reference 2x2 complex multiply, independent of the nalgebra path.
    fn mul_ref(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::from_element(2, 2, C64::new(0.0, 0.0));
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out[(i, j)] += a[(i, k)] * b[(k, j)];
                }
            }
        }
        out
    }

    #[test]
    fn pauli_product_matches_oracle() {
        let [sx, sy, sz] = pauli();
        // mul(σx, σy) = i σz, expected value frozen from the reference multiply
        let expect = mul_ref(&sx, &sy);
        assert!((&expect - &sz * ci()).norm() < 1e-15);
        let got = elem(&sx).mul(&elem(&sy)).unwrap();
        assert!(got.approx_eq(&elem(&expect)));
    }

    #[test]
    fn unit_acts_as_identity() {
        let [sx, _, _] = pauli();
        let a = elem(&sx);
        let one = AlgebraElement::unit(&mat2());
        assert!(one.mul(&a).unwrap().approx_eq(&a));
        assert!(a.mul(&one).unwrap().approx_eq(&a));
    }

    #[test]
    fn star_is_antilinear_involution() {
        let [_, _, sz] = pauli();
        // star(i σz) = -i σz since σz is Hermitian
        let a = elem(&sz).scale(ci());
        assert!(a.star().approx_eq(&elem(&sz).scale(-ci())));
        assert!(a.star().star().approx_eq(&a));
    }

    #[test]
    fn star_conjugates_polynomial_coefficients() {
        let alg = poly1();
        let q = AlgebraElement::coordinate_q(&alg, 0).unwrap();
        let a = q.scale(C64::new(1.0, 2.0));
        let expect = q.scale(C64::new(1.0, -2.0));
        assert!(a.star().approx_eq(&expect));
    }

    #[test]
    fn commutator_values() {
        let [sx, sy, sz] = pauli();
        // [σx, σy] = 2i σz by the reference multiply
        let expect = mul_ref(&sx, &sy) - mul_ref(&sy, &sx);
        assert!((&expect - &sz * C64::new(0.0, 2.0)).norm() < 1e-15);
        let got = elem(&sx).commutator(&elem(&sy)).unwrap();
        assert!(got.approx_eq(&elem(&expect)));
        // [a, a] = 0
        assert!(elem(&sx).commutator(&elem(&sx)).unwrap().is_zero());
        // polynomial algebras commute
        let alg = poly1();
        let q = AlgebraElement::coordinate_q(&alg, 0).unwrap();
        let p = AlgebraElement::coordinate_p(&alg, 0).unwrap();
        assert_eq!(q.commutator(&p).unwrap().norm(), 0.0);
    }

    #[test]
    fn mismatched_algebras_error() {
        let a = AlgebraElement::unit(&mat2());
        let b = AlgebraElement::unit(&AlgebraDescriptor::matrix(3).unwrap());
        assert!(matches!(a.add(&b), Err(Error::AlgebraMismatch(_))));
        assert!(matches!(a.mul(&b), Err(Error::AlgebraMismatch(_))));
    }

    #[test]
    fn centrality() {
        let [sx, _, sz] = pauli();
        let scalar = AlgebraElement::scalar(&mat2(), C64::new(3.7, 0.0));
        assert!(scalar.is_central());
        assert!(!elem(&sz).is_central());
        // witnessed by the reference multiply: [σz, σx] ≠ 0
        assert!((mul_ref(&sz, &sx) - mul_ref(&sx, &sz)).norm() > 1.0);
        assert_eq!(mat2().center_description(), CenterDescription::ScalarsOnly);
        assert_eq!(
            AlgebraDescriptor::matrix(3).unwrap().center_description(),
            CenterDescription::ScalarsOnly
        );
        assert_eq!(poly1().center_description(), CenterDescription::WholeAlgebra);
        let mixed =
            AlgebraDescriptor::tensor(poly1(), mat2()).unwrap().center_description();
        assert_eq!(mixed, CenterDescription::LeftFactorCentral);
    }

    #[test]
    fn hermitian_checks() {
        let [sx, _, _] = pauli();
        assert!(elem(&sx).is_hermitian());
        assert!(!elem(&sx).scale(ci()).is_hermitian());
        let alg = poly1();
        let q = AlgebraElement::coordinate_q(&alg, 0).unwrap();
        let p = AlgebraElement::coordinate_p(&alg, 0).unwrap();
        let f = q.add(&p.mul(&p).unwrap()).unwrap();
        assert!(f.is_hermitian());
    }

    #[test]
    fn tensor_unit_and_zero() {
        let alg = AlgebraDescriptor::tensor(mat2(), mat2()).unwrap();
        let one = AlgebraElement::unit(&alg);
        let [sx, _, _] = pauli();
        let a = AlgebraElement::tensor(&elem(&sx), &elem(&sx)).unwrap();
        assert!(one.mul(&a).unwrap().approx_eq(&a));
        let z = AlgebraElement::tensor(&AlgebraElement::zero(&mat2()), &elem(&sx)).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.tensor_pairs().unwrap().len(), 0);
    }

    #[test]
    fn star_antihomomorphism_on_products() {
        let [sx, sy, _] = pauli();
        let a = elem(&sx).scale(C64::new(0.3, 1.1));
        let b = elem(&sy).add(&AlgebraElement::unit(&mat2()).scale(cone())).unwrap();
        let lhs = a.mul(&b).unwrap().star();
        let rhs = b.star().mul(&a.star()).unwrap();
        assert!(lhs.approx_eq(&rhs));
    }
}
