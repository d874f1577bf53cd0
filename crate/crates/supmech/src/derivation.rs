//! Derivations of the system algebras, their Lie-algebra structure,
//! Z(A)-module bases with bracket tables, the derivation involution, and
//! push-forward along *-isomorphisms.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::algebra::{
    matrices, spanning_generators, AlgebraDescriptor, AlgebraElement, AlgebraKind, Polynomial,
};
use crate::error::{Error, Result};
use crate::morphism::AlgebraMorphism;
use crate::rng::{case_rng, random_element, uniform_complex};

/// Degree bound on vector-field components accepted from callers.
pub const COMPONENT_DEGREE_CAP: usize = 6;

#[derive(Debug, Clone)]
pub enum DerivationKind {
    /// D_g = [g, ·] with the generator stored modulo the center.
    Inner { generator: AlgebraElement },
    /// Σ v^a ∂/∂ξ^a on a polynomial algebra, one component per coordinate.
    VectorField { components: Vec<Polynomial> },
    /// X ⊗ id on a tensor algebra.
    EmbedLeft { inner: Box<Derivation> },
    /// id ⊗ Y on a tensor algebra.
    EmbedRight { inner: Box<Derivation> },
}

#[derive(Debug, Clone)]
pub struct Derivation {
    algebra: AlgebraDescriptor,
    kind: DerivationKind,
}

fn has_matrix_leaf(kind: &AlgebraKind) -> bool {
    match kind {
        AlgebraKind::Matrix { dim } => *dim >= 2,
        AlgebraKind::Polynomial { .. } => false,
        AlgebraKind::Tensor { left, right } => has_matrix_leaf(left) || has_matrix_leaf(right),
    }
}

impl Derivation {
    /// Inner derivation D_g. The generator is reduced modulo the center so
    /// the generator ↔ derivation map is injective.
    pub fn inner(generator: &AlgebraElement) -> Result<Self> {
        let algebra = generator.algebra().clone();
        if !has_matrix_leaf(algebra.kind()) {
            return Err(Error::NoInnerDerivations);
        }
        Ok(Derivation {
            algebra,
            kind: DerivationKind::Inner { generator: generator.center_reduce() },
        })
    }

    pub fn vector_field(algebra: &AlgebraDescriptor, components: Vec<Polynomial>) -> Result<Self> {
        for c in &components {
            if c.degree() > COMPONENT_DEGREE_CAP {
                return Err(Error::Unsupported(format!(
                    "vector-field component degree {} exceeds the cap {}",
                    c.degree(),
                    COMPONENT_DEGREE_CAP
                )));
            }
        }
        Self::vector_field_raw(algebra, components)
    }

    pub(crate) fn vector_field_raw(
        algebra: &AlgebraDescriptor,
        components: Vec<Polynomial>,
    ) -> Result<Self> {
        let pairs = algebra.polynomial_pairs().ok_or_else(|| {
            Error::AlgebraMismatch("vector fields live on polynomial algebras".into())
        })?;
        if components.len() != 2 * pairs {
            return Err(Error::AlgebraMismatch(format!(
                "expected {} components, got {}",
                2 * pairs,
                components.len()
            )));
        }
        if let Some(c) = components.iter().find(|c| c.nvars() != 2 * pairs) {
            return Err(Error::AlgebraMismatch(format!(
                "component has {} coordinates, algebra has {}",
                c.nvars(),
                2 * pairs
            )));
        }
        Ok(Derivation { algebra: algebra.clone(), kind: DerivationKind::VectorField { components } })
    }

    /// The coordinate derivation ∂/∂ξ^a (zero-based a).
    pub fn coordinate(algebra: &AlgebraDescriptor, a: usize) -> Result<Self> {
        let pairs = algebra.polynomial_pairs().ok_or_else(|| {
            Error::AlgebraMismatch("coordinate derivations live on polynomial algebras".into())
        })?;
        let n = 2 * pairs;
        if a >= n {
            return Err(Error::Unsupported(format!("coordinate index {a} out of range")));
        }
        let mut components = vec![Polynomial::zero(n); n];
        components[a] = Polynomial::one(n);
        Self::vector_field_raw(algebra, components)
    }

    pub fn zero(algebra: &AlgebraDescriptor) -> Self {
        match algebra.kind() {
            AlgebraKind::Matrix { .. } => Derivation {
                algebra: algebra.clone(),
                kind: DerivationKind::Inner { generator: AlgebraElement::zero(algebra) },
            },
            AlgebraKind::Polynomial { pairs } => {
                let n = 2 * pairs;
                Derivation {
                    algebra: algebra.clone(),
                    kind: DerivationKind::VectorField { components: vec![Polynomial::zero(n); n] },
                }
            }
            AlgebraKind::Tensor { .. } => {
                let (l, _) = algebra.tensor_factors().expect("tensor kind");
                Derivation {
                    algebra: algebra.clone(),
                    kind: DerivationKind::EmbedLeft { inner: Box::new(Derivation::zero(&l)) },
                }
            }
        }
    }

    /// X ⊗ id acting on the left factor of a tensor algebra.
    pub fn embed_left(tensor_algebra: &AlgebraDescriptor, x: Derivation) -> Result<Self> {
        let (l, _) = tensor_algebra
            .tensor_factors()
            .ok_or_else(|| Error::AlgebraMismatch("embed_left needs a tensor algebra".into()))?;
        if !x.algebra.same_algebra(&l) {
            return Err(Error::AlgebraMismatch("derivation not on the left factor".into()));
        }
        Ok(Derivation {
            algebra: tensor_algebra.clone(),
            kind: DerivationKind::EmbedLeft { inner: Box::new(x) },
        })
    }

    /// id ⊗ Y acting on the right factor of a tensor algebra.
    pub fn embed_right(tensor_algebra: &AlgebraDescriptor, y: Derivation) -> Result<Self> {
        let (_, r) = tensor_algebra
            .tensor_factors()
            .ok_or_else(|| Error::AlgebraMismatch("embed_right needs a tensor algebra".into()))?;
        if !y.algebra.same_algebra(&r) {
            return Err(Error::AlgebraMismatch("derivation not on the right factor".into()));
        }
        Ok(Derivation {
            algebra: tensor_algebra.clone(),
            kind: DerivationKind::EmbedRight { inner: Box::new(y) },
        })
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn kind(&self) -> &DerivationKind {
        &self.kind
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        if !a.algebra().same_algebra(&self.algebra) {
            return Err(Error::AlgebraMismatch("derivation applied outside its algebra".into()));
        }
        match &self.kind {
            DerivationKind::Inner { generator } => generator.commutator(a),
            DerivationKind::VectorField { components } => {
                let p = a.as_poly().expect("polynomial algebra");
                let mut acc = Polynomial::zero(p.nvars());
                for (b, comp) in components.iter().enumerate() {
                    if comp.is_zero() {
                        continue;
                    }
                    acc = acc.add(&comp.mul(&p.partial(b)));
                }
                AlgebraElement::from_poly(&self.algebra, acc)
            }
            DerivationKind::EmbedLeft { inner } => {
                let pairs = a.tensor_pairs().expect("tensor algebra");
                let mut mapped = Vec::with_capacity(pairs.len());
                for (l, r) in pairs {
                    mapped.push((inner.apply(l)?, r.clone()));
                }
                AlgebraElement::from_tensor_pairs(&self.algebra, mapped)
            }
            DerivationKind::EmbedRight { inner } => {
                let pairs = a.tensor_pairs().expect("tensor algebra");
                let mut mapped = Vec::with_capacity(pairs.len());
                for (l, r) in pairs {
                    mapped.push((l.clone(), inner.apply(r)?));
                }
                AlgebraElement::from_tensor_pairs(&self.algebra, mapped)
            }
        }
    }

    pub fn scale(&self, z: C64) -> Derivation {
        let kind = match &self.kind {
            DerivationKind::Inner { generator } => {
                DerivationKind::Inner { generator: generator.scale(z) }
            }
            DerivationKind::VectorField { components } => DerivationKind::VectorField {
                components: components.iter().map(|c| c.scale(z)).collect(),
            },
            DerivationKind::EmbedLeft { inner } => {
                DerivationKind::EmbedLeft { inner: Box::new(inner.scale(z)) }
            }
            DerivationKind::EmbedRight { inner } => {
                DerivationKind::EmbedRight { inner: Box::new(inner.scale(z)) }
            }
        };
        Derivation { algebra: self.algebra.clone(), kind }
    }

    pub fn add(&self, other: &Derivation) -> Result<Derivation> {
        if !self.algebra.same_algebra(&other.algebra) {
            return Err(Error::AlgebraMismatch("adding derivations of different algebras".into()));
        }
        let kind = match (&self.kind, &other.kind) {
            (DerivationKind::Inner { generator: g }, DerivationKind::Inner { generator: h }) => {
                DerivationKind::Inner { generator: g.add(h)? }
            }
            (
                DerivationKind::VectorField { components: u },
                DerivationKind::VectorField { components: v },
            ) => DerivationKind::VectorField {
                components: u.iter().zip(v).map(|(a, b)| a.add(b)).collect(),
            },
            (DerivationKind::EmbedLeft { inner: a }, DerivationKind::EmbedLeft { inner: b }) => {
                DerivationKind::EmbedLeft { inner: Box::new(a.add(b)?) }
            }
            (DerivationKind::EmbedRight { inner: a }, DerivationKind::EmbedRight { inner: b }) => {
                DerivationKind::EmbedRight { inner: Box::new(a.add(b)?) }
            }
            _ => {
                return Err(Error::Unsupported(
                    "adding derivations of mixed embedding kinds".into(),
                ))
            }
        };
        Ok(Derivation { algebra: self.algebra.clone(), kind })
    }

    /// Whether the derivation is numerically the zero map.
    pub fn is_zero(&self) -> bool {
        let tol = self.algebra.tolerance();
        match &self.kind {
            DerivationKind::Inner { generator } => generator.norm() <= tol,
            DerivationKind::VectorField { components } => {
                components.iter().all(|c| c.max_coeff() <= tol)
            }
            DerivationKind::EmbedLeft { inner } | DerivationKind::EmbedRight { inner } => {
                inner.is_zero()
            }
        }
    }

    pub fn approx_eq(&self, other: &Derivation) -> bool {
        if !self.algebra.same_algebra(&other.algebra) {
            return false;
        }
        let tol = self.algebra.tolerance();
        match (&self.kind, &other.kind) {
            (DerivationKind::Inner { generator: g }, DerivationKind::Inner { generator: h }) => {
                g.sub(h).map(|d| d.norm() <= tol).unwrap_or(false)
            }
            (
                DerivationKind::VectorField { components: u },
                DerivationKind::VectorField { components: v },
            ) => u.iter().zip(v).all(|(a, b)| a.sub(b).max_coeff() <= tol),
            (DerivationKind::EmbedLeft { inner: a }, DerivationKind::EmbedLeft { inner: b })
            | (DerivationKind::EmbedRight { inner: a }, DerivationKind::EmbedRight { inner: b }) => {
                a.approx_eq(b)
            }
            _ => false,
        }
    }

    /// For an embedded inner derivation on a tensor algebra, the equivalent
    /// inner derivation with an embedded generator.
    fn promote_to_inner(&self) -> Option<Derivation> {
        match &self.kind {
            DerivationKind::Inner { .. } => Some(self.clone()),
            DerivationKind::EmbedLeft { inner } => match &inner.kind {
                DerivationKind::Inner { generator } => {
                    let g = AlgebraElement::embed_left(&self.algebra, generator).ok()?;
                    Some(Derivation {
                        algebra: self.algebra.clone(),
                        kind: DerivationKind::Inner { generator: g.center_reduce() },
                    })
                }
                _ => None,
            },
            DerivationKind::EmbedRight { inner } => match &inner.kind {
                DerivationKind::Inner { generator } => {
                    let g = AlgebraElement::embed_right(&self.algebra, generator).ok()?;
                    Some(Derivation {
                        algebra: self.algebra.clone(),
                        kind: DerivationKind::Inner { generator: g.center_reduce() },
                    })
                }
                _ => None,
            },
            DerivationKind::VectorField { .. } => None,
        }
    }

    /// Lie bracket [X, Y] = X∘Y − Y∘X.
    pub fn lie_bracket(&self, other: &Derivation) -> Result<Derivation> {
        if !self.algebra.same_algebra(&other.algebra) {
            return Err(Error::AlgebraMismatch("bracket of derivations on different algebras".into()));
        }
        match (&self.kind, &other.kind) {
            (DerivationKind::Inner { generator: g }, DerivationKind::Inner { generator: h }) => {
                Ok(Derivation {
                    algebra: self.algebra.clone(),
                    kind: DerivationKind::Inner { generator: g.commutator(h)?.center_reduce() },
                })
            }
            (
                DerivationKind::VectorField { components: u },
                DerivationKind::VectorField { .. },
            ) => {
                let mut components = Vec::with_capacity(u.len());
                let n = u.len();
                for b in 0..n {
                    let coord = AlgebraElement::from_poly(
                        &self.algebra,
                        Polynomial::coordinate(n, b),
                    )?;
                    // [X,Y](ξ^b) = X(Y(ξ^b)) − Y(X(ξ^b))
                    let xy = self.apply(&other.apply(&coord)?)?;
                    let yx = other.apply(&self.apply(&coord)?)?;
                    components.push(xy.sub(&yx)?.as_poly().expect("polynomial").clone());
                }
                Self::vector_field_raw(&self.algebra, components)
            }
            (DerivationKind::EmbedLeft { inner: a }, DerivationKind::EmbedLeft { inner: b }) => {
                Derivation::embed_left(&self.algebra, a.lie_bracket(b)?)
            }
            (DerivationKind::EmbedRight { inner: a }, DerivationKind::EmbedRight { inner: b }) => {
                Derivation::embed_right(&self.algebra, a.lie_bracket(b)?)
            }
            (DerivationKind::EmbedLeft { .. }, DerivationKind::EmbedRight { .. })
            | (DerivationKind::EmbedRight { .. }, DerivationKind::EmbedLeft { .. }) => {
                Ok(Derivation::zero(&self.algebra))
            }
            _ => {
                // mixed inner/embedded pairs on tensor algebras
                let a = self.promote_to_inner();
                let b = other.promote_to_inner();
                match (a, b) {
                    (Some(x), Some(y)) => x.lie_bracket(&y),
                    _ => Err(Error::Unsupported(
                        "bracket of incompatible derivation kinds".into(),
                    )),
                }
            }
        }
    }

    /// The derivation involution X*(A) = [X(A*)]*.
    pub fn star(&self) -> Derivation {
        let kind = match &self.kind {
            DerivationKind::Inner { generator } => {
                // (D_g)* = −D_{g*}
                DerivationKind::Inner { generator: generator.star().scale(C64::new(-1.0, 0.0)) }
            }
            DerivationKind::VectorField { components } => DerivationKind::VectorField {
                components: components.iter().map(|c| c.conjugate()).collect(),
            },
            DerivationKind::EmbedLeft { inner } => {
                DerivationKind::EmbedLeft { inner: Box::new(inner.star()) }
            }
            DerivationKind::EmbedRight { inner } => {
                DerivationKind::EmbedRight { inner: Box::new(inner.star()) }
            }
        };
        Derivation { algebra: self.algebra.clone(), kind }
    }
}

/// Push-forward (Φ_*X)(B) = Φ(X[Φ⁻¹(B)]) along a *-isomorphism.
pub fn push_forward(phi: &AlgebraMorphism, x: &Derivation) -> Result<Derivation> {
    if !x.algebra().same_algebra(phi.source()) {
        return Err(Error::AlgebraMismatch("derivation not on the morphism source".into()));
    }
    match &x.kind {
        DerivationKind::Inner { generator } => Derivation::inner(&phi.apply(generator)?),
        DerivationKind::VectorField { .. } => {
            let pairs = phi
                .target()
                .polynomial_pairs()
                .ok_or_else(|| Error::NotIsomorphism("target is not a polynomial algebra".into()))?;
            let n = 2 * pairs;
            let mut components = Vec::with_capacity(n);
            for b in 0..n {
                let coord =
                    AlgebraElement::from_poly(phi.target(), Polynomial::coordinate(n, b))?;
                let moved = phi.apply(&x.apply(&phi.apply_inverse(&coord)?)?)?;
                components.push(moved.as_poly().expect("polynomial").clone());
            }
            Derivation::vector_field_raw(phi.target(), components)
        }
        _ => Err(Error::Unsupported("push-forward of embedded tensor derivations".into())),
    }
}

/// Outcome of the Leibniz-rule check on a linear map.
#[derive(Debug, Clone)]
pub enum DerivationCheck {
    IsDerivation,
    LeibnizViolation { left: AlgebraElement, right: AlgebraElement, residual: f64 },
}

impl DerivationCheck {
    pub fn is_derivation(&self) -> bool {
        matches!(self, DerivationCheck::IsDerivation)
    }
}

/// Deterministic sample of element pairs spanning products of basis
/// elements, topped up with random degree-≤2 products to at least 50 pairs.
fn leibniz_sample(
    algebra: &AlgebraDescriptor,
    seed: u64,
) -> Vec<(AlgebraElement, AlgebraElement)> {
    let gens = spanning_generators(algebra);
    let mut pairs = Vec::new();
    for a in &gens {
        for b in &gens {
            pairs.push((a.clone(), b.clone()));
        }
    }
    let mut rng = case_rng(seed, "leibniz-sample");
    let extra = 20usize.max(50usize.saturating_sub(pairs.len()));
    for _ in 0..extra {
        let a = random_element(&mut rng, algebra, 2);
        let b = random_element(&mut rng, algebra, 2);
        pairs.push((a, b));
    }
    pairs
}

/// Check the Leibniz rule for an arbitrary linear map given by its action.
///
/// Linearity itself is a precondition and is spot-checked first; a linearity
/// failure is reported as an error, a Leibniz failure as a result.
pub fn check_derivation<F>(
    algebra: &AlgebraDescriptor,
    map: F,
    seed: u64,
) -> Result<DerivationCheck>
where
    F: Fn(&AlgebraElement) -> Result<AlgebraElement>,
{
    let tol = algebra.tolerance();
    let mut rng = case_rng(seed, "linearity-sample");
    for _ in 0..5 {
        let a = random_element(&mut rng, algebra, 2);
        let b = random_element(&mut rng, algebra, 2);
        let alpha = uniform_complex(&mut rng);
        let beta = uniform_complex(&mut rng);
        let combo = a.scale(alpha).add(&b.scale(beta))?;
        let lhs = map(&combo)?;
        let rhs = map(&a)?.scale(alpha).add(&map(&b)?.scale(beta))?;
        let scale = 1.0f64.max(lhs.norm()).max(rhs.norm());
        if lhs.sub(&rhs)?.norm() > tol * scale * 1e2 {
            return Err(Error::Unsupported("map is not linear".into()));
        }
    }

    let mut worst: Option<(AlgebraElement, AlgebraElement, f64)> = None;
    for (a, b) in leibniz_sample(algebra, seed) {
        let ab = a.mul(&b)?;
        let lhs = map(&ab)?;
        let rhs = map(&a)?.mul(&b)?.add(&a.mul(&map(&b)?)?)?;
        let scale = 1.0f64.max(a.norm() * b.norm());
        let residual = lhs.sub(&rhs)?.norm() / scale;
        if residual > worst.as_ref().map(|w| w.2).unwrap_or(0.0) {
            worst = Some((a, b, residual));
        }
    }
    match worst {
        Some((left, right, residual)) if residual > tol => {
            Ok(DerivationCheck::LeibnizViolation { left, right, residual })
        }
        _ => Ok(DerivationCheck::IsDerivation),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientDomain {
    ComplexScalars,
    CenterPolynomials,
}

#[derive(Debug)]
enum Expander {
    /// Least-squares expansion against stacked inner-derivation generators.
    InnerGenerators {
        flat: DMatrix<C64>,
        svd: nalgebra::SVD<C64, nalgebra::Dyn, nalgebra::Dyn>,
    },
    /// Vector-field components are the coefficients.
    Coordinates,
    /// Block expansion over the two embedded factor bases.
    Product { left: Arc<DerivationBasis>, right: Arc<DerivationBasis> },
}

/// An ordered Z(A)-module basis of derivations with its bracket table.
#[derive(Debug)]
pub struct DerivationBasis {
    algebra: AlgebraDescriptor,
    elements: Vec<Derivation>,
    domain: CoefficientDomain,
    expander: Expander,
    /// bracket[i][j] = expansion of [X_i, X_j] over the basis.
    bracket: Vec<Vec<Vec<(usize, AlgebraElement)>>>,
}

fn stack_generators(dim: usize, gens: &[AlgebraElement]) -> DMatrix<C64> {
    let mut flat = DMatrix::from_element(dim * dim, gens.len(), C64::new(0.0, 0.0));
    for (k, g) in gens.iter().enumerate() {
        let v = matrices::vectorize(g.as_matrix().expect("matrix generator"));
        for (r, val) in v.into_iter().enumerate() {
            flat[(r, k)] = val;
        }
    }
    flat
}

impl DerivationBasis {
    /// The standard basis: inner derivations of the Gell-Mann generators on
    /// matrix algebras, coordinate derivations on polynomial algebras, and
    /// the embedded union of factor bases on tensor algebras.
    pub fn standard(algebra: &AlgebraDescriptor) -> Result<Arc<Self>> {
        match algebra.kind() {
            AlgebraKind::Matrix { dim } => {
                let gens: Vec<AlgebraElement> = matrices::gell_mann(*dim)
                    .into_iter()
                    .map(|g| AlgebraElement::from_matrix(algebra, g).expect("generator fits"))
                    .collect();
                Self::from_inner_generators(algebra, gens, true)
            }
            AlgebraKind::Polynomial { pairs } => {
                let n = 2 * pairs;
                let elements: Vec<Derivation> = (0..n)
                    .map(|a| Derivation::coordinate(algebra, a).expect("coordinate"))
                    .collect();
                let bracket = vec![vec![Vec::new(); n]; n];
                Ok(Arc::new(DerivationBasis {
                    algebra: algebra.clone(),
                    elements,
                    domain: CoefficientDomain::CenterPolynomials,
                    expander: Expander::Coordinates,
                    bracket,
                }))
            }
            AlgebraKind::Tensor { .. } => {
                let (l, r) = algebra.tensor_factors().expect("tensor kind");
                let left = Self::standard(&l)?;
                let right = Self::standard(&r)?;
                Self::product(algebra, left, right)
            }
        }
    }

    /// Basis of inner derivations for an explicit generator list; checks
    /// closure under the Lie bracket.
    pub fn from_inner_generators(
        algebra: &AlgebraDescriptor,
        gens: Vec<AlgebraElement>,
        trusted_closure: bool,
    ) -> Result<Arc<Self>> {
        let dim = algebra
            .matrix_dim()
            .ok_or_else(|| Error::AlgebraMismatch("inner-generator bases need matrix algebras".into()))?;
        let gens: Vec<AlgebraElement> = gens.into_iter().map(|g| g.center_reduce()).collect();
        let m = gens.len();
        let flat = stack_generators(dim, &gens);
        let svd = flat.clone().svd(true, true);
        let elements: Vec<Derivation> =
            gens.iter().map(|g| Derivation::inner(g).expect("matrix algebra")).collect();

        let stub = DerivationBasis {
            algebra: algebra.clone(),
            elements,
            domain: CoefficientDomain::ComplexScalars,
            expander: Expander::InnerGenerators { flat, svd },
            bracket: Vec::new(),
        };

        let mut bracket = vec![vec![Vec::new(); m]; m];
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let comm = gens[i].commutator(&gens[j])?.center_reduce();
                match stub.expand_inner_generator(&comm) {
                    Ok(coeffs) => bracket[i][j] = coeffs,
                    Err(Error::NotInSpan { residual }) if !trusted_closure => {
                        return Err(Error::NotLieSubalgebra {
                            witness: format!(
                                "[X_{i}, X_{j}] leaves the span (residual {residual:.3e})"
                            ),
                        });
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        let mut basis = stub;
        basis.bracket = bracket;
        Ok(Arc::new(basis))
    }

    /// Product basis {X_i ⊗ id} ∪ {id ⊗ Y_j} over a tensor algebra.
    pub fn product(
        algebra: &AlgebraDescriptor,
        left: Arc<DerivationBasis>,
        right: Arc<DerivationBasis>,
    ) -> Result<Arc<Self>> {
        let (l, r) = algebra
            .tensor_factors()
            .ok_or_else(|| Error::AlgebraMismatch("product basis needs a tensor algebra".into()))?;
        if !left.algebra.same_algebra(&l) || !right.algebra.same_algebra(&r) {
            return Err(Error::BasisMismatch("factor bases do not match the tensor algebra".into()));
        }
        let ml = left.len();
        let mr = right.len();
        let mut elements = Vec::with_capacity(ml + mr);
        for x in &left.elements {
            elements.push(Derivation::embed_left(algebra, x.clone())?);
        }
        for y in &right.elements {
            elements.push(Derivation::embed_right(algebra, y.clone())?);
        }
        let mut bracket = vec![vec![Vec::new(); ml + mr]; ml + mr];
        for i in 0..ml {
            for j in 0..ml {
                bracket[i][j] = left.bracket[i][j]
                    .iter()
                    .map(|(k, c)| {
                        Ok((*k, AlgebraElement::embed_left(algebra, c)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
            }
        }
        for i in 0..mr {
            for j in 0..mr {
                bracket[ml + i][ml + j] = right.bracket[i][j]
                    .iter()
                    .map(|(k, c)| {
                        Ok((ml + *k, AlgebraElement::embed_right(algebra, c)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
            }
        }
        let domain = if matches!(left.domain, CoefficientDomain::CenterPolynomials)
            || matches!(right.domain, CoefficientDomain::CenterPolynomials)
        {
            CoefficientDomain::CenterPolynomials
        } else {
            CoefficientDomain::ComplexScalars
        };
        Ok(Arc::new(DerivationBasis {
            algebra: algebra.clone(),
            elements,
            domain,
            expander: Expander::Product { left, right },
            bracket,
        }))
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Derivation] {
        &self.elements
    }

    pub fn domain(&self) -> CoefficientDomain {
        self.domain
    }

    pub fn bracket_expansion(&self, i: usize, j: usize) -> &[(usize, AlgebraElement)] {
        &self.bracket[i][j]
    }

    /// Generators of an inner basis, if that is what this basis is.
    pub fn inner_generators(&self) -> Option<Vec<&AlgebraElement>> {
        self.elements
            .iter()
            .map(|d| match d.kind() {
                DerivationKind::Inner { generator } => Some(generator),
                _ => None,
            })
            .collect()
    }

    fn expand_inner_generator(&self, g: &AlgebraElement) -> Result<Vec<(usize, AlgebraElement)>> {
        let Expander::InnerGenerators { flat, svd } = &self.expander else {
            unreachable!("caller guarantees an inner-generator expander");
        };
        let gm = g.as_matrix().expect("matrix algebra");
        let rhs = DVector::from_vec(matrices::vectorize(gm));
        let gnorm = rhs.norm();
        if self.elements.is_empty() {
            return if gnorm <= self.algebra.tolerance() {
                Ok(Vec::new())
            } else {
                Err(Error::NotInSpan { residual: gnorm })
            };
        }
        let coeffs = svd
            .solve(&rhs, 1e-13)
            .map_err(|e| Error::Unsupported(format!("expansion solve failed: {e}")))?;
        let residual = (flat * &coeffs - &rhs).norm();
        if residual > self.algebra.tolerance() * gnorm.max(1.0) {
            return Err(Error::NotInSpan { residual });
        }
        let cutoff = 1e-13 * coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let mut out = Vec::new();
        for (k, c) in coeffs.iter().enumerate() {
            if c.norm() > cutoff {
                out.push((k, AlgebraElement::scalar(&self.algebra, *c)));
            }
        }
        Ok(out)
    }

    /// Expand a derivation over the basis with Z(A) coefficients.
    pub fn expand(&self, x: &Derivation) -> Result<Vec<(usize, AlgebraElement)>> {
        if !x.algebra().same_algebra(&self.algebra) {
            return Err(Error::AlgebraMismatch("derivation not on the basis algebra".into()));
        }
        match (&self.expander, x.kind()) {
            (Expander::InnerGenerators { .. }, DerivationKind::Inner { generator }) => {
                self.expand_inner_generator(generator)
            }
            (Expander::Coordinates, DerivationKind::VectorField { components }) => {
                let mut out = Vec::new();
                for (a, c) in components.iter().enumerate() {
                    if !c.is_zero() {
                        out.push((a, AlgebraElement::from_poly(&self.algebra, c.clone())?));
                    }
                }
                Ok(out)
            }
            (Expander::Product { left, .. }, DerivationKind::EmbedLeft { inner }) => {
                let coeffs = left.expand(inner)?;
                coeffs
                    .into_iter()
                    .map(|(k, c)| Ok((k, AlgebraElement::embed_left(&self.algebra, &c)?)))
                    .collect()
            }
            (Expander::Product { left, right }, DerivationKind::EmbedRight { inner }) => {
                let ml = left.len();
                let coeffs = right.expand(inner)?;
                coeffs
                    .into_iter()
                    .map(|(k, c)| Ok((ml + k, AlgebraElement::embed_right(&self.algebra, &c)?)))
                    .collect()
            }
            (Expander::Product { left, right }, DerivationKind::Inner { generator }) => {
                self.expand_tensor_inner(left, right, generator)
            }
            _ => Err(Error::NotInSpan { residual: f64::INFINITY }),
        }
    }

    /// Expansion of an inner derivation of a tensor algebra over the product
    /// basis. D_{c⊗r} with central c equals (c⊗I)·(id⊗D_r), and symmetrically;
    /// generators mixing two noncommutative factors are out of span.
    fn expand_tensor_inner(
        &self,
        left: &Arc<DerivationBasis>,
        right: &Arc<DerivationBasis>,
        generator: &AlgebraElement,
    ) -> Result<Vec<(usize, AlgebraElement)>> {
        let (l_alg, r_alg) = self.algebra.tensor_factors().expect("tensor algebra");
        let tol = self.algebra.tolerance();
        let ml = left.len();
        let mut out: Vec<(usize, AlgebraElement)> = Vec::new();
        let push = |slot: usize, coeff: AlgebraElement, out: &mut Vec<(usize, AlgebraElement)>| {
            for (k, c) in out.iter_mut() {
                if *k == slot {
                    *c = c.add(&coeff).expect("same algebra");
                    return;
                }
            }
            out.push((slot, coeff));
        };
        for (l, r) in generator.tensor_pairs().expect("tensor payload") {
            let l_central = l_alg.is_commutative();
            let r_central = r_alg.is_commutative();
            if l_central && r_central {
                continue; // fully central, zero derivation
            }
            if l_central {
                // D_{l⊗r} = (l⊗I)·(id⊗D_r)
                let d = Derivation::inner(r)?;
                if d.is_zero() {
                    continue;
                }
                let base = AlgebraElement::embed_left(&self.algebra, l)?;
                for (k, c) in right.expand(&d)? {
                    let coeff = base.mul(&AlgebraElement::embed_right(&self.algebra, &c)?)?;
                    push(ml + k, coeff, &mut out);
                }
            } else if r_central {
                let d = Derivation::inner(l)?;
                if d.is_zero() {
                    continue;
                }
                let base = AlgebraElement::embed_right(&self.algebra, r)?;
                for (k, c) in left.expand(&d)? {
                    let coeff = base.mul(&AlgebraElement::embed_left(&self.algebra, &c)?)?;
                    push(k, coeff, &mut out);
                }
            } else {
                // matrix ⊗ matrix: split g = gL⊗I + I⊗gR if possible
                let (n, m) = (
                    l_alg.matrix_dim().expect("matrix factor"),
                    r_alg.matrix_dim().expect("matrix factor"),
                );
                let term = AlgebraElement::tensor_into(&self.algebra, l, r)?;
                let flat = crate::algebra::tensor::flatten_mat_mat(&term)?;
                // partial traces
                let mut gl = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
                let mut gr = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
                for i in 0..n {
                    for j in 0..n {
                        let mut tr = C64::new(0.0, 0.0);
                        for k in 0..m {
                            tr += flat[(i * m + k, j * m + k)];
                        }
                        gl[(i, j)] = tr / C64::new(m as f64, 0.0);
                    }
                }
                for k in 0..m {
                    for p in 0..m {
                        let mut tr = C64::new(0.0, 0.0);
                        for i in 0..n {
                            tr += flat[(i * m + k, i * m + p)];
                        }
                        gr[(k, p)] = tr / C64::new(n as f64, 0.0);
                    }
                }
                let le = AlgebraElement::from_matrix(&l_alg, gl)?.center_reduce();
                let re = AlgebraElement::from_matrix(&r_alg, gr)?.center_reduce();
                let recon = AlgebraElement::embed_left(&self.algebra, &le)?
                    .add(&AlgebraElement::embed_right(&self.algebra, &re)?)?;
                let residual = term.center_reduce().sub(&recon)?.norm();
                if residual > tol.max(tol * term.norm()) {
                    return Err(Error::NotInSpan { residual });
                }
                if le.norm() > 0.0 {
                    for (k, c) in left.expand(&Derivation::inner(&le)?)? {
                        push(k, AlgebraElement::embed_left(&self.algebra, &c)?, &mut out);
                    }
                }
                if re.norm() > 0.0 {
                    for (k, c) in right.expand(&Derivation::inner(&re)?)? {
                        push(ml + k, AlgebraElement::embed_right(&self.algebra, &c)?, &mut out);
                    }
                }
            }
        }
        out.retain(|(_, c)| c.norm() > 0.0);
        Ok(out)
    }

    /// Assemble Σ c_a X_a back into a single derivation. Coefficients must
    /// be scalar for matrix bases and central polynomials for coordinate
    /// bases.
    pub fn assemble(&self, coeffs: &[(usize, AlgebraElement)]) -> Result<Derivation> {
        match &self.expander {
            Expander::InnerGenerators { .. } => {
                let mut gen = AlgebraElement::zero(&self.algebra);
                for (k, c) in coeffs {
                    let scalar = scalar_of(c)?;
                    if let DerivationKind::Inner { generator } = self.elements[*k].kind() {
                        gen = gen.add(&generator.scale(scalar))?;
                    }
                }
                Derivation::inner(&gen)
            }
            Expander::Coordinates => {
                let pairs = self.algebra.polynomial_pairs().expect("polynomial algebra");
                let n = 2 * pairs;
                let mut components = vec![Polynomial::zero(n); n];
                for (k, c) in coeffs {
                    components[*k] =
                        components[*k].add(c.as_poly().expect("polynomial coefficient"));
                }
                Derivation::vector_field_raw(&self.algebra, components)
            }
            Expander::Product { .. } => Err(Error::Unsupported(
                "assembling combinations over product bases".into(),
            )),
        }
    }

    /// Max residual of the Jacobi identity over all basis triples, computed
    /// from the bracket table.
    pub fn table_jacobi_residual(&self) -> f64 {
        let m = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                for k in (j + 1)..m {
                    let mut acc: Vec<AlgebraElement> = Vec::new();
                    let add_terms = |a: usize, b: usize, c: usize, acc: &mut Vec<AlgebraElement>| {
                        // [[X_a, X_b], X_c] via the table
                        for (l, w) in &self.bracket[a][b] {
                            for (s, w2) in &self.bracket[*l][c] {
                                let coeff = w.mul(w2).expect("central coefficients");
                                while acc.len() <= *s {
                                    acc.push(AlgebraElement::zero(&self.algebra));
                                }
                                acc[*s] = acc[*s].add(&coeff).expect("same algebra");
                            }
                        }
                    };
                    add_terms(i, j, k, &mut acc);
                    add_terms(j, k, i, &mut acc);
                    add_terms(k, i, j, &mut acc);
                    let r = acc.iter().map(|e| e.norm()).fold(0.0, f64::max);
                    worst = worst.max(r);
                }
            }
        }
        worst
    }

    /// Structural compatibility for binary form operations.
    pub fn compatible(&self, other: &DerivationBasis) -> bool {
        self.algebra.same_algebra(&other.algebra)
            && self.len() == other.len()
            && self
                .elements
                .iter()
                .zip(other.elements.iter())
                .all(|(a, b)| a.approx_eq(b))
    }
}

/// Extract the scalar z from an element z·I.
pub fn scalar_of(c: &AlgebraElement) -> Result<C64> {
    let unit = AlgebraElement::unit(c.algebra());
    let z = unit.inner(c)? / unit.inner(&unit)?;
    let residual = c.sub(&unit.scale(z))?.norm();
    if residual > c.algebra().tolerance().max(1e-12 * c.norm()) {
        return Err(Error::Unsupported("coefficient is not a scalar multiple of the unit".into()));
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::matrices::{ci, pauli};

    fn mat2() -> AlgebraDescriptor {
        AlgebraDescriptor::matrix(2).unwrap()
    }

    fn poly1() -> AlgebraDescriptor {
        AlgebraDescriptor::polynomial(1).unwrap()
    }

    fn elem(m: &DMatrix<C64>) -> AlgebraElement {
        AlgebraElement::from_matrix(&mat2(), m.clone()).unwrap()
    }

    #[test]
    fn inner_derivation_applies_commutator() {
        let [sx, sy, sz] = pauli();
        let d = Derivation::inner(&elem(&sz)).unwrap();
        // D_σz σx = [σz, σx] = 2i σy by direct multiplication
        let expect = elem(&(&sz * &sx - &sx * &sz));
        assert!(expect.approx_eq(&elem(&sy).scale(C64::new(0.0, 2.0))));
        assert!(d.apply(&elem(&sx)).unwrap().approx_eq(&expect));
        // self-commutator vanishes
        assert!(d.apply(&elem(&sz)).unwrap().is_zero());
        // unit is killed by every derivation
        assert!(d.apply(&AlgebraElement::unit(&mat2())).unwrap().is_zero());
    }

    #[test]
    fn inner_derivation_of_unit_is_zero() {
        let one = AlgebraElement::unit(&mat2());
        let d = Derivation::inner(&one).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn polynomial_algebras_reject_inner_derivations() {
        let q = AlgebraElement::coordinate_q(&poly1(), 0).unwrap();
        assert!(matches!(Derivation::inner(&q), Err(Error::NoInnerDerivations)));
    }

    #[test]
    fn coordinate_derivation_differentiates() {
        let alg = poly1();
        let q = AlgebraElement::coordinate_q(&alg, 0).unwrap();
        let p = AlgebraElement::coordinate_p(&alg, 0).unwrap();
        let f = q.mul(&q).unwrap().mul(&p).unwrap(); // q^2 p
        let dq = Derivation::coordinate(&alg, 0).unwrap();
        let expect = q.mul(&p).unwrap().scale(C64::new(2.0, 0.0));
        assert!(dq.apply(&f).unwrap().approx_eq(&expect));
    }

    #[test]
    fn brackets_of_inner_derivations() {
        let [sx, sy, sz] = pauli();
        let dx = Derivation::inner(&elem(&sx)).unwrap();
        let dy = Derivation::inner(&elem(&sy)).unwrap();
        // [D_σx, D_σy] = D_[σx,σy] = D_{2iσz}
        let expect = Derivation::inner(&elem(&sz).scale(C64::new(0.0, 2.0))).unwrap();
        assert!(dx.lie_bracket(&dy).unwrap().approx_eq(&expect));
        assert!(dx.lie_bracket(&dx).unwrap().is_zero());
    }

    #[test]
    fn coordinate_fields_commute() {
        let alg = poly1();
        let dq = Derivation::coordinate(&alg, 0).unwrap();
        let dp = Derivation::coordinate(&alg, 1).unwrap();
        assert!(dq.lie_bracket(&dp).unwrap().is_zero());
    }

    #[test]
    fn star_of_inner_and_field() {
        let [_, _, sz] = pauli();
        let d = Derivation::inner(&elem(&sz)).unwrap();
        // (D_A)* = −D_{A*}: σz Hermitian gives (D_σz)* = −D_σz
        assert!(d.star().approx_eq(&d.scale(C64::new(-1.0, 0.0))));
        let dq = Derivation::coordinate(&poly1(), 0).unwrap();
        assert!(dq.star().approx_eq(&dq));
        // involution squares to the identity
        let mut rng = case_rng(7, "star-involution");
        let g = crate::rng::random_element(&mut rng, &mat2(), 2);
        let x = Derivation::inner(&g).unwrap();
        assert!(x.star().star().approx_eq(&x));
    }

    #[test]
    fn involution_respects_brackets() {
        // [X,Y]* = [X*,Y*] on random inner derivations
        let mut rng = case_rng(11, "bracket-star");
        for _ in 0..20 {
            let x = Derivation::inner(&random_element(&mut rng, &mat2(), 2)).unwrap();
            let y = Derivation::inner(&random_element(&mut rng, &mat2(), 2)).unwrap();
            let lhs = x.lie_bracket(&y).unwrap().star();
            let rhs = x.star().lie_bracket(&y.star()).unwrap();
            assert!(lhs.approx_eq(&rhs));
        }
    }

    #[test]
    fn check_derivation_accepts_inner_and_rejects_left_multiplication() {
        let [sx, sy, sz] = pauli();
        let alg = mat2();
        let d = Derivation::inner(&elem(&sz)).unwrap();
        let check = check_derivation(&alg, |a| d.apply(a), 42).unwrap();
        assert!(check.is_derivation());

        // left multiplication by σz fails Leibniz; direct evaluation on
        // (σx, σy) witnesses it: σz σx σy ≠ σz σx σy + σx σz σy in general
        let mz = elem(&sz);
        let check = check_derivation(&alg, |a| mz.mul(a), 42).unwrap();
        match check {
            DerivationCheck::LeibnizViolation { residual, .. } => assert!(residual > 1e-3),
            _ => panic!("left multiplication must violate Leibniz"),
        }
        let lhs = mz.mul(&elem(&sx).mul(&elem(&sy)).unwrap()).unwrap();
        let rhs = mz
            .mul(&elem(&sx))
            .unwrap()
            .mul(&elem(&sy))
            .unwrap()
            .add(&elem(&sx).mul(&mz.mul(&elem(&sy)).unwrap()).unwrap())
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm() > 1.0);

        // the zero map is a derivation
        let zero = AlgebraElement::zero(&alg);
        let check = check_derivation(&alg, |_| Ok(zero.clone()), 42).unwrap();
        assert!(check.is_derivation());
    }

    #[test]
    fn standard_matrix_basis_has_scalar_table() {
        let basis = DerivationBasis::standard(&mat2()).unwrap();
        assert_eq!(basis.len(), 3);
        assert_eq!(basis.domain(), CoefficientDomain::ComplexScalars);
        // [X_0, X_1] = D_{[σx,σy]} = 2i D_σz
        let exp = basis.bracket_expansion(0, 1);
        assert_eq!(exp.len(), 1);
        assert_eq!(exp[0].0, 2);
        assert!((scalar_of(&exp[0].1).unwrap() - C64::new(0.0, 2.0)).norm() < 1e-12);
        assert!(basis.table_jacobi_residual() < 1e-12);
    }

    #[test]
    fn polynomial_basis_brackets_vanish() {
        let basis = DerivationBasis::standard(&poly1()).unwrap();
        assert_eq!(basis.len(), 2);
        assert!(basis.bracket_expansion(0, 1).is_empty());
        assert!(basis.table_jacobi_residual() == 0.0);
    }

    #[test]
    fn expansion_recovers_coefficients() {
        let [sx, sy, sz] = pauli();
        let basis = DerivationBasis::standard(&mat2()).unwrap();
        let g = elem(&sx).scale(C64::new(0.5, 0.0)).add(&elem(&sz).scale(ci())).unwrap();
        let d = Derivation::inner(&g).unwrap();
        let coeffs = basis.expand(&d).unwrap();
        let rebuilt = basis.assemble(&coeffs).unwrap();
        assert!(rebuilt.approx_eq(&d));
        // a vector field is out of reach of the matrix basis
        let dq = Derivation::coordinate(&poly1(), 0).unwrap();
        assert!(basis.expand(&dq).is_err());
        let _ = sy;
    }

    #[test]
    fn restricted_spin_generators_close_but_pairs_do_not() {
        let alg = AlgebraDescriptor::matrix(4).unwrap();
        let [s1, s2, s3] = matrices::spin_matrices(4);
        let gens: Vec<AlgebraElement> = [s1, s2, s3]
            .into_iter()
            .map(|m| AlgebraElement::from_matrix(&alg, m).unwrap())
            .collect();
        let basis =
            DerivationBasis::from_inner_generators(&alg, gens.clone(), false).unwrap();
        assert_eq!(basis.len(), 3);
        assert!(basis.table_jacobi_residual() < 1e-10);
        // {D_S1, D_S2} alone: [D_S1, D_S2] = D_{iS3} is outside the span
        let partial = vec![gens[0].clone(), gens[1].clone()];
        assert!(matches!(
            DerivationBasis::from_inner_generators(&alg, partial, false),
            Err(Error::NotLieSubalgebra { .. })
        ));
    }

    #[test]
    fn push_forward_of_inner_is_conjugated_generator() {
        let alg = mat2();
        let [sx, _, sz] = pauli();
        let u = matrices::hermitian_exp(&sz, C64::new(0.0, 0.31));
        let phi = AlgebraMorphism::unitary_conjugation(&alg, u).unwrap();
        let d = Derivation::inner(&elem(&sx)).unwrap();
        let pushed = push_forward(&phi, &d).unwrap();
        // (Φ_*D_A)(B) = [Φ(A), B] checked by direct evaluation on a basis
        for g in spanning_generators(&alg) {
            let lhs = pushed.apply(&g).unwrap();
            let rhs = phi.apply(&elem(&sx)).unwrap().commutator(&g).unwrap();
            assert!(lhs.approx_eq(&rhs));
        }
        // identity morphism acts trivially
        let id = AlgebraMorphism::identity(&alg).unwrap();
        assert!(push_forward(&id, &d).unwrap().approx_eq(&d));
    }

    #[test]
    fn push_forward_respects_brackets() {
        // Φ_*[X,Y] = [Φ_*X, Φ_*Y]
        let alg = mat2();
        let [sx, sy, _] = pauli();
        let u = matrices::hermitian_exp(&sy, C64::new(0.0, -0.6));
        let phi = AlgebraMorphism::unitary_conjugation(&alg, u).unwrap();
        let x = Derivation::inner(&elem(&sx)).unwrap();
        let y = Derivation::inner(&elem(&sy).scale(C64::new(0.4, 0.2))).unwrap();
        let lhs = push_forward(&phi, &x.lie_bracket(&y).unwrap()).unwrap();
        let rhs = push_forward(&phi, &x)
            .unwrap()
            .lie_bracket(&push_forward(&phi, &y).unwrap())
            .unwrap();
        assert!(lhs.approx_eq(&rhs));
    }

    #[test]
    fn infinitesimal_conjugation_generator_satisfies_leibniz() {
        // finite difference of Φ_t(A) = e^{itG} A e^{-itG} approximates a
        // derivation; the Leibniz defect scales with t
        let alg = mat2();
        let [sx, _, sz] = pauli();
        let t = 1e-7;
        let u = matrices::hermitian_exp(&sz, C64::new(0.0, t));
        let phi = AlgebraMorphism::unitary_conjugation(&alg, u).unwrap();
        let g = |a: &AlgebraElement| -> Result<AlgebraElement> {
            let moved = phi.apply(a)?;
            Ok(moved.sub(a)?.scale(C64::new(1.0 / t, 0.0)))
        };
        let a = elem(&sx);
        let b = elem(&sz).add(&AlgebraElement::unit(&alg)).unwrap();
        let lhs = g(&a.mul(&b).unwrap()).unwrap();
        let rhs = g(&a).unwrap().mul(&b).unwrap().add(&a.mul(&g(&b).unwrap()).unwrap()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm() < 1e-5);
    }
}
