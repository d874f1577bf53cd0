//! *-algebra isomorphisms: unitary conjugation on matrix algebras and
//! invertible real affine substitutions on polynomial coordinates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::algebra::{AlgebraDescriptor, AlgebraElement, Polynomial};
use crate::error::{Error, Result};

/// Invertible real affine coordinate map ξ ↦ Lξ + c.
#[derive(Debug, Clone)]
pub struct AffineMap {
    pub linear: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl AffineMap {
    fn substitution_images(&self, nvars: usize) -> Vec<Polynomial> {
        (0..nvars)
            .map(|a| {
                let mut img = Polynomial::constant(nvars, C64::new(self.offset[a], 0.0));
                for b in 0..nvars {
                    let w = self.linear[(a, b)];
                    if w != 0.0 {
                        img = img.add(
                            &Polynomial::coordinate(nvars, b).scale(C64::new(w, 0.0)),
                        );
                    }
                }
                img
            })
            .collect()
    }

    pub fn apply_point(&self, point: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(point);
        let y = &self.linear * x + &self.offset;
        y.as_slice().to_vec()
    }
}

#[derive(Debug, Clone)]
pub enum MorphismKind {
    UnitaryConjugation { u: DMatrix<C64> },
    PolynomialSubstitution { forward: AffineMap, inverse: AffineMap },
}

/// A *-algebra isomorphism with a cached inverse.
#[derive(Debug, Clone)]
pub struct AlgebraMorphism {
    source: AlgebraDescriptor,
    target: AlgebraDescriptor,
    kind: MorphismKind,
}

impl AlgebraMorphism {
    /// Conjugation A ↦ U A U* by a unitary matrix.
    pub fn unitary_conjugation(algebra: &AlgebraDescriptor, u: DMatrix<C64>) -> Result<Self> {
        let dim = algebra
            .matrix_dim()
            .ok_or_else(|| Error::NotIsomorphism("unitary conjugation needs a matrix algebra".into()))?;
        if u.nrows() != dim || u.ncols() != dim {
            return Err(Error::NotIsomorphism("unitary has the wrong shape".into()));
        }
        let defect = (&u * u.adjoint() - DMatrix::<C64>::identity(dim, dim)).norm();
        if defect > algebra.tolerance().max(1e-9) {
            return Err(Error::NotIsomorphism(format!(
                "matrix is not unitary (defect {defect:.3e})"
            )));
        }
        Ok(AlgebraMorphism {
            source: algebra.clone(),
            target: algebra.clone(),
            kind: MorphismKind::UnitaryConjugation { u },
        })
    }

    /// Substitution f ↦ f ∘ σ with σ(ξ) = Lξ + c invertible and real.
    pub fn polynomial_substitution(
        algebra: &AlgebraDescriptor,
        linear: DMatrix<f64>,
        offset: Vec<f64>,
    ) -> Result<Self> {
        let pairs = algebra.polynomial_pairs().ok_or_else(|| {
            Error::NotIsomorphism("coordinate substitution needs a polynomial algebra".into())
        })?;
        let n = 2 * pairs;
        if linear.nrows() != n || linear.ncols() != n || offset.len() != n {
            return Err(Error::NotIsomorphism("affine map has the wrong shape".into()));
        }
        let inv = linear.clone().try_inverse().ok_or_else(|| {
            Error::NotIsomorphism("affine coordinate map is not invertible".into())
        })?;
        let offset = DVector::from_vec(offset);
        let inv_offset = -(&inv * &offset);
        Ok(AlgebraMorphism {
            source: algebra.clone(),
            target: algebra.clone(),
            kind: MorphismKind::PolynomialSubstitution {
                forward: AffineMap { linear, offset },
                inverse: AffineMap { linear: inv, offset: inv_offset },
            },
        })
    }

    pub fn identity(algebra: &AlgebraDescriptor) -> Result<Self> {
        if let Some(dim) = algebra.matrix_dim() {
            return AlgebraMorphism::unitary_conjugation(algebra, DMatrix::identity(dim, dim));
        }
        if let Some(pairs) = algebra.polynomial_pairs() {
            let n = 2 * pairs;
            return AlgebraMorphism::polynomial_substitution(
                algebra,
                DMatrix::identity(n, n),
                vec![0.0; n],
            );
        }
        Err(Error::Unsupported("identity morphism on tensor algebras".into()))
    }

    pub fn source(&self) -> &AlgebraDescriptor {
        &self.source
    }

    pub fn target(&self) -> &AlgebraDescriptor {
        &self.target
    }

    pub fn kind(&self) -> &MorphismKind {
        &self.kind
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        if !a.algebra().same_algebra(&self.source) {
            return Err(Error::AlgebraMismatch("element not in the morphism source".into()));
        }
        match &self.kind {
            MorphismKind::UnitaryConjugation { u } => {
                let m = a.as_matrix().expect("matrix algebra");
                AlgebraElement::from_matrix(&self.target, u * m * u.adjoint())
            }
            MorphismKind::PolynomialSubstitution { forward, .. } => {
                let p = a.as_poly().expect("polynomial algebra");
                let images = forward.substitution_images(p.nvars());
                AlgebraElement::from_poly(&self.target, p.substitute(&images))
            }
        }
    }

    pub fn apply_inverse(&self, b: &AlgebraElement) -> Result<AlgebraElement> {
        if !b.algebra().same_algebra(&self.target) {
            return Err(Error::AlgebraMismatch("element not in the morphism target".into()));
        }
        match &self.kind {
            MorphismKind::UnitaryConjugation { u } => {
                let m = b.as_matrix().expect("matrix algebra");
                AlgebraElement::from_matrix(&self.source, u.adjoint() * m * u)
            }
            MorphismKind::PolynomialSubstitution { inverse, .. } => {
                let p = b.as_poly().expect("polynomial algebra");
                let images = inverse.substitution_images(p.nvars());
                AlgebraElement::from_poly(&self.source, p.substitute(&images))
            }
        }
    }

    /// self ∘ other (apply `other` first).
    pub fn compose(&self, other: &AlgebraMorphism) -> Result<AlgebraMorphism> {
        if !other.target.same_algebra(&self.source) {
            return Err(Error::AlgebraMismatch("morphism composition mismatch".into()));
        }
        match (&self.kind, &other.kind) {
            (
                MorphismKind::UnitaryConjugation { u: u1 },
                MorphismKind::UnitaryConjugation { u: u2 },
            ) => AlgebraMorphism::unitary_conjugation(&other.source, u1 * u2),
            (
                MorphismKind::PolynomialSubstitution { forward: f1, .. },
                MorphismKind::PolynomialSubstitution { forward: f2, .. },
            ) => {
                // (Φ1∘Φ2)(f) = f ∘ σ2 ∘ σ1
                let linear = &f2.linear * &f1.linear;
                let offset = &f2.linear * &f1.offset + &f2.offset;
                AlgebraMorphism::polynomial_substitution(
                    &other.source,
                    linear,
                    offset.as_slice().to_vec(),
                )
            }
            _ => Err(Error::AlgebraMismatch("cannot compose morphisms of different kinds".into())),
        }
    }

    pub fn is_endomorphism_of(&self, algebra: &AlgebraDescriptor) -> bool {
        self.source.same_algebra(algebra) && self.target.same_algebra(algebra)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::matrices::{hermitian_exp, pauli};

    #[test]
    fn unitary_conjugation_preserves_product_and_star() {
        let alg = AlgebraDescriptor::matrix(2).unwrap();
        let [sx, sy, sz] = pauli();
        let u = hermitian_exp(&sz, C64::new(0.0, 0.45));
        let phi = AlgebraMorphism::unitary_conjugation(&alg, u).unwrap();
        let a = AlgebraElement::from_matrix(&alg, sx).unwrap();
        let b = AlgebraElement::from_matrix(&alg, sy).unwrap();
        let lhs = phi.apply(&a.mul(&b).unwrap()).unwrap();
        let rhs = phi.apply(&a).unwrap().mul(&phi.apply(&b).unwrap()).unwrap();
        assert!(lhs.approx_eq(&rhs));
        let star_lhs = phi.apply(&a.star()).unwrap();
        assert!(star_lhs.approx_eq(&phi.apply(&a).unwrap().star()));
        let unit = AlgebraElement::unit(&alg);
        assert!(phi.apply(&unit).unwrap().approx_eq(&unit));
        // round trip
        assert!(phi.apply_inverse(&phi.apply(&a).unwrap()).unwrap().approx_eq(&a));
    }

    #[test]
    fn non_unitary_rejected() {
        let alg = AlgebraDescriptor::matrix(2).unwrap();
        let [_, _, sz] = pauli();
        // exp(0.3 σz) is invertible but not unitary
        let s = hermitian_exp(&sz, C64::new(0.3, 0.0));
        assert!(matches!(
            AlgebraMorphism::unitary_conjugation(&alg, s),
            Err(Error::NotIsomorphism(_))
        ));
    }

    #[test]
    fn substitution_round_trips() {
        let alg = AlgebraDescriptor::polynomial(1).unwrap();
        // rotation (q,p) -> (p,-q)
        let linear = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let phi = AlgebraMorphism::polynomial_substitution(&alg, linear, vec![0.0, 0.0]).unwrap();
        let q = AlgebraElement::coordinate_q(&alg, 0).unwrap();
        let p = AlgebraElement::coordinate_p(&alg, 0).unwrap();
        assert!(phi.apply(&q).unwrap().approx_eq(&p));
        assert!(phi.apply(&p).unwrap().approx_eq(&q.scale(C64::new(-1.0, 0.0))));
        let f = q.mul(&q).unwrap().add(&p).unwrap();
        assert!(phi.apply_inverse(&phi.apply(&f).unwrap()).unwrap().approx_eq(&f));
        // multiplicativity
        let g = p.mul(&p).unwrap();
        let lhs = phi.apply(&f.mul(&g).unwrap()).unwrap();
        let rhs = phi.apply(&f).unwrap().mul(&phi.apply(&g).unwrap()).unwrap();
        assert!(lhs.approx_eq(&rhs));
    }

    #[test]
    fn singular_substitution_rejected() {
        let alg = AlgebraDescriptor::polynomial(1).unwrap();
        let linear = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            AlgebraMorphism::polynomial_substitution(&alg, linear, vec![0.0, 0.0]),
            Err(Error::NotIsomorphism(_))
        ));
    }
}
