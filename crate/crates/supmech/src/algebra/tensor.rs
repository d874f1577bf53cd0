//! Canonical form and flattening for tensor-product elements.
//!
//! A tensor element is held as a sum of (left, right) pairs whose left
//! factors are structural basis units of the left algebra: matrix units
//! E_ij, or single monomials with unit coefficient. Pairs are sorted by the
//! left key and merged, which makes the representation unique and lets
//! matrix ⊗ matrix elements flatten losslessly to Kronecker form.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{matrices, AlgebraDescriptor, AlgebraElement, AlgebraKind, Payload, Polynomial};
use crate::error::{Error, Result};

/// Sort/merge key of a canonical left factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum LeftKey {
    Unit(usize, usize),
    Monomial(Vec<u16>),
}

pub(crate) fn left_key(left: &AlgebraElement) -> LeftKey {
    match left.payload() {
        Payload::Matrix(m) => {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    if m[(i, j)] != C64::new(0.0, 0.0) {
                        return LeftKey::Unit(i, j);
                    }
                }
            }
            LeftKey::Unit(usize::MAX, usize::MAX)
        }
        Payload::Poly(p) => {
            LeftKey::Monomial(p.terms().next().map(|(e, _)| e.clone()).unwrap_or_default())
        }
        Payload::Tensor(_) => unreachable!("tensor factors are leaf algebras"),
    }
}

fn left_basis_element(left_alg: &AlgebraDescriptor, key: &LeftKey) -> AlgebraElement {
    match (left_alg.kind(), key) {
        (AlgebraKind::Matrix { dim }, LeftKey::Unit(i, j)) => AlgebraElement::from_matrix(
            left_alg,
            matrices::matrix_unit(*dim, *i, *j),
        )
        .expect("unit fits"),
        (AlgebraKind::Polynomial { pairs }, LeftKey::Monomial(e)) => {
            let p = Polynomial::from_terms(2 * pairs, [(e.clone(), C64::new(1.0, 0.0))])
                .expect("monomial fits");
            AlgebraElement::from_poly(left_alg, p).expect("monomial fits")
        }
        _ => unreachable!("key kind matches the left algebra"),
    }
}

/// Merge raw (left, right) pairs into canonical form.
pub(crate) fn canonicalize(
    algebra: &AlgebraDescriptor,
    pairs: Vec<(AlgebraElement, AlgebraElement)>,
) -> Result<Vec<(AlgebraElement, AlgebraElement)>> {
    let (left_alg, right_alg) = algebra
        .tensor_factors()
        .ok_or_else(|| Error::AlgebraMismatch("canonicalize needs a tensor algebra".into()))?;
    let mut acc: BTreeMap<LeftKey, AlgebraElement> = BTreeMap::new();
    for (l, r) in pairs {
        if !l.algebra().same_algebra(&left_alg) || !r.algebra().same_algebra(&right_alg) {
            return Err(Error::AlgebraMismatch(
                "tensor pair factors do not match the tensor algebra".into(),
            ));
        }
        match l.payload() {
            Payload::Matrix(m) => {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        let c = m[(i, j)];
                        if c == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let scaled = r.scale(c);
                        match acc.entry(LeftKey::Unit(i, j)) {
                            std::collections::btree_map::Entry::Vacant(v) => {
                                v.insert(scaled);
                            }
                            std::collections::btree_map::Entry::Occupied(mut o) => {
                                let sum = o.get().add(&scaled)?;
                                o.insert(sum);
                            }
                        }
                    }
                }
            }
            Payload::Poly(p) => {
                for (e, c) in p.terms() {
                    let scaled = r.scale(*c);
                    match acc.entry(LeftKey::Monomial(e.clone())) {
                        std::collections::btree_map::Entry::Vacant(v) => {
                            v.insert(scaled);
                        }
                        std::collections::btree_map::Entry::Occupied(mut o) => {
                            let sum = o.get().add(&scaled)?;
                            o.insert(sum);
                        }
                    }
                }
            }
            Payload::Tensor(_) => {
                return Err(Error::Unsupported("nested tensor factors".into()));
            }
        }
    }
    let mut out = Vec::with_capacity(acc.len());
    for (key, right) in acc {
        if right.norm() == 0.0 {
            continue;
        }
        out.push((left_basis_element(&left_alg, &key), right));
    }
    Ok(out)
}

/// Norm of the flattened representation: Frobenius of the Kronecker matrix
/// for matrix ⊗ matrix, max-over-monomials of the right-factor norm
/// otherwise.
pub(crate) fn flattened_norm(elem: &AlgebraElement) -> f64 {
    let pairs = match elem.payload() {
        Payload::Tensor(pairs) => pairs,
        _ => unreachable!(),
    };
    let (left_alg, _) = elem.algebra().tensor_factors().expect("tensor algebra");
    match left_alg.kind() {
        AlgebraKind::Matrix { .. } => {
            // left keys are orthonormal matrix units E_ij
            match pairs.first().map(|(_, r)| r.payload()) {
                Some(Payload::Poly(_)) => {
                    // polynomial with matrix coefficients: max over monomials
                    // of the Frobenius norm of the coefficient matrix
                    let mut per_monomial: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
                    for (_, r) in pairs {
                        if let Payload::Poly(p) = r.payload() {
                            for (e, c) in p.terms() {
                                *per_monomial.entry(e.clone()).or_insert(0.0) += c.norm_sqr();
                            }
                        }
                    }
                    per_monomial.values().map(|ss| ss.sqrt()).fold(0.0, f64::max)
                }
                _ => pairs.iter().map(|(_, r)| r.norm() * r.norm()).sum::<f64>().sqrt(),
            }
        }
        AlgebraKind::Polynomial { .. } => {
            pairs.iter().map(|(_, r)| r.norm()).fold(0.0, f64::max)
        }
        AlgebraKind::Tensor { .. } => unreachable!(),
    }
}

/// Lossless flattening of a matrix ⊗ matrix element to its Kronecker
/// representation in Matrix(n·m).
pub fn flatten_mat_mat(elem: &AlgebraElement) -> Result<DMatrix<C64>> {
    let (left_alg, right_alg) = elem
        .algebra()
        .tensor_factors()
        .ok_or_else(|| Error::AlgebraMismatch("flatten needs a tensor element".into()))?;
    let n = left_alg
        .matrix_dim()
        .ok_or_else(|| Error::Unsupported("flatten_mat_mat needs matrix factors".into()))?;
    let m = right_alg
        .matrix_dim()
        .ok_or_else(|| Error::Unsupported("flatten_mat_mat needs matrix factors".into()))?;
    let pairs = elem.tensor_pairs().expect("tensor payload");
    let mut out = DMatrix::from_element(n * m, n * m, C64::new(0.0, 0.0));
    for (l, r) in pairs {
        let lm = l.as_matrix().expect("canonical left is a matrix unit");
        let rm = r.as_matrix().ok_or_else(|| {
            Error::Unsupported("flatten_mat_mat needs matrix right factors".into())
        })?;
        out += matrices::kron(lm, rm);
    }
    Ok(out)
}

/// Inverse of [`flatten_mat_mat`].
pub fn unflatten_mat_mat(algebra: &AlgebraDescriptor, flat: &DMatrix<C64>) -> Result<AlgebraElement> {
    let (left_alg, right_alg) = algebra
        .tensor_factors()
        .ok_or_else(|| Error::AlgebraMismatch("unflatten needs a tensor algebra".into()))?;
    let n = left_alg
        .matrix_dim()
        .ok_or_else(|| Error::Unsupported("unflatten_mat_mat needs matrix factors".into()))?;
    let m = right_alg
        .matrix_dim()
        .ok_or_else(|| Error::Unsupported("unflatten_mat_mat needs matrix factors".into()))?;
    if flat.nrows() != n * m || flat.ncols() != n * m {
        return Err(Error::AlgebraMismatch("flattened matrix has the wrong shape".into()));
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let block = flat.view((i * m, j * m), (m, m)).into_owned();
            if block.norm() == 0.0 {
                continue;
            }
            let l = AlgebraElement::from_matrix(&left_alg, matrices::matrix_unit(n, i, j))?;
            let r = AlgebraElement::from_matrix(&right_alg, block)?;
            pairs.push((l, r));
        }
    }
    AlgebraElement::from_tensor_pairs(algebra, pairs)
}

/// Flatten polynomial ⊗ polynomial to a single polynomial algebra whose
/// coordinates keep the (q.., p..) pairing: left q's first, then right q's,
/// then left p's, then right p's.
pub fn flatten_poly_poly(elem: &AlgebraElement) -> Result<Polynomial> {
    let (left_alg, right_alg) = elem
        .algebra()
        .tensor_factors()
        .ok_or_else(|| Error::AlgebraMismatch("flatten needs a tensor element".into()))?;
    let n1 = left_alg
        .polynomial_pairs()
        .ok_or_else(|| Error::Unsupported("flatten_poly_poly needs polynomial factors".into()))?;
    let n2 = right_alg
        .polynomial_pairs()
        .ok_or_else(|| Error::Unsupported("flatten_poly_poly needs polynomial factors".into()))?;
    let n = n1 + n2;
    let mut terms: Vec<(Vec<u16>, C64)> = Vec::new();
    for (l, r) in elem.tensor_pairs().expect("tensor payload") {
        let lp = l.as_poly().expect("canonical left is a monomial");
        let rp = r.as_poly().expect("right factor is a polynomial");
        for (el, cl) in lp.terms() {
            for (er, cr) in rp.terms() {
                let mut e = vec![0u16; 2 * n];
                for a in 0..n1 {
                    e[a] = el[a]; // left q
                    e[n + a] = el[n1 + a]; // left p
                }
                for a in 0..n2 {
                    e[n1 + a] = er[a]; // right q
                    e[n + n1 + a] = er[n2 + a]; // right p
                }
                terms.push((e, cl * cr));
            }
        }
    }
    Polynomial::from_terms(2 * n, terms).map_err(Error::AlgebraMismatch)
}

/// View a polynomial ⊗ matrix element as a map from monomials to matrix
/// coefficients.
pub fn monomial_matrix_map(elem: &AlgebraElement) -> Result<BTreeMap<Vec<u16>, DMatrix<C64>>> {
    let (left_alg, right_alg) = elem
        .algebra()
        .tensor_factors()
        .ok_or_else(|| Error::AlgebraMismatch("needs a tensor element".into()))?;
    left_alg
        .polynomial_pairs()
        .ok_or_else(|| Error::Unsupported("needs a polynomial left factor".into()))?;
    right_alg
        .matrix_dim()
        .ok_or_else(|| Error::Unsupported("needs a matrix right factor".into()))?;
    let mut out = BTreeMap::new();
    for (l, r) in elem.tensor_pairs().expect("tensor payload") {
        let lp = l.as_poly().expect("canonical left is a monomial");
        let (e, c) = lp.terms().next().expect("canonical monomial is nonzero");
        let rm = r.as_matrix().expect("matrix right factor");
        out.insert(e.clone(), rm * *c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::matrices::pauli;

    fn mat2() -> AlgebraDescriptor {
        AlgebraDescriptor::matrix(2).unwrap()
    }

    // Oracle: quadruple-loop Kronecker product.
    fn kron_ref(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
        let n = a.nrows();
        let m = b.nrows();
        let mut out = DMatrix::from_element(n * m, n * m, C64::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..n {
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a[(i, j)] * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn tensor_flattens_to_kronecker() {
        let [sx, sy, _] = pauli();
        let a = AlgebraElement::from_matrix(&mat2(), sx.clone()).unwrap();
        let b = AlgebraElement::from_matrix(&mat2(), sy.clone()).unwrap();
        let t = AlgebraElement::tensor(&a, &b).unwrap();
        let flat = flatten_mat_mat(&t).unwrap();
        assert!((flat - kron_ref(&sx, &sy)).norm() < 1e-14);
    }

    #[test]
    fn tensor_product_law_matches_kronecker() {
        // (a1⊗a2)(b1⊗b2) = a1 b1 ⊗ a2 b2, checked against Kronecker flattening
        let [sx, sy, sz] = pauli();
        let one = DMatrix::identity(2, 2);
        let a1 = AlgebraElement::from_matrix(&mat2(), sx.clone()).unwrap();
        let a2 = AlgebraElement::from_matrix(&mat2(), &sy + &one).unwrap();
        let b1 = AlgebraElement::from_matrix(&mat2(), &sz * C64::new(0.0, 0.5)).unwrap();
        let b2 = AlgebraElement::from_matrix(&mat2(), sy.clone()).unwrap();
        let left = AlgebraElement::tensor(&a1, &a2).unwrap();
        let right = AlgebraElement::tensor(&b1, &b2).unwrap();
        let prod = left.mul(&right).unwrap();
        let expect = kron_ref(a1.as_matrix().unwrap(), a2.as_matrix().unwrap())
            * kron_ref(b1.as_matrix().unwrap(), b2.as_matrix().unwrap());
        assert!((flatten_mat_mat(&prod).unwrap() - expect).norm() < 1e-13);
    }

    #[test]
    fn unflatten_round_trips() {
        let [sx, sy, sz] = pauli();
        let alg = AlgebraDescriptor::tensor(mat2(), mat2()).unwrap();
        let a = AlgebraElement::from_matrix(&mat2(), sx).unwrap();
        let b = AlgebraElement::from_matrix(&mat2(), sy).unwrap();
        let c = AlgebraElement::from_matrix(&mat2(), sz).unwrap();
        let t = AlgebraElement::tensor(&a, &b)
            .unwrap()
            .add(&AlgebraElement::tensor(&c, &c).unwrap())
            .unwrap();
        let flat = flatten_mat_mat(&t).unwrap();
        let back = unflatten_mat_mat(&alg, &flat).unwrap();
        assert!(back.approx_eq(&t));
    }

    #[test]
    fn poly_poly_flattening_multiplies() {
        let p1 = AlgebraDescriptor::polynomial(1).unwrap();
        let q = AlgebraElement::coordinate_q(&p1, 0).unwrap();
        let p = AlgebraElement::coordinate_p(&p1, 0).unwrap();
        let u = AlgebraElement::tensor(&q, &p).unwrap();
        let v = AlgebraElement::tensor(&p, &q).unwrap();
        let w = u.mul(&v).unwrap();
        let flat = flatten_poly_poly(&w).unwrap();
        let fu = flatten_poly_poly(&u).unwrap();
        let fv = flatten_poly_poly(&v).unwrap();
        assert_eq!(flat, fu.mul(&fv));
    }
}
