//! Dense complex matrix helpers: standard generator families and the
//! Kronecker product used for flattening tensor elements.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn cone() -> C64 {
    C64::new(1.0, 0.0)
}

pub fn ci() -> C64 {
    C64::new(0.0, 1.0)
}

/// Matrix unit E_ij (zero-based).
pub fn matrix_unit(n: usize, i: usize, j: usize) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(n, n, czero());
    m[(i, j)] = cone();
    m
}

/// The Pauli matrices [σx, σy, σz].
pub fn pauli() -> [DMatrix<C64>; 3] {
    let sx = DMatrix::from_row_slice(2, 2, &[czero(), cone(), cone(), czero()]);
    let sy = DMatrix::from_row_slice(2, 2, &[czero(), -ci(), ci(), czero()]);
    let sz = DMatrix::from_row_slice(2, 2, &[cone(), czero(), czero(), -cone()]);
    [sx, sy, sz]
}

/// Generalized Gell-Mann generators of the trace-free Hermitian n x n
/// matrices, each with Frobenius norm sqrt(2).
///
/// Ordering: for each index pair i < j (lexicographic) the symmetric then
/// the antisymmetric generator, followed by the n-1 diagonal generators.
/// For n = 2 this is exactly [σx, σy, σz].
pub fn gell_mann(n: usize) -> Vec<DMatrix<C64>> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut sym = DMatrix::from_element(n, n, czero());
            sym[(i, j)] = cone();
            sym[(j, i)] = cone();
            out.push(sym);
            let mut asym = DMatrix::from_element(n, n, czero());
            asym[(i, j)] = -ci();
            asym[(j, i)] = ci();
            out.push(asym);
        }
    }
    for l in 1..n {
        let norm = (2.0 / (l as f64 * (l as f64 + 1.0))).sqrt();
        let mut d = DMatrix::from_element(n, n, czero());
        for k in 0..l {
            d[(k, k)] = C64::new(norm, 0.0);
        }
        d[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        out.push(d);
    }
    out
}

/// Spin matrices [S1, S2, S3] in the spin-s irreducible representation of
/// dimension d = 2s+1, normalized so that [S_j, S_k] = i ε_jkl S_l.
pub fn spin_matrices(dim: usize) -> [DMatrix<C64>; 3] {
    assert!(dim >= 2);
    let s = (dim as f64 - 1.0) / 2.0;
    // basis ordered by decreasing magnetic number m = s, s-1, .., -s
    let mut sz = DMatrix::from_element(dim, dim, czero());
    let mut sp = DMatrix::from_element(dim, dim, czero());
    for (row, k) in (0..dim).enumerate() {
        let m = s - k as f64;
        sz[(row, row)] = C64::new(m, 0.0);
        if row > 0 {
            // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>
            let amp = (s * (s + 1.0) - m * (m + 1.0)).sqrt();
            sp[(row - 1, row)] = C64::new(amp, 0.0);
        }
    }
    let sm = sp.adjoint();
    let half = C64::new(0.5, 0.0);
    let s1 = (&sp + &sm) * half;
    let s2 = (&sp - &sm) * C64::new(0.0, -0.5);
    [s1, s2, sz]
}

/// Kronecker product, the flattened representation of a ⊗ b.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::from_element(ar * br, ac * bc, czero());
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == czero() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Column-stacked vectorization of a matrix.
pub fn vectorize(m: &DMatrix<C64>) -> Vec<C64> {
    let (r, c) = m.shape();
    let mut v = Vec::with_capacity(r * c);
    for j in 0..c {
        for i in 0..r {
            v.push(m[(i, j)]);
        }
    }
    v
}

/// exp(s·H) V-diagonalized for Hermitian H and an arbitrary complex scalar s.
pub fn hermitian_exp(h: &DMatrix<C64>, s: C64) -> DMatrix<C64> {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut d = DMatrix::from_element(n, n, czero());
    for k in 0..n {
        d[(k, k)] = (s * C64::new(eig.eigenvalues[k], 0.0)).exp();
    }
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent dense multiplication used as the oracle for commutator
    // identities elsewhere.
    fn mul_ref(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
        let n = a.nrows();
        let mut out = DMatrix::from_element(n, n, czero());
        for i in 0..n {
            for j in 0..n {
                let mut acc = czero();
                for k in 0..n {
                    acc += a[(i, k)] * b[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    #[test]
    fn gell_mann_generators_are_traceless_hermitian_norm_sqrt2() {
        for n in 2..=4 {
            let gens = gell_mann(n);
            assert_eq!(gens.len(), n * n - 1);
            for g in &gens {
                assert!((g - g.adjoint()).norm() < 1e-14);
                assert!(g.trace().norm() < 1e-14);
                assert!((g.norm() - 2.0f64.sqrt()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pauli_products_match_reference() {
        let [sx, sy, sz] = pauli();
        // σx σy = i σz computed against the reference multiply
        let prod = mul_ref(&sx, &sy);
        let expect = &sz * ci();
        assert!((prod - expect).norm() < 1e-15);
    }

    #[test]
    fn spin_matrices_satisfy_so3_brackets() {
        for dim in [2usize, 3, 4] {
            let [s1, s2, s3] = spin_matrices(dim);
            let comm = mul_ref(&s1, &s2) - mul_ref(&s2, &s1);
            assert!((comm - &s3 * ci()).norm() < 1e-12, "dim {dim}");
        }
    }

    #[test]
    fn kron_matches_reference_loop() {
        let [sx, sy, _] = pauli();
        let k = kron(&sx, &sy);
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        assert_eq!(k[(2 * i + a, 2 * j + b)], sx[(i, j)] * sy[(a, b)]);
                    }
                }
            }
        }
    }

    #[test]
    fn hermitian_exp_gives_unitary_for_imaginary_argument() {
        let [_, _, sz] = pauli();
        let u = hermitian_exp(&sz, C64::new(0.0, 0.7));
        let id = DMatrix::identity(2, 2);
        assert!((&u * u.adjoint() - id).norm() < 1e-12);
    }
}
