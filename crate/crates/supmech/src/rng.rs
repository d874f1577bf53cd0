//! Seeded random sampling of elements, forms, and derivations.
//!
//! All randomness flows from one top-level seed; per-case sub-seeds are
//! derived by hashing case names with FNV-1a so reports are reproducible
//! across runs and platforms.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgebraDescriptor, AlgebraElement, AlgebraKind, Polynomial};

pub fn fnv1a64(data: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in data.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Deterministic RNG for one named case under a top-level seed.
pub fn case_rng(seed: u64, case: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(case))
}

/// Uniform in [-1, 1), bit-stable across platforms.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
}

pub fn uniform_complex(rng: &mut impl RngCore) -> C64 {
    C64::new(uniform(rng), uniform(rng))
}

pub fn random_matrix(rng: &mut impl RngCore, n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| uniform_complex(rng))
}

pub fn random_hermitian(rng: &mut impl RngCore, n: usize) -> DMatrix<C64> {
    let m = random_matrix(rng, n);
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Random sparse polynomial of total degree at most `max_degree`.
pub fn random_polynomial(
    rng: &mut impl RngCore,
    nvars: usize,
    max_degree: usize,
    terms: usize,
) -> Polynomial {
    let mut list = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut e = vec![0u16; nvars];
        let deg = (rng.next_u64() % (max_degree as u64 + 1)) as usize;
        for _ in 0..deg {
            let a = (rng.next_u64() % nvars as u64) as usize;
            e[a] += 1;
        }
        list.push((e, uniform_complex(rng)));
    }
    Polynomial::from_terms(nvars, list).expect("generated exponents fit")
}

pub fn random_real_polynomial(
    rng: &mut impl RngCore,
    nvars: usize,
    max_degree: usize,
    terms: usize,
) -> Polynomial {
    let mut list = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut e = vec![0u16; nvars];
        let deg = (rng.next_u64() % (max_degree as u64 + 1)) as usize;
        for _ in 0..deg {
            let a = (rng.next_u64() % nvars as u64) as usize;
            e[a] += 1;
        }
        list.push((e, C64::new(uniform(rng), 0.0)));
    }
    Polynomial::from_terms(nvars, list).expect("generated exponents fit")
}

/// Random element with degree-bounded polynomial payloads.
pub fn random_element(
    rng: &mut impl RngCore,
    algebra: &AlgebraDescriptor,
    max_degree: usize,
) -> AlgebraElement {
    match algebra.kind() {
        AlgebraKind::Matrix { dim } => {
            AlgebraElement::from_matrix(algebra, random_matrix(rng, *dim)).expect("fits")
        }
        AlgebraKind::Polynomial { pairs } => AlgebraElement::from_poly(
            algebra,
            random_polynomial(rng, 2 * pairs, max_degree, 4),
        )
        .expect("fits"),
        AlgebraKind::Tensor { .. } => {
            let (l, r) = algebra.tensor_factors().expect("tensor kind");
            let mut acc = AlgebraElement::zero(algebra);
            for _ in 0..2 {
                let a = random_element(rng, &l, max_degree);
                let b = random_element(rng, &r, max_degree);
                acc = acc
                    .add(&AlgebraElement::tensor_into(algebra, &a, &b).expect("fits"))
                    .expect("fits");
            }
            acc
        }
    }
}

pub fn random_hermitian_element(
    rng: &mut impl RngCore,
    algebra: &AlgebraDescriptor,
    max_degree: usize,
) -> AlgebraElement {
    let a = random_element(rng, algebra, max_degree);
    a.add(&a.star()).expect("same algebra").scale(C64::new(0.5, 0.0))
}
