//! States as positive normalized linear functionals: density matrices on
//! matrix backends, weighted phase-space ensembles on polynomial backends,
//! and products of the two on tensor algebras. Includes the compatible
//! completeness check between observables and pure states.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::algebra::{AlgebraDescriptor, AlgebraElement};
use crate::error::{Error, Result};
use crate::morphism::{AlgebraMorphism, MorphismKind};
use crate::rng::{case_rng, random_element, uniform};

#[derive(Debug, Clone)]
pub enum StateFunctional {
    /// Tr(ρ ·) with ρ Hermitian, positive, unit trace.
    Density { algebra: AlgebraDescriptor, rho: DMatrix<C64> },
    /// Σ w_i δ_{ξ_i} with w_i ≥ 0 summing to one.
    Ensemble { algebra: AlgebraDescriptor, points: Vec<(Vec<f64>, f64)> },
    /// φ₁ ⊗ φ₂ on a tensor algebra.
    Product { algebra: AlgebraDescriptor, left: Box<StateFunctional>, right: Box<StateFunctional> },
}

/// Diagnostics from the state check.
#[derive(Debug, Clone)]
pub struct StateDiagnostics {
    pub hermiticity_defect: f64,
    pub normalization_defect: f64,
    pub min_eigenvalue: f64,
    /// min over sampled a of φ(a*a), which must not be below −tolerance.
    pub positivity_sample_min: f64,
    pub is_state: bool,
}

impl StateFunctional {
    pub fn density(algebra: &AlgebraDescriptor, rho: DMatrix<C64>) -> Result<Self> {
        let dim = algebra
            .matrix_dim()
            .ok_or_else(|| Error::AlgebraMismatch("density matrices need a matrix algebra".into()))?;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::AlgebraMismatch("density matrix has the wrong shape".into()));
        }
        Ok(StateFunctional::Density { algebra: algebra.clone(), rho })
    }

    /// The pure state |ψ⟩⟨ψ| from a (not necessarily normalized) vector.
    pub fn pure_from_vector(algebra: &AlgebraDescriptor, psi: DVector<C64>) -> Result<Self> {
        let dim = algebra
            .matrix_dim()
            .ok_or_else(|| Error::AlgebraMismatch("vector states need a matrix algebra".into()))?;
        if psi.len() != dim {
            return Err(Error::AlgebraMismatch("state vector has the wrong length".into()));
        }
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::Unsupported("zero vector does not define a state".into()));
        }
        let psi = psi / C64::new(n, 0.0);
        let rho = &psi * psi.adjoint();
        Self::density(algebra, rho)
    }

    /// A Dirac state at one phase-space point.
    pub fn point(algebra: &AlgebraDescriptor, xi: Vec<f64>) -> Result<Self> {
        Self::ensemble(algebra, vec![(xi, 1.0)])
    }

    pub fn ensemble(algebra: &AlgebraDescriptor, points: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let pairs = algebra
            .polynomial_pairs()
            .ok_or_else(|| Error::AlgebraMismatch("ensembles need a polynomial algebra".into()))?;
        if points.iter().any(|(xi, _)| xi.len() != 2 * pairs) {
            return Err(Error::AlgebraMismatch("phase point has the wrong dimension".into()));
        }
        Ok(StateFunctional::Ensemble { algebra: algebra.clone(), points })
    }

    pub fn product(left: StateFunctional, right: StateFunctional) -> Result<Self> {
        let algebra =
            AlgebraDescriptor::tensor(left.algebra().clone(), right.algebra().clone())?;
        Ok(StateFunctional::Product { algebra, left: Box::new(left), right: Box::new(right) })
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        match self {
            StateFunctional::Density { algebra, .. }
            | StateFunctional::Ensemble { algebra, .. }
            | StateFunctional::Product { algebra, .. } => algebra,
        }
    }

    pub fn expectation(&self, a: &AlgebraElement) -> Result<C64> {
        if !a.algebra().same_algebra(self.algebra()) {
            return Err(Error::AlgebraMismatch("observable outside the state algebra".into()));
        }
        match self {
            StateFunctional::Density { rho, .. } => {
                let m = a.as_matrix().expect("matrix algebra");
                Ok((rho * m).trace())
            }
            StateFunctional::Ensemble { points, .. } => {
                let p = a.as_poly().expect("polynomial algebra");
                let mut acc = C64::new(0.0, 0.0);
                for (xi, w) in points {
                    acc += p.eval(xi) * C64::new(*w, 0.0);
                }
                Ok(acc)
            }
            StateFunctional::Product { left, right, .. } => {
                let mut acc = C64::new(0.0, 0.0);
                for (l, r) in a.tensor_pairs().expect("tensor algebra") {
                    acc += left.expectation(l)? * right.expectation(r)?;
                }
                Ok(acc)
            }
        }
    }

    /// Check positivity and normalization, with diagnostics.
    pub fn diagnose(&self, seed: u64) -> Result<StateDiagnostics> {
        let tol = self.algebra().tolerance();
        let mut d = match self {
            StateFunctional::Density { algebra, rho } => {
                let herm = (rho - rho.adjoint()).norm();
                let sym = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
                let eig = sym.symmetric_eigen();
                let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
                StateDiagnostics {
                    hermiticity_defect: herm,
                    normalization_defect: (rho.trace() - C64::new(1.0, 0.0)).norm(),
                    min_eigenvalue: min_eig,
                    positivity_sample_min: f64::INFINITY,
                    is_state: false,
                }
                .tap_algebra(algebra)
            }
            StateFunctional::Ensemble { points, .. } => {
                let weight_sum: f64 = points.iter().map(|(_, w)| w).sum();
                let min_w = points.iter().map(|(_, w)| *w).fold(f64::INFINITY, f64::min);
                StateDiagnostics {
                    hermiticity_defect: 0.0,
                    normalization_defect: (weight_sum - 1.0).abs(),
                    min_eigenvalue: min_w,
                    positivity_sample_min: f64::INFINITY,
                    is_state: false,
                }
            }
            StateFunctional::Product { left, right, .. } => {
                let dl = left.diagnose(seed)?;
                let dr = right.diagnose(seed)?;
                StateDiagnostics {
                    hermiticity_defect: dl.hermiticity_defect.max(dr.hermiticity_defect),
                    normalization_defect: dl
                        .normalization_defect
                        .max(dr.normalization_defect),
                    min_eigenvalue: dl.min_eigenvalue.min(dr.min_eigenvalue),
                    positivity_sample_min: f64::INFINITY,
                    is_state: false,
                }
            }
        };
        // positivity as a functional: φ(a*a) ≥ −tol on random a
        let mut rng = case_rng(seed, "state-positivity");
        for _ in 0..20 {
            let a = random_element(&mut rng, self.algebra(), 2);
            let val = self.expectation(&a.star().mul(&a)?)?;
            d.positivity_sample_min = d.positivity_sample_min.min(val.re);
        }
        d.is_state = d.hermiticity_defect <= tol
            && d.normalization_defect <= tol
            && d.min_eigenvalue >= -tol
            && d.positivity_sample_min >= -tol;
        Ok(d)
    }

    pub fn is_state(&self, seed: u64) -> bool {
        self.diagnose(seed).map(|d| d.is_state).unwrap_or(false)
    }

    /// Pure states: rank-one densities or single Dirac points.
    pub fn is_pure(&self) -> bool {
        match self {
            StateFunctional::Density { algebra, rho } => {
                let tol = algebra.tolerance().max(1e-9);
                let sym = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
                let eig = sym.symmetric_eigen();
                eig.eigenvalues.iter().filter(|&&l| l.abs() > tol).count() == 1
            }
            StateFunctional::Ensemble { points, .. } => points.len() == 1,
            StateFunctional::Product { left, right, .. } => left.is_pure() && right.is_pure(),
        }
    }

    /// Convex combination Σ w_i φ_i of states of one backend.
    pub fn convex_combination(terms: &[(f64, StateFunctional)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Unsupported("empty convex combination".into()))?;
        match &first.1 {
            StateFunctional::Density { algebra, rho } => {
                let mut acc = rho * C64::new(first.0, 0.0);
                for (w, s) in &terms[1..] {
                    match s {
                        StateFunctional::Density { rho, .. } => {
                            acc += rho * C64::new(*w, 0.0);
                        }
                        _ => {
                            return Err(Error::AlgebraMismatch(
                                "mixing states of different backends".into(),
                            ))
                        }
                    }
                }
                Self::density(algebra, acc)
            }
            StateFunctional::Ensemble { algebra, .. } => {
                let mut points = Vec::new();
                for (w, s) in terms {
                    match s {
                        StateFunctional::Ensemble { points: ps, .. } => {
                            for (xi, wi) in ps {
                                points.push((xi.clone(), w * wi));
                            }
                        }
                        _ => {
                            return Err(Error::AlgebraMismatch(
                                "mixing states of different backends".into(),
                            ))
                        }
                    }
                }
                Self::ensemble(algebra, points)
            }
            StateFunctional::Product { .. } => {
                Err(Error::Unsupported("convex combinations of product states".into()))
            }
        }
    }

    /// The transported state φ∘Φ under a canonical transformation.
    pub fn transport(&self, phi: &AlgebraMorphism) -> Result<StateFunctional> {
        if !phi.is_endomorphism_of(self.algebra()) {
            return Err(Error::NotIsomorphism(
                "state transport needs an endomorphism of the state algebra".into(),
            ));
        }
        match (self, phi.kind()) {
            (StateFunctional::Density { algebra, rho }, MorphismKind::UnitaryConjugation { u }) => {
                // Tr(ρ U A U*) = Tr(U*ρU A)
                Ok(StateFunctional::Density {
                    algebra: algebra.clone(),
                    rho: u.adjoint() * rho * u,
                })
            }
            (
                StateFunctional::Ensemble { algebra, points },
                MorphismKind::PolynomialSubstitution { forward, .. },
            ) => {
                let moved =
                    points.iter().map(|(xi, w)| (forward.apply_point(xi), *w)).collect();
                Ok(StateFunctional::Ensemble { algebra: algebra.clone(), points: moved })
            }
            _ => Err(Error::Unsupported("transport for this state/morphism pair".into())),
        }
    }
}

impl StateDiagnostics {
    fn tap_algebra(self, _algebra: &AlgebraDescriptor) -> Self {
        self
    }
}

/// One separation attempt in the compatible-completeness report.
#[derive(Debug, Clone)]
pub struct CcPairResult {
    pub label: String,
    pub separation: f64,
    pub separated: bool,
}

#[derive(Debug, Clone)]
pub struct CcReport {
    pub observable_pairs: Vec<CcPairResult>,
    pub state_pairs: Vec<CcPairResult>,
}

impl CcReport {
    pub fn all_separated(&self) -> bool {
        self.observable_pairs.iter().chain(&self.state_pairs).all(|r| r.separated)
    }

    pub fn min_separation(&self) -> f64 {
        self.observable_pairs
            .iter()
            .chain(&self.state_pairs)
            .map(|r| r.separation)
            .fold(f64::INFINITY, f64::min)
    }
}

fn top_eigenvector(m: &DMatrix<C64>) -> (f64, DVector<C64>) {
    let eig = m.clone().symmetric_eigen();
    let mut best = 0usize;
    for k in 0..eig.eigenvalues.len() {
        if eig.eigenvalues[k].abs() > eig.eigenvalues[best].abs() {
            best = k;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).into_owned())
}

/// Compatible completeness: distinct Hermitian observables must be separated
/// by a pure state, and distinct pure states by an observable.
///
/// For matrix backends the separating state comes from the eigenvectors of
/// the difference, with seeded random pure states as a fallback; the
/// separating observable is the projector onto one of the states. For
/// polynomial backends seeded sample points and coordinate functions do the
/// same job.
pub fn cc_check(
    algebra: &AlgebraDescriptor,
    observables: &[AlgebraElement],
    pure_states: &[StateFunctional],
    seed: u64,
) -> Result<CcReport> {
    let tol = algebra.tolerance();
    let mut observable_pairs = Vec::new();
    let mut state_pairs = Vec::new();
    let mut rng = case_rng(seed, "cc-check");

    for i in 0..observables.len() {
        for j in (i + 1)..observables.len() {
            let a = &observables[i];
            let b = &observables[j];
            let diff = a.sub(b)?;
            if diff.norm() <= tol {
                continue; // equal observables are vacuously separated
            }
            let mut separation = 0.0f64;
            if let Some(m) = diff.as_matrix() {
                let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
                let (val, _) = top_eigenvector(&sym);
                separation = val.abs();
                if separation <= tol {
                    let dim = algebra.matrix_dim().unwrap();
                    for _ in 0..20 {
                        let psi = DVector::from_fn(dim, |_, _| {
                            C64::new(uniform(&mut rng), uniform(&mut rng))
                        });
                        if let Ok(state) = StateFunctional::pure_from_vector(algebra, psi) {
                            let s = (state.expectation(a)? - state.expectation(b)?).norm();
                            separation = separation.max(s);
                        }
                    }
                }
            } else if let Some(p) = diff.as_poly() {
                for _ in 0..40 {
                    let xi: Vec<f64> =
                        (0..p.nvars()).map(|_| 2.0 * uniform(&mut rng)).collect();
                    separation = separation.max(p.eval(&xi).norm());
                }
            }
            observable_pairs.push(CcPairResult {
                label: format!("observables[{i}] vs observables[{j}]"),
                separation,
                separated: separation > tol,
            });
        }
    }

    for i in 0..pure_states.len() {
        for j in (i + 1)..pure_states.len() {
            let phi = &pure_states[i];
            let psi = &pure_states[j];
            let mut separation = 0.0f64;
            match (phi, psi) {
                (
                    StateFunctional::Density { rho: r1, .. },
                    StateFunctional::Density { .. },
                ) => {
                    // projector onto the first state's range separates the rays
                    let (_, v) = top_eigenvector(&((r1 + r1.adjoint()) * C64::new(0.5, 0.0)));
                    let proj = &v * v.adjoint();
                    let obs = AlgebraElement::from_matrix(algebra, proj)?;
                    separation = (phi.expectation(&obs)? - psi.expectation(&obs)?).norm();
                }
                (
                    StateFunctional::Ensemble { points: p1, .. },
                    StateFunctional::Ensemble { points: p2, .. },
                ) => {
                    if let (Some((x1, _)), Some((x2, _))) = (p1.first(), p2.first()) {
                        // the coordinate with the largest difference separates
                        for a in 0..x1.len() {
                            separation = separation.max((x1[a] - x2[a]).abs());
                        }
                    }
                }
                _ => {
                    return Err(Error::AlgebraMismatch(
                        "pure-state sample mixes backends".into(),
                    ))
                }
            }
            state_pairs.push(CcPairResult {
                label: format!("states[{i}] vs states[{j}]"),
                separation,
                separated: separation > tol,
            });
        }
    }

    Ok(CcReport { observable_pairs, state_pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::matrices::pauli;

    fn mat2() -> AlgebraDescriptor {
        AlgebraDescriptor::matrix(2).unwrap()
    }

    fn poly1() -> AlgebraDescriptor {
        AlgebraDescriptor::polynomial(1).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn expectations_on_each_backend() {
        let alg = mat2();
        let [sx, _, sz] = pauli();
        // ρ = |0⟩⟨0| gives ⟨σz⟩ = 1, by the trace oracle Tr(ρσz) = (σz)_00
        let rho = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let phi = StateFunctional::density(&alg, rho).unwrap();
        let ez = AlgebraElement::from_matrix(&alg, sz.clone()).unwrap();
        assert!((phi.expectation(&ez).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(sz[(0, 0)], c(1.0, 0.0));
        // φ(I) = 1
        assert!((phi.expectation(&AlgebraElement::unit(&alg)).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        // real on Hermitian observables
        let ex = AlgebraElement::from_matrix(&alg, sx).unwrap();
        assert!(phi.expectation(&ex).unwrap().im.abs() < 1e-12);

        // point state: q = 2 gives ⟨q²⟩ = 4
        let palg = poly1();
        let q = AlgebraElement::coordinate_q(&palg, 0).unwrap();
        let point = StateFunctional::point(&palg, vec![2.0, 0.0]).unwrap();
        let q2 = q.mul(&q).unwrap();
        assert!((point.expectation(&q2).unwrap() - c(4.0, 0.0)).norm() < 1e-12);
        assert!((point.expectation(&AlgebraElement::unit(&palg)).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn state_checks() {
        let alg = mat2();
        let good = StateFunctional::density(
            &alg,
            DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]),
        )
        .unwrap();
        assert!(good.is_state(3));
        assert!(!good.is_pure());
        let bad = StateFunctional::density(
            &alg,
            DMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]),
        )
        .unwrap();
        let d = bad.diagnose(3).unwrap();
        assert!(!d.is_state);
        assert!(d.min_eigenvalue < -0.4);
        // convex combinations of states are states
        let pure0 = StateFunctional::pure_from_vector(
            &alg,
            DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        let pure1 = StateFunctional::pure_from_vector(
            &alg,
            DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]),
        )
        .unwrap();
        assert!(pure0.is_pure());
        let mix = StateFunctional::convex_combination(&[(0.3, pure0), (0.7, pure1)]).unwrap();
        assert!(mix.is_state(5));
        assert!(!mix.is_pure());
    }

    #[test]
    fn transport_by_conjugation_moves_the_density() {
        let alg = mat2();
        let [sx, _, sz] = pauli();
        let u = crate::algebra::matrices::hermitian_exp(&sz, C64::new(0.0, 0.37));
        let phi = AlgebraMorphism::unitary_conjugation(&alg, u.clone()).unwrap();
        let state = StateFunctional::pure_from_vector(
            &alg,
            DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]),
        )
        .unwrap();
        let moved = state.transport(&phi).unwrap();
        // duality: (Φ̃φ)(A) = φ(Φ(A)) for a sample observable, by the
        // trace-cyclicity oracle
        let a = AlgebraElement::from_matrix(&alg, sx).unwrap();
        let lhs = moved.expectation(&a).unwrap();
        let rhs = state.expectation(&phi.apply(&a).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        assert!(moved.is_pure());
        // identity transport is trivial
        let id = AlgebraMorphism::identity(&alg).unwrap();
        let same = state.transport(&id).unwrap();
        let diff = (same.expectation(&a).unwrap() - state.expectation(&a).unwrap()).norm();
        assert!(diff < 1e-12);
    }

    #[test]
    fn infinitesimal_transport_matches_bracket() {
        // (δφ)(A) = ε φ({G, A}) to O(ε²)
        let alg = mat2();
        let [sx, _, sz] = pauli();
        let s = crate::symplectic::SymplecticStructure::quantum(&alg, 1.0).unwrap();
        let eps = 1e-4;
        let u = crate::algebra::matrices::hermitian_exp(&sz, C64::new(0.0, eps));
        let phi_t = AlgebraMorphism::unitary_conjugation(&alg, u).unwrap();
        let state = StateFunctional::pure_from_vector(
            &alg,
            DVector::from_vec(vec![c(1.0, 0.0), c(0.6, 0.2)]),
        )
        .unwrap();
        let moved = state.transport(&phi_t).unwrap();
        let a = AlgebraElement::from_matrix(&alg, sx).unwrap();
        let g = AlgebraElement::from_matrix(&alg, sz).unwrap();
        let lhs = moved.expectation(&a).unwrap() - state.expectation(&a).unwrap();
        let rhs = state.expectation(&s.poisson_bracket(&g, &a).unwrap()).unwrap()
            * C64::new(eps, 0.0);
        assert!((lhs - rhs).norm() < 10.0 * eps * eps);
    }

    #[test]
    fn product_state_expectation_factorizes() {
        let alg = AlgebraDescriptor::tensor(mat2(), mat2()).unwrap();
        let [sx, _, sz] = pauli();
        let up = StateFunctional::pure_from_vector(
            &mat2(),
            DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        let plus = StateFunctional::pure_from_vector(
            &mat2(),
            DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]),
        )
        .unwrap();
        let prod = StateFunctional::product(up.clone(), plus.clone()).unwrap();
        let a = AlgebraElement::from_matrix(&mat2(), sz).unwrap();
        let b = AlgebraElement::from_matrix(&mat2(), sx).unwrap();
        let u = AlgebraElement::tensor_into(&alg, &a, &b).unwrap();
        let lhs = prod.expectation(&u).unwrap();
        let rhs = up.expectation(&a).unwrap() * plus.expectation(&b).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn cc_check_separates_observables_and_states() {
        let alg = mat2();
        let [sx, sy, _] = pauli();
        let a = AlgebraElement::from_matrix(&alg, sx).unwrap();
        let b = AlgebraElement::from_matrix(&alg, sy).unwrap();
        let up = StateFunctional::pure_from_vector(
            &alg,
            DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        let plus = StateFunctional::pure_from_vector(
            &alg,
            DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]),
        )
        .unwrap();
        let report = cc_check(&alg, &[a.clone(), b], &[up, plus], 7).unwrap();
        assert!(report.all_separated());
        // σx vs σy separated by an eigenstate of σx − σy with margin √2
        assert!(report.observable_pairs[0].separation > 1.0);
        // |0⟩ vs |+⟩ separated by the projector onto |0⟩: values 1 vs 1/2
        assert!((report.state_pairs[0].separation - 0.5).abs() < 1e-9);
        // equal observables are skipped
        let report = cc_check(&alg, &[a.clone(), a.clone()], &[], 7).unwrap();
        assert!(report.observable_pairs.is_empty());

        // polynomial backend: f = q vs g = q² separated at a sample point
        let palg = poly1();
        let q = AlgebraElement::coordinate_q(&palg, 0).unwrap();
        let q2 = q.mul(&q).unwrap();
        let s1 = StateFunctional::point(&palg, vec![2.0, 0.0]).unwrap();
        let s2 = StateFunctional::point(&palg, vec![-1.0, 0.5]).unwrap();
        let report = cc_check(&palg, &[q, q2], &[s1, s2], 7).unwrap();
        assert!(report.all_separated());
    }
}
