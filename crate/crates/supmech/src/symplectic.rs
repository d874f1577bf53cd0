//! Symplectic structures on the system algebras: closedness and
//! non-degeneracy verification, the Hamiltonian-derivation solver, Poisson
//! brackets, canonical transformations, and generalized (algebra, Lie
//! subalgebra) pairs.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::algebra::{matrices, AlgebraDescriptor, AlgebraElement, Polynomial};
use crate::derivation::{scalar_of, Derivation, DerivationBasis, DerivationKind};
use crate::error::{Error, Result};
use crate::forms::{increasing_tuples, DifferentialForm};
use crate::morphism::AlgebraMorphism;
use crate::rng::{case_rng, random_element};

/// How the 2-form relates to the standard structures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StructureFlavor {
    /// ω = b·ω_c on a matrix backend; b = 1 is the canonical structure and
    /// b = −iħ the quantum one.
    CanonicalMultiple { b: C64 },
    /// ω = Σ dp_j ∧ dq^j on a polynomial backend.
    Classical,
    Custom,
}

/// The canonical 2-form ω_c(D_A, D_B) = [A, B] over the standard basis of a
/// full matrix algebra.
pub fn canonical_form(algebra: &AlgebraDescriptor) -> Result<DifferentialForm> {
    if algebra.matrix_dim().is_none() {
        return Err(Error::NotSpecial);
    }
    let basis = DerivationBasis::standard(algebra)?;
    canonical_form_on(&basis)
}

fn canonical_form_on(basis: &Arc<DerivationBasis>) -> Result<DifferentialForm> {
    let gens = basis
        .inner_generators()
        .ok_or(Error::NotSpecial)?
        .into_iter()
        .cloned()
        .collect::<Vec<_>>();
    let mut entries = Vec::new();
    for t in increasing_tuples(basis.len(), 2) {
        let value = gens[t[0]].commutator(&gens[t[1]])?;
        if value.norm() > 0.0 {
            entries.push((t, value));
        }
    }
    DifferentialForm::from_entries(basis.clone(), 2, entries)
}

/// The classical 2-form Σ dp_j ∧ dq^j over the coordinate basis.
pub fn classical_form(algebra: &AlgebraDescriptor) -> Result<DifferentialForm> {
    let pairs = algebra
        .polynomial_pairs()
        .ok_or_else(|| Error::AlgebraMismatch("classical form needs a polynomial algebra".into()))?;
    let basis = DerivationBasis::standard(algebra)?;
    let minus_one = AlgebraElement::unit(algebra).scale(C64::new(-1.0, 0.0));
    let entries = (0..pairs)
        .map(|j| (vec![j, pairs + j], minus_one.clone()))
        .collect::<Vec<_>>();
    DifferentialForm::from_entries(basis, 2, entries)
}

#[derive(Debug)]
enum Solver {
    /// Flattened least squares from derivation coordinates to 1-form
    /// coordinates on a matrix backend.
    Matrix {
        system: DMatrix<C64>,
        svd: nalgebra::SVD<C64, nalgebra::Dyn, nalgebra::Dyn>,
        rank: usize,
    },
    /// Constant-coefficient solve on a polynomial backend, applied
    /// monomial by monomial.
    Classical {
        omega: DMatrix<C64>,
        svd_t: nalgebra::SVD<C64, nalgebra::Dyn, nalgebra::Dyn>,
        rank: usize,
    },
}

/// Verification report for a symplectic structure.
#[derive(Debug, Clone)]
pub struct StructureReport {
    pub closed_residual: f64,
    pub rank: usize,
    pub solver_dim: usize,
    pub nondegenerate: bool,
}

/// A closed non-degenerate 2-form with its cached Hamiltonian-derivation
/// solver. Immutable after construction.
#[derive(Debug)]
pub struct SymplecticStructure {
    algebra: AlgebraDescriptor,
    basis: Arc<DerivationBasis>,
    form: DifferentialForm,
    flavor: StructureFlavor,
    solver: Solver,
}

fn rank_of(svd: &nalgebra::SVD<C64, nalgebra::Dyn, nalgebra::Dyn>) -> usize {
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > 1e-8 * smax).count()
}

impl SymplecticStructure {
    /// ω = ω_c on a full matrix algebra.
    pub fn canonical(algebra: &AlgebraDescriptor) -> Result<Self> {
        Self::canonical_multiple(algebra, C64::new(1.0, 0.0))
    }

    /// The quantum structure ω = −iħ·ω_c.
    pub fn quantum(algebra: &AlgebraDescriptor, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(Error::ZeroParameter);
        }
        Self::canonical_multiple(algebra, C64::new(0.0, -hbar))
    }

    /// ω = b·ω_c for a nonzero complex parameter b.
    pub fn canonical_multiple(algebra: &AlgebraDescriptor, b: C64) -> Result<Self> {
        if b == C64::new(0.0, 0.0) {
            return Err(Error::ZeroParameter);
        }
        let form = canonical_form(algebra)?.scale(b);
        let basis = form.basis().clone();
        let solver = Self::build_solver(&basis, &form)?;
        Ok(SymplecticStructure {
            algebra: algebra.clone(),
            basis,
            form,
            flavor: StructureFlavor::CanonicalMultiple { b },
            solver,
        })
    }

    /// The classical structure ω = Σ dp_j ∧ dq^j.
    pub fn classical(algebra: &AlgebraDescriptor) -> Result<Self> {
        let form = classical_form(algebra)?;
        let basis = form.basis().clone();
        let solver = Self::build_solver(&basis, &form)?;
        Ok(SymplecticStructure {
            algebra: algebra.clone(),
            basis,
            form,
            flavor: StructureFlavor::Classical,
            solver,
        })
    }

    /// A structure from explicit form entries over a given basis.
    pub fn custom(form: DifferentialForm) -> Result<Self> {
        if form.degree() != 2 {
            return Err(Error::BasisMismatch("symplectic forms have degree 2".into()));
        }
        let basis = form.basis().clone();
        let algebra = basis.algebra().clone();
        let solver = Self::build_solver(&basis, &form)?;
        Ok(SymplecticStructure { algebra, basis, form, flavor: StructureFlavor::Custom, solver })
    }

    /// Generalized pair (A, X): restrict the derivation space to the Lie
    /// subalgebra spanned by the given derivations and rebase the reference
    /// form onto it.
    pub fn generalized_pair(
        algebra: &AlgebraDescriptor,
        generators: &[Derivation],
        reference_form: &DifferentialForm,
    ) -> Result<Self> {
        let gens: Vec<AlgebraElement> = generators
            .iter()
            .map(|d| match d.kind() {
                DerivationKind::Inner { generator } => Ok(generator.clone()),
                _ => Err(Error::Unsupported(
                    "generalized pairs take inner derivations on matrix algebras".into(),
                )),
            })
            .collect::<Result<_>>()?;
        let basis = DerivationBasis::from_inner_generators(algebra, gens, false)?;
        let mut entries = Vec::new();
        for t in increasing_tuples(basis.len(), 2) {
            let value = reference_form
                .evaluate(&[&basis.elements()[t[0]], &basis.elements()[t[1]]])?;
            if value.norm() > 0.0 {
                entries.push((t, value));
            }
        }
        let form = DifferentialForm::from_entries(basis.clone(), 2, entries)?;
        let solver = Self::build_solver(&basis, &form)?;
        Ok(SymplecticStructure {
            algebra: algebra.clone(),
            basis,
            form,
            flavor: StructureFlavor::Custom,
            solver,
        })
    }

    fn build_solver(basis: &Arc<DerivationBasis>, form: &DifferentialForm) -> Result<Solver> {
        let algebra = basis.algebra();
        if let Some(n) = algebra.matrix_dim() {
            let m = basis.len();
            let rows = m * n * n;
            let mut system = DMatrix::from_element(rows, m, C64::new(0.0, 0.0));
            for a in 0..m {
                for b in 0..m {
                    let val = form.entry(&[a, b]);
                    let v = matrices::vectorize(val.as_matrix().expect("matrix value"));
                    for (r, z) in v.into_iter().enumerate() {
                        system[(b * n * n + r, a)] = z;
                    }
                }
            }
            let svd = system.clone().svd(true, true);
            let rank = rank_of(&svd);
            Ok(Solver::Matrix { system, svd, rank })
        } else if algebra.polynomial_pairs().is_some() {
            let m = basis.len();
            let mut omega = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
            for a in 0..m {
                for b in 0..m {
                    let val = form.entry(&[a, b]);
                    omega[(a, b)] = scalar_of(&val).map_err(|_| {
                        Error::Unsupported(
                            "the polynomial solver needs constant form coefficients".into(),
                        )
                    })?;
                }
            }
            let svd_t = omega.transpose().svd(true, true);
            let rank = rank_of(&svd_t);
            Ok(Solver::Classical { omega, svd_t, rank })
        } else {
            Err(Error::Unsupported(
                "solvers are built on matrix or polynomial backends; use the tensor-product \
                 machinery for product algebras"
                    .into(),
            ))
        }
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn basis(&self) -> &Arc<DerivationBasis> {
        &self.basis
    }

    pub fn form(&self) -> &DifferentialForm {
        &self.form
    }

    pub fn flavor(&self) -> StructureFlavor {
        self.flavor
    }

    /// The parameter b with ω = b·ω_c, when this is a canonical multiple.
    pub fn canonical_parameter(&self) -> Option<C64> {
        match self.flavor {
            StructureFlavor::CanonicalMultiple { b } => Some(b),
            _ => None,
        }
    }

    pub fn solver_rank(&self) -> usize {
        match &self.solver {
            Solver::Matrix { rank, .. } => *rank,
            Solver::Classical { rank, .. } => *rank,
        }
    }

    /// Solve i_Y ω = −dA for the unique Y in the derivation space.
    pub fn hamiltonian_derivation(&self, a: &AlgebraElement) -> Result<Derivation> {
        if !a.algebra().same_algebra(&self.algebra) {
            return Err(Error::AlgebraMismatch("element outside the structure algebra".into()));
        }
        let tol = self.algebra.tolerance();
        let m = self.basis.len();
        match &self.solver {
            Solver::Matrix { system, svd, rank } => {
                let n = self.algebra.matrix_dim().expect("matrix backend");
                let mut rhs = DVector::from_element(m * n * n, C64::new(0.0, 0.0));
                for b in 0..m {
                    let xb_a = self.basis.elements()[b].apply(a)?;
                    let v = matrices::vectorize(xb_a.as_matrix().expect("matrix value"));
                    for (r, z) in v.into_iter().enumerate() {
                        rhs[b * n * n + r] = -z;
                    }
                }
                if m == 0 {
                    return if rhs.norm() <= tol {
                        Ok(Derivation::zero(&self.algebra))
                    } else {
                        Err(Error::NonDegeneracyFailure { residual: rhs.norm() })
                    };
                }
                let y = svd
                    .solve(&rhs, 1e-13)
                    .map_err(|e| Error::Unsupported(format!("solver failure: {e}")))?;
                let residual = (system * &y - &rhs).norm();
                if residual > tol * rhs.norm().max(1.0) {
                    return Err(Error::NonDegeneracyFailure { residual });
                }
                if *rank < m {
                    return Err(Error::NotUnique { kernel_dim: m - rank });
                }
                let coeffs: Vec<(usize, AlgebraElement)> = {
                    let cutoff = 1e-13 * y.iter().map(|c| c.norm()).fold(1.0, f64::max);
                    y.iter()
                        .enumerate()
                        .filter(|(_, c)| c.norm() > cutoff)
                        .map(|(k, c)| (k, AlgebraElement::scalar(&self.algebra, *c)))
                        .collect()
                };
                self.basis.assemble(&coeffs)
            }
            Solver::Classical { omega, svd_t, rank } => {
                let p = a.as_poly().expect("polynomial backend");
                let grads: Vec<Polynomial> = (0..m).map(|b| p.partial(b)).collect();
                let mut monomials = std::collections::BTreeSet::new();
                for g in &grads {
                    for (e, _) in g.terms() {
                        monomials.insert(e.clone());
                    }
                }
                let mut components = vec![Polynomial::zero(2 * self.algebra.polynomial_pairs().unwrap()); m];
                let mut worst = 0.0f64;
                for e in monomials {
                    let rhs = DVector::from_fn(m, |b, _| -grads[b].coeff(&e));
                    let y = svd_t
                        .solve(&rhs, 1e-13)
                        .map_err(|er| Error::Unsupported(format!("solver failure: {er}")))?;
                    let residual = (omega.transpose() * &y - &rhs).norm();
                    worst = worst.max(residual / rhs.norm().max(1.0));
                    for (k, c) in y.iter().enumerate() {
                        if c.norm() > 1e-15 {
                            let mono = Polynomial::from_terms(
                                components[k].nvars(),
                                [(e.clone(), *c)],
                            )
                            .expect("same coordinates");
                            components[k] = components[k].add(&mono);
                        }
                    }
                }
                if worst > tol {
                    return Err(Error::NonDegeneracyFailure { residual: worst });
                }
                if *rank < m {
                    return Err(Error::NotUnique { kernel_dim: m - rank });
                }
                let coeffs: Vec<(usize, AlgebraElement)> = components
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(k, c)| {
                        Ok((k, AlgebraElement::from_poly(&self.algebra, c)?))
                    })
                    .collect::<Result<_>>()?;
                self.basis.assemble(&coeffs)
            }
        }
    }

    /// {A, B} = Y_A(B).
    pub fn poisson_bracket(
        &self,
        a: &AlgebraElement,
        b: &AlgebraElement,
    ) -> Result<AlgebraElement> {
        self.hamiltonian_derivation(a)?.apply(b)
    }

    /// Closedness residual, solver rank, and the non-degeneracy verdict.
    pub fn verify(&self) -> Result<StructureReport> {
        let d = self.form.exterior_derivative()?;
        let closed_residual = d.norm();
        let rank = self.solver_rank();
        let solver_dim = self.basis.len();
        Ok(StructureReport {
            closed_residual,
            rank,
            solver_dim,
            nondegenerate: rank == solver_dim,
        })
    }

    /// True when Φ pulls the form back onto itself entrywise.
    pub fn is_canonical_transformation(&self, phi: &AlgebraMorphism) -> Result<bool> {
        if !phi.is_endomorphism_of(&self.algebra) {
            return Err(Error::NotIsomorphism(
                "canonical transformations are endomorphisms of the structure algebra".into(),
            ));
        }
        let pulled = self.form.pull_back(phi, &self.basis)?;
        Ok(pulled.sub(&self.form)?.norm() <= self.algebra.tolerance())
    }

    /// δB = ε·{G, B} for a Hermitian generator G.
    pub fn infinitesimal_canonical_change(
        &self,
        g: &AlgebraElement,
        b: &AlgebraElement,
        eps: f64,
    ) -> Result<AlgebraElement> {
        if !g.is_hermitian() {
            return Err(Error::Unsupported(
                "infinitesimal canonical generators must be Hermitian".into(),
            ));
        }
        Ok(self.poisson_bracket(g, b)?.scale(C64::new(eps, 0.0)))
    }

    /// Max Hamiltonian-solve residual over a seeded sample; a cheap
    /// spanning check that the structure solves on generic elements.
    pub fn sample_solve_residual(&self, seed: u64, trials: usize) -> f64 {
        let mut rng = case_rng(seed, "sample-solve");
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let a = random_element(&mut rng, &self.algebra, 3);
            match self.hamiltonian_derivation(&a) {
                Ok(y) => {
                    // residual of i_Y ω + dA evaluated on the basis
                    for xb in self.basis.elements() {
                        let lhs = self
                            .form
                            .evaluate(&[&y, xb])
                            .and_then(|v| v.add(&xb.apply(&a)?));
                        if let Ok(r) = lhs {
                            worst = worst.max(r.norm() / a.norm().max(1.0));
                        }
                    }
                }
                Err(_) => return f64::INFINITY,
            }
        }
        worst
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    pub structure: Arc<SymplecticStructure>,
    pub hamiltonian: AlgebraElement,
}

impl HamiltonianSystem {
    pub fn new(structure: Arc<SymplecticStructure>, hamiltonian: AlgebraElement) -> Result<Self> {
        if !hamiltonian.algebra().same_algebra(structure.algebra()) {
            return Err(Error::AlgebraMismatch("Hamiltonian outside the structure algebra".into()));
        }
        if !hamiltonian.is_hermitian() {
            return Err(Error::Unsupported("Hamiltonians must be Hermitian".into()));
        }
        Ok(HamiltonianSystem { structure, hamiltonian })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::matrices::{ci, pauli, spin_matrices};

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
    fn canonical_form_entries_and_reality() {
        let form = canonical_form(&mat2()).unwrap();
        let [sx, sy, sz] = pauli();
        // ω_c(D_σx, D_σy) = [σx, σy] = 2i σz
        let expect = elem(&(&sx * &sy - &sy * &sx));
        assert!(expect.approx_eq(&elem(&sz).scale(C64::new(0.0, 2.0))));
        assert!(form.entry(&[0, 1]).approx_eq(&expect));
        // imaginary: ω_c* = −ω_c
        let star = form.star().unwrap();
        assert!(star.add(&form).unwrap().norm() < 1e-12);
        // closed
        assert!(form.exterior_derivative().unwrap().norm() < 1e-12);
        // polynomial backends are not special
        assert!(matches!(canonical_form(&poly1()), Err(Error::NotSpecial)));
    }

    #[test]
    fn canonical_form_invariant_under_basis_derivations() {
        for n in [2usize, 3] {
            let alg = AlgebraDescriptor::matrix(n).unwrap();
            let form = canonical_form(&alg).unwrap();
            for x in form.basis().elements() {
                let l = form.lie_derivative(x).unwrap();
                assert!(l.norm() < 1e-12, "L_X ω_c = {} on Matrix({n})", l.norm());
            }
        }
    }

    #[test]
    fn quantum_form_is_real_and_scales_with_hbar() {
        let s1 = SymplecticStructure::quantum(&mat2(), 1.0).unwrap();
        let [sx, sy, sz] = pauli();
        // entry (D_σx, D_σy) = −i·[σx,σy] = −i·2iσz = 2σz
        let expect = elem(&sz).scale(C64::new(2.0, 0.0));
        assert!(s1.form().entry(&[0, 1]).approx_eq(&expect));
        let star = s1.form().star().unwrap();
        assert!(star.sub(s1.form()).unwrap().norm() < 1e-12);
        let s2 = SymplecticStructure::quantum(&mat2(), 2.0).unwrap();
        assert!(s2.form().sub(&s1.form().scale(C64::new(2.0, 0.0))).unwrap().norm() < 1e-12);
        let _ = (sx, sy);
    }

    #[test]
    fn hamiltonian_derivations_match_closed_forms() {
        let [sx, sy, sz] = pauli();
        // canonical: Y_A = D_A
        let sc = SymplecticStructure::canonical(&mat2()).unwrap();
        let y = sc.hamiltonian_derivation(&elem(&sz)).unwrap();
        assert!(y.approx_eq(&Derivation::inner(&elem(&sz)).unwrap()));
        // quantum ħ=1: Y_A = (−i)⁻¹ D_A = i·D_A
        let sq = SymplecticStructure::quantum(&mat2(), 1.0).unwrap();
        let y = sq.hamiltonian_derivation(&elem(&sz)).unwrap();
        assert!(y.approx_eq(&Derivation::inner(&elem(&sz)).unwrap().scale(ci())));
        // i_{D_A} ω_c = −dA checked entrywise
        let da = DifferentialForm::scalar(sc.basis().clone(), elem(&sz))
            .unwrap()
            .exterior_derivative()
            .unwrap();
        let iw = sc
            .form()
            .interior_product(&Derivation::inner(&elem(&sz)).unwrap())
            .unwrap();
        assert!(iw.add(&da).unwrap().norm() < 1e-12);
        let _ = (sx, sy);
    }

    #[test]
    fn classical_hamiltonian_derivation_and_bracket() {
        let alg = poly1();
        let s = SymplecticStructure::classical(&alg).unwrap();
        let q = AlgebraElement::coordinate_q(&alg, 0).unwrap();
        let p = AlgebraElement::coordinate_p(&alg, 0).unwrap();
        // Y_q = −∂/∂p
        let y = s.hamiltonian_derivation(&q).unwrap();
        let expect = Derivation::coordinate(&alg, 1).unwrap().scale(C64::new(-1.0, 0.0));
        assert!(y.approx_eq(&expect));
        // {p, q} = 1
        let pb = s.poisson_bracket(&p, &q).unwrap();
        assert!(pb.approx_eq(&AlgebraElement::unit(&alg)));
        // {A, A} = 0
        assert!(s.poisson_bracket(&q, &q).unwrap().is_zero());
        // entry examples: ω(∂p, ∂q) = 1, closedness exact
        let xq = Derivation::coordinate(&alg, 0).unwrap();
        let xp = Derivation::coordinate(&alg, 1).unwrap();
        assert!(s.form().evaluate(&[&xp, &xq]).unwrap().approx_eq(&AlgebraElement::unit(&alg)));
        assert_eq!(s.form().exterior_derivative().unwrap().norm(), 0.0);
    }

    #[test]
    fn quantum_bracket_equals_scaled_commutator() {
        let [sx, sy, sz] = pauli();
        let s = SymplecticStructure::quantum(&mat2(), 1.0).unwrap();
        // {σx, σy} = (−i)⁻¹ [σx, σy] = i·2iσz = −2σz
        let pb = s.poisson_bracket(&elem(&sx), &elem(&sy)).unwrap();
        assert!(pb.approx_eq(&elem(&sz).scale(C64::new(-2.0, 0.0))));
    }

    #[test]
    fn verification_reports() {
        let s = SymplecticStructure::quantum(&mat2(), 1.0).unwrap();
        let r = s.verify().unwrap();
        assert!(r.closed_residual < 1e-12);
        assert_eq!(r.rank, 3);
        assert!(r.nondegenerate);
        // degenerate custom form: zero form
        let basis = DerivationBasis::standard(&mat2()).unwrap();
        let zero = DifferentialForm::zero(basis, 2);
        let s0 = SymplecticStructure::custom(zero).unwrap();
        let r0 = s0.verify().unwrap();
        assert!(!r0.nondegenerate);
        assert_eq!(r0.rank, 0);
        // classical n=1: rank 2
        let sc = SymplecticStructure::classical(&poly1()).unwrap();
        let rc = sc.verify().unwrap();
        assert_eq!(rc.rank, 2);
        assert!(rc.nondegenerate);
        assert_eq!(rc.closed_residual, 0.0);
    }

    #[test]
    fn canonical_transformations() {
        // inner automorphism preserves the quantum structure
        let s = SymplecticStructure::quantum(&mat2(), 1.0).unwrap();
        let [_, _, sz] = pauli();
        let u = matrices::hermitian_exp(&sz, C64::new(0.0, -0.7));
        let phi = AlgebraMorphism::unitary_conjugation(&mat2(), u).unwrap();
        assert!(s.is_canonical_transformation(&phi).unwrap());

        // phase-space rotation (q,p) → (p,−q) preserves dp ∧ dq
        let alg = poly1();
        let sc = SymplecticStructure::classical(&alg).unwrap();
        let rot = AlgebraMorphism::polynomial_substitution(
            &alg,
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            vec![0.0, 0.0],
        )
        .unwrap();
        assert!(sc.is_canonical_transformation(&rot).unwrap());

        // scaling q → 2q doubles the form
        let scale = AlgebraMorphism::polynomial_substitution(
            &alg,
            DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
            vec![0.0, 0.0],
        )
        .unwrap();
        assert!(!sc.is_canonical_transformation(&scale).unwrap());
    }

    #[test]
    fn infinitesimal_change_matches_finite_difference() {
        let [sx, _, sz] = pauli();
        let s = SymplecticStructure::quantum(&mat2(), 1.0).unwrap();
        let eps = 0.01;
        let delta = s.infinitesimal_canonical_change(&elem(&sz), &elem(&sx), eps).unwrap();
        // oracle: e^{iεσz} σx e^{−iεσz} − σx to O(ε²)
        let u = matrices::hermitian_exp(&sz, C64::new(0.0, eps));
        let moved = AlgebraElement::from_matrix(
            &mat2(),
            u.clone() * sx.clone() * u.adjoint(),
        )
        .unwrap();
        let fd = moved.sub(&elem(&sx)).unwrap();
        assert!(delta.sub(&fd).unwrap().norm() < 5.0 * eps * eps);
        // ε = 0 gives zero
        assert!(s.infinitesimal_canonical_change(&elem(&sz), &elem(&sx), 0.0).unwrap().is_zero());
        // classical oscillator: δq = ε{H, q} = ε·p
        let alg = poly1();
        let sc = SymplecticStructure::classical(&alg).unwrap();
        let q = AlgebraElement::coordinate_q(&alg, 0).unwrap();
        let p = AlgebraElement::coordinate_p(&alg, 0).unwrap();
        let h = q
            .mul(&q)
            .unwrap()
            .add(&p.mul(&p).unwrap())
            .unwrap()
            .scale(C64::new(0.5, 0.0));
        let dq = sc.infinitesimal_canonical_change(&h, &q, 0.25).unwrap();
        assert!(dq.approx_eq(&p.scale(C64::new(0.25, 0.0))));
    }

    #[test]
    fn generalized_spin_pair_solves_spin_elements_only() {
        let alg = AlgebraDescriptor::matrix(4).unwrap();
        let [s1m, s2m, s3m] = spin_matrices(4);
        let s3 = AlgebraElement::from_matrix(&alg, s3m.clone()).unwrap();
        let gens = vec![
            Derivation::inner(&AlgebraElement::from_matrix(&alg, s1m).unwrap()).unwrap(),
            Derivation::inner(&AlgebraElement::from_matrix(&alg, s2m).unwrap()).unwrap(),
            Derivation::inner(&s3).unwrap(),
        ];
        let b = C64::new(0.0, -1.0);
        let reference = canonical_form(&alg).unwrap().scale(b);
        let s = SymplecticStructure::generalized_pair(&alg, &gens, &reference).unwrap();
        assert_eq!(s.basis().len(), 3);
        assert_eq!(s.solver_rank(), 3);
        // Y_{S3} = b⁻¹ D_{S3}
        let y = s.hamiltonian_derivation(&s3).unwrap();
        let expect = Derivation::inner(&s3).unwrap().scale(C64::new(1.0, 0.0) / b);
        assert!(y.approx_eq(&expect));
        // a generic non-spin element has no Hamiltonian derivation in the span
        let e12 = AlgebraElement::from_matrix(&alg, matrices::matrix_unit(4, 0, 1)).unwrap();
        assert!(matches!(
            s.hamiltonian_derivation(&e12),
            Err(Error::NonDegeneracyFailure { .. })
        ));
    }
}
