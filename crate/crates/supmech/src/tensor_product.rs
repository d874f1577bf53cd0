//! Symplectic structures on tensor-product algebras: the product 2-form,
//! the Hamiltonian-derivation ansatz and its consistency analysis, world
//! classification, and the three candidate brackets on the product algebra.
//!
//! The analysis enforces the central result: the product admits a natural
//! symplectic structure only when both factors are commutative, or both are
//! noncommutative canonical multiples with the same parameter.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::algebra::{AlgebraDescriptor, AlgebraElement};
use crate::derivation::{check_derivation, Derivation, DerivationBasis, DerivationCheck};
use crate::error::{Error, Result};
use crate::forms::{increasing_tuples, DifferentialForm};
use crate::rng::{case_rng, random_element};
use crate::symplectic::SymplecticStructure;

/// One tensor-factor slot of a candidate operator: a derivation or a left
/// multiplication.
#[derive(Debug, Clone)]
pub enum FactorOp {
    Apply(Derivation),
    Multiply(AlgebraElement),
}

impl FactorOp {
    fn act(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        match self {
            FactorOp::Apply(d) => d.apply(x),
            FactorOp::Multiply(c) => c.mul(x),
        }
    }
}

/// A formal sum of scale·(leftOp ⊗ rightOp) terms acting on tensor elements
/// term-wise. Not a derivation unless certified.
#[derive(Debug, Clone)]
pub struct CandidateOperator {
    algebra: AlgebraDescriptor,
    terms: Vec<(C64, FactorOp, FactorOp)>,
}

impl CandidateOperator {
    pub fn new(algebra: AlgebraDescriptor, terms: Vec<(C64, FactorOp, FactorOp)>) -> Self {
        CandidateOperator { algebra, terms }
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn apply(&self, u: &AlgebraElement) -> Result<AlgebraElement> {
        if !u.algebra().same_algebra(&self.algebra) {
            return Err(Error::AlgebraMismatch("operator applied outside its algebra".into()));
        }
        let mut acc = AlgebraElement::zero(&self.algebra);
        let pairs = u
            .tensor_pairs()
            .ok_or_else(|| Error::AlgebraMismatch("candidate operators act on tensors".into()))?;
        for (scale, lop, rop) in &self.terms {
            for (l, r) in pairs {
                let term =
                    AlgebraElement::tensor_into(&self.algebra, &lop.act(l)?, &rop.act(r)?)?;
                acc = acc.add(&term.scale(*scale))?;
            }
        }
        Ok(acc)
    }
}

/// The candidate Y = Y_A⊗μ(B) + μ(A)⊗Y_B + λ·Y_A⊗Y_B for d(A⊗B).
pub fn product_candidate(
    s1: &SymplecticStructure,
    s2: &SymplecticStructure,
    a: &AlgebraElement,
    b: &AlgebraElement,
    lambda: C64,
) -> Result<CandidateOperator> {
    let algebra = AlgebraDescriptor::tensor(s1.algebra().clone(), s2.algebra().clone())?;
    let ya = s1.hamiltonian_derivation(a)?;
    let yb = s2.hamiltonian_derivation(b)?;
    let one = C64::new(1.0, 0.0);
    Ok(CandidateOperator::new(
        algebra,
        vec![
            (one, FactorOp::Apply(ya.clone()), FactorOp::Multiply(b.clone())),
            (one, FactorOp::Multiply(a.clone()), FactorOp::Apply(yb.clone())),
            (lambda, FactorOp::Apply(ya), FactorOp::Apply(yb)),
        ],
    ))
}

/// Verdict of the tensor-pair analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    BothCommutative,
    BothQuantum { lambda: C64 },
    Inconsistent { reason: String },
}

impl Verdict {
    pub fn lambda(&self) -> Option<C64> {
        match self {
            Verdict::BothCommutative => Some(C64::new(0.0, 0.0)),
            Verdict::BothQuantum { lambda } => Some(*lambda),
            Verdict::Inconsistent { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WorldClassification {
    pub verdict: Verdict,
    /// (label, residual) pairs recording what was measured.
    pub evidence: Vec<(String, f64)>,
}

/// Fit ω = b·ω_c entrywise on the structure's own basis; returns (b, max
/// entrywise residual).
fn canonical_multiple_fit(s: &SymplecticStructure) -> Result<(C64, f64)> {
    let reference = {
        let gens = s
            .basis()
            .inner_generators()
            .ok_or(Error::NotSpecial)?
            .into_iter()
            .cloned()
            .collect::<Vec<_>>();
        move |i: usize, j: usize| gens[i].commutator(&gens[j])
    };
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0f64;
    let mut entries = Vec::new();
    for t in increasing_tuples(s.basis().len(), 2) {
        let x = reference(t[0], t[1])?;
        let y = s.form().entry(&t);
        num += x.inner(&y)?;
        den += x.inner(&x)?.re;
        entries.push((x, y));
    }
    if den == 0.0 {
        return Err(Error::NotSpecial);
    }
    let b = num / C64::new(den, 0.0);
    let mut residual = 0.0f64;
    for (x, y) in entries {
        residual = residual.max(y.sub(&x.scale(b))?.norm());
    }
    Ok((b, residual))
}

/// Classify a pair of factor structures per the universality analysis.
pub fn classify_worlds(
    s1: &SymplecticStructure,
    s2: &SymplecticStructure,
) -> Result<WorldClassification> {
    let tol = s1.algebra().tolerance().max(s2.algebra().tolerance());
    let c1 = s1.algebra().is_commutative();
    let c2 = s2.algebra().is_commutative();
    let mut evidence = Vec::new();
    if c1 && c2 {
        return Ok(WorldClassification { verdict: Verdict::BothCommutative, evidence });
    }
    if c1 != c2 {
        return Ok(WorldClassification {
            verdict: Verdict::Inconsistent {
                reason: "mixed pair: one factor algebra is commutative, the other is not".into(),
            },
            evidence,
        });
    }
    // both noncommutative: each form must be −λ·ω_c with one shared λ
    let (b1, r1) = canonical_multiple_fit(s1)?;
    let (b2, r2) = canonical_multiple_fit(s2)?;
    evidence.push(("left-canonical-multiple-residual".into(), r1));
    evidence.push(("right-canonical-multiple-residual".into(), r2));
    if r1 > tol || r2 > tol {
        return Ok(WorldClassification {
            verdict: Verdict::Inconsistent {
                reason: "a factor form is not a canonical multiple".into(),
            },
            evidence,
        });
    }
    let l1 = -b1;
    let l2 = -b2;
    let spread = (l1 - l2).norm();
    evidence.push(("lambda-spread".into(), spread));
    if spread > tol * l1.norm().max(1.0) {
        return Ok(WorldClassification {
            verdict: Verdict::Inconsistent {
                reason: format!(
                    "quantum parameters differ: λ₁ = {l1}, λ₂ = {l2}"
                ),
            },
            evidence,
        });
    }
    let lambda = (l1 + l2) * C64::new(0.5, 0.0);
    if lambda.norm() <= tol {
        return Ok(WorldClassification {
            verdict: Verdict::Inconsistent {
                reason: "noncommutative factors with a vanishing parameter".into(),
            },
            evidence,
        });
    }
    // when both forms are real the shared parameter must be imaginary
    let real1 = s1.form().star()?.sub(s1.form())?.norm() <= tol;
    let real2 = s2.form().star()?.sub(s2.form())?.norm() <= tol;
    if real1 && real2 {
        evidence.push(("lambda-real-part".into(), lambda.re.abs()));
    }
    Ok(WorldClassification { verdict: Verdict::BothQuantum { lambda }, evidence })
}

/// The product 2-form ω = ω⁽¹⁾⊗I₂ + I₁⊗ω⁽²⁾ over the product derivation
/// basis; cross entries vanish.
pub fn product_form(
    s1: &SymplecticStructure,
    s2: &SymplecticStructure,
) -> Result<(Arc<DerivationBasis>, DifferentialForm)> {
    for (side, s) in [("left", s1), ("right", s2)] {
        let rep = s.verify()?;
        if rep.closed_residual > s.algebra().tolerance() || !rep.nondegenerate {
            return Err(Error::Unsupported(format!(
                "{side} factor is not verified symplectic (closed residual {:.3e}, rank {}/{})",
                rep.closed_residual, rep.rank, rep.solver_dim
            )));
        }
    }
    let algebra = AlgebraDescriptor::tensor(s1.algebra().clone(), s2.algebra().clone())?;
    let basis = DerivationBasis::product(&algebra, s1.basis().clone(), s2.basis().clone())?;
    let m1 = s1.basis().len();
    let mut entries = Vec::new();
    for t in increasing_tuples(s1.basis().len(), 2) {
        let v = AlgebraElement::embed_left(&algebra, &s1.form().entry(&t))?;
        if v.norm() > 0.0 {
            entries.push((t, v));
        }
    }
    for t in increasing_tuples(s2.basis().len(), 2) {
        let v = AlgebraElement::embed_right(&algebra, &s2.form().entry(&t))?;
        if v.norm() > 0.0 {
            entries.push((vec![m1 + t[0], m1 + t[1]], v));
        }
    }
    let form = DifferentialForm::from_entries(basis.clone(), 2, entries)?;
    Ok((basis, form))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductFailureStage {
    /// The two factor equations fix incompatible nonzero parameters.
    LambdaInconsistent,
    /// A commutative factor forces λ = 0 while the other factor needs λ ≠ 0.
    MixedCase,
    /// The assembled candidate fails the Leibniz rule.
    NotDerivation,
}

#[derive(Debug, Clone)]
pub struct ProductFailure {
    pub stage: ProductFailureStage,
    pub witness: String,
}

#[derive(Debug)]
pub struct SolvedProductDerivation {
    pub operator: CandidateOperator,
    pub lambda: C64,
}

#[derive(Debug)]
pub enum ProductSolveOutcome {
    Solved(SolvedProductDerivation),
    Failed(ProductFailure),
}

impl ProductSolveOutcome {
    pub fn failure(&self) -> Option<&ProductFailure> {
        match self {
            ProductSolveOutcome::Failed(f) => Some(f),
            _ => None,
        }
    }
}

/// Fit of λ·{A,C} = [C,A] over a seeded element sample.
#[derive(Debug, Clone)]
pub struct LambdaFit {
    /// The fitted parameter, when at least one sampled pair was informative.
    pub lambda: Option<C64>,
    /// Worst relative defect of λ·{A,C} = [C,A] over informative pairs.
    pub max_residual: f64,
    pub informative_pairs: usize,
}

/// Sample pairs (A, C) on one factor and fit the scalar λ with
/// λ·{A,C} = [C,A]; pairs with ‖{A,C}‖ below 10× tolerance are skipped.
pub fn extract_lambda(
    s: &SymplecticStructure,
    seed: u64,
    trials: usize,
    extra: &[AlgebraElement],
) -> Result<LambdaFit> {
    let tol = s.algebra().tolerance();
    let mut rng = case_rng(seed, "lambda-extraction");
    let mut lambdas: Vec<C64> = Vec::new();
    let mut max_residual = 0.0f64;
    let consider = |a: &AlgebraElement, c: &AlgebraElement,
                        lambdas: &mut Vec<C64>,
                        max_residual: &mut f64|
     -> Result<()> {
        let x = s.poisson_bracket(a, c)?;
        if x.norm() < 10.0 * tol {
            return Ok(());
        }
        let y = c.commutator(a)?;
        let l = x.inner(&y)? / x.inner(&x)?;
        let defect = y.sub(&x.scale(l))?.norm() / y.norm().max(1.0);
        lambdas.push(l);
        *max_residual = (*max_residual).max(defect);
        Ok(())
    };
    for k in 0..trials {
        let a = if k < extra.len() {
            extra[k].clone()
        } else {
            random_element(&mut rng, s.algebra(), 3)
        };
        let c = random_element(&mut rng, s.algebra(), 3);
        consider(&a, &c, &mut lambdas, &mut max_residual)?;
    }
    if lambdas.is_empty() {
        return Ok(LambdaFit { lambda: None, max_residual: 0.0, informative_pairs: 0 });
    }
    let n = lambdas.len();
    let mean = lambdas.iter().sum::<C64>() / C64::new(n as f64, 0.0);
    let spread = lambdas.iter().map(|l| (l - mean).norm()).fold(0.0, f64::max);
    Ok(LambdaFit {
        lambda: Some(mean),
        max_residual: max_residual.max(spread / mean.norm().max(1.0)),
        informative_pairs: n,
    })
}

/// Attempt to construct the Hamiltonian derivation of A⊗B on the product
/// algebra; determines λ from both factor equations, cross-checks them, and
/// certifies the Leibniz property of the assembled candidate.
pub fn solve_product_hamiltonian(
    s1: &SymplecticStructure,
    s2: &SymplecticStructure,
    a: &AlgebraElement,
    b: &AlgebraElement,
    seed: u64,
) -> Result<ProductSolveOutcome> {
    let tol = s1.algebra().tolerance().max(s2.algebra().tolerance());
    let fit1 = extract_lambda(s1, seed ^ 0x1, 50, std::slice::from_ref(a))?;
    let fit2 = extract_lambda(s2, seed ^ 0x2, 50, std::slice::from_ref(b))?;
    for (side, fit) in [("left", &fit1), ("right", &fit2)] {
        if fit.max_residual > 1e-8 {
            return Ok(ProductSolveOutcome::Failed(ProductFailure {
                stage: ProductFailureStage::LambdaInconsistent,
                witness: format!(
                    "{side} factor: λ·{{A,C}} = [C,A] has no consistent solution \
                     (worst defect {:.3e} over {} pairs)",
                    fit.max_residual, fit.informative_pairs
                ),
            }));
        }
    }
    let lambda = match (fit1.lambda, fit2.lambda) {
        (Some(l1), Some(l2)) => {
            let near_zero1 = l1.norm() <= 1e-8;
            let near_zero2 = l2.norm() <= 1e-8;
            if (l1 - l2).norm() <= 1e-8 * l1.norm().max(1.0) {
                (l1 + l2) * C64::new(0.5, 0.0)
            } else if near_zero1 != near_zero2 {
                let (zero_side, other) =
                    if near_zero1 { ("left", l2) } else { ("right", l1) };
                return Ok(ProductSolveOutcome::Failed(ProductFailure {
                    stage: ProductFailureStage::MixedCase,
                    witness: format!(
                        "the commutative {zero_side} factor forces λ = 0 but the other factor \
                         requires λ = {other}"
                    ),
                }));
            } else {
                return Ok(ProductSolveOutcome::Failed(ProductFailure {
                    stage: ProductFailureStage::LambdaInconsistent,
                    witness: format!("factor equations disagree: λ₁ = {l1}, λ₂ = {l2}"),
                }));
            }
        }
        (Some(l1), None) => l1,
        (None, Some(l2)) => l2,
        (None, None) => C64::new(0.0, 0.0),
    };
    let candidate = product_candidate(s1, s2, a, b, lambda)?;
    let algebra = candidate.algebra().clone().with_tolerance(tol.max(1e-9))?;
    match check_derivation(&algebra, |u| candidate.apply(u), seed ^ 0x5eed)? {
        DerivationCheck::IsDerivation => {
            Ok(ProductSolveOutcome::Solved(SolvedProductDerivation { operator: candidate, lambda }))
        }
        DerivationCheck::LeibnizViolation { left, right, residual } => {
            Ok(ProductSolveOutcome::Failed(ProductFailure {
                stage: ProductFailureStage::NotDerivation,
                witness: format!(
                    "Leibniz fails at residual {residual:.3e} on u = {left}, v = {right}"
                ),
            }))
        }
    }
}

/// The bracket {A⊗B, C⊗D} = {A,C}₁⊗BD + AC⊗{B,D}₂ + λ{A,C}₁⊗{B,D}₂,
/// extended bilinearly; only defined for classified worlds.
pub fn product_pb(
    classification: &WorldClassification,
    s1: &SymplecticStructure,
    s2: &SymplecticStructure,
    u: &AlgebraElement,
    v: &AlgebraElement,
) -> Result<AlgebraElement> {
    let lambda = classification
        .verdict
        .lambda()
        .ok_or_else(|| match &classification.verdict {
            Verdict::Inconsistent { reason } => Error::UnclassifiedWorld(reason.clone()),
            _ => unreachable!(),
        })?;
    product_pb_with_lambda(s1, s2, lambda, u, v)
}

pub(crate) fn product_pb_with_lambda(
    s1: &SymplecticStructure,
    s2: &SymplecticStructure,
    lambda: C64,
    u: &AlgebraElement,
    v: &AlgebraElement,
) -> Result<AlgebraElement> {
    let algebra = u.algebra().clone();
    let upairs = u
        .tensor_pairs()
        .ok_or_else(|| Error::AlgebraMismatch("product bracket needs tensor elements".into()))?;
    let vpairs = v
        .tensor_pairs()
        .ok_or_else(|| Error::AlgebraMismatch("product bracket needs tensor elements".into()))?;
    let mut acc = AlgebraElement::zero(&algebra);
    for (a, b) in upairs {
        let ya = s1.hamiltonian_derivation(a)?;
        let yb = s2.hamiltonian_derivation(b)?;
        for (c, d) in vpairs {
            let pb1 = ya.apply(c)?;
            let pb2 = yb.apply(d)?;
            let t1 = AlgebraElement::tensor_into(&algebra, &pb1, &b.mul(d)?)?;
            let t2 = AlgebraElement::tensor_into(&algebra, &a.mul(c)?, &pb2)?;
            let t3 = AlgebraElement::tensor_into(&algebra, &pb1, &pb2)?.scale(lambda);
            acc = acc.add(&t1)?.add(&t2)?.add(&t3)?;
        }
    }
    Ok(acc)
}

/// The symmetrized bracket {A⊗B, C⊗D} = {A,C}₁⊗(BD+DB)/2 + (AC+CA)/2⊗{B,D}₂,
/// defined in all cases including the mixed one.
pub fn symmetrized_pb(
    s1: &SymplecticStructure,
    s2: &SymplecticStructure,
    u: &AlgebraElement,
    v: &AlgebraElement,
) -> Result<AlgebraElement> {
    let algebra = u.algebra().clone();
    let upairs = u
        .tensor_pairs()
        .ok_or_else(|| Error::AlgebraMismatch("symmetrized bracket needs tensor elements".into()))?;
    let vpairs = v
        .tensor_pairs()
        .ok_or_else(|| Error::AlgebraMismatch("symmetrized bracket needs tensor elements".into()))?;
    let half = C64::new(0.5, 0.0);
    let mut acc = AlgebraElement::zero(&algebra);
    for (a, b) in upairs {
        let ya = s1.hamiltonian_derivation(a)?;
        let yb = s2.hamiltonian_derivation(b)?;
        for (c, d) in vpairs {
            let pb1 = ya.apply(c)?;
            let pb2 = yb.apply(d)?;
            let t1 = AlgebraElement::tensor_into(
                &algebra,
                &pb1,
                &b.anticommutator(d)?.scale(half),
            )?;
            let t2 = AlgebraElement::tensor_into(
                &algebra,
                &a.anticommutator(c)?.scale(half),
                &pb2,
            )?;
            acc = acc.add(&t1)?.add(&t2)?;
        }
    }
    Ok(acc)
}

/// {u,{v,w}} + {v,{w,u}} + {w,{u,v}} for an arbitrary bracket.
pub fn jacobiator<F>(
    bracket: F,
    u: &AlgebraElement,
    v: &AlgebraElement,
    w: &AlgebraElement,
) -> Result<AlgebraElement>
where
    F: Fn(&AlgebraElement, &AlgebraElement) -> Result<AlgebraElement>,
{
    let t1 = bracket(u, &bracket(v, w)?)?;
    let t2 = bracket(v, &bracket(w, u)?)?;
    let t3 = bracket(w, &bracket(u, v)?)?;
    t1.add(&t2)?.add(&t3)
}

/// The external-field bracket {Σf_iA_i, Σg_jB_j} = b⁻¹ Σ f_i g_j [A_i, B_j]
/// on a polynomial ⊗ matrix algebra; classical factors act as central
/// parameters.
pub fn generalized_mixed_pb(
    b: C64,
    u: &AlgebraElement,
    v: &AlgebraElement,
) -> Result<AlgebraElement> {
    if b == C64::new(0.0, 0.0) {
        return Err(Error::ZeroParameter);
    }
    let algebra = u.algebra().clone();
    let (l_alg, r_alg) = algebra
        .tensor_factors()
        .ok_or_else(|| Error::AlgebraMismatch("the mixed bracket needs a tensor algebra".into()))?;
    if l_alg.polynomial_pairs().is_none() || r_alg.matrix_dim().is_none() {
        return Err(Error::AlgebraMismatch(
            "the mixed bracket lives on polynomial ⊗ matrix algebras".into(),
        ));
    }
    let upairs = u.tensor_pairs().expect("tensor payload");
    let vpairs = v.tensor_pairs().expect("tensor payload");
    let inv_b = C64::new(1.0, 0.0) / b;
    let mut acc = AlgebraElement::zero(&algebra);
    for (f, a) in upairs {
        for (g, bb) in vpairs {
            let t = AlgebraElement::tensor_into(
                &algebra,
                &f.mul(g)?,
                &a.commutator(bb)?.scale(inv_b),
            )?;
            acc = acc.add(&t)?;
        }
    }
    Ok(acc)
}

/// A classified tensor pair with its product form; the bracket uses the
/// classified λ.
#[derive(Debug)]
pub struct ProductStructure {
    algebra: AlgebraDescriptor,
    left: Arc<SymplecticStructure>,
    right: Arc<SymplecticStructure>,
    basis: Arc<DerivationBasis>,
    form: DifferentialForm,
    lambda: C64,
    classification: WorldClassification,
}

impl ProductStructure {
    pub fn new(left: Arc<SymplecticStructure>, right: Arc<SymplecticStructure>) -> Result<Self> {
        let classification = classify_worlds(&left, &right)?;
        let lambda = classification.verdict.lambda().ok_or_else(|| {
            let reason = match &classification.verdict {
                Verdict::Inconsistent { reason } => reason.clone(),
                _ => unreachable!(),
            };
            Error::ForbiddenCoupling(reason)
        })?;
        let (basis, form) = product_form(&left, &right)?;
        let algebra = basis.algebra().clone();
        Ok(ProductStructure { algebra, left, right, basis, form, lambda, classification })
    }

    pub fn algebra(&self) -> &AlgebraDescriptor {
        &self.algebra
    }

    pub fn left(&self) -> &Arc<SymplecticStructure> {
        &self.left
    }

    pub fn right(&self) -> &Arc<SymplecticStructure> {
        &self.right
    }

    pub fn basis(&self) -> &Arc<DerivationBasis> {
        &self.basis
    }

    pub fn form(&self) -> &DifferentialForm {
        &self.form
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn classification(&self) -> &WorldClassification {
        &self.classification
    }

    pub fn poisson_bracket(
        &self,
        u: &AlgebraElement,
        v: &AlgebraElement,
    ) -> Result<AlgebraElement> {
        product_pb_with_lambda(&self.left, &self.right, self.lambda, u, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::matrices::pauli;
    use crate::algebra::tensor::{flatten_mat_mat, flatten_poly_poly};
    use crate::algebra::Polynomial;

    fn mat2() -> AlgebraDescriptor {
        AlgebraDescriptor::matrix(2).unwrap()
    }

    fn poly1() -> AlgebraDescriptor {
        AlgebraDescriptor::polynomial(1).unwrap()
    }

    fn quantum(hbar: f64) -> SymplecticStructure {
        SymplecticStructure::quantum(&mat2(), hbar).unwrap()
    }

    fn classical() -> SymplecticStructure {
        SymplecticStructure::classical(&poly1()).unwrap()
    }

    fn melem(m: &nalgebra::DMatrix<C64>) -> AlgebraElement {
        AlgebraElement::from_matrix(&mat2(), m.clone()).unwrap()
    }

    #[test]
    fn classification_matches_the_worlds() {
        let cc = classify_worlds(&classical(), &SymplecticStructure::classical(&AlgebraDescriptor::polynomial(2).unwrap()).unwrap()).unwrap();
        assert_eq!(cc.verdict, Verdict::BothCommutative);
        assert_eq!(cc.verdict.lambda(), Some(C64::new(0.0, 0.0)));

        let qq = classify_worlds(
            &quantum(1.0),
            &SymplecticStructure::quantum(&AlgebraDescriptor::matrix(3).unwrap(), 1.0).unwrap(),
        )
        .unwrap();
        match qq.verdict {
            Verdict::BothQuantum { lambda } => {
                assert!((lambda - C64::new(0.0, 1.0)).norm() < 1e-10, "λ = iħ expected");
            }
            other => panic!("expected BothQuantum, got {other:?}"),
        }

        let mixed = classify_worlds(&classical(), &quantum(1.0)).unwrap();
        assert!(matches!(mixed.verdict, Verdict::Inconsistent { .. }));

        let mismatch = classify_worlds(&quantum(1.0), &quantum(2.0)).unwrap();
        assert!(matches!(mismatch.verdict, Verdict::Inconsistent { .. }));
    }

    #[test]
    fn product_form_blocks_and_closedness() {
        let s1 = quantum(1.0);
        let s2 = quantum(1.0);
        let (basis, form) = product_form(&s1, &s2).unwrap();
        // cross entries vanish
        assert!(form.entry(&[0, 3]).is_zero());
        // left-block entry (D̃_σx, D̃_σy) = (−i·2i·σz)⊗I = 2σz⊗I
        let [_, _, sz] = pauli();
        let alg = basis.algebra().clone();
        let expect = AlgebraElement::embed_left(&alg, &melem(&sz).scale(C64::new(2.0, 0.0))).unwrap();
        assert!(form.entry(&[0, 1]).approx_eq(&expect));
        // closed
        assert!(form.exterior_derivative().unwrap().norm() < 1e-10);
    }

    #[test]
    fn lambda_extraction_on_each_backend() {
        // quantum ħ=1: λ·{A,C} = [C,A] forces λ = i
        let f = extract_lambda(&quantum(1.0), 17, 50, &[]).unwrap();
        assert!(f.informative_pairs >= 40);
        assert!((f.lambda.unwrap() - C64::new(0.0, 1.0)).norm() < 1e-9);
        assert!(f.max_residual < 1e-9);
        // classical: [C,A] = 0 with nontrivial PB forces λ = 0
        let f = extract_lambda(&classical(), 17, 50, &[]).unwrap();
        assert!(f.informative_pairs >= 40);
        assert!(f.lambda.unwrap().norm() < 1e-12);
    }

    #[test]
    fn solve_product_in_the_permitted_worlds() {
        let [sx, sy, _] = pauli();
        // both quantum ħ=1: λ = i and Y is a derivation
        let s1 = quantum(1.0);
        let s2 = quantum(1.0);
        let out = solve_product_hamiltonian(&s1, &s2, &melem(&sx), &melem(&sy), 23).unwrap();
        match out {
            ProductSolveOutcome::Solved(s) => {
                assert!((s.lambda - C64::new(0.0, 1.0)).norm() < 1e-9);
            }
            ProductSolveOutcome::Failed(f) => panic!("unexpected failure: {:?}", f),
        }
        // both commutative: λ = 0
        let c1 = classical();
        let c2 = classical();
        let q = AlgebraElement::coordinate_q(&poly1(), 0).unwrap();
        let p = AlgebraElement::coordinate_p(&poly1(), 0).unwrap();
        let out = solve_product_hamiltonian(&c1, &c2, &q, &p, 23).unwrap();
        match out {
            ProductSolveOutcome::Solved(s) => {
                assert!(s.lambda.norm() < 1e-10);
            }
            ProductSolveOutcome::Failed(f) => panic!("unexpected failure: {:?}", f),
        }
    }

    #[test]
    fn mixed_case_fails_with_forced_zero_lambda() {
        let c = classical();
        let s = quantum(1.0);
        let q = AlgebraElement::coordinate_q(&poly1(), 0).unwrap();
        let [sx, _, _] = pauli();
        let out = solve_product_hamiltonian(&c, &s, &q, &melem(&sx), 29).unwrap();
        let failure = out.failure().expect("mixed case must fail");
        assert_eq!(failure.stage, ProductFailureStage::MixedCase);
        // mismatched quantum parameters are flagged as inconsistent λ
        let out =
            solve_product_hamiltonian(&quantum(1.0), &quantum(2.0), &melem(&sx), &melem(&sx), 29)
                .unwrap();
        assert_eq!(
            out.failure().expect("mismatch must fail").stage,
            ProductFailureStage::LambdaInconsistent
        );
    }

    #[test]
    fn mixed_candidates_violate_leibniz_for_any_lambda() {
        let c = classical();
        let s = quantum(1.0);
        let q = AlgebraElement::coordinate_q(&poly1(), 0).unwrap();
        let [sx, _, _] = pauli();
        let algebra = AlgebraDescriptor::tensor(poly1(), mat2()).unwrap();
        for lambda in [C64::new(0.0, 0.0), C64::new(0.0, 1.0)] {
            let cand = product_candidate(&c, &s, &q, &melem(&sx), lambda).unwrap();
            let check = check_derivation(&algebra, |u| cand.apply(u), 31).unwrap();
            match check {
                DerivationCheck::LeibnizViolation { residual, .. } => {
                    assert!(residual > 1e-3, "λ = {lambda} residual {residual}");
                }
                DerivationCheck::IsDerivation => {
                    panic!("mixed candidate with λ = {lambda} must violate Leibniz")
                }
            }
        }
    }

    #[test]
    fn quantum_product_bracket_equals_flattened_commutator() {
        // Eq-79 consequence: the product PB is the quantum PB of the
        // flattened product algebra
        let s1 = quantum(1.0);
        let s2 = quantum(1.0);
        let class = classify_worlds(&s1, &s2).unwrap();
        let alg = AlgebraDescriptor::tensor(mat2(), mat2()).unwrap();
        let mut rng = case_rng(37, "flatten-oracle");
        for _ in 0..20 {
            let u = random_element(&mut rng, &alg, 2);
            let v = random_element(&mut rng, &alg, 2);
            let got = product_pb(&class, &s1, &s2, &u, &v).unwrap();
            let fu = flatten_mat_mat(&u).unwrap();
            let fv = flatten_mat_mat(&v).unwrap();
            // (−iħ)⁻¹ [u, v] with ħ = 1
            let expect = (&fu * &fv - &fv * &fu) * (C64::new(1.0, 0.0) / C64::new(0.0, -1.0));
            let got_flat = flatten_mat_mat(&got).unwrap();
            assert!((got_flat - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn commutative_product_bracket_equals_flattened_classical_pb() {
        let c1 = classical();
        let c2 = classical();
        let class = classify_worlds(&c1, &c2).unwrap();
        let alg = AlgebraDescriptor::tensor(poly1(), poly1()).unwrap();
        // independent oracle: classical PB on the flattened polynomial algebra
        let flat_pb = |f: &Polynomial, g: &Polynomial| -> Polynomial {
            let n = 2;
            let mut acc = Polynomial::zero(2 * n);
            for j in 0..n {
                acc = acc.add(&f.partial(n + j).mul(&g.partial(j)));
                acc = acc.sub(&f.partial(j).mul(&g.partial(n + j)));
            }
            acc
        };
        let mut rng = case_rng(41, "flatten-classical");
        for _ in 0..10 {
            let u = random_element(&mut rng, &alg, 2);
            let v = random_element(&mut rng, &alg, 2);
            let got = product_pb(&class, &c1, &c2, &u, &v).unwrap();
            let expect = flat_pb(&flatten_poly_poly(&u).unwrap(), &flatten_poly_poly(&v).unwrap());
            let diff = flatten_poly_poly(&got).unwrap().sub(&expect).max_coeff();
            assert!(diff < 1e-9, "diff {diff}");
        }
        // spec example: {q⊗r, p⊗1} = {q,p}₁ ⊗ r
        let q = AlgebraElement::coordinate_q(&poly1(), 0).unwrap();
        let p = AlgebraElement::coordinate_p(&poly1(), 0).unwrap();
        let r = q.mul(&q).unwrap();
        let u = AlgebraElement::tensor(&q, &r).unwrap();
        let v = AlgebraElement::tensor(&p, &AlgebraElement::unit(&poly1())).unwrap();
        let got = product_pb(&class, &c1, &c2, &u, &v).unwrap();
        let pb_qp = c1.poisson_bracket(&q, &p).unwrap();
        let expect = AlgebraElement::tensor(&pb_qp, &r).unwrap();
        assert!(got.approx_eq(&expect));
    }

    #[test]
    fn brackets_agree_in_permitted_worlds() {
        let s1 = quantum(1.0);
        let s2 = quantum(1.0);
        let class = classify_worlds(&s1, &s2).unwrap();
        let alg = AlgebraDescriptor::tensor(mat2(), mat2()).unwrap();
        let mut rng = case_rng(43, "bracket-agreement");
        for _ in 0..30 {
            let u = random_element(&mut rng, &alg, 2);
            let v = random_element(&mut rng, &alg, 2);
            let a = product_pb(&class, &s1, &s2, &u, &v).unwrap();
            let b = symmetrized_pb(&s1, &s2, &u, &v).unwrap();
            assert!(a.sub(&b).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn unclassified_world_is_rejected() {
        let c = classical();
        let s = quantum(1.0);
        let class = classify_worlds(&c, &s).unwrap();
        let q = AlgebraElement::coordinate_q(&poly1(), 0).unwrap();
        let [sx, _, _] = pauli();
        let u = AlgebraElement::tensor(&q, &melem(&sx)).unwrap();
        assert!(matches!(
            product_pb(&class, &c, &s, &u, &u),
            Err(Error::UnclassifiedWorld(_))
        ));
        assert!(matches!(
            ProductStructure::new(Arc::new(classical()), Arc::new(quantum(1.0))),
            Err(Error::ForbiddenCoupling(_))
        ));
    }
}
