//! Hamiltonian time evolution: RK4 integration of the bracket flow for
//! observables and states, exact conjugation on matrix backends, and coupled
//! systems on tensor-product algebras.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::algebra::tensor::{flatten_mat_mat, unflatten_mat_mat};
use crate::algebra::{matrices, AlgebraElement};
use crate::error::{Error, Result};
use crate::states::StateFunctional;
use crate::symplectic::{HamiltonianSystem, StructureFlavor};
use crate::tensor_product::ProductStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    /// A(t) = U(t)* A U(t) with U built from the Hamiltonian eigensystem;
    /// matrix backends only.
    ExactConjugation,
}

#[derive(Debug, Clone, Copy)]
pub struct EvolutionConfig {
    pub t_end: f64,
    pub dt: f64,
    pub method: Method,
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return Err(Error::SpecParse("evolution needs dt > 0 and t_end >= 0".into()));
        }
        Ok(())
    }
}

/// Per-step local error bound for the step-doubling estimate.
const LOCAL_ERROR_BOUND: f64 = 1e-8;
/// Steps between local error estimates.
const ERROR_CHECK_CADENCE: usize = 128;

/// Classic fixed-step RK4 on algebra elements with periodic step-doubling
/// error estimation.
fn rk4_elements<F>(
    flow: F,
    y0: AlgebraElement,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, AlgebraElement)>>
where
    F: Fn(&AlgebraElement) -> Result<AlgebraElement>,
{
    let steps = (t_end / dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push((0.0, y.clone()));
    let half = C64::new(0.5 * dt, 0.0);
    let sixth = C64::new(dt / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    let step = |y: &AlgebraElement, dt_half: C64, dt_sixth: C64| -> Result<AlgebraElement> {
        let k1 = flow(y)?;
        let k2 = flow(&y.add(&k1.scale(dt_half))?)?;
        let k3 = flow(&y.add(&k2.scale(dt_half))?)?;
        let k4 = flow(&y.add(&k3.scale(dt_half.scale(2.0)))?)?;
        y.add(
            &k1.add(&k2.scale(two))?
                .add(&k3.scale(two))?
                .add(&k4)?
                .scale(dt_sixth),
        )
    };
    for k in 0..steps {
        if k % ERROR_CHECK_CADENCE == 0 {
            // one full step against two half steps
            let full = step(&y, half, sixth)?;
            let quarter = C64::new(0.25 * dt, 0.0);
            let twelfth = C64::new(dt / 12.0, 0.0);
            let mid = step(&y, quarter, twelfth)?;
            let fine = step(&mid, quarter, twelfth)?;
            let estimate = full.sub(&fine)?.norm() / 15.0;
            let bound = LOCAL_ERROR_BOUND * y.norm().max(1.0);
            if estimate > bound {
                return Err(Error::StepTooLarge { estimate, bound });
            }
        }
        y = step(&y, half, sixth)?;
        out.push(((k + 1) as f64 * dt, y.clone()));
    }
    Ok(out)
}

/// Exact evolution by conjugation with exp(t·b⁻¹·H); `sign` is +1 for
/// observables and −1 for states.
fn conjugation_series(
    h: &DMatrix<C64>,
    b: C64,
    y0: &DMatrix<C64>,
    t_end: f64,
    dt: f64,
    sign: f64,
) -> Vec<(f64, DMatrix<C64>)> {
    let steps = (t_end / dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let exponent = C64::new(sign * t, 0.0) / b;
        let u = matrices::hermitian_exp(h, exponent);
        let uinv = matrices::hermitian_exp(h, -exponent);
        out.push((t, &u * y0 * uinv));
    }
    out
}

/// Heisenberg evolution dA/dt = {H, A}.
pub fn evolve_observable(
    sys: &HamiltonianSystem,
    a0: &AlgebraElement,
    cfg: &EvolutionConfig,
) -> Result<Vec<(f64, AlgebraElement)>> {
    cfg.validate()?;
    let s = &sys.structure;
    if !a0.algebra().same_algebra(s.algebra()) {
        return Err(Error::AlgebraMismatch("observable outside the system algebra".into()));
    }
    match cfg.method {
        Method::Rk4 => {
            let yh = s.hamiltonian_derivation(&sys.hamiltonian)?;
            rk4_elements(|a| yh.apply(a), a0.clone(), cfg.t_end, cfg.dt)
        }
        Method::ExactConjugation => {
            let b = match s.flavor() {
                StructureFlavor::CanonicalMultiple { b } => b,
                _ => {
                    return Err(Error::Unsupported(
                        "exact conjugation needs a canonical-multiple matrix structure".into(),
                    ))
                }
            };
            let h = sys
                .hamiltonian
                .as_matrix()
                .ok_or_else(|| Error::Unsupported("exact conjugation needs a matrix backend".into()))?;
            let series = conjugation_series(
                h,
                b,
                a0.as_matrix().expect("matrix backend"),
                cfg.t_end,
                cfg.dt,
                1.0,
            );
            series
                .into_iter()
                .map(|(t, m)| Ok((t, AlgebraElement::from_matrix(s.algebra(), m)?)))
                .collect()
        }
    }
}

/// Schrödinger-picture evolution: dρ/dt = {ρ, H} for densities, Hamiltonian
/// point flow for ensembles.
pub fn evolve_state(
    sys: &HamiltonianSystem,
    phi0: &StateFunctional,
    cfg: &EvolutionConfig,
) -> Result<Vec<(f64, StateFunctional)>> {
    cfg.validate()?;
    let s = &sys.structure;
    if !phi0.algebra().same_algebra(s.algebra()) {
        return Err(Error::AlgebraMismatch("state outside the system algebra".into()));
    }
    match phi0 {
        StateFunctional::Density { algebra, rho } => match cfg.method {
            Method::Rk4 => {
                let yh = s.hamiltonian_derivation(&sys.hamiltonian)?;
                let rho0 = AlgebraElement::from_matrix(algebra, rho.clone())?;
                // {ρ, H} = −Y_H(ρ)
                let series = rk4_elements(
                    |r| Ok(yh.apply(r)?.scale(C64::new(-1.0, 0.0))),
                    rho0,
                    cfg.t_end,
                    cfg.dt,
                )?;
                series
                    .into_iter()
                    .map(|(t, r)| {
                        Ok((
                            t,
                            StateFunctional::density(
                                algebra,
                                r.as_matrix().expect("matrix backend").clone(),
                            )?,
                        ))
                    })
                    .collect()
            }
            Method::ExactConjugation => {
                let b = match s.flavor() {
                    StructureFlavor::CanonicalMultiple { b } => b,
                    _ => {
                        return Err(Error::Unsupported(
                            "exact conjugation needs a canonical-multiple matrix structure".into(),
                        ))
                    }
                };
                let h = sys.hamiltonian.as_matrix().expect("matrix backend");
                let series = conjugation_series(h, b, rho, cfg.t_end, cfg.dt, -1.0);
                series
                    .into_iter()
                    .map(|(t, m)| Ok((t, StateFunctional::density(algebra, m)?)))
                    .collect()
            }
        },
        StateFunctional::Ensemble { algebra, points } => {
            if cfg.method == Method::ExactConjugation {
                return Err(Error::Unsupported(
                    "exact conjugation is a matrix-backend method".into(),
                ));
            }
            let yh = s.hamiltonian_derivation(&sys.hamiltonian)?;
            let components: Vec<crate::algebra::Polynomial> = match yh.kind() {
                crate::derivation::DerivationKind::VectorField { components } => {
                    components.clone()
                }
                _ => {
                    return Err(Error::Unsupported(
                        "ensemble evolution needs a vector-field flow".into(),
                    ))
                }
            };
            let steps = (cfg.t_end / cfg.dt).round() as usize;
            let n = components.len();
            let rhs = |xi: &Vec<f64>| -> Vec<f64> {
                (0..n).map(|a| components[a].eval(xi).re).collect()
            };
            let mut series = Vec::with_capacity(steps + 1);
            let mut current = points.clone();
            series.push((0.0, StateFunctional::Ensemble {
                algebra: algebra.clone(),
                points: current.clone(),
            }));
            for k in 0..steps {
                for (xi, _) in current.iter_mut() {
                    let k1 = rhs(xi);
                    let mid1: Vec<f64> =
                        xi.iter().zip(&k1).map(|(x, v)| x + 0.5 * cfg.dt * v).collect();
                    let k2 = rhs(&mid1);
                    let mid2: Vec<f64> =
                        xi.iter().zip(&k2).map(|(x, v)| x + 0.5 * cfg.dt * v).collect();
                    let k3 = rhs(&mid2);
                    let end: Vec<f64> =
                        xi.iter().zip(&k3).map(|(x, v)| x + cfg.dt * v).collect();
                    let k4 = rhs(&end);
                    for a in 0..n {
                        xi[a] += cfg.dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
                    }
                }
                series.push(((k + 1) as f64 * cfg.dt, StateFunctional::Ensemble {
                    algebra: algebra.clone(),
                    points: current.clone(),
                }));
            }
            Ok(series)
        }
        StateFunctional::Product { .. } => Err(Error::Unsupported(
            "evolve product states through the coupled-system interface".into(),
        )),
    }
}

/// A coupled pair of Hamiltonian systems on the tensor-product algebra.
#[derive(Debug)]
pub struct CoupledSystem {
    pub structure: Arc<ProductStructure>,
    /// H = H⁽¹⁾⊗I + I⊗H⁽²⁾ + Σ F_i ⊗ G_i.
    pub hamiltonian: AlgebraElement,
}

/// Couple two systems; the classification gate rejects mixed or
/// parameter-mismatched pairs.
pub fn coupled_system(
    sys1: &HamiltonianSystem,
    sys2: &HamiltonianSystem,
    interaction: &[(AlgebraElement, AlgebraElement)],
) -> Result<CoupledSystem> {
    let structure =
        Arc::new(ProductStructure::new(sys1.structure.clone(), sys2.structure.clone())?);
    let algebra = structure.algebra().clone();
    let mut h = AlgebraElement::embed_left(&algebra, &sys1.hamiltonian)?
        .add(&AlgebraElement::embed_right(&algebra, &sys2.hamiltonian)?)?;
    for (f, g) in interaction {
        if !f.is_hermitian() || !g.is_hermitian() {
            return Err(Error::Unsupported("interaction factors must be Hermitian".into()));
        }
        h = h.add(&AlgebraElement::tensor_into(&algebra, f, g)?)?;
    }
    Ok(CoupledSystem { structure, hamiltonian: h })
}

/// Heisenberg evolution of a tensor observable under the coupled bracket.
pub fn evolve_coupled_observable(
    sys: &CoupledSystem,
    u0: &AlgebraElement,
    cfg: &EvolutionConfig,
) -> Result<Vec<(f64, AlgebraElement)>> {
    cfg.validate()?;
    let ps = &sys.structure;
    if !u0.algebra().same_algebra(ps.algebra()) {
        return Err(Error::AlgebraMismatch("observable outside the coupled algebra".into()));
    }
    match cfg.method {
        Method::Rk4 => {
            // hoist the per-pair factor derivations of the fixed Hamiltonian
            let algebra = ps.algebra().clone();
            let lambda = ps.lambda();
            let hpairs: Vec<(AlgebraElement, AlgebraElement, crate::derivation::Derivation, crate::derivation::Derivation)> =
                sys.hamiltonian
                    .tensor_pairs()
                    .expect("tensor Hamiltonian")
                    .iter()
                    .map(|(a, b)| {
                        Ok((
                            a.clone(),
                            b.clone(),
                            ps.left().hamiltonian_derivation(a)?,
                            ps.right().hamiltonian_derivation(b)?,
                        ))
                    })
                    .collect::<Result<_>>()?;
            let flow = |u: &AlgebraElement| -> Result<AlgebraElement> {
                let mut acc = AlgebraElement::zero(&algebra);
                for (a, b, ya, yb) in &hpairs {
                    for (c, d) in u.tensor_pairs().expect("tensor element") {
                        let pb1 = ya.apply(c)?;
                        let pb2 = yb.apply(d)?;
                        let t1 = AlgebraElement::tensor_into(&algebra, &pb1, &b.mul(d)?)?;
                        let t2 = AlgebraElement::tensor_into(&algebra, &a.mul(c)?, &pb2)?;
                        let t3 =
                            AlgebraElement::tensor_into(&algebra, &pb1, &pb2)?.scale(lambda);
                        acc = acc.add(&t1)?.add(&t2)?.add(&t3)?;
                    }
                }
                Ok(acc)
            };
            rk4_elements(flow, u0.clone(), cfg.t_end, cfg.dt)
        }
        Method::ExactConjugation => {
            // flatten to the product matrix algebra and conjugate there
            let lambda = ps.lambda();
            if lambda.norm() == 0.0 {
                return Err(Error::Unsupported(
                    "exact conjugation on products needs quantum factors".into(),
                ));
            }
            let b = -lambda;
            let h = flatten_mat_mat(&sys.hamiltonian)?;
            let f0 = flatten_mat_mat(u0)?;
            let series = conjugation_series(&h, b, &f0, cfg.t_end, cfg.dt, 1.0);
            series
                .into_iter()
                .map(|(t, m)| Ok((t, unflatten_mat_mat(ps.algebra(), &m)?)))
                .collect()
        }
    }
}

/// ⟨φ(t), A⟩ series computed from an observable series by duality.
pub fn expectation_series(
    phi: &StateFunctional,
    series: &[(f64, AlgebraElement)],
) -> Result<Vec<(f64, C64)>> {
    series.iter().map(|(t, a)| Ok((*t, phi.expectation(a)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::matrices::pauli;
    use crate::algebra::AlgebraDescriptor;
    use crate::symplectic::SymplecticStructure;
    use nalgebra::DVector;

    fn mat2() -> AlgebraDescriptor {
        AlgebraDescriptor::matrix(2).unwrap()
    }

    fn poly1() -> AlgebraDescriptor {
        AlgebraDescriptor::polynomial(1).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn spin_system() -> HamiltonianSystem {
        // H = σz/2 with ħ = 1
        let s = Arc::new(SymplecticStructure::quantum(&mat2(), 1.0).unwrap());
        let [_, _, sz] = pauli();
        let h = AlgebraElement::from_matrix(&mat2(), sz * c(0.5, 0.0)).unwrap();
        HamiltonianSystem::new(s, h).unwrap()
    }

    #[test]
    fn spin_precession_matches_closed_form() {
        // closed form: σx(t) = cos t σx − sin t σy
        let sys = spin_system();
        let [sx, sy, _] = pauli();
        let a0 = AlgebraElement::from_matrix(&mat2(), sx.clone()).unwrap();
        let cfg = EvolutionConfig { t_end: 2.0, dt: 1e-3, method: Method::Rk4 };
        let series = evolve_observable(&sys, &a0, &cfg).unwrap();
        let mut worst = 0.0f64;
        for (t, a) in &series {
            let expect = AlgebraElement::from_matrix(
                &mat2(),
                &sx * c(t.cos(), 0.0) - &sy * c(t.sin(), 0.0),
            )
            .unwrap();
            worst = worst.max(a.sub(&expect).unwrap().norm());
        }
        assert!(worst < 1e-7, "precession deviation {worst}");
        // central Hamiltonian freezes everything
        let central = HamiltonianSystem::new(
            sys.structure.clone(),
            AlgebraElement::unit(&mat2()),
        )
        .unwrap();
        let series = evolve_observable(&central, &a0, &cfg).unwrap();
        assert!(series.last().unwrap().1.approx_eq(&a0));
    }

    #[test]
    fn rk4_matches_exact_conjugation() {
        let sys = spin_system();
        let [sx, _, _] = pauli();
        let a0 = AlgebraElement::from_matrix(&mat2(), sx).unwrap();
        let cfg = EvolutionConfig { t_end: 1.0, dt: 1e-3, method: Method::Rk4 };
        let rk = evolve_observable(&sys, &a0, &cfg).unwrap();
        let cfg = EvolutionConfig { method: Method::ExactConjugation, ..cfg };
        let exact = evolve_observable(&sys, &a0, &cfg).unwrap();
        let worst = rk
            .iter()
            .zip(&exact)
            .map(|((_, a), (_, b))| a.sub(b).unwrap().norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9);
    }

    #[test]
    fn classical_oscillator_point_flow() {
        // H = (p² + q²)/2, starting at (1, 0): q(t) = cos t
        let alg = poly1();
        let s = Arc::new(SymplecticStructure::classical(&alg).unwrap());
        let q = AlgebraElement::coordinate_q(&alg, 0).unwrap();
        let p = AlgebraElement::coordinate_p(&alg, 0).unwrap();
        let h = q
            .mul(&q)
            .unwrap()
            .add(&p.mul(&p).unwrap())
            .unwrap()
            .scale(c(0.5, 0.0));
        let sys = HamiltonianSystem::new(s, h).unwrap();
        let phi0 = StateFunctional::point(&alg, vec![1.0, 0.0]).unwrap();
        let cfg = EvolutionConfig { t_end: 2.0, dt: 1e-3, method: Method::Rk4 };
        let series = evolve_state(&sys, &phi0, &cfg).unwrap();
        let mut worst = 0.0f64;
        for (t, phi) in &series {
            let got = phi.expectation(&q).unwrap().re;
            worst = worst.max((got - t.cos()).abs());
        }
        assert!(worst < 1e-7, "oscillator deviation {worst}");

        // observable picture: q(t) = q cos t + p sin t stays polynomial
        let series = evolve_observable(&sys, &q, &cfg).unwrap();
        let (t, qt) = series.last().unwrap();
        let expect = q.scale(c(t.cos(), 0.0)).add(&p.scale(c(t.sin(), 0.0))).unwrap();
        assert!(qt.sub(&expect).unwrap().norm() < 1e-7);
    }

    #[test]
    fn density_evolution_preserves_invariants_and_duality() {
        let sys = spin_system();
        let [sx, _, _] = pauli();
        let plus = StateFunctional::pure_from_vector(
            &mat2(),
            DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]),
        )
        .unwrap();
        let cfg = EvolutionConfig { t_end: 2.0, dt: 1e-3, method: Method::Rk4 };
        let states = evolve_state(&sys, &plus, &cfg).unwrap();
        let ex = AlgebraElement::from_matrix(&mat2(), sx.clone()).unwrap();
        // ⟨σx⟩(t) = cos t for ρ0 = |+⟩⟨+|, H = σz/2
        let mut worst = 0.0f64;
        for (t, phi) in &states {
            let got = phi.expectation(&ex).unwrap().re;
            worst = worst.max((got - t.cos()).abs());
        }
        assert!(worst < 1e-7, "bloch rotation deviation {worst}");
        // trace, hermiticity, positivity
        for (_, phi) in &states {
            let d = phi.diagnose(11).unwrap();
            assert!(d.normalization_defect < 1e-8);
            assert!(d.hermiticity_defect < 1e-8);
            assert!(d.min_eigenvalue > -1e-8);
        }
        // duality ⟨φ(t), A⟩ = ⟨φ, A(t)⟩
        let obs = evolve_observable(&sys, &ex, &cfg).unwrap();
        let mut worst = 0.0f64;
        for ((_, phi), (_, at)) in states.iter().zip(&obs) {
            let lhs = phi.expectation(&ex).unwrap();
            let rhs = plus.expectation(at).unwrap();
            worst = worst.max((lhs - rhs).norm());
        }
        assert!(worst < 1e-8, "duality residual {worst}");
        // stationary state stays put
        let stationary = StateFunctional::pure_from_vector(
            &mat2(),
            DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        let states = evolve_state(&sys, &stationary, &cfg).unwrap();
        let (_, last) = states.last().unwrap();
        let d = match (last, &stationary) {
            (
                StateFunctional::Density { rho: a, .. },
                StateFunctional::Density { rho: b, .. },
            ) => (a - b).norm(),
            _ => unreachable!(),
        };
        assert!(d < 1e-9);
    }

    #[test]
    fn step_too_large_is_detected() {
        let s = Arc::new(SymplecticStructure::quantum(&mat2(), 1.0).unwrap());
        let [_, _, sz] = pauli();
        let h = AlgebraElement::from_matrix(&mat2(), sz * c(40.0, 0.0)).unwrap();
        let sys = HamiltonianSystem::new(s, h).unwrap();
        let [sx, _, _] = pauli();
        let a0 = AlgebraElement::from_matrix(&mat2(), sx).unwrap();
        let cfg = EvolutionConfig { t_end: 1.0, dt: 0.25, method: Method::Rk4 };
        assert!(matches!(
            evolve_observable(&sys, &a0, &cfg),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn coupled_two_spin_matches_flattened_oracle() {
        let [sx, sy, sz] = pauli();
        let s = Arc::new(SymplecticStructure::quantum(&mat2(), 1.0).unwrap());
        let h1 = AlgebraElement::from_matrix(&mat2(), &sz * c(0.5, 0.0)).unwrap();
        let h2 = AlgebraElement::from_matrix(&mat2(), &sx * c(0.3, 0.0)).unwrap();
        let sys1 = HamiltonianSystem::new(s.clone(), h1).unwrap();
        let sys2 = HamiltonianSystem::new(s.clone(), h2).unwrap();
        let g = AlgebraElement::from_matrix(&mat2(), &sz * c(0.1, 0.0)).unwrap();
        let coupled = coupled_system(&sys1, &sys2, &[(g.clone(), g.clone())]).unwrap();
        let u0 = AlgebraElement::tensor(
            &AlgebraElement::from_matrix(&mat2(), sx.clone()).unwrap(),
            &AlgebraElement::from_matrix(&mat2(), sy.clone()).unwrap(),
        )
        .unwrap();
        let cfg = EvolutionConfig { t_end: 1.0, dt: 1e-3, method: Method::Rk4 };
        let series = evolve_coupled_observable(&coupled, &u0, &cfg).unwrap();
        let cfg_exact = EvolutionConfig { method: Method::ExactConjugation, ..cfg };
        let oracle = evolve_coupled_observable(&coupled, &u0, &cfg_exact).unwrap();
        let worst = series
            .iter()
            .zip(&oracle)
            .map(|((_, a), (_, b))| a.sub(b).unwrap().norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "coupled deviation {worst}");
    }

    #[test]
    fn uncoupled_factors_evolve_independently() {
        let [sx, sy, sz] = pauli();
        let s = Arc::new(SymplecticStructure::quantum(&mat2(), 1.0).unwrap());
        let h1 = AlgebraElement::from_matrix(&mat2(), &sz * c(0.5, 0.0)).unwrap();
        let h2 = AlgebraElement::from_matrix(&mat2(), &sy * c(0.4, 0.0)).unwrap();
        let sys1 = HamiltonianSystem::new(s.clone(), h1).unwrap();
        let sys2 = HamiltonianSystem::new(s.clone(), h2).unwrap();
        let coupled = coupled_system(&sys1, &sys2, &[]).unwrap();
        let a0 = AlgebraElement::from_matrix(&mat2(), sx.clone()).unwrap();
        let b0 = AlgebraElement::from_matrix(&mat2(), sz.clone()).unwrap();
        let u0 = AlgebraElement::tensor(&a0, &b0).unwrap();
        let cfg = EvolutionConfig { t_end: 1.0, dt: 1e-3, method: Method::Rk4 };
        let series = evolve_coupled_observable(&coupled, &u0, &cfg).unwrap();
        let sa = evolve_observable(&sys1, &a0, &cfg).unwrap();
        let sb = evolve_observable(&sys2, &b0, &cfg).unwrap();
        let mut worst = 0.0f64;
        for (((_, u), (_, a)), (_, b)) in series.iter().zip(&sa).zip(&sb) {
            let expect = AlgebraElement::tensor(a, b).unwrap();
            worst = worst.max(u.sub(&expect).unwrap().norm());
        }
        assert!(worst < 1e-6, "independence deviation {worst}");
    }

    #[test]
    fn mixed_coupling_is_forbidden() {
        let alg = poly1();
        let sc = Arc::new(SymplecticStructure::classical(&alg).unwrap());
        let q = AlgebraElement::coordinate_q(&alg, 0).unwrap();
        let p = AlgebraElement::coordinate_p(&alg, 0).unwrap();
        let hc = q.mul(&q).unwrap().add(&p.mul(&p).unwrap()).unwrap().scale(c(0.5, 0.0));
        let classical = HamiltonianSystem::new(sc, hc).unwrap();
        let quantum = spin_system();
        assert!(matches!(
            coupled_system(&classical, &quantum, &[]),
            Err(Error::ForbiddenCoupling(_))
        ));
    }
}
