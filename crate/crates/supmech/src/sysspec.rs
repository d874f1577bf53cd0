//! The JSON system-spec format: algebra, form, Hamiltonian, states, and
//! evolution settings, with strict schema validation and builders that turn
//! a spec into live objects.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, AlgebraElement, Polynomial};
use crate::derivation::Derivation;
use crate::dynamics::{coupled_system, CoupledSystem, EvolutionConfig, Method};
use crate::error::{Error, Result};
use crate::forms::DifferentialForm;
use crate::states::StateFunctional;
use crate::symplectic::{canonical_form, HamiltonianSystem, SymplecticStructure};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase", tag = "kind")]
pub enum AlgebraSpec {
    Matrix { n: usize },
    Polynomial { pairs: usize },
    Tensor { left: Box<AlgebraSpec>, right: Box<AlgebraSpec> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTermSpec {
    pub exponents: Vec<u16>,
    pub coeff: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorPairSpec {
    pub left: ElementSpec,
    pub right: ElementSpec,
}

/// Element literals: matrices as nested arrays of [re, im] pairs,
/// polynomials as term lists, tensors as explicit pair sums.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementSpec {
    Matrix(Vec<Vec<[f64; 2]>>),
    Poly(Vec<PolyTermSpec>),
    Tensor { pairs: Vec<TensorPairSpec> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormEntrySpec {
    pub indices: Vec<usize>,
    pub value: ElementSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FormSpec {
    Named(String),
    Custom {
        #[serde(default)]
        degree: Option<usize>,
        entries: Vec<FormEntrySpec>,
    },
}

/// For tensor algebras the Hamiltonian splits into factor parts
/// H⁽¹⁾⊗I + I⊗H⁽²⁾; interactions are listed separately.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianSpec {
    Split { left: Box<ElementSpec>, right: Box<ElementSpec> },
    Simple(ElementSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionTermSpec {
    pub left: ElementSpec,
    pub right: ElementSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub point: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Density { density: Vec<Vec<[f64; 2]>> },
    Vector { vector: Vec<[f64; 2]> },
    Ensemble { ensemble: Vec<PointSpec> },
    Product { product: Box<ProductStateSpec> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductStateSpec {
    pub left: StateSpec,
    pub right: StateSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    pub t_end: f64,
    pub dt: f64,
    pub method: MethodSpec,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodSpec {
    Rk4,
    Exact,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrackSpec {
    Named { name: String, value: ElementSpec },
    Bare(ElementSpec),
}

/// Derivations serialize as {"inner": <element>} or {"field": [<poly>, ..]}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum DerivationSpec {
    #[serde(rename = "inner")]
    Inner(ElementSpec),
    #[serde(rename = "field")]
    Field(Vec<Vec<PolyTermSpec>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub algebra: AlgebraSpec,
    pub form: FormSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subalgebra: Option<Vec<DerivationSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<Vec<InteractionTermSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track: Option<Vec<TrackSpec>>,
}

pub fn parse_system_spec(text: &str) -> Result<SystemSpec> {
    serde_json::from_str(text).map_err(|e| {
        Error::SpecParse(format!("line {} column {}: {e}", e.line(), e.column()))
    })
}

pub fn build_algebra(spec: &AlgebraSpec, tolerance: Option<f64>) -> Result<AlgebraDescriptor> {
    let base = match spec {
        AlgebraSpec::Matrix { n } => AlgebraDescriptor::matrix(*n)?,
        AlgebraSpec::Polynomial { pairs } => AlgebraDescriptor::polynomial(*pairs)?,
        AlgebraSpec::Tensor { left, right } => AlgebraDescriptor::tensor(
            build_algebra(left, tolerance)?,
            build_algebra(right, tolerance)?,
        )?,
    };
    match tolerance {
        Some(t) => base.with_tolerance(t),
        None => Ok(base),
    }
}

fn complex(pair: &[f64; 2]) -> C64 {
    C64::new(pair[0], pair[1])
}

fn build_matrix(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<C64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::SpecParse("matrix literal must be square".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| complex(&rows[i][j])))
}

fn build_poly(nvars: usize, terms: &[PolyTermSpec]) -> Result<Polynomial> {
    Polynomial::from_terms(
        nvars,
        terms.iter().map(|t| (t.exponents.clone(), complex(&t.coeff))),
    )
    .map_err(Error::SpecParse)
}

pub fn build_element(algebra: &AlgebraDescriptor, spec: &ElementSpec) -> Result<AlgebraElement> {
    match spec {
        ElementSpec::Matrix(rows) => AlgebraElement::from_matrix(algebra, build_matrix(rows)?),
        ElementSpec::Poly(terms) => {
            let pairs = algebra.polynomial_pairs().ok_or_else(|| {
                Error::SpecParse("polynomial literal in a non-polynomial algebra".into())
            })?;
            AlgebraElement::from_poly(algebra, build_poly(2 * pairs, terms)?)
        }
        ElementSpec::Tensor { pairs } => {
            let (l, r) = algebra.tensor_factors().ok_or_else(|| {
                Error::SpecParse("tensor literal in a non-tensor algebra".into())
            })?;
            let mut acc = AlgebraElement::zero(algebra);
            for p in pairs {
                let le = build_element(&l, &p.left)?;
                let re = build_element(&r, &p.right)?;
                acc = acc.add(&AlgebraElement::tensor_into(algebra, &le, &re)?)?;
            }
            Ok(acc)
        }
    }
}

pub fn build_derivation(algebra: &AlgebraDescriptor, spec: &DerivationSpec) -> Result<Derivation> {
    match spec {
        DerivationSpec::Inner(e) => Derivation::inner(&build_element(algebra, e)?),
        DerivationSpec::Field(comps) => {
            let pairs = algebra.polynomial_pairs().ok_or_else(|| {
                Error::SpecParse("vector fields need a polynomial algebra".into())
            })?;
            let components = comps
                .iter()
                .map(|c| build_poly(2 * pairs, c))
                .collect::<Result<Vec<_>>>()?;
            Derivation::vector_field(algebra, components)
        }
    }
}

/// Build the factor symplectic structure described by a spec (algebra +
/// form + hbar + optional restriction to a derivation subalgebra).
pub fn build_structure(spec: &SystemSpec, tolerance: Option<f64>) -> Result<SymplecticStructure> {
    let algebra = build_algebra(&spec.algebra, tolerance)?;
    let base = match &spec.form {
        FormSpec::Named(name) => match name.as_str() {
            "canonical" => SymplecticStructure::canonical(&algebra)?,
            "quantum" => SymplecticStructure::quantum(&algebra, spec.hbar.unwrap_or(1.0))?,
            "classical" => SymplecticStructure::classical(&algebra)?,
            other => {
                return Err(Error::SpecParse(format!(
                    "unknown form {other:?}; expected canonical, quantum, classical, or entries"
                )))
            }
        },
        FormSpec::Custom { entries } => {
            let basis = crate::derivation::DerivationBasis::standard(&algebra)?;
            let built = entries
                .iter()
                .map(|e| Ok((e.indices.clone(), build_element(&algebra, &e.value)?)))
                .collect::<Result<Vec<_>>>()?;
            SymplecticStructure::custom(DifferentialForm::from_entries(basis, 2, built)?)?
        }
    };
    match &spec.subalgebra {
        None => Ok(base),
        Some(derivs) => {
            let gens = derivs
                .iter()
                .map(|d| build_derivation(&algebra, d))
                .collect::<Result<Vec<_>>>()?;
            SymplecticStructure::generalized_pair(&algebra, &gens, base.form())
        }
    }
}

pub fn build_state(algebra: &AlgebraDescriptor, spec: &StateSpec) -> Result<StateFunctional> {
    match spec {
        StateSpec::Density { density } => {
            StateFunctional::density(algebra, build_matrix(density)?)
        }
        StateSpec::Vector { vector } => {
            let v = DVector::from_iterator(vector.len(), vector.iter().map(complex));
            StateFunctional::pure_from_vector(algebra, v)
        }
        StateSpec::Ensemble { ensemble } => StateFunctional::ensemble(
            algebra,
            ensemble.iter().map(|p| (p.point.clone(), p.weight)).collect(),
        ),
        StateSpec::Product { product } => {
            let (l, r) = algebra.tensor_factors().ok_or_else(|| {
                Error::SpecParse("product states need a tensor algebra".into())
            })?;
            StateFunctional::product(
                build_state(&l, &product.left)?,
                build_state(&r, &product.right)?,
            )
        }
    }
}

pub fn build_evolution(spec: &EvolutionSpec) -> Result<EvolutionConfig> {
    let cfg = EvolutionConfig {
        t_end: spec.t_end,
        dt: spec.dt,
        method: match spec.method {
            MethodSpec::Rk4 => Method::Rk4,
            MethodSpec::Exact => Method::ExactConjugation,
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

/// A dynamics run built from a spec: either a single system or a coupled
/// tensor pair.
pub enum DynamicsModel {
    Simple(HamiltonianSystem),
    Coupled(CoupledSystem),
}

pub struct DynamicsSetup {
    pub model: DynamicsModel,
    pub state: StateFunctional,
    pub track: Vec<(String, AlgebraElement)>,
    pub config: EvolutionConfig,
}

/// Assemble a full dynamics run from a system spec. Tensor algebras are
/// built by coupling the two factor systems, which enforces the
/// classification gate.
pub fn build_dynamics(spec: &SystemSpec, tolerance: Option<f64>) -> Result<DynamicsSetup> {
    let algebra = build_algebra(&spec.algebra, tolerance)?;
    let evolution = spec
        .evolution
        .as_ref()
        .ok_or_else(|| Error::SpecParse("dynamics runs need an evolution block".into()))?;
    let config = build_evolution(evolution)?;
    let state_spec = spec
        .state
        .as_ref()
        .ok_or_else(|| Error::SpecParse("dynamics runs need an initial state".into()))?;
    let state = build_state(&algebra, state_spec)?;
    let track_specs = spec.track.clone().unwrap_or_default();
    let mut track = Vec::new();
    for (k, t) in track_specs.iter().enumerate() {
        let (name, value) = match t {
            TrackSpec::Named { name, value } => (name.clone(), value),
            TrackSpec::Bare(value) => (format!("obs{k}"), value),
        };
        track.push((name, build_element(&algebra, value)?));
    }

    match algebra.tensor_factors() {
        None => {
            let structure = Arc::new(build_structure(spec, tolerance)?);
            let h = match &spec.hamiltonian {
                Some(HamiltonianSpec::Simple(e)) => build_element(&algebra, e)?,
                Some(HamiltonianSpec::Split { .. }) => {
                    return Err(Error::SpecParse(
                        "split Hamiltonians require a tensor algebra".into(),
                    ))
                }
                None => return Err(Error::SpecParse("dynamics runs need a Hamiltonian".into())),
            };
            if spec.interaction.is_some() {
                return Err(Error::SpecParse(
                    "interaction terms require a tensor algebra".into(),
                ));
            }
            let system = HamiltonianSystem::new(structure, h)?;
            Ok(DynamicsSetup { model: DynamicsModel::Simple(system), state, track, config })
        }
        Some((l_alg, r_alg)) => {
            let (hl, hr) = match &spec.hamiltonian {
                Some(HamiltonianSpec::Split { left, right }) => {
                    (build_element(&l_alg, left)?, build_element(&r_alg, right)?)
                }
                _ => {
                    return Err(Error::SpecParse(
                        "tensor-algebra dynamics need a {left, right} Hamiltonian".into(),
                    ))
                }
            };
            let (ls, rs) = factor_structures(spec, &l_alg, &r_alg)?;
            let sys1 = HamiltonianSystem::new(Arc::new(ls), hl)?;
            let sys2 = HamiltonianSystem::new(Arc::new(rs), hr)?;
            let interaction = spec
                .interaction
                .clone()
                .unwrap_or_default()
                .iter()
                .map(|t| {
                    Ok((build_element(&l_alg, &t.left)?, build_element(&r_alg, &t.right)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let coupled = coupled_system(&sys1, &sys2, &interaction)?;
            Ok(DynamicsSetup { model: DynamicsModel::Coupled(coupled), state, track, config })
        }
    }
}

/// Factor structures for a tensor-algebra spec: the named form applies to
/// each factor according to its backend.
fn factor_structures(
    spec: &SystemSpec,
    l_alg: &AlgebraDescriptor,
    r_alg: &AlgebraDescriptor,
) -> Result<(SymplecticStructure, SymplecticStructure)> {
    let name = match &spec.form {
        FormSpec::Named(n) => n.clone(),
        FormSpec::Custom { .. } => {
            return Err(Error::SpecParse(
                "custom forms are not supported on tensor algebras; name the factor forms".into(),
            ))
        }
    };
    let hbar = spec.hbar.unwrap_or(1.0);
    // each factor gets its backend-natural structure: quantum (or canonical)
    // on matrix factors, classical on polynomial factors; the coupling gate
    // then decides whether the pair is permitted
    let build_one = |alg: &AlgebraDescriptor| -> Result<SymplecticStructure> {
        if alg.matrix_dim().is_some() {
            match name.as_str() {
                "canonical" => SymplecticStructure::canonical(alg),
                "quantum" | "classical" | "auto" => SymplecticStructure::quantum(alg, hbar),
                other => Err(Error::SpecParse(format!("unknown form {other:?}"))),
            }
        } else {
            match name.as_str() {
                "quantum" | "classical" | "canonical" | "auto" => {
                    SymplecticStructure::classical(alg)
                }
                other => Err(Error::SpecParse(format!("unknown form {other:?}"))),
            }
        }
    };
    Ok((build_one(l_alg)?, build_one(r_alg)?))
}

/// The canonical form as a standalone object for spec-driven tooling.
pub fn build_canonical_form(algebra: &AlgebraDescriptor) -> Result<DifferentialForm> {
    canonical_form(algebra)
}

/// Serialize an element back into the wire format, for report witnesses.
pub fn element_to_spec(e: &AlgebraElement) -> ElementSpec {
    use crate::algebra::Payload;
    match e.payload() {
        Payload::Matrix(m) => {
            let rows = (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect();
            ElementSpec::Matrix(rows)
        }
        Payload::Poly(p) => ElementSpec::Poly(
            p.terms()
                .map(|(e, c)| PolyTermSpec { exponents: e.clone(), coeff: [c.re, c.im] })
                .collect(),
        ),
        Payload::Tensor(pairs) => ElementSpec::Tensor {
            pairs: pairs
                .iter()
                .map(|(l, r)| TensorPairSpec {
                    left: element_to_spec(l),
                    right: element_to_spec(r),
                })
                .collect(),
        },
    }
}

pub fn element_to_json(e: &AlgebraElement) -> serde_json::Value {
    serde_json::to_value(element_to_spec(e)).expect("element serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_matrix_system_spec() {
        let text = r#"{
            "algebra": {"kind": "matrix", "n": 2},
            "form": "quantum",
            "hbar": 1.0,
            "hamiltonian": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-0.5, 0.0]]],
            "state": {"vector": [[1.0, 0.0], [1.0, 0.0]]},
            "evolution": {"t_end": 1.0, "dt": 0.001, "method": "rk4"},
            "track": [{"name": "sx", "value": [[[0.0,0.0],[1.0,0.0]],[[1.0,0.0],[0.0,0.0]]]}]
        }"#;
        let spec = parse_system_spec(text).unwrap();
        let setup = build_dynamics(&spec, None).unwrap();
        assert!(matches!(setup.model, DynamicsModel::Simple(_)));
        assert_eq!(setup.track.len(), 1);
        assert_eq!(setup.track[0].0, "sx");
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = r#"{
            "algebra": {"kind": "matrix", "n": 2},
            "form": "quantum",
            "bogus": 1
        }"#;
        assert!(matches!(parse_system_spec(text), Err(Error::SpecParse(_))));
    }

    #[test]
    fn polynomial_literals_round_trip() {
        let alg = AlgebraDescriptor::polynomial(1).unwrap();
        let spec = ElementSpec::Poly(vec![PolyTermSpec {
            exponents: vec![1, 0],
            coeff: [1.0, -2.0],
        }]);
        let e = build_element(&alg, &spec).unwrap();
        let q = AlgebraElement::coordinate_q(&alg, 0).unwrap();
        assert!(e.approx_eq(&q.scale(C64::new(1.0, -2.0))));
    }

    #[test]
    fn tensor_spec_builds_coupled_model() {
        let text = r#"{
            "algebra": {"kind": "tensor",
                        "left": {"kind": "matrix", "n": 2},
                        "right": {"kind": "matrix", "n": 2}},
            "form": "quantum",
            "hbar": 1.0,
            "hamiltonian": {"left": [[[0.5,0.0],[0.0,0.0]],[[0.0,0.0],[-0.5,0.0]]],
                             "right": [[[0.5,0.0],[0.0,0.0]],[[0.0,0.0],[-0.5,0.0]]]},
            "interaction": [{"left": [[[0.1,0.0],[0.0,0.0]],[[0.0,0.0],[-0.1,0.0]]],
                              "right": [[[0.1,0.0],[0.0,0.0]],[[0.0,0.0],[-0.1,0.0]]]}],
            "state": {"product": {"left": {"vector": [[1.0,0.0],[0.0,0.0]]},
                                    "right": {"vector": [[1.0,0.0],[1.0,0.0]]}}},
            "evolution": {"t_end": 0.5, "dt": 0.001, "method": "rk4"},
            "track": [[ [[0.0,0.0],[1.0,0.0]],[[1.0,0.0],[0.0,0.0]] ]]
        }"#;
        // a bare matrix literal cannot be tracked on a tensor algebra
        let spec = parse_system_spec(text).unwrap();
        assert!(build_dynamics(&spec, None).is_err());
    }

    #[test]
    fn mixed_tensor_spec_is_forbidden_at_coupling() {
        let text = r#"{
            "algebra": {"kind": "tensor",
                        "left": {"kind": "polynomial", "pairs": 1},
                        "right": {"kind": "matrix", "n": 2}},
            "form": "auto",
            "hbar": 1.0,
            "hamiltonian": {"left": [{"exponents": [2, 0], "coeff": [0.5, 0.0]}],
                             "right": [[[0.5,0.0],[0.0,0.0]],[[0.0,0.0],[-0.5,0.0]]]},
            "state": {"product": {"left": {"ensemble": [{"point": [1.0, 0.0], "weight": 1.0}]},
                                    "right": {"vector": [[1.0,0.0],[0.0,0.0]]}}},
            "evolution": {"t_end": 0.5, "dt": 0.001, "method": "rk4"}
        }"#;
        let spec = parse_system_spec(text).unwrap();
        assert!(matches!(build_dynamics(&spec, None), Err(Error::ForbiddenCoupling(_))));
    }
}
