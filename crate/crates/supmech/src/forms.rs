//! Differential forms: Z(A)-multilinear antisymmetric algebra-valued maps
//! over a derivation basis, with exterior product, exterior derivative, Lie
//! derivative, interior product, involution, and pull-back.
//!
//! Forms are stored only on strictly increasing basis index tuples; every
//! other evaluation is derived by antisymmetry and Z(A)-linearity.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::algebra::AlgebraElement;
use crate::derivation::{push_forward, Derivation, DerivationBasis};
use crate::error::{Error, Result};
use crate::morphism::AlgebraMorphism;

#[derive(Debug, Clone)]
pub struct DifferentialForm {
    degree: usize,
    basis: Arc<DerivationBasis>,
    coeffs: BTreeMap<Vec<usize>, AlgebraElement>,
}

/// All strictly increasing k-tuples over 0..m.
pub fn increasing_tuples(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if k > m {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] + 1 <= m - (k - i) {
                idx[i] += 1;
                for j in (i + 1)..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Sort indices, returning the permutation parity; `None` on repeats.
fn sort_with_sign(indices: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v: Vec<usize> = indices.to_vec();
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((v, sign))
}

impl DifferentialForm {
    pub fn zero(basis: Arc<DerivationBasis>, degree: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        if degree == 0 {
            coeffs.insert(Vec::new(), AlgebraElement::zero(basis.algebra()));
        }
        DifferentialForm { degree, basis, coeffs }
    }

    /// A degree-0 form, i.e. an algebra element.
    pub fn scalar(basis: Arc<DerivationBasis>, value: AlgebraElement) -> Result<Self> {
        if !value.algebra().same_algebra(basis.algebra()) {
            return Err(Error::AlgebraMismatch("form value outside the basis algebra".into()));
        }
        let mut coeffs = BTreeMap::new();
        coeffs.insert(Vec::new(), value);
        Ok(DifferentialForm { degree: 0, basis, coeffs })
    }

    pub fn from_entries(
        basis: Arc<DerivationBasis>,
        degree: usize,
        entries: impl IntoIterator<Item = (Vec<usize>, AlgebraElement)>,
    ) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (idx, value) in entries {
            if idx.len() != degree {
                return Err(Error::BasisMismatch("entry tuple length differs from degree".into()));
            }
            if idx.windows(2).any(|w| w[0] >= w[1]) || idx.iter().any(|&i| i >= basis.len()) {
                return Err(Error::BasisMismatch(
                    "entry tuples must be strictly increasing basis indices".into(),
                ));
            }
            if !value.algebra().same_algebra(basis.algebra()) {
                return Err(Error::AlgebraMismatch("form value outside the basis algebra".into()));
            }
            coeffs.insert(idx, value);
        }
        let mut form = DifferentialForm { degree, basis, coeffs };
        if degree == 0 && form.coeffs.is_empty() {
            form.coeffs.insert(Vec::new(), AlgebraElement::zero(form.basis.algebra()));
        }
        Ok(form)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> &Arc<DerivationBasis> {
        &self.basis
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &AlgebraElement)> {
        self.coeffs.iter()
    }

    /// Value on an arbitrary basis index tuple, extended by antisymmetry.
    pub fn entry(&self, indices: &[usize]) -> AlgebraElement {
        let zero = AlgebraElement::zero(self.basis.algebra());
        if indices.len() != self.degree {
            return zero;
        }
        match sort_with_sign(indices) {
            None => zero,
            Some((sorted, sign)) => match self.coeffs.get(&sorted) {
                Some(v) => v.scale(C64::new(sign, 0.0)),
                None => zero,
            },
        }
    }

    /// The degree-0 value.
    pub fn scalar_value(&self) -> Option<&AlgebraElement> {
        if self.degree == 0 {
            self.coeffs.get(&Vec::new())
        } else {
            None
        }
    }

    /// Max entry norm; entrywise residuals compare forms.
    pub fn norm(&self) -> f64 {
        self.coeffs.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        if self.degree != other.degree || !self.basis.compatible(&other.basis) {
            return Err(Error::BasisMismatch("adding forms of different degree or basis".into()));
        }
        let mut coeffs = self.coeffs.clone();
        for (k, v) in &other.coeffs {
            match coeffs.entry(k.clone()) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(v.clone());
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get().add(v)?;
                    e.insert(sum);
                }
            }
        }
        Ok(DifferentialForm { degree: self.degree, basis: self.basis.clone(), coeffs })
    }

    pub fn sub(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, z: C64) -> DifferentialForm {
        let coeffs = self.coeffs.iter().map(|(k, v)| (k.clone(), v.scale(z))).collect();
        DifferentialForm { degree: self.degree, basis: self.basis.clone(), coeffs }
    }

    pub fn approx_eq(&self, other: &DifferentialForm) -> bool {
        self.degree == other.degree
            && self.basis.compatible(&other.basis)
            && self
                .sub(other)
                .map(|d| d.norm() <= self.basis.algebra().tolerance())
                .unwrap_or(false)
    }

    /// Evaluate on arbitrary derivations by expanding each argument over the
    /// basis and extending Z(A)-multilinearly.
    pub fn evaluate(&self, args: &[&Derivation]) -> Result<AlgebraElement> {
        if args.len() != self.degree {
            return Err(Error::BasisMismatch(format!(
                "form of degree {} evaluated on {} derivations",
                self.degree,
                args.len()
            )));
        }
        if self.degree == 0 {
            return Ok(self.coeffs[&Vec::new()].clone());
        }
        let expansions: Vec<Vec<(usize, AlgebraElement)>> =
            args.iter().map(|x| self.basis.expand(x)).collect::<Result<_>>()?;
        if expansions.iter().any(|e| e.is_empty()) {
            return Ok(AlgebraElement::zero(self.basis.algebra()));
        }
        let mut acc = AlgebraElement::zero(self.basis.algebra());
        let mut combo = vec![0usize; self.degree];
        loop {
            let indices: Vec<usize> = combo
                .iter()
                .enumerate()
                .map(|(slot, &pick)| expansions[slot][pick].0)
                .collect();
            let base = self.entry(&indices);
            if base.norm() > 0.0 {
                let mut term = base;
                for (slot, &pick) in combo.iter().enumerate() {
                    term = expansions[slot][pick].1.mul(&term)?;
                }
                acc = acc.add(&term)?;
            }
            // advance the mixed-radix counter
            let mut slot = 0;
            loop {
                if slot == self.degree {
                    return Ok(acc);
                }
                combo[slot] += 1;
                if combo[slot] < expansions[slot].len() {
                    break;
                }
                combo[slot] = 0;
                slot += 1;
            }
        }
    }

    /// Exterior product, graded over the basis.
    pub fn wedge(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        if !self.basis.compatible(&other.basis) {
            return Err(Error::BasisMismatch("wedge of forms over different bases".into()));
        }
        let p = self.degree;
        let q = other.degree;
        let m = self.basis.len();
        let mut coeffs = BTreeMap::new();
        for tuple in increasing_tuples(m, p + q) {
            let mut acc = AlgebraElement::zero(self.basis.algebra());
            // shuffle sum: choose the positions fed to the left factor
            for positions in increasing_tuples(p + q, p) {
                let mut left_idx = Vec::with_capacity(p);
                let mut right_idx = Vec::with_capacity(q);
                let mut taken = vec![false; p + q];
                for &s in &positions {
                    left_idx.push(tuple[s]);
                    taken[s] = true;
                }
                for (s, &t) in tuple.iter().enumerate() {
                    if !taken[s] {
                        right_idx.push(t);
                    }
                }
                let inversions: usize = positions.iter().enumerate().map(|(i, &s)| s - i).sum();
                let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
                let term = self.entry(&left_idx).mul(&other.entry(&right_idx))?;
                acc = acc.add(&term.scale(C64::new(sign, 0.0)))?;
            }
            if acc.norm() > 0.0 {
                coeffs.insert(tuple, acc);
            }
        }
        let mut form = DifferentialForm { degree: p + q, basis: self.basis.clone(), coeffs };
        if form.degree == 0 && form.coeffs.is_empty() {
            form.coeffs.insert(Vec::new(), AlgebraElement::zero(form.basis.algebra()));
        }
        Ok(form)
    }

    /// Exterior derivative via the Koszul formula, with brackets re-expanded
    /// through the basis bracket table.
    pub fn exterior_derivative(&self) -> Result<DifferentialForm> {
        let p = self.degree;
        let m = self.basis.len();
        let mut coeffs = BTreeMap::new();
        for tuple in increasing_tuples(m, p + 1) {
            let mut acc = AlgebraElement::zero(self.basis.algebra());
            // Σ_i (−1)^i X_i( α(.. omit i ..) )
            for i in 0..=p {
                let mut omitted = tuple.clone();
                omitted.remove(i);
                let inner = self.entry(&omitted);
                if inner.norm() == 0.0 && p > 0 {
                    continue;
                }
                let applied = self.basis.elements()[tuple[i]].apply(&inner)?;
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                acc = acc.add(&applied.scale(C64::new(sign, 0.0)))?;
            }
            // Σ_{i<j} (−1)^{i+j} α([X_i, X_j], .. omit i, j ..)
            if p >= 1 {
                for i in 0..=p {
                    for j in (i + 1)..=p {
                        let expansion = self.basis.bracket_expansion(tuple[i], tuple[j]);
                        if expansion.is_empty() {
                            continue;
                        }
                        let mut rest = Vec::with_capacity(p - 1);
                        for (s, &t) in tuple.iter().enumerate() {
                            if s != i && s != j {
                                rest.push(t);
                            }
                        }
                        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                        for (k, c) in expansion {
                            let mut indices = Vec::with_capacity(p);
                            indices.push(*k);
                            indices.extend_from_slice(&rest);
                            let base = self.entry(&indices);
                            if base.norm() == 0.0 {
                                continue;
                            }
                            let term = c.mul(&base)?.scale(C64::new(sign, 0.0));
                            acc = acc.add(&term)?;
                        }
                    }
                }
            }
            if acc.norm() > 0.0 {
                coeffs.insert(tuple, acc);
            }
        }
        Ok(DifferentialForm { degree: p + 1, basis: self.basis.clone(), coeffs })
    }

    /// Lie derivative along an arbitrary derivation in the basis span.
    pub fn lie_derivative(&self, y: &Derivation) -> Result<DifferentialForm> {
        if self.degree == 0 {
            let value = y.apply(&self.coeffs[&Vec::new()])?;
            return DifferentialForm::scalar(self.basis.clone(), value);
        }
        let p = self.degree;
        let m = self.basis.len();
        let mut coeffs = BTreeMap::new();
        // bracket expansions [Y, X_a] computed once per basis element
        let mut moved: Vec<Option<Vec<(usize, AlgebraElement)>>> = vec![None; m];
        for tuple in increasing_tuples(m, p) {
            let base = self.entry(&tuple);
            let mut acc = y.apply(&base)?;
            for i in 0..p {
                let a = tuple[i];
                if moved[a].is_none() {
                    let br = y.lie_bracket(&self.basis.elements()[a])?;
                    moved[a] = Some(self.basis.expand(&br)?);
                }
                for (k, c) in moved[a].as_ref().unwrap() {
                    let mut indices = tuple.clone();
                    indices[i] = *k;
                    let inner = self.entry(&indices);
                    if inner.norm() == 0.0 {
                        continue;
                    }
                    acc = acc.sub(&c.mul(&inner)?)?;
                }
            }
            if acc.norm() > 0.0 {
                coeffs.insert(tuple, acc);
            }
        }
        Ok(DifferentialForm { degree: p, basis: self.basis.clone(), coeffs })
    }

    /// Interior product i_X; on degree 0 it is the zero form.
    pub fn interior_product(&self, x: &Derivation) -> Result<DifferentialForm> {
        if self.degree == 0 {
            return Ok(DifferentialForm::zero(self.basis.clone(), 0));
        }
        let p = self.degree;
        let m = self.basis.len();
        let expansion = self.basis.expand(x)?;
        let mut coeffs = BTreeMap::new();
        for tuple in increasing_tuples(m, p - 1) {
            let mut acc = AlgebraElement::zero(self.basis.algebra());
            for (a, c) in &expansion {
                let mut indices = Vec::with_capacity(p);
                indices.push(*a);
                indices.extend_from_slice(&tuple);
                let inner = self.entry(&indices);
                if inner.norm() == 0.0 {
                    continue;
                }
                acc = acc.add(&c.mul(&inner)?)?;
            }
            if acc.norm() > 0.0 {
                coeffs.insert(tuple, acc);
            }
        }
        let mut form = DifferentialForm { degree: p - 1, basis: self.basis.clone(), coeffs };
        if form.degree == 0 && form.coeffs.is_empty() {
            form.coeffs.insert(Vec::new(), AlgebraElement::zero(form.basis.algebra()));
        }
        Ok(form)
    }

    /// The involution ω*(X_1,..,X_p) = [ω(X*_1,..,X*_p)]*.
    pub fn star(&self) -> Result<DifferentialForm> {
        if self.degree == 0 {
            return DifferentialForm::scalar(self.basis.clone(), self.coeffs[&Vec::new()].star());
        }
        let p = self.degree;
        let m = self.basis.len();
        let starred: Vec<Derivation> = self.basis.elements().iter().map(|x| x.star()).collect();
        let mut coeffs = BTreeMap::new();
        for tuple in increasing_tuples(m, p) {
            let args: Vec<&Derivation> = tuple.iter().map(|&i| &starred[i]).collect();
            let value = self.evaluate(&args)?.star();
            if value.norm() > 0.0 {
                coeffs.insert(tuple, value);
            }
        }
        Ok(DifferentialForm { degree: p, basis: self.basis.clone(), coeffs })
    }

    /// Pull-back along a *-isomorphism onto a basis of the source algebra:
    /// (Φ*ω)(X_1,..,X_p) = Φ⁻¹[ω(Φ_*X_1,..,Φ_*X_p)].
    pub fn pull_back(
        &self,
        phi: &AlgebraMorphism,
        source_basis: &Arc<DerivationBasis>,
    ) -> Result<DifferentialForm> {
        if !phi.target().same_algebra(self.basis.algebra()) {
            return Err(Error::NotIsomorphism("morphism target is not the form algebra".into()));
        }
        if !phi.source().same_algebra(source_basis.algebra()) {
            return Err(Error::NotIsomorphism("morphism source is not the basis algebra".into()));
        }
        if self.degree == 0 {
            let value = phi.apply_inverse(&self.coeffs[&Vec::new()])?;
            return DifferentialForm::scalar(source_basis.clone(), value);
        }
        let p = self.degree;
        let m = source_basis.len();
        let pushed: Vec<Derivation> = source_basis
            .elements()
            .iter()
            .map(|x| push_forward(phi, x))
            .collect::<Result<_>>()?;
        let mut coeffs = BTreeMap::new();
        for tuple in increasing_tuples(m, p) {
            let args: Vec<&Derivation> = tuple.iter().map(|&i| &pushed[i]).collect();
            let value = phi.apply_inverse(&self.evaluate(&args)?)?;
            if value.norm() > 0.0 {
                coeffs.insert(tuple, value);
            }
        }
        Ok(DifferentialForm { degree: p, basis: source_basis.clone(), coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::matrices::pauli;
    use crate::algebra::AlgebraDescriptor;

    fn mat2() -> AlgebraDescriptor {
        AlgebraDescriptor::matrix(2).unwrap()
    }

    fn poly1() -> AlgebraDescriptor {
        AlgebraDescriptor::polynomial(1).unwrap()
    }

    #[test]
    fn zero_form_differential_is_application() {
        // (dA)(X) = X(A)
        let alg = mat2();
        let basis = DerivationBasis::standard(&alg).unwrap();
        let [sx, _, sz] = pauli();
        let a = AlgebraElement::from_matrix(&alg, sz.clone()).unwrap();
        let da = DifferentialForm::scalar(basis.clone(), a.clone())
            .unwrap()
            .exterior_derivative()
            .unwrap();
        let dx = Derivation::inner(&AlgebraElement::from_matrix(&alg, sx).unwrap()).unwrap();
        let lhs = da.evaluate(&[&dx]).unwrap();
        let rhs = dx.apply(&a).unwrap();
        assert!(lhs.approx_eq(&rhs));
    }

    #[test]
    fn coordinate_wedge_value() {
        // (dq ∧ dp)(∂q, ∂p) = 1
        let alg = poly1();
        let basis = DerivationBasis::standard(&alg).unwrap();
        let q = AlgebraElement::coordinate_q(&alg, 0).unwrap();
        let p = AlgebraElement::coordinate_p(&alg, 0).unwrap();
        let dq = DifferentialForm::scalar(basis.clone(), q).unwrap().exterior_derivative().unwrap();
        let dp = DifferentialForm::scalar(basis.clone(), p).unwrap().exterior_derivative().unwrap();
        let w = dq.wedge(&dp).unwrap();
        let xq = Derivation::coordinate(&alg, 0).unwrap();
        let xp = Derivation::coordinate(&alg, 1).unwrap();
        let one = AlgebraElement::unit(&alg);
        assert!(w.evaluate(&[&xq, &xp]).unwrap().approx_eq(&one));
        assert!(w.evaluate(&[&xp, &xq]).unwrap().approx_eq(&one.scale(C64::new(-1.0, 0.0))));
        // antisymmetry: same argument twice
        assert!(w.evaluate(&[&xq, &xq]).unwrap().is_zero());
    }

    #[test]
    fn wedge_with_zero_form_is_left_multiplication() {
        let alg = mat2();
        let basis = DerivationBasis::standard(&alg).unwrap();
        let [sx, sy, _] = pauli();
        let a = AlgebraElement::from_matrix(&alg, sx).unwrap();
        let f = DifferentialForm::scalar(basis.clone(), a.clone()).unwrap();
        let b = AlgebraElement::from_matrix(&alg, sy).unwrap();
        let beta = DifferentialForm::scalar(basis.clone(), b.clone())
            .unwrap()
            .exterior_derivative()
            .unwrap();
        let w = f.wedge(&beta).unwrap();
        for i in 0..basis.len() {
            let expect = a.mul(&beta.entry(&[i])).unwrap();
            assert!(w.entry(&[i]).approx_eq(&expect));
        }
    }

    #[test]
    fn d_squared_vanishes() {
        let alg = mat2();
        let basis = DerivationBasis::standard(&alg).unwrap();
        let mut rng = crate::rng::case_rng(3, "d-squared");
        for _ in 0..5 {
            let entries: Vec<(Vec<usize>, AlgebraElement)> = (0..basis.len())
                .map(|i| (vec![i], crate::rng::random_element(&mut rng, &alg, 2)))
                .collect();
            let alpha = DifferentialForm::from_entries(basis.clone(), 1, entries).unwrap();
            let dda = alpha.exterior_derivative().unwrap().exterior_derivative().unwrap();
            assert!(dda.norm() < 1e-10, "d^2 residual {}", dda.norm());
        }
    }

    #[test]
    fn cartan_homotopy_identity() {
        // i_X d + d i_X = L_X on a random 1-form over the polynomial backend
        let alg = poly1();
        let basis = DerivationBasis::standard(&alg).unwrap();
        let mut rng = crate::rng::case_rng(5, "cartan");
        let entries: Vec<(Vec<usize>, AlgebraElement)> = (0..basis.len())
            .map(|i| (vec![i], crate::rng::random_element(&mut rng, &alg, 2)))
            .collect();
        let alpha = DifferentialForm::from_entries(basis.clone(), 1, entries).unwrap();
        let comps = vec![
            crate::rng::random_polynomial(&mut rng, 2, 2, 3),
            crate::rng::random_polynomial(&mut rng, 2, 2, 3),
        ];
        let x = Derivation::vector_field(&alg, comps).unwrap();
        let lhs = alpha
            .exterior_derivative()
            .unwrap()
            .interior_product(&x)
            .unwrap()
            .add(&alpha.interior_product(&x).unwrap().exterior_derivative().unwrap())
            .unwrap();
        let rhs = alpha.lie_derivative(&x).unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm() < 1e-9);
    }

    #[test]
    fn star_is_involutive() {
        let alg = mat2();
        let basis = DerivationBasis::standard(&alg).unwrap();
        let mut rng = crate::rng::case_rng(9, "star");
        let entries: Vec<(Vec<usize>, AlgebraElement)> = increasing_tuples(basis.len(), 2)
            .into_iter()
            .map(|t| (t, crate::rng::random_element(&mut rng, &alg, 2)))
            .collect();
        let omega = DifferentialForm::from_entries(basis.clone(), 2, entries).unwrap();
        let back = omega.star().unwrap().star().unwrap();
        assert!(back.approx_eq(&omega));
    }

    #[test]
    fn pull_back_along_identity_is_identity() {
        let alg = mat2();
        let basis = DerivationBasis::standard(&alg).unwrap();
        let mut rng = crate::rng::case_rng(13, "pullback");
        let entries: Vec<(Vec<usize>, AlgebraElement)> = increasing_tuples(basis.len(), 2)
            .into_iter()
            .map(|t| (t, crate::rng::random_element(&mut rng, &alg, 2)))
            .collect();
        let omega = DifferentialForm::from_entries(basis.clone(), 2, entries).unwrap();
        let id = AlgebraMorphism::identity(&alg).unwrap();
        let pulled = omega.pull_back(&id, &basis).unwrap();
        assert!(pulled.approx_eq(&omega));
    }
}
