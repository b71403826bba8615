//! Truncated composite Hilbert spaces: spin and Fock factors, Kronecker
//! embedding, basis states and occupancies.
//!
//! Basis ordering is the Kronecker order of the layout's factors, first factor
//! most significant. A spin factor orders its levels `(up, down)`; a Fock
//! factor orders them `0, 1, .., dim - 1`.

use std::fmt;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{self, C64, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Spin,
    Fock,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub label: String,
    pub kind: FactorKind,
    pub dim: usize,
}

impl Factor {
    pub fn spin(label: &str) -> Self {
        Factor {
            label: label.to_string(),
            kind: FactorKind::Spin,
            dim: 2,
        }
    }

    pub fn fock(label: &str, dim: usize) -> Self {
        Factor {
            label: label.to_string(),
            kind: FactorKind::Fock,
            dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceLayout {
    factors: Vec<Factor>,
    total_dim: usize,
}

impl SpaceLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidLayout("no factors".into()));
        }
        for (i, f) in factors.iter().enumerate() {
            match f.kind {
                FactorKind::Spin if f.dim != 2 => {
                    return Err(Error::InvalidLayout(format!(
                        "spin factor `{}` must have dimension 2, got {}",
                        f.label, f.dim
                    )))
                }
                FactorKind::Fock if f.dim < 2 => {
                    return Err(Error::InvalidLayout(format!(
                        "Fock factor `{}` must have dimension >= 2, got {}",
                        f.label, f.dim
                    )))
                }
                _ => {}
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::InvalidLayout(format!(
                    "duplicate label `{}`",
                    f.label
                )));
            }
        }
        let total_dim = factors.iter().map(|f| f.dim).product();
        Ok(SpaceLayout { factors, total_dim })
    }

    /// Single-factor layout used for local operators before embedding.
    pub fn single(factor: Factor) -> Result<Self> {
        Self::new(vec![factor])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.total_dim
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| Error::UnknownFactor(label.to_string()))
    }

    pub fn factor(&self, label: &str) -> Result<&Factor> {
        Ok(&self.factors[self.position(label)?])
    }

    pub fn has(&self, label: &str) -> bool {
        self.position(label).is_ok()
    }

    /// Product of the dimensions of the factors after `position`.
    fn stride(&self, position: usize) -> usize {
        self.factors[position + 1..].iter().map(|f| f.dim).product()
    }

    /// Flat index of a product basis state.
    pub fn index_of(&self, levels: &[Level]) -> Result<usize> {
        if levels.len() != self.factors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.factors.len(),
                found: levels.len(),
            });
        }
        let mut index = 0;
        for (f, level) in self.factors.iter().zip(levels) {
            index = index * f.dim + level.index_in(f)?;
        }
        Ok(index)
    }

    /// Per-factor level indices of a flat basis index.
    pub fn levels_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (k, f) in self.factors.iter().enumerate().rev() {
            out[k] = index % f.dim;
            index /= f.dim;
        }
        out
    }

    /// Human-readable label of a flat basis index, e.g. `|up,0,1>`.
    pub fn ket_label(&self, index: usize) -> String {
        let parts: Vec<String> = self
            .levels_of(index)
            .iter()
            .zip(&self.factors)
            .map(|(&l, f)| match f.kind {
                FactorKind::Spin if l == 0 => "up".to_string(),
                FactorKind::Spin => "down".to_string(),
                FactorKind::Fock => l.to_string(),
            })
            .collect();
        format!("|{}>", parts.join(","))
    }

    /// Copy of the layout with every Fock factor truncated at `dim`.
    pub fn with_fock_dim(&self, dim: usize) -> Result<Self> {
        Self::new(
            self.factors
                .iter()
                .map(|f| match f.kind {
                    FactorKind::Fock => Factor::fock(&f.label, dim),
                    FactorKind::Spin => f.clone(),
                })
                .collect(),
        )
    }
}

/// Level of one factor in a product basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Up,
    Down,
    Fock(usize),
}

impl Level {
    fn index_in(self, f: &Factor) -> Result<usize> {
        match (self, f.kind) {
            (Level::Up, FactorKind::Spin) => Ok(0),
            (Level::Down, FactorKind::Spin) => Ok(1),
            (Level::Fock(n), FactorKind::Fock) if n < f.dim => Ok(n),
            (Level::Fock(n), FactorKind::Fock) => Err(Error::InvalidLabel {
                factor: f.label.clone(),
                detail: format!("Fock level {n} outside truncation {}", f.dim),
            }),
            (l, _) => Err(Error::InvalidLabel {
                factor: f.label.clone(),
                detail: format!("{l:?} does not fit a {:?} factor", f.kind),
            }),
        }
    }
}

/// Dense operator on a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    layout: SpaceLayout,
    entries: Array2<C64>,
}

impl OperatorMatrix {
    pub fn new(layout: SpaceLayout, entries: Array2<C64>) -> Result<Self> {
        let n = layout.dim();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if entries.nrows() != n {
                    entries.nrows()
                } else {
                    entries.ncols()
                },
            });
        }
        Ok(OperatorMatrix { layout, entries })
    }

    pub fn zeros(layout: &SpaceLayout) -> Self {
        let n = layout.dim();
        OperatorMatrix {
            layout: layout.clone(),
            entries: Array2::zeros((n, n)),
        }
    }

    pub fn identity(layout: &SpaceLayout) -> Self {
        OperatorMatrix {
            layout: layout.clone(),
            entries: linalg::identity(layout.dim()),
        }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    /// `<bra| A |ket>` for basis labels.
    pub fn element(&self, bra: &[Level], ket: &[Level]) -> Result<C64> {
        Ok(self.entries[(self.layout.index_of(bra)?, self.layout.index_of(ket)?)])
    }

    fn check_layout(&self, other: &SpaceLayout) -> Result<()> {
        if &self.layout == other {
            Ok(())
        } else {
            Err(Error::LayoutMismatch)
        }
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            layout: self.layout.clone(),
            entries: linalg::adjoint(&self.entries),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        OperatorMatrix {
            layout: self.layout.clone(),
            entries: self.entries.mapv(|z| z * c),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_layout(&other.layout)?;
        Ok(OperatorMatrix {
            layout: self.layout.clone(),
            entries: &self.entries + &other.entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_layout(&other.layout)?;
        Ok(OperatorMatrix {
            layout: self.layout.clone(),
            entries: &self.entries - &other.entries,
        })
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_layout(&other.layout)?;
        Ok(OperatorMatrix {
            layout: self.layout.clone(),
            entries: self.entries.dot(&other.entries),
        })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        linalg::max_abs_diff(self.entries.view(), linalg::adjoint(&self.entries).view())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(self.entries.view())
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check_layout(&state.layout)?;
        Ok(StateVector {
            layout: self.layout.clone(),
            amplitudes: self.entries.dot(&state.amplitudes),
        })
    }

    pub fn expectation(&self, state: &StateVector) -> Result<C64> {
        let applied = self.apply(state)?;
        Ok(linalg::inner(state.amplitudes.view(), applied.amplitudes.view()))
    }

    /// Submatrix `<basis_i| A |basis_j>` over the listed basis states.
    pub fn restrict(&self, basis: &[Vec<Level>]) -> Result<Array2<C64>> {
        let idx = basis
            .iter()
            .map(|b| self.layout.index_of(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Array2::from_shape_fn((idx.len(), idx.len()), |(i, j)| {
            self.entries[(idx[i], idx[j])]
        }))
    }
}

impl fmt::Display for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.entries.rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Normalized amplitude vector on a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: SpaceLayout,
    amplitudes: Array1<C64>,
}

impl StateVector {
    pub fn new(layout: SpaceLayout, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(StateVector { layout, amplitudes })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Array1<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        linalg::vec_norm(self.amplitudes.view())
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        Ok(linalg::inner(self.amplitudes.view(), other.amplitudes.view()))
    }

    /// Normalized superposition `sum_k c_k |state_k>`.
    pub fn superpose(terms: &[(C64, &StateVector)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty superposition".into()))?;
        let mut amps = Array1::zeros(first.layout.dim());
        for (c, s) in terms {
            if s.layout != first.layout {
                return Err(Error::LayoutMismatch);
            }
            amps = amps + s.amplitudes.mapv(|z| z * c);
        }
        let n = linalg::vec_norm(amps.view());
        if n == 0.0 {
            return Err(Error::InvalidParameter("superposition vanishes".into()));
        }
        Ok(StateVector {
            layout: first.layout.clone(),
            amplitudes: amps.mapv(|z| z / n),
        })
    }
}

/// Ladder operator `a` on a single Fock factor: `<n-1|a|n> = sqrt(n)`.
pub fn fock_lowering(dim: usize) -> Result<OperatorMatrix> {
    if dim < 2 {
        return Err(Error::Domain {
            name: "fock_dim",
            value: dim as f64,
            requirement: "must be at least 2",
        });
    }
    let layout = SpaceLayout::single(Factor::fock("mode", dim))?;
    let mut m = Array2::zeros((dim, dim));
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    OperatorMatrix::new(layout, m)
}

/// Single-spin operators in `(up, down)` order.
///
/// The axis labels follow the source convention with the quantization field
/// along x: `sigma_x = |up><up| - |down><down|` and
/// `sigma_z = sigma_minus + sigma_plus`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOps {
    pub lowering: OperatorMatrix,
    pub raising: OperatorMatrix,
    pub sigma_z: OperatorMatrix,
    pub sigma_x: OperatorMatrix,
}

pub fn spin_ops() -> SpinOps {
    let layout = SpaceLayout::single(Factor::spin("spin")).expect("valid spin layout");
    let op = |m: [[C64; 2]; 2]| {
        OperatorMatrix::new(
            layout.clone(),
            Array2::from_shape_fn((2, 2), |(i, j)| m[i][j]),
        )
        .expect("2x2")
    };
    SpinOps {
        // |down><up|
        lowering: op([[ZERO, ZERO], [ONE, ZERO]]),
        // |up><down|
        raising: op([[ZERO, ONE], [ZERO, ZERO]]),
        sigma_z: op([[ZERO, ONE], [ONE, ZERO]]),
        sigma_x: op([[ONE, ZERO], [ZERO, -ONE]]),
    }
}

/// Kronecker embedding of a single-factor operator into `layout` at the
/// factor named `label`, identity elsewhere.
pub fn embed(op: &OperatorMatrix, layout: &SpaceLayout, label: &str) -> Result<OperatorMatrix> {
    let local = match op.layout.factors() {
        [f] => f,
        fs => {
            return Err(Error::InvalidLayout(format!(
                "embed expects a single-factor operator, got {} factors",
                fs.len()
            )))
        }
    };
    let pos = layout.position(label)?;
    let target = &layout.factors()[pos];
    if target.dim != local.dim {
        return Err(Error::DimensionMismatch {
            expected: target.dim,
            found: local.dim,
        });
    }
    if target.kind != local.kind {
        return Err(Error::InvalidLayout(format!(
            "cannot embed a {:?} operator into {:?} factor `{label}`",
            local.kind, target.kind
        )));
    }
    let d = target.dim;
    let right = layout.stride(pos);
    let left = layout.dim() / (d * right);
    let n = layout.dim();
    let mut m = Array2::zeros((n, n));
    for l in 0..left {
        for r in 0..right {
            for i in 0..d {
                for j in 0..d {
                    let v = op.entries[(i, j)];
                    if v != ZERO {
                        m[((l * d + i) * right + r, (l * d + j) * right + r)] = v;
                    }
                }
            }
        }
    }
    OperatorMatrix::new(layout.clone(), m)
}

/// Lowering operator of the Fock factor `label`, embedded in `layout`.
pub fn lowering_on(layout: &SpaceLayout, label: &str) -> Result<OperatorMatrix> {
    let f = layout.factor(label)?;
    if f.kind != FactorKind::Fock {
        return Err(Error::InvalidLayout(format!("`{label}` is not a Fock factor")));
    }
    embed(&fock_lowering(f.dim)?, layout, label)
}

/// Spin lowering operator `|down><up|` of the spin factor `label`.
pub fn spin_lowering_on(layout: &SpaceLayout, label: &str) -> Result<OperatorMatrix> {
    embed(&spin_ops().lowering, layout, label)
}

/// Number operator `a^dagger a` of the Fock factor `label`.
pub fn number_on(layout: &SpaceLayout, label: &str) -> Result<OperatorMatrix> {
    let a = lowering_on(layout, label)?;
    a.adjoint().matmul(&a)
}

/// Projector `|up><up|` of the spin factor `label`.
pub fn spin_up_projector_on(layout: &SpaceLayout, label: &str) -> Result<OperatorMatrix> {
    let s = spin_lowering_on(layout, label)?;
    s.adjoint().matmul(&s)
}

pub fn basis_state(layout: &SpaceLayout, levels: &[Level]) -> Result<StateVector> {
    let idx = layout.index_of(levels)?;
    let mut amps = Array1::zeros(layout.dim());
    amps[idx] = ONE;
    StateVector::new(layout.clone(), amps)
}

/// `|<phi|psi>|^2`.
pub fn occupancy(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    Ok(phi.inner(psi)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn jc_layout(n: usize) -> SpaceLayout {
        SpaceLayout::new(vec![Factor::spin("spin1"), Factor::fock("a", n)]).unwrap()
    }

    #[test]
    fn layout_validation() {
        assert!(SpaceLayout::new(vec![]).is_err());
        assert!(SpaceLayout::new(vec![Factor::fock("a", 1)]).is_err());
        assert!(SpaceLayout::new(vec![Factor {
            label: "s".into(),
            kind: FactorKind::Spin,
            dim: 3
        }])
        .is_err());
        assert!(SpaceLayout::new(vec![Factor::spin("x"), Factor::fock("x", 3)]).is_err());
        let l = jc_layout(4);
        assert_eq!(l.dim(), 8);
        assert_eq!(l.index_of(&[Level::Down, Level::Fock(3)]).unwrap(), 7);
        assert_eq!(l.levels_of(7), vec![1, 3]);
        assert_eq!(l.ket_label(1), "|up,1>");
    }

    #[test]
    fn fock_lowering_ladder() {
        assert!(fock_lowering(1).is_err());
        let a = fock_lowering(3).unwrap();
        let l = a.layout().clone();
        let ket = |n| basis_state(&l, &[Level::Fock(n)]).unwrap();
        assert_eq!(a.apply(&ket(1)).unwrap(), ket(0));
        let a2 = a.apply(&ket(2)).unwrap();
        assert!((a2.amplitudes()[1] - C64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(a.apply(&ket(0)).unwrap().norm(), 0.0);
        let n = a.adjoint().matmul(&a).unwrap();
        for k in 0..3 {
            assert!((n.get(k, k) - C64::new(k as f64, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn truncated_commutator_is_identity_below_edge() {
        let dim = 6;
        let a = fock_lowering(dim).unwrap();
        let c = a.commutator(&a.adjoint()).unwrap();
        for i in 0..dim - 1 {
            for j in 0..dim - 1 {
                let expect = if i == j { ONE } else { ZERO };
                assert!((c.get(i, j) - expect).norm() < 1e-14);
            }
        }
        // the top level carries the truncation artifact 1 - dim
        assert!((c.get(dim - 1, dim - 1) - C64::new(1.0 - dim as f64, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn spin_operator_definitions() {
        let s = spin_ops();
        let l = s.raising.layout().clone();
        let up = basis_state(&l, &[Level::Up]).unwrap();
        let down = basis_state(&l, &[Level::Down]).unwrap();
        assert_eq!(s.raising.apply(&down).unwrap(), up);
        assert_eq!(s.raising.apply(&up).unwrap().norm(), 0.0);
        assert_eq!(s.lowering.apply(&up).unwrap(), down);
        assert_eq!(s.sigma_z, s.lowering.add(&s.raising).unwrap());
        let id = OperatorMatrix::identity(&l);
        assert_eq!(s.sigma_x.matmul(&s.sigma_x).unwrap(), id);
        assert_eq!(s.sigma_z.matmul(&s.sigma_z).unwrap(), id);
        assert_eq!(s.sigma_x.expectation(&up).unwrap(), ONE);
    }

    #[test]
    fn embedding_dimensions_and_commutation() {
        let l = SpaceLayout::new(vec![
            Factor::spin("spin1"),
            Factor::fock("a", 3),
            Factor::fock("b", 4),
        ])
        .unwrap();
        let sp = embed(&spin_ops().raising, &l, "spin1").unwrap();
        assert_eq!(sp.dim(), 24);
        let a = lowering_on(&l, "a").unwrap();
        let b = lowering_on(&l, "b").unwrap();
        assert_eq!(a.matmul(&b).unwrap(), b.matmul(&a).unwrap());
        assert_eq!(sp.matmul(&a).unwrap(), a.matmul(&sp).unwrap());

        let n_a = number_on(&l, "a").unwrap();
        let ket = basis_state(&l, &[Level::Up, Level::Fock(1), Level::Fock(0)]).unwrap();
        assert!((n_a.expectation(&ket).unwrap() - ONE).norm() < 1e-15);
    }

    #[test]
    fn embedding_errors() {
        let l = jc_layout(3);
        assert_eq!(
            embed(&spin_ops().raising, &l, "b"),
            Err(Error::UnknownFactor("b".into()))
        );
        assert!(matches!(
            embed(&fock_lowering(4).unwrap(), &l, "a"),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(embed(&fock_lowering(2).unwrap(), &l, "spin1").is_err());
        let full = lowering_on(&l, "a").unwrap();
        assert!(embed(&full, &l, "a").is_err());
    }

    #[test]
    fn mixed_layout_arithmetic_is_rejected() {
        let a = lowering_on(&jc_layout(3), "a").unwrap();
        let b = lowering_on(&jc_layout(4), "a").unwrap();
        assert_eq!(a.add(&b), Err(Error::LayoutMismatch));
        assert_eq!(a.matmul(&b), Err(Error::LayoutMismatch));
    }

    #[test]
    fn basis_states_and_occupancy() {
        let l = jc_layout(3);
        let d0 = basis_state(&l, &[Level::Down, Level::Fock(0)]).unwrap();
        assert_eq!(d0.amplitudes()[l.index_of(&[Level::Down, Level::Fock(0)]).unwrap()], ONE);
        assert_eq!(d0.norm(), 1.0);
        let u1 = basis_state(&l, &[Level::Up, Level::Fock(1)]).unwrap();
        assert_eq!(occupancy(&d0, &u1).unwrap(), 0.0);
        assert_eq!(occupancy(&d0, &d0).unwrap(), 1.0);
        let sup = StateVector::superpose(&[(ONE, &d0), (ONE, &u1)]).unwrap();
        assert!((occupancy(&sup, &d0).unwrap() - 0.5).abs() < 1e-15);
        assert!(basis_state(&l, &[Level::Down, Level::Fock(3)]).is_err());
        assert!(basis_state(&l, &[Level::Fock(0), Level::Fock(0)]).is_err());
        let other = basis_state(&jc_layout(4), &[Level::Up, Level::Fock(0)]).unwrap();
        assert_eq!(occupancy(&d0, &other), Err(Error::LayoutMismatch));
    }

    fn random_state(layout: &SpaceLayout, seed: &[f64]) -> StateVector {
        let amps = Array1::from_shape_fn(layout.dim(), |k| {
            C64::new(seed[(2 * k) % seed.len()], seed[(2 * k + 1) % seed.len()])
        });
        let n = linalg::vec_norm(amps.view());
        StateVector::new(layout.clone(), amps.mapv(|z| z / n)).unwrap()
    }

    /// Power iteration on `A^dagger A`.
    fn spectral_norm(m: &Array2<C64>) -> f64 {
        let g = linalg::adjoint(m).dot(m);
        let mut v = Array1::from_shape_fn(m.ncols(), |k| {
            C64::new(1.0 + 0.37 * k as f64, 0.1 * k as f64)
        });
        let mut lambda = 0.0;
        for _ in 0..5000 {
            let w = g.dot(&v);
            let n = linalg::vec_norm(w.view());
            if n == 0.0 {
                return 0.0;
            }
            lambda = n / linalg::vec_norm(v.view());
            v = w.mapv(|z| z / n);
        }
        lambda.sqrt()
    }

    proptest! {
        #[test]
        fn occupancy_over_complete_basis_sums_to_one(
            seed in proptest::collection::vec(-1.0f64..1.0, 7..40),
            n in 2usize..6,
        ) {
            prop_assume!(seed.iter().any(|x| x.abs() > 1e-3));
            let l = SpaceLayout::new(vec![Factor::spin("s"), Factor::fock("a", n), Factor::spin("t")]).unwrap();
            let psi = random_state(&l, &seed);
            let mut total = 0.0;
            for idx in 0..l.dim() {
                let mut amps = Array1::zeros(l.dim());
                amps[idx] = ONE;
                let phi = StateVector::new(l.clone(), amps).unwrap();
                let p = occupancy(&psi, &phi).unwrap();
                prop_assert!((0.0..=1.0 + 1e-15).contains(&p));
                total += p;
            }
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn embedding_preserves_hermiticity_and_norm(
            re in proptest::collection::vec(-2.0f64..2.0, 9),
            im in proptest::collection::vec(-2.0f64..2.0, 9),
        ) {
            let local_layout = SpaceLayout::single(Factor::fock("mode", 3)).unwrap();
            let m = Array2::from_shape_fn((3, 3), |(i, j)| C64::new(re[3 * i + j], im[3 * i + j]));
            let h = OperatorMatrix::new(local_layout, &m + &linalg::adjoint(&m)).unwrap();
            let l = SpaceLayout::new(vec![Factor::spin("s"), Factor::fock("a", 3), Factor::fock("b", 2)]).unwrap();
            let e = embed(&h, &l, "a").unwrap();
            prop_assert!(e.is_hermitian(1e-12));
            let (local, embedded) = (spectral_norm(h.entries()), spectral_norm(e.entries()));
            prop_assert!((local - embedded).abs() <= 1e-6 * local.max(1.0));
            prop_assert!(
                (linalg::norm_one(e.entries().view()) - linalg::norm_one(h.entries().view())).abs() < 1e-12
            );
        }
    }
}
