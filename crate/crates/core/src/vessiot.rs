//! Vector fields with exact tangent propagation, the solvable Vessiot frames,
//! structure-constant verification, the Cauchy characteristic field and the
//! superposition map.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::ScalarFn;
use crate::jet::{Jet, MAX_GENERATORS};

/// Guard used for the `1/z₃`, `1/z₄`, `1/q₄`, `1/p₃` denominators.
pub const FRAME_EPS: f64 = 1e-12;

type FieldFn = dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync;
type ScalarFieldFn = dyn Fn(&[Jet]) -> Result<Jet> + Send + Sync;

/// A vector field on `ℝⁿ` evaluated on jets.
#[derive(Clone)]
pub struct VectorField {
    pub name: String,
    pub dim: usize,
    f: Arc<FieldFn>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField({}, dim {})", self.name, self.dim)
    }
}

/// A scalar function on `ℝⁿ` evaluated on jets.
#[derive(Clone)]
pub struct ScalarField {
    pub name: String,
    f: Arc<ScalarFieldFn>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.name)
    }
}

fn max_order(p: &[Jet]) -> usize {
    p.iter().map(|j| j.order()).max().unwrap_or(0)
}

/// `p + ε v` with a fresh generator `ε`.
fn displace(p: &[Jet], v: &[Jet]) -> Result<Vec<Jet>> {
    if max_order(p).max(max_order(v)) >= MAX_GENERATORS {
        return Err(Error::TooDeep);
    }
    Ok(p.iter().zip(v).map(|(a, b)| a.extend(*b)).collect())
}

impl ScalarField {
    pub fn new(name: impl Into<String>, f: impl Fn(&[Jet]) -> Result<Jet> + Send + Sync + 'static) -> Self {
        ScalarField {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// The coordinate function `p ↦ p_i`.
    pub fn coordinate(name: impl Into<String>, i: usize) -> Self {
        ScalarField::new(name, move |p| Ok(p[i]))
    }

    pub fn eval_jet(&self, p: &[Jet]) -> Result<Jet> {
        (self.f)(p)
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        Ok(self.eval_jet(&constants(p))?.value())
    }
}

fn constants(p: &[f64]) -> Vec<Jet> {
    p.iter().map(|&v| Jet::constant(v)).collect()
}

impl VectorField {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        f: impl Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    ) -> Self {
        VectorField {
            name: name.into(),
            dim,
            f: Arc::new(f),
        }
    }

    /// `∂/∂p_i`.
    pub fn coordinate(name: impl Into<String>, dim: usize, i: usize) -> Self {
        VectorField::new(name, dim, move |_| {
            let mut v = vec![Jet::constant(0.0); dim];
            v[i] = Jet::constant(1.0);
            Ok(v)
        })
    }

    pub fn eval_jet(&self, p: &[Jet]) -> Result<Vec<Jet>> {
        (self.f)(p)
    }

    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.eval_jet(&constants(p))?.iter().map(|j| j.value()).collect())
    }

    /// Directional derivative of this field along `v` at `p`: `DX(p)·v`.
    pub fn derivative_along(&self, p: &[Jet], v: &[Jet]) -> Result<Vec<Jet>> {
        let q = displace(p, v)?;
        Ok(self.eval_jet(&q)?.iter().map(|j| j.tangent()).collect())
    }

    /// The Lie bracket `[X, Y] = DY·X − DX·Y` as a lazily evaluated field.
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        let (x, y) = (self.clone(), other.clone());
        VectorField::new(format!("[{},{}]", self.name, other.name), self.dim, move |p| {
            let xv = x.eval_jet(p)?;
            let yv = y.eval_jet(p)?;
            let dy = y.derivative_along(p, &xv)?;
            let dx = x.derivative_along(p, &yv)?;
            Ok(dy.iter().zip(&dx).map(|(a, b)| *a - *b).collect())
        })
    }

    /// `g·X` for a scalar field `g`.
    pub fn scaled(&self, g: &ScalarField) -> VectorField {
        let (x, g) = (self.clone(), g.clone());
        VectorField::new(format!("({})*{}", g.name, self.name), self.dim, move |p| {
            let s = g.eval_jet(p)?;
            Ok(x.eval_jet(p)?.into_iter().map(|c| c * s).collect())
        })
    }

    /// `Σ cᵢ Xᵢ` with constant coefficients.
    pub fn combination(name: impl Into<String>, fields: &[VectorField], coeffs: &[f64]) -> VectorField {
        let fields = fields.to_vec();
        let coeffs = coeffs.to_vec();
        let dim = fields[0].dim;
        VectorField::new(name, dim, move |p| {
            let mut acc = vec![Jet::constant(0.0); dim];
            for (f, c) in fields.iter().zip(&coeffs) {
                if *c == 0.0 {
                    continue;
                }
                for (a, v) in acc.iter_mut().zip(f.eval_jet(p)?) {
                    *a += v * *c;
                }
            }
            Ok(acc)
        })
    }

    /// Lie derivative `X(φ)` of a scalar field, as a jet over `p`'s generators.
    pub fn apply(&self, phi: &ScalarField, p: &[Jet]) -> Result<Jet> {
        let v = self.eval_jet(p)?;
        let q = displace(p, &v)?;
        Ok(phi.eval_jet(&q)?.tangent())
    }

    /// `X(φ)` as a new scalar field (so it can be differentiated again).
    pub fn lie(&self, phi: &ScalarField) -> ScalarField {
        let (x, phi) = (self.clone(), phi.clone());
        ScalarField::new(format!("{}({})", self.name, phi.name), move |p| x.apply(&phi, p))
    }
}

/// `[X, Y](p)`.
pub fn bracket(x: &VectorField, y: &VectorField, p: &[f64]) -> Result<Vec<f64>> {
    x.bracket(y).eval(p)
}

fn guard(name: &'static str, v: Jet) -> Result<()> {
    if v.value().abs() <= FRAME_EPS || !v.value().is_finite() {
        return Err(Error::DivisionByZero {
            quantity: name,
            value: v.value(),
        });
    }
    Ok(())
}

fn field4(name: &str, f: impl Fn(&[Jet]) -> Result<[Jet; 4]> + Send + Sync + 'static) -> VectorField {
    VectorField::new(name, 4, move |p| Ok(f(p)?.to_vec()))
}

fn zero() -> Jet {
    Jet::constant(0.0)
}

fn one() -> Jet {
    Jet::constant(1.0)
}

/// The right-invariant frame `{R₁, R₂, R₃, R₄}` on `(z₁, z₂, z₃, z₄)`.
pub fn r_frame() -> Vec<VectorField> {
    named_r_frame(["R1", "R2", "R3", "R4"])
}

/// Tangential characteristic symmetries of the first characteristic system;
/// the same fields as [`r_frame`] under the names `e₁..e₄`.
pub fn e1_frame() -> Vec<VectorField> {
    named_r_frame(["e1", "e2", "e3", "e4"])
}

fn named_r_frame(names: [&str; 4]) -> Vec<VectorField> {
    vec![
        field4(names[0], |z| Ok([zero(), -z[3], zero(), zero()])),
        field4(names[1], |z| Ok([zero(), zero(), zero(), -z[3]])),
        field4(names[2], |z| {
            guard("z4", z[3])?;
            Ok([(z[0] + z[1]) / z[3], zero(), z[2] / z[3], one()])
        }),
        field4(names[3], |_| Ok([one(), -one(), zero(), zero()])),
    ]
}

/// Tangential characteristic symmetries of the second characteristic system.
pub fn e2_frame() -> Vec<VectorField> {
    vec![
        field4("f1", |z| Ok([z[2], zero(), zero(), zero()])),
        field4("f2", |z| Ok([zero(), zero(), z[2], zero()])),
        field4("f3", |z| {
            guard("z3", z[2])?;
            Ok([zero(), (z[0] + z[1]) / z[2], one(), z[3] / z[2]])
        }),
        field4("f4", |_| Ok([-one(), one(), zero(), zero()])),
    ]
}

/// Sign convention under which a bracket table is stated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BracketConvention {
    /// `[X, Y] = DY·X − DX·Y`
    Standard,
    /// `[X, Y] = DX·Y − DY·X`
    Reversed,
}

/// Structure constants `[Xᵢ, Xⱼ] = Σ c^k_{ij} X_k` stored for `i < j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureTable {
    pub name: String,
    pub dim: usize,
    pub convention: BracketConvention,
    entries: BTreeMap<(usize, usize), Vec<f64>>,
}

impl StructureTable {
    pub fn new(name: impl Into<String>, dim: usize, convention: BracketConvention) -> Self {
        StructureTable {
            name: name.into(),
            dim,
            convention,
            entries: BTreeMap::new(),
        }
    }

    /// Record `[X_i, X_j] = Σ c X_k` (zero-based indices).
    pub fn with(mut self, i: usize, j: usize, terms: &[(usize, f64)]) -> Self {
        assert!(i != j && i < self.dim && j < self.dim);
        let mut c = vec![0.0; self.dim];
        for &(k, v) in terms {
            c[k] += v;
        }
        if i < j {
            self.entries.insert((i, j), c);
        } else {
            self.entries.insert((j, i), c.iter().map(|v| -v).collect());
        }
        self
    }

    /// Coefficients of `[X_i, X_j]`, antisymmetric by construction.
    pub fn get(&self, i: usize, j: usize) -> Vec<f64> {
        if i == j {
            return vec![0.0; self.dim];
        }
        let (a, b, s) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        self.entries
            .get(&(a, b))
            .map(|c| c.iter().map(|v| s * v).collect())
            .unwrap_or_else(|| vec![0.0; self.dim])
    }

    /// Bracket of two coefficient vectors.
    pub fn bracket_vec(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let w = a[i] * b[j];
                if w == 0.0 || i == j {
                    continue;
                }
                for (o, c) in out.iter_mut().zip(self.get(i, j)) {
                    *o += w * c;
                }
            }
        }
        out
    }

    /// Largest Jacobi-identity defect over all basis triples.
    pub fn jacobi_defect(&self) -> f64 {
        let e = |i: usize| {
            let mut v = vec![0.0; self.dim];
            v[i] = 1.0;
            v
        };
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    let a = self.bracket_vec(&e(i), &self.bracket_vec(&e(j), &e(k)));
                    let b = self.bracket_vec(&e(j), &self.bracket_vec(&e(k), &e(i)));
                    let c = self.bracket_vec(&e(k), &self.bracket_vec(&e(i), &e(j)));
                    for t in 0..self.dim {
                        worst = worst.max((a[t] + b[t] + c[t]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Dimensions of the derived series `g ⊃ [g,g] ⊃ …` until it stabilises.
    pub fn derived_series(&self) -> Vec<usize> {
        let mut basis: Vec<Vec<f64>> = (0..self.dim)
            .map(|i| {
                let mut v = vec![0.0; self.dim];
                v[i] = 1.0;
                v
            })
            .collect();
        let mut dims = vec![self.dim];
        loop {
            let mut cands = Vec::new();
            for a in 0..basis.len() {
                for b in a + 1..basis.len() {
                    cands.push(self.bracket_vec(&basis[a], &basis[b]));
                }
            }
            let next = independent_subset(&cands, 1e-12);
            let d = next.len();
            let stalled = d == *dims.last().unwrap();
            dims.push(d);
            if d == 0 || stalled {
                break;
            }
            basis = next;
        }
        dims
    }

    /// The algebra `𝔯` in the standard convention.
    pub fn r_table() -> Self {
        StructureTable::new("r", 4, BracketConvention::Standard)
            .with(0, 1, &[(0, 1.0)])
            .with(0, 2, &[(3, -1.0)])
            .with(1, 2, &[(2, 1.0)])
    }

    /// Table printed for `e₁..e₄`; it holds in the reversed convention.
    pub fn e1_table() -> Self {
        StructureTable::new("e1", 4, BracketConvention::Reversed)
            .with(0, 1, &[(0, -1.0)])
            .with(0, 2, &[(3, 1.0)])
            .with(1, 2, &[(2, -1.0)])
    }

    /// Table printed for `f₁..f₄`; it holds in the reversed convention.
    pub fn e2_table() -> Self {
        StructureTable::new("e2", 4, BracketConvention::Reversed)
            .with(0, 1, &[(0, 1.0)])
            .with(0, 2, &[(3, -1.0)])
            .with(1, 2, &[(2, 1.0)])
    }
}

/// Greedy selection of linearly independent vectors (relative SVD cutoff).
fn independent_subset(cands: &[Vec<f64>], rel_tol: f64) -> Vec<Vec<f64>> {
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    for c in cands {
        let mut trial = chosen.clone();
        trial.push(c.clone());
        if rank(&trial, rel_tol) > chosen.len() {
            chosen = trial;
        }
    }
    chosen
}

pub(crate) fn rank(vectors: &[Vec<f64>], rel_tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let n = vectors[0].len();
    let m = DMatrix::from_fn(n, vectors.len(), |r, c| vectors[c][r]);
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * smax).count()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest defect `|[X_i, X_j](p) − Σ c^k_{ij} X_k(p)|` over `samples`.
pub fn verify_structure(frame: &[VectorField], table: &StructureTable, samples: &[Vec<f64>]) -> Result<f64> {
    assert_eq!(frame.len(), table.dim);
    let sign = match table.convention {
        BracketConvention::Standard => 1.0,
        BracketConvention::Reversed => -1.0,
    };
    let mut worst: f64 = 0.0;
    for p in samples {
        let values: Vec<Vec<f64>> = frame.iter().map(|x| x.eval(p)).collect::<Result<_>>()?;
        for i in 0..frame.len() {
            for j in i + 1..frame.len() {
                let got: Vec<f64> = bracket(&frame[i], &frame[j], p)?.iter().map(|v| sign * v).collect();
                let c = table.get(i, j);
                let mut want = vec![0.0; p.len()];
                for (k, ck) in c.iter().enumerate() {
                    for (w, v) in want.iter_mut().zip(&values[k]) {
                        *w += ck * v;
                    }
                }
                worst = worst.max(max_abs_diff(&got, &want));
            }
        }
    }
    Ok(worst)
}

/// Largest `|[a_i, b_j](p)|` over all pairs and samples.
pub fn verify_commuting(a: &[VectorField], b: &[VectorField], samples: &[Vec<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in samples {
        for x in a {
            for y in b {
                let v = bracket(x, y, p)?;
                worst = worst.max(v.iter().fold(0.0, |m, c| m.max(c.abs())));
            }
        }
    }
    Ok(worst)
}

/// Largest Jacobi defect of numerically evaluated brackets over basis triples.
pub fn jacobi_defect_numeric(frame: &[VectorField], samples: &[Vec<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let n = frame.len();
    for p in samples {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (x, y, z) = (&frame[i], &frame[j], &frame[k]);
                    let a = x.bracket(&y.bracket(z)).eval(p)?;
                    let b = y.bracket(&z.bracket(x)).eval(p)?;
                    let c = z.bracket(&x.bracket(y)).eval(p)?;
                    for t in 0..p.len() {
                        worst = worst.max((a[t] + b[t] + c[t]).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// `ξ = ∂_y − R₁ − k₂(y) R₂ + k₁(y) R₃` on `(y, z₁, z₂, z₃, z₄)`.
pub fn cauchy_field(k1: &ScalarFn, k2: &ScalarFn) -> VectorField {
    let (k1, k2) = (k1.clone(), k2.clone());
    VectorField::new("cauchy", 5, move |p| {
        let (y, z1, z2, z3, z4) = (p[0], p[1], p[2], p[3], p[4]);
        guard("z4", z4)?;
        let a = k1.jet(y);
        let b = k2.jet(y);
        Ok(vec![one(), a * (z1 + z2) / z4, z4, a * z3 / z4, b * z4 + a])
    })
}

/// The superposition map on jets (no guards).
pub fn superpose_jet(q: &[Jet; 4], p: &[Jet; 4]) -> [Jet; 4] {
    let [q1, q2, q3, q4] = *q;
    let [p1, p2, p3, p4] = *p;
    let z1 = (-q1 + q1 * p3 + q4 * p1 - q2 + q2 * p3 + q1 * q4) / q4;
    let z2 = (q4 * p1 + q4 * p2 + q2 * p3 - p1 - p2 + p3 * p2) / p3;
    let m = q4 - 1.0 + p3;
    [z1, z2, q3 * m / q4, p4 * m / p3]
}

/// `π(q, p)`, the first four components of the superposition formula.
pub fn superpose(q: [f64; 4], p: [f64; 4]) -> Result<[f64; 4]> {
    if q[3].abs() <= FRAME_EPS {
        return Err(Error::DivisionByZero {
            quantity: "q4",
            value: q[3],
        });
    }
    if p[2].abs() <= FRAME_EPS {
        return Err(Error::DivisionByZero {
            quantity: "p3",
            value: p[2],
        });
    }
    let qj = q.map(Jet::constant);
    let pj = p.map(Jet::constant);
    Ok(superpose_jet(&qj, &pj).map(|j| j.value()))
}

/// The candidate identity element of the superposition group.
pub const IDENTITY: [f64; 4] = [0.0, 0.0, 1.0, 1.0];

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn samples(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                (0..4)
                    .map(|i| {
                        let v: f64 = rng.random_range(0.5..2.0);
                        if i >= 2 && rng.random_bool(0.5) {
                            -v
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn bracket_examples() {
        let r = r_frame();
        let z = [1.0, 1.0, 1.0, 2.0];
        assert_eq!(bracket(&r[0], &r[0], &z).unwrap(), vec![0.0; 4]);
        assert_eq!(bracket(&r[0], &r[1], &z).unwrap(), vec![0.0, -2.0, 0.0, 0.0]);
        let b23 = bracket(&r[1], &r[2], &z).unwrap();
        let r3 = r[2].eval(&z).unwrap();
        for (a, b) in b23.iter().zip(&r3) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn tables_are_certified() {
        let s = samples(50, 3);
        assert!(verify_structure(&r_frame(), &StructureTable::r_table(), &s).unwrap() < 1e-12);
        assert!(verify_structure(&e1_frame(), &StructureTable::e1_table(), &s).unwrap() < 1e-12);
        assert!(verify_structure(&e2_frame(), &StructureTable::e2_table(), &s).unwrap() < 1e-12);
        assert!(verify_commuting(&e1_frame(), &e2_frame(), &s).unwrap() < 1e-12);
        assert!(verify_commuting(&r_frame(), &e2_frame(), &s).unwrap() < 1e-12);
    }

    #[test]
    fn printed_appendix_table_fails_in_standard_convention() {
        let mut t = StructureTable::e1_table();
        t.convention = BracketConvention::Standard;
        assert!(verify_structure(&e1_frame(), &t, &samples(5, 1)).unwrap() > 0.1);
    }

    #[test]
    fn table_algebra() {
        let r = StructureTable::r_table();
        assert_eq!(r.jacobi_defect(), 0.0);
        assert_eq!(r.derived_series(), vec![4, 3, 1, 0]);
        assert_eq!(r.get(1, 0), vec![-1.0, 0.0, 0.0, 0.0]);
        assert!(jacobi_defect_numeric(&r_frame(), &samples(10, 9)).unwrap() < 1e-10);
    }

    #[test]
    fn cauchy_field_components() {
        let k1 = ScalarFn::polynomial(&[0.0, 0.0, -1.0]);
        let k2 = ScalarFn::new("1/y", |y| y.recip());
        let xi = cauchy_field(&k1, &k2);
        let p = [2.0, 0.5, 1.5, -0.5, 3.0];
        let v = xi.eval(&p).unwrap();
        let (a, b) = (-4.0, 0.5);
        let want = [1.0, a * 2.0 / 3.0, 3.0, a * -0.5 / 3.0, b * 3.0 + a];
        for (x, y) in v.iter().zip(want) {
            assert!((x - y).abs() < 1e-14);
        }
        // same field assembled from the frame
        let r = r_frame();
        let z = &p[1..];
        let comb: Vec<f64> = (0..4)
            .map(|i| -r[0].eval(z).unwrap()[i] - b * r[1].eval(z).unwrap()[i] + a * r[2].eval(z).unwrap()[i])
            .collect();
        for i in 0..4 {
            assert!((comb[i] - v[i + 1]).abs() < 1e-14);
        }
        let zero = ScalarFn::constant(0.0);
        let t = cauchy_field(&zero, &zero).eval(&p).unwrap();
        assert_eq!(t, vec![1.0, 0.0, 3.0, 0.0, 0.0]);
        assert!(matches!(
            xi.eval(&[1.0, 1.0, 1.0, 1.0, 0.0]),
            Err(Error::DivisionByZero { quantity: "z4", .. })
        ));
    }

    #[test]
    fn superpose_examples() {
        assert_eq!(
            superpose([1.0, 1.0, 1.0, 2.0], [1.0, 1.0, 1.0, 1.0]).unwrap(),
            [2.0, 4.0, 1.0, 2.0]
        );
        assert!(matches!(
            superpose([1.0, 1.0, 1.0, 0.0], IDENTITY),
            Err(Error::DivisionByZero { quantity: "q4", .. })
        ));
    }

    fn guarded() -> impl Strategy<Value = [f64; 4]> {
        (-2.0f64..2.0, -2.0f64..2.0, 0.3f64..2.0, 0.3f64..2.0).prop_map(|(a, b, c, d)| [a, b, c, d])
    }

    proptest! {
        #[test]
        fn identity_is_two_sided(q in guarded()) {
            let l = superpose(IDENTITY, q).unwrap();
            let r = superpose(q, IDENTITY).unwrap();
            for i in 0..4 {
                prop_assert!((l[i] - q[i]).abs() <= 1e-12);
                prop_assert!((r[i] - q[i]).abs() <= 1e-12);
            }
        }

        #[test]
        fn superposition_is_associative(q in guarded(), p in guarded(), r in guarded()) {
            let a = superpose(superpose(q, p).unwrap(), r);
            let b = superpose(q, superpose(p, r).unwrap());
            if let (Ok(a), Ok(b)) = (a, b) {
                for i in 0..4 {
                    prop_assert!((a[i] - b[i]).abs() <= 1e-10 * (1.0 + a[i].abs()));
                }
            }
        }

        #[test]
        fn brackets_are_antisymmetric(z in guarded()) {
            let r = r_frame();
            for i in 0..4 {
                for j in 0..4 {
                    let a = bracket(&r[i], &r[j], &z).unwrap();
                    let b = bracket(&r[j], &r[i], &z).unwrap();
                    for k in 0..4 { prop_assert!((a[k] + b[k]).abs() < 1e-14); }
                }
            }
        }
    }
}
