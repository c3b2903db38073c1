//! Pointwise diagnostics of distributions given by frames: derived flags,
//! Cauchy characteristic spaces, Goursat recognition and the contact
//! coordinates built from fundamental functions.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::vessiot::{ScalarField, VectorField};

/// Relative singular-value cutoff.
pub const RANK_TOL: f64 = 1e-9;
/// Absolute floor below which a singular value is always zero.
const ABS_FLOOR: f64 = 1e-10;

fn svd_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let cut = (rel_tol * smax).max(ABS_FLOOR);
    sv.iter().filter(|s| **s > cut).count()
}

fn columns(vs: &[Vec<f64>], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, vs.len(), |r, c| vs[c][r])
}

pub fn rank_of(vs: &[Vec<f64>], n: usize, rel_tol: f64) -> usize {
    svd_rank(&columns(vs, n), rel_tol)
}

/// `dim(A ∩ B) = dim A + dim B − dim(A + B)` for spans of vectors.
pub fn intersection_dim(a: &[Vec<f64>], b: &[Vec<f64>], n: usize, rel_tol: f64) -> usize {
    let both: Vec<Vec<f64>> = a.iter().chain(b).cloned().collect();
    rank_of(a, n, rel_tol) + rank_of(b, n, rel_tol) - rank_of(&both, n, rel_tol)
}

/// Largest distance of a unit vector of `sub` from `span(sup)`.
pub fn containment_residual(sub: &[Vec<f64>], sup: &[Vec<f64>], n: usize) -> f64 {
    let q = orthonormal(sup, n);
    sub.iter()
        .map(|v| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let r = project_off(&q, v);
            r.iter().map(|x| x * x).sum::<f64>().sqrt() / norm
        })
        .fold(0.0, f64::max)
}

fn orthonormal(vs: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    if vs.is_empty() {
        return Vec::new();
    }
    let m = columns(vs, n);
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested");
    let r = svd_rank(&columns(vs, n), RANK_TOL);
    (0..r).map(|c| u.column(c).iter().cloned().collect()).collect()
}

fn project_off(q: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let mut r = v.to_vec();
    for b in q {
        let d: f64 = b.iter().zip(&r).map(|(x, y)| x * y).sum();
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= d * bi;
        }
    }
    r
}

/// Bases of `D ⊂ D' ⊂ D'' ⊂ …` as vector fields, greedily selected so
/// they are independent at `p`.
pub fn derived_flag_bases(frame: &[VectorField], p: &[f64], rel_tol: f64) -> Result<Vec<Vec<VectorField>>> {
    let n = p.len();
    let mut levels: Vec<Vec<VectorField>> = Vec::new();
    let (basis, _) = select(frame.to_vec(), p, rel_tol)?;
    levels.push(basis);
    loop {
        let cur = levels.last().unwrap().clone();
        if cur.len() == n {
            break;
        }
        let mut cands = cur.clone();
        for i in 0..cur.len() {
            for j in i + 1..cur.len() {
                cands.push(cur[i].bracket(&cur[j]));
            }
        }
        let (next, _) = select(cands, p, rel_tol)?;
        if next.len() == cur.len() {
            break;
        }
        levels.push(next);
    }
    Ok(levels)
}

fn select(cands: Vec<VectorField>, p: &[f64], rel_tol: f64) -> Result<(Vec<VectorField>, Vec<Vec<f64>>)> {
    let n = p.len();
    let mut chosen = Vec::new();
    let mut vecs: Vec<Vec<f64>> = Vec::new();
    for f in cands {
        let v = f.eval(p)?;
        let mut trial = vecs.clone();
        trial.push(v.clone());
        if rank_of(&trial, n, rel_tol) > vecs.len() {
            vecs = trial;
            chosen.push(f);
        }
    }
    Ok((chosen, vecs))
}

/// Dimensions `m₀ < m₁ < … < m_k` of the derived flag at `p`.
pub fn derived_flag(frame: &[VectorField], p: &[f64], rel_tol: f64) -> Result<Vec<usize>> {
    Ok(derived_flag_bases(frame, p, rel_tol)?.iter().map(|l| l.len()).collect())
}

/// `ch(D)` at `p` as vectors, for a basis of `D` independent at `p`.
pub fn cauchy_space(basis: &[VectorField], p: &[f64], rel_tol: f64) -> Result<Vec<Vec<f64>>> {
    let n = p.len();
    let r = basis.len();
    let d: Vec<Vec<f64>> = basis.iter().map(|f| f.eval(p)).collect::<Result<_>>()?;
    let q = orthonormal(&d, n);
    // column i: (P[Dᵢ, Dⱼ](p))ⱼ stacked
    let mut m = DMatrix::zeros(n * r, r);
    for i in 0..r {
        for j in 0..r {
            if i == j {
                continue;
            }
            let b = basis[i].bracket(&basis[j]).eval(p)?;
            let pb = project_off(&q, &b);
            for (k, v) in pb.iter().enumerate() {
                m[(j * n + k, i)] = *v;
            }
        }
    }
    let rank = svd_rank(&m, rel_tol);
    if rank == r {
        return Ok(Vec::new());
    }
    // kernel from the right singular vectors of the smallest values
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let mut kernel: Vec<Vec<f64>> = order
        .iter()
        .take(r - rank)
        .map(|&row| {
            let c: Vec<f64> = vt.row(row).iter().cloned().collect();
            (0..n).map(|k| (0..r).map(|i| c[i] * d[i][k]).sum()).collect()
        })
        .collect();
    // nalgebra returns min(rows, cols) singular vectors; when the structure
    // matrix is short the remaining kernel directions are missing
    if kernel.len() < r - rank {
        kernel = full_kernel(&m, &d, n, r, rank);
    }
    Ok(kernel)
}

fn full_kernel(m: &DMatrix<f64>, d: &[Vec<f64>], n: usize, r: usize, rank: usize) -> Vec<Vec<f64>> {
    let mtm = m.transpose() * m;
    let eig = mtm.symmetric_eigen();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .iter()
        .take(r - rank)
        .map(|&c| {
            let col = eig.eigenvectors.column(c);
            (0..n).map(|k| (0..r).map(|i| col[i] * d[i][k]).sum()).collect()
        })
        .collect()
}

/// The derived-flag table and its Goursat verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagReport {
    pub frame: String,
    pub probes: usize,
    pub m: Vec<usize>,
    /// `χʲ = dim ch D⁽ʲ⁾`, `j = 0..k−1`
    pub chi: Vec<usize>,
    /// `χʲ_{j−1} = dim(D⁽ʲ⁻¹⁾ ∩ ch D⁽ʲ⁾)`, `j = 1..k−1`
    pub chi_prev: Vec<usize>,
    pub k: usize,
    /// Number of dependent variables of each order `1..k`.
    pub signature: Vec<usize>,
    pub goursat: bool,
    pub verdict: String,
}

struct Table {
    m: Vec<usize>,
    chi: Vec<usize>,
    chi_prev: Vec<usize>,
}

fn table_at(frame: &[VectorField], p: &[f64], rel_tol: f64) -> Result<Table> {
    let n = p.len();
    let levels = derived_flag_bases(frame, p, rel_tol)?;
    let m: Vec<usize> = levels.iter().map(|l| l.len()).collect();
    let k = m.len() - 1;
    let mut chi = Vec::with_capacity(k);
    let mut chs = Vec::with_capacity(k);
    for level in levels.iter().take(k) {
        let ch = cauchy_space(level, p, rel_tol)?;
        chi.push(ch.len());
        chs.push(ch);
    }
    let mut chi_prev = Vec::new();
    for j in 1..k {
        let prev: Vec<Vec<f64>> = levels[j - 1].iter().map(|f| f.eval(p)).collect::<Result<_>>()?;
        chi_prev.push(intersection_dim(&prev, &chs[j], n, rel_tol));
    }
    Ok(Table { m, chi, chi_prev })
}

/// Derived-flag table agreed on by every probe, with the verdict; no
/// constraint failure is raised here.
pub fn flag_report(name: &str, frame: &[VectorField], probes: &[Vec<f64>], rel_tol: f64) -> Result<FlagReport> {
    if probes.is_empty() {
        return Err(Error::Config("at least one probe point is required".into()));
    }
    let first = table_at(frame, &probes[0], rel_tol)?;
    for (i, p) in probes.iter().enumerate().skip(1) {
        let t = table_at(frame, p, rel_tol)?;
        if t.m != first.m || t.chi != first.chi || t.chi_prev != first.chi_prev {
            return Err(Error::NonGenericPoint(format!(
                "probe {i}: m={:?} chi={:?} vs m={:?} chi={:?}",
                t.m, t.chi, first.m, first.chi
            )));
        }
    }
    let Table { m, chi, chi_prev } = first;
    let k = m.len() - 1;
    let failure = first_failure(&m, &chi, &chi_prev);
    let mut signature: Vec<usize> = (1..k).map(|j| chi[j].saturating_sub(chi_prev[j - 1])).collect();
    if k >= 1 {
        signature.push(m[k] - m[k - 1]);
    }
    let (goursat, verdict) = match (&failure, signature.last()) {
        (Some((row, d)), _) => (false, format!("not Goursat: row {row}: {d}")),
        (None, None) => (false, "not Goursat: integrable distribution".to_string()),
        (None, Some(&top)) if top > 1 => (false, "undetermined (resolvent unchecked)".to_string()),
        (None, Some(_)) => {
            let s: Vec<String> = signature.iter().map(|v| v.to_string()).collect();
            (true, format!("C⟨{}⟩", s.join(",")))
        }
    };
    Ok(FlagReport {
        frame: name.to_string(),
        probes: probes.len(),
        m,
        chi,
        chi_prev,
        k,
        signature,
        goursat,
        verdict,
    })
}

fn first_failure(m: &[usize], chi: &[usize], chi_prev: &[usize]) -> Option<(usize, String)> {
    let k = m.len() - 1;
    for j in 0..k {
        let want = (2 * m[j]) as isize - m[j + 1] as isize - 1;
        if chi[j] as isize != want {
            return Some((j, format!("chi^{j} = {} but 2m_{j} - m_{} - 1 = {want}", chi[j], j + 1)));
        }
        if j >= 1 && chi_prev[j - 1] != m[j - 1] - 1 {
            return Some((
                j,
                format!(
                    "chi^{j}_{} = {} but m_{} - 1 = {}",
                    j - 1,
                    chi_prev[j - 1],
                    j - 1,
                    m[j - 1] - 1
                ),
            ));
        }
    }
    None
}

/// [`flag_report`] requiring at least three probes and a Goursat verdict.
pub fn goursat_table(name: &str, frame: &[VectorField], probes: &[Vec<f64>]) -> Result<FlagReport> {
    if probes.len() < 3 {
        return Err(Error::Config("the Goursat table needs at least 3 probes".into()));
    }
    let r = flag_report(name, frame, probes, RANK_TOL)?;
    if let Some((row, detail)) = first_failure(&r.m, &r.chi, &r.chi_prev) {
        return Err(Error::ConstraintFailure { row, detail });
    }
    Ok(r)
}

/// A frame on a named coordinate space with a sampler of generic points.
#[derive(Clone, Debug)]
pub struct NamedFrame {
    pub name: String,
    pub coords: Vec<&'static str>,
    pub fields: Vec<VectorField>,
}

fn jz() -> Jet {
    Jet::constant(0.0)
}

fn unit(dim: usize, i: usize, name: &str) -> VectorField {
    VectorField::coordinate(name, dim, i)
}

impl NamedFrame {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "H1hat" => Ok(Self::h1_hat()),
            "H2hat" => Ok(Self::h2_hat()),
            "C011" => Ok(Self::c011()),
            "J1" => Ok(Self::j1()),
            other => Err(Error::Config(format!("unknown frame '{other}'"))),
        }
    }

    /// `(x, q₁..q₄, a₁, a₂, a₃)`.
    pub fn h1_hat() -> Self {
        let x = VectorField::new("X", 8, |p| {
            let (q1, q2, q3, q4, a1, a2, a3) = (p[1], p[2], p[3], p[4], p[5], p[6], p[7]);
            if q3.value().abs() <= 1e-12 {
                return Err(Error::guard("q3", q3.value()));
            }
            Ok(vec![
                Jet::constant(1.0),
                q3,
                a1 / q3 * (q1 + q2),
                a3 * q3 + a1,
                q4 * a1 / q3,
                a2,
                jz(),
                jz(),
            ])
        });
        NamedFrame {
            name: "H1hat".into(),
            coords: vec!["x", "q1", "q2", "q3", "q4", "a1", "a2", "a3"],
            fields: vec![x, unit(8, 6, "d_a2"), unit(8, 7, "d_a3")],
        }
    }

    /// `(y, p₁..p₄, b₁, b₂, b₃)`.
    pub fn h2_hat() -> Self {
        let y = VectorField::new("Y", 8, |p| {
            let (p1, p2, p3, p4, b1, b2, b3) = (p[1], p[2], p[3], p[4], p[5], p[6], p[7]);
            if p4.value().abs() <= 1e-12 {
                return Err(Error::guard("p4", p4.value()));
            }
            Ok(vec![
                Jet::constant(1.0),
                b1 / p4 * (p1 + p2),
                p4,
                b1 * p3 / p4,
                b3 * p4 + b1,
                b2,
                jz(),
                jz(),
            ])
        });
        NamedFrame {
            name: "H2hat".into(),
            coords: vec!["y", "p1", "p2", "p3", "p4", "b1", "b2", "b3"],
            fields: vec![y, unit(8, 6, "d_b2"), unit(8, 7, "d_b3")],
        }
    }

    /// Normal form of `C⟨0,1,1⟩` on `(t, z¹, z¹₁, z¹₂, z², z²₁, z²₂, z²₃)`.
    pub fn c011() -> Self {
        let total = VectorField::new("D_t", 8, |p| {
            Ok(vec![Jet::constant(1.0), p[2], p[3], jz(), p[5], p[6], p[7], jz()])
        });
        NamedFrame {
            name: "C011".into(),
            coords: vec!["t", "z1", "z1_1", "z1_2", "z2", "z2_1", "z2_2", "z2_3"],
            fields: vec![total, unit(8, 3, "d_z1_2"), unit(8, 7, "d_z2_3")],
        }
    }

    /// Contact system on `J¹(ℝ, ℝ)`: `{∂_t + z₁∂_z, ∂_{z₁}}`.
    pub fn j1() -> Self {
        let total = VectorField::new("D_t", 3, |p| Ok(vec![Jet::constant(1.0), p[2], jz()]));
        NamedFrame {
            name: "J1".into(),
            coords: vec!["t", "z", "z1"],
            fields: vec![total, unit(3, 2, "d_z1")],
        }
    }

    /// A random point away from the guards.
    pub fn random_probe<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.coords.len())
            .map(|i| {
                let v: f64 = rng.random_range(0.5..2.0);
                // keep q₃, q₄ (resp. p₃, p₄) and q₁+q₂ away from zero
                if (1..=4).contains(&i) || rng.random_bool(0.5) {
                    v
                } else {
                    -v
                }
            })
            .collect()
    }
}

/// Contact coordinates of a `C⟨0,1,1⟩` point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactCoordinates {
    pub t: f64,
    pub zeta1: [f64; 3],
    pub zeta2: [f64; 4],
}

/// Ingredients of the normal-form coordinates for one characteristic system.
#[derive(Clone, Debug)]
pub struct ContactRecipe {
    pub t: ScalarField,
    /// `Z = g·X` with `Z t = 1`.
    pub z: VectorField,
    pub phi1: ScalarField,
    pub phi_top: ScalarField,
}

impl ContactRecipe {
    /// `t = q₁`, `Z = X/q₃`, `ζ¹₀ = x`, `ζ²₀ = q₄/(q₁+q₂)`.
    pub fn h1_hat() -> Self {
        let frame = NamedFrame::h1_hat();
        let g = ScalarField::new("1/q3", |p| Ok(p[3].recip()));
        ContactRecipe {
            t: ScalarField::coordinate("q1", 1),
            z: frame.fields[0].scaled(&g),
            phi1: ScalarField::coordinate("x", 0),
            phi_top: ScalarField::new("q4/(q1+q2)", |p| Ok(p[4] / (p[1] + p[2]))),
        }
    }

    /// `t = p₂`, `Z = Y/p₄`, `ζ¹₀ = y`, `ζ²₀ = p₃/(p₁+p₂)`.
    pub fn h2_hat() -> Self {
        let frame = NamedFrame::h2_hat();
        let g = ScalarField::new("1/p4", |p| Ok(p[4].recip()));
        ContactRecipe {
            t: ScalarField::coordinate("p2", 2),
            z: frame.fields[0].scaled(&g),
            phi1: ScalarField::coordinate("y", 0),
            phi_top: ScalarField::new("p3/(p1+p2)", |p| Ok(p[3] / (p[1] + p[2]))),
        }
    }

    /// The scalar fields `t, ζ¹₀..ζ¹₂, ζ²₀..ζ²₃` in that order.
    pub fn functions(&self) -> Vec<ScalarField> {
        let mut out = vec![self.t.clone()];
        let mut f = self.phi1.clone();
        for _ in 0..3 {
            out.push(f.clone());
            f = self.z.lie(&f);
        }
        let mut f = self.phi_top.clone();
        for _ in 0..4 {
            out.push(f.clone());
            f = self.z.lie(&f);
        }
        out
    }
}

/// Evaluate the contact coordinates at `state`, checking `Z t = 1`.
pub fn contactify(recipe: &ContactRecipe, state: &[f64]) -> Result<ContactCoordinates> {
    let zt = recipe.z.lie(&recipe.t).eval(state)?;
    if (zt - 1.0).abs() > 1e-10 {
        return Err(Error::NormalizationFailure { value: zt });
    }
    let v: Vec<f64> = recipe
        .functions()
        .iter()
        .map(|f| f.eval(state))
        .collect::<Result<_>>()?;
    Ok(ContactCoordinates {
        t: v[0],
        zeta1: [v[1], v[2], v[3]],
        zeta2: [v[4], v[5], v[6], v[7]],
    })
}

/// `max |dζʲ/dt − ζʲ⁺¹|` at a curve point with tangent `velocity` (any
/// parametrisation; derivatives are divided by `dt`).
pub fn contact_defect(recipe: &ContactRecipe, state: &[f64], velocity: &[f64]) -> Result<f64> {
    let p: Vec<Jet> = state
        .iter()
        .zip(velocity)
        .map(|(s, v)| Jet::constant(*s).extend(Jet::constant(*v)))
        .collect();
    let fs = recipe.functions();
    let vals: Vec<(f64, f64)> = fs
        .iter()
        .map(|f| f.eval_jet(&p).map(|j| (j.value(), j.coeff(1))))
        .collect::<Result<_>>()?;
    let dt = vals[0].1;
    if dt.abs() <= 1e-12 {
        return Err(Error::NormalizationFailure { value: dt });
    }
    let mut worst: f64 = 0.0;
    for (lo, hi) in [(1usize, 3usize), (4, 7)] {
        for j in lo..hi {
            worst = worst.max((vals[j].1 / dt - vals[j + 1].0).abs());
        }
    }
    Ok(worst)
}
