//! Commutator certificates. For a TI (or stacked TTI) MPS the one-body part
//! H1 of the Hamiltonian acts through image tensors F^s; a matrix X with
//!
//!   M^{l_1}..M^{l_P} ([X, M^s] - F^s + eps M^s) M^{r_1}..M^{r_Q} = 0
//!
//! for every constraint-respecting word l s r makes the H1 action telescope,
//! so the state is an eigenstate with energy eps * N. Solving for X is a
//! linear least-squares problem.

use nalgebra::DVector;
use serde::Serialize;

use crate::catalog::{psp_ladder, Scheme};
use crate::hilbert::{is_valid, Bc, ConstrainedBasis};
use crate::linalg::{self, CMat};
use crate::model::SparseOperator;
use crate::mps::Mps;
use crate::{Error, Result, C64};

/// Residual threshold, relative to the scale of the equations.
pub const TOL: f64 = 1e-10;

/// One condition: pads on either side of the defect symbol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Equation {
    pub left: Vec<usize>,
    pub symbol: usize,
    pub right: Vec<usize>,
}

/// The enumerated equations of a scheme together with the tensor products
/// that must vanish for the MPS to live in the constrained space.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionSet {
    pub scheme: Scheme,
    pub alpha: usize,
    /// Number of local symbols.
    pub symbols: usize,
    pub equations: Vec<Equation>,
    pub zero_products: Vec<Vec<usize>>,
    /// Whether the energy density is an unknown.
    pub free_epsilon: bool,
    /// Local spin dimension for PSP schemes (2s + 1), else 0.
    pub two_s: usize,
}

/// Symbol validity of a spin-half word under blockade radius `alpha`.
fn spin_word_valid(bits: &[usize], alpha: usize) -> bool {
    let c = bits.iter().enumerate().fold(0u64, |m, (j, &b)| m | (b as u64) << j);
    is_valid(c, bits.len(), alpha, Bc::Obc)
}

/// Antipodal pair words: both chains valid, either straight or crossed at
/// the seam (where the first chain continues into the second).
fn ba_word_valid(word: &[usize], alpha: usize) -> bool {
    let a: Vec<usize> = word.iter().map(|&s| s >> 1).collect();
    let b: Vec<usize> = word.iter().map(|&s| s & 1).collect();
    spin_word_valid(&a, alpha) && spin_word_valid(&b, alpha)
}

fn ba_word_valid_crossed(word: &[usize], alpha: usize) -> bool {
    let n = word.len();
    let a: Vec<usize> = word.iter().map(|&s| s >> 1).collect();
    let b: Vec<usize> = word.iter().map(|&s| s & 1).collect();
    (1..n).any(|k| {
        let x: Vec<usize> = a[..k].iter().chain(&b[k..]).cloned().collect();
        let y: Vec<usize> = b[..k].iter().chain(&a[k..]).cloned().collect();
        spin_word_valid(&x, alpha) && spin_word_valid(&y, alpha)
    })
}

fn words(d: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..d).map(move |s| {
                    let mut v = w.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    out
}

impl ConditionSet {
    /// `symbols` is only consulted for PSP schemes (2s + 1 digits).
    pub fn new(scheme: Scheme, alpha: usize, symbols: usize) -> Result<Self> {
        use Scheme::*;
        let d = match scheme {
            UnpaddedBlocked | PaddedBlocked | PpxppBlocked => 3,
            SpinHalf => 2,
            Antipodal | FrozenMotif => 4,
            Psp | PspFrozen => symbols,
        };
        if d < 2 {
            return Err(Error::Invalid("a scheme needs at least two symbols".into()));
        }
        // (P, Q) per symbol and word validity
        let pads: Vec<(usize, usize)> = match scheme {
            UnpaddedBlocked | FrozenMotif | PspFrozen => vec![(0, 0); d],
            PaddedBlocked => vec![(0, 0), (1, 0), (0, 1)],
            PpxppBlocked => vec![(0, 0), (1, 1), (1, 1)],
            SpinHalf => {
                let mut p = vec![(0, 0)];
                p.push((alpha, alpha));
                p
            }
            Antipodal => vec![(alpha, alpha); 4],
            Psp => {
                let mut p = vec![(1, 1); d];
                p[0] = (0, 0);
                p
            }
        };
        let valid = |w: &[usize]| -> bool {
            match scheme {
                UnpaddedBlocked | PaddedBlocked => !w.windows(2).any(|p| p == [2, 1]),
                PpxppBlocked => !w.windows(2).any(|p| p == [2, 1] || p == [1, 1] || p == [2, 2]),
                SpinHalf => spin_word_valid(w, alpha),
                Antipodal => ba_word_valid(w, alpha) || ba_word_valid_crossed(w, alpha),
                Psp => !w.windows(2).any(|p| p[0] != 0 && p[1] != 0),
                FrozenMotif | PspFrozen => true,
            }
        };
        let mut equations = Vec::new();
        for (s, &(p, q)) in pads.iter().enumerate() {
            for l in words(d, p) {
                for r in words(d, q) {
                    let mut w = l.clone();
                    w.push(s);
                    w.extend(&r);
                    if valid(&w) {
                        equations.push(Equation {
                            left: l.clone(),
                            symbol: s,
                            right: r,
                        });
                    }
                }
            }
        }
        let zero_products = match scheme {
            UnpaddedBlocked | PaddedBlocked => vec![vec![2, 1]],
            PpxppBlocked => vec![vec![2, 1], vec![1, 1], vec![2, 2]],
            SpinHalf => words(2, alpha + 1)
                .into_iter()
                .filter(|w| !spin_word_valid(w, alpha))
                .collect(),
            Antipodal => words(4, alpha + 1)
                .into_iter()
                .filter(|w| !ba_word_valid(w, alpha) || !crossed_all_valid(w, alpha))
                .collect(),
            FrozenMotif => vec![vec![3, 1], vec![0, 0], vec![0, 3], vec![1, 0], vec![1, 3]],
            Psp => words(d, 2).into_iter().filter(|w| w[0] != 0 && w[1] != 0).collect(),
            PspFrozen => vec![vec![0, 0]],
        };
        Ok(Self {
            scheme,
            alpha,
            symbols: d,
            equations,
            zero_products,
            free_epsilon: scheme == PspFrozen,
            two_s: if matches!(scheme, Psp | PspFrozen) { d - 1 } else { 0 },
        })
    }

    /// Image tensors F^s of the one-body action.
    pub fn f_map(&self, m: &[CMat]) -> Vec<CMat> {
        use Scheme::*;
        match self.scheme {
            UnpaddedBlocked | PaddedBlocked | PpxppBlocked => {
                vec![&m[1] + &m[2], m[0].clone(), m[0].clone()]
            }
            SpinHalf => vec![m[1].clone(), m[0].clone()],
            Antipodal => (0..4)
                .map(|s| {
                    let (a, b) = (s >> 1, s & 1);
                    &m[2 * (1 - a) + b] + &m[2 * a + (1 - b)]
                })
                .collect(),
            FrozenMotif => {
                let f0 = &m[1] + &m[2] + &m[3];
                vec![f0, m[0].clone(), m[0].clone(), m[0].clone()]
            }
            Psp | PspFrozen => {
                let d = self.symbols;
                (0..d)
                    .map(|q| {
                        let mut f = CMat::zeros(m[0].nrows(), m[0].ncols());
                        if q + 1 < d {
                            f += &m[q + 1] * C64::new(psp_ladder(self.two_s, q), 0.0);
                        }
                        if q > 0 {
                            f += &m[q - 1] * C64::new(psp_ladder(self.two_s, q - 1), 0.0);
                        }
                        f
                    })
                    .collect()
            }
        }
    }

    /// Minimum system size (in units) for which a certificate proves the
    /// state: N > P + Q + 1.
    pub fn min_units(&self) -> usize {
        self.equations
            .iter()
            .map(|e| e.left.len() + e.right.len() + 2)
            .max()
            .unwrap_or(2)
    }
}

/// Antipodal words whose crossed readings at every seam position are valid.
fn crossed_all_valid(word: &[usize], alpha: usize) -> bool {
    let n = word.len();
    let a: Vec<usize> = word.iter().map(|&s| s >> 1).collect();
    let b: Vec<usize> = word.iter().map(|&s| s & 1).collect();
    (1..n).all(|k| {
        let x: Vec<usize> = a[..k].iter().chain(&b[k..]).cloned().collect();
        let y: Vec<usize> = b[..k].iter().chain(&a[k..]).cloned().collect();
        spin_word_valid(&x, alpha) && spin_word_valid(&y, alpha)
    })
}

fn product(m: &[CMat], w: &[usize]) -> CMat {
    let chi = m[0].nrows();
    w.iter().fold(CMat::identity(chi, chi), |p, &s| p * &m[s])
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintCheck {
    pub word: Vec<usize>,
    pub norm: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub scheme: Scheme,
    #[serde(serialize_with = "ser_mat")]
    pub x: CMat,
    pub epsilon: f64,
    /// Max Frobenius norm over equations divided by the equation scale.
    pub residual: f64,
    pub constraints: Vec<ConstraintCheck>,
    pub pass: bool,
    /// Residual of the golden X when one was supplied.
    pub golden_residual: Option<f64>,
}

fn ser_mat<S: serde::Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<[f64; 2]> = (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Checks that the tensor products forbidden by the scheme vanish.
pub fn check_constraints(cs: &ConditionSet, m: &[CMat]) -> Vec<ConstraintCheck> {
    let scale = m.iter().map(linalg::fro).fold(0.0, f64::max).max(1.0);
    cs.zero_products
        .iter()
        .map(|w| {
            let n = linalg::fro(&product(m, w));
            ConstraintCheck {
                word: w.clone(),
                norm: n,
                ok: n <= TOL * scale.powi(w.len() as i32),
            }
        })
        .collect()
}

pub struct System {
    pub rows: CMat,
    pub rhs: DVector<C64>,
}

/// Assembles the linear system in vec(X) (column-major) and optionally eps.
pub fn assemble(cs: &ConditionSet, m: &[CMat]) -> System {
    let chi = m[0].nrows();
    let f = cs.f_map(m);
    let nx = chi * chi;
    let nu = nx + usize::from(cs.free_epsilon);
    let neq = cs.equations.len() * nx;
    let mut rows = CMat::zeros(neq, nu);
    let mut rhs = DVector::zeros(neq);
    for (e, eq) in cs.equations.iter().enumerate() {
        let pl = product(m, &eq.left);
        let pr = product(m, &eq.right);
        let ms = &m[eq.symbol];
        // vec(A X B) = (B^T kron A) vec(X)
        let a1 = linalg::kron(&(ms * &pr).transpose(), &pl);
        let a2 = linalg::kron(&pr.transpose(), &(&pl * ms));
        let block = a1 - a2;
        let target = &pl * &f[eq.symbol] * &pr;
        let lhs_m = &pl * ms * &pr;
        let off = e * nx;
        rows.view_mut((off, 0), (nx, nx)).copy_from(&block);
        for k in 0..nx {
            rhs[off + k] = target[(k % chi, k / chi)];
            if cs.free_epsilon {
                rows[(off + k, nx)] = lhs_m[(k % chi, k / chi)];
            }
        }
    }
    System { rows, rhs }
}

/// Max over equations of the Frobenius norm of the defect, relative to the
/// equation scale.
pub fn residual_with(cs: &ConditionSet, m: &[CMat], x: &CMat, eps: C64) -> f64 {
    let f = cs.f_map(m);
    let sys_scale = equation_scale(cs, m);
    cs.equations
        .iter()
        .map(|eq| {
            let pl = product(m, &eq.left);
            let pr = product(m, &eq.right);
            let ms = &m[eq.symbol];
            let d = &pl * ((x * ms - ms * x) - &f[eq.symbol] + ms * eps) * &pr;
            linalg::fro(&d)
        })
        .fold(0.0, f64::max)
        / sys_scale
}

fn equation_scale(cs: &ConditionSet, m: &[CMat]) -> f64 {
    cs.equations
        .iter()
        .map(|eq| {
            linalg::fro(&product(m, &eq.left))
                * linalg::fro(&product(m, &eq.right))
                * linalg::fro(&m[eq.symbol]).max(1.0)
        })
        .fold(0.0, f64::max)
        .max(1.0)
}

/// Best energy density for a fixed X (zero unless the scheme frees it).
fn fit_epsilon(cs: &ConditionSet, m: &[CMat], x: &CMat) -> C64 {
    if !cs.free_epsilon {
        return C64::new(0.0, 0.0);
    }
    let f = cs.f_map(m);
    // eps * B = A with A = Pl (F - [X, M]) Pr, B = Pl M Pr, summed over eqs
    let (mut num, mut den) = (C64::new(0.0, 0.0), 0.0);
    for eq in &cs.equations {
        let pl = product(m, &eq.left);
        let pr = product(m, &eq.right);
        let ms = &m[eq.symbol];
        let a = &pl * (&f[eq.symbol] - (x * ms - ms * x)) * &pr;
        let b = &pl * ms * &pr;
        num += b.iter().zip(a.iter()).map(|(bi, ai)| bi.conj() * ai).sum::<C64>();
        den += b.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    if den == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        num / den
    }
}

/// Solves for X (and eps when allowed) and issues a certificate. Fails with
/// `Error::Constraint` when the MPS leaves the constrained space and with
/// `Error::NoSolution` when no X brings the residual below tolerance.
pub fn solve_certificate(mps: &Mps, cs: &ConditionSet, golden: Option<&CMat>) -> Result<Certificate> {
    let m = mps.site_tensors(0);
    if m.len() != cs.symbols {
        return Err(Error::Dimension {
            expected: cs.symbols,
            got: m.len(),
        });
    }
    let constraints = check_constraints(cs, &m);
    if let Some(bad) = constraints.iter().find(|c| !c.ok) {
        return Err(Error::Constraint(format!(
            "product over word {:?} has norm {:.3e}",
            bad.word, bad.norm
        )));
    }
    let cert = solve_unchecked(cs, &m, golden, constraints);
    if cert.pass {
        Ok(cert)
    } else {
        Err(Error::NoSolution(format!(
            "best residual {:.3e} under {:?}",
            cert.residual, cs.scheme
        )))
    }
}

/// The least-squares solve without raising on failure.
pub fn solve_unchecked(
    cs: &ConditionSet,
    m: &[CMat],
    golden: Option<&CMat>,
    constraints: Vec<ConstraintCheck>,
) -> Certificate {
    let chi = m[0].nrows();
    let sys = assemble(cs, m);
    let (sol, _) = linalg::lstsq(&sys.rows, &sys.rhs, 1e-12);
    let x = CMat::from_fn(chi, chi, |i, j| sol[j * chi + i]);
    let eps = if cs.free_epsilon {
        sol[chi * chi]
    } else {
        C64::new(0.0, 0.0)
    };
    let residual = residual_with(cs, m, &x, eps);
    let golden_residual = golden.map(|g| {
        let e = fit_epsilon(cs, m, g);
        residual_with(cs, m, g, e)
    });
    let constraints_ok = constraints.iter().all(|c| c.ok);
    Certificate {
        scheme: cs.scheme,
        x,
        epsilon: eps.re,
        residual,
        pass: residual < TOL && eps.im.abs() < 1e-8 && constraints_ok,
        constraints,
        golden_residual,
    }
}

/// Convenience wrapper: build the scheme's condition set from the MPS.
pub fn certify_zero_mode(mps: &Mps, scheme: Scheme, alpha: usize, golden: Option<&CMat>) -> Result<Certificate> {
    let cs = ConditionSet::new(scheme, alpha, mps.layout.symbols())?;
    solve_certificate(mps, &cs, golden)
}

// --------------------------------------------------------------- OBC states

#[derive(Clone, Debug, Serialize)]
pub struct ObcState {
    #[serde(serialize_with = "ser_mat")]
    pub v: CMat,
    #[serde(serialize_with = "ser_mat")]
    pub w: CMat,
    pub lambda_v: C64,
    pub lambda_w: C64,
    /// lambda_v - lambda_w (add eps * N for finite-density schemes).
    pub energy: f64,
}

/// Eigenvalue clusters of X with an eigenvector basis for each.
fn eigvecs(x: &CMat) -> Vec<(C64, CMat)> {
    let n = x.nrows();
    let mut ev = linalg::eigenvalues(x);
    ev.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let scale = linalg::fro(x).max(1.0);
    let mut out: Vec<(C64, CMat)> = Vec::new();
    for lam in ev {
        if out.iter().any(|(l, _)| (l - lam).norm() < 1e-7 * scale) {
            continue;
        }
        let a = x - CMat::identity(n, n) * lam;
        // loosen the tolerance until a vector appears (defective clusters)
        for tol in [1e-10, 1e-8, 1e-6] {
            let ns = linalg::null_space(&a, tol);
            if ns.ncols() > 0 {
                out.push((lam, ns));
                break;
            }
        }
    }
    out
}

/// Termination pairs built from eigenvectors of X that satisfy the boundary
/// versions of the padded equations: v^T (..) Pr = 0 for left-padded
/// symbols and Pl (..) w = 0 for right-padded ones.
pub fn obc_extension(mps: &Mps, cs: &ConditionSet, x: &CMat, eps: f64) -> Vec<ObcState> {
    let m = mps.site_tensors(0);
    let f = cs.f_map(&m);
    let e = C64::new(eps, 0.0);
    let defect = |s: usize| (x * &m[s] - &m[s] * x) - &f[s] + &m[s] * e;
    let scale = m.iter().map(linalg::fro).fold(1.0, f64::max);
    let left_ok = |v: &CMat| {
        cs.equations.iter().filter(|q| !q.left.is_empty()).all(|q| {
            let r = v.transpose() * defect(q.symbol) * product(&m, &q.right);
            linalg::fro(&r) <= 1e-9 * scale.powi(q.right.len() as i32 + 1)
        })
    };
    let right_ok = |w: &CMat| {
        cs.equations.iter().filter(|q| !q.right.is_empty()).all(|q| {
            let r = product(&m, &q.left) * defect(q.symbol) * w;
            linalg::fro(&r) <= 1e-9 * scale.powi(q.left.len() as i32 + 1)
        })
    };
    let lefts = eigvecs(&x.transpose());
    let rights = eigvecs(x);
    let mut out = Vec::new();
    for (lv, vs) in &lefts {
        for i in 0..vs.ncols() {
            let v = vs.column(i).into_owned();
            let v = CMat::from_column_slice(v.len(), 1, v.as_slice());
            if !left_ok(&v) {
                continue;
            }
            for (lw, ws) in &rights {
                for j in 0..ws.ncols() {
                    let w = ws.column(j).into_owned();
                    let w = CMat::from_column_slice(w.len(), 1, w.as_slice());
                    if !right_ok(&w) {
                        continue;
                    }
                    out.push(ObcState {
                        v: v.clone(),
                        w,
                        lambda_v: *lv,
                        lambda_w: *lw,
                        energy: (lv - lw).re,
                    });
                }
            }
        }
    }
    out
}

/// ||H psi|| / ||psi|| by sparse application (the independent oracle).
pub fn direct_residual(psi: &[C64], h: &SparseOperator) -> f64 {
    energy_residual(psi, h, 0.0)
}

/// ||(H - E) psi|| / ||psi||.
pub fn energy_residual(psi: &[C64], h: &SparseOperator, e: f64) -> f64 {
    let hp = h.matvec_c(psi);
    let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 {
        return f64::NAN;
    }
    let r: f64 = hp
        .iter()
        .zip(psi)
        .map(|(a, b)| (a - b * e).norm_sqr())
        .sum::<f64>()
        .sqrt();
    r / n
}

/// Expands a catalog-style MPS on a spin-half constrained basis and returns
/// the direct residual.
pub fn mps_residual(mps: &Mps, basis: &ConstrainedBasis, h: &SparseOperator) -> Result<f64> {
    let psi = mps.expand(basis, None)?;
    Ok(direct_residual(&psi, h))
}
