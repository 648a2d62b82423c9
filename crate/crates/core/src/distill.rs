//! Scar distillation: symmetry-resolved nullspaces, the bijective block map,
//! alternating-projections rank minimization, back-mapping and parent
//! Hamiltonians.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::hilbert::{build_sector, c_sign, invert, is_valid, Bc, ConstrainedBasis, SymmetrySector};
use crate::linalg::{self, RMat};
use crate::model::{build_projector_family, LocalVector, SparseOperator};
use crate::{Error, Result};

// ---------------------------------------------------------------- nullspace

/// Orthonormal zero modes of `H` in one symmetry sector, stored as dense
/// real vectors over the full constrained basis.
#[derive(Clone, Debug)]
pub struct NullspaceBasis {
    pub p: usize,
    pub inversion: i8,
    pub c_parity: i8,
    pub vectors: Vec<Vec<f64>>,
}

impl NullspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }
}

/// Zero modes (|E| < `tol`) of `h` in the p-periodic sector with inversion
/// `inversion`, split by C parity. Returns (C = +1, C = -1).
pub fn nullspace(
    basis: &ConstrainedBasis,
    h: &SparseOperator,
    p: usize,
    inversion: i8,
    tol: f64,
) -> Result<(NullspaceBasis, NullspaceBasis)> {
    let sector = build_sector(basis, p, 0, Some(inversion), None)?;
    let hs = h.restrict(&sector);
    let (vals, vecs) = linalg::sym_eigh(hs);
    let zero: Vec<usize> = (0..vals.len()).filter(|&k| vals[k].abs() < tol).collect();
    let full: Vec<Vec<f64>> = zero
        .iter()
        .map(|&k| {
            let col: Vec<f64> = vecs.column(k).iter().cloned().collect();
            sector.embed(&col, basis.dim())
        })
        .collect();
    // C commutes with the sector projector, so diagonalize it on the kernel
    let d = full.len();
    let mut cm = RMat::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            cm[(a, b)] = (0..basis.dim())
                .map(|i| full[a][i] * c_sign(basis.states[i]) * full[b][i])
                .sum();
        }
    }
    let (cv, cvec) = linalg::sym_eigh(cm);
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for k in 0..d {
        let mut v = vec![0.0; basis.dim()];
        for a in 0..d {
            let w = cvec[(a, k)];
            for (x, y) in v.iter_mut().zip(&full[a]) {
                *x += w * y;
            }
        }
        if cv[k] > 0.0 {
            plus.push(v);
        } else {
            minus.push(v);
        }
    }
    let mk = |vectors, c| NullspaceBasis { p, inversion, c_parity: c, vectors };
    Ok((mk(plus, 1), mk(minus, -1)))
}

/// Nullspace with both labels fixed, `(c, i)`.
pub fn nullspace_sector(basis: &ConstrainedBasis, h: &SparseOperator, p: usize, c: i8, i: i8) -> Result<NullspaceBasis> {
    let (plus, minus) = nullspace(basis, h, p, i, 1e-10)?;
    Ok(if c > 0 { plus } else { minus })
}

// ---------------------------------------------------------------- block map

/// Symmetry label (c, i) of a half-system group. Order of groups in the
/// transformed matrix: (+,+), (+,-), (-,+), (-,-).
pub type Label = (i8, i8);

pub const GROUPS: [Label; 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

pub fn parse_label(s: &str) -> Result<Label> {
    let sign = |ch: char| match ch {
        '+' => Ok(1),
        '-' => Ok(-1),
        _ => Err(Error::Invalid(format!("bad symmetry label {s:?}"))),
    };
    let ch: Vec<char> = s.trim().trim_matches(|c| c == '(' || c == ')').chars().filter(|c| *c != ',').collect();
    if ch.len() != 2 {
        return Err(Error::Invalid(format!("bad symmetry label {s:?}")));
    }
    Ok((sign(ch[0])?, sign(ch[1])?))
}

/// Half-system layout: allowed strings and the symmetry-adapted rows of T.
#[derive(Clone, Debug)]
pub struct HalfBasis {
    pub sites: usize,
    pub states: Vec<u64>,
    /// Per group: (representative f, partner i(f), zeta).
    pub groups: [Vec<(u64, u64, i8)>; 4],
}

fn reverse_bits(f: u64, n: usize) -> u64 {
    (0..n).fold(0, |a, k| a | ((f >> k & 1) << (n - 1 - k)))
}

impl HalfBasis {
    /// Strings on `sites` sites that fit between two copies of the block
    /// pattern `s` (width `p`) without violating the blockade.
    pub fn new(sites: usize, p: usize, s: u64, alpha: usize) -> Self {
        let total = sites + 2 * p;
        let mut states = Vec::new();
        for f in 0..1u64 << sites {
            let c = s | (f << p) | (s << (p + sites));
            if is_valid(c, total, alpha, Bc::Obc) {
                states.push(f);
            }
        }
        let mut groups: [Vec<(u64, u64, i8)>; 4] = Default::default();
        for &f in &states {
            let g = reverse_bits(f, sites);
            if g < f {
                continue;
            }
            let c = if f.count_ones() % 2 == 0 { 1 } else { -1 };
            let zetas: &[i8] = if g == f { &[1] } else { &[1, -1] };
            for &z in zetas {
                let k = GROUPS.iter().position(|&l| l == (c, z)).unwrap();
                groups[k].push((f, g, z));
            }
        }
        Self { sites, states, groups }
    }

    pub fn group_sizes(&self) -> [usize; 4] {
        [0, 1, 2, 3].map(|k| self.groups[k].len())
    }

    /// Rows of T for group `k` as sparse (state position, weight) lists.
    fn rows(&self, k: usize) -> Vec<Vec<(usize, f64)>> {
        let pos = |f: u64| self.states.binary_search(&f).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        self.groups[k]
            .iter()
            .map(|&(f, g, z)| {
                if f == g {
                    vec![(pos(f), 1.0)]
                } else {
                    vec![(pos(f), r), (pos(g), z as f64 * r)]
                }
            })
            .collect()
    }
}

/// The map psi -> [T (M f_Pi psi) T^T]_{alpha beta} together with the data
/// needed to invert it on a nullspace.
#[derive(Clone, Debug)]
pub struct BlockMap {
    pub l: usize,
    pub p: usize,
    pub s: u64,
    pub half: HalfBasis,
    pub alpha: Label,
    pub beta: Label,
    /// For every (l, r) half pair, the ordinal of the full configuration.
    cells: Vec<Option<usize>>,
    rows_a: Vec<Vec<(usize, f64)>>,
    rows_b: Vec<Vec<(usize, f64)>>,
    /// Nullspace basis (columns) and its images vec(rho_i) (columns).
    pub psi: RMat,
    pub images: RMat,
    /// Orthonormal e_j (columns, vectorized column-major).
    pub e: RMat,
    pinv: RMat,
}

impl BlockMap {
    /// Builds the map for blocks of `p` sites with projector pattern `s` on
    /// blocks 1 and L_b/2 + 1. The right half is read mirrored about the
    /// axis through both projected blocks, so that the reflection swapping
    /// the halves acts as transposition.
    pub fn new(
        basis: &ConstrainedBasis,
        p: usize,
        s: u64,
        alpha: Label,
        beta: Label,
        null: &NullspaceBasis,
    ) -> Result<Self> {
        let l = basis.l;
        if basis.bc != Bc::Pbc || !l.is_multiple_of(p) || !(l / p).is_multiple_of(2) || l / p < 4 {
            return Err(Error::Invalid(format!("block map needs PBC and an even L_b >= 4 (L={l}, p={p})")));
        }
        if reverse_bits(s, p) != s || s >> p != 0 {
            return Err(Error::Invalid("projector block must be an inversion-symmetric p-bit pattern".into()));
        }
        let lb = l / p;
        let sites = p * (lb / 2 - 1);
        let half = HalfBasis::new(sites, p, s, basis.alpha);
        let n = half.states.len();
        let mid = p * lb / 2;
        let mut cells = vec![None; n * n];
        for (a, &fl) in half.states.iter().enumerate() {
            for (b, &fr) in half.states.iter().enumerate() {
                let mut c = s | (fl << p) | (s << mid);
                for k in 0..sites {
                    c |= (fr >> k & 1) << (l - 1 - k);
                }
                cells[a * n + b] = basis.index(c);
            }
        }
        let ka = GROUPS.iter().position(|&g| g == alpha).unwrap();
        let kb = GROUPS.iter().position(|&g| g == beta).unwrap();
        let rows_a = half.rows(ka);
        let rows_b = half.rows(kb);
        let d = null.dim();
        let mut map = Self {
            l,
            p,
            s,
            half,
            alpha,
            beta,
            cells,
            rows_a,
            rows_b,
            psi: RMat::zeros(basis.dim(), d),
            images: RMat::zeros(0, 0),
            e: RMat::zeros(0, 0),
            pinv: RMat::zeros(0, 0),
        };
        for (j, v) in null.vectors.iter().enumerate() {
            map.psi.set_column(j, &DVector::from_column_slice(v));
        }
        let m = map.rows_a.len() * map.rows_b.len();
        let mut images = RMat::zeros(m, d);
        for j in 0..d {
            let rho = map.forward(&null.vectors[j]);
            images.set_column(j, &DVector::from_column_slice(rho.as_slice()));
        }
        map.e = orthogonalize_images(&images, 1e-10);
        map.pinv = images.clone().pseudo_inverse(1e-10 * images.norm().max(1e-300)).map_err(|e| Error::Invalid(e.into()))?;
        map.images = images;
        Ok(map)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows_a.len(), self.rows_b.len())
    }

    /// Full matricized f_Pi psi (half states x half states).
    pub fn matricize(&self, psi: &[f64]) -> RMat {
        let n = self.half.states.len();
        RMat::from_fn(n, n, |a, b| self.cells[a * n + b].map_or(0.0, |i| psi[i]))
    }

    /// rho = [T (M f_Pi psi) T^T]_{alpha beta}.
    pub fn forward(&self, psi: &[f64]) -> RMat {
        let n = self.half.states.len();
        let amp = |a: usize, b: usize| self.cells[a * n + b].map_or(0.0, |i| psi[i]);
        RMat::from_fn(self.rows_a.len(), self.rows_b.len(), |i, j| {
            let mut acc = 0.0;
            for &(a, x) in &self.rows_a[i] {
                for &(b, y) in &self.rows_b[j] {
                    acc += x * y * amp(a, b);
                }
            }
            acc
        })
    }

    /// Number of orthonormal images; equals D exactly when the map is
    /// injective on the nullspace.
    pub fn count(&self) -> usize {
        self.e.ncols()
    }

    pub fn is_injective(&self) -> bool {
        self.count() == self.psi.ncols()
    }

    /// Pre-image (normalized) of a block matrix in the image span.
    pub fn inverse(&self, rho: &RMat) -> Vec<f64> {
        let coeffs = &self.pinv * DVector::from_column_slice(rho.as_slice());
        let v = &self.psi * coeffs;
        let nrm = v.norm().max(1e-300);
        v.iter().map(|x| x / nrm).collect()
    }

    /// Nullspace coordinates of a pre-image.
    pub fn inverse_coeffs(&self, rho: &RMat) -> DVector<f64> {
        &self.pinv * DVector::from_column_slice(rho.as_slice())
    }

    pub fn reshape(&self, v: &DVector<f64>) -> RMat {
        let (r, c) = self.shape();
        RMat::from_column_slice(r, c, v.as_slice())
    }
}

/// Orthonormal basis (columns) of the span of the image columns.
pub fn orthogonalize_images(images: &RMat, tol: f64) -> RMat {
    if images.ncols() == 0 || images.nrows() == 0 {
        return RMat::zeros(images.nrows(), 0);
    }
    let svd = images.clone().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > tol * smax.max(1e-300))
        .collect();
    RMat::from_fn(images.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

// ---------------------------------------------------- alternating projections

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ApOptions {
    pub t: usize,
    pub eps0: f64,
    pub max_iters: usize,
    pub window: usize,
    pub cycle_tol: f64,
}

impl ApOptions {
    pub fn new(t: usize) -> Self {
        Self { t, eps0: 1e-10, max_iters: 50_000, window: 64, cycle_tol: 1e-9 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Converged,
    LimitCycle,
    IterationCap,
}

#[derive(Clone, Debug)]
pub struct DistillRun {
    pub seed: u64,
    pub t: usize,
    pub outcome: Outcome,
    pub iterations: usize,
    pub epsilon: f64,
    /// Final coefficients over e_j and the block matrix they span.
    pub coeffs: DVector<f64>,
    pub rho: RMat,
    /// ||rho - svd_t(rho)|| / ||rho|| after polishing.
    pub rank_residual: f64,
}

fn truncate(rho: &RMat, t: usize) -> RMat {
    let svd = rho.clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let mut out = RMat::zeros(rho.nrows(), rho.ncols());
    for &k in order.iter().take(t) {
        out += u.column(k) * vt.row(k) * svd.singular_values[k];
    }
    out
}

/// Relative distance of `rho` from the rank-`t` set.
pub fn rank_residual(rho: &RMat, t: usize) -> f64 {
    let n = rho.norm();
    if n == 0.0 {
        return 0.0;
    }
    (rho - truncate(rho, t)).norm() / n
}

/// Random unit vector, uniform on the sphere.
pub fn random_unit(k: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let v = DVector::from_fn(k, |_, _| StandardNormal.sample(rng));
    let n: f64 = v.norm();
    v / n
}

/// One run of alternating projections between span{e_j} and the rank-t
/// matrices, from a seeded random start.
pub fn alternating_projections(map: &BlockMap, opts: &ApOptions, seed: u64) -> DistillRun {
    let (r, c) = map.shape();
    let k = map.count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = random_unit(k, &mut rng);
    let mut eps = 1.0;
    let mut history: std::collections::VecDeque<(DVector<f64>, f64)> = Default::default();
    let mut outcome = Outcome::IterationCap;
    let mut it = 0;
    while it < opts.max_iters {
        it += 1;
        let rho = RMat::from_column_slice(r, c, (&map.e * &coeffs).as_slice());
        let mut bar = truncate(&rho, opts.t);
        let n = bar.norm();
        if n == 0.0 {
            outcome = Outcome::LimitCycle;
            break;
        }
        bar /= n;
        let next = map.e.transpose() * DVector::from_column_slice(bar.as_slice());
        let e_new = 1.0 - next.norm();
        coeffs = next;
        if e_new <= opts.eps0 {
            eps = e_new;
            outcome = Outcome::Converged;
            break;
        }
        // stagnation: back near a recent iterate while epsilon is flat
        let stuck = history
            .iter()
            .any(|(h, e)| (h - &coeffs).norm() < opts.cycle_tol && e_new >= e - 1e-14);
        eps = e_new;
        if stuck {
            outcome = Outcome::LimitCycle;
            break;
        }
        history.push_back((coeffs.clone(), e_new));
        if history.len() > opts.window {
            history.pop_front();
        }
    }
    if outcome == Outcome::Converged {
        coeffs = polish(map, &coeffs, opts.t);
    }
    let rho = RMat::from_column_slice(r, c, (&map.e * &coeffs).as_slice());
    let rank_residual = rank_residual(&rho, opts.t);
    DistillRun { seed, t: opts.t, outcome, iterations: it, epsilon: eps, coeffs, rho, rank_residual }
}

/// Sharpens a converged point. With the column and row spaces U, V of the
/// rank-t truncation held fixed, c minimizes ||(1 - P_U) rho(c) (1 - P_V)||
/// on the unit sphere (a k x k eigenproblem). Near the intersection the
/// error of U and V enters only quadratically, so a few rounds replace
/// thousands of slow projection steps.
fn polish(map: &BlockMap, coeffs: &DVector<f64>, t: usize) -> DVector<f64> {
    let (r, c) = map.shape();
    let k = map.count();
    let mut best = coeffs.normalize();
    let mut best_res = rank_residual(&map.reshape(&(&map.e * &best)), t);
    for _ in 0..4 {
        let rho = map.reshape(&(&map.e * &best));
        let svd = rho.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
        let ut = RMat::from_fn(r, t, |i, j| u[(i, order[j])]);
        let vv = RMat::from_fn(c, t, |i, j| vt[(order[j], i)]);
        let qu = RMat::identity(r, r) - &ut * ut.transpose();
        let qv = RMat::identity(c, c) - &vv * vv.transpose();
        let mut rows = RMat::zeros(r * c, k);
        for j in 0..k {
            let ej = map.reshape(&map.e.column(j).into_owned());
            let a = &qu * &ej * &qv;
            for (x, y) in a.iter().enumerate() {
                rows[(x, j)] = *y;
            }
        }
        let (vals, vecs) = linalg::sym_eigh(rows.transpose() * rows);
        let _ = vals;
        let mut cand: DVector<f64> = vecs.column(0).into_owned();
        if cand.dot(&best) < 0.0 {
            cand = -cand;
        }
        let res = rank_residual(&map.reshape(&(&map.e * &cand)), t);
        if res >= best_res {
            break;
        }
        best = cand;
        best_res = res;
    }
    best
}

/// Independent restarts with seeds `seed0 .. seed0 + runs`.
pub fn campaign(map: &BlockMap, opts: &ApOptions, runs: usize, seed0: u64) -> Vec<DistillRun> {
    (0..runs as u64)
        .into_par_iter()
        .map(|k| alternating_projections(map, opts, seed0 + k))
        .collect()
}

// ---------------------------------------------------------------- hits

/// A distinct converged state and the runs that reached it.
#[derive(Clone, Debug)]
pub struct Hit {
    pub state: Vec<f64>,
    pub runs: Vec<u64>,
    pub label: Option<String>,
    pub fidelity: f64,
}

/// A labeled reference subspace (a single state or a span of states).
#[derive(Clone, Debug)]
pub struct Reference {
    pub name: String,
    pub vectors: Vec<Vec<f64>>,
}

/// Back-maps converged runs and merges those whose states overlap above
/// `threshold`. A hit takes the first reference whose span holds more than
/// `threshold` of its weight.
pub fn cluster_hits(map: &BlockMap, runs: &[DistillRun], threshold: f64, refs: &[Reference]) -> Vec<Hit> {
    let mut hits: Vec<Hit> = Vec::new();
    for run in runs.iter().filter(|r| r.outcome == Outcome::Converged) {
        let psi = map.inverse(&run.rho);
        if let Some(h) = hits.iter_mut().find(|h| linalg::real_fidelity(&h.state, &psi) > threshold) {
            h.runs.push(run.seed);
            continue;
        }
        let weights: Vec<f64> = refs.iter().map(|r| span_weight(&r.vectors, &psi)).collect();
        let pick = weights.iter().position(|&w| w > threshold);
        let (label, fidelity) = match pick {
            Some(k) => (Some(refs[k].name.clone()), weights[k]),
            None => (None, weights.iter().cloned().fold(0.0, f64::max)),
        };
        hits.push(Hit { state: psi, runs: vec![run.seed], label, fidelity });
    }
    hits
}

// ---------------------------------------------------- parent Hamiltonians

/// Reduced density matrix of a real PBC state on the window of `n` sites
/// starting at site 0, over locally valid patterns (bit k = site k).
pub fn window_rdm(basis: &ConstrainedBasis, psi: &[f64], n: usize) -> (Vec<u64>, RMat) {
    let pats: Vec<u64> = (0..1u64 << n).filter(|&x| is_valid(x, n, basis.alpha, Bc::Obc)).collect();
    let mask = (1u64 << n) - 1;
    let mut env: std::collections::HashMap<u64, Vec<(usize, f64)>> = Default::default();
    for (i, &c) in basis.states.iter().enumerate() {
        if psi[i] == 0.0 {
            continue;
        }
        let a = pats.binary_search(&(c & mask)).unwrap();
        env.entry(c & !mask).or_default().push((a, psi[i]));
    }
    let mut rho = RMat::zeros(pats.len(), pats.len());
    for list in env.values() {
        for &(a, x) in list {
            for &(b, y) in list {
                rho[(a, b)] += x * y;
            }
        }
    }
    (pats, rho)
}

/// Kernel of the window RDM on `r` units of `width` sites as local vectors.
/// Patterns that are locally forbidden are never part of the local space.
pub fn rdm_kernel(basis: &ConstrainedBasis, psi: &[f64], width: usize, r: usize, tol: f64) -> Vec<LocalVector> {
    let (pats, rho) = window_rdm(basis, psi, width * r);
    let tr = rho.trace().max(1e-300);
    let (vals, vecs) = linalg::sym_eigh(rho / tr);
    (0..vals.len())
        .filter(|&k| vals[k] < tol)
        .map(|k| LocalVector {
            width,
            range: r,
            terms: pats
                .iter()
                .enumerate()
                .map(|(a, &x)| (x, vecs[(a, k)]))
                .filter(|t| t.1.abs() > 1e-13)
                .collect(),
        })
        .collect()
}

/// V_r(q) = sum_j sum_i q_i P_i on translated windows. The vectors are
/// orthonormalized first; q = None means all weights 1 (one projector onto
/// the span).
pub fn parent_hamiltonian(basis: &ConstrainedBasis, vs: &[LocalVector], q: Option<&[f64]>) -> Result<SparseOperator> {
    match q {
        None => build_projector_family(basis, vs),
        Some(q) => {
            if q.len() != vs.len() || q.iter().any(|&x| x < 0.0) {
                return Err(Error::Invalid("need one non-negative weight per vector".into()));
            }
            let ortho = orthonormal_local(vs);
            let mut trip = Vec::new();
            for (v, &w) in ortho.iter().zip(q) {
                let f = build_projector_family(basis, std::slice::from_ref(v))?;
                trip.extend(f.triplets().into_iter().map(|(a, b, x)| (a, b, w * x)));
            }
            Ok(SparseOperator::from_triplets(basis.dim(), trip))
        }
    }
}

fn orthonormal_local(vs: &[LocalVector]) -> Vec<LocalVector> {
    let mut pats: Vec<u64> = vs.iter().flat_map(|v| v.terms.iter().map(|t| t.0)).collect();
    pats.sort_unstable();
    pats.dedup();
    let cols: Vec<DVector<crate::C64>> = vs
        .iter()
        .map(|v| {
            let mut d = DVector::zeros(pats.len());
            for &(p, a) in &v.terms {
                d[pats.binary_search(&p).unwrap()] += crate::C64::new(a, 0.0);
            }
            d
        })
        .collect();
    linalg::orthonormalize(&cols, 1e-10)
        .into_iter()
        .map(|q| LocalVector {
            width: vs[0].width,
            range: vs[0].range,
            terms: pats.iter().zip(q.iter()).map(|(&p, z)| (p, z.re)).filter(|t| t.1 != 0.0).collect(),
        })
        .collect()
}

/// Basis (columns) of ker(H + V), collected over the momentum sectors of
/// translations by `unit` sites.
pub fn kernel_h_plus_v(
    basis: &ConstrainedBasis,
    h: &SparseOperator,
    v: &SparseOperator,
    unit: usize,
    tol: f64,
) -> Result<Vec<Vec<f64>>> {
    let hv = h.add(v);
    let n = basis.l / unit;
    let mut out = Vec::new();
    for m in 0..=n / 2 {
        let sector: SymmetrySector = build_sector(basis, unit, m, None, None)?;
        if sector.dim() == 0 {
            continue;
        }
        let (vals, vecs) = linalg::sym_eigh(hv.restrict(&sector));
        for k in (0..vals.len()).filter(|&k| vals[k].abs() < tol) {
            let col: Vec<f64> = vecs.column(k).iter().cloned().collect();
            out.push(sector.embed(&col, basis.dim()));
        }
    }
    Ok(out)
}

/// dim ker(H + V) at one size.
pub fn scar_dimension(basis: &ConstrainedBasis, h: &SparseOperator, v: &SparseOperator, unit: usize) -> Result<usize> {
    Ok(kernel_h_plus_v(basis, h, v, unit, 1e-8)?.len())
}

/// Projection weight of `psi` onto span(`vs`) (orthonormalized internally).
pub fn span_weight(vs: &[Vec<f64>], psi: &[f64]) -> f64 {
    let cols: Vec<DVector<crate::C64>> = vs
        .iter()
        .map(|v| DVector::from_iterator(v.len(), v.iter().map(|&x| crate::C64::new(x, 0.0))))
        .collect();
    let q = linalg::orthonormalize(&cols, 1e-10);
    let p: Vec<crate::C64> = psi.iter().map(|&x| crate::C64::new(x, 0.0)).collect();
    let pv = DVector::from_vec(p);
    let n2 = pv.norm_squared().max(1e-300);
    q.iter().map(|u| u.dotc(&pv).norm_sqr()).sum::<f64>() / n2
}

/// Reflection used by the block map, exposed for checks: j -> p - 1 - j.
pub fn axis_reflection(c: u64, l: usize, p: usize) -> u64 {
    crate::hilbert::translate(invert(c, l), l, p)
}

/// Real representative of a complex vector that is real up to a global
/// phase (phase chosen to maximize the real part).
pub fn realify(v: &[crate::C64]) -> Vec<f64> {
    let s: crate::C64 = v.iter().map(|z| z * z).sum();
    let ph = crate::C64::from_polar(1.0, -s.arg() / 2.0);
    v.iter().map(|z| (z * ph).re).collect()
}

/// Part of `v` with C parity `c`.
pub fn c_part(basis: &ConstrainedBasis, v: &[crate::C64], c: i8) -> Vec<crate::C64> {
    v.iter()
        .zip(&basis.states)
        .map(|(z, &s)| if c_sign(s) as i8 == c { *z } else { crate::C64::new(0.0, 0.0) })
        .collect()
}

/// Catalog PXP zero modes on `basis` as real vectors, for labeling hits.
/// Omega contributes its C-even (Re) and C-odd (Im) combinations.
/// The last entry is the span of Phi_{1,2} and Theta_{1,2}, which absorbs
/// their superpositions.
pub fn pxp_references(basis: &ConstrainedBasis) -> Result<Vec<Reference>> {
    let mut out = Vec::new();
    for name in ["lambda_pxp", "phi1", "phi2", "theta1", "theta2"] {
        let e = crate::catalog::get_state(name)?;
        out.push((name.to_string(), realify(&e.mps.expand(basis, None)?)));
    }
    let om = crate::catalog::get_state("omega")?.mps.expand(basis, None)?;
    out.push(("re_omega".into(), realify(&c_part(basis, &om, 1))));
    out.push(("im_omega".into(), realify(&c_part(basis, &om, -1))));
    let span: Vec<Vec<f64>> = out[1..5].iter().map(|(_, v)| v.clone()).collect();
    let mut refs: Vec<Reference> = out
        .into_iter()
        .map(|(name, v)| Reference { name, vectors: vec![v] })
        .collect();
    refs.push(Reference { name: "phi+theta".into(), vectors: span });
    Ok(refs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::SymOp;
    use crate::model::build_h_alpha;

    fn apply_symmetry_check(b: &ConstrainedBasis, op: SymOp, v: &[f64], want: f64) {
        let w = b.apply_symmetry(op, v).unwrap();
        assert!(w.iter().zip(v).all(|(x, y)| (x - want * y).abs() < 1e-10), "{op:?}");
    }

    /// L = 16, p = 2: N^{++} (I = C = +1) and N^{--} (I = C = -1).
    fn l16() -> (ConstrainedBasis, SparseOperator, NullspaceBasis, NullspaceBasis) {
        let b = ConstrainedBasis::new(16, 1, Bc::Pbc).unwrap();
        let h = build_h_alpha(&b);
        let (pp, _) = nullspace(&b, &h, 2, 1, 1e-8).unwrap();
        let (_, mm) = nullspace(&b, &h, 2, -1, 1e-8).unwrap();
        (b, h, pp, mm)
    }

    #[test]
    fn nullspace_vectors_carry_their_labels() {
        let (b, h, pp, mm) = l16();
        assert_eq!((pp.dim(), mm.dim()), (15, 6));
        for (null, c) in [(&pp, 1.0), (&mm, -1.0)] {
            for (a, v) in null.vectors.iter().enumerate() {
                assert!(h.matvec(v).iter().all(|x| x.abs() < 1e-9));
                apply_symmetry_check(&b, SymOp::C, v, c);
                apply_symmetry_check(&b, SymOp::I, v, c);
                apply_symmetry_check(&b, SymOp::T(2), v, 1.0);
                for (k, w) in null.vectors.iter().enumerate() {
                    let dot: f64 = v.iter().zip(w).map(|(x, y)| x * y).sum();
                    assert!((dot - if a == k { 1.0 } else { 0.0 }).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn block_map_round_trip() {
        let (b, _, pp, _) = l16();
        let map = BlockMap::new(&b, 2, 0, (1, 1), (1, 1), &pp).unwrap();
        assert!(map.is_injective());
        for v in &pp.vectors {
            let back = map.inverse(&map.forward(v));
            let overlap: f64 = back.iter().zip(v).map(|(x, y)| x * y).sum();
            assert!((overlap.abs() - 1.0).abs() < 1e-10);
        }
        assert!(BlockMap::new(&ConstrainedBasis::new(10, 1, Bc::Pbc).unwrap(), 2, 0, (1, 1), (1, 1), &pp).is_err());
    }

    #[test]
    fn random_unit_is_seeded_and_normalized() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        let mut mean = DVector::zeros(5);
        for _ in 0..4000 {
            let u = random_unit(5, &mut a);
            assert!((u.norm() - 1.0).abs() < 1e-14);
            assert_eq!(u, random_unit(5, &mut b));
            mean += u;
        }
        // isotropic: the mean of unit vectors vanishes (std ~ 1/sqrt(5 * 4000))
        assert!((mean / 4000.0).norm() < 0.05);
    }

    #[test]
    fn rank_residual_values() {
        let u = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let v = DVector::from_vec(vec![0.5, 3.0]);
        assert!(rank_residual(&(&u * v.transpose()), 1) < 1e-14);
        let id = RMat::identity(3, 3);
        assert!((rank_residual(&id, 1) - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert_eq!(rank_residual(&id, 3), 0.0);
    }

    #[test]
    fn rank_one_distillation_finds_a_zero_mode() {
        let (b, h, pp, _) = l16();
        let map = BlockMap::new(&b, 2, 0, (1, 1), (1, 1), &pp).unwrap();
        let runs = campaign(&map, &ApOptions::new(1), 10, 0);
        let hit = runs.iter().find(|r| r.outcome == Outcome::Converged).expect("no converged run");
        assert!(hit.rank_residual < 1e-6);
        let psi = map.inverse(&hit.rho);
        assert!(h.matvec(&psi).iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-8);
        assert!(span_weight(&pp.vectors, &psi) > 1.0 - 1e-10);
    }

    #[test]
    fn labels_parse() {
        assert_eq!(parse_label("+-").unwrap(), (1, -1));
        assert_eq!(parse_label("(-,+)").unwrap(), (-1, 1));
        assert!(parse_label("+").is_err());
        assert!(parse_label("+x").is_err());
    }

    #[test]
    fn axis_reflection_is_an_involution() {
        let b = ConstrainedBasis::new(12, 1, Bc::Pbc).unwrap();
        for &c in &b.states {
            let r = axis_reflection(c, 12, 2);
            assert!(b.index(r).is_some());
            assert_eq!(axis_reflection(r, 12, 2), c);
        }
    }
}
