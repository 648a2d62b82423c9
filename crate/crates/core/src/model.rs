//! Sparse Hamiltonians of the PXP family, the PSP spin-s family, the
//! H1/H2 splits used by certification, and translated projector sums.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DVector;

use crate::hilbert::{self, Bc, ConstrainedBasis, SymmetrySector};
use crate::linalg::{self, CMat, RMat};
use crate::{Error, Result, C64};

/// Real operator in compressed sparse row form.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
    pub hermitian: bool,
}

impl SparseOperator {
    pub fn from_triplets(dim: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(trip.len());
        let mut vals: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
            last = Some((r, c));
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut op = Self {
            dim,
            row_ptr,
            cols,
            vals,
            hermitian: false,
        };
        op.hermitian = op.is_symmetric(1e-12);
        op
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[a..b].iter().cloned().zip(self.vals[a..b].iter().cloned())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.dim)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .collect()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|r| self.row(r).all(|(c, v)| (self.get(c, r) - v).abs() <= tol))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn matvec_c(&self, x: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|r| self.row(r).map(|(c, v)| x[c] * v).sum())
            .collect()
    }

    pub fn add(&self, other: &SparseOperator) -> SparseOperator {
        let mut t = self.triplets();
        t.extend(other.triplets());
        SparseOperator::from_triplets(self.dim, t)
    }

    pub fn to_dense(&self) -> RMat {
        let mut m = RMat::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Dense matrix `V^T A V` for a real sector basis `V`.
    pub fn restrict(&self, sector: &SymmetrySector) -> RMat {
        let n = sector.dim();
        let rev = sector.reverse_map(self.dim);
        let mut m = RMat::zeros(n, n);
        // A is stored by rows; use A^T columns == rows of A when symmetric,
        // otherwise accumulate via the explicit transpose below.
        let at = if self.hermitian { None } else { Some(self.transpose()) };
        let src = at.as_ref().unwrap_or(self);
        for (a, va) in sector.vectors.iter().enumerate() {
            for &(i, x) in va {
                // column i of A
                for (j, h) in src.row(i) {
                    for &(b, y) in &rev[j] {
                        m[(b, a)] += y * h * x;
                    }
                }
            }
        }
        m
    }

    pub fn transpose(&self) -> SparseOperator {
        let t = self.triplets().into_iter().map(|(r, c, v)| (c, r, v)).collect();
        SparseOperator::from_triplets(self.dim, t)
    }

    /// MatrixMarket coordinate text (1-based indices).
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.dim, self.dim, self.nnz());
        for (r, c, v) in self.triplets() {
            let _ = writeln!(s, "{} {} {:.17e}", r + 1, c + 1, v);
        }
        s
    }
}

/// Can site `j` of configuration `c` be flipped without leaving the space?
fn flip_allowed(c: u64, j: usize, l: usize, alpha: usize, bc: Bc) -> bool {
    if c >> j & 1 == 1 {
        return true;
    }
    for k in 1..=alpha {
        match bc {
            Bc::Pbc => {
                if c >> ((j + k) % l) & 1 == 1 || c >> ((j + l - k % l) % l) & 1 == 1 {
                    return false;
                }
            }
            Bc::Obc => {
                if j + k < l && c >> (j + k) & 1 == 1 {
                    return false;
                }
                if j >= k && c >> (j - k) & 1 == 1 {
                    return false;
                }
            }
        }
    }
    true
}

/// H^alpha = sum_j (prod of projectors within alpha) X_j; alpha = 1 is PXP.
/// Under OBC the edge terms lose their missing projectors.
pub fn build_h_alpha(basis: &ConstrainedBasis) -> SparseOperator {
    let (l, alpha, bc) = (basis.l, basis.alpha, basis.bc);
    let mut trip = Vec::with_capacity(basis.dim() * l / 2);
    for (i, &c) in basis.states.iter().enumerate() {
        for j in 0..l {
            if flip_allowed(c, j, l, alpha, bc) {
                let t = basis.index(c ^ (1 << j)).expect("flip stays in basis");
                trip.push((t, i, 1.0));
            }
        }
    }
    SparseOperator::from_triplets(basis.dim(), trip)
}

/// Matrix-free H^alpha application.
pub fn apply_h_alpha(basis: &ConstrainedBasis, x: &[f64], y: &mut [f64]) {
    let (l, alpha, bc) = (basis.l, basis.alpha, basis.bc);
    y.iter_mut().for_each(|v| *v = 0.0);
    for (i, &c) in basis.states.iter().enumerate() {
        if x[i] == 0.0 {
            continue;
        }
        for j in 0..l {
            if flip_allowed(c, j, l, alpha, bc) {
                y[basis.index(c ^ (1 << j)).unwrap()] += x[i];
            }
        }
    }
}

// ---------------------------------------------------------------- PSP model

/// Constrained basis of the PSP spin-s chain: each site holds m in
/// {-s..s} stored as digit d = m + s; sites with d != 0 are "excited" and
/// may not lie within distance alpha of each other.
#[derive(Clone, Debug)]
pub struct PspBasis {
    pub l: usize,
    /// 2s
    pub two_s: usize,
    pub alpha: usize,
    pub bc: Bc,
    pub states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl PspBasis {
    pub fn new(l: usize, two_s: usize, alpha: usize, bc: Bc) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::Invalid("spin must be positive".into()));
        }
        let bits = ConstrainedBasis::new(l, alpha, bc)?;
        let mut states = Vec::new();
        let d = two_s as u8;
        for &c in &bits.states {
            let exc: Vec<usize> = (0..l).filter(|&j| c >> j & 1 == 1).collect();
            // each excited site takes any nonzero digit
            let mut digits = vec![0u8; l];
            fn rec(k: usize, exc: &[usize], d: u8, digits: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
                if k == exc.len() {
                    out.push(digits.clone());
                    return;
                }
                for v in 1..=d {
                    digits[exc[k]] = v;
                    rec(k + 1, exc, d, digits, out);
                }
                digits[exc[k]] = 0;
            }
            rec(0, &exc, d, &mut digits, &mut states);
        }
        states.sort();
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self {
            l,
            two_s,
            alpha,
            bc,
            states,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index(&self, s: &[u8]) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn s(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    fn neighbors_frozen(&self, st: &[u8], j: usize) -> bool {
        let l = self.l;
        (1..=self.alpha).all(|k| match self.bc {
            Bc::Pbc => st[(j + k) % l] == 0 && st[(j + l - k % l) % l] == 0,
            Bc::Obc => (j + k >= l || st[j + k] == 0) && (j < k || st[j - k] == 0),
        })
    }
}

/// <m+1|S^x|m> for spin s.
pub fn sx_up(s: f64, m: f64) -> f64 {
    ((s - m) * (s + m + 1.0)).max(0.0).sqrt() / 2.0
}

pub fn build_psp(basis: &PspBasis) -> SparseOperator {
    let s = basis.s();
    let mut trip = Vec::new();
    for (i, st) in basis.states.iter().enumerate() {
        for j in 0..basis.l {
            if !basis.neighbors_frozen(st, j) {
                continue;
            }
            let m = st[j] as f64 - s;
            let mut t = st.clone();
            if (st[j] as usize) < basis.two_s {
                t[j] = st[j] + 1;
                trip.push((basis.index(&t).unwrap(), i, sx_up(s, m)));
            }
            if st[j] > 0 {
                t[j] = st[j] - 1;
                trip.push((basis.index(&t).unwrap(), i, sx_up(s, m - 1.0)));
            }
        }
    }
    SparseOperator::from_triplets(basis.dim(), trip)
}

// ------------------------------------------------------------------ splits

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitScheme {
    /// One-body terms on two-site blocks {O, L, R}.
    BlockedOneBody,
    /// H1 = sum_j X_j.
    SpinHalfSumX,
    /// Three-site block terms plus spacer terms on units of alpha+2 sites.
    FrozenMotif,
    /// H1 = sum_j S^x_j.
    PspSumSx,
}

/// Operator whose columns are basis states and whose rows are arbitrary
/// configurations (constrained or not).
#[derive(Clone, Debug)]
pub struct OffBasisOperator {
    pub columns: Vec<HashMap<Vec<u8>, f64>>,
}

#[derive(Clone, Debug)]
pub struct HamiltonianSplit {
    pub scheme: SplitScheme,
    pub h1: OffBasisOperator,
    pub h2: OffBasisOperator,
    /// Largest in-space matrix element of H2 (zero when the invariant holds).
    pub leak: f64,
}

fn bits_to_digits(c: u64, l: usize) -> Vec<u8> {
    (0..l).map(|j| (c >> j & 1) as u8).collect()
}

/// Local H^alpha_OBC action on the sites `sites` (contiguous), ignoring
/// everything outside them.
fn local_h_obc(c: u64, sites: std::ops::Range<usize>, alpha: usize, out: &mut Vec<(u64, f64)>) {
    let (a, b) = (sites.start, sites.end);
    for j in a..b {
        let blocked = (1..=alpha).any(|k| {
            (j + k < b && c >> (j + k) & 1 == 1) || (j >= a + k && c >> (j - k) & 1 == 1)
        });
        if c >> j & 1 == 1 || !blocked {
            out.push((c ^ (1 << j), 1.0));
        }
    }
}

/// Splits H^alpha (on `basis`) and checks P H2 P = 0.
pub fn split_h1_h2(basis: &ConstrainedBasis, scheme: SplitScheme) -> Result<HamiltonianSplit> {
    let (l, alpha) = (basis.l, basis.alpha);
    let h = build_h_alpha(basis);
    let mut h1cols = Vec::with_capacity(basis.dim());
    let mut h2cols = Vec::with_capacity(basis.dim());
    let mut leak: f64 = 0.0;
    for (i, &c) in basis.states.iter().enumerate() {
        let mut terms: Vec<(u64, f64)> = Vec::new();
        match scheme {
            SplitScheme::SpinHalfSumX => {
                for j in 0..l {
                    terms.push((c ^ (1 << j), 1.0));
                }
            }
            SplitScheme::BlockedOneBody => {
                if l % 2 != 0 {
                    return Err(Error::Split("blocked split needs even L".into()));
                }
                for b in 0..l / 2 {
                    for j in [2 * b, 2 * b + 1] {
                        let t = c ^ (1 << j);
                        if (t >> (2 * b)) & 0b11 != 0b11 {
                            terms.push((t, 1.0));
                        }
                    }
                }
            }
            SplitScheme::FrozenMotif => {
                let w = alpha + 2;
                if l % w != 0 {
                    return Err(Error::Split(format!("frozen-motif split needs L divisible by {w}")));
                }
                for u in 0..l / w {
                    let a = u * w;
                    local_h_obc(c, a..a + 3, alpha, &mut terms);
                    local_h_obc(c, a + 3..a + w, alpha, &mut terms);
                }
            }
            SplitScheme::PspSumSx => {
                return Err(Error::Split("PSP split needs a PSP basis".into()));
            }
        }
        let mut col1: HashMap<Vec<u8>, f64> = HashMap::new();
        for (t, v) in terms {
            *col1.entry(bits_to_digits(t, l)).or_insert(0.0) += v;
        }
        let mut col2: HashMap<Vec<u8>, f64> = HashMap::new();
        for (k, v) in &col1 {
            *col2.entry(k.clone()).or_insert(0.0) -= v;
        }
        // H is symmetric: column i equals row i
        for (r, v) in h.row(i) {
            *col2.entry(bits_to_digits(basis.states[r], l)).or_insert(0.0) += v;
        }
        for (k, v) in &col2 {
            let cfg = k.iter().enumerate().fold(0u64, |a, (j, &d)| a | ((d as u64) << j));
            if v.abs() > 1e-14 && hilbert::is_valid(cfg, l, alpha, basis.bc) {
                leak = leak.max(v.abs());
            }
        }
        col2.retain(|_, v| v.abs() > 1e-14);
        h1cols.push(col1);
        h2cols.push(col2);
    }
    if leak > 1e-12 {
        return Err(Error::Split(format!("P H2 P != 0 (max element {leak})")));
    }
    Ok(HamiltonianSplit {
        scheme,
        h1: OffBasisOperator { columns: h1cols },
        h2: OffBasisOperator { columns: h2cols },
        leak,
    })
}

/// PSP split with H1 = sum_j S^x_j.
pub fn split_psp(basis: &PspBasis) -> Result<HamiltonianSplit> {
    let s = basis.s();
    let h = build_psp(basis);
    let ht = h.transpose();
    let mut h1cols = Vec::new();
    let mut h2cols = Vec::new();
    let mut leak: f64 = 0.0;
    for (i, st) in basis.states.iter().enumerate() {
        let mut col1: HashMap<Vec<u8>, f64> = HashMap::new();
        for j in 0..basis.l {
            let m = st[j] as f64 - s;
            let mut t = st.clone();
            if (st[j] as usize) < basis.two_s {
                t[j] = st[j] + 1;
                *col1.entry(t.clone()).or_insert(0.0) += sx_up(s, m);
            }
            if st[j] > 0 {
                t[j] = st[j] - 1;
                *col1.entry(t.clone()).or_insert(0.0) += sx_up(s, m - 1.0);
            }
        }
        let mut col2: HashMap<Vec<u8>, f64> = col1.iter().map(|(k, v)| (k.clone(), -v)).collect();
        for (r, v) in ht.row(i) {
            *col2.entry(basis.states[r].clone()).or_insert(0.0) += v;
        }
        for (k, v) in &col2 {
            if v.abs() > 1e-14 && basis.index(k).is_some() {
                leak = leak.max(v.abs());
            }
        }
        col2.retain(|_, v| v.abs() > 1e-14);
        h1cols.push(col1);
        h2cols.push(col2);
    }
    if leak > 1e-12 {
        return Err(Error::Split(format!("P H2 P != 0 (max element {leak})")));
    }
    Ok(HamiltonianSplit {
        scheme: SplitScheme::PspSumSx,
        h1: OffBasisOperator { columns: h1cols },
        h2: OffBasisOperator { columns: h2cols },
        leak,
    })
}

// ------------------------------------------------------- projector families

/// A vector on `range` consecutive units of `width` sites, given as
/// (local bit pattern, amplitude) pairs. Bit 0 is the leftmost site.
#[derive(Clone, Debug)]
pub struct LocalVector {
    pub width: usize,
    pub range: usize,
    pub terms: Vec<(u64, f64)>,
}

impl LocalVector {
    pub fn sites(&self) -> usize {
        self.width * self.range
    }
}

/// Orthonormal real basis of span{v_i} as dense vectors over local patterns.
fn local_orthonormal(vs: &[LocalVector]) -> (Vec<u64>, Vec<Vec<f64>>) {
    let mut pats: Vec<u64> = vs.iter().flat_map(|v| v.terms.iter().map(|t| t.0)).collect();
    pats.sort_unstable();
    pats.dedup();
    let cols: Vec<DVector<C64>> = vs
        .iter()
        .map(|v| {
            let mut d = DVector::zeros(pats.len());
            for &(p, a) in &v.terms {
                d[pats.binary_search(&p).unwrap()] += C64::new(a, 0.0);
            }
            d
        })
        .collect();
    let q = linalg::orthonormalize(&cols, 1e-10);
    (pats, q.iter().map(|v| v.iter().map(|z| z.re).collect()).collect())
}

fn read_local(c: u64, start: usize, n: usize, l: usize) -> u64 {
    (0..n).fold(0, |a, k| a | ((c >> ((start + k) % l) & 1) << k))
}

fn write_local(c: u64, start: usize, n: usize, l: usize, pat: u64) -> u64 {
    let mut c = c;
    for k in 0..n {
        let s = (start + k) % l;
        c = (c & !(1 << s)) | ((pat >> k & 1) << s);
    }
    c
}

/// Translated projector sum `sum_j P_j` (unit steps of `width` sites) onto
/// span{v_i}, restricted to the constrained space. Under OBC only fully
/// contained windows are used.
pub fn build_projector_family(basis: &ConstrainedBasis, vs: &[LocalVector]) -> Result<SparseOperator> {
    let first = vs.first().ok_or_else(|| Error::Invalid("empty projector family".into()))?;
    let (w, n) = (first.width, first.sites());
    if vs.iter().any(|v| v.width != w || v.sites() != n) {
        return Err(Error::Invalid("mixed local supports".into()));
    }
    let l = basis.l;
    if !l.is_multiple_of(w) {
        return Err(Error::Invalid("L not a multiple of the unit width".into()));
    }
    let (pats, q) = local_orthonormal(vs);
    let starts: Vec<usize> = match basis.bc {
        Bc::Pbc => (0..l / w).map(|u| u * w).collect(),
        Bc::Obc => (0..l / w).map(|u| u * w).filter(|&s| s + n <= l).collect(),
    };
    let mut trip = Vec::new();
    for (i, &c) in basis.states.iter().enumerate() {
        for &s in &starts {
            let x = read_local(c, s, n, l);
            let Ok(px) = pats.binary_search(&x) else { continue };
            for qv in &q {
                let a = qv[px];
                if a == 0.0 {
                    continue;
                }
                for (py, &y) in pats.iter().enumerate() {
                    let b = qv[py];
                    if b == 0.0 {
                        continue;
                    }
                    let t = write_local(c, s, n, l, y);
                    if let Some(r) = basis.index(t) {
                        trip.push((r, i, a * b));
                    }
                }
            }
        }
    }
    Ok(SparseOperator::from_triplets(basis.dim(), trip))
}

/// Common kernel of the projectors `P_j` (range and translations as in
/// `build_projector_family`): states annihilated by every window.
///
/// Rows <v_i (x) context| that touch a single surviving basis state force
/// that amplitude to zero; they are eliminated first and the remainder is
/// handled densely.
pub fn common_kernel(basis: &ConstrainedBasis, vs: &[LocalVector], tol: f64) -> Result<RMat> {
    let (w, n) = (vs[0].width, vs[0].sites());
    let l = basis.l;
    let (pats, q) = local_orthonormal(vs);
    let starts: Vec<usize> = match basis.bc {
        Bc::Pbc => (0..l / w).map(|u| u * w).collect(),
        Bc::Obc => (0..l / w).map(|u| u * w).filter(|&s| s + n <= l).collect(),
    };
    // rows keyed by (window, vector, context)
    let mut rows: HashMap<(usize, usize, u64), Vec<(usize, f64)>> = HashMap::new();
    for (i, &c) in basis.states.iter().enumerate() {
        for (si, &s) in starts.iter().enumerate() {
            let x = read_local(c, s, n, l);
            let Ok(px) = pats.binary_search(&x) else { continue };
            let ctx = write_local(c, s, n, l, 0);
            for (k, qv) in q.iter().enumerate() {
                if qv[px] != 0.0 {
                    rows.entry((si, k, ctx)).or_default().push((i, qv[px]));
                }
            }
        }
    }
    let mut rows: Vec<Vec<(usize, f64)>> = rows.into_values().collect();
    rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut alive = vec![true; basis.dim()];
    loop {
        let mut changed = false;
        for r in &rows {
            let live: Vec<usize> = r.iter().filter(|(i, _)| alive[*i]).map(|(i, _)| *i).collect();
            if live.len() == 1 {
                alive[live[0]] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let cols: Vec<usize> = (0..basis.dim()).filter(|&i| alive[i]).collect();
    let pos: HashMap<usize, usize> = cols.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let m = cols.len();
    let mut g = RMat::zeros(m, m);
    for r in &rows {
        let live: Vec<(usize, f64)> = r
            .iter()
            .filter(|(i, _)| alive[*i])
            .map(|&(i, a)| (pos[&i], a))
            .collect();
        for &(a, x) in &live {
            for &(b, y) in &live {
                g[(a, b)] += x * y;
            }
        }
    }
    let (vals, vecs) = linalg::sym_eigh(g);
    let keep: Vec<usize> = (0..m).filter(|&k| vals[k].abs() < tol).collect();
    let mut out = RMat::zeros(basis.dim(), keep.len());
    for (j, &k) in keep.iter().enumerate() {
        for (a, &i) in cols.iter().enumerate() {
            out[(i, j)] = vecs[(a, k)];
        }
    }
    Ok(out)
}

/// Dense complex copy of a real operator restricted to a sector.
pub fn sector_matrix(op: &SparseOperator, sector: &SymmetrySector) -> CMat {
    linalg::to_complex(&op.restrict(sector))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_sector, SymOp};

    #[test]
    fn h_alpha_matches_single_flip_oracle() {
        // <c'|H|c> = 1 iff c and c' are valid and differ in one bit
        for (l, alpha, bc) in [(10, 1, Bc::Pbc), (9, 1, Bc::Obc), (11, 2, Bc::Pbc), (10, 3, Bc::Obc)] {
            let b = ConstrainedBasis::new(l, alpha, bc).unwrap();
            let h = build_h_alpha(&b).to_dense();
            for (i, &c) in b.states.iter().enumerate() {
                for (j, &d) in b.states.iter().enumerate() {
                    let want = if (c ^ d).count_ones() == 1 { 1.0 } else { 0.0 };
                    assert_eq!(h[(i, j)], want, "L={l} alpha={alpha} {bc:?}");
                }
            }
        }
    }

    #[test]
    fn h_symmetries() {
        let b = ConstrainedBasis::new(14, 1, Bc::Pbc).unwrap();
        let h = build_h_alpha(&b);
        assert!(h.is_symmetric(0.0));
        let v: Vec<f64> = (0..b.dim()).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let hv = h.matvec(&v);
        // C anticommutes, T and I commute
        let chv = b.apply_symmetry(SymOp::C, &hv).unwrap();
        let hcv = h.matvec(&b.apply_symmetry(SymOp::C, &v).unwrap());
        assert!(chv.iter().zip(&hcv).all(|(a, b)| (a + b).abs() < 1e-12));
        for op in [SymOp::T(1), SymOp::I] {
            let ohv = b.apply_symmetry(op, &hv).unwrap();
            let hov = h.matvec(&b.apply_symmetry(op, &v).unwrap());
            assert!(ohv.iter().zip(&hov).all(|(a, b)| (a - b).abs() < 1e-12));
        }
        let mut y = vec![0.0; b.dim()];
        apply_h_alpha(&b, &v, &mut y);
        assert!(y.iter().zip(&hv).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn sector_blocks_reproduce_the_spectrum() {
        let b = ConstrainedBasis::new(10, 1, Bc::Pbc).unwrap();
        let h = build_h_alpha(&b);
        let (mut full, _) = linalg::sym_eigh(h.to_dense());
        let mut parts = Vec::new();
        for m in hilbert::momenta(10, 1) {
            for i in [1, -1] {
                let s = build_sector(&b, 1, m, Some(i), None).unwrap();
                if s.dim() > 0 {
                    parts.extend(linalg::sym_eigh(h.restrict(&s)).0);
                }
            }
        }
        full.sort_by(|a, b| a.partial_cmp(b).unwrap());
        parts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(full.len(), parts.len());
        assert!(full.iter().zip(&parts).all(|(a, b)| (a - b).abs() < 1e-10));
        // spectral reflection from {C, H} = 0
        assert!(full.iter().zip(full.iter().rev()).all(|(a, b)| (a + b).abs() < 1e-10));
    }

    #[test]
    fn spin_half_psp_is_half_pxp() {
        let pb = PspBasis::new(10, 1, 1, Bc::Pbc).unwrap();
        let b = ConstrainedBasis::new(10, 1, Bc::Pbc).unwrap();
        assert_eq!(pb.dim(), b.dim());
        let hp = build_psp(&pb);
        let h = build_h_alpha(&b);
        let bits = |st: &[u8]| st.iter().enumerate().fold(0u64, |c, (j, &d)| c | (d as u64) << j);
        for (r, c, v) in hp.triplets() {
            let (i, j) = (b.index(bits(&pb.states[r])).unwrap(), b.index(bits(&pb.states[c])).unwrap());
            assert!((v - 0.5 * h.get(i, j)).abs() < 1e-14);
        }
        assert_eq!(hp.nnz(), h.nnz());
    }

    #[test]
    fn psp_dimension_counts_digits() {
        // each excitation of a constrained bitstring takes 2s values
        let b = ConstrainedBasis::new(9, 2, Bc::Obc).unwrap();
        let want: usize = b.states.iter().map(|c| 3usize.pow(c.count_ones())).sum();
        assert_eq!(PspBasis::new(9, 3, 2, Bc::Obc).unwrap().dim(), want);
        assert!(build_psp(&PspBasis::new(8, 2, 1, Bc::Pbc).unwrap()).is_symmetric(1e-14));
    }

    #[test]
    fn projector_family_kernel() {
        let b = ConstrainedBasis::new(12, 1, Bc::Pbc).unwrap();
        let vs = crate::catalog::five_projector_vectors();
        let p = build_projector_family(&b, &vs).unwrap();
        assert!(p.is_symmetric(1e-12));
        let k = common_kernel(&b, &vs, 1e-9).unwrap();
        assert!(k.ncols() > 0);
        for j in 0..k.ncols() {
            let v: Vec<f64> = k.column(j).iter().cloned().collect();
            let pv = p.matvec(&v);
            assert!(pv.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-9);
        }
        // P is a sum of projectors, so PSD
        let (ev, _) = linalg::sym_eigh(p.to_dense());
        assert!(ev[0] > -1e-10);
    }

    #[test]
    fn matrix_market_layout() {
        let b = ConstrainedBasis::new(6, 1, Bc::Pbc).unwrap();
        let h = build_h_alpha(&b);
        let text = h.to_matrix_market();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("%%MatrixMarket matrix coordinate real general"));
        assert_eq!(lines.next().unwrap(), format!("18 18 {}", h.nnz()));
        assert_eq!(lines.count(), h.nnz());
    }
}
