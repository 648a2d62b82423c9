//! Sector time evolution, Z2 revivals, single-defect (SMA) manifolds over
//! exact scars and eigenstate overlap profiles.

use nalgebra::DVector;

use crate::hilbert::{build_sector, translate, Bc, ConstrainedBasis, SymmetrySector};
use crate::linalg::{self, RMat};
use crate::model::SparseOperator;
use crate::mps::{Layout, Mps};
use crate::{Error, Result, C64};

/// Orthonormal span of constrained single-defect states over a TI base.
#[derive(Clone, Debug)]
pub struct SmaManifold {
    /// Orthonormal columns in sector coordinates.
    pub basis: RMat,
    /// Number of defect tensors tried (d * chi^2).
    pub generators: usize,
}

impl SmaManifold {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

fn real_tensors(mps: &Mps) -> Result<Vec<RMat>> {
    if !matches!(&mps.layout, Layout::Units(b) if b.width == 1) || mps.defect.is_some() {
        return Err(Error::Invalid("SMA construction needs a TI spin-half MPS".into()));
    }
    mps.tensors
        .iter()
        .map(|m| {
            if m.iter().any(|z| z.im.abs() > 1e-14) {
                Err(Error::Invalid("SMA construction needs real tensors".into()))
            } else {
                Ok(m.map(|z| z.re))
            }
        })
        .collect()
}

/// Amplitudes of all single-entry defect states on configuration `c`:
/// entry (s, a, b) is sum over sites j with s_j = s of (R_j)_{ba}, R_j the
/// cyclic product of the base tensors on all other sites.
fn defect_amplitudes(ms: &[RMat], c: u64, l: usize, out: &mut [f64]) {
    let chi = ms[0].nrows();
    let sym = |j: usize| (c >> j & 1) as usize;
    // suffix[j] = M_{s_j} ... M_{s_{l-1}}
    let mut suffix = vec![RMat::identity(chi, chi); l + 1];
    for j in (0..l).rev() {
        suffix[j] = &ms[sym(j)] * &suffix[j + 1];
    }
    let mut prefix = RMat::identity(chi, chi);
    out.iter_mut().for_each(|x| *x = 0.0);
    for j in 0..l {
        // R_j = M_{j+1..l-1} M_{0..j-1}
        let r = &suffix[j + 1] * &prefix;
        let s = sym(j);
        for a in 0..chi {
            for b in 0..chi {
                out[(s * chi + a) * chi + b] += r[(b, a)];
            }
        }
        prefix = &prefix * &ms[s];
    }
}

/// SMA_1 manifold of a TI spin-half MPS, in the coordinates of `sector`.
/// Rank is cut at 1e-10 relative to the largest singular value.
pub fn build_sma(base: &Mps, basis: &ConstrainedBasis, sector: &SymmetrySector) -> Result<SmaManifold> {
    if basis.bc != Bc::Pbc {
        return Err(Error::Invalid("SMA manifolds are built with PBC".into()));
    }
    let ms = real_tensors(base)?;
    let chi = ms[0].nrows();
    let nd = ms.len() * chi * chi;
    let rev = sector.reverse_map(basis.dim());
    let mut coords = RMat::zeros(sector.dim(), nd);
    let mut amps = vec![0.0; nd];
    for (i, &c) in basis.states.iter().enumerate() {
        if rev[i].is_empty() {
            continue;
        }
        defect_amplitudes(&ms, c, basis.l, &mut amps);
        for &(k, a) in &rev[i] {
            for (d, &x) in amps.iter().enumerate() {
                coords[(k, d)] += a * x;
            }
        }
    }
    Ok(SmaManifold { basis: orth_columns(&coords, 1e-10), generators: nd })
}

/// Orthonormal basis of the column span with relative cutoff.
pub fn orth_columns(m: &RMat, tol: f64) -> RMat {
    if m.ncols() == 0 {
        return m.clone();
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > tol * smax.max(1e-300))
        .collect();
    RMat::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

/// Normalized projection of `target` onto the manifold, and the weight
/// ||P target||^2 / ||target||^2.
pub fn project_max_overlap(target: &DVector<f64>, manifold: &RMat) -> (DVector<f64>, f64) {
    let c = manifold.transpose() * target;
    let p = manifold * c;
    let w = p.norm_squared() / target.norm_squared().max(1e-300);
    let n = p.norm().max(1e-300);
    (p / n, w)
}

/// |Z2> = |0101...01> (site 1 excited first) and (|Z2> + T_x|Z2>)/sqrt 2.
pub fn z2_state(basis: &ConstrainedBasis, plus: bool) -> Result<Vec<f64>> {
    let l = basis.l;
    if !l.is_multiple_of(2) {
        return Err(Error::Invalid("Z2 needs even L".into()));
    }
    let z: u64 = (0..l / 2).fold(0, |a, j| a | 1 << (2 * j + 1));
    let mut v = vec![0.0; basis.dim()];
    v[basis.index(z).unwrap()] = 1.0;
    if plus {
        let t = translate(z, l, 1);
        v.iter_mut().for_each(|x| *x *= std::f64::consts::FRAC_1_SQRT_2);
        v[basis.index(t).unwrap()] += std::f64::consts::FRAC_1_SQRT_2;
    }
    Ok(v)
}

/// Eigen-decomposition of `h` within a sector.
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    pub energies: Vec<f64>,
    pub vectors: RMat,
}

pub fn sector_spectrum(h: &SparseOperator, sector: &SymmetrySector) -> SectorSpectrum {
    let (energies, vectors) = linalg::sym_eigh(h.restrict(sector));
    SectorSpectrum { energies, vectors }
}

/// PXP sector with momentum 0 under single-site translations and the given
/// inversion eigenvalue.
pub fn k0_sector(basis: &ConstrainedBasis, inversion: Option<i8>) -> Result<SymmetrySector> {
    build_sector(basis, 1, 0, inversion, None)
}

/// Overlap series |<target|psi(t)>|^2 and norms ||psi(t)||, exact in the
/// sector eigenbasis.
pub fn evolve(spec: &SectorSpectrum, psi0: &DVector<f64>, target: &DVector<f64>, times: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let a = spec.vectors.transpose() * psi0;
    let b = spec.vectors.transpose() * target;
    let mut overlaps = Vec::with_capacity(times.len());
    let mut norms = Vec::with_capacity(times.len());
    for &t in times {
        let mut ov = C64::new(0.0, 0.0);
        let mut nrm = 0.0;
        for (n, &e) in spec.energies.iter().enumerate() {
            let z = a[n] * C64::from_polar(1.0, -e * t);
            ov += z * b[n];
            nrm += z.norm_sqr();
        }
        overlaps.push(ov.norm_sqr());
        norms.push(nrm.sqrt());
    }
    (overlaps, norms)
}

/// Per-eigenstate (energy, squared projection onto `manifold`).
pub fn eigen_overlap_profile(spec: &SectorSpectrum, manifold: &RMat) -> Vec<(f64, f64)> {
    let ov = manifold.transpose() * &spec.vectors;
    spec.energies
        .iter()
        .enumerate()
        .map(|(n, &e)| (e, ov.column(n).norm_squared()))
        .collect()
}

/// Same for a single state.
pub fn eigen_overlap_state(spec: &SectorSpectrum, psi: &DVector<f64>) -> Vec<(f64, f64)> {
    let n2 = psi.norm_squared().max(1e-300);
    let ov = spec.vectors.transpose() * psi;
    spec.energies.iter().zip(ov.iter()).map(|(&e, &x)| (e, x * x / n2)).collect()
}

/// Dominant peaks: greedily the heaviest eigenstates above `floor`, each at
/// least `min_sep` in energy from the ones already taken; sorted by energy.
pub fn peaks(profile: &[(f64, f64)], floor: f64, min_sep: f64) -> Vec<(f64, f64)> {
    let mut p: Vec<(f64, f64)> = profile.iter().cloned().filter(|x| x.1 > floor).collect();
    p.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::new();
    for x in p {
        if out.iter().all(|y| (y.0 - x.0).abs() >= min_sep) {
            out.push(x);
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// CSV with a header row.
pub fn to_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|x| format!("{x:.12e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Mean and variance of `h` in a real state.
pub fn energy_variance(h: &SparseOperator, psi: &[f64]) -> (f64, f64) {
    let n2: f64 = psi.iter().map(|x| x * x).sum();
    let hp = h.matvec(psi);
    let e = psi.iter().zip(&hp).map(|(a, b)| a * b).sum::<f64>() / n2;
    let e2 = hp.iter().map(|x| x * x).sum::<f64>() / n2;
    (e, e2 - e * e)
}

/// OBC manifold spanned by all unit-vector terminations v = e_a, w = e_b of
/// an MPS (full-space columns, orthonormalized).
pub fn termination_manifold(mps: &Mps, basis: &ConstrainedBasis) -> Result<RMat> {
    if basis.bc != Bc::Obc {
        return Err(Error::Invalid("termination manifold needs OBC".into()));
    }
    let chi = mps.chi();
    let mut cols = RMat::zeros(basis.dim(), chi * chi);
    for a in 0..chi {
        for b in 0..chi {
            let v = linalg::CMat::from_fn(chi, 1, |i, _| C64::new((i == a) as u8 as f64, 0.0));
            let w = linalg::CMat::from_fn(chi, 1, |i, _| C64::new((i == b) as u8 as f64, 0.0));
            let psi = mps.expand(basis, Some((&v, &w)))?;
            if psi.iter().any(|z| z.im.abs() > 1e-12) {
                return Err(Error::Invalid("termination manifold needs a real MPS".into()));
            }
            for (i, z) in psi.iter().enumerate() {
                cols[(i, a * chi + b)] = z.re;
            }
        }
    }
    Ok(orth_columns(&cols, 1e-10))
}
