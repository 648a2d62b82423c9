//! Translation-invariant (TI), twisted-TI (TTI) and blocked-antipodal (BA)
//! matrix product states: expansions, transfer matrices, norms,
//! correlation lengths and bipartite entanglement spectra.

use serde::{Deserialize, Serialize};

use crate::hilbert::{ConstrainedBasis, LocalBasis};
use crate::linalg::{self, CMat};
use crate::model::PspBasis;
use crate::{Error, Result, C64};

/// How unit symbols map onto physical sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "lowercase")]
pub enum Layout {
    /// Consecutive units of `width` sites with bit patterns.
    Units(LocalBasis),
    /// Spin-half pairs (i, i + L/2); symbol = 2 s_i + s_{i+L/2}.
    Antipodal,
    /// PSP digits: symbol k on the first site of a unit of `width` sites,
    /// the remaining sites frozen at digit 0 (m = -s).
    Digits { d: usize, width: usize },
}

impl Layout {
    pub fn symbols(&self) -> usize {
        match self {
            Layout::Units(b) => b.patterns.len(),
            Layout::Antipodal => 4,
            Layout::Digits { d, .. } => *d,
        }
    }

    pub fn width(&self) -> usize {
        match self {
            Layout::Units(b) => b.width,
            Layout::Antipodal => 1,
            Layout::Digits { width, .. } => *width,
        }
    }

    /// Spin sites per MPS tensor, used to convert correlation lengths.
    pub fn sites_per_tensor(&self) -> usize {
        match self {
            Layout::Units(b) => b.width,
            Layout::Antipodal => 1,
            Layout::Digits { width, .. } => *width,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MpsKind {
    Ti,
    Tti,
    Ba,
}

/// A TI, TTI or BA MPS. TTI states carry defect tensors `M_1^s` that enter
/// through the stacked tensors [[M, 0], [e^{ikr} M_1, M]] and the twist
/// [[0, 1], [0, 0]].
#[derive(Clone, Debug)]
pub struct Mps {
    pub layout: Layout,
    pub tensors: Vec<CMat>,
    pub defect: Option<Vec<CMat>>,
    /// Defect momentum k (site phase e^{ikr}, r counted in units).
    pub phase_k: f64,
}

impl Mps {
    pub fn ti(layout: Layout, tensors: Vec<CMat>) -> Self {
        Self {
            layout,
            tensors,
            defect: None,
            phase_k: 0.0,
        }
    }

    pub fn tti(layout: Layout, tensors: Vec<CMat>, defect: Vec<CMat>) -> Self {
        Self {
            layout,
            tensors,
            defect: Some(defect),
            phase_k: 0.0,
        }
    }

    pub fn kind(&self) -> MpsKind {
        match (&self.layout, &self.defect) {
            (_, Some(_)) => MpsKind::Tti,
            (Layout::Antipodal, None) => MpsKind::Ba,
            _ => MpsKind::Ti,
        }
    }

    pub fn chi(&self) -> usize {
        self.tensors[0].nrows()
    }

    /// Stacked tensor at unit position `r`.
    pub fn site_tensors(&self, r: usize) -> Vec<CMat> {
        match &self.defect {
            None => self.tensors.clone(),
            Some(d) => {
                let ph = C64::from_polar(1.0, self.phase_k * r as f64);
                self.tensors
                    .iter()
                    .zip(d)
                    .map(|(m, m1)| stack(m, &(m1 * ph)))
                    .collect()
            }
        }
    }

    pub fn boundary(&self) -> CMat {
        let chi = self.chi();
        match self.defect {
            None => CMat::identity(chi, chi),
            Some(_) => twist(chi),
        }
    }

    /// Site-resolved representation on `n` units.
    pub fn chain(&self, n: usize) -> Chain {
        Chain {
            tensors: (0..n).map(|r| self.site_tensors(r)).collect(),
            boundary: self.boundary(),
        }
    }

    /// Uniform tensors and boundary, if the state has no site phases.
    pub fn uniform(&self) -> Option<(Vec<CMat>, CMat)> {
        if self.defect.is_some() && self.phase_k != 0.0 {
            return None;
        }
        Some((self.site_tensors(0), self.boundary()))
    }

    pub fn gauge_transform(&self, p: &CMat) -> Result<Mps> {
        let pinv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Invalid("gauge matrix is singular".into()))?;
        let tr = |ms: &Vec<CMat>| ms.iter().map(|m| &pinv * m * p).collect::<Vec<_>>();
        Ok(Mps {
            layout: self.layout.clone(),
            tensors: tr(&self.tensors),
            defect: self.defect.as_ref().map(tr),
            phase_k: self.phase_k,
        })
    }

    /// Symbols of configuration `c` on `l` sites, or `None` when some unit
    /// is outside the alphabet.
    pub fn symbols_of(&self, c: u64, l: usize) -> Result<Option<Vec<usize>>> {
        match &self.layout {
            Layout::Units(b) => {
                let n = l.div_ceil(b.width);
                // a trailing partial unit may only drop frozen spacer sites
                if n * b.width - l > b.width.saturating_sub(3) && !l.is_multiple_of(b.width) {
                    return Err(Error::Invalid(format!("L={l} incompatible with unit width {}", b.width)));
                }
                Ok(b.decompose(c, n * b.width))
            }
            Layout::Antipodal => {
                if !l.is_multiple_of(2) {
                    return Err(Error::Invalid("antipodal layout needs even L".into()));
                }
                let h = l / 2;
                Ok(Some(
                    (0..h)
                        .map(|i| (2 * (c >> i & 1) + (c >> (i + h) & 1)) as usize)
                        .collect(),
                ))
            }
            Layout::Digits { .. } => Err(Error::Invalid("digit layout needs a PSP basis".into())),
        }
    }

    pub fn n_units(&self, l: usize) -> usize {
        match &self.layout {
            Layout::Units(b) => l.div_ceil(b.width),
            Layout::Antipodal => l / 2,
            Layout::Digits { width, .. } => l / width,
        }
    }

    /// Dense expansion over a spin-half constrained basis (PBC trace or OBC
    /// terminations `v^T ... w`).
    pub fn expand(&self, basis: &ConstrainedBasis, terms: Option<(&CMat, &CMat)>) -> Result<Vec<C64>> {
        let n = self.n_units(basis.l);
        let chain = self.chain(n);
        let mut out = Vec::with_capacity(basis.dim());
        for &c in &basis.states {
            out.push(match self.symbols_of(c, basis.l)? {
                None => C64::new(0.0, 0.0),
                Some(s) => match terms {
                    None => chain.amplitude(&s),
                    Some((v, w)) => chain.amplitude_obc(v, w, &s),
                },
            });
        }
        Ok(out)
    }

    /// Dense expansion over a PSP basis.
    pub fn expand_psp(&self, basis: &PspBasis, terms: Option<(&CMat, &CMat)>) -> Result<Vec<C64>> {
        let Layout::Digits { width, .. } = self.layout else {
            return Err(Error::Invalid("PSP expansion needs a digit layout".into()));
        };
        let n = basis.l.div_ceil(width);
        let chain = self.chain(n);
        Ok(basis
            .states
            .iter()
            .map(|st| {
                let mut syms = Vec::with_capacity(n);
                for u in 0..n {
                    let a = u * width;
                    if (a + 1..(a + width).min(basis.l)).any(|j| st[j] != 0) {
                        return C64::new(0.0, 0.0);
                    }
                    syms.push(st[a] as usize);
                }
                match terms {
                    None => chain.amplitude(&syms),
                    Some((v, w)) => chain.amplitude_obc(v, w, &syms),
                }
            })
            .collect())
    }

    /// Largest |amplitude| over unit strings of length `n` that violate the
    /// constraint `valid` (PBC). Zero means the MPS lives in the space.
    pub fn constraint_leak(&self, n: usize, valid: impl Fn(&[usize]) -> bool) -> f64 {
        let d = self.layout.symbols();
        let chain = self.chain(n);
        let total = d.pow(n as u32);
        let mut worst: f64 = 0.0;
        let mut s = vec![0usize; n];
        for mut x in 0..total {
            for k in 0..n {
                s[k] = x % d;
                x /= d;
            }
            if !valid(&s) {
                worst = worst.max(chain.amplitude(&s).norm());
            }
        }
        worst
    }

    pub fn transfer_matrix(&self) -> CMat {
        transfer(&self.site_tensors(0))
    }

    /// <psi|psi> = Tr[(B* x B) E_1 ... E_n].
    pub fn norm_sq(&self, n: usize) -> f64 {
        self.chain(n).norm_sq()
    }

    /// Correlation length in MPS units; `None` if the leading transfer
    /// eigenvalue is degenerate in modulus.
    pub fn correlation_length(&self) -> Option<f64> {
        correlation_length(&self.transfer_matrix())
    }

    /// Correlation length converted to spin sites.
    pub fn correlation_length_sites(&self) -> Option<f64> {
        self.correlation_length()
            .map(|x| x * self.layout.sites_per_tensor() as f64)
    }

    /// Entanglement spectrum of the equal bipartition on `n` units.
    pub fn entanglement_spectrum(&self, n: usize) -> Result<EntanglementSpectrum> {
        if !n.is_multiple_of(2) {
            return Err(Error::Invalid("odd bipartition".into()));
        }
        Ok(self.chain(n).entanglement_spectrum(n / 2))
    }

    /// Complex conjugate MPS.
    pub fn conj(&self) -> Mps {
        let cj = |ms: &Vec<CMat>| ms.iter().map(|m| m.map(|z| z.conj())).collect::<Vec<_>>();
        Mps {
            layout: self.layout.clone(),
            tensors: cj(&self.tensors),
            defect: self.defect.as_ref().map(cj),
            phase_k: -self.phase_k,
        }
    }

    /// Uniform representation of Re(psi) (`imag = false`) or Im(psi) through
    /// the direct sum M (+) M*.
    pub fn part(&self, imag: bool) -> Option<(Vec<CMat>, CMat)> {
        let (a, ba) = self.uniform()?;
        let (b, bb) = self.conj().uniform()?;
        let ts = a.iter().zip(&b).map(|(x, y)| linalg::direct_sum(x, y)).collect();
        let bound = if imag {
            linalg::direct_sum(&ba, &(-bb)) * C64::new(0.0, -0.5)
        } else {
            linalg::direct_sum(&ba, &bb) * C64::new(0.5, 0.0)
        };
        Some((ts, bound))
    }
}

/// Stacked TTI tensor [[M, 0], [M1, M]].
pub fn stack(m: &CMat, m1: &CMat) -> CMat {
    let chi = m.nrows();
    let mut s = CMat::zeros(2 * chi, 2 * chi);
    s.view_mut((0, 0), (chi, chi)).copy_from(m);
    s.view_mut((chi, chi), (chi, chi)).copy_from(m);
    s.view_mut((chi, 0), (chi, chi)).copy_from(m1);
    s
}

/// Twist matrix [[0, 1], [0, 0]].
pub fn twist(chi: usize) -> CMat {
    let mut t = CMat::zeros(2 * chi, 2 * chi);
    for i in 0..chi {
        t[(i, chi + i)] = C64::new(1.0, 0.0);
    }
    t
}

/// E = sum_s conj(M^s) (x) M^s, rows (i, i'), columns (j, j').
pub fn transfer(ms: &[CMat]) -> CMat {
    let chi = ms[0].nrows();
    let mut e = CMat::zeros(chi * chi, chi * chi);
    for m in ms {
        e += linalg::kron(&m.map(|z| z.conj()), m);
    }
    e
}

pub fn correlation_length(e: &CMat) -> Option<f64> {
    let ev = linalg::eigenvalues_by_modulus(e);
    let l1 = ev.first()?.norm();
    if l1 == 0.0 {
        return None;
    }
    let l2 = ev.get(1).map_or(0.0, |z| z.norm());
    if (l1 - l2).abs() <= 1e-9 * l1 {
        return None;
    }
    if l2 == 0.0 {
        return Some(0.0);
    }
    Some(-1.0 / (l2 / l1).ln())
}

/// Site-resolved MPS: `Tr(B A_1^{s_1} ... A_n^{s_n})`.
#[derive(Clone, Debug)]
pub struct Chain {
    pub tensors: Vec<Vec<CMat>>,
    pub boundary: CMat,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn amplitude(&self, s: &[usize]) -> C64 {
        let mut p = self.boundary.clone();
        for (r, &k) in s.iter().enumerate() {
            p = &p * &self.tensors[r][k];
        }
        p.trace()
    }

    pub fn amplitude_obc(&self, v: &CMat, w: &CMat, s: &[usize]) -> C64 {
        let mut p = v.transpose();
        for (r, &k) in s.iter().enumerate() {
            p = &p * &self.tensors[r][k];
        }
        (p * w)[(0, 0)]
    }

    fn transfer_product(&self, range: std::ops::Range<usize>) -> CMat {
        let d = self.boundary.nrows();
        let mut p = CMat::identity(d * d, d * d);
        for r in range {
            p *= transfer(&self.tensors[r]);
        }
        p
    }

    pub fn norm_sq(&self) -> f64 {
        let b = &self.boundary;
        let bb = linalg::kron(&b.map(|z| z.conj()), b);
        (bb * self.transfer_product(0..self.len())).trace().re
    }

    /// Spectrum of the reduced density matrix for the cut after `ell` units.
    pub fn entanglement_spectrum(&self, ell: usize) -> EntanglementSpectrum {
        let b = &self.boundary;
        let bb = linalg::kron(&b.map(|z| z.conj()), b);
        let left = bb * self.transfer_product(0..ell);
        let right = self.transfer_product(ell..self.len());
        spectrum_from_products(&left, &right, b.nrows())
    }
}

/// Schmidt spectrum from `left = (B* x B) E_1..E_l` and `right = E_{l+1}..E_n`.
fn spectrum_from_products(left: &CMat, right: &CMat, d: usize) -> EntanglementSpectrum {
    let k = d * d;
    // G^A_{(c,y),(c',y')} = left_{(c c'),(y y')}; G^B_{(c,y),(c',y')} = right_{(y y'),(c c')}
    let ga = CMat::from_fn(k, k, |a, bidx| {
        let (c, y) = (a / d, a % d);
        let (c2, y2) = (bidx / d, bidx % d);
        left[(c * d + c2, y * d + y2)]
    });
    let gb = CMat::from_fn(k, k, |a, bidx| {
        let (c, y) = (a / d, a % d);
        let (c2, y2) = (bidx / d, bidx % d);
        right[(y * d + y2, c * d + c2)]
    });
    // both Gram matrices are Hermitian PSD, so spec(G^A G^B^T) is the
    // spectrum of the Hermitian matrix sqrt(G^A) G^B^T sqrt(G^A)
    let herm = |m: CMat| (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let ga = herm(ga);
    let gbt = herm(gb.transpose());
    let (vals, vecs) = linalg::herm_eigh(ga);
    let root = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        k,
        vals.iter().map(|&x| C64::new(x.max(0.0).sqrt(), 0.0)),
    ));
    let sq = &vecs * root * vecs.adjoint();
    let (p, _) = linalg::herm_eigh(herm(&sq * gbt * &sq));
    EntanglementSpectrum::from_eigenvalues(p.into_iter().map(|x| C64::new(x, 0.0)).collect())
}

/// Normalized E^n for n = 2^24, by repeated squaring with renormalization
/// (even powers, so period-2 leading pairs are kept). The power is finite on
/// purpose: twisted states have Jordan blocks, E^n ~ P + nN, and the O(1)
/// part P must stay above round-off relative to nN. Corrections are O(1/n).
pub fn transfer_limit(e: &CMat) -> CMat {
    let mut p = e.clone();
    for _ in 0..24 {
        p = &p * &p;
        let nrm = linalg::fro(&p);
        if nrm == 0.0 || !nrm.is_finite() {
            break;
        }
        p /= C64::new(nrm, 0.0);
    }
    p
}

/// Asymptotic (infinite chain, equal halves) entanglement spectrum.
pub fn asymptotic_spectrum(tensors: &[CMat], boundary: &CMat) -> EntanglementSpectrum {
    let einf = transfer_limit(&transfer(tensors));
    let b = boundary;
    let bb = linalg::kron(&b.map(|z| z.conj()), b);
    spectrum_from_products(&(bb * &einf), &einf, b.nrows())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntanglementSpectrum {
    /// Normalized Schmidt weights, descending.
    pub p: Vec<f64>,
}

impl EntanglementSpectrum {
    pub fn from_eigenvalues(ev: Vec<C64>) -> Self {
        let tr: C64 = ev.iter().sum();
        let mut p: Vec<f64> = ev.iter().map(|z| (z / tr).re).collect();
        p.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Self { p }
    }

    /// Weights above `1e-12 * max` (the Schmidt rank).
    pub fn nonzero(&self) -> Vec<f64> {
        let top = self.p.first().copied().unwrap_or(0.0);
        self.p.iter().cloned().filter(|&x| x > 1e-12 * top).collect()
    }

    pub fn rank(&self) -> usize {
        self.nonzero().len()
    }

    pub fn entropy(&self) -> f64 {
        linalg::entropy(&self.nonzero())
    }
}

/// Schmidt weights of a dense vector for a split of the sites into
/// `a_sites` (bit positions) and the rest; used as an independent oracle.
pub fn dense_schmidt(basis: &ConstrainedBasis, psi: &[C64], a_sites: &[usize]) -> Vec<f64> {
    let amask: u64 = a_sites.iter().fold(0, |m, &s| m | 1 << s);
    let mut rows: Vec<u64> = basis.states.iter().map(|&c| c & amask).collect();
    rows.sort_unstable();
    rows.dedup();
    let mut cols: Vec<u64> = basis.states.iter().map(|&c| c & !amask).collect();
    cols.sort_unstable();
    cols.dedup();
    let mut m = CMat::zeros(rows.len(), cols.len());
    for (i, &c) in basis.states.iter().enumerate() {
        let r = rows.binary_search(&(c & amask)).unwrap();
        let k = cols.binary_search(&(c & !amask)).unwrap();
        m[(r, k)] = psi[i];
    }
    let sv = m.singular_values();
    let tot: f64 = sv.iter().map(|s| s * s).sum();
    let mut p: Vec<f64> = sv.iter().map(|s| s * s / tot).collect();
    p.sort_by(|a, b| b.partial_cmp(a).unwrap());
    p
}

// ------------------------------------------------------------ serialization

#[derive(Serialize, Deserialize)]
struct MpsJson {
    basis: Layout,
    chi: usize,
    kind: MpsKind,
    /// tensors[s] as row-major [re, im] pairs
    tensors: Vec<Vec<[f64; 2]>>,
    defect: Option<Vec<Vec<[f64; 2]>>>,
    twist: Option<Vec<[f64; 2]>>,
    phase_k: Option<f64>,
}

fn mat_to_rows(m: &CMat) -> Vec<[f64; 2]> {
    let (r, c) = m.shape();
    (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).map(|(i, j)| [m[(i, j)].re, m[(i, j)].im]).collect()
}

fn rows_to_mat(v: &[[f64; 2]], chi: usize) -> Result<CMat> {
    if v.len() != chi * chi {
        return Err(Error::Dimension {
            expected: chi * chi,
            got: v.len(),
        });
    }
    Ok(CMat::from_fn(chi, chi, |i, j| C64::new(v[i * chi + j][0], v[i * chi + j][1])))
}

impl Mps {
    pub fn to_json(&self) -> String {
        let j = MpsJson {
            basis: self.layout.clone(),
            chi: self.chi(),
            kind: self.kind(),
            tensors: self.tensors.iter().map(mat_to_rows).collect(),
            defect: self.defect.as_ref().map(|d| d.iter().map(mat_to_rows).collect()),
            twist: self.defect.as_ref().map(|_| mat_to_rows(&twist(self.chi()))),
            phase_k: self.defect.as_ref().map(|_| self.phase_k),
        };
        serde_json::to_string_pretty(&j).expect("mps serializes")
    }

    pub fn from_json(s: &str) -> Result<Mps> {
        let j: MpsJson = serde_json::from_str(s).map_err(|e| Error::Invalid(e.to_string()))?;
        let tensors = j.tensors.iter().map(|t| rows_to_mat(t, j.chi)).collect::<Result<Vec<_>>>()?;
        let defect = match j.defect {
            Some(d) => Some(d.iter().map(|t| rows_to_mat(t, j.chi)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        if tensors.len() != j.basis.symbols() {
            return Err(Error::Invalid("tensor count does not match the local basis".into()));
        }
        Ok(Mps {
            layout: j.basis,
            tensors,
            defect,
            phase_k: j.phase_k.unwrap_or(0.0),
        })
    }
}
