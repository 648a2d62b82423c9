//! Rydberg-constrained Hilbert spaces, local bases and lattice symmetries.
//!
//! Configurations are `u64` bitstrings with bit `i` holding site `i`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Pbc,
    Obc,
}

impl std::str::FromStr for Bc {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pbc" => Ok(Bc::Pbc),
            "obc" => Ok(Bc::Obc),
            _ => Err(Error::Invalid(format!("unknown boundary condition {s}"))),
        }
    }
}

/// True when no two excitations of `c` sit within distance `alpha`.
pub fn is_valid(c: u64, l: usize, alpha: usize, bc: Bc) -> bool {
    let mask = if l == 64 { u64::MAX } else { (1u64 << l) - 1 };
    for k in 1..=alpha {
        let hit = match bc {
            Bc::Obc => c & (c >> k),
            Bc::Pbc => c & rotate_right(c, l, k),
        };
        if hit & mask != 0 {
            return false;
        }
    }
    true
}

/// Moves the bit at site `j` to site `j - k` (mod l).
#[inline]
pub fn rotate_right(c: u64, l: usize, k: usize) -> u64 {
    let k = k % l;
    if k == 0 {
        return c;
    }
    let mask = (1u64 << l) - 1;
    ((c >> k) | (c << (l - k))) & mask
}

/// Lattice translation `T_x^k`: site `j` goes to `j + k` (mod l).
#[inline]
pub fn translate(c: u64, l: usize, k: usize) -> u64 {
    let k = k % l;
    rotate_right(c, l, (l - k) % l)
}

/// Inversion `j -> l-1-j`.
#[inline]
pub fn invert(c: u64, l: usize) -> u64 {
    c.reverse_bits() >> (64 - l)
}

/// Eigenvalue of `C = prod Z` on a configuration (|0> has Z=+1).
#[inline]
pub fn c_sign(c: u64) -> f64 {
    if c.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstrainedBasis {
    #[serde(rename = "L")]
    pub l: usize,
    pub alpha: usize,
    pub bc: Bc,
    pub dim: usize,
    pub states: Vec<u64>,
}

impl ConstrainedBasis {
    pub fn new(l: usize, alpha: usize, bc: Bc) -> Result<Self> {
        if l == 0 || l > 62 {
            return Err(Error::Invalid(format!("unsupported size L={l}")));
        }
        if alpha == 0 {
            return Err(Error::Invalid("alpha must be at least 1".into()));
        }
        if bc == Bc::Pbc && l <= alpha {
            return Err(Error::Invalid(format!(
                "PBC constraint ill-defined for L={l} <= alpha={alpha}"
            )));
        }
        let mut states = Vec::new();
        // depth-first with the open-chain rule; wrap-around pairs filtered after
        fn rec(site: usize, l: usize, alpha: usize, c: u64, last: Option<usize>, out: &mut Vec<u64>) {
            if site == l {
                out.push(c);
                return;
            }
            rec(site + 1, l, alpha, c, last, out);
            if last.is_none_or(|p| site - p > alpha) {
                rec(site + 1, l, alpha, c | (1 << site), Some(site), out);
            }
        }
        rec(0, l, alpha, 0, None, &mut states);
        states.retain(|&c| is_valid(c, l, alpha, bc));
        states.sort_unstable();
        Ok(Self {
            l,
            alpha,
            bc,
            dim: states.len(),
            states,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index(&self, c: u64) -> Option<usize> {
        self.states.binary_search(&c).ok()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("basis serializes")
    }

    /// Applies a symmetry to a dense vector. Translation requires PBC.
    pub fn apply_symmetry(&self, op: SymOp, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let mut out = vec![0.0; v.len()];
        match op {
            SymOp::C => {
                for (i, &c) in self.states.iter().enumerate() {
                    out[i] = c_sign(c) * v[i];
                }
            }
            SymOp::I => {
                for (i, &c) in self.states.iter().enumerate() {
                    out[self.index(invert(c, self.l)).unwrap()] = v[i];
                }
            }
            SymOp::T(k) => {
                if self.bc != Bc::Pbc {
                    return Err(Error::Invalid("translation needs PBC".into()));
                }
                for (i, &c) in self.states.iter().enumerate() {
                    out[self.index(translate(c, self.l, k)).unwrap()] = v[i];
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymOp {
    /// Translation by the given number of sites.
    T(usize),
    I,
    C,
}

/// Local unit alphabets used by MPS expansions. Each symbol is a bit pattern
/// of `width` sites, bit 0 being the leftmost site of the unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalBasis {
    pub name: String,
    pub width: usize,
    pub patterns: Vec<u64>,
    pub labels: Vec<String>,
}

impl LocalBasis {
    pub fn spin_half() -> Self {
        Self {
            name: "spin-half".into(),
            width: 1,
            patterns: vec![0, 1],
            labels: vec!["0".into(), "1".into()],
        }
    }

    /// Two-site blocks {O=00, L=10, R=01}; the |11> block is excluded.
    pub fn blocked() -> Self {
        Self {
            name: "blocked".into(),
            width: 2,
            patterns: vec![0b00, 0b01, 0b10],
            labels: vec!["O".into(), "L".into(), "R".into()],
        }
    }

    /// Frozen-motif units: a three-site block {000,100,010,001} followed by
    /// `alpha - 1` frozen empty sites.
    pub fn frozen_motif(alpha: usize) -> Self {
        Self {
            name: format!("frozen-motif-{alpha}"),
            width: alpha + 2,
            patterns: vec![0b000, 0b001, 0b010, 0b100],
            labels: vec!["000".into(), "100".into(), "010".into(), "001".into()],
        }
    }

    pub fn symbol_of(&self, pattern: u64) -> Option<usize> {
        self.patterns.iter().position(|&p| p == pattern)
    }

    /// Splits a configuration into unit symbols; `None` if some unit is not
    /// in the alphabet.
    pub fn decompose(&self, c: u64, l: usize) -> Option<Vec<usize>> {
        if !l.is_multiple_of(self.width) {
            return None;
        }
        let mask = (1u64 << self.width) - 1;
        (0..l / self.width)
            .map(|u| self.symbol_of((c >> (u * self.width)) & mask))
            .collect()
    }

    pub fn compose(&self, symbols: &[usize]) -> u64 {
        symbols
            .iter()
            .enumerate()
            .fold(0, |c, (u, &s)| c | (self.patterns[s] << (u * self.width)))
    }
}

/// Sparse real vector over basis ordinals.
pub type SparseVec = Vec<(usize, f64)>;

#[derive(Clone, Debug)]
pub struct SymmetrySector {
    pub p: usize,
    pub momentum: usize,
    pub inversion: Option<i8>,
    pub c_parity: Option<i8>,
    pub vectors: Vec<SparseVec>,
}

impl SymmetrySector {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Dense sector coordinates of a full-space vector.
    pub fn restrict(&self, v: &[f64]) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|sv| sv.iter().map(|&(i, a)| a * v[i]).sum())
            .collect()
    }

    /// Full-space vector from sector coordinates.
    pub fn embed(&self, coeffs: &[f64], dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (sv, &c) in self.vectors.iter().zip(coeffs) {
            for &(i, a) in sv {
                out[i] += c * a;
            }
        }
        out
    }

    /// For every basis ordinal, the sector vectors touching it.
    pub fn reverse_map(&self, dim: usize) -> Vec<Vec<(usize, f64)>> {
        let mut rev = vec![Vec::new(); dim];
        for (k, sv) in self.vectors.iter().enumerate() {
            for &(i, a) in sv {
                rev[i].push((k, a));
            }
        }
        rev
    }
}

/// Real semi-momentum sector under translations by `p` sites.
///
/// `momentum` is the integer m of k = 2 pi m / (L/p); the pair (+k, -k)
/// contributes cosine and sine combinations. `p == L` means no translation.
/// `inversion` and `c_parity` are optional filters.
pub fn build_sector(
    basis: &ConstrainedBasis,
    p: usize,
    momentum: usize,
    inversion: Option<i8>,
    c_parity: Option<i8>,
) -> Result<SymmetrySector> {
    let l = basis.l;
    if p == 0 || !l.is_multiple_of(p) {
        return Err(Error::Invalid(format!("p={p} does not divide L={l}")));
    }
    if p != l && basis.bc != Bc::Pbc {
        return Err(Error::Invalid("translation sectors need PBC".into()));
    }
    let n = l / p;
    let m = momentum % n;
    let k = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
    let dim = basis.dim();
    let mut seen = vec![false; dim];
    let mut vectors: Vec<SparseVec> = Vec::new();

    let orbit = |c: u64| -> Vec<u64> { (0..n).map(|j| translate(c, l, p * j)).collect() };

    for (i0, &c0) in basis.states.iter().enumerate() {
        if seen[i0] {
            continue;
        }
        if let Some(cp) = c_parity {
            if c_sign(c0) as i8 != cp {
                // C is constant on the whole group; mark it and skip
                for c in orbit(c0).into_iter().chain(orbit(invert(c0, l))) {
                    seen[basis.index(c).unwrap()] = true;
                }
                continue;
            }
        }
        let orb = orbit(c0);
        let inv_orb = orbit(invert(c0, l));
        let mut group: Vec<usize> = orb
            .iter()
            .chain(inv_orb.iter())
            .map(|&c| basis.index(c).unwrap())
            .collect();
        group.sort_unstable();
        group.dedup();
        for &g in &group {
            seen[g] = true;
        }

        let mut cands: Vec<Vec<(u64, f64)>> = Vec::new();
        let mut waves: Vec<fn(f64) -> f64> = vec![f64::cos];
        if 2 * m != n && m != 0 {
            waves.push(f64::sin);
        }
        for start in [c0, invert(c0, l)] {
            for w in &waves {
                let v: Vec<(u64, f64)> = (0..n)
                    .map(|j| (translate(start, l, p * j), w(k * j as f64)))
                    .collect();
                cands.push(v);
            }
        }
        // dense over the group for Gram-Schmidt
        let pos = |c: u64| group.binary_search(&basis.index(c).unwrap()).unwrap();
        let mut accepted: Vec<Vec<f64>> = Vec::new();
        for cand in cands {
            let mut v = vec![0.0; group.len()];
            for (c, a) in cand {
                v[pos(c)] += a;
            }
            if let Some(iota) = inversion {
                let mut w = v.clone();
                for (gi, &g) in group.iter().enumerate() {
                    let ic = invert(basis.states[g], l);
                    w[pos(ic)] += iota as f64 * v[gi];
                }
                v = w;
            }
            for a in &accepted {
                let d: f64 = a.iter().zip(&v).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(a) {
                    *x -= d * y;
                }
            }
            let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm > 1e-8 {
                v.iter_mut().for_each(|x| *x /= nrm);
                accepted.push(v);
            }
        }
        for a in accepted {
            let sv: SparseVec = group
                .iter()
                .zip(&a)
                .filter(|(_, &x)| x.abs() > 1e-14)
                .map(|(&g, &x)| (g, x))
                .collect();
            vectors.push(sv);
        }
    }
    Ok(SymmetrySector {
        p,
        momentum: m,
        inversion,
        c_parity,
        vectors,
    })
}

/// All momentum labels m = 0..=n/2 for translations by `p`.
pub fn momenta(l: usize, p: usize) -> Vec<usize> {
    (0..=(l / p) / 2).collect()
}
