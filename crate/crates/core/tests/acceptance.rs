//! Acceptance criteria 1-9. Each test prints one PASS/FAIL line (written
//! straight to the stdout handle so it shows without --nocapture) and then
//! asserts the same verdict.

use std::io::Write;
use std::sync::OnceLock;

use nalgebra::DVector;
use scars::catalog::{self, Approximant, Model};
use scars::certify;
use scars::distill::{self, ApOptions, BlockMap, DistillRun, NullspaceBasis, Outcome, Reference};
use scars::dynamics;
use scars::hilbert::{build_sector, Bc, ConstrainedBasis, SymOp};
use scars::linalg::{self, CMat, RMat};
use scars::model::{self, build_h_alpha, SparseOperator};
use scars::mps::{self, Mps};
use scars::C64;

fn report(n: usize, ok: bool, detail: &str) {
    let line = format!(
        "acceptance criterion {n}: {} | {detail}\n",
        if ok { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

/// Collects sub-checks; a criterion passes only if all do.
#[derive(Default)]
struct Checks {
    ok: bool,
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self { ok: true, ..Default::default() }
    }
    fn check(&mut self, ok: bool, what: String) {
        if !ok {
            self.ok = false;
            self.failed.push(what);
        }
    }
    fn note(&mut self, s: String) {
        self.notes.push(s);
    }
    fn finish(self, n: usize) {
        let mut detail = self.notes.join("; ");
        if !self.failed.is_empty() {
            detail = format!("failed: [{}]; {detail}", self.failed.join("; "));
        }
        report(n, self.ok, &detail);
        assert!(self.ok, "criterion {n} failed: {:?}", self.failed);
    }
}

fn pbc(l: usize, alpha: usize) -> ConstrainedBasis {
    ConstrainedBasis::new(l, alpha, Bc::Pbc).unwrap()
}

fn re(v: &[C64]) -> Vec<f64> {
    v.iter().map(|z| z.re).collect()
}

fn im(v: &[C64]) -> Vec<f64> {
    v.iter().map(|z| z.im).collect()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ||O psi - lambda psi|| / ||psi|| for a complex vector.
fn eig_residual(b: &ConstrainedBasis, op: SymOp, psi: &[C64], lambda: f64) -> f64 {
    let a = b.apply_symmetry(op, &re(psi)).unwrap();
    let c = b.apply_symmetry(op, &im(psi)).unwrap();
    let r: f64 = (0..psi.len())
        .map(|i| (C64::new(a[i], c[i]) - psi[i] * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt();
    r / norm(psi)
}

fn units(e: &catalog::CatalogEntry, l: usize) -> usize {
    e.mps.n_units(l)
}

// ------------------------------------------------------------ criterion 1

/// Sizes per state: PXP and PPXPP at L = 12, 18; Omega also at L = 11;
/// S1, S2 vanish for odd L_b and use L = 12, 16 instead. L = 18 gives odd
/// L_b = 9 for the primed TTI states.
fn certification_sizes(name: &str) -> Vec<usize> {
    match name {
        "omega" => vec![12, 18, 11],
        "s1" | "s2" => vec![12, 16],
        _ => vec![12, 18],
    }
}

#[test]
fn criterion_1_catalog_certification() {
    let mut ck = Checks::new();
    let mut worst_solve: f64 = 0.0;
    let mut worst_direct: f64 = 0.0;
    for name in catalog::NAMES {
        let e = catalog::get_state(name).unwrap();
        match certify::certify_zero_mode(&e.mps, e.scheme, e.model.alpha(), e.golden_x.as_ref()) {
            Ok(c) => {
                worst_solve = worst_solve.max(c.residual);
                ck.check(c.residual < 1e-10, format!("{name} solve residual {:.1e}", c.residual));
            }
            Err(err) => ck.check(false, format!("{name} certificate: {err}")),
        }
        for l in certification_sizes(name) {
            let b = pbc(l, e.model.alpha());
            let h = build_h_alpha(&b);
            let psi = e.mps.expand(&b, None).unwrap();
            let r = certify::direct_residual(&psi, &h);
            worst_direct = worst_direct.max(r);
            ck.check(norm(&psi) > 1e-8 && r < 1e-10, format!("{name} L={l} direct residual {r:.1e}"));
        }
    }
    ck.note(format!("13 states, max solve residual {worst_solve:.1e}, max direct residual {worst_direct:.1e}"));
    ck.finish(1);
}

// ------------------------------------------------------------ criterion 2

/// Sizes for the symmetry checks; two L_b parities where the state exists.
fn symmetry_sizes(model: Model, name: &str) -> Vec<usize> {
    match (model, name) {
        (Model::Ppxpp, "s1" | "s2") => vec![12, 16],
        (Model::Ppxpp, _) => vec![12, 18],
        _ => vec![12, 18],
    }
}

fn lb_of(e: &catalog::CatalogEntry, l: usize) -> usize {
    match e.mps.layout {
        mps::Layout::Antipodal => l / 2,
        _ => units(e, l),
    }
}

#[test]
fn criterion_2_tables() {
    let mut ck = Checks::new();
    // quantum numbers
    let mut qn = 0;
    for name in catalog::NAMES {
        let e = catalog::get_state(name).unwrap();
        for l in symmetry_sizes(e.model, name) {
            let b = pbc(l, e.model.alpha());
            let psi = e.mps.expand(&b, None).unwrap();
            if let Some(tx) = e.expected.tx {
                let r = eig_residual(&b, SymOp::T(1), &psi, tx as f64);
                ck.check(r < 1e-10, format!("{name} L={l} T_x residual {r:.1e}"));
                qn += 1;
            }
            if let Some(rule) = e.expected.ci {
                let v = rule.value(lb_of(&e, l)) as f64;
                for op in [SymOp::C, SymOp::I] {
                    let r = eig_residual(&b, op, &psi, v);
                    ck.check(r < 1e-10, format!("{name} L={l} {op:?}={v} residual {r:.1e}"));
                    qn += 1;
                }
            }
        }
    }
    // Re/Im of Omega: C = +1 / -1, S = S_Omega + log 2
    let om = catalog::get_state("omega").unwrap();
    let b = pbc(12, 1);
    let psi = om.mps.expand(&b, None).unwrap();
    for (c, sgn) in [(1i8, 1.0), (-1, -1.0)] {
        let part = distill::c_part(&b, &psi, c);
        let r = eig_residual(&b, SymOp::C, &part, sgn);
        ck.check(norm(&part) > 1e-8 && r < 1e-10, format!("omega C={c} part residual {r:.1e}"));
        qn += 1;
    }
    let (ts, bd) = om.mps.uniform().unwrap();
    let s_om = mps::asymptotic_spectrum(&ts, &bd).entropy();
    for imag in [false, true] {
        let (ts, bd) = om.mps.part(imag).unwrap();
        let s = mps::asymptotic_spectrum(&ts, &bd).entropy();
        let d = (s - s_om - 2f64.ln()).abs();
        ck.check(d < 1e-3, format!("omega part imag={imag}: S - S_omega - log2 = {d:.1e}"));
    }
    ck.note(format!("{qn} quantum numbers checked"));

    // entropies and correlation lengths
    let ln2 = 2f64.ln();
    let s_rows: [(&str, f64); 10] = [
        ("lambda_pxp", 0.5895),
        ("phi1", 2.0 * ln2),
        ("phi2", 2.0 * (3.0 / 2f64.powf(1.0 / 3.0)).ln()),
        ("theta1", 1.8010),
        ("theta2", 1.8839),
        ("omega", 2.3811),
        ("s1", ln2),
        ("s2", 2.0 * ln2),
        ("lambda_ppxpp", 0.8900),
        ("t", 1.8035),
    ];
    let mut s_txt = Vec::new();
    for (name, want) in s_rows {
        let e = catalog::get_state(name).unwrap();
        let (ts, bd) = e.mps.uniform().unwrap();
        let s = mps::asymptotic_spectrum(&ts, &bd).entropy();
        ck.check((s - want).abs() < 1e-3, format!("S_inf({name}) = {s:.4} vs {want:.4}"));
        s_txt.push(format!("{name} {s:.4}"));
    }
    ck.note(format!("S_inf: {}", s_txt.join(", ")));
    let xi_rows: [(&str, f64); 7] = [
        ("lambda_pxp", 1.0390),
        ("phi1", 1.8205),
        ("theta1", 6.9834),
        ("omega", 7.9294),
        ("lambda_ppxpp", 1.7441),
        ("t", 3.4882),
        ("phi2", 1.8205),
    ];
    let mut xi_txt = Vec::new();
    for (name, want) in xi_rows {
        let e = catalog::get_state(name).unwrap();
        let xi = e.mps.correlation_length_sites().unwrap_or(f64::NAN);
        ck.check((xi - want).abs() < 1e-3, format!("xi({name}) = {xi:.4} vs {want:.4}"));
        xi_txt.push(format!("{name} {xi:.4}"));
    }
    ck.note(format!("xi (sites): {}", xi_txt.join(", ")));
    ck.finish(2);
}

// ------------------------------------------------------------ criterion 3

/// Single-cut Schmidt weights of an infinite TI chain from the leading
/// fixed points of the transfer matrix: eig(A B^T) with A, B the left and
/// right environment Gram matrices.
fn single_cut_spectrum(m: &Mps) -> Vec<f64> {
    let e = m.transfer_matrix();
    let chi = m.chi();
    let p = mps::transfer_limit(&e);
    let col = (0..p.ncols()).max_by(|&a, &b| p.column(a).norm().partial_cmp(&p.column(b).norm()).unwrap()).unwrap();
    let row = (0..p.nrows()).max_by(|&a, &b| p.row(a).norm().partial_cmp(&p.row(b).norm()).unwrap()).unwrap();
    let r = p.column(col);
    let l = p.row(row);
    let a = CMat::from_fn(chi, chi, |i, j| l[i * chi + j]);
    let bm = CMat::from_fn(chi, chi, |i, j| r[i * chi + j]);
    let ev = linalg::eigenvalues(&(a * bm.transpose()));
    let tot: C64 = ev.iter().sum();
    let mut w: Vec<f64> = ev.iter().map(|z| (z / tot).re).collect();
    w.sort_by(|x, y| y.partial_cmp(x).unwrap());
    w
}

fn product_spectrum(a: &[f64]) -> Vec<f64> {
    let mut p: Vec<f64> = a.iter().flat_map(|x| a.iter().map(move |y| x * y)).collect();
    p.sort_by(|x, y| y.partial_cmp(x).unwrap());
    p
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_3_closed_form_spectra() {
    let mut ck = Checks::new();
    let s21 = 21f64.sqrt();
    let t1 = (7.0 * (445.0 + 1574.0 * s21)).sqrt() / 1036.0;
    let a2 = (13.0 + s21) / 111.0;
    let b2 = (7718.0 * s21 + 22597.0).sqrt() / (444.0 * 7f64.sqrt());
    let c2 = (906.0 * s21 - 2541.0).sqrt() / 444.0;
    let mut closed: Vec<(&str, Vec<f64>)> = vec![
        ("phi1", vec![0.5, 0.5]),
        ("phi2", vec![2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]),
        ("theta1", vec![0.25 + t1, 0.25 + t1, 0.25 - t1, 0.25 - t1]),
        ("theta2", vec![0.25 + a2 + b2, 0.25 + a2 - b2, 0.25 - a2 + c2, 0.25 - a2 - c2]),
    ];
    for (_, v) in closed.iter_mut() {
        v.sort_by(|x, y| y.partial_cmp(x).unwrap());
    }
    for (name, single) in &closed {
        let e = catalog::get_state(name).unwrap();
        let (ts, bd) = e.mps.uniform().unwrap();
        let two_cut = mps::asymptotic_spectrum(&ts, &bd).nonzero();
        let d2 = max_diff(&two_cut, &product_spectrum(single));
        ck.check(d2 < 1e-10, format!("{name} two-cut spectrum off by {d2:.1e}"));
        let one = single_cut_spectrum(&e.mps);
        let d1 = max_diff(&one, single);
        ck.check(d1 < 1e-10, format!("{name} single-cut spectrum off by {d1:.1e}"));
        ck.note(format!("{name} max dev {:.1e}", d1.max(d2)));
        if *name == "theta1" {
            let deg = (one[0] - one[1]).abs().max((one[2] - one[3]).abs());
            ck.check(deg < 1e-10, format!("theta1 single-cut degeneracy split {deg:.1e}"));
            ck.note(format!("theta1 single cut {:.6?} (doubly degenerate)", one));
        }
    }
    ck.finish(3);
}

// ------------------------------------------------------------ criterion 4

#[test]
fn criterion_4_five_projector_kernel() {
    let mut ck = Checks::new();
    let vs = catalog::five_projector_vectors();
    let mut dims = Vec::new();
    for lb in 4..=8usize {
        let l = 2 * lb;
        let bp = pbc(l, 1);
        let kp = model::common_kernel(&bp, &vs, 1e-10).unwrap();
        let bo = ConstrainedBasis::new(l, 1, Bc::Obc).unwrap();
        let ko = model::common_kernel(&bo, &vs, 1e-10).unwrap();
        ck.check(kp.ncols() == 1, format!("L_b={lb} PBC kernel dim {}", kp.ncols()));
        ck.check(ko.ncols() == 4, format!("L_b={lb} OBC kernel dim {}", ko.ncols()));
        dims.push(format!("L_b={lb}: {}/{}", kp.ncols(), ko.ncols()));
        if kp.ncols() == 1 {
            let v: Vec<f64> = kp.column(0).iter().cloned().collect();
            let psi: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
            let sign = if lb % 2 == 0 { 1.0 } else { -1.0 };
            for op in [SymOp::C, SymOp::I] {
                let r = eig_residual(&bp, op, &psi, sign);
                ck.check(r < 1e-10, format!("L_b={lb} {op:?} != {sign} (residual {r:.1e})"));
            }
            let e = certify::direct_residual(&psi, &build_h_alpha(&bp));
            ck.check(e < 1e-10, format!("L_b={lb} ||H psi|| = {e:.1e}"));
        }
    }
    ck.note(format!("PBC/OBC kernel dims {}", dims.join(", ")));
    ck.finish(4);
}

// ------------------------------------------------------------ criterion 5

struct L20 {
    basis: ConstrainedBasis,
    pp: NullspaceBasis,
    mm: NullspaceBasis,
    refs: Vec<Reference>,
}

fn l20() -> &'static L20 {
    static CELL: OnceLock<L20> = OnceLock::new();
    CELL.get_or_init(|| {
        let basis = pbc(20, 1);
        let h = build_h_alpha(&basis);
        let (pp, _) = distill::nullspace(&basis, &h, 2, 1, 1e-8).unwrap();
        let (_, mm) = distill::nullspace(&basis, &h, 2, -1, 1e-8).unwrap();
        let refs = distill::pxp_references(&basis).unwrap();
        L20 { basis, pp, mm, refs }
    })
}

fn histogram(map: &BlockMap, runs: &[DistillRun], refs: &[Reference]) -> (Vec<(String, usize, f64)>, usize, usize) {
    let hits = distill::cluster_hits(map, runs, 1.0 - 1e-6, refs);
    let mut by_label: Vec<(String, usize, f64)> = Vec::new();
    for h in &hits {
        let name = h.label.clone().unwrap_or_else(|| "unlabeled".into());
        match by_label.iter_mut().find(|x| x.0 == name) {
            Some(x) => {
                x.1 += h.runs.len();
                x.2 = x.2.min(h.fidelity);
            }
            None => by_label.push((name, h.runs.len(), h.fidelity)),
        }
    }
    by_label.sort_by(|a, b| b.1.cmp(&a.1));
    let lc = runs.iter().filter(|r| r.outcome == Outcome::LimitCycle).count();
    let cap = runs.iter().filter(|r| r.outcome == Outcome::IterationCap).count();
    (by_label, lc, cap)
}

fn fmt_hist(h: &[(String, usize, f64)], lc: usize, cap: usize) -> String {
    let mut parts: Vec<String> = h.iter().map(|(n, c, f)| format!("{n} {c} (min F {f:.9})")).collect();
    parts.push(format!("limit-cycle {lc}"));
    parts.push(format!("cap {cap}"));
    parts.join(", ")
}

const SINGLE: [&str; 4] = ["phi1", "phi2", "theta1", "theta2"];

#[test]
fn criterion_5_distillation() {
    let mut ck = Checks::new();
    let d = l20();
    ck.check(d.pp.dim() == 34 && d.mm.dim() == 21, format!("sector dims ({}, {})", d.pp.dim(), d.mm.dim()));
    ck.note(format!("dims N++ {} N-- {}", d.pp.dim(), d.mm.dim()));
    // single-state references only, so superpositions stay unlabeled
    let singles: Vec<Reference> = d.refs.iter().filter(|r| r.name != "phi+theta").cloned().collect();
    let map = BlockMap::new(&d.basis, 2, 0, (1, 1), (1, 1), &d.pp).unwrap();

    // t = 1
    let runs = distill::campaign(&map, &ApOptions::new(1), 200, 1_000);
    let (h, lc, cap) = histogram(&map, &runs, &singles);
    let labels: Vec<&str> = h.iter().map(|x| x.0.as_str()).collect();
    ck.check(labels == ["phi1"], format!("t=1 labels {labels:?}"));
    ck.note(format!("t=1 (200 runs): {}", fmt_hist(&h, lc, cap)));

    // t = 2
    let runs = distill::campaign(&map, &ApOptions::new(2), 1000, 2_000);
    let (h, lc, cap) = histogram(&map, &runs, &singles);
    let mut labels: Vec<&str> = h.iter().map(|x| x.0.as_str()).collect();
    labels.sort();
    ck.check(labels == ["phi1", "phi2", "theta1", "theta2"], format!("t=2 labels {labels:?}"));
    ck.check(h.first().map(|x| x.0.as_str()) == Some("phi1"), "t=2 mode is not phi1".into());
    ck.check(h.iter().all(|x| x.2 > 1.0 - 1e-6), "t=2 hit fidelity below 1-1e-6".into());
    ck.note(format!("t=2 (1000 runs): {}", fmt_hist(&h, lc, cap)));

    // t = 3 on the (+,-)(-,+) block of the (-,-) nullspace
    let map_m = BlockMap::new(&d.basis, 2, 0, (1, -1), (-1, 1), &d.mm).unwrap();
    let runs = distill::campaign(&map_m, &ApOptions::new(3), 1000, 3_000);
    let (h, lc, cap) = histogram(&map_m, &runs, &singles);
    let labels: Vec<&str> = h.iter().map(|x| x.0.as_str()).collect();
    ck.check(labels == ["im_omega"], format!("t=3 labels {labels:?}"));
    ck.check(h.iter().all(|x| x.2 > 1.0 - 1e-6), "t=3 hit fidelity below 1-1e-6".into());
    ck.check(lc > 0, "t=3 without limit cycles".into());
    ck.note(format!("t=3 (1000 runs): {}", fmt_hist(&h, lc, cap)));

    // t = 6, reduced campaign (runs that cycle or hit the cap cost ~1 s each)
    let runs = distill::campaign(&map, &ApOptions::new(6), 200, 6_000);
    let all: Vec<Reference> = d.refs.clone();
    let (h, lc, cap) = histogram(&map, &runs, &all);
    ck.check(lc + cap > 0, "t=6 without limit cycles".into());
    ck.check(h.iter().all(|x| x.0 != "unlabeled"), "t=6 produced an unknown state".into());
    ck.note(format!("t=6 (200 runs): {}", fmt_hist(&h, lc, cap)));
    ck.finish(5);
}

// ------------------------------------------------------------ criterion 6

#[test]
fn criterion_6_parent_hamiltonians() {
    let mut ck = Checks::new();
    let d = l20();
    let get = |n: &str| d.refs.iter().find(|r| r.name == n).unwrap().vectors[0].clone();
    // (state, unit width, range, sizes, expected d_scar, golden basis available)
    let cases: [(&str, usize, usize, [usize; 2], usize, bool); 4] = [
        ("theta1", 2, 3, [12, 16], 1, true),
        ("theta1", 2, 4, [12, 16], 1, false),
        ("theta2", 2, 3, [12, 16], 1, true),
        ("im_omega", 1, 7, [12, 14], 2, true),
    ];
    for (name, width, r, sizes, want, golden) in cases {
        let vs = if golden {
            catalog::parent_basis(name).unwrap()
        } else {
            distill::rdm_kernel(&d.basis, &get(name), width, r, 1e-12)
        };
        let mut got = Vec::new();
        for l in sizes {
            let b = pbc(l, 1);
            let h = build_h_alpha(&b);
            let v = distill::parent_hamiltonian(&b, &vs, None).unwrap();
            let ker = distill::kernel_h_plus_v(&b, &h, &v, width, 1e-8).unwrap();
            got.push(ker.len());
            ck.check(ker.len() == want, format!("{name} r={r} L={l} d_scar {}", ker.len()));
            if name == "im_omega" {
                let refs = distill::pxp_references(&b).unwrap();
                let om: Vec<Vec<f64>> = refs
                    .iter()
                    .filter(|x| x.name == "re_omega" || x.name == "im_omega")
                    .map(|x| x.vectors[0].clone())
                    .collect();
                let w: f64 = om.iter().map(|x| distill::span_weight(&ker, x)).fold(1.0, f64::min);
                ck.check(w > 1.0 - 1e-8, format!("L={l} Omega weight in ker(H+V) {w:.10}"));
                let w2: f64 = ker.iter().map(|x| distill::span_weight(&om, x)).fold(1.0, f64::min);
                ck.check(w2 > 1.0 - 1e-8, format!("L={l} ker(H+V) weight in Omega span {w2:.10}"));
            }
        }
        ck.note(format!("{name} r={r} ({} vectors): d_scar {:?} at L={:?}", vs.len(), got, sizes));
    }
    ck.finish(6);
}

// ------------------------------------------------------------ criterion 7

fn local_maxima(ts: &[f64], ys: &[f64], t_from: f64) -> Vec<(f64, f64)> {
    (1..ys.len() - 1)
        .filter(|&k| ts[k] >= t_from && ys[k] > ys[k - 1] && ys[k] >= ys[k + 1] && ys[k] > 0.05)
        .map(|k| (ts[k], ys[k]))
        .collect()
}

#[test]
fn criterion_7_dynamics_l24() {
    let mut ck = Checks::new();
    let b = pbc(24, 1);
    let h = build_h_alpha(&b);
    let sector = dynamics::k0_sector(&b, Some(1)).unwrap();
    let sma_t = dynamics::build_sma(&catalog::theta_ti(), &b, &sector).unwrap();
    let sma_p = dynamics::build_sma(&catalog::phi_ti(), &b, &sector).unwrap();
    ck.check(sma_t.dim() == 10, format!("dim SMA(Theta) {}", sma_t.dim()));
    ck.check(sma_p.dim() == 4, format!("dim SMA(Phi) {}", sma_p.dim()));
    let z2 = DVector::from_vec(sector.restrict(&dynamics::z2_state(&b, true).unwrap()));
    let (proj_t, w_t) = dynamics::project_max_overlap(&z2, &sma_t.basis);
    let (proj_p, w_p) = dynamics::project_max_overlap(&z2, &sma_p.basis);
    ck.check(w_t > 0.63, format!("Z2+ weight in SMA(Theta) {w_t:.4}"));
    ck.note(format!(
        "k=0, I=+ sector dim {}: dim SMA(Theta) {}, dim SMA(Phi) {}; Z2+ weight {w_t:.4} (Theta), {w_p:.4} (Phi)",
        sector.dim(),
        sma_t.dim(),
        sma_p.dim()
    ));

    let spec = dynamics::sector_spectrum(&h, &sector);
    let prof = dynamics::eigen_overlap_profile(&spec, &sma_t.basis);
    let pk = dynamics::peaks(&prof, 0.05, 0.5);
    let near = |e: f64| pk.iter().any(|p| (p.0 - e).abs() < 0.05);
    ck.check(near(2.67) && near(-2.67), format!("peaks {pk:.3?}"));
    ck.note(format!("SMA(Theta) profile peaks {:.3?}", pk));

    let times: Vec<f64> = (0..=800).map(|k| k as f64 * 0.05).collect();
    let (o_z2, n_z2) = dynamics::evolve(&spec, &z2, &z2, &times);
    let (o_t, n_t) = dynamics::evolve(&spec, &proj_t, &z2, &times);
    let (o_p, _) = dynamics::evolve(&spec, &proj_p, &z2, &times);
    let unit = n_z2.iter().chain(&n_t).map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
    ck.check(unit < 1e-10, format!("norm drift {unit:.1e}"));
    // overlaps of the projected starts are normalized by their weight so
    // the envelopes compare on equal footing with the bare Z2+ curve
    let rows: Vec<Vec<f64>> = (0..times.len()).map(|k| vec![times[k], o_z2[k], o_t[k] / w_t, o_p[k] / w_p]).collect();
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    let csv = dynamics::to_csv(&["t", "z2plus", "sma_theta", "sma_phi"], &rows);
    std::fs::write(dir.join("revivals_l24.csv"), csv).unwrap();
    let late = |ys: &[f64]| {
        let m = local_maxima(&times, ys, 20.0);
        m.iter().map(|x| x.1).sum::<f64>() / m.len().max(1) as f64
    };
    let (lz, lt) = (late(&o_z2), late(&o_t));
    let ratio = lt / lz;
    ck.check((0.5..2.0).contains(&ratio), format!("late-time revival envelope ratio {ratio:.3}"));
    let amp_p: f64 = o_p[100..].iter().cloned().fold(0.0, f64::max);
    let amp_t: f64 = o_t[100..].iter().cloned().fold(0.0, f64::max);
    ck.check(amp_p < amp_t, format!("SMA(Phi) revival amplitude {amp_p:.3} not below SMA(Theta) {amp_t:.3}"));
    ck.note(format!(
        "late-time (t>20) mean revival peak: Z2+ {lz:.4}, SMA(Theta) projection {lt:.4} (raw overlaps); max raw overlap after t=5: Theta {amp_t:.3}, Phi {amp_p:.3}; CSV in {}",
        dir.display()
    ));
    ck.finish(7);
}

// ------------------------------------------------------------ criterion 8

fn dense_spectrum(h: &SparseOperator) -> (Vec<f64>, RMat) {
    let (vals, vecs) = linalg::sym_eigh(h.to_dense());
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
    let v = RMat::from_fn(vecs.nrows(), vals.len(), |i, j| vecs[(i, order[j])]);
    (order.iter().map(|&k| vals[k]).collect(), v)
}

fn col_c(m: &RMat, k: usize) -> Vec<C64> {
    m.column(k).iter().map(|&x| C64::new(x, 0.0)).collect()
}

fn half_entropy(b: &ConstrainedBasis, psi: &[C64]) -> f64 {
    let a: Vec<usize> = (0..b.l / 2).collect();
    linalg::entropy(&mps::dense_schmidt(b, psi, &a))
}

#[test]
fn criterion_8_approximants() {
    let mut ck = Checks::new();
    let g = catalog::approximant(Approximant::G { upper: true });
    let f = |l: usize| {
        let k = 2.0 * std::f64::consts::PI * (l / 2) as f64 / l as f64;
        catalog::approximant(Approximant::F { upper: true, k })
    };

    // ground-state fidelity at L = 6 (L_b = 3)
    let b6 = pbc(6, 1);
    let (_, v6) = dense_spectrum(&build_h_alpha(&b6));
    let fid6 = linalg::fidelity(&g.expand(&b6, None).unwrap(), &col_c(&v6, 0));
    ck.check((1.0 - fid6).abs() < 1e-10, format!("G fidelity at L=6 {fid6:.12}"));
    // weight-only amplitudes (-1/sqrt 2)^n already miss the L = 4 ground
    // state, whose single/empty amplitude ratio is -sqrt(6)/4
    let b4 = pbc(4, 1);
    let (_, v4) = dense_spectrum(&build_h_alpha(&b4));
    let fid4 = linalg::fidelity(&g.expand(&b4, None).unwrap(), &col_c(&v4, 0));
    ck.note(format!("G fidelity L=4 {fid4:.6}, L=6 {fid6:.6}"));

    // S(F) - S(G) on the MPS side
    let ds = |l: usize| {
        let sg = g.entanglement_spectrum(l).unwrap().entropy();
        let sf = f(l).entanglement_spectrum(l).unwrap().entropy();
        (sg, sf)
    };
    let mut mps_rows = Vec::new();
    for l in [12, 16, 20, 24, 28] {
        let (sg, sf) = ds(l);
        mps_rows.push(format!("L={l} {:.4}", sf - sg));
        if l == 28 {
            let d = (sf - sg - 2f64.ln()).abs();
            ck.check(d < 5e-2, format!("|S(F)-S(G)-log2| at L=28 = {d:.3e}"));
        }
    }
    // the approach to log 2 is slow (~1/L); larger sizes for the record
    for l in [100, 400] {
        let (sg, sf) = ds(l);
        mps_rows.push(format!("L={l} {:.4}", sf - sg));
    }
    ck.note(format!("MPS S(F)-S(G) (log 2 = {:.4}): {}", 2f64.ln(), mps_rows.join(", ")));

    // ED side at L <= 16: G and F against the two lowest states
    let mut ed_rows = Vec::new();
    for l in [10usize, 12, 14, 16] {
        let b = pbc(l, 1);
        let (_, v) = dense_spectrum(&build_h_alpha(&b));
        let (gs, fe) = (col_c(&v, 0), col_c(&v, 1));
        let (sg, sf) = ds(l);
        let fg = linalg::fidelity(&g.expand(&b, None).unwrap(), &gs);
        let ff = linalg::fidelity(&f(l).expand(&b, None).unwrap(), &fe);
        let (eg, ef) = (half_entropy(&b, &gs), half_entropy(&b, &fe));
        ck.check(fg > 0.9 && ff > 0.9, format!("L={l} fidelities G {fg:.4} F {ff:.4}"));
        ed_rows.push(format!(
            "L={l}: F_G {fg:.4} F_F {ff:.4} dS_ED {:.4} dS_MPS {:.4} S_G err {:.4}",
            ef - eg,
            sf - sg,
            sg - eg
        ));
    }
    ck.note(format!("ED comparison {}", ed_rows.join("; ")));

    // odd L = 13: first excited level doubly degenerate at k = +-(2 pi / L) floor(L/2)
    let b13 = pbc(13, 1);
    let h13 = build_h_alpha(&b13);
    let mut levels: Vec<(f64, usize)> = Vec::new();
    for m in 0..=6usize {
        let s = build_sector(&b13, 1, m, None, None).unwrap();
        let (vals, _) = linalg::sym_eigh(h13.restrict(&s));
        levels.extend(vals.into_iter().map(|e| (e, m)));
    }
    levels.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let e0 = levels[0];
    let e1 = levels.iter().find(|x| x.0 > e0.0 + 1e-8).unwrap().0;
    let first: Vec<usize> = levels.iter().filter(|x| (x.0 - e1).abs() < 1e-8).map(|x| x.1).collect();
    ck.check(e0.1 == 0, format!("L=13 ground state momentum m={}", e0.1));
    ck.check(first == [6, 6], format!("L=13 first excited level momenta {first:?}"));
    // F(k) with k = 2 pi 6/13 and its conjugate span the degenerate pair
    let fk = f(13).expand(&b13, None).unwrap();
    let fit = {
        let hv = h13.matvec_c(&fk);
        let ev = fk.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / norm(&fk).powi(2);
        ev
    };
    ck.note(format!(
        "L=13: E0 {:.6} (m=0), E1 {e1:.6} with m = {:?} (k = +-2pi*6/13); <F>_H {fit:.4}",
        e0.0, first
    ));
    ck.finish(8);
}

// ------------------------------------------------------------ criterion 9

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_c(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

#[test]
fn criterion_9_property_suites() {
    let mut ck = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    // two-tensor product identity of the stacked tensors
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (a, a1, b, b1) = (rand_c(&mut rng, 3), rand_c(&mut rng, 3), rand_c(&mut rng, 3), rand_c(&mut rng, 3));
        let lhs = mps::stack(&a, &a1) * mps::stack(&b, &b1);
        let rhs = mps::stack(&(&a * &b), &(&a1 * &b + &a * &b1));
        worst = worst.max(linalg::fro(&(&lhs - &rhs)) / linalg::fro(&rhs));
    }
    ck.check(worst < 1e-13, format!("stacked product identity {worst:.1e}"));
    ck.note(format!("stack identity {worst:.1e}"));

    // twist cyclicity, and the twisted trace as a sum over single defects
    let mut worst_cyc: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for _ in 0..20 {
        let chi = 3;
        let n = 7;
        let m: Vec<CMat> = (0..2).map(|_| rand_c(&mut rng, chi)).collect();
        let m1: Vec<CMat> = (0..2).map(|_| rand_c(&mut rng, chi)).collect();
        let st: Vec<CMat> = m.iter().zip(&m1).map(|(x, y)| mps::stack(x, y)).collect();
        let tw = mps::twist(chi);
        let s: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let amp = |s: &[usize]| (s.iter().fold(tw.clone(), |acc, &k| acc * &st[k])).trace();
        let a0 = amp(&s);
        for shift in 1..n {
            let mut r = s.clone();
            r.rotate_right(shift);
            worst_cyc = worst_cyc.max((amp(&r) - a0).norm() / a0.norm());
        }
        let direct: C64 = (0..n)
            .map(|j| {
                (0..n)
                    .fold(CMat::identity(chi, chi), |acc, k| acc * if k == j { &m1[s[k]] } else { &m[s[k]] })
                    .trace()
            })
            .sum();
        worst_sum = worst_sum.max((direct - a0).norm() / a0.norm());
    }
    ck.check(worst_cyc < 1e-12, format!("twist cyclicity {worst_cyc:.1e}"));
    ck.check(worst_sum < 1e-12, format!("twisted trace vs defect sum {worst_sum:.1e}"));
    ck.note(format!("twist cyclicity {worst_cyc:.1e}, defect sum {worst_sum:.1e}"));

    // transfer-matrix norm and Gram spectrum vs dense expansions
    let mut worst_norm: f64 = 0.0;
    let mut worst_gram: f64 = 0.0;
    for name in ["phi1", "phi2", "theta1", "theta2", "omega", "t", "s1p", "tp", "lambda_pxp", "lambda_ppxpp"] {
        let e = catalog::get_state(name).unwrap();
        let b = pbc(12, e.model.alpha());
        let psi = e.mps.expand(&b, None).unwrap();
        let n = units(&e, 12);
        let dense = norm(&psi).powi(2);
        worst_norm = worst_norm.max((e.mps.norm_sq(n) - dense).abs() / dense);
        if n.is_multiple_of(2) {
            let gram = e.mps.entanglement_spectrum(n).unwrap().nonzero();
            // antipodal units pair sites (i, i + L/2)
            let a: Vec<usize> = match e.mps.layout {
                mps::Layout::Antipodal => (0..3).chain(6..9).collect(),
                _ => (0..6).collect(),
            };
            let oracle: Vec<f64> = mps::dense_schmidt(&b, &psi, &a).into_iter().filter(|&x| x > 1e-14).collect();
            worst_gram = worst_gram.max(max_diff(&gram, &oracle));
        }
    }
    ck.check(worst_norm < 1e-10, format!("transfer norm vs dense {worst_norm:.1e}"));
    ck.check(worst_gram < 1e-9, format!("Gram spectrum vs dense SVD {worst_gram:.1e}"));
    ck.note(format!("norm {worst_norm:.1e}, Gram spectrum {worst_gram:.1e}"));

    // f_Pi never raises the Schmidt rank, on 200 random nullspace vectors
    let d = l20();
    let map = BlockMap::new(&d.basis, 2, 0, (1, 1), (1, 1), &d.pp).unwrap();
    let a_sites: Vec<usize> = (0..10).collect();
    let mut violations = 0;
    for _ in 0..200 {
        let c = distill::random_unit(d.pp.dim(), &mut rng);
        let psi: Vec<f64> = (0..d.basis.dim()).map(|i| (0..d.pp.dim()).map(|k| c[k] * d.pp.vectors[k][i]).sum()).collect();
        let rho = map.forward(&psi);
        let r_rho = rho.rank(1e-10 * rho.norm().max(1e-300));
        let pc: Vec<C64> = psi.iter().map(|&x| C64::new(x, 0.0)).collect();
        let sch = mps::dense_schmidt(&d.basis, &pc, &a_sites);
        let r_psi = sch.iter().filter(|&&x| x > 1e-20).count();
        if r_rho > r_psi {
            violations += 1;
        }
    }
    // catalog states: the low-rank end of the same property
    for name in SINGLE {
        let v = &d.refs.iter().find(|r| r.name == name).unwrap().vectors[0];
        let rho = map.forward(v);
        let r_rho = rho.rank(1e-10 * rho.norm());
        let pc: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        let r_psi = mps::dense_schmidt(&d.basis, &pc, &a_sites).iter().filter(|&&x| x > 1e-20).count();
        if r_rho > r_psi {
            violations += 1;
        }
    }
    ck.check(violations == 0, format!("{violations} rank increases under f_Pi"));

    // bijective round trip on all D basis vectors
    ck.check(map.is_injective(), format!("(+,+)(+,+) map not injective ({} of {})", map.count(), d.pp.dim()));
    let mut worst_rt: f64 = 0.0;
    for v in &d.pp.vectors {
        let back = map.inverse(&map.forward(v));
        worst_rt = worst_rt.max(1.0 - linalg::real_fidelity(v, &back));
    }
    ck.check(worst_rt < 1e-10, format!("round-trip infidelity {worst_rt:.1e}"));
    ck.note(format!("f_Pi rank violations {violations}/204, round-trip infidelity {worst_rt:.1e} over {} vectors", d.pp.dim()));
    ck.finish(9);
}
