use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use scars::catalog::{self, CatalogEntry, FrozenName, Model, PspVariant, Scheme};
use scars::certify;
use scars::distill::{self, ApOptions, BlockMap, Outcome};
use scars::dynamics;
use scars::hilbert::{Bc, ConstrainedBasis};
use scars::model::build_h_alpha;
use scars::mps;

use crate::{CatalogAction, Command, DynAction, Failure, InitState, MatFormat, SystemArgs};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Wraps a result with the run configuration and library version.
pub fn envelope(cmd: &Command, result: Value) -> Value {
    json!({
        "meta": {"tool": "scars", "version": VERSION, "config": cmd},
        "result": result,
    })
}

pub fn resolve_out(out_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out_dir.join(p)
    }
}

pub fn write_file(out_dir: &Path, p: &Path, text: &str) -> Result<PathBuf, Failure> {
    let path = resolve_out(out_dir, p);
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d)?;
    }
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Prints the envelope, optionally saves it, and maps `pass = false` to a
/// check failure.
pub fn finish(cmd: &Command, result: Value, out: Option<&PathBuf>, out_dir: &Path, pass: bool) -> Result<(), Failure> {
    let env = envelope(cmd, result);
    let text = serde_json::to_string_pretty(&env)?;
    if let Some(p) = out {
        write_file(out_dir, p, &text)?;
    }
    if pass {
        println!("{text}");
        Ok(())
    } else {
        Err(Failure::Check(env))
    }
}

fn basis_of(s: &SystemArgs) -> Result<ConstrainedBasis, Failure> {
    let bc: Bc = s.bc.parse()?;
    Ok(ConstrainedBasis::new(s.l, s.alpha, bc)?)
}

/// Every catalog name with its constructor; frozen-motif and PSP states take
/// the blockade radius from `alpha`.
pub fn state_names() -> Vec<&'static str> {
    let mut v: Vec<&str> = catalog::NAMES.to_vec();
    v.extend([
        "phi_alpha",
        "tx_phi_alpha",
        "psi_alpha_plus",
        "psi_alpha_minus",
        "phi_alpha_cat",
        "psp_tower_s1",
        "psp_tower_s2",
        "psp_frozen_s1",
        "psp_frozen_s32_plus",
        "psp_frozen_s32_minus",
    ]);
    v
}

pub fn resolve_state(name: &str, alpha: Option<usize>) -> Result<CatalogEntry, Failure> {
    if catalog::NAMES.contains(&name) {
        return Ok(catalog::get_state(name)?);
    }
    let frozen = |f: FrozenName| catalog::frozen_motif_state(f, alpha.unwrap_or(2));
    let psp = |two_s: usize, v: PspVariant| catalog::psp_state(two_s, v, alpha.unwrap_or(1));
    let e = match name {
        "phi_alpha" => frozen(FrozenName::Phi),
        "tx_phi_alpha" => frozen(FrozenName::TxPhi),
        "psi_alpha_plus" => frozen(FrozenName::PsiPlus),
        "psi_alpha_minus" => frozen(FrozenName::PsiMinus),
        "phi_alpha_cat" => frozen(FrozenName::PhiCat),
        "psp_tower_s1" => psp(2, PspVariant::Tower),
        "psp_tower_s2" => psp(4, PspVariant::Tower),
        "psp_frozen_s1" => psp(2, PspVariant::FrozenS1),
        "psp_frozen_s32_plus" => psp(3, PspVariant::FrozenS32Plus),
        "psp_frozen_s32_minus" => psp(3, PspVariant::FrozenS32Minus),
        _ => Err(scars::Error::Unknown(name.to_string())),
    };
    Ok(e?)
}

pub fn parse_scheme(s: &str) -> Result<Scheme, Failure> {
    Ok(match s {
        "unpadded-blocked" => Scheme::UnpaddedBlocked,
        "padded-blocked" => Scheme::PaddedBlocked,
        "spin-half" => Scheme::SpinHalf,
        "ppxpp-blocked" => Scheme::PpxppBlocked,
        "antipodal" => Scheme::Antipodal,
        "frozen-motif" => Scheme::FrozenMotif,
        "psp" => Scheme::Psp,
        "psp-frozen" => Scheme::PspFrozen,
        _ => return Err(Failure::Usage("unknown-name".into(), format!("unknown scheme {s}"))),
    })
}

fn model_json(m: Model) -> Value {
    match m {
        Model::Pxp => json!("pxp"),
        Model::Ppxpp => json!("ppxpp"),
        Model::HAlpha(a) => json!({"h_alpha": a}),
        Model::Psp { two_s, alpha } => json!({"psp": {"two_s": two_s, "alpha": alpha}}),
    }
}

/// Certificate plus direct residuals on the sizes where the state lives.
pub fn certify_state(e: &CatalogEntry, scheme: Scheme, sizes: &[usize]) -> Result<(Value, bool), Failure> {
    let cs = certify::ConditionSet::new(scheme, e.model.alpha(), e.mps.layout.symbols())?;
    let m = e.mps.site_tensors(0);
    let cons = certify::check_constraints(&cs, &m);
    let cert = certify::solve_unchecked(&cs, &m, e.golden_x.as_ref(), cons);
    let mut pass = cert.pass;
    let mut direct = Vec::new();
    if !matches!(e.model, Model::Psp { .. }) {
        for &l in sizes {
            let b = match ConstrainedBasis::new(l, e.model.alpha(), Bc::Pbc) {
                Ok(b) => b,
                Err(err) => {
                    direct.push(json!({"L": l, "skipped": err.to_string()}));
                    continue;
                }
            };
            let psi = match e.mps.expand(&b, None) {
                Ok(p) => p,
                Err(err) => {
                    direct.push(json!({"L": l, "skipped": err.to_string()}));
                    continue;
                }
            };
            let nrm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm < 1e-12 {
                direct.push(json!({"L": l, "skipped": "state vanishes at this size"}));
                continue;
            }
            let r = certify::direct_residual(&psi, &build_h_alpha(&b));
            pass &= r < certify::TOL;
            direct.push(json!({"L": l, "direct_residual": r}));
        }
    }
    let v = json!({
        "state": e.name,
        "model": model_json(e.model),
        "certificate": serde_json::to_value(&cert)?,
        "direct": direct,
        "pass": pass,
    });
    Ok((v, pass))
}

pub fn entanglement_data(e: &CatalogEntry, sizes: &[usize]) -> Result<Value, Failure> {
    let (ts, b) = e
        .mps
        .uniform()
        .ok_or_else(|| Failure::Usage("invalid-input".into(), "state has site-dependent phases".into()))?;
    let asym = mps::asymptotic_spectrum(&ts, &b);
    let mut finite = Vec::new();
    for &l in sizes {
        let n = e.mps.n_units(l);
        let sp = e.mps.entanglement_spectrum(n)?;
        finite.push(json!({"L": l, "units": n, "entropy": sp.entropy(), "spectrum": sp.nonzero()}));
    }
    Ok(json!({
        "state": e.name,
        "s_inf": asym.entropy(),
        "asymptotic_spectrum": asym.nonzero(),
        "xi_sites": e.mps.correlation_length_sites(),
        "finite": finite,
    }))
}

pub fn parse_group(s: &str) -> Result<distill::Label, Failure> {
    Ok(distill::parse_label(s)?)
}

pub fn histogram(map: &BlockMap, runs: &[distill::DistillRun], refs: &[distill::Reference]) -> Value {
    let hits = distill::cluster_hits(map, runs, 1.0 - 1e-6, refs);
    let count = |o: Outcome| runs.iter().filter(|r| r.outcome == o).count();
    let hits_json: Vec<Value> = hits
        .iter()
        .map(|h| json!({"label": h.label, "runs": h.runs.len(), "fidelity": h.fidelity, "first_seed": h.runs[0]}))
        .collect();
    json!({
        "runs": runs.len(),
        "converged": count(Outcome::Converged),
        "limit_cycle": count(Outcome::LimitCycle),
        "iteration_cap": count(Outcome::IterationCap),
        "hits": hits_json,
    })
}

pub struct DynSetup {
    pub basis: ConstrainedBasis,
    pub sector: scars::hilbert::SymmetrySector,
    pub spec: dynamics::SectorSpectrum,
    pub z2: nalgebra::DVector<f64>,
}

pub fn dyn_setup(l: usize) -> Result<DynSetup, Failure> {
    let basis = ConstrainedBasis::new(l, 1, Bc::Pbc)?;
    let sector = dynamics::k0_sector(&basis, Some(1))?;
    let h = build_h_alpha(&basis);
    let spec = dynamics::sector_spectrum(&h, &sector);
    let z2 = nalgebra::DVector::from_vec(sector.restrict(&dynamics::z2_state(&basis, true)?));
    Ok(DynSetup { basis, sector, spec, z2 })
}

pub fn sma(setup: &DynSetup, which: InitState) -> Result<Option<dynamics::SmaManifold>, Failure> {
    let base = match which {
        InitState::Z2plus => return Ok(None),
        InitState::SmaTheta => catalog::theta_ti(),
        InitState::SmaPhi => catalog::phi_ti(),
    };
    Ok(Some(dynamics::build_sma(&base, &setup.basis, &setup.sector)?))
}

pub fn times(tmax: f64, dt: f64) -> Result<Vec<f64>, Failure> {
    if !(dt > 0.0 && tmax >= 0.0) {
        return Err(Failure::Usage("invalid-input".into(), "need dt > 0 and tmax >= 0".into()));
    }
    let n = (tmax / dt).round() as usize;
    Ok((0..=n).map(|k| k as f64 * dt).collect())
}

pub fn execute(cmd: &Command, out_dir: &Path) -> Result<(), Failure> {
    match cmd {
        Command::Basis(a) => {
            let b = basis_of(&a.system)?;
            let mut v = json!({"L": b.l, "alpha": b.alpha, "bc": b.bc, "dim": b.dim()});
            if a.states {
                v["states"] = json!(b.states);
            }
            finish(cmd, v, a.out.as_ref(), out_dir, true)
        }
        Command::Hamiltonian(a) => {
            let b = basis_of(&a.system)?;
            let h = build_h_alpha(&b);
            match a.format {
                MatFormat::Mtx => {
                    let text = h.to_matrix_market();
                    match &a.out {
                        Some(p) => {
                            let path = write_file(out_dir, p, &text)?;
                            finish(cmd, json!({"dim": b.dim(), "nnz": h.nnz(), "file": path}), None, out_dir, true)
                        }
                        None => {
                            print!("{text}");
                            Ok(())
                        }
                    }
                }
                MatFormat::Json => {
                    let v = json!({
                        "dim": b.dim(),
                        "nnz": h.nnz(),
                        "symmetric": h.is_symmetric(1e-14),
                        "triplets": h.triplets(),
                    });
                    finish(cmd, v, a.out.as_ref(), out_dir, true)
                }
            }
        }
        Command::Catalog(a) => match &a.action {
            CatalogAction::List => {
                let names = state_names();
                finish(cmd, json!({"states": names}), None, out_dir, true)
            }
            CatalogAction::Dump { name, alpha, out } => {
                let e = resolve_state(name, *alpha)?;
                let mps: Value = serde_json::from_str(&e.mps.to_json())?;
                let x = e.golden_x.as_ref().map(|m| {
                    (0..m.nrows())
                        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect::<Vec<_>>())
                        .collect::<Vec<_>>()
                });
                let v = json!({
                    "name": e.name,
                    "model": model_json(e.model),
                    "scheme": e.scheme,
                    "mps": mps,
                    "golden_x": x,
                    "expected": e.expected,
                    "odd_units": e.odd_units,
                });
                finish(cmd, v, out.as_ref(), out_dir, true)
            }
        },
        Command::Certify(a) => {
            let e = resolve_state(&a.state, a.alpha)?;
            let scheme = match &a.scheme {
                Some(s) => parse_scheme(s)?,
                None => e.scheme,
            };
            let (v, pass) = certify_state(&e, scheme, &a.sizes)?;
            finish(cmd, v, a.out.as_ref(), out_dir, pass)
        }
        Command::Entanglement(a) => {
            let e = resolve_state(&a.state, None)?;
            let v = entanglement_data(&e, &a.sizes)?;
            finish(cmd, v, a.out.as_ref(), out_dir, true)
        }
        Command::Distill(a) => {
            let basis = ConstrainedBasis::new(a.l, 1, Bc::Pbc)?;
            let h = build_h_alpha(&basis);
            let (i, c) = parse_group(&a.sector)?;
            let (np, nm) = distill::nullspace(&basis, &h, a.p, i, 1e-8)?;
            let null = if c == 1 { np } else { nm };
            let map = BlockMap::new(&basis, a.p, 0, parse_group(&a.row_group)?, parse_group(&a.col_group)?, &null)?;
            let mut opts = ApOptions::new(a.t);
            opts.max_iters = a.max_iters;
            let runs = distill::campaign(&map, &opts, a.runs, a.seed);
            let refs = if a.p == 2 { distill::pxp_references(&basis)? } else { Vec::new() };
            let (dim, shape, count, inj) = (null.dim(), map.shape(), map.count(), map.is_injective());
            let hist = histogram(&map, &runs, &refs);
            let v = json!({
                "nullspace_dim": dim,
                "block_shape": shape,
                "image_count": count,
                "injective": inj,
                "options": opts,
                "histogram": hist,
            });
            finish(cmd, v, a.out.as_ref(), out_dir, true)
        }
        Command::Dynamics(a) => match &a.action {
            DynAction::Revivals { model, l, init, tmax, dt, out } => {
                if model != "pxp" {
                    return Err(Failure::Usage("invalid-input".into(), format!("dynamics supports --model pxp, got {model}")));
                }
                let setup = dyn_setup(*l)?;
                let (psi0, weight) = match sma(&setup, *init)? {
                    None => (setup.z2.clone(), 1.0),
                    Some(m) => dynamics::project_max_overlap(&setup.z2, &m.basis),
                };
                let ts = times(*tmax, *dt)?;
                let (ov, norms) = dynamics::evolve(&setup.spec, &psi0, &setup.z2, &ts);
                let rows: Vec<Vec<f64>> = ts.iter().zip(&ov).map(|(&t, &o)| vec![t, o]).collect();
                let path = write_file(out_dir, out, &dynamics::to_csv(&["t", "overlap"], &rows))?;
                let drift = norms.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
                let v = json!({"sector_dim": setup.sector.dim(), "z2plus_weight": weight, "norm_drift": drift, "csv": path});
                finish(cmd, v, None, out_dir, true)
            }
            DynAction::Profile { l, target, out } => {
                let setup = dyn_setup(*l)?;
                let (prof, dim) = match sma(&setup, *target)? {
                    None => (dynamics::eigen_overlap_state(&setup.spec, &setup.z2), 1),
                    Some(m) => (dynamics::eigen_overlap_profile(&setup.spec, &m.basis), m.dim()),
                };
                let rows: Vec<Vec<f64>> = prof.iter().map(|&(e, w)| vec![e, w]).collect();
                let path = write_file(out_dir, out, &dynamics::to_csv(&["E", "overlap"], &rows))?;
                let pk = dynamics::peaks(&prof, 0.05, 0.5);
                let v = json!({"sector_dim": setup.sector.dim(), "manifold_dim": dim, "peaks": pk, "csv": path});
                finish(cmd, v, None, out_dir, true)
            }
        },
        Command::Reproduce(a) => crate::reproduce::reproduce(cmd, a, out_dir),
        Command::Run(a) => {
            let text = std::fs::read_to_string(&a.config)?;
            let v: Value = serde_json::from_str(&text)?;
            // accept either a bare config or a full output envelope
            let cfg = v.pointer("/meta/config").cloned().unwrap_or(v);
            let inner: Command = serde_json::from_value(cfg)?;
            if matches!(inner, Command::Run(_)) {
                return Err(Failure::Usage("config".into(), "nested run configurations are not allowed".into()));
            }
            execute(&inner, out_dir)
        }
    }
}
