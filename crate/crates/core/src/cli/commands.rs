use std::path::PathBuf;

use super::config::ExperimentConfig;
use crate::diagnostics::{energy_enstrophy, time_norm, trajectory_error, TimeNormOrder, TrajectoryError};
use crate::error::{Error, Result};
use crate::fem::{assemble_linear_operators, div_curl_sq, LinearOperators, NonlinearForm};
use crate::fom::{run_fom, FomRun, FomScalars, ProblemSetup};
use crate::io::{self, BasisArchive};
use crate::pod::{build_pod_basis, pod_projection_error, PodBasis, SnapshotSet};
use crate::rom::{assemble_rom_operators, rom_drag_series, run_rom, RomOperators, RomRunConfig, RomTrajectory};

fn ensure_dir(cfg: &ExperimentConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output.dir).map_err(|e| Error::io(&cfg.output.dir, e))
}

fn meta(cfg: &ExperimentConfig) -> String {
    let f = &cfg.fom;
    format!("problem={} nu={} dt={} t_end={} form={} scheme={}", cfg.problem, f.nu, f.dt, f.t_end, f.form, f.scheme)
}

/// Space and unit-viscosity operators of the configured problem.
pub struct Workspace {
    pub setup: ProblemSetup,
    pub ops: LinearOperators,
}

impl Workspace {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let setup = cfg.build_setup()?;
        let ops = assemble_linear_operators(&setup.space, 1.0);
        Ok(Self { setup, ops })
    }
}

pub struct FomOutput {
    pub run: FomRun,
    pub files: Vec<PathBuf>,
}

/// Full-order run; writes the snapshot archive, the scalar table and
/// optional VTK fields.
pub fn cmd_fom(cfg: &ExperimentConfig) -> Result<FomOutput> {
    ensure_dir(cfg)?;
    let setup = cfg.build_setup()?;
    let run = run_fom(&cfg.fom, &setup.space, setup.u0.clone(), None, setup.drag_label)?;
    let snap = cfg.artifact("snapshots.bin");
    let scal = cfg.artifact("scalars.csv");
    io::write_snapshots(&snap, &run.snapshots, &meta(cfg))?;
    io::write_scalars(&scal, &run.scalars)?;
    let mut files = vec![snap, scal];
    if cfg.output.vtk_stride > 0 {
        for (k, (u, p)) in run.snapshots.columns().iter().zip(&run.snapshot_pressures).enumerate() {
            if k % cfg.output.vtk_stride == 0 {
                let path = cfg.artifact(&format!("u_{k:05}.vtk"));
                let title = format!("t = {}", run.snapshots.times()[k]);
                io::write_vtk(&path, &setup.space, u, Some(p), &title)?;
                files.push(path);
            }
        }
    }
    Ok(FomOutput { run, files })
}

/// Worst relative gap between both sides of the projection-error identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub max_rel: f64,
    pub worst_r: usize,
}

pub struct PodOutput {
    pub archive: BasisArchive,
    pub identity: IdentityReport,
    pub files: Vec<PathBuf>,
}

pub fn cmd_pod(cfg: &ExperimentConfig) -> Result<PodOutput> {
    ensure_dir(cfg)?;
    let (snapshots, _) = io::read_snapshots(&cfg.artifact("snapshots.bin"))?;
    let ws = Workspace::new(cfg)?;
    if snapshots.n_dofs() != ws.setup.space.n_velocity() {
        return Err(Error::SpaceMismatch(format!(
            "archive has {} velocity dofs, the configured mesh {}",
            snapshots.n_dofs(),
            ws.setup.space.n_velocity()
        )));
    }
    let basis = build_pod_basis(&snapshots, &ws.ops, cfg.pod.centering)?;
    let identity = projection_identity(&basis, &snapshots, &ws.ops)?;
    let reference = Some((snapshots.times()[0], snapshots.column(0).to_vec()));
    let archive = BasisArchive { basis, reference, meta: meta(cfg) };
    let bpath = cfg.artifact("basis.bin");
    let spath = cfg.artifact("spectrum.csv");
    io::write_basis(&bpath, &archive)?;
    write_spectrum(&spath, &archive.basis)?;
    Ok(PodOutput { archive, identity, files: vec![bpath, spath] })
}

/// Checks the identity for every `r` below the rank.
pub fn projection_identity(basis: &PodBasis, snapshots: &SnapshotSet, ops: &LinearOperators) -> Result<IdentityReport> {
    let mut rep = IdentityReport { max_rel: 0.0, worst_r: 0 };
    for r in 0..basis.rank() {
        let (lhs, rhs) = pod_projection_error(basis, snapshots, ops, r)?;
        let rel = (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
        if rel > rep.max_rel {
            rep = IdentityReport { max_rel: rel, worst_r: r };
        }
    }
    Ok(rep)
}

/// `k, eigenvalue, captured` with the cumulative energy fraction.
fn write_spectrum(path: &std::path::Path, basis: &PodBasis) -> Result<()> {
    let total: f64 = basis.eigenvalues.iter().sum();
    let mut acc = 0.0;
    let rows: Vec<Vec<f64>> = basis
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, l)| {
            acc += l;
            vec![(k + 1) as f64, *l, acc / total]
        })
        .collect();
    let header = ["k", "eigenvalue", "captured"].map(String::from);
    io::write_numeric(path, &header, &rows)
}

/// A finished online run with its reconstructed diagnostics.
#[derive(Debug, Clone)]
pub struct RomOutput {
    pub form: NonlinearForm,
    pub r: usize,
    pub operators: RomOperators,
    pub trajectory: RomTrajectory,
    pub scalars: FomScalars,
    pub files: Vec<PathBuf>,
}

/// Reduced run on the stored basis, started from the projected reference state.
pub fn cmd_rom(cfg: &ExperimentConfig, form: NonlinearForm, r: usize) -> Result<RomOutput> {
    ensure_dir(cfg)?;
    let archive = io::read_basis(&cfg.artifact("basis.bin"))?;
    let ws = Workspace::new(cfg)?;
    run_reduced(cfg, &ws, &archive, form, r)
}

fn rom_name(form: NonlinearForm, r: usize) -> String {
    format!("rom_{form}_r{r}")
}

pub fn run_reduced(
    cfg: &ExperimentConfig,
    ws: &Workspace,
    archive: &BasisArchive,
    form: NonlinearForm,
    r: usize,
) -> Result<RomOutput> {
    let space = &ws.setup.space;
    let basis = &archive.basis;
    if basis.n_dofs() != space.n_velocity() {
        return Err(Error::SpaceMismatch("basis does not belong to the configured mesh".into()));
    }
    let (t0, u0) = archive
        .reference
        .as_ref()
        .ok_or_else(|| Error::format("reference", "basis archive carries no initial state"))?;
    let nu = cfg.fom.nu;
    let operators = assemble_rom_operators(basis, r, space, &ws.ops, form, nu, None)?;
    let a0 = basis.project(&ws.ops.mass, r, u0)?;
    let dt = cfg.rom_dt();
    let span = cfg.rom_t_end() - t0;
    let steps = (span / dt).round();
    if steps < 1.0 || (steps * dt - span).abs() > 1e-9 * span.abs().max(1.0) {
        return Err(Error::Config(format!("ROM interval [{t0}, {}] is not a multiple of dt {dt}", cfg.rom_t_end())));
    }
    let rc = RomRunConfig { t0: *t0, dt, steps: steps as usize, scheme: cfg.rom.scheme, newton: cfg.fom.newton };
    let trajectory = run_rom(&operators, &a0, &rc)?;

    let mut scalars = FomScalars::default();
    let sub = basis.truncated(r)?;
    for (t, a) in trajectory.times.iter().zip(&trajectory.coefficients) {
        let w = sub.reconstruct(a)?;
        let (e, z) = energy_enstrophy(space, &ws.ops, &w)?;
        scalars.t.push(*t);
        scalars.energy.push(e);
        scalars.enstrophy.push(z);
        scalars.div_error.push(div_curl_sq(space, &w).0.max(0.0).sqrt());
    }
    scalars.drag = match ws.setup.drag_label {
        Some(label) => rom_drag_series(space, &ws.ops, &sub, &trajectory, form, nu, dt, cfg.rom.scheme, label)?,
        None => vec![f64::NAN; trajectory.len()],
    };

    let name = rom_name(form, r);
    let tpath = cfg.artifact(&format!("{name}_trajectory.csv"));
    let spath = cfg.artifact(&format!("{name}_scalars.csv"));
    let opath = cfg.artifact(&format!("{name}_operators.bin"));
    io::write_trajectory(&tpath, &trajectory.times, &trajectory.coefficients)?;
    io::write_scalars(&spath, &scalars)?;
    io::write_operators(&opath, &operators, &meta(cfg))?;
    Ok(RomOutput { form, r, operators, trajectory, scalars, files: vec![tpath, spath, opath] })
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub form: NonlinearForm,
    pub r: usize,
    /// Empty on success, otherwise the failure message.
    pub status: String,
    pub linf_l2: f64,
    pub l2_h1: f64,
    /// L2-in-time drag difference, NaN without a drag boundary.
    pub drag_l2: f64,
    /// L2-in-time divergence norms of the snapshots and the reduced states.
    pub fom_div_l2: f64,
    pub rom_div_l2: f64,
    /// `linf_l2` over that of the next smaller `r` of the same form.
    pub plateau_ratio: f64,
}

pub const COMPARE_COLUMNS: [&str; 9] =
    ["form", "r", "linf_l2", "l2_h1", "drag_l2", "fom_div_l2", "rom_div_l2", "plateau_ratio", "status"];

/// Picks the reduced states at the snapshot times.
pub fn align(snapshots: &SnapshotSet, traj: &RomTrajectory) -> Result<(SnapshotSet, RomTrajectory)> {
    let (t0, dt) = match traj.times.as_slice() {
        [a, b, ..] => (*a, b - a),
        _ => return Err(Error::TimeGridMismatch("reduced trajectory has fewer than two states".into())),
    };
    let t_last = *traj.times.last().unwrap();
    let mut fom = SnapshotSet::new(snapshots.n_dofs());
    let mut rom = RomTrajectory { times: vec![], coefficients: vec![], newton_iterations: vec![] };
    for (t, u) in snapshots.times().iter().zip(snapshots.columns()) {
        if *t < t0 - 1e-9 * dt || *t > t_last + 1e-9 * dt {
            continue;
        }
        let n = ((t - t0) / dt).round() as usize;
        if (traj.times[n] - t).abs() > 1e-9 * dt {
            return Err(Error::TimeGridMismatch(format!("snapshot time {t} is not on the reduced grid")));
        }
        fom.push(*t, u.clone())?;
        rom.times.push(traj.times[n]);
        rom.coefficients.push(traj.coefficients[n].clone());
    }
    if fom.len() < 2 {
        return Err(Error::TimeGridMismatch("fewer than two common times".into()));
    }
    Ok((fom, rom))
}

/// L2-in-time difference over the common finite entries; NaN if there are none.
pub fn series_mismatch(fom: &FomScalars, rom: &FomScalars, dt: f64) -> f64 {
    let mut diffs = Vec::new();
    let mut j = 0;
    for (t, d) in rom.t.iter().zip(&rom.drag) {
        while j < fom.t.len() && fom.t[j] < t - 1e-9 * dt {
            j += 1;
        }
        if j < fom.t.len() && (fom.t[j] - t).abs() <= 1e-9 * dt && d.is_finite() && fom.drag[j].is_finite() {
            diffs.push(d - fom.drag[j]);
        }
    }
    if diffs.is_empty() {
        f64::NAN
    } else {
        time_norm(&diffs, dt, TimeNormOrder::Two)
    }
}

pub struct CompareOutput {
    pub rows: Vec<CompareRow>,
    pub runs: Vec<Option<RomOutput>>,
    pub files: Vec<PathBuf>,
}

fn compare_one(
    cfg: &ExperimentConfig,
    ws: &Workspace,
    archive: &BasisArchive,
    snapshots: &SnapshotSet,
    fom_scalars: &FomScalars,
    form: NonlinearForm,
    r: usize,
) -> Result<(CompareRow, RomOutput)> {
    let out = run_reduced(cfg, ws, archive, form, r)?;
    let (fom, rom) = align(snapshots, &out.trajectory)?;
    let dt_snap = fom.times()[1] - fom.times()[0];
    let sub = archive.basis.truncated(r)?;
    let err: TrajectoryError = trajectory_error(&ws.setup.space, &ws.ops, &fom, &rom, &sub, cfg.fom.nu, dt_snap)?;
    let rom_div: Vec<f64> = rom
        .coefficients
        .iter()
        .map(|a| sub.reconstruct(a).map(|w| div_curl_sq(&ws.setup.space, &w).0.max(0.0).sqrt()))
        .collect::<Result<_>>()?;
    let row = CompareRow {
        form,
        r,
        status: String::new(),
        linf_l2: err.linf_l2,
        l2_h1: err.l2_h1,
        drag_l2: series_mismatch(fom_scalars, &out.scalars, cfg.rom_dt()),
        fom_div_l2: time_norm(&err.div_series.values, dt_snap, TimeNormOrder::Two),
        rom_div_l2: time_norm(&rom_div, dt_snap, TimeNormOrder::Two),
        plateau_ratio: f64::NAN,
    };
    Ok((row, out))
}

/// Runs every configured `(form, r)` pair in parallel and tabulates the errors
/// against the snapshots. Failed runs keep a row with their message.
pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<CompareOutput> {
    ensure_dir(cfg)?;
    let (snapshots, _) = io::read_snapshots(&cfg.artifact("snapshots.bin"))?;
    let archive = io::read_basis(&cfg.artifact("basis.bin"))?;
    let fom_scalars = io::read_scalars(&cfg.artifact("scalars.csv"))?;
    let ws = Workspace::new(cfg)?;
    let mut rs = cfg.rom.r.clone();
    rs.sort_unstable();
    rs.dedup();
    let jobs: Vec<(NonlinearForm, usize)> =
        cfg.rom.forms.iter().flat_map(|f| rs.iter().map(move |r| (*f, *r))).collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len()).max(1);
    let mut results: Vec<Option<Result<(CompareRow, RomOutput)>>> = (0..jobs.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let chunks: Vec<Vec<usize>> = (0..workers).map(|w| (w..jobs.len()).step_by(workers).collect()).collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|idx| {
                let (ws, archive, snapshots, fom_scalars, jobs) = (&ws, &archive, &snapshots, &fom_scalars, &jobs);
                s.spawn(move || {
                    idx.into_iter()
                        .map(|i| {
                            let (f, r) = jobs[i];
                            log::info!("reduced run {f} r={r}");
                            (i, compare_one(cfg, ws, archive, snapshots, fom_scalars, f, r))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, res) in h.join().expect("worker panicked") {
                results[i] = Some(res);
            }
        }
    });
    let mut rows = Vec::with_capacity(jobs.len());
    let mut runs = Vec::with_capacity(jobs.len());
    for ((form, r), res) in jobs.iter().zip(results) {
        match res.expect("every job ran") {
            Ok((row, out)) => {
                rows.push(row);
                runs.push(Some(out));
            }
            // a parameter problem is the caller's, a solver failure is data
            Err(e @ (Error::Config(_) | Error::RankExceeded { .. } | Error::Format { .. } | Error::Io { .. })) => {
                return Err(e)
            }
            Err(e) => {
                log::warn!("{form} r={r}: {e}");
                rows.push(CompareRow {
                    form: *form,
                    r: *r,
                    status: e.to_string(),
                    linf_l2: f64::NAN,
                    l2_h1: f64::NAN,
                    drag_l2: f64::NAN,
                    fom_div_l2: f64::NAN,
                    rom_div_l2: f64::NAN,
                    plateau_ratio: f64::NAN,
                });
                runs.push(None);
            }
        }
    }
    for i in 1..rows.len() {
        if rows[i].form == rows[i - 1].form {
            rows[i].plateau_ratio = rows[i].linf_l2 / rows[i - 1].linf_l2;
        }
    }
    let path = cfg.output.dir.join("compare.csv");
    write_compare(&path, &rows)?;
    Ok(CompareOutput { rows, runs, files: vec![path] })
}

pub fn write_compare(path: &std::path::Path, rows: &[CompareRow]) -> Result<()> {
    let f = io::table::fmt_f64;
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|w| {
            vec![
                w.form.to_string(),
                w.r.to_string(),
                f(w.linf_l2),
                f(w.l2_h1),
                f(w.drag_l2),
                f(w.fom_div_l2),
                f(w.rom_div_l2),
                f(w.plateau_ratio),
                w.status.clone(),
            ]
        })
        .collect();
    io::table::write_records(path, &COMPARE_COLUMNS.map(String::from), &cells)
}

pub fn read_compare(path: &std::path::Path) -> Result<Vec<CompareRow>> {
    let (header, rows) = io::table::read_records(path)?;
    if header != COMPARE_COLUMNS.map(String::from) {
        return Err(Error::format("header", format!("expected {}", COMPARE_COLUMNS.join(","))));
    }
    rows.iter()
        .enumerate()
        .map(|(i, c)| {
            let num = |k: usize| {
                c[k].parse::<f64>().map_err(|_| {
                    Error::format(COMPARE_COLUMNS[k], format!("row {}: '{}' is not a number", i + 1, c[k]))
                })
            };
            Ok(CompareRow {
                form: c[0].parse().map_err(|_| Error::format("form", format!("row {}: '{}'", i + 1, c[0])))?,
                r: c[1].parse().map_err(|_| Error::format("r", format!("row {}: '{}'", i + 1, c[1])))?,
                linf_l2: num(2)?,
                l2_h1: num(3)?,
                drag_l2: num(4)?,
                fom_div_l2: num(5)?,
                rom_div_l2: num(6)?,
                plateau_ratio: num(7)?,
                status: c[8].clone(),
            })
        })
        .collect()
}
