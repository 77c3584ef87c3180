//! C ABI over the nsrom pipeline: problem setup, full-order runs, POD bases
//! and reduced models behind opaque handles.
//!
//! Every fallible call returns an [`NsromStatus`]; on failure the message is
//! available from [`nsrom_last_error`] on the same thread. Handles are freed
//! with their `_free` function; passing NULL to a `_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nsrom::fem::{assemble_linear_operators, LinearOperators, NonlinearForm};
use nsrom::fom::{
    cylinder_channel, kelvin_helmholtz, run_fom, taylor_green, FomConfig, ProblemSetup, SnapshotWindow, TimeScheme,
};
use nsrom::mesh::bundled_cylinder_mesh;
use nsrom::pod::{build_pod_basis, Centering, PodBasis, SnapshotSet};
use nsrom::rom::{assemble_rom_operators, run_rom, RomOperators, RomRunConfig};
use nsrom::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsromStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Solver = 4,
    Format = 5,
    Io = 6,
    Panic = 7,
}

/// Values accepted where a `form` argument is expected.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum NsromForm {
    Convective = 0,
    Skew = 1,
    Rotational = 2,
    Emac = 3,
}

/// Values accepted where a `scheme` argument is expected.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum NsromScheme {
    BackwardEuler = 0,
    Bdf2 = 1,
}

/// Values accepted where a `kind` argument is expected.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub enum NsromProblemKind {
    KelvinHelmholtz = 0,
    CylinderChannel = 1,
    TaylorGreen = 2,
}

/// Full-order run parameters. Snapshots are every `stride`-th step from the
/// first step at or after `snapshot_start`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NsromFomParams {
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub form: u32,
    pub scheme: u32,
    pub snapshot_start: f64,
    pub stride: usize,
}

/// A discretized experiment and its mass, stiffness and divergence matrices.
pub struct NsromProblem {
    setup: ProblemSetup,
    ops: LinearOperators,
}

pub struct NsromSnapshots(SnapshotSet);

pub struct NsromBasis(PodBasis);

pub struct NsromRom(RomOperators);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn status_of(e: &Error) -> NsromStatus {
    match e {
        Error::Config(_)
        | Error::RankExceeded { .. }
        | Error::Boundary(_)
        | Error::Mesh(_)
        | Error::MeshParse { .. } => NsromStatus::Config,
        Error::Precondition(_) | Error::SpaceMismatch(_) | Error::TimeGridMismatch(_) => NsromStatus::InvalidArgument,
        Error::Format { .. } => NsromStatus::Format,
        Error::Io { .. } => NsromStatus::Io,
        _ => NsromStatus::Solver,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NsromStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NsromStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("{what} is NULL"));
            NsromStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            NsromStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            NsromStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

fn form(code: u32) -> Result<NonlinearForm, Fail> {
    u8::try_from(code)
        .ok()
        .and_then(NonlinearForm::from_code)
        .ok_or_else(|| Fail::Arg(format!("unknown form code {code}")))
}

fn scheme(code: u32) -> Result<TimeScheme, Fail> {
    match code {
        0 => Ok(TimeScheme::BackwardEuler),
        1 => Ok(TimeScheme::Bdf2),
        _ => Err(Fail::Arg(format!("unknown scheme code {code}"))),
    }
}

fn check_len(len: usize, want: usize, what: &str) -> Result<(), Fail> {
    if len == want {
        Ok(())
    } else {
        Err(Fail::Arg(format!("{what} has length {len}, expected {want}")))
    }
}

/// Message of the last failed call on this thread, empty if none. The
/// pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn nsrom_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a built-in experiment. `n` is the cells per side for the shear
/// layer and the vortex array and is ignored for the cylinder channel;
/// `nu` is used only by the vortex array.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn nsrom_problem_new(kind: u32, n: usize, nu: f64, out: *mut *mut NsromProblem) -> NsromStatus {
    guard(|| {
        let setup = match kind {
            0 => kelvin_helmholtz(n)?,
            1 => cylinder_channel(bundled_cylinder_mesh()?)?,
            2 => taylor_green(n, nu)?,
            _ => return Err(Fail::Arg(format!("unknown problem kind {kind}"))),
        };
        let ops = assemble_linear_operators(&setup.space, 1.0);
        put(out, NsromProblem { setup, ops })
    })
}

/// # Safety
/// `p` must be NULL or a handle from [`nsrom_problem_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nsrom_problem_free(p: *mut NsromProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Velocity unknowns of the problem, 0 for NULL.
///
/// # Safety
/// `p` must be NULL or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn nsrom_problem_velocity_dofs(p: *const NsromProblem) -> usize {
    p.as_ref().map_or(0, |p| p.setup.space.n_velocity())
}

/// Copies the initial velocity into `out` (length = velocity unknowns).
///
/// # Safety
/// `p` must be a live problem handle and `out` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nsrom_problem_initial_velocity(
    p: *const NsromProblem,
    out: *mut f64,
    len: usize,
) -> NsromStatus {
    guard(|| {
        let p = get(p, "problem")?;
        check_len(len, p.setup.u0.len(), "out")?;
        slice_mut(out, len, "out")?.copy_from_slice(&p.setup.u0);
        Ok(())
    })
}

/// `0.5 ||u||^2` in L2.
///
/// # Safety
/// `p` must be a live problem handle and `u` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nsrom_problem_energy(
    p: *const NsromProblem,
    u: *const f64,
    len: usize,
    energy: *mut f64,
) -> NsromStatus {
    guard(|| {
        let p = get(p, "problem")?;
        let u = slice(u, len, "u")?;
        p.setup.space.check_velocity(u)?;
        if energy.is_null() {
            return Err(Fail::Null("energy"));
        }
        *energy = 0.5 * p.ops.mass.bilinear(u, u);
        Ok(())
    })
}

/// Runs the full-order model from the problem's initial velocity.
///
/// # Safety
/// `p` and `params` must be valid; `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn nsrom_fom_run(
    p: *const NsromProblem,
    params: *const NsromFomParams,
    out: *mut *mut NsromSnapshots,
) -> NsromStatus {
    guard(|| {
        let p = get(p, "problem")?;
        let q = get(params, "params")?;
        let mut cfg = FomConfig::new(q.nu, q.dt, q.t_end, form(q.form)?, scheme(q.scheme)?);
        cfg.snapshots = SnapshotWindow { start: q.snapshot_start, end: None, stride: q.stride };
        let run = run_fom(&cfg, &p.setup.space, p.setup.u0.clone(), None, p.setup.drag_label)?;
        put(out, NsromSnapshots(run.snapshots))
    })
}

/// # Safety
/// `s` must be NULL or a live snapshot handle.
#[no_mangle]
pub unsafe extern "C" fn nsrom_snapshots_free(s: *mut NsromSnapshots) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of snapshots, 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live snapshot handle.
#[no_mangle]
pub unsafe extern "C" fn nsrom_snapshots_count(s: *const NsromSnapshots) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Copies snapshot `k` into `out` and its time into `time` (may be NULL).
///
/// # Safety
/// `s` must be live, `out` valid for `len` doubles, `time` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn nsrom_snapshots_get(
    s: *const NsromSnapshots,
    k: usize,
    out: *mut f64,
    len: usize,
    time: *mut f64,
) -> NsromStatus {
    guard(|| {
        let s = &get(s, "snapshots")?.0;
        if k >= s.len() {
            return Err(Fail::Arg(format!("snapshot {k} of {}", s.len())));
        }
        check_len(len, s.n_dofs(), "out")?;
        slice_mut(out, len, "out")?.copy_from_slice(s.column(k));
        if !time.is_null() {
            *time = s.times()[k];
        }
        Ok(())
    })
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a std::path::Path, Fail> {
    if p.is_null() {
        return Err(Fail::Null("path"));
    }
    CStr::from_ptr(p).to_str().map(std::path::Path::new).map_err(|_| Fail::Arg("path is not UTF-8".into()))
}

/// Writes the snapshot archive.
///
/// # Safety
/// `s` must be live and `file` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nsrom_snapshots_write(s: *const NsromSnapshots, file: *const c_char) -> NsromStatus {
    guard(|| {
        let s = get(s, "snapshots")?;
        nsrom::io::write_snapshots(path(file)?, &s.0, "")?;
        Ok(())
    })
}

/// Reads a snapshot archive.
///
/// # Safety
/// `file` must be a NUL-terminated string and `out` valid for one pointer.
#[no_mangle]
pub unsafe extern "C" fn nsrom_snapshots_read(file: *const c_char, out: *mut *mut NsromSnapshots) -> NsromStatus {
    guard(|| {
        let (set, _) = nsrom::io::read_snapshots(path(file)?)?;
        put(out, NsromSnapshots(set))
    })
}

/// POD basis of the snapshots; `centering` is 0 (none) or 1 (mean).
///
/// # Safety
/// `p` and `s` must be live handles; `out` valid for one pointer.
#[no_mangle]
pub unsafe extern "C" fn nsrom_pod_build(
    p: *const NsromProblem,
    s: *const NsromSnapshots,
    centering: u32,
    out: *mut *mut NsromBasis,
) -> NsromStatus {
    guard(|| {
        let p = get(p, "problem")?;
        let s = get(s, "snapshots")?;
        let c = match centering {
            0 => Centering::None,
            1 => Centering::Mean,
            _ => return Err(Fail::Arg(format!("unknown centering {centering}"))),
        };
        put(out, NsromBasis(build_pod_basis(&s.0, &p.ops, c)?))
    })
}

/// # Safety
/// `b` must be NULL or a live basis handle.
#[no_mangle]
pub unsafe extern "C" fn nsrom_basis_free(b: *mut NsromBasis) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Basis rank, 0 for NULL.
///
/// # Safety
/// `b` must be NULL or a live basis handle.
#[no_mangle]
pub unsafe extern "C" fn nsrom_basis_rank(b: *const NsromBasis) -> usize {
    b.as_ref().map_or(0, |b| b.0.rank())
}

/// Copies the eigenvalues (length = rank).
///
/// # Safety
/// `b` must be live and `out` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nsrom_basis_eigenvalues(b: *const NsromBasis, out: *mut f64, len: usize) -> NsromStatus {
    guard(|| {
        let b = &get(b, "basis")?.0;
        check_len(len, b.rank(), "out")?;
        slice_mut(out, len, "out")?.copy_from_slice(&b.eigenvalues);
        Ok(())
    })
}

/// Coefficients of the L2 projection of `u` onto the first `r` modes.
///
/// # Safety
/// Handles must be live, `u` valid for `len` doubles, `a` for `r` doubles.
#[no_mangle]
pub unsafe extern "C" fn nsrom_basis_project(
    p: *const NsromProblem,
    b: *const NsromBasis,
    u: *const f64,
    len: usize,
    a: *mut f64,
    r: usize,
) -> NsromStatus {
    guard(|| {
        let p = get(p, "problem")?;
        let b = &get(b, "basis")?.0;
        let coef = b.project(&p.ops.mass, r, slice(u, len, "u")?)?;
        slice_mut(a, r, "a")?.copy_from_slice(&coef);
        Ok(())
    })
}

/// Velocity `mean + sum a_k psi_k` of `r` coefficients.
///
/// # Safety
/// `b` must be live, `a` valid for `r` doubles, `out` for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nsrom_basis_reconstruct(
    b: *const NsromBasis,
    a: *const f64,
    r: usize,
    out: *mut f64,
    len: usize,
) -> NsromStatus {
    guard(|| {
        let b = &get(b, "basis")?.0;
        check_len(len, b.n_dofs(), "out")?;
        let u = b.reconstruct(slice(a, r, "a")?)?;
        slice_mut(out, len, "out")?.copy_from_slice(&u);
        Ok(())
    })
}

/// Reduced operators of the first `r` modes.
///
/// # Safety
/// `p` and `b` must be live; `out` valid for one pointer.
#[no_mangle]
pub unsafe extern "C" fn nsrom_rom_assemble(
    p: *const NsromProblem,
    b: *const NsromBasis,
    r: usize,
    form_code: u32,
    nu: f64,
    out: *mut *mut NsromRom,
) -> NsromStatus {
    guard(|| {
        let p = get(p, "problem")?;
        let b = &get(b, "basis")?.0;
        let ops = assemble_rom_operators(b, r, &p.setup.space, &p.ops, form(form_code)?, nu, None)?;
        put(out, NsromRom(ops))
    })
}

/// # Safety
/// `m` must be NULL or a live reduced-model handle.
#[no_mangle]
pub unsafe extern "C" fn nsrom_rom_free(m: *mut NsromRom) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of the reduced model, 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live reduced-model handle.
#[no_mangle]
pub unsafe extern "C" fn nsrom_rom_dim(m: *const NsromRom) -> usize {
    m.as_ref().map_or(0, |m| m.0.r)
}

/// Integrates `steps` steps from `a0`; `out` receives `(steps + 1) * r`
/// coefficients, one state after another, starting with `a0`.
///
/// # Safety
/// `m` must be live, `a0` valid for `r` doubles and `out` for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nsrom_rom_run(
    m: *const NsromRom,
    a0: *const f64,
    r: usize,
    t0: f64,
    dt: f64,
    steps: usize,
    scheme_code: u32,
    out: *mut f64,
    len: usize,
) -> NsromStatus {
    guard(|| {
        let m = &get(m, "rom")?.0;
        check_len(r, m.r, "a0")?;
        let want =
            steps.checked_add(1).and_then(|s| s.checked_mul(r)).ok_or_else(|| Fail::Arg("steps overflow".into()))?;
        check_len(len, want, "out")?;
        let cfg = RomRunConfig { t0, dt, steps, scheme: scheme(scheme_code)?, newton: Default::default() };
        let traj = run_rom(m, slice(a0, r, "a0")?, &cfg)?;
        let out = slice_mut(out, len, "out")?;
        for (chunk, a) in out.chunks_exact_mut(r.max(1)).zip(&traj.coefficients) {
            chunk.copy_from_slice(a);
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn null_handles_report_and_do_not_crash() {
        unsafe {
            let mut e = 0.0;
            assert_eq!(nsrom_problem_energy(ptr::null(), ptr::null(), 0, &mut e), NsromStatus::NullPointer);
            let msg = CStr::from_ptr(nsrom_last_error()).to_str().unwrap();
            assert_eq!(msg, "problem is NULL");
            assert_eq!(nsrom_problem_velocity_dofs(ptr::null()), 0);
            nsrom_problem_free(ptr::null_mut());
            nsrom_basis_free(ptr::null_mut());
        }
    }

    #[test]
    fn bad_codes_are_invalid_arguments() {
        unsafe {
            let mut p = ptr::null_mut();
            assert_eq!(nsrom_problem_new(9, 4, 0.0, &mut p), NsromStatus::InvalidArgument);
            assert!(p.is_null());
            assert_eq!(nsrom_problem_new(0, 0, 0.0, &mut p), NsromStatus::InvalidArgument);
            assert!(p.is_null());
        }
    }
}
