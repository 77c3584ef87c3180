#ifndef NSROM_H
#define NSROM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Values accepted where a `form` argument is expected.
typedef enum {
  NSROM_FORM_CONVECTIVE = 0,
  NSROM_FORM_SKEW = 1,
  NSROM_FORM_ROTATIONAL = 2,
  NSROM_FORM_EMAC = 3,
} NsromForm;

// Values accepted where a `kind` argument is expected.
typedef enum {
  NSROM_PROBLEM_KIND_KELVIN_HELMHOLTZ = 0,
  NSROM_PROBLEM_KIND_CYLINDER_CHANNEL = 1,
  NSROM_PROBLEM_KIND_TAYLOR_GREEN = 2,
} NsromProblemKind;

// Values accepted where a `scheme` argument is expected.
typedef enum {
  NSROM_SCHEME_BACKWARD_EULER = 0,
  NSROM_SCHEME_BDF2 = 1,
} NsromScheme;

typedef enum {
  NSROM_STATUS_OK = 0,
  NSROM_STATUS_NULL_POINTER = 1,
  NSROM_STATUS_INVALID_ARGUMENT = 2,
  NSROM_STATUS_CONFIG = 3,
  NSROM_STATUS_SOLVER = 4,
  NSROM_STATUS_FORMAT = 5,
  NSROM_STATUS_IO = 6,
  NSROM_STATUS_PANIC = 7,
} NsromStatus;

typedef struct NsromBasis NsromBasis;

// A discretized experiment and its mass, stiffness and divergence matrices.
typedef struct NsromProblem NsromProblem;

typedef struct NsromRom NsromRom;

typedef struct NsromSnapshots NsromSnapshots;

// Full-order run parameters. Snapshots are every `stride`-th step from the
// first step at or after `snapshot_start`.
typedef struct {
  double nu;
  double dt;
  double t_end;
  uint32_t form;
  uint32_t scheme;
  double snapshot_start;
  size_t stride;
} NsromFomParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, empty if none. The
// pointer stays valid until the next call into the library on this thread.
const char *nsrom_last_error(void);

// Builds a built-in experiment. `n` is the cells per side for the shear
// layer and the vortex array and is ignored for the cylinder channel;
// `nu` is used only by the vortex array.
//
// # Safety
// `out` must be valid for writing one pointer.
NsromStatus nsrom_problem_new(uint32_t kind, size_t n, double nu, NsromProblem **out);

// # Safety
// `p` must be NULL or a handle from [`nsrom_problem_new`] not yet freed.
void nsrom_problem_free(NsromProblem *p);

// Velocity unknowns of the problem, 0 for NULL.
//
// # Safety
// `p` must be NULL or a live problem handle.
size_t nsrom_problem_velocity_dofs(const NsromProblem *p);

// Copies the initial velocity into `out` (length = velocity unknowns).
//
// # Safety
// `p` must be a live problem handle and `out` valid for `len` doubles.
NsromStatus nsrom_problem_initial_velocity(const NsromProblem *p, double *out, size_t len);

// `0.5 ||u||^2` in L2.
//
// # Safety
// `p` must be a live problem handle and `u` valid for `len` doubles.
NsromStatus nsrom_problem_energy(const NsromProblem *p,
                                 const double *u,
                                 size_t len,
                                 double *energy);

// Runs the full-order model from the problem's initial velocity.
//
// # Safety
// `p` and `params` must be valid; `out` valid for writing one pointer.
NsromStatus nsrom_fom_run(const NsromProblem *p,
                          const NsromFomParams *params,
                          NsromSnapshots **out);

// # Safety
// `s` must be NULL or a live snapshot handle.
void nsrom_snapshots_free(NsromSnapshots *s);

// Number of snapshots, 0 for NULL.
//
// # Safety
// `s` must be NULL or a live snapshot handle.
size_t nsrom_snapshots_count(const NsromSnapshots *s);

// Copies snapshot `k` into `out` and its time into `time` (may be NULL).
//
// # Safety
// `s` must be live, `out` valid for `len` doubles, `time` NULL or writable.
NsromStatus nsrom_snapshots_get(const NsromSnapshots *s,
                                size_t k,
                                double *out,
                                size_t len,
                                double *time);

// Writes the snapshot archive.
//
// # Safety
// `s` must be live and `file` a NUL-terminated string.
NsromStatus nsrom_snapshots_write(const NsromSnapshots *s, const char *file);

// Reads a snapshot archive.
//
// # Safety
// `file` must be a NUL-terminated string and `out` valid for one pointer.
NsromStatus nsrom_snapshots_read(const char *file, NsromSnapshots **out);

// POD basis of the snapshots; `centering` is 0 (none) or 1 (mean).
//
// # Safety
// `p` and `s` must be live handles; `out` valid for one pointer.
NsromStatus nsrom_pod_build(const NsromProblem *p,
                            const NsromSnapshots *s,
                            uint32_t centering,
                            NsromBasis **out);

// # Safety
// `b` must be NULL or a live basis handle.
void nsrom_basis_free(NsromBasis *b);

// Basis rank, 0 for NULL.
//
// # Safety
// `b` must be NULL or a live basis handle.
size_t nsrom_basis_rank(const NsromBasis *b);

// Copies the eigenvalues (length = rank).
//
// # Safety
// `b` must be live and `out` valid for `len` doubles.
NsromStatus nsrom_basis_eigenvalues(const NsromBasis *b, double *out, size_t len);

// Coefficients of the L2 projection of `u` onto the first `r` modes.
//
// # Safety
// Handles must be live, `u` valid for `len` doubles, `a` for `r` doubles.
NsromStatus nsrom_basis_project(const NsromProblem *p,
                                const NsromBasis *b,
                                const double *u,
                                size_t len,
                                double *a,
                                size_t r);

// Velocity `mean + sum a_k psi_k` of `r` coefficients.
//
// # Safety
// `b` must be live, `a` valid for `r` doubles, `out` for `len` doubles.
NsromStatus nsrom_basis_reconstruct(const NsromBasis *b,
                                    const double *a,
                                    size_t r,
                                    double *out,
                                    size_t len);

// Reduced operators of the first `r` modes.
//
// # Safety
// `p` and `b` must be live; `out` valid for one pointer.
NsromStatus nsrom_rom_assemble(const NsromProblem *p,
                               const NsromBasis *b,
                               size_t r,
                               uint32_t form_code,
                               double nu,
                               NsromRom **out);

// # Safety
// `m` must be NULL or a live reduced-model handle.
void nsrom_rom_free(NsromRom *m);

// Dimension of the reduced model, 0 for NULL.
//
// # Safety
// `m` must be NULL or a live reduced-model handle.
size_t nsrom_rom_dim(const NsromRom *m);

// Integrates `steps` steps from `a0`; `out` receives `(steps + 1) * r`
// coefficients, one state after another, starting with `a0`.
//
// # Safety
// `m` must be live, `a0` valid for `r` doubles and `out` for `len` doubles.
NsromStatus nsrom_rom_run(const NsromRom *m,
                          const double *a0,
                          size_t r,
                          double t0,
                          double dt,
                          size_t steps,
                          uint32_t scheme_code,
                          double *out,
                          size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSROM_H */
