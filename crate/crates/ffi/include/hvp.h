#ifndef HVP_H
#define HVP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum HvpStatus {
  HVP_STATUS_OK = 0,
  HVP_STATUS_NULL_POINTER = 1,
  HVP_STATUS_INVALID_ARGUMENT = 2,
  HVP_STATUS_INVALID_DOMAIN = 3,
  HVP_STATUS_INVALID_PARAMS = 4,
  HVP_STATUS_SOLVE_FAILURE = 5,
  HVP_STATUS_SINGULAR_SYSTEM = 6,
  HVP_STATUS_DIVERGED = 7,
  HVP_STATUS_BUFFER_TOO_SMALL = 8,
  HVP_STATUS_PANIC = 9,
} HvpStatus;

typedef enum HvpSourceKind {
  /*
   `amplitude` everywhere.
   */
  HVP_SOURCE_KIND_CONSTANT = 0,
  /*
   `amplitude·exp(-|x - centre|²/eps)`.
   */
  HVP_SOURCE_KIND_GAUSSIAN = 1,
} HvpSourceKind;

/*
 Opaque interval, rectangle or box.
 */
typedef struct HvpDomain HvpDomain;

/*
 Opaque Galerkin solution.
 */
typedef struct HvpFemSolution HvpFemSolution;

/*
 Opaque plane-wave network.
 */
typedef struct HvpModel HvpModel;

/*
 Energy parameter pack.
 */
typedef struct HvpEnergyParams {
  double k;
  double gamma1;
  double gamma2;
  double alpha;
  double beta;
  double eps1;
  double eps2;
  double eps3;
  double l;
  double l0;
  size_t nu;
} HvpEnergyParams;

/*
 Coefficients of `F_γ ≥ Σ cᵢ·termᵢ`, divided by the dimension.
 `bimp` is the impedance coefficient.
 */
typedef struct HvpCoefficients {
  double residual;
  double grad;
  double mass;
  double bgrad;
  double bmass;
  double bimp;
  bool coercive;
} HvpCoefficients;

typedef struct HvpSource {
  enum HvpSourceKind kind;
  double centre[3];
  double eps;
  double amplitude;
} HvpSource;

typedef struct HvpSolveInfo {
  size_t n_dofs;
  double relative_residual;
  double backward_error;
  double hermitian_defect;
  double discrete_energy;
} HvpSolveInfo;

/*
 Training weights and schedule size; other schedule settings take their
 defaults without the quasi-Newton pass.
 */
typedef struct HvpTrainOptions {
  double gamma1;
  double gamma_bnd;
  size_t iterations;
  size_t n_interior;
  size_t n_boundary;
  double lr;
  uint64_t seed;
} HvpTrainOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated)
 and returns its length without the terminator. With a null `buf` or a
 too-small `len`, only the length is returned.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
size_t hvp_last_error_message(char *buf, size_t len);

/*
 NUL-terminated crate version; static storage.
 */
const char *hvp_version(void);

/*
 Creates a box from `dim` pairs `(lo, hi)` stored consecutively in `bounds`.

 # Safety
 `bounds` must be valid for `2 * dim` reads and `out` for one write.
 */
enum HvpStatus hvp_domain_new(size_t dim, const double *bounds, struct HvpDomain **out);

/*
 # Safety
 `domain` must be null or a pointer returned by [`hvp_domain_new`].
 */
void hvp_domain_free(struct HvpDomain *domain);

/*
 Diameter `L` and star-shape constant `L₀` about the centre.

 # Safety
 `domain` must come from [`hvp_domain_new`]; `l` and `l0` must be valid
 for one write each.
 */
enum HvpStatus hvp_domain_geometry(const struct HvpDomain *domain, double *l, double *l0);

/*
 Default parameter pack for a domain.

 # Safety
 `domain` must come from [`hvp_domain_new`]; `out` must be valid for one
 write.
 */
enum HvpStatus hvp_default_params(const struct HvpDomain *domain,
                                  double k,
                                  struct HvpEnergyParams *out);

/*
 Weak-BC coercivity coefficients of a parameter pack.

 # Safety
 `params` must be valid for one read and `out` for one write.
 */
enum HvpStatus hvp_coercivity_weak(const struct HvpEnergyParams *params,
                                   struct HvpCoefficients *out);

/*
 Assembles and solves the weak-BC Galerkin system on a uniform mesh of
 size `h` (1D quintic Hermite or 2D Bogner–Fox–Schmit).

 # Safety
 `domain` must come from [`hvp_domain_new`]; `params` and `f` must be valid
 for one read; `out` for one write.
 */
enum HvpStatus hvp_fem_solve(const struct HvpDomain *domain,
                             const struct HvpEnergyParams *params,
                             double h,
                             const struct HvpSource *f,
                             struct HvpFemSolution **out);

/*
 # Safety
 `sol` must come from [`hvp_fem_solve`]; `out` must be valid for one write.
 */
enum HvpStatus hvp_fem_solution_info(const struct HvpFemSolution *sol, struct HvpSolveInfo *out);

/*
 Evaluates the discrete field at `x` (three coordinates; unused ones ignored).

 # Safety
 `sol` must come from [`hvp_fem_solve`]; `x` must be valid for three reads;
 `re` and `im` for one write each.
 */
enum HvpStatus hvp_fem_solution_eval(const struct HvpFemSolution *sol,
                                     const double *x,
                                     double *re,
                                     double *im);

/*
 # Safety
 `sol` must be null or a pointer returned by [`hvp_fem_solve`].
 */
void hvp_fem_solution_free(struct HvpFemSolution *sol);

/*
 Plane-wave model with `p` directions, `r` rings, hidden widths `h_g` and
 `h_m`, gain scale `alpha_g`, seeded initialisation.

 # Safety
 `out` must be valid for one write.
 */
enum HvpStatus hvp_model_new(size_t dim,
                             size_t p,
                             size_t r,
                             double k,
                             double spread,
                             size_t h_g,
                             size_t h_m,
                             double alpha_g,
                             uint64_t seed,
                             struct HvpModel **out);

/*
 # Safety
 `model` must come from [`hvp_model_new`].
 */
size_t hvp_model_param_count(const struct HvpModel *model);

/*
 Copies the flat parameter vector into `buf`.

 # Safety
 `model` must come from [`hvp_model_new`]; `buf` must be valid for `len`
 writes.
 */
enum HvpStatus hvp_model_get_params(const struct HvpModel *model, double *buf, size_t len);

/*
 Replaces the flat parameter vector; `len` must equal the parameter count.

 # Safety
 `model` must come from [`hvp_model_new`]; `buf` must be valid for `len`
 reads.
 */
enum HvpStatus hvp_model_set_params(struct HvpModel *model, const double *buf, size_t len);

/*
 # Safety
 `model` must come from [`hvp_model_new`]; `x` must be valid for three
 reads; `re` and `im` for one write each.
 */
enum HvpStatus hvp_model_eval(const struct HvpModel *model,
                              const double *x,
                              double *re,
                              double *im);

/*
 Trains `model` in place on the domain and writes the last sampled loss.

 # Safety
 `model` and `domain` must come from their constructors; `f` and `opts`
 must be valid for one read; `final_loss` for one write.
 */
enum HvpStatus hvp_model_train(struct HvpModel *model,
                               const struct HvpDomain *domain,
                               const struct HvpSource *f,
                               const struct HvpTrainOptions *opts,
                               double *final_loss);

/*
 # Safety
 `model` must be null or a pointer returned by [`hvp_model_new`].
 */
void hvp_model_free(struct HvpModel *model);

/*
 Runs the `hvp` command line with `argc` arguments (including the program
 name) and returns its exit code.

 # Safety
 `argv` must hold `argc` valid NUL-terminated strings.
 */
int hvp_cli_run(int argc, const char *const *argv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HVP_H */
