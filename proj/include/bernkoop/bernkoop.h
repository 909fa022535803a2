#ifndef BERNKOOP_BERNKOOP_H
#define BERNKOOP_BERNKOOP_H

/* C interface to the Bernstein-Koopman library.
 *
 * Every function that can fail returns an int status code from bk_status;
 * 0 means success. On failure bk_last_error() returns a thread-local
 * message describing what went wrong. Out-parameters are written only on
 * success. Handles are created by bk_*_build / bk_*_load functions and
 * must be released with the matching bk_*_free (NULL is a no-op).
 *
 * All coordinates cross this interface in unit-box frame ([0,1]^m) unless
 * a function name says otherwise; bk_system_to_unit / bk_system_from_unit
 * convert to and from the system's native box.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bk_status {
  BK_OK = 0,
  BK_DOMAIN_ERROR = 1,     /* argument outside its mathematical domain */
  BK_SHAPE_ERROR = 2,      /* container size disagrees with degree/dimension */
  BK_OUT_OF_BOX = 3,       /* map image leaves the unit box beyond tolerance */
  BK_ESCAPE_ERROR = 4,     /* trajectory leaves the native box during integration */
  BK_ASSIGNMENT_ERROR = 5, /* lattice assignment heuristic produced crossing edges */
  BK_OUT_OF_HULL = 6,      /* inverse query outside the image simplices */
  BK_DEGENERATE_ERROR = 7, /* zero-volume simplex or degenerate box axis */
  BK_CONFIG_ERROR = 8,     /* bad user configuration (names, files, flags) */
  BK_CAPABILITY_ERROR = 9, /* operation needs data the object does not carry */
  BK_IO_ERROR = 10,
  BK_RANK_ERROR = 11,      /* SVD truncation removed every singular value */
  BK_UNKNOWN_ERROR = 99,   /* unexpected exception; see bk_last_error() */
} bk_status;

/* Message for the most recent failure on this thread; empty string if none. */
const char* bk_last_error(void);

/* Stable name of a status code ("ok", "domain_error", ...). */
const char* bk_status_name(int status);

typedef struct bk_system bk_system;         /* dynamical map on the unit box */
typedef struct bk_observable bk_observable; /* scalar function on the unit box */
typedef struct bk_koopman bk_koopman;       /* operator matrices for one degree */
typedef struct bk_dataset bk_dataset;       /* scattered (x, y) sample pairs */
typedef struct bk_lattice bk_lattice;       /* piecewise-linear lattice map */
typedef struct bk_edmd bk_edmd;             /* least-squares baseline matrices */
typedef struct bk_bounds bk_bounds;         /* error-bound context (moduli, constants) */

/* ---- systems ---- */

/* name: van_der_pol | scalar_logistic | product_decay_2d | lotka_volterra */
int bk_system_builtin(const char* name, bk_system** out);

/* JSON config: label, dimension, vector_field (expression strings over
 * x1..xm), horizon, native_box {lo, hi}; optional image_box,
 * rk4_steps_per_unit, box_margin. */
int bk_system_from_config(const char* path, bk_system** out);

int bk_system_dim(const bk_system* s);

/* Copies the system label; truncates to len-1 characters. */
int bk_system_label(const bk_system* s, char* buf, size_t len);

/* One application of the map; x and y are unit-frame arrays of length dim. */
int bk_system_eval(const bk_system* s, const double* x, double* y);

int bk_system_to_unit(const bk_system* s, const double* native, double* unit);
int bk_system_from_unit(const bk_system* s, const double* unit, double* native);

void bk_system_free(bk_system* s);

/* One-step prediction error at x0 from degree-n lattice images perturbed by
 * Gaussian noise (sigma, seed); sigma 0 gives the clean approximation error.
 * Error is the unit-frame Euclidean distance to the true image. */
int bk_noisy_one_step_error(const bk_system* s, const int* degree, size_t m,
                            const double* x0, double sigma, uint64_t seed,
                            double* err_out);

/* ---- observables ---- */

/* Arithmetic expression over x1..xm with + - * / ^ and parentheses; the
 * gradient is differentiated from the same expression. */
int bk_observable_parse(const char* expr, int m, bk_observable** out);

int bk_observable_eval(const bk_observable* f, const double* x, double* out);

void bk_observable_free(bk_observable* f);

/* ---- operator matrices (model-based) ---- */

int bk_koopman_build(const bk_system* s, const int* degree, size_t m,
                     bk_koopman** out);

int bk_koopman_dim(const bk_koopman* k);

/* basis 0 writes the Bernstein-basis matrix, 1 the monomial-basis matrix. */
int bk_koopman_save_csv(const bk_koopman* k, const char* path, int basis);

/* Trajectory of `steps` states from x0; traj receives steps*dim doubles,
 * state after step i at traj + i*dim. relift 0 iterates the lifted vector
 * linearly; relift 1 re-lifts the extracted state every step and requires
 * intermediate states to stay inside the unit box. */
int bk_koopman_predict(const bk_koopman* k, const double* x0, int steps,
                       int relift, double* traj);

/* Value of the approximated composition operator applied to f at x, computed
 * from the stored lattice images; stable at any degree. */
int bk_koopman_apply(const bk_koopman* k, const bk_observable* f,
                     const double* x, double* out);

void bk_koopman_free(bk_koopman* k);

/* ---- datasets ---- */

/* Samples (x_j, phi(x_j)) at the regular degree lattice. */
int bk_dataset_generate_lattice(const bk_system* s, const int* degree, size_t m,
                                bk_dataset** out);

/* Lattice nodes jittered by up to jitter/n per interior axis (boundary
 * coordinates stay on their faces) and shuffled; jitter in [0, 0.5). */
int bk_dataset_generate_jittered(const bk_system* s, const int* degree, size_t m,
                                 double jitter, uint64_t seed, bk_dataset** out);

/* CSV with one (x_1..x_m, y_1..y_m) row per pair. */
int bk_dataset_load_csv(const char* path, bk_dataset** out);
int bk_dataset_save_csv(const bk_dataset* d, const char* path);

int bk_dataset_dim(const bk_dataset* d);
int bk_dataset_size(const bk_dataset* d, size_t* n_out);

/* Copies pair idx into x and y (dim doubles each). */
int bk_dataset_get(const bk_dataset* d, size_t idx, double* x, double* y);

/* Perturbs the images in place with clamped Gaussian noise; writes the
 * realized sup perturbation norm for use with bk_bound_noise. */
int bk_dataset_add_noise(bk_dataset* d, double sigma, uint64_t seed,
                         double* sup_out);

void bk_dataset_free(bk_dataset* d);

/* ---- lattice map and data-driven operator ---- */

/* Builds the piecewise-linear map taking lattice nodes to the data sites,
 * choosing the node assignment heuristically (m <= 2). Fails with
 * BK_ASSIGNMENT_ERROR when the heuristic produces crossing edges; supply an
 * explicit assignment with bk_lattice_build_perm instead. */
int bk_lattice_build(const bk_dataset* d, const int* degree, size_t m,
                     bk_lattice** out);

/* perm maps lattice index to data index, 0-based, length = product(n_l+1). */
int bk_lattice_build_perm(const bk_dataset* d, const int* degree, size_t m,
                          const int* perm, bk_lattice** out);

/* Single-column CSV of 1-based data indices in lattice order; writes n
 * 0-based entries into perm. */
int bk_permutation_load_csv(const char* path, size_t n, int* perm);

/* 0 identity, 1 affine, 2 simplicial. */
int bk_lattice_kind(const bk_lattice* S);

int bk_lattice_eval(const bk_lattice* S, const double* x, double* y);

/* Inverse on the image of the map; BK_OUT_OF_HULL when y lies outside. */
int bk_lattice_eval_inverse(const bk_lattice* S, const double* y, double* x);

/* Lipschitz constants of the map: overall and one per axis. */
int bk_lattice_lipschitz(const bk_lattice* S, double* full, double* partial);

void bk_lattice_free(bk_lattice* S);

/* Operator matrices of the composite map through the lattice geometry; the
 * dataset and degree must match the lattice map. */
int bk_data_koopman_build(const bk_dataset* d, const int* degree, size_t m,
                          const bk_lattice* S, bk_koopman** out);

/* Prediction in original coordinates: pulls x0 back through the lattice map,
 * iterates, and pushes each state forward again. */
int bk_data_predict(const bk_koopman* k, const bk_lattice* S, const double* x0,
                    int steps, int relift, double* traj);

/* ---- least-squares baseline ---- */

/* truncation_tol <= 0 selects the default 1e-10; singular values below
 * tol * sigma_max are dropped from the pseudoinverse. */
int bk_edmd_build(const bk_dataset* d, const int* degree, size_t m,
                  double truncation_tol, bk_edmd** out);

int bk_edmd_rank(const bk_edmd* e);

int bk_edmd_predict(const bk_edmd* e, const double* x0, int steps, double* traj);

void bk_edmd_free(bk_edmd* e);

/* ---- certified error bounds ---- */

typedef struct bk_bound_result {
  double value;
  int clamped; /* 1 when a modulus was evaluated beyond its sampled range */
} bk_bound_result;

/* Estimates moduli of continuity and Lipschitz constants for the pair
 * (system, observable) on a resolution^dim grid; resolution 0 picks a
 * default. The context is reused across degrees. */
int bk_bounds_create(const bk_system* s, const bk_observable* f, int resolution,
                     bk_bounds** out);

/* Single-application bounds. tag: T1 | T2 (dim 1), T3 | T4 | T5 (any dim).
 * T2 and T5 need an observable with a gradient. constants_buf (may be NULL)
 * receives a "name=value;..." summary of the ingredients. */
int bk_bound_single(bk_bounds* ctx, const char* tag, const int* degree, size_t m,
                    bk_bound_result* out, char* constants_buf, size_t constants_len);

/* Iterated-operator bounds after k steps. tag: T6a (full modulus), T6b
 * (per-axis), T6c (gradient form); the matrices supply the intermediate
 * iterates. */
int bk_bound_iterated(bk_bounds* ctx, const char* tag, const bk_koopman* k_matrices,
                      int k, bk_bound_result* out, char* constants_buf,
                      size_t constants_len);

/* Geometric-sum alternative for k steps; conservative but matrix-free. */
int bk_bound_alternative(bk_bounds* ctx, const int* degree, size_t m, int k,
                         bk_bound_result* out, char* constants_buf,
                         size_t constants_len);

/* Propagation of a measurement perturbation of sup norm noise_sup. */
int bk_bound_noise(bk_bounds* ctx, double noise_sup, bk_bound_result* out,
                   char* constants_buf, size_t constants_len);

/* Bounds for the data-driven operator through lattice map S: full-modulus and
 * per-axis variants, using the composite Lipschitz constants. */
int bk_bound_data(bk_bounds* ctx, const bk_lattice* S, const int* degree, size_t m,
                  bk_bound_result* full_out, bk_bound_result* partial_out,
                  char* constants_buf, size_t constants_len);

/* Measured sup error of the degree-n approximation of the k-th operator
 * iterate over a dense probe grid. */
int bk_bounds_measured(bk_bounds* ctx, const int* degree, size_t m, int k,
                       double* err_out);

void bk_bounds_free(bk_bounds* ctx);

#ifdef __cplusplus
}
#endif

#endif /* BERNKOOP_BERNKOOP_H */
