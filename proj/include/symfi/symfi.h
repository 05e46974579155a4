#ifndef SYMFI_H
#define SYMFI_H

/* C interface to the first-integral toolkit. All strings returned by these
 * functions are heap-allocated and must be released with symfi_string_free.
 * Functions returning pointers yield NULL on failure; functions returning
 * int yield a symfi_status. The failure message is kept per thread and can
 * be read with symfi_last_error. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SYMFI_ABI_VERSION 1

typedef enum symfi_status {
  SYMFI_OK = 0,
  SYMFI_ERR_PARSE = 1,
  SYMFI_ERR_EVAL = 2,
  SYMFI_ERR_IO = 3,
  SYMFI_ERR_BAD_ARG = 4,
  SYMFI_ERR_INTERNAL = 5
} symfi_status;

typedef struct symfi_catalog symfi_catalog; /* opaque handle */

typedef struct symfi_options {
  double tol_residual;  /* symbolic dI/dt residual bound */
  double tol_drift;     /* trajectory drift bound */
  double svd_tol;       /* relative rank cutoff */
  int samples;          /* residual/bracket sample count */
  int trajectories;     /* drift initial conditions per entry */
  double t_end;         /* drift integration horizon */
  double h;             /* RK4 step */
  unsigned long long seed;
  int with_drift;          /* 0 disables trajectory checks */
  int with_classification; /* 0 disables rank/involution classification */
} symfi_options;

int symfi_abi_version(void);
void symfi_options_init(symfi_options* opts);

const char* symfi_last_error(void);
void symfi_string_free(char* s);

/* Parse an expression under the module grammar with the given parameters
 * ("k1,k2,b") and return its canonical printed form. */
char* symfi_parse_canonical(const char* text, const char* params_csv);

/* Evaluate an expression at a binding "x=1,y=0.5,k=2+1i"; writes the value. */
int symfi_eval(const char* text, const char* params_csv,
               const char* binding_csv, double* re, double* im);

symfi_catalog* symfi_catalog_open(const char* path);
void symfi_catalog_close(symfi_catalog* c);
int symfi_catalog_size(const symfi_catalog* c);
char* symfi_catalog_ids(const symfi_catalog* c, const char* glob);

/* Verify all entries matching the glob; returns a JSON report. */
char* symfi_catalog_verify(const symfi_catalog* c, const char* glob,
                           const symfi_options* opts);

/* Nullspace discovery of autonomous quadratic first integrals; JSON. */
char* symfi_discover(const char* potential, const char* params_csv,
                     const symfi_options* opts);

/* Poisson-bracket evaluation, optionally against a claimed value; JSON.
 * The claimed expression may reference H when a potential is supplied. */
char* symfi_bracket(const char* expr_a, const char* expr_b,
                    const char* potential, const char* params_csv,
                    const char* claimed, const symfi_options* opts);

/* Integrate the equations of motion; returns trajectory CSV. */
char* symfi_integrate_csv(const char* potential, const char* params_csv,
                          const double q0[3], const double v0[3], double t_end,
                          double h);

/* Drift curve |I(t) - I(0)| of one catalog FI along a seeded trajectory;
 * CSV with columns t,drift. Pass "H" for the Hamiltonian. */
char* symfi_drift_curve_csv(const symfi_catalog* c, const char* entry_id,
                            const char* fi_id, double t_end, double h,
                            unsigned long long seed);

#ifdef __cplusplus
}
#endif

#endif /* SYMFI_H */
