/* fraclab — C API for the fractal-measure maximal-inequality laboratory.
 *
 * The library evaluates dispersive evolutions of band-limited atom data,
 * closed-form Fourier transforms of box measures, projection frames, energy
 * integrals, and the batch experiment commands that persist JSON/CSV reports.
 *
 * All objects are opaque handles; every fallible call returns frl_status and
 * leaves a human-readable message in frl_last_error() on failure.
 */
#ifndef FRACLAB_H
#define FRACLAB_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define FRL_API __declspec(dllexport)
#else
#define FRL_API __attribute__((visibility("default")))
#endif

typedef enum frl_status {
  FRL_OK = 0,
  FRL_ERR_TOLERANCE = 1,  /* a check ran but missed its tolerance */
  FRL_ERR_INFEASIBLE = 2, /* parameters outside the feasible range */
  FRL_ERR_INVALID = 3,    /* bad argument or precondition violation */
  FRL_ERR_IO = 4,         /* file could not be read or written */
  FRL_ERR_USAGE = 64      /* malformed configuration */
} frl_status;

typedef struct frl_config frl_config;
typedef struct frl_measure frl_measure;

FRL_API const char* frl_version(void);

/* Message describing the most recent failure on this thread. */
FRL_API const char* frl_last_error(void);

/* --- run configuration (flat `key = value`; repeated keys form lists) --- */

FRL_API frl_config* frl_config_create(void);
FRL_API frl_config* frl_config_load(const char* path);

/* Replaces all previous values of `key`. */
FRL_API frl_status frl_config_set(frl_config* cfg, const char* key, const char* value);

/* Appends one more value (list-forming). */
FRL_API frl_status frl_config_append(frl_config* cfg, const char* key, const char* value);

FRL_API void frl_config_free(frl_config* cfg);

/* Runs one experiment command — identities | bourgain | decay | project |
 * pipeline — writing its JSON/CSV reports under out_dir. The return value
 * mirrors the CLI exit code contract: FRL_OK, FRL_ERR_TOLERANCE,
 * FRL_ERR_INFEASIBLE, or FRL_ERR_USAGE. */
FRL_API frl_status frl_run(const frl_config* cfg, const char* command, const char* out_dir);

/* --- box measures --- */

FRL_API frl_measure* frl_measure_load(const char* path);
FRL_API frl_measure* frl_measure_parse(const char* text);
FRL_API frl_status frl_measure_save(const frl_measure* m, const char* path);
FRL_API int frl_measure_dim(const frl_measure* m);
FRL_API double frl_measure_mass(const frl_measure* m);

/* Closed-form transform at xi (array of length dim). */
FRL_API frl_status frl_measure_fourier(const frl_measure* m, const double* xi, double* out_re,
                                       double* out_im);

/* Ball mass within relative tolerance tol. */
FRL_API frl_status frl_measure_ball_mass(const frl_measure* m, const double* center, double r,
                                         double tol, double* out_mass);

FRL_API void frl_measure_free(frl_measure* m);

/* --- projection frames ---
 * Buffers: pi n*(n+1), lower n*n, q n*(n+1), kernel n+1 (row-major); any of
 * them may be NULL when not needed. theta has length n for the parabolic
 * frame and n-1 for the cone frame. */
FRL_API frl_status frl_parabolic_frame(int n, const double* theta, double* pi, double* lower,
                                       double* q, double* kernel);
FRL_API frl_status frl_cone_frame(int n, double lambda, const double* theta, double* pi,
                                  double* lower, double* q, double* kernel);

/* --- exponent conversions --- */
FRL_API double frl_beta_to_s(double beta, int n);
FRL_API double frl_s_to_beta(double s, int n);

#ifdef __cplusplus
}
#endif

#endif /* FRACLAB_H */
