// extern-C layer: opaque handles over the C++ core, error codes plus a
// thread-local message.
#include "fraclab.h"

#include <cstring>
#include <exception>
#include <string>

#include "fraclab/config.hpp"
#include "fraclab/experiments.hpp"
#include "fraclab/geometry.hpp"
#include "fraclab/measures.hpp"
#include "fraclab/runner.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const char* what) { g_last_error = what ? what : "unknown error"; }

template <typename Fn>
frl_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const fraclab::config::ConfigError& e) {
    set_error(e.what());
    return FRL_ERR_USAGE;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return FRL_ERR_INVALID;
  } catch (const std::exception& e) {
    set_error(e.what());
    return FRL_ERR_IO;
  }
}

}  // namespace

struct frl_config {
  fraclab::config::RunConfig cfg;
};

struct frl_measure {
  fraclab::measures::BoxMeasure m;
};

extern "C" {

const char* frl_version(void) { return fraclab::runner::kVersion; }

const char* frl_last_error(void) { return g_last_error.c_str(); }

frl_config* frl_config_create(void) { return new frl_config{}; }

frl_config* frl_config_load(const char* path) {
  if (!path) {
    set_error("null path");
    return nullptr;
  }
  try {
    return new frl_config{fraclab::config::RunConfig::load(path)};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

frl_status frl_config_set(frl_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) {
    set_error("null argument");
    return FRL_ERR_INVALID;
  }
  cfg->cfg.set(key, value);
  return FRL_OK;
}

frl_status frl_config_append(frl_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) {
    set_error("null argument");
    return FRL_ERR_INVALID;
  }
  cfg->cfg.append(key, value);
  return FRL_OK;
}

void frl_config_free(frl_config* cfg) { delete cfg; }

frl_status frl_run(const frl_config* cfg, const char* command, const char* out_dir) {
  if (!cfg || !command || !out_dir) {
    set_error("null argument");
    return FRL_ERR_INVALID;
  }
  const auto res = fraclab::runner::run_command(cfg->cfg, command, out_dir);
  if (res.exit_code != 0) set_error(res.message.c_str());
  switch (res.exit_code) {
    case 0: return FRL_OK;
    case 1: return FRL_ERR_TOLERANCE;
    case 2: return FRL_ERR_INFEASIBLE;
    case 64: return FRL_ERR_USAGE;
    default: return FRL_ERR_IO;
  }
}

frl_measure* frl_measure_load(const char* path) {
  if (!path) {
    set_error("null path");
    return nullptr;
  }
  try {
    return new frl_measure{fraclab::measures::load_text(path)};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

frl_measure* frl_measure_parse(const char* text) {
  if (!text) {
    set_error("null text");
    return nullptr;
  }
  try {
    return new frl_measure{fraclab::measures::from_text(text)};
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

frl_status frl_measure_save(const frl_measure* m, const char* path) {
  if (!m || !path) {
    set_error("null argument");
    return FRL_ERR_INVALID;
  }
  return guarded([&] {
    fraclab::measures::save_text(m->m, path);
    return FRL_OK;
  });
}

int frl_measure_dim(const frl_measure* m) { return m ? m->m.dim() : 0; }

double frl_measure_mass(const frl_measure* m) { return m ? m->m.total_mass() : 0.0; }

frl_status frl_measure_fourier(const frl_measure* m, const double* xi, double* out_re,
                               double* out_im) {
  if (!m || !xi || !out_re || !out_im) {
    set_error("null argument");
    return FRL_ERR_INVALID;
  }
  return guarded([&] {
    fraclab::Vec v(m->m.dim());
    for (int k = 0; k < m->m.dim(); ++k) v[k] = xi[k];
    const auto z = fraclab::measures::fourier_transform(m->m, v);
    *out_re = z.real();
    *out_im = z.imag();
    return FRL_OK;
  });
}

frl_status frl_measure_ball_mass(const frl_measure* m, const double* center, double r, double tol,
                                 double* out_mass) {
  if (!m || !center || !out_mass) {
    set_error("null argument");
    return FRL_ERR_INVALID;
  }
  return guarded([&] {
    fraclab::Vec x(m->m.dim());
    for (int k = 0; k < m->m.dim(); ++k) x[k] = center[k];
    *out_mass = fraclab::measures::ball_mass(m->m, x, r, tol);
    return FRL_OK;
  });
}

void frl_measure_free(frl_measure* m) { delete m; }

namespace {

void copy_frame(const fraclab::geometry::ProjectionFrame& f, int n, double* pi, double* lower,
                double* q, double* kernel) {
  if (pi)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n + 1; ++j) pi[i * (n + 1) + j] = f.pi(i, j);
  if (lower)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lower[i * n + j] = f.lower(i, j);
  if (q)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n + 1; ++j) q[i * (n + 1) + j] = f.q(i, j);
  if (kernel)
    for (int j = 0; j < n + 1; ++j) kernel[j] = f.kernel[j];
}

}  // namespace

frl_status frl_parabolic_frame(int n, const double* theta, double* pi, double* lower, double* q,
                               double* kernel) {
  if (n < 1 || n > 3 || !theta) {
    set_error("bad arguments");
    return FRL_ERR_INVALID;
  }
  return guarded([&] {
    fraclab::Vec t(n);
    for (int k = 0; k < n; ++k) t[k] = theta[k];
    copy_frame(fraclab::geometry::parabolic_frame(t), n, pi, lower, q, kernel);
    return FRL_OK;
  });
}

frl_status frl_cone_frame(int n, double lambda, const double* theta, double* pi, double* lower,
                          double* q, double* kernel) {
  if (n < 1 || n > 3 || (n > 1 && !theta)) {
    set_error("bad arguments");
    return FRL_ERR_INVALID;
  }
  return guarded([&] {
    fraclab::Vec t(n - 1);
    for (int k = 0; k < n - 1; ++k) t[k] = theta[k];
    copy_frame(fraclab::geometry::cone_frame(n, lambda, t), n, pi, lower, q, kernel);
    return FRL_OK;
  });
}

double frl_beta_to_s(double beta, int n) { return fraclab::experiments::beta_to_s(beta, n); }

double frl_s_to_beta(double s, int n) { return fraclab::experiments::s_to_beta(s, n); }

}  // extern "C"
