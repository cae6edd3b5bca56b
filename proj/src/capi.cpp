#include "fountain/fountain.h"

#include <cstring>
#include <iostream>
#include <memory>
#include <new>
#include <streambuf>
#include <string>

#include "fountain/error.hpp"
#include "fountain/runner.hpp"

struct fountain_config {
  fountain::RunConfig config;
};

struct fountain_model {
  fountain::RunConfig config;
  fountain::BuiltModel built;
};

namespace {

thread_local std::string last_error;

int fail(int status, const std::string &what) {
  last_error = what;
  return status;
}

/// Maps the active exception to a status; must be called inside a catch.
int from_exception() {
  try {
    throw;
  } catch (const fountain::Error &e) {
    return fail(static_cast<int>(e.code()), e.what());
  } catch (const std::bad_alloc &) {
    return fail(FOUNTAIN_E_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(FOUNTAIN_E_INTERNAL, e.what());
  } catch (...) {
    return fail(FOUNTAIN_E_INTERNAL, "unknown exception");
  }
}

template <class Fn> int guarded(Fn &&fn) {
  try {
    fn();
    return FOUNTAIN_OK;
  } catch (...) {
    return from_exception();
  }
}

/// Forwards complete lines to a C callback.
class LineBuffer : public std::streambuf {
public:
  LineBuffer(fountain_log_fn fn, void *user) : fn_(fn), user_(user) {}
  ~LineBuffer() override {
    if (!line_.empty())
      fn_(line_.c_str(), user_);
  }

protected:
  int_type overflow(int_type ch) override {
    if (ch == traits_type::eof())
      return traits_type::not_eof(ch);
    if (ch == '\n') {
      fn_(line_.c_str(), user_);
      line_.clear();
    } else {
      line_.push_back(static_cast<char>(ch));
    }
    return ch;
  }

private:
  fountain_log_fn fn_;
  void *user_;
  std::string line_;
};

} // namespace

extern "C" {

const char *fountain_version(void) { return "1.0.0"; }

const char *fountain_status_name(int status) {
  switch (status) {
  case FOUNTAIN_OK: return "ok";
  case FOUNTAIN_E_INVALID_ARGUMENT: return "invalid_argument";
  case FOUNTAIN_E_UNSUPPORTED_DOMAIN: return "unsupported_domain";
  case FOUNTAIN_E_BASIS_MISMATCH: return "basis_mismatch";
  case FOUNTAIN_E_SIZE_MISMATCH: return "size_mismatch";
  case FOUNTAIN_E_EMPTY_TAIL: return "empty_tail";
  case FOUNTAIN_E_OUT_OF_RANGE: return "out_of_range";
  case FOUNTAIN_E_ASSUMPTION: return "assumption_violated";
  case FOUNTAIN_E_BRACKETING: return "bracketing";
  case FOUNTAIN_E_SIZE_CAP: return "size_cap";
  case FOUNTAIN_E_NON_FINITE: return "non_finite";
  case FOUNTAIN_E_CONFIG: return "config";
  case FOUNTAIN_E_IO: return "io";
  case FOUNTAIN_E_NULL: return "null_pointer";
  case FOUNTAIN_E_INTERNAL: return "internal";
  default: return "unknown";
  }
}

const char *fountain_last_error(void) { return last_error.c_str(); }

int fountain_config_load(const char *path, fountain_config **out) {
  if (!path || !out)
    return fail(FOUNTAIN_E_NULL, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new fountain_config{fountain::load_config(path)}; });
}

int fountain_config_parse(const char *text, fountain_config **out) {
  if (!text || !out)
    return fail(FOUNTAIN_E_NULL, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new fountain_config{fountain::parse_config(text)}; });
}

void fountain_config_free(fountain_config *config) { delete config; }

int fountain_config_set_seed(fountain_config *config, uint64_t seed) {
  if (!config)
    return fail(FOUNTAIN_E_NULL, "null configuration");
  config->config.seed = seed;
  config->config.flow.seed = seed;
  config->config.geometry.seed = seed;
  return FOUNTAIN_OK;
}

int fountain_config_set_output(fountain_config *config, const char *dir) {
  if (!config || !dir)
    return fail(FOUNTAIN_E_NULL, "null argument");
  if (!*dir)
    return fail(FOUNTAIN_E_INVALID_ARGUMENT, "output directory is empty");
  config->config.output = dir;
  return FOUNTAIN_OK;
}

int fountain_config_set_jobs(fountain_config *config, int jobs) {
  if (!config)
    return fail(FOUNTAIN_E_NULL, "null configuration");
  if (jobs < 1)
    return fail(FOUNTAIN_E_INVALID_ARGUMENT, "jobs must be at least 1");
  config->config.jobs = jobs;
  return FOUNTAIN_OK;
}

int fountain_config_set_mirror(fountain_config *config, int mirror) {
  if (!config)
    return fail(FOUNTAIN_E_NULL, "null configuration");
  config->config.mirror = mirror != 0;
  return FOUNTAIN_OK;
}

int fountain_config_set_sign_error(fountain_config *config, int inject) {
  if (!config)
    return fail(FOUNTAIN_E_NULL, "null configuration");
  config->config.inject_sign_error = inject != 0;
  return FOUNTAIN_OK;
}

int fountain_config_set_k_list(fountain_config *config, const int *ks, size_t count) {
  if (!config || (!ks && count > 0))
    return fail(FOUNTAIN_E_NULL, "null argument");
  if (count == 0)
    return fail(FOUNTAIN_E_INVALID_ARGUMENT, "the k list is empty");
  config->config.k_list.assign(ks, ks + count);
  return FOUNTAIN_OK;
}

int fountain_config_to_json(const fountain_config *config, char *buf, size_t size,
                            size_t *needed) {
  if (!config || (!buf && size > 0))
    return fail(FOUNTAIN_E_NULL, "null argument");
  return guarded([&] {
    const std::string text = fountain::config_to_json(config->config).dump();
    if (needed)
      *needed = text.size() + 1;
    if (size == 0)
      return;
    if (size < text.size() + 1)
      throw fountain::Error(fountain::ErrorCode::SizeMismatch, "buffer too small");
    std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

int fountain_run(const char *command, const fountain_config *config, fountain_log_fn log,
                 void *user, int *exit_code) {
  if (!command || !config || !exit_code)
    return fail(FOUNTAIN_E_NULL, "null argument");
  return guarded([&] {
    if (!log) {
      *exit_code = fountain::run_command(command, config->config, std::cout);
      std::cout.flush();
      return;
    }
    LineBuffer buffer(log, user);
    std::ostream os(&buffer);
    *exit_code = fountain::run_command(command, config->config, os);
  });
}

int fountain_model_create(const fountain_config *config, fountain_model **out) {
  if (!config || !out)
    return fail(FOUNTAIN_E_NULL, "null argument");
  *out = nullptr;
  return guarded([&] {
    fountain::validate_config(config->config);
    auto m = std::make_unique<fountain_model>();
    m->config = config->config;
    m->built = fountain::build_model(m->config);
    *out = m.release();
  });
}

void fountain_model_free(fountain_model *model) { delete model; }

int fountain_model_dimension(const fountain_model *model, size_t *out) {
  if (!model || !out)
    return fail(FOUNTAIN_E_NULL, "null argument");
  *out = static_cast<size_t>(model->built.model->dimension());
  return FOUNTAIN_OK;
}

namespace {

int check_coords(const fountain_model *model, const double *coords, size_t n) {
  if (!model || !coords)
    return fail(FOUNTAIN_E_NULL, "null argument");
  if (n != static_cast<size_t>(model->built.model->dimension()))
    return fail(FOUNTAIN_E_SIZE_MISMATCH, "coordinate vector has the wrong length");
  return FOUNTAIN_OK;
}

} // namespace

int fountain_model_phi(const fountain_model *model, const double *coords, size_t n,
                       double *phi) {
  if (const int st = check_coords(model, coords, n))
    return st;
  if (!phi)
    return fail(FOUNTAIN_E_NULL, "null output");
  return guarded([&] {
    *phi = model->built.model->phi(Eigen::Map<const Eigen::VectorXd>(coords, n));
  });
}

int fountain_model_grad(const fountain_model *model, const double *coords, size_t n,
                        double *grad) {
  if (const int st = check_coords(model, coords, n))
    return st;
  if (!grad)
    return fail(FOUNTAIN_E_NULL, "null output");
  return guarded([&] {
    Eigen::Map<Eigen::VectorXd>(grad, n) =
        model->built.model->grad(Eigen::Map<const Eigen::VectorXd>(coords, n));
  });
}

int fountain_model_solve(const fountain_model *model, int k, double *level, double *cerami,
                         int *converged, double *coords, size_t n) {
  if (!model || !level)
    return fail(FOUNTAIN_E_NULL, "null argument");
  if (coords && n != static_cast<size_t>(model->built.model->dimension()))
    return fail(FOUNTAIN_E_SIZE_MISMATCH, "coordinate buffer has the wrong length");
  if (k < 0 || k >= model->built.split->plus_count())
    return fail(FOUNTAIN_E_OUT_OF_RANGE, "k is outside the plus directions");
  return guarded([&] {
    fountain::FlowConfig flow = model->config.flow;
    flow.seed = model->config.seed;
    fountain::SolveOptions opt;
    opt.mirror = model->config.mirror;
    const fountain::SolveReport rep = fountain::saddle_solve(*model->built.model, k, flow, opt);
    *level = rep.level;
    if (cerami)
      *cerami = rep.cerami;
    if (converged)
      *converged = rep.status == fountain::SolveStatus::Converged;
    if (coords)
      Eigen::Map<Eigen::VectorXd>(coords, n) = rep.coords;
  });
}

int fountain_solution_levels(const char *path, double *stored, double *recomputed) {
  if (!path || !stored || !recomputed)
    return fail(FOUNTAIN_E_NULL, "null argument");
  return guarded([&] {
    const fountain::SolutionFile file = fountain::read_solution(path);
    *stored = file.level;
    *recomputed = fountain::reevaluate_level(file);
  });
}

} // extern "C"
