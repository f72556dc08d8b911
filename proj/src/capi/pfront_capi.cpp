#include "pfront/pfront.h"

#include <exception>
#include <new>
#include <string>

#include "driver.hpp"
#include "fronts.hpp"

struct pf_config {
  pfront::ExperimentConfig cfg;
  std::string hash;
};

struct pf_result {
  pfront::RunResult res;
};

struct pf_front {
  pfront::FrontSolution front;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_key;

pf_status fail(pf_status s, const std::string& msg, const std::string& key = "") {
  g_error = msg;
  g_error_key = key;
  return s;
}

pf_status ok() {
  g_error.clear();
  g_error_key.clear();
  return PF_OK;
}

// Maps the active exception onto a status code.
pf_status translate() {
  try {
    throw;
  } catch (const pfront::ConfigError& e) {
    return fail(PF_ERR_CONFIG, e.what(), e.key());
  } catch (const pfront::PreconditionError& e) {
    return fail(PF_ERR_PRECONDITION, e.what());
  } catch (const pfront::NumericalError& e) {
    return fail(PF_ERR_NUMERICAL, e.what());
  } catch (const pfront::Error& e) {
    return fail(PF_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PF_ERR_INTERNAL, "unknown exception");
  }
}

pf_status from_kind(const std::string& kind) {
  if (kind.empty()) return PF_OK;
  if (kind == "config") return PF_ERR_CONFIG;
  if (kind == "precondition") return PF_ERR_PRECONDITION;
  if (kind == "numerical") return PF_ERR_NUMERICAL;
  if (kind == "io") return PF_ERR_IO;
  return PF_ERR_INTERNAL;
}

const std::string& help_text() {
  static const std::string h = pfront::config_help();
  return h;
}

}  // namespace

extern "C" {

const char* pf_version(void) { return "1.0.0"; }

const char* pf_status_string(pf_status s) {
  switch (s) {
    case PF_OK: return "ok";
    case PF_ERR_CONFIG: return "configuration error";
    case PF_ERR_PRECONDITION: return "precondition violated";
    case PF_ERR_NUMERICAL: return "numerical failure";
    case PF_ERR_IO: return "I/O error";
    case PF_ERR_INVALID_ARG: return "invalid argument";
    case PF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* pf_last_error(void) { return g_error.c_str(); }
const char* pf_last_error_key(void) { return g_error_key.c_str(); }

const char* pf_config_help(void) { return help_text().c_str(); }

size_t pf_scenario_count(void) { return pfront::scenario_names().size(); }

const char* pf_scenario_name(size_t i) {
  const auto& n = pfront::scenario_names();
  return i < n.size() ? n[i].c_str() : nullptr;
}

pf_status pf_config_parse(const char* ini_text, const char* scenario, pf_config** out) {
  if (!ini_text || !out) return fail(PF_ERR_INVALID_ARG, "null argument");
  *out = nullptr;
  try {
    auto* c = new pf_config{pfront::parse_config(ini_text, scenario ? scenario : ""), ""};
    c->hash = c->cfg.hash_hex();
    *out = c;
    return ok();
  } catch (...) {
    return translate();
  }
}

pf_status pf_config_load(const char* path, const char* scenario, pf_config** out) {
  if (!path || !out) return fail(PF_ERR_INVALID_ARG, "null argument");
  *out = nullptr;
  try {
    auto* c = new pf_config{pfront::load_config(path, scenario ? scenario : ""), ""};
    c->hash = c->cfg.hash_hex();
    *out = c;
    return ok();
  } catch (...) {
    return translate();
  }
}

void pf_config_free(pf_config* cfg) { delete cfg; }

pf_status pf_config_set(pf_config* cfg, const char* section, const char* key, const char* value) {
  if (!cfg || !section || !key || !value) return fail(PF_ERR_INVALID_ARG, "null argument");
  try {
    cfg->cfg.set(section, key, value);
    cfg->hash = cfg->cfg.hash_hex();
    return ok();
  } catch (...) {
    return translate();
  }
}

const char* pf_config_get(const pf_config* cfg, const char* section, const char* key) {
  if (!cfg || !section || !key) return nullptr;
  try {
    return cfg->cfg.get(section, key).c_str();
  } catch (...) {
    translate();
    return nullptr;
  }
}

const char* pf_config_scenario(const pf_config* cfg) { return cfg ? cfg->cfg.scenario.c_str() : nullptr; }
const char* pf_config_hash(const pf_config* cfg) { return cfg ? cfg->hash.c_str() : nullptr; }

pf_status pf_run(const pf_config* cfg, const char* out_dir, pf_result** out) {
  if (!cfg || !out_dir || !out) return fail(PF_ERR_INVALID_ARG, "null argument");
  *out = nullptr;
  try {
    auto* r = new pf_result{pfront::run_scenario(cfg->cfg, out_dir)};
    *out = r;
    const pf_status s = from_kind(r->res.error_kind);
    if (s == PF_OK) return ok();
    std::string key;
    if (s == PF_ERR_CONFIG) key = r->res.error.substr(0, r->res.error.find(':'));
    return fail(s, r->res.error, key);
  } catch (...) {
    return translate();
  }
}

void pf_result_free(pf_result* r) { delete r; }
int pf_result_exit_code(const pf_result* r) { return r ? r->res.exit_code : 2; }
size_t pf_result_summary_count(const pf_result* r) { return r ? r->res.summary.size() : 0; }

const char* pf_result_summary_line(const pf_result* r, size_t i) {
  return r && i < r->res.summary.size() ? r->res.summary[i].c_str() : nullptr;
}

size_t pf_result_artifact_count(const pf_result* r) { return r ? r->res.artifacts.size() : 0; }

const char* pf_result_artifact(const pf_result* r, size_t i) {
  return r && i < r->res.artifacts.size() ? r->res.artifacts[i].c_str() : nullptr;
}

const char* pf_result_error(const pf_result* r) { return r ? r->res.error.c_str() : nullptr; }

pf_status pf_front_compute(const pf_config* cfg, pf_front** out) {
  if (!cfg || !out) return fail(PF_ERR_INVALID_ARG, "null argument");
  *out = nullptr;
  try {
    const pfront::ProblemInstance inst = pfront::build_instance(cfg->cfg);
    *out = new pf_front{pfront::compute_pulsating_front(inst, pfront::build_front_config(cfg->cfg))};
    return ok();
  } catch (...) {
    return translate();
  }
}

void pf_front_free(pf_front* f) { delete f; }

pf_front_status pf_front_get_status(const pf_front* f) {
  if (!f) return PF_FRONT_INCONCLUSIVE;
  switch (f->front.status) {
    case pfront::FrontStatus::Propagating: return PF_FRONT_PROPAGATING;
    case pfront::FrontStatus::Stationary: return PF_FRONT_STATIONARY;
    default: return PF_FRONT_INCONCLUSIVE;
  }
}

double pf_front_speed(const pf_front* f) { return f ? f->front.speed : 0.0; }
double pf_front_speed_uncertainty(const pf_front* f) { return f ? f->front.estimate.uncertainty : 0.0; }
double pf_front_period(const pf_front* f) { return f ? f->front.period : 0.0; }
double pf_front_pulsating_defect(const pf_front* f) { return f ? f->front.pulsating_error : 0.0; }

void pf_front_lattice_size(const pf_front* f, size_t* n_xi, size_t* n_y) {
  if (n_xi) *n_xi = f ? f->front.xi.size() : 0;
  if (n_y) *n_y = f ? size_t(f->front.ny) : 0;
}

pf_status pf_front_value(const pf_front* f, double xi, double y, double* value) {
  if (!f || !value) return fail(PF_ERR_INVALID_ARG, "null argument");
  if (f->front.xi.size() < 2) return fail(PF_ERR_PRECONDITION, "front has no profile lattice");
  *value = f->front(xi, y);
  return ok();
}

pf_status pf_front_lattice(const pf_front* f, double* xi, double* phi, size_t n_xi, size_t n_y) {
  if (!f || !xi || !phi) return fail(PF_ERR_INVALID_ARG, "null argument");
  if (n_xi != f->front.xi.size() || n_y != size_t(f->front.ny))
    return fail(PF_ERR_INVALID_ARG, "lattice size mismatch");
  for (size_t j = 0; j < n_xi; ++j) xi[j] = f->front.xi[j];
  for (size_t k = 0; k < n_xi * n_y; ++k) phi[k] = f->front.phi[k];
  return ok();
}

}  // extern "C"
