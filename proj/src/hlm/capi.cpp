#include "hlm/hlm.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "hlm/energy.hpp"
#include "hlm/experiments.hpp"

struct hlm_config {
  hlm::ExperimentConfig config;
};

struct hlm_dataset {
  hlm::Dataset data;
};

namespace {

thread_local std::string last_error;

hlm_status status_of(hlm::ErrorKind kind) {
  switch (kind) {
    case hlm::ErrorKind::shape: return HLM_ERR_SHAPE;
    case hlm::ErrorKind::domain: return HLM_ERR_DOMAIN;
    case hlm::ErrorKind::capability: return HLM_ERR_CAPABILITY;
    case hlm::ErrorKind::degenerate: return HLM_ERR_DEGENERATE;
    case hlm::ErrorKind::budget: return HLM_ERR_BUDGET;
    case hlm::ErrorKind::config: return HLM_ERR_CONFIG;
    case hlm::ErrorKind::io: return HLM_ERR_IO;
    case hlm::ErrorKind::condition: return HLM_ERR_CONDITION;
    case hlm::ErrorKind::empty: return HLM_ERR_EMPTY;
  }
  return HLM_ERR_INTERNAL;
}

template <typename F>
hlm_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return HLM_OK;
  } catch (const hlm::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception& e) {
    last_error = std::string("invalid JSON: ") + e.what();
    return HLM_ERR_CONFIG;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HLM_ERR_INTERNAL;
  }
}

hlm_status bad_argument(const char* what) {
  last_error = what;
  return HLM_ERR_ARGUMENT;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

nlohmann::json fit_json(const hlm::OptResult& r, const hlm::ExperimentConfig& c,
                        const hlm::Dataset& data, double p, const std::string& method) {
  nlohmann::json j = hlm::to_json(r);
  j["method"] = method;
  j["p"] = p;
  j["N"] = data.points.rows();
  if (c.model) {
    j["recovery_distance"] = hlm::recovery_distance(r.tuple, c.model->truth).distance;
    j["energy_truth"] = hlm::energy_sum(data.points, c.model->truth, p);
  }
  return j;
}

void check_data_shape(const hlm::ExperimentConfig& c, const hlm::Dataset& data) {
  if (data.points.cols() != c.D) {
    hlm::fail(hlm::ErrorKind::shape, "dataset has dimension " + std::to_string(data.points.cols()) +
                                         ", config says D = " + std::to_string(c.D));
  }
}

}  // namespace

extern "C" {

const char* hlm_version(void) { return "1.0.0"; }

const char* hlm_last_error(void) { return last_error.c_str(); }

const char* hlm_status_name(hlm_status status) {
  switch (status) {
    case HLM_OK: return "ok";
    case HLM_ERR_SHAPE: return "shape";
    case HLM_ERR_DOMAIN: return "domain";
    case HLM_ERR_CAPABILITY: return "capability";
    case HLM_ERR_DEGENERATE: return "degenerate";
    case HLM_ERR_BUDGET: return "budget";
    case HLM_ERR_CONFIG: return "config";
    case HLM_ERR_IO: return "io";
    case HLM_ERR_CONDITION: return "condition";
    case HLM_ERR_EMPTY: return "empty";
    case HLM_ERR_ARGUMENT: return "argument";
    case HLM_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void hlm_string_free(char* s) { std::free(s); }

hlm_status hlm_config_parse(const char* json_text, hlm_config** out) {
  if (!json_text || !out) return bad_argument("null argument");
  return guarded([&] {
    const auto j = nlohmann::json::parse(json_text);
    auto* c = new hlm_config{hlm::config_from_json(j)};
    *out = c;
  });
}

hlm_status hlm_config_load(const char* path, hlm_config** out) {
  if (!path || !out) return bad_argument("null argument");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) hlm::fail(hlm::ErrorKind::io, std::string("cannot open config ") + path);
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::exception& e) {
      hlm::fail(hlm::ErrorKind::config, std::string(path) + ": invalid JSON: " + e.what());
    }
    *out = new hlm_config{hlm::config_from_json(j)};
  });
}

void hlm_config_free(hlm_config* config) { delete config; }

hlm_status hlm_config_set_seed(hlm_config* config, uint64_t seed) {
  if (!config) return bad_argument("null config");
  config->config.seed = seed;
  return HLM_OK;
}

hlm_status hlm_config_seed(const hlm_config* config, uint64_t* out) {
  if (!config || !out) return bad_argument("null argument");
  *out = config->config.seed;
  return HLM_OK;
}

hlm_status hlm_config_echo(const hlm_config* config, char** json_out) {
  if (!config || !json_out) return bad_argument("null argument");
  return guarded([&] { *json_out = dup(hlm::config_to_json(config->config).dump(2) + "\n"); });
}

hlm_status hlm_config_model_echo(const hlm_config* config, char** json_out) {
  if (!config || !json_out) return bad_argument("null argument");
  return guarded([&] {
    *json_out = dup(hlm::model_to_json(config->config.require_model()).dump(2) + "\n");
  });
}

hlm_status hlm_config_hash(const hlm_config* config, uint64_t* out) {
  if (!config || !out) return bad_argument("null argument");
  return guarded([&] { *out = hlm::config_hash(config->config); });
}

hlm_status hlm_config_data_path(const hlm_config* config, char** out) {
  if (!config || !out) return bad_argument("null argument");
  return guarded([&] { *out = config->config.data ? dup(*config->config.data) : nullptr; });
}

hlm_status hlm_sample(const hlm_config* config, uint64_t seed, hlm_dataset** out) {
  if (!config || !out) return bad_argument("null argument");
  return guarded([&] {
    const auto& c = config->config;
    *out = new hlm_dataset{hlm::sample(c.require_model(), c.n_values.front(), seed)};
  });
}

hlm_status hlm_dataset_from_points(const double* points, const int* labels, size_t n, size_t dim,
                                   hlm_dataset** out) {
  if (!points || !out || dim == 0) return bad_argument("null argument or zero dimension");
  return guarded([&] {
    if (n == 0) hlm::fail(hlm::ErrorKind::empty, "dataset has no points");
    auto* d = new hlm_dataset{};
    d->data.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    d->data.labels.assign(n, 0);
    for (size_t i = 0; i < n; ++i) {
      for (size_t k = 0; k < dim; ++k) {
        d->data.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = points[i * dim + k];
      }
      if (labels) d->data.labels[i] = labels[i];
    }
    *out = d;
  });
}

hlm_status hlm_dataset_load(const char* path, hlm_dataset** out) {
  if (!path || !out) return bad_argument("null argument");
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) hlm::fail(hlm::ErrorKind::io, std::string("cannot open dataset ") + path);
    char head[4] = {0, 0, 0, 0};
    in.read(head, 4);
    in.close();
    const bool binary = std::memcmp(head, "HLMD", 4) == 0;
    *out = new hlm_dataset{binary ? hlm::read_dataset_binary(path) : hlm::read_dataset_csv(path)};
  });
}

hlm_status hlm_dataset_save_csv(const hlm_dataset* data, const char* path) {
  if (!data || !path) return bad_argument("null argument");
  return guarded([&] { hlm::write_dataset_csv(data->data, path); });
}

hlm_status hlm_dataset_save_binary(const hlm_dataset* data, const char* path) {
  if (!data || !path) return bad_argument("null argument");
  return guarded([&] { hlm::write_dataset_binary(data->data, path); });
}

hlm_status hlm_dataset_shape(const hlm_dataset* data, size_t* n, size_t* dim) {
  if (!data) return bad_argument("null dataset");
  if (n) *n = static_cast<size_t>(data->data.points.rows());
  if (dim) *dim = static_cast<size_t>(data->data.points.cols());
  return HLM_OK;
}

hlm_status hlm_dataset_points(const hlm_dataset* data, double* out) {
  if (!data || !out) return bad_argument("null argument");
  const auto& p = data->data.points;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index k = 0; k < p.cols(); ++k) out[i * p.cols() + k] = p(i, k);
  }
  return HLM_OK;
}

hlm_status hlm_dataset_labels(const hlm_dataset* data, int* out) {
  if (!data || !out) return bad_argument("null argument");
  std::copy(data->data.labels.begin(), data->data.labels.end(), out);
  return HLM_OK;
}

void hlm_dataset_free(hlm_dataset* data) { delete data; }

hlm_status hlm_truth_energy(const hlm_config* config, const hlm_dataset* data, double p, double* out) {
  if (!config || !data || !out) return bad_argument("null argument");
  return guarded([&] {
    check_data_shape(config->config, data->data);
    *out = hlm::energy_sum(data->data.points, config->config.require_model().truth, p);
  });
}

hlm_status hlm_fit(const hlm_config* config, const hlm_dataset* data, uint64_t seed, int workers,
                   char** json_out) {
  if (!config || !data || !json_out) return bad_argument("null argument");
  return guarded([&] {
    const auto& c = config->config;
    check_data_shape(c, data->data);
    const double p = c.p_values.front();
    hlm::KFlatsOptions opts;
    opts.max_iter = c.max_iter;
    opts.tol = c.tol;
    opts.seed = seed;
    const hlm::OptResult r = hlm::multi_restart(data->data.points, static_cast<std::size_t>(c.K), c.d, p,
                                                c.restarts, seed, {}, opts, hlm::resolve_workers(workers));
    *json_out = dup(fit_json(r, c, data->data, p, "multi-restart").dump(2) + "\n");
  });
}

hlm_status hlm_oracle(const hlm_config* config, const hlm_dataset* data, int workers, char** json_out) {
  if (!config || !data || !json_out) return bad_argument("null argument");
  return guarded([&] {
    const auto& c = config->config;
    if (c.D != 2 || c.d != 1 || c.K > 2) {
      hlm::fail(hlm::ErrorKind::capability, "grid oracle supports D = 2, d = 1, K <= 2 only (config has D = " +
                                                std::to_string(c.D) + ", d = " + std::to_string(c.d) +
                                                ", K = " + std::to_string(c.K) + ")");
    }
    check_data_shape(c, data->data);
    const double p = c.p_values.front();
    const hlm::OptResult r = hlm::grid_search_global(data->data.points, static_cast<std::size_t>(c.K), p, c.grid,
                                                     hlm::resolve_workers(workers));
    nlohmann::json j = fit_json(r, c, data->data, p, "grid-oracle");
    j["grid_step_deg"] = c.grid.coarse_step() * 180.0 / 3.14159265358979323846;
    j["final_resolution_rad"] = c.grid.final_resolution();
    *json_out = dup(j.dump(2) + "\n");
  });
}

hlm_status hlm_bounds(const hlm_config* config, char** json_out) {
  if (!config || !json_out) return bad_argument("null argument");
  return guarded([&] { *json_out = dup(hlm::bounds_report(config->config).dump(2) + "\n"); });
}

hlm_status hlm_sweep(const hlm_config* config, int workers, char** csv_out, char** jsonl_out,
                     char** summary_out, char** heatmap_svg_out, char** distance_svg_out) {
  if (!config) return bad_argument("null config");
  return guarded([&] {
    const hlm::SweepResult r = hlm::phase_transition_sweep(config->config, hlm::resolve_workers(workers));
    put(csv_out, hlm::results_csv(r.rows));
    put(jsonl_out, hlm::results_jsonl(r.rows));
    put(summary_out, hlm::summary_json(r).dump(2) + "\n");
    put(heatmap_svg_out, hlm::svg_heatmap(r));
    put(distance_svg_out, hlm::svg_distance_plot(r));
  });
}

hlm_status hlm_verify(uint64_t seed, int* all_passed, char** json_out) {
  if (!all_passed) return bad_argument("null argument");
  return guarded([&] {
    const hlm::PropertyReport report = hlm::property_suite(seed);
    *all_passed = report.all_passed() ? 1 : 0;
    put(json_out, report.to_json().dump(2) + "\n");
  });
}

}  // extern "C"
