// hlmrec: command-line front end of libhlm.
//
//   hlmrec sample --config model.json --out run/
//   hlmrec sweep  --config sweep.json --out run/ --workers 4 --format jsonl
//   hlmrec verify --out run/
//
// Exit codes: 0 success, 1 the command's claim failed (verify), 2 usage,
// config or capability error.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hlm/hlm.h"

namespace {

constexpr int kExitClaimFailed = 1;
constexpr int kExitUsage = 2;

struct Failure {
  int code;
};

struct Options {
  std::string command;
  std::string config;
  std::uint64_t seed = HLM_DEFAULT_SEED;
  bool seed_given = false;
  std::string out = ".";
  int workers = 1;
  std::string format = "csv";
  std::string data;
  bool binary = false;
};

struct ConfigDeleter {
  void operator()(hlm_config* c) const { hlm_config_free(c); }
};
struct DatasetDeleter {
  void operator()(hlm_dataset* d) const { hlm_dataset_free(d); }
};
using ConfigPtr = std::unique_ptr<hlm_config, ConfigDeleter>;
using DatasetPtr = std::unique_ptr<hlm_dataset, DatasetDeleter>;

void check(hlm_status status) {
  if (status == HLM_OK) return;
  std::fprintf(stderr, "hlmrec: %s error: %s\n", hlm_status_name(status), hlm_last_error());
  throw Failure{kExitUsage};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  hlm_string_free(s);
  return out;
}

class Output {
 public:
  explicit Output(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) {
      std::fprintf(stderr, "hlmrec: cannot create %s: %s\n", dir_.c_str(), ec.message().c_str());
      throw Failure{kExitUsage};
    }
  }

  std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(path(name), std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) {
      std::fprintf(stderr, "hlmrec: cannot write %s\n", path(name).c_str());
      throw Failure{kExitUsage};
    }
    files_.push_back(name);
  }

  void record(const std::string& name) { files_.push_back(name); }

  void manifest(const std::string& command, std::uint64_t seed, const hlm_config* config) {
    nlohmann::json m;
    m["command"] = command;
    m["seed"] = seed;
    if (config) {
      std::uint64_t hash = 0;
      check(hlm_config_hash(config, &hash));
      char buf[20];
      std::snprintf(buf, sizeof buf, "%016" PRIx64, hash);
      m["config_hash"] = buf;
    }
    m["files"] = files_;
    m["version"] = hlm_version();
    write("manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

ConfigPtr load_config(const Options& opt) {
  if (opt.config.empty()) {
    std::fprintf(stderr, "hlmrec: %s needs --config PATH\n", opt.command.c_str());
    throw Failure{kExitUsage};
  }
  hlm_config* raw = nullptr;
  check(hlm_config_load(opt.config.c_str(), &raw));
  ConfigPtr c(raw);
  if (opt.seed_given) check(hlm_config_set_seed(c.get(), opt.seed));
  return c;
}

std::uint64_t seed_of(const hlm_config* c) {
  std::uint64_t s = 0;
  check(hlm_config_seed(c, &s));
  return s;
}

// Dataset from --data, the config's `data` key, or a fresh sample.
DatasetPtr input_data(const Options& opt, const hlm_config* c, std::uint64_t seed) {
  std::string path = opt.data;
  if (path.empty()) {
    char* from_config = nullptr;
    check(hlm_config_data_path(c, &from_config));
    path = take(from_config);
  }
  hlm_dataset* raw = nullptr;
  if (!path.empty()) {
    check(hlm_dataset_load(path.c_str(), &raw));
  } else {
    check(hlm_sample(c, seed, &raw));
  }
  return DatasetPtr(raw);
}

void write_config_echo(Output& out, const hlm_config* c) {
  char* echo = nullptr;
  check(hlm_config_echo(c, &echo));
  out.write("config.json", take(echo));
}

int cmd_sample(const Options& opt) {
  ConfigPtr c = load_config(opt);
  const std::uint64_t seed = seed_of(c.get());
  Output out(opt.out);
  hlm_dataset* raw = nullptr;
  check(hlm_sample(c.get(), seed, &raw));
  DatasetPtr data(raw);
  check(hlm_dataset_save_csv(data.get(), out.path("dataset.csv").c_str()));
  out.record("dataset.csv");
  if (opt.binary) {
    check(hlm_dataset_save_binary(data.get(), out.path("dataset.bin").c_str()));
    out.record("dataset.bin");
  }
  char* model = nullptr;
  check(hlm_config_model_echo(c.get(), &model));
  out.write("model.json", take(model));
  write_config_echo(out, c.get());
  out.manifest("sample", seed, c.get());
  std::size_t n = 0;
  std::size_t dim = 0;
  check(hlm_dataset_shape(data.get(), &n, &dim));
  std::printf("sampled %zu points in R^%zu -> %s\n", n, dim, out.path("dataset.csv").c_str());
  return 0;
}

int cmd_fit(const Options& opt, bool oracle) {
  ConfigPtr c = load_config(opt);
  const std::uint64_t seed = seed_of(c.get());
  Output out(opt.out);
  DatasetPtr data = input_data(opt, c.get(), seed);
  char* result = nullptr;
  if (oracle) {
    check(hlm_oracle(c.get(), data.get(), opt.workers, &result));
  } else {
    check(hlm_fit(c.get(), data.get(), seed, opt.workers, &result));
  }
  const std::string text = take(result);
  const std::string name = oracle ? "oracle.json" : "fit.json";
  out.write(name, text);
  write_config_echo(out, c.get());
  out.manifest(oracle ? "oracle" : "fit", seed, c.get());
  const auto j = nlohmann::json::parse(text);
  std::printf("energy %.10g", j.at("energy").get<double>());
  if (j.contains("recovery_distance")) std::printf(", recovery distance %.6g rad", j.at("recovery_distance").get<double>());
  std::printf(" -> %s\n", out.path(name).c_str());
  return 0;
}

int cmd_bounds(const Options& opt) {
  ConfigPtr c = load_config(opt);
  const std::uint64_t seed = seed_of(c.get());
  Output out(opt.out);
  char* report = nullptr;
  check(hlm_bounds(c.get(), &report));
  const std::string text = take(report);
  out.write("bounds.json", text);
  write_config_echo(out, c.get());
  out.manifest("bounds", seed, c.get());
  const auto j = nlohmann::json::parse(text);
  for (const auto& e : j.at("per_p")) {
    std::printf("p = %g\n", e.at("p").get<double>());
    if (e.contains("tau0") && e.at("tau0").is_number()) std::printf("  tau0 = %.10g\n", e.at("tau0").get<double>());
    if (e.contains("tau0_lower_bound")) {
      std::printf("  closed-form lower bound = %.10g%s\n", e.at("tau0_lower_bound").get<double>(),
                  e.at("lower_bound_exceeds_tau0").get<bool>() ? "  (exceeds tau0: flagged)" : "");
    }
    if (e.contains("condition")) {
      const auto& cond = e.at("condition");
      std::printf("  alpha0 = %.10g vs bound %.10g: %s\n", cond.at("lhs").get<double>(),
                  cond.at("rhs").get<double>(), cond.at("holds").get<bool>() ? "holds" : "violated");
    }
    if (e.contains("noise") && e.at("noise").at("available").get<bool>()) {
      const auto& nb = e.at("noise");
      std::printf("  eps_max = %.6g, f = %.6g\n", nb.at("eps_max").get<double>(), nb.at("f").get<double>());
      if (nb.at("eps_ceiling").is_number()) std::printf("  eps_ceiling = %.6g\n", nb.at("eps_ceiling").get<double>());
    }
    if (e.contains("delta_kappa")) {
      std::printf("  delta/kappa lower bound = %.6g\n", e.at("delta_kappa").at("bound_general").get<double>());
    }
  }
  return 0;
}

int cmd_sweep(const Options& opt) {
  ConfigPtr c = load_config(opt);
  const std::uint64_t seed = seed_of(c.get());
  Output out(opt.out);
  char* csv = nullptr;
  char* jsonl = nullptr;
  char* summary = nullptr;
  char* heat = nullptr;
  char* dist = nullptr;
  const bool as_csv = opt.format == "csv";
  check(hlm_sweep(c.get(), opt.workers, as_csv ? &csv : nullptr, as_csv ? nullptr : &jsonl, &summary, &heat, &dist));
  if (as_csv) {
    out.write("results.csv", take(csv));
  } else {
    out.write("results.jsonl", take(jsonl));
  }
  const std::string summary_text = take(summary);
  out.write("summary.json", summary_text);
  out.write("heatmap.svg", take(heat));
  out.write("distance.svg", take(dist));
  write_config_echo(out, c.get());
  out.manifest("sweep", seed, c.get());
  const auto j = nlohmann::json::parse(summary_text);
  for (const auto& cell : j.at("cells")) {
    std::printf("p=%g alpha0=%g eps=%g N=%zu: %zu/%zu (mean dist %.4g rad)\n", cell.at("p").get<double>(),
                cell.at("alpha0").get<double>(), cell.at("eps").get<double>(), cell.at("N").get<std::size_t>(),
                cell.at("successes").get<std::size_t>(), cell.at("trials").get<std::size_t>(),
                cell.at("mean_dist").get<double>());
  }
  return 0;
}

int cmd_verify(const Options& opt) {
  std::uint64_t seed = opt.seed;
  ConfigPtr c;
  if (!opt.config.empty()) {
    c = load_config(opt);
    seed = seed_of(c.get());
  }
  Output out(opt.out);
  int passed = 0;
  char* report = nullptr;
  check(hlm_verify(seed, &passed, &report));
  const std::string text = take(report);
  out.write("verify.json", text);
  out.manifest("verify", seed, c.get());
  const auto j = nlohmann::json::parse(text);
  std::size_t failed = 0;
  for (const auto& check_entry : j.at("checks")) {
    if (!check_entry.at("passed").get<bool>()) {
      ++failed;
      std::printf("FAIL %s/%s: %s\n", check_entry.at("module").get<std::string>().c_str(),
                  check_entry.at("name").get<std::string>().c_str(),
                  check_entry.at("detail").get<std::string>().c_str());
    }
  }
  std::printf("%zu/%zu properties hold\n", j.at("checks").size() - failed, j.at("checks").size());
  return passed ? 0 : kExitClaimFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subspace recovery by l_p energy minimization"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON config file");
    sub->add_option("--seed", opt.seed, "base seed (default 20110101)")
        ->each([&](const std::string&) { opt.seed_given = true; });
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--workers", opt.workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  };
  auto* sample = app.add_subcommand("sample", "draw a dataset from the model");
  add_common(sample);
  sample->add_flag("--binary", opt.binary, "also write dataset.bin");
  auto* fit = app.add_subcommand("fit", "multi-restart l_p K-flats");
  add_common(fit);
  fit->add_option("--data", opt.data, "dataset file (CSV or binary)");
  auto* oracle = app.add_subcommand("oracle", "grid-search global minimizer (lines in the plane)");
  add_common(oracle);
  oracle->add_option("--data", opt.data, "dataset file (CSV or binary)");
  auto* bounds = app.add_subcommand("bounds", "recovery conditions and constants");
  add_common(bounds);
  auto* sweep = app.add_subcommand("sweep", "trials over the (p, alpha0, eps, N) grid");
  add_common(sweep);
  sweep->add_option("--format", opt.format, "row table format")->check(CLI::IsMember({"csv", "jsonl"}));
  auto* verify = app.add_subcommand("verify", "run the property suite");
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (sample->parsed()) return cmd_sample(opt);
    if (fit->parsed()) return cmd_fit(opt, false);
    if (oracle->parsed()) return cmd_fit(opt, true);
    if (bounds->parsed()) return cmd_bounds(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    if (verify->parsed()) return cmd_verify(opt);
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hlmrec: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
