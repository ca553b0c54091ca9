#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "hlmrec_cli_test";

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Run hlmrec(const std::string& args) {
  fs::create_directories(kRoot);
  const fs::path out = kRoot / "stdout.txt";
  const fs::path err = kRoot / "stderr.txt";
  const std::string cmd = std::string(HLMREC_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kRoot);
  const fs::path p = kRoot / name;
  std::ofstream(p) << body;
  return p;
}

const char* kClean = R"({"K":2,"D":2,"d":1,"truth_angles_deg":[17.19,77.19],"alphas":[0,0.5,0.5],"N":100})";

}  // namespace

TEST_CASE("sample writes labelled rows and a manifest") {
  const fs::path cfg = write_config("clean.json", kClean);
  const fs::path dir = kRoot / "sample";
  const Run r = hlmrec("sample --config " + cfg.string() + " --out " + dir.string());
  REQUIRE(r.code == 0);
  std::istringstream csv(slurp(dir / "dataset.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "x1,x2,label");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    const int label = std::stoi(line.substr(line.rfind(',') + 1));
    CHECK((label == 1 || label == 2));
  }
  CHECK(rows == 100);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("seed").get<std::uint64_t>() == 20110101u);
  CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
  CHECK(fs::exists(dir / "model.json"));
}

TEST_CASE("reruns reproduce bytes and seeds change them") {
  const fs::path cfg = write_config("clean.json", kClean);
  const std::string base = "sample --binary --config " + cfg.string();
  REQUIRE(hlmrec(base + " --seed 4 --out " + (kRoot / "a").string()).code == 0);
  REQUIRE(hlmrec(base + " --seed 4 --out " + (kRoot / "b").string()).code == 0);
  REQUIRE(hlmrec(base + " --seed 5 --out " + (kRoot / "c").string()).code == 0);
  for (const char* f : {"dataset.csv", "dataset.bin", "model.json", "config.json", "manifest.json"}) {
    CHECK(slurp(kRoot / "a" / f) == slurp(kRoot / "b" / f));
  }
  CHECK(slurp(kRoot / "a" / "dataset.csv") != slurp(kRoot / "c" / "dataset.csv"));
}

TEST_CASE("model echo re-parses") {
  const fs::path cfg = write_config("clean.json", kClean);
  const fs::path dir = kRoot / "echo";
  REQUIRE(hlmrec("sample --config " + cfg.string() + " --out " + dir.string()).code == 0);
  const fs::path again = dir / "model.json";
  CHECK(hlmrec("sample --config " + again.string() + " --out " + (kRoot / "echo2").string()).code == 0);
  CHECK(slurp(dir / "model.json") == slurp(kRoot / "echo2" / "model.json"));
}

TEST_CASE("invalid configs exit 2 naming the problem") {
  const fs::path typo = write_config("typo.json", R"({"K":2,"D":2,"d":1,"alfas":[0.2,0.4,0.4]})");
  Run r = hlmrec("sample --config " + typo.string() + " --out " + (kRoot / "x").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("alfas") != std::string::npos);

  const fs::path all_out = write_config("all_out.json", R"({"K":2,"D":2,"d":1,"truth_angles_deg":[0,60],"alphas":[1,0,0]})");
  r = hlmrec("sample --config " + all_out.string() + " --out " + (kRoot / "x").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("alpha") != std::string::npos);

  r = hlmrec("sample --config " + (kRoot / "missing.json").string());
  CHECK(r.code == 2);
  r = hlmrec("sample");
  CHECK(r.code == 2);
  r = hlmrec("sweep --format xml --config " + typo.string());
  CHECK(r.code == 2);
  r = hlmrec("frobnicate");
  CHECK(r.code == 2);
}

TEST_CASE("oracle in three dimensions is a capability error") {
  const fs::path cfg = write_config("d3.json", R"({"K":2,"D":3,"d":1,"truth":[[1,0,0],[0,0.6,0.8]],"alphas":[0.2,0.4,0.4],"N":50})");
  const Run r = hlmrec("oracle --config " + cfg.string() + " --out " + (kRoot / "o3").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("capability") != std::string::npos);
}

TEST_CASE("fit reads a dataset file") {
  const fs::path cfg = write_config("noisy.json", R"({"K":2,"D":2,"d":1,"truth_angles_deg":[10,70],
      "alphas":[0.2,0.4,0.4],"N":300,"restarts":4})");
  REQUIRE(hlmrec("sample --binary --config " + cfg.string() + " --out " + (kRoot / "fd").string()).code == 0);
  const Run r = hlmrec("fit --config " + cfg.string() + " --data " + (kRoot / "fd" / "dataset.bin").string() +
                       " --out " + (kRoot / "ff").string());
  REQUIRE(r.code == 0);
  const auto fit = nlohmann::json::parse(slurp(kRoot / "ff" / "fit.json"));
  CHECK(fit.at("recovery_distance").get<double>() < 0.05);
}

TEST_CASE("bounds prints the condition and tau0") {
  const fs::path cfg = write_config("t1.json", R"({"K":2,"D":2,"d":1,"truth_angles_deg":[17.19,77.19],
      "alphas":[0.01,0.495,0.495],"p":1})");
  const Run r = hlmrec("bounds --config " + cfg.string() + " --out " + (kRoot / "bd").string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("tau0 = 0.0795774") != std::string::npos);
  CHECK(r.out.find("alpha0 = 0.01 vs bound") != std::string::npos);
  CHECK(r.out.find("holds") != std::string::npos);
  CHECK(fs::exists(kRoot / "bd" / "bounds.json"));
}

TEST_CASE("sweep writes both table formats") {
  const fs::path cfg = write_config("sweep.json", R"({"K":2,"D":2,"d":1,"truth_angles_deg":[17.19,77.19],
      "alphas":[0.1,0.45,0.45],"p":[1,2],"alpha0":[0,0.1],"N":200,"trials":2,"grid_step_deg":1})");
  REQUIRE(hlmrec("sweep --config " + cfg.string() + " --out " + (kRoot / "sw").string()).code == 0);
  REQUIRE(hlmrec("sweep --format jsonl --workers 2 --config " + cfg.string() + " --out " +
                 (kRoot / "sj").string()).code == 0);
  for (const char* f : {"results.csv", "summary.json", "heatmap.svg", "distance.svg", "manifest.json"}) {
    CHECK(fs::exists(kRoot / "sw" / f));
  }
  CHECK(fs::exists(kRoot / "sj" / "results.jsonl"));
  CHECK(slurp(kRoot / "sw" / "summary.json") == slurp(kRoot / "sj" / "summary.json"));
}

TEST_CASE("verify exits 0 on a fresh build") {
  const Run r = hlmrec("verify --out " + (kRoot / "v").string());
  CHECK(r.code == 0);
  CHECK(fs::exists(kRoot / "v" / "verify.json"));
}
