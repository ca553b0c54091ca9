#pragma once

#include <cstdint>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hlm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

enum class ErrorKind {
  shape,
  domain,
  capability,
  degenerate,
  budget,
  config,
  io,
  condition,
  empty,
};

const char* to_string(ErrorKind kind);

// All library failures are reported through this exception; the C API maps
// `kind` onto a status code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline constexpr std::uint64_t kDefaultSeed = 20110101;

std::uint64_t splitmix64(std::uint64_t x);

// Seed splitting convention: trial_seed = hash(base_seed, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

// Runs fn(i) for i in [0, n) on up to `workers` threads. Callers write results
// into slot i, so the outcome never depends on the scheduling.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

int resolve_workers(int workers);

std::uint64_t fnv1a64(const std::string& bytes);

// Wilson score interval for a binomial proportion.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
Interval wilson_interval(std::size_t successes, std::size_t trials, double z);

}  // namespace hlm
