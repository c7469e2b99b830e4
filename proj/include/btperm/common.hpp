// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace btperm {

// Unit system: micrometers, milliseconds, milliTesla.
namespace units {

// Gyromagnetic ratio of 1H in rad/(ms*mT).
inline constexpr double kGyromagneticRatio = 267.51525;

// Face permeabilities are quoted in mm/ms (= m/s); internal operators live in
// the um-ms system, so coupling terms scale by this factor.
inline constexpr double kKappaToUmPerMs = 1000.0;

// b-values: 1 s/mm^2 = 1e-3 ms/um^2.
inline constexpr double kBToMsPerUm2 = 1e-3;

inline constexpr double kInfiniteT2 = std::numeric_limits<double>::infinity();

} // namespace units

// Errors map onto the CLI exit codes: config -> 2, numerical -> 3, io -> 4.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};
struct MeshError : std::runtime_error {
  explicit MeshError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double sigmoid_deriv(double z) {
  const double s = sigmoid(z);
  return s * (1.0 - s);
}

// logit with clamping so the result stays finite for u in {0, 1}.
inline double logit_clamped(double u, double eps = 1e-12) {
  const double c = std::min(1.0 - eps, std::max(eps, u));
  return std::log(c / (1.0 - c));
}

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static round-robin parallel loop. The body must only write to slots owned by
// its own index so results do not depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& body) {
  workers = resolve_workers(workers);
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t nthreads = std::min<std::size_t>(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  std::exception_ptr first_error;
  std::mutex err_mutex;
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < n; i += nthreads) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

} // namespace btperm
