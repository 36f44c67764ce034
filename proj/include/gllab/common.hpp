#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gllab {

using real = double;

// ---------------------------------------------------------------------------
// Error taxonomy. Construction and evaluation failures carry the failed
// condition in the message so CLI exit paths can name it.
// ---------------------------------------------------------------------------

struct domain_error : std::runtime_error {
  explicit domain_error(const std::string& m) : std::runtime_error(m) {}
};
struct smoothness_error : std::runtime_error {
  explicit smoothness_error(const std::string& m) : std::runtime_error(m) {}
};
struct construction_error : std::runtime_error {
  explicit construction_error(const std::string& m) : std::runtime_error(m) {}
};
struct parameter_error : std::runtime_error {
  explicit parameter_error(const std::string& m) : std::runtime_error(m) {}
};
struct gluing_error : std::runtime_error {
  explicit gluing_error(const std::string& m) : std::runtime_error(m) {}
};
struct solver_error : std::runtime_error {
  explicit solver_error(const std::string& m) : std::runtime_error(m) {}
};
struct oracle_error : std::runtime_error {
  explicit oracle_error(const std::string& m) : std::runtime_error(m) {}
};
struct axis_error : std::runtime_error {
  explicit axis_error(const std::string& m) : std::runtime_error(m) {}
};
struct invalid_warping_error : std::runtime_error {
  explicit invalid_warping_error(const std::string& m) : std::runtime_error(m) {}
};

// Infeasibility of a constant-selection step; `constraint` names the
// inequality that failed.
struct infeasibility_error : std::runtime_error {
  std::string constraint;
  infeasibility_error(std::string c, const std::string& m)
      : std::runtime_error(m), constraint(std::move(c)) {}
};

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

inline std::vector<real> linspace(real a, real b, int n) {
  if (n < 1) throw parameter_error("linspace: n >= 1 required");
  std::vector<real> out(static_cast<size_t>(n));
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = a + (b - a) * real(i) / real(n - 1);
  out.front() = a;
  out.back() = b;
  return out;
}

// Uniform grid on [a, split] plus geometrically spaced points on [split, b].
// Used when a verification domain has a short action zone followed by a very
// long slow tail (tail/action ratios can exceed 1e20 in the dampened cells).
inline std::vector<real> graded_grid(real a, real split, real b, int n_uniform, int n_log) {
  std::vector<real> out = linspace(a, std::min(split, b), n_uniform);
  if (b > split && n_log > 0) {
    const real lo = std::max(split, a);
    const real ratio = b / lo;
    for (int i = 1; i <= n_log; ++i)
      out.push_back(lo * std::pow(ratio, real(i) / real(n_log)));
    out.back() = b;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic RNG (value sequence is part of the report contract; do not
// rely on std:: distributions, which vary between standard libraries).
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // xorshift* generator
    s_ ^= s_ >> 12;
    s_ ^= s_ << 25;
    s_ ^= s_ >> 27;
    return s_ * 0x2545f4914f6cdd1dull;
  }

  real uniform() { return real(next_u64() >> 11) * 0x1.0p-53; }
  real uniform(real a, real b) { return a + (b - a) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive
    return lo + int(next_u64() % std::uint64_t(hi - lo + 1));
  }

 private:
  std::uint64_t s_;
};

// ---------------------------------------------------------------------------
// Parallel grid evaluation. GLLAB_THREADS caps the worker count.
// ---------------------------------------------------------------------------

inline int max_threads() {
  int hw = int(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("GLLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return hw;
}

inline void parallel_for(size_t n, const std::function<void(size_t)>& body) {
  const int nt = std::min<size_t>(max_threads(), n ? n : 1);
  if (nt <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(nt));
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errs(static_cast<size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (;;) {
          const size_t i = next.fetch_add(1);
          if (i >= n) break;
          body(i);
        }
      } catch (...) {
        errs[static_cast<size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace gllab
