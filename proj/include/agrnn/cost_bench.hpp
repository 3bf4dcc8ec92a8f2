#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agrnn/rng.hpp"
#include "agrnn/tasks.hpp"

namespace agrnn {

enum class Solver { DotProduct, AGnu, MulGnu, Noop };

inline const char* to_string(Solver s) {
  switch (s) {
    case Solver::DotProduct: return "dot";
    case Solver::AGnu: return "agnu";
    case Solver::MulGnu: return "gnu";
    case Solver::Noop: return "noop";
  }
  return "?";
}

inline constexpr Solver kAddingSolvers[] = {Solver::DotProduct, Solver::AGnu,
                                            Solver::MulGnu};

// ---------------------------------------------------------------------------
// PBS cost model for the encrypted adding solvers. Per time step:
//   dot product  2 PBS (one ciphertext-ciphertext product)
//   aGNU         4 PBS (four ReLUs)
//   GNU          6 PBS (sigmoid, ReLU proposal, two ciphertext products)

inline std::size_t pbs_per_step(Solver s) {
  switch (s) {
    case Solver::DotProduct: return 2;
    case Solver::AGnu: return 4;
    case Solver::MulGnu: return 6;
    case Solver::Noop: return 0;
  }
  return 0;
}

struct PbsCostReport {
  Solver solver;
  std::size_t pbs_per_step;
  std::size_t n;
  std::size_t pbs_total;
  std::optional<double> pbs_latency_ms;
  std::optional<double> projected_seconds;  // a projection, never a measurement
};

inline PbsCostReport pbs_cost(Solver s, std::size_t n,
                              std::optional<double> pbs_latency_ms = std::nullopt) {
  if (n == 0) throw std::invalid_argument("pbs_cost: n must be >= 1");
  PbsCostReport r{s, pbs_per_step(s), n, pbs_per_step(s) * n, pbs_latency_ms,
                  std::nullopt};
  if (pbs_latency_ms) {
    if (!(*pbs_latency_ms > 0.0))
      throw std::invalid_argument("pbs_cost: latency must be positive");
    r.projected_seconds = double(r.pbs_total) * *pbs_latency_ms / 1000.0;
  }
  return r;
}

inline void write_cost_csv(std::ostream& os, const std::vector<PbsCostReport>& rs) {
  const bool projected = !rs.empty() && rs.front().projected_seconds.has_value();
  os << "solver,n,pbs_per_step,pbs_total";
  if (projected) os << ",pbs_latency_ms,projected_seconds";
  os << '\n';
  for (const auto& r : rs) {
    os << to_string(r.solver) << ',' << r.n << ',' << r.pbs_per_step << ','
       << r.pbs_total;
    if (projected) {
      char buf[64];
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", r.pbs_latency_ms.value_or(0.0),
                    r.projected_seconds.value_or(0.0));
      os << buf;
    }
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Plaintext solvers, written the way a hand-tuned inference kernel would be:
// scalar state, weights folded into literals.

inline constexpr double kMulGnuGateMagnitude = 20.0;

[[gnu::noinline]] inline double solve_dot(std::span<const double> v,
                                          std::span<const double> w) {
  double acc = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t) acc += v[t] * w[t];
  return acc;
}

[[gnu::noinline]] inline double solve_agnu(std::span<const double> v,
                                           std::span<const double> w,
                                           double a = kDefaultGateMagnitude) {
  double h = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t) {
    const double hhat = std::max(0.0, v[t] + h);
    const double u = a - 2.0 * a * w[t];
    h = std::max(0.0, h + std::min(0.0, u)) + std::max(0.0, hhat - std::max(0.0, u));
  }
  return h;
}

[[gnu::noinline]] inline double solve_mul_gnu(std::span<const double> v,
                                              std::span<const double> w,
                                              double a = kMulGnuGateMagnitude) {
  double h = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t) {
    const double u = a - 2.0 * a * w[t];
    const double z = 1.0 / (1.0 + std::exp(-u));
    const double hhat = std::max(0.0, v[t] + h);
    h = z * h + (1.0 - z) * hhat;
  }
  return h;
}

[[gnu::noinline]] inline double solve_noop(std::span<const double> v,
                                           std::span<const double>) {
  return v.empty() ? 0.0 : v[0];
}

inline double run_solver(Solver s, std::span<const double> v,
                         std::span<const double> w) {
  switch (s) {
    case Solver::DotProduct: return solve_dot(v, w);
    case Solver::AGnu: return solve_agnu(v, w);
    case Solver::MulGnu: return solve_mul_gnu(v, w);
    case Solver::Noop: return solve_noop(v, w);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Timing harness

struct TimingReport {
  Solver solver;
  std::size_t n = 0;
  std::size_t iterations = 0;
  double median_ns = 0.0;
  double mean_ns = 0.0;
  double std_ns = 0.0;
  double min_ns = 0.0;
  std::string fingerprint;
  std::string warning;  // non-empty when the build is not optimized
};

inline constexpr std::size_t kMinIterations = 30;

inline bool optimized_build() {
#if defined(NDEBUG) && defined(__OPTIMIZE__)
  return true;
#else
  return false;
#endif
}

inline std::string build_fingerprint() {
  std::string s;
#if defined(__clang__)
  s = "clang-" + std::to_string(__clang_major__) + "." + std::to_string(__clang_minor__);
#elif defined(__GNUC__)
  s = "gcc-" + std::to_string(__GNUC__) + "." + std::to_string(__GNUC_MINOR__);
#else
  s = "unknown-compiler";
#endif
  s += optimized_build() ? " optimized" : " unoptimized";
  return s;
}

struct BenchConfig {
  std::size_t n = 100;
  std::size_t iterations = 200;
  std::size_t warmup = 20;
  std::size_t pool = 64;   // distinct pre-generated instances, cycled
  std::size_t inner = 16;  // solver calls per timed sample
  std::uint64_t seed = 0;
};

namespace detail {

inline std::atomic<bool>& bench_busy() {
  static std::atomic<bool> busy{false};
  return busy;
}

struct BenchLock {
  BenchLock() {
    if (bench_busy().exchange(true))
      throw std::runtime_error("bench_solvers: another measurement is running");
  }
  ~BenchLock() { bench_busy().store(false); }
  BenchLock(const BenchLock&) = delete;
  BenchLock& operator=(const BenchLock&) = delete;
};

inline void summarize(TimingReport& r, std::vector<double> ns) {
  std::sort(ns.begin(), ns.end());
  const std::size_t m = ns.size();
  r.median_ns = m % 2 ? ns[m / 2] : 0.5 * (ns[m / 2 - 1] + ns[m / 2]);
  double sum = 0.0;
  for (double x : ns) sum += x;
  r.mean_ns = sum / double(m);
  double sq = 0.0;
  for (double x : ns) sq += (x - r.mean_ns) * (x - r.mean_ns);
  r.std_ns = m > 1 ? std::sqrt(sq / double(m - 1)) : 0.0;
  r.min_ns = ns.front();
}

}  // namespace detail

// Times each solver on the same pre-generated instances. One sample is the
// mean per-call time of `inner` back-to-back calls; instance generation is
// outside the timed region. Single-threaded; concurrent calls are refused.
inline std::vector<TimingReport> bench_solvers(const BenchConfig& cfg,
                                               std::span<const Solver> solvers = kAddingSolvers) {
  if (cfg.iterations < kMinIterations)
    throw std::invalid_argument("bench_solvers: iterations must be >= " +
                                std::to_string(kMinIterations));
  if (cfg.pool == 0 || cfg.inner == 0)
    throw std::invalid_argument("bench_solvers: pool and inner must be >= 1");
  detail::BenchLock lock;

  Rng rng(cfg.seed);
  auto instances = gen_adding_set(rng, cfg.n, cfg.pool);

  std::vector<TimingReport> out;
  volatile double sink = 0.0;
  for (Solver s : solvers) {
    TimingReport r;
    r.solver = s;
    r.n = cfg.n;
    r.iterations = cfg.iterations;
    r.fingerprint = build_fingerprint();
    if (!optimized_build())
      r.warning = "unoptimized build: timings are not representative";

    std::size_t next = 0;
    auto sample = [&] {
      const auto t0 = std::chrono::steady_clock::now();
      for (std::size_t k = 0; k < cfg.inner; ++k) {
        const auto& a = instances[next];
        next = (next + 1) % instances.size();
        sink = sink + run_solver(s, a.v.span(), a.w.span());
      }
      const auto t1 = std::chrono::steady_clock::now();
      return std::chrono::duration<double, std::nano>(t1 - t0).count() /
             double(cfg.inner);
    };
    for (std::size_t k = 0; k < cfg.warmup; ++k) sample();
    std::vector<double> ns;
    ns.reserve(cfg.iterations);
    for (std::size_t k = 0; k < cfg.iterations; ++k) ns.push_back(sample());
    detail::summarize(r, std::move(ns));
    out.push_back(std::move(r));
  }
  return out;
}

inline void emit_report_csv(std::ostream& os, const std::vector<TimingReport>& rs) {
  os << "solver,n,iterations,median_ns,mean_ns,std_ns,min_ns\n";
  char buf[160];
  for (const auto& r : rs) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.17g,%.17g,%.17g,%.17g\n",
                  to_string(r.solver), r.n, r.iterations, r.median_ns, r.mean_ns,
                  r.std_ns, r.min_ns);
    os << buf;
  }
}

inline void emit_report_csv(const std::vector<TimingReport>& rs,
                            const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  emit_report_csv(os, rs);
  os.flush();
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

inline Solver solver_from_string(const std::string& s) {
  for (Solver k : {Solver::DotProduct, Solver::AGnu, Solver::MulGnu, Solver::Noop})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown solver '" + s + "'");
}

inline std::vector<TimingReport> read_report_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) ||
      line != "solver,n,iterations,median_ns,mean_ns,std_ns,min_ns")
    throw std::runtime_error("timing csv: missing or unexpected header");
  std::vector<TimingReport> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[7];
    for (auto& x : f)
      if (!std::getline(ss, x, ',')) throw std::runtime_error("timing csv: short row");
    TimingReport r;
    r.solver = solver_from_string(f[0]);
    r.n = std::stoul(f[1]);
    r.iterations = std::stoul(f[2]);
    r.median_ns = std::strtod(f[3].c_str(), nullptr);
    r.mean_ns = std::strtod(f[4].c_str(), nullptr);
    r.std_ns = std::strtod(f[5].c_str(), nullptr);
    r.min_ns = std::strtod(f[6].c_str(), nullptr);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace agrnn
