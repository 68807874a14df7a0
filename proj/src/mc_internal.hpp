#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "dirtail/aggtail.hpp"
#include "dirtail/montecarlo.hpp"

namespace dirtail::detail {

using Engine = std::mt19937_64;

inline Engine chunk_engine(std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  return Engine(seq);
}

// Calls fn(c) for c in [0, n_chunks) on up to `workers` threads.
template <class Fn>
void run_chunks(std::size_t n_chunks, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_chunks)));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < n_chunks && !failed; c = next++) {
        try {
          fn(c);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::size_t chunk_count(std::size_t n, const ParallelConfig& par) {
  const std::size_t cs = std::max<std::size_t>(1, par.chunk_size);
  return (n + cs - 1) / cs;
}

// Running mean of exp(l_i), kept relative to the largest l seen.
struct LogMean {
  double max = -std::numeric_limits<double>::infinity();
  double s1 = 0.0;
  double s2 = 0.0;
  std::size_t n = 0;

  void add(double l) {
    ++n;
    if (l == -std::numeric_limits<double>::infinity()) return;
    if (l > max) {
      const double r = std::exp(max - l);
      s1 = s1 * r + 1.0;
      s2 = s2 * r * r + 1.0;
      max = l;
    } else {
      const double e = std::exp(l - max);
      s1 += e;
      s2 += e * e;
    }
  }

  void merge(const LogMean& o) {
    n += o.n;
    if (o.max == -std::numeric_limits<double>::infinity()) return;
    if (o.max > max) {
      const double r = std::exp(max - o.max);
      s1 = s1 * r + o.s1;
      s2 = s2 * r * r + o.s2;
      max = o.max;
    } else {
      const double r = std::exp(o.max - max);
      s1 += o.s1 * r;
      s2 += o.s2 * r * r;
    }
  }

  double log_mean() const {
    if (n == 0 || s1 == 0.0) return -std::numeric_limits<double>::infinity();
    return max + std::log(s1 / static_cast<double>(n));
  }

  double standard_error() const {
    if (n < 2 || s1 == 0.0) return 0.0;
    const double nn = static_cast<double>(n);
    const double mean = s1 / nn;
    const double var = std::max(0.0, (s2 / nn - mean * mean) * nn / (nn - 1.0));
    return std::exp(max) * std::sqrt(var / nn);
  }
};

// Dirichlet direction U = Y / sum Y with Y_i ~ Gamma(alpha_i, 1).
class SimplexSampler {
 public:
  explicit SimplexSampler(std::span<const double> alpha) {
    for (double a : alpha) gammas_.emplace_back(a, 1.0);
  }
  void draw(Engine& eng, std::span<double> u) {
    double total = 0.0;
    for (std::size_t i = 0; i < gammas_.size(); ++i) {
      u[i] = gammas_[i](eng);
      total += u[i];
    }
    if (!(total > 0.0)) {
      // every Gamma draw underflowed; fall back to the largest-shape vertex
      std::fill(u.begin(), u.end(), 0.0);
      u[0] = 1.0;
      return;
    }
    for (double& x : u) x /= total;
  }

 private:
  std::vector<std::gamma_distribution<double>> gammas_;
};

double sample_radial(const RadialModel& radial, Engine& eng);

// n x d row-major simplex draws in the spec's sorted order.
std::vector<double> draw_simplex(std::span<const double> alpha, std::size_t n, std::uint64_t seed,
                                 const ParallelConfig& par);

// For each of the n draws, fn(u, out) writes K log values; returns one
// LogMean per slot, reduced in chunk order.
template <class Fn>
std::vector<LogMean> reduce_draws(const std::vector<double>& u, std::size_t d, std::size_t K,
                                  const ParallelConfig& par, Fn&& fn) {
  const std::size_t n = u.size() / d;
  const std::size_t n_chunks = chunk_count(n, par);
  std::vector<std::vector<LogMean>> parts(n_chunks, std::vector<LogMean>(K));
  run_chunks(n_chunks, par.workers, [&](std::size_t c) {
    std::vector<double> out(K);
    const std::size_t lo = c * par.chunk_size;
    const std::size_t hi = std::min(n, lo + par.chunk_size);
    for (std::size_t r = lo; r < hi; ++r) {
      fn(std::span<const double>(u.data() + r * d, d), std::span<double>(out));
      for (std::size_t k = 0; k < K; ++k) parts[c][k].add(out[k]);
    }
  });
  std::vector<LogMean> total(K);
  for (const auto& part : parts) {
    for (std::size_t k = 0; k < K; ++k) total[k].merge(part[k]);
  }
  return total;
}

inline double weighted_power_sum(std::span<const double> lambda, std::span<const double> u,
                                 double p) {
  double z = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (lambda[i] > 0.0 && u[i] > 0.0) z += lambda[i] * (p == 1.0 ? u[i] : std::pow(u[i], p));
  }
  return z;
}

// log F̄((t / z)^{1/p}); -inf when z == 0.
inline double conditional_log_tail(const RadialModel& radial, double t, double z, double p) {
  if (!(z > 0.0)) return -std::numeric_limits<double>::infinity();
  const double x = t / z;
  return radial.log_survival(p == 1.0 ? x : std::pow(x, 1.0 / p));
}

}  // namespace dirtail::detail
