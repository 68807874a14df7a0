#pragma once

// Verification engines: Dirichlet sampling, crude and radially conditioned
// Monte Carlo, low-dimensional quadrature, and empirical extreme-value checks.
//
// Randomised routines split the n samples into fixed-size chunks. Chunk c
// draws from its own generator seeded by (seed, c), and partial results are
// combined in chunk order, so the output does not depend on `workers`.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dirtail/aggtail.hpp"

namespace dirtail {

enum class Method { crude, conditional, quadrature };
std::string to_string(Method m);

struct Estimate {
  double p_hat = 0.0;
  double log_p_hat = -std::numeric_limits<double>::infinity();
  double stderr_ = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  Method method = Method::conditional;

  std::string to_json() const;
};

struct ParallelConfig {
  unsigned workers = 1;
  std::size_t chunk_size = 1 << 14;
};

/// n rows of (X_1, ..., X_d) in the caller's original component order.
std::vector<std::vector<double>> sample_dirichlet(const AggregateSpec& spec, std::size_t n,
                                                  std::uint64_t seed,
                                                  const ParallelConfig& par = {});

/// Mean of F̄((t / (scale Z))^{1/p}) over Z = sum lambda_i U_i^p.
Estimate conditional_mc_tail(const AggregateSpec& spec, double t, std::size_t n,
                             std::uint64_t seed, const ParallelConfig& par = {});

/// Empirical frequency of S_p > t.
Estimate crude_mc_tail(const AggregateSpec& spec, double t, std::size_t n, std::uint64_t seed,
                       const ParallelConfig& par = {});

/// Deterministic P(S_p > t) by adaptive quadrature over the simplex (d <= 3).
Estimate quadrature_tail(const AggregateSpec& spec, double t);

/// Largest value of sum lambda_i u_i^p over the simplex (normalised weights).
double simplex_max(const AggregateSpec& spec);

/// Raw threshold t = scale * simplex_max * u^p with F̄(u) = depth.
double threshold_at_depth(const AggregateSpec& spec, double depth);

struct MaxSumRow {
  double t;
  double log_max_tail;
  double log_sum_tail;
  double ratio;
};

/// P(max lambda_i X_i^p > t) / P(S_p > t), both conditioned on the simplex
/// with common random numbers.
std::vector<MaxSumRow> max_sum_ratio(const AggregateSpec& spec, const std::vector<double>& t_grid,
                                     std::size_t n, std::uint64_t seed,
                                     const ParallelConfig& par = {});

struct PairRow {
  double level_n;
  double b_n;
  double ratio;  // P(Y_i > b, Y_j > b) / P(Y_i > b)
};

/// Y_j = sum_k weights[k][j] X_k^p. Columns must satisfy the asymptotic
/// independence conditions for p (disjoint unit sets for p >= 1; distinct
/// columns of unit 1/(1-p)-norm and positive entries for p < 1).
std::vector<PairRow> pairwise_asymindep(const std::vector<double>& alpha,
                                        const std::vector<std::vector<double>>& weights, double p,
                                        const RadialModel& radial, std::size_t i, std::size_t j,
                                        const std::vector<double>& levels, std::size_t n,
                                        std::uint64_t seed, const ParallelConfig& par = {});

enum class NormingSource { asymptotic, exact_quadrature };

struct Norming {
  double a_n;
  double b_n;
};

/// b_n = G^{-1}(1 - 1/n) for G the law of S_p, a_n = 1 / w_S(b_n).
Norming norming_constants(const AggregateSpec& spec, double n,
                          NormingSource source = NormingSource::asymptotic);

struct GumbelCheckRow {
  double x;
  double empirical;
  double limit;  // exp(-e^{-x})
};

/// Empirical P(max of `block` draws of S_p <= a_n x + b_n) from `replicates` blocks.
std::vector<GumbelCheckRow> gumbel_limit_check(const AggregateSpec& spec, const Norming& norming,
                                               std::size_t block, std::size_t replicates,
                                               const std::vector<double>& x_grid,
                                               std::uint64_t seed,
                                               const ParallelConfig& par = {});

struct MdaRow {
  double depth;
  double v;
  double x;
  double ratio;  // F̄_S(v + x / w_S(v)) / F̄_S(v)
  double limit;  // e^{-x}
};

std::vector<MdaRow> empirical_gumbel_mda(const AggregateSpec& spec,
                                         const std::vector<double>& x_grid,
                                         const std::vector<double>& depth_grid, std::size_t n,
                                         std::uint64_t seed, const ParallelConfig& par = {});

}  // namespace dirtail
