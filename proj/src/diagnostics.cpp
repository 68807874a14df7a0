#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <string>

#include "dirtail/errors.hpp"
#include "dirtail/montecarlo.hpp"
#include "mc_internal.hpp"

namespace dirtail {

namespace {

constexpr double kUnitTol = 1e-10;

void check_columns(const std::vector<std::vector<double>>& w, std::size_t d, double p,
                   std::size_t i, std::size_t j) {
  if (w.size() != d) throw ValidationError("weight matrix needs one row per component");
  const std::size_t q = w.front().size();
  for (const auto& row : w) {
    if (row.size() != q) throw ValidationError("weight matrix rows differ in length");
    for (double x : row) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("weights must be >= 0");
    }
  }
  if (i >= q || j >= q) throw ValidationError("column index out of range");
  if (i == j) throw ValidationError("pairwise check needs two distinct columns");

  auto column = [&](std::size_t c) {
    std::vector<double> col;
    for (const auto& row : w) col.push_back(row[c]);
    return col;
  };
  const auto ci = column(i);
  const auto cj = column(j);
  if (p >= 1.0) {
    for (const auto* col : {&ci, &cj}) {
      if (std::abs(*std::max_element(col->begin(), col->end()) - 1.0) > kUnitTol) {
        throw ValidationError("for p >= 1 each column must have maximum weight 1");
      }
    }
    for (std::size_t k = 0; k < d; ++k) {
      if (std::abs(ci[k] - 1.0) <= kUnitTol && std::abs(cj[k] - 1.0) <= kUnitTol) {
        throw ValidationError("for p >= 1 the unit sets of the two columns must be disjoint");
      }
    }
    return;
  }
  for (const auto* col : {&ci, &cj}) {
    for (double x : *col) {
      if (!(x > 0.0)) throw ValidationError("for p < 1 all weights must be positive");
    }
    if (std::abs(lambda_tilde(*col, p) - 1.0) > kUnitTol) {
      throw ValidationError("for p < 1 each column must have unit 1/(1-p)-norm");
    }
  }
  if (ci == cj) throw ValidationError("for p < 1 the two columns must differ");
}

double log_mean_tail(const RadialModel& radial, const std::vector<double>& z, double b,
                     double p) {
  detail::LogMean lm;
  for (double zi : z) lm.add(detail::conditional_log_tail(radial, b, zi, p));
  return lm.log_mean();
}

}  // namespace

std::vector<PairRow> pairwise_asymindep(const std::vector<double>& alpha,
                                        const std::vector<std::vector<double>>& weights, double p,
                                        const RadialModel& radial, std::size_t i, std::size_t j,
                                        const std::vector<double>& levels, std::size_t n,
                                        std::uint64_t seed, const ParallelConfig& par) {
  if (n < 1) throw ValidationError("sample count n must be at least 1");
  if (!(p > 0.0)) throw ValidationError("p must be positive");
  const std::size_t d = alpha.size();
  check_columns(weights, d, p, i, j);
  for (double a : alpha) {
    if (!(a > 0.0)) throw ValidationError("every alpha_i must be positive");
  }

  const auto u = detail::draw_simplex(alpha, n, seed, par);
  std::vector<double> zi(n);
  std::vector<double> zmin(n);
  for (std::size_t r = 0; r < n; ++r) {
    double a = 0.0;
    double b = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double up = std::pow(u[r * d + k], p);
      a += weights[k][i] * up;
      b += weights[k][j] * up;
    }
    zi[r] = a;
    zmin[r] = std::min(a, b);
  }

  std::vector<PairRow> rows;
  for (double level : levels) {
    if (!(level > 1.0)) throw ValidationError("levels must exceed 1");
    const double target = -std::log(level);
    auto f = [&](double y) { return log_mean_tail(radial, zi, std::exp(y), p) - target; };
    const double r0 = radial.inverse_log_survival(target);
    const double guess = r0 > 0.0 ? p * std::log(r0) : 0.0;
    double lo = guess;
    double hi = guess;
    double step = 0.25;
    while (f(lo) <= 0.0) {
      lo -= step;
      step *= 2.0;
      if (step > 1e3) throw NumericError("quantile search: no lower bracket");
    }
    step = 0.25;
    while (f(hi) > 0.0) {
      hi += step;
      step *= 2.0;
      if (step > 1e3) throw NumericError("quantile search: no upper bracket");
    }
    boost::math::tools::eps_tolerance<double> tol(40);
    auto [y0, y1] = boost::math::tools::bisect(f, lo, hi, tol);
    const double b = std::exp(0.5 * (y0 + y1));
    const double joint = log_mean_tail(radial, zmin, b, p);
    const double single = log_mean_tail(radial, zi, b, p);
    rows.push_back({level, b, std::exp(joint - single)});
  }
  return rows;
}

std::vector<GumbelCheckRow> gumbel_limit_check(const AggregateSpec& spec, const Norming& norming,
                                               std::size_t block, std::size_t replicates,
                                               const std::vector<double>& x_grid,
                                               std::uint64_t seed, const ParallelConfig& par) {
  if (block < 1 || replicates < 1) throw ValidationError("block and replicates must be >= 1");
  const std::size_t d = spec.dim();
  const std::size_t K = x_grid.size();
  std::vector<double> cut(K);
  for (std::size_t k = 0; k < K; ++k) cut[k] = norming.a_n * x_grid[k] + norming.b_n;

  // chunk over replicates; the layout depends on block and chunk_size only
  ParallelConfig rep = par;
  rep.chunk_size = std::max<std::size_t>(1, par.chunk_size / block);
  const std::size_t n_chunks = detail::chunk_count(replicates, rep);
  std::vector<std::vector<std::size_t>> hits(n_chunks, std::vector<std::size_t>(K, 0));
  detail::run_chunks(n_chunks, par.workers, [&](std::size_t c) {
    detail::Engine eng = detail::chunk_engine(seed, c);
    detail::SimplexSampler sampler(spec.alpha);
    std::vector<double> u(d);
    const std::size_t lo = c * rep.chunk_size;
    const std::size_t hi = std::min(replicates, lo + rep.chunk_size);
    for (std::size_t r = lo; r < hi; ++r) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < block; ++s) {
        sampler.draw(eng, u);
        const double radius = detail::sample_radial(spec.radial, eng);
        const double z = detail::weighted_power_sum(spec.lambda, u, spec.p);
        mx = std::max(mx, spec.scale * std::pow(radius, spec.p) * z);
      }
      for (std::size_t k = 0; k < K; ++k) {
        if (mx <= cut[k]) ++hits[c][k];
      }
    }
  });
  std::vector<GumbelCheckRow> rows;
  for (std::size_t k = 0; k < K; ++k) {
    std::size_t total = 0;
    for (const auto& h : hits) total += h[k];
    rows.push_back({x_grid[k], static_cast<double>(total) / static_cast<double>(replicates),
                    std::exp(-std::exp(-x_grid[k]))});
  }
  return rows;
}

std::vector<MdaRow> empirical_gumbel_mda(const AggregateSpec& spec,
                                         const std::vector<double>& x_grid,
                                         const std::vector<double>& depth_grid, std::size_t n,
                                         std::uint64_t seed, const ParallelConfig& par) {
  if (spec.radial.mda_class() != MdaClass::gumbel) {
    throw RegimeError("empirical_gumbel_mda requires a Gumbel-class radial law");
  }
  if (n < 1) throw ValidationError("sample count n must be at least 1");
  const double div = spec.scale * simplex_max(spec);
  const std::size_t nx = x_grid.size();
  // thresholds: for each depth, v followed by v + x / w_S(v) for each x
  std::vector<double> thresholds;
  std::vector<double> vs;
  for (double depth : depth_grid) {
    const double v = threshold_at_depth(spec, depth);
    const double inv_w = div / spec.radial.power_scaling_wp(spec.p, v / div);
    vs.push_back(v);
    thresholds.push_back(v);
    for (double x : x_grid) thresholds.push_back(v + x * inv_w);
  }
  const auto u = detail::draw_simplex(spec.alpha, n, seed, par);
  const auto lm = detail::reduce_draws(u, spec.dim(), thresholds.size(), par,
                                       [&](auto row, auto out) {
                                         const double z =
                                             detail::weighted_power_sum(spec.lambda, row, spec.p);
                                         for (std::size_t k = 0; k < thresholds.size(); ++k) {
                                           out[k] = detail::conditional_log_tail(
                                               spec.radial, thresholds[k] / spec.scale, z, spec.p);
                                         }
                                       });
  std::vector<MdaRow> rows;
  for (std::size_t g = 0; g < depth_grid.size(); ++g) {
    const std::size_t base = g * (nx + 1);
    const double lv = lm[base].log_mean();
    for (std::size_t k = 0; k < nx; ++k) {
      const double lx = lm[base + 1 + k].log_mean();
      rows.push_back({depth_grid[g], vs[g], x_grid[k], std::exp(lx - lv), std::exp(-x_grid[k])});
    }
  }
  return rows;
}

}  // namespace dirtail
