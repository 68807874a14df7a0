#include "dirtail/montecarlo.hpp"

#include <cmath>
#include <sstream>

#include "dirtail/errors.hpp"
#include "mc_internal.hpp"

namespace dirtail {

namespace detail {

double sample_radial(const RadialModel& radial, Engine& eng) {
  const auto& fam = radial.family();
  if (const auto* g = std::get_if<GammaLaw>(&fam)) {
    return std::gamma_distribution<double>(g->shape, 1.0 / g->rate)(eng);
  }
  if (const auto* b = std::get_if<BetaLaw>(&fam)) {
    const double x = std::gamma_distribution<double>(b->a, 1.0)(eng);
    const double y = std::gamma_distribution<double>(b->b, 1.0)(eng);
    return x / (x + y);
  }
  // inversion: log F̄(R) = log V with V uniform on (0, 1]
  const double v = 1.0 - std::generate_canonical<double, 53>(eng);
  return radial.inverse_log_survival(std::log(v));
}

std::vector<double> draw_simplex(std::span<const double> alpha, std::size_t n, std::uint64_t seed,
                                 const ParallelConfig& par) {
  const std::size_t d = alpha.size();
  std::vector<double> u(n * d);
  run_chunks(chunk_count(n, par), par.workers, [&](std::size_t c) {
    Engine eng = chunk_engine(seed, c);
    SimplexSampler sampler(alpha);
    const std::size_t lo = c * par.chunk_size;
    const std::size_t hi = std::min(n, lo + par.chunk_size);
    for (std::size_t r = lo; r < hi; ++r) sampler.draw(eng, std::span<double>(u.data() + r * d, d));
  });
  return u;
}

}  // namespace detail

namespace {

void require_samples(std::size_t n) {
  if (n < 1) throw ValidationError("sample count n must be at least 1");
}

Estimate from_log_mean(const detail::LogMean& lm, std::uint64_t seed, Method method) {
  Estimate e;
  e.log_p_hat = lm.log_mean();
  e.p_hat = std::exp(e.log_p_hat);
  e.stderr_ = lm.standard_error();
  e.n = lm.n;
  e.seed = seed;
  e.method = method;
  return e;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::crude: return "crude";
    case Method::conditional: return "conditional";
    case Method::quadrature: return "quadrature";
  }
  return "unknown";
}

std::string Estimate::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"method\": \"" << to_string(method) << "\", \"seed\": " << seed << ", \"n\": " << n
     << ", \"p_hat\": " << p_hat << ", \"log_p_hat\": ";
  if (std::isinf(log_p_hat)) {
    os << "null";
  } else {
    os << log_p_hat;
  }
  os << ", \"stderr\": " << stderr_ << "}";
  return os.str();
}

std::vector<std::vector<double>> sample_dirichlet(const AggregateSpec& spec, std::size_t n,
                                                  std::uint64_t seed, const ParallelConfig& par) {
  require_samples(n);
  const std::size_t d = spec.dim();
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  detail::run_chunks(detail::chunk_count(n, par), par.workers, [&](std::size_t c) {
    detail::Engine eng = detail::chunk_engine(seed, c);
    detail::SimplexSampler sampler(spec.alpha);
    std::vector<double> u(d);
    const std::size_t lo = c * par.chunk_size;
    const std::size_t hi = std::min(n, lo + par.chunk_size);
    for (std::size_t r = lo; r < hi; ++r) {
      sampler.draw(eng, u);
      const double radius = detail::sample_radial(spec.radial, eng);
      for (std::size_t k = 0; k < d; ++k) rows[r][spec.order[k]] = radius * u[k];
    }
  });
  return rows;
}

Estimate conditional_mc_tail(const AggregateSpec& spec, double t, std::size_t n,
                             std::uint64_t seed, const ParallelConfig& par) {
  require_samples(n);
  if (!(t > 0.0)) throw DomainError("threshold t must be positive");
  const double tn = t / spec.scale;
  const double top = simplex_max(spec) * std::pow(spec.radial.upper_endpoint(), spec.p);
  if (tn >= top) {
    Estimate e;
    e.p_hat = 0.0;
    e.n = n;
    e.seed = seed;
    return e;
  }
  const auto u = detail::draw_simplex(spec.alpha, n, seed, par);
  const auto lm = detail::reduce_draws(u, spec.dim(), 1, par, [&](auto row, auto out) {
    const double z = detail::weighted_power_sum(spec.lambda, row, spec.p);
    out[0] = detail::conditional_log_tail(spec.radial, tn, z, spec.p);
  });
  return from_log_mean(lm[0], seed, Method::conditional);
}

Estimate crude_mc_tail(const AggregateSpec& spec, double t, std::size_t n, std::uint64_t seed,
                       const ParallelConfig& par) {
  require_samples(n);
  const std::size_t d = spec.dim();
  const std::size_t n_chunks = detail::chunk_count(n, par);
  std::vector<std::size_t> hits(n_chunks, 0);
  detail::run_chunks(n_chunks, par.workers, [&](std::size_t c) {
    detail::Engine eng = detail::chunk_engine(seed, c);
    detail::SimplexSampler sampler(spec.alpha);
    std::vector<double> u(d);
    const std::size_t lo = c * par.chunk_size;
    const std::size_t hi = std::min(n, lo + par.chunk_size);
    for (std::size_t r = lo; r < hi; ++r) {
      sampler.draw(eng, u);
      const double radius = detail::sample_radial(spec.radial, eng);
      const double z = detail::weighted_power_sum(spec.lambda, u, spec.p);
      const double s = spec.scale * std::pow(radius, spec.p) * z;
      if (s > t) ++hits[c];
    }
  });
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  Estimate e;
  const double nn = static_cast<double>(n);
  e.p_hat = static_cast<double>(total) / nn;
  e.log_p_hat = std::log(e.p_hat);
  e.stderr_ = std::sqrt(e.p_hat * (1.0 - e.p_hat) / nn);
  e.n = n;
  e.seed = seed;
  e.method = Method::crude;
  return e;
}

double simplex_max(const AggregateSpec& spec) {
  if (spec.p >= 1.0) return 1.0;
  std::vector<double> positive;
  for (double l : spec.lambda) {
    if (l > 0.0) positive.push_back(l);
  }
  return lambda_tilde(positive, spec.p);
}

double threshold_at_depth(const AggregateSpec& spec, double depth) {
  if (!(depth > 0.0 && depth < 1.0)) throw DomainError("depth must lie in (0, 1)");
  const double u = spec.radial.inverse_log_survival(std::log(depth));
  return spec.scale * simplex_max(spec) * std::pow(u, spec.p);
}

std::vector<MaxSumRow> max_sum_ratio(const AggregateSpec& spec, const std::vector<double>& t_grid,
                                     std::size_t n, std::uint64_t seed,
                                     const ParallelConfig& par) {
  require_samples(n);
  const std::size_t K = t_grid.size();
  const auto u = detail::draw_simplex(spec.alpha, n, seed, par);
  const auto lm = detail::reduce_draws(u, spec.dim(), 2 * K, par, [&](auto row, auto out) {
    double z = 0.0;
    double mx = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const double term = spec.lambda[i] * std::pow(row[i], spec.p);
      z += term;
      mx = std::max(mx, term);
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double tn = t_grid[k] / spec.scale;
      out[2 * k] = detail::conditional_log_tail(spec.radial, tn, mx, spec.p);
      out[2 * k + 1] = detail::conditional_log_tail(spec.radial, tn, z, spec.p);
    }
  });
  std::vector<MaxSumRow> rows;
  for (std::size_t k = 0; k < K; ++k) {
    const double lmax = lm[2 * k].log_mean();
    const double lsum = lm[2 * k + 1].log_mean();
    rows.push_back({t_grid[k], lmax, lsum, std::exp(lmax - lsum)});
  }
  return rows;
}

}  // namespace dirtail
