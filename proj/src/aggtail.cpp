#include "dirtail/aggtail.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>

#include "dirtail/errors.hpp"
#include "dirtail/producttail.hpp"

namespace dirtail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_gumbel(const AggregateSpec& spec, const char* what) {
  if (spec.radial.mda_class() != MdaClass::gumbel) {
    throw RegimeError(std::string(what) + " requires a Gumbel-class radial law, got " +
                      spec.radial.family_name());
  }
}

TailAsymptotic identity_tail(const AggregateSpec& spec, double divisor) {
  TailAsymptotic out;
  out.radial = spec.radial;
  out.convention.divisor = divisor;
  out.convention.p = spec.p;
  if (spec.radial.mda_class() == MdaClass::weibull) {
    out.base = TailAsymptotic::Base::weibull;
    out.convention.kind = ThresholdConvention::Kind::endpoint_gap;
  }
  return out;
}

// log prod_{i>m} (1 - lambda_i)^{-alpha_i}
double log_tail_weights(const AggregateSpec& spec) {
  double acc = 0.0;
  for (std::size_t i = spec.m; i < spec.dim(); ++i) {
    acc -= spec.alpha[i] * std::log1p(-spec.lambda[i]);
  }
  return acc;
}

double sum_alpha(const AggregateSpec& spec, std::size_t from, std::size_t to) {
  return std::accumulate(spec.alpha.begin() + from, spec.alpha.begin() + to, 0.0);
}

}  // namespace

AggregateSpec validate_spec(std::span<const double> alpha, std::span<const double> lambda,
                            double p, const RadialModel& radial, double tol) {
  if (alpha.empty()) throw ValidationError("alpha must be non-empty");
  if (alpha.size() != lambda.size()) {
    throw ValidationError("alpha and lambda must have the same length");
  }
  if (!(p > 0.0) || !std::isfinite(p)) throw ValidationError("p must be positive and finite");
  if (!(tol >= 0.0 && tol < 1.0)) throw ValidationError("tolerance must lie in [0, 1)");
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("every alpha_i must be positive");
  }
  for (double l : lambda) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw ValidationError("every lambda_i must be non-negative and finite");
    }
  }
  const double scale = *std::max_element(lambda.begin(), lambda.end());
  if (!(scale > 0.0)) throw ValidationError("at least one lambda_i must be positive");

  AggregateSpec s;
  s.p = p;
  s.radial = radial;
  s.scale = scale;
  s.tolerance = tol;
  s.order.resize(alpha.size());
  std::iota(s.order.begin(), s.order.end(), std::size_t{0});
  std::stable_sort(s.order.begin(), s.order.end(),
                   [&](std::size_t i, std::size_t j) { return lambda[i] > lambda[j]; });
  for (std::size_t k : s.order) {
    s.alpha.push_back(alpha[k]);
    s.lambda.push_back(lambda[k] / scale);
  }
  s.lambda[0] = 1.0;
  s.alpha_bar = std::accumulate(s.alpha.begin(), s.alpha.end(), 0.0);

  s.m = 0;
  while (s.m < s.dim() && s.lambda[s.m] >= 1.0 - tol) ++s.m;
  // weights absorbed into the top group count as exactly 1
  for (std::size_t i = 0; i < s.m; ++i) s.lambda[i] = 1.0;

  s.alpha_hat = *std::max_element(s.alpha.begin(), s.alpha.begin() + s.m);
  s.m_star = static_cast<std::size_t>(
      std::count(s.alpha.begin(), s.alpha.begin() + s.m, s.alpha_hat));
  return s;
}

double lambda_tilde(std::span<const double> lambda, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("lambda_tilde needs p in (0, 1)");
  if (lambda.empty()) throw DomainError("lambda_tilde needs at least one weight");
  const double q = 1.0 / (1.0 - p);
  double mx = -kInf;
  for (double l : lambda) {
    if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("lambda_tilde needs lambda_i > 0");
    mx = std::max(mx, std::log(l));
  }
  double acc = 0.0;
  for (double l : lambda) acc += std::exp(q * (std::log(l) - mx));
  return std::exp(mx + (1.0 - p) * std::log(acc));
}

double ThresholdConvention::map(double t) const {
  const double x = t / divisor;
  if (kind == Kind::power_root) return p == 1.0 ? x : std::pow(x, 1.0 / p);
  if (!(x > 0.0)) return 1.0;
  return p == 1.0 ? 1.0 - x : -std::expm1(std::log(x) / p);
}

std::string ThresholdConvention::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (kind == Kind::power_root) {
    os << "u = (t/" << divisor << ")^(1/" << p << ")";
  } else {
    os << "u = 1 - (t/" << divisor << ")^(1/" << p << ")";
  }
  return os.str();
}

LogProb TailAsymptotic::evaluate(double t) const {
  if (std::isnan(t)) throw DomainError("threshold is NaN");
  if (log_k == -kInf) return LogProb::zero();
  if (t <= 0.0) return LogProb::one();
  const double u = convention.map(t);
  LogProb out;
  if (base == Base::gumbel) {
    if (u >= radial.upper_endpoint()) return LogProb::zero();
    const double ls = radial.log_survival(u);
    out.log_value = log_k + ls;
    if (rho != 0.0) out.log_value += rho * std::log(u * radial.scaling_w(u));
    return out;
  }
  if (u <= 0.0) return LogProb::zero();
  if (u >= 1.0) return LogProb::one();
  out.log_value = log_k + radial.log_survival_gap(u);
  if (rho != 0.0) out.log_value += rho * std::log(u);
  return out;
}

std::string TailAsymptotic::to_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"K_log\": ";
  if (std::isinf(log_k)) {
    os << "null";
  } else {
    os << log_k;
  }
  os << ", \"rho\": " << rho << ", \"base\": \""
     << (base == Base::gumbel ? "gumbel" : "weibull") << "\", \"convention\": \""
     << convention.describe() << "\"}";
  return os.str();
}

SimplexTailGeometry simplex_constant_recursion(std::span<const double> alpha,
                                               std::span<const double> lambda, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("simplex recursion needs p in (0, 1)");
  if (alpha.size() != lambda.size()) throw DomainError("alpha and lambda lengths differ");
  if (alpha.size() < 2) throw DomainError("simplex recursion needs d >= 2");
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0.0)) throw DomainError("simplex recursion needs alpha_i > 0");
    if (!(lambda[i] > 0.0)) throw DomainError("simplex recursion needs lambda_i > 0");
  }

  SimplexTailGeometry out;
  // k = 2: B ~ Beta(alpha_1, alpha_2) is the weight on lambda_1.
  SaddleGeometry geom = saddle_geometry(lambda[0], lambda[1], p);
  double c_tilde = mixture_tail_constant_c(beta_density(alpha[0], alpha[1], geom.theta), geom);
  out.levels.push_back({2, geom.theta_tilde, geom.theta, geom.curvature, c_tilde, 0.5});

  double alpha_prefix = alpha[0] + alpha[1];
  for (std::size_t k = 3; k <= alpha.size(); ++k) {
    const double ak = alpha[k - 1];
    geom = saddle_geometry(out.levels.back().lambda_tilde, lambda[k - 1], p);
    const double g = beta_density(alpha_prefix, ak, geom.theta);
    const double gamma = 0.5 * static_cast<double>(k - 2);
    c_tilde *= mixture_tail_constant_d(g, geom, gamma);
    out.levels.push_back({k, geom.theta_tilde, geom.theta, geom.curvature, c_tilde,
                          0.5 * static_cast<double>(k - 1)});
    alpha_prefix += ak;
  }
  return out;
}

SimplexTailGeometry simplex_constant_recursion(const AggregateSpec& spec) {
  return simplex_constant_recursion(spec.alpha, spec.lambda, spec.p);
}

TailAsymptotic tail_gumbel_pgt1(const AggregateSpec& spec) {
  if (!(spec.p > 1.0) && spec.dim() > 1) {
    throw RegimeError("tail_gumbel_pgt1 requires p > 1");
  }
  require_gumbel(spec, "tail_gumbel_pgt1");
  TailAsymptotic out = identity_tail(spec, spec.scale);
  if (spec.dim() == 1) return out;
  out.log_k = std::log(static_cast<double>(spec.m_star)) + log_gamma(spec.alpha_bar) -
              log_gamma(spec.alpha_hat);
  out.rho = spec.alpha_hat - spec.alpha_bar;
  return out;
}

TailAsymptotic tail_gumbel_peq1(const AggregateSpec& spec) {
  if (spec.p != 1.0 && spec.dim() > 1) throw RegimeError("tail_gumbel_peq1 requires p = 1");
  require_gumbel(spec, "tail_gumbel_peq1");
  TailAsymptotic out = identity_tail(spec, spec.scale);
  if (spec.m == spec.dim()) return out;  // S_1 = R exactly
  const double alpha_m = sum_alpha(spec, 0, spec.m);
  out.log_k = log_tail_weights(spec) + log_gamma(spec.alpha_bar) - log_gamma(alpha_m);
  out.rho = -(spec.alpha_bar - alpha_m);
  return out;
}

TailAsymptotic tail_gumbel_plt1(const AggregateSpec& spec) {
  if (!(spec.p < 1.0) && spec.dim() > 1) throw RegimeError("tail_gumbel_plt1 requires p < 1");
  require_gumbel(spec, "tail_gumbel_plt1");
  if (spec.dim() == 1) return identity_tail(spec, spec.scale);
  if (spec.lambda.back() <= 0.0) {
    throw UnsupportedError("p < 1 requires every lambda_i > 0");
  }
  const SimplexTailGeometry geo = simplex_constant_recursion(spec);
  const double d = static_cast<double>(spec.dim());
  const double lt = geo.lambda_tilde();
  TailAsymptotic out = identity_tail(spec, spec.scale * lt);
  out.log_k = log_gamma(0.5 * (d + 1.0)) + std::log(geo.c_tilde()) +
              0.5 * (d - 1.0) * std::log(spec.p * lt);
  out.rho = -0.5 * (d - 1.0);
  return out;
}

TailAsymptotic tail_weibull(const AggregateSpec& spec) {
  if (spec.p != 1.0) throw RegimeError("tail_weibull requires p = 1");
  if (spec.radial.mda_class() != MdaClass::weibull) {
    throw RegimeError("tail_weibull requires a Weibull-class radial law, got " +
                      spec.radial.family_name());
  }
  TailAsymptotic out = identity_tail(spec, spec.scale);
  if (spec.m == spec.dim()) return out;
  const double gamma = spec.radial.weibull_index();
  const double alpha_m = sum_alpha(spec, 0, spec.m);
  const double rest = spec.alpha_bar - alpha_m;
  out.log_k = log_tail_weights(spec) + log_gamma(spec.alpha_bar) + log_gamma(gamma + 1.0) -
              log_gamma(alpha_m) - log_gamma(rest + gamma + 1.0);
  out.rho = rest;
  return out;
}

TailAsymptotic marginal_component_tail(const AggregateSpec& spec, std::size_t raw_index) {
  require_gumbel(spec, "marginal_component_tail");
  const auto it = std::find(spec.order.begin(), spec.order.end(), raw_index);
  if (it == spec.order.end()) throw DomainError("component index out of range");
  const auto k = static_cast<std::size_t>(it - spec.order.begin());
  TailAsymptotic out = identity_tail(spec, spec.scale * spec.lambda[k]);
  if (spec.lambda[k] == 0.0) {
    out.convention.divisor = spec.scale;
    out.log_k = -kInf;
    return out;
  }
  out.log_k = log_gamma(spec.alpha_bar) - log_gamma(spec.alpha[k]);
  out.rho = spec.alpha[k] - spec.alpha_bar;
  return out;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::a: return "a";
    case Regime::b: return "b";
    case Regime::c: return "c";
    case Regime::weibull: return "weibull";
    case Regime::degenerate: return "degenerate";
  }
  return "unknown";
}

RegimeInfo regime_classify(const AggregateSpec& spec) {
  const bool gumbel = spec.radial.mda_class() == MdaClass::gumbel;
  const bool big_jump = spec.p > 1.0;
  if (spec.dim() == 1) return {Regime::degenerate, big_jump};
  if (spec.p == 1.0) {
    if (spec.m == spec.dim()) return {Regime::degenerate, false};
    return {gumbel ? Regime::b : Regime::weibull, false};
  }
  if (!gumbel) {
    throw UnsupportedError("Weibull-class radial laws are supported only for p = 1");
  }
  if (spec.p > 1.0) return {Regime::a, true};
  if (spec.lambda.back() <= 0.0) {
    throw UnsupportedError("p < 1 with some lambda_i = 0 is not supported");
  }
  return {Regime::c, false};
}

TailAsymptotic tail_asymptotic(const AggregateSpec& spec) {
  switch (regime_classify(spec).regime) {
    case Regime::a: return tail_gumbel_pgt1(spec);
    case Regime::b: return tail_gumbel_peq1(spec);
    case Regime::c: return tail_gumbel_plt1(spec);
    case Regime::weibull: return tail_weibull(spec);
    case Regime::degenerate: return identity_tail(spec, spec.scale);
  }
  throw RegimeError("unclassified regime");
}

double invert_tail(const TailAsymptotic& tail, double log_target) {
  if (!(log_target < 0.0)) throw DomainError("tail inversion target must be below 1");
  auto f = [&](double x) { return tail.evaluate(x).log_value - log_target; };
  const double div = tail.convention.divisor;

  if (tail.convention.kind == ThresholdConvention::Kind::endpoint_gap) {
    // t in (0, div); the asymptotic increases as t falls
    auto g = [&](double t) { return f(t); };
    double lo = 0.0;
    double hi = div;
    boost::math::tools::eps_tolerance<double> tol(52);
    auto [a, b] = boost::math::tools::bisect(g, lo, hi, tol);
    return 0.5 * (a + b);
  }

  // power_root: search on log t
  auto h = [&](double y) { return f(div * std::exp(y)); };
  double lo = 0.0;
  double hi = 0.0;
  if (h(0.0) > 0.0) {
    hi = 1.0;
    while (h(hi) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e3) throw NumericError("tail inversion: no upper bracket");
    }
  } else {
    lo = -1.0;
    while (!(h(lo) > 0.0)) {
      hi = lo;
      lo *= 2.0;
      if (lo < -1e3) throw NumericError("tail inversion: no lower bracket");
    }
  }
  boost::math::tools::eps_tolerance<double> tol(52);
  auto [a, b] = boost::math::tools::bisect(h, lo, hi, tol);
  return div * std::exp(0.5 * (a + b));
}

VarEs var_es_asymptotic(const AggregateSpec& spec, double b) {
  if (!(b > 0.0 && b < 1.0)) throw DomainError("level b must lie in (0, 1)");
  if (spec.radial.has_finite_endpoint()) {
    throw UnsupportedError("VaR/ES asymptotics need an infinite upper endpoint");
  }
  require_gumbel(spec, "var_es_asymptotic");
  const TailAsymptotic tail = tail_asymptotic(spec);
  const double var = invert_tail(tail, std::log1p(-b));
  const double div = tail.convention.divisor;
  const double gap = div / spec.radial.power_scaling_wp(spec.p, var / div);
  return {var, gap, (1.0 - b) > 0.1};
}

}  // namespace dirtail
