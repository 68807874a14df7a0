#include "dirtail/producttail.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dirtail/errors.hpp"

namespace dirtail {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

SaddleGeometry saddle_geometry(double c, double lam, double p) {
  require_positive(c, "saddle c");
  require_positive(lam, "saddle lam");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("saddle geometry needs p in (0, 1)");
  const double q = 1.0 / (1.0 - p);
  // log of (lam/c)^q, kept in logs so extreme ratios do not overflow
  const double lr = q * (std::log(lam) - std::log(c));
  const double theta = lr > 0.0 ? std::exp(-lr) / (1.0 + std::exp(-lr)) : 1.0 / (1.0 + std::exp(lr));
  const double one_minus = lr > 0.0 ? 1.0 / (1.0 + std::exp(-lr)) : std::exp(lr) / (1.0 + std::exp(lr));
  const double mx = std::max(std::log(c), std::log(lam)) * q;
  const double theta_tilde =
      std::exp((1.0 - p) * (mx + std::log(std::exp(q * std::log(c) - mx) +
                                          std::exp(q * std::log(lam) - mx))));
  const double curv = p * (1.0 - p) *
                      (std::pow(theta, p - 2.0) * c + lam * std::pow(one_minus, p - 2.0));
  return {theta, theta_tilde, curv, c, lam, p};
}

double saddle_h(const SaddleGeometry& g, double x) {
  return std::pow(x, g.p) * g.c + g.lam * std::pow(1.0 - x, g.p);
}

double saddle_h_prime(const SaddleGeometry& g, double x) {
  return g.p * (std::pow(x, g.p - 1.0) * g.c - g.lam * std::pow(1.0 - x, g.p - 1.0));
}

double saddle_h_second(const SaddleGeometry& g, double x) {
  return g.p * (g.p - 1.0) *
         (std::pow(x, g.p - 2.0) * g.c + g.lam * std::pow(1.0 - x, g.p - 2.0));
}

double beta_power_tail_asym(double a, double b, double p, double u) {
  require_positive(a, "Beta parameter a");
  require_positive(b, "Beta parameter b");
  require_positive(p, "power p");
  if (!(u > 0.0 && u < 1.0)) throw DomainError("beta_power_tail_asym needs u in (0, 1)");
  return std::exp(log_gamma(a + b) - b * std::log(p) - log_gamma(a) - log_gamma(b + 1.0) +
                  b * std::log(u));
}

LogProb product_tail_gumbel(double beta, const SlowlyVarying& L, const RadialModel& y, double u) {
  if (!(beta >= 0.0)) throw DomainError("S tail index beta must be >= 0");
  if (y.mda_class() != MdaClass::gumbel) {
    throw RegimeError("product_tail_gumbel requires a Gumbel-class Y; got " + y.family_name());
  }
  const double v = u * y.scaling_w(u);
  const double l = std::holds_alternative<double>(L) ? std::get<double>(L)
                                                      : std::get<std::function<double(double)>>(L)(v);
  if (!(l > 0.0)) throw DomainError("slowly varying factor must be positive");
  LogProb out;
  out.log_value = log_gamma(beta + 1.0) + std::log(l) - beta * std::log(v) + y.log_survival(u);
  return out;
}

LogProb product_tail_weibull(double beta, double gamma, double lam, LogProb s_tail,
                             LogProb y_tail) {
  if (!(beta >= 0.0) || !(gamma >= 0.0)) throw DomainError("tail indices must be >= 0");
  if (!(lam < 1.0)) throw DomainError("shift lam must be < 1");
  LogProb out;
  out.log_value = gamma * std::log1p(-lam) + log_gamma(beta + 1.0) + log_gamma(gamma + 1.0) -
                  log_gamma(beta + gamma + 1.0) + s_tail.log_value + y_tail.log_value;
  return out;
}

double mixture_tail_constant_c(double g_theta, const SaddleGeometry& geom) {
  if (!(g_theta > 0.0)) throw DomainError("mixing density at theta must be positive");
  return std::pow(2.0, 1.5) * g_theta / std::sqrt(geom.curvature);
}

double mixture_tail_constant_d(double g_theta, const SaddleGeometry& geom, double gamma) {
  if (gamma < 0.0 || std::isnan(gamma)) throw DomainError("index gamma must be >= 0");
  if (gamma == 0.0) return mixture_tail_constant_c(g_theta, geom);
  if (!(g_theta > 0.0)) throw DomainError("mixing density at theta must be positive");
  const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
  return sqrt_2pi * g_theta / std::sqrt(geom.curvature) *
         std::exp(log_gamma(gamma + 1.0) - log_gamma(gamma + 1.5) -
                  gamma * geom.p * std::log(geom.theta));
}

}  // namespace dirtail
