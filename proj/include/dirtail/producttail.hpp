#pragma once

// Tails of products S*Y and of Beta mixtures B^p c + lam (1-B)^p.

#include <functional>
#include <variant>

#include "dirtail/radial.hpp"
#include "dirtail/specfun.hpp"

namespace dirtail {

/// Maximiser of h(x) = x^p c + lam (1-x)^p on (0, 1) for p in (0, 1).
struct SaddleGeometry {
  double theta;        // weight on c at the maximum
  double theta_tilde;  // h(theta), the upper endpoint of the mixture
  double curvature;    // |h''(theta)|
  double c;
  double lam;
  double p;
};

SaddleGeometry saddle_geometry(double c, double lam, double p);

/// h(x) = x^p c + lam (1-x)^p and its first two derivatives.
double saddle_h(const SaddleGeometry& g, double x);
double saddle_h_prime(const SaddleGeometry& g, double x);
double saddle_h_second(const SaddleGeometry& g, double x);

/// Leading term of P(B^p > 1 - u), B ~ Beta(a, b), as u -> 0.
double beta_power_tail_asym(double a, double b, double p, double u);

/// Slowly varying part of P(S > 1 - 1/v) ~ L(v) v^{-beta}.
using SlowlyVarying = std::variant<double, std::function<double(double)>>;

/// Gamma(beta+1) P(S > 1 - 1/(u w(u))) F̄_Y(u), with the S tail taken as L(v) v^{-beta}.
LogProb product_tail_gumbel(double beta, const SlowlyVarying& L, const RadialModel& y, double u);

/// (1-lam)^gamma Gamma(beta+1) Gamma(gamma+1) / Gamma(beta+gamma+1) * s_tail * y_tail.
LogProb product_tail_weibull(double beta, double gamma, double lam, LogProb s_tail,
                             LogProb y_tail);

/// Prefactor of sqrt(u) in P(B^p c + lam (1-B)^p > theta_tilde - u).
double mixture_tail_constant_c(double g_theta, const SaddleGeometry& geom);

/// Same, mixed with an independent X regularly varying at c with index gamma.
/// gamma == 0 falls back to mixture_tail_constant_c.
double mixture_tail_constant_d(double g_theta, const SaddleGeometry& geom, double gamma);

}  // namespace dirtail
