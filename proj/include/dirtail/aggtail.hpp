#pragma once

// Tail asymptotics of S_p = sum_i lambda_i X_i^p for a Dirichlet vector X = R U.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dirtail/radial.hpp"
#include "dirtail/specfun.hpp"

namespace dirtail {

struct AggregateSpec {
  std::vector<double> alpha;   // sorted jointly with lambda
  std::vector<double> lambda;  // non-increasing, lambda[0] == 1
  std::vector<std::size_t> order;  // order[k] = raw index of sorted entry k
  double p = 1.0;
  RadialModel radial = RadialModel::gamma(1.0);
  double scale = 1.0;  // max raw weight; raw threshold t maps to t / scale
  std::size_t m = 1;   // multiplicity of the top weight
  double alpha_hat = 0.0;
  std::size_t m_star = 1;
  double alpha_bar = 0.0;
  double tolerance = 0.0;

  std::size_t dim() const { return alpha.size(); }
};

/// Sorts (alpha, lambda) by descending lambda (stable), normalises lambda by
/// its maximum and computes m, alpha_hat and m_star. `tol` is an absolute
/// tolerance for counting weights equal to 1.
AggregateSpec validate_spec(std::span<const double> alpha, std::span<const double> lambda,
                            double p, const RadialModel& radial, double tol = 0.0);

/// (sum lambda_i^{1/(1-p)})^{1-p}.
double lambda_tilde(std::span<const double> lambda, double p);

struct ThresholdConvention {
  enum class Kind { power_root, endpoint_gap };
  Kind kind = Kind::power_root;
  double divisor = 1.0;
  double p = 1.0;

  /// power_root: u = (t/divisor)^{1/p}; endpoint_gap: u = 1 - (t/divisor)^{1/p}.
  double map(double t) const;
  std::string describe() const;
};

struct TailAsymptotic {
  enum class Base { gumbel, weibull };

  double log_k = 0.0;
  double rho = 0.0;
  Base base = Base::gumbel;
  ThresholdConvention convention;
  RadialModel radial = RadialModel::gamma(1.0);

  /// gumbel:  K (u w(u))^rho F̄(u)
  /// weibull: K u^rho F̄(1 - u)
  LogProb evaluate(double t) const;
  std::string to_json() const;
};

struct SimplexLevel {
  std::size_t k;
  double lambda_tilde;
  double theta;
  double curvature;
  double c_tilde;
  double rv_index;  // (k-1)/2
};

struct SimplexTailGeometry {
  std::vector<SimplexLevel> levels;  // k = 2..d
  double lambda_tilde() const { return levels.back().lambda_tilde; }
  double c_tilde() const { return levels.back().c_tilde; }
};

/// Laplace-method recursion for P(sum lambda_i U_i^p > lambda_tilde - u) ~ C u^{(d-1)/2}.
/// Entries are processed in the order given.
SimplexTailGeometry simplex_constant_recursion(std::span<const double> alpha,
                                               std::span<const double> lambda, double p);
SimplexTailGeometry simplex_constant_recursion(const AggregateSpec& spec);

TailAsymptotic tail_gumbel_pgt1(const AggregateSpec& spec);
TailAsymptotic tail_gumbel_peq1(const AggregateSpec& spec);
TailAsymptotic tail_gumbel_plt1(const AggregateSpec& spec);
TailAsymptotic tail_weibull(const AggregateSpec& spec);

/// Tail of lambda_i X_i^p, i a raw (unsorted) index.
TailAsymptotic marginal_component_tail(const AggregateSpec& spec, std::size_t raw_index);

enum class Regime { a, b, c, weibull, degenerate };
std::string to_string(Regime r);

struct RegimeInfo {
  Regime regime;
  bool single_big_jump;
};

RegimeInfo regime_classify(const AggregateSpec& spec);

/// Dispatches on regime_classify.
TailAsymptotic tail_asymptotic(const AggregateSpec& spec);

struct VarEs {
  double var;
  double es_minus_var;
  bool accuracy_warning;
};

VarEs var_es_asymptotic(const AggregateSpec& spec, double b);

/// Solves tail.evaluate(t) = exp(log_target) for t.
double invert_tail(const TailAsymptotic& tail, double log_target);

}  // namespace dirtail
