#pragma once

// Special functions and Beta-law tails used throughout the library.
//
// Every tail quantity has a log-scale twin: the probabilities of interest
// routinely sit between 1e-10 and 1e-60 and products of them underflow.

#include <cmath>
#include <limits>
#include <span>

namespace dirtail {

/// Natural log of a probability (or of an asymptotic tail value).
/// `log_value == -inf` encodes an exact zero.
struct LogProb {
  double log_value = -std::numeric_limits<double>::infinity();

  static LogProb from_value(double v) { return LogProb{std::log(v)}; }
  static LogProb zero() { return LogProb{}; }
  static LogProb one() { return LogProb{0.0}; }

  double value() const { return std::exp(log_value); }
  bool is_zero() const { return std::isinf(log_value) && log_value < 0; }

  friend LogProb operator*(LogProb a, LogProb b) {
    return LogProb{a.log_value + b.log_value};
  }
  friend LogProb operator/(LogProb a, LogProb b) {
    return LogProb{a.log_value - b.log_value};
  }
};

/// log(exp(a) + exp(b)) without overflow; -inf is the additive identity.
double log_add_exp(double a, double b);

/// log(sum_i exp(x_i)); returns -inf for an empty span or all -inf entries.
double log_sum_exp(std::span<const double> xs);

/// ln Gamma(a) for a > 0. Thread-safe (does not touch `signgam`).
double log_gamma(double a);

/// Gamma(a) / Gamma(b) via exp(ln Gamma(a) - ln Gamma(b)).
double gamma_ratio(double a, double b);

/// ln B(a, b).
double log_beta_function(double a, double b);

/// Log density of Beta(a, b) at x in (0, 1).
double log_beta_density(double a, double b, double x);
double beta_density(double a, double b, double x);

/// Log of the regularized incomplete beta I_x(a, b). The complement
/// `xc = 1 - x` is passed separately so callers near either endpoint keep
/// full relative precision.
double log_incomplete_beta(double a, double b, double x, double xc);

/// P(B > x) for B ~ Beta(a, b).
double beta_survival(double a, double b, double x);
double log_beta_survival(double a, double b, double x);

/// log P(B > 1 - gap); exact in `gap` for gaps far below machine epsilon.
double log_beta_survival_gap(double a, double b, double gap);

/// P(B^p > x) = P(B > x^(1/p)).
double beta_power_survival(double a, double b, double p, double x);

/// log P(B^p > 1 - gap).
double log_beta_power_survival_gap(double a, double b, double p, double gap);

/// log Q(a, x), Q the regularized upper incomplete gamma function.
double log_gamma_q(double a, double x);

/// Same, with ln Gamma(a) supplied by the caller (hot loops).
double log_gamma_q(double a, double x, double log_gamma_a);

/// log P(a, x), the regularized lower incomplete gamma function.
double log_gamma_p(double a, double x);

}  // namespace dirtail
