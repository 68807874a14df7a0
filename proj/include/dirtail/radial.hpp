#pragma once

// Radial laws F for the Dirichlet radius R.
//
// Each family has an analytic survival function and, in the Gumbel case,
// a closed-form scaling function w with F̄(u + x/w(u)) ~ e^{-x} F̄(u).
//
//   GammaLaw(a, r)       F̄(u) = Q(a, r u)          x_F = inf, w(u) = r
//   WeibullTail(tau, c)  F̄(u) = exp(-c u^tau)      x_F = inf, w(u) = c tau u^(tau-1)
//   BetaLaw(a, b)        F̄(u) = P(Beta(a,b) > u)   x_F = 1,   Weibull class, gamma = b
//   UnitGumbel(kappa)    F̄(u) = exp(k - k/(1-u))   x_F = 1,   w(u) = k / (1-u)^2

#include <string>
#include <variant>
#include <vector>

namespace dirtail {

struct GammaLaw {
  double shape;
  double rate;
};

struct WeibullTail {
  double index;
  double scale;
};

struct BetaLaw {
  double a;
  double b;
};

struct UnitGumbel {
  double kappa;
};

using RadialFamily = std::variant<GammaLaw, WeibullTail, BetaLaw, UnitGumbel>;

enum class MdaClass { gumbel, weibull };

std::string to_string(MdaClass c);

class RadialModel {
 public:
  /// Validates parameters; throws ValidationError on non-positive values.
  explicit RadialModel(RadialFamily family);

  static RadialModel gamma(double shape, double rate = 1.0) {
    return RadialModel(GammaLaw{shape, rate});
  }
  static RadialModel weibull_tail(double index, double scale) {
    return RadialModel(WeibullTail{index, scale});
  }
  static RadialModel beta(double a, double b) { return RadialModel(BetaLaw{a, b}); }
  static RadialModel unit_gumbel(double kappa) { return RadialModel(UnitGumbel{kappa}); }

  const RadialFamily& family() const { return family_; }
  std::string family_name() const;

  /// 1 or +inf.
  double upper_endpoint() const;
  bool has_finite_endpoint() const;
  MdaClass mda_class() const;

  /// Index gamma of regular variation at the endpoint (Weibull class only).
  double weibull_index() const;

  /// F̄(u); 0 for u >= x_F. Throws DomainError for u < 0.
  double survival(double u) const;
  double log_survival(double u) const;

  /// log F̄(x_F - gap) for finite-endpoint laws, exact in small gaps.
  double log_survival_gap(double gap) const;

  double cdf(double u) const;

  /// Gumbel scaling function w(u); throws UnsupportedError for Weibull class.
  double scaling_w(double u) const;

  /// w_p(x) = x^(1/p - 1) w(x^(1/p)) / p, the scaling function of R^p.
  double power_scaling_wp(double p, double x) const;

  /// inf{x : F(x) >= q} for q in (0, 1).
  double quantile(double q) const;

  /// Solves log F̄(x) = log_s for log_s < 0.
  double inverse_log_survival(double log_s) const;

  /// Finite endpoint only: the gap g with log F̄(1 - g) = log_s.
  double endpoint_gap_at_log_survival(double log_s) const;

  double mean() const;

 private:
  RadialFamily family_;
  double log_norm_ = 0.0;  // cached ln Gamma(shape) / ln B(a, b)
};

enum class DiagnosticMode { gumbel_ratio, weibull_ratio, davis_resnick };

struct DiagnosticParams {
  double x = 1.0;   // gumbel_ratio shift
  double t = 2.0;   // weibull_ratio scale
  double mu = 0.0;  // davis_resnick power
  double c = 2.0;   // davis_resnick stretch, must exceed 1
};

struct DiagnosticRow {
  double u;      // argument (gap to the endpoint for weibull_ratio)
  double ratio;
  double log_ratio;
};

/// F̄(u + x/w(u)) / F̄(u); tends to e^{-x} under the Gumbel condition.
double gumbel_ratio(const RadialModel& model, double x, double u);

/// F̄(1 - t g) / F̄(1 - g); tends to t^gamma in the Weibull domain.
double weibull_ratio(const RadialModel& model, double t, double gap);

/// log of (u w(u))^mu F̄(c u) / F̄(u); tends to -inf for x_F = inf.
double log_davis_resnick_ratio(const RadialModel& model, double mu, double c, double u);

/// Default grid approaching x_F. For weibull_ratio the values are endpoint
/// gaps 10^-1 ... 10^-12; otherwise points with F̄(u) = 10^{-2^{k/2}}.
std::vector<double> default_diagnostic_grid(const RadialModel& model, DiagnosticMode mode);

/// Evaluates the chosen ratio on `grid` (or the default grid when empty).
std::vector<DiagnosticRow> mda_diagnostic(const RadialModel& model, DiagnosticMode mode,
                                          const DiagnosticParams& params,
                                          std::vector<double> grid = {});

}  // namespace dirtail
