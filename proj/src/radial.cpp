#include "dirtail/radial.hpp"

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "dirtail/errors.hpp"
#include "dirtail/specfun.hpp"

namespace dirtail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_param(double v, const char* family, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(std::string(family) + " parameter '" + name +
                          "' must be positive and finite");
  }
}

// Bracketed root of a decreasing function f on [lo, hi] with f(lo) > 0 > f(hi).
template <class F>
double solve_decreasing(F f, double lo, double hi) {
  std::uintmax_t max_iter = 300;
  boost::math::tools::eps_tolerance<double> tol(50);
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi), tol, max_iter);
  if (max_iter >= 300) throw NumericError("radial inversion did not converge");
  return 0.5 * (a + b);
}

}  // namespace

std::string to_string(MdaClass c) { return c == MdaClass::gumbel ? "gumbel" : "weibull"; }

RadialModel::RadialModel(RadialFamily family) : family_(family) {
  std::visit(Overloaded{
                 [&](const GammaLaw& g) {
                   require_param(g.shape, "gamma", "shape");
                   require_param(g.rate, "gamma", "rate");
                   log_norm_ = log_gamma(g.shape);
                 },
                 [](const WeibullTail& w) {
                   require_param(w.index, "weibulltail", "index");
                   require_param(w.scale, "weibulltail", "scale");
                 },
                 [&](const BetaLaw& b) {
                   require_param(b.a, "beta", "a");
                   require_param(b.b, "beta", "b");
                   log_norm_ = log_beta_function(b.a, b.b);
                 },
                 [](const UnitGumbel& u) { require_param(u.kappa, "unitgumbel", "kappa"); },
             },
             family_);
}

std::string RadialModel::family_name() const {
  return std::visit(Overloaded{
                        [](const GammaLaw&) { return std::string("gamma"); },
                        [](const WeibullTail&) { return std::string("weibulltail"); },
                        [](const BetaLaw&) { return std::string("beta"); },
                        [](const UnitGumbel&) { return std::string("unitgumbel"); },
                    },
                    family_);
}

double RadialModel::upper_endpoint() const { return has_finite_endpoint() ? 1.0 : kInf; }

bool RadialModel::has_finite_endpoint() const {
  return std::holds_alternative<BetaLaw>(family_) || std::holds_alternative<UnitGumbel>(family_);
}

MdaClass RadialModel::mda_class() const {
  return std::holds_alternative<BetaLaw>(family_) ? MdaClass::weibull : MdaClass::gumbel;
}

double RadialModel::weibull_index() const {
  if (const auto* b = std::get_if<BetaLaw>(&family_)) return b->b;
  throw UnsupportedError(family_name() + " radial law is not in the Weibull domain");
}

double RadialModel::log_survival(double u) const {
  if (std::isnan(u) || u < 0.0) {
    throw DomainError("radial survival requires u >= 0, got " + std::to_string(u));
  }
  if (u >= upper_endpoint()) return -kInf;
  return std::visit(Overloaded{
                        [&](const GammaLaw& g) { return log_gamma_q(g.shape, g.rate * u, log_norm_); },
                        [&](const WeibullTail& w) { return -w.scale * std::pow(u, w.index); },
                        [&](const BetaLaw& b) {
                          if (u == 0.0) return 0.0;
                          return log_incomplete_beta(b.b, b.a, 1.0 - u, u);
                        },
                        [&](const UnitGumbel& g) { return -g.kappa * u / (1.0 - u); },
                    },
                    family_);
}

double RadialModel::survival(double u) const { return std::exp(log_survival(u)); }

double RadialModel::log_survival_gap(double gap) const {
  if (!has_finite_endpoint()) {
    throw UnsupportedError("endpoint gap is undefined for an infinite upper endpoint");
  }
  if (std::isnan(gap) || gap < 0.0) throw DomainError("endpoint gap must be non-negative");
  if (gap == 0.0) return -kInf;
  if (gap >= 1.0) return 0.0;
  if (const auto* b = std::get_if<BetaLaw>(&family_)) {
    return log_incomplete_beta(b->b, b->a, gap, 1.0 - gap);
  }
  const double kappa = std::get<UnitGumbel>(family_).kappa;
  return -kappa * (1.0 - gap) / gap;
}

double RadialModel::cdf(double u) const { return -std::expm1(log_survival(u)); }

double RadialModel::scaling_w(double u) const {
  if (mda_class() != MdaClass::gumbel) {
    throw UnsupportedError("scaling function w is defined only for Gumbel-class radial laws; " +
                           family_name() + " is Weibull class");
  }
  if (!(u > 0.0 && u < upper_endpoint())) {
    throw DomainError("scaling_w requires 0 < u < x_F, got " + std::to_string(u));
  }
  return std::visit(Overloaded{
                        [](const GammaLaw& g) { return g.rate; },
                        [&](const WeibullTail& w) {
                          return w.scale * w.index * std::pow(u, w.index - 1.0);
                        },
                        [](const BetaLaw&) { return 0.0; },
                        [&](const UnitGumbel& g) { return g.kappa / ((1.0 - u) * (1.0 - u)); },
                    },
                    family_);
}

double RadialModel::power_scaling_wp(double p, double x) const {
  if (!(p > 0.0)) throw DomainError("power p must be positive");
  if (!(x > 0.0)) throw DomainError("power_scaling_wp requires x > 0");
  const double root = std::pow(x, 1.0 / p);
  if (!(root < upper_endpoint())) throw DomainError("power_scaling_wp requires x < x_F^p");
  return std::pow(x, 1.0 / p - 1.0) * scaling_w(root) / p;
}

double RadialModel::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("quantile level must lie in (0, 1), got " + std::to_string(q));
  }
  return inverse_log_survival(std::log1p(-q));
}

double RadialModel::inverse_log_survival(double log_s) const {
  if (std::isnan(log_s) || log_s > 0.0) {
    throw DomainError("log survival target must be <= 0");
  }
  if (log_s == 0.0) return 0.0;
  if (log_s == -kInf) return upper_endpoint();
  return std::visit(
      Overloaded{
          [&](const GammaLaw& g) {
            auto f = [&](double x) { return log_survival(x) - log_s; };
            double hi = (g.shape + 1.0) / g.rate;
            while (f(hi) >= 0.0) hi *= 2.0;
            return solve_decreasing(f, 0.0, hi);
          },
          [&](const WeibullTail& w) { return std::pow(-log_s / w.scale, 1.0 / w.index); },
          [&](const BetaLaw&) { return 1.0 - endpoint_gap_at_log_survival(log_s); },
          [&](const UnitGumbel& g) {
            const double ratio = -log_s / g.kappa;
            return ratio / (1.0 + ratio);
          },
      },
      family_);
}

double RadialModel::endpoint_gap_at_log_survival(double log_s) const {
  if (!has_finite_endpoint()) {
    throw UnsupportedError("endpoint gap is undefined for an infinite upper endpoint");
  }
  if (std::isnan(log_s) || log_s > 0.0) throw DomainError("log survival target must be <= 0");
  if (log_s == 0.0) return 1.0;
  if (log_s == -kInf) return 0.0;
  if (const auto* g = std::get_if<UnitGumbel>(&family_)) {
    return 1.0 / (1.0 - log_s / g->kappa);
  }
  // log F̄(1 - gap) increases in gap; solve on a log-gap scale.
  auto f = [&](double log_gap) { return log_s - log_survival_gap(std::exp(log_gap)); };
  double lo = -700.0;
  if (f(lo) <= 0.0) return std::exp(lo);
  return std::exp(solve_decreasing(f, lo, 0.0));
}

double RadialModel::mean() const {
  return std::visit(Overloaded{
                        [](const GammaLaw& g) { return g.shape / g.rate; },
                        [](const WeibullTail& w) {
                          return std::tgamma(1.0 + 1.0 / w.index) *
                                 std::pow(w.scale, -1.0 / w.index);
                        },
                        [](const BetaLaw& b) { return b.a / (b.a + b.b); },
                        [](const UnitGumbel& g) {
                          // int_0^inf e^{-k s} / (1 + s)^2 ds
                          return 1.0 - g.kappa * std::exp(g.kappa) *
                                           boost::math::expint(1, g.kappa);
                        },
                    },
                    family_);
}

double gumbel_ratio(const RadialModel& model, double x, double u) {
  const double shifted = u + x / model.scaling_w(u);
  return std::exp(model.log_survival(shifted) - model.log_survival(u));
}

double weibull_ratio(const RadialModel& model, double t, double gap) {
  if (!model.has_finite_endpoint()) {
    throw UnsupportedError("weibull_ratio needs a finite upper endpoint");
  }
  if (!(t > 0.0) || !(gap > 0.0)) throw DomainError("weibull_ratio needs t > 0 and gap > 0");
  return std::exp(model.log_survival_gap(t * gap) - model.log_survival_gap(gap));
}

double log_davis_resnick_ratio(const RadialModel& model, double mu, double c, double u) {
  if (!(c > 1.0)) throw DomainError("Davis-Resnick stretch c must exceed 1");
  const double lw = std::log(u * model.scaling_w(u));
  const double num = model.log_survival(c * u);
  if (num == -kInf) return -kInf;
  return mu * lw + num - model.log_survival(u);
}

std::vector<double> default_diagnostic_grid(const RadialModel& model, DiagnosticMode mode) {
  std::vector<double> grid;
  if (mode == DiagnosticMode::weibull_ratio) {
    for (int k = 1; k <= 12; ++k) grid.push_back(std::pow(10.0, -k));
    return grid;
  }
  for (int k = 0; k <= 20; ++k) {
    const double log_depth = -std::log(10.0) * std::pow(2.0, 0.5 * k);
    grid.push_back(model.inverse_log_survival(log_depth));
  }
  return grid;
}

std::vector<DiagnosticRow> mda_diagnostic(const RadialModel& model, DiagnosticMode mode,
                                          const DiagnosticParams& params,
                                          std::vector<double> grid) {
  switch (mode) {
    case DiagnosticMode::gumbel_ratio:
      if (model.mda_class() != MdaClass::gumbel) {
        throw UnsupportedError("gumbel_ratio diagnostic requires a Gumbel-class radial law");
      }
      break;
    case DiagnosticMode::weibull_ratio:
      if (!model.has_finite_endpoint()) {
        throw UnsupportedError("weibull_ratio diagnostic requires x_F = 1");
      }
      break;
    case DiagnosticMode::davis_resnick:
      if (!(params.c > 1.0)) throw DomainError("Davis-Resnick stretch c must exceed 1");
      if (model.mda_class() != MdaClass::gumbel) {
        throw UnsupportedError("davis_resnick diagnostic requires a Gumbel-class radial law");
      }
      break;
  }
  if (grid.empty()) grid = default_diagnostic_grid(model, mode);

  std::vector<DiagnosticRow> rows;
  rows.reserve(grid.size());
  for (double u : grid) {
    double log_ratio = 0.0;
    switch (mode) {
      case DiagnosticMode::gumbel_ratio: {
        const double shifted = u + params.x / model.scaling_w(u);
        log_ratio = model.log_survival(shifted) - model.log_survival(u);
        break;
      }
      case DiagnosticMode::weibull_ratio:
        log_ratio = model.log_survival_gap(params.t * u) - model.log_survival_gap(u);
        break;
      case DiagnosticMode::davis_resnick:
        log_ratio = log_davis_resnick_ratio(model, params.mu, params.c, u);
        break;
    }
    rows.push_back({u, std::exp(log_ratio), log_ratio});
  }
  return rows;
}

}  // namespace dirtail
