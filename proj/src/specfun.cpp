#include "dirtail/specfun.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <string>

#include "dirtail/errors.hpp"

namespace dirtail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// two ulps at 1; a stricter test can stall one ulp away from convergence
constexpr double kEps = 2.0 * std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be positive and finite, got " +
                      std::to_string(v));
  }
}

// Continued fraction for I_x(a, b) (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

// Series for log P(a, x), valid for x < a + 1.
double log_gamma_p_series(double a, double x, double lga) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int n = 1; n <= kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) {
      return std::log(sum) - x + a * std::log(x) - lga;
    }
  }
  throw NumericError("incomplete gamma series did not converge");
}

// Continued fraction for log Q(a, x), valid for x >= a + 1.
double log_gamma_q_fraction(double a, double x, double lga) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) {
      return -x + a * std::log(x) - lga + std::log(h);
    }
  }
  throw NumericError("incomplete gamma continued fraction did not converge");
}

}  // namespace

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == kNegInf) return kNegInf;
  if (a == std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return kNegInf;
  const double mx = *std::max_element(xs.begin(), xs.end());
  if (mx == kNegInf || std::isinf(mx)) return mx;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

double log_gamma(double a) {
  require_positive(a, "log_gamma argument");
  return boost::math::lgamma(a);
}

double gamma_ratio(double a, double b) {
  require_positive(a, "gamma_ratio numerator argument");
  require_positive(b, "gamma_ratio denominator argument");
  return std::exp(log_gamma(a) - log_gamma(b));
}

double log_beta_function(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double log_beta_density(double a, double b, double x) {
  require_positive(a, "Beta parameter a");
  require_positive(b, "Beta parameter b");
  if (!(x > 0.0 && x < 1.0)) {
    throw DomainError("Beta density evaluated outside (0, 1)");
  }
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
         log_beta_function(a, b);
}

double beta_density(double a, double b, double x) {
  return std::exp(log_beta_density(a, b, x));
}

double log_incomplete_beta(double a, double b, double x, double xc) {
  require_positive(a, "incomplete beta parameter a");
  require_positive(b, "incomplete beta parameter b");
  if (!(x >= 0.0 && xc >= 0.0) || std::isnan(x) || std::isnan(xc)) {
    throw DomainError("incomplete beta argument outside [0, 1]");
  }
  if (x == 0.0) return kNegInf;
  if (xc == 0.0) return 0.0;
  const double lx = x < 0.5 ? std::log(x) : std::log1p(-xc);
  const double lxc = xc < 0.5 ? std::log(xc) : std::log1p(-x);
  const double log_front = a * lx + b * lxc - log_beta_function(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return log_front + std::log(beta_continued_fraction(a, b, x)) - std::log(a);
  }
  const double tail =
      std::exp(log_front + std::log(beta_continued_fraction(b, a, xc)) - std::log(b));
  return std::log1p(-tail);
}

double log_beta_survival(double a, double b, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("beta_survival: x must lie in [0, 1], got " + std::to_string(x));
  }
  // P(B > x) = I_{1-x}(b, a)
  return log_incomplete_beta(b, a, 1.0 - x, x);
}

double beta_survival(double a, double b, double x) {
  return std::exp(log_beta_survival(a, b, x));
}

double log_beta_survival_gap(double a, double b, double gap) {
  if (!(gap >= 0.0 && gap <= 1.0)) {
    throw DomainError("beta survival gap must lie in [0, 1], got " + std::to_string(gap));
  }
  return log_incomplete_beta(b, a, gap, 1.0 - gap);
}

double beta_power_survival(double a, double b, double p, double x) {
  require_positive(p, "power p");
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("beta_power_survival: x must lie in [0, 1], got " + std::to_string(x));
  }
  return beta_survival(a, b, std::pow(x, 1.0 / p));
}

double log_beta_power_survival_gap(double a, double b, double p, double gap) {
  require_positive(p, "power p");
  if (!(gap >= 0.0 && gap <= 1.0)) {
    throw DomainError("beta power survival gap must lie in [0, 1]");
  }
  // B^p > 1 - gap  <=>  B > (1 - gap)^(1/p) = 1 - g'
  const double inner_gap = gap == 1.0 ? 1.0 : -std::expm1(std::log1p(-gap) / p);
  return log_beta_survival_gap(a, b, inner_gap);
}

double log_gamma_q(double a, double x) {
  require_positive(a, "incomplete gamma shape");
  if (std::isnan(x)) throw DomainError("incomplete gamma argument is NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return kNegInf;
  return log_gamma_q(a, x, log_gamma(a));
}

double log_gamma_q(double a, double x, double log_gamma_a) {
  if (std::isnan(x)) throw DomainError("incomplete gamma argument is NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return kNegInf;
  if (x < a + 1.0) return std::log1p(-std::exp(log_gamma_p_series(a, x, log_gamma_a)));
  // the fraction overflows near DBL_MAX; its correction is O(a/x) there anyway
  if (x > 1e150 && x > 1e10 * a) return -x + (a - 1.0) * std::log(x) - log_gamma_a;
  return log_gamma_q_fraction(a, x, log_gamma_a);
}

double log_gamma_p(double a, double x) {
  require_positive(a, "incomplete gamma shape");
  if (std::isnan(x)) throw DomainError("incomplete gamma argument is NaN");
  if (x <= 0.0) return kNegInf;
  if (std::isinf(x)) return 0.0;
  const double lga = log_gamma(a);
  if (x < a + 1.0) return log_gamma_p_series(a, x, lga);
  return std::log1p(-std::exp(log_gamma_q_fraction(a, x, lga)));
}

}  // namespace dirtail
