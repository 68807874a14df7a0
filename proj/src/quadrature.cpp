#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "dirtail/errors.hpp"
#include "dirtail/montecarlo.hpp"
#include "dirtail/producttail.hpp"
#include "mc_internal.hpp"

namespace dirtail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelTol = 1e-10;

using Integrator = boost::math::quadrature::tanh_sinh<double>;

// Nested integrals use separate integrator objects.
Integrator& integrator(int level) {
  static thread_local Integrator outer;
  static thread_local Integrator inner;
  return level == 0 ? outer : inner;
}

// Integral of f(x, 1 - x) over (a, b), split at the interior points in
// `cuts`. A piece ending at 1 is integrated in y = 1 - x so abscissas near
// the endpoint keep their resolution.
template <class F>
double integrate_split(F f, double a, double b, std::vector<double> cuts, int level = 0) {
  Integrator& ts = integrator(level);
  cuts.insert(cuts.begin(), a);
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k + 1] > cuts[k])) continue;
    double err = 0.0;
    double l1 = 0.0;
    if (cuts[k + 1] == 1.0) {
      auto g = [&](double y) { return f(1.0 - y, y); };
      total += ts.integrate(g, 0.0, 1.0 - cuts[k], kRelTol, &err, &l1);
    } else {
      auto g = [&](double x) { return f(x, 1.0 - x); };
      total += ts.integrate(g, cuts[k], cuts[k + 1], kRelTol, &err, &l1);
    }
    // Integrands are scaled by the tail at the simplex maximum, so an absolute
    // floor of 1e-12 is far below any integral this routine is asked for. A
    // sliver whose whole L1 mass is under the floor cannot matter, whatever its
    // error estimate says. Inner integrals are not checked: next to the support
    // edge they carry cancellation noise in z - t that inflates their own error
    // estimate, and whatever noise survives shows up in the outer estimate.
    if (level == 0 && std::min(err, l1) > 1e-6 * l1 + 1e-12) {
      throw NumericError("quadrature did not reach its tolerance");
    }
  }
  return total;
}

// Beta log density at x with the complement xc = 1 - x supplied.
double safe_log_beta_density(double a, double b, double x, double xc) {
  if (!(x > 0.0 && xc > 0.0)) return -kInf;
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log(xc) - log_beta_function(a, b);
}

std::vector<double> saddle_cut(double c, double lam, double p) {
  if (p < 1.0 && c > 0.0 && lam > 0.0) return {saddle_geometry(c, lam, p).theta};
  return {};
}

// Points in (0, 1) where g crosses `level`; g is unimodal in every use, so a
// coarse scan finds each crossing.
template <class G>
std::vector<double> level_crossings(G g, double level) {
  constexpr int kGrid = 64;
  std::vector<double> out;
  double x0 = 0.0;
  double g0 = g(x0) - level;
  for (int k = 1; k <= kGrid; ++k) {
    const double x1 = static_cast<double>(k) / kGrid;
    const double g1 = g(x1) - level;
    if ((g0 < 0.0) != (g1 < 0.0)) {
      boost::math::tools::eps_tolerance<double> tol(50);
      auto [lo, hi] = boost::math::tools::bisect([&](double x) { return g(x) - level; }, x0, x1, tol);
      out.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    g0 = g1;
  }
  return out;
}

std::vector<double> merge_cuts(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

}  // namespace

Estimate quadrature_tail(const AggregateSpec& spec, double t) {
  const std::size_t d = spec.dim();
  if (d > 3) throw UnsupportedError("quadrature_tail supports d <= 3");
  Estimate e;
  e.method = Method::quadrature;
  if (!(t > 0.0)) {
    e.p_hat = 1.0;
    e.log_p_hat = 0.0;
    return e;
  }
  const double tn = t / spec.scale;
  const double p = spec.p;
  const auto& R = spec.radial;
  const double log_ref = detail::conditional_log_tail(R, tn, simplex_max(spec), p);
  if (log_ref == -kInf) return e;

  const auto& a = spec.alpha;
  const auto& l = spec.lambda;
  auto pw = [p](double x) { return p == 1.0 ? x : std::pow(x, p); };

  double integral = 0.0;
  if (d == 1) {
    integral = 1.0;
  } else if (d == 2) {
    auto f = [&](double b, double bc) {
      const double lb = safe_log_beta_density(a[0], a[1], b, bc);
      if (lb == -kInf) return 0.0;
      const double ls = detail::conditional_log_tail(R, tn, l[0] * pw(b) + l[1] * pw(bc), p);
      if (ls == -kInf) return 0.0;
      return std::exp(ls + lb - log_ref);
    };
    auto cuts = saddle_cut(l[0], l[1], p);
    if (R.has_finite_endpoint()) {
      // the integrand vanishes where z(b) <= tn / x_F^p
      cuts = merge_cuts(cuts, level_crossings([&](double b) { return l[0] * pw(b) + l[1] * pw(1.0 - b); }, tn));
    }
    integral = integrate_split(f, 0.0, 1.0, cuts);
  } else {
    // U = (b v, b (1 - v), 1 - b), b ~ Beta(a1 + a2, a3), v ~ Beta(a1, a2)
    const auto inner_cut = saddle_cut(l[0], l[1], p);
    const double top2 = p < 1.0 && l[1] > 0.0 ? saddle_geometry(l[0], l[1], p).theta_tilde : 1.0;
    auto outer_cut = saddle_cut(top2, l[2], p);
    const bool finite = R.has_finite_endpoint();
    if (finite) {
      const double top = p < 1.0 ? top2 : std::max(l[0], l[1]);
      outer_cut = merge_cuts(outer_cut,
                             level_crossings([&](double b) { return top * pw(b) + l[2] * pw(1.0 - b); }, tn));
    }
    auto outer = [&](double b, double bc) {
      const double lb = safe_log_beta_density(a[0] + a[1], a[2], b, bc);
      if (lb == -kInf) return 0.0;
      const double bp = pw(b);
      const double rest = l[2] * pw(bc);
      auto inner = [&](double v, double vc) {
        const double lv = safe_log_beta_density(a[0], a[1], v, vc);
        if (lv == -kInf) return 0.0;
        const double z = bp * (l[0] * pw(v) + l[1] * pw(vc)) + rest;
        const double ls = detail::conditional_log_tail(R, tn, z, p);
        if (ls == -kInf) return 0.0;
        return std::exp(ls + lv + lb - log_ref);
      };
      if (!finite) return integrate_split(inner, 0.0, 1.0, inner_cut, 1);
      const auto cuts = merge_cuts(
          inner_cut, level_crossings([&](double v) { return bp * (l[0] * pw(v) + l[1] * pw(1.0 - v)) + rest; }, tn));
      return integrate_split(inner, 0.0, 1.0, cuts, 1);
    };
    integral = integrate_split(outer, 0.0, 1.0, outer_cut);
  }
  if (!(integral > 0.0)) return e;
  e.log_p_hat = log_ref + std::log(integral);
  e.p_hat = std::exp(e.log_p_hat);
  return e;
}

Norming norming_constants(const AggregateSpec& spec, double n, NormingSource source) {
  if (!(n >= 2.0)) throw DomainError("norming constants need n >= 2");
  if (spec.radial.mda_class() != MdaClass::gumbel) {
    throw RegimeError("norming constants need a Gumbel-class radial law");
  }
  const TailAsymptotic tail = tail_asymptotic(spec);
  const double target = -std::log(n);
  double b = 0.0;
  if (source == NormingSource::asymptotic) {
    b = invert_tail(tail, target);
  } else {
    auto f = [&](double y) { return quadrature_tail(spec, std::exp(y)).log_p_hat - target; };
    double lo = std::log(threshold_at_depth(spec, 1.0 / n));
    double hi = lo;
    double step = 0.25;
    while (f(lo) <= 0.0) {
      lo -= step;
      step *= 2.0;
      if (step > 1e3) throw NumericError("norming inversion: no lower bracket");
    }
    step = 0.25;
    while (f(hi) > 0.0) {
      hi += step;
      step *= 2.0;
      if (step > 1e3) throw NumericError("norming inversion: no upper bracket");
    }
    boost::math::tools::eps_tolerance<double> tol(50);
    auto [x0, x1] = boost::math::tools::bisect(f, lo, hi, tol);
    b = std::exp(0.5 * (x0 + x1));
  }
  const double div = tail.convention.divisor;
  return {div / spec.radial.power_scaling_wp(spec.p, b / div), b};
}

}  // namespace dirtail
