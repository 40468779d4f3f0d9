#include "reserve/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace reserve::utility {

namespace {

constexpr double kExpClamp = 700.0;

// exp/expm1 with the exponent clamped to +-700; keeps trial evaluations
// finite. True values beyond the clamp are not representable in doubles.
double stable_exp(double t) {
  return std::exp(std::clamp(t, -kExpClamp, kExpClamp));
}

double stable_expm1(double t) {
  return std::expm1(std::clamp(t, -kExpClamp, kExpClamp));
}

void check_index(const std::vector<double>& schedule, std::size_t n) {
  if (n >= schedule.size())
    throw std::out_of_range("family index out of range");
}

void check_schedule(const std::vector<double>& schedule) {
  if (schedule.empty())
    throw std::invalid_argument("utility schedule must be nonempty");
  for (double a : schedule)
    if (!(a > 0.0) || !std::isfinite(a))
      throw std::invalid_argument("risk-aversion scale must be positive");
}

// Log-space exponents of the power family pieces. The x <= 0 branch uses
// the +2 curvature exponent that makes U'' continuous at 0.
double pow_value_exp(double a, double x) {
  return x > 0.0 ? -a * std::log1p(x) : (a + 2.0) * std::log1p(-x);
}
double pow_marginal_exp(double a, double x) {
  return x > 0.0 ? -(a + 1.0) * std::log1p(x) : (a + 1.0) * std::log1p(-x);
}
double pow_curvature_exp(double a, double x) {
  return x > 0.0 ? -(a + 2.0) * std::log1p(x) : a * std::log1p(-x);
}
double pow_value_coef(double a, double x) { return x > 0.0 ? a : a + 2.0; }

}  // namespace

UtilityFamily UtilityFamily::exponential(std::vector<double> schedule) {
  check_schedule(schedule);
  UtilityFamily f;
  f.kind_ = Kind::exponential;
  f.schedule_ = std::move(schedule);
  return f;
}

UtilityFamily UtilityFamily::power(std::vector<double> schedule) {
  check_schedule(schedule);
  UtilityFamily f;
  f.kind_ = Kind::power;
  f.schedule_ = std::move(schedule);
  return f;
}

UtilityFamily UtilityFamily::custom(std::vector<double> schedule, Evaluator u,
                                    Evaluator du, Evaluator d2u) {
  check_schedule(schedule);
  if (!u || !du || !d2u)
    throw std::invalid_argument("custom family requires U, U', U''");
  UtilityFamily f;
  f.kind_ = Kind::custom;
  f.schedule_ = std::move(schedule);
  f.shift_.assign(f.schedule_.size(), 0.0);
  f.scale_.assign(f.schedule_.size(), 1.0);
  f.u_ = std::move(u);
  f.du_ = std::move(du);
  f.d2u_ = std::move(d2u);
  return f;
}

double UtilityFamily::value(std::size_t n, double x) const {
  check_index(schedule_, n);
  const double a = schedule_[n];
  switch (kind_) {
    case Kind::exponential: {
      // Normalization at z recenters exactly: (U - U(z))/U'(z) = U(. - z).
      const double u = x - norm_z_.value_or(0.0);
      return -stable_expm1(-a * u) / a;
    }
    case Kind::power: {
      if (!norm_z_)
        return -stable_expm1(pow_value_exp(a, x)) / pow_value_coef(a, x);
      const double z = *norm_z_;
      const double b = a + 2.0;
      const bool xp = x > 0.0, zp = z > 0.0;
      if (xp && zp)  // same branch: single expm1 of the log ratio
        return -(1.0 + z) / a *
               stable_expm1(a * (std::log1p(z) - std::log1p(x)));
      if (!xp && !zp)
        return -(1.0 - z) / b *
               stable_expm1(b * (std::log1p(-x) - std::log1p(-z)));
      if (xp) {
        // x > 0 >= z: U(x)/s plus the positive constant -U(z)/s; both terms
        // keep their sign, no cancellation.
        double inv_s = stable_exp(-(a + 1.0) * std::log1p(-z));
        double ux_over_s = -stable_expm1(-a * std::log1p(x)) * inv_s / a;
        double const_term = ((1.0 - z) - inv_s) / b;
        return ux_over_s + const_term;
      }
      // x <= 0 < z: both contributions are <= 0; exponents are combined
      // before exponentiating so nothing overflows spuriously.
      double e_s = (a + 1.0) * std::log1p(z);  // ln of 1/s
      double big = stable_exp(pow_value_exp(a, x) + e_s);
      double mid = stable_exp(e_s);
      return -(big - mid) / b - (mid - (1.0 + z)) / a;
    }
    case Kind::custom:
      return (u_(a, x) - shift_[n]) / scale_[n];
  }
  return 0.0;  // unreachable
}

double UtilityFamily::marginal(std::size_t n, double x) const {
  check_index(schedule_, n);
  const double a = schedule_[n];
  switch (kind_) {
    case Kind::exponential:
      return stable_exp(-a * (x - norm_z_.value_or(0.0)));
    case Kind::power: {
      double e = pow_marginal_exp(a, x);
      if (norm_z_) e -= pow_marginal_exp(a, *norm_z_);
      return stable_exp(e);
    }
    case Kind::custom:
      return du_(a, x) / scale_[n];
  }
  return 0.0;
}

double UtilityFamily::curvature(std::size_t n, double x) const {
  check_index(schedule_, n);
  const double a = schedule_[n];
  switch (kind_) {
    case Kind::exponential:
      return -a * stable_exp(-a * (x - norm_z_.value_or(0.0)));
    case Kind::power: {
      double e = pow_curvature_exp(a, x);
      if (norm_z_) e -= pow_marginal_exp(a, *norm_z_);
      return -(a + 1.0) * stable_exp(e);
    }
    case Kind::custom:
      return d2u_(a, x) / scale_[n];
  }
  return 0.0;
}

bool UtilityFamily::evaluation_clamped(std::size_t n, double x) const {
  check_index(schedule_, n);
  const double a = schedule_[n];
  switch (kind_) {
    case Kind::exponential:
      return -a * (x - norm_z_.value_or(0.0)) >= kExpClamp;
    case Kind::power: {
      // Only positive exponents saturate the guard.
      if (!norm_z_)
        return pow_value_exp(a, x) >= kExpClamp;
      const double z = *norm_z_;
      if ((x > 0.0) == (z > 0.0)) {
        double e = (x > 0.0)
                       ? a * (std::log1p(z) - std::log1p(x))
                       : (a + 2.0) * (std::log1p(-x) - std::log1p(-z));
        return e >= kExpClamp;
      }
      if (x > 0.0)  // z <= 0 < x: all exponents nonpositive
        return false;
      return pow_value_exp(a, x) + (a + 1.0) * std::log1p(z) >= kExpClamp;
    }
    case Kind::custom:
      return false;
  }
  return false;
}

std::vector<std::size_t> full_schedule(const UtilityFamily& family) {
  std::vector<std::size_t> idx(family.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

double risk_aversion(const UtilityFamily& family, std::size_t n, double x) {
  const double a = family.param(n);
  switch (family.kind_) {
    case UtilityFamily::Kind::exponential:
      return a;
    case UtilityFamily::Kind::power:
      // -U''/U' in log space; the raw ratio overflows doubles for large
      // alpha even though the quotient is tame. Unchanged by normalization.
      return x > 0.0 ? (a + 1.0) / (1.0 + x) : (a + 1.0) / (1.0 - x);
    case UtilityFamily::Kind::custom: {
      double du = family.marginal(n, x);
      if (!(du > 0.0)) {
        std::ostringstream os;
        os << "nonpositive marginal U'(" << x << ") = " << du
           << " at family index " << n;
        throw std::invalid_argument(os.str());
      }
      return -family.curvature(n, x) / du;
    }
  }
  return 0.0;  // unreachable
}

namespace {

// Closed-form conjugates of the raw built-in families.
double conjugate_closed_raw(UtilityFamily::Kind kind, double a, double y) {
  if (kind == UtilityFamily::Kind::exponential)
    return (y * std::log(y) + 1.0 - y) / a;
  const double b = a + 2.0;
  if (y > 1.0)
    return 1.0 / b - y + (1.0 - 1.0 / b) * std::pow(y, b / (a + 1.0));
  return 1.0 / a + y - (1.0 + 1.0 / a) * std::pow(y, a / (a + 1.0));
}

// Conjugate of the power family normalized at z, expanded analytically so
// that no intermediate carries the (1 +- z)^(alpha+1) scale unless the true
// value does. Branch boundary: s*y = 1 with s = U'(z), decided in logs.
double conjugate_power_normalized(double a, double z, double y) {
  const double b = a + 2.0;
  const double p = b / (a + 1.0);  // exponent of the y > kink branch
  const double q = a / (a + 1.0);
  if (z > 0.0) {
    const double w = 1.0 + z;
    double log_sy = std::log(y) - (a + 1.0) * std::log1p(z);
    if (log_sy <= 0.0)
      return w / a + y - (1.0 + 1.0 / a) * w * std::pow(y, q);
    double w_pow = stable_exp((a + 1.0) * std::log1p(z));
    return w / a - 2.0 * w_pow / (a * b) - y +
           (1.0 - 1.0 / b) * std::pow(y, p) / w;
  }
  const double w = 1.0 - z;
  double log_sy = std::log(y) + (a + 1.0) * std::log1p(-z);
  if (log_sy > 0.0)
    return w / b - y + (1.0 - 1.0 / b) * w * std::pow(y, p);
  double w_pow = stable_exp(-(a + 1.0) * std::log1p(-z));
  return 2.0 * w_pow / (a * b) + w / b + y -
         (1.0 + 1.0 / a) * std::pow(y, q) / w;
}

}  // namespace

double conjugate(const UtilityFamily& family, std::size_t n, double y) {
  if (!(y > 0.0))
    throw std::invalid_argument("conjugate requires y > 0");
  const double a = family.param(n);
  switch (family.kind_) {
    case UtilityFamily::Kind::exponential: {
      // Recentring shifts the conjugate by -z*y.
      double v = conjugate_closed_raw(family.kind_, a, y);
      return family.norm_z_ ? v - *family.norm_z_ * y : v;
    }
    case UtilityFamily::Kind::power:
      return family.norm_z_
                 ? conjugate_power_normalized(a, *family.norm_z_, y)
                 : conjugate_closed_raw(family.kind_, a, y);
    case UtilityFamily::Kind::custom:
      return conjugate_numeric(family, n, y);
  }
  return 0.0;  // unreachable
}

namespace {

// Bracketing + bisection on the (strictly decreasing) marginal, independent
// of the closed-form inverses.
double inverse_marginal_numeric(const UtilityFamily& family, std::size_t n,
                                double y) {
  double lo = -1.0, hi = 1.0;
  for (int k = 0; k < 80 && family.marginal(n, hi) > y; ++k) hi *= 2.0;
  for (int k = 0; k < 80 && family.marginal(n, lo) < y; ++k) lo *= 2.0;
  double flo = family.marginal(n, lo), fhi = family.marginal(n, hi);
  if (!(flo >= y && y >= fhi)) {
    std::ostringstream os;
    os << "y = " << y << " outside attainable marginal range [" << fhi << ", "
       << flo << "] at family index " << n;
    throw std::invalid_argument(os.str());
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    double f = family.marginal(n, mid);
    if (std::fabs(f - y) <= 1e-10 * std::max(1.0, y) &&
        (hi - lo) <= 1e-12 * std::max(1.0, std::fabs(mid)))
      return mid;
    if (f >= y)
      lo = mid;
    else
      hi = mid;
  }
  return mid;
}

}  // namespace

double conjugate_numeric(const UtilityFamily& family, std::size_t n,
                         double y) {
  if (!(y > 0.0))
    throw std::invalid_argument("conjugate requires y > 0");
  double x = inverse_marginal_numeric(family, n, y);
  return family.value(n, x) - x * y;
}

double conjugate_limit_at_zero(const UtilityFamily& family, std::size_t n) {
  const double a = family.param(n);
  switch (family.kind_) {
    case UtilityFamily::Kind::exponential:
      return 1.0 / a;  // sup is invariant under the recentring
    case UtilityFamily::Kind::power: {
      if (!family.norm_z_) return 1.0 / a;
      const double b = a + 2.0;
      const double z = *family.norm_z_;
      if (z > 0.0) return (1.0 + z) / a;
      double w_pow = stable_exp(-(a + 1.0) * std::log1p(-z));
      return 2.0 * w_pow / (a * b) + (1.0 - z) / b;
    }
    case UtilityFamily::Kind::custom:
      return conjugate_numeric(family, n, 1e-10);
  }
  return 0.0;  // unreachable
}

double inverse_marginal(const UtilityFamily& family, std::size_t n, double y) {
  if (!(y > 0.0))
    throw std::invalid_argument("inverse_marginal requires y > 0");
  const double a = family.param(n);
  switch (family.kind_) {
    case UtilityFamily::Kind::exponential:
      return family.norm_z_.value_or(0.0) - std::log(y) / a;
    case UtilityFamily::Kind::power: {
      // Solve U'(x) = y * U'(z) in logs; branch decided by the sign of
      // ln y + marginal-exponent(z).
      double t = std::log(y);
      if (family.norm_z_) t += pow_marginal_exp(a, *family.norm_z_);
      if (t <= 0.0) return std::expm1(-t / (a + 1.0));
      return -std::expm1(t / (a + 1.0));
    }
    case UtilityFamily::Kind::custom:
      return inverse_marginal_numeric(family, n, y);
  }
  return 0.0;  // unreachable
}

UtilityFamily normalize(const UtilityFamily& family, double z) {
  UtilityFamily out = family;
  if (family.kind_ != UtilityFamily::Kind::custom) {
    // Built-ins: carried analytically; re-normalization replaces the point
    // because (U - U(z))/U'(z) does not depend on earlier affine transforms.
    out.norm_z_ = z;
    return out;
  }
  for (std::size_t n = 0; n < family.size(); ++n) {
    double du = family.du_(family.param(n), z);
    if (!(du > 0.0)) {
      std::ostringstream os;
      os << "nonpositive marginal at z = " << z << " for family index " << n;
      throw std::invalid_argument(os.str());
    }
    out.shift_[n] = family.u_(family.param(n), z);
    out.scale_[n] = du;
  }
  return out;
}

DivergenceReport check_risk_aversion_divergence(
    const UtilityFamily& family, const std::vector<std::size_t>& schedule,
    const std::vector<double>& x_grid, double threshold) {
  if (schedule.empty() || x_grid.empty())
    throw std::invalid_argument("divergence check needs a schedule and grid");
  DivergenceReport rep;
  rep.threshold = threshold;
  rep.increasing = true;
  rep.min_r_last = std::numeric_limits<double>::infinity();
  for (double x : x_grid) {
    double prev = -std::numeric_limits<double>::infinity();
    double r = 0.0;
    for (std::size_t n : schedule) {
      r = risk_aversion(family, n, x);
      if (r <= prev) rep.increasing = false;
      prev = r;
    }
    if (r < rep.min_r_last) {
      rep.min_r_last = r;
      rep.worst_x = x;
    }
  }
  rep.diverges = rep.increasing && rep.min_r_last >= threshold;
  return rep;
}

ElasticityReport check_elasticity(const UtilityFamily& family,
                                  const std::vector<std::size_t>& schedule,
                                  double lambda0, double lambda1,
                                  const std::vector<double>& y_grid,
                                  const std::vector<double>& lambda_grid) {
  if (!(0.0 < lambda0 && lambda0 <= lambda1))
    throw std::invalid_argument("need 0 < lambda0 <= lambda1");
  ElasticityReport rep;
  rep.lambda0 = lambda0;
  rep.lambda1 = lambda1;

  struct Pt {
    std::size_t n;
    double lam, y, vy, vlamy;
  };
  std::vector<Pt> pts;
  for (std::size_t n : schedule)
    for (double lam : lambda_grid) {
      if (lam < lambda0 - 1e-15 || lam > lambda1 + 1e-15) continue;
      for (double y : y_grid)
        pts.push_back({n, lam, y, conjugate(family, n, y),
                       conjugate(family, n, lam * y)});
    }
  if (pts.empty())
    throw std::invalid_argument("empty elasticity grid");

  constexpr double kCap = 1e6;
  double best_min_slack = -std::numeric_limits<double>::infinity();
  for (double c1 = 1.0; c1 <= kCap; c1 *= 2.0) {
    for (double c2 = 0.0; c2 <= kCap; c2 = (c2 == 0.0 ? 1.0 : c2 * 2.0)) {
      for (double c3 = 0.0; c3 <= kCap; c3 = (c3 == 0.0 ? 1.0 : c3 * 2.0)) {
        double min_slack = std::numeric_limits<double>::infinity();
        const Pt* worst = nullptr;
        for (const Pt& p : pts) {
          double slack = c1 * p.vy + c2 * p.y + c3 - p.vlamy;
          if (slack < min_slack) {
            min_slack = slack;
            worst = &p;
          }
        }
        if (min_slack > best_min_slack) {
          best_min_slack = min_slack;
          rep.c1 = c1;
          rep.c2 = c2;
          rep.c3 = c3;
          rep.worst_n = worst->n;
          rep.worst_lambda = worst->lam;
          rep.worst_y = worst->y;
          rep.worst_slack = min_slack;
        }
        if (min_slack >= -1e-9) {
          rep.holds = true;
          rep.c1 = c1;
          rep.c2 = c2;
          rep.c3 = c3;
          rep.worst_n = worst->n;
          rep.worst_lambda = worst->lam;
          rep.worst_y = worst->y;
          rep.worst_slack = min_slack;
          return rep;
        }
      }
    }
  }
  rep.holds = false;
  return rep;
}

std::pair<double, double> check_asymptotic_elasticity(
    const UtilityFamily& family, std::size_t n, double X) {
  if (!(X > 0.0)) throw std::invalid_argument("need X > 0");
  double up = family.value(n, X), un = family.value(n, -X);
  if (!(up > 0.0) || !(un < 0.0)) {
    std::ostringstream os;
    os << "utility does not straddle zero at +-" << X << " (U(X) = " << up
       << ", U(-X) = " << un << "); ratio undefined";
    throw std::invalid_argument(os.str());
  }
  double upper = X * family.marginal(n, X) / up;
  double lower = -X * family.marginal(n, -X) / un;
  return {upper, lower};
}

LimitReport check_limit_assumptions(const UtilityFamily& family,
                                    const std::vector<std::size_t>& schedule,
                                    double x0,
                                    const std::vector<double>& y_grid) {
  if (schedule.empty() || y_grid.empty())
    throw std::invalid_argument("limit check needs a schedule and grid");
  LimitReport rep;
  rep.x0 = x0;
  rep.indices = schedule;
  rep.y_grid = y_grid;

  std::vector<double> alphas, betas;
  for (std::size_t n : schedule) {
    alphas.push_back(family.marginal(n, x0));
    betas.push_back(family.value(n, x0));
  }
  rep.alpha_estimate = alphas.back();
  rep.beta_estimate = betas.back();

  auto diffs_shrink = [](const std::vector<double>& v) {
    if (v.size() < 3) return true;
    std::vector<double> d;
    for (std::size_t k = 1; k < v.size(); ++k)
      d.push_back(std::fabs(v[k] - v[k - 1]));
    for (std::size_t k = d.size() / 2; k + 1 < d.size(); ++k)
      if (d[k + 1] > d[k] + 1e-12) return false;
    return true;
  };
  rep.stabilized = diffs_shrink(alphas) && diffs_shrink(betas);

  rep.deviations.resize(schedule.size());
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    rep.deviations[k].resize(y_grid.size());
    for (std::size_t j = 0; j < y_grid.size(); ++j) {
      double target = rep.beta_estimate - x0 * y_grid[j];
      rep.deviations[k][j] =
          std::fabs(conjugate(family, schedule[k], y_grid[j]) - target);
    }
  }

  rep.deviations_decreasing = true;
  for (std::size_t j = 0; j < y_grid.size(); ++j)
    for (std::size_t k = schedule.size() / 2; k + 1 < schedule.size(); ++k)
      if (rep.deviations[k + 1][j] > rep.deviations[k][j] + 1e-12)
        rep.deviations_decreasing = false;
  return rep;
}

}  // namespace reserve::utility
