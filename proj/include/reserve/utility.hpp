#pragma once
/**
 * @file utility.hpp
 * @brief Parametric utility families, their Fenchel conjugates, inverse
 *        marginals, risk aversion, normalization, and the numerical checkers
 *        for the hypotheses the convergence result rests on.
 *
 * Two families are built in:
 *
 *   exponential:  U_n(x) = (1 - exp(-a_n x)) / a_n
 *   power:        U_n(x) = -[(x+1)^{-a_n} - 1]/a_n          for x > 0
 *                 U_n(x) = -[(1-x)^{a_n+2} - 1]/(a_n+2)     for x <= 0
 *
 * Both are normalized so U_n(0) = 0 and U_n'(0) = 1, have closed-form
 * conjugates and inverse marginals, and their absolute risk aversion grows
 * like a_n. Custom families supply U, U', U'' as callables; every hypothesis
 * the built-ins satisfy by construction becomes a runtime diagnostic for
 * them (construction never silently assumes divergence, elasticity, or
 * limit behaviour — the checkers report).
 */

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace reserve::utility {

class UtilityFamily {
 public:
  enum class Kind { exponential, power, custom };
  using Evaluator = std::function<double(double alpha, double x)>;

  /// Built-in families; schedule entries are the risk-aversion scales a_n
  /// and must be strictly positive (monotonicity is diagnosed, not enforced,
  /// so deliberately violating schedules can be fed to the checkers).
  static UtilityFamily exponential(std::vector<double> schedule);
  static UtilityFamily power(std::vector<double> schedule);
  /// Custom family from evaluators for U, U' and U''.
  static UtilityFamily custom(std::vector<double> schedule, Evaluator u,
                              Evaluator du, Evaluator d2u);

  Kind kind() const { return kind_; }
  std::size_t size() const { return schedule_.size(); }
  double param(std::size_t n) const { return schedule_.at(n); }
  const std::vector<double>& schedule() const { return schedule_; }

  double value(std::size_t n, double x) const;      // U_n(x)
  double marginal(std::size_t n, double x) const;   // U_n'(x)
  double curvature(std::size_t n, double x) const;  // U_n''(x)

  /// Where the family was normalized (value 0, slope 1 there), if at all.
  /// For the built-in kinds the normalization is carried analytically in
  /// log space, so large alpha * z stays exact; custom families use the
  /// generic affine transform.
  std::optional<double> normalization_point() const { return norm_z_; }

  /// True iff evaluating the family at wealth x hits the overflow guard of
  /// the underlying exponential (exponent clamped at 700). The optimizer
  /// asserts this never happens at accepted iterates.
  bool evaluation_clamped(std::size_t n, double x) const;

 private:
  UtilityFamily() = default;

  Kind kind_ = Kind::custom;
  std::vector<double> schedule_;
  std::optional<double> norm_z_;  // built-in kinds only
  std::vector<double> shift_;     // custom kind only; 0 when untransformed
  std::vector<double> scale_;     // custom kind only; 1 when untransformed
  Evaluator u_, du_, d2u_;

  friend UtilityFamily normalize(const UtilityFamily&, double);
  friend double conjugate(const UtilityFamily&, std::size_t, double);
  friend double inverse_marginal(const UtilityFamily&, std::size_t, double);
  friend double conjugate_limit_at_zero(const UtilityFamily&, std::size_t);
  friend double risk_aversion(const UtilityFamily&, std::size_t, double);
};

/// {0, 1, ..., size-1}: the full index schedule of a family.
std::vector<std::size_t> full_schedule(const UtilityFamily& family);

/// Absolute risk aversion -U_n''(x)/U_n'(x); throws std::invalid_argument
/// on a nonpositive marginal (invariant breach for custom families).
double risk_aversion(const UtilityFamily& family, std::size_t n, double x);

/// Fenchel conjugate V_n(y) = sup_x {U_n(x) - xy}, y > 0. Closed form for
/// the built-in families (surviving normalization, which acts affinely on
/// the conjugate); for custom families computed as U_n(I_n(y)) - y I_n(y).
double conjugate(const UtilityFamily& family, std::size_t n, double y);

/// Conjugate via monotone bracketing + bisection on U_n', regardless of
/// family kind. The independent route against the closed forms.
double conjugate_numeric(const UtilityFamily& family, std::size_t n, double y);

/// lim_{y->0+} V_n(y) = sup_x U_n(x). Needed by dual bounds evaluated at
/// boundary (non-equivalent) measures where the density vanishes.
double conjugate_limit_at_zero(const UtilityFamily& family, std::size_t n);

/// Inverse of the marginal: x with U_n'(x) = y. Throws std::invalid_argument
/// when y is outside the attainable range of U_n', reporting the range.
double inverse_marginal(const UtilityFamily& family, std::size_t n, double y);

/// Normalized family  (U_n - U_n(z)) / U_n'(z); satisfies value(n, z) = 0
/// and marginal(n, z) = 1 exactly, leaves risk aversion pointwise unchanged.
/// Throws std::invalid_argument if any marginal at z is nonpositive.
UtilityFamily normalize(const UtilityFamily& family, double z);

struct DivergenceReport {
  double threshold = 0.0;
  bool increasing = false;   // r_n(x) nondecreasing in n at every grid x
  double min_r_last = 0.0;   // min over grid of r at the last index
  double worst_x = 0.0;      // grid point attaining min_r_last
  bool diverges = false;     // increasing && min_r_last >= threshold
};

/// Checks that risk aversion grows along the schedule at every grid point
/// and clears `threshold` at the last index.
DivergenceReport check_risk_aversion_divergence(
    const UtilityFamily& family, const std::vector<std::size_t>& schedule,
    const std::vector<double>& x_grid, double threshold);

struct ElasticityReport {
  double lambda0 = 0.0, lambda1 = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  bool holds = false;
  std::size_t worst_n = 0;  // grid point with the smallest slack
  double worst_lambda = 0.0, worst_y = 0.0, worst_slack = 0.0;
};

/// Searches constants C1 in {1,2,4,...}, C2, C3 in {0,1,2,4,...} (all capped
/// at 1e6) validating V_n(lambda y) <= C1 V_n(y) + C2 y + C3 on the grid;
/// holds = true iff some triple gives slack >= -1e-9 everywhere. Grid
/// evidence, not proof: the hypothesis quantifies over all y > 0.
ElasticityReport check_elasticity(const UtilityFamily& family,
                                  const std::vector<std::size_t>& schedule,
                                  double lambda0, double lambda1,
                                  const std::vector<double>& y_grid,
                                  const std::vector<double>& lambda_grid);

/// Finite-range proxies for the asymptotic elasticity ratios: returns
/// (X U'(X)/U(X), -X U'(-X)/U(-X)). Diagnostic only — limits at infinity are
/// not machine-decidable; no verdict beyond the evaluated points is claimed.
/// Requires U_n(X) > 0 and U_n(-X) < 0.
std::pair<double, double> check_asymptotic_elasticity(
    const UtilityFamily& family, std::size_t n, double X);

struct LimitReport {
  double x0 = 0.0;
  double alpha_estimate = 0.0;  // U_n'(x0) at the last index
  double beta_estimate = 0.0;   // U_n(x0) at the last index
  bool stabilized = false;      // successive differences of both shrink
  std::vector<std::size_t> indices;
  std::vector<double> y_grid;
  // deviations[k][j] = |V_{n_k}(y_j) - (beta - x0 y_j)|
  std::vector<std::vector<double>> deviations;
  bool deviations_decreasing = false;  // eventually decreasing in n per y
};

/// Estimates the wealth-point limits alpha = lim U_n'(x0), beta = lim U_n(x0)
/// and verifies the conjugates collapse onto y -> beta - x0 y.
LimitReport check_limit_assumptions(const UtilityFamily& family,
                                    const std::vector<std::size_t>& schedule,
                                    double x0,
                                    const std::vector<double>& y_grid);

}  // namespace reserve::utility
