#pragma once
/**
 * @file optimize.hpp
 * @brief Expected-utility maximization over trading strategies on the tree,
 *        and the conjugate/martingale dual upper bound.
 *
 * The objective phi -> sum_w P(w) U_n(V^{x,phi}_T(w) - G(w)) is smooth and
 * concave in the stacked holdings vector; it is maximized by damped Newton
 * with Armijo backtracking, falling back to gradient steps when the Hessian
 * is near singular. Arbitrage shows up as an unbounded ascent direction and
 * is reported as an error rather than a huge value.
 */

#include <optional>

#include "reserve/market.hpp"
#include "reserve/measures.hpp"
#include "reserve/utility.hpp"

namespace reserve::optimize {

struct OptResult {
  double value = 0.0;          // u_n(x, G)
  market::Strategy strategy;   // argmax (no uniqueness claim for redundant assets)
  double gradient_norm = 0.0;  // at termination
  int iterations = 0;
  std::optional<double> dual_gap;  // bound - value, when a reference measure is given
};

/// Maximizes E_P[U_n(wealth - G)] over strategies from initial capital x.
/// Terminates when the gradient norm falls below tol * max(1, |value|).
/// If `dual_reference` is given, fills dual_gap with
/// dual_upper_bound(..., *dual_reference, 1) - value.
/// Throws measures::arbitrage_error when an unbounded ascent direction is
/// found, std::runtime_error on non-convergence.
OptResult max_expected_utility(
    const market::ScenarioTree& tree, const utility::UtilityFamily& family,
    std::size_t n, double x, const market::Claim& claim, double tol,
    const measures::MartingaleMeasure* dual_reference = nullptr);

/// Conjugate duality bound  E_P[V_n(y dQ/dP)] + y (x - E_Q[G])  >= u_n(x,G).
/// Zero-density terminals contribute the y->0+ conjugate limit.
double dual_upper_bound(const market::ScenarioTree& tree,
                        const utility::UtilityFamily& family, std::size_t n,
                        double x, const market::Claim& claim,
                        const measures::MartingaleMeasure& q, double y = 1.0);

/// Minimum of dual_upper_bound over y in the log-grid {2^k : k = -20..20}.
double dual_upper_bound_best(const market::ScenarioTree& tree,
                             const utility::UtilityFamily& family,
                             std::size_t n, double x,
                             const market::Claim& claim,
                             const measures::MartingaleMeasure& q);

}  // namespace reserve::optimize
