#pragma once
/**
 * @file pricing.hpp
 * @brief Utility indifference (reservation) prices by monotone bisection,
 *        and the risk-aversion sweep that tracks their convergence to the
 *        superreplication price.
 *
 * The indifference price p_n(z, G) = inf{p : u_n(z+p, G) >= u_n(z, 0)} is
 * the unique root of the continuous, strictly increasing map
 * p -> u_n(z+p, G) - u_n(z, 0). The bracket [min G, max G] is always valid:
 * at p = min G the claim dominates the compensation outcome-wise, at
 * p = max G the compensation dominates the claim.
 */

#include <optional>
#include <string>
#include <vector>

#include "reserve/market.hpp"
#include "reserve/measures.hpp"
#include "reserve/utility.hpp"

namespace reserve::pricing {

inline constexpr double kDefaultPriceTol = 1e-4;  // currency
inline constexpr double kDefaultUtilityTol = 1e-8;  // utils, inside bisection

struct PricePoint {
  std::size_t index = 0;  // position in the family schedule
  double alpha = 0.0;     // risk-aversion scale at that index
  double price = 0.0;     // p_n(z, G), midpoint of the final bracket
  double u_no_claim = 0.0;
  double u_with_claim_at_price = 0.0;
  double gap = 0.0;  // superreplication price - price
  int iterations = 0;  // bisection steps
  // |u_with_claim_at_price - u_no_claim| is bounded by this (the utility
  // spread across the final bracket plus the optimizer tolerance).
  double u_diff_bound = 0.0;
};

struct PriceCurve {
  double z = 0.0;
  std::string claim_name;
  double superrep = 0.0;  // pi(G)
  std::vector<PricePoint> points;  // ordered by strictly increasing alpha
  double final_gap = 0.0;
  bool gaps_nonincreasing = false;  // reported, never asserted
};

/// Indifference price for schedule index n. Computes the superreplication
/// price by LP unless `superrep_hint` provides it (sweeps precompute it).
/// Requires an arbitrage-free market (checked unless hinted).
PricePoint indifference_price(const market::ScenarioTree& tree,
                              const utility::UtilityFamily& family,
                              std::size_t n, double z,
                              const market::Claim& claim,
                              double price_tol = kDefaultPriceTol,
                              double u_tol = kDefaultUtilityTol,
                              std::optional<double> superrep_hint = {});

/// Sweeps indifference prices along the schedule indices (strictly
/// increasing alpha required). With normalize_at_z the family is replaced by
/// normalize(family, z) first — the normalized-hypotheses route to the same
/// limit. The superreplication price is computed once, dual LP cross-checked
/// against the primal; a gap beyond 1e-8 aborts the sweep.
PriceCurve convergence_sweep(const market::ScenarioTree& tree,
                             const utility::UtilityFamily& family,
                             const std::vector<std::size_t>& schedule,
                             double z, const market::Claim& claim,
                             double price_tol = kDefaultPriceTol,
                             double u_tol = kDefaultUtilityTol,
                             bool normalize_at_z = false,
                             std::string claim_name = {});

}  // namespace reserve::pricing
