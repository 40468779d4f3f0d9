#pragma once
/**
 * @file diagnostics.hpp
 * @brief Runs every hypothesis checker against a market + utility family and
 *        renders a PASS/FAIL/EVIDENCE report. The CLI `check` subcommand is
 *        a thin wrapper around this.
 */

#include <string>
#include <vector>

#include "reserve/market.hpp"
#include "reserve/measures.hpp"
#include "reserve/utility.hpp"

namespace reserve::diagnostics {

struct CheckOptions {
  double divergence_threshold = 100.0;
  std::vector<double> x_grid = {-1.0, 0.0, 1.0};
  double lambda0 = 0.5;
  double lambda1 = 2.0;
  std::vector<double> y_grid;       // defaults to 2^k, k = -6..6
  std::vector<double> lambda_grid;  // defaults to 9 geometric points
  double x0 = 0.0;
  double asymptotic_range = 10.0;  // X for the finite-range proxies
};

struct CheckOutcome {
  std::string rendered;
  bool any_fail = false;
};

/// Runs all checkers: risk-aversion divergence, conjugate growth
/// (elasticity), asymptotic-elasticity proxies (evidence only), wealth-point
/// limits with conjugate collapse, and conjugate integrability against q0.
CheckOutcome run_checks(const market::ScenarioTree& tree,
                        const utility::UtilityFamily& family,
                        const measures::MartingaleMeasure& q0,
                        const CheckOptions& options = {});

}  // namespace reserve::diagnostics
