#include "reserve/diagnostics.hpp"

#include <cmath>
#include <sstream>

namespace reserve::diagnostics {

namespace {

std::vector<double> default_y_grid() {
  std::vector<double> g;
  for (int k = -6; k <= 6; ++k) g.push_back(std::ldexp(1.0, k));
  return g;
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
  std::vector<double> g;
  if (points == 1 || lo == hi) return {lo};
  double ratio = std::pow(hi / lo, 1.0 / (points - 1));
  double v = lo;
  for (int i = 0; i < points; ++i, v *= ratio) g.push_back(v);
  g.back() = hi;
  return g;
}

const char* verdict(bool pass) { return pass ? "[PASS]" : "[FAIL]"; }

}  // namespace

CheckOutcome run_checks(const market::ScenarioTree& tree,
                        const utility::UtilityFamily& family,
                        const measures::MartingaleMeasure& q0,
                        const CheckOptions& options) {
  CheckOptions opt = options;
  if (opt.y_grid.empty()) opt.y_grid = default_y_grid();
  if (opt.lambda_grid.empty())
    opt.lambda_grid = geometric_grid(opt.lambda0, opt.lambda1, 9);

  auto schedule = utility::full_schedule(family);
  std::ostringstream os;
  bool any_fail = false;

  {
    auto rep = utility::check_risk_aversion_divergence(
        family, schedule, opt.x_grid, opt.divergence_threshold);
    any_fail = any_fail || !rep.diverges;
    os << verdict(rep.diverges) << " risk-aversion divergence: min r_last = "
       << rep.min_r_last << " at x = " << rep.worst_x << " (threshold "
       << rep.threshold << ", "
       << (rep.increasing ? "increasing along schedule"
                          : "NOT increasing along schedule")
       << ")\n";
  }

  {
    auto rep = utility::check_elasticity(family, schedule, opt.lambda0,
                                         opt.lambda1, opt.y_grid,
                                         opt.lambda_grid);
    any_fail = any_fail || !rep.holds;
    os << verdict(rep.holds) << " conjugate growth on [" << rep.lambda0
       << ", " << rep.lambda1 << "]: C1 = " << rep.c1 << ", C2 = " << rep.c2
       << ", C3 = " << rep.c3 << ", worst slack " << rep.worst_slack
       << " at (n = " << rep.worst_n << ", lambda = " << rep.worst_lambda
       << ", y = " << rep.worst_y << ") [grid evidence, not proof]\n";
  }

  {
    std::size_t last = schedule.back();
    try {
      auto [upper, lower] = utility::check_asymptotic_elasticity(
          family, last, opt.asymptotic_range);
      os << "[EVIDENCE] asymptotic elasticity proxies at X = "
         << opt.asymptotic_range << " (last index): upper " << upper
         << (upper < 1.0 ? " (< 1)" : " (NOT < 1)") << ", lower " << lower
         << (lower > 1.0 ? " (> 1)" : " (NOT > 1)")
         << "; no verdict beyond the evaluated points\n";
    } catch (const std::invalid_argument& e) {
      os << "[EVIDENCE] asymptotic elasticity proxies unavailable: "
         << e.what() << "\n";
    }
  }

  {
    auto rep = utility::check_limit_assumptions(family, schedule, opt.x0,
                                                opt.y_grid);
    double worst_dev = 0.0;
    double worst_y = opt.y_grid.front();
    for (std::size_t j = 0; j < rep.y_grid.size(); ++j)
      if (rep.deviations.back()[j] > worst_dev) {
        worst_dev = rep.deviations.back()[j];
        worst_y = rep.y_grid[j];
      }
    bool pass = rep.stabilized && rep.deviations_decreasing;
    any_fail = any_fail || !pass;
    os << verdict(pass) << " wealth-point limits at x0 = " << rep.x0
       << ": alpha -> " << rep.alpha_estimate << ", beta -> "
       << rep.beta_estimate << " ("
       << (rep.stabilized ? "stabilized" : "NOT stabilized")
       << "); conjugate deviations "
       << (rep.deviations_decreasing ? "decreasing" : "NOT decreasing")
       << ", last-index max " << worst_dev << " at y = " << worst_y << "\n";
  }

  {
    try {
      auto rep = measures::check_compactness(tree, q0, family, schedule);
      any_fail = any_fail || !rep.bounded;
      os << verdict(rep.bounded)
         << " conjugate integrability: sup E|V_n(dQ0/dP)| = " << rep.sup
         << " over the schedule, "
         << (rep.bounded ? "no growth beyond tolerance"
                         : "GROWS along the schedule")
         << "\n";
    } catch (const std::invalid_argument& e) {
      any_fail = true;
      os << "[FAIL] conjugate integrability: " << e.what() << "\n";
    }
  }

  return {os.str(), any_fail};
}

}  // namespace reserve::diagnostics
