#include "reserve/pricing.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

#include "reserve/optimize.hpp"

namespace reserve::pricing {

namespace {

double superrep_checked(const market::ScenarioTree& tree,
                        const market::Claim& claim) {
  auto sr = measures::superreplication_price(tree, claim);
  if (std::fabs(sr.duality_gap) > 1e-8) {
    std::ostringstream os;
    os << "superreplication primal/dual disagree by " << sr.duality_gap;
    throw std::runtime_error(os.str());
  }
  return sr.price;
}

}  // namespace

PricePoint indifference_price(const market::ScenarioTree& tree,
                              const utility::UtilityFamily& family,
                              std::size_t n, double z,
                              const market::Claim& claim, double price_tol,
                              double u_tol,
                              std::optional<double> superrep_hint) {
  if (!(price_tol > 0.0))
    throw std::invalid_argument("price_tol must be positive");
  double pi = superrep_hint ? *superrep_hint : superrep_checked(tree, claim);

  PricePoint pt;
  pt.index = n;
  pt.alpha = family.param(n);

  auto u_at = [&](double capital, const market::Claim& c) {
    return optimize::max_expected_utility(tree, family, n, capital, c, u_tol)
        .value;
  };
  pt.u_no_claim = u_at(z, market::zero_claim(tree));

  double lo = *std::min_element(claim.payoff.begin(), claim.payoff.end());
  double hi = *std::max_element(claim.payoff.begin(), claim.payoff.end());
  // f(p) = u(z+p, G) - u(z, 0) is strictly increasing; f(lo) <= 0 <= f(hi)
  // holds outcome-wise, so the endpoints never need evaluating.
  bool have_flo = false, have_fhi = false;
  double flo = 0.0, fhi = 0.0;
  int steps = 0;
  while (hi - lo > price_tol) {
    double mid = 0.5 * (lo + hi);
    double f = u_at(z + mid, claim) - pt.u_no_claim;
    if (f >= 0.0) {
      hi = mid;
      fhi = f;
      have_fhi = true;
    } else {
      lo = mid;
      flo = f;
      have_flo = true;
    }
    ++steps;
  }
  pt.price = 0.5 * (lo + hi);
  pt.iterations = steps;
  pt.u_with_claim_at_price = u_at(z + pt.price, claim);

  // Stopping record: across the final bracket the u-difference cannot exceed
  // the bracket's own utility spread plus optimizer noise.
  double spread = 0.0;
  if (have_flo && have_fhi) spread = fhi - flo;
  pt.u_diff_bound =
      std::max(spread, std::fabs(pt.u_with_claim_at_price - pt.u_no_claim)) +
      2.0 * u_tol;
  if (have_flo && have_fhi) {
    // Monotonicity sanity at the midpoint; a violation beyond optimizer
    // noise would mean the bracket logic is broken.
    double fm = pt.u_with_claim_at_price - pt.u_no_claim;
    assert(fm >= flo - 10.0 * u_tol - 1e-12 * std::fabs(flo) &&
           fm <= fhi + 10.0 * u_tol + 1e-12 * std::fabs(fhi) &&
           "bisection bracket violated");
    (void)fm;
  }

  pt.gap = pi - pt.price;
  return pt;
}

PriceCurve convergence_sweep(const market::ScenarioTree& tree,
                             const utility::UtilityFamily& family,
                             const std::vector<std::size_t>& schedule,
                             double z, const market::Claim& claim,
                             double price_tol, double u_tol,
                             bool normalize_at_z, std::string claim_name) {
  if (schedule.empty())
    throw std::invalid_argument("sweep schedule must be nonempty");
  for (std::size_t k = 1; k < schedule.size(); ++k)
    if (!(family.param(schedule[k]) > family.param(schedule[k - 1])))
      throw std::invalid_argument(
          "sweep schedule must have strictly increasing risk aversion");

  const utility::UtilityFamily swept =
      normalize_at_z ? utility::normalize(family, z) : family;

  PriceCurve curve;
  curve.z = z;
  curve.claim_name = std::move(claim_name);
  curve.superrep = superrep_checked(tree, claim);

  for (std::size_t n : schedule)
    curve.points.push_back(indifference_price(tree, swept, n, z, claim,
                                              price_tol, u_tol,
                                              curve.superrep));

  curve.final_gap = curve.points.back().gap;
  curve.gaps_nonincreasing = true;
  for (std::size_t k = 1; k < curve.points.size(); ++k)
    if (curve.points[k].gap > curve.points[k - 1].gap + 1e-12)
      curve.gaps_nonincreasing = false;
  return curve;
}

}  // namespace reserve::pricing
