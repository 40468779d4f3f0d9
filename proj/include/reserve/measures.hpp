#pragma once
/**
 * @file measures.hpp
 * @brief The dual side of the market: martingale measures, the
 *        superreplication LP pair, densities, entropy, mixtures and the
 *        conjugate-integrability diagnostic.
 *
 * A martingale measure is a vector of terminal weights q >= 0 summing to 1
 * whose conditional one-step expected price increments vanish at every
 * non-terminal node. The set of such q is a polytope; the supremum of E_Q[G]
 * over its equivalent (all-weights-positive) elements equals the maximum
 * over the closed polytope, which is what the LP computes. Optimizers with
 * zero weights are closure elements and are flagged as such.
 */

#include <utility>
#include <vector>

#include "reserve/market.hpp"
#include "reserve/utility.hpp"

namespace reserve::measures {

/// Thrown when an operation requires an arbitrage-free market and the
/// martingale polytope is empty (or has empty interior).
struct arbitrage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Element of the martingale polytope: one weight per terminal ordinal.
struct MartingaleMeasure {
  std::vector<double> weight;
  bool equivalent = false;  // true iff every terminal weight is > 0

  double at(int terminal_ordinal) const { return weight.at(terminal_ordinal); }
};

/// Validates weights against the polytope invariants (nonnegative, sum to 1
/// within 1e-10, martingale condition within 1e-9 per node and asset) and
/// returns the measure with its equivalence flag set.
/// Throws std::invalid_argument naming the violated constraint.
MartingaleMeasure make_measure(const market::ScenarioTree& tree,
                               std::vector<double> weights);

/// Largest violation of the martingale condition over all (node, asset)
/// pairs; useful for diagnostics and property tests.
double martingale_defect(const market::ScenarioTree& tree,
                         const std::vector<double>& weights);

/// True iff a strictly positive martingale measure exists, decided by
/// maximizing an interiority slack over the polytope.
bool no_arbitrage(const market::ScenarioTree& tree);

/// The measure attaining the maximal interiority slack (max over the
/// polytope of the minimal terminal weight). Equivalent whenever the market
/// is arbitrage-free; throws arbitrage_error otherwise.
MartingaleMeasure interior_measure(const market::ScenarioTree& tree);

struct SuperrepResult {
  double price = 0.0;                // sup_Q E_Q[G]  (dual optimum)
  MartingaleMeasure optimal_measure; // dual argmax
  market::Strategy strategy;         // primal argmin hedge
  double initial_capital = 0.0;      // primal optimum (= price up to LP tol)
  double duality_gap = 0.0;          // initial_capital - price
};

/// Superreplication price of a claim: dual LP maximizes E_Q[G] over the
/// closed polytope, primal LP minimizes the initial capital of a dominating
/// strategy; both are solved and the gap recorded.
/// Throws arbitrage_error when the polytope is empty.
SuperrepResult superreplication_price(const market::ScenarioTree& tree,
                                      const market::Claim& claim);

/// dQ/dP per terminal ordinal.
std::vector<double> density(const market::ScenarioTree& tree,
                            const MartingaleMeasure& q);

/// Convex combination alpha*q0 + (1-alpha)*q, alpha in (0,1). The result
/// satisfies the martingale constraints exactly (they are linear) and is
/// equivalent whenever q0 is.
MartingaleMeasure mixture(const MartingaleMeasure& q0,
                          const MartingaleMeasure& q, double alpha);

/// Relative entropy H(Q|P) = sum_w Q(w) ln(Q(w)/P(w)), with 0 ln 0 = 0.
double relative_entropy(const market::ScenarioTree& tree,
                        const MartingaleMeasure& q);

/// (min, max) of dQ/dP over terminal nodes.
std::pair<double, double> density_bounds(const market::ScenarioTree& tree,
                                         const MartingaleMeasure& q);

/// Schedule-wide boundedness of E_P|V_n(dQ0/dP)| — the finite-space content
/// of uniform integrability of the conjugates along the family.
struct CompactnessReport {
  std::vector<std::size_t> indices;
  std::vector<double> values;  // E_P|V_n(dQ0/dP)| per scheduled index
  double sup = 0.0;
  bool bounded = false;  // no value exceeds the running max by more than 1e-6
};

/// Requires q0 equivalent (a zero density would put V_n at 0+, potentially
/// infinite for custom families); throws std::invalid_argument otherwise.
CompactnessReport check_compactness(const market::ScenarioTree& tree,
                                    const MartingaleMeasure& q0,
                                    const utility::UtilityFamily& family,
                                    const std::vector<std::size_t>& schedule);

}  // namespace reserve::measures
