#include "reserve/measures.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "reserve/simplex.hpp"

namespace reserve::measures {

namespace {

using market::ScenarioTree;

// Martingale polytope in terminal weights: one normalization row plus one
// equality per (non-terminal node, asset). The conditional expectation at a
// node is written as a sum over its descendant terminals, so no
// intermediate-node variables appear.
struct Polytope {
  std::vector<std::vector<double>> A;
  std::vector<double> b;
};

Polytope polytope_constraints(const ScenarioTree& tree) {
  const int nt = static_cast<int>(tree.terminals().size());
  Polytope P;
  P.A.emplace_back(nt, 1.0);
  P.b.push_back(1.0);

  auto inc = market::path_increments(tree);
  for (int m : tree.nonterminals()) {
    int mo = tree.nonterminal_ordinal(m);
    for (int i = 0; i < tree.num_assets(); ++i) {
      std::vector<double> row(nt, 0.0);
      for (int k = 0; k < nt; ++k)
        for (const auto& leg : inc.per_terminal[k])
          if (leg.nonterminal_ordinal == mo) row[k] = leg.ds[i];
      P.A.push_back(std::move(row));
      P.b.push_back(0.0);
    }
  }
  return P;
}

bool weights_all_positive(const std::vector<double>& w) {
  for (double v : w)
    if (!(v > 0.0)) return false;
  return true;
}

}  // namespace

double martingale_defect(const ScenarioTree& tree,
                         const std::vector<double>& weights) {
  Polytope P = polytope_constraints(tree);
  double worst = 0.0;
  // Skip the normalization row (index 0).
  for (std::size_t r = 1; r < P.A.size(); ++r) {
    double v = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k)
      v += P.A[r][k] * weights[k];
    worst = std::max(worst, std::fabs(v));
  }
  return worst;
}

MartingaleMeasure make_measure(const ScenarioTree& tree,
                               std::vector<double> weights) {
  const std::size_t nt = tree.terminals().size();
  if (weights.size() != nt)
    throw std::invalid_argument("weight count does not match terminals");
  double sum = 0.0;
  for (std::size_t k = 0; k < nt; ++k) {
    if (weights[k] < 0.0 || !std::isfinite(weights[k])) {
      std::ostringstream os;
      os << "negative weight " << weights[k] << " at terminal '"
         << tree.node_id(tree.terminals()[k]) << "'";
      throw std::invalid_argument(os.str());
    }
    sum += weights[k];
  }
  if (std::fabs(sum - 1.0) > 1e-10) {
    std::ostringstream os;
    os << "weights sum to " << sum << ", expected 1";
    throw std::invalid_argument(os.str());
  }
  double defect = martingale_defect(tree, weights);
  if (defect > 1e-9) {
    std::ostringstream os;
    os << "martingale condition violated by " << defect;
    throw std::invalid_argument(os.str());
  }
  MartingaleMeasure q;
  q.equivalent = weights_all_positive(weights);
  q.weight = std::move(weights);
  return q;
}

MartingaleMeasure interior_measure(const ScenarioTree& tree) {
  // max eps  s.t.  q in polytope,  q_w - eps - t_w = 0,  q, eps, t >= 0.
  Polytope P = polytope_constraints(tree);
  const int nt = static_cast<int>(tree.terminals().size());
  const int nvar = nt + 1 + nt;  // q, eps, slacks
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  for (std::size_t r = 0; r < P.A.size(); ++r) {
    std::vector<double> row(nvar, 0.0);
    for (int k = 0; k < nt; ++k) row[k] = P.A[r][k];
    A.push_back(std::move(row));
    b.push_back(P.b[r]);
  }
  for (int k = 0; k < nt; ++k) {
    std::vector<double> row(nvar, 0.0);
    row[k] = 1.0;
    row[nt] = -1.0;
    row[nt + 1 + k] = -1.0;
    A.push_back(std::move(row));
    b.push_back(0.0);
  }
  std::vector<double> c(nvar, 0.0);
  c[nt] = 1.0;

  auto sol = lp::maximize(A, b, c);
  if (sol.status != lp::Status::optimal || sol.objective <= 1e-10)
    throw arbitrage_error(
        "no martingale measure: the polytope is empty or has no interior");
  std::vector<double> w(sol.x.begin(), sol.x.begin() + nt);
  // Re-normalize away LP roundoff before validating.
  double s = 0.0;
  for (double v : w) s += v;
  for (double& v : w) v /= s;
  return make_measure(tree, std::move(w));
}

bool no_arbitrage(const ScenarioTree& tree) {
  try {
    interior_measure(tree);
    return true;
  } catch (const arbitrage_error&) {
    return false;
  }
}

SuperrepResult superreplication_price(const ScenarioTree& tree,
                                      const market::Claim& claim) {
  const int nt = static_cast<int>(tree.terminals().size());
  if (static_cast<int>(claim.payoff.size()) != nt)
    throw std::invalid_argument("claim payoff count does not match terminals");

  // Dual: max sum_w q_w G_w over the closed polytope.
  Polytope P = polytope_constraints(tree);
  auto dual = lp::maximize(P.A, P.b, claim.payoff);
  if (dual.status == lp::Status::infeasible)
    throw arbitrage_error(
        "no martingale measure: superreplication price undefined");
  if (dual.status != lp::Status::optimal)
    throw std::logic_error("dual superreplication LP unbounded");

  SuperrepResult res;
  res.price = dual.objective;
  {
    // LP roundoff can leave tiny negatives / sum drift; clean before the
    // validating constructor.
    std::vector<double> w = dual.x;
    double s = 0.0;
    for (double& v : w) {
      if (v < 0.0 && v > -1e-12) v = 0.0;
      s += v;
    }
    for (double& v : w) v /= s;
    res.optimal_measure = make_measure(tree, std::move(w));
  }

  // Primal: min x  s.t.  x + (phi . S)_T(w) >= G_w for every terminal w.
  // Variables: x = xp - xm, phi = fp - fm (per non-terminal, asset),
  // surplus s_w >= 0:  x + sum legs - s_w = G_w.
  auto inc = market::path_increments(tree);
  const int nnt = static_cast<int>(tree.nonterminals().size());
  const int d = tree.num_assets();
  const int nvar = 2 + 2 * nnt * d + nt;
  auto var_fp = [&](int mo, int i) { return 2 + 2 * (mo * d + i); };
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  for (int k = 0; k < nt; ++k) {
    std::vector<double> row(nvar, 0.0);
    row[0] = 1.0;
    row[1] = -1.0;
    for (const auto& leg : inc.per_terminal[k])
      for (int i = 0; i < d; ++i) {
        row[var_fp(leg.nonterminal_ordinal, i)] += leg.ds[i];
        row[var_fp(leg.nonterminal_ordinal, i) + 1] -= leg.ds[i];
      }
    row[2 + 2 * nnt * d + k] = -1.0;
    A.push_back(std::move(row));
    b.push_back(claim.payoff[k]);
  }
  std::vector<double> c(nvar, 0.0);
  c[0] = -1.0;
  c[1] = 1.0;
  auto primal = lp::maximize(A, b, c);
  if (primal.status != lp::Status::optimal)
    throw std::logic_error(
        "primal superreplication LP failed under no-arbitrage");

  res.initial_capital = primal.x[0] - primal.x[1];
  res.strategy = market::zero_strategy(tree);
  for (int mo = 0; mo < nnt; ++mo)
    for (int i = 0; i < d; ++i)
      res.strategy.holding[mo][i] =
          primal.x[var_fp(mo, i)] - primal.x[var_fp(mo, i) + 1];
  res.duality_gap = res.initial_capital - res.price;
  return res;
}

std::vector<double> density(const ScenarioTree& tree,
                            const MartingaleMeasure& q) {
  std::vector<double> d(tree.terminals().size());
  for (std::size_t k = 0; k < d.size(); ++k)
    d[k] = q.weight.at(k) / tree.path_probability(tree.terminals()[k]);
  return d;
}

MartingaleMeasure mixture(const MartingaleMeasure& q0,
                          const MartingaleMeasure& q, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("mixture weight must lie in (0,1)");
  if (q0.weight.size() != q.weight.size())
    throw std::invalid_argument("measures live on different trees");
  MartingaleMeasure out;
  out.weight.resize(q0.weight.size());
  for (std::size_t k = 0; k < out.weight.size(); ++k)
    out.weight[k] = alpha * q0.weight[k] + (1.0 - alpha) * q.weight[k];
  out.equivalent = weights_all_positive(out.weight);
  return out;
}

double relative_entropy(const ScenarioTree& tree, const MartingaleMeasure& q) {
  double h = 0.0;
  for (std::size_t k = 0; k < q.weight.size(); ++k) {
    double w = q.weight[k];
    if (w <= 0.0) continue;  // 0 ln 0 = 0
    h += w * std::log(w / tree.path_probability(tree.terminals()[k]));
  }
  return h;
}

std::pair<double, double> density_bounds(const ScenarioTree& tree,
                                         const MartingaleMeasure& q) {
  auto d = density(tree, q);
  double lo = d[0], hi = d[0];
  for (double v : d) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

CompactnessReport check_compactness(const ScenarioTree& tree,
                                    const MartingaleMeasure& q0,
                                    const utility::UtilityFamily& family,
                                    const std::vector<std::size_t>& schedule) {
  if (!q0.equivalent)
    throw std::invalid_argument(
        "check_compactness requires an equivalent measure (zero density "
        "would evaluate the conjugate at 0+)");
  if (schedule.empty())
    throw std::invalid_argument("empty schedule");

  auto dens = density(tree, q0);
  CompactnessReport rep;
  rep.indices = schedule;
  double running_max = -std::numeric_limits<double>::infinity();
  rep.bounded = true;
  for (std::size_t n : schedule) {
    double e = 0.0;
    for (std::size_t k = 0; k < dens.size(); ++k)
      e += tree.path_probability(tree.terminals()[k]) *
           std::fabs(utility::conjugate(family, n, dens[k]));
    rep.values.push_back(e);
    if (running_max > -std::numeric_limits<double>::infinity() &&
        e > running_max + 1e-6)
      rep.bounded = false;
    running_max = std::max(running_max, e);
  }
  rep.sup = running_max;
  return rep;
}

}  // namespace reserve::measures
