#include "reserve/optimize.hpp"

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>

namespace reserve::optimize {

namespace {

using market::ScenarioTree;

constexpr double kWealthGuard = 1e8;   // unbounded-direction detector
constexpr int kMaxIterations = 500;

// Dense sensitivity matrix: row per terminal, column per (non-terminal,
// asset) holding; entry = price increment along the terminal's path.
struct Stacked {
  Eigen::MatrixXd A;       // nt x nvar
  Eigen::VectorXd p;       // physical terminal probabilities
  Eigen::VectorXd g;       // claim payoffs
  std::vector<double> w;   // scratch wealth per terminal
};

Stacked build(const ScenarioTree& tree, const market::Claim& claim) {
  const int nt = static_cast<int>(tree.terminals().size());
  const int d = tree.num_assets();
  const int nvar = static_cast<int>(tree.nonterminals().size()) * d;
  Stacked s;
  s.A = Eigen::MatrixXd::Zero(nt, nvar);
  s.p.resize(nt);
  s.g.resize(nt);
  s.w.resize(nt);
  auto inc = market::path_increments(tree);
  for (int k = 0; k < nt; ++k) {
    s.p[k] = tree.path_probability(tree.terminals()[k]);
    s.g[k] = claim.payoff.at(k);
    for (const auto& leg : inc.per_terminal[k])
      for (int i = 0; i < d; ++i)
        s.A(k, leg.nonterminal_ordinal * d + i) += leg.ds[i];
  }
  return s;
}

struct Eval {
  double f = 0.0;
  bool clamped = false;
  double max_abs_wealth = 0.0;
};

Eval evaluate(const Stacked& s, const utility::UtilityFamily& family,
              std::size_t n, double x, const Eigen::VectorXd& phi,
              std::vector<double>& wealth) {
  Eigen::VectorXd gains = s.A * phi;
  Eval e;
  for (int k = 0; k < gains.size(); ++k) {
    double w = x + gains[k] - s.g[k];
    wealth[k] = w;
    e.f += s.p[k] * family.value(n, w);
    e.clamped = e.clamped || family.evaluation_clamped(n, w);
    e.max_abs_wealth = std::max(e.max_abs_wealth, std::fabs(w));
  }
  return e;
}

}  // namespace

OptResult max_expected_utility(const ScenarioTree& tree,
                               const utility::UtilityFamily& family,
                               std::size_t n, double x,
                               const market::Claim& claim, double tol,
                               const measures::MartingaleMeasure* dual_reference) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  Stacked s = build(tree, claim);
  const int nt = static_cast<int>(s.p.size());
  const int nvar = static_cast<int>(s.A.cols());

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(nvar);
  std::vector<double> wealth(nt), trial_wealth(nt);
  Eval cur = evaluate(s, family, n, x, phi, wealth);

  Eigen::VectorXd grad(nvar);
  double grad_norm = 0.0;
  int it = 0;
  int stalled = 0;
  for (; it < kMaxIterations; ++it) {
    // Gradient and Hessian at the current iterate.
    Eigen::VectorXd du(nt), d2u(nt);
    for (int k = 0; k < nt; ++k) {
      du[k] = s.p[k] * family.marginal(n, wealth[k]);
      d2u[k] = s.p[k] * family.curvature(n, wealth[k]);
    }
    grad = s.A.transpose() * du;
    grad_norm = grad.norm();
    if (grad_norm <= tol * std::max(1.0, std::fabs(cur.f))) break;

    Eigen::MatrixXd H = s.A.transpose() * d2u.asDiagonal() * s.A;

    // Damped Newton direction; grow the damping until the step is a usable
    // ascent direction, then fall back to plain gradient ascent.
    Eigen::VectorXd dir;
    double mu = 0.0;
    bool have_dir = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Eigen::MatrixXd M = -H;
      if (mu > 0.0) M.diagonal().array() += mu;
      if (M.allFinite()) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
        if (ldlt.info() == Eigen::Success) {
          dir = ldlt.solve(grad);
          if (dir.allFinite() && grad.dot(dir) > 0.0) {
            have_dir = true;
            break;
          }
        }
      }
      mu = (mu == 0.0) ? 1e-8 * std::max(1.0, H.cwiseAbs().maxCoeff())
                       : 10.0 * mu;
      if (!std::isfinite(mu)) break;
    }
    if (!have_dir) dir = grad / std::max(1.0, grad_norm);

    // Armijo backtracking for a strictly improving step. A bare Newton step
    // can be far too short in stiff exponential regions (progress ~ 1/alpha
    // per step), so a full accepted step is followed by doubling expansion,
    // which concavity makes safe.
    double slope = grad.dot(dir);
    double t = 1.0;
    bool accepted = false;
    double f_before = cur.f;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd cand = phi + t * dir;
      Eval trial = evaluate(s, family, n, x, cand, trial_wealth);
      if (std::isfinite(trial.f) && trial.f > cur.f &&
          trial.f >= cur.f + 1e-4 * t * slope) {
        phi = std::move(cand);
        cur = trial;
        wealth.swap(trial_wealth);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (accepted && t == 1.0) {
      double stride = 1.0;  // doubling the total step each round
      for (int e = 0; e < 40; ++e, stride *= 2.0) {
        Eigen::VectorXd cand = phi + stride * dir;
        Eval trial = evaluate(s, family, n, x, cand, trial_wealth);
        if (!std::isfinite(trial.f) || trial.f <= cur.f) break;
        phi = std::move(cand);
        cur = trial;
        wealth.swap(trial_wealth);
      }
    } else if (!accepted) {
      // Where the overflow guard saturates a branch, f is flat to double
      // precision while the gradient still points out of the region. March
      // in doubling strides until the objective visibly changes.
      double stride = 1.0;
      for (int e = 0; e < 70; ++e, stride *= 2.0) {
        Eigen::VectorXd cand = phi + stride * dir;
        Eval trial = evaluate(s, family, n, x, cand, trial_wealth);
        if (!std::isfinite(trial.f) || trial.f < cur.f) break;
        if (trial.f > cur.f) {
          phi = std::move(cand);
          cur = trial;
          wealth.swap(trial_wealth);
          accepted = true;
          break;
        }
      }
    }
    if (cur.max_abs_wealth > kWealthGuard)
      throw measures::arbitrage_error(
          "unbounded ascent direction: wealth exceeded the guard, the market "
          "admits arbitrage");

    // Near the optimum the achievable improvement drops below the floating
    // point resolution of f; stop once that happens repeatedly, provided the
    // gradient is small at a loosened threshold.
    double noise = 4.0 * std::numeric_limits<double>::epsilon() *
                   std::max(1.0, std::fabs(cur.f));
    stalled = (!accepted || cur.f - f_before <= noise) ? stalled + 1 : 0;
    if (stalled >= 3 || (!accepted && stalled >= 1)) {
      if (grad_norm <= std::sqrt(tol) * std::max(1.0, std::fabs(cur.f))) break;
      if (!accepted) {
        std::ostringstream os;
        os << "utility maximization stalled after " << it
           << " iterations, gradient norm " << grad_norm;
        throw std::runtime_error(os.str());
      }
    }
  }
  if (it >= kMaxIterations) {
    std::ostringstream os;
    os << "utility maximization did not converge in " << kMaxIterations
       << " iterations, gradient norm " << grad_norm;
    throw std::runtime_error(os.str());
  }
  // The optimum itself must sit where the exponential overflow guard is
  // inactive; the ascent path may transit the guarded region (the guard
  // saturates utilities that are not representable in doubles anyway), but a
  // clamped termination point would mean the returned value is corrupt.
  assert(!cur.clamped && "overflow guard active at the returned optimum");

  OptResult res;
  res.value = cur.f;
  res.gradient_norm = grad_norm;
  res.iterations = it;
  res.strategy = market::zero_strategy(tree);
  const int d = tree.num_assets();
  for (std::size_t mo = 0; mo < tree.nonterminals().size(); ++mo)
    for (int i = 0; i < d; ++i)
      res.strategy.holding[mo][i] = phi[static_cast<int>(mo) * d + i];
  if (dual_reference)
    res.dual_gap =
        dual_upper_bound(tree, family, n, x, claim, *dual_reference, 1.0) -
        res.value;
  return res;
}

double dual_upper_bound(const ScenarioTree& tree,
                        const utility::UtilityFamily& family, std::size_t n,
                        double x, const market::Claim& claim,
                        const measures::MartingaleMeasure& q, double y) {
  if (!(y > 0.0)) throw std::invalid_argument("y must be positive");
  auto dens = measures::density(tree, q);
  double expected_conjugate = 0.0;
  double eqg = 0.0;
  for (std::size_t k = 0; k < dens.size(); ++k) {
    double p = tree.path_probability(tree.terminals()[k]);
    double t = y * dens[k];
    expected_conjugate +=
        p * (t > 0.0 ? utility::conjugate(family, n, t)
                     : utility::conjugate_limit_at_zero(family, n));
    eqg += q.weight[k] * claim.payoff.at(k);
  }
  return expected_conjugate + y * (x - eqg);
}

double dual_upper_bound_best(const ScenarioTree& tree,
                             const utility::UtilityFamily& family,
                             std::size_t n, double x,
                             const market::Claim& claim,
                             const measures::MartingaleMeasure& q) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = -20; k <= 20; ++k)
    best = std::min(best,
                    dual_upper_bound(tree, family, n, x, claim, q,
                                     std::ldexp(1.0, k)));
  return best;
}

}  // namespace reserve::optimize
