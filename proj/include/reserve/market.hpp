#pragma once
/**
 * @file market.hpp
 * @brief Finite discrete-time market model on a scenario tree.
 *
 * The market (Omega, F_t, P, S) is a finite rooted event tree: each node
 * carries a conditional transition probability and a vector of d asset
 * prices. Claims pay at terminal nodes, strategies hold assets at
 * non-terminal nodes, and wealth propagates along edges via the price
 * increments. Everything here is immutable after construction and safe to
 * share across threads.
 */

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace reserve::market {

/// Thrown by the loaders on malformed documents or invariant violations.
struct schema_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input description of a single tree node (file order preserved).
struct NodeSpec {
  std::string id;
  std::string parent;  // empty for the root
  double prob = 1.0;   // conditional transition probability; ignored for root
  std::vector<double> prices;
};

class ScenarioTree {
 public:
  /// Builds and validates a tree from node specs in file order.
  /// Throws schema_error naming the offending node on any violation.
  ScenarioTree(std::vector<std::string> asset_names, int horizon,
               const std::vector<NodeSpec>& specs);

  int num_nodes() const { return static_cast<int>(ids_.size()); }
  int num_assets() const { return static_cast<int>(asset_names_.size()); }
  int horizon() const { return horizon_; }
  int root() const { return root_; }

  const std::vector<std::string>& asset_names() const { return asset_names_; }
  const std::string& node_id(int node) const { return ids_.at(node); }
  std::optional<int> find_node(const std::string& id) const;

  int parent(int node) const { return parent_.at(node); }  // -1 for root
  int time(int node) const { return time_.at(node); }
  double prob(int node) const { return prob_.at(node); }
  const std::vector<double>& prices(int node) const { return prices_.at(node); }
  const std::vector<int>& children(int node) const { return children_.at(node); }
  bool is_terminal(int node) const { return children_.at(node).empty(); }

  /// Terminal / non-terminal node indices in file order.
  const std::vector<int>& terminals() const { return terminals_; }
  const std::vector<int>& nonterminals() const { return nonterminals_; }

  /// Position of a terminal node within terminals(); throws if not terminal.
  int terminal_ordinal(int node) const;
  /// Position of a non-terminal node within nonterminals(); throws otherwise.
  int nonterminal_ordinal(int node) const;

  double path_probability(int node) const { return path_prob_.at(node); }

 private:
  std::vector<std::string> asset_names_;
  int horizon_ = 0;
  int root_ = -1;
  std::vector<std::string> ids_;
  std::vector<int> parent_;
  std::vector<int> time_;
  std::vector<double> prob_;
  std::vector<std::vector<double>> prices_;
  std::vector<std::vector<int>> children_;
  std::vector<int> terminals_;
  std::vector<int> nonterminals_;
  std::vector<int> terminal_ord_;
  std::vector<int> nonterminal_ord_;
  std::vector<double> path_prob_;
};

/// Contingent claim: payoff per terminal node, indexed by terminal ordinal.
struct Claim {
  std::vector<double> payoff;

  double at(int terminal_ordinal) const { return payoff.at(terminal_ordinal); }
};

/// Zero claim on the given tree.
Claim zero_claim(const ScenarioTree& tree);

/// Trading strategy: asset holdings per non-terminal node (predictable
/// process), indexed by non-terminal ordinal. On a finite tree every
/// strategy is admissible, so no credit line is recorded.
struct Strategy {
  std::vector<std::vector<double>> holding;
};

/// All-zero strategy on the given tree.
Strategy zero_strategy(const ScenarioTree& tree);

/// Wealth process of strategy `phi` from initial capital `x`: value at the
/// root is x, and wealth at a child c of node m is
/// wealth(m) + holding(m) . (price(c) - price(m)). Returns one value per
/// node, indexed by node.
std::vector<double> value_process(const ScenarioTree& tree, double x,
                                  const Strategy& phi);

/// Product of conditional probabilities along the root->node path.
double path_probability(const ScenarioTree& tree, int node);

/// For each terminal (by ordinal), the list of
/// (non-terminal ordinal, price increment vector) pairs along its path:
/// increment = price(next node on the path) - price(node). This is the
/// linear map phi -> terminal gains shared by the LP builders and the
/// utility optimizer.
struct PathIncrements {
  struct Leg {
    int nonterminal_ordinal;
    std::vector<double> ds;
  };
  std::vector<std::vector<Leg>> per_terminal;
};
PathIncrements path_increments(const ScenarioTree& tree);

/// Parses a reserve-market/1 market document (JSON text).
ScenarioTree load_market(const std::string& json_text);
/// Reads and parses a market file from disk.
ScenarioTree load_market_file(const std::string& path);

/// Parses a reserve-market/1 claims document; every claim must assign a
/// finite payoff to every terminal node of `tree`. Returns (name, claim)
/// pairs in file order.
std::vector<std::pair<std::string, Claim>> load_claims(
    const std::string& json_text, const ScenarioTree& tree);
std::vector<std::pair<std::string, Claim>> load_claims_file(
    const std::string& path, const ScenarioTree& tree);

}  // namespace reserve::market
