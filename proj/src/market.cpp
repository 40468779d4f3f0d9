#include "reserve/market.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace reserve::market {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw schema_error(msg); }

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ScenarioTree::ScenarioTree(std::vector<std::string> asset_names, int horizon,
                           const std::vector<NodeSpec>& specs)
    : asset_names_(std::move(asset_names)), horizon_(horizon) {
  if (horizon_ < 1) fail("horizon must be >= 1, got " + num(horizon_));
  if (asset_names_.empty()) fail("at least one asset required");
  if (specs.empty()) fail("empty node list");

  const int d = static_cast<int>(asset_names_.size());
  const int n = static_cast<int>(specs.size());

  std::unordered_map<std::string, int> index;
  for (int i = 0; i < n; ++i) {
    if (specs[i].id.empty()) fail("node with empty id");
    if (!index.emplace(specs[i].id, i).second)
      fail("duplicate node id '" + specs[i].id + "'");
  }

  ids_.resize(n);
  parent_.assign(n, -1);
  prob_.assign(n, 1.0);
  prices_.resize(n);
  children_.assign(n, {});
  time_.assign(n, -1);

  for (int i = 0; i < n; ++i) {
    const NodeSpec& s = specs[i];
    ids_[i] = s.id;
    if (static_cast<int>(s.prices.size()) != d)
      fail("node '" + s.id + "' has " + num(s.prices.size()) +
           " prices, expected " + num(d));
    for (double p : s.prices)
      if (!std::isfinite(p)) fail("non-finite price at node '" + s.id + "'");
    prices_[i] = s.prices;
    if (s.parent.empty()) {
      if (root_ >= 0)
        fail("multiple roots: '" + ids_[root_] + "' and '" + s.id + "'");
      root_ = i;
    } else {
      auto it = index.find(s.parent);
      if (it == index.end())
        fail("node '" + s.id + "' references unknown parent '" + s.parent +
             "'");
      parent_[i] = it->second;
      children_[it->second].push_back(i);
      if (!(s.prob > 0.0) || !std::isfinite(s.prob))
        fail("non-positive probability " + num(s.prob) + " at node '" + s.id +
             "'");
      prob_[i] = s.prob;
    }
  }
  if (root_ < 0) fail("no root node (exactly one node must have no parent)");

  // Stage assignment along parent links; also detects parent cycles.
  for (int i = 0; i < n; ++i) {
    int steps = 0;
    int j = i;
    while (j != root_ && time_[j] < 0) {
      j = parent_[j];
      if (++steps > n) fail("cycle in parent references at node '" + ids_[i] + "'");
    }
    int t = (j == root_) ? 0 : time_[j];
    j = i;
    std::vector<int> chain;
    while (j != root_ && time_[j] < 0) {
      chain.push_back(j);
      j = parent_[j];
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) time_[*it] = ++t;
  }
  time_[root_] = 0;

  for (int i = 0; i < n; ++i) {
    if (children_[i].empty()) {
      if (time_[i] != horizon_)
        fail("terminal node '" + ids_[i] + "' at stage " + num(time_[i]) +
             ", expected horizon " + num(horizon_));
      terminals_.push_back(i);
    } else {
      if (time_[i] >= horizon_)
        fail("non-terminal node '" + ids_[i] + "' at stage " + num(time_[i]) +
             " >= horizon");
      double sum = 0.0;
      for (int c : children_[i]) sum += prob_[c];
      if (std::fabs(sum - 1.0) > 1e-12)
        fail("probabilities sum to " + num(sum) + " at node " + ids_[i]);
      nonterminals_.push_back(i);
    }
  }

  terminal_ord_.assign(n, -1);
  nonterminal_ord_.assign(n, -1);
  for (int k = 0; k < static_cast<int>(terminals_.size()); ++k)
    terminal_ord_[terminals_[k]] = k;
  for (int k = 0; k < static_cast<int>(nonterminals_.size()); ++k)
    nonterminal_ord_[nonterminals_[k]] = k;

  path_prob_.assign(n, 1.0);
  for (int i = 0; i < n; ++i) {
    double p = 1.0;
    for (int j = i; j != root_; j = parent_[j]) p *= prob_[j];
    path_prob_[i] = p;
    if (!(p > 0.0))
      fail("zero path probability at node '" + ids_[i] + "'");
  }
}

std::optional<int> ScenarioTree::find_node(const std::string& id) const {
  for (int i = 0; i < num_nodes(); ++i)
    if (ids_[i] == id) return i;
  return std::nullopt;
}

int ScenarioTree::terminal_ordinal(int node) const {
  int k = terminal_ord_.at(node);
  if (k < 0) throw std::invalid_argument("node is not terminal");
  return k;
}

int ScenarioTree::nonterminal_ordinal(int node) const {
  int k = nonterminal_ord_.at(node);
  if (k < 0) throw std::invalid_argument("node is terminal");
  return k;
}

Claim zero_claim(const ScenarioTree& tree) {
  return Claim{std::vector<double>(tree.terminals().size(), 0.0)};
}

Strategy zero_strategy(const ScenarioTree& tree) {
  Strategy phi;
  phi.holding.assign(tree.nonterminals().size(),
                     std::vector<double>(tree.num_assets(), 0.0));
  return phi;
}

std::vector<double> value_process(const ScenarioTree& tree, double x,
                                  const Strategy& phi) {
  if (phi.holding.size() != tree.nonterminals().size())
    throw std::invalid_argument("strategy not defined on all non-terminal nodes");
  std::vector<double> wealth(tree.num_nodes(), 0.0);
  wealth[tree.root()] = x;
  // Nodes in file order are not necessarily topological; walk by stage.
  for (int t = 0; t < tree.horizon(); ++t) {
    for (int m : tree.nonterminals()) {
      if (tree.time(m) != t) continue;
      const auto& h = phi.holding[tree.nonterminal_ordinal(m)];
      for (int c : tree.children(m)) {
        double gain = 0.0;
        for (int i = 0; i < tree.num_assets(); ++i)
          gain += h[i] * (tree.prices(c)[i] - tree.prices(m)[i]);
        wealth[c] = wealth[m] + gain;
      }
    }
  }
  return wealth;
}

double path_probability(const ScenarioTree& tree, int node) {
  if (node < 0 || node >= tree.num_nodes())
    throw std::invalid_argument("unknown node index " + std::to_string(node));
  return tree.path_probability(node);
}

PathIncrements path_increments(const ScenarioTree& tree) {
  PathIncrements inc;
  inc.per_terminal.resize(tree.terminals().size());
  for (size_t k = 0; k < tree.terminals().size(); ++k) {
    int node = tree.terminals()[k];
    std::vector<PathIncrements::Leg> legs;
    for (int j = node; j != tree.root(); j = tree.parent(j)) {
      int m = tree.parent(j);
      PathIncrements::Leg leg;
      leg.nonterminal_ordinal = tree.nonterminal_ordinal(m);
      leg.ds.resize(tree.num_assets());
      for (int i = 0; i < tree.num_assets(); ++i)
        leg.ds[i] = tree.prices(j)[i] - tree.prices(m)[i];
      legs.push_back(std::move(leg));
    }
    // Root-to-terminal order.
    inc.per_terminal[k].assign(legs.rbegin(), legs.rend());
  }
  return inc;
}

namespace {

using nlohmann::json;

json parse(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) fail("invalid JSON document");
  return doc;
}

void require_format(const json& doc) {
  if (!doc.is_object() || !doc.contains("format") ||
      doc["format"] != "reserve-market/1")
    fail("missing or unsupported format key (expected \"reserve-market/1\")");
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail("expected a number for " + where);
  return v.get<double>();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ScenarioTree load_market(const std::string& json_text) {
  json doc = parse(json_text);
  require_format(doc);
  if (!doc.contains("assets") || !doc["assets"].is_array() ||
      doc["assets"].empty())
    fail("missing or empty 'assets' array");
  std::vector<std::string> assets;
  for (const auto& a : doc["assets"]) {
    if (!a.is_string()) fail("asset names must be strings");
    assets.push_back(a.get<std::string>());
  }
  if (!doc.contains("horizon") || !doc["horizon"].is_number_integer())
    fail("missing integer 'horizon'");
  int horizon = doc["horizon"].get<int>();
  if (!doc.contains("nodes") || !doc["nodes"].is_array())
    fail("missing 'nodes' array");

  std::vector<NodeSpec> specs;
  for (const auto& nj : doc["nodes"]) {
    if (!nj.is_object()) fail("node entries must be objects");
    NodeSpec s;
    if (!nj.contains("id") || !nj["id"].is_string())
      fail("node without string 'id'");
    s.id = nj["id"].get<std::string>();
    if (nj.contains("parent") && !nj["parent"].is_null()) {
      if (!nj["parent"].is_string())
        fail("'parent' of node '" + s.id + "' must be a string or null");
      s.parent = nj["parent"].get<std::string>();
    }
    if (s.parent.empty()) {
      if (nj.contains("prob"))
        fail("root node '" + s.id + "' must not carry 'prob'");
    } else {
      if (!nj.contains("prob"))
        fail("node '" + s.id + "' missing 'prob'");
      s.prob = as_number(nj["prob"], "'prob' of node '" + s.id + "'");
    }
    if (!nj.contains("prices") || !nj["prices"].is_array())
      fail("node '" + s.id + "' missing 'prices' array");
    for (const auto& p : nj["prices"])
      s.prices.push_back(as_number(p, "price of node '" + s.id + "'"));
    specs.push_back(std::move(s));
  }
  return ScenarioTree(std::move(assets), horizon, specs);
}

ScenarioTree load_market_file(const std::string& path) {
  return load_market(read_file(path));
}

std::vector<std::pair<std::string, Claim>> load_claims(
    const std::string& json_text, const ScenarioTree& tree) {
  json doc = parse(json_text);
  require_format(doc);
  if (!doc.contains("claims") || !doc["claims"].is_array())
    fail("missing 'claims' array");

  std::vector<std::pair<std::string, Claim>> out;
  for (const auto& cj : doc["claims"]) {
    if (!cj.is_object() || !cj.contains("name") || !cj["name"].is_string())
      fail("claim without string 'name'");
    std::string name = cj["name"].get<std::string>();
    if (!cj.contains("payoffs") || !cj["payoffs"].is_object())
      fail("claim '" + name + "' missing 'payoffs' object");

    Claim claim;
    claim.payoff.assign(tree.terminals().size(),
                        std::numeric_limits<double>::quiet_NaN());
    for (const auto& [id, v] : cj["payoffs"].items()) {
      auto node = tree.find_node(id);
      if (!node || !tree.is_terminal(*node))
        fail("claim '" + name + "' pays at unknown terminal '" + id + "'");
      double pay = as_number(v, "payoff '" + id + "' of claim '" + name + "'");
      if (!std::isfinite(pay))
        fail("claim '" + name + "' has non-finite payoff at '" + id + "'");
      claim.payoff[tree.terminal_ordinal(*node)] = pay;
    }
    for (size_t k = 0; k < claim.payoff.size(); ++k)
      if (std::isnan(claim.payoff[k]))
        fail("claim '" + name + "' missing payoff at terminal '" +
             tree.node_id(tree.terminals()[k]) + "'");
    out.emplace_back(std::move(name), std::move(claim));
  }
  return out;
}

std::vector<std::pair<std::string, Claim>> load_claims_file(
    const std::string& path, const ScenarioTree& tree) {
  return load_claims(read_file(path), tree);
}

}  // namespace reserve::market
