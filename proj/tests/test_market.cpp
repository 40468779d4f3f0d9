#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "reserve/market.hpp"
#include "reserve/measures.hpp"
#include "testutil.hpp"

using namespace reserve;
using namespace testutil;

namespace {

const char* kBinomialDoc = R"({
  "format": "reserve-market/1",
  "assets": ["S"],
  "horizon": 1,
  "nodes": [
    {"id": "root", "parent": null, "prices": [1.0]},
    {"id": "up", "parent": "root", "prob": 0.6, "prices": [2.0]},
    {"id": "down", "parent": "root", "prob": 0.4, "prices": [0.5]}
  ]
})";

}  // namespace

TEST_CASE("load_market parses the one-step binomial") {
  auto tree = market::load_market(kBinomialDoc);
  CHECK(tree.num_nodes() == 3);
  CHECK(tree.horizon() == 1);
  CHECK(tree.num_assets() == 1);
  CHECK(tree.node_id(tree.root()) == "root");
  CHECK(tree.terminals().size() == 2);
  CHECK(tree.prices(*tree.find_node("up"))[0] == 2.0);
  CHECK(tree.prob(*tree.find_node("down")) == 0.4);
}

TEST_CASE("load_market rejects probabilities that do not sum to 1") {
  std::string doc = kBinomialDoc;
  auto pos = doc.find("0.4");
  doc.replace(pos, 3, "0.5");
  CHECK_THROWS_WITH_AS(market::load_market(doc),
                       doctest::Contains("probabilities sum to 1.1 at node root"),
                       market::schema_error);
}

TEST_CASE("load_market parses a trinomial") {
  auto tree = market::load_market(R"({
    "format": "reserve-market/1",
    "assets": ["S"], "horizon": 1,
    "nodes": [
      {"id": "r", "parent": null, "prices": [1.0]},
      {"id": "a", "parent": "r", "prob": 0.3333333333333333, "prices": [2.0]},
      {"id": "b", "parent": "r", "prob": 0.3333333333333333, "prices": [1.0]},
      {"id": "c", "parent": "r", "prob": 0.3333333333333334, "prices": [0.5]}
    ]})");
  CHECK(tree.num_nodes() == 4);
}

TEST_CASE("load_market reports schema violations with the node id") {
  SUBCASE("dangling parent") {
    CHECK_THROWS_WITH_AS(
        market::load_market(R"({"format": "reserve-market/1", "assets": ["S"],
          "horizon": 1, "nodes": [
            {"id": "r", "parent": null, "prices": [1.0]},
            {"id": "x", "parent": "ghost", "prob": 1.0, "prices": [1.0]}]})"),
        doctest::Contains("unknown parent 'ghost'"), market::schema_error);
  }
  SUBCASE("non-positive probability") {
    CHECK_THROWS_WITH_AS(
        market::load_market(R"({"format": "reserve-market/1", "assets": ["S"],
          "horizon": 1, "nodes": [
            {"id": "r", "parent": null, "prices": [1.0]},
            {"id": "u", "parent": "r", "prob": 1.5, "prices": [2.0]},
            {"id": "d", "parent": "r", "prob": -0.5, "prices": [0.5]}]})"),
        doctest::Contains("non-positive probability"), market::schema_error);
  }
  SUBCASE("missing format key") {
    CHECK_THROWS_AS(market::load_market("{}"), market::schema_error);
  }
  SUBCASE("two roots") {
    CHECK_THROWS_WITH_AS(
        market::load_market(R"({"format": "reserve-market/1", "assets": ["S"],
          "horizon": 1, "nodes": [
            {"id": "r", "parent": null, "prices": [1.0]},
            {"id": "q", "parent": null, "prices": [1.0]}]})"),
        doctest::Contains("multiple roots"), market::schema_error);
  }
}

TEST_CASE("value_process replicates the strike-1 call on the binomial") {
  // 2x2 replication by hand: phi = (1-0)/(2-0.5) = 2/3, x = 1 - phi = 1/3.
  auto tree = binomial_tree();
  market::Strategy phi{{{2.0 / 3.0}}};
  auto wealth = market::value_process(tree, 1.0 / 3.0, phi);
  CHECK(wealth[*tree.find_node("up")] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(wealth[*tree.find_node("down")] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("value_process of the zero strategy is constant") {
  auto tree = trinomial_tree();
  auto wealth = market::value_process(tree, 0.7, market::zero_strategy(tree));
  for (int i = 0; i < tree.num_nodes(); ++i)
    CHECK(wealth[i] == doctest::Approx(0.7));
}

TEST_CASE("value_process on the trinomial with unit holding") {
  auto tree = trinomial_tree();
  market::Strategy phi{{{1.0}}};
  auto wealth = market::value_process(tree, 0.0, phi);
  CHECK(wealth[*tree.find_node("up")] == doctest::Approx(1.0));
  CHECK(wealth[*tree.find_node("mid")] == doctest::Approx(0.0));
  CHECK(wealth[*tree.find_node("down")] == doctest::Approx(-0.5));
}

TEST_CASE("path probabilities multiply along edges") {
  auto tree = ScenarioTree({"S"}, 2,
                           {{"r", "", 1.0, {1.0}},
                            {"u", "r", 0.6, {2.0}},
                            {"d", "r", 0.4, {0.5}},
                            {"uu", "u", 0.5, {3.0}},
                            {"ud", "u", 0.5, {1.5}},
                            {"du", "d", 0.5, {1.0}},
                            {"dd", "d", 0.5, {0.25}}});
  CHECK(market::path_probability(tree, tree.root()) == 1.0);
  CHECK(market::path_probability(tree, *tree.find_node("u")) ==
        doctest::Approx(0.6));
  CHECK(market::path_probability(tree, *tree.find_node("uu")) ==
        doctest::Approx(0.3));
  CHECK_THROWS_AS(market::path_probability(tree, 99), std::invalid_argument);
}

TEST_CASE("value_process is affine in (x, phi) and path probs sum to 1") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 40; ++trial) {
    RandomTreeOptions opt;
    opt.assets = 1 + trial % 2;
    auto tree = random_tree(rng, opt);

    double total = 0.0;
    for (int node : tree.terminals()) total += tree.path_probability(node);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    market::Strategy phi = market::zero_strategy(tree);
    for (auto& h : phi.holding)
      for (double& v : h) v = coef(rng);
    double x = coef(rng), a = coef(rng), lam = coef(rng);

    auto w = market::value_process(tree, x, phi);
    auto w_shift = market::value_process(tree, x + a, phi);
    market::Strategy scaled = phi;
    for (auto& h : scaled.holding)
      for (double& v : h) v *= lam;
    auto w_scaled = market::value_process(tree, x, scaled);
    for (int i = 0; i < tree.num_nodes(); ++i) {
      CHECK(w_shift[i] == doctest::Approx(w[i] + a).epsilon(1e-12).scale(1.0));
      CHECK(w_scaled[i] - x ==
            doctest::Approx(lam * (w[i] - x)).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("gains have zero expectation under any martingale measure") {
  // Finite-space form of the supermartingale property: equality on trees.
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    auto tree = random_tree(rng);
    auto q = measures::interior_measure(tree);
    market::Strategy phi = market::zero_strategy(tree);
    for (auto& h : phi.holding)
      for (double& v : h) v = coef(rng);
    auto wealth = market::value_process(tree, 0.0, phi);
    double eq = 0.0;
    for (std::size_t k = 0; k < tree.terminals().size(); ++k)
      eq += q.weight[k] * wealth[tree.terminals()[k]];
    CHECK(std::fabs(eq) <= 1e-10);
  }
}

TEST_CASE("claims load and validate against the tree") {
  auto tree = market::load_market(kBinomialDoc);
  auto claims = market::load_claims(R"({
    "format": "reserve-market/1",
    "claims": [
      {"name": "call", "payoffs": {"up": 1.0, "down": 0.0}},
      {"name": "cash", "payoffs": {"up": 5.0, "down": 5.0}}
    ]})",
                                    tree);
  REQUIRE(claims.size() == 2);
  CHECK(claims[0].first == "call");
  CHECK(claims[0].second.payoff[tree.terminal_ordinal(*tree.find_node("up"))] ==
        1.0);

  CHECK_THROWS_WITH_AS(
      market::load_claims(R"({"format": "reserve-market/1", "claims": [
        {"name": "bad", "payoffs": {"up": 1.0}}]})",
                          tree),
      doctest::Contains("missing payoff at terminal 'down'"),
      market::schema_error);
  CHECK_THROWS_WITH_AS(
      market::load_claims(R"({"format": "reserve-market/1", "claims": [
        {"name": "bad", "payoffs": {"up": 1.0, "down": 0.0, "root": 1.0}}]})",
                          tree),
      doctest::Contains("unknown terminal 'root'"), market::schema_error);
}
