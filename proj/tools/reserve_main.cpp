// reserve: indifference and superreplication prices on scenario-tree markets.
//
// Subcommands:
//   superrep  --market M --claims C --claim NAME     dual/primal hedge price
//   price     --config CFG [--index K]               one indifference price
//   sweep     --config CFG [--out PATH]              risk-aversion sweep CSV
//   check     --config CFG                           hypothesis diagnostics
//
// Exit codes: 0 success, 1 usage/IO/failed checks, 2 model infeasibility.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "reserve/curve_csv.hpp"
#include "reserve/diagnostics.hpp"
#include "reserve/market.hpp"
#include "reserve/measures.hpp"
#include "reserve/optimize.hpp"
#include "reserve/pricing.hpp"
#include "reserve/utility.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace reserve;

struct Config {
  market::ScenarioTree tree;
  std::vector<std::pair<std::string, market::Claim>> claims;
  std::string claim_name;
  utility::UtilityFamily family;
  double z = 0.0;
  double x0 = 0.0;
  double price_tol = pricing::kDefaultPriceTol;
  double u_tol = pricing::kDefaultUtilityTol;
  std::string out;
  bool normalize_mode = false;  // mode "main2"
  diagnostics::CheckOptions check;
};

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw market::schema_error("cannot open file '" + path + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded())
    throw market::schema_error("invalid JSON in '" + path + "'");
  return doc;
}

std::string resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() ? q.string() : (base / q).string();
}

utility::UtilityFamily parse_family(const json& fj) {
  if (!fj.is_object() || !fj.contains("kind") || !fj.contains("schedule"))
    throw market::schema_error("family spec needs 'kind' and 'schedule'");
  std::vector<double> schedule;
  for (const auto& v : fj["schedule"]) {
    if (!v.is_number())
      throw market::schema_error("family schedule entries must be numbers");
    schedule.push_back(v.get<double>());
  }
  std::string kind = fj["kind"].get<std::string>();
  if (kind == "exponential") return utility::UtilityFamily::exponential(schedule);
  if (kind == "power") return utility::UtilityFamily::power(schedule);
  throw market::schema_error("unknown family kind '" + kind +
                             "' (expected exponential or power)");
}

// requires_claim: sweep/price resolve the named claim; check does not.
// requires_increasing: sweeps need a strictly increasing schedule.
Config load_config(const std::string& path, bool requires_claim,
                   bool requires_increasing) {
  json doc = load_json_file(path);
  fs::path base = fs::path(path).parent_path();
  if (!doc.contains("market") || !doc.contains("family"))
    throw market::schema_error("config needs 'market' and 'family'");

  Config cfg{market::load_market_file(
                 resolve(base, doc["market"].get<std::string>())),
             {},
             {},
             parse_family(doc["family"]),
             0.0,
             0.0,
             pricing::kDefaultPriceTol,
             pricing::kDefaultUtilityTol,
             {},
             false,
             {}};
  if (doc.contains("z")) cfg.z = doc["z"].get<double>();
  if (doc.contains("x0")) cfg.x0 = doc["x0"].get<double>();
  if (doc.contains("price_tol")) cfg.price_tol = doc["price_tol"].get<double>();
  if (doc.contains("u_tol")) cfg.u_tol = doc["u_tol"].get<double>();
  if (doc.contains("out"))
    cfg.out = resolve(base, doc["out"].get<std::string>());
  if (doc.contains("mode")) {
    std::string mode = doc["mode"].get<std::string>();
    if (mode != "main" && mode != "main2")
      throw market::schema_error("mode must be 'main' or 'main2'");
    cfg.normalize_mode = (mode == "main2");
  }
  cfg.check.x0 = cfg.x0;
  if (doc.contains("check")) {
    const json& cj = doc["check"];
    if (cj.contains("divergence_threshold"))
      cfg.check.divergence_threshold = cj["divergence_threshold"].get<double>();
    if (cj.contains("asymptotic_range"))
      cfg.check.asymptotic_range = cj["asymptotic_range"].get<double>();
  }

  if (requires_increasing) {
    const auto& s = cfg.family.schedule();
    for (std::size_t k = 1; k < s.size(); ++k)
      if (!(s[k] > s[k - 1]))
        throw market::schema_error(
            "family schedule must be strictly increasing for this command");
  }

  if (requires_claim) {
    if (!doc.contains("claims") || !doc.contains("claim"))
      throw market::schema_error("config needs 'claims' and 'claim'");
    cfg.claims = market::load_claims_file(
        resolve(base, doc["claims"].get<std::string>()), cfg.tree);
    cfg.claim_name = doc["claim"].get<std::string>();
    bool found = false;
    for (const auto& [name, c] : cfg.claims) found = found || name == cfg.claim_name;
    if (!found)
      throw market::schema_error("claim '" + cfg.claim_name +
                                 "' not found in claims file");
  }
  return cfg;
}

const market::Claim& find_claim(const Config& cfg) {
  for (const auto& [name, c] : cfg.claims)
    if (name == cfg.claim_name) return c;
  throw market::schema_error("claim '" + cfg.claim_name + "' not found");
}

int cmd_superrep(const std::string& market_path, const std::string& claims_path,
                 const std::string& claim_name) {
  auto tree = market::load_market_file(market_path);
  auto claims = market::load_claims_file(claims_path, tree);
  const market::Claim* claim = nullptr;
  for (const auto& [name, c] : claims)
    if (name == claim_name) claim = &c;
  if (!claim)
    throw market::schema_error("claim '" + claim_name +
                               "' not found in claims file");

  auto res = measures::superreplication_price(tree, *claim);
  std::cout << "superreplication price: " << res.price << "\n";
  std::cout << "primal initial capital: " << res.initial_capital
            << " (duality gap " << res.duality_gap << ")\n";
  std::cout << "optimal measure"
            << (res.optimal_measure.equivalent
                    ? ""
                    : " (closure element: some weights are zero)")
            << ":\n";
  for (std::size_t k = 0; k < tree.terminals().size(); ++k)
    std::cout << "  " << tree.node_id(tree.terminals()[k]) << ": "
              << res.optimal_measure.weight[k] << "\n";
  std::cout << "hedge strategy:\n";
  for (std::size_t mo = 0; mo < tree.nonterminals().size(); ++mo) {
    std::cout << "  " << tree.node_id(tree.nonterminals()[mo]) << ":";
    for (double h : res.strategy.holding[mo]) std::cout << " " << h;
    std::cout << "\n";
  }
  return 0;
}

int cmd_price(const std::string& config_path, int index) {
  Config cfg = load_config(config_path, true, true);
  std::size_t n = index >= 0 ? static_cast<std::size_t>(index)
                             : cfg.family.size() - 1;
  if (n >= cfg.family.size())
    throw market::schema_error("schedule index out of range");
  const auto family = cfg.normalize_mode
                          ? utility::normalize(cfg.family, cfg.z)
                          : cfg.family;
  auto pt = pricing::indifference_price(cfg.tree, family, n, cfg.z,
                                        find_claim(cfg), cfg.price_tol,
                                        cfg.u_tol);
  std::cout << "claim " << cfg.claim_name << ", alpha = " << pt.alpha
            << ", z = " << cfg.z << "\n";
  std::cout << "indifference price: " << pt.price << "\n";
  std::cout << "superreplication gap: " << pt.gap << "\n";
  std::cout << "u without claim: " << pt.u_no_claim << ", with claim at p: "
            << pt.u_with_claim_at_price << " (bisection steps "
            << pt.iterations << ")\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override) {
  Config cfg = load_config(config_path, true, true);
  std::string out = out_override.empty() ? cfg.out : out_override;
  if (out.empty())
    throw market::schema_error("no output path: set 'out' or pass --out");

  auto curve = pricing::convergence_sweep(
      cfg.tree, cfg.family, utility::full_schedule(cfg.family), cfg.z,
      find_claim(cfg), cfg.price_tol, cfg.u_tol, cfg.normalize_mode,
      cfg.claim_name);
  pricing::write_curve_csv(out, curve);
  std::cout << "wrote " << curve.points.size() << " rows to " << out
            << " (superreplication " << curve.superrep << ", final gap "
            << curve.final_gap << ", gaps "
            << (curve.gaps_nonincreasing ? "nonincreasing" : "not monotone")
            << ")\n";
  return 0;
}

int cmd_check(const std::string& config_path) {
  Config cfg = load_config(config_path, false, false);
  auto q0 = measures::interior_measure(cfg.tree);
  auto outcome = diagnostics::run_checks(cfg.tree, cfg.family, q0, cfg.check);
  std::cout << outcome.rendered;
  return outcome.any_fail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"indifference and superreplication prices on scenario trees"};
  app.require_subcommand(1);

  std::string market_path, claims_path, claim_name;
  auto* sup = app.add_subcommand("superrep", "superreplication price of a claim");
  sup->add_option("--market", market_path, "market file")->required();
  sup->add_option("--claims", claims_path, "claims file")->required();
  sup->add_option("--claim", claim_name, "claim name")->required();

  std::string config_path;
  int index = -1;
  auto* price = app.add_subcommand("price", "indifference price at one index");
  price->add_option("--config", config_path, "experiment config")->required();
  price->add_option("--index", index, "schedule index (default: last)");

  std::string out_path;
  auto* sweep = app.add_subcommand("sweep", "risk-aversion convergence sweep");
  sweep->add_option("--config", config_path, "experiment config")->required();
  sweep->add_option("--out", out_path, "output CSV (overrides config)");

  auto* check = app.add_subcommand("check", "hypothesis diagnostics");
  check->add_option("--config", config_path, "experiment config")->required();

  try {
    app.parse(argc, argv);
    if (sup->parsed()) return cmd_superrep(market_path, claims_path, claim_name);
    if (price->parsed()) return cmd_price(config_path, index);
    if (sweep->parsed()) return cmd_sweep(config_path, out_path);
    if (check->parsed()) return cmd_check(config_path);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const measures::arbitrage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
