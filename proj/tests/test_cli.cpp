// Drives the reserve binary end to end: subcommands, exit codes, CSV output.
// argv[1] must be the path to the built executable.
#define DOCTEST_CONFIG_IMPLEMENT
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "reserve/curve_csv.hpp"
#include "reserve/pricing.hpp"
#include "testutil.hpp"

namespace fs = std::filesystem;

namespace {

std::string g_binary;
fs::path g_dir;

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunResult run(const std::string& args) {
  fs::path out = g_dir / "stdout.txt", err = g_dir / "stderr.txt";
  std::string cmd = "'" + g_binary + "' " + args + " > '" + out.string() +
                    "' 2> '" + err.string() + "'";
  int rc = std::system(cmd.c_str());
  int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return {code, slurp(out), slurp(err)};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kTrinomialMarket = R"({
  "format": "reserve-market/1",
  "assets": ["S"],
  "horizon": 1,
  "nodes": [
    {"id": "root", "parent": null, "prices": [1.0]},
    {"id": "up",   "parent": "root", "prob": 0.3333333333333333, "prices": [2.0]},
    {"id": "mid",  "parent": "root", "prob": 0.3333333333333333, "prices": [1.0]},
    {"id": "down", "parent": "root", "prob": 0.3333333333333334, "prices": [0.5]}
  ]
})";

const char* kClaims = R"({
  "format": "reserve-market/1",
  "claims": [
    {"name": "call", "payoffs": {"up": 1.0, "mid": 0.0, "down": 0.0}},
    {"name": "cash5", "payoffs": {"up": 5.0, "mid": 5.0, "down": 5.0}}
  ]
})";

const char* kArbitrageMarket = R"({
  "format": "reserve-market/1",
  "assets": ["S"],
  "horizon": 1,
  "nodes": [
    {"id": "root", "parent": null, "prices": [1.0]},
    {"id": "up",   "parent": "root", "prob": 0.5, "prices": [2.0]},
    {"id": "down", "parent": "root", "prob": 0.5, "prices": [1.5]}
  ]
})";

const char* kArbitrageClaims = R"({
  "format": "reserve-market/1",
  "claims": [
    {"name": "call", "payoffs": {"up": 1.0, "down": 0.5}}
  ]
})";

std::string sweep_config(const std::string& schedule, const std::string& mode,
                         double z, const std::string& out_name,
                         const std::string& kind = "exponential") {
  std::ostringstream os;
  os << R"({
  "market": "market.json",
  "claims": "claims.json",
  "claim": "call",
  "family": {"kind": ")"
     << kind << R"(", "schedule": [)" << schedule << R"(]},
  "z": )" << z
     << R"(, "x0": 0.0, "mode": ")" << mode << R"(", "out": ")" << out_name
     << R"("})";
  return os.str();
}

}  // namespace

TEST_CASE("superrep prints the trinomial call price") {
  auto r = run("superrep --market market.json --claims claims.json --claim call");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("0.333333") != std::string::npos);
  CHECK(r.out.find("closure element") != std::string::npos);
}

TEST_CASE("superrep prices a cash claim at its cash value") {
  auto r = run("superrep --market market.json --claims claims.json --claim cash5");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("superreplication price: 5") != std::string::npos);
}

TEST_CASE("superrep exits 2 on arbitrage markets") {
  auto r = run("superrep --market arb.json --claims arb_claims.json --claim call");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("no martingale measure") != std::string::npos);
}

TEST_CASE("superrep exits 1 on IO and schema problems") {
  CHECK(run("superrep --market missing.json --claims claims.json --claim call")
            .exit_code == 1);
  CHECK(run("superrep --market market.json --claims claims.json --claim nope")
            .exit_code == 1);
  CHECK(run("superrep --market market.json").exit_code == 1);
}

TEST_CASE("sweep writes a deterministic CSV that round-trips") {
  write_file(g_dir / "cfg.json", sweep_config("1, 4, 16", "main", 0.0, "curve.csv"));
  auto r = run("sweep --config cfg.json");
  REQUIRE(r.exit_code == 0);

  fs::path csv = g_dir / "curve.csv";
  REQUIRE(fs::exists(csv));
  std::string first = slurp(csv);
  CHECK(first.rfind("n,alpha,price,superrep,gap,u_no_claim,iterations\n", 0) == 0);
  CHECK(std::count(first.begin(), first.end(), '\n') == 4);  // header + 3 rows

  // Byte-identical on a rerun.
  REQUIRE(run("sweep --config cfg.json").exit_code == 0);
  CHECK(slurp(csv) == first);

  // Round-trip: parsing reproduces the in-memory curve exactly.
  using namespace reserve;
  auto tree = market::load_market(kTrinomialMarket);
  auto claims = market::load_claims(kClaims, tree);
  auto fam = utility::UtilityFamily::exponential({1, 4, 16});
  auto curve = pricing::convergence_sweep(
      tree, fam, utility::full_schedule(fam), 0.0, claims[0].second);
  auto parsed = pricing::read_curve_csv(csv.string());
  REQUIRE(parsed.points.size() == curve.points.size());
  CHECK(parsed.superrep == curve.superrep);
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    CHECK(parsed.points[k].index == curve.points[k].index);
    CHECK(parsed.points[k].alpha == curve.points[k].alpha);
    CHECK(parsed.points[k].price == curve.points[k].price);
    CHECK(parsed.points[k].gap == curve.points[k].gap);
    CHECK(parsed.points[k].u_no_claim == curve.points[k].u_no_claim);
    CHECK(parsed.points[k].iterations == curve.points[k].iterations);
  }
}

TEST_CASE("sweep with a single-entry schedule writes one row") {
  write_file(g_dir / "cfg1.json", sweep_config("8", "main", 0.0, "one.csv"));
  REQUIRE(run("sweep --config cfg1.json").exit_code == 0);
  std::string text = slurp(g_dir / "one.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}

TEST_CASE("main2 sweeps agree with main sweeps") {
  write_file(g_dir / "cfg_m1.json", sweep_config("1, 2, 4, 8", "main", 0.5, "m1.csv"));
  write_file(g_dir / "cfg_m2.json", sweep_config("1, 2, 4, 8", "main2", 0.5, "m2.csv"));
  REQUIRE(run("sweep --config cfg_m1.json").exit_code == 0);
  REQUIRE(run("sweep --config cfg_m2.json").exit_code == 0);
  auto raw = reserve::pricing::read_curve_csv((g_dir / "m1.csv").string());
  auto nrm = reserve::pricing::read_curve_csv((g_dir / "m2.csv").string());
  REQUIRE(raw.points.size() == nrm.points.size());
  for (std::size_t k = 0; k < raw.points.size(); ++k)
    CHECK(std::fabs(raw.points[k].price - nrm.points[k].price) <= 2e-4);
}

TEST_CASE("sweep exits 2 on arbitrage markets") {
  write_file(g_dir / "cfg_arb.json", R"({
    "market": "arb.json", "claims": "arb_claims.json", "claim": "call",
    "family": {"kind": "exponential", "schedule": [1, 2]},
    "z": 0.0, "out": "never.csv"})");
  auto r = run("sweep --config cfg_arb.json");
  CHECK(r.exit_code == 2);
  CHECK_FALSE(fs::exists(g_dir / "never.csv"));
}

TEST_CASE("sweep rejects a non-increasing schedule with exit 1") {
  write_file(g_dir / "cfg_bad.json", sweep_config("4, 4", "main", 0.0, "bad.csv"));
  auto r = run("sweep --config cfg_bad.json");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("strictly increasing") != std::string::npos);
}

TEST_CASE("price subcommand reports a single point") {
  write_file(g_dir / "cfgp.json", sweep_config("1, 4, 16", "main", 0.0, "p.csv"));
  auto r = run("price --config cfgp.json --index 2");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("alpha = 16") != std::string::npos);
  CHECK(r.out.find("indifference price: 0.3") != std::string::npos);
}

TEST_CASE("check passes on the built-in families") {
  for (std::string kind : {"exponential", "power"}) {
    write_file(g_dir / "cfgc.json",
               sweep_config("1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024",
                            "main", 0.0, "c.csv", kind));
    auto r = run("check --config cfgc.json");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("[FAIL]") == std::string::npos);
    CHECK(r.out.find("risk-aversion divergence") != std::string::npos);
    CHECK(r.out.find("conjugate growth") != std::string::npos);
    CHECK(r.out.find("wealth-point limits") != std::string::npos);
    CHECK(r.out.find("conjugate integrability") != std::string::npos);
    CHECK(r.out.find("[EVIDENCE] asymptotic elasticity") != std::string::npos);
  }
}

TEST_CASE("check fails on a constant-alpha schedule") {
  write_file(g_dir / "cfgf.json",
             sweep_config("2, 2, 2", "main", 0.0, "f.csv"));
  auto r = run("check --config cfgf.json");
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("[FAIL] risk-aversion divergence") != std::string::npos);
}

int wrapped_main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-reserve-binary>\n");
    return 2;
  }
  g_binary = fs::absolute(argv[1]).string();
  g_dir = fs::temp_directory_path() /
          ("reserve_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(g_dir);
  write_file(g_dir / "market.json", kTrinomialMarket);
  write_file(g_dir / "claims.json", kClaims);
  write_file(g_dir / "arb.json", kArbitrageMarket);
  write_file(g_dir / "arb_claims.json", kArbitrageClaims);
  auto prev = fs::current_path();
  fs::current_path(g_dir);

  doctest::Context ctx;
  int res = ctx.run();

  fs::current_path(prev);
  std::error_code ec;
  fs::remove_all(g_dir, ec);
  return res;
}

int main(int argc, char** argv) { return wrapped_main(argc, argv); }
