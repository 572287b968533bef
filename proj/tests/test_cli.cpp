// Command-line front end tests: argument grammar, artifact shapes, exit
// codes, and agreement between CLI-emitted numbers and library results.

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nodal/cli.hpp"
#include "nodal/dcopf.hpp"
#include "nodal/market.hpp"
#include "nodal/metrics.hpp"
#include "nodal/pricing.hpp"

namespace {

struct RunOutcome {
  int code = -1;
  std::string out;
  std::string err;
};

RunOutcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  RunOutcome r;
  r.code = nodal::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream f(path);
  f << content;
  f.close();
  return path;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

TEST_CASE("argument grammar is enforced") {
  SECTION("a subcommand is required") {
    auto r = run_cli({});
    CHECK(r.code == 1);
  }
  SECTION("exactly one instance source") {
    auto both = run_cli({"validate", "--fixture", "example1", "--instance", "/tmp/x.json"});
    CHECK(both.code == 1);
    auto neither = run_cli({"validate"});
    CHECK(neither.code == 1);
  }
  SECTION("price requires a rule") {
    auto r = run_cli({"price", "--fixture", "example1"});
    CHECK(r.code == 1);
  }
  SECTION("unknown rule name") {
    auto r = run_cli({"price", "--fixture", "example1", "--rule", "vcg"});
    CHECK(r.code == 1);
  }
  SECTION("weights belong to scalarize only") {
    auto r = run_cli(
        {"price", "--fixture", "example1", "--rule", "ch", "--weights", "0.5,0.5,0"});
    CHECK(r.code == 1);
  }
  SECTION("scalarize requires weights") {
    auto r = run_cli({"price", "--fixture", "example1", "--rule", "scalarize"});
    CHECK(r.code == 1);
  }
  SECTION("scalarize weights must be a valid simplex point") {
    auto bad_count = run_cli(
        {"price", "--fixture", "example1", "--rule", "scalarize", "--weights", "0.5,0.5"});
    CHECK(bad_count.code == 1);
    auto bad_sum = run_cli(
        {"price", "--fixture", "example1", "--rule", "scalarize", "--weights", "0.5,0.5,0.5"});
    CHECK(bad_sum.code == 1);
  }
  SECTION("unknown fixture gets a distinct message") {
    auto r = run_cli({"validate", "--fixture", "example99"});
    CHECK(r.code == 1);
    CHECK(r.err.find("unknown fixture") != std::string::npos);
  }
  SECTION("malformed instance JSON gets a distinct message") {
    auto path = temp_file("nodal_cli_bad.json", "{ this is not json");
    auto r = run_cli({"validate", "--instance", path.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("invalid JSON") != std::string::npos);
  }
  SECTION("missing instance file") {
    auto r = run_cli({"validate", "--instance", "/nonexistent/nope.json"});
    CHECK(r.code == 1);
  }
  SECTION("pareto grid must be positive") {
    auto r = run_cli({"pareto", "--fixture", "example1", "--grid", "0"});
    CHECK(r.code == 1);
  }
  SECTION("heatmap requires a rule") {
    auto r = run_cli({"heatmap", "--fixture", "example1"});
    CHECK(r.code == 1);
  }
  SECTION("dispatch is a json artifact") {
    auto r = run_cli({"dispatch", "--fixture", "example1", "--format", "csv"});
    CHECK(r.code == 1);
  }
  SECTION("help exits zero") {
    auto r = run_cli({"--help"});
    CHECK(r.code == 0);
  }
}

TEST_CASE("validate reports diagnostics with matching exit codes") {
  auto good = run_cli({"validate", "--fixture", "example1"});
  REQUIRE(good.code == 0);
  auto doc = nlohmann::json::parse(good.out);
  CHECK(doc["valid"] == true);
  CHECK(doc["diagnostics"].is_array());

  // Break the instance structurally and expect exit 1 plus the diagnostics.
  auto m = nodal::market::fixture("example1");
  m.network.lines[0].susceptance = -1.0;
  auto path = temp_file("nodal_cli_invalid.json", nodal::market::save_instance(m));
  auto bad = run_cli({"validate", "--instance", path.string()});
  REQUIRE(bad.code == 1);
  auto bad_doc = nlohmann::json::parse(bad.out);
  CHECK(bad_doc["valid"] == false);
  CHECK(bad_doc["diagnostics"].size() >= 1);
  CHECK(std::string(bad_doc["diagnostics"][0]["severity"]) == "error");
}

TEST_CASE("dispatch emits the dispatch document") {
  auto r = run_cli({"dispatch", "--fixture", "example1"});
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["welfare"].get<double>() == Catch::Approx(-1040.0).margin(1e-6));
  CHECK(doc["commitment"]["s1"][0] == 1);
  CHECK(doc["commitment"]["s2"][0] == 0);
  CHECK(doc["generation"]["s1"][0].get<double>() == Catch::Approx(4.0).margin(1e-6));
  CHECK(doc["flow"]["n1-n2"][0].get<double>() == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("dispatch loads instances from a path") {
  auto text = nodal::market::save_instance(nodal::market::fixture("example2"));
  auto path = temp_file("nodal_cli_ex2.json", text);
  auto r = run_cli({"dispatch", "--instance", path.string()});
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["welfare"].get<double>() == Catch::Approx(-107.0).margin(1e-6));
}

TEST_CASE("price emits the pricing result and audit report together") {
  auto r = run_cli({"price", "--fixture", "example1", "--rule", "join"});
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["pricing"]["rule"] == "join");
  CHECK(doc["pricing"]["objective"].get<double>() ==
        Catch::Approx(2200.0 / 3).margin(1e-4));
  // The audit runs at the returned prices; join's make-whole total must not
  // exceed the per-commitment rule's (1000 on this instance).
  double mwp = doc["metrics"]["totals"]["mwp"].get<double>();
  CHECK(mwp <= 1000.0 + 1e-6);
  CHECK(doc["metrics"]["participants"].is_array());

  auto csv = run_cli({"price", "--fixture", "example1", "--rule", "join", "--format", "csv"});
  REQUIRE(csv.code == 0);
  auto lines = split_lines(csv.out);
  REQUIRE(lines.size() >= 6);  // header + b1,b2,s1,s2,line
  CHECK(lines[0].rfind("id,kind,", 0) == 0);
}

TEST_CASE("price accepts scalarize with weights") {
  auto r = run_cli({"price", "--fixture", "example1", "--rule", "scalarize", "--weights",
                    "0.5,0.5,0"});
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["pricing"]["rule"] == "scalarized");
  CHECK(doc["pricing"]["weights"][0].get<double>() == Catch::Approx(0.5));
}

TEST_CASE("price honors the reporting tolerance flag") {
  auto strict = run_cli({"price", "--fixture", "example1", "--rule", "ch"});
  REQUIRE(strict.code == 0);
  auto strict_doc = nlohmann::json::parse(strict.out);
  REQUIRE(strict_doc["metrics"]["congestion"].size() == 1);
  CHECK(strict_doc["metrics"]["congestion"][0]["false_signal"] == true);

  // A huge tolerance suppresses the price-signal flags on the same instance.
  auto loose = run_cli(
      {"price", "--fixture", "example1", "--rule", "ch", "--tol", "1000"});
  REQUIRE(loose.code == 0);
  auto loose_doc = nlohmann::json::parse(loose.out);
  REQUIRE(loose_doc["metrics"]["congestion"].size() == 1);
  CHECK(loose_doc["metrics"]["congestion"][0]["false_signal"] == false);
  CHECK(loose_doc["metrics"]["congestion"][0]["missing_signal"] == false);
}

TEST_CASE("compare lines up the five rules with audited totals") {
  auto r = run_cli({"compare", "--fixture", "example1"});
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  REQUIRE(doc.is_array());
  REQUIRE(doc.size() == 5);
  CHECK(doc[0]["rule"] == "ch");
  CHECK(doc[1]["rule"] == "ip");
  CHECK(doc[2]["rule"] == "minmwp");
  CHECK(doc[3]["rule"] == "join");
  CHECK(doc[4]["rule"] == "scalarized");

  // Worked-example values: LP objectives and both aggregation conventions.
  CHECK(doc[0]["objective"].get<double>() == Catch::Approx(2875.0 / 3).margin(1e-4));
  CHECK(doc[0]["participant_totals"]["gloc"].get<double>() ==
        Catch::Approx(2200.0 / 3).margin(1e-4));
  CHECK(doc[1]["objective"].get<double>() == Catch::Approx(0).margin(1e-6));
  CHECK(doc[1]["totals"]["gloc"].get<double>() == Catch::Approx(1125.0).margin(1e-4));
  CHECK(doc[1]["totals"]["mwp"].get<double>() == Catch::Approx(1000.0).margin(1e-4));
  CHECK(doc[1]["totals"]["lloc"].get<double>() == Catch::Approx(0).margin(1e-6));
  CHECK(doc[2]["objective"].get<double>() == Catch::Approx(0).margin(1e-6));
  CHECK(doc[2]["totals"]["gloc"].get<double>() == Catch::Approx(6625.0).margin(1e-4));
  CHECK(doc[2]["totals"]["lloc"].get<double>() == Catch::Approx(2750.0).margin(1e-4));
  CHECK(doc[2]["totals"]["mwp"].get<double>() == Catch::Approx(0).margin(1e-6));
  CHECK(doc[3]["objective"].get<double>() == Catch::Approx(2200.0 / 3).margin(1e-4));

  // The CLI totals come from the same audit code path as the library; the
  // numbers must agree exactly, not just approximately.
  auto m = nodal::market::fixture("example1");
  auto d = nodal::dcopf::solve_dispatch(m);
  auto ch = nodal::pricing::price(m, d, nodal::pricing::PricingRule::ch());
  auto rep = nodal::metrics::compute_locs(m, d, ch.prices);
  CHECK(doc[0]["totals"]["gloc"].get<double>() == rep.total_gloc);
  CHECK(doc[0]["totals"]["lloc"].get<double>() == rep.total_lloc);
  CHECK(doc[0]["totals"]["mwp"].get<double>() == rep.total_mwp);
}

TEST_CASE("compare emits a two-decimal csv table") {
  auto r = run_cli({"compare", "--fixture", "example1", "--format", "csv"});
  REQUIRE(r.code == 0);
  auto lines = split_lines(r.out);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] ==
        "rule,objective,gloc,lloc,mwp,participant_gloc,participant_lloc,participant_mwp");
  auto ch = split_csv(lines[1]);
  REQUIRE(ch.size() == 8);
  CHECK(ch[0] == "ch");
  CHECK(ch[1] == "958.33");
  CHECK(ch[5] == "733.33");
  CHECK(ch[6] == "733.33");
  CHECK(ch[7] == "733.33");
  auto ip = split_csv(lines[2]);
  CHECK(ip[0] == "ip");
  CHECK(ip[1] == "0.00");
  CHECK(ip[2] == "1125.00");
  CHECK(ip[3] == "0.00");
  CHECK(ip[4] == "1000.00");
}

TEST_CASE("pareto emits the weight sweep") {
  auto csv = run_cli({"pareto", "--fixture", "example1", "--grid", "1", "--format", "csv"});
  REQUIRE(csv.code == 0);
  auto lines = split_lines(csv.out);
  REQUIRE(lines.size() == 4);  // header + the three pure corners
  CHECK(lines[0] == "wCH,wIP,wMWP,gloc,lloc,mwp");

  auto json = run_cli({"pareto", "--fixture", "example1", "--grid", "1"});
  REQUIRE(json.code == 0);
  auto doc = nlohmann::json::parse(json.out);
  REQUIRE(doc.is_array());
  REQUIRE(doc.size() == 3);
  for (const auto& row : doc) {
    CHECK(row["ok"] == true);
    CHECK(row["weights"].size() == 3);
  }
}

TEST_CASE("heatmap prints the nodal price matrix") {
  auto r = run_cli({"heatmap", "--fixture", "example1", "--rule", "ip"});
  REQUIRE(r.code == 0);
  auto lines = split_lines(r.out);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "node,0");
  CHECK(lines[1] == "n1,10.00");
  CHECK(lines[2] == "n2,10.00");

  auto ex3 = run_cli({"heatmap", "--fixture", "example3", "--rule", "ip"});
  REQUIRE(ex3.code == 0);
  auto lines3 = split_lines(ex3.out);
  CHECK(lines3[1] == "n1,10.00");
  CHECK(lines3[2] == "n2,50.00");

  auto json = run_cli({"heatmap", "--fixture", "example1", "--rule", "ip", "--format",
                       "json"});
  REQUIRE(json.code == 0);
  auto doc = nlohmann::json::parse(json.out);
  CHECK(doc["nodes"].size() == 2);
  CHECK(doc["matrix"][0][0].get<double>() == Catch::Approx(10.0).margin(1e-6));
}

TEST_CASE("artifacts write to the requested path") {
  auto path = std::filesystem::temp_directory_path() / "nodal_cli_artifact.json";
  std::filesystem::remove(path);
  auto r = run_cli({"price", "--fixture", "example1", "--rule", "ip", "--out",
                    path.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  REQUIRE(std::filesystem::exists(path));
  std::ifstream f(path);
  std::stringstream buf;
  buf << f.rdbuf();
  auto doc = nlohmann::json::parse(buf.str());
  CHECK(doc["pricing"]["rule"] == "ip");
  std::filesystem::remove(path);
}

TEST_CASE("solver failures exit with code two") {
  auto m = nodal::market::fixture("example1");
  m.buyers[0].pmin = {300};  // demand far beyond total capacity
  m.buyers[0].pmax = {300};
  auto path = temp_file("nodal_cli_infeasible.json", nodal::market::save_instance(m));
  auto r = run_cli({"dispatch", "--instance", path.string()});
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
}
