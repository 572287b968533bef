#pragma once

// Command-line front end. `run` parses a tokenized command line, executes one
// subcommand, and writes a single artifact to --out or the given stream.
//
//   validate  — schema + semantic diagnostics for an instance
//   dispatch  — welfare-maximizing dispatch document (JSON)
//   price     — one pricing rule plus an independent audit of its prices
//   compare   — all five rules side by side with audited totals
//   pareto    — scalarization weight sweep over the objective simplex
//   heatmap   — node x period price matrix (CSV, two decimals)
//
// Exit codes: 0 success, 1 validation/usage error, 2 solver failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nodal/common.hpp"
#include "nodal/dcopf.hpp"
#include "nodal/market.hpp"
#include "nodal/metrics.hpp"
#include "nodal/pricing.hpp"

namespace nodal::cli {

struct RunRequest {
  std::string subcommand;
  std::string fixture;        // exactly one of fixture / instance_path
  std::string instance_path;
  std::string rule;           // ch | ip | minmwp | join | scalarize
  std::vector<double> weights;  // scalarize only
  int grid = 4;
  std::string format = "json";  // json | csv
  std::string out_path;         // empty = write to the provided stream
  double tol = 1e-6;            // reporting tolerance (congestion flags)
};

namespace detail {

inline market::MarketInstance load_market(const RunRequest& req) {
  if (!req.fixture.empty()) return market::fixture(req.fixture);
  std::ifstream f(req.instance_path);
  if (!f) throw ValidationError("cannot read instance file: " + req.instance_path);
  std::stringstream buf;
  buf << f.rdbuf();
  return market::load_instance(buf.str());
}

inline pricing::PricingRule parse_rule(const RunRequest& req) {
  if (req.rule != "scalarize" && !req.weights.empty())
    throw ValidationError("--weights applies only to --rule scalarize");
  if (req.rule == "ch") return pricing::PricingRule::ch();
  if (req.rule == "ip") return pricing::PricingRule::ip();
  if (req.rule == "minmwp") return pricing::PricingRule::min_mwp();
  if (req.rule == "join") return pricing::PricingRule::join();
  if (req.rule == "scalarize") {
    if (req.weights.size() != 3)
      throw ValidationError("--rule scalarize requires --weights a,b,c");
    return pricing::PricingRule::scalarized(req.weights[0], req.weights[1], req.weights[2]);
  }
  throw ValidationError("unknown pricing rule: " + req.rule);
}

inline void emit(const RunRequest& req, const std::string& text, std::ostream& out) {
  if (req.out_path.empty()) {
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
    return;
  }
  std::ofstream f(req.out_path);
  if (!f) throw ValidationError("cannot write output file: " + req.out_path);
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

inline std::string two_decimals(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

inline int do_validate(const RunRequest& req, std::ostream& out) {
  auto m = load_market(req);
  auto diags = market::validate(m);
  bool valid = !market::has_errors(diags);
  std::string text;
  if (req.format == "csv") {
    text = "severity,path,message\n";
    for (const auto& d : diags)
      text += std::string(d.severity == market::Severity::Error ? "error" : "warning") + "," +
              d.path + "," + d.message + "\n";
  } else {
    nlohmann::ordered_json doc;
    doc["valid"] = valid;
    doc["diagnostics"] = nlohmann::ordered_json::array();
    for (const auto& d : diags)
      doc["diagnostics"].push_back(
          {{"severity", d.severity == market::Severity::Error ? "error" : "warning"},
           {"path", d.path},
           {"message", d.message}});
    text = doc.dump(2);
  }
  emit(req, text, out);
  return valid ? 0 : 1;
}

inline int do_dispatch(const RunRequest& req, std::ostream& out) {
  if (req.format != "json")
    throw ValidationError("dispatch emits a JSON document; --format csv is not supported");
  auto m = load_market(req);
  auto d = dcopf::solve_dispatch(m);
  emit(req, dcopf::to_json(m, d), out);
  return 0;
}

// One audit report at the given prices, with the congestion scan re-run at
// the requested reporting tolerance.
inline metrics::LocReport audit(const market::MarketInstance& m, const dcopf::Dispatch& d,
                                const PriceSystem& ps, double tol) {
  auto rep = metrics::compute_locs(m, d, ps);
  if (tol != 1e-6) rep.congestion = metrics::congestion_diagnostics(m, d, ps, tol);
  return rep;
}

inline int do_price(const RunRequest& req, std::ostream& out) {
  auto rule = parse_rule(req);
  auto m = load_market(req);
  auto d = dcopf::solve_dispatch(m);
  auto res = pricing::price(m, d, rule);
  auto rep = audit(m, d, res.prices, req.tol);
  if (req.format == "csv") {
    emit(req, metrics::to_csv(rep), out);
  } else {
    nlohmann::ordered_json doc;
    doc["pricing"] = nlohmann::ordered_json::parse(pricing::to_json(m, res));
    doc["metrics"] = nlohmann::ordered_json::parse(metrics::to_json(rep));
    emit(req, doc.dump(2), out);
  }
  return 0;
}

inline int do_compare(const RunRequest& req, std::ostream& out) {
  auto m = load_market(req);
  auto d = dcopf::solve_dispatch(m);
  const std::vector<std::pair<std::string, pricing::PricingRule>> rules = {
      {"ch", pricing::PricingRule::ch()},
      {"ip", pricing::PricingRule::ip()},
      {"minmwp", pricing::PricingRule::min_mwp()},
      {"join", pricing::PricingRule::join()},
      {"scalarized", pricing::PricingRule::scalarized(1.0 / 3, 1.0 / 3, 1.0 / 3)}};

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::string csv =
      "rule,objective,gloc,lloc,mwp,participant_gloc,participant_lloc,participant_mwp\n";
  for (const auto& [label, rule] : rules) {
    auto res = pricing::price(m, d, rule);
    auto rep = audit(m, d, res.prices, req.tol);
    double pg = 0, pl = 0, pm = 0;  // buyers and sellers only, no line terms
    for (const auto& e : rep.entries)
      if (e.kind != metrics::Kind::Line) {
        pg += e.gloc;
        pl += e.lloc;
        pm += e.mwp;
      }
    nlohmann::ordered_json row;
    row["rule"] = label;
    row["objective"] = res.objective;
    row["totals"] = {{"gloc", rep.total_gloc}, {"lloc", rep.total_lloc}, {"mwp", rep.total_mwp}};
    row["participant_totals"] = {{"gloc", pg}, {"lloc", pl}, {"mwp", pm}};
    row["prices"]["p"] = nlohmann::ordered_json::object();
    for (size_t v = 0; v < m.network.nodes.size(); ++v)
      row["prices"]["p"][m.network.nodes[v]] = res.prices.p[v];
    rows.push_back(std::move(row));
    csv += label + "," + two_decimals(res.objective) + "," + two_decimals(rep.total_gloc) +
           "," + two_decimals(rep.total_lloc) + "," + two_decimals(rep.total_mwp) + "," +
           two_decimals(pg) + "," + two_decimals(pl) + "," + two_decimals(pm) + "\n";
  }
  emit(req, req.format == "csv" ? csv : rows.dump(2), out);
  return 0;
}

inline int do_pareto(const RunRequest& req, std::ostream& out) {
  auto m = load_market(req);
  auto d = dcopf::solve_dispatch(m);
  auto points = pricing::pareto_sweep(m, d, req.grid);
  if (req.format == "csv") {
    emit(req, pricing::sweep_to_csv(points), out);
  } else {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& pt : points) {
      nlohmann::ordered_json row;
      row["weights"] = pt.weights;
      row["ok"] = pt.ok;
      if (!pt.ok) row["message"] = pt.message;
      row["gloc"] = pt.gloc;
      row["lloc"] = pt.lloc;
      row["mwp"] = pt.mwp;
      doc.push_back(std::move(row));
    }
    emit(req, doc.dump(2), out);
  }
  return 0;
}

inline int do_heatmap(const RunRequest& req, std::ostream& out) {
  auto rule = parse_rule(req);
  auto m = load_market(req);
  auto d = dcopf::solve_dispatch(m);
  auto res = pricing::price(m, d, rule);
  if (req.format == "json") {
    nlohmann::ordered_json doc;
    doc["nodes"] = m.network.nodes;
    doc["periods"] = m.periods;
    doc["matrix"] = res.prices.p;
    emit(req, doc.dump(2), out);
    return 0;
  }
  std::string csv = "node";
  for (int t = 0; t < m.periods; ++t) csv += "," + std::to_string(t);
  csv += "\n";
  for (size_t v = 0; v < m.network.nodes.size(); ++v) {
    csv += m.network.nodes[v];
    for (int t = 0; t < m.periods; ++t) csv += "," + two_decimals(res.prices.p[v][t]);
    csv += "\n";
  }
  emit(req, csv, out);
  return 0;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  RunRequest req;
  CLI::App app{"market clearing engine with auditable dual pricing rules"};
  app.require_subcommand(1);

  CLI::Option* heatmap_format = nullptr;
  auto add_common = [&](CLI::App* sub) {
    auto* fx = sub->add_option("--fixture", req.fixture, "built-in fixture name");
    auto* in = sub->add_option("--instance", req.instance_path, "path to an instance JSON");
    fx->excludes(in);
    in->excludes(fx);
    auto* fmt = sub->add_option("--format", req.format, "output format")
                    ->check(CLI::IsMember({"json", "csv"}));
    if (sub->get_name() == "heatmap") heatmap_format = fmt;
    sub->add_option("--out", req.out_path, "write the artifact to this path");
    sub->add_option("--tol", req.tol, "reporting tolerance for diagnostics");
    sub->callback([&, sub] {
      req.subcommand = sub->get_name();
      if (req.fixture.empty() && req.instance_path.empty())
        throw CLI::ValidationError("exactly one of --fixture or --instance is required");
    });
  };
  auto add_rule = [&](CLI::App* sub, bool with_weights) {
    sub->add_option("--rule", req.rule, "pricing rule")
        ->required()
        ->check(CLI::IsMember({"ch", "ip", "minmwp", "join", "scalarize"}));
    if (with_weights)
      sub->add_option("--weights", req.weights, "scalarization weights a,b,c")
          ->delimiter(',')
          ->expected(3);
  };

  add_common(app.add_subcommand("validate", "check an instance against the schema"));
  add_common(app.add_subcommand("dispatch", "solve the welfare-maximizing dispatch"));
  auto* price = app.add_subcommand("price", "run one pricing rule and audit its prices");
  add_common(price);
  add_rule(price, /*with_weights=*/true);
  add_common(app.add_subcommand("compare", "run all five pricing rules side by side"));
  auto* pareto = app.add_subcommand("pareto", "sweep scalarization weights");
  add_common(pareto);
  pareto->add_option("--grid", req.grid, "simplex grid resolution")
      ->check(CLI::Range(1, 1000));
  auto* heatmap = app.add_subcommand("heatmap", "emit the nodal price matrix");
  add_common(heatmap);
  add_rule(heatmap, /*with_weights=*/false);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  // The heatmap artifact is a matrix; it defaults to csv unless asked for json.
  if (req.subcommand == "heatmap" && heatmap_format != nullptr && heatmap_format->count() == 0)
    req.format = "csv";

  try {
    if (req.subcommand == "validate") return detail::do_validate(req, out);
    if (req.subcommand == "dispatch") return detail::do_dispatch(req, out);
    if (req.subcommand == "price") return detail::do_price(req, out);
    if (req.subcommand == "compare") return detail::do_compare(req, out);
    if (req.subcommand == "pareto") return detail::do_pareto(req, out);
    if (req.subcommand == "heatmap") return detail::do_heatmap(req, out);
    err << "error: no subcommand selected\n";
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const LookupError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace nodal::cli
