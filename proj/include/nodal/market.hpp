#pragma once

// Domain model of a network-coupled multi-period market: topology, buyer and
// seller specifications, semantic validation, JSON (de)serialization against
// the published schema, and the built-in fixtures.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nodal/common.hpp"

namespace nodal::market {

struct Line {
  std::string from, to;
  double susceptance = 1.0;  // per unit
  double fmin = -kInf, fmax = kInf;  // MWh, signed flow from -> to
};

struct Network {
  std::vector<std::string> nodes;
  std::string reference;
  std::vector<Line> lines;
};

// One step of a buyer's bid ladder: up to `quantity` MWh valued at `value`.
struct BidStep {
  double value = 0;     // $/MWh
  double quantity = 0;  // MWh
};

// One step of a seller's offer ladder: up to `quantity` MWh costing `cost`.
struct OfferStep {
  double cost = 0;      // $/MWh
  double quantity = 0;  // MWh
};

struct BuyerSpec {
  std::string id;
  std::string node;
  std::vector<double> pmin;  // inelastic demand per period, MWh
  std::vector<double> pmax;  // maximum demand per period, MWh
  std::vector<std::vector<BidStep>> ladder;  // per period
};

struct SellerSpec {
  std::string id;
  std::string node;
  std::vector<std::vector<OfferStep>> ladder;  // per period
  std::vector<double> pmin;  // minimum output when committed, MWh
  std::vector<double> pmax;  // maximum output when committed, MWh
  double no_load_cost = 0;   // $ per committed period
  int min_uptime = 1;        // periods
};

struct MarketInstance {
  Network network;
  int periods = 1;
  std::vector<BuyerSpec> buyers;
  std::vector<SellerSpec> sellers;
  std::string currency = "$";
  std::string unit = "MWh";

  int node_index(const std::string& name) const {
    for (int i = 0; i < static_cast<int>(network.nodes.size()); ++i)
      if (network.nodes[i] == name) return i;
    throw LookupError("unknown node: " + name);
  }
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string path;
  std::string message;
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

// True when the buyer never offers elastic steps (demand is pure obligation).
inline bool purely_inelastic(const BuyerSpec& b) {
  return std::all_of(b.ladder.begin(), b.ladder.end(),
                     [](const auto& steps) { return steps.empty(); });
}

// True when the seller has no commitment frictions anywhere, so its on/off
// variable can be eliminated from optimization models.
inline bool commitment_free(const SellerSpec& s) {
  if (s.no_load_cost != 0 || s.min_uptime != 1) return false;
  return std::all_of(s.pmin.begin(), s.pmin.end(), [](double p) { return p == 0; });
}

inline std::vector<Diagnostic> validate(const MarketInstance& m) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string path, std::string msg) {
    out.push_back({Severity::Error, std::move(path), std::move(msg)});
  };
  auto warn = [&](std::string path, std::string msg) {
    out.push_back({Severity::Warning, std::move(path), std::move(msg)});
  };

  std::set<std::string> nodes(m.network.nodes.begin(), m.network.nodes.end());
  if (m.network.nodes.empty()) error("network.nodes", "no nodes");
  if (nodes.size() != m.network.nodes.size()) error("network.nodes", "duplicate node names");
  if (!nodes.count(m.network.reference))
    error("network.reference", "reference node is not a member of nodes");
  if (m.periods < 1) error("periods", "horizon must contain at least one period");

  std::set<std::pair<std::string, std::string>> pairs;
  for (size_t i = 0; i < m.network.lines.size(); ++i) {
    const auto& l = m.network.lines[i];
    std::string path = "network.lines[" + std::to_string(i) + "]";
    if (!nodes.count(l.from)) error(path + ".from", "unknown node " + l.from);
    if (!nodes.count(l.to)) error(path + ".to", "unknown node " + l.to);
    if (l.from == l.to) error(path, "line endpoints coincide");
    if (!(l.susceptance > 0)) error(path + ".susceptance", "nonpositive susceptance");
    if (l.fmin > l.fmax) error(path, "empty flow interval");
    auto key = std::minmax(l.from, l.to);
    if (!pairs.insert({key.first, key.second}).second)
      error(path, "duplicate line between " + l.from + " and " + l.to);
  }

  std::set<std::string> ids;
  auto check_id = [&](const std::string& id, const std::string& path) {
    if (!ids.insert(id).second) error(path, "duplicate participant id " + id);
  };

  for (size_t b = 0; b < m.buyers.size(); ++b) {
    const auto& spec = m.buyers[b];
    std::string path = "buyers[" + std::to_string(b) + "]";
    check_id(spec.id, path + ".id");
    if (!nodes.count(spec.node)) error(path + ".node", "unknown node " + spec.node);
    if (static_cast<int>(spec.pmin.size()) != m.periods ||
        static_cast<int>(spec.pmax.size()) != m.periods ||
        static_cast<int>(spec.ladder.size()) != m.periods) {
      error(path, "per-period list length differs from the horizon");
      continue;
    }
    for (int t = 0; t < m.periods; ++t) {
      std::string pt = path + ".pmin[" + std::to_string(t) + "]";
      if (spec.pmin[t] < 0) error(pt, "negative inelastic demand");
      if (spec.pmin[t] > spec.pmax[t]) error(pt, "empty operating range (pmin above pmax)");
      double prev = kInf;
      for (size_t l = 0; l < spec.ladder[t].size(); ++l) {
        const auto& step = spec.ladder[t][l];
        if (step.quantity < 0)
          error(path + ".ladder[" + std::to_string(t) + "][" + std::to_string(l) + "]",
                "negative step quantity");
        if (step.value > prev + 1e-12)
          warn(path + ".ladder[" + std::to_string(t) + "]",
               "bid values rise across steps (valuation is not concave)");
        prev = step.value;
      }
    }
  }

  for (size_t s = 0; s < m.sellers.size(); ++s) {
    const auto& spec = m.sellers[s];
    std::string path = "sellers[" + std::to_string(s) + "]";
    check_id(spec.id, path + ".id");
    if (!nodes.count(spec.node)) error(path + ".node", "unknown node " + spec.node);
    if (spec.min_uptime < 1 || spec.min_uptime > m.periods)
      error(path + ".min_uptime", "minimum uptime outside the horizon");
    if (spec.no_load_cost < 0) warn(path + ".no_load_cost", "negative no-load cost");
    if (static_cast<int>(spec.pmin.size()) != m.periods ||
        static_cast<int>(spec.pmax.size()) != m.periods ||
        static_cast<int>(spec.ladder.size()) != m.periods) {
      error(path, "per-period list length differs from the horizon");
      continue;
    }
    for (int t = 0; t < m.periods; ++t) {
      std::string pt = path + ".pmin[" + std::to_string(t) + "]";
      if (spec.pmin[t] < 0) error(pt, "negative minimum output");
      if (spec.pmin[t] > spec.pmax[t]) error(pt, "empty operating range (pmin above pmax)");
      double total = 0;
      for (size_t l = 0; l < spec.ladder[t].size(); ++l) {
        const auto& step = spec.ladder[t][l];
        if (step.quantity < 0)
          error(path + ".ladder[" + std::to_string(t) + "][" + std::to_string(l) + "]",
                "negative step quantity");
        if (step.cost < 0)
          warn(path + ".ladder[" + std::to_string(t) + "][" + std::to_string(l) + "]",
               "negative offer cost");
        total += step.quantity;
      }
      if (spec.pmax[t] > total + 1e-9)
        error(path + ".pmax[" + std::to_string(t) + "]",
              "maximum output exceeds the offered ladder quantity");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization. Schema (all quantities plain decimal numbers):
//   {
//     "network": {"nodes": [...], "reference": "...",
//                 "lines": [{"from","to","susceptance","fmin","fmax"}]},
//     "periods": T,
//     "buyers":  [{"id","node","pmin":[...],"pmax":[...],
//                  "ladder":[[{"value","quantity"}...] per period]}],
//     "sellers": [{"id","node","pmin":[...],"pmax":[...],
//                  "ladder":[[{"cost","quantity"}...] per period],
//                  "no_load_cost", "min_uptime"}],
//     "currency": "$", "unit": "MWh"
//   }
// ---------------------------------------------------------------------------

namespace detail {

using nlohmann::json;

inline const json& need(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(path + ": missing field '" + key + "'");
  return *it;
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path + ": expected a number");
  return j.get<double>();
}

inline int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path + ": expected an integer");
  return j.get<int>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path + ": expected a string");
  return j.get<std::string>();
}

inline const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected an array");
  return j;
}

inline std::vector<double> number_list(const json& j, const std::string& path) {
  std::vector<double> out;
  const auto& arr = as_array(j, path);
  for (size_t i = 0; i < arr.size(); ++i)
    out.push_back(as_number(arr[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace detail

inline MarketInstance load_instance(const std::string& text) {
  using detail::as_array;
  using detail::as_int;
  using detail::as_number;
  using detail::as_string;
  using detail::need;
  using detail::number_list;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }

  MarketInstance m;
  const auto& net = need(doc, "network", "$");
  const auto& nodes = as_array(need(net, "nodes", "network"), "network.nodes");
  for (size_t i = 0; i < nodes.size(); ++i)
    m.network.nodes.push_back(as_string(nodes[i], "network.nodes[" + std::to_string(i) + "]"));
  m.network.reference = as_string(need(net, "reference", "network"), "network.reference");
  const auto& lines = as_array(need(net, "lines", "network"), "network.lines");
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string path = "network.lines[" + std::to_string(i) + "]";
    const auto& l = lines[i];
    Line line;
    line.from = as_string(need(l, "from", path), path + ".from");
    line.to = as_string(need(l, "to", path), path + ".to");
    line.susceptance = as_number(need(l, "susceptance", path), path + ".susceptance");
    line.fmin = as_number(need(l, "fmin", path), path + ".fmin");
    line.fmax = as_number(need(l, "fmax", path), path + ".fmax");
    m.network.lines.push_back(std::move(line));
  }

  m.periods = as_int(need(doc, "periods", "$"), "periods");

  const auto& buyers = as_array(need(doc, "buyers", "$"), "buyers");
  for (size_t b = 0; b < buyers.size(); ++b) {
    std::string path = "buyers[" + std::to_string(b) + "]";
    const auto& j = buyers[b];
    BuyerSpec spec;
    spec.id = as_string(need(j, "id", path), path + ".id");
    spec.node = as_string(need(j, "node", path), path + ".node");
    spec.pmin = number_list(need(j, "pmin", path), path + ".pmin");
    spec.pmax = number_list(need(j, "pmax", path), path + ".pmax");
    const auto& ladders = as_array(need(j, "ladder", path), path + ".ladder");
    for (size_t t = 0; t < ladders.size(); ++t) {
      std::string lp = path + ".ladder[" + std::to_string(t) + "]";
      std::vector<BidStep> steps;
      const auto& sl = as_array(ladders[t], lp);
      for (size_t l = 0; l < sl.size(); ++l) {
        std::string sp = lp + "[" + std::to_string(l) + "]";
        steps.push_back({as_number(need(sl[l], "value", sp), sp + ".value"),
                         as_number(need(sl[l], "quantity", sp), sp + ".quantity")});
      }
      spec.ladder.push_back(std::move(steps));
    }
    m.buyers.push_back(std::move(spec));
  }

  const auto& sellers = as_array(need(doc, "sellers", "$"), "sellers");
  for (size_t s = 0; s < sellers.size(); ++s) {
    std::string path = "sellers[" + std::to_string(s) + "]";
    const auto& j = sellers[s];
    SellerSpec spec;
    spec.id = as_string(need(j, "id", path), path + ".id");
    spec.node = as_string(need(j, "node", path), path + ".node");
    spec.pmin = number_list(need(j, "pmin", path), path + ".pmin");
    spec.pmax = number_list(need(j, "pmax", path), path + ".pmax");
    const auto& ladders = as_array(need(j, "ladder", path), path + ".ladder");
    for (size_t t = 0; t < ladders.size(); ++t) {
      std::string lp = path + ".ladder[" + std::to_string(t) + "]";
      std::vector<OfferStep> steps;
      const auto& sl = as_array(ladders[t], lp);
      for (size_t l = 0; l < sl.size(); ++l) {
        std::string sp = lp + "[" + std::to_string(l) + "]";
        steps.push_back({as_number(need(sl[l], "cost", sp), sp + ".cost"),
                         as_number(need(sl[l], "quantity", sp), sp + ".quantity")});
      }
      spec.ladder.push_back(std::move(steps));
    }
    if (j.contains("no_load_cost"))
      spec.no_load_cost = as_number(j["no_load_cost"], path + ".no_load_cost");
    if (j.contains("min_uptime")) spec.min_uptime = as_int(j["min_uptime"], path + ".min_uptime");
    m.sellers.push_back(std::move(spec));
  }

  if (doc.contains("currency")) m.currency = as_string(doc["currency"], "currency");
  if (doc.contains("unit")) m.unit = as_string(doc["unit"], "unit");
  return m;
}

inline std::string save_instance(const MarketInstance& m) {
  nlohmann::ordered_json doc;
  doc["network"]["nodes"] = m.network.nodes;
  doc["network"]["reference"] = m.network.reference;
  doc["network"]["lines"] = nlohmann::ordered_json::array();
  for (const auto& l : m.network.lines)
    doc["network"]["lines"].push_back({{"from", l.from},
                                       {"to", l.to},
                                       {"susceptance", l.susceptance},
                                       {"fmin", l.fmin},
                                       {"fmax", l.fmax}});
  doc["periods"] = m.periods;
  doc["buyers"] = nlohmann::ordered_json::array();
  for (const auto& b : m.buyers) {
    nlohmann::ordered_json jb;
    jb["id"] = b.id;
    jb["node"] = b.node;
    jb["pmin"] = b.pmin;
    jb["pmax"] = b.pmax;
    jb["ladder"] = nlohmann::ordered_json::array();
    for (const auto& steps : b.ladder) {
      nlohmann::ordered_json js = nlohmann::ordered_json::array();
      for (const auto& s : steps) js.push_back({{"value", s.value}, {"quantity", s.quantity}});
      jb["ladder"].push_back(std::move(js));
    }
    doc["buyers"].push_back(std::move(jb));
  }
  doc["sellers"] = nlohmann::ordered_json::array();
  for (const auto& s : m.sellers) {
    nlohmann::ordered_json js;
    js["id"] = s.id;
    js["node"] = s.node;
    js["pmin"] = s.pmin;
    js["pmax"] = s.pmax;
    js["ladder"] = nlohmann::ordered_json::array();
    for (const auto& steps : s.ladder) {
      nlohmann::ordered_json jl = nlohmann::ordered_json::array();
      for (const auto& st : steps) jl.push_back({{"cost", st.cost}, {"quantity", st.quantity}});
      js["ladder"].push_back(std::move(jl));
    }
    js["no_load_cost"] = s.no_load_cost;
    js["min_uptime"] = s.min_uptime;
    doc["sellers"].push_back(std::move(js));
  }
  doc["currency"] = m.currency;
  doc["unit"] = m.unit;
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Built-in fixtures.
// ---------------------------------------------------------------------------

namespace detail {

inline BuyerSpec inelastic_buyer(std::string id, std::string node, std::vector<double> demand) {
  BuyerSpec b;
  b.id = std::move(id);
  b.node = std::move(node);
  b.pmin = demand;
  b.pmax = std::move(demand);
  b.ladder.assign(b.pmin.size(), {});
  return b;
}

inline SellerSpec simple_seller(std::string id, std::string node, double pmin, double pmax,
                                double cost, double no_load, int periods, int uptime = 1) {
  SellerSpec s;
  s.id = std::move(id);
  s.node = std::move(node);
  s.pmin.assign(periods, pmin);
  s.pmax.assign(periods, pmax);
  s.ladder.assign(periods, {OfferStep{cost, pmax}});
  s.no_load_cost = no_load;
  s.min_uptime = uptime;
  return s;
}

inline MarketInstance two_node_example(double cap, SellerSpec s1, SellerSpec s2,
                                       std::vector<BuyerSpec> buyers) {
  MarketInstance m;
  m.network.nodes = {"n1", "n2"};
  m.network.reference = "n1";
  m.network.lines = {{"n1", "n2", 1.0, -cap, cap}};
  m.periods = 1;
  m.sellers = {std::move(s1), std::move(s2)};
  m.buyers = std::move(buyers);
  return m;
}

inline MarketInstance make_convex_demo() {
  MarketInstance m;
  m.network.nodes = {"n1", "n2", "n3"};
  m.network.reference = "n1";
  m.network.lines = {{"n1", "n2", 1.0, -3.0, 3.0},
                     {"n2", "n3", 1.0, -3.0, 3.0},
                     {"n1", "n3", 2.0, -2.5, 2.5}};
  m.periods = 2;

  SellerSpec s1;
  s1.id = "s1";
  s1.node = "n1";
  s1.pmin = {0, 0};
  s1.pmax = {12, 12};
  s1.ladder = {{{5, 6}, {9, 6}}, {{6, 6}, {10, 6}}};
  SellerSpec s2;
  s2.id = "s2";
  s2.node = "n3";
  s2.pmin = {0, 0};
  s2.pmax = {10, 10};
  s2.ladder = {{{8, 10}}, {{7, 10}}};
  m.sellers = {std::move(s1), std::move(s2)};

  BuyerSpec b1;
  b1.id = "b1";
  b1.node = "n2";
  b1.pmin = {0, 0};
  b1.pmax = {7, 7};
  b1.ladder = {{{30, 4}, {20, 3}}, {{28, 4}, {19, 3}}};
  BuyerSpec b2;
  b2.id = "b2";
  b2.node = "n1";
  b2.pmin = {0, 0};
  b2.pmax = {3, 3};
  b2.ladder = {{{25, 3}}, {{24, 3}}};
  m.buyers = {std::move(b1), std::move(b2)};
  return m;
}

inline MarketInstance make_rts_mini() {
  MarketInstance m;
  m.periods = 24;
  const int T = 24;
  for (int i = 1; i <= 24; ++i) m.network.nodes.push_back("n" + std::to_string(i));
  m.network.reference = "n1";

  auto node = [](int i) { return "n" + std::to_string(i); };

  // Ring with four chords. Two ring segments next to the elastic load pocket
  // at n13 and the chord feeding it are deliberately tight so congestion
  // shows up at the evening peak.
  for (int i = 1; i <= 24; ++i) {
    int j = (i % 24) + 1;
    double cap = 40.0;
    if (i == 12 || i == 13) cap = 5.0;  // n12-n13 and n13-n14
    double b = 1.0 + 0.02 * (i % 5);
    m.network.lines.push_back({node(i), node(j), b, -cap, cap});
  }
  m.network.lines.push_back({node(1), node(13), 2.0, -7.0, 7.0});
  m.network.lines.push_back({node(4), node(16), 2.0, -30.0, 30.0});
  m.network.lines.push_back({node(7), node(19), 2.0, -30.0, 30.0});
  m.network.lines.push_back({node(10), node(22), 2.0, -30.0, 30.0});

  // Hourly demand shape: overnight trough, daytime plateau, evening peak.
  const double shape[T] = {0.62, 0.58, 0.56, 0.55, 0.57, 0.62, 0.72, 0.82,
                           0.88, 0.92, 0.94, 0.95, 0.93, 0.92, 0.91, 0.92,
                           0.95, 1.00, 0.99, 0.96, 0.90, 0.80, 0.72, 0.66};

  const std::pair<int, double> loads[] = {{2, 14}, {4, 11},  {6, 13},  {8, 9},
                                          {10, 12}, {12, 16}, {14, 15}, {16, 10},
                                          {18, 13}, {20, 11}, {22, 9},  {24, 12}};
  for (const auto& [at, base] : loads) {
    std::vector<double> d(T);
    for (int t = 0; t < T; ++t) d[t] = std::round(base * shape[t] * 10) / 10;
    m.buyers.push_back(inelastic_buyer("d" + std::to_string(at), node(at), std::move(d)));
  }

  // Elastic buyers: a three-step ladder inside the constrained pocket and a
  // two-step ladder on the opposite side of the ring.
  {
    BuyerSpec e1;
    e1.id = "e13";
    e1.node = node(13);
    e1.pmin.assign(T, 0.0);
    e1.pmax.assign(T, 18.0);
    e1.ladder.assign(T, {{78, 6}, {52, 6}, {34, 6}});
    m.buyers.push_back(std::move(e1));
    BuyerSpec e2;
    e2.id = "e7";
    e2.node = node(7);
    e2.pmin.assign(T, 0.0);
    e2.pmax.assign(T, 8.0);
    e2.ladder.assign(T, {{60, 4}, {40, 4}});
    m.buyers.push_back(std::move(e2));
  }

  // Twenty commitment-free units forming the merit order...
  const std::tuple<int, double, double> fleet[] = {
      {1, 12, 20}, {1, 24, 15}, {3, 16, 18},  {5, 30, 18},  {7, 22, 16},
      {9, 35, 10}, {11, 18, 20}, {13, 45, 10}, {15, 26, 14}, {17, 20, 18},
      {19, 33, 12}, {21, 15, 22}, {23, 28, 12}, {2, 40, 8},  {6, 48, 8},
      {10, 55, 8}, {14, 58, 6},  {18, 50, 8},  {22, 62, 6},  {16, 42, 10}};
  int gi = 0;
  for (const auto& [at, cost, cap] : fleet) {
    ++gi;
    m.sellers.push_back(
        simple_seller("g" + std::to_string(gi), node(at), 0.0, cap, cost, 0.0, T));
  }

  // ...and ten units with commitment frictions: block-loaded base units with
  // long minimum uptimes, mid-range cyclers, and peakers. No-load costs are
  // kept small relative to energy so each unit is decisively in or out of
  // merit in most hours.
  m.sellers.push_back(simple_seller("t1", node(4), 25, 25, 10, 100, T, 3));
  m.sellers.push_back(simple_seller("t2", node(20), 20, 20, 11, 60, T, 3));
  m.sellers.push_back(simple_seller("t3", node(8), 15, 15, 14, 45, T, 2));
  m.sellers.push_back(simple_seller("t4", node(12), 8, 16, 19, 40, T, 2));
  m.sellers.push_back(simple_seller("t5", node(24), 6, 14, 21, 30, T));
  m.sellers.push_back(simple_seller("t6", node(16), 12, 12, 13, 50, T, 3));
  m.sellers.push_back(simple_seller("t7", node(5), 5, 12, 25, 25, T));
  m.sellers.push_back(simple_seller("t8", node(9), 4, 10, 36, 15, T));
  m.sellers.push_back(simple_seller("t9", node(13), 3, 9, 44, 10, T));
  m.sellers.push_back(simple_seller("t10", node(19), 2, 8, 70, 8, T));
  return m;
}

}  // namespace detail

inline MarketInstance fixture(const std::string& name) {
  using detail::inelastic_buyer;
  using detail::simple_seller;
  using detail::two_node_example;
  if (name == "example1") {
    return two_node_example(2.0, simple_seller("s1", "n1", 2, 15, 10, 1000, 1),
                            simple_seller("s2", "n2", 8, 15, 1, 10, 1),
                            {inelastic_buyer("b1", "n1", {3}), inelastic_buyer("b2", "n2", {1})});
  }
  if (name == "example2") {
    return two_node_example(4.0, simple_seller("s1", "n1", 2, 8, 1, 100, 1),
                            simple_seller("s2", "n2", 8, 15, 10, 100, 1),
                            {inelastic_buyer("b1", "n1", {6}), inelastic_buyer("b2", "n2", {1})});
  }
  if (name == "example3") {
    BuyerSpec elastic;
    elastic.id = "b2";
    elastic.node = "n2";
    elastic.pmin = {0};
    elastic.pmax = {3};
    elastic.ladder = {{{50, 3}}};
    return two_node_example(2.0, simple_seller("s1", "n1", 2, 50, 10, 1000, 1),
                            simple_seller("s2", "n2", 8, 15, 10, 10, 1),
                            {inelastic_buyer("b1", "n1", {4}), std::move(elastic)});
  }
  if (name == "convex-demo") return detail::make_convex_demo();
  if (name == "rts-mini") return detail::make_rts_mini();
  throw LookupError("unknown fixture: " + name);
}

}  // namespace nodal::market
