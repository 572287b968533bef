#pragma once

// Price auditing: realized and indirect utilities per participant, the three
// lost-opportunity classes (global, local, make-whole), and congestion-signal
// diagnostics. Every indirect utility is computed by a small optimization
// over the participant's own feasible set — independently of how any price
// system was produced — so this module and the pricing LPs validate each
// other.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "nodal/common.hpp"
#include "nodal/dcopf.hpp"
#include "nodal/linprog.hpp"
#include "nodal/market.hpp"
#include "nodal/prices.hpp"

namespace nodal::metrics {

enum class Kind { Buyer, Seller, Line };
enum class Scope { Global, Local };

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::Buyer: return "buyer";
    case Kind::Seller: return "seller";
    case Kind::Line: return "line";
  }
  return "?";
}

struct ParticipantLoc {
  std::string id;
  Kind kind = Kind::Buyer;
  double gloc = 0, lloc = 0, mwp = 0;
  double utility = 0;
  double indirect_global = 0, indirect_local = 0;
};

struct CongestionFlag {
  std::string line;
  int period = 0;
  double flow = 0, fmin = 0, fmax = 0, gamma = 0;
  double lloc = 0;  // best attainable congestion rent minus the realized one
  bool false_signal = false;    // priced as congested while strictly interior
  bool missing_signal = false;  // at a limit yet the price prefers other flow
};

struct LocReport {
  std::vector<ParticipantLoc> entries;
  double total_gloc = 0, total_lloc = 0, total_mwp = 0;
  std::vector<CongestionFlag> congestion;
};

namespace detail {

inline void check_shape(const market::MarketInstance& m, const PriceSystem& ps) {
  if (ps.p.size() != m.network.nodes.size() || ps.gamma.size() != m.network.lines.size())
    throw ValidationError("price system dimensions do not match the instance");
  for (const auto& row : ps.p)
    if (static_cast<int>(row.size()) != m.periods)
      throw ValidationError("nodal price horizon does not match the instance");
  for (const auto& row : ps.gamma)
    if (static_cast<int>(row.size()) != m.periods)
      throw ValidationError("congestion price horizon does not match the instance");
}

struct Resolved {
  Kind kind;
  int index;
};

inline Resolved resolve(const market::MarketInstance& m, const std::string& id) {
  for (size_t b = 0; b < m.buyers.size(); ++b)
    if (m.buyers[b].id == id) return {Kind::Buyer, static_cast<int>(b)};
  for (size_t s = 0; s < m.sellers.size(); ++s)
    if (m.sellers[s].id == id) return {Kind::Seller, static_cast<int>(s)};
  for (size_t l = 0; l < m.network.lines.size(); ++l)
    if (m.network.lines[l].from + "-" + m.network.lines[l].to == id)
      return {Kind::Line, static_cast<int>(l)};
  throw LookupError("unknown participant: " + id);
}

// Best utility a buyer can reach at the given nodal prices: elastic steps are
// chosen by LP under the per-period consumption cap; the inelastic block is
// a fixed obligation paid at the price.
inline double buyer_best(const market::MarketInstance& m, int b, const PriceSystem& ps) {
  const auto& spec = m.buyers[b];
  int v = m.node_index(spec.node);
  linprog::LpModel lp;
  lp.sense = linprog::Sense::Maximize;
  lp.name = "buyer:" + spec.id;
  double constant = 0;
  for (int t = 0; t < m.periods; ++t) {
    double p = ps.p[v][t];
    constant -= p * spec.pmin[t];
    if (spec.ladder[t].empty()) continue;
    std::vector<linprog::LinearTerm> cap;
    for (size_t l = 0; l < spec.ladder[t].size(); ++l) {
      int xs = lp.add_variable("xs[" + std::to_string(t) + "." + std::to_string(l) + "]", 0,
                               spec.ladder[t][l].quantity, spec.ladder[t][l].value - p);
      cap.push_back({xs, 1.0});
    }
    lp.add_constraint("cap[" + std::to_string(t) + "]", -kInf, spec.pmax[t] - spec.pmin[t], cap);
  }
  auto sol = linprog::solve_lp(lp);
  if (sol.status != linprog::SolveStatus::Optimal)
    throw NumericError("buyer subproblem failed for " + spec.id);
  return sol.objective + constant;
}

// Best utility a seller can reach. With `fix_to` null the commitment pattern
// is optimized (binary u with start-up/uptime coupling); otherwise u is
// pinned to the given pattern and only output is optimized.
inline double seller_best(const market::MarketInstance& m, int s, const PriceSystem& ps,
                          const std::vector<int>* fix_to) {
  const auto& spec = m.sellers[s];
  int v = m.node_index(spec.node);
  const int T = m.periods;
  if (fix_to && std::all_of(fix_to->begin(), fix_to->end(), [](int u) { return u == 0; }))
    return 0.0;

  linprog::LpModel lp;
  lp.sense = linprog::Sense::Maximize;
  lp.name = "seller:" + spec.id;
  bool free_unit = !fix_to && market::commitment_free(spec);
  std::vector<int> u_var(T, -1);
  for (int t = 0; t < T; ++t) {
    std::string ts = "[" + std::to_string(t) + "]";
    int u;
    if (fix_to) {
      double val = (*fix_to)[t];
      u = lp.add_variable("u" + ts, val, val, -spec.no_load_cost);
    } else if (free_unit) {
      u = lp.add_variable("u" + ts, 1, 1, -spec.no_load_cost);
    } else {
      u = lp.add_variable("u" + ts, 0, 1, -spec.no_load_cost, linprog::VarKind::Binary);
    }
    u_var[t] = u;
    int y = lp.add_variable("y" + ts, 0, spec.pmax[t], ps.p[v][t]);
    std::vector<linprog::LinearTerm> def{{y, 1.0}};
    for (size_t l = 0; l < spec.ladder[t].size(); ++l) {
      int ys = lp.add_variable("ys" + ts + "." + std::to_string(l), 0,
                               spec.ladder[t][l].quantity, -spec.ladder[t][l].cost);
      def.push_back({ys, -1.0});
      lp.add_constraint("ycap" + ts + "." + std::to_string(l), -kInf, 0,
                        {{ys, 1.0}, {u, -spec.ladder[t][l].quantity}});
    }
    lp.add_constraint("ydef" + ts, 0, 0, def);
    lp.add_constraint("ymin" + ts, 0, kInf, {{y, 1.0}, {u, -spec.pmin[t]}});
    lp.add_constraint("ymax" + ts, -kInf, 0, {{y, 1.0}, {u, -spec.pmax[t]}});
  }
  if (!fix_to && !free_unit) {
    std::vector<int> phi(T, -1);
    for (int t = 1; t < T; ++t)
      phi[t] = lp.add_variable("phi[" + std::to_string(t) + "]", 0, kInf, 0);
    for (int t = 1; t < T; ++t) {
      lp.add_constraint("startup[" + std::to_string(t) + "]", 0, kInf,
                        {{phi[t], 1.0}, {u_var[t], -1.0}, {u_var[t - 1], 1.0}});
      std::vector<linprog::LinearTerm> window{{u_var[t], -1.0}};
      for (int i = std::max(1, t - spec.min_uptime + 1); i <= t; ++i)
        window.push_back({phi[i], 1.0});
      lp.add_constraint("uptime[" + std::to_string(t) + "]", -kInf, 0, window);
    }
  }
  auto sol = (!fix_to && !free_unit) ? linprog::solve_milp(lp) : linprog::solve_lp(lp);
  if (sol.status != linprog::SolveStatus::Optimal)
    throw NumericError("seller subproblem failed for " + spec.id);
  return sol.objective;
}

inline double line_best(const market::MarketInstance& m, int l, const PriceSystem& ps) {
  const auto& line = m.network.lines[l];
  linprog::LpModel lp;
  lp.sense = linprog::Sense::Maximize;
  lp.name = "line:" + line.from + "-" + line.to;
  for (int t = 0; t < m.periods; ++t)
    lp.add_variable("f[" + std::to_string(t) + "]", line.fmin, line.fmax, ps.gamma[l][t]);
  auto sol = linprog::solve_lp(lp);
  if (sol.status != linprog::SolveStatus::Optimal)
    throw NumericError("line subproblem failed for " + lp.name);
  return sol.objective;
}

}  // namespace detail

inline double realized_utility(const market::MarketInstance& m, const std::string& id,
                               const PriceSystem& ps, const dcopf::Dispatch& d) {
  detail::check_shape(m, ps);
  auto who = detail::resolve(m, id);
  double u = 0;
  switch (who.kind) {
    case Kind::Buyer: {
      const auto& spec = m.buyers[who.index];
      int v = m.node_index(spec.node);
      for (int t = 0; t < m.periods; ++t) {
        for (size_t l = 0; l < spec.ladder[t].size(); ++l)
          u += spec.ladder[t][l].value * d.bid_steps[who.index][t][l];
        u -= ps.p[v][t] * d.consumption[who.index][t];
      }
      break;
    }
    case Kind::Seller: {
      const auto& spec = m.sellers[who.index];
      int v = m.node_index(spec.node);
      for (int t = 0; t < m.periods; ++t) {
        u += ps.p[v][t] * d.generation[who.index][t];
        for (size_t l = 0; l < spec.ladder[t].size(); ++l)
          u -= spec.ladder[t][l].cost * d.offer_steps[who.index][t][l];
        u -= spec.no_load_cost * d.commitment[who.index][t];
      }
      break;
    }
    case Kind::Line:
      for (int t = 0; t < m.periods; ++t) u += ps.gamma[who.index][t] * d.flow[who.index][t];
      break;
  }
  return u;
}

inline double indirect_utility(const market::MarketInstance& m, const std::string& id,
                               const PriceSystem& ps, Scope scope,
                               const dcopf::Dispatch* d = nullptr) {
  detail::check_shape(m, ps);
  auto who = detail::resolve(m, id);
  switch (who.kind) {
    case Kind::Buyer:
      return detail::buyer_best(m, who.index, ps);  // no commitment: scopes agree
    case Kind::Seller:
      if (scope == Scope::Global) return detail::seller_best(m, who.index, ps, nullptr);
      if (!d) throw ValidationError("local scope needs a dispatch for commitment context");
      return detail::seller_best(m, who.index, ps, &d->commitment[who.index]);
    case Kind::Line:
      return detail::line_best(m, who.index, ps);
  }
  throw LookupError("unknown participant: " + id);
}

inline std::vector<CongestionFlag> congestion_diagnostics(const market::MarketInstance& m,
                                                          const dcopf::Dispatch& d,
                                                          const PriceSystem& ps,
                                                          double tol = 1e-6) {
  detail::check_shape(m, ps);
  std::vector<CongestionFlag> out;
  for (size_t l = 0; l < m.network.lines.size(); ++l) {
    const auto& line = m.network.lines[l];
    for (int t = 0; t < m.periods; ++t) {
      CongestionFlag flag;
      flag.line = line.from + "-" + line.to;
      flag.period = t;
      flag.flow = d.flow[l][t];
      flag.fmin = line.fmin;
      flag.fmax = line.fmax;
      flag.gamma = ps.gamma[l][t];
      flag.lloc =
          std::max(flag.gamma * line.fmax, flag.gamma * line.fmin) - flag.gamma * flag.flow;
      bool interior = flag.flow > line.fmin + tol && flag.flow < line.fmax - tol;
      flag.false_signal = interior && std::fabs(flag.gamma) > tol;
      flag.missing_signal = !interior && flag.lloc > tol;
      out.push_back(std::move(flag));
    }
  }
  return out;
}

inline LocReport compute_locs(const market::MarketInstance& m, const dcopf::Dispatch& d,
                              const PriceSystem& ps) {
  detail::check_shape(m, ps);
  LocReport rep;
  auto add = [&](const std::string& id, Kind kind, bool mwp_eligible) {
    ParticipantLoc e;
    e.id = id;
    e.kind = kind;
    e.utility = realized_utility(m, id, ps, d);
    e.indirect_global = indirect_utility(m, id, ps, Scope::Global, &d);
    e.indirect_local = indirect_utility(m, id, ps, Scope::Local, &d);
    e.gloc = e.indirect_global - e.utility;
    e.lloc = e.indirect_local - e.utility;
    e.mwp = mwp_eligible ? std::max(-e.utility, 0.0) : 0.0;
    rep.total_gloc += e.gloc;
    rep.total_lloc += e.lloc;
    rep.total_mwp += e.mwp;
    rep.entries.push_back(std::move(e));
  };
  // A purely inelastic buyer's payment is a price-independent obligation, not
  // a loss the market must make whole, so it stays out of MWP accounting.
  for (const auto& b : m.buyers) add(b.id, Kind::Buyer, !market::purely_inelastic(b));
  for (const auto& s : m.sellers) add(s.id, Kind::Seller, true);
  for (const auto& line : m.network.lines) add(line.from + "-" + line.to, Kind::Line, true);
  rep.congestion = congestion_diagnostics(m, d, ps);
  return rep;
}

inline std::string to_csv(const LocReport& rep) {
  std::string out = "id,kind,gloc,lloc,mwp,utility\n";
  char buf[256];
  for (const auto& e : rep.entries) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.6f,%.6f,%.6f,%.6f\n", e.id.c_str(),
                  to_string(e.kind), e.gloc, e.lloc, e.mwp, e.utility);
    out += buf;
  }
  return out;
}

inline std::string to_json(const LocReport& rep) {
  nlohmann::ordered_json doc;
  doc["participants"] = nlohmann::ordered_json::array();
  for (const auto& e : rep.entries)
    doc["participants"].push_back({{"id", e.id},
                                   {"kind", to_string(e.kind)},
                                   {"gloc", e.gloc},
                                   {"lloc", e.lloc},
                                   {"mwp", e.mwp},
                                   {"utility", e.utility},
                                   {"indirect_global", e.indirect_global},
                                   {"indirect_local", e.indirect_local}});
  doc["totals"] = {{"gloc", rep.total_gloc}, {"lloc", rep.total_lloc}, {"mwp", rep.total_mwp}};
  doc["congestion"] = nlohmann::ordered_json::array();
  for (const auto& c : rep.congestion)
    doc["congestion"].push_back({{"line", c.line},
                                 {"period", c.period},
                                 {"flow", c.flow},
                                 {"fmin", c.fmin},
                                 {"fmax", c.fmax},
                                 {"gamma", c.gamma},
                                 {"lloc", c.lloc},
                                 {"false_signal", c.false_signal},
                                 {"missing_signal", c.missing_signal}});
  return doc.dump(2);
}

}  // namespace nodal::metrics
