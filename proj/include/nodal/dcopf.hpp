#pragma once

// Dispatch model: welfare-maximizing mixed-integer program over bid/offer
// ladders, unit commitment with minimum uptimes, and a linearized network
// (flows proportional to angle differences, reference angle pinned to zero).

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nodal/common.hpp"
#include "nodal/linprog.hpp"
#include "nodal/market.hpp"

namespace nodal::dcopf {

// Variable/row ids of the built model, -1 where a quantity was eliminated
// as a constant (inelastic consumption, frictionless commitment).
struct DcopfIndex {
  std::vector<std::vector<int>> x_var;                // [buyer][period]
  std::vector<std::vector<std::vector<int>>> xs_var;  // [buyer][period][step]
  std::vector<std::vector<int>> y_var;                // [seller][period]
  std::vector<std::vector<std::vector<int>>> ys_var;  // [seller][period][step]
  std::vector<std::vector<int>> u_var;                // [seller][period]
  std::vector<std::vector<int>> phi_var;              // [seller][period]
  std::vector<std::vector<int>> f_var;                // [line][period]
  std::vector<std::vector<int>> alpha_var;            // [node][period]
  std::vector<std::vector<int>> balance_row;          // [node][period]
  std::vector<std::vector<int>> flow_row;             // [line][period]
  std::vector<int> pin_row;                           // [period]
};

struct BuiltModel {
  linprog::LpModel lp;
  DcopfIndex index;
};

struct Dispatch {
  std::vector<std::vector<double>> consumption;               // [buyer][period]
  std::vector<std::vector<std::vector<double>>> bid_steps;    // [buyer][period][step]
  std::vector<std::vector<double>> generation;                // [seller][period]
  std::vector<std::vector<std::vector<double>>> offer_steps;  // [seller][period][step]
  std::vector<std::vector<int>> commitment;                   // [seller][period]
  std::vector<std::vector<double>> startups;                  // [seller][period]
  std::vector<std::vector<double>> flow;                      // [line][period]
  std::vector<std::vector<double>> angle;                     // [node][period]
  double welfare = 0;
  long long simplex_iterations = 0;
  int branch_nodes = 0;
};

inline BuiltModel build_dcopf_indexed(const market::MarketInstance& m) {
  {
    auto diags = market::validate(m);
    if (market::has_errors(diags)) {
      for (const auto& d : diags)
        if (d.severity == market::Severity::Error)
          throw ValidationError("invalid instance: " + d.path + ": " + d.message);
    }
  }

  const int T = m.periods;
  BuiltModel out;
  auto& lp = out.lp;
  auto& ix = out.index;
  lp.sense = linprog::Sense::Maximize;
  lp.name = "dcopf";

  auto tag = [](const std::string& id, int t) { return "[" + id + "," + std::to_string(t) + "]"; };

  // Network variables.
  ix.alpha_var.resize(m.network.nodes.size());
  for (size_t v = 0; v < m.network.nodes.size(); ++v)
    for (int t = 0; t < T; ++t)
      ix.alpha_var[v].push_back(
          lp.add_variable("alpha" + tag(m.network.nodes[v], t), -kInf, kInf, 0));
  ix.f_var.resize(m.network.lines.size());
  for (size_t l = 0; l < m.network.lines.size(); ++l) {
    const auto& line = m.network.lines[l];
    for (int t = 0; t < T; ++t)
      ix.f_var[l].push_back(
          lp.add_variable("f" + tag(line.from + "-" + line.to, t), line.fmin, line.fmax, 0));
  }

  // Buyers: consumption splits as pmin plus ladder steps; periods without
  // elastic steps contribute a constant to their node's balance instead.
  ix.x_var.resize(m.buyers.size());
  ix.xs_var.resize(m.buyers.size());
  for (size_t b = 0; b < m.buyers.size(); ++b) {
    const auto& spec = m.buyers[b];
    ix.xs_var[b].resize(T);
    for (int t = 0; t < T; ++t) {
      if (spec.ladder[t].empty()) {
        ix.x_var[b].push_back(-1);
        continue;
      }
      int x = lp.add_variable("x" + tag(spec.id, t), spec.pmin[t], spec.pmax[t], 0);
      ix.x_var[b].push_back(x);
      std::vector<linprog::LinearTerm> def{{x, 1.0}};
      for (size_t l = 0; l < spec.ladder[t].size(); ++l) {
        int xs = lp.add_variable("xs" + tag(spec.id, t) + "." + std::to_string(l), 0,
                                 spec.ladder[t][l].quantity, spec.ladder[t][l].value);
        ix.xs_var[b][t].push_back(xs);
        def.push_back({xs, -1.0});
      }
      lp.add_constraint("xdef" + tag(spec.id, t), spec.pmin[t], spec.pmin[t], def);
    }
  }

  // Sellers: a frictionless unit (no minimum output, no no-load cost, no
  // uptime) keeps the relaxation exact at u = 1, so its commitment variable
  // and coupling rows are dropped entirely.
  ix.y_var.resize(m.sellers.size());
  ix.ys_var.resize(m.sellers.size());
  ix.u_var.resize(m.sellers.size());
  ix.phi_var.resize(m.sellers.size());
  for (size_t s = 0; s < m.sellers.size(); ++s) {
    const auto& spec = m.sellers[s];
    bool free_unit = market::commitment_free(spec);
    ix.ys_var[s].resize(T);
    for (int t = 0; t < T; ++t) {
      int y = lp.add_variable("y" + tag(spec.id, t), 0, spec.pmax[t], 0);
      ix.y_var[s].push_back(y);
      int u = -1;
      if (!free_unit)
        u = lp.add_variable("u" + tag(spec.id, t), 0, 1, -spec.no_load_cost,
                            linprog::VarKind::Binary);
      ix.u_var[s].push_back(u);
      std::vector<linprog::LinearTerm> def{{y, 1.0}};
      for (size_t l = 0; l < spec.ladder[t].size(); ++l) {
        int ys = lp.add_variable("ys" + tag(spec.id, t) + "." + std::to_string(l), 0,
                                 spec.ladder[t][l].quantity, -spec.ladder[t][l].cost);
        ix.ys_var[s][t].push_back(ys);
        def.push_back({ys, -1.0});
        if (!free_unit)
          lp.add_constraint("ycap" + tag(spec.id, t) + "." + std::to_string(l), -kInf, 0,
                            {{ys, 1.0}, {u, -spec.ladder[t][l].quantity}});
      }
      lp.add_constraint("ydef" + tag(spec.id, t), 0, 0, def);
      if (!free_unit) {
        lp.add_constraint("ymin" + tag(spec.id, t), 0, kInf, {{y, 1.0}, {u, -spec.pmin[t]}});
        lp.add_constraint("ymax" + tag(spec.id, t), -kInf, 0, {{y, 1.0}, {u, -spec.pmax[t]}});
      }
    }
    if (!free_unit) {
      ix.phi_var[s].assign(T, -1);
      for (int t = 1; t < T; ++t)
        ix.phi_var[s][t] = lp.add_variable("phi" + tag(spec.id, t), 0, kInf, 0);
      for (int t = 1; t < T; ++t) {
        lp.add_constraint(
            "startup" + tag(spec.id, t), 0, kInf,
            {{ix.phi_var[s][t], 1.0}, {ix.u_var[s][t], -1.0}, {ix.u_var[s][t - 1], 1.0}});
        std::vector<linprog::LinearTerm> window{{ix.u_var[s][t], -1.0}};
        for (int i = std::max(1, t - spec.min_uptime + 1); i <= t; ++i)
          window.push_back({ix.phi_var[s][i], 1.0});
        lp.add_constraint("uptime" + tag(spec.id, t), -kInf, 0, window);
      }
    } else {
      ix.phi_var[s].assign(T, -1);
    }
  }

  // Flow definitions and nodal balance. Balance is written over angles so
  // that a line's flow variable couples to the network only through its own
  // definition row; its dual then prices congestion directly.
  ix.flow_row.resize(m.network.lines.size());
  for (size_t l = 0; l < m.network.lines.size(); ++l) {
    const auto& line = m.network.lines[l];
    int from = m.node_index(line.from), to = m.node_index(line.to);
    for (int t = 0; t < T; ++t)
      ix.flow_row[l].push_back(
          lp.add_constraint("flowdef" + tag(line.from + "-" + line.to, t), 0, 0,
                            {{ix.alpha_var[from][t], line.susceptance},
                             {ix.alpha_var[to][t], -line.susceptance},
                             {ix.f_var[l][t], -1.0}}));
  }
  ix.balance_row.resize(m.network.nodes.size());
  for (size_t v = 0; v < m.network.nodes.size(); ++v) {
    for (int t = 0; t < T; ++t) {
      std::vector<linprog::LinearTerm> terms;
      double constant = 0;
      for (size_t b = 0; b < m.buyers.size(); ++b) {
        if (m.node_index(m.buyers[b].node) != static_cast<int>(v)) continue;
        if (ix.x_var[b][t] >= 0)
          terms.push_back({ix.x_var[b][t], 1.0});
        else
          constant += m.buyers[b].pmin[t];
      }
      for (size_t s = 0; s < m.sellers.size(); ++s)
        if (m.node_index(m.sellers[s].node) == static_cast<int>(v))
          terms.push_back({ix.y_var[s][t], -1.0});
      for (size_t l = 0; l < m.network.lines.size(); ++l) {
        const auto& line = m.network.lines[l];
        int from = m.node_index(line.from), to = m.node_index(line.to);
        if (from == static_cast<int>(v)) {
          terms.push_back({ix.alpha_var[from][t], line.susceptance});
          terms.push_back({ix.alpha_var[to][t], -line.susceptance});
        } else if (to == static_cast<int>(v)) {
          terms.push_back({ix.alpha_var[to][t], line.susceptance});
          terms.push_back({ix.alpha_var[from][t], -line.susceptance});
        }
      }
      ix.balance_row[v].push_back(
          lp.add_constraint("balance" + tag(m.network.nodes[v], t), -constant, -constant, terms));
    }
  }
  int ref = m.node_index(m.network.reference);
  for (int t = 0; t < T; ++t)
    ix.pin_row.push_back(lp.add_constraint("pin[" + std::to_string(t) + "]", 0, 0,
                                           {{ix.alpha_var[ref][t], 1.0}}));
  return out;
}

inline linprog::LpModel build_dcopf(const market::MarketInstance& m) {
  return build_dcopf_indexed(m).lp;
}

namespace detail {

// Restrict the instance to a single period (commitment coupling removed).
inline market::MarketInstance period_slice(const market::MarketInstance& m, int t) {
  market::MarketInstance s;
  s.network = m.network;
  s.periods = 1;
  s.currency = m.currency;
  s.unit = m.unit;
  for (const auto& b : m.buyers) {
    market::BuyerSpec spec;
    spec.id = b.id;
    spec.node = b.node;
    spec.pmin = {b.pmin[t]};
    spec.pmax = {b.pmax[t]};
    spec.ladder = {b.ladder[t]};
    s.buyers.push_back(std::move(spec));
  }
  for (const auto& sp : m.sellers) {
    market::SellerSpec spec;
    spec.id = sp.id;
    spec.node = sp.node;
    spec.pmin = {sp.pmin[t]};
    spec.pmax = {sp.pmax[t]};
    spec.ladder = {sp.ladder[t]};
    spec.no_load_cost = sp.no_load_cost;
    spec.min_uptime = 1;
    s.sellers.push_back(std::move(spec));
  }
  return s;
}

inline std::string diagnose_infeasibility(const market::MarketInstance& m,
                                          const linprog::SolverConfig& cfg) {
  for (int t = 0; t < m.periods; ++t) {
    auto slice = build_dcopf_indexed(period_slice(m, t));
    auto sol = linprog::solve_milp(slice.lp, cfg);
    if (sol.status == linprog::SolveStatus::Infeasible)
      return "infeasible dispatch: inelastic demand exceeds deliverable capacity in period " +
             std::to_string(t + 1) + " of " + std::to_string(m.periods);
  }
  return "infeasible dispatch: cross-period commitment coupling admits no feasible schedule";
}

}  // namespace detail

inline Dispatch solve_dispatch(const market::MarketInstance& m,
                               const linprog::SolverConfig& cfg = {}) {
  auto built = build_dcopf_indexed(m);
  auto sol = linprog::solve_milp(built.lp, cfg);
  if (sol.status == linprog::SolveStatus::Infeasible)
    throw Error(detail::diagnose_infeasibility(m, cfg));
  if (sol.status != linprog::SolveStatus::Optimal)
    throw NumericError("dispatch solve failed: " +
                       (sol.message.empty() ? to_string(sol.status) : sol.message));

  const int T = m.periods;
  const auto& ix = built.index;
  Dispatch d;
  auto value = [&](int id) { return id >= 0 ? sol.x[id] : 0.0; };

  d.consumption.resize(m.buyers.size());
  d.bid_steps.resize(m.buyers.size());
  for (size_t b = 0; b < m.buyers.size(); ++b) {
    d.bid_steps[b].resize(T);
    for (int t = 0; t < T; ++t) {
      d.consumption[b].push_back(ix.x_var[b][t] >= 0 ? sol.x[ix.x_var[b][t]]
                                                     : m.buyers[b].pmin[t]);
      for (int id : ix.xs_var[b][t]) d.bid_steps[b][t].push_back(value(id));
    }
  }
  d.generation.resize(m.sellers.size());
  d.offer_steps.resize(m.sellers.size());
  d.commitment.resize(m.sellers.size());
  d.startups.resize(m.sellers.size());
  for (size_t s = 0; s < m.sellers.size(); ++s) {
    d.offer_steps[s].resize(T);
    for (int t = 0; t < T; ++t) {
      double y = sol.x[ix.y_var[s][t]];
      d.generation[s].push_back(y);
      if (ix.u_var[s][t] >= 0)
        d.commitment[s].push_back(static_cast<int>(std::lround(sol.x[ix.u_var[s][t]])));
      else
        d.commitment[s].push_back(y > 1e-9 ? 1 : 0);
      for (int id : ix.ys_var[s][t]) d.offer_steps[s][t].push_back(value(id));
    }
    // Report the canonical minimal start-up profile. It is pointwise below
    // any feasible profile for this commitment, so the uptime windows that
    // the solver satisfied remain satisfied.
    d.startups[s].assign(T, 0.0);
    for (int t = 1; t < T; ++t)
      d.startups[s][t] = std::max(0, d.commitment[s][t] - d.commitment[s][t - 1]);
  }
  d.flow.resize(m.network.lines.size());
  for (size_t l = 0; l < m.network.lines.size(); ++l)
    for (int t = 0; t < T; ++t) d.flow[l].push_back(sol.x[ix.f_var[l][t]]);
  d.angle.resize(m.network.nodes.size());
  for (size_t v = 0; v < m.network.nodes.size(); ++v)
    for (int t = 0; t < T; ++t) d.angle[v].push_back(sol.x[ix.alpha_var[v][t]]);
  d.welfare = sol.objective;
  d.simplex_iterations = sol.iterations;
  d.branch_nodes = sol.nodes;
  return d;
}

inline std::string to_json(const market::MarketInstance& m, const Dispatch& d) {
  nlohmann::ordered_json doc;
  doc["welfare"] = d.welfare;
  for (size_t b = 0; b < m.buyers.size(); ++b)
    doc["consumption"][m.buyers[b].id] = d.consumption[b];
  for (size_t s = 0; s < m.sellers.size(); ++s) {
    doc["generation"][m.sellers[s].id] = d.generation[s];
    doc["commitment"][m.sellers[s].id] = d.commitment[s];
    doc["startups"][m.sellers[s].id] = d.startups[s];
  }
  for (size_t l = 0; l < m.network.lines.size(); ++l)
    doc["flow"][m.network.lines[l].from + "-" + m.network.lines[l].to] = d.flow[l];
  for (size_t v = 0; v < m.network.nodes.size(); ++v)
    doc["angle"][m.network.nodes[v]] = d.angle[v];
  return doc.dump(2);
}

}  // namespace nodal::dcopf
