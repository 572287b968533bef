#pragma once

// Dual pricing rules over a fixed optimal dispatch. Each rule is a linear
// program in the price system (p, gamma, r) plus one payout variable per
// participant whose optimum equals a lost-opportunity total:
//
//   ch      — payouts bound each participant's best response with relaxed
//             commitment; the optimum is the total global lost opportunity.
//   ip      — commitment pinned to the dispatch; optimum is the total local
//             lost opportunity, which optimal prices drive to zero.
//   minmwp  — payouts only floor realized losses; optimum is the least total
//             make-whole payment. A deterministic second stage then picks the
//             lowest-price point on the optimal face.
//   join    — the ip LP plus one row per buyer and seller so each payout is
//             max{local loss, make-whole need}; parameter-free compromise.
//   scalarized(wCH,wIP,wMWP) — one LP sharing (p, gamma, r) across the chosen
//             components with per-component payout copies; the objective is
//             the weighted sum of the component totals.
//
// All rules share the per-node price-consistency rows that force zero losses
// for the phase-angle operators, so prices stay physically meaningful.

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nodal/common.hpp"
#include "nodal/dcopf.hpp"
#include "nodal/linprog.hpp"
#include "nodal/market.hpp"
#include "nodal/metrics.hpp"
#include "nodal/prices.hpp"

namespace nodal::pricing {

struct PricingRule {
  enum class Kind { CH, IP, MinMWP, Join, Scalarized };
  Kind kind = Kind::CH;
  std::array<double, 3> weights{1, 0, 0};  // CH, IP, MWP shares (Scalarized only)

  static PricingRule ch() { return {Kind::CH, {1, 0, 0}}; }
  static PricingRule ip() { return {Kind::IP, {0, 1, 0}}; }
  static PricingRule min_mwp() { return {Kind::MinMWP, {0, 0, 1}}; }
  static PricingRule join() { return {Kind::Join, {0, 1, 0}}; }
  static PricingRule scalarized(double wch, double wip, double wmwp) {
    if (!(wch >= 0) || !(wip >= 0) || !(wmwp >= 0) ||
        std::fabs(wch + wip + wmwp - 1.0) > 1e-9)
      throw ValidationError("scalarization weights must be nonnegative and sum to one");
    return {Kind::Scalarized, {wch, wip, wmwp}};
  }
};

inline std::string to_string(const PricingRule& rule) {
  switch (rule.kind) {
    case PricingRule::Kind::CH: return "ch";
    case PricingRule::Kind::IP: return "ip";
    case PricingRule::Kind::MinMWP: return "minmwp";
    case PricingRule::Kind::Join: return "join";
    case PricingRule::Kind::Scalarized: {
      char buf[80];
      std::snprintf(buf, sizeof(buf), "scalarized(%g,%g,%g)", rule.weights[0],
                    rule.weights[1], rule.weights[2]);
      return buf;
    }
  }
  return "?";
}

struct LambdaEntry {
  std::string id;
  double value = 0;
};

struct PricingResult {
  PricingRule rule;
  PriceSystem prices;
  double objective = 0;                // equals the sum of the payouts below
  std::vector<LambdaEntry> lambdas;    // per participant, instance order
  long iterations = 0;
  std::string status;
};

namespace detail {

using linprog::LinearTerm;
using linprog::LpModel;

struct LambdaRef {
  int var = -1;
  double weight = 1;
};

struct PricingIndex {
  std::vector<std::vector<int>> p_var;      // [node][period]
  std::vector<std::vector<int>> gamma_var;  // [line][period]
  std::vector<int> r_var;                   // [period]
  // Participant payouts in instance order (buyers, sellers, lines); a line's
  // payout is the sum of its per-period variables.
  std::vector<std::pair<std::string, std::vector<LambdaRef>>> lambdas;
};

struct Built {
  LpModel lp;
  PricingIndex index;
};

inline void check_dispatch_shape(const market::MarketInstance& m, const dcopf::Dispatch& d) {
  auto horizon = [&](const auto& rows) {
    for (const auto& row : rows)
      if (static_cast<int>(row.size()) != m.periods) return false;
    return true;
  };
  if (d.consumption.size() != m.buyers.size() || d.generation.size() != m.sellers.size() ||
      d.commitment.size() != m.sellers.size() || d.flow.size() != m.network.lines.size() ||
      !horizon(d.consumption) || !horizon(d.generation) || !horizon(d.commitment) ||
      !horizon(d.flow))
    throw ValidationError("dispatch does not match the instance shape");
}

inline double bid_value(const market::MarketInstance& m, size_t b, const dcopf::Dispatch& d) {
  double v = 0;
  for (int t = 0; t < m.periods; ++t)
    for (size_t l = 0; l < m.buyers[b].ladder[t].size(); ++l)
      v += m.buyers[b].ladder[t][l].value * d.bid_steps[b][t][l];
  return v;
}

inline double offer_cost(const market::MarketInstance& m, size_t s, const dcopf::Dispatch& d,
                         bool include_no_load) {
  double c = 0;
  for (int t = 0; t < m.periods; ++t) {
    for (size_t l = 0; l < m.sellers[s].ladder[t].size(); ++l)
      c += m.sellers[s].ladder[t][l].cost * d.offer_steps[s][t][l];
    if (include_no_load) c += m.sellers[s].no_load_cost * d.commitment[s][t];
  }
  return c;
}

enum class Component { CH, IP, MWP };

// Appends one pricing component — payout variables, auxiliary duals, and
// their rows — onto a model that already carries the shared (p, gamma, r).
// Returns the payout variables in participant order so callers can attach
// extra rows (the join) or read values back.
struct EmittedLambdas {
  std::vector<int> buyer;
  std::vector<int> seller;
  std::vector<std::vector<int>> line;  // [line][period] -> var
};

inline EmittedLambdas emit_component(LpModel& lp, const PricingIndex& ix,
                                     const market::MarketInstance& m,
                                     const dcopf::Dispatch& d, Component comp, double weight) {
  const int T = m.periods;
  const char* tag = comp == Component::CH ? "CH:" : comp == Component::IP ? "IP:" : "MWP:";
  EmittedLambdas out;
  auto name = [&](const std::string& stem) { return tag + stem; };

  for (size_t b = 0; b < m.buyers.size(); ++b) {
    const auto& spec = m.buyers[b];
    int node = m.node_index(spec.node);
    if (comp == Component::MWP) {
      int lam = lp.add_variable(name("lam[" + spec.id + "]"), 0, kInf, weight);
      out.buyer.push_back(lam);
      std::vector<LinearTerm> row{{lam, 1.0}};
      double floor = 0;
      // A purely inelastic buyer's payment is an obligation, not an exit
      // incentive, so its make-whole floor is zero.
      if (!market::purely_inelastic(spec)) {
        for (int t = 0; t < T; ++t) row.push_back({ix.p_var[node][t], -d.consumption[b][t]});
        floor = -bid_value(m, b, d);
      }
      lp.add_constraint(name("mwp[" + spec.id + "]"), floor, kInf, std::move(row));
      continue;
    }
    // CH and IP bound the buyer's best response identically (no commitment).
    int lam = lp.add_variable(name("lam[" + spec.id + "]"), -kInf, kInf, weight);
    out.buyer.push_back(lam);
    std::vector<LinearTerm> loc{{lam, 1.0}};
    for (int t = 0; t < T; ++t) {
      std::string bt = "[" + spec.id + "," + std::to_string(t) + "]";
      int eps = lp.add_variable(name("eps" + bt), -kInf, kInf, 0);
      int eps_hi = lp.add_variable(name("epsU" + bt), 0, kInf, 0);
      lp.add_constraint(name("stat_x" + bt), 0, 0,
                        {{eps, 1.0}, {eps_hi, 1.0}, {ix.p_var[node][t], 1.0}});
      loc.push_back({eps, -spec.pmin[t]});
      loc.push_back({eps_hi, -spec.pmax[t]});
      loc.push_back({ix.p_var[node][t], -d.consumption[b][t]});
      for (size_t l = 0; l < spec.ladder[t].size(); ++l) {
        std::string btl = bt + "." + std::to_string(l);
        int s_hi = lp.add_variable(name("epsU" + btl), 0, kInf, 0);
        int s_lo = lp.add_variable(name("epsL" + btl), -kInf, 0, 0);
        lp.add_constraint(name("stat_xs" + btl), spec.ladder[t][l].value,
                          spec.ladder[t][l].value, {{s_hi, 1.0}, {s_lo, 1.0}, {eps, -1.0}});
        loc.push_back({s_hi, -spec.ladder[t][l].quantity});
      }
    }
    lp.add_constraint(name("loc[" + spec.id + "]"), -bid_value(m, b, d), kInf, std::move(loc));
  }

  for (size_t s = 0; s < m.sellers.size(); ++s) {
    const auto& spec = m.sellers[s];
    int node = m.node_index(spec.node);
    if (comp == Component::MWP) {
      int lam = lp.add_variable(name("lam[" + spec.id + "]"), 0, kInf, weight);
      out.seller.push_back(lam);
      std::vector<LinearTerm> row{{lam, 1.0}};
      for (int t = 0; t < T; ++t) row.push_back({ix.p_var[node][t], d.generation[s][t]});
      lp.add_constraint(name("mwp[" + spec.id + "]"), offer_cost(m, s, d, true), kInf,
                        std::move(row));
      continue;
    }
    int lam = lp.add_variable(name("lam[" + spec.id + "]"), -kInf, kInf, weight);
    out.seller.push_back(lam);
    std::vector<LinearTerm> loc{{lam, 1.0}};
    if (comp == Component::IP) {
      // Commitment is data here: bound-tightness duals enter scaled by u*.
      for (int t = 0; t < T; ++t) {
        std::string st = "[" + spec.id + "," + std::to_string(t) + "]";
        double u = d.commitment[s][t];
        int eps = lp.add_variable(name("eps" + st), -kInf, kInf, 0);
        int eps_lo = lp.add_variable(name("epsL" + st), -kInf, 0, 0);
        int eps_hi = lp.add_variable(name("epsU" + st), 0, kInf, 0);
        lp.add_constraint(
            name("stat_y" + st), 0, 0,
            {{eps, 1.0}, {eps_lo, 1.0}, {eps_hi, 1.0}, {ix.p_var[node][t], -1.0}});
        loc.push_back({eps_lo, -spec.pmin[t] * u});
        loc.push_back({eps_hi, -spec.pmax[t] * u});
        loc.push_back({ix.p_var[node][t], d.generation[s][t]});
        for (size_t l = 0; l < spec.ladder[t].size(); ++l) {
          std::string stl = st + "." + std::to_string(l);
          int s_hi = lp.add_variable(name("epsU" + stl), 0, kInf, 0);
          int s_lo = lp.add_variable(name("epsL" + stl), -kInf, 0, 0);
          lp.add_constraint(name("stat_ys" + stl), -spec.ladder[t][l].cost,
                            -spec.ladder[t][l].cost, {{s_hi, 1.0}, {s_lo, 1.0}, {eps, -1.0}});
          loc.push_back({s_hi, -spec.ladder[t][l].quantity * u});
        }
      }
      lp.add_constraint(name("loc[" + spec.id + "]"), offer_cost(m, s, d, false), kInf,
                        std::move(loc));
      continue;
    }
    // CH: commitment relaxed into [0,1]; u and start-up columns contribute
    // stationarity rows, and only the u<=1 duals reach the payout bound.
    int R = std::max(1, spec.min_uptime);
    std::vector<int> chi_lo(T, -1), chi_hi(T, -1), chi_hat(T, -1);
    for (int t = 1; t < T; ++t) {
      std::string st = "[" + spec.id + "," + std::to_string(t) + "]";
      chi_lo[t] = lp.add_variable(name("chiL" + st), -kInf, 0, 0);
      chi_hi[t] = lp.add_variable(name("chiU" + st), 0, kInf, 0);
      chi_hat[t] = lp.add_variable(name("chiHat" + st), -kInf, 0, 0);
    }
    std::vector<std::vector<LinearTerm>> stat_u(T);
    for (int t = 0; t < T; ++t) {
      std::string st = "[" + spec.id + "," + std::to_string(t) + "]";
      int eps = lp.add_variable(name("eps" + st), -kInf, kInf, 0);
      int eps_lo = lp.add_variable(name("epsL" + st), -kInf, 0, 0);
      int eps_hi = lp.add_variable(name("epsU" + st), 0, kInf, 0);
      int psi_hi = lp.add_variable(name("psiU" + st), 0, kInf, 0);
      int psi_lo = lp.add_variable(name("psiL" + st), -kInf, 0, 0);
      lp.add_constraint(
          name("stat_y" + st), 0, 0,
          {{eps, 1.0}, {eps_lo, 1.0}, {eps_hi, 1.0}, {ix.p_var[node][t], -1.0}});
      loc.push_back({psi_hi, -1.0});
      loc.push_back({ix.p_var[node][t], d.generation[s][t]});
      stat_u[t] = {{eps_lo, -spec.pmin[t]},
                   {eps_hi, -spec.pmax[t]},
                   {psi_hi, 1.0},
                   {psi_lo, 1.0}};
      for (size_t l = 0; l < spec.ladder[t].size(); ++l) {
        std::string stl = st + "." + std::to_string(l);
        int s_hi = lp.add_variable(name("epsU" + stl), 0, kInf, 0);
        int s_lo = lp.add_variable(name("epsL" + stl), -kInf, 0, 0);
        lp.add_constraint(name("stat_ys" + stl), -spec.ladder[t][l].cost,
                          -spec.ladder[t][l].cost, {{s_hi, 1.0}, {s_lo, 1.0}, {eps, -1.0}});
        stat_u[t].push_back({s_hi, -spec.ladder[t][l].quantity});
      }
      if (t >= 1) {
        stat_u[t].push_back({chi_lo[t], -1.0});
        stat_u[t].push_back({chi_hi[t], -1.0});
      }
      if (t + 1 < T) stat_u[t].push_back({chi_lo[t + 1], 1.0});
    }
    for (int t = 0; t < T; ++t)
      lp.add_constraint(name("stat_u[" + spec.id + "," + std::to_string(t) + "]"),
                        -spec.no_load_cost, -spec.no_load_cost, std::move(stat_u[t]));
    for (int t = 1; t < T; ++t) {
      std::vector<LinearTerm> row{{chi_hat[t], 1.0}, {chi_lo[t], 1.0}};
      for (int w = t; w < std::min(T, t + R); ++w) row.push_back({chi_hi[w], 1.0});
      lp.add_constraint(name("stat_phi[" + spec.id + "," + std::to_string(t) + "]"), 0, 0,
                        std::move(row));
    }
    lp.add_constraint(name("loc[" + spec.id + "]"), offer_cost(m, s, d, true), kInf,
                      std::move(loc));
  }

  out.line.resize(m.network.lines.size());
  for (size_t l = 0; l < m.network.lines.size(); ++l) {
    const auto& line = m.network.lines[l];
    std::string lid = line.from + "-" + line.to;
    out.line[l].resize(T);
    for (int t = 0; t < T; ++t) {
      std::string lt = "[" + lid + "," + std::to_string(t) + "]";
      if (comp == Component::MWP) {
        int lam = lp.add_variable(name("lam" + lt), 0, kInf, weight);
        out.line[l][t] = lam;
        lp.add_constraint(name("mwp" + lt), 0, kInf,
                          {{lam, 1.0}, {ix.gamma_var[l][t], d.flow[l][t]}});
        continue;
      }
      int lam = lp.add_variable(name("lam" + lt), -kInf, kInf, weight);
      out.line[l][t] = lam;
      int eps_hi = lp.add_variable(name("epsU" + lt), 0, kInf, 0);
      int eps_lo = lp.add_variable(name("epsL" + lt), -kInf, 0, 0);
      lp.add_constraint(name("stat_f" + lt), 0, 0,
                        {{ix.gamma_var[l][t], -1.0}, {eps_hi, 1.0}, {eps_lo, 1.0}});
      lp.add_constraint(name("loc" + lt), 0, kInf,
                        {{lam, 1.0},
                         {eps_hi, -line.fmax},
                         {eps_lo, -line.fmin},
                         {ix.gamma_var[l][t], d.flow[l][t]}});
    }
  }
  return out;
}

inline Built build_indexed(const market::MarketInstance& m, const dcopf::Dispatch& d,
                           const PricingRule& rule) {
  auto diags = market::validate(m);
  if (market::has_errors(diags)) {
    for (const auto& diag : diags)
      if (diag.severity == market::Severity::Error)
        throw ValidationError(diag.path + ": " + diag.message);
  }
  check_dispatch_shape(m, d);
  if (rule.kind == PricingRule::Kind::Scalarized)
    PricingRule::scalarized(rule.weights[0], rule.weights[1], rule.weights[2]);

  Built b;
  auto& lp = b.lp;
  auto& ix = b.index;
  lp.sense = linprog::Sense::Minimize;
  lp.name = "pricing:" + to_string(rule);
  const int T = m.periods;
  const int ref = m.node_index(m.network.reference);

  for (size_t v = 0; v < m.network.nodes.size(); ++v) {
    ix.p_var.emplace_back();
    for (int t = 0; t < T; ++t)
      ix.p_var.back().push_back(lp.add_variable(
          "p[" + m.network.nodes[v] + "," + std::to_string(t) + "]", -kInf, kInf, 0));
  }
  for (const auto& line : m.network.lines) {
    ix.gamma_var.emplace_back();
    for (int t = 0; t < T; ++t)
      ix.gamma_var.back().push_back(
          lp.add_variable("gamma[" + line.from + "-" + line.to + "," + std::to_string(t) + "]",
                          -kInf, kInf, 0));
  }
  for (int t = 0; t < T; ++t)
    ix.r_var.push_back(lp.add_variable("r[" + std::to_string(t) + "]", -kInf, kInf, 0));

  // Price consistency at every node: the phase-angle column of the welfare
  // program prices out exactly, so angle operators never owe or collect.
  for (size_t v = 0; v < m.network.nodes.size(); ++v) {
    for (int t = 0; t < T; ++t) {
      std::vector<LinearTerm> row;
      if (static_cast<int>(v) == ref) row.push_back({ix.r_var[t], 1.0});
      for (size_t l = 0; l < m.network.lines.size(); ++l) {
        const auto& line = m.network.lines[l];
        int from = m.node_index(line.from), to = m.node_index(line.to);
        if (from == static_cast<int>(v)) {
          row.push_back({ix.p_var[from][t], line.susceptance});
          row.push_back({ix.p_var[to][t], -line.susceptance});
          row.push_back({ix.gamma_var[l][t], line.susceptance});
        } else if (to == static_cast<int>(v)) {
          row.push_back({ix.p_var[to][t], line.susceptance});
          row.push_back({ix.p_var[from][t], -line.susceptance});
          row.push_back({ix.gamma_var[l][t], -line.susceptance});
        }
      }
      lp.add_constraint("stat_alpha[" + m.network.nodes[v] + "," + std::to_string(t) + "]", 0,
                        0, std::move(row));
    }
  }

  // Component emission. Scalarized shares (p, gamma, r) across components and
  // duplicates the payout/auxiliary blocks; a unit weight vector therefore
  // builds the identical LP as the corresponding pure rule.
  std::vector<std::pair<Component, double>> comps;
  switch (rule.kind) {
    case PricingRule::Kind::CH: comps = {{Component::CH, 1.0}}; break;
    case PricingRule::Kind::IP:
    case PricingRule::Kind::Join: comps = {{Component::IP, 1.0}}; break;
    case PricingRule::Kind::MinMWP: comps = {{Component::MWP, 1.0}}; break;
    case PricingRule::Kind::Scalarized:
      if (rule.weights[0] > 0) comps.push_back({Component::CH, rule.weights[0]});
      if (rule.weights[1] > 0) comps.push_back({Component::IP, rule.weights[1]});
      if (rule.weights[2] > 0) comps.push_back({Component::MWP, rule.weights[2]});
      break;
  }

  std::vector<EmittedLambdas> emitted;
  for (const auto& [comp, weight] : comps)
    emitted.push_back(emit_component(lp, ix, m, d, comp, weight));

  if (rule.kind == PricingRule::Kind::Join) {
    // One extra row per buyer and seller turns each payout into
    // max{local loss, make-whole need}; line payouts already dominate their
    // make-whole floor because zero flow is always feasible.
    const auto& lam = emitted.front();
    for (size_t b = 0; b < m.buyers.size(); ++b) {
      const auto& spec = m.buyers[b];
      std::vector<LinearTerm> row{{lam.buyer[b], 1.0}};
      double floor = 0;
      if (!market::purely_inelastic(spec)) {
        int node = m.node_index(spec.node);
        for (int t = 0; t < T; ++t) row.push_back({ix.p_var[node][t], -d.consumption[b][t]});
        floor = -bid_value(m, b, d);
      }
      lp.add_constraint("join[" + spec.id + "]", floor, kInf, std::move(row));
    }
    for (size_t s = 0; s < m.sellers.size(); ++s) {
      int node = m.node_index(m.sellers[s].node);
      std::vector<LinearTerm> row{{lam.seller[s], 1.0}};
      for (int t = 0; t < T; ++t) row.push_back({ix.p_var[node][t], d.generation[s][t]});
      lp.add_constraint("join[" + m.sellers[s].id + "]", offer_cost(m, s, d, true), kInf,
                        std::move(row));
    }
  }

  // Payout bookkeeping for result extraction.
  for (size_t b = 0; b < m.buyers.size(); ++b) {
    std::vector<LambdaRef> refs;
    for (size_t c = 0; c < comps.size(); ++c) refs.push_back({emitted[c].buyer[b], comps[c].second});
    ix.lambdas.emplace_back(m.buyers[b].id, std::move(refs));
  }
  for (size_t s = 0; s < m.sellers.size(); ++s) {
    std::vector<LambdaRef> refs;
    for (size_t c = 0; c < comps.size(); ++c) refs.push_back({emitted[c].seller[s], comps[c].second});
    ix.lambdas.emplace_back(m.sellers[s].id, std::move(refs));
  }
  for (size_t l = 0; l < m.network.lines.size(); ++l) {
    std::vector<LambdaRef> refs;
    for (size_t c = 0; c < comps.size(); ++c)
      for (int t = 0; t < T; ++t) refs.push_back({emitted[c].line[l][t], comps[c].second});
    ix.lambdas.emplace_back(m.network.lines[l].from + "-" + m.network.lines[l].to,
                            std::move(refs));
  }
  return b;
}

}  // namespace detail

inline linprog::LpModel build_pricing_lp(const market::MarketInstance& m,
                                         const dcopf::Dispatch& d, const PricingRule& rule) {
  return detail::build_indexed(m, d, rule).lp;
}

inline PricingResult price(const market::MarketInstance& m, const dcopf::Dispatch& d,
                           const PricingRule& rule, const linprog::SolverConfig& cfg = {}) {
  detail::Built built = detail::build_indexed(m, d, rule);
  auto sol = linprog::solve_lp(built.lp, cfg);
  if (sol.status == linprog::SolveStatus::Unbounded)
    throw NumericError(built.lp.name + " is unbounded — model construction bug");
  if (sol.status != linprog::SolveStatus::Optimal)
    throw NumericError(built.lp.name + " did not solve: " +
                       std::string(linprog::to_string(sol.status)) +
                       (sol.message.empty() ? "" : " (" + sol.message + ")"));
  long iterations = sol.iterations;

  if (rule.kind == PricingRule::Kind::MinMWP) {
    // The make-whole optimum is famously non-unique (zero-flow lines decouple
    // whole subnetworks). Stage two pins the reported point deterministically:
    // cap total payouts at the optimum and return the price system of least
    // total magnitude, min sum |p|, via the usual positive/negative split.
    linprog::LpModel stage = built.lp;
    for (auto& v : stage.vars) v.obj = 0;
    std::vector<linprog::LinearTerm> cap;
    for (const auto& [id, refs] : built.index.lambdas)
      for (const auto& ref : refs) cap.push_back({ref.var, ref.weight});
    stage.add_constraint("payout_cap", -kInf, sol.objective + 1e-7, std::move(cap));
    for (size_t v = 0; v < built.index.p_var.size(); ++v)
      for (size_t t = 0; t < built.index.p_var[v].size(); ++t) {
        std::string vt = "[" + std::to_string(v) + "," + std::to_string(t) + "]";
        int pos = stage.add_variable("tie_pos" + vt, 0, kInf, 1);
        int neg = stage.add_variable("tie_neg" + vt, 0, kInf, 1);
        stage.add_constraint("tie_split" + vt, 0, 0,
                             {{built.index.p_var[v][t], 1.0}, {pos, -1.0}, {neg, 1.0}});
      }
    auto tie = linprog::solve_lp(stage, cfg);
    if (tie.status == linprog::SolveStatus::Optimal) {
      sol.x = tie.x;
      iterations += tie.iterations;
      // The tie-break constrains total payouts only from above, and the
      // solver enforces rows only within its feasibility tolerance, so a
      // payout variable can sit either above the smallest value its rows
      // allow (cap slack) or below it (tolerance slack taken out of the
      // prices). Re-anchor each one to its row floor at the returned prices;
      // every payout variable sits alone (coefficient +1) in covering rows,
      // so the floor is exactly the payout the prices make necessary.
      std::vector<char> is_payout(built.lp.vars.size(), 0);
      for (const auto& [id, refs] : built.index.lambdas)
        for (const auto& ref : refs) is_payout[ref.var] = 1;
      std::vector<double> floor_val(built.lp.vars.size(), 0.0);
      std::vector<char> pressable = is_payout;
      for (size_t j = 0; j < built.lp.vars.size(); ++j)
        if (is_payout[j]) floor_val[j] = built.lp.vars[j].lb;
      for (const auto& row : built.lp.rows) {
        int lam = -1, lam_count = 0;
        double lam_coef = 0, others = 0;
        for (const auto& t : row.terms) {
          if (is_payout[t.var]) {
            ++lam_count;
            lam = t.var;
            lam_coef = t.coef;
          } else {
            others += t.coef * sol.x[t.var];
          }
        }
        if (lam_count == 0) continue;
        if (lam_count > 1 || (std::isfinite(row.lb) && std::isfinite(row.ub))) {
          for (const auto& t : row.terms)
            if (is_payout[t.var]) pressable[t.var] = 0;
          continue;
        }
        if (lam_coef > 0 && std::isfinite(row.lb))
          floor_val[lam] = std::max(floor_val[lam], (row.lb - others) / lam_coef);
        else if (lam_coef < 0 && std::isfinite(row.ub))
          floor_val[lam] = std::max(floor_val[lam], (row.ub - others) / lam_coef);
      }
      for (size_t j = 0; j < built.lp.vars.size(); ++j)
        if (is_payout[j] && pressable[j]) sol.x[j] = floor_val[j];
    }
  }

  PricingResult out;
  out.rule = rule;
  out.iterations = iterations;
  out.status = "optimal";
  const auto& ix = built.index;
  for (const auto& per_node : ix.p_var) {
    out.prices.p.emplace_back();
    for (int var : per_node) out.prices.p.back().push_back(sol.x[var]);
  }
  for (const auto& per_line : ix.gamma_var) {
    out.prices.gamma.emplace_back();
    for (int var : per_line) out.prices.gamma.back().push_back(sol.x[var]);
  }
  for (int var : ix.r_var) out.prices.r.push_back(sol.x[var]);
  for (const auto& [id, refs] : ix.lambdas) {
    double value = 0;
    for (const auto& ref : refs) value += ref.weight * sol.x[ref.var];
    out.lambdas.push_back({id, value});
    out.objective += value;
  }
  return out;
}

// Reads prices straight off the welfare program: balance-row duals of the
// commitment relaxation (CH) or of the LP with commitment pinned to the
// dispatch (IP). Payouts are then audited independently so the two routes
// cross-validate.
inline PricingResult price_via_primal_duals(const market::MarketInstance& m,
                                            const dcopf::Dispatch& d, const PricingRule& rule,
                                            const linprog::SolverConfig& cfg = {}) {
  if (rule.kind != PricingRule::Kind::CH && rule.kind != PricingRule::Kind::IP)
    throw ValidationError("the primal-dual route supports only the relaxation-based rules");
  detail::check_dispatch_shape(m, d);
  auto built = dcopf::build_dcopf_indexed(m);
  linprog::LpModel lp = built.lp;
  if (rule.kind == PricingRule::Kind::IP) {
    std::map<int, int> fixes;
    for (size_t s = 0; s < m.sellers.size(); ++s)
      for (int t = 0; t < m.periods; ++t)
        if (built.index.u_var[s][t] >= 0) fixes[built.index.u_var[s][t]] = d.commitment[s][t];
    lp = linprog::fix_binaries(lp, fixes);
  }
  auto sol = linprog::solve_lp(lp, cfg);
  if (sol.status != linprog::SolveStatus::Optimal)
    throw NumericError("welfare relaxation did not solve: " +
                       std::string(linprog::to_string(sol.status)));

  PricingResult out;
  out.rule = rule;
  out.iterations = sol.iterations;
  out.status = "optimal";
  for (size_t v = 0; v < m.network.nodes.size(); ++v) {
    out.prices.p.emplace_back();
    for (int t = 0; t < m.periods; ++t)
      out.prices.p.back().push_back(sol.row_duals[built.index.balance_row[v][t]]);
  }
  for (size_t l = 0; l < m.network.lines.size(); ++l) {
    out.prices.gamma.emplace_back();
    for (int t = 0; t < m.periods; ++t)
      out.prices.gamma.back().push_back(sol.row_duals[built.index.flow_row[l][t]]);
  }
  for (int t = 0; t < m.periods; ++t)
    out.prices.r.push_back(sol.row_duals[built.index.pin_row[t]]);

  auto rep = metrics::compute_locs(m, d, out.prices);
  bool global = rule.kind == PricingRule::Kind::CH;
  for (const auto& e : rep.entries)
    out.lambdas.push_back({e.id, global ? e.gloc : e.lloc});
  out.objective = global ? rep.total_gloc : rep.total_lloc;
  return out;
}

struct SweepPoint {
  std::array<double, 3> weights{0, 0, 0};  // CH, IP, MWP
  bool ok = false;
  std::string message;
  PriceSystem prices;
  double gloc = 0, lloc = 0, mwp = 0;  // audited totals, not LP values
};

inline std::vector<SweepPoint> pareto_sweep(const market::MarketInstance& m,
                                            const dcopf::Dispatch& d, int grid_resolution,
                                            const linprog::SolverConfig& cfg = {}) {
  if (grid_resolution < 1)
    throw ValidationError("grid resolution must be a positive integer");
  const double n = grid_resolution;
  std::vector<SweepPoint> out;
  for (int i = 0; i <= grid_resolution; ++i) {
    for (int j = 0; j + i <= grid_resolution; ++j) {
      int k = grid_resolution - i - j;
      SweepPoint pt;
      pt.weights = {i / n, j / n, k / n};
      try {
        auto res = price(m, d, PricingRule::scalarized(pt.weights[0], pt.weights[1],
                                                       pt.weights[2]), cfg);
        auto rep = metrics::compute_locs(m, d, res.prices);
        pt.prices = std::move(res.prices);
        pt.gloc = rep.total_gloc;
        pt.lloc = rep.total_lloc;
        pt.mwp = rep.total_mwp;
        pt.ok = true;
      } catch (const Error& e) {
        pt.message = e.what();
      }
      out.push_back(std::move(pt));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SweepPoint& a, const SweepPoint& b) { return a.weights < b.weights; });
  return out;
}

inline std::string sweep_to_csv(const std::vector<SweepPoint>& points) {
  std::string out = "wCH,wIP,wMWP,gloc,lloc,mwp\n";
  char buf[200];
  for (const auto& pt : points) {
    if (!pt.ok) continue;
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", pt.weights[0],
                  pt.weights[1], pt.weights[2], pt.gloc, pt.lloc, pt.mwp);
    out += buf;
  }
  return out;
}

inline std::string to_json(const market::MarketInstance& m, const PricingResult& r) {
  nlohmann::ordered_json doc;
  switch (r.rule.kind) {
    case PricingRule::Kind::CH: doc["rule"] = "ch"; break;
    case PricingRule::Kind::IP: doc["rule"] = "ip"; break;
    case PricingRule::Kind::MinMWP: doc["rule"] = "minmwp"; break;
    case PricingRule::Kind::Join: doc["rule"] = "join"; break;
    case PricingRule::Kind::Scalarized:
      doc["rule"] = "scalarized";
      doc["weights"] = r.rule.weights;
      break;
  }
  doc["objective"] = r.objective;
  doc["prices"]["p"] = nlohmann::ordered_json::object();
  for (size_t v = 0; v < m.network.nodes.size(); ++v)
    doc["prices"]["p"][m.network.nodes[v]] = r.prices.p[v];
  doc["prices"]["gamma"] = nlohmann::ordered_json::object();
  for (size_t l = 0; l < m.network.lines.size(); ++l)
    doc["prices"]["gamma"][m.network.lines[l].from + "-" + m.network.lines[l].to] =
        r.prices.gamma[l];
  doc["prices"]["r"] = r.prices.r;
  doc["lambda"] = nlohmann::ordered_json::object();
  for (const auto& e : r.lambdas) doc["lambda"][e.id] = e.value;
  doc["diagnostics"] = {{"iterations", r.iterations}, {"status", r.status}};
  return doc.dump(2);
}

}  // namespace nodal::pricing
