#pragma once

// Self-contained linear and mixed-binary programming:
//   * bounded-variable two-phase primal simplex with exact row duals,
//   * deterministic branch-and-bound on binary variables,
//   * a debug dump in the conventional LP text layout.
//
// The simplex works on the equality form "Ax - s = 0" with one slack per row,
// so every bound (variable or row) is a simple column bound. The basis is
// factorized with a sparse LU and kept current with product-form eta updates;
// it is refactorized on a fixed cadence for numerical hygiene. All pivot
// choices (pricing, ratio-test tie-breaks, branching) are deterministic, so
// identical inputs reproduce identical iteration sequences bit for bit.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nodal/common.hpp"

namespace nodal::linprog {

enum class Sense { Minimize, Maximize };
enum class VarKind { Continuous, Binary };
enum class SolveStatus { Optimal, Infeasible, Unbounded, Limit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    default: return "limit";
  }
}

struct Variable {
  std::string name;
  double lb = 0;
  double ub = kInf;
  double obj = 0;
  VarKind kind = VarKind::Continuous;
};

struct LinearTerm {
  int var = 0;
  double coef = 0;
};

struct Constraint {
  std::string name;
  double lb = -kInf;
  double ub = kInf;
  std::vector<LinearTerm> terms;
};

struct LpModel {
  Sense sense = Sense::Minimize;
  std::string name = "model";
  std::vector<Variable> vars;
  std::vector<Constraint> rows;

  int add_variable(std::string nm, double lb, double ub, double obj,
                   VarKind kind = VarKind::Continuous) {
    vars.push_back({std::move(nm), lb, ub, obj, kind});
    return static_cast<int>(vars.size()) - 1;
  }

  int add_constraint(std::string nm, double lb, double ub, std::vector<LinearTerm> terms) {
    rows.push_back({std::move(nm), lb, ub, std::move(terms)});
    return static_cast<int>(rows.size()) - 1;
  }

  std::string dump() const;
};

struct SolverConfig {
  double feasibility_tol = 1e-7;   // primal bound violation allowance
  double optimality_tol = 1e-6;    // duality / certificate tolerance
  double integrality_tol = 1e-6;   // how close a binary must sit to 0 or 1
  long max_simplex_iterations = 2000000;
  long max_branch_nodes = 200000;
  // Identifier of the (only) deterministic pivot policy: Dantzig pricing with
  // lowest-index ties, Bland fallback on long degenerate streaks.
  std::string pivot_policy = "dantzig-bland-v1";
};

struct LpSolution {
  SolveStatus status = SolveStatus::Limit;
  std::vector<double> x;              // one entry per variable
  std::vector<double> row_duals;      // one entry per row (LP solves only)
  std::vector<double> reduced_costs;  // one entry per variable (LP solves only)
  double objective = 0;
  long iterations = 0;  // simplex iterations, summed over all LP solves
  long nodes = 0;       // branch-and-bound nodes (1 for plain LP solves)
  std::string message;
};

namespace detail {

constexpr double kPivotTol = 1e-9;    // smallest usable pivot element
constexpr double kDropTol = 1e-12;    // entries below this vanish from etas
constexpr double kEnterTol = 1e-8;    // reduced-cost threshold for entering
constexpr int kRefactorEvery = 64;    // eta count between refactorizations
constexpr int kDegenerateStreak = 100;  // pivots before Bland kicks in

enum class VStat : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

// One product-form update: B_new = B_old * E where E is the identity with
// column `r` replaced by the pivot column w = B_old^{-1} A_q.
struct Eta {
  int r = 0;
  double wr = 1;  // pivot element w[r]
  std::vector<std::pair<int, double>> w;  // off-pivot entries of w
};

// A basis snapshot: status of every column (structural then slack) plus the
// basic column per row. Lets a related solve (same rows/columns, different
// bounds) resume from an earlier optimal basis instead of the all-slack one.
struct Basis {
  std::vector<VStat> vstat;
  std::vector<int> basic;
  bool empty() const { return vstat.empty(); }
};

class Simplex {
 public:
  Simplex(const LpModel& model, const SolverConfig& cfg,
          const std::vector<double>* lb_override, const std::vector<double>* ub_override)
      : model_(model), cfg_(cfg) {
    n_ = static_cast<int>(model.vars.size());
    m_ = static_cast<int>(model.rows.size());
    total_ = n_ + m_;
    sflip_ = (model.sense == Sense::Maximize) ? -1.0 : 1.0;

    cols_.resize(total_);
    cost_.assign(total_, 0.0);
    lb_.assign(total_, 0.0);
    ub_.assign(total_, 0.0);
    ray_banned_.assign(total_, 0);

    for (int j = 0; j < n_; ++j) {
      const auto& v = model.vars[j];
      double lb = lb_override ? (*lb_override)[j] : v.lb;
      double ub = ub_override ? (*ub_override)[j] : v.ub;
      if (v.kind == VarKind::Binary) {
        lb = std::max(lb, 0.0);
        ub = std::min(ub, 1.0);
      }
      lb_[j] = lb;
      ub_[j] = ub;
      cost_[j] = sflip_ * v.obj;
      if (std::isnan(lb) || std::isnan(ub) || !std::isfinite(v.obj))
        throw ValidationError("variable " + v.name + " has a non-finite bound or objective");
    }
    // Column-wise copy of the row data, duplicate terms aggregated.
    std::vector<std::map<int, double>> sums(n_);
    for (int i = 0; i < m_; ++i) {
      const auto& r = model.rows[i];
      if (std::isnan(r.lb) || std::isnan(r.ub))
        throw ValidationError("row " + r.name + " has a NaN bound");
      for (const auto& t : r.terms) {
        if (t.var < 0 || t.var >= n_)
          throw ValidationError("row " + r.name + " references an unknown variable");
        if (!std::isfinite(t.coef))
          throw ValidationError("row " + r.name + " has a non-finite coefficient");
        sums[t.var][i] += t.coef;
      }
      lb_[n_ + i] = r.lb;
      ub_[n_ + i] = r.ub;
    }
    for (int j = 0; j < n_; ++j) {
      cols_[j].assign(sums[j].begin(), sums[j].end());
      std::erase_if(cols_[j], [](const auto& e) { return e.second == 0.0; });
    }
    for (int i = 0; i < m_; ++i) cols_[n_ + i] = {{i, -1.0}};
  }

  // Adopts an earlier basis. Nonbasic statuses are re-anchored to the current
  // bounds; a malformed or singular snapshot falls back to the cold start.
  void load_basis(const Basis& b) {
    if (static_cast<int>(b.vstat.size()) != total_ || static_cast<int>(b.basic.size()) != m_)
      return;
    std::vector<char> is_basic(total_, 0);
    for (int k = 0; k < m_; ++k) {
      int j = b.basic[k];
      if (j < 0 || j >= total_ || b.vstat[j] != VStat::Basic || is_basic[j]) return;
      is_basic[j] = 1;
    }
    vstat_ = b.vstat;
    basic_ = b.basic;
    xval_.assign(total_, 0.0);
    for (int j = 0; j < total_; ++j) {
      switch (vstat_[j]) {
        case VStat::Basic:
          break;
        case VStat::AtLower:
          if (std::isfinite(lb_[j])) {
            xval_[j] = lb_[j];
          } else if (std::isfinite(ub_[j])) {
            vstat_[j] = VStat::AtUpper;
            xval_[j] = ub_[j];
          } else {
            vstat_[j] = VStat::FreeZero;
          }
          break;
        case VStat::AtUpper:
          if (std::isfinite(ub_[j])) {
            xval_[j] = ub_[j];
          } else if (std::isfinite(lb_[j])) {
            vstat_[j] = VStat::AtLower;
            xval_[j] = lb_[j];
          } else {
            vstat_[j] = VStat::FreeZero;
          }
          break;
        case VStat::FreeZero:
          break;
      }
    }
    try {
      refactor();
      warm_ = true;
    } catch (const NumericError&) {
      warm_ = false;  // singular snapshot; run() will cold-start
    }
  }

  Basis save_basis() const { return Basis{vstat_, basic_}; }

  LpSolution run() {
    LpSolution out;
    out.x.assign(n_, 0.0);
    out.row_duals.assign(m_, 0.0);
    out.reduced_costs.assign(n_, 0.0);
    out.nodes = 1;

    for (int j = 0; j < total_; ++j) {
      if (lb_[j] > ub_[j] + cfg_.feasibility_tol * (1 + std::fabs(lb_[j]))) {
        out.status = SolveStatus::Infeasible;
        out.message = "empty bound interval on " + col_name(j);
        return out;
      }
    }

    if (!warm_) init_basis();

    bool feasible = false;
    SolveStatus status = SolveStatus::Limit;
    int restarts = 0;
    while (iters_ < cfg_.max_simplex_iterations) {
      try {
        if (!feasible) {
          SolveStatus s = iterate_phase(/*phase1=*/true);
          if (s == SolveStatus::Optimal) {
            // "No improving column" while still violated means infeasible —
            // unless columns were retired as numeric noise along the way, in
            // which case the verdict is suspect: rebuild and try again.
            if (!primal_feasible()) {
              if (ray_ban_used_ && restarts < 2) {
                ++restarts;
                init_basis();
                bland_ = restarts >= 2;
                degenerate_streak_ = 0;
                continue;
              }
              status = SolveStatus::Infeasible;
              break;
            }
            feasible = true;
            bland_ = false;
            degenerate_streak_ = 0;
            ray_banned_.assign(total_, 0);  // phase-2 pricing starts clean
            continue;
          }
          if (s == SolveStatus::Limit) break;
          status = s;  // numeric trouble surfaces as exceptions, not here
          break;
        }
        SolveStatus s = iterate_phase(/*phase1=*/false);
        if (s == SolveStatus::Optimal) {
          if (perturbed_) {
            // The perturbed optimum is a good basis, not a good answer:
            // restore the true bounds and re-run both phases from it.
            restore_bounds();
            refactor();
            feasible = false;
            continue;
          }
          // Trust but verify: residual drift can accumulate through the etas.
          refactor();
          if (!primal_feasible() && ++repairs_ <= 3) {
            feasible = false;
            continue;
          }
          status = SolveStatus::Optimal;
          break;
        }
        if (s == SolveStatus::Unbounded) {
          status = SolveStatus::Unbounded;
          break;
        }
        if (s == SolveStatus::Limit) break;
      } catch (const NumericError&) {
        // A numerically dependent column slipped into the basis and the
        // refactorization rejected it. Rebuild from the all-slack basis and
        // re-run; the second retry pivots by Bland's rule for safety.
        if (std::getenv("NODAL_LP_DEBUG"))
          std::fprintf(stderr, "[lp] restart %d at iter %ld (feasible=%d)\n", restarts + 1,
                       iters_, int(feasible));
        if (++restarts > 2) throw;
        perturb_bounds();  // break the degeneracy that produced the noise pivot
        init_basis();
        feasible = false;
        bland_ = restarts >= 2;
        degenerate_streak_ = 0;
      }
    }

    out.iterations = iters_;
    out.status = status;
    extract(out);
    if (status == SolveStatus::Limit && out.message.empty())
      out.message = "simplex iteration limit reached";
    return out;
  }

 private:
  const LpModel& model_;
  const SolverConfig& cfg_;
  int n_ = 0, m_ = 0, total_ = 0;
  double sflip_ = 1.0;

  std::vector<std::vector<std::pair<int, double>>> cols_;  // row index, coef
  std::vector<double> cost_, lb_, ub_;
  std::vector<double> xval_;
  std::vector<VStat> vstat_;
  std::vector<int> basic_;  // basis column per row position

  // mutable because Eigen's adjoint() accessor is (harmlessly) non-const.
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  std::vector<Eta> etas_;
  long iters_ = 0;
  int repairs_ = 0;
  int degenerate_streak_ = 0;
  bool bland_ = false;
  bool warm_ = false;
  std::vector<char> ray_banned_;  // columns retired for sub-tolerance directions
  bool ray_ban_used_ = false;
  bool perturbed_ = false;
  std::vector<double> true_lb_, true_ub_;  // bounds before anti-degeneracy expansion

  std::string col_name(int j) const {
    return j < n_ ? model_.vars[j].name : ("slack(" + model_.rows[j - n_].name + ")");
  }

  double feas_eps(int j) const {
    double scale = 1.0;
    if (std::isfinite(lb_[j])) scale = std::max(scale, std::fabs(lb_[j]));
    if (std::isfinite(ub_[j])) scale = std::max(scale, std::fabs(ub_[j]));
    return cfg_.feasibility_tol * scale;
  }

  bool primal_feasible() const {
    for (int k = 0; k < m_; ++k) {
      int b = basic_[k];
      double eps = feas_eps(b);
      if (xval_[b] < lb_[b] - eps || xval_[b] > ub_[b] + eps) return false;
    }
    return true;
  }

  // Massive degeneracy (many basics pinned at identical bounds) makes the
  // ratio test pivot on noise; expanding every non-fixed bound by a tiny,
  // distinct, deterministic offset breaks the ties. The caller re-optimizes
  // on the true bounds afterwards, so results are unaffected.
  void perturb_bounds() {
    if (perturbed_) return;
    true_lb_ = lb_;
    true_ub_ = ub_;
    for (int j = 0; j < total_; ++j) {
      if (lb_[j] == ub_[j]) continue;  // keep equalities exact
      double frac = ((static_cast<unsigned>(j) * 2654435761u) >> 9) * (1.0 / (1u << 23));
      double delta = (1e-8 + 9e-8 * frac);
      if (std::isfinite(lb_[j])) lb_[j] -= delta * (1 + std::fabs(lb_[j]));
      if (std::isfinite(ub_[j])) ub_[j] += delta * (1 + std::fabs(ub_[j]));
    }
    perturbed_ = true;
  }

  void restore_bounds() {
    if (!perturbed_) return;
    lb_ = std::move(true_lb_);
    ub_ = std::move(true_ub_);
    perturbed_ = false;
    // Re-anchor nonbasic variables to the true bounds.
    for (int j = 0; j < total_; ++j) {
      if (vstat_[j] == VStat::AtLower) xval_[j] = lb_[j];
      else if (vstat_[j] == VStat::AtUpper) xval_[j] = ub_[j];
    }
  }

  void init_basis() {
    xval_.assign(total_, 0.0);
    vstat_.assign(total_, VStat::AtLower);
    ray_banned_.assign(total_, 0);
    ray_ban_used_ = false;
    basic_.resize(m_);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lb_[j])) {
        vstat_[j] = VStat::AtLower;
        xval_[j] = lb_[j];
      } else if (std::isfinite(ub_[j])) {
        vstat_[j] = VStat::AtUpper;
        xval_[j] = ub_[j];
      } else {
        vstat_[j] = VStat::FreeZero;
        xval_[j] = 0.0;
      }
    }
    for (int i = 0; i < m_; ++i) {
      basic_[i] = n_ + i;
      vstat_[n_ + i] = VStat::Basic;
    }
    refactor();
  }

  // Rebuilds the LU factorization of the current basis and refreshes the
  // basic values from the nonbasic ones.
  void refactor() {
    if (m_ > 0) {
      std::vector<Eigen::Triplet<double>> trip;
      for (int k = 0; k < m_; ++k)
        for (const auto& [i, a] : cols_[basic_[k]]) trip.emplace_back(i, k, a);
      Eigen::SparseMatrix<double> B(m_, m_);
      B.setFromTriplets(trip.begin(), trip.end());
      lu_.compute(B);
      if (lu_.info() != Eigen::Success) {
        if (std::getenv("NODAL_LP_DEBUG"))
          std::fprintf(stderr, "[lp] singular refactor at iter %ld (m=%d, etas=%zu)\n", iters_,
                       m_, etas_.size());
        throw NumericError("singular basis: LU factorization failed");
      }
    }
    etas_.clear();

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < total_; ++j) {
      if (vstat_[j] == VStat::Basic || xval_[j] == 0.0) continue;
      for (const auto& [i, a] : cols_[j]) rhs(i) -= a * xval_[j];
    }
    Eigen::VectorXd xb = ftran(rhs);
    for (int k = 0; k < m_; ++k) xval_[basic_[k]] = xb(k);
  }

  Eigen::VectorXd ftran(const Eigen::VectorXd& v) const {
    if (m_ == 0) return v;
    Eigen::VectorXd x = lu_.solve(v);
    for (const auto& e : etas_) {
      double xr = x(e.r) / e.wr;
      if (xr != 0.0)
        for (const auto& [i, wi] : e.w) x(i) -= wi * xr;
      x(e.r) = xr;
    }
    return x;
  }

  Eigen::VectorXd btran(const Eigen::VectorXd& v) const {
    if (m_ == 0) return v;
    Eigen::VectorXd y = v;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = y(it->r);
      for (const auto& [i, wi] : it->w) acc -= wi * y(i);
      y(it->r) = acc / it->wr;
    }
    return lu_.adjoint().solve(y);
  }

  // One full phase of the simplex. Returns Optimal when no improving column
  // remains (for phase 1 that means "violation can no longer decrease").
  SolveStatus iterate_phase(bool phase1) {
    while (iters_ < cfg_.max_simplex_iterations) {
      // Phase-dependent basic costs: in phase 1 only bound-violating basics
      // carry (unit) cost, pushing them back into their interval.
      Eigen::VectorXd cb = Eigen::VectorXd::Zero(m_);
      bool any_violation = false;
      for (int k = 0; k < m_; ++k) {
        int b = basic_[k];
        double eps = feas_eps(b);
        if (phase1) {
          if (xval_[b] < lb_[b] - eps) {
            cb(k) = -1;
            any_violation = true;
          } else if (xval_[b] > ub_[b] + eps) {
            cb(k) = 1;
            any_violation = true;
          }
        } else {
          cb(k) = cost_[b];
        }
      }
      if (phase1 && !any_violation) return SolveStatus::Optimal;

      Eigen::VectorXd y = btran(cb);

      // Pricing: Dantzig by |reduced cost| with lowest-index ties, or plain
      // Bland (first eligible) while breaking a degenerate streak.
      int q = -1;
      double best = kEnterTol;
      int dir = 0;
      for (int j = 0; j < total_; ++j) {
        VStat st = vstat_[j];
        if (st == VStat::Basic) continue;
        if (lb_[j] == ub_[j]) continue;  // fixed: never enters
        if (ray_banned_[j]) continue;    // retired as numerically inert
        double cj = phase1 ? 0.0 : cost_[j];
        double dj = cj;
        for (const auto& [i, a] : cols_[j]) dj -= y(i) * a;
        int want = 0;
        if (st == VStat::AtLower && dj < -best) want = +1;
        else if (st == VStat::AtUpper && dj > best) want = -1;
        else if (st == VStat::FreeZero && std::fabs(dj) > best) want = dj < 0 ? +1 : -1;
        if (want != 0) {
          q = j;
          dir = want;
          if (bland_) break;
          best = std::fabs(dj);
        }
      }
      if (q < 0) return SolveStatus::Optimal;

      Eigen::VectorXd col = Eigen::VectorXd::Zero(m_);
      for (const auto& [i, a] : cols_[q]) col(i) = a;
      Eigen::VectorXd w = ftran(col);

      // Ratio test: the entering column moves by t*dir; each basic moves by
      // -dir*t*w[k]. Feasible basics block at their near bound; in phase 1 a
      // violating basic blocks exactly where it regains feasibility.
      double t_bound = (std::isfinite(lb_[q]) && std::isfinite(ub_[q])) ? ub_[q] - lb_[q] : kInf;
      double t_min = kInf;
      int leave = -1;
      double leave_piv = 0;
      double leave_to = 0;  // bound the leaving variable lands on

      // Exact blocking length of row k, or kInf when nothing blocks there.
      auto exact_block = [&](int k, double wk, double* to) {
        int b = basic_[k];
        double rate = -dir * wk;  // d x_b / d t
        double eps = feas_eps(b);
        double t = kInf;
        if (phase1 && xval_[b] < lb_[b] - eps) {
          if (rate > 0) { t = (lb_[b] - xval_[b]) / rate; *to = lb_[b]; }
        } else if (phase1 && xval_[b] > ub_[b] + eps) {
          if (rate < 0) { t = (ub_[b] - xval_[b]) / rate; *to = ub_[b]; }
        } else if (rate > 0) {
          if (std::isfinite(ub_[b])) { t = (ub_[b] - xval_[b]) / rate; *to = ub_[b]; }
        } else {
          if (std::isfinite(lb_[b])) { t = (lb_[b] - xval_[b]) / rate; *to = lb_[b]; }
        }
        return t == kInf ? t : std::max(t, 0.0);
      };

      if (!bland_) {
        // Two-pass (Harris) test. Pass 1: the most permissive blocking length
        // with every bound relaxed by its feasibility tolerance. Pass 2: the
        // numerically safest (largest) pivot among rows whose exact blocking
        // length fits inside it. Any basic bound crossed by the chosen step
        // overshoots by at most its own feasibility tolerance.
        double t_relaxed = kInf;
        for (int k = 0; k < m_; ++k) {
          double wk = w(k);
          if (std::fabs(wk) <= kPivotTol) continue;
          int b = basic_[k];
          double rate = -dir * wk;
          double eps = feas_eps(b);
          double t = kInf;
          if (phase1 && xval_[b] < lb_[b] - eps) {
            if (rate > 0) t = (lb_[b] + eps - xval_[b]) / rate;
          } else if (phase1 && xval_[b] > ub_[b] + eps) {
            if (rate < 0) t = (ub_[b] - eps - xval_[b]) / rate;
          } else if (rate > 0) {
            if (std::isfinite(ub_[b])) t = (ub_[b] + eps - xval_[b]) / rate;
          } else {
            if (std::isfinite(lb_[b])) t = (lb_[b] - eps - xval_[b]) / rate;
          }
          if (t < t_relaxed) t_relaxed = std::max(t, 0.0);
        }
        if (t_relaxed < kInf) {
          for (int k = 0; k < m_; ++k) {
            double wk = w(k);
            if (std::fabs(wk) <= kPivotTol) continue;
            double to = 0;
            double t = exact_block(k, wk, &to);
            if (t > t_relaxed) continue;
            if (leave < 0 || std::fabs(wk) > leave_piv) {
              t_min = t;
              leave = k;
              leave_piv = std::fabs(wk);
              leave_to = to;
            }
          }
        }
      } else {
        // Bland mode: exact test, ties to the smallest variable index, which
        // is what the termination guarantee needs.
        for (int k = 0; k < m_; ++k) {
          double wk = w(k);
          if (std::fabs(wk) <= kPivotTol) continue;
          double to = 0;
          double t = exact_block(k, wk, &to);
          if (t == kInf) continue;
          double tie = 1e-9 * (1 + std::min(t, t_min));
          bool take = false;
          if (t < t_min - tie) {
            take = true;
          } else if (t <= t_min + tie && leave >= 0) {
            take = basic_[k] < basic_[leave];
          }
          if (take) {
            t_min = std::min(t_min, t);
            leave = k;
            leave_piv = std::fabs(wk);
            leave_to = to;
          }
        }
      }

      double t_star = std::min(t_bound, t_min);
      if (t_star == kInf) {
        // No finite blocking step. If every direction entry that could still
        // drive the objective is below pivot scale, the improving reduced
        // cost was an aggregate of sub-tolerance noise, not a real ray:
        // retire the column and re-price. (In phase 1 only violating basics
        // carry cost, so only their rows can drive.)
        double max_drive = 0;
        for (int k = 0; k < m_; ++k) {
          if (phase1) {
            int b = basic_[k];
            double eps = feas_eps(b);
            if (xval_[b] >= lb_[b] - eps && xval_[b] <= ub_[b] + eps) continue;
          }
          max_drive = std::max(max_drive, std::fabs(w(k)));
        }
        if (max_drive <= 1e-7) {
          ray_banned_[q] = 1;
          ray_ban_used_ = true;
          continue;
        }
        if (phase1) throw NumericError("phase-1 ray: infeasibility cannot decrease");
        return SolveStatus::Unbounded;
      }

      ++iters_;
      degenerate_streak_ = (t_star <= 1e-10) ? degenerate_streak_ + 1 : 0;
      if (degenerate_streak_ > kDegenerateStreak) bland_ = true;

      // Move the entering variable and every basic along the pivot column.
      if (t_star > 0) {
        for (int k = 0; k < m_; ++k) {
          double wk = w(k);
          if (wk != 0.0) xval_[basic_[k]] -= dir * t_star * wk;
        }
        xval_[q] += dir * t_star;
      }

      if (t_bound <= t_min) {
        // Bound flip: the entering variable crossed its own interval.
        vstat_[q] = (vstat_[q] == VStat::AtLower) ? VStat::AtUpper : VStat::AtLower;
        xval_[q] = (vstat_[q] == VStat::AtLower) ? lb_[q] : ub_[q];
        continue;
      }

      int out_col = basic_[leave];
      vstat_[out_col] = (leave_to == ub_[out_col] && std::isfinite(ub_[out_col]))
                            ? VStat::AtUpper
                            : VStat::AtLower;
      xval_[out_col] = leave_to;
      vstat_[q] = VStat::Basic;
      basic_[leave] = q;

      Eta e;
      e.r = leave;
      e.wr = w(leave);
      for (int k = 0; k < m_; ++k)
        if (k != leave && std::fabs(w(k)) > kDropTol) e.w.emplace_back(k, w(k));
      double pivot_size = std::fabs(e.wr);
      etas_.push_back(std::move(e));
      // A small pivot makes an ill-conditioned eta; refresh the factorization
      // right away so its error cannot compound through later iterations.
      if (static_cast<int>(etas_.size()) >= kRefactorEvery || pivot_size < 1e-5) refactor();
    }
    return SolveStatus::Limit;
  }

  void extract(LpSolution& out) const {
    for (int j = 0; j < n_; ++j) {
      double v = xval_[j];
      // Snap values that drifted inside one feasibility tolerance of a bound.
      if (std::isfinite(lb_[j]) && std::fabs(v - lb_[j]) <= cfg_.feasibility_tol) v = lb_[j];
      if (std::isfinite(ub_[j]) && std::fabs(v - ub_[j]) <= cfg_.feasibility_tol) v = ub_[j];
      out.x[j] = v;
    }
    double obj = 0;
    for (int j = 0; j < n_; ++j) obj += model_.vars[j].obj * out.x[j];
    out.objective = obj;

    if (m_ > 0) {
      Eigen::VectorXd cb(m_);
      for (int k = 0; k < m_; ++k) cb(k) = cost_[basic_[k]];
      Eigen::VectorXd y = btran(cb);
      for (int i = 0; i < m_; ++i) out.row_duals[i] = sflip_ * y(i);
      for (int j = 0; j < n_; ++j) {
        double dj = cost_[j];
        for (const auto& [i, a] : cols_[j]) dj -= y(i) * a;
        out.reduced_costs[j] = sflip_ * dj;
      }
    } else {
      for (int j = 0; j < n_; ++j) out.reduced_costs[j] = model_.vars[j].obj;
    }
  }
};

inline LpSolution solve_lp_bounded(const LpModel& model, const SolverConfig& cfg,
                                   const std::vector<double>* lb, const std::vector<double>* ub,
                                   Basis* warm = nullptr) {
  Simplex s(model, cfg, lb, ub);
  if (warm && !warm->empty()) s.load_basis(*warm);
  LpSolution out = s.run();
  if (warm) *warm = s.save_basis();
  return out;
}

}  // namespace detail

// Solves the continuous problem. Binary variables take part relaxed to the
// intersection of their declared bounds with [0, 1].
inline LpSolution solve_lp(const LpModel& model, const SolverConfig& cfg = {}) {
  return detail::solve_lp_bounded(model, cfg, nullptr, nullptr);
}

// Returns a copy of the model with every binary variable pinned to the given
// 0/1 value and downgraded to a continuous (fixed) variable. The assignment
// must cover exactly the binary variables.
inline LpModel fix_binaries(const LpModel& model, const std::map<int, int>& assignment) {
  LpModel out = model;
  for (const auto& [j, v] : assignment) {
    if (j < 0 || j >= static_cast<int>(out.vars.size()))
      throw ValidationError("binary assignment references unknown variable index " +
                            std::to_string(j));
    if (out.vars[j].kind != VarKind::Binary)
      throw ValidationError("assignment pins non-binary variable " + out.vars[j].name);
    if (v != 0 && v != 1)
      throw ValidationError("binary variable " + out.vars[j].name +
                            " assigned a value other than 0 or 1");
    out.vars[j].lb = out.vars[j].ub = static_cast<double>(v);
    out.vars[j].kind = VarKind::Continuous;
  }
  for (const auto& v : out.vars)
    if (v.kind == VarKind::Binary)
      throw ValidationError("missing binary assignment for variable " + v.name);
  return out;
}

// Deterministic branch-and-bound over the binary variables. Branching picks
// the most fractional binary (lowest index on ties); children fix it to 0
// and 1. After each branching the search first plunges into the child on the
// relaxation's side of the fraction (finding an incumbent quickly), then
// falls back to best-bound order; every child resumes from its parent's
// optimal basis. Row duals and reduced costs are not defined for the mixed
// problem and come back empty.
inline LpSolution solve_milp(const LpModel& model, const SolverConfig& cfg = {}) {
  std::vector<int> bins;
  for (int j = 0; j < static_cast<int>(model.vars.size()); ++j)
    if (model.vars[j].kind == VarKind::Binary) bins.push_back(j);

  const bool maximize = model.sense == Sense::Maximize;
  auto better = [maximize](double a, double b) { return maximize ? a > b : a < b; };

  struct Node {
    double bound;
    long id = 0;
    std::vector<std::pair<int, int>> fixes;  // (binary var, value) along the path
    detail::Basis warm;                      // parent's optimal basis
  };
  // Heap order: best dual bound first, then oldest id (deterministic).
  auto after = [maximize](const Node& a, const Node& b) {
    if (a.bound != b.bound) return maximize ? a.bound < b.bound : a.bound > b.bound;
    return a.id > b.id;
  };
  std::vector<Node> open;
  auto push_open = [&](Node&& nd) {
    open.push_back(std::move(nd));
    std::push_heap(open.begin(), open.end(), after);
  };
  auto pop_open = [&]() {
    std::pop_heap(open.begin(), open.end(), after);
    Node nd = std::move(open.back());
    open.pop_back();
    return nd;
  };

  const int n = static_cast<int>(model.vars.size());
  std::vector<double> base_lb(n), base_ub(n);
  for (int j = 0; j < n; ++j) {
    base_lb[j] = model.vars[j].lb;
    base_ub[j] = model.vars[j].ub;
    if (model.vars[j].kind == VarKind::Binary) {
      base_lb[j] = std::max(base_lb[j], 0.0);
      base_ub[j] = std::min(base_ub[j], 1.0);
    }
  }
  {
    Node root;
    root.bound = maximize ? kInf : -kInf;
    push_open(std::move(root));
  }

  LpSolution best;
  best.status = SolveStatus::Infeasible;
  bool have_incumbent = false;
  long nodes = 0, next_id = 1;
  long iterations = 0;
  bool dive_pending = false;
  Node dive;

  // Prune against the incumbent with a small relative slack so equal-value
  // subtrees close instead of being re-explored on rounding noise.
  auto pruned = [&](double bound) {
    if (!have_incumbent) return false;
    double gap = 1e-9 * (1 + std::fabs(best.objective));
    return maximize ? bound <= best.objective + gap : bound >= best.objective - gap;
  };

  LpSolution out;
  while (dive_pending || !open.empty()) {
    if (nodes >= cfg.max_branch_nodes) {
      out = have_incumbent ? best : LpSolution{};
      out.status = SolveStatus::Limit;
      out.message = "branch-and-bound node limit reached";
      out.nodes = nodes;
      out.iterations = iterations;
      return out;
    }
    Node node = dive_pending ? std::move(dive) : pop_open();
    dive_pending = false;
    if (pruned(node.bound)) continue;

    ++nodes;
    std::vector<double> lb = base_lb, ub = base_ub;
    for (const auto& [j, v] : node.fixes) lb[j] = ub[j] = static_cast<double>(v);
    LpSolution relax = detail::solve_lp_bounded(model, cfg, &lb, &ub, &node.warm);
    iterations += relax.iterations;
    if (relax.status == SolveStatus::Infeasible) continue;
    if (relax.status == SolveStatus::Unbounded) {
      out = relax;
      out.row_duals.clear();
      out.reduced_costs.clear();
      out.nodes = nodes;
      out.iterations = iterations;
      return out;
    }
    if (relax.status == SolveStatus::Limit) {
      out = relax;
      out.row_duals.clear();
      out.reduced_costs.clear();
      out.status = SolveStatus::Limit;
      out.message = "simplex iteration limit inside branch-and-bound";
      out.nodes = nodes;
      out.iterations = iterations;
      return out;
    }
    if (pruned(relax.objective)) continue;

    int branch = -1;
    double score = kInf;
    for (int j : bins) {
      double f = relax.x[j];
      double dist = std::fabs(f - std::round(f));
      if (dist <= cfg.integrality_tol) continue;
      double s = std::fabs(f - 0.5);
      if (s < score - 1e-12) {
        score = s;
        branch = j;
      }
    }

    if (branch < 0) {
      // Integral: round the binaries exactly and keep as incumbent.
      for (int j : bins) relax.x[j] = std::round(relax.x[j]);
      best = relax;
      have_incumbent = true;
      continue;
    }

    Node lo, hi;
    lo.fixes = node.fixes;
    lo.fixes.emplace_back(branch, 0);
    lo.bound = relax.objective;
    lo.id = next_id++;
    hi.fixes = std::move(node.fixes);
    hi.fixes.emplace_back(branch, 1);
    hi.bound = relax.objective;
    hi.id = next_id++;
    // Carry the parent basis into both children unless the frontier has grown
    // so large that holding every snapshot would dominate memory.
    lo.warm = hi.warm = std::move(node.warm);
    if (open.size() > 20000) {
      lo.warm = detail::Basis{};
      hi.warm = detail::Basis{};
    }
    bool plunge_hi = relax.x[branch] >= 0.5;
    dive = plunge_hi ? std::move(hi) : std::move(lo);
    dive_pending = true;
    push_open(plunge_hi ? std::move(lo) : std::move(hi));
  }

  out = best;
  out.status = have_incumbent ? SolveStatus::Optimal : SolveStatus::Infeasible;
  out.row_duals.clear();
  out.reduced_costs.clear();
  out.nodes = nodes;
  out.iterations = iterations;
  return out;
}

inline std::string LpModel::dump() const {
  std::ostringstream os;
  auto clean = [](std::string s) {
    for (auto& c : s)
      if (c == ' ') c = '_';
    return s;
  };
  auto term_str = [&](const std::vector<LinearTerm>& terms) {
    std::ostringstream t;
    bool first = true;
    for (const auto& e : terms) {
      double c = e.coef;
      t << (c < 0 ? (first ? "- " : " - ") : (first ? "" : " + "));
      t << std::fabs(c) << " " << clean(vars[e.var].name);
      first = false;
    }
    if (first) t << "0 " << clean(vars.empty() ? std::string("x") : vars[0].name);
    return t.str();
  };

  os << "\\ " << clean(name) << "\n";
  os << (sense == Sense::Maximize ? "Maximize" : "Minimize") << "\n obj: ";
  {
    std::vector<LinearTerm> objterms;
    for (int j = 0; j < static_cast<int>(vars.size()); ++j)
      if (vars[j].obj != 0) objterms.push_back({j, vars[j].obj});
    os << term_str(objterms) << "\n";
  }
  os << "Subject To\n";
  for (const auto& r : rows) {
    const bool has_lb = std::isfinite(r.lb), has_ub = std::isfinite(r.ub);
    if (has_lb && has_ub && r.lb == r.ub) {
      os << " " << clean(r.name) << ": " << term_str(r.terms) << " = " << r.lb << "\n";
    } else {
      if (has_lb) os << " " << clean(r.name) << "_lo: " << term_str(r.terms) << " >= " << r.lb << "\n";
      if (has_ub) os << " " << clean(r.name) << "_hi: " << term_str(r.terms) << " <= " << r.ub << "\n";
      if (!has_lb && !has_ub)
        os << "\\ " << clean(r.name) << ": free row\n";
    }
  }
  os << "Bounds\n";
  for (const auto& v : vars) {
    if (!std::isfinite(v.lb) && !std::isfinite(v.ub))
      os << " " << clean(v.name) << " free\n";
    else if (v.lb == v.ub)
      os << " " << clean(v.name) << " = " << v.lb << "\n";
    else if (!std::isfinite(v.ub))
      os << " " << v.lb << " <= " << clean(v.name) << "\n";
    else if (!std::isfinite(v.lb))
      os << " -inf <= " << clean(v.name) << " <= " << v.ub << "\n";
    else
      os << " " << v.lb << " <= " << clean(v.name) << " <= " << v.ub << "\n";
  }
  bool any_bin = false;
  for (const auto& v : vars) any_bin |= (v.kind == VarKind::Binary);
  if (any_bin) {
    os << "Binaries\n ";
    for (const auto& v : vars)
      if (v.kind == VarKind::Binary) os << clean(v.name) << " ";
    os << "\n";
  }
  os << "End\n";
  return os.str();
}

}  // namespace nodal::linprog
