#include "wot/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "wot/error.hpp"
#include "wot/rng.hpp"

namespace wot {

namespace {

constexpr double kSupportFloor = 1e-12;

struct Strikes {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::vector<double> all;
  void add(double v) {
    all.push_back(v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

void collect_strikes(const Payoff& f, Strikes& s) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BullSpread>) {
          s.add(p.k1);
          s.add(p.k2);
        } else if constexpr (std::is_same_v<T, MaxCall> || std::is_same_v<T, BasketCall> ||
                             std::is_same_v<T, MinPut> || std::is_same_v<T, GeometricPut>) {
          s.add(p.strike);
        } else if constexpr (std::is_same_v<T, Combination>) {
          for (const auto& t : *p.terms) collect_strikes(t.payoff, s);
        }
      },
      f.variant());
}

// Dense two-phase simplex with Bland's rule for
//   maximize c.x  subject to  a_i.x (<=, =, >=) b_i,  x >= 0.
// Small problems only: the tableau is rebuilt from scratch on every call.
class LinearProgram {
 public:
  enum Sense { le, eq, ge };

  LinearProgram(Eigen::MatrixXd a, Eigen::VectorXd b, std::vector<Sense> sense, Eigen::VectorXd c)
      : c_(std::move(c)) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (b(i) < 0.0) {
        a.row(i) *= -1.0;
        b(i) = -b(i);
        if (sense[static_cast<std::size_t>(i)] != eq) sense[static_cast<std::size_t>(i)] = sense[static_cast<std::size_t>(i)] == le ? ge : le;
      }
    }
    Eigen::Index slacks = 0, artificials = 0;
    for (Sense s : sense) {
      if (s != eq) ++slacks;
      if (s != le) ++artificials;
    }
    n_ = n;
    first_art_ = n + slacks;
    t_ = Eigen::MatrixXd::Zero(m, first_art_ + artificials);
    t_.leftCols(n) = a;
    rhs_ = b;
    basis_.assign(static_cast<std::size_t>(m), 0);
    Eigen::Index sc = n, ac = first_art_;
    for (Eigen::Index i = 0; i < m; ++i) {
      const Sense s = sense[static_cast<std::size_t>(i)];
      if (s == le) {
        t_(i, sc) = 1.0;
        basis_[static_cast<std::size_t>(i)] = sc++;
      } else {
        if (s == ge) t_(i, sc++) = -1.0;
        t_(i, ac) = 1.0;
        basis_[static_cast<std::size_t>(i)] = ac++;
      }
    }
  }

  /// Returns false when the constraints admit no solution (or the pivot
  /// budget runs out). On success x() holds an optimal basic solution.
  bool solve() {
    const Eigen::Index cols = t_.cols();
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
    phase1.tail(cols - first_art_).setConstant(-1.0);
    if (!iterate(phase1, cols)) return false;
    if (objective(phase1) < -1e-10) return false;
    // Move artificials that stayed basic at zero out of the basis.
    for (std::size_t r = 0; r < basis_.size(); ++r) {
      if (basis_[r] < first_art_) continue;
      for (Eigen::Index j = 0; j < first_art_; ++j) {
        if (std::abs(t_(static_cast<Eigen::Index>(r), j)) > kPivotTol) {
          pivot(static_cast<Eigen::Index>(r), j);
          break;
        }
      }
    }
    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(cols);
    phase2.head(n_) = c_;
    return iterate(phase2, first_art_);
  }

  Eigen::VectorXd x() const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    for (std::size_t r = 0; r < basis_.size(); ++r)
      if (basis_[r] < n_) out(basis_[r]) = std::max(0.0, rhs_(static_cast<Eigen::Index>(r)));
    return out;
  }

 private:
  static constexpr double kPivotTol = 1e-11;

  double objective(const Eigen::VectorXd& cost) const {
    double v = 0.0;
    for (std::size_t r = 0; r < basis_.size(); ++r) v += cost(basis_[r]) * rhs_(static_cast<Eigen::Index>(r));
    return v;
  }

  void pivot(Eigen::Index r, Eigen::Index s) {
    const double piv = t_(r, s);
    t_.row(r) /= piv;
    rhs_(r) /= piv;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, s);
      if (f == 0.0) continue;
      t_.row(i) -= f * t_.row(r);
      rhs_(i) -= f * rhs_(r);
    }
    basis_[static_cast<std::size_t>(r)] = s;
  }

  // Columns at index >= `limit` never enter the basis.
  bool iterate(const Eigen::VectorXd& cost, Eigen::Index limit) {
    const Eigen::Index m = t_.rows();
    const long budget = 50 * (m + t_.cols()) + 1000;
    Eigen::VectorXd cb(m);
    for (long it = 0; it < budget; ++it) {
      for (Eigen::Index i = 0; i < m; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < limit; ++j) {
        if (cost(j) - cb.dot(t_.col(j)) > 1e-12) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = rhs_(i) / a;
        if (leave < 0 || ratio < best - 1e-15 ||
            (ratio <= best + 1e-15 && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
    }
    return false;
  }

  Eigen::VectorXd c_;
  Eigen::MatrixXd t_;
  Eigen::VectorXd rhs_;
  std::vector<Eigen::Index> basis_;
  Eigen::Index n_ = 0;
  Eigen::Index first_art_ = 0;
};

class Solver {
 public:
  Solver(const MomentProblem& problem, const MomentOptions& opts) : pb_(problem), opts_(opts) {
    Strikes s;
    for (const auto& inst : pb_.instruments) collect_strikes(inst.payoff, s);
    collect_strikes(pb_.target, s);
    for (Eigen::Index i = 0; i < pb_.x0.size(); ++i) s.add(pb_.x0(i));
    init_scale_ = std::max({s.hi - s.lo, 0.25 * std::max(1.0, pb_.x0.cwiseAbs().maxCoeff()), 0.1});
    strikes_ = std::move(s.all);
  }

  // target == nullptr runs the pure feasibility search.
  AtomicCandidate run(const Payoff* target, std::uint64_t stream) {
    const Payoff zero = Payoff::constant(0.0, pb_.dim());
    const Payoff& g = target ? *target : zero;
    bool have = false;
    AtomicCandidate best;
    std::vector<std::vector<double>> pool;
    for (int s = 0; s < opts_.starts; ++s) {
      AtomicCandidate c = single_start(g, derive_seed(opts_.seed, stream * 1000 + static_cast<std::uint64_t>(s)));
      pool.insert(pool.end(), c.atoms.begin(), c.atoms.end());
      if (!have || better(c, best, target != nullptr)) {
        best = std::move(c);
        have = true;
      }
    }
    if (auto polished = reweight(g, std::move(pool))) {
      if (better(*polished, best, target != nullptr)) best = std::move(*polished);
    }
    return best;
  }

  double violation(const AtomicCandidate& c) const {
    return std::max({c.mean_residual, c.interval_violation, c.weight_residual});
  }

 private:
  bool feasible(const AtomicCandidate& c) const { return violation(c) < opts_.tolerance; }

  // Feasible first, then objective (or smaller violation for the pure
  // feasibility search), then lexicographic atoms.
  bool better(const AtomicCandidate& a, const AtomicCandidate& b, bool by_objective) const {
    const bool fa = feasible(a), fb = feasible(b);
    if (fa != fb) return fa;
    if (!fa || !by_objective) {
      const double va = violation(a), vb = violation(b);
      if (va != vb) return va < vb;
    }
    if (by_objective && a.objective != b.objective) return a.objective > b.objective;
    return a.atoms < b.atoms;
  }

  double clamp(double v) const {
    if (pb_.lower) v = std::max(v, *pb_.lower);
    if (pb_.upper) v = std::min(v, *pb_.upper);
    return v;
  }

  AtomicCandidate single_start(const Payoff& g, std::uint64_t seed) {
    const int k = pb_.atom_count();
    const int d = pb_.dim();
    const std::size_t nk = static_cast<std::size_t>(k);
    const std::size_t ni = pb_.instruments.size();
    Rng rng(seed);

    Eigen::MatrixXd y(d, k);
    for (int i = 0; i < k; ++i)
      for (int c = 0; c < d; ++c) y(c, i) = clamp(pb_.x0(c) + init_scale_ * rng.normal());
    Eigen::VectorXd w(k);
    for (int i = 0; i < k; ++i) w(i) = 0.1 * rng.normal();

    Eigen::MatrixXd my = Eigen::MatrixXd::Zero(d, k), vy = my;
    Eigen::VectorXd mw = Eigen::VectorXd::Zero(k), vw = mw;
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-12;
    std::uint64_t t = 0;

    Eigen::VectorXd gval(k);
    Eigen::MatrixXd ggrad(d, k);
    Eigen::MatrixXd fval(static_cast<Eigen::Index>(ni), k);
    std::vector<Eigen::MatrixXd> fgrad(ni, Eigen::MatrixXd(d, k));
    Eigen::VectorXd tmp(d);

    double lambda = opts_.penalty0;
    double lr = opts_.learning_rate;
    for (int stage = 0; stage <= opts_.penalty_doublings; ++stage) {
      for (int it = 0; it < opts_.iterations_per_stage; ++it) {
        const Eigen::VectorXd p = softmax(w);
        for (int i = 0; i < k; ++i) {
          const double* yi = y.col(i).data();
          gval(i) = g.eval_unchecked(yi);
          g.grad_unchecked(yi, tmp.data());
          ggrad.col(i) = tmp;
          for (std::size_t j = 0; j < ni; ++j) {
            const Payoff& fj = pb_.instruments[j].payoff;
            fval(static_cast<Eigen::Index>(j), i) = fj.eval_unchecked(yi);
            fj.grad_unchecked(yi, tmp.data());
            fgrad[j].col(i) = tmp;
          }
        }
        const Eigen::VectorXd err = y * p - pb_.x0;
        Eigen::VectorXd slope(static_cast<Eigen::Index>(ni));  // dV/ds_j
        for (std::size_t j = 0; j < ni; ++j) {
          const double s = fval.row(static_cast<Eigen::Index>(j)).dot(p);
          const auto& inst = pb_.instruments[j];
          slope(static_cast<Eigen::Index>(j)) = 2.0 * std::max(s - inst.ask, 0.0) - 2.0 * std::max(inst.bid - s, 0.0);
        }
        // dF/dp_i and dF/dy_i for F = sum p g - lambda V.
        Eigen::VectorXd dp = gval - lambda * (2.0 * (y.transpose() * err) + fval.transpose() * slope);
        Eigen::MatrixXd dy(d, k);
        for (int i = 0; i < k; ++i) {
          Eigen::VectorXd col = ggrad.col(i) - 2.0 * lambda * err;
          for (std::size_t j = 0; j < ni; ++j) col -= lambda * slope(static_cast<Eigen::Index>(j)) * fgrad[j].col(i);
          dy.col(i) = p(i) * col;
        }
        const double avg = p.dot(dp);
        const Eigen::VectorXd dw = p.cwiseProduct(dp.array().matrix() - Eigen::VectorXd::Constant(k, avg));

        ++t;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
        my = b1 * my + (1.0 - b1) * dy;
        vy = b2 * vy + (1.0 - b2) * dy.cwiseProduct(dy);
        mw = b1 * mw + (1.0 - b1) * dw;
        vw = b2 * vw + (1.0 - b2) * dw.cwiseProduct(dw);
        y.array() += lr * (my.array() / c1) / ((vy.array() / c2).sqrt() + eps);
        w.array() += lr * (mw.array() / c1) / ((vw.array() / c2).sqrt() + eps);
        y = y.unaryExpr([this](double v) { return clamp(v); });
      }
      lambda *= 2.0;
      lr *= opts_.learning_rate_decay;
    }

    std::vector<std::vector<double>> atoms(nk, std::vector<double>(static_cast<std::size_t>(d)));
    for (int i = 0; i < k; ++i)
      for (int c = 0; c < d; ++c) atoms[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = y(c, i);
    const Eigen::VectorXd p = softmax(w);
    std::vector<double> weights(p.data(), p.data() + k);
    project_weights(atoms, weights);
    return evaluate_candidate(pb_, g, std::move(atoms), std::move(weights));
  }

  // Fixed candidate atoms: a line through x0 along each axis, the strikes
  // and the box corners in low dimension.
  std::vector<std::vector<double>> grid_atoms() const {
    const int d = pb_.dim();
    const std::vector<double> base(pb_.x0.data(), pb_.x0.data() + d);
    const int points = d == 1 ? 301 : 41;
    std::vector<std::vector<double>> out{base};
    for (int c = 0; c < d; ++c) {
      const double lo = pb_.lower ? *pb_.lower : base[static_cast<std::size_t>(c)] - 6.0 * init_scale_;
      const double hi = pb_.upper ? *pb_.upper : base[static_cast<std::size_t>(c)] + 6.0 * init_scale_;
      std::vector<double> values;
      for (int i = 0; i < points; ++i) values.push_back(lo + (hi - lo) * i / (points - 1));
      for (double k : strikes_) values.push_back(clamp(k));
      for (double v : values) {
        auto a = base;
        a[static_cast<std::size_t>(c)] = v;
        out.push_back(std::move(a));
      }
    }
    if (d > 1 && d <= 6 && pb_.lower && pb_.upper) {
      for (int mask = 0; mask < (1 << d); ++mask) {
        std::vector<double> a(static_cast<std::size_t>(d));
        for (int c = 0; c < d; ++c) a[static_cast<std::size_t>(c)] = (mask >> c) & 1 ? *pb_.upper : *pb_.lower;
        out.push_back(std::move(a));
      }
    }
    return out;
  }

  // Best law supported on the optimizer atoms plus a fixed grid, found by
  // linear programming over the weights. Recovers feasibility when every
  // atom sits where an instrument payoff is flat and has no gradient.
  std::optional<AtomicCandidate> reweight(const Payoff& g, std::vector<std::vector<double>> pool) const {
    const int d = pb_.dim();
    for (auto& a : grid_atoms()) pool.push_back(std::move(a));
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

    const std::size_t ni = pb_.instruments.size();
    const auto n = static_cast<Eigen::Index>(pool.size());
    std::vector<LinearProgram::Sense> sense(static_cast<std::size_t>(1 + d), LinearProgram::eq);
    for (const auto& inst : pb_.instruments) {
      if (inst.bid == inst.ask) {
        sense.push_back(LinearProgram::eq);
      } else {
        sense.push_back(LinearProgram::ge);
        sense.push_back(LinearProgram::le);
      }
    }
    const auto m = static_cast<Eigen::Index>(sense.size());
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m);
    Eigen::VectorXd c(n);
    b(0) = 1.0;
    for (int k = 0; k < d; ++k) b(1 + k) = pb_.x0(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double* y = pool[static_cast<std::size_t>(i)].data();
      c(i) = g.eval_unchecked(y);
      a(0, i) = 1.0;
      for (int k = 0; k < d; ++k) a(1 + k, i) = y[k];
      Eigen::Index row = 1 + d;
      for (std::size_t j = 0; j < ni; ++j) {
        const auto& inst = pb_.instruments[j];
        const double f = inst.payoff.eval_unchecked(y);
        a(row, i) = f;
        b(row) = inst.bid;
        ++row;
        if (inst.bid != inst.ask) {
          a(row, i) = f;
          b(row) = inst.ask;
          ++row;
        }
      }
    }
    LinearProgram lp(std::move(a), std::move(b), std::move(sense), std::move(c));
    if (!lp.solve()) return std::nullopt;
    const Eigen::VectorXd p = lp.x();

    std::vector<std::vector<double>> atoms;
    std::vector<double> weights;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (p(i) > 0.0) {
        atoms.push_back(pool[static_cast<std::size_t>(i)]);
        weights.push_back(p(i));
      }
    }
    const auto k = static_cast<std::size_t>(pb_.atom_count());
    if (atoms.size() > k) return std::nullopt;
    while (atoms.size() < k) {
      atoms.emplace_back(pb_.x0.data(), pb_.x0.data() + d);
      weights.push_back(0.0);
    }
    project_weights(atoms, weights);
    return evaluate_candidate(pb_, g, std::move(atoms), std::move(weights));
  }

  static Eigen::VectorXd softmax(const Eigen::VectorXd& w) {
    const double m = w.maxCoeff();
    Eigen::VectorXd e = (w.array() - m).exp().matrix();
    return e / e.sum();
  }

  // Minimum-norm weight correction on the support so that the weights sum
  // to one, the mean equals x0, and violated (or pinned) instruments sit on
  // their nearest bound. Weights that turn negative leave the support.
  void project_weights(const std::vector<std::vector<double>>& atoms, std::vector<double>& weights) const {
    const int d = pb_.dim();
    const std::size_t k = atoms.size();
    const std::size_t ni = pb_.instruments.size();
    std::vector<double> fv(ni * k);
    for (std::size_t j = 0; j < ni; ++j)
      for (std::size_t i = 0; i < k; ++i) fv[j * k + i] = pb_.instruments[j].payoff.eval_unchecked(atoms[i].data());
    std::vector<bool> active(ni, false);
    for (std::size_t j = 0; j < ni; ++j) active[j] = pb_.instruments[j].bid == pb_.instruments[j].ask;

    for (int round = 0; round < 20; ++round) {
      std::vector<std::size_t> support;
      for (std::size_t i = 0; i < k; ++i)
        if (weights[i] > kSupportFloor) support.push_back(i);
        else weights[i] = 0.0;
      if (support.empty()) return;
      // Targets for instrument rows: the bound nearest to the current value.
      std::vector<double> s(ni, 0.0);
      for (std::size_t j = 0; j < ni; ++j)
        for (std::size_t i = 0; i < k; ++i) s[j] += weights[i] * fv[j * k + i];
      for (std::size_t j = 0; j < ni; ++j)
        if (s[j] > pb_.instruments[j].ask || s[j] < pb_.instruments[j].bid) active[j] = true;

      std::vector<std::size_t> rows;
      for (std::size_t j = 0; j < ni; ++j)
        if (active[j]) rows.push_back(j);
      const auto m = static_cast<Eigen::Index>(1 + d + rows.size());
      const auto n = static_cast<Eigen::Index>(support.size());
      Eigen::MatrixXd a(m, n);
      Eigen::VectorXd r(m);
      double total = 0.0;
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
      for (std::size_t i = 0; i < k; ++i) {
        total += weights[i];
        for (int c = 0; c < d; ++c) mean(c) += weights[i] * atoms[i][static_cast<std::size_t>(c)];
      }
      r(0) = 1.0 - total;
      for (int c = 0; c < d; ++c) r(1 + c) = pb_.x0(c) - mean(c);
      for (std::size_t q = 0; q < rows.size(); ++q) {
        const auto& inst = pb_.instruments[rows[q]];
        const double target = std::clamp(s[rows[q]], inst.bid, inst.ask);
        r(1 + d + static_cast<Eigen::Index>(q)) = target - s[rows[q]];
      }
      for (Eigen::Index col = 0; col < n; ++col) {
        const std::size_t i = support[static_cast<std::size_t>(col)];
        a(0, col) = 1.0;
        for (int c = 0; c < d; ++c) a(1 + c, col) = atoms[i][static_cast<std::size_t>(c)];
        for (std::size_t q = 0; q < rows.size(); ++q) a(1 + d + static_cast<Eigen::Index>(q), col) = fv[rows[q] * k + i];
      }
      if (r.cwiseAbs().maxCoeff() < 1e-15) return;
      const Eigen::VectorXd delta = a.completeOrthogonalDecomposition().solve(r);
      bool negative = false;
      for (Eigen::Index col = 0; col < n; ++col) {
        double& wi = weights[support[static_cast<std::size_t>(col)]];
        wi += delta(col);
        if (wi < 0.0) {
          wi = 0.0;
          negative = true;
        }
      }
      if (!negative && (a * delta - r).cwiseAbs().maxCoeff() < 1e-13) {
        // One more pass picks up instruments pushed out of their interval.
        bool any_new = false;
        for (std::size_t j = 0; j < ni && !any_new; ++j) {
          double sj = 0.0;
          for (std::size_t i = 0; i < k; ++i) sj += weights[i] * fv[j * k + i];
          if (!active[j] && (sj > pb_.instruments[j].ask || sj < pb_.instruments[j].bid)) any_new = true;
        }
        if (!any_new) return;
      }
    }
  }

  const MomentProblem& pb_;
  const MomentOptions& opts_;
  double init_scale_ = 1.0;
  std::vector<double> strikes_;
};

}  // namespace

void MomentProblem::validate() const {
  if (x0.size() == 0) throw ArgumentError("moment problem needs x0 of dimension >= 1");
  if (target.dim() != dim()) throw ArgumentError("target payoff dimension does not match x0");
  if (lower && upper && !(*upper > *lower)) throw ArgumentError("moment domain needs upper > lower");
  for (Eigen::Index c = 0; c < x0.size(); ++c) {
    if ((lower && x0(c) < *lower) || (upper && x0(c) > *upper))
      throw ArgumentError("x0 lies outside the atom domain");
  }
  for (const auto& inst : instruments) {
    if (inst.payoff.dim() != dim()) throw ArgumentError("instrument " + inst.name + " has the wrong dimension");
    if (!(inst.bid >= 0.0) || !(inst.ask >= inst.bid))
      throw ArgumentError("instrument " + inst.name + " needs 0 <= bid <= ask");
  }
}

void MomentOptions::validate() const {
  if (starts < 1 || iterations_per_stage < 1 || penalty_doublings < 0)
    throw ArgumentError("moment optimizer counts must be positive");
  if (!(penalty0 > 0.0) || !(learning_rate > 0.0) || !(learning_rate_decay > 0.0 && learning_rate_decay <= 1.0))
    throw ArgumentError("moment optimizer rates must be positive");
  if (!(tolerance > 0.0) || !(infeasible_threshold >= tolerance))
    throw ArgumentError("moment tolerances must satisfy 0 < tolerance <= infeasible_threshold");
}

std::string to_string(MomentStatus s) {
  switch (s) {
    case MomentStatus::ok: return "ok";
    case MomentStatus::infeasible: return "infeasible";
    case MomentStatus::optimizer_failure: return "optimizer_failure";
  }
  return "ok";
}

AtomicCandidate evaluate_candidate(const MomentProblem& problem, const Payoff& payoff,
                                   std::vector<std::vector<double>> atoms, std::vector<double> weights) {
  if (atoms.size() != weights.size()) throw ArgumentError("atoms and weights differ in length");
  const int d = problem.dim();
  AtomicCandidate c;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].size() != static_cast<std::size_t>(d)) throw ArgumentError("atom dimension mismatch");
    total += weights[i];
    c.objective += weights[i] * payoff.eval_unchecked(atoms[i].data());
    for (int k = 0; k < d; ++k) mean(k) += weights[i] * atoms[i][static_cast<std::size_t>(k)];
  }
  c.weight_residual = std::abs(total - 1.0);
  c.mean_residual = (mean - problem.x0).norm();
  for (const auto& inst : problem.instruments) {
    double s = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) s += weights[i] * inst.payoff.eval_unchecked(atoms[i].data());
    c.interval_violation = std::max({c.interval_violation, s - inst.ask, inst.bid - s});
  }
  c.atoms = std::move(atoms);
  c.weights = std::move(weights);
  return c;
}

MomentBounds moment_bounds(const MomentProblem& problem, const MomentOptions& opts) {
  problem.validate();
  opts.validate();
  MomentBounds out;
  for (const auto& inst : problem.instruments) {
    const double v = inst.payoff.eval_unchecked(problem.x0.data());
    const double miss = std::max({0.0, v - inst.ask, inst.bid - v});
    out.dirac_violations.push_back(miss);
    if (miss > 0.0) out.dirac_feasible = false;
  }

  Solver solver(problem, opts);
  const Payoff neg = Payoff::scaled(problem.target, -1.0);
  AtomicCandidate up = solver.run(&problem.target, 1);
  AtomicCandidate lo = solver.run(&neg, 2);
  const bool up_ok = solver.violation(up) < opts.tolerance;
  const bool lo_ok = solver.violation(lo) < opts.tolerance;

  out.upper = up.objective;
  out.lower = -lo.objective;
  lo.objective = -lo.objective;  // report the target's value under the certificate
  out.upper_certificate = std::move(up);
  out.lower_certificate = std::move(lo);
  if (up_ok && lo_ok) return out;

  const AtomicCandidate feas = solver.run(nullptr, 3);
  out.min_violation = solver.violation(feas);
  out.status = out.min_violation > opts.infeasible_threshold ? MomentStatus::infeasible
                                                             : MomentStatus::optimizer_failure;
  return out;
}

}  // namespace wot
