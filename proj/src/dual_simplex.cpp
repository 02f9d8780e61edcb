#include "dual_simplex.hpp"

#include <algorithm>
#include <cmath>

namespace icegrid::solver::detail {

namespace {

constexpr int kRefactorInterval = 300;
constexpr double kPivotTol = 1e-9;
constexpr double kArtificialMax = 1e15;
constexpr int kDegenerateLimit = 60;

double pow2_round(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) return 1.0;
  return std::ldexp(1.0, static_cast<int>(std::lround(std::log2(v))));
}

}  // namespace

DualSimplex::DualSimplex(const Model& model, const SolveOptions& opts) : opts_(opts) {
  n_ = model.num_cols();
  m_ = model.num_rows();
  cstart_ = model.col_start;
  rind_ = model.row_index;
  val_ = model.value;
  offset_ = model.objective_offset;

  // geometric-mean scaling, rounded to powers of two so scaling is exact
  rowscale_.assign(m_, 1.0);
  colscale_.assign(n_, 1.0);
  std::vector<double> rmax(m_), rmin(m_);
  for (int pass = 0; pass < 6; ++pass) {
    std::fill(rmax.begin(), rmax.end(), 0.0);
    std::fill(rmin.begin(), rmin.end(), kInf);
    for (int j = 0; j < n_; ++j)
      for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) {
        const double a = std::abs(val_[k]) * colscale_[j];
        if (a == 0.0) continue;
        rmax[rind_[k]] = std::max(rmax[rind_[k]], a);
        rmin[rind_[k]] = std::min(rmin[rind_[k]], a);
      }
    for (int i = 0; i < m_; ++i)
      if (rmax[i] > 0.0) rowscale_[i] = 1.0 / std::sqrt(rmax[i] * rmin[i]);
    for (int j = 0; j < n_; ++j) {
      double cmax = 0.0, cmin = kInf;
      for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) {
        const double a = std::abs(val_[k]) * rowscale_[rind_[k]];
        if (a == 0.0) continue;
        cmax = std::max(cmax, a);
        cmin = std::min(cmin, a);
      }
      if (cmax > 0.0) colscale_[j] = 1.0 / std::sqrt(cmax * cmin);
    }
  }
  for (auto& r : rowscale_) r = pow2_round(r);
  for (auto& c : colscale_) c = pow2_round(c);
  for (int j = 0; j < n_; ++j)
    for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) val_[k] *= rowscale_[rind_[k]] * colscale_[j];

  double cmax = 0.0;
  for (int j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(model.cost[j] * colscale_[j]));
  objscale_ = cmax > 0.0 ? pow2_round(1.0 / cmax) : 1.0;

  const int total = n_ + m_;
  cost_.assign(total, 0.0);
  tlo_.resize(total);
  tup_.resize(total);
  for (int j = 0; j < n_; ++j) {
    cost_[j] = model.cost[j] * colscale_[j] * objscale_;
    tlo_[j] = model.col_lower[j] / colscale_[j];
    tup_[j] = model.col_upper[j] / colscale_[j];
  }
  for (int i = 0; i < m_; ++i) {
    tlo_[n_ + i] = model.row_lower[i] * rowscale_[i];
    tup_[n_ + i] = model.row_upper[i] * rowscale_[i];
  }
  lo_.resize(total);
  up_.resize(total);
  for (int j = 0; j < total; ++j) refresh_working_bounds(j);
  x_.assign(total, 0.0);
  d_.assign(total, 0.0);
  status_.assign(total, ColumnStatus::AtLower);
  slack_basis();
}

void DualSimplex::refresh_working_bounds(int j) {
  const bool lf = std::isfinite(tlo_[j]), uf = std::isfinite(tup_[j]);
  lo_[j] = lf ? tlo_[j] : std::min(uf ? tup_[j] : 0.0, 0.0) - artificial_;
  up_[j] = uf ? tup_[j] : std::max(lf ? tlo_[j] : 0.0, 0.0) + artificial_;
}

void DualSimplex::set_col_bounds(int j, double lower, double upper) {
  tlo_[j] = lower / colscale_[j];
  tup_[j] = upper / colscale_[j];
  refresh_working_bounds(j);
  primal_dirty_ = true;
}

void DualSimplex::slack_basis() {
  const int total = n_ + m_;
  head_.resize(m_);
  pos_.assign(total, -1);
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    pos_[n_ + i] = i;
    status_[n_ + i] = ColumnStatus::Basic;
  }
  binv_ = -Eigen::MatrixXd::Identity(m_, m_);
  dse_ = Eigen::VectorXd::Ones(m_);
  updates_ = 0;
  for (int j = 0; j < n_; ++j) {
    d_[j] = cost_[j];
    status_[j] = ColumnStatus::AtLower;
    place_nonbasic(j);
  }
  primal_dirty_ = true;
}

void DualSimplex::place_nonbasic(int j) {
  if (tlo_[j] == tup_[j]) {
    status_[j] = ColumnStatus::Fixed;
    return;
  }
  const double dtol = opts_.optimality_tol;
  const bool lf = std::isfinite(tlo_[j]), uf = std::isfinite(tup_[j]);
  if (d_[j] > dtol) {
    status_[j] = ColumnStatus::AtLower;
  } else if (d_[j] < -dtol) {
    status_[j] = ColumnStatus::AtUpper;
  } else if (status_[j] == ColumnStatus::AtLower && lf) {
  } else if (status_[j] == ColumnStatus::AtUpper && uf) {
  } else if (lf) {
    status_[j] = ColumnStatus::AtLower;
  } else if (uf) {
    status_[j] = ColumnStatus::AtUpper;
  } else {
    status_[j] = ColumnStatus::Free;
  }
}

bool DualSimplex::at_artificial(int j) const {
  return (status_[j] == ColumnStatus::AtLower && !std::isfinite(tlo_[j])) ||
         (status_[j] == ColumnStatus::AtUpper && !std::isfinite(tup_[j]));
}

double DualSimplex::nonbasic_value(int j) const {
  switch (status_[j]) {
    case ColumnStatus::AtLower: return lo_[j];
    case ColumnStatus::AtUpper: return up_[j];
    case ColumnStatus::Fixed: return tlo_[j];
    default: return 0.0;
  }
}

void DualSimplex::load_column(int j, Eigen::VectorXd& out) const {
  if (is_structural(j)) {
    out.setZero(m_);
    for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) out.noalias() += val_[k] * binv_.col(rind_[k]);
  } else {
    out = -binv_.col(j - n_);
  }
}

void DualSimplex::refactor() {
  if (m_ == 0) {
    updates_ = 0;
    return;
  }
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
  for (int i = 0; i < m_; ++i) {
    const int j = head_[i];
    if (is_structural(j)) {
      for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) b(rind_[k], i) = val_[k];
    } else {
      b(j - n_, i) = -1.0;
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
  if (!(lu.rcond() > 1e-13)) {
    slack_basis();
    compute_dual();
    for (int j = 0; j < n_; ++j) place_nonbasic(j);
    primal_dirty_ = true;
    return;
  }
  binv_ = lu.inverse();
  dse_ = binv_.rowwise().squaredNorm();
  updates_ = 0;
  primal_dirty_ = true;
}

void DualSimplex::compute_primal() {
  const int total = n_ + m_;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < total; ++j) {
    if (status_[j] == ColumnStatus::Basic) continue;
    const double v = nonbasic_value(j);
    x_[j] = v;
    if (v == 0.0) continue;
    if (is_structural(j)) {
      for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) rhs[rind_[k]] -= val_[k] * v;
    } else {
      rhs[j - n_] += v;
    }
  }
  const Eigen::VectorXd xb = binv_ * rhs;
  for (int i = 0; i < m_; ++i) x_[head_[i]] = xb[i];
  primal_dirty_ = false;
}

void DualSimplex::compute_dual() {
  Eigen::VectorXd cb(m_);
  for (int i = 0; i < m_; ++i) cb[i] = cost_[head_[i]];
  const Eigen::VectorXd y = binv_.transpose() * cb;
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == ColumnStatus::Basic) {
      d_[j] = 0.0;
      continue;
    }
    double s = cost_[j];
    for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) s -= y[rind_[k]] * val_[k];
    d_[j] = s;
  }
  for (int i = 0; i < m_; ++i) d_[n_ + i] = status_[n_ + i] == ColumnStatus::Basic ? 0.0 : y[i];
}

int DualSimplex::correct_dual_infeasibilities() {
  const double dtol = opts_.optimality_tol;
  int changed = 0;
  for (int j = 0; j < n_ + m_; ++j) {
    const auto st = status_[j];
    if (st == ColumnStatus::Basic) continue;
    const bool bad = (st == ColumnStatus::Fixed) != (tlo_[j] == tup_[j]) ||
                     (st == ColumnStatus::AtLower && d_[j] < -dtol) ||
                     (st == ColumnStatus::AtUpper && d_[j] > dtol) ||
                     (st == ColumnStatus::Free && std::abs(d_[j]) > dtol);
    if (bad) {
      place_nonbasic(j);
      if (status_[j] != st) ++changed;
    }
  }
  if (changed) primal_dirty_ = true;
  return changed;
}

int DualSimplex::choose_leaving_row() const {
  const double ftol = opts_.feasibility_tol;
  int best = -1;
  double best_score = 0.0;
  for (int i = 0; i < m_; ++i) {
    const int p = head_[i];
    double delta = 0.0;
    if (x_[p] < tlo_[p] - ftol) delta = tlo_[p] - x_[p];
    else if (x_[p] > tup_[p] + ftol) delta = x_[p] - tup_[p];
    else continue;
    if (bland_) {
      if (best < 0 || p < head_[best]) best = i;
      continue;
    }
    const double score = delta * delta / std::max(dse_[i], 1e-12);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

bool DualSimplex::widen_artificial() {
  if (artificial_ >= kArtificialMax) return false;
  artificial_ *= 100.0;
  for (int j = 0; j < n_ + m_; ++j) refresh_working_bounds(j);
  primal_dirty_ = true;
  return true;
}

double DualSimplex::residual_check() {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(m_);
  double scale = 1.0;
  for (int j = 0; j < n_ + m_; ++j) {
    const double v = x_[j];
    if (v == 0.0) continue;
    scale = std::max(scale, std::abs(v));
    if (is_structural(j)) {
      for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) r[rind_[k]] += val_[k] * v;
    } else {
      r[j - n_] -= v;
    }
  }
  return m_ ? r.cwiseAbs().maxCoeff() / scale : 0.0;
}

LpOutcome DualSimplex::solve(Clock::time_point deadline) {
  const double dtol = opts_.optimality_tol;
  if (updates_ > 0 && residual_check() > 1e-9) refactor();
  compute_dual();
  correct_dual_infeasibilities();
  compute_primal();
  bland_ = false;
  degenerate_run_ = 0;
  int verify_rounds = 0;
  int refactor_retries = 0;

  const int total = n_ + m_;
  while (true) {
    if (iters_ >= opts_.iteration_limit) return LpOutcome::IterationLimit;
    if (Clock::now() > deadline) return LpOutcome::TimeLimit;
    if (updates_ >= kRefactorInterval) {
      refactor();
      compute_dual();
      correct_dual_infeasibilities();
      compute_primal();
    }
    if (primal_dirty_) compute_primal();

    const int r = choose_leaving_row();
    if (r < 0) {
      if (verify_rounds < 20) {
        ++verify_rounds;
        if (updates_ > 0 && residual_check() > 1e-9) refactor();
        compute_dual();
        const int flipped = correct_dual_infeasibilities();
        compute_primal();
        if (flipped > 0 || choose_leaving_row() >= 0) continue;
      }
      bool widen = false, moved = false;
      for (int j = 0; j < total; ++j) {
        if (!at_artificial(j)) continue;
        if (std::abs(d_[j]) <= dtol) {
          if (std::isfinite(tlo_[j])) status_[j] = ColumnStatus::AtLower;
          else if (std::isfinite(tup_[j])) status_[j] = ColumnStatus::AtUpper;
          else status_[j] = ColumnStatus::Free;
          moved = true;
        } else {
          widen = true;
        }
      }
      if (widen) {
        if (!widen_artificial()) return LpOutcome::Unbounded;
        verify_rounds = 0;
        continue;
      }
      if (moved) {
        primal_dirty_ = true;
        verify_rounds = 0;
        continue;
      }
      return LpOutcome::Optimal;
    }

    const int p = head_[r];
    const bool below = x_[p] < tlo_[p];
    const double s = below ? 1.0 : -1.0;
    const double target = below ? tlo_[p] : tup_[p];

    rho_ = binv_.row(r).transpose();
    cand_.clear();
    cand_alpha_.clear();
    for (int j = 0; j < total; ++j) {
      if (status_[j] == ColumnStatus::Basic) continue;
      double a;
      if (is_structural(j)) {
        a = 0.0;
        for (int k = cstart_[j]; k < cstart_[j + 1]; ++k) a += rho_[rind_[k]] * val_[k];
      } else {
        a = -rho_[j - n_];
      }
      if (a == 0.0) continue;
      cand_.push_back(j);
      cand_alpha_.push_back(a);
    }

    // Harris pass one: relaxed bound on the dual step
    double theta_max = kInf;
    const auto eligible_bound = [&](int j, double abar, double& ratio) {
      switch (status_[j]) {
        case ColumnStatus::AtLower:
          if (abar < -kPivotTol) {
            ratio = d_[j] / -abar;
            return (d_[j] + dtol) / -abar;
          }
          break;
        case ColumnStatus::AtUpper:
          if (abar > kPivotTol) {
            ratio = -d_[j] / abar;
            return (-d_[j] + dtol) / abar;
          }
          break;
        case ColumnStatus::Free:
          if (std::abs(abar) > kPivotTol) {
            ratio = std::abs(d_[j]) / std::abs(abar);
            return (std::abs(d_[j]) + dtol) / std::abs(abar);
          }
          break;
        default: break;
      }
      return kInf;
    };
    for (std::size_t k = 0; k < cand_.size(); ++k) {
      double ratio;
      theta_max = std::min(theta_max, eligible_bound(cand_[k], s * cand_alpha_[k], ratio));
    }
    if (!std::isfinite(theta_max)) {
      if (updates_ > 0 && refactor_retries < 3) {
        ++refactor_retries;
        refactor();
        compute_dual();
        correct_dual_infeasibilities();
        continue;
      }
      bool artificial_present = false;
      for (int j = 0; j < total && !artificial_present; ++j) artificial_present = at_artificial(j);
      if (artificial_present && widen_artificial()) continue;
      return LpOutcome::Infeasible;
    }

    // pass two: largest pivot among ratios within the relaxed bound
    int q = -1, qk = -1;
    double best_abs = 0.0;
    for (std::size_t k = 0; k < cand_.size(); ++k) {
      double ratio = kInf;
      const double abar = s * cand_alpha_[k];
      if (!std::isfinite(eligible_bound(cand_[k], abar, ratio))) continue;
      if (ratio > theta_max) continue;
      if (bland_) {
        if (q < 0 || cand_[k] < q) {
          q = cand_[k];
          qk = static_cast<int>(k);
        }
      } else if (std::abs(abar) > best_abs) {
        best_abs = std::abs(abar);
        q = cand_[k];
        qk = static_cast<int>(k);
      }
    }

    load_column(q, alpha_q_);
    const double arq = alpha_q_[r];
    const double arq_row = cand_alpha_[qk];
    if (std::abs(arq - arq_row) > 1e-7 * (1.0 + std::abs(arq)) || std::abs(arq) < kPivotTol) {
      if (updates_ > 0 && refactor_retries < 3) {
        ++refactor_retries;
        refactor();
        compute_dual();
        correct_dual_infeasibilities();
        continue;
      }
      if (std::abs(arq) < kPivotTol) return LpOutcome::Numerical;
    }
    refactor_retries = 0;

    // dual update
    const double theta_d = d_[q] / arq_row;
    for (std::size_t k = 0; k < cand_.size(); ++k) d_[cand_[k]] -= theta_d * cand_alpha_[k];
    d_[q] = 0.0;
    d_[p] = -theta_d;
    if (std::abs(theta_d) <= 1e-12) {
      if (++degenerate_run_ > kDegenerateLimit) bland_ = true;
    } else {
      degenerate_run_ = 0;
      bland_ = false;
    }

    // primal update
    const double theta_p = (x_[p] - target) / arq;
    for (int i = 0; i < m_; ++i) x_[head_[i]] -= theta_p * alpha_q_[i];
    x_[q] += theta_p;
    x_[p] = target;

    // steepest-edge weights
    tau_.noalias() = binv_ * rho_;
    const double wr = rho_.squaredNorm();
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double ratio = alpha_q_[i] / arq;
      if (ratio == 0.0) continue;
      dse_[i] = std::max(dse_[i] - 2.0 * ratio * tau_[i] + ratio * ratio * wr, 1e-10);
    }
    dse_[r] = std::max(wr / (arq * arq), 1e-10);

    // inverse update
    binv_.noalias() -= (alpha_q_ / arq) * rho_.transpose();
    binv_.row(r) = rho_.transpose() / arq;

    head_[r] = q;
    pos_[q] = r;
    pos_[p] = -1;
    status_[q] = ColumnStatus::Basic;
    if (tlo_[p] == tup_[p]) status_[p] = ColumnStatus::Fixed;
    else status_[p] = below ? ColumnStatus::AtLower : ColumnStatus::AtUpper;
    ++iters_;
    ++updates_;
  }
}

double DualSimplex::objective() const {
  double z = 0.0;
  for (int j = 0; j < n_; ++j) z += cost_[j] * x_[j];
  return z / objscale_ + offset_;
}

std::vector<double> DualSimplex::primal() const {
  std::vector<double> x(n_);
  for (int j = 0; j < n_; ++j) x[j] = x_[j] * colscale_[j];
  return x;
}

std::vector<double> DualSimplex::reduced_costs() const {
  std::vector<double> d(n_);
  for (int j = 0; j < n_; ++j) d[j] = d_[j] / (objscale_ * colscale_[j]);
  return d;
}

std::vector<double> DualSimplex::row_duals() const {
  Eigen::VectorXd cb(m_);
  for (int i = 0; i < m_; ++i) cb[i] = cost_[head_[i]];
  const Eigen::VectorXd y = binv_.transpose() * cb;
  std::vector<double> out(m_);
  for (int i = 0; i < m_; ++i) out[i] = y[i] * rowscale_[i] / objscale_;
  return out;
}

std::vector<ColumnStatus> DualSimplex::column_status() const {
  return {status_.begin(), status_.begin() + n_};
}

}  // namespace icegrid::solver::detail
