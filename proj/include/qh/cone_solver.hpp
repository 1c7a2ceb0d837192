#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qh {

// One second-order-cone row: ||coeffs * theta + offset||_2 <= theta[bound_index].
struct SocRow {
  Eigen::MatrixXd coeffs;
  Eigen::VectorXd offset;
  int bound_index = 0;
};

// minimize cost.theta subject to eq_matrix * theta = eq_rhs,
// lower <= theta <= upper entrywise (+-inf allowed), and the soc_rows.
// Every soc row's bound variable must carry a lower bound >= 0.
struct ConeProblem {
  int dim = 0;
  Eigen::VectorXd cost;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<SocRow> soc_rows;
};

enum class SolveStatus { optimal, infeasible, unbounded, max_iterations };

// theta is meaningful when status == optimal; primal/dual residuals are the
// solver's normalized internal measures at the final iterate.
struct ConeSolution {
  Eigen::VectorXd theta;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  double primal_res = std::numeric_limits<double>::quiet_NaN();
  double dual_res = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

struct IpmSettings {
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-8;
  double feastol_inacc = 1e-4;
  double abstol_inacc = 5e-5;
  double reltol_inacc = 5e-5;
  double gamma = 0.99;
  double stepmin = 1e-6;
  double stepmax = 0.999;
  double sigmamin = 1e-4;
  double sigmamax = 1.0;
  int nitref = 9;
  double irerrfact = 6.0;
  double safeguard = 500.0;
  double deltastat = 7e-8;
  double linsysacc = 1e-14;
  int equil_iters = 3;
};

enum class IpmExit {
  optimal,
  optimal_inacc,
  primal_infeasible,
  primal_infeasible_inacc,
  dual_infeasible,
  dual_infeasible_inacc,
  maxit,
  numerics
};

// Primal-dual interior-point method for the self-dual embedding of
//   min c.x  s.t.  A x = b,  G x + s = h,  s in K,
// K a product of a nonnegative orthant and second-order cones, with
// Nesterov-Todd scaling and a Mehrotra predictor-corrector step. The KKT
// system is solved densely by eliminating s and the equality block.
class ConeIpm {
 public:
  ConeIpm(const ConeProblem& problem, double tol_rel, int max_iter)
      : iter_max_(max_iter) {
    settings_.feastol = tol_rel;
    settings_.abstol = tol_rel;
    settings_.reltol = tol_rel;
    build_standard_form(problem);
    equilibrate();
  }

  IpmExit run();

  ConeSolution extract_solution(const ConeProblem& problem, IpmExit code) const {
    ConeSolution sol;
    sol.iterations = info_.iter;
    sol.primal_res = info_.pres;
    sol.dual_res = info_.dres;
    sol.theta = x_.cwiseQuotient(x_equil_ * tau_);
    switch (code) {
      case IpmExit::optimal:
        sol.status = SolveStatus::optimal;
        sol.objective_value = problem.cost.dot(sol.theta);
        break;
      case IpmExit::primal_infeasible:
      case IpmExit::primal_infeasible_inacc:
        sol.status = SolveStatus::infeasible;
        break;
      case IpmExit::dual_infeasible:
      case IpmExit::dual_infeasible_inacc:
        sol.status = SolveStatus::unbounded;
        break;
      default:
        // Reduced-accuracy convergence does not meet the configured
        // tolerances, so it is reported as a non-converged run.
        sol.status = SolveStatus::max_iterations;
        break;
    }
    return sol;
  }

 private:
  struct SocScaling {
    double eta = 1.0;
    double eta_square = 1.0;
    double a = 1.0;
    Eigen::VectorXd q;  // zero at the identity scaling
  };

  struct Information {
    double pcost = 0.0, dcost = 0.0;
    double gap = 0.0, mu = 0.0, kapovert = 0.0;
    double pres = 0.0, dres = 0.0;
    double step = 0.0, sigma = 0.0;
    std::optional<double> relgap, pinfres, dinfres;
    int iter = 0;
  };

  struct Iterate {
    Eigen::VectorXd x, y, z, s;
    double kap = 1.0, tau = 1.0;
    Information i;
  };

  void build_standard_form(const ConeProblem& problem);
  void equilibrate();
  void init();
  Eigen::VectorXd bring_to_cone(const Eigen::VectorXd& r) const;
  bool update_scalings();
  Eigen::VectorXd scale(const Eigen::VectorXd& z) const;      // W z
  Eigen::VectorXd apply_w2(const Eigen::VectorXd& u) const;   // W^2 u
  Eigen::VectorXd solve_w2reg(const Eigen::VectorXd& u) const;
  bool factor_kkt();
  void kkt_solve(const Eigen::VectorXd& bx, const Eigen::VectorXd& by,
                 const Eigen::VectorXd& bz, Eigen::VectorXd& dx,
                 Eigen::VectorXd& dy, Eigen::VectorXd& dz) const;
  Eigen::VectorXd conic_product(const Eigen::VectorXd& u,
                                const Eigen::VectorXd& v) const;
  Eigen::VectorXd conic_division(const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& w) const;
  double line_search(const Eigen::VectorXd& lambda, const Eigen::VectorXd& ds,
                     const Eigen::VectorXd& dz, double tau, double dtau,
                     double kap, double dkap) const;
  void compute_residuals();
  void update_statistics();
  std::optional<IpmExit> check_exit(bool reduced) const;
  static bool is_better_than(const Information& i, const Information& other);
  void save_best();
  void restore_best();

  IpmSettings settings_;
  int iter_max_ = 0;

  // Standard form (equilibrated in place).
  int n_ = 0, p_ = 0, m_ = 0, n_lc_ = 0;
  Eigen::VectorXd c_, b_, h_;
  Eigen::MatrixXd A_, G_;
  std::vector<int> soc_start_, soc_dim_;
  Eigen::VectorXd x_equil_, a_equil_, g_equil_;
  double resx0_ = 1.0, resy0_ = 1.0, resz0_ = 1.0;

  // Iterate.
  Eigen::VectorXd x_, y_, z_, s_, lambda_;
  double kap_ = 1.0, tau_ = 1.0;
  Information info_;
  Iterate best_;
  bool have_best_ = false;
  double pres_prev_ = std::numeric_limits<double>::max();

  // Residuals.
  Eigen::VectorXd rx_, ry_, rz_;
  double rt_ = 0.0;
  double hresx_ = 0.0, hresy_ = 0.0, hresz_ = 0.0;
  double cx_ = 0.0, by_ = 0.0, hz_ = 0.0;
  double nx_ = 0.0, ny_ = 0.0, nz_ = 0.0, ns_ = 0.0;

  // Scalings and factorization.
  bool identity_scaling_ = true;
  Eigen::ArrayXd lp_v_;  // W^2 diagonal on the orthant block
  std::vector<SocScaling> soc_scalings_;
  Eigen::ArrayXd lp_w2reg_;
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> soc_fac_;
  Eigen::LDLT<Eigen::MatrixXd> h_fac_;
  Eigen::LDLT<Eigen::MatrixXd> s_fac_;
};

inline void ConeIpm::build_standard_form(const ConeProblem& problem) {
  const int dim = problem.dim;
  if (dim < 1) throw std::invalid_argument("cone problem: dim must be >= 1");
  if (problem.cost.size() != dim || !problem.cost.allFinite())
    throw std::invalid_argument("cone problem: cost must be finite of length dim");
  if (problem.eq_matrix.rows() != problem.eq_rhs.size())
    throw std::invalid_argument("cone problem: equality rhs length mismatch");
  if (problem.eq_matrix.rows() > 0 &&
      (problem.eq_matrix.cols() != dim || !problem.eq_matrix.allFinite() ||
       !problem.eq_rhs.allFinite()))
    throw std::invalid_argument("cone problem: equality block malformed");
  if (problem.lower.size() != dim || problem.upper.size() != dim)
    throw std::invalid_argument("cone problem: bounds must have length dim");
  if (problem.lower.hasNaN() || problem.upper.hasNaN())
    throw std::invalid_argument("cone problem: bounds must not be NaN");
  for (const auto& row : problem.soc_rows) {
    if (row.coeffs.rows() < 1 || row.coeffs.cols() != dim ||
        row.offset.size() != row.coeffs.rows() || !row.coeffs.allFinite() ||
        !row.offset.allFinite())
      throw std::invalid_argument("cone problem: soc row malformed");
    if (row.bound_index < 0 || row.bound_index >= dim)
      throw std::invalid_argument("cone problem: soc bound index out of range");
    if (!(problem.lower[row.bound_index] >= 0.0))
      throw std::invalid_argument(
          "cone problem: soc bound variable needs a lower bound >= 0");
  }

  n_ = dim;
  p_ = static_cast<int>(problem.eq_matrix.rows());
  A_ = problem.eq_matrix;
  if (A_.cols() != n_) A_.resize(p_, n_);
  b_ = problem.eq_rhs;
  c_ = problem.cost;

  int n_lb = 0, n_ub = 0;
  for (int i = 0; i < dim; ++i) {
    if (std::isfinite(problem.lower[i])) ++n_lb;
    if (std::isfinite(problem.upper[i])) ++n_ub;
  }
  const bool pad = (n_lb + n_ub == 0) && problem.soc_rows.empty();
  n_lc_ = n_lb + n_ub + (pad ? 1 : 0);

  int m = n_lc_;
  for (const auto& row : problem.soc_rows) {
    soc_start_.push_back(m);
    soc_dim_.push_back(static_cast<int>(row.coeffs.rows()) + 1);
    m += soc_dim_.back();
  }
  m_ = m;

  G_ = Eigen::MatrixXd::Zero(m_, n_);
  h_ = Eigen::VectorXd::Zero(m_);
  int r = 0;
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(problem.lower[i])) continue;
    G_(r, i) = -1.0;
    h_[r] = -problem.lower[i];
    ++r;
  }
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(problem.upper[i])) continue;
    G_(r, i) = 1.0;
    h_[r] = problem.upper[i];
    ++r;
  }
  if (pad) h_[r++] = 1.0;
  for (std::size_t j = 0; j < problem.soc_rows.size(); ++j) {
    const auto& row = problem.soc_rows[j];
    G_(r, row.bound_index) = -1.0;
    h_[r] = 0.0;
    ++r;
    G_.middleRows(r, row.coeffs.rows()) = -row.coeffs;
    h_.segment(r, row.offset.size()) = row.offset;
    r += static_cast<int>(row.coeffs.rows());
  }
}

inline void ConeIpm::equilibrate() {
  x_equil_ = Eigen::VectorXd::Ones(n_);
  a_equil_ = Eigen::VectorXd::Ones(p_);
  g_equil_ = Eigen::VectorXd::Ones(m_);
  const auto sqrt_op = [](double v) {
    return std::abs(v) < 1e-6 ? 1.0 : std::sqrt(v);
  };
  for (int pass = 0; pass < settings_.equil_iters; ++pass) {
    Eigen::VectorXd x_tmp = Eigen::VectorXd::Zero(n_);
    Eigen::VectorXd a_tmp = Eigen::VectorXd::Zero(p_);
    Eigen::VectorXd g_tmp = Eigen::VectorXd::Zero(m_);
    for (int cc = 0; cc < n_; ++cc) {
      double v = G_.col(cc).cwiseAbs().maxCoeff();
      if (p_ > 0) v = std::max(v, A_.col(cc).cwiseAbs().maxCoeff());
      x_tmp[cc] = v;
    }
    for (int rr = 0; rr < p_; ++rr) a_tmp[rr] = A_.row(rr).cwiseAbs().maxCoeff();
    for (int rr = 0; rr < m_; ++rr) g_tmp[rr] = G_.row(rr).cwiseAbs().maxCoeff();
    // A second-order cone block is scaled uniformly to keep it a cone.
    for (std::size_t j = 0; j < soc_dim_.size(); ++j) {
      const double total = g_tmp.segment(soc_start_[j], soc_dim_[j]).sum();
      g_tmp.segment(soc_start_[j], soc_dim_[j]).setConstant(total);
    }
    x_tmp = x_tmp.unaryExpr(sqrt_op);
    a_tmp = a_tmp.unaryExpr(sqrt_op);
    g_tmp = g_tmp.unaryExpr(sqrt_op);
    for (int rr = 0; rr < p_; ++rr)
      for (int cc = 0; cc < n_; ++cc) A_(rr, cc) /= a_tmp[rr] * x_tmp[cc];
    for (int rr = 0; rr < m_; ++rr)
      for (int cc = 0; cc < n_; ++cc) G_(rr, cc) /= g_tmp[rr] * x_tmp[cc];
    x_equil_ = x_equil_.cwiseProduct(x_tmp);
    a_equil_ = a_equil_.cwiseProduct(a_tmp);
    g_equil_ = g_equil_.cwiseProduct(g_tmp);
  }
  c_ = c_.cwiseQuotient(x_equil_);
  b_ = b_.cwiseQuotient(a_equil_);
  h_ = h_.cwiseQuotient(g_equil_);
  resx0_ = std::max(1.0, c_.norm());
  resy0_ = std::max(1.0, b_.norm());
  resz0_ = std::max(1.0, h_.norm());
}

inline Eigen::VectorXd ConeIpm::bring_to_cone(const Eigen::VectorXd& r) const {
  double alpha = -settings_.gamma;
  for (int i = 0; i < n_lc_; ++i)
    if (r[i] <= 0.0 && -r[i] > alpha) alpha = -r[i];
  for (std::size_t j = 0; j < soc_dim_.size(); ++j) {
    const double cres =
        r[soc_start_[j]] - r.segment(soc_start_[j] + 1, soc_dim_[j] - 1).norm();
    if (cres <= 0.0 && -cres > alpha) alpha = -cres;
  }
  alpha += 1.0;
  Eigen::VectorXd s = r;
  s.head(n_lc_).array() += alpha;
  for (std::size_t j = 0; j < soc_dim_.size(); ++j) s[soc_start_[j]] += alpha;
  return s;
}

inline bool ConeIpm::update_scalings() {
  lp_v_ = s_.head(n_lc_).array() / z_.head(n_lc_).array();
  soc_scalings_.assign(soc_dim_.size(), SocScaling{});
  for (std::size_t j = 0; j < soc_dim_.size(); ++j) {
    const int start = soc_start_[j];
    const int d = soc_dim_[j];
    const auto sseg = s_.segment(start, d);
    const auto zseg = z_.segment(start, d);
    const double sres = sseg[0] * sseg[0] - sseg.tail(d - 1).squaredNorm();
    const double zres = zseg[0] * zseg[0] - zseg.tail(d - 1).squaredNorm();
    if (sres <= 0.0 || zres <= 0.0) return false;
    const double snorm = std::sqrt(sres);
    const double znorm = std::sqrt(zres);
    const Eigen::VectorXd skbar = sseg / snorm;
    const Eigen::VectorXd zkbar = zseg / znorm;
    auto& sc = soc_scalings_[j];
    sc.eta_square = snorm / znorm;
    sc.eta = std::sqrt(sc.eta_square);
    const double gamma = std::sqrt(0.5 * (1.0 + skbar.dot(zkbar)));
    sc.a = (0.5 / gamma) * (skbar[0] + zkbar[0]);
    sc.q = (0.5 / gamma) * (skbar.tail(d - 1) - zkbar.tail(d - 1));
  }
  identity_scaling_ = false;
  lambda_ = scale(z_);
  return true;
}

inline Eigen::VectorXd ConeIpm::scale(const Eigen::VectorXd& z) const {
  Eigen::VectorXd lambda(m_);
  if (identity_scaling_) return z;
  lambda.head(n_lc_) = lp_v_.sqrt() * z.head(n_lc_).array();
  for (std::size_t j = 0; j < soc_dim_.size(); ++j) {
    const int start = soc_start_[j];
    const int d = soc_dim_[j];
    const auto& sc = soc_scalings_[j];
    const auto zseg = z.segment(start, d);
    const double zeta = sc.q.dot(zseg.tail(d - 1));
    const double factor = zseg[0] + zeta / (1.0 + sc.a);
    lambda[start] = sc.eta * (sc.a * zseg[0] + zeta);
    lambda.segment(start + 1, d - 1) =
        sc.eta * (zseg.tail(d - 1) + factor * sc.q);
  }
  return lambda;
}

inline Eigen::VectorXd ConeIpm::apply_w2(const Eigen::VectorXd& u) const {
  if (identity_scaling_) return u;
  Eigen::VectorXd out(m_);
  out.head(n_lc_) = lp_v_ * u.head(n_lc_).array();
  for (std::size_t j = 0; j < soc_dim_.size(); ++j) {
    const int start = soc_start_[j];
    const int d = soc_dim_[j];
    const auto& sc = soc_scalings_[j];
    const auto useg = u.segment(start, d);
    // W^2 = eta^2 (2 wbar wbar' - J), wbar = (a; q).
    const double wtu = sc.a * useg[0] + sc.q.dot(useg.tail(d - 1));
    out[start] = sc.eta_square * (2.0 * sc.a * wtu - useg[0]);
    out.segment(start + 1, d - 1) =
        sc.eta_square * (2.0 * wtu * sc.q + useg.tail(d - 1));
  }
  return out;
}

inline Eigen::VectorXd ConeIpm::solve_w2reg(const Eigen::VectorXd& u) const {
  Eigen::VectorXd out(m_);
  out.head(n_lc_) = u.head(n_lc_).array() / lp_w2reg_;
  for (std::size_t j = 0; j < soc_dim_.size(); ++j)
    out.segment(soc_start_[j], soc_dim_[j]) =
        soc_fac_[j].solve(u.segment(soc_start_[j], soc_dim_[j]));
  return out;
}

inline bool ConeIpm::factor_kkt() {
  const double delta = settings_.deltastat;
  lp_w2reg_ = (identity_scaling_ ? Eigen::ArrayXd::Ones(n_lc_).eval() : lp_v_) + delta;
  soc_fac_.assign(soc_dim_.size(), Eigen::LDLT<Eigen::MatrixXd>());
  for (std::size_t j = 0; j < soc_dim_.size(); ++j) {
    const int d = soc_dim_[j];
    Eigen::MatrixXd blk;
    if (identity_scaling_) {
      blk = Eigen::MatrixXd::Identity(d, d);
    } else {
      const auto& sc = soc_scalings_[j];
      Eigen::VectorXd wbar(d);
      wbar[0] = sc.a;
      wbar.tail(d - 1) = sc.q;
      blk = (2.0 * sc.eta_square) * (wbar * wbar.transpose());
      blk(0, 0) -= sc.eta_square;
      blk.diagonal().tail(d - 1).array() += sc.eta_square;
    }
    blk.diagonal().array() += delta;
    soc_fac_[j].compute(blk);
    if (soc_fac_[j].info() != Eigen::Success) return false;
  }
  Eigen::MatrixXd winv2g(m_, n_);
  for (int i = 0; i < n_lc_; ++i) winv2g.row(i) = G_.row(i) / lp_w2reg_[i];
  for (std::size_t j = 0; j < soc_dim_.size(); ++j)
    winv2g.middleRows(soc_start_[j], soc_dim_[j]) =
        soc_fac_[j].solve(G_.middleRows(soc_start_[j], soc_dim_[j]));
  Eigen::MatrixXd hmat(n_, n_);
  hmat.noalias() = G_.transpose() * winv2g;
  hmat.diagonal().array() += delta;
  h_fac_.compute(hmat);
  if (h_fac_.info() != Eigen::Success) return false;
  if (p_ > 0) {
    const Eigen::MatrixXd ahinv_at = h_fac_.solve(A_.transpose());
    Eigen::MatrixXd smat(p_, p_);
    smat.noalias() = A_ * ahinv_at;
    smat.diagonal().array() += delta;
    s_fac_.compute(smat);
    if (s_fac_.info() != Eigen::Success) return false;
  }
  return true;
}

inline void ConeIpm::kkt_solve(const Eigen::VectorXd& bx,
                               const Eigen::VectorXd& by,
                               const Eigen::VectorXd& bz, Eigen::VectorXd& dx,
                               Eigen::VectorXd& dy, Eigen::VectorXd& dz) const {
  const double delta = settings_.deltastat;
  const auto condensed = [&](const Eigen::VectorXd& ex, const Eigen::VectorXd& ey,
                             const Eigen::VectorXd& ez, Eigen::VectorXd& ox,
                             Eigen::VectorXd& oy, Eigen::VectorXd& oz) {
    Eigen::VectorXd r = ex + G_.transpose() * solve_w2reg(ez);
    if (p_ > 0) {
      const Eigen::VectorXd hr = h_fac_.solve(r);
      oy = s_fac_.solve(A_ * hr - ey);
      ox = h_fac_.solve(r - A_.transpose() * oy);
    } else {
      oy.resize(0);
      ox = h_fac_.solve(r);
    }
    oz = solve_w2reg(G_ * ox - ez);
  };
  condensed(bx, by, bz, dx, dy, dz);

  const double threshold =
      (1.0 + std::max({bx.lpNorm<Eigen::Infinity>(),
                       p_ > 0 ? by.lpNorm<Eigen::Infinity>() : 0.0,
                       bz.lpNorm<Eigen::Infinity>()})) *
      settings_.linsysacc;
  double nerr_prev = 0.0;
  Eigen::VectorXd cx, cy, cz;
  for (int k_ref = 0;; ++k_ref) {
    // Residuals of the statically regularized system; refinement removes the
    // error introduced by the condensed elimination.
    Eigen::VectorXd ex = bx - G_.transpose() * dz - delta * dx;
    if (p_ > 0) ex -= A_.transpose() * dy;
    Eigen::VectorXd ey;
    if (p_ > 0) ey = by - A_ * dx + delta * dy;
    Eigen::VectorXd ez = bz - G_ * dx + apply_w2(dz) + delta * dz;
    double nerr = std::max(ex.lpNorm<Eigen::Infinity>(),
                           ez.lpNorm<Eigen::Infinity>());
    if (p_ > 0) nerr = std::max(nerr, ey.lpNorm<Eigen::Infinity>());
    if (k_ref > 0 && nerr > nerr_prev) {
      dx -= cx;
      if (p_ > 0) dy -= cy;
      dz -= cz;
      break;
    }
    if (k_ref == settings_.nitref || nerr < threshold ||
        (k_ref > 0 && nerr_prev < settings_.irerrfact * nerr))
      break;
    nerr_prev = nerr;
    condensed(ex, p_ > 0 ? ey : Eigen::VectorXd(), ez, cx, cy, cz);
    dx += cx;
    if (p_ > 0) dy += cy;
    dz += cz;
  }
}

inline Eigen::VectorXd ConeIpm::conic_product(const Eigen::VectorXd& u,
                                              const Eigen::VectorXd& v) const {
  Eigen::VectorXd w(m_);
  w.head(n_lc_) = u.head(n_lc_).cwiseProduct(v.head(n_lc_));
  for (std::size_t j = 0; j < soc_dim_.size(); ++j) {
    const int start = soc_start_[j];
    const int d = soc_dim_[j];
    const auto useg = u.segment(start, d);
    const auto vseg = v.segment(start, d);
    w[start] = useg.dot(vseg);
    w.segment(start + 1, d - 1) =
        useg[0] * vseg.tail(d - 1) + vseg[0] * useg.tail(d - 1);
  }
  return w;
}

inline Eigen::VectorXd ConeIpm::conic_division(const Eigen::VectorXd& u,
                                               const Eigen::VectorXd& w) const {
  Eigen::VectorXd v(m_);
  v.head(n_lc_) = w.head(n_lc_).cwiseQuotient(u.head(n_lc_));
  for (std::size_t j = 0; j < soc_dim_.size(); ++j) {
    const int start = soc_start_[j];
    const int d = soc_dim_[j];
    const auto useg = u.segment(start, d);
    const auto wseg = w.segment(start, d);
    const double rho = useg[0] * useg[0] - useg.tail(d - 1).squaredNorm();
    const double zeta = useg.tail(d - 1).dot(wseg.tail(d - 1));
    const double factor = (zeta / useg[0] - wseg[0]) / rho;
    v[start] = (useg[0] * wseg[0] - zeta) / rho;
    v.segment(start + 1, d - 1) =
        factor * useg.tail(d - 1) + wseg.tail(d - 1) / useg[0];
  }
  return v;
}

inline double ConeIpm::line_search(const Eigen::VectorXd& lambda,
                                   const Eigen::VectorXd& ds,
                                   const Eigen::VectorXd& dz, double tau,
                                   double dtau, double kap, double dkap) const {
  double alpha;
  if (n_lc_ > 0) {
    const double rhomin =
        (ds.head(n_lc_).array() / lambda.head(n_lc_).array()).minCoeff();
    const double sigmamin =
        (dz.head(n_lc_).array() / lambda.head(n_lc_).array()).minCoeff();
    const double eps = 1e-13;
    if (-sigmamin > -rhomin)
      alpha = sigmamin < 0.0 ? 1.0 / (-sigmamin) : 1.0 / eps;
    else
      alpha = rhomin < 0.0 ? 1.0 / (-rhomin) : 1.0 / eps;
  } else {
    alpha = 10.0;
  }
  if (-tau / dtau > 0.0 && -tau / dtau < alpha) alpha = -tau / dtau;
  if (-kap / dkap > 0.0 && -kap / dkap < alpha) alpha = -kap / dkap;
  for (std::size_t j = 0; j < soc_dim_.size(); ++j) {
    const int start = soc_start_[j];
    const int d = soc_dim_[j];
    const auto lseg = lambda.segment(start, d);
    const auto dsseg = ds.segment(start, d);
    const auto dzseg = dz.segment(start, d);
    const double lknorm2 =
        lseg[0] * lseg[0] - lseg.tail(d - 1).squaredNorm();
    if (lknorm2 <= 0.0) continue;
    const double lknorm = std::sqrt(lknorm2);
    const Eigen::VectorXd lkbar = lseg / lknorm;
    const double lkbar_ds =
        lkbar[0] * dsseg[0] - lkbar.tail(d - 1).dot(dsseg.tail(d - 1));
    const double lkbar_dz =
        lkbar[0] * dzseg[0] - lkbar.tail(d - 1).dot(dzseg.tail(d - 1));
    const double rho0 = lkbar_ds / lknorm;
    const double sigma0 = lkbar_dz / lknorm;
    const Eigen::VectorXd rho_tail =
        (dsseg.tail(d - 1) -
         ((lkbar_ds + dsseg[0]) / (lkbar[0] + 1.0)) * lkbar.tail(d - 1)) /
        lknorm;
    const Eigen::VectorXd sigma_tail =
        (dzseg.tail(d - 1) -
         ((lkbar_dz + dzseg[0]) / (lkbar[0] + 1.0)) * lkbar.tail(d - 1)) /
        lknorm;
    const double rhonorm = rho_tail.norm() - rho0;
    const double sigmanorm = sigma_tail.norm() - sigma0;
    const double conic_step = std::max({0.0, rhonorm, sigmanorm});
    if (conic_step != 0.0) alpha = std::min(1.0 / conic_step, alpha);
  }
  return std::clamp(alpha, settings_.stepmin, settings_.stepmax);
}

inline void ConeIpm::compute_residuals() {
  rx_ = -(G_.transpose() * z_);
  if (p_ > 0) rx_ -= A_.transpose() * y_;
  hresx_ = rx_.norm();
  rx_ -= tau_ * c_;
  nx_ = x_.norm();

  if (p_ > 0) {
    ry_ = A_ * x_;
    hresy_ = ry_.norm();
    ry_ -= tau_ * b_;
  } else {
    ry_.resize(0);
    hresy_ = 0.0;
  }

  rz_ = s_ + G_ * x_;
  hresz_ = rz_.norm();
  rz_ -= tau_ * h_;

  cx_ = c_.dot(x_);
  by_ = p_ > 0 ? b_.dot(y_) : 0.0;
  hz_ = h_.dot(z_);
  rt_ = kap_ + cx_ + by_ + hz_;

  ny_ = y_.norm();
  nz_ = z_.norm();
  ns_ = s_.norm();
}

inline void ConeIpm::update_statistics() {
  auto& i = info_;
  i.gap = s_.dot(z_);
  i.mu = (i.gap + kap_ * tau_) /
         (n_lc_ + static_cast<int>(soc_dim_.size()) + 1);
  i.kapovert = kap_ / tau_;
  i.pcost = cx_ / tau_;
  i.dcost = -(hz_ + by_) / tau_;
  if (i.pcost < 0.0)
    i.relgap = i.gap / (-i.pcost);
  else if (i.dcost > 0.0)
    i.relgap = i.gap / i.dcost;
  else
    i.relgap.reset();
  const double nry = p_ > 0 ? ry_.norm() : 0.0;
  const double nrz = rz_.norm();
  i.pres = std::max(nry / std::max(resy0_ + nx_, 1.0),
                    nrz / std::max(resz0_ + nx_ + ns_, 1.0)) /
           tau_;
  i.dres = rx_.norm() / std::max(resx0_ + ny_ + nz_, 1.0) / tau_;
  i.pinfres.reset();
  if ((hz_ + by_) / std::max(ny_ + nz_, 1.0) < -settings_.reltol)
    i.pinfres = hresx_ / std::max(ny_ + nz_, 1.0);
  i.dinfres.reset();
  if (cx_ / std::max(nx_, 1.0) < -settings_.reltol)
    i.dinfres = std::max(hresy_ / std::max(nx_, 1.0),
                         hresz_ / std::max(nx_ + ns_, 1.0));
}

inline std::optional<IpmExit> ConeIpm::check_exit(bool reduced) const {
  const double feastol = reduced ? settings_.feastol_inacc : settings_.feastol;
  const double abstol = reduced ? settings_.abstol_inacc : settings_.abstol;
  const double reltol = reduced ? settings_.reltol_inacc : settings_.reltol;
  const auto& i = info_;
  const bool gap_ok =
      i.gap < abstol || (i.relgap.has_value() && *i.relgap < reltol);
  if ((-cx_ > 0.0 || -by_ - hz_ >= -abstol) && i.pres < feastol &&
      i.dres < feastol && gap_ok)
    return reduced ? IpmExit::optimal_inacc : IpmExit::optimal;
  if (i.pinfres.has_value() && *i.pinfres < feastol &&
      (tau_ < kap_ || (tau_ < feastol && kap_ < feastol)))
    return reduced ? IpmExit::primal_infeasible_inacc
                   : IpmExit::primal_infeasible;
  if (i.dinfres.has_value() && *i.dinfres < feastol && tau_ < kap_)
    return reduced ? IpmExit::dual_infeasible_inacc : IpmExit::dual_infeasible;
  return std::nullopt;
}

inline bool ConeIpm::is_better_than(const Information& i,
                                    const Information& other) {
  if (i.pinfres.has_value() && i.kapovert > 1.0) {
    if (other.pinfres.has_value())
      return i.gap > 0.0 && other.gap > 0.0 && i.gap < other.gap &&
             *i.pinfres > 0.0 && *i.pinfres < other.pres && i.mu > 0.0 &&
             i.mu < other.mu;
    return i.gap > 0.0 && other.gap > 0.0 && i.gap < other.gap && i.mu > 0.0 &&
           i.mu < other.mu;
  }
  return i.gap > 0.0 && other.gap > 0.0 && i.gap < other.gap && i.pres > 0.0 &&
         i.pres < other.pres && i.dres > 0.0 && i.dres < other.dres &&
         i.kapovert > 0.0 && i.kapovert < other.kapovert && i.mu > 0.0 &&
         i.mu < other.mu;
}

inline void ConeIpm::save_best() {
  best_.x = x_;
  best_.y = y_;
  best_.z = z_;
  best_.s = s_;
  best_.kap = kap_;
  best_.tau = tau_;
  best_.i = info_;
  have_best_ = true;
}

inline void ConeIpm::restore_best() {
  if (!have_best_) return;
  x_ = best_.x;
  y_ = best_.y;
  z_ = best_.z;
  s_ = best_.s;
  kap_ = best_.kap;
  tau_ = best_.tau;
  info_ = best_.i;
}

inline void ConeIpm::init() {
  identity_scaling_ = true;
  lp_v_ = Eigen::ArrayXd::Ones(n_lc_);
  soc_scalings_.assign(soc_dim_.size(), SocScaling{});
  if (!factor_kkt())
    throw std::runtime_error("cone solver: initial factorization failed");

  Eigen::VectorXd dx, dy, dz;
  kkt_solve(Eigen::VectorXd::Zero(n_), b_, h_, dx, dy, dz);
  x_ = dx;
  s_ = bring_to_cone(-dz);
  kkt_solve(-c_, Eigen::VectorXd::Zero(p_), Eigen::VectorXd::Zero(m_), dx, dy,
            dz);
  y_ = p_ > 0 ? dy : Eigen::VectorXd(0);
  z_ = bring_to_cone(dz);
  kap_ = 1.0;
  tau_ = 1.0;
  info_ = Information{};
  pres_prev_ = std::numeric_limits<double>::max();
  have_best_ = false;
}

inline IpmExit ConeIpm::run() {
  init();
  Eigen::VectorXd dx1, dy1, dz1, dx2, dy2, dz2;
  while (true) {
    compute_residuals();
    update_statistics();

    if (info_.iter > 0 &&
        (info_.pres > settings_.safeguard * pres_prev_ || info_.gap < 0.0)) {
      restore_best();
      if (auto code = check_exit(true)) return *code;
      return IpmExit::numerics;
    }
    pres_prev_ = info_.pres;

    if (auto code = check_exit(false)) return *code;

    if (info_.iter > 0 && info_.step == settings_.stepmin * settings_.gamma) {
      restore_best();
      if (auto code = check_exit(true)) return *code;
      return IpmExit::numerics;
    }
    if (info_.iter == iter_max_) {
      if (have_best_ && !is_better_than(info_, best_.i)) restore_best();
      if (auto code = check_exit(true)) return *code;
      return IpmExit::maxit;
    }
    if (std::isnan(info_.pcost)) {
      if (have_best_ && !is_better_than(info_, best_.i)) restore_best();
      if (auto code = check_exit(true)) return *code;
      return IpmExit::numerics;
    }

    if (info_.iter == 0 || is_better_than(info_, best_.i)) save_best();

    if (!update_scalings()) {
      restore_best();
      if (auto code = check_exit(true)) return *code;
      return IpmExit::numerics;
    }
    if (!factor_kkt()) {
      restore_best();
      if (auto code = check_exit(true)) return *code;
      return IpmExit::numerics;
    }

    kkt_solve(-c_, b_, h_, dx1, dy1, dz1);
    kkt_solve(rx_, p_ > 0 ? Eigen::VectorXd(-ry_) : Eigen::VectorXd(0),
              s_ - rz_, dx2, dy2, dz2);

    const double dtau_denom = kap_ / tau_ - c_.dot(dx1) -
                              (p_ > 0 ? b_.dot(dy1) : 0.0) - h_.dot(dz1);
    const double dtauaff =
        (rt_ - kap_ + c_.dot(dx2) + (p_ > 0 ? b_.dot(dy2) : 0.0) +
         h_.dot(dz2)) /
        dtau_denom;
    dz2 += dtauaff * dz1;
    const Eigen::VectorXd w_dzaff = scale(dz2);
    Eigen::VectorXd dsaff_by_w = -w_dzaff - lambda_;
    const double dkapaff = -kap_ - (kap_ / tau_) * dtauaff;
    const double step_aff =
        line_search(lambda_, dsaff_by_w, w_dzaff, tau_, dtauaff, kap_, dkapaff);
    const double sigma =
        std::clamp(std::pow(1.0 - step_aff, 3), settings_.sigmamin,
                   settings_.sigmamax);
    info_.sigma = sigma;

    Eigen::VectorXd ds = conic_product(lambda_, lambda_) +
                         conic_product(dsaff_by_w, w_dzaff);
    const double sigma_mu = sigma * info_.mu;
    ds.head(n_lc_).array() -= sigma_mu;
    for (std::size_t j = 0; j < soc_dim_.size(); ++j)
      ds[soc_start_[j]] -= sigma_mu;
    dsaff_by_w = conic_division(lambda_, ds);
    const Eigen::VectorXd w_ds = scale(dsaff_by_w);

    const double one_minus_sigma = 1.0 - sigma;
    kkt_solve(one_minus_sigma * rx_,
              p_ > 0 ? Eigen::VectorXd(-one_minus_sigma * ry_)
                     : Eigen::VectorXd(0),
              -one_minus_sigma * rz_ + w_ds, dx2, dy2, dz2);

    const double bkap = kap_ * tau_ + dkapaff * dtauaff - sigma_mu;
    const double dtau = (one_minus_sigma * rt_ - bkap / tau_ + c_.dot(dx2) +
                         (p_ > 0 ? b_.dot(dy2) : 0.0) + h_.dot(dz2)) /
                        dtau_denom;
    dx2 += dtau * dx1;
    if (p_ > 0) dy2 += dtau * dy1;
    dz2 += dtau * dz1;
    const Eigen::VectorXd w_dz = scale(dz2);
    dsaff_by_w = -(dsaff_by_w + w_dz);
    const double dkap = -(bkap + kap_ * dtau) / tau_;
    info_.step = settings_.gamma * line_search(lambda_, dsaff_by_w, w_dz, tau_,
                                               dtau, kap_, dkap);
    const Eigen::VectorXd ds_step = scale(dsaff_by_w);

    x_ += info_.step * dx2;
    if (p_ > 0) y_ += info_.step * dy2;
    z_ += info_.step * dz2;
    s_ += info_.step * ds_step;
    kap_ += info_.step * dkap;
    tau_ += info_.step * dtau;
    ++info_.iter;
  }
}

}  // namespace detail

// Dense interior-point solve; deterministic for identical inputs. status ==
// optimal guarantees the returned residuals meet tol_rel; reduced-accuracy
// stops are reported as max_iterations.
inline ConeSolution solve(const ConeProblem& problem, double tol_rel = 1e-8,
                          int max_iter = 50000) {
  if (!(tol_rel > 0.0) || max_iter < 0)
    throw std::invalid_argument("cone solver: bad tolerance or budget");
  detail::ConeIpm ipm(problem, tol_rel, max_iter);
  const detail::IpmExit code = ipm.run();
  return ipm.extract_solution(problem, code);
}

}  // namespace qh
