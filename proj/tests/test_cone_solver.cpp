#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <qh/cone_solver.hpp>

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

qh::ConeProblem blank_problem(int dim) {
  qh::ConeProblem p;
  p.dim = dim;
  p.cost = Eigen::VectorXd::Zero(dim);
  p.eq_matrix.resize(0, dim);
  p.eq_rhs.resize(0);
  p.lower = Eigen::VectorXd::Constant(dim, -kInf);
  p.upper = Eigen::VectorXd::Constant(dim, kInf);
  return p;
}

// Appends the row ||coeffs * theta + offset|| <= theta[bound_index] and pins
// the bound variable's lower bound at zero (which the cone implies anyway).
void add_soc(qh::ConeProblem& p, Eigen::MatrixXd coeffs, Eigen::VectorXd offset,
             int bound_index) {
  p.soc_rows.push_back({std::move(coeffs), std::move(offset), bound_index});
  p.lower[bound_index] = std::max(p.lower[bound_index], 0.0);
}

struct Planted {
  qh::ConeProblem problem;
  Eigen::VectorXd theta_star;
  double optimum = 0.0;
};

// Plants an optimum: draws theta*, picks which constraints are active, draws
// the matching multipliers, and back-solves the cost from stationarity
// c = -A' nu - G' z so that (theta*, nu, z) is a KKT point.
Planted make_planted(std::mt19937& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.2, 1.2);
  const int base = 4 + static_cast<int>(rng() % 6);
  const int dim = base + 1;
  const int bound_index = base;

  auto p = blank_problem(dim);
  Eigen::VectorXd theta_star(dim);
  for (int i = 0; i < base; ++i) theta_star[i] = 2.0 * unit(rng);

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(dim);

  const int soc_dim = 2 + static_cast<int>(rng() % 2);
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(soc_dim, dim);
  for (int r = 0; r < soc_dim; ++r)
    for (int c = 0; c < base; ++c) coeffs(r, c) = unit(rng);
  Eigen::VectorXd v(soc_dim);
  do {
    for (int r = 0; r < soc_dim; ++r) v[r] = unit(rng);
  } while (v.norm() < 0.3);
  Eigen::VectorXd offset = v - coeffs * theta_star;

  if (rng() % 2 == 0) {
    // Active cone: theta*_t sits on the boundary, dual z = rho * (||v||, -v).
    theta_star[bound_index] = v.norm();
    const double rho = pos(rng);
    cost[bound_index] += rho * v.norm();
    cost -= rho * (coeffs.transpose() * v);
  } else {
    theta_star[bound_index] = v.norm() + pos(rng);
  }
  add_soc(p, coeffs, offset, bound_index);

  const int n_eq = static_cast<int>(rng() % 3);
  if (n_eq > 0) {
    Eigen::MatrixXd A(n_eq, dim);
    for (int r = 0; r < n_eq; ++r)
      for (int c = 0; c < dim; ++c) A(r, c) = unit(rng);
    p.eq_matrix = A;
    p.eq_rhs = A * theta_star;
    Eigen::VectorXd nu(n_eq);
    for (int r = 0; r < n_eq; ++r) nu[r] = unit(rng);
    cost -= A.transpose() * nu;
  }

  for (int i = 0; i < base; ++i) {
    switch (rng() % 4) {
      case 0: {  // active lower bound, multiplier lam >= 0
        p.lower[i] = theta_star[i];
        cost[i] += pos(rng);
        break;
      }
      case 1: {  // active upper bound
        p.upper[i] = theta_star[i];
        cost[i] -= pos(rng);
        break;
      }
      case 2: {  // slack box around theta*
        p.lower[i] = theta_star[i] - pos(rng);
        p.upper[i] = theta_star[i] + pos(rng);
        break;
      }
      default:  // free variable
        break;
    }
  }

  p.cost = cost;
  return {std::move(p), std::move(theta_star), 0.0};
}

double feasibility_violation(const qh::ConeProblem& p,
                             const Eigen::VectorXd& theta) {
  double viol = 0.0;
  if (p.eq_matrix.rows() > 0)
    viol = (p.eq_matrix * theta - p.eq_rhs).cwiseAbs().maxCoeff();
  for (int i = 0; i < p.dim; ++i) {
    if (std::isfinite(p.lower[i])) viol = std::max(viol, p.lower[i] - theta[i]);
    if (std::isfinite(p.upper[i])) viol = std::max(viol, theta[i] - p.upper[i]);
  }
  for (const auto& row : p.soc_rows) {
    const double lhs = (row.coeffs * theta + row.offset).norm();
    viol = std::max(viol, lhs - theta[row.bound_index]);
  }
  return viol;
}

}  // namespace

TEST_CASE("projection onto a point") {
  auto p = blank_problem(3);
  p.cost[2] = 1.0;
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(2, 3);
  coeffs(0, 0) = 1.0;
  coeffs(1, 1) = 1.0;
  Eigen::VectorXd offset(2);
  offset << -1.0, -2.0;
  add_soc(p, coeffs, offset, 2);

  const auto sol = qh::solve(p);
  REQUIRE(sol.status == qh::SolveStatus::optimal);
  REQUIRE(sol.theta[0] == Catch::Approx(1.0).margin(1e-6));
  REQUIRE(sol.theta[1] == Catch::Approx(2.0).margin(1e-6));
  REQUIRE(std::abs(sol.objective_value) < 1e-6);
}

TEST_CASE("active box bound") {
  auto p = blank_problem(1);
  p.cost[0] = 1.0;
  p.lower[0] = 3.0;
  const auto sol = qh::solve(p);
  REQUIRE(sol.status == qh::SolveStatus::optimal);
  REQUIRE(sol.theta[0] == Catch::Approx(3.0).margin(1e-7));
  REQUIRE(sol.objective_value == Catch::Approx(3.0).margin(1e-7));
}

TEST_CASE("distance to a halfline") {
  auto p = blank_problem(2);
  p.cost[1] = 1.0;
  p.upper[0] = 0.0;
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(1, 2);
  coeffs(0, 0) = 1.0;
  Eigen::VectorXd offset(1);
  offset << -1.0;
  add_soc(p, coeffs, offset, 1);

  const auto sol = qh::solve(p);
  REQUIRE(sol.status == qh::SolveStatus::optimal);
  REQUIRE(sol.theta[0] == Catch::Approx(0.0).margin(1e-6));
  REQUIRE(sol.objective_value == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("equalities and boxes combine") {
  auto p = blank_problem(2);
  p.cost[1] = 1.0;
  p.eq_matrix.resize(1, 2);
  p.eq_matrix << 1.0, 1.0;
  p.eq_rhs.resize(1);
  p.eq_rhs << 2.0;
  p.upper[0] = 1.0;

  const auto sol = qh::solve(p);
  REQUIRE(sol.status == qh::SolveStatus::optimal);
  REQUIRE(sol.theta[0] == Catch::Approx(1.0).margin(1e-6));
  REQUIRE(sol.objective_value == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("projection onto an affine line") {
  // Closest point on theta_1 + theta_2 = 2 to (1, 2), with an inactive bound.
  auto p = blank_problem(3);
  p.cost[2] = 1.0;
  p.eq_matrix.resize(1, 3);
  p.eq_matrix << 1.0, 1.0, 0.0;
  p.eq_rhs.resize(1);
  p.eq_rhs << 2.0;
  p.lower[0] = 0.0;
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(2, 3);
  coeffs(0, 0) = 1.0;
  coeffs(1, 1) = 1.0;
  Eigen::VectorXd offset(2);
  offset << -1.0, -2.0;
  add_soc(p, coeffs, offset, 2);

  const auto sol = qh::solve(p);
  REQUIRE(sol.status == qh::SolveStatus::optimal);
  REQUIRE(sol.theta[0] == Catch::Approx(0.5).margin(1e-6));
  REQUIRE(sol.theta[1] == Catch::Approx(1.5).margin(1e-6));
  REQUIRE(sol.objective_value == Catch::Approx(std::sqrt(0.5)).margin(1e-6));
}

TEST_CASE("pure equality problem") {
  auto p = blank_problem(2);
  p.cost[0] = 1.0;
  p.eq_matrix.resize(2, 2);
  p.eq_matrix << 1.0, 0.0, 0.0, 1.0;
  p.eq_rhs.resize(2);
  p.eq_rhs << 4.0, -1.0;

  const auto sol = qh::solve(p);
  REQUIRE(sol.status == qh::SolveStatus::optimal);
  REQUIRE(sol.theta[0] == Catch::Approx(4.0).margin(1e-6));
  REQUIRE(sol.theta[1] == Catch::Approx(-1.0).margin(1e-6));
}

TEST_CASE("least squares via a cone epigraph") {
  Eigen::MatrixXd r(4, 2);
  r << 1.0, 0.5, -0.3, 1.2, 0.8, -0.7, 0.2, 0.4;
  Eigen::VectorXd d(4);
  d << 1.0, -0.5, 0.3, 0.9;
  const Eigen::VectorXd expected =
      (r.transpose() * r).ldlt().solve(r.transpose() * d);
  const double expected_norm = (r * expected - d).norm();
  REQUIRE(expected_norm > 0.1);  // residual nonzero, so the optimum is unique

  auto p = blank_problem(3);
  p.cost[2] = 1.0;
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(4, 3);
  coeffs.leftCols(2) = r;
  add_soc(p, coeffs, -d, 2);

  const auto sol = qh::solve(p);
  REQUIRE(sol.status == qh::SolveStatus::optimal);
  REQUIRE(sol.theta[0] == Catch::Approx(expected[0]).margin(1e-5));
  REQUIRE(sol.theta[1] == Catch::Approx(expected[1]).margin(1e-5));
  REQUIRE(sol.objective_value == Catch::Approx(expected_norm).margin(1e-6));
}

TEST_CASE("infeasible boxes") {
  auto p = blank_problem(1);
  p.cost[0] = 1.0;
  p.lower[0] = 3.0;
  p.upper[0] = 2.0;
  const auto sol = qh::solve(p);
  REQUIRE(sol.status == qh::SolveStatus::infeasible);
}

TEST_CASE("equality against conflicting box") {
  auto p = blank_problem(2);
  p.cost[1] = 1.0;
  p.eq_matrix.resize(1, 2);
  p.eq_matrix << 1.0, 0.0;
  p.eq_rhs.resize(1);
  p.eq_rhs << 1.0;
  p.lower[0] = 2.0;
  const auto sol = qh::solve(p);
  REQUIRE(sol.status == qh::SolveStatus::infeasible);
}

TEST_CASE("unbounded direction") {
  auto p = blank_problem(2);
  p.cost[0] = 1.0;
  p.upper[0] = 0.0;
  const auto sol = qh::solve(p);
  REQUIRE(sol.status == qh::SolveStatus::unbounded);
}

TEST_CASE("iteration budget exhaustion is reported") {
  auto p = blank_problem(3);
  p.cost[2] = 1.0;
  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(2, 3);
  coeffs(0, 0) = 1.0;
  coeffs(1, 1) = 1.0;
  Eigen::VectorXd offset(2);
  offset << -1.0, -2.0;
  add_soc(p, coeffs, offset, 2);

  const auto sol = qh::solve(p, 1e-8, 0);
  REQUIRE(sol.status == qh::SolveStatus::max_iterations);
  REQUIRE(sol.iterations == 0);
}

TEST_CASE("planted optima are recovered") {
  std::mt19937 rng(4242);
  int active_cone_cases = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto planted = make_planted(rng);
    const double opt = planted.problem.cost.dot(planted.theta_star);
    const auto sol = qh::solve(planted.problem);

    INFO("trial " << trial << " dim " << planted.problem.dim);
    REQUIRE(sol.status == qh::SolveStatus::optimal);
    REQUIRE(sol.objective_value ==
            Catch::Approx(opt).margin(1e-6 * (1.0 + std::abs(opt))));
    REQUIRE(feasibility_violation(planted.problem, sol.theta) < 1e-6);
    REQUIRE(sol.primal_res < 1e-7);
    REQUIRE(sol.dual_res < 1e-7);
    if (planted.problem.cost[planted.problem.dim - 1] > 0.0)
      ++active_cone_cases;
  }
  REQUIRE(active_cone_cases >= 5);  // the coin flips exercised both branches
}

TEST_CASE("identical solves are bit identical") {
  std::mt19937 rng(77);
  const auto planted = make_planted(rng);
  const auto a = qh::solve(planted.problem);
  const auto b = qh::solve(planted.problem);
  REQUIRE(a.status == b.status);
  REQUIRE(a.iterations == b.iterations);
  REQUIRE(a.objective_value == b.objective_value);
  REQUIRE(a.theta.size() == b.theta.size());
  for (int i = 0; i < a.theta.size(); ++i) REQUIRE(a.theta[i] == b.theta[i]);
}

TEST_CASE("cone problem validation") {
  auto p = blank_problem(2);
  p.cost.resize(1);  // wrong length
  REQUIRE_THROWS_AS(qh::solve(p), std::invalid_argument);

  p = blank_problem(2);
  p.eq_matrix.resize(1, 2);
  p.eq_matrix << 1.0, 1.0;
  p.eq_rhs.resize(2);  // mismatched rhs
  p.eq_rhs << 1.0, 2.0;
  REQUIRE_THROWS_AS(qh::solve(p), std::invalid_argument);

  p = blank_problem(2);
  p.soc_rows.push_back(
      {Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1), 5});
  REQUIRE_THROWS_AS(qh::solve(p), std::invalid_argument);

  p = blank_problem(2);
  // Cone bound variable must carry a nonnegative lower bound.
  p.soc_rows.push_back(
      {Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1), 1});
  REQUIRE_THROWS_AS(qh::solve(p), std::invalid_argument);

  p = blank_problem(1);
  p.cost[0] = std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(qh::solve(p), std::invalid_argument);
}
