#pragma once

#include "pelhd/data_matrix.hpp"

#include <Eigen/Core>

#include <optional>

namespace pelhd {

struct PelConfig {
    double c_star = 1.0;
    /// Overrides the default penalty c_star * n / p when set.
    std::optional<double> lambda;
    double newton_tol = 1e-10;
    int max_newton_iters = 100;
    int max_fixed_point_iters = 10000;

    /// Penalty factor for a sample of `n` rows and `p` components.
    double penalty(Eigen::Index n, Eigen::Index p) const;
};

enum class SolverMethod { Trivial, Newton, FixedPoint };

struct PelSolution {
    Eigen::VectorXd pi;     ///< optimal simplex weights
    double stat = 0.0;      ///< -log R_n(mu)
    Eigen::VectorXd m_vec;  ///< sum_i pi_i (X_ij - mu_j)
    int iterations = 0;
    bool converged = false;
    double kkt_residual = 0.0;
    SolverMethod method = SolverMethod::Trivial;
};

/// f(pi) = -sum log(n pi_i) + lambda sum_j delta_j (sum_i pi_i (X_ij - mu_j))^2.
/// Throws DomainError if some pi_i <= 0.
double objective(const Eigen::VectorXd& pi, const DataMatrix& data, const Eigen::VectorXd& mu,
                 const PelConfig& cfg);

/// Max-norm of n pi_k (1 + 2 (lambda/n) (sum_j delta_j M_j Y_kj - sum_j delta_j M_j^2)) - 1,
/// the stationarity system of the criterion on the simplex.
double kkt_residual(const Eigen::VectorXd& pi, const DataMatrix& data, const Eigen::VectorXd& mu,
                    const PelConfig& cfg);

/// Minimizes the PEL criterion over the open simplex.
///
/// Runs an equality-constrained damped Newton method from the uniform weights.
/// If Newton fails to reach `newton_tol`, a damped fixed-point iteration on the
/// Lagrange system continues from the best Newton iterate. Throws
/// ConvergenceError when both budgets are exhausted.
PelSolution solve_pel(const DataMatrix& data, const Eigen::VectorXd& mu, const PelConfig& cfg);

/// -log R_n(mu), the PEL ratio statistic.
double neg_log_pel_ratio(const DataMatrix& data, const Eigen::VectorXd& mu, const PelConfig& cfg);

}  // namespace pelhd
