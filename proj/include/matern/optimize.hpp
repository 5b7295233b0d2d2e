#pragma once

// Box-constrained quasi-Newton minimization (projected BFGS with a
// backtracking line search along the projection arc).

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace matern {

/// Objective callback. When `grad` is non-null it must be filled.
/// Throwing matern::Error marks the point as infeasible (treated as +inf).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct OptimOptions {
    int max_iter = 500;
    double gtol = 1e-6;   // projected gradient 2-norm
    double ftol = 1e-10;  // relative objective change
    double max_step = 2.0;  // cap on the first trial step (infinity norm)
};

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd grad;
    double proj_grad_norm = 0.0;
    bool converged = false;
    bool at_bound = false;
    int iterations = 0;
    int n_evals = 0;
    std::string message;
};

/// Minimize f over lower <= x <= upper starting from x0 (projected into the box).
OptimResult minimize_box(const Objective& f, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                         Eigen::VectorXd x0, const OptimOptions& options = {});

/// Gradient with components that point out of the box at active bounds removed.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                   const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

}  // namespace matern
