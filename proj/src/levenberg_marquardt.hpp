#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace clockinterf::detail {

struct LmResult {
    Eigen::VectorXd params;
    Eigen::VectorXd residuals;  // model - data at `params`
    Eigen::MatrixXd jacobian;
    double cost = 0.0;  // sum of squared residuals
    int iterations = 0;
    bool converged = false;
};

// Levenberg-Marquardt with Marquardt diagonal scaling. `evaluate(p, r, J)`
// fills residuals r = model(p) - data and the Jacobian d model / d p.
template <typename Evaluate>
LmResult levenberg_marquardt(Evaluate&& evaluate, Eigen::VectorXd params, int max_iterations,
                             double step_tolerance = 1e-14) {
    LmResult out;
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    evaluate(params, r, jac);
    double cost = r.squaredNorm();
    double lambda = 1e-3;

    Eigen::VectorXd trial_r;
    Eigen::MatrixXd trial_jac;
    for (int it = 1; it <= max_iterations; ++it) {
        out.iterations = it;
        if (cost == 0.0) {
            out.converged = true;
            break;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd gradient = jac.transpose() * r;

        bool accepted = false;
        while (lambda < 1e16) {
            Eigen::MatrixXd damped = jtj;
            for (Eigen::Index i = 0; i < damped.rows(); ++i) {
                damped(i, i) += lambda * std::max(jtj(i, i), std::numeric_limits<double>::min());
            }
            const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
            const Eigen::VectorXd trial = params + step;
            evaluate(trial, trial_r, trial_jac);
            const double trial_cost = trial_r.squaredNorm();
            if (std::isfinite(trial_cost) && trial_cost <= cost) {
                const bool tiny =
                    (step.array().abs() <= step_tolerance * (params.array().abs() + step_tolerance)).all();
                params = trial;
                r.swap(trial_r);
                jac.swap(trial_jac);
                const bool stalled = trial_cost == cost;
                cost = trial_cost;
                lambda = std::max(lambda * 0.1, 1e-12);
                accepted = true;
                if (tiny || stalled) out.converged = true;
                break;
            }
            lambda *= 10.0;
        }
        // No downhill step at any damping: the current point is a minimum to
        // working precision.
        if (!accepted) out.converged = true;
        if (out.converged) break;
    }

    out.params = std::move(params);
    out.residuals = std::move(r);
    out.jacobian = std::move(jac);
    out.cost = cost;
    return out;
}

}  // namespace clockinterf::detail
