#pragma once

#include "tauleap/model.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>

namespace tauleap {

struct NewtonConfig {
    double tol = 1e-8;
    int max_iter = 50;
    double damping = 0.5;
    int max_halvings = 10;
};

enum class NewtonStatus { converged, max_iterations, singular_jacobian, stagnated, non_finite };

std::string newton_status_name(NewtonStatus s);
void validate(const NewtonConfig& cfg);

struct NewtonOutcome {
    Vec solution;
    int iterations = 0;
    bool converged = false;
    double final_residual_norm = 0.0;
    NewtonStatus status = NewtonStatus::converged;
    std::string diagnostic;
};

// Reusable buffers so the per-step solve does not allocate.
struct NewtonWorkspace {
    Vec r, dx, trial, r_trial;
    Mat J;
    Eigen::PartialPivLU<Mat> lu;

    void resize(Eigen::Index n) {
        if (r.size() == n) return;
        r.resize(n);
        dx.resize(n);
        trial.resize(n);
        r_trial.resize(n);
        J.resize(n, n);
        lu = Eigen::PartialPivLU<Mat>(n);
    }
};

namespace detail {
inline double inf_norm(const Vec& v) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double a = std::fabs(v[i]);
        if (!(a <= m)) m = a;  // propagates NaN
    }
    return m;
}
}  // namespace detail

// Damped Newton on r(y) = 0. residual(y, r) and jacobian(y, J) fill
// their outputs in place. A step is only taken if it lowers the
// residual norm; the step length is multiplied by cfg.damping up to
// cfg.max_halvings times before giving up.
template <class Residual, class Jacobian>
void newton_solve_into(Residual&& residual, Jacobian&& jacobian, const Vec& x0,
                       const NewtonConfig& cfg, NewtonWorkspace& ws, NewtonOutcome& out) {
    const Eigen::Index n = x0.size();
    ws.resize(n);
    out.solution = x0;
    out.iterations = 0;
    out.diagnostic.clear();
    Vec& x = out.solution;

    residual(x, ws.r);
    double norm = detail::inf_norm(ws.r);
    auto finish = [&](NewtonStatus s, std::string msg) {
        out.status = s;
        out.converged = (s == NewtonStatus::converged);
        out.final_residual_norm = norm;
        out.diagnostic = std::move(msg);
    };
    if (!std::isfinite(norm)) return finish(NewtonStatus::non_finite, "non-finite residual at initial guess");

    while (norm > cfg.tol) {
        if (out.iterations >= cfg.max_iter)
            return finish(NewtonStatus::max_iterations, "maximum iterations reached");
        jacobian(x, ws.J);
        if (!ws.J.allFinite()) return finish(NewtonStatus::non_finite, "non-finite Jacobian");
        ws.lu.compute(ws.J);
        const double rcond = ws.lu.rcond();
        if (!(rcond >= 1e-14))
            return finish(NewtonStatus::singular_jacobian,
                          "singular Jacobian (reciprocal condition " + std::to_string(rcond) + ")");
        ws.dx = ws.lu.solve(ws.r);

        double step = 1.0;
        bool accepted = false;
        double trial_norm = norm;
        for (int h = 0; h <= cfg.max_halvings; ++h) {
            ws.trial = x - step * ws.dx;
            residual(ws.trial, ws.r_trial);
            trial_norm = detail::inf_norm(ws.r_trial);
            if (std::isfinite(trial_norm) && (trial_norm < norm || trial_norm <= cfg.tol)) {
                accepted = true;
                break;
            }
            step *= cfg.damping;
        }
        ++out.iterations;
        if (!accepted) return finish(NewtonStatus::stagnated, "no damped step reduced the residual");
        x.swap(ws.trial);
        ws.r.swap(ws.r_trial);
        norm = trial_norm;
    }
    finish(NewtonStatus::converged, "");
}

template <class Residual, class Jacobian>
NewtonOutcome newton_solve(Residual&& residual, Jacobian&& jacobian, const Vec& x0,
                           const NewtonConfig& cfg = {}) {
    validate(cfg);
    NewtonWorkspace ws;
    NewtonOutcome out;
    newton_solve_into(residual, jacobian, x0, cfg, ws, out);
    return out;
}

}  // namespace tauleap
