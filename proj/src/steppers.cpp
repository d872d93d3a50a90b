#include "tauleap/steppers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tauleap {

namespace {

// Largest Poisson mean we are willing to sample; beyond this the step is
// treated as divergent.
constexpr double kMaxPoissonMean = 4503599627370496.0;  // 2^52

struct KindInfo {
    StepperKind kind;
    const char* name;
};

constexpr KindInfo kKindNames[] = {
    {StepperKind::ssa, "ssa"},
    {StepperKind::explicit_tau, "explicit"},
    {StepperKind::implicit_tau, "implicit"},
    {StepperKind::trapezoidal_tau, "trapezoidal"},
    {StepperKind::bebe, "bebe"},
    {StepperKind::trtr, "trtr"},
    {StepperKind::betr, "betr"},
    {StepperKind::wt2_a1b1, "wt2-a1b1"},
    {StepperKind::wt2_a1b0, "wt2-a1b0"},
    {StepperKind::wt2_a05, "wt2-a05"},
};

}  // namespace

StepperKind parse_method(std::string_view name) {
    for (const auto& k : kKindNames)
        if (name == k.name) return k.kind;
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::string method_name(StepperKind kind) {
    for (const auto& k : kKindNames)
        if (kind == k.kind) return k.name;
    return "?";
}

bool is_wt2(StepperKind kind) {
    return kind == StepperKind::wt2_a1b1 || kind == StepperKind::wt2_a1b0 ||
           kind == StepperKind::wt2_a05;
}

void validate(const StepperConfig& cfg, const ReactionNetwork& net) {
    if (cfg.kind != StepperKind::ssa) {
        if (!(cfg.tau > 0) || !std::isfinite(cfg.tau))
            throw std::invalid_argument("tau must be a positive finite number for method " +
                                        method_name(cfg.kind));
        if (cfg.noise.kind == NoiseKind::three_point && !is_wt2(cfg.kind))
            throw std::invalid_argument("three-point noise is only valid for wt2 methods");
        if (cfg.noise.kind == NoiseKind::two_point && is_wt2(cfg.kind))
            throw std::invalid_argument("two-point noise is not valid for wt2 methods");
        if (std::isnan(cfg.noise.threshold) || cfg.noise.threshold < 0)
            throw std::invalid_argument("noise threshold must be >= 0");
        validate(cfg.newton);
    }
    if (!(cfg.divergence_bound > 0) || !std::isfinite(cfg.divergence_bound))
        throw std::invalid_argument("divergence bound must be positive and finite");
    if (net.initial_state().size() > 0 && cfg.divergence_bound <= net.initial_state().maxCoeff())
        throw std::invalid_argument("divergence bound must exceed the largest initial population");
}

StepEvents commit_in_place(Vec& x, const StepperConfig& cfg) {
    StepEvents ev;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        double v = x[k];
        if (!std::isfinite(v) || std::fabs(v) > cfg.divergence_bound) {
            ev.diverged = true;
            continue;
        }
        v = std::round(v);
        if (v < 0 && cfg.negative_policy == NegativePolicy::clamp_to_zero) {
            v = 0.0;
            ++ev.negatives_clamped;
        }
        x[k] = v + 0.0;  // no negative zero
    }
    return ev;
}

StepResult commit(const Vec& raw, const StepperConfig& cfg) {
    StepResult r;
    r.state = raw;
    r.events = commit_in_place(r.state, cfg);
    return r;
}

// ---------------------------------------------------------------- SSA

SsaStepper::SsaStepper(const ReactionNetwork& net)
    : net_(&net), change_(net.num_reactions()), a_(static_cast<Eigen::Index>(net.num_reactions())) {
    for (std::size_t j = 0; j < net.num_reactions(); ++j)
        for (std::size_t k = 0; k < net.num_species(); ++k)
            if (int v = net.nu(k, j); v != 0)
                change_[j].emplace_back(static_cast<Eigen::Index>(k), static_cast<double>(v));
}

double SsaStepper::advance(Vec& x, RngStream& stream, double horizon) {
    propensities_into(*net_, x, a_);
    const double a0 = a_.sum();
    if (!(a0 > 0)) return std::numeric_limits<double>::infinity();
    const double dt = -std::log(stream.uniform()) / a0;
    if (dt > horizon) return dt;
    const double target = stream.uniform() * a0;
    const Eigen::Index m = a_.size();
    Eigen::Index j = 0;
    double cum = 0.0;
    for (; j < m; ++j) {
        cum += a_[j];
        if (cum > target) break;
    }
    if (j == m) {  // round-off at the top end
        j = m - 1;
        while (j > 0 && a_[j] == 0.0) --j;
    }
    for (const auto& [k, v] : change_[static_cast<std::size_t>(j)]) x[k] += v;
    last_ = static_cast<std::size_t>(j);
    return dt;
}

// ------------------------------------------------------- tau family

Stepper::Stepper(const ReactionNetwork& net, StepperConfig cfg)
    : net_(&net), cfg_(cfg),
      n_(static_cast<Eigen::Index>(net.num_species())),
      m_(static_cast<Eigen::Index>(net.num_reactions())) {
    if (cfg_.kind == StepperKind::ssa) throw std::invalid_argument("Stepper does not run ssa; use SsaStepper");
    validate(cfg_, net);
    switch (cfg_.kind) {
        case StepperKind::implicit_tau: wa_ = 1; break;
        case StepperKind::trapezoidal_tau: wa_ = 0.5; break;
        case StepperKind::bebe: wa_ = 1; wg_ = 0.5; ws_ = 1; break;
        case StepperKind::trtr: wa_ = 0.5; wg_ = 0.125; ws_ = 0.5; break;
        case StepperKind::betr: wa_ = 1; wg_ = 0.25; ws_ = 0.5; break;
        case StepperKind::wt2_a1b1: wa_ = 1; wb_ = 1; break;
        case StepperKind::wt2_a1b0: wa_ = 1; break;
        case StepperKind::wt2_a05: wa_ = 0.5; break;
        default: break;
    }
    ax_.resize(m_);
    ay_.resize(m_);
    b_.resize(n_);
    mu_x_.resize(n_);
    Q_x_.resize(n_, n_);
    G_x_.resize(n_, m_);
    Jmu_x_.resize(n_, n_);
    g_.resize(n_);
    hv_.resize(n_);
    t3_.resize(n_);
    coef_grad_.resize(n_);
    H_.resize(n_, n_);
    raw_.resize(n_);
    noise_buf_.dW.resize(m_);
    noise_buf_.scaled.resize(m_);
    noise_buf_.V = is_wt2(cfg_.kind) ? Mat(m_, m_) : Mat();
}

void Stepper::draw_noise(const Vec& x, double tau, RngStream& stream, StepNoise& noise, bool& diverged) {
    diverged = false;
    noise.dW.resize(m_);
    noise.scaled.resize(m_);
    propensities_into(*net_, x, ax_);
    const bool simplify_ok = cfg_.noise.kind != NoiseKind::scaled_poisson;
    for (Eigen::Index j = 0; j < m_; ++j) {
        const double a = ax_[j];
        noise.dW[j] = 0.0;
        noise.scaled[j] = 0.0;
        if (!(a >= kPropensityFloor)) {
            if (std::isnan(a)) diverged = true;
            continue;
        }
        const double mean = a * tau;
        if (!std::isfinite(mean) || mean > kMaxPoissonMean) {
            diverged = true;
            continue;
        }
        const double sa = std::sqrt(a);
        if (simplify_ok && mean > cfg_.noise.threshold) {
            noise.dW[j] = cfg_.noise.kind == NoiseKind::two_point ? sample_two_point(stream, tau)
                                                                    : sample_three_point(stream, tau);
            noise.scaled[j] = sa * noise.dW[j];
        } else {
            const double count = sample_poisson(stream, mean);
            noise.scaled[j] = count - mean;
            noise.dW[j] = noise.scaled[j] / sa;
        }
    }
    if (is_wt2(cfg_.kind)) {
        noise.V.resize(m_, m_);
        sample_V_matrix_into(stream, tau, noise.V);
    }
}

void Stepper::explicit_raw(const Vec& x, double tau, const StepNoise& noise, Vec& out) {
    propensities_into(*net_, x, ax_);
    out = x;
    for (Eigen::Index j = 0; j < m_; ++j) {
        const double inc = tau * ax_[j] + noise.scaled[j];
        if (inc != 0.0) out += inc * net_->nu().col(j);
    }
}

void Stepper::prepare(const Vec& x, double tau, const StepNoise& noise) {
    x_ = &x;
    noise_ = &noise;
    tau_ = tau;
    const Mat& nu = net_->nu();
    const StepperKind kind = cfg_.kind;
    const bool wt2 = is_wt2(kind);

    for (Eigen::Index j = 0; j < m_; ++j) {
        ax_[j] = propensity_with_gradient(*net_, static_cast<std::size_t>(j), x, g_);
        G_x_.col(j) = g_;
    }
    mu_x_.noalias() = nu * ax_;
    b_.setZero();

    switch (kind) {
        case StepperKind::implicit_tau:
            b_.noalias() = nu * noise.scaled;
            break;
        case StepperKind::trapezoidal_tau:
            b_.noalias() = nu * (noise.scaled + 0.5 * tau * ax_);
            break;
        case StepperKind::bebe:
            break;
        case StepperKind::trtr:
            b_.noalias() = nu * (0.5 * tau * ax_ + 0.5 * noise.scaled);
            for (Eigen::Index j = 0; j < m_; ++j) {
                // A silent channel carries no noise, so no Ito correction either.
                if (!(ax_[j] >= kPropensityFloor)) continue;
                const double corr = nu.col(j).dot(G_x_.col(j));
                if (corr != 0.0) b_ -= (tau / 8.0) * corr * nu.col(j);
            }
            break;
        case StepperKind::betr:
            b_.noalias() = 0.5 * (nu * noise.scaled);
            break;
        default:
            break;
    }
    if (!wt2) return;

    // Q = sum_h a_h nu_h nu_h^T and the drift Jacobian sum_h nu_h g_h^T.
    Q_x_.noalias() = nu * ax_.asDiagonal() * nu.transpose();
    Jmu_x_.noalias() = nu * G_x_.transpose();
    const Vec& dW = noise.dW;
    const Mat& V = noise.V;

    // Double-integral group: 1/4 sum_{j2} nu_{j2}/sqrt(a_{j2}) sum_{j1}
    // sqrt(a_{j1}) (nu_{j1} . g_{j2}) (dW_{j1} dW_{j2} + V_{j1 j2}).
    for (Eigen::Index j2 = 0; j2 < m_; ++j2) {
        if (!(ax_[j2] >= kPropensityFloor)) continue;
        double inner = 0.0;
        for (Eigen::Index j1 = 0; j1 < m_; ++j1) {
            const double lg = nu.col(j1).dot(G_x_.col(j2));
            if (lg == 0.0) continue;
            inner += std::sqrt(ax_[j1]) * lg * (dW[j1] * dW[j2] + V(j1, j2));
        }
        b_ += (inner / (4.0 * std::sqrt(ax_[j2]))) * nu.col(j2);
    }

    // Diffusion group. For alpha = 1 the -tau/2 L_j mu correction applies.
    if (kind == StepperKind::wt2_a05) {
        b_.noalias() += nu * noise.scaled;
        b_.noalias() += (0.5 * tau) * (nu * ax_);
    } else {
        for (Eigen::Index j = 0; j < m_; ++j) {
            if (noise.scaled[j] == 0.0) continue;
            hv_.noalias() = Jmu_x_ * nu.col(j);
            b_ += noise.scaled[j] * (nu.col(j) - 0.5 * tau * hv_);
        }
    }

    // L0 sigma group: net weight tau/16, bracket taken with the drift mu.
    for (Eigen::Index j = 0; j < m_; ++j) {
        if (!(ax_[j] >= kPropensityFloor) || dW[j] == 0.0) continue;
        const auto js = static_cast<std::size_t>(j);
        const double hq = propensity_active(*net_, js, x) ? hessian_contract(*net_, js, x, Q_x_) : 0.0;
        const double bracket = G_x_.col(j).dot(mu_x_) - hq / (4.0 * ax_[j]);
        b_ += (tau / 16.0) * bracket * dW[j] / std::sqrt(ax_[j]) * nu.col(j);
    }

    // alpha = 1, beta = 0: the tau^2 L0 mu group is explicit.
    if (kind == StepperKind::wt2_a1b0) {
        for (Eigen::Index j = 0; j < m_; ++j) {
            const auto js = static_cast<std::size_t>(j);
            if (!propensity_active(*net_, js, x)) continue;
            const double term = G_x_.col(j).dot(mu_x_) + 0.5 * hessian_contract(*net_, js, x, Q_x_);
            if (term != 0.0) b_ -= (0.5 * tau * tau) * term * nu.col(j);
        }
    }
}

void Stepper::residual(const Vec& y, Vec& r) {
    const Mat& nu = net_->nu();
    const Vec& dW = noise_->dW;
    r = y - *x_ - b_;
    for (Eigen::Index j = 0; j < m_; ++j) {
        const auto js = static_cast<std::size_t>(j);
        const double a = propensity_with_gradient(*net_, js, y, g_);
        double coef = wa_ * tau_ * a;
        if (wg_ != 0.0 && a >= kPropensityFloor) coef -= wg_ * tau_ * nu.col(j).dot(g_);
        if (ws_ != 0.0 && dW[j] != 0.0) coef += ws_ * std::sqrt(a) * dW[j];
        if (wb_ != 0.0 && propensity_active(*net_, js, y))
            coef -= wb_ * 0.5 * tau_ * tau_ *
                    (g_.dot(mu_x_) + 0.5 * hessian_contract(*net_, js, y, Q_x_));
        if (coef != 0.0) r -= coef * nu.col(j);
    }
}

void Stepper::jacobian(const Vec& y, Mat& J) {
    const Mat& nu = net_->nu();
    const Vec& dW = noise_->dW;
    J.setIdentity(n_, n_);
    for (Eigen::Index j = 0; j < m_; ++j) {
        const auto js = static_cast<std::size_t>(j);
        const double a = propensity_with_gradient(*net_, js, y, g_);
        coef_grad_ = (wa_ * tau_) * g_;
        const bool need_h = wg_ != 0.0 || wb_ != 0.0;
        const bool active = need_h && propensity_active(*net_, js, y);
        if (wg_ != 0.0 && active && a >= kPropensityFloor) {
            hv_.setZero();
            add_hessian_times(*net_, js, y, nu.col(j), 1.0, hv_);
            coef_grad_ -= (wg_ * tau_) * hv_;
        }
        if (ws_ != 0.0 && dW[j] != 0.0)
            coef_grad_ += (ws_ * dW[j] / (2.0 * std::sqrt(std::max(a, kPropensityFloor)))) * g_;
        if (wb_ != 0.0 && active) {
            hv_.setZero();
            add_hessian_times(*net_, js, y, mu_x_, 1.0, hv_);
            t3_.setZero();
            add_third_contraction(*net_, js, y, Q_x_, 0.5, t3_);
            coef_grad_ -= (wb_ * 0.5 * tau_ * tau_) * (hv_ + t3_);
        }
        J.noalias() -= nu.col(j) * coef_grad_.transpose();
    }
}

void Stepper::solve_prepared(NewtonOutcome& out) {
    newton_solve_into([this](const Vec& y, Vec& r) { residual(y, r); },
                      [this](const Vec& y, Mat& J) { jacobian(y, J); }, *x_, cfg_.newton, nws_, out);
}

Vec Stepper::raw_update(const Vec& x, double tau, const StepNoise& noise, NewtonOutcome* outcome) {
    Vec out(n_);
    if (cfg_.kind == StepperKind::explicit_tau) {
        explicit_raw(x, tau, noise, out);
        return out;
    }
    prepare(x, tau, noise);
    solve_prepared(nout_);
    if (outcome) *outcome = nout_;
    return nout_.solution;
}

StepEvents Stepper::advance(Vec& x, double tau, RngStream& stream) {
    bool diverged = false;
    draw_noise(x, tau, stream, noise_buf_, diverged);
    StepEvents ev;
    if (diverged) {
        ev.diverged = true;
        return ev;
    }
    if (cfg_.kind == StepperKind::explicit_tau) {
        explicit_raw(x, tau, noise_buf_, raw_);
    } else {
        prepare(x, tau, noise_buf_);
        solve_prepared(nout_);
        if (!nout_.converged) ev.newton_nonconverged = 1;
        raw_ = nout_.solution;
    }
    x = raw_;
    ev += commit_in_place(x, cfg_);
    return ev;
}

// ------------------------------------------------------- wrappers

StepResult ssa_step(const ReactionNetwork& net, const Vec& x, RngStream& stream) {
    SsaStepper s(net);
    StepResult r;
    r.state = x;
    r.t_advanced = s.advance(r.state, stream, std::numeric_limits<double>::infinity());
    return r;
}

StepResult tau_step(StepperKind kind, const ReactionNetwork& net, const Vec& x, double tau,
                    RngStream& stream, StepperConfig cfg) {
    if (kind == StepperKind::ssa) return ssa_step(net, x, stream);
    cfg.kind = kind;
    cfg.tau = tau;
    Stepper s(net, cfg);
    StepResult r;
    r.state = x;
    r.events = s.advance(r.state, tau, stream);
    r.t_advanced = tau;
    return r;
}

StepResult explicit_tau_step(const ReactionNetwork& n, const Vec& x, double tau, RngStream& s) {
    return tau_step(StepperKind::explicit_tau, n, x, tau, s);
}
StepResult implicit_tau_step(const ReactionNetwork& n, const Vec& x, double tau, RngStream& s) {
    return tau_step(StepperKind::implicit_tau, n, x, tau, s);
}
StepResult trapezoidal_tau_step(const ReactionNetwork& n, const Vec& x, double tau, RngStream& s) {
    return tau_step(StepperKind::trapezoidal_tau, n, x, tau, s);
}
StepResult bebe_step(const ReactionNetwork& n, const Vec& x, double tau, RngStream& s) {
    return tau_step(StepperKind::bebe, n, x, tau, s);
}
StepResult trtr_step(const ReactionNetwork& n, const Vec& x, double tau, RngStream& s) {
    return tau_step(StepperKind::trtr, n, x, tau, s);
}
StepResult betr_step(const ReactionNetwork& n, const Vec& x, double tau, RngStream& s) {
    return tau_step(StepperKind::betr, n, x, tau, s);
}
StepResult wt2_a1b1_step(const ReactionNetwork& n, const Vec& x, double tau, RngStream& s) {
    return tau_step(StepperKind::wt2_a1b1, n, x, tau, s);
}
StepResult wt2_a1b0_step(const ReactionNetwork& n, const Vec& x, double tau, RngStream& s) {
    return tau_step(StepperKind::wt2_a1b0, n, x, tau, s);
}
StepResult wt2_a05_step(const ReactionNetwork& n, const Vec& x, double tau, RngStream& s) {
    return tau_step(StepperKind::wt2_a05, n, x, tau, s);
}

}  // namespace tauleap
