#pragma once

#include "tauleap/model.hpp"
#include "tauleap/newton.hpp"
#include "tauleap/rng.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tauleap {

enum class StepperKind {
    ssa,
    explicit_tau,
    implicit_tau,
    trapezoidal_tau,
    bebe,
    trtr,
    betr,
    wt2_a1b1,
    wt2_a1b0,
    wt2_a05,
};

inline constexpr StepperKind kAllKinds[] = {
    StepperKind::ssa,  StepperKind::explicit_tau, StepperKind::implicit_tau,
    StepperKind::trapezoidal_tau, StepperKind::bebe, StepperKind::trtr,
    StepperKind::betr, StepperKind::wt2_a1b1, StepperKind::wt2_a1b0, StepperKind::wt2_a05,
};

// CLI names: ssa, explicit, implicit, trapezoidal, bebe, trtr, betr,
// wt2-a1b1, wt2-a1b0, wt2-a05.
StepperKind parse_method(std::string_view name);
std::string method_name(StepperKind kind);
bool is_wt2(StepperKind kind);

enum class NegativePolicy { allow, clamp_to_zero };

struct StepperConfig {
    StepperKind kind = StepperKind::implicit_tau;
    double tau = 0.0;
    NoiseMode noise{};
    NewtonConfig newton{};
    NegativePolicy negative_policy = NegativePolicy::clamp_to_zero;
    double divergence_bound = 1e12;
};

// Throws std::invalid_argument on an illegal combination.
void validate(const StepperConfig& cfg, const ReactionNetwork& net);

struct StepEvents {
    long long newton_nonconverged = 0;
    long long negatives_clamped = 0;
    bool diverged = false;

    StepEvents& operator+=(const StepEvents& o) {
        newton_nonconverged += o.newton_nonconverged;
        negatives_clamped += o.negatives_clamped;
        diverged = diverged || o.diverged;
        return *this;
    }
};

struct StepResult {
    Vec state;
    double t_advanced = 0.0;
    StepEvents events;
};

// Rounds half away from zero, applies the negative policy and flags
// divergence (non-finite or |x_k| > divergence_bound).
StepEvents commit_in_place(Vec& x, const StepperConfig& cfg);
StepResult commit(const Vec& raw, const StepperConfig& cfg);

// Per-step random inputs, drawn once at the current state.
// scaled[j] = sqrt(a_j(x)) * dW[j]; for Poisson noise it equals P_j - a_j tau.
struct StepNoise {
    Vec dW;
    Vec scaled;
    Mat V;

    static StepNoise zero(std::size_t m) {
        const auto n = static_cast<Eigen::Index>(m);
        return {Vec::Zero(n), Vec::Zero(n), Mat::Zero(n, n)};
    }
};

constexpr double kPropensityFloor = 1e-12;

// Exact SSA. advance() draws the waiting time; when the next event would
// land beyond `horizon` (or a0 = 0) the state is left untouched and the
// drawn waiting time (or +inf) is returned.
class SsaStepper {
public:
    explicit SsaStepper(const ReactionNetwork& net);
    double advance(Vec& x, RngStream& stream, double horizon);
    // Index of the last fired reaction.
    std::size_t last_reaction() const { return last_; }

private:
    const ReactionNetwork* net_;
    std::vector<std::vector<std::pair<Eigen::Index, double>>> change_;
    Vec a_;
    std::size_t last_ = 0;
};

// Fixed-step tau-leaping family. One instance per worker; it owns all
// scratch space so stepping does not allocate.
class Stepper {
public:
    Stepper(const ReactionNetwork& net, StepperConfig cfg);

    const StepperConfig& config() const { return cfg_; }
    const ReactionNetwork& network() const { return *net_; }

    // Draws noise at x, computes the raw update and commits it in place.
    StepEvents advance(Vec& x, double tau, RngStream& stream);

    // Draws dW, scaled and (wt2 only) V at state x. Sets `diverged` when a
    // Poisson mean is non-finite or too large to sample.
    void draw_noise(const Vec& x, double tau, RngStream& stream, StepNoise& noise, bool& diverged);

    // Unrounded update for given noise. Newton outcome is written when the
    // scheme is implicit.
    Vec raw_update(const Vec& x, double tau, const StepNoise& noise, NewtonOutcome* outcome = nullptr);

    // Residual F(y) and Jacobian dF/dy of the implicit equation, after
    // prepare() has fixed x, tau and the noise.
    void prepare(const Vec& x, double tau, const StepNoise& noise);
    void residual(const Vec& y, Vec& r);
    void jacobian(const Vec& y, Mat& J);

private:
    void explicit_raw(const Vec& x, double tau, const StepNoise& noise, Vec& out);
    void solve_prepared(NewtonOutcome& out);

    const ReactionNetwork* net_;
    StepperConfig cfg_;
    Eigen::Index n_, m_;

    // Weights of the y-dependent part: mean, drift correction, diffusion,
    // second-order drift group.
    double wa_ = 0, wg_ = 0, ws_ = 0, wb_ = 0;

    // Prepared state.
    const Vec* x_ = nullptr;
    const StepNoise* noise_ = nullptr;
    double tau_ = 0;
    Vec ax_, b_, mu_x_;
    Mat Q_x_, G_x_, Jmu_x_;

    // Scratch.
    StepNoise noise_buf_;
    Vec ay_, g_, hv_, t3_, coef_grad_;
    Mat H_;
    NewtonWorkspace nws_;
    NewtonOutcome nout_;
    Vec raw_;
};

// Single-step convenience wrappers; each builds a Stepper from cfg with
// kind and tau overridden.
StepResult ssa_step(const ReactionNetwork& net, const Vec& x, RngStream& stream);
StepResult tau_step(StepperKind kind, const ReactionNetwork& net, const Vec& x, double tau,
                    RngStream& stream, StepperConfig cfg = {});
StepResult explicit_tau_step(const ReactionNetwork& net, const Vec& x, double tau, RngStream& s);
StepResult implicit_tau_step(const ReactionNetwork& net, const Vec& x, double tau, RngStream& s);
StepResult trapezoidal_tau_step(const ReactionNetwork& net, const Vec& x, double tau, RngStream& s);
StepResult bebe_step(const ReactionNetwork& net, const Vec& x, double tau, RngStream& s);
StepResult trtr_step(const ReactionNetwork& net, const Vec& x, double tau, RngStream& s);
StepResult betr_step(const ReactionNetwork& net, const Vec& x, double tau, RngStream& s);
StepResult wt2_a1b1_step(const ReactionNetwork& net, const Vec& x, double tau, RngStream& s);
StepResult wt2_a1b0_step(const ReactionNetwork& net, const Vec& x, double tau, RngStream& s);
StepResult wt2_a05_step(const ReactionNetwork& net, const Vec& x, double tau, RngStream& s);

}  // namespace tauleap
