#include <doctest.h>

#include "tauleap/steppers.hpp"

#include <cmath>
#include <functional>
#include <limits>

using namespace tauleap;

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

constexpr StepperKind kTauKinds[] = {
    StepperKind::explicit_tau, StepperKind::implicit_tau, StepperKind::trapezoidal_tau,
    StepperKind::bebe,         StepperKind::trtr,         StepperKind::betr,
    StepperKind::wt2_a1b1,     StepperKind::wt2_a1b0,     StepperKind::wt2_a05,
};

// Deterministic one-step maps for dX/dt = c2 XT - lambda X, including the
// drift corrections the fully implicit schemes carry when c1 != c2.
double deterministic_step(StepperKind k, double c1, double c2, double xt, double x, double tau) {
    const double l = c1 + c2;
    const double d = c1 - c2;
    switch (k) {
        case StepperKind::explicit_tau: return x + tau * (c2 * xt - l * x);
        case StepperKind::implicit_tau: return (x + tau * c2 * xt) / (1 + l * tau);
        case StepperKind::trapezoidal_tau:
        case StepperKind::wt2_a05: return (x * (1 - l * tau / 2) + tau * c2 * xt) / (1 + l * tau / 2);
        case StepperKind::bebe: return (x + tau * c2 * xt - tau / 2 * d) / (1 + l * tau);
        case StepperKind::betr: return (x + tau * c2 * xt - tau / 4 * d) / (1 + l * tau);
        case StepperKind::trtr: return (x * (1 - l * tau / 2) + tau * c2 * xt - tau / 4 * d) / (1 + l * tau / 2);
        case StepperKind::wt2_a1b1:
        case StepperKind::wt2_a1b0:
            return ((2 - l * l * tau * tau) * x + tau * c2 * xt * (2 + l * tau)) / (2 + 2 * l * tau);
        case StepperKind::ssa: break;
    }
    return std::nan("");
}

double raw_zero_noise(StepperKind k, const ReactionNetwork& net, double x, double tau) {
    StepperConfig cfg;
    cfg.kind = k;
    cfg.tau = tau;
    cfg.newton.tol = 1e-12;
    Stepper st(net, cfg);
    NewtonOutcome o;
    const Vec y = st.raw_update(scalar(x), tau, StepNoise::zero(net.num_reactions()), &o);
    if (k != StepperKind::explicit_tau) REQUIRE(o.converged);
    return y[0];
}

}  // namespace

TEST_SUITE("steppers") {

TEST_CASE("zero-noise single step at x=80, XT=100, tau=0.5") {
    const ReactionNetwork net = isomerization(1, 1, 100, 80);
    CHECK(raw_zero_noise(StepperKind::explicit_tau, net, 80, 0.5) == doctest::Approx(50.0).epsilon(1e-12));
    for (StepperKind k : {StepperKind::implicit_tau, StepperKind::bebe, StepperKind::betr}) {
        CAPTURE(method_name(k));
        CHECK(std::fabs(raw_zero_noise(k, net, 80, 0.5) - 65.0) < 1e-8);
    }
    for (StepperKind k : {StepperKind::trapezoidal_tau, StepperKind::trtr, StepperKind::wt2_a05}) {
        CAPTURE(method_name(k));
        CHECK(std::fabs(raw_zero_noise(k, net, 80, 0.5) - 60.0) < 1e-8);
    }
    for (StepperKind k : {StepperKind::wt2_a1b1, StepperKind::wt2_a1b0}) {
        CAPTURE(method_name(k));
        CHECK(std::fabs(raw_zero_noise(k, net, 80, 0.5) - 57.5) < 1e-8);
    }
}

TEST_CASE("zero-noise reduction to the deterministic integrators") {
    struct Case {
        double c1, c2, xt, x, tau;
    };
    const Case cases[] = {{1, 1, 100, 80, 0.5},  {1, 1, 1000, 123, 0.05}, {2, 0.5, 500, 300, 0.2},
                          {0.3, 1.7, 200, 20, 0.4}, {1, 3, 1000, 900, 0.01}};
    for (const Case& c : cases) {
        const ReactionNetwork net = isomerization(c.c1, c.c2, c.xt, c.x);
        for (StepperKind k : kTauKinds) {
            CAPTURE(method_name(k));
            CAPTURE(c.x);
            const double got = raw_zero_noise(k, net, c.x, c.tau);
            CHECK(std::fabs(got - deterministic_step(k, c.c1, c.c2, c.xt, c.x, c.tau)) < 1e-8);
        }
    }
}

TEST_CASE("tau to zero leaves the state unchanged") {
    const ReactionNetwork net = isomerization(1, 1, 100, 80);
    for (StepperKind k : kTauKinds) {
        const double y = raw_zero_noise(k, net, 80, 1e-9);
        CHECK(std::fabs(y - 80) < 1e-6);
        StepperConfig cfg;
        Vec committed = scalar(y);
        commit_in_place(committed, cfg);
        CHECK(committed[0] == 80.0);
    }
}

TEST_CASE("all propensities zero leaves the state unchanged") {
    const ReactionNetwork net = dimer();
    const Vec x = (Vec(3) << 0, 0, 5).finished();
    for (StepperKind k : kTauKinds) {
        CAPTURE(method_name(k));
        RngStream s(1, 0);
        const StepResult r = tau_step(k, net, x, 0.1, s);
        CHECK(r.state == x);
        CHECK_FALSE(r.events.diverged);
        CHECK(r.events.newton_nonconverged == 0);
    }
    SsaStepper ssa(net);
    RngStream s(1, 0);
    Vec y = x;
    CHECK(std::isinf(ssa.advance(y, s, 10.0)));
    CHECK(y == x);
    const StepResult r = ssa_step(net, x, s);
    CHECK(std::isinf(r.t_advanced));
    CHECK(r.state == x);
}

TEST_CASE("ssa picks the only active reaction") {
    const ReactionNetwork net = dimer();
    const Vec x = (Vec(3) << 1, 0, 0).finished();
    for (std::uint64_t id = 0; id < 50; ++id) {
        RngStream s(3, id);
        const StepResult r = ssa_step(net, x, s);
        CHECK(r.state == Vec::Zero(3));
        CHECK(r.t_advanced > 0);
    }
    SsaStepper st(net);
    RngStream s(4, 0);
    Vec y = x;
    // Horizon shorter than any realistic waiting time leaves x alone.
    const double dt = st.advance(y, s, 1e-300);
    CHECK(dt > 1e-300);
    CHECK(y == x);
}

TEST_CASE("commit contract") {
    StepperConfig cfg;
    StepResult r = commit((Vec(2) << 64.5, 35.5).finished(), cfg);
    CHECK(r.state == (Vec(2) << 65, 36).finished());

    r = commit((Vec(2) << -2.3, 10).finished(), cfg);
    CHECK(r.state == (Vec(2) << 0, 10).finished());
    CHECK(r.events.negatives_clamped == 1);
    CHECK_FALSE(std::signbit(r.state[0]));

    r = commit((Vec(2) << std::nan(""), 1).finished(), cfg);
    CHECK(r.events.diverged);
    r = commit((Vec(1) << 2e12).finished(), cfg);
    CHECK(r.events.diverged);

    cfg.negative_policy = NegativePolicy::allow;
    r = commit((Vec(2) << -2.3, -0.5).finished(), cfg);
    CHECK(r.state == (Vec(2) << -2, -1).finished());
    CHECK(r.events.negatives_clamped == 0);
}

TEST_CASE("config validation") {
    const ReactionNetwork net = isomerization(1, 1, 100, 80);
    StepperConfig cfg;
    cfg.kind = StepperKind::bebe;
    cfg.tau = 0.1;
    CHECK_NOTHROW(validate(cfg, net));
    cfg.tau = 0;
    CHECK_THROWS_AS(validate(cfg, net), std::invalid_argument);
    cfg.tau = 0.1;
    cfg.noise.kind = NoiseKind::three_point;
    CHECK_THROWS_AS(validate(cfg, net), std::invalid_argument);
    cfg.noise.kind = NoiseKind::two_point;
    CHECK_NOTHROW(validate(cfg, net));
    cfg.kind = StepperKind::wt2_a05;
    CHECK_THROWS_AS(validate(cfg, net), std::invalid_argument);
    cfg.noise.kind = NoiseKind::three_point;
    CHECK_NOTHROW(validate(cfg, net));
    cfg.divergence_bound = 50;
    CHECK_THROWS_AS(validate(cfg, net), std::invalid_argument);

    StepperConfig ssa;
    ssa.kind = StepperKind::ssa;
    CHECK_NOTHROW(validate(ssa, net));
    CHECK_THROWS(Stepper(net, ssa));

    for (StepperKind k : kAllKinds) CHECK(parse_method(method_name(k)) == k);
    CHECK(parse_method("wt2-a1b1") == StepperKind::wt2_a1b1);
    CHECK_THROWS_AS(parse_method("euler"), std::invalid_argument);
}

TEST_CASE("noise is drawn at the current state and zero on silent channels") {
    const ReactionNetwork net = isomerization(1, 1, 100, 100);
    StepperConfig cfg;
    cfg.kind = StepperKind::wt2_a05;
    cfg.tau = 0.2;
    Stepper st(net, cfg);
    RngStream s(5, 0);
    StepNoise n = StepNoise::zero(2);
    bool diverged = true;
    st.draw_noise(scalar(100), 0.2, s, n, diverged);
    CHECK_FALSE(diverged);
    CHECK(n.dW[1] == 0.0);  // a_2 = c2 (XT - X) = 0
    CHECK(n.scaled[1] == 0.0);
    CHECK(n.V(0, 0) == -0.2);
    CHECK(n.V(0, 1) == -n.V(1, 0));

    cfg.kind = StepperKind::bebe;
    cfg.noise = {NoiseKind::two_point, 0.0};
    Stepper tp(net, cfg);
    tp.draw_noise(scalar(60), 0.2, s, n, diverged);
    CHECK(std::fabs(n.dW[0]) == doctest::Approx(std::sqrt(0.2)));
    CHECK(n.scaled[0] == doctest::Approx(std::sqrt(60.0) * n.dW[0]));

    // Poisson means beyond the sampler's range flag divergence.
    const ReactionNetwork big = isomerization(1, 1, 1e300, 1e299);
    StepperConfig bc;
    bc.kind = StepperKind::explicit_tau;
    bc.tau = 1.0;
    bc.divergence_bound = 1e301;
    Stepper bs(big, bc);
    bs.draw_noise(scalar(1e299), 1.0, s, n, diverged);
    CHECK(diverged);
}

TEST_CASE("mean recursions on isomerization") {
    // Explicit is checked on committed states (its raw update is already
    // integral). The implicit updates are checked before rounding, since
    // half-integer raws would otherwise carry a rounding bias.
    const double c = 1, xt = 100, x = 80, tau = 0.5;
    const double lt = 2 * c * tau;
    const ReactionNetwork net = isomerization(c, c, xt, x);
    const int n = 100000;

    auto run = [&](StepperKind k, bool committed) {
        StepperConfig cfg;
        cfg.kind = k;
        cfg.tau = tau;
        Stepper st(net, cfg);
        StepNoise noise = StepNoise::zero(2);
        double s = 0, ss = 0;
        for (int i = 0; i < n; ++i) {
            RngStream rs(77, static_cast<std::uint64_t>(i));
            double v;
            if (committed) {
                Vec y = scalar(x);
                st.advance(y, tau, rs);
                v = y[0];
            } else {
                bool diverged = false;
                st.draw_noise(scalar(x), tau, rs, noise, diverged);
                REQUIRE_FALSE(diverged);
                v = st.raw_update(scalar(x), tau, noise)[0];
            }
            s += v;
            ss += v * v;
        }
        const double mean = s / n;
        const double se = std::sqrt((ss / n - mean * mean) / n);
        return std::pair{mean, se};
    };

    auto [me, see] = run(StepperKind::explicit_tau, true);
    CHECK(std::fabs(me - ((1 - lt) * x + c * xt * tau)) < 4 * see);

    auto [mi, sei] = run(StepperKind::implicit_tau, false);
    CHECK(std::fabs(mi - (x + c * xt * tau) / (1 + lt)) < 4 * sei);

    auto [ma, sea] = run(StepperKind::wt2_a05, false);
    CHECK(std::fabs(ma - ((2 - lt) * x + 2 * tau * c * xt) / (2 + lt)) < 4 * sea);

    auto [mb, seb] = run(StepperKind::wt2_a1b1, false);
    CHECK(std::fabs(mb - ((2 - lt * lt) * x + tau * c * xt * (2 + lt)) / (2 + 2 * lt)) < 4 * seb);
}

TEST_CASE("stepping conserves the isomerization total by construction") {
    const ReactionNetwork net = isomerization(1, 2, 50, 10);
    for (StepperKind k : kTauKinds) {
        StepperConfig cfg;
        cfg.kind = k;
        cfg.tau = 0.05;
        Stepper st(net, cfg);
        RngStream rs(2, 0);
        Vec y = scalar(10);
        for (int i = 0; i < 200; ++i) {
            const StepEvents ev = st.advance(y, cfg.tau, rs);
            REQUIRE_FALSE(ev.diverged);
            CHECK(y[0] >= 0);
            CHECK(y[0] <= 50 + 10);
        }
    }
}

TEST_CASE("explicit tau-leaping blows up on the stiff dimer") {
    const ReactionNetwork net = dimer();
    StepperConfig cfg;
    cfg.kind = StepperKind::explicit_tau;
    cfg.tau = 8e-4;
    Stepper st(net, cfg);
    RngStream rs(1, 0);
    Vec y = net.initial_state();
    bool diverged = false;
    for (int i = 0; i < 250 && !diverged; ++i) diverged = st.advance(y, cfg.tau, rs).diverged;
    CHECK(diverged);
}

}  // TEST_SUITE
