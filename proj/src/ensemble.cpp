#include "tauleap/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace tauleap {

void validate(const EnsembleSpec& spec) {
    if (spec.n_runs < 1) throw std::invalid_argument("runs must be >= 1");
    if (!(spec.t_final > 0) || !std::isfinite(spec.t_final))
        throw std::invalid_argument("tfinal must be a positive finite number");
    validate(spec.stepper, spec.network);
}

StepPlan plan_steps(double t_final, double tau) {
    StepPlan p;
    p.full_steps = static_cast<long long>(std::floor(t_final / tau + 1e-9));
    p.remainder = t_final - static_cast<double>(p.full_steps) * tau;
    if (p.remainder <= 1e-9 * tau) p.remainder = 0.0;
    return p;
}

TrajectoryRunner::TrajectoryRunner(const EnsembleSpec& spec) : spec_(&spec) {
    if (spec.stepper.kind == StepperKind::ssa)
        ssa_ = std::make_unique<SsaStepper>(spec.network);
    else
        tau_ = std::make_unique<Stepper>(spec.network, spec.stepper);
}

TrajectoryResult TrajectoryRunner::run(std::size_t run_index) {
    const EnsembleSpec& spec = *spec_;
    const bool record = spec.record == RecordMode::full_trajectory;
    RngStream stream(spec.master_seed, run_index);
    TrajectoryResult res;
    res.state = spec.network.initial_state();
    Vec& x = res.state;
    double t = 0.0;
    if (record) res.path.push_back({0.0, x});

    if (ssa_) {
        for (;;) {
            const double horizon = spec.t_final - t;
            const double dt = ssa_->advance(x, stream, horizon);
            if (!(dt <= horizon)) break;
            t += dt;
            ++res.events.ssa_events;
            if (record) res.path.push_back({t, x});
        }
        res.t_reached = spec.t_final;
        return res;
    }

    const double tau = spec.stepper.tau;
    const StepPlan plan = plan_steps(spec.t_final, tau);
    const long long total = plan.full_steps + (plan.remainder > 0 ? 1 : 0);
    for (long long s = 0; s < total; ++s) {
        const double h = s < plan.full_steps ? tau : plan.remainder;
        StepEvents ev = tau_->advance(x, h, stream);
        ++res.events.steps;
        res.events.newton_nonconverged += ev.newton_nonconverged;
        res.events.negatives_clamped += ev.negatives_clamped;
        t = s < plan.full_steps ? static_cast<double>(s + 1) * tau : spec.t_final;
        if (ev.diverged) {
            res.diverged = true;
            x.setConstant(std::numeric_limits<double>::infinity());
            break;
        }
        if (record) res.path.push_back({t, x});
    }
    res.t_reached = t;
    return res;
}

TrajectoryResult simulate_trajectory(const EnsembleSpec& spec, std::size_t run_index) {
    if (run_index >= spec.n_runs) throw std::out_of_range("run index beyond n_runs");
    TrajectoryRunner runner(spec);
    return runner.run(run_index);
}

std::vector<double> EnsembleResult::column(std::size_t species) const {
    std::vector<double> out;
    out.reserve(diverged.size());
    for (std::size_t i = 0; i < diverged.size(); ++i)
        if (!diverged[i]) out.push_back(final_states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(species)));
    return out;
}

EnsembleResult run_ensemble(const EnsembleSpec& spec, unsigned workers) {
    validate(spec);
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = spec.n_runs;
    const auto n_species = static_cast<Eigen::Index>(spec.network.num_species());
    EnsembleResult res;
    res.final_states.resize(static_cast<Eigen::Index>(n), n_species);
    std::vector<char> div(n, 0);
    std::vector<EventTotals> ev(n);
    if (spec.record == RecordMode::full_trajectory) res.paths.resize(n);

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        TrajectoryRunner runner(spec);
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) break;
            TrajectoryResult tr = runner.run(i);
            res.final_states.row(static_cast<Eigen::Index>(i)) = tr.state.transpose();
            div[i] = tr.diverged ? 1 : 0;
            ev[i] = tr.events;
            if (!res.paths.empty()) res.paths[i] = std::move(tr.path);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        std::exception_ptr err;
        std::mutex err_mu;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                try {
                    work();
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                    next.store(n);
                }
            });
        for (auto& th : pool) th.join();
        if (err) std::rethrow_exception(err);
    }

    res.diverged.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        res.diverged[i] = div[i] != 0;
        res.diverged_count += div[i] ? 1 : 0;
        res.events.steps += ev[i].steps;
        res.events.ssa_events += ev[i].ssa_events;
        res.events.newton_nonconverged += ev[i].newton_nonconverged;
        res.events.negatives_clamped += ev[i].negatives_clamped;
    }
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

unsigned resolve_workers(const std::string& flag) {
    std::string value = flag;
    if (const char* env = std::getenv("TAULEAP_WORKERS"); env && *env) value = env;
    if (value.empty() || value == "auto") return std::max(1u, std::thread::hardware_concurrency());
    try {
        std::size_t used = 0;
        long long v = std::stoll(value, &used);
        if (used != value.size() || v < 1) throw std::invalid_argument(value);
        return static_cast<unsigned>(std::min<long long>(v, 1024));
    } catch (const std::exception&) {
        throw std::invalid_argument("workers must be a positive integer or 'auto', got '" + value + "'");
    }
}

}  // namespace tauleap
