#pragma once

#include "tauleap/model.hpp"
#include "tauleap/steppers.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace tauleap {

enum class RecordMode { final_state_only, full_trajectory };

struct EnsembleSpec {
    ReactionNetwork network;
    StepperConfig stepper;
    double t_final = 0.0;
    std::size_t n_runs = 1;
    std::uint64_t master_seed = 0;
    RecordMode record = RecordMode::final_state_only;
};

void validate(const EnsembleSpec& spec);

struct EventTotals {
    long long steps = 0;
    long long ssa_events = 0;
    long long newton_nonconverged = 0;
    long long negatives_clamped = 0;
};

struct TrajectoryPoint {
    double t;
    Vec state;
};

struct TrajectoryResult {
    Vec state;
    bool diverged = false;
    double t_reached = 0.0;
    EventTotals events;
    std::vector<TrajectoryPoint> path;  // filled when recording
};

// Steppers reused across calls by one worker.
class TrajectoryRunner {
public:
    explicit TrajectoryRunner(const EnsembleSpec& spec);
    TrajectoryResult run(std::size_t run_index);

private:
    const EnsembleSpec* spec_;
    std::unique_ptr<Stepper> tau_;
    std::unique_ptr<SsaStepper> ssa_;
};

TrajectoryResult simulate_trajectory(const EnsembleSpec& spec, std::size_t run_index);

// Number of full steps and the length of the trailing partial step.
struct StepPlan {
    long long full_steps;
    double remainder;
};
StepPlan plan_steps(double t_final, double tau);

struct EnsembleResult {
    // n_runs x N; rows of diverged runs hold +inf.
    Mat final_states;
    std::vector<bool> diverged;
    std::size_t diverged_count = 0;
    EventTotals events;
    double wall_time = 0.0;
    // Per-run paths when spec.record == full_trajectory.
    std::vector<std::vector<TrajectoryPoint>> paths;

    std::size_t n_runs() const { return diverged.size(); }
    // Finite samples of one species (diverged rows dropped).
    std::vector<double> column(std::size_t species) const;
};

// workers == 0 picks the hardware concurrency.
EnsembleResult run_ensemble(const EnsembleSpec& spec, unsigned workers = 1);

unsigned resolve_workers(const std::string& flag);

// Output.
void write_ensemble_csv(std::ostream& os, const ReactionNetwork& net, const EnsembleResult& r);
void write_trajectory_csv(std::ostream& os, const ReactionNetwork& net, const EnsembleResult& r);
std::string ensemble_summary_json(const EnsembleSpec& spec, const EnsembleResult& r);

struct LoadedEnsemble {
    std::vector<std::string> species;
    Mat states;
    std::vector<bool> diverged;

    std::vector<double> column(std::size_t species) const;
};
LoadedEnsemble read_ensemble_csv(std::istream& is);

}  // namespace tauleap
