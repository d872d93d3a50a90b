#include "tauleap/ensemble.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace tauleap {

namespace {

std::string format_count(double v) {
    if (!std::isfinite(v)) return "inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(v));
    return std::string(buf, res.ptr);
}

std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_ensemble_csv(std::ostream& os, const ReactionNetwork& net, const EnsembleResult& r) {
    os << "run_index";
    for (const auto& name : net.species_names()) os << ',' << name;
    os << ",diverged\n";
    for (std::size_t i = 0; i < r.n_runs(); ++i) {
        os << i;
        for (Eigen::Index k = 0; k < r.final_states.cols(); ++k)
            os << ',' << (r.diverged[i] ? std::string("inf")
                                        : format_count(r.final_states(static_cast<Eigen::Index>(i), k)));
        os << ',' << (r.diverged[i] ? 1 : 0) << '\n';
    }
}

void write_trajectory_csv(std::ostream& os, const ReactionNetwork& net, const EnsembleResult& r) {
    os << "run_index,t";
    for (const auto& name : net.species_names()) os << ',' << name;
    os << '\n';
    for (std::size_t i = 0; i < r.paths.size(); ++i) {
        for (const TrajectoryPoint& p : r.paths[i]) {
            os << i << ',' << format_real(p.t);
            for (Eigen::Index k = 0; k < p.state.size(); ++k) os << ',' << format_count(p.state[k]);
            os << '\n';
        }
    }
}

std::string ensemble_summary_json(const EnsembleSpec& spec, const EnsembleResult& r) {
    nlohmann::ordered_json j;
    j["model_species"] = spec.network.species_names();
    j["method"] = method_name(spec.stepper.kind);
    if (spec.stepper.kind != StepperKind::ssa) j["tau"] = spec.stepper.tau;
    j["t_final"] = spec.t_final;
    j["runs"] = spec.n_runs;
    j["seed"] = spec.master_seed;
    const std::size_t valid = r.n_runs() - r.diverged_count;
    const bool majority_diverged = 2 * r.diverged_count > r.n_runs();
    nlohmann::ordered_json species = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < spec.network.num_species(); ++k) {
        nlohmann::ordered_json s;
        s["name"] = spec.network.species_names()[k];
        if (majority_diverged) {
            s["mean"] = "inf";
            s["variance"] = "inf";
        } else {
            std::vector<double> xs = r.column(k);
            double mean = 0.0;
            for (double v : xs) mean += v;
            mean /= static_cast<double>(xs.size());
            double ss = 0.0;
            for (double v : xs) ss += (v - mean) * (v - mean);
            s["mean"] = mean;
            s["variance"] = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
        }
        species.push_back(s);
    }
    j["species"] = species;
    j["valid_runs"] = valid;
    j["diverged_count"] = r.diverged_count;
    j["events"] = {{"steps", r.events.steps},
                   {"ssa_events", r.events.ssa_events},
                   {"newton_nonconverged", r.events.newton_nonconverged},
                   {"negatives_clamped", r.events.negatives_clamped}};
    j["wall_time"] = r.wall_time;
    return j.dump(2) + "\n";
}

std::vector<double> LoadedEnsemble::column(std::size_t species) const {
    std::vector<double> out;
    for (std::size_t i = 0; i < diverged.size(); ++i)
        if (!diverged[i]) out.push_back(states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(species)));
    return out;
}

LoadedEnsemble read_ensemble_csv(std::istream& is) {
    LoadedEnsemble e;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty ensemble CSV");
    auto header = split_csv(line);
    if (header.size() < 3 || header.front() != "run_index" || header.back() != "diverged")
        throw std::runtime_error("ensemble CSV header must be run_index,<species...>,diverged");
    e.species.assign(header.begin() + 1, header.end() - 1);
    const std::size_t n = e.species.size();
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv(line);
        if (cells.size() != n + 2)
            throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(n + 2) + " fields");
        std::vector<double> row(n);
        for (std::size_t k = 0; k < n; ++k) {
            const std::string& c = cells[k + 1];
            if (c == "inf") {
                row[k] = std::numeric_limits<double>::infinity();
                continue;
            }
            double v = 0.0;
            auto res = std::from_chars(c.data(), c.data() + c.size(), v);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size())
                throw std::runtime_error("line " + std::to_string(line_no) + ": bad number '" + c + "'");
            row[k] = v;
        }
        const std::string& d = cells.back();
        if (d != "0" && d != "1")
            throw std::runtime_error("line " + std::to_string(line_no) + ": diverged must be 0 or 1");
        e.diverged.push_back(d == "1");
        rows.push_back(std::move(row));
    }
    e.states.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < n; ++k)
            e.states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    return e;
}

}  // namespace tauleap
