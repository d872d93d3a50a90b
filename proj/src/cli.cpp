#include "tauleap/cli.hpp"

#include "tauleap/analysis.hpp"
#include "tauleap/ensemble.hpp"
#include "tauleap/model.hpp"
#include "tauleap/steppers.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

namespace tauleap {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ReactionNetwork resolve_model(const std::string& name) {
    if (is_builtin_name(name)) return builtin(name);
    if (!fs::exists(name)) throw UsageError("model '" + name + "' is neither a builtin nor an existing file");
    try {
        return load_network(name);
    } catch (const std::ios_base::failure& e) {
        throw IoError(e.what());
    }
}

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path() && !p.parent_path().empty()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + p.string() + "' for writing");
    return os;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream os = open_out(p);
    os << content;
    if (!os) throw IoError("failed writing '" + p.string() + "'");
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
    fs::path p = out;
    if (p.extension() == ".csv") p.replace_extension();
    return fs::path(p.string() + suffix);
}

// Options shared by simulate, compare and reproduce.
struct RunOptions {
    std::string noise = "scaled-poisson";
    std::optional<double> noise_threshold;
    std::string negative_policy = "clamp";
    double newton_tol = NewtonConfig{}.tol;
    int newton_max_iter = NewtonConfig{}.max_iter;
    double divergence_bound = 1e12;
    std::string workers = "1";

    void add_to(CLI::App* app) {
        app->add_option("--noise", noise, "scaled-poisson | two-point | three-point")
            ->check(CLI::IsMember({"scaled-poisson", "two-point", "three-point"}));
        app->add_option("--noise-threshold", noise_threshold,
                        "use the simplified variate when a_j*tau exceeds this (default: 0 for two/three-point)");
        app->add_option("--negative-policy", negative_policy, "allow | clamp")
            ->check(CLI::IsMember({"allow", "clamp"}));
        app->add_option("--newton-tol", newton_tol, "Newton residual tolerance (inf-norm)");
        app->add_option("--newton-max-iter", newton_max_iter, "Newton iteration cap");
        app->add_option("--divergence-bound", divergence_bound, "state magnitude treated as divergence");
        app->add_option("--workers", workers, "worker threads: n or auto (env TAULEAP_WORKERS overrides)");
    }

    StepperConfig stepper(StepperKind kind, double tau) const {
        StepperConfig cfg;
        cfg.kind = kind;
        cfg.tau = tau;
        cfg.noise.kind = parse_noise_kind(noise);
        if (noise_threshold)
            cfg.noise.threshold = *noise_threshold;
        else if (cfg.noise.kind != NoiseKind::scaled_poisson)
            cfg.noise.threshold = 0.0;
        cfg.negative_policy = negative_policy == "allow" ? NegativePolicy::allow : NegativePolicy::clamp_to_zero;
        cfg.newton.tol = newton_tol;
        cfg.newton.max_iter = newton_max_iter;
        cfg.divergence_bound = divergence_bound;
        return cfg;
    }
};

std::size_t resolve_species(const ReactionNetwork* net, const std::vector<std::string>& names,
                            const std::string& sel) {
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == sel) return k;
    try {
        std::size_t used = 0;
        long long v = std::stoll(sel, &used);
        if (used == sel.size() && v >= 0 && static_cast<std::size_t>(v) < names.size())
            return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    (void)net;
    throw UsageError("unknown species '" + sel + "'");
}

Json num_or_inf(double v, bool inf) { return inf ? Json("inf") : Json(v); }

struct Sample {
    std::vector<double> values;
    std::size_t runs = 0;
    std::size_t diverged = 0;
    bool majority_diverged() const { return 2 * diverged > runs; }
};

Json report_json(const Sample& P, const Sample& Q, const ComparisonReport& r) {
    const bool pinf = P.majority_diverged() || P.values.empty();
    const bool qinf = Q.majority_diverged() || Q.values.empty();
    Json j;
    j["mean_P"] = num_or_inf(r.mean_P, pinf);
    j["var_P"] = num_or_inf(r.var_P, pinf);
    j["mean_Q"] = num_or_inf(r.mean_Q, qinf);
    j["var_Q"] = num_or_inf(r.var_Q, qinf);
    if (pinf || qinf) {
        j["kl"] = "inf";
        j["distance"] = "inf";
    } else {
        j["kl"] = r.kl ? Json(*r.kl) : Json(nullptr);
        j["distance"] = r.distance;
    }
    j["skipped_bins"] = r.skipped_bins;
    j["bin_width"] = r.bin_width;
    j["n_P"] = P.runs;
    j["n_Q"] = Q.runs;
    j["diverged_P"] = P.diverged;
    j["diverged_Q"] = Q.diverged;
    return j;
}

Sample sample_from(const EnsembleResult& r, std::size_t species) {
    return {r.column(species), r.n_runs(), r.diverged_count};
}

// ------------------------------------------------------------ commands

int cmd_simulate(const std::string& model, const std::string& method, double tau, std::size_t runs,
                 double tfinal, std::uint64_t seed, const std::string& out, const std::string& record,
                 const RunOptions& opt, std::ostream& os) {
    EnsembleSpec spec;
    spec.network = resolve_model(model);
    spec.stepper = opt.stepper(parse_method(method), tau);
    spec.t_final = tfinal;
    spec.n_runs = runs;
    spec.master_seed = seed;
    spec.record = record == "trajectory" ? RecordMode::full_trajectory : RecordMode::final_state_only;
    validate(spec);
    const unsigned workers = resolve_workers(opt.workers);

    EnsembleResult res = run_ensemble(spec, workers);
    {
        std::ofstream f = open_out(out);
        write_ensemble_csv(f, spec.network, res);
        if (!f) throw IoError("failed writing '" + out + "'");
    }
    if (spec.record == RecordMode::full_trajectory) {
        std::ofstream f = open_out(sibling(out, ".trajectory.csv"));
        write_trajectory_csv(f, spec.network, res);
        if (!f) throw IoError("failed writing trajectory file");
    }
    const std::string summary = ensemble_summary_json(spec, res);
    write_file(sibling(out, ".summary.json"), summary);
    os << summary;
    return kExitOk;
}

Sample load_sample(const std::string& path, const std::string& species, std::vector<std::string>* names) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    LoadedEnsemble e;
    try {
        e = read_ensemble_csv(in);
    } catch (const std::runtime_error& ex) {
        throw UsageError(path + ": " + ex.what());
    }
    if (names) *names = e.species;
    const std::size_t k = resolve_species(nullptr, e.species, species);
    Sample s;
    s.values = e.column(k);
    s.runs = e.diverged.size();
    for (bool d : e.diverged) s.diverged += d ? 1 : 0;
    return s;
}

void write_densities(const fs::path& p, const Sample& P, const Sample& Q, long long dx) {
    const AlignedPair a = align(build_histogram(P.values, dx), build_histogram(Q.values, dx));
    std::ostringstream os;
    os << "bin_lo,density_P,density_Q\n";
    for (std::size_t i = 0; i < a.p.size(); ++i) {
        const double w = static_cast<double>(a.bin_width);
        os << a.lo + static_cast<long long>(i) * a.bin_width << ',' << a.p[i] / w << ',' << a.q[i] / w << '\n';
    }
    write_file(p, os.str());
}

void write_table(const fs::path& dir, const std::string& table, const Json& rows) {
    std::ostringstream csv;
    csv << "method,tau,mean,variance,kl,distance,diverged_count,runs,wall_time\n";
    auto cell = [](const Json& v) -> std::string {
        if (v.is_null()) return "";
        if (v.is_string()) return v.get<std::string>();
        std::ostringstream s;
        s.precision(10);
        s << v.get<double>();
        return s.str();
    };
    for (const Json& r : rows) {
        csv << r["method"].get<std::string>() << ',' << cell(r["tau"]) << ',' << cell(r["mean"]) << ','
            << cell(r["variance"]) << ',' << cell(r["kl"]) << ',' << cell(r["distance"]) << ','
            << r["diverged_count"].get<std::size_t>() << ',' << r["runs"].get<std::size_t>() << ','
            << cell(r["wall_time"]) << '\n';
    }
    write_file(dir / (table + "_table.csv"), csv.str());
    Json doc;
    doc["table"] = table;
    doc["rows"] = rows;
    write_file(dir / (table + "_table.json"), doc.dump(2) + "\n");
}

int cmd_reproduce(const std::string& table, std::size_t runs, std::uint64_t seed, long long dx,
                  const std::string& out_dir, const RunOptions& opt, std::ostream& os, std::ostream& err) {
    ReactionNetwork net;
    std::vector<double> taus;
    double tfinal = 0;
    if (table == "dimer") {
        net = dimer();
        taus = {8e-4, 4e-4, 2e-4, 1e-4};
        tfinal = 0.2;
    } else if (table == "schlogl") {
        net = schlogl();
        taus = {0.8, 0.4, 0.2, 0.1};
        tfinal = 4.0;
    } else {
        throw UsageError("reproduce supports 'dimer' and 'schlogl'");
    }
    if (dx < 1) throw UsageError("--dx must be >= 1");
    const unsigned workers = resolve_workers(opt.workers);
    const fs::path dir(out_dir);
    const std::size_t species = 0;

    auto run = [&](StepperKind kind, double tau) {
        EnsembleSpec spec;
        spec.network = net;
        spec.stepper = opt.stepper(kind, tau);
        spec.t_final = tfinal;
        spec.n_runs = runs;
        spec.master_seed = seed;
        validate(spec);
        EnsembleResult r = run_ensemble(spec, workers);
        std::ostringstream name;
        name << table << '_' << method_name(kind);
        if (kind != StepperKind::ssa) name << '_' << tau;
        std::ofstream f = open_out(dir / (name.str() + ".csv"));
        write_ensemble_csv(f, net, r);
        err << "reproduce " << name.str() << ": " << r.wall_time << " s\n";
        return r;
    };

    Json rows = Json::array();
    EnsembleResult ssa = run(StepperKind::ssa, 0.0);
    const Sample ref = sample_from(ssa, species);
    {
        const Summary s = summarize(ref.values);
        Json row;
        row["method"] = "ssa";
        row["tau"] = nullptr;
        row["mean"] = s.mean;
        row["variance"] = s.variance;
        row["kl"] = nullptr;
        row["distance"] = nullptr;
        row["diverged_count"] = ssa.diverged_count;
        row["runs"] = runs;
        row["wall_time"] = ssa.wall_time;
        rows.push_back(row);
    }
    for (StepperKind kind : kAllKinds) {
        if (kind == StepperKind::ssa) continue;
        for (double tau : taus) {
            EnsembleResult r = run(kind, tau);
            const Sample s = sample_from(r, species);
            Json row;
            row["method"] = method_name(kind);
            row["tau"] = tau;
            if (s.majority_diverged() || s.values.empty()) {
                row["mean"] = row["variance"] = row["kl"] = row["distance"] = "inf";
            } else {
                // P is the reference histogram.
                const ComparisonReport c = compare_samples(ref.values, s.values, dx);
                row["mean"] = c.mean_Q;
                row["variance"] = c.var_Q;
                row["kl"] = c.kl ? Json(*c.kl) : Json(nullptr);
                row["distance"] = c.distance;
            }
            row["diverged_count"] = r.diverged_count;
            row["runs"] = runs;
            row["wall_time"] = r.wall_time;
            rows.push_back(row);
        }
    }
    write_table(dir, table, rows);
    Json doc;
    doc["table"] = table;
    doc["bin_width"] = dx;
    doc["rows"] = rows;
    os << doc.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stochastic chemical kinetics: SSA and tau-leaping ensembles"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    RunOptions opt;

    // simulate
    auto* sim = app.add_subcommand("simulate", "run an ensemble and write final states");
    std::string model, method, out_path, record = "final";
    double tau = 0.0, tfinal = 0.0;
    std::size_t runs = 0;
    std::uint64_t seed = 0;
    sim->add_option("--model", model, "builtin name or model file")->required();
    sim->add_option("--method", method, "ssa explicit implicit trapezoidal bebe trtr betr wt2-a1b1 wt2-a1b0 wt2-a05")
        ->required();
    sim->add_option("--tau", tau, "step size (ignored by ssa)");
    sim->add_option("--runs", runs, "number of trajectories")->required();
    sim->add_option("--tfinal", tfinal, "final time")->required();
    sim->add_option("--seed", seed, "master seed");
    sim->add_option("--out", out_path, "ensemble CSV path")->required();
    sim->add_option("--record", record, "final | trajectory")->check(CLI::IsMember({"final", "trajectory"}));
    opt.add_to(sim);

    // compare
    auto* cmp = app.add_subcommand("compare", "compare two ensembles (P is the reference)");
    std::string p_csv, q_csv, species = "0", p_method, q_method, cmp_out, densities_out;
    double p_tau = 0, q_tau = 0;
    long long dx = 1;
    cmp->add_option("--p", p_csv, "reference ensemble CSV");
    cmp->add_option("--q", q_csv, "second ensemble CSV");
    cmp->add_option("--model", model, "model for --p-method/--q-method runs");
    cmp->add_option("--p-method", p_method);
    cmp->add_option("--p-tau", p_tau);
    cmp->add_option("--q-method", q_method);
    cmp->add_option("--q-tau", q_tau);
    cmp->add_option("--runs", runs);
    cmp->add_option("--tfinal", tfinal);
    cmp->add_option("--seed", seed);
    cmp->add_option("--species", species, "species name or index");
    cmp->add_option("--dx", dx, "histogram bin width");
    cmp->add_option("--out", cmp_out, "report JSON path");
    cmp->add_option("--densities", densities_out, "aligned densities CSV path");
    opt.add_to(cmp);

    // predict
    auto* pred = app.add_subcommand("predict", "isomerization stability and asymptotics");
    double c1 = 0, c2 = 0, xt = 0;
    pred->add_option("--method", method)->required();
    pred->add_option("--c1", c1)->required();
    pred->add_option("--c2", c2)->required();
    pred->add_option("--xt", xt)->required();
    pred->add_option("--tau", tau)->required();

    auto* list = app.add_subcommand("list-models", "list builtin models");

    auto* rep = app.add_subcommand("reproduce", "run a method x tau table (dimer | schlogl)");
    std::string table, rep_dir = "reproduce";
    std::size_t rep_runs = 10000;
    std::uint64_t rep_seed = 1;
    long long rep_dx = 10;
    rep->add_option("table", table, "dimer | schlogl")->required()->check(CLI::IsMember({"dimer", "schlogl"}));
    rep->add_option("--runs", rep_runs, "runs per cell");
    rep->add_option("--seed", rep_seed);
    rep->add_option("--dx", rep_dx, "histogram bin width for distances");
    rep->add_option("--out", rep_dir, "output directory");
    opt.add_to(rep);

    std::vector<std::string> argv_store;
    argv_store.push_back("tauleap");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (*sim) {
            return cmd_simulate(model, method, tau, runs, tfinal, seed, out_path, record, opt, out);
        }
        if (*cmp) {
            Sample P, Q;
            if (!p_csv.empty() || !q_csv.empty()) {
                if (p_csv.empty() || q_csv.empty()) throw UsageError("compare needs both --p and --q");
                P = load_sample(p_csv, species, nullptr);
                Q = load_sample(q_csv, species, nullptr);
            } else {
                if (model.empty() || p_method.empty() || q_method.empty() || runs == 0 || !(tfinal > 0))
                    throw UsageError("compare needs --p/--q files or --model --p-method --q-method --runs --tfinal");
                const ReactionNetwork net = resolve_model(model);
                const std::size_t k = resolve_species(&net, net.species_names(), species);
                auto run = [&](const std::string& m, double t) {
                    EnsembleSpec spec;
                    spec.network = net;
                    spec.stepper = opt.stepper(parse_method(m), t);
                    spec.t_final = tfinal;
                    spec.n_runs = runs;
                    spec.master_seed = seed;
                    validate(spec);
                    return spec;
                };
                EnsembleSpec sp = run(p_method, p_tau);
                EnsembleSpec sq = run(q_method, q_tau);
                const unsigned workers = resolve_workers(opt.workers);
                P = sample_from(run_ensemble(sp, workers), k);
                Q = sample_from(run_ensemble(sq, workers), k);
            }
            if (dx < 1) throw UsageError("--dx must be >= 1");
            const ComparisonReport r = compare_samples(P.values, Q.values, dx);
            const std::string text = report_json(P, Q, r).dump(2) + "\n";
            if (!cmp_out.empty()) write_file(cmp_out, text);
            if (!densities_out.empty()) write_densities(densities_out, P, Q, dx);
            out << text;
            return kExitOk;
        }
        if (*pred) {
            const StabilityPrediction p = predict_isomerization(parse_method(method), c1, c2, xt, tau);
            Json j;
            j["method"] = method_name(p.method);
            j["lambda_tau"] = p.lambda_tau;
            j["stable"] = p.stable;
            j["asymptotic_mean"] = p.asymptotic_mean ? Json(*p.asymptotic_mean) : Json(nullptr);
            j["asymptotic_variance"] = p.asymptotic_variance ? Json(*p.asymptotic_variance) : Json(nullptr);
            j["variance_available"] = p.variance_available;
            out << j.dump(2) << '\n';
            return kExitOk;
        }
        if (*list) {
            for (const char* name : {"dimer", "schlogl", "elf"}) {
                const ReactionNetwork net = builtin(name);
                out << name << "\tspecies=" << net.num_species() << "\treactions=" << net.num_reactions() << '\n';
            }
            out << "isomerization:c1,c2,XT,x0\tspecies=1\treactions=2\n";
            return kExitOk;
        }
        if (*rep) return cmd_reproduce(table, rep_runs, rep_seed, rep_dx, rep_dir, opt, out, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::ios_base::failure& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace tauleap
