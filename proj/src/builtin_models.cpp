#include "tauleap/model.hpp"

#include <cmath>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>

namespace tauleap {

namespace {

using Species = std::initializer_list<std::pair<std::size_t, int>>;

Reaction mass_action(double rate, std::size_t n, Species reactants, Species change,
                     double multiplier = 1.0) {
    Reaction r;
    r.rate = rate;
    r.multiplier = multiplier;
    for (auto [s, order] : reactants) r.reactants.push_back({s, order, false, 0.0});
    r.change.assign(n, 0);
    for (auto [s, dv] : change) r.change[s] += dv;
    return r;
}

}  // namespace

ReactionNetwork isomerization(double c1, double c2, double total, double x0) {
    if (!(c1 >= 0) || !(c2 >= 0)) throw ModelError("isomerization rates must be non-negative");
    if (!(total >= 0) || total != std::floor(total))
        throw ModelError("isomerization total must be a non-negative integer");
    if (!(x0 >= 0) || x0 > total) throw ModelError("isomerization x0 must lie in [0, XT]");

    Reaction forward = mass_action(c1, 1, {{0, 1}}, {{0, -1}});
    Reaction reverse;
    reverse.rate = c2;
    reverse.reactants.push_back({0, 1, true, total});
    reverse.change = {+1};
    return ReactionNetwork({"S1"}, {x0}, {forward, reverse});
}

ReactionNetwork dimer() {
    const std::size_t n = 3;
    return ReactionNetwork({"S1", "S2", "S3"}, {400, 798, 0},
                           {
                               mass_action(1.0, n, {{0, 1}}, {{0, -1}}),
                               mass_action(10.0, n, {{0, 2}}, {{0, -2}, {1, +1}}),
                               mass_action(1000.0, n, {{1, 1}}, {{0, +2}, {1, -1}}),
                               mass_action(0.1, n, {{1, 1}}, {{1, -1}, {2, +1}}),
                           });
}

ReactionNetwork schlogl() {
    const double n1 = 1e5;
    const double n2 = 2e5;
    return ReactionNetwork({"X"}, {250},
                           {
                               mass_action(3e-7, 1, {{0, 2}}, {{0, +1}}, n1),
                               mass_action(1e-4, 1, {{0, 3}}, {{0, -1}}),
                               mass_action(1e-3, 1, {}, {{0, +1}}, n2),
                               mass_action(3.5, 1, {{0, 1}}, {{0, -1}}),
                           });
}

ReactionNetwork elf() {
    enum : std::size_t { A, B, EA, EB, EAB, EAB2, EBA, EBA2, N };
    return ReactionNetwork(
        {"A", "B", "EA", "EB", "EAB", "EAB2", "EBA", "EBA2"},
        {2000, 1500, 950, 950, 200, 50, 200, 50},
        {
            mass_action(15.0, N, {{EA, 1}}, {{A, +1}}),
            mass_action(15.0, N, {{EB, 1}}, {{B, +1}}),
            mass_action(1e-4, N, {{EA, 1}, {B, 1}}, {{EA, -1}, {B, -1}, {EAB, +1}}),
            mass_action(0.6, N, {{EAB, 1}}, {{EAB, -1}, {EA, +1}, {B, +1}}),
            mass_action(1e-4, N, {{EAB, 1}, {B, 1}}, {{EAB, -1}, {B, -1}, {EAB2, +1}}),
            mass_action(0.6, N, {{EAB2, 1}}, {{EAB2, -1}, {EAB, +1}, {B, +1}}),
            mass_action(0.5, N, {{A, 1}}, {{A, -1}}),
            mass_action(1e-4, N, {{EB, 1}, {A, 1}}, {{EB, -1}, {A, -1}, {EBA, +1}}),
            mass_action(0.6, N, {{EBA, 1}}, {{EBA, -1}, {EB, +1}, {A, +1}}),
            mass_action(1e-4, N, {{EBA, 1}, {A, 1}}, {{EBA, -1}, {A, -1}, {EBA2, +1}}),
            mass_action(0.6, N, {{EBA2, 1}}, {{EBA2, -1}, {EBA, +1}, {A, +1}}),
            mass_action(0.5, N, {{B, 1}}, {{B, -1}}),
        });
}

std::vector<std::string> builtin_names() {
    return {"dimer", "schlogl", "elf", "isomerization:c1,c2,XT,x0"};
}

bool is_builtin_name(std::string_view name) {
    return name == "dimer" || name == "schlogl" || name == "elf" ||
           name.substr(0, 14) == "isomerization:";
}

ReactionNetwork builtin(std::string_view name) {
    if (name == "dimer") return dimer();
    if (name == "schlogl") return schlogl();
    if (name == "elf") return elf();
    if (name.substr(0, 14) == "isomerization:") {
        std::string args(name.substr(14));
        std::istringstream in(args);
        double v[4];
        for (int i = 0; i < 4; ++i) {
            std::string item;
            if (!std::getline(in, item, ',')) throw ModelError("isomerization needs c1,c2,XT,x0");
            try {
                std::size_t used = 0;
                v[i] = std::stod(item, &used);
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw ModelError("bad isomerization parameter '" + item + "'");
            }
        }
        std::string rest;
        if (std::getline(in, rest)) throw ModelError("isomerization takes exactly four parameters");
        return isomerization(v[0], v[1], v[2], v[3]);
    }
    throw ModelError("unknown builtin model '" + std::string(name) + "'");
}

}  // namespace tauleap
