#include "tauleap/newton.hpp"

#include <stdexcept>

namespace tauleap {

std::string newton_status_name(NewtonStatus s) {
    switch (s) {
        case NewtonStatus::converged: return "converged";
        case NewtonStatus::max_iterations: return "max_iterations";
        case NewtonStatus::singular_jacobian: return "singular_jacobian";
        case NewtonStatus::stagnated: return "stagnated";
        case NewtonStatus::non_finite: return "non_finite";
    }
    return "?";
}

void validate(const NewtonConfig& cfg) {
    if (!(cfg.tol > 0)) throw std::invalid_argument("newton tol must be > 0");
    if (cfg.max_iter < 1) throw std::invalid_argument("newton max_iter must be >= 1");
    if (!(cfg.damping > 0 && cfg.damping <= 1)) throw std::invalid_argument("newton damping must be in (0,1]");
    if (cfg.max_halvings < 0) throw std::invalid_argument("newton max_halvings must be >= 0");
}

}  // namespace tauleap
