#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tauleap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One factor of a mass-action propensity. The factor is the falling
// factorial z(z-1)...(z-order+1)/order! of z = x[species], or of
// z = total - x[species] for a complement term (a conserved partner
// population that is not stored in the state).
struct ReactantTerm {
    std::size_t species = 0;
    int order = 1;
    bool complement = false;
    double total = 0.0;
};

struct Reaction {
    double rate = 0.0;
    double multiplier = 1.0;
    std::vector<ReactantTerm> reactants;
    // Net state change of this reaction, indexed by species.
    std::vector<int> change;
};

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ReactionNetwork {
public:
    ReactionNetwork() = default;
    ReactionNetwork(std::vector<std::string> species_names, std::vector<double> initial_state,
                    std::vector<Reaction> reactions);

    std::size_t num_species() const { return names_.size(); }
    std::size_t num_reactions() const { return reactions_.size(); }

    const std::vector<std::string>& species_names() const { return names_; }
    const Vec& initial_state() const { return initial_; }
    const std::vector<Reaction>& reactions() const { return reactions_; }
    const Reaction& reaction(std::size_t j) const { return reactions_.at(j); }

    // N x M stoichiometry; column j is nu_j.
    const Mat& nu() const { return nu_; }
    int nu(std::size_t k, std::size_t j) const { return static_cast<int>(nu_(k, j)); }

    std::size_t species_index(std::string_view name) const;

private:
    std::vector<std::string> names_;
    Vec initial_;
    std::vector<Reaction> reactions_;
    Mat nu_;
};

// Propensity a_j(x). Zero whenever a falling-factorial factor would go
// negative, which also keeps real-valued Newton iterates non-negative.
double propensity(const ReactionNetwork& net, std::size_t j, const Vec& x);

// The underlying polynomial without the zero clamp.
double propensity_polynomial(const ReactionNetwork& net, std::size_t j, const Vec& x);

// True when a_j(x) is given by the polynomial (no factor below zero).
bool propensity_active(const ReactionNetwork& net, std::size_t j, const Vec& x);

Vec propensity_gradient(const ReactionNetwork& net, std::size_t j, const Vec& x);
Mat propensity_hessian(const ReactionNetwork& net, std::size_t j, const Vec& x);

// Returns g_m = sum_{k,l} d^3 a_j / dx_k dx_l dx_m * Q(k,l).
Vec propensity_third_contraction(const ReactionNetwork& net, std::size_t j, const Vec& x,
                                 const Mat& Q);

Vec drift(const ReactionNetwork& net, const Vec& x);
Vec propensities(const ReactionNetwork& net, const Vec& x);

// Allocation-free variants used in the stepping loops. The add_* forms
// accumulate scale * (derivative) into out.
void propensities_into(const ReactionNetwork& net, const Vec& x, Vec& out);
void add_gradient(const ReactionNetwork& net, std::size_t j, const Vec& x, double scale,
                  Vec& out);
void add_hessian(const ReactionNetwork& net, std::size_t j, const Vec& x, double scale,
                 Mat& out);
void add_third_contraction(const ReactionNetwork& net, std::size_t j, const Vec& x,
                           const Mat& Q, double scale, Vec& out);

// Clamped propensity plus a gradient consistent with the clamp: when any
// factor is below zero both the value and g are zero. g is overwritten.
double propensity_with_gradient(const ReactionNetwork& net, std::size_t j, const Vec& x, Vec& g);

// H_j(x) : Q  and  H_j(x) v  (polynomial Hessian).
double hessian_contract(const ReactionNetwork& net, std::size_t j, const Vec& x, const Mat& Q);
void add_hessian_times(const ReactionNetwork& net, std::size_t j, const Vec& x, const Vec& v,
                       double scale, Vec& out);

// Built-in benchmark systems.
ReactionNetwork isomerization(double c1, double c2, double total, double x0);
ReactionNetwork dimer();
ReactionNetwork schlogl();
ReactionNetwork elf();

// "dimer", "schlogl", "elf" or "isomerization:c1,c2,XT,x0".
ReactionNetwork builtin(std::string_view name);
bool is_builtin_name(std::string_view name);
std::vector<std::string> builtin_names();

// JSON model files.
ReactionNetwork parse_network(std::string_view text);
std::string serialize_network(const ReactionNetwork& net);
ReactionNetwork load_network(const std::string& path);

}  // namespace tauleap
