#include "tauleap/model.hpp"

#include <array>
#include <cmath>
#include <string>

namespace tauleap {

namespace {

constexpr int kMaxTerms = 3;

// Value and first three derivatives of the order-n falling factorial over n!.
inline void factorial_derivs(int order, double z, double* d) {
    switch (order) {
        case 1:
            d[0] = z;
            d[1] = 1.0;
            d[2] = 0.0;
            d[3] = 0.0;
            break;
        case 2:
            d[0] = 0.5 * z * (z - 1.0);
            d[1] = z - 0.5;
            d[2] = 1.0;
            d[3] = 0.0;
            break;
        default:
            d[0] = z * (z - 1.0) * (z - 2.0) / 6.0;
            d[1] = (3.0 * z * z - 6.0 * z + 2.0) / 6.0;
            d[2] = z - 1.0;
            d[3] = 1.0;
            break;
    }
}

struct Terms {
    int n = 0;
    bool active = true;
    std::array<std::size_t, kMaxTerms> species{};
    // d[t][m] = s_t^m * f_t^{(m)}(z_t), chain-rule sign folded in.
    std::array<std::array<double, 4>, kMaxTerms> d{};
};

inline Terms eval_terms(const Reaction& r, const Vec& x) {
    Terms t;
    t.n = static_cast<int>(r.reactants.size());
    for (int i = 0; i < t.n; ++i) {
        const ReactantTerm& term = r.reactants[i];
        double z = term.complement ? term.total - x[term.species] : x[term.species];
        if (z < term.order - 1) t.active = false;
        factorial_derivs(term.order, z, t.d[i].data());
        if (term.complement) {
            t.d[i][1] = -t.d[i][1];
            t.d[i][3] = -t.d[i][3];
        }
        t.species[i] = term.species;
    }
    return t;
}

inline double product_with(const Terms& t, const int* mult) {
    double p = 1.0;
    for (int w = 0; w < t.n; ++w) p *= t.d[w][mult[w]];
    return p;
}

void check_index(const ReactionNetwork& net, std::size_t j, const Vec& x) {
    if (j >= net.num_reactions())
        throw std::out_of_range("reaction index " + std::to_string(j) + " out of range");
    if (static_cast<std::size_t>(x.size()) != net.num_species())
        throw std::invalid_argument("state length does not match species count");
}

}  // namespace

ReactionNetwork::ReactionNetwork(std::vector<std::string> species_names,
                                 std::vector<double> initial_state,
                                 std::vector<Reaction> reactions)
    : names_(std::move(species_names)), reactions_(std::move(reactions)) {
    const std::size_t n = names_.size();
    const std::size_t m = reactions_.size();
    if (n == 0) throw ModelError("network needs at least one species");
    if (m == 0) throw ModelError("network needs at least one reaction");
    if (initial_state.size() != n) throw ModelError("initial state length != species count");
    initial_ = Vec(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        double v = initial_state[k];
        if (!std::isfinite(v) || v < 0 || v != std::floor(v))
            throw ModelError("initial count of '" + names_[k] +
                             "' must be a non-negative integer");
        initial_[static_cast<Eigen::Index>(k)] = v;
    }
    nu_ = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
        Reaction& r = reactions_[j];
        const std::string where = "reaction " + std::to_string(j) + ": ";
        if (!std::isfinite(r.rate) || r.rate < 0) throw ModelError(where + "negative rate constant");
        if (!std::isfinite(r.multiplier) || r.multiplier < 0)
            throw ModelError(where + "negative multiplier");
        int total_order = 0;
        for (const ReactantTerm& t : r.reactants) {
            if (t.species >= n) throw ModelError(where + "reactant species index out of range");
            if (t.order < 1 || t.order > 3) throw ModelError(where + "unsupported order");
            if (t.complement && (!std::isfinite(t.total) || t.total < 0))
                throw ModelError(where + "complement total must be non-negative");
            total_order += t.order;
        }
        if (total_order > 3) throw ModelError(where + "unsupported order (total order > 3)");
        if (r.change.size() != n) throw ModelError(where + "change vector length != species count");
        for (std::size_t k = 0; k < n; ++k)
            nu_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = r.change[k];
    }
}

std::size_t ReactionNetwork::species_index(std::string_view name) const {
    for (std::size_t k = 0; k < names_.size(); ++k)
        if (names_[k] == name) return k;
    throw ModelError("unknown species '" + std::string(name) + "'");
}

double propensity_polynomial(const ReactionNetwork& net, std::size_t j, const Vec& x) {
    check_index(net, j, x);
    const Reaction& r = net.reaction(j);
    Terms t = eval_terms(r, x);
    const int zero[kMaxTerms] = {0, 0, 0};
    return r.multiplier * r.rate * product_with(t, zero);
}

bool propensity_active(const ReactionNetwork& net, std::size_t j, const Vec& x) {
    check_index(net, j, x);
    return eval_terms(net.reaction(j), x).active;
}

double propensity(const ReactionNetwork& net, std::size_t j, const Vec& x) {
    check_index(net, j, x);
    const Reaction& r = net.reaction(j);
    Terms t = eval_terms(r, x);
    if (!t.active) return 0.0;
    const int zero[kMaxTerms] = {0, 0, 0};
    double a = r.multiplier * r.rate * product_with(t, zero);
    return a > 0.0 ? a : 0.0;
}

void propensities_into(const ReactionNetwork& net, const Vec& x, Vec& out) {
    const auto& rs = net.reactions();
    for (std::size_t j = 0; j < rs.size(); ++j) {
        const Reaction& r = rs[j];
        double a = r.multiplier * r.rate;
        for (const ReactantTerm& term : r.reactants) {
            double z = term.complement ? term.total - x[term.species] : x[term.species];
            if (z < term.order - 1) {
                a = 0.0;
                break;
            }
            switch (term.order) {
                case 1: a *= z; break;
                case 2: a *= 0.5 * z * (z - 1.0); break;
                default: a *= z * (z - 1.0) * (z - 2.0) / 6.0; break;
            }
        }
        out[static_cast<Eigen::Index>(j)] = a > 0.0 ? a : 0.0;
    }
}

Vec propensities(const ReactionNetwork& net, const Vec& x) {
    if (static_cast<std::size_t>(x.size()) != net.num_species())
        throw std::invalid_argument("state length does not match species count");
    Vec a(static_cast<Eigen::Index>(net.num_reactions()));
    propensities_into(net, x, a);
    return a;
}

void add_gradient(const ReactionNetwork& net, std::size_t j, const Vec& x, double scale,
                  Vec& out) {
    const Reaction& r = net.reactions()[j];
    Terms t = eval_terms(r, x);
    const double base = scale * r.multiplier * r.rate;
    for (int a = 0; a < t.n; ++a) {
        int mult[kMaxTerms] = {0, 0, 0};
        mult[a] = 1;
        out[static_cast<Eigen::Index>(t.species[a])] += base * product_with(t, mult);
    }
}

void add_hessian(const ReactionNetwork& net, std::size_t j, const Vec& x, double scale,
                 Mat& out) {
    const Reaction& r = net.reactions()[j];
    Terms t = eval_terms(r, x);
    const double base = scale * r.multiplier * r.rate;
    for (int a = 0; a < t.n; ++a) {
        for (int b = 0; b < t.n; ++b) {
            int mult[kMaxTerms] = {0, 0, 0};
            ++mult[a];
            ++mult[b];
            out(static_cast<Eigen::Index>(t.species[a]), static_cast<Eigen::Index>(t.species[b])) +=
                base * product_with(t, mult);
        }
    }
}

void add_third_contraction(const ReactionNetwork& net, std::size_t j, const Vec& x,
                           const Mat& Q, double scale, Vec& out) {
    const Reaction& r = net.reactions()[j];
    Terms t = eval_terms(r, x);
    const double base = scale * r.multiplier * r.rate;
    for (int a = 0; a < t.n; ++a) {
        for (int b = 0; b < t.n; ++b) {
            const double q = Q(static_cast<Eigen::Index>(t.species[a]),
                               static_cast<Eigen::Index>(t.species[b]));
            if (q == 0.0) continue;
            for (int c = 0; c < t.n; ++c) {
                int mult[kMaxTerms] = {0, 0, 0};
                ++mult[a];
                ++mult[b];
                ++mult[c];
                out[static_cast<Eigen::Index>(t.species[c])] += base * q * product_with(t, mult);
            }
        }
    }
}

double propensity_with_gradient(const ReactionNetwork& net, std::size_t j, const Vec& x, Vec& g) {
    const Reaction& r = net.reactions()[j];
    Terms t = eval_terms(r, x);
    g.setZero(x.size());
    if (!t.active) return 0.0;
    const double base = r.multiplier * r.rate;
    for (int a = 0; a < t.n; ++a) {
        int mult[kMaxTerms] = {0, 0, 0};
        mult[a] = 1;
        g[static_cast<Eigen::Index>(t.species[a])] += base * product_with(t, mult);
    }
    const int zero[kMaxTerms] = {0, 0, 0};
    double a = base * product_with(t, zero);
    return a > 0.0 ? a : 0.0;
}

double hessian_contract(const ReactionNetwork& net, std::size_t j, const Vec& x, const Mat& Q) {
    const Reaction& r = net.reactions()[j];
    Terms t = eval_terms(r, x);
    double sum = 0.0;
    for (int a = 0; a < t.n; ++a) {
        for (int b = 0; b < t.n; ++b) {
            int mult[kMaxTerms] = {0, 0, 0};
            ++mult[a];
            ++mult[b];
            sum += Q(static_cast<Eigen::Index>(t.species[a]), static_cast<Eigen::Index>(t.species[b])) *
                   product_with(t, mult);
        }
    }
    return r.multiplier * r.rate * sum;
}

void add_hessian_times(const ReactionNetwork& net, std::size_t j, const Vec& x, const Vec& v,
                       double scale, Vec& out) {
    const Reaction& r = net.reactions()[j];
    Terms t = eval_terms(r, x);
    const double base = scale * r.multiplier * r.rate;
    for (int a = 0; a < t.n; ++a) {
        for (int b = 0; b < t.n; ++b) {
            int mult[kMaxTerms] = {0, 0, 0};
            ++mult[a];
            ++mult[b];
            out[static_cast<Eigen::Index>(t.species[a])] +=
                base * product_with(t, mult) * v[static_cast<Eigen::Index>(t.species[b])];
        }
    }
}

Vec propensity_gradient(const ReactionNetwork& net, std::size_t j, const Vec& x) {
    check_index(net, j, x);
    Vec g = Vec::Zero(x.size());
    add_gradient(net, j, x, 1.0, g);
    return g;
}

Mat propensity_hessian(const ReactionNetwork& net, std::size_t j, const Vec& x) {
    check_index(net, j, x);
    Mat h = Mat::Zero(x.size(), x.size());
    add_hessian(net, j, x, 1.0, h);
    return h;
}

Vec propensity_third_contraction(const ReactionNetwork& net, std::size_t j, const Vec& x,
                                 const Mat& Q) {
    check_index(net, j, x);
    Vec g = Vec::Zero(x.size());
    add_third_contraction(net, j, x, Q, 1.0, g);
    return g;
}

Vec drift(const ReactionNetwork& net, const Vec& x) {
    return net.nu() * propensities(net, x);
}

}  // namespace tauleap
