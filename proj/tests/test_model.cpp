#include <doctest.h>

#include "tauleap/model.hpp"

#include <cmath>
#include <random>
#include <string>

using namespace tauleap;

namespace {

Vec vec(std::initializer_list<double> v) {
    Vec x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

std::vector<ReactionNetwork> all_builtins() {
    return {isomerization(1.0, 2.0, 100.0, 80.0), dimer(), schlogl(), elf()};
}

// Random non-negative states around the initial condition; every factor
// stays well inside its polynomial branch.
Vec random_state(const ReactionNetwork& net, std::mt19937_64& gen) {
    Vec x = net.initial_state();
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double hi = std::max(10.0, 2.0 * x[k]);
        std::uniform_real_distribution<double> d(3.0, hi);
        x[k] = std::round(d(gen));
    }
    for (const Reaction& r : net.reactions())
        for (const ReactantTerm& t : r.reactants)
            if (t.complement) x[static_cast<Eigen::Index>(t.species)] = std::min(x[static_cast<Eigen::Index>(t.species)], t.total - 3.0);
    return x;
}

double rel_err(const Vec& a, const Vec& b) {
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("propensity gradient examples") {
    const ReactionNetwork iso = isomerization(1.5, 1.0, 100, 80);
    CHECK(propensity_gradient(iso, 0, vec({80}))[0] == doctest::Approx(1.5));

    const ReactionNetwork d = dimer();
    CHECK(propensity_gradient(d, 1, vec({400, 798, 0}))[0] == doctest::Approx(3995.0));

    const ReactionNetwork s = schlogl();
    CHECK(propensity_gradient(s, 2, vec({250}))[0] == 0.0);
}

TEST_CASE("propensity hessian examples") {
    const ReactionNetwork iso = isomerization(1.0, 1.0, 100, 80);
    CHECK(propensity_hessian(iso, 0, vec({80})).norm() == 0.0);
    CHECK(propensity_hessian(iso, 1, vec({80})).norm() == 0.0);

    const ReactionNetwork d = dimer();
    for (double x1 : {2.0, 400.0, 12345.0})
        CHECK(propensity_hessian(d, 1, vec({x1, 798, 0}))(0, 0) == doctest::Approx(10.0));

    const ReactionNetwork s = schlogl();
    CHECK(propensity_hessian(s, 1, vec({250}))(0, 0) == doctest::Approx(0.0249));
}

TEST_CASE("drift examples") {
    const ReactionNetwork iso = isomerization(1.0, 1.0, 100, 80);
    CHECK(drift(iso, vec({80}))[0] == doctest::Approx(-60.0));
    CHECK(drift(iso, vec({100}))[0] == doctest::Approx(-100.0));

    const ReactionNetwork d = dimer();
    CHECK(drift(d, d.initial_state())[2] == doctest::Approx(79.8));
    CHECK(drift(d, vec({0, 0, 5})).norm() == 0.0);
}

TEST_CASE("builtin networks") {
    const ReactionNetwork d = dimer();
    CHECK(propensity(d, 2, d.initial_state()) == doctest::Approx(798000.0));
    CHECK(d.num_species() == 3);
    CHECK(d.num_reactions() == 4);

    const ReactionNetwork e = elf();
    CHECK(e.num_species() == 8);
    CHECK(e.num_reactions() == 12);
    CHECK(e.initial_state()[0] == 2000.0);
    CHECK(e.species_index("EAB") == 4);

    const ReactionNetwork iso = builtin("isomerization:1,1,100,80");
    CHECK(iso.num_species() == 1);
    CHECK(iso.num_reactions() == 2);
    CHECK(iso.nu(0, 0) == -1);
    CHECK(iso.nu(0, 1) == 1);
    CHECK(iso.initial_state()[0] == 80.0);

    const ReactionNetwork s = schlogl();
    CHECK(s.initial_state()[0] == 250.0);
    // a_1 = c1/2 N1 X(X-1)
    CHECK(propensity(s, 0, vec({250})) == doctest::Approx(3e-7 / 2 * 1e5 * 250 * 249));
    CHECK(propensity(s, 2, vec({250})) == doctest::Approx(1e-3 * 2e5));

    CHECK_THROWS_AS(builtin("isomerization:1,1,100"), ModelError);
    CHECK_THROWS_AS(builtin("nope"), ModelError);
}

TEST_CASE("propensity clamps outside the lattice polynomial branch") {
    const ReactionNetwork d = dimer();
    CHECK(propensity(d, 1, vec({0.5, 0, 0})) == 0.0);
    CHECK(propensity(d, 1, vec({1, 0, 0})) == 0.0);
    CHECK(propensity(d, 0, vec({-0.5, 0, 0})) == 0.0);
    const ReactionNetwork iso = isomerization(1, 1, 100, 80);
    CHECK(propensity(iso, 1, vec({101})) == 0.0);
    Vec g;
    CHECK(propensity_with_gradient(iso, 1, vec({101}), g) == 0.0);
    CHECK(g[0] == 0.0);
    CHECK(propensity_with_gradient(iso, 1, vec({90}), g) == doctest::Approx(10.0));
    CHECK(g[0] == doctest::Approx(-1.0));
}

TEST_CASE("propensities are non-negative on non-negative integer states") {
    std::mt19937_64 gen(11);
    for (const ReactionNetwork& net : all_builtins()) {
        for (int s = 0; s < 200; ++s) {
            Vec x(static_cast<Eigen::Index>(net.num_species()));
            for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = static_cast<double>(gen() % 6);
            for (std::size_t j = 0; j < net.num_reactions(); ++j) CHECK(propensity(net, j, x) >= 0.0);
        }
    }
}

TEST_CASE("drift equals nu times propensities") {
    std::mt19937_64 gen(12);
    for (const ReactionNetwork& net : all_builtins()) {
        for (int s = 0; s < 50; ++s) {
            const Vec x = random_state(net, gen);
            const Vec a = propensities(net, x);
            CHECK(rel_err(net.nu() * a, drift(net, x)) < 1e-14);
        }
    }
}

TEST_CASE("analytic derivatives match central differences") {
    std::mt19937_64 gen(7);
    const double h = 1e-5;
    for (const ReactionNetwork& net : all_builtins()) {
        const auto n = static_cast<Eigen::Index>(net.num_species());
        for (int s = 0; s < 100; ++s) {
            const Vec x = random_state(net, gen);
            for (std::size_t j = 0; j < net.num_reactions(); ++j) {
                const Vec g = propensity_gradient(net, j, x);
                const Mat H = propensity_hessian(net, j, x);
                Vec fd_g(n);
                Mat fd_H(n, n);
                for (Eigen::Index k = 0; k < n; ++k) {
                    Vec xp = x, xm = x;
                    xp[k] += h;
                    xm[k] -= h;
                    fd_g[k] = (propensity_polynomial(net, j, xp) - propensity_polynomial(net, j, xm)) / (2 * h);
                    fd_H.col(k) = (propensity_gradient(net, j, xp) - propensity_gradient(net, j, xm)) / (2 * h);
                }
                if (g.cwiseAbs().maxCoeff() > 0) CHECK(rel_err(g, fd_g) < 1e-6);
                else CHECK(fd_g.cwiseAbs().maxCoeff() < 1e-9);
                if (H.cwiseAbs().maxCoeff() > 0) {
                    CHECK(rel_err(H.reshaped(), fd_H.reshaped()) < 1e-6);
                } else {
                    CHECK(fd_H.cwiseAbs().maxCoeff() < 1e-6);
                }
                CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
            }
        }
    }
}

TEST_CASE("third derivative contraction matches differences of the hessian") {
    std::mt19937_64 gen(8);
    const double h = 1e-4;
    for (const ReactionNetwork& net : all_builtins()) {
        const auto n = static_cast<Eigen::Index>(net.num_species());
        const Mat Q = Mat::Random(n, n);
        for (int s = 0; s < 20; ++s) {
            const Vec x = random_state(net, gen);
            for (std::size_t j = 0; j < net.num_reactions(); ++j) {
                const Vec t = propensity_third_contraction(net, j, x, Q);
                Vec fd(n);
                for (Eigen::Index m = 0; m < n; ++m) {
                    Vec xp = x, xm = x;
                    xp[m] += h;
                    xm[m] -= h;
                    fd[m] = ((propensity_hessian(net, j, xp) - propensity_hessian(net, j, xm)).cwiseProduct(Q)).sum() /
                            (2 * h);
                }
                CHECK((t - fd).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, t.cwiseAbs().maxCoeff()));
                CHECK(hessian_contract(net, j, x, Q) ==
                      doctest::Approx(propensity_hessian(net, j, x).cwiseProduct(Q).sum()));
            }
        }
    }
}

TEST_CASE("model files round trip") {
    for (const ReactionNetwork& net : all_builtins()) {
        const std::string text = serialize_network(net);
        const ReactionNetwork back = parse_network(text);
        CHECK(back.species_names() == net.species_names());
        CHECK(back.initial_state() == net.initial_state());
        CHECK(back.nu() == net.nu());
        REQUIRE(back.num_reactions() == net.num_reactions());
        std::mt19937_64 gen(3);
        const Vec x = random_state(net, gen);
        for (std::size_t j = 0; j < net.num_reactions(); ++j)
            CHECK(propensity(back, j, x) == doctest::Approx(propensity(net, j, x)).epsilon(1e-14));
        CHECK(serialize_network(back) == text);
    }
}

TEST_CASE("model file diagnostics") {
    const std::string head = R"({"species": [{"name": "X", "initial": 5}], "reactions": [)";
    auto parse_error = [&](const std::string& reactions) {
        try {
            parse_network(head + reactions + "]}");
        } catch (const ModelError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(parse_error(R"({"rate": 1, "reactants": {"X": 4}})").find("unsupported order") != std::string::npos);
    const std::string unknown = parse_error(R"({"rate": 1, "reactants": {"Y": 1}})");
    CHECK(unknown.find("unknown species 'Y'") != std::string::npos);
    CHECK(unknown.find("$.reactions[0]") != std::string::npos);
    CHECK(parse_error(R"({"rate": -1, "reactants": {"X": 1}})").find("negative rate constant") != std::string::npos);
    CHECK(parse_error(R"({"rate": 1, "reactant": {"X": 1}})").find("unknown key") != std::string::npos);

    try {
        parse_network("{\n\"species\": [\n  {\"name\": \"X\" \"initial\": 1}]}");
        FAIL("expected a syntax error");
    } catch (const ModelError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    const ReactionNetwork ok = parse_network(head + R"({"rate": 2, "reactants": {"X": 2}, "products": {"X": 3}}]})");
    CHECK(ok.nu(0, 0) == 1);
    CHECK(propensity(ok, 0, vec({5})) == doctest::Approx(2.0 * 10));
}

}  // TEST_SUITE
