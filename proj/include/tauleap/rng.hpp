#pragma once

#include "tauleap/model.hpp"

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tauleap {

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

// Counter-based stream: key = seed, counter = (block index, stream_id).
// Streams with distinct ids never share a counter value.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    // Strictly inside (0,1), 53 bits of resolution.
    double uniform();

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

template <class U>
concept UniformSource = requires(U& u) {
    { u.uniform() } -> std::convertible_to<double>;
};

inline double sample_uniform(RngStream& s) { return s.uniform(); }

template <UniformSource U>
double sample_exponential(U& src, double rate) {
    if (!(rate > 0) || !std::isfinite(rate)) throw std::invalid_argument("exponential rate must be > 0");
    return -std::log(src.uniform()) / rate;
}

// Exact Poisson variate: sequential-search inversion below mean 10,
// Hormann's PTRS transformed rejection from 10 upwards.
template <UniformSource U>
double sample_poisson(U& src, double mean) {
    if (!std::isfinite(mean) || mean < 0) throw std::invalid_argument("poisson mean must be finite and >= 0");
    if (mean == 0) return 0.0;
    if (mean < 10.0) {
        double u = src.uniform();
        double p = std::exp(-mean);
        double cdf = p;
        double k = 0;
        while (u > cdf) {
            k += 1.0;
            p *= mean / k;
            double next = cdf + p;
            if (next == cdf) break;  // tail underflow
            cdf = next;
        }
        return k;
    }
    const double log_mean = std::log(mean);
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u = src.uniform() - 0.5;
        double v = src.uniform();
        double us = 0.5 - std::fabs(u);
        double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        double rhs = -mean + k * log_mean - std::lgamma(k + 1.0);
        if (lhs <= rhs) return k;
    }
}

// (count - a*tau) / sqrt(a) for a given Poisson count.
inline double poisson_noise_from_count(double count, double a, double tau) {
    return (count - a * tau) / std::sqrt(a);
}

template <UniformSource U>
double poisson_noise(U& src, double a, double tau) {
    if (!(a > 0)) throw std::invalid_argument("poisson_noise requires a > 0");
    if (!(tau > 0)) throw std::invalid_argument("poisson_noise requires tau > 0");
    return poisson_noise_from_count(sample_poisson(src, a * tau), a, tau);
}

struct LawPoint {
    double value;
    double probability;
};

// Support and probabilities of the simplified increments.
std::array<LawPoint, 2> two_point_law(double dt);
std::array<LawPoint, 3> three_point_law(double dt);

template <UniformSource U>
double sample_two_point(U& src, double dt) {
    if (!(dt > 0)) throw std::invalid_argument("two-point dt must be > 0");
    return src.uniform() < 0.5 ? -std::sqrt(dt) : std::sqrt(dt);
}

template <UniformSource U>
double sample_three_point(U& src, double dt) {
    if (!(dt > 0)) throw std::invalid_argument("three-point dt must be > 0");
    double u = src.uniform();
    if (u < 1.0 / 6.0) return -std::sqrt(3.0 * dt);
    if (u < 5.0 / 6.0) return 0.0;
    return std::sqrt(3.0 * dt);
}

// Fills an m x m matrix: diagonal -dt, V(j1,j2) = +-dt for j2 < j1 and
// V(j2,j1) = -V(j1,j2).
template <UniformSource U>
void sample_V_matrix_into(U& src, double dt, Mat& V) {
    const Eigen::Index m = V.rows();
    for (Eigen::Index j1 = 0; j1 < m; ++j1) {
        V(j1, j1) = -dt;
        for (Eigen::Index j2 = 0; j2 < j1; ++j2) {
            double v = src.uniform() < 0.5 ? -dt : dt;
            V(j1, j2) = v;
            V(j2, j1) = -v;
        }
    }
}

template <UniformSource U>
Mat sample_V_matrix(U& src, int m, double dt) {
    if (m < 1) throw std::invalid_argument("V matrix size must be >= 1");
    if (!(dt > 0)) throw std::invalid_argument("V matrix dt must be > 0");
    Mat V(m, m);
    sample_V_matrix_into(src, dt, V);
    return V;
}

enum class NoiseKind { scaled_poisson, two_point, three_point };

// Simplified variates (two/three point) replace the scaled Poisson noise
// on channels with a_j * tau > threshold.
struct NoiseMode {
    NoiseKind kind = NoiseKind::scaled_poisson;
    double threshold = std::numeric_limits<double>::infinity();
};

NoiseKind parse_noise_kind(std::string_view name);
std::string noise_kind_name(NoiseKind kind);

}  // namespace tauleap
