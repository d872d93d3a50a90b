#pragma once

#include "tauleap/steppers.hpp"

#include <optional>
#include <vector>

namespace tauleap {

struct Histogram {
    long long lo = 0;
    long long bin_width = 1;
    std::vector<double> densities;
    std::size_t n_samples = 0;

    long long hi() const { return lo + bin_width * static_cast<long long>(densities.size()); }
    double probability(std::size_t i) const { return densities[i] * static_cast<double>(bin_width); }
};

// Bins [lo + i*dx, lo + (i+1)*dx) with lo a multiple of dx.
Histogram build_histogram(const std::vector<double>& samples, long long dx);

// Re-bin onto the grid of width `width` anchored at multiples of width,
// splitting each source bin's mass in proportion to overlap.
Histogram rebin(const Histogram& h, long long width);

// Bin probabilities of P and Q on a common grid: the coarser width and
// the union of supports.
struct AlignedPair {
    long long lo = 0;
    long long bin_width = 1;
    std::vector<double> p, q;
};
AlignedPair align(const Histogram& P, const Histogram& Q);

struct KlResult {
    std::optional<double> value;  // empty if either histogram is empty
    std::size_t skipped_bins = 0;
};
// Natural-log divergence over bins with P > 0 and Q > 0; bins with P > 0
// and Q = 0 are skipped and counted.
KlResult kl_divergence(const Histogram& P, const Histogram& Q);

// dx * sum_i |p_i - q_i| over bin probabilities on the aligned grid.
double distance(const Histogram& P, const Histogram& Q);

struct Summary {
    double mean = 0.0;
    double variance = 0.0;
};
// Sample mean and unbiased variance (0 for a single sample).
Summary summarize(const std::vector<double>& samples);

struct ComparisonReport {
    double mean_P = 0, mean_Q = 0, var_P = 0, var_Q = 0;
    std::optional<double> kl;
    double distance = 0;
    std::size_t skipped_bins = 0;
    long long bin_width = 1;
    std::size_t n_P = 0, n_Q = 0;
};
ComparisonReport compare_samples(const std::vector<double>& P, const std::vector<double>& Q, long long dx);

// Local maxima of the histogram after a centred moving average over
// `smooth` bins. Peaks below min_rel_height * max are ignored and two
// neighbouring peaks are merged unless the lowest point between them is
// below trough_ratio * (the lower peak).
std::vector<std::size_t> find_modes(const Histogram& h, int smooth = 3, double min_rel_height = 0.05,
                                    double trough_ratio = 0.7);

struct StabilityPrediction {
    StepperKind method = StepperKind::explicit_tau;
    double lambda_tau = 0.0;
    bool stable = false;
    std::optional<double> asymptotic_mean;
    std::optional<double> asymptotic_variance;
    bool variance_available = false;
};

StabilityPrediction predict_isomerization(StepperKind method, double c1, double c2, double total, double tau);

// Exact stationary moments c2 XT / lambda and c1 c2 XT / lambda^2.
double exact_isomerization_mean(double c1, double c2, double total);
double exact_isomerization_variance(double c1, double c2, double total);

}  // namespace tauleap
