#include "tauleap/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tauleap {

namespace {

long long floor_div(long long a, long long b) {
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

long long ceil_div(long long a, long long b) { return -floor_div(-a, b); }

}  // namespace

Histogram build_histogram(const std::vector<double>& samples, long long dx) {
    if (dx < 1) throw std::invalid_argument("bin width must be a positive integer");
    Histogram h;
    h.bin_width = dx;
    h.n_samples = samples.size();
    if (samples.empty()) return h;
    double mn = samples.front(), mx = samples.front();
    for (double v : samples) {
        if (!std::isfinite(v)) throw std::invalid_argument("histogram samples must be finite");
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    const double w = static_cast<double>(dx);
    h.lo = static_cast<long long>(std::floor(mn / w)) * dx;
    const auto nbins = static_cast<std::size_t>(std::floor((mx - static_cast<double>(h.lo)) / w)) + 1;
    std::vector<double> counts(nbins, 0.0);
    for (double v : samples) {
        auto i = static_cast<std::size_t>(std::floor((v - static_cast<double>(h.lo)) / w));
        counts[std::min(i, nbins - 1)] += 1.0;
    }
    const double norm = static_cast<double>(samples.size()) * w;
    h.densities.resize(nbins);
    for (std::size_t i = 0; i < nbins; ++i) h.densities[i] = counts[i] / norm;
    return h;
}

Histogram rebin(const Histogram& h, long long width) {
    if (width < 1) throw std::invalid_argument("bin width must be a positive integer");
    Histogram out;
    out.bin_width = width;
    out.n_samples = h.n_samples;
    if (h.densities.empty()) return out;
    out.lo = floor_div(h.lo, width) * width;
    const long long hi = ceil_div(h.hi(), width) * width;
    std::vector<double> mass(static_cast<std::size_t>((hi - out.lo) / width), 0.0);
    const long long w = h.bin_width;
    for (std::size_t i = 0; i < h.densities.size(); ++i) {
        const double p = h.probability(i);
        if (p == 0.0) continue;
        const long long a = h.lo + static_cast<long long>(i) * w;
        const long long b = a + w;
        for (long long tb = floor_div(a, width); tb * width < b; ++tb) {
            const long long lo = std::max(a, tb * width);
            const long long up = std::min(b, (tb + 1) * width);
            if (up <= lo) continue;
            mass[static_cast<std::size_t>(tb - out.lo / width)] +=
                p * static_cast<double>(up - lo) / static_cast<double>(w);
        }
    }
    out.densities.resize(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i) out.densities[i] = mass[i] / static_cast<double>(width);
    return out;
}

AlignedPair align(const Histogram& P, const Histogram& Q) {
    AlignedPair a;
    a.bin_width = std::max(P.bin_width, Q.bin_width);
    const Histogram p = rebin(P, a.bin_width);
    const Histogram q = rebin(Q, a.bin_width);
    if (p.densities.empty() && q.densities.empty()) return a;
    long long lo, hi;
    if (p.densities.empty()) {
        lo = q.lo;
        hi = q.hi();
    } else if (q.densities.empty()) {
        lo = p.lo;
        hi = p.hi();
    } else {
        lo = std::min(p.lo, q.lo);
        hi = std::max(p.hi(), q.hi());
    }
    a.lo = lo;
    const auto n = static_cast<std::size_t>((hi - lo) / a.bin_width);
    a.p.assign(n, 0.0);
    a.q.assign(n, 0.0);
    auto fill = [&](const Histogram& h, std::vector<double>& dst) {
        const auto off = static_cast<std::size_t>((h.lo - lo) / a.bin_width);
        for (std::size_t i = 0; i < h.densities.size(); ++i) dst[off + i] = h.probability(i);
    };
    if (!p.densities.empty()) fill(p, a.p);
    if (!q.densities.empty()) fill(q, a.q);
    return a;
}

KlResult kl_divergence(const Histogram& P, const Histogram& Q) {
    KlResult r;
    if (P.n_samples == 0 || Q.n_samples == 0) return r;
    const AlignedPair a = align(P, Q);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.p.size(); ++i) {
        if (a.p[i] <= 0.0) continue;
        if (a.q[i] <= 0.0) {
            ++r.skipped_bins;
            continue;
        }
        sum += a.p[i] * std::log(a.p[i] / a.q[i]);
    }
    r.value = sum;
    return r;
}

double distance(const Histogram& P, const Histogram& Q) {
    const AlignedPair a = align(P, Q);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.p.size(); ++i) sum += std::fabs(a.p[i] - a.q[i]);
    return static_cast<double>(a.bin_width) * sum;
}

Summary summarize(const std::vector<double>& samples) {
    if (samples.empty()) throw std::invalid_argument("summarize needs at least one sample");
    Summary s;
    for (double v : samples) s.mean += v;
    s.mean /= static_cast<double>(samples.size());
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double v : samples) ss += (v - s.mean) * (v - s.mean);
        s.variance = ss / static_cast<double>(samples.size() - 1);
    }
    return s;
}

ComparisonReport compare_samples(const std::vector<double>& P, const std::vector<double>& Q, long long dx) {
    ComparisonReport r;
    r.n_P = P.size();
    r.n_Q = Q.size();
    if (!P.empty()) {
        Summary s = summarize(P);
        r.mean_P = s.mean;
        r.var_P = s.variance;
    }
    if (!Q.empty()) {
        Summary s = summarize(Q);
        r.mean_Q = s.mean;
        r.var_Q = s.variance;
    }
    const Histogram hp = build_histogram(P, dx);
    const Histogram hq = build_histogram(Q, dx);
    KlResult kl = kl_divergence(hp, hq);
    r.kl = kl.value;
    r.skipped_bins = kl.skipped_bins;
    r.distance = distance(hp, hq);
    r.bin_width = std::max(hp.bin_width, hq.bin_width);
    return r;
}

std::vector<std::size_t> find_modes(const Histogram& h, int smooth, double min_rel_height,
                                    double trough_ratio) {
    const std::size_t n = h.densities.size();
    std::vector<std::size_t> modes;
    if (n == 0) return modes;
    const int half = std::max(0, smooth / 2);
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        int cnt = 0;
        for (int d = -half; d <= half; ++d) {
            const long long k = static_cast<long long>(i) + d;
            if (k < 0 || k >= static_cast<long long>(n)) continue;
            sum += h.densities[static_cast<std::size_t>(k)];
            ++cnt;
        }
        s[i] = sum / cnt;
    }
    const double top = *std::max_element(s.begin(), s.end());
    for (std::size_t i = 0; i < n; ++i) {
        const bool left = i == 0 || s[i] > s[i - 1];
        const bool right = i + 1 == n || s[i] >= s[i + 1];
        if (!left || !right || s[i] < min_rel_height * top) continue;
        if (!modes.empty()) {
            const std::size_t prev = modes.back();
            const double trough = *std::min_element(s.begin() + static_cast<long>(prev), s.begin() + static_cast<long>(i) + 1);
            if (!(trough < trough_ratio * std::min(s[prev], s[i]))) {
                if (s[i] > s[prev]) modes.back() = i;
                continue;
            }
        }
        modes.push_back(i);
    }
    return modes;
}

double exact_isomerization_mean(double c1, double c2, double total) { return c2 * total / (c1 + c2); }

double exact_isomerization_variance(double c1, double c2, double total) {
    const double lambda = c1 + c2;
    return c1 * c2 * total / (lambda * lambda);
}

StabilityPrediction predict_isomerization(StepperKind method, double c1, double c2, double total, double tau) {
    if (method == StepperKind::ssa) throw std::invalid_argument("predict is not defined for ssa");
    if (!(c1 > 0) || !(c2 > 0)) throw std::invalid_argument("c1 and c2 must be > 0");
    if (!(tau > 0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be > 0");
    if (!(total >= 0)) throw std::invalid_argument("XT must be >= 0");

    StabilityPrediction p;
    p.method = method;
    const double lambda = c1 + c2;
    const double lt = lambda * tau;
    p.lambda_tau = lt;
    const double var_star = exact_isomerization_variance(c1, c2, total);
    double mean = exact_isomerization_mean(c1, c2, total);
    std::optional<double> var;

    switch (method) {
        case StepperKind::explicit_tau:
            p.stable = lt > 0 && lt < 2.0;
            var = var_star * 2.0 / (2.0 - lt);
            break;
        case StepperKind::implicit_tau:
        case StepperKind::betr:
            p.stable = lt > 0;
            var = var_star * 2.0 / (2.0 + lt);
            break;
        case StepperKind::bebe:
            p.stable = lt > 0;
            mean = (c2 * total + 0.5 * (c1 - c2)) / lambda;
            var = (4.0 * c1 * c2 * total + (c1 - c2) * (c1 - c2)) / (2.0 * lambda * lambda * (2.0 + lt));
            break;
        case StepperKind::trapezoidal_tau:
        case StepperKind::trtr:
            p.stable = lt > 0;
            var = var_star;
            break;
        case StepperKind::wt2_a1b1:
        case StepperKind::wt2_a1b0:
            p.stable = lt > 0 && lt < 1.0 + std::sqrt(5.0);
            break;
        case StepperKind::wt2_a05:
            p.stable = lt > 0;
            break;
        case StepperKind::ssa:
            break;
    }
    if (p.stable) {
        p.asymptotic_mean = mean;
        p.asymptotic_variance = var;
        p.variance_available = var.has_value();
    }
    return p;
}

}  // namespace tauleap
