#include "tauleap/rng.hpp"

namespace tauleap {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

void RngStream::refill() {
    buf_ = philox4x32({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                       static_cast<std::uint32_t>(stream_id_),
                       static_cast<std::uint32_t>(stream_id_ >> 32)},
                      {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    ++block_;
    pos_ = 0;
}

std::uint32_t RngStream::next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
}

std::uint64_t RngStream::next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
}

double RngStream::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::array<LawPoint, 2> two_point_law(double dt) {
    const double s = std::sqrt(dt);
    return {{{-s, 0.5}, {s, 0.5}}};
}

std::array<LawPoint, 3> three_point_law(double dt) {
    const double s = std::sqrt(3.0 * dt);
    return {{{-s, 1.0 / 6.0}, {0.0, 2.0 / 3.0}, {s, 1.0 / 6.0}}};
}

NoiseKind parse_noise_kind(std::string_view name) {
    if (name == "scaled-poisson" || name == "scaled_poisson") return NoiseKind::scaled_poisson;
    if (name == "two-point" || name == "two_point") return NoiseKind::two_point;
    if (name == "three-point" || name == "three_point") return NoiseKind::three_point;
    throw std::invalid_argument("unknown noise mode '" + std::string(name) + "'");
}

std::string noise_kind_name(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::scaled_poisson: return "scaled-poisson";
        case NoiseKind::two_point: return "two-point";
        case NoiseKind::three_point: return "three-point";
    }
    return "?";
}

}  // namespace tauleap
