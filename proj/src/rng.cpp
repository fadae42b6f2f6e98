#include "hitgnn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hitgnn {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

std::uint64_t Rng::bounded(std::uint64_t n) {
    // Reject the tail that would bias the modulus.
    const std::uint64_t threshold = (0ULL - n) % n;
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    cached_normal_ = mag * std::sin(2.0 * std::numbers::pi * u2);
    has_cached_normal_ = true;
    return mag * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::derive(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    for (std::uint64_t p : path) {
        s = h ^ (p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
        h = splitmix64(s);
    }
    return h;
}

PerRootChoiceSource::PerRootChoiceSource(std::vector<std::uint64_t> stream_seeds) {
    streams_.reserve(stream_seeds.size());
    for (std::uint64_t s : stream_seeds) streams_.emplace_back(s);
}

void PerRootChoiceSource::begin_root(std::uint64_t root_ordinal) {
    if (root_ordinal >= streams_.size())
        throw std::invalid_argument("PerRootChoiceSource: root ordinal out of range");
    current_ = root_ordinal;
}

std::vector<std::uint32_t> PerRootChoiceSource::choose(std::uint32_t n_options,
                                                       std::uint32_t k) {
    if (streams_.empty())
        throw std::invalid_argument("PerRootChoiceSource: no streams configured");
    return streams_[current_].choose(n_options, k);
}

std::vector<std::uint32_t> RandomChoiceSource::choose(std::uint32_t n_options,
                                                      std::uint32_t k) {
    if (k > n_options) k = n_options;
    scratch_.resize(n_options);
    for (std::uint32_t i = 0; i < n_options; ++i) scratch_[i] = i;
    // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
    for (std::uint32_t i = 0; i < k; ++i) {
        const auto j =
            i + static_cast<std::uint32_t>(rng_.bounded(n_options - i));
        std::swap(scratch_[i], scratch_[j]);
    }
    std::vector<std::uint32_t> out(scratch_.begin(), scratch_.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace hitgnn
