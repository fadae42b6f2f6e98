#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace hitgnn {

// xoshiro256** with splitmix64 seeding. Hand-rolled so that streams are
// bit-identical across platforms and standard-library versions; nothing in
// the training path may depend on implementation-defined distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform integer in [0, n). n must be > 0. Rejection sampling, unbiased.
    std::uint64_t bounded(std::uint64_t n);

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller (second value cached).
    double normal();

    // Derives an independent stream seed from a base seed and a path of
    // identifiers, e.g. derive(seed, {kSampleStream, epoch, step}).
    static std::uint64_t derive(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> path);

private:
    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

// One decision point in a sampler: pick k distinct positions out of
// {0, .., n_options-1}, uniformly without replacement. Returned positions are
// sorted ascending. Both ShaDow implementations route every random decision
// through this interface, which lets tests replace the seeded source with an
// exhaustive enumerator and compare outcome distributions exactly.
//
// Samplers announce the root a decision belongs to via begin_root. Sources
// that keep one stream per root make the draws for a given root independent
// of how many batches are stacked into one call.
class ChoiceSource {
public:
    virtual ~ChoiceSource() = default;
    virtual std::vector<std::uint32_t> choose(std::uint32_t n_options,
                                              std::uint32_t k) = 0;
    virtual void begin_root(std::uint64_t /*root_ordinal*/) {}
};

class RandomChoiceSource final : public ChoiceSource {
public:
    explicit RandomChoiceSource(std::uint64_t seed) : rng_(seed) {}
    explicit RandomChoiceSource(Rng rng) : rng_(rng) {}

    std::vector<std::uint32_t> choose(std::uint32_t n_options,
                                      std::uint32_t k) override;

private:
    Rng rng_;
    std::vector<std::uint32_t> scratch_;
};

// One independent stream per root ordinal, resumed (not reset) when a
// sampler returns to the same root at a later level.
class PerRootChoiceSource final : public ChoiceSource {
public:
    explicit PerRootChoiceSource(std::vector<std::uint64_t> stream_seeds);

    void begin_root(std::uint64_t root_ordinal) override;
    std::vector<std::uint32_t> choose(std::uint32_t n_options,
                                      std::uint32_t k) override;

private:
    std::vector<RandomChoiceSource> streams_;
    std::size_t current_ = 0;
};

}  // namespace hitgnn
