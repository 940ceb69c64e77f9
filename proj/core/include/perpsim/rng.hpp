#pragma once

#include <cstdint>
#include <string>

namespace perpsim {

/// Deterministic random stream. Distribution sampling is implemented here
/// (not via std::*_distribution) so that seeded runs produce identical
/// artifacts across standard-library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    /// Independent child stream; `tag` separates streams so that adding one
    /// consumer never perturbs another's draws.
    Rng fork(const std::string& tag) const;

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    /// Standard normal (Box-Muller, spare cached).
    double normal();
    double normal(double mu, double sd) { return mu + sd * normal(); }

    double lognormal(double mu_log, double sd_log);

    /// Poisson count, Knuth multiplication method (fine for small lambda).
    int poisson(double lambda);

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace perpsim
