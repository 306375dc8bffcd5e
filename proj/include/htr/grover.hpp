#pragma once

#include "htr/oracle_sim.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace htr {

enum class Representation {
    Auto,  // full vector up to kCompressedAbove qubits, compressed beyond
    Full,
    Compressed,
};

inline constexpr int kCompressedAbove = 20;

/// Real amplitudes over 2^n basis states. The compressed form keeps one
/// amplitude for the marked set of a bound oracle and one for its complement;
/// Grover dynamics from the uniform state never leave that subspace.
class GroverState {
public:
    static GroverState uniform(int n, Representation rep = Representation::Auto);
    static GroverState from_amplitudes(std::vector<double> amplitudes);

    int n() const noexcept { return n_; }
    bool compressed() const noexcept { return compressed_; }
    std::uint64_t size() const noexcept { return std::uint64_t{1} << n_; }

    double amplitude(std::uint64_t index) const;
    /// Full vector; only available when not compressed.
    const std::vector<double>& amplitudes() const;
    double norm_squared() const;
    /// Total probability on the marked set of `oracle`.
    double marked_probability(const PhaseOracle& oracle) const;

private:
    friend GroverState grover_iterate(GroverState state, const PhaseOracle& oracle, std::uint64_t r);
    friend std::uint64_t measure(const GroverState& state, std::mt19937_64& rng);

    int n_ = 0;
    bool compressed_ = false;
    std::vector<double> amplitudes_;
    // compressed form
    double inside_ = 0;
    double outside_ = 0;
    std::optional<PhaseOracle> partition_;
};

/// r rounds of phase flip followed by inversion about the mean. Each round is
/// one oracle call on `oracle`'s counter.
GroverState grover_iterate(GroverState state, const PhaseOracle& oracle, std::uint64_t r);

/// sin^2((2r+1) theta/2) with sin(theta/2) = sqrt(s / 2^n).
double success_probability(int n, std::uint64_t s, std::uint64_t r);

std::uint64_t measure(const GroverState& state, std::mt19937_64& rng);

struct QSearchConfig {
    double growth = 6.0 / 5.0;
    /// Oracle calls allowed per pass, as a multiple of sqrt(2^n).
    double budget_constant = 9.0 / 4.0;
    /// Per-pass probability of missing a nonempty marked set. Calibrated by
    /// simulation for the defaults above; see README.
    double pass_miss_bound = 0.25;
    Representation representation = Representation::Auto;
};

struct QSearchOutcome {
    bool found = false;
    std::optional<std::uint64_t> witness;
    std::uint64_t oracle_calls = 0;
    std::uint64_t grover_iterations = 0;
    std::uint64_t rng_seed = 0;
    int passes = 0;
};

/// ceil(log(1/delta_prime) / log(1/q)).
int qsearch_passes(double delta_prime, const QSearchConfig& config = {});

/// Search with an unknown number of solutions. A verified hit ends the search;
/// otherwise `qsearch_passes` budgeted passes must all come up empty.
QSearchOutcome qsearch(const PhaseOracle& oracle, double delta_prime, std::uint64_t seed,
                       const QSearchConfig& config = {});

/// SplitMix64 step, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace htr
