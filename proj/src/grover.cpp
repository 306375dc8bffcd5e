#include "htr/grover.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

namespace htr {

namespace {

constexpr int kMaxFullN = 28;

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) { return bound <= 1 ? 0 : rng() % bound; }

}  // namespace

GroverState GroverState::uniform(int n, Representation rep) {
    if (n < 1 || n > 62) throw PreconditionError("GroverState: n must be in [1, 62]");
    bool compressed = rep == Representation::Compressed || (rep == Representation::Auto && n > kCompressedAbove);
    if (!compressed && n > kMaxFullN) throw PreconditionError("GroverState: full vector too large; use compressed");
    GroverState s;
    s.n_ = n;
    s.compressed_ = compressed;
    const double a = std::sqrt(1.0 / static_cast<double>(s.size()));
    if (compressed) {
        s.inside_ = s.outside_ = a;
    } else {
        s.amplitudes_.assign(s.size(), a);
    }
    return s;
}

GroverState GroverState::from_amplitudes(std::vector<double> amplitudes) {
    const auto size = amplitudes.size();
    if (size < 2 || !std::has_single_bit(size)) throw PreconditionError("GroverState: size must be a power of two");
    double norm = 0;
    for (double a : amplitudes) norm += a * a;
    if (std::abs(norm - 1.0) > 1e-9) throw PreconditionError("GroverState: amplitudes must have unit norm");
    GroverState s;
    s.n_ = std::countr_zero(size);
    s.amplitudes_ = std::move(amplitudes);
    return s;
}

double GroverState::amplitude(std::uint64_t index) const {
    if (index >= size()) throw std::out_of_range("GroverState::amplitude index");
    if (!compressed_) return amplitudes_[index];
    return partition_ && partition_->is_marked(index) ? inside_ : outside_;
}

const std::vector<double>& GroverState::amplitudes() const {
    if (compressed_) throw std::logic_error("GroverState: compressed state has no amplitude vector");
    return amplitudes_;
}

double GroverState::norm_squared() const {
    if (!compressed_) return std::transform_reduce(amplitudes_.begin(), amplitudes_.end(), 0.0, std::plus<>(),
                                                   [](double a) { return a * a; });
    const double s = partition_ ? static_cast<double>(partition_->marked_count()) : 0.0;
    return s * inside_ * inside_ + (static_cast<double>(size()) - s) * outside_ * outside_;
}

double GroverState::marked_probability(const PhaseOracle& oracle) const {
    if (compressed_) {
        if (partition_ && !partition_->same_membership(oracle))
            throw PreconditionError("GroverState: compressed state bound to a different oracle");
        if (!partition_) return static_cast<double>(oracle.marked_count()) * outside_ * outside_;
        return static_cast<double>(oracle.marked_count()) * inside_ * inside_;
    }
    double total = 0;
    for (auto m : oracle.members()) total += amplitudes_[m] * amplitudes_[m];
    return total;
}

GroverState grover_iterate(GroverState state, const PhaseOracle& oracle, std::uint64_t r) {
    if (oracle.n() != state.n_) throw PreconditionError("grover_iterate: oracle and state sizes differ");
    oracle.add_calls(r);
    const double size = static_cast<double>(state.size());

    if (state.compressed_) {
        if (!state.partition_) {
            if (state.inside_ != state.outside_)
                throw PreconditionError("grover_iterate: unbound compressed state must be uniform");
            state.partition_ = oracle;
        } else if (!state.partition_->same_membership(oracle)) {
            throw PreconditionError("grover_iterate: compressed state bound to a different oracle");
        }
        const double s = static_cast<double>(oracle.marked_count());
        for (std::uint64_t i = 0; i < r; ++i) {
            const double flipped = -state.inside_;
            const double mean = (s * flipped + (size - s) * state.outside_) / size;
            state.inside_ = 2 * mean - flipped;
            state.outside_ = 2 * mean - state.outside_;
        }
        return state;
    }

    auto& a = state.amplitudes_;
    const auto members = oracle.members();
    for (std::uint64_t i = 0; i < r; ++i) {
        for (auto m : members) a[m] = -a[m];
        const double mean = std::accumulate(a.begin(), a.end(), 0.0) / size;
        for (auto& v : a) v = 2 * mean - v;
    }
    return state;
}

double success_probability(int n, std::uint64_t s, std::uint64_t r) {
    if (n < 0 || n > 62) throw PreconditionError("success_probability: n must be in [0, 62]");
    const std::uint64_t size = std::uint64_t{1} << n;
    if (s > size) throw PreconditionError("success_probability: s exceeds 2^n");
    if (s == 0) return 0.0;
    if (s == size) return 1.0;
    const double half_theta = std::asin(std::sqrt(static_cast<double>(s) / static_cast<double>(size)));
    const double v = std::sin((2.0 * static_cast<double>(r) + 1.0) * half_theta);
    return v * v;
}

std::uint64_t measure(const GroverState& state, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    if (!state.compressed_) {
        const double total = state.norm_squared();
        double acc = 0;
        const auto& a = state.amplitudes_;
        std::uint64_t last_nonzero = 0;
        for (std::uint64_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0) continue;
            last_nonzero = i;
            acc += a[i] * a[i];
            if (u * total < acc) return i;
        }
        return last_nonzero;
    }

    const std::uint64_t size = state.size();
    const std::uint64_t s = state.partition_ ? state.partition_->marked_count() : 0;
    const double p_in = static_cast<double>(s) * state.inside_ * state.inside_ / state.norm_squared();
    if (s > 0 && (u < p_in || s == size)) return state.partition_->members()[uniform_below(rng, s)];
    // t-th unmarked index: skip over the sorted members at or below it.
    std::uint64_t x = uniform_below(rng, size - s);
    if (state.partition_) {
        for (auto m : state.partition_->members()) {
            if (m > x) break;
            ++x;
        }
    }
    return x;
}

int qsearch_passes(double delta_prime, const QSearchConfig& config) {
    if (!(delta_prime > 0 && delta_prime < 1)) throw PreconditionError("qsearch: delta_prime must be in (0, 1)");
    const double q = config.pass_miss_bound;
    if (!(q > 0 && q < 1)) throw PreconditionError("qsearch: pass_miss_bound must be in (0, 1)");
    return std::max(1, static_cast<int>(std::ceil(std::log(1 / delta_prime) / std::log(1 / q) - 1e-12)));
}

QSearchOutcome qsearch(const PhaseOracle& oracle, double delta_prime, std::uint64_t seed, const QSearchConfig& config) {
    const int passes = qsearch_passes(delta_prime, config);
    if (!(config.growth > 1)) throw PreconditionError("qsearch: growth must exceed 1");
    if (!(config.budget_constant > 0)) throw PreconditionError("qsearch: budget_constant must be positive");

    const int n = oracle.n();
    const double root = std::sqrt(static_cast<double>(oracle.domain_size()));
    const double budget = config.budget_constant * root;
    const GroverState start = GroverState::uniform(n, config.representation);

    QSearchOutcome out;
    out.rng_seed = seed;
    std::mt19937_64 rng(seed);
    for (int pass = 1; pass <= passes; ++pass) {
        out.passes = pass;
        double m = 1;
        double used = 0;
        while (used < budget) {
            const std::uint64_t j = uniform_below(rng, static_cast<std::uint64_t>(std::ceil(m)));
            const GroverState state = grover_iterate(start, oracle, j);
            const std::uint64_t k = measure(state, rng);
            out.grover_iterations += j;
            out.oracle_calls += j + 1;
            used += static_cast<double>(j + 1);
            if (oracle.verify(k)) {
                out.found = true;
                out.witness = k;
                return out;
            }
            m = std::min(config.growth * m, root);
        }
    }
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace htr
