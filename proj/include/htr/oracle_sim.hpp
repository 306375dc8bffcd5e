#pragma once

#include "htr/badcase.hpp"
#include "htr/fp_core.hpp"
#include "htr/mp_eval.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace htr {

struct OracleSpec {
    FunctionId f = FunctionId::exp();
    int n = 1;
    std::int64_t e = 0;
    int p = 2;
    RoundingMode mode = RoundingMode::NearestTiesEven;

    /// Throws PreconditionError unless n >= 1 and p > n.
    void validate() const;
    bool operator==(const OracleSpec&) const = default;
};

struct BuildStats {
    std::uint64_t scanned = 0;
    std::uint64_t excluded = 0;  // exceptional inputs
    std::uint64_t escalations = 0;
    bool operator==(const BuildStats&) const = default;
};

struct MarkedSet {
    OracleSpec spec;
    std::vector<std::uint64_t> members;  // ascending fraction values
    BuildStats build_stats;

    bool contains(std::uint64_t fraction) const;
    bool empty() const noexcept { return members.empty(); }
    std::size_t size() const noexcept { return members.size(); }
    bool operator==(const MarkedSet&) const = default;
};

struct BuildOptions {
    int max_n = 26;
    unsigned workers = 0;  // 0: hardware concurrency
    int run_cap = 0;  // 0: default_run_cap(n)
    EvalConfig eval;
};

/// Evaluation failure during a build. `inputs` holds the offending fraction
/// values in ascending order (at most a handful are collected).
class BuildError : public EvalError {
public:
    BuildError(const std::string& what, std::vector<std::uint64_t> inputs, bool unresolved)
        : EvalError(what), inputs_(std::move(inputs)), unresolved_(unresolved) {}
    const std::vector<std::uint64_t>& inputs() const noexcept { return inputs_; }
    bool unresolved() const noexcept { return unresolved_; }

private:
    std::vector<std::uint64_t> inputs_;
    bool unresolved_;
};

/// Per-input tail summary for a whole binade. Any marked set of the binade
/// (every p and mode) is a cheap scan of this table.
class TailTable {
public:
    struct Key {
        std::string function;
        int n = 0;
        std::int64_t e = 0;
        int run_cap = 0;
        int exponent_bits = 0;
        bool operator==(const Key&) const = default;
        auto operator<=>(const Key&) const = default;
    };

    /// bits 0-12 run length, bit 13 guard, bit 14 run bit, bit 15 exact.
    using Entry = std::uint16_t;
    static constexpr int kMaxRunLength = (1 << 13) - 1;

    TailTable(Key key, std::vector<Entry> entries, BuildStats stats);

    static Entry pack(const TailRecord& tail);

    const Key& key() const noexcept { return key_; }
    int n() const noexcept { return key_.n; }
    std::span<const Entry> entries() const noexcept { return entries_; }
    const BuildStats& stats() const noexcept { return stats_; }

    bool exceptional(std::uint64_t fraction) const { return entries_.at(fraction) & 0x8000U; }
    bool guard(std::uint64_t fraction) const { return entries_.at(fraction) & 0x2000U; }
    bool run_bit(std::uint64_t fraction) const { return entries_.at(fraction) & 0x4000U; }
    int run_length(std::uint64_t fraction) const { return entries_.at(fraction) & 0x1FFF; }
    /// 0 for exceptional inputs.
    int required_precision(std::uint64_t fraction, RoundingMode mode) const;
    bool is_bad(std::uint64_t fraction, int p, RoundingMode mode) const;
    /// Largest required precision over the binade (n + 1 when every input is exceptional).
    int max_required_precision(RoundingMode mode) const;

    MarkedSet marked_set(const OracleSpec& spec) const;

    bool operator==(const TailTable&) const = default;

private:
    Key key_;
    std::vector<Entry> entries_;
    BuildStats stats_;
};

TailTable::Key tail_table_key(FunctionId f, int n, std::int64_t e, const BuildOptions& options = {});
TailTable build_tail_table(FunctionId f, int n, std::int64_t e, const BuildOptions& options = {});
MarkedSet build_marked_set(const OracleSpec& spec, const BuildOptions& options = {});

/// Persistent backing store for OracleCache. Implementations must be safe to
/// call from several threads.
class TableStore {
public:
    virtual ~TableStore() = default;
    virtual std::optional<TailTable> load(const TailTable::Key& key) = 0;
    virtual void store(const TailTable& table) = 0;
    virtual std::optional<MarkedSet> load(const OracleSpec& spec, const TailTable::Key& source) = 0;
    virtual void store(const MarkedSet& set, const TailTable::Key& source) = 0;
};

struct CacheCounters {
    std::uint64_t memory_hits = 0;
    std::uint64_t store_hits = 0;
    std::uint64_t builds = 0;
    std::uint64_t hits() const noexcept { return memory_hits + store_hits; }
};

/// Memoizes tail tables and marked sets per key. Lookups run concurrently; each
/// key is built at most once, other requesters wait for the result.
class OracleCache {
public:
    explicit OracleCache(BuildOptions options = {}, std::shared_ptr<TableStore> store = nullptr);

    std::shared_ptr<const TailTable> tail_table(FunctionId f, int n, std::int64_t e);
    std::shared_ptr<const MarkedSet> marked_set(const OracleSpec& spec);

    const BuildOptions& options() const noexcept { return options_; }
    CacheCounters counters() const;

private:
    BuildOptions options_;
    std::shared_ptr<TableStore> store_;
    mutable std::mutex mutex_;
    std::map<TailTable::Key, std::shared_future<std::shared_ptr<const TailTable>>> tables_;
    std::map<std::pair<TailTable::Key, std::pair<int, int>>, std::shared_ptr<const MarkedSet>> sets_;
    CacheCounters counters_;
};

/// Phase oracle k -> -1 on marked indices, +1 elsewhere. Copies share the
/// membership data and the call counter.
class PhaseOracle {
public:
    PhaseOracle(int n, std::vector<std::uint64_t> members);

    int n() const noexcept { return n_; }
    std::uint64_t domain_size() const noexcept { return std::uint64_t{1} << n_; }
    std::uint64_t marked_count() const noexcept { return data_->members.size(); }
    std::span<const std::uint64_t> members() const noexcept { return data_->members; }

    int operator()(std::uint64_t k) const {
        data_->calls.fetch_add(1, std::memory_order_relaxed);
        return is_marked(k) ? -1 : 1;
    }
    /// Membership without touching the counter.
    bool is_marked(std::uint64_t k) const;
    /// Classical verification of a measured index; one oracle call.
    bool verify(std::uint64_t k) const {
        data_->calls.fetch_add(1, std::memory_order_relaxed);
        return is_marked(k);
    }
    void add_calls(std::uint64_t count) const { data_->calls.fetch_add(count, std::memory_order_relaxed); }
    std::uint64_t calls() const noexcept { return data_->calls.load(std::memory_order_relaxed); }

    bool same_membership(const PhaseOracle& other) const noexcept { return data_ == other.data_; }

private:
    struct Data {
        std::vector<std::uint64_t> members;
        std::vector<std::uint64_t> bitmap;  // empty when n is too large for a dense table
        std::atomic<std::uint64_t> calls{0};
    };
    int n_;
    std::shared_ptr<Data> data_;
};

PhaseOracle phase_function(const MarkedSet& ms);

struct ResourceEstimate {
    std::int64_t toffoli_count = 0;
    std::int64_t flag_toffoli_count = 0;
    std::int64_t arithmetic_toffoli_count = 0;
    std::int64_t ancilla_width = 0;
    std::int64_t depth_estimate = 0;
    int polynomial_degree = 0;  // toffoli_count = O(p^degree) at fixed n
    std::string basis;
};

ResourceEstimate estimate_resources(const OracleSpec& spec,
                                    PatternVariant variant = PatternVariant::MantissaAgnostic);

}  // namespace htr
