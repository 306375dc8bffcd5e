#include "htr/oracle_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <thread>

namespace htr {

void OracleSpec::validate() const {
    if (n < 1) throw PreconditionError("oracle spec: n must be at least 1");
    if (p <= n) throw PreconditionError("oracle spec: p must exceed n");
}

bool MarkedSet::contains(std::uint64_t fraction) const {
    return std::binary_search(members.begin(), members.end(), fraction);
}

// ---------------------------------------------------------------------------
// TailTable

namespace {

constexpr TailTable::Entry kRunMask = 0x1FFF;
constexpr TailTable::Entry kGuardBit = 0x2000;
constexpr TailTable::Entry kRunBitBit = 0x4000;
constexpr TailTable::Entry kExactBit = 0x8000;

int entry_dangerous_run(TailTable::Entry entry, RoundingMode mode) {
    const bool guard = entry & kGuardBit;
    const bool run_bit = entry & kRunBitBit;
    const bool dangerous = is_directed(mode) ? run_bit == guard : run_bit != guard;
    return dangerous ? static_cast<int>(entry & kRunMask) : 0;
}

}  // namespace

TailTable::TailTable(Key key, std::vector<Entry> entries, BuildStats stats)
    : key_(std::move(key)), entries_(std::move(entries)), stats_(stats) {
    if (entries_.size() != (std::uint64_t{1} << key_.n)) throw std::invalid_argument("TailTable: entry count mismatch");
}

TailTable::Entry TailTable::pack(const TailRecord& tail) {
    if (tail.exact) return kExactBit;
    if (tail.run_length > kMaxRunLength) throw std::out_of_range("TailTable: run length exceeds entry width");
    Entry e = static_cast<Entry>(tail.run_length);
    if (tail.guard) e |= kGuardBit;
    if (tail.run_bit) e |= kRunBitBit;
    return e;
}

int TailTable::required_precision(std::uint64_t fraction, RoundingMode mode) const {
    const Entry entry = entries_.at(fraction);
    if (entry & kExactBit) return 0;
    return key_.n + 1 + entry_dangerous_run(entry, mode) + kBoundaryOffset;
}

bool TailTable::is_bad(std::uint64_t fraction, int p, RoundingMode mode) const {
    const Entry entry = entries_.at(fraction);
    if (entry & kExactBit) return false;
    return p <= key_.n + 1 + entry_dangerous_run(entry, mode);
}

int TailTable::max_required_precision(RoundingMode mode) const {
    int worst = key_.n + 1;
    for (std::uint64_t i = 0; i < entries_.size(); ++i)
        if (!(entries_[i] & kExactBit)) worst = std::max(worst, required_precision(i, mode));
    return worst;
}

MarkedSet TailTable::marked_set(const OracleSpec& spec) const {
    spec.validate();
    if (spec.n != key_.n || spec.e != key_.e || spec.f.name() != key_.function)
        throw std::invalid_argument("TailTable::marked_set: spec does not match table");
    MarkedSet ms{spec, {}, stats_};
    for (std::uint64_t i = 0; i < entries_.size(); ++i)
        if (is_bad(i, spec.p, spec.mode)) ms.members.push_back(i);
    return ms;
}

TailTable::Key tail_table_key(FunctionId f, int n, std::int64_t e, const BuildOptions& options) {
    return {std::string(f.name()), n, e, options.run_cap > 0 ? options.run_cap : default_run_cap(n),
            options.eval.exponent_bits};
}

TailTable build_tail_table(FunctionId f, int n, std::int64_t e, const BuildOptions& options) {
    if (n < 1 || n > options.max_n)
        throw PreconditionError("build: n must be in [1, " + std::to_string(options.max_n) + "]");
    TailTable::Key key = tail_table_key(f, n, e, options);
    const std::uint64_t count = std::uint64_t{1} << n;

    constexpr std::uint64_t kChunk = 4096;
    const std::uint64_t chunks = (count + kChunk - 1) / kChunk;
    unsigned workers = options.workers ? options.workers : std::max(1U, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));

    struct Failure {
        std::uint64_t input;
        std::string message;
        bool unresolved;
    };
    struct ChunkResult {
        BuildStats stats;
        std::vector<Failure> failures;
    };

    std::vector<TailTable::Entry> entries(count, 0);
    std::vector<ChunkResult> results(chunks);
    std::atomic<std::uint64_t> next{0};

    auto work = [&] {
        for (std::uint64_t c; (c = next.fetch_add(1)) < chunks;) {
            ChunkResult& r = results[c];
            const std::uint64_t end = std::min(count, (c + 1) * kChunk);
            for (std::uint64_t i = c * kChunk; i < end; ++i) {
                ++r.stats.scanned;
                const BinaryFloat x = BinaryFloat::from_uint(i, n, e);
                try {
                    const TailRecord tail = eval_tail(f, x, n, key.run_cap, options.eval);
                    if (tail.exact) ++r.stats.excluded;
                    r.stats.escalations += static_cast<std::uint64_t>(tail.escalations);
                    entries[i] = TailTable::pack(tail);
                } catch (const UnresolvedPrecisionError& err) {
                    r.failures.push_back({i, err.what(), true});
                } catch (const std::exception& err) {
                    r.failures.push_back({i, err.what(), false});
                }
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
        work();
    }

    BuildStats stats;
    std::vector<Failure> failures;
    for (auto& r : results) {
        stats.scanned += r.stats.scanned;
        stats.excluded += r.stats.excluded;
        stats.escalations += r.stats.escalations;
        for (auto& fail : r.failures) failures.push_back(std::move(fail));
    }
    if (!failures.empty()) {
        // Chunks are concatenated in index order, so failures are already sorted.
        std::vector<std::uint64_t> inputs;
        std::ostringstream msg;
        msg << "build of " << f.name() << " n=" << n << " e=" << e << " failed on " << failures.size()
            << " input(s); first " << format(BinaryFloat::from_uint(failures.front().input, n, e)) << ": "
            << failures.front().message;
        bool unresolved = false;
        for (const auto& fail : failures) {
            if (inputs.size() < 16) inputs.push_back(fail.input);
            unresolved = unresolved || fail.unresolved;
        }
        throw BuildError(msg.str(), std::move(inputs), unresolved);
    }
    return TailTable(std::move(key), std::move(entries), stats);
}

MarkedSet build_marked_set(const OracleSpec& spec, const BuildOptions& options) {
    spec.validate();
    return build_tail_table(spec.f, spec.n, spec.e, options).marked_set(spec);
}

// ---------------------------------------------------------------------------
// OracleCache

OracleCache::OracleCache(BuildOptions options, std::shared_ptr<TableStore> store)
    : options_(std::move(options)), store_(std::move(store)) {}

std::shared_ptr<const TailTable> OracleCache::tail_table(FunctionId f, int n, std::int64_t e) {
    const TailTable::Key key = tail_table_key(f, n, e, options_);
    std::promise<std::shared_ptr<const TailTable>> promise;
    std::shared_future<std::shared_ptr<const TailTable>> pending;
    {
        std::lock_guard lock(mutex_);
        if (auto it = tables_.find(key); it != tables_.end()) {
            ++counters_.memory_hits;
            pending = it->second;
        } else {
            tables_.emplace(key, promise.get_future().share());
        }
    }
    if (pending.valid()) return pending.get();

    try {
        std::shared_ptr<const TailTable> table;
        bool from_store = false;
        if (store_) {
            if (auto loaded = store_->load(key)) {
                table = std::make_shared<const TailTable>(std::move(*loaded));
                from_store = true;
            }
        }
        if (!table) {
            table = std::make_shared<const TailTable>(build_tail_table(f, n, e, options_));
            if (store_) store_->store(*table);
        }
        {
            std::lock_guard lock(mutex_);
            ++(from_store ? counters_.store_hits : counters_.builds);
        }
        promise.set_value(table);
        return table;
    } catch (...) {
        // Failed builds are not memoized; a later request retries.
        promise.set_exception(std::current_exception());
        std::lock_guard lock(mutex_);
        tables_.erase(key);
        throw;
    }
}

std::shared_ptr<const MarkedSet> OracleCache::marked_set(const OracleSpec& spec) {
    spec.validate();
    const TailTable::Key source = tail_table_key(spec.f, spec.n, spec.e, options_);
    const auto set_key = std::make_pair(source, std::make_pair(spec.p, static_cast<int>(spec.mode)));
    {
        std::lock_guard lock(mutex_);
        if (auto it = sets_.find(set_key); it != sets_.end()) {
            ++counters_.memory_hits;
            return it->second;
        }
    }
    std::shared_ptr<const MarkedSet> set;
    if (store_) {
        if (auto loaded = store_->load(spec, source)) {
            set = std::make_shared<const MarkedSet>(std::move(*loaded));
            std::lock_guard lock(mutex_);
            ++counters_.store_hits;
        }
    }
    if (!set) {
        set = std::make_shared<const MarkedSet>(tail_table(spec.f, spec.n, spec.e)->marked_set(spec));
        if (store_) store_->store(*set, source);
    }
    std::lock_guard lock(mutex_);
    return sets_.emplace(set_key, set).first->second;
}

CacheCounters OracleCache::counters() const {
    std::lock_guard lock(mutex_);
    return counters_;
}

// ---------------------------------------------------------------------------
// PhaseOracle

namespace {
constexpr int kMaxBitmapN = 27;
}

PhaseOracle::PhaseOracle(int n, std::vector<std::uint64_t> members) : n_(n), data_(std::make_shared<Data>()) {
    if (n < 1 || n > 62) throw PreconditionError("PhaseOracle: n must be in [1, 62]");
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    if (!members.empty() && members.back() >= domain_size())
        throw PreconditionError("PhaseOracle: member outside the index domain");
    if (n <= kMaxBitmapN) {
        data_->bitmap.assign(std::max<std::uint64_t>(1, domain_size() / 64), 0);
        for (auto m : members) data_->bitmap[m / 64] |= std::uint64_t{1} << (m % 64);
    }
    data_->members = std::move(members);
}

bool PhaseOracle::is_marked(std::uint64_t k) const {
    if (k >= domain_size()) return false;
    if (!data_->bitmap.empty()) return (data_->bitmap[k / 64] >> (k % 64)) & 1U;
    return std::binary_search(data_->members.begin(), data_->members.end(), k);
}

PhaseOracle phase_function(const MarkedSet& ms) { return PhaseOracle(ms.spec.n, ms.members); }

// ---------------------------------------------------------------------------
// Resource model

ResourceEstimate estimate_resources(const OracleSpec& spec, PatternVariant variant) {
    spec.validate();
    const std::int64_t n = spec.n;
    const std::int64_t p = spec.p;

    // Flag logic: digits n+1..p are XOR-normalized in place with CNOTs, then
    // an AND ladder over the literals writes into the |-> target.
    std::int64_t literals = (p - n - 1) + 2;  // run equalities, not exceptional, no range exception
    if (variant == PatternVariant::PinnedLastDigit && !is_directed(spec.mode)) ++literals;
    const std::int64_t flag_toffoli = literals - 1;
    const std::int64_t flag_ancilla = std::max<std::int64_t>(0, literals - 2) + 1;

    // Arithmetic: series of T(p) terms after argument reduction, each one
    // multiplication and one small-integer division, plus two for the
    // reduction. Schoolbook p x p multiplication with ripple-carry adders
    // costs 2p^2 Toffolis. The circuit runs forward and in reverse.
    const auto lg = std::max(1.0, std::log2(static_cast<double>(p)));
    const std::int64_t terms = static_cast<std::int64_t>(std::ceil(static_cast<double>(p) / lg)) + 2;
    const std::int64_t mults = 2 * terms + 2;
    const std::int64_t arith_one_way = mults * 2 * p * p;
    const std::int64_t arith = 2 * arith_one_way;

    ResourceEstimate r;
    r.flag_toffoli_count = flag_toffoli;
    r.arithmetic_toffoli_count = arith;
    r.toffoli_count = arith + flag_toffoli;
    r.ancilla_width = (mults + 1) * p + flag_ancilla;
    r.depth_estimate = r.toffoli_count;  // ripple adders, no gate-level parallelism assumed
    r.polynomial_degree = 3;
    r.basis =
        "flag: AND ladder over (p-n-1) digit equalities plus not-exceptional and no-range-exception "
        "literals, L-1 Toffolis for L literals, measurement-based uncompute; arithmetic: (2T+2) "
        "multiplications with T = ceil(p/log2 p)+2 series terms, 2p^2 Toffolis each (schoolbook, "
        "ripple-carry), computed and uncomputed; ancillas: one p-bit register per multiplication plus "
        "ladder intermediates and the |-> target; depth: fully sequential Toffoli depth";
    return r;
}

}  // namespace htr
