#pragma once

#include "htr/oracle_sim.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace htr {

inline constexpr std::uint32_t kCacheFormatVersion = 1;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);

/// On-disk record store, one file per key:
///
///   "HTRCACHE" | u32 version | u32 kind | u32 header length | header JSON
///   | u64 payload length | payload | u64 FNV-1a of everything before
///
/// All integers are little-endian. Records are published by writing a
/// temporary file in the same directory and renaming it over the target, so
/// readers never see a partial record. Unreadable, truncated, foreign-version
/// or mismatching records count as misses.
class DiskStore : public TableStore {
public:
    using Warn = std::function<void(const std::string&)>;

    explicit DiskStore(std::filesystem::path dir, Warn warn = {}, std::uint32_t version = kCacheFormatVersion);

    /// False when the directory could not be created or written; the store then
    /// behaves as an always-missing sink.
    bool usable() const noexcept { return usable_; }
    const std::filesystem::path& dir() const noexcept { return dir_; }

    std::optional<TailTable> load(const TailTable::Key& key) override;
    void store(const TailTable& table) override;
    std::optional<MarkedSet> load(const OracleSpec& spec, const TailTable::Key& source) override;
    void store(const MarkedSet& set, const TailTable::Key& source) override;

    std::filesystem::path path_for(const TailTable::Key& key) const;
    std::filesystem::path path_for(const OracleSpec& spec, const TailTable::Key& source) const;

    std::uint64_t hits() const noexcept { return hits_; }
    std::uint64_t misses() const noexcept { return misses_; }
    std::uint64_t rejected() const noexcept { return rejected_; }  // present but corrupt or foreign

private:
    enum class Kind : std::uint32_t { TailTable = 1, MarkedSet = 2 };

    std::optional<std::string> read_payload(const std::filesystem::path& path, Kind kind, const std::string& header);
    void write_record(const std::filesystem::path& path, Kind kind, const std::string& header,
                      std::string_view payload);
    void warn(const std::string& message);

    std::filesystem::path dir_;
    Warn warn_;
    std::uint32_t version_;
    bool usable_ = false;
    std::atomic<std::uint64_t> hits_{0}, misses_{0}, rejected_{0};
};

/// HTR_CACHE_DIR, or empty when unset.
std::filesystem::path default_cache_dir();

}  // namespace htr
