#include "htr/cache_store.hpp"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace htr {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash) {
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

namespace {

constexpr std::string_view kMagic = "HTRCACHE";

template <typename T>
void put(std::string& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

template <typename T>
bool get(std::string_view& in, T& value) {
    if (in.size() < sizeof(T)) return false;
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
    value = static_cast<T>(v);
    in.remove_prefix(sizeof(T));
    return true;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string table_header(const TailTable::Key& key) {
    return json{{"function", key.function}, {"n", key.n},          {"e", key.e},
                {"run_cap", key.run_cap},   {"exponent_bits", key.exponent_bits}}
        .dump();
}

std::string set_header(const OracleSpec& spec, const TailTable::Key& source) {
    return json{{"function", source.function},
                {"n", source.n},
                {"e", source.e},
                {"p", spec.p},
                {"mode", std::string(to_string(spec.mode))},
                {"run_cap", source.run_cap},
                {"exponent_bits", source.exponent_bits}}
        .dump();
}

void put_stats(std::string& out, const BuildStats& s) {
    put(out, s.scanned);
    put(out, s.excluded);
    put(out, s.escalations);
}

bool get_stats(std::string_view& in, BuildStats& s) {
    return get(in, s.scanned) && get(in, s.excluded) && get(in, s.escalations);
}

}  // namespace

DiskStore::DiskStore(fs::path dir, Warn warn, std::uint32_t version)
    : dir_(std::move(dir)), warn_(std::move(warn)), version_(version) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (!ec) {
        const fs::path probe = dir_ / (".write-test-" + std::to_string(::getpid()));
        {
            std::ofstream f(probe, std::ios::binary);
            f << "ok";
            usable_ = static_cast<bool>(f);
        }
        fs::remove(probe, ec);
    }
    if (!usable_) this->warn("cache directory " + dir_.string() + " is not writable; caching in memory only");
}

void DiskStore::warn(const std::string& message) {
    if (warn_) warn_(message);
}

fs::path DiskStore::path_for(const TailTable::Key& key) const {
    return dir_ / ("tails-" + hex64(fnv1a64(table_header(key))) + ".htrc");
}

fs::path DiskStore::path_for(const OracleSpec& spec, const TailTable::Key& source) const {
    return dir_ / ("marked-" + hex64(fnv1a64(set_header(spec, source))) + ".htrc");
}

std::optional<std::string> DiskStore::read_payload(const fs::path& path, Kind kind, const std::string& header) {
    if (!usable_) return std::nullopt;
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        ++misses_;
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    const std::string bytes = buf.str();

    auto reject = [&]() -> std::optional<std::string> {
        ++rejected_;
        ++misses_;
        return std::nullopt;
    };
    if (bytes.size() < kMagic.size() + 8) return reject();
    const std::string_view body(bytes.data(), bytes.size() - 8);
    std::string_view tail(bytes.data() + body.size(), 8);
    std::uint64_t checksum = 0;
    get(tail, checksum);
    if (fnv1a64(body) != checksum) return reject();

    std::string_view in = body;
    if (!in.starts_with(kMagic)) return reject();
    in.remove_prefix(kMagic.size());
    std::uint32_t version = 0, record_kind = 0, header_len = 0;
    if (!get(in, version) || version != version_) return reject();
    if (!get(in, record_kind) || record_kind != static_cast<std::uint32_t>(kind)) return reject();
    if (!get(in, header_len) || in.size() < header_len) return reject();
    if (in.substr(0, header_len) != header) return reject();
    in.remove_prefix(header_len);
    std::uint64_t payload_len = 0;
    if (!get(in, payload_len) || in.size() != payload_len) return reject();
    ++hits_;
    return std::string(in);
}

void DiskStore::write_record(const fs::path& path, Kind kind, const std::string& header, std::string_view payload) {
    if (!usable_) return;
    std::string bytes(kMagic);
    put(bytes, version_);
    put(bytes, static_cast<std::uint32_t>(kind));
    put(bytes, static_cast<std::uint32_t>(header.size()));
    bytes += header;
    put(bytes, static_cast<std::uint64_t>(payload.size()));
    bytes += payload;
    put(bytes, fnv1a64(bytes));

    static std::atomic<std::uint64_t> counter{0};
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid()) + "." + hex64(tid) + "." + std::to_string(counter++);
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            warn("could not write cache record " + path.string());
            return;
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        warn("could not publish cache record " + path.string());
    }
}

std::optional<TailTable> DiskStore::load(const TailTable::Key& key) {
    const std::string header = table_header(key);
    auto payload = read_payload(path_for(key), Kind::TailTable, header);
    if (!payload) return std::nullopt;
    std::string_view in = *payload;
    BuildStats stats;
    const std::uint64_t count = std::uint64_t{1} << key.n;
    if (!get_stats(in, stats) || in.size() != count * 2) {
        ++rejected_;
        --hits_;
        ++misses_;
        return std::nullopt;
    }
    std::vector<TailTable::Entry> entries(count);
    for (auto& e : entries) get(in, e);
    return TailTable(key, std::move(entries), stats);
}

void DiskStore::store(const TailTable& table) {
    std::string payload;
    payload.reserve(24 + table.entries().size() * 2);
    put_stats(payload, table.stats());
    for (auto e : table.entries()) put(payload, e);
    write_record(path_for(table.key()), Kind::TailTable, table_header(table.key()), payload);
}

std::optional<MarkedSet> DiskStore::load(const OracleSpec& spec, const TailTable::Key& source) {
    auto payload = read_payload(path_for(spec, source), Kind::MarkedSet, set_header(spec, source));
    if (!payload) return std::nullopt;
    std::string_view in = *payload;
    MarkedSet set{spec, {}, {}};
    std::uint64_t count = 0;
    if (!get_stats(in, set.build_stats) || !get(in, count) || in.size() != count * 8) {
        ++rejected_;
        --hits_;
        ++misses_;
        return std::nullopt;
    }
    set.members.resize(count);
    for (auto& m : set.members) get(in, m);
    return set;
}

void DiskStore::store(const MarkedSet& set, const TailTable::Key& source) {
    std::string payload;
    put_stats(payload, set.build_stats);
    put(payload, static_cast<std::uint64_t>(set.members.size()));
    for (auto m : set.members) put(payload, m);
    write_record(path_for(set.spec, source), Kind::MarkedSet, set_header(set.spec, source), payload);
}

fs::path default_cache_dir() {
    const char* env = std::getenv("HTR_CACHE_DIR");
    return env && *env ? fs::path(env) : fs::path();
}

}  // namespace htr
