#pragma once

#include "htr/htr_search.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace htr {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum class RunMethod { QuantumSim, Brute, Both };
enum class OutputFormat { Json, Csv, Human };

std::string_view to_string(RunMethod method);
std::string_view to_string(OutputFormat format);

struct RunConfig {
    HtrQuery query;
    RunMethod method = RunMethod::QuantumSim;
    OutputFormat output = OutputFormat::Json;
    std::filesystem::path cache_dir;
    std::optional<int> validate_runs;
    std::optional<std::string> probe_input;
    QSearchConfig qsearch;
};

/// Tail analysis of one input, without building any marked set.
struct InputAnalysis {
    FunctionId f = FunctionId::exp();
    BinaryFloat input = BinaryFloat::from_uint(0, 1, 0);
    int n = 0;
    RoundingMode mode = RoundingMode::NearestTiesEven;
    bool exceptional = false;
    TailRecord tail;
    /// f(x) truncated a few digits past the end of the run.
    ExtendedSignificand value;
    int dangerous_run = 0;
    int run_end = 0;
    int required_precision = 0;  // 0 when exceptional
};

InputAnalysis analyze_input(FunctionId f, const BinaryFloat& x, int n, RoundingMode mode, const EvalConfig& cfg = {});

/// "1.<m_1..m_n> <guard> <run> <following digits>..." with the exponent suffix.
std::string tail_notation(const InputAnalysis& a);

struct CacheReport {
    std::uint64_t memory_hits = 0;
    std::uint64_t disk_hits = 0;
    std::uint64_t disk_misses = 0;
    std::uint64_t disk_rejected = 0;
    std::uint64_t builds = 0;
    bool persistent = false;
    std::uint64_t hits() const noexcept { return memory_hits + disk_hits; }
};

struct ReportEnvelope {
    std::string tool_version{kToolVersion};
    RunConfig config;
    std::vector<HtrReport> reports;
    std::optional<bool> agreement;
    std::optional<ValidationSummary> validation;
    std::optional<InputAnalysis> probe;
    std::map<std::string, double> timings_ms;
    CacheReport cache;
};

std::string to_json(const ReportEnvelope& envelope);
std::string to_csv(const ReportEnvelope& envelope);
std::string to_human(const ReportEnvelope& envelope);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int parameter = 2;
inline constexpr int unresolved = 3;
}  // namespace exit_code

/// Entry point of the `htr` tool.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace htr
