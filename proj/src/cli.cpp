#include "htr/cache_store.hpp"
#include "htr/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ostream>

namespace htr {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

RunMethod parse_method(const std::string& s) {
    if (s == "quantum-sim") return RunMethod::QuantumSim;
    if (s == "brute") return RunMethod::Brute;
    return RunMethod::Both;
}

OutputFormat parse_output(const std::string& s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "human") return OutputFormat::Human;
    return OutputFormat::Json;
}

BinaryFloat parse_probe_input(const std::string& text, std::int64_t exponent) {
    // An explicit exponent suffix wins over --exponent.
    ExtendedSignificand y = parse_significand(text);
    if (text.find("2^") == std::string::npos) y.exponent = exponent;
    return BinaryFloat(y.sign, std::move(y.digits), y.exponent);
}

std::string list_inputs(const std::vector<std::uint64_t>& inputs, int n, std::int64_t e) {
    std::string s;
    for (auto i : inputs) s += "  " + format(BinaryFloat::from_uint(i, n, e)) + "\n";
    return s;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hardness-to-round search for elementary functions", "htr"};
    std::string function = "sin", mode = "nearest", method = "quantum-sim", output = "json";
    int n = 0, p_max = 0;
    std::int64_t exponent = 0;
    double delta = 0.1;
    std::uint64_t seed = 0;
    std::string cache_dir = default_cache_dir().string();
    std::optional<int> validate_runs;
    std::optional<std::string> probe_input;

    app.add_option("--function", function, "exp, ln, log2, sin, cos or 2sin")->capture_default_str();
    app.add_option("--n", n, "target precision (fraction digits)")->required();
    app.add_option("--exponent", exponent, "binade exponent e, inputs in [2^e, 2^(e+1))")->capture_default_str();
    app.add_option("--mode", mode, "nearest, up, down or zero")->capture_default_str();
    app.add_option("--pmax", p_max, "upper bound on working precision (default 2n+32)");
    app.add_option("--delta", delta, "overall failure probability")->capture_default_str();
    app.add_option("--seed", seed, "RNG seed")->capture_default_str();
    app.add_option("--method", method, "quantum-sim, brute or both")
        ->check(CLI::IsMember({"quantum-sim", "brute", "both"}))
        ->capture_default_str();
    app.add_option("--output", output, "json, csv or human")
        ->check(CLI::IsMember({"json", "csv", "human"}))
        ->capture_default_str();
    app.add_option("--cache-dir", cache_dir, "persistent cache directory (default $HTR_CACHE_DIR)");
    app.add_option("--validate-runs", validate_runs, "repeat the quantum search with this many seeds");
    app.add_option("--probe-input", probe_input, "analyze a single input significand, e.g. 1.0101");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_code::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return exit_code::parameter;
    }

    ReportEnvelope env;
    RunConfig& cfg = env.config;
    try {
        cfg.query.f = FunctionId::from_name(function);
        cfg.query.mode = parse_rounding_mode(mode);
        cfg.query.n = n;
        cfg.query.e = exponent;
        cfg.query.p_max = p_max;
        cfg.query.delta = delta;
        cfg.query.seed = seed;
        cfg.method = parse_method(method);
        cfg.output = parse_output(output);
        cfg.cache_dir = cache_dir;
        cfg.validate_runs = validate_runs;
        cfg.probe_input = probe_input;
        cfg.query.validate();
        if (validate_runs && *validate_runs < 1) throw PreconditionError("--validate-runs must be at least 1");
        if (!probe_input && n > BuildOptions{}.max_n)
            throw PreconditionError("--n exceeds the exhaustive limit " + std::to_string(BuildOptions{}.max_n));
        if (!probe_input && cfg.method != RunMethod::Brute && n > SearchOptions{}.max_n)
            throw PreconditionError("--n exceeds the simulation limit " + std::to_string(SearchOptions{}.max_n));
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return exit_code::parameter;
    }

    std::shared_ptr<DiskStore> store;
    if (!cfg.cache_dir.empty())
        store = std::make_shared<DiskStore>(cfg.cache_dir, [&err](const std::string& m) { err << "warning: " << m << "\n"; });
    OracleCache cache({}, store);
    SearchOptions search;
    search.qsearch = cfg.qsearch;

    const auto& q = cfg.query;
    const auto start = std::chrono::steady_clock::now();
    try {
        if (probe_input) {
            BinaryFloat x = [&] {
                try {
                    return parse_probe_input(*probe_input, exponent);
                } catch (const ParseError& e) {
                    throw PreconditionError("--probe-input: " + std::string(e.what()) + " at position " +
                                            std::to_string(e.position()));
                }
            }();
            cfg.query.e = x.exponent();
            env.probe = analyze_input(q.f, x, q.n, q.mode);
            env.timings_ms["probe"] = ms_since(start);
        } else {
            if (cfg.method != RunMethod::QuantumSim) {
                const auto t0 = std::chrono::steady_clock::now();
                env.reports.push_back(htr_brute(q, cache));
                env.timings_ms["brute"] = ms_since(t0);
            }
            if (cfg.method != RunMethod::Brute) {
                const auto t0 = std::chrono::steady_clock::now();
                env.reports.push_back(htr_quantum(q, cache, search));
                env.timings_ms["quantum-sim"] = ms_since(t0);
            }
            if (cfg.method == RunMethod::Both)
                env.agreement = env.reports[0].result == env.reports[1].result &&
                                env.reports[0].capped == env.reports[1].capped;
            if (validate_runs) {
                const auto t0 = std::chrono::steady_clock::now();
                env.validation = validate(q, *validate_runs, cache, search);
                env.timings_ms["validate"] = ms_since(t0);
            }
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::parameter;
    } catch (const BuildError& e) {
        err << "error: " << e.what() << "\noffending inputs:\n" << list_inputs(e.inputs(), q.n, q.e);
        return e.unresolved() ? exit_code::unresolved : exit_code::failure;
    } catch (const UnresolvedPrecisionError& e) {
        err << "error: " << e.what() << "\noffending input:\n  " << (probe_input ? *probe_input : "?") << "\n";
        return exit_code::unresolved;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::failure;
    }
    env.timings_ms["total"] = ms_since(start);

    const auto counters = cache.counters();
    env.cache.memory_hits = counters.memory_hits;
    env.cache.builds = counters.builds;
    if (store) {
        env.cache.persistent = store->usable();
        env.cache.disk_hits = store->hits();
        env.cache.disk_misses = store->misses();
        env.cache.disk_rejected = store->rejected();
    }

    switch (cfg.output) {
        case OutputFormat::Json: out << to_json(env); break;
        case OutputFormat::Csv: out << to_csv(env); break;
        case OutputFormat::Human: out << to_human(env); break;
    }
    return exit_code::ok;
}

}  // namespace htr
