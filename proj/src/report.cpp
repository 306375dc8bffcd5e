#include "htr/cli.hpp"

#include <json.hpp>

#include <sstream>

namespace htr {

using json = nlohmann::ordered_json;

std::string_view to_string(RunMethod method) {
    switch (method) {
        case RunMethod::QuantumSim: return "quantum-sim";
        case RunMethod::Brute: return "brute";
        case RunMethod::Both: return "both";
    }
    return "?";
}

std::string_view to_string(OutputFormat format) {
    switch (format) {
        case OutputFormat::Json: return "json";
        case OutputFormat::Csv: return "csv";
        case OutputFormat::Human: return "human";
    }
    return "?";
}

InputAnalysis analyze_input(FunctionId f, const BinaryFloat& x, int n, RoundingMode mode, const EvalConfig& cfg) {
    if (n < 1) throw PreconditionError("analyze_input: n must be at least 1");
    if (x.prec() > n) throw PreconditionError("analyze_input: input has more than n fraction digits");
    InputAnalysis a;
    a.f = f;
    a.input = BinaryFloat(x.sign(), x.fraction().widened(n), x.exponent());
    a.n = n;
    a.mode = mode;
    a.exceptional = is_exceptional(f, a.input, n);
    a.tail = eval_tail(f, a.input, n, 0, cfg);
    if (!a.tail.zero) {
        const int last = a.tail.exact ? std::max(a.tail.zeros_from, n + 2) : a.tail.resolved_at;
        a.value = eval(f, a.input, last + 8, cfg).value;
    }
    if (!a.exceptional) {
        a.dangerous_run = a.tail.dangerous_run(mode);
        a.run_end = run_end(a.tail, mode);
        a.required_precision = required_precision(a.tail, mode);
    }
    return a;
}

std::string tail_notation(const InputAnalysis& a) {
    const auto& v = a.value;
    if (v.prec() == 0) return "0";
    const int n = a.n;
    const std::string digits = v.digits.to_digit_string();
    std::string s = v.sign ? "-1." : "1.";
    s += digits.substr(0, static_cast<std::size_t>(n));
    s += ' ';
    s += digits[static_cast<std::size_t>(n)];
    const auto run_begin = static_cast<std::size_t>(n + 1);
    const auto run_len = static_cast<std::size_t>(a.tail.exact ? 0 : a.tail.run_length);
    if (run_len > 0) s += ' ' + digits.substr(run_begin, run_len);
    s += ' ' + digits.substr(run_begin + run_len) + "...";
    if (v.exponent != 0) s += "\xC2\xB7" "2^" + std::to_string(v.exponent);
    return s;
}

namespace {

json stats_json(const BuildStats& s) {
    return {{"scanned", s.scanned}, {"excluded", s.excluded}, {"escalations", s.escalations}};
}

json report_json(const HtrReport& r) {
    json j;
    j["method"] = to_string(r.method);
    j["result"] = r.result;
    j["capped"] = r.capped;
    j["p_max"] = r.query.effective_p_max();
    j["delta_prime_used"] = r.delta_prime_used;
    j["total_oracle_calls"] = r.total_oracle_calls;
    j["build_stats"] = stats_json(r.build_stats);
    json worst = json::array();
    for (const auto& w : r.worst_cases) {
        worst.push_back({{"input", format(w.input)},
                         {"fraction", w.input.fraction().to_digit_string()},
                         {"required_precision", w.required_precision},
                         {"run_end", w.run_end},
                         {"guard", static_cast<int>(w.guard)},
                         {"run_bit", static_cast<int>(w.run_bit)},
                         {"run_length", w.run_length}});
    }
    j["worst_cases"] = std::move(worst);
    json probes = json::array();
    for (const auto& p : r.per_probe_log) {
        json pj{{"p", p.p},
                {"k", static_cast<int>(p.found)},
                {"oracle_calls", p.oracle_calls},
                {"grover_iterations", p.grover_iterations},
                {"seed", p.seed},
                {"cap_check", p.cap_check}};
        pj["witness"] = p.witness ? json(*p.witness) : json(nullptr);
        probes.push_back(std::move(pj));
    }
    j["probes"] = std::move(probes);
    return j;
}

json probe_json(const InputAnalysis& a) {
    json j{{"function", std::string(a.f.name())},
           {"input", format(a.input)},
           {"n", a.n},
           {"mode", std::string(to_string(a.mode))},
           {"exceptional", a.exceptional},
           {"value", a.value.prec() ? format(a.value) : std::string("0")},
           {"tail", tail_notation(a)},
           {"guard", static_cast<int>(a.tail.guard)},
           {"run_bit", static_cast<int>(a.tail.run_bit)},
           {"run_length", a.tail.run_length},
           {"dangerous_run", a.dangerous_run},
           {"run_end", a.run_end},
           {"resolved_at", a.tail.resolved_at},
           {"escalations", a.tail.escalations}};
    j["required_precision"] = a.exceptional ? json(nullptr) : json(a.required_precision);
    return j;
}

json config_json(const RunConfig& c) {
    const auto& q = c.query;
    json j{{"function", std::string(q.f.name())},
           {"n", q.n},
           {"exponent", q.e},
           {"mode", std::string(to_string(q.mode))},
           {"p_max", q.effective_p_max()},
           {"delta", q.delta},
           {"seed", q.seed},
           {"method", std::string(to_string(c.method))},
           {"output", std::string(to_string(c.output))}};
    j["validate_runs"] = c.validate_runs ? json(*c.validate_runs) : json(nullptr);
    j["probe_input"] = c.probe_input ? json(*c.probe_input) : json(nullptr);
    j["qsearch"] = {{"growth", c.qsearch.growth},
                    {"budget_constant", c.qsearch.budget_constant},
                    {"pass_miss_bound", c.qsearch.pass_miss_bound}};
    return j;
}

}  // namespace

std::string to_json(const ReportEnvelope& env) {
    json j;
    j["tool"] = {{"name", "htr"}, {"version", env.tool_version}};
    j["config"] = config_json(env.config);
    json reports = json::array();
    for (const auto& r : env.reports) reports.push_back(report_json(r));
    j["reports"] = std::move(reports);
    if (env.agreement) j["agreement"] = *env.agreement;
    if (env.validation) {
        const auto& v = *env.validation;
        j["validation"] = {{"runs", v.runs},
                           {"agreements", v.agreements},
                           {"agreement_rate", v.agreement_rate},
                           {"reference", v.reference},
                           {"results", v.results},
                           {"min_oracle_calls", v.min_oracle_calls},
                           {"max_oracle_calls", v.max_oracle_calls},
                           {"mean_oracle_calls", v.mean_oracle_calls}};
    }
    if (env.probe) j["probe"] = probe_json(*env.probe);
    json timings = json::object();
    for (const auto& [k, v] : env.timings_ms) timings[k] = v;
    j["runtime"] = {{"timings_ms", std::move(timings)},
                    {"cache",
                     {{"persistent", env.cache.persistent},
                      {"hits", env.cache.hits()},
                      {"memory_hits", env.cache.memory_hits},
                      {"disk_hits", env.cache.disk_hits},
                      {"disk_misses", env.cache.disk_misses},
                      {"disk_rejected", env.cache.disk_rejected},
                      {"builds", env.cache.builds}}}};
    return j.dump(2) + "\n";
}

std::string to_csv(const ReportEnvelope& env) {
    std::ostringstream out;
    const auto& q = env.config.query;
    if (env.probe) {
        const auto& a = *env.probe;
        out << "function,n,exponent,mode,input,exceptional,guard,run_bit,run_length,run_end,required_precision,"
               "resolved_at\n";
        out << a.f.name() << ',' << a.n << ',' << a.input.exponent() << ',' << to_string(a.mode) << ','
            << format(a.input) << ',' << a.exceptional << ',' << a.tail.guard << ',' << a.tail.run_bit << ','
            << a.tail.run_length << ',' << a.run_end << ',' << a.required_precision << ',' << a.tail.resolved_at
            << '\n';
        return out.str();
    }
    out << "method,function,n,exponent,mode,p_max,delta,seed,result,capped,total_oracle_calls,probes,"
           "delta_prime_used,worst_case_count,first_worst_case,agreement\n";
    for (const auto& r : env.reports) {
        out << to_string(r.method) << ',' << q.f.name() << ',' << q.n << ',' << q.e << ',' << to_string(q.mode) << ','
            << q.effective_p_max() << ',' << q.delta << ',' << q.seed << ',' << r.result << ',' << r.capped << ','
            << r.total_oracle_calls << ',' << r.per_probe_log.size() << ',' << r.delta_prime_used << ','
            << r.worst_cases.size() << ',' << (r.worst_cases.empty() ? "" : format(r.worst_cases.front().input))
            << ',' << (env.agreement ? (*env.agreement ? "1" : "0") : "") << '\n';
    }
    return out.str();
}

std::string to_human(const ReportEnvelope& env) {
    std::ostringstream out;
    const auto& q = env.config.query;
    out << "htr " << env.tool_version << "\n";
    out << "function " << q.f.name() << "  n " << q.n << "  exponent " << q.e << "  mode " << to_string(q.mode);
    if (!env.probe) out << "  p_max " << q.effective_p_max() << "  delta " << q.delta << "  seed " << q.seed;
    out << "\n";

    if (env.probe) {
        const auto& a = *env.probe;
        out << "x       = " << format(a.input) << "\n";
        out << "f(x)    = " << tail_notation(a) << "\n";
        if (a.exceptional) {
            out << "exceptional: f(x) is exact, never a bad case\n";
            return out.str();
        }
        out << "guard " << a.tail.guard << ", run of " << a.tail.run_length << " x " << a.tail.run_bit
            << " from digit " << a.n + 2 << ", broken at digit " << a.tail.resolved_at << "\n";
        out << "run ends at digit " << a.run_end << "; required precision " << a.required_precision << "\n";
        return out.str();
    }

    for (const auto& r : env.reports) {
        out << "\n" << to_string(r.method) << ": htr " << (r.capped ? "> " : "= ") << r.result;
        if (r.capped) out << " (capped at p_max)";
        out << "\n";
        if (r.method == Method::QuantumSim) {
            out << "  oracle calls " << r.total_oracle_calls << ", delta' " << r.delta_prime_used << "\n";
            for (const auto& p : r.per_probe_log) {
                out << "  probe p=" << p.p << " k=" << p.found << " calls=" << p.oracle_calls;
                if (p.cap_check) out << " (cap check)";
                out << "\n";
            }
        }
        std::size_t shown = 0;
        for (const auto& w : r.worst_cases) {
            if (++shown > 8) {
                out << "  ... " << r.worst_cases.size() - 8 << " more\n";
                break;
            }
            const InputAnalysis a = analyze_input(q.f, w.input, q.n, q.mode);
            out << "  x = " << format(w.input) << "  needs " << w.required_precision << "\n";
            out << "    f(x) = " << tail_notation(a) << "\n";
        }
    }
    if (env.agreement) out << "\nagreement: " << (*env.agreement ? "yes" : "no") << "\n";
    if (env.validation) {
        const auto& v = *env.validation;
        out << "validation: " << v.agreements << "/" << v.runs << " runs agree with " << v.reference
            << ", mean oracle calls " << v.mean_oracle_calls << "\n";
    }
    return out.str();
}

}  // namespace htr
