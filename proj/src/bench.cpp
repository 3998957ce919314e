#include "ccsinv/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "ccsinv/ccs_format.hpp"
#include "ccsinv/corpus.hpp"
#include "ccsinv/inversion.hpp"
#include "ccsinv/rewrite.hpp"

namespace ccsinv {

double BenchRow::speedup_steps() const
{
    return static_cast<double>(baseline_steps) / static_cast<double>(candidate_steps);
}

double BenchRow::speedup_calls() const
{
    return static_cast<double>(baseline_calls) / static_cast<double>(candidate_calls);
}

std::string format_ratio(double r)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", r);
    return buf;
}

const std::vector<std::pair<std::uint64_t, std::uint64_t>>& ack_bench_inputs()
{
    static const std::vector<std::pair<std::uint64_t, std::uint64_t>> inputs{
        {1, 2}, {1, 3},  {1, 4},  {1, 5},  {1, 6},   {1, 7},   {1, 8},
        {2, 3}, {2, 5},  {2, 7},  {2, 9},  {2, 11},  {2, 13},  {2, 15},
        {3, 5}, {3, 13}, {3, 29}, {3, 61}, {3, 125}, {3, 253}, {3, 509},
    };
    return inputs;
}

BenchReport run_ack_bench(const std::vector<std::uint64_t>& xs)
{
    const Example* baseline_src = find_example("ack_2");
    const Example* ack_src = find_example("ack");
    if (!baseline_src || !ack_src)
        throw std::logic_error("bundled ack examples missing");
    const System baseline = parse_or_throw(baseline_src->text);
    const System ack = parse_or_throw(ack_src->text);
    const System candidate = invert_system(ack, make_task(ack, "ack", {1}, {1}, "partial")).produced;

    BenchReport report;
    for (const auto& [x, z] : ack_bench_inputs()) {
        if (std::find(xs.begin(), xs.end(), x) == xs.end())
            continue;
        const std::vector<Term> args{to_unary(x), to_unary(z)};
        const auto b = evaluate(baseline, Query{report.baseline_label, args});
        const auto c = evaluate(candidate, Query{report.candidate_label, args});
        report.rows.push_back({x, z, b.stats.rewrite_steps, b.stats.function_calls, c.stats.rewrite_steps,
                               c.stats.function_calls});
    }
    return report;
}

std::string BenchReport::to_text() const
{
    const std::vector<std::string> header{"input",
                                          baseline_label + " steps",
                                          baseline_label + " calls",
                                          candidate_label + " steps",
                                          candidate_label + " calls",
                                          "speed-up steps",
                                          "speed-up calls"};
    std::vector<std::vector<std::string>> table{header};
    for (const auto& r : rows)
        table.push_back({"(" + std::to_string(r.x) + ", " + std::to_string(r.z) + ")", std::to_string(r.baseline_steps),
                         std::to_string(r.baseline_calls), std::to_string(r.candidate_steps),
                         std::to_string(r.candidate_calls), format_ratio(r.speedup_steps()),
                         format_ratio(r.speedup_calls())});
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : table)
        for (std::size_t i = 0; i < line.size(); ++i)
            width[i] = std::max(width[i], line[i].size());
    std::string s;
    for (const auto& line : table) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (i == 0)
                s += line[i] + std::string(width[i] - line[i].size(), ' ');
            else
                s += "  " + std::string(width[i] - line[i].size(), ' ') + line[i];
        }
        s += "\n";
    }
    return s;
}

std::string BenchReport::to_json() const
{
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"input", {r.x, r.z}}, {"system", baseline_label},
                             {"rewrite_steps", r.baseline_steps}, {"function_calls", r.baseline_calls}});
        rows_json.push_back({{"input", {r.x, r.z}},
                             {"system", candidate_label},
                             {"rewrite_steps", r.candidate_steps},
                             {"function_calls", r.candidate_calls},
                             {"speedup_steps", format_ratio(r.speedup_steps())},
                             {"speedup_calls", format_ratio(r.speedup_calls())}});
    }
    return nlohmann::json{{"baseline", baseline_label}, {"candidate", candidate_label}, {"rows", rows_json}}.dump(2);
}

}  // namespace ccsinv
