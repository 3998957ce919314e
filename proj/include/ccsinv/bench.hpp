#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ccsinv {

/// One input pair (x, z) of the Ackermann partial-inverse benchmark:
/// x is the first argument of ack, z its result.
struct BenchRow {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    std::uint64_t baseline_steps = 0, baseline_calls = 0;
    std::uint64_t candidate_steps = 0, candidate_calls = 0;

    double speedup_steps() const;
    double speedup_calls() const;
};

struct BenchReport {
    std::string baseline_label = "ack_2";
    std::string candidate_label = "ack{1}{1}";
    std::vector<BenchRow> rows;

    std::string to_text() const;
    std::string to_json() const;
};

/// The 21 input pairs, seven for each x in {1, 2, 3}.
const std::vector<std::pair<std::uint64_t, std::uint64_t>>& ack_bench_inputs();

/// Evaluates Romanenko's ack_2 and the live partial inversion ack{1}{1}
/// under all-solutions search for every input pair whose x is in `xs`.
BenchReport run_ack_bench(const std::vector<std::uint64_t>& xs = {1, 2, 3});

std::string format_ratio(double r);

}  // namespace ccsinv
