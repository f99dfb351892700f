// Scenario files and the batch runner: repeat seeded simulations, check
// every trace, and aggregate verdicts and latency distributions.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "abcc/checker.hpp"
#include "abcc/simnet.hpp"

namespace abcc {

enum class Expectation : uint8_t { Pass = 0, ViolationA5, ViolationAtomicity };

struct Scenario {
    std::string name;
    SimConfig sim;
    Expectation expected = Expectation::Pass;
    int repeat = 1;
};

Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);

struct RunResult {
    uint64_t seed = 0;
    bool linearizable = false;
    bool liveness_ok = false;
    bool audits_ok = false;
    int completed_ops = 0;
    double max_join_latency_d = 0.0;  // in units of D
    double max_op_latency_d = 0.0;
    std::string first_violation;
};

struct BatchReport {
    std::string scenario;
    Expectation expected = Expectation::Pass;
    std::vector<RunResult> runs;
    bool ok = false;  // every run matched the expectation

    int passed() const {
        int n = 0;
        for (const auto& r : runs)
            if (r.linearizable && r.liveness_ok && r.audits_ok) n++;
        return n;
    }
};

// Runs `repeat` simulations with seeds base, base+1, ... and checks each
// trace. `trace_dir`, when set, receives one trace file per run.
BatchReport run_scenario(const Scenario& s, const std::optional<std::string>& trace_dir = std::nullopt);

std::string format_batch_text(const BatchReport& r);

}  // namespace abcc
