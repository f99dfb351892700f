// Executable demonstration that thresholds independent of f and of system
// size cannot keep the register safe: a scripted schedule where fast
// Byzantine replies steer a uniform-threshold reader to a stale value,
// alongside a control run where the standard client stays linearizable.
#pragma once

#include <string>

#include "abcc/checker.hpp"

namespace abcc {

struct CounterexampleLeg {
    std::string name;
    bool linearizable = false;
    std::string violation;
    std::string read_returned;   // what the steered read came back with
    std::string latest_written;  // the newest completed write before the read
};

struct CounterexampleReport {
    CounterexampleLeg uniform;        // uniform client, |F| Byzantine servers: must violate
    CounterexampleLeg control;        // standard client, |F| <= f: must stay linearizable
    CounterexampleLeg uniform_clean;  // uniform client, zero Byzantine: must stay linearizable

    bool demonstrated() const {
        return !uniform.linearizable && control.linearizable && uniform_clean.linearizable;
    }
};

CounterexampleReport run_uniform_counterexample();

std::string format_counterexample_text(const CounterexampleReport& r);

}  // namespace abcc
