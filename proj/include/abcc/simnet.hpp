// Deterministic discrete-event engine: virtual clock, reliable broadcast
// with per-recipient delays in (0, D], per-sender FIFO delivery, churn
// admission under the sliding-window rate bound, and node lifecycle.
// A trace is a pure function of (config, seed).
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "abcc/adversary.hpp"
#include "abcc/model.hpp"
#include "abcc/params.hpp"
#include "abcc/protocol.hpp"

namespace abcc {

// splitmix64; kept self-contained so traces are reproducible across
// standard-library implementations.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    uint64_t below(uint64_t n) { return n ? next() % n : 0; }
    bool chance(double p) { return uniform01() < p; }

  private:
    uint64_t state_;
};

enum class DelayKind : uint8_t { Uniform = 0, Constant, Bimodal, AdversarialFast };

// Message delay model over (0, D]. AdversarialFast is the steering
// environment: corrupt servers and clients exchange messages almost
// instantly while honest servers answer at the full bound.
struct DelayModel {
    DelayKind kind = DelayKind::Uniform;
    double min_fraction = 1e-6;   // Uniform: draw from (min_fraction*D, D]
    double fast_fraction = 0.1;   // Bimodal/AdversarialFast: the fast delay
    double fast_prob = 0.5;       // Bimodal
    double sample(double d, bool sender_fast, Rng& rng) const;
};

enum class ChurnPattern : uint8_t { None = 0, TargetRate, Scripted };

struct ScriptedChurnEvent {
    double t = 0.0;
    bool is_enter = true;
};

struct ChurnConfig {
    ChurnPattern pattern = ChurnPattern::None;
    double rate_fraction = 1.0;   // proposal intensity as a fraction of the budget
    bool enforce_a5 = true;       // switch off only for violation experiments
    std::vector<ScriptedChurnEvent> scripted;
};

struct WorkloadConfig {
    int total_ops = 20;
    double read_fraction = 0.5;
    double gap = 0.25;            // max think time between ops, in units of D
    int client_entrants = 0;      // clients entering after time 0
    int crash_clients = 0;        // clients crashed mid-run (workload-chosen)
    int max_ops_per_client = 0;   // 0: unlimited
    bool entrants_read_only = false;
    double entrant_delay = -1.0;  // absolute enter time of the first entrant; <0: spread over the run start
};

struct SimConfig {
    Params params;
    int initial_servers = 0;      // defaults to params.ns_min
    int initial_clients = 2;
    double duration = 100.0;      // in absolute time units
    ChurnConfig churn;
    WorkloadConfig workload;
    AdversarySpec adversary;
    DelayModel delay;
    uint64_t seed = 1;
    bool override_feasibility = false;
    bool uniform_client_variant = false;
    bool unchecked_adversary = false;  // impossibility demo only
    bool record_steps = true;          // per-step trace lines (ops/lives always recorded)
};

enum class TriggerKind : uint8_t { Enter = 0, Leave, Crash, InvokeRead, InvokeWrite, Receive };

struct TraceTrigger {
    TriggerKind kind = TriggerKind::Enter;
    MsgKind msg = MsgKind::Enter;  // Receive only
    NodeId from;
    NodeId q;
    uint64_t tag = 0;
    double sent_t = 0.0;  // Receive only: when the message was broadcast
    Val value;            // InvokeWrite
};

struct SentSummary {
    MsgKind kind;
    Scope scope;
    NodeId to;      // unicast target
    NodeId q;
    uint64_t tag = 0;
    ValueTs vts;    // update only
    bool joined_flag = false;
    uint32_t n_changes = 0;
    uint32_t n_kw = 0;
};

struct ResponseSummary {
    ResponseKind kind;
    Val value;
    Timestamp ts;
    std::string op_id;
};

struct TraceStep {
    double t = 0.0;
    NodeId node;
    TraceTrigger trigger;
    std::vector<SentSummary> sent;
    std::optional<ResponseSummary> response;
    bool became_joined = false;
    int ns = 0;  // servers present after this step
};

struct NodeLife {
    NodeId id;
    bool correct = true;
    bool initial = false;  // in S0/C0
    double enter_t = 0.0;
    std::optional<double> join_t;  // set for initial nodes to 0
    std::optional<double> leave_t;
    std::optional<double> crash_t;
};

struct TraceHeader {
    Params params;
    uint64_t seed = 0;
    double duration = 0.0;
    int initial_servers = 0;
    int initial_clients = 0;
    std::vector<NodeId> s0;
    std::vector<NodeId> c0;
    std::vector<NodeId> corrupt;
    std::string strategy;
    bool a5_enforced = true;
    bool uniform_client_variant = false;
};

struct Trace {
    TraceHeader header;
    std::vector<TraceStep> steps;
    std::vector<OpRecord> ops;
    std::map<NodeId, NodeLife> lives;
    double end_t = 0.0;
};

// Runs one simulation. Throws on infeasible parameters (unless overridden),
// on A1 violations, and on adversary model violations.
Trace run_simulation(const SimConfig& cfg);

// Exact sliding-window admission check used by the engine; exposed for the
// churn unit tests. Returns true if adding a server churn event at `t`
// keeps every window [t0, t0+d] with t0 in [t-d, t] within alpha*NS(t0).
class ChurnLedger {
  public:
    ChurnLedger(double alpha, double d, int ns0) : alpha_(alpha), d_(d), ns0_(ns0) {}

    bool admissible(double t, bool is_enter, int ns_min, bool check_a1) const;
    void commit(double t, bool is_enter);
    int ns_at(double t) const;  // ground-truth server count at time t
    // True iff a leave at t keeps NS >= ns_min at t and at every committed
    // event after it.
    bool leave_keeps_a1(double t, int ns_min) const;

  private:
    int events_in(double lo, bool lo_closed, double hi, bool hi_closed) const;

    double alpha_;
    double d_;
    int ns0_;
    std::vector<std::pair<double, bool>> events_;  // (time, is_enter), sorted
};

}  // namespace abcc
