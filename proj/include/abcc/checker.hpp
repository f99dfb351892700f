// Post-hoc verification of traces: linearizability of the register history,
// join and operation liveness bounds, and compliance audits that re-derive
// the churn-window properties from the raw event record.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "abcc/model.hpp"
#include "abcc/simnet.hpp"

namespace abcc {

struct History {
    std::vector<OpRecord> ops;
};

// Extracts the checkable history from a trace: completed reads, completed
// writes, and uncompleted writes that got their update broadcast out.
// Reads that never responded are dropped.
History history_from_trace(const Trace& trace);

struct LinVerdict {
    bool linearizable = false;
    std::vector<std::string> witness;  // op ids in linearization order, when found
    std::string violation;             // empty when linearizable
    bool used_search = false;          // fell back to the order-free search
};

// Canonical-order checker: orders writes by timestamp, places bottom-reads
// first and every other read after the write it reads from (same-timestamp
// reads by start time), then verifies real-time precedence and replayed
// register semantics. Accepts iff all checks pass. Completed ops missing a
// timestamp witness force a fallback to the search checker.
LinVerdict check_linearizable_witness(const History& h);

// Independent oracle: searches for any valid linearization (memoized DFS
// over real-time-consistent orders; uncompleted writes may be included or
// omitted). Exhaustive up to `exhaustive_cap` ops, pruned beyond.
LinVerdict check_linearizable_search(const History& h, int exhaustive_cap = 12);

struct LivenessViolation {
    std::string what;
    NodeId node;
    double at = 0.0;
};

struct LivenessReport {
    bool ok = true;
    std::vector<LivenessViolation> violations;
    double max_join_latency = 0.0;  // over audited joiners, in absolute time
    double max_op_latency = 0.0;
    int joins_audited = 0;
    int ops_audited = 0;
};

// Join bound: every correct node outside the initial sets that stays active
// for at least 2D after entering must join within 2D. Operation bound:
// every operation whose client stays active must complete within 4D.
LivenessReport check_liveness(const Trace& trace);

struct AuditViolation {
    std::string rule;  // "A1", "A5", "lemma1-enter", "lemma1-size", "lemma2", "lemma3"
    double window_start = 0.0;
    std::string detail;
};

struct AuditReport {
    bool ok = true;
    std::vector<AuditViolation> violations;
    int windows_checked = 0;
};

// Re-derives NS(t) from the trace events and checks A1, the A5 sliding
// windows, the interval enter/leave/size bounds, and the f+1 correct-server
// window property, for every critical window start.
AuditReport audit_model(const Trace& trace);

struct TraceVerdict {
    LinVerdict lin;
    LivenessReport liveness;
    AuditReport audits;

    bool pass() const { return lin.linearizable && liveness.ok && audits.ok; }
    // CLI exit code: 0 pass, 1 safety/liveness violation, 2 audit-only failure.
    int exit_code() const {
        if (!lin.linearizable || !liveness.ok) return 1;
        if (!audits.ok) return 2;
        return 0;
    }
};

TraceVerdict check_trace(const Trace& trace);

}  // namespace abcc
