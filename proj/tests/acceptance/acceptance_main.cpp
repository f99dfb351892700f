// Acceptance suite: every criterion evaluated at its stated tolerance, one
// pass/fail line each. Exit code is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "abcc/checker.hpp"
#include "abcc/counterexample.hpp"
#include "abcc/params.hpp"
#include "abcc/simnet.hpp"
#include "abcc/trace_io.hpp"

using namespace abcc;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) failures++;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

// ---- criterion 1: constraint reproduction --------------------------------

void criterion1() {
    Params p;
    p.alpha = 0.01;
    p.f = 1;
    p.ns_min = 10;
    p.gamma = 0.82;
    p.beta = 0.84;
    ConstraintReport r = check_constraints(p);
    FeasibleIntervals fi = feasible_interval(p);

    // Independent recomputation of the four bounds, straight from the
    // printed inequalities.
    double a = 0.01;
    int f = 1, ns = 10;
    double glo = (1 + 2.0 * f) / (std::pow(1 - a, 3) * ns) + std::pow(1 + a, 3) / std::pow(1 - a, 3) - 1;
    double ghi = std::pow(1 - a, 3) / std::pow(1 + a, 3) - f / (std::pow(1 + a, 3) * ns);
    double bhi = std::pow(1 - a, 3) / std::pow(1 + a, 2) - f / (std::pow(1 + a, 2) * ns);
    double blo6 = (std::pow(1 + a, 5) - 1 + 2.0 * f / ns) / (std::pow(1 - a, 4) - 1.0 * f / ns);
    double blo7 = (std::pow(1 + a, 3) - std::pow(1 - a, 3) + 1 + (1 + 3.0 * f) / ns) /
                  ((2 + 2 * a + a * a) * std::pow(1 - a, 2) * std::pow(1 + a, -2) - 2.0 * f / ns);
    double blo = std::max(blo6, blo7);

    bool ok = r.feasible;
    ok = ok && std::abs(fi.gamma.lo - glo) < 1e-12 && std::abs(fi.gamma.hi - ghi) < 1e-12;
    ok = ok && std::abs(fi.beta.lo - blo) < 1e-12 && std::abs(fi.beta.hi - bhi) < 1e-12;
    ok = ok && std::abs(fi.gamma.lo - 0.3711) < 1e-3 && std::abs(fi.gamma.hi - 0.8447) < 1e-3;
    ok = ok && std::abs(fi.beta.lo - 0.8387) < 1e-3 && std::abs(fi.beta.hi - 0.8531) < 1e-3;

    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "row (f=1, ns=10, a=0.01) feasible=%d, gamma [%.4f, %.4f], beta (%.4f, %.4f]",
                  int(r.feasible), fi.gamma.lo, fi.gamma.hi, fi.beta.lo, fi.beta.hi);
    report(1, ok, buf);
}

// ---- criterion 2: table audit ---------------------------------------------

void criterion2() {
    auto rows = audit_parameter_table();
    bool all_evaluated = rows.size() == 19;
    bool all_reported = true;    // failing rows carry explicit per-constraint flags
    bool slack_claim = true;     // every failing row within rounding scale
    std::string worst;
    for (const auto& rr : rows) {
        if (rr.report.feasible) continue;
        bool flagged = false;
        for (const auto& c : rr.report.per_constraint) flagged = flagged || !c.satisfied;
        all_reported = all_reported && flagged;
        if (std::abs(rr.worst_slack) >= 0.005) {
            slack_claim = false;
            char buf[128];
            std::snprintf(buf, sizeof buf, " (f=%d,ns=%d,a=%.2f slack %.4f)", rr.row.f, rr.row.ns_min,
                          rr.row.alpha, rr.worst_slack);
            worst += buf;
        }
    }
    bool ok = all_evaluated && all_reported && slack_claim;
    std::string detail = "19 rows evaluated, failures explicitly flagged";
    if (!slack_claim)
        detail = "rows fail beyond the 0.005 rounding scale:" + worst +
                 " -- the reference table disagrees with its own constraint system";
    report(2, ok, detail);
}

// ---- criteria 3-5: safety, liveness and audit suites -----------------------

struct SuiteRow {
    const char* name;
    Params params;
    int initial_servers;
    bool churn;
};

std::vector<SuiteRow> suite_rows() {
    std::vector<SuiteRow> rows;
    {
        Params p;  // reference row 2
        p.alpha = 0.01;
        p.f = 1;
        p.ns_min = 10;
        p.gamma = 0.82;
        p.beta = 0.84;
        rows.push_back({"f1-ns10-a001", p, 10, false});
    }
    {
        Params p;  // reference row 1; gamma chosen from its admissible interval
        p.alpha = 0.0;
        p.f = 1;
        p.ns_min = 8;
        p.gamma = 0.6;
        p.beta = 0.86;
        rows.push_back({"f1-ns8-a0", p, 8, false});
    }
    {
        Params p;  // reference row 5
        p.alpha = 0.01;
        p.f = 2;
        p.ns_min = 19;
        p.gamma = 0.80;
        p.beta = 0.83;
        rows.push_back({"f2-ns19-a001", p, 19, false});
    }
    {
        Params p;  // derived feasible row with a churn budget above one event
        p.alpha = 0.03;
        p.f = 1;
        p.ns_min = 34;
        p.gamma = 0.55;
        p.beta = 0.78;
        rows.push_back({"f1-ns34-a003", p, 40, true});
    }
    return rows;
}

void criteria345() {
    const int kSeeds = 50;
    int runs = 0, lin_ok = 0, live_ok = 0, audit_ok = 0, ops_ok = 0;
    double max_join_d = 0.0, max_op_d = 0.0;
    std::string first_fail;

    for (const SuiteRow& row : suite_rows()) {
        ConstraintReport feas = check_constraints(row.params);
        if (!feas.feasible) {
            first_fail = std::string("suite row ") + row.name + " is not feasible";
            break;
        }
        for (const StrategyInfo& strat : strategy_catalog()) {
            for (int s = 0; s < kSeeds; ++s) {
                SimConfig cfg;
                cfg.params = row.params;
                cfg.initial_servers = row.initial_servers;
                cfg.initial_clients = 4;
                cfg.duration = 110.0;
                cfg.workload.total_ops = 100;
                cfg.workload.read_fraction = 0.5;
                cfg.workload.gap = 0.1;
                cfg.workload.client_entrants = 2;
                cfg.adversary.strategy = strat.kind;
                cfg.adversary.corrupt_count = row.params.f;
                if (row.churn) cfg.churn.pattern = ChurnPattern::TargetRate;
                cfg.seed = 1000 + static_cast<uint64_t>(s);
                cfg.record_steps = false;

                Trace t = run_simulation(cfg);
                TraceVerdict v = check_trace(t);
                runs++;
                int completed = 0;
                for (const OpRecord& op : t.ops)
                    if (op.response_t) completed++;
                if (completed >= 100) ops_ok++;
                if (v.lin.linearizable) lin_ok++;
                if (v.liveness.ok) live_ok++;
                if (v.audits.ok) audit_ok++;
                max_join_d = std::max(max_join_d, v.liveness.max_join_latency / cfg.params.d);
                max_op_d = std::max(max_op_d, v.liveness.max_op_latency / cfg.params.d);
                if (first_fail.empty() && !(v.pass() && completed >= 100)) {
                    first_fail = std::string(row.name) + "/" + strat.name + "/seed " +
                                 std::to_string(cfg.seed) + ": " +
                                 (!v.lin.linearizable   ? "atomicity: " + v.lin.violation
                                  : !v.liveness.ok      ? "liveness: " + v.liveness.violations[0].what
                                  : !v.audits.ok        ? "audit: " + v.audits.violations[0].detail
                                                        : "only " + std::to_string(completed) + " ops completed");
                }
            }
        }
    }

    char buf[320];
    int total = static_cast<int>(suite_rows().size()) * static_cast<int>(strategy_catalog().size()) * kSeeds;
    std::snprintf(buf, sizeof buf, "safety: %d/%d runs linearizable with >=100 ops each (t=%.0fs)%s%s",
                  std::min(lin_ok, ops_ok), total, now_seconds(),
                  first_fail.empty() ? "" : " first issue: ", first_fail.c_str());
    report(3, runs == total && lin_ok == total && ops_ok == total, buf);

    std::snprintf(buf, sizeof buf, "liveness: %d/%d runs clean, max join %.3f D (<=2), max op %.3f D (<=4)",
                  live_ok, total, max_join_d, max_op_d);
    report(4, live_ok == total && max_join_d <= 2.0 + 1e-9 && max_op_d <= 4.0 + 1e-9, buf);

    std::snprintf(buf, sizeof buf, "churn audits: %d/%d runs with all window bounds holding", audit_ok, total);
    report(5, audit_ok == total, buf);
}

// ---- criterion 6: oracle equivalence ---------------------------------------

History random_history(Rng& rng) {
    History h;
    int n_writes = 1 + static_cast<int>(rng.below(3));
    int n_reads = static_cast<int>(rng.below(6));
    if (n_writes + n_reads > 8) n_reads = 8 - n_writes;
    double t = 0.0;
    std::vector<std::pair<Val, Timestamp>> committed{{Val::bottom(), Timestamp{}}};
    for (int i = 0; i < n_writes; ++i) {
        OpRecord op;
        op.id = "w" + std::to_string(i + 1);
        op.client = NodeId::client(1);
        op.is_write = true;
        op.written = Val::of("v" + std::to_string(i + 1));
        op.invoke_t = t + rng.uniform(0.0, 1.0);
        op.response_t = op.invoke_t + rng.uniform(0.1, 2.0);
        op.ts_witness = Timestamp{i + 1, NodeId::client(1)};
        op.update_sent_t = op.invoke_t;
        committed.push_back({op.written, *op.ts_witness});
        t = *op.response_t;
        h.ops.push_back(std::move(op));
    }
    double horizon = t + 1.0;
    for (int i = 0; i < n_reads; ++i) {
        OpRecord op;
        op.id = "r" + std::to_string(i + 1);
        op.client = NodeId::client(2 + i % 2);
        op.invoke_t = rng.uniform(0.0, horizon);
        op.response_t = op.invoke_t + rng.uniform(0.05, 1.5);
        size_t src = rng.below(committed.size());
        op.returned = committed[src].first;
        op.ts_witness = committed[src].second;
        h.ops.push_back(std::move(op));
    }
    return h;
}

void criterion6() {
    Rng rng(424242);
    int agree = 0, total = 1000, lin = 0;
    for (int i = 0; i < total; ++i) {
        History h = random_history(rng);
        bool w = check_linearizable_witness(h).linearizable;
        bool s = check_linearizable_search(h).linearizable;
        if (w == s) agree++;
        if (w) lin++;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "oracle agreement on %d/%d random histories (%d linearizable, %d not)",
                  agree, total, lin, total - lin);
    report(6, agree == total, buf);
}

// ---- criterion 7: impossibility counterexample -----------------------------

void criterion7() {
    CounterexampleReport rep = run_uniform_counterexample();
    bool ok = rep.demonstrated() && rep.uniform.read_returned == "w1" && rep.uniform.latest_written == "w2";
    std::string detail = "uniform reader returned " + rep.uniform.read_returned + " after a completed write of " +
                         rep.uniform.latest_written + "; standard client under the same schedule: " +
                         (rep.control.linearizable ? "linearizable" : "VIOLATED");
    report(7, ok, detail);
}

// ---- criterion 8: violation sensitivity ------------------------------------

void criterion8() {
    int flagged = 0;
    const int kRuns = 10;
    for (int s = 0; s < kRuns; ++s) {
        SimConfig cfg;
        cfg.params.alpha = 0.03;
        cfg.params.f = 1;
        cfg.params.ns_min = 34;
        cfg.params.gamma = 0.55;
        cfg.params.beta = 0.78;
        cfg.initial_servers = 40;
        cfg.initial_clients = 3;
        cfg.duration = 80.0;
        cfg.workload.total_ops = 40;
        cfg.churn.pattern = ChurnPattern::TargetRate;
        cfg.churn.enforce_a5 = false;
        cfg.churn.rate_fraction = 2.5;  // roughly doubled window budget
        cfg.override_feasibility = true;
        cfg.seed = 7000 + static_cast<uint64_t>(s);
        cfg.record_steps = false;
        Trace t = run_simulation(cfg);
        AuditReport rep = audit_model(t);
        bool a5 = false;
        for (const auto& v : rep.violations) a5 = a5 || v.rule == "A5";
        if (a5) flagged++;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "doubled-churn scenario flagged by the A5 audit in %d/%d runs", flagged,
                  kRuns);
    report(8, flagged == kRuns, buf);
}

// ---- criterion 9: determinism ----------------------------------------------

void criterion9() {
    SimConfig cfg;
    cfg.params.alpha = 0.01;
    cfg.params.f = 1;
    cfg.params.ns_min = 10;
    cfg.params.gamma = 0.82;
    cfg.params.beta = 0.84;
    cfg.initial_servers = 10;
    cfg.initial_clients = 3;
    cfg.duration = 60.0;
    cfg.workload.total_ops = 30;
    cfg.workload.client_entrants = 1;
    cfg.adversary.strategy = StrategyKind::Equivocate;
    cfg.adversary.corrupt_count = 1;
    cfg.seed = 99;
    std::string a = trace_to_jsonl(run_simulation(cfg));
    std::string b = trace_to_jsonl(run_simulation(cfg));
    char buf[128];
    std::snprintf(buf, sizeof buf, "re-run with the same seed: %zu bytes, byte-identical=%d", a.size(),
                  int(a == b));
    report(9, a == b && !a.empty(), buf);
}

}  // namespace

int main() {
    now_seconds();  // start the clock
    std::printf("acceptance suite\n");
    criterion1();
    criterion2();
    criteria345();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    std::printf("%s (%d failed), %.0fs total\n", failures == 0 ? "ALL PASS" : "FAILURES PRESENT", failures,
                now_seconds());
    return failures;
}
