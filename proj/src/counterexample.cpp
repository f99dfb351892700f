#include "abcc/counterexample.hpp"

#include <sstream>

#include "abcc/simnet.hpp"

namespace abcc {

namespace {

// Shared schedule skeleton: ten servers, one resident writer, one reader
// entering after two writes have completed. Corrupt servers answer almost
// instantly with a write history frozen after the first write; honest
// servers answer with the full delay D. No churn, constant horizon.
SimConfig base_config() {
    SimConfig cfg;
    cfg.params.alpha = 0.0;
    cfg.params.f = 1;
    cfg.params.ns_min = 10;
    cfg.params.gamma = 0.82;
    cfg.params.beta = 0.84;
    cfg.params.d = 1.0;
    cfg.initial_servers = 10;
    cfg.initial_clients = 1;
    cfg.duration = 60.0;
    cfg.workload.total_ops = 3;  // write v, write v', then the steered read
    cfg.workload.read_fraction = 0.0;
    cfg.workload.gap = 0.3;
    cfg.workload.client_entrants = 1;
    cfg.workload.max_ops_per_client = 2;   // the resident writer stops after two writes
    cfg.workload.entrants_read_only = true;
    cfg.workload.entrant_delay = 20.0;     // both writes are long since completed
    cfg.delay.kind = DelayKind::AdversarialFast;
    cfg.delay.fast_fraction = 0.01;
    cfg.adversary.strategy = StrategyKind::StaleReplay;
    cfg.adversary.stale_freeze_num = 1;  // advertise nothing newer than the first write
    cfg.seed = 7;
    return cfg;
}

CounterexampleLeg run_leg(std::string name, SimConfig cfg) {
    CounterexampleLeg leg;
    leg.name = std::move(name);
    Trace trace = run_simulation(cfg);
    History h = history_from_trace(trace);
    LinVerdict v = check_linearizable_witness(h);
    leg.linearizable = v.linearizable;
    leg.violation = v.violation;

    const OpRecord* read = nullptr;
    const OpRecord* last_write = nullptr;
    for (const OpRecord& op : trace.ops) {
        if (!op.is_write && op.response_t) read = &op;
        if (op.is_write && op.response_t && (!read || *op.response_t < read->invoke_t))
            if (!last_write || *op.response_t > *last_write->response_t) last_write = &op;
    }
    if (read) leg.read_returned = read->returned.is_bottom() ? "(bottom)" : read->returned.bytes;
    if (last_write) leg.latest_written = last_write->written.bytes;
    return leg;
}

}  // namespace

CounterexampleReport run_uniform_counterexample() {
    CounterexampleReport rep;

    // The resident client performs the two writes; the entrant joins long
    // after both completed and issues the steered read.
    auto steered = [](bool uniform, int corrupt) {
        SimConfig cfg = base_config();
        cfg.uniform_client_variant = uniform;
        cfg.adversary.corrupt_count = corrupt;
        if (corrupt == 0) cfg.adversary.strategy = StrategyKind::None;
        // Three corrupt servers overwhelm a fixed reply threshold while the
        // declared bound stays f=1; that mismatch is the whole point.
        cfg.unchecked_adversary = corrupt > cfg.params.f;
        return cfg;
    };

    rep.uniform = run_leg("uniform-client", steered(true, 3));
    rep.control = run_leg("standard-client", steered(false, 1));
    rep.uniform_clean = run_leg("uniform-client-no-adversary", steered(true, 0));
    return rep;
}

std::string format_counterexample_text(const CounterexampleReport& r) {
    std::ostringstream os;
    auto leg = [&](const CounterexampleLeg& l) {
        os << l.name << ": " << (l.linearizable ? "linearizable" : "NOT linearizable");
        if (!l.read_returned.empty()) os << "; steered read returned " << l.read_returned;
        if (!l.latest_written.empty()) os << " (latest completed write " << l.latest_written << ")";
        if (!l.violation.empty()) os << "; " << l.violation;
        os << "\n";
    };
    leg(r.uniform);
    leg(r.control);
    leg(r.uniform_clean);
    os << (r.demonstrated() ? "counterexample demonstrated\n" : "COUNTEREXAMPLE FAILED TO MANIFEST\n");
    return os.str();
}

}  // namespace abcc
