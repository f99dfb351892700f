#include "abcc/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "abcc/trace_io.hpp"

namespace abcc {

using nlohmann::json;

namespace {

DelayModel delay_from_json(const json& j) {
    DelayModel d;
    std::string kind = j.value("kind", "uniform");
    if (kind == "uniform")
        d.kind = DelayKind::Uniform;
    else if (kind == "constant")
        d.kind = DelayKind::Constant;
    else if (kind == "bimodal")
        d.kind = DelayKind::Bimodal;
    else if (kind == "adversarial-fast")
        d.kind = DelayKind::AdversarialFast;
    else
        throw std::runtime_error("unknown delay kind: " + kind);
    d.min_fraction = j.value("min_fraction", 1e-6);
    d.fast_fraction = j.value("fast_fraction", 0.1);
    d.fast_prob = j.value("fast_prob", 0.5);
    return d;
}

ChurnConfig churn_from_json(const json& j) {
    ChurnConfig c;
    std::string pattern = j.value("pattern", "none");
    if (pattern == "none")
        c.pattern = ChurnPattern::None;
    else if (pattern == "target-rate")
        c.pattern = ChurnPattern::TargetRate;
    else if (pattern == "scripted")
        c.pattern = ChurnPattern::Scripted;
    else
        throw std::runtime_error("unknown churn pattern: " + pattern);
    c.rate_fraction = j.value("rate_fraction", 1.0);
    c.enforce_a5 = j.value("enforce_a5", true);
    if (j.contains("events"))
        for (const auto& e : j.at("events"))
            c.scripted.push_back({e.at("t").get<double>(), e.at("kind").get<std::string>() == "enter"});
    return c;
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
    json j = json::parse(text);
    Scenario s;
    s.name = j.value("name", "unnamed");
    const json& p = j.at("params");
    s.sim.params.alpha = p.at("alpha").get<double>();
    s.sim.params.f = p.at("f").get<int>();
    s.sim.params.ns_min = p.at("ns_min").get<int>();
    if (p.contains("gamma") && !p.at("gamma").is_null()) s.sim.params.gamma = p.at("gamma").get<double>();
    if (p.contains("beta") && !p.at("beta").is_null()) s.sim.params.beta = p.at("beta").get<double>();
    s.sim.params.d = p.value("d", 1.0);

    s.sim.initial_servers = j.value("initial_servers", 0);
    s.sim.initial_clients = j.value("initial_clients", 2);
    s.sim.duration = j.value("duration", 100.0);
    if (j.contains("churn")) s.sim.churn = churn_from_json(j.at("churn"));
    if (j.contains("workload")) {
        const json& w = j.at("workload");
        s.sim.workload.total_ops = w.value("ops", 20);
        s.sim.workload.read_fraction = w.value("read_fraction", 0.5);
        s.sim.workload.gap = w.value("gap", 0.25);
        s.sim.workload.client_entrants = w.value("client_entrants", 0);
        s.sim.workload.crash_clients = w.value("crash_clients", 0);
        s.sim.workload.max_ops_per_client = w.value("max_ops_per_client", 0);
        s.sim.workload.entrants_read_only = w.value("entrants_read_only", false);
        s.sim.workload.entrant_delay = w.value("entrant_delay", -1.0);
    }
    if (j.contains("adversary")) {
        const json& a = j.at("adversary");
        s.sim.adversary.strategy = strategy_by_name(a.value("strategy", "none"));
        s.sim.adversary.corrupt_count = a.value("corrupt", 0);
        s.sim.adversary.corrupt_num_inflation = a.value("num_inflation", 1000000);
        s.sim.adversary.stale_freeze_num = a.value("freeze_num", 0);
    }
    if (j.contains("delay")) s.sim.delay = delay_from_json(j.at("delay"));
    s.sim.seed = j.value("seed", 1ull);
    s.sim.override_feasibility = j.value("override_feasibility", false);
    s.sim.uniform_client_variant = j.value("uniform_client", false);
    // The uniform variant exists to show what goes wrong when thresholds
    // ignore the failure bound, so it may face more corruption than f.
    s.sim.unchecked_adversary = s.sim.uniform_client_variant;
    s.repeat = j.value("repeat", 1);

    std::string exp = j.value("expected", "pass");
    if (exp == "pass")
        s.expected = Expectation::Pass;
    else if (exp == "violation:a5")
        s.expected = Expectation::ViolationA5;
    else if (exp == "violation:atomicity")
        s.expected = Expectation::ViolationAtomicity;
    else
        throw std::runtime_error("unknown expectation: " + exp);

    if (s.expected != Expectation::Pass && s.sim.churn.enforce_a5 && !s.sim.override_feasibility &&
        !s.sim.uniform_client_variant)
        throw std::runtime_error(
            "violation scenarios must disable A5 enforcement, override feasibility, or select the "
            "uniform client variant");
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return scenario_from_json(ss.str());
}

BatchReport run_scenario(const Scenario& s, const std::optional<std::string>& trace_dir) {
    BatchReport rep;
    rep.scenario = s.name;
    rep.expected = s.expected;
    for (int i = 0; i < s.repeat; ++i) {
        SimConfig cfg = s.sim;
        cfg.seed = s.sim.seed + static_cast<uint64_t>(i);
        cfg.record_steps = trace_dir.has_value();  // steps only matter on disk
        Trace trace = run_simulation(cfg);
        TraceVerdict v = check_trace(trace);

        RunResult r;
        r.seed = cfg.seed;
        r.linearizable = v.lin.linearizable;
        r.liveness_ok = v.liveness.ok;
        r.audits_ok = v.audits.ok;
        for (const OpRecord& op : trace.ops)
            if (op.response_t) r.completed_ops++;
        r.max_join_latency_d = v.liveness.max_join_latency / cfg.params.d;
        r.max_op_latency_d = v.liveness.max_op_latency / cfg.params.d;
        if (!v.lin.linearizable)
            r.first_violation = "atomicity: " + v.lin.violation;
        else if (!v.liveness.ok)
            r.first_violation = "liveness: " + v.liveness.violations.front().what;
        else if (!v.audits.ok)
            r.first_violation = v.audits.violations.front().rule + ": " + v.audits.violations.front().detail;

        if (trace_dir) write_trace(trace, *trace_dir + "/" + s.name + "-" + std::to_string(cfg.seed) + ".jsonl");
        rep.runs.push_back(std::move(r));
    }

    rep.ok = true;
    for (const RunResult& r : rep.runs) {
        bool clean = r.linearizable && r.liveness_ok && r.audits_ok;
        switch (s.expected) {
            case Expectation::Pass:
                rep.ok = rep.ok && clean;
                break;
            case Expectation::ViolationA5:
                rep.ok = rep.ok && !r.audits_ok;
                break;
            case Expectation::ViolationAtomicity:
                rep.ok = rep.ok && !r.linearizable;
                break;
        }
    }
    return rep;
}

std::string format_batch_text(const BatchReport& r) {
    std::ostringstream os;
    int lin = 0, live = 0, aud = 0;
    double max_join = 0.0, max_op = 0.0;
    int ops = 0;
    for (const auto& run : r.runs) {
        lin += run.linearizable;
        live += run.liveness_ok;
        aud += run.audits_ok;
        max_join = std::max(max_join, run.max_join_latency_d);
        max_op = std::max(max_op, run.max_op_latency_d);
        ops += run.completed_ops;
    }
    os << "scenario " << r.scenario << ": " << r.runs.size() << " runs, " << lin << " linearizable, " << live
       << " liveness-clean, " << aud << " audit-clean, " << ops << " ops completed\n";
    char buf[128];
    std::snprintf(buf, sizeof buf, "max join latency %.3f D, max op latency %.3f D\n", max_join, max_op);
    os << buf;
    for (const auto& run : r.runs)
        if (!run.first_violation.empty())
            os << "  seed " << run.seed << ": " << run.first_violation << "\n";
    os << (r.ok ? "expectation met\n" : "EXPECTATION NOT MET\n");
    return os.str();
}

}  // namespace abcc
