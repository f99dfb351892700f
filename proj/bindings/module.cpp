// Python bindings for the main operations: constraint checking, feasible
// intervals, the parameter table, simulation runs, trace checking, and the
// uniform-threshold counterexample. Structured results cross as plain dicts
// and JSON strings so the python side stays dependency-free.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "abcc/checker.hpp"
#include "abcc/counterexample.hpp"
#include "abcc/params.hpp"
#include "abcc/scenario.hpp"
#include "abcc/trace_io.hpp"

namespace py = pybind11;
using namespace abcc;

namespace {

Params params_from_kwargs(double alpha, int f, int ns_min, py::object gamma, py::object beta, double d) {
    Params p;
    p.alpha = alpha;
    p.f = f;
    p.ns_min = ns_min;
    if (!gamma.is_none()) p.gamma = gamma.cast<double>();
    if (!beta.is_none()) p.beta = beta.cast<double>();
    p.d = d;
    return p;
}

py::dict check_to_dict(const ConstraintCheck& c) {
    py::dict d;
    d["index"] = c.index;
    d["satisfied"] = c.satisfied;
    d["lhs"] = c.lhs;
    d["rhs"] = c.rhs;
    d["slack"] = c.slack;
    d["strict"] = c.strict;
    d["interval"] = c.interval_mode;
    d["domain_error"] = c.domain_error;
    return d;
}

py::dict report_to_dict(const ConstraintReport& r) {
    py::list per;
    for (const auto& c : r.per_constraint) per.append(check_to_dict(c));
    py::dict d;
    d["per_constraint"] = per;
    d["feasible"] = r.feasible;
    d["alt7"] = check_to_dict(r.alt7);
    return d;
}

py::dict verdict_to_dict(const TraceVerdict& v) {
    py::dict d;
    d["linearizable"] = v.lin.linearizable;
    d["violation"] = v.lin.violation;
    d["liveness_ok"] = v.liveness.ok;
    d["audits_ok"] = v.audits.ok;
    d["max_join_latency"] = v.liveness.max_join_latency;
    d["max_op_latency"] = v.liveness.max_op_latency;
    d["exit_code"] = v.exit_code();
    py::list audits;
    for (const auto& a : v.audits.violations) {
        py::dict e;
        e["rule"] = a.rule;
        e["window_start"] = a.window_start;
        e["detail"] = a.detail;
        audits.append(e);
    }
    d["audit_violations"] = audits;
    return d;
}

}  // namespace

PYBIND11_MODULE(_abcc, m) {
    m.doc() = "Byzantine-tolerant atomic register under churn: parameter constraints, "
              "deterministic simulation and trace checking";

    m.def(
        "check_params",
        [](double alpha, int f, int ns_min, py::object gamma, py::object beta, double d) {
            return report_to_dict(check_constraints(params_from_kwargs(alpha, f, ns_min, gamma, beta, d)));
        },
        py::arg("alpha"), py::arg("f"), py::arg("ns_min"), py::arg("gamma") = py::none(),
        py::arg("beta") = py::none(), py::arg("d") = 1.0);

    m.def(
        "feasible_interval",
        [](double alpha, int f, int ns_min) {
            Params p;
            p.alpha = alpha;
            p.f = f;
            p.ns_min = ns_min;
            FeasibleIntervals fi = feasible_interval(p);
            py::dict d;
            d["gamma"] = fi.gamma.empty ? py::object(py::none())
                                        : py::object(py::make_tuple(fi.gamma.lo, fi.gamma.hi));
            d["beta"] = fi.beta.empty ? py::object(py::none())
                                      : py::object(py::make_tuple(fi.beta.lo, fi.beta.hi));
            return d;
        },
        py::arg("alpha"), py::arg("f"), py::arg("ns_min"));

    m.def(
        "min_ns_min",
        [](double alpha, int f, int cap) -> py::object {
            auto r = min_ns_min(alpha, f, cap);
            if (!r) return py::none();
            return py::int_(*r);
        },
        py::arg("alpha"), py::arg("f"), py::arg("cap") = 1000000);

    m.def("table_report", [] {
        py::list rows;
        for (const auto& rr : audit_parameter_table()) {
            py::dict d;
            d["f"] = rr.row.f;
            d["ns_min"] = rr.row.ns_min;
            d["alpha"] = rr.row.alpha;
            d["gamma"] = rr.row.gamma ? py::object(py::float_(*rr.row.gamma)) : py::object(py::none());
            d["beta"] = rr.row.beta;
            d["report"] = report_to_dict(rr.report);
            d["region_nonempty"] = rr.region_nonempty;
            d["worst_slack"] = rr.worst_slack;
            rows.append(d);
        }
        return rows;
    });

    m.def("strategy_names", [] {
        py::list out;
        for (const auto& s : strategy_catalog()) out.append(std::string(s.name));
        return out;
    });

    m.def(
        "simulate",
        [](const std::string& scenario_json, py::object seed) {
            Scenario s = scenario_from_json(scenario_json);
            if (!seed.is_none()) s.sim.seed = seed.cast<uint64_t>();
            Trace t = run_simulation(s.sim);
            return trace_to_jsonl(t);
        },
        py::arg("scenario_json"), py::arg("seed") = py::none(),
        "run one simulation of the scenario, returning the JSONL trace");

    m.def(
        "check_trace",
        [](const std::string& trace_jsonl) { return verdict_to_dict(check_trace(trace_from_jsonl(trace_jsonl))); },
        py::arg("trace_jsonl"));

    m.def(
        "run_scenario",
        [](const std::string& scenario_json) {
            BatchReport rep = run_scenario(scenario_from_json(scenario_json));
            py::dict d;
            d["scenario"] = rep.scenario;
            d["ok"] = rep.ok;
            d["passed"] = rep.passed();
            py::list runs;
            for (const auto& r : rep.runs) {
                py::dict e;
                e["seed"] = r.seed;
                e["linearizable"] = r.linearizable;
                e["liveness_ok"] = r.liveness_ok;
                e["audits_ok"] = r.audits_ok;
                e["completed_ops"] = r.completed_ops;
                e["max_join_latency_d"] = r.max_join_latency_d;
                e["max_op_latency_d"] = r.max_op_latency_d;
                e["violation"] = r.first_violation;
                runs.append(e);
            }
            d["runs"] = runs;
            return d;
        },
        py::arg("scenario_json"));

    m.def("counterexample_uniform", [] {
        CounterexampleReport rep = run_uniform_counterexample();
        auto leg = [](const CounterexampleLeg& l) {
            py::dict d;
            d["name"] = l.name;
            d["linearizable"] = l.linearizable;
            d["violation"] = l.violation;
            d["read_returned"] = l.read_returned;
            d["latest_written"] = l.latest_written;
            return d;
        };
        py::dict d;
        d["uniform"] = leg(rep.uniform);
        d["control"] = leg(rep.control);
        d["uniform_no_adversary"] = leg(rep.uniform_clean);
        d["demonstrated"] = rep.demonstrated();
        return d;
    });
}
