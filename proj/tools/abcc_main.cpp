// Command-line entry points: parameter checking and table audits, seeded
// scenario batches, trace checking, and the uniform-threshold
// counterexample.
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "abcc/checker.hpp"
#include "abcc/counterexample.hpp"
#include "abcc/params.hpp"
#include "abcc/scenario.hpp"
#include "abcc/trace_io.hpp"

using nlohmann::json;
using namespace abcc;

namespace {

json check_json(const ConstraintCheck& c) {
    json j = {{"index", c.index},   {"satisfied", c.satisfied}, {"lhs", c.lhs},
              {"rhs", c.rhs},       {"slack", c.slack},         {"strict", c.strict},
              {"interval", c.interval_mode}};
    if (c.domain_error) j["domain_error"] = true;
    return j;
}

json report_json(const ConstraintReport& r) {
    json per = json::array();
    for (const auto& c : r.per_constraint) per.push_back(check_json(c));
    return {{"per_constraint", per}, {"feasible", r.feasible}, {"alt7", check_json(r.alt7)}};
}

Params params_from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open parameter file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    std::string text = ss.str();
    Params p;
    size_t i = text.find_first_not_of(" \t\r\n");
    if (i != std::string::npos && text[i] == '{') {
        json j = json::parse(text);
        p.alpha = j.at("alpha").get<double>();
        p.f = j.at("f").get<int>();
        p.ns_min = j.at("ns_min").get<int>();
        if (j.contains("gamma") && !j.at("gamma").is_null()) p.gamma = j.at("gamma").get<double>();
        if (j.contains("beta") && !j.at("beta").is_null()) p.beta = j.at("beta").get<double>();
        p.d = j.value("d", 1.0);
        return p;
    }
    // key=value lines
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        size_t h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key == "alpha") p.alpha = std::stod(value);
        else if (key == "f") p.f = std::stoi(value);
        else if (key == "ns_min") p.ns_min = std::stoi(value);
        else if (key == "gamma") { if (value != "unset" && value != "N/A") p.gamma = std::stod(value); }
        else if (key == "beta") { if (value != "unset" && value != "N/A") p.beta = std::stod(value); }
        else if (key == "d") p.d = std::stod(value);
        else throw std::runtime_error("unknown parameter key: " + key);
    }
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"register emulation under churn: parameter checks, simulation, trace checking"};
    app.require_subcommand(1);
    app.fallthrough();
    bool as_json = false;
    app.add_flag("--json", as_json, "machine-readable output");

    auto* params_cmd = app.add_subcommand("params", "parameter constraint tools");
    params_cmd->require_subcommand(1);
    std::string params_file;
    auto* params_check = params_cmd->add_subcommand("check", "evaluate the seven constraints on a parameter file");
    params_check->add_option("file", params_file, "key=value or JSON parameter file")->required();
    auto* params_table = params_cmd->add_subcommand("table", "audit the built-in parameter table");

    auto* sim_cmd = app.add_subcommand("sim", "simulation runner");
    sim_cmd->require_subcommand(1);
    auto* sim_run = sim_cmd->add_subcommand("run", "run a scenario file");
    std::string scenario_file, trace_dir;
    uint64_t seed_override = 0;
    double duration_override = 0.0;
    bool override_feasibility = false;
    sim_run->add_option("scenario", scenario_file, "scenario JSON file")->required();
    sim_run->add_option("--seed", seed_override, "override the base seed");
    sim_run->add_option("--duration", duration_override, "override the duration");
    sim_run->add_option("--trace-dir", trace_dir, "write one trace file per run into this directory");
    sim_run->add_flag("--override-feasibility", override_feasibility, "run even with infeasible parameters");

    auto* check_cmd = app.add_subcommand("check", "check a trace file");
    std::string trace_file;
    check_cmd->add_option("trace", trace_file, "JSONL trace file")->required();

    auto* counter_cmd = app.add_subcommand("counterexample", "impossibility demonstrations");
    counter_cmd->require_subcommand(1);
    auto* counter_uniform = counter_cmd->add_subcommand(
        "uniform", "steered stale read against a client with size-independent thresholds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (params_check->parsed()) {
            Params p = params_from_file(params_file);
            ConstraintReport r = check_constraints(p);
            if (as_json) {
                json j = report_json(r);
                if (!r.per_constraint[0].satisfied || !r.per_constraint[1].satisfied) {
                    std::cout << j.dump(2) << "\n";
                    return r.feasible ? 0 : 1;
                }
                FeasibleIntervals fi = feasible_interval(p);
                j["gamma_interval"] = fi.gamma.empty ? json(nullptr) : json::array({fi.gamma.lo, fi.gamma.hi});
                j["beta_interval"] = fi.beta.empty ? json(nullptr) : json::array({fi.beta.lo, fi.beta.hi});
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << format_report_text(p, r);
                if (r.per_constraint[0].satisfied && r.per_constraint[1].satisfied) {
                    FeasibleIntervals fi = feasible_interval(p);
                    char buf[160];
                    if (!fi.gamma.empty)
                        std::snprintf(buf, sizeof buf, "gamma interval [%.4f, %.4f]\n", fi.gamma.lo, fi.gamma.hi);
                    else
                        std::snprintf(buf, sizeof buf, "gamma interval empty\n");
                    std::cout << buf;
                    if (!fi.beta.empty)
                        std::snprintf(buf, sizeof buf, "beta interval (%.4f, %.4f]\n", fi.beta.lo, fi.beta.hi);
                    else
                        std::snprintf(buf, sizeof buf, "beta interval empty\n");
                    std::cout << buf;
                }
            }
            return r.feasible ? 0 : 1;
        }

        if (params_table->parsed()) {
            auto rows = audit_parameter_table();
            if (as_json) {
                json arr = json::array();
                for (const auto& rr : rows) {
                    json j = {{"f", rr.row.f},
                              {"ns_min", rr.row.ns_min},
                              {"alpha", rr.row.alpha},
                              {"gamma", rr.row.gamma ? json(*rr.row.gamma) : json(nullptr)},
                              {"beta", rr.row.beta},
                              {"report", report_json(rr.report)},
                              {"region_nonempty", rr.region_nonempty},
                              {"worst_slack", rr.worst_slack}};
                    arr.push_back(j);
                }
                std::cout << arr.dump(2) << "\n";
            } else {
                std::cout << format_table_text(rows);
            }
            return 0;
        }

        if (sim_run->parsed()) {
            Scenario s = load_scenario(scenario_file);
            if (seed_override) s.sim.seed = seed_override;
            if (duration_override > 0.0) s.sim.duration = duration_override;
            if (override_feasibility) s.sim.override_feasibility = true;
            BatchReport rep =
                run_scenario(s, trace_dir.empty() ? std::nullopt : std::optional<std::string>(trace_dir));
            if (as_json) {
                json runs = json::array();
                for (const auto& r : rep.runs)
                    runs.push_back({{"seed", r.seed},
                                    {"linearizable", r.linearizable},
                                    {"liveness_ok", r.liveness_ok},
                                    {"audits_ok", r.audits_ok},
                                    {"completed_ops", r.completed_ops},
                                    {"max_join_latency_d", r.max_join_latency_d},
                                    {"max_op_latency_d", r.max_op_latency_d},
                                    {"violation", r.first_violation}});
                std::cout << json({{"scenario", rep.scenario}, {"ok", rep.ok}, {"runs", runs}}).dump(2) << "\n";
            } else {
                std::cout << format_batch_text(rep);
            }
            return rep.ok ? 0 : 1;
        }

        if (check_cmd->parsed()) {
            Trace trace = read_trace(trace_file);
            TraceVerdict v = check_trace(trace);
            if (as_json) {
                json audits = json::array();
                for (const auto& a : v.audits.violations)
                    audits.push_back({{"rule", a.rule}, {"window_start", a.window_start}, {"detail", a.detail}});
                json lively = json::array();
                for (const auto& l : v.liveness.violations)
                    lively.push_back({{"what", l.what}, {"node", l.node.str()}, {"at", l.at}});
                json j = {{"linearizable", v.lin.linearizable},
                          {"violation", v.lin.violation},
                          {"liveness_ok", v.liveness.ok},
                          {"liveness_violations", lively},
                          {"audits_ok", v.audits.ok},
                          {"audit_violations", audits},
                          {"max_join_latency", v.liveness.max_join_latency},
                          {"max_op_latency", v.liveness.max_op_latency}};
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << (v.lin.linearizable ? "linearizable\n" : "NOT linearizable: " + v.lin.violation + "\n");
                std::cout << (v.liveness.ok ? "liveness ok\n"
                                            : "liveness violations: " + std::to_string(v.liveness.violations.size()) + "\n");
                std::cout << (v.audits.ok ? "model audits ok\n"
                                          : "audit violations: " + std::to_string(v.audits.violations.size()) + "\n");
            }
            return v.exit_code();
        }

        if (counter_uniform->parsed()) {
            CounterexampleReport rep = run_uniform_counterexample();
            if (as_json) {
                auto leg = [](const CounterexampleLeg& l) {
                    return json({{"name", l.name},
                                 {"linearizable", l.linearizable},
                                 {"violation", l.violation},
                                 {"read_returned", l.read_returned},
                                 {"latest_written", l.latest_written}});
                };
                std::cout << json({{"uniform", leg(rep.uniform)},
                                   {"control", leg(rep.control)},
                                   {"uniform_no_adversary", leg(rep.uniform_clean)},
                                   {"demonstrated", rep.demonstrated()}})
                                 .dump(2)
                          << "\n";
            } else {
                std::cout << format_counterexample_text(rep);
            }
            return rep.demonstrated() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
