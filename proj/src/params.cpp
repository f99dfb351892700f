#include "abcc/params.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace abcc {

void Params::validate_fields() const {
    if (!(alpha >= 0.0)) throw std::runtime_error("alpha must be >= 0");
    if (f < 1) throw std::runtime_error("f must be >= 1");
    if (ns_min < 1) throw std::runtime_error("ns_min must be >= 1");
    if (gamma && !(*gamma > 0.0 && *gamma <= 1.0)) throw std::runtime_error("gamma must be in (0,1]");
    if (beta && !(*beta > 0.0 && *beta <= 1.0)) throw std::runtime_error("beta must be in (0,1]");
    if (!(d > 0.0)) throw std::runtime_error("d must be > 0");
}

DerivedBounds derived_bounds(double a, int f, int ns) {
    DerivedBounds b;
    const double om = 1.0 - a;  // 1 - alpha
    const double op = 1.0 + a;  // 1 + alpha
    const double om3 = om * om * om;
    const double op3 = op * op * op;
    const double op2 = op * op;
    b.gamma_lo = (1.0 + 2.0 * f) / (om3 * ns) + op3 / om3 - 1.0;
    b.gamma_hi = om3 / op3 - f / (op3 * ns);
    b.beta_hi = om3 / op2 - f / (op2 * ns);

    const double den6 = om * om * om * om - static_cast<double>(f) / ns;
    if (den6 <= 0.0) {
        b.beta_lo6_domain_error = true;
    } else {
        b.beta_lo6 = (op * op * op * op * op - 1.0 + 2.0 * f / static_cast<double>(ns)) / den6;
    }

    const double den7 = (2.0 + 2.0 * a + a * a) * om * om / op2 - 2.0 * f / static_cast<double>(ns);
    if (den7 <= 0.0) {
        b.beta_lo7_domain_error = true;
    } else {
        b.beta_lo7 = (op3 - om3 + 1.0 + (1.0 + 3.0 * f) / static_cast<double>(ns)) / den7;
    }
    return b;
}

namespace {

// Constraint 7 with the alternative numerator that omits the +1 term.
double beta_lo7_alt(double a, int f, int ns, bool& domain_error) {
    const double om = 1.0 - a;
    const double op = 1.0 + a;
    const double den = (2.0 + 2.0 * a + a * a) * om * om / (op * op) - 2.0 * f / static_cast<double>(ns);
    if (den <= 0.0) {
        domain_error = true;
        return 0.0;
    }
    domain_error = false;
    return (op * op * op - om * om * om + (1.0 + 3.0 * f) / static_cast<double>(ns)) / den;
}

ConstraintCheck le_check(int idx, double lhs, double rhs) {
    ConstraintCheck c;
    c.index = idx;
    c.lhs = lhs;
    c.rhs = rhs;
    c.slack = rhs - lhs;
    c.satisfied = c.slack >= 0.0;
    return c;
}

ConstraintCheck ge_check(int idx, double lhs, double rhs) {
    ConstraintCheck c;
    c.index = idx;
    c.lhs = lhs;
    c.rhs = rhs;
    c.slack = lhs - rhs;
    c.satisfied = c.slack >= 0.0;
    return c;
}

ConstraintCheck gt_check(int idx, double lhs, double rhs, bool domain_error) {
    ConstraintCheck c;
    c.index = idx;
    c.lhs = lhs;
    c.rhs = rhs;
    c.strict = true;
    c.domain_error = domain_error;
    c.slack = lhs - rhs;
    c.satisfied = !domain_error && c.slack > 0.0;
    return c;
}

// When the parameter a constraint bounds is unset, report the induced
// interval and whether it is nonempty instead of a point evaluation.
ConstraintCheck interval_check(int idx, double lo, double hi, bool nonempty) {
    ConstraintCheck c;
    c.index = idx;
    c.lhs = lo;
    c.rhs = hi;
    c.slack = hi - lo;
    c.satisfied = nonempty;
    c.interval_mode = true;
    return c;
}

}  // namespace

ConstraintReport check_constraints(const Params& p) {
    p.validate_fields();
    ConstraintReport r;
    const double a = p.alpha;
    const double om3 = (1.0 - a) * (1.0 - a) * (1.0 - a);
    const DerivedBounds b = derived_bounds(a, p.f, p.ns_min);

    r.per_constraint[0] = le_check(1, a, 1.0 - std::pow(2.0, -0.25));
    r.per_constraint[1] = le_check(2, 1.0, om3 * p.ns_min - 2.0 * p.f);

    if (p.gamma) {
        r.per_constraint[2] = ge_check(3, *p.gamma, b.gamma_lo);
        r.per_constraint[3] = le_check(4, *p.gamma, b.gamma_hi);
    } else {
        r.per_constraint[2] = interval_check(3, b.gamma_lo, b.gamma_hi, b.gamma_nonempty());
        r.per_constraint[3] = interval_check(4, b.gamma_lo, b.gamma_hi, b.gamma_nonempty());
    }

    if (p.beta) {
        r.per_constraint[4] = le_check(5, *p.beta, b.beta_hi);
        r.per_constraint[5] = gt_check(6, *p.beta, b.beta_lo6, b.beta_lo6_domain_error);
        r.per_constraint[6] = gt_check(7, *p.beta, b.beta_lo7, b.beta_lo7_domain_error);
        bool alt_err = false;
        double alt = beta_lo7_alt(a, p.f, p.ns_min, alt_err);
        r.alt7 = gt_check(7, *p.beta, alt, alt_err);
    } else {
        bool nonempty = b.beta_nonempty();
        r.per_constraint[4] = interval_check(5, b.beta_lo(), b.beta_hi, nonempty);
        r.per_constraint[5] = interval_check(6, b.beta_lo6, b.beta_hi, nonempty);
        r.per_constraint[6] = interval_check(7, b.beta_lo7, b.beta_hi, nonempty);
        bool alt_err = false;
        double alt = beta_lo7_alt(a, p.f, p.ns_min, alt_err);
        r.alt7 = interval_check(7, alt, b.beta_hi, !alt_err && alt < b.beta_hi);
    }

    r.feasible = true;
    for (const auto& c : r.per_constraint) r.feasible = r.feasible && c.satisfied;
    return r;
}

FeasibleIntervals feasible_interval(const Params& p) {
    Params q = p;
    q.gamma.reset();
    q.beta.reset();
    q.validate_fields();
    ConstraintReport head = check_constraints(q);
    if (!head.per_constraint[0].satisfied || !head.per_constraint[1].satisfied)
        throw std::runtime_error("feasible_interval: constraints (1)-(2) do not hold");

    DerivedBounds b = derived_bounds(p.alpha, p.f, p.ns_min);
    FeasibleIntervals out;
    out.gamma.lo = b.gamma_lo;
    out.gamma.hi = b.gamma_hi;
    out.gamma.empty = !b.gamma_nonempty();
    out.beta.lo = b.beta_lo();
    out.beta.hi = b.beta_hi;
    out.beta.lo_exclusive = true;
    out.beta.empty = !b.beta_nonempty();
    return out;
}

std::optional<int> min_ns_min(double alpha, int f, int cap) {
    Params probe;
    probe.alpha = alpha;
    probe.f = f;
    probe.ns_min = 1;
    probe.validate_fields();
    if (!(alpha <= 1.0 - std::pow(2.0, -0.25)))
        throw std::runtime_error("min_ns_min: alpha violates constraint (1)");

    const double om3 = (1.0 - alpha) * (1.0 - alpha) * (1.0 - alpha);
    for (int ns = std::max(1, f + 1); ns <= cap; ++ns) {
        if (om3 * ns - 2.0 * f < 1.0) continue;  // constraint (2)
        DerivedBounds b = derived_bounds(alpha, f, ns);
        if (b.gamma_nonempty() && b.beta_nonempty()) return ns;
    }
    return std::nullopt;
}

const std::vector<TableRow>& parameter_table() {
    static const std::vector<TableRow> table = {
        {1, 8, 0.0, std::nullopt, 0.86},
        {1, 10, 0.01, 0.82, 0.84},
        {1, 13, 0.02, 0.79, 0.80},
        {1, 190, 0.05, 0.79, 0.80},
        {2, 19, 0.01, 0.80, 0.83},
        {2, 24, 0.02, 0.81, 0.82},
        {2, 347, 0.05, 0.70, 0.77},
        {5, 44, 0.01, 0.80, 0.83},
        {5, 57, 0.02, 0.79, 0.82},
        {5, 826, 0.05, 0.79, 0.82},
        {10, 85, 0.01, 0.80, 0.83},
        {10, 113, 0.02, 0.79, 0.82},
        {10, 1630, 0.05, 0.79, 0.82},
        {100, 838, 0.01, 0.79, 0.82},
        {100, 1107, 0.02, 0.79, 0.82},
        {100, 16015, 0.05, 0.79, 0.82},
        {1000, 8360, 0.01, 0.79, 0.82},
        {1000, 11042, 0.02, 0.79, 0.82},
        {1000, 159935, 0.05, 0.79, 0.82},
    };
    return table;
}

std::vector<TableRowReport> audit_parameter_table() {
    std::vector<TableRowReport> out;
    for (const TableRow& row : parameter_table()) {
        TableRowReport rr;
        rr.row = row;
        Params p;
        p.alpha = row.alpha;
        p.f = row.f;
        p.ns_min = row.ns_min;
        p.gamma = row.gamma;
        p.beta = row.beta;
        rr.report = check_constraints(p);
        DerivedBounds b = derived_bounds(row.alpha, row.f, row.ns_min);
        rr.region_nonempty = b.gamma_nonempty() && b.beta_nonempty();
        for (const auto& c : rr.report.per_constraint)
            if (!c.satisfied && c.slack < rr.worst_slack) rr.worst_slack = c.slack;
        out.push_back(rr);
    }
    return out;
}

std::string format_report_text(const Params& p, const ConstraintReport& r) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "alpha=%g f=%d ns_min=%d gamma=%s beta=%s\n", p.alpha, p.f, p.ns_min,
                  p.gamma ? std::to_string(*p.gamma).c_str() : "unset",
                  p.beta ? std::to_string(*p.beta).c_str() : "unset");
    os << buf;
    for (const auto& c : r.per_constraint) {
        if (c.interval_mode) {
            std::snprintf(buf, sizeof buf, "  (%d) %-5s induced interval [%.6f, %.6f] %s\n", c.index,
                          c.satisfied ? "ok" : "FAIL", c.lhs, c.rhs, c.satisfied ? "nonempty" : "EMPTY");
        } else if (c.domain_error) {
            std::snprintf(buf, sizeof buf, "  (%d) FAIL  domain error (denominator <= 0)\n", c.index);
        } else {
            std::snprintf(buf, sizeof buf, "  (%d) %-5s lhs=%.6f rhs=%.6f slack=%+.6f%s\n", c.index,
                          c.satisfied ? "ok" : "FAIL", c.lhs, c.rhs, c.slack, c.strict ? " (strict)" : "");
        }
        os << buf;
    }
    if (!r.alt7.interval_mode) {
        std::snprintf(buf, sizeof buf, "  (7') %-4s lhs=%.6f rhs=%.6f slack=%+.6f (variant without +1)\n",
                      r.alt7.satisfied ? "ok" : "FAIL", r.alt7.lhs, r.alt7.rhs, r.alt7.slack);
        os << buf;
    }
    os << (r.feasible ? "feasible\n" : "infeasible\n");
    return os.str();
}

std::string format_table_text(const std::vector<TableRowReport>& rows) {
    std::ostringstream os;
    os << "   f   ns_min  alpha  gamma   beta  verdict    worst-slack  (7)standard   (7)variant  region\n";
    char buf[256];
    for (const auto& rr : rows) {
        std::string g = rr.row.gamma ? [&] {
            char t[32];
            std::snprintf(t, sizeof t, "%.2f", *rr.row.gamma);
            return std::string(t);
        }() : std::string("N/A");
        std::string fails;
        for (const auto& c : rr.report.per_constraint)
            if (!c.satisfied) fails += "(" + std::to_string(c.index) + ")";
        std::snprintf(buf, sizeof buf, "%4d %8d  %5.2f  %5s  %5.2f  %-11s %+.4f      %-6s         %-6s      %s\n",
                      rr.row.f, rr.row.ns_min, rr.row.alpha, g.c_str(), rr.row.beta,
                      rr.report.feasible ? "feasible" : ("fails" + fails).c_str(), rr.worst_slack,
                      rr.report.per_constraint[6].satisfied ? "ok" : "FAIL",
                      rr.report.alt7.satisfied ? "ok" : "FAIL", rr.region_nonempty ? "nonempty" : "empty");
        os << buf;
    }
    return os.str();
}

}  // namespace abcc
