// Evaluation and exploration of the system/algorithm parameter constraints:
// churn rate alpha, failure bound f, minimum system size NS_min, the join
// fraction gamma and the read/write fraction beta, against the seven
// inequalities the protocol's correctness argument relies on.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace abcc {

struct Params {
    double alpha = 0.0;            // churn rate per interval of length d
    int f = 1;                     // max Byzantine servers
    int ns_min = 1;                // minimum server count
    std::optional<double> gamma;   // join-bound fraction, unset when not applicable
    std::optional<double> beta;    // read/write-bound fraction
    double d = 1.0;                // max message delay, simulation time units

    // Field-level invariants, independent of the seven constraints.
    void validate_fields() const;
};

// One evaluated inequality. lhs/rhs are the two sides as written; slack
// is rhs-lhs for "<="-form rows and lhs-rhs for ">="/">"-form rows, so
// satisfied means slack >= 0 (strictly > 0 where the relation is strict).
struct ConstraintCheck {
    int index = 0;          // 1..7
    bool satisfied = false;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool strict = false;        // relation is a strict inequality
    bool domain_error = false;  // denominator <= 0; reported, never a crash
    // For constraints 3..7 when gamma/beta are unset: the row records the
    // induced bound interval instead of a point evaluation.
    bool interval_mode = false;
};

struct ConstraintReport {
    std::array<ConstraintCheck, 7> per_constraint{};
    bool feasible = false;
    // Constraint 7 also evaluated without the +1 numerator term. Several
    // reference table rows satisfy only that reading, so both are reported;
    // neither is substituted for the other.
    ConstraintCheck alt7{};
};

// Closed-form bounds induced by constraints (3)-(7) for fixed alpha, f, ns.
struct DerivedBounds {
    double gamma_lo = 0.0;  // (3), inclusive
    double gamma_hi = 0.0;  // (4), inclusive
    double beta_hi = 0.0;   // (5), inclusive
    double beta_lo6 = 0.0;  // (6), exclusive
    double beta_lo7 = 0.0;  // (7), exclusive
    bool beta_lo6_domain_error = false;
    bool beta_lo7_domain_error = false;

    double beta_lo() const { return beta_lo6 > beta_lo7 ? beta_lo6 : beta_lo7; }
    bool gamma_nonempty() const { return gamma_lo <= gamma_hi; }
    bool beta_nonempty() const {
        return !beta_lo6_domain_error && !beta_lo7_domain_error && beta_lo() < beta_hi;
    }
};

DerivedBounds derived_bounds(double alpha, int f, int ns_min);

// Evaluates the seven inequalities exactly as written, in 64-bit floating
// point. When gamma (constraints 3-4) or beta (5-7) is unset, the affected
// rows report whether the induced interval is nonempty instead.
ConstraintReport check_constraints(const Params& p);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_exclusive = false;
    bool empty = true;
};

struct FeasibleIntervals {
    Interval gamma;  // [lo, hi] from (3)-(4)
    Interval beta;   // (lo, hi] from (5)-(7)
};

// Admissible gamma and beta intervals for fixed alpha, f, ns_min.
// Precondition: constraints (1) and (2) hold; throws otherwise.
FeasibleIntervals feasible_interval(const Params& p);

// Smallest ns_min for which constraints (2)-(7) admit a nonempty
// (gamma, beta) region; nullopt if none up to `cap`. Feasibility is
// monotone in ns_min, so a linear scan finds the true minimum.
std::optional<int> min_ns_min(double alpha, int f, int cap = 1'000'000);

// The reference parameter table this module reproduces and audits.
struct TableRow {
    int f;
    int ns_min;
    double alpha;
    std::optional<double> gamma;
    double beta;
};

const std::vector<TableRow>& parameter_table();

struct TableRowReport {
    TableRow row;
    ConstraintReport report;
    bool region_nonempty = false;  // does (f, ns_min, alpha) admit any (gamma, beta)?
    double worst_slack = 0.0;      // most negative slack among unsatisfied rows, 0 if none
};

std::vector<TableRowReport> audit_parameter_table();

// Rendering for the CLI.
std::string format_report_text(const Params& p, const ConstraintReport& r);
std::string format_table_text(const std::vector<TableRowReport>& rows);

}  // namespace abcc
