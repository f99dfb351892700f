#include "abcc/checker.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace abcc {

namespace {
constexpr double kEps = 1e-9;
}

History history_from_trace(const Trace& trace) {
    History h;
    for (const OpRecord& op : trace.ops) {
        if (op.is_write) {
            // Completed writes always count; uncompleted ones only once the
            // update broadcast left the client.
            if (op.response_t || op.update_sent_t) h.ops.push_back(op);
        } else {
            if (op.response_t) h.ops.push_back(op);
        }
    }
    return h;
}

namespace {

// Real-time precedence scan over a candidate order: fails iff some op is
// placed after an op that it wholly precedes in real time.
bool respects_real_time(const std::vector<const OpRecord*>& order, std::string& why) {
    double max_invoke = -1.0;
    for (const OpRecord* op : order) {
        double resp = op->response_t ? *op->response_t : std::numeric_limits<double>::infinity();
        if (resp < max_invoke - 1e-12) {
            why = "op " + op->id + " responded before an earlier-placed op was invoked";
            return false;
        }
        max_invoke = std::max(max_invoke, op->invoke_t);
    }
    return true;
}

// Replays single-register semantics over the order.
bool replay_reads(const std::vector<const OpRecord*>& order, std::string& why) {
    Val current = Val::bottom();
    for (const OpRecord* op : order) {
        if (op->is_write) {
            current = op->written;
        } else if (op->returned != current) {
            why = "read " + op->id + " returned a value other than the latest preceding write";
            return false;
        }
    }
    return true;
}

std::vector<std::string> ids_of(const std::vector<const OpRecord*>& order) {
    std::vector<std::string> out;
    out.reserve(order.size());
    for (const OpRecord* op : order) out.push_back(op->id);
    return out;
}

struct TsKey {
    Timestamp ts;
    friend bool operator<(const TsKey& a, const TsKey& b) { return ts_less(a.ts, b.ts); }
};

}  // namespace

LinVerdict check_linearizable_witness(const History& h) {
    // Completed ops must carry their timestamp witness for the construction.
    for (const OpRecord& op : h.ops) {
        if (!op.ts_witness) return check_linearizable_search(h);
    }

    std::vector<const OpRecord*> writes, reads;
    for (const OpRecord& op : h.ops) (op.is_write ? writes : reads).push_back(&op);

    // An uncompleted write joins the candidate order exactly when some read
    // returned its value; unread pending writes are excluded.
    {
        std::set<TsKey> read_ts;
        for (const OpRecord* r : reads) read_ts.insert(TsKey{*r->ts_witness});
        std::vector<const OpRecord*> kept;
        for (const OpRecord* w : writes)
            if (w->response_t || read_ts.count(TsKey{*w->ts_witness})) kept.push_back(w);
        writes = std::move(kept);
    }

    LinVerdict v;
    std::map<TsKey, const OpRecord*> write_by_ts;
    for (const OpRecord* w : writes) {
        auto [it, fresh] = write_by_ts.emplace(TsKey{*w->ts_witness}, w);
        if (!fresh) {
            v.violation = "writes " + it->second->id + " and " + w->id + " share timestamp";
            return v;
        }
    }

    std::sort(reads.begin(), reads.end(),
              [](const OpRecord* a, const OpRecord* b) { return a->invoke_t < b->invoke_t; });

    // Slot lists: reads attached to the write they read from, bottom reads
    // up front, everything ordered by start time within a slot.
    std::vector<const OpRecord*> initial_reads;
    std::map<TsKey, std::vector<const OpRecord*>> reads_after;
    for (const OpRecord* r : reads) {
        if (r->ts_witness->num == 0 && r->ts_witness->w_id.is_bottom()) {
            if (!r->returned.is_bottom()) {
                v.violation = "read " + r->id + " has the initial timestamp but a non-initial value";
                return v;
            }
            initial_reads.push_back(r);
            continue;
        }
        auto it = write_by_ts.find(TsKey{*r->ts_witness});
        if (it == write_by_ts.end()) {
            v.violation = "read " + r->id + " returned a value no write produced";
            return v;
        }
        if (r->returned != it->second->written) {
            v.violation = "read " + r->id + " disagrees with the write carrying its timestamp";
            return v;
        }
        reads_after[TsKey{*r->ts_witness}].push_back(r);
    }

    std::vector<const OpRecord*> order;
    order.reserve(h.ops.size());
    for (const OpRecord* r : initial_reads) order.push_back(r);
    for (const auto& [ts, w] : write_by_ts) {
        order.push_back(w);
        auto it = reads_after.find(ts);
        if (it != reads_after.end())
            for (const OpRecord* r : it->second) order.push_back(r);
    }

    std::string why;
    if (!respects_real_time(order, why) || !replay_reads(order, why)) {
        v.violation = why;
        return v;
    }
    v.linearizable = true;
    v.witness = ids_of(order);
    return v;
}

namespace {

// DFS over real-time-consistent permutations with memoization on
// (placed-set, last write). Uncompleted writes may also be dropped.
class LinSearch {
  public:
    explicit LinSearch(const std::vector<const OpRecord*>& ops) : ops_(ops), n_(ops.size()) {}

    bool solve(std::vector<int>& order_out) {
        // Enumerate subsets of pending writes to include; everything else is
        // mandatory. Pending writes are rare, so this stays small.
        std::vector<int> pending;
        for (int i = 0; i < n_; ++i)
            if (ops_[i]->is_write && !ops_[i]->response_t) pending.push_back(i);
        uint32_t subsets = 1u << pending.size();
        for (uint32_t mask = 0; mask < subsets; ++mask) {
            included_.assign(n_, true);
            for (size_t j = 0; j < pending.size(); ++j)
                if (!(mask & (1u << j))) included_[pending[j]] = false;
            visited_.clear();
            order_.clear();
            if (dfs(0, -1)) {
                order_out = order_;
                return true;
            }
        }
        return false;
    }

  private:
    bool can_place(int i, uint64_t placed) const {
        // Every included op that finished before i was invoked must already
        // be placed.
        for (int j = 0; j < n_; ++j) {
            if (j == i || !included_[j] || (placed & (1ull << j))) continue;
            if (ops_[j]->response_t && *ops_[j]->response_t < ops_[i]->invoke_t - 1e-12) return false;
        }
        return true;
    }

    bool dfs(uint64_t placed, int last_write) {
        bool done = true;
        for (int i = 0; i < n_; ++i)
            if (included_[i] && !(placed & (1ull << i))) done = false;
        if (done) return true;
        uint64_t key = placed * 131ull + static_cast<uint64_t>(last_write + 1);
        if (!visited_.insert(key).second) return false;
        for (int i = 0; i < n_; ++i) {
            if (!included_[i] || (placed & (1ull << i))) continue;
            if (!can_place(i, placed)) continue;
            if (!ops_[i]->is_write) {
                const Val& current = last_write < 0 ? Val::bottom() : ops_[last_write]->written;
                if (ops_[i]->returned != current) continue;
            }
            order_.push_back(i);
            if (dfs(placed | (1ull << i), ops_[i]->is_write ? i : last_write)) return true;
            order_.pop_back();
        }
        return false;
    }

    const std::vector<const OpRecord*>& ops_;
    int n_;
    std::vector<bool> included_;
    std::vector<int> order_;
    std::unordered_set<uint64_t> visited_;
};

}  // namespace

LinVerdict check_linearizable_search(const History& h, int exhaustive_cap) {
    LinVerdict v;
    v.used_search = true;
    if (h.ops.size() > 62) {
        v.violation = "history too large for the search checker";
        return v;
    }
    (void)exhaustive_cap;  // the memoized DFS is exact at any supported size

    std::vector<const OpRecord*> ops;
    for (const OpRecord& op : h.ops) ops.push_back(&op);
    LinSearch search(ops);
    std::vector<int> order;
    if (search.solve(order)) {
        v.linearizable = true;
        for (int i : order) v.witness.push_back(ops[i]->id);
    } else {
        v.violation = "no valid linearization exists";
    }
    return v;
}

LivenessReport check_liveness(const Trace& trace) {
    LivenessReport rep;
    const double d = trace.header.params.d;
    const double horizon = trace.end_t;

    for (const auto& [id, life] : trace.lives) {
        if (!life.correct || life.initial) continue;
        double active_until = horizon;
        if (life.leave_t) active_until = std::min(active_until, *life.leave_t);
        if (life.crash_t) active_until = std::min(active_until, *life.crash_t);
        if (active_until - life.enter_t < 2.0 * d - kEps) continue;  // not active long enough
        rep.joins_audited++;
        if (!life.join_t) {
            rep.violations.push_back({"node never joined despite 2D of activity", id, life.enter_t});
        } else if (*life.join_t - life.enter_t > 2.0 * d + kEps) {
            rep.violations.push_back({"join latency exceeded 2D", id, *life.join_t});
        } else {
            rep.max_join_latency = std::max(rep.max_join_latency, *life.join_t - life.enter_t);
        }
    }

    for (const OpRecord& op : trace.ops) {
        auto it = trace.lives.find(op.client);
        if (it == trace.lives.end()) continue;
        const NodeLife& life = it->second;
        double active_until = horizon;
        if (life.leave_t) active_until = std::min(active_until, *life.leave_t);
        if (life.crash_t) active_until = std::min(active_until, *life.crash_t);
        if (op.response_t) {
            rep.ops_audited++;
            double latency = *op.response_t - op.invoke_t;
            rep.max_op_latency = std::max(rep.max_op_latency, latency);
            if (latency > 4.0 * d + kEps)
                rep.violations.push_back({"operation " + op.id + " exceeded 4D", op.client, op.invoke_t});
        } else {
            // Pending: a violation only if the client stayed active through
            // the full 4D window inside the trace horizon.
            if (active_until - op.invoke_t >= 4.0 * d - kEps) {
                rep.ops_audited++;
                rep.violations.push_back(
                    {"operation " + op.id + " never completed within 4D", op.client, op.invoke_t});
            }
        }
    }

    rep.ok = rep.violations.empty();
    return rep;
}

namespace {

struct ChurnEvents {
    std::vector<double> enters;  // sorted times of server enter events (churned, not S0)
    std::vector<double> leaves;
    std::vector<std::pair<double, int>> ns_steps;  // (time, delta)
};

int count_range(const std::vector<double>& xs, double lo, bool lo_closed, double hi, bool hi_closed) {
    auto lb = lo_closed ? std::lower_bound(xs.begin(), xs.end(), lo)
                        : std::upper_bound(xs.begin(), xs.end(), lo);
    auto ub = hi_closed ? std::upper_bound(xs.begin(), xs.end(), hi)
                        : std::lower_bound(xs.begin(), xs.end(), hi);
    return std::max<int>(0, static_cast<int>(ub - lb));
}

}  // namespace

AuditReport audit_model(const Trace& trace) {
    AuditReport rep;
    const double d = trace.header.params.d;
    const double alpha = trace.header.params.alpha;
    const int f = trace.header.params.f;
    const int ns_min = trace.header.params.ns_min;
    const double horizon = trace.end_t;

    ChurnEvents ev;
    int ns0 = 0;
    for (const auto& [id, life] : trace.lives) {
        if (!id.is_server()) continue;
        if (life.initial) {
            ns0++;
        } else {
            ev.enters.push_back(life.enter_t);
        }
        if (life.leave_t) ev.leaves.push_back(*life.leave_t);
    }
    std::sort(ev.enters.begin(), ev.enters.end());
    std::sort(ev.leaves.begin(), ev.leaves.end());

    std::vector<double> all_events = ev.enters;
    all_events.insert(all_events.end(), ev.leaves.begin(), ev.leaves.end());
    std::sort(all_events.begin(), all_events.end());

    auto ns_at = [&](double t) {
        return ns0 + count_range(ev.enters, 0.0, true, t, true) - count_range(ev.leaves, 0.0, true, t, true);
    };
    auto ns_just_before = [&](double t) {
        return ns0 + count_range(ev.enters, 0.0, true, t, false) - count_range(ev.leaves, 0.0, true, t, false);
    };

    // A1 at every event time (NS only changes there) and cross-check the
    // per-step ns the engine recorded.
    if (ns0 < ns_min)
        rep.violations.push_back({"A1", 0.0, "initial server count below ns_min"});
    for (double t : all_events) {
        if (ns_at(t) < ns_min)
            rep.violations.push_back({"A1", t, "NS(t) fell below ns_min"});
    }
    for (const TraceStep& s : trace.steps) {
        if (s.ns != ns_at(s.t)) {
            rep.violations.push_back({"A1", s.t, "recorded ns diverges from event-derived NS(t)"});
            break;
        }
    }

    // A5: for every critical window start t0, churn events in [t0, t0+d]
    // must not exceed alpha * NS(t0). Candidates: event times (window
    // closed on the left) and event times minus d, each also evaluated
    // "just before" to cover the open side.
    std::vector<double> starts{0.0};
    for (double t : all_events) {
        starts.push_back(t);
        if (t - d > 0.0) starts.push_back(t - d);
    }
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    for (double t0 : starts) {
        if (t0 + d > horizon + kEps) continue;
        rep.windows_checked++;
        int cnt = count_range(all_events, t0, true, t0 + d, true);
        if (cnt > alpha * ns_at(t0) + kEps) {
            rep.violations.push_back({"A5", t0, std::to_string(cnt) + " churn events in one window"});
        }
        if (t0 > 0.0) {
            int cntb = count_range(all_events, t0, true, t0 + d, false);
            if (cntb > alpha * ns_just_before(t0) + kEps)
                rep.violations.push_back({"A5", t0, "window just below start over budget"});
        }
    }

    // Interval bounds: enters in (t, t+Di] <= ((1+a)^i - 1) NS(t), leaves in
    // (t, t+Di] <= (1 - (1-a)^i) NS(t) for i <= -1/log2(1-a), and the
    // NS(t+Di) envelope. Each window start is also evaluated in its
    // just-below limit form, where the left end closes and NS drops to its
    // value before t0.
    int max_i_lemma2 = 0;
    if (alpha > 0.0 && alpha < 1.0) max_i_lemma2 = static_cast<int>(-1.0 / std::log2(1.0 - alpha));
    for (double t0 : starts) {
        for (int i = 1; t0 + d * i <= horizon + kEps; ++i) {
            double hi = t0 + d * i;
            int ns_t0 = ns_at(t0);
            int enters = count_range(ev.enters, t0, false, hi, true);
            double enter_bound = (std::pow(1.0 + alpha, i) - 1.0) * ns_t0;
            if (enters > enter_bound + kEps)
                rep.violations.push_back({"lemma1-enter", t0, std::to_string(enters) + " enters in " +
                                                                  std::to_string(i) + " windows"});
            double ns_hi = ns_at(hi);
            if (ns_hi > std::pow(1.0 + alpha, i) * ns_t0 + kEps ||
                ns_hi < std::pow(1.0 - alpha, i) * ns_t0 - kEps)
                rep.violations.push_back({"lemma1-size", t0, "NS(t+Di) outside the (1±a)^i envelope"});
            if (alpha > 0.0 && i <= max_i_lemma2) {
                int leaves = count_range(ev.leaves, t0, false, hi, true);
                double leave_bound = (1.0 - std::pow(1.0 - alpha, i)) * ns_t0;
                if (leaves > leave_bound + kEps)
                    rep.violations.push_back({"lemma2", t0, std::to_string(leaves) + " leaves in " +
                                                                std::to_string(i) + " windows"});
            }
            if (t0 > 0.0) {
                int ns_b = ns_just_before(t0);
                int enters_b = count_range(ev.enters, t0, true, hi, false);
                if (enters_b > (std::pow(1.0 + alpha, i) - 1.0) * ns_b + kEps)
                    rep.violations.push_back({"lemma1-enter", t0, "limit window over the enter bound"});
                if (alpha > 0.0 && i <= max_i_lemma2) {
                    int leaves_b = count_range(ev.leaves, t0, true, hi, false);
                    if (leaves_b > (1.0 - std::pow(1.0 - alpha, i)) * ns_b + kEps)
                        rep.violations.push_back({"lemma2", t0, "limit window over the leave bound"});
                }
            }
            if (alpha == 0.0 && (enters > 0 || !ev.leaves.empty()))
                break;  // no churn allowed at all; one failed window says it all
        }
    }

    // f+1 correct servers active throughout [max(0, t-2D), t+D], for every
    // critical t in (0, horizon - d]. Coverage changes when the window ends
    // cross enter/leave times, so those crossings (and their just-below
    // limits) are the candidates.
    std::vector<double> crit{kEps};
    for (double t : all_events) {
        crit.push_back(t);
        crit.push_back(t + 2.0 * d);
        if (t - d > 0.0) crit.push_back(t - d);
    }
    std::sort(crit.begin(), crit.end());
    crit.erase(std::unique(crit.begin(), crit.end()), crit.end());
    auto covered = [&](double lo, double hi, bool lo_strict) {
        int count = 0;
        for (const auto& [id, life] : trace.lives) {
            if (!id.is_server() || !life.correct) continue;
            bool in_at_lo = lo_strict ? life.enter_t < lo : life.enter_t <= lo;
            bool in_at_hi = !life.leave_t || (lo_strict ? *life.leave_t >= hi : *life.leave_t > hi);
            if (in_at_lo && in_at_hi) count++;
        }
        return count;
    };
    for (double t : crit) {
        if (t <= 0.0 || t + d > horizon + kEps) continue;
        double lo = std::max(0.0, t - 2.0 * d);
        double hi = t + d;
        int count = covered(lo, hi, false);
        // The just-below limit matters only when the left end is not clamped at 0.
        if (t - 2.0 * d > 0.0) count = std::min(count, covered(lo, hi, true));
        if (count < f + 1)
            rep.violations.push_back(
                {"lemma3", t, "only " + std::to_string(count) + " correct servers covered the window"});
    }

    rep.ok = rep.violations.empty();
    return rep;
}

TraceVerdict check_trace(const Trace& trace) {
    TraceVerdict v;
    History h = history_from_trace(trace);
    v.lin = check_linearizable_witness(h);
    v.liveness = check_liveness(trace);
    v.audits = audit_model(trace);
    return v;
}

}  // namespace abcc
