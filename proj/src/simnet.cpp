#include "abcc/simnet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace abcc {

double DelayModel::sample(double d, bool sender_fast, Rng& rng) const {
    switch (kind) {
        case DelayKind::Uniform: {
            double lo = min_fraction * d;
            double x = rng.uniform(lo, d);
            return x <= 0.0 ? d * 1e-9 : x;
        }
        case DelayKind::Constant:
            return d;
        case DelayKind::Bimodal:
            return rng.chance(fast_prob) ? fast_fraction * d : d;
        case DelayKind::AdversarialFast:
            return sender_fast ? fast_fraction * d : d;
    }
    return d;
}

int ChurnLedger::events_in(double lo, bool lo_closed, double hi, bool hi_closed) const {
    int n = 0;
    for (const auto& [t, _] : events_) {
        bool above = lo_closed ? (t >= lo) : (t > lo);
        bool below = hi_closed ? (t <= hi) : (t < hi);
        if (above && below) n++;
    }
    return n;
}

int ChurnLedger::ns_at(double t) const {
    int ns = ns0_;
    for (const auto& [et, is_enter] : events_) {
        if (et <= t) ns += is_enter ? 1 : -1;
    }
    return ns;
}

bool ChurnLedger::leave_keeps_a1(double t, int ns_min) const {
    int ns = ns_at(t) - 1;
    if (ns < ns_min) return false;
    for (const auto& [et, ie] : events_) {
        if (et <= t) continue;
        ns += ie ? 1 : -1;
        if (ns < ns_min) return false;
    }
    return true;
}

bool ChurnLedger::admissible(double t, bool is_enter, int ns_min, bool check_a1) const {
    if (check_a1 && !is_enter && !leave_keeps_a1(t, ns_min)) return false;
    // Candidate window starts: every committed event time in [t-d, t], the
    // proposal time itself, and t-d. Each start is checked twice: the closed
    // window [t0, t0+d] against NS(t0), and the limit window just below t0,
    // which counts [t0, t0+d) against NS(t0-). Both views of A5 must hold.
    std::vector<double> starts{t, std::max(0.0, t - d_)};
    for (const auto& [et, _] : events_)
        if (et >= t - d_ && et <= t) starts.push_back(et);
    auto ns_before = [&](double at) {
        int ns = ns0_;
        for (const auto& [et, ie] : events_)
            if (et < at) ns += ie ? 1 : -1;
        return ns;
    };
    for (double t0 : starts) {
        if (t0 > t || t0 + d_ < t) continue;  // proposal not inside this window
        int count = events_in(t0, true, t0 + d_, true) + 1;  // +1 for the proposal
        int ns_t0 = ns_at(t0);
        if (!is_enter && t0 >= t) ns_t0 -= 1;  // a leave at t lowers NS(t) itself
        if (static_cast<double>(count) > alpha_ * ns_t0 + 1e-9) return false;
        if (t0 > 0.0) {
            int count_open = events_in(t0, true, t0 + d_, false) + (t < t0 + d_ ? 1 : 0);
            if (static_cast<double>(count_open) > alpha_ * ns_before(t0) + 1e-9) return false;
        }
    }
    return true;
}

void ChurnLedger::commit(double t, bool is_enter) {
    auto it = std::upper_bound(events_.begin(), events_.end(), std::make_pair(t, true),
                               [](const auto& a, const auto& b) { return a.first < b.first; });
    events_.insert(it, {t, is_enter});
}

namespace {

enum class EvKind : uint8_t { Enter, Leave, Crash, Invoke, Deliver, ChurnTick };

struct Event {
    double t = 0.0;
    uint64_t ord = 0;
    EvKind kind = EvKind::Deliver;
    NodeId node;
    std::shared_ptr<const Envelope> env;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.t != b.t) return a.t > b.t;
        return a.ord > b.ord;
    }
};

struct Slot {
    std::unique_ptr<ServerNode> server;
    std::unique_ptr<ClientNode> client;
    NodeLife life;
    uint64_t fifo_seq = 0;
    std::unordered_map<NodeId, double, NodeIdHash> last_delivery;
    int pending_op = -1;  // index into trace.ops
    uint64_t op_seq = 0;
    bool entered = false;

    bool is_server() const { return server != nullptr; }
    bool present(double t) const {
        return entered && life.enter_t <= t && (!life.leave_t || *life.leave_t > t);
    }
    bool active(double t) const { return present(t) && (!life.crash_t || *life.crash_t > t); }
};

class Engine {
  public:
    explicit Engine(const SimConfig& cfg)
        : cfg_(cfg),
          rng_(cfg.seed),
          adv_(cfg.unchecked_adversary ? AdversaryCoalition::unchecked(cfg.adversary, cfg.params.f)
                                       : AdversaryCoalition(cfg.adversary, cfg.params.f)),
          ledger_(cfg.params.alpha, cfg.params.d, effective_initial_servers(cfg)) {}

    Trace run();

  private:
    static int effective_initial_servers(const SimConfig& c) {
        return c.initial_servers > 0 ? c.initial_servers : c.params.ns_min;
    }

    AlgoKnobs knobs_for(NodeKind kind) const {
        AlgoKnobs k;
        k.gamma = cfg_.params.gamma.value_or(0.5);
        k.beta = cfg_.params.beta.value_or(0.8);
        k.f = cfg_.params.f;
        if (kind == NodeKind::Client && cfg_.uniform_client_variant) k.uniform_client = true;
        return k;
    }

    void setup();
    void schedule(Event e) {
        e.ord = next_ord_++;
        queue_.push(std::move(e));
    }
    Slot& slot(NodeId n) { return nodes_.at(n); }

    NodeId mint_server() { return NodeId::server(next_server_idx_++); }
    NodeId mint_client() { return NodeId::client(next_client_idx_++); }

    Slot& create_server(NodeId id, bool initial);
    Slot& create_client(NodeId id, bool initial);

    void route_emissions(NodeId sender, const std::vector<Emission>& emissions, double t,
                         std::vector<SentSummary>& sent_out);
    void process(const Event& ev);
    void handle_step_output(NodeId node, double t, StepOutput& out, TraceStep& step);
    void schedule_invoke(NodeId client, double t);
    void churn_tick(double now);
    bool try_commit_churn(double t, bool is_enter, NodeId bound_victim = NodeId::bottom());

    SimConfig cfg_;
    Rng rng_;
    AdversaryCoalition adv_;
    ChurnLedger ledger_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::map<NodeId, Slot> nodes_;
    Trace trace_;
    uint64_t next_ord_ = 0;
    uint32_t next_server_idx_ = 1;
    uint32_t next_client_idx_ = 1;
    int ns_ = 0;
    int ops_remaining_ = 0;
    uint64_t value_seq_ = 0;
    double invoke_deadline_ = 0.0;
    std::vector<NodeId> leave_bound_set_;
};

Slot& Engine::create_server(NodeId id, bool initial) {
    Slot s;
    s.server = std::make_unique<ServerNode>(id, knobs_for(NodeKind::Server));
    s.life.id = id;
    s.life.initial = initial;
    auto [it, ok] = nodes_.emplace(id, std::move(s));
    assert(ok);
    return it->second;
}

Slot& Engine::create_client(NodeId id, bool initial) {
    Slot s;
    s.client = std::make_unique<ClientNode>(id, knobs_for(NodeKind::Client));
    s.life.id = id;
    s.life.initial = initial;
    auto [it, ok] = nodes_.emplace(id, std::move(s));
    assert(ok);
    return it->second;
}

bool Engine::try_commit_churn(double t, bool is_enter, NodeId bound_victim) {
    if (t <= 0.0 || t >= cfg_.duration) return false;
    bool check = cfg_.churn.enforce_a5;
    if (check && !ledger_.admissible(t, is_enter, cfg_.params.ns_min, true)) return false;
    if (!check && !is_enter && !ledger_.leave_keeps_a1(t, cfg_.params.ns_min)) return false;  // A1 stays hard
    if (!is_enter) {
        if (bound_victim.is_bottom()) {
            std::vector<NodeId> eligible;
            for (auto& [id, sl] : nodes_) {
                if (!sl.is_server() || !sl.entered || sl.life.leave_t) continue;
                if (adv_.is_corrupt(id)) continue;  // keep the adversary present
                if (std::find(leave_bound_set_.begin(), leave_bound_set_.end(), id) != leave_bound_set_.end())
                    continue;
                eligible.push_back(id);
            }
            if (eligible.empty()) return false;
            bound_victim = eligible[rng_.below(eligible.size())];
        }
        leave_bound_set_.push_back(bound_victim);
    }
    ledger_.commit(t, is_enter);
    Event e;
    e.t = t;
    e.kind = is_enter ? EvKind::Enter : EvKind::Leave;
    e.node = is_enter ? mint_server() : bound_victim;
    if (is_enter) create_server(e.node, false);
    schedule(std::move(e));
    return true;
}

void Engine::setup() {
    cfg_.params.validate_fields();
    if (!cfg_.params.gamma || !cfg_.params.beta)
        throw std::runtime_error("simulation requires gamma and beta to be set");
    ConstraintReport rep = check_constraints(cfg_.params);
    if (!rep.feasible && !cfg_.override_feasibility)
        throw std::runtime_error("parameters are infeasible; pass override_feasibility to run anyway");

    int ns0 = effective_initial_servers(cfg_);
    if (ns0 < cfg_.params.ns_min)
        throw std::runtime_error("initial_servers below ns_min violates A1");
    ns_ = ns0;
    invoke_deadline_ = std::max(0.0, cfg_.duration - 6.0 * cfg_.params.d);
    ops_remaining_ = cfg_.workload.total_ops;

    std::vector<NodeId> s0;
    for (int i = 0; i < ns0; ++i) s0.push_back(mint_server());
    std::vector<NodeId> c0;
    for (int i = 0; i < cfg_.initial_clients; ++i) c0.push_back(mint_client());

    for (NodeId id : s0) {
        Slot& sl = create_server(id, true);
        sl.entered = true;
        sl.life.enter_t = 0.0;
        sl.life.join_t = 0.0;
        sl.server->core().boot_initial(s0);
    }
    for (NodeId id : c0) {
        Slot& sl = create_client(id, true);
        sl.entered = true;
        sl.life.enter_t = 0.0;
        sl.life.join_t = 0.0;
        sl.client->core().boot_initial(s0);
    }

    // Corrupt set. The churn amplifier corrupts future entrants; everything
    // else corrupts members of S0.
    std::vector<NodeId> corrupt;
    if (cfg_.adversary.strategy != StrategyKind::None && cfg_.adversary.corrupt_count > 0) {
        if (cfg_.adversary.strategy == StrategyKind::ChurnAmplifier) {
            for (int k = 0; k < cfg_.adversary.corrupt_count; ++k) {
                double te = (2.0 + 3.0 * k) * cfg_.params.d;
                uint32_t before = next_server_idx_;
                if (try_commit_churn(te, true)) {
                    NodeId id = NodeId::server(before);
                    corrupt.push_back(id);
                    double tl = te + 10.0 * cfg_.params.d;
                    if (ledger_.admissible(tl, false, cfg_.params.ns_min, true))
                        try_commit_churn(tl, false, id);
                } else {
                    corrupt.push_back(s0[k % s0.size()]);  // no churn budget: stay resident
                }
            }
            std::sort(corrupt.begin(), corrupt.end());
            corrupt.erase(std::unique(corrupt.begin(), corrupt.end()), corrupt.end());
        } else {
            std::vector<NodeId> pool = s0;
            for (int k = 0; k < cfg_.adversary.corrupt_count && !pool.empty(); ++k) {
                size_t i = rng_.below(pool.size());
                corrupt.push_back(pool[i]);
                pool.erase(pool.begin() + i);
            }
            std::sort(corrupt.begin(), corrupt.end());
        }
    }
    adv_.set_corrupt(corrupt);
    // The coalition knows everything its members start with.
    for (NodeId id : corrupt) {
        auto it = nodes_.find(id);
        if (it == nodes_.end() || !it->second.is_server()) continue;
        ChangesView v = it->second.server->core().server_changes.snapshot();
        for (uint32_t i = 0; i < v.count; ++i) adv_.observe_minted((*v.items)[i]);
    }

    // Client entrants.
    for (int k = 0; k < cfg_.workload.client_entrants; ++k) {
        NodeId id = mint_client();
        create_client(id, false);
        double t;
        if (cfg_.workload.entrant_delay >= 0.0) {
            t = cfg_.workload.entrant_delay + 3.0 * cfg_.params.d * k + rng_.uniform(0.0, cfg_.params.d / 4.0);
        } else {
            double span = std::max(cfg_.params.d, cfg_.duration / 4.0 - 2.0 * cfg_.params.d);
            t = 2.0 * cfg_.params.d + (span * k) / std::max(1, cfg_.workload.client_entrants) +
                rng_.uniform(0.0, cfg_.params.d);
        }
        Event e;
        e.t = std::min(t, std::max(0.1, invoke_deadline_ - 8.0 * cfg_.params.d));
        e.kind = EvKind::Enter;
        e.node = id;
        schedule(std::move(e));
    }

    // Crashes hit the highest-numbered clients mid-run.
    if (cfg_.workload.crash_clients > 0) {
        std::vector<NodeId> clients;
        for (auto& [id, sl] : nodes_)
            if (!sl.is_server()) clients.push_back(id);
        int n = std::min<int>(cfg_.workload.crash_clients, clients.size());
        for (int k = 0; k < n; ++k) {
            Event e;
            e.t = cfg_.duration * (0.35 + 0.1 * k);
            e.kind = EvKind::Crash;
            e.node = clients[clients.size() - 1 - k];
            schedule(std::move(e));
        }
    }

    // First workload invokes for initial clients.
    for (NodeId id : c0) schedule_invoke(id, 0.0);

    // Churn.
    if (cfg_.churn.pattern == ChurnPattern::TargetRate) {
        Event e;
        e.t = cfg_.params.d;
        e.kind = EvKind::ChurnTick;
        schedule(std::move(e));
    } else if (cfg_.churn.pattern == ChurnPattern::Scripted) {
        for (const auto& s : cfg_.churn.scripted)
            if (!try_commit_churn(s.t, s.is_enter) && cfg_.churn.enforce_a5)
                throw std::runtime_error("scripted churn event inadmissible under A5/A1");
    }

    trace_.header.params = cfg_.params;
    trace_.header.seed = cfg_.seed;
    trace_.header.duration = cfg_.duration;
    trace_.header.initial_servers = ns0;
    trace_.header.initial_clients = cfg_.initial_clients;
    trace_.header.s0 = s0;
    trace_.header.c0 = c0;
    trace_.header.corrupt = corrupt;
    trace_.header.strategy = strategy_name(cfg_.adversary.strategy);
    trace_.header.a5_enforced = cfg_.churn.enforce_a5;
    trace_.header.uniform_client_variant = cfg_.uniform_client_variant;
}

void Engine::churn_tick(double now) {
    double d = cfg_.params.d;
    double budget = cfg_.params.alpha * ledger_.ns_at(now) * cfg_.churn.rate_fraction;
    // Expected events this half-window; propose and let admission decide.
    double expect = budget / 2.0;
    int n = static_cast<int>(expect);
    if (rng_.uniform01() < expect - n) n++;
    for (int i = 0; i < n; ++i) {
        double t = now + rng_.uniform(0.0, d / 2.0);
        bool is_enter;
        int ns_now = ledger_.ns_at(now);
        if (ns_now <= cfg_.params.ns_min)
            is_enter = true;
        else if (ns_now >= ledger_.ns_at(0.0) + 2)
            is_enter = false;
        else
            is_enter = rng_.chance(0.5);
        try_commit_churn(t, is_enter);
    }
    if (now + d / 2.0 < cfg_.duration) {
        Event e;
        e.t = now + d / 2.0;
        e.kind = EvKind::ChurnTick;
        schedule(std::move(e));
    }
}

void Engine::schedule_invoke(NodeId client, double t) {
    if (ops_remaining_ <= 0) return;
    double at = t + rng_.uniform(0.01 * cfg_.params.d, std::max(0.02, cfg_.workload.gap) * cfg_.params.d);
    if (at >= invoke_deadline_) return;
    Event e;
    e.t = at;
    e.kind = EvKind::Invoke;
    e.node = client;
    schedule(std::move(e));
}

void Engine::route_emissions(NodeId sender, const std::vector<Emission>& emissions, double t,
                             std::vector<SentSummary>& sent_out) {
    Slot& ss = slot(sender);
    bool fast_class = adv_.is_corrupt(sender) || sender.is_client();
    for (const Emission& em : emissions) {
        auto env = std::make_shared<Envelope>();
        env->kind = em.kind;
        env->sender = sender;
        env->fifo_seq = ss.fifo_seq++;
        env->scope = em.scope;
        env->unicast_to = em.unicast_to;
        env->payload = em.payload;
        env->send_time = t;

        SentSummary sum;
        sum.kind = em.kind;
        sum.scope = em.scope;
        sum.to = em.unicast_to;
        sum.q = em.payload.target;
        sum.tag = em.payload.tag;
        sum.vts = em.payload.vts;
        sum.joined_flag = em.payload.joined_flag;
        sum.n_changes = em.payload.changes.count;
        sum.n_kw = em.payload.kw.count;
        sent_out.push_back(sum);

        auto deliver_to = [&](NodeId r) {
            double delay = cfg_.delay.sample(cfg_.params.d, fast_class, rng_);
            double at = t + delay;
            auto [it, inserted] = ss.last_delivery.emplace(r, at);
            if (!inserted) {
                if (at < it->second) at = it->second;
                it->second = at;
            }
            if (at > cfg_.duration) return;  // still in flight when the run ends
            Event e;
            e.t = at;
            e.kind = EvKind::Deliver;
            e.node = r;
            e.env = env;
            schedule(std::move(e));
        };

        if (em.scope == Scope::Unicast) {
            auto it = nodes_.find(em.unicast_to);
            if (it != nodes_.end() && it->second.active(t)) deliver_to(em.unicast_to);
        } else {
            bool want_servers = em.scope == Scope::ToServers;
            for (auto& [id, rs] : nodes_) {
                if (rs.is_server() != want_servers) continue;
                if (!rs.active(t)) continue;
                deliver_to(id);
            }
        }
    }
}

void Engine::handle_step_output(NodeId node, double t, StepOutput& out, TraceStep& step) {
    Slot& sl = slot(node);
    if (out.became_joined) {
        sl.life.join_t = t;
        step.became_joined = true;
    }
    if (out.update_broadcast && sl.pending_op >= 0) {
        trace_.ops[sl.pending_op].update_sent_t = t;
        trace_.ops[sl.pending_op].ts_witness = out.update_ts;
    }
    for (const Response& r : out.responses) {
        ResponseSummary rs;
        rs.kind = r.kind;
        rs.value = r.value;
        rs.ts = r.ts;
        if (r.kind == ResponseKind::Joined) {
            sl.life.join_t = t;
            step.became_joined = true;
            schedule_invoke(node, t);
        } else if (sl.pending_op >= 0) {
            OpRecord& op = trace_.ops[sl.pending_op];
            op.response_t = t;
            op.ts_witness = r.ts;
            if (r.kind == ResponseKind::ReturnValue) op.returned = r.value;
            rs.op_id = op.id;
            sl.pending_op = -1;
            schedule_invoke(node, t);
        }
        step.response = rs;
    }
    route_emissions(node, out.emissions, t, step.sent);
}

void Engine::process(const Event& ev) {
    if (ev.kind == EvKind::ChurnTick) {  // engine-internal, not a node step
        churn_tick(ev.t);
        return;
    }
    Slot& sl = slot(ev.node);
    TraceStep step;
    step.t = ev.t;
    step.node = ev.node;

    StepOutput out;
    switch (ev.kind) {
        case EvKind::Enter: {
            step.trigger.kind = TriggerKind::Enter;
            sl.entered = true;
            sl.life.enter_t = ev.t;
            if (sl.is_server()) {
                ns_++;
                assert(ns_ == ledger_.ns_at(ev.t));
                out = sl.server->on_enter();
                if (adv_.is_corrupt(ev.node))
                    adv_.observe_minted({ChangeKind::Enter, ev.node});
            } else {
                out = sl.client->on_enter();
            }
            break;
        }
        case EvKind::Leave: {
            step.trigger.kind = TriggerKind::Leave;
            if (!sl.entered || sl.life.leave_t) return;
            sl.life.leave_t = ev.t;
            if (sl.is_server()) {
                ns_--;
                if (ns_ < cfg_.params.ns_min) throw std::runtime_error("engine bug: A1 violated by leave");
                out = sl.server->on_leave();
                if (adv_.is_corrupt(ev.node))
                    adv_.observe_minted({ChangeKind::Leave, ev.node});
            } else {
                out = sl.client->on_leave();
            }
            break;
        }
        case EvKind::Crash: {
            step.trigger.kind = TriggerKind::Crash;
            if (!sl.active(ev.t) || sl.is_server()) return;
            sl.life.crash_t = ev.t;
            out = sl.client->on_crash();
            if (sl.pending_op >= 0) {
                trace_.ops[sl.pending_op].crashed = true;
                sl.pending_op = -1;
            }
            break;
        }
        case EvKind::Invoke: {
            if (sl.is_server() || !sl.active(ev.t) || !sl.client->core().is_joined) return;
            if (sl.client->op_pending() || sl.pending_op >= 0) return;
            if (ops_remaining_ <= 0) return;
            if (cfg_.workload.max_ops_per_client > 0 &&
                sl.op_seq >= static_cast<uint64_t>(cfg_.workload.max_ops_per_client))
                return;
            ops_remaining_--;
            bool is_write = !rng_.chance(cfg_.workload.read_fraction);
            if (cfg_.workload.entrants_read_only && !sl.life.initial) is_write = false;
            OpRecord op;
            op.id = ev.node.str() + "#" + std::to_string(++sl.op_seq);
            op.client = ev.node;
            op.is_write = is_write;
            op.invoke_t = ev.t;
            if (is_write) {
                op.written = Val::of("w" + std::to_string(++value_seq_));
                step.trigger.kind = TriggerKind::InvokeWrite;
                step.trigger.value = op.written;
            } else {
                step.trigger.kind = TriggerKind::InvokeRead;
            }
            sl.pending_op = static_cast<int>(trace_.ops.size());
            trace_.ops.push_back(op);
            out = is_write ? sl.client->on_invoke_write(op.written) : sl.client->on_invoke_read();
            break;
        }
        case EvKind::Deliver: {
            if (!sl.active(ev.t)) return;
            const Envelope& m = *ev.env;
            step.trigger.kind = TriggerKind::Receive;
            step.trigger.msg = m.kind;
            step.trigger.from = m.sender;
            step.trigger.q = m.payload.target;
            step.trigger.tag = m.payload.tag;
            step.trigger.sent_t = m.send_time;
            if (sl.is_server()) {
                bool corrupt = adv_.is_corrupt(ev.node);
                if (corrupt) adv_.observe_delivery(ev.node, m);
                out = sl.server->on_receive(m);
                if (corrupt)
                    out.emissions = adv_.rewrite(*sl.server, m, std::move(out.emissions), ev.ord);
            } else {
                out = sl.client->on_receive(m);
            }
            break;
        }
        case EvKind::ChurnTick:
            return;  // handled above
    }

    handle_step_output(ev.node, ev.t, out, step);
    step.ns = ns_;
    if (cfg_.record_steps) trace_.steps.push_back(std::move(step));
}

Trace Engine::run() {
    setup();
    while (!queue_.empty()) {
        Event ev = queue_.top();
        queue_.pop();
        if (ev.t > cfg_.duration) break;
        process(ev);
    }
    trace_.end_t = cfg_.duration;
    for (auto& [id, sl] : nodes_) {
        if (!sl.entered) continue;
        sl.life.correct = !adv_.is_corrupt(id);
        trace_.lives[id] = sl.life;
    }
    return std::move(trace_);
}

}  // namespace

Trace run_simulation(const SimConfig& cfg) {
    Engine eng(cfg);
    return eng.run();
}

}  // namespace abcc
