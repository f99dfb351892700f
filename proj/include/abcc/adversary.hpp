// Byzantine server behaviors, pluggable per scenario. Corrupt servers run
// the honest state machine for bookkeeping; a strategy rewrites what they
// send. A validation layer enforces the signature-model limits on every
// emission: relayed change records must be genuine, writer ids in value
// payloads must have been seen (or bottom), and sender attribution is
// always the true corrupt server.
#pragma once

#include <functional>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "abcc/model.hpp"
#include "abcc/protocol.hpp"

namespace abcc {

enum class StrategyKind : uint8_t {
    None = 0,        // behave correctly (adversary disabled)
    Silent,          // never answer anything
    StaleReplay,     // advertise a frozen old prefix of the own write history
    Equivocate,      // per-client unicast replies with diverging contents
    DoubleReply,     // send every reply/ack twice
    PostLeaveReply,  // announce leave, keep answering
    FakeJoined,      // claim joined everywhere, announce joined early
    CorruptNum,      // append fabricated high-sequence entries (seen writer ids only)
    ChurnAmplifier,  // enter/leave to burn churn budget, never answer
    ForgeWriter,     // deliberately illegal: fabricates an unseen writer id
};

struct StrategyInfo {
    StrategyKind kind;
    const char* name;
    const char* summary;
};

const std::vector<StrategyInfo>& strategy_catalog();
StrategyKind strategy_by_name(const std::string& name);  // throws on unknown
const char* strategy_name(StrategyKind k);

struct AdversarySpec {
    StrategyKind strategy = StrategyKind::None;
    int corrupt_count = 0;  // |F|, must stay <= f (checked against Params)
    int64_t corrupt_num_inflation = 1'000'000;
    int64_t stale_freeze_num = 0;  // StaleReplay: advertise entries with num <= this
};

class ModelViolation : public std::runtime_error {
  public:
    explicit ModelViolation(const std::string& what) : std::runtime_error(what) {}
};

// Knowledge every corrupt server has seen or minted, shared coalition-wide.
class AdversaryPool {
  public:
    void note_change(const ServerChange& c) { changes_.insert(c.key()); }
    void note_value(const ValueTs& e) {
        if (!e.ts.w_id.is_bottom()) wids_.insert(e.ts.w_id);
    }
    void note_client(NodeId n) {
        if (n.is_client()) clients_.insert(n);
    }
    void observe_delivery(const Envelope& m);

    bool change_seen(const ServerChange& c) const { return changes_.count(c.key()) > 0; }
    bool wid_seen(NodeId w) const { return w.is_bottom() || wids_.count(w) > 0; }
    const std::set<NodeId>& clients() const { return clients_; }

  private:
    std::unordered_set<uint64_t> changes_;
    std::set<NodeId> wids_;
    std::set<NodeId> clients_;
};

// Deterministic rewriting of a corrupt server's step output. `honest` is
// what the correct handler emitted for this event; lifecycle announcements
// (physical enter/leave) bypass the strategy entirely and are emitted as-is.
class AdversaryCoalition {
  public:
    AdversaryCoalition(AdversarySpec spec, int f) : spec_(spec), f_(f) {
        if (spec.corrupt_count > f && spec.strategy != StrategyKind::None)
            throw std::runtime_error("|corrupt_set| exceeds f");
    }

    // Unchecked construction for the impossibility demonstration, which
    // deliberately exceeds the declared failure bound.
    static AdversaryCoalition unchecked(AdversarySpec spec, int f) {
        AdversaryCoalition a(AdversarySpec{}, f);
        a.spec_ = spec;
        return a;
    }

    void set_corrupt(std::vector<NodeId> ids) { corrupt_ = std::move(ids); }
    const std::vector<NodeId>& corrupt_set() const { return corrupt_; }
    bool is_corrupt(NodeId n) const;
    StrategyKind strategy() const { return spec_.strategy; }

    void observe_delivery(NodeId /*corrupt_node*/, const Envelope& m) { pool_.observe_delivery(m); }
    void observe_minted(const ServerChange& c) { pool_.note_change(c); }

    // Rewrites receive-triggered emissions of a corrupt server. Throws
    // ModelViolation if the strategy tries to emit outside the model.
    std::vector<Emission> rewrite(const ServerNode& node, const Envelope& trigger,
                                  std::vector<Emission> honest, uint64_t step_salt);

    // Enforces the forgery restrictions on one emission.
    void validate(NodeId sender, const Emission& e) const;

    const AdversaryPool& pool() const { return pool_; }

  private:
    std::vector<Emission> apply_strategy(const ServerNode& node, const Envelope& trigger,
                                         std::vector<Emission> honest, uint64_t step_salt);

    AdversarySpec spec_;
    int f_;
    std::vector<NodeId> corrupt_;
    AdversaryPool pool_;
    std::unordered_set<uint64_t> leave_announced_;  // PostLeaveReply: node key -> already lied
    std::unordered_set<uint64_t> joined_announced_;
};

}  // namespace abcc
