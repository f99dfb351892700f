#include "abcc/adversary.hpp"

#include <algorithm>

namespace abcc {

const std::vector<StrategyInfo>& strategy_catalog() {
    static const std::vector<StrategyInfo> cat = {
        {StrategyKind::Silent, "silent", "never replies to any message"},
        {StrategyKind::StaleReplay, "stale-replay", "advertises an old frozen write history"},
        {StrategyKind::Equivocate, "equivocate", "sends diverging unicast replies to different clients"},
        {StrategyKind::DoubleReply, "double-reply", "sends every reply and ack twice"},
        {StrategyKind::PostLeaveReply, "post-leave-reply", "announces leave, then keeps replying"},
        {StrategyKind::FakeJoined, "fake-joined", "claims to be joined before it is"},
        {StrategyKind::CorruptNum, "corrupt-num", "inflates sequence numbers on fabricated entries"},
        {StrategyKind::ChurnAmplifier, "churn-amplifier", "enters and leaves to burn churn budget, never replies"},
    };
    return cat;
}

StrategyKind strategy_by_name(const std::string& name) {
    if (name == "none") return StrategyKind::None;
    if (name == "forge-writer") return StrategyKind::ForgeWriter;
    for (const auto& s : strategy_catalog())
        if (name == s.name) return s.kind;
    throw std::runtime_error("unknown adversary strategy: " + name);
}

const char* strategy_name(StrategyKind k) {
    if (k == StrategyKind::None) return "none";
    if (k == StrategyKind::ForgeWriter) return "forge-writer";
    for (const auto& s : strategy_catalog())
        if (s.kind == k) return s.name;
    return "?";
}

void AdversaryPool::observe_delivery(const Envelope& m) {
    const Payload& p = m.payload;
    if (p.changes.items)
        for (uint32_t i = 0; i < p.changes.count; ++i) note_change((*p.changes.items)[i]);
    if (p.kw.items)
        for (uint32_t i = 0; i < p.kw.count; ++i) note_value((*p.kw.items)[i]);
    note_value(p.vts);
    note_client(m.sender);
    note_client(p.target);
    // Membership announcements are themselves signed records.
    switch (m.kind) {
        case MsgKind::Enter:
            note_change({ChangeKind::Enter, m.sender});
            break;
        case MsgKind::Joined:
            note_change({ChangeKind::Enter, m.sender});
            note_change({ChangeKind::Join, m.sender});
            break;
        case MsgKind::Leave:
            note_change({ChangeKind::Leave, m.sender});
            break;
        case MsgKind::JoinedEcho:
            note_change({ChangeKind::Enter, p.target});
            note_change({ChangeKind::Join, p.target});
            break;
        case MsgKind::LeaveEcho:
            note_change({ChangeKind::Leave, p.target});
            break;
        default:
            break;
    }
}

bool AdversaryCoalition::is_corrupt(NodeId n) const {
    return std::find(corrupt_.begin(), corrupt_.end(), n) != corrupt_.end();
}

void AdversaryCoalition::validate(NodeId sender, const Emission& e) const {
    const Payload& p = e.payload;
    if (p.changes.items) {
        for (uint32_t i = 0; i < p.changes.count; ++i) {
            const ServerChange& c = (*p.changes.items)[i];
            // A corrupt server may relay genuinely seen records and mint
            // records about itself; anything else would forge a signature.
            if (c.subject != sender && !pool_.change_seen(c))
                throw ModelViolation("adversary emitted unseen change record about " + c.subject.str());
        }
    }
    auto check_entry = [&](const ValueTs& v) {
        if (v.value.is_bottom())
            throw ModelViolation("adversary emitted out-of-band bottom value");
        if (!pool_.wid_seen(v.ts.w_id))
            throw ModelViolation("adversary emitted unseen writer id " + v.ts.w_id.str());
    };
    if (p.kw.items)
        for (uint32_t i = 0; i < p.kw.count; ++i) check_entry((*p.kw.items)[i]);
    if (e.kind == MsgKind::Update) check_entry(p.vts);
    switch (e.kind) {
        case MsgKind::Enter:
        case MsgKind::EnterClient:
        case MsgKind::Joined:
        case MsgKind::Leave:
            if (p.target != sender)
                throw ModelViolation("adversary announced a membership event about another node");
            break;
        default:
            break;
    }
}

namespace {

KwView freeze_prefix(const ServerNode& node, int64_t freeze_num) {
    KwView full = node.core().known_writes.self_snapshot();
    auto kept = std::make_shared<std::vector<ValueTs>>();
    for (uint32_t i = 0; i < full.count; ++i) {
        const ValueTs& e = (*full.items)[i];
        if (e.ts.num <= freeze_num) kept->push_back(e);
    }
    uint32_t n = static_cast<uint32_t>(kept->size());
    return KwView{std::move(kept), n};
}

std::shared_ptr<std::vector<ValueTs>> copy_entries(const KwView& v) {
    auto vec = std::make_shared<std::vector<ValueTs>>();
    if (v.items) vec->assign(v.items->begin(), v.items->begin() + v.count);
    return vec;
}

KwView as_view(std::shared_ptr<std::vector<ValueTs>> vec) {
    uint32_t n = static_cast<uint32_t>(vec->size());
    return KwView{std::move(vec), n};
}

}  // namespace

std::vector<Emission> AdversaryCoalition::apply_strategy(const ServerNode& node, const Envelope&,
                                                         std::vector<Emission> honest, uint64_t step_salt) {
    NodeId self = node.core().self;
    switch (spec_.strategy) {
        case StrategyKind::None:
            return honest;

        case StrategyKind::Silent:
        case StrategyKind::ChurnAmplifier:
            return {};

        case StrategyKind::StaleReplay: {
            KwView frozen = freeze_prefix(node, spec_.stale_freeze_num);
            for (Emission& e : honest)
                if (e.payload.kw.items) e.payload.kw = frozen;
            return honest;
        }

        case StrategyKind::Equivocate: {
            std::vector<Emission> out;
            for (Emission& e : honest) {
                if (e.kind != MsgKind::Reply) {
                    out.push_back(std::move(e));
                    continue;
                }
                // One private story per known client; writer ids stay genuine.
                uint32_t salt = 0;
                for (NodeId target : pool_.clients()) {
                    Emission u = e;
                    u.scope = Scope::Unicast;
                    u.unicast_to = target;
                    auto vec = copy_entries(e.payload.kw);
                    if (!vec->empty()) {
                        ValueTs& last = vec->back();
                        last.value = Val::of(last.value.is_bottom() ? "eq" : last.value.bytes + "#" + std::to_string(salt));
                        last.ts.num += 1 + static_cast<int64_t>(salt) + static_cast<int64_t>(step_salt % 3);
                    }
                    u.payload.kw = as_view(std::move(vec));
                    out.push_back(std::move(u));
                    salt++;
                }
            }
            return out;
        }

        case StrategyKind::DoubleReply: {
            std::vector<Emission> out;
            for (Emission& e : honest) {
                out.push_back(e);
                if (e.kind == MsgKind::Reply || e.kind == MsgKind::Ack) out.push_back(e);
            }
            return out;
        }

        case StrategyKind::PostLeaveReply: {
            std::vector<Emission> out;
            if (leave_announced_.insert(self.key()).second) {
                // Lie about leaving; no physical Leave event occurs.
                Emission lv;
                lv.kind = MsgKind::Leave;
                lv.scope = Scope::ToServers;
                lv.payload.target = self;
                out.push_back(lv);
            }
            for (Emission& e : honest) out.push_back(std::move(e));
            return out;
        }

        case StrategyKind::FakeJoined: {
            std::vector<Emission> out;
            if (!node.core().is_joined && joined_announced_.insert(self.key()).second) {
                Emission j;
                j.kind = MsgKind::Joined;
                j.scope = Scope::ToServers;
                j.payload.target = self;
                out.push_back(j);
            }
            for (Emission& e : honest) {
                if (e.kind == MsgKind::EnterEcho || e.kind == MsgKind::EnterClientEcho)
                    e.payload.joined_flag = true;
                out.push_back(std::move(e));
            }
            return out;
        }

        case StrategyKind::CorruptNum: {
            for (Emission& e : honest) {
                if (!e.payload.kw.items || e.payload.kw.count == 0) continue;
                auto vec = copy_entries(e.payload.kw);
                ValueTs forged = vec->back();
                forged.value = Val::of("forged");
                forged.ts.num += spec_.corrupt_num_inflation;
                vec->push_back(forged);
                e.payload.kw = as_view(std::move(vec));
            }
            return honest;
        }

        case StrategyKind::ForgeWriter: {
            // Illegal on purpose: used to prove the validation layer bites.
            for (Emission& e : honest) {
                if (!e.payload.kw.items) continue;
                auto vec = copy_entries(e.payload.kw);
                vec->push_back(ValueTs{Val::of("planted"), Timestamp{9, NodeId::client(4000000)}});
                e.payload.kw = as_view(std::move(vec));
            }
            return honest;
        }
    }
    return honest;
}

std::vector<Emission> AdversaryCoalition::rewrite(const ServerNode& node, const Envelope& trigger,
                                                  std::vector<Emission> honest, uint64_t step_salt) {
    std::vector<Emission> out = apply_strategy(node, trigger, std::move(honest), step_salt);
    NodeId self = node.core().self;
    for (const Emission& e : out) {
        validate(self, e);
        // Records the coalition mints about itself become shared knowledge.
        switch (e.kind) {
            case MsgKind::Enter:
                pool_.note_change({ChangeKind::Enter, self});
                break;
            case MsgKind::Joined:
                pool_.note_change({ChangeKind::Enter, self});
                pool_.note_change({ChangeKind::Join, self});
                break;
            case MsgKind::Leave:
                pool_.note_change({ChangeKind::Leave, self});
                break;
            default:
                break;
        }
    }
    return out;
}

}  // namespace abcc
