#include "abcc/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace abcc {

std::string NodeId::str() const {
    if (is_bottom()) return "-";
    return (kind == NodeKind::Server ? "s" : "c") + std::to_string(index);
}

NodeId NodeId::parse(const std::string& s) {
    if (s.empty() || s == "-") return NodeId::bottom();
    NodeKind k;
    if (s[0] == 's')
        k = NodeKind::Server;
    else if (s[0] == 'c')
        k = NodeKind::Client;
    else
        throw std::runtime_error("bad node id: " + s);
    uint32_t idx = static_cast<uint32_t>(std::stoul(s.substr(1)));
    if (idx == 0) throw std::runtime_error("bad node id: " + s);
    return {idx, k};
}

bool ChangeLog::insert(ServerChange c) {
    if (!have_.insert(c.key()).second) return false;
    log_->push_back(c);
    uint8_t& m = mask_[c.subject.key()];
    uint8_t old = m;
    m |= (1u << static_cast<int>(c.kind));
    bool was_present = (old & 1) && !(old & 4);
    bool was_member = (old & 2) && !(old & 4);
    bool now_present = (m & 1) && !(m & 4);
    bool now_member = (m & 2) && !(m & 4);
    present_ += int(now_present) - int(was_present);
    members_ += int(now_member) - int(was_member);
    return true;
}

bool ChangeLog::contains(ChangeKind k, NodeId subject) const {
    return have_.count(ServerChange{k, subject}.key()) > 0;
}

std::vector<NodeId> ChangeLog::present_set() const {
    std::vector<NodeId> out;
    for (const auto& c : *log_) {
        if (c.kind != ChangeKind::Enter) continue;
        auto it = mask_.find(c.subject.key());
        if (it != mask_.end() && !(it->second & 4)) out.push_back(c.subject);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void KnownWrites::bump_support(const ValueTs& e) {
    int s = ++support_[e];
    if (s == f_ + 1) {
        auto it = std::lower_bound(supported_sorted_.begin(), supported_sorted_.end(), e, ValueTsLess{});
        supported_sorted_.insert(it, e);
    }
}

void KnownWrites::adopt_self(NodeId self, const ValueTs& e) {
    Column& col = columns_[self];
    if (col.entries.insert(e).second) {
        self_items_->push_back(e);
        bump_support(e);
    }
}

void KnownWrites::absorb(NodeId key, const KwView& view) {
    if (view.count == 0) return;
    Column& col = columns_[key];
    size_t start = 0;
    if (col.src == view.items && col.absorbed <= view.count) start = col.absorbed;
    const auto& vec = *view.items;
    for (size_t i = start; i < view.count; ++i) {
        if (col.entries.insert(vec[i]).second) bump_support(vec[i]);
    }
    if (col.src == view.items) {
        col.absorbed = std::max<size_t>(col.absorbed, view.count);
    } else {
        col.src = view.items;
        col.absorbed = view.count;
    }
}

ValueTs KnownWrites::valid_val() const {
    if (supported_sorted_.empty()) return ValueTs{};
    return supported_sorted_.back();
}

bool KnownWrites::key_has(NodeId key, const ValueTs& e) const {
    auto it = columns_.find(key);
    return it != columns_.end() && it->second.entries.count(e) > 0;
}

size_t KnownWrites::entry_count(NodeId key) const {
    auto it = columns_.find(key);
    return it == columns_.end() ? 0 : it->second.entries.size();
}

int KnownWrites::support_of(const ValueTs& e) const {
    auto it = support_.find(e);
    return it == support_.end() ? 0 : it->second;
}

std::vector<NodeId> KnownWrites::keys() const {
    std::vector<NodeId> out;
    out.reserve(columns_.size());
    for (const auto& [k, _] : columns_) out.push_back(k);
    std::sort(out.begin(), out.end());
    return out;
}

ValueTs derive_valid_val(const std::unordered_map<NodeId, std::vector<ValueTs>, NodeIdHash>& entries, int f) {
    std::unordered_map<ValueTs, int, ValueTsHash> count;
    for (const auto& [key, vec] : entries) {
        std::unordered_set<ValueTs, ValueTsHash> distinct(vec.begin(), vec.end());
        for (const auto& e : distinct) count[e]++;
    }
    ValueTs best;
    bool found = false;
    for (const auto& [e, n] : count) {
        if (n < f + 1) continue;
        if (!found || ValueTsLess{}(best, e)) {
            best = e;
            found = true;
        }
    }
    return found ? best : ValueTs{};
}

const char* msg_kind_name(MsgKind k) {
    switch (k) {
        case MsgKind::Enter: return "enter";
        case MsgKind::EnterEcho: return "enter-echo";
        case MsgKind::EnterClient: return "enter-client";
        case MsgKind::EnterClientEcho: return "enter-client-echo";
        case MsgKind::Joined: return "joined";
        case MsgKind::JoinedEcho: return "joined-echo";
        case MsgKind::Leave: return "leave";
        case MsgKind::LeaveEcho: return "leave-echo";
        case MsgKind::ServerInfo: return "server-info";
        case MsgKind::Query: return "query";
        case MsgKind::Reply: return "reply";
        case MsgKind::Update: return "update";
        case MsgKind::Ack: return "ack";
        case MsgKind::UpdateEcho: return "update-echo";
    }
    return "?";
}

bool ReceiptLog::first(MsgKind kind, NodeId a, NodeId b, uint64_t tag) {
    Key k{static_cast<uint8_t>(kind), a.key(), b.key(), tag};
    return seen_.insert(k).second;
}

}  // namespace abcc
