// Core domain vocabulary shared by the protocol, adversary, network and
// checker layers: node identities, timestamps, membership change records,
// write-history attestations and protocol message envelopes.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace abcc {

enum class NodeKind : uint8_t { Server = 0, Client = 1 };

// A node identity. Index 0 is reserved for the distinguished bottom value.
// The kind is an immutable attribute of the id and is queryable by anyone,
// which is what makes the is-client check unforgeable.
struct NodeId {
    uint32_t index = 0;
    NodeKind kind = NodeKind::Server;

    static NodeId bottom() { return {}; }
    static NodeId server(uint32_t i) { return {i, NodeKind::Server}; }
    static NodeId client(uint32_t i) { return {i, NodeKind::Client}; }

    bool is_bottom() const { return index == 0; }
    bool is_client() const { return !is_bottom() && kind == NodeKind::Client; }
    bool is_server() const { return !is_bottom() && kind == NodeKind::Server; }

    // Packed key; also defines the fixed total order (bottom least, then
    // servers by index, then clients by index).
    uint64_t key() const {
        if (is_bottom()) return 0;
        return (static_cast<uint64_t>(kind) << 32) | index | (1ull << 40);
    }

    std::string str() const;
    static NodeId parse(const std::string& s);

    friend bool operator==(const NodeId& a, const NodeId& b) { return a.key() == b.key(); }
    friend bool operator!=(const NodeId& a, const NodeId& b) { return !(a == b); }
    friend bool operator<(const NodeId& a, const NodeId& b) { return a.key() < b.key(); }
};

struct NodeIdHash {
    size_t operator()(const NodeId& n) const { return std::hash<uint64_t>{}(n.key()); }
};

// Register version counter: lexicographically ordered (num, w_id) pair.
// The initial timestamp is (0, bottom).
struct Timestamp {
    int64_t num = 0;
    NodeId w_id = NodeId::bottom();

    friend bool operator==(const Timestamp& a, const Timestamp& b) {
        return a.num == b.num && a.w_id == b.w_id;
    }
    friend bool operator!=(const Timestamp& a, const Timestamp& b) { return !(a == b); }
};

// Strict lexicographic order on (num, w_id), bottom writer id least.
inline bool ts_less(const Timestamp& a, const Timestamp& b) {
    if (a.num != b.num) return a.num < b.num;
    return a.w_id < b.w_id;
}

// Register values are opaque byte strings supplied by the workload; the
// bottom value is out of band and marks the unwritten register.
struct Val {
    bool none = true;
    std::string bytes;

    static Val bottom() { return {}; }
    static Val of(std::string s) { return {false, std::move(s)}; }

    bool is_bottom() const { return none; }

    friend bool operator==(const Val& a, const Val& b) {
        return a.none == b.none && (a.none || a.bytes == b.bytes);
    }
    friend bool operator!=(const Val& a, const Val& b) { return !(a == b); }
    friend bool operator<(const Val& a, const Val& b) {
        if (a.none != b.none) return a.none;
        if (a.none) return false;
        return a.bytes < b.bytes;
    }
};

// A (value, timestamp) attestation as stored in write histories.
struct ValueTs {
    Val value;
    Timestamp ts;

    friend bool operator==(const ValueTs& a, const ValueTs& b) {
        return a.ts == b.ts && a.value == b.value;
    }
    friend bool operator!=(const ValueTs& a, const ValueTs& b) { return !(a == b); }
};

// Orders by timestamp first, then by value; used to pick the latest
// supported pair deterministically.
struct ValueTsLess {
    bool operator()(const ValueTs& a, const ValueTs& b) const {
        if (a.ts != b.ts) return ts_less(a.ts, b.ts);
        return a.value < b.value;
    }
};

struct ValueTsHash {
    size_t operator()(const ValueTs& v) const {
        size_t h = std::hash<std::string>{}(v.value.bytes);
        h ^= std::hash<uint64_t>{}(static_cast<uint64_t>(v.ts.num)) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h ^= std::hash<uint64_t>{}(v.ts.w_id.key()) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h ^= v.value.none ? 0x85ebca6bull : 0;
        return h;
    }
};

enum class ChangeKind : uint8_t { Enter = 0, Join = 1, Leave = 2 };

// A self-signed membership event about a server. Only the subject's own
// step can mint one; everyone else may merely relay it.
struct ServerChange {
    ChangeKind kind = ChangeKind::Enter;
    NodeId subject;

    uint64_t key() const { return (subject.key() << 2) | static_cast<uint64_t>(kind); }

    friend bool operator==(const ServerChange& a, const ServerChange& b) { return a.key() == b.key(); }
    friend bool operator<(const ServerChange& a, const ServerChange& b) { return a.key() < b.key(); }
};

// Immutable snapshot views shared between a sender's append-only logs and
// the envelopes in flight. The first `count` elements are stable even if
// the owner keeps appending.
struct ChangesView {
    std::shared_ptr<const std::vector<ServerChange>> items;
    uint32_t count = 0;

    bool empty() const { return count == 0; }
};

struct KwView {
    std::shared_ptr<const std::vector<ValueTs>> items;
    uint32_t count = 0;

    bool empty() const { return count == 0; }
};

// A node's record of membership events, with derived Present/Members counts
// maintained incrementally. Insertion order is preserved so snapshots can be
// shared as grow-only prefixes.
class ChangeLog {
  public:
    ChangeLog() : log_(std::make_shared<std::vector<ServerChange>>()) {}

    bool insert(ServerChange c);
    bool contains(ChangeKind k, NodeId subject) const;
    bool left(NodeId q) const { return contains(ChangeKind::Leave, q); }

    int present_count() const { return present_; }
    int members_count() const { return members_; }
    size_t size() const { return log_->size(); }

    ChangesView snapshot() const { return {log_, static_cast<uint32_t>(log_->size())}; }

    // Present = enter(q) recorded and leave(q) not; Members = join(q) and not leave(q).
    std::vector<NodeId> present_set() const;

  private:
    std::shared_ptr<std::vector<ServerChange>> log_;
    std::unordered_set<uint64_t> have_;
    std::unordered_map<uint64_t, uint8_t> mask_;  // subject key -> bits (1=enter,2=join,4=leave)
    int present_ = 0;
    int members_ = 0;
};

// Map from node id to that node's attested write history. Entry sets only
// grow. valid_val is the latest pair attested under at least f+1 distinct
// keys; it is maintained incrementally so lookups are O(1).
class KnownWrites {
  public:
    explicit KnownWrites(int f = 1) : f_(f), self_items_(std::make_shared<std::vector<ValueTs>>()) {}

    // Inserts into the node's own entry set (adoption path).
    void adopt_self(NodeId self, const ValueTs& e);

    // Unions a received snapshot into the entry set attributed to `key`.
    // Snapshots from the same underlying log are absorbed as prefixes.
    void absorb(NodeId key, const KwView& view);

    // Latest pair supported by at least f+1 distinct keys, else (bottom,(0,bottom)).
    ValueTs valid_val() const;

    KwView self_snapshot() const { return {self_items_, static_cast<uint32_t>(self_items_->size())}; }

    bool key_has(NodeId key, const ValueTs& e) const;
    size_t entry_count(NodeId key) const;
    size_t key_count() const { return columns_.size(); }
    int support_of(const ValueTs& e) const;
    std::vector<NodeId> keys() const;

  private:
    struct Column {
        std::unordered_set<ValueTs, ValueTsHash> entries;
        std::shared_ptr<const std::vector<ValueTs>> src;
        size_t absorbed = 0;
    };

    void bump_support(const ValueTs& e);

    int f_;
    std::shared_ptr<std::vector<ValueTs>> self_items_;
    std::unordered_map<NodeId, Column, NodeIdHash> columns_;
    std::unordered_map<ValueTs, int, ValueTsHash> support_;
    // Pairs with support >= f+1, ordered; the max is valid_val.
    std::vector<ValueTs> supported_sorted_;  // kept sorted under ValueTsLess
};

// Reference implementation of the valid_val derivation, used as the test
// oracle against the incremental structure: enumerate every pair, count the
// distinct keys whose sets contain it, pick the latest with f+1 support.
ValueTs derive_valid_val(const std::unordered_map<NodeId, std::vector<ValueTs>, NodeIdHash>& entries, int f);

enum class MsgKind : uint8_t {
    Enter = 0,
    EnterEcho,
    EnterClient,
    EnterClientEcho,
    Joined,
    JoinedEcho,
    Leave,
    LeaveEcho,
    ServerInfo,
    Query,
    Reply,
    Update,
    Ack,
    UpdateEcho,
};

const char* msg_kind_name(MsgKind k);

enum class Scope : uint8_t { ToServers = 0, ToClients = 1, Unicast = 2 };

// Kind-specific message content. Unused fields stay defaulted; the sender
// attribution lives on the envelope and is stamped by the network layer,
// which is what models unforgeable signatures.
struct Payload {
    ChangesView changes;      // enter-echo, enter-client-echo, server-info
    KwView kw;                // enter-echo, enter-client-echo, reply, update-echo
    bool joined_flag = false; // echoes: responder's is_joined
    NodeId target;            // q: echo target, joined/leave-echo subject, reply/ack client
    ValueTs vts;              // update: (v,(s,i))
    uint64_t tag = 0;         // rt/wt
};

// What a handler asks the network to send.
struct Emission {
    MsgKind kind = MsgKind::Enter;
    Scope scope = Scope::ToServers;
    NodeId unicast_to;  // used when scope == Unicast
    Payload payload;
};

// A message as delivered: emission plus authenticated sender and the
// per-sender FIFO sequence assigned at send time.
struct Envelope {
    MsgKind kind = MsgKind::Enter;
    NodeId sender;
    uint64_t fifo_seq = 0;
    Scope scope = Scope::ToServers;
    NodeId unicast_to;
    Payload payload;
    double send_time = 0.0;
};

// First-receipt log behind the message validity checks. Membership kinds
// dedupe by (kind, sender); echo kinds by (kind, subject, sender); reply and
// ack by (kind, target, tag, sender).
class ReceiptLog {
  public:
    bool first(MsgKind kind, NodeId a, NodeId b, uint64_t tag);

  private:
    struct Key {
        uint8_t kind;
        uint64_t a, b, tag;
        friend bool operator==(const Key& x, const Key& y) {
            return x.kind == y.kind && x.a == y.a && x.b == y.b && x.tag == y.tag;
        }
    };
    struct KeyHash {
        size_t operator()(const Key& k) const {
            size_t h = std::hash<uint64_t>{}(k.a);
            h ^= std::hash<uint64_t>{}(k.b) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h ^= std::hash<uint64_t>{}(k.tag) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h ^= k.kind;
            return h;
        }
    };
    std::unordered_set<Key, KeyHash> seen_;
};

// A single read or write operation as recorded in a trace history.
struct OpRecord {
    std::string id;
    NodeId client;
    bool is_write = false;
    Val written;                       // writes only
    Val returned;                      // completed reads only
    double invoke_t = 0.0;
    std::optional<double> response_t;  // absent: pending at crash/end
    std::optional<Timestamp> ts_witness;
    std::optional<double> update_sent_t;  // set once the write phase broadcast went out
    bool crashed = false;
};

}  // namespace abcc
