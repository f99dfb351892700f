// Server and client state machines for the register emulation, plus the
// shared join/validation procedures. Handlers are pure transitions: they
// mutate local state and return the messages and operation responses they
// want the network layer to deliver; the simulator owns all I/O.
#pragma once

#include <cassert>
#include <unordered_map>
#include <vector>

#include "abcc/model.hpp"

namespace abcc {

// Algorithm parameters as known to a node. Nodes never learn d or ns_min.
struct AlgoKnobs {
    double gamma = 0.5;
    double beta = 0.8;
    int f = 1;
    // Variant switch for the impossibility demonstration: a client whose
    // thresholds are independent of f and of system size. It joins on the
    // first echo flagged joined, finishes phases after a fixed reply count,
    // and masks nothing (any single attestation counts).
    bool uniform_client = false;
    int uniform_rw_bound = 2;
};

enum class ResponseKind : uint8_t { Joined = 0, ReturnValue = 1, WriteAck = 2 };

struct Response {
    ResponseKind kind = ResponseKind::Joined;
    Val value;      // ReturnValue only
    Timestamp ts;   // operation timestamp witness for ReturnValue/WriteAck
};

struct StepOutput {
    std::vector<Emission> emissions;
    std::vector<Response> responses;
    bool became_joined = false;      // flipped is_joined during this step
    bool update_broadcast = false;   // client sent its write-phase update
    Timestamp update_ts;             // timestamp carried by that update
};

// Knowledge fields common to servers and clients.
struct NodeCore {
    NodeId self;
    AlgoKnobs knobs;

    ChangeLog server_changes;
    double join_bound = 0.0;
    int enter_echo_counter = 0;
    int enter_echo_from_joined_counter = 0;
    bool is_joined = false;
    bool halted = false;

    Val val;                 // latest register value known; initially bottom
    Timestamp ts;            // (num, w_id); initially (0, bottom)
    KnownWrites known_writes;
    ReceiptLog receipts;

    // Per-sender absorption cursors for Server_Changes snapshots.
    struct ChangesCursor {
        std::shared_ptr<const std::vector<ServerChange>> src;
        size_t absorbed = 0;
    };
    std::unordered_map<NodeId, ChangesCursor, NodeIdHash> change_cursors;

    NodeCore(NodeId id, AlgoKnobs k) : self(id), knobs(k), known_writes(k.uniform_client ? 0 : k.f) {}

    void absorb_changes(NodeId sender, const ChangesView& v);
    bool message_valid(MsgKind kind, NodeId subject, NodeId sender, uint64_t tag);

    // Procedure SetValueTimestamp: adopt valid_val when its timestamp is
    // newer than (num, w_id), and record the adoption in the self history.
    void set_value_timestamp();

    // Procedure JoinProtocol(j). Returns the join-time actions when the node
    // transitions to joined during this call.
    void join_protocol(bool reported_joined, StepOutput& out);

    // Bootstrapping for nodes in the system at time 0.
    void boot_initial(const std::vector<NodeId>& s0);
};

class ServerNode {
  public:
    ServerNode(NodeId id, AlgoKnobs k) : core_(id, k) { assert(id.is_server()); }

    StepOutput on_enter();
    StepOutput on_leave();
    StepOutput on_receive(const Envelope& m);

    NodeCore& core() { return core_; }
    const NodeCore& core() const { return core_; }

  private:
    NodeCore core_;
};

class ClientNode {
  public:
    ClientNode(NodeId id, AlgoKnobs k) : core_(id, k) { assert(id.is_client()); }

    StepOutput on_enter();
    StepOutput on_leave();
    StepOutput on_crash();
    StepOutput on_invoke_read();
    StepOutput on_invoke_write(Val v);
    StepOutput on_receive(const Envelope& m);

    NodeCore& core() { return core_; }
    const NodeCore& core() const { return core_; }

    bool op_pending() const { return read_pending_ || write_pending_; }
    uint64_t tag() const { return tag_; }
    double rw_bound() const { return rw_bound_; }
    int rw_counter() const { return rw_counter_; }

  private:
    void begin_read_phase(StepOutput& out);
    void begin_write_phase(StepOutput& out);

    NodeCore core_;
    Val temp_;
    uint64_t tag_ = 0;
    double rw_bound_ = 0.0;
    int rw_counter_ = 0;
    bool rp_pending_ = false;
    bool wp_pending_ = false;
    bool read_pending_ = false;
    bool write_pending_ = false;
    // Timestamp carried by the current operation's update broadcast; the
    // node's own (num, w_id) may advance before the acks arrive.
    Timestamp op_ts_;
};

}  // namespace abcc
