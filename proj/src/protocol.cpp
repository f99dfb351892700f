#include "abcc/protocol.hpp"

namespace abcc {

namespace {

Emission s_bcast(MsgKind k, Payload p) {
    Emission e;
    e.kind = k;
    e.scope = Scope::ToServers;
    e.payload = std::move(p);
    return e;
}

Emission c_bcast(MsgKind k, Payload p) {
    Emission e;
    e.kind = k;
    e.scope = Scope::ToClients;
    e.payload = std::move(p);
    return e;
}

}  // namespace

void NodeCore::absorb_changes(NodeId sender, const ChangesView& v) {
    if (v.count == 0) return;
    ChangesCursor& cur = change_cursors[sender];
    size_t start = 0;
    if (cur.src == v.items && cur.absorbed <= v.count) start = cur.absorbed;
    const auto& vec = *v.items;
    for (size_t i = start; i < v.count; ++i) server_changes.insert(vec[i]);
    if (cur.src == v.items) {
        cur.absorbed = std::max<size_t>(cur.absorbed, v.count);
    } else {
        cur.src = v.items;
        cur.absorbed = v.count;
    }
}

bool NodeCore::message_valid(MsgKind kind, NodeId subject, NodeId sender, uint64_t tag) {
    if (server_changes.left(sender)) return false;
    switch (kind) {
        case MsgKind::Enter:
        case MsgKind::Joined:
        case MsgKind::Leave:
            // first `type` message received from r
            return receipts.first(kind, sender, NodeId::bottom(), 0);
        case MsgKind::EnterEcho:
        case MsgKind::EnterClientEcho:
        case MsgKind::JoinedEcho:
        case MsgKind::LeaveEcho:
            // first `type` message for q received from r
            return receipts.first(kind, subject, sender, 0);
        case MsgKind::Reply:
        case MsgKind::Ack:
            // first `type` message for q with sequence tag received from r
            return receipts.first(kind, subject, sender, tag);
        default:
            return true;
    }
}

void NodeCore::set_value_timestamp() {
    ValueTs vv = known_writes.valid_val();
    if (vv.value.is_bottom()) return;
    if (ts_less(ts, vv.ts)) {
        val = vv.value;
        ts = vv.ts;
        known_writes.adopt_self(self, ValueTs{val, ts});
    }
}

void NodeCore::join_protocol(bool reported_joined, StepOutput& out) {
    enter_echo_counter++;
    if (reported_joined && join_bound == 0.0) {
        enter_echo_from_joined_counter++;
        if (enter_echo_from_joined_counter > knobs.f)
            join_bound = knobs.gamma * server_changes.present_count();
    }
    if (knobs.uniform_client) {
        // Uniform variant: no dependence on f or system size.
        if (!reported_joined) return;
        join_bound = 1.0;
    } else if (!(enter_echo_counter >= join_bound && join_bound > 0.0)) {
        return;
    }
    is_joined = true;
    out.became_joined = true;
    if (self.is_client()) {
        out.responses.push_back(Response{ResponseKind::Joined, {}, {}});
    } else {
        server_changes.insert({ChangeKind::Join, self});
        Payload joined;
        joined.target = self;
        out.emissions.push_back(s_bcast(MsgKind::Joined, joined));
        Payload info;
        info.changes = server_changes.snapshot();
        out.emissions.push_back(c_bcast(MsgKind::ServerInfo, info));
    }
}

void NodeCore::boot_initial(const std::vector<NodeId>& s0) {
    for (NodeId q : s0) {
        server_changes.insert({ChangeKind::Enter, q});
        server_changes.insert({ChangeKind::Join, q});
    }
    is_joined = true;
}

StepOutput ServerNode::on_enter() {
    StepOutput out;
    if (core_.halted) return out;
    core_.server_changes.insert({ChangeKind::Enter, core_.self});
    Payload enter;
    enter.target = core_.self;
    out.emissions.push_back(s_bcast(MsgKind::Enter, enter));
    Payload info;
    info.changes = core_.server_changes.snapshot();
    out.emissions.push_back(c_bcast(MsgKind::ServerInfo, info));
    return out;
}

StepOutput ServerNode::on_leave() {
    StepOutput out;
    if (core_.halted) return out;
    core_.server_changes.insert({ChangeKind::Leave, core_.self});
    Payload leave;
    leave.target = core_.self;
    out.emissions.push_back(s_bcast(MsgKind::Leave, leave));
    Payload info;
    info.changes = core_.server_changes.snapshot();
    out.emissions.push_back(c_bcast(MsgKind::ServerInfo, info));
    core_.halted = true;
    return out;
}

StepOutput ServerNode::on_receive(const Envelope& m) {
    StepOutput out;
    if (core_.halted) return out;
    NodeCore& c = core_;
    switch (m.kind) {
        case MsgKind::Enter: {
            if (!c.message_valid(MsgKind::Enter, m.sender, m.sender, 0)) break;
            c.server_changes.insert({ChangeKind::Enter, m.sender});
            Payload echo;
            echo.changes = c.server_changes.snapshot();
            echo.kw = c.known_writes.self_snapshot();
            echo.joined_flag = c.is_joined;
            echo.target = m.sender;
            out.emissions.push_back(s_bcast(MsgKind::EnterEcho, echo));
            Payload info;
            info.changes = c.server_changes.snapshot();
            out.emissions.push_back(c_bcast(MsgKind::ServerInfo, info));
            break;
        }
        case MsgKind::EnterClient: {
            if (!m.sender.is_client()) break;
            Payload echo;
            echo.changes = c.server_changes.snapshot();
            echo.kw = c.known_writes.self_snapshot();
            echo.joined_flag = c.is_joined;
            echo.target = m.sender;
            out.emissions.push_back(c_bcast(MsgKind::EnterClientEcho, echo));
            break;
        }
        case MsgKind::EnterEcho: {
            if (!c.message_valid(MsgKind::EnterEcho, m.payload.target, m.sender, 0)) break;
            c.absorb_changes(m.sender, m.payload.changes);
            if (m.payload.joined_flag) c.known_writes.absorb(m.sender, m.payload.kw);
            if (!c.is_joined && c.self == m.payload.target) c.join_protocol(m.payload.joined_flag, out);
            c.set_value_timestamp();
            break;
        }
        case MsgKind::Joined: {
            if (!c.message_valid(MsgKind::Joined, m.sender, m.sender, 0)) break;
            c.server_changes.insert({ChangeKind::Enter, m.sender});
            c.server_changes.insert({ChangeKind::Join, m.sender});
            Payload echo;
            echo.target = m.sender;
            out.emissions.push_back(s_bcast(MsgKind::JoinedEcho, echo));
            Payload info;
            info.changes = c.server_changes.snapshot();
            out.emissions.push_back(c_bcast(MsgKind::ServerInfo, info));
            break;
        }
        case MsgKind::JoinedEcho: {
            if (!c.message_valid(MsgKind::JoinedEcho, m.payload.target, m.sender, 0)) break;
            c.server_changes.insert({ChangeKind::Enter, m.payload.target});
            c.server_changes.insert({ChangeKind::Join, m.payload.target});
            Payload info;
            info.changes = c.server_changes.snapshot();
            out.emissions.push_back(c_bcast(MsgKind::ServerInfo, info));
            break;
        }
        case MsgKind::Leave: {
            if (!c.message_valid(MsgKind::Leave, m.sender, m.sender, 0)) break;
            c.server_changes.insert({ChangeKind::Leave, m.sender});
            Payload echo;
            echo.target = m.sender;
            out.emissions.push_back(s_bcast(MsgKind::LeaveEcho, echo));
            Payload info;
            info.changes = c.server_changes.snapshot();
            out.emissions.push_back(c_bcast(MsgKind::ServerInfo, info));
            break;
        }
        case MsgKind::LeaveEcho: {
            if (!c.message_valid(MsgKind::LeaveEcho, m.payload.target, m.sender, 0)) break;
            c.server_changes.insert({ChangeKind::Leave, m.payload.target});
            Payload info;
            info.changes = c.server_changes.snapshot();
            out.emissions.push_back(c_bcast(MsgKind::ServerInfo, info));
            break;
        }
        case MsgKind::Query: {
            if (c.is_joined && m.sender.is_client()) {
                Payload reply;
                reply.kw = c.known_writes.self_snapshot();
                reply.tag = m.payload.tag;
                reply.target = m.sender;
                out.emissions.push_back(c_bcast(MsgKind::Reply, reply));
            }
            break;
        }
        case MsgKind::Update: {
            if (!m.sender.is_client()) break;
            if (ts_less(c.ts, m.payload.vts.ts)) {
                c.val = m.payload.vts.value;
                c.ts = m.payload.vts.ts;
                c.known_writes.adopt_self(c.self, ValueTs{c.val, c.ts});
            }
            if (c.is_joined) {
                Payload ack;
                ack.tag = m.payload.tag;
                ack.target = m.sender;
                out.emissions.push_back(c_bcast(MsgKind::Ack, ack));
            }
            Payload echo;
            echo.kw = c.known_writes.self_snapshot();
            out.emissions.push_back(s_bcast(MsgKind::UpdateEcho, echo));
            break;
        }
        case MsgKind::UpdateEcho: {
            c.known_writes.absorb(m.sender, m.payload.kw);
            c.set_value_timestamp();
            break;
        }
        default:
            break;  // kinds addressed to clients are dropped silently
    }
    return out;
}

StepOutput ClientNode::on_enter() {
    StepOutput out;
    if (core_.halted) return out;
    Payload p;
    p.target = core_.self;
    out.emissions.push_back(s_bcast(MsgKind::EnterClient, p));
    return out;
}

StepOutput ClientNode::on_leave() {
    core_.halted = true;
    return {};
}

StepOutput ClientNode::on_crash() {
    core_.halted = true;
    return {};
}

void ClientNode::begin_read_phase(StepOutput& out) {
    tag_++;
    Payload q;
    q.tag = tag_;
    out.emissions.push_back(s_bcast(MsgKind::Query, q));
    rw_bound_ = core_.knobs.uniform_client ? core_.knobs.uniform_rw_bound
                                           : core_.knobs.beta * core_.server_changes.members_count();
    rw_counter_ = 0;
    rp_pending_ = true;
}

void ClientNode::begin_write_phase(StepOutput& out) {
    if (write_pending_) {
        core_.val = temp_;
        core_.ts.num++;
        core_.ts.w_id = core_.self;
    }
    if (read_pending_) temp_ = core_.val;
    Payload u;
    u.vts = ValueTs{temp_, core_.ts};
    u.tag = tag_;
    out.emissions.push_back(s_bcast(MsgKind::Update, u));
    out.update_broadcast = true;
    out.update_ts = core_.ts;
    op_ts_ = core_.ts;
    rw_bound_ = core_.knobs.uniform_client ? core_.knobs.uniform_rw_bound
                                           : core_.knobs.beta * core_.server_changes.members_count();
    rw_counter_ = 0;
    wp_pending_ = true;
}

StepOutput ClientNode::on_invoke_read() {
    StepOutput out;
    assert(core_.is_joined && !core_.halted && !op_pending());
    read_pending_ = true;
    begin_read_phase(out);
    return out;
}

StepOutput ClientNode::on_invoke_write(Val v) {
    StepOutput out;
    assert(core_.is_joined && !core_.halted && !op_pending());
    write_pending_ = true;
    temp_ = std::move(v);
    begin_read_phase(out);
    return out;
}

StepOutput ClientNode::on_receive(const Envelope& m) {
    StepOutput out;
    if (core_.halted) return out;
    NodeCore& c = core_;
    switch (m.kind) {
        case MsgKind::EnterClientEcho: {
            // Guard normalized to: addressed to self, first such echo from
            // this responder, responder not known to have left.
            if (c.self == m.payload.target &&
                c.message_valid(MsgKind::EnterClientEcho, m.payload.target, m.sender, 0)) {
                c.absorb_changes(m.sender, m.payload.changes);
                if (m.payload.joined_flag) c.known_writes.absorb(m.sender, m.payload.kw);
                if (!c.is_joined) c.join_protocol(m.payload.joined_flag, out);
            }
            c.set_value_timestamp();
            break;
        }
        case MsgKind::ServerInfo: {
            c.absorb_changes(m.sender, m.payload.changes);
            break;
        }
        case MsgKind::Reply: {
            if (!c.message_valid(MsgKind::Reply, m.payload.target, m.sender, m.payload.tag)) break;
            if (rp_pending_ && m.payload.tag == tag_ && m.payload.target == c.self) {
                rw_counter_++;
                c.known_writes.absorb(m.sender, m.payload.kw);
                if (rw_counter_ >= rw_bound_) {
                    c.set_value_timestamp();
                    rp_pending_ = false;
                    begin_write_phase(out);
                }
            }
            break;
        }
        case MsgKind::Ack: {
            if (!c.message_valid(MsgKind::Ack, m.payload.target, m.sender, m.payload.tag)) break;
            if (wp_pending_ && m.payload.tag == tag_ && m.payload.target == c.self) {
                rw_counter_++;
                if (rw_counter_ >= rw_bound_) {
                    wp_pending_ = false;
                    if (read_pending_) {
                        read_pending_ = false;
                        out.responses.push_back(Response{ResponseKind::ReturnValue, temp_, op_ts_});
                    }
                    if (write_pending_) {
                        write_pending_ = false;
                        out.responses.push_back(Response{ResponseKind::WriteAck, {}, op_ts_});
                    }
                }
            }
            break;
        }
        default:
            break;  // server-to-server kinds are never delivered to clients
    }
    return out;
}

}  // namespace abcc
