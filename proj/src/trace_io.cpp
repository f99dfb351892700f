#include "abcc/trace_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace abcc {

using nlohmann::json;

namespace {

json ts_json(const Timestamp& ts) { return json::array({ts.num, ts.w_id.str()}); }

Timestamp ts_parse(const json& j) {
    Timestamp ts;
    ts.num = j.at(0).get<int64_t>();
    ts.w_id = NodeId::parse(j.at(1).get<std::string>());
    return ts;
}

json val_json(const Val& v) {
    if (v.is_bottom()) return nullptr;
    return v.bytes;
}

Val val_parse(const json& j) {
    if (j.is_null()) return Val::bottom();
    return Val::of(j.get<std::string>());
}

json ids_json(const std::vector<NodeId>& ids) {
    json a = json::array();
    for (NodeId n : ids) a.push_back(n.str());
    return a;
}

std::vector<NodeId> ids_parse(const json& j) {
    std::vector<NodeId> out;
    for (const auto& e : j) out.push_back(NodeId::parse(e.get<std::string>()));
    return out;
}

const char* trigger_name(TriggerKind k) {
    switch (k) {
        case TriggerKind::Enter: return "enter";
        case TriggerKind::Leave: return "leave";
        case TriggerKind::Crash: return "crash";
        case TriggerKind::InvokeRead: return "invoke-read";
        case TriggerKind::InvokeWrite: return "invoke-write";
        case TriggerKind::Receive: return "receive";
    }
    return "?";
}

TriggerKind trigger_parse(const std::string& s) {
    if (s == "enter") return TriggerKind::Enter;
    if (s == "leave") return TriggerKind::Leave;
    if (s == "crash") return TriggerKind::Crash;
    if (s == "invoke-read") return TriggerKind::InvokeRead;
    if (s == "invoke-write") return TriggerKind::InvokeWrite;
    if (s == "receive") return TriggerKind::Receive;
    throw std::runtime_error("bad trigger kind: " + s);
}

MsgKind msg_parse(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(MsgKind::UpdateEcho); ++i)
        if (s == msg_kind_name(static_cast<MsgKind>(i))) return static_cast<MsgKind>(i);
    throw std::runtime_error("bad message kind: " + s);
}

const char* scope_name(Scope s) {
    switch (s) {
        case Scope::ToServers: return "servers";
        case Scope::ToClients: return "clients";
        case Scope::Unicast: return "unicast";
    }
    return "?";
}

Scope scope_parse(const std::string& s) {
    if (s == "servers") return Scope::ToServers;
    if (s == "clients") return Scope::ToClients;
    if (s == "unicast") return Scope::Unicast;
    throw std::runtime_error("bad scope: " + s);
}

const char* response_name(ResponseKind k) {
    switch (k) {
        case ResponseKind::Joined: return "joined";
        case ResponseKind::ReturnValue: return "return";
        case ResponseKind::WriteAck: return "ack";
    }
    return "?";
}

ResponseKind response_parse(const std::string& s) {
    if (s == "joined") return ResponseKind::Joined;
    if (s == "return") return ResponseKind::ReturnValue;
    if (s == "ack") return ResponseKind::WriteAck;
    throw std::runtime_error("bad response kind: " + s);
}

}  // namespace

std::string trace_to_jsonl(const Trace& trace) {
    std::ostringstream os;

    {
        const TraceHeader& h = trace.header;
        json p = {{"alpha", h.params.alpha}, {"f", h.params.f},       {"ns_min", h.params.ns_min},
                  {"d", h.params.d},         {"gamma", h.params.gamma ? json(*h.params.gamma) : json(nullptr)},
                  {"beta", h.params.beta ? json(*h.params.beta) : json(nullptr)}};
        json j = {{"type", "header"},
                  {"version", 1},
                  {"params", p},
                  {"seed", h.seed},
                  {"duration", h.duration},
                  {"initial_servers", h.initial_servers},
                  {"initial_clients", h.initial_clients},
                  {"s0", ids_json(h.s0)},
                  {"c0", ids_json(h.c0)},
                  {"corrupt", ids_json(h.corrupt)},
                  {"strategy", h.strategy},
                  {"a5_enforced", h.a5_enforced},
                  {"uniform_client", h.uniform_client_variant}};
        os << j.dump() << '\n';
    }

    for (const TraceStep& s : trace.steps) {
        json trig = {{"kind", trigger_name(s.trigger.kind)}};
        if (s.trigger.kind == TriggerKind::Receive) {
            trig["msg"] = msg_kind_name(s.trigger.msg);
            trig["from"] = s.trigger.from.str();
            trig["sent"] = s.trigger.sent_t;
            if (!s.trigger.q.is_bottom()) trig["q"] = s.trigger.q.str();
            if (s.trigger.tag) trig["tag"] = s.trigger.tag;
        }
        if (s.trigger.kind == TriggerKind::InvokeWrite) trig["value"] = val_json(s.trigger.value);

        json sent = json::array();
        for (const SentSummary& m : s.sent) {
            json e = {{"msg", msg_kind_name(m.kind)}, {"scope", scope_name(m.scope)}};
            if (m.scope == Scope::Unicast) e["to"] = m.to.str();
            if (!m.q.is_bottom()) e["q"] = m.q.str();
            if (m.tag) e["tag"] = m.tag;
            if (m.kind == MsgKind::Update) {
                e["value"] = val_json(m.vts.value);
                e["ts"] = ts_json(m.vts.ts);
            }
            if (m.kind == MsgKind::EnterEcho || m.kind == MsgKind::EnterClientEcho) e["j"] = m.joined_flag;
            if (m.n_changes) e["nc"] = m.n_changes;
            if (m.n_kw) e["nk"] = m.n_kw;
            sent.push_back(e);
        }

        json j = {{"type", "step"}, {"t", s.t}, {"node", s.node.str()}, {"trigger", trig}, {"ns", s.ns}};
        if (!sent.empty()) j["sent"] = sent;
        if (s.became_joined) j["joined"] = true;
        if (s.response) {
            json r = {{"kind", response_name(s.response->kind)}};
            if (s.response->kind == ResponseKind::ReturnValue) r["value"] = val_json(s.response->value);
            if (s.response->kind != ResponseKind::Joined) {
                r["ts"] = ts_json(s.response->ts);
                r["op"] = s.response->op_id;
            }
            j["response"] = r;
        }
        os << j.dump() << '\n';
    }

    for (const OpRecord& op : trace.ops) {
        json j = {{"type", "op"},
                  {"id", op.id},
                  {"client", op.client.str()},
                  {"op", op.is_write ? "write" : "read"},
                  {"invoke", op.invoke_t}};
        if (op.is_write) j["value"] = val_json(op.written);
        if (op.response_t) {
            j["response"] = *op.response_t;
            if (!op.is_write) j["returned"] = val_json(op.returned);
        }
        if (op.ts_witness) j["ts"] = ts_json(*op.ts_witness);
        if (op.update_sent_t) j["update_sent"] = *op.update_sent_t;
        if (op.crashed) j["crashed"] = true;
        os << j.dump() << '\n';
    }

    for (const auto& [id, life] : trace.lives) {
        json j = {{"type", "node"},
                  {"id", id.str()},
                  {"correct", life.correct},
                  {"initial", life.initial},
                  {"enter", life.enter_t}};
        if (life.join_t) j["join"] = *life.join_t;
        if (life.leave_t) j["leave"] = *life.leave_t;
        if (life.crash_t) j["crash"] = *life.crash_t;
        os << j.dump() << '\n';
    }

    os << json({{"type", "end"}, {"t", trace.end_t}, {"steps", trace.steps.size()}, {"ops", trace.ops.size()}}).dump()
       << '\n';
    return os.str();
}

void write_trace(const Trace& trace, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open trace file for writing: " + path);
    f << trace_to_jsonl(trace);
}

Trace trace_from_jsonl(const std::string& text) {
    Trace trace;
    std::istringstream is(text);
    std::string line;
    bool saw_header = false, saw_end = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        const std::string type = j.at("type").get<std::string>();
        if (type == "header") {
            saw_header = true;
            TraceHeader& h = trace.header;
            const json& p = j.at("params");
            h.params.alpha = p.at("alpha").get<double>();
            h.params.f = p.at("f").get<int>();
            h.params.ns_min = p.at("ns_min").get<int>();
            h.params.d = p.at("d").get<double>();
            if (!p.at("gamma").is_null()) h.params.gamma = p.at("gamma").get<double>();
            if (!p.at("beta").is_null()) h.params.beta = p.at("beta").get<double>();
            h.seed = j.at("seed").get<uint64_t>();
            h.duration = j.at("duration").get<double>();
            h.initial_servers = j.at("initial_servers").get<int>();
            h.initial_clients = j.at("initial_clients").get<int>();
            h.s0 = ids_parse(j.at("s0"));
            h.c0 = ids_parse(j.at("c0"));
            h.corrupt = ids_parse(j.at("corrupt"));
            h.strategy = j.at("strategy").get<std::string>();
            h.a5_enforced = j.at("a5_enforced").get<bool>();
            h.uniform_client_variant = j.value("uniform_client", false);
        } else if (type == "step") {
            TraceStep s;
            s.t = j.at("t").get<double>();
            s.node = NodeId::parse(j.at("node").get<std::string>());
            const json& trig = j.at("trigger");
            s.trigger.kind = trigger_parse(trig.at("kind").get<std::string>());
            if (s.trigger.kind == TriggerKind::Receive) {
                s.trigger.msg = msg_parse(trig.at("msg").get<std::string>());
                s.trigger.from = NodeId::parse(trig.at("from").get<std::string>());
                s.trigger.sent_t = trig.value("sent", 0.0);
                if (trig.contains("q")) s.trigger.q = NodeId::parse(trig.at("q").get<std::string>());
                s.trigger.tag = trig.value("tag", 0ull);
            }
            if (s.trigger.kind == TriggerKind::InvokeWrite && trig.contains("value"))
                s.trigger.value = val_parse(trig.at("value"));
            if (j.contains("sent")) {
                for (const auto& e : j.at("sent")) {
                    SentSummary m{};
                    m.kind = msg_parse(e.at("msg").get<std::string>());
                    m.scope = scope_parse(e.at("scope").get<std::string>());
                    if (e.contains("to")) m.to = NodeId::parse(e.at("to").get<std::string>());
                    if (e.contains("q")) m.q = NodeId::parse(e.at("q").get<std::string>());
                    m.tag = e.value("tag", 0ull);
                    if (e.contains("value")) m.vts.value = val_parse(e.at("value"));
                    if (e.contains("ts")) m.vts.ts = ts_parse(e.at("ts"));
                    m.joined_flag = e.value("j", false);
                    m.n_changes = e.value("nc", 0u);
                    m.n_kw = e.value("nk", 0u);
                    s.sent.push_back(m);
                }
            }
            s.became_joined = j.value("joined", false);
            if (j.contains("response")) {
                const json& r = j.at("response");
                ResponseSummary rs;
                rs.kind = response_parse(r.at("kind").get<std::string>());
                if (r.contains("value")) rs.value = val_parse(r.at("value"));
                if (r.contains("ts")) rs.ts = ts_parse(r.at("ts"));
                rs.op_id = r.value("op", "");
                s.response = rs;
            }
            s.ns = j.at("ns").get<int>();
            trace.steps.push_back(std::move(s));
        } else if (type == "op") {
            OpRecord op;
            op.id = j.at("id").get<std::string>();
            op.client = NodeId::parse(j.at("client").get<std::string>());
            op.is_write = j.at("op").get<std::string>() == "write";
            op.invoke_t = j.at("invoke").get<double>();
            if (j.contains("value")) op.written = val_parse(j.at("value"));
            if (j.contains("response")) op.response_t = j.at("response").get<double>();
            if (j.contains("returned")) op.returned = val_parse(j.at("returned"));
            if (j.contains("ts")) op.ts_witness = ts_parse(j.at("ts"));
            if (j.contains("update_sent")) op.update_sent_t = j.at("update_sent").get<double>();
            op.crashed = j.value("crashed", false);
            trace.ops.push_back(std::move(op));
        } else if (type == "node") {
            NodeLife life;
            life.id = NodeId::parse(j.at("id").get<std::string>());
            life.correct = j.at("correct").get<bool>();
            life.initial = j.at("initial").get<bool>();
            life.enter_t = j.at("enter").get<double>();
            if (j.contains("join")) life.join_t = j.at("join").get<double>();
            if (j.contains("leave")) life.leave_t = j.at("leave").get<double>();
            if (j.contains("crash")) life.crash_t = j.at("crash").get<double>();
            trace.lives[life.id] = life;
        } else if (type == "end") {
            saw_end = true;
            trace.end_t = j.at("t").get<double>();
        } else {
            throw std::runtime_error("unknown trace line type: " + type);
        }
    }
    if (!saw_header || !saw_end) throw std::runtime_error("trace file is missing header or end marker");
    return trace;
}

Trace read_trace(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open trace file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return trace_from_jsonl(ss.str());
}

}  // namespace abcc
