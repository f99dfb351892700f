#include <doctest.h>

#include "abcc/adversary.hpp"

using namespace abcc;

namespace {

KwView kw_view(std::vector<ValueTs> entries) {
    auto vec = std::make_shared<std::vector<ValueTs>>(std::move(entries));
    uint32_t n = static_cast<uint32_t>(vec->size());
    return KwView{std::move(vec), n};
}

ValueTs vt(const char* v, int64_t num, NodeId w) { return {Val::of(v), Timestamp{num, w}}; }

Envelope update_from(NodeId client, const char* v, int64_t num) {
    Envelope m;
    m.kind = MsgKind::Update;
    m.sender = client;
    m.payload.vts = vt(v, num, client);
    m.payload.tag = 1;
    return m;
}

}  // namespace

TEST_CASE("strategy catalog names resolve and unknown names are rejected") {
    CHECK(strategy_catalog().size() == 8);
    for (const auto& s : strategy_catalog()) CHECK(strategy_by_name(s.name) == s.kind);
    CHECK_THROWS(strategy_by_name("quantum"));
}

TEST_CASE("corrupt set larger than f is rejected") {
    AdversarySpec spec;
    spec.strategy = StrategyKind::Silent;
    spec.corrupt_count = 3;
    CHECK_THROWS(AdversaryCoalition(spec, 2));
    CHECK_NOTHROW(AdversaryCoalition(spec, 3));
}

TEST_CASE("validation rejects fabricated writer ids") {
    AdversarySpec spec;
    spec.strategy = StrategyKind::ForgeWriter;
    spec.corrupt_count = 1;
    AdversaryCoalition adv(spec, 1);
    adv.set_corrupt({NodeId::server(1)});

    ServerNode node(NodeId::server(1), AlgoKnobs{});
    node.core().boot_initial({NodeId::server(1), NodeId::server(2)});
    // only c1 is ever seen by the coalition
    adv.observe_delivery(NodeId::server(1), update_from(NodeId::client(1), "v", 1));

    Emission reply;
    reply.kind = MsgKind::Reply;
    reply.scope = Scope::ToClients;
    reply.payload.kw = kw_view({vt("v", 1, NodeId::client(1))});
    reply.payload.target = NodeId::client(1);
    Envelope trigger;
    trigger.kind = MsgKind::Query;
    trigger.sender = NodeId::client(1);
    CHECK_THROWS_AS(adv.rewrite(node, trigger, {reply}, 0), ModelViolation);
}

TEST_CASE("validation rejects relayed change records never seen") {
    AdversarySpec spec;
    spec.strategy = StrategyKind::None;
    AdversaryCoalition adv(spec, 1);
    adv.set_corrupt({NodeId::server(1)});
    Emission info;
    info.kind = MsgKind::ServerInfo;
    info.scope = Scope::ToClients;
    auto vec = std::make_shared<std::vector<ServerChange>>();
    vec->push_back({ChangeKind::Enter, NodeId::server(77)});
    info.payload.changes = {vec, 1};
    CHECK_THROWS_AS(adv.validate(NodeId::server(1), info), ModelViolation);
    // records about itself are mintable
    Emission own;
    own.kind = MsgKind::Leave;
    own.scope = Scope::ToServers;
    own.payload.target = NodeId::server(1);
    CHECK_NOTHROW(adv.validate(NodeId::server(1), own));
}

TEST_CASE("validation rejects out-of-band bottom values") {
    AdversarySpec spec;
    AdversaryCoalition adv(spec, 1);
    adv.set_corrupt({NodeId::server(1)});
    Emission reply;
    reply.kind = MsgKind::Reply;
    reply.scope = Scope::ToClients;
    reply.payload.kw = kw_view({ValueTs{Val::bottom(), Timestamp{3, NodeId::bottom()}}});
    CHECK_THROWS_AS(adv.validate(NodeId::server(1), reply), ModelViolation);
}

namespace {

AdversaryCoalition coalition(StrategyKind k) {
    AdversarySpec spec;
    spec.strategy = k;
    spec.corrupt_count = 1;
    AdversaryCoalition adv(spec, 1);
    adv.set_corrupt({NodeId::server(1)});
    return adv;
}

std::vector<Emission> honest_reply() {
    Emission reply;
    reply.kind = MsgKind::Reply;
    reply.scope = Scope::ToClients;
    reply.payload.kw = kw_view({vt("v", 1, NodeId::client(1)), vt("w", 2, NodeId::client(1))});
    reply.payload.target = NodeId::client(1);
    reply.payload.tag = 4;
    return {reply};
}

}  // namespace

TEST_CASE("silent never emits") {
    auto adv = coalition(StrategyKind::Silent);
    ServerNode node(NodeId::server(1), AlgoKnobs{});
    Envelope trigger;
    trigger.kind = MsgKind::Query;
    trigger.sender = NodeId::client(1);
    CHECK(adv.rewrite(node, trigger, honest_reply(), 0).empty());
}

TEST_CASE("double-reply duplicates replies and acks") {
    auto adv = coalition(StrategyKind::DoubleReply);
    ServerNode node(NodeId::server(1), AlgoKnobs{});
    adv.observe_delivery(NodeId::server(1), update_from(NodeId::client(1), "v", 1));
    adv.observe_delivery(NodeId::server(1), update_from(NodeId::client(1), "w", 2));
    Envelope trigger;
    trigger.kind = MsgKind::Query;
    trigger.sender = NodeId::client(1);
    auto out = adv.rewrite(node, trigger, honest_reply(), 0);
    CHECK(out.size() == 2);
}

TEST_CASE("stale-replay advertises only the frozen prefix") {
    AdversarySpec spec;
    spec.strategy = StrategyKind::StaleReplay;
    spec.corrupt_count = 1;
    spec.stale_freeze_num = 1;
    AdversaryCoalition adv(spec, 1);
    adv.set_corrupt({NodeId::server(1)});

    ServerNode node(NodeId::server(1), AlgoKnobs{});
    node.core().boot_initial({NodeId::server(1)});
    adv.observe_delivery(NodeId::server(1), update_from(NodeId::client(1), "v", 1));
    adv.observe_delivery(NodeId::server(1), update_from(NodeId::client(1), "w", 2));
    node.on_receive(update_from(NodeId::client(1), "v", 1));
    node.on_receive(update_from(NodeId::client(1), "w", 2));
    REQUIRE(node.core().known_writes.self_snapshot().count == 2);

    Emission reply;
    reply.kind = MsgKind::Reply;
    reply.scope = Scope::ToClients;
    reply.payload.kw = node.core().known_writes.self_snapshot();
    Envelope trigger;
    trigger.kind = MsgKind::Query;
    trigger.sender = NodeId::client(1);
    auto out = adv.rewrite(node, trigger, {reply}, 0);
    REQUIRE(out.size() == 1);
    REQUIRE(out[0].payload.kw.count == 1);
    CHECK((*out[0].payload.kw.items)[0].ts.num == 1);
}

TEST_CASE("equivocate turns a broadcast reply into diverging unicasts") {
    auto adv = coalition(StrategyKind::Equivocate);
    ServerNode node(NodeId::server(1), AlgoKnobs{});
    adv.observe_delivery(NodeId::server(1), update_from(NodeId::client(1), "v", 1));
    adv.observe_delivery(NodeId::server(1), update_from(NodeId::client(2), "w", 2));
    Envelope trigger;
    trigger.kind = MsgKind::Query;
    trigger.sender = NodeId::client(1);
    auto out = adv.rewrite(node, trigger, honest_reply(), 0);
    REQUIRE(out.size() == 2);  // one unicast per known client
    for (const auto& e : out) CHECK(e.scope == Scope::Unicast);
    CHECK(out[0].unicast_to != out[1].unicast_to);
    // contents diverge but writer ids stay genuine
    REQUIRE(out[0].payload.kw.count == out[1].payload.kw.count);
    bool differs = false;
    for (uint32_t i = 0; i < out[0].payload.kw.count; ++i) {
        const ValueTs& a = (*out[0].payload.kw.items)[i];
        const ValueTs& b = (*out[1].payload.kw.items)[i];
        if (!(a == b)) differs = true;
        CHECK(a.ts.w_id == b.ts.w_id);
    }
    CHECK(differs);
}

TEST_CASE("corrupt-num entries survive validation thanks to genuine writer ids") {
    auto adv = coalition(StrategyKind::CorruptNum);
    ServerNode node(NodeId::server(1), AlgoKnobs{});
    adv.observe_delivery(NodeId::server(1), update_from(NodeId::client(1), "v", 1));
    Envelope trigger;
    trigger.kind = MsgKind::Query;
    trigger.sender = NodeId::client(1);
    auto out = adv.rewrite(node, trigger, honest_reply(), 0);
    REQUIRE(out.size() == 1);
    REQUIRE(out[0].payload.kw.count == 3);  // the fabricated entry is appended
    CHECK((*out[0].payload.kw.items)[2].ts.num >= 1000000);
}

TEST_CASE("fake-joined claims joined on echoes and announces early") {
    auto adv = coalition(StrategyKind::FakeJoined);
    ServerNode node(NodeId::server(9), AlgoKnobs{});
    node.on_enter();  // not joined
    Emission echo;
    echo.kind = MsgKind::EnterEcho;
    echo.scope = Scope::ToServers;
    echo.payload.joined_flag = false;
    echo.payload.target = NodeId::server(2);
    Envelope trigger;
    trigger.kind = MsgKind::Enter;
    trigger.sender = NodeId::server(2);
    auto out = adv.rewrite(node, trigger, {echo}, 0);
    REQUIRE(out.size() == 2);
    CHECK(out[0].kind == MsgKind::Joined);
    CHECK(out[1].payload.joined_flag);
}

TEST_CASE("post-leave-reply announces a leave once and keeps answering") {
    auto adv = coalition(StrategyKind::PostLeaveReply);
    ServerNode node(NodeId::server(1), AlgoKnobs{});
    Envelope trigger;
    trigger.kind = MsgKind::Query;
    trigger.sender = NodeId::client(1);
    adv.observe_delivery(NodeId::server(1), update_from(NodeId::client(1), "v", 1));
    adv.observe_delivery(NodeId::server(1), update_from(NodeId::client(1), "w", 2));
    auto first = adv.rewrite(node, trigger, honest_reply(), 0);
    REQUIRE(first.size() == 2);
    CHECK(first[0].kind == MsgKind::Leave);
    CHECK(first[1].kind == MsgKind::Reply);
    auto second = adv.rewrite(node, trigger, honest_reply(), 1);
    REQUIRE(second.size() == 1);
    CHECK(second[0].kind == MsgKind::Reply);
}
