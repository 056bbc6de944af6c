#include "conflict_radar/agent.hpp"

#include "support/fault_injection.hpp"

#include <gtest/gtest.h>

using namespace conflict_radar;
using namespace conflict_radar::testing;

namespace {

const std::string kZoo = "class Zoo {\n    int aField;\n    void feed(int n) { }\n}\n";

WorkspaceAgent fresh(const std::map<std::string, std::string> &baseline, std::uint64_t rev = 1)
{
    WorkspaceAgent agent("zoo", "alice");
    agent.reset(RevisionStamp{rev}, baseline);
    agent.on_burst({}, 0); // the announce after reset
    return agent;
}

} // namespace

TEST(Agent, AnnouncesOnceAfterReset)
{
    WorkspaceAgent agent("zoo", "alice");
    agent.reset(RevisionStamp{2}, {{"Zoo.java", kZoo}});
    const BurstResult first = agent.on_burst({}, 0);
    EXPECT_EQ(first.outcome, BurstOutcome::Published);
    ASSERT_TRUE(first.delta);
    EXPECT_TRUE(first.delta->changes.empty());
    EXPECT_EQ(first.delta->baseRevision, RevisionStamp{2});
    EXPECT_EQ(agent.on_burst({}, 0).outcome, BurstOutcome::Idle);
    EXPECT_EQ(agent.on_burst({{"Zoo.java", kZoo}}, 0).outcome, BurstOutcome::Idle);
}

TEST(Agent, PublishesFieldRename)
{
    WorkspaceAgent agent = fresh({{"Zoo.java", kZoo}});
    std::string renamed = kZoo;
    renamed.replace(renamed.find("aField"), 6, "theField");
    const BurstResult r = agent.on_burst({{"Zoo.java", renamed}}, 42);
    ASSERT_EQ(r.outcome, BurstOutcome::Published);
    ASSERT_EQ(r.delta->changes.size(), 1u);
    const SemanticChange &c = r.delta->changes[0];
    EXPECT_EQ(c.kind, ChangeKind::FieldRenamed);
    EXPECT_EQ(render_path_id(c.path), "zoo/Zoo.java/Zoo/aField");
    EXPECT_EQ(c.oldValue, "aField");
    EXPECT_EQ(c.newValue, "theField");
    EXPECT_EQ(c.atMillis, 42);
    EXPECT_EQ(c.author, "alice");
    EXPECT_EQ(agent.local().changes.size(), 1u);
}

TEST(Agent, SyntaxErrorIsHeld)
{
    WorkspaceAgent agent = fresh({{"Zoo.java", kZoo}});
    const BurstResult r = agent.on_burst({{"Zoo.java", "class Zoo {\n    int aField\n}\n"}}, 0);
    EXPECT_EQ(r.outcome, BurstOutcome::Held);
    EXPECT_FALSE(r.delta);
    ASSERT_EQ(r.errors.count("Zoo.java"), 1u);
    EXPECT_EQ(r.errors.at("Zoo.java").rfind("3:1: ", 0), 0u) << r.errors.at("Zoo.java");
    EXPECT_EQ(agent.held(), std::set<std::string>{"Zoo.java"});
    EXPECT_TRUE(agent.local().changes.empty());
}

TEST(Agent, HeldFileBlocksOtherFilesToo)
{
    WorkspaceAgent agent = fresh({{"Zoo.java", kZoo}, {"Cage.java", "class Cage { int size; }\n"}});
    const BurstResult r = agent.on_burst(
        {{"Zoo.java", "class Zoo {"}, {"Cage.java", "class Cage { long size; }\n"}}, 0);
    EXPECT_EQ(r.outcome, BurstOutcome::Held);
    // Fixing Zoo releases Cage's edit as well.
    const BurstResult fixed = agent.on_burst({{"Zoo.java", kZoo}}, 0);
    ASSERT_EQ(fixed.outcome, BurstOutcome::Published);
    ASSERT_EQ(fixed.delta->changes.size(), 1u);
    EXPECT_EQ(fixed.delta->changes[0].kind, ChangeKind::FieldTypeChanged);
    EXPECT_TRUE(agent.held().empty());
}

TEST(Agent, HeldThenFixedEqualsOneBurst)
{
    const std::string v1 = "class Zoo {\n    long aField;\n    void feed(int n) { n++; }\n}\n";
    const std::string broken = "class Zoo {\n    long aField;\n    void feed(int n) { n++; \n}\n";
    const std::string v2 = "class Zoo {\n    long aField = 3;\n    void feed(int n) { n += 2; }\n}\n";

    WorkspaceAgent stepwise = fresh({{"Zoo.java", kZoo}});
    stepwise.on_burst({{"Zoo.java", v1}}, 0);
    EXPECT_EQ(stepwise.on_burst({{"Zoo.java", broken}}, 0).outcome, BurstOutcome::Held);
    stepwise.on_burst({{"Zoo.java", v2}}, 0);

    WorkspaceAgent once = fresh({{"Zoo.java", kZoo}});
    once.on_burst({{"Zoo.java", v2}}, 0);

    EXPECT_EQ(tuples(stepwise.local().changes), tuples(once.local().changes));
    EXPECT_EQ(stepwise.local().changes.size(), 3u);
}

TEST(Agent, RevertPurgesAndReports)
{
    WorkspaceAgent agent = fresh({{"Zoo.java", kZoo}, {"Cage.java", "class Cage { int size; }\n"}});
    agent.on_burst({{"Zoo.java", "class Zoo {\n    int aField;\n    void feed(int n) { n--; }\n}\n"},
                    {"Cage.java", "class Cage { int size = 2; }\n"}},
                   0);
    ASSERT_EQ(agent.local().changes.size(), 2u);
    const BurstResult r = agent.on_burst({{"Zoo.java", kZoo}}, 0);
    EXPECT_EQ(r.reverted, std::vector<std::string>{"Zoo.java"});
    ASSERT_EQ(agent.local().changes.size(), 1u);
    EXPECT_EQ(agent.local().changes[0].path.file, "Cage.java");
    // Restoring again is not a second revert.
    EXPECT_TRUE(agent.on_burst({{"Zoo.java", kZoo}}, 0).reverted.empty());
}

TEST(Agent, WhitespaceOnlyIsNotARevertButPublishesNothing)
{
    WorkspaceAgent agent = fresh({{"Zoo.java", kZoo}});
    const std::string spaced = "class Zoo {\n\n    int   aField;\n    void feed(int n) { }\n}\n";
    const BurstResult r = agent.on_burst({{"Zoo.java", spaced}}, 0);
    EXPECT_TRUE(r.reverted.empty());
    EXPECT_EQ(r.outcome, BurstOutcome::Idle);
    // Cross-check with a direct diff.
    ExtractOptions opts{"zoo", "alice", RevisionStamp{1}, 1, 0};
    EXPECT_TRUE(extract_changes(parse_unit(kZoo, "Zoo.java"), parse_unit(spaced, "Zoo.java"), opts).changes.empty());
}

TEST(Agent, DeletedFileRemovesItsClasses)
{
    WorkspaceAgent agent = fresh({{"Zoo.java", kZoo}});
    const BurstResult r = agent.on_burst({{"Zoo.java", std::nullopt}}, 0);
    ASSERT_EQ(r.outcome, BurstOutcome::Published);
    ASSERT_EQ(r.delta->changes.size(), 1u);
    EXPECT_EQ(r.delta->changes[0].kind, ChangeKind::ElementRemoved);
    EXPECT_EQ(render_path_id(r.delta->changes[0].path), "zoo/Zoo.java/Zoo");
}

TEST(Agent, NewFileAddsItsClasses)
{
    WorkspaceAgent agent = fresh({{"Zoo.java", kZoo}});
    const BurstResult r = agent.on_burst({{"Pen.java", "class Pen { }\n"}}, 0);
    ASSERT_EQ(r.outcome, BurstOutcome::Published);
    ASSERT_EQ(r.delta->changes.size(), 1u);
    EXPECT_EQ(r.delta->changes[0].kind, ChangeKind::ElementAdded);
}

TEST(Agent, PathsStayOnTheBaseRevisionAcrossBursts)
{
    WorkspaceAgent agent = fresh({{"Zoo.java", kZoo}});
    agent.on_burst({{"Zoo.java", "class Zoo {\n    int aField;\n    void nourish(int n) { }\n}\n"}}, 0);
    const BurstResult r =
        agent.on_burst({{"Zoo.java", "class Zoo {\n    int aField;\n    void nourish(int n) { n++; }\n}\n"}}, 0);
    ASSERT_EQ(r.outcome, BurstOutcome::Published);
    ASSERT_EQ(r.delta->changes.size(), 1u);
    EXPECT_EQ(r.delta->changes[0].kind, ChangeKind::MethodBodyChanged);
    EXPECT_EQ(render_path_id(r.delta->changes[0].path), "zoo/Zoo.java/Zoo/feed");
}

TEST(Agent, LocateFollowsLocalRenames)
{
    WorkspaceAgent agent = fresh({{"Zoo.java", kZoo}});
    const std::string renamed = "class Zoo {\n    int aField;\n\n    void nourish(int n) { }\n}\n";
    agent.on_burst({{"Zoo.java", renamed}}, 0);
    SemanticPath base;
    base.project = "zoo";
    base.file = "Zoo.java";
    base.classChain = {"Zoo"};
    base.member = MemberRef{MemberKind::Method, "feed", 1};
    const auto body = agent.locate(base, {ChangeKind::MethodBodyChanged});
    ASSERT_TRUE(body);
    EXPECT_EQ(renamed.substr(body->startByte, body->endByte - body->startByte), "{ }");
    EXPECT_EQ(body->startLine, 4);

    base.param = "n";
    const auto param = agent.locate(base, {ChangeKind::ParamTypeChanged});
    ASSERT_TRUE(param);
    EXPECT_EQ(renamed.substr(param->startByte, param->endByte - param->startByte), "int");
}

TEST(AttributeSpan, PicksTheAttribute)
{
    const std::string src = "class Zoo {\n    private static int count = 4;\n    public String name(int a) { return null; }\n}\n";
    const ElementTree t = parse_unit(src, "Zoo.java");
    auto text = [&](const std::optional<Span> &s) { return s ? src.substr(s->startByte, s->endByte - s->startByte) : "-"; };
    SemanticPath f;
    f.file = "Zoo.java";
    f.classChain = {"Zoo"};
    f.member = MemberRef{MemberKind::Field, "count", 0};
    EXPECT_EQ(text(attribute_span(t, f, {ChangeKind::FieldTypeChanged})), "int");
    EXPECT_EQ(text(attribute_span(t, f, {ChangeKind::FieldValueChanged})), "4");
    EXPECT_EQ(text(attribute_span(t, f, {ChangeKind::FieldRenamed})), "count");
    EXPECT_EQ(text(attribute_span(t, f, {ChangeKind::FieldAccessibilityChanged})), "private");
    EXPECT_EQ(text(attribute_span(t, f, {ChangeKind::FieldTypeChanged, ChangeKind::FieldRenamed})),
              "private static int count = 4;");
    SemanticPath m = f;
    m.member = MemberRef{MemberKind::Method, "name", 1};
    EXPECT_EQ(text(attribute_span(t, m, {ChangeKind::MethodReturnTypeChanged})), "String");
    EXPECT_EQ(text(attribute_span(t, m, {ChangeKind::MethodBodyChanged})), "{ return null; }");
    EXPECT_EQ(text(attribute_span(t, m, {ChangeKind::MethodRenamed})), "name");
    m.param = "a";
    EXPECT_EQ(text(attribute_span(t, m, {ChangeKind::ParamRenamed})), "a");
    m.param = "gone";
    EXPECT_EQ(text(attribute_span(t, m, {ChangeKind::ParamRemoved})), "(int a)");
    SemanticPath missing = f;
    missing.member = MemberRef{MemberKind::Field, "nothere", 0};
    EXPECT_EQ(text(attribute_span(t, missing, {ChangeKind::ElementRemoved})), "Zoo");
}

// Random valid edits interleaved with injected syntax errors. Nothing may
// leave the agent while a touched file is broken, and every publish must
// agree with a from-scratch diff of the last published and current trees.
TEST(AgentProperty, GateSoundnessUnderFaultInjection)
{
    const FaultStats st = run_fault_injection(0x5eed, 150);
    RecordProperty("faults", st.faults);
    RecordProperty("publishes", st.publishes);
    EXPECT_GE(st.faults, 100);
    EXPECT_GT(st.publishes, 50);
    EXPECT_EQ(st.publishesWhileBroken, 0);
    EXPECT_EQ(st.heldWhileSound, 0);
    EXPECT_EQ(st.disagreements, 0);
}
