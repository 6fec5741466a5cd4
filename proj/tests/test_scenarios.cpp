// Builtin scenario catalog: every leaky scenario leaks exactly the expected
// (kind, site) set; every fixed variant runs clean; leak sets are
// seed-independent; the range linter behaves on the corpus.
#include <gtest/gtest.h>

#include <map>

#include "leakscope/checker.hpp"
#include "leakscope/lint.hpp"
#include "leakscope/runtime.hpp"
#include "leakscope/scenarios.hpp"
#include "test_util.hpp"

using namespace leakscope;

namespace {

std::map<std::pair<BlockKind, SourceLoc>, std::int64_t> run_scenario_sites(const Scenario& s,
                                                                           std::uint64_t seed) {
    SchedulerConfig cfg = s.config;
    cfg.seed = seed;
    RunResult r = run(s.program, cfg, s.defaults);
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent) << s.name;
    return lingering_sites(r.tasks);
}

} // namespace

TEST(Scenarios, CatalogContainsTheCorePatternsAndFixes) {
    const char* required[] = {
        "premature-return", "timeout-leak",    "ncast",           "double-send",
        "unclosed-range",   "timer-loop",      "method-contract", "zero-case-select",
    };
    for (const char* name : required) {
        const Scenario* leaky = find_scenario(name);
        ASSERT_NE(leaky, nullptr) << name;
        EXPECT_TRUE(leaky->core);
        EXPECT_TRUE(leaky->expect.leaky);
        const Scenario* fixed = find_scenario(std::string(name) + "-fixed");
        ASSERT_NE(fixed, nullptr) << name;
        EXPECT_FALSE(fixed->expect.leaky);
        EXPECT_EQ(fixed->fixes, name);
    }
}

TEST(Scenarios, LeakyScenariosLeakExactlyTheExpectedSites) {
    for (const Scenario& s : builtin_scenarios()) {
        if (!s.expect.leaky)
            continue;
        auto actual = run_scenario_sites(s, s.config.seed);
        auto expected = expected_sites(s, s.defaults);
        EXPECT_EQ(actual, expected) << s.name;
    }
}

TEST(Scenarios, FixedVariantsRunClean) {
    for (const Scenario& s : builtin_scenarios()) {
        if (s.expect.leaky)
            continue;
        RunResult r = run(s.program, s.config, s.defaults);
        EXPECT_EQ(r.outcome, RunOutcome::Quiescent) << s.name;
        EXPECT_EQ(testutil::count_not_done(r.tasks), 0) << s.name;
    }
}

TEST(Scenarios, LeakSetsAreSeedIndependent) {
    for (const Scenario& s : builtin_scenarios()) {
        auto base = run_scenario_sites(s, 1);
        for (std::uint64_t seed : {7ull, 42ull, 12345ull})
            EXPECT_EQ(run_scenario_sites(s, seed), base) << s.name << " seed " << seed;
    }
}

TEST(Scenarios, NcastLeaksExactlyNMinusOne) {
    const Scenario* s = find_scenario("ncast");
    ASSERT_NE(s, nullptr);
    for (std::int64_t n : {1, 2, 5, 50}) {
        RunOptions opts = s->defaults;
        opts.params["n"] = n;
        RunResult r = run(s->program, s->config, opts);
        auto sites = lingering_sites(r.tasks);
        if (n == 1) {
            EXPECT_TRUE(sites.empty()) << "n=1";
        } else {
            ASSERT_EQ(sites.size(), 1u) << "n=" << n;
            const auto& [key, count] = *sites.begin();
            EXPECT_EQ(key.first, BlockKind::ChanSend);
            EXPECT_EQ(key.second.str(), "ncast.go:4");
            EXPECT_EQ(count, n - 1);
        }
    }
}

TEST(Scenarios, TimeoutLeakTimingMatchesTheStory) {
    // Cancellation at tick 1, worker send at tick 2: exactly one blocked send.
    const Scenario* s = find_scenario("timeout-leak");
    ASSERT_NE(s, nullptr);
    EXPECT_EQ(s->defaults.params.at("cancel_at"), 1);
    EXPECT_EQ(s->defaults.params.at("work_delay"), 2);
    RunResult r = run(s->program, s->config, s->defaults);
    EXPECT_EQ(testutil::count_status(r.tasks, TaskStatus::BlockedSend), 1);
    EXPECT_EQ(testutil::count_not_done(r.tasks), 1);
}

TEST(Scenarios, TimerLoopIsAnAntiPatternFinding) {
    const Scenario* s = find_scenario("timer-loop");
    ASSERT_NE(s, nullptr);
    EXPECT_TRUE(s->expect.anti_pattern);
    RunResult r = run(s->program, s->config, s->defaults);
    const Task* t = testutil::task_with_status(r.tasks, TaskStatus::BlockedRecv);
    ASSERT_NE(t, nullptr);
    EXPECT_EQ(t->blocking_site->str(), "stats.go:5");
}

TEST(Scenarios, FixtureFilesMatchEmbeddedText) {
    for (const Scenario& s : builtin_scenarios()) {
        std::string on_disk = testutil::read_file(testutil::fixture_dir() / "scenarios" / s.file);
        EXPECT_EQ(on_disk, s.text) << s.file;
    }
}

// ---- range linter ----

TEST(Lint, FlagsTheUnclosedRangeScenario) {
    const Scenario* s = find_scenario("unclosed-range");
    ASSERT_NE(s, nullptr);
    auto findings = range_lint(s->program);
    ASSERT_EQ(findings.size(), 1u);
    EXPECT_EQ(findings[0].chan, "ch");
    EXPECT_EQ(findings[0].range_site.str(), "pc.go:6");
}

TEST(Lint, SilentOnTheCloseAddedFix) {
    const Scenario* s = find_scenario("unclosed-range-fixed");
    ASSERT_NE(s, nullptr);
    EXPECT_TRUE(range_lint(s->program).empty());
}

TEST(Lint, CloseOnAnyPathSuffices) {
    // The close sits inside a conditional branch: may-close, so no finding.
    SimProgram p = load_program(
        "entry {\n"
        "  make ch cap=0\n"
        "  spawn {\n"
        "    range ch {\n"
        "    }\n"
        "  }\n"
        "  if done {\n"
        "    close ch\n"
        "  }\n"
        "}\n",
        "maybe.cir");
    EXPECT_TRUE(range_lint(p).empty());
}

TEST(Lint, ZeroFindingsAcrossAllFixedVariants) {
    for (const Scenario& s : builtin_scenarios()) {
        if (s.expect.leaky)
            continue;
        EXPECT_TRUE(range_lint(s.program).empty()) << s.name;
    }
}

TEST(Lint, EmptyProgramIsClean) {
    SimProgram p = load_program("entry {\n}\n", "empty.cir");
    EXPECT_TRUE(range_lint(p).empty());
}

TEST(Lint, NeverFlagsAChannelWithASyntacticClose) {
    // Property: rearranging where the close appears (branch, loop, other
    // function) never produces a finding for the ranged channel.
    const char* shapes[] = {
        "entry {\n  make ch cap=0\n  spawn {\n    range ch {\n    }\n  }\n  close ch\n}\n",
        "entry {\n  make ch cap=0\n  spawn {\n    range ch {\n    }\n  }\n"
        "  if x {\n  } else {\n    close ch\n  }\n}\n",
        "entry {\n  make ch cap=0\n  spawn {\n    range ch {\n    }\n  }\n"
        "  loop 2 {\n    close ch\n  }\n}\n",
        "entry {\n  make ch cap=0\n  spawn {\n    range ch {\n    }\n  }\n  call shutdown\n}\n"
        "func shutdown {\n  close ch\n}\n",
    };
    for (const char* text : shapes) {
        SimProgram p = load_program(text, "shape.cir");
        EXPECT_TRUE(range_lint(p).empty()) << text;
    }
}
