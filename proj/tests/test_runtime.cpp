// Channel-runtime semantics: blocking rules, select, close, timers, and the
// simulator-wide invariants (determinism, conservation, quiescence soundness).
#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>
#include <string>

#include "leakscope/parser.hpp"
#include "leakscope/runtime.hpp"
#include "test_util.hpp"

using namespace leakscope;
using testutil::count_not_done;
using testutil::count_status;
using testutil::find_event;

namespace {

RunResult run_text(const std::string& text, RunOptions opts = {}, SchedulerConfig cfg = {}) {
    static std::vector<SimProgram> keep; // programs must outlive nothing here, but keep anyway
    keep.push_back(load_program(text, "test.cir"));
    return run(keep.back(), cfg, opts);
}

} // namespace

TEST(Channels, UnbufferedStartsEmptyAndOpen) {
    RunResult r = run_text("entry main {\n  make ch cap=0\n}\n");
    ASSERT_EQ(r.channels.size(), 1u);
    EXPECT_EQ(r.channels[0].capacity, 0);
    EXPECT_TRUE(r.channels[0].buffer.empty());
    EXPECT_FALSE(r.channels[0].closed);
    EXPECT_FALSE(r.channels[0].is_nil);
}

TEST(Channels, CapacityOneBuffered) {
    RunResult r = run_text("entry main {\n  make ch cap=1\n  send ch\n}\n");
    EXPECT_EQ(r.channels[0].capacity, 1);
    EXPECT_EQ(r.channels[0].buffer.size(), 1u);
    EXPECT_TRUE(r.tasks[0].status == TaskStatus::Done);
}

TEST(Channels, BufferAbsorbsAllSendsWithoutReceiver) {
    // Five sends into capacity five: every send completes.
    RunResult r = run_text(
        "entry main {\n  make ch cap=5\n  loop 5 {\n    send ch\n  }\n}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    EXPECT_EQ(r.tasks[0].status, TaskStatus::Done);
    EXPECT_EQ(r.channels[0].buffer.size(), 5u);
    EXPECT_EQ(r.channels[0].sends_completed, 5);
}

TEST(Send, RendezvousUnblocksBothAndDeliversValue) {
    RunResult r = run_text(
        "entry main {\n"
        "  make ch cap=0\n"
        "  spawn {\n"
        "    recv ch\n"
        "  }\n"
        "  sleep 1\n" // let the receiver park first
        "  send ch 42\n"
        "}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    EXPECT_EQ(count_not_done(r.tasks), 0);
    EXPECT_EQ(r.channels[0].sends_completed, 1);
    EXPECT_EQ(r.channels[0].receives_completed, 1);
    EXPECT_NE(find_event(r.trace, {"op=send", "paired="}), nullptr);
}

TEST(Send, NoReceiverEverLeaksBlockedSend) {
    RunResult r = run_text(
        "entry main {\n"
        "  make ch cap=0\n"
        "  spawn {\n"
        "    send ch @ leak.go:3\n"
        "  }\n"
        "}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    const Task* t = testutil::task_with_status(r.tasks, TaskStatus::BlockedSend);
    ASSERT_NE(t, nullptr);
    ASSERT_TRUE(t->blocking_site.has_value());
    EXPECT_EQ(t->blocking_site->str(), "leak.go:3");
}

TEST(Send, NilChannelBlocksForever) {
    RunResult r = run_text("entry main {\n  nilchan ch\n  send ch\n}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    ASSERT_EQ(r.tasks[0].status, TaskStatus::BlockedSend);
    EXPECT_TRUE(r.tasks[0].blocked_on_nil);
}

TEST(Send, OnClosedChannelPanics) {
    RunResult r = run_text("entry main {\n  make ch cap=1\n  close ch\n  send ch\n}\n");
    EXPECT_EQ(r.tasks[0].status, TaskStatus::Done);
    EXPECT_TRUE(r.tasks[0].panicked);
    EXPECT_NE(find_event(r.trace, {"op=panic", "send on closed channel"}), nullptr);
}

TEST(Recv, ClosedEmptyChannelReturnsImmediately) {
    RunResult r = run_text("entry main {\n  make ch cap=0\n  close ch\n  recv ch\n}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    EXPECT_EQ(r.tasks[0].status, TaskStatus::Done);
    EXPECT_FALSE(r.tasks[0].panicked);
}

TEST(Recv, OpenEmptyChannelBlocks) {
    RunResult r = run_text("entry main {\n  make ch cap=0\n  recv ch @ leak.go:9\n}\n");
    ASSERT_EQ(r.tasks[0].status, TaskStatus::BlockedRecv);
    EXPECT_EQ(r.tasks[0].blocking_site->str(), "leak.go:9");
}

TEST(Recv, BufferIsFifo) {
    RunResult r = run_text(
        "entry main {\n"
        "  make ch cap=2\n"
        "  send ch 7\n"
        "  send ch 9\n"
        "  recv ch\n"
        "  recv ch\n"
        "}\n");
    EXPECT_EQ(r.tasks[0].status, TaskStatus::Done);
    // First receive sees 7, second sees 9.
    ASSERT_NE(find_event(r.trace, {"op=recv", "value=7"}), nullptr);
    ASSERT_NE(find_event(r.trace, {"op=recv", "value=9"}), nullptr);
    EXPECT_LT(find_event(r.trace, {"op=recv", "value=7"})->step,
              find_event(r.trace, {"op=recv", "value=9"})->step);
}

TEST(Recv, NilChannelBlocksForever) {
    RunResult r = run_text("entry main {\n  nilchan ch\n  recv ch\n}\n");
    ASSERT_EQ(r.tasks[0].status, TaskStatus::BlockedRecv);
    EXPECT_TRUE(r.tasks[0].blocked_on_nil);
}

TEST(Select, OnlyReadyArmChosen) {
    // ch1 has a buffered value (recv ready); ch2 is full (send blocked).
    RunResult r = run_text(
        "entry main {\n"
        "  make ch1 cap=1\n"
        "  make ch2 cap=0\n"
        "  send ch1\n"
        "  select {\n"
        "    recv ch1\n"
        "    send ch2\n"
        "  }\n"
        "}\n");
    EXPECT_EQ(r.tasks[0].status, TaskStatus::Done);
    EXPECT_NE(find_event(r.trace, {"op=select", "arm=0", "ready=1"}), nullptr);
}

TEST(Select, ZeroArmsBlocksForever) {
    RunResult r = run_text("entry main {\n  select { @ z.go:2\n  }\n}\n");
    ASSERT_EQ(r.tasks[0].status, TaskStatus::BlockedSelect);
    EXPECT_EQ(r.tasks[0].blocking_site->str(), "z.go:2");
    EXPECT_NE(find_event(r.trace, {"op=select", "blocked=forever", "arms=0"}), nullptr);
}

TEST(Select, DefaultKeepsTaskRunning) {
    RunResult r = run_text(
        "entry main {\n"
        "  make ch cap=0\n"
        "  make flag cap=1\n"
        "  select {\n"
        "    recv ch\n"
        "    default {\n"
        "      send flag\n"
        "    }\n"
        "  }\n"
        "}\n");
    EXPECT_EQ(r.tasks[0].status, TaskStatus::Done);
    EXPECT_EQ(r.channels[1].buffer.size(), 1u); // default body executed
    EXPECT_NE(find_event(r.trace, {"op=select", "default"}), nullptr);
}

TEST(Select, SingleArmDesugarsToBareOperation) {
    SimProgram p = load_program(
        "entry main {\n"
        "  make ch cap=0\n"
        "  select {\n"
        "    recv ch @ one.go:3\n"
        "  }\n"
        "}\n",
        "test.cir");
    // After load, the select is gone; the statement is a plain receive.
    const Function& fn = p.functions.at("main");
    ASSERT_EQ(fn.body.size(), 2u);
    EXPECT_EQ(fn.body[1].kind, StmtKind::Recv);
    EXPECT_EQ(fn.body[1].loc.str(), "one.go:3");
}

TEST(Close, WakesAllRangeReceivers) {
    RunResult r = run_text(
        "entry main {\n"
        "  make ch cap=0\n"
        "  loop 3 {\n"
        "    spawn {\n"
        "      range ch {\n"
        "      }\n"
        "    }\n"
        "  }\n"
        "  sleep 1\n"
        "  close ch\n"
        "}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    EXPECT_EQ(count_not_done(r.tasks), 0);
    EXPECT_EQ(count_status(r.tasks, TaskStatus::BlockedRecv), 0);
}

TEST(Close, DoubleCloseIsPanic) {
    RunResult r = run_text("entry main {\n  make ch cap=0\n  close ch\n  close ch\n}\n");
    EXPECT_TRUE(r.tasks[0].panicked);
    EXPECT_NE(find_event(r.trace, {"op=panic", "close of closed channel"}), nullptr);
}

TEST(Close, NilClosePanics) {
    RunResult r = run_text("entry main {\n  nilchan ch\n  close ch\n}\n");
    EXPECT_TRUE(r.tasks[0].panicked);
    EXPECT_NE(find_event(r.trace, {"op=panic", "close of nil channel"}), nullptr);
}

TEST(Close, BlockedSenderPanicsOnClose) {
    RunResult r = run_text(
        "entry main {\n"
        "  make ch cap=0\n"
        "  spawn {\n"
        "    send ch\n"
        "  }\n"
        "  sleep 1\n"
        "  close ch\n"
        "}\n");
    EXPECT_EQ(count_not_done(r.tasks), 0);
    ASSERT_EQ(r.tasks.size(), 2u);
    EXPECT_TRUE(r.tasks[1].panicked);
    // The killed send never counts as a delivered message.
    EXPECT_EQ(r.channels[0].sends_completed, 0);
}

TEST(Spawn, ChildOutlivesParent) {
    RunResult r = run_text(
        "entry main {\n"
        "  make ch cap=1\n"
        "  spawn {\n"
        "    sleep 5\n"
        "    send ch\n"
        "  }\n"
        "}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    EXPECT_EQ(count_not_done(r.tasks), 0);     // child finished after parent
    EXPECT_EQ(r.channels[0].buffer.size(), 1u); // and its send completed
}

TEST(Spawn, DistinctIdsAndCreationSites) {
    RunResult r = run_text(
        "entry main {\n"
        "  loop 4 {\n"
        "    spawn {  @ spawnsite.go:3\n"
        "      return\n"
        "    }\n"
        "  }\n"
        "}\n");
    std::set<TaskId> ids;
    for (const Task& t : r.tasks)
        ids.insert(t.id);
    EXPECT_EQ(ids.size(), 5u); // root + 4 children, all distinct
    for (const Task& t : r.tasks) {
        if (t.id != 1) {
            EXPECT_EQ(t.creation_site.str(), "spawnsite.go:3");
        }
    }
}

TEST(Run, EmptyEntryQuiescesImmediately) {
    RunResult r = run_text("entry main {\n}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    EXPECT_EQ(count_not_done(r.tasks), 0);
    EXPECT_EQ(r.channels.size(), 0u);
}

TEST(Run, StepBoundDistinguishesLivelock) {
    SchedulerConfig cfg;
    cfg.max_steps = 100;
    RunResult r = run_text("entry main {\n  loop forever {\n    sleep 0\n  }\n}\n", {}, cfg);
    EXPECT_EQ(r.outcome, RunOutcome::BoundExceeded);
}

TEST(Timers, SleepWakesAfterTicks) {
    SimProgram p = load_program("entry main {\n  sleep 5\n  make ch cap=0\n}\n", "t.cir");
    Simulator sim(p);
    while (sim.step())
        ;
    EXPECT_EQ(sim.tasks()[0].status, TaskStatus::Sleeping);
    EXPECT_TRUE(sim.advance_time());
    EXPECT_EQ(sim.now(), 5);
    EXPECT_EQ(sim.tasks()[0].status, TaskStatus::Runnable);
}

TEST(Timers, AfterDeliversOnSchedule) {
    RunResult r = run_text("entry main {\n  after t 7\n  recv t\n}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    EXPECT_EQ(r.tasks[0].status, TaskStatus::Done);
    EXPECT_EQ(r.final_time, 7);
    EXPECT_EQ(r.channels[0].capacity, 1);
    EXPECT_EQ(r.channels[0].origin, "time.After");
}

TEST(Timers, UntimedIOWaitLingersAtQuiescence) {
    RunResult r = run_text("entry main {\n  spawn {\n    iowait @ io.go:2\n  }\n}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    const Task* t = testutil::task_with_status(r.tasks, TaskStatus::IOWait);
    ASSERT_NE(t, nullptr);
    EXPECT_EQ(t->blocking_site->str(), "io.go:2");
}

TEST(Timers, CondWaitAndSemaphore) {
    RunResult r = run_text(
        "entry main {\n"
        "  spawn {\n"
        "    condwait tok\n"
        "  }\n"
        "  spawn {\n"
        "    semacquire sem\n"
        "  }\n"
        "  sleep 1\n"
        "  signal tok\n"
        "  sempost sem\n"
        "}\n");
    EXPECT_EQ(count_not_done(r.tasks), 0);
}

// ---- simulator-wide invariants ----

namespace {

void check_conservation(const RunResult& r) {
    for (const ChannelState& ch : r.channels) {
        std::int64_t blocked_senders = static_cast<std::int64_t>(ch.send_waiters.size());
        std::int64_t sent = ch.messages_sent();
        std::int64_t received = ch.receives_completed;
        std::int64_t buffered = static_cast<std::int64_t>(ch.buffer.size());
        EXPECT_EQ(sent, received + buffered + blocked_senders)
            << "conservation violated on channel " << ch.id;
    }
}

void check_quiescence_soundness(const RunResult& r) {
    for (const Task& t : r.tasks) {
        if (t.status == TaskStatus::Done)
            continue;
        EXPECT_TRUE(is_blocked_status(t.status))
            << "task " << t.id << " lingering with status " << status_name(t.status);
        EXPECT_TRUE(t.blocking_site.has_value());
    }
}

// Random pipelines: workers doing random channel operations. Exercises the
// runtime far from the curated scenarios.
std::string random_program(std::mt19937& gen) {
    auto pick = [&](int n) { return static_cast<int>(gen() % static_cast<unsigned>(n)); };
    int nchan = 1 + pick(3);
    int nworker = 1 + pick(4);
    std::string text = "entry main {\n";
    for (int c = 0; c < nchan; ++c)
        text += "  make ch" + std::to_string(c) + " cap=" + std::to_string(pick(3)) + "\n";
    for (int w = 0; w < nworker; ++w) {
        text += "  spawn {\n";
        int nops = 1 + pick(4);
        for (int i = 0; i < nops; ++i) {
            int c = pick(nchan);
            switch (pick(3)) {
            case 0: text += "    send ch" + std::to_string(c) + "\n"; break;
            case 1: text += "    recv ch" + std::to_string(c) + "\n"; break;
            case 2: text += "    sleep " + std::to_string(pick(3)) + "\n"; break;
            }
        }
        text += "  }\n";
    }
    int nops = pick(4);
    for (int i = 0; i < nops; ++i) {
        int c = pick(nchan);
        text += pick(2) == 0 ? "  send ch" + std::to_string(c) + "\n"
                             : "  recv ch" + std::to_string(c) + "\n";
    }
    if (pick(2) == 0)
        text += "  close ch0\n";
    text += "}\n";
    return text;
}

} // namespace

TEST(Invariants, ConservationAndSoundnessOnRandomPipelines) {
    std::mt19937 gen(20240314);
    for (int iter = 0; iter < 200; ++iter) {
        std::string text = random_program(gen);
        SimProgram prog = load_program(text, "rand.cir");
        SchedulerConfig cfg;
        cfg.seed = iter + 1;
        cfg.max_steps = 20000;
        RunResult r = run(prog, cfg);
        check_conservation(r);
        if (r.outcome == RunOutcome::Quiescent)
            check_quiescence_soundness(r);
        // Unbuffered rendezvous pairing: completed sends == completed receives.
        for (const ChannelState& ch : r.channels) {
            EXPECT_LE(static_cast<int>(ch.buffer.size()), ch.capacity);
            if (ch.capacity == 0 && !ch.closed) {
                EXPECT_EQ(ch.sends_completed, ch.receives_completed);
            }
        }
    }
}

TEST(Invariants, DeterministicTraceAndTaskTable) {
    std::mt19937 gen(99);
    for (int iter = 0; iter < 25; ++iter) {
        std::string text = random_program(gen);
        SimProgram prog = load_program(text, "rand.cir");
        SchedulerConfig cfg;
        cfg.seed = 7;
        Simulator a(prog, cfg), b(prog, cfg);
        a.run();
        b.run();
        EXPECT_EQ(a.render_trace(), b.render_trace());
        EXPECT_EQ(a.render_task_table(), b.render_task_table());
    }
}

TEST(Invariants, SelectFairnessOverSeeds) {
    // Two simultaneously ready arms; over many seeds each side must win at
    // least 30% of the time.
    SimProgram prog = load_program(
        "entry main {\n"
        "  make a cap=1\n"
        "  make b cap=1\n"
        "  send a\n"
        "  select {\n"
        "    recv a\n"
        "    send b\n"
        "  }\n"
        "}\n",
        "fair.cir");
    int arm0 = 0, arm1 = 0;
    const int runs = 10000;
    for (int seed = 0; seed < runs; ++seed) {
        SchedulerConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(seed);
        RunResult r = run(prog, cfg);
        if (find_event(r.trace, {"op=select", "arm=0"}))
            arm0++;
        else if (find_event(r.trace, {"op=select", "arm=1"}))
            arm1++;
    }
    EXPECT_EQ(arm0 + arm1, runs);
    EXPECT_GE(arm0, runs * 3 / 10);
    EXPECT_GE(arm1, runs * 3 / 10);
}

TEST(Invariants, CloseWakeAllNoBlockedRecvRemains) {
    RunResult r = run_text(
        "entry main {\n"
        "  make ch cap=0\n"
        "  loop 5 {\n"
        "    spawn {\n"
        "      recv ch\n"
        "    }\n"
        "  }\n"
        "  sleep 1\n"
        "  close ch\n"
        "}\n");
    EXPECT_EQ(count_status(r.tasks, TaskStatus::BlockedRecv), 0);
    EXPECT_EQ(count_not_done(r.tasks), 0);
}

TEST(Select, SendArmOnClosedChannelPanics) {
    RunResult r = run_text(
        "entry main {\n"
        "  make ch cap=1\n"
        "  make ch2 cap=0\n"
        "  close ch\n"
        "  select {\n"
        "    send ch\n"
        "    send ch2\n"
        "  }\n"
        "}\n");
    EXPECT_TRUE(r.tasks[0].panicked);
    EXPECT_NE(find_event(r.trace, {"op=panic", "send on closed channel"}), nullptr);
}

TEST(Run, PanicsAndLeaksCoexist) {
    // One task double-closes (panic); an unrelated sender still leaks.
    RunResult r = run_text(
        "entry main {\n"
        "  make ch cap=0\n"
        "  make dup cap=0\n"
        "  spawn {\n"
        "    send ch @ co.go:4\n"
        "  }\n"
        "  close dup\n"
        "  close dup\n"
        "}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    EXPECT_TRUE(r.tasks[0].panicked);
    const Task* leaker = testutil::task_with_status(r.tasks, TaskStatus::BlockedSend);
    ASSERT_NE(leaker, nullptr);
    EXPECT_EQ(leaker->blocking_site->str(), "co.go:4");
}

TEST(Timers, TimedIOWaitWakes) {
    RunResult r = run_text("entry main {\n  iowait 3\n  syscall 2\n}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    EXPECT_EQ(r.tasks[0].status, TaskStatus::Done);
    EXPECT_EQ(r.final_time, 5);
}

TEST(Config, DefaultsMatchTheContract) {
    SchedulerConfig cfg;
    EXPECT_EQ(cfg.max_steps, 1'000'000);
    EXPECT_EQ(cfg.seed, 1u);
    EXPECT_EQ(cfg.model_time, 0);
}

TEST(Timers, NonPositiveTickPeriodPanics) {
    RunResult r = run_text("entry main {\n  tick t 0\n  recv t\n}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    EXPECT_TRUE(r.tasks[0].panicked);
}

TEST(Timers, ZeroDelayAfterFiresImmediately) {
    RunResult r = run_text("entry main {\n  after t 0\n  recv t\n}\n");
    EXPECT_EQ(r.outcome, RunOutcome::Quiescent);
    EXPECT_EQ(r.tasks[0].status, TaskStatus::Done);
    EXPECT_EQ(r.final_time, 0);
}
