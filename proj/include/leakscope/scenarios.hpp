// Builtin scenario catalog: one channel program per known leak pattern, plus
// a fixed variant of each. Expectations describe exactly which (kind, site)
// pairs must linger at quiescence, checked against the simulator's final task
// table. The IR sources are also checked in under fixtures/scenarios/.
#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "leakscope/parser.hpp"
#include "leakscope/program.hpp"
#include "leakscope/runtime.hpp"
#include "leakscope/types.hpp"

namespace leakscope {

struct ExpectedSite {
    BlockKind kind = BlockKind::Other;
    SourceLoc loc;
    std::function<std::int64_t(const RunOptions&)> count;
};

struct ScenarioExpectation {
    bool leaky = false;
    bool anti_pattern = false; // lingers but would eventually wake again
    std::vector<ExpectedSite> sites;
};

struct Scenario {
    std::string name;
    std::string summary;
    std::string file; // fixture filename under fixtures/scenarios/
    std::string text;
    SimProgram program;
    SchedulerConfig config; // documented defaults (seed, horizon)
    RunOptions defaults;
    ScenarioExpectation expect;
    bool core = false;    // one of the eight canonical patterns
    std::string fixes;    // name of the leaky scenario this variant repairs
};

namespace scenariodetail {

inline ExpectedSite site(BlockKind kind, const std::string& file, int line, std::int64_t n = 1) {
    return {kind, SourceLoc{"", file, line}, [n](const RunOptions&) { return n; }};
}

inline ExpectedSite site_fn(BlockKind kind, const std::string& file, int line,
                            std::function<std::int64_t(const RunOptions&)> fn) {
    return {kind, SourceLoc{"", file, line}, std::move(fn)};
}

inline Scenario make(std::string name, std::string summary, std::string file, std::string text,
                     RunOptions defaults, ScenarioExpectation expect, bool core,
                     std::string fixes = "", Tick max_ticks = 1'000'000) {
    Scenario s;
    s.name = std::move(name);
    s.summary = std::move(summary);
    s.file = std::move(file);
    s.text = std::move(text);
    s.program = load_program(s.text, s.file);
    s.config.seed = 1;
    s.config.max_ticks = max_ticks;
    s.defaults = std::move(defaults);
    s.expect = std::move(expect);
    s.core = core;
    s.fixes = std::move(fixes);
    return s;
}

inline std::vector<Scenario> build_catalog() {
    std::vector<Scenario> out;

    // --- premature return: the receiver bails out on the error path and the
    // unbuffered sender has no partner left.
    const char* premature = R"(# A child sends once; the parent may return before receiving.
entry handler.Fetch {
  make ch cap=0 @ premature.go:1
  spawn { @ premature.go:2
    send ch @ premature.go:3
  }
  if cond { @ premature.go:5
    return @ premature.go:6
  }
  recv ch @ premature.go:8
}
)";
    out.push_back(make(
        "premature-return", "parent returns early; unbuffered sender leaks",
        "premature-return.cir", premature, RunOptions{{{"cond", true}}, {}},
        {true, false, {site(BlockKind::ChanSend, "premature.go", 3)}}, true));

    const char* premature_fixed = R"(# Buffer of one: the send completes whether or not the parent receives.
entry handler.Fetch {
  make ch cap=1 @ premature.go:1
  spawn { @ premature.go:2
    send ch @ premature.go:3
  }
  if cond { @ premature.go:5
    return @ premature.go:6
  }
  recv ch @ premature.go:8
}
)";
    out.push_back(make("premature-return-fixed", "capacity one unblocks the sender",
                       "premature-return-fixed.cir", premature_fixed,
                       RunOptions{{{"cond", true}}, {}}, {false, false, {}}, true,
                       "premature-return"));

    // --- timeout leak: the handler takes the cancellation arm, the worker's
    // late send has no receiver.
    const char* timeout = R"(# Worker result vs. cancellation: cancel wins, the worker's send leaks.
entry svc.Handler {
  ctxdone done $cancel_at @ timeout.go:1
  make ch cap=0 @ timeout.go:2
  spawn { @ timeout.go:3
    sleep $work_delay @ timeout.go:4
    send ch @ timeout.go:5
  }
  select { @ timeout.go:7
    recv ch @ timeout.go:8
    recv done { @ timeout.go:9
      return @ timeout.go:10
    }
  }
}
)";
    out.push_back(make(
        "timeout-leak", "cancellation beats the worker; its send leaks", "timeout-leak.cir",
        timeout, RunOptions{{}, {{"cancel_at", 1}, {"work_delay", 2}}},
        {true, false, {site(BlockKind::ChanSend, "timeout.go", 5)}}, true));

    const char* timeout_fixed = R"(# Capacity one: the worker's send completes even after cancellation.
entry svc.Handler {
  ctxdone done $cancel_at @ timeout.go:1
  make ch cap=1 @ timeout.go:2
  spawn { @ timeout.go:3
    sleep $work_delay @ timeout.go:4
    send ch @ timeout.go:5
  }
  select { @ timeout.go:7
    recv ch @ timeout.go:8
    recv done { @ timeout.go:9
      return @ timeout.go:10
    }
  }
}
)";
    out.push_back(make("timeout-leak-fixed", "capacity one absorbs the late send",
                       "timeout-leak-fixed.cir", timeout_fixed,
                       RunOptions{{}, {{"cancel_at", 1}, {"work_delay", 2}}}, {false, false, {}},
                       true, "timeout-leak"));

    // --- ncast: n senders race for a single receive; n-1 lose forever.
    const char* ncast = R"(# Fan-in with one receive: every sender but the first leaks.
entry fanin.Collect {
  make ch cap=0 @ ncast.go:1
  loop $n { @ ncast.go:2
    spawn { @ ncast.go:3
      send ch @ ncast.go:4
    }
  }
  recv ch @ ncast.go:7
}
)";
    out.push_back(make(
        "ncast", "n sends, one receive: n-1 senders leak", "ncast.cir", ncast,
        RunOptions{{}, {{"n", 5}}},
        {true, false,
         {site_fn(BlockKind::ChanSend, "ncast.go", 4,
                  [](const RunOptions& o) { return o.params.at("n") - 1; })}},
        true));

    const char* ncast_fixed = R"(# Capacity n: every send completes; the receiver takes the first.
entry fanin.Collect {
  make ch cap=$n @ ncast.go:1
  loop $n { @ ncast.go:2
    spawn { @ ncast.go:3
      send ch @ ncast.go:4
    }
  }
  recv ch @ ncast.go:7
}
)";
    out.push_back(make("ncast-fixed", "capacity n lets every sender finish", "ncast-fixed.cir",
                       ncast_fixed, RunOptions{{}, {{"n", 5}}}, {false, false, {}}, true, "ncast"));

    // --- double send: a missing early return lets the error path fall
    // through to a second send the receiver never takes.
    const char* doublesend = R"(# The error path sends, then falls through and sends again.
entry pipeline.Run {
  make ch cap=0 @ doublesend.go:1
  spawn pipeline.sender @ doublesend.go:2
  spawn pipeline.receiver @ doublesend.go:3
}
func pipeline.sender {
  if err { @ doublesend.go:6
    send ch 0 @ doublesend.go:7
  }
  send ch 1 @ doublesend.go:9
}
func pipeline.receiver {
  recv ch @ doublesend.go:12
}
)";
    out.push_back(make(
        "double-send", "error path sends twice at a one-receive partner", "double-send.cir",
        doublesend, RunOptions{{{"err", true}}, {}},
        {true, false, {site(BlockKind::ChanSend, "doublesend.go", 9)}}, true));

    const char* doublesend_fixed = R"(# Return right after the error send; the second send is unreachable.
entry pipeline.Run {
  make ch cap=0 @ doublesend.go:1
  spawn pipeline.sender @ doublesend.go:2
  spawn pipeline.receiver @ doublesend.go:3
}
func pipeline.sender {
  if err { @ doublesend.go:6
    send ch 0 @ doublesend.go:7
    return @ doublesend.go:8
  }
  send ch 1 @ doublesend.go:10
}
func pipeline.receiver {
  recv ch @ doublesend.go:13
}
)";
    out.push_back(make("double-send-fixed", "early return removes the second send",
                       "double-send-fixed.cir", doublesend_fixed, RunOptions{{{"err", true}}, {}},
                       {false, false, {}}, true, "double-send"));

    // --- unclosed range: consumers loop over a channel nobody closes.
    const char* unclosed = R"(# One producer, many consumers; the channel is never closed.
entry pipeline.ProducerConsumer {
  make ch cap=0 @ pc.go:2
  loop $workers { @ pc.go:4
    spawn { @ pc.go:5
      range ch { @ pc.go:6
      }
    }
  }
  loop $items { @ pc.go:11
    send ch @ pc.go:12
  }
}
)";
    out.push_back(make(
        "unclosed-range", "consumers range over a never-closed channel", "unclosed-range.cir",
        unclosed, RunOptions{{}, {{"workers", 3}, {"items", 5}}},
        {true, false,
         {site_fn(BlockKind::ChanRecv, "pc.go", 6,
                  [](const RunOptions& o) { return o.params.at("workers"); })}},
        true));

    const char* unclosed_fixed = R"(# Close after the last item so every consumer leaves its loop.
entry pipeline.ProducerConsumer {
  make ch cap=0 @ pc.go:2
  loop $workers { @ pc.go:4
    spawn { @ pc.go:5
      range ch { @ pc.go:6
      }
    }
  }
  loop $items { @ pc.go:11
    send ch @ pc.go:12
  }
  close ch @ pc.go:14
}
)";
    out.push_back(make("unclosed-range-fixed", "closing the channel releases every consumer",
                       "unclosed-range-fixed.cir", unclosed_fixed,
                       RunOptions{{}, {{"workers", 3}, {"items", 5}}}, {false, false, {}}, true,
                       "unclosed-range"));

    // --- timer loop: an unowned goroutine sleeps on a fresh timer channel
    // forever. It wakes periodically, so it is an anti-pattern rather than a
    // deadlock, but it still lingers at the end of the run.
    const char* timerloop = R"(# Periodic work on a timer channel with no way to stop it.
entry stats.Reporter {
  spawn { @ stats.go:2
    loop forever { @ stats.go:3
      after t 5 @ stats.go:4
      recv t @ stats.go:5
    }
  }
}
)";
    out.push_back(make("timer-loop", "unstoppable periodic worker lingers on its timer",
                       "timer-loop.cir", timerloop, RunOptions{},
                       {true, true, {site(BlockKind::ChanRecv, "stats.go", 5)}}, true, "", 60));

    const char* timerloop_fixed = R"(# The timer wait sits in a select with a stop arm the owner can fire.
entry stats.Reporter {
  ctxdone stop 20 @ stats.go:1
  spawn { @ stats.go:2
    loop forever { @ stats.go:3
      after t 5 @ stats.go:4
      select { @ stats.go:5
        recv t @ stats.go:6
        recv stop { @ stats.go:7
          return @ stats.go:8
        }
      }
    }
  }
}
)";
    out.push_back(make("timer-loop-fixed", "a stop arm bounds the worker's lifetime",
                       "timer-loop-fixed.cir", timerloop_fixed, RunOptions{}, {false, false, {}},
                       true, "timer-loop", 60));

    // --- method contract: Start spawns listeners that only Stop releases.
    const char* contract = R"(# Start/Stop contract: listeners exit only when Stop closes done.
entry app.Main {
  make wch cap=0 @ worker.go:23
  make done cap=0 @ worker.go:24
  call worker.Start @ worker.go:25
}
func worker.Start {
  loop $listeners { @ worker.go:6
    spawn { @ worker.go:7
      loop forever { @ worker.go:8
        select { @ worker.go:10
          recv wch @ worker.go:11
          recv done { @ worker.go:12
            return @ worker.go:13
          }
        }
      }
    }
  }
}
func worker.Stop {
  close done @ worker.go:18
}
)";
    out.push_back(make(
        "method-contract", "Start without Stop leaves listeners in select", "method-contract.cir",
        contract, RunOptions{{}, {{"listeners", 1}}},
        {true, false,
         {site_fn(BlockKind::Select, "worker.go", 10,
                  [](const RunOptions& o) { return o.params.at("listeners"); })}},
        true));

    const char* contract_fixed = R"(# Honouring the contract: Main calls Stop, which closes done.
entry app.Main {
  make wch cap=0 @ worker.go:23
  make done cap=0 @ worker.go:24
  call worker.Start @ worker.go:25
  call worker.Stop @ worker.go:26
}
func worker.Start {
  loop $listeners { @ worker.go:6
    spawn { @ worker.go:7
      loop forever { @ worker.go:8
        select { @ worker.go:10
          recv wch @ worker.go:11
          recv done { @ worker.go:12
            return @ worker.go:13
          }
        }
      }
    }
  }
}
func worker.Stop {
  close done @ worker.go:18
}
)";
    out.push_back(make("method-contract-fixed", "Stop closes done and the listeners return",
                       "method-contract-fixed.cir", contract_fixed,
                       RunOptions{{}, {{"listeners", 1}}}, {false, false, {}}, true,
                       "method-contract"));

    // --- zero-case select: blocks forever by definition.
    const char* zerosel = R"(# A select with no cases can never proceed.
entry sink.Drain {
  spawn { @ zerosel.go:2
    select { @ zerosel.go:3
    }
  }
}
)";
    out.push_back(make("zero-case-select", "caseless select blocks forever", "zero-case-select.cir",
                       zerosel, RunOptions{},
                       {true, false, {site(BlockKind::Select, "zerosel.go", 3)}}, true));

    const char* zerosel_fixed = R"(# A default arm makes the empty wait non-blocking.
entry sink.Drain {
  spawn { @ zerosel.go:2
    select { @ zerosel.go:3
      default @ zerosel.go:4
    }
  }
}
)";
    out.push_back(make("zero-case-select-fixed", "default arm keeps the task moving",
                       "zero-case-select-fixed.cir", zerosel_fixed, RunOptions{},
                       {false, false, {}}, true, "zero-case-select"));

    // --- compute-cost: the concrete premature-return shape whose profile
    // stack is used throughout the classifier fixtures.
    const char* computecost = R"(# Discount lookup races the base cost; the error path strands the sender.
entry server.ComputeCost {
  make ch cap=0 @ transactions/cost.go:5
  spawn { @ transactions/cost.go:6
    send ch @ transactions/cost.go:8
  }
  if err { @ transactions/cost.go:9
    return @ transactions/cost.go:10
  }
  recv ch @ transactions/cost.go:12
}
)";
    out.push_back(make(
        "compute-cost", "discount sender leaks when the cost lookup errors", "compute-cost.cir",
        computecost, RunOptions{{{"err", true}}, {}},
        {true, false, {site(BlockKind::ChanSend, "transactions/cost.go", 8)}}, false));

    const char* computecost_fixed = R"(# Buffered discount channel: the sender completes on every path.
entry server.ComputeCost {
  make ch cap=1 @ transactions/cost.go:5
  spawn { @ transactions/cost.go:6
    send ch @ transactions/cost.go:8
  }
  if err { @ transactions/cost.go:9
    return @ transactions/cost.go:10
  }
  recv ch @ transactions/cost.go:12
}
)";
    out.push_back(make("compute-cost-fixed", "buffering the discount channel removes the leak",
                       "compute-cost-fixed.cir", computecost_fixed, RunOptions{{{"err", true}}, {}},
                       {false, false, {}}, false, "compute-cost"));

    // --- poller: a select over ticker and cancellation arms only. The leak
    // checker reports it; the fleet analyzer's transience filter drops it.
    const char* poller = R"(# Ticker plus cancellation wait: transiently blocking by construction.
entry poll.Watch {
  ctxdone done never @ poller.go:1
  spawn { @ poller.go:2
    tick t 5 @ poller.go:3
    loop forever { @ poller.go:4
      select { @ poller.go:5
        recv t @ poller.go:6
        recv done { @ poller.go:7
          return @ poller.go:8
        }
      }
    }
  }
}
)";
    out.push_back(make("poller", "ticker/cancellation select lingers but is transient",
                       "poller.cir", poller, RunOptions{},
                       {true, true, {site(BlockKind::Select, "poller.go", 5)}}, false, "", 40));

    // --- zoo: one lingering task per blocking state, for classification and
    // snapshot coverage.
    const char* zoo = R"(# One parked task of every flavour.
entry zoo.Main {
  nilchan nc @ zoo.go:1
  make a cap=0 @ zoo.go:2
  make b cap=0 @ zoo.go:3
  make c cap=0 @ zoo.go:4
  ctxdone done never @ zoo.go:5
  spawn { @ zoo.go:6
    send nc @ zoo.go:7
  }
  spawn { @ zoo.go:8
    recv nc @ zoo.go:9
  }
  spawn { @ zoo.go:10
    send a @ zoo.go:11
  }
  spawn { @ zoo.go:12
    recv b @ zoo.go:13
  }
  spawn { @ zoo.go:14
    select { @ zoo.go:15
      recv c @ zoo.go:16
      recv done @ zoo.go:17
    }
  }
  spawn { @ zoo.go:18
    select { @ zoo.go:19
    }
  }
  spawn { @ zoo.go:20
    iowait @ zoo.go:21
  }
  spawn { @ zoo.go:22
    syscall @ zoo.go:23
  }
  spawn { @ zoo.go:24
    sleep 99999 @ zoo.go:25
  }
  spawn { @ zoo.go:26
    condwait tok @ zoo.go:27
  }
  spawn { @ zoo.go:28
    semacquire sem @ zoo.go:29
  }
}
)";
    ScenarioExpectation zoo_expect;
    zoo_expect.leaky = true;
    zoo_expect.sites = {
        site(BlockKind::ChanSend, "zoo.go", 7),  site(BlockKind::ChanRecv, "zoo.go", 9),
        site(BlockKind::ChanSend, "zoo.go", 11), site(BlockKind::ChanRecv, "zoo.go", 13),
        site(BlockKind::Select, "zoo.go", 15),   site(BlockKind::Select, "zoo.go", 19),
        site(BlockKind::IOWait, "zoo.go", 21),   site(BlockKind::Syscall, "zoo.go", 23),
        site(BlockKind::Sleep, "zoo.go", 25),    site(BlockKind::CondWait, "zoo.go", 27),
        site(BlockKind::SemAcquire, "zoo.go", 29),
    };
    out.push_back(make("zoo", "one lingering task per blocking state", "zoo.cir", zoo,
                       RunOptions{}, std::move(zoo_expect), false, "", 100));

    return out;
}

} // namespace scenariodetail

inline const std::vector<Scenario>& builtin_scenarios() {
    static const std::vector<Scenario> catalog = scenariodetail::build_catalog();
    return catalog;
}

inline const Scenario* find_scenario(const std::string& name) {
    for (const Scenario& s : builtin_scenarios())
        if (s.name == name)
            return &s;
    return nullptr;
}

// Lingering (kind, site) -> count from a finished simulation, for comparing
// against ScenarioExpectation.
inline std::map<std::pair<BlockKind, SourceLoc>, std::int64_t> lingering_sites(
    const std::vector<Task>& tasks) {
    std::map<std::pair<BlockKind, SourceLoc>, std::int64_t> out;
    for (const Task& t : tasks) {
        if (t.status == TaskStatus::Done)
            continue;
        SourceLoc loc = t.blocking_site.value_or(SourceLoc{});
        out[{kind_for_status(t.status), loc}]++;
    }
    return out;
}

inline std::map<std::pair<BlockKind, SourceLoc>, std::int64_t> expected_sites(
    const Scenario& scenario, const RunOptions& options) {
    std::map<std::pair<BlockKind, SourceLoc>, std::int64_t> out;
    for (const ExpectedSite& s : scenario.expect.sites) {
        std::int64_t n = s.count(options);
        if (n > 0)
            out[{s.kind, s.loc}] += n;
    }
    return out;
}

} // namespace leakscope
