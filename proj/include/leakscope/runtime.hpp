// Deterministic cooperative simulator of tasks and channels.
//
// Concurrency is modeled, not real: the simulator is a sequential state
// machine stepping one task statement at a time. Runnable tasks are scheduled
// round-robin; the seeded generator is consulted only where the modeled
// language is non-deterministic (choosing among ready select arms). Time is a
// logical tick counter advanced only when nothing is runnable.
#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "leakscope/program.hpp"
#include "leakscope/types.hpp"

namespace leakscope {

struct SchedulerConfig {
    std::uint64_t seed = 1;
    std::int64_t max_steps = 1'000'000; // statement-execution bound (livelock guard)
    Tick model_time = 0;                // initial logical clock
    Tick max_ticks = 1'000'000;         // timers past this horizon never fire
};

// Per-run inputs: condition tokens (If branches) and integer parameters
// ($name placeholders in the IR).
struct RunOptions {
    std::map<std::string, bool> conds;
    std::map<std::string, std::int64_t> params;
};

struct ChannelState {
    ChanId id = 0;
    int capacity = 0;
    bool closed = false;
    bool is_nil = false;
    std::string origin; // "", "time.After", "time.Tick", "context.Done"
    std::deque<std::int64_t> buffer;

    std::deque<TaskId> send_waiters;
    std::deque<TaskId> recv_waiters;
    std::vector<TaskId> select_waiters; // kept sorted, unique

    std::int64_t sends_completed = 0;
    std::int64_t receives_completed = 0;

    // Spec accounting: completed sends plus senders still parked on the
    // channel. Sends that panicked never count.
    std::int64_t messages_sent() const {
        return sends_completed + static_cast<std::int64_t>(send_waiters.size());
    }
};

struct TraceEvent {
    std::int64_t step = 0;
    TaskId task = 0; // 0 = runtime (timer) events
    std::string op;
    SourceLoc site;
    std::string detail;

    std::string str() const {
        std::string s = "step=" + std::to_string(step) + " task=" + std::to_string(task) +
                        " op=" + op + " site=" + (site.file.empty() ? std::string("-") : site.str());
        if (!detail.empty())
            s += " detail=" + detail;
        return s;
    }
};

enum class RunOutcome {
    Quiescent,     // no runnable task and no timer left to fire
    BoundExceeded, // max_steps hit with runnable tasks (livelock, not a quiescent leak)
};

namespace rtdetail {

struct Block {
    const std::vector<Stmt>* stmts = nullptr;
    size_t pc = 0;
    const Stmt* owner = nullptr;    // Loop/Range statement that opened this block
    std::int64_t remaining = -2;    // loop iterations left after this one; -1 = forever
};

struct Activation {
    std::string fn;
    std::vector<Block> blocks;
    std::map<std::string, ChanId> env; // channel bindings visible here
};

// Why a parked task is parked; drives wake-up handling.
enum class ParkKind { None, Send, Recv, Range, Select, Sleep, IOWait, Syscall, CondWait, SemAcquire };

struct ResolvedArm {
    ArmDir dir;
    ChanId chan;
    std::int64_t value;
    size_t index; // arm position in the select statement
};

} // namespace rtdetail

struct Task {
    TaskId id = 0;
    TaskStatus status = TaskStatus::Runnable;
    std::optional<SourceLoc> blocking_site;
    SourceLoc creation_site;
    std::string creator; // function that spawned this task
    bool panicked = false;
    std::string panic_reason;

    // Park bookkeeping (simulator-internal).
    rtdetail::ParkKind park = rtdetail::ParkKind::None;
    ChanId park_chan = -1;
    bool blocked_on_nil = false;
    const Stmt* park_stmt = nullptr;
    std::vector<rtdetail::ResolvedArm> park_arms; // select only
    std::string park_token;                       // condwait/semacquire

    std::vector<rtdetail::Activation> activations;

    // Call stack of IR frames, innermost first: (function, current statement).
    std::vector<SourceLoc> frames() const {
        std::vector<SourceLoc> out;
        for (auto it = activations.rbegin(); it != activations.rend(); ++it) {
            SourceLoc loc;
            loc.function = it->fn;
            for (auto b = it->blocks.rbegin(); b != it->blocks.rend(); ++b) {
                if (b->pc < b->stmts->size()) {
                    loc.file = (*b->stmts)[b->pc].loc.file;
                    loc.line = (*b->stmts)[b->pc].loc.line;
                    break;
                }
                if (b->owner) { // parked between iterations at the owning statement
                    loc.file = b->owner->loc.file;
                    loc.line = b->owner->loc.line;
                    break;
                }
            }
            if (loc.file.empty() && !out.empty())
                continue; // activation fully unwound
            out.push_back(loc);
        }
        return out;
    }
};

class Simulator {
public:
    Simulator(const SimProgram& program, SchedulerConfig config = {}, RunOptions options = {})
        : prog_(&program), cfg_(config), opts_(std::move(options)), rng_(config.seed),
          clock_(config.model_time) {
        const Function& entry = program.entry_function();
        Task root;
        root.id = next_task_id_++;
        root.status = TaskStatus::Runnable;
        root.creator = "runtime.main";
        root.creation_site = entry.body.empty() ? SourceLoc{entry.name, program.name, 0}
                                                : entry.body.front().loc;
        root.activations.push_back({entry.name, {make_block(entry.body)}, {}});
        tasks_.push_back(std::move(root));
    }

    // Executes statements until quiescence or the step bound. Returns the
    // outcome; state stays inspectable either way.
    RunOutcome run() {
        while (true) {
            if (steps_ >= cfg_.max_steps) {
                if (any_runnable())
                    return RunOutcome::BoundExceeded;
                if (!advance_time())
                    return RunOutcome::Quiescent;
                continue;
            }
            if (!step()) {
                if (!advance_time())
                    return RunOutcome::Quiescent;
            }
        }
    }

    // Runs one runnable task for one statement. Returns false if nothing was
    // runnable (callers may then advance_time()).
    bool step() {
        size_t n = tasks_.size();
        for (size_t probe = 0; probe < n; ++probe) {
            size_t idx = (rr_cursor_ + probe) % n;
            if (tasks_[idx].status != TaskStatus::Runnable)
                continue;
            rr_cursor_ = (idx + 1) % tasks_.size();
            exec_one(tasks_[idx]);
            return true;
        }
        return false;
    }

    // Fires the earliest pending timers within the horizon. Returns false if
    // no timer can fire (quiescence if nothing is runnable).
    bool advance_time() {
        Tick best = -1;
        for (const Timer& t : timers_)
            if (!t.fired && t.deadline <= cfg_.max_ticks && (best < 0 || t.deadline < best))
                best = t.deadline;
        if (best < 0)
            return false;
        clock_ = std::max(clock_, best);
        for (size_t i = 0; i < timers_.size(); ++i) {
            if (!timers_[i].fired && timers_[i].deadline == best)
                fire_timer(timers_[i]);
        }
        // Compact spent timers; relative order of live ones is preserved, so
        // same-tick firing order is unaffected.
        if (timers_.size() > 64) {
            size_t live = 0;
            for (const Timer& t : timers_)
                if (!t.fired)
                    live++;
            if (live * 2 < timers_.size())
                timers_.erase(std::remove_if(timers_.begin(), timers_.end(),
                                             [](const Timer& t) { return t.fired; }),
                              timers_.end());
        }
        return true;
    }

    bool quiescent() const {
        if (any_runnable())
            return false;
        for (const Timer& t : timers_)
            if (!t.fired && t.deadline <= cfg_.max_ticks)
                return false;
        return true;
    }

    bool all_done() const {
        for (const Task& t : tasks_)
            if (t.status != TaskStatus::Done)
                return false;
        return true;
    }

    const std::vector<Task>& tasks() const { return tasks_; }
    const std::vector<ChannelState>& channels() const { return channels_; }
    const std::vector<TraceEvent>& trace() const { return trace_; }
    Tick now() const { return clock_; }
    std::int64_t steps_executed() const { return steps_; }
    const SimProgram& program() const { return *prog_; }
    const SchedulerConfig& config() const { return cfg_; }

    std::string render_trace() const {
        std::string out;
        for (const TraceEvent& e : trace_) {
            out += e.str();
            out += '\n';
        }
        return out;
    }

    std::string render_task_table() const {
        std::string out;
        for (const Task& t : tasks_) {
            out += "task=" + std::to_string(t.id) + " status=" + status_name(t.status);
            out += " site=" + (t.blocking_site ? t.blocking_site->str() : std::string("-"));
            out += " created=" + t.creation_site.str() + " by=" + t.creator;
            if (t.panicked)
                out += " panic=" + t.panic_reason;
            out += '\n';
        }
        return out;
    }

    // make_channel: fresh open channel with an empty buffer.
    ChanId make_channel(int capacity, const std::string& origin = "") {
        ChannelState ch;
        ch.id = static_cast<ChanId>(channels_.size());
        ch.capacity = capacity;
        ch.origin = origin;
        channels_.push_back(std::move(ch));
        return channels_.back().id;
    }

private:
    struct Timer {
        enum Kind { Wake, Send, Close, Periodic } kind;
        Tick deadline = 0;
        Tick period = 0;
        TaskId task = 0;
        ChanId chan = -1;
        std::int64_t value = 0;
        bool fired = false;
    };

    static rtdetail::Block make_block(const std::vector<Stmt>& stmts, const Stmt* owner = nullptr,
                                      std::int64_t remaining = -2) {
        return {&stmts, 0, owner, remaining};
    }

    bool any_runnable() const {
        for (const Task& t : tasks_)
            if (t.status == TaskStatus::Runnable)
                return true;
        return false;
    }

    std::int64_t resolve_amount(const Stmt& s) const {
        if (s.param.empty())
            return s.amount;
        auto it = opts_.params.find(s.param);
        if (it == opts_.params.end())
            throw ProgramError("unbound parameter $" + s.param + " at " + s.loc.str());
        return it->second;
    }

    void emit(TaskId task, const std::string& op, const SourceLoc& site, std::string detail = "") {
        trace_.push_back({static_cast<std::int64_t>(trace_.size() + 1), task, op, site,
                          std::move(detail)});
    }

    rtdetail::Activation& leaf(Task& t) { return t.activations.back(); }

    ChanId lookup_chan(Task& t, const std::string& name, const SourceLoc& loc) {
        auto& env = leaf(t).env;
        auto it = env.find(name);
        if (it == env.end())
            throw ProgramError("channel '" + name + "' unbound at runtime at " + loc.str());
        return it->second;
    }

    // ---- wake plumbing ----

    void mark_runnable(Task& t) {
        t.status = TaskStatus::Runnable;
        t.blocking_site.reset();
        t.park = rtdetail::ParkKind::None;
        t.park_chan = -1;
        t.park_stmt = nullptr;
        t.park_arms.clear();
        t.park_token.clear();
        t.blocked_on_nil = false;
    }

    void park(Task& t, TaskStatus status, rtdetail::ParkKind kind, const SourceLoc& site) {
        t.status = status;
        t.blocking_site = site;
        t.park = kind;
    }

    // Any state change on a channel re-evaluates selects parked on it.
    void wake_selects(ChannelState& ch) {
        if (ch.select_waiters.empty())
            return;
        std::vector<TaskId> waiters = ch.select_waiters;
        for (TaskId id : waiters) {
            Task& t = tasks_[id - 1];
            if (t.status != TaskStatus::BlockedSelect)
                continue;
            unregister_select(t);
            mark_runnable(t); // re-executes the select statement
        }
    }

    void unregister_select(Task& t) {
        for (const rtdetail::ResolvedArm& arm : t.park_arms) {
            auto& sw = channels_[arm.chan].select_waiters;
            sw.erase(std::remove(sw.begin(), sw.end(), t.id), sw.end());
        }
    }

    // Moves past the finished statement, entering `body` first when the
    // statement carries one (select arms, desugared single-arm selects).
    void advance_past(Task& t, const std::vector<Stmt>* body) {
        leaf(t).blocks.back().pc++;
        if (body && !body->empty())
            leaf(t).blocks.push_back(make_block(*body));
        settle(t);
    }

    // Completes a parked receive on `t` (plain recv or range) with (value, ok).
    void complete_recv(Task& t, std::int64_t value, bool ok) {
        const Stmt* stmt = t.park_stmt;
        mark_runnable(t);
        if (stmt->kind == StmtKind::Range) {
            if (ok) {
                // Loop body runs with the received item; the range re-arms
                // when the body block finishes. Empty bodies re-arm directly.
                if (!stmt->body.empty())
                    leaf(t).blocks.push_back(make_block(stmt->body, stmt));
            } else {
                advance_pc(t); // closed and drained: leave the loop
            }
        } else {
            advance_past(t, &stmt->body);
        }
        (void)value;
    }

    void complete_send(Task& t) {
        const Stmt* stmt = t.park_stmt;
        mark_runnable(t);
        advance_past(t, stmt ? &stmt->body : nullptr);
    }

    void panic_task(Task& t, const std::string& reason, const SourceLoc& site) {
        t.panicked = true;
        t.panic_reason = reason;
        t.status = TaskStatus::Done;
        t.blocking_site.reset();
        t.park = rtdetail::ParkKind::None;
        t.activations.clear();
        emit(t.id, "panic", site, reason);
    }

    // ---- channel operations ----

    // Attempts a send of `value` by `t`. Returns true if it completed.
    bool do_send(Task& t, ChannelState& ch, std::int64_t value, const Stmt& stmt) {
        if (ch.is_nil) {
            park(t, TaskStatus::BlockedSend, rtdetail::ParkKind::Send, stmt.loc);
            t.park_chan = ch.id;
            t.park_stmt = &stmt;
            t.blocked_on_nil = true;
            emit(t.id, "send", stmt.loc, "chan=" + std::to_string(ch.id) + " blocked=nil");
            return false;
        }
        if (ch.closed) {
            emit(t.id, "send", stmt.loc, "chan=" + std::to_string(ch.id) + " closed");
            panic_task(t, "send on closed channel", stmt.loc);
            return false;
        }
        if (!ch.recv_waiters.empty()) {
            // Rendezvous with (or hand off to) the longest-parked receiver.
            TaskId rid = ch.recv_waiters.front();
            ch.recv_waiters.pop_front();
            Task& receiver = tasks_[rid - 1];
            ch.sends_completed++;
            ch.receives_completed++;
            complete_recv(receiver, value, true);
            emit(t.id, "send", stmt.loc,
                 "chan=" + std::to_string(ch.id) + " paired=" + std::to_string(rid));
            wake_selects(ch);
            return true;
        }
        if (static_cast<int>(ch.buffer.size()) < ch.capacity) {
            ch.buffer.push_back(value);
            ch.sends_completed++;
            emit(t.id, "send", stmt.loc, "chan=" + std::to_string(ch.id) + " buffered");
            wake_selects(ch);
            return true;
        }
        park(t, TaskStatus::BlockedSend, rtdetail::ParkKind::Send, stmt.loc);
        t.park_chan = ch.id;
        t.park_stmt = &stmt;
        ch.send_waiters.push_back(t.id);
        emit(t.id, "send", stmt.loc, "chan=" + std::to_string(ch.id) + " blocked");
        wake_selects(ch); // a parked sender is a new partner for recv arms
        return false;
    }

    // Attempts a receive by `t` for statement `stmt` (Recv or Range head).
    bool do_recv(Task& t, ChannelState& ch, const Stmt& stmt) {
        const char* op = stmt.kind == StmtKind::Range ? "range" : "recv";
        if (ch.is_nil) {
            park(t, TaskStatus::BlockedRecv, rtdetail::ParkKind::Recv, stmt.loc);
            t.park_chan = ch.id;
            t.park_stmt = &stmt;
            t.blocked_on_nil = true;
            emit(t.id, op, stmt.loc, "chan=" + std::to_string(ch.id) + " blocked=nil");
            return false;
        }
        if (!ch.buffer.empty()) {
            std::int64_t v = ch.buffer.front();
            ch.buffer.pop_front();
            ch.receives_completed++;
            // A sender parked on a full buffer slides its value in, FIFO.
            if (!ch.send_waiters.empty()) {
                TaskId sid = ch.send_waiters.front();
                ch.send_waiters.pop_front();
                Task& sender = tasks_[sid - 1];
                ch.buffer.push_back(sender_value(sender));
                ch.sends_completed++;
                complete_send(sender);
            }
            finish_recv_stmt(t, stmt, v, true);
            emit(t.id, op, stmt.loc, "chan=" + std::to_string(ch.id) + " value=" + std::to_string(v));
            wake_selects(ch);
            return true;
        }
        if (!ch.send_waiters.empty()) {
            // Unbuffered rendezvous: take the value directly from the sender.
            TaskId sid = ch.send_waiters.front();
            ch.send_waiters.pop_front();
            Task& sender = tasks_[sid - 1];
            std::int64_t v = sender_value(sender);
            ch.sends_completed++;
            ch.receives_completed++;
            complete_send(sender);
            finish_recv_stmt(t, stmt, v, true);
            emit(t.id, op, stmt.loc,
                 "chan=" + std::to_string(ch.id) + " paired=" + std::to_string(sid));
            wake_selects(ch);
            return true;
        }
        if (ch.closed) {
            finish_recv_stmt(t, stmt, 0, false);
            emit(t.id, op, stmt.loc, "chan=" + std::to_string(ch.id) + " closed");
            return true;
        }
        park(t, TaskStatus::BlockedRecv,
             stmt.kind == StmtKind::Range ? rtdetail::ParkKind::Range : rtdetail::ParkKind::Recv,
             stmt.loc);
        t.park_chan = ch.id;
        t.park_stmt = &stmt;
        ch.recv_waiters.push_back(t.id);
        emit(t.id, op, stmt.loc, "chan=" + std::to_string(ch.id) + " blocked");
        wake_selects(ch); // a parked receiver is a new partner for send arms
        return false;
    }

    // Applies a completed receive to the statement of a *running* task (the
    // parked path goes through complete_recv instead).
    void finish_recv_stmt(Task& t, const Stmt& stmt, std::int64_t value, bool ok) {
        (void)value;
        if (stmt.kind == StmtKind::Range) {
            if (ok) {
                if (!stmt.body.empty())
                    leaf(t).blocks.push_back(make_block(stmt.body, &stmt));
            } else {
                advance_pc(t);
            }
        } else {
            advance_past(t, &stmt.body);
        }
    }

    std::int64_t sender_value(const Task& sender) const {
        // Plain sends carry the statement's payload; select send arms are
        // completed inline and never park, so park_stmt is always a Send.
        return sender.park_stmt ? sender.park_stmt->value : 0;
    }

    void do_close(Task& t, ChannelState& ch, const Stmt& stmt) {
        if (ch.is_nil) {
            emit(t.id, "close", stmt.loc, "chan=" + std::to_string(ch.id) + " nil");
            panic_task(t, "close of nil channel", stmt.loc);
            return;
        }
        if (ch.closed) {
            emit(t.id, "close", stmt.loc, "chan=" + std::to_string(ch.id) + " again");
            panic_task(t, "close of closed channel", stmt.loc);
            return;
        }
        ch.closed = true;
        emit(t.id, "close", stmt.loc, "chan=" + std::to_string(ch.id));
        advance_pc(t);
        // Every parked receiver returns (zero, false).
        std::deque<TaskId> receivers;
        receivers.swap(ch.recv_waiters);
        for (TaskId rid : receivers)
            complete_recv(tasks_[rid - 1], 0, false);
        // Parked senders on a closing channel panic.
        std::deque<TaskId> senders;
        senders.swap(ch.send_waiters);
        for (TaskId sid : senders) {
            Task& sender = tasks_[sid - 1];
            SourceLoc site = sender.blocking_site.value_or(stmt.loc);
            panic_task(sender, "send on closed channel", site);
        }
        wake_selects(ch);
    }

    // ---- select ----

    bool arm_ready(const rtdetail::ResolvedArm& arm) const {
        const ChannelState& ch = channels_[arm.chan];
        if (ch.is_nil)
            return false;
        if (arm.dir == ArmDir::Recv)
            return !ch.buffer.empty() || !ch.send_waiters.empty() || ch.closed;
        if (ch.closed)
            return true; // proceeding panics, as a bare send would
        return static_cast<int>(ch.buffer.size()) < ch.capacity || !ch.recv_waiters.empty();
    }

    void exec_select(Task& t, const Stmt& stmt) {
        std::vector<rtdetail::ResolvedArm> arms;
        arms.reserve(stmt.arms.size());
        for (size_t i = 0; i < stmt.arms.size(); ++i) {
            const SelectArm& a = stmt.arms[i];
            arms.push_back({a.dir, lookup_chan(t, a.chan, a.loc), a.value, i});
        }

        std::vector<size_t> ready;
        for (size_t i = 0; i < arms.size(); ++i)
            if (arm_ready(arms[i]))
                ready.push_back(i);

        if (!ready.empty()) {
            size_t pick = ready.size() == 1
                              ? ready[0]
                              : ready[static_cast<size_t>(rng_() % ready.size())];
            const rtdetail::ResolvedArm& arm = arms[pick];
            const SelectArm& src = stmt.arms[arm.index];
            emit(t.id, "select", stmt.loc,
                 "arm=" + std::to_string(arm.index) + " ready=" + std::to_string(ready.size()));
            leaf(t).blocks.back().pc++; // settle after the arm body is pushed
            ChannelState& ch = channels_[arm.chan];
            if (arm.dir == ArmDir::Recv)
                exec_select_recv(t, ch, src);
            else
                exec_select_send(t, ch, src);
            settle(t); // no-op when the task panicked in the arm
            return;
        }

        if (stmt.has_default) {
            emit(t.id, "select", stmt.loc, "default");
            advance_past(t, &stmt.default_body);
            return;
        }

        // Nothing ready: park and watch every non-nil arm channel. A select
        // parked opposite another parked select never pairs; both linger,
        // which quiescence then reports.
        park(t, TaskStatus::BlockedSelect, rtdetail::ParkKind::Select, stmt.loc);
        t.park_stmt = &stmt;
        t.park_arms = arms;
        for (const rtdetail::ResolvedArm& arm : arms) {
            ChannelState& ch = channels_[arm.chan];
            if (ch.is_nil)
                continue;
            auto& sw = ch.select_waiters;
            auto it = std::lower_bound(sw.begin(), sw.end(), t.id);
            if (it == sw.end() || *it != t.id)
                sw.insert(it, t.id);
        }
        emit(t.id, "select", stmt.loc,
             stmt.arms.empty() ? std::string("blocked=forever arms=0")
                               : "blocked arms=" + std::to_string(stmt.arms.size()));
    }

    void exec_select_recv(Task& t, ChannelState& ch, const SelectArm& src) {
        std::int64_t v = 0;
        bool ok = false;
        if (!ch.buffer.empty()) {
            v = ch.buffer.front();
            ch.buffer.pop_front();
            ch.receives_completed++;
            ok = true;
            if (!ch.send_waiters.empty()) {
                TaskId sid = ch.send_waiters.front();
                ch.send_waiters.pop_front();
                Task& sender = tasks_[sid - 1];
                ch.buffer.push_back(sender_value(sender));
                ch.sends_completed++;
                complete_send(sender);
            }
        } else if (!ch.send_waiters.empty()) {
            TaskId sid = ch.send_waiters.front();
            ch.send_waiters.pop_front();
            Task& sender = tasks_[sid - 1];
            v = sender_value(sender);
            ch.sends_completed++;
            ch.receives_completed++;
            complete_send(sender);
            ok = true;
        } else if (ch.closed) {
            v = 0;
            ok = false;
        }
        (void)v;
        (void)ok;
        emit(t.id, "recv", src.loc, "chan=" + std::to_string(ch.id) + " via=select");
        if (!src.body.empty())
            leaf(t).blocks.push_back(make_block(src.body));
        wake_selects(ch);
    }

    void exec_select_send(Task& t, ChannelState& ch, const SelectArm& src) {
        if (ch.closed) {
            emit(t.id, "send", src.loc, "chan=" + std::to_string(ch.id) + " closed via=select");
            panic_task(t, "send on closed channel", src.loc);
            return;
        }
        if (!ch.recv_waiters.empty()) {
            TaskId rid = ch.recv_waiters.front();
            ch.recv_waiters.pop_front();
            Task& receiver = tasks_[rid - 1];
            ch.sends_completed++;
            ch.receives_completed++;
            complete_recv(receiver, src.value, true);
        } else {
            ch.buffer.push_back(src.value); // readiness guaranteed room
            ch.sends_completed++;
        }
        emit(t.id, "send", src.loc, "chan=" + std::to_string(ch.id) + " via=select");
        if (!src.body.empty())
            leaf(t).blocks.push_back(make_block(src.body));
        wake_selects(ch);
    }

    // ---- timers ----

    void fire_timer(Timer& timer) {
        switch (timer.kind) {
        case Timer::Wake: {
            timer.fired = true;
            Task& t = tasks_[timer.task - 1];
            if (t.status == TaskStatus::Sleeping || t.status == TaskStatus::IOWait ||
                t.status == TaskStatus::Syscall) {
                emit(0, "timer", t.blocking_site.value_or(SourceLoc{}),
                     "wake task=" + std::to_string(t.id));
                mark_runnable(t);
                advance_pc(t);
            }
            break;
        }
        case Timer::Send: {
            timer.fired = true;
            timer_send(timer.chan, timer.value);
            break;
        }
        case Timer::Periodic: {
            timer_send(timer.chan, timer.value);
            timer.deadline += timer.period;
            if (timer.deadline > cfg_.max_ticks)
                timer.fired = true; // beyond the horizon; ticker stops
            break;
        }
        case Timer::Close: {
            timer.fired = true;
            ChannelState& ch = channels_[timer.chan];
            if (ch.closed)
                break; // already closed by the program; runtime close is a no-op
            ch.closed = true;
            emit(0, "timer", SourceLoc{}, "close chan=" + std::to_string(ch.id));
            std::deque<TaskId> receivers;
            receivers.swap(ch.recv_waiters);
            for (TaskId rid : receivers)
                complete_recv(tasks_[rid - 1], 0, false);
            std::deque<TaskId> senders;
            senders.swap(ch.send_waiters);
            for (TaskId sid : senders) {
                Task& sender = tasks_[sid - 1];
                SourceLoc site = sender.blocking_site.value_or(SourceLoc{});
                panic_task(sender, "send on closed channel", site);
            }
            wake_selects(ch);
            break;
        }
        }
    }

    // A runtime-initiated send (timer channels). Delivered to a parked
    // receiver first, else buffered; dropped with a trace note otherwise.
    void timer_send(ChanId cid, std::int64_t value) {
        ChannelState& ch = channels_[cid];
        if (ch.closed) {
            emit(0, "timer", SourceLoc{}, "send chan=" + std::to_string(cid) + " dropped=closed");
            return;
        }
        if (!ch.recv_waiters.empty()) {
            TaskId rid = ch.recv_waiters.front();
            ch.recv_waiters.pop_front();
            ch.sends_completed++;
            ch.receives_completed++;
            complete_recv(tasks_[rid - 1], value, true);
            emit(0, "timer", SourceLoc{}, "send chan=" + std::to_string(cid) + " paired=" +
                                              std::to_string(rid));
        } else if (static_cast<int>(ch.buffer.size()) < ch.capacity) {
            ch.buffer.push_back(value);
            ch.sends_completed++;
            emit(0, "timer", SourceLoc{}, "send chan=" + std::to_string(cid) + " buffered");
        } else {
            emit(0, "timer", SourceLoc{}, "send chan=" + std::to_string(cid) + " dropped=full");
        }
        wake_selects(ch);
    }

    // ---- statement dispatch ----

    // Advances past the finished statement at the leaf, unwinding blocks and
    // activations as they complete. Marks the task Done when the root
    // function finishes.
    void advance_pc(Task& t) {
        leaf(t).blocks.back().pc++;
        settle(t);
    }

    void settle(Task& t) {
        while (!t.activations.empty()) {
            rtdetail::Activation& act = t.activations.back();
            rtdetail::Block& blk = act.blocks.back();
            if (blk.pc < blk.stmts->size())
                return;
            if (blk.owner && blk.owner->kind == StmtKind::Loop) {
                if (blk.remaining == -1 || blk.remaining > 0) {
                    if (blk.remaining > 0)
                        blk.remaining--;
                    blk.pc = 0;
                    return;
                }
                act.blocks.pop_back();
                act.blocks.back().pc++;
                continue;
            }
            if (blk.owner && blk.owner->kind == StmtKind::Range) {
                // Body finished: re-arm the range receive. The range statement
                // is still current in the block below; drop the body block and
                // leave pc pointing at the range.
                act.blocks.pop_back();
                return;
            }
            if (act.blocks.size() > 1) {
                // Anonymous body block (branch, arm, inline op body): the
                // parent pc advanced when it was pushed.
                act.blocks.pop_back();
                continue;
            }
            // Function body finished: implicit return.
            t.activations.pop_back();
            if (t.activations.empty()) {
                t.status = TaskStatus::Done;
                t.blocking_site.reset();
                return;
            }
            leaf(t).blocks.back().pc++; // move past the Call statement
        }
    }

    const Stmt* current_stmt(Task& t) {
        if (t.activations.empty())
            return nullptr;
        rtdetail::Block& blk = leaf(t).blocks.back();
        if (blk.pc < blk.stmts->size())
            return &(*blk.stmts)[blk.pc];
        return nullptr;
    }

    void exec_one(Task& t) {
        steps_++;
        const TaskId tid = t.id;
        t.status = TaskStatus::Running;
        const Stmt* sp = current_stmt(t);
        if (!sp) {
            // Parked ranges re-arm here: the owner block's statement is the range.
            settle(t);
            sp = current_stmt(t);
            if (!sp) {
                if (t.status != TaskStatus::Done)
                    t.status = TaskStatus::Runnable;
                return;
            }
        }
        const Stmt& stmt = *sp;

        switch (stmt.kind) {
        case StmtKind::MakeChan: {
            ChanId id = make_channel(static_cast<int>(resolve_amount(stmt)));
            leaf(t).env[stmt.chan] = id;
            emit(t.id, "make", stmt.loc,
                 "chan=" + std::to_string(id) + " cap=" + std::to_string(channels_[id].capacity));
            advance_pc(t);
            break;
        }
        case StmtKind::NilChan: {
            ChannelState ch;
            ch.id = static_cast<ChanId>(channels_.size());
            ch.is_nil = true;
            channels_.push_back(std::move(ch));
            leaf(t).env[stmt.chan] = channels_.back().id;
            emit(t.id, "make", stmt.loc, "chan=" + std::to_string(channels_.back().id) + " nil");
            advance_pc(t);
            break;
        }
        case StmtKind::After:
        case StmtKind::Tick: {
            Tick d = resolve_amount(stmt);
            if (stmt.kind == StmtKind::Tick && d < 1) {
                emit(t.id, "tick", stmt.loc, "period=" + std::to_string(d));
                panic_task(t, "non-positive tick period", stmt.loc);
                break;
            }
            if (d < 0)
                d = 0;
            ChanId id = make_channel(1, stmt.kind == StmtKind::After ? "time.After" : "time.Tick");
            leaf(t).env[stmt.chan] = id;
            Timer timer;
            timer.kind = stmt.kind == StmtKind::After ? Timer::Send : Timer::Periodic;
            timer.deadline = clock_ + d;
            timer.period = d;
            timer.chan = id;
            timer.value = 1;
            timers_.push_back(timer);
            emit(t.id, stmt.kind == StmtKind::After ? "after" : "tick", stmt.loc,
                 "chan=" + std::to_string(id) + " at=" + std::to_string(timer.deadline));
            advance_pc(t);
            break;
        }
        case StmtKind::CtxDone: {
            ChanId id = make_channel(0, "context.Done");
            leaf(t).env[stmt.chan] = id;
            std::string detail = "chan=" + std::to_string(id);
            if (!stmt.never) {
                Timer timer;
                timer.kind = Timer::Close;
                timer.deadline = clock_ + std::max<Tick>(0, resolve_amount(stmt));
                timer.chan = id;
                timers_.push_back(timer);
                detail += " cancel=" + std::to_string(timer.deadline);
            } else {
                detail += " cancel=never";
            }
            emit(t.id, "ctx", stmt.loc, detail);
            advance_pc(t);
            break;
        }
        case StmtKind::Send: {
            ChannelState& ch = channels_[lookup_chan(t, stmt.chan, stmt.loc)];
            if (do_send(t, ch, stmt.value, stmt))
                advance_past(t, &stmt.body);
            break;
        }
        case StmtKind::Recv:
        case StmtKind::Range: {
            ChannelState& ch = channels_[lookup_chan(t, stmt.chan, stmt.loc)];
            do_recv(t, ch, stmt);
            break;
        }
        case StmtKind::Select:
            exec_select(t, stmt);
            break;
        case StmtKind::Close: {
            ChannelState& ch = channels_[lookup_chan(t, stmt.chan, stmt.loc)];
            do_close(t, ch, stmt);
            break;
        }
        case StmtKind::Spawn: {
            const Function& fn = prog_->functions.at(stmt.callee);
            Task child;
            child.id = next_task_id_++;
            child.status = TaskStatus::Runnable;
            child.creation_site = stmt.loc;
            child.creator = leaf(t).fn;
            child.activations.push_back({fn.name, {make_block(fn.body)}, leaf(t).env});
            emit(t.id, "spawn", stmt.loc,
                 "child=" + std::to_string(child.id) + " fn=" + fn.name);
            TaskId tid = t.id;
            tasks_.push_back(std::move(child)); // may reallocate; t dangles
            advance_pc(tasks_[tid - 1]);
            break;
        }
        case StmtKind::Call: {
            const Function& fn = prog_->functions.at(stmt.callee);
            emit(t.id, "call", stmt.loc, "fn=" + fn.name);
            auto env = leaf(t).env; // callee sees the caller's bindings
            t.activations.push_back({fn.name, {make_block(fn.body)}, std::move(env)});
            settle(t);
            break;
        }
        case StmtKind::Return: {
            emit(t.id, "return", stmt.loc, "fn=" + leaf(t).fn);
            t.activations.pop_back();
            if (t.activations.empty()) {
                t.status = TaskStatus::Done;
                t.blocking_site.reset();
            } else {
                advance_pc(t);
            }
            break;
        }
        case StmtKind::If: {
            bool cond = false;
            auto it = opts_.conds.find(stmt.token);
            if (it != opts_.conds.end())
                cond = it->second;
            emit(t.id, "if", stmt.loc, stmt.token + "=" + (cond ? "true" : "false"));
            advance_past(t, cond ? &stmt.body : &stmt.else_body);
            break;
        }
        case StmtKind::Loop: {
            std::int64_t n = stmt.forever ? -1 : resolve_amount(stmt);
            emit(t.id, "loop", stmt.loc, stmt.forever ? "forever" : "n=" + std::to_string(n));
            if (n == 0) {
                advance_pc(t);
                break;
            }
            leaf(t).blocks.push_back(make_block(stmt.body, &stmt, stmt.forever ? -1 : n - 1));
            if (stmt.body.empty())
                settle(t); // empty body counts iterations away immediately
            break;
        }
        case StmtKind::Sleep: {
            Tick d = std::max<Tick>(0, resolve_amount(stmt));
            park(t, TaskStatus::Sleeping, rtdetail::ParkKind::Sleep, stmt.loc);
            t.park_stmt = &stmt;
            Timer timer;
            timer.kind = Timer::Wake;
            timer.deadline = clock_ + d;
            timer.task = t.id;
            timers_.push_back(timer);
            emit(t.id, "sleep", stmt.loc, "until=" + std::to_string(timer.deadline));
            break;
        }
        case StmtKind::IOWait:
        case StmtKind::Syscall: {
            bool io = stmt.kind == StmtKind::IOWait;
            park(t, io ? TaskStatus::IOWait : TaskStatus::Syscall,
                 io ? rtdetail::ParkKind::IOWait : rtdetail::ParkKind::Syscall, stmt.loc);
            t.park_stmt = &stmt;
            std::string detail;
            if (stmt.timed) {
                Timer timer;
                timer.kind = Timer::Wake;
                timer.deadline = clock_ + std::max<Tick>(0, resolve_amount(stmt));
                timer.task = t.id;
                timers_.push_back(timer);
                detail = "until=" + std::to_string(timer.deadline);
            }
            emit(t.id, io ? "iowait" : "syscall", stmt.loc, detail);
            break;
        }
        case StmtKind::CondWait: {
            park(t, TaskStatus::CondWait, rtdetail::ParkKind::CondWait, stmt.loc);
            t.park_stmt = &stmt;
            t.park_token = stmt.token;
            cond_waiters_[stmt.token].push_back(t.id);
            emit(t.id, "condwait", stmt.loc, "token=" + stmt.token);
            break;
        }
        case StmtKind::Signal: {
            emit(t.id, "signal", stmt.loc, "token=" + stmt.token);
            advance_pc(t);
            auto it = cond_waiters_.find(stmt.token);
            if (it != cond_waiters_.end()) {
                std::vector<TaskId> waiters;
                waiters.swap(it->second);
                for (TaskId id : waiters) {
                    Task& w = tasks_[id - 1];
                    mark_runnable(w);
                    advance_pc(w);
                }
            }
            break;
        }
        case StmtKind::SemAcquire: {
            std::int64_t& count = sem_counts_[stmt.token];
            if (count > 0) {
                count--;
                emit(t.id, "semacquire", stmt.loc, "token=" + stmt.token);
                advance_pc(t);
            } else {
                park(t, TaskStatus::SemAcquire, rtdetail::ParkKind::SemAcquire, stmt.loc);
                t.park_stmt = &stmt;
                t.park_token = stmt.token;
                sem_waiters_[stmt.token].push_back(t.id);
                emit(t.id, "semacquire", stmt.loc, "token=" + stmt.token + " blocked");
            }
            break;
        }
        case StmtKind::SemPost: {
            emit(t.id, "sempost", stmt.loc, "token=" + stmt.token);
            advance_pc(t);
            auto it = sem_waiters_.find(stmt.token);
            if (it != sem_waiters_.end() && !it->second.empty()) {
                TaskId id = it->second.front();
                it->second.pop_front();
                Task& w = tasks_[id - 1];
                mark_runnable(w);
                advance_pc(w);
            } else {
                sem_counts_[stmt.token]++;
            }
            break;
        }
        }

        Task& self = tasks_[tid - 1]; // re-fetch across possible reallocation
        if (self.status == TaskStatus::Running)
            self.status = TaskStatus::Runnable;
    }

    const SimProgram* prog_;
    SchedulerConfig cfg_;
    RunOptions opts_;
    std::mt19937_64 rng_;
    Tick clock_ = 0;
    std::int64_t steps_ = 0;
    size_t rr_cursor_ = 0;
    TaskId next_task_id_ = 1;

    std::vector<Task> tasks_;
    std::vector<ChannelState> channels_;
    std::vector<Timer> timers_;
    std::vector<TraceEvent> trace_;
    std::map<std::string, std::vector<TaskId>> cond_waiters_;
    std::map<std::string, std::deque<TaskId>> sem_waiters_;
    std::map<std::string, std::int64_t> sem_counts_;
};

struct RunResult {
    RunOutcome outcome = RunOutcome::Quiescent;
    std::vector<Task> tasks;
    std::vector<ChannelState> channels;
    std::vector<TraceEvent> trace;
    Tick final_time = 0;
    std::int64_t steps = 0;
};

inline RunResult run(const SimProgram& program, SchedulerConfig config = {},
                     RunOptions options = {}) {
    Simulator sim(program, config, std::move(options));
    RunResult res;
    res.outcome = sim.run();
    res.tasks = sim.tasks();
    res.channels = sim.channels();
    res.trace = sim.trace();
    res.final_time = sim.now();
    res.steps = sim.steps_executed();
    return res;
}

} // namespace leakscope
