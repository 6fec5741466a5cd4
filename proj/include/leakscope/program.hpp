// Channel-program IR: statements, functions, and load-time resolution.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "leakscope/types.hpp"

namespace leakscope {

enum class StmtKind {
    MakeChan,   // bind a fresh channel, given capacity
    NilChan,    // bind a channel value that was never allocated
    Send,       // send one message
    Recv,       // receive one message
    Select,     // wait on several arms, optional default
    Close,      // close a channel
    Spawn,      // start a new task running a named function
    Call,       // run a named function on the current task
    Range,      // receive in a loop until the channel is closed and drained
    If,         // branch on an externally supplied condition token
    Loop,       // repeat the body a fixed number of times, or forever
    Return,     // leave the current function
    Sleep,      // park for a number of ticks
    After,      // bind a fresh capacity-1 channel sent to at now+delay
    Tick,       // bind a fresh capacity-1 channel sent to periodically
    CtxDone,    // bind a fresh channel closed at a given tick (or never)
    IOWait,     // park in IO wait, optionally timed
    Syscall,    // park in a system call, optionally timed
    CondWait,   // park until the token is signalled
    Signal,     // wake every task cond-waiting on the token
    SemAcquire, // take the token's semaphore or park
    SemPost,    // release the token's semaphore
};

enum class ArmDir { Recv, Send };

struct Stmt;

struct SelectArm {
    ArmDir dir = ArmDir::Recv;
    std::string chan;
    std::int64_t value = 0; // send arms only
    SourceLoc loc;
    std::vector<Stmt> body;
};

struct Stmt {
    StmtKind kind = StmtKind::Return;
    SourceLoc loc;

    std::string chan;   // channel identifier, when the statement targets one
    std::string token;  // condition / cond-wait / semaphore token
    std::string callee; // Spawn / Call target function

    std::int64_t value = 0;  // Send payload
    std::int64_t amount = 0; // capacity, tick count, delay, or loop count
    bool forever = false;    // Loop without a bound
    bool never = false;      // CtxDone that is never cancelled
    bool timed = false;      // IOWait/Syscall carrying a wake delay
    std::string param;       // $name placeholder for `amount`, resolved per run

    std::vector<Stmt> body;      // If-then, Loop, Range
    std::vector<Stmt> else_body; // If-else
    std::vector<SelectArm> arms; // Select
    bool has_default = false;
    std::vector<Stmt> default_body;
};

struct Function {
    std::string name;
    std::vector<Stmt> body;
};

class ProgramError : public std::runtime_error {
public:
    explicit ProgramError(const std::string& what) : std::runtime_error(what) {}
};

// A resolved channel program. `entry` names the function the root task runs.
struct SimProgram {
    std::string name;
    std::string entry;
    std::map<std::string, Function> functions;

    const Function& entry_function() const {
        auto it = functions.find(entry);
        if (it == functions.end())
            throw ProgramError("program '" + name + "': missing entry function '" + entry + "'");
        return it->second;
    }
};

namespace detail {

template <typename Fn>
void for_each_stmt(const std::vector<Stmt>& block, Fn&& fn) {
    for (const Stmt& s : block) {
        fn(s);
        for_each_stmt(s.body, fn);
        for_each_stmt(s.else_body, fn);
        for_each_stmt(s.default_body, fn);
        for (const SelectArm& arm : s.arms)
            for_each_stmt(arm.body, fn);
    }
}

template <typename Fn>
void for_each_stmt(const SimProgram& prog, Fn&& fn) {
    for (const auto& [name, fn_def] : prog.functions)
        for_each_stmt(fn_def.body, fn);
}

inline bool binds_channel(StmtKind k) {
    return k == StmtKind::MakeChan || k == StmtKind::NilChan || k == StmtKind::After ||
           k == StmtKind::Tick || k == StmtKind::CtxDone;
}

inline void desugar_selects(std::vector<Stmt>& block) {
    for (Stmt& s : block) {
        desugar_selects(s.body);
        desugar_selects(s.else_body);
        desugar_selects(s.default_body);
        for (SelectArm& arm : s.arms)
            desugar_selects(arm.body);
        // A one-arm select without default behaves as the bare operation.
        if (s.kind == StmtKind::Select && s.arms.size() == 1 && !s.has_default) {
            SelectArm arm = std::move(s.arms[0]);
            Stmt op;
            op.kind = arm.dir == ArmDir::Recv ? StmtKind::Recv : StmtKind::Send;
            op.loc = arm.loc;
            op.chan = arm.chan;
            op.value = arm.value;
            op.body = std::move(arm.body); // runs after the operation completes
            s = std::move(op);
        }
    }
}

} // namespace detail

// Load-time checks: entry exists, spawn/call targets exist, every referenced
// channel identifier is declared somewhere, and statement SourceLocs are
// unique program-wide. Single-arm selects are desugared in place.
inline void resolve_program(SimProgram& prog) {
    if (prog.functions.empty())
        throw ProgramError("program '" + prog.name + "': no functions");
    prog.entry_function();

    for (auto& [name, fn] : prog.functions)
        detail::desugar_selects(fn.body);

    std::set<std::string> declared;
    detail::for_each_stmt(prog, [&](const Stmt& s) {
        if (detail::binds_channel(s.kind))
            declared.insert(s.chan);
    });

    std::set<std::pair<std::string, int>> seen_locs;
    detail::for_each_stmt(prog, [&](const Stmt& s) {
        if (!seen_locs.insert({s.loc.file, s.loc.line}).second)
            throw ProgramError("program '" + prog.name + "': duplicate SourceLoc " + s.loc.str());
        for (const SelectArm& arm : s.arms) {
            if (!seen_locs.insert({arm.loc.file, arm.loc.line}).second)
                throw ProgramError("program '" + prog.name + "': duplicate SourceLoc " + arm.loc.str());
        }
    });

    auto check_chan = [&](const std::string& chan, const SourceLoc& loc) {
        if (!chan.empty() && !declared.count(chan))
            throw ProgramError("program '" + prog.name + "': unknown channel identifier '" + chan +
                               "' at " + loc.str());
    };
    detail::for_each_stmt(prog, [&](const Stmt& s) {
        switch (s.kind) {
        case StmtKind::Send:
        case StmtKind::Recv:
        case StmtKind::Close:
        case StmtKind::Range:
            check_chan(s.chan, s.loc);
            break;
        case StmtKind::Select:
            for (const SelectArm& arm : s.arms)
                check_chan(arm.chan, arm.loc);
            break;
        case StmtKind::Spawn:
        case StmtKind::Call:
            if (!prog.functions.count(s.callee))
                throw ProgramError("program '" + prog.name + "': unknown function '" + s.callee +
                                   "' at " + s.loc.str());
            break;
        default:
            break;
        }
    });
}

} // namespace leakscope
