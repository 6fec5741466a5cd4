// Shared domain types: source locations, task statuses, blocking kinds.
#pragma once

#include <cstdint>
#include <string>
#include <tuple>

namespace leakscope {

// A source position. `function` names the enclosing function; equality and
// ordering use (file, line) only, which is also the canonical rendering.
struct SourceLoc {
    std::string function;
    std::string file;
    int line = 0;

    std::string str() const { return file + ":" + std::to_string(line); }

    friend bool operator==(const SourceLoc& a, const SourceLoc& b) {
        return a.file == b.file && a.line == b.line;
    }
    friend bool operator!=(const SourceLoc& a, const SourceLoc& b) { return !(a == b); }
    friend bool operator<(const SourceLoc& a, const SourceLoc& b) {
        return std::tie(a.file, a.line) < std::tie(b.file, b.line);
    }
};

enum class TaskStatus {
    Running,
    Runnable,
    BlockedSend,
    BlockedRecv,
    BlockedSelect,
    Sleeping,
    IOWait,
    Syscall,
    CondWait,
    SemAcquire,
    Done,
};

inline bool is_blocked_status(TaskStatus s) {
    switch (s) {
    case TaskStatus::BlockedSend:
    case TaskStatus::BlockedRecv:
    case TaskStatus::BlockedSelect:
    case TaskStatus::Sleeping:
    case TaskStatus::IOWait:
    case TaskStatus::Syscall:
    case TaskStatus::CondWait:
    case TaskStatus::SemAcquire:
        return true;
    default:
        return false;
    }
}

inline const char* status_name(TaskStatus s) {
    switch (s) {
    case TaskStatus::Running: return "Running";
    case TaskStatus::Runnable: return "Runnable";
    case TaskStatus::BlockedSend: return "BlockedSend";
    case TaskStatus::BlockedRecv: return "BlockedRecv";
    case TaskStatus::BlockedSelect: return "BlockedSelect";
    case TaskStatus::Sleeping: return "Sleeping";
    case TaskStatus::IOWait: return "IOWait";
    case TaskStatus::Syscall: return "Syscall";
    case TaskStatus::CondWait: return "CondWait";
    case TaskStatus::SemAcquire: return "SemAcquire";
    case TaskStatus::Done: return "Done";
    }
    return "?";
}

// What a profiled goroutine-like task is blocked on (or not).
enum class BlockKind {
    ChanSend,
    ChanRecv,
    Select,
    IOWait,
    Syscall,
    Sleep,
    CondWait,
    SemAcquire,
    Running,
    Other,
};

inline const char* block_kind_name(BlockKind k) {
    switch (k) {
    case BlockKind::ChanSend: return "chan send";
    case BlockKind::ChanRecv: return "chan receive";
    case BlockKind::Select: return "select";
    case BlockKind::IOWait: return "IO wait";
    case BlockKind::Syscall: return "syscall";
    case BlockKind::Sleep: return "sleep";
    case BlockKind::CondWait: return "cond wait";
    case BlockKind::SemAcquire: return "semacquire";
    case BlockKind::Running: return "running";
    case BlockKind::Other: return "other";
    }
    return "?";
}

// Blocking kind the simulator assigns; used to map statuses onto profile
// state labels and back.
inline BlockKind kind_for_status(TaskStatus s) {
    switch (s) {
    case TaskStatus::BlockedSend: return BlockKind::ChanSend;
    case TaskStatus::BlockedRecv: return BlockKind::ChanRecv;
    case TaskStatus::BlockedSelect: return BlockKind::Select;
    case TaskStatus::Sleeping: return BlockKind::Sleep;
    case TaskStatus::IOWait: return BlockKind::IOWait;
    case TaskStatus::Syscall: return BlockKind::Syscall;
    case TaskStatus::CondWait: return BlockKind::CondWait;
    case TaskStatus::SemAcquire: return BlockKind::SemAcquire;
    case TaskStatus::Running:
    case TaskStatus::Runnable:
        return BlockKind::Running;
    case TaskStatus::Done:
        return BlockKind::Other;
    }
    return BlockKind::Other;
}

using Tick = std::int64_t;
using TaskId = int;
using ChanId = int;

} // namespace leakscope
