// Snapshot of a simulator state as a goroutine profile.
//
// Blocked tasks get a synthetic runtime sub-stack above their IR frames (park
// frame plus the operation's signature frames) so that profile classification
// sees simulator output exactly as it sees externally captured profiles.
// Select-blocked tasks additionally record one runtime.selectcase.<origin>
// marker per arm, carrying the select site; these drive the transient filter.
#pragma once

#include <string>

#include "leakscope/profile.hpp"
#include "leakscope/runtime.hpp"
#include "leakscope/types.hpp"

namespace leakscope {

namespace snapdetail {

inline Frame rt_frame(const std::string& symbol, const std::string& file, int line) {
    Frame f;
    f.symbol = symbol;
    f.location = SourceLoc{symbol, file, line};
    return f;
}

inline std::string state_label(const Task& t) {
    switch (t.status) {
    case TaskStatus::BlockedSend:
        return t.blocked_on_nil ? "chan send (nil chan)" : "chan send";
    case TaskStatus::BlockedRecv:
        return t.blocked_on_nil ? "chan receive (nil chan)" : "chan receive";
    case TaskStatus::BlockedSelect:
        return (t.park_stmt && t.park_stmt->arms.empty()) ? "select (0 cases)" : "select";
    case TaskStatus::Sleeping: return "sleep";
    case TaskStatus::IOWait: return "IO wait";
    case TaskStatus::Syscall: return "syscall";
    case TaskStatus::CondWait: return "sync.Cond.Wait";
    case TaskStatus::SemAcquire: return "semacquire";
    case TaskStatus::Running: return "running";
    case TaskStatus::Runnable: return "runnable";
    case TaskStatus::Done: return "done";
    }
    return "?";
}

} // namespace snapdetail

inline GoroutineProfile snapshot(const Simulator& sim, const std::string& instance_id) {
    using snapdetail::rt_frame;

    GoroutineProfile profile;
    profile.instance_id = instance_id;
    profile.captured_at = "tick " + std::to_string(sim.now());

    for (const Task& t : sim.tasks()) {
        if (t.status == TaskStatus::Done)
            continue;
        GoroutineRecord rec;
        rec.id = t.id;
        rec.state_label = snapdetail::state_label(t);

        switch (t.status) {
        case TaskStatus::BlockedSend:
            rec.frames.push_back(rt_frame("runtime.gopark", "runtime/proc.go", 381));
            rec.frames.push_back(rt_frame("runtime.chansend", "runtime/chan.go", 259));
            rec.frames.push_back(rt_frame("runtime.chansend1", "runtime/chan.go", 145));
            break;
        case TaskStatus::BlockedRecv:
            rec.frames.push_back(rt_frame("runtime.gopark", "runtime/proc.go", 381));
            rec.frames.push_back(rt_frame("runtime.chanrecv", "runtime/chan.go", 442));
            rec.frames.push_back(rt_frame("runtime.chanrecv1", "runtime/chan.go", 489));
            break;
        case TaskStatus::BlockedSelect: {
            rec.frames.push_back(rt_frame("runtime.gopark", "runtime/proc.go", 381));
            rec.frames.push_back(rt_frame("runtime.selectgo", "runtime/select.go", 327));
            // One marker per arm, located at the select statement itself.
            const SourceLoc site = t.blocking_site.value_or(SourceLoc{});
            for (const rtdetail::ResolvedArm& arm : t.park_arms) {
                const ChannelState& ch = sim.channels()[arm.chan];
                std::string origin = ch.origin.empty()
                                         ? (arm.dir == ArmDir::Send ? "send" : "recv")
                                         : ch.origin;
                Frame f;
                f.symbol = "runtime.selectcase." + origin;
                f.location = site;
                f.location.function = f.symbol;
                rec.frames.push_back(f);
            }
            break;
        }
        case TaskStatus::Sleeping:
        case TaskStatus::IOWait:
        case TaskStatus::Syscall:
        case TaskStatus::CondWait:
        case TaskStatus::SemAcquire:
            rec.frames.push_back(rt_frame("runtime.gopark", "runtime/proc.go", 381));
            break;
        default:
            break; // runnable/running tasks carry IR frames only
        }

        for (const SourceLoc& loc : t.frames()) {
            Frame f;
            f.symbol = loc.function;
            f.location = loc;
            rec.frames.push_back(f);
        }

        if (t.creator != "runtime.main") {
            Frame created;
            created.symbol = t.creator;
            created.location = t.creation_site;
            created.location.function = t.creator;
            rec.created_by = created;
        }
        profile.goroutines.push_back(std::move(rec));
    }
    return profile;
}

} // namespace leakscope
