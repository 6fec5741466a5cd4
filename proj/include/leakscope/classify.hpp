// Stack classification: maps a goroutine record to (blocking kind, site).
//
// A blocked goroutine carries the park symbol on top of its stack; the frames
// right underneath identify the operation (send/receive/select), and the
// blocking site is the first frame outside the runtime namespace.
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "leakscope/profile.hpp"
#include "leakscope/types.hpp"

namespace leakscope {

// Symbol sets are configuration, not hard-coded: receive and select follow
// the same shape as the send pair and may be extended per deployment.
struct SignatureConfig {
    std::string park_symbol = "runtime.gopark";
    std::string runtime_prefix = "runtime.";
    std::string select_case_prefix = "runtime.selectcase."; // synthetic arm markers
    std::vector<std::string> send_symbols = {"runtime.chansend", "runtime.chansend1"};
    std::vector<std::string> recv_symbols = {"runtime.chanrecv", "runtime.chanrecv1",
                                             "runtime.chanrecv2"};
    std::vector<std::string> select_symbols = {"runtime.selectgo"};

    bool is_runtime(const std::string& symbol) const {
        return symbol.rfind(runtime_prefix, 0) == 0;
    }
    static bool contains(const std::vector<std::string>& set, const std::string& s) {
        for (const std::string& x : set)
            if (x == s)
                return true;
        return false;
    }
};

struct BlockSite {
    BlockKind kind = BlockKind::Other;
    SourceLoc location;
    std::string function; // first non-runtime frame's symbol

    friend bool operator==(const BlockSite& a, const BlockSite& b) {
        return a.kind == b.kind && a.location == b.location;
    }
    friend bool operator<(const BlockSite& a, const BlockSite& b) {
        if (a.location != b.location)
            return a.location < b.location;
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    }
};

class ClassifyError : public std::runtime_error {
public:
    explicit ClassifyError(const std::string& msg) : std::runtime_error(msg) {}
};

inline BlockKind kind_for_label(const std::string& label) {
    if (label == "IO wait")
        return BlockKind::IOWait;
    if (label == "syscall")
        return BlockKind::Syscall;
    if (label == "sleep")
        return BlockKind::Sleep;
    if (label == "sync.Cond.Wait")
        return BlockKind::CondWait;
    if (label == "semacquire")
        return BlockKind::SemAcquire;
    return BlockKind::Other;
}

inline BlockSite classify(const GoroutineRecord& record, const SignatureConfig& cfg = {}) {
    if (record.frames.empty())
        throw ClassifyError("goroutine " + std::to_string(record.id) + ": empty stack");

    // Not parked: the goroutine is running or merely descheduled.
    if (record.frames.front().symbol != cfg.park_symbol) {
        BlockSite site;
        site.kind = (record.state_label == "running" || record.state_label == "runnable")
                        ? BlockKind::Running
                        : BlockKind::Other;
        site.location = record.frames.front().location;
        site.function = record.frames.front().symbol;
        return site;
    }

    BlockSite site;
    site.kind = BlockKind::Other;
    bool kind_from_frames = false;
    bool have_location = false;
    for (size_t i = 1; i < record.frames.size(); ++i) {
        const Frame& f = record.frames[i];
        if (!cfg.is_runtime(f.symbol)) {
            site.location = f.location;
            site.function = f.symbol;
            have_location = true;
            break;
        }
        if (!kind_from_frames) {
            if (SignatureConfig::contains(cfg.send_symbols, f.symbol)) {
                site.kind = BlockKind::ChanSend;
                kind_from_frames = true;
            } else if (SignatureConfig::contains(cfg.recv_symbols, f.symbol)) {
                site.kind = BlockKind::ChanRecv;
                kind_from_frames = true;
            } else if (SignatureConfig::contains(cfg.select_symbols, f.symbol)) {
                site.kind = BlockKind::Select;
                kind_from_frames = true;
            }
        }
    }
    if (!have_location)
        throw ClassifyError("goroutine " + std::to_string(record.id) +
                            ": parked stack has no non-runtime caller");
    if (!kind_from_frames)
        site.kind = kind_for_label(record.state_label);
    return site;
}

// Synthetic select-arm markers recorded between the select frame and the
// caller; empty for profiles that do not carry them.
inline std::vector<std::string> select_arm_symbols(const GoroutineRecord& record,
                                                   const SignatureConfig& cfg = {}) {
    std::vector<std::string> arms;
    for (const Frame& f : record.frames)
        if (f.symbol.rfind(cfg.select_case_prefix, 0) == 0)
            arms.push_back(f.symbol);
    return arms;
}

// Counts classified records per blocking site. Running/Other records are
// included so state summaries can be derived from the same tally.
inline std::map<BlockSite, std::int64_t> tally(const GoroutineProfile& profile,
                                               const SignatureConfig& cfg = {}) {
    std::map<BlockSite, std::int64_t> counts;
    for (const GoroutineRecord& g : profile.goroutines)
        counts[classify(g, cfg)]++;
    return counts;
}

// State-table categories: channel kinds split by nil-ness, selects split by
// arm count, plus the non-channel park reasons.
inline std::string table_category(const GoroutineRecord& record, const SignatureConfig& cfg = {}) {
    BlockSite site = classify(record, cfg);
    bool nil_chan = record.state_label.find("(nil chan)") != std::string::npos;
    switch (site.kind) {
    case BlockKind::ChanRecv: return nil_chan ? "chan receive (nil chan)" : "chan receive (non-nil chan)";
    case BlockKind::ChanSend: return nil_chan ? "chan send (nil chan)" : "chan send (non-nil chan)";
    case BlockKind::Select:
        return record.state_label == "select (0 cases)" ? "select (0 cases)" : "select (>0 cases)";
    case BlockKind::IOWait: return "IO wait";
    case BlockKind::Syscall: return "System call";
    case BlockKind::Sleep: return "Sleep";
    case BlockKind::Running: return "Running/Runnable";
    case BlockKind::CondWait: return "Condition Wait";
    case BlockKind::SemAcquire: return "Semaphore Acquire";
    case BlockKind::Other: return "Other";
    }
    return "Other";
}

inline const std::vector<std::string>& table_categories() {
    static const std::vector<std::string> cats = {
        "chan receive (non-nil chan)",
        "chan receive (nil chan)",
        "chan send (non-nil chan)",
        "chan send (nil chan)",
        "select (>0 cases)",
        "select (0 cases)",
        "IO wait",
        "System call",
        "Sleep",
        "Running/Runnable",
        "Condition Wait",
        "Semaphore Acquire",
    };
    return cats;
}

} // namespace leakscope
