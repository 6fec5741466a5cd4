// Test-side fleet generator and a naive, independent recomputation of the
// analyzer pipeline (threshold, transience, suppression, RMS ranking). Kept
// deliberately separate from the library implementation so the two can be
// compared as oracles.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "leakscope/analyzer.hpp"
#include "leakscope/profile.hpp"
#include "leakscope/types.hpp"

namespace fleetoracle {

struct GenSite {
    leakscope::BlockKind kind;
    std::string file;
    int line;
    std::string function;
    bool transient_only; // selects whose every arm marker is transient
};

struct GenFleet {
    std::vector<GenSite> sites;
    std::vector<std::vector<std::int64_t>> counts; // [profile][site]
    std::set<std::string> suppressed;
    std::int64_t threshold = 10000;
    int top_n = 10;
};

inline GenFleet random_fleet(std::mt19937& gen) {
    auto pick = [&](int n) { return static_cast<int>(gen() % static_cast<unsigned>(n)); };
    GenFleet fleet;
    int nprofiles = 1 + pick(5);
    int nsites = 1 + pick(20);
    const std::int64_t thresholds[] = {1, 100, 9999, 10000, 15000};
    fleet.threshold = thresholds[pick(5)];
    const int tops[] = {3, 10, 20, 100};
    fleet.top_n = tops[pick(4)];

    for (int j = 0; j < nsites; ++j) {
        GenSite s;
        int k = pick(4);
        s.kind = k == 0   ? leakscope::BlockKind::ChanSend
                 : k == 1 ? leakscope::BlockKind::ChanRecv
                          : leakscope::BlockKind::Select;
        s.file = "svc/f" + std::to_string(j) + ".go";
        s.line = 10 + j;
        s.function = "app.fn" + std::to_string(j);
        s.transient_only = s.kind == leakscope::BlockKind::Select && pick(3) == 0;
        fleet.sites.push_back(std::move(s));
        if (pick(5) == 0)
            fleet.suppressed.insert("app.fn" + std::to_string(j));
    }

    // Counts span [0, 20000] but skew small so materialized fleets stay
    // cheap; duplicates appear deliberately to exercise tie-breaking.
    auto draw_count = [&]() -> std::int64_t {
        if (pick(4) == 0)
            return static_cast<std::int64_t>(gen() % 20001);
        return static_cast<std::int64_t>(gen() % 800);
    };
    std::vector<std::int64_t> common(nprofiles);
    for (auto& c : common)
        c = draw_count();
    fleet.counts.assign(nprofiles, std::vector<std::int64_t>(nsites, 0));
    for (int j = 0; j < nsites; ++j) {
        bool reuse = pick(3) == 0;
        for (int i = 0; i < nprofiles; ++i) {
            if (reuse)
                fleet.counts[i][j] = common[i];
            else if (pick(3) == 0)
                fleet.counts[i][j] = 0;
            else
                fleet.counts[i][j] = draw_count();
        }
    }
    return fleet;
}

inline std::vector<leakscope::GoroutineProfile> materialize(const GenFleet& fleet) {
    using namespace leakscope;
    std::vector<GoroutineProfile> profiles;
    for (size_t i = 0; i < fleet.counts.size(); ++i) {
        GoroutineProfile p;
        p.instance_id = "inst-" + std::to_string(i);
        p.captured_at = "tick " + std::to_string(100 + i);
        int next_id = 1;
        for (size_t j = 0; j < fleet.sites.size(); ++j) {
            const GenSite& s = fleet.sites[j];
            for (std::int64_t n = 0; n < fleet.counts[i][j]; ++n) {
                GoroutineRecord g;
                g.id = next_id++;
                Frame park{"runtime.gopark", SourceLoc{"", "runtime/proc.go", 381}};
                Frame caller{s.function, SourceLoc{s.function, s.file, s.line}};
                switch (s.kind) {
                case BlockKind::ChanSend:
                    g.state_label = "chan send";
                    g.frames = {park, Frame{"runtime.chansend", SourceLoc{"", "runtime/chan.go", 259}},
                                caller};
                    break;
                case BlockKind::ChanRecv:
                    g.state_label = "chan receive";
                    g.frames = {park, Frame{"runtime.chanrecv", SourceLoc{"", "runtime/chan.go", 442}},
                                caller};
                    break;
                default: {
                    g.state_label = "select";
                    g.frames = {park, Frame{"runtime.selectgo", SourceLoc{"", "runtime/select.go", 327}}};
                    if (s.transient_only) {
                        g.frames.push_back(Frame{"runtime.selectcase.time.Tick",
                                                 SourceLoc{"", s.file, s.line}});
                        g.frames.push_back(Frame{"runtime.selectcase.context.Done",
                                                 SourceLoc{"", s.file, s.line}});
                    } else {
                        g.frames.push_back(Frame{"runtime.selectcase.recv",
                                                 SourceLoc{"", s.file, s.line}});
                    }
                    g.frames.push_back(caller);
                    break;
                }
                }
                p.goroutines.push_back(std::move(g));
            }
        }
        profiles.push_back(std::move(p));
    }
    return profiles;
}

struct NaiveFinding {
    size_t site_idx;
    double rms;
    std::int64_t total;
};

// Straight re-evaluation of the published rules, no shared code with the
// analyzer: survive iff max count >= threshold, not transient-only, not
// suppressed; rms = sqrt(sum(c^2)/P); order by rms desc, total desc, then
// (file, line, kind); truncate to top_n.
inline std::vector<NaiveFinding> naive_analyze(const GenFleet& fleet) {
    std::vector<NaiveFinding> out;
    size_t nprofiles = fleet.counts.size();
    for (size_t j = 0; j < fleet.sites.size(); ++j) {
        const GenSite& s = fleet.sites[j];
        std::int64_t maxc = 0, total = 0;
        double sumsq = 0;
        for (size_t i = 0; i < nprofiles; ++i) {
            std::int64_t c = fleet.counts[i][j];
            maxc = std::max(maxc, c);
            total += c;
            sumsq += double(c) * double(c);
        }
        if (maxc < fleet.threshold)
            continue;
        if (s.transient_only)
            continue;
        if (fleet.suppressed.count(s.function))
            continue;
        out.push_back({j, std::sqrt(sumsq / double(nprofiles)), total});
    }
    std::sort(out.begin(), out.end(), [&](const NaiveFinding& a, const NaiveFinding& b) {
        if (a.rms != b.rms)
            return a.rms > b.rms;
        if (a.total != b.total)
            return a.total > b.total;
        const GenSite& sa = fleet.sites[a.site_idx];
        const GenSite& sb = fleet.sites[b.site_idx];
        if (sa.file != sb.file)
            return sa.file < sb.file;
        if (sa.line != sb.line)
            return sa.line < sb.line;
        return static_cast<int>(sa.kind) < static_cast<int>(sb.kind);
    });
    if (out.size() > static_cast<size_t>(fleet.top_n))
        out.resize(static_cast<size_t>(fleet.top_n));
    return out;
}

} // namespace fleetoracle
