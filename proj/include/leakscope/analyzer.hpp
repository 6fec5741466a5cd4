// Fleet analysis over goroutine profiles: per-site tallies, the threshold and
// transience filters, suppression, RMS impact ranking, and report assembly.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "leakscope/classify.hpp"
#include "leakscope/profile.hpp"
#include "leakscope/types.hpp"

namespace leakscope {

struct AnalyzerConfig {
    // A site is suspicious only when some single profile shows at least this
    // many tasks blocked there.
    std::int64_t threshold = 10000;
    int top_n = 10;
    // Arm markers treated as transiently blocking: ticker waits, timer waits,
    // and cancellation waits.
    std::set<std::string> transient_symbols = {
        "runtime.selectcase.time.After",
        "runtime.selectcase.time.Tick",
        "runtime.selectcase.context.Done",
    };
    std::set<std::string> suppression; // exact function names
    std::string now;                   // report timestamp; derived from inputs when empty
    SignatureConfig signatures;
};

struct SiteStats {
    BlockSite site;
    std::vector<std::pair<std::string, std::int64_t>> per_instance_counts; // all profiles, input order
    std::int64_t total = 0;
    double rms = 0.0;
    std::string representative_instance;
    GoroutineRecord representative;
};

struct HistogramEntry {
    std::int64_t count = 0;
    double percent = 0.0;
};

struct SuppressedSummary {
    std::int64_t sites = 0;
    std::int64_t total = 0;
};

struct LeakReport {
    std::string generated_at;
    std::int64_t threshold = 0;
    int top_n = 0;
    std::size_t profiles_analyzed = 0;
    std::vector<std::string> transient_symbols; // sorted echo
    std::vector<std::string> suppression;       // sorted echo
    std::vector<SiteStats> findings;            // rms desc, total desc, site asc
    std::map<std::string, HistogramEntry> histogram;
    std::map<std::string, SuppressedSummary> suppressed;
    std::int64_t skipped_records = 0; // records that failed classification
};

class AnalyzeError : public std::runtime_error {
public:
    explicit AnalyzeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Criterion 2: drop a select whose every recorded arm is transiently
// blocking. Sites that record no arms (external profiles without markers,
// zero-case selects) are kept; non-select kinds are never dropped.
inline bool transient_keep(const BlockSite& site, const GoroutineRecord& representative,
                           const AnalyzerConfig& cfg) {
    if (site.kind != BlockKind::Select)
        return true;
    std::vector<std::string> arms = select_arm_symbols(representative, cfg.signatures);
    if (arms.empty())
        return true;
    for (const std::string& arm : arms)
        if (!cfg.transient_symbols.count(arm))
            return true;
    return false;
}

// State-category histogram over every record of every profile. Percentages
// are of all classifiable records and sum to 100 (all-zero when empty).
inline std::map<std::string, HistogramEntry> kind_histogram(
    const std::vector<GoroutineProfile>& profiles, const SignatureConfig& sig = {}) {
    std::map<std::string, HistogramEntry> hist;
    for (const std::string& cat : table_categories())
        hist[cat] = {};
    std::int64_t total = 0;
    for (const GoroutineProfile& p : profiles) {
        for (const GoroutineRecord& g : p.goroutines) {
            hist[table_category(g, sig)].count++;
            total++;
        }
    }
    if (total > 0)
        for (auto& [cat, e] : hist)
            e.percent = 100.0 * static_cast<double>(e.count) / static_cast<double>(total);
    return hist;
}

inline LeakReport analyze_fleet(const std::vector<GoroutineProfile>& profiles,
                                const AnalyzerConfig& cfg = {}) {
    if (profiles.empty())
        throw AnalyzeError("analyze_fleet: no profiles");

    LeakReport report;
    // The threshold invariant is >= 1; lower values behave as 1.
    const std::int64_t threshold = std::max<std::int64_t>(1, cfg.threshold);
    report.threshold = threshold;
    report.top_n = cfg.top_n;
    report.profiles_analyzed = profiles.size();
    report.transient_symbols.assign(cfg.transient_symbols.begin(), cfg.transient_symbols.end());
    report.suppression.assign(cfg.suppression.begin(), cfg.suppression.end());

    report.generated_at = cfg.now;
    if (report.generated_at.empty())
        for (const GoroutineProfile& p : profiles)
            report.generated_at = std::max(report.generated_at, p.captured_at);

    // Tally each profile; remember the first record seen per site per profile.
    struct PerProfile {
        std::map<BlockSite, std::int64_t> counts;
        std::map<BlockSite, const GoroutineRecord*> first;
    };
    std::vector<PerProfile> tallies(profiles.size());
    std::map<BlockSite, bool> candidates; // kinds scoped to channel operations
    for (size_t i = 0; i < profiles.size(); ++i) {
        for (const GoroutineRecord& g : profiles[i].goroutines) {
            BlockSite site;
            try {
                site = classify(g, cfg.signatures);
            } catch (const ClassifyError&) {
                report.skipped_records++;
                continue;
            }
            auto [it, fresh] = tallies[i].counts.try_emplace(site, 0);
            it->second++;
            if (fresh)
                tallies[i].first[site] = &g;
            if (site.kind == BlockKind::ChanSend || site.kind == BlockKind::ChanRecv ||
                site.kind == BlockKind::Select)
                candidates[site] = true;
        }
    }

    std::vector<SiteStats> survivors;
    for (const auto& [site, _] : candidates) {
        SiteStats st;
        st.site = site;
        std::int64_t max_count = 0;
        size_t max_idx = 0;
        double sumsq = 0.0;
        for (size_t i = 0; i < profiles.size(); ++i) {
            auto it = tallies[i].counts.find(site);
            std::int64_t c = it == tallies[i].counts.end() ? 0 : it->second;
            st.per_instance_counts.emplace_back(profiles[i].instance_id, c);
            st.total += c;
            sumsq += static_cast<double>(c) * static_cast<double>(c);
            if (c > max_count) {
                max_count = c;
                max_idx = i;
            }
        }
        // Criterion 1: some single profile meets the threshold.
        if (max_count < threshold)
            continue;
        st.rms = std::sqrt(sumsq / static_cast<double>(profiles.size()));
        st.representative_instance = profiles[max_idx].instance_id;
        st.representative = *tallies[max_idx].first.at(site);
        st.site.function = classify(st.representative, cfg.signatures).function;

        if (!transient_keep(st.site, st.representative, cfg))
            continue;
        if (cfg.suppression.count(st.site.function)) {
            SuppressedSummary& sup = report.suppressed[st.site.function];
            sup.sites++;
            sup.total += st.total;
            continue;
        }
        survivors.push_back(std::move(st));
    }

    std::sort(survivors.begin(), survivors.end(), [](const SiteStats& a, const SiteStats& b) {
        if (a.rms != b.rms)
            return a.rms > b.rms;
        if (a.total != b.total)
            return a.total > b.total;
        return a.site < b.site;
    });
    if (static_cast<int>(survivors.size()) > cfg.top_n)
        survivors.resize(static_cast<size_t>(cfg.top_n));
    report.findings = std::move(survivors);

    report.histogram = kind_histogram(profiles, cfg.signatures);
    return report;
}

} // namespace leakscope
