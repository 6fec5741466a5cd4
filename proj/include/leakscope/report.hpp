// Leak-report rendering: versioned JSON and a human-readable text form.
// Identical inputs produce byte-identical output in both forms.
#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "leakscope/analyzer.hpp"

namespace leakscope {

inline std::string format_rms(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline nlohmann::ordered_json report_to_json(const LeakReport& report) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["schema_version"] = 1;
    j["generated_at"] = report.generated_at;
    j["config"] = {
        {"threshold", report.threshold},
        {"top_n", report.top_n},
        {"profiles_analyzed", report.profiles_analyzed},
        {"transient_symbols", report.transient_symbols},
        {"suppression", report.suppression},
    };

    j["findings"] = ordered_json::array();
    for (const SiteStats& s : report.findings) {
        ordered_json f;
        f["kind"] = block_kind_name(s.site.kind);
        f["file"] = s.site.location.file;
        f["line"] = s.site.location.line;
        f["function"] = s.site.function;
        f["total"] = s.total;
        f["rms"] = s.rms;
        f["per_instance"] = ordered_json::array();
        for (const auto& [instance, count] : s.per_instance_counts)
            f["per_instance"].push_back({{"instance", instance}, {"count", count}});
        ordered_json rep;
        rep["instance"] = s.representative_instance;
        rep["goroutine"] = s.representative.id;
        rep["state"] = s.representative.state_label;
        rep["frames"] = ordered_json::array();
        for (const Frame& fr : s.representative.frames)
            rep["frames"].push_back({{"symbol", fr.symbol},
                                     {"file", fr.location.file},
                                     {"line", fr.location.line}});
        f["representative"] = rep;
        j["findings"].push_back(std::move(f));
    }

    j["histogram"] = ordered_json::object();
    for (const std::string& cat : table_categories()) {
        auto it = report.histogram.find(cat);
        if (it == report.histogram.end())
            continue;
        j["histogram"][cat] = {{"count", it->second.count}, {"percent", it->second.percent}};
    }
    for (const auto& [cat, e] : report.histogram) {
        if (!j["histogram"].contains(cat) && e.count > 0)
            j["histogram"][cat] = {{"count", e.count}, {"percent", e.percent}};
    }

    j["suppressed"] = ordered_json::object();
    for (const auto& [fn, sum] : report.suppressed)
        j["suppressed"][fn] = {{"sites", sum.sites}, {"total", sum.total}};

    j["skipped_records"] = report.skipped_records;
    return j;
}

inline std::string report_worst(const SiteStats& s) {
    std::int64_t worst = 0;
    std::string instance;
    for (const auto& [inst, count] : s.per_instance_counts) {
        if (count > worst) {
            worst = count;
            instance = inst;
        }
    }
    return std::to_string(worst) + "@" + (instance.empty() ? "-" : instance);
}

inline std::string report_to_text(const LeakReport& report) {
    std::string out;
    out += "leak report";
    if (!report.generated_at.empty())
        out += " (" + report.generated_at + ")";
    out += "\n";
    out += "profiles analyzed: " + std::to_string(report.profiles_analyzed) +
           ", threshold: " + std::to_string(report.threshold) +
           ", top_n: " + std::to_string(report.top_n) + "\n";

    if (report.findings.empty()) {
        out += "no suspicious blocking sites\n";
    } else {
        out += "findings (rms-ranked):\n";
        int rank = 0;
        for (const SiteStats& s : report.findings) {
            out += " " + std::to_string(++rank) + ". " + block_kind_name(s.site.kind) + " at " +
                   s.site.location.str() + " in " + s.site.function + "\n";
            out += "    blocked: total=" + std::to_string(s.total) + " rms=" + format_rms(s.rms) +
                   " worst=" + report_worst(s) + "\n";
        }
    }

    out += "state histogram:\n";
    for (const std::string& cat : table_categories()) {
        auto it = report.histogram.find(cat);
        if (it == report.histogram.end())
            continue;
        char pct[32];
        std::snprintf(pct, sizeof(pct), "%.2f%%", it->second.percent);
        out += "  " + cat + ": " + std::to_string(it->second.count) + " (" + pct + ")\n";
    }

    if (!report.suppressed.empty()) {
        out += "suppressed:\n";
        for (const auto& [fn, sum] : report.suppressed)
            out += "  " + fn + ": sites=" + std::to_string(sum.sites) +
                   " total=" + std::to_string(sum.total) + "\n";
    }
    if (report.skipped_records > 0)
        out += "skipped records (unclassifiable): " + std::to_string(report.skipped_records) + "\n";
    return out;
}

} // namespace leakscope
