// Goroutine-profile snapshots: data model, text parser, and canonical emitter.
//
// The wire format is a full-stack dump, one block per goroutine:
//
//   # instance: <instance id>        (optional metadata)
//   # captured: <timestamp>          (optional metadata)
//   goroutine profile: total <N>
//
//   goroutine <id> [<state label>]:
//   <symbol>
//   <TAB><file>:<line>
//   ...
//   created by <symbol>              (optional, last)
//   <TAB><file>:<line>
//
// Blocks are separated by one blank line, ids ascend in canonical output, and
// files use the `.gprof.txt` extension. Bit-exact rules in
// docs/profile-format.md.
#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "leakscope/types.hpp"

namespace leakscope {

struct Frame {
    std::string symbol;
    SourceLoc location;

    friend bool operator==(const Frame& a, const Frame& b) {
        return a.symbol == b.symbol && a.location == b.location;
    }
};

struct GoroutineRecord {
    int id = 0;
    std::string state_label;
    std::vector<Frame> frames; // innermost first, outermost last
    std::optional<Frame> created_by;

    friend bool operator==(const GoroutineRecord& a, const GoroutineRecord& b) {
        return a.id == b.id && a.state_label == b.state_label && a.frames == b.frames &&
               a.created_by == b.created_by;
    }
};

struct GoroutineProfile {
    std::string instance_id;
    std::string captured_at;
    std::vector<GoroutineRecord> goroutines;

    friend bool operator==(const GoroutineProfile& a, const GoroutineProfile& b) {
        return a.instance_id == b.instance_id && a.captured_at == b.captured_at &&
               a.goroutines == b.goroutines;
    }
};

class ProfileParseError : public std::runtime_error {
public:
    ProfileParseError(int line, const std::string& msg)
        : std::runtime_error("profile parse error at line " + std::to_string(line) + ": " + msg),
          line(line) {}
    int line;
};

inline std::string emit_profile(const GoroutineProfile& profile) {
    std::string out;
    if (!profile.instance_id.empty())
        out += "# instance: " + profile.instance_id + "\n";
    if (!profile.captured_at.empty())
        out += "# captured: " + profile.captured_at + "\n";
    out += "goroutine profile: total " + std::to_string(profile.goroutines.size()) + "\n";

    std::vector<const GoroutineRecord*> order;
    order.reserve(profile.goroutines.size());
    for (const GoroutineRecord& g : profile.goroutines)
        order.push_back(&g);
    std::sort(order.begin(), order.end(),
              [](const GoroutineRecord* a, const GoroutineRecord* b) { return a->id < b->id; });

    for (const GoroutineRecord* g : order) {
        out += "\n";
        out += "goroutine " + std::to_string(g->id) + " [" + g->state_label + "]:\n";
        for (const Frame& f : g->frames) {
            out += f.symbol + "\n";
            out += "\t" + f.location.file + ":" + std::to_string(f.location.line) + "\n";
        }
        if (g->created_by) {
            out += "created by " + g->created_by->symbol + "\n";
            out += "\t" + g->created_by->location.file + ":" +
                   std::to_string(g->created_by->location.line) + "\n";
        }
    }
    return out;
}

inline GoroutineProfile parse_profile(const std::string& text) {
    std::vector<std::string> lines;
    {
        size_t start = 0;
        while (start <= text.size()) {
            size_t nl = text.find('\n', start);
            if (nl == std::string::npos) {
                if (start < text.size())
                    lines.push_back(text.substr(start));
                break;
            }
            lines.push_back(text.substr(start, nl - start));
            start = nl + 1;
        }
    }

    GoroutineProfile profile;
    size_t i = 0;
    auto lineno = [&]() { return static_cast<int>(i) + 1; };

    // Optional metadata, then the mandatory header.
    long expected_total = -1;
    while (i < lines.size()) {
        const std::string& line = lines[i];
        if (line.rfind("# instance: ", 0) == 0) {
            profile.instance_id = line.substr(12);
            ++i;
        } else if (line.rfind("# captured: ", 0) == 0) {
            profile.captured_at = line.substr(12);
            ++i;
        } else {
            break;
        }
    }
    if (i >= lines.size() || lines[i].rfind("goroutine profile: total ", 0) != 0)
        throw ProfileParseError(lineno(), "missing 'goroutine profile: total <N>' header");
    {
        std::string num = lines[i].substr(25);
        try {
            size_t used = 0;
            expected_total = std::stol(num, &used);
            if (used != num.size() || expected_total < 0)
                throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ProfileParseError(lineno(), "bad total count '" + num + "'");
        }
        ++i;
    }

    auto parse_location = [&](const std::string& l) -> SourceLoc {
        if (l.empty() || l[0] != '\t')
            throw ProfileParseError(lineno(), "frame without location (expected tab-indented file:line)");
        std::string body = l.substr(1);
        auto pos = body.rfind(':');
        if (pos == std::string::npos || pos == 0 || pos + 1 == body.size())
            throw ProfileParseError(lineno(), "bad location '" + body + "'");
        SourceLoc loc;
        loc.file = body.substr(0, pos);
        try {
            size_t used = 0;
            loc.line = std::stoi(body.substr(pos + 1), &used);
            if (used != body.size() - pos - 1 || loc.line <= 0)
                throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ProfileParseError(lineno(), "bad line number in '" + body + "'");
        }
        return loc;
    };

    std::set<int> seen_ids;
    while (i < lines.size()) {
        if (!lines[i].empty())
            throw ProfileParseError(lineno(), "expected blank line between goroutine blocks");
        ++i;
        if (i >= lines.size())
            throw ProfileParseError(lineno(), "blank line at end of profile");

        // goroutine <id> [<label>]:
        const std::string& head_line = lines[i];
        if (head_line.rfind("goroutine ", 0) != 0 || head_line.back() != ':')
            throw ProfileParseError(lineno(), "malformed goroutine header: '" + head_line + "'");
        std::string head = head_line.substr(10, head_line.size() - 11);
        auto lb = head.find(" [");
        if (lb == std::string::npos || head.empty() || head.back() != ']')
            throw ProfileParseError(lineno(), "malformed goroutine header: '" + head_line + "'");
        GoroutineRecord rec;
        try {
            size_t used = 0;
            rec.id = std::stoi(head.substr(0, lb), &used);
            if (used != lb || rec.id <= 0)
                throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ProfileParseError(lineno(), "bad goroutine id in '" + head_line + "'");
        }
        rec.state_label = head.substr(lb + 2, head.size() - lb - 3);
        if (!seen_ids.insert(rec.id).second)
            throw ProfileParseError(lineno(), "duplicate goroutine id " + std::to_string(rec.id));
        ++i;

        // Frame pairs until the next blank separator or EOF.
        while (i < lines.size() && !lines[i].empty()) {
            const std::string& sym_line = lines[i];
            if (sym_line[0] == '\t')
                throw ProfileParseError(lineno(), "location without preceding symbol");
            bool created = sym_line.rfind("created by ", 0) == 0;
            std::string symbol = created ? sym_line.substr(11) : sym_line;
            if (symbol.empty())
                throw ProfileParseError(lineno(), "empty symbol line");
            ++i;
            if (i >= lines.size())
                throw ProfileParseError(lineno(), "frame without location (end of input)");
            SourceLoc loc = parse_location(lines[i]);
            loc.function = symbol;
            ++i;
            if (created) {
                if (rec.created_by)
                    throw ProfileParseError(lineno(), "duplicate 'created by' entry");
                rec.created_by = Frame{symbol, loc};
            } else {
                if (rec.created_by)
                    throw ProfileParseError(lineno(), "frame after 'created by' entry");
                rec.frames.push_back(Frame{symbol, loc});
            }
        }

        if (rec.frames.empty())
            throw ProfileParseError(lineno(), "goroutine " + std::to_string(rec.id) + " has no frames");
        profile.goroutines.push_back(std::move(rec));
    }

    if (static_cast<long>(profile.goroutines.size()) != expected_total)
        throw ProfileParseError(lineno(), "total mismatch: header says " +
                                              std::to_string(expected_total) + ", found " +
                                              std::to_string(profile.goroutines.size()));
    return profile;
}

} // namespace leakscope
