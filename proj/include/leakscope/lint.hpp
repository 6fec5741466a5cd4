// Range linter: flags channels iterated with `range` that no statement in the
// program ever closes. Purely syntactic may-close reachability: a close on
// any path (even a conditional branch) clears the channel. No interleaving
// analysis.
#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "leakscope/program.hpp"

namespace leakscope {

struct LintFinding {
    std::string chan;
    SourceLoc range_site;

    std::string str() const {
        return "channel '" + chan + "' ranged at " + range_site.str() + " is never closed";
    }
};

inline std::vector<LintFinding> range_lint(const SimProgram& program) {
    std::set<std::string> closed;
    detail::for_each_stmt(program, [&](const Stmt& s) {
        if (s.kind == StmtKind::Close)
            closed.insert(s.chan);
        // Runtime-cancelled channels close without a close statement.
        if (s.kind == StmtKind::CtxDone && !s.never)
            closed.insert(s.chan);
    });

    std::vector<LintFinding> findings;
    detail::for_each_stmt(program, [&](const Stmt& s) {
        if (s.kind == StmtKind::Range && !closed.count(s.chan))
            findings.push_back({s.chan, s.loc});
    });
    std::sort(findings.begin(), findings.end(), [](const LintFinding& a, const LintFinding& b) {
        return a.range_site < b.range_site;
    });
    return findings;
}

} // namespace leakscope
