// End-of-run leak checking: any task still present when the simulation goes
// quiescent is reported, with its status, code context, and creation context.
// The checker runs outside the simulation, so it never lists itself.
//
// Suppression entries are exact function names (the leaf function of the
// lingering stack). Suppressed tasks are reported separately and never fail
// a verification, which lets legacy leaks be burned down gradually.
#pragma once

#include <set>
#include <string>
#include <vector>

#include "leakscope/runtime.hpp"
#include "leakscope/types.hpp"

namespace leakscope {

using Suppression = std::set<std::string>;

struct LeakFinding {
    TaskId task = 0;
    TaskStatus status = TaskStatus::Done;
    std::string leaf_function; // code context
    SourceLoc code_site;
    std::string creator_function; // creation context
    SourceLoc creation_site;

    std::string str() const {
        return "task=" + std::to_string(task) + " status=" + status_name(status) + " at " +
               leaf_function + " (" + code_site.str() + ") created by " + creator_function +
               " (" + creation_site.str() + ")";
    }
};

struct CheckResult {
    std::vector<LeakFinding> findings;
    std::vector<LeakFinding> suppressed;

    bool clean() const { return findings.empty(); }
};

// Collects every non-Done task from a finished (quiescent or step-bounded)
// simulation, splitting suppressed leaf functions out of the failing set.
inline CheckResult find_lingering(const Simulator& sim, const Suppression& suppression = {}) {
    CheckResult result;
    for (const Task& t : sim.tasks()) {
        if (t.status == TaskStatus::Done)
            continue;
        LeakFinding f;
        f.task = t.id;
        f.status = t.status;
        std::vector<SourceLoc> frames = t.frames();
        if (!frames.empty()) {
            f.leaf_function = frames.front().function;
            f.code_site = t.blocking_site ? *t.blocking_site : frames.front();
        }
        f.creator_function = t.creator;
        f.creation_site = t.creation_site;
        if (suppression.count(f.leaf_function))
            result.suppressed.push_back(std::move(f));
        else
            result.findings.push_back(std::move(f));
    }
    return result;
}

struct VerifyResult {
    bool pass = false;
    RunOutcome outcome = RunOutcome::Quiescent;
    CheckResult check;
};

// Runs the program to completion, then applies find_lingering: the
// verification fails iff any unsuppressed task lingers.
inline VerifyResult verify_program(const SimProgram& program, const SchedulerConfig& config = {},
                                   const RunOptions& options = {},
                                   const Suppression& suppression = {}) {
    Simulator sim(program, config, options);
    VerifyResult res;
    res.outcome = sim.run();
    res.check = find_lingering(sim, suppression);
    res.pass = res.check.clean();
    return res;
}

} // namespace leakscope
