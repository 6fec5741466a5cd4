// Command-line surface: simulate, check, analyze, lint, scenarios.
//
// Exit codes are a stable contract: 0 success/clean, 1 findings, 2 usage
// error, 3 no input, 4 strict parse failure. Every command is deterministic
// given (inputs, seed, config); nothing reads the wall clock.
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "leakscope/analyzer.hpp"
#include "leakscope/checker.hpp"
#include "leakscope/lint.hpp"
#include "leakscope/parser.hpp"
#include "leakscope/profile.hpp"
#include "leakscope/report.hpp"
#include "leakscope/runtime.hpp"
#include "leakscope/scenarios.hpp"
#include "leakscope/snapshot.hpp"

namespace leakscope::cli {

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNoInput = 3;
constexpr int kExitStrictParse = 4;

struct Args {
    std::vector<std::string> positional;
    std::map<std::string, std::vector<std::string>> flags; // name -> values ("" for bare)

    bool has(const std::string& name) const { return flags.count(name) > 0; }
    std::string get(const std::string& name, const std::string& dflt = "") const {
        auto it = flags.find(name);
        return it == flags.end() || it->second.empty() ? dflt : it->second.back();
    }
    std::vector<std::string> all(const std::string& name) const {
        auto it = flags.find(name);
        return it == flags.end() ? std::vector<std::string>{} : it->second;
    }
};

namespace clidetail {

// Flags that take a value; everything else is a bare switch.
inline bool flag_takes_value(const std::string& name) {
    static const std::vector<std::string> valued = {
        "seed",   "max-steps", "max-ticks", "param",  "cond",     "n",    "workers",
        "items",  "listeners", "out",       "config", "suppress", "transient",
        "threshold", "top-n",  "format",    "now",    "instance", "err",
    };
    for (const std::string& v : valued)
        if (v == name)
            return true;
    return false;
}

inline std::optional<Args> parse_args(const std::vector<std::string>& argv, std::ostream& err) {
    Args args;
    for (size_t i = 0; i < argv.size(); ++i) {
        const std::string& a = argv[i];
        if (a.rfind("--", 0) != 0) {
            args.positional.push_back(a);
            continue;
        }
        std::string name = a.substr(2);
        std::string value;
        bool have_value = false;
        auto eq = name.find('=');
        if (eq != std::string::npos) {
            value = name.substr(eq + 1);
            name = name.substr(0, eq);
            have_value = true;
        }
        if (!have_value && flag_takes_value(name) && name != "err" && name != "strict") {
            if (i + 1 >= argv.size()) {
                err << "error: flag --" << name << " requires a value\n";
                return std::nullopt;
            }
            value = argv[++i];
            have_value = true;
        }
        args.flags[name].push_back(value);
    }
    return args;
}

inline bool parse_i64(const std::string& s, std::int64_t& out) {
    try {
        size_t used = 0;
        out = std::stoll(s, &used);
        return used == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

inline bool parse_bool(const std::string& s, bool& out) {
    if (s.empty() || s == "true" || s == "1" || s == "yes") {
        out = true;
        return true;
    }
    if (s == "false" || s == "0" || s == "no") {
        out = false;
        return true;
    }
    return false;
}

// Flat key=value config file; '#' starts a comment.
inline bool load_config_file(const std::string& path, std::map<std::string, std::string>& kv,
                             std::ostream& err) {
    std::ifstream in(path);
    if (!in) {
        err << "error: cannot open config file '" << path << "'\n";
        return false;
    }
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        auto notspace = line.find_first_not_of(" \t\r");
        if (notspace == std::string::npos)
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            err << "error: bad config line '" << line << "' in " << path << "\n";
            return false;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return true;
}

// One name per line, '#' comments.
inline bool load_name_list(const std::string& path, std::set<std::string>& out,
                           std::ostream& err) {
    std::ifstream in(path);
    if (!in) {
        err << "error: cannot open file '" << path << "'\n";
        return false;
    }
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            continue;
        auto e = line.find_last_not_of(" \t\r");
        out.insert(line.substr(b, e - b + 1));
    }
    return true;
}

struct SimInput {
    std::string name;       // scenario name or file stem
    SimProgram program;     // owned copy (file case) or copy of builtin
    SchedulerConfig config;
    RunOptions options;
};

// Resolves a scenario name or .cir file plus flag overrides into a runnable
// input. Returns nullopt after printing a diagnostic.
inline std::optional<SimInput> resolve_sim_input(const Args& args, std::ostream& err) {
    if (args.positional.size() < 2) {
        err << "error: expected a scenario name or program file\n";
        return std::nullopt;
    }
    const std::string& target = args.positional[1];
    SimInput in;

    std::map<std::string, std::string> cfg_kv;
    if (args.has("config") && !load_config_file(args.get("config"), cfg_kv, err))
        return std::nullopt;

    if (const Scenario* sc = find_scenario(target)) {
        in.name = sc->name;
        in.program = sc->program;
        in.config = sc->config;
        in.options = sc->defaults;
    } else if (std::filesystem::exists(target)) {
        std::ifstream f(target);
        std::stringstream ss;
        ss << f.rdbuf();
        try {
            in.program = load_program(ss.str(), std::filesystem::path(target).filename().string());
        } catch (const ParseError& e) {
            err << "error: " << target << ": " << e.what() << "\n";
            return std::nullopt;
        }
        in.name = std::filesystem::path(target).stem().string();
    } else {
        err << "error: unknown scenario or file '" << target << "'. available scenarios:\n";
        for (const Scenario& s : builtin_scenarios())
            err << "  " << s.name << " - " << s.summary << "\n";
        return std::nullopt;
    }

    auto cfg_or_flag = [&](const std::string& key) -> std::string {
        if (args.has(key))
            return args.get(key);
        auto it = cfg_kv.find(key);
        return it == cfg_kv.end() ? "" : it->second;
    };

    std::string v;
    std::int64_t n = 0;
    if (!(v = cfg_or_flag("seed")).empty()) {
        if (!parse_i64(v, n)) { err << "error: bad --seed '" << v << "'\n"; return std::nullopt; }
        in.config.seed = static_cast<std::uint64_t>(n);
    }
    if (!(v = cfg_or_flag("max-steps")).empty()) {
        if (!parse_i64(v, n)) { err << "error: bad --max-steps '" << v << "'\n"; return std::nullopt; }
        in.config.max_steps = n;
    }
    if (!(v = cfg_or_flag("max-ticks")).empty()) {
        if (!parse_i64(v, n)) { err << "error: bad --max-ticks '" << v << "'\n"; return std::nullopt; }
        in.config.max_ticks = n;
    }

    auto set_param = [&](const std::string& key, const std::string& val) -> bool {
        std::int64_t num = 0;
        if (!parse_i64(val, num)) {
            err << "error: parameter " << key << " needs an integer, got '" << val << "'\n";
            return false;
        }
        in.options.params[key] = num;
        return true;
    };
    for (const std::string& kv : args.all("param")) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            err << "error: --param expects name=value\n";
            return std::nullopt;
        }
        if (!set_param(kv.substr(0, eq), kv.substr(eq + 1)))
            return std::nullopt;
    }
    for (const char* alias : {"n", "workers", "items", "listeners"})
        if (args.has(alias) && !set_param(alias, args.get(alias)))
            return std::nullopt;
    for (const std::string& kv : args.all("cond")) {
        auto eq = kv.find('=');
        std::string name = eq == std::string::npos ? kv : kv.substr(0, eq);
        bool val = true;
        if (eq != std::string::npos && !parse_bool(kv.substr(eq + 1), val)) {
            err << "error: --cond " << kv << ": expected true/false\n";
            return std::nullopt;
        }
        in.options.conds[name] = val;
    }
    if (args.has("err")) {
        bool val = true;
        if (!parse_bool(args.get("err"), val)) {
            err << "error: --err expects true/false\n";
            return std::nullopt;
        }
        in.options.conds["err"] = val;
    }
    return in;
}

inline bool write_file(const std::filesystem::path& path, const std::string& content,
                       std::ostream& err) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        err << "error: cannot write '" << path.string() << "'\n";
        return false;
    }
    f << content;
    return true;
}

} // namespace clidetail

inline void print_usage(std::ostream& out) {
    out << "usage: leakscope <command> [args]\n"
        << "\n"
        << "commands:\n"
        << "  simulate <scenario|file.cir>  run a program, write trace and profile\n"
        << "  check <scenario|file.cir>     fail (exit 1) if any task lingers at the end\n"
        << "  analyze <dir|files...>        rank suspicious blocking sites across profiles\n"
        << "  lint <scenario|file.cir>      flag ranged channels that are never closed\n"
        << "  scenarios                     list builtin scenarios\n"
        << "\n"
        << "common flags: --seed N --max-steps N --max-ticks N --param k=v --cond k=v\n"
        << "              --n N --workers N --items N --listeners N --err[=bool]\n"
        << "              --out DIR --config FILE\n"
        << "analyze flags: --threshold N --top-n N --suppress FILE --transient FILE\n"
        << "               --strict --format json|text --now TS\n"
        << "check flags:   --suppress FILE\n";
}

inline int cmd_scenarios(std::ostream& out) {
    for (const Scenario& s : builtin_scenarios())
        out << s.name << " - " << s.summary << "\n";
    return kExitOk;
}

inline int cmd_simulate(const Args& args, std::ostream& out, std::ostream& err) {
    auto input = clidetail::resolve_sim_input(args, err);
    if (!input)
        return kExitUsage;

    Simulator sim(input->program, input->config, input->options);
    RunOutcome outcome = sim.run();

    std::string instance = args.get("instance", input->name);
    GoroutineProfile profile = snapshot(sim, instance);

    std::filesystem::path dir = args.get("out", ".");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!clidetail::write_file(dir / (input->name + ".trace.txt"), sim.render_trace(), err) ||
        !clidetail::write_file(dir / (input->name + ".gprof.txt"), emit_profile(profile), err))
        return kExitUsage;

    out << "scenario: " << input->name << " seed=" << input->config.seed << "\n";
    out << "outcome: " << (outcome == RunOutcome::Quiescent ? "quiescent" : "step bound exceeded")
        << " steps=" << sim.steps_executed() << " ticks=" << sim.now() << "\n";
    out << sim.render_task_table();
    CheckResult check = find_lingering(sim);
    out << "lingering tasks: " << check.findings.size() << "\n";
    out << "wrote " << (dir / (input->name + ".trace.txt")).generic_string() << " and "
        << (dir / (input->name + ".gprof.txt")).generic_string() << "\n";
    return kExitOk;
}

inline int cmd_check(const Args& args, std::ostream& out, std::ostream& err) {
    auto input = clidetail::resolve_sim_input(args, err);
    if (!input)
        return kExitUsage;

    Suppression suppression;
    if (args.has("suppress") &&
        !clidetail::load_name_list(args.get("suppress"), suppression, err))
        return kExitUsage;

    VerifyResult res = verify_program(input->program, input->config, input->options, suppression);
    if (!res.check.suppressed.empty()) {
        out << "suppressed: " << res.check.suppressed.size() << "\n";
        for (const LeakFinding& f : res.check.suppressed)
            out << "  " << f.str() << "\n";
    }
    if (res.pass) {
        out << "check passed: no lingering tasks in '" << input->name << "'\n";
        return kExitOk;
    }
    err << "check failed: " << res.check.findings.size() << " lingering task(s) in '"
        << input->name << "'\n";
    for (const LeakFinding& f : res.check.findings)
        err << "  " << f.str() << "\n";
    if (res.outcome == RunOutcome::BoundExceeded)
        err << "note: step bound exceeded with runnable tasks (livelock, not quiescence)\n";
    return kExitFindings;
}

inline int cmd_analyze(const Args& args, std::ostream& out, std::ostream& err) {
    if (args.positional.size() < 2) {
        err << "error: expected profile files or directories\n";
        return kExitUsage;
    }

    std::map<std::string, std::string> cfg_kv;
    if (args.has("config") && !clidetail::load_config_file(args.get("config"), cfg_kv, err))
        return kExitUsage;
    auto cfg_or_flag = [&](const std::string& key) -> std::string {
        if (args.has(key))
            return args.get(key);
        auto it = cfg_kv.find(key);
        return it == cfg_kv.end() ? "" : it->second;
    };

    AnalyzerConfig cfg;
    std::string v;
    std::int64_t n = 0;
    if (!(v = cfg_or_flag("threshold")).empty()) {
        if (!clidetail::parse_i64(v, n) || n < 1) {
            err << "error: bad --threshold '" << v << "'\n";
            return kExitUsage;
        }
        cfg.threshold = n;
    }
    if (!(v = cfg_or_flag("top-n")).empty()) {
        if (!clidetail::parse_i64(v, n) || n < 1) {
            err << "error: bad --top-n '" << v << "'\n";
            return kExitUsage;
        }
        cfg.top_n = static_cast<int>(n);
    }
    if (args.has("suppress") && !clidetail::load_name_list(args.get("suppress"), cfg.suppression, err))
        return kExitUsage;
    if (args.has("transient")) {
        std::set<std::string> symbols;
        if (!clidetail::load_name_list(args.get("transient"), symbols, err))
            return kExitUsage;
        cfg.transient_symbols = std::move(symbols); // file replaces the defaults
    }
    cfg.now = cfg_or_flag("now");
    bool strict = args.has("strict");
    std::string format = cfg_or_flag("format");
    if (format.empty())
        format = "text";
    if (format != "text" && format != "json") {
        err << "error: --format must be json or text\n";
        return kExitUsage;
    }

    // Collect profile files: directories contribute their *.gprof.txt sorted
    // by name; explicit files are taken as given.
    std::vector<std::filesystem::path> files;
    for (size_t i = 1; i < args.positional.size(); ++i) {
        std::filesystem::path p = args.positional[i];
        if (std::filesystem::is_directory(p)) {
            std::vector<std::filesystem::path> found;
            for (const auto& entry : std::filesystem::directory_iterator(p))
                if (entry.is_regular_file() &&
                    entry.path().filename().string().size() > 10 &&
                    entry.path().filename().string().rfind(".gprof.txt") ==
                        entry.path().filename().string().size() - 10)
                    found.push_back(entry.path());
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else if (std::filesystem::exists(p)) {
            files.push_back(p);
        } else {
            err << "error: no such file or directory '" << p.string() << "'\n";
            return kExitNoInput;
        }
    }

    std::vector<GoroutineProfile> profiles;
    for (const std::filesystem::path& p : files) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        try {
            GoroutineProfile profile = parse_profile(ss.str());
            if (profile.instance_id.empty())
                profile.instance_id = p.stem().stem().string();
            profiles.push_back(std::move(profile));
        } catch (const ProfileParseError& e) {
            if (strict) {
                err << "error: " << p.generic_string() << ": " << e.what() << "\n";
                return kExitStrictParse;
            }
            err << "warning: skipping " << p.generic_string() << ": " << e.what() << "\n";
        }
    }
    if (profiles.empty()) {
        err << "error: no parseable profiles\n";
        return kExitNoInput;
    }

    LeakReport report = analyze_fleet(profiles, cfg);
    std::string json_text = report_to_json(report).dump(2) + "\n";
    std::string text = report_to_text(report);

    std::filesystem::path dir = args.get("out", ".");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!clidetail::write_file(dir / "report.json", json_text, err) ||
        !clidetail::write_file(dir / "report.txt", text, err))
        return kExitUsage;

    out << (format == "json" ? json_text : text);
    return kExitOk;
}

inline int cmd_lint(const Args& args, std::ostream& out, std::ostream& err) {
    if (args.positional.size() < 2) {
        err << "error: expected a scenario name or program file\n";
        return kExitUsage;
    }
    const std::string& target = args.positional[1];
    SimProgram program;
    if (std::filesystem::exists(target)) {
        std::ifstream f(target);
        std::stringstream ss;
        ss << f.rdbuf();
        try {
            program = load_program(ss.str(), std::filesystem::path(target).filename().string());
        } catch (const ParseError& e) {
            err << "error: " << target << ": " << e.what() << "\n";
            return kExitUsage;
        }
    } else if (const Scenario* sc = find_scenario(target)) {
        program = sc->program;
    } else {
        err << "error: unknown scenario or file '" << target << "'\n";
        return kExitUsage;
    }

    std::vector<LintFinding> findings = range_lint(program);
    for (const LintFinding& f : findings)
        out << f.str() << "\n";
    if (findings.empty()) {
        out << "no findings\n";
        return kExitOk;
    }
    return kExitFindings;
}

inline int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    if (argv.empty()) {
        print_usage(err);
        return kExitUsage;
    }
    auto parsed = clidetail::parse_args(argv, err);
    if (!parsed)
        return kExitUsage;
    const Args& args = *parsed;
    if (args.positional.empty()) {
        print_usage(args.has("help") ? out : err);
        return args.has("help") ? kExitOk : kExitUsage;
    }
    const std::string& cmd = args.positional[0];
    try {
        if (cmd == "simulate")
            return cmd_simulate(args, out, err);
        if (cmd == "check")
            return cmd_check(args, out, err);
        if (cmd == "analyze")
            return cmd_analyze(args, out, err);
        if (cmd == "lint")
            return cmd_lint(args, out, err);
        if (cmd == "scenarios")
            return cmd_scenarios(out);
        if (cmd == "help" || cmd == "--help") {
            print_usage(out);
            return kExitOk;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    err << "error: unknown command '" << cmd << "'\n";
    print_usage(err);
    return kExitUsage;
}

inline int run_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace leakscope::cli
