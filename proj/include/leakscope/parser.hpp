// Line-oriented parser for the channel-program IR.
//
// One statement per line. Blocks open with a trailing `{` and close with a
// lone `}`. A `@ <file>:<line>` suffix pins the statement's SourceLoc; without
// it the statement is located at (<origin>, input line). The full grammar is
// documented in docs/ir-grammar.md.
#pragma once

#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "leakscope/program.hpp"

namespace leakscope {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, int col, const std::string& msg)
        : std::runtime_error("parse error at line " + std::to_string(line) + ", col " +
                             std::to_string(col) + ": " + msg),
          line(line), col(col) {}
    int line;
    int col;
};

namespace detail {

struct Token {
    std::string text;
    int col = 1;
};

inline std::vector<Token> tokenize(const std::string& line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        if (std::isspace(static_cast<unsigned char>(line[i]))) { ++i; continue; }
        if (line[i] == '#') break; // comment to end of line
        size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
            ++i;
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

inline std::int64_t parse_int(const Token& tok, int lineno) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
    if (ec != std::errc() || p != tok.text.data() + tok.text.size())
        throw ParseError(lineno, tok.col, "expected integer, got '" + tok.text + "'");
    return v;
}

inline SourceLoc parse_loc(const Token& tok, int lineno) {
    auto pos = tok.text.rfind(':');
    if (pos == std::string::npos || pos == 0 || pos + 1 == tok.text.size())
        throw ParseError(lineno, tok.col, "expected <file>:<line>, got '" + tok.text + "'");
    SourceLoc loc;
    loc.file = tok.text.substr(0, pos);
    std::string num = tok.text.substr(pos + 1);
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), loc.line);
    if (ec != std::errc() || p != num.data() + num.size() || loc.line <= 0)
        throw ParseError(lineno, tok.col, "bad line number in '" + tok.text + "'");
    return loc;
}

// Amount argument: plain integer or a $param placeholder.
inline void parse_amount(const Token& tok, int lineno, Stmt& st) {
    if (!tok.text.empty() && tok.text[0] == '$')
        st.param = tok.text.substr(1);
    else
        st.amount = parse_int(tok, lineno);
}

} // namespace detail

// Parses IR text into a resolved SimProgram. `origin` names the input (used
// for auto-assigned SourceLocs and error messages).
inline SimProgram load_program(const std::string& text, const std::string& origin = "<input>") {
    using detail::Token;

    SimProgram prog;
    prog.name = origin;

    struct Scope {
        enum Kind { FnBody, StmtBody, ElseBody, SelectBlock, ArmBody, DefaultBody } kind;
        std::vector<Stmt>* stmts = nullptr; // append target (null for SelectBlock)
        Stmt* owner = nullptr;              // Select the arm belongs to
        Function* fn = nullptr;             // function this scope belongs to
    };

    std::vector<Scope> stack;
    Function* cur_fn = nullptr;
    int closure_count = 0;
    bool have_entry = false;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    auto check_in_fn = [&](const Token& t) {
        if (!cur_fn)
            throw ParseError(lineno, t.col, "statement outside a function");
    };

    while (std::getline(in, line)) {
        ++lineno;
        std::vector<Token> toks = detail::tokenize(line);
        if (toks.empty())
            continue;

        // Extract a trailing `@ file:line` pragma.
        std::optional<SourceLoc> pragma;
        for (size_t i = 0; i < toks.size(); ++i) {
            if (toks[i].text == "@") {
                if (i + 1 >= toks.size())
                    throw ParseError(lineno, toks[i].col, "'@' without a location");
                if (i + 2 != toks.size())
                    throw ParseError(lineno, toks[i].col, "'@ <file>:<line>' must end the line");
                pragma = detail::parse_loc(toks[i + 1], lineno);
                toks.resize(i);
                break;
            }
        }
        if (toks.empty())
            throw ParseError(lineno, 1, "pragma without a statement");

        bool opens_block = toks.back().text == "{";
        if (opens_block)
            toks.pop_back();

        auto loc_of = [&](const Token& head) {
            SourceLoc loc = pragma ? *pragma : SourceLoc{"", origin, lineno};
            (void)head;
            loc.function = stack.empty() ? "" : stack.back().fn->name;
            return loc;
        };

        // Close of the current block, possibly reopening as `} else {`.
        if (!toks.empty() && toks[0].text == "}") {
            if (stack.empty())
                throw ParseError(lineno, toks[0].col, "unmatched '}'");
            Scope closed = stack.back();
            stack.pop_back();
            if (toks.size() == 1) {
                if (stack.empty())
                    cur_fn = nullptr;
                if (opens_block)
                    throw ParseError(lineno, toks[0].col, "unexpected '{' after '}'");
                continue;
            }
            if (toks.size() == 2 && toks[1].text == "else" && opens_block) {
                if (closed.kind != Scope::StmtBody || !closed.owner ||
                    closed.owner->kind != StmtKind::If)
                    throw ParseError(lineno, toks[1].col, "'else' without matching 'if'");
                stack.push_back({Scope::ElseBody, &closed.owner->else_body, closed.owner, closed.fn});
                continue;
            }
            throw ParseError(lineno, toks[0].col, "malformed '}' line");
        }

        const std::string& head = toks[0].text;

        // Function headers.
        if (head == "entry" || head == "func") {
            if (cur_fn)
                throw ParseError(lineno, toks[0].col, "nested function definition");
            if (!opens_block)
                throw ParseError(lineno, toks[0].col, "'" + head + "' requires '{'");
            std::string name;
            if (head == "entry") {
                if (have_entry)
                    throw ParseError(lineno, toks[0].col, "duplicate entry function");
                name = toks.size() > 1 ? toks[1].text : "main";
                if (toks.size() > 2)
                    throw ParseError(lineno, toks[2].col, "trailing tokens after entry name");
                have_entry = true;
                prog.entry = name;
            } else {
                if (toks.size() != 2)
                    throw ParseError(lineno, toks[0].col, "'func' requires exactly one name");
                name = toks[1].text;
            }
            if (prog.functions.count(name))
                throw ParseError(lineno, toks[0].col, "duplicate function '" + name + "'");
            cur_fn = &prog.functions[name];
            cur_fn->name = name;
            stack.push_back({Scope::FnBody, &cur_fn->body, nullptr, cur_fn});
            continue;
        }

        check_in_fn(toks[0]);
        if (stack.empty())
            throw ParseError(lineno, toks[0].col, "statement outside a block");

        Scope& top = stack.back();

        // Inside `select { ... }` only arms and default are allowed.
        if (top.kind == Scope::SelectBlock) {
            Stmt* sel = top.owner;
            if (head == "recv" || head == "send") {
                if (toks.size() < 2)
                    throw ParseError(lineno, toks[0].col, "'" + head + "' arm requires a channel");
                SelectArm arm;
                arm.dir = head == "recv" ? ArmDir::Recv : ArmDir::Send;
                arm.chan = toks[1].text;
                if (toks.size() == 3 && head == "send")
                    arm.value = detail::parse_int(toks[2], lineno);
                else if (toks.size() > 2)
                    throw ParseError(lineno, toks[2].col, "trailing tokens in select arm");
                arm.loc = loc_of(toks[0]);
                sel->arms.push_back(std::move(arm));
                if (opens_block)
                    stack.push_back({Scope::ArmBody, &sel->arms.back().body, sel, top.fn});
            } else if (head == "default") {
                if (sel->has_default)
                    throw ParseError(lineno, toks[0].col, "duplicate default arm");
                if (toks.size() > 1)
                    throw ParseError(lineno, toks[1].col, "trailing tokens after default");
                sel->has_default = true;
                if (opens_block)
                    stack.push_back({Scope::DefaultBody, &sel->default_body, sel, top.fn});
            } else {
                throw ParseError(lineno, toks[0].col,
                                 "expected select arm ('recv', 'send', 'default'), got '" + head + "'");
            }
            continue;
        }

        Stmt st;
        st.loc = loc_of(toks[0]);
        bool body_stmt = false; // statement that owns the opened block

        auto need = [&](size_t n, const char* what) {
            if (toks.size() != n)
                throw ParseError(lineno, toks[0].col, std::string("'") + head + "' requires " + what);
        };

        if (head == "make") {
            st.kind = StmtKind::MakeChan;
            if (toks.size() < 2 || toks.size() > 3)
                throw ParseError(lineno, toks[0].col, "'make' requires a channel and optional cap=<n>");
            st.chan = toks[1].text;
            if (toks.size() == 3) {
                const std::string& t = toks[2].text;
                if (t.rfind("cap=", 0) != 0)
                    throw ParseError(lineno, toks[2].col, "expected cap=<n>");
                Token amount{t.substr(4), toks[2].col + 4};
                detail::parse_amount(amount, lineno, st);
            }
        } else if (head == "nilchan") {
            need(2, "a channel name");
            st.kind = StmtKind::NilChan;
            st.chan = toks[1].text;
        } else if (head == "send") {
            if (toks.size() < 2 || toks.size() > 3)
                throw ParseError(lineno, toks[0].col, "'send' requires a channel and optional value");
            st.kind = StmtKind::Send;
            st.chan = toks[1].text;
            if (toks.size() == 3)
                st.value = detail::parse_int(toks[2], lineno);
        } else if (head == "recv") {
            need(2, "a channel name");
            st.kind = StmtKind::Recv;
            st.chan = toks[1].text;
        } else if (head == "close") {
            need(2, "a channel name");
            st.kind = StmtKind::Close;
            st.chan = toks[1].text;
        } else if (head == "spawn") {
            st.kind = StmtKind::Spawn;
            if (toks.size() == 1 && opens_block) {
                // Inline closure: lift the block into <fn>$<k>.
                std::string lifted = top.fn->name + "$" + std::to_string(++closure_count);
                if (prog.functions.count(lifted))
                    throw ParseError(lineno, toks[0].col, "closure name collides with '" + lifted + "'");
                st.callee = lifted;
                Function& fn = prog.functions[lifted];
                fn.name = lifted;
                top.stmts->push_back(std::move(st));
                stack.push_back({Scope::FnBody, &fn.body, nullptr, &fn});
                // Note: the lifted body parses in the enclosing function's
                // textual scope; cur_fn stays, closures may not nest.
                continue;
            }
            need(2, "a function name or '{'");
            st.callee = toks[1].text;
        } else if (head == "call") {
            need(2, "a function name");
            st.kind = StmtKind::Call;
            st.callee = toks[1].text;
        } else if (head == "return") {
            need(1, "no arguments");
            st.kind = StmtKind::Return;
        } else if (head == "if") {
            need(2, "a condition token");
            if (!opens_block)
                throw ParseError(lineno, toks[0].col, "'if' requires '{'");
            st.kind = StmtKind::If;
            st.token = toks[1].text;
            body_stmt = true;
        } else if (head == "loop") {
            need(2, "a count, $param, or 'forever'");
            if (!opens_block)
                throw ParseError(lineno, toks[0].col, "'loop' requires '{'");
            st.kind = StmtKind::Loop;
            if (toks[1].text == "forever")
                st.forever = true;
            else
                detail::parse_amount(toks[1], lineno, st);
            body_stmt = true;
        } else if (head == "range") {
            need(2, "a channel name");
            if (!opens_block)
                throw ParseError(lineno, toks[0].col, "'range' requires '{'");
            st.kind = StmtKind::Range;
            st.chan = toks[1].text;
            body_stmt = true;
        } else if (head == "select") {
            need(1, "no arguments");
            if (!opens_block)
                throw ParseError(lineno, toks[0].col, "'select' requires '{'");
            st.kind = StmtKind::Select;
            top.stmts->push_back(std::move(st));
            stack.push_back({Scope::SelectBlock, nullptr, &top.stmts->back(), top.fn});
            continue;
        } else if (head == "sleep") {
            need(2, "a tick count");
            st.kind = StmtKind::Sleep;
            detail::parse_amount(toks[1], lineno, st);
        } else if (head == "after") {
            need(3, "a channel and a delay");
            st.kind = StmtKind::After;
            st.chan = toks[1].text;
            detail::parse_amount(toks[2], lineno, st);
        } else if (head == "tick") {
            need(3, "a channel and a period");
            st.kind = StmtKind::Tick;
            st.chan = toks[1].text;
            detail::parse_amount(toks[2], lineno, st);
        } else if (head == "ctxdone") {
            need(3, "a channel and a cancel tick or 'never'");
            st.kind = StmtKind::CtxDone;
            st.chan = toks[1].text;
            if (toks[2].text == "never")
                st.never = true;
            else
                detail::parse_amount(toks[2], lineno, st);
        } else if (head == "iowait" || head == "syscall") {
            if (toks.size() > 2)
                throw ParseError(lineno, toks[0].col, "'" + head + "' takes an optional tick count");
            st.kind = head == "iowait" ? StmtKind::IOWait : StmtKind::Syscall;
            if (toks.size() == 2) {
                st.timed = true;
                detail::parse_amount(toks[1], lineno, st);
            }
        } else if (head == "condwait") {
            need(2, "a token");
            st.kind = StmtKind::CondWait;
            st.token = toks[1].text;
        } else if (head == "signal") {
            need(2, "a token");
            st.kind = StmtKind::Signal;
            st.token = toks[1].text;
        } else if (head == "semacquire") {
            need(2, "a token");
            st.kind = StmtKind::SemAcquire;
            st.token = toks[1].text;
        } else if (head == "sempost") {
            need(2, "a token");
            st.kind = StmtKind::SemPost;
            st.token = toks[1].text;
        } else {
            throw ParseError(lineno, toks[0].col, "unknown statement '" + head + "'");
        }

        if (opens_block && !body_stmt)
            throw ParseError(lineno, toks[0].col, "'" + head + "' does not take a block");

        top.stmts->push_back(std::move(st));
        if (body_stmt)
            stack.push_back({Scope::StmtBody, &top.stmts->back().body, &top.stmts->back(), top.fn});
    }

    if (!stack.empty())
        throw ParseError(lineno, 1, "unclosed block at end of input");
    if (!have_entry) {
        if (prog.functions.count("main"))
            prog.entry = "main";
        else
            throw ParseError(lineno, 1, "missing entry function");
    }

    try {
        resolve_program(prog);
    } catch (const ProgramError& e) {
        throw ParseError(lineno, 1, e.what());
    }
    return prog;
}

} // namespace leakscope
