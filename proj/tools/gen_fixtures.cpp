// Regenerates the checked-in fixture corpus: scenario IR sources, profile
// snapshots of every builtin scenario, hand-modeled profile fixtures, and the
// malformed parse-error samples. Deterministic; safe to re-run.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "leakscope/profile.hpp"
#include "leakscope/runtime.hpp"
#include "leakscope/scenarios.hpp"
#include "leakscope/snapshot.hpp"

namespace fs = std::filesystem;
using namespace leakscope;

namespace {

void write(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    f << content;
    std::cout << "wrote " << path.generic_string() << "\n";
}

Frame frame(const std::string& symbol, const std::string& file, int line) {
    return Frame{symbol, SourceLoc{symbol, file, line}};
}

GoroutineRecord record(int id, const std::string& label, std::vector<Frame> frames,
                       std::optional<Frame> created = std::nullopt) {
    GoroutineRecord r;
    r.id = id;
    r.state_label = label;
    r.frames = std::move(frames);
    r.created_by = std::move(created);
    return r;
}

GoroutineProfile fig5_profile() {
    GoroutineProfile p;
    p.instance_id = "prod-instance-7";
    p.captured_at = "2024-03-14T02:11:57Z";
    p.goroutines.push_back(record(
        1, "chan send",
        {frame("runtime.gopark", "runtime/proc.go", 381),
         frame("runtime.chansend", "runtime/chan.go", 259),
         frame("runtime.chansend1", "runtime/chan.go", 145),
         frame("server.ComputeCost$1", "transactions/cost.go", 8)},
        frame("server.ComputeCost", "transactions/cost.go", 6)));
    return p;
}

GoroutineProfile empty_profile() {
    GoroutineProfile p;
    p.instance_id = "idle-instance-0";
    p.captured_at = "2024-03-14T02:12:03Z";
    return p;
}

// One record per state-table category.
GoroutineProfile mixed_profile() {
    GoroutineProfile p;
    p.instance_id = "mixed-instance-1";
    p.captured_at = "2024-03-14T02:13:22Z";
    auto park = frame("runtime.gopark", "runtime/proc.go", 381);
    auto chanrecv = frame("runtime.chanrecv", "runtime/chan.go", 442);
    auto chanrecv1 = frame("runtime.chanrecv1", "runtime/chan.go", 489);
    auto chansend = frame("runtime.chansend", "runtime/chan.go", 259);
    auto chansend1 = frame("runtime.chansend1", "runtime/chan.go", 145);
    auto selectgo = frame("runtime.selectgo", "runtime/select.go", 327);

    p.goroutines.push_back(record(1, "chan receive",
                                  {park, chanrecv, chanrecv1, frame("app.consume", "svc/a.go", 10)}));
    p.goroutines.push_back(record(2, "chan receive (nil chan)",
                                  {park, chanrecv, chanrecv1, frame("app.nilRecv", "svc/a.go", 20)}));
    p.goroutines.push_back(record(3, "chan send",
                                  {park, chansend, chansend1, frame("app.produce", "svc/a.go", 30)}));
    p.goroutines.push_back(record(4, "chan send (nil chan)",
                                  {park, chansend, chansend1, frame("app.nilSend", "svc/a.go", 40)}));
    p.goroutines.push_back(record(5, "select",
                                  {park, selectgo, frame("app.waitMany", "svc/b.go", 10)}));
    p.goroutines.push_back(record(6, "select (0 cases)",
                                  {park, selectgo, frame("app.stuck", "svc/b.go", 20)}));
    p.goroutines.push_back(record(7, "IO wait", {park, frame("app.read", "svc/c.go", 10)}));
    p.goroutines.push_back(record(8, "syscall", {park, frame("app.ioctl", "svc/c.go", 20)}));
    p.goroutines.push_back(record(9, "sleep", {park, frame("app.nap", "svc/c.go", 30)}));
    p.goroutines.push_back(record(10, "running", {frame("app.busy", "svc/c.go", 40)}));
    p.goroutines.push_back(record(11, "sync.Cond.Wait", {park, frame("app.waitCond", "svc/c.go", 50)}));
    p.goroutines.push_back(record(12, "semacquire", {park, frame("app.lock", "svc/c.go", 60)}));
    return p;
}

// A select blocked only on ticker/cancellation arms (transient), three deep.
GoroutineProfile transient_profile() {
    GoroutineProfile p;
    p.instance_id = "poller-instance-2";
    p.captured_at = "2024-03-14T02:14:41Z";
    auto park = frame("runtime.gopark", "runtime/proc.go", 381);
    auto selectgo = frame("runtime.selectgo", "runtime/select.go", 327);
    for (int id = 1; id <= 3; ++id)
        p.goroutines.push_back(
            record(id, "select",
                   {park, selectgo, frame("runtime.selectcase.time.Tick", "svc/poll.go", 12),
                    frame("runtime.selectcase.context.Done", "svc/poll.go", 12),
                    frame("app.pollLoop", "svc/poll.go", 12)},
                   frame("app.StartPoller", "svc/poll.go", 5)));
    return p;
}

// Same shape plus one ordinary channel arm: must be kept by the filter.
GoroutineProfile mixed_arms_profile() {
    GoroutineProfile p;
    p.instance_id = "worker-instance-3";
    p.captured_at = "2024-03-14T02:15:09Z";
    auto park = frame("runtime.gopark", "runtime/proc.go", 381);
    auto selectgo = frame("runtime.selectgo", "runtime/select.go", 327);
    for (int id = 1; id <= 2; ++id)
        p.goroutines.push_back(
            record(id, "select",
                   {park, selectgo, frame("runtime.selectcase.time.Tick", "svc/work.go", 33),
                    frame("runtime.selectcase.recv", "svc/work.go", 33),
                    frame("app.workLoop", "svc/work.go", 33)},
                   frame("app.StartWorker", "svc/work.go", 9)));
    return p;
}

} // namespace

int main(int argc, char** argv) {
    fs::path root = argc > 1 ? argv[1] : "fixtures";

    for (const Scenario& s : builtin_scenarios()) {
        write(root / "scenarios" / s.file, s.text);
        Simulator sim(s.program, s.config, s.defaults);
        sim.run();
        write(root / "profiles" / (s.name + ".gprof.txt"), emit_profile(snapshot(sim, s.name)));
    }

    write(root / "profiles" / "fig-stack.gprof.txt", emit_profile(fig5_profile()));
    write(root / "profiles" / "empty.gprof.txt", emit_profile(empty_profile()));
    write(root / "profiles" / "mixed-categories.gprof.txt", emit_profile(mixed_profile()));
    write(root / "profiles" / "transient-select.gprof.txt", emit_profile(transient_profile()));
    write(root / "profiles" / "mixed-arms-select.gprof.txt", emit_profile(mixed_arms_profile()));

    write(root / "profiles" / "malformed" / "missing-header.gprof.txt",
          "goroutine 1 [chan send]:\napp.f\n\tsvc/a.go:1\n");
    write(root / "profiles" / "malformed" / "duplicate-id.gprof.txt",
          "goroutine profile: total 2\n\ngoroutine 1 [running]:\napp.f\n\tsvc/a.go:1\n\n"
          "goroutine 1 [running]:\napp.g\n\tsvc/a.go:2\n");
    write(root / "profiles" / "malformed" / "frame-without-location.gprof.txt",
          "goroutine profile: total 1\n\ngoroutine 1 [running]:\napp.f\napp.g\n\tsvc/a.go:2\n");
    write(root / "profiles" / "malformed" / "total-mismatch.gprof.txt",
          "goroutine profile: total 3\n\ngoroutine 1 [running]:\napp.f\n\tsvc/a.go:1\n");
    return 0;
}
