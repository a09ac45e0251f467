#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_map>
#include <vector>

namespace evfleet::sim {

using ProcessId = std::uint64_t;

enum class HandleStatus : std::uint8_t { pending, completed, interrupted };

enum class InterruptOutcome : std::uint8_t { interrupted, already_completed };

struct KernelStats {
    std::uint64_t events_processed = 0;
    double final_time = 0.0;
};

/// Deterministic process-based discrete-event engine.
///
/// The clock is simulated minutes as a double and advances only when the
/// future-event list's minimum entry is dequeued. Entries tied on wake time
/// dequeue in insertion order (strict FIFO by sequence number). A pending
/// timeout can be interrupted: its continuation never runs and its cleanup
/// step, if any, runs synchronously at the interrupter's clock time.
class Engine {
public:
    /// Schedules `continuation` to run after `duration` simulated minutes.
    /// `on_interrupt` runs instead if the handle is interrupted first.
    /// Throws ConfigError on negative or non-finite durations.
    ProcessId schedule_timeout(double duration, std::function<void()> continuation,
                               std::function<void()> on_interrupt = {});

    /// Interrupts a pending handle (running its cleanup now) or reports that
    /// the handle already ran. Unknown handles throw ConsistencyError.
    InterruptOutcome interrupt(ProcessId id);

    /// Processes every event with wake time <= end_time, in order. The clock
    /// ends at the last processed event (it is not advanced to end_time).
    /// Returns the number of events processed by this call.
    KernelStats run_until(double end_time);

    double now() const { return now_; }

    HandleStatus status(ProcessId id) const;

    std::uint64_t pending_count() const { return static_cast<std::uint64_t>(pending_.size()); }

    /// Invoked after each processed event; used by the invariant checker.
    void set_post_event_hook(std::function<void()> hook) { post_event_hook_ = std::move(hook); }

private:
    struct QueueEntry {
        double wake;
        std::uint64_t seq;
        ProcessId id;
    };
    struct EntryAfter {
        bool operator()(const QueueEntry& a, const QueueEntry& b) const {
            if (a.wake != b.wake) return a.wake > b.wake;
            return a.seq > b.seq;
        }
    };
    struct PendingProc {
        std::function<void()> continuation;
        std::function<void()> on_interrupt;
    };

    double now_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, EntryAfter> queue_;
    std::vector<HandleStatus> statuses_; // indexed by ProcessId
    std::unordered_map<ProcessId, PendingProc> pending_;
    std::function<void()> post_event_hook_;
};

} // namespace evfleet::sim
