#include "evfleet/sim_kernel.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "evfleet/errors.hpp"

namespace evfleet::sim {

ProcessId Engine::schedule_timeout(double duration, std::function<void()> continuation,
                                   std::function<void()> on_interrupt) {
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
        throw ConfigError("timeout duration must be finite and non-negative (got " +
                          std::to_string(duration) + ")");
    }
    const ProcessId id = statuses_.size();
    statuses_.push_back(HandleStatus::pending);
    pending_.emplace(id, PendingProc{std::move(continuation), std::move(on_interrupt)});
    queue_.push(QueueEntry{now_ + duration, next_seq_++, id});
    return id;
}

InterruptOutcome Engine::interrupt(ProcessId id) {
    if (id >= statuses_.size()) {
        throw ConsistencyError("interrupt on unknown process handle " + std::to_string(id));
    }
    if (statuses_[id] != HandleStatus::pending) {
        return InterruptOutcome::already_completed;
    }
    statuses_[id] = HandleStatus::interrupted;
    auto node = pending_.extract(id);
    // The stale queue entry is skipped when dequeued.
    if (node.mapped().on_interrupt) {
        node.mapped().on_interrupt();
    }
    return InterruptOutcome::interrupted;
}

KernelStats Engine::run_until(double end_time) {
    std::uint64_t processed = 0;
    while (!queue_.empty() && queue_.top().wake <= end_time) {
        const QueueEntry entry = queue_.top();
        queue_.pop();
        if (statuses_[entry.id] != HandleStatus::pending) {
            continue; // interrupted after scheduling
        }
        if (entry.wake < now_) {
            throw ConsistencyError("event list went backwards in time");
        }
        now_ = entry.wake;
        statuses_[entry.id] = HandleStatus::completed;
        auto node = pending_.extract(entry.id);
        ++processed;
        if (node.mapped().continuation) {
            node.mapped().continuation();
        }
        if (post_event_hook_) {
            post_event_hook_();
        }
    }
    return KernelStats{processed, now_};
}

HandleStatus Engine::status(ProcessId id) const {
    if (id >= statuses_.size()) {
        throw ConsistencyError("status of unknown process handle " + std::to_string(id));
    }
    return statuses_[id];
}

} // namespace evfleet::sim
