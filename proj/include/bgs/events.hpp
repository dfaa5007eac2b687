#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace bgs {

enum class Origin { Skeleton, Muscle };
enum class EventKind { GlobalReduction };

struct Event {
  Origin origin;
  EventKind kind;
  friend bool operator==(const Event&, const Event&) = default;
};

/// Append-only record of synchronization points. A fused multi-output
/// reduction such as [Q U]^T [U W] is recorded once.
class EventLog {
public:
  void reduction(Origin origin) { events_.push_back({origin, EventKind::GlobalReduction}); }
  void append(const EventLog& other) { events_.insert(events_.end(), other.events_.begin(), other.events_.end()); }

  std::size_t count(Origin origin) const noexcept {
    std::size_t n = 0;
    for (const auto& e : events_) n += e.origin == origin ? 1 : 0;
    return n;
  }
  std::size_t size() const noexcept { return events_.size(); }
  const std::vector<Event>& events() const noexcept { return events_; }

private:
  std::vector<Event> events_;
};

enum class Status { Ok, CholFail, NanEncountered };

constexpr std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::CholFail: return "chol_fail";
    case Status::NanEncountered: return "nan_encountered";
  }
  return "unknown";
}

}  // namespace bgs
