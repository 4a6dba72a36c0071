#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "w2v/util.hpp"

namespace w2v::session {

enum class EventKind { Query, SearchLinkClick, AdClick, AdView };
enum class LocalIntent { None, Implicit, Explicit };

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const LatLon&) const = default;
};

/// One logged event. `token` is the normalized surface form: the full query
/// string for Query events, a link target for SearchLinkClicks, an ad id for
/// AdClick/AdView. `position` is the ad slot rank (1 = top) and is present
/// exactly for AdClick/AdView events.
struct SessionEvent {
  EventKind kind = EventKind::Query;
  std::string token;
  std::int64_t timestamp_ms = 0;
  std::optional<int> position;
  std::optional<LatLon> latlon;
  std::optional<std::string> user_woeid;
  std::optional<std::string> query_woeid;
  LocalIntent local_intent = LocalIntent::None;
  bool operator==(const SessionEvent&) const = default;
};

struct Session {
  std::string session_id;
  std::vector<SessionEvent> events;  // ordered by timestamp
  bool bot = false;
  bool short_lived_cookie = false;
  bool operator==(const Session&) const = default;
};

/// Raised when a coordinate is outside [-90,90] x [-180,180].
struct InvalidCoordinate : ParseError {
  using ParseError::ParseError;
};

std::string to_string(EventKind k);
std::string to_string(LocalIntent i);
std::optional<EventKind> event_kind_from(std::string_view s);
std::optional<LocalIntent> intent_from(std::string_view s);

/// Parses the tab-separated session log. Columns:
///   session_id  timestamp_ms  kind  token  lat  lon  user_woeid  query_woeid  local_intent  position
/// Missing optional fields are "-"; the token is double-quoted with backslash
/// escapes for tab, quote and backslash. Lines starting with "#FLAGS" carry
/// per-session flags. Sessions are returned in order of first appearance with
/// events sorted by timestamp (stable for ties). Throws ParseError /
/// InvalidCoordinate with the offending line number.
std::vector<Session> parse_session_log(std::istream& in);

/// Inverse of parse_session_log; round-trips bit-exactly through the parser.
void serialize_sessions(const std::vector<Session>& sessions, std::ostream& out);

struct FilterOptions {
  int max_queries = 30;  // sessions with strictly more Query events are dropped
  /// When set, only sessions with at least one user_woeid starting with the
  /// prefix are kept (coarse market restriction; off by default).
  std::optional<std::string> user_woeid_prefix;
};

/// Drops bot / short-lived-cookie sessions and over-long sessions. Order is
/// preserved and the result is idempotent under re-filtering.
std::vector<Session> filter_sessions(std::vector<Session> sessions, const FilterOptions& opt = {});

/// Query-token frequencies over all sessions (Query events only).
std::map<std::string, std::uint64_t> count_query_frequencies(const std::vector<Session>& sessions);

struct TailBucket {
  std::string label;         // e.g. "1", "2-4", "5-9"
  std::uint64_t min_count = 0;
  std::uint64_t max_count = 0;  // inclusive; 0 = unbounded
  std::uint64_t distinct_queries = 0;
  std::uint64_t volume = 0;      // total occurrences contributed by the bucket
  double volume_share = 0.0;     // volume / total volume
};

/// Histogram of query volume share by occurrence bucket (the long-tail view).
std::vector<TailBucket> tail_report(const std::map<std::string, std::uint64_t>& counts);

std::string escape_token(std::string_view token);
std::string unescape_token(std::string_view field, std::size_t line_no);

}  // namespace w2v::session
