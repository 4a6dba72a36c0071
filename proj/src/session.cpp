#include "w2v/session.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace w2v::session {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::Query: return "QUERY";
    case EventKind::SearchLinkClick: return "SLC";
    case EventKind::AdClick: return "ADCLICK";
    case EventKind::AdView: return "ADVIEW";
  }
  return "?";
}

std::string to_string(LocalIntent i) {
  switch (i) {
    case LocalIntent::None: return "NONE";
    case LocalIntent::Implicit: return "IMPLICIT";
    case LocalIntent::Explicit: return "EXPLICIT";
  }
  return "?";
}

std::optional<EventKind> event_kind_from(std::string_view s) {
  if (s == "QUERY") return EventKind::Query;
  if (s == "SLC") return EventKind::SearchLinkClick;
  if (s == "ADCLICK") return EventKind::AdClick;
  if (s == "ADVIEW") return EventKind::AdView;
  return std::nullopt;
}

std::optional<LocalIntent> intent_from(std::string_view s) {
  if (s == "NONE" || s == "-") return LocalIntent::None;
  if (s == "IMPLICIT") return LocalIntent::Implicit;
  if (s == "EXPLICIT") return LocalIntent::Explicit;
  return std::nullopt;
}

std::string escape_token(std::string_view token) {
  std::string out = "\"";
  for (char c : token) {
    if (c == '\\' || c == '"')
      out += '\\', out += c;
    else if (c == '\t')
      out += "\\t";
    else
      out += c;
  }
  out += '"';
  return out;
}

std::string unescape_token(std::string_view field, std::size_t line_no) {
  if (field.size() < 2 || field.front() != '"' || field.back() != '"')
    throw ParseError("token field must be double-quoted", line_no);
  std::string out;
  for (std::size_t i = 1; i + 1 < field.size(); ++i) {
    char c = field[i];
    if (c != '\\') {
      out += c;
      continue;
    }
    if (i + 2 >= field.size()) throw ParseError("dangling escape in token", line_no);
    char e = field[++i];
    if (e == 't')
      out += '\t';
    else if (e == '"' || e == '\\')
      out += e;
    else
      throw ParseError("unknown escape in token", line_no);
  }
  return out;
}

namespace {

std::optional<std::string> opt_field(std::string_view f) {
  if (f == "-") return std::nullopt;
  return std::string(f);
}

}  // namespace

std::vector<Session> parse_session_log(std::istream& in) {
  std::vector<Session> sessions;
  std::unordered_map<std::string, std::size_t> by_id;  // session_id -> index

  auto session_for = [&](const std::string& id) -> Session& {
    auto it = by_id.find(id);
    if (it != by_id.end()) return sessions[it->second];
    by_id.emplace(id, sessions.size());
    sessions.push_back(Session{id, {}, false, false});
    return sessions.back();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    auto cols = split(line, '\t');
    if (cols[0] == "#FLAGS") {
      if (cols.size() != 3) throw ParseError("flags line needs 3 columns", line_no);
      Session& s = session_for(std::string(cols[1]));
      for (auto flag : split(cols[2], ',')) {
        if (flag == "bot")
          s.bot = true;
        else if (flag == "short_lived_cookie")
          s.short_lived_cookie = true;
        else
          throw ParseError("unknown session flag '" + std::string(flag) + "'", line_no);
      }
      continue;
    }

    if (cols.size() != 10) throw ParseError("expected 10 columns", line_no);

    SessionEvent ev;
    if (!parse_i64(cols[1], ev.timestamp_ms)) throw ParseError("bad timestamp", line_no);
    auto kind = event_kind_from(cols[2]);
    if (!kind) throw ParseError("unknown event kind '" + std::string(cols[2]) + "'", line_no);
    ev.kind = *kind;
    ev.token = unescape_token(cols[3], line_no);

    bool has_lat = cols[4] != "-", has_lon = cols[5] != "-";
    if (has_lat != has_lon) throw ParseError("lat/lon must both be present or both '-'", line_no);
    if (has_lat) {
      LatLon ll;
      if (!parse_f64(cols[4], ll.lat) || !parse_f64(cols[5], ll.lon))
        throw ParseError("bad coordinate", line_no);
      if (ll.lat < -90.0 || ll.lat > 90.0 || ll.lon < -180.0 || ll.lon > 180.0)
        throw InvalidCoordinate("coordinate out of range", line_no);
      ev.latlon = ll;
    }
    ev.user_woeid = opt_field(cols[6]);
    ev.query_woeid = opt_field(cols[7]);

    auto intent = intent_from(cols[8]);
    if (!intent) throw ParseError("unknown local_intent '" + std::string(cols[8]) + "'", line_no);
    ev.local_intent = *intent;
    if (ev.local_intent != LocalIntent::None && ev.kind != EventKind::Query)
      throw ParseError("local_intent only valid on QUERY events", line_no);

    bool ad_event = ev.kind == EventKind::AdClick || ev.kind == EventKind::AdView;
    if (cols[9] == "-") {
      if (ad_event) throw ParseError("ad events require a position", line_no);
    } else {
      int pos = 0;
      if (!parse_int(cols[9], pos) || pos < 1) throw ParseError("bad position", line_no);
      if (!ad_event) throw ParseError("position only valid on ad events", line_no);
      ev.position = pos;
    }

    session_for(std::string(cols[0])).events.push_back(std::move(ev));
  }

  for (Session& s : sessions)
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const SessionEvent& a, const SessionEvent& b) {
                       return a.timestamp_ms < b.timestamp_ms;
                     });
  return sessions;
}

void serialize_sessions(const std::vector<Session>& sessions, std::ostream& out) {
  auto opt = [](const std::optional<std::string>& s) { return s ? *s : std::string("-"); };
  char buf[64];
  for (const Session& s : sessions) {
    if (s.bot || s.short_lived_cookie) {
      std::string flags;
      if (s.bot) flags = "bot";
      if (s.short_lived_cookie) flags += flags.empty() ? "short_lived_cookie" : ",short_lived_cookie";
      out << "#FLAGS\t" << s.session_id << '\t' << flags << '\n';
    }
    for (const SessionEvent& ev : s.events) {
      out << s.session_id << '\t' << ev.timestamp_ms << '\t' << to_string(ev.kind) << '\t'
          << escape_token(ev.token) << '\t';
      if (ev.latlon) {
        std::snprintf(buf, sizeof buf, "%.9g\t%.9g", ev.latlon->lat, ev.latlon->lon);
        out << buf;
      } else {
        out << "-\t-";
      }
      out << '\t' << opt(ev.user_woeid) << '\t' << opt(ev.query_woeid) << '\t'
          << to_string(ev.local_intent) << '\t';
      if (ev.position)
        out << *ev.position;
      else
        out << '-';
      out << '\n';
    }
  }
}

std::vector<Session> filter_sessions(std::vector<Session> sessions, const FilterOptions& opt) {
  std::vector<Session> kept;
  kept.reserve(sessions.size());
  for (Session& s : sessions) {
    if (s.bot || s.short_lived_cookie) continue;
    std::int64_t queries = std::count_if(s.events.begin(), s.events.end(), [](const SessionEvent& e) {
      return e.kind == EventKind::Query;
    });
    if (queries > opt.max_queries) continue;
    if (opt.user_woeid_prefix) {
      bool hit = std::any_of(s.events.begin(), s.events.end(), [&](const SessionEvent& e) {
        return e.user_woeid && e.user_woeid->starts_with(*opt.user_woeid_prefix);
      });
      if (!hit) continue;
    }
    kept.push_back(std::move(s));
  }
  return kept;
}

std::map<std::string, std::uint64_t> count_query_frequencies(const std::vector<Session>& sessions) {
  std::map<std::string, std::uint64_t> counts;
  for (const Session& s : sessions)
    for (const SessionEvent& ev : s.events)
      if (ev.kind == EventKind::Query) ++counts[ev.token];
  return counts;
}

std::vector<TailBucket> tail_report(const std::map<std::string, std::uint64_t>& counts) {
  std::vector<TailBucket> buckets = {
      {"1", 1, 1, 0, 0, 0.0},       {"2", 2, 2, 0, 0, 0.0},     {"3", 3, 3, 0, 0, 0.0},
      {"4", 4, 4, 0, 0, 0.0},       {"5-9", 5, 9, 0, 0, 0.0},   {"10-49", 10, 49, 0, 0, 0.0},
      {"50-99", 50, 99, 0, 0, 0.0}, {"100+", 100, 0, 0, 0, 0.0},
  };
  std::uint64_t total = 0;
  for (auto& [_, c] : counts) total += c;
  for (auto& [_, c] : counts) {
    for (TailBucket& b : buckets) {
      if (c >= b.min_count && (b.max_count == 0 || c <= b.max_count)) {
        ++b.distinct_queries;
        b.volume += c;
        break;
      }
    }
  }
  for (TailBucket& b : buckets)
    b.volume_share = total ? static_cast<double>(b.volume) / static_cast<double>(total) : 0.0;
  return buckets;
}

}  // namespace w2v::session
