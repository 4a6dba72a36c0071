#include "doctest.h"

#include <algorithm>
#include <random>
#include <sstream>

#include "w2v/session.hpp"

using namespace w2v;
using namespace w2v::session;

namespace {

std::vector<Session> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_session_log(in);
}

std::string serialize(const std::vector<Session>& sessions) {
  std::ostringstream out;
  serialize_sessions(sessions, out);
  return out.str();
}

Session make_session(const std::string& id, int n_queries) {
  Session s;
  s.session_id = id;
  for (int i = 0; i < n_queries; ++i) {
    SessionEvent ev;
    ev.kind = EventKind::Query;
    ev.token = "q" + std::to_string(i);
    ev.timestamp_ms = 1000 * (i + 1);
    s.events.push_back(ev);
  }
  return s;
}

}  // namespace

TEST_CASE("empty stream parses to an empty list") {
  CHECK(parse("").empty());
  CHECK(parse("\n\n").empty());
}

TEST_CASE("single event line parses every field") {
  auto sessions =
      parse("s1\t100\tQUERY\t\"coffee shops near me\"\t37.4\t-122.1\t-\t-\tIMPLICIT\t-\n");
  REQUIRE(sessions.size() == 1);
  const Session& s = sessions[0];
  CHECK(s.session_id == "s1");
  CHECK_FALSE(s.bot);
  CHECK_FALSE(s.short_lived_cookie);
  REQUIRE(s.events.size() == 1);
  const SessionEvent& ev = s.events[0];
  CHECK(ev.kind == EventKind::Query);
  CHECK(ev.token == "coffee shops near me");
  CHECK(ev.timestamp_ms == 100);
  CHECK(ev.local_intent == LocalIntent::Implicit);
  REQUIRE(ev.latlon.has_value());
  CHECK(ev.latlon->lat == doctest::Approx(37.4));
  CHECK(ev.latlon->lon == doctest::Approx(-122.1));
  CHECK_FALSE(ev.position.has_value());
  CHECK_FALSE(ev.user_woeid.has_value());
  CHECK_FALSE(ev.query_woeid.has_value());
}

TEST_CASE("events of one session are sorted by timestamp") {
  auto sessions = parse(
      "s1\t200\tQUERY\t\"b\"\t-\t-\t-\t-\tNONE\t-\n"
      "s1\t100\tQUERY\t\"a\"\t-\t-\t-\t-\tNONE\t-\n");
  REQUIRE(sessions.size() == 1);
  REQUIRE(sessions[0].events.size() == 2);
  CHECK(sessions[0].events[0].timestamp_ms == 100);
  CHECK(sessions[0].events[0].token == "a");
  CHECK(sessions[0].events[1].timestamp_ms == 200);
}

TEST_CASE("sort is applied per session under interleaved input") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> lines;
    for (int i = 0; i < 20; ++i) {
      std::string sid = (i % 2 == 0) ? "a" : "b";
      lines.push_back(sid + "\t" + std::to_string(1 + rng() % 1000) + "\tQUERY\t\"q" +
                      std::to_string(i) + "\"\t-\t-\t-\t-\tNONE\t-");
    }
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    for (const Session& s : parse(text)) {
      CHECK(std::is_sorted(s.events.begin(), s.events.end(),
                           [](const SessionEvent& x, const SessionEvent& y) {
                             return x.timestamp_ms < y.timestamp_ms;
                           }));
    }
  }
}

TEST_CASE("malformed lines are rejected with their line number") {
  CHECK_THROWS_AS(parse("s1\t100\tQUERY\t\"q\"\t-\t-\t-\t-\tNONE\n"), ParseError);  // 9 columns
  CHECK_THROWS_AS(parse("s1\t100\tZAP\t\"q\"\t-\t-\t-\t-\tNONE\t-\n"), ParseError);
  CHECK_THROWS_AS(parse("s1\tabc\tQUERY\t\"q\"\t-\t-\t-\t-\tNONE\t-\n"), ParseError);
  CHECK_THROWS_AS(parse("s1\t100\tQUERY\t\"q\"\t-\t-\t-\t-\tMAYBE\t-\n"), ParseError);
  CHECK_THROWS_AS(parse("s1\t100\tQUERY\tq\t-\t-\t-\t-\tNONE\t-\n"), ParseError);  // unquoted
  try {
    parse("s1\t100\tQUERY\t\"q\"\t-\t-\t-\t-\tNONE\t-\nbroken line\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("coordinates outside the valid ranges are rejected") {
  CHECK_THROWS_AS(parse("s1\t1\tQUERY\t\"q\"\t91.0\t0\t-\t-\tNONE\t-\n"), InvalidCoordinate);
  CHECK_THROWS_AS(parse("s1\t1\tQUERY\t\"q\"\t-91.0\t0\t-\t-\tNONE\t-\n"), InvalidCoordinate);
  CHECK_THROWS_AS(parse("s1\t1\tQUERY\t\"q\"\t0\t180.5\t-\t-\tNONE\t-\n"), InvalidCoordinate);
  CHECK_NOTHROW(parse("s1\t1\tQUERY\t\"q\"\t90\t-180\t-\t-\tNONE\t-\n"));
}

TEST_CASE("token escaping round-trips tabs, quotes and backslashes") {
  for (const std::string token :
       {std::string("plain"), std::string("with\ttab"), std::string("say \"hi\""),
        std::string("back\\slash"), std::string("\t\"\\ all three")}) {
    std::string escaped = escape_token(token);
    CHECK(escaped.find('\t') == std::string::npos);
    CHECK(unescape_token(escaped, 1) == token);

    Session s;
    s.session_id = "s1";
    SessionEvent ev;
    ev.kind = EventKind::Query;
    ev.token = token;
    ev.timestamp_ms = 1;
    s.events.push_back(ev);
    auto parsed = parse(serialize({s}));
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].events.at(0).token == token);
  }
}

TEST_CASE("flags line marks the session and filter drops it") {
  auto sessions = parse(
      "s1\t100\tQUERY\t\"q\"\t-\t-\t-\t-\tNONE\t-\n"
      "#FLAGS\ts1\tbot\n"
      "s2\t100\tQUERY\t\"q\"\t-\t-\t-\t-\tNONE\t-\n"
      "#FLAGS\ts2\tshort_lived_cookie\n"
      "s3\t100\tQUERY\t\"q\"\t-\t-\t-\t-\tNONE\t-\n");
  REQUIRE(sessions.size() == 3);
  CHECK(sessions[0].bot);
  CHECK(sessions[1].short_lived_cookie);
  auto kept = filter_sessions(sessions);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].session_id == "s3");
}

TEST_CASE("filter drops sessions with more than 30 queries, keeps exactly 30") {
  std::vector<Session> sessions = {make_session("over", 31), make_session("at", 30),
                                   make_session("under", 2)};
  auto kept = filter_sessions(sessions);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].session_id == "at");
  CHECK(kept[1].session_id == "under");

  Session flagged = make_session("bot2", 2);
  flagged.bot = true;
  CHECK(filter_sessions({flagged}).empty());
}

TEST_CASE("filter_sessions is idempotent and preserves order") {
  std::vector<Session> sessions;
  for (int i = 0; i < 40; ++i) {
    Session s = make_session("s" + std::to_string(i), 1 + i);
    s.bot = (i % 7 == 0);
    sessions.push_back(s);
  }
  auto once = filter_sessions(sessions);
  auto twice = filter_sessions(once);
  CHECK(once == twice);

  // Survivors appear in their original relative order.
  std::vector<Session> expected;
  for (const Session& s : sessions)
    if (!s.bot && static_cast<int>(s.events.size()) <= 30) expected.push_back(s);
  CHECK(once == expected);
}

TEST_CASE("user_woeid prefix filter keeps only matching sessions") {
  Session us = make_session("us", 1);
  us.events[0].user_woeid = "woeid_us_1";
  Session other = make_session("other", 1);
  other.events[0].user_woeid = "woeid_fr_1";
  Session none = make_session("none", 1);
  FilterOptions opt;
  opt.user_woeid_prefix = "woeid_us";
  auto kept = filter_sessions({us, other, none}, opt);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].session_id == "us");
}

TEST_CASE("parse-serialize identity") {
  std::string text =
      "s1\t100\tQUERY\t\"coffee shops near me\"\t37.4\t-122.1\twoeid_1\t-\tIMPLICIT\t-\n"
      "s1\t200\tADVIEW\t\"ad_1\"\t-\t-\t-\t-\tNONE\t1\n"
      "s1\t300\tADCLICK\t\"ad_2\"\t-\t-\t-\t-\tNONE\t2\n"
      "s1\t400\tSLC\t\"slc_1\"\t-\t-\t-\t-\tNONE\t-\n"
      "s2\t100\tQUERY\t\"best hotels in nyc\"\t-\t-\twoeid_2\twoeid_3\tEXPLICIT\t-\n"
      "#FLAGS\ts2\tbot,short_lived_cookie\n";
  auto sessions = parse(text);
  std::string round = serialize(sessions);
  auto reparsed = parse(round);
  CHECK(sessions == reparsed);
  CHECK(serialize(reparsed) == round);  // serialization is a fixed point
}

TEST_CASE("count_query_frequencies counts only Query events") {
  CHECK(count_query_frequencies({}).empty());

  std::vector<Session> sessions;
  for (int i = 0; i < 3; ++i) {
    Session s = make_session("s" + std::to_string(i), 0);
    SessionEvent q;
    q.kind = EventKind::Query;
    q.token = "q";
    q.timestamp_ms = 1;
    SessionEvent ad;
    ad.kind = EventKind::AdClick;
    ad.token = "q";  // same text, different kind: must not count
    ad.timestamp_ms = 2;
    ad.position = 1;
    s.events = {q, ad};
    sessions.push_back(s);
  }
  auto counts = count_query_frequencies(sessions);
  REQUIRE(counts.size() == 1);
  CHECK(counts.at("q") == 3);
}

TEST_CASE("tail report: all-unique corpus puts 100% of volume in bucket 1") {
  std::map<std::string, std::uint64_t> counts;
  for (int i = 0; i < 57; ++i) counts["q" + std::to_string(i)] = 1;
  auto buckets = tail_report(counts);
  REQUIRE_FALSE(buckets.empty());
  CHECK(buckets[0].label == "1");
  CHECK(buckets[0].distinct_queries == 57);
  CHECK(buckets[0].volume_share == doctest::Approx(1.0));
  for (std::size_t i = 1; i < buckets.size(); ++i) CHECK(buckets[i].volume == 0);
}

TEST_CASE("tail report partitions volume and shares sum to one") {
  std::mt19937 rng(11);
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (int i = 0; i < 300; ++i) {
    std::uint64_t c = 1 + rng() % 150;
    counts["q" + std::to_string(i)] = c;
    total += c;
  }
  auto buckets = tail_report(counts);
  std::uint64_t seen_volume = 0;
  std::uint64_t seen_distinct = 0;
  double share = 0.0;
  for (const auto& b : buckets) {
    seen_volume += b.volume;
    seen_distinct += b.distinct_queries;
    share += b.volume_share;
  }
  CHECK(seen_volume == total);
  CHECK(seen_distinct == counts.size());
  CHECK(share == doctest::Approx(1.0).epsilon(1e-12));
}
