#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "w2v/geo.hpp"
#include "w2v/session.hpp"

using namespace w2v;
using namespace w2v::geo;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Independent great-circle oracle: the Vincenty/atan2 form for a sphere,
/// evaluated in long double.  It is numerically stable at every separation
/// (unlike the law of cosines) and shares no code path with the
/// implementation's asin/haversine form, so the two only agree if both are
/// right.
double oracle_great_circle_m(const LatLon& a, const LatLon& b) {
  long double lat1 = a.lat * kPi / 180.0L, lat2 = b.lat * kPi / 180.0L;
  long double dlon = (b.lon - a.lon) * kPi / 180.0L;
  long double s1 = std::sin(lat1), c1 = std::cos(lat1);
  long double s2 = std::sin(lat2), c2 = std::cos(lat2);
  long double y = std::sqrt(std::pow(c2 * std::sin(dlon), 2.0L) +
                            std::pow(c1 * s2 - s1 * c2 * std::cos(dlon), 2.0L));
  long double x = s1 * s2 + c1 * c2 * std::cos(dlon);
  return static_cast<double>(kEarthRadiusM * std::atan2(y, x));
}

/// Brute-force oracle for assign_poi: scan EVERY polygon, no index.
std::optional<std::string> oracle_assign(const LatLon& p, const std::vector<PoiPolygon>& polys,
                                         double threshold_m) {
  std::optional<std::string> best;
  double best_d = 0.0;
  for (const auto& poly : polys) {
    double d = poly.distance_m(p);
    if (d > threshold_m) continue;
    if (!best || d < best_d || (d == best_d && poly.poi_id < *best)) {
      best = poly.poi_id;
      best_d = d;
    }
  }
  return best;
}

PoiPolygon square(const std::string& id, double lat, double lon, double half_deg) {
  PoiPolygon p;
  p.poi_id = id;
  p.name = id;
  p.ring = {{lat - half_deg, lon - half_deg},
            {lat - half_deg, lon + half_deg},
            {lat + half_deg, lon + half_deg},
            {lat + half_deg, lon - half_deg}};
  return p;
}

std::vector<PoiPolygon> random_squares(std::mt19937_64& rng, int n, double lat_range,
                                       double lon_center, double lon_range) {
  std::vector<PoiPolygon> polys;
  auto u = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < n; ++i) {
    double lat = (u() * 2 - 1) * lat_range;
    double lon = lon_center + (u() * 2 - 1) * lon_range;
    if (lon > 180) lon -= 360;
    if (lon < -180) lon += 360;
    polys.push_back(square("poi" + std::to_string(i), lat, lon, 0.0001 + u() * 0.001));
  }
  return polys;
}

session::SessionEvent query_event() {
  session::SessionEvent ev;
  ev.kind = session::EventKind::Query;
  ev.token = "q";
  ev.timestamp_ms = 1;
  return ev;
}

WoeidTable demo_table() {
  WoeidTable t;
  t.add({"woeid_earth", WoeidLevel::Earth, std::nullopt});
  t.add({"woeid_us", WoeidLevel::Country, "woeid_earth"});
  t.add({"woeid_ny", WoeidLevel::State, "woeid_us"});
  t.add({"woeid_nyc", WoeidLevel::City, "woeid_ny"});
  t.add({"woeid_10001", WoeidLevel::Zip, "woeid_nyc"});
  t.add({"woeid_hood", WoeidLevel::Neighborhood, "woeid_10001"});
  t.add({"woeid_st", WoeidLevel::Street, "woeid_hood"});
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// Haversine
// ---------------------------------------------------------------------------

TEST_CASE("haversine analytic anchors") {
  CHECK(haversine_m({12.5, -70.25}, {12.5, -70.25}) == 0.0);
  // Antipodal points on the equator: half the circumference.
  CHECK(haversine_m({0, 0}, {0, 180}) == doctest::Approx(kPi * kEarthRadiusM).epsilon(1e-12));
  // One degree of latitude: R * pi / 180.
  CHECK(haversine_m({0, 0}, {1, 0}) ==
        doctest::Approx(kEarthRadiusM * kPi / 180.0).epsilon(1e-9));
}

TEST_CASE("haversine matches an independent spherical oracle") {
  std::mt19937_64 rng(42);
  auto u = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < 2000; ++i) {
    LatLon a{u() * 170 - 85, u() * 360 - 180};
    LatLon b{u() * 170 - 85, u() * 360 - 180};
    double got = haversine_m(a, b);
    double want = oracle_great_circle_m(a, b);
    // law-of-cosines oracle loses precision near zero; use absolute slack there
    CHECK(got == doctest::Approx(want).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("haversine symmetry and triangle inequality") {
  std::mt19937_64 rng(7);
  auto u = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < 1000; ++i) {
    LatLon a{u() * 180 - 90, u() * 360 - 180};
    LatLon b{u() * 180 - 90, u() * 360 - 180};
    LatLon c{u() * 180 - 90, u() * 360 - 180};
    double ab = haversine_m(a, b), ba = haversine_m(b, a);
    double bc = haversine_m(b, c), ac = haversine_m(a, c);
    CHECK(ab == ba);
    CHECK(ab >= 0.0);
    CHECK(ac <= ab + bc + 1e-6 * (ab + bc));
  }
}

// ---------------------------------------------------------------------------
// Polygons
// ---------------------------------------------------------------------------

TEST_CASE("point-in-polygon by even-odd rule on a square") {
  PoiPolygon sq = square("p", 10.0, 20.0, 0.01);
  CHECK(sq.contains({10.0, 20.0}));
  CHECK(sq.contains({10.009, 20.009}));
  CHECK_FALSE(sq.contains({10.02, 20.0}));
  CHECK_FALSE(sq.contains({10.0, 20.02}));
  CHECK(sq.distance_m({10.0, 20.0}) == 0.0);
  CHECK(sq.distance_m({10.02, 20.0}) > 0.0);
}

TEST_CASE("polygon validation rejects degenerate rings") {
  PoiPolygon two;
  two.poi_id = "p";
  two.ring = {{0, 0}, {1, 1}};
  CHECK_THROWS_AS(two.validate(), InvalidPolygon);

  PoiPolygon bowtie;
  bowtie.poi_id = "p";
  bowtie.ring = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};  // self-intersecting
  CHECK_THROWS_AS(bowtie.validate(), InvalidPolygon);

  CHECK_NOTHROW(square("p", 0, 0, 0.01).validate());
}

TEST_CASE("poi file parsing") {
  std::istringstream in(
      "p1\tMain Store\t1.0,2.0;1.0,2.1;1.1,2.1;1.1,2.0\n"
      "p2\tAnnex\t5.0,5.0;5.0,5.1;5.1,5.05\n");
  auto polys = load_poi_file(in);
  REQUIRE(polys.size() == 2);
  CHECK(polys[0].poi_id == "p1");
  CHECK(polys[0].name == "Main Store");
  REQUIRE(polys[0].ring.size() == 4);
  CHECK(polys[0].ring[1].lon == doctest::Approx(2.1));

  std::istringstream bad("p1\tX\t1.0,2.0;1.0,2.1\n");  // two vertices
  CHECK_THROWS_AS(load_poi_file(bad), InvalidPolygon);
  std::istringstream junk("p1\tX\tnope\n");
  CHECK_THROWS_AS(load_poi_file(junk), ParseError);
}

TEST_CASE("assign_poi containment, threshold boundary and tie-break") {
  std::vector<PoiPolygon> polys = {square("b", 0.0, 0.0, 0.001), square("a", 0.0, 0.0, 0.001)};
  PoiIndex index(polys);

  // Inside both -> distance 0 for both -> lexicographic winner.
  CHECK(assign_poi({0.0, 0.0}, index) == "a");

  // Threshold semantics: exactly at distance -> in; epsilon below -> out.
  LatLon outside{0.0, 0.0025};
  double d = polys[0].distance_m(outside);
  REQUIRE(d > 0.0);
  CHECK(assign_poi(outside, PoiIndex({square("p", 0.0, 0.0, 0.001)}), d) == "p");
  CHECK_FALSE(
      assign_poi(outside, PoiIndex({square("p", 0.0, 0.0, 0.001)}), std::nexttoward(d, 0.0))
          .has_value());

  // 26 m away with the default 25 m threshold -> nothing.
  // 0.001 deg of latitude is ~111 m, so place the point ~26 m east of the edge.
  LatLon near_miss{0.0, 0.001 + 26.0 / (kEarthRadiusM * kPi / 180.0)};
  PoiIndex single(std::vector<PoiPolygon>{square("p", 0.0, 0.0, 0.001)});
  double miss_d = single.polygons()[0].distance_m(near_miss);
  REQUIRE(miss_d > 25.0);
  REQUIRE(miss_d < 27.0);
  CHECK_FALSE(assign_poi(near_miss, single).has_value());

  // threshold 0 equals pure containment
  CHECK(assign_poi({0.0, 0.0}, single, 0.0) == "p");
  CHECK_FALSE(assign_poi({0.0, 0.0015}, single, 0.0).has_value());
}

TEST_CASE("grid index candidates are a superset of brute force matches") {
  std::mt19937_64 rng(3);
  auto u = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
  auto polys = random_squares(rng, 300, 1.0, 0.0, 1.0);
  PoiIndex index(polys);
  for (int i = 0; i < 2000; ++i) {
    LatLon p{(u() * 2 - 1) * 1.05, (u() * 2 - 1) * 1.05};
    auto cand = index.candidates(p, 25.0);
    std::vector<bool> in_cand(polys.size(), false);
    for (auto c : cand) in_cand[c] = true;
    for (std::size_t j = 0; j < polys.size(); ++j)
      if (polys[j].distance_m(p) <= 25.0) CHECK(in_cand[j]);

    CHECK(assign_poi(p, index, 25.0) == oracle_assign(p, polys, 25.0));
  }
}

TEST_CASE("index stays exact near the antimeridian and the poles") {
  std::mt19937_64 rng(5);
  auto u = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
  auto polys = random_squares(rng, 100, 1.0, 180.0, 0.01);  // straddling +-180
  polys.push_back(square("pole", 89.9995, 0.0, 0.0002));
  PoiIndex index(polys);
  for (int i = 0; i < 500; ++i) {
    double lon = 180.0 + (u() * 2 - 1) * 0.02;
    if (lon > 180) lon -= 360;
    LatLon p{(u() * 2 - 1) * 1.05, lon};
    CHECK(assign_poi(p, index, 25.0) == oracle_assign(p, polys, 25.0));
  }
  CHECK(assign_poi({89.99951, 0.0}, index, 25.0) == "pole");
}

// ---------------------------------------------------------------------------
// Woeid table
// ---------------------------------------------------------------------------

TEST_CASE("woeid truncation to city level") {
  WoeidTable t = demo_table();
  CHECK(t.truncate_to_city("woeid_st") == "woeid_nyc");     // street -> city
  CHECK(t.truncate_to_city("woeid_hood") == "woeid_nyc");   // neighborhood -> city
  CHECK(t.truncate_to_city("woeid_10001") == "woeid_nyc");  // zip -> city
  CHECK(t.truncate_to_city("woeid_nyc") == "woeid_nyc");    // city unchanged
  CHECK(t.truncate_to_city("woeid_ny") == "woeid_ny");      // state unchanged
  CHECK(t.truncate_to_city("woeid_nowhere") == "woeid_nowhere");  // unknown unchanged
}

TEST_CASE("below_state_level classification") {
  WoeidTable t = demo_table();
  CHECK(t.below_state_level("woeid_nyc"));
  CHECK(t.below_state_level("woeid_10001"));
  CHECK(t.below_state_level("woeid_hood"));
  CHECK_FALSE(t.below_state_level("woeid_ny"));
  CHECK_FALSE(t.below_state_level("woeid_us"));
  CHECK_FALSE(t.below_state_level("woeid_earth"));
  CHECK(t.below_state_level("woeid_unknown"));  // unknown counts as city level
}

TEST_CASE("woeid table load/save round-trip") {
  std::ostringstream out;
  demo_table().save(out);
  std::istringstream in(out.str());
  WoeidTable t = WoeidTable::load(in);
  CHECK(t.size() == demo_table().size());
  CHECK(t.truncate_to_city("woeid_st") == "woeid_nyc");
  std::ostringstream out2;
  t.save(out2);
  CHECK(out2.str() == out.str());

  std::istringstream bad("id\tnot_a_level\t-\n");
  CHECK_THROWS_AS(WoeidTable::load(bad), ParseError);
}

// ---------------------------------------------------------------------------
// Location resolution
// ---------------------------------------------------------------------------

TEST_CASE("resolve uses user location for implicit and query location for explicit") {
  LocationResolver r(demo_table(), std::nullopt, false);

  auto ev = query_event();
  ev.local_intent = session::LocalIntent::Implicit;
  ev.user_woeid = "woeid_10001";
  auto loc = r.resolve(ev);
  REQUIRE(loc.has_value());
  CHECK(loc->source == LocationToken::Source::Woeid);
  CHECK(loc->id == "woeid_nyc");  // truncated to city

  ev = query_event();
  ev.local_intent = session::LocalIntent::Explicit;
  ev.query_woeid = "woeid_nyc";
  ev.user_woeid = "woeid_10001";  // must be ignored for explicit
  loc = r.resolve(ev);
  REQUIRE(loc.has_value());
  CHECK(loc->id == "woeid_nyc");

  ev = query_event();  // non-local
  CHECK_FALSE(r.resolve(ev).has_value());

  ev = query_event();  // implicit but no user location at all
  ev.local_intent = session::LocalIntent::Implicit;
  CHECK_FALSE(r.resolve(ev).has_value());
}

TEST_CASE("poi mode resolves implicit queries by geofencing, never explicit ones") {
  std::vector<PoiPolygon> polys = {square("poi_store", 10.0, 20.0, 0.001)};
  LocationResolver r(demo_table(), PoiIndex(polys), true);

  auto ev = query_event();
  ev.local_intent = session::LocalIntent::Implicit;
  ev.latlon = session::LatLon{10.0, 20.0};
  ev.user_woeid = "woeid_10001";
  auto loc = r.resolve(ev);
  REQUIRE(loc.has_value());
  CHECK(loc->source == LocationToken::Source::Poi);
  CHECK(loc->id == "poi_store");

  // Explicit queries use woeids regardless of poi mode.
  ev = query_event();
  ev.local_intent = session::LocalIntent::Explicit;
  ev.query_woeid = "woeid_10001";
  ev.latlon = session::LatLon{10.0, 20.0};
  loc = r.resolve(ev);
  REQUIRE(loc.has_value());
  CHECK(loc->source == LocationToken::Source::Woeid);

  // Implicit, coordinates outside every polygon -> nothing (strict poi mode).
  ev = query_event();
  ev.local_intent = session::LocalIntent::Implicit;
  ev.latlon = session::LatLon{50.0, 50.0};
  ev.user_woeid = "woeid_10001";
  CHECK_FALSE(r.resolve(ev).has_value());
}

TEST_CASE("session user location picks the first resolvable event") {
  LocationResolver r(demo_table(), std::nullopt, false);
  session::Session s;
  s.session_id = "s";
  auto e1 = query_event();
  e1.timestamp_ms = 1;  // no location
  auto e2 = query_event();
  e2.timestamp_ms = 2;
  e2.user_woeid = "woeid_st";
  auto e3 = query_event();
  e3.timestamp_ms = 3;
  e3.user_woeid = "woeid_10001";
  s.events = {e1, e2, e3};
  auto loc = r.session_user_location(s);
  REQUIRE(loc.has_value());
  CHECK(loc->id == "woeid_nyc");  // first resolvable (e2), truncated

  session::Session empty;
  empty.session_id = "e";
  CHECK_FALSE(r.session_user_location(empty).has_value());
}

TEST_CASE("below_state_level on location tokens gates poi and woeid differently") {
  std::vector<PoiPolygon> polys = {square("poi_store", 10.0, 20.0, 0.001)};
  LocationResolver r(demo_table(), PoiIndex(polys), true);
  CHECK(r.below_state_level(LocationToken{LocationToken::Source::Poi, "poi_store"}));
  CHECK(r.below_state_level(LocationToken{LocationToken::Source::Woeid, "woeid_nyc"}));
  CHECK_FALSE(r.below_state_level(LocationToken{LocationToken::Source::Woeid, "woeid_ny"}));
}
