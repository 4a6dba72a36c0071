#include "w2v/geo.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

namespace w2v::geo {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

struct Vec3 {
  double x, y, z;
};

Vec3 to_unit_vec(const LatLon& p) {
  double lat = p.lat * kDegToRad, lon = p.lon * kDegToRad;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

}  // namespace

double haversine_m(const LatLon& a, const LatLon& b) {
  double lat1 = a.lat * kDegToRad, lat2 = b.lat * kDegToRad;
  double dlat = (b.lat - a.lat) * kDegToRad;
  double dlon = (b.lon - a.lon) * kDegToRad;
  double s = std::sin(dlat / 2), t = std::sin(dlon / 2);
  double h = s * s + std::cos(lat1) * std::cos(lat2) * t * t;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

double point_segment_m(const LatLon& p, const LatLon& a, const LatLon& b) {
  double da = haversine_m(p, a), db = haversine_m(p, b);
  Vec3 va = to_unit_vec(a), vb = to_unit_vec(b), vp = to_unit_vec(p);
  Vec3 n = cross(va, vb);
  double nn = norm(n);
  if (nn < 1e-15) return std::min(da, db);  // degenerate: a == b (or antipodal)
  n = {n.x / nn, n.y / nn, n.z / nn};
  // Foot of the great circle through a,b closest to p; use it only when it
  // lies between the endpoints, else clamp to the nearer endpoint.
  double off = dot(vp, n);
  Vec3 c = {vp.x - off * n.x, vp.y - off * n.y, vp.z - off * n.z};
  double cn = norm(c);
  if (cn < 1e-15) return std::min(da, db);  // p is a pole of the a-b circle
  c = {c.x / cn, c.y / cn, c.z / cn};
  Vec3 ab = cross(va, vb);
  bool between = dot(cross(va, c), ab) >= 0.0 && dot(cross(c, vb), ab) >= 0.0;
  if (!between) return std::min(da, db);
  double cross_track = std::asin(std::min(1.0, std::abs(off)));
  return kEarthRadiusM * cross_track;
}

// ---------------------------------------------------------------------------
// Woeid hierarchy
// ---------------------------------------------------------------------------

std::string to_string(WoeidLevel l) {
  switch (l) {
    case WoeidLevel::Earth: return "earth";
    case WoeidLevel::Continent: return "continent";
    case WoeidLevel::Country: return "country";
    case WoeidLevel::State: return "state";
    case WoeidLevel::City: return "city";
    case WoeidLevel::Zip: return "zip";
    case WoeidLevel::Neighborhood: return "neighborhood";
    case WoeidLevel::Street: return "street";
  }
  return "?";
}

std::optional<WoeidLevel> woeid_level_from(std::string_view s) {
  std::string t = to_lower(s);
  for (int i = 0; i <= static_cast<int>(WoeidLevel::Street); ++i) {
    auto l = static_cast<WoeidLevel>(i);
    if (t == to_string(l)) return l;
  }
  return std::nullopt;
}

void WoeidTable::add(WoeidEntry entry) {
  if (entries_.count(entry.id)) throw ParseError("duplicate woeid '" + entry.id + "'");
  if (entry.parent) {
    auto it = entries_.find(*entry.parent);
    if (it != entries_.end() && it->second.level >= entry.level)
      throw ParseError("woeid parent '" + *entry.parent + "' does not ascend levels");
  }
  order_.push_back(entry.id);
  entries_.emplace(entry.id, std::move(entry));
}

const WoeidEntry* WoeidTable::find(std::string_view id) const {
  auto it = entries_.find(std::string(id));
  return it == entries_.end() ? nullptr : &it->second;
}

std::string WoeidTable::truncate_to_city(const std::string& id) const {
  const WoeidEntry* e = find(id);
  std::string cur = id;
  while (e && e->level > WoeidLevel::City && e->parent) {
    cur = *e->parent;
    e = find(cur);
  }
  return (e && e->level > WoeidLevel::City) ? id : cur;
}

bool WoeidTable::below_state_level(const std::string& id) const {
  const WoeidEntry* e = find(id);
  return e ? e->level > WoeidLevel::State : true;
}

WoeidTable WoeidTable::load(std::istream& in) {
  WoeidTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) throw ParseError("woeid table needs 3 columns", line_no);
    auto level = woeid_level_from(cols[1]);
    if (!level) throw ParseError("unknown woeid level '" + std::string(cols[1]) + "'", line_no);
    WoeidEntry e{std::string(cols[0]), *level,
                 cols[2] == "-" ? std::nullopt : std::make_optional(std::string(cols[2]))};
    try {
      table.add(std::move(e));
    } catch (const ParseError& err) {
      throw ParseError(err.what(), line_no);
    }
  }
  // Parent chains must exist and strictly ascend toward Earth.
  for (const auto& id : table.order_) {
    const WoeidEntry& e = table.entries_.at(id);
    if (!e.parent) continue;
    const WoeidEntry* p = table.find(*e.parent);
    if (!p) throw ParseError("woeid '" + id + "' references unknown parent '" + *e.parent + "'");
    if (p->level >= e.level) throw ParseError("woeid '" + id + "' parent does not ascend levels");
  }
  return table;
}

void WoeidTable::save(std::ostream& out) const {
  for (const auto& id : order_) {
    const WoeidEntry& e = entries_.at(id);
    out << e.id << '\t' << to_string(e.level) << '\t' << (e.parent ? *e.parent : "-") << '\n';
  }
}

// ---------------------------------------------------------------------------
// POI polygons
// ---------------------------------------------------------------------------

namespace {

int orientation(const LatLon& a, const LatLon& b, const LatLon& c) {
  double v = (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon);
  if (v > 1e-18) return 1;
  if (v < -1e-18) return -1;
  return 0;
}

bool on_segment(const LatLon& a, const LatLon& b, const LatLon& p) {
  return std::min(a.lon, b.lon) <= p.lon && p.lon <= std::max(a.lon, b.lon) &&
         std::min(a.lat, b.lat) <= p.lat && p.lat <= std::max(a.lat, b.lat);
}

bool segments_intersect(const LatLon& p1, const LatLon& p2, const LatLon& q1, const LatLon& q2) {
  int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
  int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

}  // namespace

void PoiPolygon::validate() const {
  if (ring.size() < 3) throw InvalidPolygon("polygon '" + poi_id + "' needs >= 3 vertices");
  for (const LatLon& v : ring)
    if (v.lat < -90.0 || v.lat > 90.0 || v.lon < -180.0 || v.lon > 180.0)
      throw InvalidPolygon("polygon '" + poi_id + "' has out-of-range vertex");
  std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const LatLon& a = ring[i];
    const LatLon& b = ring[(i + 1) % n];
    if (a == b) throw InvalidPolygon("polygon '" + poi_id + "' has a zero-length edge");
  }
  // Non-adjacent edges must not touch (simple ring).
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n]))
        throw InvalidPolygon("polygon '" + poi_id + "' is self-intersecting");
    }
  }
}

bool PoiPolygon::contains(const LatLon& p) const {
  bool inside = false;
  std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const LatLon& a = ring[i];
    const LatLon& b = ring[j];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      double x = (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
      if (p.lon < x) inside = !inside;
    }
  }
  return inside;
}

double PoiPolygon::boundary_distance_m(const LatLon& p) const {
  double best = std::numeric_limits<double>::infinity();
  std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, point_segment_m(p, ring[i], ring[(i + 1) % n]));
  return best;
}

double PoiPolygon::distance_m(const LatLon& p) const {
  if (contains(p)) return 0.0;
  return boundary_distance_m(p);
}

PoiIndex::PoiIndex(std::vector<PoiPolygon> polygons, double cell_deg)
    : polygons_(std::move(polygons)), cell_deg_(cell_deg > 0 ? cell_deg : kDefaultGridCellDeg) {
  auto cell_of = [&](double deg, double offset) {
    return static_cast<std::int64_t>(std::floor((deg + offset) / cell_deg_));
  };
  for (std::uint32_t idx = 0; idx < polygons_.size(); ++idx) {
    const PoiPolygon& poly = polygons_[idx];
    double min_lat = 90, max_lat = -90, min_lon = 180, max_lon = -180;
    for (const LatLon& v : poly.ring) {
      min_lat = std::min(min_lat, v.lat);
      max_lat = std::max(max_lat, v.lat);
      min_lon = std::min(min_lon, v.lon);
      max_lon = std::max(max_lon, v.lon);
    }
    bool near_meridian = min_lon < -180.0 + 2 * cell_deg_ || max_lon > 180.0 - 2 * cell_deg_;
    bool near_pole = min_lat < -89.0 || max_lat > 89.0;
    std::int64_t ci0 = cell_of(min_lat, 90.0), ci1 = cell_of(max_lat, 90.0);
    std::int64_t cj0 = cell_of(min_lon, 180.0), cj1 = cell_of(max_lon, 180.0);
    bool huge = (ci1 - ci0) > 64 || (cj1 - cj0) > 64;
    if (near_meridian || near_pole || huge) {
      always_check_.push_back(idx);
      continue;
    }
    for (std::int64_t ci = ci0; ci <= ci1; ++ci)
      for (std::int64_t cj = cj0; cj <= cj1; ++cj) {
        std::uint64_t key = (static_cast<std::uint64_t>(ci) << 32) ^
                            static_cast<std::uint64_t>(static_cast<std::uint32_t>(cj));
        cells_[key].push_back(idx);
      }
  }
}

std::vector<std::size_t> PoiIndex::candidates(const LatLon& p, double threshold_m) const {
  double meters_per_deg = kEarthRadiusM * kDegToRad;
  double dlat = threshold_m / meters_per_deg;
  double lat_edge = std::min(std::abs(p.lat) + dlat, 89.0);
  double cos_lat = std::cos(lat_edge * kDegToRad);
  double dlon = threshold_m / (meters_per_deg * std::max(cos_lat, 1e-6));

  std::vector<std::size_t> out;
  bool exhaustive = std::abs(p.lat) + dlat > 89.0 || p.lon - dlon < -180.0 + 2 * cell_deg_ ||
                    p.lon + dlon > 180.0 - 2 * cell_deg_;
  if (exhaustive) {
    out.resize(polygons_.size());
    for (std::size_t i = 0; i < polygons_.size(); ++i) out[i] = i;
    return out;
  }

  auto cell_of = [&](double deg, double offset) {
    return static_cast<std::int64_t>(std::floor((deg + offset) / cell_deg_));
  };
  std::int64_t ci0 = cell_of(p.lat - dlat, 90.0), ci1 = cell_of(p.lat + dlat, 90.0);
  std::int64_t cj0 = cell_of(p.lon - dlon, 180.0), cj1 = cell_of(p.lon + dlon, 180.0);
  for (std::int64_t ci = ci0; ci <= ci1; ++ci)
    for (std::int64_t cj = cj0; cj <= cj1; ++cj) {
      std::uint64_t key = (static_cast<std::uint64_t>(ci) << 32) ^
                          static_cast<std::uint64_t>(static_cast<std::uint32_t>(cj));
      auto it = cells_.find(key);
      if (it == cells_.end()) continue;
      for (std::uint32_t idx : it->second) out.push_back(idx);
    }
  for (std::uint32_t idx : always_check_) out.push_back(idx);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<PoiPolygon> load_poi_file(std::istream& in) {
  std::vector<PoiPolygon> out;
  std::string line;
  std::size_t line_no = 0;
  std::unordered_map<std::string, bool> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 3) throw ParseError("poi file needs 3 columns", line_no);
    PoiPolygon poly;
    poly.poi_id = std::string(cols[0]);
    poly.name = std::string(cols[1]);
    if (seen[poly.poi_id]) throw ParseError("duplicate poi_id '" + poly.poi_id + "'", line_no);
    seen[poly.poi_id] = true;
    for (auto pair : split(cols[2], ';')) {
      auto nums = split(pair, ',');
      LatLon v;
      if (nums.size() != 2 || !parse_f64(nums[0], v.lat) || !parse_f64(nums[1], v.lon))
        throw ParseError("bad polygon vertex", line_no);
      poly.ring.push_back(v);
    }
    try {
      poly.validate();
    } catch (const InvalidPolygon& e) {
      throw InvalidPolygon(e.what(), line_no);
    }
    out.push_back(std::move(poly));
  }
  return out;
}

std::optional<std::string> assign_poi(const LatLon& p, const PoiIndex& index, double threshold_m) {
  std::optional<std::string> best_id;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t idx : index.candidates(p, threshold_m)) {
    const PoiPolygon& poly = index.polygons()[idx];
    double d = poly.distance_m(p);
    if (d > threshold_m) continue;
    if (d < best_d || (d == best_d && best_id && poly.poi_id < *best_id)) {
      best_d = d;
      best_id = poly.poi_id;
    }
  }
  return best_id;
}

// ---------------------------------------------------------------------------
// Location resolution
// ---------------------------------------------------------------------------

LocationResolver::LocationResolver(WoeidTable woeids, std::optional<PoiIndex> pois, bool poi_mode,
                                   double poi_threshold_m)
    : woeids_(std::move(woeids)),
      pois_(std::move(pois)),
      poi_mode_(poi_mode),
      poi_threshold_m_(poi_threshold_m) {}

std::optional<LocationToken> LocationResolver::user_location(const session::SessionEvent& ev) const {
  if (poi_mode_) {
    if (!pois_ || !ev.latlon) return std::nullopt;
    auto poi = assign_poi(*ev.latlon, *pois_, poi_threshold_m_);
    if (!poi) return std::nullopt;
    return LocationToken{LocationToken::Source::Poi, *poi};
  }
  if (!ev.user_woeid) return std::nullopt;
  return LocationToken{LocationToken::Source::Woeid, woeids_.truncate_to_city(*ev.user_woeid)};
}

std::optional<LocationToken> LocationResolver::resolve(const session::SessionEvent& ev) const {
  switch (ev.local_intent) {
    case session::LocalIntent::Implicit:
      return user_location(ev);
    case session::LocalIntent::Explicit: {
      if (!ev.query_woeid) return std::nullopt;
      return LocationToken{LocationToken::Source::Woeid, woeids_.truncate_to_city(*ev.query_woeid)};
    }
    case session::LocalIntent::None:
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<LocationToken> LocationResolver::session_user_location(const session::Session& s) const {
  for (const auto& ev : s.events)
    if (auto loc = user_location(ev)) return loc;
  return std::nullopt;
}

bool LocationResolver::below_state_level(const LocationToken& t) const {
  if (t.source == LocationToken::Source::Poi) return true;
  return woeids_.below_state_level(t.id);
}

}  // namespace w2v::geo
