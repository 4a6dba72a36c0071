#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "w2v/session.hpp"
#include "w2v/util.hpp"

namespace w2v::geo {

using session::LatLon;

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kDefaultPoiThresholdM = 25.0;
inline constexpr double kDefaultGridCellDeg = 0.01;

/// Great-circle distance in meters between two lat/lon points (haversine).
double haversine_m(const LatLon& a, const LatLon& b);

/// Great-circle distance in meters from point p to the segment [a, b]
/// (cross-track distance clamped to the segment endpoints).
double point_segment_m(const LatLon& p, const LatLon& a, const LatLon& b);

// ---------------------------------------------------------------------------
// Woeid hierarchy
// ---------------------------------------------------------------------------

enum class WoeidLevel { Earth = 0, Continent, Country, State, City, Zip, Neighborhood, Street };

std::string to_string(WoeidLevel l);
std::optional<WoeidLevel> woeid_level_from(std::string_view s);

struct WoeidEntry {
  std::string id;
  WoeidLevel level = WoeidLevel::Earth;
  std::optional<std::string> parent;
};

/// Hierarchy of place ids. Parent chains strictly ascend levels toward Earth.
class WoeidTable {
 public:
  void add(WoeidEntry entry);  // throws ParseError on duplicates / bad parents
  const WoeidEntry* find(std::string_view id) const;
  std::size_t size() const { return order_.size(); }

  /// Ids finer than City are replaced by their nearest ancestor at City level
  /// or coarser; everything else (and unknown ids) passes through unchanged.
  std::string truncate_to_city(const std::string& id) const;

  /// True when the id's level is finer than State (city, zip, ...). Unknown
  /// ids count as city-level so tables stay optional.
  bool below_state_level(const std::string& id) const;

  /// TSV: id <TAB> level <TAB> parent_id ("-" for roots).
  static WoeidTable load(std::istream& in);
  void save(std::ostream& out) const;

 private:
  std::unordered_map<std::string, WoeidEntry> entries_;
  std::vector<std::string> order_;
};

// ---------------------------------------------------------------------------
// POI polygons
// ---------------------------------------------------------------------------

struct InvalidPolygon : ParseError {
  using ParseError::ParseError;
};

/// A business footprint: a simple (non-self-intersecting) closed ring of
/// lat/lon vertices. The closing edge back to the first vertex is implicit.
struct PoiPolygon {
  std::string poi_id;
  std::string name;
  std::vector<LatLon> ring;

  void validate() const;  // throws InvalidPolygon
  bool contains(const LatLon& p) const;      // even-odd ray cast in lat/lon space
  double boundary_distance_m(const LatLon& p) const;  // min over edges
  /// 0 when inside, otherwise the boundary distance.
  double distance_m(const LatLon& p) const;
};

/// Uniform lat/lon grid over polygon bounding boxes. Candidate lookup returns
/// a superset of every polygon within the query threshold; polygons near the
/// ±180° meridian (and queries near it or the poles) fall back to an
/// exhaustive list so wrap-around never loses a match.
class PoiIndex {
 public:
  explicit PoiIndex(std::vector<PoiPolygon> polygons, double cell_deg = kDefaultGridCellDeg);

  const std::vector<PoiPolygon>& polygons() const { return polygons_; }

  /// Indices into polygons() that could be within threshold_m of p.
  std::vector<std::size_t> candidates(const LatLon& p, double threshold_m) const;

 private:
  std::vector<PoiPolygon> polygons_;
  double cell_deg_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
  std::vector<std::uint32_t> always_check_;  // meridian-adjacent / degenerate
};

/// TSV: poi_id <TAB> name <TAB> lat,lon;lat,lon;...  (≥ 3 vertices)
std::vector<PoiPolygon> load_poi_file(std::istream& in);

/// Nearest polygon id within threshold (containment counts as distance 0).
/// Ties break to the lexicographically smallest poi_id. Boundary rule: a
/// distance of exactly threshold_m is still a match, anything greater is not.
std::optional<std::string> assign_poi(const LatLon& p, const PoiIndex& index,
                                      double threshold_m = kDefaultPoiThresholdM);

// ---------------------------------------------------------------------------
// Location resolution
// ---------------------------------------------------------------------------

/// A resolved place token: either a woeid id (already truncated to city
/// granularity) or a poi id, as it will appear in the embedding vocabulary.
struct LocationToken {
  enum class Source { Woeid, Poi } source = Source::Woeid;
  std::string id;
  bool operator==(const LocationToken&) const = default;
};

/// Maps session events to location tokens. In poi mode, implicit-intent
/// queries use the event coordinates geofenced against the POI index;
/// otherwise implicit intent uses user_woeid. Explicit intent always uses
/// query_woeid (never a POI). Missing source data yields no location.
class LocationResolver {
 public:
  LocationResolver() = default;
  LocationResolver(WoeidTable woeids, std::optional<PoiIndex> pois, bool poi_mode,
                   double poi_threshold_m = kDefaultPoiThresholdM);

  std::optional<LocationToken> resolve(const session::SessionEvent& ev) const;

  /// The user's own location for an event (ignores query_woeid): poi in poi
  /// mode, else user_woeid truncated to city.
  std::optional<LocationToken> user_location(const session::SessionEvent& ev) const;

  /// First resolvable user location in the session (the global context).
  std::optional<LocationToken> session_user_location(const session::Session& s) const;

  bool below_state_level(const LocationToken& t) const;

  const WoeidTable& woeids() const { return woeids_; }

 private:
  WoeidTable woeids_;
  std::optional<PoiIndex> pois_;
  bool poi_mode_ = false;
  double poi_threshold_m_ = kDefaultPoiThresholdM;
};

}  // namespace w2v::geo
