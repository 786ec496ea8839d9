#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gridshed/common.hpp"
#include "gridshed/grid_model.hpp"
#include "json.hpp"

namespace gridshed {

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
};

// Ring vertices are implicitly closed: the last vertex connects back to the
// first. A closing duplicate vertex from the input is stripped at parse time.
using Ring = std::vector<GeoPoint>;

// One polygon: outer boundary first, holes after. A region may hold several.
using Polygon = std::vector<Ring>;

struct GeoBbox {
  double min_lon = 0.0;
  double min_lat = 0.0;
  double max_lon = 0.0;
  double max_lat = 0.0;
};

struct Region {
  std::string fips;
  std::vector<Polygon> polygons;
  GeoBbox bbox;
};

/// County polygons keyed by FIPS code, with per-region bounding boxes for
/// fast rejection. Immutable after parse.
class RegionSet {
 public:
  const std::vector<Region>& regions() const { return regions_; }
  bool has(const std::string& fips) const { return index_.count(fips) != 0; }
  const Region& at(const std::string& fips) const { return regions_[index_.at(fips)]; }
  std::size_t size() const { return regions_.size(); }

  void add(Region region) {
    index_[region.fips] = regions_.size();
    regions_.push_back(std::move(region));
  }

  void sort_by_fips() {
    std::sort(regions_.begin(), regions_.end(),
              [](const Region& a, const Region& b) { return a.fips < b.fips; });
    index_.clear();
    for (std::size_t i = 0; i < regions_.size(); ++i) index_[regions_[i].fips] = i;
  }

 private:
  std::vector<Region> regions_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

inline GeoBbox bbox_of(const std::vector<Polygon>& polygons) {
  GeoBbox box{1e300, 1e300, -1e300, -1e300};
  for (const auto& poly : polygons) {
    for (const auto& ring : poly) {
      for (const auto& p : ring) {
        box.min_lon = std::min(box.min_lon, p.lon);
        box.min_lat = std::min(box.min_lat, p.lat);
        box.max_lon = std::max(box.max_lon, p.lon);
        box.max_lat = std::max(box.max_lat, p.lat);
      }
    }
  }
  return box;
}

inline bool bbox_overlaps(const GeoBbox& a, const GeoBbox& b) {
  return a.min_lon <= b.max_lon && b.min_lon <= a.max_lon &&
         a.min_lat <= b.max_lat && b.min_lat <= a.max_lat;
}

inline int orient_sign(GeoPoint a, GeoPoint b, GeoPoint c) {
  double cross = (b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon);
  if (cross > 0.0) return 1;
  if (cross < 0.0) return -1;
  return 0;
}

inline bool on_segment(GeoPoint a, GeoPoint b, GeoPoint p) {
  return std::min(a.lon, b.lon) <= p.lon && p.lon <= std::max(a.lon, b.lon) &&
         std::min(a.lat, b.lat) <= p.lat && p.lat <= std::max(a.lat, b.lat);
}

// Inclusive segment-segment test: touching or collinear overlap counts.
inline bool segments_touch(GeoPoint p, GeoPoint q, GeoPoint r, GeoPoint s) {
  int o1 = orient_sign(p, q, r);
  int o2 = orient_sign(p, q, s);
  int o3 = orient_sign(r, s, p);
  int o4 = orient_sign(r, s, q);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && on_segment(p, q, r)) return true;
  if (o2 == 0 && on_segment(p, q, s)) return true;
  if (o3 == 0 && on_segment(r, s, p)) return true;
  if (o4 == 0 && on_segment(r, s, q)) return true;
  return false;
}

inline Ring parse_ring(const nlohmann::json& coords, const std::string& where) {
  if (!coords.is_array()) throw ParseError(where + ": ring must be an array of positions");
  Ring ring;
  for (const auto& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
      throw ParseError(where + ": position must be a [lon, lat] number pair");
    ring.push_back(GeoPoint{pos[0].get<double>(), pos[1].get<double>()});
  }
  if (ring.size() >= 2 && ring.front().lon == ring.back().lon &&
      ring.front().lat == ring.back().lat) {
    ring.pop_back();  // drop the explicit closing vertex
  }
  if (ring.size() < 3) throw ParseError(where + ": degenerate ring with fewer than 3 vertices");
  return ring;
}

inline Polygon parse_polygon(const nlohmann::json& coords, const std::string& where) {
  if (!coords.is_array() || coords.empty())
    throw ParseError(where + ": polygon must be a nonempty array of rings");
  Polygon poly;
  for (const auto& ring : coords) poly.push_back(parse_ring(ring, where));
  return poly;
}

}  // namespace detail

/// Even-odd point-in-region test across every ring of every polygon, so
/// holes subtract and multi-polygon parts add.
inline bool point_in_region(GeoPoint p, const Region& region) {
  bool inside = false;
  for (const auto& poly : region.polygons) {
    for (const auto& ring : poly) {
      std::size_t n = ring.size();
      for (std::size_t i = 0; i < n; ++i) {
        const GeoPoint& a = ring[i];
        const GeoPoint& b = ring[(i + 1) % n];
        if ((a.lat > p.lat) != (b.lat > p.lat)) {
          double lon_at = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
          if (p.lon < lon_at) inside = !inside;
        }
      }
    }
  }
  return inside;
}

/// True iff the segment touches the region: an endpoint inside (even-odd
/// rule) or any contact with a ring edge. Boundary contact counts.
inline bool segment_intersects_region(GeoPoint p1, GeoPoint p2, const Region& region) {
  GeoBbox seg_box{std::min(p1.lon, p2.lon), std::min(p1.lat, p2.lat),
                  std::max(p1.lon, p2.lon), std::max(p1.lat, p2.lat)};
  if (!detail::bbox_overlaps(seg_box, region.bbox)) return false;
  if (point_in_region(p1, region) || point_in_region(p2, region)) return true;
  for (const auto& poly : region.polygons) {
    for (const auto& ring : poly) {
      std::size_t n = ring.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (detail::segments_touch(p1, p2, ring[i], ring[(i + 1) % n])) return true;
      }
    }
  }
  return false;
}

/// Parses a GeoJSON-compatible FeatureCollection of Polygon / MultiPolygon
/// features, each carrying a string property `fips`.
inline RegionSet parse_regions(std::string_view text) {
  using nlohmann::json;
  json root = detail::parse_json_document(text, "regions");
  if (!root.is_object() || root.value("type", "") != "FeatureCollection")
    throw ParseError("regions: document must be a FeatureCollection");
  auto features = root.find("features");
  if (features == root.end() || !features->is_array())
    throw ParseError("regions: missing \"features\" array");

  RegionSet set;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < features->size(); ++i) {
    std::string where = "regions: features[" + std::to_string(i) + "]";
    const json& feature = (*features)[i];
    if (!feature.is_object()) throw ParseError(where + ": feature must be an object");
    auto props = feature.find("properties");
    if (props == feature.end() || !props->is_object() || !props->contains("fips") ||
        !(*props)["fips"].is_string()) {
      throw ParseError(where + ": missing string property \"fips\"");
    }
    Region region;
    region.fips = (*props)["fips"].get<std::string>();
    where += " (\"" + region.fips + "\")";
    if (!seen.insert(region.fips).second) throw ParseError(where + ": duplicate fips");

    auto geom = feature.find("geometry");
    if (geom == feature.end() || !geom->is_object())
      throw ParseError(where + ": missing geometry");
    std::string type = geom->value("type", "");
    auto coords = geom->find("coordinates");
    if (coords == geom->end()) throw ParseError(where + ": missing coordinates");
    if (type == "Polygon") {
      region.polygons.push_back(detail::parse_polygon(*coords, where));
    } else if (type == "MultiPolygon") {
      if (!coords->is_array() || coords->empty())
        throw ParseError(where + ": MultiPolygon must hold at least one polygon");
      for (const auto& poly : *coords) region.polygons.push_back(detail::parse_polygon(poly, where));
    } else {
      throw ParseError(where + ": geometry type must be Polygon or MultiPolygon");
    }
    region.bbox = detail::bbox_of(region.polygons);
    set.add(std::move(region));
  }
  set.sort_by_fips();
  return set;
}

/// Map from line id to the sorted fips list of counties its segment
/// intersects. Every network line appears, possibly with an empty list.
struct LineRegionIndex {
  std::map<std::string, std::vector<std::string>> counties_by_line;

  const std::vector<std::string>& counties(const std::string& line_id) const {
    static const std::vector<std::string> kEmpty;
    auto it = counties_by_line.find(line_id);
    return it == counties_by_line.end() ? kEmpty : it->second;
  }
};

/// Computes C_l for every line, treating each line as the straight segment
/// between its endpoint bus coordinates. Deterministic: lines and fips lists
/// come out sorted.
inline LineRegionIndex map_lines_to_counties(const Network& net, const RegionSet& regions) {
  LineRegionIndex index;
  for (const auto& line : net.lines()) {
    const Bus& from = net.buses()[net.bus_index(line.from_bus)];
    const Bus& to = net.buses()[net.bus_index(line.to_bus)];
    GeoPoint p1{from.longitude, from.latitude};
    GeoPoint p2{to.longitude, to.latitude};
    std::vector<std::string> hits;
    for (const auto& region : regions.regions()) {
      if (segment_intersects_region(p1, p2, region)) hits.push_back(region.fips);
    }
    index.counties_by_line[line.id] = std::move(hits);
  }
  return index;
}

}  // namespace gridshed
