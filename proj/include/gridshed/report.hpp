#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridshed/common.hpp"
#include "gridshed/resilience.hpp"

namespace gridshed {

inline constexpr const char* kResultsCsvHeader =
    "hazard,day,k,pre_shed_mwh,post_shed_mwh,pre_outages,post_outages,overlap";

/// Rows come out sorted by (hazard, day, k); post columns are empty when no
/// plan was evaluated. Doubles use shortest round-trip formatting so the
/// CSV parses back to the exact values.
inline std::string results_to_csv(const std::vector<ScenarioResult>& results) {
  std::vector<const ScenarioResult*> order;
  order.reserve(results.size());
  for (const auto& r : results) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const ScenarioResult* a, const ScenarioResult* b) {
    return std::tuple(hazard_tag(a->hazard), a->day, a->k) <
           std::tuple(hazard_tag(b->hazard), b->day, b->k);
  });

  std::string csv = kResultsCsvHeader;
  csv += '\n';
  for (const ScenarioResult* r : order) {
    csv += to_string(r->hazard);
    csv += ',' + std::to_string(r->day);
    csv += ',' + std::to_string(r->k);
    csv += ',' + format_double(r->pre_shed_mwh);
    csv += ',';
    if (r->post_shed_mwh) csv += format_double(*r->post_shed_mwh);
    csv += ',' + std::to_string(r->pre_outage_count);
    csv += ',';
    if (r->post_outage_count) csv += std::to_string(*r->post_outage_count);
    csv += ',' + std::to_string(r->overlap_count);
    csv += '\n';
  }
  return csv;
}

inline std::vector<ScenarioResult> parse_results_csv(std::string_view text) {
  auto lines = split_lines(text);
  if (lines.empty() || trim(lines[0]) != kResultsCsvHeader)
    throw ParseError("results: line 1: expected header \"" + std::string(kResultsCsvHeader) + "\"");
  std::vector<ScenarioResult> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    std::string where = "results: line " + std::to_string(i + 1);
    auto fields = split(line, ',');
    if (fields.size() != 8) throw ParseError(where + ": expected 8 fields, got " + std::to_string(fields.size()));
    ScenarioResult r;
    r.hazard = hazard_from_string(trim(fields[0]), where);
    r.day = static_cast<int>(parse_int_strict(trim(fields[1]), where + ": day"));
    r.k = static_cast<int>(parse_int_strict(trim(fields[2]), where + ": k"));
    r.pre_shed_mwh = parse_double_strict(trim(fields[3]), where + ": pre_shed_mwh");
    if (!trim(fields[4]).empty())
      r.post_shed_mwh = parse_double_strict(trim(fields[4]), where + ": post_shed_mwh");
    r.pre_outage_count =
        static_cast<std::size_t>(parse_int_strict(trim(fields[5]), where + ": pre_outages"));
    if (!trim(fields[6]).empty())
      r.post_outage_count =
          static_cast<std::size_t>(parse_int_strict(trim(fields[6]), where + ": post_outages"));
    r.overlap_count = static_cast<std::size_t>(parse_int_strict(trim(fields[7]), where + ": overlap"));
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string summary_to_csv(const StudySummary& summary) {
  std::string csv =
      "hazard,day,scenarios,min_shed_mwh,q1_shed_mwh,median_shed_mwh,q3_shed_mwh,max_shed_mwh,"
      "mean_shed_mwh,mean_delta_mwh,shed_fraction\n";
  for (const DayStats& d : summary.days) {
    csv += to_string(d.hazard);
    csv += ',' + std::to_string(d.day);
    csv += ',' + std::to_string(d.scenario_count);
    csv += ',' + format_double(d.min_shed_mwh);
    csv += ',' + format_double(d.q1_shed_mwh);
    csv += ',' + format_double(d.median_shed_mwh);
    csv += ',' + format_double(d.q3_shed_mwh);
    csv += ',' + format_double(d.max_shed_mwh);
    csv += ',' + format_double(d.mean_shed_mwh);
    csv += ',' + format_double(d.mean_delta_mwh);
    csv += ',' + format_double(d.shed_fraction);
    csv += '\n';
  }
  return csv;
}

inline std::string overlap_to_csv(const StudySummary& summary) {
  std::string csv = "hazard,scenarios,with_overlap,fully_prevented\n";
  for (const HazardOverlap& h : summary.hazards) {
    csv += to_string(h.hazard);
    csv += ',' + std::to_string(h.scenarios);
    csv += ',' + std::to_string(h.with_overlap);
    csv += ',' + std::to_string(h.fully_prevented);
    csv += '\n';
  }
  return csv;
}

struct ChartSeries {
  std::string name;
  std::vector<std::vector<double>> samples;  // one vector per day label
};

struct ChartSpec {
  std::string title;
  std::string y_label;
  std::vector<std::string> day_labels;
  std::vector<ChartSeries> series;  // one or two

  void validate() const {
    if (series.empty() || series.size() > 2)
      throw std::invalid_argument("chart: expected one or two series");
    for (const auto& s : series) {
      if (s.samples.size() != day_labels.size())
        throw std::invalid_argument("chart: series \"" + s.name + "\" length mismatch");
      for (const auto& day : s.samples)
        for (double v : day)
          if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("chart: samples must be finite and nonnegative");
    }
  }
};

namespace detail {

struct BoxStats {
  double lo, q1, med, q3, hi;
};

inline BoxStats box_stats(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  if (sample.empty()) return {0, 0, 0, 0, 0};
  return {sample.front(), quantile_linear(sample, 0.25), quantile_linear(sample, 0.5),
          quantile_linear(sample, 0.75), sample.back()};
}

// fixed-precision pixel coordinates keep the SVG byte-stable
inline std::string px(double v) {
  double r = std::round(v * 100.0) / 100.0;
  if (r == 0.0) r = 0.0;  // normalize -0
  return format_double(r);
}

}  // namespace detail

/// Box-and-whisker chart, one glyph per day per series. Geometry is a pure
/// function of the order statistics, so identical specs render to identical
/// bytes.
inline std::string render_distribution_chart(const ChartSpec& spec) {
  spec.validate();

  const double margin_left = 64, margin_right = 16, margin_top = 40, margin_bottom = 44;
  const double slot = spec.series.size() == 2 ? 56 : 36;
  const double plot_h = 280;
  const double width = margin_left + margin_right + slot * static_cast<double>(spec.day_labels.size());
  const double height = margin_top + plot_h + margin_bottom;

  double ymax = 0.0;
  for (const auto& s : spec.series)
    for (const auto& day : s.samples)
      for (double v : day) ymax = std::max(ymax, v);
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.05;

  auto ypix = [&](double v) { return margin_top + plot_h * (1.0 - v / ymax); };

  const char* fills[2] = {"#4878a8", "#e08a3c"};
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::px(width) + "\" height=\"" +
         detail::px(height) + "\" viewBox=\"0 0 " + detail::px(width) + " " + detail::px(height) + "\">\n";
  svg += "<rect width=\"" + detail::px(width) + "\" height=\"" + detail::px(height) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::px(width / 2) +
         "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         spec.title + "</text>\n";

  // y axis with four divisions
  svg += "<line x1=\"" + detail::px(margin_left) + "\" y1=\"" + detail::px(margin_top) + "\" x2=\"" +
         detail::px(margin_left) + "\" y2=\"" + detail::px(margin_top + plot_h) +
         "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    double v = ymax * static_cast<double>(tick) / 4.0;
    double y = ypix(v);
    svg += "<line x1=\"" + detail::px(margin_left - 4) + "\" y1=\"" + detail::px(y) + "\" x2=\"" +
           detail::px(width - margin_right) + "\" y2=\"" + detail::px(y) +
           "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + detail::px(margin_left - 8) + "\" y=\"" + detail::px(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::px(std::round(v * 10.0) / 10.0) + "</text>\n";
  }
  svg += "<text x=\"14\" y=\"" + detail::px(margin_top + plot_h / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 " +
         detail::px(margin_top + plot_h / 2) + ")\">" + spec.y_label + "</text>\n";

  const double box_w = 18;
  for (std::size_t d = 0; d < spec.day_labels.size(); ++d) {
    double x_center = margin_left + slot * (static_cast<double>(d) + 0.5);
    svg += "<text x=\"" + detail::px(x_center) + "\" y=\"" + detail::px(margin_top + plot_h + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           spec.day_labels[d] + "</text>\n";
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
      double cx = spec.series.size() == 2
                      ? x_center + (s == 0 ? -box_w * 0.62 : box_w * 0.62)
                      : x_center;
      detail::BoxStats st = detail::box_stats(spec.series[s].samples[d]);
      double y_lo = ypix(st.lo), y_q1 = ypix(st.q1), y_med = ypix(st.med), y_q3 = ypix(st.q3),
             y_hi = ypix(st.hi);
      const char* fill = fills[s];
      svg += "<line x1=\"" + detail::px(cx) + "\" y1=\"" + detail::px(y_lo) + "\" x2=\"" + detail::px(cx) +
             "\" y2=\"" + detail::px(y_q1) + "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
      svg += "<line x1=\"" + detail::px(cx) + "\" y1=\"" + detail::px(y_q3) + "\" x2=\"" + detail::px(cx) +
             "\" y2=\"" + detail::px(y_hi) + "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
      svg += "<rect x=\"" + detail::px(cx - box_w / 2) + "\" y=\"" + detail::px(y_q3) + "\" width=\"" +
             detail::px(box_w) + "\" height=\"" + detail::px(std::max(0.0, y_q1 - y_q3)) + "\" fill=\"" +
             fill + "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
      svg += "<line x1=\"" + detail::px(cx - box_w / 2) + "\" y1=\"" + detail::px(y_med) + "\" x2=\"" +
             detail::px(cx + box_w / 2) + "\" y2=\"" + detail::px(y_med) +
             "\" stroke=\"#111\" stroke-width=\"2\"/>\n";
    }
  }

  // legend for two-series charts
  if (spec.series.size() == 2) {
    for (std::size_t s = 0; s < 2; ++s) {
      double lx = margin_left + 8 + static_cast<double>(s) * 110;
      svg += "<rect x=\"" + detail::px(lx) + "\" y=\"28\" width=\"12\" height=\"12\" fill=\"" +
             std::string(fills[s]) + "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
      svg += "<text x=\"" + detail::px(lx + 17) +
             "\" y=\"38\" font-family=\"sans-serif\" font-size=\"11\">" + spec.series[s].name +
             "</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;  // sorted by path

  std::string to_json() const {
    nlohmann::ordered_json doc;
    doc["files"] = nlohmann::ordered_json::array();
    for (const auto& e : entries) doc["files"].push_back({{"path", e.path}, {"sha256", e.sha256}});
    return doc.dump(2) + "\n";
  }
};

/// Writes the result tables plus a digest manifest to out_dir. Extra
/// entries let the caller fold additional artifacts (scenario files,
/// charts) into the same manifest; manifest.json itself is not listed.
inline Manifest write_results(const std::vector<ScenarioResult>& results, const StudySummary& summary,
                              const std::filesystem::path& out_dir,
                              std::vector<ManifestEntry> extra = {}) {
  std::filesystem::create_directories(out_dir);

  Manifest manifest;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_text_file(out_dir / name, content);
    manifest.entries.push_back({name, sha256_hex(content)});
  };
  emit("results.csv", results_to_csv(results));
  emit("summary.csv", summary_to_csv(summary));
  emit("overlap.csv", overlap_to_csv(summary));
  for (auto& e : extra) manifest.entries.push_back(std::move(e));
  std::sort(manifest.entries.begin(), manifest.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  write_text_file(out_dir / "manifest.json", manifest.to_json());
  return manifest;
}

}  // namespace gridshed
