#include "sapa/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sapa {

// ---- files -----------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read failed: " + path.string());
  return std::move(buf).str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// ---- time-series CSV ---------------------------------------------------------

std::string series_to_csv(std::span<const TimeSeriesRow> series, int track_k) {
  std::string text = "n,E";
  for (int k = 1; k <= track_k; ++k) {
    text += ",M_";
    text += std::to_string(k);
  }
  text += '\n';
  for (const TimeSeriesRow& row : series) {
    text += std::to_string(row.n);
    text += ',';
    text += std::to_string(row.e_total);
    for (int k = 0; k < track_k; ++k) {
      text += ',';
      text += std::to_string(k < static_cast<int>(row.m_ranks.size()) ? row.m_ranks[k] : 0);
    }
    text += '\n';
  }
  return text;
}

namespace {

long parse_long_strict(std::string_view field, const char* what) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw std::runtime_error(std::string("CSV: malformed ") + what + " field '" +
                             std::string(field) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

}  // namespace

std::vector<TimeSeriesRow> series_from_csv(const std::string& text) {
  std::vector<std::string_view> lines;
  {
    std::string_view rest = text;
    while (!rest.empty()) {
      const std::size_t nl = rest.find('\n');
      if (nl == std::string_view::npos) {
        lines.push_back(rest);
        break;
      }
      lines.push_back(rest.substr(0, nl));
      rest.remove_prefix(nl + 1);
    }
  }
  if (lines.empty()) throw std::runtime_error("CSV: empty document");

  const std::vector<std::string_view> head = split(lines[0], ',');
  if (head.size() < 3 || head[0] != "n" || head[1] != "E")
    throw std::runtime_error("CSV: header must start with 'n,E,M_1'");
  for (std::size_t k = 2; k < head.size(); ++k)
    if (head[k] != "M_" + std::to_string(k - 1))
      throw std::runtime_error("CSV: unexpected header column '" + std::string(head[k]) + "'");
  const std::size_t track_k = head.size() - 2;

  std::vector<TimeSeriesRow> series;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty() && i + 1 == lines.size()) break;  // trailing newline
    const std::vector<std::string_view> fields = split(lines[i], ',');
    if (fields.size() != head.size())
      throw std::runtime_error("CSV: row " + std::to_string(i) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(head.size()));
    TimeSeriesRow row;
    row.n = parse_long_strict(fields[0], "n");
    row.e_total = parse_long_strict(fields[1], "E");
    row.m_ranks.reserve(track_k);
    for (std::size_t k = 0; k < track_k; ++k)
      row.m_ranks.push_back(parse_long_strict(fields[2 + k], "M_k"));
    series.push_back(std::move(row));
  }
  return series;
}

// ---- run configuration -------------------------------------------------------

ordered_json params_to_json(const ModelParams& params) {
  ordered_json doc;
  doc["a"] = params.a;
  doc["b"] = params.b;
  doc["alpha"] = params.alpha;
  doc["beta"] = params.beta;
  doc["d"] = params.d;
  doc["m_dist"] = params.m_dist;
  doc["n0"] = params.n0;
  doc["steps"] = params.steps;
  doc["seed"] = params.seed;
  doc["track_k"] = params.track_k;
  doc["checkpoint_stride"] = params.checkpoint_stride;
  return doc;
}

ordered_json config_to_json(const RunConfig& config) {
  ordered_json doc = params_to_json(config.params);
  doc["replicas"] = config.replicas;
  doc["jobs"] = config.jobs;
  doc["out"] = config.out_dir;
  doc["timing"] = config.timing;
  return doc;
}

namespace {

[[noreturn]] void bad_key(const std::string& key) {
  throw std::runtime_error("config: unknown key '" + key + "'");
}

bool apply_params_key(ModelParams& params, const std::string& key, const ordered_json& value) {
  if (key == "a")
    params.a = value.get<double>();
  else if (key == "b")
    params.b = value.get<double>();
  else if (key == "alpha")
    params.alpha = value.get<double>();
  else if (key == "beta")
    params.beta = value.get<double>();
  else if (key == "d")
    params.d = value.get<int>();
  else if (key == "m_dist") {
    params.m_dist = value.get<std::vector<double>>();
    params.max_m = static_cast<int>(params.m_dist.size());
  } else if (key == "n0")
    params.n0 = value.get<std::int32_t>();
  else if (key == "steps")
    params.steps = value.get<long>();
  else if (key == "seed")
    params.seed = value.get<std::uint64_t>();
  else if (key == "track_k")
    params.track_k = value.get<int>();
  else if (key == "checkpoint_stride")
    params.checkpoint_stride = value.get<long>();
  else
    return false;
  return true;
}

}  // namespace

void apply_json(ModelParams& params, const ordered_json& doc) {
  for (const auto& [key, value] : doc.items())
    if (!apply_params_key(params, key, value)) bad_key(key);
}

void apply_json(RunConfig& config, const ordered_json& doc) {
  for (const auto& [key, value] : doc.items()) {
    if (key == "replicas")
      config.replicas = value.get<int>();
    else if (key == "jobs")
      config.jobs = value.get<int>();
    else if (key == "out")
      config.out_dir = value.get<std::string>();
    else if (key == "timing")
      config.timing = value.get<bool>();
    else if (!apply_params_key(config.params, key, value))
      bad_key(key);
  }
}

// ---- result documents ----------------------------------------------------------

ordered_json theory_to_json(const TheoryResult& theory) {
  ordered_json doc;
  doc["regime"] = regime_name(theory.regime);
  doc["exponent"] = theory.exponent;
  doc["critical_constant"] = theory.critical_constant;
  doc["r_m"] = theory.r_m;
  doc["K"] = theory.condensate_count;
  doc["x_star"] = theory.x_star;
  return doc;
}

ordered_json exponent_to_json(const std::optional<ExponentFit>& fit) {
  if (!fit) return nullptr;
  ordered_json doc;
  doc["slope"] = fit->slope;
  doc["stderr"] = fit->stderr_slope;
  doc["points"] = fit->points;
  return doc;
}

namespace {

ordered_json final_block(std::span<const TimeSeriesRow> series) {
  ordered_json doc;
  if (series.empty()) return doc;
  const TimeSeriesRow& last = series.back();
  doc["n"] = last.n;
  doc["E"] = last.e_total;
  doc["m_ranks"] = last.m_ranks;
  std::vector<double> ratio(last.m_ranks.size(), 0.0);
  double m1_logn = 0.0;
  if (last.n >= 1)
    for (std::size_t i = 0; i < last.m_ranks.size(); ++i)
      ratio[i] = static_cast<double>(last.m_ranks[i]) / static_cast<double>(last.n);
  if (last.n >= 2 && !last.m_ranks.empty())
    m1_logn = static_cast<double>(last.m_ranks[0]) * std::log(static_cast<double>(last.n)) /
              static_cast<double>(last.n);
  doc["ratio_n"] = ratio;
  doc["m1_logn_over_n"] = m1_logn;
  return doc;
}

}  // namespace

ordered_json summary_json(const RunConfig& config, const TheoryResult& theory,
                          std::span<const TimeSeriesRow> series,
                          const std::optional<ExponentFit>& fit,
                          std::optional<double> wall_clock_seconds) {
  ordered_json doc;
  // Model parameters only: scheduling and placement (jobs, out, timing) don't
  // affect what was simulated, and echoing them would make otherwise identical
  // runs produce different result bytes.
  doc["parameters"] = params_to_json(config.params);
  doc["seed"] = config.params.seed;
  doc["theory"] = theory_to_json(theory);
  doc["final"] = final_block(series);
  doc["exponent"] = exponent_to_json(fit);
  if (wall_clock_seconds) doc["wall_clock_seconds"] = *wall_clock_seconds;
  return doc;
}

ordered_json ensemble_json(const RunConfig& config, const TheoryResult& theory,
                           std::span<const ReplicaSummary> replicas,
                           std::optional<double> wall_clock_seconds) {
  ordered_json doc;
  doc["parameters"] = params_to_json(config.params);  // see summary_json
  doc["seed"] = config.params.seed;
  doc["theory"] = theory_to_json(theory);
  doc["replica_count"] = static_cast<int>(replicas.size());

  ordered_json rows = ordered_json::array();
  std::size_t ranks = 0;
  for (const ReplicaSummary& r : replicas) ranks = std::max(ranks, r.final_ratio.size());
  std::vector<std::vector<double>> ratio_by_rank(ranks);
  std::vector<double> m1_logn, slopes;
  for (const ReplicaSummary& r : replicas) {
    ordered_json row;
    row["replica_id"] = r.replica_id;
    row["final_n"] = r.final_n;
    row["final_m"] = r.final_m;
    row["ratio_n"] = r.final_ratio;
    row["m1_logn_over_n"] = r.m1_logn_over_n;
    row["exponent"] = exponent_to_json(r.exponent);
    rows.push_back(std::move(row));
    for (std::size_t i = 0; i < r.final_ratio.size(); ++i)
      ratio_by_rank[i].push_back(r.final_ratio[i]);
    m1_logn.push_back(r.m1_logn_over_n);
    if (r.exponent) slopes.push_back(r.exponent->slope);
  }
  doc["replicas"] = std::move(rows);

  ordered_json agg;
  ordered_json ratio_mean = ordered_json::array();
  ordered_json ratio_stderr = ordered_json::array();
  for (const std::vector<double>& values : ratio_by_rank) {
    const EnsembleStats stats = ensemble_of(values);
    ratio_mean.push_back(stats.mean);
    ratio_stderr.push_back(stats.stderr_mean);
  }
  agg["ratio_n_mean"] = std::move(ratio_mean);
  agg["ratio_n_stderr"] = std::move(ratio_stderr);
  const EnsembleStats logn_stats = ensemble_of(m1_logn);
  agg["m1_logn_over_n_mean"] = logn_stats.mean;
  agg["m1_logn_over_n_stderr"] = logn_stats.stderr_mean;
  if (!slopes.empty()) {
    const EnsembleStats slope_stats = ensemble_of(slopes);
    agg["exponent_mean"] = slope_stats.mean;
    agg["exponent_stderr"] = slope_stats.stderr_mean;
  } else {
    agg["exponent_mean"] = nullptr;
    agg["exponent_stderr"] = nullptr;
  }
  doc["ensemble"] = std::move(agg);
  if (wall_clock_seconds) doc["wall_clock_seconds"] = *wall_clock_seconds;
  return doc;
}

// ---- SVG plots ------------------------------------------------------------------

namespace {

std::string fmt2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string render_series_svg(std::span<const TimeSeriesRow> series, int track_k,
                              const PlotOptions& options) {
  const double width = options.width;
  const double height = options.height;
  const double ml = 80, mr = 24, mt = 48, mb = 56;
  const double pw = width - ml - mr;   // plot width
  const double ph = height - mt - mb;  // plot height
  const bool loglog = options.kind == PlotOptions::Kind::loglog;

  // Usable points: n >= 1 always (x is log n); loglog additionally M_1 >= 1.
  std::vector<const TimeSeriesRow*> rows;
  for (const TimeSeriesRow& row : series) {
    if (row.n < 1) continue;
    if (loglog && (row.m_ranks.empty() || row.m_ranks[0] < 1)) continue;
    rows.push_back(&row);
  }

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(options.width) +
         "\" height=\"" + std::to_string(options.height) + "\" viewBox=\"0 0 " +
         std::to_string(options.width) + " " + std::to_string(options.height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty())
    svg += "<text x=\"" + fmt2(width / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           options.title + "</text>\n";

  if (rows.empty() || track_k < 1) {
    svg += "<text x=\"" + fmt2(width / 2) + "\" y=\"" + fmt2(height / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">no plottable "
           "points</text>\n</svg>\n";
    return svg;
  }

  const int ranks = loglog ? 1 : track_k;
  const auto value_of = [&](const TimeSeriesRow& row, int rank) {
    const long m = rank - 1 < static_cast<int>(row.m_ranks.size()) ? row.m_ranks[rank - 1] : 0;
    if (loglog) return std::log10(static_cast<double>(std::max<long>(m, 1)));
    return static_cast<double>(m) / static_cast<double>(row.n);
  };

  double x_lo = std::log10(static_cast<double>(rows.front()->n));
  double x_hi = std::log10(static_cast<double>(rows.back()->n));
  if (x_hi - x_lo < 1e-9) x_hi = x_lo + 1.0;
  double y_lo = 0.0, y_hi = -1e300;
  if (loglog) y_lo = 1e300;
  for (const TimeSeriesRow* row : rows)
    for (int k = 1; k <= ranks; ++k) {
      const double v = value_of(*row, k);
      y_hi = std::max(y_hi, v);
      if (loglog) y_lo = std::min(y_lo, v);
    }
  for (double level : options.reference_levels)
    if (!loglog) y_hi = std::max(y_hi, level);
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  const double pad = 0.06 * (y_hi - y_lo);
  y_hi += pad;
  if (loglog) y_lo -= pad;

  const auto sx = [&](double logn) { return ml + (logn - x_lo) / (x_hi - x_lo) * pw; };
  const auto sy = [&](double v) { return mt + (y_hi - v) / (y_hi - y_lo) * ph; };

  // Axes
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + fmt2(ml) + "\" y1=\"" + fmt2(mt + ph) + "\" x2=\"" + fmt2(ml + pw) +
         "\" y2=\"" + fmt2(mt + ph) + "\"/>\n";
  svg += "<line x1=\"" + fmt2(ml) + "\" y1=\"" + fmt2(mt) + "\" x2=\"" + fmt2(ml) + "\" y2=\"" +
         fmt2(mt + ph) + "\"/>\n";
  svg += "</g>\n";

  // X ticks at decades
  svg += "<g font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">\n";
  for (long e = static_cast<long>(std::ceil(x_lo)); e <= static_cast<long>(std::floor(x_hi));
       ++e) {
    const double px = sx(static_cast<double>(e));
    svg += "<line x1=\"" + fmt2(px) + "\" y1=\"" + fmt2(mt + ph) + "\" x2=\"" + fmt2(px) +
           "\" y2=\"" + fmt2(mt + ph + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt2(px) + "\" y=\"" + fmt2(mt + ph + 18) + "\">1e" +
           std::to_string(e) + "</text>\n";
  }
  svg += "<text x=\"" + fmt2(ml + pw / 2) + "\" y=\"" + fmt2(height - 12) + "\">n</text>\n";
  svg += "</g>\n";

  // Y ticks: 6 evenly spaced
  svg += "<g font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = y_lo + (y_hi - y_lo) * t / 5.0;
    const double py = sy(v);
    svg += "<line x1=\"" + fmt2(ml - 5) + "\" y1=\"" + fmt2(py) + "\" x2=\"" + fmt2(ml) +
           "\" y2=\"" + fmt2(py) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt2(ml - 8) + "\" y=\"" + fmt2(py + 4) + "\">" + fmt_tick(v) +
           "</text>\n";
  }
  const char* ylabel = loglog ? "log10 M_1(n)" : "M_k(n)/n";
  svg += "<text x=\"18\" y=\"" + fmt2(mt + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         fmt2(mt + ph / 2) + ")\">" + ylabel + "</text>\n";
  svg += "</g>\n";

  // Reference lines
  svg += "<g stroke=\"#888888\" stroke-dasharray=\"6 4\" fill=\"none\">\n";
  if (!loglog)
    for (double level : options.reference_levels)
      svg += "<line x1=\"" + fmt2(ml) + "\" y1=\"" + fmt2(sy(level)) + "\" x2=\"" + fmt2(ml + pw) +
             "\" y2=\"" + fmt2(sy(level)) + "\"/>\n";
  if (loglog && options.reference_slope) {
    // Natural-log slope s equals log10 slope; anchor at the final point.
    const double s = *options.reference_slope;
    const double xa = std::log10(static_cast<double>(rows.back()->n));
    const double ya = value_of(*rows.back(), 1);
    svg += "<line x1=\"" + fmt2(sx(x_lo)) + "\" y1=\"" + fmt2(sy(ya - s * (xa - x_lo))) +
           "\" x2=\"" + fmt2(sx(x_hi)) + "\" y2=\"" + fmt2(sy(ya + s * (x_hi - xa))) + "\"/>\n";
  }
  svg += "</g>\n";

  // Data polylines
  for (int k = 1; k <= ranks; ++k) {
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += kPalette[(k - 1) % (sizeof kPalette / sizeof kPalette[0])];
    svg += "\" stroke-width=\"1.5\" points=\"";
    for (const TimeSeriesRow* row : rows) {
      svg += fmt2(sx(std::log10(static_cast<double>(row->n))));
      svg += ',';
      svg += fmt2(sy(value_of(*row, k)));
      svg += ' ';
    }
    svg += "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace sapa
