// Serialization round-trips: CSV time series, JSON config/result documents,
// SVG rendering, and text-file helpers.
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sapa/io.hpp"
#include "sapa/theory.hpp"

namespace fs = std::filesystem;
using namespace sapa;

namespace {

TimeSeriesRow row_of(long n, long e, std::vector<long> m) {
  TimeSeriesRow row;
  row.n = n;
  row.e_total = e;
  row.m_ranks = std::move(m);
  return row;
}

std::size_t count_occurrences(const std::string& text, std::string_view needle) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("series_to_csv emits the exact documented bytes") {
    const std::vector<TimeSeriesRow> series = {row_of(0, 0, {0, 0}), row_of(10, 14, {3, 2}),
                                               row_of(25, 40, {9, 4})};
    CHECK(series_to_csv(series, 2) ==
          "n,E,M_1,M_2\n"
          "0,0,0,0\n"
          "10,14,3,2\n"
          "25,40,9,4\n");
  }

  TEST_CASE("series_to_csv pads missing ranks with zeros") {
    const std::vector<TimeSeriesRow> series = {row_of(5, 7, {3})};
    CHECK(series_to_csv(series, 3) == "n,E,M_1,M_2,M_3\n5,7,3,0,0\n");
    // And an empty series is just the header.
    CHECK(series_to_csv({}, 1) == "n,E,M_1\n");
  }

  TEST_CASE("series_from_csv round-trips the writer") {
    std::vector<TimeSeriesRow> series;
    for (long i = 0; i < 12; ++i)
      series.push_back(row_of(i * i, 3 * i, {10 * i + 2, 10 * i + 1, 10 * i}));
    const std::string text = series_to_csv(series, 3);
    const std::vector<TimeSeriesRow> parsed = series_from_csv(text);
    REQUIRE(parsed.size() == series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
      CHECK(parsed[i].n == series[i].n);
      CHECK(parsed[i].e_total == series[i].e_total);
      CHECK(parsed[i].m_ranks == series[i].m_ranks);
    }
  }

  TEST_CASE("series_from_csv accepts a document without a trailing newline") {
    const std::vector<TimeSeriesRow> parsed = series_from_csv("n,E,M_1\n4,5,6");
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].n == 4);
    CHECK(parsed[0].e_total == 5);
    CHECK(parsed[0].m_ranks == std::vector<long>{6});
  }

  TEST_CASE("series_from_csv rejects malformed documents") {
    CHECK_THROWS_AS(series_from_csv(""), std::runtime_error);
    // Header shape.
    CHECK_THROWS_AS(series_from_csv("n,E\n1,2\n"), std::runtime_error);
    CHECK_THROWS_AS(series_from_csv("n,M_1,E\n1,2,3\n"), std::runtime_error);
    CHECK_THROWS_AS(series_from_csv("n,E,M_2\n1,2,3\n"), std::runtime_error);
    CHECK_THROWS_AS(series_from_csv("n,E,M_1,M_3\n1,2,3,4\n"), std::runtime_error);
    // Field syntax: strict integers only.
    CHECK_THROWS_AS(series_from_csv("n,E,M_1\n1,2,x\n"), std::runtime_error);
    CHECK_THROWS_AS(series_from_csv("n,E,M_1\n1,2.5,3\n"), std::runtime_error);
    CHECK_THROWS_AS(series_from_csv("n,E,M_1\n1, 2,3\n"), std::runtime_error);
    // Column-count mismatches, including blank interior lines.
    CHECK_THROWS_AS(series_from_csv("n,E,M_1\n1,2\n"), std::runtime_error);
    CHECK_THROWS_AS(series_from_csv("n,E,M_1\n1,2,3,4\n"), std::runtime_error);
    CHECK_THROWS_AS(series_from_csv("n,E,M_1\n\n1,2,3\n"), std::runtime_error);
  }

  TEST_CASE("params_to_json lists every tunable once, in declaration order") {
    const ModelParams params;  // defaults
    const ordered_json doc = params_to_json(params);
    const std::vector<std::string> expected = {"a",  "b",     "alpha", "beta",
                                               "d",  "m_dist", "n0",    "steps",
                                               "seed", "track_k", "checkpoint_stride"};
    std::vector<std::string> keys;
    for (const auto& item : doc.items()) keys.push_back(item.key());
    CHECK(keys == expected);
    CHECK(doc["a"].get<double>() == 0.2);
    CHECK(doc["m_dist"].get<std::vector<double>>() == std::vector<double>{1.0});
    CHECK(doc["seed"].get<std::uint64_t>() == 1);
  }

  TEST_CASE("params JSON round-trip restores every field") {
    ModelParams params;
    params.a = 0.45;
    params.b = 0.5;
    params.alpha = 0.35;
    params.beta = 2.0;
    params.d = 3;
    params.m_dist = {0.2, 0.8};
    params.max_m = 2;
    params.n0 = 16;
    params.steps = 5000;
    params.seed = 987654321u;
    params.track_k = 4;
    params.checkpoint_stride = 50;

    ModelParams restored;  // defaults
    apply_json(restored, params_to_json(params));
    CHECK(restored.a == params.a);
    CHECK(restored.b == params.b);
    CHECK(restored.alpha == params.alpha);
    CHECK(restored.beta == params.beta);
    CHECK(restored.d == params.d);
    CHECK(restored.m_dist == params.m_dist);
    CHECK(restored.max_m == 2);  // recomputed from m_dist
    CHECK(restored.n0 == params.n0);
    CHECK(restored.steps == params.steps);
    CHECK(restored.seed == params.seed);
    CHECK(restored.track_k == params.track_k);
    CHECK(restored.checkpoint_stride == params.checkpoint_stride);
  }

  TEST_CASE("apply_json touches only the keys present") {
    ModelParams params;
    ordered_json doc;
    doc["a"] = 0.31;
    doc["steps"] = 77;
    apply_json(params, doc);
    CHECK(params.a == 0.31);
    CHECK(params.steps == 77);
    // Untouched fields keep their defaults.
    CHECK(params.b == 1.0);
    CHECK(params.d == 1);
    CHECK(params.m_dist == std::vector<double>{1.0});
    CHECK(params.max_m == 1);
    CHECK(params.seed == 1);
  }

  TEST_CASE("apply_json rejects unknown keys") {
    ModelParams params;
    ordered_json doc;
    doc["gamma"] = 1.0;
    CHECK_THROWS_AS(apply_json(params, doc), std::runtime_error);

    RunConfig config;
    ordered_json bad;
    bad["replica"] = 2;  // typo for "replicas"
    CHECK_THROWS_AS(apply_json(config, bad), std::runtime_error);

    // A run-level key is not a model-level key.
    ordered_json run_only;
    run_only["jobs"] = 4;
    CHECK_THROWS_AS(apply_json(params, run_only), std::runtime_error);
  }

  TEST_CASE("run config JSON round-trips run-level and model-level keys together") {
    RunConfig config;
    config.params.a = 0.4;
    config.params.track_k = 2;
    config.replicas = 8;
    config.jobs = 4;
    config.out_dir = "runs/batch3";
    config.timing = true;

    const ordered_json doc = config_to_json(config);
    CHECK(doc["replicas"].get<int>() == 8);
    CHECK(doc["jobs"].get<int>() == 4);
    CHECK(doc["out"].get<std::string>() == "runs/batch3");
    CHECK(doc["timing"].get<bool>() == true);
    CHECK(doc["a"].get<double>() == 0.4);

    RunConfig restored;
    apply_json(restored, doc);
    CHECK(restored.params.a == 0.4);
    CHECK(restored.params.track_k == 2);
    CHECK(restored.replicas == 8);
    CHECK(restored.jobs == 4);
    CHECK(restored.out_dir == "runs/batch3");
    CHECK(restored.timing == true);
  }

  TEST_CASE("theory_to_json carries the classification verbatim") {
    ModelParams params;
    params.a = 0.5;
    params.alpha = 0.3;
    params.d = 2;
    const TheoryResult theory = classify_regime(params);
    const ordered_json doc = theory_to_json(theory);
    CHECK(doc["regime"].get<std::string>() == "supercritical");
    CHECK(doc["exponent"].get<double>() == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(doc["K"].get<int>() == 1);
    CHECK(doc["r_m"].get<int>() == 1);
    REQUIRE(doc["x_star"].size() == 1);
    CHECK(doc["x_star"][0].get<double>() == doctest::Approx(10.0 / 9.0).epsilon(1e-9));
  }

  TEST_CASE("exponent_to_json is null for an absent fit") {
    CHECK(exponent_to_json(std::nullopt).is_null());
    ExponentFit fit;
    fit.slope = 0.6;
    fit.stderr_slope = 0.01;
    fit.points = 12;
    const ordered_json doc = exponent_to_json(fit);
    CHECK(doc["slope"].get<double>() == 0.6);
    CHECK(doc["stderr"].get<double>() == 0.01);
    CHECK(doc["points"].get<long>() == 12);
  }

  TEST_CASE("summary_json reports the final checkpoint with derived ratios") {
    RunConfig config;
    config.params.a = 0.5;
    config.params.alpha = 0.3;
    config.params.d = 2;
    config.params.track_k = 2;
    const TheoryResult theory = classify_regime(config.params);
    const std::vector<TimeSeriesRow> series = {row_of(10, 12, {4, 2}), row_of(100, 140, {30, 20})};

    const ordered_json doc = summary_json(config, theory, series, std::nullopt, std::nullopt);
    CHECK(doc["parameters"] == params_to_json(config.params));
    // Scheduling and placement never enter result documents: two invocations
    // of the same run must produce identical bytes wherever they write.
    CHECK_FALSE(doc["parameters"].contains("out"));
    CHECK_FALSE(doc["parameters"].contains("jobs"));
    CHECK(doc["seed"].get<std::uint64_t>() == config.params.seed);
    CHECK(doc["theory"] == theory_to_json(theory));
    CHECK(doc["final"]["n"].get<long>() == 100);
    CHECK(doc["final"]["E"].get<long>() == 140);
    CHECK(doc["final"]["m_ranks"].get<std::vector<long>>() == std::vector<long>{30, 20});
    const auto ratio = doc["final"]["ratio_n"].get<std::vector<double>>();
    REQUIRE(ratio.size() == 2);
    CHECK(ratio[0] == doctest::Approx(0.30).epsilon(1e-12));
    CHECK(ratio[1] == doctest::Approx(0.20).epsilon(1e-12));
    CHECK(doc["final"]["m1_logn_over_n"].get<double>() ==
          doctest::Approx(30.0 * std::log(100.0) / 100.0).epsilon(1e-12));
    CHECK(doc["exponent"].is_null());
    CHECK_FALSE(doc.contains("wall_clock_seconds"));

    // Timing is opt-in; the field appears only when a measurement is passed.
    const ordered_json timed = summary_json(config, theory, series, std::nullopt, 1.25);
    CHECK(timed["wall_clock_seconds"].get<double>() == 1.25);

    // No checkpoints at all: the final block is explicitly empty.
    const ordered_json empty = summary_json(config, theory, {}, std::nullopt, std::nullopt);
    CHECK(empty["final"].is_null());
  }

  TEST_CASE("ensemble_json aggregates replica statistics") {
    RunConfig config;
    config.params.track_k = 1;
    config.replicas = 2;
    const TheoryResult theory = classify_regime(config.params);

    ReplicaSummary r0;
    r0.replica_id = 0;
    r0.final_n = 100;
    r0.final_m = {50};
    r0.final_ratio = {0.5};
    r0.m1_logn_over_n = 0.9;
    ExponentFit fit;
    fit.slope = 1.0;
    fit.stderr_slope = 0.1;
    fit.points = 10;
    r0.exponent = fit;

    ReplicaSummary r1;
    r1.replica_id = 1;
    r1.final_n = 100;
    r1.final_m = {70};
    r1.final_ratio = {0.7};
    r1.m1_logn_over_n = 1.1;
    r1.exponent = std::nullopt;

    const std::vector<ReplicaSummary> replicas = {r0, r1};
    const ordered_json doc = ensemble_json(config, theory, replicas, std::nullopt);
    CHECK(doc["replica_count"].get<int>() == 2);
    REQUIRE(doc["replicas"].size() == 2);
    CHECK(doc["replicas"][0]["replica_id"].get<int>() == 0);
    CHECK(doc["replicas"][0]["final_m"].get<std::vector<long>>() == std::vector<long>{50});
    CHECK(doc["replicas"][0]["exponent"]["slope"].get<double>() == 1.0);
    CHECK(doc["replicas"][1]["exponent"].is_null());

    const auto mean = doc["ensemble"]["ratio_n_mean"].get<std::vector<double>>();
    const auto se = doc["ensemble"]["ratio_n_stderr"].get<std::vector<double>>();
    REQUIRE(mean.size() == 1);
    REQUIRE(se.size() == 1);
    CHECK(mean[0] == doctest::Approx(0.6).epsilon(1e-12));
    // Sample sd of {0.5, 0.7} is sqrt(0.02); stderr is sd / sqrt(2) = 0.1.
    CHECK(se[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(doc["ensemble"]["m1_logn_over_n_mean"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-12));
    // Only one replica produced a fit: mean over one value, stderr zero.
    CHECK(doc["ensemble"]["exponent_mean"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(doc["ensemble"]["exponent_stderr"].get<double>() == 0.0);
    CHECK_FALSE(doc.contains("wall_clock_seconds"));

    const ordered_json timed = ensemble_json(config, theory, replicas, 3.5);
    CHECK(timed["wall_clock_seconds"].get<double>() == 3.5);

    // No fits anywhere: the aggregate slots are null, not absent.
    ReplicaSummary bare = r1;
    const std::vector<ReplicaSummary> no_fits = {bare};
    const ordered_json doc2 = ensemble_json(config, theory, no_fits, std::nullopt);
    CHECK(doc2["ensemble"]["exponent_mean"].is_null());
    CHECK(doc2["ensemble"]["exponent_stderr"].is_null());
  }

  TEST_CASE("ratio plot draws one polyline per rank plus requested guide lines") {
    std::vector<TimeSeriesRow> series;
    for (long n : {10L, 100L, 1000L, 10000L}) series.push_back(row_of(n, 2 * n, {n / 2, n / 4}));

    PlotOptions bare;
    bare.kind = PlotOptions::Kind::ratio;
    bare.title = "ratio view";
    const std::string svg_bare = render_series_svg(series, 2, bare);
    CHECK(svg_bare.rfind("<svg ", 0) == 0);
    CHECK(count_occurrences(svg_bare, "</svg>") == 1);
    CHECK(svg_bare.find("ratio view") != std::string::npos);
    CHECK(svg_bare.find("M_k(n)/n") != std::string::npos);
    CHECK(count_occurrences(svg_bare, "<polyline") == 2);
    CHECK(count_occurrences(svg_bare, "stroke-dasharray") == 1);

    PlotOptions guided = bare;
    guided.reference_levels = {0.5, 0.25};
    const std::string svg_guided = render_series_svg(series, 2, guided);
    CHECK(count_occurrences(svg_guided, "<line") ==
          count_occurrences(svg_bare, "<line") + 2);
  }

  TEST_CASE("loglog plot tracks only the top rank and supports a slope guide") {
    std::vector<TimeSeriesRow> series;
    for (long n : {10L, 100L, 1000L, 10000L}) series.push_back(row_of(n, 2 * n, {n / 2, n / 4}));

    PlotOptions bare;
    bare.kind = PlotOptions::Kind::loglog;
    const std::string svg_bare = render_series_svg(series, 2, bare);
    CHECK(count_occurrences(svg_bare, "<polyline") == 1);
    CHECK(svg_bare.find("log10 M_1(n)") != std::string::npos);

    PlotOptions guided = bare;
    guided.reference_slope = 1.0;
    const std::string svg_guided = render_series_svg(series, 2, guided);
    CHECK(count_occurrences(svg_guided, "<line") ==
          count_occurrences(svg_bare, "<line") + 1);
  }

  TEST_CASE("plots degrade gracefully when nothing is plottable") {
    const PlotOptions ratio_opts;
    CHECK(render_series_svg({}, 2, ratio_opts).find("no plottable points") != std::string::npos);

    // n = 0 rows carry no usable x coordinate.
    const std::vector<TimeSeriesRow> origin_only = {row_of(0, 0, {0, 0})};
    CHECK(render_series_svg(origin_only, 2, ratio_opts).find("no plottable points") !=
          std::string::npos);

    // log-log additionally needs M_1 >= 1.
    PlotOptions loglog_opts;
    loglog_opts.kind = PlotOptions::Kind::loglog;
    const std::vector<TimeSeriesRow> flat = {row_of(10, 0, {0}), row_of(20, 0, {0})};
    CHECK(render_series_svg(flat, 1, loglog_opts).find("no plottable points") !=
          std::string::npos);

    // A zero-rank request cannot be drawn either, even with usable rows.
    const std::vector<TimeSeriesRow> fine = {row_of(10, 5, {3}), row_of(20, 9, {5})};
    CHECK(render_series_svg(fine, 0, ratio_opts).find("no plottable points") !=
          std::string::npos);
    // Every degenerate document is still well-formed SVG.
    CHECK(render_series_svg({}, 2, ratio_opts).find("</svg>") != std::string::npos);
  }

  TEST_CASE("text-file helpers round-trip bytes and report path errors") {
    const fs::path dir = fs::temp_directory_path() / "sapa-io-tests";
    fs::remove_all(dir);
    fs::create_directories(dir);

    const fs::path file = dir / "sample.txt";
    const std::string payload = "line one\nline two\n\ttabbed, trailing\n";
    write_text_file(file, payload);
    CHECK(read_text_file(file) == payload);

    // Overwrite truncates: the shorter second payload fully replaces the first.
    write_text_file(file, "tiny");
    CHECK(read_text_file(file) == "tiny");

    CHECK_THROWS_AS(read_text_file(dir / "does-not-exist.txt"), std::runtime_error);
    CHECK_THROWS_AS(write_text_file(dir / "missing-subdir" / "out.txt", "x"),
                    std::runtime_error);

    fs::remove_all(dir);
  }
}
