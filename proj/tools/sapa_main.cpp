// Command-line front end: simulate | solve | classify | replicas | verify | plot.
//
// Exit codes: 0 success, 1 verification failure, 2 usage/invalid parameters,
// 3 I/O failure.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sapa/acceptance.hpp"
#include "sapa/harness.hpp"
#include "sapa/io.hpp"
#include "sapa/model.hpp"
#include "sapa/params.hpp"
#include "sapa/rng.hpp"
#include "sapa/theory.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<double> parse_m_dist(const std::string& csv) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string field =
        csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw std::invalid_argument("--m-dist: cannot parse '" + field + "' as a probability");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("--m-dist: empty list");
  return out;
}

// One flag set per subcommand; flags explicitly given on the command line
// override the config file, which overrides the defaults.
struct ModelFlags {
  double a = 0, b = 0, alpha = 0, beta = 0;
  int d = 0;
  std::string m_dist;
  long n0 = 0, steps = 0;
  std::uint64_t seed = 0;
  int track_k = 0;
  long stride = 0;
  int replicas = 0, jobs = 0;
  std::string out;
  bool timing = false;
  int k_max = 32;
  std::string config_path;
  CLI::App* cmd = nullptr;
  bool theory_only = false;

  void attach(CLI::App* c, bool run_controls) {
    cmd = c;
    theory_only = !run_controls;
    c->add_option("--config", config_path, "JSON config file (flags override its keys)");
    c->add_option("--a", a, "vertex-step radius slope, in (0, 1/2]");
    c->add_option("--b", b, "vertex-step radius offset, > 0");
    c->add_option("--alpha", alpha, "edge-step inclusion slope, in (0, 1/2]");
    c->add_option("--beta", beta, "edge-step inclusion offset, > 0");
    c->add_option("--d", d, "inclusion samples per edge step, >= 1");
    c->add_option("--m-dist", m_dist, "edge-count law P(m=1),...,P(m=M), e.g. 0.5,0.5");
    c->add_option("--k-max", k_max, "cap on the number of limit ranks solved for");
    if (!run_controls) return;
    c->add_option("--n0", n0, "initial vertex count, > max m");
    c->add_option("--steps", steps, "growth steps, >= 0");
    c->add_option("--seed", seed, "master seed");
    c->add_option("--track-k", track_k, "top in-degree ranks recorded, in [1, n0]");
    c->add_option("--checkpoint-stride", stride, "steps between recorded rows, >= 1");
    c->add_option("--replicas", replicas, "replica count, >= 1");
    c->add_option("--jobs", jobs, "worker threads for replicas, >= 1");
    c->add_option("--out", out, "output directory");
    c->add_flag("--timing", timing, "include wall-clock seconds in summaries");
  }

  bool given(const char* name) const {
    const CLI::Option* o = cmd->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  }

  bool any_model_flag() const {
    for (const char* n : {"--config", "--a", "--b", "--alpha", "--beta", "--d", "--m-dist"})
      if (given(n)) return true;
    return false;
  }

  sapa::RunConfig resolve() const {
    sapa::RunConfig cfg;
    if (given("--config")) {
      const auto doc = sapa::ordered_json::parse(sapa::read_text_file(config_path));
      sapa::apply_json(cfg, doc);
    }
    auto& p = cfg.params;
    if (given("--a")) p.a = a;
    if (given("--b")) p.b = b;
    if (given("--alpha")) p.alpha = alpha;
    if (given("--beta")) p.beta = beta;
    if (given("--d")) p.d = d;
    if (given("--m-dist")) {
      p.m_dist = parse_m_dist(m_dist);
      p.max_m = static_cast<int>(p.m_dist.size());
    }
    if (given("--n0")) p.n0 = n0;
    if (given("--steps")) p.steps = steps;
    if (given("--seed")) p.seed = seed;
    if (given("--track-k")) p.track_k = track_k;
    if (given("--checkpoint-stride")) p.checkpoint_stride = stride;
    if (given("--replicas")) cfg.replicas = replicas;
    if (given("--jobs")) cfg.jobs = jobs;
    if (given("--out")) cfg.out_dir = out;
    if (given("--timing")) cfg.timing = timing;
    // Commands that never simulate don't expose the run controls, so cross-field
    // checks against them (n0 > max m) must not reject a pure-theory invocation.
    if (theory_only) p.n0 = std::max<long>(p.n0, static_cast<long>(p.max_m) + 1);
    p.validate();
    if (cfg.replicas < 1) throw std::invalid_argument("--replicas must be >= 1");
    if (cfg.jobs < 1) throw std::invalid_argument("--jobs must be >= 1");
    if (k_max < 1) throw std::invalid_argument("--k-max must be >= 1");
    return cfg;
  }
};

void warn_if_near_critical(const sapa::ModelParams& p) {
  if (sapa::near_critical(p))
    std::fprintf(stderr,
                 "warning: a + d*alpha = %.17g is within 1e-9 of 1; the regime "
                 "classification is numerically delicate at this point\n",
                 p.exponent());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int do_simulate(const ModelFlags& f) {
  const sapa::RunConfig cfg = f.resolve();
  warn_if_near_critical(cfg.params);
  const auto t0 = std::chrono::steady_clock::now();
  sapa::RngStream rng = sapa::derive_stream(cfg.params.seed, 0);
  const auto series = sapa::run(cfg.params, rng);
  const double secs = seconds_since(t0);

  const sapa::TheoryResult theory = sapa::classify_regime(cfg.params, f.k_max);
  const long hi = std::max(1L, cfg.params.steps);
  const auto fit = sapa::estimate_exponent(series, std::max(1L, cfg.params.steps / 100), hi);

  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  sapa::write_text_file(dir / "series.csv", sapa::series_to_csv(series, cfg.params.track_k));
  const auto doc = sapa::summary_json(cfg, theory, series, fit,
                                      cfg.timing ? std::optional<double>(secs) : std::nullopt);
  sapa::write_text_file(dir / "summary.json", doc.dump(2) + "\n");
  std::printf("wrote %s and %s\n", (dir / "series.csv").string().c_str(),
              (dir / "summary.json").string().c_str());
  return 0;
}

int do_theory(const ModelFlags& f, bool full_solve) {
  const sapa::RunConfig cfg = f.resolve();
  warn_if_near_critical(cfg.params);
  const sapa::TheoryResult theory = full_solve ? sapa::solve_fixed_point(cfg.params, f.k_max)
                                               : sapa::classify_regime(cfg.params, f.k_max);
  const std::string text = sapa::theory_to_json(theory).dump(2) + "\n";
  std::fputs(text.c_str(), stdout);
  if (f.given("--out")) {
    fs::create_directories(cfg.out_dir);
    sapa::write_text_file(fs::path(cfg.out_dir) / "theory.json", text);
  }
  return 0;
}

int do_replicas(const ModelFlags& f) {
  const sapa::RunConfig cfg = f.resolve();
  warn_if_near_critical(cfg.params);
  const auto t0 = std::chrono::steady_clock::now();
  sapa::ReplicaOptions opts;  // keep series for the per-replica CSV files
  const auto summaries = sapa::run_replicas(cfg.params, cfg.replicas, cfg.jobs, opts);
  const double secs = seconds_since(t0);

  const sapa::TheoryResult theory = sapa::classify_regime(cfg.params, f.k_max);
  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  for (const auto& s : summaries) {
    char leaf[32];
    std::snprintf(leaf, sizeof leaf, "replica_%03d.csv", s.replica_id);
    sapa::write_text_file(dir / leaf, sapa::series_to_csv(s.series, cfg.params.track_k));
  }
  const auto doc = sapa::ensemble_json(cfg, theory, summaries,
                                       cfg.timing ? std::optional<double>(secs) : std::nullopt);
  sapa::write_text_file(dir / "ensemble.json", doc.dump(2) + "\n");
  std::printf("wrote %d replica series and %s\n", cfg.replicas,
              (dir / "ensemble.json").string().c_str());
  return 0;
}

std::string self_path(const char* argv0) {
  std::error_code ec;
  const fs::path link = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) return link.string();
  return argv0;
}

int do_verify(const std::string& only_csv, const std::string& cli, int jobs) {
  sapa::AcceptanceOptions opt;
  opt.cli_path = cli;
  opt.jobs = jobs < 1 ? 1 : jobs;
  if (!only_csv.empty()) {
    std::size_t start = 0;
    while (start <= only_csv.size()) {
      const std::size_t comma = only_csv.find(',', start);
      opt.only.push_back(only_csv.substr(
          start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  const auto results = sapa::run_acceptance(opt);
  bool all_ok = true;
  for (const auto& r : results) {
    std::printf("%s %s (%.1fs) - %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.seconds,
                r.detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && r.passed;
  }
  return all_ok ? 0 : 1;
}

int do_plot(const ModelFlags& f, const std::string& in, const std::string& kind,
            const std::string& out, const std::string& title) {
  const auto series = sapa::series_from_csv(sapa::read_text_file(in));
  const int track_k = series.empty() ? 0 : static_cast<int>(series.front().m_ranks.size());

  sapa::PlotOptions po;
  po.kind = kind == "loglog" ? sapa::PlotOptions::Kind::loglog : sapa::PlotOptions::Kind::ratio;
  po.title = title.empty() ? (kind == "loglog" ? "log-log M_1 vs n" : "M_k(n)/n") : title;
  if (f.any_model_flag()) {
    const sapa::RunConfig cfg = f.resolve();
    const sapa::TheoryResult theory = sapa::classify_regime(cfg.params, f.k_max);
    if (po.kind == sapa::PlotOptions::Kind::ratio) {
      for (std::size_t k = 0; k < theory.x_star.size() && k < static_cast<std::size_t>(track_k);
           ++k)
        po.reference_levels.push_back(theory.x_star[k]);
    } else {
      po.reference_slope = theory.exponent;
    }
  }
  sapa::write_text_file(out, sapa::render_series_svg(series, track_k, po));
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatial growth model with degree-seeking edges: simulation and limit theory"};
  app.require_subcommand(1);

  ModelFlags sim_flags, solve_flags, classify_flags, rep_flags, plot_flags;

  CLI::App* sim = app.add_subcommand("simulate", "one run: CSV series + JSON summary");
  sim_flags.attach(sim, true);

  CLI::App* solve = app.add_subcommand("solve", "solve the limit system: JSON to stdout");
  solve_flags.attach(solve, false);
  std::string solve_out;
  solve->add_option("--out", solve_out, "also write theory.json into this directory");

  CLI::App* classify = app.add_subcommand("classify", "regime and limit constants: JSON");
  classify_flags.attach(classify, false);
  std::string classify_out;
  classify->add_option("--out", classify_out, "also write theory.json into this directory");

  CLI::App* rep = app.add_subcommand("replicas", "ensemble: per-replica CSV + aggregate JSON");
  rep_flags.attach(rep, true);

  CLI::App* verify = app.add_subcommand("verify", "run the acceptance suite");
  std::string only_csv, cli_override;
  int verify_jobs = 1;
  verify->add_option("--only", only_csv, "comma-separated criteria, e.g. A6,A8");
  verify->add_option("--cli", cli_override, "binary used for the end-to-end checks");
  verify->add_option("--jobs", verify_jobs, "worker threads for replica ensembles");

  CLI::App* plot = app.add_subcommand("plot", "render a series CSV to SVG");
  plot_flags.attach(plot, false);
  std::string plot_in, plot_kind = "ratio", plot_out = "plot.svg", plot_title;
  plot->add_option("--in", plot_in, "input series CSV")->required();
  plot->add_option("--kind", plot_kind, "ratio | loglog")
      ->check(CLI::IsMember({"ratio", "loglog"}));
  plot->add_option("--out", plot_out, "output SVG path");
  plot->add_option("--title", plot_title, "plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(sim)) return do_simulate(sim_flags);
    if (app.got_subcommand(solve)) {
      solve_flags.out = solve_out;
      return do_theory(solve_flags, true);
    }
    if (app.got_subcommand(classify)) {
      classify_flags.out = classify_out;
      return do_theory(classify_flags, false);
    }
    if (app.got_subcommand(rep)) return do_replicas(rep_flags);
    if (app.got_subcommand(verify))
      return do_verify(only_csv,
                       cli_override.empty() ? self_path(argv[0]) : cli_override, verify_jobs);
    if (app.got_subcommand(plot))
      return do_plot(plot_flags, plot_in, plot_kind, plot_out, plot_title);
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 2;
}
