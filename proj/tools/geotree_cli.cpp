#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geotree/approx_tv.hpp"
#include "geotree/branch_stats.hpp"
#include "geotree/config.hpp"
#include "geotree/dlpp.hpp"
#include "geotree/euclid_fpp.hpp"
#include "geotree/forest_uniform.hpp"
#include "geotree/report.hpp"
#include "geotree/rpt.hpp"
#include "geotree/svg.hpp"

#ifndef GEOTREE_VERSION
#define GEOTREE_VERSION "dev"
#endif

using namespace geotree;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

// Per-invocation state shared by the subcommands.
struct Run {
  CLI::App* sub = nullptr;
  std::string config_path;
  std::string out;
  std::uint64_t seed = kDefaultSeed;
  CLI::Option* seed_opt = nullptr;
  std::size_t threads = default_threads();

  std::uint64_t base_seed() const {
    if (seed_opt && seed_opt->count()) return seed;
    if (const char* env = std::getenv("GEOTREE_SEED"); env && *env) {
      std::uint64_t v = 0;
      const std::string s(env);
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw InvalidInput("GEOTREE_SEED is not an integer");
      return v;
    }
    return seed;
  }

  std::string manifest_path() const { return out + ".manifest.json"; }

  json manifest() const {
    json opts = json::object();
    for (const auto* o : sub->get_options()) {
      if (o->get_name() == "--help") continue;
      const auto& res = o->results();
      std::string v = res.empty() ? o->get_default_str() : res.back();
      opts[o->get_name()] = v;
    }
    if (opts.contains("--seed")) opts["--seed"] = std::to_string(base_seed());
    if (opts.contains("--threads")) opts["--threads"] = std::to_string(threads);
    return {{"tool", "geotree"},
            {"version", GEOTREE_VERSION},
            {"subcommand", sub->get_name()},
            {"base_seed", base_seed()},
            {"config_file", config_path.empty() ? json(nullptr) : json(config_path)},
            {"options", opts},
            {"output", out}};
  }

  /// Writes `text` to --out (or stdout) plus the manifest alongside a file.
  void emit(const std::string& text) const {
    if (out.empty() || out == "-") {
      std::cout << text;
      return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw InvalidInput("cannot write '" + out + "'");
    f << text;
    std::ofstream m(manifest_path(), std::ios::binary);
    m << manifest().dump(2) << '\n';
  }

  std::string manifest_ref() const { return out.empty() || out == "-" ? std::string() : manifest_path(); }
};

void add_out(CLI::App* sub, Run& run) { sub->add_option("--out,-o", run.out, "output file (default: stdout)"); }
void add_seed(CLI::App* sub, Run& run) {
  run.seed_opt = nullptr;
  sub->add_option("--seed", run.seed, "base seed (fallback: GEOTREE_SEED, then 1)");
}
void add_threads(CLI::App* sub, Run& run) {
  sub->add_option("--threads", run.threads, "worker threads (default: machine parallelism)")->check(CLI::PositiveNumber);
}

Point parse_point(const std::string& s) {
  const auto v = parse_list(s);
  if (v.size() != 2) throw InvalidInput("expected 'x,y', got '" + s + "'");
  return {v[0], v[1]};
}

std::vector<std::size_t> to_sizes(const std::vector<double>& v, const char* what) {
  std::vector<std::size_t> out;
  for (double d : v) {
    if (!(d >= 0.0) || d != std::floor(d)) throw InvalidInput(std::string(what) + " values must be nonnegative integers");
    out.push_back(static_cast<std::size_t>(d));
  }
  return out;
}

json sample_to_json(const PointSample& s) {
  json pts = json::array();
  for (Point p : s.points) pts.push_back({p.x, p.y});
  json w = {{"shape", s.window.shape == WindowShape::disk      ? "disk"
                      : s.window.shape == WindowShape::annulus ? "annulus"
                                                               : "rectangle"},
            {"center", {s.window.center.x, s.window.center.y}}};
  if (s.window.shape == WindowShape::rectangle) {
    w["half_width"] = s.window.half_width;
    w["half_height"] = s.window.half_height;
  } else {
    w["outer"] = s.window.outer;
    if (s.window.shape == WindowShape::annulus) w["inner"] = s.window.inner;
  }
  return {{"intensity", s.intensity}, {"seed", s.seed}, {"window", w}, {"points", pts}};
}

PointSample sample_from_json(const json& j) {
  try {
    PointSample s;
    s.intensity = j.at("intensity").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto& w = j.at("window");
    const Point c{w.at("center").at(0).get<double>(), w.at("center").at(1).get<double>()};
    const auto shape = w.at("shape").get<std::string>();
    if (shape == "disk") s.window = Window::disk(c, w.at("outer").get<double>());
    else if (shape == "annulus") s.window = Window::annulus(c, w.at("inner").get<double>(), w.at("outer").get<double>());
    else if (shape == "rectangle") {
      const double hw = w.at("half_width").get<double>(), hh = w.at("half_height").get<double>();
      s.window = Window::rectangle({c.x - hw, c.y - hh, c.x + hw, c.y + hh});
    } else throw InvalidInput("unknown window shape '" + shape + "'");
    for (const auto& p : j.at("points")) s.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return s;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("sample JSON: ") + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput("'" + path + "': " + e.what());
  }
}

/// Rewrites argv so that config entries come right after the subcommand
/// name; later occurrences win, so explicit flags override the file.
std::vector<std::string> apply_config(const std::vector<std::string>& args, CLI::App& app, std::string& config_path) {
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw InvalidInput("--config needs a file name");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return rest;
  const auto entries = load_config(config_path);
  for (const auto& e : entries) {
    if (!e.section.empty()) {
      CLI::App* sub = nullptr;
      try {
        sub = app.get_subcommand(e.section);
      } catch (const CLI::OptionNotFound&) {
      }
      if (!sub) throw ConfigError(e.line, "unknown section '" + e.section + "'");
      if (!sub->get_option_no_throw("--" + e.key)) throw ConfigError(e.line, "unknown key '" + e.key + "' in [" + e.section + "]");
    } else {
      bool known = false;
      for (const auto* sub : app.get_subcommands({})) known = known || sub->get_option_no_throw("--" + e.key);
      if (!known) throw ConfigError(e.line, "unknown key '" + e.key + "'");
    }
  }
  std::size_t pos = rest.size();
  std::string name;
  for (std::size_t i = 1; i < rest.size(); ++i) {
    for (const auto* sub : app.get_subcommands({}))
      if (sub->get_name() == rest[i]) { pos = i; name = rest[i]; break; }
    if (!name.empty()) break;
  }
  if (name.empty()) return rest;
  CLI::App* sub = app.get_subcommand(name);
  std::vector<std::string> injected;
  for (const auto& e : entries) {
    if (!e.section.empty() && e.section != name) continue;
    if (e.section.empty() && !sub->get_option_no_throw("--" + e.key)) continue;
    injected.push_back("--" + e.key);
    injected.push_back(e.value);
  }
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(pos) + 1, injected.begin(), injected.end());
  return rest;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric random trees: builders, Monte Carlo campaigns and reports", "geotree"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", GEOTREE_VERSION);
  app.footer("Global: --config FILE reads 'key = value' lines; [name] sections apply to one subcommand.\n"
             "Exit codes: 0 ok, 1 invalid input, 2 window/horizon exhausted, 3 internal invariant violation.");
  Run run;

  // sample
  std::string shape = "disk", center = "0,0", box;
  double radius = 10.0, inner = 0.0, intensity = 1.0, thin = 0.0;
  auto* sample = app.add_subcommand("sample", "sample a Poisson point process (JSON)");
  sample->add_option("--shape", shape, "disk | annulus | rectangle")->capture_default_str();
  sample->add_option("--radius", radius, "disk or annulus outer radius")->capture_default_str();
  sample->add_option("--inner", inner, "annulus inner radius")->capture_default_str();
  sample->add_option("--center", center, "window centre 'x,y'")->capture_default_str();
  sample->add_option("--box", box, "rectangle 'xmin,ymin,xmax,ymax'");
  sample->add_option("--intensity", intensity, "points per unit area")->capture_default_str();
  sample->add_option("--thin", thin, "remove the open ball B(O, thin)")->capture_default_str();

  // build
  std::string model = "rpt", input, engine = "auto";
  double rho = 1.0, alpha = 2.0, theta = 0.0, horizon = 0.0, length = 200.0, height = 20.0;
  std::size_t grid_n = 50;
  auto* build = app.add_subcommand("build", "build a tree or forest (JSON)");
  build->add_option("--model", model, "rpt | fpp | lpp | forest_rho | forest_alpha | forest_lpp")->capture_default_str();
  build->add_option("--rho", rho, "RPT cylinder / forest strip half-width")->capture_default_str();
  build->add_option("--alpha", alpha, "FPP exponent")->capture_default_str();
  build->add_option("--radius", radius, "disk window radius (rpt, fpp, forest_alpha starts)")->capture_default_str();
  build->add_option("--input", input, "use this sample JSON instead of sampling (rpt, fpp)");
  build->add_option("--N", grid_n, "LPP grid size, vertices {0..N}^2")->capture_default_str();
  build->add_option("--theta", theta, "direction of forest_alpha / forest_lpp")->capture_default_str();
  build->add_option("--horizon", horizon, "directed-geodesic horizon (0: 64 for fpp, 2N for lpp)")->capture_default_str();
  build->add_option("--length", length, "forest_rho region width")->capture_default_str();
  build->add_option("--height", height, "forest_rho region height")->capture_default_str();
  build->add_option("--engine", engine, "FPP engine: auto | dense | gabriel")->capture_default_str();

  // chi
  std::string r_list = "20,40,80", c_str;
  double c_len = 2.0 * std::numbers::pi, rout_factor = 3.0;
  std::size_t reps = 500;
  std::string aggregate;
  auto* chi = app.add_subcommand("chi", "crossing campaign (per-replication CSV)");
  chi->add_option("--model", model, "rpt | fpp | lpp")->capture_default_str();
  chi->add_option("--rho", rho, "RPT parameter")->capture_default_str();
  chi->add_option("--alpha", alpha, "FPP exponent")->capture_default_str();
  chi->add_option("--r", r_list, "arc radii, comma separated")->capture_default_str();
  chi->add_option("--theta", theta, "arc centre direction")->capture_default_str();
  chi->add_option("--c", c_len, "arc length")->capture_default_str();
  chi->add_option("--rout-factor", rout_factor, "R_out = factor * r")->capture_default_str();
  chi->add_option("--reps", reps, "replications per radius")->capture_default_str();
  chi->add_option("--aggregate", aggregate, "also write the aggregate CSV here");

  // coalesce
  std::size_t starts = 20;
  double seg = 20.0;
  std::string distances = "0,10,50,100,200";
  auto* coalesce = app.add_subcommand("coalesce", "F_rho survivor curves (CSV)");
  coalesce->add_option("--rho", rho, "strip half-width")->capture_default_str();
  coalesce->add_option("--starts", starts, "number of starts")->capture_default_str();
  coalesce->add_option("--length", seg, "length of the vertical start segment")->capture_default_str();
  coalesce->add_option("--distances", distances, "distances, comma separated, nondecreasing")->capture_default_str();
  coalesce->add_option("--reps", reps, "replications")->capture_default_str();

  // deviation
  std::string dev_r = "100,200,400,800,1600";
  auto* deviation = app.add_subcommand("deviation", "radial branch deviation campaign (CSV)");
  deviation->add_option("--r", dev_r, "start radii, comma separated")->capture_default_str();
  deviation->add_option("--rho", rho, "RPT parameter")->capture_default_str();
  deviation->add_option("--reps", reps, "replications")->capture_default_str();

  // approx
  std::string approx_r = "50,100,200,400";
  double L = 5.0;
  auto* approx = app.add_subcommand("approx", "RPT vs F_rho disagreement curve (CSV)");
  approx->add_option("--rho", rho, "RPT and forest parameter")->capture_default_str();
  approx->add_option("--L", L, "probe radius")->capture_default_str();
  approx->add_option("--r", approx_r, "probe distances, comma separated")->capture_default_str();
  approx->add_option("--reps", reps, "replications")->capture_default_str();

  // lpp-line
  std::size_t line_L = 20;
  std::string m_list = "0,10,100,1000";
  std::size_t line_h = 0;
  double line_theta = std::numbers::pi / 4;
  auto* line = app.add_subcommand("lpp-line", "SW-LPP line survivor campaign (CSV)");
  line->add_option("--theta", line_theta, "direction in (0, pi/2)")->capture_default_str();
  line->add_option("--L", line_L, "anti-diagonal segment size")->capture_default_str();
  line->add_option("--m", m_list, "step counts, comma separated, nondecreasing")->capture_default_str();
  line->add_option("--horizon", line_h, "distance to the common target (0: twice the largest m)")->capture_default_str();
  line->add_option("--reps", reps, "replications")->capture_default_str();

  // render
  std::string arc;
  double size = 800.0;
  auto* render = app.add_subcommand("render", "tree JSON to SVG");
  render->add_option("--input", input, "tree JSON")->required();
  render->add_option("--arc", arc, "overlay arc 'r,theta,c'");
  render->add_option("--size", size, "picture size in pixels")->capture_default_str();

  // report
  std::vector<std::string> inputs;
  auto* report = app.add_subcommand("report", "summary tables and verdicts from result CSVs");
  report->add_option("--input", inputs, "result CSV files")->required()->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  for (auto* s : {sample, build, chi, coalesce, deviation, approx, line, render, report}) add_out(s, run);
  for (auto* s : {sample, build, chi, coalesce, deviation, approx, line}) {
    add_seed(s, run);
    s->callback([s, &run] { run.seed_opt = s->get_option("--seed"); });
  }
  for (auto* s : {build, chi, coalesce, deviation, approx, line}) add_threads(s, run);

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = apply_config(args, app, run.config_path);
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::cerr << "error: " << e.what() << "\n\n" << app.help();
      return 1;
    }
    run.sub = app.get_subcommands().front();

    if (run.sub == sample) {
      Window w;
      if (shape == "disk") w = Window::disk(parse_point(center), radius);
      else if (shape == "annulus") w = Window::annulus(parse_point(center), inner, radius);
      else if (shape == "rectangle") {
        const auto b = parse_list(box);
        if (b.size() != 4) throw InvalidInput("--box needs 'xmin,ymin,xmax,ymax'");
        w = Window::rectangle({b[0], b[1], b[2], b[3]});
      } else throw InvalidInput("unknown --shape '" + shape + "'");
      auto s = sample_ppp(w, intensity, run.base_seed());
      if (thin > 0.0) s = thin_ball(s, kOrigin, thin);
      json j = sample_to_json(s);
      if (!run.manifest_ref().empty()) j["manifest"] = run.manifest_ref();
      run.emit(j.dump() + "\n");
    } else if (run.sub == build) {
      const Model m = model_from_string(model);
      const std::uint64_t seed = run.base_seed();
      FppEngineKind kind = FppEngineKind::automatic;
      if (engine == "dense") kind = FppEngineKind::dense;
      else if (engine == "gabriel") kind = FppEngineKind::gabriel;
      else if (engine != "auto") throw InvalidInput("unknown --engine '" + engine + "'");
      AncestorTree t;
      switch (m) {
      case Model::rpt: {
        PointSample s = input.empty() ? sample_ppp(Window::disk(kOrigin, radius), 1.0, seed)
                                      : sample_from_json(read_json_file(input));
        t = build_rpt(thin_ball(s, kOrigin, rho), rho);
        break;
      }
      case Model::fpp: {
        PointSample s = input.empty() ? sample_ppp(Window::disk(kOrigin, radius), 1.0, seed)
                                      : sample_from_json(read_json_file(input));
        t = build_fpp_tree(s, alpha, kind);
        break;
      }
      case Model::lpp: t = build_lpp_tree(compute_passage_times(LatticeWeights(seed), grid_n), seed); break;
      case Model::forest_rho: {
        const Box region{0.0, 0.0, length, height};
        t = build_forest_rho(sample_ppp(forest_window(region, 0.0, rho, 1.0), 1.0, seed), rho, region);
        break;
      }
      case Model::forest_alpha: {
        const double D = horizon > 0 ? horizon : 64.0;
        const auto s = sample_ppp(Window::disk(kOrigin, radius + 2.0 * D), 1.0, seed);
        const FppEngine eng(s, alpha, kind);
        std::vector<std::size_t> ids;
        for (std::size_t i = 0; i < s.size(); ++i)
          if (norm(s.points[i]) <= radius) ids.push_back(i);
        t = assemble_forest_alpha(eng, ids, theta, D);
        break;
      }
      case Model::forest_lpp: {
        const std::size_t h = horizon > 0 ? static_cast<std::size_t>(horizon) : 2 * grid_n;
        t = build_sw_forest(theta, grid_n, h, LatticeWeights(seed));
        break;
      }
      }
      json j = to_json(t);
      if (!run.manifest_ref().empty()) j["manifest"] = run.manifest_ref();
      run.emit(j.dump() + "\n");
    } else if (run.sub == chi) {
      const Model m = model_from_string(model);
      std::vector<CrossingQuery> qs;
      for (double r : parse_list(r_list))
        qs.push_back({m, m == Model::fpp ? alpha : rho, r, theta, c_len, rout_factor * r});
      const auto stats = run_campaign(qs, reps, run.base_seed(), run.threads);
      std::ostringstream os;
      write_crossing_csv(os, stats);
      run.emit(os.str());
      if (!aggregate.empty()) {
        std::ofstream f(aggregate, std::ios::binary);
        if (!f) throw InvalidInput("cannot write '" + aggregate + "'");
        write_crossing_aggregate(f, stats);
      }
    } else if (run.sub == coalesce) {
      const auto d = parse_list(distances);
      const auto curves = run_coalescence(rho, starts, seg, d, reps, run.base_seed(), run.threads);
      std::ostringstream os;
      write_survivor_csv(os, curves, d, run.base_seed());
      run.emit(os.str());
    } else if (run.sub == deviation) {
      const auto recs = run_deviation(parse_list(dev_r), rho, reps, run.base_seed(), run.threads);
      std::ostringstream os;
      write_deviation_csv(os, recs, rho);
      run.emit(os.str());
    } else if (run.sub == approx) {
      const auto curve = disagreement_curve(rho, L, parse_list(approx_r), reps, run.base_seed(), run.threads);
      std::ostringstream os;
      write_disagreement_csv(os, curve);
      run.emit(os.str());
    } else if (run.sub == line) {
      const auto ms = to_sizes(parse_list(m_list), "--m");
      const auto curves = run_line_survivors(line_theta, line_L, ms, reps, run.base_seed(), run.threads, line_h);
      std::ostringstream os;
      write_line_csv(os, curves, line_theta, line_L, ms, run.base_seed());
      run.emit(os.str());
    } else if (run.sub == render) {
      const AncestorTree t = tree_from_json(read_json_file(input));
      SvgOptions opt;
      opt.size = size;
      if (!arc.empty()) {
        const auto a = parse_list(arc);
        if (a.size() != 3) throw InvalidInput("--arc needs 'r,theta,c'");
        opt.arc = ArcOverlay{a[0], a[1], a[2]};
      }
      if (!run.manifest_ref().empty()) opt.comment = "manifest: " + run.manifest_ref();
      run.emit(render_svg(t, opt));
    } else if (run.sub == report) {
      std::ostringstream os;
      for (const auto& f : inputs) report_file(os, f);
      run.emit(os.str());
    }
    return 0;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const BoundaryExhausted& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
