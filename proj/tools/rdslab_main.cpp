// rdslab: command-line laboratory for random torus dynamics.
// JSON-configured; every run writes its outputs plus a manifest with FNV-1a
// checksums into --out. Exit codes: 0 success, 1 negative verdict, 2 config
// error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdslab/admissible.hpp"
#include "rdslab/cocycle.hpp"
#include "rdslab/curves.hpp"
#include "rdslab/dynamics.hpp"
#include "rdslab/lab.hpp"
#include "rdslab/rng.hpp"
#include "rdslab/seminorm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rdslab;

namespace {

struct RunContext {
  json cfg;
  std::string out_dir;
  std::vector<std::pair<std::string, uint64_t>> outputs;  // path, checksum

  void write_text(const std::string& name, const std::string& body) {
    fs::create_directories(out_dir);
    fs::path target = fs::path(out_dir) / name;
    fs::path tmp = target;
    tmp += ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open " + tmp.string());
      f << body;
    }
    fs::rename(tmp, target);
    outputs.emplace_back(name, fnv1a64(body));
  }

  void note_file(const std::string& name) {
    std::ifstream f(fs::path(out_dir) / name, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    outputs.emplace_back(name, fnv1a64(ss.str()));
  }

  void finish(const std::string& command, const json& report) {
    json manifest;
    manifest["format"] = "rdslab-manifest v1";
    manifest["command"] = command;
    manifest["config"] = cfg;
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx",
                  (unsigned long long)fnv1a64(cfg.dump()));
    manifest["config_checksum"] = hex;
    json outs = json::array();
    for (auto& [name, sum] : outputs) {
      std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)sum);
      outs.push_back({{"path", name}, {"fnv1a64", hex}});
    }
    manifest["outputs"] = outs;
    manifest["report"] = report;
    fs::create_directories(out_dir);
    fs::path target = fs::path(out_dir) / "manifest.json";
    fs::path tmp = target;
    tmp += ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary);
      f << manifest.dump(2) << "\n";
    }
    fs::rename(tmp, target);
    std::cout << report.dump(2) << "\n";
  }
};

json* dig(json& root, const std::string& dotted, bool create) {
  json* cur = &root;
  size_t pos = 0;
  while (true) {
    size_t dot = dotted.find('.', pos);
    std::string key = dotted.substr(pos, dot - pos);
    if (dot == std::string::npos) {
      if (!create && !cur->contains(key)) return nullptr;
      return &(*cur)[key];
    }
    if (!create && !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    pos = dot + 1;
  }
}

void apply_override(json& cfg, const std::string& kv) {
  size_t eq = kv.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must be key.path=value: " + kv);
  std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
  json parsed;
  try {
    parsed = json::parse(val);
  } catch (...) {
    parsed = val;  // plain string
  }
  *dig(cfg, key, true) = parsed;
}

template <typename T>
T get_or(const json& j, const std::string& dotted, T def) {
  const json* cur = &j;
  size_t pos = 0;
  while (true) {
    size_t dot = dotted.find('.', pos);
    std::string key = dotted.substr(pos, dot - pos);
    if (!cur->contains(key)) return def;
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return cur->get<T>();
}

DrivingMeasure build_system(const json& cfg) {
  std::string kind = get_or<std::string>(cfg, "system.kind", "ab");
  if (kind == "ab") return make_ab_system(get_or<double>(cfg, "system.pert", 0.0));
  if (kind == "custom") {
    std::vector<Diffeo> atoms;
    std::vector<double> probs;
    for (const auto& a : cfg.at("system").at("atoms")) {
      auto lin = a.at("linear");
      std::vector<FourierMode> modes;
      if (a.contains("modes")) {
        for (const auto& m : a["modes"]) {
          modes.push_back({m.at("k")[0].get<int>(), m.at("k")[1].get<int>(),
                           Vec2{m.at("a")[0].get<double>(), m.at("a")[1].get<double>()},
                           m.value("phi", 0.0)});
        }
      }
      atoms.emplace_back(Mat2{lin[0].get<double>(), lin[1].get<double>(),
                              lin[2].get<double>(), lin[3].get<double>()},
                         modes, a.value("name", "custom"));
      probs.push_back(a.at("prob").get<double>());
    }
    return DrivingMeasure(std::move(atoms), std::move(probs));
  }
  throw std::invalid_argument("unknown system.kind: " + kind);
}

Constants build_constants(const json& cfg) {
  Constants c;
  auto rd = [&](const char* name, double& field) {
    field = get_or<double>(cfg, std::string("constants.") + name, field);
  };
  rd("C0p", c.C0p);
  rd("C0", c.C0);
  rd("eps0", c.eps0);
  rd("C1", c.C1);
  c.N = get_or<int>(cfg, "constants.N", c.N);
  rd("delta", c.delta);
  rd("chibar", c.chibar);
  rd("eta", c.eta);
  c.p0 = get_or<int>(cfg, "constants.p0", c.p0);
  rd("c", c.c);
  rd("c_retention", c.c_retention);
  rd("C3", c.C3);
  rd("K_seed", c.K_seed);
  rd("L_seed", c.L_seed);
  return c;
}

Curve build_curve(const json& cfg, const std::string& key) {
  json spec = cfg.contains(key) ? cfg[key] : json{{"kind", "circle"}};
  std::string kind = spec.value("kind", "circle");
  double h = spec.value("h_max", 1e-3);
  if (kind == "circle") {
    double r = spec.value("radius", 0.2);
    auto c = spec.value("center", std::vector<double>{0.5, 0.5});
    return make_circle(Vec2{c[0], c[1]}, r, h);
  }
  if (kind == "segment") {
    auto a = spec.value("a", std::vector<double>{0.1, 0.1});
    auto b = spec.value("b", std::vector<double>{0.4, 0.3});
    return make_segment(Vec2{a[0], a[1]}, Vec2{b[0], b[1]}, h);
  }
  throw std::invalid_argument("unknown curve kind: " + kind);
}

PointCloudMeasure build_measure(const json& cfg, uint64_t seed) {
  json spec = cfg.contains("measure") ? cfg["measure"] : json{{"kind", "lebesgue"}};
  std::string kind = spec.value("kind", "lebesgue");
  PointCloudMeasure m;
  if (kind == "lebesgue") {
    size_t n = spec.value("samples", size_t(1000000));
    Xoshiro256pp rng(derive_seed(seed, "lebesgue-cloud"));
    m.atoms.reserve(n);
    for (size_t i = 0; i < n; ++i)
      m.atoms.push_back({TorusPoint(rng.next_double(), rng.next_double()), 1.0 / n});
    return m;
  }
  if (kind == "dirac") {
    auto p = spec.value("p", std::vector<double>{0.5, 0.5});
    m.atoms.push_back({TorusPoint(p[0], p[1]), 1.0});
    return m;
  }
  if (kind == "circle") {
    size_t n = spec.value("samples", size_t(100000));
    double r = spec.value("radius", 0.2);
    auto c = spec.value("center", std::vector<double>{0.5, 0.5});
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (size_t i = 0; i < n; ++i) {
      double t = kTwoPi * (i + 0.5) / n;
      m.atoms.push_back(
          {wrap(Vec2{c[0] + r * std::cos(t), c[1] + r * std::sin(t)}), 1.0 / n});
    }
    return m;
  }
  throw std::invalid_argument("unknown measure kind: " + kind);
}

std::string csv_of_trace(const NormTrace& tr) {
  std::ostringstream os;
  os << "rho,norm\n";
  os.precision(17);
  for (size_t i = 0; i < tr.rho.size(); ++i)
    os << tr.rho[i] << "," << tr.norm[i] << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for random dynamics on the 2-torus"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "runs/last";
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--set", overrides, "dotted-path overrides, key.path=value");
  app.add_option("--out", out_dir, "output directory");

  std::vector<std::string> names = {
      "certify-uef", "certify-uep", "moments",  "angle-stats", "push-curve",
      "nct-et",      "seminorm",    "ac-diagnostic", "good-conv", "pipeline",
      "ly-trace",    "cesaro",      "equidistribute", "orbit",   "tails"};
  for (const auto& n : names) app.add_subcommand(n)->fallthrough();

  CLI11_PARSE(app, argc, argv);
  std::string cmd = app.get_subcommands().front()->get_name();

  try {
    RunContext ctx;
    ctx.cfg = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw std::invalid_argument("cannot read config " + config_path);
      f >> ctx.cfg;
    }
    for (const auto& kv : overrides) apply_override(ctx.cfg, kv);
    ctx.out_dir = out_dir;
    const json& cfg = ctx.cfg;
    uint64_t seed = get_or<uint64_t>(cfg, "seed", 1);
    DrivingMeasure mu = build_system(cfg);
    Constants cst = build_constants(cfg);
    json rep;
    int verdict = 0;

    if (cmd == "certify-uef" || cmd == "certify-uep") {
      size_t N = get_or<size_t>(cfg, "uef.N", 8);
      size_t nx = get_or<size_t>(cfg, "uef.nx", 16);
      size_t ny = get_or<size_t>(cfg, "uef.ny", 16);
      size_t nd = get_or<size_t>(cfg, "uef.ndir", 16);
      ExpansionReport r = cmd == "certify-uef" ? certify_uef(mu, N, nx, ny, nd)
                                               : certify_uep(mu, N, nx, ny, nd);
      rep = {{"N", N},
             {"pairs_checked", r.pairs_checked},
             {"worst", r.worst},
             {"worst_point", {r.worst_point.x, r.worst_point.y}},
             {"positive", r.positive}};
      verdict = r.positive ? 0 : 1;
    } else if (cmd == "moments") {
      auto r = moment_decay(mu, get_or<double>(cfg, "moments.delta", 0.1),
                            get_or<size_t>(cfg, "moments.n_max", 12),
                            get_or<size_t>(cfg, "moments.pairs", 64), seed,
                            get_or<size_t>(cfg, "moments.boot", 200));
      std::ostringstream csv;
      csv << "n,sup_moment\n";
      csv.precision(17);
      for (size_t i = 0; i < r.sup_moment.size(); ++i)
        csv << (i + 1) << "," << r.sup_moment[i] << "\n";
      ctx.write_text("moments.csv", csv.str());
      rep = {{"chi_hat", r.chi_hat},
             {"ci", {r.chi_hat_lo, r.chi_hat_hi}},
             {"positive", r.chi_hat_lo > 0.0}};
      verdict = r.chi_hat_lo > 0.0 ? 0 : 1;
    } else if (cmd == "angle-stats") {
      auto mode = get_or<std::string>(cfg, "angle.mode", "fixed") == "fixed"
                      ? AngleMode::kFixedDirection
                      : AngleMode::kPulledBack;
      auto r = angle_tail(mu, get_or<size_t>(cfg, "angle.n", 25),
                          get_or<size_t>(cfg, "angle.samples", 100000), mode, seed,
                          get_or<size_t>(cfg, "angle.boot", 200));
      std::ostringstream csv;
      csv << "threshold,tail_prob\n";
      csv.precision(17);
      for (size_t i = 0; i < r.thresholds.size(); ++i)
        csv << r.thresholds[i] << "," << r.tail_prob[i] << "\n";
      ctx.write_text("angle_tail.csv", csv.str());
      rep = {{"samples", r.samples},
             {"undefined", r.undefined},
             {"beta1_hat", r.beta1_hat},
             {"ci", {r.beta1_lo, r.beta1_hi}}};
      verdict = r.beta1_lo > 0.0 ? 0 : 1;
    } else if (cmd == "push-curve") {
      Curve c = build_curve(cfg, "curve");
      size_t n = get_or<size_t>(cfg, "push.n", 5);
      Xoshiro256pp rng(derive_seed(seed, "push-word"));
      Word w = mu.sample_word(n, rng);
      Curve out = push_curve(mu, w, c);
      std::ostringstream csv;
      csv << "x,y,tx,ty,curvature,log_density\n";
      csv.precision(17);
      for (size_t i = 0; i < out.size(); ++i) {
        TorusPoint p = out.point(i);
        const CurveNode& nd = out.node(i);
        csv << p.x << "," << p.y << "," << nd.tangent.x << "," << nd.tangent.y << ","
            << nd.curvature << "," << nd.log_density << "\n";
      }
      ctx.write_text("pushed_curve.csv", csv.str());
      rep = {{"nodes", out.size()},
             {"length", out.length()},
             {"max_abs_curvature", out.max_abs_curvature()},
             {"density_log_lipschitz", density_log_lipschitz(out)}};
    } else if (cmd == "nct-et") {
      Curve c = build_curve(cfg, "curve");
      size_t m = get_or<size_t>(cfg, "blocks.m", 4);
      Xoshiro256pp rng(derive_seed(seed, "block-word"));
      Word w = mu.sample_word(m * size_t(cst.p0), rng);
      auto r = block_tallies(mu, w, c, cst);
      rep = {{"nct_ok", r.nct_ok},
             {"et_ok", r.et_ok},
             {"nct_counts", r.nct_counts},
             {"et_counts", r.et_counts}};
      verdict = (r.nct_ok && r.et_ok) ? 0 : 1;
    } else if (cmd == "seminorm") {
      PointCloudMeasure m = build_measure(cfg, seed);
      double rho = get_or<double>(cfg, "norm.rho", 0.05);
      int refine = get_or<int>(cfg, "norm.refine", 4);
      double v = rho_norm(m, rho, refine);
      rep = {{"rho", rho}, {"norm", v}, {"mass", m.total_mass()}};
    } else if (cmd == "ac-diagnostic" || cmd == "ly-trace") {
      PointCloudMeasure m;
      if (cmd == "ly-trace") {
        auto p = get_or<std::vector<double>>(cfg, "trace.start",
                                             std::vector<double>{0.29, 0.41});
        auto ces = cesaro(mu, TorusPoint(p[0], p[1]),
                          get_or<size_t>(cfg, "trace.n", 512),
                          get_or<size_t>(cfg, "trace.orbits", 256), 64, 64, seed);
        m = std::move(ces.cloud);
      } else {
        m = build_measure(cfg, seed);
      }
      auto tr = rho_norm_trace(m, get_or<double>(cfg, "trace.rho0", 0.1),
                               get_or<int>(cfg, "trace.levels", 3),
                               get_or<int>(cfg, "trace.refine", 4));
      ctx.write_text("norm_trace.csv", csv_of_trace(tr));
      rep = {{"rho", tr.rho}, {"norm", tr.norm}, {"slope", tr.slope}};
    } else if (cmd == "good-conv") {
      Curve c = build_curve(cfg, "curve");
      auto ns = get_or<std::vector<size_t>>(cfg, "good.n",
                                            std::vector<size_t>{10, 15, 20, 25});
      json fr = json::array();
      for (size_t n : ns) {
        auto g = good_word_fraction(mu, c, n, cst, seed);
        fr.push_back({{"n", n}, {"fraction", g.fraction}, {"exact", g.exact}});
      }
      rep = {{"fractions", fr}};
    } else if (cmd == "pipeline") {
      Curve c = build_curve(cfg, "curve");
      PipelineOptions opt;
      opt.m = get_or<size_t>(cfg, "pipeline.m", 4);
      opt.d = get_or<size_t>(cfg, "pipeline.d", 0);
      opt.cut_scale = get_or<double>(cfg, "pipeline.cut_scale", 1.0);
      opt.cut_floor = get_or<double>(cfg, "pipeline.cut_floor", 0.0);
      opt.atom_cap = get_or<size_t>(cfg, "pipeline.atom_cap", 1024);
      opt.mass_floor = get_or<double>(cfg, "pipeline.mass_floor", opt.mass_floor);
      opt.cover = get_or<size_t>(cfg, "pipeline.cover", opt.cover);
      opt.seed = seed;
      auto checks = cst.validate();
      json gate = json::array();
      bool gates_ok = true;
      for (const auto& ch : checks) {
        gate.push_back({{"name", ch.name}, {"ok", ch.ok}, {"lhs", ch.lhs}, {"rhs", ch.rhs}});
        gates_ok = gates_ok && ch.ok;
      }
      if (!gates_ok && !get_or<bool>(cfg, "pipeline.force", false))
        std::cerr << "warning: parameter gates failed; pass pipeline.force=true to "
                     "run anyway\n";
      auto r = filtered_pipeline(mu, make_admissible(c), cst, opt);
      std::ostringstream csv;
      csv << "stage,kind,mass\n";
      csv.precision(17);
      for (const auto& row : r.ledger)
        csv << row.stage << "," << row.kind << "," << row.mass << "\n";
      ctx.write_text("ledger.csv", csv.str());
      double balance =
          r.retained_mass + r.discarded_mass + r.dropped_mass - r.initial_mass;
      rep = {{"initial", r.initial_mass},
             {"retained", r.retained_mass},
             {"discarded", r.discarded_mass},
             {"dropped", r.dropped_mass},
             {"balance_error", balance},
             {"stage_good_fraction", r.stage_good_fraction},
             {"gates", gate}};
      verdict = r.retained_mass >= (1.0 - cst.c_retention) * r.initial_mass ? 0 : 1;
    } else if (cmd == "cesaro" || cmd == "equidistribute") {
      auto p =
          get_or<std::vector<double>>(cfg, "cesaro.start", std::vector<double>{0.29, 0.41});
      size_t nx = get_or<size_t>(cfg, "cesaro.nx", 64);
      size_t ny = get_or<size_t>(cfg, "cesaro.ny", 64);
      auto r = cesaro(mu, TorusPoint(p[0], p[1]), get_or<size_t>(cfg, "cesaro.n", 1024),
                      get_or<size_t>(cfg, "cesaro.orbits", 64), nx, ny, seed);
      write_rdsgrid((fs::path(out_dir) / "cesaro.rdsgrid").string(), r.grid);
      ctx.note_file("cesaro.rdsgrid");
      std::ostringstream csv;
      csv << "n,tv_to_lebesgue\n";
      csv.precision(17);
      for (size_t i = 0; i < r.tv_checkpoints_n.size(); ++i)
        csv << r.tv_checkpoints_n[i] << "," << r.tv_to_lebesgue[i] << "\n";
      ctx.write_text("tv_curve.csv", csv.str());
      double final_tv = r.tv_to_lebesgue.back();
      double resid = stationary_residual(mu, r.cloud, nx, ny);
      rep = {{"final_tv", final_tv}, {"stationary_residual", resid}};
      if (cmd == "equidistribute")
        verdict = final_tv < get_or<double>(cfg, "cesaro.tv_target", 0.2) ? 0 : 1;
    } else if (cmd == "orbit") {
      auto p =
          get_or<std::vector<double>>(cfg, "orbit.p", std::vector<double>{0.0, 0.0});
      OrbitOptions opt;
      opt.depth = get_or<size_t>(cfg, "orbit.depth", 20);
      opt.eps = get_or<double>(cfg, "orbit.eps", 0.05);
      auto r = orbit_classify(mu, TorusPoint(p[0], p[1]), opt);
      rep = {{"kind", r.kind == OrbitKind::kFinite
                          ? "finite"
                          : (r.kind == OrbitKind::kDense ? "dense" : "undetermined")},
             {"orbit_size", r.orbit_size},
             {"exact", r.exact},
             {"covering_radius", r.covering_radius}};
    } else if (cmd == "tails") {
      auto ns = get_or<std::vector<size_t>>(cfg, "tails.n", std::vector<size_t>{});
      if (ns.empty())
        for (size_t n = 5; n <= 60; ++n) ns.push_back(n);
      auto etas = get_or<std::vector<double>>(cfg, "tails.eta",
                                              std::vector<double>{0.05, 0.1, 0.2, 0.3});
      double a = get_or<double>(cfg, "tails.a", 1.0);
      size_t violations = 0, checks = 0;
      for (size_t n : ns)
        for (double e : etas) {
          auto tc = binom_tail_check(n, e, a);
          checks += 2;
          if (!tc.head_ok) ++violations;
          if (!tc.weighted_ok) ++violations;
        }
      rep = {{"checks", checks}, {"violations", violations}};
      verdict = violations == 0 ? 0 : 1;
    }

    rep["verdict"] = verdict == 0 ? "ok" : "negative";
    ctx.finish(cmd, rep);
    return verdict;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
