#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bornsob/bounds.hpp"
#include "bornsob/invert.hpp"
#include "bornsob/io.hpp"
#include "bornsob/series.hpp"

namespace fs = std::filesystem;
using namespace bornsob;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 2, kNumeric = 3, kPrecondition = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// "lo:hi", "lo:hi:step" (inclusive) or "v1,v2,...".
std::vector<double> parse_range(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(parse_number(tok));
    if (parts.size() < 2 || parts.size() > 3) throw UsageError("range must be lo:hi or lo:hi:step");
    const double lo = parts[0], hi = parts[1], step = parts.size() == 3 ? parts[2] : 1.0;
    if (!(step > 0.0)) throw UsageError("range step must be positive");
    for (long i = 0;; ++i) {
      const double v = lo + double(i) * step;
      if (v > hi + 1e-9 * step) break;
      out.push_back(v);
    }
  } else {
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(parse_number(tok));
  }
  if (out.empty()) throw UsageError("empty range '" + text + "'");
  return out;
}

/// Replaces flags named in the --config file by the file's values.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;
  std::map<std::string, std::string> kv;
  try {
    kv = read_key_values(path);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const std::string& t = rest[i];
    if (t.rfind("--", 0) == 0) {
      const auto eq = t.find('=');
      const std::string key = t.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
      if (kv.count(key)) {
        if (eq == std::string::npos && i + 1 < rest.size() && rest[i + 1].rfind("--", 0) != 0) ++i;
        continue;
      }
    }
    out.push_back(t);
  }
  for (const auto& [k, v] : kv) out.push_back("--" + k + "=" + v);
  return out;
}

json resolved_options(const CLI::App* sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help") continue;
    cfg[name] = opt->count() ? opt->as<std::string>() : opt->get_default_str();
  }
  return cfg;
}

struct Manifest {
  json doc;
  fs::path out;
  std::string stem;
  std::vector<std::string> outputs;

  fs::path file(const std::string& suffix) {
    outputs.push_back(stem + suffix);
    return out / outputs.back();
  }
  void write(int exit_code, const std::string& status, double seconds) {
    doc["outputs"] = outputs;
    doc["exit_code"] = exit_code;
    doc["status"] = status;
    doc["wall_clock_seconds"] = seconds;
    write_text(out / (stem + ".manifest.json"), doc.dump(2) + "\n");
  }
};

struct BoundsArgs {
  std::string kind = "helmholtz", sweep_axis = "ball", range = "1:11", geometry = "offset";
  int aparam = 0;
  double bdata = 0.0, k = 1.0, ball = 1.0, Q = 0.5, Q2 = 0.5;
};

int cmd_bounds(const BoundsArgs& a, Manifest& m) {
  const WaveKind kind = parse_wave_kind(a.kind);
  const SweepAxis axis = parse_sweep_axis(a.sweep_axis);
  const std::vector<double> values = parse_range(a.range);
  if (a.aparam < 0) throw UsageError("--aparam must be nonnegative for bounds");
  ScatteringConfig base = ScatteringConfig::offset_geometry(kind, a.k);
  if (a.geometry == "centered") {
    base.ball_center = {0.0, 0.0, 0.0};
  } else if (a.geometry != "offset") {
    throw UsageError("--geometry must be offset or centered");
  }
  base.ball_radius = a.ball;
  base.sobolev = {a.aparam, a.bdata};
  BoundsOptions opt;
  opt.Q = a.Q;
  opt.Q2 = a.Q2;
  const auto rows = sweep(axis, values, base, opt);

  CsvTable t;
  int lmax = 0;
  for (const auto& r : rows) lmax = std::max(lmax, r.report.lmax);
  t.meta = {{"command", "bounds"},
            {"kind", to_string(kind)},
            {"sweep", to_string(axis)},
            {"k", format_number(a.k)},
            {"a_param", std::to_string(a.aparam)},
            {"b_data", format_number(a.bdata)},
            {"geometry", a.geometry},
            {"outer_radius", format_number(base.outer_radius)},
            {"ball_center_x", format_number(base.ball_center[0])},
            {"ball_radius", format_number(a.ball)},
            {"Q", format_number(a.Q)},
            {"Q2", format_number(a.Q2)},
            {"lmax_policy", "start 2ceil(kR)+16, double until rel change < 1e-4, cap 32768"},
            {"sample_policy", "centre + 6 poles at a(1-1e-6) + 26 shell points at a/2 + nearest point"},
            {"lmax_max", std::to_string(lmax)}};
  t.columns = {"axis_value", "kind", "a_param", "b_data", "mu", "nu", "r_classic", "r_geometric", "C", "C_star", "C_tilde",
               "C_ab", "valid_flags", "r_forward", "C1", "C_tilde_ab", "R_ratio", "Lmax"};
  bool flagged = false;
  for (const auto& r : rows) {
    const auto& p = r.report;
    for (const auto& f : p.flags)
      if (f.find("_range") != std::string::npos) flagged = true;
    t.add_row({format_number(r.axis_value), to_string(kind), std::to_string(r.cfg.sobolev.a_param),
               format_number(r.cfg.sobolev.b_data), format_number(p.mu), format_number(p.nu), format_number(p.r_classic),
               format_number(p.r_geometric), format_number(p.C), format_number(p.C_star), format_number(p.C_tilde),
               format_number(p.C_ab), p.flag_string(), format_number(p.r_forward), format_number(p.C1),
               format_number(p.C_tilde_ab), format_number(p.R_ratio), std::to_string(p.lmax)});
  }
  write_csv(m.file(".csv"), t);
  return flagged ? kPrecondition : kOk;
}

struct SeriesArgs {
  std::string kind = "helmholtz";
  int dim = 1, nodes = 16, receivers = 4, sources = 4, aparam = 0, N = 5, ceiling = 6, forward_terms = 30;
  double k = 1.0, ball = 1.0, bdata = 0.0, contrast = 0.3, lambda = -1.0, Q = 0.5;
};

int cmd_series(const SeriesArgs& a, Manifest& m) {
  if (a.N < 1) throw UsageError("--N must be at least 1");
  if (a.N > a.ceiling) throw BudgetError("--N " + std::to_string(a.N) + " exceeds the series ceiling " + std::to_string(a.ceiling));
  if (a.aparam < 0) throw UsageError("--aparam must be nonnegative for series");
  if (a.nodes < 1 || a.forward_terms < 2) throw UsageError("--nodes and --forward-terms must be positive");
  const WaveParams wave{a.k, parse_wave_kind(a.kind), a.dim};
  DiscretizedScene scene;
  if (a.dim == 1) {
    scene = make_scene_1d(wave, a.ball, std::size_t(a.nodes));
  } else if (a.dim == 2) {
    scene = make_scene_2d(wave, a.ball, std::size_t(a.nodes), std::size_t(a.receivers), std::size_t(a.sources));
  } else {
    throw UsageError("--dim must be 1 or 2");
  }
  const SceneNorms norms = build_norms(scene, {a.aparam, a.bdata});
  const DiscreteConstants dc = discrete_constants(scene, norms);
  Eigen::VectorXcd eta(Eigen::Index(scene.n_nodes()));
  for (std::size_t i = 0; i < scene.n_nodes(); ++i) {
    const double r = norm3(scene.nodes[i]) / a.ball;
    eta(Eigen::Index(i)) = std::exp(-4.0 * r * r);
  }
  eta *= a.contrast / ((dc.mu + dc.nu) * norms.model(eta));

  const ScatterData direct = solve_direct(eta, scene);
  CsvTable fwd;
  fwd.columns = {"N", "rel_error"};
  std::vector<double> ferr;
  for (int n = 1; n <= a.forward_terms; ++n) {
    ferr.push_back((forward_born(eta, scene, n) - direct).norm() / direct.norm());
    fwd.add_row({std::to_string(n), format_number(ferr.back())});
  }
  const bool forward_converges = ferr.back() < ferr[std::size_t(a.forward_terms / 2 - 1)];
  fwd.meta = {{"mu_hat_eta", format_number(dc.mu * norms.model(eta))},
              {"forward_converges", forward_converges ? "true" : "false"}};

  InverseBoundsOptions io;
  io.lambda = a.lambda;
  io.Q = a.Q;
  const InverseBoundsReport rep = check_inverse_bounds(scene, norms, eta, a.N, io);

  CsvTable checks;
  checks.meta = {{"command", "series"},
                 {"dim", std::to_string(a.dim)},
                 {"nodes", std::to_string(scene.n_nodes())},
                 {"kind", to_string(wave.kind)},
                 {"k", format_number(a.k)},
                 {"a_param", std::to_string(a.aparam)},
                 {"b_data", format_number(a.bdata)},
                 {"contrast", format_number(a.contrast)},
                 {"P", format_number(rep.constants.P)},
                 {"mu_hat", format_number(rep.constants.mu)},
                 {"nu_hat", format_number(rep.constants.nu)},
                 {"lambda", format_number(rep.lambda)},
                 {"k1_inv_norm", format_number(rep.k1_inv_norm)},
                 {"C", format_number(rep.C)},
                 {"C_star", format_number(rep.C_star)},
                 {"C_ab", format_number(rep.C_ab)},
                 {"series_ratio", format_number(rep.series_ratio)},
                 {"forward_converges", forward_converges ? "true" : "false"}};
  checks.columns = {"check", "order", "measured", "bound", "applicable", "holds"};
  bool violated = false, inapplicable = !forward_converges;
  for (const auto& c : rep.checks) {
    checks.add_row({c.name, std::to_string(c.order), format_number(c.measured), format_number(c.bound),
                    c.applicable ? "true" : "false", c.applicable ? (c.holds() ? "true" : "false") : "n/a"});
    if (!c.applicable) inapplicable = true;
    if (!c.holds()) violated = true;
  }
  CsvTable terms;
  terms.columns = {"order", "recovery_error", "true_error"};
  for (std::size_t n = 0; n < rep.recovery_error.size(); ++n)
    terms.add_row({std::to_string(n + 1), format_number(rep.recovery_error[n]), format_number(rep.true_error[n])});

  write_csv(m.file("_checks.csv"), checks);
  write_csv(m.file("_terms.csv"), terms);
  write_csv(m.file("_forward.csv"), fwd);
  if (violated) return kNumeric;
  return inapplicable ? kPrecondition : kOk;
}

struct InvertArgs {
  std::string setting = "one", grid = "desk";
  int aparam = 0, iters = 100;
  double bdata = 0.0, noise = 0.0, contrast = 0.1;
  std::uint64_t seed = 7;
};

int cmd_invert(const InvertArgs& a, Manifest& m) {
  double dx = 0.02;
  if (a.grid == "fine") {
    dx = 0.005;
  } else if (a.grid != "desk") {
    dx = parse_number(a.grid);
  }
  const int which = parse_scatterer_kind(a.setting) == ScattererKind::RoughDisc ? 1 : 2;
  InversionConfig cfg = InversionConfig::setting(which, {a.aparam, a.bdata}, a.noise, dx);
  cfg.truth.amplitude = a.contrast;
  cfg.seed = a.seed;
  cfg.iterations = a.iters;
  const InversionTrace tr = run_inversion(cfg);

  CsvTable t;
  t.meta = {{"command", "invert"},
            {"setting", std::to_string(which)},
            {"scatterer", to_string(cfg.truth.kind)},
            {"a_param", std::to_string(a.aparam)},
            {"b_data", format_number(a.bdata)},
            {"noise", format_number(a.noise)},
            {"seed", std::to_string(a.seed)},
            {"dx", format_number(dx)},
            {"k", format_number(cfg.setup.k())},
            {"contrast", format_number(a.contrast)},
            {"line_search_failed", tr.line_search_failed ? "true" : "false"}};
  t.columns = {"iter", "J", "model_error", "grad_norm"};
  for (const auto& r : tr.rows)
    t.add_row({std::to_string(r.iter), format_number(r.J), format_number(r.model_error), format_number(r.grad_norm)});
  write_csv(m.file("_trace.csv"), t);
  write_csv(m.file("_data.csv"), data_table(tr.observed));
  write_field(m.file("_model.bin"), tr.estimate, {{"iterations", tr.rows.back().iter}});
  write_field(m.file("_truth.bin"), tr.truth, {{"scatterer", to_string(cfg.truth.kind)}});
  m.doc["final_model_error"] = tr.final_error();
  if (tr.line_search_failed) {
    m.doc["partial"] = true;
    return kNumeric;
  }
  return kOk;
}

int run(std::vector<std::string> args);

int cmd_rerun(const std::string& manifest_path, const std::string& out_override) {
  json doc;
  try {
    doc = json::parse(read_text(manifest_path));
  } catch (const std::exception& e) {
    throw UsageError(std::string("cannot read manifest: ") + e.what());
  }
  if (!doc.contains("argv")) throw UsageError("manifest has no argv");
  std::vector<std::string> args = doc["argv"].get<std::vector<std::string>>();
  const std::string out = out_override.empty() ? fs::path(manifest_path).parent_path().string() : out_override;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    kept.push_back(args[i]);
  }
  kept.push_back("--out=" + (out.empty() ? std::string(".") : out));
  return run(kept);
}

int run(std::vector<std::string> args) {
  const auto t0 = std::chrono::steady_clock::now();
  CLI::App app{"Sobolev-norm bounds, scattering series and inversion experiments", "born-sobolev"};
  app.require_subcommand(1);
  std::string out = ".";

  BoundsArgs ba;
  auto* bounds = app.add_subcommand("bounds", "Convergence radii and stability constants over a sweep");
  bounds->add_option("--kind", ba.kind, "helmholtz or diffuse")->capture_default_str();
  bounds->add_option("--sweep", ba.sweep_axis, "a, ball or b")->capture_default_str();
  bounds->add_option("--range", ba.range, "lo:hi[:step] or a comma list")->capture_default_str();
  bounds->add_option("--aparam", ba.aparam, "model-space order a")->capture_default_str();
  bounds->add_option("--bdata", ba.bdata, "data-space order b")->capture_default_str();
  bounds->add_option("--k", ba.k, "wavenumber")->capture_default_str();
  bounds->add_option("--ball", ba.ball, "scatterer ball radius")->capture_default_str();
  bounds->add_option("--geometry", ba.geometry, "offset (ball near the sphere) or centered")->capture_default_str();
  bounds->add_option("--Q", ba.Q, "assumed ||calK_1|| (mu + nu)")->capture_default_str();
  bounds->add_option("--Q2", ba.Q2, "assumed script M (mu + nu)")->capture_default_str();
  bounds->add_option("--out", out, "output directory")->capture_default_str();

  SeriesArgs sa;
  auto* series = app.add_subcommand("series", "Forward and inverse series bound checks on a small scene");
  series->add_option("--kind", sa.kind)->capture_default_str();
  series->add_option("--dim", sa.dim, "1 or 2")->capture_default_str();
  series->add_option("--nodes", sa.nodes, "nodes (1D) or nodes per side (2D)")->capture_default_str();
  series->add_option("--receivers", sa.receivers, "2D receivers")->capture_default_str();
  series->add_option("--sources", sa.sources, "2D sources")->capture_default_str();
  series->add_option("--k", sa.k)->capture_default_str();
  series->add_option("--ball", sa.ball)->capture_default_str();
  series->add_option("--aparam", sa.aparam)->capture_default_str();
  series->add_option("--bdata", sa.bdata)->capture_default_str();
  series->add_option("--contrast", sa.contrast, "(mu + nu) ||eta||_a of the test contrast")->capture_default_str();
  series->add_option("--lambda", sa.lambda, "damping; negative selects it from --Q")->capture_default_str();
  series->add_option("--Q", sa.Q)->capture_default_str();
  series->add_option("--N", sa.N, "inverse series order")->capture_default_str();
  series->add_option("--ceiling", sa.ceiling, "largest allowed --N")->capture_default_str();
  series->add_option("--forward-terms", sa.forward_terms)->capture_default_str();
  series->add_option("--out", out)->capture_default_str();

  InvertArgs ia;
  auto* invert = app.add_subcommand("invert", "L-BFGS inversion of the 2D Helmholtz experiment");
  invert->add_option("--setting", ia.setting, "one (rough disc) or two (smooth disc)")->capture_default_str();
  invert->add_option("--aparam", ia.aparam)->capture_default_str();
  invert->add_option("--bdata", ia.bdata)->capture_default_str();
  invert->add_option("--noise", ia.noise, "relative data noise")->capture_default_str();
  invert->add_option("--seed", ia.seed)->capture_default_str();
  invert->add_option("--iters", ia.iters)->capture_default_str();
  invert->add_option("--grid", ia.grid, "desk (dx 0.02), fine (dx 0.005) or a spacing")->capture_default_str();
  invert->add_option("--contrast", ia.contrast, "scatterer amplitude")->capture_default_str();
  invert->add_option("--out", out)->capture_default_str();

  std::string manifest_path, rerun_out;
  auto* rerun = app.add_subcommand("rerun", "Repeat a run from its manifest");
  rerun->add_option("manifest", manifest_path)->required();
  rerun->add_option("--out", rerun_out, "output directory (default: the manifest's)");

  args = merge_config(args);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (rerun->parsed()) return cmd_rerun(manifest_path, rerun_out);

  Manifest m;
  m.out = out;
  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "bounds") {
    m.stem = "bounds_" + ba.kind + "_" + ba.sweep_axis + "_a" + std::to_string(ba.aparam) + "_b" + compact(ba.bdata);
  } else if (name == "series") {
    m.stem = "series_d" + std::to_string(sa.dim) + "_n" + std::to_string(sa.nodes) + "_a" + std::to_string(sa.aparam) +
             "_b" + compact(sa.bdata) + "_c" + compact(sa.contrast);
  } else {
    m.stem = "invert_" + ia.setting + "_a" + std::to_string(ia.aparam) + "_b" + compact(ia.bdata) + "_n" +
             compact(ia.noise) + "_s" + std::to_string(ia.seed);
  }
  m.doc["command"] = name;
  m.doc["argv"] = args;
  m.doc["config"] = resolved_options(sub);
  m.doc["seed"] = name == "invert" ? json(ia.seed) : json(nullptr);
  m.doc["version"] = kVersion;
  m.doc["out_dir"] = out;

  int code = kOk;
  std::string status = "ok";
  if (name == "bounds") code = cmd_bounds(ba, m);
  if (name == "series") code = cmd_series(sa, m);
  if (name == "invert") code = cmd_invert(ia, m);
  if (code == kPrecondition) status = "preconditions_flagged";
  if (code == kNumeric) status = "numeric_failure";
  m.write(code, status, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  }
}
