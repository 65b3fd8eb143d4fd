// lorenzlab: closed geodesics and lightlike foliations of Lorentzian tori.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "lorenzlab/config.hpp"
#include "lorenzlab/serialize.hpp"

namespace fs = std::filesystem;
using namespace lorenzlab;

namespace {

enum Exit { kPass = 0, kChecksFailed = 1, kUsage = 2, kRejected = 3 };

struct Invocation {
  std::string verb;
  fs::path config;
  fs::path out;
  int workers = 0;
  unsigned long long seed = 0;
  std::string cls;
  std::string sign;
  bool timings = false;
};

int default_workers() {
  if (const char* env = std::getenv("LORENZLAB_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return int(std::max(1u, std::thread::hardware_concurrency()));
}

void emit(const Invocation& inv, const std::string& stem, const Json& j) {
  if (inv.out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  fs::create_directories(inv.out);
  std::ofstream(inv.out / (stem + ".json")) << j.dump(2) << '\n';
}

template <class Write>
void emit_csv(const Invocation& inv, const std::string& stem, Write write) {
  if (inv.out.empty()) return;
  std::ofstream f(inv.out / (stem + ".csv"));
  write(f);
}

AtlasOptions atlas_options(int workers) {
  AtlasOptions o;
  o.rotation.workers = workers;
  o.census.workers = workers;
  return o;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run(const Invocation& inv) {
  const RunConfig cfg = load_config(inv.config);
  const SurfaceModel model(cfg.model);
  const int workers = inv.workers > 0 ? inv.workers : default_workers();

  if (inv.verb == "analyze") {
    const ClassVerdict v = class_AB(model, atlas_options(workers));
    Json j;
    j["schema"] = kSchemaVersion;
    j["model"] = model.name();
    j["rotation_numbers"] = {{"(1,0)", rotation_number(model, {1, 0})},
                             {"(0,1)", rotation_number(model, {0, 1})}};
    j["k_g"] = compute_kg(model);
    j["class"] = to_string(v.verdict);
    j["margin"] = v.margin;
    RotationOptions ro;
    ro.workers = workers;
    j["m_plus"] = to_json(rotation_class(model, 1, ro));
    j["m_minus"] = to_json(rotation_class(model, -1, ro));
    emit(inv, "analyze", j);
    return kPass;
  }
  if (inv.verb == "leaves") {
    const FoliationAtlas atlas = build_atlas(model, atlas_options(workers));
    Json j = to_json(atlas);
    j["model"] = model.name();
    emit(inv, "leaves", j);
    emit_csv(inv, "leaves", [&](std::ostream& f) { write_leaf_csv(f, atlas.leaves); });
    std::cerr << atlas.leaves.size() << " closed leaves\n";
    return kPass;
  }
  if (inv.verb == "geodesics") {
    const FoliationAtlas atlas = build_atlas(model, atlas_options(workers));
    const SurveyResult s = survey(model, atlas, survey_options(cfg, workers, inv.seed));
    Json j = to_json(s);
    j["model"] = model.name();
    emit(inv, "geodesics", j);
    emit_csv(inv, "geodesics", [&](std::ostream& f) { write_trace_csv(f, model, s.records); });
    std::cerr << s.records.size() << " closed geodesics\n";
    return kPass;
  }
  if (inv.verb == "maximize") {
    Class2 h = cfg.search.homology;
    CausalSign sign = cfg.search.sign;
    if (!inv.cls.empty()) {
      const RunConfig over = parse_config("[model]\nfamily = flat\n[search]\nhomology = " + inv.cls + "\n");
      h = over.search.homology;
    }
    if (inv.sign == "nontimelike") sign = CausalSign::nontimelike;
    if (inv.sign == "nonspacelike") sign = CausalSign::nonspacelike;
    MaximizeOptions mo;
    mo.vertices = cfg.search.vertices;
    const MaximizeResult r = maximize_length(model, h, sign, mo);
    Json j = to_json(r);
    j["model"] = model.name();
    emit(inv, "maximize", j);
    if (r.certified)
      emit_csv(inv, "maximize", [&](std::ostream& f) { write_trace_csv(f, model, {*r.certified}); });
    std::cerr << "length " << r.length << ", " << r.certification << '\n';
    return r.certified ? kPass : kChecksFailed;
  }
  // report
  auto t0 = std::chrono::steady_clock::now();
  const FoliationAtlas atlas = build_atlas(model, atlas_options(workers));
  const double t_atlas = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  const SurveyResult s = survey(model, atlas, survey_options(cfg, workers, inv.seed));
  const double t_survey = seconds_since(t0);
  SurfaceReport rep = build_report(model, atlas, s);
  rep.timings = {{"atlas", t_atlas}, {"survey", t_survey}};
  emit(inv, "report", to_json(rep, inv.timings));
  emit_csv(inv, "report", [&](std::ostream& f) { write_trace_csv(f, model, s.records); });
  for (const auto& c : rep.checks)
    std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << " (" << c.found << " vs " << c.required << ")\n";
  return rep.pass() ? kPass : kChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed geodesics and lightlike foliations of Lorentzian tori and Klein bottles"};
  app.require_subcommand(1, 1);
  Invocation inv;
  app.add_option("--config", inv.config, "Run configuration (INI)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", inv.out, "Output directory; JSON goes to stdout when omitted");
  app.add_option("--workers", inv.workers, "Worker threads (default: LORENZLAB_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", inv.seed, "RNG seed for seed-grid jitter; 0 keeps the centered grid");
  app.add_subcommand("analyze", "Rotation classes, rotation numbers, k_g and the class A/B verdict");
  app.add_subcommand("leaves", "Closed-leaf census with scaling factors");
  app.add_subcommand("geodesics", "Survey of closed geodesics");
  auto* maximize = app.add_subcommand("maximize", "Causal arclength maximizer in one class");
  maximize->add_option("--class", inv.cls, "Homology class 'a,b'");
  maximize->add_option("--sign", inv.sign, "nonspacelike or nontimelike")
      ->check(CLI::IsMember({"nonspacelike", "nontimelike"}));
  auto* report = app.add_subcommand("report", "Full surface report; exit 0 iff every check passes");
  report->add_flag("--timings", inv.timings, "Include wall-clock timings in the JSON");
  app.fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }
  inv.verb = app.get_subcommands().front()->get_name();

  try {
    return run(inv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << inv.config.string() << ":" << e.what() << '\n';
    return kUsage;
  } catch (const ModelRejected& e) {
    std::cerr << "model rejected: " << e.what() << '\n';
    const auto& pts = e.points();
    for (std::size_t i = 0; i < std::min<std::size_t>(pts.size(), 8); ++i)
      std::cerr << "  at (" << pts[i].x << ", " << pts[i].y << ")\n";
    if (pts.size() > 8) std::cerr << "  ... " << pts.size() << " sample points in total\n";
    return kRejected;
  } catch (const ModelError& e) {
    std::cerr << "model rejected: " << e.what() << '\n';
    return kRejected;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kChecksFailed;
  }
}
