#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "lorenzlab/config.hpp"
#include "lorenzlab/serialize.hpp"
#include "support.hpp"

using namespace lorenzlab;

namespace {

ConfigError config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("no ConfigError for: " << text);
  return ConfigError("", 0, 0);
}

}  // namespace

TEST_CASE("config: full file") {
  const RunConfig c = parse_config(R"ini(# comment
[model]
family = custom   ; trailing comment
topology = torus
E = "sin(4*pi*x)"
F = "cos(4*pi*x)"
G = "-sin(4*pi*x)"

[tolerances]
ode_tol = 1e-11
dedup_tol = 2e-4

[search]
intercepts = 8
classes = (0,1) (2,-1)
homology = 1,1
sign = nontimelike
)ini");
  CHECK(c.model.family == Family::custom);
  CHECK(c.model.expr_E == "sin(4*pi*x)");
  CHECK(c.tolerances.ode == 1e-11);
  CHECK(c.tolerances.newton == 1e-9);
  CHECK(c.tolerances.dedup == 2e-4);
  CHECK(c.search.intercepts == 8);
  REQUIRE(c.search.classes.size() == 2);
  CHECK(c.search.classes[1] == Class2{2, -1});
  CHECK(c.search.homology == Class2{1, 1});
  CHECK(c.search.sign == CausalSign::nontimelike);
  const SurveyOptions o = survey_options(c, 3, 42);
  CHECK(o.workers == 3);
  CHECK(o.jitter_seed == 42);
  CHECK(o.shoot.ode_tol == 1e-11);
}

TEST_CASE("config: builtin families") {
  CHECK(SurfaceModel(parse_config("[model]\nfamily = strip\nk = 3\n").model).name() == "strip_k(3)");
  CHECK(SurfaceModel(parse_config("[model]\nfamily = galloway\neps = 0.1\n").model).name() == "galloway_eps(0.1)");
  CHECK(parse_config("[model]\nfamily = klein_galloway\n").model.topology == Topology::klein);
  const RunConfig f = parse_config("[model]\nfamily = flat\nE = 0\nF = 0.5\nG = 0\nnegate = true\n");
  CHECK(f.model.F == 0.5);
  CHECK(f.model.negate);
}

TEST_CASE("config: errors carry line and column") {
  auto e = config_error("[model]\nfamily = strip\nk = two\n");
  CHECK(e.line() == 3);
  CHECK(e.column() == 5);
  e = config_error("[model]\nfamily = strip\n  bogus = 1\n");
  CHECK(e.line() == 3);
  CHECK(e.column() == 3);
  e = config_error("[model]\nfamily = custom\nE = \"sin(4*pi*x\"\nF = \"0\"\nG = \"-1\"\n");
  CHECK(e.line() == 3);
  CHECK(e.column() == 16);
  e = config_error("[model]\nfamily = flat\n[tolerances]\node_tol = -1\n");
  CHECK(e.line() == 4);
  e = config_error("[model]\nfamily = flat\nE = \"1\n");
  CHECK(e.line() == 3);
  e = config_error("[modle]\n");
  CHECK(e.line() == 1);
  e = config_error("family = flat\n");
  CHECK(e.line() == 1);
  e = config_error("[search]\nintercepts = 4\n");
  CHECK(std::string(e.what()).find("[model]") != std::string::npos);
  e = config_error("[model]\nfamily = flat\n[search]\nclasses = (0,0)\n");
  CHECK(e.line() == 4);
}

TEST_CASE("serialization is deterministic and versioned") {
  const auto m = SurfaceModel::klein_galloway();
  const auto& atlas = test_support::atlas(m);
  const auto& s = test_support::survey(m);
  const SurfaceReport r = build_report(m, atlas, s);
  const std::string a = to_json(r).dump(), b = to_json(r).dump();
  CHECK(a == b);
  CHECK(to_json(r)["schema"] == 1);
  CHECK_FALSE(to_json(r).contains("timings"));
  CHECK(to_json(r, true).contains("timings"));
  CHECK(to_json(s)["records"].size() == s.records.size());
  CHECK(to_json(atlas)["leaves"].size() == atlas.leaves.size());

  std::ostringstream csv;
  write_trace_csv(csv, m, s.records);
  const std::string text = csv.str();
  CHECK(text.rfind("record,t,x,y,vx,vy,e\n", 0) == 0);
  std::size_t rows = 0;
  for (const auto& rec : s.records) rows += rec.trace.size();
  CHECK(std::size_t(std::count(text.begin(), text.end(), '\n')) == rows + 1);
}
