#include "lorenzlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace lorenzlab {

namespace {

struct Value {
  std::string text;
  int line = 0, column = 0;  // column of the first value character, 1-based
};

std::string_view trim(std::string_view s, std::size_t& offset) {
  offset = 0;
  while (offset < s.size() && (s[offset] == ' ' || s[offset] == '\t')) ++offset;
  s.remove_prefix(offset);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double to_double(const Value& v) {
  double out = 0.0;
  const char* end = v.text.data() + v.text.size();
  auto [p, ec] = std::from_chars(v.text.data(), end, out);
  if (ec != std::errc{} || p != end) throw ConfigError("expected a number, got '" + v.text + "'", v.line, v.column);
  return out;
}

int to_int(const Value& v) {
  int out = 0;
  const char* end = v.text.data() + v.text.size();
  auto [p, ec] = std::from_chars(v.text.data(), end, out);
  if (ec != std::errc{} || p != end) throw ConfigError("expected an integer, got '" + v.text + "'", v.line, v.column);
  return out;
}

bool to_bool(const Value& v) {
  if (v.text == "true" || v.text == "yes" || v.text == "1") return true;
  if (v.text == "false" || v.text == "no" || v.text == "0") return false;
  throw ConfigError("expected true or false, got '" + v.text + "'", v.line, v.column);
}

double positive(const Value& v) {
  const double d = to_double(v);
  if (!(d > 0.0)) throw ConfigError("tolerance must be positive", v.line, v.column);
  return d;
}

// "a,b" pairs separated by whitespace, optional parentheses.
std::vector<Class2> to_classes(const Value& v) {
  std::vector<Class2> out;
  std::string s = v.text;
  for (char& c : s)
    if (c == '(' || c == ')') c = ' ';
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    const auto comma = tok.find(',');
    long a = 0, b = 0;
    bool ok = comma != std::string::npos;
    if (ok) {
      auto r1 = std::from_chars(tok.data(), tok.data() + comma, a);
      auto r2 = std::from_chars(tok.data() + comma + 1, tok.data() + tok.size(), b);
      ok = r1.ec == std::errc{} && r1.ptr == tok.data() + comma && r2.ec == std::errc{} &&
           r2.ptr == tok.data() + tok.size();
    }
    if (!ok) throw ConfigError("expected a class 'a,b', got '" + tok + "'", v.line, v.column + int(v.text.find(tok)));
    if (a == 0 && b == 0) throw ConfigError("class (0,0) is not allowed", v.line, v.column);
    out.push_back({a, b});
  }
  if (out.empty()) throw ConfigError("empty class list", v.line, v.column);
  return out;
}

using Section = std::map<std::string, Value>;

void apply_model(const Section& sec, ModelSpec& m) {
  auto get = [&](const char* key) -> const Value* {
    auto it = sec.find(key);
    return it == sec.end() ? nullptr : &it->second;
  };
  const Value* fam = get("family");
  if (!fam) throw ConfigError("[model] needs a family", 1, 1);
  if (fam->text == "flat") {
    m = ModelSpec::flat(get("E") ? to_double(*get("E")) : 1.0, get("F") ? to_double(*get("F")) : 0.0,
                        get("G") ? to_double(*get("G")) : -1.0);
  } else if (fam->text == "strip") {
    m = ModelSpec::strip(get("k") ? to_int(*get("k")) : 1);
  } else if (fam->text == "galloway") {
    m = ModelSpec::galloway(get("eps") ? to_double(*get("eps")) : 0.2);
  } else if (fam->text == "klein_galloway") {
    m = ModelSpec::klein_galloway();
  } else if (fam->text == "custom") {
    Topology topo = Topology::torus;
    if (const Value* t = get("topology")) {
      if (t->text == "klein") topo = Topology::klein;
      else if (t->text != "torus") throw ConfigError("topology must be torus or klein", t->line, t->column);
    }
    std::string coeff[3];
    const char* names[3] = {"E", "F", "G"};
    for (int i = 0; i < 3; ++i) {
      const Value* v = get(names[i]);
      if (!v) throw ConfigError(std::string("custom family needs ") + names[i], fam->line, fam->column);
      try {
        (void)Expression::parse(v->text);
      } catch (const ExpressionError& e) {
        std::string msg = e.what();
        msg = msg.substr(0, msg.rfind(" at column"));
        throw ConfigError(msg, v->line, v->column + int(e.column()) - 1);
      }
      coeff[i] = v->text;
    }
    m = ModelSpec::custom(coeff[0], coeff[1], coeff[2], topo);
  } else {
    throw ConfigError("unknown family '" + fam->text + "'", fam->line, fam->column);
  }
  if (const Value* v = get("negate")) m.negate = to_bool(*v);
  if (const Value* v = get("time_sign")) {
    m.time_sign = to_int(*v);
    if (m.time_sign != 1 && m.time_sign != -1) throw ConfigError("time_sign must be 1 or -1", v->line, v->column);
  }
  if (const Value* v = get("swap_null")) m.swap_null = to_bool(*v);
}

const std::map<std::string, std::vector<std::string>> kKeys = {
    {"model", {"family", "topology", "E", "F", "G", "k", "eps", "negate", "time_sign", "swap_null"}},
    {"tolerances", {"ode_tol", "newton_tol", "dedup_tol"}},
    {"search", {"intercepts", "segments", "max_class_coord", "classes", "homology", "sign", "vertices"}},
};

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    // Comments outside quotes.
    bool quoted = false;
    std::size_t cut = raw.size();
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') quoted = !quoted;
      if (!quoted && (raw[i] == '#' || raw[i] == ';')) {
        cut = i;
        break;
      }
    }
    std::size_t lead = 0;
    const std::string_view line = trim(std::string_view(raw).substr(0, cut), lead);
    if (line.empty()) continue;
    const int col0 = int(lead) + 1;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no, col0);
      std::size_t off = 0;
      current = std::string(trim(line.substr(1, line.size() - 2), off));
      if (!kKeys.contains(current))
        throw ConfigError("unknown section [" + current + "]", line_no, col0 + 1 + int(off));
      if (sections.contains(current)) throw ConfigError("duplicate section [" + current + "]", line_no, col0);
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no, col0);
    if (current.empty()) throw ConfigError("key outside of a section", line_no, col0);
    std::size_t koff = 0, voff = 0;
    const std::string key(trim(line.substr(0, eq), koff));
    std::string_view val = trim(line.substr(eq + 1), voff);
    int vcol = col0 + int(eq) + 1 + int(voff);
    if (key.empty()) throw ConfigError("empty key", line_no, col0);
    const auto& allowed = kKeys.at(current);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in [" + current + "]", line_no, col0);
    if (!val.empty() && val.front() == '"') {
      if (val.size() < 2 || val.back() != '"') throw ConfigError("unterminated string", line_no, vcol);
      val = val.substr(1, val.size() - 2);
      ++vcol;
    }
    if (val.empty()) throw ConfigError("missing value for '" + key + "'", line_no, vcol);
    if (sections[current].contains(key)) throw ConfigError("duplicate key '" + key + "'", line_no, col0);
    sections[current][key] = Value{std::string(val), line_no, vcol};
  }

  RunConfig cfg;
  if (!sections.contains("model")) throw ConfigError("missing [model] section", line_no + 1, 1);
  apply_model(sections["model"], cfg.model);
  for (const auto& [key, v] : sections["tolerances"]) {
    if (key == "ode_tol") cfg.tolerances.ode = positive(v);
    if (key == "newton_tol") cfg.tolerances.newton = positive(v);
    if (key == "dedup_tol") cfg.tolerances.dedup = positive(v);
  }
  for (const auto& [key, v] : sections["search"]) {
    auto count = [&](int lo) {
      const int n = to_int(v);
      if (n < lo) throw ConfigError(key + " must be at least " + std::to_string(lo), v.line, v.column);
      return n;
    };
    if (key == "intercepts") cfg.search.intercepts = count(1);
    if (key == "segments") cfg.search.segments = count(1);
    if (key == "max_class_coord") cfg.search.max_class_coord = count(1);
    if (key == "vertices") cfg.search.vertices = count(3);
    if (key == "classes") cfg.search.classes = to_classes(v);
    if (key == "homology") {
      const auto hs = to_classes(v);
      if (hs.size() != 1) throw ConfigError("homology takes a single class", v.line, v.column);
      cfg.search.homology = hs.front();
    }
    if (key == "sign") {
      if (v.text == "nonspacelike") cfg.search.sign = CausalSign::nonspacelike;
      else if (v.text == "nontimelike") cfg.search.sign = CausalSign::nontimelike;
      else throw ConfigError("sign must be nonspacelike or nontimelike", v.line, v.column);
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string(), 0, 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

SurveyOptions survey_options(const RunConfig& cfg, int workers, unsigned long long seed) {
  SurveyOptions o;
  o.intercepts = cfg.search.intercepts;
  o.workers = workers;
  o.dedup_tol = cfg.tolerances.dedup;
  o.max_class_coord = cfg.search.max_class_coord;
  o.classes = cfg.search.classes;
  o.jitter_seed = seed;
  o.shoot.segments = cfg.search.segments;
  o.shoot.ode_tol = cfg.tolerances.ode;
  o.shoot.closure_tol = cfg.tolerances.newton;
  return o;
}

}  // namespace lorenzlab
