#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "chlat/cli.hpp"

namespace chlat {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n"), b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

// Recursive descent over + - * / with unary minus, parentheses, pi and sqrt().
struct Expr {
  const std::string& s;
  std::size_t i = 0;

  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  double sum() {
    double v = product();
    for (;;) {
      if (eat('+')) v += product();
      else if (eat('-')) v -= product();
      else return v;
    }
  }
  double product() {
    double v = unary();
    for (;;) {
      if (eat('*')) v *= unary();
      else if (eat('/')) v /= unary();
      else return v;
    }
  }
  double unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return atom();
  }
  double atom() {
    skip();
    if (eat('(')) {
      double v = sum();
      if (!eat(')')) throw std::invalid_argument("missing )");
      return v;
    }
    if (s.compare(i, 2, "pi") == 0) {
      i += 2;
      return kPi;
    }
    if (s.compare(i, 4, "sqrt") == 0) {
      i += 4;
      if (!eat('(')) throw std::invalid_argument("sqrt needs (");
      double v = sum();
      if (!eat(')')) throw std::invalid_argument("missing )");
      return std::sqrt(v);
    }
    std::size_t used = 0;
    double v = std::stod(s.substr(i), &used);
    i += used;
    return v;
  }
};

using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"lattice", {"l1", "l2", "k1", "k2", "shell"}},
      {"params", {"lambda", "gamma2", "gamma3", "sigma", "even"}},
      {"sim",
       {"N", "dt", "t_end", "scheme", "dealias", "seed", "init", "init_amplitude", "init_equilibrium",
        "init_phases", "init_file", "record_every", "escape_factor", "escape_cap", "max_halvings", "reduced",
        "compare"}},
      {"render",
       {"source", "equilibrium", "coordinates", "phases", "field_file", "width", "height", "tiles1", "tiles2",
        "geometry"}},
      {"output", {"dir", "formats", "name"}},
  };
  return keys;
}

void put(RawConfig& raw, const std::string& section, const std::string& key, const std::string& value) {
  auto sec = schema().find(section);
  if (sec == schema().end()) config_error("unknown section [" + section + "]");
  if (!sec->second.count(key)) config_error("unknown key " + section + "." + key);
  if (!raw[section].emplace(key, value).second) config_error("duplicate key " + section + "." + key);
}

struct Reader {
  const RawConfig& raw;

  const std::string* get(const std::string& sec, const std::string& key) const {
    auto s = raw.find(sec);
    if (s == raw.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }
  static std::string where(const std::string& sec, const std::string& key) { return sec + "." + key; }

  double number(const std::string& sec, const std::string& key, double fallback) const {
    auto v = get(sec, key);
    return v ? parse_number(*v, where(sec, key)) : fallback;
  }
  static double parse_number(const std::string& text, const std::string& at) {
    try {
      return evaluate_expression(text);
    } catch (const Error&) {
      config_error("bad number for " + at + ": '" + text + "'");
    }
  }
  long integer(const std::string& sec, const std::string& key, long fallback) const {
    auto v = get(sec, key);
    if (!v) return fallback;
    double d = parse_number(*v, where(sec, key));
    if (d != std::floor(d) || std::abs(d) > 9e15) config_error(where(sec, key) + " must be an integer");
    return static_cast<long>(d);
  }
  bool boolean(const std::string& sec, const std::string& key, bool fallback) const {
    auto v = get(sec, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    config_error(where(sec, key) + " must be true or false");
  }
  std::vector<double> list(const std::string& sec, const std::string& key) const {
    auto v = get(sec, key);
    std::vector<double> out;
    if (!v || trim(*v).empty()) return out;
    for (const auto& part : split(*v, ',')) out.push_back(parse_number(part, where(sec, key)));
    return out;
  }
  std::vector<std::string> list_strings(const std::string& sec, const std::string& key) const {
    auto v = get(sec, key);
    std::vector<std::string> out;
    if (!v || trim(*v).empty()) return out;
    for (const auto& part : split(*v, ',')) {
      if (part != "csv" && part != "pgm" && part != "png" && part != "json") {
        config_error("invalid format '" + part + "' in " + where(sec, key));
      }
      out.push_back(part);
    }
    return out;
  }
  Vec2 vec(const std::string& sec, const std::string& key) const {
    auto l = list(sec, key);
    if (l.size() != 2) config_error(where(sec, key) + " needs two components");
    return {l[0], l[1]};
  }
  std::string text(const std::string& sec, const std::string& key, const std::string& fallback = "") const {
    auto v = get(sec, key);
    return v ? *v : fallback;
  }
  std::string choice(const std::string& sec, const std::string& key, const std::string& fallback,
                     const std::set<std::string>& allowed) const {
    auto v = text(sec, key, fallback);
    if (!allowed.count(v)) config_error("invalid value '" + v + "' for " + where(sec, key));
    return v;
  }
};

RunConfig interpret(const RawConfig& raw) {
  Reader r{raw};
  RunConfig c;
  c.has_l = r.get("lattice", "l1") || r.get("lattice", "l2");
  c.has_k = r.get("lattice", "k1") || r.get("lattice", "k2");
  if (c.has_l == c.has_k) config_error("give exactly one of lattice.l1/l2 or lattice.k1/k2");
  if (c.has_l) c.lattice = {r.vec("lattice", "l1"), r.vec("lattice", "l2")};
  else c.dual = {r.vec("lattice", "k1"), r.vec("lattice", "k2")};
  if (auto s = r.get("lattice", "shell")) {
    for (const auto& pair : split(*s, ';')) {
      auto n = split(pair, ',');
      if (n.size() != 2) config_error("lattice.shell entries are n1,n2 separated by ';'");
      double a = Reader::parse_number(n[0], "lattice.shell"), b = Reader::parse_number(n[1], "lattice.shell");
      if (a != std::floor(a) || b != std::floor(b)) config_error("lattice.shell indices must be integers");
      c.shell.push_back({static_cast<int>(a), static_cast<int>(b)});
    }
  }

  if (!r.get("params", "lambda")) config_error("params.lambda is required");
  std::string lam = trim(r.text("params", "lambda"));
  if (lam.rfind("auto", 0) == 0) {
    c.lambda_auto = true;
    auto colon = lam.find(':');
    if (lam == "auto") c.lambda_factor = 1.0;
    else if (colon == 4) c.lambda_factor = Reader::parse_number(lam.substr(5), "params.lambda");
    else config_error("params.lambda must be a number or auto:factor");
    if (!(c.lambda_factor > 0)) config_error("params.lambda factor must be positive");
  } else {
    c.lambda = r.number("params", "lambda", 0.0);
  }
  c.gamma2 = r.number("params", "gamma2", 0.0);
  c.gamma3 = r.number("params", "gamma3", 1.0);
  c.sigma = r.number("params", "sigma", 0.0);
  c.even = r.boolean("params", "even", false);

  auto& s = c.sim;
  s.N = static_cast<int>(r.integer("sim", "N", s.N));
  s.dt = r.number("sim", "dt", s.dt);
  s.t_end = r.number("sim", "t_end", s.t_end);
  s.scheme = r.choice("sim", "scheme", "imex1", {"imex1", "imex2"}) == "imex2" ? Scheme::IMEX2 : Scheme::IMEX1;
  s.dealias = static_cast<int>(r.integer("sim", "dealias", s.dealias));
  long seed = r.integer("sim", "seed", static_cast<long>(s.seed));
  if (seed < 0) config_error("sim.seed must be nonnegative");
  s.seed = static_cast<std::uint64_t>(seed);
  auto init = r.choice("sim", "init", "random", {"random", "equilibrium", "file"});
  s.init = init == "random" ? InitKind::RandomSmall : (init == "equilibrium" ? InitKind::FromEquilibrium : InitKind::Explicit);
  s.init_amplitude = r.number("sim", "init_amplitude", s.init_amplitude);
  c.init_label = r.text("sim", "init_equilibrium");
  s.init_phases = r.list("sim", "init_phases");
  c.init_file = r.text("sim", "init_file");
  if (init == "equilibrium" && c.init_label.empty()) config_error("sim.init = equilibrium needs sim.init_equilibrium");
  if (init == "file" && c.init_file.empty()) config_error("sim.init = file needs sim.init_file");
  s.record_every = static_cast<int>(r.integer("sim", "record_every", s.record_every));
  s.escape_factor = r.number("sim", "escape_factor", s.escape_factor);
  s.escape_cap = r.number("sim", "escape_cap", s.escape_cap);
  s.max_halvings = static_cast<int>(r.integer("sim", "max_halvings", s.max_halvings));
  c.run_reduced = r.boolean("sim", "reduced", false);
  c.compare_factors = r.list("sim", "compare");
  if (s.N < 1 || s.record_every < 1 || s.dealias < 1) config_error("sim.N, sim.record_every and sim.dealias must be positive");
  if (!(s.dt > 0) || !(s.t_end >= 0)) config_error("sim.dt must be positive and sim.t_end nonnegative");

  c.render_source = r.choice("render", "source", "equilibrium", {"equilibrium", "coordinates", "field"});
  c.render_label = r.text("render", "equilibrium");
  c.render_coordinates = r.list("render", "coordinates");
  c.render_phases = r.list("render", "phases");
  c.render_field = r.text("render", "field_file");
  c.raster.width = static_cast<int>(r.integer("render", "width", c.raster.width));
  c.raster.height = static_cast<int>(r.integer("render", "height", c.raster.height));
  c.raster.tiles1 = static_cast<int>(r.integer("render", "tiles1", c.raster.tiles1));
  c.raster.tiles2 = static_cast<int>(r.integer("render", "tiles2", c.raster.tiles2));
  c.raster.geometry = r.choice("render", "geometry", "fractional", {"fractional", "physical"}) == "physical"
                          ? RasterGeometry::Physical
                          : RasterGeometry::Fractional;

  c.out_dir = r.text("output", "dir");
  for (const auto& f : r.list_strings("output", "formats")) c.formats.push_back(f);
  c.name = r.text("output", "name");
  return c;
}

}  // namespace

double evaluate_expression(const std::string& text) {
  Expr e{text};
  double v;
  try {
    v = e.sum();
    e.skip();
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, "cannot parse number '" + text + "'");
  }
  if (e.i != text.size() || !std::isfinite(v)) throw Error(ErrorCode::ConfigError, "cannot parse number '" + text + "'");
  return v;
}

RunConfig parse_ini(const std::string& text) {
  RawConfig raw;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') config_error("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (!schema().count(section)) config_error("unknown section [" + section + "]");
      raw[section];
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) config_error("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) config_error("line " + std::to_string(lineno) + ": key outside a section");
    std::string value = trim(t.substr(eq + 1));
    auto hash = value.find(" #");
    if (hash != std::string::npos) value = trim(value.substr(0, hash));
    put(raw, section, trim(t.substr(0, eq)), value);
  }
  return interpret(raw);
}

RunConfig parse_json_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("JSON config must be an object of sections");
  auto scalar = [](const nlohmann::json& v, const std::string& at) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
      return buf;
    }
    config_error("unsupported value type for " + at);
  };
  RawConfig raw;
  for (const auto& [sec, body] : j.items()) {
    if (!schema().count(sec)) config_error("unknown section [" + sec + "]");
    if (!body.is_object()) config_error("section " + sec + " must be an object");
    raw[sec];
    for (const auto& [key, v] : body.items()) {
      std::string at = sec + "." + key, value;
      if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) value += key == "shell" ? "; " : ", ";
          if (v[i].is_array()) {
            for (std::size_t k = 0; k < v[i].size(); ++k) value += (k ? "," : "") + scalar(v[i][k], at);
          } else {
            value += scalar(v[i], at);
          }
        }
      } else {
        value = scalar(v, at);
      }
      put(raw, sec, key, value);
    }
  }
  return interpret(raw);
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::ConfigError, "cannot read config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  std::string text = ss.str();
  std::string head = trim(text);
  bool json = std::filesystem::path(path).extension() == ".json" || (!head.empty() && head[0] == '{');
  RunConfig c = json ? parse_json_config(text) : parse_ini(text);
  auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  resolve(c.init_file);
  resolve(c.render_field);
  return c;
}

}  // namespace chlat
