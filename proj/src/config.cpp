#include "shew/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace shew {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

double parse_number(const std::string& field, const std::string& raw) {
  try {
    size_t used = 0;
    double v = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a number, got '" + raw + "'");
  }
}

}  // namespace

TomlTable TomlTable::parse(const std::string& text) {
  TomlTable table;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno), "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    Value v;
    if (!val.empty() && val.front() == '[') {
      if (val.back() != ']')
        throw ConfigError(section + "." + key, "unterminated array");
      v.is_array = true;
      std::string body = val.substr(1, val.size() - 2);
      std::string item;
      std::istringstream items(body);
      while (std::getline(items, item, ',')) {
        item = trim(item);
        if (!item.empty() && item.front() == '"' && item.back() == '"')
          item = item.substr(1, item.size() - 2);
        if (!item.empty()) v.array.push_back(item);
      }
    } else if (!val.empty() && val.front() == '"') {
      if (val.size() < 2 || val.back() != '"')
        throw ConfigError(section + "." + key, "unterminated string");
      v.is_string = true;
      v.raw = val.substr(1, val.size() - 2);
    } else {
      v.raw = val;
    }
    table.sections_[section][key] = std::move(v);
  }
  return table;
}

TomlTable TomlTable::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const TomlTable::Value* TomlTable::find(const std::string& section,
                                        const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

bool TomlTable::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

double TomlTable::number(const std::string& section, const std::string& key,
                         double fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  return parse_number(section + "." + key, v->raw);
}

double TomlTable::required_number(const std::string& section, const std::string& key) const {
  const Value* v = find(section, key);
  if (!v) throw ConfigError(section + "." + key, "missing required field");
  return parse_number(section + "." + key, v->raw);
}

std::int64_t TomlTable::integer(const std::string& section, const std::string& key,
                                std::int64_t fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  double d = parse_number(section + "." + key, v->raw);
  if (d != std::floor(d)) throw ConfigError(section + "." + key, "expected an integer");
  return static_cast<std::int64_t>(d);
}

bool TomlTable::boolean(const std::string& section, const std::string& key,
                        bool fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  if (v->raw == "true") return true;
  if (v->raw == "false") return false;
  throw ConfigError(section + "." + key, "expected true or false");
}

std::string TomlTable::text(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  const Value* v = find(section, key);
  return v ? v->raw : fallback;
}

std::vector<double> TomlTable::numbers(const std::string& section, const std::string& key,
                                       const std::vector<double>& fallback) const {
  const Value* v = find(section, key);
  if (!v) return fallback;
  if (!v->is_array) return {parse_number(section + "." + key, v->raw)};
  std::vector<double> out;
  for (const auto& item : v->array) out.push_back(parse_number(section + "." + key, item));
  return out;
}

// ---------------------------------------------------------------------------
// wall expressions

namespace {

struct ExprParser {
  const std::string& src;
  size_t pos = 0;

  explicit ExprParser(const std::string& s) : src(s) {}

  void skip() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < src.size() && src[pos] == c) { ++pos; return true; }
    return false;
  }

  using Fn = std::function<double(double)>;

  Fn parse_expr() {
    Fn lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        Fn rhs = parse_term();
        lhs = [lhs, rhs](double x) { return lhs(x) + rhs(x); };
      } else if (eat('-')) {
        Fn rhs = parse_term();
        lhs = [lhs, rhs](double x) { return lhs(x) - rhs(x); };
      } else {
        return lhs;
      }
    }
  }

  Fn parse_term() {
    Fn lhs = parse_factor();
    for (;;) {
      if (eat('*')) {
        Fn rhs = parse_factor();
        lhs = [lhs, rhs](double x) { return lhs(x) * rhs(x); };
      } else if (eat('/')) {
        Fn rhs = parse_factor();
        lhs = [lhs, rhs](double x) { return lhs(x) / rhs(x); };
      } else {
        return lhs;
      }
    }
  }

  Fn parse_factor() {
    skip();
    if (eat('-')) {
      Fn inner = parse_factor();
      return [inner](double x) { return -inner(x); };
    }
    if (eat('+')) return parse_factor();
    if (eat('(')) {
      Fn inner = parse_expr();
      if (!eat(')')) throw ConfigError("walls", "missing ')' in expression");
      return inner;
    }
    if (pos < src.size() && (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.')) {
      size_t start = pos;
      while (pos < src.size() &&
             (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.' ||
              src[pos] == 'e' || src[pos] == 'E' ||
              ((src[pos] == '+' || src[pos] == '-') && (src[pos - 1] == 'e' || src[pos - 1] == 'E'))))
        ++pos;
      double v = parse_number("walls", src.substr(start, pos - start));
      return [v](double) { return v; };
    }
    if (pos < src.size() && std::isalpha(static_cast<unsigned char>(src[pos]))) {
      size_t start = pos;
      while (pos < src.size() && std::isalpha(static_cast<unsigned char>(src[pos]))) ++pos;
      std::string name = src.substr(start, pos - start);
      if (name == "x") return [](double x) { return x; };
      if (name == "pi") return [](double) { return kPi; };
      if (name == "sin" || name == "cos") {
        if (!eat('(')) throw ConfigError("walls", name + " needs parentheses");
        Fn inner = parse_expr();
        if (!eat(')')) throw ConfigError("walls", "missing ')' after " + name);
        if (name == "sin") return [inner](double x) { return std::sin(inner(x)); };
        return [inner](double x) { return std::cos(inner(x)); };
      }
      throw ConfigError("walls", "unknown symbol '" + name + "' in expression");
    }
    throw ConfigError("walls", "could not parse expression near position " + std::to_string(pos));
  }
};

}  // namespace

std::function<double(double)> parse_wall_expression(const std::string& expr) {
  ExprParser p(expr);
  auto fn = p.parse_expr();
  p.skip();
  if (p.pos != expr.size()) throw ConfigError("walls", "trailing characters in expression");
  return fn;
}

// ---------------------------------------------------------------------------
// experiment config

ScalarCoefficient coefficient_from_preset(const std::string& which, const std::string& preset,
                                          const std::vector<double>& params) {
  auto need = [&](size_t n) {
    if (params.size() < n)
      throw ConfigError("coefficients." + which, "preset '" + preset + "' needs " +
                                                     std::to_string(n) + " parameter(s)");
  };
  if (preset == "zero") return coefficients::zero();
  if (preset == "constant") { need(1); return coefficients::constant(params[0]); }
  if (preset == "affine") { need(2); return coefficients::affine(params[0], params[1]); }
  if (preset == "sine") { need(1); return coefficients::sine(params[0], params.size() > 1 ? params[1] : 1.0); }
  if (preset == "tanh_band") { need(2); return coefficients::tanh_band(params[0], params[1]); }
  throw ConfigError("coefficients." + which, "unknown preset '" + preset + "'");
}

WallPair ExperimentConfig::walls() const {
  CircleGrid g = grid();
  if (wall_preset == "constant") {
    if (wall_params.size() < 2) throw ConfigError("walls.params", "need [lower, upper]");
    return constant_walls(g, wall_params[0], wall_params[1]);
  }
  if (wall_preset == "sinusoidal")
    return make_walls(g, [](double x) { return -1.0 + 0.3 * std::sin(x); },
                      [](double x) { return 1.0 + 0.3 * std::cos(x); });
  if (wall_preset == "expr") {
    if (wall_lower_expr.empty() || wall_upper_expr.empty())
      throw ConfigError("walls.lower", "preset 'expr' needs lower and upper expressions");
    return make_walls(g, parse_wall_expression(wall_lower_expr),
                      parse_wall_expression(wall_upper_expr));
  }
  throw ConfigError("walls.preset", "unknown preset '" + wall_preset + "'");
}

ScalarCoefficient ExperimentConfig::drift() const {
  return coefficient_from_preset("f", f_preset, f_params);
}

ScalarCoefficient ExperimentConfig::diffusion() const {
  return coefficient_from_preset("sigma", sigma_preset, sigma_params);
}

PenalizedParams ExperimentConfig::penalized_params() const {
  PenalizedParams p;
  p.epsilon = epsilon;
  p.delta = delta;
  p.dt = dt;
  p.f = drift();
  p.sigma = diffusion();
  if (scheme == "projected") p.scheme = Scheme::Projected;
  else if (scheme == "penalized") p.scheme = Scheme::Penalized;
  else throw ConfigError("scheme.scheme", "expected 'projected' or 'penalized'");
  if (laplacian == "spectral") p.laplacian = LaplacianKind::Spectral;
  else if (laplacian == "finite_difference") p.laplacian = LaplacianKind::DiscreteLaplacian;
  else throw ConfigError("scheme.laplacian", "expected 'spectral' or 'finite_difference'");
  p.validate();
  return p;
}

SeedManifest ExperimentConfig::seed_manifest() const {
  return SeedManifest{master_seed, replicas};
}

ExperimentConfig config_from_table(const TomlTable& t) {
  ExperimentConfig c;
  c.raw = t;
  c.n_x = static_cast<int>(t.integer("grid", "n_x", 64));
  if (c.n_x < 4) throw ConfigError("grid.n_x", "need at least 4 nodes");
  c.dt = t.number("time", "dt", 1e-3);
  if (!(c.dt > 0)) throw ConfigError("time.dt", "must be positive");
  c.horizon = t.number("time", "T", 1.0);
  if (!(c.horizon > 0)) throw ConfigError("time.T", "must be positive");
  c.burn_in = t.number("time", "burn_in", 0.0);
  if (c.burn_in < 0 || c.burn_in >= c.horizon)
    throw ConfigError("time.burn_in", "must lie in [0, T)");
  c.stride = t.number("time", "stride", 0.1);
  c.record_stride = static_cast<int>(t.integer("time", "record_stride", 1));
  if (c.record_stride < 1) throw ConfigError("time.record_stride", "must be >= 1");
  c.wall_preset = t.text("walls", "preset", "constant");
  c.wall_params = t.numbers("walls", "params", {-1.0, 1.0});
  c.wall_lower_expr = t.text("walls", "lower", "");
  c.wall_upper_expr = t.text("walls", "upper", "");
  c.f_preset = t.text("coefficients", "f", "zero");
  c.f_params = t.numbers("coefficients", "f_params", {});
  c.sigma_preset = t.text("coefficients", "sigma", "constant");
  c.sigma_params = t.numbers("coefficients", "sigma_params", {1.0});
  c.epsilon = t.number("scheme", "epsilon", 1e-2);
  c.delta = t.number("scheme", "delta", 1e-2);
  c.scheme = t.text("scheme", "scheme", "projected");
  c.laplacian = t.text("scheme", "laplacian", "spectral");
  if (t.has("scheme", "mixing_n")) {
    auto n = t.integer("scheme", "mixing_n", 0);
    if (n < 1) throw ConfigError("scheme.mixing_n", "must be a positive integer");
    c.mixing_n = static_cast<int>(n);
  }
  c.zeta = t.number("scheme", "zeta", 1e-9);
  if (!(c.zeta > 0)) throw ConfigError("scheme.zeta", "must be positive");
  std::int64_t seed = t.integer("seeds", "master_seed", 1);
  c.master_seed = static_cast<std::uint64_t>(seed);
  c.replicas = static_cast<int>(t.integer("seeds", "replicas", 1));
  if (c.replicas < 1) throw ConfigError("seeds.replicas", "must be >= 1");
  c.threads = static_cast<int>(t.integer("seeds", "threads", 0));
  // constructing these validates the presets and wall ordering up front
  c.walls();
  c.penalized_params();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_table(TomlTable::parse_file(path));
}

namespace {
std::string json_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  return out;
}
}  // namespace

std::string ExperimentConfig::to_json() const {
  std::ostringstream os;
  os << "{";
  os << "\"grid\":{\"n_x\":" << n_x << "},";
  os << "\"time\":{\"dt\":" << dt << ",\"T\":" << horizon << ",\"burn_in\":" << burn_in
     << ",\"stride\":" << stride << ",\"record_stride\":" << record_stride << "},";
  os << "\"walls\":{\"preset\":\"" << json_escape(wall_preset) << "\",\"params\":[";
  for (size_t i = 0; i < wall_params.size(); ++i) os << (i ? "," : "") << wall_params[i];
  os << "]";
  if (!wall_lower_expr.empty())
    os << ",\"lower\":\"" << json_escape(wall_lower_expr) << "\",\"upper\":\""
       << json_escape(wall_upper_expr) << "\"";
  os << "},";
  os << "\"coefficients\":{\"f\":\"" << json_escape(f_preset) << "\",\"f_params\":[";
  for (size_t i = 0; i < f_params.size(); ++i) os << (i ? "," : "") << f_params[i];
  os << "],\"sigma\":\"" << json_escape(sigma_preset) << "\",\"sigma_params\":[";
  for (size_t i = 0; i < sigma_params.size(); ++i) os << (i ? "," : "") << sigma_params[i];
  os << "]},";
  os << "\"scheme\":{\"epsilon\":" << epsilon << ",\"delta\":" << delta << ",\"scheme\":\""
     << scheme << "\",\"laplacian\":\"" << laplacian << "\"";
  if (mixing_n) os << ",\"mixing_n\":" << *mixing_n;
  os << ",\"zeta\":" << zeta << "},";
  os << "\"seeds\":{\"master_seed\":" << master_seed << ",\"replicas\":" << replicas
     << ",\"threads\":" << threads << "}";
  os << "}";
  return os.str();
}

}  // namespace shew
