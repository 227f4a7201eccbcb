#pragma once

// Run configuration files and trajectory JSON.
//
// Config syntax is a TOML subset: [section] headers, key = value pairs,
// '#' comments. Values are numbers, "strings", true/false, or flat arrays of
// numbers.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "fvc/chebyshev.hpp"
#include "fvc/errors.hpp"
#include "fvc/expr.hpp"
#include "fvc/fracops.hpp"
#include "fvc/legendre.hpp"
#include "fvc/linalg.hpp"
#include "fvc/quadrature.hpp"
#include "fvc/variational.hpp"

namespace fvc {

// ---------------------------------------------------------------------------
// Config documents

struct ConfigValue {
  std::variant<double, std::string, bool, Vec> data;
  std::size_t line = 0;
  std::size_t col = 0;        // column of the value's first character
  std::size_t text_col = 0;   // for strings: column of the first character inside the quotes
};

using ConfigTable = std::map<std::string, ConfigValue>;

struct ConfigDocument {
  std::map<std::string, ConfigTable> sections;  // "" holds keys before any header
  std::map<std::string, std::size_t> section_lines;
};

namespace detail {

class ConfigLexer {
 public:
  explicit ConfigLexer(std::string_view text) : text_(text) {}

  ConfigDocument run() {
    ConfigDocument doc;
    std::string section;
    doc.sections[section];
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      const std::size_t end = std::min(text_.find('\n', pos), text_.size());
      ++line_no;
      line_ = text_.substr(pos, end - pos);
      if (!line_.empty() && line_.back() == '\r') line_.remove_suffix(1);
      line_no_ = line_no;
      i_ = 0;
      parse_line(doc, section);
      if (end == text_.size()) break;
      pos = end + 1;
    }
    return doc;
  }

 private:
  std::string_view text_;
  std::string_view line_;
  std::size_t line_no_ = 0;
  std::size_t i_ = 0;

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(line_no_, i_ + 1, what); }

  void skip_ws() {
    while (i_ < line_.size() && (line_[i_] == ' ' || line_[i_] == '\t')) ++i_;
  }
  bool at_end_or_comment() {
    skip_ws();
    return i_ >= line_.size() || line_[i_] == '#';
  }
  static bool key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

  std::string key() {
    const std::size_t s = i_;
    while (i_ < line_.size() && key_char(line_[i_])) ++i_;
    if (i_ == s) fail("expected a key");
    return std::string(line_.substr(s, i_ - s));
  }

  void parse_line(ConfigDocument& doc, std::string& section) {
    if (at_end_or_comment()) return;
    if (line_[i_] == '[') {
      ++i_;
      skip_ws();
      std::string name = key();
      skip_ws();
      if (i_ >= line_.size() || line_[i_] != ']') fail("expected ']'");
      ++i_;
      if (!at_end_or_comment()) fail("unexpected text after section header");
      if (doc.section_lines.count(name)) fail("duplicate section [" + name + "]");
      doc.section_lines[name] = line_no_;
      section = name;
      doc.sections[section];
      return;
    }
    const std::size_t key_col = i_ + 1;
    const std::string k = key();
    skip_ws();
    if (i_ >= line_.size() || line_[i_] != '=') fail("expected '='");
    ++i_;
    skip_ws();
    ConfigValue v = value();
    if (!at_end_or_comment()) fail("unexpected text after value");
    auto& table = doc.sections[section];
    if (table.count(k)) throw ConfigError(line_no_, key_col, "duplicate key '" + k + "'");
    table.emplace(k, std::move(v));
  }

  double number() {
    const std::size_t s = i_;
    while (i_ < line_.size() && (std::isalnum(static_cast<unsigned char>(line_[i_])) || line_[i_] == '.' ||
                                 line_[i_] == '+' || line_[i_] == '-'))
      ++i_;
    const std::string tok(line_.substr(s, i_ - s));
    if (tok.empty()) fail("expected a value");
    try {
      std::size_t used = 0;
      const double d = std::stod(tok, &used);
      if (used != tok.size() || !std::isfinite(d)) throw std::invalid_argument(tok);
      return d;
    } catch (const std::exception&) {
      i_ = s;
      fail("invalid number '" + tok + "'");
    }
  }

  ConfigValue value() {
    ConfigValue v;
    v.line = line_no_;
    v.col = i_ + 1;
    if (i_ >= line_.size()) fail("expected a value");
    const char c = line_[i_];
    if (c == '"') {
      ++i_;
      v.text_col = i_ + 1;
      std::string s;
      for (;;) {
        if (i_ >= line_.size()) fail("unterminated string");
        const char d = line_[i_++];
        if (d == '"') break;
        if (d == '\\') {
          if (i_ >= line_.size()) fail("unterminated string");
          const char e = line_[i_++];
          switch (e) {
            case '"':
              s += '"';
              break;
            case '\\':
              s += '\\';
              break;
            case 'n':
              s += '\n';
              break;
            case 't':
              s += '\t';
              break;
            default:
              --i_;
              fail("unknown escape");
          }
          continue;
        }
        s += d;
      }
      v.data = std::move(s);
      return v;
    }
    if (c == '[') {
      ++i_;
      Vec arr;
      skip_ws();
      if (i_ < line_.size() && line_[i_] == ']') {
        ++i_;
        v.data = arr;
        return v;
      }
      for (;;) {
        skip_ws();
        arr.push_back(number());
        skip_ws();
        if (i_ >= line_.size()) fail("unterminated array");
        if (line_[i_] == ',') {
          ++i_;
          continue;
        }
        if (line_[i_] == ']') {
          ++i_;
          break;
        }
        fail("expected ',' or ']'");
      }
      v.data = std::move(arr);
      return v;
    }
    if (line_.substr(i_, 4) == "true" && (i_ + 4 == line_.size() || !key_char(line_[i_ + 4]))) {
      i_ += 4;
      v.data = true;
      return v;
    }
    if (line_.substr(i_, 5) == "false" && (i_ + 5 == line_.size() || !key_char(line_[i_ + 5]))) {
      i_ += 5;
      v.data = false;
      return v;
    }
    v.data = number();
    return v;
  }
};

}  // namespace detail

inline ConfigDocument parse_config_document(std::string_view text) { return detail::ConfigLexer(text).run(); }

// ---------------------------------------------------------------------------
// Run configuration

struct GridRange {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;

  /// Inclusive grid; values rounded to 12 decimals so equal grid points compare equal.
  Vec values() const {
    Vec out;
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) {
      const double v = start + static_cast<double>(i) * step;
      out.push_back(std::round(v * 1e12) / 1e12);
    }
    return out;
  }
};

struct RunConfig {
  ProblemSpec problem;
  std::string lagrangian_text;
  std::string terminant_text;
  int quad_n = kDefaultQuadN;
  int n_nodes = kDefaultNodes;
  double tol_residual = 1e-7;
  double tol_psd = kPsdTol;
  std::optional<GridRange> sweep_alpha;
  std::optional<GridRange> sweep_beta;
  std::string output_path;
  std::string output_format;  // empty: the command picks its default
  // legendre
  std::optional<double> sigma;
  Vec eps_list;
  std::optional<Vec> direction;
  // oracle
  int oracle_m = 64;
  double oracle_tol = 1e-10;
  int oracle_max_iter = 500;
  // dubois
  std::string dubois_f = "sin(3*t) + t^2";
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(const ConfigDocument& d) : doc_(d) {}

  RunConfig read() {
    static const std::map<std::string, std::vector<std::string>> allowed = {
        {"", {}},
        {"problem", {"variant", "alpha", "beta", "t0", "t1", "n", "lagrangian", "terminant", "x0", "x1"}},
        {"quadrature", {"n"}},
        {"nodes", {"n"}},
        {"tolerances", {"residual", "psd"}},
        {"sweep", {"alpha_start", "alpha_stop", "alpha_step", "beta_start", "beta_stop", "beta_step"}},
        {"output", {"path", "format"}},
        {"legendre", {"sigma", "eps", "r"}},
        {"oracle", {"m", "tol", "max_iter"}},
        {"dubois", {"f"}},
    };
    for (const auto& [name, table] : doc_.sections) {
      const auto it = allowed.find(name);
      if (it == allowed.end()) throw ConfigError(doc_.section_lines.at(name), 1, "unknown section [" + name + "]");
      for (const auto& [k, v] : table)
        if (std::find(it->second.begin(), it->second.end(), k) == it->second.end())
          throw ConfigError(v.line, v.col, "unknown key '" + k + "'" + (name.empty() ? "" : " in [" + name + "]"));
    }

    RunConfig c;
    if (!doc_.sections.count("problem")) throw ConfigError(1, 1, "missing [problem] section");
    ProblemSpec& p = c.problem;
    const ConfigTable& pt = doc_.sections.at("problem");
    const ConfigValue& vv = need(pt, "problem", "variant");
    const auto var = parse_variant(str(vv));
    if (!var) throw ConfigError(vv.line, vv.col, "variant must be Simplest, FreeInitial, Bolza or FreeFinal");
    p.variant = *var;
    p.alpha = num(need(pt, "problem", "alpha"));
    p.beta = num(need(pt, "problem", "beta"));
    if (!(p.alpha > 0.0 && p.alpha <= 1.0)) bad(pt.at("alpha"), "alpha must lie in (0,1]");
    if (!(p.beta > 0.0)) bad(pt.at("beta"), "beta must be positive");
    if (auto v = opt(pt, "t0")) p.t0 = num(*v);
    if (auto v = opt(pt, "t1")) p.t1 = num(*v);
    if (!(p.t0 < p.t1)) bad(opt(pt, "t1") ? *opt(pt, "t1") : vv, "need t0 < t1");
    if (auto v = opt(pt, "n")) p.n = static_cast<std::size_t>(count(*v, 1, 64));
    const ConfigValue& lv = need(pt, "problem", "lagrangian");
    c.lagrangian_text = str(lv);
    p.lagrangian = expression(lv, p.n);
    if (auto v = opt(pt, "terminant")) {
      c.terminant_text = str(*v);
      p.terminant = expression(*v, p.n);
    }
    if (auto v = opt(pt, "x0")) p.x0_fixed = vec(*v, p.n);
    if (auto v = opt(pt, "x1")) p.x1_fixed = vec(*v, p.n);
    try {
      p.validate();
    } catch (const Error& e) {
      throw ConfigError(doc_.section_lines.at("problem"), 1, e.what());
    }

    if (auto t = table("quadrature"))
      if (auto v = opt(*t, "n")) c.quad_n = count(*v, 1, 512);
    if (auto t = table("nodes"))
      if (auto v = opt(*t, "n")) c.n_nodes = count(*v, 1, 10000);
    if (auto t = table("tolerances")) {
      if (auto v = opt(*t, "residual")) c.tol_residual = positive(*v);
      if (auto v = opt(*t, "psd")) c.tol_psd = positive(*v);
    }
    if (auto t = table("sweep")) {
      c.sweep_alpha = range(*t, "alpha");
      c.sweep_beta = range(*t, "beta");
      for (double a : c.sweep_alpha->values())
        if (!(a > 0.0 && a <= 1.0 + 1e-12)) bad(t->at("alpha_stop"), "alpha grid values must lie in (0,1]");
      for (double b : c.sweep_beta->values())
        if (!(b > 0.0)) bad(t->at("beta_start"), "beta grid values must be positive");
    }
    if (auto t = table("output")) {
      if (auto v = opt(*t, "path")) c.output_path = str(*v);
      if (auto v = opt(*t, "format")) {
        c.output_format = str(*v);
        if (c.output_format != "json" && c.output_format != "csv") bad(*v, "format must be json or csv");
      }
    }
    if (auto t = table("legendre")) {
      if (auto v = opt(*t, "sigma")) {
        c.sigma = num(*v);
        if (!(*c.sigma > p.t0 && *c.sigma < p.t1)) bad(*v, "sigma must lie inside (t0,t1)");
      }
      if (auto v = opt(*t, "eps")) {
        c.eps_list = vec(*v, 0);
        for (double e : c.eps_list)
          if (!(e > 0.0)) bad(*v, "eps values must be positive");
      }
      if (auto v = opt(*t, "r")) c.direction = vec(*v, p.n);
    }
    if (auto t = table("oracle")) {
      if (auto v = opt(*t, "m")) c.oracle_m = count(*v, 2, 512);
      if (auto v = opt(*t, "tol")) c.oracle_tol = positive(*v);
      if (auto v = opt(*t, "max_iter")) c.oracle_max_iter = count(*v, 1, 1000000);
    }
    if (auto t = table("dubois"))
      if (auto v = opt(*t, "f")) {
        c.dubois_f = str(*v);
        const Expr e = expression(*v, 1);
        if (e.uses(VarKind::X) || e.uses(VarKind::Y) || e.uses(VarKind::A) || e.uses(VarKind::B))
          bad(*v, "f may only use t");
      }
    return c;
  }

 private:
  const ConfigDocument& doc_;

  [[noreturn]] static void bad(const ConfigValue& v, const std::string& what) { throw ConfigError(v.line, v.col, what); }

  const ConfigTable* table(const std::string& name) const {
    const auto it = doc_.sections.find(name);
    return it == doc_.sections.end() ? nullptr : &it->second;
  }
  static const ConfigValue* opt(const ConfigTable& t, const std::string& k) {
    const auto it = t.find(k);
    return it == t.end() ? nullptr : &it->second;
  }
  const ConfigValue& need(const ConfigTable& t, const std::string& section, const std::string& k) const {
    const auto it = t.find(k);
    if (it == t.end()) throw ConfigError(doc_.section_lines.at(section), 1, "missing key '" + k + "' in [" + section + "]");
    return it->second;
  }
  static double num(const ConfigValue& v) {
    if (const double* d = std::get_if<double>(&v.data)) return *d;
    bad(v, "expected a number");
  }
  static const std::string& str(const ConfigValue& v) {
    if (const auto* s = std::get_if<std::string>(&v.data)) return *s;
    bad(v, "expected a string");
  }
  static int count(const ConfigValue& v, int lo, int hi) {
    const double d = num(v);
    if (d != std::floor(d) || d < lo || d > hi)
      bad(v, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(d);
  }
  static double positive(const ConfigValue& v) {
    const double d = num(v);
    if (!(d > 0.0)) bad(v, "expected a positive number");
    return d;
  }
  static Vec vec(const ConfigValue& v, std::size_t n) {
    const Vec* a = std::get_if<Vec>(&v.data);
    if (!a) bad(v, "expected an array of numbers");
    if (n != 0 && a->size() != n) bad(v, "expected " + std::to_string(n) + " entries");
    return *a;
  }
  static Expr expression(const ConfigValue& v, std::size_t n) {
    const std::string& s = str(v);
    try {
      return parse(s, n);
    } catch (const ParseError& e) {
      throw ConfigError(v.line, v.text_col + e.offset(), e.what());
    } catch (const DimensionError& e) {
      throw ConfigError(v.line, v.text_col, e.what());
    }
  }
  GridRange range(const ConfigTable& t, const std::string& axis) const {
    GridRange r;
    r.start = num(need(t, "sweep", axis + "_start"));
    r.stop = num(need(t, "sweep", axis + "_stop"));
    const ConfigValue& sv = need(t, "sweep", axis + "_step");
    r.step = num(sv);
    if (!(r.step > 0.0)) bad(sv, "step must be positive");
    if (!(r.stop >= r.start)) bad(t.at(axis + "_stop"), "range is empty");
    return r;
  }
};

}  // namespace detail

inline RunConfig parse_run_config(std::string_view text) {
  return detail::ConfigReader(parse_config_document(text)).read();
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, 0, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig load_run_config(const std::string& path) { return parse_run_config(read_text_file(path)); }

// ---------------------------------------------------------------------------
// Trajectory JSON
//
// {t0, t1, alpha, x0: [..], psi_nodes: [t..], psi_values: [[..]..], jumps: [..], breaks: [..]}
// psi is interpolated by a polynomial through the nodes of each piece between
// consecutive breaks or jumps. A boundary node listed twice gives the left
// and then the right value.

namespace detail {

/// Barycentric polynomial interpolation through arbitrary distinct nodes.
class NodalInterp {
 public:
  NodalInterp(Vec t, std::vector<Vec> v) : t_(std::move(t)), v_(std::move(v)), w_(t_.size(), 1.0) {
    for (std::size_t j = 0; j < t_.size(); ++j)
      for (std::size_t k = 0; k < t_.size(); ++k)
        if (k != j) w_[j] /= (t_[j] - t_[k]);
    // rescale to avoid overflow on many nodes
    double big = 0.0;
    for (double w : w_) big = std::max(big, std::abs(w));
    if (big > 0.0)
      for (double& w : w_) w /= big;
  }

  Vec operator()(double t) const {
    const std::size_t dim = v_.front().size();
    if (t_.size() == 1) return v_.front();
    Vec num(dim, 0.0);
    double den = 0.0;
    for (std::size_t j = 0; j < t_.size(); ++j) {
      const double d = t - t_[j];
      if (d == 0.0) return v_[j];
      const double c = w_[j] / d;
      den += c;
      for (std::size_t i = 0; i < dim; ++i) num[i] += c * v_[j][i];
    }
    for (double& x : num) x /= den;
    return num;
  }

 private:
  Vec t_;
  std::vector<Vec> v_;
  Vec w_;
};

inline double json_number(const nlohmann::json& j, const char* what) {
  if (!j.is_number()) throw SchemaError(std::string("trajectory: '") + what + "' must be a number");
  return j.get<double>();
}

inline Vec json_vector(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw SchemaError(std::string("trajectory: '") + what + "' must be an array");
  Vec out;
  for (const auto& e : j) out.push_back(json_number(e, what));
  return out;
}

}  // namespace detail

inline CalphaFunction trajectory_from_json(const nlohmann::json& doc) {
  const nlohmann::json& j = doc.contains("trajectory") ? doc.at("trajectory") : doc;
  if (!j.is_object()) throw SchemaError("trajectory: expected a JSON object");
  for (const char* k : {"t0", "t1", "alpha", "x0", "psi_nodes", "psi_values"})
    if (!j.contains(k)) throw SchemaError(std::string("trajectory: missing field '") + k + "'");
  const double t0 = detail::json_number(j.at("t0"), "t0");
  const double t1 = detail::json_number(j.at("t1"), "t1");
  const double alpha = detail::json_number(j.at("alpha"), "alpha");
  if (!(t0 < t1)) throw SchemaError("trajectory: need t0 < t1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw SchemaError("trajectory: alpha must lie in (0,1]");
  const Vec x0 = detail::json_vector(j.at("x0"), "x0");
  if (x0.empty()) throw SchemaError("trajectory: x0 must be nonempty");
  const Vec nodes = detail::json_vector(j.at("psi_nodes"), "psi_nodes");
  const nlohmann::json& vals = j.at("psi_values");
  if (!vals.is_array() || vals.size() != nodes.size())
    throw SchemaError("trajectory: psi_values must have one entry per psi node");
  std::vector<Vec> values;
  for (const auto& row : vals) {
    Vec r = row.is_number() ? Vec{row.get<double>()} : detail::json_vector(row, "psi_values");
    if (r.size() != x0.size()) throw SchemaError("trajectory: psi_values rows must match the dimension of x0");
    for (double v : r)
      if (!std::isfinite(v)) throw SchemaError("trajectory: psi values must be finite");
    values.push_back(std::move(r));
  }
  if (nodes.empty()) throw SchemaError("trajectory: need at least one psi node");
  const double tol = 1e-12 * (t1 - t0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] < t0 - tol || nodes[i] > t1 + tol) throw SchemaError("trajectory: psi node outside [t0,t1]");
    if (i > 0 && nodes[i] < nodes[i - 1]) throw SchemaError("trajectory: psi nodes must be nondecreasing");
  }
  Vec jumps = j.contains("jumps") ? detail::json_vector(j.at("jumps"), "jumps") : Vec{};
  Vec breaks = j.contains("breaks") ? detail::json_vector(j.at("breaks"), "breaks") : Vec{};
  Vec cuts = breaks;
  cuts.insert(cuts.end(), jumps.begin(), jumps.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [&](double a, double b) { return b - a <= tol; }), cuts.end());
  for (double c : cuts)
    if (!(c > t0 + tol && c < t1 - tol)) throw SchemaError("trajectory: breaks and jumps must lie inside (t0,t1)");
  Vec edges{t0};
  edges.insert(edges.end(), cuts.begin(), cuts.end());
  edges.push_back(t1);

  std::vector<PsiPanel> panels;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double a = edges[k], b = edges[k + 1];
    Vec pt;
    std::vector<Vec> pv;
    bool right_taken = false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double t = nodes[i];
      if (t < a - tol || t > b + tol) continue;
      if (std::abs(t - a) <= tol) {
        // the last copy at the left edge carries the right limit
        if (!pt.empty()) {
          pv.back() = values[i];
          continue;
        }
      } else if (std::abs(t - b) <= tol) {
        // the first copy at the right edge carries the left limit
        if (right_taken) continue;
        right_taken = true;
      }
      pt.push_back(t);
      pv.push_back(values[i]);
    }
    if (pt.empty()) throw SchemaError("trajectory: a piece of psi has no nodes");
    auto interp = std::make_shared<detail::NodalInterp>(pt, pv);
    panels.push_back({a, b, [interp](double t) { return (*interp)(t); }});
  }
  return CalphaFunction(t0, t1, alpha, x0, std::move(panels), jumps);
}

inline CalphaFunction load_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open trajectory '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("trajectory: invalid JSON: ") + e.what());
  }
  return trajectory_from_json(doc);
}

/// Samples psi at Chebyshev-Lobatto nodes on each panel; a panel ending at t1
/// is split geometrically toward t1 so endpoint singularities stay resolved.
inline nlohmann::json trajectory_to_json(const CalphaFunction& x, int per_piece = 17, int layers = 14) {
  nlohmann::json j;
  j["t0"] = x.t0();
  j["t1"] = x.t1();
  j["alpha"] = x.alpha();
  j["x0"] = x.x0();
  Vec nodes;
  std::vector<Vec> values;
  Vec breaks;
  for (std::size_t k = 0; k < x.panels().size(); ++k) {
    const PsiPanel& pnl = x.panels()[k];
    Vec edges{pnl.a};
    if (k + 1 == x.panels().size()) {
      for (int l = 1; l <= layers; ++l) edges.push_back(pnl.b - (pnl.b - pnl.a) * std::pow(0.25, l));
      std::sort(edges.begin(), edges.end());
    }
    edges.push_back(pnl.b);
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      if (e > 0) breaks.push_back(edges[e]);
      for (double t : chebyshev_lobatto(static_cast<std::size_t>(per_piece), edges[e], edges[e + 1])) {
        Vec v = pnl.psi(t);
        for (double c : v)
          if (!std::isfinite(c)) throw DomainError("trajectory_to_json: psi is not finite at a sample node");
        nodes.push_back(t);
        values.push_back(std::move(v));
      }
    }
    if (k + 1 < x.panels().size() && !x.is_jump(pnl.b)) breaks.push_back(pnl.b);
  }
  j["psi_nodes"] = nodes;
  j["psi_values"] = values;
  j["jumps"] = x.jumps();
  j["breaks"] = breaks;
  return j;
}

}  // namespace fvc
