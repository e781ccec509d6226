#include "skewlab/experiment/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

namespace skewlab::experiment {
namespace {

struct Value {
  enum class Kind { kInt, kReal, kBool, kString, kList };
  Kind kind = Kind::kString;
  std::int64_t i = 0;
  std::uint64_t u = 0;  // set with `big` for integers above the int64 range
  bool big = false;
  double r = 0.0;
  bool b = false;
  std::string s;
  std::vector<Value> items;

  bool numeric() const { return kind == Kind::kInt || kind == Kind::kReal; }
  double as_real() const {
    if (kind != Kind::kInt) return r;
    return big ? static_cast<double>(u) : static_cast<double>(i);
  }
};

struct SyntaxError {
  int column;
  std::string message;
};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : t_(text) {}

  Value value() {
    skip_space();
    if (at_end()) fail("expected a value");
    const char c = t_[p_];
    if (c == '"') return string();
    if (c == '[') return list();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return word();
    fail(std::string("unexpected character '") + c + "'");
  }

  void finish() {
    skip_space();
    if (!at_end() && t_[p_] != '#') fail("unexpected text after the value");
  }

 private:
  [[noreturn]] void fail(std::string msg) const { throw SyntaxError{static_cast<int>(p_) + 1, std::move(msg)}; }
  bool at_end() const { return p_ >= t_.size(); }
  void skip_space() {
    while (!at_end() && (t_[p_] == ' ' || t_[p_] == '\t')) ++p_;
  }

  Value string() {
    Value v;
    ++p_;
    while (true) {
      if (at_end()) fail("unterminated string");
      const char c = t_[p_++];
      if (c == '"') break;
      if (c == '\\') {
        if (at_end()) fail("unterminated string");
        const char e = t_[p_++];
        if (e != '"' && e != '\\') fail("unknown escape");
        v.s += e;
      } else {
        v.s += c;
      }
    }
    return v;
  }

  Value word() {
    const std::size_t start = p_;
    while (!at_end() && word_char(t_[p_])) ++p_;
    Value v;
    const std::string_view w = t_.substr(start, p_ - start);
    if (w == "true" || w == "false") {
      v.kind = Value::Kind::kBool;
      v.b = w == "true";
    } else {
      v.s = std::string(w);
    }
    return v;
  }

  Value number() {
    const std::size_t start = p_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(t_[p_])) || t_[p_] == '+' ||
                         t_[p_] == '-' || t_[p_] == '.'))
      ++p_;
    const std::string_view tok = t_.substr(start, p_ - start);
    const char* first = tok.data() + (tok.front() == '+' ? 1 : 0);
    const char* last = tok.data() + tok.size();
    Value v;
    v.kind = Value::Kind::kInt;
    auto [pi, ei] = std::from_chars(first, last, v.i);
    if (ei == std::errc() && pi == last) return v;
    if (ei == std::errc::result_out_of_range && *first != '-') {
      auto [pu, eu] = std::from_chars(first, last, v.u);
      if (eu == std::errc() && pu == last) {
        v.big = true;
        return v;
      }
    }
    v.kind = Value::Kind::kReal;
    auto [pr, er] = std::from_chars(first, last, v.r);
    if (er != std::errc() || pr != last || !std::isfinite(v.r)) {
      p_ = start;
      fail("malformed number '" + std::string(tok) + "'");
    }
    return v;
  }

  Value list() {
    Value v;
    v.kind = Value::Kind::kList;
    ++p_;
    skip_space();
    if (!at_end() && t_[p_] == ']') {
      ++p_;
      return v;
    }
    while (true) {
      skip_space();
      const std::size_t at = p_;
      Value item = value();
      if (!item.numeric()) {
        p_ = at;
        fail("list items must be numbers");
      }
      v.items.push_back(std::move(item));
      skip_space();
      if (at_end()) fail("unterminated list");
      if (t_[p_] == ']') {
        ++p_;
        return v;
      }
      if (t_[p_] != ',') fail("expected ',' or ']'");
      ++p_;
    }
  }

  std::string_view t_;
  std::size_t p_ = 0;
};

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

using Setter = std::function<std::optional<std::string>(ExperimentConfig&, const Value&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  std::string section;
  std::string key;
  bool is_string = false;
  Setter set;
  Getter get;

  std::string path() const { return section + "." + key; }
};

template <class Ref>
Field int_field(std::string section, std::string key, Ref ref, std::int64_t lo, std::int64_t hi) {
  return {std::move(section), std::move(key), false,
          [ref, lo, hi](ExperimentConfig& c, const Value& v) -> std::optional<std::string> {
            if (v.kind != Value::Kind::kInt) return "expected an integer";
            if (v.big || v.i < lo || v.i > hi)
              return "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
            ref(c) = v.i;
            return std::nullopt;
          },
          [ref](const ExperimentConfig& c) {
            return std::to_string(ref(const_cast<ExperimentConfig&>(c)));
          }};
}

// Real in (lo, hi] when lo_open, [lo, hi] otherwise; hi_open makes hi exclusive.
template <class Ref>
Field real_field(std::string section, std::string key, Ref ref, double lo, bool lo_open, double hi,
                 bool hi_open = false) {
  return {std::move(section), std::move(key), false,
          [=](ExperimentConfig& c, const Value& v) -> std::optional<std::string> {
            if (!v.numeric()) return "expected a number";
            const double x = v.as_real();
            const bool ok = (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
            if (!ok) {
              std::ostringstream os;
              os << "must be in " << (lo_open ? '(' : '[') << lo << ", " << hi << (hi_open ? ')' : ']');
              if (lo == 0.0 && lo_open && std::isinf(hi)) return std::string("must be > 0");
              return os.str();
            }
            ref(c) = x;
            return std::nullopt;
          },
          [ref](const ExperimentConfig& c) { return format_real(ref(const_cast<ExperimentConfig&>(c))); }};
}

template <class Ref>
Field choice_field(std::string section, std::string key, Ref ref, const std::vector<std::string>& choices) {
  return {std::move(section), std::move(key), true,
          [ref, &choices](ExperimentConfig& c, const Value& v) -> std::optional<std::string> {
            if (v.kind != Value::Kind::kString) return "expected a string";
            if (std::find(choices.begin(), choices.end(), v.s) == choices.end()) {
              std::string all;
              for (const auto& ch : choices) all += (all.empty() ? "" : ", ") + ch;
              return "unknown value '" + v.s + "' (expected one of " + all + ")";
            }
            ref(c) = v.s;
            return std::nullopt;
          },
          [ref](const ExperimentConfig& c) { return quote(ref(const_cast<ExperimentConfig&>(c))); }};
}

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kBig = std::int64_t{1} << 40;

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(choice_field("system", "family", [](ExperimentConfig& c) -> auto& { return c.system.family; },
                             kFamilies));
    f.push_back(real_field("system", "a", [](ExperimentConfig& c) -> auto& { return c.system.a; }, 0.0, true, 2.0));
    f.push_back(real_field("system", "coupling",
                           [](ExperimentConfig& c) -> auto& { return c.system.coupling; }, 0.0, true, 1.0));
    f.push_back(int_field("system", "degree", [](ExperimentConfig& c) -> auto& { return c.system.degree; }, 2, 64));

    const std::string e = "experiment";
    f.push_back(choice_field(e, "name", [](ExperimentConfig& c) -> auto& { return c.name; }, kExperiments));
    f.push_back({e, "seed", false,
                 [](ExperimentConfig& c, const Value& v) -> std::optional<std::string> {
                   if (v.kind != Value::Kind::kInt) return "expected an integer";
                   if (v.big) {
                     c.seed = v.u;
                     return std::nullopt;
                   }
                   if (v.i < 0) return "must be >= 0";
                   c.seed = static_cast<std::uint64_t>(v.i);
                   return std::nullopt;
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); }});
    f.push_back(int_field(e, "n", [](ExperimentConfig& c) -> auto& { return c.n; }, 1, kBig));
    f.push_back(int_field(e, "samples", [](ExperimentConfig& c) -> auto& { return c.samples; }, 1, kBig));
    f.push_back(int_field(e, "grid", [](ExperimentConfig& c) -> auto& { return c.grid; }, 2, 1 << 20));
    f.push_back(int_field(e, "theta_grid", [](ExperimentConfig& c) -> auto& { return c.theta_grid; }, 1, 1 << 16));
    f.push_back(real_field(e, "theta", [](ExperimentConfig& c) -> auto& { return c.theta; }, 0.0, false, 1.0, true));
    f.push_back(real_field(e, "delta", [](ExperimentConfig& c) -> auto& { return c.delta; }, 0.0, true, kInf));
    f.push_back(real_field(e, "lambda", [](ExperimentConfig& c) -> auto& { return c.lambda; }, 0.0, true, kInf));
    f.push_back(real_field(e, "delta_tilde", [](ExperimentConfig& c) -> auto& { return c.delta_tilde; }, 0.0, true, kInf));
    f.push_back(real_field(e, "eps", [](ExperimentConfig& c) -> auto& { return c.eps; }, 0.0, true, kInf));
    f.push_back(real_field(e, "alpha", [](ExperimentConfig& c) -> auto& { return c.alpha; }, 0.0, true, kInf));
    f.push_back(real_field(e, "threshold", [](ExperimentConfig& c) -> auto& { return c.threshold; }, 0.0, true, kInf));
    f.push_back(real_field(e, "c1", [](ExperimentConfig& c) -> auto& { return c.c1; }, -kInf, true, kInf));
    f.push_back(real_field(e, "c2", [](ExperimentConfig& c) -> auto& { return c.c2; }, -kInf, true, kInf));
    f.push_back({e, "n_list", false,
                 [](ExperimentConfig& c, const Value& v) -> std::optional<std::string> {
                   if (v.kind != Value::Kind::kList) return "expected a list of integers";
                   if (v.items.empty()) return "must not be empty";
                   std::vector<std::int64_t> out;
                   for (const auto& it : v.items) {
                     if (it.kind != Value::Kind::kInt || it.big || it.i < 1) return "items must be integers >= 1";
                     out.push_back(it.i);
                   }
                   c.n_list = std::move(out);
                   return std::nullopt;
                 },
                 [](const ExperimentConfig& c) {
                   std::string s = "[";
                   for (std::size_t i = 0; i < c.n_list.size(); ++i)
                     s += (i ? ", " : "") + std::to_string(c.n_list[i]);
                   return s + "]";
                 }});
    f.push_back({e, "deltas", false,
                 [](ExperimentConfig& c, const Value& v) -> std::optional<std::string> {
                   if (v.kind != Value::Kind::kList) return "expected a list of numbers";
                   std::vector<double> out;
                   for (const auto& it : v.items) {
                     if (!(it.as_real() > 0.0)) return "items must be > 0";
                     out.push_back(it.as_real());
                   }
                   c.deltas = std::move(out);
                   return std::nullopt;
                 },
                 [](const ExperimentConfig& c) {
                   std::string s = "[";
                   for (std::size_t i = 0; i < c.deltas.size(); ++i)
                     s += (i ? ", " : "") + format_real(c.deltas[i]);
                   return s + "]";
                 }});
    f.push_back(int_field(e, "depth", [](ExperimentConfig& c) -> auto& { return c.depth; }, 0, 30));
    f.push_back(int_field(e, "k_max", [](ExperimentConfig& c) -> auto& { return c.k_max; }, 1, 10000));
    f.push_back(int_field(e, "seeds", [](ExperimentConfig& c) -> auto& { return c.seeds; }, 1, kBig));
    f.push_back(int_field(e, "probes", [](ExperimentConfig& c) -> auto& { return c.probes; }, 1, kBig));
    f.push_back(int_field(e, "threads", [](ExperimentConfig& c) -> auto& { return c.threads; }, 1, 256));

    f.push_back({"output", "dir", true,
                 [](ExperimentConfig& c, const Value& v) -> std::optional<std::string> {
                   if (v.kind != Value::Kind::kString) return "expected a string";
                   if (v.s.empty()) return "must not be empty";
                   c.out = v.s;
                   return std::nullopt;
                 },
                 [](const ExperimentConfig& c) { return quote(c.out); }});
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields())
    if (f.section == section && f.key == key) return &f;
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string describe(const std::vector<ConfigIssue>& issues) {
  std::string out;
  for (const auto& i : issues) {
    if (!out.empty()) out += "; ";
    if (!i.path.empty()) out += i.path + " ";
    if (i.line > 0) out += "(line " + std::to_string(i.line) + ", column " + std::to_string(i.column) + ") ";
    out += i.message;
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(ErrorCode code, std::vector<ConfigIssue> issues)
    : Error(code, describe(issues)), issues_(std::move(issues)) {}

ExperimentConfig parse_config(std::string_view text, const Overrides& overrides) {
  ExperimentConfig cfg;
  std::vector<ConfigIssue> issues;
  std::set<std::string> seen;
  std::string section;
  int line_no = 0;

  auto apply = [&](const Field& f, const Value& v, int line, int col) {
    if (auto err = f.set(cfg, v)) issues.push_back({f.path(), line, col, *err});
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::size_t first = raw.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || raw[first] == '#') continue;
    const int col0 = static_cast<int>(first) + 1;

    if (raw[first] == '[') {
      const std::size_t close = raw.find(']', first);
      if (close == std::string_view::npos)
        throw ConfigError(ErrorCode::kParseError, {{"", line_no, col0, "missing ']'"}});
      const std::string rest = trim(raw.substr(close + 1));
      if (!rest.empty() && rest[0] != '#')
        throw ConfigError(ErrorCode::kParseError,
                          {{"", line_no, static_cast<int>(close) + 2, "unexpected text after section"}});
      section = trim(raw.substr(first + 1, close - first - 1));
      if (section != "system" && section != "experiment" && section != "output")
        issues.push_back({"[" + section + "]", line_no, col0, "unknown section"});
      continue;
    }

    const std::size_t eq = raw.find('=', first);
    if (eq == std::string_view::npos)
      throw ConfigError(ErrorCode::kParseError, {{"", line_no, col0, "expected 'key = value'"}});
    const std::string key = trim(raw.substr(first, eq - first));
    if (key.empty() || !std::all_of(key.begin(), key.end(), word_char))
      throw ConfigError(ErrorCode::kParseError, {{"", line_no, col0, "malformed key"}});

    Value v;
    try {
      Lexer lex(raw.substr(eq + 1));
      v = lex.value();
      lex.finish();
    } catch (const SyntaxError& e) {
      throw ConfigError(ErrorCode::kParseError,
                        {{"", line_no, static_cast<int>(eq) + 1 + e.column, e.message}});
    }

    if (section.empty()) {
      issues.push_back({key, line_no, col0, "key outside of a section"});
      continue;
    }
    const Field* f = find_field(section, key);
    if (!f) {
      issues.push_back({section + "." + key, line_no, col0, "unknown key"});
      continue;
    }
    if (!seen.insert(f->path()).second) {
      issues.push_back({f->path(), line_no, col0, "duplicate key"});
      continue;
    }
    apply(*f, v, line_no, static_cast<int>(eq) + 2);
  }

  for (const auto& [name, text_value] : overrides) {
    const Field* f = nullptr;
    const auto dot = name.find('.');
    if (dot != std::string::npos) {
      f = find_field(name.substr(0, dot), name.substr(dot + 1));
    } else {
      for (const auto& cand : fields())
        if (cand.key == name) f = &cand;
    }
    if (!f) {
      issues.push_back({name, 0, 0, "unknown key"});
      continue;
    }
    Value v;
    if (f->is_string) {
      v.s = text_value;
    } else {
      try {
        Lexer lex(text_value);
        v = lex.value();
        lex.finish();
      } catch (const SyntaxError& e) {
        issues.push_back({f->path(), 0, e.column, e.message});
        continue;
      }
    }
    apply(*f, v, 0, 0);
  }

  if (!issues.empty()) throw ConfigError(ErrorCode::kValidationError, std::move(issues));

  if (!(cfg.c1 < cfg.c2)) issues.push_back({"experiment.c1", 0, 0, "must be below experiment.c2"});
  const bool skew = cfg.system.family == "viana";
  if ((cfg.name == "curve" || cfg.name == "probe") && !skew)
    issues.push_back({"experiment.name", 0, 0, "'" + cfg.name + "' needs the viana family"});
  if (cfg.name == "markov" && skew)
    issues.push_back({"system.family", 0, 0, "markov needs an interval map"});
  if (cfg.name == "components" && cfg.probes < 100)
    issues.push_back({"experiment.probes", 0, 0, "must be >= 100"});
  if (cfg.name == "acim" && cfg.samples < 1000)
    issues.push_back({"experiment.samples", 0, 0, "must be >= 1000"});
  if (!issues.empty()) throw ConfigError(ErrorCode::kValidationError, std::move(issues));
  return cfg;
}

std::string serialize(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.path());
  return keys;
}

}  // namespace skewlab::experiment
