#include "rsw/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace rsw {

namespace {

struct BadType {
  std::string what;
};
struct BadValue {
  std::string what;
};

struct Entry {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) throw BadType{"expected a number, got '" + s + "'"};
  return v;
}

std::uint64_t to_unsigned(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw BadType{"expected a non-negative integer, got '" + s + "'"};
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw BadType{"expected true or false, got '" + s + "'"};
}

std::vector<double> to_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  if (out.empty()) throw BadType{"expected a comma separated list of numbers"};
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

using Check = std::function<void(double)>;

void positive(double v) {
  if (!(v > 0.0)) throw BadValue{"must be positive"};
}
void non_negative(double v) {
  if (!(v >= 0.0)) throw BadValue{"must be non-negative"};
}
void finite(double v) {
  if (!std::isfinite(v)) throw BadValue{"must be finite"};
}

Entry real(std::string key, double& (*field)(RunConfig&), Check check) {
  return {key,
          [field, check](RunConfig& c, const std::string& s) {
            const double v = to_double(s);
            finite(v);
            check(v);
            field(c) = v;
          },
          [field](const RunConfig& c) { return fmt(field(const_cast<RunConfig&>(c))); }};
}

Entry count(std::string key, std::size_t& (*field)(RunConfig&), std::size_t min) {
  return {key,
          [field, min](RunConfig& c, const std::string& s) {
            const auto v = to_unsigned(s);
            if (v < min) throw BadValue{"must be at least " + std::to_string(min)};
            field(c) = static_cast<std::size_t>(v);
          },
          [field](const RunConfig& c) { return std::to_string(field(const_cast<RunConfig&>(c))); }};
}

Entry list(std::string key, std::vector<double>& (*field)(RunConfig&)) {
  return {key,
          [field](RunConfig& c, const std::string& s) {
            auto v = to_list(s);
            for (double x : v) {
              finite(x);
              non_negative(x);
            }
            field(c) = std::move(v);
          },
          [field](const RunConfig& c) { return fmt_list(field(const_cast<RunConfig&>(c))); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back(real("horizon", [](RunConfig& c) -> double& { return c.horizon; }, positive));
    t.push_back({"seed", [](RunConfig& c, const std::string& s) { c.seed = to_unsigned(s); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    t.push_back({"grid.n",
                 [](RunConfig& c, const std::string& s) {
                   const auto v = to_unsigned(s);
                   if (v < 8 || v % 2 != 0) throw BadValue{"must be even and at least 8"};
                   c.grid.n = static_cast<std::size_t>(v);
                 },
                 [](const RunConfig& c) { return std::to_string(c.grid.n); }});
    t.push_back(real("grid.length", [](RunConfig& c) -> double& { return c.grid.length; }, positive));
    t.push_back(real("params.g", [](RunConfig& c) -> double& { return c.params.g; }, positive));
    t.push_back(real("params.h_bar", [](RunConfig& c) -> double& { return c.params.h_bar; }, positive));
    t.push_back(real("params.eps", [](RunConfig& c) -> double& { return c.params.eps; }, non_negative));
    t.push_back({"coriolis.profile",
                 [](RunConfig& c, const std::string& s) {
                   if (s != "constant" && s != "sine") throw BadValue{"must be 'constant' or 'sine'"};
                   c.coriolis.profile = s;
                 },
                 [](const RunConfig& c) { return c.coriolis.profile; }});
    t.push_back(real("coriolis.f0", [](RunConfig& c) -> double& { return c.coriolis.f0; }, [](double) {}));
    t.push_back(real("coriolis.f1", [](RunConfig& c) -> double& { return c.coriolis.f1; }, [](double) {}));
    t.push_back({"init.kind",
                 [](RunConfig& c, const std::string& s) {
                   try {
                     c.init.kind = parse_initial_kind(s);
                   } catch (const InvalidArgument&) {
                     throw BadValue{"must be gaussian_bump, sine, two_bump or simple_wave"};
                   }
                 },
                 [](const RunConfig& c) { return to_string(c.init.kind); }});
    t.push_back(real("init.amplitude", [](RunConfig& c) -> double& { return c.init.amplitude; }, non_negative));
    t.push_back(real("init.width", [](RunConfig& c) -> double& { return c.init.width; }, positive));
    t.push_back({"init.modes",
                 [](RunConfig& c, const std::string& s) {
                   const auto v = to_unsigned(s);
                   if (v < 1 || v > 1u << 20) throw BadValue{"must be a positive mode count"};
                   c.init.modes = static_cast<int>(v);
                 },
                 [](const RunConfig& c) { return std::to_string(c.init.modes); }});
    t.push_back({"solver.kind",
                 [](RunConfig& c, const std::string& s) {
                   if (s == "lines") {
                     c.solver.kind = SolverKind::Lines;
                   } else if (s == "mild") {
                     c.solver.kind = SolverKind::Mild;
                   } else {
                     throw BadValue{"must be 'lines' or 'mild'"};
                   }
                 },
                 [](const RunConfig& c) { return std::string(c.solver.kind == SolverKind::Lines ? "lines" : "mild"); }});
    t.push_back(real("solver.cfl", [](RunConfig& c) -> double& { return c.solver.step.cfl; }, [](double v) {
      if (!(v > 0.0 && v <= 1.0)) throw BadValue{"must lie in (0, 1]"};
    }));
    t.push_back(real("solver.dt_max", [](RunConfig& c) -> double& { return c.solver.step.dt_max; }, positive));
    t.push_back(count("solver.sample_every", [](RunConfig& c) -> std::size_t& { return c.solver.step.sample_every; }, 1));
    t.push_back({"solver.fixed_step", [](RunConfig& c, const std::string& s) { c.solver.step.fixed_step = to_bool(s); },
                 [](const RunConfig& c) { return std::string(c.solver.step.fixed_step ? "true" : "false"); }});
    t.push_back(real("solver.window_constant", [](RunConfig& c) -> double& { return c.solver.window_constant; }, positive));
    t.push_back(count("solver.window_intervals", [](RunConfig& c) -> std::size_t& { return c.solver.window_intervals; }, 1));
    t.push_back(real("solver.tol", [](RunConfig& c) -> double& { return c.solver.tol; }, positive));
    t.push_back(count("solver.max_iter", [](RunConfig& c) -> std::size_t& { return c.solver.max_iter; }, 1));
    t.push_back(list("study.eps_list", [](RunConfig& c) -> std::vector<double>& { return c.study.eps_list; }));
    t.push_back(real("study.eps_ref", [](RunConfig& c) -> double& { return c.study.eps_ref; }, non_negative));
    t.push_back(list("study.delta_list", [](RunConfig& c) -> std::vector<double>& { return c.study.delta_list; }));
    t.push_back(list("study.amplitudes", [](RunConfig& c) -> std::vector<double>& { return c.study.amplitudes; }));
    t.push_back(real("study.a_large", [](RunConfig& c) -> double& { return c.study.a_large; }, positive));
    t.push_back(count("study.bisect_steps", [](RunConfig& c) -> std::size_t& { return c.study.bisect_steps; }, 0));
    t.push_back({"output.dir", [](RunConfig& c, const std::string& s) { c.output_dir = s; },
                 [](const RunConfig& c) { return c.output_dir; }});
    return t;
  }();
  return table;
}

const Entry* find_entry(const std::string& key) {
  for (const auto& e : entries()) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

// Dotted name, or the unique entry whose last component equals key.
const Entry* resolve_override(const std::string& key) {
  if (const Entry* e = find_entry(key)) return e;
  std::vector<const Entry*> hits;
  for (const auto& e : entries()) {
    const auto dot = e.key.rfind('.');
    if (dot != std::string::npos && e.key.substr(dot + 1) == key) hits.push_back(&e);
  }
  if (hits.size() > 1) {
    std::string names;
    for (const Entry* e : hits) names += (names.empty() ? "" : ", ") + e->key;
    throw ConfigError("override key '" + key + "' is ambiguous: " + names);
  }
  return hits.empty() ? nullptr : hits.front();
}

void apply(const Entry& e, RunConfig& cfg, const std::string& value, const std::string& source, std::size_t line,
           std::size_t column) {
  try {
    e.set(cfg, unquote(value));
  } catch (const BadType& b) {
    throw TypeError(source, line, column, e.key, b.what);
  } catch (const BadValue& b) {
    throw ValidationError(e.key, b.what);
  }
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& e : entries()) out.push_back(e.key);
  return out;
}

RunConfig parse_config_text(const std::string& text, const std::string& source,
                            const std::vector<std::string>& overrides, const ConfigOptions& opts) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string line = raw;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    }
    const std::string body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(body.substr(1, body.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::size_t column = line.find_first_not_of(" \t", eq + 1) == std::string::npos
                                   ? eq + 2
                                   : line.find_first_not_of(" \t", eq + 1) + 1;
    const std::string key = section.empty() ? name : section + "." + name;
    const Entry* e = find_entry(key);
    if (!e) {
      if (opts.strict) throw UnknownKey(source, line_no, key);
      if (opts.warnings) opts.warnings->push_back(source + ":" + std::to_string(line_no) + ": ignored key '" + key + "'");
      continue;
    }
    if (!seen.insert(key).second) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    apply(*e, cfg, value, source, line_no, column);
  }

  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    const std::string name = trim(o.substr(0, eq));
    const Entry* e = resolve_override(name);
    if (!e) throw UnknownKey("override '" + o + "'", 1, name);
    apply(*e, cfg, trim(o.substr(eq + 1)), "override '" + o + "'", 1, eq + 2);
    seen.insert(e->key);
  }

  for (const char* required : {"grid.n", "params.eps", "horizon"}) {
    if (!seen.count(required)) throw MissingKey(required);
  }
  try {
    cfg.validate();
  } catch (const InvalidArgument& err) {
    const bool mild_eps = cfg.solver.kind == SolverKind::Mild && !(cfg.params.eps > 0.0);
    throw ValidationError(mild_eps ? "params.eps" : "config", err.what());
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                       const ConfigOptions& opts) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str(), path.string(), overrides, opts);
}

std::string to_config_text(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& e : entries()) {
    const auto dot = e.key.find('.');
    const std::string sec = dot == std::string::npos ? "" : e.key.substr(0, dot);
    const std::string name = dot == std::string::npos ? e.key : e.key.substr(dot + 1);
    if (sec != section) {
      out += "\n[" + sec + "]\n";
      section = sec;
    }
    out += name + " = " + e.get(cfg) + "\n";
  }
  return out;
}

}  // namespace rsw
