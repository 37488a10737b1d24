#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "arw/cli.hpp"
#include "arw/errors.hpp"

namespace arw::cli {
namespace {

struct RawValue {
  std::string text;
  int line = 0;
  int column = 0;
};

using RawConfig = std::map<std::string, std::map<std::string, RawValue>>;

const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"experiment", {"d", "sequence", "n", "n_min", "n_max", "policy", "trials", "master_seed", "epsilons",
                      "epsilon_mode"}},
      {"grid", {"m_policy", "M", "K"}},
      {"run", {"parallelism", "memory_budget_mb"}},
      {"output", {"csv", "report", "plots", "timing"}},
  };
  return keys;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

// Position of the first non-space at or after `from`, 0-based.
std::size_t skip_space(const std::string& s, std::size_t from) {
  while (from < s.size() && is_space(s[from])) ++from;
  return from;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

bool valid_name(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

RawConfig parse_raw(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip a comment that is not inside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    const std::size_t start = skip_space(line, 0);
    if (start == line.size()) continue;
    const int col = static_cast<int>(start) + 1;
    if (line[start] == '[') {
      const auto close = line.find(']', start);
      if (close == std::string::npos) throw ConfigParseError("unterminated section header", line_no, static_cast<int>(line.size()) + 1);
      if (skip_space(line, close + 1) != line.size()) {
        throw ConfigParseError("unexpected text after section header", line_no, static_cast<int>(skip_space(line, close + 1)) + 1);
      }
      section = trim(line.substr(start + 1, close - start - 1));
      if (!valid_name(section)) throw ConfigParseError("invalid section name", line_no, col + 1);
      if (raw.count(section)) throw ConfigParseError("duplicate section [" + section + "]", line_no, col);
      raw[section];
      continue;
    }
    const auto eq = line.find('=', start);
    if (eq == std::string::npos) throw ConfigParseError("expected 'key = value'", line_no, static_cast<int>(line.size()) + 1);
    const std::string key = trim(line.substr(start, eq - start));
    if (!valid_name(key)) throw ConfigParseError("invalid key", line_no, col);
    if (section.empty()) throw ConfigParseError("key '" + key + "' outside of a section", line_no, col);
    const std::size_t vstart = skip_space(line, eq + 1);
    std::string value = trim(line.substr(std::min(vstart, line.size())));
    if (!value.empty() && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') {
        throw ConfigParseError("unterminated string", line_no, static_cast<int>(vstart) + 1);
      }
      value = value.substr(1, value.size() - 2);
    }
    auto& entries = raw[section];
    if (entries.count(key)) throw ConfigParseError("duplicate key '" + key + "'", line_no, col);
    entries[key] = {value, line_no, static_cast<int>(vstart) + 1};
  }
  return raw;
}

class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  const RawValue* find(const std::string& section, const std::string& key) const {
    auto s = raw_.find(section);
    if (s == raw_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  static std::string path(const std::string& section, const std::string& key) { return section + "." + key; }

  template <typename Int>
  bool integer(const std::string& section, const std::string& key, Int& out) const {
    const RawValue* v = find(section, key);
    if (!v) return false;
    out = parse_integer<Int>(v->text, path(section, key));
    return true;
  }

  bool real(const std::string& section, const std::string& key, double& out) const {
    const RawValue* v = find(section, key);
    if (!v) return false;
    out = parse_real(v->text, path(section, key));
    return true;
  }

  bool string(const std::string& section, const std::string& key, std::string& out) const {
    const RawValue* v = find(section, key);
    if (!v) return false;
    out = v->text;
    return true;
  }

  bool boolean(const std::string& section, const std::string& key, bool& out) const {
    const RawValue* v = find(section, key);
    if (!v) return false;
    if (v->text == "true") {
      out = true;
    } else if (v->text == "false") {
      out = false;
    } else {
      throw ValidationError(path(section, key), "expected true or false, got '" + v->text + "'");
    }
    return true;
  }

  template <typename T, typename F>
  bool list(const std::string& section, const std::string& key, std::vector<T>& out, F&& parse) const {
    const RawValue* v = find(section, key);
    if (!v) return false;
    out.clear();
    std::string item;
    std::istringstream in(v->text);
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) throw ValidationError(path(section, key), "empty list entry");
      out.push_back(parse(item, path(section, key)));
    }
    if (out.empty()) throw ValidationError(path(section, key), "empty list");
    return true;
  }

  template <typename Int>
  static Int parse_integer(const std::string& text, const std::string& field) {
    Int value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ValidationError(field, "expected an integer, got '" + text + "'");
    }
    return value;
  }

  static double parse_real(const std::string& text, const std::string& field) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
      throw ValidationError(field, "expected a number, got '" + text + "'");
    }
    return value;
  }

 private:
  const RawConfig& raw_;
};

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& values, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt(values[i]);
  }
  return out;
}

ExperimentConfig validate(const RawConfig& raw) {
  for (const auto& [section, entries] : raw) {
    auto s = schema().find(section);
    if (s == schema().end()) throw ValidationError(section, "unknown section");
    for (const auto& [key, value] : entries) {
      if (std::find(s->second.begin(), s->second.end(), key) == s->second.end()) {
        throw ValidationError(section + "." + key, "unknown key");
      }
    }
  }

  const Reader r(raw);
  ExperimentConfig c;
  if (!r.integer("experiment", "d", c.d)) throw ValidationError("experiment.d", "missing");
  if (c.d < 2 || c.d > 6) throw ValidationError("experiment.d", "must be in [2, 6]");

  const bool has_n = r.list("experiment", "n", c.n, [](const std::string& s, const std::string& f) {
    return Reader::parse_integer<std::int64_t>(s, f);
  });
  const bool has_range = r.integer("experiment", "n_min", c.n_min) | r.integer("experiment", "n_max", c.n_max);
  if (!r.string("experiment", "sequence", c.sequence)) c.sequence = has_n ? "list" : (has_range ? "range" : "list");
  if (c.sequence == "list") {
    if (!has_n) throw ValidationError("experiment.n", "missing");
    for (auto n : c.n) {
      if (n < 1) throw ValidationError("experiment.n", "entries must be positive");
    }
    if (has_range) throw ValidationError("experiment.n_min", "only used with sequence = range");
  } else if (c.sequence == "range") {
    if (has_n) throw ValidationError("experiment.n", "only used with sequence = list");
    if (c.n_min < 1) throw ValidationError("experiment.n_min", "must be positive");
    if (c.n_max < c.n_min) throw ValidationError("experiment.n_max", "must be at least n_min");
    r.string("experiment", "policy", c.policy);
    try {
      lattice::parse_policy(c.policy);
    } catch (const UnknownPolicy&) {
      throw ValidationError("experiment.policy", "unknown policy '" + c.policy + "'");
    }
  } else if (c.sequence == "builtin") {
    if (has_n || has_range) throw ValidationError("experiment.sequence", "builtin takes no n values");
    if (c.d != 2) throw ValidationError("experiment.sequence", "builtin is defined for d = 2 only");
  } else {
    throw ValidationError("experiment.sequence", "expected list, range or builtin");
  }
  if (c.sequence != "range" && r.find("experiment", "policy")) {
    throw ValidationError("experiment.policy", "only used with sequence = range");
  }

  if (!r.integer("experiment", "trials", c.trials)) throw ValidationError("experiment.trials", "missing");
  if (c.trials < 1) throw ValidationError("experiment.trials", "must be at least 1");
  r.integer("experiment", "master_seed", c.master_seed);
  r.list("experiment", "epsilons", c.epsilons, [](const std::string& s, const std::string& f) {
    const double v = Reader::parse_real(s, f);
    if (!(v > 0.0)) throw ValidationError(f, "entries must be positive");
    return v;
  });
  r.string("experiment", "epsilon_mode", c.epsilon_mode);
  if (c.epsilon_mode != "relative" && c.epsilon_mode != "absolute") {
    throw ValidationError("experiment.epsilon_mode", "expected relative or absolute");
  }

  std::string m_policy = "per_L";
  r.string("grid", "m_policy", m_policy);
  experiments::MPolicy::Kind kind;
  try {
    kind = experiments::parse_m_policy(m_policy);
  } catch (const UnknownPolicy&) {
    throw ValidationError("grid.m_policy", "expected fixed, per_L or auto_refine");
  }
  int M = 0, K = 16;
  const bool has_M = r.integer("grid", "M", M);
  r.integer("grid", "K", K);
  if (kind == experiments::MPolicy::Kind::fixed) {
    if (!has_M) throw ValidationError("grid.M", "missing (required by m_policy = fixed)");
    if (M < 1) throw ValidationError("grid.M", "must be positive");
    c.m_policy = experiments::MPolicy::fixed(M);
  } else {
    if (has_M) throw ValidationError("grid.M", "only used with m_policy = fixed");
    if (K < 1) throw ValidationError("grid.K", "must be positive");
    c.m_policy = kind == experiments::MPolicy::Kind::per_L ? experiments::MPolicy::per_L(K)
                                                           : experiments::MPolicy::auto_refine(K);
  }

  if (r.integer("run", "parallelism", c.parallelism) && c.parallelism < 1) {
    throw ValidationError("run.parallelism", "must be at least 1");
  }
  if (r.real("run", "memory_budget_mb", c.memory_budget_mb) && c.memory_budget_mb < 0.0) {
    throw ValidationError("run.memory_budget_mb", "must be nonnegative");
  }

  r.string("output", "csv", c.csv);
  if (c.csv.empty()) throw ValidationError("output.csv", "must not be empty");
  r.string("output", "report", c.report);
  if (c.report.empty()) throw ValidationError("output.report", "must not be empty");
  r.string("output", "plots", c.plots);
  r.boolean("output", "timing", c.timing);

  // Fixed grids must resolve every requested shell.
  if (kind == experiments::MPolicy::Kind::fixed && c.sequence != "range") {
    for (auto n : c.resolved_n()) {
      if (M < field::min_alias_free_M(n)) {
        throw ValidationError("grid.M", "M = " + std::to_string(M) + " aliases n = " + std::to_string(n));
      }
    }
  }
  return c;
}

}  // namespace

std::vector<std::int64_t> ExperimentConfig::resolved_n() const {
  std::vector<std::int64_t> out;
  if (sequence == "list") {
    out = n;
  } else if (sequence == "builtin") {
    out = experiments::builtin_sequence(d);
  } else {
    out = lattice::admissible_sequence(d, n_min, n_max, lattice::parse_policy(policy));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::filesystem::path ExperimentConfig::output_path(const std::string& relative) const {
  const std::filesystem::path p(relative);
  return p.is_absolute() ? p : base_dir / p;
}

ExperimentConfig parse_config(const std::string& text, const Overrides& overrides) {
  RawConfig raw = parse_raw(text);
  for (const auto& [path, value] : overrides) {
    const auto dot = path.find('.');
    if (dot == std::string::npos) throw ValidationError(path, "override must name section.key");
    raw[path.substr(0, dot)][path.substr(dot + 1)] = {value, 0, 0};
  }
  return validate(raw);
}

ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  ExperimentConfig c = parse_config(text.str(), overrides);
  c.base_dir = path.parent_path();
  return c;
}

std::string canonical(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[experiment]\n";
  out << "d = " << c.d << "\n";
  out << "sequence = " << c.sequence << "\n";
  if (c.sequence == "list") out << "n = " << join(c.n, [](std::int64_t v) { return std::to_string(v); }) << "\n";
  if (c.sequence == "range") {
    out << "n_min = " << c.n_min << "\n";
    out << "n_max = " << c.n_max << "\n";
    out << "policy = " << c.policy << "\n";
  }
  out << "trials = " << c.trials << "\n";
  out << "master_seed = " << c.master_seed << "\n";
  out << "epsilons = " << join(c.epsilons, format_real) << "\n";
  out << "epsilon_mode = " << c.epsilon_mode << "\n";
  out << "\n[grid]\n";
  out << "m_policy = " << experiments::to_string(c.m_policy.kind) << "\n";
  if (c.m_policy.kind == experiments::MPolicy::Kind::fixed) {
    out << "M = " << c.m_policy.M << "\n";
  } else {
    out << "K = " << c.m_policy.K << "\n";
  }
  out << "\n[run]\n";
  out << "parallelism = " << c.parallelism << "\n";
  out << "memory_budget_mb = " << format_real(c.memory_budget_mb) << "\n";
  out << "\n[output]\n";
  out << "csv = \"" << c.csv << "\"\n";
  out << "report = \"" << c.report << "\"\n";
  out << "plots = \"" << c.plots << "\"\n";
  out << "timing = " << (c.timing ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace arw::cli
