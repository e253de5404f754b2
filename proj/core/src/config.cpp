#include "textplan/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace textplan {

namespace {

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

long long parse_int(const std::string& key, const std::string& raw) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError(key + ": expected integer, got '" + raw + "'");
  }
}

double parse_double(const std::string& key, const std::string& raw) {
  try {
    std::size_t pos = 0;
    double v = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw ConfigError(key + ": expected number, got '" + raw + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& raw) {
  if (raw == "true") return true;
  if (raw == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + raw + "'");
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

#define INT_FIELD(key, expr)                                                    \
  Field {                                                                       \
    key, [](const RunConfig& c) { return std::to_string(c.expr); },             \
        [](RunConfig& c, const std::string& raw) {                              \
          c.expr = static_cast<decltype(c.expr)>(parse_int(key, raw));          \
        }                                                                       \
  }
#define DBL_FIELD(key, expr)                                                    \
  Field {                                                                       \
    key, [](const RunConfig& c) { return fmt_double(c.expr); },                 \
        [](RunConfig& c, const std::string& raw) { c.expr = parse_double(key, raw); } \
  }
#define BOOL_FIELD(key, expr)                                                   \
  Field {                                                                       \
    key, [](const RunConfig& c) { return c.expr ? "true" : "false"; },          \
        [](RunConfig& c, const std::string& raw) { c.expr = parse_bool(key, raw); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      INT_FIELD("run.seed", seed),
      INT_FIELD("run.iterations", iterations),
      BOOL_FIELD("run.no_em", no_em),
      BOOL_FIELD("run.no_init", no_init),
      INT_FIELD("run.threads", threads),
      INT_FIELD("run.plan_cap", plan_cap),
      BOOL_FIELD("run.warm_start", warm_start),
      BOOL_FIELD("run.early_stop", early_stop),
      INT_FIELD("corpus.init_walk_max", walk.init_walk_max),
      INT_FIELD("corpus.walk_min", walk.walk_min),
      INT_FIELD("corpus.walk_max", walk.walk_max),
      INT_FIELD("corpus.goal_min", walk.goal_min),
      INT_FIELD("corpus.goal_max", walk.goal_max),
      INT_FIELD("corpus.node_budget", walk.node_budget),
      INT_FIELD("encoder.embed_dim", encoder.embed_dim),
      INT_FIELD("encoder.hidden_dim", encoder.hidden_dim),
      INT_FIELD("encoder.topics", encoder.topics),
      INT_FIELD("encoder.epochs", encoder.epochs),
      DBL_FIELD("encoder.lr", encoder.lr),
      INT_FIELD("encoder.batch", encoder.batch),
      INT_FIELD("satlearn.restarts", sat.restarts),
      INT_FIELD("satlearn.flips", sat.flips),
      DBL_FIELD("satlearn.noise", sat.noise),
      DBL_FIELD("satlearn.i_weight", sat.i_weight),
      DBL_FIELD("satlearn.g_weight", sat.g_weight),
      DBL_FIELD("satlearn.sparsity", sat.sparsity),
      DBL_FIELD("satlearn.pair_threshold", sat.pair_threshold),
      INT_FIELD("satlearn.max_arity", sat.max_arity),
      INT_FIELD("consensus.epochs", consensus.epochs),
      DBL_FIELD("consensus.lr", consensus.lr),
      DBL_FIELD("consensus.lambda", consensus.lambda),
      INT_FIELD("extractor.epochs", extractor.epochs),
      DBL_FIELD("extractor.lr", extractor.lr),
      INT_FIELD("extractor.batch", extractor.batch),
      INT_FIELD("extractor.max_index_arity", extractor.max_index_arity),
      BOOL_FIELD("eval.goal_credit", eval.goal_credit),
  };
  return f;
}

#undef INT_FIELD
#undef DBL_FIELD
#undef BOOL_FIELD

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

}  // namespace

std::map<std::string, std::string> read_config_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!value.empty() && value.front() == '"' && value.back() == '"' &&
        value.size() >= 2)
      value = value.substr(1, value.size() - 2);
    std::string dotted = section.empty() ? key : section + "." + key;
    out[dotted] = value;
  }
  return out;
}

RunConfig parse_config(const std::string& text, const ConfigOverlay& overlay,
                       const std::string& origin) {
  RunConfig cfg;
  auto file_values = read_config_values(text);
  for (const auto& [key, value] : file_values) {
    const Field* f = find_field(key);
    if (!f) throw ConfigError(origin + ": unknown key '" + key + "'");
    f->set(cfg, value);
  }
  for (const auto& [key, value] : overlay.values) {
    const Field* f = find_field(key);
    if (!f) throw ConfigError("flag overlay: unknown key '" + key + "'");
    f->set(cfg, value);
  }
  return cfg;
}

RunConfig load_config(const std::string& path, const ConfigOverlay& overlay) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overlay, path);
}

std::string echo_config(const RunConfig& cfg, const ConfigOverlay& overlay,
                        const std::map<std::string, std::string>& file_values) {
  std::ostringstream os;
  std::string section;
  for (const auto& f : fields()) {
    std::string sec = f.key.substr(0, f.key.find('.'));
    std::string name = f.key.substr(f.key.find('.') + 1);
    if (sec != section) {
      if (!section.empty()) os << '\n';
      os << '[' << sec << "]\n";
      section = sec;
    }
    const char* source = "default";
    if (overlay.values.count(f.key))
      source = "flag";
    else if (file_values.count(f.key))
      source = "file";
    os << name << " = " << f.get(cfg) << "  # " << source << '\n';
  }
  return os.str();
}

}  // namespace textplan
