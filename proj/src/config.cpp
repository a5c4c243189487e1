#include "subflow/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "subflow/errors.hpp"

namespace subflow {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string cur;
  for (char c : value) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) items.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) items.push_back(std::move(cur));
  return items;
}

double parse_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) fail(line, "trailing characters after number '" + s + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    fail(line, "expected a number, got '" + s + "'");
  }
}

long long parse_int(const std::string& s, int line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    fail(line, "expected an integer, got '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s, int line) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(line, "expected a boolean, got '" + s + "'");
}

template <typename T, std::size_t N>
std::array<T, N> parse_tuple(const std::string& value, int line, const char* what) {
  const auto items = split_list(value);
  std::array<T, N> out{};
  if (items.size() == 1) {
    // A single entry replicates across all slots (cubic grids, equal periods).
    T v;
    if constexpr (std::is_integral_v<T>) v = static_cast<T>(parse_int(items[0], line));
    else v = parse_double(items[0], line);
    out.fill(v);
    return out;
  }
  if (items.size() != N)
    fail(line, std::string(what) + " needs 1 or " + std::to_string(N) + " entries");
  for (std::size_t i = 0; i < N; ++i) {
    if constexpr (std::is_integral_v<T>) out[i] = static_cast<T>(parse_int(items[i], line));
    else out[i] = parse_double(items[i], line);
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;

  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "domain" && section != "target" && section != "potential" &&
          section != "flow" && section != "checks" && section != "stability")
        fail(line, "unknown section [" + section + "]");
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (value.empty()) fail(line, "empty value for '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;

    if (full == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(value, line));
    } else if (full == "output") {
      cfg.output = value;
    } else if (full == "domain.name") {
      cfg.domain.name = value;
    } else if (full == "domain.resolution") {
      cfg.domain.resolution = parse_tuple<int, 3>(value, line, "resolution");
    } else if (full == "domain.periods") {
      cfg.domain.periods = parse_tuple<double, 3>(value, line, "periods");
    } else if (full == "target.kind") {
      cfg.target.kind = value;
    } else if (full == "target.n") {
      cfg.target.n = static_cast<int>(parse_int(value, line));
    } else if (full == "potential.kind") {
      cfg.potential.kind = value;
    } else if (full == "potential.value") {
      cfg.potential.value = parse_double(value, line);
    } else if (full == "potential.coeff") {
      cfg.potential.coeff = parse_double(value, line);
    } else if (full == "flow.initial") {
      cfg.flow_initial = value;
    } else if (full == "flow.constant_point") {
      cfg.constant_point.clear();
      for (const auto& item : split_list(value))
        cfg.constant_point.push_back(parse_double(item, line));
    } else if (full == "flow.dt") {
      cfg.flow.dt = parse_double(value, line);
    } else if (full == "flow.tol") {
      cfg.flow.tol = parse_double(value, line);
    } else if (full == "flow.max_steps") {
      cfg.flow.max_steps = static_cast<int>(parse_int(value, line));
    } else if (full == "flow.backtrack") {
      cfg.flow.backtrack = parse_double(value, line);
    } else if (full == "flow.max_backtracks") {
      cfg.flow.max_backtracks = static_cast<int>(parse_int(value, line));
    } else if (full == "flow.grow_after") {
      cfg.flow.grow_after = static_cast<int>(parse_int(value, line));
    } else if (full == "flow.checkpoint_every") {
      cfg.flow.checkpoint_every = static_cast<int>(parse_int(value, line));
    } else if (full == "flow.order") {
      const auto o = parse_int(value, line);
      if (o != 2 && o != 4) fail(line, "stencil order must be 2 or 4");
      cfg.flow.order = o == 2 ? FdOrder::second : FdOrder::fourth;
    } else if (full == "checks.levels") {
      cfg.checks.levels.clear();
      for (const auto& item : split_list(value))
        cfg.checks.levels.push_back(static_cast<int>(parse_int(item, line)));
      if (cfg.checks.levels.size() < 2) fail(line, "need at least two refinement levels");
    } else if (full == "checks.orders") {
      cfg.checks.orders.clear();
      for (const auto& item : split_list(value)) {
        const auto o = parse_int(item, line);
        if (o != 2 && o != 4) fail(line, "stencil order must be 2 or 4");
        cfg.checks.orders.push_back(static_cast<int>(o));
      }
    } else if (full == "checks.dt") {
      cfg.checks.dt = parse_double(value, line);
    } else if (full == "checks.sign_flip_diagnostic") {
      cfg.checks.sign_flip_diagnostic = parse_bool(value, line);
    } else if (full == "checks.suites") {
      cfg.checks.suites = split_list(value);
      for (const auto& suite : cfg.checks.suites)
        if (suite != "first-variation" && suite != "divergence" &&
            suite != "second-variation")
          fail(line, "unknown check suite '" + suite + "'");
    } else if (full == "checks.order_gate_2") {
      cfg.checks.order_gate_2 = parse_double(value, line);
    } else if (full == "checks.order_gate_4") {
      cfg.checks.order_gate_4 = parse_double(value, line);
    } else if (full == "stability.samples") {
      cfg.stability.samples = static_cast<int>(parse_int(value, line));
    } else if (full == "stability.rayleigh_iters") {
      cfg.stability.rayleigh_iters = static_cast<int>(parse_int(value, line));
    } else if (full == "stability.margin") {
      cfg.stability.margin = parse_double(value, line);
    } else if (full == "stability.tension_factor") {
      cfg.stability.tension_factor = parse_double(value, line);
    } else {
      fail(line, "unknown key '" + full + "'");
    }
  }

  cfg.flow.seed = cfg.seed;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ChartPtr make_chart(const DomainConfig& c) {
  return build_chart(c.name, c.resolution, c.periods);
}

Target make_target(const TargetConfig& c) {
  if (c.n < 1) throw ConfigError("target.n must be positive");
  if (c.kind == "unit-sphere") return Target::unit_sphere(c.n);
  if (c.kind == "flat-space") return Target::flat_space(c.n);
  throw ConfigError("unknown target kind '" + c.kind + "'");
}

Potential make_potential(const PotentialConfig& c) {
  if (c.kind == "constant") return Potential::constant(c.value);
  if (c.kind == "height") return Potential::height();
  if (c.kind == "squared-distance") return Potential::squared_distance();
  if (c.kind == "ambient-quadratic") return Potential::ambient_quadratic(c.coeff);
  throw ConfigError("unknown potential kind '" + c.kind + "'");
}

}  // namespace subflow
