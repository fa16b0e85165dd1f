#include "fides/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fides/errors.hpp"

namespace fides::cli {
namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <class T>
T parse_number(const std::string& text, const std::string& key) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw ConfigError("invalid value '" + text + "' for " + key);
  return value;
}

bool parse_bool(const std::string& text, const std::string& key) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError("invalid boolean '" + text + "' for " + key);
}

template <class T>
void take(std::optional<T>& dst, const std::optional<T>& src) {
  if (src) dst = src;
}

}  // namespace

RunConfig merge(const RunConfig& base, const RunConfig& over) {
  RunConfig r = base;
  take(r.case_id, over.case_id);
  take(r.n, over.n);
  take(r.layers, over.layers);
  take(r.neurons, over.neurons);
  take(r.iters, over.iters);
  take(r.seed, over.seed);
  take(r.noise_std, over.noise_std);
  take(r.schedule, over.schedule);
  take(r.plateau_window, over.plateau_window);
  take(r.plateau_threshold, over.plateau_threshold);
  take(r.beta, over.beta);
  take(r.init_alpha, over.init_alpha);
  take(r.init_beta, over.init_beta);
  take(r.out, over.out);
  take(r.vary, over.vary);
  take(r.values, over.values);
  take(r.emit_solution, over.emit_solution);
  take(r.emit_loss, over.emit_loss);
  take(r.emit_report, over.emit_report);
  return r;
}

std::vector<train::LrStage> parse_schedule(std::string_view text) {
  std::vector<train::LrStage> out;
  for (const auto& item : split(text, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("schedule entries must be start:lr, got '" + item + "'");
    out.push_back({parse_number<int>(trim(std::string_view(item).substr(0, colon)), "schedule"),
                   parse_number<double>(trim(std::string_view(item).substr(colon + 1)), "schedule")});
  }
  if (out.empty()) throw ConfigError("empty schedule");
  return out;
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) continue;
    out.push_back(parse_number<int>(item, "values"));
  }
  return out;
}

RunConfig parse_config_text(std::string_view text) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find_first_of("=:");
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    std::replace(key.begin(), key.end(), '-', '_');
    if (key == "case") c.case_id = value;
    else if (key == "n") c.n = parse_number<int>(value, key);
    else if (key == "layers") c.layers = parse_number<int>(value, key);
    else if (key == "neurons") c.neurons = parse_number<int>(value, key);
    else if (key == "iters") c.iters = parse_number<int>(value, key);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(value, key);
    else if (key == "noise_std") c.noise_std = parse_number<double>(value, key);
    else if (key == "schedule") c.schedule = parse_schedule(value);
    else if (key == "plateau_window") c.plateau_window = parse_number<int>(value, key);
    else if (key == "plateau_threshold") c.plateau_threshold = parse_number<double>(value, key);
    else if (key == "beta") c.beta = parse_number<double>(value, key);
    else if (key == "init_alpha") c.init_alpha = parse_number<double>(value, key);
    else if (key == "init_beta") c.init_beta = parse_number<double>(value, key);
    else if (key == "out") c.out = value;
    else if (key == "vary") c.vary = value;
    else if (key == "values") c.values = parse_int_list(value);
    else if (key == "emit_solution") c.emit_solution = parse_bool(value, key);
    else if (key == "emit_loss") c.emit_loss = parse_bool(value, key);
    else if (key == "emit_report") c.emit_report = parse_bool(value, key);
    else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return c;
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace fides::cli
