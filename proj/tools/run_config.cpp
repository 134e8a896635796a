#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "mwt/error.hpp"

namespace mwt::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
  return v;
}

}  // namespace

void RunConfig::declare(const std::string& key, const std::string& fallback, const std::string& help) {
  if (find(key)) throw ConfigError("key declared twice: " + key);
  entries_.push_back({key, fallback, help, false});
}

void RunConfig::declare_path(const std::string& key, const std::string& fallback, const std::string& help) {
  declare(key, fallback, help);
  entries_.back().is_path = true;
}

bool RunConfig::has(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
}

RunConfig::Entry* RunConfig::find(const std::string& key) {
  for (auto& e : entries_)
    if (e.key == key) return &e;
  return nullptr;
}

const RunConfig::Entry& RunConfig::at(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.key == key) return e;
  throw ConfigError("unknown key '" + key + "'");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  Entry* e = find(key);
  if (!e) throw ConfigError("unknown key '" + key + "'");
  e->value = value;
}

void RunConfig::assign(const std::string& setting) {
  const auto eq = setting.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + setting + "'");
  set(trim(setting.substr(0, eq)), trim(setting.substr(eq + 1)));
}

void RunConfig::load(std::istream& in, const std::string& origin) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      assign(line);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path);
  load(in, path);
}

void RunConfig::resolve_paths() {
  for (auto& e : entries_)
    if (e.is_path && !e.value.empty()) e.value = std::filesystem::absolute(e.value).lexically_normal().string();
}

const std::string& RunConfig::str(const std::string& key) const { return at(key).value; }

long long RunConfig::integer(const std::string& key) const { return parse_number<long long>(key, str(key)); }

std::uint64_t RunConfig::unsigned_integer(const std::string& key) const {
  return parse_number<std::uint64_t>(key, str(key));
}

double RunConfig::real(const std::string& key) const { return parse_number<double>(key, str(key)); }

bool RunConfig::flag(const std::string& key) const {
  const auto& v = str(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

void RunConfig::write(std::ostream& out) const {
  for (const auto& e : entries_) out << "# " << e.help << '\n' << e.key << " = " << e.value << '\n';
}

void RunConfig::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  write(out);
  if (!out) throw FormatError("failed writing " + path);
}

}  // namespace mwt::cli
