#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gwspeed/errors.hpp"
#include "gwspeed/harness.hpp"

namespace gwspeed {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Decimal, or p/q with decimal p and q.
double to_real(const std::string& key, const std::string& v) {
  const auto decimal = [&](std::string_view t) {
    double x = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || ec != std::errc{} || p != t.data() + t.size()) {
      throw ConfigError(key + ": '" + v + "' is not a number");
    }
    return x;
  };
  const auto slash = v.find('/');
  if (slash == std::string::npos) return decimal(v);
  const double q = decimal(trim(std::string_view(v).substr(slash + 1)));
  if (q == 0) throw ConfigError(key + ": zero denominator in '" + v + "'");
  return decimal(trim(std::string_view(v).substr(0, slash))) / q;
}

}  // namespace

Config Config::parse(std::istream& in, std::filesystem::path source) {
  Config c;
  c.source_ = std::move(source);
  std::ostringstream raw;
  raw << in.rdbuf();
  c.raw_ = raw.str();
  std::istringstream body(c.raw_);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(body);
  } catch (const CLI::Error& e) {
    throw ConfigError(c.source_.string() + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    std::string joined;
    for (const auto& s : item.inputs) joined += (joined.empty() ? "" : ",") + trim(s);
    const std::string key = item.parents.empty() ? "run." + item.name : item.fullname();
    if (!c.values_.emplace(key, joined).second) throw ConfigError("duplicate key " + key);
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse(in, path);
}

const std::string& Config::lookup(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required key " + key);
  used_.insert(key);
  return it->second;
}

std::string Config::text(const std::string& key) const { return lookup(key); }

std::string Config::text(const std::string& key, const std::string& fallback) const {
  return has(key) ? lookup(key) : fallback;
}

double Config::real(const std::string& key) const { return to_real(key, lookup(key)); }

double Config::real(const std::string& key, double fallback) const {
  return has(key) ? real(key) : fallback;
}

std::int64_t Config::integer(const std::string& key, std::int64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = lookup(key);
  std::int64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec == std::errc{} && p == v.data() + v.size()) return x;
  // Accept integral scientific notation such as 1e6.
  const double d = to_real(key, v);
  if (d != std::floor(d) || std::abs(d) > 9e18) throw ConfigError(key + ": '" + v + "' is not an integer");
  return static_cast<std::int64_t>(d);
}

std::uint64_t Config::count(const std::string& key, std::uint64_t fallback) const {
  const std::int64_t v = integer(key, static_cast<std::int64_t>(fallback));
  if (v < 1) throw ConfigError(key + " must be >= 1");
  return static_cast<std::uint64_t>(v);
}

bool Config::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = lookup(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

std::vector<std::string> Config::list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream is(lookup(key));
  for (std::string item; std::getline(is, item, ',');) {
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  }
  return out;
}

std::vector<double> Config::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : list(key)) out.push_back(to_real(key, s));
  if (out.empty()) throw ConfigError(key + " is empty");
  return out;
}

std::vector<double> Config::reals(const std::string& key, std::vector<double> fallback) const {
  return has(key) ? reals(key) : fallback;
}

ProgenyDistribution Config::dist(const std::string& key) const {
  std::string v = lookup(key);
  if (!v.empty() && v.front() == '@') {
    std::filesystem::path p = v.substr(1);
    if (p.is_relative() && !source_.empty()) p = source_.parent_path() / p;
    std::ifstream in(p);
    if (!in) throw ConfigError(key + ": cannot open " + p.string());
    std::ostringstream body;
    body << in.rdbuf();
    v = trim(body.str());
  }
  try {
    return ProgenyDistribution::parse(v);
  } catch (const InvalidDistribution& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void Config::reject_unused(const std::set<std::string>& ignore) const {
  std::string unused;
  for (const auto& [key, _] : values_) {
    if (used_.count(key)) continue;
    if (ignore.count(key.substr(0, key.find('.')))) continue;
    unused += (unused.empty() ? "" : ", ") + key;
  }
  if (!unused.empty()) throw ConfigError("unknown config keys: " + unused);
}

}  // namespace gwspeed
