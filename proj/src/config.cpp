#include "photonstat/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "photonstat/error.hpp"

namespace photonstat::cli {
namespace {

constexpr const char* kModule = "cli";

struct Value {
  enum class Kind { Number, String, List } kind = Kind::Number;
  double number = 0.0;
  std::string text;  ///< string contents, or the raw token of a number
  std::vector<double> list;
};

struct Key {
  std::string name;  ///< section.key
  std::function<void(RunConfig&, const Value&, const std::string& where)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  throw Error(Errc::ParseError, kModule, where + ": " + what);
}

double to_number(const std::string& tok, const std::string& where) {
  double v = 0.0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) parse_fail(where, "not a number: '" + tok + "'");
  return v;
}

Value parse_value(const std::string& raw, const std::string& where) {
  Value v;
  if (raw.empty()) parse_fail(where, "missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') parse_fail(where, "unterminated string");
    v.kind = Value::Kind::String;
    v.text = raw.substr(1, raw.size() - 2);
    return v;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') parse_fail(where, "unterminated list");
    v.kind = Value::Kind::List;
    const std::string body = trim(raw.substr(1, raw.size() - 2));
    if (body.empty()) return v;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) v.list.push_back(to_number(trim(item), where));
    return v;
  }
  v.number = to_number(raw, where);
  v.text = raw;
  return v;
}

double need_number(const Value& v, const std::string& where) {
  if (v.kind != Value::Kind::Number) parse_fail(where, "expected a number");
  return v.number;
}

template <class Int>
Int need_integer(const Value& v, const std::string& where) {
  need_number(v, where);
  Int x = 0;
  const auto res = std::from_chars(v.text.data(), v.text.data() + v.text.size(), x);
  if (res.ec != std::errc() || res.ptr != v.text.data() + v.text.size()) parse_fail(where, "expected an integer");
  return x;
}

template <class Get>
Key real(std::string name, Get field) {
  return {name, [field](RunConfig& c, const Value& v, const std::string& w) { field(c) = need_number(v, w); },
          [field](const RunConfig& c) { return fmt(field(c)); }};
}

template <class Get>
Key integer(std::string name, Get field) {
  return {name,
          [field](RunConfig& c, const Value& v, const std::string& w) {
            auto& slot = field(c);
            slot = need_integer<std::remove_reference_t<decltype(slot)>>(v, w);
          },
          [field](const RunConfig& c) { return std::to_string(field(c)); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(integer("laser.n_modes", [](auto& c) -> auto& { return c.laser.n_modes; }));
    k.push_back(real("laser.omega", [](auto& c) -> auto& { return c.laser.omega; }));
    k.push_back(real("laser.mod_depth", [](auto& c) -> auto& { return c.laser.mod_depth; }));
    k.push_back(real("laser.diffusion", [](auto& c) -> auto& { return c.laser.diffusion; }));
    k.push_back(real("laser.total_intensity", [](auto& c) -> auto& { return c.laser.total_intensity; }));
    k.push_back({"laser.phase_offsets",
                 [](RunConfig& c, const Value& v, const std::string& w) {
                   if (v.kind != Value::Kind::List) parse_fail(w, "expected a list");
                   c.laser.phase_offsets = v.list;
                 },
                 [](const RunConfig& c) {
                   std::string s = "[";
                   for (std::size_t i = 0; i < c.laser.phase_offsets.size(); ++i) {
                     s += (i ? ", " : "") + fmt(c.laser.phase_offsets[i]);
                   }
                   return s + "]";
                 }});

    k.push_back(real("quantum.coupling_g", [](auto& c) -> auto& { return c.quantum.coupling_g; }));
    k.push_back(real("quantum.kappa", [](auto& c) -> auto& { return c.quantum.kappa; }));
    k.push_back(real("quantum.gamma_b", [](auto& c) -> auto& { return c.quantum.gamma_b; }));
    k.push_back(real("quantum.detuning_a", [](auto& c) -> auto& { return c.quantum.detuning_a; }));
    k.push_back(real("quantum.detuning_b", [](auto& c) -> auto& { return c.quantum.detuning_b; }));
    k.push_back(real("quantum.drive_eps", [](auto& c) -> auto& { return c.quantum.drive_eps; }));
    k.push_back(real("quantum.kerr_a", [](auto& c) -> auto& { return c.quantum.kerr_a; }));
    k.push_back(real("quantum.kerr_b", [](auto& c) -> auto& { return c.quantum.kerr_b; }));
    k.push_back(integer("quantum.n_max", [](auto& c) -> auto& { return c.quantum.n_max; }));

    k.push_back(real("detection.split_bs1", [](auto& c) -> auto& { return c.detection.split_bs1; }));
    k.push_back(real("detection.split_bs2", [](auto& c) -> auto& { return c.detection.split_bs2; }));
    k.push_back({"detection.efficiency",
                 [](RunConfig& c, const Value& v, const std::string& w) {
                   if (v.kind == Value::Kind::Number) {
                     c.detection.efficiency = {v.number, v.number, v.number};
                     return;
                   }
                   if (v.kind != Value::Kind::List || v.list.size() != 3) parse_fail(w, "expected 3 efficiencies");
                   c.detection.efficiency = {v.list[0], v.list[1], v.list[2]};
                 },
                 [](const RunConfig& c) {
                   const auto& e = c.detection.efficiency;
                   return "[" + fmt(e[0]) + ", " + fmt(e[1]) + ", " + fmt(e[2]) + "]";
                 }});
    k.push_back(real("detection.dead_time", [](auto& c) -> auto& { return c.detection.dead_time; }));
    k.push_back(real("detection.dark_rate", [](auto& c) -> auto& { return c.detection.dark_rate; }));
    k.push_back(real("detection.gate_width", [](auto& c) -> auto& { return c.detection.gate_width; }));
    k.push_back(real("detection.delay_delta", [](auto& c) -> auto& { return c.detection.delay_delta; }));
    k.push_back(real("detection.jitter_sigma", [](auto& c) -> auto& { return c.detection.jitter_sigma; }));

    k.push_back(real("acquisition.bin", [](auto& c) -> auto& { return c.acquisition.bin; }));
    k.push_back(real("acquisition.max_lag", [](auto& c) -> auto& { return c.acquisition.max_lag; }));
    k.push_back(real("acquisition.tac_range", [](auto& c) -> auto& { return c.acquisition.tac_range; }));

    k.push_back(integer("run.seed", [](auto& c) -> auto& { return c.run.seed; }));
    k.push_back(real("run.duration", [](auto& c) -> auto& { return c.run.duration; }));
    k.push_back({"run.out_dir",
                 [](RunConfig& c, const Value& v, const std::string& w) {
                   if (v.kind != Value::Kind::String) parse_fail(w, "expected a quoted string");
                   c.run.out_dir = v.text;
                 },
                 [](const RunConfig& c) { return "\"" + c.run.out_dir + "\""; }});
    return k;
  }();
  return table;
}

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  throw Error(Errc::ValidationError, kModule, key + " " + why);
}

void check(bool ok, const char* key, const char* why) {
  if (!ok) invalid(key, why);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

detection::AcquisitionConfig RunConfig::effective_detection() const {
  detection::AcquisitionConfig d = detection;
  d.bin_width = acquisition.bin;
  d.tac_range = acquisition.tac_range;
  return d;
}

void validate(const RunConfig& c) {
  const auto& l = c.laser;
  check(l.n_modes >= 1, "laser.n_modes", "must be >= 1");
  check(finite(l.omega) && l.omega > 0.0, "laser.omega", "must be > 0");
  check(finite(l.mod_depth) && l.mod_depth >= 0.0 && l.mod_depth <= 1.0, "laser.mod_depth", "must lie in [0, 1]");
  check(finite(l.diffusion) && l.diffusion >= 0.0, "laser.diffusion", "must be >= 0");
  check(finite(l.total_intensity) && l.total_intensity > 0.0, "laser.total_intensity", "must be > 0");
  check(l.phase_offsets.empty() || l.phase_offsets.size() == static_cast<std::size_t>(l.n_modes),
        "laser.phase_offsets", "must be empty or hold n_modes entries");

  const auto& q = c.quantum;
  check(finite(q.coupling_g) && q.coupling_g >= 0.0, "quantum.coupling_g", "must be >= 0");
  check(finite(q.kappa) && q.kappa > 0.0, "quantum.kappa", "must be > 0");
  check(finite(q.gamma_b) && q.gamma_b >= 0.0, "quantum.gamma_b", "must be >= 0");
  check(finite(q.detuning_a), "quantum.detuning_a", "must be finite");
  check(finite(q.detuning_b), "quantum.detuning_b", "must be finite");
  check(finite(q.drive_eps) && q.drive_eps >= 0.0, "quantum.drive_eps", "must be >= 0");
  check(finite(q.kerr_a), "quantum.kerr_a", "must be finite");
  check(finite(q.kerr_b), "quantum.kerr_b", "must be finite");
  check(q.n_max >= 1 && q.n_max <= 40, "quantum.n_max", "must lie in [1, 40]");

  const auto& d = c.detection;
  check(d.split_bs1 >= 0.0 && d.split_bs1 <= 1.0, "detection.split_bs1", "must lie in [0, 1]");
  check(d.split_bs2 >= 0.0 && d.split_bs2 <= 1.0, "detection.split_bs2", "must lie in [0, 1]");
  for (double e : d.efficiency) check(e >= 0.0 && e <= 1.0, "detection.efficiency", "entries must lie in [0, 1]");
  check(finite(d.dead_time) && d.dead_time >= 0.0, "detection.dead_time", "must be >= 0");
  check(finite(d.dark_rate) && d.dark_rate >= 0.0, "detection.dark_rate", "must be >= 0");
  check(finite(d.gate_width) && d.gate_width > 0.0, "detection.gate_width", "must be > 0");
  check(finite(d.delay_delta) && d.delay_delta >= 0.0, "detection.delay_delta", "must be >= 0");
  check(finite(d.jitter_sigma) && d.jitter_sigma >= 0.0, "detection.jitter_sigma", "must be >= 0");

  const auto& a = c.acquisition;
  check(finite(a.bin) && a.bin > 0.0, "acquisition.bin", "must be > 0");
  check(finite(a.max_lag) && a.max_lag >= a.bin, "acquisition.max_lag", "must be >= acquisition.bin");
  check(finite(a.tac_range) && a.tac_range > a.bin, "acquisition.tac_range", "must exceed acquisition.bin");

  check(finite(c.run.duration) && c.run.duration > 0.0, "run.duration", "must be > 0");

  // module-level invariants not covered above
  check(c.effective_detection().valid(), "detection", "violates the acquisition invariants");
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  std::vector<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    // strip comments outside strings
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_fail(where, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "laser" && section != "quantum" && section != "detection" && section != "acquisition" &&
          section != "run") {
        parse_fail(where, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(where, "expected key = value");
    if (section.empty()) parse_fail(where, "key outside any section");
    const std::string name = section + "." + trim(line.substr(0, eq));
    const Key* key = nullptr;
    for (const auto& k : keys()) {
      if (k.name == name) key = &k;
    }
    if (!key) parse_fail(where, "unknown key " + name);
    for (const auto& s : seen) {
      if (s == name) parse_fail(where, "duplicate key " + name);
    }
    seen.push_back(name);
    key->set(cfg, parse_value(trim(line.substr(eq + 1)), where), where);
  }
  cfg.laser.seed = cfg.run.seed;
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, kModule, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::string to_text(const RunConfig& cfg) {
  std::string out, section;
  for (const auto& k : keys()) {
    const auto dot = k.name.find('.');
    const std::string s = k.name.substr(0, dot);
    if (s != section) {
      out += (section.empty() ? "[" : "\n[") + s + "]\n";
      section = s;
    }
    out += k.name.substr(dot + 1) + " = " + k.get(cfg) + "\n";
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  RunConfig c = cfg;
  c.run.seed = 0;
  c.laser.seed = 0;
  c.run.out_dir.clear();
  return fnv1a64(to_text(c));
}

}  // namespace photonstat::cli
