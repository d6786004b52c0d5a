#include "photonstat/formats.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "photonstat/error.hpp"

namespace photonstat::cli {
namespace {

constexpr const char* kModule = "cli";
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 1 + 8;
constexpr std::size_t kRecordBytes = 1 + 8;

template <class T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

template <class T>
T get_le(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return static_cast<T>(v);
}

[[noreturn]] void format_fail(const std::string& what) { throw Error(Errc::FormatError, kModule, what); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string metadata_block(const Metadata& meta) {
  std::string out;
  for (const auto& [k, v] : meta) out += "# " + k + " = " + v + "\n";
  return out;
}

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_atomic(const std::string& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::IoError, kModule, "cannot write " + tmp);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error(Errc::IoError, kModule, "short write to " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error(Errc::IoError, kModule, "cannot rename " + tmp + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, kModule, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string encode_pts1(const std::vector<EventStream>& streams) {
  if (streams.empty()) format_fail("no streams to write");
  const std::uint64_t res = streams.front().resolution_ps;
  std::vector<std::uint8_t> channels;
  std::size_t total = 0;
  for (const auto& s : streams) {
    if (s.resolution_ps != res) format_fail("streams differ in resolution");
    if (std::find(channels.begin(), channels.end(), s.channel) != channels.end()) format_fail("duplicate channel");
    if (!std::is_sorted(s.timestamps.begin(), s.timestamps.end())) format_fail("timestamps not sorted");
    channels.push_back(s.channel);
    total += s.size();
  }
  // k-way merge by (timestamp, channel) gives one canonical record order
  std::vector<std::pair<std::uint64_t, std::uint8_t>> records;
  records.reserve(total);
  for (const auto& s : streams) {
    for (auto t : s.timestamps) records.emplace_back(t, s.channel);
  }
  std::sort(records.begin(), records.end());

  std::string out;
  out.reserve(kHeaderBytes + kRecordBytes * total);
  out += "PTS1";
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint64_t>(out, res);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(channels.size()));
  put_le<std::uint64_t>(out, records.size());
  for (const auto& [t, ch] : records) {
    put_le<std::uint8_t>(out, ch);
    put_le<std::uint64_t>(out, t);
  }
  return out;
}

std::vector<EventStream> decode_pts1(const std::string& bytes) {
  if (bytes.size() < kHeaderBytes || bytes.compare(0, 4, "PTS1") != 0) format_fail("bad magic");
  if (get_le<std::uint32_t>(bytes, 4) != 1) format_fail("unsupported version");
  const auto res = get_le<std::uint64_t>(bytes, 8);
  const auto n_channels = get_le<std::uint8_t>(bytes, 16);
  const auto n_records = get_le<std::uint64_t>(bytes, 17);
  if (res == 0) format_fail("zero resolution");
  if ((bytes.size() - kHeaderBytes) % kRecordBytes != 0 || (bytes.size() - kHeaderBytes) / kRecordBytes != n_records) {
    format_fail("record count does not match file size");
  }
  std::vector<EventStream> streams;
  std::uint64_t t_max = 0;
  for (std::uint64_t i = 0; i < n_records; ++i) {
    const std::size_t pos = kHeaderBytes + i * kRecordBytes;
    const auto ch = get_le<std::uint8_t>(bytes, pos);
    const auto t = get_le<std::uint64_t>(bytes, pos + 1);
    auto it = std::find_if(streams.begin(), streams.end(), [ch](const EventStream& s) { return s.channel == ch; });
    if (it == streams.end()) {
      streams.emplace_back();
      streams.back().resolution_ps = res;
      streams.back().channel = ch;
      it = streams.end() - 1;
    }
    if (!it->timestamps.empty() && t < it->timestamps.back()) format_fail("timestamps decrease on a channel");
    it->timestamps.push_back(t);
    t_max = std::max(t_max, t);
  }
  if (streams.size() > n_channels) format_fail("more channels than declared");
  // declared channels with no events still exist, but their ids are not stored
  std::sort(streams.begin(), streams.end(), [](const auto& a, const auto& b) { return a.channel < b.channel; });
  for (auto& s : streams) s.duration = t_max;
  return streams;
}

void write_pts1(const std::string& path, const std::vector<EventStream>& streams) {
  write_atomic(path, encode_pts1(streams));
}

std::vector<EventStream> read_pts1(const std::string& path) { return decode_pts1(read_file(path)); }

std::string encode_correlogram_csv(const Correlogram& c, const Metadata& meta) {
  std::string out = metadata_block(meta);
  out += "tau_ns,value,stderr,counts\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out += fmt(c.lag_ns[i]) + "," + fmt(c.values[i]) + "," + fmt(i < c.stderr_.size() ? c.stderr_[i] : 0.0) + "," +
           std::to_string(i < c.counts.size() ? c.counts[i] : 0) + "\n";
  }
  return out;
}

CorrelogramFile decode_correlogram_csv(const std::string& text) {
  CorrelogramFile f;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto key = line.substr(1, eq - 1);
      auto val = line.substr(eq + 1);
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      val.erase(0, val.find_first_not_of(' '));
      f.meta[key] = val;
      continue;
    }
    if (!header) {
      if (line != "tau_ns,value,stderr,counts") format_fail("line " + std::to_string(lineno) + ": unexpected header");
      header = true;
      continue;
    }
    double tau = 0.0, value = 0.0, err = 0.0;
    unsigned long long counts = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%llu", &tau, &value, &err, &counts) != 4) {
      format_fail("line " + std::to_string(lineno) + ": malformed row");
    }
    f.data.lag_ns.push_back(tau);
    f.data.values.push_back(value);
    f.data.stderr_.push_back(err);
    f.data.counts.push_back(counts);
  }
  if (!header) format_fail("missing column header");
  if (auto it = f.meta.find("bin_width_ns"); it != f.meta.end()) {
    f.data.bin_width_ns = std::strtod(it->second.c_str(), nullptr);
  } else if (f.data.size() > 1) {
    f.data.bin_width_ns = f.data.lag_ns[1] - f.data.lag_ns[0];
  }
  return f;
}

void write_correlogram_csv(const std::string& path, const Correlogram& c, const Metadata& meta) {
  write_atomic(path, encode_correlogram_csv(c, meta));
}

CorrelogramFile read_correlogram_csv(const std::string& path) { return decode_correlogram_csv(read_file(path)); }

std::string encode_fit_report(const fitters::FitReport& r, const Metadata& meta) {
  std::string out;
  for (const auto& [k, v] : meta) out += k + " = " + v + "\n";
  for (const auto& [k, v] : r.params) out += "param." + k + " = " + fmt(v) + "\n";
  for (const auto& [k, v] : r.errors) out += "error." + k + " = " + fmt(v) + "\n";
  out += "residual_ss = " + fmt(r.residual_ss) + "\n";
  out += "dof = " + std::to_string(r.dof) + "\n";
  out += "converged = " + std::string(r.converged ? "true" : "false") + "\n";
  out += "n_iter = " + std::to_string(r.n_iter) + "\n";
  if (!r.note.empty()) out += "note = " + r.note + "\n";
  return out;
}

FitFile decode_fit_report(const std::string& text) {
  FitFile f;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq), val = line.substr(eq + 3);
    const double x = std::strtod(val.c_str(), nullptr);
    if (key.rfind("param.", 0) == 0) {
      f.report.params.emplace_back(key.substr(6), x);
    } else if (key.rfind("error.", 0) == 0) {
      f.report.errors.emplace_back(key.substr(6), x);
    } else if (key == "residual_ss") {
      f.report.residual_ss = x;
    } else if (key == "dof") {
      f.report.dof = static_cast<int>(x);
    } else if (key == "n_iter") {
      f.report.n_iter = static_cast<int>(x);
    } else if (key == "converged") {
      f.report.converged = val == "true";
    } else if (key == "note") {
      f.report.note = val;
    } else {
      f.meta[key] = val;
    }
  }
  return f;
}

std::string encode_table_csv(const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows,
                             const Metadata& meta) {
  std::string out = metadata_block(meta);
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + fmt(row[i]);
    out += "\n";
  }
  return out;
}

}  // namespace photonstat::cli
