#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "photonstat/correlogram.hpp"
#include "photonstat/event_stream.hpp"
#include "photonstat/fitters.hpp"

namespace photonstat::cli {

/// Writes bytes to path.tmp and renames over path, so readers never see a
/// partial file.
void write_atomic(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

/// PTS1 container: little-endian header (magic "PTS1", version u32 = 1,
/// resolution_ps u64, channel_count u8, record_count u64) followed by
/// (channel u8, timestamp u64) records in time order.
std::string encode_pts1(const std::vector<EventStream>& streams);

/// One stream per channel, ascending channel id. The format stores no window
/// length, so every stream's duration is the largest timestamp in the file.
std::vector<EventStream> decode_pts1(const std::string& bytes);

void write_pts1(const std::string& path, const std::vector<EventStream>& streams);
std::vector<EventStream> read_pts1(const std::string& path);

/// `# key = value` lines written above the column header, in insertion order.
using Metadata = std::vector<std::pair<std::string, std::string>>;

/// tau_ns,value,stderr,counts rows, 17 significant digits.
std::string encode_correlogram_csv(const Correlogram& c, const Metadata& meta);

struct CorrelogramFile {
  Correlogram data;
  std::map<std::string, std::string> meta;
};
CorrelogramFile decode_correlogram_csv(const std::string& text);

void write_correlogram_csv(const std::string& path, const Correlogram& c, const Metadata& meta);
CorrelogramFile read_correlogram_csv(const std::string& path);

/// key = value lines: metadata, then param.<name>, error.<name> and the fit
/// diagnostics.
std::string encode_fit_report(const fitters::FitReport& r, const Metadata& meta);

/// Inverse of encode_fit_report; any other key is kept as metadata.
struct FitFile {
  fitters::FitReport report;
  std::map<std::string, std::string> meta;
};
FitFile decode_fit_report(const std::string& text);

/// Generic CSV with a metadata block; rows are formatted with 17 digits.
std::string encode_table_csv(const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows,
                             const Metadata& meta);

std::string hex64(std::uint64_t v);

}  // namespace photonstat::cli
