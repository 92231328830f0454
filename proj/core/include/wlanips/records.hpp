#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wlanips/rx_chain.hpp"

namespace wlanips {

/// "Time SSID MAC-ID Chan RSSI real1 imag1 ... realN imagN", tab separated.
std::string record_header(int n_taps);

/// One row; numbers printed with 4 decimals.
std::string format_record(const MeasurementRecord& record, int n_taps);

/// Header-only file for zero records. Taps beyond a record's estimate are
/// written as zeros. Throws IoError on failure.
void write_records(const std::vector<MeasurementRecord>& records, const std::filesystem::path& path,
                   int n_taps = 5);

/// Parses a file written by write_records. Throws FormatError with the line
/// number on malformed rows.
std::vector<MeasurementRecord> read_records(const std::filesystem::path& path);

/// "capture.tsv", 3 -> "capture_3.tsv": the per-location output name.
std::filesystem::path location_path(const std::filesystem::path& base, int location);

}  // namespace wlanips
