#include "wlanips/records.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wlanips/errors.hpp"

namespace wlanips {

namespace {

void append_fixed4(std::string& out, double v) {
  // Avoid "-0.0000" so equal records print identically.
  if (std::abs(v) < 0.00005) v = 0.0;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  out += buf;
}

}  // namespace

std::string record_header(int n_taps) {
  std::string h = "Time\tSSID\tMAC-ID\tChan\tRSSI";
  for (int i = 1; i <= n_taps; ++i) {
    h += "\treal" + std::to_string(i) + "\timag" + std::to_string(i);
  }
  return h;
}

std::string format_record(const MeasurementRecord& r, int n_taps) {
  std::string row;
  append_fixed4(row, r.time_s);
  row += '\t';
  row += r.ssid;
  row += '\t';
  row += r.mac.to_string();
  row += '\t';
  row += std::to_string(static_cast<int>(r.channel));
  row += '\t';
  append_fixed4(row, r.rssi_dbm);
  for (int i = 0; i < n_taps; ++i) {
    const cf64 t = static_cast<std::size_t>(i) < r.taps.size() ? r.taps[static_cast<std::size_t>(i)] : cf64{};
    row += '\t';
    append_fixed4(row, t.real());
    row += '\t';
    append_fixed4(row, t.imag());
  }
  return row;
}

void write_records(const std::vector<MeasurementRecord>& records, const std::filesystem::path& path,
                   int n_taps) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << record_header(n_taps) << '\n';
  for (const auto& r : records) out << format_record(r, n_taps) << '\n';
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

std::vector<MeasurementRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open records");
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> head;
  {
    std::istringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, '\t')) head.push_back(tok);
  }
  if (head.size() < 5 || head[0] != "Time" || head[1] != "SSID" || head[2] != "MAC-ID" ||
      head[3] != "Chan" || head[4] != "RSSI" || (head.size() - 5) % 2 != 0) {
    throw FormatError(path.string() + ": not a measurement record file");
  }
  const std::size_t n_taps = (head.size() - 5) / 2;
  std::vector<MeasurementRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, '\t')) f.push_back(tok);
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (f.size() != head.size()) throw FormatError(where + ": expected " + std::to_string(head.size()) + " fields");
    try {
      MeasurementRecord r;
      r.time_s = std::stod(f[0]);
      r.ssid = f[1];
      r.mac = MacAddress::parse(f[2]);
      const int chan = std::stoi(f[3]);
      if (chan < 1 || chan > 14) throw std::invalid_argument("channel");
      r.channel = static_cast<std::uint8_t>(chan);
      r.rssi_dbm = std::stod(f[4]);
      r.taps.resize(n_taps);
      for (std::size_t i = 0; i < n_taps; ++i) r.taps[i] = cf64(std::stod(f[5 + 2 * i]), std::stod(f[6 + 2 * i]));
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw FormatError(where + ": malformed field (" + e.what() + ")");
    }
  }
  return out;
}

std::filesystem::path location_path(const std::filesystem::path& base, int location) {
  auto p = base.parent_path() / (base.stem().string() + "_" + std::to_string(location) + base.extension().string());
  return p;
}

}  // namespace wlanips
