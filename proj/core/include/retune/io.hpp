#pragma once

#include "retune/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace retune {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary PPM (P6, 3 channels) or PGM (P5, 1 channel), maxval 255. Values are
/// clamped to [0, 1] and rounded to the nearest level.
void write_pnm(const std::string& path, const Signal& x);
Signal read_pnm(const std::string& path);

/// Lossless raw array: "RTNF", u32 rank, u32 dims, then float64 data, all little-endian.
void write_rtnf(const std::string& path, const std::vector<std::uint32_t>& dims, const Vec& data);
void write_rtnf(std::ostream& out, const std::vector<std::uint32_t>& dims, const Vec& data);
std::pair<std::vector<std::uint32_t>, Vec> read_rtnf(const std::string& path);
std::pair<std::vector<std::uint32_t>, Vec> read_rtnf(std::istream& in);

/// Signals are stored with dims {C, H, W}.
void write_signal(const std::string& path, const Signal& x);
Signal read_signal(const std::string& path);

/// Shortest round-trip decimal form ("%.17g"), independent of locale.
std::string format_double(double v);

/// Comma-separated table with a header row and '\n' line ends.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& add_row(const std::vector<std::string>& cells);
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace retune
