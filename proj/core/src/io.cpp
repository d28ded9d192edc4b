#include "retune/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace retune {

namespace {

static_assert(std::endian::native == std::endian::little, "RTNF I/O assumes a little-endian host");

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

// Next whitespace-delimited token of a PNM header, skipping comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

int parse_int(const std::string& tok, const char* what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(tok, &pos);
    if (pos != tok.size() || v <= 0) throw FormatError("");
    return v;
  } catch (...) {
    throw FormatError(std::string("malformed PNM ") + what);
  }
}

}  // namespace

void write_pnm(const std::string& path, const Signal& x) {
  const Shape& s = x.shape();
  if (s.channels != 1 && s.channels != 3) {
    throw std::invalid_argument("write_pnm: only 1 or 3 channels are supported");
  }
  auto out = open_out(path);
  out << (s.channels == 3 ? "P6" : "P5") << '\n' << s.width << ' ' << s.height << "\n255\n";
  std::vector<unsigned char> buf(s.size());
  std::size_t i = 0;
  for (int r = 0; r < s.height; ++r)
    for (int q = 0; q < s.width; ++q)
      for (int c = 0; c < s.channels; ++c) {
        const double v = std::clamp(x.at(c, r, q), 0.0, 1.0);
        buf[i++] = static_cast<unsigned char>(std::lround(v * 255.0));
      }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

Signal read_pnm(const std::string& path) {
  auto in = open_in(path);
  const std::string magic = pnm_token(in);
  int channels;
  if (magic == "P6") channels = 3;
  else if (magic == "P5") channels = 1;
  else throw FormatError("read_pnm: unsupported magic '" + magic + "'");
  const int w = parse_int(pnm_token(in), "width");
  const int h = parse_int(pnm_token(in), "height");
  const int maxval = parse_int(pnm_token(in), "maxval");
  if (maxval > 255) throw FormatError("read_pnm: only 8-bit images are supported");
  const Shape shape{h, w, channels};
  std::vector<unsigned char> buf(shape.size());
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw FormatError("read_pnm: truncated data");
  Vec data(static_cast<Eigen::Index>(shape.size()));
  std::size_t i = 0;
  for (int r = 0; r < h; ++r)
    for (int q = 0; q < w; ++q)
      for (int c = 0; c < channels; ++c)
        data[static_cast<Eigen::Index>((static_cast<std::size_t>(c) * h + r) * w + q)] =
            buf[i++] / static_cast<double>(maxval);
  return Signal(shape, std::move(data));
}

void write_rtnf(std::ostream& out, const std::vector<std::uint32_t>& dims, const Vec& data) {
  std::uint64_t count = 1;
  for (auto d : dims) count *= d;
  if (count != static_cast<std::uint64_t>(data.size())) {
    throw std::invalid_argument("write_rtnf: dims do not match data length");
  }
  out.write("RTNF", 4);
  const auto rank = static_cast<std::uint32_t>(dims.size());
  out.write(reinterpret_cast<const char*>(&rank), 4);
  for (auto d : dims) out.write(reinterpret_cast<const char*>(&d), 4);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
}

void write_rtnf(const std::string& path, const std::vector<std::uint32_t>& dims, const Vec& data) {
  auto out = open_out(path);
  write_rtnf(out, dims, data);
}

std::pair<std::vector<std::uint32_t>, Vec> read_rtnf(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, "RTNF", 4) != 0) throw FormatError("read_rtnf: bad magic");
  std::uint32_t rank = 0;
  in.read(reinterpret_cast<char*>(&rank), 4);
  if (in.gcount() != 4 || rank > 16) throw FormatError("read_rtnf: bad rank");
  std::vector<std::uint32_t> dims(rank);
  std::uint64_t count = 1;
  for (auto& d : dims) {
    in.read(reinterpret_cast<char*>(&d), 4);
    if (in.gcount() != 4) throw FormatError("read_rtnf: truncated dims");
    count *= d;
  }
  if (count > (std::uint64_t{1} << 32)) throw FormatError("read_rtnf: implausible size");
  Vec data(static_cast<Eigen::Index>(count));
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double))) {
    throw FormatError("read_rtnf: truncated data");
  }
  return {dims, data};
}

std::pair<std::vector<std::uint32_t>, Vec> read_rtnf(const std::string& path) {
  auto in = open_in(path);
  return read_rtnf(in);
}

void write_signal(const std::string& path, const Signal& x) {
  const Shape& s = x.shape();
  write_rtnf(path,
             {static_cast<std::uint32_t>(s.channels), static_cast<std::uint32_t>(s.height),
              static_cast<std::uint32_t>(s.width)},
             x.data());
}

Signal read_signal(const std::string& path) {
  auto [dims, data] = read_rtnf(path);
  if (dims.size() != 3) throw FormatError("read_signal: expected rank 3");
  return Signal(Shape{static_cast<int>(dims[1]), static_cast<int>(dims[2]), static_cast<int>(dims[0])},
                std::move(data));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Guard against a locale with ',' as decimal separator.
  for (char* p = buf; *p; ++p)
    if (*p == ',') *p = '.';
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("CsvTable: row width mismatch");
  rows_.push_back(cells);
  return *this;
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return os.str();
}

void CsvTable::write(const std::string& path) const {
  auto out = open_out(path);
  const std::string s = str();
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace retune
