#include "tvsv/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace tvsv {

namespace {

std::string lower_ext(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// Netpbm header tokenizer: whitespace-separated integers, '#' comments to end of line.
class PnmReader {
 public:
  PnmReader(std::vector<unsigned char> bytes, std::string name)
      : bytes_(std::move(bytes)), name_(std::move(name)) {}

  std::string magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P') fail("not a netpbm file");
    pos_ = 2;
    return {char(bytes_[0]), char(bytes_[1])};
  }

  long next_int() {
    skip_space();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) fail("expected an integer");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > (1L << 31)) fail("integer out of range");
    }
    return v;
  }

  // P1 pixels may be packed without separators.
  int next_bit() {
    skip_space();
    if (pos_ >= bytes_.size()) fail("truncated pixel data");
    const unsigned char c = bytes_[pos_++];
    if (c != '0' && c != '1') fail("bad bit value");
    return c - '0';
  }

  // Exactly one whitespace byte separates the header from binary data.
  void end_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("malformed header");
    ++pos_;
  }

  const unsigned char* take(std::size_t n) {
    if (bytes_.size() - pos_ < n) fail("truncated pixel data");
    const unsigned char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw IoError("'" + name_ + "': " + what);
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::vector<unsigned char> bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

struct Graymap {
  Index rows = 0, cols = 0;
  long maxval = 0;
  std::vector<long> values;
};

Graymap read_graymap(PnmReader& rd, const std::string& magic) {
  Graymap gm;
  gm.cols = rd.next_int();
  gm.rows = rd.next_int();
  gm.maxval = rd.next_int();
  if (gm.rows < 1 || gm.cols < 1) rd.fail("empty image");
  if (gm.maxval < 1 || gm.maxval > 65535) rd.fail("maxval must be in [1, 65535]");
  const std::size_t n = std::size_t(gm.rows) * std::size_t(gm.cols);
  gm.values.resize(n);
  if (magic == "P2") {
    for (auto& v : gm.values) v = rd.next_int();
  } else {
    rd.end_header();
    const int width = gm.maxval > 255 ? 2 : 1;
    const unsigned char* p = rd.take(n * width);
    for (std::size_t i = 0; i < n; ++i)
      gm.values[i] = width == 2 ? (long(p[2 * i]) << 8) | p[2 * i + 1] : p[i];
  }
  for (long v : gm.values)
    if (v > gm.maxval) rd.fail("sample exceeds maxval");
  return gm;
}

}  // namespace

ImageD read_pgm(const std::filesystem::path& path) {
  PnmReader rd(read_bytes(path), path.string());
  const std::string magic = rd.magic();
  if (magic != "P2" && magic != "P5") rd.fail("expected a P2 or P5 graymap, got " + magic);
  const Graymap gm = read_graymap(rd, magic);
  ImageD u(gm.rows, gm.cols);
  for (Index i = 0; i < u.size(); ++i) u.data()[i] = double(gm.values[i]) / double(gm.maxval);
  return u;
}

void write_pgm(const std::filesystem::path& path, const ImageD& u, int maxval,
               PgmEncoding encoding) {
  if (maxval < 1 || maxval > 65535) throw std::invalid_argument("write_pgm: maxval must be in [1, 65535]");
  if (u.size() == 0) throw std::invalid_argument("write_pgm: empty image");
  std::ostringstream out;
  out << (encoding == PgmEncoding::kAscii ? "P2" : "P5") << '\n'
      << u.cols() << ' ' << u.rows() << '\n'
      << maxval << '\n';
  std::string body;
  for (Index r = 0; r < u.rows(); ++r) {
    for (Index c = 0; c < u.cols(); ++c) {
      const double x = std::isfinite(u(r, c)) ? std::clamp(u(r, c), 0.0, 1.0) : 0.0;
      const long q = std::lround(x * maxval);
      if (encoding == PgmEncoding::kAscii) {
        out << q << (c + 1 == u.cols() ? '\n' : ' ');
      } else if (maxval > 255) {
        body.push_back(char(q >> 8));
        body.push_back(char(q & 0xff));
      } else {
        body.push_back(char(q));
      }
    }
  }
  write_bytes(path, out.str() + body);
}

Mask read_mask(const std::filesystem::path& path) {
  PnmReader rd(read_bytes(path), path.string());
  const std::string magic = rd.magic();
  if (magic == "P2" || magic == "P5") {
    const Graymap gm = read_graymap(rd, magic);
    Mask m(gm.rows, gm.cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = gm.values[i] != 0;
    return m;
  }
  if (magic != "P1" && magic != "P4") rd.fail("expected a bitmap or graymap mask, got " + magic);
  const Index cols = rd.next_int(), rows = rd.next_int();
  if (rows < 1 || cols < 1) rd.fail("empty mask");
  Mask m(rows, cols);
  if (magic == "P1") {
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rd.next_bit() == 1;
    return m;
  }
  rd.end_header();
  const std::size_t stride = std::size_t(cols + 7) / 8;
  const unsigned char* p = rd.take(stride * std::size_t(rows));
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      m(r, c) = (p[r * stride + c / 8] >> (7 - c % 8)) & 1;
  return m;
}

void write_mask(const std::filesystem::path& path, const Mask& m) {
  if (m.size() == 0) throw std::invalid_argument("write_mask: empty mask");
  std::string out = "P4\n" + std::to_string(m.cols()) + ' ' + std::to_string(m.rows()) + '\n';
  const std::size_t stride = std::size_t(m.cols() + 7) / 8;
  std::string body(stride * std::size_t(m.rows()), '\0');
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      if (m(r, c)) body[r * stride + c / 8] |= char(1 << (7 - c % 8));
  write_bytes(path, out + body);
}

ImageD read_csv_grid(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t end = std::min(line.find(',', start), line.size());
      std::string_view cell(line.data() + start, end - start);
      while (!cell.empty() && std::isspace((unsigned char)cell.front())) cell.remove_prefix(1);
      while (!cell.empty() && std::isspace((unsigned char)cell.back())) cell.remove_suffix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty())
        throw IoError("'" + path.string() + "': bad number '" + std::string(cell) + "' on row " +
                      std::to_string(rows.size() + 1));
      row.push_back(v);
      if (end == line.size()) break;
      start = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("'" + path.string() + "': ragged row " + std::to_string(rows.size() + 1));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("'" + path.string() + "': empty grid");
  ImageD u(Index(rows.size()), Index(rows.front().size()));
  for (Index r = 0; r < u.rows(); ++r)
    for (Index c = 0; c < u.cols(); ++c) u(r, c) = rows[r][c];
  return u;
}

void write_csv_grid(const std::filesystem::path& path, const ImageD& u) {
  std::string out;
  char buf[32];
  for (Index r = 0; r < u.rows(); ++r) {
    for (Index c = 0; c < u.cols(); ++c) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, u(r, c));
      out.append(buf, ptr);
      out.push_back(c + 1 == u.cols() ? '\n' : ',');
    }
  }
  write_bytes(path, out);
}

ImageD read_image(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".pgm" || ext == ".pnm") return read_pgm(path);
  if (ext == ".csv") return read_csv_grid(path);
  throw IoError("'" + path.string() + "': unsupported image format (use .pgm or .csv)");
}

void write_image(const std::filesystem::path& path, const ImageD& u) {
  const std::string ext = lower_ext(path);
  if (ext == ".pgm" || ext == ".pnm") return write_pgm(path, u);
  if (ext == ".csv") return write_csv_grid(path, u);
  throw IoError("'" + path.string() + "': unsupported image format (use .pgm or .csv)");
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_bytes(path, text);
}

}  // namespace tvsv
