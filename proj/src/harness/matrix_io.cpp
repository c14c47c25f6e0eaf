#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "prune24/harness.hpp"

namespace prune24 {
namespace {

constexpr char kMagic[4] = {'P', 'R', 'X', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <typename T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw MatrixFormatError("truncated");
  return to_little(v);
}

bool is_csv(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext == ".csv";
}

std::size_t parse_size(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw MatrixFormatError("bad csv header '" + s + "'");
  }
  if (pos != s.size()) throw MatrixFormatError("bad csv header '" + s + "'");
  return static_cast<std::size_t>(v);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

std::vector<double> parse_doubles(std::string_view s) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss{std::string(s)};
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    // strtod rather than stod: subnormals are valid values, not range errors.
    char* end = nullptr;
    const double v = item.empty() ? 0.0 : std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size()) throw std::invalid_argument("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  os << m.rows() << ',' << m.cols() << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) os << (c ? "," : "") << m(r, c);
    os << '\n';
  }
}

Matrix read_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw MatrixFormatError("truncated");
  const auto comma = line.find(',');
  if (comma == std::string::npos) throw MatrixFormatError("bad csv header '" + trim(line) + "'");
  const std::size_t rows = parse_size(trim(line.substr(0, comma)));
  const std::size_t cols = parse_size(trim(line.substr(comma + 1)));
  if (cols && rows > std::numeric_limits<std::size_t>::max() / cols) throw MatrixFormatError("dimension overflow");
  std::vector<double> data;
  data.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(is, line)) throw MatrixFormatError("truncated");
    std::vector<double> vals;
    try {
      vals = parse_doubles(line);
    } catch (const std::invalid_argument& e) {
      throw MatrixFormatError(std::string("row ") + std::to_string(r) + ": " + e.what());
    }
    if (vals.size() != cols)
      throw MatrixFormatError("row " + std::to_string(r) + " has " + std::to_string(vals.size()) + " values, expected " +
                              std::to_string(cols));
    data.insert(data.end(), vals.begin(), vals.end());
  }
  return Matrix(rows, cols, std::move(data));
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  if (is_csv(path)) {
    write_matrix_csv(os, m);
  } else {
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::uint64_t>(os, m.rows());
    put<std::uint64_t>(os, m.cols());
    for (double v : m.data()) put<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
  }
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
  if (is_csv(path)) return read_matrix_csv(is);

  char magic[4] = {};
  if (!is.read(magic, 4)) throw MatrixFormatError("truncated");
  if (std::memcmp(magic, kMagic, 4) != 0) throw MatrixFormatError("bad magic");
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion) throw MatrixFormatError("unsupported version " + std::to_string(version));
  const auto rows = get<std::uint64_t>(is);
  const auto cols = get<std::uint64_t>(is);
  if (cols && rows > std::numeric_limits<std::uint64_t>::max() / 8 / cols) throw MatrixFormatError("dimension overflow");

  // Check the payload length before allocating for it.
  const auto here = is.tellg();
  is.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::uint64_t>(is.tellg() - here);
  is.seekg(here);
  if (remaining < rows * cols * 8) throw MatrixFormatError("truncated");

  std::vector<double> data(rows * cols);
  for (auto& v : data) v = std::bit_cast<double>(get<std::uint64_t>(is));
  return Matrix(rows, cols, std::move(data));
}

}  // namespace prune24
