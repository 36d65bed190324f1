#pragma once

#include <Eigen/Dense>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "cfrechet/errors.hpp"

namespace cfrechet {

/// Binary embedding container: 16-byte header (magic "CFMB", then version,
/// row count n and column count d as little-endian uint32), followed by
/// exactly n*d little-endian IEEE-754 float32 values in row-major order.
inline constexpr std::array<char, 4> kEmbeddingMagic = {'C', 'F', 'M', 'B'};
inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

namespace detail {

inline void put_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

inline std::uint32_t get_u32_le(const std::string& buf, std::size_t offset) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(buf[offset])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(buf[offset + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(buf[offset + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(buf[offset + 3])) << 24;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + path.string() + " for reading");
  }
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw InputError("read failure on " + path.string());
  }
  return buf;
}

}  // namespace detail

/// Writes bytes to a temporary sibling file and renames it into place, so
/// readers never observe a partially written file.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw InputError("cannot open " + tmp.string() + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw InputError("write failure on " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw InputError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                     ec.message());
  }
}

/// Serializes rows to the binary embedding format. Values are stored as
/// float32; values outside float32 range are rejected rather than silently
/// saturated to infinity.
inline void write_embedding_file(const std::filesystem::path& path,
                                 const Eigen::MatrixXd& rows) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  if (n < 1 || d < 1) {
    throw InputError("embedding table must be non-empty, got " + std::to_string(n) +
                     "x" + std::to_string(d));
  }
  std::string bytes;
  bytes.reserve(16 + static_cast<std::size_t>(n) * static_cast<std::size_t>(d) * 4);
  bytes.append(kEmbeddingMagic.data(), kEmbeddingMagic.size());
  detail::put_u32_le(bytes, kEmbeddingFormatVersion);
  detail::put_u32_le(bytes, static_cast<std::uint32_t>(n));
  detail::put_u32_le(bytes, static_cast<std::uint32_t>(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double v = rows(i, j);
      const float f = static_cast<float>(v);
      if (!std::isfinite(v) || !std::isfinite(f)) {
        throw InputError("value at row " + std::to_string(i) + ", column " +
                         std::to_string(j) + " cannot be stored as finite float32");
      }
      std::uint32_t raw;
      std::memcpy(&raw, &f, 4);
      detail::put_u32_le(bytes, raw);
    }
  }
  write_file_atomic(path, bytes);
}

/// Parses the binary embedding format, promoting the float32 payload to
/// float64. Errors name the file and byte offset of the offending data.
inline Eigen::MatrixXd read_embedding_file(const std::filesystem::path& path) {
  const std::string buf = detail::read_file_bytes(path);
  if (buf.size() < 16) {
    throw InputError(path.string() + ": truncated header, " +
                     std::to_string(buf.size()) + " bytes < 16");
  }
  if (!std::equal(kEmbeddingMagic.begin(), kEmbeddingMagic.end(), buf.begin())) {
    throw InputError(path.string() + ": bad magic at offset 0, expected \"CFMB\"");
  }
  const std::uint32_t version = detail::get_u32_le(buf, 4);
  if (version != kEmbeddingFormatVersion) {
    throw InputError(path.string() + ": unsupported format version " +
                     std::to_string(version) + " at offset 4");
  }
  const std::uint32_t n = detail::get_u32_le(buf, 8);
  const std::uint32_t d = detail::get_u32_le(buf, 12);
  if (n == 0 || d == 0) {
    throw InputError(path.string() + ": empty table (n=" + std::to_string(n) +
                     ", d=" + std::to_string(d) + ")");
  }
  const std::size_t expected = 16 + static_cast<std::size_t>(n) * d * 4;
  if (buf.size() != expected) {
    throw InputError(path.string() + ": payload length mismatch, expected " +
                     std::to_string(expected) + " bytes for n=" + std::to_string(n) +
                     " d=" + std::to_string(d) + ", found " +
                     std::to_string(buf.size()));
  }
  Eigen::MatrixXd rows(n, d);
  std::size_t offset = 16;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < d; ++j, offset += 4) {
      const std::uint32_t raw = detail::get_u32_le(buf, offset);
      float f;
      std::memcpy(&f, &raw, 4);
      if (!std::isfinite(f)) {
        throw InputError(path.string() + ": non-finite value at byte offset " +
                         std::to_string(offset) + " (row " + std::to_string(i) +
                         ", column " + std::to_string(j) + ")");
      }
      rows(i, j) = static_cast<double>(f);
    }
  }
  return rows;
}

/// Writes the CSV sample format: header row "f0,f1,...", then one sample per
/// line with shortest-round-trip decimal values.
inline void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& rows) {
  if (rows.rows() < 1 || rows.cols() < 1) {
    throw InputError("sample table must be non-empty");
  }
  std::string text;
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    if (j > 0) text.push_back(',');
    text += "f" + std::to_string(j);
  }
  text.push_back('\n');
  char num[64];
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (j > 0) text.push_back(',');
      const auto res = std::to_chars(num, num + sizeof(num), rows(i, j));
      text.append(num, res.ptr);
    }
    text.push_back('\n');
  }
  write_file_atomic(path, text);
}

/// Parses the CSV sample format back into a table. The header row is
/// required and fixes the column count.
inline Eigen::MatrixXd read_csv(const std::filesystem::path& path) {
  const std::string buf = detail::read_file_bytes(path);
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < buf.size()) {
    std::size_t end = buf.find('\n', pos);
    if (end == std::string::npos) end = buf.size();
    std::string line = buf.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
    pos = end + 1;
  }
  if (lines.size() < 2) {
    throw InputError(path.string() + ": expected a header row and at least one sample");
  }

  const auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return fields;
  };

  const std::vector<std::string> header = split(lines[0]);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] != "f" + std::to_string(j)) {
      throw InputError(path.string() + ": header mismatch, expected column \"f" +
                       std::to_string(j) + "\", found \"" + header[j] + "\"");
    }
  }
  const std::size_t d = header.size();

  Eigen::MatrixXd rows(static_cast<Eigen::Index>(lines.size() - 1),
                       static_cast<Eigen::Index>(d));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> fields = split(lines[i]);
    if (fields.size() != d) {
      throw InputError(path.string() + ": line " + std::to_string(i + 1) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(d));
    }
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      const char* first = fields[j].data();
      const char* last = first + fields[j].size();
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
        throw InputError(path.string() + ": line " + std::to_string(i + 1) +
                         ", field " + std::to_string(j) + ": cannot parse \"" +
                         fields[j] + "\" as a finite number");
      }
      rows(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return rows;
}

/// True when the file starts with the binary embedding magic.
inline bool is_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + path.string() + " for reading");
  }
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  return in.gcount() == 4 && magic == kEmbeddingMagic;
}

/// Loads a sample table from either supported format, sniffing the magic.
inline Eigen::MatrixXd load_samples(const std::filesystem::path& path) {
  return is_embedding_file(path) ? read_embedding_file(path) : read_csv(path);
}

}  // namespace cfrechet
