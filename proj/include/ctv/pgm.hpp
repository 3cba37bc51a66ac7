#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>

#include "ctv/grid.hpp"

namespace ctv {

/// Intensity -> byte rule used at export: clamp to [0,255], then round
/// half-away-from-zero. Fixed so output bytes are platform-independent.
inline std::uint8_t quantize_u8(double v) {
  if (v <= 0.0) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v));
}

namespace detail {

// Whitespace-delimited header tokenizer with '#' comment support,
// tracking the byte offset for error reports.
struct PgmScanner {
  std::string_view bytes;
  std::size_t pos = 0;

  bool at_end() const { return pos >= bytes.size(); }

  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
           c == '\f';
  }

  void skip_space_and_comments() {
    while (!at_end()) {
      char c = bytes[pos];
      if (is_space(c)) {
        ++pos;
      } else if (c == '#') {
        while (!at_end() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  std::string token() {
    skip_space_and_comments();
    std::size_t start = pos;
    while (!at_end() && !is_space(bytes[pos]) && bytes[pos] != '#') ++pos;
    if (pos == start) throw ParseError("unexpected end of PGM header", pos);
    return std::string(bytes.substr(start, pos - start));
  }

  long number(const char* what) {
    std::size_t at = pos;
    std::string tok = token();
    at = pos - tok.size();
    long value = 0;
    for (char c : tok) {
      if (c < '0' || c > '9')
        throw ParseError(std::string("invalid ") + what + " '" + tok + "'",
                         at);
      value = value * 10 + (c - '0');
      if (value > 1000000) throw ParseError(std::string(what) + " too large", at);
    }
    return value;
  }
};

}  // namespace detail

/// Parses a binary 8-bit grayscale PGM ("P5", maxval 255). Exact integer
/// intensities are promoted to doubles.
inline ImageGrid read_pgm(std::string_view bytes) {
  detail::PgmScanner sc{bytes};
  sc.skip_space_and_comments();
  std::size_t magic_at = sc.pos;
  std::string magic = sc.token();
  if (magic != "P5")
    throw ParseError("expected PGM magic 'P5', got '" + magic + "'", magic_at);
  long w = sc.number("width");
  long h = sc.number("height");
  std::size_t maxval_at = sc.pos;
  long maxval = sc.number("maxval");
  if (w < 1 || h < 1)
    throw ParseError("PGM dimensions must be positive", maxval_at);
  if (maxval != 255)
    throw ParseError("unsupported maxval " + std::to_string(maxval) +
                         " (only 255)",
                     maxval_at);
  if (sc.at_end()) throw ParseError("missing payload", sc.pos);
  // Exactly one whitespace byte separates the header from the payload.
  if (!detail::PgmScanner::is_space(bytes[sc.pos]))
    throw ParseError("expected whitespace before payload", sc.pos);
  std::size_t payload = sc.pos + 1;
  std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - payload < need)
    throw ParseError("truncated payload: need " + std::to_string(need) +
                         " bytes, have " + std::to_string(bytes.size() - payload),
                     bytes.size());
  ImageGrid out(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < need; ++i)
    out.values[i] = static_cast<double>(
        static_cast<std::uint8_t>(bytes[payload + i]));
  return out;
}

/// Serializes as binary P5, maxval 255, one whitespace after each header
/// token. Deterministic byte output.
inline std::string write_pgm(const ImageGrid& f) {
  std::string out = "P5\n" + std::to_string(f.width) + " " +
                    std::to_string(f.height) + "\n255\n";
  out.reserve(out.size() + f.size());
  for (double v : f.values) out.push_back(static_cast<char>(quantize_u8(v)));
  return out;
}

inline ImageGrid load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  try {
    return read_pgm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.offset, /*locate=*/false);
  }
}

inline void save_pgm(const ImageGrid& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  std::string bytes = write_pgm(f);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

}  // namespace ctv
