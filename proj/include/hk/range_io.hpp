#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hk/range_image.hpp"

namespace hk {

enum class ImageFormat { AsciiGrid, Pgm16 };

namespace detail {

inline std::string readWholeFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::FileNotFound, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string formatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

[[noreturn]] inline void parseFail(const std::string& path, Index line,
                                   const std::string& what) {
  raise(Errc::ParseError,
        path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace detail

/// Text range image. First line is "RIG <width> <height>", followed by
/// <height> lines of <width> whitespace-separated depth values; the token
/// "NaN" marks an invalid pixel.
template <typename Scalar>
RangeImage<Scalar> loadAsciiGrid(const std::string& path) {
  std::string text = detail::readWholeFile(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) detail::parseFail(path, 1, "empty file");

  std::istringstream header(line);
  std::string magic;
  long long width = 0, height = 0;
  if (!(header >> magic >> width >> height) || magic != "RIG")
    detail::parseFail(path, 1, "expected header 'RIG <width> <height>'");
  if (width < 1 || height < 1)
    detail::parseFail(path, 1, "non-positive dimensions");

  RangeImage<Scalar> img;
  img.depth = DepthGrid<Scalar>::Zero(height, width);
  img.valid = PixelMask::Constant(height, width, false);

  for (long long r = 0; r < height; ++r) {
    if (!std::getline(in, line))
      raise(Errc::DimensionMismatch,
            path + ": expected " + std::to_string(height) +
                " data rows, got " + std::to_string(r));
    std::istringstream row(line);
    std::string tok;
    long long c = 0;
    while (row >> tok) {
      if (c >= width)
        raise(Errc::DimensionMismatch,
              path + ":" + std::to_string(r + 2) + ": more than " +
                  std::to_string(width) + " values in row");
      if (tok == "NaN") {
        img.valid(r, c) = false;
      } else {
        const char* s = tok.c_str();
        char* end = nullptr;
        double v = std::strtod(s, &end);
        if (end != s + tok.size() || !std::isfinite(v))
          detail::parseFail(path, r + 2, "bad depth token '" + tok + "'");
        img.depth(r, c) = static_cast<Scalar>(v);
        img.valid(r, c) = true;
      }
      ++c;
    }
    if (c != width)
      raise(Errc::DimensionMismatch,
            path + ":" + std::to_string(r + 2) + ": expected " +
                std::to_string(width) + " values, got " + std::to_string(c));
  }
  return img;
}

template <typename Scalar>
void saveAsciiGrid(const RangeImage<Scalar>& img, const std::string& path) {
  img.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::FileNotFound, "cannot write " + path);
  out << "RIG " << img.cols() << " " << img.rows() << "\n";
  for (Index r = 0; r < img.rows(); ++r) {
    for (Index c = 0; c < img.cols(); ++c) {
      if (c) out << ' ';
      if (img.valid(r, c))
        out << detail::formatDouble(static_cast<double>(img.depth(r, c)));
      else
        out << "NaN";
    }
    out << "\n";
  }
}

namespace detail {

/// Pulls the next integer token from a PGM header, skipping whitespace and
/// '#' comments. Comments of the form "# scale <s>" set the depth scale.
struct PgmHeaderCursor {
  const std::string& data;
  const std::string& path;
  std::size_t pos = 0;
  double scale = 1.0;

  void skipSeparators() {
    while (pos < data.size()) {
      char ch = data[pos];
      if (ch == '#') {
        std::size_t eol = data.find('\n', pos);
        if (eol == std::string::npos) eol = data.size();
        parseComment(data.substr(pos + 1, eol - pos - 1));
        pos = eol;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos;
      } else {
        break;
      }
    }
  }

  void parseComment(const std::string& body) {
    std::istringstream in(body);
    std::string word;
    if (in >> word && word == "scale") {
      double s = 0;
      if (in >> s && std::isfinite(s) && s > 0) scale = s;
    }
  }

  long long nextInt() {
    skipSeparators();
    std::size_t start = pos;
    while (pos < data.size() &&
           std::isdigit(static_cast<unsigned char>(data[pos])))
      ++pos;
    if (pos == start)
      raise(Errc::ParseError, path + ": malformed PGM header");
    return std::stoll(data.substr(start, pos - start));
  }
};

}  // namespace detail

/// Binary 16-bit PGM ("P5", maxval 65535, big-endian samples). Sample 0 marks
/// an invalid pixel; a valid sample v maps to depth v * scale, where the
/// scale rides in a "# scale <s>" header comment (default 1).
template <typename Scalar>
RangeImage<Scalar> loadPgm16(const std::string& path) {
  std::string data = detail::readWholeFile(path);
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
    raise(Errc::ParseError, path + ": not a binary PGM (P5)");

  detail::PgmHeaderCursor cur{data, path, 2};
  long long width = cur.nextInt();
  long long height = cur.nextInt();
  long long maxval = cur.nextInt();
  if (width < 1 || height < 1)
    raise(Errc::ParseError, path + ": non-positive dimensions");
  if (maxval != 65535)
    raise(Errc::ParseError,
          path + ": expected maxval 65535, got " + std::to_string(maxval));
  if (cur.pos >= data.size() ||
      !std::isspace(static_cast<unsigned char>(data[cur.pos])))
    raise(Errc::ParseError, path + ": malformed PGM header");
  std::size_t payload = cur.pos + 1;

  std::size_t need = static_cast<std::size_t>(width) * height * 2;
  if (data.size() - payload != need)
    raise(Errc::DimensionMismatch,
          path + ": payload holds " + std::to_string(data.size() - payload) +
              " bytes, header promises " + std::to_string(need));

  RangeImage<Scalar> img;
  img.depth = DepthGrid<Scalar>::Zero(height, width);
  img.valid = PixelMask::Constant(height, width, false);
  const unsigned char* p =
      reinterpret_cast<const unsigned char*>(data.data()) + payload;
  for (long long r = 0; r < height; ++r) {
    for (long long c = 0; c < width; ++c) {
      unsigned v = (static_cast<unsigned>(p[0]) << 8) | p[1];
      p += 2;
      if (v != 0) {
        img.depth(r, c) = static_cast<Scalar>(v * cur.scale);
        img.valid(r, c) = true;
      }
    }
  }
  return img;
}

/// Quantizes valid depths to round(depth / scale) and writes them as 16-bit
/// big-endian samples; 0 is reserved for invalid pixels. Depths must land in
/// [1, 65535] after quantization, so loading reproduces depths exactly for
/// inputs already on the scale grid.
template <typename Scalar>
void savePgm16(const RangeImage<Scalar>& img, const std::string& path,
               double scale = 1.0) {
  img.validate();
  if (!(scale > 0) || !std::isfinite(scale))
    raise(Errc::BadParams, "pgm scale must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::FileNotFound, "cannot write " + path);
  out << "P5\n# scale " << detail::formatDouble(scale) << "\n"
      << img.cols() << " " << img.rows() << "\n65535\n";
  for (Index r = 0; r < img.rows(); ++r) {
    for (Index c = 0; c < img.cols(); ++c) {
      long long v = 0;
      if (img.valid(r, c)) {
        v = std::llround(static_cast<double>(img.depth(r, c)) / scale);
        if (v < 1 || v > 65535)
          raise(Errc::BadParams,
                "depth " + detail::formatDouble(img.depth(r, c)) +
                    " falls outside [1, 65535] at scale " +
                    detail::formatDouble(scale));
      }
      unsigned char b[2] = {static_cast<unsigned char>((v >> 8) & 0xff),
                            static_cast<unsigned char>(v & 0xff)};
      out.write(reinterpret_cast<const char*>(b), 2);
    }
  }
}

/// 8-bit binary PGM, used for classification maps.
inline void writePgm8(const ByteGrid& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::FileNotFound, "cannot write " + path);
  out << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
  for (Index r = 0; r < img.rows(); ++r)
    for (Index c = 0; c < img.cols(); ++c)
      out.put(static_cast<char>(img(r, c)));
}

inline std::optional<ImageFormat> sniffFormat(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::FileNotFound, "cannot open " + path);
  char magic[3] = {0, 0, 0};
  in.read(magic, 3);
  if (in.gcount() >= 2 && magic[0] == 'P' && magic[1] == '5')
    return ImageFormat::Pgm16;
  if (in.gcount() >= 3 && magic[0] == 'R' && magic[1] == 'I' &&
      magic[2] == 'G')
    return ImageFormat::AsciiGrid;
  return std::nullopt;
}

template <typename Scalar>
RangeImage<Scalar> loadRangeImage(const std::string& path,
                                  ImageFormat format) {
  return format == ImageFormat::AsciiGrid ? loadAsciiGrid<Scalar>(path)
                                          : loadPgm16<Scalar>(path);
}

}  // namespace hk
