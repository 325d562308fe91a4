#include "projcal/image.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "projcal/errors.hpp"

namespace projcal {

Image::Image(int w, int h, Rgb fill) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

Rgb Image::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  pixels[i] = c.r;
  pixels[i + 1] = c.g;
  pixels[i + 2] = c.b;
}

bool Image::valid() const {
  return width > 0 && height > 0 && pixels.size() == static_cast<std::size_t>(width) * height * 3;
}

std::string encode_ppm(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::string& s, std::size_t& pos) {
  for (;;) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos < s.size() && s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  return s.substr(start, pos - start);
}

int parse_dim(const std::string& tok) {
  if (tok.empty() || tok.size() > 9) throw CorruptFileError("ppm: bad header field '" + tok + "'");
  for (char c : tok) {
    if (!std::isdigit(static_cast<unsigned char>(c))) throw CorruptFileError("ppm: bad header field '" + tok + "'");
  }
  return std::stoi(tok);
}

}  // namespace

Image decode_ppm(const std::string& bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P6") throw CorruptFileError("ppm: missing P6 magic");
  const int w = parse_dim(next_token(bytes, pos));
  const int h = parse_dim(next_token(bytes, pos));
  const int maxval = parse_dim(next_token(bytes, pos));
  if (w <= 0 || h <= 0) throw CorruptFileError("ppm: non-positive dimensions");
  if (maxval != 255) throw CorruptFileError("ppm: only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw CorruptFileError("ppm: truncated header");
  }
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() - pos != n) throw CorruptFileError("ppm: pixel payload size mismatch");
  Image img;
  img.width = w;
  img.height = h;
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  const std::string data = encode_ppm(img);
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_ppm(ss.str());
}

}  // namespace projcal
