#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace projcal {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

/// Row-major interleaved RGB raster.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, Rgb fill = {});

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  bool valid() const;

  bool operator==(const Image&) const = default;
};

/// Binary PPM: "P6\n{w} {h}\n255\n" followed by raw RGB bytes.
std::string encode_ppm(const Image& img);
Image decode_ppm(const std::string& bytes);

/// Throws IoError when the file cannot be written/read and CorruptFileError on malformed content.
void write_ppm(const std::filesystem::path& path, const Image& img);
Image read_ppm(const std::filesystem::path& path);

}  // namespace projcal
