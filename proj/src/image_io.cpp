#include "pnp/image_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace pnp {
namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

// PNM token reader: skips whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(in.get()));
      }
      return tok;
    }
  }
  return tok;
}

int parse_int(std::istream& in, const std::string& path, const std::string& field) {
  const std::string tok = next_token(in);
  if (tok.empty()) fail(path, "malformed header: missing " + field);
  try {
    std::size_t pos = 0;
    const int v = std::stoi(tok, &pos);
    if (pos != tok.size()) fail(path, "malformed header: bad " + field + " '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(path, "malformed header: bad " + field + " '" + tok + "'");
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  const std::string magic = next_token(in);
  if (magic != "P5") fail(path, "malformed header: expected P5 magic, got '" + magic + "'");
  const int width = parse_int(in, path, "width");
  const int height = parse_int(in, path, "height");
  const int maxval = parse_int(in, path, "maxval");
  if (width <= 0 || height <= 0) fail(path, "malformed header: non-positive extent");
  if (maxval <= 0 || maxval > 255) fail(path, "malformed header: maxval outside [1,255]");
  in.get();  // single whitespace separating header and payload

  std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) fail(path, "truncated payload");

  Image img(width, height);
  for (std::size_t i = 0; i < raw.size(); ++i) img[i] = static_cast<double>(raw[i]) / maxval;
  return img;
}

void write_pgm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<std::uint8_t> raw(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = std::clamp(img[i], 0.0, 1.0);
    raw[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) fail(path, "write failed");
}

Image read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  const std::string magic = next_token(in);
  if (magic != "Pf") fail(path, "malformed header: expected Pf magic, got '" + magic + "'");
  const int width = parse_int(in, path, "width");
  const int height = parse_int(in, path, "height");
  const std::string scale_tok = next_token(in);
  if (scale_tok.empty()) fail(path, "malformed header: missing scale");
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::logic_error&) {
    fail(path, "malformed header: bad scale '" + scale_tok + "'");
  }
  if (!(scale < 0.0)) fail(path, "malformed header: only little-endian (negative scale) supported");
  if (width <= 0 || height <= 0) fail(path, "malformed header: non-positive extent");
  in.get();

  std::vector<float> raw(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(raw.size() * sizeof(float))) {
    fail(path, "truncated payload");
  }

  // PFM rows run bottom-to-top.
  Image img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      img(x, y) = static_cast<double>(raw[static_cast<std::size_t>(height - 1 - y) * width + x]);
    }
  }
  return img;
}

void write_pfm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open file for writing");
  out << "Pf\n" << img.width() << " " << img.height() << "\n-1.0\n";
  std::vector<float> raw(img.size());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      raw[static_cast<std::size_t>(img.height() - 1 - y) * img.width() + x] =
          static_cast<float>(img(x, y));
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(float)));
  if (!out) fail(path, "write failed");
}

Image read_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) fail(path, "cannot open file");
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  if (magic[0] == 'P' && magic[1] == '5') return read_pgm(path);
  if (magic[0] == 'P' && magic[1] == 'f') return read_pfm(path);
  fail(path, "unrecognized format (expected P5 or Pf magic)");
}

void write_image(const Image& img, const std::string& path) {
  if (ends_with(path, ".pfm")) {
    write_pfm(img, path);
  } else if (ends_with(path, ".pgm")) {
    write_pgm(img, path);
  } else {
    fail(path, "unsupported extension (use .pgm or .pfm)");
  }
}

}  // namespace pnp
