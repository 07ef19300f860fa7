#pragma once

#include <string>

#include "pnp/image.hpp"

namespace pnp {

/// Reads a PGM (P5, 8-bit) or PFM (Pf, float32 little-endian) file; the format
/// is detected from the magic. PGM samples are scaled to [0,1].
Image read_image(const std::string& path);

/// Writes PGM or PFM depending on the file extension (.pgm/.pfm).
/// PGM export clamps to [0,1] and quantizes to 8 bits; PFM is lossless
/// (float32, scale -1.0, bottom-up rows per the PFM convention).
void write_image(const Image& img, const std::string& path);

Image read_pgm(const std::string& path);
Image read_pfm(const std::string& path);
void write_pgm(const Image& img, const std::string& path);
void write_pfm(const Image& img, const std::string& path);

}  // namespace pnp
