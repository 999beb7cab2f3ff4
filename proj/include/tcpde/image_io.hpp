#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "tcpde/grid.hpp"

namespace tcpde {

/// Loads an 8-bit grayscale image, widened to reals in [0,255].
/// PGM (P2 and P5) is always supported; 8-bit grayscale PNG when the
/// library is built with PNG support. Color or non-8-bit inputs are
/// rejected with a format diagnostic.
ImageGrid load_image(const std::string& path);

/// Clamps to [0,255], rounds half-up and writes the file; format follows
/// the extension (.png when built with PNG support, binary PGM otherwise).
/// `comment` is embedded as a header comment where the format allows it.
void save_image(const ImageGrid& g, const std::string& path,
                const std::string& comment = "");

/// Stream-level PGM codecs (used directly by tests).
ImageGrid load_pgm(std::istream& in, const std::string& origin = "<stream>");
void save_pgm(const ImageGrid& g, std::ostream& out, const std::string& comment = "");

/// Clamp to [0,255] and round half-up to an 8-bit value.
std::uint8_t quantize_u8(double v);

/// True when the library was compiled with PNG read/write support.
bool png_supported();

}  // namespace tcpde
