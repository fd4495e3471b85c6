#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "despeckle/image.hpp"
#include "despeckle/metrics.hpp"

namespace despeckle {

/// I/O failures carry the offending path and, where known, the byte or line
/// position inside the file.
class ImageIoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct LoadedImage {
    ImageGrid image;
    std::size_t zeros_replaced = 0;  // zero pixels promoted to the smallest positive value
    std::string format;              // "pgm" or "raw"
};

/// Reads a PGM (P2/P5, 8 or 16 bit, values used as-is) or a raw float64
/// image (payload file plus `<path>.hdr` sidecar).  A file with a sidecar is
/// treated as raw; otherwise the PGM magic decides.  Zero pixels are replaced
/// by the smallest positive pixel of the image, with the count reported, so
/// downstream log-likelihood code never sees log(0).
LoadedImage read_image(const std::string& path);

enum class ImageFormat { kPgm, kRawFloat };

/// kRawFloat writes the exact little-endian float64 payload plus sidecar
/// (lossless round trip).  kPgm writes a 16-bit P5 rescaling [min, max] to
/// [0, 65535]; the scale and offset are recorded in a header comment, and a
/// constant image maps to all zeros.
void write_image(const ImageGrid& image, const std::string& path, ImageFormat format);

/// JSON annotation files describing measurement regions on an image.
PhantomAnnotation read_annotation(const std::string& path);
void write_annotation(const PhantomAnnotation& annotation, const std::string& path);

}  // namespace despeckle
