#include "despeckle/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "raw image payloads are little-endian; add byte swapping for this platform");

namespace despeckle {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ImageIoError(path + ": " + message);
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---- PGM ----------------------------------------------------------------

struct Cursor {
    const std::string& data;
    const std::string& path;
    std::size_t pos = 0;
};

void skip_header_space(Cursor& cur) {
    while (cur.pos < cur.data.size()) {
        const char ch = cur.data[cur.pos];
        if (ch == '#') {
            while (cur.pos < cur.data.size() && cur.data[cur.pos] != '\n') ++cur.pos;
        } else if (std::isspace(static_cast<unsigned char>(ch))) {
            ++cur.pos;
        } else {
            break;
        }
    }
}

long parse_header_int(Cursor& cur, const char* what) {
    skip_header_space(cur);
    if (cur.pos >= cur.data.size()) {
        fail(cur.path, std::string("unexpected end of file while reading ") + what +
                           " (byte " + std::to_string(cur.pos) + ")");
    }
    const std::size_t start = cur.pos;
    long value = 0;
    while (cur.pos < cur.data.size() &&
           std::isdigit(static_cast<unsigned char>(cur.data[cur.pos]))) {
        value = value * 10 + (cur.data[cur.pos] - '0');
        if (value > 1000000000L) {
            fail(cur.path, std::string(what) + " out of range at byte " + std::to_string(start));
        }
        ++cur.pos;
    }
    if (cur.pos == start) {
        fail(cur.path, std::string("expected integer for ") + what + " at byte " +
                           std::to_string(start));
    }
    return value;
}

ImageGrid read_pgm(const std::string& path, const std::string& data) {
    Cursor cur{data, path};
    if (data.size() < 2 || data[0] != 'P' || (data[1] != '2' && data[1] != '5')) {
        fail(path, "not a P2/P5 PGM file (bad magic at byte 0)");
    }
    const bool binary = data[1] == '5';
    cur.pos = 2;
    const long width = parse_header_int(cur, "width");
    const long height = parse_header_int(cur, "height");
    const long maxval = parse_header_int(cur, "maxval");
    if (width < 1 || height < 1) fail(path, "image dimensions must be positive");
    if (maxval < 1 || maxval > 65535) fail(path, "maxval must lie in [1, 65535]");

    ImageGrid image(static_cast<int>(width), static_cast<int>(height));
    const std::size_t count = image.size();
    if (binary) {
        if (cur.pos >= data.size() ||
            !std::isspace(static_cast<unsigned char>(data[cur.pos]))) {
            fail(path, "expected single whitespace after maxval at byte " +
                           std::to_string(cur.pos));
        }
        ++cur.pos;
        const std::size_t bytes_per_sample = maxval < 256 ? 1 : 2;
        const std::size_t needed = count * bytes_per_sample;
        const std::size_t have = data.size() - cur.pos;
        if (have < needed) {
            fail(path, "truncated payload: expected " + std::to_string(needed) +
                           " bytes, found " + std::to_string(have));
        }
        if (have > needed) {
            fail(path, "unexpected " + std::to_string(have - needed) +
                           " extra bytes after payload");
        }
        for (std::size_t i = 0; i < count; ++i) {
            const auto* p =
                reinterpret_cast<const unsigned char*>(data.data() + cur.pos + i * bytes_per_sample);
            const long v = bytes_per_sample == 1
                               ? static_cast<long>(p[0])
                               : static_cast<long>(p[0]) << 8 | static_cast<long>(p[1]);
            if (v > maxval) {
                fail(path, "sample " + std::to_string(i) + " exceeds maxval");
            }
            image.pixels[i] = static_cast<double>(v);
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const long v = parse_header_int(cur, "pixel value");
            if (v > maxval) {
                fail(path, "pixel " + std::to_string(i) + " exceeds maxval");
            }
            image.pixels[i] = static_cast<double>(v);
        }
        skip_header_space(cur);
        if (cur.pos != data.size()) {
            fail(path, "unexpected trailing data at byte " + std::to_string(cur.pos));
        }
    }
    return image;
}

// ---- Raw float64 with sidecar -------------------------------------------

struct RawHeader {
    long width = -1;
    long height = -1;
    bool dtype_ok = false;
    bool byteorder_ok = false;
    bool layout_ok = false;
};

RawHeader parse_sidecar(const std::string& sidecar_path) {
    std::ifstream in(sidecar_path);
    if (!in) fail(sidecar_path, "cannot open sidecar");
    RawHeader header;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string key, value;
        if (!(fields >> key)) continue;  // blank line
        if (!(fields >> value)) {
            fail(sidecar_path, "line " + std::to_string(line_no) + ": missing value for '" +
                                   key + "'");
        }
        if (key == "width" || key == "height") {
            long v = 0;
            try {
                v = std::stol(value);
            } catch (const std::exception&) {
                v = -1;
            }
            if (v < 1 || v > 1000000) {
                fail(sidecar_path,
                     "line " + std::to_string(line_no) + ": bad " + key + " '" + value + "'");
            }
            (key == "width" ? header.width : header.height) = v;
        } else if (key == "dtype") {
            if (value != "float64") {
                fail(sidecar_path, "line " + std::to_string(line_no) +
                                       ": unsupported dtype '" + value + "' (need float64)");
            }
            header.dtype_ok = true;
        } else if (key == "byteorder") {
            if (value != "little") {
                fail(sidecar_path, "line " + std::to_string(line_no) +
                                       ": unsupported byteorder '" + value + "' (need little)");
            }
            header.byteorder_ok = true;
        } else if (key == "layout") {
            if (value != "row-major") {
                fail(sidecar_path, "line " + std::to_string(line_no) +
                                       ": unsupported layout '" + value + "' (need row-major)");
            }
            header.layout_ok = true;
        } else {
            fail(sidecar_path, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (header.width < 0) fail(sidecar_path, "missing 'width'");
    if (header.height < 0) fail(sidecar_path, "missing 'height'");
    if (!header.dtype_ok) fail(sidecar_path, "missing 'dtype'");
    if (!header.byteorder_ok) fail(sidecar_path, "missing 'byteorder'");
    if (!header.layout_ok) fail(sidecar_path, "missing 'layout'");
    return header;
}

ImageGrid read_raw(const std::string& path) {
    const RawHeader header = parse_sidecar(path + ".hdr");
    const std::string data = read_file_bytes(path);
    ImageGrid image(static_cast<int>(header.width), static_cast<int>(header.height));
    const std::size_t needed = image.size() * sizeof(double);
    if (data.size() != needed) {
        fail(path, "payload size mismatch: expected " + std::to_string(needed) +
                       " bytes, found " + std::to_string(data.size()));
    }
    std::memcpy(image.pixels.data(), data.data(), needed);
    for (std::size_t i = 0; i < image.size(); ++i) {
        const double v = image.pixels[i];
        if (!std::isfinite(v)) {
            fail(path, "non-finite value at pixel " + std::to_string(i));
        }
        if (v < 0.0) {
            fail(path, "negative value at pixel " + std::to_string(i));
        }
    }
    return image;
}

// ---- Annotation JSON -----------------------------------------------------

json rect_to_json(const Rect& r) {
    return json{{"row", r.row}, {"col", r.col}, {"height", r.height}, {"width", r.width}};
}

Rect rect_from_json(const json& j) {
    return Rect{j.at("row").get<int>(), j.at("col").get<int>(),
                j.at("height").get<int>(), j.at("width").get<int>()};
}

json coords_to_json(const std::vector<PixelCoord>& coords) {
    json arr = json::array();
    for (const PixelCoord& p : coords) arr.push_back(json::array({p.row, p.col}));
    return arr;
}

std::vector<PixelCoord> coords_from_json(const json& j) {
    std::vector<PixelCoord> coords;
    coords.reserve(j.size());
    for (const json& item : j) {
        if (!item.is_array() || item.size() != 2) {
            throw std::invalid_argument("pixel coordinate must be a [row, col] pair");
        }
        coords.push_back({item.at(0).get<int>(), item.at(1).get<int>()});
    }
    return coords;
}

}  // namespace

LoadedImage read_image(const std::string& path) {
    LoadedImage loaded;
    if (std::filesystem::exists(path + ".hdr")) {
        loaded.image = read_raw(path);
        loaded.format = "raw";
    } else {
        const std::string data = read_file_bytes(path);
        if (data.size() >= 2 && data[0] == 'P' && (data[1] == '2' || data[1] == '5')) {
            loaded.image = read_pgm(path, data);
            loaded.format = "pgm";
        } else {
            fail(path, "unsupported format: no PGM magic and no '" + path + ".hdr' sidecar");
        }
    }
    double smallest_positive = std::numeric_limits<double>::infinity();
    for (double v : loaded.image.pixels) {
        if (v > 0.0 && v < smallest_positive) smallest_positive = v;
    }
    if (!std::isfinite(smallest_positive)) {
        fail(path, "image has no positive pixels");
    }
    for (double& v : loaded.image.pixels) {
        if (v == 0.0) {
            v = smallest_positive;
            ++loaded.zeros_replaced;
        }
    }
    return loaded;
}

void write_image(const ImageGrid& image, const std::string& path, ImageFormat format) {
    if (image.pixels.empty()) {
        throw std::invalid_argument("write_image: empty image");
    }
    for (std::size_t i = 0; i < image.size(); ++i) {
        if (!std::isfinite(image.pixels[i])) {
            fail(path, "refusing to write non-finite value at pixel " + std::to_string(i));
        }
    }
    if (format == ImageFormat::kRawFloat) {
        {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out) fail(path, "cannot open for writing");
            out.write(reinterpret_cast<const char*>(image.pixels.data()),
                      static_cast<std::streamsize>(image.size() * sizeof(double)));
            if (!out) fail(path, "write failed");
        }
        std::ofstream sidecar(path + ".hdr", std::ios::trunc);
        if (!sidecar) fail(path + ".hdr", "cannot open for writing");
        sidecar << "width " << image.width << "\n"
                << "height " << image.height << "\n"
                << "dtype float64\n"
                << "byteorder little\n"
                << "layout row-major\n";
        if (!sidecar) fail(path + ".hdr", "write failed");
        return;
    }

    double lo = image.pixels[0];
    double hi = image.pixels[0];
    for (double v : image.pixels) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    char comment[96];
    std::snprintf(comment, sizeof comment, "# scale %.17g offset %.17g\n", scale, lo);
    out << "P5\n" << comment << image.width << " " << image.height << "\n65535\n";
    std::vector<unsigned char> payload;
    payload.reserve(image.size() * 2);
    for (double v : image.pixels) {
        const long q = std::lround((v - lo) * scale);
        const unsigned u = static_cast<unsigned>(std::clamp(q, 0L, 65535L));
        payload.push_back(static_cast<unsigned char>(u >> 8));
        payload.push_back(static_cast<unsigned char>(u & 0xff));
    }
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!out) fail(path, "write failed");
}

PhantomAnnotation read_annotation(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open file");
    PhantomAnnotation annotation;
    try {
        const json j = json::parse(in);
        annotation.homogeneous_region = rect_from_json(j.at("homogeneous_region"));
        for (const json& jl : j.value("lines", json::array())) {
            LineAnnotation line;
            line.line = coords_from_json(jl.at("pixels"));
            line.flank_a = coords_from_json(jl.at("flank_a"));
            line.flank_b = coords_from_json(jl.at("flank_b"));
            line.reference_contrast = jl.at("reference_contrast").get<double>();
            annotation.lines.push_back(std::move(line));
        }
        for (const json& je : j.value("edges", json::array())) {
            EdgeAnnotation edge;
            edge.strip_a = rect_from_json(je.at("strip_a"));
            edge.strip_b = rect_from_json(je.at("strip_b"));
            edge.reference_step = je.at("reference_step").get<double>();
            annotation.edges.push_back(edge);
        }
    } catch (const json::exception& e) {
        fail(path, std::string("annotation parse error: ") + e.what());
    } catch (const std::invalid_argument& e) {
        fail(path, std::string("annotation parse error: ") + e.what());
    }
    return annotation;
}

void write_annotation(const PhantomAnnotation& annotation, const std::string& path) {
    json j;
    j["homogeneous_region"] = rect_to_json(annotation.homogeneous_region);
    j["lines"] = json::array();
    for (const LineAnnotation& line : annotation.lines) {
        j["lines"].push_back(json{{"pixels", coords_to_json(line.line)},
                                  {"flank_a", coords_to_json(line.flank_a)},
                                  {"flank_b", coords_to_json(line.flank_b)},
                                  {"reference_contrast", line.reference_contrast}});
    }
    j["edges"] = json::array();
    for (const EdgeAnnotation& edge : annotation.edges) {
        j["edges"].push_back(json{{"strip_a", rect_to_json(edge.strip_a)},
                                  {"strip_b", rect_to_json(edge.strip_b)},
                                  {"reference_step", edge.reference_step}});
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out << j.dump(2) << "\n";
    if (!out) fail(path, "write failed");
}

}  // namespace despeckle
