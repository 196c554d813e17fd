#pragma once

// File IO: grayscale PNG / PGM rasters, the JSON meta sidecar, the f32le
// float-grid container and RGB PNG output for overlays.

#include <png.h>

#include <array>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cervdx/core.hpp"

namespace cervdx {

namespace fs = std::filesystem;

/// A decoded grayscale raster with its stored bit depth (8 or 16).
struct GrayRaster {
    Grid<std::uint16_t> values;
    int bit_depth = 8;
};

inline std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_binary_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngErrorState {
    std::jmp_buf jump;
    char message[256] = {};
};

extern "C" inline void png_error_to_jump(png_structp png, png_const_charp msg) {
    auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
    std::snprintf(state->message, sizeof state->message, "%s", msg);
    std::longjmp(state->jump, 1);
}

extern "C" inline void png_warning_ignore(png_structp, png_const_charp) {}

struct PngHeader {
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int bit_depth = 0;
    int color_type = 0;
};

// libpng reports errors by longjmp; every C++ object with a destructor lives
// outside the setjmp frames below.
inline bool png_read_header(png_structp png, png_infop info, std::FILE* f, PngErrorState& err, PngHeader& h) {
    if (setjmp(err.jump)) return false;
    png_init_io(png, f);
    png_read_info(png, info);
    png_get_IHDR(png, info, &h.width, &h.height, &h.bit_depth, &h.color_type, nullptr, nullptr, nullptr);
    if (h.color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (h.color_type == PNG_COLOR_TYPE_GRAY && h.bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (h.color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    return true;
}

inline bool png_read_rows(png_structp png, png_infop info, PngErrorState& err, png_bytepp rows) {
    if (setjmp(err.jump)) return false;
    png_read_image(png, rows);
    png_read_end(png, info);
    return true;
}

inline bool png_write_all(png_structp png, png_infop info, std::FILE* f, PngErrorState& err, png_uint_32 w,
                          png_uint_32 h, int depth, int color_type, png_bytepp rows) {
    if (setjmp(err.jump)) return false;
    png_init_io(png, f);
    png_set_IHDR(png, info, w, h, depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows);
    png_write_end(png, info);
    return true;
}

inline GrayRaster read_png(const fs::path& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw Error(ErrorKind::io, "cannot open " + path.string());
    PngErrorState err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_to_jump, png_warning_ignore);
    if (!png) throw Error(ErrorKind::io, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_read_struct(p, i, nullptr); }
    } guard{&png, &info};

    PngHeader h;
    if (!png_read_header(png, info, f.get(), err, h)) {
        throw Error(ErrorKind::io, path.string() + ": invalid PNG (" + err.message + ")");
    }
    if (h.color_type != PNG_COLOR_TYPE_GRAY && h.color_type != PNG_COLOR_TYPE_GRAY_ALPHA) {
        throw Error(ErrorKind::schema, path.string() + ": expected a grayscale PNG");
    }
    const int depth = h.bit_depth == 16 ? 16 : 8;
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    std::vector<png_byte> buffer(row_bytes * h.height);
    std::vector<png_bytep> rows(h.height);
    for (png_uint_32 y = 0; y < h.height; ++y) rows[y] = buffer.data() + y * row_bytes;
    if (!png_read_rows(png, info, err, rows.data())) {
        throw Error(ErrorKind::io, path.string() + ": corrupt PNG (" + err.message + ")");
    }

    GrayRaster out;
    out.bit_depth = depth;
    out.values = Grid<std::uint16_t>(static_cast<int>(h.height), static_cast<int>(h.width), 0);
    for (png_uint_32 y = 0; y < h.height; ++y) {
        const png_bytep r = rows[y];
        for (png_uint_32 x = 0; x < h.width; ++x) {
            out.values(static_cast<int>(y), static_cast<int>(x)) =
                depth == 16 ? static_cast<std::uint16_t>((r[2 * x] << 8) | r[2 * x + 1]) : r[x];
        }
    }
    return out;
}

inline void write_png(const fs::path& path, int height, int width, int depth, int color_type,
                      const std::vector<png_byte>& bytes) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw Error(ErrorKind::io, "cannot write " + path.string());
    PngErrorState err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_to_jump, png_warning_ignore);
    if (!png) throw Error(ErrorKind::io, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    struct Guard {
        png_structp* p;
        png_infop* i;
        ~Guard() { png_destroy_write_struct(p, i); }
    } guard{&png, &info};
    const std::size_t row_bytes = bytes.size() / static_cast<std::size_t>(std::max(height, 1));
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) rows[y] = const_cast<png_bytep>(bytes.data()) + y * row_bytes;
    if (!png_write_all(png, info, f.get(), err, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                       depth, color_type, rows.data())) {
        throw Error(ErrorKind::io, path.string() + ": PNG write failed (" + err.message + ")");
    }
}

// PGM (P5 binary or P2 ASCII); 16-bit samples are big-endian.
inline GrayRaster read_pgm(const fs::path& path) {
    const std::string data = read_text_file(path);
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < data.size()) {
            if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() -> long {
        skip_space();
        const std::size_t start = pos;
        while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
        if (start == pos) throw Error(ErrorKind::io, path.string() + ": malformed PGM header");
        return std::stol(data.substr(start, pos - start));
    };
    if (data.size() < 2 || data[0] != 'P' || (data[1] != '5' && data[1] != '2')) {
        throw Error(ErrorKind::io, path.string() + ": not a PGM file");
    }
    const bool binary = data[1] == '5';
    pos = 2;
    const long w = read_int();
    const long h = read_int();
    const long maxval = read_int();
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
        throw Error(ErrorKind::io, path.string() + ": invalid PGM dimensions or maxval");
    }
    GrayRaster out;
    out.bit_depth = maxval > 255 ? 16 : 8;
    out.values = Grid<std::uint16_t>(static_cast<int>(h), static_cast<int>(w), 0);
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (binary) {
        ++pos;  // single whitespace after maxval
        const std::size_t bytes = n * (out.bit_depth == 16 ? 2 : 1);
        if (data.size() - pos < bytes) throw Error(ErrorKind::io, path.string() + ": truncated PGM payload");
        const auto* p = reinterpret_cast<const unsigned char*>(data.data() + pos);
        for (std::size_t i = 0; i < n; ++i) {
            out.values.data()[i] = out.bit_depth == 16 ? static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1])
                                                       : p[i];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const long v = read_int();
            if (v > maxval) throw Error(ErrorKind::io, path.string() + ": PGM sample above maxval");
            out.values.data()[i] = static_cast<std::uint16_t>(v);
        }
    }
    return out;
}

inline bool has_png_signature(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    std::array<unsigned char, 8> sig{};
    in.read(reinterpret_cast<char*>(sig.data()), 8);
    return in.gcount() == 8 && png_sig_cmp(sig.data(), 0, 8) == 0;
}

}  // namespace detail

/// Reads a grayscale PNG or PGM, detected by content.
inline GrayRaster read_gray(const fs::path& path) {
    return detail::has_png_signature(path) ? detail::read_png(path) : detail::read_pgm(path);
}

/// Writes a grayscale raster; the format follows the extension (.pgm, else PNG).
inline void write_gray(const fs::path& path, const Grid<std::uint16_t>& values, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) throw Error(ErrorKind::invalid_argument, "bit depth must be 8 or 16");
    const int bps = bit_depth / 8;
    std::vector<png_byte> bytes(values.size() * bps);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint16_t v = values.data()[i];
        if (bit_depth == 8 && v > 255) throw Error(ErrorKind::invalid_argument, "sample exceeds 8-bit range");
        if (bps == 2) {
            bytes[2 * i] = static_cast<png_byte>(v >> 8);
            bytes[2 * i + 1] = static_cast<png_byte>(v & 0xFF);
        } else {
            bytes[i] = static_cast<png_byte>(v);
        }
    }
    if (path.extension() == ".pgm") {
        std::string out = "P5\n" + std::to_string(values.width()) + " " + std::to_string(values.height()) + "\n" +
                          (bit_depth == 16 ? "65535" : "255") + "\n";
        out.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        write_binary_file(path, out);
        return;
    }
    detail::write_png(path, values.height(), values.width(), bit_depth, PNG_COLOR_TYPE_GRAY, bytes);
}

/// 8-bit RGB raster, row-major interleaved.
struct RgbImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> rgb;

    RgbImage() = default;
    RgbImage(int h, int w) : height(h), width(w), rgb(static_cast<std::size_t>(h) * w * 3, 0) {}

    void set(int y, int x, std::array<std::uint8_t, 3> c) {
        if (y < 0 || x < 0 || y >= height || x >= width) return;
        auto* p = &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
        p[0] = c[0];
        p[1] = c[1];
        p[2] = c[2];
    }
};

inline void write_rgb_png(const fs::path& path, const RgbImage& image) {
    detail::write_png(path, image.height, image.width, 8, PNG_COLOR_TYPE_RGB, image.rgb);
}

// ---------------------------------------------------------------------------
// Meta sidecar

struct CaseMeta {
    std::string id;
    Spacing spacing_mm;
    Orientation orientation;
};

inline CaseMeta parse_meta(const nlohmann::json& j, const std::string& where) {
    auto missing = [&](const char* field) {
        return Error(ErrorKind::schema, where + ": missing or invalid meta field '" + field + "'");
    };
    CaseMeta m;
    if (!j.is_object()) throw Error(ErrorKind::schema, where + ": meta must be a JSON object");
    if (!j.contains("spacing_mm") || !j["spacing_mm"].is_array() || j["spacing_mm"].size() != 2 ||
        !j["spacing_mm"][0].is_number() || !j["spacing_mm"][1].is_number()) {
        throw missing("spacing_mm");
    }
    m.spacing_mm = {j["spacing_mm"][0].get<double>(), j["spacing_mm"][1].get<double>()};
    if (!(m.spacing_mm.y_mm > 0.0) || !(m.spacing_mm.x_mm > 0.0)) {
        throw Error(ErrorKind::schema, where + ": spacing_mm must be > 0, got [" + j["spacing_mm"][0].dump() + ", " +
                                           j["spacing_mm"][1].dump() + "]");
    }
    if (!j.contains("anterior_side") || !j["anterior_side"].is_string()) throw missing("anterior_side");
    const std::string side = j["anterior_side"].get<std::string>();
    if (side == "left") m.orientation.anterior_side = AnteriorSide::left;
    else if (side == "right") m.orientation.anterior_side = AnteriorSide::right;
    else throw Error(ErrorKind::schema, where + ": anterior_side must be \"left\" or \"right\", got \"" + side + "\"");
    if (j.contains("id")) {
        if (!j["id"].is_string()) throw missing("id");
        m.id = j["id"].get<std::string>();
    }
    return m;
}

inline nlohmann::json meta_to_json(const std::string& id, Spacing spacing, Orientation orientation) {
    nlohmann::json j;
    j["id"] = id;
    j["spacing_mm"] = {spacing.y_mm, spacing.x_mm};
    j["anterior_side"] = std::string(to_string(orientation.anterior_side));
    return j;
}

inline nlohmann::json parse_json_file(const fs::path& path) {
    const std::string text = read_text_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::schema, path.string() + ": invalid JSON (" + e.what() + ")");
    }
}

// ---------------------------------------------------------------------------
// Case

namespace detail {
inline std::string default_case_id(const fs::path& image_path) {
    std::string stem = image_path.filename().string();
    for (const char* suffix : {".image.png", ".image.pgm", ".png", ".pgm"}) {
        const std::string s(suffix);
        if (stem.size() > s.size() && stem.compare(stem.size() - s.size(), s.size(), s) == 0) {
            return stem.substr(0, stem.size() - s.size());
        }
    }
    return stem;
}
}  // namespace detail

inline Case read_case(const fs::path& image_path, const fs::path& mask_path, const fs::path& meta_path) {
    const GrayRaster image = read_gray(image_path);
    const GrayRaster mask = read_gray(mask_path);
    if (mask.bit_depth != 8) throw Error(ErrorKind::schema, mask_path.string() + ": mask must be 8-bit");
    const CaseMeta meta = parse_meta(parse_json_file(meta_path), meta_path.string());

    Case c;
    c.id = meta.id.empty() ? detail::default_case_id(image_path) : meta.id;
    c.orientation = meta.orientation;
    c.image.spacing_mm = meta.spacing_mm;
    c.image.values = Grid<double>(image.values.height(), image.values.width(), 0.0);
    for (std::size_t i = 0; i < image.values.size(); ++i) c.image.values.data()[i] = image.values.data()[i];
    c.mask = SemanticMask(mask.values.height(), mask.values.width(), 0);
    for (std::size_t i = 0; i < mask.values.size(); ++i) {
        c.mask.data()[i] = static_cast<std::uint8_t>(mask.values.data()[i]);
    }
    if (!c.image.values.same_shape(c.mask)) {
        throw Error(ErrorKind::schema, "dimension mismatch: image " + image_path.string() + " is " +
                                           std::to_string(c.image.values.height()) + "x" +
                                           std::to_string(c.image.values.width()) + ", mask " + mask_path.string() +
                                           " is " + std::to_string(c.mask.height()) + "x" +
                                           std::to_string(c.mask.width()));
    }
    try {
        validate(c);
    } catch (const Error& e) {
        throw Error(ErrorKind::schema, mask_path.string() + ": " + e.what());
    }
    return c;
}

struct CasePaths {
    fs::path image;
    fs::path mask;
    fs::path meta;
};

inline CasePaths case_paths(const fs::path& dir, const std::string& id) {
    return {dir / (id + ".image.png"), dir / (id + ".mask.png"), dir / (id + ".meta.json")};
}

/// Writes `<id>.image.png` (16-bit), `<id>.mask.png` (8-bit) and `<id>.meta.json`.
inline CasePaths write_case(const Case& c, const fs::path& dir) {
    validate(c);
    fs::create_directories(dir);
    const CasePaths paths = case_paths(dir, c.id);
    Grid<std::uint16_t> image(c.image.values.height(), c.image.values.width(), 0);
    for (std::size_t i = 0; i < image.size(); ++i) {
        const double v = c.image.values.data()[i];
        if (v != std::floor(v) || v > 65535.0) {
            throw Error(ErrorKind::invalid_argument, "image values must be integers in [0, 65535] to store losslessly");
        }
        image.data()[i] = static_cast<std::uint16_t>(v);
    }
    Grid<std::uint16_t> mask(c.mask.height(), c.mask.width(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) mask.data()[i] = c.mask.data()[i];
    write_gray(paths.image, image, 16);
    write_gray(paths.mask, mask, 8);
    write_binary_file(paths.meta, meta_to_json(c.id, c.image.spacing_mm, c.orientation).dump(2) + "\n");
    return paths;
}

// ---------------------------------------------------------------------------
// Float-grid container: 12-byte magic, uint32 LE version, JSON header line,
// row-major little-endian float32 payload.

inline constexpr std::array<char, 12> kGridMagic = {'C', 'E', 'R', 'V', 'D', 'X', 'G', 'R', 'I', 'D', '\0', '\0'};
inline constexpr std::uint32_t kGridVersion = 1;

namespace detail {
inline void put_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline std::uint32_t get_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
}  // namespace detail

inline std::string encode_float_grid(const HeatGrid& grid) {
    validate(grid);
    std::string out(kGridMagic.begin(), kGridMagic.end());
    detail::put_u32_le(out, kGridVersion);
    out += "{\"dtype\":\"f32le\",\"height\":" + std::to_string(grid.height()) +
           ",\"width\":" + std::to_string(grid.width()) + "}\n";
    out.reserve(out.size() + grid.size() * 4);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &grid.data()[i], 4);
        detail::put_u32_le(out, bits);
    }
    return out;
}

inline HeatGrid decode_float_grid(const std::string& bytes, const std::string& where = "float grid") {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kGridMagic.data(), kGridMagic.size()) != 0) {
        throw Error(ErrorKind::schema, where + ": bad magic");
    }
    const auto* u = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t version = detail::get_u32_le(u + 12);
    if (version != kGridVersion) {
        throw Error(ErrorKind::schema, where + ": unsupported version " + std::to_string(version));
    }
    const std::size_t nl = bytes.find('\n', 16);
    if (nl == std::string::npos) throw Error(ErrorKind::schema, where + ": missing header line");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(16, nl - 16));
    } catch (const nlohmann::json::parse_error&) {
        throw Error(ErrorKind::schema, where + ": invalid header JSON");
    }
    if (!header.is_object() || header.value("dtype", "") != "f32le" || !header.contains("height") ||
        !header.contains("width") || !header["height"].is_number_integer() || !header["width"].is_number_integer()) {
        throw Error(ErrorKind::schema, where + ": header must hold dtype f32le, height, width");
    }
    const long h = header["height"].get<long>();
    const long w = header["width"].get<long>();
    if (h <= 0 || w <= 0) throw Error(ErrorKind::degenerate, where + ": degenerate grid");
    const std::size_t n = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    if (bytes.size() - (nl + 1) != n * 4) throw Error(ErrorKind::schema, where + ": payload size mismatch");
    HeatGrid grid(static_cast<int>(h), static_cast<int>(w), 0.0f);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t bits = detail::get_u32_le(u + nl + 1 + 4 * i);
        std::memcpy(&grid.data()[i], &bits, 4);
    }
    return grid;
}

inline void write_float_grid(const HeatGrid& grid, const fs::path& path) {
    write_binary_file(path, encode_float_grid(grid));
}

inline HeatGrid read_float_grid(const fs::path& path) { return decode_float_grid(read_text_file(path), path.string()); }

}  // namespace cervdx
