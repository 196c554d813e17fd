#pragma once

// Canonical data types shared by every cervdx module.
//
// Coordinate convention: row index y grows superior -> inferior, column
// index x grows left -> right. Points are (y, x) in pixel units with pixel
// centers at integer coordinates. Anterior/posterior is never inferred from
// the image; it is read from Orientation only.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cervdx {

enum class ErrorKind {
    io,                // unreadable / unwritable file
    schema,            // malformed file content or report schema violation
    invalid_argument,  // precondition violated by the caller
    anatomy,           // required anatomy missing from the segmentation
    degenerate,        // geometry exists but is unusable (collinear, zero width)
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::io: return "io";
        case ErrorKind::schema: return "schema";
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::anatomy: return "anatomy";
        case ErrorKind::degenerate: return "degenerate";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Row-major 2D grid. Value type; copying copies the pixels.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;
    Grid(int height, int width, T fill = T{})
        : height_(height), width_(width) {
        if (height < 0 || width < 0) {
            throw Error(ErrorKind::invalid_argument, "negative grid dimensions");
        }
        data_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), fill);
    }
    Grid(int height, int width, std::vector<T> data)
        : height_(height), width_(width), data_(std::move(data)) {
        if (height < 0 || width < 0 ||
            data_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
            throw Error(ErrorKind::invalid_argument, "grid data size does not match dimensions");
        }
    }

    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] bool contains(int y, int x) const noexcept {
        return y >= 0 && x >= 0 && y < height_ && x < width_;
    }

    T& operator()(int y, int x) { return data_[index(y, x)]; }
    const T& operator()(int y, int x) const { return data_[index(y, x)]; }

    [[nodiscard]] const std::vector<T>& data() const noexcept { return data_; }
    [[nodiscard]] std::vector<T>& data() noexcept { return data_; }

    [[nodiscard]] bool same_shape(const Grid& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }
    template <typename U>
    [[nodiscard]] bool same_shape(const Grid<U>& other) const noexcept {
        return height_ == other.height() && width_ == other.width();
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.height_ == b.height_ && a.width_ == b.width_ && a.data_ == b.data_;
    }

private:
    [[nodiscard]] std::size_t index(int y, int x) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<T> data_;
};

using BinaryGrid = Grid<std::uint8_t>;

struct Point {
    double y = 0.0;
    double x = 0.0;

    friend Point operator+(Point a, Point b) { return {a.y + b.y, a.x + b.x}; }
    friend Point operator-(Point a, Point b) { return {a.y - b.y, a.x - b.x}; }
    friend Point operator*(double s, Point p) { return {s * p.y, s * p.x}; }
    friend bool operator==(const Point&, const Point&) = default;
};

inline double dot(Point a, Point b) { return a.y * b.y + a.x * b.x; }
// z-component of (a.x, a.y, 0) x (b.x, b.y, 0)
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.y, a.x); }

struct Pixel {
    int y = 0;
    int x = 0;
    friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

struct Spacing {
    double y_mm = 1.0;
    double x_mm = 1.0;
};

struct IntensityImage {
    Grid<double> values;
    Spacing spacing_mm;

    [[nodiscard]] int height() const noexcept { return values.height(); }
    [[nodiscard]] int width() const noexcept { return values.width(); }
};

enum class SemanticCode : std::uint8_t { background = 0, vertebra = 1, disc = 2, cord = 3, csf = 4 };
inline constexpr std::uint8_t kMaxSemanticCode = 4;

using SemanticMask = Grid<std::uint8_t>;

namespace instance {
inline constexpr std::uint8_t background = 0;
inline constexpr std::uint8_t first_vertebra = 1;  // C2
inline constexpr std::uint8_t last_vertebra = 6;   // C7
inline constexpr std::uint8_t first_disc = 7;      // C2/3
inline constexpr std::uint8_t last_disc = 11;      // C6/7
inline constexpr std::uint8_t cord = 12;
inline constexpr std::uint8_t csf = 13;
inline constexpr int vertebra_count = 6;
inline constexpr int disc_count = 5;

inline constexpr std::uint8_t vertebra(int index) { return static_cast<std::uint8_t>(first_vertebra + index); }
inline constexpr std::uint8_t disc(int level) { return static_cast<std::uint8_t>(first_disc + level); }
inline constexpr bool is_vertebra(std::uint8_t c) { return c >= first_vertebra && c <= last_vertebra; }
inline constexpr bool is_disc(std::uint8_t c) { return c >= first_disc && c <= last_disc; }
}  // namespace instance

using InstanceMap = Grid<std::uint8_t>;

/// Pathology heatmap; stored as float so the on-disk container round-trips bit-exactly.
using HeatGrid = Grid<float>;

enum class AnteriorSide { left, right };

struct Orientation {
    AnteriorSide anterior_side = AnteriorSide::left;

    // +1 when the posterior direction points toward increasing x.
    [[nodiscard]] double posterior_sign() const noexcept {
        return anterior_side == AnteriorSide::left ? 1.0 : -1.0;
    }
    [[nodiscard]] Orientation flipped() const noexcept {
        return {anterior_side == AnteriorSide::left ? AnteriorSide::right : AnteriorSide::left};
    }
};

inline std::string_view to_string(AnteriorSide side) {
    return side == AnteriorSide::left ? "left" : "right";
}

struct Case {
    std::string id;
    IntensityImage image;
    SemanticMask mask;
    Orientation orientation;
};

/// Disc levels C2/3 .. C6/7, index 0..4.
inline constexpr std::array<std::string_view, 5> kDiscLevelNames = {"C2/3", "C3/4", "C4/5", "C5/6", "C6/7"};
inline constexpr std::array<std::string_view, 6> kVertebraNames = {"C2", "C3", "C4", "C5", "C6", "C7"};

inline std::optional<int> disc_level_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kDiscLevelNames.size(); ++i) {
        if (kDiscLevelNames[i] == name) return static_cast<int>(i);
    }
    return std::nullopt;
}

inline SemanticMask to_semantic(const InstanceMap& imap) {
    SemanticMask mask(imap.height(), imap.width());
    for (std::size_t i = 0; i < imap.size(); ++i) {
        const std::uint8_t c = imap.data()[i];
        std::uint8_t s = 0;
        if (instance::is_vertebra(c)) s = 1;
        else if (instance::is_disc(c)) s = 2;
        else if (c == instance::cord) s = 3;
        else if (c == instance::csf) s = 4;
        mask.data()[i] = s;
    }
    return mask;
}

inline void validate(const IntensityImage& image) {
    if (!(image.spacing_mm.y_mm > 0.0) || !(image.spacing_mm.x_mm > 0.0)) {
        throw Error(ErrorKind::invalid_argument, "spacing_mm components must be > 0");
    }
    for (double v : image.values.data()) {
        if (!std::isfinite(v) || v < 0.0) {
            throw Error(ErrorKind::invalid_argument, "image values must be finite and >= 0");
        }
    }
}

inline void validate(const SemanticMask& mask) {
    for (std::uint8_t c : mask.data()) {
        if (c > kMaxSemanticCode) {
            throw Error(ErrorKind::schema, "unknown semantic code " + std::to_string(c));
        }
    }
}

inline void validate(const Case& c) {
    validate(c.image);
    validate(c.mask);
    if (!c.image.values.same_shape(c.mask)) {
        throw Error(ErrorKind::schema,
                    "dimension mismatch: image " + std::to_string(c.image.height()) + "x" +
                        std::to_string(c.image.width()) + " vs mask " + std::to_string(c.mask.height()) +
                        "x" + std::to_string(c.mask.width()));
    }
}

inline void validate(const HeatGrid& grid) {
    if (grid.height() == 0 || grid.width() == 0) {
        throw Error(ErrorKind::invalid_argument, "degenerate grid");
    }
    for (float v : grid.data()) {
        if (!std::isfinite(v) || v < 0.0f) {
            throw Error(ErrorKind::invalid_argument, "heat grid values must be finite and >= 0");
        }
    }
}

}  // namespace cervdx
