#pragma once

// Generalized Flajolet-Martin / HyperLogLog sketch with z0 extra mantissa
// bits per register. Registers form a 2^r0 x c0 matrix stored row-major.

#include "fmci/hashing.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace fmci::sketch {

struct SketchParams {
    unsigned r0 = 4;
    unsigned c0 = 4;
    unsigned z0 = 4;

    std::size_t rows() const { return std::size_t{1} << r0; }
    std::size_t registers() const { return rows() * c0; }
    bool operator==(const SketchParams&) const = default;
};

// Throws ConfigError unless r0 in [0,16], c0 in [1,256], z0 in [0,16].
void validate(const SketchParams& params);

struct QueryResult {
    std::vector<double> Y;  // row-major, rows() x c0
    double mean = 0.0;
    std::size_t touched = 0;
};

class Sketch {
public:
    explicit Sketch(const SketchParams& params, std::uint8_t scheme = hashing::kSchemeSha512);

    const SketchParams& params() const { return params_; }
    std::uint8_t scheme() const { return scheme_; }
    std::uint64_t warnings() const { return warnings_; }

    // 0-based row and column.
    std::uint16_t x(std::size_t row, std::size_t col) const { return X_[index(row, col)]; }
    std::uint16_t z(std::size_t row, std::size_t col) const { return Z_[index(row, col)]; }
    std::span<const std::uint16_t> x_matrix() const { return X_; }
    std::span<const std::uint16_t> z_matrix() const { return Z_; }

    void insert(hashing::Bytes object);
    void insert(std::string_view object) { insert(hashing::as_bytes(object)); }

    // Register update for column `column` (1-based) from already extracted
    // fields: larger X wins, equal X keeps the smaller Z.
    void update(unsigned column, const hashing::FieldTriple& f);

    // Register-wise merge of another sketch with identical params and scheme.
    void merge_from(const Sketch& other);

    QueryResult query() const;

    bool operator==(const Sketch&) const = default;

    // Used by deserialization.
    void set_register(std::size_t row, std::size_t col, std::uint16_t x, std::uint16_t z);
    void set_warnings(std::uint64_t w) { warnings_ = w; }

private:
    std::size_t index(std::size_t row, std::size_t col) const { return row * params_.c0 + col; }

    SketchParams params_;
    std::uint8_t scheme_;
    std::uint64_t warnings_ = 0;
    std::vector<std::uint16_t> X_;
    std::vector<std::uint16_t> Z_;
};

Sketch merge(const Sketch& a, const Sketch& b);

// Y value of one register; 0 for a register never written.
double register_y(std::uint16_t x, std::uint16_t z, unsigned z0);

// Sketch of all objects inserted one by one.
Sketch build_serial(const SketchParams& params, std::span<const std::string_view> objects);

// Sketch of all objects, hashed in parallel and folded into registers in
// input order. Bit-identical to inserting them one by one.
Sketch build_parallel(const SketchParams& params, std::span<const std::string_view> objects);

// File format (little-endian): "FMCI", version u8 = 1, scheme u8, r0 u8,
// z0 u8, c0 u16, reserved u16 = 0, warnings u64, then (X u16, Z u16) per
// register, row-major.
inline constexpr std::size_t kHeaderBytes = 20;
std::vector<std::uint8_t> serialize(const Sketch& s);
Sketch deserialize(std::span<const std::uint8_t> bytes);

}  // namespace fmci::sketch
