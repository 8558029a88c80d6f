#pragma once

// Per-column hash bitstreams and the (R, Z, X) fields read from them.
//
// Column c (1-based) of an object is the concatenation of 512-bit SHA-512
// blocks
//   block 0 = SHA512(b || object)
//   block k = SHA512(b || u32le(k) || object),   k >= 1
// with b = c - 1 as a single byte. Bits are read most-significant first
// within each byte. Blocks are produced lazily up to the stream capacity.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace fmci::hashing {

inline constexpr std::uint8_t kSchemeSha512 = 0x01;
inline constexpr std::size_t kDefaultCapacityBits = 4096;
inline constexpr std::size_t kBlockBits = 512;
inline constexpr unsigned kMaxColumns = 256;

using Bytes = std::span<const std::uint8_t>;

inline Bytes as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

struct FieldTriple {
    std::uint32_t R = 1;  // 1 .. 2^r0
    std::uint32_t Z = 0;  // 0 .. 2^z0 - 1
    std::uint32_t X = 1;  // >= 1

    bool operator==(const FieldTriple&) const = default;
};

// One 64-byte digest block of a column stream.
std::array<std::uint8_t, 64> block(Bytes object, unsigned column, std::uint32_t index);

// Lazily expanded bitstream of one (object, column) pair.
class ColumnStream {
public:
    ColumnStream(Bytes object, unsigned column, std::size_t capacity_bits = kDefaultCapacityBits);

    std::size_t capacity() const { return capacity_; }
    // Bit i, 0-based. Throws CapacityError past the capacity.
    bool bit(std::size_t i);

private:
    void ensure(std::size_t blocks);

    Bytes object_;
    unsigned column_;
    std::size_t capacity_;
    std::vector<std::uint8_t> bytes_;
};

// The first `need` bits of column `column` as 0/1 values.
std::vector<std::uint8_t> bitstream(Bytes object, unsigned column, std::size_t need);

// R = 1 + sum_{r=1}^{r0} s_r 2^{r-1}; Z = next z0 bits, most significant
// first; X = index of the first 1-bit after position r0 + z0.
// Throws CapacityError if no such bit exists in `bits`.
FieldTriple extract_fields(std::span<const std::uint8_t> bits, unsigned r0, unsigned z0);

// extract_fields() on the hash stream, expanding blocks only as needed.
FieldTriple hash_fields(Bytes object, unsigned column, unsigned r0, unsigned z0,
                        std::size_t capacity_bits = kDefaultCapacityBits);

}  // namespace fmci::hashing
