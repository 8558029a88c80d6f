#include "fmci/hashing.hpp"

#include "fmci/errors.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <memory>
#include <stdexcept>
#include <string>

namespace fmci::hashing {
namespace {

const EVP_MD* sha512() {
    static const EVP_MD* md = [] {
        const EVP_MD* m = EVP_MD_fetch(nullptr, "SHA512", nullptr);
        if (m == nullptr) throw std::runtime_error("OpenSSL: SHA512 unavailable");
        return m;
    }();
    return md;
}

struct CtxDeleter {
    void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};

EVP_MD_CTX* thread_ctx() {
    thread_local std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx(EVP_MD_CTX_new());
    if (!ctx) throw std::runtime_error("OpenSSL: EVP_MD_CTX_new failed");
    return ctx.get();
}

void check_column(unsigned column) {
    if (column < 1 || column > kMaxColumns) {
        throw ConfigError("hashing: column must lie in [1, 256], got " + std::to_string(column));
    }
}

}  // namespace

std::array<std::uint8_t, 64> block(Bytes object, unsigned column, std::uint32_t index) {
    check_column(column);
    EVP_MD_CTX* ctx = thread_ctx();
    const std::uint8_t col = static_cast<std::uint8_t>(column - 1);
    std::array<std::uint8_t, 64> out{};
    bool ok = EVP_DigestInit_ex(ctx, sha512(), nullptr) == 1 &&
              EVP_DigestUpdate(ctx, &col, 1) == 1;
    if (ok && index > 0) {
        const std::uint8_t le[4] = {static_cast<std::uint8_t>(index),
                                    static_cast<std::uint8_t>(index >> 8),
                                    static_cast<std::uint8_t>(index >> 16),
                                    static_cast<std::uint8_t>(index >> 24)};
        ok = EVP_DigestUpdate(ctx, le, 4) == 1;
    }
    unsigned len = 0;
    ok = ok && EVP_DigestUpdate(ctx, object.data(), object.size()) == 1 &&
         EVP_DigestFinal_ex(ctx, out.data(), &len) == 1 && len == out.size();
    if (!ok) throw std::runtime_error("OpenSSL: SHA512 digest failed");
    return out;
}

ColumnStream::ColumnStream(Bytes object, unsigned column, std::size_t capacity_bits)
    : object_(object), column_(column), capacity_(capacity_bits) {
    check_column(column);
}

void ColumnStream::ensure(std::size_t blocks) {
    while (bytes_.size() < blocks * 64) {
        const auto b = block(object_, column_, static_cast<std::uint32_t>(bytes_.size() / 64));
        bytes_.insert(bytes_.end(), b.begin(), b.end());
    }
}

bool ColumnStream::bit(std::size_t i) {
    if (i >= capacity_) {
        throw CapacityError("hashing: bit " + std::to_string(i) + " beyond stream capacity " +
                            std::to_string(capacity_));
    }
    ensure(i / kBlockBits + 1);
    return (bytes_[i / 8] >> (7 - i % 8)) & 1u;
}

std::vector<std::uint8_t> bitstream(Bytes object, unsigned column, std::size_t need) {
    ColumnStream s(object, column, need);
    std::vector<std::uint8_t> bits(need);
    for (std::size_t i = 0; i < need; ++i) bits[i] = s.bit(i) ? 1 : 0;
    return bits;
}

FieldTriple extract_fields(std::span<const std::uint8_t> bits, unsigned r0, unsigned z0) {
    if (bits.size() < std::size_t{r0} + z0) {
        throw CapacityError("hashing: stream shorter than the r0 + z0 prefix");
    }
    FieldTriple f;
    for (unsigned r = 0; r < r0; ++r) f.R += static_cast<std::uint32_t>(bits[r] != 0) << r;
    for (unsigned j = 0; j < z0; ++j) f.Z = (f.Z << 1) | static_cast<std::uint32_t>(bits[r0 + j] != 0);
    for (std::size_t i = std::size_t{r0} + z0; i < bits.size(); ++i) {
        if (bits[i] != 0) {
            f.X = static_cast<std::uint32_t>(i - r0 - z0 + 1);
            return f;
        }
    }
    throw CapacityError("hashing: no 1-bit within stream capacity");
}

FieldTriple hash_fields(Bytes object, unsigned column, unsigned r0, unsigned z0,
                        std::size_t capacity_bits) {
    const std::size_t prefix = std::size_t{r0} + z0;
    if (prefix > kBlockBits || capacity_bits > kBlockBits * 0xFFFFFFFFull) {
        throw ConfigError("hashing: r0 + z0 must fit in the first block");
    }
    const auto b0 = block(object, column, 0);
    auto bit_at = [&b0](std::size_t i) { return (b0[i / 8] >> (7 - i % 8)) & 1u; };

    FieldTriple f;
    for (unsigned r = 0; r < r0; ++r) f.R += bit_at(r) << r;
    for (unsigned j = 0; j < z0; ++j) f.Z = (f.Z << 1) | bit_at(r0 + j);

    // Scan for the first 1-bit after the prefix, a byte at a time.
    std::size_t pos = prefix;
    std::array<std::uint8_t, 64> cur = b0;
    std::uint32_t cur_index = 0;
    while (pos < capacity_bits) {
        const std::uint32_t idx = static_cast<std::uint32_t>(pos / kBlockBits);
        if (idx != cur_index) {
            cur = block(object, column, idx);
            cur_index = idx;
        }
        const std::size_t in_block = pos % kBlockBits;
        const unsigned offset = static_cast<unsigned>(in_block % 8);
        const std::uint8_t masked =
            static_cast<std::uint8_t>(cur[in_block / 8] << offset);  // drop consumed bits
        const std::size_t avail = std::min<std::size_t>(8 - offset, capacity_bits - pos);
        if (masked != 0) {
            const std::size_t lead = static_cast<std::size_t>(std::countl_zero(masked));
            if (lead < avail) {
                f.X = static_cast<std::uint32_t>(pos + lead - prefix + 1);
                return f;
            }
        }
        pos += avail;
    }
    throw CapacityError("hashing: no 1-bit within stream capacity");
}

}  // namespace fmci::hashing
