#include "fmci/sketch.hpp"

#include "fmci/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace fmci::sketch {
namespace {

constexpr std::uint8_t kVersion = 1;
constexpr char kMagic[4] = {'F', 'M', 'C', 'I'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

void validate(const SketchParams& p) {
    if (p.r0 > 16) throw ConfigError("sketch: r0 must lie in [0,16], got " + std::to_string(p.r0));
    if (p.c0 < 1 || p.c0 > 256) {
        throw ConfigError("sketch: c0 must lie in [1,256], got " + std::to_string(p.c0));
    }
    if (p.z0 > 16) throw ConfigError("sketch: z0 must lie in [0,16], got " + std::to_string(p.z0));
    if (p.registers() > (std::size_t{1} << 24)) {
        throw ConfigError("sketch: 2^r0 * c0 must not exceed 2^24");
    }
}

Sketch::Sketch(const SketchParams& params, std::uint8_t scheme)
    : params_(params), scheme_(scheme) {
    validate(params);
    X_.assign(params.registers(), 0);
    Z_.assign(params.registers(), static_cast<std::uint16_t>((1u << params.z0) - 1));
}

void Sketch::update(unsigned column, const hashing::FieldTriple& f) {
    const std::size_t i = index(f.R - 1, column - 1);
    const auto x = static_cast<std::uint16_t>(std::min<std::uint32_t>(f.X, 0xFFFF));
    const auto z = static_cast<std::uint16_t>(f.Z);
    if (x > X_[i]) {
        X_[i] = x;
        Z_[i] = z;
    } else if (x == X_[i]) {
        Z_[i] = std::min(Z_[i], z);
    }
}

void Sketch::insert(hashing::Bytes object) {
    for (unsigned c = 1; c <= params_.c0; ++c) {
        try {
            update(c, hashing::hash_fields(object, c, params_.r0, params_.z0));
        } catch (const CapacityError&) {
            ++warnings_;
        }
    }
}

void Sketch::merge_from(const Sketch& other) {
    if (!(params_ == other.params_)) throw MergeError("sketch: parameters differ");
    if (scheme_ != other.scheme_) throw MergeError("sketch: hash schemes differ");
    for (std::size_t i = 0; i < X_.size(); ++i) {
        if (other.X_[i] > X_[i]) {
            X_[i] = other.X_[i];
            Z_[i] = other.Z_[i];
        } else if (other.X_[i] == X_[i]) {
            Z_[i] = std::min(Z_[i], other.Z_[i]);
        }
    }
    warnings_ += other.warnings_;
}

void Sketch::set_register(std::size_t row, std::size_t col, std::uint16_t x, std::uint16_t z) {
    X_[index(row, col)] = x;
    Z_[index(row, col)] = z;
}

double register_y(std::uint16_t x, std::uint16_t z, unsigned z0) {
    if (x == 0) return 0.0;
    const double frac = std::ldexp(static_cast<double>(z), -static_cast<int>(z0));
    return static_cast<double>(x) - std::log2(1.0 + frac);
}

QueryResult Sketch::query() const {
    QueryResult q;
    q.Y.resize(X_.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < X_.size(); ++i) {
        q.Y[i] = register_y(X_[i], Z_[i], params_.z0);
        if (X_[i] > 0) ++q.touched;
        sum += q.Y[i];
    }
    q.mean = sum / static_cast<double>(X_.size());
    return q;
}

Sketch merge(const Sketch& a, const Sketch& b) {
    Sketch out = a;
    out.merge_from(b);
    return out;
}

Sketch build_serial(const SketchParams& params, std::span<const std::string_view> objects) {
    Sketch s(params);
    for (auto o : objects) s.insert(o);
    return s;
}

Sketch build_parallel(const SketchParams& params, std::span<const std::string_view> objects) {
    Sketch result(params);
    const auto n = static_cast<std::ptrdiff_t>(objects.size());
#pragma omp parallel
    {
        Sketch local(params);
#pragma omp for schedule(static) nowait
        for (std::ptrdiff_t i = 0; i < n; ++i) local.insert(objects[static_cast<std::size_t>(i)]);
#pragma omp critical(fmci_sketch_fold)
        result.merge_from(local);
    }
    return result;
}

std::vector<std::uint8_t> serialize(const Sketch& s) {
    const auto& p = s.params();
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + 4 * p.registers());
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    out.push_back(s.scheme());
    out.push_back(static_cast<std::uint8_t>(p.r0));
    out.push_back(static_cast<std::uint8_t>(p.z0));
    put_u16(out, static_cast<std::uint16_t>(p.c0));
    put_u16(out, 0);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(s.warnings() >> (8 * b)));
    const auto xs = s.x_matrix();
    const auto zs = s.z_matrix();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        put_u16(out, xs[i]);
        put_u16(out, zs[i]);
    }
    return out;
}

Sketch deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes) throw FormatError("sketch file: truncated header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("sketch file: bad magic");
    if (bytes[4] != kVersion) {
        throw FormatError("sketch file: unsupported version " + std::to_string(bytes[4]));
    }
    const std::uint8_t scheme = bytes[5];
    if (scheme != hashing::kSchemeSha512) {
        throw FormatError("sketch file: unknown hash scheme " + std::to_string(scheme));
    }
    SketchParams p{bytes[6], get_u16(&bytes[8]), bytes[7]};
    if (get_u16(&bytes[10]) != 0) throw FormatError("sketch file: reserved field not zero");
    try {
        validate(p);
    } catch (const ConfigError& e) {
        throw FormatError(std::string("sketch file: ") + e.what());
    }
    if (bytes.size() != kHeaderBytes + 4 * p.registers()) {
        throw FormatError("sketch file: payload length does not match parameters");
    }
    std::uint64_t warnings = 0;
    for (int b = 0; b < 8; ++b) warnings |= std::uint64_t{bytes[12 + b]} << (8 * b);
    Sketch s(p, scheme);
    s.set_warnings(warnings);
    const std::uint16_t zmax = static_cast<std::uint16_t>((1u << p.z0) - 1);
    const std::uint8_t* rec = bytes.data() + kHeaderBytes;
    for (std::size_t r = 0; r < p.rows(); ++r) {
        for (std::size_t c = 0; c < p.c0; ++c, rec += 4) {
            const std::uint16_t z = get_u16(rec + 2);
            if (z > zmax) throw FormatError("sketch file: Z register out of range");
            s.set_register(r, c, get_u16(rec), z);
        }
    }
    return s;
}

}  // namespace fmci::sketch
