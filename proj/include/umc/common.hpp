#ifndef UMC_COMMON_HPP
#define UMC_COMMON_HPP

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace umc {

constexpr std::uint16_t kFormatVersion = 1;

// ---------------------------------------------------------------------------
// Error taxonomy. Every failure mode surfaced by the library is a distinct
// type so callers (and tests) can react to the exact condition.
// ---------------------------------------------------------------------------

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct malformed_file : error { using error::error; };
struct index_out_of_range : error { using error::error; };
struct non_finite_value : error { using error::error; };
struct io_failure : error { using error::error; };
struct degenerate_mesh : error { using error::error; };
struct empty_after_filtering : error { using error::error; };
struct internal_inconsistency : error { using error::error; };
struct seed_mode_unsupported : error { using error::error; };
struct unknown_codec : error { using error::error; };
struct corrupt_payload : error { using error::error; };
struct external_codec_violation : error { using error::error; };
struct subprocess_failure : error { using error::error; };
struct budget_inadmissible : error { using error::error; };
struct mapping_mismatch : error { using error::error; };
struct zero_norm_reference : error { using error::error; };
struct mismatched_runs : error { using error::error; };

// ---------------------------------------------------------------------------
// Little-endian byte buffer I/O. All on-disk formats are LE regardless of
// host order.
// ---------------------------------------------------------------------------

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { put_le(v, 2); }
    void u32(std::uint32_t v) { put_le(v, 4); }
    void u64(std::uint64_t v) { put_le(v, 8); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    void varint(std::uint64_t v) {
        while (v >= 0x80) {
            buf_.push_back(static_cast<std::uint8_t>(v) | 0x80);
            v >>= 7;
        }
        buf_.push_back(static_cast<std::uint8_t>(v));
    }

    const std::vector<std::uint8_t>& data() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

private:
    void put_le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
    explicit ByteReader(const std::vector<std::uint8_t>& v) : ByteReader(v.data(), v.size()) {}

    std::uint8_t u8() { return need(1), p_[pos_++]; }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get_le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
    std::uint64_t u64() { return get_le(8); }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void bytes(void* out, std::size_t n) {
        need(n);
        std::memcpy(out, p_ + pos_, n);
        pos_ += n;
    }
    std::uint64_t varint() {
        std::uint64_t v = 0;
        for (int shift = 0; shift < 64; shift += 7) {
            std::uint8_t b = u8();
            v |= std::uint64_t(b & 0x7f) << shift;
            if (!(b & 0x80)) return v;
        }
        throw corrupt_payload("varint exceeds 64 bits");
    }

    std::size_t remaining() const { return n_ - pos_; }
    std::size_t position() const { return pos_; }
    bool done() const { return pos_ == n_; }

private:
    void need(std::size_t n) const {
        if (n_ - pos_ < n) throw corrupt_payload("unexpected end of data");
    }
    std::uint64_t get_le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= std::uint64_t(p_[pos_ + i]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    const std::uint8_t* p_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

inline std::uint64_t zigzag_encode(std::int64_t v) {
    return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

inline std::int64_t zigzag_decode(std::uint64_t v) {
    return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

// Deterministic cross-platform PRNG. All randomized generation in the
// library goes through this stream, never through <random> engines whose
// distributions are implementation-defined.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform integer in [0, n), n > 0; Lemire multiply-shift
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }
};

}  // namespace umc

#endif  // UMC_COMMON_HPP
