#ifndef UMC_LOSSLESS_HPP
#define UMC_LOSSLESS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

#include "umc/common.hpp"

namespace umc {

// Built-in lossless byte stage: zero-run-length tokens with varint lengths.
// Runs shorter than kMinZeroRun ride inside literals, which bounds the
// worst-case expansion to a few bytes regardless of input.

namespace detail {
constexpr std::size_t kMinZeroRun = 8;
constexpr std::uint8_t kTokZeroRun = 0x00;
constexpr std::uint8_t kTokLiteral = 0x01;
}  // namespace detail

inline std::vector<std::uint8_t> rle_compress(const std::uint8_t* data, std::size_t n) {
    ByteWriter w;
    std::size_t i = 0, lit_start = 0;
    auto flush_literal = [&](std::size_t end) {
        if (end > lit_start) {
            w.u8(detail::kTokLiteral);
            w.varint(end - lit_start);
            w.bytes(data + lit_start, end - lit_start);
        }
    };
    while (i < n) {
        if (data[i] == 0) {
            std::size_t j = i;
            while (j < n && data[j] == 0) ++j;
            if (j - i >= detail::kMinZeroRun) {
                flush_literal(i);
                w.u8(detail::kTokZeroRun);
                w.varint(j - i);
                lit_start = j;
            }
            i = j;
        } else {
            ++i;
        }
    }
    flush_literal(n);
    return w.take();
}

inline std::vector<std::uint8_t> rle_decompress(const std::uint8_t* data, std::size_t n) {
    ByteReader r(data, n);
    std::vector<std::uint8_t> out;
    while (!r.done()) {
        const std::uint8_t tok = r.u8();
        const std::uint64_t len = r.varint();
        if (tok == detail::kTokZeroRun) {
            out.resize(out.size() + len, 0);
        } else if (tok == detail::kTokLiteral) {
            const std::size_t at = out.size();
            out.resize(at + len);
            r.bytes(out.data() + at, len);
        } else {
            throw corrupt_payload("unknown token in lossless stream");
        }
    }
    return out;
}

/// Optional general-purpose lossless hook. The built-in stage is id 0;
/// alternates are recorded by id in the payload header.
struct LosslessBackend {
    std::function<std::vector<std::uint8_t>(const std::uint8_t*, std::size_t)> compress;
    std::function<std::vector<std::uint8_t>(const std::uint8_t*, std::size_t)> decompress;
};

namespace detail {
inline std::map<std::uint8_t, LosslessBackend>& backend_registry() {
    static std::map<std::uint8_t, LosslessBackend> registry;
    return registry;
}
inline std::mutex& backend_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

inline void register_lossless_backend(std::uint8_t id, LosslessBackend backend) {
    if (id == 0) throw error("lossless backend id 0 is reserved for the builtin stage");
    std::lock_guard<std::mutex> lock(detail::backend_mutex());
    detail::backend_registry()[id] = std::move(backend);
}

inline std::vector<std::uint8_t> lossless_compress(const std::uint8_t* data, std::size_t n,
                                                   std::uint8_t backend_id = 0) {
    if (backend_id == 0) return rle_compress(data, n);
    std::lock_guard<std::mutex> lock(detail::backend_mutex());
    const auto it = detail::backend_registry().find(backend_id);
    if (it == detail::backend_registry().end())
        throw unknown_codec("lossless backend " + std::to_string(backend_id) + " not registered");
    return it->second.compress(data, n);
}

inline std::vector<std::uint8_t> lossless_decompress(const std::uint8_t* data, std::size_t n,
                                                     std::uint8_t backend_id = 0) {
    if (backend_id == 0) return rle_decompress(data, n);
    std::lock_guard<std::mutex> lock(detail::backend_mutex());
    const auto it = detail::backend_registry().find(backend_id);
    if (it == detail::backend_registry().end())
        throw unknown_codec("lossless backend " + std::to_string(backend_id) + " not registered");
    return it->second.decompress(data, n);
}

}  // namespace umc

#endif  // UMC_LOSSLESS_HPP
