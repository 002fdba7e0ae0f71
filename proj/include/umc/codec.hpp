#ifndef UMC_CODEC_HPP
#define UMC_CODEC_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "umc/common.hpp"
#include "umc/lossless.hpp"
#include "umc/subprocess.hpp"

namespace umc {

enum class Predictor : std::uint8_t {
    none = 0,        // predict 0
    lorenzo_1d = 1,  // previous reconstructed value
    lorenzo_nd = 2,  // N-D Lorenzo stencil over `dims`
};

constexpr std::uint8_t kCodecBuiltinPQ = 0;
constexpr std::uint8_t kCodecVerbatim = 1;
constexpr std::uint8_t kCodecExternalBase = 128;

/// Codec configuration. tau_abs is the absolute pointwise bound the decoder
/// output must satisfy; 0 requests bitwise lossless coding.
struct CodecSpec {
    std::uint8_t codec_id = kCodecBuiltinPQ;
    Predictor predictor = Predictor::lorenzo_1d;
    std::vector<std::uint64_t> dims;  // shape for N-D prediction; product == element count
    double tau_abs = 0.0;
    std::uint8_t backend_id = 0;
};

/// One independently decodable compressed component. `payload` is the full
/// self-describing byte image (header + escape records + backend stream).
struct EncodedComponent {
    CodecSpec spec;
    std::uint64_t n_elements = 0;
    std::vector<std::uint8_t> payload;
    std::uint64_t original_bytes = 0;
};

namespace detail {

inline void validate_codec_spec(const CodecSpec& spec, std::size_t n) {
    if (!(spec.tau_abs >= 0.0)) throw error("tau_abs must be >= 0");
    std::uint64_t prod = 1;
    for (std::uint64_t d : spec.dims) prod *= d;
    if (spec.dims.empty() || prod != n)
        throw error("codec dims product does not equal element count");
    if (spec.dims.size() > 8) throw error("codec supports at most 8 dimensions");
}

// Lorenzo stencil over already-reconstructed neighbors. `idx` is the
// multi-index of the current element, `lin` its linear offset.
inline double lorenzo_predict(const std::vector<double>& recon, const std::uint64_t* idx,
                              std::uint64_t lin, const std::vector<std::uint64_t>& dims,
                              const std::vector<std::uint64_t>& strides) {
    const auto D = static_cast<unsigned>(dims.size());
    double pred = 0.0;
    for (unsigned mask = 1; mask < (1u << D); ++mask) {
        std::uint64_t off = 0;
        bool ok = true;
        for (unsigned d = 0; d < D; ++d) {
            if ((mask >> d) & 1u) {
                if (idx[d] == 0) { ok = false; break; }
                off += strides[d];
            }
        }
        if (!ok) continue;
        const double term = recon[lin - off];
        pred += (__builtin_popcount(mask) & 1) ? term : -term;
    }
    return pred;
}

struct PredictorState {
    const CodecSpec* spec;
    std::vector<std::uint64_t> strides;
    std::uint64_t idx[8] = {0};

    explicit PredictorState(const CodecSpec& s) : spec(&s) {
        const auto D = s.dims.size();
        strides.assign(D, 1);
        for (std::size_t d = D; d-- > 1;)
            strides[d - 1] = strides[d] * s.dims[d];
    }

    double predict(const std::vector<double>& recon, std::uint64_t lin) const {
        switch (spec->predictor) {
            case Predictor::none: return 0.0;
            case Predictor::lorenzo_1d: return lin == 0 ? 0.0 : recon[lin - 1];
            case Predictor::lorenzo_nd:
                return lorenzo_predict(recon, idx, lin, spec->dims, strides);
        }
        throw unknown_codec("bad predictor id");
    }

    void advance() {
        for (std::size_t d = spec->dims.size(); d-- > 0;) {
            if (++idx[d] < spec->dims[d]) return;
            idx[d] = 0;
        }
    }
};

inline std::uint64_t double_bits(double v) {
    std::uint64_t b;
    std::memcpy(&b, &v, 8);
    return b;
}

inline double bits_double(std::uint64_t b) {
    double v;
    std::memcpy(&v, &b, 8);
    return v;
}

}  // namespace detail

// --- external codec registry -------------------------------------------------

/// Out-of-process codec: argv is launched with a trailing "-c" (compress:
/// stdin carries n u64 LE, tau f64 LE, values f64 LE xn; stdout carries the
/// payload) or "-d" (exact inverse). Invocations serialize per id.
struct SubprocessCodec {
    std::vector<std::string> argv;
};

namespace detail {

struct ExternalEntry {
    SubprocessCodec codec;
    std::unique_ptr<std::mutex> invoke_mutex;
};

inline std::map<std::uint8_t, ExternalEntry>& external_registry() {
    static std::map<std::uint8_t, ExternalEntry> registry;
    return registry;
}
inline std::mutex& external_registry_mutex() {
    static std::mutex m;
    return m;
}

inline std::vector<std::uint8_t> external_input(const double* values, std::uint64_t n,
                                                double tau) {
    ByteWriter w;
    w.u64(n);
    w.f64(tau);
    for (std::uint64_t i = 0; i < n; ++i) w.f64(values[i]);
    return w.take();
}

inline std::vector<double> external_parse_output(const std::vector<std::uint8_t>& bytes,
                                                 std::uint64_t expect_n) {
    ByteReader r(bytes);
    std::vector<double> out;
    try {
        const std::uint64_t n = r.u64();
        (void)r.f64();  // tau echo
        if (n != expect_n) throw corrupt_payload("external codec returned wrong element count");
        out.resize(n);
        for (double& v : out) v = r.f64();
        if (!r.done()) throw corrupt_payload("trailing bytes from external codec");
    } catch (const corrupt_payload& e) {
        throw corrupt_payload(std::string("bad external codec output: ") + e.what());
    }
    return out;
}

}  // namespace detail

inline void register_external_codec(std::uint8_t id, SubprocessCodec codec) {
    if (id < kCodecExternalBase)
        throw error("codec ids below 128 are reserved for built-ins");
    if (codec.argv.empty()) throw error("external codec needs a program to run");
    std::lock_guard<std::mutex> lock(detail::external_registry_mutex());
    auto& registry = detail::external_registry();
    if (registry.count(id))
        throw error("codec id " + std::to_string(id) + " already registered");
    registry.emplace(id, detail::ExternalEntry{std::move(codec),
                                               std::make_unique<std::mutex>()});
}

inline void unregister_external_codec(std::uint8_t id) {
    std::lock_guard<std::mutex> lock(detail::external_registry_mutex());
    detail::external_registry().erase(id);
}

namespace detail {

inline std::vector<std::uint8_t> external_invoke(std::uint8_t id, const char* mode,
                                                 const std::vector<std::uint8_t>& input) {
    SubprocessCodec codec;
    std::mutex* invoke_mutex;
    {
        std::lock_guard<std::mutex> lock(external_registry_mutex());
        const auto it = external_registry().find(id);
        if (it == external_registry().end())
            throw unknown_codec("external codec " + std::to_string(id) + " not registered");
        codec = it->second.codec;
        invoke_mutex = it->second.invoke_mutex.get();
    }
    std::lock_guard<std::mutex> lock(*invoke_mutex);
    auto argv = codec.argv;
    argv.emplace_back(mode);
    return run_subprocess(argv, input);
}

}  // namespace detail

// --- encode / decode ---------------------------------------------------------

inline EncodedComponent encode(const double* values, std::size_t n, const CodecSpec& spec) {
    detail::validate_codec_spec(spec, n);
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(values[i])) throw non_finite_value("non-finite input to encode");

    ByteWriter header;
    header.u8(spec.codec_id);
    header.u8(static_cast<std::uint8_t>(spec.predictor));
    header.u8(spec.backend_id);
    header.u8(0);
    header.f64(spec.tau_abs);
    header.u64(n);
    header.u8(static_cast<std::uint8_t>(spec.dims.size()));
    for (std::uint64_t d : spec.dims) header.u64(d);

    EncodedComponent comp;
    comp.spec = spec;
    comp.n_elements = n;
    comp.original_bytes = static_cast<std::uint64_t>(n) * 8;

    if (spec.codec_id == kCodecVerbatim) {
        ByteWriter raw;
        for (std::size_t i = 0; i < n; ++i) raw.f64(values[i]);
        const auto stream = lossless_compress(raw.data().data(), raw.size(), spec.backend_id);
        header.u64(0);  // no escapes
        header.bytes(stream.data(), stream.size());
        comp.payload = header.take();
        return comp;
    }

    if (spec.codec_id >= kCodecExternalBase) {
        const auto input = detail::external_input(values, n, spec.tau_abs);
        const auto payload = detail::external_invoke(spec.codec_id, "-c", input);
        // Mandatory round-trip check: external codecs are never trusted to
        // honor the bound.
        const auto back = detail::external_invoke(spec.codec_id, "-d", payload);
        const auto recon = detail::external_parse_output(back, n);
        for (std::size_t i = 0; i < n; ++i) {
            const bool ok = spec.tau_abs > 0.0
                                ? std::fabs(values[i] - recon[i]) <= spec.tau_abs
                                : detail::double_bits(values[i]) == detail::double_bits(recon[i]);
            if (!ok)
                throw external_codec_violation(
                    "external codec exceeds tau at element " + std::to_string(i));
        }
        header.u64(0);
        header.bytes(payload.data(), payload.size());
        comp.payload = header.take();
        return comp;
    }

    if (spec.codec_id != kCodecBuiltinPQ)
        throw unknown_codec("unknown codec id " + std::to_string(spec.codec_id));

    detail::PredictorState pred_state(spec);

    if (spec.tau_abs == 0.0) {
        // Lossless: varint-coded XOR of the value's bit pattern against the
        // prediction's. Close values share leading bits, so the XOR is a
        // small integer.
        std::vector<double> recon(n);
        ByteWriter stream;
        for (std::uint64_t i = 0; i < n; ++i) {
            const double p = pred_state.predict(recon, i);
            stream.varint(detail::double_bits(values[i]) ^ detail::double_bits(p));
            recon[i] = values[i];
            pred_state.advance();
        }
        const auto packed = lossless_compress(stream.data().data(), stream.size(),
                                              spec.backend_id);
        header.u64(0);
        header.bytes(packed.data(), packed.size());
        comp.payload = header.take();
        return comp;
    }

    // Quantized path: bin width 2*tau, round half away from zero, prediction
    // from reconstructed values so error never accumulates. Values whose
    // quantum leaves the 32-bit range (or whose reconstruction misses the
    // bound in float arithmetic) escape to verbatim storage.
    const double bin = 2.0 * spec.tau_abs;
    std::vector<double> recon(n);
    ByteWriter qstream;
    ByteWriter escapes;
    std::uint64_t n_escapes = 0;
    constexpr double kQLimit = 2147483647.0;  // |q| beyond int32 escapes
    for (std::uint64_t i = 0; i < n; ++i) {
        const double p = pred_state.predict(recon, i);
        const double qd = std::round((values[i] - p) / bin);
        bool escape = !(std::fabs(qd) <= kQLimit);
        double r = 0.0;
        if (!escape) {
            r = p + qd * bin;
            escape = !(std::fabs(values[i] - r) <= spec.tau_abs);
        }
        if (escape) {
            escapes.u64(i);
            escapes.f64(values[i]);
            ++n_escapes;
            qstream.varint(0);
            recon[i] = values[i];
        } else {
            qstream.varint(zigzag_encode(static_cast<std::int64_t>(qd)));
            recon[i] = r;
        }
        pred_state.advance();
    }
    const auto packed = lossless_compress(qstream.data().data(), qstream.size(),
                                          spec.backend_id);
    header.u64(n_escapes);
    header.bytes(escapes.data().data(), escapes.size());
    header.bytes(packed.data(), packed.size());
    comp.payload = header.take();
    return comp;
}

inline EncodedComponent encode(const std::vector<double>& values, const CodecSpec& spec) {
    return encode(values.data(), values.size(), spec);
}

/// Parse a payload byte image back into a component (header fields only;
/// the stream is decoded lazily by decode()).
inline EncodedComponent parse_component(std::vector<std::uint8_t> payload) {
    ByteReader r(payload);
    EncodedComponent comp;
    comp.spec.codec_id = r.u8();
    const std::uint8_t pred = r.u8();
    if (pred > 2) throw corrupt_payload("bad predictor byte");
    comp.spec.predictor = static_cast<Predictor>(pred);
    comp.spec.backend_id = r.u8();
    (void)r.u8();  // reserved
    comp.spec.tau_abs = r.f64();
    comp.n_elements = r.u64();
    comp.spec.dims.resize(r.u8());
    for (auto& d : comp.spec.dims) d = r.u64();
    std::uint64_t prod = 1;
    for (std::uint64_t d : comp.spec.dims) prod *= d;
    if (comp.spec.dims.empty() || prod != comp.n_elements)
        throw corrupt_payload("dims product does not match element count");
    comp.original_bytes = comp.n_elements * 8;
    comp.payload = std::move(payload);
    return comp;
}

inline std::vector<double> decode(const EncodedComponent& comp) {
    ByteReader r(comp.payload);
    // Re-parse the header so decode depends only on the byte image.
    const std::uint8_t codec_id = r.u8();
    const std::uint8_t pred_byte = r.u8();
    const std::uint8_t backend_id = r.u8();
    (void)r.u8();
    const double tau = r.f64();
    const std::uint64_t n = r.u64();
    CodecSpec spec;
    spec.codec_id = codec_id;
    if (pred_byte > 2) throw corrupt_payload("bad predictor byte");
    spec.predictor = static_cast<Predictor>(pred_byte);
    spec.backend_id = backend_id;
    spec.tau_abs = tau;
    spec.dims.resize(r.u8());
    for (auto& d : spec.dims) d = r.u64();
    std::uint64_t prod = 1;
    for (std::uint64_t d : spec.dims) prod *= d;
    if (spec.dims.empty() || prod != n)
        throw corrupt_payload("dims product does not match element count");
    const std::uint64_t n_escapes = r.u64();

    if (codec_id == kCodecVerbatim) {
        if (n_escapes != 0) throw corrupt_payload("verbatim payload with escapes");
        std::vector<std::uint8_t> stream(r.remaining());
        r.bytes(stream.data(), stream.size());
        const auto raw = lossless_decompress(stream.data(), stream.size(), backend_id);
        if (raw.size() != n * 8) throw corrupt_payload("verbatim stream length mismatch");
        std::vector<double> out(n);
        ByteReader vr(raw);
        for (double& v : out) v = vr.f64();
        return out;
    }

    if (codec_id >= kCodecExternalBase) {
        std::vector<std::uint8_t> payload(r.remaining());
        r.bytes(payload.data(), payload.size());
        const auto back = detail::external_invoke(codec_id, "-d", payload);
        return detail::external_parse_output(back, n);
    }

    if (codec_id != kCodecBuiltinPQ) throw corrupt_payload("unknown codec id in payload");

    if (n_escapes > n) throw corrupt_payload("escape count exceeds element count");
    std::vector<std::uint64_t> esc_idx(n_escapes);
    std::vector<double> esc_val(n_escapes);
    for (std::uint64_t e = 0; e < n_escapes; ++e) {
        esc_idx[e] = r.u64();
        esc_val[e] = r.f64();
        if (esc_idx[e] >= n || (e > 0 && esc_idx[e] <= esc_idx[e - 1]))
            throw corrupt_payload("bad escape index sequence");
    }
    std::vector<std::uint8_t> stream(r.remaining());
    r.bytes(stream.data(), stream.size());
    const auto unpacked = lossless_decompress(stream.data(), stream.size(), backend_id);
    ByteReader qs(unpacked);

    detail::PredictorState pred_state(spec);
    std::vector<double> recon(n);
    const double bin = 2.0 * tau;
    std::uint64_t next_escape = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const double p = pred_state.predict(recon, i);
        const std::uint64_t z = qs.varint();
        if (tau == 0.0) {
            recon[i] = detail::bits_double(z ^ detail::double_bits(p));
        } else if (next_escape < n_escapes && esc_idx[next_escape] == i) {
            recon[i] = esc_val[next_escape++];
        } else {
            recon[i] = p + static_cast<double>(zigzag_decode(z)) * bin;
        }
        pred_state.advance();
    }
    if (!qs.done()) throw corrupt_payload("trailing bytes in quantized stream");
    if (tau == 0.0 && n_escapes != 0) throw corrupt_payload("lossless payload with escapes");
    return recon;
}

}  // namespace umc

#endif  // UMC_CODEC_HPP
