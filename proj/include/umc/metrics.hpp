#ifndef UMC_METRICS_HPP
#define UMC_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "umc/common.hpp"
#include "umc/serialize.hpp"

namespace umc {

/// One benchmark run: a (dataset, field, method, codec, tau) cell plus its
/// measured rate, distortion and wall times.
struct RunRecord {
    std::string dataset;
    std::string field;
    std::string method;  // "default" or "mc"
    int codec_id = 0;
    double tau_rel = 0.0;  // 0 when the run used an absolute bound
    double tau_abs = 0.0;
    double cr = 0.0;
    double eps_rel_l2 = 0.0;
    double max_abs_err = 0.0;
    double t_encode = 0.0;  // seconds, monotonic clock
    double t_decode = 0.0;
    double percentile_k = 0.0;
    double rho = 0.0;
};

inline double compression_ratio(std::uint64_t original_bytes, std::uint64_t compressed_bytes) {
    if (compressed_bytes == 0) throw error("compressed size must be positive");
    return static_cast<double>(original_bytes) / static_cast<double>(compressed_bytes);
}

inline double rel_l2_error(const std::vector<double>& x, const std::vector<double>& xp) {
    if (x.size() != xp.size()) throw error("rel_l2_error length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - xp[i];
        num += d * d;
        den += x[i] * x[i];
    }
    if (den == 0.0) throw zero_norm_reference("reference field has zero norm");
    return std::sqrt(num) / std::sqrt(den);
}

inline double max_abs_error(const std::vector<double>& x, const std::vector<double>& xp,
                            std::size_t* argmax = nullptr) {
    if (x.size() != xp.size()) throw error("max_abs_error length mismatch");
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = std::fabs(x[i] - xp[i]);
        if (d > worst) {
            worst = d;
            at = i;
        }
    }
    if (argmax) *argmax = at;
    return worst;
}

inline double improvement_ratio(double cr_mc, double cr_default) {
    if (!(cr_default > 0.0)) throw error("baseline compression ratio must be positive");
    return cr_mc / cr_default;
}

/// Pairing-checked form: both records must come from the same codec, bound
/// and dataset for the ratio to mean anything.
inline double improvement_ratio(const RunRecord& mc, const RunRecord& dflt) {
    if (mc.method != "mc" || dflt.method != "default")
        throw mismatched_runs("improvement ratio needs one mc and one default record");
    if (mc.codec_id != dflt.codec_id)
        throw mismatched_runs("records use different codecs");
    if (mc.tau_rel != dflt.tau_rel || mc.tau_abs != dflt.tau_abs)
        throw mismatched_runs("records use different error bounds");
    if (mc.dataset != dflt.dataset || mc.field != dflt.field)
        throw mismatched_runs("records describe different data");
    return improvement_ratio(mc.cr, dflt.cr);
}

inline double throughput_overhead(double t_mc, double t_default) {
    if (!(t_default > 0.0)) throw error("baseline time must be positive");
    return (t_mc - t_default) / t_default;
}

namespace detail {

inline void validate_record(const RunRecord& r) {
    if (r.max_abs_err > r.tau_abs)
        throw error("record for " + r.dataset + "/" + r.field +
                    " violates its error bound; refusing to report it");
}

inline std::vector<const RunRecord*> sorted_records(const std::vector<RunRecord>& records) {
    std::vector<const RunRecord*> ptrs;
    ptrs.reserve(records.size());
    for (const auto& r : records) {
        validate_record(r);
        ptrs.push_back(&r);
    }
    std::stable_sort(ptrs.begin(), ptrs.end(), [](const RunRecord* a, const RunRecord* b) {
        return std::tie(a->dataset, a->field, a->tau_abs, a->tau_rel, a->method) <
               std::tie(b->dataset, b->field, b->tau_abs, b->tau_rel, b->method);
    });
    return ptrs;
}

}  // namespace detail

inline std::string emit_report(const std::vector<RunRecord>& records) {
    std::string out =
        "dataset,field,method,codec,tau_rel,tau_abs,CR,eps_l2,max_err,t_encode,t_decode,k,rho\n";
    for (const RunRecord* r : detail::sorted_records(records)) {
        out += r->dataset;
        out += ',';
        out += r->field;
        out += ',';
        out += r->method;
        out += ',';
        out += std::to_string(r->codec_id);
        for (double v : {r->tau_rel, r->tau_abs, r->cr, r->eps_rel_l2, r->max_abs_err,
                         r->t_encode, r->t_decode, r->percentile_k, r->rho}) {
            out += ',';
            out += detail::format_double(v);
        }
        out += '\n';
    }
    return out;
}

inline std::string emit_report_json(const std::vector<RunRecord>& records) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const RunRecord* r : detail::sorted_records(records)) {
        rows.push_back({{"dataset", r->dataset},
                        {"field", r->field},
                        {"method", r->method},
                        {"codec", r->codec_id},
                        {"tau_rel", r->tau_rel},
                        {"tau_abs", r->tau_abs},
                        {"CR", r->cr},
                        {"eps_l2", r->eps_rel_l2},
                        {"max_err", r->max_abs_err},
                        {"t_encode", r->t_encode},
                        {"t_decode", r->t_decode},
                        {"k", r->percentile_k},
                        {"rho", r->rho}});
    }
    return rows.dump(2) + "\n";
}

}  // namespace umc

#endif  // UMC_METRICS_HPP
