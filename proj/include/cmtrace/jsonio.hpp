#ifndef CMTRACE_JSONIO_HPP
#define CMTRACE_JSONIO_HPP

#include <chrono>
#include <ctime>
#include <string>

#include "json.hpp"

#include "cmtrace/classnum.hpp"
#include "cmtrace/traces.hpp"
#include "cmtrace/util.hpp"

namespace cmtrace::jsonio {

using nlohmann::json;

inline json rat_json(const Rat& r) {
    return json{{"num", r.get_num().get_str()}, {"den", r.get_den().get_str()}};
}

inline std::string real_decimal(const Real& v, std::size_t digits = 40) { return v.str(digits); }

inline std::string err_string(double err) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", err);
    return buf;
}

inline std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

inline json trace_record_json(const traces::TraceRecord& rec) {
    json out;
    out["index"] = rat_json(rec.index);
    switch (rec.kind) {
        case traces::TraceRecord::Kind::Positive: out["kind"] = "positive"; break;
        case traces::TraceRecord::Kind::Zero: out["kind"] = "zero"; break;
        case traces::TraceRecord::Kind::Negative: out["kind"] = "negative"; break;
    }
    if (rec.value_exact) out["exact"] = rat_json(*rec.value_exact);
    if (rec.value_numeric) {
        out["value"] = real_decimal(rec.value_numeric->value);
        out["err"] = err_string(rec.value_numeric->abs_err);
        out["bits"] = static_cast<long>(rec.value_numeric->bits);
    }
    if (rec.rounded) out["rounded"] = rat_json(*rec.rounded);
    return out;
}

inline json nonholo_json(const traces::NonHoloTerm& t, const std::vector<double>& vs,
                         mpfr_prec_t bits) {
    json out;
    out["index"] = rat_json(t.index);
    out["kind"] = t.kind == traces::NonHoloTerm::Kind::InverseSqrtV ? "inverse_sqrt_v" : "beta_term";
    out["scalar"] = rat_json(t.scalar);
    if (t.kind == traces::NonHoloTerm::Kind::InverseSqrtV) {
        out["description"] = "scalar / (pi sqrt(v))";
    } else {
        out["description"] = "scalar / (pi sqrt(v)) * beta(coef * pi * v), one term per sign of N";
        out["beta_argument_coef"] = rat_json(t.beta_argument_coef);
    }
    if (!vs.empty()) {
        json vals = json::array();
        for (double v : vs) {
            vals.push_back(json{{"v", v}, {"value", real_decimal(t.value(Real(v, bits), bits))}});
        }
        out["values"] = vals;
    }
    return out;
}

inline json plus_report_json(const traces::PlusSpaceReport& rep) {
    json out;
    out["pass"] = rep.pass();
    json v = json::array();
    for (const auto& viol : rep.violations)
        v.push_back(json{{"index", viol.index}, {"reason", viol.reason}});
    out["violations"] = v;
    return out;
}

inline json series_json(const traces::GeneratingSeries& s, const std::vector<double>& vs,
                        mpfr_prec_t bits) {
    json out;
    out["level"] = s.level;
    out["function"] = s.spec_text;
    out["normalization"] = traces::normalization_name(s.normalization);
    out["dmax"] = s.dmax;
    json coeffs = json::array();
    for (const auto& [n, rec] : s.table) {
        json c = trace_record_json(rec);
        c["n"] = n;
        coeffs.push_back(c);
    }
    out["coefficients"] = coeffs;
    json nh = json::array();
    for (const auto& t : s.nonholo) nh.push_back(nonholo_json(t, vs, bits));
    out["nonholo"] = nh;
    out["plus_space"] = plus_report_json(s.plus_report);
    return out;
}

inline json document(const std::string& command) {
    json out;
    out["schema"] = "cmtrace/1";
    out["tool_version"] = kVersion;
    out["timestamp"] = iso_timestamp();
    out["command"] = command;
    return out;
}

}  // namespace cmtrace::jsonio

#endif
