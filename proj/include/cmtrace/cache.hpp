#ifndef CMTRACE_CACHE_HPP
#define CMTRACE_CACHE_HPP

#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"

#include "cmtrace/rational.hpp"
#include "cmtrace/traces.hpp"
#include "cmtrace/util.hpp"

namespace cmtrace::cache {

struct CacheKey {
    long level = 1;
    std::uint64_t spec_hash = 0;
    long D = 0;
    std::string normalization;

    std::string str() const {
        return std::to_string(level) + "|" + std::to_string(spec_hash) + "|" + std::to_string(D) +
               "|" + normalization;
    }
};

// Persistent JSON-lines store for positive-index trace records. A hit is only
// served when the stored working precision meets the request; a file that
// fails to parse anywhere is discarded wholesale and rebuilt.
class ResultCache {
public:
    explicit ResultCache(std::string path) : path_(std::move(path)) { load(); }

    std::optional<traces::TraceRecord> lookup(const CacheKey& key, long min_bits) const {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key.str());
        if (it == entries_.end()) return std::nullopt;
        const nlohmann::json& e = it->second;
        // exact records are precision-independent; numeric ones must have
        // been computed at the requested precision or better
        if (!e.contains("exact") && e.at("bits").get<long>() < min_bits) return std::nullopt;
        return decode(e);
    }

    void store(const CacheKey& key, const traces::TraceRecord& rec) {
        nlohmann::json e = encode(key, rec);
        std::lock_guard lock(mutex_);
        entries_[key.str()] = e;
        std::ofstream out(path_, std::ios::app);
        out << e.dump() << "\n";
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

private:
    static Rat rat_of(const nlohmann::json& j) {
        Rat r(j.at("num").get<std::string>() + "/" + j.at("den").get<std::string>());
        r.canonicalize();
        return r;
    }

    static nlohmann::json rat_to(const Rat& r) {
        return {{"num", r.get_num().get_str()}, {"den", r.get_den().get_str()}};
    }

    static nlohmann::json encode(const CacheKey& key, const traces::TraceRecord& rec) {
        nlohmann::json e;
        e["key"] = {{"level", key.level},
                    {"spec_hash", key.spec_hash},
                    {"D", key.D},
                    {"normalization", key.normalization}};
        e["version"] = kVersion;
        long bits = rec.value_numeric ? static_cast<long>(rec.value_numeric->bits) : 0;
        e["bits"] = bits;
        if (rec.value_exact) e["exact"] = rat_to(*rec.value_exact);
        if (rec.rounded) e["rounded"] = rat_to(*rec.rounded);
        if (rec.value_numeric) {
            // hex float round-trips the mpfr value exactly
            char* s = nullptr;
            mpfr_asprintf(&s, "%Ra", rec.value_numeric->value.raw());
            e["value_hex"] = std::string(s);
            mpfr_free_str(s);
            e["err"] = rec.value_numeric->abs_err;
        }
        return e;
    }

    static traces::TraceRecord decode(const nlohmann::json& e) {
        traces::TraceRecord rec;
        rec.index = Rat(e.at("key").at("D").get<long>());
        rec.kind = traces::TraceRecord::Kind::Positive;
        if (e.contains("exact")) rec.value_exact = rat_of(e.at("exact"));
        if (e.contains("rounded")) rec.rounded = rat_of(e.at("rounded"));
        if (e.contains("value_hex")) {
            long bits = std::max<long>(e.at("bits").get<long>(), 64);
            Real v(static_cast<mpfr_prec_t>(bits));
            mpfr_set_str(v.raw(), e.at("value_hex").get<std::string>().c_str(), 16, MPFR_RNDN);
            rec.value_numeric =
                traces::NumericValue{v, e.at("err").get<double>(), static_cast<mpfr_prec_t>(bits)};
        }
        return rec;
    }

    void load() {
        entries_.clear();
        std::ifstream in(path_);
        if (!in) return;
        std::map<std::string, nlohmann::json> parsed;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json e = nlohmann::json::parse(line, nullptr, false);
            if (e.is_discarded() || !e.contains("key") || !e.contains("bits")) {
                entries_.clear();
                return;  // corrupted: never trust partially
            }
            CacheKey k{e["key"].value("level", 1L), e["key"].value("spec_hash", 0ull),
                       e["key"].value("D", 0L), e["key"].value("normalization", std::string())};
            parsed[k.str()] = e;
        }
        entries_ = std::move(parsed);
    }

    std::string path_;
    mutable std::mutex mutex_;
    std::map<std::string, nlohmann::json> entries_;
};

inline CacheKey make_key(const funcdsl::FunctionSpec& spec, long D,
                         traces::Normalization norm) {
    return {spec.level, fnv1a(spec.canonical_text()), D, traces::normalization_name(norm)};
}

}  // namespace cmtrace::cache

#endif
