// cmtrace: traces of CM values of weakly holomorphic modular functions and
// the weight-3/2 generating series built from them.

#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cmtrace/cache.hpp"
#include "cmtrace/classnum.hpp"
#include "cmtrace/jsonio.hpp"
#include "cmtrace/traces.hpp"
#include "cmtrace/verify.hpp"

namespace {

using namespace cmtrace;
using jsonio::json;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitPrecision = 3;

struct CommonOpts {
    std::string function_text = "J";
    long level = 1;
    long disc = 0;
    long dmax = 0;
    std::string normalization = "G";
    long precision_bits = 96;
    unsigned jobs = 1;
    std::vector<double> v_values;
    std::string format = "json";
    std::string cache_path;
    bool fricke = false;
    std::string suite;
};

traces::Normalization parse_norm(const std::string& s) {
    if (s == "G") return traces::Normalization::G;
    if (s == "I0") return traces::Normalization::I0;
    throw std::domain_error("normalization must be G or I0");
}

traces::PrecisionPolicy policy_of(const CommonOpts& o) {
    traces::PrecisionPolicy p;
    p.base_bits = o.precision_bits;
    p.check();
    return p;
}

std::unique_ptr<cache::ResultCache> open_cache(const CommonOpts& o) {
    std::string path = o.cache_path;
    if (path.empty()) {
        if (const char* env = std::getenv("CMTRACE_CACHE")) path = env;
    }
    if (path.empty()) return nullptr;
    return std::make_unique<cache::ResultCache>(path);
}

traces::TraceRecord positive_trace_cached(const funcdsl::FunctionSpec& spec, long p, long D,
                                          const traces::PrecisionPolicy& policy,
                                          traces::Normalization norm,
                                          cache::ResultCache* result_cache) {
    if (result_cache) {
        auto key = cache::make_key(spec, D, norm);
        if (auto hit = result_cache->lookup(key, policy.base_bits)) return *hit;
        auto rec = traces::trace_positive(spec, p, D, policy, norm);
        result_cache->store(key, rec);
        return rec;
    }
    return traces::trace_positive(spec, p, D, policy, norm);
}

traces::GeneratingSeries assemble_series(const funcdsl::FunctionSpec& spec, long p, long Dmax,
                                         traces::Normalization norm,
                                         const traces::PrecisionPolicy& policy, unsigned jobs,
                                         cache::ResultCache* result_cache) {
    if (!result_cache) return traces::generating_series(spec, p, Dmax, norm, policy, jobs);
    // same assembly as the library, with the per-D positive traces going
    // through the persistent cache
    if (norm == traces::Normalization::G && p > 1) {
        auto eig = funcdsl::fricke_eigenvalue(spec);
        if (!eig || *eig != 1)
            throw std::domain_error("the G normalization needs a Fricke-plus input");
    }
    long order = Dmax + 2;
    traces::GeneratingSeries out;
    out.level = p;
    out.spec_text = spec.canonical_text();
    out.normalization = norm;
    out.dmax = Dmax;
    long msqrt = 0;
    while ((msqrt + 1) * (msqrt + 1) <= Dmax) ++msqrt;
    for (long m = 1; m <= msqrt; ++m)
        out.table[-m * m] = traces::trace_negative(spec, p, m, norm, order);
    out.table[0] = traces::trace_zero(spec, p, norm, order);
    std::vector<traces::TraceRecord> positive(Dmax);
    parallel_for(static_cast<std::size_t>(Dmax), jobs, [&](std::size_t i) {
        positive[i] =
            positive_trace_cached(spec, p, static_cast<long>(i) + 1, policy, norm, result_cache);
    });
    for (long n = 1; n <= Dmax; ++n) out.table[n] = positive[n - 1];
    out.nonholo = traces::nonholo_terms(spec, p, norm, msqrt, order);
    out.plus_report = traces::plus_space_check(out);
    return out;
}

void emit(const json& doc, const std::string& csv, const CommonOpts& o) {
    if (o.format == "csv")
        std::cout << csv;
    else
        std::cout << doc.dump(2) << "\n";
}

int cmd_forms(const CommonOpts& o) {
    if (o.disc <= 0) throw std::domain_error("forms: --disc must be a positive integer");
    auto reps = qforms::class_reps_p(o.disc, o.level, o.fricke);
    json doc = jsonio::document("forms");
    doc["params"] = {{"disc", o.disc}, {"level", o.level}, {"fricke", o.fricke}};
    json rows = json::array();
    std::string csv = "a,b,c,stabilizer_order,fricke_fixed,weight_denominator,cm_re,cm_im\n";
    for (const auto& r : reps) {
        auto cm = qforms::cm_point(r.form);
        auto z = etafun::UpperHalfPoint::from_cm(cm, 128);
        json row;
        row["form"] = {r.form.a, r.form.b, r.form.c};
        row["stabilizer_order"] = r.stabilizer_order;
        row["fricke_fixed"] = r.fricke_fixed;
        row["weight_denominator"] = r.weight_denominator();
        row["cm_point"] = {{"a", cm.a}, {"b", cm.b}, {"D", cm.D},
                           {"re", jsonio::rat_json(cm.real_part())},
                           {"re_decimal", jsonio::real_decimal(z.x, 30)},
                           {"im_decimal", jsonio::real_decimal(z.y, 30)}};
        rows.push_back(row);
        csv += std::to_string(r.form.a) + "," + std::to_string(r.form.b) + "," +
               std::to_string(r.form.c) + "," + std::to_string(r.stabilizer_order) + "," +
               (r.fricke_fixed ? "1" : "0") + "," + std::to_string(r.weight_denominator()) + "," +
               z.x.str(20) + "," + z.y.str(20) + "\n";
    }
    doc["classes"] = rows;
    doc["count"] = reps.size();
    emit(doc, csv, o);
    return kExitOk;
}

int cmd_series(const CommonOpts& o) {
    if (o.dmax <= 0) throw std::domain_error("series: --dmax must be a positive integer");
    auto spec = funcdsl::parse(o.function_text, o.level);
    auto policy = policy_of(o);
    auto norm = parse_norm(o.normalization);
    auto result_cache = open_cache(o);
    auto series =
        assemble_series(spec, o.level, o.dmax, norm, policy, o.jobs, result_cache.get());

    json doc = jsonio::document("series");
    doc["params"] = {{"function", o.function_text},
                     {"level", o.level},
                     {"dmax", o.dmax},
                     {"normalization", o.normalization},
                     {"precision_bits", o.precision_bits},
                     {"v", o.v_values}};
    doc["series"] = jsonio::series_json(series, o.v_values, 192);

    bool uncertified = false;
    for (const auto& [n, rec] : series.table) {
        if (!rec.value_numeric || !rec.rounded) continue;
        double delta = std::abs(
            (rec.value_numeric->value - Real(*rec.rounded, rec.value_numeric->value.prec()))
                .to_double());
        if (delta > 1e-6 || rec.value_numeric->abs_err > 1e-6) uncertified = true;
    }
    std::string csv;
    if (uncertified) csv += "# rounding_uncertified=true\n";
    csv += "n,coefficient\n";
    for (const auto& [n, rec] : series.table) {
        Rat c = rec.value_exact ? *rec.value_exact : rec.rounded.value_or(Rat(0));
        csv += std::to_string(n) + "," + rat_str(c) + "\n";
    }
    emit(doc, csv, o);
    return series.plus_report.pass() ? kExitOk : kExitVerifyFail;
}

int cmd_trace(const CommonOpts& o) {
    if (o.disc <= 0 && o.dmax <= 0)
        throw std::domain_error("trace: provide --disc or a positive --dmax");
    auto spec = funcdsl::parse(o.function_text, o.level);
    auto policy = policy_of(o);
    auto norm = parse_norm(o.normalization);
    auto result_cache = open_cache(o);
    std::vector<long> ds;
    if (o.disc > 0)
        ds.push_back(o.disc);
    else
        for (long D = 1; D <= o.dmax; ++D) ds.push_back(D);

    std::vector<traces::TraceRecord> recs(ds.size());
    parallel_for(ds.size(), o.jobs, [&](std::size_t i) {
        recs[i] = positive_trace_cached(spec, o.level, ds[i], policy, norm, result_cache.get());
    });

    json doc = jsonio::document("trace");
    doc["params"] = {{"function", o.function_text},
                     {"level", o.level},
                     {"normalization", o.normalization},
                     {"precision_bits", o.precision_bits}};
    json rows = json::array();
    std::string csv = "D,trace\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        json r = jsonio::trace_record_json(recs[i]);
        r["D"] = ds[i];
        rows.push_back(r);
        Rat c = recs[i].value_exact ? *recs[i].value_exact : recs[i].rounded.value_or(Rat(0));
        csv += std::to_string(ds[i]) + "," + rat_str(c) + "\n";
    }
    doc["traces"] = rows;
    emit(doc, csv, o);
    return kExitOk;
}

int cmd_classnum(const CommonOpts& o) {
    if (o.dmax < 0) throw std::domain_error("classnum: --dmax must be >= 0");
    auto table = classnum::zagier_holomorphic_part(o.dmax);
    json doc = jsonio::document("classnum");
    doc["params"] = {{"dmax", o.dmax}};
    json rows = json::array();
    std::string csv = "D,H\n";
    for (const auto& [D, h] : table) {
        rows.push_back(json{{"D", D}, {"H", jsonio::rat_json(h)}});
        csv += std::to_string(D) + "," + rat_str(h) + "\n";
    }
    doc["hurwitz"] = rows;
    emit(doc, csv, o);
    return kExitOk;
}

int cmd_verify(const CommonOpts& o) {
    verify::SuiteOptions opts;
    opts.function_text = o.function_text;
    opts.level = o.level;
    opts.dmax = o.dmax;
    opts.jobs = o.jobs;
    opts.policy = policy_of(o);
    auto result = verify::run_suite(o.suite, opts);
    json doc = jsonio::document("verify");
    doc["suite"] = result.suite;
    doc["pass"] = result.pass();
    json checks = json::array();
    for (const auto& c : result.checks)
        checks.push_back(json{{"name", c.name}, {"pass", c.pass}, {"delta", c.delta}});
    doc["checks"] = checks;
    std::string csv = "check,pass,delta\n";
    for (const auto& c : result.checks)
        csv += "\"" + c.name + "\"," + (c.pass ? "1" : "0") + "," + jsonio::err_string(c.delta) +
               "\n";
    emit(doc, csv, o);
    return result.pass() ? kExitOk : kExitVerifyFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"traces of CM values of modular functions and their weight-3/2 series"};
    app.require_subcommand(1);
    CommonOpts o;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--function", o.function_text, "input function (eta-quotient DSL)");
        cmd->add_option("--level", o.level, "level p (1 or prime)");
        cmd->add_option("--precision-bits", o.precision_bits, "certified precision target");
        cmd->add_option("--jobs", o.jobs, "worker threads for trace fan-out");
        cmd->add_option("--format", o.format, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
        cmd->add_option("--cache", o.cache_path, "result cache path (JSON lines)");
    };

    CLI::App* forms = app.add_subcommand("forms", "class representatives and CM points");
    forms->add_option("--disc", o.disc, "discriminant D > 0")->required();
    forms->add_option("--level", o.level, "level p (1 or prime)");
    forms->add_flag("--fricke", o.fricke, "fold classes under the Fricke involution");
    forms->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));

    CLI::App* series = app.add_subcommand("series", "assemble the weight-3/2 generating series");
    add_common(series);
    series->add_option("--dmax", o.dmax, "largest positive index")->required();
    series->add_option("--normalization", o.normalization, "G or I0")
        ->check(CLI::IsMember({"G", "I0"}));
    series->add_option("--v", o.v_values, "evaluate non-holomorphic terms at these v");

    CLI::App* trace = app.add_subcommand("trace", "positive-index CM traces");
    add_common(trace);
    trace->add_option("--disc", o.disc, "single discriminant");
    trace->add_option("--dmax", o.dmax, "or all D = 1..dmax");
    trace->add_option("--normalization", o.normalization, "G or I0")
        ->check(CLI::IsMember({"G", "I0"}));

    CLI::App* cls = app.add_subcommand("classnum", "Hurwitz class number table");
    cls->add_option("--dmax", o.dmax, "largest index")->required();
    cls->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));

    CLI::App* ver = app.add_subcommand("verify", "run a verification suite");
    add_common(ver);
    ver->add_option("--suite", o.suite, "suite name")
        ->required()
        ->check(CLI::IsMember(verify::suite_names()));
    ver->add_option("--dmax", o.dmax, "override the suite's index range");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (forms->parsed()) return cmd_forms(o);
        if (series->parsed()) return cmd_series(o);
        if (trace->parsed()) return cmd_trace(o);
        if (cls->parsed()) return cmd_classnum(o);
        if (ver->parsed()) return cmd_verify(o);
        std::cerr << "no subcommand given\n";
        return kExitUsage;
    } catch (const precision_error& e) {
        std::cerr << "precision exhaustion: " << e.what() << " (achieved bound "
                  << e.achieved_bound() << ")\n";
        return kExitPrecision;
    } catch (const parse_error& e) {
        std::cerr << "function parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitUsage;
    }
}
