#include "qkdsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <string>

#include "json.hpp"

namespace qkdsim {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg) { throw config_error("config error: " + msg); }

void ensure_keys(const ordered_json& j, const char* ctx,
                 std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return item.key() == k;
            }) == allowed.end())
            fail(std::string("unknown field '") + item.key() + "' in " + ctx);
    }
}

double get_double(const ordered_json& j, const char* field, double fallback) {
    if (!j.contains(field)) return fallback;
    if (!j.at(field).is_number()) fail(std::string("field '") + field + "' must be a number");
    return j.at(field).get<double>();
}

bool get_bool(const ordered_json& j, const char* field, bool fallback) {
    if (!j.contains(field)) return fallback;
    if (!j.at(field).is_boolean()) fail(std::string("field '") + field + "' must be a boolean");
    return j.at(field).get<bool>();
}

std::uint64_t get_u64(const ordered_json& j, const char* field, std::uint64_t fallback) {
    if (!j.contains(field)) return fallback;
    const auto& v = j.at(field);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    fail(std::string("field '") + field + "' must be a non-negative integer");
}

std::string get_string(const ordered_json& j, const char* field, const std::string& fallback) {
    if (!j.contains(field)) return fallback;
    if (!j.at(field).is_string()) fail(std::string("field '") + field + "' must be a string");
    return j.at(field).get<std::string>();
}

Dist parse_dist(const ordered_json& j, const std::string& field) {
    if (!j.contains(field)) return Dist::fixed(0.0);
    const auto& d = j.at(field);
    if (!d.is_object()) fail("field '" + field + "' must be an object");
    const std::string kind = get_string(d, "dist", "");
    if (kind == "fixed") {
        ensure_keys(d, field.c_str(), {"dist", "value"});
        return Dist::fixed(get_double(d, "value", 0.0));
    }
    if (kind == "uniform") {
        ensure_keys(d, field.c_str(), {"dist", "lo", "hi"});
        return Dist::uniform_range(get_double(d, "lo", 0.0), get_double(d, "hi", 0.0));
    }
    if (kind == "gaussian") {
        ensure_keys(d, field.c_str(), {"dist", "mean", "sigma"});
        return Dist::gaussian(get_double(d, "mean", 0.0), get_double(d, "sigma", 0.0));
    }
    fail("field '" + field + "' has unknown dist '" + kind +
         "' (expected fixed, uniform or gaussian)");
}

ordered_json dist_to_json(const Dist& d) {
    switch (d.kind) {
        case Dist::Kind::Fixed:
            return {{"dist", "fixed"}, {"value", d.a}};
        case Dist::Kind::Uniform:
            return {{"dist", "uniform"}, {"lo", d.a}, {"hi", d.b}};
        case Dist::Kind::Gaussian:
            return {{"dist", "gaussian"}, {"mean", d.a}, {"sigma", d.b}};
    }
    throw std::logic_error("dist_to_json: bad kind");
}

const char* protocol_name(Protocol p) {
    switch (p) {
        case Protocol::Protocol1: return "protocol1";
        case Protocol::Protocol2: return "protocol2";
        case Protocol::Protocol3: return "protocol3";
        case Protocol::Bb84: return "bb84";
    }
    throw std::logic_error("protocol_name: bad protocol");
}

void check_range(double v, double lo, double hi, const char* field) {
    if (!(v >= lo && v <= hi)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s must be in [%g,%g] (got %g)", field, lo, hi, v);
        fail(buf);
    }
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.n_codes < 1) fail("n_codes must be >= 1");
    check_range(cfg.z_bias, 0.0, 1.0, "z_bias");
    check_range(cfg.channel.loss_prob, 0.0, 1.0, "loss_prob");
    check_range(cfg.z_test_fraction, 0.0, 1.0, "error_test.z_fraction");
    check_range(cfg.x_test_fraction, 0.0, 1.0, "error_test.x_fraction");
    if (!(cfg.abort_if_tp_above >= 0.0) || !std::isfinite(cfg.abort_if_tp_above))
        fail("abort_if_tp_above must be a finite number >= 0");
    const BasisWeights& w = cfg.basis_weights;
    if (!(w.z >= 0.0 && w.x >= 0.0 && w.y >= 0.0))
        fail("basis_weights must be non-negative");
    if (!(w.z + w.x + w.y > 0.0)) fail("basis_weights must not all be zero");
    if (cfg.protocol != Protocol::Protocol2 && !(w.z + w.x > 0.0))
        fail("basis_weights.z + basis_weights.x must be > 0 for this protocol");
    if (cfg.channel.block_size < 1) fail("channel.block_size must be >= 1");
    try {
        cfg.channel.rotation.theta.validate("channel.theta");
        cfg.channel.rotation.phi.validate("channel.phi");
        cfg.channel.rotation.delta.validate("channel.delta");
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    if (cfg.distill.block_size < 1) fail("distill.block_size must be >= 1");
    if (!(cfg.distill.reveal_fraction > 0.0 && cfg.distill.reveal_fraction <= 1.0))
        fail("distill.reveal_fraction must be in (0,1]");
}

// include_output: the report echo leaves out the output block, so where a
// report is written never changes its bytes.
ordered_json config_to_json(const ExperimentConfig& cfg, bool include_output = true) {
    ordered_json j;
    j["protocol"] = protocol_name(cfg.protocol);
    j["n_codes"] = cfg.n_codes;
    j["seed"] = cfg.seed;
    j["z_bias"] = cfg.z_bias;
    j["basis_weights"] = {{"z", cfg.basis_weights.z},
                          {"x", cfg.basis_weights.x},
                          {"y", cfg.basis_weights.y}};
    j["channel"] = {{"theta", dist_to_json(cfg.channel.rotation.theta)},
                    {"phi", dist_to_json(cfg.channel.rotation.phi)},
                    {"delta", dist_to_json(cfg.channel.rotation.delta)},
                    {"loss_prob", cfg.channel.loss_prob},
                    {"real_rotation_only", cfg.channel.real_rotation_only},
                    {"eve", cfg.channel.eve == EveMode::InterceptResendZ ? "intercept_resend_z"
                                                                         : "none"},
                    {"block_size", cfg.channel.block_size}};
    j["error_test"] = {{"z_fraction", cfg.z_test_fraction}, {"x_fraction", cfg.x_test_fraction}};
    j["distill"] = {{"apply", cfg.distill.apply},
                    {"block_size", cfg.distill.block_size},
                    {"reveal_fraction", cfg.distill.reveal_fraction}};
    j["abort_if_tp_above"] = cfg.abort_if_tp_above;
    if (include_output)
        j["output"] = {{"path", cfg.output.path},
                       {"format", cfg.output.format == ReportFormat::Csv ? "csv" : "structured"}};
    return j;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";  // strip the platform's sign flavor
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

ordered_json category_to_json(const CategoryCount& c) {
    return {{"n", c.n}, {"wrong", c.wrong}, {"rate", c.rate()}, {"se", c.se()}};
}

ordered_json estimate_to_json(const ErrorEstimate& est) {
    ordered_json j;
    j["psi_minus"] = {{"z", category_to_json(est.minus_z)},
                      {"x", category_to_json(est.minus_x)},
                      {"y", category_to_json(est.minus_y)}};
    j["psi_plus"] = {{"z", category_to_json(est.plus_z)},
                     {"x", category_to_json(est.plus_x)},
                     {"y", category_to_json(est.plus_y)}};
    j["z_test"] = category_to_json(est.z_test);
    j["z_matched"] = est.z_matched;
    j["z_accepted"] = est.z_accepted;
    j["t_minus"] = est.t_minus;
    j["t_minus_se"] = est.t_minus_se;
    j["t_plus"] = est.t_plus;
    j["t_plus_se"] = est.t_plus_se;
    j["t_p"] = est.t_p;
    j["t_p_se"] = est.t_p_se;
    j["r_b"] = est.r_b;
    j["r_b_se"] = est.r_b_se;
    j["acceptance_fraction"] = est.acceptance_fraction;
    j["out_of_range"] = est.out_of_range;
    return j;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) fail("top-level config must be an object");
    ensure_keys(j, "config",
                {"protocol", "n_codes", "seed", "z_bias", "basis_weights", "channel",
                 "error_test", "distill", "abort_if_tp_above", "output"});

    ExperimentConfig cfg;
    const std::string proto = get_string(j, "protocol", "");
    if (proto == "protocol1")
        cfg.protocol = Protocol::Protocol1;
    else if (proto == "protocol2")
        cfg.protocol = Protocol::Protocol2;
    else if (proto == "protocol3")
        cfg.protocol = Protocol::Protocol3;
    else if (proto == "bb84")
        cfg.protocol = Protocol::Bb84;
    else if (proto == "six_state")
        fail("protocol 'six_state' is reserved but not implemented");
    else
        fail("unknown protocol '" + proto +
             "' (expected protocol1, protocol2, protocol3 or bb84)");

    cfg.n_codes = get_u64(j, "n_codes", 0);
    cfg.seed = get_u64(j, "seed", 0);
    cfg.z_bias = get_double(j, "z_bias", 0.5);

    if (j.contains("basis_weights")) {
        const auto& w = j.at("basis_weights");
        if (!w.is_object()) fail("field 'basis_weights' must be an object");
        ensure_keys(w, "basis_weights", {"z", "x", "y"});
        cfg.basis_weights.z = get_double(w, "z", 1.0);
        cfg.basis_weights.x = get_double(w, "x", 1.0);
        cfg.basis_weights.y = get_double(w, "y", 1.0);
    }

    if (j.contains("channel")) {
        const auto& c = j.at("channel");
        if (!c.is_object()) fail("field 'channel' must be an object");
        ensure_keys(c, "channel",
                    {"theta", "phi", "delta", "loss_prob", "real_rotation_only", "eve",
                     "block_size"});
        cfg.channel.rotation.theta = parse_dist(c, "theta");
        cfg.channel.rotation.phi = parse_dist(c, "phi");
        cfg.channel.rotation.delta = parse_dist(c, "delta");
        cfg.channel.loss_prob = get_double(c, "loss_prob", 0.0);
        cfg.channel.real_rotation_only = get_bool(c, "real_rotation_only", false);
        const std::string eve = get_string(c, "eve", "none");
        if (eve == "none")
            cfg.channel.eve = EveMode::None;
        else if (eve == "intercept_resend_z")
            cfg.channel.eve = EveMode::InterceptResendZ;
        else
            fail("unknown eve mode '" + eve + "' (expected none or intercept_resend_z)");
        cfg.channel.block_size = get_u64(c, "block_size", 1);
    }

    if (j.contains("error_test")) {
        const auto& t = j.at("error_test");
        if (!t.is_object()) fail("field 'error_test' must be an object");
        ensure_keys(t, "error_test", {"z_fraction", "x_fraction"});
        cfg.z_test_fraction = get_double(t, "z_fraction", 0.1);
        cfg.x_test_fraction = get_double(t, "x_fraction", 0.5);
    }

    if (j.contains("distill")) {
        const auto& d = j.at("distill");
        if (!d.is_object()) fail("field 'distill' must be an object");
        ensure_keys(d, "distill", {"apply", "block_size", "reveal_fraction"});
        cfg.distill.apply = get_bool(d, "apply", false);
        cfg.distill.block_size = get_u64(d, "block_size", 1024);
        cfg.distill.reveal_fraction = get_double(d, "reveal_fraction", 0.5);
    }

    cfg.abort_if_tp_above = get_double(j, "abort_if_tp_above", 0.11);

    if (j.contains("output")) {
        const auto& o = j.at("output");
        if (!o.is_object()) fail("field 'output' must be an object");
        ensure_keys(o, "output", {"path", "format"});
        cfg.output.path = get_string(o, "path", "");
        const std::string fmt = get_string(o, "format", "structured");
        if (fmt == "structured")
            cfg.output.format = ReportFormat::Structured;
        else if (fmt == "csv")
            cfg.output.format = ReportFormat::Csv;
        else
            fail("unknown output format '" + fmt + "' (expected structured or csv)");
    }

    validate_config(cfg);
    return cfg;
}

std::string emit_config(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

std::string bits_to_hex(const std::vector<std::uint8_t>& bits) {
    static const char* digits = "0123456789abcdef";
    std::string hex;
    hex.reserve((bits.size() + 3) / 4);
    for (std::size_t i = 0; i < bits.size(); i += 4) {
        unsigned nibble = 0;
        for (std::size_t k = 0; k < 4 && i + k < bits.size(); ++k)
            nibble |= static_cast<unsigned>(bits[i + k] & 1) << (3 - k);
        hex.push_back(digits[nibble]);
    }
    return hex;
}

std::string report_to_json(const RunReport& report) {
    ordered_json j;
    j["tool"] = "qkdsim";
    j["version"] = "0.1.0";
    j["config"] = config_to_json(report.config, /*include_output=*/false);
    j["seed"] = report.seed;
    j["totals"] = {{"sent", report.totals.sent},
                   {"delivered", report.totals.delivered},
                   {"basis_matched", report.totals.basis_matched},
                   {"accepted", report.totals.accepted}};
    j["z"] = {{"matched", report.z.matched},
              {"accepted", report.z.accepted},
              {"revealed", report.z.revealed},
              {"key_bits", report.z.key_bits}};
    j["r_b"] = report.r_b;
    j["r_b_se"] = report.r_b_se;
    j["t_p"] = report.t_p;
    j["t_p_se"] = report.t_p_se;
    j["aborted"] = report.aborted;
    j["estimate"] = report.estimate ? estimate_to_json(*report.estimate) : ordered_json(nullptr);
    j["key_rate"] = {{"r_b", report.key.r_b},
                     {"t_p", report.key.t_p},
                     {"per_accepted_bit", report.key.rate_per_accepted_bit},
                     {"per_sent_code", report.key.rate_per_sent_code},
                     {"no_key", report.key.no_key}};
    j["raw_key_bits"] = report.raw_key.size();
    j["raw_key_hex"] = bits_to_hex(report.raw_key);
    if (report.final_key) {
        j["final_key_bits"] = report.final_key->size();
        j["final_key_hex"] = bits_to_hex(*report.final_key);
    }
    return j.dump(2) + "\n";
}

std::string report_to_csv_row(const RunReport& report) {
    const Dist& theta = report.config.channel.rotation.theta;
    const double theta_col =
        theta.kind == Dist::Kind::Fixed ? theta.a : std::numeric_limits<double>::quiet_NaN();
    std::string row;
    row += format_double(theta_col);
    row += ',' + std::to_string(report.totals.sent);
    row += ',' + std::to_string(report.totals.delivered);
    row += ',' + std::to_string(report.totals.accepted);
    row += ',' + format_double(report.r_b);
    row += ',' + format_double(report.r_b_se);
    row += ',' + format_double(report.t_p);
    row += ',' + format_double(report.t_p_se);
    row += ',' + format_double(report.key.rate_per_accepted_bit);
    return row;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string csv = std::string(kCsvHeader) + "\n";
    for (const SweepRow& row : rows) csv += report_to_csv_row(row.report) + "\n";
    return csv;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);

    RunOutcome outcome;
    switch (cfg.protocol) {
        case Protocol::Protocol1: outcome = run_protocol1(cfg); break;
        case Protocol::Protocol2: outcome = run_protocol2(cfg); break;
        case Protocol::Protocol3: outcome = run_protocol3(cfg); break;
        case Protocol::Bb84: outcome = run_bb84_baseline(cfg); break;
    }
    RunReport& rep = outcome.report;

    rep.aborted = std::isfinite(rep.t_p) && rep.t_p > cfg.abort_if_tp_above;
    if (std::isfinite(rep.t_p)) {
        // Out-of-range finite-sample estimates stay raw in the report; the
        // rate computation sees their clamp into [0,1].
        rep.key = key_rate(clamp01(rep.r_b), clamp01(rep.t_p));
    } else {
        rep.key = KeyRateReport{clamp01(rep.r_b), 1.0, 0.0, 0.0, true};
        rep.aborted = true;
    }

    if (rep.aborted) {
        rep.key.rate_per_accepted_bit = 0.0;
        rep.key.rate_per_sent_code = 0.0;
        rep.key.no_key = true;
        rep.raw_key.clear();
        rep.z.key_bits = 0;
    } else {
        rep.key.rate_per_sent_code = rep.key.rate_per_accepted_bit *
                                     static_cast<double>(rep.z.accepted) /
                                     static_cast<double>(rep.totals.sent);
        if (cfg.distill.apply && !rep.key.no_key && !outcome.alice_key.empty()) {
            std::vector<std::uint8_t> kept = outcome.alice_key;
            if (cfg.distill.block_size <= outcome.alice_key.size()) {
                Rng rng(derive_seed(cfg.seed, Lane::Distill, 0));
                const BlockInvertResult inv =
                    block_invert(outcome.alice_key, outcome.bob_key,
                                 BlockSpec{cfg.distill.block_size}, cfg.distill.reveal_fraction,
                                 rng);
                kept.clear();
                for (std::size_t i = 0; i < outcome.alice_key.size(); ++i)
                    if (!inv.consumed[i]) kept.push_back(outcome.alice_key[i]);
            }
            const auto out_len = static_cast<std::size_t>(
                rep.key.rate_per_accepted_bit * static_cast<double>(kept.size()));
            rep.final_key = privacy_amplify(kept, out_len,
                                            derive_seed(cfg.seed, Lane::Distill, 1));
        }
    }

    if (!cfg.output.path.empty()) {
        if (cfg.output.format == ReportFormat::Csv)
            write_file(cfg.output.path, std::string(kCsvHeader) + "\n" +
                                            report_to_csv_row(rep) + "\n");
        else
            write_file(cfg.output.path, report_to_json(rep));
    }
    return rep;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    if (spec.parameter != "theta")
        throw config_error("config error: sweep parameter must be 'theta' (got '" +
                           spec.parameter + "')");
    if (spec.values.empty()) throw config_error("config error: sweep needs at least one value");
    for (double v : spec.values)
        if (!std::isfinite(v)) throw config_error("config error: sweep values must be finite");

    std::vector<SweepRow> rows;
    rows.reserve(spec.values.size());
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        ExperimentConfig cfg = spec.base;
        cfg.channel.rotation.theta = Dist::fixed(spec.values[i]);
        cfg.seed = derive_seed(spec.base.seed, Lane::Sweep, i);  // by list position
        cfg.output.path.clear();
        rows.push_back({spec.values[i], run_experiment(cfg)});
    }
    return rows;
}

}  // namespace qkdsim
