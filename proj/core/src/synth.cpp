#include "gazepath/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <set>

#include "json.hpp"

namespace gazepath {

namespace {

// Portable draws from the raw engine output, independent of the standard
// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::size_t below(std::size_t bound) { return static_cast<std::size_t>(engine_() % bound); }

    double normal() {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        return r * std::cos(2.0 * M_PI * u2);
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

std::size_t saccade_samples(const SynthConfig& cfg) {
    return static_cast<std::size_t>(std::llround(cfg.saccade_ms * cfg.sampling_rate_hz / 1000.0));
}

std::pair<double, double> center_norm(const Token& t, const ScreenGeometry& geom) {
    return {t.bbox.center_x() / geom.width_px, t.bbox.center_y() / geom.height_px};
}

}  // namespace

double required_separation_deg(const SynthConfig& cfg, const FilterConfig& filter) {
    const double steps = static_cast<double>(saccade_samples(cfg) + 1);
    return filter.velocity_threshold_deg_s * steps / cfg.sampling_rate_hz;
}

GazeStream generate(const StimulusLayout& layout, const std::vector<std::size_t>& script,
                    const SynthConfig& cfg, const ScreenGeometry& geom,
                    const std::string& participant_id, const FilterConfig& filter) {
    if (!(cfg.sampling_rate_hz > 0)) throw ParameterError("synth: sampling_rate_hz must be > 0");
    if (cfg.noise_sd_norm < 0) throw ParameterError("synth: noise_sd_norm must be >= 0");
    const double period_ms = 1000.0 / cfg.sampling_rate_hz;
    if (cfg.dwell_ms_per_token < period_ms) {
        throw ParameterError("synth: dwell of " + std::to_string(cfg.dwell_ms_per_token) +
                             " ms is shorter than one sample period");
    }
    for (const auto idx : script) {
        if (idx >= layout.tokens.size()) {
            throw ParameterError("synth: script index " + std::to_string(idx) + " out of range");
        }
    }

    const auto dwell = static_cast<std::size_t>(std::llround(cfg.dwell_ms_per_token / period_ms));
    const auto saccade = saccade_samples(cfg);
    const double min_sep = required_separation_deg(cfg, filter);
    for (std::size_t k = 1; k < script.size(); ++k) {
        const auto [x0, y0] = center_norm(layout.tokens[script[k - 1]], geom);
        const auto [x1, y1] = center_norm(layout.tokens[script[k]], geom);
        const double dist = normalized_distance_deg(x0, y0, x1, y1, geom);
        if (dist <= min_sep) {
            throw ParameterError("synth: saccade " + std::to_string(k) + " spans " +
                                 std::to_string(dist) + " deg; needs more than " +
                                 std::to_string(min_sep) + " deg to exceed the velocity threshold");
        }
    }

    GazeStream stream;
    stream.participant_id = participant_id;
    stream.method_id = layout.method_id;
    stream.sampling_rate_hz = cfg.sampling_rate_hz;

    Rng rng(cfg.seed);
    std::size_t index = 0;
    auto push = [&](double x, double y) {
        GazeSample s;
        s.t_us = static_cast<std::int64_t>(std::llround(static_cast<double>(index) * 1e6 /
                                                        cfg.sampling_rate_hz));
        s.x = std::clamp(x, 0.0, 1.0);
        s.y = std::clamp(y, 0.0, 1.0);
        s.valid = true;
        stream.samples.push_back(s);
        ++index;
    };

    for (std::size_t k = 0; k < script.size(); ++k) {
        const auto [cx, cy] = center_norm(layout.tokens[script[k]], geom);
        if (k > 0) {
            const auto [px, py] = center_norm(layout.tokens[script[k - 1]], geom);
            for (std::size_t j = 1; j <= saccade; ++j) {
                const double f = static_cast<double>(j) / static_cast<double>(saccade + 1);
                push(px + f * (cx - px), py + f * (cy - py));
            }
        }
        for (std::size_t j = 0; j < dwell; ++j) {
            const double nx = cfg.noise_sd_norm > 0 ? rng.normal() * cfg.noise_sd_norm : 0.0;
            const double ny = cfg.noise_sd_norm > 0 ? rng.normal() * cfg.noise_sd_norm : 0.0;
            push(cx + nx, cy + ny);
        }
    }
    return stream;
}

std::vector<std::size_t> sample_script(const StimulusLayout& layout, std::size_t length,
                                       std::uint64_t seed, const ScreenGeometry& geom,
                                       double min_separation_deg) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < layout.tokens.size(); ++i) {
        if (layout.tokens[i].substantive()) candidates.push_back(i);
    }
    std::vector<std::size_t> script;
    if (candidates.empty()) return script;

    Rng rng(seed);
    script.push_back(rng.pick(candidates));
    while (script.size() < length) {
        const auto& prev = layout.tokens[script.back()];
        const auto [px, py] = center_norm(prev, geom);
        std::vector<std::size_t> options;
        for (const auto i : candidates) {
            const auto& t = layout.tokens[i];
            if (t.lexeme == prev.lexeme) continue;
            const auto [x, y] = center_norm(t, geom);
            if (normalized_distance_deg(px, py, x, y, geom) > min_separation_deg) options.push_back(i);
        }
        if (options.empty()) break;
        script.push_back(rng.pick(options));
    }
    return script;
}

namespace {

const std::vector<std::string> kTypes = {"int", "long", "boolean", "String", "Object", "double"};
const std::vector<std::string> kNames = {
    "buffer", "index",  "result", "count",   "value",  "items",  "config",  "entry",
    "offset", "length", "cache",  "handler", "target", "source", "builder", "token",
    "node",   "key",    "limit",  "status",  "header", "stream", "request", "session"};
const std::vector<std::string> kCalls = {
    "parseHeader", "readLine",    "getValue",   "setEnabled", "computeHash", "checkBounds",
    "appendEntry", "flushBuffer", "resolvePath", "loadConfig", "notifyAll",  "validate",
    "toString",    "isEmpty",     "add",        "put",        "remove",      "close"};
const std::vector<std::string> kMethodNames = {
    "process", "update", "handle", "build", "compute", "resolve", "encode", "decode",
    "merge",   "apply",  "parse",  "scan",  "emit",    "collect", "render", "verify"};
const std::vector<std::string> kNouns = {"Request", "Entry", "Header", "Buffer", "Node",
                                         "Token",   "Path",  "Config", "Session", "Stream"};
const std::vector<std::string> kComments = {"// skip empty input", "// overflow is clamped",
                                            "// cache the result", "// fast path"};

constexpr std::string_view kExampleMethod =
    "  public void  testNegativeParseCases() {\n"
    "    verbose(\"--->Negative parse tests  START\");\n"
    "    for (int i = 0; i < negativeParseTests.length; i++) {\n"
    "      parseFilter(negativeParseTests[i], false);\n"
    "    }\n"
    "    checkDelete(); }";

std::string make_method(Rng& rng) {
    const std::string ret = rng.pick(kTypes);
    const std::string name = rng.pick(kMethodNames) + rng.pick(kNouns);
    const std::string p1 = rng.pick(kNames);
    std::string p2 = rng.pick(kNames);
    while (p2 == p1) p2 = rng.pick(kNames);

    std::string src = "public " + ret + " " + name + "(" + rng.pick(kTypes) + " " + p1 + ", " +
                      rng.pick(kTypes) + " " + p2 + ") {\n";
    const std::size_t statements = 3 + rng.below(6);
    for (std::size_t s = 0; s < statements; ++s) {
        const std::string var = rng.pick(kNames);
        const std::string call = rng.pick(kCalls);
        switch (rng.below(6)) {
            case 0:
                src += "    " + rng.pick(kTypes) + " " + var + " = " + call + "(" + p1 + ");\n";
                break;
            case 1:
                src += "    if (" + var + " != null) {\n        " + var + "." + call + "(" + p2 +
                       ");\n    }\n";
                break;
            case 2:
                src += "    for (int i = 0; i < " + var + ".size(); i++) {\n        " + call + "(" +
                       var + ".get(i));\n    }\n";
                break;
            case 3:
                src += "    " + var + "." + call + "(\"" + rng.pick(kNames) + "\", " +
                       std::to_string(rng.below(100)) + ");\n";
                break;
            case 4:
                src += "    " + rng.pick(kComments) + "\n";
                break;
            default:
                src += "    " + var + " += " + p2 + " * " + std::to_string(1 + rng.below(9)) + ";\n";
                break;
        }
    }
    src += "    return " + (ret == "boolean" ? std::string("true") : ret == "String" ? p1 + ".toString()" : p1) + ";\n}";
    return src;
}

}  // namespace

std::vector<MethodSource> synthetic_methods(std::size_t count, std::uint64_t seed) {
    std::vector<MethodSource> methods;
    if (count == 0) return methods;
    methods.push_back({"31696447", std::string(kExampleMethod)});
    Rng rng(seed);
    std::set<std::string> sources{methods.front().source};
    while (methods.size() < count) {
        auto src = make_method(rng);
        if (!sources.insert(src).second) continue;
        char id[16];
        std::snprintf(id, sizeof id, "m%03zu", methods.size());
        methods.push_back({id, std::move(src)});
    }
    return methods;
}

std::string synthetic_participant_id(std::size_t index) {
    char id[16];
    std::snprintf(id, sizeof id, "p%02zu", index + 1);
    return id;
}

SyntheticStudy synthetic_study(const StudyShape& shape, const CodePane& pane,
                               const ScreenGeometry& geom, const SynthConfig& synth,
                               const FilterConfig& filter) {
    if (shape.methods == 0 || shape.participants == 0 || shape.sampling_rates.empty()) {
        throw ParameterError("synthetic_study: empty shape");
    }
    if (shape.methods_per_participant > shape.methods) {
        throw ParameterError("synthetic_study: more methods per participant than methods");
    }
    if (shape.min_script_length == 0 || shape.min_script_length > shape.max_script_length) {
        throw ParameterError("synthetic_study: bad script length range");
    }

    SyntheticStudy study;
    study.methods = synthetic_methods(shape.methods, shape.seed);
    std::vector<StimulusLayout> layouts;
    layouts.reserve(study.methods.size());
    for (const auto& m : study.methods) layouts.push_back(layout_method(m.method_id, m.source, pane));

    // Scripts must be renderable at every configured rate.
    double min_sep = filter.merge_max_dist_deg;
    for (const double rate : shape.sampling_rates) {
        SynthConfig at_rate = synth;
        at_rate.sampling_rate_hz = rate;
        min_sep = std::max(min_sep, required_separation_deg(at_rate, filter));
    }
    min_sep *= 1.25;

    Rng rng(shape.seed ^ 0x9E3779B97F4A7C15ull);
    for (std::size_t p = 0; p < shape.participants; ++p) {
        const double rate = shape.sampling_rates[p % shape.sampling_rates.size()];
        for (std::size_t k = 0; k < shape.methods_per_participant; ++k) {
            const std::size_t m = (p * shape.methods_per_participant + k) % shape.methods;
            const std::size_t span = shape.max_script_length - shape.min_script_length + 1;
            const std::size_t length = shape.min_script_length + rng.below(span);
            ScriptSpec spec;
            spec.participant_id = synthetic_participant_id(p);
            spec.method_id = study.methods[m].method_id;
            spec.sampling_rate_hz = rate;
            spec.tokens = sample_script(layouts[m], length, rng.below(1ull << 62), geom, min_sep);
            study.scripts.push_back(std::move(spec));
        }
    }
    std::sort(study.scripts.begin(), study.scripts.end(), [](const ScriptSpec& a, const ScriptSpec& b) {
        return std::tie(a.participant_id, a.method_id) < std::tie(b.participant_id, b.method_id);
    });
    return study;
}

void write_scripts_jsonl(std::ostream& out, const std::vector<ScriptSpec>& scripts) {
    for (const auto& s : scripts) {
        nlohmann::json j;
        j["participant_id"] = s.participant_id;
        j["method_id"] = s.method_id;
        j["sampling_rate_hz"] = s.sampling_rate_hz;
        j["tokens"] = s.tokens;
        out << j.dump() << '\n';
    }
}

std::vector<ScriptSpec> parse_scripts_jsonl(std::istream& in, const std::string& source_name) {
    std::vector<ScriptSpec> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            out.push_back({j.at("participant_id").get<std::string>(), j.at("method_id").get<std::string>(),
                           j.at("sampling_rate_hz").get<double>(),
                           j.at("tokens").get<std::vector<std::size_t>>()});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<ScriptSpec> load_scripts(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open script spec " + path.string());
    return parse_scripts_jsonl(in, path.string());
}

}  // namespace gazepath
