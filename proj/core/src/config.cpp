#include "gazepath/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

namespace gazepath {

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        const auto comma = value.find(',', start);
        const auto item = trim(value.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(const std::string& text) {
    T value{};
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) throw ParseError("not a number: '" + text + "'");
    return value;
}

bool parse_bool(const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ParseError("not a boolean: '" + text + "'");
}

// Shortest %g form that reads back to the same double.
std::string fmt(double v) {
    char buf[40];
    for (int precision = 6; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

template <typename T>
std::string join_values(const std::vector<T>& values, const std::function<std::string(const T&)>& render) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += render(values[i]);
    }
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

std::map<std::string, Setter> setters(const std::filesystem::path& base) {
    std::map<std::string, Setter> table;
    auto path_of = [base](const std::string& v) {
        std::filesystem::path p(v);
        return p.is_absolute() ? p : base / p;
    };

    table["paths.corpus"] = [=](auto& c, auto& v) { c.corpus = path_of(v); };
    table["paths.scripts"] = [=](auto& c, auto& v) { c.scripts = path_of(v); };
    table["paths.output"] = [=](auto& c, auto& v) { c.output = path_of(v); };
    table["paths.gaze"] = [=](auto& c, auto& v) {
        c.gaze.clear();
        for (const auto& item : split_list(v)) c.gaze.push_back(path_of(item));
    };

    table["filter.smoothing_window_samples"] = [](auto& c, auto& v) { c.filter.smoothing_window_samples = parse_number<int>(v); };
    table["filter.velocity_threshold_deg_s"] = [](auto& c, auto& v) { c.filter.velocity_threshold_deg_s = parse_number<double>(v); };
    table["filter.min_fixation_duration_ms"] = [](auto& c, auto& v) { c.filter.min_fixation_duration_ms = parse_number<double>(v); };
    table["filter.merge_max_gap_ms"] = [](auto& c, auto& v) { c.filter.merge_max_gap_ms = parse_number<double>(v); };
    table["filter.merge_max_dist_deg"] = [](auto& c, auto& v) { c.filter.merge_max_dist_deg = parse_number<double>(v); };

    table["pane.origin_x_px"] = [](auto& c, auto& v) { c.pane.origin_x_px = parse_number<double>(v); };
    table["pane.origin_y_px"] = [](auto& c, auto& v) { c.pane.origin_y_px = parse_number<double>(v); };
    table["pane.cell_w_px"] = [](auto& c, auto& v) { c.pane.cell_w_px = parse_number<double>(v); };
    table["pane.cell_h_px"] = [](auto& c, auto& v) { c.pane.cell_h_px = parse_number<double>(v); };
    table["pane.tab_width"] = [](auto& c, auto& v) { c.pane.tab_width = parse_number<int>(v); };

    table["screen.width_px"] = [](auto& c, auto& v) { c.screen.width_px = parse_number<int>(v); };
    table["screen.height_px"] = [](auto& c, auto& v) { c.screen.height_px = parse_number<int>(v); };
    table["screen.width_mm"] = [](auto& c, auto& v) { c.screen.width_mm = parse_number<double>(v); };
    table["screen.height_mm"] = [](auto& c, auto& v) { c.screen.height_mm = parse_number<double>(v); };
    table["screen.viewer_distance_mm"] = [](auto& c, auto& v) { c.screen.viewer_distance_mm = parse_number<double>(v); };

    table["scanpath.tolerance_deg"] = [](auto& c, auto& v) { c.scanpath.tolerance_deg = parse_number<double>(v); };
    table["scanpath.include_comments"] = [](auto& c, auto& v) { c.scanpath.include_comments = parse_bool(v); };

    table["experiment.n_values"] = [](auto& c, auto& v) {
        c.n_values.clear();
        for (const auto& item : split_list(v)) c.n_values.push_back(parse_number<std::size_t>(item));
    };
    table["experiment.split_kinds"] = [](auto& c, auto& v) {
        c.split_kinds.clear();
        for (const auto& item : split_list(v)) c.split_kinds.push_back(split_kind_from_string(item));
    };
    table["experiment.prompt_n"] = [](auto& c, auto& v) {
        if (v == "full") {
            c.prompt_n.reset();
        } else {
            c.prompt_n = parse_number<std::size_t>(v);
        }
    };

    table["synth.sampling_rate_hz"] = [](auto& c, auto& v) { c.synth.sampling_rate_hz = parse_number<double>(v); };
    table["synth.dwell_ms_per_token"] = [](auto& c, auto& v) { c.synth.dwell_ms_per_token = parse_number<double>(v); };
    table["synth.saccade_ms"] = [](auto& c, auto& v) { c.synth.saccade_ms = parse_number<double>(v); };
    table["synth.noise_sd_norm"] = [](auto& c, auto& v) { c.synth.noise_sd_norm = parse_number<double>(v); };
    table["synth.seed"] = [](auto& c, auto& v) { c.synth.seed = parse_number<std::uint64_t>(v); };

    table["study.participants"] = [](auto& c, auto& v) { c.study.participants = parse_number<std::size_t>(v); };
    table["study.methods"] = [](auto& c, auto& v) { c.study.methods = parse_number<std::size_t>(v); };
    table["study.methods_per_participant"] = [](auto& c, auto& v) { c.study.methods_per_participant = parse_number<std::size_t>(v); };
    table["study.min_script_length"] = [](auto& c, auto& v) { c.study.min_script_length = parse_number<std::size_t>(v); };
    table["study.max_script_length"] = [](auto& c, auto& v) { c.study.max_script_length = parse_number<std::size_t>(v); };
    table["study.seed"] = [](auto& c, auto& v) { c.study.seed = parse_number<std::uint64_t>(v); };
    table["study.sampling_rates"] = [](auto& c, auto& v) {
        c.study.sampling_rates.clear();
        for (const auto& item : split_list(v)) c.study.sampling_rates.push_back(parse_number<double>(item));
    };
    return table;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir,
                              const std::string& source_name) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError(source_name + ": " + e.what());
    }

    ExperimentConfig cfg;
    cfg.corpus = base_dir / cfg.corpus;
    cfg.scripts = base_dir / cfg.scripts;
    cfg.output = base_dir / cfg.output;
    for (auto& g : cfg.gaze) g = base_dir / g;

    const auto table = setters(base_dir);
    for (const auto& [section, entries] : tree) {
        if (entries.empty()) {
            throw ParseError(source_name + ": key '" + section + "' outside any section");
        }
        for (const auto& [key, node] : entries) {
            const std::string name = section + "." + key;
            const auto it = table.find(name);
            if (it == table.end()) throw ParseError(source_name + ": unknown key '" + name + "'");
            try {
                it->second(cfg, trim(node.get_value<std::string>()));
            } catch (const Error& e) {
                throw ParseError(source_name + ": " + name + ": " + e.what());
            }
        }
    }
    validate_config(cfg);
    return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment, const std::filesystem::path& base_dir) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ParseError("override '" + assignment + "' is not section.key=value");
    const auto name = trim(assignment.substr(0, eq));
    const auto table = setters(base_dir);
    const auto it = table.find(name);
    if (it == table.end()) throw ParseError("unknown key '" + name + "'");
    try {
        it->second(cfg, trim(assignment.substr(eq + 1)));
    } catch (const Error& e) {
        throw ParseError(name + ": " + e.what());
    }
    validate_config(cfg);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    return parse_config(in, path.parent_path(), path.string());
}

void validate_config(const ExperimentConfig& cfg) {
    validate_filter_config(cfg.filter);
    validate_pane(cfg.pane);
    try {
        validate_geometry(cfg.screen);
    } catch (const ValidationError& e) {
        throw ParameterError(e.what());
    }
    if (cfg.scanpath.tolerance_deg < 0) throw ParameterError("scanpath.tolerance_deg must be >= 0");
    if (cfg.n_values.empty()) throw ParameterError("experiment.n_values must not be empty");
    for (const auto n : cfg.n_values) {
        if (n == 0) throw ParameterError("experiment.n_values entries must be >= 1");
    }
    if (cfg.prompt_n && *cfg.prompt_n == 0) throw ParameterError("experiment.prompt_n must be >= 1");
    if (cfg.synth.dwell_ms_per_token < FilterConfig{}.min_fixation_duration_ms) {
        throw ParameterError("synth.dwell_ms_per_token must be >= 100 ms");
    }
    if (cfg.synth.noise_sd_norm < 0) throw ParameterError("synth.noise_sd_norm must be >= 0");
}

void write_config(std::ostream& out, const ExperimentConfig& cfg, const std::filesystem::path& base_dir) {
    const auto rel = [&](const std::filesystem::path& p) {
        return p.lexically_relative(base_dir).generic_string();
    };
    out << "[paths]\n"
        << "corpus = " << rel(cfg.corpus) << '\n'
        << "gaze = "
        << join_values<std::filesystem::path>(cfg.gaze, [&](const auto& p) { return rel(p); }) << '\n'
        << "scripts = " << rel(cfg.scripts) << '\n'
        << "output = " << rel(cfg.output) << "\n\n";
    out << "[filter]\n"
        << "smoothing_window_samples = " << cfg.filter.smoothing_window_samples << '\n'
        << "velocity_threshold_deg_s = " << fmt(cfg.filter.velocity_threshold_deg_s) << '\n'
        << "min_fixation_duration_ms = " << fmt(cfg.filter.min_fixation_duration_ms) << '\n'
        << "merge_max_gap_ms = " << fmt(cfg.filter.merge_max_gap_ms) << '\n'
        << "merge_max_dist_deg = " << fmt(cfg.filter.merge_max_dist_deg) << "\n\n";
    out << "[pane]\n"
        << "origin_x_px = " << fmt(cfg.pane.origin_x_px) << '\n'
        << "origin_y_px = " << fmt(cfg.pane.origin_y_px) << '\n'
        << "cell_w_px = " << fmt(cfg.pane.cell_w_px) << '\n'
        << "cell_h_px = " << fmt(cfg.pane.cell_h_px) << '\n'
        << "tab_width = " << cfg.pane.tab_width << "\n\n";
    out << "[screen]\n"
        << "width_px = " << cfg.screen.width_px << '\n'
        << "height_px = " << cfg.screen.height_px << '\n'
        << "width_mm = " << fmt(cfg.screen.width_mm) << '\n'
        << "height_mm = " << fmt(cfg.screen.height_mm) << '\n'
        << "viewer_distance_mm = " << fmt(cfg.screen.viewer_distance_mm) << "\n\n";
    out << "[scanpath]\n"
        << "tolerance_deg = " << fmt(cfg.scanpath.tolerance_deg) << '\n'
        << "include_comments = " << (cfg.scanpath.include_comments ? "true" : "false") << "\n\n";
    out << "[experiment]\n"
        << "n_values = "
        << join_values<std::size_t>(cfg.n_values, [](const auto& n) { return std::to_string(n); }) << '\n'
        << "split_kinds = "
        << join_values<SplitKind>(cfg.split_kinds, [](const auto& k) { return std::string(to_string(k)); })
        << '\n'
        << "prompt_n = " << (cfg.prompt_n ? std::to_string(*cfg.prompt_n) : std::string("full")) << "\n\n";
    out << "[synth]\n"
        << "sampling_rate_hz = " << fmt(cfg.synth.sampling_rate_hz) << '\n'
        << "dwell_ms_per_token = " << fmt(cfg.synth.dwell_ms_per_token) << '\n'
        << "saccade_ms = " << fmt(cfg.synth.saccade_ms) << '\n'
        << "noise_sd_norm = " << fmt(cfg.synth.noise_sd_norm) << '\n'
        << "seed = " << cfg.synth.seed << "\n\n";
    out << "[study]\n"
        << "participants = " << cfg.study.participants << '\n'
        << "methods = " << cfg.study.methods << '\n'
        << "methods_per_participant = " << cfg.study.methods_per_participant << '\n'
        << "sampling_rates = "
        << join_values<double>(cfg.study.sampling_rates, [](const auto& r) { return fmt(r); }) << '\n'
        << "min_script_length = " << cfg.study.min_script_length << '\n'
        << "max_script_length = " << cfg.study.max_script_length << '\n'
        << "seed = " << cfg.study.seed << '\n';
}

}  // namespace gazepath
