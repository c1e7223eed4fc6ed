#include "phaseop/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

namespace phaseop {

namespace {

constexpr std::array<std::pair<Estimator, std::string_view>, 8> kLabels{{
    {Estimator::psi51, "psi51"},
    {Estimator::psi52, "psi52"},
    {Estimator::psi53, "psi53"},
    {Estimator::psi54, "psi54"},
    {Estimator::psi55, "psi55"},
    {Estimator::music, "music"},
    {Estimator::esprit, "esprit"},
    {Estimator::bartlett, "bartlett"},
}};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view value) {
    std::vector<std::string_view> items;
    value = trim(value);
    if (value.empty()) {
        return items;
    }
    std::size_t start = 0;
    while (true) {
        const auto comma = value.find(',', start);
        items.push_back(trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                  : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return items;
}

double parse_real(std::string_view key, std::string_view text, std::size_t line) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || std::isnan(v)) {
        throw ParseError(std::string(key) + ": expected a number, got '" + std::string(text) + "'", line);
    }
    return v;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text, std::size_t line) {
    text = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'",
                         line);
    }
    return v;
}

bool parse_bool(std::string_view key, std::string_view text, std::size_t line) {
    text = trim(text);
    for (std::string_view t : {"true", "yes", "on", "1"}) {
        if (text == t) {
            return true;
        }
    }
    for (std::string_view f : {"false", "no", "off", "0"}) {
        if (text == f) {
            return false;
        }
    }
    throw ParseError(std::string(key) + ": expected true/false, got '" + std::string(text) + "'", line);
}

std::vector<double> parse_real_list(std::string_view key, std::string_view text, std::size_t line) {
    std::vector<double> out;
    for (auto item : split_list(text)) {
        out.push_back(parse_real(key, item, line));
    }
    return out;
}

// Either a comma list or an inclusive range "start:stop:step".
std::vector<double> parse_sweep(std::string_view key, std::string_view text, std::size_t line) {
    text = trim(text);
    if (text.find(':') == std::string_view::npos) {
        return parse_real_list(key, text, line);
    }
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
        const auto colon = text.find(':', start);
        parts.push_back(parse_real(key, text.substr(start, colon == std::string_view::npos ? std::string_view::npos
                                                                                            : colon - start),
                                   line));
        if (colon == std::string_view::npos) {
            break;
        }
        start = colon + 1;
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0] || !std::isfinite(parts[1])) {
        throw ParseError(std::string(key) + ": range must be start:stop:step with step > 0 and stop >= start", line);
    }
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
    }
    return out;
}

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_reals(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? "," : "") + fmt_real(v[i]);
    }
    return out;
}

} // namespace

std::string_view estimator_label(Estimator e) {
    for (const auto& [est, label] : kLabels) {
        if (est == e) {
            return label;
        }
    }
    return "unknown";
}

std::optional<Estimator> parse_estimator(std::string_view label) {
    for (const auto& [est, name] : kLabels) {
        if (name == label) {
            return est;
        }
    }
    return std::nullopt;
}

const std::vector<Estimator>& all_estimators() {
    static const std::vector<Estimator> all = [] {
        std::vector<Estimator> v;
        for (const auto& [est, label] : kLabels) {
            v.push_back(est);
        }
        return v;
    }();
    return all;
}

bool is_psi(Estimator e) { return static_cast<int>(e) <= static_cast<int>(Estimator::psi55); }

std::size_t psi_index(Estimator e) {
    if (!is_psi(e)) {
        throw InvalidInput("not a propagator estimator");
    }
    return static_cast<std::size_t>(e) + 1;
}

std::vector<double> ConfigSettings::default_sweep() {
    std::vector<double> v;
    for (int s = 0; s <= 20; ++s) {
        v.push_back(s);
    }
    return v;
}

void ConfigSettings::set(std::string_view key, std::string_view value, std::size_t line) {
    key = trim(key);
    value = trim(value);
    if (key == "n_sensors") {
        n_sensors = parse_unsigned(key, value, line);
    } else if (key == "spacing_ratio") {
        spacing_ratio = parse_real(key, value, line);
    } else if (key == "carrier_hz") {
        carrier_hz = parse_real(key, value, line);
    } else if (key == "angles_deg") {
        angles_deg = parse_real_list(key, value, line);
    } else if (key == "powers") {
        powers = parse_real_list(key, value, line);
    } else if (key == "snapshots") {
        snapshots = parse_unsigned(key, value, line);
    } else if (key == "snr_db") {
        snr_db = parse_real(key, value, line);
    } else if (key == "seed") {
        seed = parse_unsigned(key, value, line);
    } else if (key == "source_correlation") {
        source_correlation = parse_real(key, value, line);
    } else if (key == "grid_step_deg") {
        grid_step_deg = parse_real(key, value, line);
    } else if (key == "trials") {
        trials = parse_unsigned(key, value, line);
    } else if (key == "snr_sweep_db") {
        snr_sweep_db = parse_sweep(key, value, line);
    } else if (key == "estimators") {
        estimators.clear();
        for (auto item : split_list(value)) {
            if (item == "all") {
                estimators = all_estimators();
                continue;
            }
            const auto est = parse_estimator(item);
            if (!est) {
                throw ParseError("estimators: unknown label '" + std::string(item) +
                                     "' (expected psi51..psi55, music, esprit, bartlett)",
                                 line);
            }
            estimators.push_back(*est);
        }
    } else if (key == "pi_k_mode") {
        if (value == "first") {
            pi_k_mode = KMode::first;
        } else if (value == "average") {
            pi_k_mode = KMode::average;
        } else {
            throw ParseError("pi_k_mode: expected 'first' or 'average', got '" + std::string(value) + "'", line);
        }
    } else if (key == "forward_backward") {
        forward_backward = parse_bool(key, value, line);
    } else if (key == "resolve_threshold_deg") {
        resolve_threshold_deg = parse_real(key, value, line);
    } else if (key == "output_dir") {
        output_dir = std::string(value);
    } else {
        throw ParseError("unknown key '" + std::string(key) + "'", line);
    }
}

void ConfigSettings::apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ParseError("override '" + std::string(assignment) + "' is not of the form key=value", 0);
    }
    set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

ConfigSettings parse_settings(std::istream& in, ConfigSettings base) {
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("expected 'key = value'", line_no);
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ParseError("missing key before '='", line_no);
        }
        base.set(key, line.substr(eq + 1), line_no);
    }
    return base;
}

ExperimentConfig build_config(const ConfigSettings& s) {
    if (s.angles_deg.empty()) {
        throw ValidationError("angles_deg is required (at least one source)");
    }
    const std::size_t p = s.angles_deg.size();
    if (s.n_sensors <= 4 * p) {
        throw ValidationError("n_sensors must exceed 4*p_sources (got n_sensors=" + std::to_string(s.n_sensors) +
                              ", p_sources=" + std::to_string(p) + ")");
    }
    if (!s.powers.empty() && s.powers.size() != p) {
        throw ValidationError("powers must list one value per source (" + std::to_string(p) + ")");
    }
    if (s.snapshots < 1) {
        throw ValidationError("snapshots must be at least 1");
    }
    if (s.trials < 1) {
        throw ValidationError("trials must be at least 1");
    }
    if (!(s.grid_step_deg > 0.0 && s.grid_step_deg <= 5.0)) {
        throw ValidationError("grid_step_deg must lie in (0, 5]");
    }
    if (s.estimators.empty()) {
        throw ValidationError("estimators must name at least one estimator");
    }
    if (s.snr_sweep_db.empty()) {
        throw ValidationError("snr_sweep_db must contain at least one value");
    }
    for (double snr : s.snr_sweep_db) {
        if (std::isinf(snr) && snr < 0.0) {
            throw ValidationError("snr_sweep_db values must be finite or +inf");
        }
    }
    if (!(s.resolve_threshold_deg > 0.0)) {
        throw ValidationError("resolve_threshold_deg must be positive");
    }
    if (!(s.spacing_ratio > 0.0) || !std::isfinite(s.spacing_ratio)) {
        throw ValidationError("spacing_ratio must be positive");
    }

    try {
        auto array = ArrayConfig::from_spacing_ratio(s.n_sensors, s.spacing_ratio, s.carrier_hz);
        auto sources = s.powers.empty() ? SourceSet(s.angles_deg) : SourceSet(s.angles_deg, s.powers);
        Scenario scenario{std::move(array), std::move(sources), s.snapshots, s.snr_db, s.seed, s.source_correlation};
        scenario.validate();

        std::vector<Estimator> estimators;
        for (Estimator e : all_estimators()) {
            if (std::find(s.estimators.begin(), s.estimators.end(), e) != s.estimators.end()) {
                estimators.push_back(e);
            }
        }
        return ExperimentConfig{std::move(scenario),  s.grid_step_deg,    s.trials,
                                s.snr_sweep_db,       std::move(estimators), s.pi_k_mode,
                                s.forward_backward,   s.resolve_threshold_deg, s.output_dir};
    } catch (const InvalidInput& e) {
        throw ValidationError(e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open config file '" + path.string() + "'", 0);
    }
    ConfigSettings settings = parse_settings(in);
    for (const auto& o : overrides) {
        settings.apply_override(o);
    }
    return build_config(settings);
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream out;
    const auto& arr = scenario.array;
    out << "n_sensors=" << arr.n_sensors() << '\n'
        << "spacing_ratio=" << fmt_real(arr.spacing_ratio()) << '\n'
        << "carrier_hz=" << fmt_real(arr.carrier_hz()) << '\n'
        << "angles_deg=" << join_reals(scenario.sources.angles_deg()) << '\n'
        << "powers=" << join_reals(scenario.sources.powers()) << '\n'
        << "snapshots=" << scenario.snapshots << '\n'
        << "snr_db=" << fmt_real(scenario.snr_db) << '\n'
        << "seed=" << scenario.seed << '\n'
        << "source_correlation=" << fmt_real(scenario.source_correlation) << '\n'
        << "grid_step_deg=" << fmt_real(grid_step_deg) << '\n'
        << "trials=" << trials << '\n'
        << "snr_sweep_db=" << join_reals(snr_sweep_db) << '\n'
        << "estimators=";
    for (std::size_t i = 0; i < estimators.size(); ++i) {
        out << (i ? "," : "") << estimator_label(estimators[i]);
    }
    out << '\n'
        << "pi_k_mode=" << (pi_k_mode == KMode::first ? "first" : "average") << '\n'
        << "forward_backward=" << (forward_backward ? "true" : "false") << '\n'
        << "resolve_threshold_deg=" << fmt_real(resolve_threshold_deg) << '\n';
    return out.str();
}

std::string ExperimentConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_reference() {
    return R"(Config file: one `key = value` per line, `#` starts a comment, lists are comma-separated.
Keys (default in brackets):
  n_sensors              sensor count N, must exceed 4 * number of sources [18]
  spacing_ratio          sensor spacing d / wavelength [0.5]
  carrier_hz             carrier frequency in Hz [1e9]
  angles_deg             source directions in degrees, open interval (-90, 90) [required]
  powers                 linear source powers, one per source [1 for each source]
  snapshots              snapshot count K [200]
  snr_db                 per-sensor SNR in dB, `inf` disables noise [5]
  seed                   64-bit base seed [1]
  source_correlation     pairwise waveform correlation in [0, 1], 1 = coherent [0]
  grid_step_deg          angular grid step in (0, 5] [0.1]
  trials                 Monte-Carlo runs per point [100]
  snr_sweep_db           SNR points for `rmse`, list or start:stop:step [0:20:1]
  estimators             psi51..psi55, music, esprit, bartlett, or `all` [all]
  pi_k_mode              auxiliary block choice, first | average [first]
  forward_backward       forward-backward averaging of the covariance [false]
  resolve_threshold_deg  max |error| for a trial to count as resolved [5]
  output_dir             report directory [out, or $PHASEOP_OUTPUT_DIR]
)";
}

} // namespace phaseop
