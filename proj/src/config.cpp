#include "msfwi/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "msfwi/errors.hpp"

namespace msfwi {

namespace {

struct RawConfig {
    // section -> list of (key, value) in file order; repeated keys allowed.
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

RawConfig tokenize(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    RawConfig raw;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            raw.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || section.empty())
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected 'key = value' inside a section");
        raw.sections[section].emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return raw;
}

double to_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ConfigError("config key '" + key + "': cannot parse number from '" + value + "'");
    }
}

int to_int(const std::string& key, const std::string& value) {
    const double v = to_double(key, value);
    if (v != std::floor(v)) throw ConfigError("config key '" + key + "': expected an integer");
    return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<double> split_numbers(const std::string& key, const std::string& value) {
    std::istringstream ss(value);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(to_double(key, tok));
    return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
    RawConfig raw = tokenize(path);
    RunConfig cfg;
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        if (p.empty()) return p;
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    for (const auto& [section, entries] : raw.sections) {
        if (section == "paths") {
            for (const auto& [key, value] : entries) {
                if (key == "model_true")
                    cfg.paths.model_true = resolve(value);
                else if (key == "model0")
                    cfg.paths.model0 = resolve(value);
                else if (key == "data")
                    cfg.paths.data = resolve(value);
                else if (key == "output")
                    cfg.paths.output = resolve(value);
                else
                    throw ConfigError("unknown key '" + key + "' in [paths]");
            }
        } else if (section == "grid") {
            for (const auto& [key, value] : entries) {
                if (key == "nz")
                    cfg.grid.nz = to_int(key, value);
                else if (key == "nx")
                    cfg.grid.nx = to_int(key, value);
                else if (key == "h_m")
                    cfg.grid.h_m = to_double(key, value);
                else if (key == "pml_width")
                    cfg.grid.pml_width = to_int(key, value);
                else
                    throw ConfigError("unknown key '" + key + "' in [grid]");
            }
        } else if (section == "model") {
            cfg.model.present = true;
            for (const auto& [key, value] : entries) {
                if (key == "v_top_mps")
                    cfg.model.build.v_top_mps = to_double(key, value);
                else if (key == "v_bottom_mps")
                    cfg.model.build.v_bottom_mps = to_double(key, value);
                else if (key == "smooth_sigma_cells")
                    cfg.model.smooth_sigma_cells = to_double(key, value);
                else if (key == "layer") {
                    const auto nums = split_numbers(key, value);
                    if (nums.size() != 3)
                        throw ConfigError("layer expects 'z_top_m z_bottom_m v_mps'");
                    cfg.model.build.layers.push_back({nums[0], nums[1], nums[2]});
                } else if (key == "lens") {
                    const auto nums = split_numbers(key, value);
                    if (nums.size() != 4)
                        throw ConfigError("lens expects 'z_m x_m radius_m dv_mps'");
                    cfg.model.build.lenses.push_back({nums[0], nums[1], nums[2], nums[3]});
                } else
                    throw ConfigError("unknown key '" + key + "' in [model]");
            }
        } else if (section == "acquisition") {
            for (const auto& [key, value] : entries) {
                if (key == "receiver_depth_m")
                    cfg.acquisition.receiver_depth_m = to_double(key, value);
                else if (key == "receiver_x_start_m")
                    cfg.acquisition.receiver_x_start_m = to_double(key, value);
                else if (key == "receiver_x_end_m")
                    cfg.acquisition.receiver_x_end_m = to_double(key, value);
                else if (key == "receiver_x_step_m")
                    cfg.acquisition.receiver_x_step_m = to_double(key, value);
                else if (key == "receiver") {
                    const auto nums = split_numbers(key, value);
                    if (nums.size() != 2) throw ConfigError("receiver expects 'z_m x_m'");
                    cfg.acquisition.explicit_receivers.emplace_back(nums[0], nums[1]);
                } else if (key == "freq_min_hz")
                    cfg.acquisition.freq_min_hz = to_double(key, value);
                else if (key == "freq_max_hz")
                    cfg.acquisition.freq_max_hz = to_double(key, value);
                else if (key == "freq_step_hz")
                    cfg.acquisition.freq_step_hz = to_double(key, value);
                else if (key == "record_duration_s")
                    cfg.acquisition.record_duration_s = to_double(key, value);
                else if (key == "dt_s")
                    cfg.acquisition.dt_s = to_double(key, value);
                else
                    throw ConfigError("unknown key '" + key + "' in [acquisition]");
            }
        } else if (section == "synthesis") {
            for (const auto& [key, value] : entries) {
                if (key == "event") {
                    const auto nums = split_numbers(key, value);
                    if (nums.size() != 4)
                        throw ConfigError("event expects 'z_m x_m f_central_hz t_central_s'");
                    cfg.synthesis.events.push_back({nums[0], nums[1], nums[2], nums[3]});
                } else if (key == "snr_db") {
                    if (value != "none") cfg.synthesis.snr_db = to_double(key, value);
                } else if (key == "seed")
                    cfg.synthesis.seed = static_cast<std::uint64_t>(to_double(key, value));
                else
                    throw ConfigError("unknown key '" + key + "' in [synthesis]");
            }
        } else if (section == "inversion") {
            for (const auto& [key, value] : entries) {
                if (key == "lambda")
                    cfg.inversion.lambda = value == "auto" ? 0.0 : to_double(key, value);
                else if (key == "gamma_over_lambda")
                    cfg.inversion.gamma_over_lambda = to_double(key, value);
                else if (key == "n_inner")
                    cfg.inversion.n_inner = to_int(key, value);
                else if (key == "n_outer")
                    cfg.inversion.n_outer = to_int(key, value);
                else if (key == "update_model")
                    cfg.inversion.update_model = to_bool(key, value);
                else if (key == "peak_threshold")
                    cfg.inversion.peak_threshold = to_double(key, value);
                else if (key == "peak_min_distance_m")
                    cfg.inversion.peak_min_distance_m = to_double(key, value);
                else if (key == "tv_weight")
                    cfg.inversion.tv_weight = to_double(key, value);
                else if (key == "tol_source_change")
                    cfg.inversion.tol_source_change = to_double(key, value);
                else if (key == "tol_data_residual")
                    cfg.inversion.tol_data_residual = to_double(key, value);
                else if (key == "v_min_mps")
                    cfg.inversion.v_min_mps = to_double(key, value);
                else if (key == "v_max_mps")
                    cfg.inversion.v_max_mps = to_double(key, value);
                else
                    throw ConfigError("unknown key '" + key + "' in [inversion]");
            }
        } else {
            throw ConfigError("unknown config section [" + section + "]");
        }
    }

    if (cfg.grid.nz < 3 || cfg.grid.nx < 3 || !(cfg.grid.h_m > 0.0))
        throw ConfigError("[grid] must set nz >= 3, nx >= 3 and h_m > 0");
    if (!(cfg.acquisition.freq_step_hz > 0.0))
        throw ConfigError("[acquisition] freq_step_hz must be positive");
    if (!(cfg.acquisition.freq_min_hz > 0.0) ||
        cfg.acquisition.freq_max_hz < cfg.acquisition.freq_min_hz)
        throw ConfigError("[acquisition] needs 0 < freq_min_hz <= freq_max_hz");
    if (!(cfg.inversion.peak_threshold > 0.0 && cfg.inversion.peak_threshold < 1.0))
        throw ConfigError("[inversion] peak_threshold must lie in (0, 1)");
    if (cfg.inversion.n_inner < 1 || cfg.inversion.n_outer < 1)
        throw ConfigError("[inversion] n_inner and n_outer must be >= 1");
    if (!(cfg.inversion.gamma_over_lambda > 0.0))
        throw ConfigError("[inversion] gamma_over_lambda must be positive");
    return cfg;
}

std::vector<double> RunConfig::band_omegas() const {
    std::vector<double> out;
    for (double f = acquisition.freq_min_hz; f <= acquisition.freq_max_hz + 1e-9;
         f += acquisition.freq_step_hz)
        out.push_back(2.0 * M_PI * f);
    if (out.empty()) throw ConfigError("empty frequency band");
    return out;
}

std::vector<std::pair<int, int>> RunConfig::resolve_receivers(const Grid& g) const {
    std::vector<std::pair<int, int>> cells;
    if (acquisition.receiver_x_step_m > 0.0 &&
        acquisition.receiver_x_end_m >= acquisition.receiver_x_start_m) {
        for (double x = acquisition.receiver_x_start_m;
             x <= acquisition.receiver_x_end_m + 1e-9; x += acquisition.receiver_x_step_m)
            cells.push_back(locate_cell(g, acquisition.receiver_depth_m, x));
    }
    for (const auto& [z, x] : acquisition.explicit_receivers)
        cells.push_back(locate_cell(g, z, x));
    if (cells.empty()) throw ConfigError("[acquisition] defines no receivers");
    return cells;
}

Grid RunConfig::make_grid() const { return Grid(grid.nz, grid.nx, grid.h_m, grid.pml_width); }

Acquisition RunConfig::make_acquisition(const Grid& g) const {
    return Acquisition(resolve_receivers(g), band_omegas(), g, acquisition.record_duration_s);
}

}  // namespace msfwi
