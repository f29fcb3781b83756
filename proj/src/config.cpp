#include "cdqkd/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "cdqkd/errors.hpp"

namespace cdqkd {

using nlohmann::json;

std::string to_string(Mode m) {
    switch (m) {
        case Mode::AnalyticSweep: return "analytic-sweep";
        case Mode::Fig2: return "fig2";
        case Mode::Fig3: return "fig3";
        case Mode::OptimalMu: return "optimal-mu";
        case Mode::Table3: return "table3";
        case Mode::MonteCarlo: return "monte-carlo";
        case Mode::EveRoc: return "eve-roc";
    }
    return "unknown";
}

std::optional<Mode> parse_mode(std::string_view s) {
    if (s == "analytic-sweep") return Mode::AnalyticSweep;
    if (s == "fig2") return Mode::Fig2;
    if (s == "fig3") return Mode::Fig3;
    if (s == "optimal-mu" || s == "fig4") return Mode::OptimalMu;
    if (s == "table3") return Mode::Table3;
    if (s == "monte-carlo") return Mode::MonteCarlo;
    if (s == "eve-roc") return Mode::EveRoc;
    return std::nullopt;
}

std::vector<double> DistanceGrid::values() const {
    std::vector<double> v(std::max(points, 0));
    if (points == 1) {
        v[0] = min_km;
    } else if (points > 1) {
        const double step = (max_km - min_km) / (points - 1);
        for (int i = 0; i < points; ++i) v[i] = min_km + step * i;
        v.back() = max_km;
    }
    return v;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

using Check = std::function<std::optional<std::string>(double)>;

Check in_range(double lo, double hi) {
    return [=](double v) -> std::optional<std::string> {
        if (v >= lo && v <= hi) return std::nullopt;
        return "must lie in [" + fmt(lo) + ", " + fmt(hi) + "] (got " + fmt(v) + ")";
    };
}

Check at_least(double lo) {
    return [=](double v) -> std::optional<std::string> {
        if (v >= lo && std::isfinite(v)) return std::nullopt;
        return "must be a finite value >= " + fmt(lo) + " (got " + fmt(v) + ")";
    };
}

Check greater_than(double lo) {
    return [=](double v) -> std::optional<std::string> {
        if (v > lo && std::isfinite(v)) return std::nullopt;
        return "must be a finite value > " + fmt(lo) + " (got " + fmt(v) + ")";
    };
}

/// Reads one JSON object, recording every problem instead of stopping at the first.
class Section {
  public:
    Section(const json& root, std::string path, std::vector<std::string>& errors,
            std::set<std::string> allowed)
        : path_(std::move(path)), errors_(errors) {
        const json* node = &root;
        if (!path_.empty()) {
            const auto it = root.find(path_);
            node = it == root.end() ? nullptr : &*it;
        }
        if (node == nullptr) {
            return;
        }
        if (!node->is_object()) {
            error(path_, "must be an object");
            return;
        }
        obj_ = node;
        for (const auto& [key, _] : node->items()) {
            if (!allowed.count(key)) {
                error(qualified(key), "unknown key");
            }
        }
    }

    bool has(const std::string& key) const { return obj_ != nullptr && obj_->contains(key); }

    void number(const std::string& key, double& out, const Check& check = {}) {
        const json* v = get(key);
        if (v == nullptr) return;
        if (!v->is_number()) {
            error(qualified(key), "must be a number");
            return;
        }
        const double d = v->get<double>();
        if (check) {
            if (auto msg = check(d)) {
                error(qualified(key), *msg);
                return;
            }
        }
        out = d;
    }

    void integer(const std::string& key, int& out, int min_value) {
        const json* v = get(key);
        if (v == nullptr) return;
        if (!v->is_number_integer()) {
            error(qualified(key), "must be an integer");
            return;
        }
        const auto i = v->get<std::int64_t>();
        if (i < min_value || i > 1'000'000'000) {
            error(qualified(key), "must be an integer >= " + std::to_string(min_value) +
                                      " (got " + std::to_string(i) + ")");
            return;
        }
        out = static_cast<int>(i);
    }

    void unsigned64(const std::string& key, std::uint64_t& out, std::uint64_t min_value) {
        const json* v = get(key);
        if (v == nullptr) return;
        if (v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
            const auto u = v->get<std::uint64_t>();
            if (u < min_value) {
                error(qualified(key), "must be >= " + std::to_string(min_value) + " (got " +
                                          std::to_string(u) + ")");
                return;
            }
            out = u;
            return;
        }
        error(qualified(key), "must be a non-negative integer");
    }

    void boolean(const std::string& key, bool& out) {
        const json* v = get(key);
        if (v == nullptr) return;
        if (!v->is_boolean()) {
            error(qualified(key), "must be true or false");
            return;
        }
        out = v->get<bool>();
    }

    template <typename Parser>
    void enumeration(const std::string& key, Parser&& parse) {
        const json* v = get(key);
        if (v == nullptr) return;
        if (!v->is_string()) {
            error(qualified(key), "must be a string");
            return;
        }
        try {
            parse(v->get<std::string>());
        } catch (const std::exception& e) {
            error(qualified(key), e.what());
        }
    }

    void string(const std::string& key, std::string& out) {
        const json* v = get(key);
        if (v == nullptr) return;
        if (!v->is_string() || v->get<std::string>().empty()) {
            error(qualified(key), "must be a non-empty string");
            return;
        }
        out = v->get<std::string>();
    }

    void number_list(const std::string& key, std::vector<double>& out, const Check& check) {
        const json* v = get(key);
        if (v == nullptr) return;
        if (!v->is_array()) {
            error(qualified(key), "must be an array of numbers");
            return;
        }
        std::vector<double> values;
        bool ok = true;
        for (std::size_t i = 0; i < v->size(); ++i) {
            const json& item = (*v)[i];
            const std::string where = qualified(key) + "[" + std::to_string(i) + "]";
            if (!item.is_number()) {
                error(where, "must be a number");
                ok = false;
                continue;
            }
            const double d = item.get<double>();
            if (auto msg = check(d)) {
                error(where, *msg);
                ok = false;
                continue;
            }
            values.push_back(d);
        }
        if (ok) out = std::move(values);
    }

    void error(const std::string& where, const std::string& what) {
        errors_.push_back(where + ": " + what);
    }

    std::string qualified(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

  private:
    const json* get(const std::string& key) const {
        if (obj_ == nullptr) return nullptr;
        const auto it = obj_->find(key);
        return it == obj_->end() ? nullptr : &*it;
    }

    std::string path_;
    std::vector<std::string>& errors_;
    const json* obj_ = nullptr;
};

void apply_override(json& root, const std::string& assignment, std::vector<std::string>& errors) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        errors.push_back("override '" + assignment + "': expected key=value");
        return;
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
        if (part.empty()) {
            errors.push_back("override '" + assignment + "': empty key segment");
            return;
        }
        if (!node->is_object()) {
            errors.push_back("override '" + assignment + "': '" + part + "' is not inside an object");
            return;
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

ExperimentConfig read_config(const json& root, std::vector<std::string>& errors) {
    ExperimentConfig c;
    Section top(root, "", errors,
                {"mode", "seed", "n_pulses", "output_dir", "click_log", "source", "channel", "link",
                 "distance_grid", "mu_grid", "key_rate", "eve", "monitor", "eve_roc"});
    top.enumeration("mode", [&](const std::string& s) {
        const auto m = parse_mode(s);
        if (!m) {
            throw ConfigError("unknown mode '" + s +
                              "' (expected analytic-sweep, fig2, fig3, optimal-mu, table3, "
                              "monte-carlo or eve-roc)");
        }
        c.mode = *m;
    });
    top.unsigned64("seed", c.seed, 0);
    top.unsigned64("n_pulses", c.n_pulses, 1);
    top.string("output_dir", c.output_dir);
    top.boolean("click_log", c.click_log);

    Section source(root, "source", errors, {"mu", "mu_list", "repetition_rate_hz"});
    source.number("mu", c.source.mu, at_least(0.0));
    source.number_list("mu_list", c.mu_list, at_least(0.0));
    source.number("repetition_rate_hz", c.source.repetition_rate_hz, greater_than(0.0));

    Section channel(root, "channel", errors,
                    {"eta", "eta_detector", "p_dark_per_window", "e_detector", "yield_convention"});
    channel.number("eta", c.channel.eta, in_range(0.0, 1.0));
    channel.number("eta_detector", c.channel.eta_detector, in_range(0.0, 1.0));
    channel.number("p_dark_per_window", c.channel.p_dark, in_range(0.0, 1.0));
    channel.number("e_detector", c.channel.e_detector, in_range(0.0, 0.5));
    channel.enumeration("yield_convention",
                        [&](const std::string& s) { c.channel.convention = parse_yield_convention(s); });

    Section link(root, "link", errors, {"eta0", "alpha_db_per_km"});
    c.link.eta0 = c.channel.eta;
    link.number("eta0", c.link.eta0, in_range(0.0, 1.0));
    link.number("alpha_db_per_km", c.link.alpha_db_per_km, at_least(0.0));
    if (!(c.link.eta0 > 0.0)) {
        link.error(link.qualified("eta0"), "must be > 0 (defaults to channel.eta)");
    }

    Section dist(root, "distance_grid", errors, {"min_km", "max_km", "points"});
    dist.number("min_km", c.distance.min_km, at_least(0.0));
    dist.number("max_km", c.distance.max_km, at_least(0.0));
    dist.integer("points", c.distance.points, 1);
    if (c.distance.max_km < c.distance.min_km) {
        dist.error(dist.qualified("max_km"), "must be >= distance_grid.min_km");
    }

    Section grid(root, "mu_grid", errors, {"min", "max", "points"});
    grid.number("min", c.mu_grid.min, [](double v) -> std::optional<std::string> {
        if (v > 0.0 && v <= 2.0) return std::nullopt;
        return "must lie in (0, 2] (got " + fmt(v) + ")";
    });
    grid.number("max", c.mu_grid.max, [](double v) -> std::optional<std::string> {
        if (v > 0.0 && v <= 2.0) return std::nullopt;
        return "must lie in (0, 2] (got " + fmt(v) + ")";
    });
    grid.integer("points", c.mu_grid.points, 1);
    if (c.mu_grid.max < c.mu_grid.min) {
        grid.error(grid.qualified("max"), "must be >= mu_grid.min");
    }

    Section rates(root, "key_rate", errors, {"sift_factor_q", "f_ec"});
    rates.number("sift_factor_q", c.rates.q, [](double v) -> std::optional<std::string> {
        if (v > 0.0 && v <= 1.0) return std::nullopt;
        return "must lie in (0, 1] (got " + fmt(v) + ")";
    });
    rates.number("f_ec", c.rates.f_ec, at_least(1.0));

    Section eve(root, "eve", errors,
                {"kind", "fraction", "forward_transmissivity", "forward_single_photon"});
    eve.enumeration("kind", [&](const std::string& s) { c.eve.kind = parse_eve_kind(s); });
    eve.number("fraction", c.eve.fraction, in_range(0.0, 1.0));
    eve.number("forward_transmissivity", c.eve.forward_transmissivity, in_range(0.0, 1.0));
    eve.boolean("forward_single_photon", c.eve.forward_single_photon);

    Section mon(root, "monitor", errors, {"threshold_sigma", "sidedness", "statistic"});
    mon.number("threshold_sigma", c.monitor.threshold_sigma, greater_than(0.0));
    mon.enumeration("sidedness", [&](const std::string& s) { c.monitor.sidedness = parse_sidedness(s); });
    mon.enumeration("statistic",
                    [&](const std::string& s) { c.monitor.statistic = parse_coincidence_statistic(s); });

    Section roc(root, "eve_roc", errors, {"trials", "thresholds_sigma"});
    roc.integer("trials", c.eve_roc.trials, 1);
    roc.number_list("thresholds_sigma", c.eve_roc.thresholds_sigma, greater_than(0.0));
    if (c.eve_roc.thresholds_sigma.empty()) {
        roc.error(roc.qualified("thresholds_sigma"), "must not be empty");
    }

    const bool needs_mu_list =
        c.mode == Mode::Fig2 || c.mode == Mode::Table3 || c.mode == Mode::AnalyticSweep;
    if (needs_mu_list && c.mu_list.empty()) {
        source.error(source.qualified("mu_list"), "must not be empty in " + to_string(c.mode) + " mode");
    }
    // No integration time is implied anywhere, so simulated modes must say how many pulses.
    const bool needs_pulses =
        c.mode == Mode::Table3 || c.mode == Mode::MonteCarlo || c.mode == Mode::EveRoc;
    if (needs_pulses && !root.contains("n_pulses")) {
        top.error("n_pulses", "is required in " + to_string(c.mode) + " mode");
    }
    return c;
}

}  // namespace

ValidationResult validate_config_text(std::string_view text, const std::vector<std::string>& overrides) {
    ValidationResult result;
    json root;
    try {
        root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        result.errors.push_back(std::string("parse error: ") + e.what());
        return result;
    }
    if (!root.is_object()) {
        result.errors.push_back("top level must be an object");
        return result;
    }
    for (const auto& o : overrides) {
        apply_override(root, o, result.errors);
    }
    ExperimentConfig c = read_config(root, result.errors);
    if (result.errors.empty()) {
        result.config = std::move(c);
    }
    return result;
}

ValidationResult validate_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) {
        ValidationResult r;
        r.errors.push_back(path.string() + ": cannot open file");
        return r;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return validate_config_text(ss.str(), overrides);
}

json to_json(const ExperimentConfig& c) {
    return json{
        {"mode", to_string(c.mode)},
        {"seed", c.seed},
        {"n_pulses", c.n_pulses},
        {"output_dir", c.output_dir},
        {"click_log", c.click_log},
        {"source",
         {{"mu", c.source.mu}, {"mu_list", c.mu_list}, {"repetition_rate_hz", c.source.repetition_rate_hz}}},
        {"channel",
         {{"eta", c.channel.eta},
          {"eta_detector", c.channel.eta_detector},
          {"p_dark_per_window", c.channel.p_dark},
          {"e_detector", c.channel.e_detector},
          {"yield_convention", to_string(c.channel.convention)}}},
        {"link", {{"eta0", c.link.eta0}, {"alpha_db_per_km", c.link.alpha_db_per_km}}},
        {"distance_grid",
         {{"min_km", c.distance.min_km}, {"max_km", c.distance.max_km}, {"points", c.distance.points}}},
        {"mu_grid", {{"min", c.mu_grid.min}, {"max", c.mu_grid.max}, {"points", c.mu_grid.points}}},
        {"key_rate", {{"sift_factor_q", c.rates.q}, {"f_ec", c.rates.f_ec}}},
        {"eve",
         {{"kind", to_string(c.eve.kind)},
          {"fraction", c.eve.fraction},
          {"forward_transmissivity", c.eve.forward_transmissivity},
          {"forward_single_photon", c.eve.forward_single_photon}}},
        {"monitor",
         {{"threshold_sigma", c.monitor.threshold_sigma},
          {"sidedness", to_string(c.monitor.sidedness)},
          {"statistic", to_string(c.monitor.statistic)}}},
        {"eve_roc", {{"trials", c.eve_roc.trials}, {"thresholds_sigma", c.eve_roc.thresholds_sigma}}},
    };
}

std::string serialize_config(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

ExperimentConfig parse_config(std::string_view text) {
    auto r = validate_config_text(text);
    if (!r.ok()) {
        std::string msg;
        for (const auto& e : r.errors) {
            if (!msg.empty()) msg += "; ";
            msg += e;
        }
        throw ConfigError(msg);
    }
    return *r.config;
}

}  // namespace cdqkd
