#include "cdqkd/report.hpp"

#include <cstdio>
#include <ostream>

#include "cdqkd/parallel.hpp"
#include "cdqkd/rng.hpp"

namespace cdqkd {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) {
        return field;
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os_ << ',';
        os_ << csv_escape(fields[i]);
    }
    os_ << '\n';
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

ChannelParams channel_at(const ExperimentConfig& config, double length_km) {
    ChannelParams ch = config.channel;
    ch.eta = transmissivity_at(config.link, length_km);
    return ch;
}

std::vector<Fig2Row> fig2_rows(const ExperimentConfig& config, int threads) {
    const auto lengths = config.distance.values();
    const std::size_t per_mu = lengths.size();
    std::vector<Fig2Row> rows(config.mu_list.size() * per_mu);
    parallel_for(rows.size(), threads, [&](std::uint64_t i) {
        const double mu = config.mu_list[i / per_mu];
        const double length = lengths[i % per_mu];
        const ChannelParams ch = channel_at(config, length);
        rows[i] = {mu, length, ch.eta_total(), rate_at(RateKind::Cd, mu, ch, config.rates)};
    });
    return rows;
}

std::vector<Fig3Row> fig3_rows(const ExperimentConfig& config, int threads) {
    const auto lengths = config.distance.values();
    std::vector<Fig3Row> rows(lengths.size());
    parallel_for(rows.size(), threads, [&](std::uint64_t i) {
        const ChannelParams ch = channel_at(config, lengths[i]);
        rows[i] = {lengths[i], rate_at(RateKind::Cd, config.source.mu, ch, config.rates),
                   rate_at(RateKind::Decoy, config.source.mu, ch, config.rates)};
    });
    return rows;
}

std::vector<Fig4Row> fig4_rows(const ExperimentConfig& config, int threads) {
    const auto lengths = config.distance.values();
    std::vector<Fig4Row> rows(lengths.size());
    parallel_for(rows.size(), threads, [&](std::uint64_t i) {
        const ChannelParams ch = channel_at(config, lengths[i]);
        rows[i] = {lengths[i], optimal_mu(RateKind::Cd, ch, config.mu_grid, config.rates),
                   optimal_mu(RateKind::Decoy, ch, config.mu_grid, config.rates)};
    });
    return rows;
}

std::vector<RocRow> eve_roc_rows(const ExperimentConfig& config, int threads) {
    EveStrategy none;
    EveStrategy intercept = config.eve;
    intercept.kind = EveKind::InterceptResend;
    EveStrategy pns = config.eve;
    pns.kind = EveKind::Pns;
    const std::vector<EveStrategy> strategies{none, intercept, pns};

    const auto expected = expected_coincidences(config.source, config.channel, config.n_pulses);
    const auto& thresholds = config.eve_roc.thresholds_sigma;
    const int trials = config.eve_roc.trials;

    std::vector<RocRow> rows;
    for (std::size_t s = 0; s < strategies.size(); ++s) {
        std::vector<CoincidenceStats> tallies(trials);
        for (int t = 0; t < trials; ++t) {
            const std::uint64_t seed = mix64(config.seed ^ mix64((s << 32) + static_cast<std::uint64_t>(t)));
            SimOptions opts;
            opts.threads = threads;
            tallies[t] = run_simulation(config.source, config.channel, strategies[s], seed,
                                        config.n_pulses, opts)
                             .coincidences;
        }
        for (double threshold : thresholds) {
            AbortSettings settings = config.monitor;
            settings.threshold_sigma = threshold;
            int aborts = 0;
            for (const auto& tally : tallies) {
                aborts += abort_test(expected, tally, settings).verdict == Verdict::Abort ? 1 : 0;
            }
            rows.push_back({to_string(strategies[s].kind), threshold,
                            static_cast<double>(aborts) / trials, trials});
        }
    }
    return rows;
}

void write_fig2_csv(std::ostream& os, const std::vector<Fig2Row>& rows) {
    CsvWriter w(os);
    w.row({"mu", "length_km", "eta_total", "rate_cd", "secure"});
    for (const auto& r : rows) {
        w.row({format_number(r.mu), format_number(r.length_km), format_number(r.eta_total),
               format_number(r.rate_cd.value), r.rate_cd.secure ? "1" : "0"});
    }
}

void write_fig3_csv(std::ostream& os, const std::vector<Fig3Row>& rows) {
    CsvWriter w(os);
    w.row({"length_km", "rate_cd", "rate_decoy"});
    for (const auto& r : rows) {
        w.row({format_number(r.length_km), format_number(r.rate_cd.value),
               format_number(r.rate_decoy.value)});
    }
}

void write_fig4_csv(std::ostream& os, const std::vector<Fig4Row>& rows) {
    CsvWriter w(os);
    w.row({"length_km", "mu_star_cd", "rate_star_cd", "mu_star_decoy", "rate_star_decoy"});
    for (const auto& r : rows) {
        w.row({format_number(r.length_km), format_number(r.cd.mu_star), format_number(r.cd.rate_star),
               format_number(r.decoy.mu_star), format_number(r.decoy.rate_star)});
    }
}

void write_table3_csv(std::ostream& os, const std::vector<Table3Row>& rows) {
    CsvWriter w(os);
    w.row({"mu", "c_expected", "c_actual", "c_actual_sigma", "deviation_sigma"});
    for (const auto& r : rows) {
        w.row({format_number(r.mu), format_number(r.expected), std::to_string(r.actual),
               format_number(r.actual_sigma), format_number(r.deviation_sigma)});
    }
}

void write_roc_csv(std::ostream& os, const std::vector<RocRow>& rows) {
    CsvWriter w(os);
    w.row({"strategy", "threshold_sigma", "abort_rate", "trials"});
    for (const auto& r : rows) {
        w.row({r.strategy, format_number(r.threshold_sigma), format_number(r.abort_rate),
               std::to_string(r.trials)});
    }
}

}  // namespace cdqkd
