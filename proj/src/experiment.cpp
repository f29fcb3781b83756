#include "cdqkd/experiment.hpp"

#include <cmath>
#include <fstream>
#include <functional>

#include "cdqkd/errors.hpp"
#include "cdqkd/report.hpp"

namespace cdqkd {

namespace fs = std::filesystem;

std::string library_version() { return CDQKD_VERSION; }

namespace {

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    body(out);
    out.flush();
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

void write_monte_carlo(const ExperimentConfig& c, int threads, const fs::path& dir,
                       std::vector<fs::path>& outputs) {
    std::vector<ClickRecord> log;
    SimOptions opts;
    opts.threads = threads;
    opts.click_log = c.click_log ? &log : nullptr;
    const SimResult sim = run_simulation(c.source, c.channel, c.eve, c.seed, c.n_pulses, opts);
    const PhotonDistribution photons(c.source.mu);
    const auto profile = gain_profile(photons, c.channel);
    const auto expected = expected_coincidences(c.source, c.channel, c.n_pulses);
    const auto decision = abort_test(expected, sim.coincidences, c.monitor);

    const fs::path summary = dir / "monte_carlo.csv";
    write_file(summary, [&](std::ostream& os) {
        CsvWriter w(os);
        w.row({"metric", "simulated", "analytic", "standard_error"});
        const auto count = [](std::uint64_t v) { return std::to_string(v); };
        w.row({"n_pulses", count(sim.n_pulses), "", ""});
        w.row({"q_mu", format_number(sim.q_mu_hat), format_number(profile.q_mu),
               format_number(sim.q_mu_standard_error(c.channel.convention))});
        w.row({"e_mu", format_number(sim.e_mu_hat), format_number(profile.e_mu),
               format_number(sim.e_mu_standard_error())});
        w.row({"sifted_bits", count(sim.sifted_bits), "", ""});
        w.row({"errors", count(sim.errors), "", ""});
        w.row({"attacked_pulses", count(sim.attacked_pulses), "", ""});
        w.row({"two_fold_same", count(sim.coincidences.two_fold_same),
               format_number(expected.expected_2fold_same), ""});
        w.row({"two_fold_conjugate", count(sim.coincidences.two_fold_conjugate),
               format_number(expected.expected_2fold_conjugate), ""});
        w.row({"three_fold", count(sim.coincidences.three_fold), format_number(expected.expected_3fold), ""});
        w.row({"four_fold", count(sim.coincidences.four_fold), "", ""});
        w.row({"coincidences_total", count(sim.coincidences.total()), format_number(expected.expected_total),
               format_number(std::sqrt(expected.variance_total))});
        w.row({"abort_z", format_number(decision.z_score), "", ""});
        w.row({"abort_verdict", to_string(decision.verdict), "", ""});
    });
    outputs.push_back(summary);

    const fs::path patterns = dir / "patterns.csv";
    write_file(patterns, [&](std::ostream& os) {
        CsvWriter w(os);
        w.row({"emitted_photons", "click_mask", "count"});
        for (int n = 0; n <= kTrackedPhotonNumbers; ++n) {
            for (int m = 0; m < kPatternCount; ++m) {
                const std::string label =
                    n == kTrackedPhotonNumbers ? std::to_string(n) + "+" : std::to_string(n);
                w.row({label, std::to_string(m), std::to_string(sim.per_n[n][m])});
            }
        }
    });
    outputs.push_back(patterns);

    if (c.click_log) {
        const fs::path path = dir / "click_log.csv";
        write_file(path, [&](std::ostream& os) { write_click_log(os, log); });
        outputs.push_back(path);
    }
}

}  // namespace

nlohmann::json make_manifest(const ExperimentConfig& config, const std::vector<fs::path>& outputs) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& p : outputs) {
        files.push_back(p.filename().string());
    }
    return {{"tool", "cdqkd"},
            {"version", library_version()},
            {"mode", to_string(config.mode)},
            {"seed", config.seed},
            {"outputs", files},
            {"config", to_json(config)}};
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, int threads) {
    ExperimentOutcome outcome;
    const fs::path dir(config.output_dir);
    try {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
        }
        auto& out = outcome.outputs;
        switch (config.mode) {
            case Mode::AnalyticSweep:
            case Mode::Fig2: {
                const auto rows = fig2_rows(config, threads);
                out.push_back(dir / "fig2_rate_vs_distance.csv");
                write_file(out.back(), [&](std::ostream& os) { write_fig2_csv(os, rows); });
                if (config.mode == Mode::Fig2) break;
                [[fallthrough]];
            }
            case Mode::Fig3: {
                const auto rows = fig3_rows(config, threads);
                out.push_back(dir / "fig3_cd_vs_decoy.csv");
                write_file(out.back(), [&](std::ostream& os) { write_fig3_csv(os, rows); });
                break;
            }
            case Mode::OptimalMu: {
                const auto rows = fig4_rows(config, threads);
                out.push_back(dir / "fig4_optimal_mu.csv");
                write_file(out.back(), [&](std::ostream& os) { write_fig4_csv(os, rows); });
                break;
            }
            case Mode::Table3: {
                const auto rows = table3_report(config.mu_list, config.channel, config.n_pulses,
                                                config.seed, threads);
                out.push_back(dir / "table3_coincidences.csv");
                write_file(out.back(), [&](std::ostream& os) { write_table3_csv(os, rows); });
                break;
            }
            case Mode::MonteCarlo:
                write_monte_carlo(config, threads, dir, out);
                break;
            case Mode::EveRoc: {
                const auto rows = eve_roc_rows(config, threads);
                out.push_back(dir / "eve_roc.csv");
                write_file(out.back(), [&](std::ostream& os) { write_roc_csv(os, rows); });
                break;
            }
        }
        const fs::path manifest = dir / "manifest.json";
        const auto body = make_manifest(config, out).dump(2) + "\n";
        write_file(manifest, [&](std::ostream& os) { os << body; });
        out.push_back(manifest);
    } catch (const DomainError& e) {
        outcome.exit_code = kExitRuntimeError;
        outcome.diagnostic = std::string("degenerate parameters: ") + e.what();
    } catch (const DegenerateError& e) {
        outcome.exit_code = kExitRuntimeError;
        outcome.diagnostic = std::string("degenerate parameters: ") + e.what();
    } catch (const std::exception& e) {
        outcome.exit_code = kExitRuntimeError;
        outcome.diagnostic = e.what();
    }
    return outcome;
}

}  // namespace cdqkd
