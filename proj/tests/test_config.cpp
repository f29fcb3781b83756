#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cdqkd/config.hpp"
#include "cdqkd/experiment.hpp"
#include "cdqkd/report.hpp"

using namespace cdqkd;
namespace fs = std::filesystem;

namespace {

bool mentions(const ValidationResult& r, const std::string& needle) {
    for (const auto& e : r.errors) {
        if (e.find(needle) != std::string::npos) return true;
    }
    return false;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cdqkd_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("minimal configuration takes defaults") {
    const auto r = validate_config_text(R"({"source": {"mu": 0.41}})");
    REQUIRE(r.ok());
    CHECK(r.config->source.mu == 0.41);
    CHECK(r.config->channel == ChannelParams{});
    CHECK(r.config->seed == 1);
}

TEST_CASE("comments are allowed") {
    const auto r = validate_config_text("{\n// mean photon number\n\"source\": {\"mu\": 0.2}\n}");
    CHECK(r.ok());
}

TEST_CASE("out-of-range values name the field and the bound") {
    auto r = validate_config_text(R"({"source": {"mu": -0.1}})");
    CHECK_FALSE(r.ok());
    CHECK(mentions(r, "source.mu"));
    CHECK(mentions(r, ">= 0"));
    CHECK(mentions(r, "-0.1"));

    r = validate_config_text(R"({"channel": {"eta_detector": 1.5}})");
    CHECK_FALSE(r.ok());
    CHECK(mentions(r, "channel.eta_detector"));
    CHECK(mentions(r, "[0, 1]"));
}

TEST_CASE("every problem is reported at once") {
    const auto r = validate_config_text(
        R"({"source": {"mu": -1}, "channel": {"eta": 2, "bogus": 1}, "mode": "nope"})");
    CHECK_FALSE(r.ok());
    CHECK(r.errors.size() >= 4);
    CHECK(mentions(r, "channel.bogus"));
    CHECK(mentions(r, "mode"));
}

TEST_CASE("wrong JSON types are reported") {
    const auto r = validate_config_text(R"({"source": {"mu": "high"}, "seed": -3})");
    CHECK_FALSE(r.ok());
    CHECK(mentions(r, "source.mu"));
    CHECK(mentions(r, "seed"));
}

TEST_CASE("syntax errors are reported") {
    const auto r = validate_config_text("{\"source\": ");
    CHECK_FALSE(r.ok());
    CHECK(mentions(r, "parse error"));
    CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
}

TEST_CASE("empty mu list is rejected where a sweep needs it") {
    CHECK_FALSE(validate_config_text(R"({"mode": "fig2", "source": {"mu_list": []}})").ok());
    CHECK_FALSE(validate_config_text(R"({"mode": "table3", "source": {"mu_list": []}})").ok());
    CHECK(validate_config_text(R"({"mode": "fig3", "source": {"mu_list": []}})").ok());
}

TEST_CASE("overrides") {
    const auto r = validate_config_text(
        R"({"source": {"mu": 0.1}})",
        {"source.mu=0.3", "mode=table3", "n_pulses=1000", "channel.yield_convention=raw", "eve.kind=pns"});
    REQUIRE(r.ok());
    CHECK(r.config->source.mu == 0.3);
    CHECK(r.config->mode == Mode::Table3);
    CHECK(r.config->channel.convention == YieldConvention::Raw);
    CHECK(r.config->eve.kind == EveKind::Pns);
    CHECK_FALSE(validate_config_text("{}", {"source.mu"}).ok());
    CHECK_FALSE(validate_config_text("{}", {"source.mu.x=1"}).ok());
}

TEST_CASE("simulated modes require an explicit pulse count") {
    for (const char* mode : {"table3", "monte-carlo", "eve-roc"}) {
        const auto r = validate_config_text(std::string(R"({"mode": ")") + mode + "\"}");
        CHECK_FALSE(r.ok());
        CHECK(mentions(r, "n_pulses"));
        CHECK(validate_config_text(std::string(R"({"n_pulses": 10, "mode": ")") + mode + "\"}").ok());
    }
    CHECK(validate_config_text(R"({"mode": "fig4"})").ok());
}

TEST_CASE("link eta0 defaults to the channel transmissivity") {
    const auto r = validate_config_text(R"({"channel": {"eta": 0.5}})");
    REQUIRE(r.ok());
    CHECK(r.config->link.eta0 == 0.5);
}

TEST_CASE("serialization round trip over random configurations") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Mode modes[] = {Mode::AnalyticSweep, Mode::Fig2, Mode::Fig3, Mode::OptimalMu,
                          Mode::Table3, Mode::MonteCarlo, Mode::EveRoc};
    for (int i = 0; i < 200; ++i) {
        ExperimentConfig c;
        c.mode = modes[i % 7];
        c.seed = rng();
        c.n_pulses = 1 + rng() % 100000000;
        c.output_dir = "out dir/" + std::to_string(i);
        c.click_log = i % 2;
        c.source.mu = 2 * u(rng);
        c.mu_list = {u(rng), u(rng)};
        c.channel.eta = u(rng);
        c.channel.eta_detector = u(rng);
        c.channel.p_dark = 1e-3 * u(rng);
        c.channel.e_detector = 0.5 * u(rng);
        c.channel.convention = i % 3 ? YieldConvention::SiftFolded : YieldConvention::Raw;
        c.link.eta0 = 0.01 + 0.99 * u(rng);
        c.link.alpha_db_per_km = u(rng);
        c.distance = {10 * u(rng), 100 + 100 * u(rng), 1 + i};
        c.mu_grid = {0.001 + 0.5 * u(rng), 1 + u(rng), 2 + i};
        c.rates = {0.01 + 0.99 * u(rng), 1 + u(rng)};
        c.eve.kind = static_cast<EveKind>(i % 3);
        c.eve.fraction = u(rng);
        c.eve.forward_transmissivity = u(rng);
        c.eve.forward_single_photon = i % 5 == 0;
        c.monitor.threshold_sigma = 0.1 + 10 * u(rng);
        c.monitor.sidedness = i % 2 ? Sidedness::TwoSided : Sidedness::LowerOnly;
        c.monitor.statistic = static_cast<CoincidenceStatistic>(i % 3);
        c.eve_roc.trials = 1 + i;
        c.eve_roc.thresholds_sigma = {1.5, 2.5 + u(rng)};
        const auto back = validate_config_text(serialize_config(c));
        REQUIRE_MESSAGE(back.ok(), (back.errors.empty() ? "" : back.errors.front()));
        CHECK(*back.config == c);
    }
}

TEST_CASE("csv escaping") {
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
    std::ostringstream os;
    CsvWriter w(os);
    w.row({"x", "y,z"});
    CHECK(os.str() == "x,\"y,z\"\n");
}

TEST_CASE("run_experiment writes data files and a manifest") {
    const auto dir = scratch_dir("fig3");
    ExperimentConfig c;
    c.mode = Mode::Fig3;
    c.output_dir = dir.string();
    c.distance.points = 5;
    const auto out = run_experiment(c);
    REQUIRE(out.exit_code == kExitOk);
    CHECK(fs::exists(dir / "fig3_cd_vs_decoy.csv"));
    CHECK(fs::exists(dir / "manifest.json"));
    std::ifstream in(dir / "manifest.json");
    const auto manifest = nlohmann::json::parse(in);
    CHECK(manifest["mode"] == "fig3");
    CHECK(manifest["version"] == library_version());
    const auto again = validate_config_text(manifest["config"].dump());
    REQUIRE(again.ok());
    CHECK(*again.config == c);
    fs::remove_all(dir);
}

TEST_CASE("unwritable output directory is a runtime error") {
    const auto dir = scratch_dir("blocked");
    fs::create_directories(dir);
    std::ofstream(dir / "file") << "x";
    ExperimentConfig c;
    c.output_dir = (dir / "file" / "sub").string();
    c.distance.points = 2;
    const auto out = run_experiment(c);
    CHECK(out.exit_code == kExitRuntimeError);
    CHECK_FALSE(out.diagnostic.empty());
    fs::remove_all(dir);
}

TEST_CASE("degenerate parameters surface as a runtime error") {
    const auto dir = scratch_dir("degenerate");
    ExperimentConfig c;
    c.mode = Mode::Fig3;
    c.output_dir = dir.string();
    c.channel.p_dark = 0.0;
    c.link.eta0 = 1.0;
    c.link.alpha_db_per_km = 1000.0;
    c.distance = {300, 300, 1};
    const auto out = run_experiment(c);
    CHECK(out.exit_code == kExitRuntimeError);
    fs::remove_all(dir);
}
