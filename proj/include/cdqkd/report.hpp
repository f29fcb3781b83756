#pragma once

// Sweep generators behind the CLI modes and the CSV writer they share.

#include <iosfwd>
#include <string>
#include <vector>

#include "cdqkd/config.hpp"
#include "cdqkd/monitor.hpp"

namespace cdqkd {

/// RFC 4180 style writer: fields containing a comma, quote or line break
/// are quoted, embedded quotes doubled, records end in "\n".
class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    void row(const std::vector<std::string>& fields);

  private:
    std::ostream& os_;
};

std::string csv_escape(const std::string& field);
/// Shortest-stable decimal form used in every CSV ("%.12g").
std::string format_number(double v);

/// Channel of the configuration with eta replaced by the link budget at length_km.
ChannelParams channel_at(const ExperimentConfig& config, double length_km);

struct Fig2Row {
    double mu;
    double length_km;
    double eta_total;
    Rate rate_cd;
};

struct Fig3Row {
    double length_km;
    Rate rate_cd;
    Rate rate_decoy;
};

struct Fig4Row {
    double length_km;
    OptimalMu cd;
    OptimalMu decoy;
};

struct RocRow {
    std::string strategy;
    double threshold_sigma;
    double abort_rate;
    int trials;
};

std::vector<Fig2Row> fig2_rows(const ExperimentConfig& config, int threads = 1);
std::vector<Fig3Row> fig3_rows(const ExperimentConfig& config, int threads = 1);
std::vector<Fig4Row> fig4_rows(const ExperimentConfig& config, int threads = 1);
/// Abort rate against threshold for no eavesdropper, intercept-resend and
/// photon-number splitting, each over `eve_roc.trials` simulated runs.
std::vector<RocRow> eve_roc_rows(const ExperimentConfig& config, int threads = 1);

void write_fig2_csv(std::ostream& os, const std::vector<Fig2Row>& rows);
void write_fig3_csv(std::ostream& os, const std::vector<Fig3Row>& rows);
void write_fig4_csv(std::ostream& os, const std::vector<Fig4Row>& rows);
void write_table3_csv(std::ostream& os, const std::vector<Table3Row>& rows);
void write_roc_csv(std::ostream& os, const std::vector<RocRow>& rows);

}  // namespace cdqkd
