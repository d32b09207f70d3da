#ifndef REPLAY_HARNESS_REPORT_H_
#define REPLAY_HARNESS_REPORT_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "replay/harness/experiment.h"

namespace replay::harness {

// Columns: model,game,steps,loss,accuracy,econ_value. Reals use %.17g so a
// reader recovers the exact doubles.
void WriteMetricCsv(std::ostream& out, const std::vector<MetricRow>& rows);
// Throws ParseError.
std::vector<MetricRow> ReadMetricCsv(std::istream& in,
                                     const std::string& source);

// Columns: k,encoding,model,steps,loss,accuracy,econ_value.
void WriteSweepCsv(std::ostream& out, const std::vector<SweepRow>& rows);

// Config echo, seeds, fitted parameters, audits and per-cell errors.
nlohmann::json Manifest(const EvalReport& report,
                        const ExperimentConfig& config,
                        const std::string& command);

// Writes games.csv, aggregate.csv and manifest.json (prefixed by
// `prefix`) into `dir`, creating it. Throws Error on I/O failure.
void EmitReport(const EvalReport& report, const ExperimentConfig& config,
                const std::filesystem::path& dir,
                const std::string& prefix = "");
// sweep.csv and sweep_manifest.json.
void EmitSweep(const SweepReport& sweep, const ExperimentConfig& config,
               const std::filesystem::path& dir);

void WriteTextFile(const std::filesystem::path& path,
                   const std::string& content);

}  // namespace replay::harness

#endif  // REPLAY_HARNESS_REPORT_H_
