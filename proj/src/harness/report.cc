#include "replay/harness/report.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "replay/errors.h"
#include "replay/metrics.h"

namespace replay::harness {
namespace {

using nlohmann::json;

std::string Real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

json AuditJson(const EvalReport& r) {
  return {{"leakage", {{"cells", r.audit.cells},
                       {"violations", r.audit.violations},
                       {"details", r.audit.details}}},
          {"oracle_self_test", {{"cells", r.oracle.cells},
                                {"failures", r.oracle.failures},
                                {"min_econ_value", r.oracle.min_value},
                                {"max_econ_value", r.oracle.max_value}}}};
}

}  // namespace

void WriteTextFile(const std::filesystem::path& path,
                   const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed: " + path.string());
}

void WriteMetricCsv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << "model,game,steps,loss,accuracy,econ_value\n";
  for (const MetricRow& r : rows) {
    out << Field(r.model) << ',' << Field(r.game) << ',' << r.steps << ','
        << Real(r.loss) << ',' << Real(r.accuracy) << ','
        << Real(r.econ_value) << '\n';
  }
}

std::vector<MetricRow> ReadMetricCsv(std::istream& in,
                                     const std::string& source) {
  std::vector<MetricRow> rows;
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line) ||
      line != "model,game,steps,loss,accuracy,econ_value") {
    throw ParseError(source, 1, "missing or unexpected CSV header");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = SplitCsvLine(line);
    if (f.size() != 6) throw ParseError(source, line_no, "expected 6 fields");
    try {
      std::size_t used = 0;
      MetricRow r;
      r.model = f[0];
      r.game = f[1];
      r.steps = std::stol(f[2], &used);
      r.loss = std::stod(f[3]);
      r.accuracy = std::stod(f[4]);
      r.econ_value = std::stod(f[5]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError(source, line_no, "bad number");
    }
  }
  return rows;
}

void WriteSweepCsv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "k,encoding,model,steps,loss,accuracy,econ_value\n";
  for (const SweepRow& r : rows) {
    out << r.history << ',' << neural::EncodingName(r.encoding) << ','
        << Field(r.metrics.model) << ',' << r.metrics.steps << ','
        << Real(r.metrics.loss) << ',' << Real(r.metrics.accuracy) << ','
        << Real(r.metrics.econ_value) << '\n';
  }
}

json Manifest(const EvalReport& report, const ExperimentConfig& config,
              const std::string& command) {
  json m;
  m["command"] = command;
  m["config"] = config.Echo();
  m["seeds"] = {{"root", config.seed},
                {"corpus", DeriveSeed(config.seed, "corpus")}};
  m["protocol"] = ProtocolName(report.protocol);
  m["history"] = report.history;
  m["encoding"] = neural::EncodingName(report.encoding);
  m["audits"] = AuditJson(report);
  m["cells"] = report.cells;
  json errors = json::array();
  for (const auto& e : report.errors) {
    errors.push_back(
        {{"model", e.model}, {"split", e.split}, {"message", e.message}});
  }
  m["errors"] = errors;
  m["ok"] = report.ok();
  m["notes"] = {
      {"best_static",
       "oracle benchmark: the test game's own empirical action frequency"},
      {"best_static_train", "action frequency pooled over training games"},
      {"oracle", "perfect predictor used for the economic-value self-test"},
      {"aggregation",
       "aggregate rows weight each game by its prediction steps; econ value "
       "per game is summed gained over summed optimal"}};
  m["reference"] = {{"log_clip", kLogClip},
                    {"trim", config.trim},
                    {"format_version", 1}};
  // Published figures on the human-play corpus, which is not distributed.
  // Kept for comparison only; synthetic runs are not expected to match.
  m["human_data_reference"] = {
      {"cnn", {{"accuracy", 79.5}, {"loss", 0.42}, {"econ_value", 87.5}}},
      {"cnn_gs", {{"accuracy", 77.6}, {"loss", 0.448}, {"econ_value", 87.4}}},
      {"best_static", {{"econ_value", 78.3}}}};
  return m;
}

void EmitReport(const EvalReport& report, const ExperimentConfig& config,
                const std::filesystem::path& dir, const std::string& prefix) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  std::ostringstream games, agg;
  WriteMetricCsv(games, report.rows);
  WriteMetricCsv(agg, report.aggregate);
  WriteTextFile(dir / (prefix + "games.csv"), games.str());
  WriteTextFile(dir / (prefix + "aggregate.csv"), agg.str());
  WriteTextFile(dir / (prefix + "manifest.json"),
                Manifest(report, config, "eval").dump(2) + "\n");
}

void EmitSweep(const SweepReport& sweep, const ExperimentConfig& config,
               const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  std::ostringstream csv;
  WriteSweepCsv(csv, sweep.rows);
  WriteTextFile(dir / "sweep.csv", csv.str());
  json m;
  m["command"] = "sweep";
  m["config"] = config.Echo();
  m["seeds"] = {{"root", config.seed},
                {"corpus", DeriveSeed(config.seed, "corpus")}};
  m["points"] = json::array();
  for (const EvalReport& r : sweep.points) {
    json p = Manifest(r, config, "sweep");
    p.erase("config");
    p.erase("seeds");
    m["points"].push_back(p);
  }
  m["ok"] = sweep.ok();
  WriteTextFile(dir / "sweep_manifest.json", m.dump(2) + "\n");
}

}  // namespace replay::harness
