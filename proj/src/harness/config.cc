#include "replay/harness/config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "replay/equilibrium.h"
#include "replay/errors.h"

namespace replay::harness {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T Number(const std::string& text, const std::string& key) {
  T v{};
  const std::string t = Trim(text);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) {
    throw ConfigError(key + ": not a number: '" + text + "'");
  }
  return v;
}

std::vector<int> IntList(const std::string& s, const std::string& key) {
  std::vector<int> out;
  for (const auto& item : SplitList(s)) out.push_back(Number<int>(item, key));
  return out;
}

std::string JoinList(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

std::string JoinInts(const std::vector<int>& v) {
  std::vector<std::string> s;
  for (int x : v) s.push_back(std::to_string(x));
  return JoinList(s);
}

std::string Real(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// "reference" or "<games>x<sessions>".
CorpusShape ParseShape(const std::string& text, const CorpusShape& base) {
  if (text == "reference") {
    CorpusShape s = CorpusShape::ReferenceShape();
    s.pairs = base.pairs;
    s.periods = base.periods;
    return s;
  }
  const auto x = text.find('x');
  if (x == std::string::npos) {
    throw ConfigError("shape: expected 'reference' or '<games>x<sessions>'");
  }
  CorpusShape s = base;
  s.sessions_per_game.assign(Number<int>(text.substr(0, x), "shape"),
                             Number<int>(text.substr(x + 1), "shape"));
  return s;
}

std::string ShapeText(const CorpusShape& s) {
  std::vector<std::string> parts;
  for (int n : s.sessions_per_game) parts.push_back(std::to_string(n));
  return JoinList(parts);
}

}  // namespace

const char* ProtocolName(Protocol p) {
  return p == Protocol::kCrossGame ? "cross" : "specific";
}

const std::vector<std::string>& KnownModels() {
  static const std::vector<std::string> kModels = {
      "mlp",    "cnn",         "cnn_gs",  "nash",   "qre",
      "pse",    "ase",         "ibe",     "best_static",
      "best_static_train",     "random",  "rl",     "nfp",
      "inertia", "mf",         "oracle"};
  return kModels;
}

bool IsNeuralModel(const std::string& name) {
  return name == "mlp" || name == "cnn" || name == "cnn_gs";
}

std::uint64_t DeriveSeed(std::uint64_t root, const std::string& label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = root ^ h;  // splitmix64 finalizer
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void ExperimentConfig::Validate() const {
  if (roster.empty()) throw ConfigError("roster is empty");
  std::set<std::string> seen;
  for (const auto& m : roster) {
    const auto& known = KnownModels();
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw ConfigError("unknown model '" + m + "'");
    }
    if (!seen.insert(m).second) throw ConfigError("duplicate model " + m);
  }
  if (games_path.empty() != sessions_path.empty()) {
    throw ConfigError("games and sessions must be given together");
  }
  if (games_path.empty()) {
    GeneratorConfig::Parse(synth);
    shape.Validate();
  }
  if (trim < 0) throw ConfigError("trim must be >= 0");
  if (history < 1) throw ConfigError("history must be >= 1");
  for (const auto& m : roster) {
    if (m == "cnn" || m == "cnn_gs") CnnSpec(history, encoding).Validate();
    if (m == "mlp") MlpSpec(history, encoding).Validate();
  }
  if (sweep_k.empty()) throw ConfigError("sweep_k is empty");
  for (int k : sweep_k) {
    if (k < 1) throw ConfigError("sweep_k values must be >= 1");
    if (SweepModelFor(k) == "cnn") {
      for (auto e : sweep_encodings) CnnSpec(k, e).Validate();
    }
  }
  if (sweep_encodings.empty()) throw ConfigError("sweep_encodings is empty");
  if (sweep_model != "auto" && sweep_model != "mlp" && sweep_model != "cnn") {
    throw ConfigError("sweep_model must be auto, mlp or cnn");
  }
  for (const auto& c : concepts) ParseConcept(c);
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (sample_size < 1) throw ConfigError("sample_size must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  train.Validate();
}

neural::NetworkSpec ExperimentConfig::MlpSpec(int k,
                                              neural::Encoding e) const {
  neural::NetworkSpec spec = neural::NetworkSpec::Mlp({e, k});
  spec.hidden = hidden;
  spec.dropout = dropout;
  return spec;
}

neural::NetworkSpec ExperimentConfig::CnnSpec(int k,
                                              neural::Encoding e) const {
  neural::NetworkSpec spec = neural::NetworkSpec::Cnn({e, k});
  spec.conv_layers = conv_layers;
  spec.conv_filters = conv_filters;
  spec.conv_extent = conv_extent;
  spec.fc_units = fc_units;
  spec.dropout = dropout;
  return spec;
}

std::string ExperimentConfig::SweepModelFor(int k) const {
  if (sweep_model != "auto") return sweep_model;
  return k >= CnnSpec(k, neural::Encoding::kActionOnly).MinHistory() ? "cnn"
                                                                       : "mlp";
}

std::map<std::string, std::string> ExperimentConfig::Echo() const {
  std::vector<std::string> encs;
  for (auto e : sweep_encodings) encs.push_back(neural::EncodingName(e));
  return {
      {"games", games_path},
      {"sessions", sessions_path},
      {"synth", games_path.empty() ? synth : ""},
      {"sessions_per_game", ShapeText(shape)},
      {"pairs", std::to_string(shape.pairs)},
      {"periods", std::to_string(shape.periods)},
      {"roster", JoinList(roster)},
      {"protocol", ProtocolName(protocol)},
      {"splits", JoinList(splits)},
      {"trim", std::to_string(trim)},
      {"history", std::to_string(history)},
      {"encoding", neural::EncodingName(encoding)},
      {"hidden", JoinInts(hidden)},
      {"conv_layers", std::to_string(conv_layers)},
      {"conv_filters", std::to_string(conv_filters)},
      {"conv_extent", std::to_string(conv_extent)},
      {"fc_units", std::to_string(fc_units)},
      {"dropout", Real(dropout)},
      {"lr", Real(train.learning_rate)},
      {"batch", std::to_string(train.batch_size)},
      {"validation_fraction", Real(train.validation_fraction)},
      {"patience", std::to_string(train.patience)},
      {"epochs", std::to_string(train.max_epochs)},
      {"sweep_k", JoinInts(sweep_k)},
      {"sweep_encodings", JoinList(encs)},
      {"sweep_model", sweep_model},
      {"concepts", JoinList(concepts)},
      {"lambda", Real(lambda)},
      {"sample_size", std::to_string(sample_size)},
      {"seed", std::to_string(seed)},
      {"jobs", std::to_string(jobs)},
  };
}

ExperimentConfig ParseConfig(const std::string& text,
                             const std::string& source) {
  ExperimentConfig c;
  std::istringstream in(text);
  int line_no = 0;
  std::string shape_text;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    try {
      if (key == "games") c.games_path = value;
      else if (key == "sessions") c.sessions_path = value;
      else if (key == "synth") c.synth = value;
      else if (key == "shape") shape_text = value;
      else if (key == "pairs") c.shape.pairs = Number<int>(value, key);
      else if (key == "periods") c.shape.periods = Number<int>(value, key);
      else if (key == "roster") c.roster = SplitList(value);
      else if (key == "protocol") {
        if (value == "cross") c.protocol = Protocol::kCrossGame;
        else if (value == "specific") c.protocol = Protocol::kGameSpecific;
        else throw ConfigError("protocol must be cross or specific");
      }
      else if (key == "splits") c.splits = SplitList(value);
      else if (key == "trim") c.trim = Number<int>(value, key);
      else if (key == "history") c.history = Number<int>(value, key);
      else if (key == "encoding") c.encoding = neural::ParseEncoding(value);
      else if (key == "hidden") c.hidden = IntList(value, key);
      else if (key == "conv_layers") c.conv_layers = Number<int>(value, key);
      else if (key == "conv_filters") c.conv_filters = Number<int>(value, key);
      else if (key == "conv_extent") c.conv_extent = Number<int>(value, key);
      else if (key == "fc_units") c.fc_units = Number<int>(value, key);
      else if (key == "dropout") c.dropout = Number<double>(value, key);
      else if (key == "lr") c.train.learning_rate = Number<double>(value, key);
      else if (key == "batch") c.train.batch_size = Number<int>(value, key);
      else if (key == "validation_fraction")
        c.train.validation_fraction = Number<double>(value, key);
      else if (key == "patience") c.train.patience = Number<int>(value, key);
      else if (key == "epochs") c.train.max_epochs = Number<int>(value, key);
      else if (key == "sweep_k") c.sweep_k = IntList(value, key);
      else if (key == "sweep_encodings") {
        c.sweep_encodings.clear();
        for (const auto& e : SplitList(value)) {
          c.sweep_encodings.push_back(neural::ParseEncoding(e));
        }
      }
      else if (key == "sweep_model") c.sweep_model = value;
      else if (key == "concepts") c.concepts = SplitList(value);
      else if (key == "lambda") c.lambda = Number<double>(value, key);
      else if (key == "sample_size") c.sample_size = Number<int>(value, key);
      else if (key == "seed") c.seed = Number<std::uint64_t>(value, key);
      else if (key == "out_dir") c.out_dir = value;
      else if (key == "jobs") c.jobs = Number<int>(value, key);
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  // Shape last so pairs/periods apply whatever the key order.
  if (!shape_text.empty()) c.shape = ParseShape(shape_text, c.shape);
  c.Validate();
  return c;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseConfig(buf.str(), path.string());
}

}  // namespace replay::harness
