#include "replay/data.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string_view>

#include "replay/errors.h"

namespace replay {
namespace {

bool IsValidUtf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    int extra;
    if (c < 0x80) {
      extra = 0;
    } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
      extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
    } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
      extra = 3;
    } else {
      return false;
    }
    if (i + extra >= s.size() && extra > 0) return false;
    for (int k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    i += extra + 1;
  }
  return true;
}

// Splits text into lines with comments removed, remembering 1-based line
// numbers. Blank lines are dropped.
struct Line {
  int number;
  std::vector<std::string> tokens;
};

std::vector<Line> Tokenize(std::istream& in, const std::string& source) {
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (!IsValidUtf8(text)) throw ParseError(source, 0, "input is not UTF-8");
  std::vector<Line> lines;
  std::istringstream stream(text);
  std::string raw;
  int number = 0;
  while (std::getline(stream, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream fields(raw);
    Line line{number, {}};
    for (std::string tok; fields >> tok;) line.tokens.push_back(tok);
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

double ParseReal(const std::string& tok, const std::string& source, int line) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(source, line, "expected a number, got '" + tok + "'");
  }
  return v;
}

int ParseCount(const std::string& tok, const std::string& source, int line) {
  int v = 0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || v < 0) {
    throw ParseError(source, line,
                     "expected a non-negative integer, got '" + tok + "'");
  }
  return v;
}

std::vector<std::filesystem::path> FilesWithExtension(
    const std::filesystem::path& dir, const std::string& ext) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

template <typename T, typename Parse>
std::vector<T> LoadPath(const std::filesystem::path& path,
                        const std::string& ext, Parse parse) {
  if (!std::filesystem::exists(path)) {
    throw Error("no such file or directory: " + path.string());
  }
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    files = FilesWithExtension(path, ext);
  } else {
    files.push_back(path);
  }
  std::vector<T> out;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open " + file.string());
    auto items = parse(in, file.string());
    std::move(items.begin(), items.end(), std::back_inserter(out));
  }
  return out;
}

void WriteFile(const std::filesystem::path& path,
               const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  body(out);
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

void Session::Validate() const {
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (static_cast<int>(pairs[p].row.size()) != periods ||
        static_cast<int>(pairs[p].col.size()) != periods) {
      throw ValidationError("session " + game_id + "/" + session_id +
                            ": pair " + std::to_string(p) +
                            " does not have " + std::to_string(periods) +
                            " periods");
    }
  }
}

std::span<const Action> PlayerView::own() const {
  const SessionPair& p = session->pairs[pair];
  return role == Role::kRow ? std::span<const Action>(p.row)
                            : std::span<const Action>(p.col);
}

std::span<const Action> PlayerView::opp() const {
  const SessionPair& p = session->pairs[pair];
  return role == Role::kRow ? std::span<const Action>(p.col)
                            : std::span<const Action>(p.row);
}

std::vector<PlayerView> PlayerViews(const Session& session,
                                    const Game2x2& game) {
  std::vector<PlayerView> views;
  views.reserve(session.pairs.size() * 2);
  for (int p = 0; p < static_cast<int>(session.pairs.size()); ++p) {
    views.push_back({&game, &session, p, Role::kRow});
    views.push_back({&game, &session, p, Role::kColumn});
  }
  return views;
}

std::vector<Game2x2> ParseGames(std::istream& in, const std::string& source) {
  const auto lines = Tokenize(in, source);
  std::vector<Game2x2> games;
  for (std::size_t i = 0; i < lines.size();) {
    const Line& head = lines[i];
    if (head.tokens[0] != "game" || head.tokens.size() != 2) {
      throw ParseError(source, head.number, "expected 'game <id>'");
    }
    Game2x2 g;
    g.id = head.tokens[1];
    for (int m = 0; m < 2; ++m) {
      if (i + 1 + m >= lines.size()) {
        throw ParseError(source, head.number, "game " + g.id +
                                                  ": missing payoff line");
      }
      const Line& row = lines[i + 1 + m];
      if (row.tokens.size() != 4) {
        throw ParseError(source, row.number, "expected 4 payoffs");
      }
      Matrix2x2& target = m == 0 ? g.payoff_row : g.payoff_col;
      for (int k = 0; k < 4; ++k) {
        target[k / 2][k % 2] = ParseReal(row.tokens[k], source, row.number);
      }
    }
    g.Validate();
    games.push_back(std::move(g));
    i += 3;
  }
  return games;
}

std::vector<Session> ParseSessions(std::istream& in,
                                   const std::string& source) {
  const auto lines = Tokenize(in, source);
  std::vector<Session> sessions;
  for (std::size_t i = 0; i < lines.size();) {
    const Line& head = lines[i];
    if (head.tokens[0] != "session" || head.tokens.size() != 5) {
      throw ParseError(source, head.number,
                       "expected 'session <game_id> <session_id> "
                       "<num_pairs> <T>'");
    }
    Session s;
    s.game_id = head.tokens[1];
    s.session_id = head.tokens[2];
    const int num_pairs = ParseCount(head.tokens[3], source, head.number);
    s.periods = ParseCount(head.tokens[4], source, head.number);
    ++i;
    for (int p = 0; p < num_pairs; ++p) {
      SessionPair pair;
      for (std::vector<Action>* seq : {&pair.row, &pair.col}) {
        if (i >= lines.size()) {
          throw ParseError(source, head.number,
                           "session " + s.session_id + ": missing sequence");
        }
        const Line& line = lines[i++];
        for (const std::string& tok : line.tokens) {
          if (tok == "0") {
            seq->push_back(Action::kZero);
          } else if (tok == "1") {
            seq->push_back(Action::kOne);
          } else {
            throw ParseError(source, line.number,
                             "expected 0 or 1, got '" + tok + "'");
          }
        }
        if (static_cast<int>(seq->size()) != s.periods) {
          throw ValidationError(
              source + ":" + std::to_string(line.number) + ": session " +
              s.session_id + " has " + std::to_string(seq->size()) +
              " actions, expected " + std::to_string(s.periods));
        }
      }
      s.pairs.push_back(std::move(pair));
    }
    sessions.push_back(std::move(s));
  }
  return sessions;
}

std::vector<Game2x2> LoadGames(const std::filesystem::path& path) {
  return LoadPath<Game2x2>(path, ".game", ParseGames);
}

std::vector<Session> LoadSessions(const std::filesystem::path& path) {
  return LoadPath<Session>(path, ".sessions", ParseSessions);
}

GameCatalog MakeCatalog(std::span<const Game2x2> games) {
  GameCatalog catalog;
  for (const Game2x2& g : games) {
    if (!catalog.emplace(g.id, g).second) {
      throw ValidationError("duplicate game id " + g.id);
    }
  }
  return catalog;
}

void WriteGames(std::ostream& out, std::span<const Game2x2> games) {
  auto write_matrix = [&out](const Matrix2x2& m) {
    char buf[32];
    for (int k = 0; k < 4; ++k) {
      auto res = std::to_chars(buf, buf + sizeof(buf), m[k / 2][k % 2]);
      out << (k ? " " : "") << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  };
  for (const Game2x2& g : games) {
    out << "game " << g.id << '\n';
    write_matrix(g.payoff_row);
    write_matrix(g.payoff_col);
  }
}

void WriteSessions(std::ostream& out, std::span<const Session> sessions) {
  for (const Session& s : sessions) {
    out << "session " << s.game_id << ' ' << s.session_id << ' '
        << s.pairs.size() << ' ' << s.periods << '\n';
    std::string line;
    for (const SessionPair& pair : s.pairs) {
      for (const auto* seq : {&pair.row, &pair.col}) {
        line.clear();
        for (std::size_t t = 0; t < seq->size(); ++t) {
          if (t) line.push_back(' ');
          line.push_back((*seq)[t] == Action::kZero ? '0' : '1');
        }
        out << line << '\n';
      }
    }
  }
}

void WriteGamesFile(const std::filesystem::path& path,
                    std::span<const Game2x2> games) {
  WriteFile(path, [&](std::ostream& out) { WriteGames(out, games); });
}

void WriteSessionsFile(const std::filesystem::path& path,
                       std::span<const Session> sessions) {
  WriteFile(path, [&](std::ostream& out) { WriteSessions(out, sessions); });
}

int TargetCount(int periods, int trim) {
  return std::max(0, periods - trim - FirstTarget(trim));
}

std::vector<StepRecord> HistoryWindow(const PlayerView& view, int target,
                                      int k) {
  std::vector<StepRecord> history;
  history.reserve(k);
  const auto own = view.own();
  const auto opp = view.opp();
  for (int t = target - k; t < target; ++t) {
    history.push_back(t < 0 ? StepRecord::Padding()
                            : MakeStepRecord(*view.game, view.role, own[t],
                                             opp[t]));
  }
  return history;
}

namespace {

void AppendSamples(const Session& s, const Game2x2& game, int k, int trim,
                   std::vector<PredictionSample>& out) {
  if (k < 1) throw ConfigError("history length must be at least 1");
  if (trim < 0) throw ConfigError("trim must be non-negative");
  s.Validate();
  if (s.periods <= 2 * trim + 1) {
    throw ValidationError("session " + s.game_id + "/" + s.session_id +
                          ": " + std::to_string(s.periods) +
                          " periods is too short for trim " +
                          std::to_string(trim));
  }
  for (const PlayerView& view : PlayerViews(s, game)) {
    const auto own = view.own();
    for (int t = FirstTarget(trim); t < s.periods - trim; ++t) {
      PredictionSample sample;
      sample.game_id = s.game_id;
      sample.session_id = s.session_id;
      sample.pair = view.pair;
      sample.role = view.role;
      sample.period = t;
      sample.history = HistoryWindow(view, t, k);
      sample.target = own[t];
      out.push_back(std::move(sample));
    }
  }
}

}  // namespace

std::vector<PredictionSample> Windowize(std::span<const Session> sessions,
                                        const Game2x2& game, int k,
                                        int trim) {
  std::vector<PredictionSample> out;
  for (const Session& s : sessions) {
    if (s.game_id != game.id) {
      throw ValidationError("session " + s.session_id + " belongs to game " +
                            s.game_id + ", not " + game.id);
    }
    AppendSamples(s, game, k, trim, out);
  }
  return out;
}

std::vector<PredictionSample> Windowize(std::span<const Session> sessions,
                                        const GameCatalog& games, int k,
                                        int trim) {
  std::vector<PredictionSample> out;
  for (const Session& s : sessions) {
    auto it = games.find(s.game_id);
    if (it == games.end()) {
      throw ValidationError("session " + s.session_id +
                            " refers to unknown game " + s.game_id);
    }
    AppendSamples(s, it->second, k, trim, out);
  }
  return out;
}

std::vector<SplitSpec> MakeSplits(std::span<const Session> corpus,
                                  SplitMode mode) {
  std::map<std::string, std::vector<std::string>> sessions_by_game;
  for (const Session& s : corpus) {
    auto& ids = sessions_by_game[s.game_id];
    if (std::find(ids.begin(), ids.end(), s.session_id) != ids.end()) {
      throw ValidationError("duplicate session id " + s.session_id +
                            " in game " + s.game_id);
    }
    ids.push_back(s.session_id);
  }
  std::vector<SplitSpec> splits;
  if (mode == SplitMode::kCrossGame) {
    if (sessions_by_game.size() < 2) {
      throw ConfigError("cross-game splits need at least 2 games");
    }
    for (const auto& [test, unused] : sessions_by_game) {
      SplitSpec split;
      split.mode = mode;
      split.test_game = test;
      for (const auto& [g, unused2] : sessions_by_game) {
        if (g != test) split.train_games.insert(g);
      }
      splits.push_back(std::move(split));
    }
    return splits;
  }
  if (sessions_by_game.empty()) {
    throw ConfigError("game-specific splits need a non-empty corpus");
  }
  for (auto& [game, ids] : sessions_by_game) {
    if (ids.size() < 2) {
      throw ConfigError("game-specific splits need at least 2 sessions in "
                        "game " + game);
    }
    std::sort(ids.begin(), ids.end());
    for (const std::string& held_out : ids) {
      SplitSpec split;
      split.mode = mode;
      split.test_game = game;
      split.train_games = {game};
      split.held_out_session = held_out;
      splits.push_back(std::move(split));
    }
  }
  return splits;
}

std::vector<const Session*> TrainSessions(std::span<const Session> corpus,
                                          const SplitSpec& split) {
  std::vector<const Session*> out;
  for (const Session& s : corpus) {
    if (split.mode == SplitMode::kCrossGame) {
      if (split.train_games.count(s.game_id) && s.game_id != split.test_game) {
        out.push_back(&s);
      }
    } else if (s.game_id == split.test_game &&
               s.session_id != split.held_out_session) {
      out.push_back(&s);
    }
  }
  return out;
}

std::vector<const Session*> TestSessions(std::span<const Session> corpus,
                                         const SplitSpec& split) {
  std::vector<const Session*> out;
  for (const Session& s : corpus) {
    if (s.game_id != split.test_game) continue;
    if (split.mode == SplitMode::kGameSpecific &&
        s.session_id != split.held_out_session) {
      continue;
    }
    out.push_back(&s);
  }
  return out;
}

}  // namespace replay
