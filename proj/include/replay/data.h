#ifndef REPLAY_DATA_H_
#define REPLAY_DATA_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "replay/game.h"

namespace replay {

// Games keyed by id.
using GameCatalog = std::map<std::string, Game2x2>;

// A fixed row/column pairing inside a session.
struct SessionPair {
  std::vector<Action> row;
  std::vector<Action> col;
};

struct Session {
  std::string game_id;
  std::string session_id;
  int periods = 0;
  std::vector<SessionPair> pairs;

  // Every sequence must have length `periods`.
  void Validate() const;
};

// One (history window, next action) example from one player's viewpoint.
struct PredictionSample {
  std::string game_id;
  std::string session_id;
  int pair = 0;
  Role role = Role::kRow;
  int period = 0;  // index of the target period
  std::vector<StepRecord> history;
  Action target = Action::kZero;
};

enum class SplitMode { kCrossGame, kGameSpecific };

struct SplitSpec {
  std::set<std::string> train_games;
  std::string test_game;
  SplitMode mode = SplitMode::kCrossGame;
  std::optional<std::string> held_out_session;  // kGameSpecific only
};

// The sequences of one player in a session, seen from that player.
struct PlayerView {
  const Game2x2* game = nullptr;
  const Session* session = nullptr;
  int pair = 0;
  Role role = Role::kRow;

  std::span<const Action> own() const;
  std::span<const Action> opp() const;
  int periods() const { return session->periods; }
};

// Both players of every pair, row first.
std::vector<PlayerView> PlayerViews(const Session& session,
                                    const Game2x2& game);

// ---------------------------------------------------------------------------
// File formats
//
// Game file, one or more blocks:
//   game <id>
//   <4 reals: row player's payoffs, row-major [row action][col action]>
//   <4 reals: column player's payoffs, same indexing>
//
// Session file, one or more blocks:
//   session <game_id> <session_id> <num_pairs> <T>
//   then per pair a row line and a column line of T tokens in {0, 1}.
//
// '#' starts a comment. Input must be UTF-8.
// ---------------------------------------------------------------------------

std::vector<Game2x2> ParseGames(std::istream& in, const std::string& source);
std::vector<Session> ParseSessions(std::istream& in,
                                   const std::string& source);

// `path` may be a file or a directory; directories are scanned for
// *.game / *.sessions files in name order.
std::vector<Game2x2> LoadGames(const std::filesystem::path& path);
std::vector<Session> LoadSessions(const std::filesystem::path& path);
GameCatalog MakeCatalog(std::span<const Game2x2> games);

void WriteGames(std::ostream& out, std::span<const Game2x2> games);
void WriteSessions(std::ostream& out, std::span<const Session> sessions);
// Throws Error when the file cannot be written.
void WriteGamesFile(const std::filesystem::path& path,
                    std::span<const Game2x2> games);
void WriteSessionsFile(const std::filesystem::path& path,
                       std::span<const Session> sessions);

// ---------------------------------------------------------------------------
// Windowing
// ---------------------------------------------------------------------------

inline constexpr int kDefaultTrim = 10;

// Target periods are [FirstTarget(trim), T - trim). A target needs at least
// one observed period before it, so trim 0 starts at period 1.
inline int FirstTarget(int trim) { return trim > 0 ? trim : 1; }
int TargetCount(int periods, int trim);

// The k records preceding `target`, oldest first; periods before the start
// of the session are padding records.
std::vector<StepRecord> HistoryWindow(const PlayerView& view, int target,
                                      int k);

// Throws ValidationError when a session is too short for the trim, or when
// a session's game is missing from the catalog.
std::vector<PredictionSample> Windowize(std::span<const Session> sessions,
                                        const Game2x2& game, int k, int trim);
std::vector<PredictionSample> Windowize(std::span<const Session> sessions,
                                        const GameCatalog& games, int k,
                                        int trim);

// Leave-one-game-out or leave-one-session-out splits over the corpus.
// Throws ConfigError when the corpus cannot support the mode.
std::vector<SplitSpec> MakeSplits(std::span<const Session> corpus,
                                  SplitMode mode);

// Sessions of the corpus that belong to the training side of `split`.
std::vector<const Session*> TrainSessions(std::span<const Session> corpus,
                                          const SplitSpec& split);
std::vector<const Session*> TestSessions(std::span<const Session> corpus,
                                         const SplitSpec& split);

}  // namespace replay

#endif  // REPLAY_DATA_H_
