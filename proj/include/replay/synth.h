#ifndef REPLAY_SYNTH_H_
#define REPLAY_SYNTH_H_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "replay/data.h"
#include "replay/game.h"

namespace replay {

struct CorpusShape {
  // One entry per game: the number of sessions of that game.
  std::vector<int> sessions_per_game;
  int pairs = 4;
  int periods = 200;

  // Twelve games; 12 sessions for the first six, 6 for the rest; four pairs
  // over 200 periods.
  static CorpusShape ReferenceShape();
  void Validate() const;
};

// Generators:
//   iid(p)                    each player plays action 0 with probability p
//   alternator(period)        switches action every `period` periods
//   inertia_agent(stay_prob)  repeats its last action with prob. stay_prob
//   rl_population(s, phi, eps)   Roth-Erev agents sampling their predictions
//   nfp_population(rho, lambda)  fictitious-play agents sampling theirs
struct GeneratorConfig {
  std::string name;
  std::map<std::string, double> params;
  CorpusShape shape = CorpusShape::ReferenceShape();

  // Parses "name", "name(value)" or "name(key=value, ...)". Missing
  // parameters take defaults. Throws ConfigError on unknown names.
  static GeneratorConfig Parse(const std::string& text);
  std::string ToString() const;
};

struct SyntheticCorpus {
  std::vector<Game2x2> games;
  std::vector<Session> sessions;
};

// Deterministic for a fixed seed. Games are random 2x2 games with a unique
// fully mixed equilibrium, ids G01, G02, ...
SyntheticCorpus SynthGenerate(const GeneratorConfig& config,
                              std::uint64_t seed);

// Uniform on [0, 1) from the top 53 bits; identical on every platform.
double Uniform01(std::mt19937_64& rng);

// Integer payoffs in [0, 10] with no pure equilibrium (so a unique, fully
// mixed one).
Game2x2 RandomInteriorGame(std::mt19937_64& rng, const std::string& id);

}  // namespace replay

#endif  // REPLAY_SYNTH_H_
