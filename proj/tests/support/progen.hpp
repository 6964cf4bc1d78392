#pragma once

// Random surface programs for the property suites. Every program has one
// def `f` with a sig, optional assumed helpers and an optional client
// `main`. Refinements come from the six ordering qualifiers so that the
// effective qualifier set stays the minimal one.

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace gliq::testing {

struct Ann {
  std::string pred;  // "" means true
  bool hole = false;
};

struct FnSpec {
  std::string name;
  std::vector<std::string> params;
  std::vector<Ann> args;
  Ann result;
  bool bool_result = false;
};

struct GenProgram {
  std::vector<FnSpec> assumes;
  FnSpec f;
  std::string body;
  std::optional<std::vector<int>> main_args;
  int nodes = 0;

  int holes() const;
  std::string text() const;
  // Every refinement of f (and main) becomes `?`; assumes are left out.
  GenProgram embedded() const;
  // Positions holding a precise, non-trivial refinement.
  std::vector<Ann*> precise_slots();
};

enum class GenMode {
  Gradual,   // up to two holes
  Static,    // no holes
  Embedding  // a hole-free skeleton meant for embedded(): no division, no assumes
};

struct GenOptions {
  GenMode mode = GenMode::Gradual;
  int max_nodes = 25;
  int max_holes = 2;
};

GenProgram generate_program(std::mt19937& rng, const GenOptions& opts);

}  // namespace gliq::testing
