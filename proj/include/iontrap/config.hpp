#pragma once

// one run configuration for the command-line tool, covering every module.
// the file format is json with a section per module (chain, compiler, sim,
// characterize, cli); absent keys keep their defaults, unknown keys and
// wrong types are rejected with the offending path in the message

#include <cstdint>
#include <string>
#include <vector>

#include "iontrap/compiler.hpp"
#include "iontrap/program.hpp"
#include "iontrap/sim.hpp"

namespace iontrap {

struct RbConfig {
  std::vector<int> lengths{1, 2, 4, 8, 16, 32, 64};
  int n_seq = 50;
  int shots = 160;  // per sequence
  bool fix_offset = true;
  void validate() const;
};

struct BellConfig {
  int pair_first = 0;
  int n_phases = 16;  // analysis phases, evenly spaced over a full turn
  int shots = 2000;   // per phase, and for the population run
  void validate() const;
};

struct QptConfig {
  int shots_per_setting = 10000;
  int bootstrap_resamples = 10000;
  void validate() const;
};

struct RunConfig {
  int n_ions = 2;
  TrapConfig trap;
  BeamProfile beam;
  CompileOptions compile;
  NoiseModel noise;
  int shots = 1000;  // default shot count of plain circuit runs
  std::uint64_t seed = 2026;
  std::string out;  // report file basename; empty writes no files
  RbConfig rb;
  BellConfig bell;
  QptConfig qpt;

  ChainSetup chain() const;
  void validate() const;
};

// strict parse of the json text; throws InputError naming the bad path
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);

// canonical serialization: sorted keys, full precision, every field
// explicit.  parsing it back reproduces the config exactly
std::string config_to_json(const RunConfig& cfg);

// 16-hex-digit fnv-1a hash of the canonical serialization; reports embed
// it so any result can be traced to its exact settings
std::string config_hash(const RunConfig& cfg);

// the calibrated noise defaults shipped as config/paper_defaults.json;
// the structural fields match a plain RunConfig
RunConfig default_config();

}  // namespace iontrap
