#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "motrack/synth.hpp"
#include "motrack/tracker.hpp"

namespace motrack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitContractViolation = 2;

struct RunConfig {
  std::string det_path;
  std::string emb_path;
  std::string cmc_path;
  std::string out_path;
  std::string gt_path;
  TrackerConfig tracker;
  /// Explicit request for appearance; needs an embedding file.
  bool require_appearance = false;
  bool no_appearance = false;
  bool no_cmc = false;
  std::string scenario;
  std::string out_dir;
  std::uint64_t seed = 0;
};

/// One row of the ablation grid.
struct AblationRow {
  bool appearance;
  bool dynamic_appearance;
  bool cmc;
  bool adaptive_weighting;
};

/// Baseline, +CMC, +Appr., +DA, +CMC, +AW, in that order.
std::array<AblationRow, 6> ablation_grid();
TrackerConfig configure_row(TrackerConfig base, const AblationRow& row);

/// Hyper-parameter presets: "mot" (a_w 0.75, eps 0.5), "dancetrack"
/// (a_w 1.25, eps 1.0). Throws ContractError for other names.
void apply_preset(TrackerConfig& config, const std::string& name);

int cmd_track(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_ablate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace motrack::cli
