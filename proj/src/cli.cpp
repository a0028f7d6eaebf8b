#include "motrack/cli.hpp"

#include <cstdio>
#include <exception>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "motrack/error.hpp"
#include "motrack/io.hpp"

namespace motrack::cli {

std::array<AblationRow, 6> ablation_grid() {
  return {{
      {false, false, false, false},
      {false, false, true, false},
      {true, false, false, false},
      {true, true, false, false},
      {true, true, true, false},
      {true, true, true, true},
  }};
}

TrackerConfig configure_row(TrackerConfig base, const AblationRow& row) {
  base.appearance_enabled = row.appearance;
  base.da_enabled = row.dynamic_appearance;
  base.cmc_enabled = row.cmc;
  base.aw_enabled = row.adaptive_weighting;
  return base;
}

void apply_preset(TrackerConfig& config, const std::string& name) {
  if (name == "mot") {
    config.association.a_w = 0.75;
    config.association.epsilon = 0.5;
  } else if (name == "dancetrack") {
    config.association.a_w = 1.25;
    config.association.epsilon = 1.0;
  } else {
    throw ContractError("unknown preset '" + name + "' (available: mot, dancetrack)");
  }
}

namespace {

struct Inputs {
  DetectionStream dets;
  std::optional<EmbeddingStream> embeddings;
  std::optional<CmcTable> cmc;
};

Inputs load_inputs(const RunConfig& rc, bool want_embeddings) {
  Inputs in;
  in.dets = io::read_detections(rc.det_path);
  if (want_embeddings && !rc.emb_path.empty()) {
    in.embeddings = io::read_embeddings(rc.emb_path, io::detection_counts(in.dets));
  }
  if (!rc.cmc_path.empty()) {
    in.cmc = io::read_cmc(rc.cmc_path);
  }
  return in;
}

void report_stats(std::ostream& err, const std::string& label, const TrackerStats& s) {
  std::ostringstream line;
  line << std::fixed << std::setprecision(4);
  line << label << ": tracks created " << s.tracks_created << ", matches "
       << s.primary_matches + s.ocr_recoveries << " (primary " << s.primary_matches << ", OCR "
       << s.ocr_recoveries << "), OOS re-updates " << s.oos_reupdates << ", mean alpha_t "
       << s.mean_alpha() << "\n";
  err << line.str();
}

void write_track_file(const std::string& path, std::span<const FrameOutput> frames,
                      std::ostream& out) {
  if (path == "-") {
    io::write_tracks(frames, out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  io::write_tracks(frames, f);
}

std::string metrics_line(const synth::AssocMetrics& m) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << "id_switches=" << m.id_switches
    << " mota_lite=" << m.mota_lite << " idf1_lite=" << m.idf1_lite;
  return s.str();
}

// Wraps a subcommand so library errors map onto exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kExitContractViolation;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace

int cmd_track(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (rc.det_path.empty() || rc.out_path.empty()) {
      throw ContractError("track: --det and --out are required");
    }
    if (rc.require_appearance && rc.emb_path.empty()) {
      throw ContractError("--appearance requires --emb (no embedding file given)");
    }
    if (rc.require_appearance && rc.no_appearance) {
      throw ContractError("--appearance conflicts with --no-appearance");
    }
    TrackerConfig config = rc.tracker;
    config.appearance_enabled = !rc.emb_path.empty() && !rc.no_appearance;
    config.cmc_enabled = !rc.cmc_path.empty() && !rc.no_cmc;
    config.validate();

    const Inputs in = load_inputs(rc, config.appearance_enabled);
    const SequenceResult result =
        run_sequence(config, in.dets, in.embeddings ? &*in.embeddings : nullptr,
                     in.cmc && config.cmc_enabled ? &*in.cmc : nullptr);
    write_track_file(rc.out_path, result.frames, out);
    report_stats(err, rc.det_path, result.stats);
    return kExitOk;
  });
}

int cmd_ablate(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Inputs in;
    std::vector<FrameOutput> gt;
    if (!rc.scenario.empty()) {
      const synth::Scenario s = synth::generate(rc.scenario, rc.seed);
      in.dets = s.bare_detections();
      in.embeddings = s.embeddings();
      in.cmc = s.camera;
      gt = s.ground_truth_frames();
    } else {
      if (rc.det_path.empty() || rc.gt_path.empty()) {
        throw ContractError("ablate: give --scenario, or --det with --gt");
      }
      if (rc.emb_path.empty()) {
        throw ContractError("ablate: the appearance rows need --emb");
      }
      in = load_inputs(rc, true);
      gt = io::read_tracks(rc.gt_path);
    }
    rc.tracker.validate();

    const auto grid = ablation_grid();
    std::vector<std::future<SequenceResult>> jobs;
    for (const auto& row : grid) {
      const TrackerConfig config = configure_row(rc.tracker, row);
      jobs.push_back(std::async(std::launch::async, [&in, config] {
        return run_sequence(config, in.dets, config.appearance_enabled ? &*in.embeddings : nullptr,
                            in.cmc && config.cmc_enabled ? &*in.cmc : nullptr);
      }));
    }

    out << "Appr  DA   CMC  AW   id_switches  mota_lite  idf1_lite\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const SequenceResult r = jobs[i].get();
      const synth::AssocMetrics m = synth::score(gt, r.frames);
      auto mark = [](bool b) { return b ? "x    " : "-    "; };
      char buf[96];
      std::snprintf(buf, sizeof buf, "%11d  %9.4f  %9.4f\n", m.id_switches, m.mota_lite,
                    m.idf1_lite);
      out << mark(grid[i].appearance) << mark(grid[i].dynamic_appearance) << mark(grid[i].cmc)
          << mark(grid[i].adaptive_weighting) << buf;
    }
    return kExitOk;
  });
}

int cmd_synth(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const synth::Scenario s = synth::generate(rc.scenario, rc.seed);
    TrackerConfig config = rc.tracker;
    config.appearance_enabled = !rc.no_appearance;
    config.cmc_enabled = s.camera.has_value() && !rc.no_cmc;
    const EmbeddingStream embs = s.embeddings();
    const SequenceResult r =
        run_sequence(config, s.bare_detections(), config.appearance_enabled ? &embs : nullptr,
                     config.cmc_enabled ? &*s.camera : nullptr);
    const synth::AssocMetrics m = synth::score(s, r.frames);
    if (!rc.out_dir.empty()) {
      synth::write_scenario(s, rc.out_dir);
      write_track_file((std::filesystem::path(rc.out_dir) / "tracks.txt").string(), r.frames, out);
    }
    out << "scenario=" << s.name << " seed=" << rc.seed << " " << metrics_line(m) << "\n";
    report_stats(err, s.name, r.stats);
    return kExitOk;
  });
}

namespace {

struct TuningFlags {
  std::optional<double> sigma, alpha_f, aw, eps, lambda_ocm, iou_floor;
  std::optional<int> delta_t, min_hits, max_age;
  std::string preset;
  bool no_da = false;
  bool no_aw = false;
  bool report_detections = false;
};

void add_tuning(CLI::App& app, TuningFlags& t, RunConfig& rc) {
  const TrackerConfig d;
  auto dflt = [](double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  };
  app.add_option("--sigma", t.sigma, "Detection confidence threshold sigma")
      ->default_str(dflt(d.sigma));
  app.add_option("--alpha-f", t.alpha_f, "Fixed EMA factor alpha_f")
      ->default_str(dflt(d.appearance.alpha_f));
  app.add_option("--aw", t.aw, "Global appearance weight a_w")
      ->default_str(dflt(d.association.a_w));
  app.add_option("--eps", t.eps, "Adaptive-weighting boost cap epsilon")
      ->default_str(dflt(d.association.epsilon));
  app.add_option("--lambda-ocm", t.lambda_ocm, "Momentum (OCM) penalty weight")
      ->default_str(dflt(d.association.lambda_ocm));
  app.add_option("--delta-t", t.delta_t, "Momentum horizon in observations")
      ->default_str(std::to_string(d.association.delta_t));
  app.add_option("--min-hits", t.min_hits, "Hits before a track is confirmed")
      ->default_str(std::to_string(d.min_hits));
  app.add_option("--max-age", t.max_age, "Frames a track survives without a match")
      ->default_str(std::to_string(d.max_age));
  app.add_option("--iou-floor", t.iou_floor, "Minimum IoU for an accepted match")
      ->default_str(dflt(d.association.iou_floor));
  app.add_option("--preset", t.preset, "Hyper-parameter preset; explicit flags override it")
      ->check(CLI::IsMember({"mot", "dancetrack"}));
  app.add_flag("--no-cmc", rc.no_cmc, "Disable camera motion compensation");
  app.add_flag("--no-appearance", rc.no_appearance, "Disable appearance association");
  app.add_flag("--no-da", t.no_da, "Use the fixed EMA factor (no dynamic appearance)");
  app.add_flag("--no-aw", t.no_aw, "Disable adaptive appearance weighting");
  app.add_flag("--report-detections", t.report_detections,
               "Report matched detection boxes instead of filter estimates");
  app.add_option("--seed", rc.seed, "Seed for synthetic scenarios")->default_str("0");
}

void resolve_tuning(const TuningFlags& t, RunConfig& rc) {
  TrackerConfig& c = rc.tracker;
  if (!t.preset.empty()) apply_preset(c, t.preset);
  if (t.sigma) c.sigma = *t.sigma;
  if (t.alpha_f) c.appearance.alpha_f = *t.alpha_f;
  if (t.aw) c.association.a_w = *t.aw;
  if (t.eps) c.association.epsilon = *t.eps;
  if (t.lambda_ocm) c.association.lambda_ocm = *t.lambda_ocm;
  if (t.iou_floor) c.association.iou_floor = *t.iou_floor;
  if (t.delta_t) c.association.delta_t = *t.delta_t;
  if (t.min_hits) c.min_hits = *t.min_hits;
  if (t.max_age) c.max_age = *t.max_age;
  c.da_enabled = !t.no_da;
  c.aw_enabled = !t.no_aw;
  c.report_detections = t.report_detections;
  c.appearance.sigma = c.sigma;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-object tracker with appearance-weighted observation-centric association"};
  app.require_subcommand(1);

  RunConfig track_rc, ablate_rc, synth_rc;
  TuningFlags track_t, ablate_t, synth_t;

  CLI::App* track = app.add_subcommand("track", "Track detections from files");
  track->add_option("--det", track_rc.det_path, "MOT detection file")->required();
  track->add_option("--emb", track_rc.emb_path, "Embedding file (text or binary)");
  track->add_option("--cmc", track_rc.cmc_path, "Camera transform file");
  track->add_option("--out", track_rc.out_path, "Output track file, '-' for stdout")->required();
  track->add_flag("--appearance", track_rc.require_appearance,
                  "Require appearance association (needs --emb)");
  add_tuning(*track, track_t, track_rc);

  CLI::App* ablate = app.add_subcommand("ablate", "Run the Appr./DA/CMC/AW ablation grid");
  ablate->add_option("--det", ablate_rc.det_path, "MOT detection file");
  ablate->add_option("--emb", ablate_rc.emb_path, "Embedding file");
  ablate->add_option("--cmc", ablate_rc.cmc_path, "Camera transform file");
  ablate->add_option("--gt", ablate_rc.gt_path, "Ground truth in MOT track format");
  ablate->add_option("--scenario", ablate_rc.scenario, "Use a synthetic scenario instead of files");
  add_tuning(*ablate, ablate_t, ablate_rc);

  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate and track a synthetic scenario");
  synth_cmd->add_option("scenario", synth_rc.scenario, "crossing, occlusion or pan")->required();
  synth_cmd->add_option("--out-dir", synth_rc.out_dir, "Write scenario files and tracks here");
  add_tuning(*synth_cmd, synth_t, synth_rc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitContractViolation;
  }

  return guarded(err, [&] {
    if (*track) {
      resolve_tuning(track_t, track_rc);
      return cmd_track(track_rc, out, err);
    }
    if (*ablate) {
      resolve_tuning(ablate_t, ablate_rc);
      return cmd_ablate(ablate_rc, out, err);
    }
    resolve_tuning(synth_t, synth_rc);
    return cmd_synth(synth_rc, out, err);
  });
}

}  // namespace motrack::cli
