#include "motrack/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <tuple>

#include "motrack/error.hpp"
#include "motrack/io.hpp"

namespace motrack::synth {

FrameIndex Scenario::first_frame() const {
  return detections.empty() ? 0 : detections.begin()->first;
}

FrameIndex Scenario::last_frame() const {
  return detections.empty() ? 0 : detections.rbegin()->first;
}

DetectionStream Scenario::bare_detections() const {
  DetectionStream out = detections;
  for (auto& [frame, ds] : out) {
    for (auto& d : ds) d.embedding.reset();
  }
  return out;
}

EmbeddingStream Scenario::embeddings() const {
  EmbeddingStream out;
  for (const auto& [frame, ds] : detections) {
    for (const auto& d : ds) {
      if (d.embedding) out[frame].push_back(*d.embedding);
    }
  }
  return out;
}

std::vector<FrameOutput> Scenario::ground_truth_frames() const {
  std::map<FrameIndex, FrameOutput> frames;
  for (const auto& [id, track] : ground_truth) {
    for (const auto& [frame, box] : track) {
      auto& fo = frames[frame];
      fo.frame = frame;
      fo.entries.push_back({id, box, 1.0});
    }
  }
  std::vector<FrameOutput> out;
  for (auto& [frame, fo] : frames) out.push_back(std::move(fo));
  return out;
}

namespace {

constexpr double kBoxWidth = 40.0;
constexpr double kBoxHeight = 80.0;

Box centered(double cx, double cy) {
  return {cx - 0.5 * kBoxWidth, cy - 0.5 * kBoxHeight, kBoxWidth, kBoxHeight};
}

class EmbeddingSource {
 public:
  EmbeddingSource(std::mt19937_64& rng, double noise)
      : rng_(rng), noise_(noise / std::sqrt(static_cast<double>(kEmbeddingDim))) {}

  Embedding sample(int identity) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(kEmbeddingDim);
    v(identity % kEmbeddingDim) = 1.0;
    if (noise_ > 0.0) {
      std::normal_distribution<double> gauss(0.0, noise_);
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += gauss(rng_);
    }
    return Embedding::normalized(std::move(v));
  }

 private:
  std::mt19937_64& rng_;
  double noise_;
};

void emit(Scenario& s, FrameIndex frame, int id, const Box& box, double score,
          std::optional<Embedding> emb) {
  s.detections[frame].push_back({box, score, std::move(emb)});
  s.detection_ids[frame].push_back(id);
}

}  // namespace

Scenario gen_crossing(std::uint64_t seed, int n_targets, double noise, double sigma) {
  if (n_targets < 2) throw ContractError("gen_crossing: need at least two targets");
  std::mt19937_64 rng(seed);
  EmbeddingSource embed(rng, noise);
  std::uniform_real_distribution<double> base_score(0.75, 0.95);

  constexpr int kApproach = 15;
  constexpr int kDwell = 4;
  constexpr double kSpeed = 4.0;
  const Eigen::Vector2d meet(400.0, 300.0);

  Scenario s;
  s.name = "crossing";
  s.embedding_dim = kEmbeddingDim;
  const int n_frames = 2 * kApproach + kDwell;
  for (int k = 0; k < n_targets; ++k) {
    const double theta = std::numbers::pi + 2.0 * std::numbers::pi * k / n_targets;
    const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
    for (int f = 0; f < n_frames; ++f) {
      double dist = 0.0;
      if (f < kApproach) {
        dist = kSpeed * (kApproach - f);
      } else if (f >= kApproach + kDwell) {
        dist = kSpeed * (f - (kApproach + kDwell) + 1);
      }
      const Eigen::Vector2d c = meet + dist * dir;
      s.ground_truth[k + 1][f + 1] = centered(c.x(), c.y());
    }
  }

  for (int f = 1; f <= n_frames; ++f) {
    for (const auto& [id, track] : s.ground_truth) {
      const Box& box = track.at(f);
      double overlap = 0.0;
      for (const auto& [other, other_track] : s.ground_truth) {
        if (other != id) overlap = std::max(overlap, iou(box, other_track.at(f)));
      }
      const double drawn = base_score(rng);
      const double score = overlap > 0.3 ? sigma + 0.05 : drawn;
      emit(s, f, id, box, score, embed.sample(id));
    }
  }
  return s;
}

Scenario gen_pan(std::uint64_t seed, double amplitude) {
  if (!(amplitude > 0.0)) throw ContractError("gen_pan: amplitude must be positive");
  std::mt19937_64 rng(seed);
  EmbeddingSource embed(rng, kEmbeddingNoise);
  std::uniform_real_distribution<double> jitter(-20.0, 20.0);
  std::uniform_real_distribution<double> score(0.8, 0.95);

  constexpr int kTargets = 3;
  constexpr int kHold = 8;
  constexpr int kPan = 10;
  constexpr int kSettle = 10;
  const int n_frames = kHold + kPan + kSettle;

  Scenario s;
  s.name = "pan";
  s.embedding_dim = kEmbeddingDim;
  s.camera = CmcTable{};

  std::vector<Box> boxes;
  for (int k = 0; k < kTargets; ++k) {
    boxes.push_back(centered(std::round(300.0 + 250.0 * k + jitter(rng)),
                             std::round(300.0 + jitter(rng))));
  }
  for (int f = 1; f <= n_frames; ++f) {
    CameraTransform t;
    if (f > kHold && f <= kHold + kPan) t.T = Eigen::Vector2d(-amplitude, 0.0);
    s.camera->set(f, t);
    if (f > 1) {
      for (auto& b : boxes) b = transform_box(t, b);
    }
    for (int k = 0; k < kTargets; ++k) {
      s.ground_truth[k + 1][f] = boxes[static_cast<std::size_t>(k)];
      emit(s, f, k + 1, boxes[static_cast<std::size_t>(k)], score(rng), embed.sample(k + 1));
    }
  }
  return s;
}

Scenario gen_occlusion(std::uint64_t seed, int gap) {
  if (gap < 2) throw ContractError("gen_occlusion: gap must be >= 2");
  std::mt19937_64 rng(seed);
  EmbeddingSource embed(rng, kEmbeddingNoise);
  std::uniform_real_distribution<double> drift(-3.0, 3.0);
  std::uniform_real_distribution<double> score(0.8, 0.95);

  constexpr int kHideAt = 12;
  const int n_frames = kHideAt + gap + 15;

  struct Mover {
    Eigen::Vector2d start;
    Eigen::Vector2d velocity;
  };
  std::vector<Mover> movers = {
      {{100.0, 200.0}, {10.0, 0.0}},
      {{150.0, 450.0}, {drift(rng), drift(rng)}},
      {{600.0, 700.0}, {drift(rng), drift(rng)}},
  };

  Scenario s;
  s.name = "occlusion";
  s.embedding_dim = kEmbeddingDim;
  for (int f = 1; f <= n_frames; ++f) {
    for (std::size_t k = 0; k < movers.size(); ++k) {
      const int id = static_cast<int>(k) + 1;
      const bool hidden_target = id == 1;
      const bool hidden = hidden_target && f >= kHideAt && f < kHideAt + gap;
      // Time spent moving: the hidden target stands still while out of view.
      int moving = f - 1;
      if (hidden_target && f >= kHideAt) moving -= std::min(f - kHideAt + 1, gap);
      const Eigen::Vector2d c = movers[k].start + movers[k].velocity * moving;
      const Box box = centered(c.x(), c.y());
      s.ground_truth[id][f] = box;
      const double sc = score(rng);
      Embedding e = embed.sample(id);
      if (!hidden) emit(s, f, id, box, sc, std::move(e));
    }
  }
  return s;
}

std::vector<std::string> scenario_names() { return {"crossing", "occlusion", "pan"}; }

Scenario generate(const std::string& name, std::uint64_t seed) {
  if (name == "crossing") return gen_crossing(seed);
  if (name == "pan") return gen_pan(seed);
  if (name == "occlusion") return gen_occlusion(seed);
  std::string known;
  for (const auto& n : scenario_names()) known += (known.empty() ? "" : ", ") + n;
  throw ContractError("unknown scenario '" + name + "' (available: " + known + ")");
}

void write_scenario(const Scenario& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* file) {
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw InputError("cannot write '" + (dir / file).string() + "'");
    return out;
  };
  {
    auto out = open("det.txt");
    io::write_detections(s.bare_detections(), out);
  }
  {
    auto out = open("emb.txt");
    io::write_embeddings(s.embeddings(), out, io::EmbeddingEncoding::kText);
  }
  {
    auto out = open("gt.txt");
    const auto gt = s.ground_truth_frames();
    io::write_tracks(gt, out);
  }
  if (s.camera) {
    auto out = open("cmc.txt");
    io::write_cmc(*s.camera, out);
  }
}

AssocMetrics score(std::span<const FrameOutput> ground_truth, std::span<const FrameOutput> pred) {
  std::map<FrameIndex, const FrameOutput*> gt_frames, pred_frames;
  for (const auto& f : ground_truth) gt_frames[f.frame] = &f;
  for (const auto& f : pred) pred_frames[f.frame] = &f;

  AssocMetrics m;
  std::map<int, int> last_match;  // gt id -> predicted id
  std::map<std::pair<int, int>, int> co_matched;
  std::map<int, int> gt_index, pred_index;

  for (const auto& f : ground_truth) {
    m.gt_boxes += static_cast<int>(f.entries.size());
    for (const auto& e : f.entries) gt_index.emplace(e.track_id, static_cast<int>(gt_index.size()));
  }
  for (const auto& f : pred) {
    m.pred_boxes += static_cast<int>(f.entries.size());
    for (const auto& e : f.entries) pred_index.emplace(e.track_id, static_cast<int>(pred_index.size()));
  }

  int matched = 0;
  for (const auto& [frame, gt] : gt_frames) {
    const auto pit = pred_frames.find(frame);
    if (pit == pred_frames.end()) continue;
    const auto& preds = pit->second->entries;
    struct Pair {
      double overlap;
      std::size_t g;
      std::size_t p;
    };
    std::vector<Pair> pairs;
    for (std::size_t g = 0; g < gt->entries.size(); ++g) {
      for (std::size_t p = 0; p < preds.size(); ++p) {
        const double o = iou(gt->entries[g].box, preds[p].box);
        if (o >= 0.5) pairs.push_back({o, g, p});
      }
    }
    // Ties resolved by ground-truth id and predicted geometry, never by
    // predicted id, so relabeling predictions cannot change the result.
    std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
      if (a.overlap != b.overlap) return a.overlap > b.overlap;
      const auto& ga = gt->entries[a.g];
      const auto& gb = gt->entries[b.g];
      if (ga.track_id != gb.track_id) return ga.track_id < gb.track_id;
      const Box& pa = preds[a.p].box;
      const Box& pb = preds[b.p].box;
      return std::tie(pa.left, pa.top, pa.width, pa.height) <
             std::tie(pb.left, pb.top, pb.width, pb.height);
    });
    std::vector<char> g_used(gt->entries.size(), false), p_used(preds.size(), false);
    auto take = [&](std::size_t g, std::size_t p) {
      g_used[g] = p_used[p] = true;
      ++matched;
      const int gid = gt->entries[g].track_id;
      const int pid = preds[p].track_id;
      const auto it = last_match.find(gid);
      if (it != last_match.end() && it->second != pid) ++m.id_switches;
      last_match[gid] = pid;
      ++co_matched[{gid, pid}];
    };
    // Correspondences from earlier frames survive while they still overlap,
    // as in CLEAR MOT; only the remainder is matched greedily.
    for (const auto& pr : pairs) {
      const auto it = last_match.find(gt->entries[pr.g].track_id);
      if (it != last_match.end() && it->second == preds[pr.p].track_id && !g_used[pr.g] &&
          !p_used[pr.p]) {
        take(pr.g, pr.p);
      }
    }
    for (const auto& pr : pairs) {
      if (!g_used[pr.g] && !p_used[pr.p]) take(pr.g, pr.p);
    }
  }

  m.false_negatives = m.gt_boxes - matched;
  m.false_positives = m.pred_boxes - matched;
  m.mota_lite = 1.0 - static_cast<double>(m.false_negatives + m.false_positives + m.id_switches) /
                          static_cast<double>(std::max(m.gt_boxes, 1));

  if (!co_matched.empty()) {
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gt_index.size()),
                                                   static_cast<Eigen::Index>(pred_index.size()));
    for (const auto& [ids, n] : co_matched) {
      counts(gt_index.at(ids.first), pred_index.at(ids.second)) = n;
    }
    const std::vector<int> assignment = max_weight_assignment(counts);
    double idtp = 0.0;
    for (std::size_t g = 0; g < assignment.size(); ++g) {
      if (assignment[g] >= 0) idtp += counts(static_cast<Eigen::Index>(g), assignment[g]);
    }
    m.idf1_lite = 2.0 * idtp / static_cast<double>(m.gt_boxes + m.pred_boxes);
  }
  return m;
}

AssocMetrics score(const Scenario& gt, std::span<const FrameOutput> pred) {
  const auto frames = gt.ground_truth_frames();
  return score(std::span<const FrameOutput>(frames), pred);
}

}  // namespace motrack::synth
