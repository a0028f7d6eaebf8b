#include "motrack/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>

#include "motrack/error.hpp"

namespace motrack::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

class LineError {
 public:
  LineError(std::string_view source, std::size_t line) : source_(source), line_(line) {}
  [[noreturn]] void fail(const std::string& what) const {
    throw InputError(std::string(source_) + ":" + std::to_string(line_) + ": " + what);
  }

 private:
  std::string_view source_;
  std::size_t line_;
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, const LineError& err, const char* what) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    err.fail(std::string("invalid ") + what + " '" + std::string(field) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) err.fail(std::string("non-finite ") + what);
  }
  return value;
}

FrameIndex parse_frame(std::string_view field, const LineError& err) {
  const auto f = parse_number<FrameIndex>(field, err, "frame");
  if (f < 0) err.fail("negative frame index");
  return f;
}

// Calls `row(fields, err)` for every non-blank line.
template <typename Fn>
void for_each_row(std::istream& in, std::string_view source, Fn&& row) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = trim(line);
    if (t.empty()) continue;
    row(split_fields(t), LineError(source, lineno));
  }
}

void append_fixed(std::string& out, double v, int precision) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                       std::chars_format::fixed, precision);
  out.append(buf.data(), ptr);
}

void append_shortest(std::string& out, double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

void append_shortest(std::string& out, float v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

void flush_checked(std::ostream& out, const std::string& text) {
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw Error("write failed");
}

constexpr std::array<char, 4> kEmbeddingMagic = {'E', 'M', 'B', '1'};

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

struct RawEmbedding {
  FrameIndex frame;
  std::int64_t ordinal;
  Eigen::VectorXd values;
};

std::vector<RawEmbedding> decode_binary(const std::string& bytes, std::string_view source) {
  auto fail = [&](const std::string& what) {
    throw InputError(std::string(source) + ": " + what);
  };
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12) fail("truncated binary header");
  const std::uint32_t dim = read_u32(p + 4);
  const std::uint32_t count = read_u32(p + 8);
  if (dim == 0) fail("embedding dimension must be positive");
  const std::size_t record = 8 + 4 * static_cast<std::size_t>(dim);
  if (bytes.size() != 12 + record * count) {
    fail("binary size " + std::to_string(bytes.size()) + " does not match header (d=" +
         std::to_string(dim) + ", count=" + std::to_string(count) + ")");
  }
  std::vector<RawEmbedding> out;
  out.reserve(count);
  for (std::uint32_t r = 0; r < count; ++r) {
    const unsigned char* rec = p + 12 + r * record;
    const auto frame = static_cast<std::int32_t>(read_u32(rec));
    const auto ordinal = static_cast<std::int32_t>(read_u32(rec + 4));
    if (frame < 0) fail("record " + std::to_string(r) + ": negative frame index");
    Eigen::VectorXd v(dim);
    for (std::uint32_t k = 0; k < dim; ++k) {
      const std::uint32_t bits = read_u32(rec + 8 + 4 * k);
      float f;
      std::memcpy(&f, &bits, sizeof f);
      if (!std::isfinite(f)) fail("record " + std::to_string(r) + ": non-finite component");
      v(k) = static_cast<double>(f);
    }
    out.push_back({frame, ordinal, std::move(v)});
  }
  return out;
}

std::vector<RawEmbedding> decode_text(const std::string& text, std::string_view source) {
  std::istringstream in(text);
  std::vector<RawEmbedding> out;
  std::optional<std::size_t> dim;
  std::size_t count = 0;
  for_each_row(in, source, [&](const std::vector<std::string_view>& f, const LineError& err) {
    if (!dim) {
      if (f.size() != 2) err.fail("expected header 'dimension,count'");
      const auto d = parse_number<std::int64_t>(f[0], err, "dimension");
      const auto c = parse_number<std::int64_t>(f[1], err, "count");
      if (d <= 0) err.fail("embedding dimension must be positive");
      if (c < 0) err.fail("negative embedding count");
      dim = static_cast<std::size_t>(d);
      count = static_cast<std::size_t>(c);
      return;
    }
    if (f.size() != *dim + 2) {
      err.fail("expected " + std::to_string(*dim + 2) + " fields, got " + std::to_string(f.size()));
    }
    RawEmbedding e{parse_frame(f[0], err), parse_number<std::int64_t>(f[1], err, "ordinal"),
                   Eigen::VectorXd(static_cast<Eigen::Index>(*dim))};
    for (std::size_t k = 0; k < *dim; ++k) {
      e.values(static_cast<Eigen::Index>(k)) =
          static_cast<double>(parse_number<float>(f[k + 2], err, "embedding component"));
    }
    out.push_back(std::move(e));
  });
  if (!dim) {
    return out;
  }
  if (out.size() != count) {
    throw InputError(std::string(source) + ": header announces " + std::to_string(count) +
                     " rows, found " + std::to_string(out.size()));
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

DetectionStream parse_detections(std::istream& in, std::string_view source) {
  DetectionStream out;
  for_each_row(in, source, [&](const std::vector<std::string_view>& f, const LineError& err) {
    if (f.size() < 7 || f.size() > 10) {
      err.fail("expected 7 to 10 fields, got " + std::to_string(f.size()));
    }
    const FrameIndex frame = parse_frame(f[0], err);
    Detection d;
    d.box.left = parse_number<double>(f[2], err, "left");
    d.box.top = parse_number<double>(f[3], err, "top");
    d.box.width = parse_number<double>(f[4], err, "width");
    d.box.height = parse_number<double>(f[5], err, "height");
    d.score = parse_number<double>(f[6], err, "score");
    if (!(d.box.width > 0.0) || !(d.box.height > 0.0)) err.fail("width and height must be positive");
    if (d.score < 0.0 || d.score > 1.0) err.fail("score must lie in [0, 1]");
    out[frame].push_back(std::move(d));
  });
  return out;
}

void write_detections(const DetectionStream& dets, std::ostream& out) {
  std::string text;
  for (const auto& [frame, ds] : dets) {
    for (const auto& d : ds) {
      text += std::to_string(frame);
      text += ",-1,";
      append_shortest(text, d.box.left);
      text += ',';
      append_shortest(text, d.box.top);
      text += ',';
      append_shortest(text, d.box.width);
      text += ',';
      append_shortest(text, d.box.height);
      text += ',';
      append_shortest(text, d.score);
      text += ",-1,-1,-1\n";
    }
  }
  flush_checked(out, text);
}

std::map<FrameIndex, std::size_t> detection_counts(const DetectionStream& dets) {
  std::map<FrameIndex, std::size_t> out;
  for (const auto& [frame, ds] : dets) out[frame] = ds.size();
  return out;
}

EmbeddingStream parse_embeddings(std::istream& in,
                                 const std::map<FrameIndex, std::size_t>& expected_counts,
                                 std::string_view source) {
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const bool binary =
      bytes.size() >= 4 && std::equal(kEmbeddingMagic.begin(), kEmbeddingMagic.end(), bytes.begin());
  std::vector<RawEmbedding> raw = binary ? decode_binary(bytes, source) : decode_text(bytes, source);

  std::map<FrameIndex, std::vector<std::optional<Embedding>>> slots;
  std::optional<Eigen::Index> dim;
  for (auto& r : raw) {
    const std::string where = std::string(source) + ": frame " + std::to_string(r.frame);
    const auto it = expected_counts.find(r.frame);
    if (it == expected_counts.end() || it->second == 0) {
      throw InputError(where + " has embeddings but no detections");
    }
    if (r.ordinal < 0 || static_cast<std::size_t>(r.ordinal) >= it->second) {
      throw InputError(where + ": ordinal " + std::to_string(r.ordinal) + " out of range for " +
                       std::to_string(it->second) + " detections");
    }
    if (dim && *dim != r.values.size()) throw InputError(where + ": dimension changes");
    dim = r.values.size();
    auto& frame_slots = slots[r.frame];
    frame_slots.resize(it->second);
    auto& slot = frame_slots[static_cast<std::size_t>(r.ordinal)];
    if (slot) throw InputError(where + ": duplicate ordinal " + std::to_string(r.ordinal));
    try {
      slot = Embedding::normalized(std::move(r.values));
    } catch (const InputError& e) {
      throw InputError(where + ", ordinal " + std::to_string(r.ordinal) + ": " + e.what());
    }
  }

  EmbeddingStream out;
  for (const auto& [frame, n] : expected_counts) {
    if (n == 0) continue;
    const auto it = slots.find(frame);
    if (it == slots.end()) {
      throw InputError(std::string(source) + ": frame " + std::to_string(frame) + " has " +
                       std::to_string(n) + " detections but no embeddings");
    }
    auto& embs = out[frame];
    for (std::size_t k = 0; k < it->second.size(); ++k) {
      if (!it->second[k]) {
        throw InputError(std::string(source) + ": frame " + std::to_string(frame) + " has " +
                         std::to_string(n) + " detections but ordinal " + std::to_string(k) +
                         " is missing");
      }
      embs.push_back(*it->second[k]);
    }
  }
  return out;
}

void write_embeddings(const EmbeddingStream& embs, std::ostream& out, EmbeddingEncoding enc) {
  std::size_t count = 0;
  Eigen::Index dim = 0;
  for (const auto& [frame, es] : embs) {
    for (const auto& e : es) {
      if (dim != 0 && e.dim() != dim) throw ContractError("write_embeddings: dimension changes");
      dim = e.dim();
      ++count;
    }
  }
  std::string data;
  if (enc == EmbeddingEncoding::kBinary) {
    data.append(kEmbeddingMagic.begin(), kEmbeddingMagic.end());
    put_u32(data, static_cast<std::uint32_t>(dim));
    put_u32(data, static_cast<std::uint32_t>(count));
    for (const auto& [frame, es] : embs) {
      for (std::size_t k = 0; k < es.size(); ++k) {
        put_u32(data, static_cast<std::uint32_t>(static_cast<std::int32_t>(frame)));
        put_u32(data, static_cast<std::uint32_t>(k));
        for (Eigen::Index i = 0; i < es[k].dim(); ++i) {
          const float f = static_cast<float>(es[k].values()(i));
          std::uint32_t bits;
          std::memcpy(&bits, &f, sizeof bits);
          put_u32(data, bits);
        }
      }
    }
  } else {
    data += std::to_string(dim) + "," + std::to_string(count) + "\n";
    for (const auto& [frame, es] : embs) {
      for (std::size_t k = 0; k < es.size(); ++k) {
        data += std::to_string(frame) + "," + std::to_string(k);
        for (Eigen::Index i = 0; i < es[k].dim(); ++i) {
          data += ',';
          append_shortest(data, static_cast<float>(es[k].values()(i)));
        }
        data += '\n';
      }
    }
  }
  flush_checked(out, data);
}

CmcTable parse_cmc(std::istream& in, std::string_view source) {
  CmcTable out;
  std::set<FrameIndex> seen;
  for_each_row(in, source, [&](const std::vector<std::string_view>& f, const LineError& err) {
    if (f.size() != 7) err.fail("expected 7 fields, got " + std::to_string(f.size()));
    const FrameIndex frame = parse_frame(f[0], err);
    if (!seen.insert(frame).second) err.fail("duplicate frame " + std::to_string(frame));
    CameraTransform t;
    t.M(0, 0) = parse_number<double>(f[1], err, "a11");
    t.M(0, 1) = parse_number<double>(f[2], err, "a12");
    t.T(0) = parse_number<double>(f[3], err, "tx");
    t.M(1, 0) = parse_number<double>(f[4], err, "a21");
    t.M(1, 1) = parse_number<double>(f[5], err, "a22");
    t.T(1) = parse_number<double>(f[6], err, "ty");
    out.set(frame, t);
  });
  return out;
}

void write_cmc(const CmcTable& cmc, std::ostream& out) {
  std::string text;
  for (const auto& [frame, t] : cmc.entries()) {
    text += std::to_string(frame);
    for (double v : {t.M(0, 0), t.M(0, 1), t.T(0), t.M(1, 0), t.M(1, 1), t.T(1)}) {
      text += ',';
      append_shortest(text, v);
    }
    text += '\n';
  }
  flush_checked(out, text);
}

void write_tracks(std::span<const FrameOutput> outputs, std::ostream& out) {
  struct Row {
    FrameIndex frame;
    const FrameOutputEntry* entry;
  };
  std::vector<Row> rows;
  for (const auto& fo : outputs) {
    for (const auto& e : fo.entries) rows.push_back({fo.frame, &e});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.entry->track_id < b.entry->track_id;
  });
  std::string text;
  for (const auto& r : rows) {
    text += std::to_string(r.frame) + "," + std::to_string(r.entry->track_id);
    for (double v : {r.entry->box.left, r.entry->box.top, r.entry->box.width,
                     r.entry->box.height, r.entry->score}) {
      text += ',';
      append_fixed(text, v, 2);
    }
    text += ",-1,-1,-1\n";
  }
  flush_checked(out, text);
}

std::vector<FrameOutput> parse_tracks(std::istream& in, std::string_view source) {
  std::map<FrameIndex, FrameOutput> frames;
  std::set<std::pair<FrameIndex, int>> seen;
  for_each_row(in, source, [&](const std::vector<std::string_view>& f, const LineError& err) {
    if (f.size() < 7 || f.size() > 10) {
      err.fail("expected 7 to 10 fields, got " + std::to_string(f.size()));
    }
    const FrameIndex frame = parse_frame(f[0], err);
    FrameOutputEntry e;
    e.track_id = parse_number<int>(f[1], err, "track id");
    e.box.left = parse_number<double>(f[2], err, "left");
    e.box.top = parse_number<double>(f[3], err, "top");
    e.box.width = parse_number<double>(f[4], err, "width");
    e.box.height = parse_number<double>(f[5], err, "height");
    e.score = parse_number<double>(f[6], err, "score");
    if (!(e.box.width > 0.0) || !(e.box.height > 0.0)) err.fail("width and height must be positive");
    if (!seen.insert({frame, e.track_id}).second) {
      err.fail("duplicate (frame, id) pair (" + std::to_string(frame) + ", " +
               std::to_string(e.track_id) + ")");
    }
    auto& fo = frames[frame];
    fo.frame = frame;
    fo.entries.push_back(e);
  });
  std::vector<FrameOutput> out;
  for (auto& [frame, fo] : frames) {
    std::sort(fo.entries.begin(), fo.entries.end(),
              [](const auto& a, const auto& b) { return a.track_id < b.track_id; });
    out.push_back(std::move(fo));
  }
  return out;
}

DetectionStream read_detections(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_detections(in, path.string());
}

EmbeddingStream read_embeddings(const std::filesystem::path& path,
                                const std::map<FrameIndex, std::size_t>& expected_counts) {
  auto in = open_input(path);
  return parse_embeddings(in, expected_counts, path.string());
}

CmcTable read_cmc(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_cmc(in, path.string());
}

std::vector<FrameOutput> read_tracks(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_tracks(in, path.string());
}

}  // namespace motrack::io
