#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motrack/tracker.hpp"

namespace motrack::io {

/// MOT detection rows: frame,-1,left,top,width,height,score[,-1,-1,-1].
/// Order within a frame is preserved; it defines the embedding ordinals.
/// Throws InputError naming the line on any malformed row.
DetectionStream parse_detections(std::istream& in, std::string_view source = "<detections>");
void write_detections(const DetectionStream& dets, std::ostream& out);

/// Number of detections in each frame, the join key for embeddings.
std::map<FrameIndex, std::size_t> detection_counts(const DetectionStream& dets);

/// Embedding file, text or binary, detected from the first bytes.
///
/// Text: a "d,count" header line, then `count` rows "frame,ordinal,v1,...,vd".
/// Binary: the ASCII magic "EMB1", uint32 d, uint32 count, then `count`
/// records of int32 frame, int32 ordinal and d float32 values, all
/// little-endian.
///
/// Components are carried at 32-bit float precision in both encodings and
/// L2-normalized on ingestion. Ordinals must be dense from 0 in each frame
/// and the per-frame counts must match `expected_counts`.
EmbeddingStream parse_embeddings(std::istream& in,
                                 const std::map<FrameIndex, std::size_t>& expected_counts,
                                 std::string_view source = "<embeddings>");

enum class EmbeddingEncoding { kText, kBinary };
void write_embeddings(const EmbeddingStream& embs, std::ostream& out, EmbeddingEncoding enc);

/// Rows "frame,a11,a12,tx,a21,a22,ty" (row-major [M | T]); each maps frame
/// t-1 coordinates into frame t.
CmcTable parse_cmc(std::istream& in, std::string_view source = "<cmc>");
void write_cmc(const CmcTable& cmc, std::ostream& out);

/// MOT result rows frame,id,left,top,width,height,score,-1,-1,-1 sorted by
/// (frame, id), values with two decimals.
void write_tracks(std::span<const FrameOutput> outputs, std::ostream& out);
std::vector<FrameOutput> parse_tracks(std::istream& in, std::string_view source = "<tracks>");

/// File helpers; they throw InputError if the file cannot be opened.
DetectionStream read_detections(const std::filesystem::path& path);
EmbeddingStream read_embeddings(const std::filesystem::path& path,
                                const std::map<FrameIndex, std::size_t>& expected_counts);
CmcTable read_cmc(const std::filesystem::path& path);
std::vector<FrameOutput> read_tracks(const std::filesystem::path& path);

}  // namespace motrack::io
