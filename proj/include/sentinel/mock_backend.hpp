#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/backend.hpp"

namespace sentinel {

// Stable 64-bit hash used by every mock; not std::hash so outputs match
// across platforms and standard libraries.
uint64_t stable_hash(std::string_view bytes, uint64_t seed);

// Deterministic text embedding: character trigrams of normalize_text(text)
// are hashed into dim buckets and the count vector is scaled to unit norm.
// Zero accumulation (e.g. empty text) yields the first basis vector.
std::vector<double> mock_embed(std::string_view text, uint64_t seed, int dim);

// Deterministic template instantiation for the text-producing kinds.
// Throws MissingFixture for Ocr/Captioner when image_ref is unknown.
std::string mock_generate(BackendKind kind, const std::map<std::string, std::string>& inputs,
                          const std::optional<std::string>& image_ref, uint64_t seed,
                          const MockContext& ctx);

// Answer-image consistency score in [0, 100]:
// 100 * max(0, cosine(embed(question+answer), embed(fixture caption))).
double mock_vqascore(const std::string& question, const std::string& answer,
                     const std::string& image_ref, uint64_t seed, const MockContext& ctx);

}  // namespace sentinel
