#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "codemix/conllu.hpp"

namespace codemix::emb {

// Seed for the shared <unk> vector so every head sees the same OOV embedding.
inline constexpr std::uint64_t kOovSeed = 0x756e6b; // "unk"

inline constexpr const char* kUnknown = "<unk>";

// Pre-trained word vectors. Lookups never fail: unknown words get oov_vector.
struct EmbeddingTable {
    int dimension = 0;
    std::unordered_map<std::string, Eigen::VectorXd> entries;
    Eigen::VectorXd oov_vector;

    const Eigen::VectorXd& lookup(const std::string& word) const;
    bool contains(const std::string& word) const { return entries.count(word) != 0; }
};

struct BilingualLexicon {
    // source word -> translations (non-empty)
    std::unordered_map<std::string, std::vector<std::string>> pairs;
};

// Each coordinate uniform in [-0.25, 0.25]; same seed gives the same vector.
Eigen::VectorXd random_embedding(std::uint64_t seed, int dimension);

// One entry per line: word then floats. Optional "count dim" header line.
EmbeddingTable load_embeddings(std::istream& in, std::optional<int> expected_dim = std::nullopt);
EmbeddingTable load_embeddings_file(const std::string& path, std::optional<int> expected_dim = std::nullopt);

// Two-column TSV (source, target); repeated rows accumulate translations.
BilingualLexicon load_lexicon(std::istream& in);
BilingualLexicon load_lexicon_file(const std::string& path);

// Projects lexicon source words into `source`'s space: each gets the mean of
// its in-vocabulary translations; words with none are dropped.
EmbeddingTable project_lexicon(const EmbeddingTable& source, const BilingualLexicon& lexicon);

// Fixed two-dimensional language vectors: hi -> (-0.25, 0.25), en -> (0.25, -0.25).
Eigen::Vector2d language_tag_vector(conllu::LanguageTag lang);

} // namespace codemix::emb
