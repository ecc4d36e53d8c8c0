#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace codemix::kn {

inline constexpr const char* kBos = "<s>";
inline constexpr const char* kEos = "</s>";
inline constexpr const char* kUnk = "<unk>";

// Interpolated modified Kneser-Ney trigram model in backoff form: stored
// probabilities are the fully interpolated values for seen n-grams; unseen
// n-grams back off through the context's gamma weight. For every history the
// conditional distribution over the predictable vocabulary (everything but
// <s>) sums to one.
class TrigramLM {
public:
    // Sentences of plain tokens; <s> / </s> padding and singleton-to-<unk>
    // replacement happen internally. Errors on an empty corpus.
    static TrigramLM train(const std::vector<std::vector<std::string>>& corpus);

    // Natural-log p(word | history); OOV words and history tokens map to
    // <unk>, history is truncated to the last two tokens. p(<s> | h) is a
    // hard floor (log 1e-99), mirroring ARPA's -99 convention.
    double log_prob(const std::vector<std::string>& history, const std::string& word) const;

    // All words a history can predict: unigram types except <s>.
    const std::vector<std::string>& predictable_vocab() const { return predictable_; }
    bool in_vocab(const std::string& word) const { return vocab_.count(word) != 0; }

    void save_arpa(std::ostream& out) const;
    static TrigramLM load_arpa(std::istream& in);
    void save_arpa_file(const std::string& path) const;
    static TrigramLM load_arpa_file(const std::string& path);

private:
    friend struct TrigramLMBuilder;

    std::unordered_set<std::string> vocab_; // includes <s>, </s>, <unk>
    std::vector<std::string> predictable_;
    std::unordered_map<std::string, double> unigram_logp_;
    std::unordered_map<std::string, double> unigram_backoff_;  // log gamma(v)
    std::unordered_map<std::string, double> bigram_logp_;      // "v w"
    std::unordered_map<std::string, double> bigram_backoff_;   // log gamma(u v), key "u v"
    std::unordered_map<std::string, double> trigram_logp_;     // "u v w"

    std::string map_word(const std::string& w) const;
    double bigram_log_prob(const std::string& v, const std::string& w) const;
};

} // namespace codemix::kn
