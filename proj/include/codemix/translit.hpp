#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace codemix::translit {

// One step of a monotone character alignment. kind: 's' substitute (also
// identity), 'i' insert, 'd' delete. src/tgt are single code points encoded
// as UTF-8 ("" on the missing side).
struct EditStep {
    char kind = 's';
    std::string src;
    std::string tgt;

    bool operator==(const EditStep&) const = default;
};

using Alignment = std::vector<EditStep>;

// Minimum-edit-distance alignment with unit costs; cost ties prefer
// substitution over insertion over deletion.
Alignment align_pair(const std::string& source, const std::string& target);

// Errors on an empty word on either side.
std::vector<Alignment> align_pairs(const std::vector<std::pair<std::string, std::string>>& pairs);

struct NoiseConfig {
    double p_drop = 0.5; // each non-initial vowel dropped with this probability
    double p_sub = 0.1;  // each confusable consonant replaced with this probability
    std::string vowels = "aeiouAEIOU";
};

// For every word emits the identity pair and, when the sampled noisy variant
// differs, a (noisy, clean) pair. `confusion` holds directed replacements
// (source code point -> replacement string). Deterministic under seed.
std::vector<std::pair<std::string, std::string>> generate_noisy_pairs(
    const std::vector<std::string>& clean_words,
    const std::vector<std::pair<std::string, std::string>>& confusion, std::uint64_t seed,
    const NoiseConfig& config = {});

// Decoder action at one source position: optionally insert a string before
// consuming the position's character by substitution (emit) or deletion.
struct TransducerModel {
    std::unordered_map<std::string, double> weights;
    // per source char: emissions seen in training (sorted); fallback = {char}
    std::unordered_map<std::string, std::vector<std::string>> substitutions;
    std::unordered_set<std::string> deletable;   // chars seen deleted
    std::vector<std::string> insertions;         // insertable strings (sorted)

    double feature_weight(const std::string& f) const;
    std::vector<std::string> candidates(const std::string& src_char) const;
};

struct PerceptronConfig {
    int epochs = 10;
    std::uint64_t seed = 1;
    int beam = 5;
};

// Called after each epoch with the number of weight updates made and a
// snapshot of the averaged model as it would be if training stopped here.
using TransducerEpochCallback = std::function<void(int epoch, int updates, const TransducerModel&)>;

// Averaged structured perceptron over gold edit-action sequences derived from
// monotone alignments.
TransducerModel train_transducer(const std::vector<std::pair<std::string, std::string>>& pairs,
                                 const PerceptronConfig& config = {},
                                 const TransducerEpochCallback& after_epoch = {});

struct Candidate {
    std::string word;
    double score = 0.0;
};

// Beam search over edit sequences, beam = global top-b per source position
// with candidates deduplicated by output string; results sorted by score
// descending, ties by output ascending. b=1 degenerates to greedy decoding.
std::vector<Candidate> kbest_transduce(const TransducerModel& model, const std::string& word, int b);

void save_transducer(const TransducerModel& model, std::ostream& out);
TransducerModel load_transducer(std::istream& in);
void save_transducer_file(const TransducerModel& model, const std::string& path);
TransducerModel load_transducer_file(const std::string& path);

} // namespace codemix::translit
