#pragma once

#include <string>
#include <vector>

#include "codemix/conllu.hpp"
#include "codemix/nn.hpp"

namespace codemix::lid {

// form, lower, prev, next, p1..p4, s1..s4, has_digit, has_punct, is_cap
const std::vector<std::string>& lid_slot_names();

// Feature values for the token at 0-based `position`; sentence edges pad the
// neighbor-word slots with <s> / </s>.
std::vector<std::string> extract_lid_features(const conllu::Sentence& sentence, int position);

struct LidModelConfig {
    int word_dim = 80;
    int affix_dim = 20;
    int shape_dim = 2;
    int hidden_size = 200;
    const emb::EmbeddingTable* pretrained = nullptr;
    std::uint64_t seed = 1;
};

// Labels are the fixed five-tag inventory (hi, en, acro, ne, univ); ties in
// prediction resolve in that order.
nn::FeedForwardModel build_lid_model(const std::vector<conllu::Sentence>& corpus,
                                     const LidModelConfig& config);

// One example per token; gold comes from the token's Lang tag (error if unset).
std::vector<nn::Example> build_lid_examples(const std::vector<conllu::Sentence>& corpus);

// Sets lang on every token; the rest of the sentence is untouched.
void tag_languages(const nn::FeedForwardModel& model, conllu::Sentence& sentence);

} // namespace codemix::lid
